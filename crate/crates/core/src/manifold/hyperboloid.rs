//! Hyperboloid model `{x ∈ ℝⁿ⁺¹ : ⟨x,x⟩_L = −1, x₀ > 0}` with constant
//! curvature −1.

use crate::error::{Error, Result};

/// Tolerance on the Minkowski constraints, relative to `max(1, ‖x‖²)`.
const CONSTRAINT_TOL: f64 = 1e-9;

#[inline]
pub(crate) fn minkowski(u: &[f64], v: &[f64]) -> f64 {
    -u[0] * v[0] + u[1..].iter().zip(&v[1..]).map(|(a, b)| a * b).sum::<f64>()
}

fn euclid_sq(u: &[f64]) -> f64 {
    u.iter().map(|a| a * a).sum()
}

pub(crate) fn check_point(x: &[f64]) -> Result<()> {
    let q = minkowski(x, x);
    if !(x[0] > 0.0) || (q + 1.0).abs() > CONSTRAINT_TOL * euclid_sq(x).max(1.0) {
        return Err(Error::InvalidPoint(format!(
            "not on the hyperboloid: <x,x>_L = {q}, x0 = {}",
            x[0]
        )));
    }
    Ok(())
}

pub(crate) fn check_tangent(x: &[f64], v: &[f64]) -> Result<()> {
    let q = minkowski(x, v);
    let scale = (euclid_sq(x) * euclid_sq(v)).sqrt().max(1.0);
    if !q.is_finite() || q.abs() > CONSTRAINT_TOL * scale {
        return Err(Error::InvalidTangent(format!("<x,v>_L = {q:e}")));
    }
    Ok(())
}

/// Lifts the spatial coordinates onto the upper sheet.
pub(crate) fn lift(spatial: &[f64]) -> Vec<f64> {
    let mut x = Vec::with_capacity(spatial.len() + 1);
    x.push((1.0 + euclid_sq(spatial)).sqrt());
    x.extend_from_slice(spatial);
    x
}

/// `w + ⟨x,w⟩_L x`, the Minkowski-orthogonal projection onto `T_x`.
pub(crate) fn project(x: &[f64], w: &[f64]) -> Vec<f64> {
    let c = minkowski(x, w);
    w.iter().zip(x).map(|(wi, xi)| wi + c * xi).collect()
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    minkowski(v, v).max(0.0).sqrt()
}

pub(crate) fn exp(x: &[f64], v: &[f64]) -> Vec<f64> {
    let t = norm(v);
    if t < super::SMALL_VECTOR {
        return x.to_vec();
    }
    let (c, s) = (t.cosh(), t.sinh() / t);
    let y: Vec<f64> = x.iter().zip(v).map(|(a, b)| c * a + s * b).collect();
    lift(&y[1..])
}

/// Returns `(d, u, ‖u‖_L)` with `u = y + ⟨x,y⟩_L x` and `d = asinh ‖u‖_L`.
fn log_parts(x: &[f64], y: &[f64]) -> (f64, Vec<f64>, f64) {
    let a = minkowski(x, y);
    let u: Vec<f64> = y.iter().zip(x).map(|(yi, xi)| yi + a * xi).collect();
    let nu = norm(&u);
    (nu.asinh(), u, nu)
}

pub(crate) fn log(x: &[f64], y: &[f64]) -> Vec<f64> {
    let (d, u, nu) = log_parts(x, y);
    if d < super::SMALL_VECTOR {
        return vec![0.0; x.len()];
    }
    let s = d / nu;
    let v: Vec<f64> = u.iter().map(|ui| s * ui).collect();
    project(x, &v)
}

pub(crate) fn dist(x: &[f64], y: &[f64]) -> f64 {
    log_parts(x, y).0
}

/// Parallel transport along the geodesic from x to y:
/// `v + ⟨y,v⟩_L / (1 − ⟨x,y⟩_L) · (x + y)`.
pub(crate) fn transport(x: &[f64], y: &[f64], v: &[f64]) -> Vec<f64> {
    let c = minkowski(y, v) / (1.0 - minkowski(x, y));
    let w: Vec<f64> = v
        .iter()
        .zip(x.iter().zip(y))
        .map(|(vi, (xi, yi))| vi + c * (xi + yi))
        .collect();
    project(y, &w)
}

/// Metric-orthonormal coordinates `z ∈ ℝⁿ` mapped into `T_x`: transport of
/// `(0, z)` from the apex `(1, 0, …, 0)`.
pub(crate) fn from_orthonormal(x: &[f64], z: &[f64]) -> Vec<f64> {
    let mut u = Vec::with_capacity(x.len());
    u.push(0.0);
    u.extend_from_slice(z);
    let apex_dot = x[1..].iter().zip(z).map(|(a, b)| a * b).sum::<f64>();
    let c = apex_dot / (1.0 + x[0]);
    let mut w: Vec<f64> = u.iter().zip(x).map(|(ui, xi)| ui + c * xi).collect();
    w[0] += c;
    project(x, &w)
}
