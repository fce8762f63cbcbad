//! Geometry kernel: inner products, exponential and logarithmic maps,
//! geodesic distance and parallel transport on Hadamard manifolds.
//!
//! Supported geometries are Euclidean space, SPD matrices with the
//! affine-invariant metric, the hyperboloid model of hyperbolic space and
//! finite products of those. All of them have nonpositive curvature, so
//! geodesics are unique and `log` is globally defined.

mod coords;
mod hyperboloid;
mod spd;

pub use coords::{Coords, Point, TangentVector};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{sym_func, SpectralFn, SymMatrix};

/// Tangent vectors (and log distances) below this norm are treated as zero.
pub const SMALL_VECTOR: f64 = 1e-14;

/// Curvature lower bound reported for the affine-invariant SPD metric.
pub const SPD_CURVATURE_LOWER_BOUND: f64 = -0.5;

/// Which geometry a point lives on.
#[derive(Debug, Clone, PartialEq)]
pub enum Manifold {
    Euclidean(usize),
    Spd(usize),
    /// Hyperbolic space of intrinsic dimension n, embedded in ℝⁿ⁺¹.
    Hyperboloid(usize),
    Product(Vec<Manifold>),
}

impl Manifold {
    /// Product of the given factors; must be nonempty, and nested products
    /// must be nonempty too.
    pub fn product(factors: Vec<Manifold>) -> Result<Self> {
        let m = Manifold::Product(factors);
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Manifold::Product(fs) if fs.is_empty() => Err(Error::InvalidDimension(0)),
            Manifold::Product(fs) => fs.iter().try_for_each(Manifold::validate),
            Manifold::Spd(n) if !(2..=crate::linalg::MAX_DIM).contains(n) => {
                Err(Error::InvalidDimension(*n))
            }
            Manifold::Hyperboloid(0) => Err(Error::InvalidDimension(0)),
            _ => Ok(()),
        }
    }

    /// Dimension of the tangent space.
    pub fn intrinsic_dim(&self) -> usize {
        match self {
            Manifold::Euclidean(n) | Manifold::Hyperboloid(n) => *n,
            Manifold::Spd(n) => n * (n + 1) / 2,
            Manifold::Product(fs) => fs.iter().map(Manifold::intrinsic_dim).sum(),
        }
    }

    /// Lower bound on sectional curvature. Metadata only; no solver uses it.
    pub fn curvature_lower_bound(&self) -> f64 {
        match self {
            Manifold::Euclidean(_) => 0.0,
            Manifold::Spd(_) => SPD_CURVATURE_LOWER_BOUND,
            Manifold::Hyperboloid(_) => -1.0,
            Manifold::Product(fs) => fs
                .iter()
                .map(Manifold::curvature_lower_bound)
                .fold(0.0, f64::min),
        }
    }

    pub fn factors(&self) -> &[Manifold] {
        match self {
            Manifold::Product(fs) => fs,
            m => std::slice::from_ref(m),
        }
    }

    pub fn is_euclidean(&self) -> bool {
        match self {
            Manifold::Euclidean(_) => true,
            Manifold::Product(fs) => fs.iter().all(Manifold::is_euclidean),
            _ => false,
        }
    }

    /// Checks shape and the manifold constraints of a point.
    pub fn check_point(&self, p: &Point) -> Result<()> {
        self.check_shape(&p.coords)?;
        self.check_point_coords(&p.coords)
    }

    fn check_point_coords(&self, c: &Coords) -> Result<()> {
        match (self, c) {
            (Manifold::Euclidean(_), _) => Ok(()),
            (Manifold::Spd(_), Coords::Matrix(x)) => spd::check_point(x),
            (Manifold::Hyperboloid(_), Coords::Vector(x)) => hyperboloid::check_point(x),
            (Manifold::Product(fs), Coords::Product(cs)) => fs
                .iter()
                .zip(cs)
                .try_for_each(|(f, c)| f.check_point_coords(c)),
            _ => unreachable!("shape checked"),
        }
    }

    /// Checks that `v` is a valid tangent vector at its own base point.
    pub fn check_tangent(&self, v: &TangentVector) -> Result<()> {
        self.check_shape(&v.base.coords)?;
        self.check_shape(&v.coords)?;
        self.check_tangent_coords(&v.base.coords, &v.coords)
    }

    fn check_tangent_coords(&self, p: &Coords, v: &Coords) -> Result<()> {
        match (self, p, v) {
            (Manifold::Hyperboloid(_), Coords::Vector(x), Coords::Vector(w)) => {
                hyperboloid::check_tangent(x, w)
            }
            (Manifold::Product(fs), Coords::Product(ps), Coords::Product(vs)) => fs
                .iter()
                .zip(ps.iter().zip(vs))
                .try_for_each(|(f, (p, v))| f.check_tangent_coords(p, v)),
            _ => Ok(()),
        }
    }

    fn check_shape(&self, c: &Coords) -> Result<()> {
        match (self, c) {
            (Manifold::Euclidean(n), Coords::Vector(v)) => len_check(*n, v.len()),
            (Manifold::Hyperboloid(n), Coords::Vector(v)) => len_check(n + 1, v.len()),
            (Manifold::Spd(n), Coords::Matrix(m)) => spd::dim_check(*n, m),
            (Manifold::Product(fs), Coords::Product(cs)) => {
                len_check(fs.len(), cs.len())?;
                fs.iter().zip(cs).try_for_each(|(f, c)| f.check_shape(c))
            }
            _ => Err(Error::InvalidPoint(format!(
                "coordinates do not match manifold {self:?}"
            ))),
        }
    }

    /// Riemannian inner product at `p`.
    pub fn inner(&self, p: &Point, u: &TangentVector, v: &TangentVector) -> Result<f64> {
        if u.base != *p || v.base != *p {
            return Err(Error::BasePointMismatch);
        }
        self.check_shape(&u.coords)?;
        self.check_shape(&v.coords)?;
        self.inner_coords(&p.coords, &u.coords, &v.coords)
    }

    fn inner_coords(&self, p: &Coords, u: &Coords, v: &Coords) -> Result<f64> {
        match (self, p, u, v) {
            (Manifold::Euclidean(_), _, Coords::Vector(a), Coords::Vector(b)) => Ok(dot(a, b)),
            (Manifold::Hyperboloid(_), _, Coords::Vector(a), Coords::Vector(b)) => {
                Ok(hyperboloid::minkowski(a, b))
            }
            (Manifold::Spd(_), Coords::Matrix(x), Coords::Matrix(a), Coords::Matrix(b)) => {
                spd::inner(x, a, b)
            }
            (
                Manifold::Product(fs),
                Coords::Product(ps),
                Coords::Product(us),
                Coords::Product(vs),
            ) => {
                let mut s = 0.0;
                for (i, f) in fs.iter().enumerate() {
                    s += f.inner_coords(&ps[i], &us[i], &vs[i])?;
                }
                Ok(s)
            }
            _ => Err(Error::InvalidTangent("coordinate kinds differ".into())),
        }
    }

    /// `‖v‖_p` at the vector's own base.
    pub fn norm(&self, v: &TangentVector) -> Result<f64> {
        Ok(self.inner(&v.base, v, v)?.max(0.0).sqrt())
    }

    /// Exponential map `exp_p(v)`.
    pub fn exp(&self, p: &Point, v: &TangentVector) -> Result<Point> {
        if v.base != *p {
            return Err(Error::BasePointMismatch);
        }
        self.check_tangent(v)?;
        self.exp_coords(&p.coords, &v.coords).map(Point::new)
    }

    fn exp_coords(&self, p: &Coords, v: &Coords) -> Result<Coords> {
        Ok(match (self, p, v) {
            (Manifold::Euclidean(_), Coords::Vector(x), Coords::Vector(w)) => {
                Coords::Vector(x.iter().zip(w).map(|(a, b)| a + b).collect())
            }
            (Manifold::Hyperboloid(_), Coords::Vector(x), Coords::Vector(w)) => {
                Coords::Vector(hyperboloid::exp(x, w))
            }
            (Manifold::Spd(_), Coords::Matrix(x), Coords::Matrix(w)) => {
                Coords::Matrix(spd::exp(x, w)?)
            }
            (Manifold::Product(fs), Coords::Product(ps), Coords::Product(vs)) => Coords::Product(
                fs.iter()
                    .zip(ps.iter().zip(vs))
                    .map(|(f, (p, v))| f.exp_coords(p, v))
                    .collect::<Result<_>>()?,
            ),
            _ => unreachable!("shape checked"),
        })
    }

    /// Logarithmic map `log_p(q)`; `log_p(p)` is exactly zero.
    pub fn log(&self, p: &Point, q: &Point) -> Result<TangentVector> {
        self.check_shape(&p.coords)?;
        self.check_shape(&q.coords)?;
        if p == q {
            return Ok(TangentVector::zero(p));
        }
        let c = self.log_coords(&p.coords, &q.coords)?;
        Ok(TangentVector::new(p.clone(), c))
    }

    fn log_coords(&self, p: &Coords, q: &Coords) -> Result<Coords> {
        Ok(match (self, p, q) {
            (Manifold::Euclidean(_), Coords::Vector(x), Coords::Vector(y)) => {
                Coords::Vector(y.iter().zip(x).map(|(a, b)| a - b).collect())
            }
            (Manifold::Hyperboloid(_), Coords::Vector(x), Coords::Vector(y)) => {
                Coords::Vector(hyperboloid::log(x, y))
            }
            (Manifold::Spd(_), Coords::Matrix(x), Coords::Matrix(y)) => {
                Coords::Matrix(spd::log(x, y)?)
            }
            (Manifold::Product(fs), Coords::Product(ps), Coords::Product(qs)) => Coords::Product(
                fs.iter()
                    .zip(ps.iter().zip(qs))
                    .map(|(f, (p, q))| {
                        if p == q {
                            Ok(p.zeros_like())
                        } else {
                            f.log_coords(p, q)
                        }
                    })
                    .collect::<Result<_>>()?,
            ),
            _ => unreachable!("shape checked"),
        })
    }

    /// Geodesic distance; products combine factors as a root sum of squares.
    pub fn dist(&self, p: &Point, q: &Point) -> Result<f64> {
        self.check_shape(&p.coords)?;
        self.check_shape(&q.coords)?;
        Ok(self.dist_sq_coords(&p.coords, &q.coords)?.sqrt())
    }

    fn dist_sq_coords(&self, p: &Coords, q: &Coords) -> Result<f64> {
        Ok(match (self, p, q) {
            (Manifold::Euclidean(_), Coords::Vector(x), Coords::Vector(y)) => {
                x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum()
            }
            (Manifold::Hyperboloid(_), Coords::Vector(x), Coords::Vector(y)) => {
                hyperboloid::dist(x, y).powi(2)
            }
            (Manifold::Spd(_), Coords::Matrix(x), Coords::Matrix(y)) => spd::dist(x, y)?.powi(2),
            (Manifold::Product(fs), Coords::Product(ps), Coords::Product(qs)) => {
                let mut s = 0.0;
                for (i, f) in fs.iter().enumerate() {
                    s += f.dist_sq_coords(&ps[i], &qs[i])?;
                }
                s
            }
            _ => unreachable!("shape checked"),
        })
    }

    /// Parallel transport of `v ∈ T_pM` to `T_qM` along the unique geodesic.
    pub fn transport(&self, p: &Point, q: &Point, v: &TangentVector) -> Result<TangentVector> {
        if v.base != *p {
            return Err(Error::BasePointMismatch);
        }
        self.check_tangent(v)?;
        self.check_shape(&q.coords)?;
        if p == q {
            return Ok(v.clone());
        }
        let c = self.transport_coords(&p.coords, &q.coords, &v.coords)?;
        Ok(TangentVector::new(q.clone(), c))
    }

    fn transport_coords(&self, p: &Coords, q: &Coords, v: &Coords) -> Result<Coords> {
        Ok(match (self, p, q, v) {
            (Manifold::Euclidean(_), _, _, v) => v.clone(),
            (Manifold::Hyperboloid(_), Coords::Vector(x), Coords::Vector(y), Coords::Vector(w)) => {
                Coords::Vector(hyperboloid::transport(x, y, w))
            }
            (Manifold::Spd(_), Coords::Matrix(x), Coords::Matrix(y), Coords::Matrix(w)) => {
                Coords::Matrix(spd::transport(x, y, w)?)
            }
            (
                Manifold::Product(fs),
                Coords::Product(ps),
                Coords::Product(qs),
                Coords::Product(vs),
            ) => {
                let mut out = Vec::with_capacity(fs.len());
                for (i, f) in fs.iter().enumerate() {
                    out.push(if ps[i] == qs[i] {
                        vs[i].clone()
                    } else {
                        f.transport_coords(&ps[i], &qs[i], &vs[i])?
                    });
                }
                Coords::Product(out)
            }
            _ => unreachable!("shape checked"),
        })
    }

    /// Maps raw ambient data onto `T_pM`: symmetrization for SPD, removal of
    /// the Minkowski-normal part for the hyperboloid, identity for Euclidean.
    pub fn project_tangent(&self, p: &Point, w: Coords) -> Result<TangentVector> {
        self.check_shape(&p.coords)?;
        let c = self.project_coords(&p.coords, w)?;
        Ok(TangentVector::new(p.clone(), c))
    }

    /// Like [`Manifold::project_tangent`], but takes SPD data as a raw
    /// row-major buffer so non-symmetric input can be symmetrized.
    pub fn project_raw_matrix(&self, p: &Point, raw: Vec<f64>) -> Result<TangentVector> {
        match self {
            Manifold::Spd(n) => {
                len_check(n * n, raw.len())?;
                self.project_tangent(p, Coords::Matrix(SymMatrix::symmetrized(*n, raw)))
            }
            _ => Err(Error::InvalidTangent(
                "raw matrix data needs an SPD manifold".into(),
            )),
        }
    }

    fn project_coords(&self, p: &Coords, w: Coords) -> Result<Coords> {
        Ok(match (self, p, w) {
            (Manifold::Euclidean(n), _, Coords::Vector(v)) => {
                len_check(*n, v.len())?;
                Coords::Vector(v)
            }
            (Manifold::Hyperboloid(n), Coords::Vector(x), Coords::Vector(v)) => {
                len_check(n + 1, v.len())?;
                Coords::Vector(hyperboloid::project(x, &v))
            }
            (Manifold::Spd(n), _, Coords::Matrix(m)) => {
                spd::dim_check(*n, &m)?;
                Coords::Matrix(m)
            }
            (Manifold::Product(fs), Coords::Product(ps), Coords::Product(ws)) => {
                len_check(fs.len(), ws.len())?;
                Coords::Product(
                    fs.iter()
                        .zip(ps)
                        .zip(ws)
                        .map(|((f, p), w)| f.project_coords(p, w))
                        .collect::<Result<_>>()?,
                )
            }
            _ => return Err(Error::InvalidTangent("coordinate kinds differ".into())),
        })
    }

    /// Gaussian tangent vector with i.i.d. `N(0, std²)` coordinates in a
    /// metric-orthonormal basis of `T_pM`, so `E‖v‖² = std²·dim`.
    pub fn random_tangent<R: Rng + ?Sized>(
        &self,
        p: &Point,
        std: f64,
        rng: &mut R,
    ) -> Result<TangentVector> {
        self.check_shape(&p.coords)?;
        let c = self.random_tangent_coords(&p.coords, std, rng)?;
        Ok(TangentVector::new(p.clone(), c))
    }

    fn random_tangent_coords<R: Rng + ?Sized>(
        &self,
        p: &Coords,
        std: f64,
        rng: &mut R,
    ) -> Result<Coords> {
        let mut gauss = |s: f64| -> f64 { s * rng.sample::<f64, _>(StandardNormal) };
        Ok(match (self, p) {
            (Manifold::Euclidean(n), _) => Coords::Vector((0..*n).map(|_| gauss(std)).collect()),
            (Manifold::Hyperboloid(n), Coords::Vector(x)) => {
                let z: Vec<f64> = (0..*n).map(|_| gauss(std)).collect();
                Coords::Vector(hyperboloid::from_orthonormal(x, &z))
            }
            (Manifold::Spd(n), Coords::Matrix(x)) => {
                // Frobenius-orthonormal basis {E_ii, (E_ij + E_ji)/√2}.
                let n = *n;
                let off = std * std::f64::consts::FRAC_1_SQRT_2;
                let mut s = vec![0.0; n * n];
                for i in 0..n {
                    s[i * n + i] = gauss(std);
                    for j in (i + 1)..n {
                        let g = gauss(off);
                        s[i * n + j] = g;
                        s[j * n + i] = g;
                    }
                }
                let root = sym_func(x, SpectralFn::Sqrt)?;
                Coords::Matrix(crate::linalg::sandwich(
                    &root,
                    &SymMatrix::symmetrized(n, s),
                ))
            }
            (Manifold::Product(fs), Coords::Product(ps)) => Coords::Product(
                fs.iter()
                    .zip(ps)
                    .map(|(f, p)| f.random_tangent_coords(p, std, rng))
                    .collect::<Result<_>>()?,
            ),
            _ => unreachable!("shape checked"),
        })
    }

    /// Random point `exp_c(r·u)` with `u` a uniformly random unit direction
    /// at `center` and `r` uniform on `[0, radius]`.
    pub fn random_point<R: Rng + ?Sized>(
        &self,
        center: &Point,
        radius: f64,
        rng: &mut R,
    ) -> Result<Point> {
        let dir = self.random_unit_tangent(center, rng)?;
        let r = radius * rng.random::<f64>();
        self.exp(center, &dir.scale(r))
    }

    /// Uniformly random unit tangent vector at `p`.
    pub fn random_unit_tangent<R: Rng + ?Sized>(
        &self,
        p: &Point,
        rng: &mut R,
    ) -> Result<TangentVector> {
        loop {
            let v = self.random_tangent(p, 1.0, rng)?;
            let n = self.norm(&v)?;
            if n > 1e-8 {
                return Ok(v.scale(1.0 / n));
            }
        }
    }
}

/// Curvature distortion `ξ(d, c) = d√(−c)·coth(d√(−c))`, equal to 1 when
/// `d = 0` or `c = 0`.
pub fn curvature_distortion(d: f64, c: f64) -> Result<f64> {
    if d < 0.0 || d.is_nan() {
        return Err(Error::NegativeDistance(d));
    }
    if c > 0.0 || c.is_nan() {
        return Err(Error::InvalidConstants(format!(
            "curvature bound must be nonpositive, got {c}"
        )));
    }
    let x = d * (-c).sqrt();
    if x < 1e-4 {
        // x coth x = 1 + x²/3 − x⁴/45 + O(x⁶)
        let x2 = x * x;
        Ok(1.0 + x2 / 3.0 - x2 * x2 / 45.0)
    } else {
        Ok(x / x.tanh())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn len_check(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}

/// Point on the hyperboloid with the given spatial coordinates.
pub fn hyperboloid_point(spatial: &[f64]) -> Point {
    Point::vector(hyperboloid::lift(spatial))
}
