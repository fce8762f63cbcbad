//! Dense symmetric-matrix numerics for the SPD geometry.
//!
//! Everything here works on small row-major `f64` matrices (n ≤ 64). The
//! eigensolver is a cyclic Jacobi sweep, which is slow for large n but
//! unconditionally stable for symmetric input and accurate to a few ulps on
//! the well-conditioned matrices the SPD manifold produces.

use crate::error::{Error, Result};

/// Largest dimension accepted by [`SymMatrix`].
pub const MAX_DIM: usize = 64;

/// Eigenvalues at or below this floor are rejected by spectral functions
/// that need strict positivity (log, sqrt, inverse sqrt, powers).
pub const EIGENVALUE_FLOOR: f64 = 1e-12;

/// Relative off-diagonal tolerance at which Jacobi sweeps stop.
const JACOBI_TOLERANCE: f64 = 1e-13;

/// Relative tolerance used to accept a matrix as symmetric.
const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Real symmetric n×n matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Builds a symmetric matrix, rejecting inputs whose asymmetry exceeds
    /// `1e-12 · max(1, max|A|)`. The stored value is the exact symmetrization.
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        check_dim(n)?;
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                actual: data.len(),
            });
        }
        let scale = data.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
        let mut asym = 0.0_f64;
        for i in 0..n {
            for j in (i + 1)..n {
                asym = asym.max((data[i * n + j] - data[j * n + i]).abs());
            }
        }
        if !asym.is_finite() || asym > SYMMETRY_TOLERANCE * scale {
            return Err(Error::NonSymmetric { asymmetry: asym });
        }
        Ok(Self::symmetrized(n, data))
    }

    /// Symmetrizes an arbitrary square buffer as `(W + Wᵀ)/2`.
    pub fn symmetrized(n: usize, mut data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), n * n);
        for i in 0..n {
            for j in (i + 1)..n {
                let m = 0.5 * (data[i * n + j] + data[j * n + i]);
                data[i * n + j] = m;
                data[j * n + i] = m;
            }
        }
        Self { n, data }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(n, data)
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n);
        for (i, d) in diag.iter().enumerate() {
            m.data[i * n + i] = *d;
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|x| a * x).collect(),
        }
    }

    /// `self + a·other`; dimensions must agree.
    pub fn add_scaled(&self, a: f64, other: &Self) -> Result<Self> {
        same_dim(self, other)?;
        Ok(Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(x, y)| x + a * y)
                .collect(),
        })
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

/// Eigendecomposition `A = Q diag(λ) Qᵀ` with ascending eigenvalues and
/// orthonormal eigenvector columns (stored row-major in `eigenvectors`).
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<f64>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Column `j` of Q.
    pub fn eigenvector(&self, j: usize) -> Vec<f64> {
        let n = self.dim();
        (0..n).map(|i| self.eigenvectors[i * n + j]).collect()
    }

    /// `Q diag(f(λ)) Qᵀ`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let n = self.dim();
        let q = &self.eigenvectors;
        let fl: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += q[i * n + k] * fl[k] * q[j * n + k];
                }
                out[i * n + j] = s;
                out[j * n + i] = s;
            }
        }
        SymMatrix { n, data: out }
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
pub fn sym_eigen(a: &SymMatrix) -> Result<SpectralDecomposition> {
    let n = a.n;
    let mut m = a.data.clone();
    let mut q = SymMatrix::identity(n).data;
    let target = JACOBI_TOLERANCE * a.frobenius_norm();
    let max_sweeps = 100 * n * n;

    let off = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[i * n + j] * m[i * n + j];
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while off(&m) > target {
        if sweeps >= max_sweeps {
            return Err(Error::NoConvergence { sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for r in (p + 1)..n {
                let apr = m[p * n + r];
                if apr == 0.0 {
                    continue;
                }
                let tau = (m[r * n + r] - m[p * n + p]) / (2.0 * apr);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // A <- A J
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akr = m[k * n + r];
                    m[k * n + p] = c * akp - s * akr;
                    m[k * n + r] = s * akp + c * akr;
                }
                // A <- Jᵀ A
                for k in 0..n {
                    let apk = m[p * n + k];
                    let ark = m[r * n + k];
                    m[p * n + k] = c * apk - s * ark;
                    m[r * n + k] = s * apk + c * ark;
                }
                m[p * n + r] = 0.0;
                m[r * n + p] = 0.0;
                // Q <- Q J
                for k in 0..n {
                    let qkp = q[k * n + p];
                    let qkr = q[k * n + r];
                    q[k * n + p] = c * qkp - s * qkr;
                    q[k * n + r] = s * qkp + c * qkr;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].total_cmp(&m[j * n + j]));
    let eigenvalues = order.iter().map(|&i| m[i * n + i]).collect();
    let mut eigenvectors = vec![0.0; n * n];
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            eigenvectors[row * n + col] = q[row * n + src];
        }
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Scalar functions that can be lifted to symmetric matrices spectrally.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralFn {
    Exp,
    Log,
    Sqrt,
    InvSqrt,
    Power(f64),
}

impl SpectralFn {
    fn needs_positive(self) -> bool {
        !matches!(self, SpectralFn::Exp)
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            SpectralFn::Exp => x.exp(),
            SpectralFn::Log => x.ln(),
            SpectralFn::Sqrt => x.sqrt(),
            SpectralFn::InvSqrt => 1.0 / x.sqrt(),
            SpectralFn::Power(t) => x.powf(t),
        }
    }
}

/// `Q f(Λ) Qᵀ`. Functions other than `Exp` require every eigenvalue to
/// exceed [`EIGENVALUE_FLOOR`].
pub fn sym_func(a: &SymMatrix, f: SpectralFn) -> Result<SymMatrix> {
    let eig = sym_eigen(a)?;
    spectral_apply(&eig, f)
}

/// Applies `f` to an existing decomposition.
pub fn spectral_apply(eig: &SpectralDecomposition, f: SpectralFn) -> Result<SymMatrix> {
    if f.needs_positive() {
        check_positive(eig)?;
    }
    Ok(eig.reconstruct_with(|l| f.apply(l)))
}

pub(crate) fn check_positive(eig: &SpectralDecomposition) -> Result<()> {
    match eig.eigenvalues.first() {
        Some(&l) if !(l > EIGENVALUE_FLOOR) => Err(Error::NotPositiveDefinite { eigenvalue: l }),
        _ => Ok(()),
    }
}

/// `Σᵢⱼ A[i][j]·B[i][j]`.
pub fn frobenius_inner(a: &SymMatrix, b: &SymMatrix) -> Result<f64> {
    same_dim(a, b)?;
    Ok(a.data.iter().zip(&b.data).map(|(x, y)| x * y).sum())
}

/// Dense square product `A·B` on row-major buffers.
pub(crate) fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

/// `E S Eᵀ` for a general square `E`, symmetrized.
pub(crate) fn congruence(e: &[f64], s: &SymMatrix) -> SymMatrix {
    let n = s.n;
    let es = matmul(e, &s.data, n);
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += es[i * n + k] * e[j * n + k];
            }
            out[i * n + j] = acc;
            out[j * n + i] = acc;
        }
    }
    SymMatrix { n, data: out }
}

/// `S T S` for symmetric `S`, `T` (a congruence by a symmetric factor).
pub(crate) fn sandwich(s: &SymMatrix, t: &SymMatrix) -> SymMatrix {
    congruence(&s.data, t)
}

fn check_dim(n: usize) -> Result<()> {
    if (2..=MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(Error::InvalidDimension(n))
    }
}

fn same_dim(a: &SymMatrix, b: &SymMatrix) -> Result<()> {
    if a.n == b.n {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: a.n,
            actual: b.n,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn reconstruction_error(a: &SymMatrix, eig: &SpectralDecomposition) -> f64 {
        let r = eig.reconstruct_with(|l| l);
        r.add_scaled(-1.0, a).unwrap().frobenius_norm()
    }

    fn orthonormality_error(eig: &SpectralDecomposition) -> f64 {
        let n = eig.dim();
        let q = &eig.eigenvectors;
        let mut err = 0.0;
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..n).map(|k| q[k * n + i] * q[k * n + j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                err += (dot - target).powi(2);
            }
        }
        err.sqrt()
    }

    #[test]
    fn eigen_identity() {
        let eig = sym_eigen(&SymMatrix::identity(2)).unwrap();
        assert_eq!(eig.eigenvalues, vec![1.0, 1.0]);
        assert!(orthonormality_error(&eig) < 1e-14);
    }

    #[test]
    fn eigen_diagonal_sorted() {
        let eig = sym_eigen(&SymMatrix::diagonal(&[3.0, -1.0])).unwrap();
        assert_eq!(eig.eigenvalues, vec![-1.0, 3.0]);
    }

    #[test]
    fn eigen_two_by_two_matches_characteristic_polynomial() {
        // λ² - 4λ + 3 = 0 -> λ ∈ {1, 3}
        let a = SymMatrix::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap();
        let eig = sym_eigen(&a).unwrap();
        assert_abs_diff_eq!(eig.eigenvalues[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(eig.eigenvalues[1], 3.0, epsilon = 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = eig.eigenvector(0);
        let v1 = eig.eigenvector(1);
        // eigenvectors are defined up to sign
        assert_abs_diff_eq!((v0[0] * h - v0[1] * h).abs(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!((v1[0] * h + v1[1] * h).abs(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn rejects_non_symmetric() {
        let err = SymMatrix::new(2, vec![1.0, 2.0, 0.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::NonSymmetric { .. }));
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(matches!(
            SymMatrix::new(1, vec![1.0]),
            Err(Error::InvalidDimension(1))
        ));
        assert!(matches!(
            SymMatrix::new(2, vec![1.0; 3]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let e = sym_func(&SymMatrix::zeros(3), SpectralFn::Exp).unwrap();
        assert_eq!(e, SymMatrix::identity(3));
    }

    #[test]
    fn log_of_diagonal() {
        let l = sym_func(
            &SymMatrix::diagonal(&[std::f64::consts::E, 1.0]),
            SpectralFn::Log,
        )
        .unwrap();
        assert_abs_diff_eq!(l.get(0, 0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(l.get(1, 1), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(l.get(0, 1), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn sqrt_squares_back() {
        let a = SymMatrix::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap();
        let s = sym_func(&a, SpectralFn::Sqrt).unwrap();
        let sq = SymMatrix::symmetrized(2, matmul(s.as_slice(), s.as_slice(), 2));
        assert!(sq.add_scaled(-1.0, &a).unwrap().frobenius_norm() < 1e-14);
        // eigenvalues of the root are (1, √3)
        let eig = sym_eigen(&s).unwrap();
        assert_abs_diff_eq!(eig.eigenvalues[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(eig.eigenvalues[1], 3f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn log_rejects_indefinite() {
        let a = SymMatrix::diagonal(&[1.0, -1.0]);
        assert!(matches!(
            sym_func(&a, SpectralFn::Log),
            Err(Error::NotPositiveDefinite { .. })
        ));
        let z = SymMatrix::diagonal(&[1.0, 1e-13]);
        assert!(matches!(
            sym_func(&z, SpectralFn::InvSqrt),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn frobenius_examples() {
        let i2 = SymMatrix::identity(2);
        assert_eq!(frobenius_inner(&i2, &i2).unwrap(), 2.0);
        assert_eq!(frobenius_inner(&i2, &SymMatrix::zeros(2)).unwrap(), 0.0);
        let a = SymMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 0.0]]).unwrap();
        let b = SymMatrix::from_rows(&[&[0.0, 1.0], &[1.0, 3.0]]).unwrap();
        assert_eq!(frobenius_inner(&a, &b).unwrap(), 4.0);
        assert!(matches!(
            frobenius_inner(&i2, &SymMatrix::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    fn sym_strategy() -> impl Strategy<Value = SymMatrix> {
        (2usize..=6).prop_flat_map(|n| {
            proptest::collection::vec(-1.0f64..1.0, n * n)
                .prop_map(move |v| SymMatrix::symmetrized(n, v))
        })
    }

    fn shift_spd(a: &SymMatrix) -> SymMatrix {
        let lmin = sym_eigen(a).unwrap().eigenvalues[0];
        a.add_scaled(lmin.abs() + 1.0, &SymMatrix::identity(a.dim()))
            .unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn decomposition_invariants(a in sym_strategy()) {
            let eig = sym_eigen(&a).unwrap();
            prop_assert!(reconstruction_error(&a, &eig) <= 1e-10 * a.frobenius_norm().max(1.0));
            prop_assert!(orthonormality_error(&eig) <= 1e-10);
            prop_assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
            let sum: f64 = eig.eigenvalues.iter().sum();
            prop_assert!((sum - a.trace()).abs() <= 1e-10 * a.trace().abs().max(1.0));
        }

        #[test]
        fn log_exp_round_trip(a in sym_strategy()) {
            let spd = shift_spd(&a);
            let back = sym_func(&sym_func(&spd, SpectralFn::Log).unwrap(), SpectralFn::Exp).unwrap();
            let rel = back.add_scaled(-1.0, &spd).unwrap().frobenius_norm() / spd.frobenius_norm();
            prop_assert!(rel <= 1e-8);
        }

        #[test]
        fn sqrt_squared_recovers(a in sym_strategy()) {
            let spd = shift_spd(&a);
            let s = sym_func(&spd, SpectralFn::Sqrt).unwrap();
            let sq = SymMatrix::symmetrized(spd.dim(), matmul(s.as_slice(), s.as_slice(), spd.dim()));
            let rel = sq.add_scaled(-1.0, &spd).unwrap().frobenius_norm() / spd.frobenius_norm();
            prop_assert!(rel <= 1e-8);
        }

        #[test]
        fn frobenius_symmetric_bilinear(a in sym_strategy(), t in -3.0f64..3.0) {
            let b = a.scale(0.5).add_scaled(1.0, &SymMatrix::identity(a.dim())).unwrap();
            let ab = frobenius_inner(&a, &b).unwrap();
            prop_assert_eq!(ab, frobenius_inner(&b, &a).unwrap());
            let tab = frobenius_inner(&a.scale(t), &b).unwrap();
            prop_assert!((tab - t * ab).abs() <= 1e-12 * (1.0 + ab.abs()));
        }
    }
}
