//! Affine-invariant geometry on symmetric positive definite matrices.
//!
//! With `S = X^{1/2}` every operation is conjugated to the identity:
//!
//! ```text
//! <U, V>_X   = tr(X⁻¹ U X⁻¹ V)
//! exp_X(V)   = S mexp(S⁻¹ V S⁻¹) S
//! log_X(Y)   = S mlog(S⁻¹ Y S⁻¹) S
//! d(X, Y)    = ‖mlog(S⁻¹ Y S⁻¹)‖_F
//! Γ_X→Y(V)   = E V Eᵀ,  E = S (S⁻¹ Y S⁻¹)^{1/2} S⁻¹
//! ```

use crate::error::{Error, Result};
use crate::linalg::{
    check_positive, congruence, matmul, sandwich, spectral_apply, sym_eigen, sym_func, SpectralFn,
    SymMatrix,
};

/// Square root and inverse square root of a base point.
pub(crate) struct Frame {
    pub sqrt: SymMatrix,
    pub inv_sqrt: SymMatrix,
}

impl Frame {
    pub fn of(x: &SymMatrix) -> Result<Self> {
        let eig = sym_eigen(x)?;
        check_positive(&eig)?;
        Ok(Self {
            sqrt: spectral_apply(&eig, SpectralFn::Sqrt)?,
            inv_sqrt: spectral_apply(&eig, SpectralFn::InvSqrt)?,
        })
    }

    /// `S⁻¹ A S⁻¹`: pulls data at X back to the identity.
    pub fn whiten(&self, a: &SymMatrix) -> SymMatrix {
        sandwich(&self.inv_sqrt, a)
    }

    /// `S A S`: pushes data at the identity forward to X.
    pub fn color(&self, a: &SymMatrix) -> SymMatrix {
        sandwich(&self.sqrt, a)
    }
}

pub(crate) fn check_point(x: &SymMatrix) -> Result<()> {
    let eig = sym_eigen(x)?;
    check_positive(&eig)
}

pub(crate) fn inner(x: &SymMatrix, u: &SymMatrix, v: &SymMatrix) -> Result<f64> {
    let f = Frame::of(x)?;
    crate::linalg::frobenius_inner(&f.whiten(u), &f.whiten(v))
}

pub(crate) fn exp(x: &SymMatrix, v: &SymMatrix) -> Result<SymMatrix> {
    let f = Frame::of(x)?;
    let w = f.whiten(v);
    if w.frobenius_norm() < super::SMALL_VECTOR {
        return Ok(x.clone());
    }
    Ok(f.color(&sym_func(&w, SpectralFn::Exp)?))
}

pub(crate) fn log(x: &SymMatrix, y: &SymMatrix) -> Result<SymMatrix> {
    let f = Frame::of(x)?;
    let l = sym_func(&f.whiten(y), SpectralFn::Log)?;
    if l.frobenius_norm() < super::SMALL_VECTOR {
        return Ok(SymMatrix::zeros(x.dim()));
    }
    Ok(f.color(&l))
}

pub(crate) fn dist(x: &SymMatrix, y: &SymMatrix) -> Result<f64> {
    let f = Frame::of(x)?;
    let eig = sym_eigen(&f.whiten(y))?;
    check_positive(&eig)?;
    Ok(eig
        .eigenvalues
        .iter()
        .map(|l| l.ln().powi(2))
        .sum::<f64>()
        .sqrt())
}

pub(crate) fn transport(x: &SymMatrix, y: &SymMatrix, v: &SymMatrix) -> Result<SymMatrix> {
    let f = Frame::of(x)?;
    let root = sym_func(&f.whiten(y), SpectralFn::Sqrt)?;
    let n = x.dim();
    let e = matmul(
        &matmul(f.sqrt.as_slice(), root.as_slice(), n),
        f.inv_sqrt.as_slice(),
        n,
    );
    Ok(congruence(&e, v))
}

pub(crate) fn dim_check(expected: usize, m: &SymMatrix) -> Result<()> {
    if m.dim() == expected {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected,
            actual: m.dim(),
        })
    }
}
