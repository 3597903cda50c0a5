//! Matrix functions and embeddings used by the pullback kernels.
//!
//! All matrix functions go through the symmetric eigendecomposition
//! `A = V diag(λ) Vᵀ`; inputs are always symmetric so nothing more general is
//! needed.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{check_symmetric, CorrelationMatrix, GrassmannPoint, Manifold, SpdMatrix, UnitVector};
use crate::error::{Error, Result};

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

fn spectral_map(a: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let eig = a.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(f));
    symmetrize(v * d * v.transpose())
}

pub(super) fn sym_log_unchecked(a: &DMatrix<f64>) -> DMatrix<f64> {
    spectral_map(a, f64::ln)
}

/// Matrix logarithm of a symmetric positive-definite matrix.
///
/// Fails with a message naming the offending eigenvalue when `a` is not SPD.
pub fn sym_log(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_symmetric(a, Manifold::Spd)?;
    let eig = a.clone().symmetric_eigen();
    if let Some(bad) = eig.eigenvalues.iter().find(|&&l| !(l > super::MIN_EIGENVALUE)) {
        return Err(Error::point(Manifold::Spd, format!("eigenvalue {bad:e} is not positive")));
    }
    let v = &eig.eigenvectors;
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::ln));
    Ok(symmetrize(v * d * v.transpose()))
}

/// Matrix exponential of a symmetric matrix; the result is SPD.
pub fn sym_exp(s: &DMatrix<f64>) -> Result<SpdMatrix> {
    check_symmetric(s, Manifold::Spd)?;
    SpdMatrix::new(spectral_map(s, f64::exp))
}

/// The projector `U Uᵀ` representing the subspace spanned by a frame.
pub fn projection_embed(p: &GrassmannPoint) -> DMatrix<f64> {
    let u = p.frame();
    symmetrize(u * u.transpose())
}

/// Projection distance `‖U Uᵀ - V Vᵀ‖_F / √2`.
pub fn projection_distance(a: &GrassmannPoint, b: &GrassmannPoint) -> Result<f64> {
    if a.ambient_dim() != b.ambient_dim() || a.rank() != b.rank() {
        return Err(Error::DimensionMismatch {
            expected: vec![a.ambient_dim(), a.rank()],
            got: vec![b.ambient_dim(), b.rank()],
        });
    }
    Ok((projection_embed(a) - projection_embed(b)).norm() / std::f64::consts::SQRT_2)
}

/// Coordinates for Cholesky-derived correlation geometries.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CholeskyVariant {
    /// Strict lower triangle of the Cholesky factor.
    #[default]
    Ecm,
    /// Log of the factor's diagonal followed by its strict lower triangle.
    Lecm,
}

/// Lower Cholesky factor `L` with `L Lᵀ = C` and positive diagonal.
pub fn cholesky_factor(c: &CorrelationMatrix) -> Result<DMatrix<f64>> {
    nalgebra::Cholesky::new(c.entries().clone())
        .map(|ch| ch.unpack())
        .ok_or_else(|| Error::point(Manifold::Correlation, "Cholesky factorization failed"))
}

/// Euclidean coordinates of a correlation matrix.
///
/// `Ecm` yields the strict lower triangle of `L` in row-major order
/// (length `m(m-1)/2`). `Lecm` prepends `ln L_ii` for each diagonal entry
/// (length `m(m+1)/2`).
pub fn cholesky_embed(c: &CorrelationMatrix, variant: CholeskyVariant) -> Result<DVector<f64>> {
    let l = cholesky_factor(c)?;
    let m = l.nrows();
    let mut out = Vec::with_capacity(m * (m + 1) / 2);
    if variant == CholeskyVariant::Lecm {
        out.extend((0..m).map(|i| l[(i, i)].ln()));
    }
    for i in 1..m {
        for j in 0..i {
            out.push(l[(i, j)]);
        }
    }
    Ok(DVector::from_vec(out))
}

/// Inverts the `Ecm` coordinates of an `m x m` correlation matrix.
///
/// Rows of the Cholesky factor of a correlation matrix have unit norm, which
/// fixes the diagonal from the strict lower triangle.
pub fn correlation_from_ecm(coords: &[f64], m: usize) -> Result<CorrelationMatrix> {
    if coords.len() != m * (m.saturating_sub(1)) / 2 {
        return Err(Error::InvalidInput(format!(
            "{} coordinates cannot describe a {m}x{m} correlation matrix",
            coords.len()
        )));
    }
    let mut l = DMatrix::zeros(m, m);
    let mut k = 0;
    for i in 0..m {
        let mut sq = 0.0;
        for j in 0..i {
            l[(i, j)] = coords[k];
            sq += coords[k] * coords[k];
            k += 1;
        }
        if sq >= 1.0 {
            return Err(Error::point(Manifold::Correlation, format!("row {i} has norm >= 1")));
        }
        l[(i, i)] = (1.0 - sq).sqrt();
    }
    let mut c = &l * l.transpose();
    for i in 0..m {
        c[(i, i)] = 1.0;
    }
    CorrelationMatrix::new(symmetrize(c))
}

/// Great-circle distance `arccos(xᵀy)` in `[0, π]`.
pub fn sphere_geodesic_distance(x: &UnitVector, y: &UnitVector) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch { expected: vec![x.dim()], got: vec![y.dim()] });
    }
    Ok(x.dot(y).clamp(-1.0, 1.0).acos())
}
