use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{Manifold, UnitVector};
use crate::error::{Error, Result};

const ORTHOGONALITY_TOL: f64 = 1e-10;
const DETERMINANT_TOL: f64 = 1e-8;

/// An element of `SO(d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rotation {
    matrix: DMatrix<f64>,
}

impl Rotation {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let bad = |reason: String| Error::InvalidInput(format!("not a rotation: {reason}"));
        if !matrix.is_square() || matrix.nrows() < 2 {
            return Err(bad(format!("shape {}x{}", matrix.nrows(), matrix.ncols())));
        }
        let d = matrix.nrows();
        let err = (matrix.transpose() * &matrix - DMatrix::<f64>::identity(d, d)).amax();
        if !(err <= ORTHOGONALITY_TOL) {
            return Err(bad(format!("max |QᵀQ - I| = {err:e}")));
        }
        let det = matrix.determinant();
        if (det - 1.0).abs() > DETERMINANT_TOL {
            return Err(bad(format!("determinant {det}")));
        }
        Ok(Rotation { matrix })
    }

    pub fn identity(d: usize) -> Self {
        Rotation { matrix: DMatrix::identity(d, d) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn apply(&self, x: &UnitVector) -> Result<UnitVector> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: vec![self.dim()], got: vec![x.dim()] });
        }
        UnitVector::from_dvector(&self.matrix * x.coords()).map_err(|e| match e {
            Error::InvalidPoint { reason, .. } => Error::point(Manifold::Sphere, reason),
            other => other,
        })
    }
}

/// Draws a Haar-distributed rotation in `SO(d)`.
///
/// QR-decomposes a matrix of iid standard normals, flips columns of `Q` so
/// that `R` has a positive diagonal (which makes `Q` Haar on `O(d)`), then
/// negates the first column if the determinant is negative.
///
/// # Panics
///
/// Panics if `d < 2`.
pub fn haar_rotation<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Rotation {
    assert!(d >= 2, "rotations need d >= 2");
    let g = DMatrix::<f64>::from_fn(d, d, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    Rotation { matrix: q }
}
