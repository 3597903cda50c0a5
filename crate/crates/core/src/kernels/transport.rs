//! Pullback kernels written as an explicit embedding followed by a
//! Euclidean Gaussian, so that `k(x, y) = g(Ψx, Ψy)` can be checked and so
//! that chains can be moved into Euclidean coordinates without changing any
//! kernel quantity.

use nalgebra::{DMatrix, DVector};

use super::KernelSpec;
use crate::error::{Error, Result};
use crate::geometry::{cholesky_embed, projection_embed, CholeskyVariant, Point};

/// The coordinate map `Ψ` of a pullback kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Embedding {
    /// `X -> vec(log X)` on SPD matrices.
    SymLog,
    /// `[U] -> vec(U Uᵀ)` on Grassmannians.
    Projection,
    /// Cholesky coordinates of a correlation matrix.
    Cholesky(CholeskyVariant),
}

impl Embedding {
    pub fn apply(&self, p: &Point) -> Result<DVector<f64>> {
        let vec = |m: DMatrix<f64>| DVector::from_column_slice(m.as_slice());
        match (self, p) {
            (Embedding::SymLog, Point::Spd(a)) => Ok(vec(a.log())),
            (Embedding::Projection, Point::Grassmann(u)) => Ok(vec(projection_embed(u))),
            (Embedding::Cholesky(v), Point::Correlation(c)) => cholesky_embed(c, *v),
            _ => Err(Error::InvalidInput(format!("{self:?} cannot embed a {} point", p.manifold()))),
        }
    }
}

/// `exp(-β ‖a - b‖²)` on Euclidean vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EuclideanGauss {
    pub beta: f64,
}

impl EuclideanGauss {
    pub fn eval(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        (-self.beta * (a - b).norm_squared()).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transport {
    pub embedding: Embedding,
    pub gauss: EuclideanGauss,
}

/// Splits a pullback kernel into its embedding and Euclidean Gaussian.
///
/// For the Grassmann family the factor `1/2` in `d_pr² = ‖UUᵀ - VVᵀ‖_F²/2`
/// is folded into the Gaussian's `β`.
pub fn transported_spec(spec: &KernelSpec) -> Result<Transport> {
    spec.validate()?;
    let (embedding, beta) = match *spec {
        KernelSpec::SpdLogEuclideanGauss { beta } => (Embedding::SymLog, beta),
        KernelSpec::GrassmannProjectionGauss { beta } => (Embedding::Projection, beta / 2.0),
        KernelSpec::CorrelationCholeskyGauss { beta, variant } => (Embedding::Cholesky(variant), beta),
        _ => {
            return Err(Error::InvalidKernel(format!("{} is not a pullback kernel", spec.family())));
        }
    };
    Ok(Transport { embedding, gauss: EuclideanGauss { beta } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{CorrelationMatrix, GrassmannPoint, SpdMatrix};
    use crate::kernels::kernel_eval;
    use crate::rng::stream_rng;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn check_pairs(spec: &KernelSpec, pts: &[Point]) {
        let t = transported_spec(spec).unwrap();
        for pair in pts.chunks(2) {
            let direct = kernel_eval(spec, &pair[0], &pair[1]).unwrap();
            let moved = t.gauss.eval(&t.embedding.apply(&pair[0]).unwrap(), &t.embedding.apply(&pair[1]).unwrap());
            assert!((direct - moved).abs() <= 1e-12, "{}: {direct} vs {moved}", spec.family());
        }
    }

    #[test]
    fn spd_pullback() {
        let mut rng = stream_rng(21, 0);
        let pts: Vec<Point> = (0..20)
            .map(|_| {
                let g = DMatrix::<f64>::from_fn(3, 3, |_, _| rng.sample(StandardNormal));
                Point::Spd(SpdMatrix::new(&g * g.transpose() + DMatrix::identity(3, 3) * 0.2).unwrap())
            })
            .collect();
        check_pairs(&KernelSpec::spd_log_euclidean_gauss(0.4).unwrap(), &pts);
    }

    #[test]
    fn identity_spd_pair_is_one_both_ways() {
        let spec = KernelSpec::spd_log_euclidean_gauss(0.4).unwrap();
        let i = Point::Spd(SpdMatrix::identity(3));
        let t = transported_spec(&spec).unwrap();
        assert_eq!(kernel_eval(&spec, &i, &i).unwrap(), 1.0);
        let e = t.embedding.apply(&i).unwrap();
        assert_eq!(t.gauss.eval(&e, &e), 1.0);
    }

    #[test]
    fn grassmann_pullback_folds_sqrt_two() {
        let mut rng = stream_rng(22, 0);
        let pts: Vec<Point> = (0..20)
            .map(|_| {
                let b = DMatrix::<f64>::from_fn(5, 2, |_, _| rng.sample(StandardNormal));
                Point::Grassmann(GrassmannPoint::from_span(b).unwrap())
            })
            .collect();
        let spec = KernelSpec::grassmann_projection_gauss(1.3).unwrap();
        assert_eq!(transported_spec(&spec).unwrap().gauss.beta, 0.65);
        check_pairs(&spec, &pts);
    }

    #[test]
    fn correlation_pullback() {
        let mut rng = stream_rng(23, 0);
        let pts: Vec<Point> = (0..20)
            .map(|_| {
                let g = DMatrix::<f64>::from_fn(3, 3, |_, _| rng.sample(StandardNormal));
                let a = &g * g.transpose() + DMatrix::identity(3, 3);
                let d = DMatrix::from_diagonal(&a.diagonal().map(|x| 1.0 / x.sqrt()));
                let mut c = &d * a * &d;
                for i in 0..3 {
                    c[(i, i)] = 1.0;
                }
                let c = (&c + c.transpose()) * 0.5;
                Point::Correlation(CorrelationMatrix::new(c).unwrap())
            })
            .collect();
        for v in [CholeskyVariant::Ecm, CholeskyVariant::Lecm] {
            check_pairs(&KernelSpec::correlation_cholesky_gauss(0.9, v).unwrap(), &pts);
        }
    }

    #[test]
    fn sphere_kernels_are_not_pullbacks() {
        assert!(transported_spec(&KernelSpec::sphere_poisson(0.5).unwrap()).is_err());
    }
}
