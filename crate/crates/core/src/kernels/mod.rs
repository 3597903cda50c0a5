//! Kernel specifications and their evaluation on manifold points.
//!
//! Every family except the geodesic Gaussian is positive definite on its
//! manifold: the sphere families through nonnegative Gegenbauer
//! coefficients, the matrix families as pullbacks of a Euclidean Gaussian
//! through an injective embedding. The geodesic Gaussian is kept only to
//! demonstrate, with [`pd_audit`], that it fails.

mod audit;
mod gegenbauer;
mod gram;
mod transport;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    cholesky_embed, projection_distance, CholeskyVariant, Manifold, Point,
};

pub use audit::{geodesic_gauss_search, pd_audit, AuditReport, PitfallSearch, SearchPlan, SearchTrial};
pub use gegenbauer::{
    default_truncation, gegenbauer_kernel_eval, poisson_s2, truncation_bound, GegenbauerSeries,
    DEFAULT_TRUNCATION_ERROR,
};
pub use gram::{gram, gram_euclidean_gauss, GramMatrix};
pub(crate) use gram::{embed_chain, Features, Prepared};
pub use transport::{transported_spec, Embedding, EuclideanGauss, Transport};

/// A kernel family together with its parameters.
///
/// Serializes as a flat JSON object tagged by `family`, e.g.
/// `{"family": "sphere_poisson", "rho": 0.75}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelSpec {
    /// `Σ ρ^m C_m^λ(xᵀy)/C_m^λ(1)`; closed form `(1 - 2ρxᵀy + ρ²)^{-1/2}` on S².
    SpherePoisson { rho: f64 },
    /// The same series truncated after degree `truncation` in any dimension.
    SphereGegenbauer { rho: f64, truncation: usize },
    /// `exp(-β d_pr²)` with the projection distance on a Grassmannian.
    GrassmannProjectionGauss { beta: f64 },
    /// `exp(-β ‖log X - log Y‖_F²)`.
    SpdLogEuclideanGauss { beta: f64 },
    /// `exp(-β ‖Ψ(C) - Ψ(D)‖²)` with Cholesky coordinates `Ψ`.
    CorrelationCholeskyGauss {
        beta: f64,
        #[serde(default)]
        variant: CholeskyVariant,
    },
    /// `xᵀy`; finite-dimensional features, used by the harmonic-mean diagnostic.
    SphereLinear,
    /// `exp(-d_g(x, y)² / h²)`. Not positive definite on the sphere.
    #[serde(rename = "sphere_geodesic_gauss_UNSAFE", alias = "sphere_geodesic_gauss_unsafe")]
    SphereGeodesicGaussUnsafe {
        h: f64,
        #[serde(default)]
        acknowledge_unsafe: bool,
    },
}

/// Explicit opt-in required to build the geodesic Gaussian.
#[derive(Debug, Clone, Copy)]
pub struct AcknowledgeNotPositiveDefinite;

fn check_unit_interval(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidKernel(format!("rho = {rho} is outside (0, 1)")));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::InvalidKernel(format!("{name} = {v} must be positive")));
    }
    Ok(())
}

impl KernelSpec {
    pub fn sphere_poisson(rho: f64) -> Result<Self> {
        let k = KernelSpec::SpherePoisson { rho };
        k.validate().map(|_| k)
    }

    pub fn sphere_gegenbauer(rho: f64, truncation: usize) -> Result<Self> {
        let k = KernelSpec::SphereGegenbauer { rho, truncation };
        k.validate().map(|_| k)
    }

    pub fn grassmann_projection_gauss(beta: f64) -> Result<Self> {
        let k = KernelSpec::GrassmannProjectionGauss { beta };
        k.validate().map(|_| k)
    }

    pub fn spd_log_euclidean_gauss(beta: f64) -> Result<Self> {
        let k = KernelSpec::SpdLogEuclideanGauss { beta };
        k.validate().map(|_| k)
    }

    pub fn correlation_cholesky_gauss(beta: f64, variant: CholeskyVariant) -> Result<Self> {
        let k = KernelSpec::CorrelationCholeskyGauss { beta, variant };
        k.validate().map(|_| k)
    }

    pub fn geodesic_gauss_unsafe(h: f64, _ack: AcknowledgeNotPositiveDefinite) -> Result<Self> {
        let k = KernelSpec::SphereGeodesicGaussUnsafe { h, acknowledge_unsafe: true };
        k.validate().map(|_| k)
    }

    /// Parses and validates the JSON form.
    pub fn from_json(s: &str) -> Result<Self> {
        let spec: KernelSpec = serde_json::from_str(s)
            .map_err(|e| Error::InvalidKernel(format!("cannot parse kernel JSON: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("kernel specs always serialize")
    }

    pub fn family(&self) -> &'static str {
        match self {
            KernelSpec::SpherePoisson { .. } => "sphere_poisson",
            KernelSpec::SphereGegenbauer { .. } => "sphere_gegenbauer",
            KernelSpec::GrassmannProjectionGauss { .. } => "grassmann_projection_gauss",
            KernelSpec::SpdLogEuclideanGauss { .. } => "spd_log_euclidean_gauss",
            KernelSpec::CorrelationCholeskyGauss { .. } => "correlation_cholesky_gauss",
            KernelSpec::SphereLinear => "sphere_linear",
            KernelSpec::SphereGeodesicGaussUnsafe { .. } => "sphere_geodesic_gauss_UNSAFE",
        }
    }

    pub fn manifold(&self) -> Manifold {
        match self {
            KernelSpec::SpherePoisson { .. }
            | KernelSpec::SphereGegenbauer { .. }
            | KernelSpec::SphereLinear
            | KernelSpec::SphereGeodesicGaussUnsafe { .. } => Manifold::Sphere,
            KernelSpec::GrassmannProjectionGauss { .. } => Manifold::Grassmann,
            KernelSpec::SpdLogEuclideanGauss { .. } => Manifold::Spd,
            KernelSpec::CorrelationCholeskyGauss { .. } => Manifold::Correlation,
        }
    }

    /// False only for the geodesic Gaussian.
    pub fn is_positive_definite(&self) -> bool {
        !matches!(self, KernelSpec::SphereGeodesicGaussUnsafe { .. })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::SpherePoisson { rho } => check_unit_interval(rho),
            KernelSpec::SphereGegenbauer { rho, truncation } => {
                check_unit_interval(rho)?;
                if truncation < 1 {
                    return Err(Error::InvalidKernel("truncation must be at least 1".into()));
                }
                Ok(())
            }
            KernelSpec::GrassmannProjectionGauss { beta }
            | KernelSpec::SpdLogEuclideanGauss { beta }
            | KernelSpec::CorrelationCholeskyGauss { beta, .. } => check_positive("beta", beta),
            KernelSpec::SphereLinear => Ok(()),
            KernelSpec::SphereGeodesicGaussUnsafe { h, acknowledge_unsafe } => {
                if !acknowledge_unsafe {
                    return Err(Error::InvalidKernel(
                        "the geodesic Gaussian is not positive definite on the sphere; \
                         set acknowledge_unsafe to use it"
                            .into(),
                    ));
                }
                check_positive("h", h)
            }
        }
    }

    /// Checks that the kernel is defined on points of this manifold and shape.
    pub fn check_domain(&self, manifold: Manifold, dims: &[usize]) -> Result<()> {
        if manifold != self.manifold() {
            return Err(Error::ManifoldMismatch { family: self.family(), manifold });
        }
        if matches!(self, KernelSpec::SpherePoisson { .. } | KernelSpec::SphereGegenbauer { .. })
            && dims[0] < 3
        {
            return Err(Error::InvalidKernel(format!(
                "{} needs ambient dimension d >= 3, got {}",
                self.family(),
                dims[0]
            )));
        }
        Ok(())
    }

    /// `K₀ = sup_x k(x, x)` on points of the given shape.
    pub fn diag_bound(&self, dims: &[usize]) -> f64 {
        match *self {
            KernelSpec::SpherePoisson { rho } => {
                if dims.first() == Some(&3) {
                    1.0 / (1.0 - rho)
                } else {
                    (1.0 - rho.powi(default_truncation(rho) as i32 + 1)) / (1.0 - rho)
                }
            }
            KernelSpec::SphereGegenbauer { rho, truncation } => {
                (1.0 - rho.powi(truncation as i32 + 1)) / (1.0 - rho)
            }
            _ => 1.0,
        }
    }
}

/// Evaluates `k(x, y)` directly from the family's definition.
///
/// Gram assembly uses precomputed embeddings instead; this is the pointwise
/// route and the one the Gram matrix is checked against.
pub fn kernel_eval(spec: &KernelSpec, x: &Point, y: &Point) -> Result<f64> {
    spec.validate()?;
    if x.dims() != y.dims() {
        return Err(Error::DimensionMismatch { expected: x.dims(), got: y.dims() });
    }
    spec.check_domain(x.manifold(), &x.dims())?;
    spec.check_domain(y.manifold(), &y.dims())?;
    let value = match (spec, x, y) {
        (KernelSpec::SpherePoisson { rho }, Point::Sphere(a), Point::Sphere(b)) => {
            let t = a.dot(b).clamp(-1.0, 1.0);
            if a.dim() == 3 {
                poisson_s2(*rho, t)
            } else {
                GegenbauerSeries::new(a.dim(), *rho, default_truncation(*rho))?.eval(t)
            }
        }
        (KernelSpec::SphereGegenbauer { rho, truncation }, Point::Sphere(a), Point::Sphere(b)) => {
            GegenbauerSeries::new(a.dim(), *rho, *truncation)?.eval(a.dot(b))
        }
        (KernelSpec::SphereLinear, Point::Sphere(a), Point::Sphere(b)) => a.dot(b),
        (KernelSpec::SphereGeodesicGaussUnsafe { h, .. }, Point::Sphere(a), Point::Sphere(b)) => {
            let d = crate::geometry::sphere_geodesic_distance(a, b)?;
            (-d * d / (h * h)).exp()
        }
        (KernelSpec::GrassmannProjectionGauss { beta }, Point::Grassmann(a), Point::Grassmann(b)) => {
            let d = projection_distance(a, b)?;
            (-beta * d * d).exp()
        }
        (KernelSpec::SpdLogEuclideanGauss { beta }, Point::Spd(a), Point::Spd(b)) => {
            let diff = a.log() - b.log();
            (-beta * diff.norm_squared()).exp()
        }
        (
            KernelSpec::CorrelationCholeskyGauss { beta, variant },
            Point::Correlation(a),
            Point::Correlation(b),
        ) => {
            let diff = cholesky_embed(a, *variant)? - cholesky_embed(b, *variant)?;
            (-beta * diff.norm_squared()).exp()
        }
        _ => unreachable!("domain checked above"),
    };
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{haar_rotation, GrassmannPoint, SpdMatrix, UnitVector};
    use crate::rng::stream_rng;
    use crate::samplers::uniform_sphere;
    use nalgebra::DMatrix;

    fn sp(v: &[f64]) -> Point {
        Point::Sphere(UnitVector::new(v.to_vec()).unwrap())
    }

    #[test]
    fn poisson_special_values() {
        let k = KernelSpec::sphere_poisson(0.75).unwrap();
        let x = sp(&[0.0, 0.0, 1.0]);
        let y = sp(&[0.0, 0.0, -1.0]);
        assert!((kernel_eval(&k, &x, &x).unwrap() - 4.0).abs() <= 1e-14);
        assert!((kernel_eval(&k, &x, &y).unwrap() - 1.0 / 1.75).abs() <= 1e-14);
    }

    #[test]
    fn poisson_in_higher_dimension_uses_series() {
        let k = KernelSpec::sphere_poisson(0.75).unwrap();
        let x = sp(&[1.0, 0.0, 0.0, 0.0]);
        assert!((kernel_eval(&k, &x, &x).unwrap() - 4.0).abs() <= 1e-11);
        assert!(kernel_eval(&k, &sp(&[1.0, 0.0]), &sp(&[0.0, 1.0])).is_err());
    }

    #[test]
    fn gauss_families_are_one_on_the_diagonal() {
        let k = KernelSpec::spd_log_euclidean_gauss(0.7).unwrap();
        let a = Point::Spd(SpdMatrix::new(DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0])).unwrap());
        assert_eq!(kernel_eval(&k, &a, &a).unwrap(), 1.0);
        let g = KernelSpec::grassmann_projection_gauss(1.0).unwrap();
        let u = Point::Grassmann(GrassmannPoint::new(DMatrix::from_row_slice(2, 1, &[1.0, 0.0])).unwrap());
        let v = Point::Grassmann(GrassmannPoint::new(DMatrix::from_row_slice(2, 1, &[0.0, 1.0])).unwrap());
        assert!((kernel_eval(&g, &u, &v).unwrap() - (-1.0f64).exp()).abs() <= 1e-15);
    }

    #[test]
    fn linear_kernel_is_the_dot_product() {
        let mut rng = stream_rng(4, 0);
        let k = KernelSpec::SphereLinear;
        for _ in 0..50 {
            let x = uniform_sphere(3, &mut rng);
            let y = uniform_sphere(3, &mut rng);
            let v = kernel_eval(&k, &Point::Sphere(x.clone()), &Point::Sphere(y.clone())).unwrap();
            assert!((v - x.dot(&y)).abs() <= 1e-14);
        }
    }

    #[test]
    fn mismatched_domains_are_rejected() {
        let k = KernelSpec::sphere_poisson(0.5).unwrap();
        let a = Point::Spd(SpdMatrix::identity(2));
        assert!(matches!(kernel_eval(&k, &a, &a), Err(Error::ManifoldMismatch { .. })));
        let x = sp(&[1.0, 0.0, 0.0]);
        let y = sp(&[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(kernel_eval(&k, &x, &y), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(KernelSpec::sphere_poisson(1.0).is_err());
        assert!(KernelSpec::sphere_poisson(0.0).is_err());
        assert!(KernelSpec::spd_log_euclidean_gauss(-1.0).is_err());
        assert!(KernelSpec::sphere_gegenbauer(0.5, 0).is_err());
        assert!(KernelSpec::from_json(r#"{"family":"sphere_geodesic_gauss_UNSAFE","h":1.0}"#).is_err());
        assert!(KernelSpec::from_json(
            r#"{"family":"sphere_geodesic_gauss_UNSAFE","h":1.0,"acknowledge_unsafe":true}"#
        )
        .is_ok());
    }

    #[test]
    fn json_shape() {
        let k = KernelSpec::sphere_poisson(0.75).unwrap();
        assert_eq!(k.to_json(), r#"{"family":"sphere_poisson","rho":0.75}"#);
        assert_eq!(KernelSpec::from_json(&k.to_json()).unwrap(), k);
        let c = KernelSpec::from_json(r#"{"family":"correlation_cholesky_gauss","beta":2.0}"#).unwrap();
        assert_eq!(c, KernelSpec::CorrelationCholeskyGauss { beta: 2.0, variant: CholeskyVariant::Ecm });
        assert_eq!(KernelSpec::SphereLinear.to_json(), r#"{"family":"sphere_linear"}"#);
    }

    #[test]
    fn sphere_kernels_are_isotropic() {
        let mut rng = stream_rng(8, 0);
        let specs = [
            KernelSpec::sphere_poisson(0.75).unwrap(),
            KernelSpec::sphere_gegenbauer(0.6, 40).unwrap(),
            KernelSpec::SphereLinear,
        ];
        for _ in 0..100 {
            let q = haar_rotation(3, &mut rng);
            let x = uniform_sphere(3, &mut rng);
            let y = uniform_sphere(3, &mut rng);
            let (qx, qy) = (q.apply(&x).unwrap(), q.apply(&y).unwrap());
            for k in &specs {
                let a = kernel_eval(k, &Point::Sphere(x.clone()), &Point::Sphere(y.clone())).unwrap();
                let b = kernel_eval(k, &Point::Sphere(qx.clone()), &Point::Sphere(qy.clone())).unwrap();
                assert!((a - b).abs() <= 1e-12, "{}: {a} vs {b}", k.family());
            }
        }
    }

    #[test]
    fn cauchy_schwarz_holds_on_samples() {
        let mut rng = stream_rng(12, 0);
        let k = KernelSpec::sphere_poisson(0.85).unwrap();
        for _ in 0..200 {
            let x = Point::Sphere(uniform_sphere(3, &mut rng));
            let y = Point::Sphere(uniform_sphere(3, &mut rng));
            let kxy = kernel_eval(&k, &x, &y).unwrap();
            let kxx = kernel_eval(&k, &x, &x).unwrap();
            let kyy = kernel_eval(&k, &y, &y).unwrap();
            assert!(kxy * kxy <= kxx * kyy + 1e-10);
            assert!((kxy - kernel_eval(&k, &y, &x).unwrap()).abs() == 0.0);
        }
    }

    #[test]
    fn truncated_series_respects_bound_on_grid() {
        let (rho, m) = (0.75, 200);
        let bound = truncation_bound(rho, m);
        for i in 0..=1000 {
            let t = -1.0 + 2.0 * i as f64 / 1000.0;
            let series = gegenbauer_kernel_eval(3, rho, m, t).unwrap();
            assert!((series - poisson_s2(rho, t)).abs() <= bound.max(4.0 * f64::EPSILON * 4.0));
        }
    }
}
