//! Linear-kernel ESS as a variance-weighted harmonic mean of scalar ESS
//! along the eigendirections of the empirical feature covariance.
//!
//! With `k(x, y) = xᵀy` the centered Gram is `Y Yᵀ` for the centered
//! coordinate matrix `Y`, so every superdiagonal sum of `K̃` is the trace of a
//! lag cross-covariance of `Y`. Traces do not depend on the basis, hence the
//! kernel ESS equals `Σ λ_j / Σ (λ_j / ESS_j)` exactly, path by path.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::ess::scalar_lags;
use super::{kernel_ess, EssReport, LagCovariances, WindowSpec};
use crate::error::{Error, Result};
use crate::geometry::{Chain, Manifold};
use crate::kernels::KernelSpec;

/// Relative eigenvalue floor (against the trace) below which a direction
/// carries no variance.
const LAMBDA_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionEss {
    pub lambda: f64,
    pub sigma2: f64,
    /// `n λ / σ²`; `None` for null directions or a nonpositive `σ²`.
    pub ess: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicReport {
    pub kernel_ess_linear: EssReport,
    /// `None` when the summed long-run variance over the retained directions
    /// is not positive.
    pub weighted_harmonic_mean: Option<f64>,
    pub per_direction: Vec<DirectionEss>,
}

pub fn harmonic_mean_diagnostic(chain: &Chain, w: &WindowSpec) -> Result<HarmonicReport> {
    if chain.manifold() != Manifold::Sphere {
        return Err(Error::ManifoldMismatch { family: "sphere_linear", manifold: chain.manifold() });
    }
    let n = chain.len();
    let d = chain.dims()[0];
    let kernel_ess_linear = kernel_ess(chain, &KernelSpec::SphereLinear, w)?;
    let b = kernel_ess_linear.bandwidth;

    let x = DMatrix::from_fn(n, d, |t, i| chain.points()[t].as_sphere().expect("sphere chain").as_slice()[i]);
    let mean = x.row_mean();
    let y = DMatrix::from_fn(n, d, |t, i| x[(t, i)] - mean[i]);
    let cov = (y.transpose() * &y) / n as f64;
    let eig = cov.symmetric_eigen();
    let trace: f64 = eig.eigenvalues.iter().sum();
    if !(trace > 0.0) {
        return Err(Error::ZeroFeatureVariance { gamma0: trace });
    }

    let mut per_direction = Vec::with_capacity(d);
    let (mut lambda_sum, mut lrv_sum) = (0.0, 0.0);
    for j in 0..d {
        let lambda = eig.eigenvalues[j];
        let z: Vec<f64> = (&y * eig.eigenvectors.column(j)).iter().copied().collect();
        let lags = LagCovariances::new(scalar_lags(&z, b), n)?;
        let sigma2 = super::long_run_variance(&lags, w)?;
        let retained = lambda > LAMBDA_FLOOR * trace;
        let ess = (retained && sigma2 > 0.0).then(|| n as f64 * lambda / sigma2);
        if retained {
            lambda_sum += lambda;
            // λ_j / ESS_j = σ_j² / n
            lrv_sum += sigma2;
        }
        per_direction.push(DirectionEss { lambda, sigma2, ess });
    }
    let weighted_harmonic_mean = (lrv_sum > 0.0).then(|| n as f64 * lambda_sum / lrv_sum);
    Ok(HarmonicReport { kernel_ess_linear, weighted_harmonic_mean, per_direction })
}
