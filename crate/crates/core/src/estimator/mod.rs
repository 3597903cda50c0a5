//! Kernel effective sample size.
//!
//! The pipeline is Gram matrix, double centering, lag covariances of the
//! centered features, lag-window long-run variance, and finally
//! `ESS = n γ̂_0 / σ̂²`. The same lag-window machinery also backs scalar
//! coordinate ESS, the linear-kernel harmonic-mean diagnostic and the
//! precision rule.

mod ess;
mod harmonic;
mod lag;
mod precision;
mod window;

use serde::{Deserialize, Serialize};

pub use ess::{ess_from_gram, exact_population_ess, kernel_ess, scalar_ess, DENSE_LIMIT, ZERO_VARIANCE_FLOOR};
pub use harmonic::{harmonic_mean_diagnostic, DirectionEss, HarmonicReport};
pub use lag::{center_gram, lag_covariances, long_run_variance, LagCovariances};
pub use precision::{precision_check, PrecisionReport};
pub use window::{auto_bandwidth, Bandwidth, LagWindow, WindowSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EssStatus {
    Ok,
    /// `σ̂² <= 0`; `ess` and `tau` are withheld.
    UnstableSigma,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EssReport {
    pub n: usize,
    pub gamma0: f64,
    pub sigma2: f64,
    pub ess: Option<f64>,
    pub tau: Option<f64>,
    pub bandwidth: usize,
    pub window: String,
    pub status: EssStatus,
}

impl EssReport {
    pub(crate) fn from_lags(lags: &LagCovariances, w: &WindowSpec) -> crate::Result<Self> {
        let sigma2 = long_run_variance(lags, w)?;
        let n = lags.n();
        let gamma0 = lags.gamma0();
        let (ess, tau, status) = if sigma2 > 0.0 {
            (Some(n as f64 * gamma0 / sigma2), Some(sigma2 / gamma0), EssStatus::Ok)
        } else {
            (None, None, EssStatus::UnstableSigma)
        };
        Ok(EssReport {
            n,
            gamma0,
            sigma2,
            ess,
            tau,
            bandwidth: lags.bandwidth(),
            window: w.window.name().to_string(),
            status,
        })
    }

    pub fn is_ok(&self) -> bool {
        self.status == EssStatus::Ok
    }
}
