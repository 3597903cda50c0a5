use super::lag::{lag_covariances_from_gram, streaming_lag_covariances};
use super::{EssReport, LagCovariances, WindowSpec};
use crate::error::{Error, Result};
use crate::geometry::Chain;
use crate::kernels::{embed_chain, GramMatrix, KernelSpec};

/// Chains up to this length are estimated from a stored Gram matrix; longer
/// ones stream the superdiagonals in `O(n b)` memory.
pub const DENSE_LIMIT: usize = 4096;

/// `γ̂_0 <= ZERO_VARIANCE_FLOOR · K₀` is treated as zero feature variance.
pub const ZERO_VARIANCE_FLOOR: f64 = 1e-14;

const MIN_LEN: usize = 4;

fn check_len(n: usize) -> Result<()> {
    if n < MIN_LEN {
        return Err(Error::InvalidInput(format!("ESS needs at least {MIN_LEN} points, got {n}")));
    }
    Ok(())
}

fn finish(lags: LagCovariances, k0: f64, w: &WindowSpec) -> Result<EssReport> {
    let gamma0 = lags.gamma0();
    if !(gamma0 > ZERO_VARIANCE_FLOOR * k0) {
        return Err(Error::ZeroFeatureVariance { gamma0 });
    }
    EssReport::from_lags(&lags, w)
}

/// Lag-window kernel ESS of a chain.
pub fn kernel_ess(chain: &Chain, spec: &KernelSpec, w: &WindowSpec) -> Result<EssReport> {
    kernel_ess_with_limit(chain, spec, w, DENSE_LIMIT)
}

pub(crate) fn kernel_ess_with_limit(
    chain: &Chain,
    spec: &KernelSpec,
    w: &WindowSpec,
    dense_limit: usize,
) -> Result<EssReport> {
    if !spec.is_positive_definite() {
        return Err(Error::InvalidKernel(format!(
            "{} is not positive definite and cannot be used for ESS",
            spec.family()
        )));
    }
    let n = chain.len();
    check_len(n)?;
    let b = w.resolve(n)?;
    let (prepared, feats) = embed_chain(spec, chain)?;
    let k0 = spec.diag_bound(chain.dims());
    let lags = if n <= dense_limit {
        let g = GramMatrix::assemble(&prepared, &feats, Some(spec.clone()), k0);
        lag_covariances_from_gram(&g, b)?
    } else {
        streaming_lag_covariances(&prepared, &feats, b)?
    };
    finish(lags, k0, w)
}

/// Lag-window ESS from an already assembled Gram matrix.
pub fn ess_from_gram(k: &GramMatrix, w: &WindowSpec) -> Result<EssReport> {
    check_len(k.n())?;
    let b = w.resolve(k.n())?;
    finish(lag_covariances_from_gram(k, b)?, k.k0(), w)
}

/// `n² γ_0 / (n γ_0 + 2 Σ_{ℓ=1}^{n-1} (n - ℓ) γ_ℓ)` from population lag
/// covariances. Lags beyond the supplied ones are taken as zero.
///
/// Returns `+∞` when the denominator vanishes.
pub fn exact_population_ess(gammas: &[f64], n: usize) -> Result<f64> {
    let gamma0 = *gammas.first().ok_or_else(|| Error::InvalidInput("no lag covariances".into()))?;
    if !(gamma0 > 0.0) {
        return Err(Error::ZeroFeatureVariance { gamma0 });
    }
    if gammas.len() > n {
        return Err(Error::InvalidInput(format!("{} lags given for n = {n}", gammas.len())));
    }
    let nf = n as f64;
    let tail: f64 = gammas.iter().enumerate().skip(1).map(|(l, g)| (nf - l as f64) * g).sum();
    let denom = nf * gamma0 + 2.0 * tail;
    if denom == 0.0 {
        Ok(f64::INFINITY)
    } else if denom < 0.0 {
        Err(Error::InvalidInput(format!(
            "lag sequence gives a negative risk denominator {denom:e}; it is not an autocovariance"
        )))
    } else {
        Ok(nf * nf * gamma0 / denom)
    }
}

/// Ordinary lag-window ESS of a real series.
pub fn scalar_ess(series: &[f64], w: &WindowSpec) -> Result<EssReport> {
    let n = series.len();
    check_len(n)?;
    if series.iter().any(|y| !y.is_finite()) {
        return Err(Error::InvalidInput("series contains non-finite values".into()));
    }
    if series.iter().all(|&y| y == series[0]) {
        return Err(Error::ZeroFeatureVariance { gamma0: 0.0 });
    }
    let b = w.resolve(n)?;
    let mean = series.iter().sum::<f64>() / n as f64;
    let c: Vec<f64> = series.iter().map(|y| y - mean).collect();
    let lags = LagCovariances::new(scalar_lags(&c, b), n)?;
    if !(lags.gamma0() > 0.0) {
        return Err(Error::ZeroFeatureVariance { gamma0: lags.gamma0() });
    }
    EssReport::from_lags(&lags, w)
}

/// `(n - ℓ)⁻¹ Σ_t c_t c_{t+ℓ}` for `ℓ = 0..=b` on an already centered series.
pub(crate) fn scalar_lags(c: &[f64], b: usize) -> Vec<f64> {
    let n = c.len();
    (0..=b)
        .map(|l| c[..n - l].iter().zip(&c[l..]).map(|(x, y)| x * y).sum::<f64>() / (n - l) as f64)
        .collect()
}
