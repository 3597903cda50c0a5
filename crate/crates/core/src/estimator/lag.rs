//! Lag covariances of empirically centered kernel features.
//!
//! With row means `r_s = n⁻¹ Σ_t K_st` and grand mean `g = n⁻¹ Σ_s r_s`,
//! the doubly centered Gram matrix is `K̃_st = K_st - (r_s + r_t) + g`,
//! which equals `H K H`. Both the dense and the streaming paths evaluate
//! exactly this expression with identically ordered sums, so they agree
//! bit for bit.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::WindowSpec;
use crate::error::{Error, Result};
use crate::kernels::{Features, GramMatrix, Prepared};

/// `γ̂_0, ..., γ̂_b` for a path of length `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagCovariances {
    gammas: Vec<f64>,
    n: usize,
}

impl LagCovariances {
    pub fn new(gammas: Vec<f64>, n: usize) -> Result<Self> {
        if gammas.is_empty() || gammas.len() > n {
            return Err(Error::InvalidInput(format!("{} lags do not fit n = {n}", gammas.len())));
        }
        Ok(LagCovariances { gammas, n })
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn gamma0(&self) -> f64 {
        self.gammas[0]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.gammas.len() - 1
    }
}

struct Centering {
    row_means: Vec<f64>,
    grand_mean: f64,
}

impl Centering {
    fn from_row_sums(sums: Vec<f64>) -> Self {
        let n = sums.len() as f64;
        let row_means: Vec<f64> = sums.into_iter().map(|s| s / n).collect();
        let grand_mean = row_means.iter().sum::<f64>() / n;
        Centering { row_means, grand_mean }
    }

    #[inline]
    fn center(&self, k: f64, s: usize, t: usize) -> f64 {
        (k - (self.row_means[s] + self.row_means[t])) + self.grand_mean
    }
}

fn dense_centering(k: &DMatrix<f64>) -> Centering {
    // Column s equals row s for a symmetric matrix; columns are contiguous.
    let sums = (0..k.ncols()).map(|s| k.column(s).iter().sum()).collect();
    Centering::from_row_sums(sums)
}

/// `H K H` with `H = I - n⁻¹ 1 1ᵀ`.
pub fn center_gram(k: &GramMatrix) -> DMatrix<f64> {
    let values = k.values();
    let c = dense_centering(values);
    let n = k.n();
    DMatrix::from_fn(n, n, |s, t| c.center(values[(s, t)], s, t))
}

fn check_bandwidth(n: usize, b: usize) -> Result<()> {
    if b >= n {
        return Err(Error::InvalidWindow(format!("bandwidth {b} must be below n = {n}")));
    }
    Ok(())
}

/// `γ̂_ℓ = (n - ℓ)⁻¹ Σ_t K̃_{t, t+ℓ}` for `ℓ = 0..=b`.
pub fn lag_covariances(ktilde: &DMatrix<f64>, b: usize) -> Result<LagCovariances> {
    let n = ktilde.nrows();
    if !ktilde.is_square() || n == 0 {
        return Err(Error::InvalidInput("centered Gram matrix must be square and nonempty".into()));
    }
    check_bandwidth(n, b)?;
    let gammas = (0..=b)
        .into_par_iter()
        .map(|lag| {
            let s: f64 = (0..n - lag).map(|t| ktilde[(t, t + lag)]).sum();
            s / (n - lag) as f64
        })
        .collect();
    LagCovariances::new(gammas, n)
}

/// Lag covariances of a Gram matrix without materializing `K̃`.
pub(crate) fn lag_covariances_from_gram(k: &GramMatrix, b: usize) -> Result<LagCovariances> {
    let values = k.values();
    let n = k.n();
    check_bandwidth(n, b)?;
    let c = dense_centering(values);
    let gammas = (0..=b)
        .into_par_iter()
        .map(|lag| {
            let s: f64 = (0..n - lag).map(|t| c.center(values[(t, t + lag)], t, t + lag)).sum();
            s / (n - lag) as f64
        })
        .collect();
    LagCovariances::new(gammas, n)
}

/// Lag covariances in `O(n b)` memory: one pass of full kernel rows for the
/// row means, then the `b + 1` superdiagonals evaluated on the fly.
pub(crate) fn streaming_lag_covariances(prepared: &Prepared, feats: &Features, b: usize) -> Result<LagCovariances> {
    let n = feats.len();
    check_bandwidth(n, b)?;
    let c = Centering::from_row_sums(prepared.row_sums(feats));
    let gammas = (0..=b)
        .into_par_iter()
        .map(|lag| {
            let s: f64 = (0..n - lag)
                .map(|t| c.center(prepared.eval(feats.row(t), feats.row(t + lag)), t, t + lag))
                .sum();
            s / (n - lag) as f64
        })
        .collect();
    LagCovariances::new(gammas, n)
}

/// `σ̂² = γ̂_0 + 2 Σ_{ℓ=1}^{b} w(ℓ/(b+1)) γ̂_ℓ`.
///
/// The result may be nonpositive; callers report that rather than clamp it.
pub fn long_run_variance(lags: &LagCovariances, w: &WindowSpec) -> Result<f64> {
    let b = w.resolve(lags.n())?;
    if b != lags.bandwidth() {
        return Err(Error::InvalidWindow(format!(
            "lags were computed to {} but the window resolves to {b}",
            lags.bandwidth()
        )));
    }
    let g = lags.gammas();
    let tail: f64 = (1..=b).map(|l| w.weight(l, b) * g[l]).sum();
    Ok(g[0] + 2.0 * tail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::LagWindow;
    use crate::geometry::Chain;
    use crate::kernels::{embed_chain, gram, KernelSpec};
    use crate::rng::stream_rng;
    use crate::samplers::uniform_sphere;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn gram_of(values: DMatrix<f64>) -> GramMatrix {
        GramMatrix::from_matrix(values, 1.0).unwrap()
    }

    #[test]
    fn two_by_two_closed_form() {
        let (a, b, c) = (3.0, 0.5, 2.0);
        let kt = center_gram(&gram_of(DMatrix::from_row_slice(2, 2, &[a, b, b, c])));
        let q = (a - 2.0 * b + c) / 4.0;
        let want = DMatrix::from_row_slice(2, 2, &[q, -q, -q, q]);
        assert!((&kt - want).amax() <= 1e-15);
        let lags = lag_covariances(&kt, 1).unwrap();
        assert!((lags.gammas()[0] - q).abs() <= 1e-15);
        assert!((lags.gammas()[1] + q).abs() <= 1e-15);
    }

    #[test]
    fn constant_matrix_centers_to_zero() {
        let kt = center_gram(&gram_of(DMatrix::from_element(5, 5, 2.75)));
        assert!(kt.amax() <= 1e-15);
    }

    #[test]
    fn centered_rows_sum_to_zero() {
        let mut rng = stream_rng(17, 0);
        let g = DMatrix::<f64>::from_fn(50, 8, |_, _| rng.sample(StandardNormal));
        let k = &g * g.transpose();
        let kt = center_gram(&gram_of(k));
        for s in 0..50 {
            assert!(kt.row(s).sum().abs() <= 1e-9);
            assert!(kt.column(s).sum().abs() <= 1e-9);
        }
        assert!(kt.clone().symmetric_eigenvalues().min() >= -1e-9 * 50.0);
    }

    #[test]
    fn identity_lags() {
        let lags = lag_covariances(&DMatrix::identity(6, 6), 3).unwrap();
        assert_eq!(lags.gammas(), &[1.0, 0.0, 0.0, 0.0]);
        assert!(lag_covariances(&DMatrix::identity(6, 6), 6).is_err());
    }

    #[test]
    fn long_run_variance_examples() {
        let lags = LagCovariances::new(vec![1.0, 0.0, 0.0, 0.0], 10).unwrap();
        assert_eq!(long_run_variance(&lags, &WindowSpec::bartlett(3)).unwrap(), 1.0);
        let lags = LagCovariances::new(vec![1.0, 0.5], 10).unwrap();
        assert_eq!(long_run_variance(&lags, &WindowSpec::bartlett(1)).unwrap(), 1.5);
        assert!(long_run_variance(&lags, &WindowSpec::bartlett(2)).is_err());
    }

    #[test]
    fn geometric_lags_match_double_sum_oracle() {
        for r in [-0.6, 0.2, 0.9] {
            for b in [1usize, 4, 13] {
                let gammas: Vec<f64> = (0..=b).map(|l| 2.0 * f64::powi(r, l as i32)).collect();
                let lags = LagCovariances::new(gammas.clone(), 100).unwrap();
                for w in [WindowSpec::bartlett(b), WindowSpec::truncated(b)] {
                    // Σ_{ℓ=-b}^{b} w(|ℓ|/(b+1)) γ_|ℓ| with w(0) = 1.
                    let mut oracle = 0.0;
                    for l in -(b as i64)..=(b as i64) {
                        let a = l.unsigned_abs() as usize;
                        let wt = match w.window {
                            LagWindow::Bartlett => 1.0 - a as f64 / (b as f64 + 1.0),
                            _ => 1.0,
                        };
                        oracle += wt * gammas[a];
                    }
                    let v = long_run_variance(&lags, &w).unwrap();
                    assert!((v - oracle).abs() <= 1e-12 * oracle.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn streaming_matches_dense_bitwise() {
        let mut rng = stream_rng(23, 0);
        let chain = Chain::sphere((0..300).map(|_| uniform_sphere(3, &mut rng)).collect()).unwrap();
        let spec = KernelSpec::sphere_poisson(0.75).unwrap();
        let g = gram(&spec, &chain).unwrap();
        let dense = lag_covariances(&center_gram(&g), 6).unwrap();
        let from_gram = lag_covariances_from_gram(&g, 6).unwrap();
        let (prepared, feats) = embed_chain(&spec, &chain).unwrap();
        let streamed = streaming_lag_covariances(&prepared, &feats, 6).unwrap();
        assert_eq!(dense, from_gram);
        for (a, b) in dense.gammas().iter().zip(streamed.gammas()) {
            assert!((a - b).abs() <= 1e-12 * dense.gamma0());
        }
    }
}
