//! V-statistic MMD between empirical measures and the reference-corrected
//! risk statistic.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Chain, UnitVector};
use crate::kernels::{embed_chain, Features, KernelSpec, Prepared};
use crate::rng::stream_rng;
use crate::samplers::{iid_chain, Target};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmdResult {
    pub mmd2: f64,
    pub n: usize,
    pub m: usize,
    pub kernel: KernelSpec,
}

fn self_sum(p: &Prepared, f: &Features) -> f64 {
    p.row_sums(f).iter().sum()
}

/// `Σ_s Σ_j k(a_s, b_j)`, rows of `a` in parallel, totals in index order.
fn cross_sum(p: &Prepared, a: &Features, b: &Features) -> f64 {
    let m = b.len();
    let rows: Vec<f64> = (0..a.len())
        .into_par_iter()
        .map_init(
            || vec![0.0; m],
            |buf, s| {
                p.fill(a.row(s), b, 0..m, buf);
                buf.iter().sum::<f64>()
            },
        )
        .collect();
    rows.iter().sum()
}

fn check_pair(a: &Chain, b: &Chain) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch { expected: a.dims().to_vec(), got: b.dims().to_vec() });
    }
    Ok(())
}

/// Orders two samples by size, then by the bits of their coordinates.
fn canonical_order(a: &Features, b: &Features) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| {
        let bits = |f: &Features| (0..f.len()).flat_map(|i| f.row(i).iter().map(|x| x.to_bits()).collect::<Vec<_>>()).collect::<Vec<_>>();
        bits(a).cmp(&bits(b))
    })
}

/// `n⁻² Σ k(a_s, a_t) - 2 (n m)⁻¹ Σ k(a_s, b_j) + m⁻² Σ k(b_i, b_j)`,
/// diagonal terms included.
///
/// The two samples are put in a canonical order before summing, so the result
/// is bitwise symmetric in `a` and `b`.
pub fn mmd2_empirical(a: &Chain, b: &Chain, spec: &KernelSpec) -> Result<MmdResult> {
    check_pair(a, b)?;
    let (p, fa) = embed_chain(spec, a)?;
    let (_, fb) = embed_chain(spec, b)?;
    let (x, y) = match canonical_order(&fa, &fb) {
        Ordering::Greater => (&fb, &fa),
        _ => (&fa, &fb),
    };
    let (nx, ny) = (x.len() as f64, y.len() as f64);
    let mmd2 = self_sum(&p, x) / (nx * nx) - 2.0 * cross_sum(&p, x, y) / (nx * ny) + self_sum(&p, y) / (ny * ny);
    Ok(MmdResult { mmd2, n: a.len(), m: b.len(), kernel: spec.clone() })
}

/// An iid reference sample with its self-sum and centered kernel variance
/// precomputed, for repeated comparisons against many chains.
#[derive(Debug, Clone)]
pub struct ReferenceSample {
    spec: KernelSpec,
    dims: Vec<usize>,
    prepared: Prepared,
    feats: Features,
    self_term: f64,
    gamma0: f64,
}

impl ReferenceSample {
    pub fn new(spec: &KernelSpec, reference: &Chain) -> Result<Self> {
        if !reference.is_iid() {
            return Err(Error::InvalidInput("the reference sample must be marked iid".into()));
        }
        let m = reference.len();
        if m <= 1 {
            return Err(Error::InvalidInput(format!("reference size m = {m} must exceed 1")));
        }
        let (prepared, feats) = embed_chain(spec, reference)?;
        let sums = prepared.row_sums(&feats);
        let mf = m as f64;
        let row_means: Vec<f64> = sums.iter().map(|s| s / mf).collect();
        let grand = row_means.iter().sum::<f64>() / mf;
        // Diagonal of H K H: K_ii - (r_i + r_i) + g.
        let gamma0 = (0..m)
            .map(|i| (prepared.eval(feats.row(i), feats.row(i)) - (row_means[i] + row_means[i])) + grand)
            .sum::<f64>()
            / mf;
        let self_term = sums.iter().sum::<f64>() / (mf * mf);
        Ok(ReferenceSample { spec: spec.clone(), dims: reference.dims().to_vec(), prepared, feats, self_term, gamma0 })
    }

    pub fn m(&self) -> usize {
        self.feats.len()
    }

    /// `γ̂_0^ref`, the mean diagonal of the centered reference Gram.
    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    pub fn mmd2(&self, chain: &Chain) -> Result<f64> {
        if chain.dims() != self.dims.as_slice() {
            return Err(Error::DimensionMismatch { expected: self.dims.clone(), got: chain.dims().to_vec() });
        }
        let (_, f) = embed_chain(&self.spec, chain)?;
        let (n, m) = (f.len() as f64, self.m() as f64);
        Ok(self_sum(&self.prepared, &f) / (n * n) - 2.0 * cross_sum(&self.prepared, &f, &self.feats) / (n * m)
            + self.self_term)
    }

    /// `n (MMD²(chain, reference) - γ̂_0^ref / m)`.
    pub fn corrected(&self, chain: &Chain) -> Result<f64> {
        Ok(chain.len() as f64 * (self.mmd2(chain)? - self.gamma0 / self.m() as f64))
    }
}

/// `D̂ = n (MMD²(chain, reference) - γ̂_0^ref / m)`; may be negative.
pub fn corrected_risk_statistic(chain: &Chain, reference: &Chain, spec: &KernelSpec) -> Result<f64> {
    ReferenceSample::new(spec, reference)?.corrected(chain)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub n: usize,
    pub reps: usize,
    pub mean_mmd2: f64,
    /// Mean of `MMD² - γ̂_0^ref / m`.
    pub mean_corrected: f64,
    /// Standard error of either mean (they differ by a constant).
    pub se: f64,
}

/// Monte Carlo risk of an iid `n`-sample against a fixed reference. One
/// replication per seed, each drawing from stream 0 of its seed.
pub fn iid_risk_estimate(reference: &ReferenceSample, target: &Target, n: usize, seeds: &[u64]) -> Result<RiskEstimate> {
    if seeds.len() < 2 {
        return Err(Error::InvalidInput("at least two replications are needed".into()));
    }
    let values = seeds
        .par_iter()
        .map(|&s| reference.mmd2(&iid_chain(target, n, &mut stream_rng(s, 0))?))
        .collect::<Result<Vec<f64>>>()?;
    let r = values.len() as f64;
    let mean = values.iter().sum::<f64>() / r;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0);
    Ok(RiskEstimate {
        n,
        reps: values.len(),
        mean_mmd2: mean,
        mean_corrected: mean - reference.gamma0() / reference.m() as f64,
        se: (var / r).sqrt(),
    })
}

/// Index of the mode with the largest `μ_jᵀx`; ties go to the lowest index.
pub fn nearest_mode(x: &UnitVector, modes: &[UnitVector]) -> usize {
    let mut best = 0;
    let mut best_dot = modes[0].dot(x);
    for (j, m) in modes.iter().enumerate().skip(1) {
        let d = m.dot(x);
        if d > best_dot {
            best = j;
            best_dot = d;
        }
    }
    best
}

/// Fraction of the chain assigned to each mode.
pub fn nearest_mode_frequencies(chain: &Chain, modes: &[UnitVector]) -> Result<Vec<f64>> {
    if modes.is_empty() {
        return Err(Error::InvalidInput("no modes given".into()));
    }
    let pts = chain.sphere_points().ok_or_else(|| Error::InvalidInput("nearest-mode frequencies need a sphere chain".into()))?;
    if let Some(m) = modes.iter().find(|m| m.dim() != chain.dims()[0]) {
        return Err(Error::DimensionMismatch { expected: chain.dims().to_vec(), got: vec![m.dim()] });
    }
    let mut counts = vec![0usize; modes.len()];
    for x in pts {
        counts[nearest_mode(x, modes)] += 1;
    }
    Ok(counts.into_iter().map(|c| c as f64 / chain.len() as f64).collect())
}

/// `½ Σ_j |freq_j - ref_j|` between the chain's nearest-mode frequencies and
/// a reference probability vector.
pub fn mode_tv_error(chain: &Chain, modes: &[UnitVector], reference_freqs: &[f64]) -> Result<f64> {
    if reference_freqs.len() != modes.len() {
        return Err(Error::InvalidInput(format!(
            "{} reference frequencies for {} modes",
            reference_freqs.len(),
            modes.len()
        )));
    }
    let total: f64 = reference_freqs.iter().sum();
    if (total - 1.0).abs() > 1e-9 || reference_freqs.iter().any(|f| !(*f >= 0.0)) {
        return Err(Error::InvalidInput(format!("reference frequencies sum to {total}, not 1")));
    }
    let freqs = nearest_mode_frequencies(chain, modes)?;
    Ok(0.5 * freqs.iter().zip(reference_freqs).map(|(f, r)| (f - r).abs()).sum::<f64>())
}
