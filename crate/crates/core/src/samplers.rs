//! von Mises–Fisher sampling and Metropolis–Hastings chains on S².

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Chain, ChainMeta, UnitVector};
use crate::rng::stream_rng;

/// A uniformly distributed point on `S^{d-1}`.
pub fn uniform_sphere<R: Rng + ?Sized>(d: usize, rng: &mut R) -> UnitVector {
    loop {
        let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            return UnitVector::new(g.into_iter().map(|x| x / norm).collect()).expect("normalized");
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VmfParams {
    pub mean: UnitVector,
    pub kappa: f64,
}

impl VmfParams {
    pub fn new(mean: UnitVector, kappa: f64) -> Result<Self> {
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidInput(format!("vMF concentration {kappa} must be finite and nonnegative")));
        }
        Ok(VmfParams { mean, kappa })
    }

    /// `κ μᵀx`, the log density up to `log c(κ)`.
    pub fn log_kernel(&self, x: &UnitVector) -> f64 {
        self.kappa * self.mean.dot(x)
    }
}

/// `log c(κ)` for the vMF density `c(κ) exp(κ μᵀx)` on S²,
/// `c(κ) = κ / (4π sinh κ)`.
pub fn vmf_s2_log_normalizer(kappa: f64) -> f64 {
    if kappa == 0.0 {
        return -(4.0 * PI).ln();
    }
    // log sinh κ = κ + log(1 - e^{-2κ}) - log 2
    let log_sinh = kappa + (-(-2.0 * kappa).exp()).ln_1p() - std::f64::consts::LN_2;
    kappa.ln() - (4.0 * PI).ln() - log_sinh
}

/// `E[μᵀX] = coth κ - 1/κ` under vMF(μ, κ) on S².
pub fn vmf_s2_mean_cosine(kappa: f64) -> f64 {
    1.0 / kappa.tanh() - 1.0 / kappa
}

/// A finite vMF mixture `Σ_j w_j c(κ_j) exp(κ_j μ_jᵀx)` on S².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureTarget {
    components: Vec<VmfParams>,
    weights: Vec<f64>,
}

impl MixtureTarget {
    pub fn new(components: Vec<VmfParams>, weights: Vec<f64>) -> Result<Self> {
        if components.is_empty() || components.len() != weights.len() {
            return Err(Error::InvalidInput(format!(
                "{} components but {} weights",
                components.len(),
                weights.len()
            )));
        }
        if components.iter().any(|c| c.mean.dim() != 3) {
            return Err(Error::InvalidInput("mixture components must live on S²".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::InvalidInput("mixture weights must be nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("mixture weights sum to {total}, not 1")));
        }
        Ok(MixtureTarget { components, weights })
    }

    /// Equal-weight mixture of `vMF(μ_j, κ)`.
    pub fn equal_weights(means: &[UnitVector], kappa: f64) -> Result<Self> {
        let comps = means.iter().map(|m| VmfParams::new(m.clone(), kappa)).collect::<Result<Vec<_>>>()?;
        let w = vec![1.0 / means.len() as f64; means.len()];
        Self::new(comps, w)
    }

    pub fn components(&self) -> &[VmfParams] {
        &self.components
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Log density up to the additive constant `log c(κ_1)`.
    ///
    /// Each component carries `log c(κ_j) - log c(κ_1)`, which is zero when
    /// all concentrations agree.
    pub fn log_density(&self, x: &UnitVector) -> f64 {
        let base = vmf_s2_log_normalizer(self.components[0].kappa);
        let terms: Vec<f64> = self
            .components
            .iter()
            .zip(&self.weights)
            .filter(|(_, &w)| w > 0.0)
            .map(|(c, &w)| {
                let offset = if c.kappa == self.components[0].kappa {
                    0.0
                } else {
                    vmf_s2_log_normalizer(c.kappa) - base
                };
                w.ln() + c.log_kernel(x) + offset
            })
            .collect();
        let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        m + terms.iter().map(|a| (a - m).exp()).sum::<f64>().ln()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> UnitVector {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut pick = self.weights.iter().rposition(|&w| w > 0.0).expect("positive weight");
        for (j, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                pick = j;
                break;
            }
        }
        sample_vmf_s2(&self.components[pick], rng).expect("components validated")
    }
}

/// The four vertices of a regular tetrahedron inscribed in S².
pub fn tetrahedron_modes() -> Vec<UnitVector> {
    let s = 1.0 / 3f64.sqrt();
    [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]]
        .iter()
        .map(|v| UnitVector::new(v.iter().map(|x| x * s).collect()).expect("unit"))
        .collect()
}

/// `W = μᵀX` for `v = 1 - u`, `u ~ U(0, 1]`:
/// `W = 1 + κ⁻¹ log(u + (1 - u) e^{-2κ}) = 1 + κ⁻¹ log1p(v (e^{-2κ} - 1))`.
///
/// The `log1p` form is used for `v < 1/2`; above that `u = 1 - v` is exact and
/// the direct form keeps its precision as `u -> 0`.
pub(crate) fn vmf_cosine(kappa: f64, v: f64) -> f64 {
    let log_term = if v < 0.5 {
        (v * (-2.0 * kappa).exp_m1()).ln_1p()
    } else {
        ((1.0 - v) + v * (-2.0 * kappa).exp()).ln()
    };
    (1.0 + log_term / kappa).clamp(-1.0, 1.0)
}

/// Rotation taking `e₃` to `mu`, applied to `x`.
///
/// For `μ₃ >= 0` this is the rotation in the plane of `e₃` and `μ`. Otherwise
/// `x` is first turned by 180° about `e₁` (taking `e₃` to `-e₃`) and then by
/// the rotation in the plane of `-e₃` and `μ`, which stays well conditioned
/// near the antipode and is exactly the 180° turn at `μ = -e₃`.
fn frame_to(mu: &[f64], x: [f64; 3]) -> [f64; 3] {
    let (x, from) = if mu[2] >= 0.0 { (x, 1.0) } else { ([x[0], -x[1], -x[2]], -1.0) };
    // Rodrigues with axis v = a × μ for a = from·e₃, cos = aᵀμ.
    let v = [-from * mu[1], from * mu[0], 0.0];
    let c = from * mu[2];
    let cross = |a: [f64; 3], b: [f64; 3]| [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    let vx = cross(v, x);
    let vvx = cross(v, vx);
    let k = 1.0 / (1.0 + c);
    [x[0] + vx[0] + k * vvx[0], x[1] + vx[1] + k * vvx[1], x[2] + vx[2] + k * vvx[2]]
}

/// One draw from vMF(μ, κ) on S² by inversion of the cosine distribution.
pub fn sample_vmf_s2<R: Rng + ?Sized>(params: &VmfParams, rng: &mut R) -> Result<UnitVector> {
    if params.mean.dim() != 3 {
        return Err(Error::DimensionMismatch { expected: vec![3], got: vec![params.mean.dim()] });
    }
    if !(params.kappa >= 0.0) {
        return Err(Error::InvalidInput(format!("vMF concentration {} is negative", params.kappa)));
    }
    if params.kappa == 0.0 {
        return Ok(uniform_sphere(3, rng));
    }
    let w = vmf_cosine(params.kappa, rng.random::<f64>());
    let phi = 2.0 * PI * rng.random::<f64>();
    let s = (1.0 - w * w).max(0.0).sqrt();
    let y = frame_to(params.mean.as_slice(), [s * phi.cos(), s * phi.sin(), w]);
    UnitVector::new(y.to_vec())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Target {
    Vmf(VmfParams),
    Mixture(MixtureTarget),
}

impl Target {
    pub fn log_density(&self, x: &UnitVector) -> f64 {
        match self {
            Target::Vmf(p) => p.log_kernel(x),
            Target::Mixture(m) => m.log_density(x),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<UnitVector> {
        match self {
            Target::Vmf(p) => sample_vmf_s2(p, rng),
            Target::Mixture(m) => Ok(m.sample(rng)),
        }
    }

    fn dim(&self) -> usize {
        match self {
            Target::Vmf(p) => p.mean.dim(),
            Target::Mixture(m) => m.components[0].mean.dim(),
        }
    }
}

impl From<VmfParams> for Target {
    fn from(p: VmfParams) -> Self {
        Target::Vmf(p)
    }
}

impl From<MixtureTarget> for Target {
    fn from(m: MixtureTarget) -> Self {
        Target::Mixture(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Proposal {
    /// `vMF(x, κ)` centered at the current state.
    RandomWalk { kappa: f64 },
    /// A state-independent vMF mixture.
    Independence { mixture: MixtureTarget },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainRunConfig {
    pub n_keep: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// Stream of `seed` the chain draws from.
    pub stream: u64,
    pub target: Target,
    pub proposal: Proposal,
    /// Initial state; drawn from the target when absent.
    pub start: Option<UnitVector>,
}

impl ChainRunConfig {
    pub fn random_walk(target: impl Into<Target>, kappa: f64, n_keep: usize, burn_in: usize, seed: u64) -> Self {
        ChainRunConfig {
            n_keep,
            burn_in,
            seed,
            stream: 0,
            target: target.into(),
            proposal: Proposal::RandomWalk { kappa },
            start: None,
        }
    }

    pub fn independence(
        target: impl Into<Target>,
        mixture: MixtureTarget,
        n_keep: usize,
        burn_in: usize,
        seed: u64,
    ) -> Self {
        ChainRunConfig {
            n_keep,
            burn_in,
            seed,
            stream: 0,
            target: target.into(),
            proposal: Proposal::Independence { mixture },
            start: None,
        }
    }

    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }

    pub fn with_start(mut self, start: UnitVector) -> Self {
        self.start = Some(start);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n_keep == 0 {
            return Err(Error::Config("n_keep must be at least 1".into()));
        }
        if self.target.dim() != 3 {
            return Err(Error::Config("chains run on S² only".into()));
        }
        if let Some(s) = &self.start {
            if s.dim() != 3 {
                return Err(Error::DimensionMismatch { expected: vec![3], got: vec![s.dim()] });
            }
        }
        match &self.proposal {
            Proposal::RandomWalk { kappa } if !(*kappa >= 0.0 && kappa.is_finite()) => {
                Err(Error::Config(format!("proposal concentration {kappa} is invalid")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub chain: Chain,
    /// Accepted fraction of the `n_keep` post-burn-in proposals.
    pub acceptance_rate: f64,
}

fn run_mh<R: Rng>(
    cfg: &ChainRunConfig,
    name: &str,
    rng: &mut R,
    mut propose: impl FnMut(&UnitVector, &mut R) -> Result<UnitVector>,
    log_q: impl Fn(&UnitVector) -> f64,
) -> Result<RunOutput> {
    let mut x = match &cfg.start {
        Some(s) => s.clone(),
        None => cfg.target.sample(rng)?,
    };
    let mut lp_x = cfg.target.log_density(&x);
    let mut lq_x = log_q(&x);
    let mut kept = Vec::with_capacity(cfg.n_keep);
    let mut accepted = 0usize;
    for it in 0..cfg.burn_in + cfg.n_keep {
        let y = propose(&x, rng)?;
        let lp_y = cfg.target.log_density(&y);
        let lq_y = log_q(&y);
        let log_alpha = (lp_y - lp_x) + (lq_x - lq_y);
        let u: f64 = rng.random();
        if log_alpha >= 0.0 || u < log_alpha.exp() {
            x = y;
            lp_x = lp_y;
            lq_x = lq_y;
            if it >= cfg.burn_in {
                accepted += 1;
            }
        }
        if it >= cfg.burn_in {
            kept.push(x.clone());
        }
    }
    let meta = ChainMeta { sampler: Some(name.into()), seed: Some(cfg.seed), burn_in: Some(cfg.burn_in), iid: false };
    Ok(RunOutput { chain: Chain::sphere(kept)?.with_meta(meta), acceptance_rate: accepted as f64 / cfg.n_keep as f64 })
}

/// Random-walk Metropolis with a `vMF(x, κ)` proposal.
///
/// The proposal density depends on `xᵀy` only, so it is symmetric and never
/// evaluated.
pub fn rwmh_sphere(cfg: &ChainRunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let kappa = match cfg.proposal {
        Proposal::RandomWalk { kappa } => kappa,
        _ => return Err(Error::Config("rwmh_sphere needs a random-walk proposal".into())),
    };
    let mut rng = stream_rng(cfg.seed, cfg.stream);
    run_mh(
        cfg,
        "rwmh",
        &mut rng,
        |x, rng| sample_vmf_s2(&VmfParams { mean: x.clone(), kappa }, rng),
        |_| 0.0,
    )
}

/// Independence Metropolis–Hastings with a fixed vMF-mixture proposal.
pub fn independence_mh(cfg: &ChainRunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let mixture = match &cfg.proposal {
        Proposal::Independence { mixture } => mixture.clone(),
        _ => return Err(Error::Config("independence_mh needs an independence proposal".into())),
    };
    let mut rng = stream_rng(cfg.seed, cfg.stream);
    run_mh(cfg, "independence_mh", &mut rng, |_, rng| Ok(mixture.sample(rng)), |x| mixture.log_density(x))
}

/// `n` independent draws from the target, marked iid.
pub fn iid_chain<R: Rng + ?Sized>(target: &Target, n: usize, rng: &mut R) -> Result<Chain> {
    let pts = (0..n).map(|_| target.sample(rng)).collect::<Result<Vec<_>>>()?;
    Ok(Chain::sphere(pts)?.with_meta(ChainMeta { sampler: Some("iid".into()), seed: None, burn_in: None, iid: true }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e3() -> UnitVector {
        UnitVector::basis(3, 2).unwrap()
    }

    #[test]
    fn cosine_limits() {
        assert_eq!(vmf_cosine(12.0, 0.0), 1.0);
        assert!((vmf_cosine(12.0, 1.0) + 1.0).abs() < 1e-12);
        assert!((vmf_cosine(0.5, 1.0) + 1.0).abs() < 1e-12);
        // The two branches meet continuously at v = 1/2.
        let below = vmf_cosine(12.0, 0.5 - 1e-16);
        assert!((below - vmf_cosine(12.0, 0.5)).abs() < 1e-12);
        for k in [1e-3, 0.7, 35.0, 1e6] {
            for v in [0.0, 0.1, 0.3, 0.6, 0.9, 0.999] {
                let direct = 1.0 + ((1.0 - v) + v * f64::exp(-2.0 * k)).ln() / k;
                assert!((vmf_cosine(k, v) - direct.clamp(-1.0, 1.0)).abs() < 1e-9, "k {k} v {v}");
            }
        }
    }

    #[test]
    fn frame_rotation_maps_e3_to_mu() {
        let mut rng = stream_rng(1, 0);
        let mut mus: Vec<UnitVector> = (0..200).map(|_| uniform_sphere(3, &mut rng)).collect();
        mus.push(e3());
        mus.push(e3().neg());
        mus.push(UnitVector::new(vec![1e-9, 0.0, -1.0]).unwrap());
        for mu in &mus {
            let y = frame_to(mu.as_slice(), [0.0, 0.0, 1.0]);
            for i in 0..3 {
                assert!((y[i] - mu.as_slice()[i]).abs() <= 1e-14, "{mu:?} -> {y:?}");
            }
            // Orthogonality: a tangent vector stays orthogonal and unit.
            let t = frame_to(mu.as_slice(), [0.6, 0.8, 0.0]);
            let dot: f64 = t.iter().zip(mu.as_slice()).map(|(a, b)| a * b).sum();
            assert!(dot.abs() <= 1e-14);
            assert!((t.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() <= 1e-14);
        }
        assert_eq!(frame_to(e3().neg().as_slice(), [0.3, 0.4, 0.5]), [0.3, -0.4, -0.5]);
    }

    #[test]
    fn vmf_moments() {
        let mu = UnitVector::new(vec![0.48, -0.6, 0.64]).unwrap();
        let p = VmfParams::new(mu.clone(), 12.0).unwrap();
        let mut rng = stream_rng(2, 0);
        let n = 100_000;
        let mut sum = [0.0; 3];
        let mut cos = Vec::with_capacity(n);
        for _ in 0..n {
            let x = sample_vmf_s2(&p, &mut rng).unwrap();
            for i in 0..3 {
                sum[i] += x.as_slice()[i];
            }
            cos.push(mu.dot(&x));
        }
        let norm = sum.iter().map(|v| v * v).sum::<f64>().sqrt();
        let dir: f64 = sum.iter().zip(mu.as_slice()).map(|(a, b)| a * b).sum::<f64>() / norm;
        assert!(dir.clamp(-1.0, 1.0).acos() <= 0.02);
        let m = cos.iter().sum::<f64>() / n as f64;
        let sd = (cos.iter().map(|c| (c - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        assert!((m - vmf_s2_mean_cosine(12.0)).abs() <= 3.0 * sd / (n as f64).sqrt());
    }

    #[test]
    fn negative_kappa_rejected() {
        assert!(VmfParams::new(e3(), -1.0).is_err());
        let bad = VmfParams { mean: e3(), kappa: -1.0 };
        assert!(sample_vmf_s2(&bad, &mut stream_rng(0, 0)).is_err());
    }

    #[test]
    fn tetrahedron() {
        let m = tetrahedron_modes();
        assert_eq!(m.len(), 4);
        let mut s = [0.0; 3];
        for i in 0..4 {
            assert!((m[i].coords().norm() - 1.0).abs() <= 1e-15);
            for k in 0..3 {
                s[k] += m[i].as_slice()[k];
            }
            for j in 0..i {
                assert!((m[i].dot(&m[j]) + 1.0 / 3.0).abs() <= 1e-12);
            }
        }
        assert!(s.iter().all(|v| v.abs() <= 1e-12));
    }

    #[test]
    fn log_normalizer_matches_direct_form() {
        for k in [0.1, 1.0, 12.0, 28.0] {
            let direct = (k / (4.0 * PI * f64::sinh(k))).ln();
            assert!((vmf_s2_log_normalizer(k) - direct).abs() <= 1e-12);
        }
        assert!(vmf_s2_log_normalizer(800.0).is_finite());
    }

    #[test]
    fn mixture_log_density() {
        let mut rng = stream_rng(3, 0);
        let single = MixtureTarget::new(vec![VmfParams::new(e3(), 12.0).unwrap()], vec![1.0]).unwrap();
        let modes = tetrahedron_modes();
        let w = vec![0.4, 0.3, 0.2, 0.1];
        let mix = MixtureTarget::new(modes.iter().map(|m| VmfParams::new(m.clone(), 28.0).unwrap()).collect(), w.clone()).unwrap();
        for _ in 0..100 {
            let (x, y) = (uniform_sphere(3, &mut rng), uniform_sphere(3, &mut rng));
            let d = single.log_density(&x) - single.log_density(&y);
            assert!((d - 12.0 * (e3().dot(&x) - e3().dot(&y))).abs() <= 1e-12);
            let unnorm = |z: &UnitVector| -> f64 { modes.iter().zip(&w).map(|(m, w)| w * (28.0 * m.dot(z)).exp()).sum() };
            let ratio = (mix.log_density(&x) - mix.log_density(&y)).exp();
            assert!((ratio / (unnorm(&x) / unnorm(&y)) - 1.0).abs() <= 1e-12);
        }
        // x = -μ_1 is equidistant from the other three modes; equal weights.
        let eq = MixtureTarget::equal_weights(&modes, 28.0).unwrap();
        let x = modes[0].neg();
        let mut perm = modes.clone();
        perm.rotate_left(1);
        let eq2 = MixtureTarget::equal_weights(&perm, 28.0).unwrap();
        assert!((eq.log_density(&x) - eq2.log_density(&x)).abs() <= 1e-12);
    }

    #[test]
    fn mixture_rejects_bad_weights() {
        let c = vec![VmfParams::new(e3(), 1.0).unwrap(); 2];
        assert!(MixtureTarget::new(c.clone(), vec![0.5, 0.6]).is_err());
        assert!(MixtureTarget::new(c.clone(), vec![1.5, -0.5]).is_err());
        assert!(MixtureTarget::new(c, vec![1.0]).is_err());
    }

    #[test]
    fn mixture_sampling_frequencies() {
        let modes = tetrahedron_modes();
        let mix = MixtureTarget::new(
            modes.iter().map(|m| VmfParams::new(m.clone(), 28.0).unwrap()).collect(),
            vec![0.4, 0.3, 0.2, 0.1],
        )
        .unwrap();
        let mut rng = stream_rng(4, 0);
        let mut counts = [0usize; 4];
        for _ in 0..20_000 {
            let x = mix.sample(&mut rng);
            let j = (0..4).max_by(|&a, &b| modes[a].dot(&x).total_cmp(&modes[b].dot(&x))).unwrap();
            counts[j] += 1;
        }
        for (c, w) in counts.iter().zip([0.4, 0.3, 0.2, 0.1]) {
            assert!((*c as f64 / 20_000.0 - w).abs() < 0.015);
        }
    }

    fn rotation_rwmh(seed: u64) -> ChainRunConfig {
        ChainRunConfig::random_walk(VmfParams::new(e3(), 12.0).unwrap(), 35.0, 3000, 1000, seed)
    }

    #[test]
    fn rwmh_is_deterministic_and_on_sphere() {
        let a = rwmh_sphere(&rotation_rwmh(5)).unwrap();
        let b = rwmh_sphere(&rotation_rwmh(5)).unwrap();
        assert_eq!(a.chain.len(), 3000);
        assert_eq!(a.acceptance_rate, b.acceptance_rate);
        for (x, y) in a.chain.points().iter().zip(b.chain.points()) {
            assert_eq!(x.to_row(), y.to_row());
            assert!((x.as_sphere().unwrap().coords().norm() - 1.0).abs() <= 1e-10);
        }
        let c = rwmh_sphere(&rotation_rwmh(5).with_stream(1)).unwrap();
        assert_ne!(a.chain.points()[0].to_row(), c.chain.points()[0].to_row());
    }

    #[test]
    fn rwmh_acceptance_near_reported_rate() {
        let rates: Vec<f64> = (0..5).map(|s| rwmh_sphere(&rotation_rwmh(s)).unwrap().acceptance_rate).collect();
        let m = rates.iter().sum::<f64>() / 5.0;
        assert!((m - 0.733).abs() <= 0.05, "{rates:?}");
    }

    #[test]
    fn tiny_steps_are_almost_always_accepted() {
        let cfg = ChainRunConfig::random_walk(VmfParams::new(e3(), 12.0).unwrap(), 1e6, 2000, 100, 6);
        assert!(rwmh_sphere(&cfg).unwrap().acceptance_rate >= 0.99);
    }

    #[test]
    fn proposal_equal_to_target_always_accepts() {
        let mix = MixtureTarget::new(vec![VmfParams::new(e3(), 12.0).unwrap()], vec![1.0]).unwrap();
        let cfg = ChainRunConfig::independence(VmfParams::new(e3(), 12.0).unwrap(), mix, 1000, 10, 7);
        let out = independence_mh(&cfg).unwrap();
        assert!((out.acceptance_rate - 1.0).abs() <= 1e-12);
        let again = independence_mh(&cfg).unwrap();
        assert_eq!(out.chain.points()[999].to_row(), again.chain.points()[999].to_row());
    }

    #[test]
    fn stationarity_smoke() {
        let means: Vec<f64> = (0..20)
            .map(|s| {
                let cfg = ChainRunConfig::random_walk(VmfParams::new(e3(), 12.0).unwrap(), 35.0, 2000, 500, 100 + s);
                let out = rwmh_sphere(&cfg).unwrap();
                out.chain.coordinate_series(2).unwrap().iter().sum::<f64>() / 2000.0
            })
            .collect();
        let m = means.iter().sum::<f64>() / 20.0;
        let sd = (means.iter().map(|v| (v - m).powi(2)).sum::<f64>() / 19.0).sqrt();
        assert!((m - vmf_s2_mean_cosine(12.0)).abs() <= 3.0 * sd / 20f64.sqrt(), "{m} vs {}", vmf_s2_mean_cosine(12.0));
    }

    #[test]
    fn wrong_proposal_kind_is_a_config_error() {
        let mix = MixtureTarget::new(vec![VmfParams::new(e3(), 12.0).unwrap()], vec![1.0]).unwrap();
        let cfg = ChainRunConfig::independence(VmfParams::new(e3(), 12.0).unwrap(), mix, 10, 0, 0);
        assert!(rwmh_sphere(&cfg).is_err());
        assert!(independence_mh(&rotation_rwmh(0)).is_err());
        let mut zero = rotation_rwmh(0);
        zero.n_keep = 0;
        assert!(rwmh_sphere(&zero).is_err());
    }
}
