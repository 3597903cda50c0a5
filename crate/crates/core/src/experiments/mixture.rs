use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::MixtureConfig;
use super::summary::{LongRow, SummaryRow};
use crate::error::{Error, Result};
use crate::estimator::{kernel_ess, WindowSpec};
use crate::kernels::KernelSpec;
use crate::mmd::{mode_tv_error, nearest_mode_frequencies, ReferenceSample};
use crate::rng::{stream_rng, STREAM_REFERENCE};
use crate::samplers::{
    independence_mh, iid_chain, rwmh_sphere, tetrahedron_modes, ChainRunConfig, MixtureTarget, Target, VmfParams,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixtureSampler {
    Local,
    Independence,
}

impl MixtureSampler {
    pub fn name(self) -> &'static str {
        match self {
            MixtureSampler::Local => "local",
            MixtureSampler::Independence => "independence",
        }
    }
}

/// Kernel quantities of one chain at one `ρ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoRow {
    pub rho: f64,
    pub ess: Option<f64>,
    pub gamma0: f64,
    pub sigma2: f64,
    /// `n (MMD² - γ̂_0^ref / m)`
    pub d_hat: f64,
    /// `D̂ / σ̂²`, when `σ̂² > 0`.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureRow {
    pub replication: usize,
    pub sampler: MixtureSampler,
    pub acceptance_rate: f64,
    pub tv_error: f64,
    pub per_rho: Vec<RhoRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSummary {
    pub m: usize,
    pub nearest_mode_frequencies: Vec<f64>,
    /// `γ̂_0^ref` for each `ρ`, in config order.
    pub gamma0: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureReport {
    pub config: MixtureConfig,
    pub reference: ReferenceSummary,
    pub rows: Vec<MixtureRow>,
    pub summary: Vec<SummaryRow>,
}

pub fn mixture_target(cfg: &MixtureConfig) -> Result<MixtureTarget> {
    let comps = tetrahedron_modes()
        .into_iter()
        .map(|m| VmfParams::new(m, cfg.kappa))
        .collect::<Result<Vec<_>>>()?;
    MixtureTarget::new(comps, cfg.weights.clone()).map_err(|e| Error::Config(e.to_string()))
}

/// Stream of replication `r` for a sampler; the reference uses its own
/// reserved stream.
fn chain_stream(r: usize, s: MixtureSampler) -> u64 {
    2 * r as u64 + matches!(s, MixtureSampler::Independence) as u64
}

pub fn run_mixture(cfg: &MixtureConfig) -> Result<MixtureReport> {
    let target = mixture_target(cfg)?;
    let modes = tetrahedron_modes();
    let proposal = MixtureTarget::equal_weights(&modes, cfg.kappa_ind)?;
    let target_t: Target = target.clone().into();
    let reference = iid_chain(&target_t, cfg.m_ref, &mut stream_rng(cfg.master_seed, STREAM_REFERENCE))?;
    let ref_freqs = nearest_mode_frequencies(&reference, &modes)?;
    let specs = cfg.rhos.iter().map(|&r| KernelSpec::sphere_poisson(r)).collect::<Result<Vec<_>>>()?;
    let refs = specs.iter().map(|s| ReferenceSample::new(s, &reference)).collect::<Result<Vec<_>>>()?;
    let w = WindowSpec { bandwidth: cfg.bandwidth, ..WindowSpec::bartlett_auto() };

    let jobs: Vec<(usize, MixtureSampler)> = (0..cfg.replications)
        .flat_map(|r| [(r, MixtureSampler::Independence), (r, MixtureSampler::Local)])
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(r, sampler)| {
            let run = match sampler {
                MixtureSampler::Local => {
                    let c = ChainRunConfig::random_walk(target.clone(), cfg.kappa_loc, cfg.n_keep, cfg.burn_in, cfg.master_seed);
                    rwmh_sphere(&c.with_stream(chain_stream(r, sampler)))?
                }
                MixtureSampler::Independence => {
                    let c = ChainRunConfig::independence(target.clone(), proposal.clone(), cfg.n_keep, cfg.burn_in, cfg.master_seed);
                    independence_mh(&c.with_stream(chain_stream(r, sampler)))?
                }
            };
            let per_rho = specs
                .iter()
                .zip(&refs)
                .zip(&cfg.rhos)
                .map(|((spec, reference), &rho)| {
                    let e = kernel_ess(&run.chain, spec, &w)?;
                    let d_hat = reference.corrected(&run.chain)?;
                    let ratio = (e.sigma2 > 0.0).then(|| d_hat / e.sigma2);
                    Ok(RhoRow { rho, ess: e.ess, gamma0: e.gamma0, sigma2: e.sigma2, d_hat, ratio })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(MixtureRow {
                replication: r,
                sampler,
                acceptance_rate: run.acceptance_rate,
                tv_error: mode_tv_error(&run.chain, &modes, &ref_freqs)?,
                per_rho,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let summary = mixture_summary(cfg, &rows);
    Ok(MixtureReport {
        config: cfg.clone(),
        reference: ReferenceSummary {
            m: cfg.m_ref,
            nearest_mode_frequencies: ref_freqs,
            gamma0: refs.iter().map(ReferenceSample::gamma0).collect(),
        },
        rows,
        summary,
    })
}

fn rho_label(rho: f64) -> String {
    format!("rho={rho:.2}")
}

fn mixture_summary(cfg: &MixtureConfig, rows: &[MixtureRow]) -> Vec<SummaryRow> {
    let mut out = Vec::new();
    for sampler in [MixtureSampler::Independence, MixtureSampler::Local] {
        let mine: Vec<&MixtureRow> = rows.iter().filter(|r| r.sampler == sampler).collect();
        for (i, &rho) in cfg.rhos.iter().enumerate() {
            let col = |f: fn(&RhoRow) -> Option<f64>| mine.iter().filter_map(move |r| f(&r.per_rho[i])).collect::<Vec<_>>();
            let base = format!("{}/{}", sampler.name(), rho_label(rho));
            out.extend(SummaryRow::of(format!("{base}/ess"), col(|x| x.ess)));
            out.extend(SummaryRow::of(format!("{base}/sigma2"), col(|x| Some(x.sigma2))));
            out.extend(SummaryRow::of(format!("{base}/d_hat"), col(|x| Some(x.d_hat))));
            out.extend(SummaryRow::of(format!("{base}/ratio"), col(|x| x.ratio)));
        }
        out.extend(SummaryRow::of(format!("{}/tv_error", sampler.name()), mine.iter().map(|r| r.tv_error)));
        out.extend(SummaryRow::of(format!("{}/acceptance", sampler.name()), mine.iter().map(|r| r.acceptance_rate)));
    }
    out
}

impl MixtureReport {
    /// Mean of a summary quantity such as `independence/rho=0.60/ess`.
    pub fn mean_of(&self, quantity: &str) -> Option<f64> {
        self.summary.iter().find(|s| s.quantity == quantity).map(|s| s.mean)
    }

    pub fn long_rows(&self) -> Vec<LongRow> {
        let mut out = Vec::new();
        for row in &self.rows {
            let s = row.sampler.name();
            let mut push = |q: String, v: Option<f64>| {
                if let Some(value) = v {
                    out.push(LongRow { replication: row.replication, quantity: q, value });
                }
            };
            push(format!("{s}/acceptance"), Some(row.acceptance_rate));
            push(format!("{s}/tv_error"), Some(row.tv_error));
            for x in &row.per_rho {
                let base = format!("{s}/{}", rho_label(x.rho));
                push(format!("{base}/ess"), x.ess);
                push(format!("{base}/sigma2"), Some(x.sigma2));
                push(format!("{base}/d_hat"), Some(x.d_hat));
                push(format!("{base}/ratio"), x.ratio);
            }
        }
        out
    }
}
