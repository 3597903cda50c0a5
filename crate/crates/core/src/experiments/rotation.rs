use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::RotationConfig;
use super::summary::{LongRow, SummaryRow};
use crate::error::Result;
use crate::estimator::{kernel_ess, scalar_ess, EssReport, WindowSpec};
use crate::geometry::{haar_rotation, Chain, UnitVector};
use crate::kernels::KernelSpec;
use crate::rng::{stream_rng, STREAM_ROTATIONS};
use crate::samplers::{rwmh_sphere, ChainRunConfig, VmfParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationRow {
    pub rotation: usize,
    /// Scalar ESS of the three rotated coordinate series; `None` if unstable.
    pub coordinate_ess: [Option<f64>; 3],
    pub kernel: EssReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationReport {
    pub config: RotationConfig,
    pub acceptance_rate: f64,
    pub unrotated: EssReport,
    pub unrotated_coordinate_ess: [Option<f64>; 3],
    pub rows: Vec<RotationRow>,
    /// `max_r |ESS_r - ESS_unrotated|`
    pub max_abs_kernel_deviation: f64,
    pub summary: Vec<SummaryRow>,
}

fn coordinate_ess(chain: &Chain, w: &WindowSpec) -> Result<[Option<f64>; 3]> {
    let mut out = [None; 3];
    for (axis, slot) in out.iter_mut().enumerate() {
        *slot = scalar_ess(&chain.coordinate_series(axis)?, w)?.ess;
    }
    Ok(out)
}

/// Runs the path, then recomputes every ESS in each rotated frame.
pub fn run_rotation(cfg: &RotationConfig) -> Result<RotationReport> {
    let target = VmfParams::new(UnitVector::basis(3, 2)?, cfg.kappa_target)?;
    let run = rwmh_sphere(&ChainRunConfig::random_walk(target, cfg.kappa_prop, cfg.n_keep, cfg.burn_in, cfg.master_seed))?;
    let chain = run.chain;
    let spec = KernelSpec::sphere_poisson(cfg.rho)?;
    let w = WindowSpec::bartlett_auto();
    let w = WindowSpec { bandwidth: cfg.bandwidth, ..w };
    let unrotated = kernel_ess(&chain, &spec, &w)?;
    let unrotated_coordinate_ess = coordinate_ess(&chain, &w)?;

    let mut rng = stream_rng(cfg.master_seed, STREAM_ROTATIONS);
    let qs: Vec<_> = (0..cfg.rotations).map(|_| haar_rotation(3, &mut rng)).collect();
    let rows = qs
        .par_iter()
        .enumerate()
        .map(|(r, q)| {
            let rotated = chain.rotated(q)?;
            Ok(RotationRow { rotation: r, coordinate_ess: coordinate_ess(&rotated, &w)?, kernel: kernel_ess(&rotated, &spec, &w)? })
        })
        .collect::<Result<Vec<_>>>()?;

    let max_abs_kernel_deviation = rows
        .iter()
        .map(|r| match (r.kernel.ess, unrotated.ess) {
            (Some(a), Some(b)) => (a - b).abs(),
            _ => f64::NAN,
        })
        .fold(0.0, f64::max);
    let summary = rotation_summary(&rows);
    Ok(RotationReport {
        config: cfg.clone(),
        acceptance_rate: run.acceptance_rate,
        unrotated,
        unrotated_coordinate_ess,
        rows,
        max_abs_kernel_deviation,
        summary,
    })
}

const AXIS_LABELS: [&str; 3] = ["coordinate_ess_axis1", "coordinate_ess_axis2", "coordinate_ess_axis3"];

fn rotation_summary(rows: &[RotationRow]) -> Vec<SummaryRow> {
    let coord = |a: usize| rows.iter().filter_map(move |r| r.coordinate_ess[a]);
    let mut out = Vec::new();
    out.extend(SummaryRow::of("coordinate_ess_pooled", (0..3).flat_map(coord)));
    for (a, label) in AXIS_LABELS.iter().enumerate() {
        out.extend(SummaryRow::of(*label, coord(a)));
    }
    out.extend(SummaryRow::of("kernel_ess", rows.iter().filter_map(|r| r.kernel.ess)));
    out
}

impl RotationReport {
    pub fn long_rows(&self) -> Vec<LongRow> {
        let mut out = Vec::new();
        for r in &self.rows {
            for (a, label) in AXIS_LABELS.iter().enumerate() {
                if let Some(v) = r.coordinate_ess[a] {
                    out.push(LongRow { replication: r.rotation, quantity: label.to_string(), value: v });
                }
            }
            if let Some(v) = r.kernel.ess {
                out.push(LongRow { replication: r.rotation, quantity: "kernel_ess".into(), value: v });
            }
        }
        out
    }
}
