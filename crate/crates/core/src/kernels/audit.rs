//! Empirical positive-definiteness checks.

use serde::{Deserialize, Serialize};

use super::{gram, AcknowledgeNotPositiveDefinite, KernelSpec};
use crate::error::{Error, Result};
use crate::geometry::{Chain, Point};
use crate::rng::stream_rng;
use crate::samplers::uniform_sphere;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub kernel: KernelSpec,
    pub n: usize,
    pub tol: f64,
    pub min_eigenvalue: f64,
    pub pass: bool,
}

impl AuditReport {
    /// Tolerance used when none is given: `1e-8`, widened to the eigensolver's
    /// roundoff scale `16 n K₀ ε` for large Gram matrices.
    pub fn default_tol(n: usize, k0: f64) -> f64 {
        1e-8f64.max(16.0 * n as f64 * k0 * f64::EPSILON)
    }
}

/// Smallest eigenvalue of the Gram matrix over `points`; passes iff it is at
/// least `-tol`.
pub fn pd_audit(spec: &KernelSpec, points: &[Point], tol: Option<f64>) -> Result<AuditReport> {
    if points.len() < 2 {
        return Err(Error::InvalidInput("a positive-definiteness audit needs at least two points".into()));
    }
    let chain = Chain::new(points.to_vec())?;
    let g = gram(spec, &chain)?;
    let tol = tol.unwrap_or_else(|| AuditReport::default_tol(g.n(), g.k0()));
    let min_eigenvalue = g.min_eigenvalue();
    Ok(AuditReport { kernel: spec.clone(), n: g.n(), tol, min_eigenvalue, pass: min_eigenvalue >= -tol })
}

/// The grid searched for a non-positive-definite geodesic Gaussian Gram on S².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchPlan {
    pub bandwidths: Vec<f64>,
    pub sets: usize,
    pub points_per_set: usize,
    pub seed: u64,
    /// A trial fails when its minimum eigenvalue is below `-threshold`.
    pub threshold: f64,
}

impl Default for SearchPlan {
    fn default() -> Self {
        SearchPlan { bandwidths: vec![0.5, 1.0, 2.0, 4.0], sets: 50, points_per_set: 30, seed: 0, threshold: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchTrial {
    pub h: f64,
    pub set: usize,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PitfallSearch {
    pub plan: SearchPlan,
    pub trials: Vec<SearchTrial>,
    pub failures: usize,
    /// The most negative failing trial, if any.
    pub witness: Option<SearchTrial>,
    /// Points of the witness set, one `[x, y, z]` row each.
    pub witness_points: Option<Vec<Vec<f64>>>,
}

/// Runs the plan: point set `s` is drawn uniformly on S² from stream `s` of
/// `plan.seed`, and every bandwidth is tried on every set.
pub fn geodesic_gauss_search(plan: &SearchPlan) -> Result<PitfallSearch> {
    let sets: Vec<Vec<Point>> = (0..plan.sets)
        .map(|s| {
            let mut rng = stream_rng(plan.seed, s as u64);
            (0..plan.points_per_set).map(|_| Point::Sphere(uniform_sphere(3, &mut rng))).collect()
        })
        .collect();
    let mut trials = Vec::with_capacity(plan.bandwidths.len() * plan.sets);
    for &h in &plan.bandwidths {
        let spec = KernelSpec::geodesic_gauss_unsafe(h, AcknowledgeNotPositiveDefinite)?;
        for (set, pts) in sets.iter().enumerate() {
            let report = pd_audit(&spec, pts, Some(plan.threshold))?;
            trials.push(SearchTrial { h, set, min_eigenvalue: report.min_eigenvalue });
        }
    }
    let failing = trials.iter().filter(|t| t.min_eigenvalue < -plan.threshold);
    let failures = failing.clone().count();
    let witness = failing.min_by(|a, b| a.min_eigenvalue.total_cmp(&b.min_eigenvalue)).cloned();
    let witness_points = witness.as_ref().map(|w| sets[w.set].iter().map(Point::to_row).collect());
    Ok(PitfallSearch { plan: plan.clone(), trials, failures, witness, witness_points })
}
