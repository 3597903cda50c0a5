use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::{default_truncation, poisson_s2, GegenbauerSeries, KernelSpec};
use crate::error::{Error, Result};
use crate::geometry::{cholesky_embed, projection_embed, Chain, Point};

/// Points mapped into the coordinates a kernel is evaluated in, stored
/// row-major.
#[derive(Debug, Clone)]
pub(crate) struct Features {
    dim: usize,
    data: Vec<f64>,
}

impl Features {
    pub(crate) fn from_rows(dim: usize, rows: impl IntoIterator<Item = Vec<f64>>) -> Self {
        let mut data = Vec::new();
        for r in rows {
            debug_assert_eq!(r.len(), dim);
            data.extend_from_slice(&r);
        }
        Features { dim, data }
    }

    pub(crate) fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.data.len() / self.dim
        }
    }

    #[inline]
    pub(crate) fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

/// A kernel reduced to a function of embedded coordinates.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Prepared {
    Poisson { rho: f64 },
    Series(GegenbauerSeries),
    Linear,
    /// `exp(-beta ‖a - b‖²)`
    Gauss { beta: f64 },
    Geodesic { inv_h2: f64 },
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl Prepared {
    pub(crate) fn new(spec: &KernelSpec, dims: &[usize]) -> Result<Self> {
        Ok(match *spec {
            KernelSpec::SpherePoisson { rho } if dims[0] == 3 => Prepared::Poisson { rho },
            KernelSpec::SpherePoisson { rho } => {
                Prepared::Series(GegenbauerSeries::new(dims[0], rho, default_truncation(rho))?)
            }
            KernelSpec::SphereGegenbauer { rho, truncation } => {
                Prepared::Series(GegenbauerSeries::new(dims[0], rho, truncation)?)
            }
            KernelSpec::SphereLinear => Prepared::Linear,
            KernelSpec::SphereGeodesicGaussUnsafe { h, .. } => Prepared::Geodesic { inv_h2: 1.0 / (h * h) },
            // d_pr² = ‖UUᵀ - VVᵀ‖_F² / 2
            KernelSpec::GrassmannProjectionGauss { beta } => Prepared::Gauss { beta: beta / 2.0 },
            KernelSpec::SpdLogEuclideanGauss { beta } | KernelSpec::CorrelationCholeskyGauss { beta, .. } => {
                Prepared::Gauss { beta }
            }
        })
    }

    #[inline]
    pub(crate) fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Prepared::Poisson { rho } => poisson_s2(rho, dot(a, b).clamp(-1.0, 1.0)),
            Prepared::Series(s) => s.eval(dot(a, b)),
            Prepared::Linear => dot(a, b),
            Prepared::Gauss { beta } => (-beta * sq_dist(a, b)).exp(),
            Prepared::Geodesic { inv_h2 } => {
                let d = dot(a, b).clamp(-1.0, 1.0).acos();
                (-d * d * inv_h2).exp()
            }
        }
    }

    /// `out[i] = k(x, ys[range.start + i])`. Bit-identical to calling
    /// [`Prepared::eval`] entry by entry.
    pub(crate) fn fill(&self, x: &[f64], ys: &Features, range: Range<usize>, out: &mut [f64]) {
        debug_assert_eq!(out.len(), range.len());
        match *self {
            Prepared::Poisson { rho } if ys.dim == 3 => {
                let (x0, x1, x2) = (x[0], x[1], x[2]);
                let rows = &ys.data[range.start * 3..range.end * 3];
                for (o, y) in out.iter_mut().zip(rows.chunks_exact(3)) {
                    let t = (x0 * y[0] + x1 * y[1] + x2 * y[2]).clamp(-1.0, 1.0);
                    *o = poisson_s2(rho, t);
                }
            }
            _ => {
                for (o, j) in out.iter_mut().zip(range) {
                    *o = self.eval(x, ys.row(j));
                }
            }
        }
    }

    /// Row sums `Σ_t k(X_s, X_t)`, each accumulated in index order.
    pub(crate) fn row_sums(&self, feats: &Features) -> Vec<f64> {
        let n = feats.len();
        (0..n)
            .into_par_iter()
            .map_init(
                || vec![0.0; n],
                |buf, s| {
                    self.fill(feats.row(s), feats, 0..n, buf);
                    buf.iter().sum()
                },
            )
            .collect()
    }
}

/// Maps one point into the kernel's evaluation coordinates.
pub(crate) fn embed_point(spec: &KernelSpec, p: &Point) -> Result<Vec<f64>> {
    let row_major = |m: &DMatrix<f64>| -> Vec<f64> {
        let (r, c) = m.shape();
        (0..r).flat_map(|i| (0..c).map(move |j| m[(i, j)])).collect()
    };
    Ok(match (spec, p) {
        (_, Point::Sphere(x)) => x.as_slice().to_vec(),
        (_, Point::Spd(a)) => row_major(&a.log()),
        (_, Point::Grassmann(u)) => row_major(&projection_embed(u)),
        (KernelSpec::CorrelationCholeskyGauss { variant, .. }, Point::Correlation(c)) => {
            cholesky_embed(c, *variant)?.as_slice().to_vec()
        }
        (_, Point::Correlation(_)) => unreachable!("domain checked by caller"),
    })
}

/// Validates `spec` against `chain` and embeds every point.
pub(crate) fn embed_chain(spec: &KernelSpec, chain: &Chain) -> Result<(Prepared, Features)> {
    spec.validate()?;
    spec.check_domain(chain.manifold(), chain.dims())?;
    let prepared = Prepared::new(spec, chain.dims())?;
    let rows = chain
        .points()
        .par_iter()
        .map(|p| embed_point(spec, p))
        .collect::<Result<Vec<_>>>()?;
    let dim = rows[0].len();
    Ok((prepared, Features::from_rows(dim, rows)))
}

/// The `n x n` matrix `K_st = k(X_s, X_t)` of a chain.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    values: DMatrix<f64>,
    /// `None` when built from explicit Euclidean coordinates.
    kernel: Option<KernelSpec>,
    k0: f64,
}

impl GramMatrix {
    /// Fills the upper triangle (rows in parallel) and mirrors it, so the
    /// result is exactly symmetric whatever the schedule.
    pub(crate) fn assemble(prepared: &Prepared, feats: &Features, kernel: Option<KernelSpec>, k0: f64) -> Self {
        let n = feats.len();
        let mut data = vec![0.0; n * n];
        data.par_chunks_mut(n.max(1)).enumerate().for_each(|(s, row)| {
            prepared.fill(feats.row(s), feats, s..n, &mut row[s..]);
        });
        for s in 0..n {
            for t in 0..s {
                data[s * n + t] = data[t * n + s];
            }
        }
        // Row-major and column-major coincide for a symmetric matrix.
        GramMatrix { values: DMatrix::from_vec(n, n, data), kernel, k0 }
    }

    /// Wraps a user-supplied symmetric matrix.
    pub fn from_matrix(values: DMatrix<f64>, k0: f64) -> Result<Self> {
        if !values.is_square() || values.nrows() == 0 {
            return Err(Error::InvalidInput("Gram matrix must be square and nonempty".into()));
        }
        let asym = (&values - values.transpose()).amax();
        if asym > 1e-10 {
            return Err(Error::InvalidInput(format!("Gram matrix asymmetry {asym:e}")));
        }
        Ok(GramMatrix { values, kernel: None, k0 })
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn kernel(&self) -> Option<&KernelSpec> {
        self.kernel.as_ref()
    }

    /// `K₀ = sup k(x, x)` for the kernel that produced the matrix.
    pub fn k0(&self) -> f64 {
        self.k0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.values.clone().symmetric_eigenvalues().min()
    }
}

/// Gram matrix of `chain` under `spec`.
pub fn gram(spec: &KernelSpec, chain: &Chain) -> Result<GramMatrix> {
    let (prepared, feats) = embed_chain(spec, chain)?;
    Ok(GramMatrix::assemble(&prepared, &feats, Some(spec.clone()), spec.diag_bound(chain.dims())))
}

/// Gram matrix of the Gaussian `exp(-β‖a - b‖²)` on explicit Euclidean points.
pub fn gram_euclidean_gauss(points: &[DVector<f64>], beta: f64) -> Result<GramMatrix> {
    if !(beta > 0.0) {
        return Err(Error::InvalidKernel(format!("beta = {beta} must be positive")));
    }
    let dim = points.first().map(|p| p.len()).ok_or_else(|| Error::InvalidInput("no points".into()))?;
    if let Some(p) = points.iter().find(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch { expected: vec![dim], got: vec![p.len()] });
    }
    let feats = Features::from_rows(dim, points.iter().map(|p| p.as_slice().to_vec()));
    Ok(GramMatrix::assemble(&Prepared::Gauss { beta }, &feats, None, 1.0))
}
