//! Validated manifold points and the ordered paths built from them.
//!
//! Every constructor checks its manifold's invariants and rejects data that
//! violates them. The only repair performed anywhere is the renormalization
//! of sphere points whose norm is within [`UNIT_NORM_REPAIR_TOL`] of one.

mod maps;
mod rotation;

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use maps::{
    cholesky_embed, cholesky_factor, correlation_from_ecm, projection_distance, projection_embed,
    sphere_geodesic_distance, sym_exp, sym_log, CholeskyVariant,
};
pub use rotation::{haar_rotation, Rotation};

/// Inputs whose norm is within this distance of one are renormalized.
pub const UNIT_NORM_REPAIR_TOL: f64 = 1e-6;
/// Inputs already this close to unit norm are stored bit-for-bit.
const UNIT_NORM_EXACT_TOL: f64 = 1e-12;

const SYMMETRY_TOL: f64 = 1e-8;
const MIN_EIGENVALUE: f64 = 1e-12;
const ORTHONORMAL_TOL: f64 = 1e-10;
const UNIT_DIAGONAL_TOL: f64 = 1e-10;

/// The manifolds a [`Chain`] may live on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Manifold {
    Sphere,
    Spd,
    Grassmann,
    Correlation,
}

impl Manifold {
    pub fn as_str(self) -> &'static str {
        match self {
            Manifold::Sphere => "sphere",
            Manifold::Spd => "spd",
            Manifold::Grassmann => "grassmann",
            Manifold::Correlation => "correlation",
        }
    }
}

impl fmt::Display for Manifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Manifold {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sphere" => Ok(Manifold::Sphere),
            "spd" => Ok(Manifold::Spd),
            "grassmann" => Ok(Manifold::Grassmann),
            "correlation" => Ok(Manifold::Correlation),
            other => Err(Error::InvalidInput(format!("unknown manifold `{other}`"))),
        }
    }
}

/// A point on the unit sphere `S^{d-1}` in `R^d`, `d >= 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct UnitVector {
    coords: DVector<f64>,
}

impl UnitVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        Self::from_dvector(DVector::from_vec(coords))
    }

    pub fn from_dvector(mut coords: DVector<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::point(
                Manifold::Sphere,
                format!("ambient dimension {} < 2", coords.len()),
            ));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::point(Manifold::Sphere, "non-finite coordinate"));
        }
        let norm = coords.norm();
        let gap = (norm - 1.0).abs();
        if gap > UNIT_NORM_REPAIR_TOL {
            return Err(Error::point(Manifold::Sphere, format!("norm {norm} is not 1")));
        }
        if gap > UNIT_NORM_EXACT_TOL {
            coords /= norm;
        }
        Ok(UnitVector { coords })
    }

    /// The `i`-th standard basis vector of `R^d`.
    pub fn basis(d: usize, i: usize) -> Result<Self> {
        if i >= d {
            return Err(Error::InvalidInput(format!("basis index {i} out of range for d = {d}")));
        }
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        Self::new(v)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn as_slice(&self) -> &[f64] {
        self.coords.as_slice()
    }

    pub fn dot(&self, other: &UnitVector) -> f64 {
        self.coords.dot(&other.coords)
    }

    pub fn neg(&self) -> UnitVector {
        UnitVector { coords: -&self.coords }
    }
}

impl TryFrom<Vec<f64>> for UnitVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        UnitVector::new(v)
    }
}

impl From<UnitVector> for Vec<f64> {
    fn from(x: UnitVector) -> Self {
        x.coords.as_slice().to_vec()
    }
}

/// Checks that `a` is square and symmetric, returning the side length.
fn check_symmetric(a: &DMatrix<f64>, manifold: Manifold) -> Result<usize> {
    if !a.is_square() || a.nrows() == 0 {
        return Err(Error::point(manifold, format!("matrix is {}x{}", a.nrows(), a.ncols())));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::point(manifold, "non-finite entry"));
    }
    let asym = (a - a.transpose()).amax();
    if asym > SYMMETRY_TOL {
        return Err(Error::point(manifold, format!("asymmetry {asym:e} exceeds {SYMMETRY_TOL:e}")));
    }
    Ok(a.nrows())
}

fn check_positive_spectrum(a: &DMatrix<f64>, manifold: Manifold) -> Result<()> {
    let min = a.clone().symmetric_eigenvalues().min();
    if !(min > MIN_EIGENVALUE) {
        return Err(Error::point(manifold, format!("eigenvalue {min:e} is not positive")));
    }
    Ok(())
}

/// A symmetric positive-definite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix {
    entries: DMatrix<f64>,
}

impl SpdMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        check_symmetric(&entries, Manifold::Spd)?;
        check_positive_spectrum(&entries, Manifold::Spd)?;
        Ok(SpdMatrix { entries })
    }

    pub fn identity(m: usize) -> Self {
        SpdMatrix { entries: DMatrix::identity(m, m) }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// The matrix logarithm; never fails because the spectrum was validated.
    pub fn log(&self) -> DMatrix<f64> {
        maps::sym_log_unchecked(&self.entries)
    }
}

/// A point of the Grassmannian `Gr(p, m)` stored as an orthonormal `m x p` frame.
///
/// Two frames spanning the same subspace are different values of this type
/// but every kernel in this crate sees them only through `U Uᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrassmannPoint {
    frame: DMatrix<f64>,
}

impl GrassmannPoint {
    pub fn new(frame: DMatrix<f64>) -> Result<Self> {
        let (m, p) = frame.shape();
        if p < 1 || p >= m {
            return Err(Error::point(
                Manifold::Grassmann,
                format!("frame shape {m}x{p} needs 1 <= p < m"),
            ));
        }
        if frame.iter().any(|v| !v.is_finite()) {
            return Err(Error::point(Manifold::Grassmann, "non-finite entry"));
        }
        let gram = frame.transpose() * &frame;
        let err = (gram - DMatrix::<f64>::identity(p, p)).amax();
        if err > ORTHONORMAL_TOL {
            return Err(Error::point(
                Manifold::Grassmann,
                format!("columns are not orthonormal (max |UᵀU - I| = {err:e})"),
            ));
        }
        Ok(GrassmannPoint { frame })
    }

    /// Orthonormalizes the columns of `basis` (full column rank) by QR.
    pub fn from_span(basis: DMatrix<f64>) -> Result<Self> {
        let (m, p) = basis.shape();
        if p < 1 || p >= m {
            return Err(Error::point(
                Manifold::Grassmann,
                format!("basis shape {m}x{p} needs 1 <= p < m"),
            ));
        }
        let qr = basis.qr();
        let r = qr.r();
        let smallest = (0..p).map(|i| r[(i, i)].abs()).fold(f64::INFINITY, f64::min);
        if !(smallest > 1e-12) {
            return Err(Error::point(Manifold::Grassmann, "basis is rank deficient"));
        }
        let q = qr.q();
        Self::new(q.columns(0, p).into_owned())
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.nrows()
    }

    pub fn rank(&self) -> usize {
        self.frame.ncols()
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }
}

/// A full-rank correlation matrix: SPD with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    entries: DMatrix<f64>,
}

impl CorrelationMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let m = check_symmetric(&entries, Manifold::Correlation)?;
        for i in 0..m {
            let d = entries[(i, i)];
            if (d - 1.0).abs() > UNIT_DIAGONAL_TOL {
                return Err(Error::point(
                    Manifold::Correlation,
                    format!("diagonal entry {i} is {d}, not 1"),
                ));
            }
        }
        check_positive_spectrum(&entries, Manifold::Correlation)?;
        Ok(CorrelationMatrix { entries })
    }

    pub fn identity(m: usize) -> Self {
        CorrelationMatrix { entries: DMatrix::identity(m, m) }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }
}

/// A point on one of the supported manifolds.
#[derive(Debug, Clone, PartialEq)]
pub enum Point {
    Sphere(UnitVector),
    Spd(SpdMatrix),
    Grassmann(GrassmannPoint),
    Correlation(CorrelationMatrix),
}

impl Point {
    pub fn manifold(&self) -> Manifold {
        match self {
            Point::Sphere(_) => Manifold::Sphere,
            Point::Spd(_) => Manifold::Spd,
            Point::Grassmann(_) => Manifold::Grassmann,
            Point::Correlation(_) => Manifold::Correlation,
        }
    }

    /// The dimensions recorded in chain file headers: `[d]` for spheres,
    /// `[m]` for SPD and correlation matrices, `[m, p]` for Grassmann frames.
    pub fn dims(&self) -> Vec<usize> {
        match self {
            Point::Sphere(x) => vec![x.dim()],
            Point::Spd(a) => vec![a.dim()],
            Point::Grassmann(u) => vec![u.ambient_dim(), u.rank()],
            Point::Correlation(c) => vec![c.dim()],
        }
    }

    /// Row-major flattening used by the chain file format.
    pub fn to_row(&self) -> Vec<f64> {
        fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
            let (r, c) = m.shape();
            (0..r).flat_map(|i| (0..c).map(move |j| m[(i, j)])).collect()
        }
        match self {
            Point::Sphere(x) => x.as_slice().to_vec(),
            Point::Spd(a) => row_major(a.entries()),
            Point::Grassmann(u) => row_major(u.frame()),
            Point::Correlation(c) => row_major(c.entries()),
        }
    }

    /// Inverse of [`Point::to_row`], validating the result.
    pub fn from_row(manifold: Manifold, dims: &[usize], row: &[f64]) -> Result<Point> {
        let expect = |n: usize| -> Result<()> {
            if row.len() != n {
                return Err(Error::InvalidInput(format!(
                    "row has {} values, expected {n}",
                    row.len()
                )));
            }
            Ok(())
        };
        let square = |m: usize| DMatrix::from_row_slice(m, m, row);
        match (manifold, dims) {
            (Manifold::Sphere, &[d]) => {
                expect(d)?;
                Ok(Point::Sphere(UnitVector::new(row.to_vec())?))
            }
            (Manifold::Spd, &[m]) => {
                expect(m * m)?;
                Ok(Point::Spd(SpdMatrix::new(square(m))?))
            }
            (Manifold::Correlation, &[m]) => {
                expect(m * m)?;
                Ok(Point::Correlation(CorrelationMatrix::new(square(m))?))
            }
            (Manifold::Grassmann, &[m, p]) => {
                expect(m * p)?;
                Ok(Point::Grassmann(GrassmannPoint::new(DMatrix::from_row_slice(m, p, row))?))
            }
            _ => Err(Error::InvalidInput(format!("dims {dims:?} do not fit manifold {manifold}"))),
        }
    }

    pub fn as_sphere(&self) -> Option<&UnitVector> {
        match self {
            Point::Sphere(x) => Some(x),
            _ => None,
        }
    }
}

impl From<UnitVector> for Point {
    fn from(x: UnitVector) -> Self {
        Point::Sphere(x)
    }
}

impl From<SpdMatrix> for Point {
    fn from(a: SpdMatrix) -> Self {
        Point::Spd(a)
    }
}

impl From<GrassmannPoint> for Point {
    fn from(u: GrassmannPoint) -> Self {
        Point::Grassmann(u)
    }
}

impl From<CorrelationMatrix> for Point {
    fn from(c: CorrelationMatrix) -> Self {
        Point::Correlation(c)
    }
}

/// Where a chain came from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ChainMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampler: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
    /// The points are independent draws from the target.
    #[serde(default)]
    pub iid: bool,
}

/// A nonempty, time-ordered path of points sharing one manifold and shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    manifold: Manifold,
    dims: Vec<usize>,
    points: Vec<Point>,
    meta: Option<ChainMeta>,
}

impl Chain {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::InvalidInput("chain must contain at least one point".into()))?;
        let manifold = first.manifold();
        let dims = first.dims();
        for p in &points[1..] {
            if p.manifold() != manifold {
                return Err(Error::InvalidInput(format!(
                    "chain mixes {manifold} and {} points",
                    p.manifold()
                )));
            }
            let d = p.dims();
            if d != dims {
                return Err(Error::DimensionMismatch { expected: dims, got: d });
            }
        }
        Ok(Chain { manifold, dims, points, meta: None })
    }

    pub fn sphere(points: Vec<UnitVector>) -> Result<Self> {
        Self::new(points.into_iter().map(Point::Sphere).collect())
    }

    pub fn with_meta(mut self, meta: ChainMeta) -> Self {
        self.meta = Some(meta);
        self
    }

    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn meta(&self) -> Option<&ChainMeta> {
        self.meta.as_ref()
    }

    pub fn is_iid(&self) -> bool {
        self.meta.as_ref().is_some_and(|m| m.iid)
    }

    /// Sphere points of the chain, or `None` for other manifolds.
    pub fn sphere_points(&self) -> Option<Vec<&UnitVector>> {
        self.points.iter().map(Point::as_sphere).collect()
    }

    /// The same path viewed in a rotated frame, `X_t -> Q X_t`.
    pub fn rotated(&self, q: &Rotation) -> Result<Chain> {
        if self.manifold != Manifold::Sphere {
            return Err(Error::InvalidInput("only sphere chains can be rotated".into()));
        }
        let points = self
            .points
            .iter()
            .map(|p| match p {
                Point::Sphere(x) => q.apply(x).map(Point::Sphere),
                _ => unreachable!("manifold checked above"),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Chain { manifold: self.manifold, dims: self.dims.clone(), points, meta: self.meta.clone() })
    }

    /// The path traversed backwards in time.
    pub fn reversed(&self) -> Chain {
        let mut points = self.points.clone();
        points.reverse();
        Chain { manifold: self.manifold, dims: self.dims.clone(), points, meta: self.meta.clone() }
    }

    /// Time series of one ambient coordinate of a sphere chain.
    pub fn coordinate_series(&self, axis: usize) -> Result<Vec<f64>> {
        let pts = self
            .sphere_points()
            .ok_or_else(|| Error::InvalidInput("coordinate series needs a sphere chain".into()))?;
        if axis >= self.dims[0] {
            return Err(Error::InvalidInput(format!("axis {axis} out of range")));
        }
        Ok(pts.iter().map(|x| x.as_slice()[axis]).collect())
    }
}
