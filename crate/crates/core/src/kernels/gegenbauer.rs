//! Isotropic sphere kernels with geometric Schoenberg coefficients.
//!
//! `ψ(t) = Σ_m ρ^m C_m^λ(t) / C_m^λ(1)` with `λ = (d - 2)/2`. The normalized
//! ratio `R_m = C_m^λ(t) / C_m^λ(1)` satisfies
//!
//! ```text
//! R_0 = 1,  R_1 = t,
//! R_m = (2t(m + λ - 1) R_{m-1} - (m - 1) R_{m-2}) / (m + 2λ - 1),
//! ```
//!
//! which stays in `[-1, 1]` and never forms the large `C_m^λ(1)`.

use crate::error::{Error, Result};

/// Truncation target used when a sphere kernel has no closed form.
pub const DEFAULT_TRUNCATION_ERROR: f64 = 1e-12;

/// `(1 - 2ρt + ρ²)^{-1/2}`: the Legendre generating function on S².
#[inline]
pub fn poisson_s2(rho: f64, t: f64) -> f64 {
    1.0 / (1.0 - 2.0 * rho * t + rho * rho).sqrt()
}

/// Smallest `M` with `ρ^{M+1} / (1 - ρ) <= DEFAULT_TRUNCATION_ERROR`.
pub fn default_truncation(rho: f64) -> usize {
    let mut m = 0usize;
    let mut tail = rho / (1.0 - rho);
    while tail > DEFAULT_TRUNCATION_ERROR {
        tail *= rho;
        m += 1;
    }
    m
}

/// Bound on `|ψ(t) - ψ_M(t)|` for the partial sum through degree `M`.
pub fn truncation_bound(rho: f64, m: usize) -> f64 {
    rho.powi(m as i32 + 1) / (1.0 - rho)
}

/// Partial sum of the `ρ`-family through degree `truncation` on `S^{d-1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GegenbauerSeries {
    lambda: f64,
    rho: f64,
    truncation: usize,
}

impl GegenbauerSeries {
    pub fn new(d: usize, rho: f64, truncation: usize) -> Result<Self> {
        if d < 3 {
            return Err(Error::InvalidKernel(format!(
                "Gegenbauer sphere kernels need ambient dimension d >= 3, got {d}"
            )));
        }
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::InvalidKernel(format!("rho = {rho} is outside (0, 1)")));
        }
        if truncation < 1 {
            return Err(Error::InvalidKernel("truncation must be at least 1".into()));
        }
        Ok(GegenbauerSeries { lambda: (d as f64 - 2.0) / 2.0, rho, truncation })
    }

    /// `ψ_M(1) = (1 - ρ^{M+1}) / (1 - ρ)`, the kernel's diagonal value.
    pub fn diagonal(&self) -> f64 {
        (1.0 - self.rho.powi(self.truncation as i32 + 1)) / (1.0 - self.rho)
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.clamp(-1.0, 1.0);
        if self.truncation == 0 {
            return 1.0;
        }
        let lambda = self.lambda;
        let mut prev = 1.0;
        let mut cur = t;
        let mut weight = self.rho;
        let mut sum = 1.0 + weight * cur;
        for m in 2..=self.truncation {
            let mf = m as f64;
            let next = (2.0 * t * (mf + lambda - 1.0) * cur - (mf - 1.0) * prev) / (mf + 2.0 * lambda - 1.0);
            prev = cur;
            cur = next;
            weight *= self.rho;
            sum += weight * cur;
        }
        sum
    }
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Debug, Clone, Copy)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    fn from_sum(a: f64, b: f64) -> Self {
        let hi = a + b;
        let bb = hi - a;
        DoubleDouble { hi, lo: (a - (hi - bb)) + (b - bb) }
    }

    fn from_product(a: f64, b: f64) -> Self {
        let hi = a * b;
        DoubleDouble { hi, lo: a.mul_add(b, -hi) }
    }

    fn renormalized(hi: f64, lo: f64) -> Self {
        let s = hi + lo;
        DoubleDouble { hi: s, lo: lo - (s - hi) }
    }

    fn add(self, o: Self) -> Self {
        let s = Self::from_sum(self.hi, o.hi);
        let t = Self::from_sum(self.lo, o.lo);
        let u = Self::renormalized(s.hi, s.lo + t.hi);
        Self::renormalized(u.hi, u.lo + t.lo)
    }

    fn mul(self, o: Self) -> Self {
        let p = Self::from_product(self.hi, o.hi);
        Self::renormalized(p.hi, p.lo + (self.hi * o.lo + self.lo * o.hi))
    }

    fn scale(self, a: f64) -> Self {
        let p = Self::from_product(self.hi, a);
        Self::renormalized(p.hi, p.lo + self.lo * a)
    }

    fn div_f64(self, a: f64) -> Self {
        let q1 = self.hi / a;
        let r = self.add(Self::from_product(q1, a).scale(-1.0));
        let q2 = r.hi / a;
        let r = r.add(Self::from_product(q2, a).scale(-1.0));
        Self::renormalized(q1, q2).add(DoubleDouble { hi: r.hi / a, lo: 0.0 })
    }
}

impl GegenbauerSeries {
    /// [`eval`](Self::eval) carried out in double-double arithmetic and
    /// rounded once, so the result is the partial sum rounded to nearest.
    pub fn eval_rounded(&self, t: f64) -> f64 {
        let t = t.clamp(-1.0, 1.0);
        let one = DoubleDouble { hi: 1.0, lo: 0.0 };
        if self.truncation == 0 {
            return 1.0;
        }
        let lambda = self.lambda;
        let mut prev = one;
        let mut cur = DoubleDouble { hi: t, lo: 0.0 };
        let mut weight = DoubleDouble { hi: self.rho, lo: 0.0 };
        let mut sum = one.add(weight.mul(cur));
        for m in 2..=self.truncation {
            let mf = m as f64;
            let a = DoubleDouble::from_product(2.0 * t, mf + lambda - 1.0);
            let next = a.mul(cur).add(prev.scale(-(mf - 1.0))).div_f64(mf + 2.0 * lambda - 1.0);
            prev = cur;
            cur = next;
            weight = weight.scale(self.rho);
            sum = sum.add(weight.mul(cur));
        }
        sum.hi + sum.lo
    }
}

/// Evaluates `Σ_{m=0}^{M} ρ^m C_m^λ(t)/C_m^λ(1)` on `S^{d-1}`, rounded to
/// nearest.
///
/// Gram assembly uses the plain floating-point recurrence; this pointwise
/// form is accurate enough to resolve truncation errors far below one ulp.
pub fn gegenbauer_kernel_eval(d: usize, rho: f64, truncation: usize, t: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&t) {
        return Err(Error::InvalidInput(format!("t = {t} is outside [-1, 1]")));
    }
    Ok(GegenbauerSeries::new(d, rho, truncation)?.eval_rounded(t))
}
