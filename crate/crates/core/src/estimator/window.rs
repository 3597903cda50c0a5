use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lag-window shapes `w(u)` for `u = ℓ / (b + 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LagWindow {
    /// `w(u) = 1 - u` on `[0, 1]`.
    Bartlett,
    /// `w(u) = 1` on `[0, 1]`.
    Truncated,
    /// Explicit weights for lags `1..=len`; the bandwidth is the table length.
    Custom(Vec<f64>),
}

impl LagWindow {
    pub fn name(&self) -> &'static str {
        match self {
            LagWindow::Bartlett => "bartlett",
            LagWindow::Truncated => "truncated",
            LagWindow::Custom(_) => "custom",
        }
    }
}

/// Lag truncation point: a fixed `b` or `auto = ⌊n^{1/3}⌋`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BandwidthRepr", into = "BandwidthRepr")]
pub enum Bandwidth {
    Auto,
    Fixed(usize),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BandwidthRepr {
    Fixed(usize),
    Named(String),
}

impl TryFrom<BandwidthRepr> for Bandwidth {
    type Error = Error;

    fn try_from(r: BandwidthRepr) -> Result<Self> {
        match r {
            BandwidthRepr::Fixed(b) => Ok(Bandwidth::Fixed(b)),
            BandwidthRepr::Named(s) => s.parse(),
        }
    }
}

impl From<Bandwidth> for BandwidthRepr {
    fn from(b: Bandwidth) -> Self {
        match b {
            Bandwidth::Auto => BandwidthRepr::Named("auto".into()),
            Bandwidth::Fixed(b) => BandwidthRepr::Fixed(b),
        }
    }
}

impl FromStr for Bandwidth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(Bandwidth::Auto);
        }
        s.parse::<usize>()
            .map(Bandwidth::Fixed)
            .map_err(|_| Error::InvalidWindow(format!("bandwidth `{s}` is neither `auto` nor an integer")))
    }
}

impl fmt::Display for Bandwidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bandwidth::Auto => f.write_str("auto"),
            Bandwidth::Fixed(b) => write!(f, "{b}"),
        }
    }
}

/// `⌊n^{1/3}⌋`, computed exactly in integers.
pub fn auto_bandwidth(n: usize) -> usize {
    let mut b = (n as f64).cbrt() as usize;
    while (b + 1).pow(3) <= n {
        b += 1;
    }
    while b > 0 && b.pow(3) > n {
        b -= 1;
    }
    b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub window: LagWindow,
    pub bandwidth: Bandwidth,
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self::bartlett_auto()
    }
}

impl WindowSpec {
    pub fn bartlett_auto() -> Self {
        WindowSpec { window: LagWindow::Bartlett, bandwidth: Bandwidth::Auto }
    }

    pub fn bartlett(b: usize) -> Self {
        WindowSpec { window: LagWindow::Bartlett, bandwidth: Bandwidth::Fixed(b) }
    }

    pub fn truncated(b: usize) -> Self {
        WindowSpec { window: LagWindow::Truncated, bandwidth: Bandwidth::Fixed(b) }
    }

    pub fn custom(weights: Vec<f64>) -> Self {
        let b = weights.len();
        WindowSpec { window: LagWindow::Custom(weights), bandwidth: Bandwidth::Fixed(b) }
    }

    /// The bandwidth used for a series of length `n`; must satisfy `1 <= b < n`.
    pub fn resolve(&self, n: usize) -> Result<usize> {
        let b = match (&self.window, self.bandwidth) {
            (LagWindow::Custom(w), Bandwidth::Auto) => w.len(),
            (LagWindow::Custom(w), Bandwidth::Fixed(b)) if b != w.len() => {
                return Err(Error::InvalidWindow(format!(
                    "custom table has {} weights but bandwidth is {b}",
                    w.len()
                )));
            }
            (_, Bandwidth::Auto) => auto_bandwidth(n),
            (_, Bandwidth::Fixed(b)) => b,
        };
        if let LagWindow::Custom(w) = &self.window {
            if w.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidWindow("custom weights must be finite".into()));
            }
        }
        if b == 0 {
            return Err(Error::InvalidWindow("bandwidth must be positive".into()));
        }
        if b >= n {
            return Err(Error::InvalidWindow(format!("bandwidth {b} must be below n = {n}")));
        }
        Ok(b)
    }

    /// `w(ℓ / (b + 1))` for `1 <= ℓ <= b`.
    pub fn weight(&self, lag: usize, b: usize) -> f64 {
        match &self.window {
            LagWindow::Bartlett => 1.0 - lag as f64 / (b as f64 + 1.0),
            LagWindow::Truncated => 1.0,
            LagWindow::Custom(w) => w[lag - 1],
        }
    }
}
