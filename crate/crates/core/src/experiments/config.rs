use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::Bandwidth;

/// One fixed random-walk path on S², re-expressed in many rotated frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RotationConfig {
    pub master_seed: u64,
    pub n_keep: usize,
    pub burn_in: usize,
    /// Target is vMF(e₃, kappa_target).
    pub kappa_target: f64,
    /// Random-walk proposal vMF(x, kappa_prop).
    pub kappa_prop: f64,
    pub rotations: usize,
    pub rho: f64,
    pub bandwidth: Bandwidth,
}

impl Default for RotationConfig {
    fn default() -> Self {
        RotationConfig {
            master_seed: 0,
            n_keep: 3000,
            burn_in: 1000,
            kappa_target: 12.0,
            kappa_prop: 35.0,
            rotations: 80,
            rho: 0.75,
            bandwidth: Bandwidth::Auto,
        }
    }
}

/// Local and independence chains on a four-mode vMF mixture, calibrated
/// against an iid reference sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MixtureConfig {
    pub master_seed: u64,
    pub n_keep: usize,
    pub burn_in: usize,
    pub replications: usize,
    pub m_ref: usize,
    /// Common concentration of the target components.
    pub kappa: f64,
    /// Weights of the components centered on the tetrahedron vertices.
    pub weights: Vec<f64>,
    /// Local random-walk proposal vMF(x, kappa_loc).
    pub kappa_loc: f64,
    /// Concentration of the equal-weight independence proposal components.
    pub kappa_ind: f64,
    pub rhos: Vec<f64>,
    pub bandwidth: Bandwidth,
}

impl Default for MixtureConfig {
    fn default() -> Self {
        MixtureConfig {
            master_seed: 0,
            n_keep: 2500,
            burn_in: 1000,
            replications: 20,
            m_ref: 8000,
            kappa: 28.0,
            weights: vec![0.4, 0.3, 0.2, 0.1],
            kappa_loc: 90.0,
            kappa_ind: 12.0,
            rhos: vec![0.35, 0.60, 0.85],
            bandwidth: Bandwidth::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "snake_case")]
pub enum ExperimentConfig {
    Rotation(RotationConfig),
    Mixture(MixtureConfig),
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Config(format!("rho = {rho} must lie in (0, 1)")));
    }
    Ok(())
}

fn check_kappa(name: &str, k: f64) -> Result<()> {
    if !(k >= 0.0 && k.is_finite()) {
        return Err(Error::Config(format!("{name} = {k} must be finite and nonnegative")));
    }
    Ok(())
}

impl ExperimentConfig {
    /// The preset named `rotation` or `mixture`.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "rotation" => Ok(ExperimentConfig::Rotation(RotationConfig::default())),
            "mixture" => Ok(ExperimentConfig::Mixture(MixtureConfig::default())),
            other => Err(Error::Config(format!("unknown preset `{other}`"))),
        }
    }

    /// Parses a JSON config. Fields left out take the preset values.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentConfig::Rotation(_) => "rotation",
            ExperimentConfig::Mixture(_) => "mixture",
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        match self {
            ExperimentConfig::Rotation(c) => c.master_seed = seed,
            ExperimentConfig::Mixture(c) => c.master_seed = seed,
        }
    }

    pub fn set_replications(&mut self, reps: usize) -> Result<()> {
        match self {
            ExperimentConfig::Rotation(_) => {
                Err(Error::Config("the rotation experiment has one path; use rotations instead".into()))
            }
            ExperimentConfig::Mixture(c) => {
                c.replications = reps;
                Ok(())
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ExperimentConfig::Rotation(c) => {
                if c.n_keep < 4 {
                    return Err(Error::Config("n_keep must be at least 4".into()));
                }
                if c.rotations == 0 {
                    return Err(Error::Config("rotations must be positive".into()));
                }
                check_kappa("kappa_target", c.kappa_target)?;
                check_kappa("kappa_prop", c.kappa_prop)?;
                check_rho(c.rho)
            }
            ExperimentConfig::Mixture(c) => {
                if c.n_keep < 4 {
                    return Err(Error::Config("n_keep must be at least 4".into()));
                }
                if c.replications == 0 {
                    return Err(Error::Config("replications must be positive".into()));
                }
                if c.m_ref < 2 {
                    return Err(Error::Config("m_ref must be at least 2".into()));
                }
                if c.weights.len() != 4 {
                    return Err(Error::Config(format!("{} weights given for 4 modes", c.weights.len())));
                }
                if c.rhos.is_empty() {
                    return Err(Error::Config("rhos must not be empty".into()));
                }
                check_kappa("kappa", c.kappa)?;
                check_kappa("kappa_loc", c.kappa_loc)?;
                check_kappa("kappa_ind", c.kappa_ind)?;
                c.rhos.iter().try_for_each(|&r| check_rho(r))
            }
        }
    }
}
