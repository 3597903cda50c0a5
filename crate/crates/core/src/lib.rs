//! Intrinsic effective sample size for manifold-valued MCMC output.
//!
//! The kernel ESS of a path `X_1, ..., X_n` is the number of independent
//! draws that would give the same expected squared maximum mean discrepancy
//! between the empirical law and the target. With a kernel that respects the
//! geometry of the state space (isotropic kernels on spheres, pullbacks of
//! Euclidean Gaussians through the log map or the projection embedding) the
//! resulting number does not depend on the coordinates used to store the
//! path.
//!
//! The crate is organised by subsystem:
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`geometry`] | validated points, chains, matrix log/exp, embeddings, Haar rotations |
//! | [`kernels`] | kernel specifications, Gram assembly, positive-definiteness audits |
//! | [`estimator`] | Gram-matrix lag-window ESS, exact population ESS, scalar ESS, precision rule |
//! | [`mmd`] | V-statistic MMD, reference-corrected risk, nearest-mode TV error |
//! | [`samplers`] | von Mises–Fisher sampling and Metropolis–Hastings chains on S² |
//! | [`chainfile`] | the line-oriented chain file format |
//! | [`experiments`] | the rotation and mixture experiment runners |
//!
//! ```
//! use manifold_ess::{kernel_ess, Chain, KernelSpec, UnitVector, WindowSpec};
//!
//! let points: Vec<UnitVector> = (0..64)
//!     .map(|t| {
//!         let a = 0.3 * t as f64;
//!         UnitVector::new(vec![a.cos() * 0.6, a.sin() * 0.6, 0.8]).unwrap()
//!     })
//!     .collect();
//! let chain = Chain::sphere(points).unwrap();
//! let spec = KernelSpec::sphere_poisson(0.75).unwrap();
//! let report = kernel_ess(&chain, &spec, &WindowSpec::bartlett_auto()).unwrap();
//! assert_eq!(report.bandwidth, 4);
//! ```

pub mod chainfile;
pub mod error;
pub mod estimator;
pub mod experiments;
pub mod geometry;
pub mod kernels;
pub mod mmd;
pub mod rng;
pub mod samplers;

pub use error::{Error, Result};
pub use estimator::{
    center_gram, exact_population_ess, harmonic_mean_diagnostic, kernel_ess, lag_covariances,
    long_run_variance, precision_check, scalar_ess, Bandwidth, EssReport, EssStatus,
    LagCovariances, LagWindow, WindowSpec,
};
pub use geometry::{
    Chain, ChainMeta, CorrelationMatrix, GrassmannPoint, Manifold, Point, Rotation, SpdMatrix,
    UnitVector,
};
pub use kernels::{gram, kernel_eval, GramMatrix, KernelSpec};
pub use mmd::{corrected_risk_statistic, mmd2_empirical, mode_tv_error, MmdResult};
