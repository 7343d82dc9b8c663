//! Beta kernel density estimation on [0, 1].
//!
//! The estimator smooths each observation with a Beta(t/b + 1, (1-t)/b + 1)
//! density whose mode sits at the evaluation point `t`, which keeps the
//! estimate well behaved at the boundary where symmetric kernels leak mass.
//! The price is a location-dependent bias/variance structure, and most of
//! this crate exists to measure it exactly:
//!
//! - [`specfun`] — log-gamma, log-beta, the Stirling ratio, beta sampling.
//! - [`kernel`] — the kernel itself plus closed forms for its mean shift,
//!   variance, square integral, and peak height.
//! - [`density`] — test densities (uniform, linear, cosine, sawtooth) with
//!   exact samplers and a Hölder-seminorm membership check.
//! - [`estimator`] — fitting and (parallel) grid evaluation, and the
//!   `c·n^{-2/(2β+1)}` bandwidth rule.
//! - [`quad`] — composite Simpson quadrature with a refinement gate.
//! - [`risk`] — exact bias/variance functionals, the boundary integral
//!   d(b, p), and the Monte Carlo L^p risk estimator.
//! - [`experiment`] — drivers that sweep n or b, fit log-log slopes, and
//!   emit CSV reports.
//!
//! Everything stochastic is keyed by a `(seed, stream index)` pair
//! ([`stream`]), and all parallel reductions are ordered, so results are
//! byte-stable across worker counts.

pub mod density;
pub mod error;
pub mod estimator;
pub mod experiment;
pub mod kernel;
pub mod quad;
pub mod report;
pub mod risk;
pub mod specfun;
pub mod stream;

pub use density::{holder_seminorm, HolderClass, TestDensity};
pub use error::{Error, Result};
pub use estimator::{theoretical_bandwidth, EstimatorFit, Sample};
pub use experiment::{slope_fit, ExperimentConfig, ExperimentKind, ExperimentReport, SlopeFit};
pub use kernel::BetaKernel;
pub use quad::Quadrature;
pub use risk::RiskEstimate;
pub use specfun::BetaParams;
