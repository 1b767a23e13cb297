//! Verification harness: Phi-scaling sweeps, decay-rate fits and the radial
//! inequality checks.

pub mod sampler;
pub mod decay;
pub mod inequalities;
pub mod scaling;

pub use decay::{fit_decay_rate, DecayReport};
pub use inequalities::{
    check_hlp, check_poincare, check_weighted_interpolation, inequality_suite, InequalityReport,
};
pub use scaling::{phi_sweep, ScalingReport, SweepCase};
