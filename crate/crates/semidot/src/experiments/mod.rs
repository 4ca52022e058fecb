//! Experiment drivers: ε sweeps with rate fits, the sharp-constant check,
//! the closed-form tanh oracle, and the resampling CLT simulation.

mod clt;
mod constant;
mod fit;
mod oracle;
mod sweep;

pub use clt::{clt_sim, CltStats, EpsRule};
pub use constant::{constant_check, ConstantCheck};
pub use fit::{geometric_grid, RateFit};
pub use oracle::{oracle_tanh, tail_integral};
pub use sweep::{rate_sweep, FunctionalKind, RateSweep, SweepRow};
