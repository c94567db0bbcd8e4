//! Monte Carlo: exact path sampling, trace projection, trace-rate and
//! hitting-time estimation, and log-log scaling fits.

pub mod fit;
pub mod hitting;
pub mod rng;
pub mod sampler;
pub mod trace;

pub use fit::{scaling_fit, ScalingFit};
pub use hitting::{hitting_replica, mc_hitting, HittingChain, HittingResult, HittingTask};
pub use rng::{replica_rng, Rng};
pub use sampler::{simulate, simulate_replica, Event, Horizon, Sampler, Trajectory};
pub use trace::{
    mc_mean_jump_rate, trace_project, trace_replica, TraceBudget, TraceCounts, TracePath, TraceRateEstimate,
    TraceVisit,
};
