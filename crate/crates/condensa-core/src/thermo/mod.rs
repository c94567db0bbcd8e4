//! Thermodynamic limit on the torus: regimes, mean-jump rates, generator
//! convergence, condensate tracking and stationary condensation.

pub mod condensation;
pub mod rates;
pub mod torus;
pub mod tracker;

pub use condensation::{torus_condensation, CondensationReport};
pub use rates::{
    discrete_generator_apply, generator_gap, limit_generator_apply, torus_mean_rates, CosineMode, Linear, RateMethod,
    SmoothFn, TorusRates,
};
pub use torus::{build_torus, kernel_1d, KernelEntry, Regime, TorusSpec};
pub use tracker::{
    condensate_statistics, track_condensate, track_replicas, CondensatePath, CondensateStats, TrackerConfig,
};
