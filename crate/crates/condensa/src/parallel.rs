//! Replica-parallel wrappers around the sequential core runners. Replicas
//! are independent streams keyed by index, and every reduction walks them
//! in index order, so results do not depend on the thread count.

use condensa_core::simulator::{
    hitting_replica, trace_replica, HittingResult, HittingTask, TraceBudget, TraceCounts, TraceRateEstimate,
};
use condensa_core::thermo::{track_condensate, CondensatePath, TorusSpec, TrackerConfig};
use condensa_core::{Error, ProcessParams, WalkSpec};
use rayon::prelude::*;

use crate::error::{CliError, Result};

/// Sizes the global pool; `None` keeps rayon's default.
pub fn configure_threads(threads: Option<usize>) -> Result<()> {
    let Some(n) = threads else { return Ok(()) };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Threads(e.to_string()))
}

/// f(0), ..., f(n−1) in parallel; the first error by index wins.
pub fn replica_map<T, F>(n: u64, f: F) -> condensa_core::Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> condensa_core::Result<T> + Sync,
{
    let all: Vec<condensa_core::Result<T>> = (0..n).into_par_iter().map(&f).collect();
    all.into_iter().collect()
}

pub fn hitting(task: &HittingTask, spec: &WalkSpec, params: &ProcessParams) -> condensa_core::Result<HittingResult> {
    if task.replicas == 0 {
        return Err(Error::InsufficientData);
    }
    let out = replica_map(task.replicas, |r| hitting_replica(task, spec, params, r))?;
    let censored = out.iter().filter(|t| t.is_none()).count() as u64;
    if censored > 0 {
        return Err(Error::BudgetExceeded { censored, replicas: task.replicas });
    }
    Ok(HittingResult::from_times(out.into_iter().flatten().collect()))
}

pub fn mean_jump_rate(
    spec: &WalkSpec,
    params: &ProcessParams,
    a: &[usize],
    replicas: u64,
    budget: TraceBudget,
    seed: u64,
) -> condensa_core::Result<TraceRateEstimate> {
    if replicas < 100 {
        return Err(Error::InvalidParams("at least 100 replicas".into()));
    }
    if a.len() < 2 {
        return Err(Error::InvalidParams("A needs two sites".into()));
    }
    let parts = replica_map(replicas, |r| trace_replica(spec.graph(), params, a, budget, seed, r))?;
    let mut total = TraceCounts::empty(a);
    for p in &parts {
        total.merge(p);
    }
    Ok(TraceRateEstimate::from_counts(&total, params, replicas))
}

pub fn track(t: &TorusSpec, cfg: &TrackerConfig) -> condensa_core::Result<Vec<CondensatePath>> {
    let graph = t.graph();
    replica_map(cfg.replicas, |r| track_condensate(t, &graph, cfg, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use condensa_core::simulator::mc_mean_jump_rate;
    use condensa_core::thermo::{build_torus, kernel_1d, track_replicas};

    #[test]
    fn matches_sequential() {
        let w = WalkSpec::cycle(3, 0.7).unwrap();
        let p = ProcessParams::new(6, 0.05).unwrap();
        let budget = TraceBudget { jumps: 5, events: 1_000_000 };
        let a = mc_mean_jump_rate(&w, &p, &[0, 1, 2], 100, budget, 9).unwrap();
        let b = mean_jump_rate(&w, &p, &[0, 1, 2], 100, budget, 9).unwrap();
        assert_eq!(a, b);

        let t = build_torus(1, 8, &kernel_1d(&[(1, 0.5), (-1, 0.5)]), 2.0, None).unwrap();
        let cfg = TrackerConfig { window: 0.2, replicas: 4, seed: 3, event_cap: 10_000_000, lags: vec![0.1] };
        assert_eq!(track(&t, &cfg).unwrap(), track_replicas(&t, &cfg).unwrap());
    }
}
