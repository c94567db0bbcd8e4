//! Hitting times: τ_U for the inclusion process (continuous time) and σ_R
//! for the reversed auxiliary chain on the inner-core closure (steps).

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::rng::{open01, replica_rng};
use super::sampler::Sampler;
use crate::error::{Error, Result};
use crate::regions::RegionSpec;
use crate::walk::{move_rate, Configuration, ProcessParams, WalkSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "chain", rename_all = "snake_case")]
pub enum HittingChain {
    /// τ of U_N = {η : η_x ≤ δ log N for some x}
    Inclusion { delta: f64 },
    /// σ_R, the hitting step of ∂I_N^R
    Auxiliary { r: Vec<usize>, eps: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HittingTask {
    #[serde(flatten)]
    pub chain: HittingChain,
    pub start: Configuration,
    pub replicas: u64,
    pub seed: u64,
    #[serde(default = "default_cap")]
    pub step_cap: u64,
}

fn default_cap() -> u64 {
    1_000_000_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HittingResult {
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
    pub times: Vec<f64>,
}

impl HittingResult {
    pub fn from_times(times: Vec<f64>) -> Self {
        let m = times.len() as f64;
        let mean = times.iter().sum::<f64>() / m;
        let variance = if times.len() > 1 {
            times.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / (m - 1.0)
        } else {
            0.0
        };
        HittingResult { mean, variance, std_error: libm::sqrt(variance / m), times }
    }
}

/// One replica; `None` when the step cap is hit first.
pub fn hitting_replica(task: &HittingTask, spec: &WalkSpec, params: &ProcessParams, replica: u64) -> Result<Option<f64>> {
    params.validate()?;
    task.start.check(spec.kappa(), params.n)?;
    let mut rng = replica_rng(task.seed, replica);
    match &task.chain {
        HittingChain::Inclusion { delta } => {
            let level = delta * libm::log(params.n as f64);
            let hit = |c: &[u32]| c.iter().any(|&v| v as f64 <= level);
            if hit(&task.start.counts) {
                return Ok(Some(0.0));
            }
            let mut s = Sampler::new(spec.graph(), params.d, &task.start.counts)?;
            while s.events() < task.step_cap {
                let Some((dt, x, y)) = s.propose(&mut rng) else {
                    return Ok(None);
                };
                s.apply(dt, x, y);
                if s.counts()[x] as f64 <= level {
                    return Ok(Some(s.time()));
                }
            }
            Ok(None)
        }
        HittingChain::Auxiliary { r, eps } => {
            let region = RegionSpec::new(spec, params.n, r, *eps)?;
            let mut c = task.start.counts.clone();
            if !region.in_closure(&c) {
                return Err(Error::InvalidConfiguration("start outside the inner-core closure".into()));
            }
            let sites = region.sites().to_vec();
            let mut steps = 0u64;
            let mut moves: Vec<(usize, usize, f64)> = Vec::new();
            while region.in_inner_core(&c) {
                if steps >= task.step_cap {
                    return Ok(None);
                }
                steps += 1;
                moves.clear();
                let mut w = 0.0;
                for &x in &sites {
                    for &y in &sites {
                        let rr = spec.rate(y, x);
                        if x != y && rr > 0.0 {
                            let v = move_rate(c[y], c[x], params.d, rr);
                            w += v;
                            moves.push((x, y, v));
                        }
                    }
                }
                let target = open01(&mut rng) * w;
                let mut acc = 0.0;
                let mut pick = None;
                for &(x, y, v) in &moves {
                    acc += v;
                    pick = Some((x, y));
                    if acc >= target {
                        break;
                    }
                }
                let Some((x, y)) = pick else { return Ok(None) };
                c[x] -= 1;
                c[y] += 1;
                if !region.in_closure(&c) {
                    // leaves the closure: self-loop
                    c[x] += 1;
                    c[y] -= 1;
                }
            }
            Ok(Some(steps as f64))
        }
    }
}

/// Sequential replicas in index order.
pub fn mc_hitting(task: &HittingTask, spec: &WalkSpec, params: &ProcessParams) -> Result<HittingResult> {
    if task.replicas == 0 {
        return Err(Error::InsufficientData);
    }
    let mut times = Vec::with_capacity(task.replicas as usize);
    let mut censored = 0;
    for r in 0..task.replicas {
        match hitting_replica(task, spec, params, r)? {
            Some(t) => times.push(t),
            None => censored += 1,
        }
    }
    if censored > 0 {
        return Err(Error::BudgetExceeded { censored, replicas: task.replicas });
    }
    Ok(HittingResult::from_times(times))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn boundary_start_is_zero() {
        let w = WalkSpec::cycle(3, 0.7).unwrap();
        let p = ProcessParams::new(30, 1e-6).unwrap();
        // threshold ⌊0.5 log 30⌋ = 1; (27,2,1) sits on ∂I, one move from (26,2,2)
        let task = HittingTask {
            chain: HittingChain::Auxiliary { r: vec![0, 1, 2], eps: 0.5 },
            start: Configuration::new(vec![27, 2, 1]),
            replicas: 3,
            seed: 1,
            step_cap: 1_000_000,
        };
        assert_eq!(mc_hitting(&task, &w, &p).unwrap().mean, 0.0);
        let inner = HittingTask { start: Configuration::new(vec![26, 2, 2]), ..task.clone() };
        assert!(mc_hitting(&inner, &w, &p).unwrap().times.iter().all(|&t| t >= 1.0));
        let outside = HittingTask { start: Configuration::new(vec![28, 1, 1]), ..task };
        assert!(matches!(mc_hitting(&outside, &w, &p), Err(Error::InvalidConfiguration(_))));
    }

    #[test]
    fn inclusion_hits() {
        let w = WalkSpec::cycle(3, 0.5).unwrap();
        let p = ProcessParams::new(30, libm::pow(30.0, -3.0)).unwrap();
        let task = HittingTask {
            chain: HittingChain::Inclusion { delta: 1.0 },
            start: Configuration::balanced(3, 30),
            replicas: 50,
            seed: 4,
            step_cap: 1_000_000,
        };
        let r = mc_hitting(&task, &w, &p).unwrap();
        assert!(r.mean > 0.0 && r.times.len() == 50);
    }
}
