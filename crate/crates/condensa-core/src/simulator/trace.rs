//! Trace of a path on the condensed configurations ξ^x, x ∈ A, and Monte
//! Carlo estimates of the trace jump rates.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::rng::replica_rng;
use super::sampler::{Sampler, Trajectory};
use crate::error::{Error, Result};
use crate::walk::{ProcessParams, RateGraph, WalkSpec};

/// Ψ restricted to A: index into A of the condensate site, if any.
fn label_map(kappa: usize, a: &[usize]) -> Result<Vec<Option<usize>>> {
    let mut map = vec![None; kappa];
    for (i, &x) in a.iter().enumerate() {
        if x >= kappa || map[x].is_some() {
            return Err(Error::DimensionMismatch);
        }
        map[x] = Some(i);
    }
    Ok(map)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceVisit {
    /// site of A
    pub site: usize,
    /// trace-clock sojourn
    pub sojourn: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePath {
    pub sites: Vec<usize>,
    pub theta: f64,
    /// rescaled window T; the real window is T·θ
    pub window: f64,
    /// Y_N: consecutive visits on the trace clock, merged when the label repeats
    pub visits: Vec<TraceVisit>,
    pub trace_time: f64,
    pub off_time: f64,
    /// ∫_0^T 1{η(θs) ∉ E} ds
    pub off_rescaled: f64,
    /// off_rescaled / T
    pub off_fraction: f64,
    /// Ψ̂ on real time: (segment start, site or None for the cemetery)
    segments: Vec<(f64, Option<usize>)>,
}

impl TracePath {
    /// Ŷ_N(t) = Ψ̂(η_N(θ t)); None is the cemetery.
    pub fn marginal(&self, t: f64) -> Option<usize> {
        let real = t * self.theta;
        let i = self.segments.partition_point(|&(s, _)| s <= real);
        self.segments[i.saturating_sub(1)].1
    }

    /// Y_N(t) = Ψ(η*(θ t)) on the trace clock; None before the first visit.
    pub fn trace_label(&self, t: f64) -> Option<usize> {
        let mut clock = t * self.theta;
        for v in &self.visits {
            if clock < v.sojourn {
                return Some(v.site);
            }
            clock -= v.sojourn;
        }
        self.visits.last().map(|v| v.site)
    }

    pub fn jumps(&self) -> usize {
        self.visits.len().saturating_sub(1)
    }
}

pub fn trace_project(traj: &Trajectory, a: &[usize], theta: f64, window: f64) -> Result<TracePath> {
    let kappa = traj.initial.sites();
    let n = traj.initial.total();
    let map = label_map(kappa, a)?;
    let end = window * theta;
    if !(end > 0.0) || end > traj.horizon * (1.0 + 1e-12) {
        return Err(Error::WindowExceedsTrajectory);
    }
    let end = end.min(traj.horizon);
    let mut counts = traj.initial.counts.clone();
    let label_of = |c: &[u32]| c.iter().position(|&v| v == n).and_then(|x| map[x].map(|_| x));
    let mut label = label_of(&counts);
    let mut segments = vec![(0.0, label)];
    let mut visits: Vec<TraceVisit> = Vec::new();
    let (mut trace_time, mut off_time) = (0.0, 0.0);
    let mut last = 0.0;
    let mut credit = |label: Option<usize>, span: f64, visits: &mut Vec<TraceVisit>| match label {
        Some(x) => {
            trace_time += span;
            match visits.last_mut() {
                Some(v) if v.site == x => v.sojourn += span,
                _ => visits.push(TraceVisit { site: x, sojourn: span }),
            }
        }
        None => off_time += span,
    };
    for e in &traj.events {
        if e.time >= end {
            break;
        }
        credit(label, e.time - last, &mut visits);
        last = e.time;
        counts[e.from] -= 1;
        counts[e.to] += 1;
        let next = label_of(&counts);
        if next != label {
            segments.push((e.time, next));
            label = next;
        }
    }
    credit(label, end - last, &mut visits);
    Ok(TracePath {
        sites: a.to_vec(),
        theta,
        window,
        visits,
        trace_time,
        off_time,
        off_rescaled: off_time / theta,
        off_fraction: off_time / end,
        segments,
    })
}

/// Trace-jump counts and trace times of one or more replicas.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceCounts {
    pub sites: Vec<usize>,
    /// jumps i → j on the trace, row-major |A|×|A|
    pub jumps: Vec<u64>,
    /// trace time spent at each site of A
    pub time: Vec<f64>,
    pub events: u64,
    /// replicas that hit the event cap before the jump target
    pub capped: u64,
}

impl TraceCounts {
    pub fn empty(sites: &[usize]) -> Self {
        let k = sites.len();
        TraceCounts { sites: sites.to_vec(), jumps: vec![0; k * k], time: vec![0.0; k], events: 0, capped: 0 }
    }

    pub fn merge(&mut self, other: &TraceCounts) {
        for (a, b) in self.jumps.iter_mut().zip(&other.jumps) {
            *a += b;
        }
        for (a, b) in self.time.iter_mut().zip(&other.time) {
            *a += b;
        }
        self.events += other.events;
        self.capped += other.capped;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceBudget {
    /// trace jumps per replica
    pub jumps: u64,
    /// hard cap on events per replica
    pub events: u64,
}

impl Default for TraceBudget {
    fn default() -> Self {
        TraceBudget { jumps: 20, events: 10_000_000 }
    }
}

/// One replica started at ξ^{A[r mod |A|]}.
pub fn trace_replica(
    graph: &RateGraph,
    params: &ProcessParams,
    a: &[usize],
    budget: TraceBudget,
    seed: u64,
    replica: u64,
) -> Result<TraceCounts> {
    params.validate()?;
    let kappa = graph.sites();
    let map = label_map(kappa, a)?;
    let k = a.len();
    let n = params.n;
    let start_site = a[(replica % k as u64) as usize];
    let mut start = vec![0u32; kappa];
    start[start_site] = n;
    let mut rng = replica_rng(seed, replica);
    let mut s = Sampler::new(graph, params.d, &start)?;
    let mut out = TraceCounts::empty(a);
    let mut here = map[start_site];
    let mut last = here.unwrap();
    let mut jumps = 0;
    while jumps < budget.jumps {
        if s.events() >= budget.events {
            out.capped = 1;
            break;
        }
        let Some((dt, x, y)) = s.propose(&mut rng) else { break };
        if let Some(i) = here {
            out.time[i] += dt;
        }
        s.apply(dt, x, y);
        here = if s.counts()[y] == n { map[y] } else { None };
        if let Some(j) = here {
            if j != last {
                out.jumps[last * k + j] += 1;
                jumps += 1;
                last = j;
            }
        }
    }
    out.events = s.events();
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRateEstimate {
    pub sites: Vec<usize>,
    pub n: u32,
    pub d: f64,
    /// count / trace time, row-major
    pub rates: Vec<f64>,
    /// √count / trace time
    pub std_errors: Vec<f64>,
    pub counts: Vec<u64>,
    pub trace_time: Vec<f64>,
    /// entries with no observed transition
    pub unobserved: Vec<bool>,
    pub replicas: u64,
    pub capped: u64,
}

impl TraceRateEstimate {
    pub fn from_counts(c: &TraceCounts, params: &ProcessParams, replicas: u64) -> Self {
        let k = c.sites.len();
        let mut rates = vec![0.0; k * k];
        let mut std_errors = vec![0.0; k * k];
        let mut unobserved = vec![false; k * k];
        for i in 0..k {
            for j in 0..k {
                if i == j {
                    continue;
                }
                let m = c.jumps[i * k + j] as f64;
                let t = c.time[i];
                if t > 0.0 {
                    rates[i * k + j] = m / t;
                    std_errors[i * k + j] = libm::sqrt(m) / t;
                }
                unobserved[i * k + j] = m == 0.0;
            }
        }
        TraceRateEstimate {
            sites: c.sites.clone(),
            n: params.n,
            d: params.d,
            rates,
            std_errors,
            counts: c.jumps.clone(),
            trace_time: c.time.clone(),
            unobserved,
            replicas,
            capped: c.capped,
        }
    }

    fn pos(&self, x: usize, y: usize) -> Result<usize> {
        let i = self.sites.iter().position(|&s| s == x).ok_or(Error::DimensionMismatch)?;
        let j = self.sites.iter().position(|&s| s == y).ok_or(Error::DimensionMismatch)?;
        Ok(i * self.sites.len() + j)
    }

    pub fn rate(&self, x: usize, y: usize) -> Result<f64> {
        Ok(self.rates[self.pos(x, y)?])
    }

    pub fn std_error(&self, x: usize, y: usize) -> Result<f64> {
        Ok(self.std_errors[self.pos(x, y)?])
    }
}

/// Sequential replicas reduced in index order.
pub fn mc_mean_jump_rate(
    spec: &WalkSpec,
    params: &ProcessParams,
    a: &[usize],
    replicas: u64,
    budget: TraceBudget,
    seed: u64,
) -> Result<TraceRateEstimate> {
    if replicas < 100 {
        return Err(Error::InvalidParams("at least 100 replicas".into()));
    }
    if a.len() < 2 {
        return Err(Error::InvalidParams("A needs two sites".into()));
    }
    let mut total = TraceCounts::empty(a);
    for r in 0..replicas {
        total.merge(&trace_replica(spec.graph(), params, a, budget, seed, r)?);
    }
    Ok(TraceRateEstimate::from_counts(&total, params, replicas))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::sampler::{simulate, Horizon};
    use crate::walk::Configuration;

    #[test]
    fn inside_e_only() {
        let w = WalkSpec::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let p = ProcessParams::new(1, 0.5).unwrap();
        // one particle: every configuration is condensed
        let t = simulate(&w, &p, &Configuration::condensed(2, 1, 0), Horizon::Time(50.0), 1).unwrap();
        let tp = trace_project(&t, &[0, 1], 1.0, 50.0).unwrap();
        assert_eq!(tp.off_time, 0.0);
        assert!((tp.trace_time - 50.0).abs() < 1e-9);
        assert!(trace_project(&t, &[0, 1], 1.0, 51.0).is_err());
    }

    #[test]
    fn sojourns_add_up() {
        let w = WalkSpec::cycle(3, 0.7).unwrap();
        let p = ProcessParams::new(4, 0.05).unwrap();
        let t = simulate(&w, &p, &Configuration::condensed(3, 4, 0), Horizon::Time(500.0), 2).unwrap();
        let tp = trace_project(&t, &[0, 1, 2], 10.0, 50.0).unwrap();
        let s: f64 = tp.visits.iter().map(|v| v.sojourn).sum();
        assert!((s - tp.trace_time).abs() < 1e-9 * 500.0);
        assert!((tp.trace_time + tp.off_time - 500.0).abs() < 1e-9 * 500.0);
        assert_eq!(tp.marginal(0.0), Some(0));
    }

    #[test]
    fn seed_determinism() {
        let w = WalkSpec::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let p = ProcessParams::new(2, 0.1).unwrap();
        let b = TraceBudget { jumps: 5, events: 100_000 };
        let e1 = mc_mean_jump_rate(&w, &p, &[0, 1], 100, b, 11).unwrap();
        let e2 = mc_mean_jump_rate(&w, &p, &[0, 1], 100, b, 11).unwrap();
        assert_eq!(e1, e2);
    }
}
