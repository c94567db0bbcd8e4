//! Exact event-driven sampler of the inclusion process on a rate graph.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::rng::{exponential, open01, replica_rng, Rng};
use crate::error::{Error, Result};
use crate::walk::{move_rate, Configuration, ProcessParams, RateGraph, WalkSpec};

/// Current configuration plus the list of occupied sites.
#[derive(Clone, Debug)]
pub struct Sampler<'g> {
    graph: &'g RateGraph,
    d: f64,
    counts: Vec<u32>,
    occupied: Vec<usize>,
    // position in `occupied`, usize::MAX when empty
    slot: Vec<usize>,
    moves: Vec<(usize, usize, f64)>,
    time: f64,
    events: u64,
}

impl<'g> Sampler<'g> {
    pub fn new(graph: &'g RateGraph, d: f64, start: &[u32]) -> Result<Self> {
        if start.len() != graph.sites() {
            return Err(Error::DimensionMismatch);
        }
        let mut s = Sampler {
            graph,
            d,
            counts: start.to_vec(),
            occupied: Vec::new(),
            slot: vec![usize::MAX; start.len()],
            moves: Vec::new(),
            time: 0.0,
            events: 0,
        };
        for x in 0..start.len() {
            if start[x] > 0 {
                s.slot[x] = s.occupied.len();
                s.occupied.push(x);
            }
        }
        Ok(s)
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn occupied(&self) -> &[usize] {
        &self.occupied
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    /// λ_N(η), refreshing the move list.
    pub fn refresh(&mut self) -> f64 {
        self.moves.clear();
        let mut total = 0.0;
        for &x in &self.occupied {
            let cx = self.counts[x];
            for &(y, r) in &self.graph.out[x] {
                let v = move_rate(cx, self.counts[y], self.d, r);
                total += v;
                self.moves.push((x, y, v));
            }
        }
        total
    }

    /// Draw the holding time and the next move without applying either.
    /// None when the configuration is absorbing.
    pub fn propose(&mut self, rng: &mut Rng) -> Option<(f64, usize, usize)> {
        let total = self.refresh();
        if !(total > 0.0) {
            return None;
        }
        let dt = exponential(rng, total);
        let target = open01(rng) * total;
        let mut acc = 0.0;
        let mut pick = None;
        for &(x, y, v) in &self.moves {
            if v <= 0.0 {
                continue;
            }
            acc += v;
            pick = Some((x, y));
            if acc >= target {
                break;
            }
        }
        pick.map(|(x, y)| (dt, x, y))
    }

    /// Advance the clock and move one particle x → y.
    pub fn apply(&mut self, dt: f64, x: usize, y: usize) {
        self.time += dt;
        self.events += 1;
        self.counts[x] -= 1;
        if self.counts[x] == 0 {
            let i = self.slot[x];
            self.occupied.swap_remove(i);
            if i < self.occupied.len() {
                self.slot[self.occupied[i]] = i;
            }
            self.slot[x] = usize::MAX;
        }
        if self.counts[y] == 0 {
            self.slot[y] = self.occupied.len();
            self.occupied.push(y);
        }
        self.counts[y] += 1;
    }

    pub fn step(&mut self, rng: &mut Rng) -> Option<Event> {
        let (dt, x, y) = self.propose(rng)?;
        self.apply(dt, x, y);
        Some(Event { time: self.time, from: x, to: y })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub from: usize,
    pub to: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case", deny_unknown_fields)]
pub enum Horizon {
    Time(f64),
    Events(u64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub initial: Configuration,
    pub events: Vec<Event>,
    /// end of the observed window; for an event horizon, the last event time
    pub horizon: f64,
    pub seed: u64,
    pub replica: u64,
}

impl Trajectory {
    pub fn final_configuration(&self) -> Configuration {
        let mut c = self.initial.clone();
        for e in &self.events {
            c.counts[e.from] -= 1;
            c.counts[e.to] += 1;
        }
        c
    }
}

pub fn simulate(
    spec: &WalkSpec,
    params: &ProcessParams,
    start: &Configuration,
    horizon: Horizon,
    seed: u64,
) -> Result<Trajectory> {
    simulate_replica(spec.graph(), params, start, horizon, seed, 0)
}

pub fn simulate_replica(
    graph: &RateGraph,
    params: &ProcessParams,
    start: &Configuration,
    horizon: Horizon,
    seed: u64,
    replica: u64,
) -> Result<Trajectory> {
    params.validate()?;
    start.check(graph.sites(), params.n)?;
    match horizon {
        Horizon::Time(t) if !(t > 0.0 && t.is_finite()) => return Err(Error::InvalidParams("horizon must be positive".into())),
        Horizon::Events(0) => return Err(Error::InvalidParams("horizon must be positive".into())),
        _ => {}
    }
    let mut rng = replica_rng(seed, replica);
    let mut s = Sampler::new(graph, params.d, &start.counts)?;
    let mut events = Vec::new();
    let end = loop {
        if let Horizon::Events(n) = horizon {
            if s.events() >= n {
                break s.time();
            }
        }
        let Some((dt, x, y)) = s.propose(&mut rng) else {
            break match horizon {
                Horizon::Time(t) => t,
                Horizon::Events(_) => s.time(),
            };
        };
        if let Horizon::Time(t) = horizon {
            if s.time() + dt > t {
                break t;
            }
        }
        s.apply(dt, x, y);
        events.push(Event { time: s.time(), from: x, to: y });
    };
    Ok(Trajectory { initial: start.clone(), events, horizon: end, seed, replica })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conserves_and_orders() {
        let w = WalkSpec::cycle(3, 0.7).unwrap();
        let p = ProcessParams::new(6, 0.1).unwrap();
        let t = simulate(&w, &p, &Configuration::balanced(3, 6), Horizon::Events(2000), 3).unwrap();
        assert_eq!(t.events.len(), 2000);
        assert!(t.events.windows(2).all(|e| e[0].time < e[1].time));
        assert_eq!(t.final_configuration().total(), 6);
        let again = simulate(&w, &p, &Configuration::balanced(3, 6), Horizon::Events(2000), 3).unwrap();
        assert_eq!(t, again);
    }

    #[test]
    fn time_horizon_is_respected() {
        let w = WalkSpec::cycle(3, 0.5).unwrap();
        let p = ProcessParams::new(4, 0.5).unwrap();
        let t = simulate(&w, &p, &Configuration::balanced(3, 4), Horizon::Time(3.0), 9).unwrap();
        assert_eq!(t.horizon, 3.0);
        assert!(t.events.last().unwrap().time <= 3.0);
    }
}
