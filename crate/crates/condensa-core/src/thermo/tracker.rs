//! Condensate trajectories on the torus and their drift, diffusion and
//! off-E occupation statistics, all in rescaled units (space 1/L, time θ_L
//! on the trace clock).

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::torus::{Regime, TorusSpec};
use crate::error::{Error, Result};
use crate::simulator::rng::replica_rng;
use crate::simulator::sampler::Sampler;
use crate::walk::RateGraph;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackerConfig {
    /// rescaled trace-clock window T
    pub window: f64,
    pub replicas: u64,
    pub seed: u64,
    #[serde(default = "default_event_cap")]
    pub event_cap: u64,
    /// rescaled lags for the MSD fit; the smallest also sets the increment window
    pub lags: Vec<f64>,
}

fn default_event_cap() -> u64 {
    200_000_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CondensatePath {
    /// (rescaled trace time, rescaled unwrapped position) at every relocation, starting at the origin
    pub points: Vec<(f64, Vec<f64>)>,
    pub relocations: u64,
    /// condensate site at the end
    pub final_site: usize,
    /// real time spent in E_L and outside it
    pub trace_time: f64,
    pub off_time: f64,
    pub events: u64,
    pub capped: bool,
    /// rescaled trace time actually covered
    pub end: f64,
}

impl CondensatePath {
    pub fn position_at(&self, s: f64) -> &[f64] {
        let i = self.points.partition_point(|p| p.0 <= s);
        &self.points[i.saturating_sub(1)].1
    }

    pub fn off_fraction(&self) -> f64 {
        let total = self.trace_time + self.off_time;
        if total > 0.0 {
            self.off_time / total
        } else {
            0.0
        }
    }
}

/// One replica from ξ^0, stopped when the trace clock reaches θ_L T.
pub fn track_condensate(t: &TorusSpec, graph: &RateGraph, cfg: &TrackerConfig, replica: u64) -> Result<CondensatePath> {
    let n = t.n;
    let l = t.side as f64;
    let mut start = vec![0u32; t.sites()];
    start[0] = n;
    let mut rng = replica_rng(cfg.seed, replica);
    let mut s = Sampler::new(graph, t.d_l, &start)?;
    let limit = t.theta * cfg.window;
    let mut site = 0usize;
    let mut in_e = true;
    let mut pos = vec![0.0; t.dim];
    let mut path = CondensatePath {
        points: vec![(0.0, pos.clone())],
        relocations: 0,
        final_site: 0,
        trace_time: 0.0,
        off_time: 0.0,
        events: 0,
        capped: false,
        end: cfg.window,
    };
    loop {
        if s.events() >= cfg.event_cap {
            path.capped = true;
            path.end = path.trace_time / t.theta;
            break;
        }
        let Some((dt, x, y)) = s.propose(&mut rng) else {
            return Err(Error::SolverFailure("torus configuration is absorbing".into()));
        };
        if in_e {
            if path.trace_time + dt >= limit {
                path.trace_time = limit;
                break;
            }
            path.trace_time += dt;
        } else {
            path.off_time += dt;
        }
        s.apply(dt, x, y);
        in_e = s.counts()[y] == n;
        if in_e && y != site {
            for (p, step) in pos.iter_mut().zip(t.displacement(site, y)) {
                *p += step as f64 / l;
            }
            path.relocations += 1;
            path.points.push((path.trace_time / t.theta, pos.clone()));
            site = y;
        }
    }
    path.events = s.events();
    path.final_site = site;
    Ok(path)
}

pub fn track_replicas(t: &TorusSpec, cfg: &TrackerConfig) -> Result<Vec<CondensatePath>> {
    let graph = t.graph();
    (0..cfg.replicas).map(|r| track_condensate(t, &graph, cfg, r)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CondensateStats {
    pub replicas: usize,
    pub relocations: u64,
    pub capped: u64,
    /// displacement per unit rescaled time, mean over replicas
    pub drift: Vec<f64>,
    pub drift_se: Vec<f64>,
    /// ρ v
    pub drift_target: Vec<f64>,
    /// centered increment covariance per unit time, d×d
    pub diffusion: Vec<f64>,
    /// 𝕊₁ or 𝕊₂ per regime, zero matrix in the ballistic regime
    pub diffusion_target: Vec<f64>,
    pub lags: Vec<f64>,
    /// mean centered squared displacement at each lag
    pub msd: Vec<f64>,
    /// least-squares slope through the origin of msd against lag
    pub msd_slope: f64,
    /// trace of the target matrix
    pub msd_target: f64,
    pub off_fraction_mean: f64,
    pub off_fraction_max: f64,
}

pub fn condensate_statistics(t: &TorusSpec, paths: &[CondensatePath], cfg: &TrackerConfig) -> Result<CondensateStats> {
    if paths.len() < 2 {
        return Err(Error::InsufficientData);
    }
    let relocations: u64 = paths.iter().map(|p| p.relocations).sum();
    if relocations < 100 {
        return Err(Error::TooFewRelocations { observed: relocations });
    }
    if cfg.lags.is_empty() || cfg.lags.iter().any(|&g| !(g > 0.0) || g > cfg.window) {
        return Err(Error::WindowExceedsTrajectory);
    }
    let dim = t.dim;
    let r = paths.len() as f64;
    let per: Vec<Vec<f64>> = paths
        .iter()
        .map(|p| p.position_at(p.end).iter().map(|x| if p.end > 0.0 { x / p.end } else { 0.0 }).collect())
        .collect();
    let drift: Vec<f64> = (0..dim).map(|i| per.iter().map(|v| v[i]).sum::<f64>() / r).collect();
    let drift_se: Vec<f64> = (0..dim)
        .map(|i| {
            let var = per.iter().map(|v| (v[i] - drift[i]) * (v[i] - drift[i])).sum::<f64>() / (r - 1.0);
            libm::sqrt(var / r)
        })
        .collect();

    let increments = |tau: f64| -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        for p in paths {
            let k = libm::floor(p.end / tau) as usize;
            for j in 0..k {
                let (a, b) = (p.position_at(j as f64 * tau), p.position_at((j + 1) as f64 * tau));
                out.push((0..dim).map(|i| b[i] - a[i] - drift[i] * tau).collect());
            }
        }
        out
    };
    let tau0 = cfg.lags.iter().copied().fold(f64::INFINITY, f64::min);
    let inc = increments(tau0);
    let mut diffusion = vec![0.0; dim * dim];
    if !inc.is_empty() {
        for v in &inc {
            for i in 0..dim {
                for j in 0..dim {
                    diffusion[i * dim + j] += v[i] * v[j];
                }
            }
        }
        diffusion.iter_mut().for_each(|c| *c /= inc.len() as f64 * tau0);
    }
    let msd: Vec<f64> = cfg
        .lags
        .iter()
        .map(|&tau| {
            let inc = increments(tau);
            let m = inc.len().max(1) as f64;
            inc.iter().map(|v| v.iter().map(|c| c * c).sum::<f64>()).sum::<f64>() / m
        })
        .collect();
    let (num, den) = cfg.lags.iter().zip(&msd).fold((0.0, 0.0), |(a, b), (&tau, &m)| (a + tau * m, b + tau * tau));
    let diffusion_target = match t.regime {
        Regime::TotallyAsym => vec![0.0; dim * dim],
        Regime::MeanZeroAsym => t.s1.clone(),
        Regime::Symmetric => t.s2.clone(),
    };
    let msd_target = (0..dim).map(|i| diffusion_target[i * dim + i]).sum();
    let offs: Vec<f64> = paths.iter().map(|p| p.off_fraction()).collect();
    Ok(CondensateStats {
        replicas: paths.len(),
        relocations,
        capped: paths.iter().filter(|p| p.capped).count() as u64,
        drift,
        drift_se,
        drift_target: t.v.iter().map(|v| t.rho * v).collect(),
        diffusion,
        diffusion_target,
        lags: cfg.lags.clone(),
        msd,
        msd_slope: num / den,
        msd_target,
        off_fraction_mean: offs.iter().sum::<f64>() / r,
        off_fraction_max: offs.iter().copied().fold(0.0, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermo::torus::{build_torus, kernel_1d};

    #[test]
    fn unwrapping_matches_torus_position() {
        let t = build_torus(1, 8, &kernel_1d(&[(1, 0.9), (-1, 0.1)]), 1.0, None).unwrap();
        let cfg = TrackerConfig { window: 3.0, replicas: 2, seed: 5, event_cap: 10_000_000, lags: vec![0.5] };
        let g = t.graph();
        let p = track_condensate(&t, &g, &cfg, 0).unwrap();
        assert!(p.relocations > 5);
        // the unwrapped position mod 1 is the condensate site / L
        let last = p.points.last().unwrap().1[0];
        let wrapped = last - libm::floor(last);
        assert_eq!((libm::round(wrapped * 8.0) as usize) % 8, p.final_site);
        assert!(p.points.windows(2).all(|w| w[0].0 <= w[1].0));
        assert!(p.off_fraction() < 0.05);
    }
}
