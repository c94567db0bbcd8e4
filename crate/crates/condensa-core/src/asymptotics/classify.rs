//! The b-kernel, its recurrent set S₀ and the two limiting chains.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::predict::{is_attracting, is_semi_attracting};
use crate::error::{Error, Result};
use crate::graph;
use crate::hitting::stationary_of_rates;
use crate::walk::WalkSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub kappa: usize,
    /// b(x,y) = [r(x,y) − r(y,x)]⁺, row-major
    pub b: Vec<f64>,
    pub s0: Vec<usize>,
    /// terminal components of the b-digraph, each sorted
    pub components: Vec<Vec<usize>>,
    pub irreducible_on_s0: bool,
    pub symmetric_on_s0: bool,
    pub s0_attracting: bool,
    pub s0_semi_attracting: bool,
    /// the r-graph restricted to S₀ is strongly connected
    pub z2_irreducible: bool,
}

impl Classification {
    pub fn b(&self, x: usize, y: usize) -> f64 {
        self.b[x * self.kappa + y]
    }
}

pub fn classify(walk: &WalkSpec) -> Classification {
    let k = walk.kappa();
    let mut b = vec![0.0; k * k];
    let mut adj = vec![Vec::new(); k];
    for x in 0..k {
        for y in 0..k {
            let v = walk.rate(x, y) - walk.rate(y, x);
            if x != y && v > 0.0 {
                b[x * k + y] = v;
                adj[x].push(y);
            }
        }
    }
    let components = graph::terminal_components(&adj);
    let mut s0: Vec<usize> = components.iter().flatten().copied().collect();
    s0.sort_unstable();
    let symmetric_on_s0 = s0.iter().all(|&x| s0.iter().all(|&y| walk.rate(x, y) == walk.rate(y, x)));
    let local: Vec<Vec<usize>> = s0
        .iter()
        .map(|&x| (0..s0.len()).filter(|&j| s0[j] != x && walk.rate(x, s0[j]) > 0.0).collect())
        .collect();
    Classification {
        kappa: k,
        irreducible_on_s0: components.len() == 1,
        symmetric_on_s0,
        s0_attracting: is_attracting(walk, &s0),
        s0_semi_attracting: is_semi_attracting(walk, &s0),
        z2_irreducible: graph::is_strongly_connected(&local),
        b,
        s0,
        components,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitMode {
    Rv,
    Nrv,
}

/// Time scale θ_N of the limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    /// 1/d_N
    InvD,
    /// 1/(N d_N)
    InvNd,
}

impl Scale {
    pub fn theta(self, n: u32, d: f64) -> f64 {
        match self {
            Scale::InvD => 1.0 / d,
            Scale::InvNd => 1.0 / (n as f64 * d),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitChain {
    pub mode: LimitMode,
    pub sites: Vec<usize>,
    /// a(x,y) on `sites`, row-major
    pub rates: Vec<f64>,
    pub scale: Scale,
    pub nu: Option<Vec<f64>>,
}

impl LimitChain {
    /// max_y |Σ_x ν(x)a(x,y) − ν(y)Σ_z a(y,z)|
    pub fn residual(&self) -> Option<f64> {
        let nu = self.nu.as_ref()?;
        let k = self.sites.len();
        let mut worst: f64 = 0.0;
        for y in 0..k {
            let mut acc = 0.0;
            for x in 0..k {
                if x != y {
                    acc += nu[x] * self.rates[x * k + y] - nu[y] * self.rates[y * k + x];
                }
            }
            worst = worst.max(acc.abs());
        }
        Some(worst)
    }
}

pub fn limit_chain(walk: &WalkSpec, c: &Classification, mode: LimitMode) -> Result<LimitChain> {
    let scale = match mode {
        LimitMode::Nrv => {
            if !c.irreducible_on_s0 {
                return Err(Error::PremiseViolated("Z1 has more than one irreducible component on S0"));
            }
            Scale::InvNd
        }
        LimitMode::Rv => {
            if !c.symmetric_on_s0 {
                return Err(Error::PremiseViolated("r is not symmetric on S0"));
            }
            if !c.s0_attracting {
                return Err(Error::PremiseViolated("S0 is not attracting"));
            }
            if !c.z2_irreducible {
                return Err(Error::PremiseViolated("Z2 is not irreducible on S0"));
            }
            Scale::InvD
        }
    };
    let sites = c.s0.clone();
    let k = sites.len();
    let mut rates = vec![0.0; k * k];
    for (i, &x) in sites.iter().enumerate() {
        for (j, &y) in sites.iter().enumerate() {
            if i != j {
                rates[i * k + j] = match mode {
                    LimitMode::Nrv => c.b(x, y),
                    LimitMode::Rv => walk.rate(x, y),
                };
            }
        }
    }
    let nu = stationary_of_rates(&rates, k).ok();
    Ok(LimitChain { mode, sites, rates, scale, nu })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain4() -> WalkSpec {
        WalkSpec::from_rows(vec![
            vec![0.0, 2.0, 0.0, 0.0],
            vec![1.0, 0.0, 1.0, 0.0],
            vec![0.0, 1.0, 0.0, 1.0],
            vec![0.0, 0.0, 2.0, 0.0],
        ])
        .unwrap()
    }

    #[test]
    fn cycle_is_one_component() {
        let w = WalkSpec::cycle(3, 0.7).unwrap();
        let c = classify(&w);
        assert_eq!(c.s0, vec![0, 1, 2]);
        assert!(c.irreducible_on_s0 && c.s0_semi_attracting);
        let l = limit_chain(&w, &c, LimitMode::Nrv).unwrap();
        assert!((l.rates[1] - 0.4).abs() < 1e-15 && l.rates[2] == 0.0);
        for v in l.nu.as_ref().unwrap() {
            assert!((v - 1.0 / 3.0).abs() < 1e-14);
        }
        assert!(l.residual().unwrap() <= 1e-12);
        assert!(matches!(limit_chain(&w, &c, LimitMode::Rv), Err(Error::PremiseViolated(_))));
    }

    #[test]
    fn four_site_chain() {
        let w = chain4();
        let c = classify(&w);
        assert_eq!(c.s0, vec![1, 2]);
        assert_eq!(c.components.len(), 2);
        assert!(!c.irreducible_on_s0 && c.symmetric_on_s0 && c.s0_attracting && c.z2_irreducible);
        assert!(c.b(0, 1) == 1.0 && c.b(3, 2) == 1.0);
        assert!(limit_chain(&w, &c, LimitMode::Nrv).is_err());
        let l = limit_chain(&w, &c, LimitMode::Rv).unwrap();
        assert_eq!(l.rates, vec![0.0, 1.0, 1.0, 0.0]);
        assert_eq!(l.scale, Scale::InvD);
        let nu = l.nu.unwrap();
        assert!((nu[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn symmetric_torus_rv() {
        let w = WalkSpec::cycle(5, 0.5).unwrap();
        let c = classify(&w);
        let l = limit_chain(&w, &c, LimitMode::Rv).unwrap();
        assert_eq!(l.rates[1], 0.5);
        assert_eq!(l.rates[4], 0.5);
    }
}
