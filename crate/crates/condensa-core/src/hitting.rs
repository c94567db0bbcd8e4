//! Hitting probabilities of condensed states and exact trace mean-jump rates.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::{Generator, Restriction};
use crate::linalg::{self, refined_solve, BlockTridiagLu, Csr};
use crate::walk::{ProcessParams, WalkSpec};

const RESIDUAL_TOL: f64 = 1e-12;

fn check_set(spec: &WalkSpec, a: &[usize]) -> Result<()> {
    if a.is_empty() {
        return Err(Error::InvalidParams("set A must be nonempty".to_string()));
    }
    for (i, &x) in a.iter().enumerate() {
        if x >= spec.kappa() || a[..i].contains(&x) {
            return Err(Error::InvalidParams(format!("bad site {x} in A")));
        }
    }
    Ok(())
}

/// Factored first-step system for P_η[τ_{ξ^y} = τ_{E(A)}], reusable for
/// every target y ∈ A.
pub struct HittingSolver {
    gen: Generator,
    a: Vec<usize>,
    boundary: Vec<usize>,
    sys: Restriction,
    mat: Csr,
    lu: BlockTridiagLu,
}

impl HittingSolver {
    pub fn new(spec: &WalkSpec, params: &ProcessParams, a: &[usize]) -> Result<Self> {
        check_set(spec, a)?;
        let gen = Generator::build(spec, params)?;
        let boundary: Vec<usize> = a.iter().map(|&x| gen.states.condensed_rank(x)).collect();
        let n = gen.size();

        // every unknown state must be able to reach E(A)
        let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            for (j, _) in gen.trans.row(i) {
                incoming[j].push(i);
            }
        }
        let mut reach = vec![false; n];
        let mut queue: Vec<usize> = boundary.clone();
        boundary.iter().for_each(|&b| reach[b] = true);
        while let Some(j) = queue.pop() {
            for &i in &incoming[j] {
                if !reach[i] {
                    reach[i] = true;
                    queue.push(i);
                }
            }
        }
        if let Some(bad) = reach.iter().position(|r| !r) {
            return Err(Error::SolverFailure(format!(
                "E(A) is unreachable from state {}",
                gen.states.unrank(bad)?
            )));
        }

        let mut member = vec![true; n];
        boundary.iter().for_each(|&b| member[b] = false);
        let sys = Restriction::new(&gen, &member, 0);
        let mut t = Vec::new();
        for (li, &i) in sys.global_of.iter().enumerate() {
            t.push((li, li, gen.holding[i]));
            for (j, v) in gen.trans.row(i) {
                let lj = sys.local_of[j];
                if lj != usize::MAX {
                    t.push((li, lj, -v));
                }
            }
        }
        let mat = Csr::from_triplets(sys.len(), sys.len(), t);
        let lu = sys.factor(&mat)?;
        Ok(HittingSolver { gen, a: a.to_vec(), boundary, sys, mat, lu })
    }

    pub fn generator(&self) -> &Generator {
        &self.gen
    }

    /// h(η) for every state in rank order; `y` is a site of A.
    pub fn solve(&self, y: usize) -> Result<Vec<f64>> {
        let yi = self.a.iter().position(|&s| s == y).ok_or(Error::InvalidParams(
            "target site must belong to A".to_string(),
        ))?;
        let target = self.boundary[yi];
        let mut rhs = vec![0.0; self.sys.len()];
        for (li, &i) in self.sys.global_of.iter().enumerate() {
            for (j, v) in self.gen.trans.row(i) {
                if j == target {
                    rhs[li] += v;
                }
            }
        }
        let x = refined_solve(&self.mat, &self.lu, &rhs);
        let mut h = vec![0.0; self.gen.size()];
        h[target] = 1.0;
        for (li, &i) in self.sys.global_of.iter().enumerate() {
            h[i] = x[li];
        }
        // first-step residual in jump-chain form
        let mut worst = 0.0f64;
        for &i in &self.sys.global_of {
            let avg: f64 = self.gen.trans.row(i).map(|(j, v)| v * h[j]).sum::<f64>() / self.gen.holding[i];
            worst = worst.max((h[i] - avg).abs());
        }
        if !(worst <= RESIDUAL_TOL) {
            return Err(Error::SolverFailure(format!("hitting residual {worst:e}")));
        }
        Ok(h)
    }
}

pub fn hitting_probabilities(spec: &WalkSpec, params: &ProcessParams, a: &[usize], y: usize) -> Result<Vec<f64>> {
    HittingSolver::new(spec, params, a)?.solve(y)
}

/// Mean-jump rates r_N^A(ξ^x, ξ^y) between condensed states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRateMatrix {
    pub sites: Vec<usize>,
    pub n: u32,
    pub d: f64,
    /// row-major |A|×|A|, zero diagonal
    pub raw: Vec<f64>,
    /// raw / (d_N N)
    pub normalized: Vec<f64>,
}

impl TraceRateMatrix {
    pub fn from_raw(sites: Vec<usize>, n: u32, d: f64, raw: Vec<f64>) -> Self {
        let normalized = raw.iter().map(|v| v / (d * n as f64)).collect();
        TraceRateMatrix { sites, n, d, raw, normalized }
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    fn idx(&self, x: usize) -> Result<usize> {
        self.sites.iter().position(|&s| s == x).ok_or(Error::DimensionMismatch)
    }

    /// Unscaled rate between sites x and y of A.
    pub fn rate(&self, x: usize, y: usize) -> Result<f64> {
        Ok(self.raw[self.idx(x)? * self.len() + self.idx(y)?])
    }

    pub fn normalized_rate(&self, x: usize, y: usize) -> Result<f64> {
        Ok(self.normalized[self.idx(x)? * self.len() + self.idx(y)?])
    }

    /// Generator of the trace chain (diagonal = minus row sum), row-major.
    pub fn generator(&self) -> Vec<f64> {
        let k = self.len();
        let mut g = self.raw.clone();
        for x in 0..k {
            let s: f64 = (0..k).filter(|&y| y != x).map(|y| g[x * k + y]).sum();
            g[x * k + x] = -s;
        }
        g
    }

    /// Stationary law of the trace chain, aligned with `sites`.
    pub fn stationary(&self) -> Result<Vec<f64>> {
        stationary_of_rates(&self.raw, self.len())
    }
}

/// Stationary vector of a small rate matrix (off-diagonal entries used),
/// by dense solve with one balance equation replaced by normalization.
pub fn stationary_of_rates(rates: &[f64], k: usize) -> Result<Vec<f64>> {
    if k == 1 {
        return Ok(vec![1.0]);
    }
    let mut a = vec![0.0; k * k];
    for y in 0..k {
        for x in 0..k {
            if x != y {
                a[y * k + x] = rates[x * k + y];
                a[y * k + y] -= rates[y * k + x];
            }
        }
    }
    for x in 0..k {
        a[(k - 1) * k + x] = 1.0;
    }
    let mut nu = vec![0.0; k];
    nu[k - 1] = 1.0;
    linalg::dense_solve(a, k, &mut nu)?;
    if nu.iter().any(|v| *v < -1e-12) {
        return Err(Error::SolverFailure("rate matrix has no unique stationary law".to_string()));
    }
    Ok(nu)
}

/// r_N^A(ξ^x, ξ^y) = Σ_{z≠x} N d r(x,z) h_y(ζ_1^{x,z}) with exact h.
pub fn mean_jump_rate_exact(spec: &WalkSpec, params: &ProcessParams, a: &[usize]) -> Result<TraceRateMatrix> {
    let solver = HittingSolver::new(spec, params, a)?;
    mean_jump_rate_with(spec, params, &solver)
}

pub fn mean_jump_rate_with(spec: &WalkSpec, params: &ProcessParams, solver: &HittingSolver) -> Result<TraceRateMatrix> {
    let a = &solver.a;
    let k = a.len();
    let n = params.n;
    let st = &solver.gen.states;
    let nd = n as f64 * params.d;
    let mut raw = vec![0.0; k * k];
    for (yi, &y) in a.iter().enumerate() {
        let h = solver.solve(y)?;
        for (xi, &x) in a.iter().enumerate() {
            if xi == yi {
                continue;
            }
            let mut acc = 0.0;
            for &(z, r) in &spec.graph().out[x] {
                let mut c = vec![0u32; spec.kappa()];
                c[x] = n - 1;
                c[z] += 1;
                acc += nd * r * h[st.rank_counts(&c)];
            }
            raw[xi * k + yi] = acc;
        }
    }
    Ok(TraceRateMatrix::from_raw(a.clone(), n, params.d, raw))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::enumerate_states;
    use crate::walk::Configuration;

    fn sym2() -> WalkSpec {
        WalkSpec::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
    }

    #[test]
    fn symmetric_pair_half() {
        let p = ProcessParams::new(2, 0.1).unwrap();
        let h = hitting_probabilities(&sym2(), &p, &[0, 1], 1).unwrap();
        assert!((h[1] - 0.5).abs() < 1e-15);
        let m = mean_jump_rate_exact(&sym2(), &p, &[0, 1]).unwrap();
        assert!((m.rate(0, 1).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn no_backward_moves_means_certain_hit() {
        let w = WalkSpec::from_rows(vec![vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let p = ProcessParams::new(5, 0.01).unwrap();
        let h = hitting_probabilities(&w, &p, &[0, 1], 1).unwrap();
        let e = enumerate_states(2, 5).unwrap();
        for i in 1..5 {
            let r = e.rank(&Configuration::tube(2, 5, 0, 1, i)).unwrap();
            assert!((h[r] - 1.0).abs() < 1e-14);
        }
        let m = mean_jump_rate_exact(&w, &p, &[0, 1]).unwrap();
        assert!((m.rate(0, 1).unwrap() - 0.05).abs() < 1e-15);
        assert_eq!(m.rate(1, 0).unwrap(), 0.0);
    }

    #[test]
    fn two_site_birth_death_oracle() {
        // gambler's ruin with state-dependent rates, closed form
        let w = WalkSpec::from_rows(vec![vec![0.0, 0.6], vec![0.9, 0.0]]).unwrap();
        let (n, d) = (9u32, 0.2);
        let p = ProcessParams::new(n, d).unwrap();
        let h = hitting_probabilities(&w, &p, &[0, 1], 1).unwrap();
        let e = enumerate_states(2, n).unwrap();
        let up = |i: u32| (n - i) as f64 * (d + i as f64) * 0.6;
        let down = |i: u32| i as f64 * (d + (n - i) as f64) * 0.9;
        let mut prod = vec![1.0];
        for i in 1..n {
            let last = *prod.last().unwrap();
            prod.push(last * down(i) / up(i));
        }
        let total: f64 = prod.iter().sum();
        for i in 1..n {
            let want: f64 = prod[..i as usize].iter().sum::<f64>() / total;
            let r = e.rank(&Configuration::tube(2, n, 0, 1, i)).unwrap();
            assert!((h[r] - want).abs() < 1e-13, "i={i}: {} vs {want}", h[r]);
        }
    }

    #[test]
    fn trace_chain_is_stationary_for_conditioned_measure() {
        let w = WalkSpec::cycle(3, 0.7).unwrap();
        let p = ProcessParams::new(8, 0.05).unwrap();
        let m = mean_jump_rate_exact(&w, &p, &[0, 1, 2]).unwrap();
        let mu = crate::stationary::stationary_exact(&w, &p).unwrap();
        let xi = mu.condensed_masses().unwrap();
        let tot: f64 = xi.iter().sum();
        let nu = m.stationary().unwrap();
        for (a, b) in nu.iter().zip(&xi) {
            assert!((a - b / tot).abs() < 1e-8);
        }
        let g = m.generator();
        for x in 0..3 {
            let s: f64 = g[x * 3..x * 3 + 3].iter().sum();
            assert!(s.abs() < 1e-15);
        }
    }
}
