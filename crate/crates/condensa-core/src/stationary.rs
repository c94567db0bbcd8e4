//! Stationary distributions: direct solve of the balance equations and the
//! product-form closed expression.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::{Generator, Restriction};
use crate::graph;
use crate::linalg::{refined_solve, Csr};
use crate::states::StateEnumeration;
use crate::walk::{analyze_walk, ProcessParams, WalkSpec};

/// A weight per state of H_N, in rank order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub kappa: usize,
    pub n: u32,
    pub weights: Vec<f64>,
    pub normalized: bool,
    /// ln Z for the unnormalized weights this distribution came from.
    pub log_normalizer: f64,
}

impl Distribution {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn enumeration(&self) -> Result<StateEnumeration> {
        StateEnumeration::with_cap(self.kappa, self.n, usize::MAX)
    }

    /// μ(ξ^x) for every site x.
    pub fn condensed_masses(&self) -> Result<Vec<f64>> {
        let e = self.enumeration()?;
        Ok((0..self.kappa).map(|x| self.weights[e.condensed_rank(x)]).collect())
    }

    pub fn max_abs_diff(&self, other: &Distribution) -> Result<f64> {
        if self.kappa != other.kappa || self.n != other.n {
            return Err(Error::DimensionMismatch);
        }
        Ok(self.weights.iter().zip(&other.weights).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }
}

/// ln w_N(n) for n = 0..=N by the recursion w(n+1) = w(n)(n+d)/(n+1).
pub fn log_site_weights(n: u32, d: f64) -> Vec<f64> {
    let mut lw = Vec::with_capacity(n as usize + 1);
    lw.push(0.0);
    for k in 0..n {
        let kf = k as f64;
        let prev = lw[k as usize];
        lw.push(prev + libm::log(kf + d) - libm::log(kf + 1.0));
    }
    lw
}

/// w_N(n) for n = 0..=N.
pub fn site_weights(n: u32, d: f64) -> Vec<f64> {
    let mut w = Vec::with_capacity(n as usize + 1);
    w.push(1.0);
    for k in 0..n as usize {
        w.push(w[k] * (k as f64 + d) / (k as f64 + 1.0));
    }
    w
}

/// ln Σ exp(v) without overflow.
pub fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + libm::log(v.iter().map(|x| libm::exp(x - m)).sum::<f64>())
}

/// μ(η) ∝ Π_x (m(x)/M*)^{η_x} w_N(η_x), valid under reversibility or a
/// uniform walk invariant measure.
pub fn stationary_closed_form(spec: &WalkSpec, params: &ProcessParams) -> Result<Distribution> {
    params.validate()?;
    let a = analyze_walk(spec)?;
    if !(a.rev || a.ui) {
        return Err(Error::ConditionNotSatisfied("closed form needs (Rev) or (UI)"));
    }
    let k = spec.kappa();
    let states = crate::states::enumerate_states(k, params.n)?;
    let lw = log_site_weights(params.n, params.d);
    let lratio: Vec<f64> = a.m.iter().map(|&m| libm::log(m / a.m_star)).collect();
    let mut logw = vec![0.0; states.size()];
    states.for_each(|r, c| {
        logw[r] = c
            .iter()
            .zip(&lratio)
            .map(|(&e, &l)| if e == 0 { 0.0 } else { e as f64 * l + lw[e as usize] })
            .sum();
    });
    let log_z = log_sum_exp(&logw);
    let weights = logw.iter().map(|l| libm::exp(l - log_z)).collect();
    Ok(Distribution { kappa: k, n: params.n, weights, normalized: true, log_normalizer: log_z })
}

const RESIDUAL_TOL: f64 = 1e-10;

/// Unique stationary distribution by direct solve.
///
/// The walk must have a single closed class T; the process then has a single
/// closed class (configurations supported on T) and every other state gets
/// weight zero. The balance equations on that class are solved with
/// μ(ξ^{t}) pinned to 1 for a site t ∈ T, then normalized.
pub fn stationary_exact(spec: &WalkSpec, params: &ProcessParams) -> Result<Distribution> {
    let gen = Generator::build(spec, params)?;
    stationary_from_generator(spec, &gen)
}

pub fn stationary_from_generator(spec: &WalkSpec, gen: &Generator) -> Result<Distribution> {
    let closed = graph::terminal_components(&spec.adjacency());
    if closed.len() != 1 {
        return Err(Error::SolverFailure(format!(
            "walk has {} closed classes, stationary law is not unique",
            closed.len()
        )));
    }
    let class = &closed[0];
    let mut outside = vec![true; spec.kappa()];
    class.iter().for_each(|&x| outside[x] = false);
    let pin_site = class[0];
    let pin = gen.states.condensed_rank(pin_site);
    let member: Vec<bool> = (0..gen.size())
        .map(|i| i != pin && gen.counts(i).iter().zip(&outside).all(|(&c, &o)| !o || c == 0))
        .collect();

    let direct = solve_pinned(gen, &member, pin, pin_site);
    let mut mu = match direct {
        Ok(mu) => mu,
        Err(_) => vec![0.0; gen.size()],
    };
    let in_class = |i: usize| member[i] || i == pin;
    let needs_fallback = {
        let total: f64 = mu.iter().sum();
        !(total > 0.0) || gen.balance_residual(&normalized(&mu)) > RESIDUAL_TOL * gen.max_abs()
    };
    if needs_fallback {
        mu = power_iteration(gen, &in_class)?;
    }
    let mu = normalized(&mu);
    let residual = gen.balance_residual(&mu);
    if residual > RESIDUAL_TOL * gen.max_abs() {
        return Err(Error::SolverFailure(format!("balance residual {residual:e} too large")));
    }
    let log_z = libm::log(mu.iter().sum::<f64>());
    Ok(Distribution {
        kappa: gen.kappa(),
        n: gen.states.n(),
        weights: mu,
        normalized: true,
        log_normalizer: log_z,
    })
}

fn normalized(mu: &[f64]) -> Vec<f64> {
    let s: f64 = mu.iter().sum();
    mu.iter().map(|v| v / s).collect()
}

fn solve_pinned(gen: &Generator, member: &[bool], pin: usize, level_site: usize) -> Result<Vec<f64>> {
    let sys = Restriction::new(gen, member, level_site);
    let mut mu = vec![0.0; gen.size()];
    mu[pin] = 1.0;
    if sys.is_empty() {
        return Ok(mu);
    }
    // transposed balance: Σ_i μ_i Q_ij = 0 for every unknown j
    let mut t = Vec::new();
    let mut rhs = vec![0.0; sys.len()];
    for (lj, &j) in sys.global_of.iter().enumerate() {
        t.push((lj, lj, -gen.holding[j]));
    }
    for i in 0..gen.size() {
        let li = sys.local_of[i];
        if li == usize::MAX && i != pin {
            continue;
        }
        for (j, v) in gen.trans.row(i) {
            let lj = sys.local_of[j];
            if lj == usize::MAX {
                continue;
            }
            if i == pin {
                rhs[lj] -= v;
            } else {
                t.push((lj, li, v));
            }
        }
    }
    let a = Csr::from_triplets(sys.len(), sys.len(), t);
    let lu = sys.factor(&a)?;
    let x = refined_solve(&a, &lu, &rhs);
    let scale = x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for (l, &g) in sys.global_of.iter().enumerate() {
        let v = x[l];
        if v < 0.0 {
            if v < -1e-13 * scale {
                return Err(Error::SolverFailure("negative stationary weight".to_string()));
            }
            mu[g] = 0.0;
        } else {
            mu[g] = v;
        }
    }
    Ok(mu)
}

/// Uniformized power iteration μ ← μ(I + Q/Λ), started uniform on the
/// closed class.
fn power_iteration(gen: &Generator, in_class: &dyn Fn(usize) -> bool) -> Result<Vec<f64>> {
    let n = gen.size();
    let count = (0..n).filter(|&i| in_class(i)).count() as f64;
    let mut mu: Vec<f64> = (0..n).map(|i| if in_class(i) { 1.0 / count } else { 0.0 }).collect();
    let lam = 1.01 * gen.max_abs();
    let mut next = vec![0.0; n];
    for _ in 0..1_000_000 {
        for i in 0..n {
            next[i] = mu[i] * (1.0 - gen.holding[i] / lam);
        }
        for i in 0..n {
            if mu[i] == 0.0 {
                continue;
            }
            for (j, v) in gen.trans.row(i) {
                next[j] += mu[i] * v / lam;
            }
        }
        let delta: f64 = mu.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        core::mem::swap(&mut mu, &mut next);
        if delta <= 1e-13 {
            return Ok(mu);
        }
    }
    Err(Error::SolverFailure("power iteration did not converge".to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym2() -> WalkSpec {
        WalkSpec::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
    }

    #[test]
    fn two_site_symmetric_by_hand() {
        // 0.2 μ(2,0) = 1.1 μ(1,1) and symmetry
        let p = ProcessParams::new(2, 0.1).unwrap();
        let mu = stationary_exact(&sym2(), &p).unwrap();
        let want = [11.0 / 24.0, 1.0 / 12.0, 11.0 / 24.0];
        for (a, b) in mu.weights.iter().zip(want) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }
    }

    #[test]
    fn site_weight_values() {
        let w = site_weights(2, 0.1);
        assert_eq!(w[0], 1.0);
        assert!((w[1] - 0.1).abs() < 1e-16);
        assert!((w[2] - 0.055).abs() < 1e-16);
        let lw = log_site_weights(2, 0.1);
        assert!((libm::exp(lw[2]) - 0.055).abs() < 1e-16);
    }

    #[test]
    fn closed_form_two_site() {
        let p = ProcessParams::new(2, 0.1).unwrap();
        let mu = stationary_closed_form(&sym2(), &p).unwrap();
        assert!((libm::exp(mu.log_normalizer) - 0.12).abs() < 1e-15);
        let z = libm::exp(mu.log_normalizer);
        let un: Vec<f64> = mu.weights.iter().map(|v| v * z).collect();
        for (a, b) in un.iter().zip([0.055, 0.01, 0.055]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn closed_form_needs_condition() {
        // non-reversible with non-uniform invariant measure
        let w = WalkSpec::from_rows(vec![
            vec![0.0, 2.0, 1.0],
            vec![1.0, 0.0, 3.0],
            vec![1.0, 1.0, 0.0],
        ])
        .unwrap();
        let p = ProcessParams::new(3, 0.1).unwrap();
        assert!(matches!(stationary_closed_form(&w, &p), Err(Error::ConditionNotSatisfied(_))));
    }

    #[test]
    fn totally_asymmetric_pair_condenses_on_sink() {
        let w = WalkSpec::from_rows(vec![vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let p = ProcessParams::new(10, 1e-6).unwrap();
        let mu = stationary_exact(&w, &p).unwrap();
        assert!(mu.condensed_masses().unwrap()[1] > 0.99);
    }

    #[test]
    fn reversible_closed_form_matches_solve() {
        let w = WalkSpec::from_rows(vec![vec![0.0, 2.0], vec![1.0, 0.0]]).unwrap();
        let p = ProcessParams::new(12, 0.05).unwrap();
        let a = stationary_exact(&w, &p).unwrap();
        let b = stationary_closed_form(&w, &p).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < 1e-12);
    }
}
