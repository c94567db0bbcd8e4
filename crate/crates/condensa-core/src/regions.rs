//! R-tubes, inner and outer cores, slices, flows between slices and the
//! m-function.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stationary::Distribution;
use crate::walk::{move_rate, ProcessParams, WalkAnalysis, WalkSpec};

/// Region queries for a fixed R ⊆ S, N and ε. Membership is decided from
/// the counts; [`RegionSpec::index`] materializes the index sets.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionSpec {
    kappa: usize,
    n: u32,
    eps: f64,
    r: Vec<usize>,
    in_r: Vec<bool>,
    threshold: u32,
    // r(x,y) > 0 for x, y ∈ R, row-major κ×κ
    positive: Vec<bool>,
}

/// ⌊ε log N⌋.
pub fn core_threshold(n: u32, eps: f64) -> u32 {
    libm::floor(eps * libm::log(n as f64)) as u32
}

impl RegionSpec {
    pub fn new(spec: &WalkSpec, n: u32, r: &[usize], eps: f64) -> Result<Self> {
        let kappa = spec.kappa();
        if r.is_empty() || !(eps > 0.0) || n == 0 {
            return Err(Error::InvalidParams("R nonempty, ε > 0 and N ≥ 1 required".to_string()));
        }
        let mut in_r = vec![false; kappa];
        for &x in r {
            if x >= kappa || in_r[x] {
                return Err(Error::InvalidParams(format!("bad site {x} in R")));
            }
            in_r[x] = true;
        }
        let mut sorted = r.to_vec();
        sorted.sort_unstable();
        let positive = (0..kappa * kappa).map(|i| spec.rate(i / kappa, i % kappa) > 0.0).collect();
        Ok(RegionSpec { kappa, n, eps, r: sorted, in_r, threshold: core_threshold(n, eps), positive })
    }

    pub fn sites(&self) -> &[usize] {
        &self.r
    }

    pub fn threshold(&self) -> u32 {
        self.threshold
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// A_N^R: no particles off R.
    pub fn in_tube(&self, c: &[u32]) -> bool {
        c.iter().zip(&self.in_r).all(|(&v, &inr)| inr || v == 0)
    }

    /// ∂A_N^R: in the tube with some site of R empty.
    pub fn in_tube_boundary(&self, c: &[u32]) -> bool {
        self.in_tube(c) && self.r.iter().any(|&x| c[x] == 0)
    }

    fn min_on_r(&self, c: &[u32]) -> u32 {
        self.r.iter().map(|&x| c[x]).min().unwrap_or(0)
    }

    /// I_N^R: in the tube, every site of R above the threshold.
    pub fn in_inner_core(&self, c: &[u32]) -> bool {
        self.in_tube(c) && self.min_on_r(c) > self.threshold
    }

    /// O_N^R: in the tube, all sites of R occupied, some at or below the threshold.
    pub fn in_outer_core(&self, c: &[u32]) -> bool {
        self.in_tube(c) && {
            let m = self.min_on_r(c);
            m > 0 && m <= self.threshold
        }
    }

    /// ∂I_N^R: tube states outside I reachable in one positive-rate move from I.
    pub fn in_core_boundary(&self, c: &[u32]) -> bool {
        if !self.in_tube(c) || self.min_on_r(c) > self.threshold {
            return false;
        }
        // η = σ^{x,y}ζ with ζ ∈ I, i.e. ζ = η with one particle moved back y → x
        let t = self.threshold;
        let k = self.kappa;
        for &x in &self.r {
            for &y in &self.r {
                if x == y || !self.positive[x * k + y] || c[y] == 0 {
                    continue;
                }
                let ok = self.r.iter().all(|&z| {
                    let v = if z == x { c[z] + 1 } else if z == y { c[z] - 1 } else { c[z] };
                    v > t
                });
                if ok {
                    return true;
                }
            }
        }
        false
    }

    /// Closure of I_N^R.
    pub fn in_closure(&self, c: &[u32]) -> bool {
        self.in_inner_core(c) || self.in_core_boundary(c)
    }

    /// C_N^R(x,k).
    pub fn in_slice(&self, c: &[u32], x: usize, k: u32) -> bool {
        self.in_tube(c) && c[x] == k
    }

    /// E_N(R): all particles on one site of R.
    pub fn in_condensed(&self, c: &[u32]) -> bool {
        self.r.iter().any(|&x| c[x] == self.n)
    }

    pub fn index(&self, mu_or_states: &crate::states::StateEnumeration) -> RegionIndex {
        let mut ix = RegionIndex::default();
        mu_or_states.for_each(|i, c| {
            if self.in_tube(c) {
                ix.tube.push(i);
            }
            if self.in_tube_boundary(c) {
                ix.tube_boundary.push(i);
            }
            if self.in_outer_core(c) {
                ix.outer_core.push(i);
            }
            if self.in_inner_core(c) {
                ix.inner_core.push(i);
            }
            if self.in_core_boundary(c) {
                ix.core_boundary.push(i);
            }
            if self.in_condensed(c) {
                ix.condensed.push(i);
            }
        });
        ix
    }
}

/// Materialized index sets (ranks) of the main regions.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RegionIndex {
    pub tube: Vec<usize>,
    pub tube_boundary: Vec<usize>,
    pub outer_core: Vec<usize>,
    pub inner_core: Vec<usize>,
    pub core_boundary: Vec<usize>,
    pub condensed: Vec<usize>,
}

/// B_N^k: at most k occupied sites.
pub fn in_b(c: &[u32], k: usize) -> bool {
    c.iter().filter(|&&v| v > 0).count() <= k
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassReport {
    /// μ(E_N) over all of S
    pub condensed: f64,
    /// μ(ξ^x) for every site
    pub condensed_site: Vec<f64>,
    pub tube: f64,
    pub tube_boundary: f64,
    pub outer_core: f64,
    pub inner_core: f64,
    pub core_boundary: f64,
    /// `slices[i][k]` = μ(C_N^R(x,k)) for x = R[i], k = 0..=N
    pub slices: Vec<Vec<f64>>,
    /// μ(B^k), k = 1..=κ
    pub b: Vec<f64>,
    /// μ(B^ℓ)/μ(B^{ℓ−1}), ℓ = 2..=κ
    pub b_ratios: Vec<f64>,
}

pub fn region_masses(mu: &Distribution, region: &RegionSpec) -> Result<MassReport> {
    if mu.kappa != region.kappa || mu.n != region.n {
        return Err(Error::DimensionMismatch);
    }
    let states = mu.enumeration()?;
    let n = mu.n;
    let kappa = mu.kappa;
    let mut rep = MassReport {
        condensed: 0.0,
        condensed_site: vec![0.0; kappa],
        tube: 0.0,
        tube_boundary: 0.0,
        outer_core: 0.0,
        inner_core: 0.0,
        core_boundary: 0.0,
        slices: vec![vec![0.0; n as usize + 1]; region.r.len()],
        b: vec![0.0; kappa],
        b_ratios: Vec::new(),
    };
    states.for_each(|i, c| {
        let w = mu.weights[i];
        if let Some(x) = c.iter().position(|&v| v == n) {
            rep.condensed += w;
            rep.condensed_site[x] += w;
        }
        let occupied = c.iter().filter(|&&v| v > 0).count();
        for k in occupied..=kappa {
            rep.b[k - 1] += w;
        }
        if region.in_tube(c) {
            rep.tube += w;
            for (ri, &x) in region.r.iter().enumerate() {
                rep.slices[ri][c[x] as usize] += w;
            }
            if region.in_tube_boundary(c) {
                rep.tube_boundary += w;
            } else if region.in_inner_core(c) {
                rep.inner_core += w;
            } else {
                rep.outer_core += w;
            }
            if region.in_core_boundary(c) {
                rep.core_boundary += w;
            }
        }
    });
    rep.b_ratios = (1..kappa).map(|l| rep.b[l] / rep.b[l - 1]).collect();
    Ok(rep)
}

/// F_N^R(x; k→k+1) and F_N^R(x; k+1→k).
pub fn flow(
    spec: &WalkSpec,
    params: &ProcessParams,
    mu: &Distribution,
    region: &RegionSpec,
    x: usize,
    k: u32,
) -> Result<(f64, f64)> {
    let table = flow_table(spec, params, mu, region)?;
    let xi = region.r.iter().position(|&s| s == x).ok_or(Error::DimensionMismatch)?;
    if k >= params.n {
        return Err(Error::OutOfRange("slice index must be below N"));
    }
    Ok(table[xi][k as usize])
}

/// Every (F_up, F_down) pair: `table[i][k]` for x = R[i], k = 0..N.
pub fn flow_table(
    spec: &WalkSpec,
    params: &ProcessParams,
    mu: &Distribution,
    region: &RegionSpec,
) -> Result<Vec<Vec<(f64, f64)>>> {
    if mu.kappa != spec.kappa() || mu.n != params.n || region.kappa != spec.kappa() || region.n != params.n {
        return Err(Error::DimensionMismatch);
    }
    let states = mu.enumeration()?;
    let n = params.n as usize;
    let mut table = vec![vec![(0.0, 0.0); n]; region.r.len()];
    states.for_each(|i, c| {
        if !region.in_tube(c) {
            return;
        }
        let w = mu.weights[i];
        for (ri, &x) in region.r.iter().enumerate() {
            let k = c[x] as usize;
            for &y in &region.r {
                if y == x {
                    continue;
                }
                // up: y → x raises η_x from k to k+1
                if c[y] > 0 && k < n {
                    let r = spec.rate(y, x);
                    if r > 0.0 {
                        table[ri][k].0 += w * move_rate(c[y], c[x], params.d, r);
                    }
                }
                // down: x → y lowers η_x from k to k−1
                if k > 0 {
                    let r = spec.rate(x, y);
                    if r > 0.0 {
                        table[ri][k - 1].1 += w * move_rate(c[x], c[y], params.d, r);
                    }
                }
            }
        }
    });
    Ok(table)
}

/// Constants controlling the choice of ε: C₀ = max(C₁, C₂) and whether
/// C₀^{⌊ε log N⌋} ≤ N.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonCheck {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub threshold: u32,
    pub ok: bool,
}

/// Slice ratio bound R₂(k+d)(N−k) / (R₁(k+1)(N−k−1+d)).
pub fn slice_ratio_bound(a: &WalkAnalysis, n: u32, d: f64, k: u32) -> f64 {
    let (nf, kf) = (n as f64, k as f64);
    a.r2 * (kf + d) * (nf - kf) / (a.r1 * (kf + 1.0) * (nf - kf - 1.0 + d))
}

pub fn epsilon_check(a: &WalkAnalysis, n: u32, d: f64, eps: f64) -> EpsilonCheck {
    let nf = n as f64;
    let c1 = a.r2 * nf / (a.r1 * (nf - 1.0 + d));
    let c2 = (1..n.saturating_sub(1)).map(|k| slice_ratio_bound(a, n, d, k)).fold(0.0, f64::max);
    let c0 = c1.max(c2);
    let threshold = core_threshold(n, eps);
    let ok = libm::pow(c0, threshold as f64) <= nf;
    EpsilonCheck { c0, c1, c2, threshold, ok }
}

/// Measured slice ratios μ(C(x,k+1))/μ(C(x,k)) against the bound, R = S.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceBoundReport {
    /// worst measured/bound over all x and k with μ(C(x,k)) > 0
    pub worst_ratio: f64,
    pub holds: bool,
    /// max over x of μ(C(x,1)) / (d μ(C(x,0)))
    pub first_slice_constant: f64,
}

pub fn slice_bound_report(
    spec: &WalkSpec,
    a: &WalkAnalysis,
    params: &ProcessParams,
    mu: &Distribution,
) -> Result<SliceBoundReport> {
    let all: Vec<usize> = (0..spec.kappa()).collect();
    let region = RegionSpec::new(spec, params.n, &all, 0.1)?;
    let masses = region_masses(mu, &region)?;
    let mut worst = 0.0f64;
    let mut first = 0.0f64;
    for slice in &masses.slices {
        for k in 0..params.n {
            let (lo, hi) = (slice[k as usize], slice[k as usize + 1]);
            if lo > 0.0 {
                worst = worst.max(hi / lo / slice_ratio_bound(a, params.n, params.d, k));
            }
        }
        if slice[0] > 0.0 {
            first = first.max(slice[1] / (params.d * slice[0]));
        }
    }
    Ok(SliceBoundReport { worst_ratio: worst, holds: worst <= 1.0 + 1e-12, first_slice_constant: first })
}

/// m^R(η) = μ(η) Π_{x∈R} η_x for every state (zero whenever a site of R is empty).
pub fn m_function(mu: &Distribution, r: &[usize]) -> Result<Vec<f64>> {
    if r.iter().any(|&x| x >= mu.kappa) {
        return Err(Error::DimensionMismatch);
    }
    let states = mu.enumeration()?;
    let mut out = vec![0.0; mu.len()];
    states.for_each(|i, c| {
        out[i] = r.iter().fold(mu.weights[i], |acc, &x| acc * c[x] as f64);
    });
    Ok(out)
}

/// m^R restricted to the closure of I_N^R, zero elsewhere.
pub fn m_function_on_closure(mu: &Distribution, region: &RegionSpec) -> Result<Vec<f64>> {
    let mut m = m_function(mu, &region.r)?;
    let states = mu.enumeration()?;
    states.for_each(|i, c| {
        if !region.in_closure(c) {
            m[i] = 0.0;
        }
    });
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stationary::stationary_exact;
    use crate::states::enumerate_states;
    use crate::walk::analyze_walk;

    fn sym2() -> WalkSpec {
        WalkSpec::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
    }

    #[test]
    fn two_site_masses_and_flow() {
        let w = sym2();
        let p = ProcessParams::new(2, 0.1).unwrap();
        let mu = stationary_exact(&w, &p).unwrap();
        let reg = RegionSpec::new(&w, 2, &[0, 1], 0.1).unwrap();
        let rep = region_masses(&mu, &reg).unwrap();
        assert!((rep.condensed - 22.0 / 24.0).abs() < 1e-14);
        assert!((rep.b[0] - rep.condensed).abs() < 1e-15);
        assert!((rep.b[1] - 1.0).abs() < 1e-14);
        let (up, down) = flow(&w, &p, &mu, &reg, 0, 0).unwrap();
        assert!((up - 11.0 / 120.0).abs() < 1e-15 && (down - 11.0 / 120.0).abs() < 1e-15);
        let m = m_function(&mu, &[0, 1]).unwrap();
        assert!((m[1] - 1.0 / 12.0).abs() < 1e-15);
        assert_eq!(m[0], 0.0);
        assert_eq!(m[2], 0.0);
    }

    #[test]
    fn tube_decomposes() {
        let w = WalkSpec::cycle(4, 0.6).unwrap();
        let n = 12;
        let reg = RegionSpec::new(&w, n, &[0, 2, 3], 0.9).unwrap();
        assert_eq!(reg.threshold(), 2);
        let e = enumerate_states(4, n).unwrap();
        e.for_each(|_, c| {
            let parts = [reg.in_tube_boundary(c), reg.in_outer_core(c), reg.in_inner_core(c)];
            let hits = parts.iter().filter(|&&b| b).count();
            assert_eq!(hits, usize::from(reg.in_tube(c)), "{c:?}");
            if reg.in_slice(c, 0, n) {
                assert_eq!(c[0], n);
            }
            // C(x,0) = A^{R∖{x}}
            let smaller = RegionSpec::new(&w, n, &[2, 3], 0.9).unwrap();
            assert_eq!(reg.in_slice(c, 0, 0), smaller.in_tube(c));
            if reg.in_core_boundary(c) {
                assert!(!reg.in_inner_core(c));
            }
        });
    }

    #[test]
    fn flows_balance_and_slices_bounded() {
        let w = WalkSpec::from_rows(vec![
            vec![0.0, 0.7, 0.2],
            vec![0.4, 0.0, 0.5],
            vec![0.3, 0.6, 0.0],
        ])
        .unwrap();
        let a = analyze_walk(&w).unwrap();
        let p = ProcessParams::new(15, 1e-3).unwrap();
        let mu = stationary_exact(&w, &p).unwrap();
        let reg = RegionSpec::new(&w, 15, &[0, 1, 2], 0.1).unwrap();
        for row in flow_table(&w, &p, &mu, &reg).unwrap() {
            for (up, down) in row {
                assert!((up - down).abs() <= 1e-12 * up.max(1e-300).max(1.0));
            }
        }
        let rep = slice_bound_report(&w, &a, &p, &mu).unwrap();
        assert!(rep.holds, "{rep:?}");
        assert!(rep.first_slice_constant.is_finite());
        let eps = epsilon_check(&a, 15, 1e-3, 0.1);
        assert_eq!(eps.threshold, 0);
        assert!(eps.ok);
    }
}
