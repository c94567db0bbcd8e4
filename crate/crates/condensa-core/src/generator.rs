//! The full generator of the inclusion process on H_N, and the
//! bookkeeping for solving linear systems restricted to a subset of states.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Result;
use crate::linalg::{BlockTridiagLu, Csr};
use crate::states::{StateEnumeration, DEFAULT_STATE_CAP};
use crate::walk::{move_rate, ProcessParams, WalkSpec};

/// Off-diagonal rates in CSR form (row = source state) plus holding rates.
#[derive(Clone, Debug)]
pub struct Generator {
    pub states: StateEnumeration,
    /// flat counts, `size × κ`
    counts: Vec<u32>,
    pub trans: Csr,
    pub holding: Vec<f64>,
}

impl Generator {
    pub fn build(spec: &WalkSpec, params: &ProcessParams) -> Result<Self> {
        Self::build_with_cap(spec, params, DEFAULT_STATE_CAP)
    }

    pub fn build_with_cap(spec: &WalkSpec, params: &ProcessParams, cap: usize) -> Result<Self> {
        params.validate()?;
        let k = spec.kappa();
        let states = StateEnumeration::with_cap(k, params.n, cap)?;
        let size = states.size();
        let mut counts = Vec::with_capacity(size * k);
        states.for_each(|_, c| counts.extend_from_slice(c));

        let mut indptr = Vec::with_capacity(size + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        let mut holding = vec![0.0; size];
        let mut work = vec![0u32; k];
        indptr.push(0);
        for i in 0..size {
            let c = &counts[i * k..(i + 1) * k];
            let mut row: Vec<(usize, f64)> = Vec::new();
            for x in 0..k {
                if c[x] == 0 {
                    continue;
                }
                for &(y, r) in &spec.graph().out[x] {
                    let rate = move_rate(c[x], c[y], params.d, r);
                    work.copy_from_slice(c);
                    work[x] -= 1;
                    work[y] += 1;
                    row.push((states.rank_counts(&work), rate));
                    holding[i] += rate;
                }
            }
            row.sort_by_key(|e| e.0);
            for (j, v) in row {
                indices.push(j);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        let trans = Csr { rows: size, cols: size, indptr, indices, values };
        Ok(Generator { states, counts, trans, holding })
    }

    pub fn size(&self) -> usize {
        self.states.size()
    }

    pub fn kappa(&self) -> usize {
        self.states.kappa()
    }

    #[inline]
    pub fn counts(&self, i: usize) -> &[u32] {
        let k = self.kappa();
        &self.counts[i * k..(i + 1) * k]
    }

    /// max |Q_ij| = the largest holding rate.
    pub fn max_abs(&self) -> f64 {
        self.holding.iter().copied().fold(0.0, f64::max)
    }

    /// ‖μᵀQ‖_∞.
    pub fn balance_residual(&self, mu: &[f64]) -> f64 {
        let mut flux = vec![0.0; self.size()];
        for i in 0..self.size() {
            for (j, v) in self.trans.row(i) {
                flux[j] += mu[i] * v;
            }
        }
        flux.iter()
            .zip(mu)
            .zip(&self.holding)
            .map(|((f, m), h)| (f - m * h).abs())
            .fold(0.0, f64::max)
    }
}

/// Ordering of a subset of states into contiguous blocks by the particle
/// count at one site, so that restricted generators are block tridiagonal.
#[derive(Clone, Debug)]
pub struct Restriction {
    pub global_of: Vec<usize>,
    /// `usize::MAX` for states outside the subset
    pub local_of: Vec<usize>,
    pub starts: Vec<usize>,
}

impl Restriction {
    pub fn new(gen: &Generator, member: &[bool], level_site: usize) -> Self {
        let mut global_of: Vec<usize> = (0..gen.size()).filter(|&i| member[i]).collect();
        global_of.sort_by_key(|&i| (core::cmp::Reverse(gen.counts(i)[level_site]), i));
        let mut local_of = vec![usize::MAX; gen.size()];
        for (l, &g) in global_of.iter().enumerate() {
            local_of[g] = l;
        }
        let mut starts = vec![0];
        for l in 1..global_of.len() {
            if gen.counts(global_of[l])[level_site] != gen.counts(global_of[l - 1])[level_site] {
                starts.push(l);
            }
        }
        starts.push(global_of.len());
        Restriction { global_of, local_of, starts }
    }

    pub fn len(&self) -> usize {
        self.global_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.global_of.is_empty()
    }

    pub fn factor(&self, a: &Csr) -> Result<BlockTridiagLu> {
        BlockTridiagLu::factor(a, &self.starts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::Configuration;

    #[test]
    fn rows_match_local_kinetics() {
        let w = WalkSpec::cycle(3, 0.7).unwrap();
        let p = ProcessParams::new(6, 0.05).unwrap();
        let g = Generator::build(&w, &p).unwrap();
        for i in 0..g.size() {
            let eta = Configuration::new(g.counts(i).to_vec());
            let k = crate::walk::local_kinetics(&w, &p, &eta).unwrap();
            assert!((k.holding - g.holding[i]).abs() < 1e-13);
            let rs: f64 = g.trans.row(i).map(|(_, v)| v).sum();
            assert!((rs - g.holding[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn restriction_blocks_are_contiguous_levels() {
        let w = WalkSpec::cycle(3, 0.7).unwrap();
        let p = ProcessParams::new(4, 0.05).unwrap();
        let g = Generator::build(&w, &p).unwrap();
        let member = vec![true; g.size()];
        let r = Restriction::new(&g, &member, 1);
        assert_eq!(r.starts.len(), 6);
        for b in 0..5 {
            let lvl = g.counts(r.global_of[r.starts[b]])[1];
            for l in r.starts[b]..r.starts[b + 1] {
                assert_eq!(g.counts(r.global_of[l])[1], lvl);
            }
        }
    }
}
