//! Ranked enumeration of H_N = {η ∈ ℕ^κ : Σ η_x = N}.
//!
//! Order is lexicographic with larger counts first, so for κ=2, N=2 the
//! states are (2,0), (1,1), (0,2). All states sharing η_0 are contiguous.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::walk::Configuration;

pub const DEFAULT_STATE_CAP: usize = 500_000;

/// Number of configurations of n particles on k sites, C(n+k-1, k-1), exact.
pub fn count_states(kappa: usize, n: u32) -> u128 {
    let k = kappa as u128 - 1;
    let mut c: u128 = 1;
    for i in 1..=k {
        // C(n+i, i) = C(n+i-1, i-1) (n+i) / i, stays integral
        c = c.saturating_mul(n as u128 + i) / i;
    }
    c
}

#[derive(Clone, Debug)]
pub struct StateEnumeration {
    kappa: usize,
    n: u32,
    size: usize,
    // cnt[s][m] = configurations of m particles on s sites, s ≤ κ
    cnt: Vec<Vec<usize>>,
}

pub fn enumerate_states(kappa: usize, n: u32) -> Result<StateEnumeration> {
    StateEnumeration::with_cap(kappa, n, DEFAULT_STATE_CAP)
}

impl StateEnumeration {
    pub fn with_cap(kappa: usize, n: u32, cap: usize) -> Result<Self> {
        if kappa < 2 || n < 1 {
            return Err(Error::OutOfRange("enumeration needs κ ≥ 2 and N ≥ 1"));
        }
        let size = count_states(kappa, n);
        if size > cap as u128 {
            return Err(Error::StateSpaceTooLarge { size });
        }
        let nn = n as usize;
        let mut cnt = vec![vec![0usize; nn + 1]; kappa + 1];
        cnt[1].iter_mut().for_each(|c| *c = 1);
        for s in 2..=kappa {
            let mut acc = 0;
            for m in 0..=nn {
                acc += cnt[s - 1][m];
                cnt[s][m] = acc;
            }
        }
        Ok(StateEnumeration { kappa, n, size: size as usize, cnt })
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Rank from raw counts; the caller guarantees membership in H_N.
    #[inline]
    pub fn rank_counts(&self, counts: &[u32]) -> usize {
        let mut left = self.n as usize;
        let mut r = 0;
        for x in 0..self.kappa - 1 {
            let c = counts[x] as usize;
            // states with a larger count at x come first
            if left > c {
                r += self.cnt[self.kappa - x][left - c - 1];
            }
            left -= c;
        }
        r
    }

    pub fn rank(&self, eta: &Configuration) -> Result<usize> {
        eta.check(self.kappa, self.n)?;
        Ok(self.rank_counts(&eta.counts))
    }

    pub fn unrank_into(&self, mut r: usize, counts: &mut [u32]) {
        let mut left = self.n as usize;
        for x in 0..self.kappa - 1 {
            let rest = self.kappa - x - 1;
            let mut v = left;
            loop {
                let block = self.cnt[rest][left - v];
                if r < block {
                    break;
                }
                r -= block;
                v -= 1;
            }
            counts[x] = v as u32;
            left -= v;
        }
        counts[self.kappa - 1] = left as u32;
    }

    pub fn unrank(&self, r: usize) -> Result<Configuration> {
        if r >= self.size {
            return Err(Error::OutOfRange("rank beyond the state space"));
        }
        let mut counts = vec![0; self.kappa];
        self.unrank_into(r, &mut counts);
        Ok(Configuration::new(counts))
    }

    /// Index of ξ^x.
    pub fn condensed_rank(&self, x: usize) -> usize {
        let mut c = vec![0; self.kappa];
        c[x] = self.n;
        self.rank_counts(&c)
    }

    /// Visits every state in rank order with its counts.
    pub fn for_each<F: FnMut(usize, &[u32])>(&self, mut f: F) {
        let k = self.kappa;
        let mut c = vec![0u32; k];
        c[0] = self.n;
        for r in 0..self.size {
            f(r, &c);
            if r + 1 == self.size {
                break;
            }
            // successor in descending lexicographic order
            let i = (0..k - 1).rev().find(|&i| c[i] > 0).expect("not the last state");
            let tail: u32 = c[i + 1..].iter().sum();
            c[i] -= 1;
            c[i + 1..].iter_mut().for_each(|v| *v = 0);
            c[i + 1] = tail + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sizes() {
        assert_eq!(enumerate_states(2, 2).unwrap().size(), 3);
        assert_eq!(enumerate_states(3, 2).unwrap().size(), 6);
        assert_eq!(count_states(3, 200), 20301);
        let e = enumerate_states(2, 2).unwrap();
        let all: Vec<Vec<u32>> = (0..3).map(|r| e.unrank(r).unwrap().counts).collect();
        assert_eq!(all, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
    }

    #[test]
    fn cap_enforced() {
        match StateEnumeration::with_cap(4, 200, 500_000) {
            Err(Error::StateSpaceTooLarge { size }) => assert_eq!(size, count_states(4, 200)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn iteration_matches_rank() {
        for (k, n) in [(2, 5), (3, 7), (4, 6), (5, 3)] {
            let e = enumerate_states(k, n).unwrap();
            let mut seen = 0;
            let mut prev: Option<Vec<u32>> = None;
            e.for_each(|r, c| {
                assert_eq!(e.rank_counts(c), r);
                assert_eq!(c.iter().sum::<u32>(), n);
                if let Some(p) = &prev {
                    assert!(p.as_slice() > c, "order must be descending");
                }
                prev = Some(c.to_vec());
                seen += 1;
            });
            assert_eq!(seen, e.size());
        }
    }
}
