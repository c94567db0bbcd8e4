//! Reciprocal sums S_{n,k} = Σ_{m=1}^{n−k+1} S_{n−m,k−1}/m, S_{n,1} = 1/n.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest n evaluated in exact rational arithmetic.
pub const EXACT_LIMIT: usize = 300;

#[derive(Clone, Debug, PartialEq)]
pub struct ReciprocalSum {
    pub n: usize,
    pub k: usize,
    /// exact value when n ≤ 300
    pub exact: Option<BigRational>,
    pub value: f64,
    /// (3 log(n+1))^{k−1} / n
    pub bound: f64,
    pub holds: bool,
}

/// Summary row without the big rational, for reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReciprocalRow {
    pub n: usize,
    pub k: usize,
    pub value: f64,
    pub bound: f64,
    pub holds: bool,
}

impl From<&ReciprocalSum> for ReciprocalRow {
    fn from(s: &ReciprocalSum) -> Self {
        ReciprocalRow { n: s.n, k: s.k, value: s.value, bound: s.bound, holds: s.holds }
    }
}

fn check_range(n: usize, k: usize) -> Result<()> {
    if k < 1 || n < k {
        return Err(Error::OutOfRange("need n ≥ k ≥ 1"));
    }
    if n > 10_000 || k > 8 {
        return Err(Error::OutOfRange("n ≤ 10⁴ and k ≤ 8"));
    }
    Ok(())
}

fn bound_power(n: usize, k: usize) -> f64 {
    libm::pow(3.0 * libm::log((n + 1) as f64), (k - 1) as f64)
}

pub fn reciprocal_sum(n: usize, k: usize) -> Result<ReciprocalSum> {
    check_range(n, k)?;
    Ok(reciprocal_table(n, k)?.entry(n, k))
}

/// All S_{n',k'} for k' ≤ k and k' ≤ n' ≤ n.
pub struct ReciprocalTable {
    k_max: usize,
    n_max: usize,
    // rows[k'-1][n'] ; entries with n' < k' are zero
    exact: Option<Vec<Vec<BigRational>>>,
    float: Vec<Vec<f64>>,
}

impl ReciprocalTable {
    pub fn get(&self, n: usize, k: usize) -> Result<ReciprocalSum> {
        if k < 1 || n < k || k > self.k_max || n > self.n_max {
            return Err(Error::OutOfRange("entry outside the table"));
        }
        Ok(self.entry(n, k))
    }

    fn entry(&self, n: usize, k: usize) -> ReciprocalSum {
        let power = bound_power(n, k);
        let bound = power / n as f64;
        match &self.exact {
            Some(rows) => {
                let s = rows[k - 1][n].clone();
                // compare n·S with the power so that k = 1 is an exact equality
                let scaled = (&s * BigRational::from_integer(BigInt::from(n))).to_f64().unwrap_or(f64::INFINITY);
                let value = s.to_f64().unwrap_or(f64::NAN);
                ReciprocalSum { n, k, exact: Some(s), value, bound, holds: scaled <= power }
            }
            None => {
                let value = self.float[k - 1][n];
                ReciprocalSum { n, k, exact: None, value, bound, holds: value * n as f64 <= power * (1.0 + 1e-12) }
            }
        }
    }

    /// Every entry with n' ≥ k'.
    pub fn rows(&self) -> Vec<ReciprocalRow> {
        let mut out = Vec::new();
        for k in 1..=self.k_max {
            for n in k..=self.n_max {
                out.push(ReciprocalRow::from(&self.entry(n, k)));
            }
        }
        out
    }
}

pub fn reciprocal_table(n_max: usize, k_max: usize) -> Result<ReciprocalTable> {
    check_range(n_max.max(k_max), k_max)?;
    let mut float = vec![vec![0.0f64; n_max + 1]; k_max];
    for n in 1..=n_max {
        float[0][n] = 1.0 / n as f64;
    }
    for k in 2..=k_max {
        for n in k..=n_max {
            float[k - 1][n] = (1..=n - k + 1).map(|m| float[k - 2][n - m] / m as f64).sum();
        }
    }
    let exact = (n_max <= EXACT_LIMIT).then(|| exact_rows(n_max, k_max));
    Ok(ReciprocalTable { k_max, n_max, exact, float })
}

/// Exact rows by the same recursion on integers: with L = lcm(1..n_max),
/// T_{n,k} = L^k S_{n,k} is integral and T_{n,k} = Σ_m T_{n−m,k−1} (L/m).
fn exact_rows(n_max: usize, k_max: usize) -> Vec<Vec<BigRational>> {
    let mut l = BigInt::one();
    for m in 2..=n_max {
        let mb = BigInt::from(m);
        let g = num_integer_gcd(&l, &mb);
        l = l * mb / g;
    }
    let l_over: Vec<BigInt> =
        (0..=n_max).map(|m| if m == 0 { BigInt::zero() } else { &l / BigInt::from(m) }).collect();
    let mut t = vec![vec![BigInt::zero(); n_max + 1]; k_max];
    t[0][1..].clone_from_slice(&l_over[1..]);
    for k in 2..=k_max {
        for n in k..=n_max {
            let mut acc = BigInt::zero();
            for m in 1..=n - k + 1 {
                acc += &t[k - 2][n - m] * &l_over[m];
            }
            t[k - 1][n] = acc;
        }
    }
    let mut denom = BigInt::one();
    t.into_iter()
        .map(|row| {
            denom *= &l;
            row.into_iter().map(|v| BigRational::new(v, denom.clone())).collect()
        })
        .collect()
}

fn num_integer_gcd(a: &BigInt, b: &BigInt) -> BigInt {
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_zero() {
        let r = &a % &b;
        a = b;
        b = r;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frac(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn spot_values() {
        assert_eq!(reciprocal_sum(3, 2).unwrap().exact.unwrap(), frac(1, 1));
        assert_eq!(reciprocal_sum(4, 2).unwrap().exact.unwrap(), frac(11, 12));
        for n in 1..20 {
            assert_eq!(reciprocal_sum(n, 1).unwrap().exact.unwrap(), frac(1, n as i64));
        }
    }

    #[test]
    fn ranges() {
        assert!(reciprocal_sum(2, 3).is_err());
        assert!(reciprocal_sum(5, 0).is_err());
        assert!(reciprocal_sum(10_001, 2).is_err());
        let big = reciprocal_sum(400, 3).unwrap();
        assert!(big.exact.is_none() && big.holds);
    }
}
