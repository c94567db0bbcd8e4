//! Library results against oracles computed here by independent routes.

use condensa_core::hitting::mean_jump_rate_exact;
use condensa_core::recip::reciprocal_table;
use condensa_core::simulator::{mc_hitting, mc_mean_jump_rate, HittingChain, HittingTask, TraceBudget};
use condensa_core::{Configuration, ProcessParams, WalkSpec};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Σ over compositions of n into k parts of Π 1/m_i is the coefficient of
/// z^n in (−ln(1−z))^k, which is k!·c(n,k)/n! with c the unsigned Stirling
/// numbers of the first kind.
#[test]
fn reciprocal_sums_match_stirling() {
    let (n_max, k_max) = (60usize, 6usize);
    let mut c = vec![vec![BigInt::zero(); k_max + 1]; n_max + 1];
    c[0][0] = BigInt::one();
    for n in 0..n_max {
        for k in 1..=k_max {
            c[n + 1][k] = &c[n][k] * BigInt::from(n) + &c[n][k - 1];
        }
    }
    let fact = |m: usize| (1..=m).fold(BigInt::one(), |a, i| a * BigInt::from(i));
    let table = reciprocal_table(n_max, k_max).unwrap();
    for k in 1..=k_max {
        for n in k..=n_max {
            let want = BigRational::new(fact(k) * &c[n][k], fact(n));
            assert_eq!(table.get(n, k).unwrap().exact.unwrap(), want, "S({n},{k})");
        }
    }
}

fn sym2() -> WalkSpec {
    WalkSpec::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
}

/// Mean absorption time of the birth-death chain k = η_0 at {0, N}.
fn absorption_time(n: usize, d: f64, start: usize) -> f64 {
    // T(k) = 1/q + (down/q) T(k−1) + (up/q) T(k+1), T(0) = T(N) = 0; dense solve
    let m = n - 1;
    let mut a = vec![vec![0.0; m + 1]; m];
    for k in 1..n {
        let (kf, nf) = (k as f64, n as f64);
        let down = kf * (d + nf - kf);
        let up = (nf - kf) * (d + kf);
        let i = k - 1;
        a[i][i] = down + up;
        if k > 1 {
            a[i][i - 1] = -down;
        }
        if k < n - 1 {
            a[i][i + 1] = -up;
        }
        a[i][m] = 1.0;
    }
    for col in 0..m {
        let p = (col..m).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs())).unwrap();
        a.swap(col, p);
        for r in 0..m {
            if r != col {
                let f = a[r][col] / a[col][col];
                for j in col..=m {
                    a[r][j] -= f * a[col][j];
                }
            }
        }
    }
    a[start - 1][m] / a[start - 1][start - 1]
}

#[test]
fn inclusion_hitting_matches_birth_death() {
    let (n, d) = (6u32, 0.5);
    // δ ln 6 < 1 so U is the pair of condensed states
    let task = HittingTask {
        chain: HittingChain::Inclusion { delta: 0.5 },
        start: Configuration::balanced(2, n),
        replicas: 4000,
        seed: 21,
        step_cap: 1_000_000,
    };
    let r = mc_hitting(&task, &sym2(), &ProcessParams::new(n, d).unwrap()).unwrap();
    let want = absorption_time(n as usize, d, 3);
    assert!((r.mean - want).abs() < 4.0 * r.std_error, "{} ± {} vs {want}", r.mean, r.std_error);
}

#[test]
fn monte_carlo_trace_rates_match_exact() {
    let w = WalkSpec::cycle(3, 0.7).unwrap();
    let p = ProcessParams::new(4, 0.3).unwrap();
    let exact = mean_jump_rate_exact(&w, &p, &[0, 1, 2]).unwrap();
    let mc = mc_mean_jump_rate(&w, &p, &[0, 1, 2], 300, TraceBudget { jumps: 20, events: 10_000_000 }, 8).unwrap();
    for x in 0..3 {
        for y in 0..3 {
            if x == y {
                continue;
            }
            let (e, m, se) = (exact.rate(x, y).unwrap(), mc.rate(x, y).unwrap(), mc.std_error(x, y).unwrap());
            assert!((e - m).abs() < 4.0 * se.max(1e-3 * e), "({x},{y}) exact {e} mc {m} ± {se}");
        }
    }
}

/// Two sites, N = 2: from ξ^0 the process reaches (1,1) at rate 2d and
/// from there goes to ξ^1 or back with probability ½ each, so the
/// trace rate is 2d · ½ = d.
#[test]
fn two_site_first_step() {
    for d in [0.1, 0.7, 3.0] {
        let r = mean_jump_rate_exact(&sym2(), &ProcessParams::new(2, d).unwrap(), &[0, 1]).unwrap();
        assert!((r.rate(0, 1).unwrap() - d).abs() < 1e-12 * d.max(1.0));
    }
}
