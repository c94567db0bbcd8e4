//! Stationary condensation on the torus from the product form: with
//! M = L^d sites, Z = [z^N] (1−z)^{−d_L M} = w_{d_L M}(N).

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::torus::TorusSpec;
use crate::stationary::log_site_weights;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CondensationReport {
    pub sites: usize,
    pub n: u32,
    /// μ_L(E_L)
    pub condensed: f64,
    /// μ_L(E_L^x), the same for every x
    pub per_site: f64,
    pub log_z: f64,
    /// ln Z from binary powering of (1 + Σ_{n≥1} w(n) z^n)^M, truncated at degree N
    pub log_z_check: f64,
    /// μ_L(Δ_i) for i = 2..=min(M, N), index 0 is i = 2
    pub delta_masses: Vec<f64>,
    /// |1 − μ(E) − Σ_i μ(Δ_i)|
    pub decomposition_residual: f64,
    /// max over 1 ≤ k ≤ min(L, N) of |w_L(k) k / d_L − 1|
    pub weight_deviation: f64,
}

pub fn torus_condensation(t: &TorusSpec) -> CondensationReport {
    let m = t.sites();
    let n = t.n;
    let lw = log_site_weights(n, t.d_l);
    let log_z = log_site_weights(n, t.d_l * m as f64)[n as usize];
    let log_e = libm::log(m as f64) + lw[n as usize] - log_z;
    let condensed = libm::exp(log_e);

    // scaled weights w̃(k) = w(k)/d_L keep the i-fold convolutions in range
    let nn = n as usize;
    let wt: Vec<f64> = (0..=nn).map(|k| if k == 0 { 0.0 } else { libm::exp(lw[k]) / t.d_l }).collect();
    let top = m.min(nn);
    let mut conv = wt.clone();
    let mut delta_masses = Vec::with_capacity(top.saturating_sub(1));
    let mut log_binom = libm::log(m as f64);
    for i in 2..=top {
        let mut next = vec![0.0; nn + 1];
        for a in 1..=nn {
            if conv[a] == 0.0 {
                continue;
            }
            for b in 1..=nn - a {
                next[a + b] += conv[a] * wt[b];
            }
        }
        conv = next;
        log_binom += libm::log((m - i + 1) as f64) - libm::log(i as f64);
        let lm = log_binom + i as f64 * libm::log(t.d_l) + libm::log(conv[nn]) - log_z;
        delta_masses.push(if conv[nn] > 0.0 { libm::exp(lm) } else { 0.0 });
    }
    let decomposition_residual = (1.0 - condensed - delta_masses.iter().sum::<f64>()).abs();

    let mut base: Vec<f64> = (0..=nn).map(|k| if k == 0 { 1.0 } else { libm::exp(lw[k]) }).collect();
    let mut acc = vec![0.0; nn + 1];
    acc[0] = 1.0;
    let mut e = m;
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mul(&acc, &base);
        }
        e >>= 1;
        if e > 0 {
            base = poly_mul(&base, &base);
        }
    }
    let log_z_check = libm::log(acc[nn]);

    let weight_deviation = (1..=t.side.min(nn))
        .map(|k| (libm::exp(lw[k]) * k as f64 / t.d_l - 1.0).abs())
        .fold(0.0, f64::max);

    CondensationReport {
        sites: m,
        n,
        condensed,
        per_site: condensed / m as f64,
        log_z,
        log_z_check,
        delta_masses,
        decomposition_residual,
        weight_deviation,
    }
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut out = vec![0.0; n];
    for i in 0..n {
        if a[i] == 0.0 {
            continue;
        }
        for j in 0..n - i {
            out[i + j] += a[i] * b[j];
        }
    }
    out
}
