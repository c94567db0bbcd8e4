//! Limit-point checks for a sequence of finite-N vectors against the
//! limiting rates a(·,·).

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub ns: Vec<u32>,
    /// stationarity residual max_y |Σ_x π(x)a(x,y) − π(y)Σ_z a(y,z)| per N, π normalized
    pub residuals: Vec<f64>,
    /// max-norm difference between consecutive entries
    pub cauchy: Vec<f64>,
    pub final_residual: f64,
    /// residuals never increase along the sequence
    pub residual_monotone: bool,
}

/// `seq` holds (N, π_N) with π_N aligned with the rate matrix `a` (k×k, row-major).
pub fn convergence_probe(seq: &[(u32, Vec<f64>)], a: &[f64], k: usize) -> Result<ProbeReport> {
    if seq.len() < 3 {
        return Err(Error::InsufficientData);
    }
    if a.len() != k * k || seq.iter().any(|(_, v)| v.len() != k) {
        return Err(Error::DimensionMismatch);
    }
    let normalized: Vec<Vec<f64>> = seq
        .iter()
        .map(|(_, v)| {
            let s: f64 = v.iter().sum();
            v.iter().map(|x| x / s).collect()
        })
        .collect();
    let residuals: Vec<f64> = normalized.iter().map(|p| stationarity_residual(p, a, k)).collect();
    let cauchy = normalized
        .windows(2)
        .map(|w| w[0].iter().zip(&w[1]).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
        .collect();
    Ok(ProbeReport {
        ns: seq.iter().map(|(n, _)| *n).collect(),
        final_residual: *residuals.last().unwrap(),
        residual_monotone: residuals.windows(2).all(|w| w[1] <= w[0]),
        residuals,
        cauchy,
    })
}

pub fn stationarity_residual(p: &[f64], a: &[f64], k: usize) -> f64 {
    (0..k)
        .map(|y| {
            let inflow: f64 = (0..k).filter(|&x| x != y).map(|x| p[x] * a[x * k + y]).sum();
            let outflow: f64 = (0..k).filter(|&z| z != y).map(|z| a[y * k + z]).sum::<f64>() * p[y];
            (inflow - outflow).abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn constant_sequence() {
        let a = vec![0.0, 1.0, 1.0, 0.0];
        let seq = vec![(10, vec![0.5, 0.5]), (20, vec![0.5, 0.5]), (40, vec![0.5, 0.5])];
        let rep = convergence_probe(&seq, &a, 2).unwrap();
        assert!(rep.cauchy.iter().all(|&c| c == 0.0));
        assert_eq!(rep.final_residual, 0.0);
    }

    #[test]
    fn too_short() {
        let a = vec![0.0, 1.0, 1.0, 0.0];
        assert_eq!(convergence_probe(&[(1, vec![1.0, 0.0])], &a, 2), Err(Error::InsufficientData));
    }
}
