//! The inclusion process on the discrete torus (ℤ/Lℤ)^d with a
//! translation-invariant kernel h.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::walk::RateGraph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    TotallyAsym,
    MeanZeroAsym,
    Symmetric,
}

impl Regime {
    /// θ_L: 1/(d_L L^{d−1}), 1/(d_L L^{d−2}), L²/d_L.
    pub fn theta(self, dim: usize, side: usize, d_l: f64) -> f64 {
        let l = side as f64;
        let dd = dim as f64;
        match self {
            Regime::TotallyAsym => 1.0 / (d_l * libm::pow(l, dd - 1.0)),
            Regime::MeanZeroAsym => 1.0 / (d_l * libm::pow(l, dd - 2.0)),
            Regime::Symmetric => l * l / d_l,
        }
    }

    /// Default d_L = L^{-(d+2)}, L^{-(d+3)} or L^{-(2d+3)}.
    pub fn default_d(self, dim: usize, side: usize) -> f64 {
        let dd = dim as f64;
        let e = match self {
            Regime::TotallyAsym => dd + 2.0,
            Regime::MeanZeroAsym => dd + 3.0,
            Regime::Symmetric => 2.0 * dd + 3.0,
        };
        libm::pow(side as f64, -e)
    }
}

/// One kernel entry h(y) = weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelEntry {
    pub offset: Vec<i64>,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusSpec {
    pub dim: usize,
    pub side: usize,
    pub kernel: Vec<KernelEntry>,
    pub rho: f64,
    pub d_l: f64,
    pub n: u32,
    /// support radius M in the sup norm
    pub radius: i64,
    pub regime: Regime,
    pub v: Vec<f64>,
    /// d×d, row-major
    pub s1: Vec<f64>,
    pub s2: Vec<f64>,
    pub sigma1: Vec<f64>,
    pub sigma2: Vec<f64>,
    pub theta: f64,
}

const SYM_TOL: f64 = 1e-12;

/// `d_l = None` picks the regime default.
pub fn build_torus(dim: usize, side: usize, kernel: &[KernelEntry], rho: f64, d_l: Option<f64>) -> Result<TorusSpec> {
    if dim == 0 || side < 2 {
        return Err(Error::InvalidParams("need d ≥ 1 and L ≥ 2".into()));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidParams(format!("density must be positive, got {rho}")));
    }
    let mut entries: Vec<KernelEntry> = Vec::new();
    for e in kernel {
        if e.offset.len() != dim {
            return Err(Error::DimensionMismatch);
        }
        if !(e.weight >= 0.0 && e.weight.is_finite()) {
            return Err(Error::InvalidParams(format!("kernel weight {} at {:?}", e.weight, e.offset)));
        }
        if e.offset.iter().all(|&c| c == 0) {
            return Err(Error::InvalidParams("kernel has weight at the origin".into()));
        }
        if entries.iter().any(|f| f.offset == e.offset) {
            return Err(Error::InvalidParams(format!("offset {:?} listed twice", e.offset)));
        }
        if e.weight > 0.0 {
            entries.push(e.clone());
        }
    }
    entries.sort_by(|a, b| a.offset.cmp(&b.offset));
    let radius = entries.iter().flat_map(|e| e.offset.iter().map(|c| c.abs())).max().unwrap_or(0);
    if side as i64 <= 2 * radius {
        return Err(Error::SupportTooLarge);
    }
    let offsets: Vec<Vec<i64>> = entries.iter().map(|e| e.offset.clone()).collect();
    if !spans_lattice(&offsets, dim) {
        return Err(Error::NonSpanningSupport);
    }
    let h = |y: &[i64]| entries.iter().find(|e| e.offset == y).map_or(0.0, |e| e.weight);
    let neg = |y: &[i64]| -> Vec<i64> { y.iter().map(|c| -c).collect() };
    let scale = entries.iter().map(|e| e.weight).fold(0.0, f64::max);
    let mut v = vec![0.0; dim];
    let mut s1 = vec![0.0; dim * dim];
    let mut s2 = vec![0.0; dim * dim];
    let mut symmetric = true;
    for e in &entries {
        let back = h(&neg(&e.offset));
        if (e.weight - back).abs() > SYM_TOL * scale {
            symmetric = false;
        }
        for i in 0..dim {
            v[i] += e.weight * e.offset[i] as f64;
            for j in 0..dim {
                let yy = (e.offset[i] * e.offset[j]) as f64;
                s2[i * dim + j] += e.weight * yy;
                if e.weight > back {
                    s1[i * dim + j] += rho * (e.weight - back) * yy;
                }
            }
        }
    }
    let moving = v.iter().any(|c| c.abs() > SYM_TOL * scale);
    let regime = if moving {
        Regime::TotallyAsym
    } else if symmetric {
        Regime::Symmetric
    } else {
        Regime::MeanZeroAsym
    };
    if !moving {
        v.iter_mut().for_each(|c| *c = 0.0);
    }
    let d_l = d_l.unwrap_or_else(|| regime.default_d(dim, side));
    if !(d_l > 0.0 && d_l.is_finite()) {
        return Err(Error::InvalidParams(format!("d_L must be positive, got {d_l}")));
    }
    let volume = libm::pow(side as f64, dim as f64);
    let n = libm::round(rho * volume) as u32;
    if n == 0 {
        return Err(Error::InvalidParams("ρ L^d rounds to zero particles".into()));
    }
    Ok(TorusSpec {
        dim,
        side,
        kernel: entries,
        rho,
        d_l,
        n,
        radius,
        regime,
        sigma1: sym_sqrt(&s1, dim),
        sigma2: sym_sqrt(&s2, dim),
        v,
        s1,
        s2,
        theta: regime.theta(dim, side, d_l),
    })
}

impl TorusSpec {
    pub fn sites(&self) -> usize {
        self.side.pow(self.dim as u32)
    }

    pub fn h(&self, y: &[i64]) -> f64 {
        self.kernel.iter().find(|e| e.offset == y).map_or(0.0, |e| e.weight)
    }

    /// Site index with coordinate 0 varying fastest.
    pub fn index(&self, coords: &[i64]) -> usize {
        let l = self.side as i64;
        coords.iter().rev().fold(0usize, |acc, &c| acc * self.side + c.rem_euclid(l) as usize)
    }

    pub fn coords(&self, mut x: usize) -> Vec<i64> {
        let mut c = vec![0; self.dim];
        for ci in c.iter_mut() {
            *ci = (x % self.side) as i64;
            x /= self.side;
        }
        c
    }

    /// Minimal-image displacement from x to y, each coordinate in (−L/2, L/2].
    pub fn displacement(&self, x: usize, y: usize) -> Vec<i64> {
        let l = self.side as i64;
        let (cx, cy) = (self.coords(x), self.coords(y));
        cx.iter()
            .zip(&cy)
            .map(|(a, b)| {
                let mut d = (b - a).rem_euclid(l);
                if 2 * d > l {
                    d -= l;
                }
                d
            })
            .collect()
    }

    /// Offsets y with h(y) > 0 or h(−y) > 0, sorted.
    pub fn interaction_offsets(&self) -> Vec<Vec<i64>> {
        let mut out: Vec<Vec<i64>> = Vec::new();
        for e in &self.kernel {
            let back: Vec<i64> = e.offset.iter().map(|c| -c).collect();
            for y in [e.offset.clone(), back] {
                if !out.contains(&y) {
                    out.push(y);
                }
            }
        }
        out.sort();
        out
    }

    pub fn graph(&self) -> RateGraph {
        let out = (0..self.sites())
            .map(|x| {
                let c = self.coords(x);
                self.kernel
                    .iter()
                    .map(|e| {
                        let t: Vec<i64> = c.iter().zip(&e.offset).map(|(a, b)| a + b).collect();
                        (self.index(&t), e.weight)
                    })
                    .collect()
            })
            .collect();
        RateGraph { out }
    }
}

/// The subgroup generated by the offsets equals ℤ^d (integer row reduction).
fn spans_lattice(offsets: &[Vec<i64>], dim: usize) -> bool {
    let mut rows: Vec<Vec<i64>> = offsets.to_vec();
    let mut top = 0;
    for col in 0..dim {
        loop {
            let pivot = (top..rows.len()).filter(|&r| rows[r][col] != 0).min_by_key(|&r| rows[r][col].abs());
            let Some(p) = pivot else { return false };
            rows.swap(top, p);
            let mut done = true;
            for r in top + 1..rows.len() {
                let f = rows[r][col] / rows[top][col];
                if f != 0 {
                    for c in 0..dim {
                        rows[r][c] -= f * rows[top][c];
                    }
                }
                if rows[r][col] != 0 {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if rows[top][col].abs() != 1 {
            return false;
        }
        top += 1;
    }
    true
}

/// Symmetric square root via Jacobi rotations, eigenvalues clipped at zero.
pub fn sym_sqrt(a: &[f64], n: usize) -> Vec<f64> {
    let (vals, vecs) = jacobi_eigen(a, n);
    let mut out = vec![0.0; n * n];
    for k in 0..n {
        let s = libm::sqrt(vals[k].max(0.0));
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] += s * vecs[i * n + k] * vecs[j * n + k];
            }
        }
    }
    out
}

/// Eigenvalues and column eigenvectors of a symmetric matrix.
pub fn jacobi_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut m = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[i * n + j] * m[i * n + j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k * n + p], m[k * n + q]);
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p * n + k], m[q * n + k]);
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k * n + p], v[k * n + q]);
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| m[i * n + i]).collect(), v)
}

pub fn kernel_1d(pairs: &[(i64, f64)]) -> Vec<KernelEntry> {
    pairs.iter().map(|&(y, w)| KernelEntry { offset: vec![y], weight: w }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drift_example() {
        let t = build_torus(1, 24, &kernel_1d(&[(1, 0.8), (-1, 0.2)]), 3.0, None).unwrap();
        assert_eq!(t.n, 72);
        assert_eq!(t.regime, Regime::TotallyAsym);
        assert!((t.v[0] - 0.6).abs() < 1e-15);
        assert!((t.theta - 1.0 / t.d_l).abs() < 1e-9 * t.theta);
        assert!((t.d_l - libm::pow(24.0, -3.0)).abs() < 1e-20);
    }

    #[test]
    fn mean_zero_example() {
        let t = build_torus(1, 16, &kernel_1d(&[(2, 0.2), (-1, 0.4)]), 2.0, None).unwrap();
        assert_eq!(t.regime, Regime::MeanZeroAsym);
        assert!((t.s1[0] - 2.4).abs() < 1e-14);
    }

    #[test]
    fn srw_example() {
        let t = build_torus(1, 16, &kernel_1d(&[(1, 0.5), (-1, 0.5)]), 2.0, None).unwrap();
        assert_eq!(t.regime, Regime::Symmetric);
        assert!((t.s2[0] - 1.0).abs() < 1e-15 && (t.sigma2[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn support_checks() {
        let k = kernel_1d(&[(2, 1.0), (-2, 1.0)]);
        assert_eq!(build_torus(1, 16, &k, 1.0, None), Err(Error::NonSpanningSupport));
        let k = kernel_1d(&[(3, 1.0), (-1, 1.0)]);
        assert_eq!(build_torus(1, 6, &k, 1.0, None), Err(Error::SupportTooLarge));
        let k2 = [
            KernelEntry { offset: vec![1, 0], weight: 1.0 },
            KernelEntry { offset: vec![0, 2], weight: 1.0 },
        ];
        assert_eq!(build_torus(2, 8, &k2, 1.0, None), Err(Error::NonSpanningSupport));
    }

    #[test]
    fn sqrt_squares_back() {
        let a = [2.0, 0.5, 0.0, 0.5, 1.0, 0.3, 0.0, 0.3, 0.7];
        let s = sym_sqrt(&a, 3);
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| s[i * 3 + k] * s[k * 3 + j]).sum();
                assert!((v - a[i * 3 + j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn torus_geometry() {
        let k2 = [
            KernelEntry { offset: vec![1, 0], weight: 1.0 },
            KernelEntry { offset: vec![0, 1], weight: 1.0 },
        ];
        let t = build_torus(2, 5, &k2, 1.0, Some(1e-6)).unwrap();
        assert_eq!(t.index(&[-1, 0]), 4);
        assert_eq!(t.coords(7), vec![2, 1]);
        assert_eq!(t.displacement(0, 4), vec![-1, 0]);
        assert_eq!(t.graph().out[4], vec![(9, 1.0), (0, 1.0)]);
    }
}
