//! Torus mean-jump rates b_L(x, x+y), the limit generator on 𝕋^d and the
//! distance between the two.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::torus::{Regime, TorusSpec};
use crate::stationary::log_sum_exp;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateMethod {
    /// leading-order expressions
    Formula,
    /// exact absorption on the two-site tube
    Tube,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusRates {
    pub method: RateMethod,
    pub offsets: Vec<Vec<i64>>,
    /// b_L(x, x+y) aligned with `offsets`
    pub rates: Vec<f64>,
    /// max relative difference formula vs tube over offsets with a nonzero formula value
    pub relative_difference: f64,
}

impl TorusRates {
    pub fn rate(&self, y: &[i64]) -> f64 {
        self.offsets.iter().position(|o| o.as_slice() == y).map_or(0.0, |i| self.rates[i])
    }
}

/// Leading order: d_L N (h(y) − h(−y))⁺ when asymmetric, d_L h(y) when symmetric.
pub fn formula_rate(t: &TorusSpec, y: &[i64]) -> f64 {
    let back: Vec<i64> = y.iter().map(|c| -c).collect();
    let (f, b) = (t.h(y), t.h(&back));
    match t.regime {
        Regime::Symmetric => t.d_l * f,
        _ => t.d_l * t.n as f64 * (f - b).max(0.0),
    }
}

/// N d_L h(y) P_{ζ₁}[E₀]: the birth–death chain on the tube between ξ^x
/// and ξ^{x+y}, started with one particle at x+y.
pub fn tube_rate(t: &TorusSpec, y: &[i64]) -> f64 {
    let back: Vec<i64> = y.iter().map(|c| -c).collect();
    let (f, b) = (t.h(y), t.h(&back));
    let n = t.n;
    let d = t.d_l;
    if f == 0.0 {
        return 0.0;
    }
    if b == 0.0 {
        return n as f64 * d * f;
    }
    // i = particles at x+y; up (N−i)(d+i) f, down i(d+N−i) b
    // P_1 = 1 / Σ_{j=0}^{N−1} Π_{k=1}^{j} down_k/up_k
    let mut logs = Vec::with_capacity(n as usize);
    let mut acc = 0.0;
    logs.push(0.0);
    for k in 1..n {
        let kf = k as f64;
        let nk = (n - k) as f64;
        acc += libm::log(kf * (d + nk) * b) - libm::log(nk * (d + kf) * f);
        logs.push(acc);
    }
    n as f64 * d * f * libm::exp(-log_sum_exp(&logs))
}

pub fn torus_mean_rates(t: &TorusSpec, method: RateMethod) -> TorusRates {
    let offsets = t.interaction_offsets();
    let formula: Vec<f64> = offsets.iter().map(|y| formula_rate(t, y)).collect();
    let tube: Vec<f64> = offsets.iter().map(|y| tube_rate(t, y)).collect();
    let relative_difference = formula
        .iter()
        .zip(&tube)
        .filter(|(f, _)| **f > 0.0)
        .map(|(f, u)| ((u - f) / f).abs())
        .fold(0.0, f64::max);
    let rates = match method {
        RateMethod::Formula => formula,
        RateMethod::Tube => tube,
    };
    TorusRates { method, offsets, rates, relative_difference }
}

/// A C³ function on 𝕋^d with derivatives.
pub trait SmoothFn {
    fn value(&self, u: &[f64]) -> f64;
    fn gradient(&self, u: &[f64]) -> Vec<f64>;
    /// row-major d×d
    fn hessian(&self, u: &[f64]) -> Vec<f64>;
    /// f(u + δ) − f(u)
    fn increment(&self, u: &[f64], delta: &[f64]) -> f64 {
        let moved: Vec<f64> = u.iter().zip(delta).map(|(a, b)| a + b).collect();
        self.value(&moved) - self.value(u)
    }
}

/// f(u) = cos(2π k·u).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CosineMode {
    pub k: Vec<f64>,
}

impl CosineMode {
    fn phase(&self, u: &[f64]) -> f64 {
        2.0 * core::f64::consts::PI * self.k.iter().zip(u).map(|(a, b)| a * b).sum::<f64>()
    }
}

impl SmoothFn for CosineMode {
    fn value(&self, u: &[f64]) -> f64 {
        libm::cos(self.phase(u))
    }
    fn gradient(&self, u: &[f64]) -> Vec<f64> {
        let s = -libm::sin(self.phase(u)) * 2.0 * core::f64::consts::PI;
        self.k.iter().map(|k| s * k).collect()
    }
    fn hessian(&self, u: &[f64]) -> Vec<f64> {
        let tp = 2.0 * core::f64::consts::PI;
        let c = -libm::cos(self.phase(u)) * tp * tp;
        let d = self.k.len();
        (0..d * d).map(|i| c * self.k[i / d] * self.k[i % d]).collect()
    }
}

/// f(u) = a·u, taken locally: increments use the unwrapped step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Linear {
    pub a: Vec<f64>,
}

impl SmoothFn for Linear {
    fn value(&self, u: &[f64]) -> f64 {
        self.a.iter().zip(u).map(|(a, b)| a * b).sum()
    }
    fn gradient(&self, _u: &[f64]) -> Vec<f64> {
        self.a.clone()
    }
    fn hessian(&self, _u: &[f64]) -> Vec<f64> {
        vec![0.0; self.a.len() * self.a.len()]
    }
    fn increment(&self, _u: &[f64], delta: &[f64]) -> f64 {
        self.value(delta)
    }
}

fn quad(hess: &[f64], y: &[f64]) -> f64 {
    let d = y.len();
    (0..d).map(|i| (0..d).map(|j| y[i] * hess[i * d + j] * y[j]).sum::<f64>()).sum()
}

/// (𝓛^{𝕋^d} f)(u) for the regime of `t`.
pub fn limit_generator_apply(t: &TorusSpec, f: &dyn SmoothFn, u: &[f64]) -> f64 {
    match t.regime {
        Regime::TotallyAsym => {
            let g = f.gradient(u);
            t.rho * t.v.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>()
        }
        Regime::MeanZeroAsym => {
            let hs = f.hessian(u);
            let mut acc = 0.0;
            for e in &t.kernel {
                let back: Vec<i64> = e.offset.iter().map(|c| -c).collect();
                let diff = e.weight - t.h(&back);
                if diff > 0.0 {
                    let y: Vec<f64> = e.offset.iter().map(|&c| c as f64).collect();
                    acc += diff * quad(&hs, &y);
                }
            }
            0.5 * t.rho * acc
        }
        Regime::Symmetric => {
            let hs = f.hessian(u);
            let acc: f64 = t
                .kernel
                .iter()
                .map(|e| {
                    let y: Vec<f64> = e.offset.iter().map(|&c| c as f64).collect();
                    e.weight * quad(&hs, &y)
                })
                .sum();
            0.5 * acc
        }
    }
}

/// (𝓛^{W_L} f)(x/L) = θ_L Σ_y b_L(x, x+y) [f((x+y)/L) − f(x/L)].
pub fn discrete_generator_apply(t: &TorusSpec, rates: &TorusRates, f: &dyn SmoothFn, x: usize) -> f64 {
    let l = t.side as f64;
    let u: Vec<f64> = t.coords(x).iter().map(|&c| c as f64 / l).collect();
    let mut acc = 0.0;
    for (y, b) in rates.offsets.iter().zip(&rates.rates) {
        let delta: Vec<f64> = y.iter().map(|&c| c as f64 / l).collect();
        acc += b * f.increment(&u, &delta);
    }
    t.theta * acc
}

/// sup over lattice points of |𝓛^{W_L} f − 𝓛^{𝕋^d} f|.
pub fn generator_gap(t: &TorusSpec, f: &dyn SmoothFn, method: RateMethod) -> f64 {
    let rates = torus_mean_rates(t, method);
    let l = t.side as f64;
    (0..t.sites())
        .map(|x| {
            let u: Vec<f64> = t.coords(x).iter().map(|&c| c as f64 / l).collect();
            (discrete_generator_apply(t, &rates, f, x) - limit_generator_apply(t, f, &u)).abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermo::torus::{build_torus, kernel_1d};

    #[test]
    fn asym_rates() {
        let t = build_torus(1, 24, &kernel_1d(&[(1, 0.8), (-1, 0.2)]), 3.0, None).unwrap();
        let r = torus_mean_rates(&t, RateMethod::Tube);
        let fwd = r.rate(&[1]) / (t.d_l * t.n as f64);
        assert!((fwd - 0.6).abs() < 1e-3);
        assert!(r.rate(&[-1]) < 1e-20);
        assert!(r.relative_difference < 1e-3);
    }

    #[test]
    fn symmetric_rates() {
        let t = build_torus(1, 16, &kernel_1d(&[(1, 0.5), (-1, 0.5)]), 2.0, Some(1e-8)).unwrap();
        let r = torus_mean_rates(&t, RateMethod::Tube);
        assert!((r.rate(&[1]) / t.d_l - 0.5).abs() < 0.01);
        assert!(r.relative_difference <= 0.02);
    }

    #[test]
    fn limit_generators() {
        let srw = build_torus(1, 16, &kernel_1d(&[(1, 0.5), (-1, 0.5)]), 2.0, None).unwrap();
        let f = CosineMode { k: vec![1.0] };
        let u = [0.3];
        let want = -2.0 * core::f64::consts::PI * core::f64::consts::PI * libm::cos(2.0 * core::f64::consts::PI * 0.3);
        assert!((limit_generator_apply(&srw, &f, &u) - want).abs() < 1e-12);
        let asym = build_torus(1, 24, &kernel_1d(&[(1, 0.8), (-1, 0.2)]), 3.0, None).unwrap();
        assert!((limit_generator_apply(&asym, &Linear { a: vec![1.0] }, &u) - 1.8).abs() < 1e-12);
        assert_eq!(limit_generator_apply(&asym, &Linear { a: vec![0.0] }, &u), 0.0);
    }

    #[test]
    fn gaps_shrink() {
        let f = CosineMode { k: vec![1.0] };
        for k in [&[(1, 0.5), (-1, 0.5)][..], &[(2, 0.2), (-1, 0.4)][..]] {
            let gaps: Vec<f64> = [8, 16, 32]
                .iter()
                .map(|&l| generator_gap(&build_torus(1, l, &kernel_1d(k), 2.0, None).unwrap(), &f, RateMethod::Formula))
                .collect();
            assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
        }
        let lin = Linear { a: vec![1.0] };
        let g: Vec<f64> = [8, 16, 32]
            .iter()
            .map(|&l| generator_gap(&build_torus(1, l, &kernel_1d(&[(1, 0.8), (-1, 0.2)]), 3.0, None).unwrap(), &lin, RateMethod::Tube))
            .collect();
        assert!(g[2] < g[0] && g[2] < 0.05, "{g:?}");
    }
}
