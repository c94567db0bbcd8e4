//! Leading-order tube hitting probabilities and mean-jump-rate predictions.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::walk::{asymmetry_q, WalkSpec};

/// ℓ_N = d_N log N + q^N with both parts kept.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorScale {
    pub diffusive: f64,
    pub geometric: f64,
    pub ell: f64,
}

impl ErrorScale {
    pub fn new(n: u32, d: f64, q: f64) -> Self {
        let diffusive = d * libm::log(n as f64);
        let geometric = if q == 0.0 { 0.0 } else { libm::pow(q, n as f64) };
        ErrorScale { diffusive, geometric, ell: diffusive + geometric }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TubeCase {
    /// r(x,y) > r(y,x) > 0
    AsymFwd,
    /// r(y,x) > r(x,y) > 0, seen from the losing side
    AsymBwd,
    /// r(x,y) > r(y,x) = 0
    AsymNoback,
    /// r(x,y) = r(y,x) > 0
    Symmetric,
}

impl FromStr for TubeCase {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "asym_fwd" => Ok(TubeCase::AsymFwd),
            "asym_bwd" => Ok(TubeCase::AsymBwd),
            "asym_noback" => Ok(TubeCase::AsymNoback),
            "symmetric" => Ok(TubeCase::Symmetric),
            other => Err(Error::InvalidCase(format!("unknown tube case {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TubePrediction {
    pub value: f64,
    pub error: ErrorScale,
}

/// Leading order of P_{ζ₁}[E₀] in the x–y tube.
pub fn tube_hitting_prediction(case: TubeCase, q: f64, n: u32, d: f64) -> Result<TubePrediction> {
    if n == 0 {
        return Err(Error::InvalidCase("N must be positive".into()));
    }
    let nf = n as f64;
    let needs_q = matches!(case, TubeCase::AsymFwd | TubeCase::AsymBwd);
    if needs_q && !(0.0..1.0).contains(&q) {
        return Err(Error::InvalidCase(format!("q = {q} outside [0,1)")));
    }
    let qn = libm::pow(q, nf);
    let value = match case {
        TubeCase::AsymFwd => (1.0 - q) / (1.0 - qn),
        TubeCase::AsymBwd => (libm::pow(q, nf - 1.0) - qn) / (1.0 - qn),
        TubeCase::AsymNoback => 1.0,
        TubeCase::Symmetric => 1.0 / nf,
    };
    let error = ErrorScale::new(n, d, if needs_q { q } else { 0.0 });
    Ok(TubePrediction { value, error })
}

/// Which error family the prediction carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorFamily {
    /// O(ℓ_N)
    Attracting,
    /// O(1/N + ℓ_N)
    SemiAttracting,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatePrediction {
    pub sites: Vec<usize>,
    /// normalized r_N^A / (d_N N), row-major |A|×|A|
    pub values: Vec<f64>,
    pub family: ErrorFamily,
    pub error: ErrorScale,
    /// ℓ_N or 1/N + ℓ_N per family
    pub error_bound: f64,
}

/// r(x,y) < r(y,x) for every interacting pair leaving A.
pub fn is_attracting(walk: &WalkSpec, a: &[usize]) -> bool {
    crossing_pairs(walk, a).all(|(x, y)| walk.rate(x, y) < walk.rate(y, x))
}

/// r(x,y) ≤ r(y,x) for every interacting pair leaving A.
pub fn is_semi_attracting(walk: &WalkSpec, a: &[usize]) -> bool {
    crossing_pairs(walk, a).all(|(x, y)| walk.rate(x, y) <= walk.rate(y, x))
}

fn crossing_pairs<'a>(walk: &'a WalkSpec, a: &'a [usize]) -> impl Iterator<Item = (usize, usize)> + 'a {
    let k = walk.kappa();
    a.iter()
        .flat_map(move |&x| (0..k).map(move |y| (x, y)))
        .filter(move |&(x, y)| !a.contains(&y) && walk.neighbors(x, y))
}

/// (r(x,y) − r(y,x)) if r(x,y) > r(y,x); 0 if less; r(x,y)/N if equal.
pub fn predicted_mean_rate(walk: &WalkSpec, a: &[usize], n: u32, d: f64) -> Result<RatePrediction> {
    if a.is_empty() || a.iter().any(|&x| x >= walk.kappa()) {
        return Err(Error::DimensionMismatch);
    }
    let family = if is_attracting(walk, a) {
        ErrorFamily::Attracting
    } else if is_semi_attracting(walk, a) {
        ErrorFamily::SemiAttracting
    } else {
        return Err(Error::NotSemiAttracting);
    };
    let k = a.len();
    let mut values = vec![0.0; k * k];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in a.iter().enumerate() {
            if i == j {
                continue;
            }
            let (f, b) = (walk.rate(x, y), walk.rate(y, x));
            values[i * k + j] = if f > b {
                f - b
            } else if f < b {
                0.0
            } else {
                f / n as f64
            };
        }
    }
    let error = ErrorScale::new(n, d, asymmetry_q(walk));
    let error_bound = match family {
        ErrorFamily::Attracting => error.ell,
        ErrorFamily::SemiAttracting => 1.0 / n as f64 + error.ell,
    };
    Ok(RatePrediction { sites: a.to_vec(), values, family, error, error_bound })
}
