//! Log-log least squares.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    /// exp(intercept)
    pub prefactor: f64,
    pub r_squared: f64,
}

pub fn scaling_fit(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 3 || points.iter().any(|&(n, v)| !(n > 0.0 && v > 0.0 && n.is_finite() && v.is_finite())) {
        return Err(Error::DegenerateData);
    }
    let m = points.len() as f64;
    let xs = points.iter().map(|p| libm::log(p.0));
    let ys = points.iter().map(|p| libm::log(p.1));
    let mx = xs.clone().sum::<f64>() / m;
    let my = ys.clone().sum::<f64>() / m;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateData);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(ScalingFit { slope, intercept, prefactor: libm::exp(intercept), r_squared })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_laws() {
        let pts: [(f64, f64); 4] = core::array::from_fn(|i| {
            let n = 10.0 * (i + 1) as f64;
            (n, 2.0 * n * n * n)
        });
        let f = scaling_fit(&pts).unwrap();
        assert!((f.slope - 3.0).abs() < 1e-12 && (f.prefactor - 2.0).abs() < 1e-9);
        let lin = [(1.0, 7.0), (2.0, 14.0), (5.0, 35.0)];
        assert!((scaling_fit(&lin).unwrap().slope - 1.0).abs() < 1e-12);
        assert_eq!(scaling_fit(&[(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)]), Err(Error::DegenerateData));
    }
}
