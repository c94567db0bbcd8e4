//! Harmonic-sum test function f₀(η) = Σ_{x∈R} c_x H(η_x) and the generator
//! of the reversed auxiliary chain on the closure of the inner core.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::gordan::{drift_matrix, gordan_certificate, GordanBranch, GordanCertificate};
use crate::error::Result;
use crate::regions::RegionSpec;
use crate::states::StateEnumeration;
use crate::walk::{move_rate, WalkSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    Alpha,
    Beta,
}

#[derive(Clone, Debug)]
pub struct TestFunction {
    walk: WalkSpec,
    region: RegionSpec,
    n: u32,
    d: f64,
    pub kind: CertificateKind,
    pub certificate: GordanCertificate,
    /// c_x for x ∈ R in the reversed chain: α or β
    pub coefficients: Vec<f64>,
    harmonic: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionReport {
    pub kind: CertificateKind,
    pub coefficients: Vec<f64>,
    pub threshold: u32,
    pub inner_core_size: usize,
    pub closure_size: usize,
    /// max − min of f₀ over the closure
    pub oscillation: f64,
    /// oscillation / log N
    pub oscillation_per_log: f64,
    /// min over I of (L̂ f₀)
    pub min_reversed: f64,
    pub argmin_reversed: Vec<u32>,
    /// min over I of (L_N g₀) with g₀ = Σ c'_x H(η_x), c' = −α or β
    pub min_continuous: f64,
    /// max over I of |1 − Σ_ζ p̂(η, ζ)| counting only targets in the closure
    pub row_defect: f64,
}

/// H(n) = 1 + 1/2 + ⋯ + 1/n, H(0) = 0.
pub fn harmonic_table(n: u32) -> Vec<f64> {
    let mut h = vec![0.0; n as usize + 1];
    for i in 1..=n as usize {
        h[i] = h[i - 1] + 1.0 / i as f64;
    }
    h
}

pub fn test_function(walk: &WalkSpec, r: &[usize], n: u32, d: f64, eps: f64) -> Result<TestFunction> {
    let region = RegionSpec::new(walk, n, r, eps)?;
    let sites = region.sites().to_vec();
    let certificate = gordan_certificate(&drift_matrix(walk, &sites), sites.len())?;
    let (kind, coefficients) = match &certificate.branch {
        GordanBranch::Alpha(a) => (CertificateKind::Alpha, a.clone()),
        GordanBranch::Beta(b) => (CertificateKind::Beta, b.clone()),
    };
    Ok(TestFunction {
        walk: walk.clone(),
        region,
        n,
        d,
        kind,
        certificate,
        coefficients,
        harmonic: harmonic_table(n),
    })
}

impl TestFunction {
    pub fn region(&self) -> &RegionSpec {
        &self.region
    }

    /// f₀ on a full configuration.
    pub fn eval(&self, c: &[u32]) -> f64 {
        self.weighted(c, &self.coefficients)
    }

    fn weighted(&self, c: &[u32], coef: &[f64]) -> f64 {
        self.region.sites().iter().zip(coef).map(|(&x, a)| a * self.harmonic[c[x] as usize]).sum()
    }

    /// Continuous-time coefficients: −α or β, so that the leading drift is positive.
    pub fn continuous_coefficients(&self) -> Vec<f64> {
        match self.kind {
            CertificateKind::Alpha => self.coefficients.iter().map(|v| -v).collect(),
            CertificateKind::Beta => self.coefficients.clone(),
        }
    }

    /// (L̂ f₀)(η) and Σ_ζ≠η p̂(η, ζ) over targets in the closure.
    pub fn reversed_generator(&self, c: &[u32]) -> (f64, f64) {
        let sites = self.region.sites();
        let d = self.d;
        let mut w = 0.0;
        for &a in sites {
            for &b in sites {
                w += move_rate(c[a], c[b], d, self.walk.rate(a, b));
            }
        }
        let here = self.eval(c);
        let mut moved = c.to_vec();
        let (mut acc, mut mass) = (0.0, 0.0);
        for &x in sites {
            if c[x] == 0 {
                continue;
            }
            for &y in sites {
                let r = self.walk.rate(y, x);
                if x == y || r == 0.0 {
                    continue;
                }
                moved[x] -= 1;
                moved[y] += 1;
                if self.region.in_closure(&moved) {
                    let p = move_rate(c[y], c[x], d, r) / w;
                    acc += p * (self.eval(&moved) - here);
                    mass += p;
                }
                moved[x] += 1;
                moved[y] -= 1;
            }
        }
        (acc, mass)
    }

    /// (L_N g₀)(η) for the forward process, all moves of the walk.
    pub fn continuous_generator(&self, c: &[u32]) -> f64 {
        let coef = self.continuous_coefficients();
        let here = self.weighted(c, &coef);
        let mut moved = c.to_vec();
        let mut acc = 0.0;
        for x in 0..c.len() {
            if c[x] == 0 {
                continue;
            }
            for &(y, r) in &self.walk.graph().out[x] {
                moved[x] -= 1;
                moved[y] += 1;
                acc += move_rate(c[x], c[y], self.d, r) * (self.weighted(&moved, &coef) - here);
                moved[x] += 1;
                moved[y] -= 1;
            }
        }
        acc
    }

    /// Exhaustive scan of the closure of I_N^R.
    pub fn report(&self) -> Result<TestFunctionReport> {
        let sites = self.region.sites().to_vec();
        let kappa = self.walk.kappa();
        let mut full = vec![0u32; kappa];
        let mut scan = Scan::default();
        let mut visit = |local: &[u32], full: &mut [u32]| {
            for (i, &x) in sites.iter().enumerate() {
                full[x] = local[i];
            }
            if !self.region.in_closure(full) {
                return;
            }
            scan.closure += 1;
            let f = self.eval(full);
            scan.fmin = scan.fmin.min(f);
            scan.fmax = scan.fmax.max(f);
            if self.region.in_inner_core(full) {
                scan.inner += 1;
                let (lf, mass) = self.reversed_generator(full);
                if lf < scan.min_rev {
                    scan.min_rev = lf;
                    scan.argmin = full.to_vec();
                }
                scan.min_cont = scan.min_cont.min(self.continuous_generator(full));
                scan.defect = scan.defect.max((1.0 - mass).abs());
            }
        };
        if sites.len() == 1 {
            visit(&[self.n], &mut full);
        } else {
            let states = StateEnumeration::with_cap(sites.len(), self.n, usize::MAX)?;
            states.for_each(|_, local| visit(local, &mut full));
        }
        let oscillation = if scan.closure == 0 { 0.0 } else { scan.fmax - scan.fmin };
        Ok(TestFunctionReport {
            kind: self.kind,
            coefficients: self.coefficients.clone(),
            threshold: self.region.threshold(),
            inner_core_size: scan.inner,
            closure_size: scan.closure,
            oscillation,
            oscillation_per_log: oscillation / libm::log(self.n as f64),
            min_reversed: scan.min_rev,
            argmin_reversed: scan.argmin,
            min_continuous: scan.min_cont,
            row_defect: scan.defect,
        })
    }
}

struct Scan {
    closure: usize,
    inner: usize,
    fmin: f64,
    fmax: f64,
    min_rev: f64,
    argmin: Vec<u32>,
    min_cont: f64,
    defect: f64,
}

impl Default for Scan {
    fn default() -> Self {
        Scan {
            closure: 0,
            inner: 0,
            fmin: f64::INFINITY,
            fmax: f64::NEG_INFINITY,
            min_rev: f64::INFINITY,
            argmin: Vec::new(),
            min_cont: f64::INFINITY,
            defect: 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_three() {
        assert!((harmonic_table(3)[3] - 11.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn cycle_positive_drift() {
        let w = WalkSpec::cycle(3, 0.7).unwrap();
        let tf = test_function(&w, &[0, 1, 2], 60, 1e-6, 0.1).unwrap();
        assert_eq!(tf.kind, CertificateKind::Beta);
        let rep = tf.report().unwrap();
        assert!(rep.inner_core_size > 0);
        assert!(rep.min_reversed > 0.0, "{rep:?}");
        assert!(rep.min_continuous > 0.0);
        assert!(rep.oscillation <= 5.0 * libm::log(60.0));
        assert!(rep.row_defect < 1e-12);
    }

    #[test]
    fn alpha_pair() {
        let w = WalkSpec::from_rows(vec![vec![0.0, 2.0], vec![1.0, 0.0]]).unwrap();
        let tf = test_function(&w, &[0, 1], 40, 1e-6, 0.3).unwrap();
        assert_eq!(tf.kind, CertificateKind::Alpha);
        let rep = tf.report().unwrap();
        assert!(rep.min_reversed > 0.0 && rep.min_continuous > 0.0);
    }
}
