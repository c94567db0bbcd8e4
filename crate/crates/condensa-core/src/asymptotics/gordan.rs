//! Gordan's alternative for a skew-symmetric Q: either Qα < 0 for some α,
//! or Qβ = 0 for some nonzero β ≤ 0. Dense simplex with Bland's rule, in
//! f64 first and in exact rationals when the float answer is borderline.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::walk::WalkSpec;

const SKEW_TOL: f64 = 1e-12;
const CERT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", content = "vector", rename_all = "snake_case")]
pub enum GordanBranch {
    Alpha(Vec<f64>),
    Beta(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GordanCertificate {
    pub n: usize,
    /// Q row-major
    pub q: Vec<f64>,
    pub branch: GordanBranch,
    /// max(Qα) for Alpha, ‖Qβ‖∞ for Beta
    pub residual: f64,
    /// true if the exact rational solve was needed
    pub exact: bool,
}

impl GordanCertificate {
    pub fn coefficients(&self) -> &[f64] {
        match &self.branch {
            GordanBranch::Alpha(v) | GordanBranch::Beta(v) => v,
        }
    }
}

/// Q(x,y) = r(x,y) − r(y,x) on the sites in `r`.
pub fn drift_matrix(walk: &WalkSpec, r: &[usize]) -> Vec<f64> {
    let k = r.len();
    let mut q = vec![0.0; k * k];
    for (i, &x) in r.iter().enumerate() {
        for (j, &y) in r.iter().enumerate() {
            q[i * k + j] = walk.rate(x, y) - walk.rate(y, x);
        }
    }
    q
}

/// Max row sum of |Q|.
pub fn matrix_norm(q: &[f64], n: usize) -> f64 {
    (0..n).map(|i| q[i * n..(i + 1) * n].iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

fn mat_vec(q: &[f64], n: usize, v: &[f64]) -> Vec<f64> {
    (0..n).map(|i| (0..n).map(|j| q[i * n + j] * v[j]).sum()).collect()
}

/// Some(max(Qα)) when α is a valid Alpha certificate.
pub fn verify_alpha(q: &[f64], n: usize, alpha: &[f64]) -> Option<f64> {
    let worst = mat_vec(q, n, alpha).into_iter().fold(f64::NEG_INFINITY, f64::max);
    (worst <= -CERT_TOL * matrix_norm(q, n)).then_some(worst)
}

/// Some(‖Qβ‖∞) when β is a valid Beta certificate.
pub fn verify_beta(q: &[f64], n: usize, beta: &[f64]) -> Option<f64> {
    let norm = libm::sqrt(beta.iter().map(|v| v * v).sum());
    if beta.iter().any(|&v| v > 0.0) || libm::fabs(norm - 1.0) > 1e-9 {
        return None;
    }
    let res = mat_vec(q, n, beta).into_iter().fold(0.0, |m, v| f64::max(m, v.abs()));
    (res <= CERT_TOL * matrix_norm(q, n)).then_some(res)
}

pub fn gordan_certificate(q: &[f64], n: usize) -> Result<GordanCertificate> {
    if n == 0 || q.len() != n * n {
        return Err(Error::DimensionMismatch);
    }
    let norm = matrix_norm(q, n);
    for i in 0..n {
        for j in 0..n {
            if !q[i * n + j].is_finite() || (q[i * n + j] + q[j * n + i]).abs() > SKEW_TOL * norm.max(1.0) {
                return Err(Error::NotSkewSymmetric);
            }
        }
    }
    if norm == 0.0 {
        // every β works
        let beta = vec![-1.0 / libm::sqrt(n as f64); n];
        return Ok(GordanCertificate { n, q: q.to_vec(), branch: GordanBranch::Beta(beta), residual: 0.0, exact: false });
    }
    let scaled: Vec<f64> = q.iter().map(|v| v / norm).collect();
    if let Some(c) = float_attempt(q, &scaled, n) {
        return Ok(c);
    }
    exact_attempt(q, n)
}

fn finish(q: &[f64], n: usize, branch: Branch<f64>, exact: bool) -> Option<GordanCertificate> {
    match branch {
        Branch::Alpha(a) => {
            let len = libm::sqrt(a.iter().map(|v| v * v).sum());
            if len == 0.0 {
                return None;
            }
            let alpha: Vec<f64> = a.iter().map(|v| v / len).collect();
            let residual = verify_alpha(q, n, &alpha)?;
            Some(GordanCertificate { n, q: q.to_vec(), branch: GordanBranch::Alpha(alpha), residual, exact })
        }
        Branch::Beta(y) => {
            let len = libm::sqrt(y.iter().map(|v| v * v).sum());
            if len == 0.0 {
                return None;
            }
            let beta: Vec<f64> = y.iter().map(|v| -(v.max(0.0)) / len).collect();
            let residual = verify_beta(q, n, &beta)?;
            Some(GordanCertificate { n, q: q.to_vec(), branch: GordanBranch::Beta(beta), residual, exact })
        }
    }
}

fn float_attempt(q: &[f64], scaled: &[f64], n: usize) -> Option<GordanCertificate> {
    let (t, alpha) = solve_alpha(scaled, n)?;
    if t > CERT_TOL {
        return finish(q, n, Branch::Alpha(alpha), false);
    }
    if t > 0.0 {
        return None;
    }
    finish(q, n, Branch::Beta(solve_beta(scaled, n)?), false)
}

fn exact_attempt(q: &[f64], n: usize) -> Result<GordanCertificate> {
    let qr: Option<Vec<BigRational>> = q.iter().map(|&v| BigRational::from_float(v)).collect();
    let qr = qr.ok_or(Error::NotSkewSymmetric)?;
    // force exact skew symmetry on the rationalized matrix
    let mut qs = qr.clone();
    for i in 0..n {
        qs[i * n + i] = BigRational::zero();
        for j in i + 1..n {
            qs[j * n + i] = -qr[i * n + j].clone();
        }
    }
    let fail = || Error::SolverFailure("Gordan simplex failed".into());
    let (t, alpha) = solve_alpha(&qs, n).ok_or_else(fail)?;
    let to_f = |v: &[BigRational]| -> Vec<f64> { v.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect() };
    let branch = if t.is_positive() {
        Branch::Alpha(to_f(&alpha))
    } else {
        Branch::Beta(to_f(&solve_beta(&qs, n).ok_or_else(fail)?))
    };
    finish(q, n, branch, true).ok_or_else(|| Error::SolverFailure("certificate below float resolution".into()))
}

/// Which alternatives are feasible, each decided on its own: in f64 when
/// the answer is clear, in exact arithmetic otherwise. Exactly one of the
/// two is true for a skew-symmetric Q.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchProbe {
    pub alpha: bool,
    pub beta: bool,
    pub exact: bool,
}

pub fn probe_branches(q: &[f64], n: usize) -> Result<BranchProbe> {
    if n == 0 || q.len() != n * n {
        return Err(Error::DimensionMismatch);
    }
    let norm = matrix_norm(q, n);
    if norm == 0.0 {
        return Ok(BranchProbe { alpha: false, beta: true, exact: false });
    }
    let scaled: Vec<f64> = q.iter().map(|v| v / norm).collect();
    if let Some((t, _)) = solve_alpha(&scaled, n) {
        let beta = solve_beta(&scaled, n).and_then(|y| {
            let len = libm::sqrt(y.iter().map(|v| v * v).sum());
            let b: Vec<f64> = y.iter().map(|v| -(v.max(0.0)) / len).collect();
            verify_beta(q, n, &b)
        });
        let alpha = t > CERT_TOL;
        if alpha != beta.is_some() && (alpha || t <= 0.0) {
            return Ok(BranchProbe { alpha, beta: beta.is_some(), exact: false });
        }
    }
    let qr: Option<Vec<BigRational>> = q.iter().map(|&v| BigRational::from_float(v)).collect();
    let qr = qr.ok_or(Error::NotSkewSymmetric)?;
    let fail = || Error::SolverFailure("Gordan simplex failed".into());
    let (t, _) = solve_alpha(&qr, n).ok_or_else(fail)?;
    Ok(BranchProbe { alpha: t.is_positive(), beta: solve_beta(&qr, n).is_some(), exact: true })
}

enum Branch<T> {
    Alpha(Vec<T>),
    Beta(Vec<T>),
}

/// Scalar field for the simplex. Floats compare with a tolerance.
trait Field:
    Clone + Zero + One + PartialOrd + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn pos(&self) -> bool;
    fn neg_(&self) -> bool;
}

impl Field for f64 {
    fn pos(&self) -> bool {
        *self > 1e-11
    }
    fn neg_(&self) -> bool {
        *self < -1e-11
    }
}

impl Field for BigRational {
    fn pos(&self) -> bool {
        self.is_positive()
    }
    fn neg_(&self) -> bool {
        self.is_negative()
    }
}

/// Maximize cᵀx subject to Ax = b, x ≥ 0, from a feasible starting basis
/// whose columns of A form an identity. Returns None when unbounded.
struct Tableau<T> {
    rows: usize,
    cols: usize,
    // (rows+1) × (cols+1); last row holds reduced costs, last column the rhs
    t: Vec<T>,
    basis: Vec<usize>,
}

impl<T: Field> Tableau<T> {
    fn new(a: Vec<T>, b: Vec<T>, c: &[T], basis: Vec<usize>) -> Self {
        let rows = b.len();
        let cols = c.len();
        let w = cols + 1;
        let mut t = vec![T::zero(); (rows + 1) * w];
        for i in 0..rows {
            for j in 0..cols {
                t[i * w + j] = a[i * cols + j].clone();
            }
            t[i * w + cols] = b[i].clone();
        }
        for j in 0..cols {
            t[rows * w + j] = -c[j].clone();
        }
        let mut tab = Tableau { rows, cols, t, basis };
        for i in 0..rows {
            let bj = tab.basis[i];
            let f = tab.t[rows * w + bj].clone();
            if f.pos() || f.neg_() {
                for j in 0..w {
                    let v = tab.t[rows * w + j].clone() - f.clone() * tab.t[i * w + j].clone();
                    tab.t[rows * w + j] = v;
                }
            }
        }
        tab
    }

    fn at(&self, i: usize, j: usize) -> &T {
        &self.t[i * (self.cols + 1) + j]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.cols + 1;
        let p = self.at(r, c).clone();
        for j in 0..w {
            self.t[r * w + j] = self.t[r * w + j].clone() / p.clone();
        }
        for i in 0..=self.rows {
            if i == r {
                continue;
            }
            let f = self.at(i, c).clone();
            if !(f.pos() || f.neg_()) {
                continue;
            }
            for j in 0..w {
                let v = self.t[i * w + j].clone() - f.clone() * self.t[r * w + j].clone();
                self.t[i * w + j] = v;
            }
        }
        self.basis[r] = c;
    }

    /// Bland's rule; `allowed` masks columns that may enter.
    fn run(&mut self, allowed: &[bool]) -> Option<()> {
        for _ in 0..100_000 {
            let Some(c) = (0..self.cols).find(|&j| allowed[j] && self.at(self.rows, j).neg_()) else {
                return Some(());
            };
            let mut best: Option<(usize, T)> = None;
            for i in 0..self.rows {
                let a = self.at(i, c);
                if !a.pos() {
                    continue;
                }
                let ratio = self.at(i, self.cols).clone() / a.clone();
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        let d = ratio.clone() - br.clone();
                        if d.neg_() || (!d.pos() && self.basis[i] < self.basis[bi]) {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            let (r, _) = best?;
            self.pivot(r, c);
        }
        None
    }

    fn value(&self, j: usize) -> T {
        match self.basis.iter().position(|&b| b == j) {
            Some(i) => self.at(i, self.cols).clone(),
            None => T::zero(),
        }
    }
}

/// max t s.t. Qα + t·1 ≤ 0, t ≤ 1, α free. Columns: α⁺, α⁻, t, s, u.
fn solve_alpha<T: Field>(q: &[T], n: usize) -> Option<(T, Vec<T>)> {
    let cols = 3 * n + 2;
    let rows = n + 1;
    let mut a = vec![T::zero(); rows * cols];
    for i in 0..n {
        for j in 0..n {
            a[i * cols + j] = q[i * n + j].clone();
            a[i * cols + n + j] = -q[i * n + j].clone();
        }
        a[i * cols + 2 * n] = T::one();
        a[i * cols + 2 * n + 1 + i] = T::one();
    }
    a[n * cols + 2 * n] = T::one();
    a[n * cols + 3 * n + 1] = T::one();
    let mut b = vec![T::zero(); rows];
    b[n] = T::one();
    let mut c = vec![T::zero(); cols];
    c[2 * n] = T::one();
    let basis = (0..rows).map(|i| 2 * n + 1 + i).collect();
    let mut tab = Tableau::new(a, b, &c, basis);
    tab.run(&vec![true; cols])?;
    let alpha = (0..n).map(|j| tab.value(j) - tab.value(n + j)).collect();
    Some((tab.value(2 * n), alpha))
}

/// Phase one for y ≥ 0, Qy = 0, 1ᵀy = 1. Columns: y, artificials.
fn solve_beta<T: Field>(q: &[T], n: usize) -> Option<Vec<T>> {
    let rows = n + 1;
    let cols = n + rows;
    let mut a = vec![T::zero(); rows * cols];
    for i in 0..n {
        for j in 0..n {
            a[i * cols + j] = q[i * n + j].clone();
        }
    }
    for j in 0..n {
        a[n * cols + j] = T::one();
    }
    for i in 0..rows {
        a[i * cols + n + i] = T::one();
    }
    let mut b = vec![T::zero(); rows];
    b[n] = T::one();
    let mut c = vec![T::zero(); cols];
    for cj in c.iter_mut().skip(n) {
        *cj = -T::one();
    }
    let basis = (0..rows).map(|i| n + i).collect();
    let mut tab = Tableau::new(a, b, &c, basis);
    tab.run(&vec![true; cols])?;
    let infeasible = (n..cols).any(|j| tab.value(j).pos());
    if infeasible {
        return None;
    }
    Some((0..n).map(|j| tab.value(j)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_alpha() {
        let c = gordan_certificate(&[0.0, 1.0, -1.0, 0.0], 2).unwrap();
        let GordanBranch::Alpha(a) = &c.branch else { panic!("expected alpha") };
        let s = core::f64::consts::FRAC_1_SQRT_2;
        assert!((a[0] - s).abs() < 1e-12 && (a[1] + s).abs() < 1e-12);
    }

    #[test]
    fn cycle_beta() {
        let w = WalkSpec::cycle(3, 0.7).unwrap();
        let c = gordan_certificate(&drift_matrix(&w, &[0, 1, 2]), 3).unwrap();
        let GordanBranch::Beta(b) = &c.branch else { panic!("expected beta") };
        for v in b {
            assert!((v + 1.0 / libm::sqrt(3.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_skew() {
        assert_eq!(gordan_certificate(&[0.0, 1.0, 1.0, 0.0], 2), Err(Error::NotSkewSymmetric));
    }

    #[test]
    fn exact_path_agrees() {
        let q = [0.0, 0.4, -0.4, -0.4, 0.0, 0.4, 0.4, -0.4, 0.0];
        let c = exact_attempt(&q, 3).unwrap();
        assert!(matches!(c.branch, GordanBranch::Beta(_)) && c.exact);
    }
}
