//! The underlying random walk, particle configurations, and inclusion-process
//! kinetics.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph;
use crate::linalg;

/// Hard limit on |S|; every dense per-site computation relies on it.
pub const MAX_SITES: usize = 64;

/// Site label as written in a walk document: a number or a string.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SiteLabel {
    Int(i64),
    Text(String),
}

impl fmt::Display for SiteLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SiteLabel::Int(i) => write!(f, "{i}"),
            SiteLabel::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WalkDoc {
    sites: Vec<SiteLabel>,
    rates: Vec<Vec<f64>>,
}

/// Outgoing transitions of every site, `out[x] = [(y, r(x,y)), ...]` for r > 0.
/// Shared by the walk and the torus so the sampler works on both.
#[derive(Clone, Debug, PartialEq)]
pub struct RateGraph {
    pub out: Vec<Vec<(usize, f64)>>,
}

impl RateGraph {
    pub fn sites(&self) -> usize {
        self.out.len()
    }

    pub fn lambda(&self, x: usize) -> f64 {
        self.out[x].iter().map(|&(_, r)| r).sum()
    }
}

/// Site set and rate matrix r(x,y). Labels are canonicalized to indices
/// 0..κ; the original labels live in `names`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WalkDoc", into = "WalkDoc")]
pub struct WalkSpec {
    names: Vec<SiteLabel>,
    rates: Vec<f64>,
    graph: RateGraph,
}

impl TryFrom<WalkDoc> for WalkSpec {
    type Error = Error;
    fn try_from(doc: WalkDoc) -> Result<Self> {
        WalkSpec::with_labels(doc.sites, doc.rates)
    }
}

impl From<WalkSpec> for WalkDoc {
    fn from(w: WalkSpec) -> Self {
        let k = w.kappa();
        WalkDoc { rates: (0..k).map(|x| w.rates[x * k..(x + 1) * k].to_vec()).collect(), sites: w.names }
    }
}

impl WalkSpec {
    /// Walk on sites labelled 0..κ.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let names = (0..rows.len() as i64).map(SiteLabel::Int).collect();
        Self::with_labels(names, rows)
    }

    /// Validates shape, zero diagonal and nonnegative finite entries.
    /// Irreducibility is checked by [`analyze_walk`], not here, so that
    /// degenerate walks (e.g. totally asymmetric pairs) stay usable by the
    /// exact engine and the simulator.
    pub fn with_labels(names: Vec<SiteLabel>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.len();
        if k < 2 {
            return Err(Error::InvalidWalk("need at least two sites".to_string()));
        }
        if k > MAX_SITES {
            return Err(Error::InvalidWalk(format!("at most {MAX_SITES} sites supported")));
        }
        if names.len() != k {
            return Err(Error::InvalidWalk("sites and rates disagree in size".to_string()));
        }
        let mut rates = Vec::with_capacity(k * k);
        for (x, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(Error::InvalidWalk(format!("rate row {x} has wrong length")));
            }
            for (y, &r) in row.iter().enumerate() {
                if !r.is_finite() || r < 0.0 {
                    return Err(Error::InvalidWalk(format!("rate ({x},{y}) must be finite and >= 0")));
                }
                if x == y && r != 0.0 {
                    return Err(Error::InvalidWalk(format!("diagonal rate at {x} is nonzero")));
                }
                rates.push(r);
            }
        }
        for i in 0..k {
            for j in i + 1..k {
                if names[i] == names[j] {
                    return Err(Error::InvalidWalk(format!("duplicate site label {}", names[i])));
                }
            }
        }
        let out = (0..k)
            .map(|x| (0..k).filter(|&y| rates[x * k + y] > 0.0).map(|y| (y, rates[x * k + y])).collect())
            .collect();
        Ok(WalkSpec { names, rates, graph: RateGraph { out } })
    }

    /// Nearest-neighbour walk on the cycle 0 → 1 → ... → κ-1 → 0 with
    /// clockwise rate `p` and counter-clockwise rate `1 - p`.
    pub fn cycle(kappa: usize, p: f64) -> Result<Self> {
        let mut rows = vec![vec![0.0; kappa]; kappa];
        for x in 0..kappa {
            rows[x][(x + 1) % kappa] += p;
            rows[(x + 1) % kappa][x] += 1.0 - p;
        }
        Self::from_rows(rows)
    }

    pub fn kappa(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[SiteLabel] {
        &self.names
    }

    pub fn index_of(&self, label: &SiteLabel) -> Option<usize> {
        self.names.iter().position(|n| n == label)
    }

    #[inline]
    pub fn rate(&self, x: usize, y: usize) -> f64 {
        self.rates[x * self.kappa() + y]
    }

    /// λ(x) = Σ_y r(x,y).
    pub fn lambda(&self, x: usize) -> f64 {
        self.graph.lambda(x)
    }

    pub fn graph(&self) -> &RateGraph {
        &self.graph
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        let k = self.kappa();
        (0..k).map(|x| self.rates[x * k..(x + 1) * k].to_vec()).collect()
    }

    /// x ∼ y: the pair interacts in at least one direction.
    pub fn neighbors(&self, x: usize, y: usize) -> bool {
        x != y && self.rate(x, y) + self.rate(y, x) > 0.0
    }

    pub(crate) fn adjacency(&self) -> Vec<Vec<usize>> {
        self.graph.out.iter().map(|o| o.iter().map(|&(y, _)| y).collect()).collect()
    }
}

/// Derived quantities of a walk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkAnalysis {
    pub m: Vec<f64>,
    pub m_star: f64,
    pub s_max: Vec<usize>,
    pub r1: f64,
    pub r2: f64,
    pub lambda_max: f64,
    /// q_{x,y} for x ∼ y, `None` otherwise; row-major κ×κ.
    q_pair: Vec<Option<f64>>,
    pub q: f64,
    pub rev: bool,
    pub ui: bool,
    pub up: bool,
    pub balance_residual: f64,
}

impl WalkAnalysis {
    pub fn q_pair(&self, x: usize, y: usize) -> Option<f64> {
        let k = self.m.len();
        self.q_pair[x * k + y]
    }
}

const FLAG_TOL: f64 = 1e-12;

pub fn analyze_walk(spec: &WalkSpec) -> Result<WalkAnalysis> {
    let k = spec.kappa();
    if !graph::is_strongly_connected(&spec.adjacency()) {
        return Err(Error::NonIrreducibleWalk);
    }
    // Σ_x m(x) r(x,y) - m(y) λ(y) = 0, last equation replaced by Σ m = 1
    let mut a = vec![0.0; k * k];
    for y in 0..k {
        for x in 0..k {
            a[y * k + x] = if x == y { -spec.lambda(y) } else { spec.rate(x, y) };
        }
    }
    for x in 0..k {
        a[(k - 1) * k + x] = 1.0;
    }
    let mut m = vec![0.0; k];
    m[k - 1] = 1.0;
    linalg::dense_solve(a, k, &mut m)?;
    let total: f64 = m.iter().sum();
    m.iter_mut().for_each(|v| *v /= total);

    let balance_residual = (0..k)
        .map(|y| {
            let inflow: f64 = (0..k).map(|x| m[x] * spec.rate(x, y)).sum();
            (inflow - m[y] * spec.lambda(y)).abs()
        })
        .fold(0.0, f64::max);

    let m_star = m.iter().copied().fold(f64::MIN, f64::max);
    let s_max = (0..k).filter(|&x| (m_star - m[x]).abs() <= FLAG_TOL).collect();

    let mut r1 = f64::INFINITY;
    let mut r2 = 0.0f64;
    let mut q_pair = vec![None; k * k];
    let q = asymmetry_q(spec);
    let mut up = true;
    let mut rev_res = 0.0f64;
    for x in 0..k {
        for y in 0..k {
            if x == y {
                continue;
            }
            let r = spec.rate(x, y);
            if r > 0.0 {
                r1 = r1.min(r);
            } else {
                up = false;
            }
            r2 = r2.max(r);
            rev_res = rev_res.max((m[x] * r - m[y] * spec.rate(y, x)).abs());
            if spec.neighbors(x, y) {
                let (a, b) = (r, spec.rate(y, x));
                q_pair[x * k + y] = Some(a.min(b) / a.max(b));
            }
        }
    }
    let lambda_max = (0..k).map(|x| spec.lambda(x)).fold(0.0, f64::max);
    let ui = m.iter().all(|&v| (v - 1.0 / k as f64).abs() <= FLAG_TOL);
    Ok(WalkAnalysis {
        m,
        m_star,
        s_max,
        r1,
        r2,
        lambda_max,
        q_pair,
        q,
        rev: rev_res <= FLAG_TOL,
        ui,
        up,
        balance_residual,
    })
}

/// q = max of min/max over neighbouring pairs with unequal rates, 0 if
/// there is no such pair. Needs no irreducibility.
pub fn asymmetry_q(spec: &WalkSpec) -> f64 {
    let k = spec.kappa();
    let mut q = 0.0f64;
    for x in 0..k {
        for y in x + 1..k {
            let (a, b) = (spec.rate(x, y), spec.rate(y, x));
            if a != b {
                q = q.max(a.min(b) / a.max(b));
            }
        }
    }
    q
}

/// How d_N depends on N: `scale · N^(-exponent) · (ln N)^(-log_exponent)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Schedule {
    Constant { d: f64 },
    Power { scale: f64, exponent: f64, #[serde(default)] log_exponent: f64 },
}

impl Schedule {
    pub fn eval(&self, n: u32) -> f64 {
        match *self {
            Schedule::Constant { d } => d,
            Schedule::Power { scale, exponent, log_exponent } => {
                let nf = n as f64;
                let mut d = scale * libm::pow(nf, -exponent);
                if log_exponent != 0.0 {
                    d *= libm::pow(libm::log(nf), -log_exponent);
                }
                d
            }
        }
    }
}

/// Particle number and diffusion parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessParams {
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(rename = "d_N")]
    pub d: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Schedule>,
}

impl ProcessParams {
    pub fn new(n: u32, d: f64) -> Result<Self> {
        let p = ProcessParams { n, d, schedule: None };
        p.validate()?;
        Ok(p)
    }

    pub fn from_schedule(n: u32, schedule: Schedule) -> Result<Self> {
        let p = ProcessParams { n, d: schedule.eval(n), schedule: Some(schedule) };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParams("N must be positive".to_string()));
        }
        if !(self.d > 0.0) || !self.d.is_finite() {
            return Err(Error::InvalidParams("d_N must be a positive finite number".to_string()));
        }
        Ok(())
    }
}

/// Particle counts per site.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Configuration {
    pub counts: Vec<u32>,
}

impl Configuration {
    pub fn new(counts: Vec<u32>) -> Self {
        Configuration { counts }
    }

    /// ξ^x: all `n` particles at `x`.
    pub fn condensed(kappa: usize, n: u32, x: usize) -> Self {
        let mut counts = vec![0; kappa];
        counts[x] = n;
        Configuration { counts }
    }

    /// ζ_i^{x,y}: N−i particles at x and i at y.
    pub fn tube(kappa: usize, n: u32, x: usize, y: usize, i: u32) -> Self {
        let mut counts = vec![0; kappa];
        counts[x] = n - i;
        counts[y] = i;
        Configuration { counts }
    }

    /// As even a split as possible, remainder on the lowest sites.
    pub fn balanced(kappa: usize, n: u32) -> Self {
        let base = n / kappa as u32;
        let extra = (n % kappa as u32) as usize;
        Configuration { counts: (0..kappa).map(|x| base + u32::from(x < extra)).collect() }
    }

    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }

    pub fn sites(&self) -> usize {
        self.counts.len()
    }

    /// The site holding every particle, if any.
    pub fn condensate_site(&self) -> Option<usize> {
        let n = self.total();
        self.counts.iter().position(|&c| c == n && n > 0)
    }

    pub fn check(&self, kappa: usize, n: u32) -> Result<()> {
        if self.sites() != kappa {
            return Err(Error::DimensionMismatch);
        }
        if self.total() != n {
            return Err(Error::InvalidConfiguration(format!(
                "counts sum to {} instead of {n}",
                self.total()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.counts.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

/// σ^{x,y}η: one particle from x to y, or η itself when x is empty.
pub fn apply_move(eta: &Configuration, x: usize, y: usize) -> Result<Configuration> {
    if x == y {
        return Err(Error::SameSite);
    }
    if x >= eta.sites() || y >= eta.sites() {
        return Err(Error::DimensionMismatch);
    }
    let mut out = eta.clone();
    if out.counts[x] > 0 {
        out.counts[x] -= 1;
        out.counts[y] += 1;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Move {
    pub from: usize,
    pub to: usize,
    pub rate: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalKinetics {
    pub moves: Vec<Move>,
    pub holding: f64,
    /// (x, y, p_N(η, σ^{x,y}η)) aligned with `moves`.
    pub probs: Vec<(usize, usize, f64)>,
}

/// Rate of x → y at η: η_x (d + η_y) r(x,y).
#[inline]
pub fn move_rate(eta_x: u32, eta_y: u32, d: f64, r: f64) -> f64 {
    eta_x as f64 * (d + eta_y as f64) * r
}

pub fn local_kinetics(spec: &WalkSpec, params: &ProcessParams, eta: &Configuration) -> Result<LocalKinetics> {
    eta.check(spec.kappa(), params.n)?;
    let mut moves = Vec::new();
    for x in 0..spec.kappa() {
        let ex = eta.counts[x];
        if ex == 0 {
            continue;
        }
        for &(y, r) in &spec.graph().out[x] {
            moves.push(Move { from: x, to: y, rate: move_rate(ex, eta.counts[y], params.d, r) });
        }
    }
    let holding: f64 = moves.iter().map(|m| m.rate).sum();
    let probs = moves.iter().map(|m| (m.from, m.to, m.rate / holding)).collect();
    Ok(LocalKinetics { moves, holding, probs })
}

/// (L_N F)(η) = Σ η_x (d + η_y) r(x,y) [F(σ^{x,y}η) − F(η)].
pub fn generator_apply<F>(spec: &WalkSpec, params: &ProcessParams, f: F, eta: &Configuration) -> Result<f64>
where
    F: Fn(&Configuration) -> Option<f64>,
{
    let kin = local_kinetics(spec, params, eta)?;
    let here = f(eta).ok_or(Error::MissingValue)?;
    let mut acc = 0.0;
    for m in &kin.moves {
        let there = f(&apply_move(eta, m.from, m.to)?).ok_or(Error::MissingValue)?;
        acc += m.rate * (there - here);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym2() -> WalkSpec {
        WalkSpec::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
    }

    #[test]
    fn cycle_analysis() {
        let w = WalkSpec::cycle(3, 0.7).unwrap();
        let a = analyze_walk(&w).unwrap();
        for v in &a.m {
            assert!((v - 1.0 / 3.0).abs() < 1e-14);
        }
        assert!(a.ui && !a.rev && a.up);
        assert!((a.q - 3.0 / 7.0).abs() < 1e-15);
        assert_eq!(a.q_pair(0, 1), a.q_pair(1, 0));
        assert!((a.r1 - 0.3).abs() < 1e-15 && (a.r2 - 0.7).abs() < 1e-15);
        assert!((a.lambda_max - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_site_reversible() {
        let w = WalkSpec::from_rows(vec![vec![0.0, 2.0], vec![1.0, 0.0]]).unwrap();
        let a = analyze_walk(&w).unwrap();
        assert!((a.m[0] - 1.0 / 3.0).abs() < 1e-14 && (a.m[1] - 2.0 / 3.0).abs() < 1e-14);
        assert!(a.rev && !a.ui);
        assert_eq!(a.s_max, vec![1]);
        assert!((a.q - 0.5).abs() < 1e-15);
    }

    #[test]
    fn symmetric_walk_has_q_zero() {
        let a = analyze_walk(&sym2()).unwrap();
        assert_eq!(a.q, 0.0);
        assert_eq!(a.q_pair(0, 1), Some(1.0));
    }

    #[test]
    fn reducible_walk_rejected_by_analysis_only() {
        let w = WalkSpec::from_rows(vec![vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(analyze_walk(&w), Err(Error::NonIrreducibleWalk));
    }

    #[test]
    fn bad_documents_rejected() {
        assert!(WalkSpec::from_rows(vec![vec![1.0, 1.0], vec![1.0, 0.0]]).is_err());
        assert!(WalkSpec::from_rows(vec![vec![0.0, 1.0], vec![1.0]]).is_err());
        assert!(WalkSpec::from_rows(vec![vec![0.0, -1.0], vec![1.0, 0.0]]).is_err());
        let doc = r#"{"sites":["a","b"],"rates":[[0,1],[1,1]]}"#;
        assert!(serde_json::from_str::<WalkSpec>(doc).is_err());
    }

    #[test]
    fn json_round_trip() {
        let doc = r#"{"sites":["a",2],"rates":[[0.0,0.7],[0.3,0.0]]}"#;
        let w: WalkSpec = serde_json::from_str(doc).unwrap();
        assert_eq!(w.rate(0, 1), 0.7);
        assert_eq!(w.index_of(&SiteLabel::Int(2)), Some(1));
        let back: WalkSpec = serde_json::from_str(&serde_json::to_string(&w).unwrap()).unwrap();
        assert_eq!(back, w);
    }

    #[test]
    fn moves() {
        let e = Configuration::new(vec![2, 1, 0]);
        assert_eq!(apply_move(&e, 1, 2).unwrap().counts, vec![2, 0, 1]);
        assert_eq!(apply_move(&e, 0, 1).unwrap().counts, vec![1, 2, 0]);
        let e = Configuration::new(vec![0, 3]);
        assert_eq!(apply_move(&e, 0, 1).unwrap(), e);
        let e = Configuration::new(vec![1, 1]);
        assert_eq!(apply_move(&e, 0, 1).unwrap().counts, vec![0, 2]);
        assert_eq!(apply_move(&e, 1, 1), Err(Error::SameSite));
    }

    #[test]
    fn kinetics_examples() {
        let w = sym2();
        let p = ProcessParams::new(3, 0.1).unwrap();
        let k = local_kinetics(&w, &p, &Configuration::new(vec![2, 1])).unwrap();
        assert!((k.moves[0].rate - 2.2).abs() < 1e-14);
        assert!((k.moves[1].rate - 2.1).abs() < 1e-14);
        assert!((k.holding - 4.3).abs() < 1e-14);
        let s: f64 = k.probs.iter().map(|t| t.2).sum();
        assert!((s - 1.0).abs() < 1e-15);

        let p = ProcessParams::new(5, 0.01).unwrap();
        let k = local_kinetics(&w, &p, &Configuration::condensed(2, 5, 0)).unwrap();
        assert!((k.holding - 0.05).abs() < 1e-15);
    }

    #[test]
    fn tube_holding_rate() {
        let w = WalkSpec::from_rows(vec![
            vec![0.0, 0.7, 0.2],
            vec![0.4, 0.0, 0.5],
            vec![0.3, 0.6, 0.0],
        ])
        .unwrap();
        let (n, d) = (9u32, 0.03);
        let p = ProcessParams::new(n, d).unwrap();
        for i in 0..=n {
            let eta = Configuration::tube(3, n, 0, 1, i);
            let k = local_kinetics(&w, &p, &eta).unwrap();
            let (nf, fi) = (n as f64, i as f64);
            let want = fi * (nf - fi) * (w.rate(0, 1) + w.rate(1, 0))
                + d * ((nf - fi) * w.lambda(0) + fi * w.lambda(1));
            assert!((k.holding - want).abs() < 1e-12 * want.max(1.0), "i={i}");
        }
    }

    #[test]
    fn generator_examples() {
        let w = sym2();
        let p = ProcessParams::new(2, 0.1).unwrap();
        let fx = |e: &Configuration| Some(e.counts[0] as f64);
        let v = generator_apply(&w, &p, fx, &Configuration::new(vec![1, 1])).unwrap();
        assert!(v.abs() < 1e-15);
        let v = generator_apply(&w, &p, fx, &Configuration::new(vec![2, 0])).unwrap();
        assert!((v + 0.2).abs() < 1e-15);
        let v = generator_apply(&w, &p, |_| Some(3.0), &Configuration::new(vec![0, 2])).unwrap();
        assert_eq!(v, 0.0);
        let partial = |e: &Configuration| (e.counts[0] != 1).then_some(1.0);
        assert_eq!(
            generator_apply(&w, &p, partial, &Configuration::new(vec![2, 0])),
            Err(Error::MissingValue)
        );
    }

    #[test]
    fn schedule_eval() {
        let s = Schedule::Power { scale: 1.0, exponent: 3.0, log_exponent: 0.0 };
        assert!((s.eval(10) - 1e-3).abs() < 1e-18);
        let p = ProcessParams::from_schedule(10, s).unwrap();
        assert!((p.d - 1e-3).abs() < 1e-18);
        assert!(ProcessParams::new(3, -0.1).is_err());
    }
}
