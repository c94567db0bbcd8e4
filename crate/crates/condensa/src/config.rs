//! Experiment configuration: one JSON document per run, versioned, with
//! unknown keys rejected. Deserialization errors and semantic checks both
//! report the dotted path of the offending field.

use std::path::Path;

use condensa_core::simulator::Horizon;
use condensa_core::thermo::KernelEntry;
use condensa_core::walk::Schedule;
use condensa_core::{Configuration, ProcessParams, WalkSpec};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Used whenever neither the config nor the command line names a seed.
pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Stationary,
    Meanrate,
    Classify,
    Simulate,
    Nucleation,
    Thermo,
    Verify,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Stationary => "stationary",
            Kind::Meanrate => "meanrate",
            Kind::Classify => "classify",
            Kind::Simulate => "simulate",
            Kind::Nucleation => "nucleation",
            Kind::Thermo => "thermo",
            Kind::Verify => "verify",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Quick,
    Full,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartSpec {
    /// N/κ per site, remainder on the lowest sites
    Balanced,
    Condensed { site: usize },
    Counts(Vec<u32>),
}

impl StartSpec {
    pub fn configuration(&self, kappa: usize, n: u32) -> Configuration {
        match self {
            StartSpec::Balanced => Configuration::balanced(kappa, n),
            StartSpec::Condensed { site } => Configuration::condensed(kappa, n, *site),
            StartSpec::Counts(c) => Configuration::new(c.clone()),
        }
    }
}

/// Monte Carlo estimate of the mean-jump rates alongside the exact solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSpec {
    pub replicas: u64,
    #[serde(default = "default_jumps")]
    pub jumps: u64,
    #[serde(default = "default_events")]
    pub events: u64,
}

fn default_jumps() -> u64 {
    20
}

fn default_events() -> u64 {
    10_000_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChainSpec {
    /// continuous-time process until some site holds at most δ ln N particles
    Inclusion { delta: f64 },
    /// reversed auxiliary chain until the inner-core boundary, counted in steps
    Auxiliary { sites: Vec<usize>, eps: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NucleationSpec {
    pub chain: ChainSpec,
    #[serde(rename = "N")]
    pub ns: Vec<u32>,
    pub schedule: Schedule,
    pub start: StartSpec,
    pub replicas: u64,
    #[serde(default = "default_step_cap")]
    pub step_cap: u64,
}

fn default_step_cap() -> u64 {
    1_000_000_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackerSpec {
    pub window: f64,
    pub replicas: u64,
    pub lags: Vec<f64>,
    #[serde(default = "default_event_cap")]
    pub event_cap: u64,
}

fn default_event_cap() -> u64 {
    200_000_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusConfig {
    pub dim: usize,
    pub side: usize,
    pub kernel: Vec<KernelEntry>,
    pub rho: f64,
    /// regime default when absent
    #[serde(rename = "d_L", default, skip_serializing_if = "Option::is_none")]
    pub d_l: Option<f64>,
    /// sides for the generator-gap sweep
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gap_sides: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tracker: Option<TrackerSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub walk: Option<WalkSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ProcessParams>,
    /// the set A; all sites when absent
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sites: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<StartSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<Horizon>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nucleation: Option<NucleationSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torus: Option<TorusConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<Level>,
}

fn default_output_dir() -> String {
    "out".to_string()
}

impl ExperimentConfig {
    /// Config for a suite run with no file.
    pub fn verify(level: Level) -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            kind: Kind::Verify,
            seed: None,
            output_dir: default_output_dir(),
            walk: None,
            params: None,
            sites: None,
            start: None,
            horizon: None,
            mc: None,
            nucleation: None,
            torus: None,
            level: Some(level),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::config(path, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn walk(&self) -> Result<&WalkSpec> {
        self.walk.as_ref().ok_or_else(|| missing("walk", self.kind))
    }

    pub fn params(&self) -> Result<&ProcessParams> {
        self.params.as_ref().ok_or_else(|| missing("params", self.kind))
    }

    pub fn site_set(&self) -> Result<Vec<usize>> {
        Ok(match &self.sites {
            Some(s) => s.clone(),
            None => (0..self.walk()?.kappa()).collect(),
        })
    }

    /// Semantic checks that serde cannot express.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::config(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        if let Some(p) = &self.params {
            check_params(p, "params")?;
        }
        let kappa = self.walk.as_ref().map(WalkSpec::kappa);
        if let (Some(sites), Some(k)) = (&self.sites, kappa) {
            check_sites(sites, k, "sites")?;
        }
        match self.kind {
            Kind::Stationary | Kind::Meanrate => {
                self.walk()?;
                self.params()?;
            }
            Kind::Classify => {
                self.walk()?;
            }
            Kind::Simulate => {
                let k = self.walk()?.kappa();
                let n = self.params()?.n;
                let start = self.start.as_ref().ok_or_else(|| missing("start", self.kind))?;
                check_start(start, k, n, "start")?;
                match self.horizon.as_ref().ok_or_else(|| missing("horizon", self.kind))? {
                    Horizon::Time(t) if !(*t > 0.0 && t.is_finite()) => {
                        return Err(CliError::config("horizon.value", "time horizon must be positive and finite"));
                    }
                    _ => {}
                }
            }
            Kind::Nucleation => {
                let k = self.walk()?.kappa();
                let nuc = self.nucleation.as_ref().ok_or_else(|| missing("nucleation", self.kind))?;
                if nuc.ns.is_empty() {
                    return Err(CliError::config("nucleation.N", "at least one particle number is required"));
                }
                if nuc.replicas == 0 {
                    return Err(CliError::config("nucleation.replicas", "must be positive"));
                }
                for (i, &n) in nuc.ns.iter().enumerate() {
                    let p = ProcessParams { n, d: nuc.schedule.eval(n.max(1)), schedule: None };
                    if p.n == 0 {
                        return Err(CliError::config(format!("nucleation.N[{i}]"), "must be positive"));
                    }
                    if !(p.d > 0.0 && p.d.is_finite()) {
                        return Err(CliError::config("nucleation.schedule", format!("d_N is not positive at N = {n}")));
                    }
                    check_start(&nuc.start, k, n, "nucleation.start")?;
                }
                match &nuc.chain {
                    ChainSpec::Inclusion { delta } if !(*delta > 0.0 && delta.is_finite()) => {
                        return Err(CliError::config("nucleation.chain.delta", "must be positive"));
                    }
                    ChainSpec::Auxiliary { sites, eps } => {
                        check_sites(sites, k, "nucleation.chain.sites")?;
                        if !(*eps > 0.0 && *eps < 1.0) {
                            return Err(CliError::config("nucleation.chain.eps", "must lie in (0, 1)"));
                        }
                    }
                    _ => {}
                }
            }
            Kind::Thermo => {
                let t = self.torus.as_ref().ok_or_else(|| missing("torus", self.kind))?;
                if !(t.rho > 0.0 && t.rho.is_finite()) {
                    return Err(CliError::config("torus.rho", "must be positive"));
                }
                if let Some(d) = t.d_l {
                    if !(d > 0.0 && d.is_finite()) {
                        return Err(CliError::config("torus.d_L", "must be positive"));
                    }
                }
                if let Some(tr) = &t.tracker {
                    if !(tr.window > 0.0 && tr.window.is_finite()) {
                        return Err(CliError::config("torus.tracker.window", "must be positive"));
                    }
                    if tr.lags.iter().any(|&l| !(l > 0.0 && l <= tr.window)) {
                        return Err(CliError::config("torus.tracker.lags", "lags must lie in (0, window]"));
                    }
                }
            }
            Kind::Verify => {
                if self.level.is_none() {
                    return Err(missing("level", self.kind));
                }
            }
        }
        Ok(())
    }
}

fn missing(field: &str, kind: Kind) -> CliError {
    CliError::config(field, format!("required for kind `{}`", kind.name()))
}

fn check_params(p: &ProcessParams, at: &str) -> Result<()> {
    if p.n == 0 {
        return Err(CliError::config(format!("{at}.N"), "must be positive"));
    }
    if !(p.d > 0.0 && p.d.is_finite()) {
        return Err(CliError::config(format!("{at}.d_N"), format!("must be positive and finite, got {}", p.d)));
    }
    Ok(())
}

fn check_sites(sites: &[usize], kappa: usize, at: &str) -> Result<()> {
    if sites.is_empty() {
        return Err(CliError::config(at, "must name at least one site"));
    }
    for (i, &x) in sites.iter().enumerate() {
        if x >= kappa {
            return Err(CliError::config(format!("{at}[{i}]"), format!("site {x} out of range for {kappa} sites")));
        }
        if sites[..i].contains(&x) {
            return Err(CliError::config(format!("{at}[{i}]"), format!("site {x} repeated")));
        }
    }
    Ok(())
}

fn check_start(s: &StartSpec, kappa: usize, n: u32, at: &str) -> Result<()> {
    match s {
        StartSpec::Balanced => Ok(()),
        StartSpec::Condensed { site } if *site >= kappa => {
            Err(CliError::config(format!("{at}.condensed.site"), format!("site {site} out of range")))
        }
        StartSpec::Condensed { .. } => Ok(()),
        StartSpec::Counts(c) => Configuration::new(c.clone())
            .check(kappa, n)
            .map_err(|e| CliError::config(format!("{at}.counts"), e.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const STATIONARY: &str = r#"{
        "schema_version": 1,
        "kind": "stationary",
        "walk": {"sites": [0, 1], "rates": [[0, 1], [1, 0]]},
        "params": {"N": 2, "d_N": 0.1}
    }"#;

    #[test]
    fn parses_and_round_trips() {
        let c = ExperimentConfig::from_json(STATIONARY).unwrap();
        assert_eq!(c.output_dir, "out");
        let again = ExperimentConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn unknown_key_has_path() {
        let text = STATIONARY.replace("\"N\": 2", "\"N\": 2, \"extra\": 1");
        match ExperimentConfig::from_json(&text) {
            Err(CliError::Config { path, .. }) => assert_eq!(path, "params.extra"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_d_names_field() {
        let text = STATIONARY.replace("0.1", "-0.1");
        match ExperimentConfig::from_json(&text) {
            Err(CliError::Config { path, .. }) => assert_eq!(path, "params.d_N"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_section() {
        let text = STATIONARY.replace("\"kind\": \"stationary\"", "\"kind\": \"simulate\"");
        match ExperimentConfig::from_json(&text) {
            Err(CliError::Config { path, .. }) => assert_eq!(path, "start"),
            other => panic!("{other:?}"),
        }
    }
}
