//! Dispatch from a config to an experiment, and artifact emission.

use std::path::Path;
use std::time::Instant;

use condensa_core::asymptotics::{
    classify, gordan_certificate, limit_chain, predicted_mean_rate, LimitMode,
};
use condensa_core::asymptotics::gordan::drift_matrix;
use condensa_core::generator::Generator;
use condensa_core::hitting::mean_jump_rate_exact;
use condensa_core::simulator::{scaling_fit, simulate, HittingChain, HittingTask, TraceBudget};
use condensa_core::stationary::{stationary_closed_form, stationary_exact};
use condensa_core::thermo::{
    build_torus, condensate_statistics, generator_gap, torus_condensation, torus_mean_rates, CosineMode, RateMethod,
    TorusSpec, TrackerConfig,
};
use condensa_core::{analyze_walk, ProcessParams};
use serde_json::{json, Value};

use crate::config::{ChainSpec, ExperimentConfig, Kind, TorusConfig};
use crate::error::{Context, Result};
use crate::io::{fmt_f64, json_bytes, write_file, Table};
use crate::parallel;
use crate::report::{Check, RunReport, Timing};
use crate::verify;

/// What an experiment produces before anything touches the disk.
#[derive(Debug, Default)]
pub struct Outcome {
    pub metrics: Value,
    pub checks: Vec<Check>,
    pub files: Vec<(String, Vec<u8>)>,
    pub sections: Vec<(String, f64)>,
}

impl Outcome {
    pub fn csv(&mut self, name: &str, t: &Table) -> Result<()> {
        self.files.push((name.to_string(), t.to_bytes()?));
        Ok(())
    }

    pub fn json(&mut self, name: &str, v: &impl serde::Serialize) -> Result<()> {
        self.files.push((name.to_string(), json_bytes(v)?));
        Ok(())
    }
}

pub fn dispatch(cfg: &ExperimentConfig, seed: u64) -> Result<Outcome> {
    match cfg.kind {
        Kind::Stationary => stationary(cfg),
        Kind::Meanrate => meanrate(cfg, seed),
        Kind::Classify => classify_walk(cfg),
        Kind::Simulate => simulate_run(cfg, seed),
        Kind::Nucleation => nucleation(cfg, seed),
        Kind::Thermo => thermo(cfg, seed),
        Kind::Verify => verify::run_suite(cfg.level.expect("validated"), seed),
    }
}

/// Runs the experiment and returns the report plus every file to write.
pub fn run(cfg: &ExperimentConfig, seed: u64) -> Result<(RunReport, Vec<(String, Vec<u8>)>, Timing)> {
    let t0 = Instant::now();
    let out = dispatch(cfg, seed)?;
    let mut config = cfg.clone();
    config.seed = Some(seed);
    let mut artifacts: Vec<String> = out.files.iter().map(|f| f.0.clone()).collect();
    artifacts.push("report.json".into());
    let pass = out.checks.iter().all(|c| c.pass);
    let report = RunReport { config, seed, metrics: out.metrics, checks: out.checks, artifacts, pass };
    let timing = Timing { wall_clock_s: t0.elapsed().as_secs_f64(), sections: out.sections };
    Ok((report, out.files, timing))
}

/// `run` followed by writing the artifacts, `report.json` and `timing.json`.
pub fn execute(cfg: &ExperimentConfig, seed: u64, out_dir: &Path) -> Result<RunReport> {
    let (report, files, timing) = run(cfg, seed)?;
    for (name, bytes) in &files {
        write_file(out_dir, name, bytes)?;
    }
    write_file(out_dir, "report.json", &json_bytes(&report)?)?;
    write_file(out_dir, "timing.json", &json_bytes(&timing)?)?;
    Ok(report)
}

fn stationary(cfg: &ExperimentConfig) -> Result<Outcome> {
    let walk = cfg.walk()?;
    let params = cfg.params()?;
    let k = walk.kappa();
    let mu = stationary_exact(walk, params).context("stationary solve")?;
    let closed = stationary_closed_form(walk, params).ok();
    let residual = Generator::build(walk, params).context("generator")?.balance_residual(&mu.weights);

    let mut header: Vec<String> = (0..k).map(|x| format!("eta_{x}")).collect();
    header.push("mu".into());
    if closed.is_some() {
        header.push("mu_closed".into());
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut table = Table::new(&header_refs);
    mu.enumeration().context("enumeration")?.for_each(|i, c| {
        let mut row: Vec<String> = c.iter().map(|v| v.to_string()).collect();
        row.push(fmt_f64(mu.weights[i]));
        if let Some(cl) = &closed {
            row.push(fmt_f64(cl.weights[i]));
        }
        table.push(row);
    });

    let condensed = mu.condensed_masses().context("condensed masses")?;
    let mut out = Outcome::default();
    let mut metrics = json!({
        "states": mu.len(),
        "condensed_masses": condensed,
        "condensed_total": condensed.iter().sum::<f64>(),
        "balance_residual": residual,
    });
    if let Some(cl) = &closed {
        let diff = mu.max_abs_diff(cl).context("closed form comparison")?;
        metrics["closed_form_max_diff"] = json!(diff);
        out.checks.push(Check::at_most("closed_form_max_diff", diff, 1e-10));
    }
    out.metrics = metrics;
    out.csv("stationary.csv", &table)?;
    Ok(out)
}

fn meanrate(cfg: &ExperimentConfig, seed: u64) -> Result<Outcome> {
    let walk = cfg.walk()?;
    let params = cfg.params()?;
    let a = cfg.site_set()?;
    let exact = mean_jump_rate_exact(walk, params, &a).context("mean-jump rate solve")?;
    let prediction = predicted_mean_rate(walk, &a, params.n, params.d);
    let mc = match &cfg.mc {
        Some(m) => Some(
            parallel::mean_jump_rate(walk, params, &a, m.replicas, TraceBudget { jumps: m.jumps, events: m.events }, seed)
                .context("Monte Carlo mean-jump rate")?,
        ),
        None => None,
    };

    let mut table = Table::new(&["x", "y", "rate", "normalized", "predicted", "mc_rate", "mc_std_error"]);
    let k = a.len();
    let mut worst: f64 = 0.0;
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            let pred = prediction.as_ref().ok().map(|p| p.values[i * k + j]);
            if let Some(p) = pred {
                worst = worst.max((exact.normalized[i * k + j] - p).abs());
            }
            let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
            table.push(vec![
                a[i].to_string(),
                a[j].to_string(),
                fmt_f64(exact.raw[i * k + j]),
                fmt_f64(exact.normalized[i * k + j]),
                opt(pred),
                opt(mc.as_ref().map(|m| m.rates[i * k + j])),
                opt(mc.as_ref().map(|m| m.std_errors[i * k + j])),
            ]);
        }
    }

    let mut out = Outcome::default();
    let mut metrics = json!({ "sites": a, "exact": exact });
    match &prediction {
        Ok(p) => {
            metrics["prediction"] = json!(p);
            metrics["max_abs_error"] = json!(worst);
            out.checks.push(Check::at_most("prediction_error_within_3x_scale", worst, 3.0 * p.error_bound));
        }
        Err(e) => metrics["prediction"] = json!({ "unavailable": e.to_string() }),
    }
    if let Some(m) = &mc {
        metrics["mc"] = json!(m);
    }
    out.metrics = metrics;
    out.csv("meanrate.csv", &table)?;
    Ok(out)
}

fn classify_walk(cfg: &ExperimentConfig) -> Result<Outcome> {
    let walk = cfg.walk()?;
    let c = classify(walk);
    let chain = |mode| match limit_chain(walk, &c, mode) {
        Ok(l) => json!(l),
        Err(e) => json!({ "unavailable": e.to_string() }),
    };
    let all: Vec<usize> = (0..walk.kappa()).collect();
    let gordan = gordan_certificate(&drift_matrix(walk, &all), all.len()).context("Gordan certificate")?;
    let analysis = match analyze_walk(walk) {
        Ok(a) => json!(a),
        Err(e) => json!({ "unavailable": e.to_string() }),
    };
    let metrics = json!({
        "classification": c,
        "limit_chain_rv": chain(LimitMode::Rv),
        "limit_chain_nrv": chain(LimitMode::Nrv),
        "gordan": gordan,
        "analysis": analysis,
    });
    let mut out = Outcome::default();
    out.json("classify.json", &metrics)?;
    out.metrics = metrics;
    Ok(out)
}

fn simulate_run(cfg: &ExperimentConfig, seed: u64) -> Result<Outcome> {
    let walk = cfg.walk()?;
    let params = cfg.params()?;
    let start = cfg.start.as_ref().expect("validated").configuration(walk.kappa(), params.n);
    let horizon = cfg.horizon.clone().expect("validated");
    let traj = simulate(walk, params, &start, horizon, seed).context("simulation")?;
    let mut table = Table::new(&["time", "from", "to"]);
    for e in &traj.events {
        table.push(vec![fmt_f64(e.time), e.from.to_string(), e.to.to_string()]);
    }
    let fin = traj.final_configuration();
    let mut out = Outcome::default();
    out.metrics = json!({
        "events": traj.events.len(),
        "horizon": traj.horizon,
        "initial": start,
        "final": fin,
        "final_condensate": fin.condensate_site(),
    });
    out.csv("trajectory.csv", &table)?;
    Ok(out)
}

fn nucleation(cfg: &ExperimentConfig, seed: u64) -> Result<Outcome> {
    let walk = cfg.walk()?;
    let nuc = cfg.nucleation.as_ref().expect("validated");
    let chain = match &nuc.chain {
        ChainSpec::Inclusion { delta } => HittingChain::Inclusion { delta: *delta },
        ChainSpec::Auxiliary { sites, eps } => HittingChain::Auxiliary { r: sites.clone(), eps: *eps },
    };
    let mut summary = Table::new(&["N", "d_N", "replicas", "mean", "std_error", "mean_over_N"]);
    let mut times = Table::new(&["N", "replica", "time"]);
    let mut points = Vec::new();
    let mut rows = Vec::new();
    for &n in &nuc.ns {
        let params = ProcessParams::from_schedule(n, nuc.schedule.clone()).context("schedule")?;
        let task = HittingTask {
            chain: chain.clone(),
            start: nuc.start.configuration(walk.kappa(), n),
            replicas: nuc.replicas,
            seed,
            step_cap: nuc.step_cap,
        };
        let res = parallel::hitting(&task, walk, &params).context(&format!("hitting times at N = {n}"))?;
        summary.push(vec![
            n.to_string(),
            fmt_f64(params.d),
            nuc.replicas.to_string(),
            fmt_f64(res.mean),
            fmt_f64(res.std_error),
            fmt_f64(res.mean / n as f64),
        ]);
        for (r, t) in res.times.iter().enumerate() {
            times.push(vec![n.to_string(), r.to_string(), fmt_f64(*t)]);
        }
        points.push((n as f64, res.mean));
        rows.push(json!({ "N": n, "d_N": params.d, "mean": res.mean, "std_error": res.std_error }));
    }
    let fit = if points.len() >= 2 { scaling_fit(&points).ok() } else { None };
    let mut out = Outcome::default();
    out.metrics = json!({ "rows": rows, "fit": fit });
    out.csv("nucleation.csv", &summary)?;
    out.csv("hitting_times.csv", &times)?;
    Ok(out)
}

fn torus_of(t: &TorusConfig, side: usize) -> Result<TorusSpec> {
    build_torus(t.dim, side, &t.kernel, t.rho, t.d_l).context(&format!("torus with side {side}"))
}

fn thermo(cfg: &ExperimentConfig, seed: u64) -> Result<Outcome> {
    let tc = cfg.torus.as_ref().expect("validated");
    let t = torus_of(tc, tc.side)?;
    let cond = torus_condensation(&t);
    let formula = torus_mean_rates(&t, RateMethod::Formula);
    let tube = torus_mean_rates(&t, RateMethod::Tube);
    let mut out = Outcome::default();

    let mut header: Vec<String> = (0..t.dim).map(|i| format!("y_{i}")).collect();
    header.extend(["formula".to_string(), "tube".to_string()]);
    let refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut rates = Table::new(&refs);
    for (i, y) in formula.offsets.iter().enumerate() {
        let mut row: Vec<String> = y.iter().map(|v| v.to_string()).collect();
        row.push(fmt_f64(formula.rates[i]));
        row.push(fmt_f64(tube.rate(y)));
        rates.push(row);
    }
    out.csv("torus_rates.csv", &rates)?;

    let mut metrics = json!({
        "torus": t,
        "condensation": cond,
        "rate_relative_difference": formula.relative_difference,
    });

    if !tc.gap_sides.is_empty() {
        let f = CosineMode { k: vec![1.0; t.dim] };
        let mut gaps = Table::new(&["L", "gap_formula", "gap_tube"]);
        let mut g = Vec::new();
        for &l in &tc.gap_sides {
            let tl = torus_of(tc, l)?;
            let (a, b) = (generator_gap(&tl, &f, RateMethod::Formula), generator_gap(&tl, &f, RateMethod::Tube));
            gaps.push(vec![l.to_string(), fmt_f64(a), fmt_f64(b)]);
            g.push(json!({ "L": l, "formula": a, "tube": b }));
        }
        metrics["generator_gap"] = json!(g);
        out.csv("generator_gap.csv", &gaps)?;
    }

    if let Some(tr) = &tc.tracker {
        let tcfg = TrackerConfig {
            window: tr.window,
            replicas: tr.replicas,
            seed,
            event_cap: tr.event_cap,
            lags: tr.lags.clone(),
        };
        let t0 = Instant::now();
        let paths = parallel::track(&t, &tcfg).context("condensate tracking")?;
        out.sections.push(("tracker".into(), t0.elapsed().as_secs_f64()));
        let mut header: Vec<String> = vec!["replica".into(), "relocations".into(), "end".into()];
        header.extend((0..t.dim).map(|i| format!("x_{i}")));
        header.extend(["off_fraction".to_string(), "events".to_string(), "capped".to_string()]);
        let refs: Vec<&str> = header.iter().map(String::as_str).collect();
        let mut table = Table::new(&refs);
        for (r, p) in paths.iter().enumerate() {
            let mut row = vec![r.to_string(), p.relocations.to_string(), fmt_f64(p.end)];
            row.extend(p.position_at(f64::INFINITY).iter().map(|v| fmt_f64(*v)));
            row.extend([fmt_f64(p.off_fraction()), p.events.to_string(), p.capped.to_string()]);
            table.push(row);
        }
        out.csv("condensate.csv", &table)?;
        match condensate_statistics(&t, &paths, &tcfg) {
            Ok(s) => {
                out.checks.push(Check::at_most("off_fraction_mean", s.off_fraction_mean, 0.05));
                metrics["tracker"] = json!(s);
            }
            Err(e) => metrics["tracker"] = json!({ "unavailable": e.to_string() }),
        }
    }
    out.json("thermo.json", &metrics)?;
    out.metrics = metrics;
    Ok(out)
}
