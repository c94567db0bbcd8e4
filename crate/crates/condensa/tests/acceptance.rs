//! Runs the full acceptance suite, prints one line per criterion and
//! compares every check value with the committed goldens. Exits nonzero
//! if any criterion fails or any value drifts from its golden.
//!
//! `CONDENSA_BLESS=1` rewrites the goldens from the current build.

use std::path::Path;
use std::process::ExitCode;

use condensa::config::Level;
use condensa::verify::Suite;
use condensa::DEFAULT_SEED;
use serde::{Deserialize, Serialize};

#[derive(Debug, Serialize, Deserialize)]
struct Golden {
    criterion: u32,
    check: String,
    value: f64,
}

const GOLDEN_RELATIVE: f64 = 1e-9;

fn main() -> ExitCode {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/goldens/verify_full.json");
    let results = Suite::new(Level::Full, DEFAULT_SEED).run_all();
    for r in &results {
        println!("{}", r.line());
    }
    let failed: Vec<u32> = results.iter().filter(|r| !r.pass).map(|r| r.id).collect();
    println!("criteria passed: {}/{}", results.len() - failed.len(), results.len());

    let current: Vec<Golden> = results
        .iter()
        .flat_map(|r| r.checks.iter().map(|c| Golden { criterion: r.id, check: c.name.clone(), value: c.value }))
        .collect();
    if std::env::var_os("CONDENSA_BLESS").is_some() {
        let mut text = serde_json::to_string_pretty(&current).unwrap();
        text.push('\n');
        std::fs::write(&path, text).unwrap();
        println!("goldens written to {}", path.display());
    }
    let goldens: Vec<Golden> = serde_json::from_str(&std::fs::read_to_string(&path).expect("goldens present")).unwrap();
    let mut drift = Vec::new();
    for g in &goldens {
        let now = current.iter().find(|c| c.criterion == g.criterion && c.check == g.check);
        let ok = now.is_some_and(|c| {
            (c.value - g.value).abs() <= GOLDEN_RELATIVE * g.value.abs().max(1e-300) || c.value == g.value
        });
        if !ok {
            drift.push(format!("{}:{} golden {:e} now {:?}", g.criterion, g.check, g.value, now.map(|c| c.value)));
        }
    }
    if goldens.len() != current.len() {
        drift.push(format!("golden count {} vs current {}", goldens.len(), current.len()));
    }
    if drift.is_empty() {
        println!("goldens [PASS]: {} values within {GOLDEN_RELATIVE:e} relative", goldens.len());
    } else {
        println!("goldens [FAIL]: {}", drift.join("; "));
    }

    if failed.is_empty() && drift.is_empty() {
        ExitCode::SUCCESS
    } else {
        if !failed.is_empty() {
            println!("failing criteria: {failed:?}");
        }
        ExitCode::FAILURE
    }
}
