//! Config-driven verification runs over the `gaugelab` toolkit.
//!
//! A run reads an [`ExperimentConfig`], builds the measure space, value space
//! and gauges it names, runs the selected [`Suite`]s in parallel and returns a
//! [`Report`] carrying every check, measured constant and witness.

pub mod config;
pub mod report;
pub mod suites;

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

pub use config::{ConfigError, ExperimentConfig, Suite};
pub use report::Report;

use report::{Constants, Meta, WitnessEntry, REPORT_VERSION};

/// Seed handed to `suite`: the first eight bytes of
/// `SHA-256(seed ‖ suite name)`, so suites draw independent streams and adding
/// a suite never shifts another's samples. The top bit is cleared because TOML
/// integers are signed 64-bit.
pub fn suite_seed(seed: u64, suite: Suite) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(suite.name().as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes")) >> 1
}

/// Validates `config` and runs its suites.
pub fn run(config: &ExperimentConfig) -> Result<Report, ConfigError> {
    let model = config.build()?;
    let params = &config.params;
    let mut selected = config.suites.clone();
    selected.sort();
    selected.dedup();

    let results: Vec<_> = selected
        .par_iter()
        .map(|&suite| {
            let start = Instant::now();
            let output = suites::run_suite(suite, &model, params, suite_seed(params.seed, suite));
            (suite, output, start.elapsed().as_millis() as u64)
        })
        .collect();

    let mut constants = Constants::default();
    let mut suite_reports = BTreeMap::new();
    let mut witnesses = Vec::new();
    let mut suite_seeds = BTreeMap::new();
    let mut runtime_ms = BTreeMap::new();
    for (suite, output, elapsed) in results {
        let name = suite.name().to_owned();
        if output.value_space.is_some() {
            constants.value_space = output.value_space;
        }
        for (gauge, c) in output.gauges {
            constants.gauges.entry(gauge).or_default().merge(c);
        }
        for (reports, expected) in [
            (&output.report.checks, false),
            (&output.report.controls, true),
        ] {
            for r in reports {
                for outcome in &r.outcomes {
                    if let Some(w) = &outcome.witness {
                        witnesses.push(WitnessEntry {
                            suite: name.clone(),
                            subject: r.subject.clone(),
                            check: outcome.name.clone(),
                            expected,
                            witness: w.clone(),
                        });
                    }
                }
            }
        }
        suite_seeds.insert(name.clone(), suite_seed(params.seed, suite));
        runtime_ms.insert(name.clone(), elapsed);
        suite_reports.insert(name, output.report);
    }

    Ok(Report {
        version: REPORT_VERSION,
        passed: suite_reports.values().all(|s| s.passed),
        constants,
        suites: suite_reports,
        witnesses,
        meta: Meta {
            tool: env!("CARGO_PKG_NAME").to_owned(),
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            seed: params.seed,
            suite_seeds,
            runtime_ms,
        },
        config: config.clone(),
    })
}

/// A configurable kind and its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KindInfo {
    pub kind: &'static str,
    pub params: &'static [&'static str],
    pub summary: &'static str,
}

/// Gauge kinds accepted in `[[gauges]]`.
pub const GAUGE_KINDS: &[KindInfo] = &[
    KindInfo {
        kind: "musielak-orlicz",
        params: &["name", "function | per_atom"],
        summary: "sum over atoms of mu(w) M(w, f(w))",
    },
    KindInfo {
        kind: "variable-exponent",
        params: &["name", "exponents"],
        summary: "sum over atoms of mu(w) f(w)^p(w)",
    },
    KindInfo {
        kind: "lp-norm",
        params: &["name", "q"],
        summary: "weighted l_q norm",
    },
    KindInfo {
        kind: "luxemburg",
        params: &["name", "base"],
        summary: "inf { t : base(f / t) < 1 }",
    },
    KindInfo {
        kind: "bar",
        params: &["name", "base"],
        summary: "inf { t : base(f / t) < t }",
    },
];

/// Orlicz function kinds accepted in `function` and `per_atom`.
pub const ORLICZ_KINDS: &[KindInfo] = &[
    KindInfo {
        kind: "power",
        params: &["p"],
        summary: "t^p, with p = inf allowed",
    },
    KindInfo {
        kind: "capped-power",
        params: &["p", "cap"],
        summary: "min(t^p, cap)",
    },
    KindInfo {
        kind: "bounded-rational",
        params: &[],
        summary: "t / (1 + t)",
    },
    KindInfo {
        kind: "plateau",
        params: &["t0"],
        summary: "0 up to t0, 1 beyond",
    },
    KindInfo {
        kind: "exp-power",
        params: &["p"],
        summary: "exp(t^p) - 1",
    },
    KindInfo {
        kind: "scaled",
        params: &["factor", "inner"],
        summary: "factor * inner(t)",
    },
    KindInfo {
        kind: "dilated",
        params: &["factor", "inner"],
        summary: "inner(factor * t)",
    },
    KindInfo {
        kind: "glue",
        params: &["split", "below", "above"],
        summary: "below(t) up to split, above(t) beyond",
    },
];

/// The catalog printed by `list-kinds`.
pub fn list_kinds() -> String {
    let mut out = String::new();
    for (title, kinds) in [("gauges", GAUGE_KINDS), ("orlicz functions", ORLICZ_KINDS)] {
        out.push_str(title);
        out.push_str(":\n");
        for k in kinds {
            let params = if k.params.is_empty() {
                "-".to_owned()
            } else {
                k.params.join(", ")
            };
            out.push_str(&format!("  {:<18} [{}]  {}\n", k.kind, params, k.summary));
        }
    }
    out.push_str("suites:\n");
    for s in Suite::ALL {
        out.push_str(&format!("  {s}\n"));
    }
    out
}
