//! The report document written by `run`.

use std::collections::BTreeMap;

use gaugelab::gauge::{ConvexityPair, LatticeEstimate};
use gaugelab::orlicz::{DoublingResult, PcoPair};
use gaugelab::{AxiomReport, Witness};
use serde::Serialize;

use crate::config::ExperimentConfig;

/// Version of the report layout.
pub const REPORT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub version: u32,
    pub passed: bool,
    pub constants: Constants,
    /// Keyed by suite name.
    pub suites: BTreeMap<String, SuiteReport>,
    pub witnesses: Vec<WitnessEntry>,
    pub meta: Meta,
    pub config: ExperimentConfig,
}

impl Report {
    /// The report as TOML text.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("reports contain only serializable data")
    }

    /// Names of failed suites.
    pub fn failed_suites(&self) -> Vec<&str> {
        self.suites
            .iter()
            .filter(|(_, s)| !s.passed)
            .map(|(name, _)| name.as_str())
            .collect()
    }
}

/// Measured and closed-form constants.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Constants {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value_space: Option<ValueSpaceConstants>,
    /// Keyed by gauge name.
    pub gauges: BTreeMap<String, GaugeConstants>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValueSpaceConstants {
    pub kappa_analytic: f64,
    pub kappa_sampled: f64,
    pub aoki_exponent: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct GaugeConstants {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convexity_pair: Option<ConvexityPair>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fatou_constant: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub delta: Vec<DeltaSample>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub doubling: Option<DoublingResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pco: Option<PcoPair>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub lattice: Vec<LatticeEstimate>,
}

impl GaugeConstants {
    /// Fills every field that `other` sets.
    pub fn merge(&mut self, other: GaugeConstants) {
        if other.convexity_pair.is_some() {
            self.convexity_pair = other.convexity_pair;
        }
        if other.fatou_constant.is_some() {
            self.fatou_constant = other.fatou_constant;
        }
        if !other.delta.is_empty() {
            self.delta = other.delta;
        }
        if other.doubling.is_some() {
            self.doubling = other.doubling;
        }
        if other.pco.is_some() {
            self.pco = other.pco;
        }
        self.lattice.extend(other.lattice);
    }
}

/// `Δ(t)`: the closed form when published, and the sampled estimate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaSample {
    pub t: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate: Option<f64>,
}

/// Outcome of one suite.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SuiteReport {
    pub passed: bool,
    /// Property checks grouped by subject.
    pub checks: Vec<AxiomReport>,
    /// Negative controls: checks run with deliberately wrong parameters,
    /// which are expected to fail. Their verdicts feed the suite's own
    /// checks; the reports are kept for their witnesses.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub controls: Vec<AxiomReport>,
    /// Structured results, keyed by a short label.
    pub details: BTreeMap<String, toml::Value>,
    /// Problems that prevented a check from running.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
}

impl SuiteReport {
    pub fn detail(&mut self, key: impl Into<String>, value: &impl Serialize) {
        let value = toml::Value::try_from(value).expect("details are serializable");
        self.details.insert(key.into(), value);
    }

    pub fn error(&mut self, message: impl Into<String>) {
        self.errors.push(message.into());
    }

    /// Sets `passed` from the checks and errors.
    pub fn finish(mut self) -> SuiteReport {
        self.passed = self.errors.is_empty() && self.checks.iter().all(AxiomReport::passed);
        self
    }
}

/// A witness lifted out of a suite, with its location.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessEntry {
    pub suite: String,
    pub subject: String,
    pub check: String,
    /// True for witnesses of negative controls, which are expected.
    pub expected: bool,
    pub witness: Witness,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Meta {
    pub tool: String,
    pub tool_version: String,
    pub seed: u64,
    /// Seed handed to each suite, derived from the run seed and the suite name.
    pub suite_seeds: BTreeMap<String, u64>,
    /// Wall-clock time per suite in milliseconds; the only field that varies
    /// between identical runs.
    pub runtime_ms: BTreeMap<String, u64>,
}
