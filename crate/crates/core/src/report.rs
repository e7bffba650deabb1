//! Structured pass/fail results shared by every checker.

use std::collections::BTreeMap;

use serde::Serialize;

/// Outcome of a single property check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    /// No admissible sample was available (for example every probe was outside
    /// the region where the property is defined).
    Skipped,
}

/// A concrete counterexample or extremal configuration.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Witness {
    pub description: String,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub scalars: BTreeMap<String, Vec<f64>>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub vectors: BTreeMap<String, Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub sets: BTreeMap<String, Vec<usize>>,
}

impl Witness {
    pub fn new(description: impl Into<String>) -> Witness {
        Witness {
            description: description.into(),
            ..Witness::default()
        }
    }

    pub fn param(mut self, key: &str, value: f64) -> Witness {
        self.params.insert(key.to_owned(), value);
        self
    }

    pub fn scalars(mut self, key: &str, values: Vec<f64>) -> Witness {
        self.scalars.insert(key.to_owned(), values);
        self
    }

    pub fn vectors(mut self, key: &str, values: Vec<Vec<f64>>) -> Witness {
        self.vectors.insert(key.to_owned(), values);
        self
    }

    pub fn set(mut self, key: &str, atoms: Vec<usize>) -> Witness {
        self.sets.insert(key.to_owned(), atoms);
        self
    }
}

/// One named property with its verdict and supporting data.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxiomOutcome {
    pub name: String,
    pub verdict: Verdict,
    /// Number of admissible samples that were checked.
    pub checked: usize,
    /// Number of samples discarded as inadmissible.
    pub skipped: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate: Option<f64>,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub note: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl AxiomOutcome {
    pub fn new(name: impl Into<String>) -> AxiomOutcome {
        AxiomOutcome {
            name: name.into(),
            verdict: Verdict::Skipped,
            checked: 0,
            skipped: 0,
            estimate: None,
            note: String::new(),
            witness: None,
        }
    }

    /// Records one admissible sample. The first failure is kept as witness.
    pub fn record(&mut self, ok: bool, witness: impl FnOnce() -> Witness) {
        self.checked += 1;
        if ok {
            if self.verdict == Verdict::Skipped {
                self.verdict = Verdict::Pass;
            }
        } else if self.verdict != Verdict::Fail {
            self.verdict = Verdict::Fail;
            self.witness = Some(witness());
        }
    }

    pub fn skip(&mut self) {
        self.skipped += 1;
    }

    pub fn with_note(mut self, note: impl Into<String>) -> AxiomOutcome {
        self.note = note.into();
        self
    }

    pub fn with_estimate(mut self, estimate: f64) -> AxiomOutcome {
        self.estimate = Some(estimate);
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }
}

/// A collection of outcomes for one subject (a gauge, a space, a family).
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct AxiomReport {
    pub subject: String,
    pub outcomes: Vec<AxiomOutcome>,
}

impl AxiomReport {
    pub fn new(subject: impl Into<String>) -> AxiomReport {
        AxiomReport {
            subject: subject.into(),
            outcomes: Vec::new(),
        }
    }

    pub fn push(&mut self, outcome: AxiomOutcome) {
        self.outcomes.push(outcome);
    }

    pub fn extend(&mut self, other: AxiomReport) {
        self.outcomes.extend(other.outcomes);
    }

    pub fn get(&self, name: &str) -> Option<&AxiomOutcome> {
        self.outcomes.iter().find(|o| o.name == name)
    }

    pub fn verdict(&self, name: &str) -> Option<Verdict> {
        self.get(name).map(|o| o.verdict)
    }

    /// True when no outcome failed.
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(AxiomOutcome::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AxiomOutcome> {
        self.outcomes.iter().filter(|o| !o.passed())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_failure_is_kept() {
        let mut o = AxiomOutcome::new("p");
        assert_eq!(o.verdict, Verdict::Skipped);
        o.record(true, || Witness::new("unused"));
        assert_eq!(o.verdict, Verdict::Pass);
        o.record(false, || Witness::new("first"));
        o.record(false, || Witness::new("second"));
        assert_eq!(o.verdict, Verdict::Fail);
        assert_eq!(o.witness.unwrap().description, "first");
        assert_eq!(o.checked, 3);
    }

    #[test]
    fn report_passes_when_only_skips() {
        let mut r = AxiomReport::new("s");
        let mut o = AxiomOutcome::new("a");
        o.skip();
        r.push(o);
        assert!(r.passed());
        assert_eq!(r.verdict("a"), Some(Verdict::Skipped));
    }
}
