//! Experiment configuration: a versioned TOML document.
//!
//! ```toml
//! version = 1
//! suites = ["modular-axioms", "completeness"]
//!
//! [space]
//! weights = [1.0, 1.0, 1.0]
//!
//! [value_space]
//! dim = 2
//! p = 0.5
//!
//! [[gauges]]
//! kind = "musielak-orlicz"
//! name = "square"
//! function = { kind = "power", p = 2.0 }
//!
//! [params]
//! trials = 1000
//! seed = 7
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use gaugelab::derived::DerivedGauge;
use gaugelab::gauge::PowerNormGauge;
use gaugelab::{
    Exponent, Gauge, MeasureSpace, MusielakOrliczFunction, MusielakOrliczGauge, OrliczFunction,
    QuasiNormSpace,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The only schema version understood by this build.
pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid `{field}`: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl fmt::Display) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        message: message.to_string(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub space: SpaceSpec,
    #[serde(default)]
    pub value_space: ValueSpaceSpec,
    #[serde(default)]
    pub gauges: Vec<GaugeSpec>,
    #[serde(default)]
    pub suites: Vec<Suite>,
    #[serde(default)]
    pub params: Params,
}

/// Atom weights, or `counting = n` for `n` atoms of mass one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counting: Option<usize>,
}

/// `ℓ_p^dim` values, optionally with coordinate weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValueSpaceSpec {
    pub dim: usize,
    pub p: Exponent,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl Default for ValueSpaceSpec {
    fn default() -> Self {
        ValueSpaceSpec {
            dim: 2,
            p: Exponent::Finite(1.0),
            weights: None,
        }
    }
}

/// A named gauge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GaugeSpec {
    /// `ρ_M` with one Orlicz function shared by all atoms (`function`) or one
    /// per atom (`per_atom`).
    MusielakOrlicz {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        function: Option<OrliczFunction>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        per_atom: Option<Vec<OrliczFunction>>,
    },
    /// `ρ(f) = Σ μ(ω) f(ω)^{p(ω)}` with the `t^∞` convention for `inf`.
    VariableExponent {
        name: String,
        exponents: Vec<Exponent>,
    },
    /// `(Σ μ(ω) f(ω)^q)^{1/q}`.
    LpNorm { name: String, q: f64 },
    /// `inf { t : ρ(f/t) < 1 }` of an earlier gauge.
    Luxemburg { name: String, base: String },
    /// `inf { t : ρ(f/t) < t }` of an earlier gauge.
    Bar { name: String, base: String },
}

impl GaugeSpec {
    pub fn name(&self) -> &str {
        match self {
            GaugeSpec::MusielakOrlicz { name, .. }
            | GaugeSpec::VariableExponent { name, .. }
            | GaugeSpec::LpNorm { name, .. }
            | GaugeSpec::Luxemburg { name, .. }
            | GaugeSpec::Bar { name, .. } => name,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            GaugeSpec::MusielakOrlicz { .. } => "musielak-orlicz",
            GaugeSpec::VariableExponent { .. } => "variable-exponent",
            GaugeSpec::LpNorm { .. } => "lp-norm",
            GaugeSpec::Luxemburg { .. } => "luxemburg",
            GaugeSpec::Bar { .. } => "bar",
        }
    }

    /// The Musielak–Orlicz function, for the kinds that have one.
    pub fn musielak_orlicz(&self) -> Option<MusielakOrliczFunction> {
        match self {
            GaugeSpec::MusielakOrlicz {
                function: Some(f), ..
            } => Some(MusielakOrliczFunction::Shared(f.clone())),
            GaugeSpec::MusielakOrlicz {
                per_atom: Some(fs), ..
            } => Some(MusielakOrliczFunction::PerAtom(fs.clone())),
            GaugeSpec::VariableExponent { exponents, .. } => {
                Some(MusielakOrliczFunction::VariableExponent(exponents.clone()))
            }
            _ => None,
        }
    }

    /// Per-atom power exponents when every slice is `t^p`.
    pub fn power_exponents(&self, atoms: usize) -> Option<Vec<Exponent>> {
        match self {
            GaugeSpec::VariableExponent { exponents, .. } => Some(exponents.clone()),
            GaugeSpec::MusielakOrlicz {
                function: Some(f), ..
            } => f.power_exponent().map(|p| vec![p; atoms]),
            GaugeSpec::MusielakOrlicz {
                per_atom: Some(fs), ..
            } => fs.iter().map(OrliczFunction::power_exponent).collect(),
            _ => None,
        }
    }

    fn base(&self) -> Option<&str> {
        match self {
            GaugeSpec::Luxemburg { base, .. } | GaugeSpec::Bar { base, .. } => Some(base),
            _ => None,
        }
    }
}

/// Verification suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    BallAlgebra,
    ModularAxioms,
    DerivedGauges,
    LocalBasis,
    Completeness,
    Equivalence,
    Lattice,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::BallAlgebra,
        Suite::ModularAxioms,
        Suite::DerivedGauges,
        Suite::LocalBasis,
        Suite::Completeness,
        Suite::Equivalence,
        Suite::Lattice,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::BallAlgebra => "ball-algebra",
            Suite::ModularAxioms => "modular-axioms",
            Suite::DerivedGauges => "derived-gauges",
            Suite::LocalBasis => "local-basis",
            Suite::Completeness => "completeness",
            Suite::Equivalence => "equivalence",
            Suite::Lattice => "lattice",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Sampling sizes, seed and tolerances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// Randomised trials per property.
    pub trials: usize,
    pub seed: u64,
    /// Relative tolerance for comparisons between computed values.
    pub tol: f64,
    /// Truncation depth of series.
    pub depth: usize,
    /// Random series drawn by the completeness suite.
    pub draws: usize,
    /// Sampled functions per `ε` in the equivalence suite.
    pub samples: usize,
    /// Maximal number of pieces in envelope decompositions.
    pub envelope_depth: usize,
    /// Ball comparisons run by the equivalence suite.
    pub equivalence: Vec<EquivalenceSpec>,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            trials: 1000,
            seed: 0,
            tol: 1e-9,
            depth: 40,
            draws: 100,
            samples: 1000,
            envelope_depth: 4,
            equivalence: Vec::new(),
        }
    }
}

/// `ε` grid used when an equivalence entry gives none: `2^{-k}`, `k = 0..=6`.
pub fn default_epsilons() -> Vec<f64> {
    (0..=6).map(|k| 2f64.powi(-k)).collect()
}

/// One ball comparison between Musielak–Orlicz gauges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EquivalenceSpec {
    /// `first = second` on `(0, t0]`; counting measure only.
    NearOrigin {
        first: String,
        second: String,
        t0: f64,
        #[serde(default = "default_epsilons")]
        epsilons: Vec<f64>,
    },
    /// `first = second` on `[t0, ∞)`.
    NearInfinity {
        first: String,
        second: String,
        t0: f64,
        #[serde(default = "default_epsilons")]
        epsilons: Vec<f64>,
    },
    /// `V_{E,δ,t} ⊆ B_M(ε)` for `M(ω, t) = density(ω) F(t)`.
    DensityTimesBounded {
        density: Vec<f64>,
        function: OrliczFunction,
        epsilon: f64,
    },
}

/// A validated configuration with its objects built.
#[derive(Clone, Debug)]
pub struct Model {
    pub space: MeasureSpace,
    pub q: QuasiNormSpace,
    pub gauges: Vec<NamedGauge>,
}

#[derive(Clone, Debug)]
pub struct NamedGauge {
    pub spec: GaugeSpec,
    pub gauge: Arc<dyn Gauge>,
}

impl NamedGauge {
    pub fn name(&self) -> &str {
        self.spec.name()
    }
}

impl Model {
    pub fn gauge(&self, name: &str) -> Option<&NamedGauge> {
        self.gauges.iter().find(|g| g.name() == name)
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<ExperimentConfig, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        ExperimentConfig::from_toml(&text)
    }

    /// Checks every field and builds the space, value space and gauges.
    pub fn build(&self) -> Result<Model, ConfigError> {
        if self.version != CONFIG_VERSION {
            return Err(invalid(
                "version",
                format!(
                    "found {}, this build reads version {CONFIG_VERSION}",
                    self.version
                ),
            ));
        }
        let space = self.build_space()?;
        let q = self.build_value_space()?;
        self.check_params()?;
        let mut gauges: Vec<NamedGauge> = Vec::new();
        let mut names = BTreeSet::new();
        for (i, spec) in self.gauges.iter().enumerate() {
            let field = format!("gauges[{i}]");
            if spec.name().is_empty() {
                return Err(invalid(format!("{field}.name"), "must not be empty"));
            }
            if !names.insert(spec.name().to_owned()) {
                return Err(invalid(
                    format!("{field}.name"),
                    format!("duplicate gauge name {:?}", spec.name()),
                ));
            }
            let gauge = build_gauge(spec, &space, &gauges, &field)?;
            gauges.push(NamedGauge {
                spec: spec.clone(),
                gauge,
            });
        }
        let model = Model { space, q, gauges };
        self.check_equivalences(&model)?;
        Ok(model)
    }

    fn build_space(&self) -> Result<MeasureSpace, ConfigError> {
        match (&self.space.weights, self.space.counting) {
            (Some(weights), None) => {
                if weights.is_empty() {
                    return Err(invalid("space.weights", "must not be empty"));
                }
                if let Some((i, w)) = weights
                    .iter()
                    .enumerate()
                    .find(|(_, w)| !(**w > 0.0 && w.is_finite()))
                {
                    return Err(invalid(
                        format!("space.weights[{i}]"),
                        format!("{w} is not a positive finite weight"),
                    ));
                }
                MeasureSpace::new(weights.clone()).map_err(|e| invalid("space.weights", e))
            }
            (None, Some(n)) if n > 0 => {
                MeasureSpace::counting(n).map_err(|e| invalid("space.counting", e))
            }
            (None, Some(_)) => Err(invalid("space.counting", "must be at least 1")),
            _ => Err(invalid(
                "space",
                "give exactly one of `weights` and `counting`",
            )),
        }
    }

    fn build_value_space(&self) -> Result<QuasiNormSpace, ConfigError> {
        let v = &self.value_space;
        let p = v.p.value();
        match &v.weights {
            None => QuasiNormSpace::lp(v.dim, p),
            Some(w) => QuasiNormSpace::weighted_lp(p, w.clone()).and_then(|s| {
                if s.dim() == v.dim {
                    Ok(s)
                } else {
                    Err(gaugelab::quasinorm::QuasiNormError::DimensionMismatch {
                        expected: v.dim,
                        found: s.dim(),
                    })
                }
            }),
        }
        .map_err(|e| invalid("value_space", e))
    }

    fn check_params(&self) -> Result<(), ConfigError> {
        let p = &self.params;
        if p.trials == 0 {
            return Err(invalid("params.trials", "must be at least 1"));
        }
        if !(p.tol >= 0.0 && p.tol < 1.0) {
            return Err(invalid(
                "params.tol",
                format!("{} must lie in [0, 1)", p.tol),
            ));
        }
        if p.depth < 3 {
            return Err(invalid("params.depth", "must be at least 3"));
        }
        if !(1..=8).contains(&p.envelope_depth) {
            return Err(invalid("params.envelope_depth", "must lie in 1..=8"));
        }
        Ok(())
    }

    fn check_equivalences(&self, model: &Model) -> Result<(), ConfigError> {
        for (i, e) in self.params.equivalence.iter().enumerate() {
            let field = format!("params.equivalence[{i}]");
            match e {
                EquivalenceSpec::NearOrigin { first, second, .. }
                | EquivalenceSpec::NearInfinity { first, second, .. } => {
                    for (key, name) in [("first", first), ("second", second)] {
                        let g = model.gauge(name).ok_or_else(|| {
                            invalid(format!("{field}.{key}"), format!("no gauge named {name:?}"))
                        })?;
                        if g.spec.musielak_orlicz().is_none() {
                            return Err(invalid(
                                format!("{field}.{key}"),
                                format!("gauge {name:?} is not a Musielak-Orlicz gauge"),
                            ));
                        }
                    }
                }
                EquivalenceSpec::DensityTimesBounded { density, .. } => {
                    if density.len() != model.space.len() {
                        return Err(invalid(
                            format!("{field}.density"),
                            format!(
                                "has {} entries for {} atoms",
                                density.len(),
                                model.space.len()
                            ),
                        ));
                    }
                    if let Some((i, d)) = density
                        .iter()
                        .enumerate()
                        .find(|(_, d)| !(**d > 0.0 && d.is_finite()))
                    {
                        return Err(invalid(
                            format!("{field}.density[{i}]"),
                            format!("{d} is not a positive finite value"),
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

fn build_gauge(
    spec: &GaugeSpec,
    space: &MeasureSpace,
    earlier: &[NamedGauge],
    field: &str,
) -> Result<Arc<dyn Gauge>, ConfigError> {
    if let Some(base) = spec.base() {
        let base = earlier
            .iter()
            .find(|g| g.name() == base)
            .ok_or_else(|| {
                invalid(
                    format!("{field}.base"),
                    format!("no earlier gauge named {base:?}"),
                )
            })?
            .gauge
            .clone();
        return Ok(Arc::new(match spec {
            GaugeSpec::Luxemburg { .. } => DerivedGauge::luxemburg(base),
            _ => DerivedGauge::bar(base),
        }));
    }
    match spec {
        GaugeSpec::LpNorm { q, .. } => PowerNormGauge::new(space.clone(), *q)
            .map(|g| Arc::new(g) as Arc<dyn Gauge>)
            .map_err(|e| invalid(format!("{field}.q"), e)),
        GaugeSpec::MusielakOrlicz {
            function, per_atom, ..
        } if function.is_some() == per_atom.is_some() => Err(invalid(
            field,
            "give exactly one of `function` and `per_atom`",
        )),
        _ => {
            let m = spec
                .musielak_orlicz()
                .expect("remaining kinds are Musielak-Orlicz");
            MusielakOrliczGauge::new(space.clone(), m)
                .map(|g| Arc::new(g) as Arc<dyn Gauge>)
                .map_err(|e| invalid(field, e))
        }
    }
}
