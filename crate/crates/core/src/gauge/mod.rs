//! Gauges on `L⁺(μ)` and their homogeneity function.
//!
//! A gauge is any map `ρ : L⁺(μ) → [0, ∞]`. Its homogeneity function is
//! `Δ(t) = sup { ρ(tf) / ρ(f) : 0 < ρ(f) < ∞ }`, the best constant in
//! `ρ(tf) ≤ Δ(t) ρ(f)`. Gauges may publish a closed form of `Δ` through
//! [`GaugeMeta`]; otherwise it is estimated from a [`SamplePool`].

mod axioms;
mod lattice;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::measure::{ExtReal, MeasureError, MeasureSpace, PlusFunction, Subset};
use crate::rng::rng_for;
use crate::sample::{random_plus_function, PlusDraw};
use crate::solver::SolverError;

pub use axioms::{
    verify_modular_axioms, CmCertificate, CmRow, ModularOptions, ModularReport, PairEstimate,
};
pub use lattice::{
    convexification_envelope, lattice_convexity_constant, p_combination, EnvelopeMode,
    EnvelopeValue, LatticeEstimate, LatticeMode, LatticeOptions,
};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum GaugeError {
    #[error("scale {0} must be positive and finite")]
    InvalidScale(f64),
    #[error("the sample pool is empty")]
    EmptyPool,
    #[error("the grid must contain points on both sides of 1")]
    InvalidGrid,
    #[error("exponent {0} must be positive and finite")]
    InvalidExponent(f64),
    #[error("depth {0} must lie in 1..=8")]
    InvalidDepth(usize),
    #[error("the gauge is unbounded on every positive function supported on {0:?}")]
    NoFiniteProfile(Vec<usize>),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// A map `ρ : L⁺(μ) → [0, ∞]` on a fixed measure space.
pub trait Gauge: Send + Sync + fmt::Debug {
    fn space(&self) -> &MeasureSpace;

    /// `ρ(f)`. Callers guarantee `f.len() == self.space().len()`.
    fn eval(&self, f: &PlusFunction) -> ExtReal;

    fn name(&self) -> String;

    fn meta(&self) -> GaugeMeta {
        GaugeMeta::default()
    }
}

/// Checked evaluation.
pub fn eval_gauge(gauge: &dyn Gauge, f: &PlusFunction) -> Result<ExtReal, GaugeError> {
    gauge.space().check_len(f.len())?;
    Ok(gauge.eval(f))
}

/// `(k, r)` with `ρ(f + g) ≤ k (ρ(rf) + ρ(rg))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConvexityPair {
    pub k: f64,
    pub r: f64,
}

impl ConvexityPair {
    pub fn new(k: f64, r: f64) -> ConvexityPair {
        ConvexityPair { k, r }
    }
}

impl fmt::Display for ConvexityPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.k, self.r)
    }
}

/// Closed form `Δ(t) = t^a` for `t ≤ 1` and `t^b` for `t > 1`; `b = None`
/// means `Δ(t) = ∞` for every `t > 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DeltaForm {
    pub below_one: f64,
    pub above_one: Option<f64>,
}

impl DeltaForm {
    pub const HOMOGENEOUS: DeltaForm = DeltaForm {
        below_one: 1.0,
        above_one: Some(1.0),
    };

    pub fn power(p: f64) -> DeltaForm {
        DeltaForm {
            below_one: p,
            above_one: Some(p),
        }
    }

    pub fn eval(&self, t: f64) -> ExtReal {
        if t == 1.0 {
            return ExtReal::ONE;
        }
        let exponent = if t < 1.0 {
            Some(self.below_one)
        } else {
            self.above_one
        };
        match exponent {
            None => ExtReal::Infinite,
            Some(0.0) => ExtReal::ONE,
            Some(a) => ExtReal::of(t.powf(a)),
        }
    }
}

/// Properties a gauge knows about itself.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct GaugeMeta {
    pub homogeneous: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<DeltaForm>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convexity_pair: Option<ConvexityPair>,
}

/// A reusable list of probe functions.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplePool {
    functions: Vec<PlusFunction>,
}

impl SamplePool {
    pub fn new(functions: Vec<PlusFunction>) -> SamplePool {
        SamplePool { functions }
    }

    /// Scaled indicators `c χ_E` and scaled random simple functions `c f`
    /// with `c = 2^{k/2}`, `|k| ≤ 80`. The sets are all singletons, all pairs
    /// (up to 12 atoms) and the whole space; there are 16 random functions.
    /// Closing the pool under these scalings makes the sampled `Δ`
    /// submultiplicative on the `√2`-grid away from the ends of the range.
    pub fn standard(space: &MeasureSpace, seed: u64) -> SamplePool {
        let n = space.len();
        let mut sets: Vec<Subset> = (0..n)
            .map(|i| Subset::from_indices(n, &[i]).expect("index in range"))
            .collect();
        if n <= 12 {
            for i in 0..n {
                for j in i + 1..n {
                    sets.push(Subset::from_indices(n, &[i, j]).expect("indices in range"));
                }
            }
        }
        if n > 1 {
            sets.push(space.full());
        }
        let mut rng = rng_for(seed, "sample-pool");
        let draw = PlusDraw {
            lo: -4.0,
            hi: 4.0,
            ..PlusDraw::default()
        };
        let mut shapes: Vec<PlusFunction> = sets
            .iter()
            .map(|s| PlusFunction::indicator(s, ExtReal::ONE))
            .collect();
        shapes.extend((0..16).map(|_| random_plus_function(&mut rng, n, draw)));
        let mut functions = Vec::with_capacity(161 * shapes.len());
        for k in -80..=80 {
            let c = 2f64.powf(k as f64 / 2.0);
            functions.extend(shapes.iter().map(|f| f.scale(c)));
        }
        SamplePool { functions }
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn functions(&self) -> &[PlusFunction] {
        &self.functions
    }
}

/// Sampled and closed-form values of `Δ(t)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaEstimate {
    pub t: f64,
    /// Supremum over admissible pool members; `None` when none was admissible.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate: Option<ExtReal>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<ExtReal>,
    pub admissible: usize,
    pub skipped: usize,
}

impl DeltaEstimate {
    /// The closed form when available, otherwise the estimate.
    pub fn value(&self) -> Option<ExtReal> {
        self.closed_form.or(self.estimate)
    }
}

/// Estimates `Δ(t)` over `pool`. A member with `ρ(f) = 0 < ρ(tf)` proves
/// `Δ(t) = ∞`; other members with `ρ(f) ∈ {0, ∞}` constrain nothing and are
/// skipped.
pub fn delta_at(gauge: &dyn Gauge, t: f64, pool: &SamplePool) -> Result<DeltaEstimate, GaugeError> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(GaugeError::InvalidScale(t));
    }
    if pool.is_empty() {
        return Err(GaugeError::EmptyPool);
    }
    let mut out = DeltaEstimate {
        t,
        estimate: None,
        closed_form: gauge.meta().delta.map(|d| d.eval(t)),
        admissible: 0,
        skipped: 0,
    };
    for f in pool.functions() {
        gauge.space().check_len(f.len())?;
        let base = gauge.eval(f);
        if base.is_infinite() {
            out.skipped += 1;
            continue;
        }
        let scaled = gauge.eval(&f.scale(t));
        let ratio = if base.is_zero() {
            if scaled.is_zero() {
                out.skipped += 1;
                continue;
            }
            ExtReal::Infinite
        } else {
            scaled.ratio(base).expect("base is finite and positive")
        };
        out.admissible += 1;
        out.estimate = Some(out.estimate.map_or(ratio, |e| e.max(ratio)));
    }
    Ok(out)
}

/// The interval `J` on which `Δ` is finite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FiniteRange {
    /// `J = (0, 1]`.
    UnitInterval,
    /// `J = (0, ∞)`.
    PositiveReals,
}

/// Homogeneity classification of a gauge.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HomogeneityProfile {
    pub finite_range: FiniteRange,
    /// `Δ(t) < 1` for some `t < 1`; equivalently `Δ(t) → 0` as `t → 0`.
    pub pseudo_homogeneous_at_origin: bool,
    /// `Δ(t) < ∞` for `t > 1`.
    pub pseudo_homogeneous_at_infinity: bool,
    pub table: Vec<DeltaEstimate>,
}

/// Log-spaced grid `2^{k/4}`, `|k| ≤ 40`.
pub fn default_delta_grid() -> Vec<f64> {
    (-40..=40).map(|k| 2f64.powf(k as f64 / 4.0)).collect()
}

/// Classifies `gauge` from `Δ` on `grid`, which must straddle 1.
pub fn classify_homogeneity(
    gauge: &dyn Gauge,
    grid: &[f64],
    pool: &SamplePool,
) -> Result<HomogeneityProfile, GaugeError> {
    if !(grid.iter().any(|&t| t < 1.0) && grid.iter().any(|&t| t > 1.0)) {
        return Err(GaugeError::InvalidGrid);
    }
    let table = grid
        .iter()
        .map(|&t| delta_at(gauge, t, pool))
        .collect::<Result<Vec<_>, _>>()?;
    let origin = table
        .iter()
        .filter(|d| d.t < 1.0)
        .any(|d| d.value().is_some_and(|v| v < ExtReal::ONE));
    let infinity = table
        .iter()
        .filter(|d| d.t > 1.0)
        .all(|d| d.value().is_none_or(|v| v.is_finite()));
    Ok(HomogeneityProfile {
        finite_range: if infinity {
            FiniteRange::PositiveReals
        } else {
            FiniteRange::UnitInterval
        },
        pseudo_homogeneous_at_origin: origin,
        pseudo_homogeneous_at_infinity: infinity,
        table,
    })
}

/// `ρ(f) = (Σ wᵢ fᵢ^q)^{1/q}`: the weighted `ℓ_q` (quasi-)norm of `f`.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerNormGauge {
    space: MeasureSpace,
    q: f64,
}

impl PowerNormGauge {
    pub fn new(space: MeasureSpace, q: f64) -> Result<PowerNormGauge, GaugeError> {
        if !(q > 0.0 && q.is_finite()) {
            return Err(GaugeError::InvalidExponent(q));
        }
        Ok(PowerNormGauge { space, q })
    }
}

impl Gauge for PowerNormGauge {
    fn space(&self) -> &MeasureSpace {
        &self.space
    }

    fn eval(&self, f: &PlusFunction) -> ExtReal {
        self.space
            .integrate_unchecked(f.powf(self.q).values())
            .powf(1.0 / self.q)
    }

    fn name(&self) -> String {
        format!("l{}-norm", self.q)
    }

    fn meta(&self) -> GaugeMeta {
        let k = if self.q >= 1.0 {
            1.0
        } else {
            2f64.powf(1.0 / self.q - 1.0)
        };
        GaugeMeta {
            homogeneous: true,
            delta: Some(DeltaForm::HOMOGENEOUS),
            convexity_pair: Some(ConvexityPair::new(k, 1.0)),
        }
    }
}

/// `f ↦ ρ(f^{1/p})`. A lattice gauge `ρ` is `p`-convex exactly when this
/// composite is convex in the lattice sense.
#[derive(Clone, Debug)]
pub struct RootGauge {
    base: Arc<dyn Gauge>,
    p: f64,
}

impl RootGauge {
    pub fn new(base: Arc<dyn Gauge>, p: f64) -> Result<RootGauge, GaugeError> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(GaugeError::InvalidExponent(p));
        }
        Ok(RootGauge { base, p })
    }
}

impl Gauge for RootGauge {
    fn space(&self) -> &MeasureSpace {
        self.base.space()
    }

    fn eval(&self, f: &PlusFunction) -> ExtReal {
        self.base.eval(&f.powf(1.0 / self.p))
    }

    fn name(&self) -> String {
        format!("{}^(1/{})", self.base.name(), self.p)
    }
}
