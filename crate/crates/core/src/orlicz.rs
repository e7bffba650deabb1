//! Orlicz and Musielak–Orlicz functions and the modular they induce.
//!
//! An Orlicz function is a nondecreasing left-continuous `F : [0, ∞) → [0, ∞]`
//! with `F(0⁺) = 0` and `F(∞) > 0`. They are built from a closed set of kinds
//! ([`OrliczFunction`]) so that every property used downstream is known
//! analytically. A Musielak–Orlicz function assigns one Orlicz function to each
//! atom, and induces the modular `ρ_M(f) = ∫ M(ω, f(ω)) dμ(ω)`.

use std::fmt;
use std::sync::Arc;

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gauge::{ConvexityPair, DeltaForm, Gauge, GaugeMeta};
use crate::l0::{sample_member, L0Ball, L0Error, Placement};
use crate::measure::{ExtReal, MeasureError, MeasureSpace, PlusFunction, Subset};
use crate::quasinorm::{Exponent, QuasiNormError, QuasiNormSpace, VectorFunction};
use crate::report::Witness;
use crate::rng::{rng_for, Rng};
use crate::sample::{log_uniform, random_vector, random_vector_function};
use crate::solver::{infimum_of_upset, SolverError, SolverParams};

/// Largest space on which subsets are enumerated exhaustively.
pub const MAX_EXHAUSTIVE_ATOMS: usize = 20;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum OrliczError {
    #[error("invalid Orlicz function: {0}")]
    InvalidFunction(String),
    #[error("expected {expected} slices, found {found}")]
    SliceCount { expected: usize, found: usize },
    #[error("the near-origin comparison needs a counting measure")]
    NotCounting,
    #[error("the functions differ at atom {atom}, t = {t}: {left} vs {right}")]
    Disagree {
        atom: usize,
        t: f64,
        left: ExtReal,
        right: ExtReal,
    },
    #[error("inf over atoms of M(·, u) vanishes for every probed u")]
    NoPositiveInfimum,
    #[error("exhaustive subset search is limited to {MAX_EXHAUSTIVE_ATOMS} atoms, found {0}")]
    TooManyAtoms(usize),
    #[error("epsilon {0} must be positive and finite")]
    InvalidEpsilon(f64),
    #[error("weight function must be positive and finite, found {value} at atom {atom}")]
    InvalidDensity { atom: usize, value: ExtReal },
    #[error("F(∞) must equal 1, found {0}")]
    LimitNotOne(ExtReal),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    QuasiNorm(#[from] QuasiNormError),
    #[error(transparent)]
    L0(#[from] L0Error),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// An Orlicz function of a known kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OrliczFunction {
    /// `t^p`; for `p = ∞`, `t^∞ = 0` when `t ≤ 1` and `∞` otherwise.
    Power { p: Exponent },
    /// `min(t^p, cap)`.
    CappedPower { p: f64, cap: f64 },
    /// `t / (1 + t)`.
    BoundedRational,
    /// `0` for `t ≤ t0`, `1` beyond.
    Plateau { t0: f64 },
    /// `e^{t^p} - 1`.
    ExpPower { p: f64 },
    /// `factor · F(t)`.
    Scaled {
        factor: f64,
        inner: Box<OrliczFunction>,
    },
    /// `F(factor · t)`.
    Dilated {
        factor: f64,
        inner: Box<OrliczFunction>,
    },
    /// `below(t)` for `t ≤ split`, `above(t)` beyond.
    Glue {
        split: f64,
        below: Box<OrliczFunction>,
        above: Box<OrliczFunction>,
    },
}

fn positive_finite(name: &str, x: f64) -> Result<(), OrliczError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(OrliczError::InvalidFunction(format!(
            "{name} = {x} must be positive and finite"
        )))
    }
}

impl OrliczFunction {
    pub fn power(p: f64) -> OrliczFunction {
        OrliczFunction::Power {
            p: Exponent::new(p).expect("positive exponent"),
        }
    }

    pub fn scaled(factor: f64, inner: OrliczFunction) -> OrliczFunction {
        OrliczFunction::Scaled {
            factor,
            inner: Box::new(inner),
        }
    }

    pub fn dilated(factor: f64, inner: OrliczFunction) -> OrliczFunction {
        OrliczFunction::Dilated {
            factor,
            inner: Box::new(inner),
        }
    }

    pub fn glue(split: f64, below: OrliczFunction, above: OrliczFunction) -> OrliczFunction {
        OrliczFunction::Glue {
            split,
            below: Box::new(below),
            above: Box::new(above),
        }
    }

    /// Checks the parameters. Glued pieces must join without a downward jump.
    pub fn validate(&self) -> Result<(), OrliczError> {
        match self {
            OrliczFunction::Power { .. } | OrliczFunction::BoundedRational => Ok(()),
            OrliczFunction::CappedPower { p, cap } => {
                positive_finite("p", *p)?;
                positive_finite("cap", *cap)
            }
            OrliczFunction::Plateau { t0 } => positive_finite("t0", *t0),
            OrliczFunction::ExpPower { p } => positive_finite("p", *p),
            OrliczFunction::Scaled { factor, inner }
            | OrliczFunction::Dilated { factor, inner } => {
                positive_finite("factor", *factor)?;
                inner.validate()
            }
            OrliczFunction::Glue {
                split,
                below,
                above,
            } => {
                positive_finite("split", *split)?;
                below.validate()?;
                above.validate()?;
                let left = below.eval(ExtReal::of(*split));
                let right = above.eval(ExtReal::of(split.next_up()));
                if left > right {
                    return Err(OrliczError::InvalidFunction(format!(
                        "glue at {split} jumps down from {left} to {right}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// `F(t)`, with `F(∞)` the limit of the kind.
    pub fn eval(&self, t: ExtReal) -> ExtReal {
        match self {
            OrliczFunction::Power { p } => power_eval(*p, t),
            OrliczFunction::CappedPower { p, cap } => match t {
                ExtReal::Infinite => ExtReal::of(*cap),
                ExtReal::Finite(x) => ExtReal::of(x.powf(*p).min(*cap)),
            },
            OrliczFunction::BoundedRational => match t {
                ExtReal::Infinite => ExtReal::ONE,
                ExtReal::Finite(x) => ExtReal::of(x / (1.0 + x)),
            },
            OrliczFunction::Plateau { t0 } => {
                if t <= ExtReal::of(*t0) {
                    ExtReal::ZERO
                } else {
                    ExtReal::ONE
                }
            }
            OrliczFunction::ExpPower { p } => match t {
                ExtReal::Infinite => ExtReal::Infinite,
                ExtReal::Finite(x) => ExtReal::of(x.powf(*p).exp_m1()),
            },
            OrliczFunction::Scaled { factor, inner } => inner.eval(t).scale(*factor),
            OrliczFunction::Dilated { factor, inner } => inner.eval(t.scale(*factor)),
            OrliczFunction::Glue {
                split,
                below,
                above,
            } => {
                if t <= ExtReal::of(*split) {
                    below.eval(t)
                } else {
                    above.eval(t)
                }
            }
        }
    }

    pub fn eval_f64(&self, t: f64) -> ExtReal {
        self.eval(ExtReal::of(t))
    }

    /// `F(∞)`.
    pub fn limit(&self) -> ExtReal {
        self.eval(ExtReal::Infinite)
    }

    /// An exponent `a` with `F^{1/a}` convex, when the kind guarantees one.
    pub fn convexity_exponent(&self) -> Option<f64> {
        match self {
            OrliczFunction::Power {
                p: Exponent::Finite(p),
            } => Some(*p),
            OrliczFunction::ExpPower { p } if *p >= 1.0 => Some(1.0),
            OrliczFunction::Scaled { inner, .. } | OrliczFunction::Dilated { inner, .. } => {
                inner.convexity_exponent()
            }
            _ => None,
        }
    }

    /// `p` when `F` is a multiple of `(bt)^p`.
    pub fn power_exponent(&self) -> Option<Exponent> {
        match self {
            OrliczFunction::Power { p } => Some(*p),
            OrliczFunction::Scaled { inner, .. } | OrliczFunction::Dilated { inner, .. } => {
                inner.power_exponent()
            }
            _ => None,
        }
    }

    /// Closed form of `sup_s F(ts)/F(s)` over `0 < F(s) < ∞`, when known.
    pub fn delta_form(&self) -> Option<DeltaForm> {
        match self {
            OrliczFunction::Power {
                p: Exponent::Finite(p),
            } => Some(DeltaForm::power(*p)),
            OrliczFunction::CappedPower { p, .. } => Some(DeltaForm {
                below_one: 0.0,
                above_one: Some(*p),
            }),
            OrliczFunction::BoundedRational => Some(DeltaForm {
                below_one: 0.0,
                above_one: Some(1.0),
            }),
            OrliczFunction::ExpPower { p } => Some(DeltaForm {
                below_one: *p,
                above_one: None,
            }),
            OrliczFunction::Scaled { inner, .. } | OrliczFunction::Dilated { inner, .. } => {
                inner.delta_form()
            }
            _ => None,
        }
    }
}

fn power_eval(p: Exponent, t: ExtReal) -> ExtReal {
    match (p, t) {
        (_, ExtReal::Infinite) => ExtReal::Infinite,
        (Exponent::Finite(p), ExtReal::Finite(x)) => ExtReal::of(x.powf(p)),
        (Exponent::Infinite, ExtReal::Finite(x)) => {
            if x <= 1.0 {
                ExtReal::ZERO
            } else {
                ExtReal::Infinite
            }
        }
    }
}

impl fmt::Display for OrliczFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrliczFunction::Power { p } => write!(f, "t^{p}"),
            OrliczFunction::CappedPower { p, cap } => write!(f, "min(t^{p}, {cap})"),
            OrliczFunction::BoundedRational => write!(f, "t/(1+t)"),
            OrliczFunction::Plateau { t0 } => write!(f, "1[t > {t0}]"),
            OrliczFunction::ExpPower { p } => write!(f, "exp(t^{p}) - 1"),
            OrliczFunction::Scaled { factor, inner } => write!(f, "{factor}·({inner})"),
            OrliczFunction::Dilated { factor, inner } => write!(f, "({inner})∘({factor}t)"),
            OrliczFunction::Glue {
                split,
                below,
                above,
            } => write!(f, "[{below} | t ≤ {split} | {above}]"),
        }
    }
}

/// A Musielak–Orlicz function on a finite space.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MusielakOrliczFunction {
    /// The same Orlicz function on every atom.
    Shared(OrliczFunction),
    PerAtom(Vec<OrliczFunction>),
    /// `M(ω, t) = t^{p(ω)}` with `p(ω) ∈ (0, ∞]`.
    VariableExponent(Vec<Exponent>),
}

impl MusielakOrliczFunction {
    /// `M(ω, t)`.
    pub fn eval(&self, atom: usize, t: ExtReal) -> ExtReal {
        match self {
            MusielakOrliczFunction::Shared(f) => f.eval(t),
            MusielakOrliczFunction::PerAtom(fs) => fs[atom].eval(t),
            MusielakOrliczFunction::VariableExponent(ps) => power_eval(ps[atom], t),
        }
    }

    pub fn eval_f64(&self, atom: usize, t: f64) -> ExtReal {
        self.eval(atom, ExtReal::of(t))
    }

    /// Checks every slice and that the number of slices matches `atoms`.
    pub fn validate(&self, atoms: usize) -> Result<(), OrliczError> {
        let found = match self {
            MusielakOrliczFunction::Shared(f) => {
                return f.validate();
            }
            MusielakOrliczFunction::PerAtom(fs) => {
                for f in fs {
                    f.validate()?;
                }
                fs.len()
            }
            MusielakOrliczFunction::VariableExponent(ps) => ps.len(),
        };
        if found == atoms {
            Ok(())
        } else {
            Err(OrliczError::SliceCount {
                expected: atoms,
                found,
            })
        }
    }

    fn slices(&self, atoms: usize) -> Vec<OrliczFunction> {
        match self {
            MusielakOrliczFunction::Shared(f) => vec![f.clone(); atoms],
            MusielakOrliczFunction::PerAtom(fs) => fs.clone(),
            MusielakOrliczFunction::VariableExponent(ps) => {
                ps.iter().map(|&p| OrliczFunction::Power { p }).collect()
            }
        }
    }

    /// Closed form of the homogeneity function of `ρ_M`: the pointwise
    /// maximum over atoms of the per-slice closed forms.
    pub fn delta_form(&self, atoms: usize) -> Option<DeltaForm> {
        if let MusielakOrliczFunction::VariableExponent(ps) = self {
            // an infinite slice never admits a function with 0 < ρ < ∞ on its
            // own, but makes ρ(tf) infinite for t > 1
            let finite: Vec<f64> = ps
                .iter()
                .filter(|p| p.is_finite())
                .map(|p| p.value())
                .collect();
            if finite.is_empty() {
                return None;
            }
            let below = finite.iter().copied().fold(f64::INFINITY, f64::min);
            let above = if finite.len() == ps.len() {
                Some(finite.iter().copied().fold(0.0, f64::max))
            } else {
                None
            };
            return Some(DeltaForm {
                below_one: below,
                above_one: above,
            });
        }
        let slices = self.slices(atoms);
        let mut forms = slices.iter().map(OrliczFunction::delta_form);
        let first = forms.next()??;
        forms.try_fold(first, |acc, form| {
            let form = form?;
            Some(DeltaForm {
                below_one: acc.below_one.min(form.below_one),
                above_one: match (acc.above_one, form.above_one) {
                    (Some(a), Some(b)) => Some(a.max(b)),
                    _ => None,
                },
            })
        })
    }
}

/// `ρ_M(f) = ∫ M(ω, f(ω)) dμ(ω)`.
pub fn rho_m(
    m: &MusielakOrliczFunction,
    f: &PlusFunction,
    space: &MeasureSpace,
) -> Result<ExtReal, OrliczError> {
    space.check_len(f.len())?;
    Ok(rho_unchecked(m, f, space))
}

fn rho_unchecked(m: &MusielakOrliczFunction, f: &PlusFunction, space: &MeasureSpace) -> ExtReal {
    let values: Vec<ExtReal> = f
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| m.eval(i, v))
        .collect();
    space.integrate_unchecked(&values)
}

/// `ν_M(A, t) = ∫_A M(ω, t) dμ(ω)`.
pub fn nu_m(
    m: &MusielakOrliczFunction,
    set: &Subset,
    t: f64,
    space: &MeasureSpace,
) -> Result<ExtReal, OrliczError> {
    space.check_len(set.universe())?;
    if !(t >= 0.0) {
        return Err(MeasureError::InvalidValue { index: 0, value: t }.into());
    }
    Ok(nu_unchecked(m, set, t, space))
}

fn nu_unchecked(m: &MusielakOrliczFunction, set: &Subset, t: f64, space: &MeasureSpace) -> ExtReal {
    set.indices()
        .map(|i| m.eval_f64(i, t).scale(space.weight(i)))
        .sum()
}

/// The modular `ρ_M` as a [`Gauge`].
#[derive(Clone, Debug)]
pub struct MusielakOrliczGauge {
    space: MeasureSpace,
    m: MusielakOrliczFunction,
}

impl MusielakOrliczGauge {
    pub fn new(space: MeasureSpace, m: MusielakOrliczFunction) -> Result<Self, OrliczError> {
        m.validate(space.len())?;
        Ok(MusielakOrliczGauge { space, m })
    }

    pub fn function(&self) -> &MusielakOrliczFunction {
        &self.m
    }

    /// `ν_M(A, t)`.
    pub fn nu(&self, set: &Subset, t: f64) -> Result<ExtReal, OrliczError> {
        nu_m(&self.m, set, t, &self.space)
    }
}

impl Gauge for MusielakOrliczGauge {
    fn space(&self) -> &MeasureSpace {
        &self.space
    }

    fn eval(&self, f: &PlusFunction) -> ExtReal {
        rho_unchecked(&self.m, f, &self.space)
    }

    fn name(&self) -> String {
        match &self.m {
            MusielakOrliczFunction::Shared(f) => format!("orlicz[{f}]"),
            MusielakOrliczFunction::PerAtom(fs) => {
                let parts: Vec<String> = fs.iter().map(|f| f.to_string()).collect();
                format!("musielak-orlicz[{}]", parts.join("; "))
            }
            MusielakOrliczFunction::VariableExponent(ps) => {
                let parts: Vec<String> = ps.iter().map(|p| p.to_string()).collect();
                format!("variable-exponent[{}]", parts.join(", "))
            }
        }
    }

    fn meta(&self) -> GaugeMeta {
        let delta = self.m.delta_form(self.space.len());
        GaugeMeta {
            homogeneous: delta == Some(DeltaForm::HOMOGENEOUS),
            delta,
            convexity_pair: Some(ConvexityPair::new(1.0, 2.0)),
        }
    }
}

/// `2^{k/4}` for `|k| ≤ 240`: the default grid of `s` for the slice tests.
pub fn default_slice_grid() -> Vec<f64> {
    (-240..=240).map(|k| 2f64.powf(k as f64 / 4.0)).collect()
}

/// Result of [`doubling_constant`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DoublingResult {
    /// The least `D` with `M(ω, 2s) ≤ D M(ω, s)` on the grid, if finite.
    pub constant: Option<f64>,
    pub closed_form: bool,
    /// Atom and `s` where the ratio is infinite.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<(usize, f64)>,
}

/// The doubling constant of `m`: `2^{p_max}` for power kinds with bounded
/// exponent, otherwise the largest ratio `M(ω, 2s)/M(ω, s)` on `grid`.
pub fn doubling_constant(m: &MusielakOrliczFunction, atoms: usize, grid: &[f64]) -> DoublingResult {
    let slices = m.slices(atoms);
    let exponents: Option<Vec<Exponent>> = slices.iter().map(|s| s.power_exponent()).collect();
    if let Some(ps) = exponents {
        if ps.iter().all(|p| p.is_finite()) && !ps.is_empty() {
            let pmax = ps.iter().map(|p| p.value()).fold(0.0, f64::max);
            return DoublingResult {
                constant: Some(2f64.powf(pmax)),
                closed_form: true,
                witness: None,
            };
        }
    }
    let mut best: f64 = 1.0;
    for (atom, slice) in slices.iter().enumerate() {
        for &s in grid {
            let small = slice.eval_f64(s);
            let large = slice.eval_f64(2.0 * s);
            match large.ratio(small) {
                None => {}
                Some(ExtReal::Infinite) => {
                    return DoublingResult {
                        constant: None,
                        closed_form: false,
                        witness: Some((atom, s)),
                    };
                }
                Some(ExtReal::Finite(r)) => best = best.max(r),
            }
        }
    }
    DoublingResult {
        constant: Some(best),
        closed_form: false,
        witness: None,
    }
}

/// A certified `(c, d)` with `M(ω, cs) ≤ d M(ω, s)` and `d < 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PcoPair {
    pub c: f64,
    pub d: f64,
    pub closed_form: bool,
}

/// Margin below 1 that a sampled `d` must clear.
pub const PCO_MARGIN: f64 = 1e-6;

/// Finds `(c, d)` with `d < 1`. When every slice has `M^{1/a}` convex the
/// first candidate `c` is returned with `d = c^a`; otherwise each candidate is
/// tried on `grid` and accepted when the largest ratio is at most `1 - 10⁻⁶`.
pub fn pco_constants(
    m: &MusielakOrliczFunction,
    atoms: usize,
    candidates: &[f64],
    grid: &[f64],
) -> Option<PcoPair> {
    let candidates: Vec<f64> = candidates
        .iter()
        .copied()
        .filter(|c| *c > 0.0 && *c < 1.0)
        .collect();
    let slices = m.slices(atoms);
    let exponents: Option<Vec<f64>> = slices.iter().map(|s| s.convexity_exponent()).collect();
    if let (Some(a), Some(&c)) = (exponents, candidates.first()) {
        if let Some(amin) = a.into_iter().reduce(f64::min) {
            return Some(PcoPair {
                c,
                d: c.powf(amin),
                closed_form: true,
            });
        }
    }
    for &c in &candidates {
        let mut d: f64 = 0.0;
        for slice in &slices {
            for &s in grid {
                if let Some(r) = slice.eval_f64(c * s).ratio(slice.eval_f64(s)) {
                    d = d.max(r.to_f64());
                }
            }
        }
        if d <= 1.0 - PCO_MARGIN {
            return Some(PcoPair {
                c,
                d,
                closed_form: false,
            });
        }
    }
    None
}

/// `u · B_ρ(ε) = { f : ρ(‖f/u‖) < ε }`.
#[derive(Clone, Debug)]
pub struct GaugeBall {
    pub gauge: Arc<dyn Gauge>,
    pub epsilon: f64,
    pub scale: f64,
}

impl GaugeBall {
    pub fn new(gauge: Arc<dyn Gauge>, epsilon: f64, scale: f64) -> Result<GaugeBall, OrliczError> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(OrliczError::InvalidEpsilon(epsilon));
        }
        positive_finite("scale", scale)?;
        Ok(GaugeBall {
            gauge,
            epsilon,
            scale,
        })
    }

    pub fn contains(&self, q: &QuasiNormSpace, f: &VectorFunction) -> Result<bool, OrliczError> {
        f.check(self.gauge.space().len(), q)?;
        let norms = f.pointwise_norm(q).div(self.scale);
        Ok(self.gauge.eval(&norms) < ExtReal::of(self.epsilon))
    }
}

/// `f ∈ B_M(ε)`, i.e. `ρ_M(‖f‖) < ε`.
pub fn ball_member_m(
    gauge: &MusielakOrliczGauge,
    epsilon: f64,
    f: &VectorFunction,
    q: &QuasiNormSpace,
) -> Result<bool, OrliczError> {
    if !(epsilon > 0.0) {
        return Err(OrliczError::InvalidEpsilon(epsilon));
    }
    f.check(gauge.space.len(), q)?;
    Ok(gauge.eval(&f.pointwise_norm(q)) < ExtReal::of(epsilon))
}

/// A random `f` with `ρ(‖f‖) < ε`, often close to the boundary of the ball.
/// Returns `None` when the random direction cannot be scaled into the ball.
pub fn sample_gauge_ball(
    rng: &mut Rng,
    gauge: &dyn Gauge,
    q: &QuasiNormSpace,
    epsilon: f64,
) -> Option<VectorFunction> {
    let n = gauge.space().len();
    let base = if rng.random_bool(0.25) {
        // concentrated on a single atom
        let mut f = VectorFunction::zeros(n, q.dim());
        let atom = rng.random_range(0..n);
        *f.row_mut(atom) = random_vector(rng, q.dim());
        f
    } else {
        random_vector_function(rng, n, q.dim())
    };
    let norms = base.pointwise_norm(q);
    if norms.is_zero() {
        return Some(base);
    }
    let target = ExtReal::of(epsilon);
    let exit = infimum_of_upset(
        |s| gauge.eval(&norms.scale(s)) >= target,
        &SolverParams::default(),
    )
    .ok()?;
    let mut lambda = match exit {
        ExtReal::Infinite => log_uniform(rng, -20.0, 40.0),
        ExtReal::Finite(s) if s == 0.0 => return None,
        ExtReal::Finite(s) => {
            if rng.random_bool(0.5) {
                s * (1.0 - 1e-9)
            } else {
                s * rng.random_range(0.0..1.0)
            }
        }
    };
    for _ in 0..64 {
        if lambda > 0.0 && gauge.eval(&norms.scale(lambda)) < target {
            return Some(base.scale(lambda));
        }
        lambda /= 2.0;
    }
    None
}

/// Sampling options for the comparison checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceOptions {
    /// Sampled functions per `ε`.
    pub samples: usize,
    pub seed: u64,
}

impl Default for EquivalenceOptions {
    fn default() -> Self {
        EquivalenceOptions {
            samples: 1000,
            seed: 0,
        }
    }
}

/// Outcome for one `ε` of a ball comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceRow {
    pub epsilon: f64,
    /// `false` when `ε` is outside the range covered by the inclusion.
    pub checked: bool,
    /// Radius of the ball the samples were drawn from.
    pub radius: f64,
    pub samples: usize,
    pub violations: usize,
    /// Violations of the intermediate bounds the inclusion rests on.
    pub bound_violations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl EquivalenceRow {
    fn skipped(epsilon: f64, note: String) -> EquivalenceRow {
        EquivalenceRow {
            epsilon,
            checked: false,
            radius: 0.0,
            samples: 0,
            violations: 0,
            bound_violations: 0,
            note: Some(note),
            witness: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0 && self.bound_violations == 0
    }
}

/// Result of [`equivalence_near_origin`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NearOriginReport {
    pub t0: f64,
    pub u0: f64,
    /// `inf_ω M(ω, u0)`.
    pub r0: f64,
    pub rows: Vec<EquivalenceRow>,
}

impl NearOriginReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(EquivalenceRow::passed)
    }
}

fn check_agreement(
    m: &MusielakOrliczFunction,
    n: &MusielakOrliczFunction,
    atoms: usize,
    points: impl Iterator<Item = ExtReal> + Clone,
) -> Result<(), OrliczError> {
    for atom in 0..atoms {
        for t in points.clone() {
            let (left, right) = (m.eval(atom, t), n.eval(atom, t));
            if left != right {
                return Err(OrliczError::Disagree {
                    atom,
                    t: t.to_f64(),
                    left,
                    right,
                });
            }
        }
    }
    Ok(())
}

fn check_epsilons(grid: &[f64]) -> Result<(), OrliczError> {
    match grid.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        Some(&e) => Err(OrliczError::InvalidEpsilon(e)),
        None => Ok(()),
    }
}

/// Checks that `B_M` and `B_N` define the same topology when `M = N` on
/// `(0, t0]`, on a counting-measure space.
///
/// Finds `u0 = t0 · 2^k ≥ t0` with `R0 = inf_ω M(ω, u0) > 0`. For each `ε ≤ R0`
/// on the grid, samples `f ∈ B_M(ε)` and checks `(t0/u0) f ∈ B_N(ε)`; the
/// intermediate bound `‖f(ω)‖ < u0` on every atom is checked as well.
/// The agreement of `M` and `N` is verified on `t0 · 2^{-k/4}`, `k ≤ 400`.
#[allow(clippy::too_many_arguments)]
pub fn equivalence_near_origin(
    m: &MusielakOrliczFunction,
    n: &MusielakOrliczFunction,
    t0: f64,
    epsilons: &[f64],
    space: &MeasureSpace,
    q: &QuasiNormSpace,
    opts: &EquivalenceOptions,
) -> Result<NearOriginReport, OrliczError> {
    if !space.is_counting() {
        return Err(OrliczError::NotCounting);
    }
    positive_finite("t0", t0)?;
    check_epsilons(epsilons)?;
    let gm = MusielakOrliczGauge::new(space.clone(), m.clone())?;
    let gn = MusielakOrliczGauge::new(space.clone(), n.clone())?;
    let atoms = space.len();
    check_agreement(
        m,
        n,
        atoms,
        (0..=400).map(|k| ExtReal::of(t0 * 2f64.powf(-k as f64 / 4.0))),
    )?;
    let (u0, r0) = (0..=64)
        .map(|k| t0 * 2f64.powi(k))
        .find_map(|u| {
            let inf = (0..atoms).map(|i| m.eval_f64(i, u)).min()?;
            (!inf.is_zero()).then_some((u, inf.to_f64()))
        })
        .ok_or(OrliczError::NoPositiveInfimum)?;
    let scale = t0 / u0;
    let mut rng = rng_for(opts.seed, "equivalence-near-origin");
    let mut rows = Vec::with_capacity(epsilons.len());
    for &epsilon in epsilons {
        if epsilon > r0 {
            rows.push(EquivalenceRow::skipped(
                epsilon,
                format!("epsilon exceeds R0 = {r0}"),
            ));
            continue;
        }
        let mut row = EquivalenceRow {
            epsilon,
            checked: true,
            radius: epsilon,
            samples: 0,
            violations: 0,
            bound_violations: 0,
            note: None,
            witness: None,
        };
        let target = ExtReal::of(epsilon);
        while row.samples < opts.samples {
            let Some(f) = sample_gauge_ball(&mut rng, &gm, q, epsilon) else {
                continue;
            };
            row.samples += 1;
            let norms = f.pointwise_norm(q);
            let below_u0 = norms.values().iter().all(|v| *v < ExtReal::of(u0));
            let scaled = norms.scale(scale);
            let rho_n = gn.eval(&scaled);
            let inside = rho_n < target;
            if !below_u0 {
                row.bound_violations += 1;
            }
            if !inside {
                row.violations += 1;
            }
            if (!inside || !below_u0) && row.witness.is_none() {
                row.witness = Some(
                    Witness::new("(t0/u0) f left B_N(epsilon)")
                        .param("epsilon", epsilon)
                        .param("rho_M", gm.eval(&norms).to_f64())
                        .param("rho_N_scaled", rho_n.to_f64())
                        .vectors("f", f.rows().to_vec()),
                );
            }
        }
        rows.push(row);
    }
    Ok(NearOriginReport { t0, u0, r0, rows })
}

/// Per-`ε` parameters of [`equivalence_near_infinity`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NearInfinityRow {
    /// Height with `ν_N(Ω, u) < ε/3`.
    pub u: f64,
    /// `inf { ν_M(A, u) : ν_N(A, t0) ≥ ε/3 }`, infinite when no such `A`.
    pub delta: ExtReal,
    /// Samples violating `ν_M(Ω_{f,u}, u) ≤ ρ_M(‖f‖)`.
    pub chebyshev_violations: usize,
    #[serde(flatten)]
    pub row: EquivalenceRow,
}

/// Result of [`equivalence_near_infinity`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NearInfinityReport {
    pub t0: f64,
    pub rows: Vec<NearInfinityRow>,
}

impl NearInfinityReport {
    pub fn passed(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.row.passed() && r.chebyshev_violations == 0)
    }
}

/// Relative slack for the three-term bound, whose two sides are summed in
/// different orders.
const BOUND_TOL: f64 = 1e-12;

/// Checks `B_M(min(ε/3, δ)) ⊆ B_N(ε)` when `M = N` on `[t0, ∞)`.
///
/// For each `ε`: `u = t0 · 2^{-k}` is the first height with
/// `ν_N(Ω, u) < ε/3`, and `δ` is found by enumerating every subset. Each sample
/// is also checked against the three-term bound
/// `ρ_N(‖f‖) ≤ ν_N(Ω, u) + ν_N(Ω_{f,u}, t0) + ρ_M(‖f‖)` and the Chebyshev
/// estimate `ν_M(Ω_{f,u}, u) ≤ ρ_M(‖f‖)`, the latter exactly.
pub fn equivalence_near_infinity(
    m: &MusielakOrliczFunction,
    n: &MusielakOrliczFunction,
    t0: f64,
    epsilons: &[f64],
    space: &MeasureSpace,
    q: &QuasiNormSpace,
    opts: &EquivalenceOptions,
) -> Result<NearInfinityReport, OrliczError> {
    positive_finite("t0", t0)?;
    check_epsilons(epsilons)?;
    let atoms = space.len();
    if atoms > MAX_EXHAUSTIVE_ATOMS {
        return Err(OrliczError::TooManyAtoms(atoms));
    }
    let gm = MusielakOrliczGauge::new(space.clone(), m.clone())?;
    let gn = MusielakOrliczGauge::new(space.clone(), n.clone())?;
    check_agreement(
        m,
        n,
        atoms,
        (0..=400)
            .map(|k| ExtReal::of(t0 * 2f64.powf(k as f64 / 4.0)))
            .chain([ExtReal::Infinite]),
    )?;
    let full = space.full();
    let subsets: Vec<Subset> = space.all_subsets().collect();
    let mut rng = rng_for(opts.seed, "equivalence-near-infinity");
    let mut rows = Vec::with_capacity(epsilons.len());
    for &epsilon in epsilons {
        let third = ExtReal::of(epsilon / 3.0);
        let Some(u) = (0..=1074)
            .map(|k| t0 * 2f64.powi(-k))
            .take_while(|u| *u > 0.0)
            .find(|&u| nu_unchecked(n, &full, u, space) < third)
        else {
            rows.push(NearInfinityRow {
                u: 0.0,
                delta: ExtReal::ZERO,
                chebyshev_violations: 0,
                row: EquivalenceRow::skipped(epsilon, "no height u with nu_N(Ω, u) < ε/3".into()),
            });
            continue;
        };
        let delta = subsets
            .iter()
            .filter(|a| nu_unchecked(n, a, t0, space) >= third)
            .map(|a| nu_unchecked(m, a, u, space))
            .min()
            .unwrap_or(ExtReal::Infinite);
        if delta.is_zero() {
            rows.push(NearInfinityRow {
                u,
                delta,
                chebyshev_violations: 0,
                row: EquivalenceRow {
                    epsilon,
                    checked: true,
                    radius: 0.0,
                    samples: 0,
                    violations: 1,
                    bound_violations: 0,
                    note: Some("a set with nu_N(A, t0) ≥ ε/3 has nu_M(A, u) = 0".into()),
                    witness: None,
                },
            });
            continue;
        }
        let radius = (epsilon / 3.0).min(delta.to_f64());
        let mut out = NearInfinityRow {
            u,
            delta,
            chebyshev_violations: 0,
            row: EquivalenceRow {
                epsilon,
                checked: true,
                radius,
                samples: 0,
                violations: 0,
                bound_violations: 0,
                note: None,
                witness: None,
            },
        };
        let target = ExtReal::of(epsilon);
        let nu_n_omega = nu_unchecked(n, &full, u, space);
        while out.row.samples < opts.samples {
            let Some(f) = sample_gauge_ball(&mut rng, &gm, q, radius) else {
                continue;
            };
            out.row.samples += 1;
            let norms = f.pointwise_norm(q);
            let level = Subset::from_predicate(atoms, |i| norms.get(i) > ExtReal::of(u));
            let rho_m_f = gm.eval(&norms);
            let rho_n_f = gn.eval(&norms);
            let bound = nu_n_omega + nu_unchecked(n, &level, t0, space) + rho_m_f;
            let bound_ok = rho_n_f <= bound.scale(1.0 + BOUND_TOL);
            let chebyshev_ok = nu_unchecked(m, &level, u, space) <= rho_m_f;
            let inside = rho_n_f < target;
            if !bound_ok {
                out.row.bound_violations += 1;
            }
            if !chebyshev_ok {
                out.chebyshev_violations += 1;
            }
            if !inside {
                out.row.violations += 1;
            }
            if !(inside && bound_ok && chebyshev_ok) && out.row.witness.is_none() {
                out.row.witness = Some(
                    Witness::new("sample of B_M(min(ε/3, δ)) breaks the inclusion or its bounds")
                        .param("epsilon", epsilon)
                        .param("rho_M", rho_m_f.to_f64())
                        .param("rho_N", rho_n_f.to_f64())
                        .param("bound", bound.to_f64())
                        .vectors("f", f.rows().to_vec())
                        .set("level_set", level.to_indices()),
                );
            }
        }
        rows.push(out);
    }
    Ok(NearInfinityReport { t0, rows })
}

/// `M(ω, t) = φ(ω) F(t)`, the Musielak–Orlicz function whose modular space is
/// `L_{0,φ}`. Requires `φ` positive and finite and `F(∞) = 1`.
pub fn l0f_as_musielak(
    phi: &PlusFunction,
    f: &OrliczFunction,
    space: &MeasureSpace,
) -> Result<MusielakOrliczFunction, OrliczError> {
    space.check_len(phi.len())?;
    f.validate()?;
    if let Some((atom, &value)) = phi
        .values()
        .iter()
        .enumerate()
        .find(|(_, v)| v.is_zero() || v.is_infinite())
    {
        return Err(OrliczError::InvalidDensity { atom, value });
    }
    if f.limit() != ExtReal::ONE {
        return Err(OrliczError::LimitNotOne(f.limit()));
    }
    Ok(MusielakOrliczFunction::PerAtom(
        phi.values()
            .iter()
            .map(|v| OrliczFunction::scaled(v.to_f64(), f.clone()))
            .collect(),
    ))
}

/// Result of [`l0f_inclusion_check`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct L0fReport {
    pub epsilon: f64,
    /// The neighbourhood `V_{E,δ,t}` found to lie inside `B_M(ε)`.
    pub ball: L0BallView,
    pub samples: usize,
    pub violations: usize,
    pub bound_violations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl L0fReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.bound_violations == 0
    }
}

/// Serializable view of an [`L0Ball`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct L0BallView {
    pub set: Vec<usize>,
    pub delta: f64,
    pub t: f64,
}

impl From<&L0Ball> for L0BallView {
    fn from(ball: &L0Ball) -> Self {
        L0BallView {
            set: ball.set.to_indices(),
            delta: ball.delta,
            t: ball.t,
        }
    }
}

/// Builds `V_{E,δ,t} ⊆ B_M(ε)` for `M = φ F` and checks it on samples.
///
/// `E` drops the atoms of least `φ`-mass while the dropped mass stays below
/// `ε/3`; `t = 2^k` is the largest with `F(t) ∫ φ < ε/3`; `δ` is the least
/// `μ(B)` over `B ⊆ Ω` with `∫_B φ ≥ ε/3`. Each sample is checked against
/// `ρ_M(‖f‖) < ε` and against the bound
/// `ρ_M(‖f‖) ≤ ∫_{Ω∖E} φ + ∫_{E ∩ Ω_{f,t}} φ + F(t) ∫ φ`.
pub fn l0f_inclusion_check(
    phi: &PlusFunction,
    f: &OrliczFunction,
    space: &MeasureSpace,
    q: &QuasiNormSpace,
    epsilon: f64,
    opts: &EquivalenceOptions,
) -> Result<L0fReport, OrliczError> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(OrliczError::InvalidEpsilon(epsilon));
    }
    let n = space.len();
    if n > MAX_EXHAUSTIVE_ATOMS {
        return Err(OrliczError::TooManyAtoms(n));
    }
    let m = l0f_as_musielak(phi, f, space)?;
    let gauge = MusielakOrliczGauge::new(space.clone(), m)?;
    let third = epsilon / 3.0;
    let mass = |set: &Subset| -> f64 {
        set.indices()
            .map(|i| space.weight(i) * phi.get(i).to_f64())
            .sum()
    };
    let total = mass(&space.full());

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let ma = space.weight(a) * phi.get(a).to_f64();
        let mb = space.weight(b) * phi.get(b).to_f64();
        ma.total_cmp(&mb)
    });
    let mut set = space.full();
    let mut dropped = Subset::empty(n);
    for &i in &order {
        dropped.insert(i);
        if mass(&dropped) < third {
            set.remove(i);
        } else {
            dropped.remove(i);
            break;
        }
    }
    let t = (-1074..=60)
        .rev()
        .map(|k| 2f64.powi(k))
        .find(|&t| f.eval_f64(t).to_f64() * total < third)
        .ok_or(OrliczError::InvalidEpsilon(epsilon))?;
    let delta = space
        .all_subsets()
        .filter(|b| mass(b) >= third)
        .map(|b| space.measure_of(&b))
        .fold(f64::INFINITY, f64::min);
    let delta = if delta.is_finite() {
        delta
    } else {
        2.0 * space.total()
    };
    let ball = L0Ball::new(set.clone(), delta, t)?;

    let mut rng = rng_for(opts.seed, "l0f-inclusion");
    let target = ExtReal::of(epsilon);
    let tail = mass(&set.complement());
    let mut report = L0fReport {
        epsilon,
        ball: L0BallView::from(&ball),
        samples: 0,
        violations: 0,
        bound_violations: 0,
        witness: None,
    };
    for k in 0..opts.samples {
        let placement = if k % 2 == 0 {
            Placement::Random
        } else {
            Placement::Boundary {
                axis: rng.random_range(0..q.dim()),
            }
        };
        let g = sample_member(&mut rng, space, q, &ball, placement, true);
        report.samples += 1;
        let norms = g.pointwise_norm(q);
        let rho = gauge.eval(&norms);
        let level = Subset::from_predicate(n, |i| norms.get(i) > ExtReal::of(t));
        let bound = tail + mass(&level.intersection(&set)) + f.eval_f64(t).to_f64() * total;
        let bound_ok = rho <= ExtReal::of(bound * (1.0 + BOUND_TOL));
        let inside = rho < target;
        if !bound_ok {
            report.bound_violations += 1;
        }
        if !inside {
            report.violations += 1;
        }
        if !(inside && bound_ok) && report.witness.is_none() {
            report.witness = Some(
                Witness::new("member of V_{E,δ,t} outside B_M(ε)")
                    .param("rho_M", rho.to_f64())
                    .param("bound", bound)
                    .vectors("f", g.rows().to_vec()),
            );
        }
    }
    Ok(report)
}

/// The Luxemburg norm of the variable-exponent modular, computed by splitting
/// off the atoms with `p = ∞`: `max(max_{p(ω)=∞} f(ω), λ₁)` with
/// `λ₁ = inf { λ : Σ_{p(ω)<∞} μ(ω) (f(ω)/λ)^{p(ω)} < 1 }`.
pub fn variable_exponent_norm(
    exponents: &[Exponent],
    space: &MeasureSpace,
    f: &PlusFunction,
) -> Result<ExtReal, OrliczError> {
    space.check_len(f.len())?;
    if exponents.len() != space.len() {
        return Err(OrliczError::SliceCount {
            expected: space.len(),
            found: exponents.len(),
        });
    }
    let sup_part = exponents
        .iter()
        .zip(f.values())
        .filter(|(p, _)| !p.is_finite())
        .map(|(_, v)| *v)
        .max()
        .unwrap_or(ExtReal::ZERO);
    let finite: Vec<(f64, f64, ExtReal)> = exponents
        .iter()
        .enumerate()
        .filter(|(i, p)| p.is_finite() && !f.get(*i).is_zero())
        .map(|(i, p)| (space.weight(i), p.value(), f.get(i)))
        .collect();
    if finite.iter().any(|(_, _, v)| v.is_infinite()) {
        return Ok(ExtReal::Infinite);
    }
    let integral_part = if finite.is_empty() {
        ExtReal::ZERO
    } else {
        infimum_of_upset(
            |lambda| {
                let sum: f64 = finite
                    .iter()
                    .map(|(w, p, v)| w * (v.to_f64() / lambda).powf(*p))
                    .sum();
                sum < 1.0
            },
            &SolverParams::default(),
        )?
    };
    Ok(sup_part.max(integral_part))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(x: f64) -> ExtReal {
        ExtReal::of(x)
    }

    #[test]
    fn eval_examples() {
        assert_eq!(OrliczFunction::power(2.0).eval_f64(3.0), e(9.0));
        let inf = OrliczFunction::Power {
            p: Exponent::Infinite,
        };
        assert_eq!(inf.eval_f64(0.9), ExtReal::ZERO);
        assert_eq!(inf.eval_f64(1.0), ExtReal::ZERO);
        assert_eq!(inf.eval_f64(1.5), ExtReal::Infinite);
        assert_eq!(OrliczFunction::BoundedRational.limit(), ExtReal::ONE);
        let capped = OrliczFunction::CappedPower { p: 2.0, cap: 4.0 };
        assert_eq!(capped.eval_f64(1.5), e(2.25));
        assert_eq!(capped.eval_f64(3.0), e(4.0));
        assert_eq!(capped.limit(), e(4.0));
        let plateau = OrliczFunction::Plateau { t0: 1.0 };
        assert_eq!(plateau.eval_f64(1.0), ExtReal::ZERO);
        assert_eq!(plateau.eval_f64(1.0 + 1e-12), ExtReal::ONE);
        let exp = OrliczFunction::ExpPower { p: 1.0 };
        assert_eq!(exp.eval_f64(0.0), ExtReal::ZERO);
        assert_eq!(exp.eval_f64(1000.0), ExtReal::Infinite);
        let glued =
            OrliczFunction::glue(1.0, OrliczFunction::power(1.0), OrliczFunction::power(3.0));
        assert_eq!(glued.eval_f64(0.5), e(0.5));
        assert_eq!(glued.eval_f64(2.0), e(8.0));
        assert_eq!(
            OrliczFunction::dilated(2.0, OrliczFunction::power(2.0)).eval_f64(3.0),
            e(36.0)
        );
        assert_eq!(
            OrliczFunction::scaled(0.5, OrliczFunction::power(2.0)).eval_f64(3.0),
            e(4.5)
        );
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        assert!(OrliczFunction::Plateau { t0: 0.0 }.validate().is_err());
        assert!(OrliczFunction::CappedPower { p: 1.0, cap: -1.0 }
            .validate()
            .is_err());
        assert!(
            OrliczFunction::scaled(f64::INFINITY, OrliczFunction::BoundedRational)
                .validate()
                .is_err()
        );
        let ok = OrliczFunction::glue(1.0, OrliczFunction::power(1.0), OrliczFunction::power(0.5));
        assert!(ok.validate().is_ok());
        // jumps down at the split
        let bad = OrliczFunction::glue(
            1.0,
            OrliczFunction::power(1.0),
            OrliczFunction::scaled(0.5, OrliczFunction::power(1.0)),
        );
        assert!(bad.validate().is_err());
        let m = MusielakOrliczFunction::PerAtom(vec![OrliczFunction::power(1.0)]);
        assert!(m.validate(2).is_err());
    }

    #[test]
    fn rho_and_nu_examples() {
        let counting = MeasureSpace::counting(2).unwrap();
        let m = MusielakOrliczFunction::Shared(OrliczFunction::power(2.0));
        let f = PlusFunction::from_f64s(&[3.0, 4.0]).unwrap();
        assert_eq!(rho_m(&m, &f, &counting).unwrap(), e(25.0));
        assert_eq!(
            rho_m(&m, &PlusFunction::zeros(2), &counting).unwrap(),
            ExtReal::ZERO
        );
        let space = MeasureSpace::new(vec![0.25, 0.75]).unwrap();
        let bounded = MusielakOrliczFunction::Shared(OrliczFunction::BoundedRational);
        let f = PlusFunction::constant(2, ExtReal::Infinite);
        assert_eq!(rho_m(&bounded, &f, &space).unwrap(), e(1.0));

        let halves = MeasureSpace::new(vec![0.5, 0.5]).unwrap();
        let linear = MusielakOrliczFunction::Shared(OrliczFunction::power(1.0));
        assert_eq!(nu_m(&linear, &halves.full(), 2.0, &halves).unwrap(), e(2.0));
        assert_eq!(
            nu_m(&linear, &halves.empty(), 2.0, &halves).unwrap(),
            ExtReal::ZERO
        );
        let var = MusielakOrliczFunction::VariableExponent(vec![
            Exponent::Finite(1.0),
            Exponent::Finite(2.0),
        ]);
        assert_eq!(
            nu_m(&var, &counting.full(), 3.0, &counting).unwrap(),
            e(12.0)
        );
        assert!(rho_m(&m, &PlusFunction::zeros(3), &counting).is_err());
    }

    #[test]
    fn doubling_examples() {
        let grid = default_slice_grid();
        for p in [0.5, 1.0, 2.0, 3.5] {
            let m = MusielakOrliczFunction::Shared(OrliczFunction::power(p));
            let d = doubling_constant(&m, 2, &grid);
            assert!(d.closed_form);
            assert_eq!(d.constant, Some(2f64.powf(p)));
            // oracle: the ratio (2s)^p / s^p on the grid
            let sampled = grid
                .iter()
                .map(|s| (2.0 * s).powf(p) / s.powf(p))
                .fold(0.0, f64::max);
            assert!((sampled - 2f64.powf(p)).abs() < 1e-12 * sampled);
        }
        let var = MusielakOrliczFunction::VariableExponent(vec![
            Exponent::Finite(1.0),
            Exponent::Finite(3.0),
            Exponent::Finite(2.0),
        ]);
        assert_eq!(doubling_constant(&var, 3, &grid).constant, Some(8.0));
        let with_inf = MusielakOrliczFunction::VariableExponent(vec![
            Exponent::Finite(1.0),
            Exponent::Infinite,
        ]);
        let d = doubling_constant(&with_inf, 2, &grid);
        assert_eq!(d.constant, None);
        let (atom, s) = d.witness.unwrap();
        assert_eq!(atom, 1);
        assert_eq!(with_inf.eval_f64(1, s), ExtReal::ZERO);
        assert_eq!(with_inf.eval_f64(1, 2.0 * s), ExtReal::Infinite);
        let plateau = MusielakOrliczFunction::Shared(OrliczFunction::Plateau { t0: 1.0 });
        assert_eq!(doubling_constant(&plateau, 1, &grid).constant, None);
        let bounded = MusielakOrliczFunction::Shared(OrliczFunction::BoundedRational);
        let d = doubling_constant(&bounded, 1, &grid).constant.unwrap();
        assert!(d <= 2.0 && d > 1.99);
    }

    #[test]
    fn pco_examples() {
        let grid = default_slice_grid();
        let sq = MusielakOrliczFunction::Shared(OrliczFunction::power(2.0));
        let pair = pco_constants(&sq, 1, &[0.5], &grid).unwrap();
        assert_eq!((pair.c, pair.d), (0.5, 0.25));
        let lin = MusielakOrliczFunction::Shared(OrliczFunction::power(1.0));
        let pair = pco_constants(&lin, 1, &[0.5], &grid).unwrap();
        assert_eq!((pair.c, pair.d), (0.5, 0.5));
        let bounded = MusielakOrliczFunction::Shared(OrliczFunction::BoundedRational);
        assert_eq!(
            pco_constants(&bounded, 1, &[0.5, 0.25, 0.125, 1.0 / 16.0], &grid),
            None
        );
        // a sampled certificate for a kind without a convexity exponent
        let capped =
            MusielakOrliczFunction::Shared(OrliczFunction::CappedPower { p: 2.0, cap: 1.0 });
        assert_eq!(pco_constants(&capped, 1, &[0.5], &grid), None);
        let glued = MusielakOrliczFunction::Shared(OrliczFunction::glue(
            1.0,
            OrliczFunction::power(2.0),
            OrliczFunction::power(3.0),
        ));
        let pair = pco_constants(&glued, 1, &[0.5], &grid).unwrap();
        assert!(!pair.closed_form);
        assert!((pair.d - 0.25).abs() < 1e-12);
    }

    #[test]
    fn ball_member_examples() {
        let space = MeasureSpace::counting(2).unwrap();
        let q = QuasiNormSpace::lp(2, 2.0).unwrap();
        let gauge = MusielakOrliczGauge::new(
            space,
            MusielakOrliczFunction::Shared(OrliczFunction::power(2.0)),
        )
        .unwrap();
        let f = VectorFunction::new(vec![vec![3.0, 0.0], vec![0.0, 4.0]]).unwrap();
        assert!(ball_member_m(&gauge, 26.0, &f, &q).unwrap());
        assert!(!ball_member_m(&gauge, 25.0, &f, &q).unwrap());
        assert!(ball_member_m(&gauge, 1e-300, &VectorFunction::zeros(2, 2), &q).unwrap());
        let ball = GaugeBall::new(Arc::new(gauge), 26.0, 1.0).unwrap();
        assert!(ball.contains(&q, &f).unwrap());
        let scaled = GaugeBall { scale: 0.5, ..ball };
        assert!(!scaled.contains(&q, &f).unwrap());
    }

    #[test]
    fn meta_closed_forms() {
        let space = MeasureSpace::counting(3).unwrap();
        let var = MusielakOrliczFunction::VariableExponent(vec![
            Exponent::Finite(0.5),
            Exponent::Finite(3.0),
            Exponent::Finite(1.0),
        ]);
        let g = MusielakOrliczGauge::new(space.clone(), var).unwrap();
        let meta = g.meta();
        assert_eq!(
            meta.delta,
            Some(DeltaForm {
                below_one: 0.5,
                above_one: Some(3.0)
            })
        );
        assert_eq!(meta.convexity_pair, Some(ConvexityPair::new(1.0, 2.0)));
        let lin = MusielakOrliczGauge::new(
            space,
            MusielakOrliczFunction::Shared(OrliczFunction::power(1.0)),
        )
        .unwrap();
        assert!(lin.meta().homogeneous);
    }

    #[test]
    fn near_origin_examples() {
        let space = MeasureSpace::counting(3).unwrap();
        let q = QuasiNormSpace::lp(2, 1.0).unwrap();
        let m = MusielakOrliczFunction::Shared(OrliczFunction::power(1.0));
        let n = MusielakOrliczFunction::Shared(OrliczFunction::glue(
            1.0,
            OrliczFunction::power(1.0),
            OrliczFunction::power(3.0),
        ));
        let opts = EquivalenceOptions {
            samples: 300,
            seed: 5,
        };
        let report =
            equivalence_near_origin(&m, &n, 1.0, &[0.01, 0.5, 1.0, 2.0], &space, &q, &opts)
                .unwrap();
        assert_eq!((report.u0, report.r0), (1.0, 1.0));
        assert!(report.passed());
        assert!(report.rows[..3]
            .iter()
            .all(|r| r.checked && r.samples == 300));
        assert!(!report.rows[3].checked);

        let same = equivalence_near_origin(&m, &m, 1.0, &[0.5], &space, &q, &opts).unwrap();
        assert!(same.passed());

        let weighted = MeasureSpace::new(vec![0.5, 1.0, 1.0]).unwrap();
        assert_eq!(
            equivalence_near_origin(&m, &n, 1.0, &[0.5], &weighted, &q, &opts),
            Err(OrliczError::NotCounting)
        );
        assert!(matches!(
            equivalence_near_origin(&m, &n, 2.0, &[0.5], &space, &q, &opts),
            Err(OrliczError::Disagree { .. })
        ));
    }

    #[test]
    fn near_origin_requires_positive_infimum() {
        let space = MeasureSpace::counting(1).unwrap();
        let q = QuasiNormSpace::lp(1, 1.0).unwrap();
        // a plateau beyond every probed height
        let m = MusielakOrliczFunction::Shared(OrliczFunction::Plateau { t0: 1e30 });
        assert_eq!(
            equivalence_near_origin(
                &m,
                &m,
                1.0,
                &[0.5],
                &space,
                &q,
                &EquivalenceOptions::default()
            ),
            Err(OrliczError::NoPositiveInfimum)
        );
    }

    #[test]
    fn near_infinity_examples() {
        let space = MeasureSpace::new(vec![0.5, 1.0, 2.0, 0.25]).unwrap();
        let q = QuasiNormSpace::lp(2, 2.0).unwrap();
        let m = MusielakOrliczFunction::Shared(OrliczFunction::power(2.0));
        let n = MusielakOrliczFunction::Shared(OrliczFunction::glue(
            1.0,
            OrliczFunction::Plateau { t0: 0.5 },
            OrliczFunction::power(2.0),
        ));
        let opts = EquivalenceOptions {
            samples: 300,
            seed: 9,
        };
        let report =
            equivalence_near_infinity(&m, &n, 1.0, &[0.1, 1.0, 10.0], &space, &q, &opts).unwrap();
        assert!(report.passed(), "{report:?}");
        for row in &report.rows {
            assert!(row.row.checked);
            assert!(row.u <= 1.0);
            // oracle: ν_N(Ω, u) computed directly
            let nu: f64 = space
                .weights()
                .iter()
                .map(|w| w * n.eval_f64(0, row.u).to_f64())
                .sum();
            assert!(nu < row.row.epsilon / 3.0);
        }
        let same = equivalence_near_infinity(&m, &m, 1.0, &[0.3], &space, &q, &opts).unwrap();
        assert!(same.passed());
    }

    #[test]
    fn l0f_examples() {
        let space = MeasureSpace::counting(2).unwrap();
        let phi = PlusFunction::from_f64s(&[0.5, 0.5]).unwrap();
        let m = l0f_as_musielak(&phi, &OrliczFunction::BoundedRational, &space).unwrap();
        for t in [0.0, 0.5, 1.0, 7.0] {
            assert_eq!(m.eval_f64(1, t), e(0.5 * t / (1.0 + t)));
        }
        let bad_phi = PlusFunction::new(vec![e(0.5), ExtReal::Infinite]);
        assert!(matches!(
            l0f_as_musielak(&bad_phi, &OrliczFunction::BoundedRational, &space),
            Err(OrliczError::InvalidDensity { atom: 1, .. })
        ));
        let zero_phi = PlusFunction::from_f64s(&[0.0, 1.0]).unwrap();
        assert!(l0f_as_musielak(&zero_phi, &OrliczFunction::BoundedRational, &space).is_err());
        assert!(matches!(
            l0f_as_musielak(&phi, &OrliczFunction::power(1.0), &space),
            Err(OrliczError::LimitNotOne(_))
        ));
        let q = QuasiNormSpace::lp(2, 1.0).unwrap();
        let report = l0f_inclusion_check(
            &phi,
            &OrliczFunction::BoundedRational,
            &space,
            &q,
            0.9,
            &EquivalenceOptions {
                samples: 1000,
                seed: 2,
            },
        )
        .unwrap();
        assert!(report.passed(), "{report:?}");
        assert_eq!(report.samples, 1000);
    }

    #[test]
    fn variable_exponent_norm_matches_bisection_of_modular() {
        let space = MeasureSpace::new(vec![0.5, 2.0, 1.0]).unwrap();
        let exps = vec![
            Exponent::Finite(1.0),
            Exponent::Finite(3.0),
            Exponent::Infinite,
        ];
        let m = MusielakOrliczFunction::VariableExponent(exps.clone());
        let mut rng = rng_for(4, "variable-exponent-norm");
        for _ in 0..200 {
            let f = PlusFunction::from_f64s(&[
                log_uniform(&mut rng, -10.0, 10.0),
                log_uniform(&mut rng, -10.0, 10.0),
                log_uniform(&mut rng, -10.0, 10.0),
            ])
            .unwrap();
            let split = variable_exponent_norm(&exps, &space, &f).unwrap().to_f64();
            let direct = infimum_of_upset(
                |l| rho_m(&m, &f.div(l), &space).unwrap() < ExtReal::ONE,
                &SolverParams::default(),
            )
            .unwrap()
            .to_f64();
            assert!(
                (split - direct).abs() <= 1e-9 * direct,
                "{split} vs {direct}"
            );
        }
    }
}
