//! Gauges derived from a base gauge `ρ`.
//!
//! * Luxemburg: `ρ̃(f) = inf { t > 0 : ρ(f/t) < 1 }`, always homogeneous.
//! * Bar: `ρ̄(f) = inf { t > 0 : ρ(f/t) < t }`.
//!
//! Both are computed with [`infimum_of_upset`], whose result is the upper end
//! of the final bracket, so computed values never fall below the true ones.
//! [`relation_report`] checks how the three functionals bound each other in
//! terms of the homogeneity function `Δ` of `ρ`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::gauge::{
    default_delta_grid, delta_at, DeltaForm, Gauge, GaugeError, GaugeMeta, SamplePool,
};
use crate::measure::{ExtReal, MeasureSpace, PlusFunction};
use crate::report::{AxiomOutcome, AxiomReport, Witness};
use crate::rng::{rng_for, Rng};
use crate::sample::{random_plus_function, PlusDraw};
use crate::solver::{infimum_of_upset, SolverError, SolverParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivedKind {
    Luxemburg,
    Bar,
}

impl fmt::Display for DerivedKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DerivedKind::Luxemburg => write!(f, "luxemburg"),
            DerivedKind::Bar => write!(f, "bar"),
        }
    }
}

/// `ρ̃(f)`. Returns `0` for `f = 0`.
pub fn luxemburg_eval(
    base: &dyn Gauge,
    f: &PlusFunction,
    solver: &SolverParams,
) -> Result<ExtReal, SolverError> {
    if f.is_zero() {
        return Ok(ExtReal::ZERO);
    }
    infimum_of_upset(|t| base.eval(&f.div(t)) < ExtReal::ONE, solver)
}

/// `ρ̄(f)`. Returns `0` for `f = 0`.
pub fn bar_eval(
    base: &dyn Gauge,
    f: &PlusFunction,
    solver: &SolverParams,
) -> Result<ExtReal, SolverError> {
    if f.is_zero() {
        return Ok(ExtReal::ZERO);
    }
    infimum_of_upset(|t| base.eval(&f.div(t)) < ExtReal::of(t), solver)
}

/// `ρ̃` or `ρ̄` as a gauge in its own right.
///
/// Evaluation through [`Gauge::eval`] panics if the solver fails, which only
/// happens with bracket expansion disabled or with the monotonicity re-check
/// enabled on an invalid base; use [`DerivedGauge::try_eval`] to handle those.
#[derive(Clone, Debug)]
pub struct DerivedGauge {
    base: Arc<dyn Gauge>,
    kind: DerivedKind,
    solver: SolverParams,
}

impl DerivedGauge {
    pub fn new(base: Arc<dyn Gauge>, kind: DerivedKind) -> DerivedGauge {
        DerivedGauge {
            base,
            kind,
            solver: SolverParams::default(),
        }
    }

    pub fn with_solver(mut self, solver: SolverParams) -> DerivedGauge {
        self.solver = solver;
        self
    }

    pub fn luxemburg(base: Arc<dyn Gauge>) -> DerivedGauge {
        DerivedGauge::new(base, DerivedKind::Luxemburg)
    }

    pub fn bar(base: Arc<dyn Gauge>) -> DerivedGauge {
        DerivedGauge::new(base, DerivedKind::Bar)
    }

    pub fn base(&self) -> &Arc<dyn Gauge> {
        &self.base
    }

    pub fn kind(&self) -> DerivedKind {
        self.kind
    }

    pub fn try_eval(&self, f: &PlusFunction) -> Result<ExtReal, SolverError> {
        match self.kind {
            DerivedKind::Luxemburg => luxemburg_eval(self.base.as_ref(), f, &self.solver),
            DerivedKind::Bar => bar_eval(self.base.as_ref(), f, &self.solver),
        }
    }
}

impl Gauge for DerivedGauge {
    fn space(&self) -> &MeasureSpace {
        self.base.space()
    }

    fn eval(&self, f: &PlusFunction) -> ExtReal {
        self.try_eval(f)
            .unwrap_or_else(|e| panic!("{} evaluation failed: {e}", self.name()))
    }

    fn name(&self) -> String {
        format!("{}({})", self.kind, self.base.name())
    }

    fn meta(&self) -> GaugeMeta {
        match self.kind {
            DerivedKind::Luxemburg => GaugeMeta {
                homogeneous: true,
                delta: Some(DeltaForm::HOMOGENEOUS),
                convexity_pair: None,
            },
            DerivedKind::Bar => GaugeMeta::default(),
        }
    }
}

/// Options for [`relation_report`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationOptions {
    /// Sampled functions; each is checked at every grid point.
    pub samples: usize,
    pub seed: u64,
    /// Values of `t` at which the relations are probed.
    pub grid: Vec<f64>,
    /// Relative slack on conclusions, covering rounding and solver tolerance.
    pub tol: f64,
    pub solver: SolverParams,
}

impl Default for RelationOptions {
    fn default() -> Self {
        RelationOptions {
            samples: 1000,
            seed: 0,
            grid: default_delta_grid(),
            tol: 1e-9,
            solver: SolverParams::default(),
        }
    }
}

/// Where the values of `Δ` used by [`relation_report`] came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaSource {
    ClosedForm,
    Estimated,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelationReport {
    pub report: AxiomReport,
    pub delta_source: DeltaSource,
}

pub const MODULAR_BELOW_DELTA: &str = "modular below delta";
pub const LUXEMBURG_BELOW_T: &str = "luxemburg below t";
pub const TOPOLOGICAL_EQUIVALENCE: &str = "topological equivalence";
pub const BAR_DOMINATES: &str = "bar dominates";
pub const BAR_BELOW_T: &str = "bar below t";

/// `Δ` on a set of points, from the closed form or a sample pool.
struct DeltaTable {
    values: BTreeMap<u64, ExtReal>,
    source: DeltaSource,
}

impl DeltaTable {
    fn build(gauge: &dyn Gauge, points: &[f64], seed: u64) -> Result<DeltaTable, GaugeError> {
        let mut values = BTreeMap::new();
        if let Some(form) = gauge.meta().delta {
            for &t in points {
                values.insert(t.to_bits(), form.eval(t));
            }
            return Ok(DeltaTable {
                values,
                source: DeltaSource::ClosedForm,
            });
        }
        let pool = SamplePool::standard(gauge.space(), seed);
        for &t in points {
            // no admissible sample means no information: treat as unavailable
            let estimate = delta_at(gauge, t, &pool)?
                .estimate
                .unwrap_or(ExtReal::Infinite);
            values.insert(t.to_bits(), estimate);
        }
        Ok(DeltaTable {
            values,
            source: DeltaSource::Estimated,
        })
    }

    /// `Δ(t)` when finite.
    fn get(&self, t: f64) -> Option<f64> {
        self.values.get(&t.to_bits()).and_then(|v| v.finite())
    }
}

/// One sampled function with its three functionals.
struct Probe {
    f: PlusFunction,
    rho: ExtReal,
    lux: ExtReal,
    bar: ExtReal,
}

impl Probe {
    fn witness(&self, description: &str, t: f64) -> Witness {
        Witness::new(description)
            .param("t", t)
            .param("rho", self.rho.to_f64())
            .param("luxemburg", self.lux.to_f64())
            .param("bar", self.bar.to_f64())
            .scalars("f", self.f.to_f64s())
    }
}

/// Multiplier `s` with `ρ(s g)` just below `level`, if one exists.
fn scale_below(
    gauge: &dyn Gauge,
    g: &PlusFunction,
    level: f64,
    solver: &SolverParams,
) -> Option<f64> {
    let target = ExtReal::of(level);
    let exit = infimum_of_upset(|s| gauge.eval(&g.scale(s)) >= target, solver).ok()?;
    let mut s = exit.finite()? * (1.0 - 1e-9);
    for _ in 0..64 {
        if s > 0.0 && gauge.eval(&g.scale(s)) < target {
            return Some(s);
        }
        s /= 2.0;
    }
    None
}

fn draw_base(rng: &mut Rng, n: usize) -> PlusFunction {
    loop {
        let f = random_plus_function(rng, n, PlusDraw::default());
        if !f.is_zero() {
            return f;
        }
    }
}

/// Checks, for `t` on the grid and sampled `f`:
///
/// * modular below delta: `ρ̃(f) < t ⇒ ρ(f) < Δ(t)`;
/// * luxemburg below t: `ρ(f) < 1/Δ(1/t) ⇒ ρ̃(f) < t`;
/// * topological equivalence: with `τ` the largest grid point with
///   `Δ(τ) ≤ t`, `ρ̃(f) < τ ⇒ ρ(f) < t`;
/// * bar dominates: `ρ̄(f) < 1 ⇒ max(ρ(f), ρ̃(f)) ≤ ρ̄(f)`;
/// * bar below t: `ρ(f) < t/Δ(1/t) ⇒ ρ̄(f) < t`.
///
/// Probes where the needed `Δ` value is infinite are counted as skipped.
/// Premises use computed values (over-estimates of the infima); conclusions
/// allow a relative slack of `opts.tol`. Half of the samples are scaled to sit
/// just inside a premise boundary.
pub fn relation_report(
    base: &dyn Gauge,
    opts: &RelationOptions,
) -> Result<RelationReport, GaugeError> {
    let mut points: Vec<f64> = opts.grid.clone();
    points.extend(opts.grid.iter().map(|t| 1.0 / t));
    for &t in &points {
        if !(t > 0.0 && t.is_finite()) {
            return Err(GaugeError::InvalidScale(t));
        }
    }
    let delta = DeltaTable::build(base, &points, opts.seed)?;
    let n = base.space().len();
    let mut rng = rng_for(opts.seed, "relation-report");
    let solver = &opts.solver;
    let up = 1.0 + opts.tol;

    let mut a1 = AxiomOutcome::new(MODULAR_BELOW_DELTA);
    let mut a2 = AxiomOutcome::new(LUXEMBURG_BELOW_T);
    let mut a3 = AxiomOutcome::new(TOPOLOGICAL_EQUIVALENCE);
    let mut b1 = AxiomOutcome::new(BAR_DOMINATES);
    let mut b2 = AxiomOutcome::new(BAR_BELOW_T);

    let mut taus: Vec<(f64, Option<f64>)> = Vec::new();
    for &t in &opts.grid {
        let tau = opts
            .grid
            .iter()
            .copied()
            .filter(|&s| s <= 1.0 && delta.get(s).is_some_and(|d| d <= t))
            .reduce(f64::max);
        taus.push((t, tau));
    }

    let eval = |f: &PlusFunction| -> Result<Probe, GaugeError> {
        let lux = luxemburg_eval(base, f, solver)?;
        let bar = bar_eval(base, f, solver)?;
        Ok(Probe {
            f: f.clone(),
            rho: base.eval(f),
            lux,
            bar,
        })
    };

    let mut probes = vec![eval(&PlusFunction::zeros(n))?];
    for k in 0..opts.samples {
        let g = draw_base(&mut rng, n);
        let f = if k % 2 == 0 {
            g
        } else {
            let t = opts.grid[rng.random_range(0..opts.grid.len())];
            let level = match rng.random_range(0..3) {
                // ρ̃(f) just below t
                0 => {
                    let lux = luxemburg_eval(base, &g, solver)
                        .ok()
                        .and_then(|v| v.finite());
                    match lux {
                        Some(l) if l > 0.0 => {
                            probes.push(eval(&g.scale(t / l * (1.0 - 1e-9)))?);
                            continue;
                        }
                        _ => None,
                    }
                }
                1 => delta.get(1.0 / t).map(|d| 1.0 / d),
                _ => delta.get(1.0 / t).map(|d| t / d),
            };
            match level.and_then(|level| scale_below(base, &g, level, solver)) {
                Some(s) => g.scale(s),
                None => g,
            }
        };
        probes.push(eval(&f)?);
    }

    for p in &probes {
        for &(t, tau) in &taus {
            match delta.get(t) {
                Some(d) => {
                    if p.lux < ExtReal::of(t) {
                        a1.record(p.rho < ExtReal::of(d * up), || {
                            p.witness("ρ̃(f) < t but ρ(f) ≥ Δ(t)", t).param("delta", d)
                        });
                    }
                }
                None => a1.skip(),
            }
            match delta.get(1.0 / t) {
                Some(d) => {
                    if p.rho < ExtReal::of(1.0 / d) {
                        a2.record(p.lux < ExtReal::of(t * up), || {
                            p.witness("ρ(f) < 1/Δ(1/t) but ρ̃(f) ≥ t", t)
                                .param("delta_inv", d)
                        });
                    }
                    if p.rho < ExtReal::of(t / d) {
                        b2.record(p.bar < ExtReal::of(t * up), || {
                            p.witness("ρ(f) < t/Δ(1/t) but ρ̄(f) ≥ t", t)
                                .param("delta_inv", d)
                        });
                    }
                }
                None => {
                    a2.skip();
                    b2.skip();
                }
            }
            match tau {
                Some(tau) => {
                    if p.lux < ExtReal::of(tau) {
                        a3.record(p.rho < ExtReal::of(t * up), || {
                            p.witness("ρ̃(f) < τ but ρ(f) ≥ t", t).param("tau", tau)
                        });
                    }
                }
                None => a3.skip(),
            }
        }
        if p.bar < ExtReal::ONE {
            let bound = p.bar.scale(up);
            b1.record(p.rho <= bound && p.lux <= bound, || {
                p.witness("ρ̄(f) < 1 but max(ρ(f), ρ̃(f)) > ρ̄(f)", p.bar.to_f64())
            });
        }
    }

    let mut report = AxiomReport::new(format!("relations of {}", base.name()));
    for outcome in [a1, a2, a3, b1, b2] {
        let outcome = match delta.source {
            DeltaSource::ClosedForm => outcome,
            DeltaSource::Estimated => outcome.with_note("relative to estimated Δ"),
        };
        report.push(outcome);
    }
    Ok(RelationReport {
        report,
        delta_source: delta.source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orlicz::{MusielakOrliczFunction, MusielakOrliczGauge, OrliczFunction};
    use crate::report::Verdict;

    fn counting(n: usize) -> MeasureSpace {
        MeasureSpace::counting(n).unwrap()
    }

    /// `Σ fᵢ^p` on a counting space.
    fn power_sum(n: usize, p: f64) -> Arc<dyn Gauge> {
        Arc::new(
            MusielakOrliczGauge::new(
                counting(n),
                MusielakOrliczFunction::Shared(OrliczFunction::power(p)),
            )
            .unwrap(),
        )
    }

    fn f(values: &[f64]) -> PlusFunction {
        PlusFunction::from_f64s(values).unwrap()
    }

    #[test]
    fn luxemburg_examples() {
        let solver = SolverParams::default();
        let sq = power_sum(2, 2.0);
        let v = luxemburg_eval(sq.as_ref(), &f(&[3.0, 4.0]), &solver)
            .unwrap()
            .to_f64();
        assert!((v - 5.0).abs() < 1e-12);
        assert_eq!(
            luxemburg_eval(sq.as_ref(), &f(&[0.0, 0.0]), &solver).unwrap(),
            ExtReal::ZERO
        );
        let lin = power_sum(2, 1.0);
        let v = luxemburg_eval(lin.as_ref(), &f(&[0.25, 0.0]), &solver)
            .unwrap()
            .to_f64();
        assert!((v - 0.25).abs() < 1e-13);
    }

    #[test]
    fn bar_examples() {
        let solver = SolverParams::default();
        let lin = power_sum(2, 1.0);
        let v = bar_eval(lin.as_ref(), &f(&[4.0, 0.0]), &solver)
            .unwrap()
            .to_f64();
        assert!((v - 2.0).abs() < 1e-12);
        let v = bar_eval(lin.as_ref(), &f(&[0.25, 0.0]), &solver)
            .unwrap()
            .to_f64();
        assert!((v - 0.5).abs() < 1e-12);
        assert_eq!(
            bar_eval(lin.as_ref(), &f(&[0.0, 0.0]), &solver).unwrap(),
            ExtReal::ZERO
        );
    }

    #[test]
    fn computed_values_are_over_estimates() {
        let lin = power_sum(3, 1.0);
        let g = DerivedGauge::bar(lin.clone());
        let h = f(&[0.3, 1.7, 2.9]);
        let b = g.eval(&h).to_f64();
        // the predicate holds at the returned value
        assert!(lin.eval(&h.div(b)) < ExtReal::of(b));
        assert!(lin.eval(&h.div(b * (1.0 - 1e-9))) >= ExtReal::of(b * (1.0 - 1e-9)));
    }

    #[test]
    fn derived_gauge_names_and_meta() {
        let g = DerivedGauge::luxemburg(power_sum(2, 0.5));
        assert!(g.meta().homogeneous);
        assert!(g.name().starts_with("luxemburg("));
        assert!(!DerivedGauge::bar(power_sum(2, 0.5)).meta().homogeneous);
    }

    #[test]
    fn non_bracketing_is_reported() {
        let solver = SolverParams {
            expand: false,
            ..SolverParams::default()
        };
        let lin = power_sum(1, 1.0);
        assert!(matches!(
            luxemburg_eval(lin.as_ref(), &f(&[1e30]), &solver),
            Err(SolverError::NonBracketing { .. })
        ));
        assert!(DerivedGauge::luxemburg(lin)
            .with_solver(solver)
            .try_eval(&f(&[1e30]))
            .is_err());
    }

    #[test]
    fn relations_hold_for_square_root_modular() {
        let base = power_sum(3, 0.5);
        let opts = RelationOptions {
            samples: 300,
            seed: 3,
            ..RelationOptions::default()
        };
        let rel = relation_report(base.as_ref(), &opts).unwrap();
        assert_eq!(rel.delta_source, DeltaSource::ClosedForm);
        for outcome in &rel.report.outcomes {
            assert_eq!(outcome.verdict, Verdict::Pass, "{outcome:?}");
            assert!(outcome.checked > 0, "{}", outcome.name);
        }
    }

    #[test]
    fn relations_skip_outside_finite_range() {
        // Δ(t) = ∞ for t > 1
        let base: Arc<dyn Gauge> = Arc::new(
            MusielakOrliczGauge::new(
                counting(2),
                MusielakOrliczFunction::Shared(OrliczFunction::ExpPower { p: 1.0 }),
            )
            .unwrap(),
        );
        let opts = RelationOptions {
            samples: 100,
            ..RelationOptions::default()
        };
        let rel = relation_report(base.as_ref(), &opts).unwrap();
        assert!(rel.report.passed());
        let a2 = rel.report.get(LUXEMBURG_BELOW_T).unwrap();
        assert!(a2.skipped > 0 && a2.checked > 0);
    }

    #[test]
    fn bar_dominates_example() {
        let lin = power_sum(2, 1.0);
        let solver = SolverParams::default();
        let h = f(&[0.25, 0.0]);
        let bar = bar_eval(lin.as_ref(), &h, &solver).unwrap().to_f64();
        let lux = luxemburg_eval(lin.as_ref(), &h, &solver).unwrap().to_f64();
        assert!(bar < 1.0);
        assert!(lin.eval(&h).to_f64().max(lux) <= bar);
    }
}
