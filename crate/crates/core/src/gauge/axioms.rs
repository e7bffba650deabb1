//! Sampled verification of the modular axioms.

use rand::Rng as _;
use serde::Serialize;

use super::{ConvexityPair, Gauge};
use crate::measure::{ExtReal, PlusFunction, Subset};
use crate::report::{AxiomOutcome, AxiomReport, Witness};
use crate::rng::{rng_for, Rng};
use crate::sample::{random_nonempty_subset, random_plus_function, random_subset, PlusDraw};

/// Options for [`verify_modular_axioms`].
#[derive(Clone, Debug, PartialEq)]
pub struct ModularOptions {
    pub trials: usize,
    pub seed: u64,
    /// Candidate convexity pairs, tried in order.
    pub pairs: Vec<ConvexityPair>,
    /// `ε` values for the continuity table, as fractions of `μ(E)`.
    pub cm_fractions: Vec<f64>,
    /// Relative slack for inequalities between computed gauge values.
    pub tol: f64,
}

impl Default for ModularOptions {
    fn default() -> Self {
        ModularOptions {
            trials: 500,
            seed: 0,
            pairs: default_pairs(),
            cm_fractions: vec![0.05, 0.1, 0.25, 0.4, 0.5, 0.75, 0.9],
            tol: 1e-12,
        }
    }
}

/// `(k, r)` for `k ∈ {1, 2, 4, 8, 16}`, `r ∈ {1, 2, 4}`, ordered by `k` then `r`.
pub fn default_pairs() -> Vec<ConvexityPair> {
    let mut out = Vec::new();
    for k in [1.0, 2.0, 4.0, 8.0, 16.0] {
        for r in [1.0, 2.0, 4.0] {
            out.push(ConvexityPair::new(k, r));
        }
    }
    out
}

/// Sampled evidence for one candidate pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairEstimate {
    pub pair: ConvexityPair,
    pub holds: bool,
    /// Largest `ρ(f+g) / (ρ(rf) + ρ(rg))`: the least `k` that works with this `r`.
    pub least_k: f64,
}

/// One row of the continuity table: every `A ⊆ E` with `ρ(u_E χ_A) < δ` has `μ(A) ≤ ε`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CmRow {
    pub epsilon: f64,
    /// `∞` when no subset of `E` has measure above `ε`.
    pub delta: f64,
}

/// Continuity data for one set `E`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CmCertificate {
    pub set: Vec<usize>,
    /// `u_E` is the constant `level` on `E`.
    pub level: f64,
    pub exhaustive: bool,
    pub rows: Vec<CmRow>,
}

/// Results of [`verify_modular_axioms`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModularReport {
    pub report: AxiomReport,
    /// First candidate pair that held on every sample.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convexity_pair: Option<ConvexityPair>,
    pub pairs: Vec<PairEstimate>,
    pub continuity: Vec<CmCertificate>,
    /// Largest `ρ(lim fₙ) / lim ρ(fₙ)` over the sampled chains.
    pub fatou_constant: f64,
}

impl ModularReport {
    pub fn passed(&self) -> bool {
        self.report.passed()
    }
}

fn draw(rng: &mut Rng, n: usize) -> PlusFunction {
    let d = PlusDraw {
        lo: -12.0,
        hi: 12.0,
        zero_prob: 0.2,
        infinity_prob: if rng.random_bool(0.1) { 0.2 } else { 0.0 },
    };
    random_plus_function(rng, n, d)
}

fn leq(a: ExtReal, b: ExtReal, tol: f64) -> bool {
    match (a, b) {
        (_, ExtReal::Infinite) => true,
        (ExtReal::Infinite, _) => false,
        (ExtReal::Finite(x), ExtReal::Finite(y)) => x <= y * (1.0 + tol),
    }
}

/// Checks the modular axioms of `gauge` by sampling:
///
/// * monotonicity on ordered pairs `f ≤ g`;
/// * each candidate convexity pair `ρ(f+g) ≤ k(ρ(rf) + ρ(rg))`;
/// * the continuity condition: for every sampled `E` a positive `u_E` with
///   `ρ(u_E) < ∞` and, for each `ε`, a positive `δ` with
///   `ρ(u_E χ_A) < δ ⇒ μ(A) ≤ ε` (exhaustive over `A ⊆ E` up to 20 atoms);
/// * vanishing dilation `ρ(tf) → 0` as `t → 0` when `ρ(f) < ∞`;
/// * the Fatou property along increasing chains;
/// * `ρ(0) = 0`, nondegeneracy on strictly positive functions, and the
///   truncated summability condition.
pub fn verify_modular_axioms(gauge: &dyn Gauge, opts: &ModularOptions) -> ModularReport {
    let n = gauge.space().len();
    let mut report = AxiomReport::new(gauge.name());

    report.push(check_monotone(gauge, opts));

    let (pairs, pair_outcome) = check_pairs(gauge, opts);
    let convexity_pair = pairs.iter().find(|p| p.holds).map(|p| p.pair);
    report.push(pair_outcome);

    let (continuity, cm) = check_continuity(gauge, opts);
    report.push(cm);

    report.push(check_vanishing(gauge, opts));

    let (fatou_constant, fatou) = check_fatou(gauge, opts);
    report.push(fatou);

    let mut zero = AxiomOutcome::new("zero");
    let rz = gauge.eval(&PlusFunction::zeros(n));
    zero.record(rz.is_zero(), || {
        Witness::new("ρ(0) ≠ 0").param("value", rz.to_f64())
    });
    report.push(zero);

    report.push(check_nondegenerate(gauge, opts));
    report.push(check_summable(gauge, opts));

    ModularReport {
        report,
        convexity_pair,
        pairs,
        continuity,
        fatou_constant,
    }
}

fn check_monotone(gauge: &dyn Gauge, opts: &ModularOptions) -> AxiomOutcome {
    let n = gauge.space().len();
    let mut rng = rng_for(opts.seed, "modular/monotone");
    let mut out = AxiomOutcome::new("monotone");
    for trial in 0..opts.trials {
        let f = draw(&mut rng, n);
        let h = draw(&mut rng, n);
        let g = if trial % 2 == 0 { f.add(&h) } else { f.max(&h) };
        let (rf, rg) = (gauge.eval(&f), gauge.eval(&g));
        out.record(leq(rf, rg, opts.tol), || {
            Witness::new("f ≤ g but ρ(f) > ρ(g)")
                .scalars("f", f.to_f64s())
                .scalars("g", g.to_f64s())
                .param("rho_f", rf.to_f64())
                .param("rho_g", rg.to_f64())
        });
    }
    out
}

/// Pairs `(f, g)` stressing the convexity inequality: independent draws,
/// equal functions, disjoint supports, and indicator sweeps across scales.
fn pair_samples(n: usize, trials: usize, seed: u64) -> Vec<(PlusFunction, PlusFunction)> {
    let mut rng = rng_for(seed, "modular/pairs");
    let mut out = Vec::with_capacity(trials + 162);
    for trial in 0..trials {
        let f = draw(&mut rng, n);
        let pair = match trial % 3 {
            0 => (f.clone(), f),
            1 => {
                let s = random_subset(&mut rng, n, 0.5);
                let g = draw(&mut rng, n);
                (f.restrict(&s), g.restrict(&s.complement()))
            }
            _ => (f, draw(&mut rng, n)),
        };
        out.push(pair);
    }
    let a = random_nonempty_subset(&mut rng, n);
    let b = random_nonempty_subset(&mut rng, n);
    for k in -80..=80 {
        let c = ExtReal::of(2f64.powf(k as f64 / 2.0));
        out.push((
            PlusFunction::indicator(&a, c),
            PlusFunction::indicator(&a, c),
        ));
        out.push((
            PlusFunction::indicator(&a, c),
            PlusFunction::indicator(&b, c),
        ));
    }
    out
}

fn check_pairs(gauge: &dyn Gauge, opts: &ModularOptions) -> (Vec<PairEstimate>, AxiomOutcome) {
    let n = gauge.space().len();
    let samples = pair_samples(n, opts.trials, opts.seed);
    let evaluated: Vec<_> = samples
        .iter()
        .map(|(f, g)| (gauge.eval(&f.add(g)), f, g))
        .collect();
    let mut estimates = Vec::new();
    let mut outcome = AxiomOutcome::new("convexity pair");
    let mut chosen = None;
    for &pair in &opts.pairs {
        let mut holds = true;
        let mut least_k: f64 = 0.0;
        let mut witness = None;
        for (lhs, f, g) in &evaluated {
            let rhs = gauge.eval(&f.scale(pair.r)) + gauge.eval(&g.scale(pair.r));
            if let Some(ratio) = lhs.ratio(rhs) {
                least_k = least_k.max(ratio.to_f64());
            }
            if !leq(*lhs, rhs.scale(pair.k), opts.tol) {
                holds = false;
                if witness.is_none() {
                    witness = Some(
                        Witness::new(format!("ρ(f+g) > k(ρ(rf) + ρ(rg)) for (k, r) = {pair}"))
                            .scalars("f", f.to_f64s())
                            .scalars("g", g.to_f64s())
                            .param("lhs", lhs.to_f64())
                            .param("rhs", rhs.scale(pair.k).to_f64()),
                    );
                }
            }
        }
        if holds && chosen.is_none() {
            chosen = Some(pair);
        }
        if !holds && outcome.witness.is_none() {
            outcome.witness = witness;
        }
        estimates.push(PairEstimate {
            pair,
            holds,
            least_k,
        });
    }
    outcome.checked = evaluated.len();
    match chosen {
        Some(p) => {
            outcome.verdict = crate::report::Verdict::Pass;
            outcome.note = format!("smallest passing pair {p}");
            outcome.witness = None;
        }
        None => {
            outcome.verdict = crate::report::Verdict::Fail;
            outcome.note = "no candidate pair held".into();
        }
    }
    (estimates, outcome)
}

/// Largest constant level `c = 2^{-k}` (starting at 1) with `ρ(c χ_E) < ∞`.
fn finite_level(gauge: &dyn Gauge, e: &Subset) -> Option<f64> {
    (0..=1074).map(|k| 2f64.powi(-k)).find(|&c| {
        gauge
            .eval(&PlusFunction::indicator(e, ExtReal::of(c)))
            .is_finite()
    })
}

fn cm_sets(n: usize, rng: &mut Rng) -> Vec<Subset> {
    if n <= 6 {
        (1..(1u64 << n)).map(|m| Subset::from_mask(n, m)).collect()
    } else {
        let mut sets = vec![Subset::full(n)];
        for _ in 0..12 {
            sets.push(random_nonempty_subset(rng, n));
        }
        sets
    }
}

fn check_continuity(
    gauge: &dyn Gauge,
    opts: &ModularOptions,
) -> (Vec<CmCertificate>, AxiomOutcome) {
    let space = gauge.space();
    let n = space.len();
    let mut rng = rng_for(opts.seed, "modular/continuity");
    let mut out = AxiomOutcome::new("continuity in measure");
    let mut certs = Vec::new();
    for e in cm_sets(n, &mut rng) {
        let Some(level) = finite_level(gauge, &e) else {
            out.record(false, || {
                Witness::new("no positive constant on E has finite gauge").set("E", e.to_indices())
            });
            continue;
        };
        let u = ExtReal::of(level);
        let exhaustive = e.count() <= 20;
        let profile: Vec<(f64, ExtReal, Subset)> = if exhaustive {
            e.subsets()
                .map(|a| {
                    let v = gauge.eval(&PlusFunction::indicator(&a, u));
                    (space.measure_of(&a), v, a)
                })
                .collect()
        } else {
            (0..4096)
                .map(|_| {
                    let prob = rng.random_range(0.0..=1.0);
                    let a = random_subset(&mut rng, n, prob).intersection(&e);
                    let v = gauge.eval(&PlusFunction::indicator(&a, u));
                    (space.measure_of(&a), v, a)
                })
                .collect()
        };
        let mu_e = space.measure_of(&e);
        let mut rows = Vec::new();
        for &frac in &opts.cm_fractions {
            let eps = frac * mu_e;
            let heavy = profile.iter().filter(|(m, _, _)| *m > eps);
            let min = heavy.min_by(|a, b| a.1.cmp(&b.1));
            let delta = match min {
                None => f64::INFINITY,
                Some((_, v, a)) => {
                    out.record(!v.is_zero(), || {
                        Witness::new("a set of measure above ε has zero gauge")
                            .set("E", e.to_indices())
                            .set("A", a.to_indices())
                            .param("epsilon", eps)
                            .param("level", level)
                    });
                    v.to_f64() / 2.0
                }
            };
            rows.push(CmRow {
                epsilon: eps,
                delta,
            });
        }
        certs.push(CmCertificate {
            set: e.to_indices(),
            level,
            exhaustive,
            rows,
        });
    }
    (certs, out)
}

fn check_vanishing(gauge: &dyn Gauge, opts: &ModularOptions) -> AxiomOutcome {
    let n = gauge.space().len();
    let mut rng = rng_for(opts.seed, "modular/vanishing");
    let mut out = AxiomOutcome::new("vanishing dilation");
    let trials = (opts.trials / 10).max(10);
    for _ in 0..trials {
        let f = random_plus_function(
            &mut rng,
            n,
            PlusDraw {
                lo: -30.0,
                hi: 30.0,
                ..PlusDraw::default()
            },
        );
        let base = gauge.eval(&f);
        if base.is_infinite() {
            out.skip();
            continue;
        }
        let values: Vec<f64> = (0..=125)
            .map(|k| gauge.eval(&f.scale(2f64.powi(-8 * k))).to_f64())
            .collect();
        let last = *values.last().expect("nonempty");
        let nonincreasing = values.windows(2).all(|w| w[1] <= w[0] * (1.0 + opts.tol));
        let ok = nonincreasing && last <= 1e-9 * base.to_f64().max(1.0);
        out.record(ok, || {
            Witness::new("ρ(tf) does not decrease to zero along t = 2^{-8k}")
                .scalars("f", f.to_f64s())
                .scalars("values", values.clone())
        });
    }
    out
}

/// Limits below this multiple of the first term count as bounded chains.
const DIVERGENCE_FACTOR: f64 = 1e12;

fn check_fatou(gauge: &dyn Gauge, opts: &ModularOptions) -> (f64, AxiomOutcome) {
    let n = gauge.space().len();
    let mut rng = rng_for(opts.seed, "modular/fatou");
    let mut out = AxiomOutcome::new("fatou");
    let mut constant: f64 = 1.0;
    let trials = (opts.trials / 5).max(20);
    for trial in 0..trials {
        let f = draw(&mut rng, n);
        let (first, last, limit) = match trial % 3 {
            0 => (f.scale(0.5), f.scale(1.0 - 2f64.powi(-50)), f.clone()),
            1 => {
                // running maxima of random functions converge after finitely many steps
                let mut m = PlusFunction::zeros(n);
                let first = draw(&mut rng, n);
                m = m.max(&first);
                for _ in 0..8 {
                    m = m.max(&draw(&mut rng, n));
                }
                (first, m.clone(), m)
            }
            _ => {
                let a = random_nonempty_subset(&mut rng, n);
                let base = f.map(|v| v.min(ExtReal::of(1e6)));
                let bump = |c: f64| base.add(&PlusFunction::indicator(&a, ExtReal::of(c)));
                (
                    bump(2.0),
                    bump(2f64.powi(200)),
                    base.add(&PlusFunction::indicator(&a, ExtReal::Infinite)),
                )
            }
        };
        let (r_first, r_last, r_limit) =
            (gauge.eval(&first), gauge.eval(&last), gauge.eval(&limit));
        let ratio = match (r_limit, r_last) {
            (ExtReal::Infinite, ExtReal::Infinite) => 1.0,
            (ExtReal::Infinite, ExtReal::Finite(l)) => {
                if l >= DIVERGENCE_FACTOR * r_first.to_f64().max(1.0) {
                    1.0
                } else {
                    f64::INFINITY
                }
            }
            (ExtReal::Finite(lim), ExtReal::Finite(l)) => {
                if l == 0.0 {
                    if lim == 0.0 {
                        1.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    lim / l
                }
            }
            (ExtReal::Finite(_), ExtReal::Infinite) => 1.0,
        };
        constant = constant.max(ratio);
        out.record(ratio.is_finite(), || {
            Witness::new("ρ(lim fₙ) is infinite while ρ(fₙ) stays bounded")
                .scalars("last", last.to_f64s())
                .scalars("limit", limit.to_f64s())
                .param("rho_last", r_last.to_f64())
        });
    }
    out.estimate = Some(constant);
    (constant, out)
}

fn check_nondegenerate(gauge: &dyn Gauge, opts: &ModularOptions) -> AxiomOutcome {
    let n = gauge.space().len();
    let mut rng = rng_for(opts.seed, "modular/nondegenerate");
    let mut out = AxiomOutcome::new("nondegenerate");
    for _ in 0..(opts.trials / 10).max(10) {
        let f = random_plus_function(
            &mut rng,
            n,
            PlusDraw {
                zero_prob: 0.0,
                ..PlusDraw::default()
            },
        );
        let positive = (-60..=60).any(|k| !gauge.eval(&f.scale(2f64.powi(k))).is_zero());
        out.record(positive, || {
            Witness::new("ρ(tf) = 0 for every sampled t although f > 0 everywhere")
                .scalars("f", f.to_f64s())
        });
    }
    out
}

fn check_summable(gauge: &dyn Gauge, opts: &ModularOptions) -> AxiomOutcome {
    let n = gauge.space().len();
    let mut rng = rng_for(opts.seed, "modular/summable");
    let mut out = AxiomOutcome::new("summable tails");
    for _ in 0..(opts.trials / 20).max(5) {
        let terms: Vec<PlusFunction> = (1..=40)
            .map(|k| {
                let h = random_plus_function(
                    &mut rng,
                    n,
                    PlusDraw {
                        lo: -1.0,
                        hi: 0.0,
                        ..PlusDraw::default()
                    },
                );
                h.scale(2f64.powi(-k))
            })
            .collect();
        let mut tail = PlusFunction::zeros(n);
        let mut tails = Vec::with_capacity(terms.len());
        for t in terms.iter().rev() {
            tail = tail.add(t);
            tails.push(gauge.eval(&tail).to_f64());
        }
        tails.reverse();
        let premise = tails.windows(2).all(|w| w[1] <= w[0] * (1.0 + opts.tol))
            && tails.last().copied().unwrap_or(0.0) <= 1e-6 * tails[0].max(1.0);
        if !premise {
            out.skip();
            continue;
        }
        let finite = tails.iter().all(|v| v.is_finite());
        out.record(finite, || {
            Witness::new("tail gauges vanish but the series diverges")
                .scalars("tails", tails.clone())
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::PowerNormGauge;
    use crate::measure::MeasureSpace;
    use crate::report::Verdict;

    #[test]
    fn norm_passes_all_axioms() {
        let g = PowerNormGauge::new(MeasureSpace::new(vec![0.5, 0.3, 0.2]).unwrap(), 1.0).unwrap();
        let r = verify_modular_axioms(
            &g,
            &ModularOptions {
                trials: 200,
                ..ModularOptions::default()
            },
        );
        assert!(r.passed(), "{:#?}", r.report);
        assert_eq!(r.convexity_pair, Some(ConvexityPair::new(1.0, 1.0)));
        assert!((r.fatou_constant - 1.0).abs() < 1e-9);
        assert_eq!(r.report.verdict("zero"), Some(Verdict::Pass));
    }

    #[test]
    fn quasi_norm_needs_larger_constant() {
        let g = PowerNormGauge::new(MeasureSpace::counting(2).unwrap(), 0.5).unwrap();
        let r = verify_modular_axioms(
            &g,
            &ModularOptions {
                trials: 200,
                ..ModularOptions::default()
            },
        );
        let first = &r.pairs[0];
        assert!(!first.holds);
        assert!(first.least_k > 1.0 && first.least_k <= 2.0 + 1e-12);
        assert_eq!(r.convexity_pair, Some(ConvexityPair::new(1.0, 2.0)));
    }
}
