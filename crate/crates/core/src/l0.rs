//! Convergence in measure: level sets, basic balls and their algebra.
//!
//! For a function `f` into a quasi-normed space the level set at height `t`
//! is `Ω_{f,t} = {ω : ‖f(ω)‖ > t}` (strict). The basic neighbourhoods of zero
//! are `V_{E,δ,t} = {f : μ(E ∩ Ω_{f,t}) < δ}` for a set `E`, a mass `δ > 0`
//! and a height `t > 0`.

use rand::Rng as _;
use serde::Serialize;
use thiserror::Error;

use crate::measure::{MeasureError, MeasureSpace, Subset};
use crate::quasinorm::{QuasiNormError, QuasiNormSpace, VectorFunction};
use crate::report::{AxiomOutcome, AxiomReport, Witness};
use crate::rng::{rng_for, Rng};
use crate::sample::{
    log_uniform, random_nonempty_subset, random_subset, random_vector, random_vector_function,
};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum L0Error {
    #[error("ball parameters must be positive and finite (delta = {delta}, t = {t})")]
    InvalidBall { delta: f64, t: f64 },
    #[error("height {0} must be positive")]
    InvalidHeight(f64),
    #[error("family is not directed to the given set")]
    NotDirected,
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    QuasiNorm(#[from] QuasiNormError),
}

/// Relative margin used when placing sampled values just inside a threshold.
pub const BOUNDARY_MARGIN: f64 = 1e-9;

/// `Ω_{f,t} = {ω : ‖f(ω)‖ > t}`.
pub fn level_set(q: &QuasiNormSpace, f: &VectorFunction, t: f64) -> Result<Subset, L0Error> {
    if !(t > 0.0) {
        return Err(L0Error::InvalidHeight(t));
    }
    if f.atoms() > 0 && f.dim() != q.dim() {
        return Err(QuasiNormError::DimensionMismatch {
            expected: q.dim(),
            found: f.dim(),
        }
        .into());
    }
    Ok(level_set_unchecked(q, f, t))
}

fn level_set_unchecked(q: &QuasiNormSpace, f: &VectorFunction, t: f64) -> Subset {
    Subset::from_predicate(f.atoms(), |i| q.norm(f.row(i)) > t)
}

/// The basic ball `V_{E,δ,t}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct L0Ball {
    pub set: Subset,
    pub delta: f64,
    pub t: f64,
}

impl L0Ball {
    pub fn new(set: Subset, delta: f64, t: f64) -> Result<L0Ball, L0Error> {
        let ok = |x: f64| x > 0.0 && x.is_finite();
        if !(ok(delta) && ok(t)) {
            return Err(L0Error::InvalidBall { delta, t });
        }
        Ok(L0Ball { set, delta, t })
    }

    /// `μ(E ∩ Ω_{f,t})`.
    pub fn mass(&self, space: &MeasureSpace, q: &QuasiNormSpace, f: &VectorFunction) -> f64 {
        space.measure_of(&self.set.intersection(&level_set_unchecked(q, f, self.t)))
    }

    /// Checked membership test.
    pub fn contains(
        &self,
        space: &MeasureSpace,
        q: &QuasiNormSpace,
        f: &VectorFunction,
    ) -> Result<bool, L0Error> {
        f.check(space.len(), q)?;
        space.check_len(self.set.universe())?;
        Ok(self.contains_unchecked(space, q, f))
    }

    pub(crate) fn contains_unchecked(
        &self,
        space: &MeasureSpace,
        q: &QuasiNormSpace,
        f: &VectorFunction,
    ) -> bool {
        self.mass(space, q, f) < self.delta
    }
}

/// Convenience wrapper for [`L0Ball::contains`].
pub fn ball_member(
    space: &MeasureSpace,
    q: &QuasiNormSpace,
    ball: &L0Ball,
    f: &VectorFunction,
) -> Result<bool, L0Error> {
    ball.contains(space, q, f)
}

/// `f · χ_E`.
pub fn restrict(f: &VectorFunction, set: &Subset) -> VectorFunction {
    f.restrict(set)
}

/// A vector of norm `r` along a random direction (or along coordinate `axis`).
pub(crate) fn vector_of_norm(
    rng: &mut Rng,
    q: &QuasiNormSpace,
    r: f64,
    axis: Option<usize>,
) -> Vec<f64> {
    let mut v = match axis {
        Some(i) => {
            let mut e = vec![0.0; q.dim()];
            e[i] = 1.0;
            e
        }
        None => loop {
            let v = random_vector(rng, q.dim());
            if q.norm(&v) > 0.0 {
                break v;
            }
        },
    };
    let n = q.norm(&v);
    for x in &mut v {
        *x *= r / n;
    }
    v
}

/// How sampled ball members place their values below the height.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Placement {
    /// Uniformly random fraction of the height.
    Random,
    /// Just below the height along coordinate `axis`.
    Boundary { axis: usize },
}

/// A random element of `ball`: a small random set of atoms (of `E`-mass below
/// `δ`) carries values above the height, the rest stays at or below it.
pub(crate) fn sample_member(
    rng: &mut Rng,
    space: &MeasureSpace,
    q: &QuasiNormSpace,
    ball: &L0Ball,
    placement: Placement,
    allow_large: bool,
) -> VectorFunction {
    let n = space.len();
    let mut large = if allow_large {
        let prob = rng.random_range(0.0..=0.6);
        random_subset(rng, n, prob)
    } else {
        Subset::empty(n)
    };
    let mut inside: Vec<usize> = large.intersection(&ball.set).to_indices();
    while space.measure_of(&large.intersection(&ball.set)) >= ball.delta {
        let k = rng.random_range(0..inside.len());
        large.remove(inside.swap_remove(k));
    }
    let rows = (0..n)
        .map(|i| {
            if large.contains(i) {
                let r = ball.t * log_uniform(rng, 0.0, 10.0) * (1.0 + 1e-6);
                vector_of_norm(rng, q, r, None)
            } else {
                match placement {
                    Placement::Random => {
                        let r = ball.t * rng.random_range(0.0..=1.0) * (1.0 - BOUNDARY_MARGIN);
                        if r == 0.0 {
                            vec![0.0; q.dim()]
                        } else {
                            vector_of_norm(rng, q, r, None)
                        }
                    }
                    Placement::Boundary { axis } => {
                        vector_of_norm(rng, q, ball.t * (1.0 - BOUNDARY_MARGIN), Some(axis))
                    }
                }
            }
        })
        .collect();
    VectorFunction::new(rows).expect("rows have equal length")
}

fn random_function(rng: &mut Rng, atoms: usize, q: &QuasiNormSpace) -> VectorFunction {
    random_vector_function(rng, atoms, q.dim())
}

fn rows_of(f: &VectorFunction) -> Vec<Vec<f64>> {
    f.rows().to_vec()
}

/// Checks the ball algebra on `space` with values in `q`, using `kappa` as the
/// modulus of concavity. Passing an understated `kappa` is the intended way to
/// see the checks fail.
///
/// Properties, each sampled `trials` times:
/// * level-set dilation: `Ω_{λf,t} = Ω_{f,t/|λ|}`;
/// * union form: `Ω_{f+g,t} ⊆ Ω_{f,t/(2κ)} ∪ Ω_{g,t/(2κ)}`;
/// * Minkowski sum: `V_{E,δ/2,t/(2κ)} + V_{E,δ/2,t/(2κ)} ⊆ V_{E,δ,t}`;
/// * almost inclusion: `μ(A∖E) ≤ ε ⇒ V_{E,δ,t} ⊆ V_{A,δ+ε,t}`;
/// * monotonicity: `δ' ≤ δ, t' ≤ t ⇒ V_{E,δ',t'} ⊆ V_{E,δ,t}`.
pub fn verify_ball_algebra(
    space: &MeasureSpace,
    q: &QuasiNormSpace,
    kappa: f64,
    trials: usize,
    seed: u64,
) -> AxiomReport {
    let n = space.len();
    let mut report = AxiomReport::new(format!("ball algebra ({n} atoms, kappa = {kappa})"));
    let boundary_axes = |rng: &mut Rng| -> (usize, usize) {
        if q.dim() >= 2 {
            let a = rng.random_range(0..q.dim());
            let b = (a + rng.random_range(1..q.dim())) % q.dim();
            (a, b)
        } else {
            (0, 0)
        }
    };

    let mut rng = rng_for(seed, "ball-algebra/dilation");
    let mut dilation = AxiomOutcome::new("level-set dilation");
    for trial in 0..trials {
        let f = random_function(&mut rng, n, q);
        let t = log_uniform(&mut rng, -10.0, 10.0);
        let lambda = if trial % 2 == 0 {
            let k = rng.random_range(-8..=8);
            let s = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            s * 2f64.powi(k)
        } else {
            rng.random_range(-4.0..=4.0)
        };
        if lambda == 0.0 {
            dilation.skip();
            continue;
        }
        let lhs = level_set_unchecked(q, &f.scale(lambda), t);
        let rhs = level_set_unchecked(q, &f, t / lambda.abs());
        dilation.record(lhs == rhs, || {
            Witness::new("level sets of λf at t and f at t/|λ| differ")
                .param("lambda", lambda)
                .param("t", t)
                .vectors("f", rows_of(&f))
                .set("scaled", lhs.to_indices())
                .set("rescaled", rhs.to_indices())
        });
    }
    report.push(dilation);

    let mut rng = rng_for(seed, "ball-algebra/union");
    let mut union = AxiomOutcome::new("union form");
    for trial in 0..trials {
        let t = log_uniform(&mut rng, -10.0, 10.0);
        let small = t / (2.0 * kappa);
        let (f, g) = if trial % 2 == 0 {
            (
                random_function(&mut rng, n, q),
                random_function(&mut rng, n, q),
            )
        } else {
            let (a, b) = boundary_axes(&mut rng);
            let ball = L0Ball {
                set: space.full(),
                delta: f64::MAX,
                t: small,
            };
            let f = sample_member(
                &mut rng,
                space,
                q,
                &ball,
                Placement::Boundary { axis: a },
                true,
            );
            let g = sample_member(
                &mut rng,
                space,
                q,
                &ball,
                Placement::Boundary { axis: b },
                true,
            );
            (f, g)
        };
        let lhs = level_set_unchecked(q, &f.add(&g), t);
        let rhs = level_set_unchecked(q, &f, small).union(&level_set_unchecked(q, &g, small));
        union.record(lhs.is_subset_of(&rhs), || {
            Witness::new("an atom of the level set of f+g lies outside both shrunken level sets")
                .param("t", t)
                .param("kappa", kappa)
                .vectors("f", rows_of(&f))
                .vectors("g", rows_of(&g))
                .set("escaping", lhs.difference(&rhs).to_indices())
        });
    }
    report.push(union);

    let mut rng = rng_for(seed, "ball-algebra/minkowski");
    let mut sum = AxiomOutcome::new("minkowski sum");
    for trial in 0..trials {
        let e = random_nonempty_subset(&mut rng, n);
        let delta = space.measure_of(&e) * rng.random_range(0.05..=1.2);
        let t = log_uniform(&mut rng, -10.0, 10.0);
        let big = L0Ball {
            set: e.clone(),
            delta,
            t,
        };
        let half = L0Ball {
            set: e,
            delta: delta / 2.0,
            t: t / (2.0 * kappa),
        };
        let (f, g) = if trial % 2 == 0 {
            let f = sample_member(&mut rng, space, q, &half, Placement::Random, true);
            let g = sample_member(&mut rng, space, q, &half, Placement::Random, true);
            (f, g)
        } else {
            let (a, b) = boundary_axes(&mut rng);
            let large = rng.random_bool(0.5);
            let f = sample_member(
                &mut rng,
                space,
                q,
                &half,
                Placement::Boundary { axis: a },
                large,
            );
            let g = sample_member(
                &mut rng,
                space,
                q,
                &half,
                Placement::Boundary { axis: b },
                large,
            );
            (f, g)
        };
        debug_assert!(
            half.contains_unchecked(space, q, &f) && half.contains_unchecked(space, q, &g)
        );
        let h = f.add(&g);
        sum.record(big.contains_unchecked(space, q, &h), || {
            Witness::new("f and g lie in the half ball but f+g leaves the ball")
                .param("delta", delta)
                .param("t", t)
                .param("kappa", kappa)
                .param("mass", big.mass(space, q, &h))
                .set("E", big.set.to_indices())
                .vectors("f", rows_of(&f))
                .vectors("g", rows_of(&g))
        });
    }
    report.push(sum);

    let mut rng = rng_for(seed, "ball-algebra/almost-inclusion");
    let mut almost = AxiomOutcome::new("almost inclusion");
    for _ in 0..trials {
        let e = random_subset(&mut rng, n, 0.5);
        let a = random_subset(&mut rng, n, 0.5);
        let eps = space.measure_of(&a.difference(&e));
        let delta = space.total() * rng.random_range(0.01..=1.0);
        let t = log_uniform(&mut rng, -10.0, 10.0);
        let from = L0Ball { set: e, delta, t };
        let to = L0Ball {
            set: a,
            delta: delta + eps,
            t,
        };
        let f = sample_member(&mut rng, space, q, &from, Placement::Random, true);
        almost.record(to.contains_unchecked(space, q, &f), || {
            Witness::new("f lies in the ball over E but not in the enlarged ball over A")
                .param("delta", delta)
                .param("epsilon", eps)
                .param("t", t)
                .set("E", from.set.to_indices())
                .set("A", to.set.to_indices())
                .vectors("f", rows_of(&f))
        });
    }
    report.push(almost);

    let mut rng = rng_for(seed, "ball-algebra/monotonicity");
    let mut mono = AxiomOutcome::new("monotonicity");
    for _ in 0..trials {
        let e = random_subset(&mut rng, n, 0.6);
        let delta = space.total() * rng.random_range(0.01..=1.0);
        let t = log_uniform(&mut rng, -10.0, 10.0);
        let small = L0Ball {
            set: e.clone(),
            delta: delta * rng.random_range(0.01..=1.0),
            t: t * rng.random_range(0.01..=1.0),
        };
        let big = L0Ball { set: e, delta, t };
        let f = sample_member(&mut rng, space, q, &small, Placement::Random, true);
        mono.record(big.contains_unchecked(space, q, &f), || {
            Witness::new("f lies in the smaller ball but not in the larger one")
                .param("small_delta", small.delta)
                .param("small_t", small.t)
                .param("delta", delta)
                .param("t", t)
                .vectors("f", rows_of(&f))
        });
    }
    report.push(mono);
    report
}

/// A finite family of subsets.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SetFamily {
    pub members: Vec<Subset>,
}

impl SetFamily {
    pub fn new(members: Vec<Subset>) -> SetFamily {
        SetFamily { members }
    }

    fn check(&self, n: usize) -> Result<(), L0Error> {
        for m in &self.members {
            if m.universe() != n {
                return Err(MeasureError::LengthMismatch {
                    expected: n,
                    found: m.universe(),
                }
                .into());
            }
        }
        Ok(())
    }

    pub fn union(&self, n: usize) -> Subset {
        self.members
            .iter()
            .fold(Subset::empty(n), |acc, m| acc.union(m))
    }
}

/// Which of the three conditions for "directed to `Ω₀`" hold.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DirectedCheck {
    /// Any two members are contained in a third.
    pub upward: bool,
    /// Every member is contained in `Ω₀`.
    pub contained: bool,
    /// The members cover `Ω₀`.
    pub covering: bool,
}

impl DirectedCheck {
    pub fn holds(&self) -> bool {
        self.upward && self.contained && self.covering
    }
}

/// Checks that `family` is directed to `target`. Since all atoms have positive
/// mass, "up to a null set" reduces to exact inclusion.
pub fn directed_check(
    family: &SetFamily,
    target: &Subset,
    space: &MeasureSpace,
) -> Result<DirectedCheck, L0Error> {
    family.check(space.len())?;
    space.check_len(target.universe())?;
    let m = &family.members;
    let upward = m.iter().all(|a| {
        m.iter().all(|b| {
            let ab = a.union(b);
            m.iter().any(|d| ab.is_subset_of(d))
        })
    });
    let contained = m.iter().all(|a| a.is_subset_of(target));
    let covering = target.is_subset_of(&family.union(space.len()));
    Ok(DirectedCheck {
        upward,
        contained,
        covering,
    })
}

/// True when `family` is directed to `target`.
pub fn is_directed_to(
    family: &SetFamily,
    target: &Subset,
    space: &MeasureSpace,
) -> Result<bool, L0Error> {
    Ok(directed_check(family, target, space)?.holds())
}

/// `first ≺ second`: every member of `first` is contained in some member of `second`.
pub fn precedes(first: &SetFamily, second: &SetFamily) -> bool {
    first
        .members
        .iter()
        .all(|a| second.members.iter().any(|b| a.is_subset_of(b)))
}

/// Finds a nondecreasing chain inside a family directed to the whole space that
/// dominates the family. For finite families the top member suffices.
pub fn metrizability_check(
    family: &SetFamily,
    space: &MeasureSpace,
) -> Result<Vec<Subset>, L0Error> {
    if !is_directed_to(family, &space.full(), space)? {
        return Err(L0Error::NotDirected);
    }
    let top = family
        .members
        .iter()
        .max_by_key(|m| m.count())
        .cloned()
        .ok_or(L0Error::NotDirected)?;
    let chain = vec![top];
    debug_assert!(precedes(family, &SetFamily::new(chain.clone())));
    Ok(chain)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space3() -> MeasureSpace {
        MeasureSpace::new(vec![0.5, 0.3, 0.2]).unwrap()
    }

    #[test]
    fn level_set_examples() {
        let q = QuasiNormSpace::lp(1, 1.0).unwrap();
        let f = VectorFunction::scalar(&[2.0, 0.5, 1.0]);
        assert_eq!(level_set(&q, &f, 1.0).unwrap().to_indices(), vec![0]);
        assert_eq!(level_set(&q, &f, 0.4).unwrap().to_indices(), vec![0, 1, 2]);
        assert!(level_set(&q, &f, 0.0).is_err());
        assert!(level_set(&q, &f, -1.0).is_err());
    }

    #[test]
    fn ball_member_examples() {
        let s = space3();
        let q = QuasiNormSpace::lp(1, 1.0).unwrap();
        let f = VectorFunction::scalar(&[2.0, 0.5, 1.0]);
        let all = s.full();
        // μ(Ω_{f,1}) = 0.5
        assert!(!ball_member(&s, &q, &L0Ball::new(all.clone(), 0.5, 1.0).unwrap(), &f).unwrap());
        assert!(ball_member(&s, &q, &L0Ball::new(all.clone(), 0.51, 1.0).unwrap(), &f).unwrap());
        let e = Subset::from_indices(3, &[1, 2]).unwrap();
        assert!(ball_member(&s, &q, &L0Ball::new(e, 0.01, 1.0).unwrap(), &f).unwrap());
        assert!(L0Ball::new(all.clone(), 0.0, 1.0).is_err());
        assert!(L0Ball::new(all, 1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn ball_algebra_passes_with_true_modulus() {
        let q = QuasiNormSpace::lp(2, 0.5).unwrap();
        let s = MeasureSpace::new(vec![0.25, 0.5, 1.0, 2.0]).unwrap();
        let r = verify_ball_algebra(&s, &q, q.analytic_modulus(), 300, 5);
        assert!(r.passed(), "{r:#?}");
    }

    #[test]
    fn understated_modulus_is_caught() {
        let q = QuasiNormSpace::lp(2, 0.5).unwrap();
        let s = MeasureSpace::counting(3).unwrap();
        let r = verify_ball_algebra(&s, &q, q.analytic_modulus() / 2.0, 300, 5);
        assert_eq!(
            r.verdict("minkowski sum"),
            Some(crate::report::Verdict::Fail)
        );
        assert!(r.get("minkowski sum").unwrap().witness.is_some());
    }

    #[test]
    fn directed_examples() {
        let s = MeasureSpace::counting(2).unwrap();
        let a = Subset::from_indices(2, &[0]).unwrap();
        let b = Subset::from_indices(2, &[1]).unwrap();
        let ab = s.full();
        let f = SetFamily::new(vec![a.clone(), ab.clone()]);
        assert!(is_directed_to(&f, &ab, &s).unwrap());
        let g = SetFamily::new(vec![a.clone(), b]);
        let check = directed_check(&g, &ab, &s).unwrap();
        assert!(!check.upward && check.contained && check.covering);
        let h = SetFamily::new(vec![a.clone()]);
        assert!(!is_directed_to(&h, &ab, &s).unwrap());
        assert!(is_directed_to(&h, &a, &s).unwrap());
    }

    #[test]
    fn precedes_and_chain() {
        let s = MeasureSpace::counting(2).unwrap();
        let a = Subset::from_indices(2, &[0]).unwrap();
        let f = SetFamily::new(vec![a.clone(), s.full()]);
        let chain = metrizability_check(&f, &s).unwrap();
        assert_eq!(chain, vec![s.full()]);
        assert!(precedes(&f, &SetFamily::new(chain)));
        assert!(!precedes(
            &SetFamily::new(vec![s.full()]),
            &SetFamily::new(vec![a.clone()])
        ));
        let bad = SetFamily::new(vec![a]);
        assert_eq!(metrizability_check(&bad, &s), Err(L0Error::NotDirected));
    }

    #[test]
    fn restrict_zeroes_outside() {
        let f = VectorFunction::scalar(&[1.0, 2.0]);
        let e = Subset::from_indices(2, &[1]).unwrap();
        assert_eq!(restrict(&f, &e).rows(), &[vec![0.0], vec![2.0]]);
    }
}
