//! Neighbourhood bases and completeness at desk scale.
//!
//! A family of balls around zero is a local basis of a vector topology when:
//!
//! * intersection: for balls `U`, `V` some ball `B ⊆ U ∩ V`;
//! * sum: for every `U` some `V` with `V + V ⊆ U`;
//! * balanced: for every `U` some `V` with `λV ⊆ U` for all `|λ| ≤ 1`;
//! * separation: for every `x ≠ 0` some `U` with `x ∉ U`;
//! * absorbing: for every `U` and `x` some `ε > 0` with `λx ∈ U` for `|λ| < ε`.
//!
//! [`check_local_basis_axioms`] searches for the required balls by shrinking a
//! proposal and tests every inclusion on sampled members. A sequence of balls
//! is strongly nested when `V_{n+1} + V_{n+1} ⊆ V_n`; for such sequences every
//! series with `x_n ∈ V_n` has its tails in `V_m`, which is what
//! [`series_convergence_test`] and [`increment_convergence_test`] check on
//! truncated series.

use std::fmt;
use std::sync::Arc;

use rand::Rng as _;
use serde::Serialize;
use thiserror::Error;

use crate::gauge::{Gauge, GaugeError};
use crate::l0::{
    sample_member, vector_of_norm, L0Ball, L0Error, Placement, SetFamily, BOUNDARY_MARGIN,
};
use crate::measure::{ExtReal, MeasureSpace, PlusFunction, Subset};
use crate::orlicz::sample_gauge_ball;
use crate::quasinorm::{Exponent, QuasiNormError, QuasiNormSpace, VectorFunction};
use crate::report::{AxiomOutcome, AxiomReport, Witness};
use crate::rng::{rng_for, Rng};
use crate::sample::{random_vector, random_vector_function};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum CompletenessError {
    #[error("modulus of concavity {0} must be at least 1")]
    InvalidModulus(f64),
    #[error("ratio {0} of the epsilon series must lie in (0, 1)")]
    InvalidRatio(f64),
    #[error("depth must be at least 2, found {0}")]
    InvalidDepth(usize),
    #[error("need at least {needed} balls, found {found}")]
    TooFewBalls { needed: usize, found: usize },
    #[error("the sequence is not strongly nested (first failure at index {0})")]
    NotNested(usize),
    #[error("the gauge publishes no finite closed form for Δ({0})")]
    MissingDelta(f64),
    #[error("exhaustive subset search is limited to 20 atoms, found {0}")]
    TooManyAtoms(usize),
    #[error("the set of the ball admits no positive height u_E")]
    NoFiniteHeight,
    #[error(transparent)]
    QuasiNorm(#[from] QuasiNormError),
    #[error(transparent)]
    L0(#[from] L0Error),
    #[error(transparent)]
    Gauge(#[from] GaugeError),
}

/// Serializable description of a ball.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BallDescriptor {
    /// `{x : ‖x‖ ≤ radius}` in `ℓ_p^dim`.
    Lp {
        p: Exponent,
        dim: usize,
        radius: f64,
        closed: bool,
    },
    /// `[0, radius]` on the real line.
    Interval { radius: f64, closed: bool },
    /// `V_{E,δ,t}`.
    L0 {
        set: Vec<usize>,
        delta: f64,
        t: f64,
        closed: bool,
    },
    /// `scale · B_ρ(epsilon)`.
    Gauge {
        gauge: String,
        epsilon: f64,
        scale: f64,
        closed: bool,
    },
}

/// A parametrised family of balls around zero with exact membership and a
/// sampler.
pub trait BallFamily {
    type Point: Clone + fmt::Debug;
    type Ball: Clone + fmt::Debug;

    fn name(&self) -> String;
    fn zero(&self) -> Self::Point;
    fn add(&self, x: &Self::Point, y: &Self::Point) -> Self::Point;
    fn scale(&self, lambda: f64, x: &Self::Point) -> Self::Point;
    fn contains(&self, ball: &Self::Ball, x: &Self::Point) -> bool;

    /// Membership in the closure of `ball`; the same as [`Self::contains`]
    /// for closed balls.
    fn contains_closed(&self, ball: &Self::Ball, x: &Self::Point) -> bool {
        self.contains(ball, x)
    }

    /// A random member of `ball`, just inside its boundary when `boundary`.
    fn sample_member(&self, rng: &mut Rng, ball: &Self::Ball, boundary: bool) -> Self::Point;

    /// Two members of `ball` whose sum is extremal for the family, if the
    /// family knows one.
    fn adversarial_pair(
        &self,
        _rng: &mut Rng,
        _ball: &Self::Ball,
    ) -> Option<(Self::Point, Self::Point)> {
        None
    }

    /// An arbitrary random point.
    fn sample_point(&self, rng: &mut Rng) -> Self::Point;

    /// Points that are always probed.
    fn probe_points(&self) -> Vec<Self::Point> {
        Vec::new()
    }

    fn is_zero(&self, x: &Self::Point) -> bool;

    /// Representative balls to test.
    fn grid(&self) -> Vec<Self::Ball>;

    /// The `k`-th smaller variant of `ball`; `k = 0` returns `ball`.
    fn shrink(&self, ball: &Self::Ball, k: u32) -> Self::Ball;

    /// Proposed ball inside `u ∩ v`.
    fn meet(&self, u: &Self::Ball, v: &Self::Ball) -> Self::Ball;

    /// Proposed `V` with `V + V ⊆ u`.
    fn half(&self, u: &Self::Ball) -> Self::Ball;

    /// Proposed `V` with `λV ⊆ u` for `|λ| ≤ 1`.
    fn balanced(&self, u: &Self::Ball) -> Self::Ball {
        u.clone()
    }

    fn coordinates(&self, x: &Self::Point) -> Vec<Vec<f64>>;
    fn describe(&self, ball: &Self::Ball) -> BallDescriptor;
}

/// Closed `ℓ_p` balls `{‖x‖ ≤ r}`.
#[derive(Clone, Debug)]
pub struct LpBallFamily {
    pub space: QuasiNormSpace,
}

impl LpBallFamily {
    pub fn new(space: QuasiNormSpace) -> LpBallFamily {
        LpBallFamily { space }
    }

    fn kappa(&self) -> f64 {
        self.space.analytic_modulus()
    }
}

impl BallFamily for LpBallFamily {
    type Point = Vec<f64>;
    /// The radius.
    type Ball = f64;

    fn name(&self) -> String {
        format!(
            "closed l{} balls in dimension {}",
            self.space.exponent(),
            self.space.dim()
        )
    }

    fn zero(&self) -> Vec<f64> {
        vec![0.0; self.space.dim()]
    }

    fn add(&self, x: &Vec<f64>, y: &Vec<f64>) -> Vec<f64> {
        x.iter().zip(y).map(|(a, b)| a + b).collect()
    }

    fn scale(&self, lambda: f64, x: &Vec<f64>) -> Vec<f64> {
        x.iter().map(|a| lambda * a).collect()
    }

    fn contains(&self, radius: &f64, x: &Vec<f64>) -> bool {
        self.space.norm(x) <= *radius
    }

    fn sample_member(&self, rng: &mut Rng, radius: &f64, boundary: bool) -> Vec<f64> {
        let r = if boundary {
            radius * (1.0 - BOUNDARY_MARGIN)
        } else {
            radius * rng.random_range(0.0..1.0) * (1.0 - BOUNDARY_MARGIN)
        };
        if r == 0.0 {
            return self.zero();
        }
        let axis =
            (boundary && rng.random_bool(0.5)).then(|| rng.random_range(0..self.space.dim()));
        vector_of_norm(rng, &self.space, r, axis)
    }

    fn adversarial_pair(&self, rng: &mut Rng, radius: &f64) -> Option<(Vec<f64>, Vec<f64>)> {
        let d = self.space.dim();
        if d < 2 || *radius == 0.0 {
            return None;
        }
        let a = rng.random_range(0..d);
        let b = (a + rng.random_range(1..d)) % d;
        let r = radius * (1.0 - BOUNDARY_MARGIN);
        Some((
            vector_of_norm(rng, &self.space, r, Some(a)),
            vector_of_norm(rng, &self.space, r, Some(b)),
        ))
    }

    fn sample_point(&self, rng: &mut Rng) -> Vec<f64> {
        loop {
            let v = random_vector(rng, self.space.dim());
            if !self.is_zero(&v) {
                return v;
            }
        }
    }

    fn is_zero(&self, x: &Vec<f64>) -> bool {
        x.iter().all(|a| *a == 0.0)
    }

    fn grid(&self) -> Vec<f64> {
        vec![8.0, 1.0, 0.125, 1e-6]
    }

    fn shrink(&self, radius: &f64, k: u32) -> f64 {
        radius * 2f64.powi(-(k as i32))
    }

    fn meet(&self, u: &f64, v: &f64) -> f64 {
        u.min(*v)
    }

    fn half(&self, u: &f64) -> f64 {
        u / (2.0 * self.kappa())
    }

    fn coordinates(&self, x: &Vec<f64>) -> Vec<Vec<f64>> {
        vec![x.clone()]
    }

    fn describe(&self, radius: &f64) -> BallDescriptor {
        BallDescriptor::Lp {
            p: self.space.exponent(),
            dim: self.space.dim(),
            radius: *radius,
            closed: true,
        }
    }
}

/// The intervals `[0, ε]` on the real line: a family that is not a local
/// basis, kept as a negative control.
#[derive(Clone, Copy, Debug, Default)]
pub struct IntervalFamily;

impl BallFamily for IntervalFamily {
    type Point = f64;
    type Ball = f64;

    fn name(&self) -> String {
        "intervals [0, r]".into()
    }

    fn zero(&self) -> f64 {
        0.0
    }

    fn add(&self, x: &f64, y: &f64) -> f64 {
        x + y
    }

    fn scale(&self, lambda: f64, x: &f64) -> f64 {
        lambda * x
    }

    fn contains(&self, radius: &f64, x: &f64) -> bool {
        (0.0..=*radius).contains(x)
    }

    fn sample_member(&self, rng: &mut Rng, radius: &f64, boundary: bool) -> f64 {
        if boundary {
            *radius
        } else {
            radius * rng.random_range(0.0..=1.0)
        }
    }

    fn sample_point(&self, rng: &mut Rng) -> f64 {
        let x = rng.random_range(-4.0..4.0);
        if x == 0.0 {
            1.0
        } else {
            x
        }
    }

    fn probe_points(&self) -> Vec<f64> {
        vec![-1.0, 1.0]
    }

    fn is_zero(&self, x: &f64) -> bool {
        *x == 0.0
    }

    fn grid(&self) -> Vec<f64> {
        vec![4.0, 1.0, 0.0625]
    }

    fn shrink(&self, radius: &f64, k: u32) -> f64 {
        radius * 2f64.powi(-(k as i32))
    }

    fn meet(&self, u: &f64, v: &f64) -> f64 {
        u.min(*v)
    }

    fn half(&self, u: &f64) -> f64 {
        u / 2.0
    }

    fn coordinates(&self, x: &f64) -> Vec<Vec<f64>> {
        vec![vec![*x]]
    }

    fn describe(&self, radius: &f64) -> BallDescriptor {
        BallDescriptor::Interval {
            radius: *radius,
            closed: true,
        }
    }
}

/// The balls `V_{E,δ,t}` of convergence in measure with `E` drawn from a
/// family of sets.
#[derive(Clone, Debug)]
pub struct L0BallFamily {
    pub space: MeasureSpace,
    pub q: QuasiNormSpace,
    pub sets: SetFamily,
}

impl L0BallFamily {
    pub fn new(space: MeasureSpace, q: QuasiNormSpace, sets: SetFamily) -> L0BallFamily {
        L0BallFamily { space, q, sets }
    }

    fn axes(&self, rng: &mut Rng) -> (usize, usize) {
        let d = self.q.dim();
        if d >= 2 {
            let a = rng.random_range(0..d);
            (a, (a + rng.random_range(1..d)) % d)
        } else {
            (0, 0)
        }
    }
}

impl BallFamily for L0BallFamily {
    type Point = VectorFunction;
    type Ball = L0Ball;

    fn name(&self) -> String {
        format!(
            "convergence-in-measure balls on {} atoms with l{} values",
            self.space.len(),
            self.q.exponent()
        )
    }

    fn zero(&self) -> VectorFunction {
        VectorFunction::zeros(self.space.len(), self.q.dim())
    }

    fn add(&self, x: &VectorFunction, y: &VectorFunction) -> VectorFunction {
        x.add(y)
    }

    fn scale(&self, lambda: f64, x: &VectorFunction) -> VectorFunction {
        x.scale(lambda)
    }

    fn contains(&self, ball: &L0Ball, x: &VectorFunction) -> bool {
        ball.contains_unchecked(&self.space, &self.q, x)
    }

    /// `μ(E ∩ Ω_{f,t}) ≤ δ`.
    fn contains_closed(&self, ball: &L0Ball, x: &VectorFunction) -> bool {
        ball.mass(&self.space, &self.q, x) <= ball.delta
    }

    fn sample_member(&self, rng: &mut Rng, ball: &L0Ball, boundary: bool) -> VectorFunction {
        let placement = if boundary {
            Placement::Boundary {
                axis: rng.random_range(0..self.q.dim()),
            }
        } else {
            Placement::Random
        };
        sample_member(rng, &self.space, &self.q, ball, placement, true)
    }

    fn adversarial_pair(
        &self,
        rng: &mut Rng,
        ball: &L0Ball,
    ) -> Option<(VectorFunction, VectorFunction)> {
        let (a, b) = self.axes(rng);
        let large = rng.random_bool(0.5);
        let f = sample_member(
            rng,
            &self.space,
            &self.q,
            ball,
            Placement::Boundary { axis: a },
            large,
        );
        let g = sample_member(
            rng,
            &self.space,
            &self.q,
            ball,
            Placement::Boundary { axis: b },
            large,
        );
        Some((f, g))
    }

    fn sample_point(&self, rng: &mut Rng) -> VectorFunction {
        loop {
            let f = random_vector_function(rng, self.space.len(), self.q.dim());
            if !self.is_zero(&f) {
                return f;
            }
        }
    }

    fn is_zero(&self, x: &VectorFunction) -> bool {
        x.rows().iter().all(|r| r.iter().all(|a| *a == 0.0))
    }

    fn grid(&self) -> Vec<L0Ball> {
        let total = self.space.total();
        let mut out = Vec::new();
        for set in self.sets.members.iter().take(4) {
            for (delta, t) in [(total / 2.0, 1.0), (total / 16.0, 1.0 / 16.0)] {
                out.push(L0Ball {
                    set: set.clone(),
                    delta,
                    t,
                });
            }
        }
        out
    }

    fn shrink(&self, ball: &L0Ball, k: u32) -> L0Ball {
        let f = 2f64.powi(-(k as i32));
        L0Ball {
            set: ball.set.clone(),
            delta: ball.delta * f,
            t: ball.t * f,
        }
    }

    /// Uses the smallest member of the set family containing both sets.
    fn meet(&self, u: &L0Ball, v: &L0Ball) -> L0Ball {
        let both = u.set.union(&v.set);
        let set = self
            .sets
            .members
            .iter()
            .filter(|m| both.is_subset_of(m))
            .min_by_key(|m| m.count())
            .cloned()
            .unwrap_or(both);
        L0Ball {
            set,
            delta: u.delta.min(v.delta),
            t: u.t.min(v.t),
        }
    }

    /// `V_{E,δ/2,t/(2κ)}`.
    fn half(&self, u: &L0Ball) -> L0Ball {
        L0Ball {
            set: u.set.clone(),
            delta: u.delta / 2.0,
            t: u.t / (2.0 * self.q.analytic_modulus()),
        }
    }

    fn coordinates(&self, x: &VectorFunction) -> Vec<Vec<f64>> {
        x.rows().to_vec()
    }

    fn describe(&self, ball: &L0Ball) -> BallDescriptor {
        BallDescriptor::L0 {
            set: ball.set.to_indices(),
            delta: ball.delta,
            t: ball.t,
            closed: false,
        }
    }
}

/// The open balls `B_ρ(ε) = {f : ρ(‖f‖) < ε}` of a gauge.
#[derive(Clone, Debug)]
pub struct GaugeBallFamily {
    pub gauge: Arc<dyn Gauge>,
    pub q: QuasiNormSpace,
    /// `k` of a convexity pair `(k, 1)`.
    pub k: f64,
    /// `Δ(κ)` for the modulus `κ` of the value space.
    pub delta_kappa: f64,
}

impl GaugeBallFamily {
    /// Uses the convexity pair and `Δ` closed form published by the gauge: a
    /// pair `(k, r)` gives the pair `(k Δ(r), 1)`.
    pub fn new(
        gauge: Arc<dyn Gauge>,
        q: QuasiNormSpace,
    ) -> Result<GaugeBallFamily, CompletenessError> {
        let meta = gauge.meta();
        let pair = meta
            .convexity_pair
            .ok_or(CompletenessError::MissingDelta(f64::NAN))?;
        let form = meta.delta.ok_or(CompletenessError::MissingDelta(pair.r))?;
        let dr = form
            .eval(pair.r)
            .finite()
            .ok_or(CompletenessError::MissingDelta(pair.r))?;
        let kappa = q.analytic_modulus();
        let delta_kappa = form
            .eval(kappa)
            .finite()
            .ok_or(CompletenessError::MissingDelta(kappa))?;
        Ok(GaugeBallFamily {
            gauge,
            q,
            k: pair.k * dr,
            delta_kappa,
        })
    }

    /// `ε_{n+1} = ε_n / (2 k Δ(κ))`, starting from `epsilon0`.
    pub fn nested_radii(&self, epsilon0: f64, len: usize) -> Vec<f64> {
        let factor = 2.0 * self.k * self.delta_kappa;
        (0..len).map(|n| epsilon0 / factor.powi(n as i32)).collect()
    }
}

impl BallFamily for GaugeBallFamily {
    type Point = VectorFunction;
    type Ball = f64;

    fn name(&self) -> String {
        format!("balls of {}", self.gauge.name())
    }

    fn zero(&self) -> VectorFunction {
        VectorFunction::zeros(self.gauge.space().len(), self.q.dim())
    }

    fn add(&self, x: &VectorFunction, y: &VectorFunction) -> VectorFunction {
        x.add(y)
    }

    fn scale(&self, lambda: f64, x: &VectorFunction) -> VectorFunction {
        x.scale(lambda)
    }

    fn contains(&self, epsilon: &f64, x: &VectorFunction) -> bool {
        self.gauge.eval(&x.pointwise_norm(&self.q)) < ExtReal::of(*epsilon)
    }

    fn contains_closed(&self, epsilon: &f64, x: &VectorFunction) -> bool {
        self.gauge.eval(&x.pointwise_norm(&self.q)) <= ExtReal::of(*epsilon)
    }

    fn sample_member(&self, rng: &mut Rng, epsilon: &f64, _boundary: bool) -> VectorFunction {
        // the gauge sampler already places half of its draws at the boundary
        sample_gauge_ball(rng, self.gauge.as_ref(), &self.q, *epsilon)
            .unwrap_or_else(|| self.zero())
    }

    fn sample_point(&self, rng: &mut Rng) -> VectorFunction {
        loop {
            let f = random_vector_function(rng, self.gauge.space().len(), self.q.dim());
            if !self.is_zero(&f) {
                return f;
            }
        }
    }

    fn is_zero(&self, x: &VectorFunction) -> bool {
        x.rows().iter().all(|r| r.iter().all(|a| *a == 0.0))
    }

    fn grid(&self) -> Vec<f64> {
        vec![4.0, 1.0, 1.0 / 16.0]
    }

    fn shrink(&self, epsilon: &f64, k: u32) -> f64 {
        epsilon * 2f64.powi(-(k as i32))
    }

    fn meet(&self, u: &f64, v: &f64) -> f64 {
        u.min(*v)
    }

    fn half(&self, u: &f64) -> f64 {
        u / (2.0 * self.k * self.delta_kappa)
    }

    fn coordinates(&self, x: &VectorFunction) -> Vec<Vec<f64>> {
        x.rows().to_vec()
    }

    fn describe(&self, epsilon: &f64) -> BallDescriptor {
        BallDescriptor::Gauge {
            gauge: self.gauge.name(),
            epsilon: *epsilon,
            scale: 1.0,
            closed: false,
        }
    }
}

pub const AXIOM_INTERSECTION: &str = "intersection";
pub const AXIOM_SUM: &str = "sum";
pub const AXIOM_BALANCED: &str = "balanced";
pub const AXIOM_SEPARATION: &str = "separation";
pub const AXIOM_ABSORBING: &str = "absorbing";

/// Real scalars of modulus at most one used for the balanced check.
pub const REAL_SCALARS: [f64; 4] = [1.0, -1.0, 0.5, -0.5];

/// Number of shrinking steps tried before giving up on a construction.
pub const SEARCH_DEPTH: u32 = 24;

/// Options for [`check_local_basis_axioms`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LocalBasisOptions {
    /// Sampled members per candidate ball.
    pub trials: usize,
    /// Sampled points for the separation and absorbing axioms.
    pub points: usize,
    pub seed: u64,
}

impl Default for LocalBasisOptions {
    fn default() -> Self {
        LocalBasisOptions {
            trials: 200,
            points: 32,
            seed: 0,
        }
    }
}

/// A ball found by the search, relative to the ball(s) it was built from.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Construction {
    pub axiom: String,
    pub given: Vec<BallDescriptor>,
    pub found: BallDescriptor,
    /// How many times the proposal had to be shrunk.
    pub shrink_steps: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalBasisReport {
    pub family: String,
    pub report: AxiomReport,
    pub constructions: Vec<Construction>,
}

impl LocalBasisReport {
    pub fn passed(&self) -> bool {
        self.report.passed()
    }
}

/// Tries `shrink(proposal, k)` for `k = 0, 1, …` and returns the first
/// candidate on which `test` finds no counterexample, or the counterexample
/// found on the smallest candidate.
fn search<F: BallFamily>(
    fam: &F,
    proposal: &F::Ball,
    mut test: impl FnMut(&F::Ball) -> Option<Witness>,
) -> Result<(F::Ball, u32), Witness> {
    let mut last = None;
    for k in 0..=SEARCH_DEPTH {
        let candidate = fam.shrink(proposal, k);
        match test(&candidate) {
            None => return Ok((candidate, k)),
            Some(w) => last = Some(w.param("shrink_steps", k as f64)),
        }
    }
    Err(last.expect("at least one candidate was tested"))
}

fn members<F: BallFamily>(fam: &F, rng: &mut Rng, ball: &F::Ball, trials: usize) -> Vec<F::Point> {
    let mut out = vec![fam.zero()];
    for i in 0..trials {
        out.push(fam.sample_member(rng, ball, i % 2 == 1));
    }
    out
}

fn pairs<F: BallFamily>(
    fam: &F,
    rng: &mut Rng,
    ball: &F::Ball,
    trials: usize,
) -> Vec<(F::Point, F::Point)> {
    (0..trials)
        .map(|i| match i % 4 {
            0 => (
                fam.sample_member(rng, ball, false),
                fam.sample_member(rng, ball, false),
            ),
            1 => (
                fam.sample_member(rng, ball, true),
                fam.sample_member(rng, ball, true),
            ),
            2 => {
                let x = fam.sample_member(rng, ball, true);
                (x.clone(), x)
            }
            _ => fam.adversarial_pair(rng, ball).unwrap_or_else(|| {
                (
                    fam.sample_member(rng, ball, true),
                    fam.sample_member(rng, ball, true),
                )
            }),
        })
        .collect()
}

/// Checks the five local-basis axioms on the family's grid of balls.
///
/// Every construction starts from the family's proposal (for instance
/// `ε/(2κ)` for the sum axiom) and is shrunk up to [`SEARCH_DEPTH`] times until
/// no sampled member breaks the required inclusion. An axiom fails when some
/// grid ball or point admits no construction; the witness is the
/// counterexample found on the smallest candidate.
pub fn check_local_basis_axioms<F: BallFamily>(
    fam: &F,
    opts: &LocalBasisOptions,
) -> LocalBasisReport {
    let grid = fam.grid();
    let mut constructions = Vec::new();
    let mut note = |axiom: &str, given: Vec<&F::Ball>, found: &F::Ball, steps: u32| {
        constructions.push(Construction {
            axiom: axiom.into(),
            given: given.into_iter().map(|b| fam.describe(b)).collect(),
            found: fam.describe(found),
            shrink_steps: steps,
        });
    };

    let mut rng = rng_for(opts.seed, "local-basis/intersection");
    let mut intersection = AxiomOutcome::new(AXIOM_INTERSECTION);
    for (i, u) in grid.iter().enumerate() {
        for v in &grid[i..] {
            let found = search(fam, &fam.meet(u, v), |b| {
                members(fam, &mut rng, b, opts.trials)
                    .into_iter()
                    .find(|x| !(fam.contains(u, x) && fam.contains(v, x)))
                    .map(|x| {
                        Witness::new("member of the candidate outside U ∩ V")
                            .vectors("x", fam.coordinates(&x))
                    })
            });
            match found {
                Ok((b, steps)) => {
                    intersection.record(true, || unreachable!());
                    note(AXIOM_INTERSECTION, vec![u, v], &b, steps);
                }
                Err(w) => intersection.record(false, || w),
            }
        }
    }

    let mut rng = rng_for(opts.seed, "local-basis/sum");
    let mut sum = AxiomOutcome::new(AXIOM_SUM);
    for u in &grid {
        let found = search(fam, &fam.half(u), |v| {
            pairs(fam, &mut rng, v, opts.trials)
                .into_iter()
                .find(|(x, y)| !fam.contains(u, &fam.add(x, y)))
                .map(|(x, y)| {
                    Witness::new("x, y in V but x + y outside U")
                        .vectors("x", fam.coordinates(&x))
                        .vectors("y", fam.coordinates(&y))
                })
        });
        match found {
            Ok((v, steps)) => {
                sum.record(true, || unreachable!());
                note(AXIOM_SUM, vec![u], &v, steps);
            }
            Err(w) => sum.record(false, || w),
        }
    }

    let mut rng = rng_for(opts.seed, "local-basis/balanced");
    let mut balanced = AxiomOutcome::new(AXIOM_BALANCED);
    for u in &grid {
        let found = search(fam, &fam.balanced(u), |v| {
            for x in members(fam, &mut rng, v, opts.trials) {
                for &lambda in &REAL_SCALARS {
                    if !fam.contains(u, &fam.scale(lambda, &x)) {
                        return Some(
                            Witness::new("x in V but λx outside U")
                                .param("lambda", lambda)
                                .vectors("x", fam.coordinates(&x)),
                        );
                    }
                }
            }
            None
        });
        match found {
            Ok((v, steps)) => {
                balanced.record(true, || unreachable!());
                note(AXIOM_BALANCED, vec![u], &v, steps);
            }
            Err(w) => balanced.record(false, || w),
        }
    }

    let mut rng = rng_for(opts.seed, "local-basis/points");
    let mut points = fam.probe_points();
    for _ in 0..opts.points {
        points.push(fam.sample_point(&mut rng));
    }

    let mut separation = AxiomOutcome::new(AXIOM_SEPARATION);
    for x in points.iter().filter(|x| !fam.is_zero(x)) {
        let found = grid.iter().find_map(|u| {
            (0..=3 * SEARCH_DEPTH)
                .map(|k| fam.shrink(u, k))
                .find(|b| !fam.contains(b, x))
        });
        separation.record(found.is_some(), || {
            Witness::new("no ball excludes the nonzero point x").vectors("x", fam.coordinates(x))
        });
    }

    let mut absorbing = AxiomOutcome::new(AXIOM_ABSORBING);
    for u in &grid {
        for x in &points {
            let mut last = None;
            let mut ok = false;
            for k in 0..=60 {
                let eps = 2f64.powi(-k);
                let mut lambdas = vec![eps * (1.0 - 1e-9), -eps * (1.0 - 1e-9)];
                for _ in 0..4 {
                    let s = eps * rng.random_range(0.0..1.0);
                    lambdas.push(s);
                    lambdas.push(-s);
                }
                match lambdas
                    .into_iter()
                    .find(|&l| !fam.contains(u, &fam.scale(l, x)))
                {
                    None => {
                        ok = true;
                        break;
                    }
                    Some(l) => last = Some((eps, l)),
                }
            }
            absorbing.record(ok, || {
                let (eps, lambda) = last.expect("a failing scalar was recorded");
                Witness::new("λx stays outside U for arbitrarily small |λ|")
                    .param("epsilon", eps)
                    .param("lambda", lambda)
                    .vectors("x", fam.coordinates(x))
                    .vectors("lambda_x", fam.coordinates(&fam.scale(lambda, x)))
            });
        }
    }

    let mut report = AxiomReport::new(format!("local basis: {}", fam.name()));
    for outcome in [intersection, sum, balanced, separation, absorbing] {
        report.push(outcome);
    }
    LocalBasisReport {
        family: fam.name(),
        report,
        constructions,
    }
}

/// Result of [`is_strongly_nested`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NestingReport {
    /// `V_{n+1} + V_{n+1} ⊆ V_n` on every sampled pair.
    pub holds: bool,
    /// `V_{n+1} ⊆ V_n` on every sampled member.
    pub monotone: bool,
    pub checked: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

/// Samples pairs from `V_{n+1}`, including equal and adversarial boundary
/// pairs, and checks that their sums lie in `V_n`.
pub fn is_strongly_nested<F: BallFamily>(
    fam: &F,
    seq: &[F::Ball],
    trials: usize,
    seed: u64,
) -> Result<NestingReport, CompletenessError> {
    if seq.len() < 2 {
        return Err(CompletenessError::TooFewBalls {
            needed: 2,
            found: seq.len(),
        });
    }
    let mut rng = rng_for(seed, "strongly-nested");
    let mut out = NestingReport {
        holds: true,
        monotone: true,
        checked: 0,
        first_failure: None,
        witness: None,
    };
    for n in 0..seq.len() - 1 {
        for (x, y) in pairs(fam, &mut rng, &seq[n + 1], trials) {
            out.checked += 1;
            if !(fam.contains(&seq[n], &x) && fam.contains(&seq[n], &y)) {
                out.monotone = false;
            }
            if !fam.contains(&seq[n], &fam.add(&x, &y)) && out.holds {
                out.holds = false;
                out.first_failure = Some(n);
                out.witness = Some(
                    Witness::new("x, y in V_{n+1} but x + y outside V_n")
                        .param("n", n as f64)
                        .vectors("x", fam.coordinates(&x))
                        .vectors("y", fam.coordinates(&y)),
                );
            }
        }
    }
    Ok(out)
}

/// Result of [`series_convergence_test`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesReport {
    pub depth: usize,
    pub draws: usize,
    pub tail_checks: usize,
    pub tail_violations: usize,
    /// Largest `m` whose tail left `V_m` in some draw.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_violated_index: Option<usize>,
    /// Draws whose full sum left the closure of `V_0`.
    pub sum_violations: usize,
    /// Whether `V_0` is closed or the closure was used for the sum.
    pub closed_variant: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl SeriesReport {
    pub fn passed(&self) -> bool {
        self.tail_violations == 0 && self.sum_violations == 0
    }
}

/// Tails `T_m = Σ_{n=m+1}^{N} x_n`, summed from the far end.
fn tails<F: BallFamily>(fam: &F, terms: &[F::Point]) -> Vec<F::Point> {
    let depth = terms.len() - 1;
    let mut out = vec![fam.zero(); depth + 1];
    for m in (0..depth).rev() {
        out[m] = fam.add(&terms[m + 1], &out[m + 1]);
    }
    out
}

fn require_nested<F: BallFamily>(
    fam: &F,
    seq: &[F::Ball],
    seed: u64,
) -> Result<(), CompletenessError> {
    let nesting = is_strongly_nested(fam, seq, 64, seed)?;
    match nesting.first_failure {
        Some(n) => Err(CompletenessError::NotNested(n)),
        None => Ok(()),
    }
}

/// Draws `x_n ∈ V_n` for `1 ≤ n ≤ N = seq.len() - 1`, and checks that every
/// tail `Σ_{n>m} x_n` with `m ≤ N - 2` lies in `V_m` and that the whole sum
/// lies in the closure of `V_0`. The sequence is first checked to be strongly
/// nested.
pub fn series_convergence_test<F: BallFamily>(
    fam: &F,
    seq: &[F::Ball],
    draws: usize,
    seed: u64,
) -> Result<SeriesReport, CompletenessError> {
    if seq.len() < 3 {
        return Err(CompletenessError::TooFewBalls {
            needed: 3,
            found: seq.len(),
        });
    }
    require_nested(fam, seq, seed)?;
    let depth = seq.len() - 1;
    let mut rng = rng_for(seed, "series-convergence");
    let mut out = SeriesReport {
        depth,
        draws,
        tail_checks: 0,
        tail_violations: 0,
        max_violated_index: None,
        sum_violations: 0,
        closed_variant: true,
        witness: None,
    };
    for draw in 0..draws {
        let mut terms = vec![fam.zero()];
        for ball in &seq[1..] {
            terms.push(if draw == 0 {
                fam.zero()
            } else {
                fam.sample_member(&mut rng, ball, draw % 2 == 1)
            });
        }
        let t = tails(fam, &terms);
        for m in 0..=depth - 2 {
            out.tail_checks += 1;
            if !fam.contains(&seq[m], &t[m]) {
                out.tail_violations += 1;
                out.max_violated_index = Some(out.max_violated_index.map_or(m, |v| v.max(m)));
                if out.witness.is_none() {
                    out.witness = Some(
                        Witness::new("tail of the series outside V_m")
                            .param("m", m as f64)
                            .param("draw", draw as f64)
                            .vectors("tail", fam.coordinates(&t[m])),
                    );
                }
            }
        }
        if !fam.contains_closed(&seq[0], &t[0]) {
            out.sum_violations += 1;
        }
    }
    Ok(out)
}

/// Result of [`increment_convergence_test`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IncrementReport {
    pub depth: usize,
    pub draws: usize,
    pub invariant_checks: usize,
    pub invariant_violations: usize,
    pub limit_violations: usize,
    pub closed_variant: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl IncrementReport {
    pub fn passed(&self) -> bool {
        self.invariant_violations == 0 && self.limit_violations == 0
    }
}

/// Draws `y_1 ∈ V_1` and increments `y_{n+1} - y_n ∈ V_{n+1}`, then checks
/// `y_{n+k} - y_n ∈ V_n` at sampled `(n, k)` and `y_N` in the closure of
/// `V_0`. Differences are formed by summing increments, never by subtracting
/// partial sums. Draw 0 uses zero increments; odd draws place increments
/// at the boundary.
pub fn increment_convergence_test<F: BallFamily>(
    fam: &F,
    seq: &[F::Ball],
    draws: usize,
    seed: u64,
) -> Result<IncrementReport, CompletenessError> {
    if seq.len() < 3 {
        return Err(CompletenessError::TooFewBalls {
            needed: 3,
            found: seq.len(),
        });
    }
    require_nested(fam, seq, seed)?;
    let depth = seq.len() - 1;
    let mut rng = rng_for(seed, "increment-convergence");
    let mut out = IncrementReport {
        depth,
        draws,
        invariant_checks: 0,
        invariant_violations: 0,
        limit_violations: 0,
        closed_variant: true,
        witness: None,
    };
    for draw in 0..draws {
        // increments[n] = y_{n+1} - y_n for n ≥ 1, increments[0] = y_1
        let boundary = draw % 2 == 1;
        let mut increments = vec![fam.sample_member(&mut rng, &seq[1], boundary)];
        for n in 1..depth {
            increments.push(if draw == 0 {
                fam.zero()
            } else {
                fam.sample_member(&mut rng, &seq[n + 1], boundary)
            });
        }
        for _ in 0..depth {
            let n = rng.random_range(1..depth);
            let k = rng.random_range(1..=depth - n);
            let mut diff = fam.zero();
            for i in (n..n + k).rev() {
                diff = fam.add(&increments[i], &diff);
            }
            out.invariant_checks += 1;
            if !fam.contains(&seq[n], &diff) {
                out.invariant_violations += 1;
                if out.witness.is_none() {
                    out.witness = Some(
                        Witness::new("y_{n+k} - y_n outside V_n")
                            .param("n", n as f64)
                            .param("k", k as f64)
                            .vectors("difference", fam.coordinates(&diff)),
                    );
                }
            }
        }
        let mut limit = fam.zero();
        for inc in increments.iter().rev() {
            limit = fam.add(inc, &limit);
        }
        if !fam.contains_closed(&seq[0], &limit) {
            out.limit_violations += 1;
        }
    }
    Ok(out)
}

/// How the masses `ε_n` of a schedule decay.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EpsilonSeries {
    /// `ε_n = ratio^n`.
    Geometric { ratio: f64 },
}

impl Default for EpsilonSeries {
    fn default() -> Self {
        EpsilonSeries::Geometric { ratio: 0.5 }
    }
}

/// Heights `t_n = (2κ)^{-n}`, masses `ε_n` and tails `δ_n = Σ_{j>n} ε_j`,
/// for `0 ≤ n ≤ depth`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NestedSchedule {
    pub kappa: f64,
    pub t: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub delta: Vec<f64>,
}

impl NestedSchedule {
    pub fn depth(&self) -> usize {
        self.t.len() - 1
    }

    /// `V_{E,ε_n,t_n}` for `n = 0..=depth`.
    pub fn l0_balls(&self, set: &Subset) -> Vec<L0Ball> {
        self.t
            .iter()
            .zip(&self.epsilon)
            .map(|(&t, &eps)| L0Ball {
                set: set.clone(),
                delta: eps,
                t,
            })
            .collect()
    }
}

/// Builds the schedule. `δ_n` is the exact tail of the series.
pub fn make_schedule(
    kappa: f64,
    series: EpsilonSeries,
    depth: usize,
) -> Result<NestedSchedule, CompletenessError> {
    if !(kappa >= 1.0 && kappa.is_finite()) {
        return Err(CompletenessError::InvalidModulus(kappa));
    }
    if depth < 2 {
        return Err(CompletenessError::InvalidDepth(depth));
    }
    let EpsilonSeries::Geometric { ratio } = series;
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(CompletenessError::InvalidRatio(ratio));
    }
    let t = (0..=depth)
        .map(|n| (2.0 * kappa).powi(-(n as i32)))
        .collect();
    let epsilon = (0..=depth).map(|n| ratio.powi(n as i32)).collect();
    let delta = (0..=depth)
        .map(|n| ratio.powi(n as i32 + 1) / (1.0 - ratio))
        .collect();
    Ok(NestedSchedule {
        kappa,
        t,
        epsilon,
        delta,
    })
}

/// One truncation index of [`l0_series_sets`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct L0SeriesRow {
    pub j: usize,
    /// Largest `μ(A_j)` over the draws.
    pub max_measure: f64,
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct L0SeriesReport {
    pub depth: usize,
    pub draws: usize,
    pub rows: Vec<L0SeriesRow>,
    pub violations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl L0SeriesReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Draws `f_n ∈ V_{Ω,ε_n,t_n}` for `1 ≤ n ≤ depth` and checks
/// `μ(A_j) < δ_j` for `A_j = ∪_{n>j} Ω_{f_n,t_n}` at every `j < depth`.
pub fn l0_series_sets(
    schedule: &NestedSchedule,
    space: &MeasureSpace,
    q: &QuasiNormSpace,
    draws: usize,
    seed: u64,
) -> L0SeriesReport {
    let depth = schedule.depth();
    let balls = schedule.l0_balls(&space.full());
    let mut rng = rng_for(seed, "l0-series-sets");
    let mut rows: Vec<L0SeriesRow> = (0..depth)
        .map(|j| L0SeriesRow {
            j,
            max_measure: 0.0,
            delta: schedule.delta[j],
        })
        .collect();
    let mut out_violations = 0;
    let mut witness = None;
    for draw in 0..draws {
        let placement = if draw % 2 == 0 {
            Placement::Random
        } else {
            Placement::Boundary {
                axis: rng.random_range(0..q.dim()),
            }
        };
        let levels: Vec<Subset> = (1..=depth)
            .map(|n| {
                let f = sample_member(&mut rng, space, q, &balls[n], placement, true);
                Subset::from_predicate(space.len(), |i| q.norm(f.row(i)) > schedule.t[n])
            })
            .collect();
        let mut a = Subset::empty(space.len());
        for j in (0..depth).rev() {
            // levels[j] is the level set of f_{j+1}
            a = a.union(&levels[j]);
            let measure = space.measure_of(&a);
            rows[j].max_measure = rows[j].max_measure.max(measure);
            if measure >= schedule.delta[j] {
                out_violations += 1;
                if witness.is_none() {
                    witness = Some(
                        Witness::new("μ(A_j) ≥ δ_j")
                            .param("j", j as f64)
                            .param("measure", measure)
                            .param("delta", schedule.delta[j])
                            .set("A_j", a.to_indices()),
                    );
                }
            }
        }
    }
    L0SeriesReport {
        depth,
        draws,
        rows,
        violations: out_violations,
        witness,
    }
}

/// One truncation index of [`gauge_series_tail_test`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GaugeTailRow {
    pub k: usize,
    /// Largest `ρ(Σ_{n≥k} κⁿ ‖f_n‖) / (F δ_k)` over the draws.
    pub max_ratio: f64,
    /// Largest `ρ(‖Σ_{n≥k} f_n‖) / (F δ_k)` over the draws.
    pub max_vector_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GaugeTailReport {
    pub depth: usize,
    pub draws: usize,
    /// `k` of the convexity pair `(k, 1)` used.
    pub pair_k: f64,
    pub kappa: f64,
    pub epsilon: Vec<f64>,
    pub rows: Vec<GaugeTailRow>,
    pub violations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl GaugeTailReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Relative slack of the gauge tail bound.
pub const TAIL_TOL: f64 = 1e-9;

/// The completeness schedule for a gauge with convexity pair `(k, 1)` and
/// Fatou constant `fatou`, with values in `q` of modulus `κ`:
/// `t_n = 2^{-n}`, `δ_k = Σ_{n≥k} t_n`, `ε_n = k^{-n} Δ(κⁿ)^{-1} t_n`.
/// Draws `f_n ∈ B_ρ(ε_n)` and checks, for every `k`,
/// `ρ(Σ_{n=k}^N κⁿ ‖f_n‖) ≤ F δ_k` and `ρ(‖Σ_{n=k}^N f_n‖) ≤ F δ_k`,
/// within a relative `10⁻⁹`.
pub fn gauge_series_tail_test(
    family: &GaugeBallFamily,
    fatou: f64,
    depth: usize,
    draws: usize,
    seed: u64,
) -> Result<GaugeTailReport, CompletenessError> {
    if depth < 2 {
        return Err(CompletenessError::InvalidDepth(depth));
    }
    let gauge = family.gauge.as_ref();
    let q = &family.q;
    let kappa = q.analytic_modulus();
    let form = gauge
        .meta()
        .delta
        .ok_or(CompletenessError::MissingDelta(kappa))?;
    let k = family.k;
    let t: Vec<f64> = (0..=depth).map(|n| 2f64.powi(-(n as i32))).collect();
    let delta: Vec<f64> = (0..=depth).map(|n| 2f64.powi(1 - n as i32)).collect();
    let mut epsilon = vec![0.0];
    for n in 1..=depth {
        let kn = kappa.powi(n as i32);
        let d = form
            .eval(kn)
            .finite()
            .ok_or(CompletenessError::MissingDelta(kn))?;
        epsilon.push(t[n] / (k.powi(n as i32) * d));
    }
    let n_atoms = gauge.space().len();
    let mut rng = rng_for(seed, "gauge-series-tail");
    let mut rows: Vec<GaugeTailRow> = (1..=depth)
        .map(|k| GaugeTailRow {
            k,
            max_ratio: 0.0,
            max_vector_ratio: 0.0,
        })
        .collect();
    let mut violations = 0;
    let mut witness = None;
    for _ in 0..draws {
        let terms: Vec<VectorFunction> = (1..=depth)
            .map(|n| {
                sample_gauge_ball(&mut rng, gauge, q, epsilon[n])
                    .unwrap_or_else(|| VectorFunction::zeros(n_atoms, q.dim()))
            })
            .collect();
        let mut scalar_tail = PlusFunction::zeros(n_atoms);
        let mut vector_tail = VectorFunction::zeros(n_atoms, q.dim());
        for n in (1..=depth).rev() {
            let f = &terms[n - 1];
            scalar_tail = f
                .pointwise_norm(q)
                .scale(kappa.powi(n as i32))
                .add(&scalar_tail);
            vector_tail = f.add(&vector_tail);
            let bound = fatou * delta[n];
            let lhs = gauge.eval(&scalar_tail).to_f64();
            let lhs_vector = gauge.eval(&vector_tail.pointwise_norm(q)).to_f64();
            let row = &mut rows[n - 1];
            row.max_ratio = row.max_ratio.max(lhs / bound);
            row.max_vector_ratio = row.max_vector_ratio.max(lhs_vector / bound);
            let limit = bound * (1.0 + TAIL_TOL);
            if lhs > limit || lhs_vector > limit {
                violations += 1;
                if witness.is_none() {
                    witness = Some(
                        Witness::new("gauge of the series tail exceeds F δ_k")
                            .param("k", n as f64)
                            .param("scalar_tail", lhs)
                            .param("vector_tail", lhs_vector)
                            .param("bound", bound),
                    );
                }
            }
        }
    }
    Ok(GaugeTailReport {
        depth,
        draws,
        pair_k: k,
        kappa,
        epsilon,
        rows,
        violations,
        witness,
    })
}

/// Result of [`gauge_to_l0_inclusion`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InclusionReport {
    /// `u_E`: the largest `2^{-k}` with `ρ(u_E χ_E) < ∞`.
    pub height: f64,
    /// `ε` with `A ⊆ E, ρ(u_E χ_A) < ε ⇒ μ(A) < δ`.
    pub epsilon: f64,
    pub scale: f64,
    pub samples: usize,
    pub violations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl InclusionReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Checks `(t/u_E) B_ρ(ε) ⊆ V_{E,δ,t}` on sampled members, with `ε` the least
/// `ρ(u_E χ_A)` over subsets `A ⊆ E` with `μ(A) ≥ δ` (exhaustive; `1` when
/// no such `A` exists). Membership in the L0 ball is exact.
pub fn gauge_to_l0_inclusion(
    gauge: &dyn Gauge,
    q: &QuasiNormSpace,
    ball: &L0Ball,
    samples: usize,
    seed: u64,
) -> Result<InclusionReport, CompletenessError> {
    let space = gauge.space();
    if ball.set.count() > 20 {
        return Err(CompletenessError::TooManyAtoms(ball.set.count()));
    }
    let height = (0..=1074)
        .map(|k| 2f64.powi(-k))
        .take_while(|u| *u > 0.0)
        .find(|&u| {
            gauge
                .eval(&PlusFunction::indicator(&ball.set, ExtReal::of(u)))
                .is_finite()
        })
        .ok_or(CompletenessError::NoFiniteHeight)?;
    let epsilon = ball
        .set
        .subsets()
        .filter(|a| space.measure_of(a) >= ball.delta)
        .map(|a| gauge.eval(&PlusFunction::indicator(&a, ExtReal::of(height))))
        .min()
        .map_or(1.0, |e| e.to_f64().min(1.0));
    let scale = ball.t / height;
    let mut out = InclusionReport {
        height,
        epsilon,
        scale,
        samples: 0,
        violations: 0,
        witness: None,
    };
    if epsilon == 0.0 {
        out.violations = 1;
        out.witness = Some(Witness::new(
            "a subset of E with μ(A) ≥ δ has ρ(u_E χ_A) = 0",
        ));
        return Ok(out);
    }
    let mut rng = rng_for(seed, "gauge-to-l0");
    while out.samples < samples {
        let Some(g) = sample_gauge_ball(&mut rng, gauge, q, epsilon) else {
            continue;
        };
        out.samples += 1;
        let f = g.scale(scale);
        if !ball.contains_unchecked(space, q, &f) {
            out.violations += 1;
            if out.witness.is_none() {
                out.witness = Some(
                    Witness::new("member of (t/u_E) B_ρ(ε) outside V_{E,δ,t}")
                        .param("mass", ball.mass(space, q, &f))
                        .vectors("f", f.rows().to_vec()),
                );
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orlicz::{MusielakOrliczFunction, MusielakOrliczGauge, OrliczFunction};
    use crate::report::Verdict;

    fn lp(dim: usize, p: f64) -> LpBallFamily {
        LpBallFamily::new(QuasiNormSpace::lp(dim, p).unwrap())
    }

    #[test]
    fn lp_balls_form_a_local_basis() {
        let fam = lp(2, 0.5);
        let report = check_local_basis_axioms(&fam, &LocalBasisOptions::default());
        assert!(
            report.passed(),
            "{:?}",
            report.report.failures().collect::<Vec<_>>()
        );
        // the sum construction is ε/(2κ) without shrinking
        let sum = report
            .constructions
            .iter()
            .find(|c| c.axiom == AXIOM_SUM)
            .unwrap();
        assert_eq!(sum.shrink_steps, 0);
        assert!(matches!(sum.found, BallDescriptor::Lp { radius, .. } if radius == 8.0 / 4.0));
    }

    #[test]
    fn intervals_fail_balanced_and_absorbing() {
        let report = check_local_basis_axioms(&IntervalFamily, &LocalBasisOptions::default());
        let r = &report.report;
        assert_eq!(r.verdict(AXIOM_INTERSECTION), Some(Verdict::Pass));
        assert_eq!(r.verdict(AXIOM_SUM), Some(Verdict::Pass));
        assert_eq!(r.verdict(AXIOM_SEPARATION), Some(Verdict::Pass));
        assert_eq!(r.verdict(AXIOM_BALANCED), Some(Verdict::Fail));
        assert_eq!(r.verdict(AXIOM_ABSORBING), Some(Verdict::Fail));
        let w = r.get(AXIOM_ABSORBING).unwrap().witness.as_ref().unwrap();
        let x = w.vectors["x"][0][0];
        let lambda = w.params["lambda"];
        assert!(lambda * x < 0.0);
        assert!(
            r.get(AXIOM_BALANCED)
                .unwrap()
                .witness
                .as_ref()
                .unwrap()
                .params["lambda"]
                < 0.0
        );
    }

    #[test]
    fn l0_balls_form_a_local_basis() {
        let space = MeasureSpace::new(vec![0.5, 1.0, 0.25, 2.0]).unwrap();
        let q = QuasiNormSpace::lp(2, 0.5).unwrap();
        let n = space.len();
        let sets = SetFamily::new(vec![
            Subset::from_indices(n, &[0, 1]).unwrap(),
            Subset::from_indices(n, &[0, 1, 2]).unwrap(),
            space.full(),
        ]);
        let fam = L0BallFamily::new(space, q, sets);
        let report = check_local_basis_axioms(
            &fam,
            &LocalBasisOptions {
                trials: 100,
                points: 16,
                seed: 3,
            },
        );
        assert!(
            report.passed(),
            "{:?}",
            report.report.failures().collect::<Vec<_>>()
        );
        assert!(report
            .constructions
            .iter()
            .filter(|c| c.axiom == AXIOM_SUM)
            .all(|c| c.shrink_steps == 0));
    }

    #[test]
    fn strong_nesting_examples() {
        let fam = lp(2, 0.5);
        let good: Vec<f64> = (0..12).map(|n| 4f64.powi(-n)).collect();
        assert!(is_strongly_nested(&fam, &good, 200, 1).unwrap().holds);
        let bad: Vec<f64> = (0..12).map(|n| 2f64.powi(-n)).collect();
        let report = is_strongly_nested(&fam, &bad, 200, 1).unwrap();
        assert!(!report.holds);
        assert!(report.monotone);
        assert_eq!(report.first_failure, Some(0));
        let zero = vec![0.0; 5];
        assert!(is_strongly_nested(&fam, &zero, 50, 1).unwrap().holds);
        assert!(is_strongly_nested(&fam, &[1.0], 10, 1).is_err());
    }

    #[test]
    fn series_examples() {
        let fam = lp(2, 0.5);
        let seq: Vec<f64> = (0..=40).map(|n| 4f64.powi(-n)).collect();
        let report = series_convergence_test(&fam, &seq, 100, 7).unwrap();
        assert!(report.passed(), "{report:?}");
        assert_eq!(report.tail_checks, 100 * 39);
        let bad: Vec<f64> = (0..=40).map(|n| 2f64.powi(-n)).collect();
        assert!(matches!(
            series_convergence_test(&fam, &bad, 10, 7),
            Err(CompletenessError::NotNested(_))
        ));
    }

    #[test]
    fn increment_examples() {
        let fam = lp(3, 1.0);
        let seq: Vec<f64> = (0..=30).map(|n| 2f64.powi(-n)).collect();
        let report = increment_convergence_test(&fam, &seq, 50, 2).unwrap();
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn schedule_examples() {
        let s = make_schedule(1.0, EpsilonSeries::default(), 10).unwrap();
        assert_eq!(s.t[3], 0.125);
        assert_eq!(s.delta, s.epsilon);
        let s = make_schedule(2.0, EpsilonSeries::default(), 10).unwrap();
        assert_eq!(s.t[2], 1.0 / 16.0);
        assert!(make_schedule(0.5, EpsilonSeries::default(), 10).is_err());
        assert!(make_schedule(1.0, EpsilonSeries::Geometric { ratio: 1.0 }, 10).is_err());
    }

    #[test]
    fn l0_series_examples() {
        let space = MeasureSpace::new((1..=10).map(|i| i as f64 / 10.0).collect()).unwrap();
        let q = QuasiNormSpace::lp(2, 0.5).unwrap();
        let schedule = make_schedule(q.analytic_modulus(), EpsilonSeries::default(), 40).unwrap();
        let fam = L0BallFamily::new(space.clone(), q.clone(), SetFamily::new(vec![space.full()]));
        let balls = schedule.l0_balls(&space.full());
        assert!(is_strongly_nested(&fam, &balls, 100, 4).unwrap().holds);
        let series = series_convergence_test(&fam, &balls, 50, 4).unwrap();
        assert!(series.passed(), "{series:?}");
        let report = l0_series_sets(&schedule, &space, &q, 100, 4);
        assert!(report.passed(), "{report:?}");
        assert_eq!(report.rows.len(), 40);
    }

    fn power_gauge(n: usize, p: f64) -> Arc<dyn Gauge> {
        Arc::new(
            MusielakOrliczGauge::new(
                MeasureSpace::new((0..n).map(|i| 0.5 + i as f64).collect()).unwrap(),
                MusielakOrliczFunction::Shared(OrliczFunction::power(p)),
            )
            .unwrap(),
        )
    }

    #[test]
    fn gauge_balls_nest_and_series_tails_are_bounded() {
        let q = QuasiNormSpace::lp(2, 0.5).unwrap();
        let fam = GaugeBallFamily::new(power_gauge(3, 2.0), q).unwrap();
        // (1, 2) with Δ(2) = 4 gives k = 4; Δ(κ) = Δ(2) = 4
        assert_eq!((fam.k, fam.delta_kappa), (4.0, 4.0));
        let radii = fam.nested_radii(1.0, 6);
        assert!(is_strongly_nested(&fam, &radii, 100, 5).unwrap().holds);
        let report = gauge_series_tail_test(&fam, 1.0, 12, 20, 5).unwrap();
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn gauge_balls_form_a_local_basis() {
        let q = QuasiNormSpace::lp(2, 1.0).unwrap();
        let fam = GaugeBallFamily::new(power_gauge(2, 1.0), q).unwrap();
        let report = check_local_basis_axioms(
            &fam,
            &LocalBasisOptions {
                trials: 40,
                points: 8,
                seed: 1,
            },
        );
        assert!(
            report.passed(),
            "{:?}",
            report.report.failures().collect::<Vec<_>>()
        );
    }

    #[test]
    fn gauge_balls_scale_into_l0_balls() {
        let g = power_gauge(4, 2.0);
        let q = QuasiNormSpace::lp(2, 2.0).unwrap();
        let space = g.space().clone();
        let ball = L0Ball::new(Subset::from_indices(4, &[1, 2, 3]).unwrap(), 1.0, 0.5).unwrap();
        let report = gauge_to_l0_inclusion(g.as_ref(), &q, &ball, 500, 6).unwrap();
        assert!(report.passed(), "{report:?}");
        assert_eq!(report.height, 1.0);
        // oracle: the lightest subset of E with μ(A) ≥ 1 is {1} (weight 1.5)
        assert_eq!(report.epsilon, 1.0_f64.min(space.weight(1)));
    }
}
