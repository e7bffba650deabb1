//! Finite-dimensional quasi-normed value spaces and functions into them.
//!
//! The shipped spaces are `ℓ_p^d` and weighted `ℓ_p^d` for `p ∈ (0, ∞]`.
//! Their modulus of concavity (the least `κ` with
//! `‖x + y‖ ≤ κ(‖x‖ + ‖y‖)`) is known in closed form, which lets the sampled
//! estimate be checked against it.

use std::fmt;

use rand::Rng as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::measure::{ExtReal, MeasureError, PlusFunction, Subset};
use crate::rng::rng_for;
use crate::sample::random_vector;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum QuasiNormError {
    #[error("exponent {0} must be positive (use inf for the supremum norm)")]
    InvalidExponent(f64),
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("weight {index} is {value}; weights must be positive and finite")]
    InvalidWeight { index: usize, value: f64 },
    #[error("vector has length {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("modulus {0} must be a finite number ≥ 1")]
    InvalidModulus(f64),
    #[error("envelope exponent {0} must lie in (0, 1]")]
    InvalidEnvelopeExponent(f64),
    #[error("decomposition depth {0} must lie in 1..=8")]
    InvalidDepth(usize),
    #[error("supplied decomposition does not sum to the vector")]
    BadDecomposition,
    #[error("vector-valued function has rows of different lengths")]
    RaggedFunction,
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// An exponent in `(0, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Exponent, QuasiNormError> {
        if p.is_nan() || p <= 0.0 {
            Err(QuasiNormError::InvalidExponent(p))
        } else if p.is_infinite() {
            Ok(Exponent::Infinite)
        } else {
            Ok(Exponent::Finite(p))
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Exponent::Finite(_))
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.value())
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let p = f64::deserialize(d)?;
        Exponent::new(p).map_err(serde::de::Error::custom)
    }
}

/// `ℓ_p^d`, optionally with positive coordinate weights:
/// `‖x‖ = (Σ wᵢ |xᵢ|^p)^{1/p}`, and `max |xᵢ|` for `p = ∞`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuasiNormSpace {
    dim: usize,
    p: Exponent,
    #[serde(skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
}

impl QuasiNormSpace {
    pub fn lp(dim: usize, p: f64) -> Result<QuasiNormSpace, QuasiNormError> {
        if dim == 0 {
            return Err(QuasiNormError::ZeroDimension);
        }
        Ok(QuasiNormSpace {
            dim,
            p: Exponent::new(p)?,
            weights: None,
        })
    }

    pub fn weighted_lp(p: f64, weights: Vec<f64>) -> Result<QuasiNormSpace, QuasiNormError> {
        if weights.is_empty() {
            return Err(QuasiNormError::ZeroDimension);
        }
        for (index, &value) in weights.iter().enumerate() {
            if !(value > 0.0 && value.is_finite()) {
                return Err(QuasiNormError::InvalidWeight { index, value });
            }
        }
        Ok(QuasiNormSpace {
            dim: weights.len(),
            p: Exponent::new(p)?,
            weights: Some(weights),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn exponent(&self) -> Exponent {
        self.p
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    /// Checked evaluation of the quasi-norm.
    pub fn eval(&self, x: &[f64]) -> Result<f64, QuasiNormError> {
        if x.len() != self.dim {
            return Err(QuasiNormError::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(self.norm(x))
    }

    /// Evaluation without the dimension check.
    pub fn norm(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        let p = match self.p {
            Exponent::Infinite => return x.iter().fold(0.0, |m, v| m.max(v.abs())),
            Exponent::Finite(p) => p,
        };
        let weight = |i: usize| self.weights.as_ref().map_or(1.0, |w| w[i]);
        if p == 1.0 {
            return x.iter().enumerate().map(|(i, v)| weight(i) * v.abs()).sum();
        }
        if p == 2.0 {
            let s: f64 = x.iter().enumerate().map(|(i, v)| weight(i) * v * v).sum();
            return s.sqrt();
        }
        let s: f64 = x
            .iter()
            .enumerate()
            .map(|(i, v)| weight(i) * v.abs().powf(p))
            .sum();
        s.powf(1.0 / p)
    }

    /// Closed-form modulus of concavity: `2^{1/p − 1}` for `p < 1` and
    /// dimension at least 2, otherwise `1`.
    pub fn analytic_modulus(&self) -> f64 {
        match self.p {
            Exponent::Finite(p) if p < 1.0 && self.dim >= 2 => 2f64.powf(1.0 / p - 1.0),
            _ => 1.0,
        }
    }

    /// The unit vector along coordinate `i`, rescaled to norm one.
    fn unit(&self, i: usize) -> Vec<f64> {
        let mut e = vec![0.0; self.dim];
        e[i] = match (self.p, &self.weights) {
            (Exponent::Finite(p), Some(w)) => w[i].powf(-1.0 / p),
            _ => 1.0,
        };
        e
    }
}

/// Sampled and closed-form modulus of concavity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModulusEstimate {
    /// Largest sampled `‖x + y‖ / (‖x‖ + ‖y‖)`.
    pub sampled: f64,
    pub analytic: f64,
    pub samples: usize,
    /// The pair attaining `sampled`.
    pub extremal_pair: (Vec<f64>, Vec<f64>),
}

/// Estimates the modulus of concavity by sampling pairs.
///
/// Besides `trials` random pairs the pool contains every pair of disjointly
/// supported unit vectors, which attains the supremum for `ℓ_p`, `p < 1`.
pub fn modulus_of_concavity(space: &QuasiNormSpace, trials: usize, seed: u64) -> ModulusEstimate {
    let mut rng = rng_for(seed, "modulus-of-concavity");
    let mut best = ModulusEstimate {
        sampled: 0.0,
        analytic: space.analytic_modulus(),
        samples: 0,
        extremal_pair: (vec![0.0; space.dim], vec![0.0; space.dim]),
    };
    let consider = |x: Vec<f64>, y: Vec<f64>, best: &mut ModulusEstimate| {
        let denom = space.norm(&x) + space.norm(&y);
        if denom == 0.0 || !denom.is_finite() {
            return;
        }
        let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let ratio = space.norm(&sum) / denom;
        best.samples += 1;
        if ratio > best.sampled {
            best.sampled = ratio;
            best.extremal_pair = (x, y);
        }
    };
    for i in 0..space.dim {
        for j in 0..space.dim {
            if i != j {
                consider(space.unit(i), space.unit(j), &mut best);
            }
        }
    }
    for trial in 0..trials {
        let x = random_vector(&mut rng, space.dim);
        let y = match trial % 4 {
            0 => x.clone(),
            1 => {
                // disjoint supports
                let mask: Vec<bool> = (0..space.dim).map(|_| rng.random_bool(0.5)).collect();
                let y = random_vector(&mut rng, space.dim);
                let x2: Vec<f64> = x
                    .iter()
                    .zip(&mask)
                    .map(|(v, &m)| if m { *v } else { 0.0 })
                    .collect();
                let y2: Vec<f64> = y
                    .iter()
                    .zip(&mask)
                    .map(|(v, &m)| if m { 0.0 } else { *v })
                    .collect();
                consider(x2, y2, &mut best);
                continue;
            }
            _ => random_vector(&mut rng, space.dim),
        };
        consider(x, y, &mut best);
    }
    best
}

/// The exponent `p = 1 / (1 + log₂ κ)` for which a space with modulus `κ`
/// admits an equivalent `p`-norm.
pub fn aoki_exponent(kappa: f64) -> Result<f64, QuasiNormError> {
    if !(kappa >= 1.0 && kappa.is_finite()) {
        return Err(QuasiNormError::InvalidModulus(kappa));
    }
    Ok(1.0 / (1.0 + kappa.log2()))
}

/// Upper bound on the `p`-norm envelope
/// `inf { (Σ ‖xⱼ‖^p)^{1/p} : x = Σ xⱼ }` from a finite pool of decompositions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnvelopeBound {
    pub value: f64,
    /// `C` with `‖x‖ ≤ C · envelope(x)`, when it is known for this space.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant: Option<f64>,
    pub decomposition: Vec<Vec<f64>>,
    pub candidates: usize,
}

/// Upper bound on the `p`-norm envelope of `x` using decompositions of at most
/// `depth` pieces.
pub fn p_norm_envelope(
    space: &QuasiNormSpace,
    x: &[f64],
    p: f64,
    depth: usize,
    seed: u64,
) -> Result<EnvelopeBound, QuasiNormError> {
    p_norm_envelope_with(space, x, p, depth, seed, &[])
}

/// As [`p_norm_envelope`], with caller-supplied decompositions added to the pool.
pub fn p_norm_envelope_with(
    space: &QuasiNormSpace,
    x: &[f64],
    p: f64,
    depth: usize,
    seed: u64,
    extra: &[Vec<Vec<f64>>],
) -> Result<EnvelopeBound, QuasiNormError> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(QuasiNormError::InvalidEnvelopeExponent(p));
    }
    if !(1..=8).contains(&depth) {
        return Err(QuasiNormError::InvalidDepth(depth));
    }
    space.eval(x)?;
    let scale = x
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    for dec in extra {
        for piece in dec {
            space.eval(piece)?;
        }
        for i in 0..space.dim {
            let s: f64 = dec.iter().map(|piece| piece[i]).sum();
            if (s - x[i]).abs() > 1e-12 * scale {
                return Err(QuasiNormError::BadDecomposition);
            }
        }
    }

    let value_of = |dec: &[Vec<f64>]| -> f64 {
        dec.iter()
            .map(|piece| space.norm(piece).powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    };
    let mut best = EnvelopeBound {
        value: space.norm(x),
        constant: envelope_constant(space, p),
        decomposition: vec![x.to_vec()],
        candidates: 1,
    };
    let consider = |dec: Vec<Vec<f64>>, best: &mut EnvelopeBound| {
        let v = value_of(&dec);
        best.candidates += 1;
        if v < best.value {
            best.value = v;
            best.decomposition = dec;
        }
    };

    for dec in extra {
        consider(dec.clone(), &mut best);
    }

    // coordinate splits
    let support: Vec<usize> = (0..space.dim).filter(|&i| x[i] != 0.0).collect();
    let mut rng = rng_for(seed, "p-norm-envelope");
    let split = |labels: &[usize], blocks: usize| -> Vec<Vec<f64>> {
        let mut pieces = vec![vec![0.0; space.dim]; blocks];
        for (&atom, &label) in support.iter().zip(labels) {
            pieces[label][atom] = x[atom];
        }
        pieces
    };
    if support.len() <= 8 {
        for (labels, blocks) in set_partitions(support.len(), depth) {
            if blocks > 1 {
                consider(split(&labels, blocks), &mut best);
            }
        }
    } else {
        for _ in 0..128 {
            let blocks = rng.random_range(2..=depth.max(2)).min(depth);
            let labels: Vec<usize> = support
                .iter()
                .map(|_| rng.random_range(0..blocks))
                .collect();
            consider(split(&labels, blocks), &mut best);
        }
    }

    // dyadic proportional splits
    for parts in compositions(8, depth) {
        if parts.len() > 1 {
            let dec = parts
                .iter()
                .map(|&k| x.iter().map(|v| v * k as f64 / 8.0).collect())
                .collect();
            consider(dec, &mut best);
        }
    }

    // random refinements
    for _ in 0..64 {
        let mut dec = vec![x.to_vec()];
        while dec.len() < depth && rng.random_bool(0.8) {
            let k = rng.random_range(0..dec.len());
            let piece = dec.swap_remove(k);
            let y = random_vector(&mut rng, space.dim);
            let ny = space.norm(&y);
            let np = space.norm(&piece);
            let y: Vec<f64> = if ny > 0.0 && np > 0.0 {
                y.iter()
                    .map(|v| v / ny * np * rng.random_range(0.0..=1.0))
                    .collect()
            } else {
                y
            };
            let rest: Vec<f64> = piece.iter().zip(&y).map(|(a, b)| a - b).collect();
            dec.push(y);
            dec.push(rest);
        }
        if dec.len() > 1 {
            consider(dec, &mut best);
        }
    }
    Ok(best)
}

/// `C = 1` whenever the space is already `p`-normed: `p ≤ min(1, p_space)`,
/// or `p ≤ 1` in dimension one.
fn envelope_constant(space: &QuasiNormSpace, p: f64) -> Option<f64> {
    let ps = space.p.value();
    (p <= ps.min(1.0) || space.dim == 1).then_some(1.0)
}

/// Set partitions of `0..n` into at most `max_blocks` blocks, as restricted
/// growth strings paired with their block count.
fn set_partitions(n: usize, max_blocks: usize) -> Vec<(Vec<usize>, usize)> {
    fn go(
        labels: &mut Vec<usize>,
        n: usize,
        used: usize,
        max_blocks: usize,
        out: &mut Vec<(Vec<usize>, usize)>,
    ) {
        if labels.len() == n {
            out.push((labels.clone(), used));
            return;
        }
        for label in 0..=used.min(max_blocks - 1) {
            labels.push(label);
            go(labels, n, used.max(label + 1), max_blocks, out);
            labels.pop();
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::with_capacity(n), n, 0, max_blocks, &mut out);
    out
}

/// Compositions of `total` into at most `max_parts` positive parts.
fn compositions(total: usize, max_parts: usize) -> Vec<Vec<usize>> {
    fn go(rest: usize, max_parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        if cur.len() == max_parts {
            return;
        }
        for k in 1..=rest {
            cur.push(k);
            go(rest - k, max_parts, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(total, max_parts, &mut Vec::new(), &mut out);
    out
}

/// A function from atoms into a quasi-normed space: one row per atom.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VectorFunction {
    rows: Vec<Vec<f64>>,
}

impl VectorFunction {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<VectorFunction, QuasiNormError> {
        if let Some(first) = rows.first() {
            if rows.iter().any(|r| r.len() != first.len()) {
                return Err(QuasiNormError::RaggedFunction);
            }
        }
        Ok(VectorFunction { rows })
    }

    /// Scalar-valued function (value space of dimension one).
    pub fn scalar(values: &[f64]) -> VectorFunction {
        VectorFunction {
            rows: values.iter().map(|&v| vec![v]).collect(),
        }
    }

    pub fn zeros(atoms: usize, dim: usize) -> VectorFunction {
        VectorFunction {
            rows: vec![vec![0.0; dim]; atoms],
        }
    }

    pub fn atoms(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, atom: usize) -> &[f64] {
        &self.rows[atom]
    }

    pub fn row_mut(&mut self, atom: usize) -> &mut Vec<f64> {
        &mut self.rows[atom]
    }

    /// Checks that the function fits a space with `atoms` atoms and values in `space`.
    pub fn check(&self, atoms: usize, space: &QuasiNormSpace) -> Result<(), QuasiNormError> {
        if self.atoms() != atoms {
            return Err(MeasureError::LengthMismatch {
                expected: atoms,
                found: self.atoms(),
            }
            .into());
        }
        if atoms > 0 && self.dim() != space.dim() {
            return Err(QuasiNormError::DimensionMismatch {
                expected: space.dim(),
                found: self.dim(),
            });
        }
        Ok(())
    }

    /// `ω ↦ ‖f(ω)‖`.
    pub fn pointwise_norm(&self, space: &QuasiNormSpace) -> PlusFunction {
        PlusFunction::new(
            self.rows
                .iter()
                .map(|r| ExtReal::of(space.norm(r)))
                .collect(),
        )
    }

    pub fn add(&self, other: &VectorFunction) -> VectorFunction {
        assert_eq!(self.atoms(), other.atoms());
        VectorFunction {
            rows: self
                .rows
                .iter()
                .zip(&other.rows)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> VectorFunction {
        VectorFunction {
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|v| v * c).collect())
                .collect(),
        }
    }

    /// `f · χ_E`.
    pub fn restrict(&self, set: &Subset) -> VectorFunction {
        assert_eq!(self.atoms(), set.universe());
        VectorFunction {
            rows: self
                .rows
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    if set.contains(i) {
                        r.clone()
                    } else {
                        vec![0.0; r.len()]
                    }
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_examples() {
        assert_eq!(
            QuasiNormSpace::lp(2, 2.0)
                .unwrap()
                .eval(&[3.0, 4.0])
                .unwrap(),
            5.0
        );
        assert_eq!(
            QuasiNormSpace::lp(2, 0.5)
                .unwrap()
                .eval(&[1.0, 1.0])
                .unwrap(),
            4.0
        );
        assert_eq!(
            QuasiNormSpace::lp(2, f64::INFINITY)
                .unwrap()
                .eval(&[-3.0, 2.0])
                .unwrap(),
            3.0
        );
        let w = QuasiNormSpace::weighted_lp(1.0, vec![2.0, 0.5]).unwrap();
        assert_eq!(w.eval(&[1.0, -2.0]).unwrap(), 3.0);
    }

    #[test]
    fn eval_rejects_bad_input() {
        let q = QuasiNormSpace::lp(2, 1.0).unwrap();
        assert!(matches!(
            q.eval(&[1.0]),
            Err(QuasiNormError::DimensionMismatch { .. })
        ));
        assert!(QuasiNormSpace::lp(2, 0.0).is_err());
        assert!(QuasiNormSpace::lp(0, 1.0).is_err());
        assert!(QuasiNormSpace::weighted_lp(1.0, vec![1.0, -1.0]).is_err());
    }

    #[test]
    fn modulus_examples() {
        let half = QuasiNormSpace::lp(2, 0.5).unwrap();
        let m = modulus_of_concavity(&half, 1000, 1);
        assert_eq!(m.analytic, 2.0);
        assert!((m.sampled - 2.0).abs() < 1e-12);
        let l1 = modulus_of_concavity(&QuasiNormSpace::lp(3, 1.0).unwrap(), 1000, 1);
        assert!(l1.sampled <= 1.0 + 1e-15);
        let line = QuasiNormSpace::lp(1, 0.25).unwrap();
        assert_eq!(line.analytic_modulus(), 1.0);
        assert!(modulus_of_concavity(&line, 500, 2).sampled <= 1.0 + 1e-15);
    }

    #[test]
    fn aoki_examples() {
        assert_eq!(aoki_exponent(1.0).unwrap(), 1.0);
        assert_eq!(aoki_exponent(2.0).unwrap(), 0.5);
        assert_eq!(aoki_exponent(4.0).unwrap(), 1.0 / 3.0);
        assert!(aoki_exponent(0.5).is_err());
        assert!(aoki_exponent(f64::INFINITY).is_err());
    }

    #[test]
    fn envelope_examples() {
        let l1 = QuasiNormSpace::lp(2, 1.0).unwrap();
        let e = p_norm_envelope(&l1, &[1.0, 1.0], 1.0, 4, 3).unwrap();
        assert_eq!(e.value, 2.0);
        assert_eq!(e.constant, Some(1.0));
        // In ℓ_{1/2} every decomposition of (1,1) has (Σ‖xⱼ‖^{1/2})² ≥ ‖(1,1)‖ = 4.
        let half = QuasiNormSpace::lp(2, 0.5).unwrap();
        let e = p_norm_envelope(&half, &[1.0, 1.0], 0.5, 4, 3).unwrap();
        assert!((e.value - 4.0).abs() < 1e-12);
        assert!(p_norm_envelope(&half, &[1.0, 1.0], 1.5, 4, 3).is_err());
        assert!(p_norm_envelope(&half, &[1.0, 1.0], 0.5, 9, 3).is_err());
        assert!(p_norm_envelope(&l1, &[1.0, 1.0], 1.0, 0, 3).is_err());
    }

    #[test]
    fn envelope_uncertified_above_space_exponent() {
        let half = QuasiNormSpace::lp(2, 0.5).unwrap();
        let e = p_norm_envelope(&half, &[1.0, 1.0], 1.0, 4, 3).unwrap();
        assert_eq!(e.constant, None);
        // splitting into coordinates gives 1 + 1 = 2 < ‖x‖ = 4
        assert!((e.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn partitions_and_compositions_are_counted() {
        // Bell numbers restricted to ≤ 2 blocks: S(4,1) + S(4,2) = 1 + 7
        assert_eq!(set_partitions(4, 2).len(), 8);
        assert_eq!(set_partitions(3, 8).len(), 5);
        assert_eq!(compositions(4, 4).len(), 8);
        assert_eq!(compositions(4, 2).len(), 4);
    }

    #[test]
    fn vector_function_helpers() {
        let q = QuasiNormSpace::lp(2, 1.0).unwrap();
        let f = VectorFunction::new(vec![vec![1.0, -1.0], vec![0.0, 3.0]]).unwrap();
        assert_eq!(f.pointwise_norm(&q).to_f64s(), vec![2.0, 3.0]);
        let e = Subset::from_indices(2, &[1]).unwrap();
        assert_eq!(f.restrict(&e).row(0), &[0.0, 0.0]);
        assert!(VectorFunction::new(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(f.check(3, &q).is_err());
    }
}
