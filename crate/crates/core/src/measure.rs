//! Discrete measure spaces and the cone of `[0, ∞]`-valued functions.
//!
//! A [`MeasureSpace`] is a finite list of atoms with strictly positive,
//! finite weights. Every subset therefore has finite measure, and the
//! measure of a subset is the sum of its atom weights taken in index order.
//! Values of gauges and integrals live in [`ExtReal`], which carries an
//! explicit infinity so that `0 · ∞ = 0` is enforced rather than inherited
//! from IEEE semantics (where it is `NaN`).

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Mul};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Errors raised while building spaces, subsets and functions.
#[derive(Clone, Debug, Error, PartialEq)]
pub enum MeasureError {
    #[error("a measure space needs at least one atom")]
    EmptyWeights,
    #[error("weight {index} is {value}; weights must be positive and finite")]
    InvalidWeight { index: usize, value: f64 },
    #[error("atom index {index} out of range for a space with {len} atoms")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("length mismatch: expected {expected} atoms, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("value {value} at atom {index} is not in [0, ∞]")]
    InvalidValue { index: usize, value: f64 },
}

/// An element of `[0, ∞]`.
///
/// Finite values are never negative and never `NaN`; the infinite value is a
/// separate variant. Ordering is total.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    Infinite,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);
    pub const ONE: ExtReal = ExtReal::Finite(1.0);
    pub const INFINITY: ExtReal = ExtReal::Infinite;

    /// Checked constructor. `f64::INFINITY` maps to [`ExtReal::Infinite`].
    pub fn new(x: f64) -> Option<ExtReal> {
        if x.is_nan() || x < 0.0 {
            None
        } else if x.is_infinite() {
            Some(ExtReal::Infinite)
        } else {
            // normalise -0.0
            Some(ExtReal::Finite(x + 0.0))
        }
    }

    /// Constructor for values known to be in `[0, ∞]`.
    ///
    /// Panics on `NaN` or negative input.
    pub fn of(x: f64) -> ExtReal {
        ExtReal::new(x).unwrap_or_else(|| panic!("{x} is not an element of [0, ∞]"))
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn is_infinite(self) -> bool {
        !self.is_finite()
    }

    pub fn is_zero(self) -> bool {
        self == ExtReal::ZERO
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            ExtReal::Infinite => None,
        }
    }

    /// Lossy view as `f64`, with infinity mapped to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::Finite(x) => x,
            ExtReal::Infinite => f64::INFINITY,
        }
    }

    /// Multiplication by a nonnegative real with the `0 · ∞ = 0` convention.
    pub fn scale(self, c: f64) -> ExtReal {
        assert!(c >= 0.0, "scale factor {c} must be nonnegative");
        self * ExtReal::of(c)
    }

    /// `self / c` for a positive finite `c`.
    pub fn div(self, c: f64) -> ExtReal {
        assert!(c > 0.0, "divisor {c} must be positive");
        match self {
            ExtReal::Finite(x) => ExtReal::of(x / c),
            ExtReal::Infinite => ExtReal::Infinite,
        }
    }

    /// `self^p` for `p > 0`, with `∞^p = ∞`.
    pub fn powf(self, p: f64) -> ExtReal {
        assert!(p > 0.0, "exponent {p} must be positive");
        match self {
            ExtReal::Finite(x) => ExtReal::of(x.powf(p)),
            ExtReal::Infinite => ExtReal::Infinite,
        }
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        if self <= other {
            self
        } else {
            other
        }
    }

    /// `self / other` as an extended ratio. Returns `None` for `0/0` and `∞/∞`.
    pub fn ratio(self, other: ExtReal) -> Option<ExtReal> {
        match (self, other) {
            (ExtReal::Infinite, ExtReal::Infinite) => None,
            (ExtReal::Infinite, _) => Some(ExtReal::Infinite),
            (ExtReal::Finite(_), ExtReal::Infinite) => Some(ExtReal::ZERO),
            (ExtReal::Finite(a), ExtReal::Finite(b)) => {
                if b == 0.0 {
                    if a == 0.0 {
                        None
                    } else {
                        Some(ExtReal::Infinite)
                    }
                } else {
                    Some(ExtReal::of(a / b))
                }
            }
        }
    }
}

impl Eq for ExtReal {}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtReal::Infinite, ExtReal::Infinite) => Ordering::Equal,
            (ExtReal::Infinite, _) => Ordering::Greater,
            (_, ExtReal::Infinite) => Ordering::Less,
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.total_cmp(b),
        }
    }
}

impl Add for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::of(a + b),
            _ => ExtReal::Infinite,
        }
    }
}

impl Mul for ExtReal {
    type Output = ExtReal;

    fn mul(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::of(a * b),
            (a, b) if a.is_zero() || b.is_zero() => ExtReal::ZERO,
            _ => ExtReal::Infinite,
        }
    }
}

impl Sum for ExtReal {
    fn sum<I: Iterator<Item = ExtReal>>(iter: I) -> ExtReal {
        iter.fold(ExtReal::ZERO, |acc, x| acc + x)
    }
}

impl From<ExtReal> for f64 {
    fn from(x: ExtReal) -> f64 {
        x.to_f64()
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::Infinite => write!(f, "∞"),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.to_f64())
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let x = f64::deserialize(d)?;
        ExtReal::new(x).ok_or_else(|| serde::de::Error::custom(format!("{x} is not in [0, ∞]")))
    }
}

/// A finite measure space: atoms `0..n` with positive finite weights.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureSpace {
    weights: Vec<f64>,
}

impl MeasureSpace {
    /// Builds a space from per-atom weights.
    pub fn new(weights: Vec<f64>) -> Result<MeasureSpace, MeasureError> {
        if weights.is_empty() {
            return Err(MeasureError::EmptyWeights);
        }
        for (index, &value) in weights.iter().enumerate() {
            if !(value > 0.0 && value.is_finite()) {
                return Err(MeasureError::InvalidWeight { index, value });
            }
        }
        Ok(MeasureSpace { weights })
    }

    /// Counting measure on `n` atoms.
    pub fn counting(n: usize) -> Result<MeasureSpace, MeasureError> {
        MeasureSpace::new(vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, atom: usize) -> f64 {
        self.weights[atom]
    }

    pub fn is_counting(&self) -> bool {
        self.weights.iter().all(|&w| w == 1.0)
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn full(&self) -> Subset {
        Subset::full(self.len())
    }

    pub fn empty(&self) -> Subset {
        Subset::empty(self.len())
    }

    /// `μ(E)`: the sum of the weights of `E`, in index order.
    pub fn measure_of(&self, set: &Subset) -> f64 {
        assert_eq!(set.universe(), self.len(), "subset built for another space");
        // fold from +0.0: an empty `sum` of f64 is -0.0
        set.indices().fold(0.0, |acc, i| acc + self.weights[i])
    }

    /// `∫ f dμ = Σ wᵢ f(i)`; infinite as soon as some `f(i)` is.
    pub fn integrate(&self, f: &PlusFunction) -> Result<ExtReal, MeasureError> {
        self.check_len(f.len())?;
        Ok(self.integrate_unchecked(f.values()))
    }

    /// `∫_A f dμ`.
    pub fn integrate_over(&self, f: &PlusFunction, set: &Subset) -> Result<ExtReal, MeasureError> {
        self.check_len(f.len())?;
        self.check_len(set.universe())?;
        Ok(set.indices().map(|i| f.get(i).scale(self.weights[i])).sum())
    }

    pub(crate) fn integrate_unchecked(&self, values: &[ExtReal]) -> ExtReal {
        values
            .iter()
            .zip(&self.weights)
            .map(|(v, &w)| v.scale(w))
            .sum()
    }

    pub fn check_len(&self, found: usize) -> Result<(), MeasureError> {
        if found == self.len() {
            Ok(())
        } else {
            Err(MeasureError::LengthMismatch {
                expected: self.len(),
                found,
            })
        }
    }

    /// All `2ⁿ` subsets, in mask order. Only sensible for small spaces.
    pub fn all_subsets(&self) -> impl Iterator<Item = Subset> + '_ {
        let n = self.len();
        assert!(n < 64, "cannot enumerate subsets of {n} atoms");
        (0..(1u64 << n)).map(move |mask| Subset::from_mask(n, mask))
    }
}

/// An exact set of atom indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subset {
    members: Vec<bool>,
}

impl Subset {
    pub fn empty(n: usize) -> Subset {
        Subset {
            members: vec![false; n],
        }
    }

    pub fn full(n: usize) -> Subset {
        Subset {
            members: vec![true; n],
        }
    }

    pub fn from_indices(n: usize, indices: &[usize]) -> Result<Subset, MeasureError> {
        let mut set = Subset::empty(n);
        for &index in indices {
            if index >= n {
                return Err(MeasureError::IndexOutOfRange { index, len: n });
            }
            set.members[index] = true;
        }
        Ok(set)
    }

    /// Bit `i` of `mask` selects atom `i`.
    pub fn from_mask(n: usize, mask: u64) -> Subset {
        Subset {
            members: (0..n).map(|i| (mask >> i) & 1 == 1).collect(),
        }
    }

    pub fn from_predicate(n: usize, mut pred: impl FnMut(usize) -> bool) -> Subset {
        Subset {
            members: (0..n).map(&mut pred).collect(),
        }
    }

    /// Number of atoms of the owning space.
    pub fn universe(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, atom: usize) -> bool {
        self.members[atom]
    }

    pub fn insert(&mut self, atom: usize) {
        self.members[atom] = true;
    }

    pub fn remove(&mut self, atom: usize) {
        self.members[atom] = false;
    }

    pub fn count(&self) -> usize {
        self.members.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.members.iter().any(|&b| b)
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.members
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }

    pub fn to_indices(&self) -> Vec<usize> {
        self.indices().collect()
    }

    fn zip_with(&self, other: &Subset, op: impl Fn(bool, bool) -> bool) -> Subset {
        assert_eq!(
            self.universe(),
            other.universe(),
            "subsets of different spaces"
        );
        Subset {
            members: self
                .members
                .iter()
                .zip(&other.members)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        }
    }

    pub fn union(&self, other: &Subset) -> Subset {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &Subset) -> Subset {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &Subset) -> Subset {
        self.zip_with(other, |a, b| a && !b)
    }

    pub fn complement(&self) -> Subset {
        Subset {
            members: self.members.iter().map(|&b| !b).collect(),
        }
    }

    pub fn is_subset_of(&self, other: &Subset) -> bool {
        assert_eq!(
            self.universe(),
            other.universe(),
            "subsets of different spaces"
        );
        self.members
            .iter()
            .zip(&other.members)
            .all(|(&a, &b)| !a || b)
    }

    /// All subsets of `self`, including the empty set and `self`.
    pub fn subsets(&self) -> impl Iterator<Item = Subset> + '_ {
        let idx = self.to_indices();
        let k = idx.len();
        assert!(k < 64, "cannot enumerate subsets of {k} atoms");
        let n = self.universe();
        (0..(1u64 << k)).map(move |mask| {
            let mut s = Subset::empty(n);
            for (bit, &atom) in idx.iter().enumerate() {
                if (mask >> bit) & 1 == 1 {
                    s.members[atom] = true;
                }
            }
            s
        })
    }
}

impl Serialize for Subset {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_indices().serialize(s)
    }
}

/// A function in `L⁺(μ)`: one value in `[0, ∞]` per atom.
#[derive(Clone, Debug, PartialEq)]
pub struct PlusFunction {
    values: Vec<ExtReal>,
}

impl PlusFunction {
    pub fn new(values: Vec<ExtReal>) -> PlusFunction {
        PlusFunction { values }
    }

    /// From raw floats; `f64::INFINITY` becomes `∞`, negatives and `NaN` are rejected.
    pub fn from_f64s(values: &[f64]) -> Result<PlusFunction, MeasureError> {
        values
            .iter()
            .enumerate()
            .map(|(index, &value)| {
                ExtReal::new(value).ok_or(MeasureError::InvalidValue { index, value })
            })
            .collect::<Result<Vec<_>, _>>()
            .map(PlusFunction::new)
    }

    pub fn zeros(n: usize) -> PlusFunction {
        PlusFunction::constant(n, ExtReal::ZERO)
    }

    pub fn constant(n: usize, c: ExtReal) -> PlusFunction {
        PlusFunction { values: vec![c; n] }
    }

    /// `c · χ_E`.
    pub fn indicator(set: &Subset, c: ExtReal) -> PlusFunction {
        PlusFunction {
            values: (0..set.universe())
                .map(|i| if set.contains(i) { c } else { ExtReal::ZERO })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[ExtReal] {
        &self.values
    }

    pub fn get(&self, atom: usize) -> ExtReal {
        self.values[atom]
    }

    pub fn to_f64s(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.to_f64()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.is_zero())
    }

    /// Pointwise `f ≤ g`.
    pub fn le(&self, other: &PlusFunction) -> bool {
        assert_eq!(self.len(), other.len());
        self.values.iter().zip(&other.values).all(|(a, b)| a <= b)
    }

    pub fn map(&self, op: impl Fn(ExtReal) -> ExtReal) -> PlusFunction {
        PlusFunction {
            values: self.values.iter().map(|&v| op(v)).collect(),
        }
    }

    pub fn zip_map(
        &self,
        other: &PlusFunction,
        op: impl Fn(ExtReal, ExtReal) -> ExtReal,
    ) -> PlusFunction {
        assert_eq!(self.len(), other.len());
        PlusFunction {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        }
    }

    pub fn add(&self, other: &PlusFunction) -> PlusFunction {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn max(&self, other: &PlusFunction) -> PlusFunction {
        self.zip_map(other, ExtReal::max)
    }

    /// `c · f` for `c ≥ 0`, with `0 · ∞ = 0`.
    pub fn scale(&self, c: f64) -> PlusFunction {
        self.map(|v| v.scale(c))
    }

    /// `f / c` for `c > 0`; computed by division rather than by `1/c`.
    pub fn div(&self, c: f64) -> PlusFunction {
        self.map(|v| v.div(c))
    }

    pub fn powf(&self, p: f64) -> PlusFunction {
        self.map(|v| v.powf(p))
    }

    /// `f · χ_E`.
    pub fn restrict(&self, set: &Subset) -> PlusFunction {
        assert_eq!(self.len(), set.universe());
        PlusFunction {
            values: self
                .values
                .iter()
                .enumerate()
                .map(|(i, &v)| if set.contains(i) { v } else { ExtReal::ZERO })
                .collect(),
        }
    }

    /// Atoms where the value is nonzero.
    pub fn support(&self) -> Subset {
        Subset::from_predicate(self.len(), |i| !self.values[i].is_zero())
    }
}

impl Serialize for PlusFunction {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_f64s().serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space() -> MeasureSpace {
        MeasureSpace::new(vec![0.5, 0.3, 0.2]).unwrap()
    }

    #[test]
    fn make_space_examples() {
        assert!((space().total() - 1.0).abs() < 1e-15);
        assert_eq!(MeasureSpace::new(vec![1.0]).unwrap().total(), 1.0);
        let c = MeasureSpace::new(vec![1.0; 4]).unwrap();
        assert!(c.is_counting());
        assert_eq!(c.total(), 4.0);
    }

    #[test]
    fn make_space_rejects_bad_weights() {
        assert_eq!(MeasureSpace::new(vec![]), Err(MeasureError::EmptyWeights));
        assert!(matches!(
            MeasureSpace::new(vec![1.0, 0.0]),
            Err(MeasureError::InvalidWeight { index: 1, .. })
        ));
        assert!(MeasureSpace::new(vec![-1.0]).is_err());
        assert!(MeasureSpace::new(vec![f64::INFINITY]).is_err());
        assert!(MeasureSpace::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn measure_of_examples() {
        let s = space();
        let e = Subset::from_indices(3, &[0, 2]).unwrap();
        assert!((s.measure_of(&e) - 0.7).abs() < 1e-15);
        assert_eq!(s.measure_of(&s.empty()), 0.0);
        assert_eq!(s.measure_of(&s.full()), s.total());
        assert!(Subset::from_indices(3, &[3]).is_err());
    }

    #[test]
    fn integrate_examples() {
        let s = space();
        let f = PlusFunction::from_f64s(&[1.0, 2.0, 3.0]).unwrap();
        let v = s.integrate(&f).unwrap().finite().unwrap();
        assert!((v - 1.7).abs() < 1e-15);
        let g = PlusFunction::from_f64s(&[f64::INFINITY, 0.0, 0.0]).unwrap();
        assert_eq!(s.integrate(&g).unwrap(), ExtReal::Infinite);
        assert_eq!(s.integrate(&PlusFunction::zeros(3)).unwrap(), ExtReal::ZERO);
        assert!(s.integrate(&PlusFunction::zeros(2)).is_err());
    }

    #[test]
    fn zero_times_infinity_is_zero() {
        assert_eq!(ExtReal::ZERO * ExtReal::Infinite, ExtReal::ZERO);
        assert_eq!(ExtReal::Infinite * ExtReal::ZERO, ExtReal::ZERO);
        assert_eq!(ExtReal::Infinite.scale(0.0), ExtReal::ZERO);
        assert_eq!(ExtReal::Infinite.scale(2.0), ExtReal::Infinite);
        assert_eq!(ExtReal::of(3.0) + ExtReal::Infinite, ExtReal::Infinite);
    }

    #[test]
    fn ext_real_order_and_ratio() {
        assert!(ExtReal::of(1e308) < ExtReal::Infinite);
        assert_eq!(ExtReal::new(-1.0), None);
        assert_eq!(ExtReal::new(f64::NAN), None);
        assert_eq!(ExtReal::of(-0.0), ExtReal::ZERO);
        assert_eq!(ExtReal::ZERO.ratio(ExtReal::ZERO), None);
        assert_eq!(ExtReal::ONE.ratio(ExtReal::ZERO), Some(ExtReal::Infinite));
        assert_eq!(
            ExtReal::of(3.0).ratio(ExtReal::of(2.0)),
            Some(ExtReal::of(1.5))
        );
    }

    #[test]
    fn subset_algebra_and_enumeration() {
        let a = Subset::from_indices(4, &[0, 1]).unwrap();
        let b = Subset::from_indices(4, &[1, 2]).unwrap();
        assert_eq!(a.union(&b).to_indices(), vec![0, 1, 2]);
        assert_eq!(a.intersection(&b).to_indices(), vec![1]);
        assert_eq!(a.difference(&b).to_indices(), vec![0]);
        assert!(a.intersection(&b).is_subset_of(&a));
        assert_eq!(a.subsets().count(), 4);
        let s = MeasureSpace::counting(4).unwrap();
        assert_eq!(s.all_subsets().count(), 16);
    }
}
