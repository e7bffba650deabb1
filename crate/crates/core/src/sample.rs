//! Random draws shared by the checkers.

use rand::Rng as _;

use crate::measure::{ExtReal, PlusFunction, Subset};
use crate::quasinorm::VectorFunction;
use crate::rng::Rng;

/// `2^u` with `u` uniform in `[lo, hi]`.
pub fn log_uniform(rng: &mut Rng, lo: f64, hi: f64) -> f64 {
    2f64.powf(rng.random_range(lo..=hi))
}

/// A real number with random sign and log-uniform magnitude in `[2^lo, 2^hi]`,
/// or exactly zero with probability `zero_prob`.
pub fn signed_log_uniform(rng: &mut Rng, lo: f64, hi: f64, zero_prob: f64) -> f64 {
    if rng.random_bool(zero_prob) {
        return 0.0;
    }
    let m = log_uniform(rng, lo, hi);
    if rng.random_bool(0.5) {
        m
    } else {
        -m
    }
}

/// A random vector of length `dim` mixing zeros, unit-scale and extreme entries.
pub fn random_vector(rng: &mut Rng, dim: usize) -> Vec<f64> {
    let style = rng.random_range(0..4);
    (0..dim)
        .map(|_| match style {
            0 => rng.random_range(-1.0..=1.0),
            1 => signed_log_uniform(rng, -20.0, 20.0, 0.2),
            2 => signed_log_uniform(rng, -4.0, 4.0, 0.5),
            _ => {
                let choices = [0.0, 1.0, -1.0, 1e-6, -1e-6, 1e6, -1e6, 0.5];
                choices[rng.random_range(0..choices.len())]
            }
        })
        .collect()
}

/// A random vector-valued function with `atoms` rows of length `dim`.
pub fn random_vector_function(rng: &mut Rng, atoms: usize, dim: usize) -> VectorFunction {
    VectorFunction::new((0..atoms).map(|_| random_vector(rng, dim)).collect())
        .expect("rows have equal length")
}

/// A uniformly random subset, each atom kept with probability `prob`.
pub fn random_subset(rng: &mut Rng, n: usize, prob: f64) -> Subset {
    Subset::from_predicate(n, |_| rng.random_bool(prob))
}

/// A nonempty random subset.
pub fn random_nonempty_subset(rng: &mut Rng, n: usize) -> Subset {
    let prob = rng.random_range(0.2..=0.9);
    let mut s = random_subset(rng, n, prob);
    if s.is_empty() {
        s.insert(rng.random_range(0..n));
    }
    s
}

/// Options for [`random_plus_function`].
#[derive(Clone, Copy, Debug)]
pub struct PlusDraw {
    /// `log₂` range of nonzero values.
    pub lo: f64,
    pub hi: f64,
    pub zero_prob: f64,
    pub infinity_prob: f64,
}

impl Default for PlusDraw {
    fn default() -> Self {
        PlusDraw {
            lo: -12.0,
            hi: 12.0,
            zero_prob: 0.2,
            infinity_prob: 0.0,
        }
    }
}

/// A random element of `L⁺`.
pub fn random_plus_function(rng: &mut Rng, n: usize, draw: PlusDraw) -> PlusFunction {
    PlusFunction::new(
        (0..n)
            .map(|_| {
                if rng.random_bool(draw.infinity_prob) {
                    ExtReal::Infinite
                } else if rng.random_bool(draw.zero_prob) {
                    ExtReal::ZERO
                } else {
                    ExtReal::of(log_uniform(rng, draw.lo, draw.hi))
                }
            })
            .collect(),
    )
}

/// Random nonnegative weights summing to `total` (up to rounding).
pub fn random_simplex(rng: &mut Rng, k: usize, total: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..=1.0)).collect();
    let sum: f64 = raw.iter().sum();
    raw.iter().map(|r| r / sum * total).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_for;

    #[test]
    fn draws_respect_ranges() {
        let mut rng = rng_for(1, "sample");
        for _ in 0..200 {
            let x = log_uniform(&mut rng, -3.0, 3.0);
            assert!((0.125..=8.0).contains(&x));
            let s = random_nonempty_subset(&mut rng, 5);
            assert!(!s.is_empty());
            let f = random_plus_function(&mut rng, 4, PlusDraw::default());
            assert_eq!(f.len(), 4);
            let w = random_simplex(&mut rng, 3, 2.0);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-12);
        }
    }
}
