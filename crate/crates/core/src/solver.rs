//! Bisection for the infimum of an up-set of `(0, ∞)`.
//!
//! The Luxemburg and bar functionals are both of the form
//! `inf { t > 0 : P(t) }` for a predicate `P` that is monotone (once true,
//! true for every larger `t`). [`infimum_of_upset`] brackets the transition
//! on a logarithmic scale, bisects geometrically until the bracket is within
//! a factor of two, then arithmetically until the relative width is below the
//! tolerance. It returns the upper end of the final bracket, which always
//! satisfies `P`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::measure::ExtReal;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum SolverError {
    #[error("predicate does not change value on [{lower}, {upper}]")]
    NonBracketing { lower: f64, upper: f64 },
    #[error("predicate is not monotone: true at {true_at} but false at {false_at}")]
    NonMonotone { true_at: f64, false_at: f64 },
    #[error("invalid solver parameters: {0}")]
    InvalidParams(String),
}

/// Tuning knobs for [`infimum_of_upset`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    /// Initial bracket.
    pub lower: f64,
    pub upper: f64,
    /// Widen the bracket (by factors of `2^60`, up to `2^±1020`) when it does
    /// not contain the transition. Without expansion such inputs are errors.
    pub expand: bool,
    /// Relative width at which bisection stops.
    pub rel_tol: f64,
    pub max_iter: usize,
    /// After solving, probe a logarithmic grid (`2^k`, `|k| ≤ 120`, step 4)
    /// and fail if the predicate is not consistent with the computed value.
    pub check_monotone: bool,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            lower: 2f64.powi(-60),
            upper: 2f64.powi(60),
            expand: true,
            rel_tol: 1e-13,
            max_iter: 200,
            check_monotone: false,
        }
    }
}

impl SolverParams {
    fn validate(&self) -> Result<(), SolverError> {
        if !(self.lower > 0.0 && self.lower < self.upper && self.upper.is_finite()) {
            return Err(SolverError::InvalidParams(format!(
                "bracket [{}, {}] must satisfy 0 < lower < upper < ∞",
                self.lower, self.upper
            )));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(SolverError::InvalidParams(format!(
                "rel_tol {} must lie in (0, 1)",
                self.rel_tol
            )));
        }
        if self.max_iter == 0 {
            return Err(SolverError::InvalidParams(
                "max_iter must be positive".into(),
            ));
        }
        Ok(())
    }
}

const EXPAND_STEP: i32 = 60;
const EXPAND_LIMIT: i32 = 1020;

/// `inf { t > 0 : pred(t) }` for a monotone predicate.
///
/// Returns `0` when the predicate holds at the smallest probed point and `∞`
/// when it fails at the largest one (both only after expansion, if enabled).
pub fn infimum_of_upset(
    mut pred: impl FnMut(f64) -> bool,
    params: &SolverParams,
) -> Result<ExtReal, SolverError> {
    params.validate()?;
    let value = bisect(&mut pred, params)?;
    if params.check_monotone {
        let mut probes: Vec<(f64, bool)> = (-30..=30)
            .map(|k| 2f64.powi(4 * k))
            .map(|t| (t, pred(t)))
            .collect();
        if let Some(v) = value.finite().filter(|&v| v > 0.0) {
            for j in 1..=8 {
                let d = 2f64.powi(-4 * j);
                probes.push((v * (1.0 - d), pred(v * (1.0 - d))));
                probes.push((v * (1.0 + d), pred(v * (1.0 + d))));
            }
        }
        check_consistent(value, &probes)?;
    }
    Ok(value)
}

fn bisect(
    pred: &mut impl FnMut(f64) -> bool,
    params: &SolverParams,
) -> Result<ExtReal, SolverError> {
    let mut probe = |t: f64| pred(t);

    let mut lo = params.lower;
    let mut hi = params.upper;
    if probe(lo) {
        if !params.expand {
            return Err(SolverError::NonBracketing {
                lower: lo,
                upper: hi,
            });
        }
        loop {
            let next = lo * 2f64.powi(-EXPAND_STEP);
            if next < 2f64.powi(-EXPAND_LIMIT) {
                return Ok(ExtReal::ZERO);
            }
            hi = lo;
            lo = next;
            if !probe(lo) {
                break;
            }
        }
    } else if !probe(hi) {
        if !params.expand {
            return Err(SolverError::NonBracketing {
                lower: lo,
                upper: hi,
            });
        }
        loop {
            let next = hi * 2f64.powi(EXPAND_STEP);
            if next > 2f64.powi(EXPAND_LIMIT) {
                return Ok(ExtReal::Infinite);
            }
            lo = hi;
            hi = next;
            if probe(hi) {
                break;
            }
        }
    }

    // invariant: pred(lo) = false, pred(hi) = true
    let mut iter = 0;
    while hi / lo > 2.0 && iter < params.max_iter {
        let mid = (lo.sqrt() * hi.sqrt()).clamp(lo, hi);
        if probe(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        iter += 1;
    }
    while hi - lo > params.rel_tol * hi && iter < params.max_iter {
        let mid = lo + (hi - lo) / 2.0;
        if mid <= lo || mid >= hi {
            break;
        }
        if probe(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        iter += 1;
    }
    Ok(ExtReal::of(hi))
}

/// Every probe above `value` must be true and every probe below it false.
fn check_consistent(value: ExtReal, probes: &[(f64, bool)]) -> Result<(), SolverError> {
    let v = value.to_f64();
    let min_true = probes
        .iter()
        .filter(|p| p.1)
        .map(|p| p.0)
        .fold(f64::INFINITY, f64::min);
    let max_false = probes
        .iter()
        .filter(|p| !p.1)
        .map(|p| p.0)
        .fold(0.0, f64::max);
    if min_true < max_false {
        return Err(SolverError::NonMonotone {
            true_at: min_true,
            false_at: max_false,
        });
    }
    if let Some(&(t, _)) = probes.iter().find(|p| p.0 > v && !p.1) {
        return Err(SolverError::NonMonotone {
            true_at: v,
            false_at: t,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_threshold() {
        let p = SolverParams::default();
        let v = infimum_of_upset(|t| t > 3.0, &p).unwrap().finite().unwrap();
        assert!((v - 3.0).abs() <= 3.0 * 1e-13);
        assert!(v > 3.0);
        let v = infimum_of_upset(|t| t * t >= 2.0, &p)
            .unwrap()
            .finite()
            .unwrap();
        assert!((v - 2f64.sqrt()).abs() <= 1e-12);
    }

    #[test]
    fn expands_bracket() {
        let p = SolverParams::default();
        let v = infimum_of_upset(|t| t > 1e-30, &p)
            .unwrap()
            .finite()
            .unwrap();
        assert!((v / 1e-30 - 1.0).abs() < 1e-12);
        let v = infimum_of_upset(|t| t > 1e30, &p)
            .unwrap()
            .finite()
            .unwrap();
        assert!((v / 1e30 - 1.0).abs() < 1e-12);
        assert_eq!(infimum_of_upset(|_| true, &p).unwrap(), ExtReal::ZERO);
        assert_eq!(infimum_of_upset(|_| false, &p).unwrap(), ExtReal::Infinite);
    }

    #[test]
    fn errors_without_expansion() {
        let p = SolverParams {
            expand: false,
            ..SolverParams::default()
        };
        assert!(matches!(
            infimum_of_upset(|t| t > 1e30, &p),
            Err(SolverError::NonBracketing { .. })
        ));
        assert!(matches!(
            infimum_of_upset(|_| true, &p),
            Err(SolverError::NonBracketing { .. })
        ));
    }

    #[test]
    fn detects_non_monotone_predicate() {
        let p = SolverParams {
            check_monotone: true,
            ..SolverParams::default()
        };
        // true on (2^-20, 2^-10) and beyond 1, false elsewhere
        let r = infimum_of_upset(
            |t| (t > 2f64.powi(-20) && t < 2f64.powi(-10)) || t > 1.0,
            &p,
        );
        assert!(matches!(r, Err(SolverError::NonMonotone { .. })), "{r:?}");
    }

    #[test]
    fn rejects_bad_params() {
        let p = SolverParams {
            lower: 2.0,
            upper: 1.0,
            ..SolverParams::default()
        };
        assert!(matches!(
            infimum_of_upset(|t| t > 1.0, &p),
            Err(SolverError::InvalidParams(_))
        ));
    }
}
