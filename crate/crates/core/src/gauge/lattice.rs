//! Lattice `p`-convexity and `p`-concavity of gauges.
//!
//! For exponent `p`, functions `f₁, …, fₙ` and scalars `sⱼ ≥ 0` write
//! `h = (Σ sⱼ^p fⱼ^p)^{1/p}`. A gauge is lattice `p`-convex with constant `C`
//! when `ρ(h) ≤ C max ρ(fⱼ)` whenever `Σ sⱼ^p ≤ 1`, and lattice `p`-concave
//! with constant `C` when `min ρ(fⱼ) ≤ C ρ(h)` whenever `Σ sⱼ^p = 1`.

use rand::Rng as _;
use serde::Serialize;

use super::{Gauge, GaugeError};
use crate::measure::{ExtReal, PlusFunction};
use crate::report::Witness;
use crate::rng::{rng_for, Rng};
use crate::sample::{log_uniform, random_plus_function, random_simplex, PlusDraw};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LatticeMode {
    Convex,
    Concave,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeOptions {
    pub trials: usize,
    pub seed: u64,
}

impl Default for LatticeOptions {
    fn default() -> Self {
        LatticeOptions {
            trials: 1000,
            seed: 0,
        }
    }
}

/// Sampled lattice constant.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LatticeEstimate {
    pub p: f64,
    pub mode: LatticeMode,
    /// Largest observed ratio; the least constant consistent with the samples.
    pub constant: f64,
    /// The same for the homogeneous criterion
    /// `ρ((Σ fⱼ^p)^{1/p})` against `(Σ ρ(fⱼ)^p)^{1/p}`; only for homogeneous gauges.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub homogeneous_constant: Option<f64>,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl LatticeEstimate {
    /// True when the sampled constant does not exceed `claimed · (1 + tol)`.
    pub fn supports(&self, claimed: f64, tol: f64) -> bool {
        self.constant <= claimed * (1.0 + tol)
    }
}

/// `(Σ sⱼ^p fⱼ^p)^{1/p}` pointwise.
pub fn p_combination(p: f64, terms: &[(f64, PlusFunction)]) -> PlusFunction {
    let n = terms.first().map_or(0, |t| t.1.len());
    PlusFunction::new(
        (0..n)
            .map(|i| {
                terms
                    .iter()
                    .map(|(s, f)| f.get(i).scale(*s).powf(p))
                    .sum::<ExtReal>()
                    .powf(1.0 / p)
            })
            .collect(),
    )
}

fn draw_terms(rng: &mut Rng, n: usize, p: f64, mode: LatticeMode) -> Vec<(f64, PlusFunction)> {
    let k = rng.random_range(1..=4);
    let total = match mode {
        LatticeMode::Convex if rng.random_bool(0.5) => rng.random_range(0.05..=1.0),
        _ => 1.0,
    };
    let weights = random_simplex(rng, k, total);
    let scale = log_uniform(rng, -20.0, 20.0);
    let shared = rng.random_bool(0.25);
    let base = random_plus_function(rng, n, PlusDraw::default()).scale(scale);
    weights
        .into_iter()
        .map(|a| {
            let f = if shared {
                base.clone()
            } else {
                random_plus_function(rng, n, PlusDraw::default()).scale(scale)
            };
            (a.powf(1.0 / p), f)
        })
        .collect()
}

/// Estimates the lattice `p`-convexity or `p`-concavity constant of `gauge`.
pub fn lattice_convexity_constant(
    gauge: &dyn Gauge,
    p: f64,
    mode: LatticeMode,
    opts: &LatticeOptions,
) -> Result<LatticeEstimate, GaugeError> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(GaugeError::InvalidExponent(p));
    }
    let n = gauge.space().len();
    let mut rng = rng_for(opts.seed, "lattice-constant");
    let homogeneous = gauge.meta().homogeneous;
    let mut out = LatticeEstimate {
        p,
        mode,
        constant: 0.0,
        homogeneous_constant: homogeneous.then_some(0.0),
        samples: 0,
        witness: None,
    };
    for _ in 0..opts.trials {
        let terms = draw_terms(&mut rng, n, p, mode);
        let values: Vec<ExtReal> = terms.iter().map(|(_, f)| gauge.eval(f)).collect();
        let h = p_combination(p, &terms);
        let rh = gauge.eval(&h);
        let ratio = match mode {
            LatticeMode::Convex => {
                let m = values.iter().copied().fold(ExtReal::ZERO, ExtReal::max);
                if m.is_infinite() {
                    None
                } else {
                    rh.ratio(m)
                }
            }
            LatticeMode::Concave => {
                let m = values.iter().copied().fold(ExtReal::Infinite, ExtReal::min);
                if m.is_zero() {
                    None
                } else {
                    m.ratio(rh)
                }
            }
        };
        let Some(ratio) = ratio else { continue };
        out.samples += 1;
        let r = ratio.to_f64();
        if r > out.constant {
            out.constant = r;
            out.witness = Some(
                Witness::new("extremal combination")
                    .scalars("s", terms.iter().map(|t| t.0).collect())
                    .vectors("f", terms.iter().map(|t| t.1.to_f64s()).collect())
                    .param("ratio", r),
            );
        }
        if homogeneous {
            let unit: Vec<(f64, PlusFunction)> =
                terms.iter().map(|(_, f)| (1.0, f.clone())).collect();
            let big_n = gauge.eval(&p_combination(p, &unit));
            let big_m = values
                .iter()
                .map(|v| v.powf(p))
                .sum::<ExtReal>()
                .powf(1.0 / p);
            let hr = match mode {
                LatticeMode::Convex => big_n.ratio(big_m),
                LatticeMode::Concave => big_m.ratio(big_n),
            };
            if let (Some(hr), Some(c)) = (
                hr.and_then(|x| x.finite()),
                out.homogeneous_constant.as_mut(),
            ) {
                *c = c.max(hr);
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvelopeMode {
    /// `inf max ρ(fⱼ)`: the largest `p`-convex minorant, up to constants.
    Convex,
    /// `sup min ρ(fⱼ)`: the concave counterpart.
    Concave,
}

/// A bound on the convexification envelope and the decomposition attaining it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnvelopeValue {
    pub value: ExtReal,
    pub scalars: Vec<f64>,
    pub functions: Vec<PlusFunction>,
    pub candidates: usize,
}

/// Envelope of `ρ` over decompositions `f^p = Σ sⱼ^p fⱼ^p`, `Σ sⱼ^p = 1`, with
/// at most `depth` terms. The pool consists of splits of the support into
/// blocks combined with dyadic weights, and proportional splits. The result is
/// an upper bound for the convex envelope and a lower bound for the concave one.
pub fn convexification_envelope(
    gauge: &dyn Gauge,
    p: f64,
    f: &PlusFunction,
    depth: usize,
    mode: EnvelopeMode,
) -> Result<EnvelopeValue, GaugeError> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(GaugeError::InvalidExponent(p));
    }
    if !(1..=8).contains(&depth) {
        return Err(GaugeError::InvalidDepth(depth));
    }
    gauge.space().check_len(f.len())?;
    let mut best = EnvelopeValue {
        value: gauge.eval(f),
        scalars: vec![1.0],
        functions: vec![f.clone()],
        candidates: 1,
    };
    let consider = |terms: Vec<(f64, PlusFunction)>, best: &mut EnvelopeValue| {
        let values = terms.iter().map(|(_, g)| gauge.eval(g));
        let v = match mode {
            EnvelopeMode::Convex => values.fold(ExtReal::ZERO, ExtReal::max),
            EnvelopeMode::Concave => values.fold(ExtReal::Infinite, ExtReal::min),
        };
        best.candidates += 1;
        let better = match mode {
            EnvelopeMode::Convex => v < best.value,
            EnvelopeMode::Concave => v > best.value,
        };
        if better {
            best.value = v;
            best.scalars = terms.iter().map(|t| t.0).collect();
            best.functions = terms.into_iter().map(|t| t.1).collect();
        }
    };

    let support = f.support().to_indices();
    let n = f.len();
    let blocks_of = |labels: &[usize], k: usize| -> Vec<PlusFunction> {
        let mut parts = vec![PlusFunction::zeros(n); k];
        let mut raw: Vec<Vec<ExtReal>> = parts.iter().map(|p| p.values().to_vec()).collect();
        for (&atom, &label) in support.iter().zip(labels) {
            raw[label][atom] = f.get(atom);
        }
        for (part, values) in parts.iter_mut().zip(raw) {
            *part = PlusFunction::new(values);
        }
        parts
    };
    let partitions: Vec<(Vec<usize>, usize)> = if support.len() <= 6 {
        set_partitions(support.len(), depth)
    } else {
        let mut rng = rng_for(support.len() as u64, "envelope-partitions");
        (0..64)
            .map(|_| {
                let k = rng.random_range(1..=depth);
                let labels: Vec<usize> = support.iter().map(|_| rng.random_range(0..k)).collect();
                (labels, k)
            })
            .collect()
    };
    for (labels, k) in &partitions {
        if *k < 2 {
            continue;
        }
        let parts = blocks_of(labels, *k);
        for a in compositions(8, *k, *k) {
            let terms = parts
                .iter()
                .zip(&a)
                .map(|(part, &units)| {
                    let w = units as f64 / 8.0;
                    (w.powf(1.0 / p), part.scale(w.powf(-1.0 / p)))
                })
                .collect();
            consider(terms, &mut best);
        }
    }
    for k in 2..=depth.min(3) {
        let comps = compositions(8, k, k);
        for a in &comps {
            for lam in &comps {
                let terms = a
                    .iter()
                    .zip(lam)
                    .map(|(&ai, &li)| {
                        let (ai, li) = (ai as f64 / 8.0, li as f64 / 8.0);
                        (ai.powf(1.0 / p), f.scale((li / ai).powf(1.0 / p)))
                    })
                    .collect();
                consider(terms, &mut best);
            }
        }
    }
    Ok(best)
}

fn set_partitions(n: usize, max_blocks: usize) -> Vec<(Vec<usize>, usize)> {
    fn go(
        labels: &mut Vec<usize>,
        n: usize,
        used: usize,
        max: usize,
        out: &mut Vec<(Vec<usize>, usize)>,
    ) {
        if labels.len() == n {
            out.push((labels.clone(), used));
            return;
        }
        for label in 0..=used.min(max - 1) {
            labels.push(label);
            go(labels, n, used.max(label + 1), max, out);
            labels.pop();
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), n, 0, max_blocks, &mut out);
    out
}

/// Compositions of `total` into between `min_parts` and `max_parts` positive parts.
fn compositions(total: usize, min_parts: usize, max_parts: usize) -> Vec<Vec<usize>> {
    fn go(rest: usize, min: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            if cur.len() >= min {
                out.push(cur.clone());
            }
            return;
        }
        if cur.len() == max {
            return;
        }
        for k in 1..=rest {
            cur.push(k);
            go(rest - k, min, max, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(total, min_parts, max_parts, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::PowerNormGauge;
    use crate::measure::MeasureSpace;

    #[test]
    fn norm_is_convex_at_its_exponent() {
        // (Σ f^2)^{1/2} is lattice 2-convex and 2-concave with constant 1
        let g = PowerNormGauge::new(MeasureSpace::counting(3).unwrap(), 2.0).unwrap();
        let opts = LatticeOptions {
            trials: 300,
            seed: 4,
        };
        let c = lattice_convexity_constant(&g, 2.0, LatticeMode::Convex, &opts).unwrap();
        assert!(c.supports(1.0, 1e-12), "{c:?}");
        let h = c.homogeneous_constant.unwrap();
        assert!(h <= 1.0 + 1e-12);
        let c = lattice_convexity_constant(&g, 2.0, LatticeMode::Concave, &opts).unwrap();
        assert!(c.supports(1.0, 1e-12), "{c:?}");
    }

    #[test]
    fn l1_is_not_two_convex() {
        let g = PowerNormGauge::new(MeasureSpace::counting(3).unwrap(), 1.0).unwrap();
        let opts = LatticeOptions {
            trials: 300,
            seed: 4,
        };
        let c = lattice_convexity_constant(&g, 2.0, LatticeMode::Convex, &opts).unwrap();
        assert!(c.constant > 1.01);
    }

    #[test]
    fn envelope_sandwich_for_l1_at_one_half() {
        // ℓ₁ is 1/2-convex with constant 1, so the envelope equals ρ
        let g = PowerNormGauge::new(MeasureSpace::counting(3).unwrap(), 1.0).unwrap();
        let f = PlusFunction::from_f64s(&[1.0, 2.0, 3.0]).unwrap();
        let e = convexification_envelope(&g, 0.5, &f, 4, EnvelopeMode::Convex).unwrap();
        assert!(e.value <= g.eval(&f));
        assert!(e.candidates > 100);
    }

    #[test]
    fn envelope_errors() {
        let g = PowerNormGauge::new(MeasureSpace::counting(2).unwrap(), 1.0).unwrap();
        let f = PlusFunction::zeros(2);
        assert!(convexification_envelope(&g, 0.0, &f, 4, EnvelopeMode::Convex).is_err());
        assert!(convexification_envelope(&g, 1.0, &f, 9, EnvelopeMode::Convex).is_err());
        assert!(convexification_envelope(
            &g,
            1.0,
            &PlusFunction::zeros(3),
            2,
            EnvelopeMode::Convex
        )
        .is_err());
    }

    #[test]
    fn p_combination_values() {
        let f = PlusFunction::from_f64s(&[3.0]).unwrap();
        let g = PlusFunction::from_f64s(&[4.0]).unwrap();
        let h = p_combination(2.0, &[(1.0, f), (1.0, g)]);
        assert_eq!(h.to_f64s(), vec![5.0]);
    }
}
