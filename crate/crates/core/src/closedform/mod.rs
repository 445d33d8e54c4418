//! Closed-form predictions: embedding counts, centralizer orders, the
//! finite-case dimension, the cost upper bound and ε-ball sizes.

use num_bigint::BigUint;
use num_integer::binomial;
use num_traits::{One, ToPrimitive, Zero};

use crate::microstates::Tolerance;
use crate::rational::{abs_diff, from_int, is_integral, ln_biguint, Rational};
use crate::relation::{FinRelation, GeneratorSet};

pub fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}

fn choose(n: usize, k: usize) -> BigUint {
    binomial(BigUint::from(n), BigUint::from(k))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbeddingCensus {
    pub d: usize,
    /// Number of unital trace-preserving embeddings of the pseudogroup into `⟦d⟧`.
    pub total_embeddings: BigUint,
    /// Order of the commutant of any one embedding in `[d]`; zero when
    /// there is no embedding.
    pub centralizer_order: BigUint,
    /// `1 − μ(D)`.
    pub predicted_ratio_limit: Rational,
}

/// Per-class block sizes `d·w_c`, or `None` if some `d·w_c` is fractional.
pub fn block_sizes(relation: &FinRelation, d: usize) -> Option<Vec<usize>> {
    (0..relation.classes().len())
        .map(|c| {
            let size = relation.class_weight(c) * from_int(d);
            is_integral(&size)
                .then(|| size.to_integer().to_usize())
                .flatten()
        })
        .collect()
}

/// `d!/∏_c (d·w_c)!` embeddings with commutant `∏_c (d·w_c)!`.
pub fn count_embeddings(relation: &FinRelation, d: usize) -> EmbeddingCensus {
    let predicted_ratio_limit = predicted_dimension(relation);
    match block_sizes(relation, d) {
        Some(sizes) => {
            let centralizer_order = sizes.iter().map(|&m| factorial(m)).product::<BigUint>();
            EmbeddingCensus {
                d,
                total_embeddings: factorial(d) / &centralizer_order,
                centralizer_order,
                predicted_ratio_limit,
            }
        }
        None => EmbeddingCensus {
            d,
            total_embeddings: BigUint::zero(),
            centralizer_order: BigUint::zero(),
            predicted_ratio_limit,
        },
    }
}

/// `1 − μ(D)`.
pub fn predicted_dimension(relation: &FinRelation) -> Rational {
    Rational::one() - relation.fd_measure()
}

/// `max_a C(d,a)²·a!` over admissible domain sizes `a` for each generator,
/// multiplied over the generators: `|a/d − cost(s)| < 9δ`, or `a/d = cost(s)`
/// in exact mode.
pub fn cost_upper_count(generators: &GeneratorSet, tolerance: &Tolerance, d: usize) -> BigUint {
    let nine_delta = from_int(9) * &tolerance.delta;
    let d_rat = from_int(d);
    generators
        .elements()
        .iter()
        .map(|s| {
            let cost = s.domain_measure();
            (0..=d)
                .filter(|&a| {
                    let gap = abs_diff(&(from_int(a) / &d_rat), &cost);
                    gap < nine_delta || (tolerance.exact && gap.is_zero())
                })
                .map(|a| {
                    let c = choose(d, a);
                    &c * &c * factorial(a)
                })
                .max()
                .unwrap_or_else(BigUint::zero)
        })
        .product()
}

#[derive(Clone, Debug, PartialEq)]
pub struct BallBound {
    pub d: usize,
    /// `⌊εd⌋`.
    pub radius_points: usize,
    /// `Σ_{j≤⌊εd⌋} C(d,j)·j!`.
    pub exact_sum: BigUint,
    /// `Σ_{j≤⌊εd⌋} C(d,j)·|⟦j⟧ into d|`: choose the `j` points where `t`
    /// differs from `s`, then any partial injection from them into `[d]`.
    /// Bounds every ball in `⟦d⟧`.
    pub pseudogroup_sum: BigUint,
    pub kappa: f64,
    /// `exact_sum ≤ d^{κd}`.
    pub bound_holds: bool,
}

/// Partial injections from a `j`-set into a `d`-set.
fn injections_from(j: usize, d: usize) -> BigUint {
    (0..=j.min(d))
        .map(|i| choose(j, i) * choose(d, i) * factorial(i))
        .sum()
}

pub fn ball_bound(d: usize, eps: &Rational, kappa: f64) -> BallBound {
    let k = (eps * from_int(d))
        .floor()
        .to_integer()
        .to_usize()
        .unwrap_or(0)
        .min(d);
    let exact_sum: BigUint = (0..=k).map(|j| choose(d, j) * factorial(j)).sum();
    let pseudogroup_sum: BigUint = (0..=k).map(|j| choose(d, j) * injections_from(j, d)).sum();
    let bound_holds = if d <= 1 {
        exact_sum <= BigUint::one()
    } else {
        ln_biguint(&exact_sum) <= kappa * d as f64 * (d as f64).ln()
    };
    BallBound {
        d,
        radius_points: k,
        exact_sum,
        pseudogroup_sum,
        kappa,
        bound_holds,
    }
}

#[cfg(test)]
mod tests;
