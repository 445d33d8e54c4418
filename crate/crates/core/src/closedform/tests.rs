use std::sync::Arc;

use super::*;
use crate::microstates::{canonical_extend_on, defects};
use crate::pperm::{enumerate_all, Carrier, PartialBijection, DEFAULT_ENUMERATION_CAP};
use crate::rational::ratio;
use crate::relation::{sigma_closure, GeneratorSet, DEFAULT_BALL_CAP};

/// Matrix units `i+1 → i` generating the full pseudogroup on `k` points.
fn chain(k: usize) -> (FinRelation, GeneratorSet) {
    let rel = FinRelation::full(k);
    let gens = (0..k - 1)
        .map(|i| {
            (
                format!("e{i}"),
                PartialBijection::from_pairs(rel.carrier(), &[(i + 1, i)]).unwrap(),
            )
        })
        .collect();
    let gens = GeneratorSet::new(&rel, gens).unwrap();
    (rel, gens)
}

/// Embeddings found by trying every generator tuple with the right domain
/// size and trace, and keeping those whose extension to the whole
/// pseudogroup is exactly multiplicative and trace-preserving.
fn brute_force_embeddings(gens: &GeneratorSet, d: usize) -> (u64, Option<Vec<PartialBijection>>) {
    use rayon::prelude::*;
    let closure = sigma_closure(gens, DEFAULT_BALL_CAP).unwrap();
    let target: Arc<Carrier> = Carrier::uniform(d);
    let all: Vec<PartialBijection> = enumerate_all(&target, DEFAULT_ENUMERATION_CAP)
        .unwrap()
        .collect();
    let options: Vec<Vec<&PartialBijection>> = gens
        .elements()
        .iter()
        .map(|g| {
            all.iter()
                .filter(|v| v.domain_measure() == g.domain_measure() && v.trace() == g.trace())
                .collect()
        })
        .collect();
    let mut tuples: Vec<Vec<PartialBijection>> = vec![Vec::new()];
    for opts in &options {
        tuples = tuples
            .into_iter()
            .flat_map(|t| {
                opts.iter().map(move |v| {
                    let mut t = t.clone();
                    t.push((*v).clone());
                    t
                })
            })
            .collect();
    }
    let passing: Vec<&Vec<PartialBijection>> = tuples
        .par_iter()
        .filter(|psi| {
            let phi = canonical_extend_on(&target, psi, &closure).unwrap();
            let traces_ok = phi
                .values
                .iter()
                .zip(closure.elements())
                .all(|(v, s)| v.trace() == s.trace());
            traces_ok && defects(&phi, &closure).unwrap().max_defect().is_zero()
        })
        .collect();
    (passing.len() as u64, passing.first().map(|p| (*p).clone()))
}

/// Permutations of `[d]` commuting with every value.
fn brute_force_commutant(values: &[PartialBijection], d: usize) -> u64 {
    let target = Carrier::uniform(d);
    enumerate_all(&target, DEFAULT_ENUMERATION_CAP)
        .unwrap()
        .filter(PartialBijection::is_permutation)
        .filter(|theta| {
            values
                .iter()
                .all(|v| theta.compose(v).unwrap() == v.compose(theta).unwrap())
        })
        .count() as u64
}

#[test]
fn embedding_counts_match_brute_force() {
    for k in [2, 3] {
        let (rel, gens) = chain(k);
        for d in 1..=6 {
            let census = count_embeddings(&rel, d);
            let (count, witness) = brute_force_embeddings(&gens, d);
            assert_eq!(census.total_embeddings, BigUint::from(count), "k={k} d={d}");
            if let Some(values) = witness {
                assert_eq!(
                    census.centralizer_order,
                    BigUint::from(brute_force_commutant(&values, d))
                );
                assert_eq!(
                    &census.total_embeddings * &census.centralizer_order,
                    factorial(d)
                );
            } else {
                assert!(census.centralizer_order.is_zero());
            }
        }
    }
}

#[test]
fn embedding_examples() {
    let census = count_embeddings(&FinRelation::full(2), 4);
    assert_eq!(census.total_embeddings, BigUint::from(12u32));
    assert_eq!(census.centralizer_order, BigUint::from(2u32));
    assert_eq!(census.predicted_ratio_limit, ratio(1, 2));
    assert!(count_embeddings(&FinRelation::full(2), 3)
        .total_embeddings
        .is_zero());
    for d in 1..=8 {
        let trivial = count_embeddings(&FinRelation::full(1), d);
        assert_eq!(trivial.total_embeddings, BigUint::one());
        assert_eq!(trivial.centralizer_order, factorial(d));
    }
}

#[test]
fn two_classes_of_equal_size_use_per_class_product() {
    let rel = crate::relation::build_relation(vec![ratio(1, 4); 4], vec![vec![0, 1], vec![2, 3]])
        .unwrap();
    let census = count_embeddings(&rel, 4);
    // blocks of size 1 per class: 4!/(1!·1!) embeddings, trivial commutant
    assert_eq!(census.total_embeddings, BigUint::from(24u32));
    assert_eq!(census.centralizer_order, BigUint::one());
    let gens = GeneratorSet::new(
        &rel,
        vec![
            (
                "a".into(),
                PartialBijection::from_pairs(rel.carrier(), &[(1, 0)]).unwrap(),
            ),
            (
                "b".into(),
                PartialBijection::from_pairs(rel.carrier(), &[(3, 2)]).unwrap(),
            ),
        ],
    )
    .unwrap();
    let (count, witness) = brute_force_embeddings(&gens, 4);
    assert_eq!(count, 24);
    assert_eq!(brute_force_commutant(&witness.unwrap(), 4), 1);
}

#[test]
fn totals_times_centralizers_give_factorials() {
    for k in 1..=4 {
        let rel = FinRelation::full(k);
        for d in 1..=8 {
            let c = count_embeddings(&rel, d);
            if !c.total_embeddings.is_zero() {
                assert_eq!(&c.total_embeddings * &c.centralizer_order, factorial(d));
            } else {
                assert_ne!(d % k, 0);
            }
        }
    }
}

#[test]
fn predicted_dimensions() {
    assert_eq!(predicted_dimension(&FinRelation::full(2)), ratio(1, 2));
    assert_eq!(predicted_dimension(&FinRelation::identity(3)), ratio(0, 1));
    for k in 1..=6 {
        assert_eq!(
            predicted_dimension(&FinRelation::full(k)),
            ratio(k as i64 - 1, k as i64)
        );
    }
}

#[test]
fn cost_bound_examples() {
    let (rel, swap) = chain(2);
    assert_eq!(
        cost_upper_count(&swap, &Tolerance::exact(), 4),
        BigUint::from(72u32)
    );
    let one = GeneratorSet::new(
        &rel,
        vec![("e".into(), PartialBijection::identity(rel.carrier()))],
    )
    .unwrap();
    for d in 1..=6 {
        assert_eq!(cost_upper_count(&one, &Tolerance::exact(), d), factorial(d));
    }
    let zero = GeneratorSet::new(
        &rel,
        vec![("z".into(), PartialBijection::zero(rel.carrier()))],
    )
    .unwrap();
    assert_eq!(
        cost_upper_count(&zero, &Tolerance::exact(), 5),
        BigUint::one()
    );
    assert!(cost_upper_count(&swap, &Tolerance::exact(), 3).is_zero());
    // a loose tolerance admits every domain size
    let loose = cost_upper_count(&swap, &Tolerance::strict(ratio(1, 1)), 4);
    let best = (0..=4)
        .map(|a| choose(4, a) * choose(4, a) * factorial(a))
        .max()
        .unwrap();
    assert_eq!(loose, best);
}

fn ball_sizes(d: usize, eps: &Rational) -> Vec<(PartialBijection, usize)> {
    let target = Carrier::uniform(d);
    let all: Vec<PartialBijection> = enumerate_all(&target, DEFAULT_ENUMERATION_CAP)
        .unwrap()
        .collect();
    all.iter()
        .map(|s| {
            let size = all.iter().filter(|t| s.distance(t).unwrap() < *eps).count();
            (s.clone(), size)
        })
        .collect()
}

#[test]
fn ball_bound_examples() {
    let b = ball_bound(3, &ratio(2, 5), 1.0);
    assert_eq!(b.exact_sum, BigUint::from(4u32));
    let identity_ball = ball_sizes(3, &ratio(2, 5))
        .into_iter()
        .find(|(s, _)| s.is_identity())
        .unwrap()
        .1;
    assert_eq!(identity_ball, 4);
    for d in 0..=6 {
        assert_eq!(ball_bound(d, &ratio(0, 1), 1.0).exact_sum, BigUint::one());
    }
    // Σ_{j≤5} C(5,j)·j! = 1 + 5 + 20 + 60 + 120 + 120
    assert_eq!(
        ball_bound(5, &ratio(11, 10), 1.0).exact_sum,
        BigUint::from(326u32)
    );
    assert!(ball_bound(5, &ratio(11, 10), 1.0).bound_holds);
    assert!(!ball_bound(5, &ratio(11, 10), 0.1).bound_holds);
}

#[test]
fn pseudogroup_sum_bounds_every_ball() {
    for d in 1..=4 {
        for k in 1..=10 {
            let eps = ratio(k, 10);
            let bound = ball_bound(d, &eps, 1.0);
            for (s, size) in ball_sizes(d, &eps) {
                assert!(
                    BigUint::from(size) <= bound.pseudogroup_sum,
                    "d={d} eps={eps} s={s:?}"
                );
            }
        }
    }
}

#[test]
fn exact_sum_bounds_permutation_balls() {
    for d in 1..=5 {
        let target = Carrier::uniform(d);
        let perms: Vec<PartialBijection> = enumerate_all(&target, DEFAULT_ENUMERATION_CAP)
            .unwrap()
            .filter(PartialBijection::is_permutation)
            .collect();
        for k in 1..=10 {
            let eps = ratio(k, 10);
            let bound = ball_bound(d, &eps, 1.0).exact_sum;
            for s in &perms {
                let size = perms
                    .iter()
                    .filter(|t| s.distance(t).unwrap() < eps)
                    .count();
                assert!(BigUint::from(size) <= bound, "d={d} eps={eps}");
            }
        }
    }
}
