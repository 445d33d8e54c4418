use std::collections::HashMap;

use super::*;
use crate::microstates::canonical_extend_on;
use crate::pperm::{enumerate_all, DEFAULT_ENUMERATION_CAP};
use crate::rational::ratio;
use crate::relation::{build_relation, sigma_ball, sigma_closure, FinRelation, DEFAULT_BALL_CAP};

fn swap_semigroup() -> (FinRelation, GeneratorSet, Subsemigroup) {
    let rel = FinRelation::full(2);
    let s = PartialBijection::from_pairs(rel.carrier(), &[(1, 0)]).unwrap();
    let gens = GeneratorSet::new(&rel, vec![("s".into(), s)]).unwrap();
    let g = Subsemigroup::generated_by(&gens, 1000).unwrap();
    (rel, gens, g)
}

fn commutant_size(values: &[PartialBijection], d: usize) -> usize {
    let target = Carrier::uniform(d);
    let mut perm: Vec<usize> = (0..d).collect();
    let mut count = 0;
    permute(&mut perm, 0, &mut |p| {
        let theta =
            PartialBijection::from_images(&target, p.iter().map(|&y| y as u32).collect()).unwrap();
        if values
            .iter()
            .all(|v| theta.compose(v).unwrap() == v.compose(&theta).unwrap())
        {
            count += 1;
        }
    });
    count
}

fn permute(p: &mut Vec<usize>, k: usize, visit: &mut dyn FnMut(&[usize])) {
    if k == p.len() {
        visit(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, visit);
        p.swap(k, i);
    }
}

#[test]
fn residual_examples() {
    let c = Carrier::uniform(4);
    let phi = PartialBijection::from_pairs(&c, &[(0, 0), (1, 2), (2, 1)]).unwrap();
    let equality: Vec<usize> = (0..4).collect();
    assert_eq!(residual(&phi, &equality).1, phi.trace());
    let full = vec![0; 4];
    let (res, size) = residual(&phi, &full);
    assert_eq!(res, phi);
    assert_eq!(size, phi.domain_measure());
    let blocks = [0, 0, 1, 1];
    let (res, size) = residual(&PartialBijection::identity(&c), &blocks);
    assert!(res.is_identity());
    assert_eq!(size, ratio(1, 1));
    let (res, size) = residual(&phi, &blocks);
    assert_eq!(res, PartialBijection::from_pairs(&c, &[(0, 0)]).unwrap());
    assert_eq!(size, ratio(1, 4));
}

#[test]
fn residual_is_idempotent_and_bounded() {
    let c = Carrier::uniform(4);
    let orbit_of = [0, 1, 0, 1];
    for phi in enumerate_all(&c, DEFAULT_ENUMERATION_CAP).unwrap() {
        let (res, size) = residual(&phi, &orbit_of);
        assert_eq!(residual(&res, &orbit_of).0, res);
        assert!(size <= phi.domain_measure());
        assert!(res.is_restriction_of(&phi));
    }
}

#[test]
fn standard_embedding_is_exact() {
    let (_, gens, g) = swap_semigroup();
    let closure = sigma_closure(&gens, DEFAULT_BALL_CAP).unwrap();
    for d in [2, 4, 6] {
        let e = EmbeddedSemigroup::standard(&g, d).unwrap();
        let phi = canonical_extend_on(e.target(), e.generators(), &closure).unwrap();
        let report = crate::microstates::defects(&phi, &closure).unwrap();
        assert!(report.max_defect().is_zero());
        for (i, s) in closure.elements().iter().enumerate() {
            assert_eq!(&e.embed(s).unwrap(), phi.value(i));
        }
        assert_eq!(e.orbit_count(), d / 2);
    }
    assert_eq!(
        EmbeddedSemigroup::standard(&g, 3).unwrap_err(),
        Error::Divisibility { d: 3, divisor: 2 }
    );
}

#[test]
fn centralizer_order_matches_commutant() {
    let (_, _, swap) = swap_semigroup();
    let two_classes = {
        let rel = build_relation(vec![ratio(1, 4); 4], vec![vec![0, 1], vec![2, 3]]).unwrap();
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
        Subsemigroup::generated_by(&gens, 1000).unwrap()
    };
    let mixed = {
        let rel = build_relation(vec![ratio(1, 4); 4], vec![vec![0, 1, 2], vec![3]]).unwrap();
        let gens = GeneratorSet::new(
            &rel,
            vec![
                (
                    "a".into(),
                    PartialBijection::from_pairs(rel.carrier(), &[(1, 0)]).unwrap(),
                ),
                (
                    "b".into(),
                    PartialBijection::from_pairs(rel.carrier(), &[(2, 1)]).unwrap(),
                ),
                (
                    "p".into(),
                    PartialBijection::projection(rel.carrier(), [3]).unwrap(),
                ),
            ],
        )
        .unwrap();
        Subsemigroup::generated_by(&gens, 1000).unwrap()
    };
    let trivial = Subsemigroup::trivial(&FinRelation::full(1));
    for g in [&swap, &two_classes, &mixed, &trivial] {
        for d in 1..=8 {
            let Ok(e) = EmbeddedSemigroup::standard(g, d) else {
                continue;
            };
            let sampler = CentralizerSampler::new(&e);
            assert_eq!(
                sampler.order(),
                &BigUint::from(commutant_size(e.generators(), d)),
                "d={d}"
            );
            assert_eq!(
                sampler.order(),
                &count_embeddings(g.atom_relation(), d).centralizer_order
            );
        }
    }
}

#[test]
fn trivial_centralizer_samples_are_uniform() {
    let e = EmbeddedSemigroup::trivial(&FinRelation::full(1), 3);
    let sampler = CentralizerSampler::new(&e);
    let thetas = sample_centralizer(&sampler, 6000, 11).unwrap();
    let mut seen: HashMap<PartialBijection, usize> = HashMap::new();
    for t in thetas {
        assert!(t.is_permutation());
        *seen.entry(t).or_default() += 1;
    }
    assert_eq!(seen.len(), 6);
    assert!(seen.values().all(|&k| (850..1150).contains(&k)), "{seen:?}");
}

#[test]
fn swap_centralizer_in_four_points() {
    let (_, _, g) = swap_semigroup();
    let e = EmbeddedSemigroup::standard(&g, 4).unwrap();
    let sampler = CentralizerSampler::new(&e);
    assert_eq!(sampler.order(), &BigUint::from(2u32));
    let thetas = sample_centralizer(&sampler, 400, 3).unwrap();
    let distinct: std::collections::HashSet<_> = thetas.iter().cloned().collect();
    assert_eq!(distinct.len(), 2);
    let ones = thetas.iter().filter(|t| t.is_identity()).count();
    assert!((150..250).contains(&ones));
    assert!(sample_centralizer(&sampler, 0, 3).unwrap().is_empty());
    assert_eq!(
        sample_centralizer(&sampler, 5, 9).unwrap(),
        sample_centralizer(&sampler, 5, 9).unwrap()
    );
}

#[test]
fn concentration_examples() {
    let trivial = FinRelation::full(1);
    let e = EmbeddedSemigroup::trivial(&trivial, 200);
    let phi = cyclic_shift(200, 1);
    let psi = cyclic_shift(200, 7);
    let result = concentration_experiment(
        std::slice::from_ref(&phi),
        std::slice::from_ref(&psi),
        &e,
        &ratio(1, 1),
        &ratio(1, 10),
        1000,
        1,
    )
    .unwrap();
    assert_eq!(result.threshold, ratio(1, 10));
    assert!(
        result.fraction.clone().unwrap() >= ratio(9, 10),
        "{result:?}"
    );
    let again =
        concentration_experiment(&[phi], &[psi], &e, &ratio(1, 1), &ratio(1, 10), 1000, 1).unwrap();
    assert_eq!(result, again);

    let one = PartialBijection::identity(e.target());
    let trivial_word = concentration_experiment(
        std::slice::from_ref(&one),
        std::slice::from_ref(&one),
        &e,
        &ratio(1, 1),
        &ratio(1, 10),
        50,
        1,
    )
    .unwrap();
    assert_eq!(trivial_word.fraction, Some(ratio(1, 1)));

    let none = concentration_experiment(
        &[cyclic_shift(200, 1)],
        &[cyclic_shift(200, 1)],
        &e,
        &ratio(1, 1),
        &ratio(1, 10),
        0,
        1,
    )
    .unwrap();
    assert_eq!(none.fraction, None);
}

fn swap_side(d: usize, psi: PartialBijection) -> (GeneratorSet, SigmaBall, MicrostateAssignment) {
    let rel = FinRelation::full(2);
    let s = PartialBijection::from_pairs(rel.carrier(), &[(0, 1), (1, 0)]).unwrap();
    let gens = GeneratorSet::new(&rel, vec![("s".into(), s)]).unwrap();
    let ball = sigma_ball(&gens, 2, DEFAULT_BALL_CAP).unwrap();
    let phi = canonical_extend_on(&Carrier::uniform(d), &[psi], &ball).unwrap();
    (gens, ball, phi)
}

#[test]
fn phi_theta_examples() {
    let d = 6;
    let (_, ball, phi) = swap_side(d, cyclic_shift(d, 1));
    let (_, ball2, phi2) = swap_side(d, cyclic_shift(d, 2));
    let s1 = ball.generator_index(0);
    let s2 = ball2.generator_index(0);
    let id = PartialBijection::identity(&Carrier::uniform(d));
    let words = vec![
        vec![(Side::Left, s1)],
        vec![(Side::Left, s1), (Side::Right, s2)],
    ];
    let left = SideData {
        ball: &ball,
        phi: &phi,
    };
    let right = SideData {
        ball: &ball2,
        phi: &phi2,
    };
    let out = phi_theta(left, right, &[], &id, &words, None).unwrap();
    assert_eq!(out.values[0], *phi.value(s1));
    assert_eq!(
        out.values[1],
        phi.value(s1).compose(phi2.value(s2)).unwrap()
    );
    assert_eq!(out.trace_defect, None);

    // s is an involution: merging s·s = 1 is exact for an involutive ψ and
    // off by everything for the shift by one
    let merged = vec![vec![(Side::Left, s1), (Side::Left, s1)]];
    assert_eq!(
        phi_theta(left, right, &[], &id, &merged, None)
            .unwrap()
            .mult_defect,
        ratio(1, 1)
    );
    let (_, ball_inv, phi_inv) = swap_side(d, cyclic_shift(d, 3));
    let involutive = SideData {
        ball: &ball_inv,
        phi: &phi_inv,
    };
    assert!(phi_theta(involutive, right, &[], &id, &merged, None)
        .unwrap()
        .mult_defect
        .is_zero());

    let shared = vec![ball.element(s1).clone()];
    assert_eq!(
        phi_theta(left, right, &shared, &id, &words, None).unwrap_err(),
        Error::AnchorMismatch(0)
    );
    let (_, ball3, phi3) = swap_side(d, cyclic_shift(d, 1));
    let same = SideData {
        ball: &ball3,
        phi: &phi3,
    };
    let theta = PartialBijection::from_pairs(
        &Carrier::uniform(d),
        &[(0, 1), (1, 0), (2, 2), (3, 3), (4, 4), (5, 5)],
    )
    .unwrap();
    assert_eq!(
        phi_theta(left, same, &shared, &theta, &words, None).unwrap_err(),
        Error::NotInCentralizer
    );
}

#[test]
fn phi_theta_free_word_has_small_trace() {
    let d = 200;
    let (_, ball, phi) = swap_side(d, cyclic_shift(d, 1));
    let (_, ball2, phi2) = swap_side(d, cyclic_shift(d, 3));
    let s = ball.generator_index(0);
    let words = vec![vec![(Side::Left, s), (Side::Right, s)]];
    let e = EmbeddedSemigroup::trivial(&FinRelation::full(1), d);
    let sampler = CentralizerSampler::new(&e);
    let thetas = sample_centralizer(&sampler, 200, 1).unwrap();
    let small = thetas
        .iter()
        .filter(|theta| {
            let out = phi_theta(
                SideData {
                    ball: &ball,
                    phi: &phi,
                },
                SideData {
                    ball: &ball2,
                    phi: &phi2,
                },
                &[],
                theta,
                &words,
                Some(&[ratio(0, 1)]),
            )
            .unwrap();
            out.trace_defect.unwrap() < ratio(1, 10)
        })
        .count();
    assert!(small * 10 >= thetas.len() * 9, "{small}/200");
}

fn two_swaps() -> (FinRelation, GeneratorSet, GeneratorSet) {
    let rel = build_relation(vec![ratio(1, 4); 4], vec![vec![0, 1], vec![2, 3]]).unwrap();
    let a = PartialBijection::from_pairs(rel.carrier(), &[(1, 0)]).unwrap();
    let b = PartialBijection::from_pairs(rel.carrier(), &[(3, 2)]).unwrap();
    let f1 = GeneratorSet::new(&rel, vec![("a".into(), a)]).unwrap();
    let f2 = GeneratorSet::new(&rel, vec![("b".into(), b)]).unwrap();
    (rel, f1, f2)
}

#[test]
fn splitting_examples() {
    let options = CountOptions::default();
    let rel = FinRelation::full(2);
    let one = GeneratorSet::new(
        &rel,
        vec![("e".into(), PartialBijection::identity(rel.carrier()))],
    )
    .unwrap();
    let none = GeneratorSet::new(&rel, Vec::new()).unwrap();
    for d in 1..=4 {
        let check =
            splitting_check(&one, &one, &none, 2, &Tolerance::exact(), d, &options).unwrap();
        assert_eq!(check.lhs, BigUint::from(1u32));
        assert_eq!(check.rhs, ratio(1, 1));
        assert!(check.holds);
    }

    let (rel, f1, f2) = two_swaps();
    let trivial = GeneratorSet::new(&rel, Vec::new()).unwrap();
    let at2 = splitting_check(&f1, &f2, &trivial, 2, &Tolerance::exact(), 2, &options).unwrap();
    assert!(at2.lhs.is_zero());
    assert!(at2.holds);
    let at4 = splitting_check(&f1, &f2, &trivial, 2, &Tolerance::exact(), 4, &options).unwrap();
    assert_eq!(at4.lhs, BigUint::from(24u32));
    assert_eq!(at4.left, BigUint::from(12u32));
    assert_eq!(at4.right, BigUint::from(12u32));
    assert_eq!(at4.centralizer_order, BigUint::from(24u32));
    assert!(at4.holds);
}
