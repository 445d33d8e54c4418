//! Free-product machinery at finite scale: an embedded finite pseudogroup,
//! its centralizer, residuals, random conjugation and the splitting bound.

use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::closedform::{block_sizes, count_embeddings, factorial};
use crate::error::{Error, Result};
use crate::microstates::{count_g_anchored, CountOptions, MicrostateAssignment, Tolerance};
use crate::pperm::{Carrier, PartialBijection, UNDEF};
use crate::rational::Rational;
use crate::relation::{GeneratorSet, SigmaBall, Subsemigroup};
use crate::rng::{stream, SampleRng};

/// A unital trace-preserving embedding `j: G → ⟦d⟧` built block by block:
/// point `(c, t, a)` is copy `t` of atom `a` in atom class `c`, and `j(g)`
/// moves atoms within each copy.
#[derive(Clone, Debug)]
pub struct EmbeddedSemigroup {
    semigroup: Subsemigroup,
    target: Arc<Carrier>,
    /// `(class, copy, atom)` for every point of `[d]`.
    labels: Vec<(usize, usize, usize)>,
    /// Orbit index of each point.
    orbit_of: Vec<usize>,
    /// For each class, the orbits (copies) in copy order.
    class_orbits: Vec<Vec<usize>>,
    /// Points of each orbit, in atom order.
    orbits: Vec<Vec<usize>>,
    generators: Vec<PartialBijection>,
}

impl EmbeddedSemigroup {
    pub fn standard(semigroup: &Subsemigroup, d: usize) -> Result<Self> {
        let atoms = semigroup.atom_relation();
        let sizes = block_sizes(atoms, d).ok_or(Error::Divisibility {
            d,
            divisor: semigroup.required_divisor(),
        })?;
        let target = Carrier::uniform(d);
        let mut labels = Vec::with_capacity(d);
        let mut orbit_of = Vec::with_capacity(d);
        let mut class_orbits = Vec::new();
        let mut orbits = Vec::new();
        for (c, class) in atoms.classes().iter().enumerate() {
            let mut mine = Vec::new();
            for t in 0..sizes[c] {
                let orbit = orbits.len();
                let mut points = Vec::new();
                for &a in class {
                    points.push(labels.len());
                    labels.push((c, t, a));
                    orbit_of.push(orbit);
                }
                orbits.push(points);
                mine.push(orbit);
            }
            class_orbits.push(mine);
        }
        let mut out = EmbeddedSemigroup {
            semigroup: semigroup.clone(),
            target,
            labels,
            orbit_of,
            class_orbits,
            orbits,
            generators: Vec::new(),
        };
        out.generators = semigroup
            .generators()
            .elements()
            .iter()
            .map(|g| out.embed(g))
            .collect::<Result<_>>()?;
        Ok(out)
    }

    /// The trivial pseudogroup `{0, 1}` embedded in `⟦d⟧`.
    pub fn trivial(relation: &crate::relation::FinRelation, d: usize) -> Self {
        Self::standard(&Subsemigroup::trivial(relation), d)
            .expect("the trivial semigroup embeds in every ⟦d⟧")
    }

    pub fn target(&self) -> &Arc<Carrier> {
        &self.target
    }

    pub fn semigroup(&self) -> &Subsemigroup {
        &self.semigroup
    }

    /// `j(g)` for the generators of `G`.
    pub fn generators(&self) -> &[PartialBijection] {
        &self.generators
    }

    pub fn orbit_of(&self) -> &[usize] {
        &self.orbit_of
    }

    pub fn orbit_count(&self) -> usize {
        self.orbits.len()
    }

    /// `(class, copy, atom)` label of a point.
    pub fn label(&self, x: usize) -> (usize, usize, usize) {
        self.labels[x]
    }

    /// `j(g)` for an element `g ∈ G`.
    pub fn embed(&self, g: &PartialBijection) -> Result<PartialBijection> {
        let atoms = self.semigroup.atoms();
        // action of g on atoms
        let mut moves = vec![None; atoms.len()];
        for (a, p) in atoms.iter().enumerate() {
            let mut images = p.domain().map(|x| g.apply(x));
            let Some(Some(first)) = images.next() else {
                continue;
            };
            let b = atoms
                .iter()
                .position(|q| q.apply(first).is_some())
                .ok_or_else(|| Error::Invalid("image outside every atom".into()))?;
            if images.any(|y| y.is_none_or(|y| atoms[b].apply(y).is_none())) {
                return Err(Error::NotPrincipal("element splits an atom".into()));
            }
            moves[a] = Some(b);
        }
        let mut images = vec![UNDEF; self.labels.len()];
        for (x, &(c, t, a)) in self.labels.iter().enumerate() {
            if let Some(b) = moves[a] {
                let orbit = self.class_orbits[c][t];
                let y = self.orbits[orbit]
                    .iter()
                    .copied()
                    .find(|&y| self.labels[y].2 == b)
                    .ok_or_else(|| {
                        Error::NotPrincipal("element moves an atom to another class".into())
                    })?;
                images[x] = y as u32;
            }
        }
        PartialBijection::from_images(&self.target, images)
    }

    /// Whether `theta` commutes with every `j(g)`.
    pub fn commutes(&self, theta: &PartialBijection) -> Result<bool> {
        for g in &self.generators {
            if theta.compose(g)? != g.compose(theta)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Uniform sampler on the permutations commuting with `j(G)`.
#[derive(Clone, Debug)]
pub struct CentralizerSampler {
    embedded: EmbeddedSemigroup,
    order: BigUint,
}

impl CentralizerSampler {
    pub fn new(embedded: &EmbeddedSemigroup) -> Self {
        let order = embedded
            .class_orbits
            .iter()
            .map(|o| factorial(o.len()))
            .product();
        CentralizerSampler {
            embedded: embedded.clone(),
            order,
        }
    }

    /// `∏_c (#orbits of class c)!`.
    pub fn order(&self) -> &BigUint {
        &self.order
    }

    pub fn embedded(&self) -> &EmbeddedSemigroup {
        &self.embedded
    }

    /// Permutes the copies within each class uniformly; each copy is carried
    /// to its image atom by atom.
    pub fn sample(&self, rng: &mut SampleRng) -> PartialBijection {
        let e = &self.embedded;
        let mut images = vec![UNDEF; e.labels.len()];
        for copies in &e.class_orbits {
            let mut shuffled = copies.clone();
            shuffled.shuffle(rng);
            for (&from, &to) in copies.iter().zip(&shuffled) {
                for (&x, &y) in e.orbits[from].iter().zip(&e.orbits[to]) {
                    images[x] = y as u32;
                }
            }
        }
        PartialBijection::from_raw(&e.target, images.into_boxed_slice())
    }
}

/// `count` independent centralizer elements; sample `i` uses stream `i`.
pub fn sample_centralizer(
    sampler: &CentralizerSampler,
    count: usize,
    seed: u64,
) -> Result<Vec<PartialBijection>> {
    (0..count)
        .map(|i| {
            let theta = sampler.sample(&mut stream(seed, i as u64));
            if sampler.embedded.commutes(&theta)? {
                Ok(theta)
            } else {
                Err(Error::NotInCentralizer)
            }
        })
        .collect()
}

/// Keeps the points `x` with `x` and `φ(x)` in the same orbit; returns the
/// restriction and its measure.
pub fn residual(phi: &PartialBijection, orbit_of: &[usize]) -> (PartialBijection, Rational) {
    let res = phi.restrict(|x| phi.apply(x).is_some_and(|y| orbit_of[x] == orbit_of[y]));
    let size = res.domain_measure();
    (res, size)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConcentrationResult {
    pub d: usize,
    pub samples: u64,
    pub passing: u64,
    /// `C·max_i(|Res φᵢ|, |Res ψᵢ|) + ε`.
    pub threshold: Rational,
    /// `passing/samples`, absent when no samples were drawn.
    pub fraction: Option<Rational>,
}

/// Fraction of sampled `θ` with
/// `|Res(φ₁θψ₁θ⁻¹ ⋯ φₙθψₙθ⁻¹)| < C·max_i(|Res φᵢ|, |Res ψᵢ|) + ε`.
pub fn concentration_experiment(
    phis: &[PartialBijection],
    psis: &[PartialBijection],
    embedded: &EmbeddedSemigroup,
    c: &Rational,
    eps: &Rational,
    samples: u64,
    seed: u64,
) -> Result<ConcentrationResult> {
    if phis.len() != psis.len() || phis.is_empty() {
        return Err(Error::Invalid(format!(
            "need equally many φ and ψ (got {} and {})",
            phis.len(),
            psis.len()
        )));
    }
    let orbit_of = embedded.orbit_of();
    let worst = phis
        .iter()
        .chain(psis)
        .map(|p| residual(p, orbit_of).1)
        .max()
        .unwrap_or_else(Rational::zero);
    let threshold = c * worst + eps;
    let sampler = CentralizerSampler::new(embedded);
    let passing: u64 = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<u64> {
            let theta = sampler.sample(&mut stream(seed, i));
            let theta_inv = theta.inverse();
            let mut word = PartialBijection::identity(embedded.target());
            for (phi, psi) in phis.iter().zip(psis) {
                word = word
                    .compose(phi)?
                    .compose(&theta)?
                    .compose(psi)?
                    .compose(&theta_inv)?;
            }
            Ok(u64::from(residual(&word, orbit_of).1 < threshold))
        })
        .collect::<Result<Vec<u64>>>()?
        .into_iter()
        .sum();
    Ok(ConcentrationResult {
        d: embedded.target().size(),
        samples,
        passing,
        threshold,
        fraction: (samples > 0).then(|| Rational::new(passing.into(), samples.into())),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

/// Letters are ball positions on one side; adjacent letters need not alternate.
pub type AlternatingWord = Vec<(Side, usize)>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhiTheta {
    pub values: Vec<PartialBijection>,
    /// Worst `|φ_θ(w) − φ_θ(w')|` where `w'` merges two adjacent same-side
    /// letters whose product lies in their ball.
    pub mult_defect: Rational,
    /// Worst `|tr φ_θ(w) − τ(w)|` when target traces are supplied.
    pub trace_defect: Option<Rational>,
}

/// One side of a φ_θ assembly: a ball and a microstate on it.
#[derive(Clone, Copy)]
pub struct SideData<'a> {
    pub ball: &'a SigmaBall,
    pub phi: &'a MicrostateAssignment,
}

/// `φ_θ(w) = ∏ tilde φ(letter)` with `tilde φ₁ = φ₁` and `tilde φ₂ = θφ₂θ⁻¹`.
/// `shared` lists elements of the common `G`; both sides must agree on them
/// and `θ` must commute with their values.
pub fn phi_theta(
    left: SideData<'_>,
    right: SideData<'_>,
    shared: &[PartialBijection],
    theta: &PartialBijection,
    words: &[AlternatingWord],
    target_traces: Option<&[Rational]>,
) -> Result<PhiTheta> {
    let target = left.phi.target.clone();
    for (k, g) in shared.iter().enumerate() {
        let (Some(i), Some(j)) = (left.ball.index_of(g), right.ball.index_of(g)) else {
            continue;
        };
        let (a, b) = (left.phi.value(i), right.phi.value(j));
        if a != b {
            return Err(Error::AnchorMismatch(k));
        }
        if theta.compose(a)? != a.compose(theta)? {
            return Err(Error::NotInCentralizer);
        }
    }
    let theta_inv = theta.inverse();
    let tilde = |side: Side, i: usize| -> Result<PartialBijection> {
        match side {
            Side::Left => Ok(left.phi.value(i).clone()),
            Side::Right => theta.compose(right.phi.value(i))?.compose(&theta_inv),
        }
    };
    let evaluate = |word: &[(Side, usize)]| -> Result<PartialBijection> {
        let mut acc = PartialBijection::identity(&target);
        for &(side, i) in word {
            acc = acc.compose(&tilde(side, i)?)?;
        }
        Ok(acc)
    };
    let mut values = Vec::with_capacity(words.len());
    let mut mult_defect = Rational::zero();
    for word in words {
        let value = evaluate(word)?;
        for k in 1..word.len() {
            let ((s1, i), (s2, j)) = (word[k - 1], word[k]);
            if s1 != s2 {
                continue;
            }
            let ball = if s1 == Side::Left {
                left.ball
            } else {
                right.ball
            };
            let Some(m) = ball.index_of(&ball.element(i).compose(ball.element(j))?) else {
                continue;
            };
            let mut merged = word[..k - 1].to_vec();
            merged.push((s1, m));
            merged.extend_from_slice(&word[k + 1..]);
            let gap = value.distance(&evaluate(&merged)?)?;
            if gap > mult_defect {
                mult_defect = gap;
            }
        }
        values.push(value);
    }
    let trace_defect = match target_traces {
        None => None,
        Some(taus) => {
            if taus.len() != values.len() {
                return Err(Error::MissingValue {
                    expected: values.len(),
                    got: taus.len(),
                });
            }
            Some(
                values
                    .iter()
                    .zip(taus)
                    .map(|(v, t)| crate::rational::abs_diff(&v.trace(), t))
                    .max()
                    .unwrap_or_else(Rational::zero),
            )
        }
    };
    Ok(PhiTheta {
        values,
        mult_defect,
        trace_defect,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitCheck {
    pub d: usize,
    /// `NSA_G(F₁ ∪ F₂)`.
    pub lhs: BigUint,
    pub left: BigUint,
    pub right: BigUint,
    pub centralizer_order: BigUint,
    /// `left · right · |[d]_G| / d!`.
    pub rhs: Rational,
    pub holds: bool,
}

/// `NSA_G(F₁∪F₂) ≤ NSA_G(F₁)·NSA_G(F₂)·|[d]_G|/d!` with exact counts.
pub fn splitting_check(
    left: &GeneratorSet,
    right: &GeneratorSet,
    anchor: &GeneratorSet,
    n: usize,
    tolerance: &Tolerance,
    d: usize,
    options: &CountOptions,
) -> Result<SplitCheck> {
    let exact = |report: crate::microstates::CountReport| -> Result<BigUint> {
        report
            .count
            .exact()
            .cloned()
            .ok_or_else(|| Error::Invalid("splitting check needs exhaustive counts".into()))
    };
    let options = CountOptions {
        samples: None,
        collect: false,
        ..options.clone()
    };
    let union = left.extended(right);
    let lhs = exact(count_g_anchored(&union, anchor, n, tolerance, d, &options)?)?;
    let l = exact(count_g_anchored(left, anchor, n, tolerance, d, &options)?)?;
    let r = exact(count_g_anchored(right, anchor, n, tolerance, d, &options)?)?;
    let g = Subsemigroup::generated_by(anchor, options.anchor_cap)?;
    let centralizer_order = count_embeddings(g.atom_relation(), d).centralizer_order;
    let d_fact = factorial(d);
    let holds = &lhs * &d_fact <= &l * &r * &centralizer_order;
    let rhs = Rational::new((&l * &r * &centralizer_order).into(), d_fact.into());
    Ok(SplitCheck {
        d,
        lhs,
        left: l,
        right: r,
        centralizer_order,
        rhs,
        holds,
    })
}

/// Cyclic shift `x ↦ x + k mod d`, fixed-point-free for `0 < k < d`.
pub fn cyclic_shift(d: usize, k: usize) -> PartialBijection {
    let target = Carrier::uniform(d);
    let images = (0..d)
        .map(|x| ((x + k) % d.max(1)) as u32)
        .collect::<Vec<_>>();
    PartialBijection::from_raw(&target, images.into_boxed_slice())
}

#[cfg(test)]
mod tests;
