//! Finite measured equivalence relations and their full pseudogroups.

mod ball;
mod subsemigroup;

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::pperm::{partial_injection_count, Carrier, PartialBijection, PartialInjections};
use crate::rational::Rational;

pub use ball::{
    is_dynamical_generating, sigma_ball, sigma_closure, word_ball, word_value, Letter, Provenance,
    SigmaBall, Word, WordBall, DEFAULT_BALL_CAP,
};
pub use subsemigroup::Subsemigroup;

pub const DEFAULT_PSEUDOGROUP_CAP: u64 = 1_000_000;

/// A measured equivalence relation on a finite weighted carrier.
#[derive(Clone, Debug)]
pub struct FinRelation {
    carrier: Arc<Carrier>,
    class_of: Vec<usize>,
    classes: Vec<Vec<usize>>,
    mu_k: BTreeMap<usize, Rational>,
    fd_measure: Rational,
}

/// Validates weights and a class partition and computes the
/// fundamental-domain data.
pub fn build_relation(weights: Vec<Rational>, partition: Vec<Vec<usize>>) -> Result<FinRelation> {
    let carrier = Carrier::new(weights)?;
    FinRelation::new(&carrier, partition)
}

impl FinRelation {
    pub fn new(carrier: &Arc<Carrier>, partition: Vec<Vec<usize>>) -> Result<Self> {
        let n = carrier.size();
        let mut class_of = vec![usize::MAX; n];
        for (c, class) in partition.iter().enumerate() {
            if class.is_empty() {
                return Err(Error::BadPartition(format!("class {c} is empty")));
            }
            for &x in class {
                if x >= n {
                    return Err(Error::BadPartition(format!(
                        "point {x} out of range (size {n})"
                    )));
                }
                if class_of[x] != usize::MAX {
                    return Err(Error::BadPartition(format!("point {x} appears twice")));
                }
                class_of[x] = c;
            }
            let w = carrier.weight(class[0]);
            if class.iter().any(|&x| carrier.weight(x) != w) {
                return Err(Error::UnequalClassWeights { class: c });
            }
        }
        if let Some(x) = class_of.iter().position(|&c| c == usize::MAX) {
            return Err(Error::BadPartition(format!("point {x} is in no class")));
        }
        let mut mu_k: BTreeMap<usize, Rational> = BTreeMap::new();
        for class in &partition {
            *mu_k.entry(class.len()).or_insert_with(Rational::zero) += carrier.weight(class[0]);
        }
        let fd_measure = mu_k.values().sum();
        Ok(FinRelation {
            carrier: carrier.clone(),
            class_of,
            classes: partition,
            mu_k,
            fd_measure,
        })
    }

    /// One class containing all `k` uniform points.
    pub fn full(k: usize) -> Self {
        Self::new(&Carrier::uniform(k), vec![(0..k).collect()]).expect("valid full relation")
    }

    /// Singleton classes over `k` uniform points.
    pub fn identity(k: usize) -> Self {
        Self::new(&Carrier::uniform(k), (0..k).map(|x| vec![x]).collect())
            .expect("valid identity relation")
    }

    pub fn carrier(&self) -> &Arc<Carrier> {
        &self.carrier
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn class_of(&self, x: usize) -> usize {
        self.class_of[x]
    }

    pub fn related(&self, x: usize, y: usize) -> bool {
        self.class_of[x] == self.class_of[y]
    }

    /// Class sizes as a sorted multiset.
    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes: Vec<_> = self.classes.iter().map(Vec::len).collect();
        sizes.sort_unstable();
        sizes
    }

    /// Cardinality `k` ↦ fundamental-domain measure of the cardinality-`k` classes.
    pub fn mu_k(&self) -> &BTreeMap<usize, Rational> {
        &self.mu_k
    }

    /// `μ(D)`.
    pub fn fd_measure(&self) -> &Rational {
        &self.fd_measure
    }

    /// Weight shared by the points of class `c`.
    pub fn class_weight(&self, c: usize) -> &Rational {
        self.carrier.weight(self.classes[c][0])
    }

    /// The first pair `(x, s(x))` leaving its class, if any.
    pub fn crossing_pair(&self, s: &PartialBijection) -> Option<(usize, usize)> {
        s.pairs().find(|&(x, y)| !self.related(x, y))
    }

    pub fn contains_graph(&self, s: &PartialBijection) -> bool {
        self.crossing_pair(s).is_none()
    }

    /// `|⟦R⟧|`, the product over classes of the partial-injection counts.
    pub fn pseudogroup_size(&self) -> BigUint {
        self.classes
            .iter()
            .map(|c| partial_injection_count(c.len()))
            .fold(BigUint::one(), |acc, x| acc * x)
    }

    /// All partial bijections whose graph lies in the relation, in the
    /// enumeration order of [`PartialInjections`].
    pub fn full_pseudogroup(&self, cap: u64) -> Result<Vec<PartialBijection>> {
        let size = self.pseudogroup_size();
        if size.to_u64().is_none_or(|s| s > cap) || self.carrier.size() >= 64 {
            return Err(Error::CapExceeded {
                what: "full pseudogroup",
                size,
                cap: cap.into(),
            });
        }
        let allowed = (0..self.carrier.size())
            .map(|x| {
                self.classes[self.class_of[x]]
                    .iter()
                    .fold(0u64, |m, &y| m | 1 << y)
            })
            .collect();
        Ok(PartialInjections::new(&self.carrier, allowed).collect())
    }
}

/// Named generators, each with graph inside the relation.
#[derive(Clone, Debug)]
pub struct GeneratorSet {
    carrier: Arc<Carrier>,
    names: Vec<String>,
    elements: Vec<PartialBijection>,
}

impl GeneratorSet {
    pub fn new(
        relation: &FinRelation,
        generators: Vec<(String, PartialBijection)>,
    ) -> Result<Self> {
        let mut names = Vec::with_capacity(generators.len());
        let mut elements = Vec::with_capacity(generators.len());
        for (name, s) in generators {
            if s.carrier() != relation.carrier() && **s.carrier() != **relation.carrier() {
                return Err(Error::CarrierMismatch);
            }
            if let Some((from, to)) = relation.crossing_pair(&s) {
                return Err(Error::CrossesClasses { name, from, to });
            }
            names.push(name);
            elements.push(s);
        }
        Ok(GeneratorSet {
            carrier: relation.carrier().clone(),
            names,
            elements,
        })
    }

    /// Generators named `s0, s1, …`.
    pub fn unnamed(relation: &FinRelation, elements: Vec<PartialBijection>) -> Result<Self> {
        Self::new(
            relation,
            elements
                .into_iter()
                .enumerate()
                .map(|(i, s)| (format!("s{i}"), s))
                .collect(),
        )
    }

    /// Generators already known to lie in some relation.
    pub(crate) fn from_parts(
        carrier: &Arc<Carrier>,
        generators: Vec<(String, PartialBijection)>,
    ) -> Self {
        let (names, elements) = generators.into_iter().unzip();
        GeneratorSet {
            carrier: carrier.clone(),
            names,
            elements,
        }
    }

    pub fn carrier(&self) -> &Arc<Carrier> {
        &self.carrier
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn elements(&self) -> &[PartialBijection] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&PartialBijection> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| &self.elements[i])
    }

    /// `F ∪ extra`, keeping the order of `self` first.
    pub fn extended(&self, extra: &GeneratorSet) -> GeneratorSet {
        let mut out = self.clone();
        for (name, s) in extra.names.iter().zip(&extra.elements) {
            out.names.push(name.clone());
            out.elements.push(s.clone());
        }
        out
    }

    /// `F_± = F ∪ F⁻¹ ∪ {1}` as values, in letter order.
    pub fn symmetrized(&self) -> Vec<PartialBijection> {
        Letter::alphabet(self.len())
            .into_iter()
            .map(|l| l.value(&self.carrier, &self.elements))
            .collect()
    }

    /// `cost(F) = Σ μ(dom s)`.
    pub fn cost(&self) -> Rational {
        cost(&self.elements)
    }
}

pub fn cost(elements: &[PartialBijection]) -> Rational {
    elements.iter().map(PartialBijection::domain_measure).sum()
}
