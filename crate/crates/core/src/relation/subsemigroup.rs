//! Finite unital inverse subsemigroups `G ⊂ ⟦R⟧` and their atom structure.

use std::sync::Arc;

use num_integer::Integer;
use num_traits::ToPrimitive;

use super::{sigma_closure, FinRelation, GeneratorSet};
use crate::error::{Error, Result};
use crate::pperm::{Carrier, PartialBijection};
use crate::rational::Rational;

/// The Σ-closure `G` of a generator set, with its minimal projections
/// grouped into classes of equivalent atoms.
#[derive(Clone, Debug)]
pub struct Subsemigroup {
    generators: GeneratorSet,
    elements: Vec<PartialBijection>,
    atoms: Vec<PartialBijection>,
    atom_relation: FinRelation,
}

impl Subsemigroup {
    pub fn generated_by(generators: &GeneratorSet, cap: usize) -> Result<Self> {
        let closure = sigma_closure(generators, cap)?;
        let elements = closure.elements().to_vec();
        let projections: Vec<&PartialBijection> = elements
            .iter()
            .filter(|e| e.is_projection() && !e.is_zero())
            .collect();
        let atoms: Vec<PartialBijection> = projections
            .iter()
            .filter(|p| {
                !projections
                    .iter()
                    .any(|q| q.domain_len() < p.domain_len() && q.is_restriction_of(p))
            })
            .map(|p| (*p).clone())
            .collect();

        let mut covered = vec![false; generators.carrier().size()];
        for a in &atoms {
            for x in a.domain() {
                if covered[x] {
                    return Err(Error::NotPrincipal("atoms overlap".into()));
                }
                covered[x] = true;
            }
        }
        if covered.iter().any(|c| !c) {
            return Err(Error::NotPrincipal("atoms do not cover the carrier".into()));
        }

        // atoms p ~ q iff some g ∈ G has source p and range q
        let n = atoms.len();
        let mut class = (0..n).collect::<Vec<_>>();
        for g in &elements {
            let src = g.source_projection();
            let ran = g.range_projection();
            let (Some(i), Some(j)) = (
                atoms.iter().position(|a| *a == src),
                atoms.iter().position(|a| *a == ran),
            ) else {
                continue;
            };
            let (ci, cj) = (class[i], class[j]);
            if ci != cj {
                class.iter_mut().filter(|c| **c == cj).for_each(|c| *c = ci);
            }
        }
        let mut partition: Vec<Vec<usize>> = Vec::new();
        let mut label = vec![usize::MAX; n];
        for i in 0..n {
            if label[class[i]] == usize::MAX {
                label[class[i]] = partition.len();
                partition.push(Vec::new());
            }
            partition[label[class[i]]].push(i);
        }
        let weights: Vec<Rational> = atoms.iter().map(PartialBijection::domain_measure).collect();
        let atom_carrier: Arc<Carrier> = Carrier::new(weights)?;
        let atom_relation = FinRelation::new(&atom_carrier, partition)
            .map_err(|e| Error::NotPrincipal(format!("atom classes: {e}")))?;
        if atom_relation.pseudogroup_size().to_usize() != Some(elements.len()) {
            return Err(Error::NotPrincipal(format!(
                "{} elements, but the atom relation has {} partial bijections",
                elements.len(),
                atom_relation.pseudogroup_size()
            )));
        }
        Ok(Subsemigroup {
            generators: generators.clone(),
            elements,
            atoms,
            atom_relation,
        })
    }

    /// `G = {0, 1}`.
    pub fn trivial(relation: &FinRelation) -> Self {
        let gens = GeneratorSet::new(relation, Vec::new()).expect("empty generator set");
        Self::generated_by(&gens, 4).expect("trivial semigroup is principal")
    }

    pub fn generators(&self) -> &GeneratorSet {
        &self.generators
    }

    pub fn elements(&self) -> &[PartialBijection] {
        &self.elements
    }

    pub fn atoms(&self) -> &[PartialBijection] {
        &self.atoms
    }

    /// `G` as the full pseudogroup of a relation on its atoms, each atom
    /// weighted by its trace.
    pub fn atom_relation(&self) -> &FinRelation {
        &self.atom_relation
    }

    /// Smallest `m` such that `d·τ(p)` is an integer for every atom `p`
    /// whenever `m | d`.
    pub fn required_divisor(&self) -> usize {
        self.atom_relation
            .carrier()
            .weights()
            .iter()
            .fold(1usize, |acc, w| {
                acc.lcm(&w.denom().to_usize().unwrap_or(usize::MAX))
            })
    }

    pub fn check_divisibility(&self, d: usize) -> Result<()> {
        let divisor = self.required_divisor();
        if d.is_multiple_of(divisor) {
            Ok(())
        } else {
            Err(Error::Divisibility { d, divisor })
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.atoms.len() == 1 && self.atoms[0].is_identity()
    }
}
