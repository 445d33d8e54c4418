//! Word balls `F_±^n` and their orthogonal-sum closures `ΣF_±^n`.
//!
//! Both are built breadth first in a fixed order so that every element
//! carries the first decomposition found: a list of words whose values
//! are pairwise orthogonal and sum to the element.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigUint;

use super::{FinRelation, GeneratorSet};
use crate::error::{Error, Result};
use crate::pperm::{generalized_sum, Carrier, PartialBijection};
use crate::rational::Rational;

/// A letter of `F_±`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Letter {
    Identity,
    Gen(usize),
    Inv(usize),
}

impl Letter {
    /// `1, s₀, …, s_{k−1}, s₀⁻¹, …, s_{k−1}⁻¹`.
    pub fn alphabet(generators: usize) -> Vec<Letter> {
        std::iter::once(Letter::Identity)
            .chain((0..generators).map(Letter::Gen))
            .chain((0..generators).map(Letter::Inv))
            .collect()
    }

    pub fn value(
        self,
        carrier: &Arc<Carrier>,
        generators: &[PartialBijection],
    ) -> PartialBijection {
        match self {
            Letter::Identity => PartialBijection::identity(carrier),
            Letter::Gen(g) => generators[g].clone(),
            Letter::Inv(g) => generators[g].inverse(),
        }
    }
}

pub type Word = Vec<Letter>;

/// Product of a word's letters, left to right: `ℓ₁ℓ₂⋯ℓ_k`.
pub fn word_value(
    carrier: &Arc<Carrier>,
    word: &[Letter],
    generators: &[PartialBijection],
) -> PartialBijection {
    word.iter()
        .fold(PartialBijection::identity(carrier), |acc, l| {
            acc.compose(&l.value(carrier, generators))
                .expect("same carrier")
        })
}

/// One witnessing decomposition: the element is the sum of the word values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub parts: Vec<Word>,
}

impl Provenance {
    /// Re-evaluates the decomposition against arbitrary generator values.
    /// Sums go through the generalized sum, so non-orthogonal values are
    /// handled.
    pub fn evaluate(
        &self,
        carrier: &Arc<Carrier>,
        generators: &[PartialBijection],
    ) -> PartialBijection {
        let parts: Vec<_> = self
            .parts
            .iter()
            .map(|w| word_value(carrier, w, generators))
            .collect();
        match parts.len() {
            1 => parts.into_iter().next().unwrap(),
            _ => generalized_sum(carrier, &parts).expect("same carrier"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct WordBall {
    pub radius: usize,
    pub elements: Vec<PartialBijection>,
    pub words: Vec<Word>,
}

/// All products of at most `n` letters of `F_±`, with the first word found.
pub fn word_ball(generators: &GeneratorSet, n: usize) -> Result<WordBall> {
    if n == 0 {
        return Err(Error::ZeroRadius);
    }
    Ok(grow_words(generators, Some(n)))
}

fn grow_words(generators: &GeneratorSet, radius: Option<usize>) -> WordBall {
    let carrier = generators.carrier();
    let alphabet = Letter::alphabet(generators.len());
    let letters: Vec<_> = alphabet
        .iter()
        .map(|l| l.value(carrier, generators.elements()))
        .collect();
    let mut elements = vec![PartialBijection::identity(carrier)];
    let mut words: Vec<Word> = vec![Vec::new()];
    let mut seen: HashMap<PartialBijection, usize> = HashMap::new();
    seen.insert(elements[0].clone(), 0);
    let mut length = 0;
    let mut frontier = 0..1;
    loop {
        if radius.is_some_and(|n| length == n) || frontier.is_empty() {
            break;
        }
        length += 1;
        let start = elements.len();
        for e in frontier.clone() {
            for (l, value) in alphabet.iter().zip(&letters) {
                let product = elements[e].compose(value).expect("same carrier");
                if !seen.contains_key(&product) {
                    seen.insert(product.clone(), elements.len());
                    let mut w = words[e].clone();
                    w.push(*l);
                    elements.push(product);
                    words.push(w);
                }
            }
        }
        frontier = start..elements.len();
    }
    WordBall {
        radius: radius.unwrap_or(length),
        elements,
        words,
    }
}

/// `ΣF_±^n`: every orthogonal sum of word-ball elements, in discovery order.
#[derive(Clone, Debug)]
pub struct SigmaBall {
    radius: usize,
    carrier: Arc<Carrier>,
    generators: Vec<PartialBijection>,
    elements: Vec<PartialBijection>,
    provenance: Vec<Provenance>,
    index: HashMap<PartialBijection, usize>,
}

pub const DEFAULT_BALL_CAP: usize = 1_000_000;

pub fn sigma_ball(generators: &GeneratorSet, n: usize, cap: usize) -> Result<SigmaBall> {
    let words = word_ball(generators, n)?;
    close_sums(generators, words, cap)
}

/// The Σ-closure of the union of all word balls (the fixed point in `n`).
pub fn sigma_closure(generators: &GeneratorSet, cap: usize) -> Result<SigmaBall> {
    close_sums(generators, grow_words(generators, None), cap)
}

fn close_sums(generators: &GeneratorSet, words: WordBall, cap: usize) -> Result<SigmaBall> {
    let carrier = generators.carrier().clone();
    let zero = PartialBijection::zero(&carrier);
    let mut ball = SigmaBall {
        radius: words.radius,
        carrier: carrier.clone(),
        generators: generators.elements().to_vec(),
        elements: vec![zero.clone()],
        provenance: vec![Provenance { parts: Vec::new() }],
        index: HashMap::from([(zero, 0)]),
    };
    let push = |ball: &mut SigmaBall, value: PartialBijection, parts: Vec<Word>| -> Result<bool> {
        if ball.index.contains_key(&value) {
            return Ok(false);
        }
        if ball.elements.len() >= cap {
            return Err(Error::CapExceeded {
                what: "sigma ball",
                size: BigUint::from(ball.elements.len() + 1),
                cap: cap.into(),
            });
        }
        ball.index.insert(value.clone(), ball.elements.len());
        ball.elements.push(value);
        ball.provenance.push(Provenance { parts });
        Ok(true)
    };
    let start = ball.elements.len();
    for (value, word) in words.elements.iter().zip(&words.words) {
        push(&mut ball, value.clone(), vec![word.clone()])?;
    }
    let nonzero: Vec<usize> = (0..words.elements.len())
        .filter(|&i| !words.elements[i].is_zero())
        .collect();
    let mut frontier = start..ball.elements.len();
    while !frontier.is_empty() {
        let next = ball.elements.len();
        for e in frontier.clone() {
            for &w in &nonzero {
                let part = &words.elements[w];
                if !ball.elements[e].is_orthogonal_to(part) {
                    continue;
                }
                let sum = ball.elements[e]
                    .pairs()
                    .chain(part.pairs())
                    .collect::<Vec<_>>();
                let value = PartialBijection::from_pairs(&carrier, &sum).expect("orthogonal parts");
                let mut parts = ball.provenance[e].parts.clone();
                parts.push(words.words[w].clone());
                push(&mut ball, value, parts)?;
            }
        }
        frontier = next..ball.elements.len();
    }
    Ok(ball)
}

impl SigmaBall {
    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn carrier(&self) -> &Arc<Carrier> {
        &self.carrier
    }

    /// Generator values the provenance words refer to.
    pub fn generators(&self) -> &[PartialBijection] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[PartialBijection] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &PartialBijection {
        &self.elements[i]
    }

    pub fn provenance(&self, i: usize) -> &Provenance {
        &self.provenance[i]
    }

    pub fn index_of(&self, s: &PartialBijection) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn contains(&self, s: &PartialBijection) -> bool {
        self.index.contains_key(s)
    }

    /// Ball position of generator `g`.
    pub fn generator_index(&self, g: usize) -> usize {
        self.index[&self.generators[g]]
    }

    pub fn identity_index(&self) -> usize {
        self.index[&PartialBijection::identity(&self.carrier)]
    }

    pub fn zero_index(&self) -> usize {
        0
    }

    /// `τ` of every element.
    pub fn traces(&self) -> Vec<Rational> {
        self.elements.iter().map(PartialBijection::trace).collect()
    }

    /// Triples `(i, j, k)` with `bᵢ bⱼ = b_k`.
    pub fn product_table(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for (i, a) in self.elements.iter().enumerate() {
            for (j, b) in self.elements.iter().enumerate() {
                let ab = a.compose(b).expect("same carrier");
                if let Some(k) = self.index_of(&ab) {
                    out.push((i, j, k));
                }
            }
        }
        out
    }
}

/// Decides whether the Σ-closure of all words in `F_±` is all of `⟦R⟧`.
pub fn is_dynamical_generating(
    generators: &GeneratorSet,
    relation: &FinRelation,
    cap: usize,
) -> Result<bool> {
    let size = relation.pseudogroup_size();
    if size > BigUint::from(cap) {
        return Err(Error::CapExceeded {
            what: "full pseudogroup",
            size,
            cap: cap.into(),
        });
    }
    let closure = sigma_closure(generators, cap)?;
    Ok(BigUint::from(closure.len()) == size)
}
