//! Partial bijections of a finite weighted carrier.
//!
//! A [`PartialBijection`] is an element of the inverse semigroup of partial
//! injections of a [`Carrier`]. Composition follows the right-to-left
//! convention: `s.compose(&t)` is `x ↦ s(t(x))` on `t⁻¹(ran t ∩ dom s)`.
//! Traces and distances are exact rationals weighted by the carrier.

mod enumerate;

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{format_rational, from_int, Rational};

pub use enumerate::{
    enumerate_all, partial_injection_count, PartialInjections, DEFAULT_ENUMERATION_CAP,
};

/// Marker for "undefined" in an image table.
pub const UNDEF: u32 = u32::MAX;

/// A finite point set with positive rational weights summing to one.
#[derive(Clone, PartialEq, Eq)]
pub struct Carrier {
    weights: Vec<Rational>,
    uniform: bool,
}

impl Carrier {
    pub fn new(weights: Vec<Rational>) -> Result<Arc<Self>> {
        if weights.is_empty() {
            return Err(Error::BadWeights("carrier has no points".into()));
        }
        if let Some(i) = weights.iter().position(|w| *w <= Rational::zero()) {
            return Err(Error::BadWeights(format!(
                "point {i} has non-positive weight {}",
                format_rational(&weights[i])
            )));
        }
        let total: Rational = weights.iter().sum();
        if !total.is_one() {
            return Err(Error::BadWeights(format!(
                "weights sum to {}",
                format_rational(&total)
            )));
        }
        let uniform = weights.iter().all(|w| *w == weights[0]);
        Ok(Arc::new(Carrier { weights, uniform }))
    }

    /// `d` points of weight `1/d`.
    pub fn uniform(d: usize) -> Arc<Self> {
        assert!(d > 0, "uniform carrier needs at least one point");
        let w = Rational::new(1.into(), (d as i64).into());
        Arc::new(Carrier {
            weights: vec![w; d],
            uniform: true,
        })
    }

    pub fn size(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn weight(&self, point: usize) -> &Rational {
        &self.weights[point]
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    /// Measure of a set of points given by an iterator of distinct indices.
    pub fn measure<I: IntoIterator<Item = usize>>(&self, points: I) -> Rational {
        if self.uniform {
            let count = points.into_iter().count();
            return from_int(count) * &self.weights[0];
        }
        points.into_iter().map(|x| &self.weights[x]).sum()
    }
}

impl fmt::Debug for Carrier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.uniform {
            write!(f, "uniform({})", self.size())
        } else {
            let ws: Vec<_> = self.weights.iter().map(format_rational).collect();
            write!(f, "Carrier{ws:?}")
        }
    }
}

fn same_carrier(a: &Arc<Carrier>, b: &Arc<Carrier>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// A partial injective map of a carrier into itself.
#[derive(Clone)]
pub struct PartialBijection {
    carrier: Arc<Carrier>,
    images: Box<[u32]>,
}

impl PartialBijection {
    /// The empty map `0`.
    pub fn zero(carrier: &Arc<Carrier>) -> Self {
        PartialBijection {
            carrier: carrier.clone(),
            images: vec![UNDEF; carrier.size()].into_boxed_slice(),
        }
    }

    /// The identity `1`.
    pub fn identity(carrier: &Arc<Carrier>) -> Self {
        PartialBijection {
            carrier: carrier.clone(),
            images: (0..carrier.size() as u32).collect(),
        }
    }

    /// Builds from an image table; `UNDEF` marks points outside the domain.
    pub fn from_images(carrier: &Arc<Carrier>, images: Vec<u32>) -> Result<Self> {
        let n = carrier.size();
        if images.len() != n {
            return Err(Error::Invalid(format!(
                "image table has length {}, carrier has {n} points",
                images.len()
            )));
        }
        let mut seen = vec![false; n];
        for (x, &y) in images.iter().enumerate() {
            if y == UNDEF {
                continue;
            }
            let y = y as usize;
            if y >= n {
                return Err(Error::PointOutOfRange { point: y, size: n });
            }
            if seen[y] {
                return Err(Error::NotInjective(format!(
                    "point {y} hit twice (second from {x})"
                )));
            }
            seen[y] = true;
        }
        Ok(PartialBijection {
            carrier: carrier.clone(),
            images: images.into_boxed_slice(),
        })
    }

    /// Builds from explicit `(x, s(x))` pairs.
    pub fn from_pairs(carrier: &Arc<Carrier>, pairs: &[(usize, usize)]) -> Result<Self> {
        let n = carrier.size();
        let mut images = vec![UNDEF; n];
        for &(x, y) in pairs {
            if x >= n {
                return Err(Error::PointOutOfRange { point: x, size: n });
            }
            if images[x] != UNDEF {
                return Err(Error::NotInjective(format!("point {x} has two images")));
            }
            images[x] = y as u32;
        }
        Self::from_images(carrier, images)
    }

    /// The identity on `points`.
    pub fn projection<I: IntoIterator<Item = usize>>(
        carrier: &Arc<Carrier>,
        points: I,
    ) -> Result<Self> {
        let pairs: Vec<_> = points.into_iter().map(|x| (x, x)).collect();
        Self::from_pairs(carrier, &pairs)
    }

    pub(crate) fn from_raw(carrier: &Arc<Carrier>, images: Box<[u32]>) -> Self {
        debug_assert_eq!(images.len(), carrier.size());
        PartialBijection {
            carrier: carrier.clone(),
            images,
        }
    }

    pub fn carrier(&self) -> &Arc<Carrier> {
        &self.carrier
    }

    pub fn images(&self) -> &[u32] {
        &self.images
    }

    pub fn apply(&self, x: usize) -> Option<usize> {
        match self.images[x] {
            UNDEF => None,
            y => Some(y as usize),
        }
    }

    pub fn domain(&self) -> impl Iterator<Item = usize> + '_ {
        self.images
            .iter()
            .enumerate()
            .filter(|(_, &y)| y != UNDEF)
            .map(|(x, _)| x)
    }

    pub fn range(&self) -> impl Iterator<Item = usize> + '_ {
        self.images
            .iter()
            .filter(|&&y| y != UNDEF)
            .map(|&y| y as usize)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.images
            .iter()
            .enumerate()
            .filter(|(_, &y)| y != UNDEF)
            .map(|(x, &y)| (x, y as usize))
    }

    pub fn domain_len(&self) -> usize {
        self.images.iter().filter(|&&y| y != UNDEF).count()
    }

    pub fn is_zero(&self) -> bool {
        self.images.iter().all(|&y| y == UNDEF)
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(x, &y)| y == x as u32)
    }

    pub fn is_projection(&self) -> bool {
        self.images
            .iter()
            .enumerate()
            .all(|(x, &y)| y == UNDEF || y == x as u32)
    }

    pub fn is_permutation(&self) -> bool {
        self.images.iter().all(|&y| y != UNDEF)
    }

    fn check_carrier(&self, other: &Self) -> Result<()> {
        if same_carrier(&self.carrier, &other.carrier) {
            Ok(())
        } else {
            Err(Error::CarrierMismatch)
        }
    }

    /// `self ∘ t`.
    pub fn compose(&self, t: &Self) -> Result<Self> {
        self.check_carrier(t)?;
        let images = t
            .images
            .iter()
            .map(|&y| {
                if y == UNDEF {
                    UNDEF
                } else {
                    self.images[y as usize]
                }
            })
            .collect();
        Ok(Self::from_raw(&self.carrier, images))
    }

    pub fn inverse(&self) -> Self {
        let mut images = vec![UNDEF; self.images.len()];
        for (x, &y) in self.images.iter().enumerate() {
            if y != UNDEF {
                images[y as usize] = x as u32;
            }
        }
        Self::from_raw(&self.carrier, images.into_boxed_slice())
    }

    /// `s⁻¹s`, the identity on the domain.
    pub fn source_projection(&self) -> Self {
        let images = self
            .images
            .iter()
            .enumerate()
            .map(|(x, &y)| if y == UNDEF { UNDEF } else { x as u32 })
            .collect();
        Self::from_raw(&self.carrier, images)
    }

    /// `ss⁻¹`, the identity on the range.
    pub fn range_projection(&self) -> Self {
        let mut images = vec![UNDEF; self.images.len()];
        for &y in self.images.iter().filter(|&&y| y != UNDEF) {
            images[y as usize] = y;
        }
        Self::from_raw(&self.carrier, images.into_boxed_slice())
    }

    /// `1 − p` for a projection `p`: the identity off the domain.
    pub fn complement_projection(&self) -> Self {
        let images = self
            .images
            .iter()
            .enumerate()
            .map(|(x, &y)| if y == UNDEF { x as u32 } else { UNDEF })
            .collect();
        Self::from_raw(&self.carrier, images)
    }

    /// Restriction of `self` to the points where `keep` holds.
    pub fn restrict<F: FnMut(usize) -> bool>(&self, mut keep: F) -> Self {
        let images = self
            .images
            .iter()
            .enumerate()
            .map(|(x, &y)| if y != UNDEF && keep(x) { y } else { UNDEF })
            .collect();
        Self::from_raw(&self.carrier, images)
    }

    /// `self ≤ other`: `self` is a restriction of `other`.
    pub fn is_restriction_of(&self, other: &Self) -> bool {
        same_carrier(&self.carrier, &other.carrier)
            && self
                .images
                .iter()
                .zip(other.images.iter())
                .all(|(&a, &b)| a == UNDEF || a == b)
    }

    /// Disjoint domains and disjoint ranges.
    pub fn is_orthogonal_to(&self, other: &Self) -> bool {
        let n = self.images.len();
        let mut hit = vec![false; n];
        for &y in self.images.iter().filter(|&&y| y != UNDEF) {
            hit[y as usize] = true;
        }
        self.images
            .iter()
            .zip(other.images.iter())
            .all(|(&a, &b)| a == UNDEF || b == UNDEF)
            && other.images.iter().all(|&y| y == UNDEF || !hit[y as usize])
    }

    pub fn fixed_count(&self) -> usize {
        self.images
            .iter()
            .enumerate()
            .filter(|(x, &y)| y == *x as u32)
            .count()
    }

    /// `τ(s)`: measure of the fixed-point set.
    pub fn trace(&self) -> Rational {
        self.carrier.measure(
            self.images
                .iter()
                .enumerate()
                .filter(|(x, &y)| y == *x as u32)
                .map(|(x, _)| x),
        )
    }

    /// `μ(dom s)`.
    pub fn domain_measure(&self) -> Rational {
        self.carrier.measure(self.domain())
    }

    /// Number of points where the two maps disagree; two undefined values agree.
    pub fn mismatch_count(&self, t: &Self) -> usize {
        self.images
            .iter()
            .zip(t.images.iter())
            .filter(|(a, b)| a != b)
            .count()
    }

    /// `|s − t|`, the measure of the disagreement set.
    pub fn distance(&self, t: &Self) -> Result<Rational> {
        self.check_carrier(t)?;
        Ok(self.carrier.measure(
            self.images
                .iter()
                .zip(t.images.iter())
                .enumerate()
                .filter(|(_, (a, b))| a != b)
                .map(|(x, _)| x),
        ))
    }
}

impl PartialEq for PartialBijection {
    fn eq(&self, other: &Self) -> bool {
        self.images == other.images && same_carrier(&self.carrier, &other.carrier)
    }
}

impl Eq for PartialBijection {}

impl Hash for PartialBijection {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.images.hash(state);
    }
}

impl fmt::Debug for PartialBijection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (x, y)) in self.pairs().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}→{y}")?;
        }
        f.write_str("}")
    }
}

/// Sum of pairwise orthogonal parts. The empty sum is `0`.
pub fn orthogonal_sum(
    carrier: &Arc<Carrier>,
    parts: &[PartialBijection],
) -> Result<PartialBijection> {
    let n = carrier.size();
    let mut images = vec![UNDEF; n];
    let mut dom_owner = vec![usize::MAX; n];
    let mut ran_owner = vec![usize::MAX; n];
    for (i, part) in parts.iter().enumerate() {
        if !same_carrier(carrier, &part.carrier) {
            return Err(Error::CarrierMismatch);
        }
        for (x, y) in part.pairs() {
            for owner in [dom_owner[x], ran_owner[y]] {
                if owner != usize::MAX {
                    return Err(Error::Overlap {
                        first: owner,
                        second: i,
                    });
                }
            }
            dom_owner[x] = i;
            ran_owner[y] = i;
            images[x] = y as u32;
        }
    }
    Ok(PartialBijection::from_raw(
        carrier,
        images.into_boxed_slice(),
    ))
}

/// The projection `π_i(s₁,…,s_k)`: points of `dom sᵢ` lying outside every
/// other domain and mapped by `sᵢ` outside every other range.
pub fn pi_projection(
    carrier: &Arc<Carrier>,
    parts: &[PartialBijection],
    i: usize,
) -> Result<PartialBijection> {
    let (dom_cover, ran_cover) = coverage(carrier, parts)?;
    let own = &parts[i];
    let images = own
        .images
        .iter()
        .enumerate()
        .map(|(x, &y)| {
            let solo = y != UNDEF && dom_cover[x] == 1 && ran_cover[y as usize] == 1;
            if solo {
                x as u32
            } else {
                UNDEF
            }
        })
        .collect();
    Ok(PartialBijection::from_raw(carrier, images))
}

fn coverage(carrier: &Arc<Carrier>, parts: &[PartialBijection]) -> Result<(Vec<u32>, Vec<u32>)> {
    let n = carrier.size();
    let mut dom_cover = vec![0u32; n];
    let mut ran_cover = vec![0u32; n];
    for part in parts {
        if !same_carrier(carrier, &part.carrier) {
            return Err(Error::CarrierMismatch);
        }
        for (x, y) in part.pairs() {
            dom_cover[x] += 1;
            ran_cover[y] += 1;
        }
    }
    Ok((dom_cover, ran_cover))
}

/// Sum of arbitrary parts: each `sᵢ` contributes on its `π_i` projection.
/// Agrees with [`orthogonal_sum`] on orthogonal input.
pub fn generalized_sum(
    carrier: &Arc<Carrier>,
    parts: &[PartialBijection],
) -> Result<PartialBijection> {
    let (dom_cover, ran_cover) = coverage(carrier, parts)?;
    let mut images = vec![UNDEF; carrier.size()];
    for part in parts {
        for (x, y) in part.pairs() {
            if dom_cover[x] == 1 && ran_cover[y] == 1 {
                images[x] = y as u32;
            }
        }
    }
    Ok(PartialBijection::from_raw(
        carrier,
        images.into_boxed_slice(),
    ))
}
