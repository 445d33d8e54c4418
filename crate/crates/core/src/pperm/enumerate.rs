//! Deterministic enumeration of partial injections.
//!
//! Order: by domain bitmask ascending (bit `x` set iff `x ∈ dom`), then by
//! the image tuple of the domain points (ascending point order)
//! lexicographically.

use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use super::{Carrier, PartialBijection, UNDEF};
use crate::error::{Error, Result};

pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

/// `Σ_j C(d,j)²·j!`, the number of partial injections of a `d`-set.
pub fn partial_injection_count(d: usize) -> BigUint {
    let mut total = BigUint::zero();
    // term_j = C(d,j)^2 j! ; term_{j+1} = term_j * (d-j)^2 / (j+1)
    let mut term = BigUint::one();
    for j in 0..=d {
        total += &term;
        if j < d {
            term = term * BigUint::from((d - j) * (d - j)) / BigUint::from(j + 1);
        }
    }
    total
}

/// Iterator over partial injections whose point `x` may only map into the
/// bit set `allowed[x]`.
pub struct PartialInjections {
    carrier: Arc<Carrier>,
    allowed: Vec<u64>,
    next_mask: u64,
    end_mask: u64,
    buffer: Vec<Box<[u32]>>,
    cursor: usize,
}

impl PartialInjections {
    pub fn new(carrier: &Arc<Carrier>, allowed: Vec<u64>) -> Self {
        let d = carrier.size();
        assert!(d < 64, "enumeration supports fewer than 64 points");
        assert_eq!(allowed.len(), d);
        PartialInjections {
            carrier: carrier.clone(),
            allowed,
            next_mask: 0,
            end_mask: 1u64 << d,
            buffer: Vec::new(),
            cursor: 0,
        }
    }

    /// Every point may map anywhere.
    pub fn full(carrier: &Arc<Carrier>) -> Self {
        let d = carrier.size();
        let all = if d == 64 { u64::MAX } else { (1u64 << d) - 1 };
        Self::new(carrier, vec![all; d])
    }

    /// Domain masks in enumeration order; used to partition work.
    pub fn mask_count(&self) -> u64 {
        self.end_mask
    }

    /// All maps with domain exactly `mask`, in enumeration order.
    pub fn with_domain(&self, mask: u64) -> Vec<Box<[u32]>> {
        let d = self.carrier.size();
        let domain: Vec<usize> = (0..d).filter(|&x| mask >> x & 1 == 1).collect();
        let mut out = Vec::new();
        let mut images = vec![UNDEF; d];
        fill(&domain, 0, &self.allowed, 0, &mut images, &mut out);
        out
    }
}

fn fill(
    domain: &[usize],
    depth: usize,
    allowed: &[u64],
    used: u64,
    images: &mut Vec<u32>,
    out: &mut Vec<Box<[u32]>>,
) {
    if depth == domain.len() {
        out.push(images.clone().into_boxed_slice());
        return;
    }
    let x = domain[depth];
    let mut free = allowed[x] & !used;
    while free != 0 {
        let y = free.trailing_zeros();
        free &= free - 1;
        images[x] = y;
        fill(domain, depth + 1, allowed, used | 1u64 << y, images, out);
    }
    images[x] = UNDEF;
}

impl Iterator for PartialInjections {
    type Item = PartialBijection;

    fn next(&mut self) -> Option<PartialBijection> {
        while self.cursor == self.buffer.len() {
            if self.next_mask == self.end_mask {
                return None;
            }
            self.buffer = self.with_domain(self.next_mask);
            self.cursor = 0;
            self.next_mask += 1;
        }
        let images = std::mem::take(&mut self.buffer[self.cursor]);
        self.cursor += 1;
        Some(PartialBijection::from_raw(&self.carrier, images))
    }
}

/// Every element of `⟦d⟧` exactly once, refusing when the total exceeds `cap`.
pub fn enumerate_all(carrier: &Arc<Carrier>, cap: u64) -> Result<PartialInjections> {
    let size = partial_injection_count(carrier.size());
    if size.to_u64().is_none_or(|s| s > cap) || carrier.size() >= 64 {
        return Err(Error::CapExceeded {
            what: "partial injections",
            size,
            cap: cap.into(),
        });
    }
    Ok(PartialInjections::full(carrier))
}
