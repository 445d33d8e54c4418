//! Seeded randomness: one independent stream per sample index, so results
//! do not depend on how samples are spread over workers.

use std::sync::Arc;

use num_bigint::BigUint;
use num_integer::binomial;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::pperm::{partial_injection_count, Carrier, PartialBijection, UNDEF};

pub type SampleRng = ChaCha8Rng;

/// Generator for sample `index` of a run seeded with `seed`.
pub fn stream(seed: u64, index: u64) -> SampleRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform integer in `[0, n)` by rejection on the bit length of `n`.
pub fn uniform_below<R: Rng + ?Sized>(n: &BigUint, rng: &mut R) -> BigUint {
    assert!(!n.is_zero(), "empty range");
    let bits = n.bits();
    let bytes = bits.div_ceil(8) as usize;
    let spare = (bytes as u64 * 8 - bits) as u32;
    let mut buf = vec![0u8; bytes];
    loop {
        rng.fill_bytes(&mut buf);
        buf[bytes - 1] &= 0xffu8 >> spare;
        let candidate = BigUint::from_bytes_le(&buf);
        if &candidate < n {
            return candidate;
        }
    }
}

/// Uniform random permutation of `[d]`.
pub fn random_permutation<R: Rng + ?Sized>(
    carrier: &Arc<Carrier>,
    rng: &mut R,
) -> PartialBijection {
    let mut images: Vec<u32> = (0..carrier.size() as u32).collect();
    images.shuffle(rng);
    PartialBijection::from_raw(carrier, images.into_boxed_slice())
}

/// Uniform random element of `⟦d⟧`.
pub fn random_partial_injection<R: Rng + ?Sized>(
    carrier: &Arc<Carrier>,
    rng: &mut R,
) -> PartialBijection {
    let d = carrier.size();
    let mut r = uniform_below(&partial_injection_count(d), rng);
    let mut factorial = BigUint::one();
    let mut j = 0;
    loop {
        let c = binomial(BigUint::from(d), BigUint::from(j));
        let weight = &c * &c * &factorial;
        if r < weight {
            break;
        }
        r -= weight;
        j += 1;
        factorial *= BigUint::from(j);
    }
    let mut points: Vec<u32> = (0..d as u32).collect();
    points.shuffle(rng);
    let domain = points[..j].to_vec();
    points.shuffle(rng);
    let mut images = vec![UNDEF; d];
    for (x, y) in domain.into_iter().zip(&points[..j]) {
        images[x as usize] = *y;
    }
    PartialBijection::from_raw(carrier, images.into_boxed_slice())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn uniform_below_stays_in_range() {
        let mut rng = stream(7, 0);
        let n = BigUint::from(1000u32);
        for _ in 0..500 {
            assert!(uniform_below(&n, &mut rng) < n);
        }
    }

    #[test]
    fn streams_are_reproducible() {
        let c = Carrier::uniform(6);
        let a = random_partial_injection(&c, &mut stream(3, 9));
        let b = random_partial_injection(&c, &mut stream(3, 9));
        assert_eq!(a, b);
    }

    #[test]
    fn partial_injections_are_roughly_uniform() {
        let c = Carrier::uniform(2);
        let mut rng = stream(1, 0);
        let mut seen: HashMap<PartialBijection, usize> = HashMap::new();
        for _ in 0..7000 {
            *seen
                .entry(random_partial_injection(&c, &mut rng))
                .or_default() += 1;
        }
        assert_eq!(seen.len(), 7);
        assert!(seen.values().all(|&k| (800..1200).contains(&k)), "{seen:?}");
    }
}
