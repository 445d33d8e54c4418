//! Covering numbers of restriction sets under `|φ − ψ|_F = max_s |φ(s) − ψ(s)|`.

use num_traits::Zero;

use super::count::Restriction;
use crate::error::Result;
use crate::rational::{from_int, Rational};

/// Largest set covered by exhaustive search; larger sets get a greedy bound.
pub const EXACT_COVER_LIMIT: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Covering {
    pub size: usize,
    /// False when `size` is only a greedy upper bound.
    pub exact: bool,
    /// Indices of the chosen centres.
    pub centers: Vec<usize>,
}

pub fn restriction_distance(
    a: &[crate::PartialBijection],
    b: &[crate::PartialBijection],
) -> Result<Rational> {
    let mut worst = Rational::zero();
    for (s, t) in a.iter().zip(b) {
        let dist = s.distance(t)?;
        if dist > worst {
            worst = dist;
        }
    }
    Ok(worst)
}

/// Minimal number of open `ε`-balls centred in the set that cover it.
pub fn covering_number(restrictions: &[Restriction], eps: &Rational) -> Result<Covering> {
    let m = restrictions.len();
    let uniform = restrictions
        .first()
        .and_then(|r| r.first())
        .map(|s| s.carrier().clone());
    let near_pair: Box<dyn Fn(usize, usize) -> Result<bool>> = match uniform {
        Some(c) if c.is_uniform() && restrictions.iter().flatten().all(|s| *s.carrier() == c) => {
            // on a uniform carrier |s − t| < ε iff the mismatch count is below ⌈εd⌉
            let d = c.size();
            let limit = (0..=d)
                .take_while(|&k| from_int(k) / from_int(d) < *eps)
                .count();
            Box::new(move |i, j| {
                Ok(restrictions[i]
                    .iter()
                    .zip(&restrictions[j])
                    .all(|(s, t)| s.mismatch_count(t) < limit))
            })
        }
        _ => Box::new(|i, j| Ok(restriction_distance(&restrictions[i], &restrictions[j])? < *eps)),
    };
    let mut near = vec![vec![false; m]; m];
    let mut isolated = true;
    #[allow(clippy::needless_range_loop)]
    for i in 0..m {
        near[i][i] = true;
        for j in i + 1..m {
            if near_pair(i, j)? {
                near[i][j] = true;
                near[j][i] = true;
                isolated = false;
            }
        }
    }
    if isolated {
        return Ok(Covering {
            size: m,
            exact: true,
            centers: (0..m).collect(),
        });
    }
    if m <= EXACT_COVER_LIMIT {
        Ok(exact_cover(&near))
    } else {
        Ok(greedy_cover(&near))
    }
}

fn exact_cover(near: &[Vec<bool>]) -> Covering {
    let m = near.len();
    if m == 0 {
        return Covering {
            size: 0,
            exact: true,
            centers: Vec::new(),
        };
    }
    let full: u32 = if m == 32 { u32::MAX } else { (1u32 << m) - 1 };
    let reach: Vec<u32> = near
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .fold(0, |acc, (j, _)| acc | 1 << j)
        })
        .collect();
    for k in 1..=m {
        let mut chosen = Vec::with_capacity(k);
        if choose(&reach, full, k, 0, &mut chosen) {
            return Covering {
                size: k,
                exact: true,
                centers: chosen,
            };
        }
    }
    unreachable!("every point covers itself")
}

fn choose(reach: &[u32], full: u32, k: usize, covered: u32, chosen: &mut Vec<usize>) -> bool {
    if covered == full {
        return true;
    }
    if chosen.len() == k {
        return false;
    }
    // some chosen centre has to cover the lowest uncovered point
    let target = (!covered & full).trailing_zeros();
    for (c, &r) in reach.iter().enumerate() {
        if r >> target & 1 == 1 {
            chosen.push(c);
            if choose(reach, full, k, covered | r, chosen) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}

fn greedy_cover(near: &[Vec<bool>]) -> Covering {
    let m = near.len();
    let mut covered = vec![false; m];
    let mut centers = Vec::new();
    while covered.iter().any(|c| !c) {
        let best = (0..m)
            .max_by_key(|&c| {
                (
                    near[c]
                        .iter()
                        .zip(&covered)
                        .filter(|(&n, &cv)| n && !cv)
                        .count(),
                    std::cmp::Reverse(c),
                )
            })
            .expect("nonempty");
        for j in 0..m {
            covered[j] |= near[best][j];
        }
        centers.push(best);
    }
    Covering {
        size: centers.len(),
        exact: false,
        centers,
    }
}
