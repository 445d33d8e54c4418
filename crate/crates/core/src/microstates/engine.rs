//! Allocation-free evaluation of canonical extensions on raw image tables.

use num_traits::Zero;

use super::Tolerance;
use crate::pperm::UNDEF;
use crate::rational::{abs_diff, Rational};
use crate::relation::{Letter, SigmaBall};

pub(crate) fn compose_into(a: &[u32], b: &[u32], out: &mut [u32]) {
    for (o, &y) in out.iter_mut().zip(b) {
        *o = if y == UNDEF { UNDEF } else { a[y as usize] };
    }
}

pub(crate) fn inverse_into(a: &[u32], out: &mut [u32]) {
    out.fill(UNDEF);
    for (x, &y) in a.iter().enumerate() {
        if y != UNDEF {
            out[y as usize] = x as u32;
        }
    }
}

pub(crate) fn fixed_count(a: &[u32]) -> usize {
    a.iter()
        .enumerate()
        .filter(|(x, &y)| y == *x as u32)
        .count()
}

pub(crate) fn mismatch_count(a: &[u32], b: &[u32]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Precomputed defect test for one ball, target size and tolerance.
pub(crate) struct Engine {
    pub d: usize,
    generators: usize,
    programs: Vec<Vec<Vec<Letter>>>,
    /// `trace_ok[i][f]`: may element `i` have `f` fixed points.
    pub trace_ok: Vec<Vec<bool>>,
    /// `(i, j, k, rigid)`: `bᵢbⱼ = b_k`; rigid triples must hold exactly.
    pub triples: Vec<(usize, usize, usize, bool)>,
    /// Mismatch counts below this bound pass a non-rigid triple.
    pub mult_limit: usize,
    /// Ball positions that must reproduce the generator values.
    generator_index: Vec<usize>,
}

pub(crate) struct Scratch {
    letters: Vec<Vec<u32>>,
    pub values: Vec<Vec<u32>>,
    parts: Vec<Vec<u32>>,
    acc: Vec<u32>,
    tmp: Vec<u32>,
    dom: Vec<u32>,
    ran: Vec<u32>,
}

impl Engine {
    /// `rigid[i]` marks elements whose trace and products (with other rigid
    /// elements) must be exact regardless of the tolerance.
    pub fn new(ball: &SigmaBall, d: usize, tolerance: &Tolerance, rigid: Option<&[bool]>) -> Self {
        let taus = ball.traces();
        let d_rat = Rational::from_integer(d.into());
        let is_rigid = |i: usize| rigid.is_some_and(|r| r[i]);
        let trace_ok = taus
            .iter()
            .enumerate()
            .map(|(i, tau)| {
                (0..=d)
                    .map(|f| {
                        let gap = abs_diff(&(Rational::from_integer(f.into()) / &d_rat), tau);
                        if is_rigid(i) {
                            gap.is_zero()
                        } else {
                            tolerance.admits(&gap)
                        }
                    })
                    .collect()
            })
            .collect();
        let triples = ball
            .product_table()
            .into_iter()
            .filter(|&(i, j, _)| i != ball.identity_index() && j != ball.identity_index())
            .map(|(i, j, k)| (i, j, k, is_rigid(i) && is_rigid(j)))
            .collect();
        let mult_limit = (0..=d)
            .take_while(|&c| Rational::from_integer(c.into()) / &d_rat < tolerance.delta)
            .count();
        let mult_limit = if tolerance.exact {
            mult_limit.max(1)
        } else {
            mult_limit
        };
        Engine {
            d,
            generators: ball.generators().len(),
            programs: (0..ball.len())
                .map(|i| ball.provenance(i).parts.clone())
                .collect(),
            trace_ok,
            triples,
            mult_limit,
            generator_index: (0..ball.generators().len())
                .map(|g| ball.generator_index(g))
                .collect(),
        }
    }

    pub fn scratch(&self) -> Scratch {
        let d = self.d;
        Scratch {
            letters: vec![vec![UNDEF; d]; 2 * self.generators],
            values: vec![vec![UNDEF; d]; self.programs.len()],
            parts: Vec::new(),
            acc: vec![UNDEF; d],
            tmp: vec![UNDEF; d],
            dom: vec![0; d],
            ran: vec![0; d],
        }
    }

    pub fn generator_positions(&self) -> &[usize] {
        &self.generator_index
    }

    /// Whether the canonical extension of `psi` passes; fills
    /// `scratch.values` as far as it got.
    pub fn passes(&self, psi: &[&[u32]], scratch: &mut Scratch) -> bool {
        let g = self.generators;
        for (k, p) in psi.iter().enumerate() {
            scratch.letters[k].copy_from_slice(p);
            let (head, tail) = scratch.letters.split_at_mut(g);
            inverse_into(&head[k], &mut tail[k]);
        }
        for i in 0..self.programs.len() {
            self.evaluate(i, scratch);
            if !self.trace_ok[i][fixed_count(&scratch.values[i])] {
                return false;
            }
        }
        for (k, &pos) in self.generator_index.iter().enumerate() {
            if scratch.values[pos] != psi[k] {
                return false;
            }
        }
        for &(i, j, k, rigid) in &self.triples {
            compose_into(&scratch.values[i], &scratch.values[j], &mut scratch.tmp);
            let miss = mismatch_count(&scratch.values[k], &scratch.tmp);
            if if rigid {
                miss != 0
            } else {
                miss >= self.mult_limit
            } {
                return false;
            }
        }
        true
    }

    fn evaluate(&self, i: usize, s: &mut Scratch) {
        let d = self.d;
        let program = &self.programs[i];
        let g = self.generators;
        let word_value =
            |word: &[Letter], acc: &mut Vec<u32>, tmp: &mut Vec<u32>, letters: &[Vec<u32>]| {
                for (x, a) in acc.iter_mut().enumerate() {
                    *a = x as u32;
                }
                for l in word {
                    let v = match *l {
                        Letter::Identity => continue,
                        Letter::Gen(k) => &letters[k],
                        Letter::Inv(k) => &letters[g + k],
                    };
                    compose_into(acc, v, tmp);
                    std::mem::swap(acc, tmp);
                }
            };
        match program.len() {
            0 => s.values[i].fill(UNDEF),
            1 => {
                word_value(&program[0], &mut s.acc, &mut s.tmp, &s.letters);
                s.values[i].copy_from_slice(&s.acc);
            }
            k => {
                while s.parts.len() < k {
                    s.parts.push(vec![UNDEF; d]);
                }
                for (p, word) in program.iter().enumerate() {
                    word_value(word, &mut s.acc, &mut s.tmp, &s.letters);
                    s.parts[p].copy_from_slice(&s.acc);
                }
                s.dom.fill(0);
                s.ran.fill(0);
                for part in &s.parts[..k] {
                    for (x, &y) in part.iter().enumerate() {
                        if y != UNDEF {
                            s.dom[x] += 1;
                            s.ran[y as usize] += 1;
                        }
                    }
                }
                let out = &mut s.values[i];
                out.fill(UNDEF);
                for part in &s.parts[..k] {
                    for (x, &y) in part.iter().enumerate() {
                        if y != UNDEF && s.dom[x] == 1 && s.ran[y as usize] == 1 {
                            out[x] = y;
                        }
                    }
                }
            }
        }
    }
}
