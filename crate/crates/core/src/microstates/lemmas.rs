//! Consequences of small defect that every passing microstate must satisfy,
//! evaluated with `D` = the microstate's achieved defect.

use num_traits::Zero;

use super::{defects, MicrostateAssignment};
use crate::error::Result;
use crate::pperm::{generalized_sum, orthogonal_sum, pi_projection, PartialBijection};
use crate::rational::{from_int, Rational};
use crate::relation::{sigma_ball, GeneratorSet, SigmaBall};

/// Largest orthogonal family examined by the projection and sum checks.
pub const MAX_FAMILY: usize = 4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaOutcome {
    pub name: &'static str,
    /// Instances examined.
    pub instances: usize,
    pub violations: usize,
    /// Largest `lhs − bound` seen (nonpositive when nothing is violated).
    pub worst_excess: Option<Rational>,
}

impl LemmaOutcome {
    fn new(name: &'static str) -> Self {
        LemmaOutcome {
            name,
            instances: 0,
            violations: 0,
            worst_excess: None,
        }
    }

    fn record(&mut self, lhs: Rational, bound: Rational) {
        self.instances += 1;
        let excess = lhs - bound;
        if excess > Rational::zero() {
            self.violations += 1;
        }
        if self.worst_excess.as_ref().is_none_or(|w| excess > *w) {
            self.worst_excess = Some(excess);
        }
    }

    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// Ball positions of `ΣF_±^m` inside `ball`.
fn sub_ball(generators: &GeneratorSet, m: usize, ball: &SigmaBall) -> Result<Vec<usize>> {
    if m == 0 {
        return Ok(vec![ball.zero_index()]);
    }
    let small = sigma_ball(generators, m, ball.len().max(1))?;
    Ok(small
        .elements()
        .iter()
        .filter_map(|s| ball.index_of(s))
        .collect())
}

/// Pairwise orthogonal families of nonzero positions, sizes `2..=MAX_FAMILY`.
fn orthogonal_families(ball: &SigmaBall, positions: &[usize]) -> Vec<Vec<usize>> {
    let nonzero: Vec<usize> = positions
        .iter()
        .copied()
        .filter(|&i| !ball.element(i).is_zero())
        .collect();
    let mut out = Vec::new();
    let mut stack = Vec::new();
    fn grow(
        ball: &SigmaBall,
        pool: &[usize],
        from: usize,
        stack: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if stack.len() >= 2 {
            out.push(stack.clone());
        }
        if stack.len() == MAX_FAMILY {
            return;
        }
        for (k, &c) in pool.iter().enumerate().skip(from) {
            if stack
                .iter()
                .all(|&s| ball.element(s).is_orthogonal_to(ball.element(c)))
            {
                stack.push(c);
                grow(ball, pool, k + 1, stack, out);
                stack.pop();
            }
        }
    }
    grow(ball, &nonzero, 0, &mut stack, &mut out);
    out
}

/// `|φ(s⁻¹) − φ(s)⁻¹| ≤ 6D` for nonzero `s ∈ ΣF_±^⌊n/2⌋`.
pub fn check_inverse(
    phi: &MicrostateAssignment,
    generators: &GeneratorSet,
    ball: &SigmaBall,
) -> Result<LemmaOutcome> {
    let d_max = defects(phi, ball)?.max_defect().clone();
    let mut out = LemmaOutcome::new("inverse");
    for i in sub_ball(generators, ball.radius() / 2, ball)? {
        let s = ball.element(i);
        if s.is_zero() {
            continue;
        }
        let Some(j) = ball.index_of(&s.inverse()) else {
            continue;
        };
        let lhs = phi.value(j).distance(&phi.value(i).inverse())?;
        out.record(lhs, from_int(6) * &d_max);
    }
    Ok(out)
}

/// `|φ(s) − φ(t)| ≤ |s − t| + 40D` for `s, t ∈ ΣF_±^⌊n/4⌋`.
pub fn check_lipschitz(
    phi: &MicrostateAssignment,
    generators: &GeneratorSet,
    ball: &SigmaBall,
) -> Result<LemmaOutcome> {
    let d_max = defects(phi, ball)?.max_defect().clone();
    let mut out = LemmaOutcome::new("lipschitz");
    let positions = sub_ball(generators, ball.radius() / 4, ball)?;
    for &i in &positions {
        for &j in &positions {
            let lhs = phi.value(i).distance(phi.value(j))?;
            let bound = ball.element(i).distance(ball.element(j))? + from_int(40) * &d_max;
            out.record(lhs, bound);
        }
    }
    Ok(out)
}

/// `|φ(sᵢ)πᵢ(φ(s₁),…,φ(s_k)) − φ(sᵢ)| ≤ 40(k−1)D` for orthogonal
/// `sᵢ ∈ ΣF_±^⌊n/4⌋`.
pub fn check_projection(
    phi: &MicrostateAssignment,
    generators: &GeneratorSet,
    ball: &SigmaBall,
) -> Result<LemmaOutcome> {
    let d_max = defects(phi, ball)?.max_defect().clone();
    let mut out = LemmaOutcome::new("projection");
    let positions = sub_ball(generators, ball.radius() / 4, ball)?;
    for family in orthogonal_families(ball, &positions) {
        let images: Vec<PartialBijection> = family.iter().map(|&i| phi.value(i).clone()).collect();
        let bound = from_int(40 * (family.len() - 1)) * &d_max;
        for (k, img) in images.iter().enumerate() {
            let pi = pi_projection(&phi.target, &images, k)?;
            let lhs = img.compose(&pi)?.distance(img)?;
            out.record(lhs, bound.clone());
        }
    }
    Ok(out)
}

/// `|φ(s) − Σφ(sᵢ)| ≤ 150(2|F|+1)^{2m}D` for orthogonal decompositions
/// `s = Σsᵢ` inside `ΣF_±^m`, `m = ⌊n/4⌋`.
pub fn check_linearity(
    phi: &MicrostateAssignment,
    generators: &GeneratorSet,
    ball: &SigmaBall,
) -> Result<LemmaOutcome> {
    let d_max = defects(phi, ball)?.max_defect().clone();
    let mut out = LemmaOutcome::new("linearity");
    let m = ball.radius() / 4;
    let positions = sub_ball(generators, m, ball)?;
    let factor = from_int(150) * from_int(2 * generators.len() + 1).pow(2 * m as i32);
    let bound = factor * &d_max;
    for family in orthogonal_families(ball, &positions) {
        let parts: Vec<PartialBijection> =
            family.iter().map(|&i| ball.element(i).clone()).collect();
        let total = orthogonal_sum(ball.carrier(), &parts)?;
        let Some(s) = ball.index_of(&total).filter(|s| positions.contains(s)) else {
            continue;
        };
        let images: Vec<PartialBijection> = family.iter().map(|&i| phi.value(i).clone()).collect();
        let lhs = phi
            .value(s)
            .distance(&generalized_sum(&phi.target, &images)?)?;
        out.record(lhs, bound.clone());
    }
    Ok(out)
}

/// All four checks.
pub fn check_all(
    phi: &MicrostateAssignment,
    generators: &GeneratorSet,
    ball: &SigmaBall,
) -> Result<Vec<LemmaOutcome>> {
    Ok(vec![
        check_inverse(phi, generators, ball)?,
        check_lipschitz(phi, generators, ball)?,
        check_projection(phi, generators, ball)?,
        check_linearity(phi, generators, ball)?,
    ])
}
