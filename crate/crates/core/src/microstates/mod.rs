//! Microstates: unital maps from a Σ-ball into `⟦d⟧`, their defects, and
//! counts of the restrictions to the generators that pass a defect test.

mod count;
mod covering;
mod engine;
mod growth;
pub mod lemmas;

use std::sync::Arc;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::pperm::{generalized_sum, Carrier, PartialBijection};
use crate::rational::{abs_diff, format_rational, Rational};
use crate::relation::{Letter, SigmaBall};

pub use count::{
    count_canonical, count_exact, count_g_anchored, enumerate_microstates, exact_divisor,
    restriction_hash, CountMode, CountOptions, CountReport, CountValue, Restriction,
    SampleEstimate, DEFAULT_EXACT_CAP, DEFAULT_PSI_CAP,
};
pub use covering::{covering_number, restriction_distance, Covering, EXACT_COVER_LIMIT};
pub use growth::{growth_ratio, growth_report, GrowthReport, GrowthRow, Trend};

/// Acceptance rule for a defect: strictly below `delta`, or exactly zero
/// when `exact` is set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tolerance {
    pub delta: Rational,
    pub exact: bool,
}

impl Tolerance {
    /// Only zero defects pass.
    pub fn exact() -> Self {
        Tolerance {
            delta: Rational::zero(),
            exact: true,
        }
    }

    pub fn strict(delta: Rational) -> Self {
        Tolerance {
            delta,
            exact: false,
        }
    }

    pub fn admits(&self, defect: &Rational) -> bool {
        *defect < self.delta || (self.exact && defect.is_zero())
    }

    /// True when nothing but a zero defect can pass.
    pub fn is_rigid(&self) -> bool {
        self.exact && self.delta.is_zero()
    }
}

impl std::fmt::Display for Tolerance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", format_rational(&self.delta))?;
        if self.exact {
            f.write_str("+exact")?;
        }
        Ok(())
    }
}

/// Values of a microstate on every element of a ball, in ball order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MicrostateAssignment {
    pub target: Arc<Carrier>,
    pub values: Vec<PartialBijection>,
}

impl MicrostateAssignment {
    pub fn value(&self, i: usize) -> &PartialBijection {
        &self.values[i]
    }

    pub fn is_unital(&self, ball: &SigmaBall) -> bool {
        self.values
            .get(ball.identity_index())
            .is_some_and(PartialBijection::is_identity)
    }

    fn check_against(&self, ball: &SigmaBall) -> Result<()> {
        if self.values.len() != ball.len() {
            return Err(Error::MissingValue {
                expected: ball.len(),
                got: self.values.len(),
            });
        }
        Ok(())
    }
}

/// Worst multiplicativity and trace defects over a ball.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefectReport {
    /// `max |φ(st) − φ(s)φ(t)|` over `s, t, st` in the ball.
    pub mult_defect: Rational,
    /// `max |tr φ(s) − τ(s)|` over the ball.
    pub trace_defect: Rational,
    pub worst_mult: Option<(usize, usize)>,
    pub worst_trace: Option<usize>,
}

impl DefectReport {
    pub fn max_defect(&self) -> &Rational {
        if self.mult_defect > self.trace_defect {
            &self.mult_defect
        } else {
            &self.trace_defect
        }
    }

    pub fn passes(&self, tolerance: &Tolerance) -> bool {
        tolerance.admits(&self.mult_defect) && tolerance.admits(&self.trace_defect)
    }
}

pub fn defects(phi: &MicrostateAssignment, ball: &SigmaBall) -> Result<DefectReport> {
    phi.check_against(ball)?;
    let mut report = DefectReport {
        mult_defect: Rational::zero(),
        trace_defect: Rational::zero(),
        worst_mult: None,
        worst_trace: None,
    };
    for (i, s) in ball.elements().iter().enumerate() {
        let gap = abs_diff(&phi.values[i].trace(), &s.trace());
        if gap > report.trace_defect || report.worst_trace.is_none() {
            report.trace_defect = gap;
            report.worst_trace = Some(i);
        }
    }
    for (i, j, k) in ball.product_table() {
        let product = phi.values[i].compose(&phi.values[j])?;
        let gap = phi.values[k].distance(&product)?;
        if gap > report.mult_defect || report.worst_mult.is_none() {
            report.mult_defect = gap;
            report.worst_mult = Some((i, j));
        }
    }
    Ok(report)
}

/// Extends generator values to the ball through each element's stored
/// decomposition: words by composition, sums by the generalized sum.
pub fn canonical_extend(
    psi: &[PartialBijection],
    ball: &SigmaBall,
) -> Result<MicrostateAssignment> {
    if psi.len() != ball.generators().len() {
        return Err(Error::MissingValue {
            expected: ball.generators().len(),
            got: psi.len(),
        });
    }
    let target = match psi.first() {
        Some(p) => p.carrier().clone(),
        None => {
            return Err(Error::Invalid(
                "canonical extension needs a target carrier".into(),
            ))
        }
    };
    canonical_extend_on(&target, psi, ball)
}

/// As [`canonical_extend`], with an explicit target (needed when `F` is empty).
pub fn canonical_extend_on(
    target: &Arc<Carrier>,
    psi: &[PartialBijection],
    ball: &SigmaBall,
) -> Result<MicrostateAssignment> {
    let inverses: Vec<_> = psi.iter().map(PartialBijection::inverse).collect();
    let letter = |l: &Letter| -> PartialBijection {
        match *l {
            Letter::Identity => PartialBijection::identity(target),
            Letter::Gen(g) => psi[g].clone(),
            Letter::Inv(g) => inverses[g].clone(),
        }
    };
    let mut values = Vec::with_capacity(ball.len());
    for i in 0..ball.len() {
        let mut parts = Vec::new();
        for word in &ball.provenance(i).parts {
            let mut acc = PartialBijection::identity(target);
            for l in word {
                acc = acc.compose(&letter(l))?;
            }
            parts.push(acc);
        }
        let value = if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            generalized_sum(target, &parts)?
        };
        values.push(value);
    }
    Ok(MicrostateAssignment {
        target: target.clone(),
        values,
    })
}
