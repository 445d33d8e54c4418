//! Growth ratios `ln(count)/(d ln d)` for counting sweeps.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::rational::ln_biguint;

/// `ln(count)/(d ln d)`; `−∞` for a zero count and `0` for a count of one.
pub fn growth_ratio(d: usize, count: &BigUint) -> f64 {
    if count.is_zero() {
        return f64::NEG_INFINITY;
    }
    if count.is_one() {
        return 0.0;
    }
    let d = d as f64;
    ln_biguint(count) / (d * d.ln())
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthRow {
    pub d: usize,
    pub count: BigUint,
    pub ratio: f64,
}

/// Direction of the finite ratios, ordered by `d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trend {
    Increasing,
    Decreasing,
    Constant,
    Mixed,
    /// Fewer than two finite ratios.
    Insufficient,
}

impl Trend {
    pub fn name(self) -> &'static str {
        match self {
            Trend::Increasing => "increasing",
            Trend::Decreasing => "decreasing",
            Trend::Constant => "constant",
            Trend::Mixed => "mixed",
            Trend::Insufficient => "insufficient",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthReport {
    pub rows: Vec<GrowthRow>,
    pub trend: Trend,
}

pub fn growth_report(counts: &[(usize, BigUint)]) -> GrowthReport {
    let mut rows: Vec<GrowthRow> = counts
        .iter()
        .map(|(d, c)| GrowthRow {
            d: *d,
            count: c.clone(),
            ratio: growth_ratio(*d, c),
        })
        .collect();
    rows.sort_by_key(|r| r.d);
    let finite: Vec<f64> = rows
        .iter()
        .map(|r| r.ratio)
        .filter(|r| r.is_finite())
        .collect();
    let trend = if finite.len() < 2 {
        Trend::Insufficient
    } else {
        let steps: Vec<f64> = finite.windows(2).map(|w| w[1] - w[0]).collect();
        if steps.iter().all(|&s| s == 0.0) {
            Trend::Constant
        } else if steps.iter().all(|&s| s >= 0.0) {
            Trend::Increasing
        } else if steps.iter().all(|&s| s <= 0.0) {
            Trend::Decreasing
        } else {
            Trend::Mixed
        }
    };
    GrowthReport { rows, trend }
}
