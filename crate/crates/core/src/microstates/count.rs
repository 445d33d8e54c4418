//! Counting the generator values whose extension passes a defect test.

use std::collections::HashSet;
use std::sync::Arc;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;

use super::engine::{compose_into, fixed_count, mismatch_count, Engine};
use super::{MicrostateAssignment, Tolerance};
use crate::error::{Error, Result};
use crate::pperm::{partial_injection_count, Carrier, PartialBijection, PartialInjections, UNDEF};
use crate::relation::{sigma_ball, GeneratorSet, SigmaBall, Subsemigroup, DEFAULT_BALL_CAP};
use crate::rng::{random_partial_injection, stream};

/// Generator values `ψ(s)` for `s ∈ F`, in generator order.
pub type Restriction = Vec<PartialBijection>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CountMode {
    Canonical,
    Exact,
    GAnchored,
}

impl CountMode {
    pub fn name(self) -> &'static str {
        match self {
            CountMode::Canonical => "canonical",
            CountMode::Exact => "exact",
            CountMode::GAnchored => "g-anchored",
        }
    }
}

impl std::str::FromStr for CountMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "canonical" => Ok(CountMode::Canonical),
            "exact" => Ok(CountMode::Exact),
            "g-anchored" | "anchored" => Ok(CountMode::GAnchored),
            other => Err(Error::Invalid(format!("unknown counting mode {other:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CountOptions {
    /// Largest Σ-ball that will be built.
    pub ball_cap: usize,
    /// Largest `|⟦d⟧|^|F|` enumerated exhaustively.
    pub psi_cap: u64,
    /// Largest `ball size × |⟦d⟧|` searched by the exact counter.
    pub exact_cap: u64,
    /// Largest subsemigroup closure built for an anchor.
    pub anchor_cap: usize,
    /// Sample this many `ψ` when the exhaustive space is over the cap.
    pub samples: Option<u64>,
    pub seed: u64,
    /// Keep the passing restrictions in the report.
    pub collect: bool,
}

pub const DEFAULT_PSI_CAP: u64 = 50_000_000;
pub const DEFAULT_EXACT_CAP: u64 = 20_000;

impl Default for CountOptions {
    fn default() -> Self {
        CountOptions {
            ball_cap: DEFAULT_BALL_CAP,
            psi_cap: DEFAULT_PSI_CAP,
            exact_cap: DEFAULT_EXACT_CAP,
            anchor_cap: 100_000,
            samples: None,
            seed: 1,
            collect: false,
        }
    }
}

/// Passing fraction among uniformly sampled `ψ`, scaled to the whole space.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleEstimate {
    pub samples: u64,
    pub passing: u64,
    pub space: BigUint,
    /// 95% Wilson interval for the passing fraction.
    pub fraction_low: f64,
    pub fraction_high: f64,
}

impl SampleEstimate {
    pub fn fraction(&self) -> f64 {
        if self.samples == 0 {
            return f64::NAN;
        }
        self.passing as f64 / self.samples as f64
    }

    pub fn estimate(&self) -> f64 {
        self.fraction() * self.space.to_f64().unwrap_or(f64::INFINITY)
    }
}

fn wilson(passing: u64, samples: u64) -> (f64, f64) {
    if samples == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let n = samples as f64;
    let p = passing as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Clone, Debug, PartialEq)]
pub enum CountValue {
    Exact(BigUint),
    Estimated(SampleEstimate),
}

impl CountValue {
    pub fn exact(&self) -> Option<&BigUint> {
        match self {
            CountValue::Exact(n) => Some(n),
            CountValue::Estimated(_) => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CountReport {
    pub d: usize,
    pub n: usize,
    pub mode: CountMode,
    pub tolerance: Tolerance,
    pub count: CountValue,
    pub ball_size: usize,
    /// Order-independent hash of the passing restriction set.
    pub restriction_hash: u64,
    pub restrictions: Option<Vec<Restriction>>,
}

impl CountReport {
    /// `ln(count)/(d ln d)`; sampled counts use the point estimate.
    pub fn ratio(&self) -> f64 {
        match &self.count {
            CountValue::Exact(n) => super::growth_ratio(self.d, n),
            CountValue::Estimated(e) => {
                let est = e.estimate();
                if est == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    est.ln() / (self.d as f64 * (self.d as f64).ln())
                }
            }
        }
    }
}

fn fnv1a(words: impl Iterator<Item = u32>) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for w in words {
        for b in w.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

fn restriction_hash_raw(values: &[&[u32]]) -> u64 {
    fnv1a(
        values
            .iter()
            .flat_map(|v| v.iter().copied().chain(std::iter::once(UNDEF - 1))),
    )
}

/// Hash of one restriction; the set hash is the wrapping sum over members.
pub fn restriction_hash(restriction: &[PartialBijection]) -> u64 {
    let raw: Vec<&[u32]> = restriction.iter().map(PartialBijection::images).collect();
    restriction_hash_raw(&raw)
}

fn raw_table(d: usize) -> Vec<Box<[u32]>> {
    let carrier = Carrier::uniform(d);
    let all = PartialInjections::full(&carrier);
    (0..all.mask_count())
        .flat_map(|m| all.with_domain(m))
        .collect()
}

/// Least `m` with `d·τ(s)` integral for every `s` in the ball whenever `m | d`;
/// zero-tolerance counts vanish unless `m | d`.
pub fn exact_divisor(ball: &SigmaBall) -> usize {
    ball.traces()
        .iter()
        .fold(BigUint::one(), |acc, t| acc.lcm(t.denom().magnitude()))
        .to_usize()
        .unwrap_or(usize::MAX)
}

fn check_space(d: usize, generators: usize, options: &CountOptions) -> Result<Option<BigUint>> {
    let space = partial_injection_count(d).pow(generators as u32);
    if space > BigUint::from(options.psi_cap) || d >= 64 {
        return match options.samples {
            Some(_) => Ok(Some(space)),
            None => Err(Error::CapExceeded {
                what: "generator value space",
                size: space,
                cap: options.psi_cap.into(),
            }),
        };
    }
    Ok(None)
}

struct Tally {
    count: u64,
    hash: u64,
    kept: Vec<Vec<Box<[u32]>>>,
}

impl Tally {
    fn empty() -> Self {
        Tally {
            count: 0,
            hash: 0,
            kept: Vec::new(),
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.count += other.count;
        self.hash = self.hash.wrapping_add(other.hash);
        self.kept.extend(other.kept);
        self
    }
}

/// Exhaustive canonical count; `candidates[g]` lists the values tried for
/// generator `g` (a superset of those that can pass).
fn exhaustive(engine: &Engine, candidates: &[Vec<Box<[u32]>>], keep: bool) -> Tally {
    let run_suffix = |first: Option<&[u32]>| -> Tally {
        let mut scratch = engine.scratch();
        let mut tally = Tally::empty();
        let rest = if first.is_some() {
            &candidates[1..]
        } else {
            candidates
        };
        let mut odometer = vec![0usize; rest.len()];
        if rest.iter().any(Vec::is_empty) {
            return tally;
        }
        let mut psi: Vec<&[u32]> = Vec::with_capacity(candidates.len());
        loop {
            psi.clear();
            psi.extend(first);
            psi.extend(rest.iter().zip(&odometer).map(|(c, &i)| &*c[i]));
            if engine.passes(&psi, &mut scratch) {
                tally.count += 1;
                tally.hash = tally.hash.wrapping_add(restriction_hash_raw(&psi));
                if keep {
                    tally
                        .kept
                        .push(psi.iter().map(|v| Box::<[u32]>::from(*v)).collect());
                }
            }
            let mut pos = rest.len();
            loop {
                if pos == 0 {
                    return tally;
                }
                pos -= 1;
                odometer[pos] += 1;
                if odometer[pos] < rest[pos].len() {
                    break;
                }
                odometer[pos] = 0;
            }
        }
    };
    match candidates.first() {
        None => run_suffix(None),
        Some(first) => first
            .par_iter()
            .map(|v| run_suffix(Some(v)))
            .collect::<Vec<_>>()
            .into_iter()
            .fold(Tally::empty(), Tally::merge),
    }
}

fn sampled(engine: &Engine, d: usize, generators: usize, samples: u64, seed: u64) -> u64 {
    let carrier = Carrier::uniform(d);
    (0..samples)
        .into_par_iter()
        .map_init(
            || engine.scratch(),
            |scratch, i| {
                let mut rng = stream(seed, i);
                let psi: Vec<PartialBijection> = (0..generators)
                    .map(|_| random_partial_injection(&carrier, &mut rng))
                    .collect();
                let raw: Vec<&[u32]> = psi.iter().map(PartialBijection::images).collect();
                u64::from(engine.passes(&raw, scratch))
            },
        )
        .sum()
}

fn candidates_for(engine: &Engine, table: &[Box<[u32]>], position: usize) -> Vec<Box<[u32]>> {
    table
        .iter()
        .filter(|v| engine.trace_ok[position][fixed_count(v)])
        .cloned()
        .collect()
}

fn finish(
    d: usize,
    n: usize,
    mode: CountMode,
    tolerance: &Tolerance,
    ball: &SigmaBall,
    tally: Tally,
    keep: bool,
) -> CountReport {
    let carrier = Carrier::uniform(d);
    let restrictions = keep.then(|| {
        tally
            .kept
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|v| PartialBijection::from_raw(&carrier, v))
                    .collect()
            })
            .collect()
    });
    CountReport {
        d,
        n,
        mode,
        tolerance: tolerance.clone(),
        count: CountValue::Exact(BigUint::from(tally.count)),
        ball_size: ball.len(),
        restriction_hash: tally.hash,
        restrictions,
    }
}

/// Counts `ψ: F → ⟦d⟧` whose canonical extension to `ΣF_±^n` passes the
/// defect test; exhaustive in a fixed order, or sampled past the cap.
pub fn count_canonical(
    generators: &GeneratorSet,
    n: usize,
    tolerance: &Tolerance,
    d: usize,
    options: &CountOptions,
) -> Result<CountReport> {
    let ball = sigma_ball(generators, n, options.ball_cap)?;
    let engine = Engine::new(&ball, d, tolerance, None);
    canonical_on(
        &ball,
        &engine,
        generators.len(),
        n,
        tolerance,
        d,
        CountMode::Canonical,
        options,
    )
}

#[allow(clippy::too_many_arguments)]
fn canonical_on(
    ball: &SigmaBall,
    engine: &Engine,
    generators: usize,
    n: usize,
    tolerance: &Tolerance,
    d: usize,
    mode: CountMode,
    options: &CountOptions,
) -> Result<CountReport> {
    if let Some(space) = check_space(d, generators, options)? {
        let samples = options.samples.unwrap_or(0);
        let passing = sampled(engine, d, generators, samples, options.seed);
        let (fraction_low, fraction_high) = wilson(passing, samples);
        return Ok(CountReport {
            d,
            n,
            mode,
            tolerance: tolerance.clone(),
            count: CountValue::Estimated(SampleEstimate {
                samples,
                passing,
                space,
                fraction_low,
                fraction_high,
            }),
            ball_size: ball.len(),
            restriction_hash: 0,
            restrictions: None,
        });
    }
    let table = raw_table(d);
    let candidates: Vec<_> = engine
        .generator_positions()
        .iter()
        .map(|&p| candidates_for(engine, &table, p))
        .collect();
    let tally = exhaustive(engine, &candidates, options.collect);
    Ok(finish(d, n, mode, tolerance, ball, tally, options.collect))
}

/// As [`count_canonical`], restricted to `ψ` that also carry a
/// trace-preserving embedding of the subsemigroup generated by `anchor`.
/// Counts distinct restrictions to `F`.
pub fn count_g_anchored(
    generators: &GeneratorSet,
    anchor: &GeneratorSet,
    n: usize,
    tolerance: &Tolerance,
    d: usize,
    options: &CountOptions,
) -> Result<CountReport> {
    let g = Subsemigroup::generated_by(anchor, options.anchor_cap)?;
    g.check_divisibility(d)?;
    let fresh: Vec<(String, PartialBijection)> = anchor
        .names()
        .iter()
        .zip(anchor.elements())
        .filter(|(_, s)| !generators.elements().contains(s))
        .map(|(name, s)| (name.clone(), s.clone()))
        .collect();
    let mut all = generators.clone();
    let extra = fresh.len();
    if extra > 0 {
        all = all.extended(&GeneratorSet::from_parts(generators.carrier(), fresh));
    }
    let ball = sigma_ball(&all, n, options.ball_cap)?;
    let mut rigid = vec![false; ball.len()];
    for s in g.elements() {
        match ball.index_of(s) {
            Some(i) => rigid[i] = true,
            None => return Err(Error::AnchorOutsideBall { radius: n }),
        }
    }
    let engine = Engine::new(&ball, d, tolerance, Some(&rigid));
    if extra == 0 {
        return canonical_on(
            &ball,
            &engine,
            all.len(),
            n,
            tolerance,
            d,
            CountMode::GAnchored,
            options,
        );
    }
    if check_space(d, all.len(), options)?.is_some() {
        return Err(Error::Invalid(
            "sampling is not supported for anchors outside F".into(),
        ));
    }
    let table = raw_table(d);
    let candidates: Vec<_> = engine
        .generator_positions()
        .iter()
        .map(|&p| candidates_for(&engine, &table, p))
        .collect();
    let tally = exhaustive(&engine, &candidates, true);
    let k = generators.len();
    let mut seen: HashSet<Vec<Box<[u32]>>> = HashSet::new();
    let mut kept = Vec::new();
    let mut hash = 0u64;
    for mut r in tally.kept {
        r.truncate(k);
        if seen.insert(r.clone()) {
            let raw: Vec<&[u32]> = r.iter().map(|v| &**v).collect();
            hash = hash.wrapping_add(restriction_hash_raw(&raw));
            kept.push(r);
        }
    }
    let tally = Tally {
        count: kept.len() as u64,
        hash,
        kept,
    };
    Ok(finish(
        d,
        n,
        CountMode::GAnchored,
        tolerance,
        &ball,
        tally,
        options.collect,
    ))
}

/// Backtracking search over full ball assignments.
struct Search<'a> {
    engine: &'a Engine,
    table: &'a [Box<[u32]>],
    order: Vec<usize>,
    /// Candidate table indices per ball position.
    candidates: Vec<Vec<usize>>,
    /// Triples to test once the position at that depth is assigned.
    checks: Vec<Vec<(usize, usize, usize, bool)>>,
    /// A rigid triple that determines the position at that depth.
    forced: Vec<Option<(usize, usize)>>,
    values: Vec<Option<Box<[u32]>>>,
    tmp: Vec<u32>,
    /// Depth at which an assignment counts as complete.
    end: usize,
}

impl<'a> Search<'a> {
    fn new(engine: &'a Engine, table: &'a [Box<[u32]>], identity: usize, rigid: bool) -> Self {
        let m = engine.trace_ok.len();
        let mut order = Vec::with_capacity(m);
        order.push(identity);
        for &p in engine.generator_positions() {
            if !order.contains(&p) {
                order.push(p);
            }
        }
        for p in 0..m {
            if !order.contains(&p) {
                order.push(p);
            }
        }
        let mut depth_of = vec![0; m];
        for (depth, &p) in order.iter().enumerate() {
            depth_of[p] = depth;
        }
        let mut checks = vec![Vec::new(); m];
        let mut forced = vec![None; m];
        for &(i, j, k, r) in &engine.triples {
            let last = depth_of[i].max(depth_of[j]).max(depth_of[k]);
            checks[last].push((i, j, k, r));
            if rigid && depth_of[k] > depth_of[i].max(depth_of[j]) && forced[depth_of[k]].is_none()
            {
                forced[depth_of[k]] = Some((i, j));
            }
        }
        let candidates = (0..m)
            .map(|p| {
                (0..table.len())
                    .filter(|&v| engine.trace_ok[p][fixed_count(&table[v])])
                    .collect()
            })
            .collect();
        let d = engine.d;
        let mut values = vec![None; m];
        values[identity] = Some((0..d as u32).collect());
        Search {
            engine,
            table,
            order,
            candidates,
            checks,
            forced,
            values,
            tmp: vec![UNDEF; d],
            end: m,
        }
    }

    fn consistent(&mut self, depth: usize) -> bool {
        let limit = self.engine.mult_limit;
        for idx in 0..self.checks[depth].len() {
            let (i, j, k, rigid) = self.checks[depth][idx];
            let (Some(a), Some(b), Some(c)) = (&self.values[i], &self.values[j], &self.values[k])
            else {
                unreachable!("all positions of a check are assigned");
            };
            compose_into(a, b, &mut self.tmp);
            let miss = mismatch_count(c, &self.tmp);
            if if rigid { miss != 0 } else { miss >= limit } {
                return false;
            }
        }
        true
    }

    /// Visits complete assignments from `depth`; the visitor returns false
    /// to stop. Returns false if stopped.
    fn run(&mut self, depth: usize, visit: &mut dyn FnMut(&Slots) -> bool) -> bool {
        if depth == self.end {
            return visit(&self.values);
        }
        let p = self.order[depth];
        if depth == 0 {
            return self.consistent(0) && self.run(1, visit);
        }
        let options: Vec<Box<[u32]>> = match self.forced[depth] {
            Some((i, j)) => {
                let (Some(a), Some(b)) = (&self.values[i], &self.values[j]) else {
                    unreachable!("forcing positions precede the forced one");
                };
                let mut out = vec![UNDEF; self.engine.d];
                compose_into(a, b, &mut out);
                if self.engine.trace_ok[p][fixed_count(&out)] {
                    vec![out.into_boxed_slice()]
                } else {
                    Vec::new()
                }
            }
            None => self.candidates[p]
                .iter()
                .map(|&v| self.table[v].clone())
                .collect(),
        };
        for v in options {
            self.values[p] = Some(v);
            if self.consistent(depth) && !self.run(depth + 1, visit) {
                self.values[p] = None;
                return false;
            }
        }
        self.values[p] = None;
        true
    }
}

fn exact_setup(
    generators: &GeneratorSet,
    n: usize,
    tolerance: &Tolerance,
    d: usize,
    options: &CountOptions,
) -> Result<(SigmaBall, Engine)> {
    let ball = sigma_ball(generators, n, options.ball_cap)?;
    let work = partial_injection_count(d) * BigUint::from(ball.len());
    if work > BigUint::from(options.exact_cap) || d >= 64 {
        return Err(Error::CapExceeded {
            what: "exact search (ball size × |⟦d⟧|)",
            size: work,
            cap: options.exact_cap.into(),
        });
    }
    let engine = Engine::new(&ball, d, tolerance, None);
    Ok((ball, engine))
}

/// Counts `ψ` admitting at least one passing assignment on the whole ball.
pub fn count_exact(
    generators: &GeneratorSet,
    n: usize,
    tolerance: &Tolerance,
    d: usize,
    options: &CountOptions,
) -> Result<CountReport> {
    let (ball, engine) = exact_setup(generators, n, tolerance, d, options)?;
    let table = raw_table(d);
    let positions = engine.generator_positions().to_vec();
    let mut search = Search::new(&engine, &table, ball.identity_index(), tolerance.is_rigid());
    let mut seen: HashSet<Vec<Box<[u32]>>> = HashSet::new();
    let mut kept = Vec::new();
    let mut hash = 0u64;
    run_grouped(&mut search, &mut |values| {
        let r: Vec<Box<[u32]>> = positions
            .iter()
            .map(|&p| values[p].clone().expect("assigned"))
            .collect();
        if seen.insert(r.clone()) {
            let raw: Vec<&[u32]> = r.iter().map(|v| &**v).collect();
            hash = hash.wrapping_add(restriction_hash_raw(&raw));
            kept.push(r);
        }
    });
    let tally = Tally {
        count: kept.len() as u64,
        hash,
        kept,
    };
    Ok(finish(
        d,
        n,
        CountMode::Exact,
        tolerance,
        &ball,
        tally,
        options.collect,
    ))
}

/// Partial assignment of raw tables to ball positions.
type Slots = [Option<Box<[u32]>>];

/// Enumerates the values on the identity and generator positions, then
/// looks for a single completion of each.
fn run_grouped(search: &mut Search<'_>, found: &mut dyn FnMut(&Slots)) {
    let gens = search.engine.generator_positions();
    let split = 1 + search.order[1..]
        .iter()
        .take_while(|p| gens.contains(p))
        .count();
    let full = search.order.len();
    let mut prefixes: Vec<Vec<Option<Box<[u32]>>>> = Vec::new();
    search.end = split;
    search.run(0, &mut |values| {
        prefixes.push(values.to_vec());
        true
    });
    search.end = full;
    for prefix in prefixes {
        search.values = prefix;
        search.run(split, &mut |values| {
            found(values);
            false
        });
    }
}

/// Every passing assignment on the ball, as microstates.
pub fn enumerate_microstates(
    generators: &GeneratorSet,
    n: usize,
    tolerance: &Tolerance,
    d: usize,
    options: &CountOptions,
) -> Result<Vec<MicrostateAssignment>> {
    let (ball, engine) = exact_setup(generators, n, tolerance, d, options)?;
    let table = raw_table(d);
    let target: Arc<Carrier> = Carrier::uniform(d);
    let mut search = Search::new(&engine, &table, ball.identity_index(), tolerance.is_rigid());
    let mut out = Vec::new();
    search.run(0, &mut |values| {
        out.push(MicrostateAssignment {
            target: target.clone(),
            values: values
                .iter()
                .map(|v| PartialBijection::from_raw(&target, v.clone().expect("assigned")))
                .collect(),
        });
        true
    });
    Ok(out)
}
