//! The subcommands. Each builds a [`Table`]; per-row failures become an
//! `error` cell and the sweep continues.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use num_bigint::BigUint;
use sofic_core::closedform::{cost_upper_count, count_embeddings, predicted_dimension};
use sofic_core::freeprod::{
    concentration_experiment, cyclic_shift, splitting_check, EmbeddedSemigroup,
};
use sofic_core::microstates::{
    count_canonical, count_exact, count_g_anchored, covering_number, exact_divisor, growth_report,
    CountMode, CountOptions, CountReport, CountValue, Tolerance, DEFAULT_EXACT_CAP,
    DEFAULT_PSI_CAP,
};
use sofic_core::rational::{format_rational, format_sig, parse_rational};
use sofic_core::relation::{
    is_dynamical_generating, sigma_ball, Subsemigroup, DEFAULT_BALL_CAP, DEFAULT_PSEUDOGROUP_CAP,
};
use sofic_core::{Error, FinRelation, GeneratorSet, Presentation, Rational};

use crate::output::{read_table, Table};

const SIG: usize = 15;

fn ratio_cell(x: f64) -> String {
    format_sig(x, SIG)
}

/// `2,4,6`, `2-8` or `2-8/2`, and combinations separated by commas.
pub fn parse_d_list(text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (range, step) = match item.split_once('/') {
            Some((r, s)) => (
                r,
                s.parse::<usize>()
                    .with_context(|| format!("bad step in {item:?}"))?,
            ),
            None => (item, 1),
        };
        if step == 0 {
            bail!("step must be positive in {item:?}");
        }
        match range.split_once('-') {
            Some((a, b)) => {
                let a: usize = a.parse().with_context(|| format!("bad range {item:?}"))?;
                let b: usize = b.parse().with_context(|| format!("bad range {item:?}"))?;
                out.extend((a..=b).step_by(step));
            }
            None => out.push(
                range
                    .parse()
                    .with_context(|| format!("bad value {item:?}"))?,
            ),
        }
    }
    if out.contains(&0) {
        bail!("d must be positive");
    }
    Ok(out)
}

fn parse_rational_arg(text: &str) -> Result<Rational> {
    parse_rational(text).map_err(|e| anyhow!("{text:?}: {e}"))
}

fn parse_rational_list(text: &str) -> Result<Vec<Rational>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse_rational_arg)
        .collect()
}

fn names(list: &Option<String>) -> Option<Vec<String>> {
    list.as_ref().map(|l| {
        l.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect()
    })
}

/// Finds the line of a generator's entry, for error messages.
fn generator_line(text: &str, name: &str) -> Option<usize> {
    let start = text.find("\"generators\"")?;
    let key = format!("\"{name}\"");
    let offset = text[start..].find(&key)? + start;
    Some(text[..offset].lines().count().max(1))
}

pub fn load_presentation(path: &Path) -> Result<(Presentation, String)> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    match Presentation::parse(&text) {
        Ok(p) => Ok((p, text)),
        Err(e) => {
            let context = match &e {
                Error::CrossesClasses { name, .. } => generator_line(&text, name)
                    .map(|l| format!(" (line {l})"))
                    .unwrap_or_default(),
                _ => String::new(),
            };
            Err(anyhow!("{}: {e}{context}", path.display()))
        }
    }
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// Presentation file (JSON).
    pub presentation: PathBuf,
    /// Largest full pseudogroup compared against.
    #[arg(long, default_value_t = DEFAULT_PSEUDOGROUP_CAP as usize)]
    pub pseudogroup_cap: usize,
}

pub fn check(args: &CheckArgs) -> Result<Table> {
    let (p, _) = load_presentation(&args.presentation)?;
    let mut table = Table::new("check", &["property", "value"]);
    table.echo("presentation", args.presentation.display());
    table.echo("pseudogroup_cap", args.pseudogroup_cap);
    let rel = &p.relation;
    let generating = match is_dynamical_generating(&p.generators, rel, args.pseudogroup_cap) {
        Ok(b) => b.to_string(),
        Err(e) => format!("unknown ({e})"),
    };
    let rows = [
        ("valid", "true".to_string()),
        ("points", rel.carrier().size().to_string()),
        ("classes", rel.classes().len().to_string()),
        ("generators", p.generators.names().join(" ")),
        ("fd_measure", format_rational(rel.fd_measure())),
        (
            "predicted_dimension",
            format_rational(&predicted_dimension(rel)),
        ),
        ("cost", format_rational(&p.generators.cost())),
        ("pseudogroup_size", rel.pseudogroup_size().to_string()),
        ("dynamically_generating", generating),
    ];
    for (k, v) in rows {
        table.push(vec![k.to_string(), v]);
    }
    Ok(table)
}

#[derive(Args, Debug, Clone)]
pub struct SweepArgs {
    /// Presentation file (JSON).
    pub presentation: PathBuf,
    /// Values of d: a list such as `2,4,6,8`, ranges `2-8`, steps `2-8/2`.
    #[arg(long, default_value = "2,4,6,8")]
    pub d: String,
    /// Ball radius n.
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    /// Defect tolerance δ as a rational.
    #[arg(long, default_value = "0")]
    pub delta: String,
    /// Also accept defect exactly zero.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub exact: bool,
    /// Counting semantics.
    #[arg(long, default_value = "canonical", value_parser = ["canonical", "exact", "g-anchored"])]
    pub mode: String,
    /// Generators to count over, comma-separated (default: all).
    #[arg(long)]
    pub generators: Option<String>,
    /// Generators of the anchored subsemigroup G, comma-separated.
    #[arg(long)]
    pub anchor: Option<String>,
    /// Sample this many generator values when the space exceeds the cap.
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Largest Σ-ball built.
    #[arg(long, default_value_t = DEFAULT_BALL_CAP)]
    pub ball_cap: usize,
    /// Largest |⟦d⟧|^|F| enumerated.
    #[arg(long, default_value_t = DEFAULT_PSI_CAP)]
    pub psi_cap: u64,
    /// Largest ball size × |⟦d⟧| searched in exact mode.
    #[arg(long, default_value_t = DEFAULT_EXACT_CAP)]
    pub exact_cap: u64,
}

struct Sweep {
    presentation: Presentation,
    generators: GeneratorSet,
    anchor: Option<GeneratorSet>,
    ds: Vec<usize>,
    tolerance: Tolerance,
    mode: CountMode,
    options: CountOptions,
}

impl SweepArgs {
    fn prepare(&self, collect: bool) -> Result<Sweep> {
        let (presentation, _) = load_presentation(&self.presentation)?;
        let generators = match names(&self.generators) {
            Some(list) => presentation.select(&list)?,
            None => presentation.generators.clone(),
        };
        let anchor = names(&self.anchor)
            .map(|l| presentation.select(&l))
            .transpose()?;
        let mode: CountMode = self.mode.parse()?;
        if mode == CountMode::GAnchored && anchor.is_none() {
            bail!("--mode g-anchored needs --anchor");
        }
        Ok(Sweep {
            presentation,
            generators,
            anchor,
            ds: parse_d_list(&self.d)?,
            tolerance: Tolerance {
                delta: parse_rational_arg(&self.delta)?,
                exact: self.exact,
            },
            mode,
            options: CountOptions {
                ball_cap: self.ball_cap,
                psi_cap: self.psi_cap,
                exact_cap: self.exact_cap,
                samples: self.samples,
                seed: self.seed,
                collect,
                ..CountOptions::default()
            },
        })
    }

    fn echo(&self, table: &mut Table) {
        table.echo("presentation", self.presentation.display());
        table.echo("d", &self.d);
        table.echo("n", self.n);
        table.echo("delta", &self.delta);
        table.echo("exact", self.exact);
        table.echo("mode", &self.mode);
        table.echo("generators", self.generators.as_deref().unwrap_or("all"));
        table.echo("anchor", self.anchor.as_deref().unwrap_or("none"));
        table.echo(
            "samples",
            self.samples.map_or("none".to_string(), |s| s.to_string()),
        );
        table.echo("seed", self.seed);
        table.echo("ball_cap", self.ball_cap);
        table.echo("psi_cap", self.psi_cap);
        table.echo("exact_cap", self.exact_cap);
    }
}

impl Sweep {
    fn run(&self, n: usize, d: usize) -> sofic_core::Result<CountReport> {
        if self.tolerance.is_rigid() && self.mode != CountMode::GAnchored {
            let ball = sigma_ball(&self.generators, n, self.options.ball_cap)?;
            let divisor = exact_divisor(&ball);
            if !d.is_multiple_of(divisor) {
                return Err(Error::Divisibility { d, divisor });
            }
        }
        match self.mode {
            CountMode::Canonical => {
                count_canonical(&self.generators, n, &self.tolerance, d, &self.options)
            }
            CountMode::Exact => count_exact(&self.generators, n, &self.tolerance, d, &self.options),
            CountMode::GAnchored => {
                let anchor = self.anchor.as_ref().expect("checked in prepare");
                count_g_anchored(
                    &self.generators,
                    anchor,
                    n,
                    &self.tolerance,
                    d,
                    &self.options,
                )
            }
        }
    }
}

fn count_cells(report: &CountReport) -> [String; 4] {
    match &report.count {
        CountValue::Exact(n) => ["exact".into(), n.to_string(), String::new(), String::new()],
        CountValue::Estimated(e) => {
            let space = e.space.to_string().parse::<f64>().unwrap_or(f64::INFINITY);
            [
                "estimate".into(),
                format_sig(e.estimate(), 6),
                format_sig(e.fraction_low * space, 6),
                format_sig(e.fraction_high * space, 6),
            ]
        }
    }
}

#[derive(Args, Debug)]
pub struct CountArgs {
    #[command(flatten)]
    pub sweep: SweepArgs,
    /// Also report covering numbers N_ε for these ε (comma-separated rationals).
    #[arg(long)]
    pub epsilon: Option<String>,
}

const COUNT_COLUMNS: &[&str] = &[
    "d",
    "mode",
    "n",
    "delta",
    "exact",
    "count_kind",
    "count",
    "count_low",
    "count_high",
    "ratio",
    "ball_size",
    "restriction_hash",
    "covering",
    "predicted_dimension",
    "embeddings",
    "cost_bound",
    "error",
];

pub fn count(args: &CountArgs) -> Result<Table> {
    let eps = args
        .epsilon
        .as_deref()
        .map(parse_rational_list)
        .transpose()?;
    let sweep = args.sweep.prepare(eps.is_some())?;
    let mut table = Table::new("count", COUNT_COLUMNS);
    args.sweep.echo(&mut table);
    table.echo("epsilon", args.epsilon.as_deref().unwrap_or("none"));
    let relation: &FinRelation = &sweep.presentation.relation;
    let predicted = format_rational(&predicted_dimension(relation));
    let mut counts = Vec::new();
    for &d in &sweep.ds {
        let census = count_embeddings(relation, d);
        let cost = cost_upper_count(&sweep.generators, &sweep.tolerance, d);
        let mut row = vec![
            d.to_string(),
            sweep.mode.name().to_string(),
            args.sweep.n.to_string(),
            format_rational(&sweep.tolerance.delta),
            sweep.tolerance.exact.to_string(),
        ];
        match sweep.run(args.sweep.n, d) {
            Ok(report) => {
                let covering = match (&eps, &report.restrictions) {
                    (Some(list), Some(set)) => list
                        .iter()
                        .map(|e| {
                            covering_number(set, e).map(|c| {
                                format!(
                                    "{}:{}{}",
                                    format_rational(e),
                                    c.size,
                                    if c.exact { "" } else { "+" }
                                )
                            })
                        })
                        .collect::<sofic_core::Result<Vec<_>>>()?
                        .join(";"),
                    _ => String::new(),
                };
                if let CountValue::Exact(n) = &report.count {
                    counts.push((d, n.clone()));
                }
                row.extend(count_cells(&report));
                row.push(ratio_cell(report.ratio()));
                row.push(report.ball_size.to_string());
                row.push(match report.count {
                    CountValue::Exact(_) => format!("{:016x}", report.restriction_hash),
                    CountValue::Estimated(_) => String::new(),
                });
                row.push(covering);
                row.extend([
                    predicted.clone(),
                    census.total_embeddings.to_string(),
                    cost.to_string(),
                ]);
                row.push(String::new());
            }
            Err(e) => {
                row.extend(std::iter::repeat_n(String::new(), 8));
                row.extend([
                    predicted.clone(),
                    census.total_embeddings.to_string(),
                    cost.to_string(),
                ]);
                row.push(e.to_string());
            }
        }
        table.push(row);
    }
    let trend = growth_report(&counts).trend;
    table.summary.push(("trend".into(), trend.name().into()));
    Ok(table)
}

#[derive(Args, Debug)]
pub struct CoverArgs {
    #[command(flatten)]
    pub sweep: SweepArgs,
    /// Radii ε (comma-separated rationals).
    #[arg(long, default_value = "0,1/4,1/2,1")]
    pub epsilon: String,
}

pub fn cover(args: &CoverArgs) -> Result<Table> {
    let eps = parse_rational_list(&args.epsilon)?;
    let sweep = args.sweep.prepare(true)?;
    let mut table = Table::new(
        "cover",
        &[
            "d",
            "count",
            "epsilon",
            "covering",
            "covering_exact",
            "error",
        ],
    );
    args.sweep.echo(&mut table);
    table.echo("epsilon", &args.epsilon);
    for &d in &sweep.ds {
        match sweep.run(args.sweep.n, d) {
            Ok(report) => {
                let Some(set) = &report.restrictions else {
                    table.push(vec![
                        d.to_string(),
                        String::new(),
                        String::new(),
                        String::new(),
                        String::new(),
                        "covering needs an exhaustive count".into(),
                    ]);
                    continue;
                };
                for e in &eps {
                    let c = covering_number(set, e)?;
                    table.push(vec![
                        d.to_string(),
                        set.len().to_string(),
                        format_rational(e),
                        c.size.to_string(),
                        c.exact.to_string(),
                        String::new(),
                    ]);
                }
            }
            Err(e) => table.push(vec![
                d.to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                e.to_string(),
            ]),
        }
    }
    Ok(table)
}

#[derive(Args, Debug)]
pub struct ConcentrateArgs {
    /// Values of d.
    #[arg(long, default_value = "50,100,200")]
    pub d: String,
    /// Sampled centralizer elements per d.
    #[arg(long, default_value_t = 1000)]
    pub samples: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// The constant C in the threshold C·max|Res| + ε.
    #[arg(long, default_value = "1")]
    pub c: String,
    #[arg(long, default_value = "1/10")]
    pub epsilon: String,
    /// φ is the cyclic shift by this amount.
    #[arg(long, default_value_t = 1)]
    pub phi_shift: usize,
    /// ψ is the cyclic shift by this amount.
    #[arg(long, default_value_t = 7)]
    pub psi_shift: usize,
    /// Embed the full relation on this many points as G (1 = trivial G).
    #[arg(long, default_value_t = 1)]
    pub group_points: usize,
}

pub fn concentrate(args: &ConcentrateArgs, wall_time: bool) -> Result<Table> {
    let ds = parse_d_list(&args.d)?;
    let c = parse_rational_arg(&args.c)?;
    let eps = parse_rational_arg(&args.epsilon)?;
    if args.group_points == 0 {
        bail!("--group-points must be positive");
    }
    let mut table = Table::new(
        "concentrate",
        &[
            "d",
            "samples",
            "seed",
            "epsilon",
            "c",
            "passing",
            "fraction",
            "wall_time_ms",
            "error",
        ],
    );
    table.echo("d", &args.d);
    table.echo("samples", args.samples);
    table.echo("seed", args.seed);
    table.echo("c", format_rational(&c));
    table.echo("epsilon", format_rational(&eps));
    table.echo("phi_shift", args.phi_shift);
    table.echo("psi_shift", args.psi_shift);
    table.echo("group_points", args.group_points);
    let rel = FinRelation::full(args.group_points);
    let g = group_generators(&rel)?;
    let g = Subsemigroup::generated_by(&g, 1_000_000)?;
    for &d in &ds {
        let start = Instant::now();
        let mut row = vec![
            d.to_string(),
            args.samples.to_string(),
            args.seed.to_string(),
            format_rational(&eps),
            format_rational(&c),
        ];
        let result = EmbeddedSemigroup::standard(&g, d).and_then(|e| {
            let phi = cyclic_shift(d, args.phi_shift);
            let psi = cyclic_shift(d, args.psi_shift);
            concentration_experiment(&[phi], &[psi], &e, &c, &eps, args.samples, args.seed)
        });
        let elapsed = start.elapsed().as_millis();
        match result {
            Ok(r) => {
                row.push(r.passing.to_string());
                row.push(r.fraction.as_ref().map(format_rational).unwrap_or_default());
                row.push(if wall_time {
                    elapsed.to_string()
                } else {
                    String::new()
                });
                row.push(String::new());
            }
            Err(e) => {
                row.extend([String::new(), String::new(), String::new(), e.to_string()]);
            }
        }
        table.push(row);
    }
    Ok(table)
}

/// Matrix units `i+1 → i`, generating the full pseudogroup of `rel`.
fn group_generators(rel: &FinRelation) -> Result<GeneratorSet> {
    let k = rel.carrier().size();
    let gens = (1..k)
        .map(|i| {
            sofic_core::PartialBijection::from_pairs(rel.carrier(), &[(i, i - 1)])
                .map(|s| (format!("e{i}"), s))
        })
        .collect::<sofic_core::Result<Vec<_>>>()?;
    Ok(GeneratorSet::new(rel, gens)?)
}

#[derive(Args, Debug)]
pub struct SplitArgs {
    /// Presentation file (JSON).
    pub presentation: PathBuf,
    /// Generators of F₁, comma-separated.
    #[arg(long)]
    pub left: String,
    /// Generators of F₂, comma-separated.
    #[arg(long)]
    pub right: String,
    /// Generators of the shared G (default: trivial G).
    #[arg(long)]
    pub anchor: Option<String>,
    #[arg(long, default_value = "2,4")]
    pub d: String,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value = "0")]
    pub delta: String,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub exact: bool,
    #[arg(long, default_value_t = DEFAULT_PSI_CAP)]
    pub psi_cap: u64,
}

pub fn split(args: &SplitArgs) -> Result<Table> {
    let (p, _) = load_presentation(&args.presentation)?;
    let left = p.select(&names(&Some(args.left.clone())).unwrap_or_default())?;
    let right = p.select(&names(&Some(args.right.clone())).unwrap_or_default())?;
    let anchor = p.select(&names(&args.anchor).unwrap_or_default())?;
    let tolerance = Tolerance {
        delta: parse_rational_arg(&args.delta)?,
        exact: args.exact,
    };
    let options = CountOptions {
        psi_cap: args.psi_cap,
        ..CountOptions::default()
    };
    let mut table = Table::new(
        "split",
        &[
            "d",
            "lhs",
            "left",
            "right",
            "centralizer_order",
            "rhs",
            "holds",
            "error",
        ],
    );
    table.echo("presentation", args.presentation.display());
    table.echo("left", &args.left);
    table.echo("right", &args.right);
    table.echo("anchor", args.anchor.as_deref().unwrap_or("none"));
    table.echo("d", &args.d);
    table.echo("n", args.n);
    table.echo("delta", &args.delta);
    table.echo("exact", args.exact);
    table.echo("psi_cap", args.psi_cap);
    for d in parse_d_list(&args.d)? {
        match splitting_check(&left, &right, &anchor, args.n, &tolerance, d, &options) {
            Ok(s) => table.push(vec![
                d.to_string(),
                s.lhs.to_string(),
                s.left.to_string(),
                s.right.to_string(),
                s.centralizer_order.to_string(),
                format_rational(&s.rhs),
                s.holds.to_string(),
                String::new(),
            ]),
            Err(e) => {
                let mut row = vec![d.to_string()];
                row.extend(std::iter::repeat_n(String::new(), 6));
                row.push(e.to_string());
                table.push(row);
            }
        }
    }
    Ok(table)
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// A report written by `sofic count` (DSV or JSON lines).
    pub counts: PathBuf,
}

pub fn report(args: &ReportArgs) -> Result<Table> {
    let text = std::fs::read_to_string(&args.counts)
        .with_context(|| format!("reading {}", args.counts.display()))?;
    let (columns, rows) = read_table(&text)?;
    let col = |name: &str| {
        columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| anyhow!("{} has no {name:?} column", args.counts.display()))
    };
    let (d_col, count_col) = (col("d")?, col("count")?);
    let kind_col = columns.iter().position(|c| c == "count_kind");
    let mut counts = Vec::new();
    for row in &rows {
        if kind_col.is_some_and(|k| row.get(k).map(String::as_str) != Some("exact")) {
            continue;
        }
        let (Some(d), Some(count)) = (row.get(d_col), row.get(count_col)) else {
            continue;
        };
        if count.is_empty() {
            continue;
        }
        let d: usize = d.parse().with_context(|| format!("bad d {d:?}"))?;
        let count: BigUint = count
            .parse()
            .with_context(|| format!("bad count {count:?}"))?;
        counts.push((d, count));
    }
    let growth = growth_report(&counts);
    let mut table = Table::new("report", &["d", "count", "ratio"]);
    table.echo("counts", args.counts.display());
    for r in &growth.rows {
        table.push(vec![
            r.d.to_string(),
            r.count.to_string(),
            ratio_cell(r.ratio),
        ]);
    }
    table
        .summary
        .push(("trend".into(), growth.trend.name().into()));
    Ok(table)
}
