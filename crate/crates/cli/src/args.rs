use std::path::PathBuf;

use betarep::{Beta, Error, Named, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "betarep",
    version,
    about = "Beta representations with unrestricted digits"
)]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Greedy expansion of a number.
    Expand(ExpandArgs),
    /// The expansion of 1 with period and monotonicity report.
    Unity(UnityArgs),
    /// Reduce a representation toward the greedy expansion, printing each step.
    Reduce(ReduceArgs),
    /// Greedy average and the explicit bounds, one CSV row per base.
    Bounds(BoundsArgs),
    /// Coverage search for a numerical upper bound.
    Coverage(CoverageArgs),
    /// All curves on a grid of bases, as one CSV.
    Figure1(FigureArgs),
    /// Empirical contraction rates of the 2x2 switched system.
    Probe(ProbeArgs),
}

#[derive(Args, Debug, Clone)]
pub struct BetaArgs {
    /// Base as a decimal or a ratio such as 27/4; repeatable where several bases are allowed.
    #[arg(long)]
    pub beta: Vec<String>,
    /// Integer polynomial coefficients, highest degree first, e.g. "1,0,-1,-1".
    #[arg(long, allow_hyphen_values = true, requires = "bracket")]
    pub beta_poly: Option<String>,
    /// Interval "lo,hi" isolating the wanted root of --beta-poly.
    #[arg(long)]
    pub bracket: Option<String>,
    /// rho, chi, sqrt2, phi, mu3, gamma6, gamma5 or e; repeatable.
    #[arg(long)]
    pub beta_named: Vec<String>,
    /// Bits of precision for polynomial roots.
    #[arg(long, default_value_t = betarep::beta::DEFAULT_PRECISION)]
    pub precision: u32,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

/// Decimal or `p/q`.
/// A table name, or `muK` / `gammaK` for any k the root finders accept.
fn named_base(n: &str, precision: u32) -> Result<Beta> {
    if let Ok(name) = n.parse::<Named>() {
        return Ok(Beta::named(name));
    }
    if let Some(k) = n.strip_prefix("mu").and_then(|k| k.parse().ok()) {
        return betarep::multinacci(k, precision);
    }
    if let Some(k) = n.strip_prefix("gamma").and_then(|k| k.parse().ok()) {
        return betarep::gamma_k(k, precision);
    }
    n.parse::<Named>().map(Beta::named)
}

pub fn parse_beta_value(s: &str) -> Result<Beta> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p
            .trim()
            .parse()
            .map_err(|_| usage(format!("bad ratio {s:?}")))?;
        let q: i64 = q
            .trim()
            .parse()
            .map_err(|_| usage(format!("bad ratio {s:?}")))?;
        return Beta::from_ratio(p, q);
    }
    let x: f64 = s.parse().map_err(|_| usage(format!("bad number {s:?}")))?;
    Beta::from_f64(x)
}

impl BetaArgs {
    pub fn resolve(&self) -> Result<Vec<Beta>> {
        let mut out = Vec::new();
        for b in &self.beta {
            out.push(parse_beta_value(b)?);
        }
        if let Some(poly) = &self.beta_poly {
            let coeffs = poly
                .split(',')
                .map(|c| {
                    c.trim()
                        .parse::<i64>()
                        .map_err(|_| usage(format!("bad coefficient {c:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            let bracket = self
                .bracket
                .as_deref()
                .ok_or_else(|| usage("--beta-poly needs --bracket"))?;
            let (lo, hi) = bracket
                .split_once(',')
                .ok_or_else(|| usage("--bracket takes lo,hi"))?;
            let lo: f64 = lo.trim().parse().map_err(|_| usage("bad bracket"))?;
            let hi: f64 = hi.trim().parse().map_err(|_| usage("bad bracket"))?;
            out.push(Beta::from_poly(&coeffs, lo, hi, self.precision)?);
        }
        for n in &self.beta_named {
            out.push(named_base(n, self.precision)?);
        }
        if out.is_empty() {
            return Err(usage(
                "give a base with --beta, --beta-poly or --beta-named",
            ));
        }
        Ok(out)
    }

    pub fn single(&self) -> Result<Beta> {
        let mut v = self.resolve()?;
        if v.len() != 1 {
            return Err(usage("this command takes exactly one base"));
        }
        Ok(v.pop().unwrap())
    }
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Write CSV here instead of standard output.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Also write a JSON document (result plus the invoking command line).
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeadingArg {
    /// Integer part expanded in base beta too.
    Expanded,
    /// d0 is the plain integer part.
    Unbounded,
}

#[derive(Args, Debug)]
pub struct ExpandArgs {
    #[command(flatten)]
    pub beta: BetaArgs,
    /// The number, as a decimal or p/q.
    #[arg(long)]
    pub u: String,
    /// Fractional digits to produce.
    #[arg(long, default_value_t = 30)]
    pub digits: usize,
    #[arg(long, value_enum, default_value_t = LeadingArg::Expanded)]
    pub leading: LeadingArg,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct UnityArgs {
    #[command(flatten)]
    pub beta: BetaArgs,
    #[arg(long, default_value_t = 40)]
    pub digits: usize,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReduceArgs {
    #[command(flatten)]
    pub beta: BetaArgs,
    /// Representation in point notation, e.g. 13.01 or 1,12.0,3 for digits above 9.
    #[arg(long)]
    pub word: String,
    /// Digits of the expansion of 1 used to build the table.
    #[arg(long, default_value_t = 40)]
    pub unity_digits: usize,
    /// Disallowed words listed when the expansion of 1 is infinite.
    #[arg(long, default_value_t = 16)]
    pub horizon: usize,
    /// Deepest fractional position kept; mass beyond it is reported.
    #[arg(long, default_value_t = betarep::reduction::DEFAULT_TRUNCATION)]
    pub truncation: i32,
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// Lowest position a replacement may write to.
    #[arg(long, allow_hyphen_values = true)]
    pub floor: Option<i32>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub beta: BetaArgs,
    /// Comparison-stream symbols used for the greedy average.
    #[arg(long, default_value_t = betarep::bounds::DEFAULT_AUTOMATON_DEPTH)]
    pub depth: usize,
    #[arg(long, default_value_t = 1e-13)]
    pub tolerance: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct CoverageArgs {
    #[command(flatten)]
    pub beta: BetaArgs,
    /// Word length.
    #[arg(long)]
    pub k: usize,
    /// Largest digit sum tried (default k(ceil(beta)-1), which always covers).
    #[arg(long)]
    pub s_max: Option<u32>,
    /// Stop after this many words.
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long, default_value_t = betarep::coverage::DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    #[arg(long, default_value_t = betarep::coverage::MAX_BINS)]
    pub max_bins: usize,
    /// Checkpoint file, written after each digit sum and resumed from if present.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Random points checked against the covering words.
    #[arg(long, default_value_t = 0)]
    pub spot_check: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct FigureArgs {
    #[arg(long, default_value = "1.05")]
    pub grid_lo: String,
    #[arg(long, default_value = "4.00")]
    pub grid_hi: String,
    #[arg(long, default_value = "0.05")]
    pub grid_step: String,
    #[arg(long, default_value_t = 8)]
    pub k_max: usize,
    #[arg(long, default_value_t = betarep::bounds::DEFAULT_AUTOMATON_DEPTH)]
    pub depth: usize,
    /// Leave out the rows for rho and the multinacci numbers.
    #[arg(long)]
    pub no_special: bool,
    /// Per-point word budget for the coverage search.
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long, default_value_t = betarep::coverage::DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyArg {
    /// Contract when within theta of the x1-axis, rotate otherwise.
    GreedyAngle,
    /// Replay the switching signal of --word.
    DigitDriven,
}

#[derive(Args, Debug)]
pub struct ProbeArgs {
    #[command(flatten)]
    pub beta: BetaArgs,
    /// Contraction factor c in (0,1).
    #[arg(long)]
    pub c: f64,
    /// Decreasing rotation angles in (0, pi/4], comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub theta: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub steps: usize,
    #[arg(long, value_enum, default_value_t = StrategyArg::GreedyAngle)]
    pub strategy: StrategyArg,
    /// Digits (from position 0) for the digit-driven strategy.
    #[arg(long)]
    pub word: Option<String>,
    /// Average digit for the reference rate (default: the greedy average).
    #[arg(long)]
    pub dbar: Option<f64>,
    /// Initial unit vectors, evenly spaced in angle.
    #[arg(long, default_value_t = 64)]
    pub vectors: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}
