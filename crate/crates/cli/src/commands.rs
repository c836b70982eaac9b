use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use betarep::coverage::{default_s_max, spot_check};
use betarep::expansion::Termination;
use betarep::figure::rational_grid;
use betarep::numeric::{Certified, Dd};
use betarep::{
    build_disallowed_table, conjecture1_probe, coverage_upper_bound, digits_to_switching,
    evaluate_bounds, expansion_of_unity, expansion_of_unity_partial, figure1, greedy_average,
    greedy_expand, reduce_to_expansion, BetaRepresentation, CoverageOptions, CoverageStatus,
    DigitDriven, DigitWord, Error, FigureConfig, GreedyAngle, Leading, ReduceOptions,
    ReductionOutcome,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{
    BoundsArgs, Cli, Command, CoverageArgs, ExpandArgs, FigureArgs, LeadingArg, OutputArgs,
    ProbeArgs, ReduceArgs, StrategyArg, UnityArgs,
};
use crate::{EXIT_BUDGET, EXIT_PRECISION, EXIT_USAGE};

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Io(String),
    Failed(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(m) | CliError::Failed(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> CliError {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> CliError {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> CliError {
        CliError::Io(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

pub fn exit_code(e: &CliError) -> u8 {
    match e {
        CliError::Core(Error::PrecisionExhausted { .. } | Error::HorizonTooShort { .. }) => {
            EXIT_PRECISION
        }
        CliError::Core(Error::StepBudgetExhausted(_) | Error::BudgetExceeded(_)) => EXIT_BUDGET,
        CliError::Core(
            Error::Parse(_)
            | Error::Domain(_)
            | Error::BracketInvalid { .. }
            | Error::IncompleteBlock(_),
        ) => EXIT_USAGE,
        _ => 1,
    }
}

pub fn run(cli: Cli) -> CliResult<u8> {
    let Some(workers) = cli.workers else {
        return dispatch(cli.command);
    };
    if workers == 0 {
        return Err(Error::Parse("--workers must be positive".into()).into());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Failed(e.to_string()))?;
    pool.install(|| dispatch(cli.command))
}

fn dispatch(cmd: Command) -> CliResult<u8> {
    match cmd {
        Command::Expand(a) => cmd_expand(a),
        Command::Unity(a) => cmd_unity(a),
        Command::Reduce(a) => cmd_reduce(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Coverage(a) => cmd_coverage(a),
        Command::Figure1(a) => cmd_figure1(a),
        Command::Probe(a) => cmd_probe(a),
    }
}

fn write_json(path: Option<&Path>, result: Value) -> CliResult<()> {
    let Some(path) = path else { return Ok(()) };
    let doc = json!({ "command": std::env::args().collect::<Vec<_>>(), "result": result });
    fs::write(
        path,
        serde_json::to_string_pretty(&doc).map_err(|e| CliError::Io(e.to_string()))? + "\n",
    )?;
    Ok(())
}

fn write_csv<T: Serialize>(rows: &[T], out: &OutputArgs) -> CliResult<()> {
    let sink: Box<dyn Write> = match &out.csv {
        Some(p) => Box::new(fs::File::create(p)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data serializes")
}

/// Decimal or `p/q`, as a certified value.
fn parse_number(s: &str) -> CliResult<Certified> {
    let s = s.trim();
    let bad = || CliError::Core(Error::Parse(format!("bad number {s:?}")));
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q <= 0 {
            return Err(bad());
        }
        return Ok(
            Certified::exact(Dd::from_f64(p as f64)).div(&Certified::exact(Dd::from_f64(q as f64)))
        );
    }
    let x: f64 = s.parse().map_err(|_| bad())?;
    if !x.is_finite() || x < 0.0 {
        return Err(bad());
    }
    Ok(Certified::exact(Dd::from_f64(x)))
}

fn cmd_expand(a: ExpandArgs) -> CliResult<u8> {
    let beta = a.beta.single()?;
    let u = parse_number(&a.u)?;
    // For u in [0,1] digits start at position 1, so 1 itself gives d_β(1).
    let (text, value) = if u.err == 0.0 && u.value == Dd::ONE {
        let unity = expansion_of_unity(&beta, a.digits)?;
        let text = format!("0.{}", unity.to_digit_string());
        (
            text,
            json!({ "digits": unity.digits, "finite": unity.is_finite() }),
        )
    } else {
        let leading = match a.leading {
            LeadingArg::Expanded => Leading::Expanded,
            LeadingArg::Unbounded => Leading::Unbounded,
        };
        let g = greedy_expand(&beta, &u, a.digits, leading)?;
        let mut text = if g.termination == Termination::Running {
            g.word.to_point_notation()
        } else {
            g.word.trimmed().to_point_notation()
        };
        if g.termination == Termination::Running {
            text.push('…');
        }
        let v = json!({
            "j_min": g.word.j_min,
            "digits": g.word.digits,
            "termination": to_value(&g.termination),
        });
        (text, v)
    };
    println!("{text}");
    write_json(
        a.json.as_deref(),
        json!({ "beta": beta.approx(), "u": a.u, "expansion": text, "detail": value }),
    )?;
    Ok(0)
}

fn cmd_unity(a: UnityArgs) -> CliResult<u8> {
    let beta = a.beta.single()?;
    let (unity, code) = match expansion_of_unity(&beta, a.digits) {
        Ok(u) => (u, 0),
        Err(Error::PrecisionExhausted { position, .. }) => {
            eprintln!("precision exhausted at digit {position}; showing the certified prefix");
            (expansion_of_unity_partial(&beta, a.digits)?, EXIT_PRECISION)
        }
        Err(e) => return Err(e.into()),
    };
    let period = match unity.period {
        Some((pre, per)) => format!("preperiod {pre}, period {per}"),
        None => "none".into(),
    };
    println!("beta: {}", beta.label());
    println!("digits: {}", unity.to_digit_string());
    println!("finite: {}", unity.is_finite());
    println!("period: {period}");
    println!(
        "monotone: {}",
        to_value(&unity.monotone).as_str().unwrap_or("")
    );
    write_json(
        a.json.as_deref(),
        json!({
            "beta": beta.approx(),
            "label": beta.label(),
            "digits": unity.digits,
            "finite": unity.is_finite(),
            "termination": to_value(&unity.termination),
            "period": unity.period,
            "monotone": to_value(&unity.monotone),
        }),
    )?;
    Ok(code)
}

fn cmd_reduce(a: ReduceArgs) -> CliResult<u8> {
    let beta = a.beta.single()?;
    let word = DigitWord::from_point_notation(&a.word)?;
    let unity = expansion_of_unity_partial(&beta, a.unity_digits)?;
    let table = build_disallowed_table(&unity, a.horizon, a.truncation)?;
    for e in &table.entries {
        eprintln!("disallowed: {e}");
    }
    let opts = ReduceOptions {
        max_steps: a.max_steps,
        floor: a.floor,
    };
    let red = reduce_to_expansion(&BetaRepresentation::new(beta.clone(), word), &table, opts)?;
    for (i, (line, sum)) in red.trace_lines().iter().zip(&red.digit_sums).enumerate() {
        println!("{i}\t{line}\t{sum}");
    }
    let outcome = match red.outcome {
        ReductionOutcome::Clean => "clean",
        ReductionOutcome::TailTruncated => "tail-truncated",
        ReductionOutcome::StepBudgetExhausted => "step-budget-exhausted",
    };
    println!("outcome: {outcome} after {} steps", red.steps);
    if red.outcome != ReductionOutcome::Clean {
        println!(
            "mass moved past position {}: {:e} (error bound {:e})",
            table.truncation,
            red.residual.value.to_f64(),
            red.residual.err
        );
    }
    if !red.unreduced.is_empty() {
        println!("left above the floor at positions {:?}", red.unreduced);
    }
    write_json(
        a.json.as_deref(),
        json!({
            "beta": beta.approx(),
            "trace": red.trace_lines(),
            "digit_sums": red.digit_sums,
            "outcome": outcome,
            "steps": red.steps,
            "residual": red.residual.value.to_f64(),
            "unreduced": red.unreduced,
        }),
    )?;
    Ok(if red.outcome == ReductionOutcome::Clean {
        0
    } else {
        EXIT_BUDGET
    })
}

#[derive(Serialize)]
struct BoundsRow {
    beta: f64,
    label: String,
    #[serde(rename = "dbar_betaE")]
    dbar_beta_e: f64,
    dbar_ratio: String,
    dbar_exact: bool,
    thm2_upper: Option<f64>,
    thm2_ratio: Option<String>,
    thm3_lower: f64,
    unity_finite: bool,
    monotone: String,
}

fn cmd_bounds(a: BoundsArgs) -> CliResult<u8> {
    let mut rows = Vec::new();
    for beta in a.beta.resolve()? {
        let ev = evaluate_bounds(&beta, a.depth, a.tolerance)?;
        let unity = expansion_of_unity_partial(&beta, a.depth)?;
        rows.push(BoundsRow {
            beta: ev.beta,
            label: ev.label.clone(),
            dbar_beta_e: betarep::bounds::ratio_f64(&ev.dbar_beta_e.value),
            dbar_ratio: ev.dbar_beta_e.value.to_string(),
            dbar_exact: ev.dbar_beta_e.exact,
            thm2_upper: ev.thm2_upper.as_ref().map(betarep::bounds::ratio_f64),
            thm2_ratio: ev.thm2_upper.map(|r| r.to_string()),
            thm3_lower: ev.thm3_lower,
            unity_finite: unity.is_finite(),
            monotone: to_value(&unity.monotone).as_str().unwrap_or("").to_string(),
        });
    }
    write_csv(&rows, &a.out)?;
    write_json(a.out.json.as_deref(), to_value(&rows))?;
    Ok(0)
}

fn cmd_coverage(a: CoverageArgs) -> CliResult<u8> {
    let beta = a.beta.single()?;
    let opts = CoverageOptions {
        tolerance: a.tolerance,
        sequence_cap: a.budget,
        max_bins: a.max_bins,
        checkpoint: a.checkpoint.clone(),
    };
    let s_max = a.s_max.unwrap_or_else(|| default_s_max(&beta, a.k));
    let report = coverage_upper_bound(&beta, a.k, s_max, &opts)?;
    let check = (report.covered && a.spot_check > 0)
        .then(|| spot_check(&beta, a.k, report.s, a.spot_check, a.seed, a.tolerance));
    write_csv(std::slice::from_ref(&report), &a.out)?;
    write_json(
        a.out.json.as_deref(),
        json!({ "report": to_value(&report), "spot_check": check.as_ref().map(to_value) }),
    )?;
    if let Some(c) = &check {
        eprintln!(
            "spot check: {} samples, {} failures, worst gap {:.6} bin widths",
            c.samples, c.failures, c.worst_ratio
        );
        if c.failures > 0 {
            return Err(CliError::Failed("spot check found uncovered points".into()));
        }
    }
    Ok(if report.status == CoverageStatus::BudgetExceeded {
        EXIT_BUDGET
    } else {
        0
    })
}

/// `"1.05"` as `(105, 2)`.
fn decimal(s: &str) -> CliResult<(i64, u32)> {
    let bad = || CliError::Core(Error::Parse(format!("bad grid value {s:?}")));
    let s = s.trim();
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.len() > 6 || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let n: i64 = format!("{int}{frac}").parse().map_err(|_| bad())?;
    Ok((n, frac.len() as u32))
}

fn cmd_figure1(a: FigureArgs) -> CliResult<u8> {
    let parts = [
        decimal(&a.grid_lo)?,
        decimal(&a.grid_hi)?,
        decimal(&a.grid_step)?,
    ];
    let scale = parts.iter().map(|p| p.1).max().unwrap();
    let [lo, hi, step] = parts.map(|(n, s)| n * 10i64.pow(scale - s));
    if step <= 0 || lo > hi {
        return Err(Error::Parse("empty grid".into()).into());
    }
    let grid = rational_grid(lo, hi, step, 10i64.pow(scale))?;
    let mut cfg = FigureConfig::new(grid);
    cfg.special_points = !a.no_special;
    cfg.k_max = a.k_max;
    cfg.depth = a.depth;
    cfg.coverage.tolerance = a.tolerance;
    cfg.coverage.sequence_cap = a.budget;
    let rows = figure1(&cfg)?;
    write_csv(&rows, &a.out)?;
    write_json(a.out.json.as_deref(), to_value(&rows))?;
    Ok(0)
}

fn cmd_probe(a: ProbeArgs) -> CliResult<u8> {
    let beta = a.beta.single()?;
    let dbar = match a.dbar {
        Some(d) => d,
        None => betarep::bounds::ratio_f64(
            &greedy_average(&beta, betarep::bounds::DEFAULT_AUTOMATON_DEPTH)?.value,
        ),
    };
    let b = beta.approx();
    let rows = match a.strategy {
        StrategyArg::GreedyAngle => conjecture1_probe(
            a.c,
            b,
            &a.theta,
            |t| GreedyAngle { theta: t },
            a.steps,
            dbar,
            a.vectors,
        )?,
        StrategyArg::DigitDriven => {
            let w = a
                .word
                .as_deref()
                .ok_or_else(|| Error::Parse("--strategy digit-driven needs --word".into()))?;
            let signal =
                digits_to_switching(&DigitWord::from_point_notation(w)?.shifted_to_origin())?;
            conjecture1_probe(
                a.c,
                b,
                &a.theta,
                |_| DigitDriven {
                    signal: signal.clone(),
                },
                a.steps,
                dbar,
                a.vectors,
            )?
        }
    };
    write_csv(&rows, &a.out)?;
    write_json(a.out.json.as_deref(), to_value(&rows))?;
    Ok(0)
}
