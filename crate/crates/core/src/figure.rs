//! All bound curves on one grid of bases, one row per base.

use rayon::prelude::*;
use serde::Serialize;

use crate::beta::{multinacci, Beta, Named, DEFAULT_PRECISION};
use crate::bounds::{evaluate_bounds, ratio_f64, DEFAULT_AUTOMATON_DEPTH};
use crate::coverage::{sweep, CoverageOptions};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct FigureConfig {
    pub grid: Vec<Beta>,
    /// Append ρ and the multinacci numbers μ₂..μ₆ as flagged rows.
    pub special_points: bool,
    pub k_max: usize,
    pub depth: usize,
    pub tolerance: f64,
    pub coverage: CoverageOptions,
}

impl FigureConfig {
    pub fn new(grid: Vec<Beta>) -> FigureConfig {
        FigureConfig {
            grid,
            special_points: true,
            k_max: 8,
            depth: DEFAULT_AUTOMATON_DEPTH,
            tolerance: 1e-13,
            coverage: CoverageOptions::default(),
        }
    }
}

/// `lo, lo+step, …` up to `hi`, as exact rationals over `den`.
pub fn rational_grid(lo: i64, hi: i64, step: i64, den: i64) -> Result<Vec<Beta>> {
    if step <= 0 || lo > hi {
        return Err(Error::Domain("empty grid".into()));
    }
    (0..)
        .map(|i| lo + i * step)
        .take_while(|&n| n <= hi)
        .map(|n| Beta::from_ratio(n, den))
        .collect()
}

/// The default grid 1.05, 1.10, …, 4.00.
pub fn default_grid() -> Vec<Beta> {
    rational_grid(105, 400, 5, 100).expect("fixed grid is valid")
}

/// ρ and μ₂..μ₆; with the integers these are the flagged points.
pub fn special_points() -> Vec<Beta> {
    let mut v = vec![Beta::named(Named::Rho)];
    v.extend((2..=6).map(|k| multinacci(k, DEFAULT_PRECISION).expect("multinacci roots exist")));
    v
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FigureRow {
    pub beta: f64,
    #[serde(rename = "dbar_betaE")]
    pub dbar_beta_e: f64,
    pub thm2_upper: Option<f64>,
    pub coverage_upper: Option<f64>,
    pub thm3_lower: f64,
    pub is_special_point: bool,
}

/// Rows sorted by β. Deterministic for any worker count.
pub fn figure1(cfg: &FigureConfig) -> Result<Vec<FigureRow>> {
    if cfg.grid.is_empty() {
        return Err(Error::Domain("empty grid".into()));
    }
    let mut points: Vec<(Beta, bool)> = cfg
        .grid
        .iter()
        .map(|b| (b.clone(), b.is_integer()))
        .collect();
    if cfg.special_points {
        points.extend(special_points().into_iter().map(|b| (b, true)));
    }
    let bases: Vec<Beta> = points.iter().map(|(b, _)| b.clone()).collect();
    let swept = sweep(&bases, cfg.k_max, &cfg.coverage);
    let mut rows = points
        .par_iter()
        .zip(swept.par_iter())
        .map(|((beta, special), cov)| {
            let ev = evaluate_bounds(beta, cfg.depth, cfg.tolerance)?;
            Ok(FigureRow {
                beta: ev.beta,
                dbar_beta_e: ratio_f64(&ev.dbar_beta_e.value),
                thm2_upper: ev.thm2_upper.as_ref().map(ratio_f64),
                coverage_upper: cov.bound().as_ref().map(ratio_f64),
                thm3_lower: ev.thm3_lower,
                is_special_point: *special,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.beta.total_cmp(&b.beta));
    Ok(rows)
}
