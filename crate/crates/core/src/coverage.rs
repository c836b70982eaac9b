//! Numerical upper bound on the minimum average digit.
//!
//! All length-k words are enumerated in increasing digit sum S. Their values
//! `Σ_{j=1..k} d_j β^(-j)` are dropped into bins of width `h = β^(-k)` that
//! keep the smallest and largest value seen. Once the sorted values start at 0
//! with consecutive gaps, and the gap up to 1, all at most `h` (plus a small
//! tolerance), every `u ∈ [0,1)` is within `h` above some word of sum ≤ S,
//! and S/k bounds the average digit.
//!
//! Values are held in 62-bit fixed point, so two words differing by one in
//! the last digit are exactly one bin width apart and need no tolerance.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::beta::Beta;
use crate::bounds::ser_opt_ratio;
use crate::error::{Error, Result};
use crate::numeric::Dd;
use crate::word::DigitWord;

pub const DEFAULT_TOLERANCE: f64 = 1e-14;
/// Largest number of bins allocated (two u64 arrays each).
pub const MAX_BINS: usize = 1 << 26;

const FRAC_BITS: i32 = 62;
const ONE: u64 = 1 << FRAC_BITS;
const EMPTY: u64 = u64::MAX;

const CHECKPOINT_MAGIC: &[u8; 8] = b"BRCOVCK1";
const CHECKPOINT_VERSION: u32 = 1;

/// Lexicographically ordered compositions of `sum` into `k` non-negative parts.
#[derive(Clone, Debug)]
pub struct Compositions {
    current: Option<Vec<u32>>,
}

impl Compositions {
    pub fn new(k: usize, sum: u32) -> Compositions {
        if k == 0 {
            return Compositions {
                current: if sum == 0 { Some(vec![]) } else { None },
            };
        }
        let mut first = vec![0; k];
        first[k - 1] = sum;
        Compositions {
            current: Some(first),
        }
    }
}

impl Iterator for Compositions {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        let out = self.current.take()?;
        let k = out.len();
        // Move one unit from the last nonzero part (beyond the first) one place left,
        // and park the rest of that part at the end.
        if let Some(p) = (1..k).rev().find(|&p| out[p] > 0) {
            let mut next = out.clone();
            let t = next[p];
            next[p - 1] += 1;
            next[p] = 0;
            next[k - 1] = t - 1;
            self.current = Some(next);
        }
        Some(out)
    }
}

/// Words `d₁…d_k` (positions 1..k) with digit sum exactly `sum`, in lexicographic order.
pub fn enumerate_by_digit_sum(k: usize, sum: u32) -> impl Iterator<Item = DigitWord> {
    Compositions::new(k, sum).map(|d| DigitWord::new(1, d))
}

/// Number of length-k words with digit sum at most `sum`: `C(sum + k, k)`.
pub fn cumulative_count(k: u64, sum: u64) -> u128 {
    let mut c: u128 = 1;
    for i in 1..=k as u128 {
        c = c * (sum as u128 + i) / i;
    }
    c
}

/// Fixed-point `round(β^(-j) 2^62)` for j = 1..k.
fn weights(beta: &Beta, k: usize) -> Vec<u64> {
    let inv = Dd::ONE / beta.value();
    let mut w = Dd::ONE;
    (0..k)
        .map(|_| {
            w = w * inv;
            let scaled = w.mul_f64(ONE as f64);
            let hi = scaled.hi.round();
            let rest = (scaled - Dd::from_f64(hi)).to_f64().round();
            (hi as i128 + rest as i128) as u64
        })
        .collect()
}

/// Per-bin minimum and maximum of the values inserted so far.
#[derive(Debug)]
pub struct CoverageGrid {
    pub k: usize,
    weights: Vec<u64>,
    min: Vec<AtomicU64>,
    max: Vec<AtomicU64>,
}

impl CoverageGrid {
    pub fn new(beta: &Beta, k: usize, max_bins: usize) -> Result<CoverageGrid> {
        if k == 0 {
            return Err(Error::Domain("word length must be positive".into()));
        }
        let weights = weights(beta, k);
        let h = weights[k - 1];
        if h == 0 {
            return Err(Error::BudgetExceeded(format!(
                "bin width below fixed-point resolution at k={k}"
            )));
        }
        let nbins = ONE.div_ceil(h) as usize;
        if nbins > max_bins {
            return Err(Error::BudgetExceeded(format!(
                "{nbins} bins at k={k} exceeds the cap of {max_bins}"
            )));
        }
        Ok(CoverageGrid {
            k,
            weights,
            min: (0..nbins).map(|_| AtomicU64::new(EMPTY)).collect(),
            max: (0..nbins).map(|_| AtomicU64::new(0)).collect(),
        })
    }

    pub fn bins(&self) -> usize {
        self.min.len()
    }

    /// Bin width `β^(-k)` as a real.
    pub fn bin_width(&self) -> f64 {
        self.weights[self.k - 1] as f64 / ONE as f64
    }

    /// `(min, max)` of bin `i` as reals, if occupied.
    pub fn bin(&self, i: usize) -> Option<(f64, f64)> {
        let lo = self.min[i].load(Ordering::Relaxed);
        (lo != EMPTY).then(|| {
            (
                lo as f64 / ONE as f64,
                self.max[i].load(Ordering::Relaxed) as f64 / ONE as f64,
            )
        })
    }

    fn insert(&self, v: u64) {
        let i = (v / self.weights[self.k - 1]) as usize;
        self.min[i].fetch_min(v, Ordering::Relaxed);
        self.max[i].fetch_max(v, Ordering::Relaxed);
    }

    /// Inserts every word of digit sum exactly `sum` whose value is below 1,
    /// returning how many were inserted. Work is split by the leading two digits.
    pub fn insert_sum(&self, sum: u32) -> u64 {
        let k = self.k;
        if k == 1 {
            return self.place(0, sum, 0);
        }
        let heads: Vec<(u32, u32)> = (0..=sum)
            .flat_map(|a| (0..=sum - a).map(move |b| (a, b)))
            .collect();
        heads
            .par_iter()
            .map(|&(a, b)| {
                let w = &self.weights;
                let v = (a as u64)
                    .saturating_mul(w[0])
                    .saturating_add((b as u64).saturating_mul(w[1]));
                if v >= ONE {
                    return 0;
                }
                if k == 2 {
                    if a + b == sum {
                        self.insert(v);
                        return 1;
                    }
                    return 0;
                }
                self.place(2, sum - a - b, v)
            })
            .sum()
    }

    /// Distributes `rem` over positions `pos..k` on top of `partial`.
    fn place(&self, pos: usize, rem: u32, partial: u64) -> u64 {
        let k = self.k;
        let w = &self.weights;
        let last = w[k - 1];
        if pos == k - 1 {
            let v = partial.saturating_add((rem as u64).saturating_mul(last));
            if v < ONE {
                self.insert(v);
                return 1;
            }
            return 0;
        }
        let mut count = 0;
        let mut v = partial;
        for d in 0..=rem {
            // Cheapest completion puts the remaining sum in the last position.
            if v.saturating_add(((rem - d) as u64).saturating_mul(last)) >= ONE {
                break;
            }
            count += self.place(pos + 1, rem - d, v);
            v = v.saturating_add(w[pos]);
        }
        count
    }

    /// Gap check over the occupied bins.
    pub fn check(&self, tolerance: f64) -> GapCheck {
        let h = self.weights[self.k - 1];
        let tol = (tolerance * ONE as f64).ceil() as u64;
        let n = self.bins();
        let mut worst: u64 = 0;
        let mut used_tolerance = false;
        let mut ok = true;
        let mut prev_max: Option<u64> = None;
        for i in 0..n {
            let lo = self.min[i].load(Ordering::Relaxed);
            if lo == EMPTY {
                // Only the final, partial bin may stay empty; the end gap decides it.
                if i + 1 < n {
                    ok = false;
                }
                continue;
            }
            let gap = match prev_max {
                Some(p) => lo - p,
                None => lo,
            };
            worst = worst.max(gap);
            used_tolerance |= gap > h;
            ok &= gap <= h + tol;
            prev_max = Some(self.max[i].load(Ordering::Relaxed));
        }
        let end = ONE - prev_max.unwrap_or(0);
        worst = worst.max(end);
        used_tolerance |= end > h;
        ok &= end <= h + tol;
        GapCheck {
            covered: ok,
            worst_gap: worst as f64 / ONE as f64,
            used_tolerance,
        }
    }

    fn snapshot(&self) -> (Vec<u64>, Vec<u64>) {
        (
            self.min.iter().map(|a| a.load(Ordering::Relaxed)).collect(),
            self.max.iter().map(|a| a.load(Ordering::Relaxed)).collect(),
        )
    }

    fn restore(&self, min: &[u64], max: &[u64]) {
        for (a, &v) in self.min.iter().zip(min) {
            a.store(v, Ordering::Relaxed);
        }
        for (a, &v) in self.max.iter().zip(max) {
            a.store(v, Ordering::Relaxed);
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct GapCheck {
    pub covered: bool,
    pub worst_gap: f64,
    /// Some gap exceeded the bin width and passed only through the tolerance.
    pub used_tolerance: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoverageOptions {
    pub tolerance: f64,
    /// Stop once more than this many words have been inserted (checked after each digit sum).
    pub sequence_cap: Option<u64>,
    pub max_bins: usize,
    /// Written after every digit sum; resumed from when present.
    pub checkpoint: Option<PathBuf>,
}

impl Default for CoverageOptions {
    fn default() -> CoverageOptions {
        CoverageOptions {
            tolerance: DEFAULT_TOLERANCE,
            sequence_cap: None,
            max_bins: MAX_BINS,
            checkpoint: None,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverageStatus {
    Covered,
    NotCovered,
    BudgetExceeded,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverageReport {
    pub beta: f64,
    pub k: usize,
    /// The covering digit sum, or the last one processed.
    pub s: u32,
    pub status: CoverageStatus,
    pub covered: bool,
    pub worst_gap: f64,
    pub sequences_examined: u64,
    #[serde(serialize_with = "ser_opt_ratio")]
    pub bound: Option<Ratio<i64>>,
    pub wall_time: f64,
}

/// Smallest `S ≤ s_max` whose words of length k cover `[0,1)`, giving the bound `S/k`.
pub fn coverage_upper_bound(
    beta: &Beta,
    k: usize,
    s_max: u32,
    opts: &CoverageOptions,
) -> Result<CoverageReport> {
    let started = Instant::now();
    let grid = CoverageGrid::new(beta, k, opts.max_bins)?;
    let mut next_s = 0u32;
    let mut examined = 0u64;
    if let Some(path) = &opts.checkpoint {
        if path.exists() {
            let ck = read_checkpoint(path)?;
            ck.matches(beta, k, opts.tolerance, grid.bins())?;
            grid.restore(&ck.min, &ck.max);
            next_s = ck.next_s;
            examined = ck.examined;
        }
    }
    let report = |s: u32, status: CoverageStatus, check: GapCheck, examined: u64| CoverageReport {
        beta: beta.approx(),
        k,
        s,
        status,
        covered: status == CoverageStatus::Covered,
        worst_gap: check.worst_gap,
        sequences_examined: examined,
        bound: (status == CoverageStatus::Covered).then(|| Ratio::new(s as i64, k as i64)),
        wall_time: started.elapsed().as_secs_f64(),
    };
    if next_s > 0 {
        let check = grid.check(opts.tolerance);
        if check.covered {
            return Ok(report(next_s - 1, CoverageStatus::Covered, check, examined));
        }
    }
    let mut last = grid.check(opts.tolerance);
    for s in next_s..=s_max {
        examined += grid.insert_sum(s);
        last = grid.check(opts.tolerance);
        if let Some(path) = &opts.checkpoint {
            write_checkpoint(path, beta, k, opts.tolerance, s + 1, examined, &grid)?;
        }
        if last.covered {
            return Ok(report(s, CoverageStatus::Covered, last, examined));
        }
        if opts.sequence_cap.is_some_and(|cap| examined > cap) {
            return Ok(report(s, CoverageStatus::BudgetExceeded, last, examined));
        }
    }
    Ok(report(
        s_max.max(next_s.saturating_sub(1)),
        CoverageStatus::NotCovered,
        last,
        examined,
    ))
}

struct Checkpoint {
    beta_hi: u64,
    beta_lo: u64,
    k: u64,
    tolerance: u64,
    next_s: u32,
    examined: u64,
    min: Vec<u64>,
    max: Vec<u64>,
}

impl Checkpoint {
    fn matches(&self, beta: &Beta, k: usize, tolerance: f64, bins: usize) -> Result<()> {
        let v = beta.value();
        if self.beta_hi != v.hi.to_bits()
            || self.beta_lo != v.lo.to_bits()
            || self.k != k as u64
            || self.tolerance != tolerance.to_bits()
            || self.min.len() != bins
        {
            return Err(Error::Checkpoint(
                "checkpoint was written for a different run".into(),
            ));
        }
        Ok(())
    }
}

fn write_checkpoint(
    path: &Path,
    beta: &Beta,
    k: usize,
    tolerance: f64,
    next_s: u32,
    examined: u64,
    grid: &CoverageGrid,
) -> Result<()> {
    let io = |e: std::io::Error| Error::Checkpoint(format!("{}: {e}", path.display()));
    let (min, max) = grid.snapshot();
    let mut buf = Vec::with_capacity(64 + 16 * min.len());
    buf.extend_from_slice(CHECKPOINT_MAGIC);
    buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    let v = beta.value();
    for x in [
        v.hi.to_bits(),
        v.lo.to_bits(),
        k as u64,
        tolerance.to_bits(),
    ] {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    buf.extend_from_slice(&next_s.to_le_bytes());
    buf.extend_from_slice(&examined.to_le_bytes());
    buf.extend_from_slice(&(min.len() as u64).to_le_bytes());
    for x in min.iter().chain(&max) {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(&buf).map_err(io)?;
    f.sync_all().map_err(io)?;
    fs::rename(&tmp, path).map_err(io)?;
    Ok(())
}

fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    let bad = |m: &str| Error::Checkpoint(format!("{}: {m}", path.display()));
    let mut buf = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut buf))
        .map_err(|e| bad(&e.to_string()))?;
    let mut at = 0usize;
    let mut take = |n: usize| -> Result<&[u8]> {
        let s = buf.get(at..at + n).ok_or_else(|| bad("truncated"))?;
        at += n;
        Ok(s)
    };
    if take(8)? != CHECKPOINT_MAGIC {
        return Err(bad("not a coverage checkpoint"));
    }
    let version = u32::from_le_bytes(take(4)?.try_into().unwrap());
    if version != CHECKPOINT_VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    let mut u64s = |n: usize| -> Result<Vec<u64>> {
        (0..n)
            .map(|_| Ok(u64::from_le_bytes(take(8)?.try_into().unwrap())))
            .collect()
    };
    let head = u64s(4)?;
    let next_s = u32::from_le_bytes(take(4)?.try_into().unwrap());
    let examined = u64::from_le_bytes(take(8)?.try_into().unwrap());
    let bins = u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize;
    if bins > MAX_BINS {
        return Err(bad("bin count out of range"));
    }
    let mut u64s = |n: usize| -> Result<Vec<u64>> {
        (0..n)
            .map(|_| Ok(u64::from_le_bytes(take(8)?.try_into().unwrap())))
            .collect()
    };
    let min = u64s(bins)?;
    let max = u64s(bins)?;
    Ok(Checkpoint {
        beta_hi: head[0],
        beta_lo: head[1],
        k: head[2],
        tolerance: head[3],
        next_s,
        examined,
        min,
        max,
    })
}

/// Result of sampling `u ∈ [0,1)` and looking for a word value just below it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpotCheck {
    pub samples: usize,
    pub failures: usize,
    /// Largest `u - v` seen, in units of the bin width.
    pub worst_ratio: f64,
}

/// Re-enumerates all words of length k with sum ≤ `s` (no pruning), sorts their
/// values and checks random points for a witness within `β^(-k)` + tolerance below.
pub fn spot_check(
    beta: &Beta,
    k: usize,
    s: u32,
    samples: usize,
    seed: u64,
    tolerance: f64,
) -> SpotCheck {
    let w = weights(beta, k);
    let h = w[k - 1];
    let tol = (tolerance * ONE as f64).ceil() as u64;
    let mut values: Vec<u64> = (0..=s)
        .flat_map(|t| Compositions::new(k, t))
        .map(|d| {
            d.iter()
                .zip(&w)
                .fold(0u128, |acc, (&d, &w)| acc + d as u128 * w as u128)
        })
        .filter(|&v| v < ONE as u128)
        .map(|v| v as u64)
        .collect();
    values.sort_unstable();
    values.dedup();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    let mut worst = 0u64;
    for _ in 0..samples {
        let u: u64 = rng.gen_range(0..ONE);
        let idx = values.partition_point(|&v| v <= u);
        let gap = if idx == 0 {
            u64::MAX
        } else {
            u - values[idx - 1]
        };
        worst = worst.max(gap);
        if gap > h + tol {
            failures += 1;
        }
    }
    SpotCheck {
        samples,
        failures,
        worst_ratio: worst as f64 / h as f64,
    }
}

/// Per-base result of a sweep over k.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub beta: f64,
    pub label: String,
    /// The report with the smallest bound (smallest k on ties).
    pub best: Option<CoverageReport>,
    pub reports: Vec<CoverageReport>,
    pub errors: Vec<String>,
}

impl SweepPoint {
    pub fn bound(&self) -> Option<Ratio<i64>> {
        self.best.as_ref().and_then(|r| r.bound)
    }
}

/// Largest useful digit sum for length k: greedy words already cover at
/// `k (⌈β⌉ - 1)`.
pub fn default_s_max(beta: &Beta, k: usize) -> u32 {
    let top = if beta.is_integer() {
        beta.floor_digit() - 1
    } else {
        beta.floor_digit()
    };
    k as u32 * top
}

/// Runs k = 2..=k_max for every base, keeping the minimum bound. Digit sums
/// that could not beat the best bound so far are not tried. Points run in
/// parallel; results come back in grid order.
pub fn sweep(grid: &[Beta], k_max: usize, opts: &CoverageOptions) -> Vec<SweepPoint> {
    grid.par_iter()
        .map(|beta| {
            let mut best: Option<CoverageReport> = None;
            let mut reports = Vec::new();
            let mut errors = Vec::new();
            for k in 2..=k_max {
                let mut s_max = default_s_max(beta, k);
                if let Some(b) = best.as_ref().and_then(|r| r.bound) {
                    // Only S with S/k < b can improve: S ≤ ⌈b k⌉ - 1.
                    let lim = (b * Ratio::from_integer(k as i64)).ceil().to_integer() - 1;
                    if lim < 0 {
                        continue;
                    }
                    s_max = s_max.min(lim as u32);
                }
                let opts = CoverageOptions {
                    checkpoint: None,
                    ..opts.clone()
                };
                match coverage_upper_bound(beta, k, s_max, &opts) {
                    Ok(r) => {
                        if r.bound.is_some()
                            && best
                                .as_ref()
                                .and_then(|b| b.bound)
                                .is_none_or(|b| r.bound.unwrap() < b)
                        {
                            best = Some(r.clone());
                        }
                        reports.push(r);
                    }
                    Err(e) => errors.push(format!("k={k}: {e}")),
                }
            }
            SweepPoint {
                beta: beta.approx(),
                label: beta.label(),
                best,
                reports,
                errors,
            }
        })
        .collect()
}
