//! Greedy beta expansions, the expansion of unity, and the lexicographic
//! admissibility test.
//!
//! Digits are extracted from a residual `r` by `d = ⌊β r⌋, r ← β r - d`,
//! carrying a certified error bound that grows by roughly a factor β per
//! digit. A digit is accepted only when `β r` is farther than that bound from
//! every integer. When `β r` lands within the bound of a positive integer and
//! the bound is still tiny (below [`SNAP_LIMIT`]) the residual is taken to be
//! exactly that integer and the expansion terminates; otherwise extraction
//! stops with [`Error::PrecisionExhausted`].

use std::fmt;

use serde::Serialize;

use crate::beta::Beta;
use crate::error::{Error, Result};
use crate::numeric::{Certified, Dd};
use crate::word::{join_digits, DigitWord};

/// Largest error bound under which a near-integer hit is accepted as exact.
pub const SNAP_LIMIT: f64 = 1.0 / (1u64 << 60) as f64;

/// How the digits at positions ≤ 0 are produced.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Leading {
    /// d₀ = ⌊u⌋, unbounded; fractional digits follow.
    Unbounded,
    /// The integer part is itself expanded in base β (digits ≤ ⌊β⌋ throughout),
    /// so the word may start at a negative position.
    Expanded,
}

/// How an expansion ended.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    /// Residual still positive after the requested digits.
    Running,
    /// Residual reached zero in exact arithmetic.
    Exact,
    /// Residual declared zero because it was within `bound` of an integer hit.
    WithinTolerance { bound: f64 },
}

impl Termination {
    pub fn is_finite(&self) -> bool {
        !matches!(self, Termination::Running)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GreedyExpansion {
    pub word: DigitWord,
    pub termination: Termination,
    /// Residual `r_n` after the last digit: the remaining value is `r_n β^(-j_max)`.
    pub residual: Certified,
}

/// Digit-by-digit greedy extraction from a residual in [0, 1).
#[derive(Clone, Debug)]
pub(crate) struct GreedyStream {
    beta: Certified,
    r: Certified,
    /// Position of the next digit produced.
    pub(crate) position: i32,
    pub(crate) termination: Termination,
}

impl GreedyStream {
    pub(crate) fn new(beta: &Beta, r: Certified, first_position: i32) -> GreedyStream {
        let termination = if r.value.is_zero() && r.err == 0.0 {
            Termination::Exact
        } else {
            Termination::Running
        };
        GreedyStream {
            beta: Certified::new(beta.value(), beta.err()),
            r,
            position: first_position,
            termination,
        }
    }

    pub(crate) fn residual(&self) -> Certified {
        self.r
    }

    pub(crate) fn next_digit(&mut self) -> Result<u32> {
        let position = self.position;
        self.position += 1;
        if self.termination.is_finite() {
            return Ok(0);
        }
        let t = self.beta.mul(&self.r);
        let nearest = t.value.to_f64().round();
        let gap = (t.value - Dd::from_f64(nearest)).abs().to_f64();
        if nearest >= 1.0 && gap <= t.err {
            if t.err > SNAP_LIMIT {
                return Err(Error::PrecisionExhausted {
                    position,
                    error_bound: t.err,
                });
            }
            self.r = Certified::exact(Dd::ZERO);
            self.termination = if t.err == 0.0 {
                Termination::Exact
            } else {
                Termination::WithinTolerance { bound: t.err }
            };
            return Ok(nearest as u32);
        }
        if t.err >= 0.5 {
            return Err(Error::PrecisionExhausted {
                position,
                error_bound: t.err,
            });
        }
        let d = t.value.floor();
        self.r = t.sub(&Certified::exact(d));
        if self.r.value.is_zero() && self.r.err == 0.0 {
            self.termination = Termination::Exact;
        }
        Ok(d.to_f64() as u32)
    }
}

/// Certified ⌊u⌋ with the same snapping rule as digit extraction.
fn certified_floor(u: &Certified, position: i32) -> Result<(u64, Certified)> {
    let nearest = u.value.to_f64().round();
    let gap = (u.value - Dd::from_f64(nearest)).abs().to_f64();
    if gap <= u.err && u.err > 0.0 {
        if u.err > SNAP_LIMIT {
            return Err(Error::PrecisionExhausted {
                position,
                error_bound: u.err,
            });
        }
        return Ok((nearest as u64, Certified::exact(Dd::ZERO)));
    }
    let f = u.value.floor();
    Ok((f.to_f64() as u64, u.sub(&Certified::exact(f))))
}

/// Greedy expansion of `u ≥ 0` with `n` digits after the point.
pub fn greedy_expand(
    beta: &Beta,
    u: &Certified,
    n: usize,
    leading: Leading,
) -> Result<GreedyExpansion> {
    greedy_expand_impl(beta, u, n, leading, false)
}

/// Like [`greedy_expand`], but stops early instead of failing when the error
/// bound no longer separates a fractional digit from its boundary. The
/// result then ends in [`Termination::Running`] with the last certified residual.
pub fn greedy_expand_partial(
    beta: &Beta,
    u: &Certified,
    n: usize,
    leading: Leading,
) -> Result<GreedyExpansion> {
    greedy_expand_impl(beta, u, n, leading, true)
}

fn take_digits(
    stream: &mut GreedyStream,
    digits: &mut Vec<u32>,
    count: usize,
    lenient: bool,
) -> Result<()> {
    for _ in 0..count {
        match stream.next_digit() {
            Ok(d) => digits.push(d),
            Err(Error::PrecisionExhausted { .. }) if lenient && stream.position > 1 => {
                stream.position -= 1;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

fn greedy_expand_impl(
    beta: &Beta,
    u: &Certified,
    n: usize,
    leading: Leading,
    lenient: bool,
) -> Result<GreedyExpansion> {
    if u.value.hi < 0.0 {
        return Err(Error::Domain(format!(
            "cannot expand negative value {}",
            u.to_f64()
        )));
    }
    let b = Certified::new(beta.value(), beta.err());
    match leading {
        Leading::Unbounded => {
            let (d0, r0) = certified_floor(u, 0)?;
            let mut stream = GreedyStream::new(beta, r0, 1);
            let mut digits = Vec::with_capacity(n + 1);
            digits.push(
                u32::try_from(d0).map_err(|_| Error::Domain("integer part too large".into()))?,
            );
            take_digits(&mut stream, &mut digits, n, lenient)?;
            Ok(GreedyExpansion {
                word: DigitWord::new(0, digits),
                termination: stream.termination,
                residual: stream.residual(),
            })
        }
        Leading::Expanded => {
            // Largest p ≥ 0 with β^p ≤ u, counting near-ties as reached.
            let mut p = 0i32;
            let mut pw = Certified::exact(Dd::ONE);
            loop {
                let next = pw.mul(&b);
                let slack = u.err + next.err;
                if next.value.to_f64() <= u.value.to_f64() + slack
                    && next.value - u.value <= Dd::from_f64(slack)
                {
                    p += 1;
                    pw = next;
                    if p > 4096 {
                        return Err(Error::Domain("value too large to expand".into()));
                    }
                } else {
                    break;
                }
            }
            let r0 = if u.value.is_zero() && u.err == 0.0 {
                *u
            } else {
                u.div(&pw.mul(&b))
            };
            let r0 = if r0.value.hi < 0.0 {
                Certified::new(Dd::ZERO, r0.err)
            } else {
                r0
            };
            let mut stream = GreedyStream::new(beta, r0, -p);
            let total = (p as usize) + 1 + n;
            let mut digits = Vec::with_capacity(total);
            take_digits(&mut stream, &mut digits, total, lenient)?;
            Ok(GreedyExpansion {
                word: DigitWord::new(-p, digits),
                termination: stream.termination,
                residual: stream.residual(),
            })
        }
    }
}

/// Tri-state verdict for membership in the set of monotone expansions.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Monotone {
    Yes,
    No,
    Inconclusive,
}

/// The greedy expansion of 1 with d₀ = 0, i.e. digits d₁d₂…
#[derive(Clone, Debug, PartialEq)]
pub struct UnityExpansion {
    pub beta: Beta,
    /// d₁, d₂, …; for a finite expansion this ends at the last nonzero digit.
    pub digits: Vec<u32>,
    pub termination: Termination,
    pub period: Option<(usize, usize)>,
    pub monotone: Monotone,
}

impl UnityExpansion {
    pub fn is_finite(&self) -> bool {
        self.termination.is_finite()
    }

    /// The stream that admissible digit strings are compared against, to `len` symbols.
    ///
    /// For a finite expansion d₁…d_m this is the quasi-greedy
    /// `(d₁…d_{m-1}(d_m - 1))^∞`; otherwise the computed digits themselves.
    pub fn comparison_stream(&self, len: usize) -> Result<Vec<u32>> {
        if self.is_finite() {
            let mut period = self.digits.clone();
            *period.last_mut().expect("finite expansion has a digit") -= 1;
            Ok(period.iter().copied().cycle().take(len).collect())
        } else if self.digits.len() >= len {
            Ok(self.digits[..len].to_vec())
        } else {
            Err(Error::HorizonTooShort {
                needed: len,
                available: self.digits.len(),
            })
        }
    }

    /// Digits in the juxtaposed style, with `…` when the expansion did not terminate.
    pub fn to_digit_string(&self) -> String {
        let commas = self.digits.iter().any(|&d| d > 9);
        let mut s = join_digits(&self.digits, commas);
        if !self.is_finite() {
            s.push('…');
        }
        s
    }
}

impl fmt::Display for UnityExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_digit_string())
    }
}

/// d_β(1) to at most `n` digits, with finiteness, period and monotonicity verdicts.
pub fn expansion_of_unity(beta: &Beta, n: usize) -> Result<UnityExpansion> {
    unity_impl(beta, n, false)
}

/// Like [`expansion_of_unity`], but returns the certified prefix when
/// precision runs out before `n` digits (at least one digit is required).
pub fn expansion_of_unity_partial(beta: &Beta, n: usize) -> Result<UnityExpansion> {
    unity_impl(beta, n, true)
}

fn unity_impl(beta: &Beta, n: usize, lenient: bool) -> Result<UnityExpansion> {
    if n == 0 {
        return Err(Error::Domain("need at least one digit".into()));
    }
    let mut stream = GreedyStream::new(beta, Certified::exact(Dd::ONE), 1);
    let mut digits = Vec::with_capacity(n);
    for _ in 0..n {
        match stream.next_digit() {
            Ok(d) => digits.push(d),
            Err(Error::PrecisionExhausted { .. }) if lenient && !digits.is_empty() => break,
            Err(e) => return Err(e),
        }
        if stream.termination.is_finite() {
            break;
        }
    }
    let termination = stream.termination;
    let period = if termination.is_finite() {
        None
    } else {
        detect_eventual_period(&digits)
    };
    let monotone = classify_monotone(&digits, termination.is_finite());
    Ok(UnityExpansion {
        beta: beta.clone(),
        digits,
        termination,
        period,
        monotone,
    })
}

fn classify_monotone(digits: &[u32], finite: bool) -> Monotone {
    if digits.windows(2).any(|w| w[0] < w[1]) {
        Monotone::No
    } else if finite {
        Monotone::Yes
    } else {
        Monotone::Inconclusive
    }
}

/// Membership test for the monotone set, looking at `horizon` digits of d_β(1).
pub fn is_monotone_mb(beta: &Beta, horizon: usize) -> Result<Monotone> {
    if horizon < 2 {
        return Err(Error::Domain("horizon must be at least 2".into()));
    }
    Ok(expansion_of_unity(beta, horizon)?.monotone)
}

/// Smallest `(preperiod, period)` such that the list is eventually periodic
/// with at least three full repetitions of the period after the preperiod.
///
/// Candidates are ranked by `preperiod + period`, then by period.
pub fn detect_eventual_period(digits: &[u32]) -> Option<(usize, usize)> {
    let n = digits.len();
    let mut best: Option<(usize, usize)> = None;
    for p in 1..=n / 3 {
        // Smallest q with digits[i] == digits[i + p] for all i ≥ q.
        let mut q = n - p;
        while q > 0 && digits[q - 1] == digits[q - 1 + p] {
            q -= 1;
        }
        if n - q >= 3 * p {
            let better = match best {
                None => true,
                Some((bq, bp)) => q + p < bq + bp,
            };
            if better {
                best = Some((q, p));
            }
        }
    }
    best
}

/// Lexicographic admissibility: every suffix of the word must not exceed the
/// comparison stream of `unity`.
///
/// A word starting at position 0 is read as `d₀ d₁ …` and its unbounded d₀ is
/// skipped; words starting elsewhere are checked in full.
pub fn is_admissible(word: &DigitWord, unity: &UnityExpansion) -> Result<bool> {
    let digits: &[u32] = if word.j_min == 0 && !word.digits.is_empty() {
        &word.digits[1..]
    } else {
        &word.digits
    };
    if digits.is_empty() {
        return Ok(true);
    }
    let stream = if unity.is_finite() {
        unity.comparison_stream(digits.len())?
    } else {
        unity.digits.clone()
    };
    for start in 0..digits.len() {
        // An exhausted suffix continues with zeros, which never exceed the stream.
        let suffix = &digits[start..];
        for (i, &d) in suffix.iter().enumerate() {
            let Some(&s) = stream.get(i) else {
                return Err(Error::HorizonTooShort {
                    needed: suffix.len(),
                    available: stream.len(),
                });
            };
            if d < s {
                break;
            }
            if d > s {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
