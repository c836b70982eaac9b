//! Bounds on the minimum average digit.
//!
//! * the greedy average through the beta-shift automaton and its maximum cycle mean,
//! * the explicit upper bound for `2 < β ≤ γ₅` together with a constructive
//!   representation that achieves it,
//! * the conditional lower bound obtained by inverting `(d+1)^(d+1) / d^d = β`.

use std::sync::OnceLock;

use num_bigint::{BigInt, Sign};
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::beta::{gamma_k, Beta, DEFAULT_PRECISION};
use crate::error::{Error, Result};
use crate::expansion::{expansion_of_unity_partial, UnityExpansion};
use crate::numeric::{solve_increasing_root, Dd};
use crate::representation::BetaRepresentation;
use crate::word::DigitWord;

/// Default number of comparison-stream symbols tracked by the automaton.
pub const DEFAULT_AUTOMATON_DEPTH: usize = 32;

/// Deterministic automaton for words whose every suffix is lexicographically
/// at most the comparison stream, compared on its first `depth` symbols.
///
/// State `i` is the length of the longest suffix read so far that is a proper
/// prefix of the stream.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftAutomaton {
    pub stream: Vec<u32>,
    pub max_digit: u32,
    /// `next[i][a]` for digit `a`, `None` when `a` is not allowed in state `i`.
    pub next: Vec<Vec<Option<usize>>>,
    /// The accepted language equals the admissible one, not merely contains it.
    pub exact: bool,
}

impl ShiftAutomaton {
    /// Builds the automaton for a comparison stream (all symbols compared).
    pub fn from_stream(stream: Vec<u32>, exact: bool) -> Result<ShiftAutomaton> {
        let n = stream.len();
        if n == 0 {
            return Err(Error::Domain("empty comparison stream".into()));
        }
        let max_digit = stream[0];
        // KMP borders: fail[i] = longest proper border of stream[..i].
        let mut fail = vec![0usize; n + 1];
        let mut b = 0usize;
        for i in 1..n {
            while b > 0 && stream[i] != stream[b] {
                b = fail[b];
            }
            if stream[i] == stream[b] {
                b += 1;
            }
            fail[i + 1] = b;
        }
        let next = (0..n)
            .map(|state| {
                (0..=max_digit)
                    .map(|a| {
                        let mut target = None;
                        let mut v = state;
                        loop {
                            if a > stream[v] {
                                return None;
                            }
                            if a == stream[v] && target.is_none() && v + 1 < n {
                                target = Some(v + 1);
                            }
                            if v == 0 {
                                break;
                            }
                            v = fail[v];
                        }
                        Some(target.unwrap_or(0))
                    })
                    .collect()
            })
            .collect();
        Ok(ShiftAutomaton {
            stream,
            max_digit,
            next,
            exact,
        })
    }

    pub fn states(&self) -> usize {
        self.next.len()
    }

    /// Whether the word (digits after d₀) is accepted from the initial state.
    pub fn accepts(&self, digits: &[u32]) -> bool {
        let mut s = 0;
        for &a in digits {
            match self.next[s].get(a as usize).copied().flatten() {
                Some(t) => s = t,
                None => return false,
            }
        }
        true
    }
}

/// The automaton for d_β(1) tracking `depth` symbols of its comparison stream.
///
/// For a finite expansion the stream is the periodic quasi-greedy one and the
/// automaton is exact once `depth` reaches its period.
pub fn build_shift_automaton(unity: &UnityExpansion, depth: usize) -> Result<ShiftAutomaton> {
    let stream = unity.comparison_stream(depth)?;
    let exact = unity.is_finite() && depth >= unity.digits.len();
    ShiftAutomaton::from_stream(stream, exact)
}

/// Exact maximum over cycles of (digit sum)/(length), by Karp's recurrence.
pub fn max_mean_cycle(auto: &ShiftAutomaton) -> Ratio<i64> {
    let n = auto.states();
    const NONE: i64 = i64::MIN;
    // d[k][v]: largest weight of a walk with k edges ending in v, from any start.
    let mut d = vec![vec![NONE; n]; n + 1];
    d[0].iter_mut().for_each(|x| *x = 0);
    for k in 0..n {
        let (cur, rest) = d.split_at_mut(k + 1);
        let (cur, nxt) = (&cur[k], &mut rest[0]);
        for v in 0..n {
            if cur[v] == NONE {
                continue;
            }
            for (a, t) in auto.next[v].iter().enumerate() {
                if let Some(t) = *t {
                    let w = cur[v] + a as i64;
                    if w > nxt[t] {
                        nxt[t] = w;
                    }
                }
            }
        }
    }
    let mut best: Option<Ratio<i64>> = None;
    for v in 0..n {
        if d[n][v] == NONE {
            continue;
        }
        let worst = (0..n)
            .filter(|&k| d[k][v] != NONE)
            .map(|k| Ratio::new(d[n][v] - d[k][v], (n - k) as i64))
            .min()
            .expect("k = 0 is always finite");
        if best.is_none_or(|b| worst > b) {
            best = Some(worst);
        }
    }
    best.expect("digit 0 loops in state 0, so a cycle exists")
}

/// The greedy average d̄^(βE) as computed from a truncated automaton.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GreedyAverage {
    #[serde(serialize_with = "ser_ratio")]
    pub value: Ratio<i64>,
    /// Exact when true; otherwise an upper approximation.
    pub exact: bool,
    /// Comparison-stream symbols actually used.
    pub depth: usize,
}

/// d̄^(βE)(β) from `depth` symbols of the comparison stream, or fewer when
/// precision runs out first.
pub fn greedy_average(beta: &Beta, depth: usize) -> Result<GreedyAverage> {
    if depth == 0 {
        return Err(Error::Domain("automaton depth must be positive".into()));
    }
    let unity = expansion_of_unity_partial(beta, depth)?;
    let usable = if unity.is_finite() {
        depth
    } else {
        unity.digits.len()
    };
    let auto = build_shift_automaton(&unity, usable)?;
    Ok(GreedyAverage {
        value: max_mean_cycle(&auto),
        exact: auto.exact,
        depth: usable,
    })
}

pub(crate) fn ser_ratio<S: serde::Serializer>(
    r: &Ratio<i64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

/// Largest k whose γ_k is tabulated; beyond it k is located from a closed form.
pub const GAMMA_CACHE_MAX: u32 = 200;

fn gamma_cache() -> &'static [Beta] {
    static CACHE: OnceLock<Vec<Beta>> = OnceLock::new();
    CACHE.get_or_init(|| {
        (5..=GAMMA_CACHE_MAX)
            .map(|k| gamma_k(k, DEFAULT_PRECISION).expect("gamma_k is defined for k >= 5"))
            .collect()
    })
}

/// The tabulated γ_k for 5 ≤ k ≤ [`GAMMA_CACHE_MAX`].
pub fn cached_gamma(k: u32) -> Option<&'static Beta> {
    if (5..=GAMMA_CACHE_MAX).contains(&k) {
        Some(&gamma_cache()[(k - 5) as usize])
    } else {
        None
    }
}

fn interval_bound(k: u32) -> Ratio<i64> {
    if k == 5 {
        Ratio::new(9, 10)
    } else {
        Ratio::new(k as i64 + 2, k as i64 + 3)
    }
}

/// The index k with γ_{k+1} ≤ β ≤ γ_k whose bound applies, and that bound.
///
/// When β coincides with some γ_k the better of the two neighbouring bounds is
/// used. Returns `None` outside `(2, γ₅]`.
pub fn theorem2_interval(beta: &Beta) -> Option<(u32, Ratio<i64>)> {
    let x = beta.value();
    if (x - Dd::from_f64(2.0)).to_f64() <= beta.err() {
        return None;
    }
    let g5 = cached_gamma(5).expect("cached");
    if (x - g5.value()).to_f64() > beta.err() + g5.err() {
        return None;
    }
    let cache = gamma_cache();
    // γ_k decreases with k: find the largest tabulated k with β ≤ γ_k (within tolerance).
    let mut k = 5;
    for (i, g) in cache.iter().enumerate() {
        if (x - g.value()).to_f64() <= beta.err() + g.err() {
            k = 5 + i as u32;
        } else {
            break;
        }
    }
    if k == GAMMA_CACHE_MAX {
        // β ≤ γ_k  ⟺  F(k, β) ≤ 1  ⟺  k ≤ 2 - 2 ln(β-2) / ln β.
        let lb = x.ln();
        let lg = (x - Dd::from_f64(2.0)).ln();
        let kf = 2.0 - 2.0 * lg / lb;
        let k = (kf.floor() as u32).max(GAMMA_CACHE_MAX);
        return Some((k, interval_bound(k)));
    }
    let g = &cache[(k - 5) as usize];
    let tie = (x - g.value()).abs().to_f64() <= beta.err() + g.err();
    if tie && k >= 6 {
        let (a, b) = (interval_bound(k), interval_bound(k - 1));
        return Some(if a <= b { (k, a) } else { (k - 1, b) });
    }
    Some((k, interval_bound(k)))
}

/// `9/10` on `[γ₆, γ₅]`, `(k+2)/(k+3)` on `[γ_{k+1}, γ_k]` for k ≥ 6; `None` outside `(2, γ₅]`.
pub fn theorem2_upper_bound(beta: &Beta) -> Option<Ratio<i64>> {
    theorem2_interval(beta).map(|(_, b)| b)
}

/// An exact dyadic rational `num / 2^shift`.
#[derive(Clone, Debug, PartialEq)]
struct Dyadic {
    num: BigInt,
    shift: u32,
}

impl Dyadic {
    fn from_f64(x: f64) -> Dyadic {
        if x == 0.0 {
            return Dyadic {
                num: BigInt::zero(),
                shift: 0,
            };
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 {
            Sign::Minus
        } else {
            Sign::Plus
        };
        let exp = ((bits >> 52) & 0x7ff) as i32;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, e) = if exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), exp - 1075)
        };
        let m = BigInt::from_biguint(sign, mant.into());
        if e >= 0 {
            Dyadic {
                num: m << e as u32,
                shift: 0,
            }
        } else {
            Dyadic {
                num: m,
                shift: (-e) as u32,
            }
        }
    }

    fn from_dd(x: Dd) -> Dyadic {
        Dyadic::from_f64(x.hi).add(&Dyadic::from_f64(x.lo))
    }

    fn aligned(&self, o: &Dyadic) -> (BigInt, BigInt, u32) {
        let s = self.shift.max(o.shift);
        (&self.num << (s - self.shift), &o.num << (s - o.shift), s)
    }

    fn add(&self, o: &Dyadic) -> Dyadic {
        let (a, b, s) = self.aligned(o);
        Dyadic {
            num: a + b,
            shift: s,
        }
    }

    fn sub(&self, o: &Dyadic) -> Dyadic {
        let (a, b, s) = self.aligned(o);
        Dyadic {
            num: a - b,
            shift: s,
        }
    }

    fn mul(&self, o: &Dyadic) -> Dyadic {
        Dyadic {
            num: &self.num * &o.num,
            shift: self.shift + o.shift,
        }
    }

    fn int(n: i64) -> Dyadic {
        Dyadic {
            num: BigInt::from(n),
            shift: 0,
        }
    }

    fn floor(&self) -> BigInt {
        // Arithmetic shift rounds toward -∞.
        &self.num >> self.shift
    }

    fn is_negative(&self) -> bool {
        self.num.is_negative()
    }

    fn ge_int(&self, n: i64) -> bool {
        self.num >= (BigInt::from(n) << self.shift)
    }
}

/// Exact greedy digit extraction in base `β` (a dyadic rational).
#[derive(Clone, Debug)]
struct ExactGreedy {
    beta: Dyadic,
}

impl ExactGreedy {
    fn step(&self, r: &Dyadic) -> (u32, Dyadic) {
        let t = r.mul(&self.beta);
        let d = t.floor();
        let r = t.sub(&Dyadic {
            num: d.clone(),
            shift: 0,
        });
        let d: u32 = d.try_into().expect("greedy digit fits in u32");
        (d, r)
    }

    fn pow(&self, n: u32) -> Dyadic {
        let mut acc = Dyadic::int(1);
        for _ in 0..n {
            acc = acc.mul(&self.beta);
        }
        acc
    }
}

/// A maximal piece of the witness used for averaging.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub start: usize,
    pub len: usize,
    pub sum: u64,
    /// A replaced run of ones (`040…0` or `040…01`).
    pub block: bool,
}

/// Splits a witness into replaced blocks and greedy pieces. A greedy piece
/// runs until its excess `Σ (d - 1)` turns negative or a block begins; an
/// unfinished piece at the end is dropped.
pub fn parse_segments(digits: &[u32], block_starts: &[usize], k: u32) -> Vec<Segment> {
    let block_len = k as usize + 1;
    let mut segments = Vec::new();
    let mut blocks = block_starts.iter().copied().peekable();
    let mut i = 0;
    while i < digits.len() {
        while blocks.peek().is_some_and(|&b| b < i) {
            blocks.next();
        }
        let next_block = blocks.peek().copied();
        if next_block == Some(i) {
            if i + block_len > digits.len() {
                break;
            }
            let sum = digits[i..i + block_len].iter().map(|&d| d as u64).sum();
            segments.push(Segment {
                start: i,
                len: block_len,
                sum,
                block: true,
            });
            i += block_len;
            continue;
        }
        let stop = next_block.unwrap_or(digits.len());
        let mut excess = 0i64;
        let mut j = i;
        let mut closed = false;
        while j < stop {
            excess += digits[j] as i64 - 1;
            j += 1;
            if excess < 0 {
                closed = true;
                break;
            }
        }
        if !closed && j == digits.len() {
            break;
        }
        let sum = digits[i..j].iter().map(|&d| d as u64).sum();
        segments.push(Segment {
            start: i,
            len: j - i,
            sum,
            block: false,
        });
        i = j;
    }
    segments
}

/// A representation of `u ∈ [0,1)` built from its greedy expansion by
/// replacing every run of `k+1` ones.
#[derive(Clone, Debug, PartialEq)]
pub struct ExplicitWitness {
    pub k: u32,
    pub bound: Ratio<i64>,
    /// Digits at positions 1, 2, …
    pub rep: BetaRepresentation,
    pub block_starts: Vec<usize>,
    pub segments: Vec<Segment>,
    /// Digit average over the first `blocks` completed segments.
    pub average: Ratio<i64>,
    /// Independent exact check that `0 ≤ β^n (u - value) < 10`.
    pub value_check: bool,
}

/// Builds the witness until `blocks` segments are complete.
///
/// Arithmetic is exact on the double-double value of β, so the witness is a
/// representation in exactly that base.
pub fn theorem2_witness(beta: &Beta, u: f64, blocks: usize) -> Result<ExplicitWitness> {
    let (k, bound) = theorem2_interval(beta)
        .ok_or_else(|| Error::Domain(format!("base {} is outside (2, gamma_5]", beta.approx())))?;
    if !(0.0..1.0).contains(&u) {
        return Err(Error::Domain(format!("u must lie in [0, 1), got {u}")));
    }
    if blocks == 0 {
        return Err(Error::Domain("need at least one segment".into()));
    }
    let g = ExactGreedy {
        beta: Dyadic::from_dd(beta.value()),
    };
    let look = k as usize + 1;
    let beta_k1 = g.pow(k + 1);
    let four_beta_km1 = g.pow(k - 1).mul(&Dyadic::int(4));
    let u_exact = Dyadic::from_f64(u);

    let mut r = u_exact.clone();
    let mut queue: std::collections::VecDeque<u32> = Default::default();
    let mut r_back = r.clone();
    let mut digits: Vec<u32> = Vec::new();
    let mut block_starts = Vec::new();
    let mut segments;
    let mut target_len = blocks * (look + 6);
    loop {
        while digits.len() < target_len {
            while queue.len() < look {
                let (d, nr) = g.step(&r_back);
                queue.push_back(d);
                r_back = nr;
            }
            if queue.iter().all(|&d| d == 1) {
                let r1 = r.mul(&beta_k1).sub(&four_beta_km1);
                if !r1.is_negative() {
                    block_starts.push(digits.len());
                    digits.push(0);
                    digits.push(4);
                    if r1.ge_int(1) {
                        digits.extend(std::iter::repeat_n(0, k as usize - 2));
                        digits.push(1);
                        r = r1.sub(&Dyadic::int(1));
                    } else {
                        digits.extend(std::iter::repeat_n(0, k as usize - 1));
                        r = r1;
                    }
                    queue.clear();
                    r_back = r.clone();
                    continue;
                }
            }
            let d = queue.pop_front().expect("queue was filled");
            let (d2, nr) = g.step(&r);
            debug_assert_eq!(d, d2);
            digits.push(d);
            r = nr;
        }
        segments = parse_segments(&digits, &block_starts, k);
        if segments.len() >= blocks {
            break;
        }
        target_len *= 2;
    }
    segments.truncate(blocks);
    let (sum, len) = segments
        .iter()
        .fold((0u64, 0usize), |(s, l), seg| (s + seg.sum, l + seg.len));
    let average = Ratio::new(sum as i64, len as i64);
    let value_check = check_value(&g.beta, &u_exact, &digits);
    Ok(ExplicitWitness {
        k,
        bound,
        rep: BetaRepresentation::new(beta.clone(), DigitWord::new(1, digits)),
        block_starts,
        segments,
        average,
        value_check,
    })
}

/// `0 ≤ c·a^n - 2^s Σ w_j a^(n-j) 2^(p j) < 10 · 2^(p n + s)` for `β = a/2^p`, `u = c/2^s`,
/// i.e. `0 ≤ β^n (u - Σ w_j β^(-j)) < 10`.
fn check_value(beta: &Dyadic, u: &Dyadic, digits: &[u32]) -> bool {
    let (a, p) = (&beta.num, beta.shift);
    let (c, s) = (&u.num, u.shift);
    let n = digits.len();
    let mut horner = BigInt::zero();
    let mut a_pow = BigInt::one();
    for (j, &w) in digits.iter().enumerate() {
        horner = horner * a + (BigInt::from(w) << (p as usize * (j + 1)));
        a_pow *= a;
    }
    let x = c * a_pow - (horner << s as usize);
    let limit = BigInt::from(10) << (p as usize * n + s as usize);
    !x.is_negative() && x < limit
}

/// `Ψ(ν₁) = ν₁ ln ν₁ + (1 - ν₁) ln(β (1 - ν₁))` for `0 < ν₁ < 1`.
pub fn psi(beta: &Beta, nu1: f64) -> Result<f64> {
    if !(nu1 > 0.0 && nu1 < 1.0) {
        return Err(Error::Domain(format!("nu1 must lie in (0, 1), got {nu1}")));
    }
    Ok(nu1 * nu1.ln() + (1.0 - nu1) * (beta.approx() * (1.0 - nu1)).ln())
}

/// `ln f(d)` with `f(d) = (d+1)^(d+1) / d^d`, and `f(0) = 1`.
pub fn log_f(d: f64) -> f64 {
    if d <= 0.0 {
        return 0.0;
    }
    (d + 1.0) * d.ln_1p() - d * d.ln()
}

/// `f(d) = (d+1)^(d+1) / d^d`.
pub fn f_dbar(d: f64) -> f64 {
    log_f(d).exp()
}

fn check_base(beta: &Beta) -> Result<f64> {
    let b = beta.approx();
    if !(b > 1.0) {
        return Err(Error::Domain(format!("base must exceed 1, got {b}")));
    }
    Ok(b)
}

/// The d with `f(d) = β`, the conditional lower bound on the minimum average digit.
pub fn theorem3_lower_bound(beta: &Beta, tol: f64) -> Result<f64> {
    let b = check_base(beta)?;
    let lb = b.ln();
    // ln f(d) ≥ ln(d + 1), so d = β already overshoots.
    let mut d = solve_increasing_root(|d| log_f(d) - lb, 0.0, b, tol)?;
    // Newton polish; (ln f)' = ln(1 + 1/d).
    if d > 0.0 {
        for _ in 0..3 {
            let step = (log_f(d) - lb) / (1.0 / d).ln_1p();
            if !step.is_finite() || step.abs() > tol {
                break;
            }
            d -= step;
        }
    }
    Ok(d)
}

/// The same bound via the root of Ψ on `(0, ν̄₁)`, mapped through `d = ν₁ / (1 - ν₁)`.
pub fn theorem3_via_psi(beta: &Beta, tol: f64) -> Result<f64> {
    let b = check_base(beta)?;
    let nu_bar = b / (b + 1.0);
    // Ψ decreases on (0, ν̄₁) from ln β > 0 to -ln(1 + 1/β) < 0.
    let nu = solve_increasing_root(
        |v| {
            if v <= 0.0 {
                -b.ln()
            } else {
                -(v * v.ln() + (1.0 - v) * (b * (1.0 - v)).ln())
            }
        },
        0.0,
        nu_bar,
        tol,
    )?;
    Ok(nu / (1.0 - nu))
}

/// All per-β quantities plotted together.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundEvaluation {
    pub beta: f64,
    pub label: String,
    pub dbar_beta_e: GreedyAverage,
    #[serde(serialize_with = "ser_opt_ratio")]
    pub thm2_upper: Option<Ratio<i64>>,
    pub thm3_lower: f64,
    #[serde(serialize_with = "ser_opt_ratio")]
    pub coverage_upper: Option<Ratio<i64>>,
}

impl BoundEvaluation {
    /// The lower bound must not exceed any upper bound; a violation would
    /// contradict the conjecture the lower bound rests on.
    pub fn sandwich_consistent(&self) -> bool {
        let ok =
            |r: &Option<Ratio<i64>>| r.is_none_or(|r| self.thm3_lower <= ratio_f64(&r) + 1e-12);
        ok(&self.coverage_upper) && ok(&self.thm2_upper)
    }
}

pub(crate) fn ser_opt_ratio<S: serde::Serializer>(
    r: &Option<Ratio<i64>>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => ser_ratio(r, s),
        None => s.serialize_none(),
    }
}

pub fn ratio_f64(r: &Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Greedy average, the explicit upper bound and the conditional lower bound for one base; coverage is left empty.
pub fn evaluate_bounds(beta: &Beta, depth: usize, tol: f64) -> Result<BoundEvaluation> {
    Ok(BoundEvaluation {
        beta: beta.approx(),
        label: beta.label(),
        dbar_beta_e: greedy_average(beta, depth)?,
        thm2_upper: theorem2_upper_bound(beta),
        thm3_lower: theorem3_lower_bound(beta, tol)?,
        coverage_upper: None,
    })
}
