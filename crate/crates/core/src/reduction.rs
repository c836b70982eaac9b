//! Reduction of an arbitrary representation toward the beta expansion by
//! repeatedly replacing the leftmost disallowed word with its own greedy
//! expansion.
//!
//! Positions beyond a truncation depth are not stored; whatever mass a step
//! would place there is accumulated in a certified residual instead.

use std::fmt;

use crate::beta::Beta;
use crate::error::{Error, Result};
use crate::expansion::{greedy_expand_partial, Leading, UnityExpansion};
use crate::numeric::{Certified, Dd};
use crate::representation::{certified_pow, evaluate_word, BetaRepresentation};
use crate::word::{join_digits, DigitWord};

/// Default last stored fractional position.
pub const DEFAULT_TRUNCATION: i32 = 48;

/// Fractional digits computed for each replacement beyond the truncation depth,
/// so that replacements anchored at negative positions still reach it.
const REPLACEMENT_MARGIN: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct TableEntry {
    /// The disallowed word; its last digit is the one that is "too high".
    pub word: Vec<u32>,
    /// Greedy expansion of the word's value, with the word's last digit at position 0.
    pub replacement: DigitWord,
    /// Whether the replacement terminates within the computed digits.
    pub finite: bool,
    /// Remaining value after the last replacement digit, in units of that digit's weight.
    pub tail: Certified,
    /// Replacement digit sum minus word digit sum (over the stored digits).
    pub digit_sum_delta: i64,
}

impl TableEntry {
    pub fn word_sum(&self) -> u64 {
        self.word.iter().map(|&d| d as u64).sum()
    }
}

impl fmt::Display for TableEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let commas = self.word.iter().any(|&d| d > 9);
        let mut rhs = self.replacement.to_point_notation();
        if rhs.ends_with('.') {
            rhs.pop();
        }
        if !self.finite {
            rhs.push('…');
        }
        write!(f, "{}={}", join_digits(&self.word, commas), rhs)
    }
}

/// Disallowed words of a base in the fixed list order, each with its expansion.
#[derive(Clone, Debug, PartialEq)]
pub struct DisallowedWordTable {
    pub beta: Beta,
    pub entries: Vec<TableEntry>,
    /// True when d_β(1) is finite and the list is complete.
    pub complete: bool,
    pub truncation: i32,
}

/// The disallowed words for `unity`: `(d₁+1), d₁(d₂+1), …`, ending with
/// `d₁…d_m` itself when d_β(1) is finite, or after `horizon` words otherwise.
pub fn disallowed_words(unity: &UnityExpansion, horizon: usize) -> Result<Vec<Vec<u32>>> {
    let d = &unity.digits;
    if unity.is_finite() {
        let m = d.len();
        let mut words: Vec<Vec<u32>> = (0..m - 1)
            .map(|i| {
                let mut w = d[..i].to_vec();
                w.push(d[i] + 1);
                w
            })
            .collect();
        words.push(d.clone());
        Ok(words)
    } else {
        if d.len() < horizon {
            return Err(Error::HorizonTooShort {
                needed: horizon,
                available: d.len(),
            });
        }
        Ok((0..horizon)
            .map(|i| {
                let mut w = d[..i].to_vec();
                w.push(d[i] + 1);
                w
            })
            .collect())
    }
}

/// Builds the table with each word's greedy expansion.
pub fn build_disallowed_table(
    unity: &UnityExpansion,
    horizon: usize,
    truncation: i32,
) -> Result<DisallowedWordTable> {
    let beta = &unity.beta;
    let b = Certified::new(beta.value(), beta.err());
    let depth = (truncation.max(0) as usize) + REPLACEMENT_MARGIN;
    let mut entries = Vec::new();
    for word in disallowed_words(unity, horizon)? {
        // Value with the last digit as the units digit.
        let mut w = Certified::exact(Dd::ZERO);
        for &digit in &word {
            w = w.mul(&b).add(&Certified::exact(Dd::from_i64(digit as i64)));
        }
        let exp = greedy_expand_partial(beta, &w, depth, Leading::Expanded)?;
        let replacement = exp.word.trimmed();
        let finite = exp.termination.is_finite();
        let entry_sum: i64 = replacement.digit_sum() as i64;
        let word_sum: i64 = word.iter().map(|&d| d as i64).sum();
        // The residual refers to the last computed position, which trimming may have moved.
        let tail = if finite {
            Certified::exact(Dd::ZERO)
        } else {
            exp.residual
                .mul(&certified_pow(beta, replacement.j_max() - exp.word.j_max()))
        };
        entries.push(TableEntry {
            word,
            replacement,
            finite,
            tail,
            digit_sum_delta: entry_sum - word_sum,
        });
    }
    Ok(DisallowedWordTable {
        beta: beta.clone(),
        entries,
        complete: unity.is_finite(),
        truncation,
    })
}

/// A disallowed word found in a representation: `position` is where its last digit sits.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub position: i32,
    pub entry: usize,
}

fn matches_at(word: &DigitWord, entry: &TableEntry, j: i32) -> bool {
    let m = entry.word.len() as i32;
    let start = j - (m - 1);
    let (last, prefix) = entry.word.split_last().expect("table words are non-empty");
    word.digit_at(j) >= *last
        && prefix
            .iter()
            .enumerate()
            .all(|(i, &d)| word.digit_at(start + i as i32) == d)
}

fn scan(
    word: &DigitWord,
    table: &DisallowedWordTable,
    floor: Option<i32>,
    skipped: &mut Vec<i32>,
) -> Option<Violation> {
    for j in word.j_min..=word.j_max() {
        if word.digit_at(j) == 0 {
            continue;
        }
        for (idx, entry) in table.entries.iter().enumerate() {
            if !matches_at(word, entry, j) {
                continue;
            }
            if let Some(f) = floor {
                if j + entry.replacement.j_min < f {
                    if skipped.last() != Some(&j) {
                        skipped.push(j);
                    }
                    continue;
                }
            }
            return Some(Violation {
                position: j,
                entry: idx,
            });
        }
    }
    None
}

/// Leftmost position holding a disallowed word, first table entry winning ties.
pub fn find_violation(word: &DigitWord, table: &DisallowedWordTable) -> Option<Violation> {
    scan(word, table, None, &mut Vec::new())
}

/// Mutable digit tape with truncation.
struct Tape {
    j_min: i32,
    digits: Vec<u32>,
}

impl Tape {
    fn from_word(w: &DigitWord) -> Tape {
        Tape {
            j_min: w.j_min,
            digits: w.digits.clone(),
        }
    }

    fn slot(&mut self, j: i32) -> &mut u32 {
        if j < self.j_min {
            let grow = (self.j_min - j) as usize;
            self.digits.splice(0..0, std::iter::repeat_n(0, grow));
            self.j_min = j;
        }
        let i = (j - self.j_min) as usize;
        if i >= self.digits.len() {
            self.digits.resize(i + 1, 0);
        }
        &mut self.digits[i]
    }

    fn word(&self) -> DigitWord {
        DigitWord::new(self.j_min, self.digits.clone())
    }
}

/// Applies one replacement in place, returning the value pushed past the truncation depth.
fn apply(tape: &mut Tape, table: &DisallowedWordTable, v: Violation) -> Certified {
    let entry = &table.entries[v.entry];
    let m = entry.word.len() as i32;
    for (i, &d) in entry.word.iter().enumerate() {
        let slot = tape.slot(v.position - (m - 1) + i as i32);
        debug_assert!(*slot >= d);
        *slot -= d;
    }
    let mut dropped = Certified::exact(Dd::ZERO);
    for (i, &d) in entry.replacement.digits.iter().enumerate() {
        if d == 0 {
            continue;
        }
        let j = v.position + entry.replacement.j_min + i as i32;
        if j > table.truncation {
            let mass =
                certified_pow(&table.beta, -j).mul(&Certified::exact(Dd::from_i64(d as i64)));
            dropped = dropped.add(&mass);
        } else {
            *tape.slot(j) += d;
        }
    }
    if !entry.finite {
        let last = v.position + entry.replacement.j_max();
        dropped = dropped.add(&entry.tail.mul(&certified_pow(&table.beta, -last)));
    }
    dropped
}

/// One step of the reduction.
#[derive(Clone, Debug, PartialEq)]
pub struct ReductionStep {
    pub rep: BetaRepresentation,
    pub violation: Violation,
    /// Value moved beyond the truncation depth by this step.
    pub dropped: Certified,
}

/// Replaces the leftmost disallowed word, or returns `None` when there is none.
pub fn reduce_step(rep: &BetaRepresentation, table: &DisallowedWordTable) -> Option<ReductionStep> {
    let violation = find_violation(&rep.word, table)?;
    let mut tape = Tape::from_word(&rep.word);
    let dropped = apply(&mut tape, table, violation);
    Some(ReductionStep {
        rep: BetaRepresentation::new(rep.beta.clone(), tape.word().trimmed()),
        violation,
        dropped,
    })
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct ReduceOptions {
    /// Defaults to `10 · truncation · max digit` when absent.
    pub max_steps: Option<usize>,
    /// Lowest position a replacement may write to; violations needing more are skipped.
    pub floor: Option<i32>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ReductionOutcome {
    /// No disallowed word remains and nothing was truncated.
    Clean,
    /// No disallowed word remains within the truncation depth, but mass was pushed past it.
    TailTruncated,
    StepBudgetExhausted,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reduction {
    pub final_rep: BetaRepresentation,
    /// Every representation visited, starting with the input.
    pub trace: Vec<DigitWord>,
    pub digit_sums: Vec<u64>,
    /// Total value moved past the truncation depth.
    pub residual: Certified,
    pub outcome: ReductionOutcome,
    /// Positions of violations left in place because of the floor.
    pub unreduced: Vec<i32>,
    pub steps: usize,
}

impl Reduction {
    /// The trace in point notation, one representation per line.
    pub fn trace_lines(&self) -> Vec<String> {
        self.trace.iter().map(|w| w.to_point_notation()).collect()
    }

    /// Whether the digit sum never went up along the trace.
    pub fn digit_sum_non_increasing(&self) -> bool {
        self.digit_sums.windows(2).all(|w| w[1] <= w[0])
    }
}

/// Iterates [`reduce_step`] until no violation remains or the step budget runs out.
pub fn reduce_to_expansion(
    rep: &BetaRepresentation,
    table: &DisallowedWordTable,
    opts: ReduceOptions,
) -> Result<Reduction> {
    let max_steps = match opts.max_steps {
        Some(0) => return Err(Error::Domain("max_steps must be at least 1".into())),
        Some(n) => n,
        None => 10 * (table.truncation.max(1) as usize) * (rep.word.max_digit().max(1) as usize),
    };
    let mut residual = Certified::exact(Dd::ZERO);
    let mut start = rep.word.clone();
    if start.j_max() > table.truncation {
        let keep = (table.truncation - start.j_min + 1).max(0) as usize;
        let cut = DigitWord::new(
            start.j_min + keep as i32,
            start.digits.split_off(keep.min(start.digits.len())),
        );
        residual = evaluate_word(&table.beta, &cut);
    }
    let start = start.trimmed();
    let mut tape = Tape::from_word(&start);
    let mut trace = vec![start.clone()];
    let mut digit_sums = vec![start.digit_sum()];
    let mut steps = 0;
    let mut skipped = Vec::new();
    let outcome = loop {
        skipped.clear();
        let word = tape.word();
        let Some(v) = scan(&word, table, opts.floor, &mut skipped) else {
            break if residual.value.is_zero() && residual.err == 0.0 {
                ReductionOutcome::Clean
            } else {
                ReductionOutcome::TailTruncated
            };
        };
        if steps == max_steps {
            break ReductionOutcome::StepBudgetExhausted;
        }
        residual = residual.add(&apply(&mut tape, table, v));
        steps += 1;
        let w = tape.word().trimmed();
        digit_sums.push(w.digit_sum());
        trace.push(w);
    };
    let final_word = trace.last().expect("trace starts with the input").clone();
    Ok(Reduction {
        final_rep: BetaRepresentation::new(rep.beta.clone(), final_word),
        trace,
        digit_sums,
        residual,
        outcome,
        unreduced: skipped,
        steps,
    })
}

/// Numerical check of `0.d₁…d_{k-1}(d_k+1) = 1.0^k(d₁-d_{k+1})(d₂-d_{k+2})…`
/// using the given prefix of d_β(1).
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    /// The differences `d_i - d_{k+i}` shown after `1.0^k`.
    pub digits: Vec<i64>,
    pub holds: bool,
    pub nonnegative: bool,
}

pub fn replacement_identity_check(beta: &Beta, prefix: &[u32], k: usize) -> Result<IdentityCheck> {
    if k == 0 || prefix.len() < 2 * k {
        return Err(Error::HorizonTooShort {
            needed: 2 * k.max(1),
            available: prefix.len(),
        });
    }
    let n = prefix.len();
    let b = Certified::new(beta.value(), beta.err());
    let inv = Certified::exact(Dd::ONE).div(&b);
    let c = |x: i64| Certified::exact(Dd::from_i64(x));

    let mut lhs = Certified::exact(Dd::ZERO);
    let mut w = Certified::exact(Dd::ONE);
    for &d in &prefix[..k] {
        w = w.mul(&inv);
        lhs = lhs.add(&w.mul(&c(d as i64)));
    }
    lhs = lhs.add(&w);

    let digits: Vec<i64> = (0..n - k)
        .map(|i| prefix[i] as i64 - prefix[k + i] as i64)
        .collect();
    let mut rhs = Certified::exact(Dd::ONE);
    let mut w = certified_pow(beta, -(k as i32));
    for &d in &digits {
        w = w.mul(&inv);
        rhs = rhs.add(&w.mul(&c(d)));
    }
    // Both sides differ from their infinite versions by less than β^(-n) each.
    let tolerance = 2.0 * beta.approx().powi(-(n as i32)) * (1.0 + 1e-9) + lhs.err + rhs.err;
    let diff = (lhs.value - rhs.value).abs().to_f64();
    Ok(IdentityCheck {
        lhs: lhs.to_f64(),
        rhs: rhs.to_f64(),
        tolerance,
        holds: diff <= tolerance,
        nonnegative: digits.iter().all(|&d| d >= 0),
        digits,
    })
}

/// Outcome of searching for `⌊β⌋+1 = 10.b₁b₂…b_D` with `Σ b ≤ ⌊β⌋`.
#[derive(Clone, Debug, PartialEq)]
pub enum DigitSumSearch {
    /// A representation whose value matches to within the working tolerance.
    Found(DigitWord),
    /// No representation of that shape with fractional digits up to `depth`.
    NoneUpTo { depth: usize },
}

/// Exhaustive search for a representation of the digit `⌊β⌋+1` of the form
/// `10.b₁…b_D` whose digit sum does not exceed that of the digit itself.
/// Such a representation exists only for monotone bases; only meaningful for β > √2.
pub fn digit_plus_one_search(beta: &Beta, depth: usize) -> Result<DigitSumSearch> {
    let sq = beta.value() * beta.value();
    if sq.to_f64() - 2.0 <= 2.0 * beta.err() * beta.approx() + 1e-30 {
        return Err(Error::Domain(
            "the search applies only to bases above sqrt(2)".into(),
        ));
    }
    let n = beta.floor_digit();
    let target = Dd::from_i64(n as i64 + 1) - beta.value();
    let inv = Dd::ONE / beta.value();
    let mut weights = Vec::with_capacity(depth);
    let mut w = Dd::ONE;
    for _ in 0..depth {
        w = w * inv;
        weights.push(w);
    }
    let tol = Dd::from_f64(1e-20 + 4.0 * beta.err() * (n as f64 + 2.0));
    let mut b = vec![0u32; depth];
    if search(&weights, target, tol, n, 0, Dd::ZERO, &mut b) {
        let mut digits = vec![1, 0];
        digits.extend(b);
        return Ok(DigitSumSearch::Found(DigitWord::new(-1, digits).trimmed()));
    }
    Ok(DigitSumSearch::NoneUpTo { depth })
}

fn search(
    weights: &[Dd],
    target: Dd,
    tol: Dd,
    budget: u32,
    from: usize,
    acc: Dd,
    b: &mut [u32],
) -> bool {
    if (acc - target).abs() <= tol {
        return true;
    }
    if budget == 0 || acc > target + tol {
        return false;
    }
    for j in from..weights.len() {
        let next = acc + weights[j];
        if next > target + tol {
            // Larger positions weigh less, so keep looking further right.
            continue;
        }
        b[j] += 1;
        if search(weights, target, tol, budget - 1, j, next, b) {
            return true;
        }
        b[j] -= 1;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beta::{multinacci, Named};
    use crate::expansion::expansion_of_unity;
    use proptest::prelude::*;

    fn table_for(beta: &Beta, horizon: usize) -> DisallowedWordTable {
        let u = expansion_of_unity(beta, 40).unwrap();
        build_disallowed_table(&u, horizon, DEFAULT_TRUNCATION).unwrap()
    }

    fn rendered(t: &DisallowedWordTable) -> Vec<String> {
        t.entries.iter().map(|e| e.to_string()).collect()
    }

    #[test]
    fn golden_ratio_table() {
        let t = table_for(&Beta::named(Named::Phi), 10);
        assert_eq!(rendered(&t), vec!["2=10.01", "11=100"]);
        assert!(t.complete);
    }

    #[test]
    fn smallest_pisot_table() {
        let t = table_for(&Beta::named(Named::Rho), 10);
        assert_eq!(
            rendered(&t),
            vec![
                "2=100.00001",
                "11=1000",
                "101=1000.001",
                "1001=10000.00001",
                "10001=100000"
            ]
        );
        assert!(t.entries.iter().all(|e| e.digit_sum_delta <= 0));
    }

    #[test]
    fn integer_tables() {
        let t = table_for(&Beta::from_f64(3.0).unwrap(), 5);
        assert_eq!(rendered(&t), vec!["3=10"]);
        let t = table_for(&Beta::from_f64(2.0).unwrap(), 5);
        assert_eq!(rendered(&t), vec!["2=10"]);
    }

    #[test]
    fn golden_ratio_trace() {
        let phi = Beta::named(Named::Phi);
        let t = table_for(&phi, 10);
        let rep = BetaRepresentation::new(phi, DigitWord::from_point_notation("13.01").unwrap());
        let v = find_violation(&rep.word, &t).unwrap();
        assert_eq!((v.position, v.entry), (0, 0));
        let r = reduce_to_expansion(&rep, &t, ReduceOptions::default()).unwrap();
        assert_eq!(
            r.trace_lines(),
            vec!["13.01", "21.02", "101.12", "110.02", "1000.02", "1000.1001"]
        );
        assert_eq!(r.digit_sums, vec![5, 5, 5, 4, 3, 3]);
        assert_eq!(r.outcome, ReductionOutcome::Clean);
        assert!(find_violation(&r.final_rep.word, &t).is_none());
    }

    #[test]
    fn single_steps() {
        let phi = Beta::named(Named::Phi);
        let t = table_for(&phi, 10);
        let rep = BetaRepresentation::new(
            phi.clone(),
            DigitWord::from_point_notation("110.02").unwrap(),
        );
        let s = reduce_step(&rep, &t).unwrap();
        assert_eq!(s.rep.to_string(), "1000.02");

        let two = Beta::from_f64(2.0).unwrap();
        let t = table_for(&two, 5);
        let rep = BetaRepresentation::new(two, DigitWord::from_origin(vec![3]));
        assert_eq!(reduce_step(&rep, &t).unwrap().rep.to_string(), "11.");
    }

    #[test]
    fn integer_base_reduction() {
        let three = Beta::from_f64(3.0).unwrap();
        let t = table_for(&three, 5);
        let rep = BetaRepresentation::new(three, DigitWord::from_origin(vec![5]));
        let r = reduce_to_expansion(&rep, &t, ReduceOptions::default()).unwrap();
        assert_eq!(r.final_rep.to_string(), "12.");
        assert_eq!(r.outcome, ReductionOutcome::Clean);
    }

    #[test]
    fn chi_two_pushes_mass_right() {
        let chi = Beta::named(Named::Chi);
        let t = table_for(&chi, 20);
        let two = &t.entries[0];
        assert_eq!(two.word, vec![2]);
        assert!(!two.finite);
        let shown = two.replacement.to_point_notation();
        assert!(shown.starts_with("100.00000001000010000100001"), "{shown}");
        let rep = BetaRepresentation::new(chi, DigitWord::from_origin(vec![2]));
        let r = reduce_to_expansion(&rep, &t, ReduceOptions::default()).unwrap();
        assert_eq!(r.outcome, ReductionOutcome::TailTruncated);
        assert!(r.residual.to_f64() > 0.0);
    }

    #[test]
    fn floor_leaves_leading_violations() {
        let phi = Beta::named(Named::Phi);
        let t = table_for(&phi, 10);
        let rep = BetaRepresentation::new(phi, DigitWord::from_origin(vec![2, 0, 0]));
        let r = reduce_to_expansion(
            &rep,
            &t,
            ReduceOptions {
                floor: Some(0),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(r.unreduced, vec![0]);
        assert_eq!(r.steps, 0);
    }

    #[test]
    fn budget_is_an_outcome() {
        let phi = Beta::named(Named::Phi);
        let t = table_for(&phi, 10);
        let rep = BetaRepresentation::new(phi, DigitWord::from_point_notation("13.01").unwrap());
        let r = reduce_to_expansion(
            &rep,
            &t,
            ReduceOptions {
                max_steps: Some(2),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(r.outcome, ReductionOutcome::StepBudgetExhausted);
        assert_eq!(r.trace.len(), 3);
    }

    #[test]
    fn identity_examples() {
        let phi = Beta::named(Named::Phi);
        let mut d = vec![1, 1];
        d.resize(20, 0);
        let c = replacement_identity_check(&phi, &d, 1).unwrap();
        assert!(c.holds && c.nonnegative);
        assert!((c.lhs - 2.0 / phi.approx()).abs() < 1e-12);

        let mu3 = Beta::named(Named::Mu3);
        let mut d = vec![1, 1, 1];
        d.resize(20, 0);
        let c = replacement_identity_check(&mu3, &d, 2).unwrap();
        assert!(c.holds && c.nonnegative);

        let b = Beta::from_f64(2.5).unwrap();
        let u = expansion_of_unity(&b, 30).unwrap();
        let c = replacement_identity_check(&b, &u.digits, 1).unwrap();
        assert!(c.holds, "{c:?}");
        assert!(!c.nonnegative);
    }

    #[test]
    fn digit_plus_one_examples() {
        // Monotone bases admit the cheap representation, others do not.
        let phi = Beta::named(Named::Phi);
        match digit_plus_one_search(&phi, 12).unwrap() {
            DigitSumSearch::Found(w) => assert_eq!(w.to_point_notation(), "10.01"),
            other => panic!("{other:?}"),
        }
        for b in [
            Beta::named(Named::Gamma6),
            Beta::named(Named::E),
            Beta::from_f64(2.5).unwrap(),
        ] {
            assert_eq!(
                digit_plus_one_search(&b, 16).unwrap(),
                DigitSumSearch::NoneUpTo { depth: 16 },
                "{b}"
            );
        }
        assert!(digit_plus_one_search(&Beta::named(Named::Rho), 8).is_err());
    }

    fn lex_less(a: &DigitWord, b: &DigitWord) -> bool {
        let lo = a.j_min.min(b.j_min);
        let hi = a.j_max().max(b.j_max());
        for j in lo..=hi {
            match a.digit_at(j).cmp(&b.digit_at(j)) {
                std::cmp::Ordering::Less => return true,
                std::cmp::Ordering::Greater => return false,
                _ => {}
            }
        }
        false
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn tribonacci_reduction_never_raises_digit_sum(digits in prop::collection::vec(0u32..4, 1..10), j in -2i32..3) {
            let mu3 = multinacci(3, 100).unwrap();
            let t = table_for(&mu3, 30);
            let rep = BetaRepresentation::new(mu3.clone(), DigitWord::new(j, digits));
            let r = reduce_to_expansion(&rep, &t, ReduceOptions::default()).unwrap();
            prop_assert_eq!(r.outcome, ReductionOutcome::Clean);
            prop_assert!(r.digit_sum_non_increasing());
            let before = rep.evaluate();
            let after = r.final_rep.evaluate();
            prop_assert!((before.value - after.value).abs().to_f64() <= before.err + after.err);
            for w in r.trace.windows(2) {
                prop_assert!(lex_less(&w[0], &w[1]));
            }
        }

        #[test]
        fn steps_preserve_value(digits in prop::collection::vec(0u32..5, 1..8)) {
            let e = Beta::named(Named::E);
            let t = table_for(&e, 20);
            let rep = BetaRepresentation::new(e.clone(), DigitWord::new(0, digits));
            let r = reduce_to_expansion(&rep, &t, ReduceOptions { max_steps: Some(200), ..Default::default() }).unwrap();
            let before = rep.evaluate();
            let after = r.final_rep.evaluate().add(&r.residual);
            prop_assert!((before.value - after.value).abs().to_f64() <= before.err + after.err + 1e-12);
        }
    }
}
