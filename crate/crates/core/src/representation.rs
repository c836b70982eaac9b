//! Beta representations with arbitrary non-negative digits, the switching
//! signal they encode, and the 1-D affine switched system `u ↦ u - 1`,
//! `u ↦ β u`.

use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::beta::Beta;
use crate::error::{Error, Result};
use crate::numeric::{Certified, Dd};
use crate::word::DigitWord;

/// A digit word read in a particular base.
#[derive(Clone, Debug, PartialEq)]
pub struct BetaRepresentation {
    pub beta: Beta,
    pub word: DigitWord,
}

impl BetaRepresentation {
    pub fn new(beta: Beta, word: DigitWord) -> BetaRepresentation {
        BetaRepresentation { beta, word }
    }

    /// `Σ d_j β^(-j)` with a certified error bound.
    pub fn evaluate(&self) -> Certified {
        evaluate_word(&self.beta, &self.word)
    }

    /// The same digits relabelled to start at position 0, together with the
    /// exponent `e` such that `value(self) = β^e · value(shifted)`.
    pub fn shifted_to_origin(&self) -> (BetaRepresentation, i32) {
        let rep = BetaRepresentation {
            beta: self.beta.clone(),
            word: self.word.shifted_to_origin(),
        };
        (rep, -self.word.j_min)
    }
}

impl fmt::Display for BetaRepresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.word.to_point_notation())
    }
}

/// Certified `β^n` for any integer `n`.
pub fn certified_pow(beta: &Beta, n: i32) -> Certified {
    let b = Certified::new(beta.value(), beta.err());
    let mut acc = Certified::exact(Dd::ONE);
    for _ in 0..n.unsigned_abs() {
        acc = acc.mul(&b);
    }
    if n < 0 {
        Certified::exact(Dd::ONE).div(&acc)
    } else {
        acc
    }
}

/// Horner evaluation of `Σ d_j β^(-j)` over the stored digits.
pub fn evaluate_word(beta: &Beta, word: &DigitWord) -> Certified {
    let b = Certified::new(beta.value(), beta.err());
    let mut acc = Certified::exact(Dd::ZERO);
    for &d in word.digits.iter().rev() {
        acc = acc.div(&b).add(&Certified::exact(Dd::from_i64(d as i64)));
    }
    // acc = Σ digits[i] β^(-i); scale by β^(-j_min).
    if word.j_min == 0 {
        acc
    } else {
        acc.mul(&certified_pow(beta, -word.j_min))
    }
}

/// A finite switching signal over the symbols 1 (`u - 1`) and 2 (`β u`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SwitchSignal {
    symbols: Vec<u8>,
}

impl SwitchSignal {
    pub fn new(symbols: Vec<u8>) -> Result<SwitchSignal> {
        if let Some(bad) = symbols.iter().find(|&&s| s != 1 && s != 2) {
            return Err(Error::Domain(format!(
                "switching symbol must be 1 or 2, got {bad}"
            )));
        }
        Ok(SwitchSignal { symbols })
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Number of `1` symbols (T₁).
    pub fn count_ones(&self) -> usize {
        self.symbols.iter().filter(|&&s| s == 1).count()
    }

    /// Number of `2` symbols (T₂), i.e. complete blocks.
    pub fn count_twos(&self) -> usize {
        self.symbols.iter().filter(|&&s| s == 2).count()
    }
}

impl fmt::Display for SwitchSignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.symbols.iter().map(|s| s.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// d₀ ones then a 2, d₁ ones then a 2, and so on.
pub fn digits_to_switching(word: &DigitWord) -> Result<SwitchSignal> {
    if word.j_min != 0 {
        return Err(Error::Domain(format!(
            "switching signals start at position 0; shift the word first (j_min = {})",
            word.j_min
        )));
    }
    let total = word.digit_sum() as usize + word.len();
    let mut symbols = Vec::with_capacity(total);
    for &d in &word.digits {
        symbols.extend(std::iter::repeat_n(1u8, d as usize));
        symbols.push(2);
    }
    Ok(SwitchSignal { symbols })
}

/// Inverse of [`digits_to_switching`]; the signal must end with a 2.
pub fn switching_to_digits(sig: &SwitchSignal) -> Result<DigitWord> {
    let mut digits = Vec::with_capacity(sig.count_twos());
    let mut run = 0u32;
    for &s in sig.symbols() {
        if s == 1 {
            run += 1;
        } else {
            digits.push(run);
            run = 0;
        }
    }
    if run > 0 {
        return Err(Error::IncompleteBlock(run as usize));
    }
    Ok(DigitWord::from_origin(digits))
}

/// States of the affine system under a switching signal.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineTrajectory {
    /// `states[0] = u0`, `states[i+1]` after applying `symbols[i]`.
    pub states: Vec<Certified>,
    pub symbols: Vec<u8>,
    /// First state index at which the state is certainly negative.
    pub first_negative: Option<usize>,
}

impl AffineTrajectory {
    /// Rows `(step, symbol, state, error_bound)`; step 0 has no symbol.
    pub fn rows(&self) -> impl Iterator<Item = (usize, Option<u8>, f64, f64)> + '_ {
        self.states.iter().enumerate().map(|(i, s)| {
            let sym = if i == 0 {
                None
            } else {
                Some(self.symbols[i - 1])
            };
            (i, sym, s.to_f64(), s.err)
        })
    }
}

/// Applies `u - 1` for symbol 1 and `β u` for symbol 2.
pub fn simulate_affine(beta: &Beta, u0: Certified, sig: &SwitchSignal) -> AffineTrajectory {
    let b = Certified::new(beta.value(), beta.err());
    let one = Certified::exact(Dd::ONE);
    let mut states = Vec::with_capacity(sig.len() + 1);
    states.push(u0);
    let mut first_negative = None;
    let mut u = u0;
    for (i, &s) in sig.symbols().iter().enumerate() {
        u = if s == 1 { u.sub(&one) } else { u.mul(&b) };
        if first_negative.is_none() && u.value.to_f64() + u.err < 0.0 {
            first_negative = Some(i + 1);
        }
        states.push(u);
    }
    AffineTrajectory {
        states,
        symbols: sig.symbols().to_vec(),
        first_negative,
    }
}

/// Exact mean of d₀ … d_{k-1}.
pub fn average_digit_prefix(word: &DigitWord, k: usize) -> Result<Ratio<u64>> {
    if k == 0 {
        return Err(Error::Domain("prefix length must be positive".into()));
    }
    if word.j_min > 0 || word.j_max() < k as i32 - 1 {
        return Err(Error::Domain(format!(
            "word does not cover positions 0..{k}"
        )));
    }
    let sum: u64 = (0..k as i32).map(|j| word.digit_at(j) as u64).sum();
    Ok(Ratio::new(sum, k as u64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beta::Named;
    use proptest::prelude::*;

    fn phi() -> Beta {
        Beta::named(Named::Phi)
    }

    #[test]
    fn golden_ratio_representations_of_five() {
        for s in ["13.01", "21.02", "101.12", "110.02", "1000.02", "1000.1001"] {
            let rep = BetaRepresentation::new(phi(), DigitWord::from_point_notation(s).unwrap());
            let v = rep.evaluate();
            assert!(
                v.contains(Dd::from_f64(5.0)),
                "{s}: {} ± {}",
                v.to_f64(),
                v.err
            );
            assert!(v.err < 1e-25);
        }
    }

    #[test]
    fn binary_ones() {
        let two = Beta::from_f64(2.0).unwrap();
        for n in 1..40 {
            let w = DigitWord::new(1, vec![1; n]);
            let v = evaluate_word(&two, &w);
            let want = 1.0 - 2f64.powi(-(n as i32));
            assert!((v.to_f64() - want).abs() <= v.err + 1e-300, "n={n}");
        }
    }

    #[test]
    fn switching_examples() {
        let s = digits_to_switching(&DigitWord::from_origin(vec![2, 1])).unwrap();
        assert_eq!(s.symbols(), &[1, 1, 2, 1, 2]);
        let s = digits_to_switching(&DigitWord::from_origin(vec![0, 0])).unwrap();
        assert_eq!(s.symbols(), &[2, 2]);
        let w = switching_to_digits(&SwitchSignal::new(vec![1, 1, 2, 1, 2]).unwrap()).unwrap();
        assert_eq!(w.digits, vec![2, 1]);
        let w = switching_to_digits(&SwitchSignal::new(vec![2]).unwrap()).unwrap();
        assert_eq!(w.digits, vec![0]);
        assert_eq!(
            switching_to_digits(&SwitchSignal::new(vec![2, 1, 1]).unwrap()),
            Err(Error::IncompleteBlock(2))
        );
        assert!(SwitchSignal::new(vec![3]).is_err());
        assert!(digits_to_switching(&DigitWord::new(-1, vec![1])).is_err());
    }

    #[test]
    fn affine_examples() {
        let two = Beta::from_f64(2.0).unwrap();
        let t = simulate_affine(
            &two,
            Certified::exact(Dd::ONE),
            &SwitchSignal::new(vec![1, 2]).unwrap(),
        );
        let xs: Vec<f64> = t.states.iter().map(|s| s.to_f64()).collect();
        assert_eq!(xs, vec![1.0, 0.0, 0.0]);
        assert_eq!(t.first_negative, None);

        let t = simulate_affine(
            &two,
            Certified::exact(Dd::from_f64(0.5)),
            &SwitchSignal::new(vec![1]).unwrap(),
        );
        assert_eq!(t.first_negative, Some(1));
    }

    #[test]
    fn golden_ratio_trajectory_stays_bounded() {
        let b = phi();
        let rep = BetaRepresentation::new(
            b.clone(),
            DigitWord::from_point_notation("1000.1001").unwrap(),
        );
        let (shifted, _) = rep.shifted_to_origin();
        let sig = digits_to_switching(&shifted.word).unwrap();
        let u0 = shifted.evaluate();
        let t = simulate_affine(&b, u0, &sig);
        assert_eq!(t.first_negative, None);
        let cap = u0.to_f64().max(1.0) * b.approx() + 1.0;
        for s in &t.states {
            assert!(s.to_f64() >= -s.err && s.to_f64() <= cap);
        }
        assert!(t.states.last().unwrap().to_f64().abs() < 1e-25);
    }

    #[test]
    fn prefix_averages() {
        let w = DigitWord::from_origin(vec![2, 1, 1]);
        assert_eq!(average_digit_prefix(&w, 3).unwrap(), Ratio::new(4, 3));
        assert_eq!(
            average_digit_prefix(&DigitWord::from_origin(vec![0; 7]), 7).unwrap(),
            Ratio::new(0, 1)
        );
        assert!(average_digit_prefix(&w, 4).is_err());
    }

    proptest! {
        #[test]
        fn switching_round_trip(digits in prop::collection::vec(0u32..6, 1..30)) {
            let w = DigitWord::from_origin(digits);
            let sig = digits_to_switching(&w).unwrap();
            prop_assert_eq!(sig.len() as u64, w.digit_sum() + w.len() as u64);
            prop_assert_eq!(switching_to_digits(&sig).unwrap(), w);
        }

        #[test]
        fn signal_round_trip(mut syms in prop::collection::vec(1u8..=2, 0..40)) {
            syms.push(2);
            let sig = SwitchSignal::new(syms).unwrap();
            let w = switching_to_digits(&sig).unwrap();
            prop_assert_eq!(digits_to_switching(&w).unwrap(), sig);
        }

        #[test]
        fn length_accounting(digits in prop::collection::vec(0u32..9, 1..50)) {
            // T = T₂ (1 + d̄_k) with k = T₂, as an integer identity.
            let w = DigitWord::from_origin(digits);
            let sig = digits_to_switching(&w).unwrap();
            let k = w.len();
            let avg = average_digit_prefix(&w, k).unwrap();
            let t = (Ratio::from_integer(1u64) + avg) * Ratio::from_integer(sig.count_twos() as u64);
            prop_assert!(t.is_integer());
            prop_assert_eq!(t.to_integer(), sig.len() as u64);
        }
    }
}
