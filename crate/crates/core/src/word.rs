//! Finite digit words `Σ d_j β^(-j)` starting at position `j_min`, and their
//! text forms.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DigitWord {
    /// Position of `digits[0]`; the digit at position `j` weighs `β^(-j)`.
    pub j_min: i32,
    pub digits: Vec<u32>,
}

impl DigitWord {
    pub fn new(j_min: i32, digits: Vec<u32>) -> DigitWord {
        DigitWord { j_min, digits }
    }

    /// A word starting at position 0 (d₀ first).
    pub fn from_origin(digits: Vec<u32>) -> DigitWord {
        DigitWord { j_min: 0, digits }
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// Position of the last stored digit (`j_min - 1` for an empty word).
    pub fn j_max(&self) -> i32 {
        self.j_min + self.digits.len() as i32 - 1
    }

    pub fn digit_at(&self, j: i32) -> u32 {
        let i = j - self.j_min;
        if i < 0 {
            0
        } else {
            self.digits.get(i as usize).copied().unwrap_or(0)
        }
    }

    pub fn digit_sum(&self) -> u64 {
        self.digits.iter().map(|&d| d as u64).sum()
    }

    pub fn max_digit(&self) -> u32 {
        self.digits.iter().copied().max().unwrap_or(0)
    }

    /// Drops zeros at both ends, keeping positions. An all-zero word becomes
    /// the single digit 0 at position 0.
    pub fn trimmed(&self) -> DigitWord {
        let first = self.digits.iter().position(|&d| d != 0);
        let last = self.digits.iter().rposition(|&d| d != 0);
        match (first, last) {
            (Some(a), Some(b)) => DigitWord {
                j_min: self.j_min + a as i32,
                digits: self.digits[a..=b].to_vec(),
            },
            _ => DigitWord {
                j_min: 0,
                digits: vec![0],
            },
        }
    }

    /// Same digits relabelled to start at position 0; the value scales by `β^(j_min)`.
    pub fn shifted_to_origin(&self) -> DigitWord {
        DigitWord {
            j_min: 0,
            digits: self.digits.clone(),
        }
    }

    fn needs_commas(&self) -> bool {
        self.digits.iter().any(|&d| d > 9)
    }

    /// Compact form: optional `j_min=<j>;` then the digits, comma separated
    /// when any digit exceeds 9.
    pub fn to_compact(&self) -> String {
        let body = join_digits(&self.digits, self.needs_commas());
        if self.j_min == 0 {
            body
        } else {
            format!("j_min={};{}", self.j_min, body)
        }
    }

    pub fn from_compact(s: &str) -> Result<DigitWord> {
        let s = s.trim();
        let (j_min, body) = match s.strip_prefix("j_min=") {
            Some(rest) => {
                let (j, body) = rest
                    .split_once(';')
                    .ok_or_else(|| Error::Parse(format!("missing ';' in {s:?}")))?;
                let j = j
                    .trim()
                    .parse::<i32>()
                    .map_err(|e| Error::Parse(e.to_string()))?;
                (j, body)
            }
            None => (0, s),
        };
        Ok(DigitWord {
            j_min,
            digits: split_digits(body)?,
        })
    }

    /// Positional notation with the point after position 0, e.g. `1000.1001`,
    /// `11.` or `0.25`. Leading and trailing zeros outside the stored range
    /// are filled in only as far as needed to reach position 0.
    pub fn to_point_notation(&self) -> String {
        let lo = self.j_min.min(0);
        let hi = self.j_max().max(0);
        let commas = self.needs_commas();
        let int: Vec<u32> = (lo..=0).map(|j| self.digit_at(j)).collect();
        let frac: Vec<u32> = (1..=hi).map(|j| self.digit_at(j)).collect();
        format!(
            "{}.{}",
            join_digits(&int, commas),
            join_digits(&frac, commas)
        )
    }

    /// Parses positional notation; the digit just before the point sits at
    /// position 0. Without a point the whole string is the integer part.
    pub fn from_point_notation(s: &str) -> Result<DigitWord> {
        let s = s.trim();
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        let int = split_digits(int)?;
        let frac = split_digits(frac)?;
        let j_min = if int.is_empty() {
            1
        } else {
            1 - int.len() as i32
        };
        let mut digits = int;
        digits.extend(frac);
        if digits.is_empty() {
            return Err(Error::Parse("empty representation".into()));
        }
        Ok(DigitWord { j_min, digits })
    }
}

impl fmt::Display for DigitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_compact())
    }
}

pub(crate) fn join_digits(digits: &[u32], commas: bool) -> String {
    let parts: Vec<String> = digits.iter().map(|d| d.to_string()).collect();
    parts.join(if commas { "," } else { "" })
}

fn split_digits(s: &str) -> Result<Vec<u32>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let bad = |t: &str| Error::Parse(format!("bad digit {t:?}"));
    if s.contains(',') {
        s.split(',')
            .map(|t| t.trim().parse::<u32>().map_err(|_| bad(t)))
            .collect()
    } else {
        s.chars()
            .map(|c| c.to_digit(10).ok_or_else(|| bad(&c.to_string())))
            .collect()
    }
}
