//! Extended-precision scalars and bracketed root solving.
//!
//! [`Dd`] is an unevaluated sum of two doubles (`hi + lo`, `|lo| <= ulp(hi)/2`)
//! giving roughly 106 significant bits. [`Certified`] pairs a value with an
//! absolute error bound that every operation grows conservatively.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Relative rounding bound used for one double-double operation.
///
/// The textbook bounds are around 2^-104 for the accurate add and mul;
/// 2^-101 leaves slack for the sloppier division.
pub const DD_EPS: f64 = 1.0 / (1u128 << 101) as f64;

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

#[derive(Copy, Clone, Default, Debug, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    pub const fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    /// Exact for |n| < 2^106.
    pub fn from_i128(n: i128) -> Dd {
        let hi = n as f64;
        let rest = n - hi as i128;
        let (hi, lo) = quick_two_sum(hi, rest as f64);
        Dd { hi, lo }
    }

    pub fn from_i64(n: i64) -> Dd {
        Dd::from_i128(n as i128)
    }

    pub fn from_ratio(num: i64, den: i64) -> Dd {
        Dd::from_i64(num) / Dd::from_i64(den)
    }

    /// Parses a plain decimal literal such as `-12.0625` or `3`.
    pub fn parse_decimal(s: &str) -> Result<Dd> {
        let s = s.trim();
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty()
            || !int_part
                .chars()
                .chain(frac_part.chars())
                .all(|c| c.is_ascii_digit())
        {
            return Err(Error::Parse(format!("not a decimal number: {s:?}")));
        }
        let mut v = Dd::ZERO;
        let ten = Dd::from_f64(10.0);
        for c in int_part.chars() {
            v = v * ten + Dd::from_f64(c.to_digit(10).unwrap() as f64);
        }
        if frac_part.len() > 30 {
            return Err(Error::Parse(format!("too many fractional digits in {s:?}")));
        }
        if !frac_part.is_empty() {
            let num: i128 = frac_part.parse().unwrap();
            let den = Dd::from_i128(10i128.pow(frac_part.len() as u32));
            v = (v * den + Dd::from_i128(num)) / den;
        }
        Ok(if neg { -v } else { v })
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    pub fn is_zero(self) -> bool {
        self.hi == 0.0 && self.lo == 0.0
    }

    pub fn floor(self) -> Dd {
        let hi = self.hi.floor();
        if hi == self.hi {
            let (h, l) = quick_two_sum(hi, self.lo.floor());
            Dd { hi: h, lo: l }
        } else {
            Dd { hi, lo: 0.0 }
        }
    }

    pub fn mul_f64(self, b: f64) -> Dd {
        let (p1, mut p2) = two_prod(self.hi, b);
        p2 += self.lo * b;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }

    pub fn powi(self, n: u32) -> Dd {
        let mut base = self;
        let mut acc = Dd::ONE;
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            n >>= 1;
        }
        acc
    }

    pub fn sqrt(self) -> Dd {
        if self.hi <= 0.0 {
            return Dd::ZERO;
        }
        let x = Dd::from_f64(self.hi.sqrt());
        // One Newton step doubles the 53 correct bits.
        (x + self / x).mul_f64(0.5)
    }

    pub fn ln(self) -> f64 {
        self.hi.ln() + self.lo / self.hi
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        let (p1, mut p2) = two_prod(self.hi, b.hi);
        p2 += self.hi * b.lo + self.lo * b.hi;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from_f64(q3)
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Dd) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            o => Some(o),
        }
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Dd {
        Dd::from_f64(x)
    }
}

impl fmt::Display for Dd {
    /// Prints up to 32 significant decimal digits.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.hi.is_finite() {
            return write!(f, "{}", self.hi);
        }
        let prec = f.precision().unwrap_or(30);
        let mut v = *self;
        if v.hi < 0.0 {
            write!(f, "-")?;
            v = -v;
        }
        let int = v.floor();
        let mut frac = v - int;
        write!(f, "{}", int.hi as i128 + int.lo as i128)?;
        if prec > 0 {
            write!(f, ".")?;
            for _ in 0..prec {
                frac = frac.mul_f64(10.0);
                let d = frac.floor();
                frac = frac - d;
                write!(f, "{}", d.to_f64() as u8)?;
            }
        }
        Ok(())
    }
}

/// A value together with a conservative absolute error bound.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Certified {
    pub value: Dd,
    pub err: f64,
}

impl Certified {
    pub fn exact(value: Dd) -> Certified {
        Certified { value, err: 0.0 }
    }

    pub fn new(value: Dd, err: f64) -> Certified {
        Certified { value, err }
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }

    fn mag(&self) -> f64 {
        self.value.hi.abs() + self.err
    }

    /// Both operands exact and single-limb, so two_sum/two_prod are exact.
    fn exact_pair(&self, o: &Certified) -> bool {
        self.err == 0.0 && o.err == 0.0 && self.value.lo == 0.0 && o.value.lo == 0.0
    }

    pub fn add(&self, o: &Certified) -> Certified {
        let value = self.value + o.value;
        if self.exact_pair(o) {
            return Certified::exact(value);
        }
        let err = self.err + o.err + DD_EPS * value.hi.abs();
        Certified {
            value,
            err: round_up(err),
        }
    }

    pub fn sub(&self, o: &Certified) -> Certified {
        self.add(&Certified {
            value: -o.value,
            err: o.err,
        })
    }

    pub fn mul(&self, o: &Certified) -> Certified {
        let value = self.value * o.value;
        if self.exact_pair(o) {
            return Certified::exact(value);
        }
        let err = self.err * o.mag() + o.err * self.value.hi.abs() + DD_EPS * value.hi.abs();
        Certified {
            value,
            err: round_up(err),
        }
    }

    pub fn div(&self, o: &Certified) -> Certified {
        let value = self.value / o.value;
        let den = o.value.hi.abs() - o.err;
        let err = if den <= 0.0 {
            f64::INFINITY
        } else {
            (self.err + value.hi.abs() * o.err) / den + 2.0 * DD_EPS * value.hi.abs()
        };
        Certified {
            value,
            err: round_up(err),
        }
    }

    /// True when the interval `value ± err` contains `x`.
    pub fn contains(&self, x: Dd) -> bool {
        (self.value - x).abs().to_f64() <= self.err
    }
}

/// Pads an error bound by a relative hair so accumulated f64 rounding in the
/// bookkeeping itself never lets the bound undershoot.
#[inline]
pub(crate) fn round_up(e: f64) -> f64 {
    e * (1.0 + 1e-15) + f64::MIN_POSITIVE
}

/// Plain bisection on a continuous, strictly increasing `f` with `f(lo) < 0 < f(hi)`.
///
/// Returns the midpoint of the final bracket, whose width is at most `tol`.
pub fn solve_increasing_root<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(tol > 0.0) || !(lo < hi) {
        return Err(Error::Domain(format!(
            "need lo < hi and tol > 0 (lo={lo}, hi={hi}, tol={tol})"
        )));
    }
    if !(f(lo) < 0.0 && f(hi) > 0.0) {
        return Err(Error::BracketInvalid { lo, hi });
    }
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > tol {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo + 0.5 * (hi - lo))
}

/// Bisection in double-double on any sign-changing bracket.
///
/// Stops once the bracket is narrower than `2^-bits` or can no longer be split.
/// Returns the midpoint and the half-width of the final bracket.
pub fn bisect_dd<F>(f: F, lo: Dd, hi: Dd, bits: u32) -> Result<(Dd, f64)>
where
    F: Fn(Dd) -> Dd,
{
    let flo = f(lo);
    let fhi = f(hi);
    let rising = if flo.hi < 0.0 && fhi.hi > 0.0 {
        true
    } else if flo.hi > 0.0 && fhi.hi < 0.0 {
        false
    } else {
        return Err(Error::BracketInvalid {
            lo: lo.to_f64(),
            hi: hi.to_f64(),
        });
    };
    let width_target = 2f64.powi(-(bits.min(1000) as i32));
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..(bits + 64) {
        let w = (hi - lo).to_f64();
        if w <= width_target {
            break;
        }
        let mid = (lo + hi).mul_f64(0.5);
        if !(mid > lo && mid < hi) {
            break;
        }
        let below = f(mid).hi < 0.0;
        if below == rising {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mid = (lo + hi).mul_f64(0.5);
    Ok((mid, round_up((hi - lo).to_f64() * 0.5)))
}

/// Horner evaluation of a polynomial given by descending integer coefficients.
pub fn poly_eval(coeffs_desc: &[i64], x: Dd) -> Dd {
    coeffs_desc
        .iter()
        .fold(Dd::ZERO, |acc, &c| acc * x + Dd::from_i64(c))
}

/// Derivative value of a polynomial given by descending coefficients.
pub fn poly_deriv_eval(coeffs_desc: &[i64], x: Dd) -> Dd {
    let n = coeffs_desc.len();
    if n < 2 {
        return Dd::ZERO;
    }
    coeffs_desc[..n - 1]
        .iter()
        .enumerate()
        .fold(Dd::ZERO, |acc, (i, &c)| {
            acc * x + Dd::from_i64(c * (n - 1 - i) as i64)
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dd_recovers_bits_lost_by_f64() {
        let third = Dd::ONE / Dd::from_f64(3.0);
        let back = third * Dd::from_f64(3.0) - Dd::ONE;
        assert!(back.to_f64().abs() < 1e-31);
        let x = Dd::from_f64(1.0) + Dd::from_f64(1e-20);
        assert_eq!(x.hi, 1.0);
        assert_eq!(x.lo, 1e-20);
    }

    #[test]
    fn dd_floor_handles_split_values() {
        let just_below = Dd {
            hi: 3.0,
            lo: -1e-20,
        };
        assert_eq!(just_below.floor().to_f64(), 2.0);
        let just_above = Dd { hi: 3.0, lo: 1e-20 };
        assert_eq!(just_above.floor().to_f64(), 3.0);
        assert_eq!(Dd::from_f64(2.7).floor().to_f64(), 2.0);
    }

    #[test]
    fn parse_decimal_matches_division() {
        let v = Dd::parse_decimal("0.1").unwrap();
        let w = Dd::ONE / Dd::from_f64(10.0);
        assert!((v - w).abs().to_f64() < 1e-32);
        assert_eq!(Dd::parse_decimal("12.25").unwrap().to_f64(), 12.25);
        assert!(Dd::parse_decimal("1.2.3").is_err());
        assert!(Dd::parse_decimal("").is_err());
    }

    #[test]
    fn sqrt_two_to_double_double() {
        let r = Dd::from_f64(2.0).sqrt();
        assert!((r * r - Dd::from_f64(2.0)).abs().to_f64() < 1e-30);
    }

    #[test]
    fn bisection_examples() {
        let r = solve_increasing_root(|x| x * x - 2.0, 1.0, 2.0, 1e-12).unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-12);
        let r = solve_increasing_root(|x| x * x * x - x - 1.0, 1.0, 2.0, 1e-12).unwrap();
        assert!((r - 1.324_717_957_244_746).abs() < 1e-12);
        let r = solve_increasing_root(|x| x * x - x - 1.0, 1.0, 2.0, 1e-12).unwrap();
        assert!((r - 1.618_033_988_749_895).abs() < 1e-12);
    }

    #[test]
    fn bisection_rejects_bad_bracket() {
        let e = solve_increasing_root(|x| x * x - 2.0, 2.0, 3.0, 1e-12).unwrap_err();
        assert!(matches!(e, Error::BracketInvalid { .. }));
        assert!(bisect_dd(|x| x - Dd::from_f64(5.0), Dd::ONE, Dd::from_f64(2.0), 90).is_err());
    }

    #[test]
    fn certified_error_covers_true_error() {
        let a = Certified::new(Dd::ONE / Dd::from_f64(3.0), 1e-31);
        let b = Certified::exact(Dd::from_f64(3.0));
        let p = a.mul(&b);
        assert!(p.contains(Dd::ONE));
    }
}
