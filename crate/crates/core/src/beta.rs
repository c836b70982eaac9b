//! Bases β > 1 and the special constants they are built from.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{bisect_dd, poly_deriv_eval, poly_eval, round_up, Dd, DD_EPS};

/// Fractional bits requested when refining polynomial roots.
pub const DEFAULT_PRECISION: u32 = 100;

/// The irrational bases that come up repeatedly.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Named {
    /// Real root of x^3 - x - 1, the smallest Pisot number.
    Rho,
    /// Real root > 1 of x^4 - x^3 - 1.
    Chi,
    Sqrt2,
    Phi,
    Mu3,
    Gamma6,
    Gamma5,
    E,
}

impl Named {
    pub const ALL: [Named; 8] = [
        Named::Rho,
        Named::Chi,
        Named::Sqrt2,
        Named::Phi,
        Named::Mu3,
        Named::Gamma6,
        Named::Gamma5,
        Named::E,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Named::Rho => "rho",
            Named::Chi => "chi",
            Named::Sqrt2 => "sqrt2",
            Named::Phi => "phi",
            Named::Mu3 => "mu3",
            Named::Gamma6 => "gamma6",
            Named::Gamma5 => "gamma5",
            Named::E => "e",
        }
    }

    /// Pisot flag as tabulated; not computed.
    pub fn is_pisot(self) -> bool {
        !matches!(self, Named::Sqrt2 | Named::Gamma5 | Named::E)
    }
}

impl FromStr for Named {
    type Err = Error;
    fn from_str(s: &str) -> Result<Named> {
        Named::ALL
            .into_iter()
            .find(|n| n.symbol().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown named base {s:?}")))
    }
}

/// How a [`Beta`] was obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BetaDef {
    Float {
        value: f64,
    },
    Rational {
        num: i64,
        den: i64,
    },
    /// Coefficients in descending degree, isolating bracket `[lo, hi]`.
    Polynomial {
        coeffs: Vec<i64>,
        lo: f64,
        hi: f64,
    },
    Named {
        name: Named,
    },
    /// Root > 2 of x^(k-2) (x-2)^2 = 1.
    Gamma {
        k: u32,
    },
    /// Root in (1,2) of x^k = x^(k-1) + ... + 1.
    Multinacci {
        k: u32,
    },
}

/// A base β > 1 held in double-double with an absolute error bound.
#[derive(Clone, Debug, PartialEq)]
pub struct Beta {
    value: Dd,
    err: f64,
    def: BetaDef,
    precision: u32,
}

impl Beta {
    fn checked(value: Dd, err: f64, def: BetaDef, precision: u32) -> Result<Beta> {
        if !(value.to_f64() - err > 1.0) {
            return Err(Error::Domain(format!(
                "base must exceed 1, got {}",
                value.to_f64()
            )));
        }
        Ok(Beta {
            value,
            err,
            def,
            precision,
        })
    }

    /// Exactly the given double.
    pub fn from_f64(x: f64) -> Result<Beta> {
        if !x.is_finite() {
            return Err(Error::Domain(format!("base must be finite, got {x}")));
        }
        Beta::checked(Dd::from_f64(x), 0.0, BetaDef::Float { value: x }, 106)
    }

    pub fn from_ratio(num: i64, den: i64) -> Result<Beta> {
        if den <= 0 {
            return Err(Error::Domain("denominator must be positive".into()));
        }
        let v = Dd::from_ratio(num, den);
        let exact = num % den == 0 || (den as u64).is_power_of_two();
        let err = if exact {
            0.0
        } else {
            round_up(DD_EPS * v.hi.abs())
        };
        Beta::checked(v, err, BetaDef::Rational { num, den }, 106)
    }

    /// Root of an integer polynomial (descending coefficients) isolated in `[lo, hi]`.
    pub fn from_poly(coeffs: &[i64], lo: f64, hi: f64, precision: u32) -> Result<Beta> {
        if coeffs.len() < 2 {
            return Err(Error::Domain("polynomial must have degree >= 1".into()));
        }
        let (root, half_width) = bisect_dd(
            |x| poly_eval(coeffs, x),
            Dd::from_f64(lo),
            Dd::from_f64(hi),
            precision,
        )?;
        let noise = {
            // Horner rounding noise near the root, translated into an x-error.
            let absx = Dd::from_f64(root.hi.abs());
            let mag: f64 = coeffs
                .iter()
                .rev()
                .enumerate()
                .map(|(i, &c)| (c as f64).abs() * absx.hi.powi(i as i32))
                .sum();
            let slope = poly_deriv_eval(coeffs, root).hi.abs();
            if slope > 0.0 {
                4.0 * coeffs.len() as f64 * DD_EPS * mag / slope
            } else {
                f64::INFINITY
            }
        };
        Beta::checked(
            root,
            round_up(half_width + noise),
            BetaDef::Polynomial {
                coeffs: coeffs.to_vec(),
                lo,
                hi,
            },
            precision,
        )
    }

    pub fn named(name: Named) -> Beta {
        let p = DEFAULT_PRECISION;
        let built = match name {
            Named::Rho => Beta::from_poly(&[1, 0, -1, -1], 1.0, 2.0, p),
            Named::Chi => Beta::from_poly(&[1, -1, 0, 0, -1], 1.0, 2.0, p),
            Named::Sqrt2 => Beta::from_poly(&[1, 0, -2], 1.0, 2.0, p),
            Named::Phi => Beta::from_poly(&[1, -1, -1], 1.0, 2.0, p),
            Named::Mu3 => Beta::from_poly(&[1, -1, -1, -1], 1.0, 2.0, p),
            Named::Gamma6 => Beta::from_poly(&[1, -2, 0, -1], 2.0, 3.0, p),
            Named::Gamma5 => gamma_k(5, p),
            Named::E => Ok(euler()),
        };
        let mut b = built.expect("tabulated constants have valid brackets");
        b.def = BetaDef::Named { name };
        b
    }

    pub fn value(&self) -> Dd {
        self.value
    }

    /// Absolute error bound on [`Beta::value`].
    pub fn err(&self) -> f64 {
        self.err
    }

    pub fn approx(&self) -> f64 {
        self.value.to_f64()
    }

    pub fn def(&self) -> &BetaDef {
        &self.def
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// ⌊β⌋, the largest digit a beta expansion can use after d₀.
    ///
    /// If β sits within its error bound of an integer, that integer is
    /// assumed to be β itself.
    pub fn floor_digit(&self) -> u32 {
        let nearest = self.value.to_f64().round();
        if (self.value - Dd::from_f64(nearest)).abs().to_f64() <= self.err {
            nearest as u32
        } else {
            self.value.floor().to_f64() as u32
        }
    }

    /// True when β is an integer with certainty.
    pub fn is_integer(&self) -> bool {
        self.err == 0.0 && self.value.floor() == self.value
    }

    pub fn label(&self) -> String {
        match &self.def {
            BetaDef::Named { name } => name.symbol().to_string(),
            BetaDef::Gamma { k } => format!("gamma{k}"),
            BetaDef::Multinacci { k } => format!("mu{k}"),
            BetaDef::Rational { num, den } => format!("{num}/{den}"),
            _ => format!("{}", self.approx()),
        }
    }
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// `F(k, x) = x^(k-2) (x-2)^2`.
pub fn gamma_defining(k: u32, x: Dd) -> Dd {
    let t = x - Dd::from_f64(2.0);
    x.powi(k - 2) * t * t
}

/// γ_k: the unique root x > 2 of x^(k-2) (x-2)^2 = 1, for k ≥ 5.
pub fn gamma_k(k: u32, precision: u32) -> Result<Beta> {
    if k < 5 {
        return Err(Error::Domain(format!("gamma_k needs k >= 5, got {k}")));
    }
    // F(k,2) = 0 < 1 < F(k,3) = 3^(k-2).
    let (root, half_width) = bisect_dd(
        |x| gamma_defining(k, x) - Dd::ONE,
        Dd::from_f64(2.0),
        Dd::from_f64(3.0),
        // γ_k - 2 shrinks like 2^(-k/2); keep the requested precision relative to it.
        precision + k / 2,
    )?;
    let slope = {
        // d/dx F = x^(k-3) (x-2) (k x - 2(k-2)), with x - 2 taken from the low limb.
        let x = root.to_f64();
        let t = (root - Dd::from_f64(2.0)).to_f64();
        x.powi(k as i32 - 3) * t * (k as f64 * t + 4.0)
    };
    let noise = 8.0 * k as f64 * DD_EPS / slope.abs().max(f64::MIN_POSITIVE);
    Beta::checked(
        root,
        round_up(half_width + noise),
        BetaDef::Gamma { k },
        precision,
    )
}

/// μ_k: the root in (1, 2) of x^k = (x^k - 1)/(x - 1), for k ≥ 2.
pub fn multinacci(k: u32, precision: u32) -> Result<Beta> {
    if k < 2 {
        return Err(Error::Domain(format!("multinacci needs k >= 2, got {k}")));
    }
    // x^k - (x^(k-1) + ... + 1): negative at 1, equal to 1 at 2.
    let mut coeffs = vec![1i64];
    coeffs.extend(std::iter::repeat_n(-1, k as usize));
    let mut b = Beta::from_poly(&coeffs, 1.0, 2.0, precision)?;
    b.def = BetaDef::Multinacci { k };
    Ok(b)
}

/// e from its factorial series, summed smallest-term first.
fn euler() -> Beta {
    let mut terms = Vec::with_capacity(34);
    let mut t = Dd::ONE;
    terms.push(t);
    for n in 1..34 {
        t = t / Dd::from_f64(n as f64);
        terms.push(t);
    }
    let sum = terms.iter().rev().fold(Dd::ZERO, |acc, &x| acc + x);
    // Tail after 1/33! is below 1e-37; rounding dominates.
    let err = round_up(40.0 * DD_EPS * sum.hi);
    Beta {
        value: sum,
        err,
        def: BetaDef::Named { name: Named::E },
        precision: 100,
    }
}
