//! The 2×2 switched linear system: a rotation by θ and the diagonal map
//! `diag(c, βc)`. For small θ the angle `arctan(x₂/x₁)/θ` follows the affine
//! system, so digit words become switching signals.

use std::f64::consts::PI;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::representation::{average_digit_prefix, digits_to_switching, SwitchSignal};
use crate::word::DigitWord;

pub type Vec2 = [f64; 2];
type Mat2 = [[f64; 2]; 2];

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct MatrixSystem {
    pub theta: f64,
    pub c: f64,
    pub beta: f64,
}

impl MatrixSystem {
    /// Requires `c ∈ (0,1)` and `βc ≥ 1`.
    pub fn new(theta: f64, c: f64, beta: f64) -> Result<MatrixSystem> {
        if !(c > 0.0 && c < 1.0) {
            return Err(Error::Domain(format!("c must lie in (0,1), got {c}")));
        }
        if !(beta * c >= 1.0) {
            return Err(Error::Domain(format!("need beta*c >= 1, got {}", beta * c)));
        }
        if !theta.is_finite() {
            return Err(Error::Domain("theta must be finite".into()));
        }
        Ok(MatrixSystem { theta, c, beta })
    }

    pub fn a1(&self) -> Mat2 {
        let (s, c) = self.theta.sin_cos();
        [[c, s], [-s, c]]
    }

    /// `det A₂ = βc²`. At least 1 only when `β ≥ c⁻²`; `βc ≥ 1` alone does not force it.
    pub fn det_a2(&self) -> f64 {
        self.beta * self.c * self.c
    }

    pub fn a2(&self) -> Mat2 {
        [[self.c, 0.0], [0.0, self.beta * self.c]]
    }

    pub fn matrix(&self, symbol: u8) -> Mat2 {
        if symbol == 1 {
            self.a1()
        } else {
            self.a2()
        }
    }
}

fn apply(m: &Mat2, x: Vec2) -> Vec2 {
    [
        m[0][0] * x[0] + m[0][1] * x[1],
        m[1][0] * x[0] + m[1][1] * x[1],
    ]
}

fn det(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

fn norm(x: Vec2) -> f64 {
    x[0].hypot(x[1])
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixTrajectory {
    /// `states[0] = x0`.
    pub states: Vec<Vec2>,
    pub norms: Vec<f64>,
    /// Determinant of the product `A_{σ_{n-1}} ⋯ A_{σ_0}`, accumulated factor by
    /// factor; expanding the product itself cancels badly.
    pub det: f64,
}

impl MatrixTrajectory {
    /// `(‖x(T)‖/‖x(0)‖)^(1/T)`.
    pub fn rate(&self) -> f64 {
        let t = self.norms.len() - 1;
        (self.norms[t] / self.norms[0]).powf(1.0 / t as f64)
    }
}

/// `x(k+1) = A_{σ_k} x(k)`, step by step.
pub fn simulate_matrix(
    sys: &MatrixSystem,
    x0: Vec2,
    sig: &SwitchSignal,
) -> Result<MatrixTrajectory> {
    if x0 == [0.0, 0.0] {
        return Err(Error::Domain("initial vector must be nonzero".into()));
    }
    let (a1, a2) = (sys.a1(), sys.a2());
    let mut x = x0;
    let (d1, d2) = (det(&a1), det(&a2));
    let mut det_prod = 1.0;
    let mut states = vec![x0];
    let mut norms = vec![norm(x0)];
    for &s in sig.symbols() {
        let m = if s == 1 { &a1 } else { &a2 };
        x = apply(m, x);
        det_prod *= if s == 1 { d1 } else { d2 };
        states.push(x);
        norms.push(norm(x));
    }
    Ok(MatrixTrajectory {
        states,
        norms,
        det: det_prod,
    })
}

/// Step counts behind the linearised rate: T₁ rotations, T₂ contractions.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Accounting {
    pub k: u64,
    pub digit_sum: u64,
    pub t1: u64,
    pub t2: u64,
    pub t: u64,
}

impl Accounting {
    /// `T = T₂(1 + d̄_k)`, checked as `T·k = T₂(k + Σd)`.
    pub fn holds(&self) -> bool {
        self.t as u128 * self.k as u128 == self.t2 as u128 * (self.k + self.digit_sum) as u128
    }
}

/// Counts the switching signal of the first k digits (positions 0..k).
pub fn accounting(word: &DigitWord, k: usize) -> Result<Accounting> {
    let avg = average_digit_prefix(word, k)?;
    let prefix = DigitWord::new(0, (0..k as i32).map(|j| word.digit_at(j)).collect());
    let sig = digits_to_switching(&prefix)?;
    Ok(Accounting {
        k: k as u64,
        digit_sum: (avg * Ratio::from_integer(k as u64)).to_integer(),
        t1: sig.count_ones() as u64,
        t2: sig.count_twos() as u64,
        t: sig.len() as u64,
    })
}

/// `c^(1/(d̄_k + 1))` with d̄_k the mean of digits 0..k.
pub fn linearized_rate(c: f64, word: &DigitWord, k: usize) -> Result<f64> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::Domain(format!("c must lie in (0,1), got {c}")));
    }
    let avg = average_digit_prefix(word, k)?;
    let dbar = *avg.numer() as f64 / *avg.denom() as f64;
    Ok(c.powf(1.0 / (dbar + 1.0)))
}

/// Chooses the next matrix from the step index and current state.
pub trait Strategy: Sync {
    fn symbol(&self, step: usize, x: Vec2) -> u8;
}

/// Contract when within one rotation of the x₁-axis, rotate otherwise.
#[derive(Copy, Clone, Debug)]
pub struct GreedyAngle {
    pub theta: f64,
}

impl Strategy for GreedyAngle {
    fn symbol(&self, _step: usize, x: Vec2) -> u8 {
        if (x[1] / x[0]).atan().abs() < self.theta {
            2
        } else {
            1
        }
    }
}

/// Replays a fixed signal, cyclically.
#[derive(Clone, Debug)]
pub struct DigitDriven {
    pub signal: SwitchSignal,
}

impl Strategy for DigitDriven {
    fn symbol(&self, step: usize, _x: Vec2) -> u8 {
        self.signal.symbols()[step % self.signal.len()]
    }
}

/// Empirical rate over `steps` steps from `x0`, renormalising to avoid underflow.
pub fn strategy_rate(sys: &MatrixSystem, strategy: &dyn Strategy, x0: Vec2, steps: usize) -> f64 {
    let (a1, a2) = (sys.a1(), sys.a2());
    let mut x = x0;
    let mut log_norm = -norm(x0).ln();
    for step in 0..steps {
        x = apply(
            if strategy.symbol(step, x) == 1 {
                &a1
            } else {
                &a2
            },
            x,
        );
        let n = norm(x);
        if !(1e-100..=1e100).contains(&n) {
            log_norm += n.ln();
            x = [x[0] / n, x[1] / n];
        }
    }
    ((log_norm + norm(x).ln()) / steps as f64).exp()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeRow {
    pub theta: f64,
    pub x0_angle: f64,
    pub empirical_rate: f64,
    pub reference_rate: f64,
    #[serde(rename = "T")]
    pub t: usize,
}

/// Runs a strategy for each θ from `initial_vectors` unit vectors evenly spaced
/// in angle over `[0, π)`. The reference is `c^(1/(d̄+1))` for the supplied d̄.
/// Exploratory only.
pub fn conjecture1_probe<F, S>(
    c: f64,
    beta: f64,
    thetas: &[f64],
    strategy: F,
    steps: usize,
    dbar: f64,
    initial_vectors: usize,
) -> Result<Vec<ProbeRow>>
where
    F: Fn(f64) -> S + Sync,
    S: Strategy,
{
    if steps == 0 || initial_vectors == 0 {
        return Err(Error::Domain(
            "steps and the initial-vector grid must be positive".into(),
        ));
    }
    if thetas.iter().any(|&t| !(t > 0.0 && t <= PI / 4.0)) {
        return Err(Error::Domain("theta values must lie in (0, pi/4]".into()));
    }
    if thetas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Domain("theta values must be decreasing".into()));
    }
    let systems = thetas
        .iter()
        .map(|&t| MatrixSystem::new(t, c, beta))
        .collect::<Result<Vec<_>>>()?;
    let reference = c.powf(1.0 / (dbar + 1.0));
    let jobs: Vec<(usize, usize)> = (0..thetas.len())
        .flat_map(|i| (0..initial_vectors).map(move |j| (i, j)))
        .collect();
    Ok(jobs
        .par_iter()
        .map(|&(i, j)| {
            let sys = &systems[i];
            let angle = PI * j as f64 / initial_vectors as f64;
            let s = strategy(sys.theta);
            ProbeRow {
                theta: sys.theta,
                x0_angle: angle,
                empirical_rate: strategy_rate(sys, &s, [angle.cos(), angle.sin()], steps),
                reference_rate: reference,
                t: steps,
            }
        })
        .collect())
}

/// Max empirical rate over initial vectors, per θ, in input order.
pub fn probe_sup(rows: &[ProbeRow]) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for r in rows {
        match out.last_mut() {
            Some((t, m)) if *t == r.theta => *m = m.max(r.empirical_rate),
            _ => out.push((r.theta, r.empirical_rate)),
        }
    }
    out
}
