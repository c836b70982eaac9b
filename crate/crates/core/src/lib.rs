//! Beta representations with unrestricted digits.
//!
//! Greedy beta expansions, reduction of arbitrary representations toward the
//! expansion, the greedy average digit via the beta-shift automaton, explicit
//! upper and conditional lower bounds on the minimum average digit, and the
//! numerical coverage bound.

pub mod beta;
pub mod bounds;
pub mod coverage;
pub mod error;
pub mod expansion;
pub mod figure;
pub mod numeric;
pub mod reduction;
pub mod representation;
pub mod switched;
pub mod word;

pub use beta::{gamma_k, multinacci, Beta, BetaDef, Named};
pub use bounds::{
    build_shift_automaton, evaluate_bounds, greedy_average, max_mean_cycle, psi, theorem2_interval,
    theorem2_upper_bound, theorem2_witness, theorem3_lower_bound, theorem3_via_psi,
    BoundEvaluation, ExplicitWitness, GreedyAverage, ShiftAutomaton,
};
pub use coverage::{
    coverage_upper_bound, enumerate_by_digit_sum, spot_check, sweep, CoverageOptions,
    CoverageReport, CoverageStatus, SweepPoint,
};
pub use error::{Error, Result};
pub use expansion::{
    detect_eventual_period, expansion_of_unity, expansion_of_unity_partial, greedy_expand,
    greedy_expand_partial, is_admissible, is_monotone_mb, GreedyExpansion, Leading, Monotone,
    Termination, UnityExpansion,
};
pub use figure::{default_grid, figure1, FigureConfig, FigureRow};
pub use numeric::{solve_increasing_root, Certified, Dd};
pub use reduction::{
    build_disallowed_table, disallowed_words, reduce_step, reduce_to_expansion,
    DisallowedWordTable, ReduceOptions, Reduction, ReductionOutcome,
};
pub use representation::{
    average_digit_prefix, digits_to_switching, evaluate_word, simulate_affine, switching_to_digits,
    AffineTrajectory, BetaRepresentation, SwitchSignal,
};
pub use switched::{
    accounting, conjecture1_probe, linearized_rate, simulate_matrix, DigitDriven, GreedyAngle,
    MatrixSystem, Strategy,
};
pub use word::DigitWord;
