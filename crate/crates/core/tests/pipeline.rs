use betarep::reduction::DEFAULT_TRUNCATION;
use betarep::{
    build_disallowed_table, coverage_upper_bound, evaluate_word, expansion_of_unity, greedy_expand,
    is_admissible, multinacci, reduce_to_expansion, sweep, Beta, BetaRepresentation,
    CoverageOptions, DigitWord, Leading, Named, ReduceOptions, ReductionOutcome,
};
use proptest::prelude::*;

fn table(beta: &Beta) -> betarep::DisallowedWordTable {
    let u = expansion_of_unity(beta, 40).unwrap();
    build_disallowed_table(&u, 16, DEFAULT_TRUNCATION).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // For simple Parry bases whose replacements never raise the digit sum the
    // reduction ends at the greedy expansion, which the greedy algorithm
    // computes independently.
    #[test]
    fn reduction_reaches_greedy(digits in proptest::collection::vec(0u32..5, 1..7), k in 2u32..4) {
        prop_assume!(digits.iter().any(|&d| d > 0));
        let beta = multinacci(k, 100).unwrap();
        let word = DigitWord::new(0, digits);
        let rep = BetaRepresentation::new(beta.clone(), word.clone());
        let red = reduce_to_expansion(&rep, &table(&beta), ReduceOptions::default()).unwrap();
        prop_assert_eq!(red.outcome, ReductionOutcome::Clean);
        prop_assert!(red.digit_sum_non_increasing());
        let value = evaluate_word(&beta, &word);
        let greedy = greedy_expand(&beta, &value, 40, Leading::Expanded).unwrap();
        prop_assert!(greedy.termination.is_finite());
        prop_assert_eq!(red.final_rep.word.trimmed(), greedy.word.trimmed());
        let unity = expansion_of_unity(&beta, 20).unwrap();
        prop_assert!(is_admissible(&red.final_rep.word.trimmed(), &unity).unwrap());
    }
}

#[test]
fn golden_ratio_five() {
    let phi = Beta::named(Named::Phi);
    let rep = BetaRepresentation::new(phi.clone(), DigitWord::from_point_notation("5").unwrap());
    let red = reduce_to_expansion(&rep, &table(&phi), ReduceOptions::default()).unwrap();
    assert_eq!(red.final_rep.word.to_point_notation(), "1000.1001");
}

#[test]
fn coverage_sweep_is_order_independent() {
    let bases: Vec<Beta> = [150, 225, 275]
        .iter()
        .map(|&n| Beta::from_ratio(n, 100).unwrap())
        .collect();
    let opts = CoverageOptions::default();
    let all = sweep(&bases, 6, &opts);
    for (b, p) in bases.iter().zip(&all) {
        let alone = &sweep(std::slice::from_ref(b), 6, &opts)[0];
        assert_eq!(p.bound(), alone.bound());
        let direct = (2..=6)
            .filter_map(|k| {
                coverage_upper_bound(b, k, betarep::coverage::default_s_max(b, k), &opts)
                    .unwrap()
                    .bound
            })
            .min();
        assert_eq!(p.bound(), direct);
    }
}

#[test]
fn reports_serialize() {
    let r = coverage_upper_bound(
        &Beta::from_ratio(2, 1).unwrap(),
        4,
        8,
        &CoverageOptions::default(),
    )
    .unwrap();
    let json = serde_json::to_value(&r).unwrap();
    assert_eq!(json["status"], "covered");
    assert_eq!(json["bound"], "1");
}
