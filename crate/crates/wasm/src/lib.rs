//! Browser bindings: expansion of 1, a reduction trace, and the bounds for one base.
//! Every function takes the base as text (`2.5`, `27/4` or a name such as `phi`)
//! and returns a JSON string.

use betarep::bounds::{ratio_f64, DEFAULT_AUTOMATON_DEPTH};
use betarep::reduction::DEFAULT_TRUNCATION;
use betarep::{
    build_disallowed_table, evaluate_bounds, expansion_of_unity_partial, reduce_to_expansion, Beta,
    BetaRepresentation, DigitWord, Named, ReduceOptions, ReductionOutcome,
};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const MAX_DIGITS: usize = 200;

fn parse_beta(spec: &str) -> Result<Beta, String> {
    let s = spec.trim();
    if let Ok(name) = s.parse::<Named>() {
        return Ok(Beta::named(name));
    }
    let beta = if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| format!("bad ratio {s:?}"))?;
        let q: i64 = q.trim().parse().map_err(|_| format!("bad ratio {s:?}"))?;
        Beta::from_ratio(p, q)
    } else {
        let x: f64 = s
            .parse()
            .map_err(|_| format!("not a number or known name: {s:?}"))?;
        Beta::from_f64(x)
    };
    beta.map_err(|e| e.to_string())
}

pub fn unity_json(beta: &str, digits: usize) -> Result<Value, String> {
    let beta = parse_beta(beta)?;
    let u = expansion_of_unity_partial(&beta, digits.clamp(1, MAX_DIGITS))
        .map_err(|e| e.to_string())?;
    Ok(json!({
        "beta": beta.approx(),
        "digits": u.to_digit_string(),
        "finite": u.is_finite(),
        "period": u.period,
        "monotone": format!("{:?}", u.monotone).to_lowercase(),
    }))
}

pub fn reduce_json(beta: &str, word: &str) -> Result<Value, String> {
    let beta = parse_beta(beta)?;
    let word = DigitWord::from_point_notation(word).map_err(|e| e.to_string())?;
    let unity = expansion_of_unity_partial(&beta, 40).map_err(|e| e.to_string())?;
    let table =
        build_disallowed_table(&unity, 16, DEFAULT_TRUNCATION).map_err(|e| e.to_string())?;
    let red = reduce_to_expansion(
        &BetaRepresentation::new(beta, word),
        &table,
        ReduceOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let outcome = match red.outcome {
        ReductionOutcome::Clean => "clean",
        ReductionOutcome::TailTruncated => "tail truncated",
        ReductionOutcome::StepBudgetExhausted => "step budget exhausted",
    };
    Ok(json!({
        "table": table.entries.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
        "trace": red.trace_lines(),
        "digit_sums": red.digit_sums,
        "outcome": outcome,
        "residual": red.residual.value.to_f64(),
    }))
}

pub fn bounds_json(beta: &str) -> Result<Value, String> {
    let beta = parse_beta(beta)?;
    let ev = evaluate_bounds(&beta, DEFAULT_AUTOMATON_DEPTH, 1e-13).map_err(|e| e.to_string())?;
    Ok(json!({
        "beta": ev.beta,
        "dbar_betaE": ev.dbar_beta_e.value.to_string(),
        "dbar_betaE_value": ratio_f64(&ev.dbar_beta_e.value),
        "dbar_exact": ev.dbar_beta_e.exact,
        "thm2_upper": ev.thm2_upper.map(|r| r.to_string()),
        "thm3_lower": ev.thm3_lower,
    }))
}

fn to_js(r: Result<Value, String>) -> Result<String, JsValue> {
    r.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

/// d_β(1) to `digits` digits.
#[wasm_bindgen]
pub fn unity(beta: &str, digits: usize) -> Result<String, JsValue> {
    to_js(unity_json(beta, digits))
}

/// Reduction trace of a representation in point notation.
#[wasm_bindgen]
pub fn reduce(beta: &str, word: &str) -> Result<String, JsValue> {
    to_js(reduce_json(beta, word))
}

/// Greedy average and the two explicit bounds.
#[wasm_bindgen]
pub fn bounds(beta: &str) -> Result<String, JsValue> {
    to_js(bounds_json(beta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unity_of_rho() {
        let v = unity_json("rho", 20).unwrap();
        assert_eq!(v["digits"], "10001");
        assert_eq!(v["finite"], true);
        assert_eq!(unity_json("2.5", 5).unwrap()["digits"], "21011…");
        assert!(unity_json("0.5", 5).is_err());
        assert!(unity_json("banana", 5).is_err());
    }

    #[test]
    fn golden_trace() {
        let v = reduce_json("phi", "13.01").unwrap();
        assert_eq!(v["trace"][5], "1000.1001");
        assert_eq!(v["outcome"], "clean");
        assert_eq!(v["table"][0], "2=10.01");
    }

    #[test]
    fn bounds_for_gamma5() {
        let v = bounds_json("gamma5").unwrap();
        assert_eq!(v["thm2_upper"], "9/10");
        assert_eq!(
            bounds_json("27/4").unwrap()["thm3_lower"]
                .as_f64()
                .unwrap()
                .round(),
            2.0
        );
    }
}
