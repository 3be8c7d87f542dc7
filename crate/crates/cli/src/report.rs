//! Deterministic JSON reports. Object keys come out sorted and every float
//! is rounded to 12 significant digits, so identical runs give identical bytes.

use serde::Serialize;
use serde_json::{json, Value};

use crate::scenarios::{Outcome, Params, Scenario};

pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

pub fn normalize(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .map(round_sig)
            .and_then(serde_json::Number::from_f64)
            .map_or(Value::Null, Value::Number),
        Value::Array(a) => Value::Array(a.into_iter().map(normalize).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, normalize(v))).collect()),
        other => other,
    }
}

pub fn to_json(v: impl Serialize) -> Value {
    normalize(
        serde_json::to_value(v).unwrap_or_else(|e| Value::String(format!("unserializable: {e}"))),
    )
}

pub fn scenario_report(s: &Scenario, params: &Params, out: &Outcome) -> Value {
    normalize(json!({
        "scenario": s.name,
        "anchor": s.anchor,
        "params": params,
        "claims": out.claims,
        "all_match": out.all_match(),
        "details": out.details,
    }))
}

pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values built from serde_json serialize");
    s.push('\n');
    s
}

/// One line per claim whose observation differs from the expectation.
pub fn mismatch_diff(out: &Outcome) -> String {
    out.claims
        .iter()
        .filter(|c| !c.matches)
        .map(|c| {
            format!(
                "- {}: expected {}, observed {} ({})\n",
                c.claim, c.expected, c.observed, c.note
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round_sig(0.1 + 0.2), 0.3);
        assert_eq!(round_sig(1.0 / 3.0), 0.333333333333);
        assert_eq!(round_sig(-2.5e-300), -2.5e-300);
        assert_eq!(round_sig(0.0), 0.0);
    }

    #[test]
    fn keys_come_out_sorted() {
        let v = normalize(json!({"b": 1, "a": {"d": 0.1, "c": [1.0e-20]}}));
        assert_eq!(
            serde_json::to_string(&v).unwrap(),
            r#"{"a":{"c":[1e-20],"d":0.1},"b":1}"#
        );
    }

    proptest::proptest! {
        #[test]
        fn rounding_is_idempotent_and_close(x in proptest::num::f64::NORMAL) {
            let r = round_sig(x);
            proptest::prop_assert_eq!(round_sig(r), r);
            proptest::prop_assert!((r - x).abs() <= 1e-11 * x.abs());
        }

        #[test]
        fn normalize_is_idempotent(xs in proptest::collection::vec(-1e6f64..1e6, 0..8)) {
            let v = normalize(json!({"xs": xs, "n": xs.len()}));
            proptest::prop_assert_eq!(normalize(v.clone()), v);
        }
    }
}
