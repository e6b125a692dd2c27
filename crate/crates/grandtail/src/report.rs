//! Deterministic report formatting: every float in an emitted report is
//! rounded to 9 significant digits so identical configurations produce
//! byte-identical output.

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

/// Rounds to 9 significant digits (exact for zero and non-finite values).
pub fn sig9(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.8e}").parse().unwrap()
}

fn round_in_place(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if n.is_f64() {
                if let Some(f) = n.as_f64() {
                    if let Some(r) = serde_json::Number::from_f64(sig9(f)) {
                        *v = Value::Number(r);
                    }
                }
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_in_place),
        Value::Object(o) => o.values_mut().for_each(round_in_place),
        _ => {}
    }
}

/// Serializes with all floats rounded to 9 significant digits and keys in a
/// fixed (sorted) order.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value).map_err(|e| Error::Config(e.to_string()))?;
    round_in_place(&mut v);
    serde_json::to_string_pretty(&v).map_err(|e| Error::Config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig9_rounding() {
        #[allow(clippy::approx_constant)]
        let want = 3.14159265;
        assert_eq!(sig9(std::f64::consts::PI), want);
        assert_eq!(sig9(0.0), 0.0);
        assert_eq!(sig9(1.0), 1.0);
        assert_eq!(sig9(123456789012.0), 123456789000.0);
        assert!(sig9(f64::INFINITY).is_infinite());
    }

    #[test]
    fn canonical_json_is_stable() {
        #[derive(Serialize)]
        struct R {
            b: f64,
            a: f64,
        }
        let s1 = to_canonical_json(&R { b: 1.0 / 3.0, a: 2.0 }).unwrap();
        let s2 = to_canonical_json(&R { b: 1.0 / 3.0, a: 2.0 }).unwrap();
        assert_eq!(s1, s2);
        assert!(s1.contains("0.333333333"));
    }
}
