//! Compact JSON output in which every non-integer number carries 17 significant
//! digits, so any reader recovers the exact `f64`.

use serde::Serialize;
use serde_json::Value;
use std::fmt::Write;

/// Serializes `value` on one line. Object keys come out sorted.
pub fn to_line<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    write_value(&v, &mut out);
    Ok(out)
}

/// `{:.16e}` keeps 17 significant digits; Rust prints a bare exponent such as
/// `e0`, which is valid JSON.
pub fn write_f64(x: f64, out: &mut String) {
    let _ = write!(out, "{x:.16e}");
}

pub fn write_value(v: &Value, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                let _ = write!(out, "{u}");
            } else if let Some(i) = n.as_i64() {
                let _ = write!(out, "{i}");
            } else {
                write_f64(n.as_f64().unwrap_or(f64::NAN), out);
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            out.push('{');
            for (i, (k, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_value(item, out);
            }
            out.push('}');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn numbers_keep_seventeen_digits() {
        let mut s = String::new();
        write_f64(0.1, &mut s);
        assert_eq!(s, "1.0000000000000001e-1");
        assert_eq!(to_line(&serde_json::json!({"b": 1, "a": [-2.5, true]})).unwrap(), r#"{"a":[-2.5000000000000000e0,true],"b":1}"#);
    }

    proptest! {
        #[test]
        fn floats_round_trip(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let line = to_line(&[x]).unwrap();
            let back: Vec<f64> = serde_json::from_str(&line).unwrap();
            prop_assert_eq!(back[0].to_bits(), x.to_bits());
        }
    }
}
