//! JSON helpers. Floats are written with 17 significant digits so that
//! reports reproduce bit-for-bit.

use lindblad_core::linalg::{CMat, CVec, C64};
use serde_json::{Number, Value};

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// A finite float as a JSON number; non-finite values become `null`.
pub fn num(x: f64) -> Value {
    Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn complex(z: C64) -> Value {
    Value::Array(vec![num(z.re), num(z.im)])
}

pub fn matrix(m: &CMat) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| complex(m[(i, j)])).collect()))
            .collect(),
    )
}

pub fn vector(v: &CVec) -> Value {
    Value::Array(v.iter().map(|z| complex(*z)).collect())
}

pub fn reals(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

/// Pretty printer that writes every float in 17-significant-digit form and
/// integers as integers. Ends with a newline.
pub fn to_pretty(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

fn indent(out: &mut String, level: usize) {
    out.push('\n');
    out.extend(std::iter::repeat_n("  ", level));
}

fn write_value(out: &mut String, v: &Value, level: usize) {
    match v {
        Value::Number(n) if n.is_f64() => out.push_str(&n.as_f64().map_or("null".into(), format_float)),
        Value::Array(a) if !a.is_empty() => {
            out.push('[');
            for (i, x) in a.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                indent(out, level + 1);
                write_value(out, x, level + 1);
            }
            indent(out, level);
            out.push(']');
        }
        Value::Object(o) if !o.is_empty() => {
            out.push('{');
            for (i, (k, x)) in o.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                indent(out, level + 1);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(out, x, level + 1);
            }
            indent(out, level);
            out.push('}');
        }
        other => out.push_str(&other.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(to_pretty(&num(0.1)), "1.0000000000000001e-1\n");
        assert_eq!(num(f64::INFINITY), Value::Null);
        let v = serde_json::json!({"a": 4, "b": 1.5, "c": [], "d": [2.0]});
        assert_eq!(
            to_pretty(&v),
            "{\n  \"a\": 4,\n  \"b\": 1.5000000000000000e0,\n  \"c\": [],\n  \"d\": [\n    2.0000000000000000e0\n  ]\n}\n"
        );
    }
}
