use serde_json::Value;

/// Values: six decimals, without a negative zero.
pub fn csv_value(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

/// Error estimates: scientific notation.
pub fn csv_err(x: f64) -> String {
    format!("{x:.3e}")
}

pub fn json_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}
