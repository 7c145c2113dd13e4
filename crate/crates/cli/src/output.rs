//! Number and tensor formatting for terminal and JSON output.

use serde_json::Value;
use tensor_chain::tensor::format_nested;
use tensor_chain::Tensor;

pub const SIGNIFICANT: usize = 12;

/// `%.12g`-style rendering: 12 significant digits, trailing zeros dropped,
/// scientific notation outside `1e-5 <= |x| < 1e12`.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", SIGNIFICANT - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..SIGNIFICANT as i32).contains(&exp) {
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    let decimals = (SIGNIFICANT as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// JSON number rounded to [`SIGNIFICANT`] digits.
pub fn json_num(x: f64) -> Value {
    num(x)
        .parse::<f64>()
        .ok()
        .and_then(|r| serde_json::Number::from_f64(r).map(Value::Number))
        .unwrap_or(Value::Null)
}

pub fn json_numeric_tensor(t: &Tensor<f64>) -> Value {
    serde_json::json!({
        "shape": t.dims(),
        "data": t.data().iter().map(|&x| json_num(x)).collect::<Vec<_>>(),
    })
}

/// Aligned rows for matrices, a single bracketed line otherwise.
pub fn table(dims: &[usize], cells: &[String]) -> String {
    if dims.len() != 2 {
        return format_nested(dims, cells);
    }
    let cols = dims[1];
    let mut widths = vec![0; cols];
    for (k, c) in cells.iter().enumerate() {
        widths[k % cols] = widths[k % cols].max(c.chars().count());
    }
    cells
        .chunks(cols)
        .map(|row| {
            let padded: Vec<String> = row
                .iter()
                .zip(&widths)
                .map(|(c, &w)| format!("{c:>w$}"))
                .collect();
            format!("[ {} ]", padded.join("  "))
        })
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn numeric_table(t: &Tensor<f64>) -> String {
    let cells: Vec<String> = t.data().iter().map(|&x| num(x)).collect();
    table(t.dims(), &cells)
}

pub fn symbolic_table<T: std::fmt::Display + tensor_chain::tensor::Element>(
    t: &Tensor<T>,
) -> String {
    let cells: Vec<String> = t.data().iter().map(ToString::to_string).collect();
    table(t.dims(), &cells)
}

pub fn point(x: &[f64]) -> String {
    let coords: Vec<String> = x.iter().map(|&c| num(c)).collect();
    format!("({})", coords.join(", "))
}
