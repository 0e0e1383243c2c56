//! Small numeric and formatting helpers shared across modules.

use statrs::function::erf::erfc;

pub(crate) const SQRT_2: f64 = std::f64::consts::SQRT_2;
pub(crate) const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Standard normal density.
pub(crate) fn norm_pdf(x: f64) -> f64 {
    if x.is_infinite() {
        return 0.0;
    }
    (-0.5 * x * x).exp() / SQRT_2PI
}

/// Standard normal cumulative distribution, accurate in both tails.
pub(crate) fn norm_cdf(x: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    if x == f64::INFINITY {
        return 1.0;
    }
    0.5 * erfc(-x / SQRT_2)
}

/// Mass and first moment of the standard normal over the cell `(a, b]`.
///
/// Returns `(P(a < X <= b), E[X; a < X <= b])`.
pub(crate) fn normal_cell_moments(a: f64, b: f64) -> (f64, f64) {
    let m0 = norm_cdf(b) - norm_cdf(a);
    let m1 = norm_pdf(a) - norm_pdf(b);
    (m0, m1)
}

/// Sample mean.
pub(crate) fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Format `value` with exactly `digits` significant digits.
///
/// Positional notation is used for moderate exponents, scientific otherwise,
/// so repeated runs always produce the same bytes.
pub fn format_sig(value: f64, digits: usize) -> String {
    assert!(digits >= 1, "digits must be at least 1");
    if value.is_nan() {
        return "nan".to_string();
    }
    if value.is_infinite() {
        return if value > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if value == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.*e}", digits - 1, value);
    let (mantissa, exp_str) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp_str.parse().expect("exponent");
    if exp < -4 || exp >= digits as i32 {
        return sci;
    }
    let negative = mantissa.starts_with('-');
    let digits_only: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if exp >= 0 {
        let point = exp as usize + 1;
        if point >= digits_only.len() {
            out.push_str(&digits_only);
            out.extend(std::iter::repeat('0').take(point - digits_only.len()));
        } else {
            out.push_str(&digits_only[..point]);
            out.push('.');
            out.push_str(&digits_only[point..]);
        }
    } else {
        out.push_str("0.");
        out.extend(std::iter::repeat('0').take((-exp - 1) as usize));
        out.push_str(&digits_only);
    }
    out
}

/// `format_sig` at the 15 significant digits used by the quantizer dump and CSV output.
pub fn format_sig15(value: f64) -> String {
    format_sig(value, 15)
}
