//! Locale-independent number formatting for CSV and JSON output.
//!
//! Numbers are printed like C's `%.12g`: twelve significant digits, fixed
//! notation for exponents in [−4, 12), scientific otherwise, trailing zeros
//! removed. Magnitudes below 5e-13 print as `0` so that round-off noise does
//! not leak into golden files.

const DIGITS: usize = 12;
const ZERO_BELOW: f64 = 5e-13;

pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x.abs() < ZERO_BELOW {
        return "0".into();
    }
    let sci = format!("{:.*e}", DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-4..DIGITS as i32).contains(&exp) {
        let decimals = (DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// `x` rounded to twelve significant digits.
pub fn round12(x: f64) -> f64 {
    if x.is_finite() {
        fmt_num(x).parse().expect("formatted number parses")
    } else {
        x
    }
}

/// Serde helper for `#[serde(serialize_with = "…")]` on `f64` fields.
pub fn serialize_12<S: serde::Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(round12(*x))
}
