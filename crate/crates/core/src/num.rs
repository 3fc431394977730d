//! Decimal formatting with a fixed number of significant digits.

/// Format `x` rounded to `digits` significant digits, in positional notation
/// for moderate exponents and scientific notation otherwise, with trailing
/// zeros removed. Non-finite values print as `NaN`, `inf`, `-inf`.
pub fn sig(x: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        return format!("{}e{exp}", trim(mantissa));
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim(&format!("{x:.decimals$}")).to_string()
}

/// Shortest decimal text that parses back to exactly `x`. Always a valid
/// JSON number for finite input.
pub fn shortest(x: f64) -> String {
    format!("{x:?}")
}

/// Quote a CSV field when it contains a separator, quote or line break.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
