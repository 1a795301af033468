//! Float formatting shared by CSV and JSON writers.

/// Significant digits written for every float in output files.
pub const SIG_DIGITS: usize = 12;

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Rounds to [`SIG_DIGITS`] significant digits and prints the shortest plain
/// decimal form, falling back to scientific notation for very large or small
/// magnitudes.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let out = if (-5..SIG_DIGITS as i32).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    } else {
        format!("{}e{}", trim_zeros(mantissa), exp)
    };
    if out == "-0" {
        "0".into()
    } else {
        out
    }
}

/// Rounds through [`fmt_sig`] so JSON output carries the same precision as CSV.
pub fn round_sig(x: f64) -> f64 {
    fmt_sig(x).parse().unwrap_or(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats() {
        assert_eq!(fmt_sig(0.25), "0.25");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(-0.0), "0");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig(0.918_295_834_054_489_7), "0.918295834054");
        assert_eq!(fmt_sig(123456.789), "123456.789");
        assert_eq!(fmt_sig(1.5e-9), "1.5e-9");
        assert_eq!(fmt_sig(-2.0e20), "-2e20");
        assert_eq!(fmt_sig(f64::NAN), "NaN");
    }
}
