//! Deterministic text formatting of floating-point values.
//!
//! All file output of the crate goes through [`g17`], which renders an `f64`
//! with 17 significant digits in the style of C's `%.17g`: enough digits to
//! round-trip every finite double, trailing zeros stripped, scientific
//! notation only for very large or very small magnitudes. Using one shared
//! formatter keeps every CSV/JSON artifact byte-reproducible across runs.

use num_complex::Complex64;

/// Format `x` with 17 significant digits, `%.17g` style.
pub fn g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.to_string();
    }
    // Decimal exponent of the leading digit, read off the `e` form.
    let sci = format!("{:.16e}", x);
    let epos = sci.find('e').expect("exponential format always contains e");
    let exp: i32 = sci[epos + 1..].parse().expect("valid exponent");
    if exp < -4 || exp >= 17 {
        let mantissa = trim_trailing_zeros(&sci[..epos]);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let prec = (16 - exp) as usize;
        trim_trailing_zeros(&format!("{x:.prec$}")).to_string()
    }
}

fn trim_trailing_zeros(s: &str) -> &str {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.')
}

/// Format a complex number as `re,im` with [`g17`] components (CSV cell
/// pair).
pub fn g17_pair(z: Complex64) -> String {
    format!("{},{}", g17(z.re), g17(z.im))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integers_and_simple_fractions() {
        assert_eq!(g17(0.0), "0");
        assert_eq!(g17(-0.0), "-0");
        assert_eq!(g17(1.0), "1");
        assert_eq!(g17(-2.0), "-2");
        assert_eq!(g17(0.5), "0.5");
        assert_eq!(g17(100.0), "100");
    }

    #[test]
    fn non_terminating_values_keep_17_digits() {
        assert_eq!(g17(1.0 / 3.0), "0.33333333333333331");
        assert_eq!(g17(std::f64::consts::PI), "3.1415926535897931");
    }

    #[test]
    fn switches_to_scientific_for_extreme_magnitudes() {
        assert_eq!(g17(1e-5), "1.0000000000000001e-05");
        assert_eq!(g17(1.0e17), "1e+17");
        assert_eq!(g17(1e16), "10000000000000000");
        assert_eq!(g17(2.5e-300), "2.5e-300");
    }

    #[test]
    fn round_trips_every_formatted_value() {
        let samples = [
            1.0 / 3.0,
            std::f64::consts::PI,
            -1.2345678901234567e-8,
            6.02214076e23,
            f64::MIN_POSITIVE,
            f64::MAX,
            1.0 + f64::EPSILON,
        ];
        for &x in &samples {
            let back: f64 = g17(x).parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "round-trip failed for {x:e}");
        }
    }

    #[test]
    fn complex_pair() {
        assert_eq!(g17_pair(Complex64::new(1.0, -0.5)), "1,-0.5");
    }
}
