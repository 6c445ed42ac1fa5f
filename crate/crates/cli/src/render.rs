//! Locale-independent number rendering matching C's `%.17g`.

use pcf_core::ScaledReal;

/// Formats like `printf("%.17g", v)`.
pub fn g17(v: f64) -> String {
    general(v, 17)
}

/// Formats like `printf("%.{precision}g", v)`.
pub fn general(v: f64, precision: usize) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let p = precision.max(1);
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", p - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= p as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, v)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `(significand, log_scale)` or the plain double, as printed in CSV rows.
pub fn scaled_fields(v: &ScaledReal, scaled: bool) -> pcf_core::Result<(String, String)> {
    if scaled {
        Ok((g17(v.significand()), g17(v.log_scale())))
    } else {
        Ok((g17(v.to_f64()?), "0".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_examples() {
        assert_eq!(g17(0.1), "0.10000000000000001");
        assert_eq!(g17(1.0), "1");
        assert_eq!(g17(-2.5), "-2.5");
        assert_eq!(g17(1e-5), "1.0000000000000001e-05");
        assert_eq!(g17(123456789.0), "123456789");
        assert_eq!(g17(1e17), "1e+17");
        assert_eq!(g17(1.5e300), "1.5000000000000001e+300");
        assert_eq!(g17(0.0001), "0.0001");
        assert_eq!(g17(0.0), "0");
        assert_eq!(g17(f64::INFINITY), "inf");
        assert_eq!(general(1.23456, 3), "1.23");
        assert_eq!(g17(-650.0), "-650");
    }

    #[test]
    fn round_trips() {
        for v in [std::f64::consts::PI, 1.0 / 3.0, 6.02214076e23, -1.602176634e-19, 5e-324] {
            assert_eq!(g17(v).parse::<f64>().unwrap(), v);
        }
    }
}
