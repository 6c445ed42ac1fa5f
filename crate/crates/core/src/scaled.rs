//! Overflow-safe real numbers carried as `significand * e^log_scale`.

use std::cmp::Ordering;
use std::f64::consts::E;
use std::fmt;
use std::ops::{Div, Mul, Neg};

use crate::error::{PcfError, Result};

/// A real number `significand * exp(log_scale)`.
///
/// Normalized values keep `|significand|` in `[1, e)` and an integer-valued
/// `log_scale`; zero is stored as `(0, 0)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledReal {
    significand: f64,
    log_scale: f64,
}

impl ScaledReal {
    pub const ZERO: ScaledReal = ScaledReal {
        significand: 0.0,
        log_scale: 0.0,
    };
    pub const ONE: ScaledReal = ScaledReal {
        significand: 1.0,
        log_scale: 0.0,
    };

    /// Builds and normalizes `significand * e^log_scale`.
    pub fn new(significand: f64, log_scale: f64) -> Self {
        if significand == 0.0 {
            return Self::ZERO;
        }
        if !significand.is_finite() || !log_scale.is_finite() {
            return ScaledReal {
                significand: significand * if log_scale.is_nan() { f64::NAN } else { 1.0 },
                log_scale,
            };
        }
        let whole = log_scale.floor();
        let frac = log_scale - whole;
        let mut m = significand;
        let mut l = whole;
        if frac != 0.0 {
            m *= frac.exp();
        }
        let shift = m.abs().ln().floor();
        if shift != 0.0 {
            m *= (-shift).exp();
            l += shift;
        }
        while m.abs() >= E {
            m /= E;
            l += 1.0;
        }
        while m.abs() < 1.0 {
            m *= E;
            l -= 1.0;
        }
        ScaledReal {
            significand: m,
            log_scale: l,
        }
    }

    pub fn from_f64(x: f64) -> Self {
        Self::new(x, 0.0)
    }

    /// `sign * exp(ln_abs)` without forming the exponential.
    pub fn from_ln(ln_abs: f64, sign: f64) -> Self {
        if sign == 0.0 || ln_abs == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        let whole = ln_abs.floor();
        Self::new(sign.signum() * (ln_abs - whole).exp(), whole)
    }

    pub fn significand(&self) -> f64 {
        self.significand
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    pub fn is_zero(&self) -> bool {
        self.significand == 0.0
    }

    pub fn is_finite(&self) -> bool {
        self.significand.is_finite() && self.log_scale.is_finite()
    }

    /// -1, 0 or +1.
    pub fn signum(&self) -> f64 {
        if self.significand == 0.0 {
            0.0
        } else {
            self.significand.signum()
        }
    }

    /// `ln|value|`, or `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        if self.significand == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.log_scale + self.significand.abs().ln()
        }
    }

    pub fn abs(self) -> Self {
        ScaledReal {
            significand: self.significand.abs(),
            log_scale: self.log_scale,
        }
    }

    /// Renders as a double. Underflow rounds toward zero; overflow is an error.
    pub fn to_f64(&self) -> Result<f64> {
        if self.significand == 0.0 {
            return Ok(0.0);
        }
        let half = (self.log_scale * 0.5).floor();
        let v = self.significand * half.exp() * (self.log_scale - half).exp();
        if v.is_infinite() {
            return Err(PcfError::Overflow {
                ln_abs: self.ln_abs(),
            });
        }
        Ok(v)
    }

    /// Renders as a double, saturating to `±inf`.
    pub fn to_f64_lossy(&self) -> f64 {
        self.to_f64()
            .unwrap_or(self.significand.signum() * f64::INFINITY)
    }

    pub fn scale(self, factor: f64) -> Self {
        Self::new(self.significand * factor, self.log_scale)
    }

    /// Multiplies by `exp(delta)`.
    pub fn mul_exp(self, delta: f64) -> Self {
        Self::new(self.significand, self.log_scale + delta)
    }

    pub fn add(self, other: Self) -> Self {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let (big, small) = if self.log_scale >= other.log_scale {
            (self, other)
        } else {
            (other, self)
        };
        let gap = small.log_scale - big.log_scale;
        if gap < -800.0 {
            return big;
        }
        Self::new(
            big.significand + small.significand * gap.exp(),
            big.log_scale,
        )
    }

    pub fn sub(self, other: Self) -> Self {
        self.add(-other)
    }

    /// `|self - other| / max(|self|, |other|)`, zero when both vanish.
    pub fn rel_diff(&self, other: &Self) -> f64 {
        let denom_ln = self.ln_abs().max(other.ln_abs());
        if denom_ln == f64::NEG_INFINITY {
            return 0.0;
        }
        let diff = self.sub(*other);
        if diff.is_zero() {
            return 0.0;
        }
        (diff.ln_abs() - denom_ln).exp()
    }
}

impl Default for ScaledReal {
    fn default() -> Self {
        Self::ZERO
    }
}

impl From<f64> for ScaledReal {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl Neg for ScaledReal {
    type Output = ScaledReal;
    fn neg(self) -> Self {
        if self.is_zero() {
            return self;
        }
        ScaledReal {
            significand: -self.significand,
            log_scale: self.log_scale,
        }
    }
}

impl Mul for ScaledReal {
    type Output = ScaledReal;
    fn mul(self, rhs: Self) -> Self {
        Self::new(
            self.significand * rhs.significand,
            self.log_scale + rhs.log_scale,
        )
    }
}

impl Div for ScaledReal {
    type Output = ScaledReal;
    fn div(self, rhs: Self) -> Self {
        Self::new(
            self.significand / rhs.significand,
            self.log_scale - rhs.log_scale,
        )
    }
}

impl PartialOrd for ScaledReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let (sa, sb) = (self.signum(), other.signum());
        if sa.is_nan() || sb.is_nan() {
            return None;
        }
        if sa != sb {
            return sa.partial_cmp(&sb);
        }
        if sa == 0.0 {
            return Some(Ordering::Equal);
        }
        let mag = self.log_scale.partial_cmp(&other.log_scale)?.then(
            self.significand
                .abs()
                .partial_cmp(&other.significand.abs())?,
        );
        Some(if sa > 0.0 { mag } else { mag.reverse() })
    }
}

impl fmt::Display for ScaledReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*e^{}", self.significand, self.log_scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_plain_values() {
        let s = ScaledReal::from_f64(1.0);
        assert_eq!((s.significand(), s.log_scale()), (1.0, 0.0));
        let s = ScaledReal::from_f64(10.0);
        assert_eq!(s.log_scale(), 2.0);
        assert!((s.to_f64().unwrap() - 10.0).abs() < 1e-14);
        let s = ScaledReal::from_f64(-0.3);
        assert!(s.significand() <= -1.0 && s.significand() > -E);
        assert!((s.to_f64().unwrap() + 0.3).abs() < 1e-16);
    }

    #[test]
    fn negative_zero_is_canonical() {
        let z = ScaledReal::new(-0.0, 0.0);
        assert_eq!(z, ScaledReal::ZERO);
        assert!(z.significand().is_sign_positive());
        assert_eq!(ScaledReal::new(0.0, 123.0), ScaledReal::ZERO);
    }

    #[test]
    fn overflow_is_reported_not_saturated() {
        let big = ScaledReal::new(1.5, 800.0);
        assert!(matches!(big.to_f64(), Err(PcfError::Overflow { .. })));
        let tiny = ScaledReal::new(1.5, -800.0);
        assert_eq!(tiny.to_f64().unwrap(), 0.0);
        let edge = ScaledReal::new(1.0, 709.0);
        assert!(edge.to_f64().unwrap().is_finite());
    }

    #[test]
    fn subnormal_range_is_gradual() {
        let s = ScaledReal::from_ln(-720.0, 1.0);
        let v = s.to_f64().unwrap();
        assert!(v > 0.0 && ((v.ln() + 720.0).abs() < 1e-9));
    }

    #[test]
    fn arithmetic_across_scales() {
        let a = ScaledReal::from_ln(1000.0, 1.0);
        let b = ScaledReal::from_ln(998.0, -1.0);
        let p = a * b;
        assert!((p.ln_abs() - 1998.0).abs() < 1e-12);
        assert_eq!(p.signum(), -1.0);
        let q = a / b;
        assert!((q.to_f64().unwrap() + 2f64.exp()).abs() < 1e-12);
        let s = a.add(b);
        let expect = 1000.0 + (1.0 - (-2f64).exp()).ln();
        assert!((s.ln_abs() - expect).abs() < 1e-12);
        assert!(a.add(ScaledReal::from_ln(0.0, 1.0)) == a);
    }

    #[test]
    fn ordering_respects_sign_and_scale() {
        let a = ScaledReal::from_ln(50.0, 1.0);
        let b = ScaledReal::from_ln(49.0, 1.0);
        let c = ScaledReal::from_ln(60.0, -1.0);
        assert!(a > b);
        assert!(c < b);
        assert!(-a < -b);
        assert!(ScaledReal::ZERO > c);
    }

    #[test]
    fn rel_diff_is_scale_free() {
        let a = ScaledReal::from_ln(700.0, 1.0);
        let b = a.scale(1.0 + 1e-10);
        assert!((a.rel_diff(&b) - 1e-10).abs() < 1e-15);
        assert_eq!(ScaledReal::ZERO.rel_diff(&ScaledReal::ZERO), 0.0);
    }
}
