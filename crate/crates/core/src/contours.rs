//! Saddle points and steepest-descent paths for every evaluation regime.
//!
//! All paths live in the scaled variable `w`, with `t = x / (2 sqrt|a|)`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{PcfError, Result};
use crate::scalar::{sin_defect, sinc, sinc_deriv, sin_defect_deriv, tcot, tcot_defect, tcot_defect_deriv, tcot_deriv};

/// Below this `|t|` the mid-range path is parameterized by `u` instead of `theta`.
pub const T_SMALL: f64 = 0.1;

/// `e^{-i pi/4}`, the rotation that maps W onto U with imaginary order.
pub(crate) fn rot() -> Complex64 {
    Complex64::from_polar(1.0, -FRAC_PI_4)
}

/// Which representation produced a value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    Series,
    UPos,
    UNegMid,
    UNegNear1,
    UNegRight,
    UNegLeft,
    WNeg,
    WPosRight,
    WPosMid,
}

impl Regime {
    pub const ALL: [Regime; 9] = [
        Regime::Series,
        Regime::UPos,
        Regime::UNegMid,
        Regime::UNegNear1,
        Regime::UNegRight,
        Regime::UNegLeft,
        Regime::WNeg,
        Regime::WPosRight,
        Regime::WPosMid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Regime::Series => "SERIES",
            Regime::UPos => "U_POS",
            Regime::UNegMid => "U_NEG_MID",
            Regime::UNegNear1 => "U_NEG_NEAR1",
            Regime::UNegRight => "U_NEG_RIGHT",
            Regime::UNegLeft => "U_NEG_LEFT",
            Regime::WNeg => "W_NEG",
            Regime::WPosRight => "W_POS_RIGHT",
            Regime::WPosMid => "W_POS_MID",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Regime {
    type Err = PcfError;

    fn from_str(s: &str) -> Result<Self> {
        Regime::ALL
            .iter()
            .copied()
            .find(|r| r.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| PcfError::domain(format!("unknown regime {s}")))
    }
}

/// `(t sqrt(t^2+1) + asinh t) / 2`; odd, with derivative `sqrt(t^2+1)`.
pub fn xi_tilde(t: f64) -> f64 {
    0.5 * (t * t.mul_add(t, 1.0).sqrt() + t.asinh())
}

/// `(t sqrt(t^2-1) - acosh t) / 2` for `t >= 1`, with derivative `sqrt(t^2-1)`.
pub fn xi(t: f64) -> Result<f64> {
    if !(t >= 1.0) || t.is_infinite() {
        return Err(PcfError::domain(format!("xi needs t >= 1, got {t}")));
    }
    let s = ((t - 1.0) * (t + 1.0)).sqrt();
    Ok(0.5 * right_gap(s))
}

/// `s sqrt(1+s^2) - asinh s`, which behaves like `2 s^3 / 3` near zero.
fn right_gap(s: f64) -> f64 {
    if s < 0.3 {
        let s2 = s * s;
        let mut binom_half = 1.0;
        let mut central = 1.0;
        let mut pow = s;
        let mut sum = 0.0;
        for k in 1..40 {
            let kf = k as f64;
            binom_half *= (1.5 - kf) / kf;
            central *= (2.0 * kf - 1.0) / (2.0 * kf);
            pow *= s2;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let term = (binom_half - sign * central / (2.0 * kf + 1.0)) * pow;
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        s * s.mul_add(s, 1.0).sqrt() - s.asinh()
    }
}

/// `arccos t` without cancellation near `t = ±1`.
pub(crate) fn arccos_stable(t: f64) -> f64 {
    if t > 0.5 {
        2.0 * (0.5 * (1.0 - t)).sqrt().asin()
    } else if t < -0.5 {
        PI - 2.0 * (0.5 * (1.0 + t)).sqrt().asin()
    } else {
        t.acos()
    }
}

/// `(arccos t - t sqrt(1-t^2)) / 2` for `|t| <= 1`.
pub fn eta(t: f64) -> Result<f64> {
    if !(t.abs() <= 1.0) {
        return Err(PcfError::domain(format!("eta needs |t| <= 1, got {t}")));
    }
    Ok(eta_unchecked(t))
}

pub(crate) fn eta_unchecked(t: f64) -> f64 {
    // (2 theta - sin 2 theta) / 4 with theta = arccos t
    let x = 2.0 * arccos_stable(t);
    0.25 * x * x * x * sin_defect(x)
}

/// `arcsin t + t sqrt(1-t^2)`, equal to `pi/2 - 2 eta(t)`.
pub(crate) fn theta0_of(t: f64) -> f64 {
    t.asin() + t * ((1.0 - t) * (1.0 + t)).sqrt()
}

/// Geometry shared by the integrals of one regime at one `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SaddleData {
    pub regime: Regime,
    pub t: f64,
    /// The relevant saddle: `w0` for U with positive order, `w+` otherwise.
    pub saddle: Complex64,
    /// The second saddle where two are relevant.
    pub saddle_minus: Option<Complex64>,
    pub xi_tilde: f64,
    pub xi: Option<f64>,
    pub eta: Option<f64>,
    pub theta0: Option<f64>,
    pub r_minus: Option<f64>,
    pub r_plus: Option<f64>,
}

impl SaddleData {
    /// `2 a eta + pi/4`, where `eta` is defined.
    pub fn lambda(&self, a: f64) -> Option<f64> {
        self.eta.map(|e| 2.0 * a * e + FRAC_PI_4)
    }
}

/// Saddle geometry for `regime` at `t`.
pub fn geometry(regime: Regime, t: f64) -> Result<SaddleData> {
    if !t.is_finite() {
        return Err(PcfError::domain(format!("t must be finite, got {t}")));
    }
    let bad = || Err(PcfError::domain(format!("t = {t} is outside the {regime} regime")));
    let mut out = SaddleData {
        regime,
        t,
        saddle: Complex64::new(0.0, 0.0),
        saddle_minus: None,
        xi_tilde: xi_tilde(t),
        xi: None,
        eta: None,
        theta0: None,
        r_minus: None,
        r_plus: None,
    };
    let right = |out: &mut SaddleData, tt: f64| {
        let s = ((tt - 1.0) * (tt + 1.0)).sqrt();
        let r_plus = tt + s;
        out.xi = Some(0.5 * right_gap(s));
        out.r_plus = Some(r_plus);
        out.r_minus = Some(1.0 / r_plus);
        s
    };
    let mid = |out: &mut SaddleData| {
        out.eta = Some(eta_unchecked(t));
        out.theta0 = Some(theta0_of(t));
    };
    match regime {
        Regime::Series => return bad(),
        Regime::UPos => {
            if t < 0.0 {
                return bad();
            }
            out.saddle = Complex64::new(t + t.hypot(1.0), 0.0);
        }
        Regime::UNegMid | Regime::UNegNear1 => {
            if t.abs() > 1.0 {
                return bad();
            }
            mid(&mut out);
            out.saddle = Complex64::new(((1.0 - t) * (1.0 + t)).sqrt(), t);
        }
        Regime::UNegRight | Regime::UNegLeft => {
            let tt = if regime == Regime::UNegLeft { -t } else { t };
            if tt < 1.0 {
                return bad();
            }
            right(&mut out, tt);
            out.saddle = Complex64::new(0.0, out.r_plus.unwrap());
            out.saddle_minus = Some(Complex64::new(0.0, out.r_minus.unwrap()));
        }
        Regime::WNeg => {
            out.saddle = rot() * (t + t.hypot(1.0));
        }
        Regime::WPosRight => {
            if t < 1.0 {
                return bad();
            }
            let s = right(&mut out, t);
            out.saddle = rot() * (t + s);
        }
        Regime::WPosMid => {
            if t.abs() > 1.0 {
                return bad();
            }
            mid(&mut out);
            let th = arccos_stable(t);
            out.saddle = Complex64::from_polar(1.0, th - FRAC_PI_4);
            out.saddle_minus = Some(Complex64::from_polar(1.0, -th - FRAC_PI_4));
        }
    }
    Ok(out)
}

/// One sampled point of a contour.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContourPoint {
    /// Path parameter: `theta`, `u`, `p`, `q`, `s` or `v` depending on the regime.
    pub param: f64,
    pub u: f64,
    pub v: f64,
    pub r: f64,
    /// `dr/dtheta` on polar paths, `du/dv` on traced paths.
    pub drdtheta: f64,
    /// `|Im phi(w) - target|` for the regime's phase function.
    pub on_path_residual: f64,
}

/// `log w` with the argument taken on the branch nearest `arg_ref`.
pub(crate) fn ln_near(w: Complex64, arg_ref: f64) -> Complex64 {
    let mut arg = w.arg();
    let turns = ((arg_ref - arg) / (2.0 * PI)).round();
    arg += 2.0 * PI * turns;
    Complex64::new(w.norm().ln(), arg)
}

/// Phase function `w^2/2 - 2 t w - ln w` for U with positive order.
pub(crate) fn phi_upos(w: Complex64, t: f64) -> Complex64 {
    0.5 * w * w - 2.0 * t * w - w.ln()
}

/// Phase function `w^2/2 - 2 i t w - ln w` for U with negative order.
pub(crate) fn phi_uneg(w: Complex64, t: f64) -> Complex64 {
    0.5 * w * w - Complex64::new(0.0, 2.0 * t) * w - w.ln()
}

/// Phase function of the rotated integral for W; `order_sign` is the sign of `a`.
pub(crate) fn phi_w(w: Complex64, t: f64, order_sign: f64, arg_ref: f64) -> Complex64 {
    let ln = ln_near(w, arg_ref);
    0.5 * w * w - 2.0 * t * rot() * w - Complex64::new(0.0, order_sign) * ln
}

pub(crate) fn dphi_w(w: Complex64, t: f64, order_sign: f64) -> Complex64 {
    w - 2.0 * t * rot() - Complex64::new(0.0, order_sign) / w
}

fn check_theta(theta: f64, lo: f64, hi: f64, what: &str) -> Result<()> {
    if !(theta >= lo && theta <= hi) {
        return Err(PcfError::domain(format!("{what}: theta = {theta} outside [{lo}, {hi}]")));
    }
    Ok(())
}

/// `r(theta)` and `dr/dtheta` on the U path for positive order.
pub fn r_upos(theta: f64, t: f64) -> Result<(f64, f64)> {
    if !(theta.abs() < FRAC_PI_2) || !(t >= 0.0) || t.is_infinite() {
        return Err(PcfError::domain(format!("r_upos needs |theta| < pi/2 and t >= 0, got ({theta}, {t})")));
    }
    Ok(r_upos_unchecked(theta, t))
}

pub(crate) fn r_upos_unchecked(theta: f64, t: f64) -> (f64, f64) {
    let big_r = (t * t + tcot(theta)).sqrt();
    let (sn, cs) = theta.sin_cos();
    let r = (t + big_r) / cs;
    let dbig_r = tcot_deriv(theta) / (2.0 * big_r);
    let dr = (dbig_r * cs + (t + big_r) * sn) / (cs * cs);
    (r, dr)
}

/// The discriminant factor `Q(delta)` on the mid-range path and its derivative.
fn mid_q(delta: f64, t: f64, c_plus: f64) -> (f64, f64) {
    let s1 = sinc(delta);
    let ds1 = sinc_deriv(delta);
    let s2 = sinc(2.0 * delta);
    let ds2 = 2.0 * sinc_deriv(2.0 * delta);
    let e2 = sin_defect(2.0 * delta);
    let de2 = 2.0 * sin_defect_deriv(2.0 * delta);
    let tc = t * c_plus;
    let bracket = 4.0 * e2 - 2.0 * s1 * s1;
    let dbracket = 4.0 * de2 - 4.0 * s1 * ds1;
    let q = t * t * s1 * s1 + (1.0 - 2.0 * t * t) * s2 + tc * delta * bracket;
    let dq = 2.0 * t * t * s1 * ds1 + (1.0 - 2.0 * t * t) * ds2 + tc * bracket + tc * delta * dbracket;
    (q, dq)
}

/// `r(theta)`, `dr/dtheta` and the root sign on the mid-range U path for negative order.
///
/// `theta = 0` maps to `r = inf`.
pub fn r_uneg_mid(theta: f64, t: f64) -> Result<(f64, f64, f64)> {
    if !(t > 0.0 && t < 1.0) {
        return Err(PcfError::domain(format!("r_uneg_mid needs 0 < t < 1, got {t}")));
    }
    let theta0 = theta0_of(t);
    check_theta(theta, 0.0, theta0, "r_uneg_mid")?;
    Ok(r_uneg_mid_unchecked(theta, t, theta0))
}

pub(crate) fn r_uneg_mid_unchecked(theta: f64, t: f64, theta0: f64) -> (f64, f64, f64) {
    r_uneg_mid_gap(theta, theta0 - theta, t)
}

/// As [`r_uneg_mid`], with `gap = theta0 - theta` supplied exactly by the caller.
pub(crate) fn r_uneg_mid_gap(theta: f64, gap: f64, t: f64) -> (f64, f64, f64) {
    if theta == 0.0 {
        return (f64::INFINITY, f64::NEG_INFINITY, 1.0);
    }
    let c_plus = ((1.0 - t) * (1.0 + t)).sqrt();
    let delta = theta - t.asin();
    let (q, dq) = mid_q(delta, t, c_plus);
    let sq = q.sqrt();
    let dsq = dq / (2.0 * sq);
    let (sn, cs) = theta.sin_cos();
    if delta <= 0.0 {
        let num = t * cs - delta * sq;
        let dnum = -t * sn - sq - delta * dsq;
        let den = sn * cs;
        let dden = (2.0 * theta).cos();
        (num / den, (dnum * den - num * dden) / (den * den), 1.0)
    } else {
        let m = t * cs + delta * sq;
        let dm = -t * sn + sq + delta * dsq;
        (gap / m, (-m - gap * dm) / (m * m), -1.0)
    }
}

/// `r(theta)` and `dr/dtheta` on the U path for negative order right of the turning point.
pub fn r_uneg_right(theta: f64, t: f64) -> Result<(f64, f64)> {
    if !(t >= 1.0) || t.is_infinite() || !(theta > 0.0 && theta <= FRAC_PI_2) {
        return Err(PcfError::domain(format!("r_uneg_right needs 0 < theta <= pi/2 and t >= 1, got ({theta}, {t})")));
    }
    let (r, dr) = r_uneg_right_eps(FRAC_PI_2 - theta, t);
    Ok((r, -dr))
}

/// Same path in `eps = pi/2 - theta`: returns `(r, dr/deps)`.
pub(crate) fn r_uneg_right_eps(eps: f64, t: f64) -> (f64, f64) {
    let s2 = (t - 1.0) * (t + 1.0);
    let m = tcot_defect(eps);
    let big_r = (s2 + eps * eps * m).sqrt();
    let dbig_r = if big_r == 0.0 {
        m.sqrt()
    } else {
        eps * (2.0 * m + eps * tcot_defect_deriv(eps)) / (2.0 * big_r)
    };
    let (sn, cs) = eps.sin_cos();
    let r = (t + big_r) / cs;
    let dr = (dbig_r * cs + (t + big_r) * sn) / (cs * cs);
    (r, dr)
}

/// The approximate mid-range path `v(u)` through `w+` used for small `|t|`.
pub fn approx_path_v_of_u(u: f64, t: f64) -> f64 {
    approx_path(u, t).0
}

/// `(v, dv/du)` on the approximate path.
pub(crate) fn approx_path(u: f64, t: f64) -> (f64, f64) {
    let up = ((1.0 - t) * (1.0 + t)).sqrt();
    let k = t * (1.0 + up);
    let den = u + up * up;
    (k * u / den, k * up * up / (den * den))
}

/// Number of terms kept in the saddle-point series of a traced path.
const REVERSION_TERMS: usize = 24;
/// Fraction of the convergence radius where the series hands over to Newton.
const SERIES_REACH: f64 = 0.25;

/// One branch of the level curve `phi(w) - phi(saddle) = level * s^2`, `s >= 0`.
#[derive(Clone, Debug)]
pub(crate) struct LevelBranch {
    t: f64,
    saddle: Complex64,
    saddle_arg: f64,
    phi_ref: Complex64,
    level: f64,
    coeffs: Vec<Complex64>,
    series_reach: f64,
    grid_s: Vec<f64>,
    grid_w: Vec<Complex64>,
    grid_dw: Vec<Complex64>,
    grid_arg: Vec<f64>,
    pub(crate) s_end: f64,
}

/// Power-series product truncated after `order`.
fn series_mul(p: &[Complex64], q: &[Complex64], order: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); order + 1];
    for (i, pi) in p.iter().enumerate().take(order + 1) {
        if *pi == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (j, qj) in q.iter().enumerate().take(order + 1 - i) {
            out[i + j] += pi * qj;
        }
    }
    out
}

/// Taylor coefficients `phi^(k)(w)/k!` for `k >= 2` of the W phase (positive order).
fn w_phase_taylor(w: Complex64, n: usize) -> Vec<Complex64> {
    let i = Complex64::new(0.0, 1.0);
    let mut a = vec![Complex64::new(0.0, 0.0); n + 1];
    let inv = 1.0 / w;
    let mut pow = inv * inv;
    a[2] = 0.5 + 0.5 * i * pow;
    for (k, slot) in a.iter_mut().enumerate().skip(3) {
        pow *= inv;
        let sign = if (k - 1) % 2 == 0 { 1.0 } else { -1.0 };
        *slot = -i * sign * pow / k as f64;
    }
    a
}

/// Reverts `sum_{k>=2} a_k z^k = level s^2` to `z = sum_j b_j s^j` with given `b_1`.
fn revert(a: &[Complex64], b1: Complex64, n: usize) -> Vec<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let mut b = vec![zero; n + 1];
    b[1] = b1;
    for m in 2..=n {
        let order = m + 1;
        let mut pow = series_mul(&b, &b, order);
        let mut coeff = a[2] * pow[order];
        for ak in a.iter().take(order + 1).skip(3) {
            pow = series_mul(&pow, &b, order);
            coeff += ak * pow[order];
        }
        b[m] = -coeff / (2.0 * a[2] * b1);
    }
    b
}

impl LevelBranch {
    /// Builds the branch leaving `saddle` along `direction` (the sign choice of `b_1`).
    ///
    /// `radius` is the distance in `s` to the nearest other saddle.
    pub(crate) fn new(
        t: f64,
        saddle: Complex64,
        saddle_arg: f64,
        level: f64,
        pick: impl Fn(Complex64) -> bool,
        radius: f64,
        s_end: f64,
    ) -> Result<Self> {
        let a = w_phase_taylor(saddle, REVERSION_TERMS + 1);
        let root = (Complex64::new(level, 0.0) / a[2]).sqrt();
        let b1 = if pick(root) { root } else { -root };
        let coeffs = revert(&a, b1, REVERSION_TERMS);
        let phi_ref = phi_w(saddle, t, 1.0, saddle_arg);
        let mut branch = LevelBranch {
            t,
            saddle,
            saddle_arg,
            phi_ref,
            level,
            coeffs,
            series_reach: SERIES_REACH * radius,
            grid_s: Vec::new(),
            grid_w: Vec::new(),
            grid_dw: Vec::new(),
            grid_arg: Vec::new(),
            s_end,
        };
        branch.trace()?;
        Ok(branch)
    }

    fn series(&self, s: f64) -> (Complex64, Complex64) {
        let mut z = Complex64::new(0.0, 0.0);
        let mut dz = Complex64::new(0.0, 0.0);
        for (j, b) in self.coeffs.iter().enumerate().skip(1).rev() {
            z = z * s + b;
            dz = dz * s + b * j as f64;
        }
        (self.saddle + z * s, dz)
    }

    fn dw(&self, w: Complex64, s: f64) -> Complex64 {
        2.0 * self.level * s / dphi_w(w, self.t, 1.0)
    }

    /// Newton polish of `w` so that `phi(w) - phi_ref = level s^2`.
    fn polish(&self, mut w: Complex64, s: f64, mut arg_ref: f64) -> Result<(Complex64, f64)> {
        let target = self.phi_ref + self.level * s * s;
        let scale = 1.0 + target.norm();
        for _ in 0..30 {
            let f = phi_w(w, self.t, 1.0, arg_ref) - target;
            let step = f / dphi_w(w, self.t, 1.0);
            w -= step;
            arg_ref = ln_near(w, arg_ref).im;
            if step.norm() <= 4.0 * f64::EPSILON * w.norm() {
                let res = (phi_w(w, self.t, 1.0, arg_ref) - target).norm();
                if res <= 1e-11 * scale {
                    return Ok((w, arg_ref));
                }
                return Err(PcfError::Trace { worst_residual: res });
            }
        }
        let res = (phi_w(w, self.t, 1.0, arg_ref) - target).norm();
        if res <= 1e-11 * scale {
            return Ok((w, arg_ref));
        }
        Err(PcfError::Trace { worst_residual: res })
    }

    fn trace(&mut self) -> Result<()> {
        let s0 = self.series_reach.min(self.s_end);
        let (w, dw) = self.series(s0);
        let mut arg = ln_near(w, self.saddle_arg).im;
        self.grid_s.push(s0);
        self.grid_w.push(w);
        self.grid_dw.push(dw);
        self.grid_arg.push(arg);
        let mut s = s0;
        let scale = self.series_reach / SERIES_REACH;
        while s < self.s_end {
            let step = (0.08 * s.max(scale)).min(0.05).max(1e-6 * scale);
            let next = (s + step).min(self.s_end);
            let k = self.grid_s.len() - 1;
            let h = next - s;
            let guess = self.grid_w[k] + self.grid_dw[k] * h;
            let (w, new_arg) = self.polish(guess, next, arg)?;
            arg = new_arg;
            let dw = self.dw(w, next);
            self.grid_s.push(next);
            self.grid_w.push(w);
            self.grid_dw.push(dw);
            self.grid_arg.push(arg);
            s = next;
        }
        Ok(())
    }

    /// `(w, dw/ds, arg w)` at `s in [0, s_end]`.
    pub(crate) fn eval(&self, s: f64) -> Result<(Complex64, Complex64, f64)> {
        if s <= self.series_reach || self.grid_s.len() < 2 {
            let (w, dw) = self.series(s);
            return Ok((w, dw, ln_near(w, self.saddle_arg).im));
        }
        let k = match self.grid_s.binary_search_by(|g| g.partial_cmp(&s).unwrap()) {
            Ok(k) => return Ok((self.grid_w[k], self.grid_dw[k], self.grid_arg[k])),
            Err(k) => k.min(self.grid_s.len() - 1).max(1) - 1,
        };
        let (s0, s1) = (self.grid_s[k], self.grid_s[k + 1]);
        let h = s1 - s0;
        let x = ((s - s0) / h).clamp(0.0, 1.0);
        // cubic Hermite predictor
        let (w0, w1) = (self.grid_w[k], self.grid_w[k + 1]);
        let (d0, d1) = (self.grid_dw[k] * h, self.grid_dw[k + 1] * h);
        let x2 = x * x;
        let x3 = x2 * x;
        let guess = w0 * (2.0 * x3 - 3.0 * x2 + 1.0) + d0 * (x3 - 2.0 * x2 + x) + w1 * (3.0 * x2 - 2.0 * x3) + d1 * (x3 - x2);
        let arg_guess = self.grid_arg[k] + x * (self.grid_arg[k + 1] - self.grid_arg[k]);
        let (w, arg) = self.polish(guess, s, arg_guess)?;
        Ok((w, self.dw(w, s), arg))
    }
}

/// The four traced pieces of the two-saddle path for W with positive order.
///
/// The oriented path runs from the lower valley into `w-`, along the arc to
/// `w+` and out into the upper valley. Each piece is parameterized from its
/// saddle: `upper` and `arc_hi` descend from `w+`, `arc_lo` ascends and
/// `lower` descends from `w-`. The two arc pieces meet at level `2 eta`.
#[derive(Clone, Debug)]
pub(crate) struct TwoSaddlePath {
    pub(crate) eta: f64,
    pub(crate) upper: LevelBranch,
    pub(crate) arc_hi: LevelBranch,
    pub(crate) arc_lo: Option<LevelBranch>,
    pub(crate) lower: Option<LevelBranch>,
}

impl TwoSaddlePath {
    /// Traces the path at `t`; `s_max` bounds the valley legs and `with_lower`
    /// controls whether the pieces around `w-` are built.
    pub(crate) fn new(t: f64, s_max: f64, with_lower: bool) -> Result<Self> {
        if !(t.abs() < 1.0) {
            return Err(PcfError::domain(format!("two-saddle path needs |t| < 1, got {t}")));
        }
        let eta = eta_unchecked(t);
        let th = arccos_stable(t);
        let arg_p = th - FRAC_PI_4;
        let arg_m = -th - FRAC_PI_4;
        let wp = Complex64::from_polar(1.0, arg_p);
        let wm = Complex64::from_polar(1.0, arg_m);
        // critical values on neighbouring sheets of the logarithm sit 2 pi apart
        let radius = (4.0 * eta).min((2.0 * PI - 4.0 * eta).abs()).min(2.0 * PI).sqrt();
        let s_mid = (2.0 * eta).sqrt();
        let toward_m = wm - wp;
        let upper = LevelBranch::new(t, wp, arg_p, -1.0, |b| (b * toward_m.conj()).re < 0.0, radius, s_max)?;
        let arc_hi = LevelBranch::new(t, wp, arg_p, -1.0, |b| (b * toward_m.conj()).re > 0.0, radius, s_mid)?;
        let (arc_lo, lower) = if with_lower {
            let arc_lo = LevelBranch::new(t, wm, arg_m, 1.0, |b| (b * toward_m.conj()).re < 0.0, radius, s_mid)?;
            let lower = LevelBranch::new(t, wm, arg_m, -1.0, |b| b.im < 0.0, radius, s_max)?;
            let (a_end, ..) = arc_hi.eval(s_mid)?;
            let (b_end, ..) = arc_lo.eval(s_mid)?;
            let gap = (a_end - b_end).norm();
            if gap > 1e-9 * (1.0 + a_end.norm()) {
                return Err(PcfError::Trace { worst_residual: gap });
            }
            (Some(arc_lo), Some(lower))
        } else {
            (None, None)
        };
        Ok(TwoSaddlePath {
            eta,
            upper,
            arc_hi,
            arc_lo,
            lower,
        })
    }
}

/// Traced two-saddle path for W with positive order, ordered from the lower
/// valley to the upper valley, with `param = v`.
///
/// For `t >= 0` the path must be monotone in `v`; a violation is a trace error.
pub fn trace_wpm_path(t: f64, samples: usize) -> Result<Vec<ContourPoint>> {
    if samples < 16 {
        return Err(PcfError::domain(format!("trace needs at least 16 samples, got {samples}")));
    }
    if !(t.abs() < 1.0) {
        return Err(PcfError::domain(format!("trace needs |t| < 1, got {t}")));
    }
    // valley legs end where exp(-s^2) falls below eps^2
    let s_max = (-2.0 * f64::EPSILON.ln()).sqrt();
    let path = TwoSaddlePath::new(t, s_max, true)?;
    let per = samples / 4;
    let s_mid = (2.0 * path.eta).sqrt();
    let target = 0.5 + t * t;
    let mut pts: Vec<(f64, Complex64, Complex64, f64)> = Vec::with_capacity(4 * per + 2);
    let sample = |branch: &LevelBranch, s: f64, sign: f64, pts: &mut Vec<_>| -> Result<()> {
        let (w, dw, arg) = branch.eval(s)?;
        pts.push((sign * s, w, dw, arg));
        Ok(())
    };
    let lower = path.lower.as_ref().unwrap();
    let arc_lo = path.arc_lo.as_ref().unwrap();
    for k in (0..per).rev() {
        let s = s_max * (k as f64 + 1.0) / per as f64;
        sample(lower, s, -1.0, &mut pts)?;
    }
    for k in 0..per {
        let s = s_mid * k as f64 / per as f64;
        sample(arc_lo, s, 1.0, &mut pts)?;
    }
    for k in (0..per).rev() {
        let s = s_mid * (k as f64 + 1.0) / per as f64;
        sample(&path.arc_hi, s, -1.0, &mut pts)?;
    }
    for k in 0..=per {
        let s = s_max * k as f64 / per as f64;
        sample(&path.upper, s, 1.0, &mut pts)?;
    }
    let mut out = Vec::with_capacity(pts.len());
    let mut worst: f64 = 0.0;
    for (_, w, dw, arg) in &pts {
        let phi = phi_w(*w, t, 1.0, *arg);
        let res = (phi.im - target).abs();
        worst = worst.max(res / (1.0 + phi.norm()));
        out.push(ContourPoint {
            param: w.im,
            u: w.re,
            v: w.im,
            r: w.norm(),
            drdtheta: if dw.im == 0.0 { 0.0 } else { dw.re / dw.im },
            on_path_residual: res,
        });
    }
    if worst > 1e-10 {
        return Err(PcfError::Trace { worst_residual: worst });
    }
    if t >= 0.0 {
        for pair in out.windows(2) {
            if pair[1].v <= pair[0].v {
                let gap = pair[0].v - pair[1].v;
                return Err(PcfError::Trace { worst_residual: gap });
            }
        }
    }
    Ok(out)
}

fn polar_point(param: f64, r: f64, theta: f64, dr: f64, res: f64) -> ContourPoint {
    ContourPoint {
        param,
        u: r * theta.cos(),
        v: r * theta.sin(),
        r,
        drdtheta: dr,
        on_path_residual: res,
    }
}

fn line_point(param: f64, w: Complex64, slope: f64, res: f64) -> ContourPoint {
    ContourPoint {
        param,
        u: w.re,
        v: w.im,
        r: w.norm(),
        drdtheta: slope,
        on_path_residual: res,
    }
}

/// Samples the contour used by `regime` at `t`, for inspection and plotting.
pub fn sample_contour(regime: Regime, t: f64, samples: usize) -> Result<Vec<ContourPoint>> {
    if samples < 2 {
        return Err(PcfError::domain("at least two samples are needed"));
    }
    let geo = geometry(regime, t)?;
    let n = samples as f64;
    let mid = |k: usize| (k as f64 + 0.5) / n;
    let mut out = Vec::with_capacity(samples);
    match regime {
        Regime::UPos => {
            for k in 0..samples {
                let theta = -FRAC_PI_2 + PI * mid(k);
                let (r, dr) = r_upos_unchecked(theta, t);
                let w = Complex64::from_polar(r, theta);
                let res = phi_upos(w, t).im.abs();
                out.push(polar_point(theta, r, theta, dr, res));
            }
        }
        Regime::UNegMid if t.abs() >= T_SMALL => {
            let tt = t.abs();
            let theta0 = theta0_of(tt);
            let flip = if t < 0.0 { -1.0 } else { 1.0 };
            for k in 0..samples {
                let theta = theta0 * mid(k);
                let (r, dr, _) = r_uneg_mid_unchecked(theta, tt, theta0);
                let w = Complex64::from_polar(r, theta);
                let res = (phi_uneg(w, tt).im + theta0).abs();
                out.push(polar_point(flip * theta, r, flip * theta, flip * dr, res));
            }
        }
        Regime::UNegMid => {
            // u-parameterized approximation; not a level curve, so the residual is informative only
            let up = geo.saddle.re;
            let target = phi_uneg(geo.saddle, t).im;
            for k in 0..samples {
                let u = 4.0 * up * mid(k);
                let (v, dv) = approx_path(u, t);
                let w = Complex64::new(u, v);
                let res = (phi_uneg(w, t).im - target).abs();
                out.push(line_point(u, w, if dv == 0.0 { f64::INFINITY } else { 1.0 / dv }, res));
            }
        }
        Regime::UNegNear1 => {
            let wp = geo.saddle;
            let target = phi_uneg(wp, t).im;
            let half = samples / 2;
            for k in 0..half {
                let p = 1.0 - (k as f64 + 0.5) / half as f64;
                let w = wp * (1.0 - p);
                out.push(line_point(p, w, wp.re / wp.im, (phi_uneg(w, t).im - target).abs()));
            }
            for k in 0..samples - half {
                let u = 4.0 * (k as f64 + 0.5) / (samples - half) as f64;
                let w = wp + u;
                out.push(line_point(u, w, f64::INFINITY, (phi_uneg(w, t).im - target).abs()));
            }
        }
        Regime::UNegRight | Regime::UNegLeft => {
            let tt = t.abs();
            for k in 0..samples {
                let theta = FRAC_PI_2 * (k as f64 + 1.0) / n;
                let eps = FRAC_PI_2 - theta;
                let (r, dr) = r_uneg_right_eps(eps, tt);
                // Im phi + pi/2 = r cos(theta) (r sin(theta) - 2t) + eps, factored to avoid cancellation
                let (se, ce) = eps.sin_cos();
                let res = (r * se * r.mul_add(ce, -2.0 * tt) + eps).abs();
                out.push(polar_point(theta, r, theta, -dr, res));
            }
        }
        Regime::WNeg | Regime::WPosRight => {
            let sign = if regime == Regime::WNeg { -1.0 } else { 1.0 };
            let wp = geo.saddle;
            let arg = wp.arg();
            let target = phi_w(wp, t, sign, arg).im;
            for k in 0..samples {
                let q = 6.0 * (2.0 * mid(k) - 1.0);
                let w = wp + Complex64::new(0.0, q);
                let res = (phi_w(w, t, sign, arg).im - target).abs();
                out.push(line_point(q, w, 0.0, res));
            }
        }
        Regime::WPosMid => return trace_wpm_path(t, samples),
        Regime::Series => unreachable!("geometry rejects the series tag"),
    }
    Ok(out)
}
