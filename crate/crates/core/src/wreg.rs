//! `W(a, x)`, `W(a, -x)` and their derivatives for `|a| >= A_MIN_QUAD`.
//!
//! Every route produces one complex integral `Z` (and `Zd` for the
//! derivative) whose real and imaginary parts give the values at `x` and
//! `-x`. Positive-order routes measure the phase from the dominant saddle
//! `w+`, so the `-x` pair loses about `4 a eta / ln 10` digits on `|t| < 1`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, LN_10, PI};

use num_complex::Complex64;

use crate::api::Config;
use crate::contours::{arccos_stable, eta_unchecked, rot, xi, xi_tilde, LevelBranch, Regime, TwoSaddlePath};
use crate::error::Result;
use crate::quadrature::{Interval, QuadOutcome};
use crate::scalar::{ln_k_of_a, rho_star};
use crate::scaled::ScaledReal;
use crate::ureg::{assembled_residual, check_order, quad, saddle_excess, scaled, t_of, QuadDiag, EXP_FLOOR};

/// Abscissa of the vertical line used left of `t = -1/sqrt 2`.
const REFLECT_LINE: f64 = 0.05;

/// Width of the band right of `t = -1/sqrt 2` that also takes the left route;
/// the line through `w+` converges poorly there.
const DIAGONAL_BAND: f64 = 5e-3;

/// Where `exp(-a s^2)` stops mattering on the valley legs.
const VALLEY_EXPONENT: f64 = 60.0;

/// Lower pieces of the traced path are dropped once their weight `e^(-2 a eta)`
/// is below this exponent.
const LOWER_CUTOFF: f64 = 40.0;

/// `W`, `W'` at `x` and `-x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WResult {
    pub w_plus: ScaledReal,
    pub wp_plus: ScaledReal,
    pub w_minus: ScaledReal,
    pub wp_minus: ScaledReal,
    pub regime: Regime,
    /// Phase of the prefactor multiplying the integral for the value.
    pub chi: f64,
    /// Decimal digits lost by the `-x` pair.
    pub accuracy_loss_digits: f64,
    /// Decimal digits lost by the `+x` pair; zero except on reflected routes.
    pub plus_loss_digits: f64,
    /// Relative residual of `-W(x) W'(-x) - W'(x) W(-x) = 1`.
    pub wronskian_residual: f64,
    pub quadrature: QuadDiag,
}

impl WResult {
    /// Exchanges the roles of `x` and `-x`.
    pub fn mirrored(self) -> WResult {
        WResult {
            w_plus: self.w_minus,
            wp_plus: self.wp_minus,
            w_minus: self.w_plus,
            wp_minus: self.wp_plus,
            accuracy_loss_digits: self.plus_loss_digits,
            plus_loss_digits: self.accuracy_loss_digits,
            ..self
        }
    }
}

/// `Z = e^(ln_mag + i phase) * integral`, and likewise for the derivative.
struct Assembly {
    ln_mag: f64,
    phase: f64,
    integral: Complex64,
    ln_mag_d: f64,
    phase_d: f64,
    integral_d: Complex64,
    ln_k: f64,
}

impl Assembly {
    fn finish(&self, regime: Regime, minus_loss: f64, quadrature: QuadDiag) -> WResult {
        let z = Complex64::from_polar(1.0, self.phase) * self.integral;
        let zd = Complex64::from_polar(1.0, self.phase_d) * self.integral_d;
        let half_k = 0.5 * self.ln_k;
        let w_plus = scaled(self.ln_mag + half_k, z.re);
        let wp_plus = scaled(self.ln_mag_d + half_k, zd.re);
        let w_minus = scaled(self.ln_mag - half_k, z.im);
        let wp_minus = scaled(self.ln_mag_d - half_k, -zd.im);
        let residual = assembled_residual(w_plus, wp_plus, -w_minus, wp_minus, -1.0);
        WResult {
            w_plus,
            wp_plus,
            w_minus,
            wp_minus,
            regime,
            chi: self.phase,
            accuracy_loss_digits: minus_loss.max(0.0),
            plus_loss_digits: 0.0,
            wronskian_residual: residual,
            quadrature,
        }
    }
}

fn pack(f: Complex64, fd: Complex64) -> [f64; 4] {
    [f.re, f.im, fd.re, fd.im]
}

fn diag_of(o: &QuadOutcome<4>) -> QuadDiag {
    QuadDiag::of(o)
}

/// `int e^(a Delta(q)) g(q) dq` and the derivative kernel along the vertical
/// line through `saddle`, where `Delta = z^2/2 - c L(z/saddle)`, `z = iq`
/// and `g = (1 + z/saddle)^(-1/2)`.
fn saddle_line<K>(
    a: f64,
    saddle: Complex64,
    c: Complex64,
    curvature: f64,
    kernel: K,
    cfg: &Config,
) -> Result<(Complex64, Complex64, QuadDiag)>
where
    K: Fn(Complex64) -> Complex64,
{
    let f = |q: f64| {
        let z = Complex64::new(0.0, q);
        let ex = a * saddle_excess(z, saddle, c);
        if ex.re < EXP_FLOOR {
            return [0.0; 4];
        }
        let g = ex.exp() / (Complex64::new(1.0, 0.0) + z / saddle).sqrt();
        pack(g, g * kernel(z))
    };
    let scale = width(a, curvature);
    let up = quad(f, Interval::half_line(0.0, scale), cfg)?;
    let down = quad(f, Interval::half_line_down(0.0, scale), cfg)?;
    let o = up.combine(down);
    Ok((o.complex(0), o.complex(1), diag_of(&o)))
}

/// Width of the peak for second derivative `a * curvature`, widened where the
/// quadratic term degenerates.
fn width(a: f64, curvature: f64) -> f64 {
    let cubic = a.powf(-1.0 / 3.0);
    if curvature > 0.0 {
        (1.0 / (a * curvature)).sqrt().min(cubic)
    } else {
        cubic
    }
}

/// `phi(w+) - phi(w+ + iq)` on the vertical line of the negative-order
/// integral, `phi(w) = w^2/2 - 2 t e^(-i pi/4) w + i ln w`.
pub fn neg_line_phase(t: f64, q: f64) -> Complex64 {
    let saddle = rot() * (t + t.mul_add(t, 1.0).sqrt());
    -saddle_excess(Complex64::new(0.0, q), saddle, Complex64::new(0.0, -1.0))
}

/// `W(-a, x)`, `W(-a, -x)` and derivatives.
///
/// The line integral runs through `w+ = e^(-i pi/4) (t + sqrt(t^2+1))` for
/// `x >= 0`; negative `x` uses the integral at `|x|` with the roles exchanged.
pub fn w_neg(a: f64, x: f64, cfg: &Config) -> Result<WResult> {
    check_order(a, x, cfg)?;
    if x < 0.0 {
        return Ok(w_neg(a, -x, cfg)?.mirrored());
    }
    let t = t_of(a, x);
    let root = t.mul_add(t, 1.0).sqrt();
    let big_r = t + root;
    let saddle = rot() * big_r;
    let c = Complex64::new(0.0, -1.0);
    let curvature = 1.0 + 1.0 / (big_r * big_r);
    let e = rot();
    let (int, int_d, diag) = saddle_line(a, saddle, c, curvature, |z| root - e * z / Complex64::i(), cfg)?;
    let chi = rho_star(-a) + FRAC_PI_4 + 2.0 * a * xi_tilde(t);
    let ln_mag = 0.25 * a.ln() - 0.5 * (PI * big_r).ln();
    let asm = Assembly {
        ln_mag,
        phase: chi,
        integral: int,
        ln_mag_d: ln_mag + 0.5 * a.ln(),
        phase_d: chi + FRAC_PI_2,
        integral_d: int_d,
        ln_k: ln_k_of_a(-a),
    };
    Ok(asm.finish(Regime::WNeg, 0.0, diag))
}

/// `W(a, x)`, `W(a, -x)` and derivatives for `a > 0` and `|t| >= 1`.
///
/// Uses the vertical line through `w+ = e^(-i pi/4) (t + sqrt(t^2-1))` at `|t|`.
pub fn w_pos_right(a: f64, x: f64, cfg: &Config) -> Result<WResult> {
    check_order(a, x, cfg)?;
    if x < 0.0 {
        return Ok(w_pos_right(a, -x, cfg)?.mirrored());
    }
    let t = t_of(a, x);
    let half_gap = xi(t)?;
    let s = ((t - 1.0) * (t + 1.0)).sqrt();
    let big_r = t + s;
    let saddle = rot() * big_r;
    let c = Complex64::i();
    let curvature = 2.0 * s / big_r;
    let e = rot();
    let (int, int_d, diag) = saddle_line(a, saddle, c, curvature, |z| e * s + z, cfg)?;
    let phase = rho_star(a) + 2.0 * a * half_gap;
    let ln_mag = 0.25 * a.ln() - 0.5 * (PI * big_r).ln();
    let asm = Assembly {
        ln_mag,
        phase: phase + FRAC_PI_4,
        integral: int,
        ln_mag_d: ln_mag + 0.5 * a.ln(),
        phase_d: phase + PI,
        integral_d: int_d,
        ln_k: ln_k_of_a(a),
    };
    Ok(asm.finish(Regime::WPosRight, 0.0, diag))
}

/// Assembly shared by every route for `|t| < 1` with `a > 0`: `K` and `Kd`
/// are `(1/i) int e^(a (phi - phi(w+))) w^(-1/2) dw` and the same with the
/// factor `t e^(-i pi/4) - w`.
fn mid_assembly(a: f64, t: f64, k: Complex64, kd: Complex64) -> Assembly {
    let ln_mag = 0.25 * a.ln() - 0.5 * PI.ln() + 2.0 * a * eta_unchecked(t);
    let rs = rho_star(a);
    Assembly {
        ln_mag,
        phase: rs + FRAC_PI_8,
        integral: k,
        ln_mag_d: ln_mag + 0.5 * a.ln(),
        phase_d: rs - FRAC_PI_8,
        integral_d: kd,
        ln_k: ln_k_of_a(a),
    }
}

fn mid_loss(a: f64, t: f64) -> f64 {
    4.0 * a * eta_unchecked(t) / LN_10
}

/// `w+` on the unit circle for `|t| <= 1`, with its principal argument.
fn unit_saddle(t: f64) -> (Complex64, f64) {
    let arg = arccos_stable(t) - FRAC_PI_4;
    (Complex64::from_polar(1.0, arg), arg)
}

/// Integrates one traced piece with weight `exp(offset + level * a * s^2)`.
fn piece(
    a: f64,
    t: f64,
    branch: &LevelBranch,
    level: f64,
    offset: f64,
    s_end: f64,
    cfg: &Config,
) -> Result<QuadOutcome<4>> {
    let e = rot();
    let mut failure = None;
    let f = |s: f64| {
        let ex = offset + level * a * s * s;
        if ex < EXP_FLOOR {
            return [0.0; 4];
        }
        match branch.eval(s) {
            Ok((w, dw, arg)) => {
                let root = Complex64::from_polar(w.norm().sqrt(), 0.5 * arg);
                let g = ex.exp() * dw / root;
                pack(g, g * (t * e - w))
            }
            Err(err) => {
                failure.get_or_insert(err);
                [0.0; 4]
            }
        }
    };
    let out = quad(f, Interval::finite(0.0, s_end), cfg);
    if let Some(err) = failure {
        return Err(err);
    }
    out
}

/// `K`, `Kd` over the traced two-saddle path for `0 <= t < 1`.
fn traced_integrals(a: f64, t: f64, cfg: &Config) -> Result<(Complex64, Complex64, QuadDiag)> {
    let eta = eta_unchecked(t);
    let s_max = (VALLEY_EXPONENT / a).sqrt();
    let with_lower = 2.0 * a * eta <= LOWER_CUTOFF;
    let path = TwoSaddlePath::new(t, s_max, with_lower)?;
    let s_mid = (2.0 * eta).sqrt();
    let mut total = piece(a, t, &path.upper, -1.0, 0.0, s_max, cfg)?;
    let arc_hi = piece(a, t, &path.arc_hi, -1.0, 0.0, s_mid, cfg)?;
    total = total.combine_scaled(arc_hi, -1.0);
    if let (Some(arc_lo), Some(lower)) = (&path.arc_lo, &path.lower) {
        let shift = -4.0 * a * eta;
        let lo = piece(a, t, arc_lo, 1.0, shift, s_mid, cfg)?;
        let down = piece(a, t, lower, -1.0, shift, s_max, cfg)?;
        total = total.combine(lo).combine_scaled(down, -1.0);
    }
    let minus_i = Complex64::new(0.0, -1.0);
    Ok((minus_i * total.complex(0), minus_i * total.complex(1), diag_of(&total)))
}

/// `phi(w) - phi(saddle)` for the positive-order phase on the principal sheet.
fn direct_excess(w: Complex64, t: f64, saddle: Complex64, saddle_arg: f64) -> Complex64 {
    let z = w - saddle;
    0.5 * z * (w + saddle) - 2.0 * t * rot() * z - Complex64::i() * (w.ln() - Complex64::new(0.0, saddle_arg))
}

/// Peak of `Re(phi)` along the vertical line `Re w = u0`.
fn line_peak(t: f64, u0: f64, saddle: Complex64, saddle_arg: f64) -> (f64, f64) {
    let excess = |v: f64| direct_excess(Complex64::new(u0, v), t, saddle, saddle_arg).re;
    let n = 1600;
    let (lo, hi) = (-8.0, 8.0);
    let step = (hi - lo) / n as f64;
    let mut best = (lo, excess(lo));
    for i in 1..=n {
        let v = lo + step * i as f64;
        let e = excess(v);
        if e > best.1 {
            best = (v, e);
        }
    }
    // Newton on d/dv Re(phi) = -Im(phi'), whose derivative is -Re(phi'')
    let mut v = best.0;
    for _ in 0..8 {
        let w = Complex64::new(u0, v);
        let d1 = -(w - 2.0 * t * rot() - Complex64::i() / w).im;
        let d2 = -(Complex64::new(1.0, 0.0) + Complex64::i() / (w * w)).re;
        if d2 >= 0.0 {
            break;
        }
        let next = v - d1 / d2;
        if (next - best.0).abs() > step {
            break;
        }
        v = next;
    }
    let e = excess(v);
    if e > best.1 {
        (v, e)
    } else {
        best
    }
}

/// `K`, `Kd` along `Re w = u0`, returning the largest excess of `a Re(phi)`
/// over its value at `w+`.
fn line_integrals(a: f64, t: f64, u0: f64, cfg: &Config) -> Result<(Complex64, Complex64, QuadDiag, f64)> {
    let (saddle, saddle_arg) = unit_saddle(t);
    let through = (u0 - saddle.re).abs() <= 1e-15;
    let (center, peak) = if through {
        (saddle.im, 0.0)
    } else {
        line_peak(t, u0, saddle, saddle_arg)
    };
    let e = rot();
    let f = |v: f64| {
        let w = Complex64::new(u0, v);
        let ex = if through {
            a * saddle_excess(w - saddle, saddle, Complex64::i())
        } else {
            a * direct_excess(w, t, saddle, saddle_arg)
        };
        if ex.re < EXP_FLOOR {
            return [0.0; 4];
        }
        let g = ex.exp() / w.sqrt();
        pack(g, g * (t * e - w))
    };
    let wc = Complex64::new(u0, center);
    let curvature = (Complex64::new(1.0, 0.0) + Complex64::i() / (wc * wc)).re;
    let scale = width(a, curvature);
    let mut cuts = vec![center];
    if !through && center.abs() > 1e-3 {
        cuts.push(0.0);
        cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    }
    let first = *cuts.first().unwrap();
    let last = *cuts.last().unwrap();
    let mut total = quad(f, Interval::half_line_down(first, scale), cfg)?;
    if cuts.len() == 2 {
        total = total.combine(quad(f, Interval::finite(first, last), cfg)?);
    }
    total = total.combine(quad(f, Interval::half_line(last, scale), cfg)?);
    Ok((total.complex(0), total.complex(1), diag_of(&total), a * peak.max(0.0)))
}

/// `W(a, x)`, `W(a, -x)` and derivatives for `a > 0` and `|t| < 1`.
///
/// `0 <= t <= 1 - collar` integrates over the traced two-saddle path; the
/// collar below `t = 1` and `-1/sqrt 2 < t < 0` use the vertical line
/// through `w+`. Further left, the value at `x` comes from whichever of the
/// line `Re w = 0.05` or the `-x` output at `|t|` loses fewer digits.
pub fn w_pos_mid(a: f64, x: f64, cfg: &Config) -> Result<WResult> {
    check_order(a, x, cfg)?;
    let t = t_of(a, x);
    if !(t.abs() < 1.0) {
        return Err(crate::error::PcfError::domain(format!("w_pos_mid needs |t| < 1, got {t}")));
    }
    if t >= 0.0 {
        let (k, kd, diag) = if t <= 1.0 - cfg.collar {
            traced_integrals(a, t, cfg)?
        } else {
            let (k, kd, diag, _) = line_integrals(a, t, unit_saddle(t).0.re, cfg)?;
            (k, kd, diag)
        };
        return Ok(mid_assembly(a, t, k, kd).finish(Regime::WPosMid, mid_loss(a, t), diag));
    }
    if t > -FRAC_1_SQRT_2 + DIAGONAL_BAND {
        let (k, kd, diag, _) = line_integrals(a, t, unit_saddle(t).0.re, cfg)?;
        return Ok(mid_assembly(a, t, k, kd).finish(Regime::WPosMid, mid_loss(a, t), diag));
    }
    let (saddle, saddle_arg) = unit_saddle(t);
    let reflect_loss = a * line_peak(t, REFLECT_LINE, saddle, saddle_arg).1.max(0.0) / LN_10;
    let mirror_loss = mid_loss(a, -t);
    if mirror_loss <= reflect_loss {
        return Ok(w_pos_mid(a, -x, cfg)?.mirrored());
    }
    let (k, kd, diag, peak) = line_integrals(a, t, REFLECT_LINE, cfg)?;
    let mut out = mid_assembly(a, t, k, kd).finish(Regime::WPosMid, mid_loss(a, t), diag);
    out.plus_loss_digits = peak / LN_10;
    Ok(out)
}

/// `W(a, x)`, `W(a, -x)` and derivatives for any `|a| >= A_MIN_QUAD`.
pub fn w_quadrature(a: f64, x: f64, cfg: &Config) -> Result<WResult> {
    if a < 0.0 {
        return w_neg(-a, x, cfg);
    }
    check_order(a, x, cfg)?;
    if t_of(a, x).abs() >= 1.0 {
        w_pos_right(a, x, cfg)
    } else {
        w_pos_mid(a, x, cfg)
    }
}
