//! `U(a, x)`, `V(a, x)` and their derivatives for `|a| >= A_MIN_QUAD` from
//! steepest-descent integrals.
//!
//! Every function here takes the order magnitude `a > 0`; the `uv_neg_*`
//! family returns values for order `-a`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::api::Config;
use crate::contours::{
    eta_unchecked, r_uneg_mid_gap, r_uneg_right_eps, theta0_of, xi_tilde, Regime,
};
use crate::error::{PcfError, Result};
use crate::quadrature::{integrate_checked, Interval, QuadOutcome};
use crate::scalar::{
    ln1p_minus_complex, ln1p_minus_unchecked, ln_gamma_aux, ln_gamma_star, sin_cos_pi, tcot, tcot_defect,
    HALF_LN_2PI, LN_SQRT_2_OVER_PI,
};
use crate::scaled::ScaledReal;

/// Below this exponent the integrand is zero in double precision.
pub(crate) const EXP_FLOOR: f64 = -745.0;

/// Cost and reliability of the integrals behind one result.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QuadDiag {
    pub evaluations: usize,
    /// Largest relative error estimate among the integrals.
    pub err_estimate: f64,
    pub converged: bool,
}

impl QuadDiag {
    pub(crate) fn of<const N: usize>(o: &QuadOutcome<N>) -> Self {
        QuadDiag {
            evaluations: o.evaluations,
            err_estimate: o.rel_error(),
            converged: o.converged,
        }
    }

    pub(crate) fn merge(self, other: QuadDiag) -> QuadDiag {
        QuadDiag {
            evaluations: self.evaluations + other.evaluations,
            err_estimate: self.err_estimate.max(other.err_estimate),
            converged: self.converged && other.converged,
        }
    }
}

/// `U`, `V` and derivatives at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UVResult {
    pub u: ScaledReal,
    pub du: ScaledReal,
    pub v: ScaledReal,
    pub dv: ScaledReal,
    pub regime: Regime,
    /// Relative residual of the Wronskian identities checked for this result.
    pub wronskian_residual: f64,
    pub quadrature: QuadDiag,
    /// Relative gap to the series when a cross-check was run.
    pub oracle_gap: Option<f64>,
}

/// Results at `x` and `-x` sharing the same integrals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UvPair {
    pub at_x: UVResult,
    pub at_minus_x: UVResult,
}

/// The six integrals of the region right of the turning point, reused left of it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RightIntegrals {
    pub g: [f64; 3],
    pub h: [f64; 3],
    pub xi: f64,
    pub quadrature: QuadDiag,
}

pub(crate) fn check_order(a: f64, x: f64, cfg: &Config) -> Result<()> {
    if !a.is_finite() || !x.is_finite() {
        return Err(PcfError::domain(format!("non-finite input a={a}, x={x}")));
    }
    if a < cfg.a_min_quad {
        return Err(PcfError::domain(format!(
            "quadrature needs |a| >= {}, got {a}",
            cfg.a_min_quad
        )));
    }
    Ok(())
}

pub(crate) fn quad<const N: usize, F>(f: F, interval: Interval, cfg: &Config) -> Result<QuadOutcome<N>>
where
    F: FnMut(f64) -> [f64; N],
{
    integrate_checked(f, interval, &cfg.quad())
}

/// `phi(w) - phi(saddle) = z^2/2 - c (ln(1 + z/saddle) - z/saddle)` with `z = w - saddle`.
pub(crate) fn saddle_excess(z: Complex64, saddle: Complex64, c: Complex64) -> Complex64 {
    0.5 * z * z - c * ln1p_minus_complex(z / saddle)
}

/// As [`saddle_excess`], with `w` itself supplied so the logarithm stays
/// accurate as `w` approaches the origin.
pub(crate) fn saddle_excess_at(w: Complex64, z: Complex64, saddle: Complex64, c: Complex64) -> Complex64 {
    if w.norm() < 0.5 * saddle.norm() {
        0.5 * z * z - c * ((w / saddle).ln() - z / saddle)
    } else {
        saddle_excess(z, saddle, c)
    }
}

/// `ln gamma(a)` including the configured test perturbation.
fn ln_gamma_aux_used(a: f64, cfg: &Config) -> f64 {
    ln_gamma_aux(a) + cfg.gamma_perturbation.ln_1p()
}

/// `ln Gamma(a + 1/2)`.
fn ln_gamma_shift(a: f64) -> f64 {
    HALF_LN_2PI + 2.0 * ln_gamma_aux(a) + ln_gamma_star(a)
}

pub(crate) fn scaled(ln: f64, value: f64) -> ScaledReal {
    ScaledReal::from_ln(ln, 1.0).scale(value)
}

/// Relative Wronskian residual `|f g' - f' g - expect|`, measured against the
/// larger of `|expect|` and the two products.
pub(crate) fn assembled_residual(
    f: ScaledReal,
    df: ScaledReal,
    g: ScaledReal,
    dg: ScaledReal,
    expect: f64,
) -> f64 {
    let p = f * dg;
    let q = df * g;
    let w = p.sub(q);
    let target = ScaledReal::from_f64(expect);
    let diff = w.sub(target);
    if diff.is_zero() {
        return 0.0;
    }
    let scale = target.abs().ln_abs().max(p.abs().ln_abs()).max(q.abs().ln_abs());
    (diff.ln_abs() - scale).exp()
}

// ---------------------------------------------------------------------------
// positive order

struct UposGeometry {
    t: f64,
    w0: f64,
    big_s: f64,
}

impl UposGeometry {
    fn new(t: f64) -> Self {
        let big_s = t.hypot(1.0);
        UposGeometry { t, w0: t + big_s, big_s }
    }

    /// `(psi, g, h)` at `theta`, with `psi <= 0` the real phase excess.
    fn point(&self, theta: f64) -> (f64, f64, f64) {
        let t = self.t;
        let tc = tcot(theta);
        let big_r = (t * t + tc).sqrt();
        let (sn, cs) = theta.sin_cos();
        let half_s = (0.5 * theta).sin();
        let r = (t + big_r) / cs;
        // r - w0 without cancellation
        let r_gap_num = -theta * theta * tcot_defect(theta) / (big_r + self.big_s) + 2.0 * self.w0 * half_s * half_s;
        let r_gap = r_gap_num / cs;
        let e_half = Complex64::from_polar(1.0, 0.5 * theta);
        let e_full = e_half * e_half;
        let z = r_gap * e_full + Complex64::new(0.0, 2.0 * self.w0 * half_s) * e_half;
        let w0 = Complex64::new(self.w0, 0.0);
        let psi = saddle_excess(z, w0, Complex64::new(1.0, 0.0)).re;
        let dbig_r = crate::scalar::tcot_deriv(theta) / (2.0 * big_r);
        let dr = (dbig_r * cs + (t + big_r) * sn) / (cs * cs);
        let rho = dr / r;
        let sr = r.sqrt();
        let dwdw = sr * e_half * Complex64::new(rho, 1.0);
        let w = r * e_full;
        let g = dwdw.im;
        let h = ((w - t) * dwdw).im;
        (psi, g, h)
    }
}

/// `(psi, g, h)` of the integrals for positive order at angle `theta`.
pub fn kernels_upos(theta: f64, t: f64) -> Result<(f64, f64, f64)> {
    if !(theta.abs() < FRAC_PI_2) || !(t >= 0.0) || t.is_infinite() {
        return Err(PcfError::domain(format!(
            "kernels_upos needs |theta| < pi/2 and t >= 0, got ({theta}, {t})"
        )));
    }
    Ok(UposGeometry::new(t).point(theta))
}

/// `(I, I_d)` for positive order and `x >= 0`.
pub fn quad_i(a: f64, x: f64, cfg: &Config) -> Result<(f64, f64, QuadDiag)> {
    check_order(a, x, cfg)?;
    if x < 0.0 {
        return Err(PcfError::domain(format!("quad_i needs x >= 0, got {x}")));
    }
    let geo = UposGeometry::new(x / (2.0 * a.sqrt()));
    let out = quad(
        |theta| {
            let (psi, g, h) = geo.point(theta);
            let e = a * psi;
            if e < EXP_FLOOR {
                return [0.0, 0.0];
            }
            let w = e.exp();
            [w * g, w * h]
        },
        Interval::finite(0.0, FRAC_PI_2),
        cfg,
    )?;
    Ok((2.0 * out.values[0], 2.0 * out.values[1], QuadDiag::of(&out)))
}

/// `(J, J_d)` for positive order and `x >= 0`.
pub fn quad_j(a: f64, x: f64, cfg: &Config) -> Result<(f64, f64, QuadDiag)> {
    check_order(a, x, cfg)?;
    if x < 0.0 {
        return Err(PcfError::domain(format!("quad_j needs x >= 0, got {x}")));
    }
    let t = x / (2.0 * a.sqrt());
    let big_s = t.hypot(1.0);
    let w0 = t + big_s;
    let f = |u: f64| {
        let psi = 0.5 * w0 * w0 * u * u - ln1p_minus_unchecked(u);
        let e = -a * psi;
        if e < EXP_FLOOR {
            return [0.0, 0.0];
        }
        let base = e.exp() / (1.0 + u).sqrt();
        [base, base * (big_s + w0 * u)]
    };
    let left = quad(f, Interval::finite(-1.0, 0.0), cfg)?;
    let width = 1.0 / (a * (w0 * w0 + 1.0)).sqrt();
    let right = quad(f, Interval::half_line(0.0, width), cfg)?;
    let total = left.combine(right);
    let diag = QuadDiag::of(&left).merge(QuadDiag::of(&right));
    Ok((total.values[0], total.values[1], diag))
}

/// `U(a, ±x)`, `V(a, ±x)` and derivatives for positive order `a`.
pub fn u_pos_assemble(a: f64, x: f64, cfg: &Config) -> Result<UvPair> {
    check_order(a, x, cfg)?;
    let ax = x.abs();
    let t = ax / (2.0 * a.sqrt());
    let (i, i_d, di) = quad_i(a, ax, cfg)?;
    let (j, j_d, dj) = quad_j(a, ax, cfg)?;
    let diag = di.merge(dj);
    let w0 = t + t.hypot(1.0);

    let expect = 2.0 * PI / (a * w0.sqrt());
    let integral_residual = ((i * j_d + i_d * j) - expect).abs() / expect;

    let lg = ln_gamma_aux_used(a, cfg);
    let lgs = ln_gamma_star(a);
    let xt = 2.0 * a * xi_tilde(t);
    let ln_rec = 0.25 * a.ln() - xt - HALF_LN_2PI - lg;
    let ln_dom = 0.25 * a.ln() + 0.5 * w0.ln() + xt - HALF_LN_2PI - (2.0 * ln_gamma_aux(a) - lg) - lgs;
    let sqrt_a = a.sqrt();
    // values at +|x| (recessive) and -|x| (dominant)
    let u_p = scaled(ln_rec, i);
    let du_p = scaled(ln_rec, -sqrt_a * i_d);
    let u_m = scaled(ln_dom, j);
    let du_m = scaled(ln_dom, -sqrt_a * j_d);

    let (sn, _) = sin_cos_pi(a);
    let big_gamma = ScaledReal::from_ln(ln_gamma_shift(a) - PI.ln(), 1.0);
    let v_p = big_gamma * u_p.scale(sn).add(u_m);
    let dv_p = big_gamma * du_p.scale(sn).sub(du_m);
    let v_m = big_gamma * u_m.scale(sn).add(u_p);
    let dv_m = big_gamma * du_m.scale(sn).sub(du_p);

    let uv_expect = (2.0 / PI).sqrt();
    let build = |u, du, v, dv| {
        let res = assembled_residual(u, du, v, dv, uv_expect).max(integral_residual);
        UVResult {
            u,
            du,
            v,
            dv,
            regime: Regime::UPos,
            wronskian_residual: res,
            quadrature: diag,
            oracle_gap: None,
        }
    };
    let plus = build(u_p, du_p, v_p, dv_p);
    let minus = build(u_m, du_m, v_m, dv_m);
    Ok(if x >= 0.0 {
        UvPair {
            at_x: plus,
            at_minus_x: minus,
        }
    } else {
        UvPair {
            at_x: minus,
            at_minus_x: plus,
        }
    })
}

// ---------------------------------------------------------------------------
// negative order, |t| < 1

/// The contour integrals `C = G1 - i G2` and `C_d = H1 - i H2`.
#[derive(Clone, Copy, Debug)]
struct MidIntegrals {
    c: Complex64,
    cd: Complex64,
    diag: QuadDiag,
}

impl MidIntegrals {
    /// The same integrals at `-t`.
    fn mirrored(self) -> Self {
        MidIntegrals {
            c: self.c.conj(),
            cd: -self.cd.conj(),
            diag: self.diag,
        }
    }
}

struct MidGeometry {
    t: f64,
    theta_p: f64,
    saddle: Complex64,
}

impl MidGeometry {
    fn new(t: f64) -> Self {
        let theta_p = t.asin();
        MidGeometry {
            t,
            theta_p,
            saddle: Complex64::from_polar(1.0, theta_p),
        }
    }

    /// `(psi, sqrt(w) (rho + i), w)` at `theta` with `gap = theta0 - theta`;
    /// `None` where the integrand vanishes.
    fn point(&self, theta: f64, gap: f64) -> Option<(f64, Complex64, Complex64)> {
        if theta <= 0.0 {
            return None;
        }
        let (r, dr, _) = r_uneg_mid_gap(theta, gap, self.t);
        if !r.is_finite() || r == 0.0 {
            return None;
        }
        let delta = theta - self.theta_p;
        let e_half = Complex64::from_polar(1.0, 0.5 * theta);
        let e_full = e_half * e_half;
        let chord = Complex64::new(0.0, 2.0 * (0.5 * delta).sin()) * Complex64::from_polar(1.0, 0.5 * (theta + self.theta_p));
        let z = (r - 1.0) * e_full + chord;
        let w = r * e_full;
        let psi = saddle_excess_at(w, z, self.saddle, Complex64::new(1.0, 0.0)).re;
        let kernel = r.sqrt() * e_half * Complex64::new(dr / r, 1.0);
        Some((psi, kernel, w))
    }
}

/// `(psi, g1, g2, h1, h2)` on the mid-range path at angle `theta`, for `0 < t < 1`.
pub fn kernels_uneg_mid(theta: f64, t: f64) -> Result<(f64, f64, f64, f64, f64)> {
    if !(t > 0.0 && t < 1.0) {
        return Err(PcfError::domain(format!("kernels_uneg_mid needs 0 < t < 1, got {t}")));
    }
    let theta0 = theta0_of(t);
    if !(theta > 0.0 && theta < theta0) {
        return Err(PcfError::domain(format!(
            "kernels_uneg_mid needs 0 < theta < {theta0}, got {theta}"
        )));
    }
    let geo = MidGeometry::new(t);
    let (psi, k, w) = geo.point(theta, theta0 - theta).expect("interior point");
    let c = -k;
    let cd = c * (t + Complex64::i() * w);
    Ok((psi, c.re, -c.im, cd.re, -cd.im))
}

fn weight(a: f64, psi: f64) -> Option<f64> {
    let e = -a * psi;
    if e < EXP_FLOOR {
        None
    } else {
        Some(e.exp())
    }
}

fn pack(c: Complex64, cd: Complex64) -> [f64; 4] {
    [c.re, c.im, cd.re, cd.im]
}

/// Mid-range integrals on the exact path, for `0 < t < 1`.
fn mid_integrals_theta(a: f64, t: f64, cfg: &Config) -> Result<MidIntegrals> {
    let geo = MidGeometry::new(t);
    let theta0 = theta0_of(t);
    let eval = |theta: f64, gap: f64| -> [f64; 4] {
        match geo.point(theta, gap) {
            Some((psi, k, w)) => match weight(a, psi) {
                Some(e) => {
                    let c = -e * k;
                    pack(c, c * (t + Complex64::i() * w))
                }
                None => [0.0; 4],
            },
            None => [0.0; 4],
        }
    };
    let before = quad(|theta| eval(theta, theta0 - theta), Interval::finite(0.0, geo.theta_p), cfg)?;
    let after = quad(|gap| eval(theta0 - gap, gap), Interval::finite(0.0, theta0 - geo.theta_p), cfg)?;
    let total = before.combine(after);
    Ok(MidIntegrals {
        c: total.complex(0),
        cd: total.complex(1),
        diag: QuadDiag::of(&before).merge(QuadDiag::of(&after)),
    })
}

/// Mid-range integrals on the approximate path `v(u)`, for `0 <= t < 1`.
fn mid_integrals_u(a: f64, t: f64, cfg: &Config) -> Result<MidIntegrals> {
    let up = ((1.0 - t) * (1.0 + t)).sqrt();
    let saddle = Complex64::new(up, t);
    let k = t * (1.0 + up);
    let eval = |u: f64| -> [f64; 4] {
        let den = u + up * up;
        let v = k * u / den;
        let dv = k * up * up / (den * den);
        let dv_gap = k * up * up / (den * (up + up * up));
        let du = u - up;
        let z = Complex64::new(du, dv_gap * du);
        let w = Complex64::new(u, v);
        let ex = saddle_excess_at(w, z, saddle, Complex64::new(1.0, 0.0));
        let e = -a * ex.re;
        if e < EXP_FLOOR {
            return [0.0; 4];
        }
        let f = Complex64::from_polar(e.exp(), -a * ex.im) / w.sqrt() * Complex64::new(1.0, dv);
        pack(f, f * (t + Complex64::i() * w))
    };
    let before = quad(eval, Interval::finite(0.0, up), cfg)?;
    let after = quad(eval, Interval::half_line(up, 1.0 / a.sqrt()), cfg)?;
    let total = before.combine(after);
    Ok(MidIntegrals {
        c: total.complex(0),
        cd: total.complex(1),
        diag: QuadDiag::of(&before).merge(QuadDiag::of(&after)),
    })
}

/// Near-turning-point integrals over the segment `0 -> w+` and the horizontal ray from `w+`.
fn near1_integrals(a: f64, t: f64, cfg: &Config) -> Result<MidIntegrals> {
    let up = ((1.0 - t) * (1.0 + t)).sqrt();
    let saddle = Complex64::new(up, t);
    let sq_saddle = saddle.sqrt();
    let w2 = saddle * saddle;
    let i = Complex64::i();
    let seg = |q: f64| -> [f64; 4] {
        let p = 1.0 - q;
        // ln(1 - p) + p, exact in q near the origin
        let l = if q < 0.5 { q.ln() + p } else { ln1p_minus_unchecked(-p) };
        let ex = 0.5 * p * p * w2 - l;
        let e = -a * ex.re;
        if e < EXP_FLOOR {
            return [0.0; 4];
        }
        let f = Complex64::from_polar(e.exp(), -a * ex.im) * sq_saddle / q.sqrt();
        let w = q * saddle;
        pack(f, f * (t + i * w))
    };
    let ray = |u: f64| -> [f64; 4] {
        let ex = saddle_excess(Complex64::new(u, 0.0), saddle, Complex64::new(1.0, 0.0));
        let e = -a * ex.re;
        if e < EXP_FLOOR {
            return [0.0; 4];
        }
        let w = saddle + u;
        let f = Complex64::from_polar(e.exp(), -a * ex.im) / w.sqrt();
        pack(f, f * (t + i * w))
    };
    let first = quad(seg, Interval::finite(0.0, 1.0), cfg)?;
    let second = quad(ray, Interval::half_line(0.0, 1.0 / a.sqrt()), cfg)?;
    let total = first.combine(second);
    Ok(MidIntegrals {
        c: total.complex(0),
        cd: total.complex(1),
        diag: QuadDiag::of(&first).merge(QuadDiag::of(&second)),
    })
}

/// `sqrt(2/pi) a^(1/4) gamma(a)` in log form, with the test perturbation.
fn ln_k_neg(a: f64, cfg: &Config) -> f64 {
    LN_SQRT_2_OVER_PI + 0.25 * a.ln() + ln_gamma_aux_used(a, cfg)
}

fn assemble_mid(a: f64, t: f64, m: &MidIntegrals, regime: Regime, cfg: &Config) -> UVResult {
    let (g1, g2) = (m.c.re, -m.c.im);
    let (h1, h2) = (m.cd.re, -m.cd.im);
    let lgs = ln_gamma_star(a);
    let expect = PI / a * lgs.exp();
    let integral_residual = ((h1 * g2 - g1 * h2) - expect).abs() / expect;

    let lambda = 2.0 * a * eta_unchecked(t) + FRAC_PI_4;
    let (sl, cl) = lambda.sin_cos();
    let ln_k = ln_k_neg(a, cfg);
    let ln_kv = ln_k - ln_gamma_shift(a);
    let sqrt_a = a.sqrt();
    let u = scaled(ln_k, sl * g1 + cl * g2);
    let du = scaled(ln_k, sqrt_a * (sl * h1 + cl * h2));
    let v = scaled(ln_kv, cl * g1 - sl * g2);
    let dv = scaled(ln_kv, sqrt_a * (cl * h1 - sl * h2));
    let res = assembled_residual(u, du, v, dv, (2.0 / PI).sqrt()).max(integral_residual);
    UVResult {
        u,
        du,
        v,
        dv,
        regime,
        wronskian_residual: res,
        quadrature: m.diag,
        oracle_gap: None,
    }
}

pub(crate) fn t_of(a: f64, x: f64) -> f64 {
    x / (2.0 * a.sqrt())
}

/// `U(-a, x)`, `V(-a, x)` and derivatives for `|t| < 1` away from the turning points.
pub fn uv_neg_mid(a: f64, x: f64, cfg: &Config) -> Result<UVResult> {
    check_order(a, x, cfg)?;
    let t = t_of(a, x);
    if !(t.abs() < 1.0) {
        return Err(PcfError::domain(format!("uv_neg_mid needs |t| < 1, got {t}")));
    }
    let at = t.abs();
    let m = if at < cfg.t_small {
        mid_integrals_u(a, at, cfg)?
    } else {
        mid_integrals_theta(a, at, cfg)?
    };
    let m = if t < 0.0 { m.mirrored() } else { m };
    Ok(assemble_mid(a, t, &m, Regime::UNegMid, cfg))
}

/// Same values from the two-leg representation suited to `|t|` near 1.
pub fn uv_neg_near1(a: f64, x: f64, cfg: &Config) -> Result<UVResult> {
    check_order(a, x, cfg)?;
    let t = t_of(a, x);
    if !(t.abs() < 1.0) {
        return Err(PcfError::domain(format!("uv_neg_near1 needs |t| < 1, got {t}")));
    }
    let m = near1_integrals(a, t.abs(), cfg)?;
    let m = if t < 0.0 { m.mirrored() } else { m };
    Ok(assemble_mid(a, t, &m, Regime::UNegNear1, cfg))
}

// ---------------------------------------------------------------------------
// negative order, |t| >= 1

/// The six integrals for order `-a` at `t >= 1`.
pub fn right_integrals(a: f64, t: f64, cfg: &Config) -> Result<RightIntegrals> {
    if !(t >= 1.0) || t.is_infinite() {
        return Err(PcfError::domain(format!("right_integrals needs t >= 1, got {t}")));
    }
    check_order(a, t, cfg)?;
    let s = ((t - 1.0) * (t + 1.0)).sqrt();
    let r_plus = t + s;
    let r_minus = 1.0 / r_plus;
    let saddle = Complex64::new(0.0, r_plus);
    let i = Complex64::i();
    let ray = |eps: f64| -> [f64; 4] {
        let (r, dr) = r_uneg_right_eps(eps, t);
        if !r.is_finite() {
            return [0.0; 4];
        }
        let m = tcot_defect(eps);
        let big_r = (s * s + eps * eps * m).sqrt();
        let r_gap_r = if big_r + s == 0.0 { 0.0 } else { eps * eps * m / (big_r + s) };
        let half = (0.5 * eps).sin();
        let cs = eps.cos();
        let r_gap = (r_gap_r + 2.0 * (t + s) * half * half) / cs;
        let e_half = Complex64::from_polar(1.0, -0.5 * eps);
        let e_full = e_half * e_half;
        // e^{-i eps} - 1 = -2 i sin(eps/2) e^{-i eps/2}
        let z = i * (r_gap * e_full - 2.0 * r_plus * half * i * e_half);
        let psi = saddle_excess(z, saddle, Complex64::new(1.0, 0.0)).re;
        let Some(e) = weight(a, psi) else {
            return [0.0; 4];
        };
        let f = e * i * r.sqrt() * e_half * Complex64::new(dr / r, -1.0);
        pack(f, f * (t - r * e_full))
    };
    let c = quad(ray, Interval::finite(0.0, FRAC_PI_2), cfg)?;
    let real = |v: f64| -> [f64; 2] {
        let z = v - r_minus;
        let zeta = z / r_minus;
        // z^2/2 + ln(v/r-) - z/r-
        let l = if v < 0.5 * r_minus { (v / r_minus).ln() - zeta } else { ln1p_minus_unchecked(zeta) };
        let e = a * (0.5 * z * z + l);
        if e < EXP_FLOOR {
            return [0.0; 2];
        }
        let base = e.exp() / v.sqrt();
        [base, base * (t - v)]
    };
    let low = quad(real, Interval::finite(0.0, r_minus), cfg)?;
    let mut diag = QuadDiag::of(&c).merge(QuadDiag::of(&low));
    let mut g3 = low.values;
    if r_plus > r_minus {
        let high = quad(real, Interval::finite(r_minus, r_plus), cfg)?;
        diag = diag.merge(QuadDiag::of(&high));
        g3[0] += high.values[0];
        g3[1] += high.values[1];
    }
    Ok(RightIntegrals {
        g: [c.values[0], c.values[1], g3[0]],
        h: [c.values[2], c.values[3], g3[1]],
        xi: crate::contours::xi(t)?,
        quadrature: diag,
    })
}

fn right_integral_residual(a: f64, ri: &RightIntegrals) -> f64 {
    let [g1, g2, g3] = ri.g;
    let [h1, h2, h3] = ri.h;
    let damp = (-4.0 * a * ri.xi).exp();
    let w = damp * (g1 * h2 - h1 * g2) + (g1 * h3 - h1 * g3);
    let expect = PI / a * ln_gamma_star(a).exp();
    (w - expect).abs() / expect
}

/// `U(-a, x)`, `V(-a, x)` and derivatives for `t >= 1`.
pub fn uv_neg_right(a: f64, x: f64, cfg: &Config) -> Result<UVResult> {
    check_order(a, x, cfg)?;
    let ri = right_integrals(a, t_of(a, x), cfg)?;
    Ok(assemble_right(a, &ri, cfg))
}

fn assemble_right(a: f64, ri: &RightIntegrals, cfg: &Config) -> UVResult {
    let [g1, g2, g3] = ri.g;
    let [h1, h2, h3] = ri.h;
    let ln_k = ln_k_neg(a, cfg);
    let ln_kv = ln_k - ln_gamma_shift(a);
    let two_xi = 2.0 * a * ri.xi;
    let damp = (-2.0 * two_xi).exp();
    let sqrt_a = a.sqrt();
    let u = scaled(ln_k - two_xi, g1);
    let du = scaled(ln_k - two_xi, sqrt_a * h1);
    let v = scaled(ln_kv + two_xi, damp * g2 + g3);
    let dv = scaled(ln_kv + two_xi, sqrt_a * (damp * h2 + h3));
    let res = assembled_residual(u, du, v, dv, (2.0 / PI).sqrt()).max(right_integral_residual(a, ri));
    UVResult {
        u,
        du,
        v,
        dv,
        regime: Regime::UNegRight,
        wronskian_residual: res,
        quadrature: ri.quadrature,
        oracle_gap: None,
    }
}

/// `U(-a, x)`, `V(-a, x)` and derivatives for `t <= -1`, from the integrals at `|t|`.
pub fn uv_neg_left(a: f64, x: f64, cfg: &Config) -> Result<UVResult> {
    check_order(a, x, cfg)?;
    let t = t_of(a, x);
    if !(t <= -1.0) {
        return Err(PcfError::domain(format!("uv_neg_left needs t <= -1, got {t}")));
    }
    let ri = right_integrals(a, -t, cfg)?;
    Ok(assemble_left(a, &ri, cfg))
}

fn assemble_left(a: f64, ri: &RightIntegrals, cfg: &Config) -> UVResult {
    let [g1, g2, g3] = ri.g;
    let [h1, h2, h3] = ri.h;
    let (sn, cs) = sin_cos_pi(a);
    let ln_k = ln_k_neg(a, cfg);
    let ln_kv = ln_k - ln_gamma_shift(a);
    let two_xi = 2.0 * a * ri.xi;
    let sqrt_a = a.sqrt();
    let pair = |ln: f64, rec: f64, dom: f64| scaled(ln - two_xi, rec).add(scaled(ln + two_xi, dom));
    let u = pair(ln_k, cs * g2 + sn * g1, cs * g3);
    let du = pair(ln_k, -sqrt_a * (cs * h2 + sn * h1), -sqrt_a * cs * h3);
    let v = pair(ln_kv, cs * g1 - sn * g2, -sn * g3);
    let dv = pair(ln_kv, -sqrt_a * (cs * h1 - sn * h2), sqrt_a * sn * h3);
    let res = assembled_residual(u, du, v, dv, (2.0 / PI).sqrt()).max(right_integral_residual(a, ri));
    UVResult {
        u,
        du,
        v,
        dv,
        regime: Regime::UNegLeft,
        wronskian_residual: res,
        quadrature: ri.quadrature,
        oracle_gap: None,
    }
}

/// `U(-a, ±x)`, `V(-a, ±x)` and derivatives from one set of integrals at `|t|`.
pub fn uv_neg_pair(a: f64, x: f64, cfg: &Config) -> Result<UvPair> {
    check_order(a, x, cfg)?;
    let t = t_of(a, x.abs());
    let (pos, neg) = if t >= 1.0 {
        let ri = right_integrals(a, t, cfg)?;
        (assemble_right(a, &ri, cfg), assemble_left(a, &ri, cfg))
    } else {
        let (m, regime) = if t >= cfg.t_near1 {
            (near1_integrals(a, t, cfg)?, Regime::UNegNear1)
        } else if t < cfg.t_small {
            (mid_integrals_u(a, t, cfg)?, Regime::UNegMid)
        } else {
            (mid_integrals_theta(a, t, cfg)?, Regime::UNegMid)
        };
        (assemble_mid(a, t, &m, regime, cfg), assemble_mid(a, -t, &m.mirrored(), regime, cfg))
    };
    Ok(if x < 0.0 {
        UvPair { at_x: neg, at_minus_x: pos }
    } else {
        UvPair { at_x: pos, at_minus_x: neg }
    })
}

/// Phase excess of the region right of the turning point on the real segment,
/// `phi(v) - phi(r-)` for `phi(v) = v^2/2 - 2 t v + ln v`.
#[cfg(test)]
fn right_real_phase(v: f64, t: f64) -> f64 {
    let s = ((t - 1.0) * (t + 1.0)).sqrt();
    let r_minus = 1.0 / (t + s);
    let z = v - r_minus;
    let zeta = z / r_minus;
    let l = if v < 0.5 * r_minus { (v / r_minus).ln() - zeta } else { ln1p_minus_unchecked(zeta) };
    0.5 * z * z + l
}
