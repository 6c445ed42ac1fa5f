//! Double-exponential quadrature: tanh-sinh on finite intervals, exp-sinh on
//! half-lines and sinh-sinh on the whole line.
//!
//! Integrands return a fixed-size array of real components so that related
//! integrals (real and imaginary parts, a value and its derivative kernel)
//! share every node evaluation.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{PcfError, Result};

/// Integration range in the original variable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Interval {
    /// `[lo, hi]`.
    Finite {
        lo: f64,
        hi: f64,
    },
    /// `[start, inf)`; `scale` sets where the mapped nodes are centred.
    HalfLine {
        start: f64,
        scale: f64,
    },
    HalfLineDown {
        end: f64,
        scale: f64,
    },
    /// `(-inf, inf)` around `center`.
    Whole {
        center: f64,
        scale: f64,
    },
}

impl Interval {
    pub fn finite(lo: f64, hi: f64) -> Self {
        Interval::Finite { lo, hi }
    }

    pub fn half_line(start: f64, scale: f64) -> Self {
        Interval::HalfLine { start, scale }
    }

    /// `(-inf, end]`, with `scale` the decay length.
    pub fn half_line_down(end: f64, scale: f64) -> Self {
        Interval::HalfLineDown { end, scale }
    }

    pub fn whole(center: f64, scale: f64) -> Self {
        Interval::Whole { center, scale }
    }

    fn t_range(&self) -> (f64, f64) {
        match self {
            Interval::HalfLine { .. } | Interval::HalfLineDown { .. } => (-T_MAX - 1.0, T_MAX),
            _ => (-T_MAX, T_MAX),
        }
    }

    /// Abscissa and weight of the transformed variable `t`; `None` when the
    /// node collapses onto an endpoint in floating point.
    fn node(&self, t: f64) -> Option<(f64, f64)> {
        let u = FRAC_PI_2 * t.sinh();
        let du = FRAC_PI_2 * t.cosh();
        match *self {
            Interval::Finite { lo, hi } => {
                let half = 0.5 * (hi - lo);
                let e = (-2.0 * u.abs()).exp();
                let gap = half * 2.0 * e / (1.0 + e);
                let x = if u >= 0.0 { hi - gap } else { lo + gap };
                if x <= lo || x >= hi || gap == 0.0 {
                    return None;
                }
                let w = half * du * 4.0 * e / ((1.0 + e) * (1.0 + e));
                Some((x, w))
            }
            Interval::HalfLine { start, scale } => {
                let e = u.exp();
                let x = start + scale * e;
                if x == start || !x.is_finite() {
                    return None;
                }
                Some((x, scale * du * e))
            }
            Interval::HalfLineDown { end, scale } => {
                let e = u.exp();
                let x = end - scale * e;
                if x == end || !x.is_finite() {
                    return None;
                }
                Some((x, scale * du * e))
            }
            Interval::Whole { center, scale } => {
                let x = center + scale * u.sinh();
                if !x.is_finite() {
                    return None;
                }
                Some((x, scale * du * u.cosh()))
            }
        }
    }
}

/// Settings for a single integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadConfig {
    pub tol_rel: f64,
    pub tol_abs: f64,
    /// Number of step halvings after the first level.
    pub max_level: u32,
    pub min_level: u32,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            tol_rel: 1e-13,
            tol_abs: 0.0,
            max_level: 13,
            min_level: 2,
        }
    }
}

impl QuadConfig {
    pub fn with_tol(tol_rel: f64) -> Self {
        QuadConfig {
            tol_rel,
            ..Self::default()
        }
    }
}

const T_MAX: f64 = 4.0;
const FIRST_STEP: f64 = 0.5;

/// Result of integrating an `N`-component integrand.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadOutcome<const N: usize> {
    pub values: [f64; N],
    pub err_estimate: [f64; N],
    /// Integral of `|f|` per component, the scale of attainable accuracy.
    pub magnitude: [f64; N],
    pub evaluations: usize,
    pub converged: bool,
}

impl<const N: usize> QuadOutcome<N> {
    pub fn zero() -> Self {
        QuadOutcome {
            values: [0.0; N],
            err_estimate: [0.0; N],
            magnitude: [0.0; N],
            evaluations: 0,
            converged: true,
        }
    }

    /// Sum of two integrals over adjacent pieces.
    pub fn combine(self, other: Self) -> Self {
        let mut out = self;
        for i in 0..N {
            out.values[i] += other.values[i];
            out.err_estimate[i] += other.err_estimate[i];
            out.magnitude[i] += other.magnitude[i];
        }
        out.evaluations += other.evaluations;
        out.converged &= other.converged;
        out
    }

    /// Sum of `self` and `factor * other`.
    pub fn combine_scaled(self, other: Self, factor: f64) -> Self {
        let mut out = self;
        for i in 0..N {
            out.values[i] += factor * other.values[i];
            out.err_estimate[i] += factor.abs() * other.err_estimate[i];
            out.magnitude[i] += factor.abs() * other.magnitude[i];
        }
        out.evaluations += other.evaluations;
        out.converged &= other.converged;
        out
    }

    /// Component pair `(2k, 2k+1)` read as a complex number.
    pub fn complex(&self, k: usize) -> Complex64 {
        Complex64::new(self.values[2 * k], self.values[2 * k + 1])
    }

    /// Largest relative error estimate, measured against `max(|value|, magnitude * 1e-2)`.
    pub fn rel_error(&self) -> f64 {
        (0..N)
            .map(|i| {
                let scale = self.values[i].abs().max(1e-2 * self.magnitude[i]);
                if scale == 0.0 {
                    0.0
                } else {
                    self.err_estimate[i] / scale
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Complex integral as reported to callers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureResult {
    pub value_re: f64,
    pub value_im: f64,
    pub err_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Clone, Copy)]
struct Neumaier<const N: usize> {
    sum: [f64; N],
    comp: [f64; N],
}

impl<const N: usize> Neumaier<N> {
    fn new() -> Self {
        Neumaier {
            sum: [0.0; N],
            comp: [0.0; N],
        }
    }

    fn add(&mut self, i: usize, v: f64) {
        let s = self.sum[i];
        let t = s + v;
        if s.abs() >= v.abs() {
            self.comp[i] += (s - t) + v;
        } else {
            self.comp[i] += (v - t) + s;
        }
        self.sum[i] = t;
    }

    fn total(&self) -> [f64; N] {
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = self.sum[i] + self.comp[i];
        }
        out
    }
}

/// Weighted sum of `f` over the nodes `t = (first + k * stride) * h` inside the
/// interval's transformed range.
fn level_sum<const N: usize, F>(
    f: &mut F,
    interval: &Interval,
    h: f64,
    first: f64,
    stride: f64,
    evaluations: &mut usize,
) -> Result<([f64; N], [f64; N])>
where
    F: FnMut(f64) -> [f64; N],
{
    let mut acc = Neumaier::<N>::new();
    let mut mag = Neumaier::<N>::new();
    let (t_lo, t_hi) = interval.t_range();
    let kmax = ((t_hi / h - first) / stride).floor() as i64;
    let kmin = ((t_lo / h - first) / stride).ceil() as i64;
    for k in kmin..=kmax {
        let t = (first + k as f64 * stride) * h;
        let Some((x, w)) = interval.node(t) else {
            continue;
        };
        if w == 0.0 {
            continue;
        }
        let v = f(x);
        *evaluations += 1;
        for i in 0..N {
            if v[i].is_nan() {
                return Err(PcfError::IntegrandNan { at: x });
            }
            let term = w * v[i];
            if term != 0.0 {
                acc.add(i, term);
                mag.add(i, term.abs());
            }
        }
    }
    Ok((acc.total(), mag.total()))
}

fn is_done<const N: usize>(
    cur: &[f64; N],
    prev: &[f64; N],
    mag: &[f64; N],
    cfg: &QuadConfig,
) -> bool {
    (0..N).all(|i| {
        let diff = (cur[i] - prev[i]).abs();
        diff <= cfg.tol_abs + (cfg.tol_rel * cur[i].abs()).max(64.0 * f64::EPSILON * mag[i])
    })
}

/// Integrates by successive step halving; the outcome records whether the
/// tolerance was met.
pub fn integrate<const N: usize, F>(
    mut f: F,
    interval: Interval,
    cfg: &QuadConfig,
) -> Result<QuadOutcome<N>>
where
    F: FnMut(f64) -> [f64; N],
{
    let mut evaluations = 0usize;
    let mut h = FIRST_STEP;
    let (s0, m0) = level_sum(&mut f, &interval, h, 0.0, 1.0, &mut evaluations)?;
    let mut sum = s0.map(|v| v * h);
    let mut mag = m0.map(|v| v * h);
    let mut err = [f64::INFINITY; N];
    let mut converged = false;
    for level in 1..=cfg.max_level {
        h *= 0.5;
        let (sn, mn) = level_sum(&mut f, &interval, h, 1.0, 2.0, &mut evaluations)?;
        let mut next = [0.0; N];
        for i in 0..N {
            next[i] = 0.5 * sum[i] + h * sn[i];
            mag[i] = 0.5 * mag[i] + h * mn[i];
            err[i] = (next[i] - sum[i]).abs();
        }
        let done = level >= cfg.min_level && is_done(&next, &sum, &mag, cfg);
        sum = next;
        if done {
            converged = true;
            break;
        }
    }
    Ok(QuadOutcome {
        values: sum,
        err_estimate: err,
        magnitude: mag,
        evaluations,
        converged,
    })
}

/// Same rule on the grid shifted by half a step; the levels are not nested.
fn integrate_offset<const N: usize, F>(
    mut f: F,
    interval: Interval,
    cfg: &QuadConfig,
) -> Result<QuadOutcome<N>>
where
    F: FnMut(f64) -> [f64; N],
{
    let mut evaluations = 0usize;
    let mut h = FIRST_STEP;
    let mut prev: Option<[f64; N]> = None;
    let mut out = QuadOutcome::<N>::zero();
    out.converged = false;
    for level in 0..=cfg.max_level {
        let (s, m) = level_sum(&mut f, &interval, h, 0.5, 1.0, &mut evaluations)?;
        let cur = s.map(|v| v * h);
        out.magnitude = m.map(|v| v * h);
        if let Some(p) = prev {
            for i in 0..N {
                out.err_estimate[i] = (cur[i] - p[i]).abs();
            }
            if level > cfg.min_level && is_done(&cur, &p, &out.magnitude, cfg) {
                out.values = cur;
                out.converged = true;
                break;
            }
        }
        out.values = cur;
        prev = Some(cur);
        h *= 0.5;
    }
    out.evaluations = evaluations;
    Ok(out)
}

/// Integrates and, failing convergence, retries once on the half-step
/// offset grid before reporting a convergence error.
pub fn integrate_checked<const N: usize, F>(
    mut f: F,
    interval: Interval,
    cfg: &QuadConfig,
) -> Result<QuadOutcome<N>>
where
    F: FnMut(f64) -> [f64; N],
{
    let first = integrate(&mut f, interval, cfg)?;
    if first.converged {
        return Ok(first);
    }
    let retry = integrate_offset(&mut f, interval, cfg)?;
    if retry.converged {
        let mut r = retry;
        r.evaluations += first.evaluations;
        return Ok(r);
    }
    Err(PcfError::Convergence {
        err_estimate: first.rel_error(),
        evaluations: first.evaluations + retry.evaluations,
    })
}

/// Integrates a complex-valued integrand given as a closure.
pub fn integrate_complex<F>(
    mut f: F,
    interval: Interval,
    cfg: &QuadConfig,
) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> Complex64,
{
    let out = integrate(
        |x| {
            let v = f(x);
            [v.re, v.im]
        },
        interval,
        cfg,
    )?;
    Ok(QuadratureResult {
        value_re: out.values[0],
        value_im: out.values[1],
        err_estimate: out.err_estimate[0].hypot(out.err_estimate[1]),
        evaluations: out.evaluations,
        converged: out.converged,
    })
}
