//! Entry point: regime selection and routing between the series and the
//! quadrature representations.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::contours::Regime;
use crate::error::{PcfError, Result};
use crate::quadrature::QuadConfig;
use crate::scaled::ScaledReal;
use crate::series::{uv_series, w_series, SeriesResult, UvSeries, A_SER, X_SER};
use crate::ureg::{assembled_residual, u_pos_assemble, uv_neg_pair, UVResult};
use crate::wreg::w_quadrature;

/// Switch points and tolerances shared by every evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Config {
    /// Relative tolerance handed to the quadrature.
    pub tol: f64,
    pub max_level: u32,
    /// Below this `|a|` the series is used.
    pub a_min_quad: f64,
    /// Start of the near-turning-point representation for U and V.
    pub t_near1: f64,
    /// Below this `|t|` the mid-range U path is parameterized by `u`.
    pub t_small: f64,
    /// Width of the band below `t = 1` where W leaves the traced path for a
    /// vertical line.
    pub collar: f64,
    /// Digits of loss above which a W value is flagged as inaccurate.
    pub loss_flag_digits: f64,
    /// Relative perturbation applied to `gamma(a)`, for testing the self-checks.
    pub gamma_perturbation: f64,
    /// Compare every result inside the series window against the series.
    pub cross_check: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            tol: 1e-13,
            max_level: 13,
            a_min_quad: 0.5,
            t_near1: 0.9,
            t_small: crate::contours::T_SMALL,
            collar: 1e-2,
            loss_flag_digits: 4.0,
            gamma_perturbation: 0.0,
            cross_check: false,
        }
    }
}

impl Config {
    pub fn with_tol(tol: f64) -> Self {
        Config {
            tol,
            ..Self::default()
        }
    }

    pub(crate) fn quad(&self) -> QuadConfig {
        QuadConfig {
            tol_rel: self.tol,
            max_level: self.max_level,
            ..QuadConfig::default()
        }
    }
}

/// Default relative tolerance.
pub const DEFAULT_TOL: f64 = 1e-13;

/// Accepted range of requested tolerances.
pub const TOL_RANGE: (f64, f64) = (1e-14, 1e-6);

/// Which parabolic cylinder function to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    U,
    V,
    W,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::U => "U",
            Func::V => "V",
            Func::W => "W",
        }
    }
}

impl fmt::Display for Func {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Func {
    type Err = PcfError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "U" | "u" => Ok(Func::U),
            "V" | "v" => Ok(Func::V),
            "W" | "w" => Ok(Func::W),
            _ => Err(PcfError::domain(format!("unknown function {s}; expected U, V or W"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalRequest {
    pub func: Func,
    pub a: f64,
    pub x: f64,
    pub want_derivative: bool,
    /// Skip the check that the value fits in a double.
    pub want_scaled: bool,
    pub tol: f64,
}

impl EvalRequest {
    pub fn new(func: Func, a: f64, x: f64) -> Self {
        EvalRequest {
            func,
            a,
            x,
            want_derivative: true,
            want_scaled: false,
            tol: DEFAULT_TOL,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostics {
    pub wronskian_residual: f64,
    /// Decimal digits lost to cancellation in this value.
    pub accuracy_loss_digits: f64,
    /// Integrand evaluations, or series terms on the series path.
    pub evaluations: usize,
    /// Relative gap to the series, when a cross-check ran.
    pub oracle_gap: Option<f64>,
    /// Set when the loss or the cross-check says not to trust every digit.
    pub flagged: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalOutput {
    pub value: ScaledReal,
    pub derivative: Option<ScaledReal>,
    pub regime: Regime,
    pub diagnostics: Diagnostics,
}

impl EvalOutput {
    /// The value as a double; overflow is an error, underflow gives zero.
    pub fn value_f64(&self) -> Result<f64> {
        self.value.to_f64()
    }

    pub fn derivative_f64(&self) -> Result<Option<f64>> {
        self.derivative.map(|d| d.to_f64()).transpose()
    }
}

/// Which representation serves `(func, a, x)`.
pub fn classify(func: Func, a: f64, x: f64, cfg: &Config) -> Result<Regime> {
    check_point(a, x)?;
    if uses_series(a, x, cfg) {
        return Ok(Regime::Series);
    }
    let b = a.abs();
    let t = x / (2.0 * b.sqrt());
    Ok(match (func, a > 0.0) {
        (Func::U | Func::V, true) => Regime::UPos,
        (Func::U | Func::V, false) => {
            if t >= 1.0 {
                Regime::UNegRight
            } else if t <= -1.0 {
                Regime::UNegLeft
            } else if t.abs() >= cfg.t_near1 {
                Regime::UNegNear1
            } else {
                Regime::UNegMid
            }
        }
        (Func::W, false) => Regime::WNeg,
        (Func::W, true) => {
            if t.abs() >= 1.0 {
                Regime::WPosRight
            } else {
                Regime::WPosMid
            }
        }
    })
}

/// Evaluates one function at one point with the default configuration and
/// the request's tolerance.
pub fn evaluate(req: &EvalRequest) -> Result<EvalOutput> {
    evaluate_with(req, &Config::default())
}

pub fn evaluate_with(req: &EvalRequest, cfg: &Config) -> Result<EvalOutput> {
    let cfg = request_config(req.tol, cfg)?;
    let (out, _) = pair_outputs(req.func, req.a, req.x, &cfg)?;
    finish(out, req)
}

/// Values at `x` and `-x` from one evaluation of the underlying integrals.
///
/// A `-x` value whose accuracy loss exceeds `loss_flag_digits` is
/// recomputed on its own, where it is the dominant solution.
pub fn evaluate_pair(func: Func, a: f64, x: f64) -> Result<(EvalOutput, EvalOutput)> {
    evaluate_pair_with(func, a, x, &Config::default())
}

pub fn evaluate_pair_with(func: Func, a: f64, x: f64, cfg: &Config) -> Result<(EvalOutput, EvalOutput)> {
    let (p, m) = pair_outputs(func, a, x, cfg)?;
    if m.diagnostics.flagged && m.diagnostics.accuracy_loss_digits > cfg.loss_flag_digits {
        let (direct, _) = pair_outputs(func, a, -x, cfg)?;
        if direct.diagnostics.accuracy_loss_digits < m.diagnostics.accuracy_loss_digits {
            return Ok((p, direct));
        }
    }
    Ok((p, m))
}

fn request_config(tol: f64, cfg: &Config) -> Result<Config> {
    if !(TOL_RANGE.0..=TOL_RANGE.1).contains(&tol) {
        return Err(PcfError::domain(format!(
            "tolerance {tol:e} outside [{:e}, {:e}]",
            TOL_RANGE.0, TOL_RANGE.1
        )));
    }
    Ok(Config { tol, ..*cfg })
}

fn finish(mut out: EvalOutput, req: &EvalRequest) -> Result<EvalOutput> {
    if !req.want_derivative {
        out.derivative = None;
    }
    if !req.want_scaled {
        out.value.to_f64()?;
        if let Some(d) = out.derivative {
            d.to_f64()?;
        }
    }
    Ok(out)
}

fn check_point(a: f64, x: f64) -> Result<()> {
    if !a.is_finite() || !x.is_finite() {
        return Err(PcfError::domain(format!("non-finite input a={a}, x={x}")));
    }
    Ok(())
}

fn in_window(a: f64, x: f64) -> bool {
    x.abs() <= X_SER && a.abs() <= A_SER
}

fn uses_series(a: f64, x: f64, cfg: &Config) -> bool {
    a.abs() < cfg.a_min_quad && in_window(a, x)
}

/// Configuration for quadrature at `|a|` below the usual switch point, used
/// outside the series window.
fn quad_config(a: f64, cfg: &Config) -> Result<Config> {
    if a.abs() >= cfg.a_min_quad {
        return Ok(*cfg);
    }
    if a == 0.0 {
        return Err(PcfError::domain("order zero is only available inside the series window"));
    }
    Ok(Config {
        a_min_quad: a.abs(),
        ..*cfg
    })
}

fn output(value: ScaledReal, derivative: ScaledReal, regime: Regime, diagnostics: Diagnostics) -> EvalOutput {
    EvalOutput {
        value,
        derivative: Some(derivative),
        regime,
        diagnostics,
    }
}

fn pair_outputs(func: Func, a: f64, x: f64, cfg: &Config) -> Result<(EvalOutput, EvalOutput)> {
    check_point(a, x)?;
    if uses_series(a, x, cfg) {
        let (p, m) = series_outputs(func, a, x, cfg)?;
        if a == 0.0 || !(p.diagnostics.flagged || m.diagnostics.flagged) {
            return Ok((p, m));
        }
        let Ok((qp, qm)) = quadrature_outputs(func, a, x, cfg) else {
            return Ok((p, m));
        };
        let better = |s: EvalOutput, q: EvalOutput| if s.diagnostics.flagged && !q.diagnostics.flagged { q } else { s };
        return Ok((better(p, qp), better(m, qm)));
    }
    quadrature_outputs(func, a, x, cfg)
}

fn quadrature_outputs(func: Func, a: f64, x: f64, cfg: &Config) -> Result<(EvalOutput, EvalOutput)> {
    let qcfg = quad_config(a, cfg)?;
    let (mut p, mut m) = match func {
        Func::U | Func::V => {
            let pair = if a > 0.0 {
                u_pos_assemble(a, x, &qcfg)?
            } else {
                uv_neg_pair(-a, x, &qcfg)?
            };
            (uv_output(func, &pair.at_x, cfg), uv_output(func, &pair.at_minus_x, cfg))
        }
        Func::W => {
            let r = w_quadrature(a, x, &qcfg)?;
            let diag = |loss: f64| Diagnostics {
                wronskian_residual: r.wronskian_residual,
                accuracy_loss_digits: loss,
                evaluations: r.quadrature.evaluations,
                oracle_gap: None,
                flagged: loss > cfg.loss_flag_digits,
            };
            (
                output(r.w_plus, r.wp_plus, r.regime, diag(r.plus_loss_digits)),
                output(r.w_minus, r.wp_minus, r.regime, diag(r.accuracy_loss_digits)),
            )
        }
    };
    if cfg.cross_check {
        cross_check(func, a, x, &mut p, cfg);
        cross_check(func, a, -x, &mut m, cfg);
    }
    Ok((p, m))
}

fn uv_output(func: Func, r: &UVResult, cfg: &Config) -> EvalOutput {
    let (value, derivative) = match func {
        Func::U => (r.u, r.du),
        _ => (r.v, r.dv),
    };
    let diag = Diagnostics {
        wronskian_residual: r.wronskian_residual,
        accuracy_loss_digits: 0.0,
        evaluations: r.quadrature.evaluations,
        oracle_gap: r.oracle_gap,
        flagged: r.wronskian_residual > 1e3 * cfg.tol.max(1e-11),
    };
    output(value, derivative, r.regime, diag)
}

fn series_outputs(func: Func, a: f64, x: f64, cfg: &Config) -> Result<(EvalOutput, EvalOutput)> {
    let diag = |s: &SeriesResult, residual: f64| Diagnostics {
        wronskian_residual: residual,
        accuracy_loss_digits: s.cancellation_loss,
        evaluations: s.terms_used,
        oracle_gap: None,
        flagged: s.cancellation_loss > cfg.loss_flag_digits,
    };
    let sr = |s: &SeriesResult| (ScaledReal::from_f64(s.value), ScaledReal::from_f64(s.derivative));
    match func {
        Func::U | Func::V => {
            let here = uv_series(a, x)?;
            let there = uv_series(a, -x)?;
            let pick = |s: &UvSeries| {
                let (u, du) = sr(&s.u);
                let (v, dv) = sr(&s.v);
                let residual = assembled_residual(u, du, v, dv, (2.0 / PI).sqrt());
                let r = if func == Func::U { &s.u } else { &s.v };
                let (value, derivative) = sr(r);
                output(value, derivative, Regime::Series, diag(r, residual))
            };
            Ok((pick(&here), pick(&there)))
        }
        Func::W => {
            let s = w_series(a, x)?;
            let (wp, dwp) = sr(&s.plus);
            let (wm, dwm) = sr(&s.minus);
            let residual = assembled_residual(wp, dwp, -wm, dwm, -1.0);
            Ok((
                output(wp, dwp, Regime::Series, diag(&s.plus, residual)),
                output(wm, dwm, Regime::Series, diag(&s.minus, residual)),
            ))
        }
    }
}

/// Compares a quadrature result with the series where the series is valid.
fn cross_check(func: Func, a: f64, x: f64, out: &mut EvalOutput, cfg: &Config) {
    if !in_window(a, x) {
        return;
    }
    let reference = match func {
        Func::U | Func::V => uv_series(a, x).map(|s| if func == Func::U { s.u } else { s.v }),
        Func::W => w_series(a, x).map(|s| s.plus),
    };
    let Ok(reference) = reference else { return };
    if !reference.is_reliable() {
        return;
    }
    let value_gap = out.value.rel_diff(&ScaledReal::from_f64(reference.value));
    let deriv_gap = out
        .derivative
        .map(|d| d.rel_diff(&ScaledReal::from_f64(reference.derivative)))
        .unwrap_or(0.0);
    let gap = value_gap.max(deriv_gap);
    out.diagnostics.oracle_gap = Some(gap);
    let allowed = 10.0 * cfg.tol * 10f64.powf(reference.cancellation_loss + out.diagnostics.accuracy_loss_digits);
    if gap > allowed {
        out.diagnostics.flagged = true;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(func: Func, a: f64, x: f64) -> EvalOutput {
        evaluate(&EvalRequest::new(func, a, x)).unwrap()
    }

    fn close(out: &EvalOutput, value: f64, derivative: f64, tol: f64) -> bool {
        let v = out.value_f64().unwrap();
        let d = out.derivative_f64().unwrap().unwrap();
        (v - value).abs() <= tol * value.abs() && (d - derivative).abs() <= tol * derivative.abs()
    }

    #[test]
    fn routing_examples() {
        let cfg = Config::default();
        assert_eq!(classify(Func::U, 0.1, 0.5, &cfg).unwrap(), Regime::Series);
        assert_eq!(classify(Func::U, -25.0, 0.0, &cfg).unwrap(), Regime::UNegMid);
        assert_eq!(classify(Func::W, 9.0, 10.0, &cfg).unwrap(), Regime::WPosRight);
        assert_eq!(classify(Func::V, 4.0, -3.0, &cfg).unwrap(), Regime::UPos);
        assert_eq!(classify(Func::U, -4.0, 3.7, &cfg).unwrap(), Regime::UNegNear1);
        assert_eq!(classify(Func::U, -4.0, -5.0, &cfg).unwrap(), Regime::UNegLeft);
        assert_eq!(classify(Func::W, -3.0, 1.0, &cfg).unwrap(), Regime::WNeg);
        assert_eq!(classify(Func::W, 3.0, 1.0, &cfg).unwrap(), Regime::WPosMid);
        assert_eq!(eval(Func::U, 0.1, 0.5).regime, Regime::Series);
        assert_eq!(eval(Func::U, -25.0, 0.0).regime, Regime::UNegMid);
        assert_eq!(eval(Func::W, 9.0, 10.0).regime, Regime::WPosRight);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(evaluate(&EvalRequest::new(Func::U, f64::INFINITY, 0.0)), Err(PcfError::Domain(_))));
        assert!(matches!(evaluate(&EvalRequest::new(Func::V, 1.0, f64::NAN)), Err(PcfError::Domain(_))));
        let mut req = EvalRequest::new(Func::U, 1.0, 1.0);
        req.tol = 1e-3;
        assert!(matches!(evaluate(&req), Err(PcfError::Domain(_))));
        assert!(matches!(evaluate(&EvalRequest::new(Func::U, 0.0, 9.0)), Err(PcfError::Domain(_))));
        assert!("X".parse::<Func>().is_err());
        assert_eq!("w".parse::<Func>().unwrap(), Func::W);
    }

    #[test]
    fn small_order_outside_the_window() {
        let cases = [
            (Func::U, 0.1, 10.0, 3.472_124_986_280_921_9e-12, -1.756_575_088_024_832_2e-11),
            (Func::V, 0.1, 10.0, 22_937_295_727.487_879, 113_755_622_204.802_92),
            (Func::U, -0.1, 10.0, 5.513_713_135_972_134_8e-12, -2.778_613_738_723_794_7e-11),
            (Func::V, -0.3, -8.0, -1_099_545.048_628_946_6, 4_284_882.817_232_334),
            (Func::U, 0.3, -9.0, 865_612_598.866_483_7, -3_875_723_029.292_222_3),
            (Func::W, 0.1, 10.0, 0.242_570_918_634_545_7, -0.415_871_847_252_066_9),
            (Func::W, -0.3, -8.0, -0.557_019_764_065_420_2, -0.954_639_906_450_540_6),
            (Func::W, 0.2, -7.0, -0.121_656_136_025_533_84, -3.711_812_845_747_717),
            (Func::U, -0.2, 7.0, 2.658_850_594_836_179_6e-6, -9.417_104_301_624_896e-6),
        ];
        for (func, a, x, v, d) in cases {
            let out = eval(func, a, x);
            assert_ne!(out.regime, Regime::Series);
            assert!(close(&out, v, d, 1e-10), "{func}({a},{x}) = {:?}", out.value_f64());
        }
    }

    #[test]
    fn lossy_series_values_come_from_quadrature() {
        for (a, x, v, d) in [
            (0.4, 6.0, 2.406_078_261_387_593_7e-5, -7.562_233_271_928_177e-5),
            (-0.3, 5.8, 1.561_059_901_898_780_1e-4, -4.579_151_212_385_346_6e-4),
        ] {
            let out = eval(Func::U, a, x);
            assert_ne!(out.regime, Regime::Series);
            assert!(close(&out, v, d, 1e-13), "U({a},{x}) = {:?}", out.value_f64());
        }
    }

    #[test]
    fn small_negative_orders_near_the_origin() {
        for (a, x, v, d) in [
            (-0.55, 0.2, 0.969_132_745_474_674_1, -0.043_231_361_789_846_057),
            (-0.6, 0.0, 0.932_333_399_457_697_2, 0.125_794_560_293_700_36),
        ] {
            let out = eval(Func::U, a, x);
            assert_eq!(out.regime, Regime::UNegMid);
            assert!(close(&out, v, d, 1e-13), "U({a},{x}) = {:?}", out.value_f64());
        }
    }

    #[test]
    fn overflow_only_on_unscaled_render() {
        let mut req = EvalRequest::new(Func::V, 1.0, 60.0);
        assert!(matches!(evaluate(&req), Err(PcfError::Overflow { .. })));
        req.want_scaled = true;
        let out = evaluate(&req).unwrap();
        assert!(out.value.ln_abs() > 800.0);
        let tiny = eval(Func::U, 1.0, 60.0);
        assert_eq!(tiny.value_f64().unwrap(), 0.0);
        assert!(tiny.value.ln_abs() < -800.0);
    }

    #[test]
    fn pair_matches_single_evaluations() {
        for (func, a, x) in [
            (Func::W, -4.0, 2.0),
            (Func::U, 3.0, 1.5),
            (Func::V, -6.0, 2.0),
            (Func::U, -6.0, -7.5),
            (Func::W, 3.0, 5.0),
            (Func::U, 0.2, 1.0),
        ] {
            let (p, m) = evaluate_pair(func, a, x).unwrap();
            let sp = eval(func, a, x);
            let sm = eval(func, a, -x);
            assert_eq!(p.value, sp.value, "{func}({a},{x})");
            assert_eq!(p.derivative, sp.derivative);
            assert_eq!(m.value, sm.value, "{func}({a},{})", -x);
            assert_eq!(m.derivative, sm.derivative);
        }
    }

    #[test]
    fn pair_costs_one_evaluation() {
        for (func, a, x) in [(Func::U, -9.0, 1.0), (Func::V, 5.0, 2.0), (Func::W, -4.0, 2.0)] {
            let (p, _) = evaluate_pair(func, a, x).unwrap();
            let single = eval(func, a, x);
            let ratio = p.diagnostics.evaluations as f64 / single.diagnostics.evaluations as f64;
            assert!(ratio < 1.2, "{func}: {ratio}");
        }
    }

    #[test]
    fn derivative_can_be_dropped() {
        let mut req = EvalRequest::new(Func::U, 2.0, 1.0);
        req.want_derivative = false;
        assert!(evaluate(&req).unwrap().derivative.is_none());
    }

    #[test]
    fn cross_check_records_gap() {
        let cfg = Config {
            cross_check: true,
            ..Config::default()
        };
        let out = evaluate_with(&EvalRequest::new(Func::U, -3.0, 1.0), &cfg).unwrap();
        let gap = out.diagnostics.oracle_gap.unwrap();
        assert!(gap < 1e-11, "{gap}");
        assert!(!out.diagnostics.flagged);
        let off = Config {
            gamma_perturbation: 1e-6,
            ..cfg
        };
        let out = evaluate_with(&EvalRequest::new(Func::U, -3.0, 1.0), &off).unwrap();
        assert!(out.diagnostics.flagged);
    }

    #[test]
    fn repeat_requests_are_identical() {
        let req = EvalRequest::new(Func::W, 2.5, -1.3);
        assert_eq!(evaluate(&req).unwrap(), evaluate(&req).unwrap());
    }
}
