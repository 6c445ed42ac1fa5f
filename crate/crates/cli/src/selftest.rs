//! The acceptance grid: Wronskian identities, agreement with the series,
//! connection formulas, continuity across the turning points, asymptotic
//! pins, contour validity, large-order scaling and determinism.

use std::collections::BTreeMap;
use std::f64::consts::{E, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pcf_core::api::{evaluate_with, Config, EvalOutput, EvalRequest, Func};
use pcf_core::contours::{sample_contour, Regime};
use pcf_core::scalar::{phase_gamma_half, recip_gamma, rho_star, sin_cos_pi};
use pcf_core::series::{uv_series, w_series, SeriesResult, MAX_CANCELLATION_LOSS};
use pcf_core::ureg::{quad_i, u_pos_assemble, uv_neg_mid, uv_neg_near1, uv_neg_pair, uv_neg_right, UVResult};
use pcf_core::wreg::{neg_line_phase, w_pos_mid, w_quadrature, WResult};
use pcf_core::{PcfError, ScaledReal};

use crate::render::general;
use crate::table::{self, Format, TableSpec};

/// Every criterion, in report order.
pub const ALL_CRITERIA: [u8; 8] = [1, 2, 3, 4, 5, 6, 7, 8];

/// Outcome of one check over a grid of cells.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub criterion: u8,
    pub label: String,
    pub limit: f64,
    pub worst: f64,
    pub cells: usize,
    pub skipped: usize,
    /// Cells that exceeded the limit or failed to evaluate.
    pub failures: Vec<String>,
}

impl Check {
    fn new(criterion: u8, label: &str, limit: f64) -> Self {
        Check {
            criterion,
            label: label.to_string(),
            limit,
            worst: 0.0,
            cells: 0,
            skipped: 0,
            failures: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn record(&mut self, cell: impl FnOnce() -> String, value: f64) {
        self.cells += 1;
        if value.is_nan() || value > self.worst {
            self.worst = if value.is_nan() { f64::NAN } else { value };
        }
        if !(value <= self.limit) {
            self.failures.push(format!("{}: {}", cell(), general(value, 3)));
        }
    }

    fn fail(&mut self, cell: String, err: impl std::fmt::Display) {
        self.cells += 1;
        self.failures.push(format!("{cell}: {err}"));
    }

    fn skip(&mut self) {
        self.skipped += 1;
    }

    /// One report line.
    pub fn summary(&self) -> String {
        let mut line = format!(
            "[{}] {}. {}: worst {} (limit {}, {} cells",
            if self.passed() { "PASS" } else { "FAIL" },
            self.criterion,
            self.label,
            general(self.worst, 3),
            general(self.limit, 3),
            self.cells
        );
        if self.skipped > 0 {
            line.push_str(&format!(", {} skipped", self.skipped));
        }
        line.push(')');
        line
    }
}

/// All checks plus the largest Wronskian residual seen per family.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
    pub families: BTreeMap<String, f64>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    /// Whether every check of `criterion` passed; `None` if none ran.
    pub fn criterion_passed(&self, criterion: u8) -> Option<bool> {
        let mut it = self.checks.iter().filter(|c| c.criterion == criterion).peekable();
        it.peek()?;
        Some(it.all(Check::passed))
    }

    fn family(&mut self, name: &str, residual: f64) {
        let e = self.families.entry(name.to_string()).or_insert(0.0);
        if residual > *e || residual.is_nan() {
            *e = residual;
        }
    }

    /// The report as printed by the `selftest` command.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&c.summary());
            out.push('\n');
            for f in &c.failures {
                out.push_str("    failing cell ");
                out.push_str(f);
                out.push('\n');
            }
        }
        if !self.families.is_empty() {
            out.push_str("max Wronskian residual per family:\n");
            for (name, r) in &self.families {
                out.push_str(&format!("    {name}: {}\n", general(*r, 3)));
            }
        }
        out
    }
}

/// Runs the selected criteria.
pub fn run(criteria: &[u8], cfg: &Config) -> Report {
    let mut report = Report::default();
    for &c in criteria {
        match c {
            1 => wronskians(cfg, &mut report),
            2 => oracle(cfg, &mut report),
            3 => connections(cfg, &mut report),
            4 => turning_points(cfg, &mut report),
            5 => asymptotic_pins(cfg, &mut report),
            6 => contours(&mut report),
            7 => scaling(cfg, &mut report),
            8 => determinism(cfg, &mut report),
            _ => {}
        }
    }
    report
}

fn x_of(a: f64, t: f64) -> f64 {
    2.0 * t * a.abs().sqrt()
}

fn cell(a: f64, t: f64) -> String {
    format!("a={a} t={t}")
}

fn wronskians(cfg: &Config, report: &mut Report) {
    let mut check = Check::new(1, "Wronskian of the positive-order integrals", 1e-8);
    for a in [1.0, 5.0, 25.0, 100.0, 1e3] {
        for t in [0.01, 0.1, 1.0, 5.0] {
            match u_pos_assemble(a, x_of(a, t), cfg) {
                Ok(p) => {
                    let r = p.at_x.wronskian_residual.max(p.at_minus_x.wronskian_residual);
                    report.family("U_POS", r);
                    check.record(|| cell(a, t), r);
                }
                Err(e) => check.fail(cell(a, t), e),
            }
        }
    }
    report.checks.push(check);

    let mut check = Check::new(1, "Wronskian of the negative-order mid-range integrals", 1e-8);
    for a in [5.0, 25.0, 100.0, 1e3] {
        for t in [-0.85, -0.5, -0.2, 0.2, 0.5, 0.85] {
            match uv_neg_mid(a, x_of(a, t), cfg) {
                Ok(r) => {
                    report.family("U_NEG_MID", r.wronskian_residual);
                    check.record(|| cell(-a, t), r.wronskian_residual);
                }
                Err(e) => check.fail(cell(-a, t), e),
            }
        }
    }
    report.checks.push(check);

    let mut check = Check::new(1, "Wronskian of the negative-order oscillatory integrals", 1e-8);
    for a in [5.0, 100.0] {
        for t in [1.2, 3.0, 10.0] {
            match uv_neg_right(a, x_of(a, t), cfg) {
                Ok(r) => {
                    report.family("U_NEG_RIGHT", r.wronskian_residual);
                    check.record(|| cell(-a, t), r.wronskian_residual);
                }
                Err(e) => check.fail(cell(-a, t), e),
            }
        }
    }
    report.checks.push(check);

    let mut check = Check::new(1, "Wronskian of W", 1e-8);
    for a in [-1e3, -10.0, -2.0, 2.0, 10.0, 1e3] {
        for t in [0.0, 0.5, 3.0] {
            match w_quadrature(a, x_of(a, t), cfg) {
                Ok(r) if r.accuracy_loss_digits.max(r.plus_loss_digits) > 4.0 => check.skip(),
                Ok(r) => {
                    report.family("W", r.wronskian_residual);
                    check.record(|| cell(a, t), r.wronskian_residual);
                }
                Err(e) => check.fail(cell(a, t), e),
            }
        }
    }
    report.checks.push(check);
}

fn rel_gap(got: Option<ScaledReal>, want: f64) -> f64 {
    match got {
        Some(g) => g.rel_diff(&ScaledReal::from_f64(want)),
        None => f64::NAN,
    }
}

fn request(func: Func, a: f64, x: f64, cfg: &Config) -> EvalRequest {
    EvalRequest {
        want_scaled: true,
        tol: cfg.tol,
        ..EvalRequest::new(func, a, x)
    }
}

/// Seed of the pseudo-random oracle points.
pub const ORACLE_SEED: u64 = 0x5eed_0f9c;

fn oracle(cfg: &Config, report: &mut Report) {
    let mut check = Check::new(2, "quadrature against the series, U V W and derivatives", 1e-9);
    let mut rng = ChaCha8Rng::seed_from_u64(ORACLE_SEED);
    for _ in 0..200 {
        let mag: f64 = rng.gen_range(0.5..=10.0);
        let a = if rng.gen_bool(0.5) { mag } else { -mag };
        let x: f64 = rng.gen_range(-5.0..=5.0);
        let series: [(Func, Result<SeriesResult, PcfError>); 3] = [
            (Func::U, uv_series(a, x).map(|s| s.u)),
            (Func::V, uv_series(a, x).map(|s| s.v)),
            (Func::W, w_series(a, x).map(|s| s.plus)),
        ];
        for (func, reference) in series {
            let name = || format!("{func}(a={a}, x={x})");
            let reference = match reference {
                Ok(r) => r,
                Err(e) => {
                    check.fail(name(), e);
                    continue;
                }
            };
            let out = match evaluate_with(&request(func, a, x, cfg), cfg) {
                Ok(o) => o,
                Err(e) => {
                    check.fail(name(), e);
                    continue;
                }
            };
            if reference.cancellation_loss > MAX_CANCELLATION_LOSS {
                check.skip();
                continue;
            }
            check.record(name, rel_gap(Some(out.value), reference.value));
            check.record(|| format!("{func}'(a={a}, x={x})"), rel_gap(out.derivative, reference.derivative));
        }
    }
    report.checks.push(check);
}

/// `|sum(terms)| / max|term|`, the residual of an identity `sum = 0`.
fn identity_residual(terms: &[ScaledReal]) -> f64 {
    let total = terms.iter().fold(ScaledReal::ZERO, |acc, t| acc.add(*t));
    let scale = terms.iter().map(|t| t.ln_abs()).fold(f64::NEG_INFINITY, f64::max);
    if total.is_zero() {
        0.0
    } else {
        (total.ln_abs() - scale).exp()
    }
}

struct UvAt {
    u: EvalOutput,
    v: EvalOutput,
}

fn uv_at(a: f64, x: f64, cfg: &Config) -> Result<UvAt, PcfError> {
    Ok(UvAt {
        u: evaluate_with(&request(Func::U, a, x, cfg), cfg)?,
        v: evaluate_with(&request(Func::V, a, x, cfg), cfg)?,
    })
}

fn d(o: &EvalOutput) -> ScaledReal {
    o.derivative.expect("derivative requested")
}

fn connections(cfg: &Config, report: &mut Report) {
    let points = [
        (1.3, 0.7),
        (4.2, 3.0),
        (25.6, -10.0),
        (0.3, 2.0),
        (-0.3, 4.0),
        (-3.7, 1.0),
        (-3.7, 3.6),
        (-3.7, 6.0),
        (-3.7, -6.0),
        (-12.4, 0.3),
        (-12.4, -6.9),
        (-12.4, 8.0),
        (-12.4, -9.0),
        (-40.3, -20.0),
        (-40.3, 14.0),
    ];
    let mut wr_uv = Check::new(3, "Wronskian of U and V from independent evaluations", 1e-8);
    let mut wr_uu = Check::new(3, "Wronskian of U(a,x) and U(a,-x)", 1e-8);
    let mut conn = Check::new(3, "connection formulas between U and V at x and -x", 1e-8);
    for (a, x) in points {
        let name = || format!("a={a} x={x}");
        let (here, there) = match (uv_at(a, x, cfg), uv_at(a, -x, cfg)) {
            (Ok(h), Ok(t)) => (h, t),
            (Err(e), _) | (_, Err(e)) => {
                conn.fail(name(), e);
                continue;
            }
        };
        let sqrt_2_pi = ScaledReal::from_f64((2.0 / PI).sqrt());
        wr_uv.record(name, identity_residual(&[here.u.value * d(&here.v), -(d(&here.u) * here.v.value), -sqrt_2_pi]));

        let rg = recip_gamma(a + 0.5);
        let target = ScaledReal::from_f64((2.0 * PI).sqrt() * rg);
        wr_uu.record(name, identity_residual(&[-(here.u.value * d(&there.u)), -(d(&here.u) * there.u.value), -target]));

        let (s, c) = sin_cos_pi(a);
        // pi V(x) / Gamma(a+1/2) = sin(pi a) U(x) + U(-x)
        let second = identity_residual(&[
            here.v.value.scale(PI * rg),
            -here.u.value.scale(s),
            -there.u.value,
        ]);
        // cos^2(pi a) U(x) = pi / Gamma(a+1/2) (V(-x) - sin(pi a) V(x))
        let first = identity_residual(&[
            here.u.value.scale(c * c),
            -there.v.value.scale(PI * rg),
            here.v.value.scale(PI * rg * s),
        ]);
        conn.record(name, second.max(first));
    }
    report.checks.push(wr_uv);
    report.checks.push(wr_uu);
    report.checks.push(conn);
}

fn uv_gap(p: &UVResult, q: &UVResult) -> f64 {
    [(p.u, q.u), (p.du, q.du), (p.v, q.v), (p.dv, q.dv)]
        .iter()
        .map(|(a, b)| a.rel_diff(b))
        .fold(0.0, f64::max)
}

fn w_gap(p: &WResult, q: &WResult) -> f64 {
    p.w_plus.rel_diff(&q.w_plus).max(p.wp_plus.rel_diff(&q.wp_plus))
}

/// Trapezoid consistency of `(f, f')` at two nearby points, with `f''`
/// supplied by the differential equation through `curv(x) f`, relative to
/// the size of `f` and `f'`.
fn bridge(x1: f64, f1: ScaledReal, d1: ScaledReal, x2: f64, f2: ScaledReal, d2: ScaledReal, curv: impl Fn(f64) -> f64) -> f64 {
    let h = x2 - x1;
    let size = [f1, f2, d1, d2].iter().map(|v| v.ln_abs()).fold(f64::NEG_INFINITY, f64::max);
    let gap = |terms: [ScaledReal; 4]| {
        let total = terms.iter().fold(ScaledReal::ZERO, |acc, t| acc.add(*t));
        if total.is_zero() {
            0.0
        } else {
            (total.ln_abs() - size).exp()
        }
    };
    let value = gap([f2, -f1, -d1.scale(0.5 * h), -d2.scale(0.5 * h)]);
    let slope = gap([d2, -d1, -f1.scale(0.5 * h * curv(x1)), -f2.scale(0.5 * h * curv(x2))]);
    value.max(slope)
}

fn all_finite(values: &[ScaledReal]) -> bool {
    values.iter().all(|v| v.is_finite())
}

fn turning_points(cfg: &Config, report: &mut Report) {
    let order: f64 = 10.0;
    let sa = order.sqrt();
    let sweep: Vec<f64> = (0..=30).map(|k| 0.85 + 0.01 * k as f64).collect();

    let mut finite = Check::new(4, "finite values across the turning points, |t| from 0.85 to 1.15", 0.0);
    for &tt in &sweep {
        for t in [tt, -tt] {
            for (func, a) in [(Func::U, -order), (Func::V, -order), (Func::W, order), (Func::W, -order)] {
                let x = x_of(a, t);
                let name = || format!("{func} a={a} t={t}");
                match evaluate_with(&request(func, a, x, cfg), cfg) {
                    Ok(o) => finite.record(name, if all_finite(&[o.value, d(&o)]) { 0.0 } else { f64::INFINITY }),
                    Err(e) => finite.fail(name(), e),
                }
            }
        }
    }
    report.checks.push(finite);

    let mut overlap = Check::new(4, "overlap of adjacent representations near the turning points", 1e-7);
    for tt in [0.85, 0.87, 0.89, 0.92, 0.95] {
        for t in [tt, -tt] {
            let x = 2.0 * t * sa;
            match (uv_neg_mid(order, x, cfg), uv_neg_near1(order, x, cfg)) {
                (Ok(p), Ok(q)) => overlap.record(|| format!("U,V a={} t={t}", -order), uv_gap(&p, &q)),
                (Err(e), _) | (_, Err(e)) => overlap.fail(format!("U,V a={} t={t}", -order), e),
            }
        }
    }
    let traced = Config { collar: 1e-3, ..*cfg };
    let line = Config { collar: 0.5, ..*cfg };
    for t in [0.6, 0.95, 0.985] {
        let x = 2.0 * t * sa;
        match (w_pos_mid(order, x, &traced), w_pos_mid(order, x, &line)) {
            (Ok(p), Ok(q)) => overlap.record(|| format!("W a={order} t={t}"), w_gap(&p, &q)),
            (Err(e), _) | (_, Err(e)) => overlap.fail(format!("W a={order} t={t}"), e),
        }
    }
    let h = 1e-5;
    for side in [1.0, -1.0] {
        let (x1, x2) = (2.0 * side * (1.0 - h) * sa, 2.0 * side * (1.0 + h) * sa);
        let uv1 = uv_neg_pair(order, x1, cfg);
        let uv2 = uv_neg_pair(order, x2, cfg);
        let name = format!("U,V a={} across t={side}", -order);
        match (uv1, uv2) {
            (Ok(p), Ok(q)) => {
                let curv = |x: f64| 0.25 * x * x - order;
                let (p, q) = (p.at_x, q.at_x);
                let gap = bridge(x1, p.u, p.du, x2, q.u, q.du, curv).max(bridge(x1, p.v, p.dv, x2, q.v, q.dv, curv));
                overlap.record(|| name, gap);
            }
            (Err(e), _) | (_, Err(e)) => overlap.fail(name, e),
        }
        for a in [order, -order] {
            let name = format!("W a={a} across t={side}");
            match (w_quadrature(a, x1, cfg), w_quadrature(a, x2, cfg)) {
                (Ok(p), Ok(q)) => {
                    let curv = |x: f64| a - 0.25 * x * x;
                    overlap.record(|| name, bridge(x1, p.w_plus, p.wp_plus, x2, q.w_plus, q.wp_plus, curv));
                }
                (Err(e), _) | (_, Err(e)) => overlap.fail(name, e),
            }
        }
    }
    report.checks.push(overlap);
}

/// `rho*(a)` from its first five asymptotic terms.
pub fn rho_star_asymptotic(a: f64) -> f64 {
    let coeffs = [1.0 / 12.0, -13.0 / 720.0, 37.0 / 20160.0, -29.0 / 26880.0, -1129.0 / 1_520_640.0];
    let inv2 = 1.0 / (a * a);
    let sum: f64 = coeffs.iter().rev().fold(0.0, |acc, c| acc * inv2 + c);
    0.25 * a * (0.25 * inv2).ln_1p() - sum / (2.0 * a)
}

fn asymptotic_pins(cfg: &Config, report: &mut Report) {
    let mut check = Check::new(5, "U(1,50) against its leading asymptotic form", 5e-3);
    match evaluate_with(&request(Func::U, 1.0, 50.0, cfg), cfg) {
        Ok(o) => {
            let ln_expect = -625.0 - 1.5 * 50f64.ln();
            check.record(|| "U(1,50)".into(), (o.value.ln_abs() - ln_expect).exp_m1().abs());
        }
        Err(e) => check.fail("U(1,50)".into(), e),
    }
    report.checks.push(check);

    let mut check = Check::new(5, "positive-order integral at a=1e4, t=1 against Laplace's method", 1e-3);
    let a: f64 = 1e4;
    match quad_i(a, x_of(a, 1.0), cfg) {
        Ok((i, _, _)) => {
            let expect = PI.sqrt() / (a.sqrt() * 2f64.powf(0.25));
            check.record(|| "I(1e4, t=1)".into(), (i / expect - 1.0).abs());
        }
        Err(e) => check.fail("I(1e4, t=1)".into(), e),
    }
    report.checks.push(check);

    let mut check = Check::new(5, "rho*(100) against its five-term expansion", 1e-8);
    let series = rho_star_asymptotic(100.0);
    let direct = 0.5 * phase_gamma_half(100.0) + 50.0 - 50.0 * 100f64.ln();
    check.record(|| "rho*(100) library".into(), (rho_star(100.0) - series).abs());
    check.record(|| "rho*(100) from the gamma phase".into(), (direct - series).abs());
    report.checks.push(check);
}

fn contours(report: &mut Report) {
    let cells: [(Regime, &[f64]); 5] = [
        (Regime::UPos, &[0.0, 0.5, 1.0, 3.0]),
        (Regime::UNegMid, &[0.3, 0.6, 0.85]),
        (Regime::UNegRight, &[1.01, 1.5, 3.0]),
        (Regime::UNegLeft, &[-1.5, -3.0]),
        (Regime::WPosMid, &[0.0, 0.5, 0.9, 0.99]),
    ];
    let mut check = Check::new(6, "contours satisfy their level-curve equation at 64 points", 1e-12);
    for (regime, ts) in cells {
        for &t in ts {
            let name = || format!("{regime} t={t}");
            match sample_contour(regime, t, 64) {
                Ok(points) => {
                    let worst = points.iter().map(|p| p.on_path_residual).fold(0.0, f64::max);
                    check.record(name, worst);
                }
                Err(e) => check.fail(name(), e),
            }
        }
    }
    report.checks.push(check);

    let mut check = Check::new(6, "Taylor coefficients of the negative-order line phase at t=0.7", 1e-6);
    let t: f64 = 0.7;
    let up = (t + (t * t + 1.0).sqrt()) / 2f64.sqrt();
    let psi = |q: f64| neg_line_phase(t, q);
    let second = |h: f64| (psi(h) + psi(-h)) / (2.0 * h * h);
    let third = |h: f64| (psi(2.0 * h) - psi(-2.0 * h) - 2.0 * (psi(h) - psi(-h))) / (12.0 * h * h * h);
    let h = 1e-2;
    let c2 = (4.0 * second(h / 2.0) - second(h)) / 3.0;
    let c3 = (4.0 * third(h / 2.0) - third(h)) / 3.0;
    let want2 = (1.0 + 2.0 * up * up) / (4.0 * up * up);
    let want3 = num_pair(1.0, -1.0, 12.0 * up.powi(3));
    check.record(|| "q^2 coefficient".into(), ((c2.re - want2).hypot(c2.im)) / want2);
    check.record(
        || "q^3 coefficient".into(),
        (c3.re - want3.0).hypot(c3.im - want3.1) / want3.0.hypot(want3.1),
    );
    report.checks.push(check);
}

fn num_pair(re: f64, im: f64, den: f64) -> (f64, f64) {
    (re / den, im / den)
}

fn scaling(cfg: &Config, report: &mut Report) {
    let mut check = Check::new(7, "order 1e4: normalized scaled values and overflow reporting", 0.0);
    let mut overflowed = 0;
    for a in [1e4, -1e4] {
        for t in [0.5, 2.0] {
            for func in [Func::U, Func::V, Func::W] {
                let x = x_of(a, t);
                let name = || format!("{func} a={a} t={t}");
                let out = match evaluate_with(&request(func, a, x, cfg), cfg) {
                    Ok(o) => o,
                    Err(e) => {
                        check.fail(name(), e);
                        continue;
                    }
                };
                let normal = |v: &ScaledReal| v.is_zero() || (v.is_finite() && (1.0..E).contains(&v.significand().abs()));
                let mut bad = !normal(&out.value) || !normal(&d(&out));
                let unscaled = evaluate_with(&EvalRequest { want_scaled: false, ..request(func, a, x, cfg) }, cfg);
                let too_big = out.value.ln_abs().max(d(&out).ln_abs()) > f64::MAX.ln();
                match unscaled {
                    Err(PcfError::Overflow { .. }) if too_big => overflowed += 1,
                    Ok(u) if !too_big => {
                        let plain = u.value_f64().unwrap_or(f64::NAN);
                        let expect = out.value.to_f64_lossy();
                        bad |= plain != expect;
                    }
                    _ => bad = true,
                }
                check.record(name, if bad { 1.0 } else { 0.0 });
            }
        }
    }
    check.record(|| "at least one value overflows a double".into(), if overflowed > 0 { 0.0 } else { 1.0 });
    report.checks.push(check);
}

/// The table rendered by the determinism check.
pub fn determinism_spec(format: Format) -> TableSpec {
    TableSpec {
        target: "U".parse().expect("valid target"),
        a: "-3:3:1.5".parse().expect("valid range"),
        x: "-2:2:1".parse().expect("valid range"),
        format,
        scaled: true,
    }
}

fn determinism(cfg: &Config, report: &mut Report) {
    let mut check = Check::new(8, "table output is byte-identical on rerun", 0.0);
    for format in [Format::Csv, Format::Json] {
        let spec = determinism_spec(format);
        let name = || format!("{format:?} table");
        match (table::render(&spec, cfg), table::render(&spec, cfg)) {
            (Ok(first), Ok(second)) => check.record(name, if first == second { 0.0 } else { 1.0 }),
            (Err(e), _) | (_, Err(e)) => check.fail(name(), e),
        }
    }
    report.checks.push(check);
}
