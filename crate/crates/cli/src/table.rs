//! Grids of values in CSV or JSON.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;

use pcf_core::api::{evaluate_with, Config, EvalRequest, Func};

use crate::render::{g17, scaled_fields};
use crate::CliError;

/// Largest number of rows a table may have.
pub const MAX_ROWS: usize = 10_000_000;

/// A function or its derivative, named `U`, `Up`, `V`, `Vp`, `W` or `Wp`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Target {
    pub func: Func,
    pub derivative: bool,
}

impl FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (name, derivative) = match s.strip_suffix('p') {
            Some(n) => (n, true),
            None => (s, false),
        };
        let func = match name {
            "U" => Func::U,
            "V" => Func::V,
            "W" => Func::W,
            _ => return Err(format!("unknown function {s}; expected U, V, W, Up, Vp or Wp")),
        };
        Ok(Target { func, derivative })
    }
}

/// Inclusive arithmetic progression `lo, lo + step, ...` up to `hi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Range {
    pub fn len(&self) -> usize {
        if self.hi == self.lo {
            return 1;
        }
        let span = (self.hi - self.lo) / self.step;
        (span * (1.0 + 1e-12)).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.step
    }
}

impl FromStr for Range {
    type Err = String;

    /// `lo:hi:step`, or a single value.
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |p: &str| p.trim().parse::<f64>().map_err(|_| format!("bad number {p:?} in range {s:?}"));
        let range = match parts.as_slice() {
            [v] => {
                let v = num(v)?;
                Range { lo: v, hi: v, step: 1.0 }
            }
            [lo, hi, step] => Range {
                lo: num(lo)?,
                hi: num(hi)?,
                step: num(step)?,
            },
            _ => return Err(format!("range {s:?} must be lo:hi:step or a single value")),
        };
        if !(range.lo.is_finite() && range.hi.is_finite() && range.step.is_finite()) {
            return Err(format!("range {s:?} must be finite"));
        }
        if !(range.step > 0.0) || range.hi < range.lo {
            return Err(format!("range {s:?} needs step > 0 and hi >= lo"));
        }
        Ok(range)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format {s}; expected csv or json")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TableSpec {
    pub target: Target,
    pub a: Range,
    pub x: Range,
    pub format: Format,
    pub scaled: bool,
}

impl TableSpec {
    pub fn rows(&self) -> Result<usize, CliError> {
        let (na, nx) = (self.a.len(), self.x.len());
        na.checked_mul(nx)
            .filter(|&n| n <= MAX_ROWS)
            .ok_or_else(|| CliError::Domain(format!("table would have {na} x {nx} rows; the limit is {MAX_ROWS}")))
    }
}

struct Row {
    a: f64,
    x: f64,
    value: String,
    log_scale: String,
    regime: &'static str,
    residual: f64,
}

fn row(spec: &TableSpec, cfg: &Config, a: f64, x: f64) -> Result<Row, CliError> {
    let req = EvalRequest {
        func: spec.target.func,
        a,
        x,
        want_derivative: spec.target.derivative,
        want_scaled: spec.scaled,
        tol: cfg.tol,
    };
    let out = evaluate_with(&req, cfg)?;
    let v = if spec.target.derivative {
        out.derivative.expect("derivative requested")
    } else {
        out.value
    };
    let (value, log_scale) = scaled_fields(&v, spec.scaled)?;
    Ok(Row {
        a,
        x,
        value,
        log_scale,
        regime: out.regime.name(),
        residual: out.diagnostics.wronskian_residual,
    })
}

/// Evaluates the grid in parallel and renders it in `a`-major order.
pub fn render(spec: &TableSpec, cfg: &Config) -> Result<String, CliError> {
    let n = spec.rows()?;
    let nx = spec.x.len();
    let rows: Vec<Result<Row, CliError>> = (0..n)
        .into_par_iter()
        .map(|k| row(spec, cfg, spec.a.value(k / nx), spec.x.value(k % nx)))
        .collect();
    let mut out = String::new();
    match spec.format {
        Format::Csv => {
            out.push_str("a,x,value,log_scale,regime,residual\n");
            for r in rows {
                let r = r?;
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    g17(r.a),
                    g17(r.x),
                    r.value,
                    r.log_scale,
                    r.regime,
                    g17(r.residual)
                );
            }
        }
        Format::Json => {
            out.push('[');
            for (i, r) in rows.into_iter().enumerate() {
                let r = r?;
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(
                    out,
                    "\n  {{\"a\": {}, \"x\": {}, \"value\": {}, \"log_scale\": {}, \"regime\": \"{}\", \"residual\": {}}}",
                    json_number(&g17(r.a)),
                    json_number(&g17(r.x)),
                    json_number(&r.value),
                    json_number(&r.log_scale),
                    r.regime,
                    json_number(&g17(r.residual))
                );
            }
            out.push_str("\n]\n");
        }
    }
    Ok(out)
}

/// JSON has no infinities or NaN; those become `null`.
fn json_number(s: &str) -> &str {
    match s {
        "nan" | "inf" | "-inf" => "null",
        _ => s,
    }
}
