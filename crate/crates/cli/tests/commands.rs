use std::process::{Command, Output};

fn pcf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcf"))
        .args(args)
        .env_remove("PCF_TOL")
        .output()
        .expect("pcf runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

#[test]
fn eval_prints_one_csv_line() {
    let o = pcf(&["eval", "--func", "U", "--a", "1", "--x", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let fields: Vec<&str> = text.trim_end().split(',').collect();
    assert_eq!(text.lines().count(), 1);
    assert_eq!(fields.len(), 3);
    let value: f64 = fields[0].parse().unwrap();
    assert!((value - 0.378_262_434_740_955_4).abs() < 1e-14);
    assert_eq!(fields[1], "U_POS");
    assert!(fields[2].parse::<f64>().unwrap() < 1e-10);
}

#[test]
fn eval_scaled_adds_a_log_scale_column() {
    let o = pcf(&["eval", "--func", "W", "--a", "2", "--x", "50", "--scaled"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let fields: Vec<&str> = text.trim_end().split(',').collect();
    assert_eq!(fields.len(), 4);
    let m: f64 = fields[0].parse().unwrap();
    assert!((1.0..std::f64::consts::E).contains(&m.abs()));
    assert!(fields[1].parse::<f64>().unwrap().fract() == 0.0);
}

#[test]
fn eval_derivative_target() {
    let o = pcf(&["eval", "--func", "Up", "--a", "1", "--x", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let value: f64 = stdout(&o).split(',').next().unwrap().parse().unwrap();
    assert!(value < 0.0);
}

#[test]
fn eval_rejects_non_finite_order() {
    let o = pcf(&["eval", "--func", "U", "--a", "inf", "--x", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
}

#[test]
fn unscaled_overflow_is_a_domain_error() {
    let o = pcf(&["eval", "--func", "V", "--a", "1", "--x", "60"]);
    assert_eq!(o.status.code(), Some(2));
    let o = pcf(&["eval", "--func", "V", "--a", "1", "--x", "60", "--scaled"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn malformed_flags_exit_with_usage() {
    for args in [
        &["eval", "--func", "Q", "--a", "1", "--x", "1"][..],
        &["eval", "--a", "1"][..],
        &["frobnicate"][..],
        &["table", "--func", "U", "--a", "1:0:1", "--x", "0"][..],
    ] {
        let o = pcf(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"), "{args:?}");
    }
    assert_eq!(pcf(&["--help"]).status.code(), Some(0));
}

#[test]
fn tolerance_from_flag_and_environment() {
    let o = pcf(&["eval", "--func", "U", "--a", "1", "--x", "1", "--tol", "1e-3"]);
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_pcf"))
        .args(["eval", "--func", "U", "--a", "1", "--x", "1"])
        .env("PCF_TOL", "1e-2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_pcf"))
        .args(["eval", "--func", "U", "--a", "1", "--x", "1", "--tol", "1e-10"])
        .env("PCF_TOL", "1e-2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn table_three_by_three() {
    let o = pcf(&["table", "--func", "V", "--a", "-1:1:1", "--x", "0:2:1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "a,x,value,log_scale,regime,residual");
    assert_eq!(lines.len(), 10);
    let keys: Vec<(String, String)> = lines[1..]
        .iter()
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[1].to_string())
        })
        .collect();
    assert_eq!(keys[0], ("-1".into(), "0".into()));
    assert_eq!(keys[1], ("-1".into(), "1".into()));
    assert_eq!(keys[3], ("0".into(), "0".into()));
}

#[test]
fn table_json_mirrors_csv() {
    let csv = stdout(&pcf(&["table", "--func", "W", "--a", "1:2:1", "--x", "-1:1:1", "--scaled"]));
    let json = stdout(&pcf(&[
        "table", "--func", "W", "--a", "1:2:1", "--x", "-1:1:1", "--scaled", "--format", "json",
    ]));
    let records: Vec<serde_json::Value> = serde_json::from_str(&json).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(records.len(), rows.len());
    for (rec, row) in records.iter().zip(rows) {
        let f: Vec<&str> = row.split(',').collect();
        let obj = rec.as_object().unwrap();
        let keys: Vec<&str> = obj.keys().map(String::as_str).collect();
        assert_eq!(keys.len(), 6);
        for (k, field) in ["a", "x", "value", "log_scale", "residual"].iter().zip([0, 1, 2, 3, 5]) {
            assert_eq!(obj[*k].as_f64().unwrap(), f[field].parse::<f64>().unwrap(), "{k}");
        }
        assert_eq!(obj["regime"].as_str().unwrap(), f[4]);
    }
}

#[test]
fn table_writes_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.csv");
    let o = pcf(&["table", "--func", "U", "--a", "2", "--x", "0:1:0.5", "-o", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 4);
}

#[test]
fn table_row_cap_is_a_domain_error() {
    let o = pcf(&["table", "--func", "U", "--a", "0:1000:0.0001", "--x", "0:10:0.001"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn contour_dumps_for_the_mid_range_paths() {
    for t in ["0.1", "0.5", "0.9"] {
        let o = pcf(&["contour", "--regime", "U_NEG_MID", "--t", t]);
        assert_eq!(o.status.code(), Some(0));
        let text = stdout(&o);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("param,u,v,r,residual"));
        let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|f| f.parse().unwrap()).collect()).collect();
        assert_eq!(rows.len(), 64);
        // one end at the origin, the other out along the real axis
        let (first, last) = (&rows[0], rows.last().unwrap());
        let (near, far) = if first[3] < last[3] { (first, last) } else { (last, first) };
        assert!(near[3] < 0.2, "t={t}: nearest end at r={}", near[3]);
        assert!(far[3] > 3.0 && far[2].abs() < far[1].abs(), "t={t}");
        // the saddle it + sqrt(1 - t^2) lies on the unit circle
        let closest = rows.iter().map(|r| (r[3] - 1.0).abs()).fold(f64::INFINITY, f64::min);
        assert!(closest < 0.1, "t={t}: passes the saddle at distance {closest}");
        assert!(rows.iter().all(|r| r[4] <= 1e-12));
    }
}

#[test]
fn contour_upos_is_even() {
    let text = stdout(&pcf(&["contour", "--regime", "U_POS", "--t", "1"]));
    let rows: Vec<Vec<f64>> = text.lines().skip(1).map(|l| l.split(',').map(|f| f.parse().unwrap()).collect()).collect();
    let n = rows.len();
    for k in 0..n / 2 {
        assert!((rows[k][0] + rows[n - 1 - k][0]).abs() < 1e-14);
        assert!((rows[k][3] - rows[n - 1 - k][3]).abs() <= 1e-13 * rows[k][3]);
    }
}

#[test]
fn contour_traced_path_near_the_turning_point() {
    let o = pcf(&["contour", "--regime", "W_POS_MID", "--t", "0.99"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.lines().skip(1).all(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap() <= 1e-10));
}

#[test]
fn contour_rejects_bad_regimes() {
    assert_eq!(pcf(&["contour", "--regime", "NOPE", "--t", "0.5"]).status.code(), Some(2));
    assert_eq!(pcf(&["contour", "--regime", "U_NEG_RIGHT", "--t", "0.5"]).status.code(), Some(2));
}

#[test]
fn selftest_subset() {
    let o = pcf(&["selftest", "--criteria", "5,6"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.lines().all(|l| !l.starts_with("[FAIL]")));
    assert_eq!(pcf(&["selftest", "--criteria", "9"]).status.code(), Some(1));
}
