use proptest::prelude::*;

use pcf_core::api::{classify, evaluate, evaluate_pair, Config, EvalRequest, Func};
use pcf_core::series::{uv_series, w_series};
use pcf_core::contours::Regime;
use pcf_core::wreg::w_quadrature;
use pcf_core::{PcfError, ScaledReal};

fn func() -> impl Strategy<Value = Func> {
    prop_oneof![Just(Func::U), Just(Func::V), Just(Func::W)]
}

fn order() -> impl Strategy<Value = f64> {
    prop_oneof![-60.0f64..-0.5, 0.5f64..60.0]
}

fn scaled(func: Func, a: f64, x: f64) -> EvalRequest {
    EvalRequest {
        want_scaled: true,
        ..EvalRequest::new(func, a, x)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn identical_requests_give_identical_outputs(f in func(), a in order(), x in -30.0f64..30.0) {
        let req = scaled(f, a, x);
        let first = evaluate(&req);
        let second = evaluate(&req);
        prop_assert_eq!(first, second);
        prop_assert_eq!(classify(f, a, x, &Config::default()), classify(f, a, x, &Config::default()));
    }

    #[test]
    fn unscaled_value_is_the_rendered_scaled_value(f in func(), a in order(), x in -40.0f64..40.0) {
        let s = evaluate(&scaled(f, a, x)).unwrap();
        match evaluate(&EvalRequest::new(f, a, x)) {
            Ok(plain) => {
                let v = plain.value_f64().unwrap();
                let want = s.value.significand() * s.value.log_scale().exp();
                prop_assert!((v - want).abs() <= want.abs() * 4.0 * f64::EPSILON, "{} vs {}", v, want);
                prop_assert_eq!(v, s.value.to_f64_lossy());
            }
            Err(PcfError::Overflow { .. }) => {
                let d = s.derivative.unwrap();
                prop_assert!(s.value.ln_abs().max(d.ln_abs()) > f64::MAX.ln());
            }
            Err(e) => prop_assert!(false, "unexpected {e}"),
        }
    }

    #[test]
    fn significand_is_normalized(f in func(), a in order(), x in -40.0f64..40.0) {
        let s = evaluate(&scaled(f, a, x)).unwrap();
        for v in [s.value, s.derivative.unwrap()] {
            prop_assert!(v.is_zero() || (1.0..std::f64::consts::E).contains(&v.significand().abs()));
        }
    }

    #[test]
    fn u_is_positive_for_positive_order(a in 0.5f64..200.0, x in -30.0f64..30.0) {
        let s = evaluate(&scaled(Func::U, a, x)).unwrap();
        prop_assert!(s.value.signum() > 0.0);
    }

    #[test]
    fn uv_wronskian_holds(a in order(), x in -25.0f64..25.0) {
        let u = evaluate(&scaled(Func::U, a, x)).unwrap();
        let v = evaluate(&scaled(Func::V, a, x)).unwrap();
        let left = u.value * v.derivative.unwrap();
        let right = u.derivative.unwrap() * v.value;
        let target = ScaledReal::from_f64((2.0 / std::f64::consts::PI).sqrt());
        // relative to the largest term, since both products can dwarf the constant
        let size = left.ln_abs().max(right.ln_abs()).max(target.ln_abs());
        let gap = left.sub(right).sub(target);
        let residual = if gap.is_zero() { 0.0 } else { (gap.ln_abs() - size).exp() };
        prop_assert!(residual <= 1e-8, "residual {}", residual);
    }

    #[test]
    fn w_wronskian_holds_where_accurate(a in order(), x in -25.0f64..25.0) {
        let r = w_quadrature(a, x, &Config::default()).unwrap();
        if r.accuracy_loss_digits.max(r.plus_loss_digits) < 4.0 {
            prop_assert!(r.wronskian_residual <= 1e-8, "residual {}", r.wronskian_residual);
        }
    }

    #[test]
    fn pair_matches_two_single_evaluations(f in func(), a in order(), x in -20.0f64..20.0) {
        let (plus, minus) = evaluate_pair(f, a, x).unwrap();
        let at_plus = evaluate(&scaled(f, a, x)).unwrap();
        let at_minus = evaluate(&scaled(f, a, -x)).unwrap();
        prop_assert_eq!(plus.value, at_plus.value);
        let loss = minus.diagnostics.accuracy_loss_digits.max(at_minus.diagnostics.accuracy_loss_digits);
        if f != Func::W || at_minus.regime == Regime::WNeg {
            prop_assert_eq!(minus.value, at_minus.value);
        } else {
            let limit = 1e-12 * 10f64.powf(loss);
            prop_assert!(minus.value.rel_diff(&at_minus.value) <= limit, "{} > {}", minus.value.rel_diff(&at_minus.value), limit);
        }
    }

    #[test]
    fn quadrature_agrees_with_the_series(f in func(), mag in 0.5f64..10.0, neg in any::<bool>(), x in -5.0f64..5.0) {
        let a = if neg { -mag } else { mag };
        let reference = match f {
            Func::U => uv_series(a, x).unwrap().u,
            Func::V => uv_series(a, x).unwrap().v,
            Func::W => w_series(a, x).unwrap().plus,
        };
        prop_assume!(reference.cancellation_loss <= 6.0);
        let out = evaluate(&scaled(f, a, x)).unwrap();
        // the series itself carries a few ulps amplified by its cancellation
        let limit = 1e-9f64.max(10f64.powf(reference.cancellation_loss - 14.0));
        let gap = out.value.rel_diff(&ScaledReal::from_f64(reference.value));
        let dgap = out.derivative.unwrap().rel_diff(&ScaledReal::from_f64(reference.derivative));
        prop_assert!(gap <= limit && dgap <= limit, "{f}({a},{x}): {gap:e} {dgap:e} (limit {limit:e})");
    }
}
