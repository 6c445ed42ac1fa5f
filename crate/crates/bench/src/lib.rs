//! Benchmark points, one per integration regime plus the series window.

use pcf_core::api::Func;

pub struct Case {
    pub name: &'static str,
    pub func: Func,
    pub a: f64,
    pub x: f64,
}

pub const CASES: &[Case] = &[
    Case { name: "series", func: Func::U, a: 0.2, x: 1.0 },
    Case { name: "u_pos", func: Func::U, a: 5.0, x: 3.0 },
    Case { name: "u_pos_large", func: Func::V, a: 500.0, x: 40.0 },
    Case { name: "u_neg_mid", func: Func::U, a: -5.0, x: 1.5 },
    Case { name: "u_neg_near1", func: Func::V, a: -20.0, x: 8.8 },
    Case { name: "u_neg_right", func: Func::U, a: -5.0, x: 8.0 },
    Case { name: "u_neg_left", func: Func::U, a: -5.0, x: -8.0 },
    Case { name: "w_neg", func: Func::W, a: -5.0, x: 2.0 },
    Case { name: "w_pos_mid", func: Func::W, a: 5.0, x: 2.0 },
    Case { name: "w_pos_right", func: Func::W, a: 5.0, x: 8.0 },
];
