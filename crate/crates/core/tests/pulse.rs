use kramers_core::numerics::composite_simpson;
use kramers_core::pulse::{
    ass2_constant, build_tables, check_assumptions, Ass2Method, Envelope, PulseShape, PulseSpec,
};
use kramers_core::{Error, Vec3};
use proptest::prelude::*;

fn linear(lambda: f64, t: f64) -> kramers_core::PulseTables64 {
    build_tables(&PulseSpec::linear(Vec3::new(1.0, 0.0, 0.0), lambda, t), 1e-10).unwrap()
}

fn circular_spec() -> PulseSpec<f64> {
    PulseSpec {
        shape: PulseShape::CircularModulated {
            omega: 8.0 * std::f64::consts::PI,
            ellipticity: 1.0,
            envelope: Envelope::SinSquared,
        },
        lambda: 1.0,
        duration: 1.0,
    }
}

#[test]
fn linear_family_closed_forms() {
    let tb = linear(1.0, 1.0);
    for &s in &[0.1, 0.5, 0.9, 1.0] {
        assert_eq!(tb.big_f(s).0, [s, 0.0, 0.0]);
        assert_eq!(tb.big_g(s).0, [s * s / 2.0, 0.0, 0.0]);
    }
    for &s in &[1.0, 2.0, 7.5] {
        assert_eq!(tb.big_g(s).0, [s - 0.5, 0.0, 0.0]);
    }
}

#[test]
fn vector_potential_examples() {
    let tb = linear(3.0, 2.0);
    assert_eq!(tb.vector_potential(4.0).0, [3.0, 0.0, 0.0]);
    assert_eq!(tb.vector_potential(-1.0).0, [0.0; 3]);
    assert_eq!(tb.vector_potential(1.0).0, [1.5, 0.0, 0.0]);
}

#[test]
fn zero_pulse_is_null_and_fails_ass1() {
    let tb = build_tables(&PulseSpec::linear(Vec3::zero(), 1.0, 1.0), 1e-10).unwrap();
    assert_eq!(tb.big_f(0.7).norm(), 0.0);
    assert_eq!(tb.big_g(3.0).norm(), 0.0);
    let cert = check_assumptions(&tb);
    assert!(!cert.ass1.passed);
    assert!(!cert.ass0.verified_on_samples);

    let zero_env = PulseSpec {
        shape: PulseShape::CircularModulated {
            omega: 5.0,
            ellipticity: 1.0,
            envelope: Envelope::Samples { start: 0.2, end: 0.8, values: vec![0.0; 5] },
        },
        lambda: 1.0,
        duration: 1.0,
    };
    let tz = build_tables(&zero_env, 1e-10).unwrap();
    assert_eq!(tz.big_f(0.5).norm(), 0.0);
    assert_eq!(tz.big_g(2.0).norm(), 0.0);
}

#[test]
fn circular_tables_match_fine_simpson_oracle() {
    let tb = build_tables(&circular_spec(), 1e-10).unwrap();
    let w = 8.0 * std::f64::consts::PI;
    let f = |s: f64, c: usize| {
        let h = (std::f64::consts::PI * s).sin().powi(2);
        let ph = w * (s - 0.5);
        if c == 0 { h * ph.cos() } else { h * ph.sin() }
    };
    for &s in &[0.13, 0.377, 0.5, 0.81, 1.0] {
        for c in 0..2 {
            let big_f = composite_simpson(|x| f(x, c), 0.0, s, 200_000);
            let big_g = composite_simpson(|x| (s - x) * f(x, c), 0.0, s, 200_000);
            assert!((tb.big_f(s)[c] - big_f).abs() < 1e-10, "F s={s} c={c}");
            assert!((tb.big_g(s)[c] - big_g).abs() < 1e-10, "G s={s} c={c}");
        }
    }
}

#[test]
fn g_is_antiderivative_of_f() {
    let tb = build_tables(&circular_spec(), 1e-10).unwrap();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for i in 1..200 {
        let s = i as f64 / 200.0;
        let d = (tb.big_g(s + h) - tb.big_g(s - h)) * (0.5 / h) - tb.big_f(s);
        worst = worst.max(d.norm());
    }
    assert!(worst < 1e-8, "{worst}");
}

#[test]
fn support_outside_unit_interval_is_rejected() {
    let spec = PulseSpec {
        shape: PulseShape::CustomSampled {
            start: 0.5,
            end: 1.5,
            samples: vec![Vec3::new(1.0, 0.0, 0.0); 4],
        },
        lambda: 1.0,
        duration: 1.0,
    };
    assert!(matches!(build_tables(&spec, 1e-10), Err(Error::Domain(_))));
}

#[test]
fn linear_ass2_constant() {
    let cert = check_assumptions(&linear(1.0, 1.0));
    assert_eq!(cert.ass2.method, Ass2Method::ClosedForm);
    assert!((cert.ass2.c - 1.0 / (2.0 * 2f64.sqrt())).abs() < 1e-15);
    assert!(cert.ass1.passed && cert.ass0.verified_on_samples && cert.passed());
}

/// A pulse that pushes along +x and then harder along −x, so F(1)·G(1) < 0.
fn reversing_spec() -> PulseSpec<f64> {
    let mut samples = Vec::new();
    for i in 0..=40 {
        let s = i as f64 / 40.0;
        let v = if s < 0.5 { 1.0 } else { -2.5 };
        samples.push(Vec3::new(v, 0.3 * (7.0 * s).sin(), 0.0));
    }
    PulseSpec {
        shape: PulseShape::CustomSampled { start: 0.0, end: 1.0, samples },
        lambda: 1.0,
        duration: 1.0,
    }
}

#[test]
fn ass2_search_matches_dense_oracle() {
    let tb = build_tables(&reversing_spec(), 1e-10).unwrap();
    assert!(tb.f1.dot(tb.g1) < 0.0);
    let (c, method) = ass2_constant(tb.f1, tb.g1);
    assert_eq!(method, Ass2Method::Search);
    let mut oracle = f64::INFINITY;
    let n = 2_000_000;
    for i in 0..=n {
        let s = 1.0 + 99.0 * i as f64 / n as f64;
        oracle = oracle.min(tb.big_g(s).norm() / s);
    }
    oracle = oracle.min(tb.f1.norm());
    assert!((c - oracle).abs() < 1e-6, "search {c} oracle {oracle}");
}

#[test]
fn tables_export_csv() {
    let tb = linear(1.0, 1.0);
    let mut buf = Vec::new();
    tb.write_csv(&mut buf, 11, 2.0).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 12);
    assert_eq!(lines[0], "s,f_x,f_y,f_z,F_x,F_y,F_z,G_x,G_y,G_z");
    let last: Vec<f64> = lines[11].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(last[0], 2.0);
    assert_eq!(last[7], 1.5);
}

#[test]
fn build_is_pure() {
    let a = build_tables(&circular_spec(), 1e-10).unwrap();
    let b = build_tables(&circular_spec(), 1e-10).unwrap();
    for i in 0..=500 {
        let s = i as f64 / 250.0;
        assert_eq!(a.big_f(s).0.map(f64::to_bits), b.big_f(s).0.map(f64::to_bits));
        assert_eq!(a.big_g(s).0.map(f64::to_bits), b.big_g(s).0.map(f64::to_bits));
    }
    assert_eq!(a.c_ass2.to_bits(), b.c_ass2.to_bits());
}

#[test]
fn f32_tables_agree_with_f64() {
    let spec32 = PulseSpec {
        shape: PulseShape::CircularModulated {
            omega: 8.0 * std::f32::consts::PI,
            ellipticity: 1.0f32,
            envelope: Envelope::SinSquared,
        },
        lambda: 1.0f32,
        duration: 1.0f32,
    };
    let t32 = build_tables(&spec32, 1e-6f32).unwrap();
    let t64 = build_tables(&circular_spec(), 1e-10).unwrap();
    for &s in &[0.3f32, 0.9, 2.0] {
        let d = (t32.big_g(s)[0] as f64 - t64.big_g(s as f64)[0]).abs();
        assert!(d < 1e-5, "{d}");
    }
}

proptest! {
    #[test]
    fn affine_tail_identity(s in 1.0f64..1e4) {
        for tb in [build_tables(&circular_spec(), 1e-10).unwrap(), build_tables(&reversing_spec(), 1e-10).unwrap()] {
            let d = tb.big_g(s) - tb.g1 - tb.f1 * (s - 1.0);
            prop_assert!(d.norm() <= 1e-12 * (1.0 + s), "{:?}", d);
            prop_assert_eq!(tb.big_f(s).0, tb.f1.0);
        }
    }

    #[test]
    fn linear_tail_lower_bound(s in 1.0f64..1e3, ex in -1.0f64..1.0, ey in -1.0f64..1.0) {
        prop_assume!(ex.abs() + ey.abs() > 1e-3);
        let tb = build_tables(&PulseSpec::linear(Vec3::new(ex, ey, 0.5), 2.0, 1.0), 1e-10).unwrap();
        let lhs = tb.big_g(s).norm_sq();
        let rhs = tb.g1.norm_sq() + (s - 1.0).powi(2) * tb.f1.norm_sq();
        prop_assert!(lhs >= rhs * (1.0 - 1e-12));
    }
}
