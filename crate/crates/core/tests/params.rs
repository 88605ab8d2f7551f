use kramers_core::params::{keldysh, validate, Bands, HypothesisSet, PhysParams};
use kramers_core::Error;
use proptest::prelude::*;

fn coulomb_point(lambda: f64, z: f64) -> PhysParams<f64> {
    let mut p = PhysParams::new(lambda, 1.0, 1.0);
    p.z = z;
    p
}

#[test]
fn coulomb_hypotheses_pass_inside_bands() {
    let rep = validate(&coulomb_point(10.0, 1.0), HypothesisSet::Coulomb, &Bands::default()).unwrap();
    assert!(rep.passed);
    assert_eq!(rep.groups.r2_over_t, 1.0);
    assert!((rep.groups.z_over_lambda - 0.1).abs() < 1e-15);
}

#[test]
fn z_above_lambda_fails_coulomb_set() {
    let rep = validate(&coulomb_point(1.0, 5.0), HypothesisSet::Coulomb, &Bands::default()).unwrap();
    assert!(!rep.passed);
    let failed: Vec<_> = rep.failures().map(|c| c.name.as_str()).collect();
    assert!(failed.contains(&"Z_le_lambda"), "{failed:?}");
}

#[test]
fn z_is_not_required_for_short_range() {
    let rep =
        validate(&coulomb_point(10.0, 50.0), HypothesisSet::ShortRange, &Bands::default()).unwrap();
    assert!(rep.passed);
    assert!(rep.checks.iter().any(|c| c.name == "Z_le_lambda" && !c.passed && !c.required));
}

#[test]
fn degenerate_lambda_is_a_hard_error() {
    let p = coulomb_point(0.0, 1.0);
    let err = validate(&p, HypothesisSet::Coulomb, &Bands::default()).unwrap_err();
    assert!(matches!(err, Error::InvalidParameter { .. }));
    let mut q = coulomb_point(1.0, 1.0);
    q.duration = f64::NAN;
    assert!(validate(&q, HypothesisSet::Coulomb, &Bands::default()).is_err());
}

#[test]
fn report_order_is_fixed() {
    let a = validate(&coulomb_point(10.0, 1.0), HypothesisSet::Coulomb, &Bands::default()).unwrap();
    let b = validate(&coulomb_point(3.0, 9.0), HypothesisSet::ShortRange, &Bands::default()).unwrap();
    let na: Vec<_> = a.checks.iter().map(|c| c.name.clone()).collect();
    let nb: Vec<_> = b.checks.iter().map(|c| c.name.clone()).collect();
    assert_eq!(na, nb);
}

#[test]
fn keldysh_experimental_range() {
    // 0.33 is a rounded prefactor; 5% tolerance
    let g1 = keldysh(24.6f64, 3.5, 0.725).unwrap();
    let g2 = keldysh(24.6f64, 2.3, 0.725).unwrap();
    assert!((g1 / 1.21 - 1.0).abs() < 0.05, "{g1}");
    assert!((g2 / 1.49 - 1.0).abs() < 0.05, "{g2}");
    assert!((keldysh(1.0f64, 1.0, 1.0).unwrap() - 0.33).abs() < 1e-15);
    assert!(keldysh(1.0f64, -1.0, 1.0).is_err());
}

proptest! {
    #[test]
    fn keldysh_monotone(ip in 0.1f64..100.0, i0 in 0.1f64..10.0, l in 0.1f64..5.0, f in 1.01f64..3.0) {
        let g = keldysh(ip, i0, l).unwrap();
        prop_assert!(keldysh(ip, i0 * f, l).unwrap() < g);
        prop_assert!(keldysh(ip, i0, l * f).unwrap() < g);
        prop_assert!(keldysh(ip * f, i0, l).unwrap() > g);
    }

    #[test]
    fn validate_is_deterministic(lambda in 0.1f64..100.0, t in 0.1f64..10.0, r in 0.1f64..10.0, z in 0.1f64..5.0) {
        let mut p = PhysParams::new(lambda, t, r);
        p.z = z;
        let a = validate(&p, HypothesisSet::Coulomb, &Bands::default()).unwrap();
        let b = validate(&p, HypothesisSet::Coulomb, &Bands::default()).unwrap();
        prop_assert_eq!(&a, &b);
        let g = a.groups;
        for v in [g.rl, g.r2_over_t, g.z_over_lambda, g.k0r, g.k0t_over_r] {
            prop_assert!(v.is_finite() && v >= 0.0);
        }
    }
}
