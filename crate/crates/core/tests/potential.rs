use kramers_core::potential::PotentialSpec;
use kramers_core::{Error, Vec3};
use proptest::prelude::*;

#[test]
fn coulomb_examples() {
    let bare = PotentialSpec::coulomb(1.0f64, 0.0);
    assert_eq!(bare.eval(Vec3::new(2.0, 0.0, 0.0)).unwrap(), -0.5);
    let soft = PotentialSpec::coulomb(1.0f64, 0.1);
    assert!((soft.eval(Vec3::zero()).unwrap() + 10.0).abs() < 1e-12);
    assert!(matches!(bare.eval(Vec3::zero()), Err(Error::Domain(_))));
}

#[test]
fn short_range_at_d() {
    for (v0, d, alpha) in [(1.0f64, 1.0, 1.0), (2.0, 3.0, 0.5), (0.7, 0.4, 3.0)] {
        let p = PotentialSpec::short_range(v0, d, alpha, 0.0);
        let v = p.eval(Vec3::new(0.0, d, 0.0)).unwrap();
        let expected = -v0 / 2f64.powf(alpha / 2.0);
        assert!((v - expected).abs() < 1e-14, "{v} vs {expected}");
    }
}

#[test]
fn shifted_examples() {
    let c = PotentialSpec::coulomb(1.0f64, 0.0);
    let x = Vec3::new(4.0, 0.0, 0.0);
    assert_eq!(c.eval_shifted(x, Vec3::new(2.0, 0.0, 0.0)).unwrap(), -0.5);
    assert_eq!(c.eval_shifted(x, Vec3::zero()).unwrap(), c.eval(x).unwrap());

    let sr = PotentialSpec::short_range(1.0f64, 1.0, 1.0, 0.05);
    let shift = Vec3::new(1.3, -0.7, 0.0);
    let mut best = (f64::INFINITY, Vec3::zero());
    for i in 0..=200 {
        for j in 0..=200 {
            let x = Vec3::new(-3.0 + 0.03 * i as f64, -3.0 + 0.03 * j as f64, 0.0);
            let v = sr.eval_shifted(x, shift).unwrap();
            if v < best.0 {
                best = (v, x);
            }
        }
    }
    assert!((best.1 - shift).norm() < 0.03, "{:?}", best.1);
}

#[test]
fn invalid_specs_rejected() {
    assert!(PotentialSpec::coulomb(-1.0f64, 0.0).eval(Vec3::new(1.0, 0.0, 0.0)).is_err());
    assert!(PotentialSpec::coulomb(1.0f64, -0.1).eval(Vec3::new(1.0, 0.0, 0.0)).is_err());
    assert!(PotentialSpec::short_range(1.0f64, 0.0, 1.0, 0.0).eval(Vec3::new(1.0, 0.0, 0.0)).is_err());
}

fn rotate(v: Vec3<f64>, a: f64, b: f64) -> Vec3<f64> {
    let (ca, sa, cb, sb) = (a.cos(), a.sin(), b.cos(), b.sin());
    let x = Vec3::new(ca * v[0] - sa * v[1], sa * v[0] + ca * v[1], v[2]);
    Vec3::new(x[0], cb * x[1] - sb * x[2], sb * x[1] + cb * x[2])
}

proptest! {
    #[test]
    fn radial_symmetry(x in prop::array::uniform3(-5.0f64..5.0), s in prop::array::uniform3(-2.0f64..2.0), a in 0.0f64..6.3, b in 0.0f64..6.3) {
        let x = Vec3(x);
        let s = Vec3(s);
        let moved = s + rotate(x - s, a, b);
        for p in [PotentialSpec::coulomb(1.3, 0.2), PotentialSpec::short_range(1.0, 0.8, 1.5, 0.1)] {
            let v1 = p.eval_shifted(x, s).unwrap();
            let v2 = p.eval_shifted(moved, s).unwrap();
            prop_assert!((v1 - v2).abs() <= 1e-12 * v1.abs().max(1.0));
        }
    }

    #[test]
    fn soft_core_converges_to_bare(z in 0.1f64..5.0, a in 1e-3f64..0.5, r_mult in 10.0f64..100.0, dir in prop::array::uniform3(-1.0f64..1.0)) {
        let d = Vec3(dir);
        prop_assume!(d.norm() > 1e-3);
        let r = a * r_mult;
        let x = d * (r / d.norm());
        let soft = PotentialSpec::coulomb(z, a).eval(x).unwrap();
        let bare = PotentialSpec::coulomb(z, 0.0).eval(x).unwrap();
        prop_assert!((soft - bare).abs() <= z * a * a / (2.0 * r.powi(3)) * (1.0 + 1e-9));
    }
}
