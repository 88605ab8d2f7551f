use std::sync::Arc;

use kramers_core::numerics::adaptive_simpson;
use kramers_core::potential::PotentialSpec;
use kramers_core::propagator::*;
use kramers_core::pulse::{build_tables, Envelope, PulseShape, PulseSpec, PulseTables};
use kramers_core::state::*;
use kramers_core::{Error, Vec3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid(dim: usize, n: usize, l: f64) -> Arc<Grid<f64>> {
    Grid::new(GridSpec::new(dim, n, l)).unwrap()
}

fn linear(eps: [f64; 3], lambda: f64, t: f64) -> PulseTables<f64> {
    build_tables(&PulseSpec::linear(Vec3(eps), lambda, t), 1e-12).unwrap()
}

fn circular(lambda: f64) -> PulseTables<f64> {
    let spec = PulseSpec {
        shape: PulseShape::CircularModulated {
            omega: 6.0 * std::f64::consts::PI,
            ellipticity: 0.7,
            envelope: Envelope::SinSquared,
        },
        lambda,
        duration: 1.0,
    };
    build_tables(&spec, 1e-12).unwrap()
}

fn random_smooth_state(g: Arc<Grid<f64>>, seed: u64) -> Wavefunction<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let packets: Vec<([f64; 3], [f64; 3], f64)> = (0..4)
        .map(|_| {
            let c = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let k = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            (c, k, rng.gen_range(0.0..6.0))
        })
        .collect();
    let dim = g.dim();
    Wavefunction::from_fn(g, |x| {
        packets.iter().fold(Complex64::new(0.0, 0.0), |acc, (c, k, ph)| {
            let mut r2 = 0.0;
            let mut kx = *ph;
            for a in 0..dim {
                r2 += (x[a] - c[a]).powi(2);
                kx += k[a] * x[a];
            }
            acc + Complex64::from_polar((-r2 / 2.0).exp(), kx)
        })
    })
    .normalized()
    .unwrap()
}

fn rel(a: &Wavefunction<f64>, b: &Wavefunction<f64>) -> f64 {
    a.distance(b).unwrap() / b.norm()
}

#[test]
fn null_pulse_spreads_like_a_free_gaussian() {
    let tb = linear([0.0; 3], 1.0, 1.0);
    let r = 1.2;
    let g = grid(2, 256, 24.0);
    let psi = gaussian_state(g, r).unwrap();
    for t in [0.5, 1.0, 2.5] {
        let out = free_kramers_exact(&psi, 0.0, t, &tb).unwrap();
        let x2 = out.position_moment(|x| x.norm_sq()).unwrap();
        let expected = 2.0 * r * r / 2.0 * (1.0 + 4.0 * t * t / r.powi(4));
        assert!((x2 / expected - 1.0).abs() < 1e-9, "t={t}: {x2} vs {expected}");
    }
}

#[test]
fn factorised_and_direct_agree() {
    let tb = circular(3.0);
    let g = grid(2, 32, 6.0);
    for seed in 0..3 {
        let psi = random_smooth_state(g.clone(), seed);
        for (t0, t1) in [(0.0, 0.4), (0.2, 1.7), (1.2, 2.0)] {
            let a = free_kramers_exact(&psi, t0, t1, &tb).unwrap();
            let b = free_kramers_direct(&psi, t0, t1, &tb).unwrap();
            assert!(rel(&a, &b) < 1e-12, "seed {seed} [{t0},{t1}]: {}", rel(&a, &b));
        }
    }
    assert!(free_kramers_exact(&gaussian_state(g, 1.0).unwrap(), 1.0, 0.5, &tb).is_err());
}

#[test]
fn pulse_translates_a_resting_packet() {
    let (lambda, t) = (2.0, 1.5);
    let eps = [1.0, 0.5, 0.0];
    let tb = linear(eps, lambda, t);
    let g = grid(2, 256, 24.0);
    let psi = gaussian_state(g, 1.0).unwrap();
    let out = free_kramers_exact(&psi, 0.0, t, &tb).unwrap();
    let shift = tb.big_g(1.0) * (-2.0 * lambda * t);
    for a in 0..2 {
        let c = out.position_moment(|x| x[a]).unwrap();
        assert!((c - shift[a]).abs() < 1e-10, "axis {a}: {c} vs {}", shift[a]);
    }
}

#[test]
fn translation_factor_alone_shifts_the_centroid() {
    let tb = circular(2.0);
    let g = grid(2, 128, 12.0);
    let psi = gaussian_state(g.clone(), 1.0).unwrap();
    let s = tb.a_integral(0.0, 1.0);
    let mut m = psi.to_momentum();
    m.data_mut()
        .iter_mut()
        .enumerate()
        .for_each(|(i, c)| *c *= Complex64::from_polar(1.0, 2.0 * g.wavevector(i).dot(s)));
    let out = m.into_position();
    for a in 0..2 {
        let c = out.position_moment(|x| x[a]).unwrap();
        assert!((c + 2.0 * s[a]).abs() < 1e-10, "axis {a}");
    }
}

fn split_error(tb: &PulseTables<f64>, psi: &Wavefunction<f64>, t1: f64, dt: f64) -> f64 {
    let plan = EvolutionPlan::new(0.0, t1, dt, Gauge::Kramers);
    let out = evolve_split(psi, &plan, tb, &PotentialSpec::Free).unwrap().final_state;
    let exact = free_kramers_exact(psi, 0.0, t1, tb).unwrap();
    rel(&out, &exact)
}

#[test]
fn free_split_step_converges_at_second_order() {
    let tb = circular(3.0);
    let psi = random_smooth_state(grid(1, 512, 20.0), 11);
    // end inside the pulse: over the full pulse the midpoint errors telescope away
    let errs: Vec<f64> = [0.02, 0.01, 0.005].iter().map(|&dt| split_error(&tb, &psi, 0.6, dt)).collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 2.0).abs() < 0.2, "{errs:?}");
    }
    assert!(split_error(&tb, &psi, 1.2, 0.01) < 1e-10);
}

#[test]
fn hydrogenic_state_survives_without_pulse() {
    let tb = linear([1.0, 0.0, 0.0], 0.0, 1.0);
    let g = grid(2, 64, 18.0);
    let psi = hydrogenic_ground_state(g, 1.0, 0.5).unwrap();
    let plan = EvolutionPlan::new(0.0, 10.0, 0.01, Gauge::Kramers);
    let out = evolve_split(&psi, &plan, &tb, &PotentialSpec::coulomb(1.0, 0.5)).unwrap();
    let s = kramers_core::observables::survival_probability(&out.final_state, &psi).unwrap();
    assert!(s > 1.0 - 1e-4, "{s}");
}

#[test]
fn split_step_is_unitary() {
    let tb = circular(2.0);
    let psi = random_smooth_state(grid(1, 256, 25.0), 5);
    let plan = EvolutionPlan::new(0.0, 5.0, 5e-4, Gauge::Kramers);
    let n0 = psi.norm();
    let out = evolve_split(&psi, &plan, &tb, &PotentialSpec::coulomb(1.0, 0.5)).unwrap();
    assert_eq!(out.steps, 10_000);
    assert!((out.final_state.norm() - n0).abs() < 1e-10);
}

#[test]
fn snapshots_and_observer() {
    let tb = linear([1.0, 0.0, 0.0], 1.0, 1.0);
    let psi = gaussian_state(grid(1, 64, 10.0), 1.0).unwrap();
    let mut plan = EvolutionPlan::new(0.0, 1.0, 0.1, Gauge::Kramers);
    plan.snapshot_every = Some(5);
    let mut seen = Vec::new();
    let out = evolve_split_with(&psi, &plan, &tb, &PotentialSpec::Free, |j, t, _| {
        seen.push((j, t));
        Ok(())
    })
    .unwrap();
    assert_eq!(seen.len(), 10);
    assert!((seen[9].1 - 1.0).abs() < 1e-12);
    assert_eq!(out.snapshots.len(), 2);
    plan.dt = 0.3;
    assert!(evolve_split(&psi, &plan, &tb, &PotentialSpec::Free).is_err());
}

#[test]
fn nan_aborts() {
    let tb = linear([1.0, 0.0, 0.0], 1.0, 1.0);
    let g = grid(1, 32, 5.0);
    let mut psi = gaussian_state(g.clone(), 1.0).unwrap();
    psi.data_mut()[3] = Complex64::new(f64::NAN, 0.0);
    let mut st = SplitStepper::new(g, Some(&tb), &PotentialSpec::Free, Gauge::Kramers, 0.01, None).unwrap();
    assert!(matches!(st.step(&mut psi, 0.0), Err(Error::Numerical(_))));
}

#[test]
fn ritz_gauge_aborts_near_the_edge() {
    let tb = linear([1.0, 0.0, 0.0], 1.0, 1.0);
    let g = grid(1, 128, 10.0);
    let psi = gaussian_packet(g, 1.0, Vec3::new(9.0, 0.0, 0.0), Vec3::zero()).unwrap();
    let plan = EvolutionPlan::new(0.0, 0.1, 0.01, Gauge::Ritz);
    assert!(evolve_split(&psi, &plan, &tb, &PotentialSpec::Free).is_err());
}

#[test]
fn bridge_identities() {
    let tb = circular(2.0);
    let psi = random_smooth_state(grid(2, 32, 6.0), 3);
    let there = gauge_bridge(&psi, 0.6, &tb, BridgeDirection::KramersToRitz).unwrap();
    let back = gauge_bridge(&there, 0.6, &tb, BridgeDirection::RitzToKramers).unwrap();
    assert!(rel(&back, &psi) < 1e-14);
    for t in [-1.0, 0.0] {
        let same = gauge_bridge(&psi, t, &tb, BridgeDirection::KramersToRitz).unwrap();
        assert_eq!(same.data(), psi.data());
    }
    assert!(gauge_bridge(&psi.to_momentum(), 0.5, &tb, BridgeDirection::KramersToRitz).is_err());
}

fn gauge_gap(n: usize, dt: f64) -> (f64, f64) {
    let tb = linear([1.0, 0.0, 0.0], 2.0, 1.0);
    let pot = PotentialSpec::coulomb(1.0, 0.5);
    let psi = gaussian_state(grid(1, n, 30.0), 1.0).unwrap();
    let k = evolve_split(&psi, &EvolutionPlan::new(0.0, 1.0, dt, Gauge::Kramers), &tb, &pot).unwrap();
    let r = evolve_split(&psi, &EvolutionPlan::new(0.0, 1.0, dt, Gauge::Ritz), &tb, &pot).unwrap();
    let bridged = gauge_bridge(&k.final_state, 1.0, &tb, BridgeDirection::KramersToRitz).unwrap();
    let amp: f64 = k
        .final_state
        .data()
        .iter()
        .zip(r.final_state.data())
        .map(|(a, b)| (a.norm() - b.norm()).abs())
        .fold(0.0, f64::max);
    (rel(&bridged, &r.final_state), amp)
}

#[test]
fn gauges_agree_under_refinement() {
    let (coarse, amp_c) = gauge_gap(256, 0.004);
    let (fine, amp_f) = gauge_gap(512, 0.002);
    assert!(coarse < 1e-3, "{coarse}");
    assert!(coarse / fine >= 3.0, "{coarse} -> {fine}");
    assert!(amp_f < amp_c && amp_f < 1e-3);
}

#[test]
fn post_pulse_free_matches_exact() {
    let null = linear([0.0; 3], 1.0, 1.0);
    let psi = random_smooth_state(grid(2, 64, 10.0), 9);
    let a = post_pulse_coulomb(&psi, 1.0, 2.5, 0.0, 0.0, 0.05).unwrap();
    let b = free_kramers_exact(&psi, 1.0, 2.5, &null).unwrap();
    assert!(rel(&a, &b) < 1e-8);
    assert!(post_pulse_coulomb(&psi, 2.0, 1.0, 1.0, 0.5, 0.05).is_err());
}

#[test]
fn eigenstate_picks_up_its_energy_phase() {
    let (z, a) = (1.0, 0.5);
    let g = grid(2, 64, 18.0);
    let psi = hydrogenic_ground_state(g.clone(), z, a).unwrap();
    let e = energy(&psi, &potential_on_grid(&PotentialSpec::coulomb(z, a), &g).unwrap()).unwrap();
    let t = 3.0;
    let out = post_pulse_coulomb(&psi, 1.0, 1.0 + t, z, a, 0.01).unwrap();
    let ov = psi.inner(&out).unwrap();
    assert!((ov.norm() - 1.0).abs() < 1e-4);
    let dphi = (ov.arg() + e * t + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI)
        - std::f64::consts::PI;
    assert!(dphi.abs() < 1e-3, "phase {} vs {}", ov.arg(), -e * t);
}

#[test]
fn bare_eigenphase_sign() {
    // H ψ = −Z²/4 ψ, so e^{−iHt} ψ = e^{+iZ²t/4} ψ
    let (z, t) = (1.0f64, 1.0f64);
    let g = Grid::new(GridSpec::new(3, 64, 24.0).with_center(Vec3::new(0.375, 0.375, 0.375))).unwrap();
    let psi = hydrogenic_ground_state(g, z, 0.0).unwrap();
    let out = post_pulse_coulomb(&psi, 0.0, t, z, 0.0, 0.01).unwrap();
    let ov = psi.inner(&out).unwrap();
    assert!((ov.arg() - z * z * t / 4.0).abs() < 0.03, "{}", ov.arg());
}

#[test]
fn post_pulse_composes() {
    let psi = random_smooth_state(grid(2, 64, 12.0), 2);
    let direct = post_pulse_coulomb(&psi, 1.0, 2.0, 1.0, 0.5, 0.01).unwrap();
    let mid = post_pulse_coulomb(&psi, 1.0, 1.5, 1.0, 0.5, 0.01).unwrap();
    let two = post_pulse_coulomb(&mid, 1.5, 2.0, 1.0, 0.5, 0.01).unwrap();
    assert!(rel(&two, &direct) < 1e-10);
}

#[test]
fn cutoff_profile_shape() {
    assert_eq!(cutoff_profile(0.4), 1.0);
    assert_eq!(cutoff_profile(0.5), 1.0);
    assert_eq!(cutoff_profile(1.1), 0.0);
    assert_eq!(cutoff_profile(1.0), 0.0);
    let mut prev = 1.0;
    for i in 0..=100 {
        let v = cutoff_profile(0.5 + 0.005 * i as f64);
        assert!(v <= prev && (0.0..=1.0).contains(&v));
        prev = v;
    }
}

#[test]
fn infinite_cutoff_is_identity() {
    let psi = random_smooth_state(grid(2, 32, 6.0), 4);
    let (out, removed) = apply_cutoff(&psi, f64::INFINITY).unwrap();
    assert!(rel(&out, &psi) < 1e-14);
    assert!(removed.abs() < 1e-14);
    assert!(apply_cutoff(&psi, 0.0).is_err());
}

#[test]
fn removed_mass_matches_radial_tail_integral() {
    // 2D e^{−ar}: |ψ̂(k)|² = (2a⁴/π) / (a² + k²)³
    let (z, k0) = (1.0, 2.0);
    let a = z / 2.0;
    let g = Grid::new(GridSpec::new(2, 1024, 80.0).with_center(Vec3::new(0.078125, 0.078125, 0.0))).unwrap();
    let psi = hydrogenic_ground_state(g, z, 0.0).unwrap();
    let (_, removed) = apply_cutoff(&psi, k0).unwrap();
    let tail = |k: f64| {
        let chi = cutoff_profile(k / k0);
        (1.0 - chi * chi) * 4.0 * a.powi(4) * k / (a * a + k * k).powi(3)
    };
    let oracle = adaptive_simpson(tail, k0 / 2.0, k0, 1e-14, 1e-12).value
        + a.powi(4) / (a * a + k0 * k0).powi(2);
    assert!((removed / oracle - 1.0).abs() < 0.03, "{removed} vs {oracle}");
}

#[test]
fn dollard_phase_log_oracle_at_zero_momentum() {
    let (lambda, t, z) = (10.0, 2.0, 1.3);
    let tb = linear([0.6, 0.8, 0.0], lambda, t);
    for elapsed in [0.5, 2.0, 9.0] {
        let got = dollard_phase(Vec3::zero(), elapsed, &tb, z, 1e-12).unwrap();
        let want = z / (2.0 * lambda) * ((0.5 + elapsed / t) / 0.5).ln();
        assert!((got / want - 1.0).abs() < 1e-10, "{got} vs {want}");
    }
}

#[test]
fn dollard_phase_asinh_oracle() {
    // |a + bτ| with a = −λTε, b = 2k − 2λε
    let (lambda, t, z) = (8.0, 1.0, 1.0);
    let eps = Vec3::new(1.0, 0.0, 0.0);
    let tb = linear(eps.0, lambda, t);
    for k in [Vec3::new(0.5, 0.3, 0.0), Vec3::new(-1.0, 2.0, 0.0), Vec3::new(0.0, -0.7, 0.4)] {
        let av = eps * (-lambda * t);
        let bv = k * 2.0 - eps * (2.0 * lambda);
        let b = bv.norm();
        let perp = (av.norm_sq() - av.dot(bv).powi(2) / (b * b)).sqrt();
        let prim = |tau: f64| ((b * b * tau + av.dot(bv)) / (b * perp)).asinh() / b;
        let elapsed = 4.0;
        let want = z * (prim(elapsed) - prim(0.0));
        let got = dollard_phase(k, elapsed, &tb, z, 1e-12).unwrap();
        assert!((got / want - 1.0).abs() < 1e-9, "{got} vs {want}");
    }
}

#[test]
fn dollard_denominator_abort() {
    let (lambda, t) = (4.0, 1.0);
    let tb = linear([1.0, 0.0, 0.0], lambda, t);
    // 2τk = 2λT·G(1 + τ/T) at τ = T
    let k = Vec3::new(1.5 * lambda, 0.0, 0.0);
    assert!(matches!(dollard_phase(k, 2.0 * t, &tb, 1.0, 1e-8), Err(Error::Numerical(_))));
    assert!(dollard_phase(k, 0.4 * t, &tb, 1.0, 1e-8).is_ok());
}

#[test]
fn dollard_without_charge_is_cutoff_free_evolution() {
    let tb = linear([1.0, 0.0, 0.0], 5.0, 1.0);
    let psi = random_smooth_state(grid(2, 64, 10.0), 6);
    let dspec = DollardSpec::new(3.0);
    let (cut, _) = apply_cutoff(&psi, dspec.k0).unwrap();
    let a = dollard_propagate(&cut, 2.5, &tb, 0.0, &dspec).unwrap();
    let b = free_kramers_exact(&cut, 1.0, 2.5, &tb).unwrap();
    assert!(rel(&a, &b) < 1e-13);
    assert!(matches!(dollard_propagate(&psi, 2.5, &tb, 1.0, &dspec), Err(Error::Domain(_))));
    assert!(dollard_propagate(&cut, 0.5, &tb, 1.0, &dspec).is_err());
}

#[test]
fn dollard_free_is_unitary_and_untranslated() {
    let tb = linear([1.0, 0.0, 0.0], 10.0, 1.0);
    let psi = gaussian_state(grid(2, 64, 16.0), 1.0).unwrap();
    let dspec = DollardSpec::new(2.0);
    let (cut, _) = apply_cutoff(&psi, dspec.k0).unwrap();
    let out = dollard_free(&cut, 3.0, &tb, 1.0, &dspec).unwrap();
    assert!((out.norm() - cut.norm()).abs() < 1e-13);
    let c = out.position_moment(|x| x[0]).unwrap() / out.norm_sq();
    assert!(c.abs() < 0.5, "{c}");
}
