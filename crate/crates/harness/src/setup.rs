//! Builds pulse tables, grids and initial states from a [`RunConfig`].

use std::sync::Arc;

use kramers_core::pulse::{build_tables, PulseTables};
use kramers_core::state::{
    gaussian_packet, hydrogenic_ground_state, Grid, GridSpec, Wavefunction,
};
use kramers_core::{Vec3, Wavefunction64};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{InitialState, RunConfig};
use crate::error::Result;

pub fn tables(cfg: &RunConfig) -> Result<PulseTables<f64>> {
    Ok(build_tables(&cfg.pulse_spec(), cfg.numerics.pulse_quad_tol)?)
}

pub fn grid(cfg: &RunConfig) -> Result<Arc<Grid<f64>>> {
    Ok(Grid::new(cfg.grid.clone())?)
}

/// Sub-box of `m` nodes per axis with the same spacing as `g`, nodes aligned with `g`,
/// centred as close to the origin as alignment allows.
pub fn aligned_subgrid(g: &Grid<f64>, m: usize) -> Result<Arc<Grid<f64>>> {
    let h = g.h;
    let mut c = [0.0; 3];
    for (a, ca) in c.iter_mut().enumerate().take(g.dim()) {
        let c0 = g.spec.center[a];
        *ca = c0 + h * ((-c0) / h).round();
    }
    let spec = GridSpec::new(g.dim(), m, h * m as f64 / 2.0).with_center(Vec3(c));
    Ok(Grid::new(spec)?)
}

/// Hydrogenic ground state on `g`, relaxed on an aligned `relax_n` sub-box when given.
pub fn hydrogenic(g: Arc<Grid<f64>>, z: f64, soft_a: f64, relax_n: Option<usize>) -> Result<Wavefunction64> {
    match relax_n {
        Some(m) if m < g.n() && soft_a > 0.0 => {
            let sub = aligned_subgrid(&g, m)?;
            let psi = hydrogenic_ground_state(sub, z, soft_a)?;
            Ok(psi.embed(g)?.normalized()?)
        }
        _ => Ok(hydrogenic_ground_state(g, z, soft_a)?),
    }
}

pub fn initial_state(cfg: &RunConfig, g: Arc<Grid<f64>>) -> Result<Wavefunction64> {
    match &cfg.initial {
        InitialState::Hydrogenic { soft_a, relax_n } => hydrogenic(
            g,
            cfg.params.z,
            soft_a.unwrap_or(cfg.potential.soft_a),
            *relax_n,
        ),
        InitialState::Gaussian {
            r,
            center,
            momentum,
        } => Ok(gaussian_packet(
            g,
            r.unwrap_or(cfg.params.r),
            Vec3(*center),
            Vec3(*momentum),
        )?),
        InitialState::RandomPackets { count } => random_packets(g, *count, cfg.seed),
    }
}

/// Sum of unit-width Gaussians with centres in the inner half of the box and momenta
/// in [−1, 1], drawn from a ChaCha8 stream seeded with `seed`.
pub fn random_packets(g: Arc<Grid<f64>>, count: usize, seed: u64) -> Result<Wavefunction64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = g.dim();
    let l = g.spec.l_box;
    let c0 = g.spec.center;
    let packets: Vec<([f64; 3], [f64; 3], f64)> = (0..count.max(1))
        .map(|_| {
            let mut c = [0.0; 3];
            let mut k = [0.0; 3];
            for a in 0..d {
                c[a] = c0[a] + rng.gen_range(-0.25 * l..0.25 * l);
                k[a] = rng.gen_range(-1.0..1.0);
            }
            (c, k, rng.gen_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    let psi = Wavefunction::from_fn(g, |x| {
        packets.iter().fold(Complex64::new(0.0, 0.0), |acc, (c, k, ph)| {
            let mut r2 = 0.0;
            let mut kx = *ph;
            for a in 0..d {
                r2 += (x[a] - c[a]).powi(2);
                kx += k[a] * x[a];
            }
            acc + Complex64::from_polar((-r2 / 2.0).exp(), kx)
        })
    });
    Ok(psi.normalized()?)
}
