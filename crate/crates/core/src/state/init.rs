use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::potential::PotentialSpec;
use crate::scalar::{lit, Real, Vec3};
use crate::state::grid::Grid;
use crate::state::wavefunction::{Representation, Wavefunction};

pub const TAIL_MASS_LIMIT: f64 = 1e-6;

/// Normalised isotropic Gaussian `∝ exp(−|x|²/(2R²))` centred at the origin.
pub fn gaussian_state<T: Real>(grid: Arc<Grid<T>>, r: T) -> Result<Wavefunction<T>> {
    gaussian_packet(grid, r, Vec3::zero(), Vec3::zero())
}

/// Gaussian of width `r` centred at `x0` with mean wavevector `k0`.
pub fn gaussian_packet<T: Real>(
    grid: Arc<Grid<T>>,
    r: T,
    x0: Vec3<T>,
    k0: Vec3<T>,
) -> Result<Wavefunction<T>> {
    if !r.is_finite() || r <= T::zero() {
        return Err(invalid("R", "Gaussian width must be finite and > 0"));
    }
    let two = lit::<T>(2.0);
    Wavefunction::from_fn(grid, |x| {
        let dx = x - x0;
        let amp = (-dx.norm_sq() / (two * r * r)).exp();
        let ph = k0.dot(x);
        Complex::new(amp * ph.cos(), amp * ph.sin())
    })
    .normalized()
}

/// Fraction of the mass of `e^{−Z r/2}` (density `e^{−Z r}`) outside radius `rho`.
pub fn hydrogenic_tail_mass<T: Real>(dim: usize, z: T, rho: T) -> T {
    let q = z * rho;
    let e = (-q).exp();
    match dim {
        1 => e,
        2 => e * (T::one() + q),
        _ => e * (T::one() + q + q * q / lit(2.0)),
    }
}

/// Ground state of `p² − Z/√(r² + a²)`. With `soft_a = 0` this is the sampled,
/// normalised `e^{−Z r/2}`; otherwise the state is relaxed in imaginary time starting
/// from that profile.
pub fn hydrogenic_ground_state<T: Real>(
    grid: Arc<Grid<T>>,
    z: T,
    soft_a: T,
) -> Result<Wavefunction<T>> {
    if !z.is_finite() || z <= T::zero() {
        return Err(invalid("Z", "must be finite and > 0"));
    }
    if !soft_a.is_finite() || soft_a < T::zero() {
        return Err(invalid("soft_a", "must be finite and >= 0"));
    }
    let tail = hydrogenic_tail_mass(grid.dim(), z, grid.inscribed_radius());
    if tail > lit(TAIL_MASS_LIMIT) {
        return Err(Error::Domain(format!(
            "grid too small: hydrogenic tail mass outside the box is {tail:e} (> {TAIL_MASS_LIMIT:e})"
        )));
    }
    let half = lit::<T>(0.5);
    let bare = Wavefunction::from_fn(grid.clone(), |x| {
        Complex::new((-z * half * x.norm()).exp(), T::zero())
    })
    .normalized()?;
    if soft_a == T::zero() {
        return Ok(bare);
    }
    let pot = PotentialSpec::coulomb(z, soft_a);
    let relaxed = relax_ground_state(&pot, bare, &RelaxOptions::default())?;
    Ok(relaxed.psi)
}

/// Samples the potential on every grid node.
pub fn potential_on_grid<T: Real>(pot: &PotentialSpec<T>, grid: &Grid<T>) -> Result<Vec<T>> {
    pot.check()?;
    grid.map_positions(|x| pot.eval(x))
        .into_iter()
        .collect::<Result<Vec<T>>>()
}

/// Applies `H = p² + V` to a position-space state.
pub fn apply_hamiltonian<T: Real>(psi: &Wavefunction<T>, v: &[T]) -> Result<Wavefunction<T>> {
    psi.require(Representation::Position)?;
    let g = psi.grid().clone();
    let mut kin = psi.to_momentum();
    kin.data_mut()
        .par_iter_mut()
        .enumerate()
        .for_each(|(i, c)| *c = *c * g.wavevector(i).norm_sq());
    let mut out = kin.into_position();
    out.data_mut()
        .par_iter_mut()
        .zip(psi.data().par_iter())
        .zip(v.par_iter())
        .for_each(|((o, p), &vv)| *o = *o + *p * vv);
    Ok(out)
}

/// `⟨ψ, Hψ⟩ / ⟨ψ, ψ⟩`.
pub fn energy<T: Real>(psi: &Wavefunction<T>, v: &[T]) -> Result<T> {
    psi.require(Representation::Position)?;
    let g = psi.grid();
    let n2 = psi.norm_sq();
    let kin = psi.to_momentum().momentum_moment(|k| k.norm_sq())?;
    let pot = psi
        .data()
        .iter()
        .zip(v)
        .fold(T::zero(), |a, (c, &vv)| a + c.norm_sqr() * vv)
        * g.cell();
    Ok((kin + pot) / n2)
}

/// `‖Hψ − Eψ‖ / ‖ψ‖` with `E` the energy expectation.
pub fn eigen_residual<T: Real>(psi: &Wavefunction<T>, v: &[T]) -> Result<(T, T)> {
    let e = energy(psi, v)?;
    let mut hpsi = apply_hamiltonian(psi, v)?;
    hpsi.data_mut()
        .par_iter_mut()
        .zip(psi.data().par_iter())
        .for_each(|(h, p)| *h = *h - *p * e);
    Ok((e, hpsi.norm() / psi.norm()))
}

#[derive(Clone, Copy, Debug, Serialize)]
#[serde(bound = "T: Real")]
pub struct RelaxOptions<T> {
    /// Imaginary time step; `None` means `0.1·h²`.
    pub dt: Option<T>,
    /// Stop once the per-step energy change falls below this.
    pub tol: T,
    pub max_steps: usize,
    pub record_history: bool,
}

impl<T: Real> Default for RelaxOptions<T> {
    fn default() -> Self {
        RelaxOptions {
            dt: None,
            tol: lit(1e-10),
            max_steps: 1_000_000,
            record_history: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Relaxed<T: Real> {
    pub psi: Wavefunction<T>,
    pub energy: T,
    pub steps: usize,
    pub history: Vec<T>,
}

/// Imaginary-time Strang relaxation `e^{−V dt/2} e^{−p² dt} e^{−V dt/2}` with
/// renormalisation after each step.
pub fn relax_ground_state<T: Real>(
    pot: &PotentialSpec<T>,
    guess: Wavefunction<T>,
    opts: &RelaxOptions<T>,
) -> Result<Relaxed<T>> {
    guess.require(Representation::Position)?;
    let g = guess.grid().clone();
    let v = potential_on_grid(pot, &g)?;
    let dt = opts.dt.unwrap_or_else(|| lit::<T>(0.1) * g.h * g.h);
    if !(dt > T::zero()) {
        return Err(invalid("dt", "imaginary time step must be > 0"));
    }
    let half = lit::<T>(0.5);
    let ev: Vec<T> = v.iter().map(|&vv| (-vv * dt * half).exp()).collect();
    let inv_n = T::one() / lit(g.len as f64);
    let ek: Vec<T> = g.map_wavevectors(|k| (-k.norm_sq() * dt).exp() * inv_n);

    let mut psi = guess.normalized()?;
    let mut e_prev = energy(&psi, &v)?;
    let mut history = Vec::new();
    if opts.record_history {
        history.push(e_prev);
    }
    let mut scratch = Vec::new();
    for step in 1..=opts.max_steps {
        {
            let data = psi.data_mut();
            data.par_iter_mut().zip(ev.par_iter()).for_each(|(c, &e)| *c = *c * e);
            g.fft(data, &mut scratch, false);
            data.par_iter_mut().zip(ek.par_iter()).for_each(|(c, &e)| *c = *c * e);
            g.fft(data, &mut scratch, true);
            data.par_iter_mut().zip(ev.par_iter()).for_each(|(c, &e)| *c = *c * e);
        }
        psi.normalize()?;
        let e = energy(&psi, &v)?;
        if !e.is_finite() {
            return Err(Error::Numerical(format!("relaxation energy is {e} at step {step}")));
        }
        if opts.record_history {
            history.push(e);
        }
        if (e - e_prev).abs() < opts.tol {
            return Ok(Relaxed {
                psi,
                energy: e,
                steps: step,
                history,
            });
        }
        e_prev = e;
    }
    Err(Error::Numerical(format!(
        "imaginary-time relaxation did not converge in {} steps",
        opts.max_steps
    )))
}
