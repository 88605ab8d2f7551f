//! Time evolution: exact free Kramers propagator, Strang split-step in both gauges,
//! the gauge bridge, post-pulse Coulomb evolution and the Dollard-modified dynamics.

use std::cell::Cell;
use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numerics::adaptive_simpson;
use crate::potential::PotentialSpec;
use crate::pulse::PulseTables;
use crate::scalar::{lit, Real, Vec3};
use crate::state::{potential_on_grid, Grid, Representation, Wavefunction};

#[inline]
fn cis<T: Real>(a: T) -> Complex<T> {
    Complex::new(a.cos(), a.sin())
}

/// `[t0, t1]` cut at the pulse edges 0 and T.
fn windows<T: Real>(t0: T, t1: T, duration: T) -> Vec<(T, T)> {
    let mut cuts = vec![t0];
    for c in [T::zero(), duration] {
        if c > t0 && c < t1 {
            cuts.push(c);
        }
    }
    cuts.push(t1);
    cuts.windows(2).map(|w| (w[0], w[1])).collect()
}

/// `e^{−i∫_{t0}^{t1}(k − A(τ))² dτ}` applied in momentum space, factorised as the scalar
/// phase `e^{−i∫A²}`, the kinetic factor `e^{−i(t1−t0)k²}` and the translation
/// `e^{2ik·∫A}`. The translation moves the state by `−2∫A = −2λT(G(t1/T) − G(t0/T))`.
/// Returns the state in the representation it was given in.
pub fn free_kramers_exact<T: Real>(
    psi: &Wavefunction<T>,
    t0: T,
    t1: T,
    tables: &PulseTables<T>,
) -> Result<Wavefunction<T>> {
    if !(t1 >= t0) {
        return Err(invalid("t1", "free propagation needs t0 <= t1"));
    }
    let repr = psi.repr();
    let mut m = psi.to_momentum();
    let g = m.grid().clone();
    let phi = -tables.a_squared_integral(t0, t1);
    let shift = tables.a_integral(t0, t1);
    let dt = t1 - t0;
    let two = lit::<T>(2.0);
    m.data_mut().par_iter_mut().enumerate().for_each(|(i, c)| {
        let k = g.wavevector(i);
        *c = *c * cis(phi) * cis(-dt * k.norm_sq()) * cis(two * k.dot(shift));
    });
    Ok(restore(m, repr))
}

/// Same multiplier as [`free_kramers_exact`], evaluated unfactorised: the exponent
/// `∫(k − A(τ))² dτ` is integrated numerically for every wavevector.
pub fn free_kramers_direct<T: Real>(
    psi: &Wavefunction<T>,
    t0: T,
    t1: T,
    tables: &PulseTables<T>,
) -> Result<Wavefunction<T>> {
    if !(t1 >= t0) {
        return Err(invalid("t1", "free propagation needs t0 <= t1"));
    }
    let repr = psi.repr();
    let mut m = psi.to_momentum();
    let g = m.grid().clone();
    let win = windows(t0, t1, tables.duration);
    let tol = lit::<T>(1e-13);
    m.data_mut().par_iter_mut().enumerate().for_each(|(i, c)| {
        let k = g.wavevector(i);
        let mut s = T::zero();
        for &(a, b) in &win {
            s = s + adaptive_simpson(
                |tau| (k - tables.vector_potential(tau)).norm_sq(),
                a,
                b,
                tol,
                tol,
            )
            .value;
        }
        *c = *c * cis(-s);
    });
    Ok(restore(m, repr))
}

fn restore<T: Real>(m: Wavefunction<T>, repr: Representation) -> Wavefunction<T> {
    match repr {
        Representation::Momentum => m,
        Representation::Position => m.into_position(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gauge {
    /// `(p − A(t))² + V`.
    Kramers,
    /// `p² + V + (dA/dt)·x`, the image of the Kramers form under `ψ ↦ e^{−iA·x}ψ`.
    Ritz,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
#[serde(deny_unknown_fields)]
pub struct Absorber<T> {
    /// Strip width as a fraction of the box half-width.
    pub width_frac: T,
}

impl<T: Real> Default for Absorber<T> {
    fn default() -> Self {
        Absorber {
            width_frac: lit(0.125),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
#[serde(deny_unknown_fields)]
pub struct EvolutionPlan<T> {
    pub t0: T,
    pub t1: T,
    pub dt: T,
    pub gauge: Gauge,
    #[serde(default)]
    pub absorber: Option<Absorber<T>>,
    /// Keep a snapshot every this many steps (the final state is always returned).
    #[serde(default)]
    pub snapshot_every: Option<usize>,
}

impl<T: Real> EvolutionPlan<T> {
    pub fn new(t0: T, t1: T, dt: T, gauge: Gauge) -> Self {
        EvolutionPlan {
            t0,
            t1,
            dt,
            gauge,
            absorber: None,
            snapshot_every: None,
        }
    }

    /// Number of steps; `(t1 − t0)/dt` must be an integer up to rounding.
    pub fn steps(&self, l_box: T) -> Result<usize> {
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(invalid("dt", "must be finite and > 0"));
        }
        if !(self.t1 >= self.t0) {
            return Err(invalid("t1", "must satisfy t0 <= t1"));
        }
        let q = (self.t1 - self.t0) / self.dt;
        let n = q.round();
        if (q - n).abs() > lit::<T>(1e-6) * q.max(T::one()) {
            return Err(invalid(
                "dt",
                format!("(t1 - t0)/dt = {q} is not an integer"),
            ));
        }
        if let Some(a) = self.absorber {
            if !(a.width_frac > T::zero()) || a.width_frac * l_box >= l_box / lit(4.0) {
                return Err(invalid("absorber", "width must be in (0, L/4)"));
            }
        }
        Ok(n.to_usize().unwrap_or(0))
    }
}

/// Fraction of the box half-width treated as the edge strip for Ritz-gauge monitoring.
pub const RITZ_EDGE_FRAC: f64 = 0.125;
pub const RITZ_EDGE_MASS_LIMIT: f64 = 1e-3;

/// Strang stepper `e^{−iW dt/2} e^{−iK dt} e^{−iW dt/2}` with time-dependent pieces
/// sampled at the step midpoint.
pub struct SplitStepper<'a, T: Real> {
    grid: Arc<Grid<T>>,
    tables: Option<&'a PulseTables<T>>,
    gauge: Gauge,
    dt: T,
    half_v: Vec<Complex<T>>,
    kin: Vec<Complex<T>>,
    mask: Option<Vec<T>>,
    edge: Option<Vec<bool>>,
    scratch: Vec<Complex<T>>,
}

impl<'a, T: Real> SplitStepper<'a, T> {
    pub fn new(
        grid: Arc<Grid<T>>,
        tables: Option<&'a PulseTables<T>>,
        pot: &PotentialSpec<T>,
        gauge: Gauge,
        dt: T,
        absorber: Option<Absorber<T>>,
    ) -> Result<Self> {
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(invalid("dt", "must be finite and > 0"));
        }
        let v = potential_on_grid(pot, &grid)?;
        let half = lit::<T>(0.5);
        let half_v = v.par_iter().map(|&vv| cis(-vv * dt * half)).collect();
        let inv_n = T::one() / lit(grid.len as f64);
        let kin = grid.map_wavevectors(|k| cis(-k.norm_sq() * dt) * inv_n);
        let mask = absorber.map(|a| absorber_mask(&grid, a.width_frac));
        let edge = (gauge == Gauge::Ritz).then(|| edge_strip(&grid, lit(RITZ_EDGE_FRAC)));
        Ok(SplitStepper {
            grid,
            tables,
            gauge,
            dt,
            half_v,
            kin,
            mask,
            edge,
            scratch: Vec::new(),
        })
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    fn axis_phases(&self, coef: Vec3<T>, use_k: bool) -> [Vec<Complex<T>>; 3] {
        std::array::from_fn(|a| {
            if a >= self.grid.dim() {
                return vec![Complex::new(T::one(), T::zero())];
            }
            let xs = if use_k { self.grid.k_axis() } else { self.grid.axis(a) };
            xs.iter().map(|&x| cis(coef[a] * x)).collect()
        })
    }

    /// Advances a position-space state from `t` to `t + dt`.
    pub fn step(&mut self, psi: &mut Wavefunction<T>, t: T) -> Result<()> {
        psi.require(Representation::Position)?;
        let g = self.grid.clone();
        let dt = self.dt;
        let half = lit::<T>(0.5);
        let tm = t + dt * half;
        let one = Complex::new(T::one(), T::zero());

        // Ritz: e^{−i(dA/dt)·x dt/2}; Kramers: nothing beyond V
        let (xph, kph, global) = match (self.gauge, self.tables) {
            (Gauge::Ritz, Some(tb)) => {
                let e = tb.field(tm);
                (Some(self.axis_phases(-e * (dt * half), false)), None, one)
            }
            (Gauge::Kramers, Some(tb)) => {
                let a = tb.vector_potential(tm);
                let kp = self.axis_phases(a * (lit::<T>(2.0) * dt), true);
                (None, Some(kp), cis(-a.norm_sq() * dt))
            }
            (_, None) => (None, None, one),
        };
        let pos_factor = |i: usize| -> Complex<T> {
            match &xph {
                None => self.half_v[i],
                Some(ph) => {
                    let [a, b, c] = g.unravel(i);
                    self.half_v[i] * ph[0][a] * ph[1][b] * ph[2][c]
                }
            }
        };

        let data = psi.data_mut();
        data.par_iter_mut().enumerate().for_each(|(i, c)| *c = *c * pos_factor(i));
        g.fft(data, &mut self.scratch, false);
        let kin = &self.kin;
        data.par_iter_mut().enumerate().for_each(|(i, c)| {
            let mut m = kin[i];
            if let Some(ph) = &kph {
                let [a, b, cc] = g.unravel(i);
                m = m * ph[0][a] * ph[1][b] * ph[2][cc] * global;
            }
            *c = *c * m;
        });
        g.fft(data, &mut self.scratch, true);
        data.par_iter_mut().enumerate().for_each(|(i, c)| *c = *c * pos_factor(i));
        if let Some(mask) = &self.mask {
            data.par_iter_mut().zip(mask.par_iter()).for_each(|(c, &m)| *c = *c * m);
        }

        let total = data.iter().fold(T::zero(), |a, c| a + c.norm_sqr());
        if !total.is_finite() {
            return Err(Error::Numerical(format!("non-finite state after step at t = {t}")));
        }
        if let Some(edge) = &self.edge {
            let em = data
                .iter()
                .zip(edge)
                .fold(T::zero(), |a, (c, &e)| if e { a + c.norm_sqr() } else { a });
            if em > lit::<T>(RITZ_EDGE_MASS_LIMIT) * total {
                return Err(Error::Numerical(format!(
                    "Ritz-gauge state reached the box edge at t = {t} (edge mass fraction {})",
                    em / total
                )));
            }
        }
        Ok(())
    }
}

/// `cos⁸` ramp over a strip of width `frac·L` on every face.
pub fn absorber_mask<T: Real>(grid: &Grid<T>, frac: T) -> Vec<T> {
    let l = grid.spec.l_box;
    let w = frac * l;
    let c = grid.spec.center;
    grid.map_positions(|x| {
        let mut m = T::one();
        for a in 0..grid.dim() {
            let depth = l - (x[a] - c[a]).abs();
            if depth < w {
                let u = (T::one() - depth / w) * T::FRAC_PI_2();
                m = m * u.cos().powi(8);
            }
        }
        m
    })
}

fn edge_strip<T: Real>(grid: &Grid<T>, frac: T) -> Vec<bool> {
    let l = grid.spec.l_box;
    let w = frac * l;
    let c = grid.spec.center;
    grid.map_positions(|x| (0..grid.dim()).any(|a| l - (x[a] - c[a]).abs() < w))
}

#[derive(Clone, Debug)]
pub struct Trajectory<T: Real> {
    pub final_state: Wavefunction<T>,
    pub snapshots: Vec<(T, Wavefunction<T>)>,
    pub steps: usize,
}

/// Runs a plan, calling `observe(step, t, ψ)` after every step.
pub fn evolve_split_with<T: Real, F>(
    psi: &Wavefunction<T>,
    plan: &EvolutionPlan<T>,
    tables: &PulseTables<T>,
    pot: &PotentialSpec<T>,
    mut observe: F,
) -> Result<Trajectory<T>>
where
    F: FnMut(usize, T, &Wavefunction<T>) -> Result<()>,
{
    let n = plan.steps(psi.grid().spec.l_box)?;
    let dt = if n == 0 { plan.dt } else { (plan.t1 - plan.t0) / lit(n as f64) };
    let mut stepper = SplitStepper::new(
        psi.grid().clone(),
        Some(tables),
        pot,
        plan.gauge,
        dt,
        plan.absorber,
    )?;
    let mut cur = psi.to_position();
    let mut snapshots = Vec::new();
    for j in 0..n {
        let t = plan.t0 + dt * lit(j as f64);
        stepper.step(&mut cur, t)?;
        let t_next = plan.t0 + dt * lit((j + 1) as f64);
        observe(j + 1, t_next, &cur)?;
        if let Some(every) = plan.snapshot_every {
            if every > 0 && (j + 1) % every == 0 {
                snapshots.push((t_next, cur.clone()));
            }
        }
    }
    Ok(Trajectory {
        final_state: cur,
        snapshots,
        steps: n,
    })
}

pub fn evolve_split<T: Real>(
    psi: &Wavefunction<T>,
    plan: &EvolutionPlan<T>,
    tables: &PulseTables<T>,
    pot: &PotentialSpec<T>,
) -> Result<Trajectory<T>> {
    evolve_split_with(psi, plan, tables, pot, |_, _, _| Ok(()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BridgeDirection {
    /// `ψ ↦ e^{−iA(t)·x} ψ`.
    KramersToRitz,
    /// `ψ ↦ e^{+iA(t)·x} ψ`.
    RitzToKramers,
}

pub fn gauge_bridge<T: Real>(
    psi: &Wavefunction<T>,
    t: T,
    tables: &PulseTables<T>,
    dir: BridgeDirection,
) -> Result<Wavefunction<T>> {
    psi.require(Representation::Position)?;
    let a = tables.vector_potential(t);
    let sign = match dir {
        BridgeDirection::KramersToRitz => -T::one(),
        BridgeDirection::RitzToKramers => T::one(),
    };
    let g = psi.grid().clone();
    let mut out = psi.clone();
    out.data_mut()
        .par_iter_mut()
        .enumerate()
        .for_each(|(i, c)| *c = *c * cis(sign * a.dot(g.position(i))));
    Ok(out)
}

/// Evolves with the static `p² − Z/√(r² + a²)` from `t_start` to `t_end` by split-step.
pub fn post_pulse_coulomb<T: Real>(
    psi: &Wavefunction<T>,
    t_start: T,
    t_end: T,
    z: T,
    soft_a: T,
    dt: T,
) -> Result<Wavefunction<T>> {
    if !(t_end >= t_start) {
        return Err(invalid("t", "post-pulse evolution needs t >= T"));
    }
    let pot = if z == T::zero() {
        PotentialSpec::Free
    } else {
        PotentialSpec::coulomb(z, soft_a)
    };
    let plan = EvolutionPlan::new(t_start, t_end, dt, Gauge::Kramers);
    let n = plan.steps(psi.grid().spec.l_box)?;
    if n == 0 {
        return Ok(psi.to_position());
    }
    let dt = (t_end - t_start) / lit(n as f64);
    let mut stepper = SplitStepper::new(psi.grid().clone(), None, &pot, Gauge::Kramers, dt, None)?;
    let mut cur = psi.to_position();
    for j in 0..n {
        stepper.step(&mut cur, t_start + dt * lit(j as f64))?;
    }
    Ok(cur)
}

/// Smooth cutoff: 1 on [0, 1/2], 0 from 1 on, `exp(1 − 1/(1 − u²))` with `u = 2r − 1` between.
pub fn cutoff_profile<T: Real>(r: T) -> T {
    let half = lit::<T>(0.5);
    if r <= half {
        T::one()
    } else if r >= T::one() {
        T::zero()
    } else {
        let u = lit::<T>(2.0) * r - T::one();
        (T::one() - T::one() / (T::one() - u * u)).exp()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
#[serde(deny_unknown_fields)]
pub struct DollardSpec<T> {
    #[serde(rename = "K0")]
    pub k0: T,
    #[serde(default = "default_phase_tol")]
    pub phase_quad_tol: T,
}

fn default_phase_tol<T: Real>() -> T {
    lit(1e-8)
}

impl<T: Real> DollardSpec<T> {
    pub fn new(k0: T) -> Self {
        DollardSpec {
            k0,
            phase_quad_tol: default_phase_tol(),
        }
    }
}

/// Multiplies by `χ(|k|/K0)` in momentum space. Returns the cut state (same
/// representation as the input) and the removed mass `‖ψ‖² − ‖χψ‖²`.
pub fn apply_cutoff<T: Real>(psi: &Wavefunction<T>, k0: T) -> Result<(Wavefunction<T>, T)> {
    if !(k0 > T::zero()) {
        return Err(invalid("K0", "must be > 0"));
    }
    let repr = psi.repr();
    let mut m = psi.to_momentum();
    let before = m.norm_sq();
    let g = m.grid().clone();
    if k0.is_finite() {
        m.data_mut()
            .par_iter_mut()
            .enumerate()
            .for_each(|(i, c)| *c = *c * cutoff_profile(g.wavevector(i).norm() / k0));
    }
    let removed = before - m.norm_sq();
    Ok((restore(m, repr), removed))
}

/// `Z ∫₀^{elapsed} dτ / |2τk − 2λT G(1 + τ/T)|` by adaptive Simpson. Aborts if the
/// denominator drops below `λT·C_ass2/2` at any node.
pub fn dollard_phase<T: Real>(
    k: Vec3<T>,
    elapsed: T,
    tables: &PulseTables<T>,
    z: T,
    tol: T,
) -> Result<T> {
    if elapsed <= T::zero() || z == T::zero() {
        return Ok(T::zero());
    }
    let lt = tables.lambda * tables.duration;
    let two = lit::<T>(2.0);
    let floor = lt * tables.c_ass2 / two;
    let min_den = Cell::new(T::infinity());
    let integrand = |tau: T| {
        let d = (k * (two * tau) - tables.big_g(T::one() + tau / tables.duration) * (two * lt))
            .norm();
        if d < min_den.get() {
            min_den.set(d);
        }
        d.recip()
    };
    let r = adaptive_simpson(integrand, T::zero(), elapsed, tol, T::zero());
    if !(min_den.get() >= floor) || !(floor > T::zero()) {
        return Err(Error::Numerical(format!(
            "Dollard denominator {} below λT·C_ass2/2 = {} at k = {:?}",
            min_den.get(),
            floor,
            k.0
        )));
    }
    if !r.converged {
        return Err(Error::Numerical(format!(
            "Dollard phase quadrature did not converge at k = {:?}",
            k.0
        )));
    }
    Ok(z * r.value)
}

const CUTOFF_LEAK: f64 = 1e-12;

fn dollard_phases<T: Real>(
    m: &mut Wavefunction<T>,
    elapsed: T,
    tables: &PulseTables<T>,
    z: T,
    dspec: &DollardSpec<T>,
) -> Result<()> {
    let g = m.grid().clone();
    let k0 = dspec.k0;
    let total = m.norm_sq();
    let outside = m
        .data()
        .iter()
        .enumerate()
        .fold(T::zero(), |a, (i, c)| {
            if g.wavevector(i).norm() >= k0 {
                a + c.norm_sqr()
            } else {
                a
            }
        })
        * g.k_cell();
    if outside > lit::<T>(CUTOFF_LEAK) * total.max(T::min_positive_value()) {
        return Err(Error::Domain(format!(
            "state is not cut off at K0 = {k0}: mass {outside:e} outside the ball"
        )));
    }
    let tol = dspec.phase_quad_tol;
    let phases: Vec<Result<T>> = (0..g.len)
        .into_par_iter()
        .map(|i| {
            let k = g.wavevector(i);
            if k.norm() >= k0 {
                Ok(T::zero())
            } else {
                dollard_phase(k, elapsed, tables, z, tol)
            }
        })
        .collect();
    for (c, p) in m.data_mut().iter_mut().zip(phases) {
        *c = *c * cis(p?);
    }
    Ok(())
}

/// Dollard-modified dynamics from the end of the pulse `T` to `t ≥ T`:
/// `U₀(t, T) e^{iΦ(p)} ψ_T`, where `U₀(t, T) = e^{−i(t−T)(p − A(T))²}` is the free
/// Kramers evolution. `ψ_T` must already be cut off at `K0`.
pub fn dollard_propagate<T: Real>(
    psi_t: &Wavefunction<T>,
    t: T,
    tables: &PulseTables<T>,
    z: T,
    dspec: &DollardSpec<T>,
) -> Result<Wavefunction<T>> {
    let big_t = tables.duration;
    if !(t >= big_t) {
        return Err(invalid("t", "Dollard propagation needs t >= T"));
    }
    let repr = psi_t.repr();
    let mut m = psi_t.to_momentum();
    dollard_phases(&mut m, t - big_t, tables, z, dspec)?;
    let out = free_kramers_exact(&m, big_t, t, tables)?;
    Ok(restore(out, repr))
}

/// `e^{−itp²} e^{iΦ_{t−T}(p)} ψ` without translation: the state whose spreading the
/// free-evolution lemma controls.
pub fn dollard_free<T: Real>(
    psi: &Wavefunction<T>,
    t: T,
    tables: &PulseTables<T>,
    z: T,
    dspec: &DollardSpec<T>,
) -> Result<Wavefunction<T>> {
    let big_t = tables.duration;
    if !(t >= big_t) {
        return Err(invalid("t", "needs t >= T"));
    }
    let repr = psi.repr();
    let mut m = psi.to_momentum();
    dollard_phases(&mut m, t - big_t, tables, z, dspec)?;
    let g = m.grid().clone();
    m.data_mut()
        .par_iter_mut()
        .enumerate()
        .for_each(|(i, c)| *c = *c * cis(-t * g.wavevector(i).norm_sq()));
    Ok(restore(m, repr))
}
