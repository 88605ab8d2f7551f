//! Cone capture, survival, spreading and ejection kinematics.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::pulse::PulseTables;
use crate::scalar::{lit, Real, Vec3};
use crate::state::{Representation, Wavefunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisMode {
    /// Axis along the displacement at time t, `−G(t/T)`.
    GOfT,
    /// Fixed asymptotic axis `−F(1)`.
    F1Fixed,
}

/// Indicator of `|x| ≥ δt` intersected with the cone of half-angle θ about the
/// ejection axis. The Kramers evolution translates the state by `−2λT G(t/T)`, so the
/// axis points along `−G(t/T)` (or `−F(1)` asymptotically).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ConeObservable<T> {
    pub delta: T,
    pub theta: T,
    pub axis_mode: AxisMode,
}

impl<T: Real> ConeObservable<T> {
    pub fn new(delta: T, theta: T, axis_mode: AxisMode) -> Result<Self> {
        if !(theta > T::zero() && theta < T::FRAC_PI_2()) {
            return Err(invalid("theta", "must lie in (0, pi/2)"));
        }
        if !(delta >= T::zero()) || !delta.is_finite() {
            return Err(invalid("delta", "must be finite and >= 0"));
        }
        Ok(ConeObservable {
            delta,
            theta,
            axis_mode,
        })
    }

    pub fn axis(&self, t: T, tables: &PulseTables<T>) -> Vec3<T> {
        match self.axis_mode {
            AxisMode::GOfT => -tables.big_g(t / tables.duration),
            AxisMode::F1Fixed => -tables.f1,
        }
    }

    /// Whether `x` lies in the region for the given (nonzero) axis.
    #[inline]
    pub fn contains(&self, x: Vec3<T>, t: T, axis: Vec3<T>) -> bool {
        let r = x.norm();
        r >= self.delta * t && x.dot(axis) >= r * axis.norm() * self.theta.cos()
    }
}

/// `N(t) = ‖χ_{δ,θ}(t) ψ‖`.
pub fn cone_norm<T: Real>(
    psi: &Wavefunction<T>,
    t: T,
    cone: &ConeObservable<T>,
    tables: &PulseTables<T>,
) -> Result<T> {
    psi.require(Representation::Position)?;
    if !(t > T::zero()) && cone.axis_mode == AxisMode::GOfT {
        return Err(invalid("t", "G-axis cone needs t > 0"));
    }
    let axis = cone.axis(t, tables);
    if !(axis.norm() > T::zero()) {
        return Err(Error::Domain("cone axis vector is zero".into()));
    }
    let g = psi.grid();
    let s = psi
        .data()
        .iter()
        .enumerate()
        .fold(T::zero(), |a, (i, c)| {
            if cone.contains(g.position(i), t, axis) {
                a + c.norm_sqr()
            } else {
                a
            }
        });
    Ok((s * g.cell()).sqrt())
}

/// `|⟨ψ₀, ψ(t)⟩|²`.
pub fn survival_probability<T: Real>(psi_t: &Wavefunction<T>, psi_0: &Wavefunction<T>) -> Result<T> {
    Ok(psi_0.inner(psi_t)?.norm_sqr())
}

/// `W = ⟨ψ, x²ψ⟩^{1/2}` about the coordinate origin.
pub fn spreading<T: Real>(psi: &Wavefunction<T>) -> Result<T> {
    Ok(psi.position_moment(|x| x.norm_sq())?.sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Kinematics<T> {
    /// `2⟨p − A(t)⟩ / ‖ψ‖²`.
    pub mean_velocity: Vec3<T>,
    /// `atan(σ⊥ / |⟨q∥⟩|)` about the A(t) axis.
    pub opening_angle: T,
    pub sigma_perp: T,
    pub q_parallel: T,
}

/// Gauge-invariant kinematics of a Kramers-gauge state at time `t`. The kinetic
/// momentum is `q = k − A(t)`, which is the canonical momentum after bridging to the
/// Ritz gauge; it is computed directly so the large shift A never has to be resolved
/// on the grid.
pub fn ejection_kinematics<T: Real>(
    psi: &Wavefunction<T>,
    t: T,
    tables: &PulseTables<T>,
) -> Result<Kinematics<T>> {
    let m = psi.to_momentum();
    let a = tables.vector_potential(t);
    let n2 = m.norm_sq();
    if !(n2 > T::zero()) {
        return Err(Error::Domain("kinematics of a zero state".into()));
    }
    let mut mean = Vec3::zero();
    for c in 0..3 {
        mean[c] = m.momentum_moment(|k| (k - a)[c])? / n2;
    }
    let axis = if a.norm() > T::zero() { a } else { mean };
    let an = axis.norm();
    let spread = m.momentum_moment(|k| (k - a - mean).norm_sq())? / n2;
    let q_par = if an > T::zero() { mean.dot(axis) / an } else { T::zero() };
    let u = if an > T::zero() { axis.scale(an.recip()) } else { Vec3::zero() };
    let var_par = m.momentum_moment(|k| {
        let d = (k - a - mean).dot(u);
        d * d
    })? / n2;
    let sigma_perp = (spread - var_par).max(T::zero()).sqrt();
    let eps = lit::<T>(1e-9) * (T::one() + spread.sqrt());
    if !(q_par.abs() > eps) {
        return Err(Error::Domain(
            "opening angle undefined: no mean kinetic momentum along the axis".into(),
        ));
    }
    Ok(Kinematics {
        mean_velocity: mean * lit(2.0),
        opening_angle: (sigma_perp / q_par.abs()).atan(),
        sigma_perp,
        q_parallel: q_par,
    })
}
