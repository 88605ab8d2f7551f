//! κ_λ, the free-approximation bound, both theorem lower bounds and scaling fits.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numerics::{adaptive_simpson, bisect, golden_section, linear_fit};
use crate::params::PhysParams;
use crate::pulse::PulseTables;
use crate::scalar::{lit, Real};

pub const S0_FLOOR: f64 = 1e-6;
const SCAN_NODES: usize = 96;
const KAPPA_REL_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Kappa<T> {
    pub value: T,
    pub s0: T,
    /// Minimum sits at s0 = 1, where κ = T/R².
    pub at_boundary: bool,
    /// Minimum sits at the bracket floor s0 = 10⁻⁶.
    pub at_floor: bool,
}

/// `K(s0) = ∫_{s0}^1 |G(τ)|⁻¹ (1 + τ⁻²) dτ` integrand in `u = ln τ`.
fn k_integrand<T: Real>(tables: &PulseTables<T>, u: T) -> T {
    let s = u.exp();
    s * (T::one() + (s * s).recip()) / tables.big_g(s).norm()
}

fn k_segment<T: Real>(tables: &PulseTables<T>, u0: T, u1: T) -> T {
    let r = adaptive_simpson(
        |u| k_integrand(tables, u),
        u0,
        u1,
        T::zero(),
        lit(KAPPA_REL_TOL),
    );
    if r.converged {
        r.value
    } else {
        T::infinity()
    }
}

/// `κ_λ = inf_{0<s0<1} { (T/R²) s0 + (Rλ)⁻¹ K(s0) }`.
///
/// Scan on a log grid of s0, golden-section inside the best bracket, then bisection on
/// the sign of the derivative `T/R² − (Rλ)⁻¹ |G(s0)|⁻¹(1 + s0⁻²)` to reach the
/// minimiser to working precision.
pub fn kappa_lambda<T: Real>(
    tables: &PulseTables<T>,
    r: T,
    duration: T,
    lambda: T,
) -> Result<Kappa<T>> {
    for (name, v) in [("R", r), ("T", duration), ("lambda", lambda)] {
        if !v.is_finite() || v <= T::zero() {
            return Err(invalid(name, "must be finite and > 0"));
        }
    }
    let a = duration / (r * r);
    let b = (r * lambda).recip();
    let u_lo = lit::<T>(S0_FLOOR).ln();
    let m = SCAN_NODES;
    let us: Vec<T> = (0..=m)
        .map(|i| u_lo * (T::one() - lit::<T>(i as f64) / lit(m as f64)))
        .collect();
    let mut ks = vec![T::zero(); m + 1];
    for i in (0..m).rev() {
        ks[i] = ks[i + 1] + k_segment(tables, us[i], us[i + 1]);
    }
    if ks[m - 1].is_infinite() || ks.iter().take(m).all(|k| !k.is_finite()) {
        return Err(Error::Domain(
            "∫|G|⁻¹ diverges at every sampled s0 (ass0 violated)".into(),
        ));
    }
    let g_at = |u: T, k: T| a * u.exp() + b * k;
    let mut best = m;
    for i in 0..=m {
        if g_at(us[i], ks[i]) < g_at(us[best], ks[best]) {
            best = i;
        }
    }
    let deriv = |s: T| a - b * (T::one() + (s * s).recip()) / tables.big_g(s).norm();

    if best == m && deriv(T::one()) <= T::zero() {
        return Ok(Kappa {
            value: a,
            s0: T::one(),
            at_boundary: true,
            at_floor: false,
        });
    }
    let lo = best.saturating_sub(1);
    let hi = (best + 1).min(m);
    let k_hi = ks[hi];
    let u_hi = us[hi];
    let k_of = |u: T| k_hi + k_segment(tables, u, u_hi);
    let (u_gs, _) = golden_section(|u| g_at(u, k_of(u)), us[lo], u_hi, lit(1e-9));
    let s0 = bisect(deriv, us[lo].exp(), u_hi.exp(), 200).unwrap_or_else(|| u_gs.exp());
    let u0 = s0.ln();
    let value = g_at(u0, k_of(u0));
    Ok(Kappa {
        value,
        s0,
        at_boundary: false,
        at_floor: best == 0,
    })
}

/// `C·V0·D·R·(1 + R⁴/T²)·κ`.
pub fn fks_bound<T: Real>(v0: T, d: T, r: T, duration: T, kappa: T, c: T) -> T {
    c * v0 * d * r * (T::one() + r.powi(4) / (duration * duration)) * kappa
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
#[serde(deny_unknown_fields, default)]
pub struct BoundConstants<T> {
    pub c1: T,
    pub c2: T,
    pub c3: T,
}

impl<T: Real> Default for BoundConstants<T> {
    fn default() -> Self {
        BoundConstants {
            c1: T::one(),
            c2: T::one(),
            c3: T::one(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TheoremBound<T> {
    /// `None` when `C_ass2·λ ≤ δ`.
    pub value: Option<T>,
    /// `C1 [1/(R(C_ass2 λ − δ)) + 1/(Rλ tan θ)] (1 + R²/t)`.
    pub cone_deficit: Option<T>,
    /// Short range: `C2 V0 T / (α (λT/D)^{1+α}) (1 + R⁴/T²)`; Coulomb: `C2 Z R (1 + R⁴/T²) κ`.
    pub second_deficit: T,
    /// Short range: `C3 V0 D R (1 + R⁴/T²) κ`; Coulomb: `C3 (Rλ)^{−1/7} (Z T^{3/2}/R²)^{4/7}`.
    pub third_deficit: T,
    pub vacuous: bool,
    pub constants: BoundConstants<T>,
    pub delta: T,
    pub kappa: Kappa<T>,
}

fn cone_deficit<T: Real>(p: &PhysParams<T>, c_ass2: T, delta: T, t: T, c1: T) -> Option<T> {
    let drift = c_ass2 * p.lambda - delta;
    if !(drift > T::zero()) {
        return None;
    }
    let rl = p.r * p.lambda;
    Some(
        c1 * ((p.r * drift).recip() + (rl * p.theta.tan()).recip())
            * (T::one() + p.r * p.r / t),
    )
}

fn finish<T: Real>(
    cone: Option<T>,
    second: T,
    third: T,
    constants: BoundConstants<T>,
    delta: T,
    kappa: Kappa<T>,
) -> TheoremBound<T> {
    let value = cone.map(|c| T::one() - c - second - third);
    TheoremBound {
        vacuous: value.is_none_or(|v| v <= T::zero()),
        value,
        cone_deficit: cone,
        second_deficit: second,
        third_deficit: third,
        constants,
        delta,
        kappa,
    }
}

fn check_t<T: Real>(p: &PhysParams<T>, t: T) -> Result<()> {
    p.check()?;
    if !(t >= p.duration) {
        return Err(invalid("t", "theorem bounds hold for t >= T"));
    }
    Ok(())
}

/// Short-range lower bound on `‖χ_{δ,θ}(t) U(t,0) ψ‖`.
pub fn thm_sr_lower_bound<T: Real>(
    p: &PhysParams<T>,
    tables: &PulseTables<T>,
    t: T,
    consts: &BoundConstants<T>,
) -> Result<TheoremBound<T>> {
    check_t(p, t)?;
    if !(p.alpha > T::zero()) {
        return Err(invalid("alpha", "short-range bound needs alpha > 0"));
    }
    let kappa = kappa_lambda(tables, p.r, p.duration, p.lambda)?;
    let delta = p.delta_or_default(tables.c_ass2);
    let geo = T::one() + p.r.powi(4) / (p.duration * p.duration);
    let cone = cone_deficit(p, tables.c_ass2, delta, t, consts.c1);
    let second = consts.c2 * p.v0 * p.duration
        / (p.alpha * (p.lambda * p.duration / p.d).powf(T::one() + p.alpha))
        * geo;
    let third = fks_bound(p.v0, p.d, p.r, p.duration, kappa.value, consts.c3);
    Ok(finish(cone, second, third, *consts, delta, kappa))
}

/// Coulomb lower bound on `‖χ_{δ,θ}(t) U(t,0) ψ‖`.
pub fn thm_cou_lower_bound<T: Real>(
    p: &PhysParams<T>,
    tables: &PulseTables<T>,
    t: T,
    consts: &BoundConstants<T>,
) -> Result<TheoremBound<T>> {
    check_t(p, t)?;
    let kappa = kappa_lambda(tables, p.r, p.duration, p.lambda)?;
    let delta = p.delta_or_default(tables.c_ass2);
    let geo = T::one() + p.r.powi(4) / (p.duration * p.duration);
    let cone = cone_deficit(p, tables.c_ass2, delta, t, consts.c1);
    let second = consts.c2 * p.z * p.r * geo * kappa.value;
    let third = consts.c3
        * (p.r * p.lambda).powf(lit(-1.0 / 7.0))
        * (p.z * p.duration.powf(lit(1.5)) / (p.r * p.r)).powf(lit(4.0 / 7.0));
    Ok(finish(cone, second, third, *consts, delta, kappa))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ScalingFit<T> {
    pub exponent: T,
    pub stderr: T,
    pub prefactor: T,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn fit_scaling<T: Real>(xs: &[T], ys: &[T]) -> Result<ScalingFit<T>> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(invalid("xs", "need at least two (x, y) pairs of equal length"));
    }
    if xs.iter().chain(ys).any(|v| !(*v > T::zero()) || !v.is_finite()) {
        return Err(invalid("ys", "scaling fit needs finite positive data"));
    }
    let lx: Vec<T> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<T> = ys.iter().map(|y| y.ln()).collect();
    let f = linear_fit(&lx, &ly).ok_or_else(|| invalid("xs", "need two distinct x values"))?;
    Ok(ScalingFit {
        exponent: f.slope,
        stderr: f.slope_stderr,
        prefactor: f.intercept.exp(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BoundReport<T> {
    pub kappa: Kappa<T>,
    pub fks_bound: T,
    pub thm_sr: Option<TheoremBound<T>>,
    pub thm_cou: Option<TheoremBound<T>>,
    pub t: T,
    pub constants_used: BoundConstants<T>,
    pub fks_constant: T,
    pub c_ass2: T,
    pub s0_floor: T,
    pub kappa_rel_tol: T,
    pub pulse_quad_tol: T,
}

/// Everything analytic for one parameter point. The short-range bound is included when
/// `alpha > 0` and the Coulomb bound when `Z > 0`.
pub fn bound_report<T: Real>(
    p: &PhysParams<T>,
    tables: &PulseTables<T>,
    t: T,
    consts: &BoundConstants<T>,
) -> Result<BoundReport<T>> {
    check_t(p, t)?;
    let kappa = kappa_lambda(tables, p.r, p.duration, p.lambda)?;
    let thm_sr = if p.alpha > T::zero() && p.v0 > T::zero() {
        Some(thm_sr_lower_bound(p, tables, t, consts)?)
    } else {
        None
    };
    let thm_cou = if p.z > T::zero() {
        Some(thm_cou_lower_bound(p, tables, t, consts)?)
    } else {
        None
    };
    Ok(BoundReport {
        kappa,
        fks_bound: fks_bound(p.v0, p.d, p.r, p.duration, kappa.value, T::one()),
        thm_sr,
        thm_cou,
        t,
        constants_used: *consts,
        fks_constant: T::one(),
        c_ass2: tables.c_ass2,
        s0_floor: lit(S0_FLOOR),
        kappa_rel_tol: lit(KAPPA_REL_TOL),
        pulse_quad_tol: tables.quad_tol,
    })
}
