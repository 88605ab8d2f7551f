use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::linear_fit;
use crate::scalar::{lit, Real};
use crate::state::wavefunction::{Representation, Wavefunction};

/// Slope ratio between the upper and lower halves of the momentum window above which
/// the decay is classed as faster than any power law.
const STEEPENING: f64 = 1.5;
const MIN_POINTS: usize = 8;

#[derive(Clone, Debug, Serialize)]
#[serde(bound = "T: Real")]
pub struct DecayReport<T> {
    /// Decay length from `log|ψ| ≈ c − r/R` over the outer half of the box.
    pub r_fit: T,
    /// Smallest C with `|ψ(x)| ≤ C R^{−d/2} e^{−|x|/R}` on the grid, using `r_fit`.
    pub c_fit: T,
    /// Power from `log|ψ̂| ≈ c − γ log|p|` on `|p| ∈ [k_max/8, k_max/2]`; `None` when
    /// too few points stay above the noise floor.
    pub gamma: Option<T>,
    pub gamma_lower: Option<T>,
    pub gamma_upper: Option<T>,
    pub super_polynomial: bool,
    /// γ > 5/2, needed by the short-range theorem.
    pub gamma_gt_5_2: bool,
    /// Decay at least as fast as |p|^{-4} within 15%.
    pub gamma4_compatible: bool,
}

pub fn check_decay<T: Real>(psi: &Wavefunction<T>) -> Result<DecayReport<T>> {
    psi.require(Representation::Position)?;
    let g = psi.grid();
    let amax = psi.data().iter().fold(T::zero(), |a, c| a.max(c.norm()));
    if !(amax > T::zero()) {
        return Err(Error::Domain("check_decay on an all-zero field".into()));
    }
    let floor = amax * lit(1e-13);

    let rho = g.inscribed_radius();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (i, c) in psi.data().iter().enumerate() {
        let r = g.position(i).norm();
        let a = c.norm();
        if r >= rho * lit(0.5) && r <= rho && a > floor {
            xs.push(r);
            ys.push(a.ln());
        }
    }
    let r_fit = match linear_fit(&xs, &ys) {
        Some(f) if f.slope < T::zero() => -f.slope.recip(),
        _ => T::infinity(),
    };
    let d = g.dim() as i32;
    let c_fit = if r_fit.is_finite() {
        let pre = r_fit.powf(lit::<T>(0.5) * lit(d as f64));
        psi.data().iter().enumerate().fold(T::zero(), |acc, (i, c)| {
            acc.max(c.norm() * pre * (g.position(i).norm() / r_fit).exp())
        })
    } else {
        T::infinity()
    };

    let mom = psi.to_momentum();
    let pmax = mom.data().iter().fold(T::zero(), |a, c| a.max(c.norm()));
    let pfloor = pmax * lit(1e-12);
    let kmax = g.k_max();
    let (klo, khi) = (kmax / lit(8.0), kmax / lit(2.0));
    let kmid = (klo * khi).sqrt();
    let mut all = (Vec::new(), Vec::new());
    let mut lower = (Vec::new(), Vec::new());
    let mut upper = (Vec::new(), Vec::new());
    let mut span_hi = T::zero();
    for (i, c) in mom.data().iter().enumerate() {
        let k = g.wavevector(i).norm();
        if k < klo || k > khi {
            continue;
        }
        let a = c.norm();
        if a <= pfloor {
            continue;
        }
        let (lk, la) = (k.ln(), a.ln());
        span_hi = span_hi.max(k);
        all.0.push(lk);
        all.1.push(la);
        let half = if k < kmid { &mut lower } else { &mut upper };
        half.0.push(lk);
        half.1.push(la);
    }
    let fit = |p: &(Vec<T>, Vec<T>)| {
        if p.0.len() < MIN_POINTS {
            None
        } else {
            linear_fit(&p.0, &p.1).map(|f| -f.slope)
        }
    };
    let (gamma, gamma_lower, gamma_upper) = (fit(&all), fit(&lower), fit(&upper));
    let truncated = gamma.is_none() || gamma_upper.is_none() || span_hi < kmid;
    let steep = match (gamma_lower, gamma_upper) {
        (Some(lo), Some(up)) => lo > T::zero() && up > lo * lit(STEEPENING),
        _ => false,
    };
    let super_polynomial = truncated || steep;
    let gamma_gt_5_2 = super_polynomial || gamma.is_some_and(|g| g > lit(2.5));
    let gamma4_compatible = super_polynomial || gamma.is_some_and(|g| g >= lit(4.0 * 0.85));
    Ok(DecayReport {
        r_fit,
        c_fit,
        gamma,
        gamma_lower,
        gamma_upper,
        super_polynomial,
        gamma_gt_5_2,
        gamma4_compatible,
    })
}
