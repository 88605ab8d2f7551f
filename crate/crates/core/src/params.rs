//! Physical parameters, the theorems' standing hypotheses, and dimensionless groups.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::{lit, Real};

/// Physical inputs, all in units with m = 1/2, ħ = 1, e = 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
#[serde(deny_unknown_fields)]
pub struct PhysParams<T> {
    pub lambda: T,
    #[serde(rename = "T")]
    pub duration: T,
    #[serde(rename = "R")]
    pub r: T,
    #[serde(rename = "Z", default = "one")]
    pub z: T,
    #[serde(rename = "V0", default = "one")]
    pub v0: T,
    #[serde(rename = "D", default = "one")]
    pub d: T,
    #[serde(default = "one")]
    pub alpha: T,
    /// Cone speed threshold. `None` resolves to `0.1·λ·C_ass2` once the pulse is known.
    #[serde(default)]
    pub delta: Option<T>,
    #[serde(default = "default_theta")]
    pub theta: T,
    /// Momentum cutoff. `None` resolves to `(R/T)·C0·(Rλ)^{2/35}`.
    #[serde(rename = "K0", default)]
    pub k0: Option<T>,
}

fn one<T: Real>() -> T {
    T::one()
}

fn default_theta<T: Real>() -> T {
    lit(0.2)
}

impl<T: Real> PhysParams<T> {
    pub fn new(lambda: T, duration: T, r: T) -> Self {
        PhysParams {
            lambda,
            duration,
            r,
            z: T::one(),
            v0: T::one(),
            d: T::one(),
            alpha: T::one(),
            delta: None,
            theta: default_theta(),
            k0: None,
        }
    }

    /// Rejects non-finite values and values outside their domain. This is a hard
    /// error, separate from the hypothesis checks in [`validate`].
    pub fn check(&self) -> Result<()> {
        let positive = [
            ("lambda", self.lambda),
            ("T", self.duration),
            ("R", self.r),
        ];
        for (name, v) in positive {
            if !v.is_finite() || v <= T::zero() {
                return Err(invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        let nonneg = [("Z", self.z), ("V0", self.v0), ("D", self.d), ("alpha", self.alpha)];
        for (name, v) in nonneg {
            if !v.is_finite() || v < T::zero() {
                return Err(invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        if !(self.theta > T::zero() && self.theta < T::FRAC_PI_2()) {
            return Err(invalid("theta", format!("must lie in (0, pi/2), got {}", self.theta)));
        }
        if let Some(d) = self.delta {
            if !d.is_finite() || d <= T::zero() {
                return Err(invalid("delta", format!("must be finite and > 0, got {d}")));
            }
        }
        if let Some(k) = self.k0 {
            if !k.is_finite() || k <= T::zero() {
                return Err(invalid("K0", format!("must be finite and > 0, got {k}")));
            }
        }
        Ok(())
    }

    pub fn k0_or_default(&self, c0: T) -> T {
        self.k0.unwrap_or_else(|| default_k0(self.r, self.duration, self.lambda, c0))
    }

    pub fn delta_or_default(&self, c_ass2: T) -> T {
        self.delta.unwrap_or_else(|| lit::<T>(0.1) * self.lambda * c_ass2)
    }

    pub fn groups(&self, c0: T) -> DimensionlessGroups<T> {
        let k0 = self.k0_or_default(c0);
        DimensionlessGroups {
            rl: self.r * self.lambda,
            r2_over_t: self.r * self.r / self.duration,
            z_over_lambda: self.z / self.lambda,
            k0r: k0 * self.r,
            k0t_over_r: k0 * self.duration / self.r,
        }
    }
}

/// `K0 = (R/T)·C0·(Rλ)^{2/35}`.
pub fn default_k0<T: Real>(r: T, duration: T, lambda: T, c0: T) -> T {
    r / duration * c0 * (r * lambda).powf(lit(2.0 / 35.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DimensionlessGroups<T> {
    #[serde(rename = "RL")]
    pub rl: T,
    #[serde(rename = "R2_over_T")]
    pub r2_over_t: T,
    #[serde(rename = "Z_over_lambda")]
    pub z_over_lambda: T,
    #[serde(rename = "K0R")]
    pub k0r: T,
    #[serde(rename = "K0T_over_R")]
    pub k0t_over_r: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HypothesisSet {
    ShortRange,
    Coulomb,
}

/// The unnamed constants of the theorem statements, made explicit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
#[serde(deny_unknown_fields, default)]
pub struct Bands<T> {
    /// `R²/T ∈ [1/C, C]`.
    pub band_c: T,
    /// `K0 ≤ c·λ/2`.
    pub k0_c: T,
    /// `C0` in the default K0 choice.
    pub k0_c0: T,
}

impl<T: Real> Default for Bands<T> {
    fn default() -> Self {
        Bands {
            band_c: lit(10.0),
            k0_c: T::one(),
            k0_c0: T::one(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct HypothesisCheck<T> {
    pub name: String,
    pub value: T,
    pub lower: Option<T>,
    pub upper: Option<T>,
    pub passed: bool,
    pub required: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ValidationReport<T> {
    pub set: HypothesisSet,
    pub checks: Vec<HypothesisCheck<T>>,
    pub groups: DimensionlessGroups<T>,
    pub bands: Bands<T>,
    pub passed: bool,
}

impl<T: Real> ValidationReport<T> {
    pub fn failures(&self) -> impl Iterator<Item = &HypothesisCheck<T>> {
        self.checks.iter().filter(|c| c.required && !c.passed)
    }
}

/// Checks the hypotheses of the chosen theorem. Every check is always listed, in a
/// fixed order; `required` marks the ones the theorem actually needs.
pub fn validate<T: Real>(
    params: &PhysParams<T>,
    set: HypothesisSet,
    bands: &Bands<T>,
) -> Result<ValidationReport<T>> {
    params.check()?;
    if !(bands.band_c >= T::one()) || !(bands.k0_c > T::zero()) || !(bands.k0_c0 > T::zero()) {
        return Err(invalid("bands", "band_c must be >= 1, k0_c and k0_c0 > 0"));
    }
    let g = params.groups(bands.k0_c0);
    let coulomb = set == HypothesisSet::Coulomb;
    let k0 = params.k0_or_default(bands.k0_c0);
    let lt_over_r = params.lambda * params.duration / params.r;

    let within = |v: T, lo: Option<T>, hi: Option<T>| {
        lo.is_none_or(|l| v >= l) && hi.is_none_or(|h| v <= h)
    };
    let mut checks = Vec::new();
    let mut push = |name: &str, value: T, lower: Option<T>, upper: Option<T>, required: bool| {
        checks.push(HypothesisCheck {
            name: name.to_string(),
            value,
            lower,
            upper,
            passed: within(value, lower, upper),
            required,
        });
    };
    push(
        "R2_over_T_band",
        g.r2_over_t,
        Some(bands.band_c.recip()),
        Some(bands.band_c),
        coulomb,
    );
    push("Z_le_lambda", g.z_over_lambda, None, Some(T::one()), coulomb);
    push(
        "K0_le_c_lambda_half",
        k0,
        None,
        Some(bands.k0_c * params.lambda / lit(2.0)),
        coulomb,
    );
    push("lambda_T_ge_R", lt_over_r, Some(T::one()), None, true);
    push("R_lambda_ge_1", g.rl, Some(T::one()), None, true);

    let passed = checks.iter().all(|c| !c.required || c.passed);
    Ok(ValidationReport {
        set,
        checks,
        groups: g,
        bands: *bands,
        passed,
    })
}

/// Keldysh parameter for circular polarisation, `0.33·sqrt(Ip/(I0·L²))` with Ip in eV,
/// I0 in 10¹⁴ W/cm² and the wavelength in µm.
pub fn keldysh<T: Real>(ip_ev: T, i0_1e14: T, l_um: T) -> Result<T> {
    for (name, v) in [("Ip", ip_ev), ("I0", i0_1e14), ("L", l_um)] {
        if !v.is_finite() || v <= T::zero() {
            return Err(invalid(name, format!("must be finite and > 0, got {v}")));
        }
    }
    Ok(lit::<T>(0.33) * (ip_ev / (i0_1e14 * l_um * l_um)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keldysh_unit() {
        assert!((keldysh(1.0f64, 1.0, 1.0).unwrap() - 0.33).abs() < 1e-15);
        assert!(keldysh(0.0f64, 1.0, 1.0).is_err());
    }

    #[test]
    fn default_k0_formula() {
        let k = default_k0(2.0f64, 1.0, 40.0, 1.0);
        assert!((k - 2.0 * 80f64.powf(2.0 / 35.0)).abs() < 1e-14);
    }
}
