//! Static nuclear potentials.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::{Real, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec<T> {
    /// No potential.
    Free,
    /// `−V0·D / (r·(1 + (r/D)²)^{α/2})` with `r = √(|x|² + a²)`.
    ShortRange {
        #[serde(rename = "V0")]
        v0: T,
        #[serde(rename = "D")]
        d: T,
        alpha: T,
        #[serde(default)]
        soft_a: T,
    },
    /// `−Z / √(|x|² + a²)`.
    Coulomb {
        #[serde(rename = "Z")]
        z: T,
        #[serde(default)]
        soft_a: T,
    },
}

impl<T: Real> PotentialSpec<T> {
    pub fn coulomb(z: T, soft_a: T) -> Self {
        PotentialSpec::Coulomb { z, soft_a }
    }

    pub fn short_range(v0: T, d: T, alpha: T, soft_a: T) -> Self {
        PotentialSpec::ShortRange { v0, d, alpha, soft_a }
    }

    pub fn soft_a(&self) -> T {
        match self {
            PotentialSpec::Free => T::zero(),
            PotentialSpec::ShortRange { soft_a, .. } | PotentialSpec::Coulomb { soft_a, .. } => {
                *soft_a
            }
        }
    }

    pub fn check(&self) -> Result<()> {
        let fin_pos = |name: &str, v: T| {
            if v.is_finite() && v > T::zero() {
                Ok(())
            } else {
                Err(invalid(name, format!("must be finite and > 0, got {v}")))
            }
        };
        match *self {
            PotentialSpec::Free => {}
            PotentialSpec::ShortRange { v0, d, alpha, .. } => {
                fin_pos("V0", v0)?;
                fin_pos("D", d)?;
                fin_pos("alpha", alpha)?;
            }
            PotentialSpec::Coulomb { z, .. } => fin_pos("Z", z)?,
        }
        let a = self.soft_a();
        if !a.is_finite() || a < T::zero() {
            return Err(invalid("soft_a", format!("must be finite and >= 0, got {a}")));
        }
        Ok(())
    }

    /// V(x), with the nucleus at the origin.
    pub fn eval(&self, x: Vec3<T>) -> Result<T> {
        self.eval_shifted(x, Vec3::zero())
    }

    /// V(x − shift).
    pub fn eval_shifted(&self, x: Vec3<T>, shift: Vec3<T>) -> Result<T> {
        self.check()?;
        if !x.is_finite() || !shift.is_finite() {
            return Err(invalid("x", "position must be finite"));
        }
        let r2 = (x - shift).norm_sq();
        if let PotentialSpec::Free = self {
            return Ok(T::zero());
        }
        let a = self.soft_a();
        let reff = (r2 + a * a).sqrt();
        if reff == T::zero() {
            return Err(Error::Domain(
                "potential is singular at r = 0 without a soft core".into(),
            ));
        }
        Ok(match *self {
            PotentialSpec::Free => unreachable!(),
            PotentialSpec::ShortRange { v0, d, alpha, .. } => {
                let q = reff / d;
                -v0 * d / (reff * (T::one() + q * q).powf(alpha / (T::one() + T::one())))
            }
            PotentialSpec::Coulomb { z, .. } => -z / reff,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bare_coulomb_singular_at_origin() {
        let p = PotentialSpec::coulomb(1.0f64, 0.0);
        assert!(matches!(p.eval(Vec3::zero()), Err(Error::Domain(_))));
    }
}
