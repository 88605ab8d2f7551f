//! Pulse families and the hierarchy E → F → G on the dimensionless time s = t/T.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numerics::{adaptive_simpson, golden_section};
use crate::scalar::{lit, to_f64, Real, Vec3};

pub const DEFAULT_NODES: usize = 4096;
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Envelope<T> {
    /// `h(s) = sin²(πs)` on [0, 1].
    SinSquared,
    /// Piecewise-linear through uniformly spaced `values` on `[start, end]`, zero outside.
    Samples { start: T, end: T, values: Vec<T> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum PulseShape<T> {
    /// `f(s) = ε` on [0, 1].
    Linear { epsilon: Vec3<T> },
    /// `f(s) = h(s)·(cos ω(s−½), ε_ell·sin ω(s−½), 0)`, ω dimensionless.
    CircularModulated {
        omega: T,
        #[serde(default = "one")]
        ellipticity: T,
        envelope: Envelope<T>,
    },
    /// Vector samples of f, uniformly spaced on `[start, end]`, piecewise linear, zero outside.
    CustomSampled {
        start: T,
        end: T,
        samples: Vec<Vec3<T>>,
    },
}

fn one<T: Real>() -> T {
    T::one()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PulseSpec<T> {
    pub shape: PulseShape<T>,
    pub lambda: T,
    #[serde(rename = "T")]
    pub duration: T,
}

impl<T: Real> PulseSpec<T> {
    pub fn linear(epsilon: Vec3<T>, lambda: T, duration: T) -> Self {
        PulseSpec {
            shape: PulseShape::Linear { epsilon },
            lambda,
            duration,
        }
    }
}

fn interp_linear<T: Real>(s: T, start: T, end: T, len: usize) -> Option<(usize, T)> {
    if s < start || s > end || len < 2 {
        return None;
    }
    let pos = (s - start) / (end - start) * lit((len - 1) as f64);
    let j = pos.floor().to_usize().unwrap_or(0).min(len - 2);
    Some((j, pos - lit(j as f64)))
}

impl<T: Real> Envelope<T> {
    pub fn eval(&self, s: T) -> T {
        match self {
            Envelope::SinSquared => {
                if s < T::zero() || s > T::one() {
                    T::zero()
                } else {
                    let v = (T::PI() * s).sin();
                    v * v
                }
            }
            Envelope::Samples { start, end, values } => {
                match interp_linear(s, *start, *end, values.len()) {
                    Some((j, u)) => values[j] * (T::one() - u) + values[j + 1] * u,
                    None => T::zero(),
                }
            }
        }
    }

    fn check(&self) -> Result<()> {
        let Envelope::Samples { start, end, values } = self else {
            return Ok(());
        };
        check_support(*start, *end, values.len())?;
        if values.iter().any(|v| !v.is_finite() || *v < T::zero()) {
            return Err(invalid("envelope", "samples must be finite and >= 0"));
        }
        let tol = lit::<T>(1e-12);
        if (*start + *end - T::one()).abs() > tol {
            return Err(invalid("envelope", "support must be symmetric about s = 1/2"));
        }
        let n = values.len();
        let scale = values.iter().fold(T::zero(), |a, &v| a.max(v)).max(T::one());
        for i in 0..n / 2 {
            if (values[i] - values[n - 1 - i]).abs() > tol * scale {
                return Err(invalid("envelope", "samples must be symmetric about s = 1/2"));
            }
            if i < (n - 1) / 2 && values[i + 1] < values[i] - tol * scale {
                return Err(invalid("envelope", "samples must be non-decreasing towards s = 1/2"));
            }
        }
        Ok(())
    }
}

fn check_support<T: Real>(start: T, end: T, len: usize) -> Result<()> {
    if !(start.is_finite() && end.is_finite()) || start >= end {
        return Err(invalid("support", "need finite start < end"));
    }
    if start < T::zero() || end > T::one() {
        return Err(Error::Domain(format!(
            "pulse support [{start}, {end}] is not contained in [0, 1]"
        )));
    }
    if len < 2 {
        return Err(invalid("samples", "need at least two samples"));
    }
    Ok(())
}

#[derive(Clone, Debug)]
enum Profile<T> {
    Linear {
        eps: Vec3<T>,
    },
    Tabulated {
        shape: PulseShape<T>,
        /// F and G at the nodes `s_j = j/(n−1)`.
        ff: Vec<Vec3<T>>,
        gg: Vec<Vec3<T>>,
    },
}

/// f, F and G for one pulse, together with λ, T and the (ass2) constant.
#[derive(Clone, Debug)]
pub struct PulseTables<T> {
    pub lambda: T,
    pub duration: T,
    pub f1: Vec3<T>,
    pub g1: Vec3<T>,
    pub c_ass2: T,
    pub quad_tol: T,
    profile: Profile<T>,
}

/// Builds the tables. Linear pulses are closed form; everything else is integrated with
/// adaptive Simpson onto a uniform grid of `nodes` points and read back with cubic Hermite
/// interpolation, whose node derivatives are exact (F' = f, G' = F).
pub fn build_tables<T: Real>(spec: &PulseSpec<T>, quad_tol: T) -> Result<PulseTables<T>> {
    build_tables_with(spec, quad_tol, DEFAULT_NODES)
}

pub fn build_tables_with<T: Real>(
    spec: &PulseSpec<T>,
    quad_tol: T,
    nodes: usize,
) -> Result<PulseTables<T>> {
    if !spec.lambda.is_finite() || spec.lambda < T::zero() {
        return Err(invalid("lambda", "must be finite and >= 0"));
    }
    if !spec.duration.is_finite() || spec.duration <= T::zero() {
        return Err(invalid("T", "must be finite and > 0"));
    }
    if !(quad_tol > T::zero()) {
        return Err(invalid("quad_tol", "must be > 0"));
    }
    let profile = match &spec.shape {
        PulseShape::Linear { epsilon } => {
            if !epsilon.is_finite() {
                return Err(invalid("epsilon", "must be finite"));
            }
            Profile::Linear { eps: *epsilon }
        }
        shape => {
            match shape {
                PulseShape::CircularModulated {
                    omega,
                    ellipticity,
                    envelope,
                } => {
                    if !omega.is_finite() || !ellipticity.is_finite() {
                        return Err(invalid("omega", "omega and ellipticity must be finite"));
                    }
                    envelope.check()?;
                }
                PulseShape::CustomSampled {
                    start,
                    end,
                    samples,
                } => {
                    check_support(*start, *end, samples.len())?;
                    if samples.iter().any(|v| !v.is_finite()) {
                        return Err(invalid("samples", "must be finite"));
                    }
                }
                PulseShape::Linear { .. } => unreachable!(),
            }
            if nodes < 4 {
                return Err(invalid("nodes", "need at least 4 nodes"));
            }
            let (ff, gg) = integrate_nodes(shape, quad_tol, nodes);
            Profile::Tabulated {
                shape: shape.clone(),
                ff,
                gg,
            }
        }
    };
    let mut tables = PulseTables {
        lambda: spec.lambda,
        duration: spec.duration,
        f1: Vec3::zero(),
        g1: Vec3::zero(),
        c_ass2: T::zero(),
        quad_tol,
        profile,
    };
    tables.f1 = tables.big_f(T::one());
    tables.g1 = tables.big_g(T::one());
    tables.c_ass2 = ass2_constant(tables.f1, tables.g1).0;
    Ok(tables)
}

fn shape_f<T: Real>(shape: &PulseShape<T>, s: T) -> Vec3<T> {
    match shape {
        PulseShape::Linear { epsilon } => {
            if s < T::zero() || s > T::one() {
                Vec3::zero()
            } else {
                *epsilon
            }
        }
        PulseShape::CircularModulated {
            omega,
            ellipticity,
            envelope,
        } => {
            let h = envelope.eval(s);
            if h == T::zero() {
                return Vec3::zero();
            }
            let ph = *omega * (s - lit(0.5));
            Vec3::new(h * ph.cos(), h * *ellipticity * ph.sin(), T::zero())
        }
        PulseShape::CustomSampled {
            start,
            end,
            samples,
        } => match interp_linear(s, *start, *end, samples.len()) {
            Some((j, u)) => samples[j] * (T::one() - u) + samples[j + 1] * u,
            None => Vec3::zero(),
        },
    }
}

/// Cumulative F(s_j) = ∫₀^{s_j} f and G(s_j) = s_j F(s_j) − ∫₀^{s_j} τ f(τ) dτ.
fn integrate_nodes<T: Real>(
    shape: &PulseShape<T>,
    quad_tol: T,
    nodes: usize,
) -> (Vec<Vec3<T>>, Vec<Vec3<T>>) {
    let hs = T::one() / lit((nodes - 1) as f64);
    let tol = quad_tol / lit(nodes as f64);
    let mut ff = Vec::with_capacity(nodes);
    let mut gg = Vec::with_capacity(nodes);
    let mut f_acc = Vec3::zero();
    let mut m_acc = Vec3::zero();
    ff.push(f_acc);
    gg.push(Vec3::zero());
    for j in 1..nodes {
        let a = hs * lit((j - 1) as f64);
        let b = if j == nodes - 1 { T::one() } else { hs * lit(j as f64) };
        for c in 0..3 {
            let fi = adaptive_simpson(|s| shape_f(shape, s)[c], a, b, tol, T::zero());
            let mi = adaptive_simpson(|s| s * shape_f(shape, s)[c], a, b, tol, T::zero());
            f_acc[c] = f_acc[c] + fi.value;
            m_acc[c] = m_acc[c] + mi.value;
        }
        ff.push(f_acc);
        gg.push(f_acc * b - m_acc);
    }
    (ff, gg)
}

fn hermite<T: Real>(y0: T, m0: T, y1: T, m1: T, h: T, u: T) -> T {
    let u2 = u * u;
    let u3 = u2 * u;
    let two = lit::<T>(2.0);
    let three = lit::<T>(3.0);
    let h00 = two * u3 - three * u2 + T::one();
    let h10 = u3 - two * u2 + u;
    let h01 = three * u2 - two * u3;
    let h11 = u3 - u2;
    h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1
}

impl<T: Real> PulseTables<T> {
    /// Dimensionless field profile f(s).
    pub fn f(&self, s: T) -> Vec3<T> {
        match &self.profile {
            Profile::Linear { eps } => {
                if s < T::zero() || s > T::one() {
                    Vec3::zero()
                } else {
                    *eps
                }
            }
            Profile::Tabulated { shape, .. } => shape_f(shape, s),
        }
    }

    /// F(s) = ∫_{−∞}^s f.
    pub fn big_f(&self, s: T) -> Vec3<T> {
        if s <= T::zero() {
            return Vec3::zero();
        }
        match &self.profile {
            Profile::Linear { eps } => *eps * s.min(T::one()),
            Profile::Tabulated { shape, ff, .. } => {
                if s >= T::one() {
                    return ff[ff.len() - 1];
                }
                let (j, u, h) = locate(s, ff.len());
                let s0 = h * lit(j as f64);
                let f0 = shape_f(shape, s0);
                let f1 = shape_f(shape, s0 + h);
                Vec3(std::array::from_fn(|c| {
                    hermite(ff[j][c], f0[c], ff[j + 1][c], f1[c], h, u)
                }))
            }
        }
    }

    /// G(s) = ∫_{−∞}^s F, affine for s ≥ 1.
    pub fn big_g(&self, s: T) -> Vec3<T> {
        if s <= T::zero() {
            return Vec3::zero();
        }
        match &self.profile {
            Profile::Linear { eps } => {
                if s <= T::one() {
                    *eps * (s * s / lit(2.0))
                } else {
                    *eps * (s - lit(0.5))
                }
            }
            Profile::Tabulated { ff, gg, .. } => {
                let n = gg.len();
                if s >= T::one() {
                    return gg[n - 1] + ff[n - 1] * (s - T::one());
                }
                let (j, u, h) = locate(s, n);
                Vec3(std::array::from_fn(|c| {
                    hermite(gg[j][c], ff[j][c], gg[j + 1][c], ff[j + 1][c], h, u)
                }))
            }
        }
    }

    /// A(t) = λ F(t/T).
    pub fn vector_potential(&self, t: T) -> Vec3<T> {
        self.big_f(t / self.duration) * self.lambda
    }

    /// E(t) = dA/dt = (λ/T) f(t/T).
    pub fn field(&self, t: T) -> Vec3<T> {
        self.f(t / self.duration) * (self.lambda / self.duration)
    }

    /// ∫_{t0}^{t1} A(τ) dτ = λT (G(t1/T) − G(t0/T)).
    pub fn a_integral(&self, t0: T, t1: T) -> Vec3<T> {
        let d = self.duration;
        (self.big_g(t1 / d) - self.big_g(t0 / d)) * (self.lambda * d)
    }

    /// ∫_{t0}^{t1} |A(τ)|² dτ, split at the pulse edges; exact beyond them.
    pub fn a_squared_integral(&self, t0: T, t1: T) -> T {
        if t1 < t0 {
            return -self.a_squared_integral(t1, t0);
        }
        let d = self.duration;
        let lo = t0.max(T::zero());
        let mut acc = T::zero();
        if lo < t1.min(d) {
            let hi = t1.min(d);
            acc = acc
                + match &self.profile {
                    Profile::Linear { eps } => {
                        // |A|² = λ²|ε|² τ²/T²
                        self.lambda * self.lambda * eps.norm_sq() * (hi * hi * hi - lo * lo * lo)
                            / (lit::<T>(3.0) * d * d)
                    }
                    Profile::Tabulated { .. } => {
                        adaptive_simpson(
                            |tau| self.vector_potential(tau).norm_sq(),
                            lo,
                            hi,
                            self.quad_tol,
                            T::zero(),
                        )
                        .value
                    }
                };
        }
        let tail_start = t0.max(d);
        if t1 > tail_start {
            acc = acc + (t1 - tail_start) * (self.f1 * self.lambda).norm_sq();
        }
        acc
    }

    /// Writes `rows` uniformly spaced samples on `[0, s_max]` as CSV
    /// (`s, f_x, f_y, f_z, F_x, F_y, F_z, G_x, G_y, G_z`).
    pub fn write_csv<W: Write>(&self, mut w: W, rows: usize, s_max: T) -> io::Result<()> {
        writeln!(w, "s,f_x,f_y,f_z,F_x,F_y,F_z,G_x,G_y,G_z")?;
        let rows = rows.max(2);
        for i in 0..rows {
            let s = s_max * lit(i as f64) / lit((rows - 1) as f64);
            let (f, ff, gg) = (self.f(s), self.big_f(s), self.big_g(s));
            write!(w, "{:.17e}", to_f64(s))?;
            for v in [f, ff, gg] {
                for c in 0..3 {
                    write!(w, ",{:.17e}", to_f64(v[c]))?;
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

fn locate<T: Real>(s: T, n: usize) -> (usize, T, T) {
    let h = T::one() / lit((n - 1) as f64);
    let pos = s / h;
    let j = pos.floor().to_usize().unwrap_or(0).min(n - 2);
    (j, pos - lit(j as f64), h)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ass2Method {
    /// `F(1)·G(1) ≥ 0`, so `min(|G(1)|, |F(1)|)/√2` is a valid constant.
    ClosedForm,
    /// Numerical infimum of `|G(s)|/s` over a geometric sample of s ≥ 1.
    Search,
}

/// The constant in `|G(s)| ≥ C s` for s ≥ 1, computed from F(1) and G(1) alone
/// since G is affine there.
pub fn ass2_constant<T: Real>(f1: Vec3<T>, g1: Vec3<T>) -> (T, Ass2Method) {
    if f1.dot(g1) >= T::zero() {
        return (g1.norm().min(f1.norm()) / T::SQRT_2(), Ass2Method::ClosedForm);
    }
    let ratio = |s: T| (g1 + f1 * (s - T::one())).norm() / s;
    let q = lit::<T>(1.02);
    let s_max = lit::<T>(1e6);
    let mut best = (T::one(), ratio(T::one()));
    let mut s = T::one();
    while s < s_max {
        s = s * q;
        let r = ratio(s);
        if r < best.1 {
            best = (s, r);
        }
    }
    let lo = (best.0 / q).max(T::one()).ln();
    let hi = (best.0 * q).ln();
    let (_, r) = golden_section(|u: T| ratio(u.exp()), lo, hi, lit(1e-12));
    // |G(s)|/s → |F(1)| as s → ∞
    (best.1.min(r).min(f1.norm()), Ass2Method::Search)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Ass0Entry<T> {
    pub s0: T,
    pub integral: T,
    pub finite: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Ass0Report<T> {
    pub ladder: Vec<Ass0Entry<T>>,
    /// Finiteness checked on the ladder only; this is not a proof of (ass0).
    pub verified_on_samples: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Ass1Report<T> {
    pub f1_norm: T,
    pub tolerance: T,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Ass2Report<T> {
    pub c: T,
    pub method: Ass2Method,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct AssumptionCertificate<T> {
    pub ass0: Ass0Report<T>,
    pub ass1: Ass1Report<T>,
    pub ass2: Ass2Report<T>,
}

impl<T: Real> AssumptionCertificate<T> {
    pub fn passed(&self) -> bool {
        self.ass0.verified_on_samples && self.ass1.passed && self.ass2.passed
    }
}

pub const ASS0_LADDER: [f64; 3] = [1e-1, 1e-2, 1e-3];

pub fn check_assumptions<T: Real>(tables: &PulseTables<T>) -> AssumptionCertificate<T> {
    let tol = lit::<T>(1e-12);
    let ladder: Vec<Ass0Entry<T>> = ASS0_LADDER
        .iter()
        .map(|&s0| {
            let s0 = lit::<T>(s0);
            let r = adaptive_simpson(
                |s| tables.big_g(s).norm().recip(),
                s0,
                T::one(),
                T::zero(),
                lit(1e-8),
            );
            Ass0Entry {
                s0,
                integral: r.value,
                finite: r.converged && r.value.is_finite(),
            }
        })
        .collect();
    let verified = ladder.iter().all(|e| e.finite);
    let f1n = tables.f1.norm();
    let (c, method) = ass2_constant(tables.f1, tables.g1);
    AssumptionCertificate {
        ass0: Ass0Report {
            ladder,
            verified_on_samples: verified,
        },
        ass1: Ass1Report {
            f1_norm: f1n,
            tolerance: tol,
            passed: f1n > tol,
        },
        ass2: Ass2Report {
            c,
            method,
            passed: c > tol,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_closed_form() {
        let t = build_tables(&PulseSpec::linear(Vec3::new(1.0, 0.0, 0.0), 3.0, 2.0), 1e-10)
            .unwrap();
        assert_eq!(t.big_f(0.25)[0], 0.25);
        assert_eq!(t.big_g(0.5)[0], 0.125);
        assert_eq!(t.big_g(3.0)[0], 2.5);
        assert_eq!(t.vector_potential(4.0)[0], 3.0);
        assert_eq!(t.vector_potential(-1.0).norm(), 0.0);
    }

    #[test]
    fn asymmetric_envelope_rejected() {
        let env = Envelope::Samples {
            start: 0.0,
            end: 1.0,
            values: vec![0.0, 1.0, 0.5],
        };
        let spec = PulseSpec {
            shape: PulseShape::CircularModulated {
                omega: 8.0,
                ellipticity: 1.0,
                envelope: env,
            },
            lambda: 1.0,
            duration: 1.0,
        };
        assert!(build_tables(&spec, 1e-10).is_err());
    }
}
