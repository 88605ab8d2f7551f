//! Run configuration: TOML on disk, canonical JSON for hashing.

use std::path::{Path, PathBuf};

use kramers_core::bounds::BoundConstants;
use kramers_core::params::{HypothesisSet, PhysParams};
use kramers_core::potential::PotentialSpec;
use kramers_core::propagator::{Absorber, Gauge};
use kramers_core::pulse::{PulseShape, PulseSpec};
use kramers_core::state::GridSpec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Seed for randomised initial states.
    #[serde(default)]
    pub seed: u64,
    pub params: PhysParams<f64>,
    pub pulse: PulseShape<f64>,
    pub potential: PotentialConfig,
    pub grid: GridSpec<f64>,
    #[serde(default)]
    pub initial: InitialState,
    pub evolution: EvolutionConfig,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub bounds: BoundsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    Free,
    Coulomb,
    ShortRange,
}

/// Strengths come from `[params]` (`Z`, `V0`, `D`, `alpha`); only the shape lives here.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub kind: PotentialKind,
    #[serde(default)]
    pub soft_a: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    /// Hydrogenic ground state of the configured potential's charge. With `soft_a > 0`
    /// it is relaxed in imaginary time, on a sub-box of `relax_n` nodes per axis when
    /// given (same spacing, centred on the origin) and then embedded.
    Hydrogenic {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        soft_a: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        relax_n: Option<usize>,
    },
    /// Gaussian packet of width `R` (defaults to `params.R`).
    Gaussian {
        #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
        r: Option<f64>,
        #[serde(default)]
        center: [f64; 3],
        #[serde(default)]
        momentum: [f64; 3],
    },
    /// Superposition of `count` unit-width packets with seeded random centres and momenta.
    RandomPackets {
        #[serde(default = "default_count")]
        count: usize,
    },
}

fn default_count() -> usize {
    4
}

impl Default for InitialState {
    fn default() -> Self {
        InitialState::Hydrogenic {
            soft_a: None,
            relax_n: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    pub t_final: f64,
    pub dt: f64,
    #[serde(default = "kramers")]
    pub gauge: Gauge,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub absorber: Option<Absorber<f64>>,
    /// Write a binary snapshot every this many steps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_every: Option<usize>,
    /// Emit an observables row every this many steps.
    #[serde(default = "one_usize")]
    pub observe_every: usize,
}

fn kramers() -> Gauge {
    Gauge::Kramers
}

fn one_usize() -> usize {
    1
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    pub pulse_quad_tol: f64,
    pub dollard_quad_tol: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics {
            pulse_quad_tol: 1e-10,
            dollard_quad_tol: 1e-8,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundsConfig {
    /// Evaluation time; defaults to `max(t_final, T)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    pub constants: BoundConstants<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParam {
    #[serde(rename = "lambda")]
    Lambda,
    #[serde(rename = "R")]
    R,
    #[serde(rename = "Z")]
    Z,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

fn bad(field: &str, msg: impl std::fmt::Display) -> HarnessError {
    HarnessError::Config(format!("field `{field}`: {msg}"))
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            HarnessError::Config(m) => HarnessError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises to TOML")
    }

    /// Key-sorted compact JSON of the fully defaulted config.
    pub fn canonical_json(&self) -> String {
        let v = serde_json::to_value(self).expect("config serialises to JSON");
        serde_json::to_string(&v).expect("JSON value serialises")
    }

    /// SHA-256 of [`canonical_json`](Self::canonical_json), hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }

    /// Field-level checks beyond what the schema expresses.
    pub fn check(&self) -> Result<()> {
        self.params.check().map_err(|e| bad("params", e))?;
        self.grid.check().map_err(|e| bad("grid", e))?;
        self.potential_spec().check().map_err(|e| bad("potential", e))?;
        let ev = &self.evolution;
        if !(ev.t_final.is_finite() && ev.t_final > 0.0) {
            return Err(bad("evolution.t_final", "must be finite and > 0"));
        }
        if !(ev.dt.is_finite() && ev.dt > 0.0) {
            return Err(bad("evolution.dt", "must be finite and > 0"));
        }
        let q = ev.t_final / ev.dt;
        if (q - q.round()).abs() > 1e-6 * q.max(1.0) {
            return Err(bad("evolution.dt", format!("t_final/dt = {q} is not an integer")));
        }
        if ev.observe_every == 0 {
            return Err(bad("evolution.observe_every", "must be >= 1"));
        }
        if let Some(a) = ev.absorber {
            if !(a.width_frac > 0.0 && a.width_frac < 0.25) {
                return Err(bad("evolution.absorber.width_frac", "must lie in (0, 1/4)"));
            }
        }
        if let InitialState::Hydrogenic { relax_n: Some(m), .. } = self.initial {
            if !m.is_power_of_two() || m > self.grid.n || m < 8 {
                return Err(bad("initial.relax_n", "must be a power of two in [8, grid.n]"));
            }
        }
        if let InitialState::Gaussian { r: Some(r), .. } = self.initial {
            if !(r.is_finite() && r > 0.0) {
                return Err(bad("initial.R", "must be finite and > 0"));
            }
        }
        for (name, v) in [
            ("numerics.pulse_quad_tol", self.numerics.pulse_quad_tol),
            ("numerics.dollard_quad_tol", self.numerics.dollard_quad_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(bad(name, "must be finite and > 0"));
            }
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(bad("sweep.values", "must not be empty"));
            }
            let up = s.values.windows(2).all(|w| w[1] > w[0]);
            let down = s.values.windows(2).all(|w| w[1] < w[0]);
            if !(up || down) {
                return Err(bad("sweep.values", "ladder must be strictly monotone"));
            }
            if s.values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(bad("sweep.values", "entries must be finite and > 0"));
            }
        }
        Ok(())
    }

    pub fn pulse_spec(&self) -> PulseSpec<f64> {
        PulseSpec {
            shape: self.pulse.clone(),
            lambda: self.params.lambda,
            duration: self.params.duration,
        }
    }

    pub fn potential_spec(&self) -> PotentialSpec<f64> {
        let p = &self.params;
        let a = self.potential.soft_a;
        match self.potential.kind {
            PotentialKind::Free => PotentialSpec::Free,
            PotentialKind::Coulomb => PotentialSpec::coulomb(p.z, a),
            PotentialKind::ShortRange => PotentialSpec::short_range(p.v0, p.d, p.alpha, a),
        }
    }

    pub fn hypothesis_set(&self) -> HypothesisSet {
        match self.potential.kind {
            PotentialKind::Coulomb => HypothesisSet::Coulomb,
            _ => HypothesisSet::ShortRange,
        }
    }

    pub fn bound_time(&self) -> f64 {
        self.bounds
            .t
            .unwrap_or(self.evolution.t_final.max(self.params.duration))
    }

    /// Copy with one physical parameter replaced.
    pub fn with_param(&self, which: SweepParam, value: f64) -> RunConfig {
        let mut c = self.clone();
        match which {
            SweepParam::Lambda => c.params.lambda = value,
            SweepParam::R => c.params.r = value,
            SweepParam::Z => c.params.z = value,
        }
        c.sweep = None;
        c
    }
}
