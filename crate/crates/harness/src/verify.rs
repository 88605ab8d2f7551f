//! The ten acceptance criteria. Each criterion builds its own grids and pulses, runs the
//! experiment at the requested [`Scale`] and returns a [`CriterionResult`] whose
//! tolerances are the constants below.

use std::fmt;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use kramers_core::bounds::{fit_scaling, fks_bound, kappa_lambda};
use kramers_core::params::PhysParams;
use kramers_core::potential::PotentialSpec;
use kramers_core::propagator::{
    apply_cutoff, dollard_free, dollard_propagate, evolve_split, free_kramers_exact,
    gauge_bridge, BridgeDirection, DollardSpec, EvolutionPlan, Gauge, SplitStepper,
};
use kramers_core::pulse::{build_tables, Envelope, PulseShape, PulseSpec, PulseTables};
use kramers_core::state::{
    gaussian_packet, gaussian_state, hydrogenic_ground_state, relax_ground_state, Grid,
    GridSpec, RelaxOptions,
};
use kramers_core::Vec3;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::commands::{self, SweepPoint};
use crate::config::{
    BoundsConfig, EvolutionConfig, InitialState, Numerics, OutputConfig, PotentialConfig,
    PotentialKind, RunConfig, SweepConfig, SweepParam,
};
use crate::error::{HarnessError, Result};
use crate::output::{Check, RunDir, Verdict};
use crate::setup;

pub const C1_MAX_ERROR: f64 = 1e-8;
pub const ORDER_TOL: f64 = 0.2;
pub const C2_MAX_GAP: f64 = 1e-3;
pub const C2_MIN_RATIO: f64 = 3.0;
pub const C3_S0_TOL: f64 = 1e-8;
pub const C3_ASYMPTOTE_TOL: f64 = 0.05;
pub const C3_BRUTE_TOL: f64 = 1e-6;
pub const C4_EXPONENT: f64 = -0.25;
pub const C4_TOL: f64 = 0.03;
pub const C5_EXPONENT_TOL: f64 = 0.1;
pub const C6_TOP_MIN: f64 = 0.9;
/// Survival differences below this are treated as ties; it sits under the unitarity
/// tolerance, so smaller differences are not resolved by the solver.
pub const C6_SURVIVAL_FLOOR: f64 = 1e-12;
pub const C7_EXPONENT: f64 = -1.0;
pub const C7_TOL: f64 = 0.3;
pub const C9_REL_SLACK: f64 = 1e-9;
pub const C10_MAX_DRIFT: f64 = 1e-10;
pub const C10_STEPS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    /// Reduced grids and ladders; exercises the plumbing only.
    Smoke,
    /// The acceptance settings.
    Desk,
    /// Desk settings at doubled resolution.
    Full,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
    pub data: serde_json::Value,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} criterion {:>2} {}: {} [{:.1}s]",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.seconds
        )
    }
}

pub const NAMES: [&str; 10] = [
    "exact-propagator oracle",
    "gauge equivalence",
    "kappa closed form",
    "kappa scaling exponent",
    "FKS trend",
    "cone monotonicity",
    "ejection direction",
    "Dollard trend",
    "spreading bound",
    "unitarity and reproducibility",
];

struct Outcome {
    passed: bool,
    detail: String,
    data: serde_json::Value,
}

fn linear_tables(lambda: f64, duration: f64) -> Result<PulseTables<f64>> {
    Ok(build_tables(
        &PulseSpec::linear(Vec3::new(1.0, 0.0, 0.0), lambda, duration),
        1e-12,
    )?)
}

/// Grid of half-width `l` whose nodes avoid the origin by half a cell.
fn offset_grid(dim: usize, n: usize, l: f64, cx: f64) -> Result<Arc<Grid<f64>>> {
    let h = 2.0 * l / n as f64;
    let mut c = [0.0; 3];
    for v in c.iter_mut().take(dim) {
        *v = h / 2.0;
    }
    c[0] += cx;
    Ok(Grid::new(GridSpec::new(dim, n, l).with_center(Vec3(c)))?)
}

fn exponent(xs: &[f64], ys: &[f64]) -> Result<f64> {
    Ok(fit_scaling(xs, ys)?.exponent)
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

fn sci(v: &[f64]) -> String {
    let s: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", s.join(", "))
}

fn c1(scale: Scale) -> Result<Outcome> {
    let (n1, n2, rungs) = match scale {
        Scale::Smoke => (256, 64, 4),
        Scale::Desk => (1024, 256, 9),
        Scale::Full => (2048, 512, 10),
    };
    let spec = PulseSpec {
        shape: PulseShape::CircularModulated {
            omega: 4.0 * std::f64::consts::PI,
            ellipticity: 1.0,
            envelope: Envelope::SinSquared,
        },
        lambda: 2.0,
        duration: 1.0,
    };
    let tb = build_tables(&spec, 1e-12)?;
    // ending inside the pulse keeps the splitting error from cancelling over the window
    let t1 = 0.6;
    let mut passed = true;
    let mut parts = Vec::new();
    let mut data = Vec::new();
    for (dim, n) in [(1, n1), (2, n2)] {
        let g = Grid::new(GridSpec::new(dim, n, 20.0))?;
        let psi0 = gaussian_packet(g, 1.0, Vec3::zero(), Vec3::new(0.5, 0.0, 0.0))?;
        let exact = free_kramers_exact(&psi0, 0.0, t1, &tb)?;
        let mut dts = Vec::new();
        let mut errs = Vec::new();
        for j in 0..rungs {
            let dt = 1.0 / 25.0 / 2f64.powi(j);
            let plan = EvolutionPlan::new(0.0, t1, dt, Gauge::Kramers);
            let tr = evolve_split(&psi0, &plan, &tb, &PotentialSpec::Free)?;
            dts.push(dt);
            errs.push(tr.final_state.distance(&exact)?);
        }
        let order = exponent(&dts, &errs)?;
        let finest = *errs.last().unwrap();
        let ok = finest < C1_MAX_ERROR && (order - 2.0).abs() <= ORDER_TOL;
        passed &= ok;
        parts.push(format!("{dim}D n={n}: finest error {finest:.2e}, order {order:.3}"));
        data.push(json!({ "dim": dim, "n": n, "dt": dts, "error": errs, "order": order }));
    }
    Ok(Outcome {
        passed,
        detail: parts.join("; "),
        data: json!(data),
    })
}

fn c2(scale: Scale) -> Result<Outcome> {
    let (n, dt) = match scale {
        Scale::Smoke => (64, 0.04),
        Scale::Desk => (256, 0.01),
        Scale::Full => (512, 0.005),
    };
    let l = 30.0;
    let tb = linear_tables(2.0, 1.0)?;
    let pot = PotentialSpec::coulomb(1.0, 0.5);
    let coarse = Grid::new(GridSpec::new(2, n, l))?;
    let mut psi0 = setup::hydrogenic(coarse, 1.0, 0.5, None)?;
    let mut gaps = Vec::new();
    for level in 0..2 {
        if level > 0 {
            // each level starts from its own grid's ground state; a resampled coarse
            // state carries a high-k remnant whose splitting error does not shrink with h
            let fine = Grid::new(GridSpec::new(2, n << level, l))?;
            psi0 = relax_ground_state(&pot, psi0.resample(fine)?, &RelaxOptions::default())?.psi;
        }
        let step = dt / (1 << level) as f64;
        let k = evolve_split(&psi0, &EvolutionPlan::new(0.0, 1.0, step, Gauge::Kramers), &tb, &pot)?;
        let r = evolve_split(&psi0, &EvolutionPlan::new(0.0, 1.0, step, Gauge::Ritz), &tb, &pot)?;
        let bridged = gauge_bridge(&k.final_state, 1.0, &tb, BridgeDirection::KramersToRitz)?;
        gaps.push(bridged.distance(&r.final_state)? / r.final_state.norm());
    }
    let ratio = gaps[0] / gaps[1];
    Ok(Outcome {
        passed: gaps[0] < C2_MAX_GAP && ratio >= C2_MIN_RATIO,
        detail: format!(
            "relative gap {:.3e} (n={n}, dt={dt}), {:.3e} refined, ratio {ratio:.2}",
            gaps[0], gaps[1]
        ),
        data: json!({ "n": n, "dt": dt, "gaps": gaps, "ratio": ratio }),
    })
}

/// `(T/R²)s + (2/(Rλ))(1/s + 1/(3s³) − 4/3)` for the unit linear pulse.
fn linear_objective(s: f64, r: f64, t: f64, lambda: f64) -> f64 {
    t / (r * r) * s + 2.0 / (r * lambda) * (1.0 / s + 1.0 / (3.0 * s.powi(3)) - 4.0 / 3.0)
}

/// Minimum over a dense log grid, with the integral accumulated by composite Simpson
/// from the pulse tables.
fn brute_kappa(tb: &PulseTables<f64>, r: f64, t: f64, lambda: f64, pairs: usize) -> f64 {
    let lo = 1e-6f64.ln();
    let h = -lo / (2 * pairs) as f64;
    let f = |u: f64| {
        let s = u.exp();
        s * (1.0 + 1.0 / (s * s)) / tb.big_g(s).norm()
    };
    let mut k = 0.0;
    let mut best = t / (r * r);
    for j in 0..pairs {
        let u1 = -((2 * j) as f64) * h;
        let u0 = u1 - 2.0 * h;
        k += h / 3.0 * (f(u0) + 4.0 * f(u0 + h) + f(u1));
        best = best.min(t / (r * r) * u0.exp() + k / (r * lambda));
    }
    best
}

fn c3(scale: Scale) -> Result<Outcome> {
    let pairs = if scale == Scale::Smoke { 50_000 } else { 500_000 };
    let (r, t) = (1.0, 1.0);
    let mut passed = true;
    let mut rows = Vec::new();
    for rl in [1e3, 1e4, 1e5] {
        let lambda = rl / r;
        let tb = linear_tables(lambda, t)?;
        let k = kappa_lambda(&tb, r, t, lambda)?;
        let s0_sq = r / (t * lambda) * (1.0 + (1.0 + 2.0 * t * lambda / r).sqrt());
        let s0_err = (k.s0 * k.s0 / s0_sq - 1.0).abs();
        let asym = 4.0 / 3.0 * (2.0 * t.powi(3) / (r.powi(7) * lambda)).powf(0.25);
        let asym_err = (k.value / asym - 1.0).abs();
        let brute = brute_kappa(&tb, r, t, lambda, pairs);
        let brute_err = (k.value / brute - 1.0).abs();
        let closed = linear_objective(s0_sq.sqrt(), r, t, lambda);
        passed &= s0_err < C3_S0_TOL && asym_err < C3_ASYMPTOTE_TOL && brute_err < C3_BRUTE_TOL;
        rows.push(json!({
            "R_lambda": rl, "kappa": k.value, "s0": k.s0, "s0_rel_err": s0_err,
            "asymptote": asym, "asymptote_rel_err": asym_err, "brute": brute,
            "brute_rel_err": brute_err, "closed_form_value": closed,
        }));
    }
    let worst = |key: &str| {
        rows.iter()
            .map(|r| r[key].as_f64().unwrap())
            .fold(0.0, f64::max)
    };
    Ok(Outcome {
        passed,
        detail: format!(
            "max s0² error {:.1e}, asymptote {:.2e}, brute scan {:.1e}",
            worst("s0_rel_err"),
            worst("asymptote_rel_err"),
            worst("brute_rel_err")
        ),
        data: json!(rows),
    })
}

fn c4(_scale: Scale) -> Result<Outcome> {
    let lambdas = [1e3, 1e4, 1e5, 1e6, 1e7];
    let mut ks = Vec::new();
    for &l in &lambdas {
        ks.push(kappa_lambda(&linear_tables(l, 1.0)?, 1.0, 1.0, l)?.value);
    }
    let fit = fit_scaling(&lambdas, &ks)?;
    Ok(Outcome {
        passed: (fit.exponent - C4_EXPONENT).abs() <= C4_TOL,
        detail: format!("exponent {:.4} ± {:.4}", fit.exponent, fit.stderr),
        data: json!({ "lambda": lambdas, "kappa": ks, "exponent": fit.exponent, "stderr": fit.stderr }),
    })
}

fn c5(scale: Scale) -> Result<Outcome> {
    let (n1, n2, steps) = match scale {
        Scale::Smoke => (512, 128, 200),
        Scale::Desk => (2048, 512, 1000),
        Scale::Full => (4096, 1024, 2000),
    };
    let lambdas = [5.0, 10.0, 20.0, 40.0];
    let (r, t) = (1.0, 1.0);
    let p = PhysParams::new(1.0, t, r);
    let pot = PotentialSpec::short_range(p.v0, p.d, p.alpha, 0.5);
    let mut passed = true;
    let mut parts = Vec::new();
    let mut data = Vec::new();
    for (dim, n) in [(1, n1), (2, n2)] {
        let g = Grid::new(GridSpec::new(dim, n, 64.0).with_center(Vec3::new(-20.0, 0.0, 0.0)))?;
        let psi0 = gaussian_state(g, r)?;
        let mut diffs = Vec::new();
        let mut bounds = Vec::new();
        for &lambda in &lambdas {
            let tb = linear_tables(lambda, t)?;
            let plan = EvolutionPlan::new(0.0, t, t / steps as f64, Gauge::Kramers);
            let full = evolve_split(&psi0, &plan, &tb, &pot)?.final_state;
            let free = free_kramers_exact(&psi0, 0.0, t, &tb)?;
            diffs.push(full.distance(&free)?);
            let kappa = kappa_lambda(&tb, r, t, lambda)?.value;
            bounds.push(fks_bound(p.v0, p.d, r, t, kappa, 1.0));
        }
        // one constant, fixed at the first rung and held for the rest of the ladder
        let c = diffs[0] / bounds[0];
        let dominated = diffs.iter().zip(&bounds).all(|(d, b)| *d <= c * b * (1.0 + 1e-12));
        let e_diff = exponent(&lambdas, &diffs)?;
        let e_bound = exponent(&lambdas, &bounds)?;
        let ok = dominated && (e_diff - e_bound).abs() <= C5_EXPONENT_TOL;
        passed &= ok;
        parts.push(format!(
            "{dim}D: c={c:.3}, dominated {dominated}, exponents {e_diff:.3} measured vs {e_bound:.3} bound"
        ));
        data.push(json!({
            "dim": dim, "n": n, "lambda": lambdas, "difference": diffs, "bound_c1": bounds,
            "c": c, "dominated": dominated, "exponent_measured": e_diff, "exponent_bound": e_bound,
        }));
    }
    Ok(Outcome {
        passed,
        detail: parts.join("; "),
        data: json!(data),
    })
}

/// Shared λ ladder for the cone and ejection criteria, run through the sweep command.
pub fn cone_sweep(scale: Scale, work: &Path) -> Result<Vec<SweepPoint>> {
    let (n, l, lambdas): (usize, f64, Vec<f64>) = match scale {
        Scale::Smoke => (128, 64.0, vec![5.0, 10.0, 20.0]),
        Scale::Desk => (512, 128.0, vec![5.0, 10.0, 20.0, 40.0, 80.0]),
        Scale::Full => (1024, 128.0, vec![5.0, 10.0, 20.0, 40.0, 80.0]),
    };
    let t = 0.25;
    let h = 2.0 * l / n as f64;
    // the packet ends near x = −2.25λ at t = 5T
    let cx = -(l - 28.0).max(0.0) + h / 2.0;
    let mut params = PhysParams::new(lambdas[0], t, 1.0);
    params.theta = 0.2;
    let cfg = RunConfig {
        seed: 0,
        params,
        pulse: PulseShape::Linear {
            epsilon: Vec3::new(1.0, 0.0, 0.0),
        },
        potential: PotentialConfig {
            kind: PotentialKind::Coulomb,
            soft_a: 0.5,
        },
        grid: GridSpec::new(2, n, l).with_center(Vec3::new(cx, h / 2.0, 0.0)),
        initial: InitialState::Hydrogenic {
            soft_a: None,
            relax_n: Some(128.min(n)),
        },
        evolution: EvolutionConfig {
            t_final: 5.0 * t,
            dt: t / 100.0,
            gauge: Gauge::Kramers,
            absorber: None,
            snapshot_every: None,
            observe_every: 100,
        },
        numerics: Numerics::default(),
        bounds: BoundsConfig::default(),
        sweep: Some(SweepConfig {
            parameter: SweepParam::Lambda,
            values: lambdas,
        }),
        output: OutputConfig::default(),
    };
    cfg.check()?;
    let out = RunDir::create(work)?;
    let (_, summary) = commands::sweep(&cfg, &out, 1)?;
    Ok(summary.points)
}

fn c6(points: &[SweepPoint]) -> Result<Outcome> {
    let ng: Vec<f64> = points.iter().map(|p| p.n_g).collect();
    let surv: Vec<f64> = points.iter().map(|p| p.survival).collect();
    let top = *ng.last().unwrap();
    let increasing = strictly_increasing(&ng);
    let decreasing = surv.windows(2).all(|w| w[1] <= w[0] + C6_SURVIVAL_FLOOR);
    let deficit: Vec<f64> = ng.iter().map(|v| 1.0 - v).collect();
    Ok(Outcome {
        passed: increasing && top > C6_TOP_MIN && decreasing,
        detail: format!(
            "1−N {} strictly decreasing {increasing}, top N {top:.12}; survival {} non-increasing {decreasing}",
            sci(&deficit),
            sci(&surv)
        ),
        data: json!({ "points": points }),
    })
}

fn c7(points: &[SweepPoint], theta: f64) -> Result<Outcome> {
    let lambdas: Vec<f64> = points.iter().map(|p| p.value).collect();
    let angles: Vec<f64> = points.iter().map(|p| p.angle).collect();
    let top = points.last().unwrap();
    // ejection axis −F(1) = −x̂ for the unit linear pulse
    let v = Vec3(top.v);
    let axis = Vec3::new(-1.0, 0.0, 0.0);
    let misalign = (v.dot(axis) / v.norm()).clamp(-1.0, 1.0).acos();
    let e = exponent(&lambdas, &angles)?;
    Ok(Outcome {
        passed: misalign < theta && (e - C7_EXPONENT).abs() <= C7_TOL,
        detail: format!(
            "top-rung velocity {:.3} off −F(1) by {misalign:.2e} rad; opening angles {} exponent {e:.3}",
            v.norm(),
            sci(&angles)
        ),
        data: json!({ "lambda": lambdas, "opening_angle": angles, "misalignment": misalign, "exponent": e }),
    })
}

fn c8(scale: Scale) -> Result<Outcome> {
    let (n, dt) = match scale {
        Scale::Smoke => (128, 0.02),
        Scale::Desk => (512, 0.005),
        Scale::Full => (1024, 0.0025),
    };
    let (r, t, z, t_end) = (2.0, 1.0, 1.0, 3.0);
    let lambdas = [10.0, 20.0, 40.0];
    let g = offset_grid(2, n, 128.0, -110.0)?;
    let psi0 = hydrogenic_ground_state(g, z, 0.0)?;
    let coulomb = PotentialSpec::coulomb(z, 0.0);
    let mut diffs = Vec::new();
    let mut free_diffs = Vec::new();
    let mut k0s = Vec::new();
    for &lambda in &lambdas {
        let tb = linear_tables(lambda, t)?;
        let k0 = (r / t) * (r * lambda).powf(2.0 / 35.0);
        let (cut, _) = apply_cutoff(&psi0, k0)?;
        let psi_t = free_kramers_exact(&cut, 0.0, t, &tb)?;
        let plan = EvolutionPlan::new(t, t_end * t, dt, Gauge::Kramers);
        let evolved = evolve_split(&psi_t, &plan, &tb, &coulomb)?.final_state;
        let dollard = dollard_propagate(&psi_t, t_end * t, &tb, z, &DollardSpec::new(k0))?;
        let free = free_kramers_exact(&psi_t, t, t_end * t, &tb)?;
        diffs.push(evolved.distance(&dollard)?);
        free_diffs.push(evolved.distance(&free)?);
        k0s.push(k0);
    }
    let decreasing = diffs.windows(2).all(|w| w[1] < w[0]);
    Ok(Outcome {
        passed: decreasing,
        detail: format!(
            "‖Coulomb − Dollard‖ {} decreasing {decreasing}; free-evolution gap {}",
            sci(&diffs),
            sci(&free_diffs)
        ),
        data: json!({ "lambda": lambdas, "K0": k0s, "difference": diffs, "free_difference": free_diffs }),
    })
}

fn c9(scale: Scale) -> Result<Outcome> {
    let n = match scale {
        Scale::Smoke => 64,
        Scale::Desk => 256,
        Scale::Full => 512,
    };
    let (r, t, lambda, z) = (2.0, 4.0, 10.0, 1.0);
    let tb = linear_tables(lambda, t)?;
    let g = offset_grid(2, n, 64.0, 0.0)?;
    let psi0 = hydrogenic_ground_state(g, z, 0.0)?;
    let k0 = (r / t) * (r * lambda).powf(2.0 / 35.0);
    let (cut, _) = apply_cutoff(&psi0, k0)?;
    let cut = cut.normalized()?;
    let spec = DollardSpec::new(k0);
    let samples = 36;
    let mut ts = Vec::new();
    let mut ws = Vec::new();
    for j in 0..=samples {
        let tj = t + j as f64 * t / 4.0;
        let psi = dollard_free(&cut, tj, &tb, z, &spec)?;
        ts.push(tj);
        ws.push(kramers_core::observables::spreading(&psi)?);
    }
    let w_t = ws[0];
    // calibrate on even samples: W² − W(T)² ≈ c1 s + c2 s², c1, c2 ≥ 0
    let (mut s11, mut s12, mut s22, mut y1, mut y2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut b_emp: f64 = 0.0;
    for j in (2..=samples).step_by(2) {
        let s = ts[j] - t;
        let y = ws[j] * ws[j] - w_t * w_t;
        s11 += s * s;
        s12 += s * s * s;
        s22 += s * s * s * s;
        y1 += s * y;
        y2 += s * s * y;
        b_emp = b_emp.max((ws[j] - w_t) / s);
    }
    let det = s11 * s22 - s12 * s12;
    let (mut c1, mut c2) = ((y1 * s22 - y2 * s12) / det, (s11 * y2 - s12 * y1) / det);
    if c1 < 0.0 {
        c1 = 0.0;
        c2 = (y2 / s22).max(0.0);
    } else if c2 < 0.0 {
        c2 = 0.0;
        c1 = (y1 / s11).max(0.0);
    }
    let b = c2.sqrt().max(c1 / (2.0 * w_t)).max(b_emp);
    let a = b * r;
    let violations: Vec<f64> = ts
        .iter()
        .zip(&ws)
        .filter(|(tj, w)| **w > (w_t + a * (**tj - t) / r) * (1.0 + C9_REL_SLACK))
        .map(|(tj, _)| *tj)
        .collect();
    Ok(Outcome {
        passed: violations.is_empty(),
        detail: format!(
            "W(T) {w_t:.3}, W(10T) {:.3}, envelope a {a:.4}, violations {} of {}",
            ws.last().unwrap(),
            violations.len(),
            ts.len()
        ),
        data: json!({ "t": ts, "W": ws, "a": a, "c1": c1, "c2": c2, "violations": violations }),
    })
}

fn unitarity_drift(steps: usize) -> Result<f64> {
    let g = Grid::new(GridSpec::new(2, 64, 20.0))?;
    let tb = build_tables(
        &PulseSpec {
            shape: PulseShape::CircularModulated {
                omega: 8.0 * std::f64::consts::PI,
                ellipticity: 1.0,
                envelope: Envelope::SinSquared,
            },
            lambda: 3.0,
            duration: 1.0,
        },
        1e-12,
    )?;
    let pot = PotentialSpec::coulomb(1.0, 0.5);
    let dt = 1e-3;
    let mut psi = setup::hydrogenic(g.clone(), 1.0, 0.5, None)?;
    let n0 = psi.norm();
    let mut stepper = SplitStepper::new(g, Some(&tb), &pot, Gauge::Kramers, dt, None)?;
    for j in 0..steps {
        stepper.step(&mut psi, j as f64 * dt)?;
    }
    Ok((psi.norm() - n0).abs())
}

fn reproducibility_config(seed: u64, scale: Scale) -> RunConfig {
    let n = if scale == Scale::Smoke { 32 } else { 64 };
    RunConfig {
        seed,
        params: PhysParams::new(2.0, 1.0, 1.0),
        pulse: PulseShape::Linear {
            epsilon: Vec3::new(1.0, 0.0, 0.0),
        },
        potential: PotentialConfig {
            kind: PotentialKind::Coulomb,
            soft_a: 0.5,
        },
        grid: GridSpec::new(2, n, 16.0),
        initial: InitialState::RandomPackets { count: 3 },
        evolution: EvolutionConfig {
            t_final: 1.0,
            dt: 0.01,
            gauge: Gauge::Kramers,
            absorber: None,
            snapshot_every: Some(25),
            observe_every: 5,
        },
        numerics: Numerics::default(),
        bounds: BoundsConfig::default(),
        sweep: None,
        output: OutputConfig::default(),
    }
}

/// Files compared byte for byte between repeated runs.
pub const REPRODUCIBLE_FILES: [&str; 4] =
    ["config.echo", "observables.csv", "bounds.json", "verdict.json"];

/// Every reproducible file of a run directory, snapshots included, in sorted order.
pub fn reproducible_contents(dir: &Path) -> Result<Vec<(String, Vec<u8>)>> {
    let read = |p: &Path| std::fs::read(p).map_err(|e| HarnessError::io(p, e));
    let mut out = Vec::new();
    for f in REPRODUCIBLE_FILES {
        out.push((f.to_string(), read(&dir.join(f))?));
    }
    let snaps = dir.join("snapshots");
    let mut names: Vec<_> = std::fs::read_dir(&snaps)
        .map_err(|e| HarnessError::io(&snaps, e))?
        .filter_map(|e| e.ok().map(|e| e.file_name().to_string_lossy().into_owned()))
        .collect();
    names.sort();
    for name in names {
        out.push((format!("snapshots/{name}"), read(&snaps.join(&name))?));
    }
    Ok(out)
}

fn c10(scale: Scale, work: &Path) -> Result<Outcome> {
    let steps = if scale == Scale::Smoke { 1000 } else { C10_STEPS };
    let drift = unitarity_drift(steps)?;
    let mut runs = Vec::new();
    for (name, seed) in [("run_a", 7), ("run_b", 7), ("run_c", 8)] {
        let dir = RunDir::create(&work.join(name))?;
        commands::evolve(&reproducibility_config(seed, scale), &dir)?;
        runs.push(reproducible_contents(dir.root())?);
    }
    let identical = runs[0] == runs[1];
    let seed_matters = runs[0] != runs[2];
    Ok(Outcome {
        passed: drift < C10_MAX_DRIFT && identical && seed_matters,
        detail: format!(
            "norm drift {drift:.2e} over {steps} steps; {} files identical across repeats {identical}; different seed differs {seed_matters}",
            runs[0].len()
        ),
        data: json!({ "drift": drift, "steps": steps, "files": runs[0].len(), "identical": identical, "seed_changes_output": seed_matters }),
    })
}

fn finish(id: u8, start: Instant, outcome: Result<Outcome>) -> CriterionResult {
    let (passed, detail, data) = match outcome {
        Ok(o) => (o.passed, o.detail, o.data),
        Err(e) => (false, format!("error: {e}"), serde_json::Value::Null),
    };
    CriterionResult {
        id,
        name: NAMES[id as usize - 1].to_string(),
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
        data,
    }
}

/// Runs the selected criteria (1–10), sharing the λ sweep between 6 and 7. Working
/// files go under `work`.
pub fn run_criteria(ids: &[u8], scale: Scale, work: &Path) -> Result<Vec<CriterionResult>> {
    if let Some(bad) = ids.iter().find(|i| !(1..=10).contains(*i)) {
        return Err(HarnessError::Config(format!(
            "field `criteria`: no criterion {bad}"
        )));
    }
    let mut sweep: Option<(f64, Result<Vec<SweepPoint>>)> = None;
    let mut results = Vec::new();
    for &id in ids {
        let start = Instant::now();
        let outcome = match id {
            1 => c1(scale),
            2 => c2(scale),
            3 => c3(scale),
            4 => c4(scale),
            5 => c5(scale),
            6 | 7 => {
                if sweep.is_none() {
                    let s = Instant::now();
                    let pts = cone_sweep(scale, &work.join("cone_sweep"));
                    sweep = Some((s.elapsed().as_secs_f64(), pts));
                }
                let (_, pts) = sweep.as_ref().unwrap();
                match pts {
                    Ok(p) if id == 6 => c6(p),
                    Ok(p) => c7(p, 0.2),
                    Err(e) => Err(HarnessError::Numerical(format!("cone sweep: {e}"))),
                }
            }
            8 => c8(scale),
            9 => c9(scale),
            _ => c10(scale, &work.join("reproducibility")),
        };
        results.push(finish(id, start, outcome));
    }
    Ok(results)
}

/// `verify` command: runs the criteria, prints one line each and writes
/// `verify.json` and `verdict.json`.
pub fn verify(ids: &[u8], scale: Scale, out: &RunDir) -> Result<(Verdict, Vec<CriterionResult>)> {
    let results = run_criteria(ids, scale, &out.path("work"))?;
    out.write_json("verify.json", &json!({ "scale": scale, "criteria": results }))?;
    let checks = results
        .iter()
        .map(|r| Check::new(format!("criterion_{}", r.id), r.passed, r.detail.clone()))
        .collect();
    let verdict = Verdict::new("verify", None, checks);
    out.write_json("verdict.json", &verdict)?;
    Ok((verdict, results))
}
