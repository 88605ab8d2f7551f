//! The `validate`, `evolve`, `bounds` and `sweep` commands.

use std::time::Instant;

use kramers_core::bounds::{bound_report, fit_scaling, BoundReport};
use kramers_core::observables::{
    cone_norm, ejection_kinematics, spreading, survival_probability, AxisMode, ConeObservable,
};
use kramers_core::params::{validate as validate_params, Bands};
use kramers_core::propagator::{
    evolve_split_with, gauge_bridge, BridgeDirection, EvolutionPlan, Gauge,
};
use kramers_core::pulse::{check_assumptions, PulseTables};
use kramers_core::state::check_decay;
use kramers_core::Wavefunction64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, SweepParam};
use crate::error::{HarnessError, Result};
use crate::output::{Check, Metrics, ObservableRow, RunDir, Verdict, VERSION};
use crate::setup;

/// Everything one trajectory produced.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRecord {
    pub config_hash: String,
    pub rows: Vec<ObservableRow>,
    pub bounds: Option<BoundReport<f64>>,
    pub metrics: Metrics,
    pub version: String,
}

impl RunRecord {
    pub fn last(&self) -> Option<&ObservableRow> {
        self.rows.last()
    }
}

pub fn validate(cfg: &RunConfig, out: &RunDir) -> Result<Verdict> {
    let report = validate_params(&cfg.params, cfg.hypothesis_set(), &Bands::default())?;
    let tables = setup::tables(cfg)?;
    let cert = check_assumptions(&tables);
    let psi = setup::initial_state(cfg, setup::grid(cfg)?)?;
    let decay = check_decay(&psi)?;

    let mut checks: Vec<Check> = report
        .checks
        .iter()
        .filter(|c| c.required)
        .map(|c| Check::new(c.name.clone(), c.passed, format!("value {}", c.value)))
        .collect();
    checks.push(Check::new(
        "ass0",
        cert.ass0.verified_on_samples,
        "∫|G|⁻¹ finite on the s0 ladder",
    ));
    checks.push(Check::new("ass1", cert.ass1.passed, format!("|F(1)| = {}", cert.ass1.f1_norm)));
    checks.push(Check::new("ass2", cert.ass2.passed, format!("C = {}", cert.ass2.c)));
    checks.push(Check::new(
        "decay_gamma_gt_5_2",
        decay.gamma_gt_5_2,
        format!("gamma {:?}, R fit {}", decay.gamma, decay.r_fit),
    ));

    out.write_config(cfg)?;
    out.write_json(
        "validation.json",
        &serde_json::json!({ "hypotheses": report, "assumptions": cert, "decay": decay }),
    )?;
    let verdict = Verdict::new("validate", Some(cfg.hash()), checks);
    out.write_json("verdict.json", &verdict)?;
    Ok(verdict)
}

/// Row of observables for a Kramers- or Ritz-gauge state at time `t > 0`.
pub fn observe(
    psi: &Wavefunction64,
    psi0: &Wavefunction64,
    t: f64,
    gauge: Gauge,
    tables: &PulseTables<f64>,
    cones: &[ConeObservable<f64>; 2],
) -> Result<ObservableRow> {
    // a null pulse has no ejection axis; the cone norms are then undefined
    let cone = |c: &ConeObservable<f64>| match cone_norm(psi, t, c, tables) {
        Err(kramers_core::Error::Domain(_)) => Ok(f64::NAN),
        other => other,
    };
    let n_g = cone(&cones[0])?;
    let n_f1 = cone(&cones[1])?;
    // survival and kinematics are taken in the gauge-invariant sense
    let (ritz, kramers) = match gauge {
        Gauge::Kramers => (gauge_bridge(psi, t, tables, BridgeDirection::KramersToRitz)?, psi.clone()),
        Gauge::Ritz => (psi.clone(), gauge_bridge(psi, t, tables, BridgeDirection::RitzToKramers)?),
    };
    let survival = survival_probability(&ritz, psi0)?;
    let w = spreading(psi)?;
    let (v, angle) = match ejection_kinematics(&kramers, t, tables) {
        Ok(k) => (k.mean_velocity.0, k.opening_angle),
        Err(_) => ([f64::NAN; 3], f64::NAN),
    };
    Ok(ObservableRow {
        t,
        n_g,
        n_f1,
        survival,
        w,
        v,
        angle,
    })
}

pub fn cones(cfg: &RunConfig, tables: &PulseTables<f64>) -> Result<[ConeObservable<f64>; 2]> {
    let delta = cfg.params.delta_or_default(tables.c_ass2);
    let theta = cfg.params.theta;
    Ok([
        ConeObservable::new(delta, theta, AxisMode::GOfT)?,
        ConeObservable::new(delta, theta, AxisMode::F1Fixed)?,
    ])
}

pub fn evolve(cfg: &RunConfig, out: &RunDir) -> Result<(Verdict, RunRecord)> {
    let start = Instant::now();
    let tables = setup::tables(cfg)?;
    let grid = setup::grid(cfg)?;
    let psi0 = setup::initial_state(cfg, grid)?;
    let pot = cfg.potential_spec();
    let cones = cones(cfg, &tables)?;
    let ev = &cfg.evolution;
    let mut plan = EvolutionPlan::new(0.0, ev.t_final, ev.dt, ev.gauge);
    plan.absorber = ev.absorber;

    out.write_config(cfg)?;
    let mut rows = Vec::new();
    let traj = evolve_split_with(&psi0, &plan, &tables, &pot, |step, t, psi| {
        if step % ev.observe_every == 0 {
            rows.push(
                observe(psi, &psi0, t, ev.gauge, &tables, &cones)
                    .map_err(|e| kramers_core::Error::Numerical(e.to_string()))?,
            );
        }
        if let Some(every) = ev.snapshot_every {
            if every > 0 && step % every == 0 {
                out.write_snapshot(step, psi)
                    .map_err(|e| kramers_core::Error::Numerical(e.to_string()))?;
            }
        }
        Ok(())
    })?;

    let s_max = (ev.t_final / cfg.params.duration).max(1.0);
    out.write_with("pulse.csv", |w| tables.write_csv(w, 1001, s_max))?;

    let bounds = bound_report(&cfg.params, &tables, cfg.bound_time(), &cfg.bounds.constants);
    let mut checks = Vec::new();
    let drift = (traj.final_state.norm() - psi0.norm()).abs();
    if ev.absorber.is_none() {
        let allowed = 1e-10 * (traj.steps as f64 / 1e4).max(1.0);
        checks.push(Check::new("norm_drift", drift < allowed, format!("{drift:e} (limit {allowed:e})")));
    }
    checks.push(Check::new(
        "finite",
        rows.iter().all(|r| r.survival.is_finite() && r.w.is_finite()),
        "survival and spreading finite at every row",
    ));
    let bounds = match bounds {
        Ok(b) => {
            out.write_json("bounds.json", &b)?;
            Some(b)
        }
        Err(e) => {
            out.write_json("bounds.json", &serde_json::json!({ "unavailable": e.to_string() }))?;
            checks.push(Check::new("bounds", true, format!("bounds unavailable: {e}")));
            None
        }
    };
    out.write_rows(&rows)?;
    let metrics = Metrics {
        wall_clock_s: start.elapsed().as_secs_f64(),
        steps: traj.steps,
        threads: rayon::current_num_threads(),
        version: VERSION.into(),
    };
    out.write_json("metrics.json", &metrics)?;
    let verdict = Verdict::new("evolve", Some(cfg.hash()), checks);
    out.write_json("verdict.json", &verdict)?;
    Ok((
        verdict,
        RunRecord {
            config_hash: cfg.hash(),
            rows,
            bounds,
            metrics,
            version: VERSION.into(),
        },
    ))
}

/// Analytic bounds only; no grid is allocated.
pub fn bounds(cfg: &RunConfig, out: &RunDir) -> Result<(Verdict, BoundReport<f64>)> {
    let tables = setup::tables(cfg)?;
    let cert = check_assumptions(&tables);
    let report = bound_report(&cfg.params, &tables, cfg.bound_time(), &cfg.bounds.constants)?;
    out.write_config(cfg)?;
    out.write_json("bounds.json", &report)?;
    let checks = vec![
        Check::new("assumptions", cert.passed(), format!("C_ass2 = {}", cert.ass2.c)),
        Check::new(
            "kappa",
            report.kappa.value.is_finite() && report.kappa.value >= 0.0,
            format!("kappa {} at s0 {}", report.kappa.value, report.kappa.s0),
        ),
    ];
    let verdict = Verdict::new("bounds", Some(cfg.hash()), checks);
    out.write_json("verdict.json", &verdict)?;
    Ok((verdict, report))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub n_g: f64,
    pub n_f1: f64,
    pub survival: f64,
    pub w: f64,
    pub v: [f64; 3],
    pub angle: f64,
    pub kappa: Option<f64>,
    pub config_hash: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepSummary {
    pub parameter: SweepParam,
    pub points: Vec<SweepPoint>,
    /// Fit of `1 − N_G(t_final)` against the swept value.
    pub deficit_exponent: Option<f64>,
    pub deficit_exponent_stderr: Option<f64>,
}

pub const SWEEP_HEADER: &str = "value,N_G,N_F1,survival,W,angle,kappa";

/// One trajectory per ladder value, `workers` at a time, each in its own sub-directory.
pub fn sweep(cfg: &RunConfig, out: &RunDir, workers: usize) -> Result<(Verdict, SweepSummary)> {
    let sw = cfg
        .sweep
        .clone()
        .ok_or_else(|| HarnessError::Config("field `sweep`: missing [sweep] section".into()))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| HarnessError::Config(format!("field `workers`: {e}")))?;
    out.write_config(cfg)?;
    let results: Vec<Result<SweepPoint>> = pool.install(|| {
        sw.values
            .par_iter()
            .enumerate()
            .map(|(i, &v)| {
                let point = cfg.with_param(sw.parameter, v);
                point.check()?;
                let dir = RunDir::create(&out.path(&format!("point_{i:02}")))?;
                let (_, rec) = evolve(&point, &dir)?;
                let last = rec
                    .last()
                    .copied()
                    .ok_or_else(|| HarnessError::Numerical("trajectory produced no rows".into()))?;
                Ok(SweepPoint {
                    value: v,
                    n_g: last.n_g,
                    n_f1: last.n_f1,
                    survival: last.survival,
                    w: last.w,
                    v: last.v,
                    angle: last.angle,
                    kappa: rec.bounds.map(|b| b.kappa.value),
                    config_hash: rec.config_hash,
                })
            })
            .collect()
    });
    let points = results.into_iter().collect::<Result<Vec<_>>>()?;

    let mut csv = String::from(SWEEP_HEADER);
    csv.push('\n');
    for p in &points {
        let k = p.kappa.map_or("NaN".to_string(), |k| k.to_string());
        csv.push_str(&format!("{},{},{},{},{},{},{}\n", p.value, p.n_g, p.n_f1, p.survival, p.w, p.angle, k));
    }
    out.write_text("sweep.csv", &csv)?;

    let xs: Vec<f64> = points.iter().map(|p| p.value).collect();
    let deficits: Vec<f64> = points.iter().map(|p| 1.0 - p.n_g).collect();
    let fit = fit_scaling(&xs, &deficits).ok();
    let summary = SweepSummary {
        parameter: sw.parameter,
        points,
        deficit_exponent: fit.map(|f| f.exponent),
        deficit_exponent_stderr: fit.map(|f| f.stderr),
    };
    out.write_json("sweep.json", &summary)?;

    let mut checks = Vec::new();
    if sw.parameter == SweepParam::Lambda {
        let increasing = xs.windows(2).all(|w| w[1] > w[0]);
        let ordered: Vec<&SweepPoint> = if increasing {
            summary.points.iter().collect()
        } else {
            summary.points.iter().rev().collect()
        };
        let dec = ordered.windows(2).all(|w| 1.0 - w[1].n_g < 1.0 - w[0].n_g);
        checks.push(Check::new(
            "deficit_strictly_decreasing_in_lambda",
            dec,
            format!("{:?}", ordered.iter().map(|p| 1.0 - p.n_g).collect::<Vec<_>>()),
        ));
    }
    checks.push(Check::new(
        "points_finite",
        summary.points.iter().all(|p| p.n_g.is_finite()),
        format!("{} points", summary.points.len()),
    ));
    let verdict = Verdict::new("sweep", Some(cfg.hash()), checks);
    out.write_json("verdict.json", &verdict)?;
    Ok((verdict, summary))
}
