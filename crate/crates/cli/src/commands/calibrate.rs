use psaws_core::calibration::{
    calibrate_lambda, check_propagation, emit_isolines, invariance_report, CalibrationSetup, CheckOptions,
    LambdaCalibration, PropagationCurve, Violation,
};
use psaws_core::design::{BandwidthSchedule, Design};
use psaws_core::families::Family;
use serde::Serialize;

use super::{default_theta, design, family, kernel, num, schedule};
use crate::args::{CalibrateArgs, SimulationArgs, TestpropArgs};
use crate::error::{CliError, CliResult};
use crate::io;

const DEFAULT_N: usize = 500;

#[derive(Serialize)]
struct SetupSummary {
    family: Family,
    design: Design,
    schedule: BandwidthSchedule,
    reps: usize,
    seed: u64,
    interior_points: usize,
}

fn setup(a: &SimulationArgs) -> CliResult<(CalibrationSetup, Vec<f64>, SetupSummary)> {
    let fam = family(&a.family)?;
    let d = design(&a.design, DEFAULT_N)?;
    let sched = schedule(&a.schedule, d.dim())?;
    if a.reps < 2 {
        return Err(CliError::Usage("--reps must be at least 2".into()));
    }
    if !(a.epsilon > 0.0 && a.epsilon < 1.0) {
        return Err(CliError::Usage("--epsilon must lie in (0, 1)".into()));
    }
    let mut s = CalibrationSetup::new(fam, d, sched, a.reps, a.seed.seed);
    s.loc_kernel = kernel(a.schedule.lkern);
    s.ad_kernel = kernel(a.schedule.akern);
    let thetas = if a.theta.is_empty() {
        vec![default_theta(&fam)]
    } else {
        a.theta.clone()
    };
    let summary = SetupSummary {
        family: fam,
        design: d,
        schedule: sched,
        reps: a.reps,
        seed: a.seed.seed,
        interior_points: s.interior()?.len(),
    };
    Ok((s, thetas, summary))
}

fn write_isolines(a: &SimulationArgs, curve: &PropagationCurve) -> CliResult<()> {
    let Some(path) = &a.isolines else {
        return Ok(());
    };
    let rows = emit_isolines(curve, &a.p_levels)?;
    let bytes = io::csv_bytes(
        &["k", "h", "p", "z", "estimator"],
        rows.iter().map(|r| {
            vec![
                r.k.to_string(),
                num(r.h),
                num(r.p),
                num(r.z),
                r.estimator.name().to_string(),
            ]
        }),
    )?;
    io::write_atomic(path, &bytes)
}

#[derive(Serialize)]
struct CalibrationDoc {
    setup: SetupSummary,
    calibration: LambdaCalibration,
}

pub fn run_calibrate(a: &CalibrateArgs) -> CliResult<()> {
    let (s, thetas, summary) = setup(&a.sim)?;
    let opts = CheckOptions::new(a.sim.epsilon);
    let cal = calibrate_lambda(&s, &thetas, &opts, (a.bracket[0], a.bracket[1]))?;
    if a.sim.isolines.is_some() {
        let curve = psaws_core::calibration::phat_surface(&s, thetas[0], cal.lambda_opt)?;
        write_isolines(&a.sim, &curve)?;
    }
    let lambda = cal.lambda_opt;
    let doc = CalibrationDoc {
        setup: summary,
        calibration: cal,
    };
    io::emit(a.sim.output.as_deref(), &io::json_document("calibration", &doc)?)?;
    if a.sim.output.is_some() {
        println!("lambda_opt = {lambda}");
    }
    Ok(())
}

#[derive(Serialize)]
struct ThetaResult {
    theta: f64,
    holds: bool,
    epsilon_level: Option<f64>,
    p_grid: Vec<f64>,
    violations: Vec<Violation>,
}

#[derive(Serialize)]
struct Invariance {
    identical: bool,
    max_discrepancy: f64,
}

#[derive(Serialize)]
struct TestpropDoc {
    setup: SetupSummary,
    lambda: f64,
    epsilon: f64,
    holds: bool,
    results: Vec<ThetaResult>,
    invariance: Option<Invariance>,
}

pub fn run_testprop(a: &TestpropArgs) -> CliResult<()> {
    if !(a.lambda > 0.0) {
        return Err(CliError::Usage(format!("--lambda must be positive, got {}", a.lambda)));
    }
    let (s, thetas, summary) = setup(&a.sim)?;
    let opts = CheckOptions::new(a.sim.epsilon);
    let inv = invariance_report(&s, &thetas, a.lambda)?;
    let mut results = Vec::with_capacity(thetas.len());
    for curve in &inv.curves {
        let check = check_propagation(curve, &opts)?;
        results.push(ThetaResult {
            theta: curve.theta,
            holds: check.holds,
            epsilon_level: check.epsilon_level(),
            p_grid: check.p_grid.clone(),
            violations: check.violations,
        });
    }
    write_isolines(&a.sim, &inv.curves[0])?;
    let holds = results.iter().all(|r| r.holds);
    let doc = TestpropDoc {
        setup: summary,
        lambda: a.lambda,
        epsilon: a.sim.epsilon,
        holds,
        results,
        invariance: (thetas.len() > 1).then_some(Invariance {
            identical: inv.identical,
            max_discrepancy: inv.max_discrepancy,
        }),
    };
    io::emit(a.sim.output.as_deref(), &io::json_document("testprop", &doc)?)?;
    if holds {
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "propagation condition violated at lambda = {}",
            a.lambda
        )))
    }
}
