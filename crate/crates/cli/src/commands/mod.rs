mod calibrate;
mod demo;
mod families;
mod smooth;
mod verify;

use psaws_core::design::{BandwidthSchedule, Design, KernelKind, KernelSpec};
use psaws_core::families::{Family, FamilyKind, NuisanceParams};

use crate::args::{Command, DesignArgs, FamilyArgs, KernelArg, ScheduleArgs};
use crate::error::{CliError, CliResult};

pub fn dispatch(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Smooth(a) => smooth::run(&a),
        Command::Calibrate(a) => calibrate::run_calibrate(&a),
        Command::Testprop(a) => calibrate::run_testprop(&a),
        Command::Verify(a) => verify::run(&a),
        Command::Demo(a) => demo::run(&a),
        Command::Families(a) => families::run(&a),
    }
}

const DEFAULT_KSTAR: usize = 15;

pub(crate) fn family(a: &FamilyArgs) -> CliResult<Family> {
    let params = NuisanceParams {
        sigma: a.sigma,
        shape: a.shape,
        k: a.kparam,
        n: a.trials,
        x_m: a.xm,
        r: a.r,
    };
    Family::by_name(&a.family, &params).map_err(|e| CliError::Usage(e.to_string()))
}

pub(crate) fn kernel(k: KernelArg) -> KernelSpec {
    KernelSpec::standard(match k {
        KernelArg::Parabola => KernelKind::Parabola,
        KernelArg::Plateau => KernelKind::PlateauTriangle,
        KernelArg::Uniform => KernelKind::Uniform,
    })
}

pub(crate) fn schedule(a: &ScheduleArgs, dim: usize) -> CliResult<BandwidthSchedule> {
    let factor = a.a.unwrap_or_else(|| BandwidthSchedule::default_factor(dim));
    let s = match (a.kstar, a.hmax) {
        (_, Some(hmax)) => BandwidthSchedule::from_hmax(a.h0, factor, hmax),
        (k, None) => BandwidthSchedule::new(a.h0, factor, k.unwrap_or(DEFAULT_KSTAR)),
    };
    s.map_err(|e| CliError::Usage(e.to_string()))
}

pub(crate) fn design(a: &DesignArgs, default_n: usize) -> CliResult<Design> {
    let d = match &a.grid {
        Some(g) => Design::grid(g[0], g[1]),
        None => Design::line(a.n.unwrap_or(default_n)),
    };
    d.map_err(|e| CliError::Usage(e.to_string()))
}

/// A parameter value in the middle of the family's usual range.
pub(crate) fn default_theta(f: &Family) -> f64 {
    match f.kind() {
        FamilyKind::Gaussian { .. } => 0.0,
        FamilyKind::Binomial { n } => f64::from(n) / 2.0,
        FamilyKind::Bernoulli => 0.5,
        _ => 1.0,
    }
}

/// Shortest round-trip decimal form.
pub(crate) fn num(v: f64) -> String {
    format!("{v}")
}
