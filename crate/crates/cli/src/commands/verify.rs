use std::fmt::Write as _;

use psaws_core::design::Design;
use psaws_core::families::{Family, FamilyKind, KappaSet};
use psaws_core::verification::{
    exp_bound_check, local_propagation_experiment, separation_check, stability_experiment, triangle_lemma_check,
    HomogeneityPartition, Scenario, VerificationReport,
};

use super::{default_theta, family, kernel, schedule};
use crate::args::{Check, VerifyArgs};
use crate::error::{CliError, CliResult};
use crate::io;

fn default_range(f: &Family) -> (f64, f64) {
    match f.kind() {
        FamilyKind::Gaussian { .. } => (-1.0, 1.0),
        _ => {
            let t = default_theta(f);
            (0.5 * t, 1.5 * t)
        }
    }
}

fn range_arg(v: &Option<Vec<f64>>) -> Option<(f64, f64)> {
    v.as_ref().map(|v| (v[0], v[1]))
}

/// `Θ_κ` covering both segment values, widened when the family allows.
fn scenario_kappa(f: &Family, left: f64, right: f64) -> CliResult<KappaSet> {
    let lo = left.min(right);
    let hi = left.max(right);
    let s = hi - lo;
    let candidates = [(lo - 0.5 * s, hi + 0.5 * s), (lo, hi), (0.5 * lo, 2.0 * hi), (lo - 1.0, hi + 1.0)];
    let mut last = None;
    for (a, b) in candidates {
        match f.build_kappa_set(a, b) {
            Ok(k) => return Ok(k),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("candidates are not empty").into())
}

fn scenario(a: &VerifyArgs, f: Family) -> CliResult<Scenario> {
    let need = |v: Option<f64>, flag: &str| {
        v.ok_or_else(|| CliError::Usage(format!("--{flag} is required for this check")))
    };
    let right = need(a.right, "right")?;
    let lambda = need(a.lambda, "lambda")?;
    let left = a.left.unwrap_or_else(|| default_theta(&f));
    let split = a.split.unwrap_or(a.n / 2);
    if split == 0 || split >= a.n {
        return Err(CliError::Usage(format!("--split must lie in 1..{}", a.n)));
    }
    let design = Design::line(a.n)?;
    let kappa = match range_arg(&a.kappa_range) {
        Some((lo, hi)) => f.build_kappa_set(lo, hi)?,
        None => scenario_kappa(&f, left, right)?,
    };
    let mut s = Scenario::new(
        f,
        design,
        HomogeneityPartition::two_segment(a.n, split, left, right),
        schedule(&a.schedule, 1)?,
        kappa,
        lambda,
        a.reps,
        a.seed.seed,
    );
    s.loc_kernel = kernel(a.schedule.lkern);
    s.ad_kernel = kernel(a.schedule.akern);
    if let Some(z) = a.z {
        s.z = z;
    }
    if let Some(e) = a.epsilon {
        s.epsilon = e;
    }
    s.projection = a.project;
    Ok(s)
}

fn table(r: &VerificationReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "check {} family {} reps {} seed {}", r.check, r.family, r.reps, r.seed);
    let _ = writeln!(out, "{:<52} {:>14} {:>14} {:>12}  result", "entry", "empirical", "bound", "slack");
    for e in &r.entries {
        let _ = writeln!(
            out,
            "{:<52} {:>14.6e} {:>14.6e} {:>12.3e}  {}",
            e.label,
            e.empirical,
            e.bound,
            e.slack,
            if e.pass { "pass" } else { "FAIL" }
        );
    }
    if !r.flags.is_empty() {
        let _ = writeln!(out, "flags: {}", r.flags.join(", "));
    }
    let _ = writeln!(out, "overall: {}", if r.pass { "pass" } else { "FAIL" });
    out
}

pub fn run(a: &VerifyArgs) -> CliResult<()> {
    let f = family(&a.family)?;
    let report = match a.check {
        Check::Expbound => {
            let theta = a.theta.unwrap_or_else(|| default_theta(&f));
            let weights = if a.weights.is_empty() {
                vec![1.0; a.nweights.max(1)]
            } else {
                a.weights.clone()
            };
            exp_bound_check(&f, theta, &weights, &a.zs, a.reps, a.seed.seed)?
        }
        Check::Triangle => {
            let (lo, hi) = range_arg(&a.kappa_range).unwrap_or_else(|| default_range(&f));
            let set = f.build_kappa_set(lo, hi)?;
            triangle_lemma_check(&f, &set, a.max_len, a.reps, a.seed.seed)?
        }
        Check::Separation => {
            let s = scenario(a, f)?;
            let k = a.step.unwrap_or(s.schedule.kstar.saturating_sub(1));
            separation_check(&s, k)?
        }
        Check::Localprop => {
            let s = scenario(a, f)?;
            local_propagation_experiment(&s, a.kprime.unwrap_or(s.schedule.kstar))?
        }
        Check::Stability => {
            let s = scenario(a, f)?;
            let k2 = a.k2.unwrap_or(s.schedule.kstar);
            stability_experiment(&s, a.k1.unwrap_or(k2 / 2), k2)?
        }
    };
    let doc = io::json_document("verification_report", &report)?;
    io::emit(a.output.as_deref(), &doc)?;
    if a.output.is_some() {
        print!("{}", table(&report));
    } else {
        eprint!("{}", table(&report));
    }
    if report.pass {
        Ok(())
    } else {
        Err(CliError::Failed(format!("{} check did not pass", report.check)))
    }
}
