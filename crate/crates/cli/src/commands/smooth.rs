use psaws_core::design::Design;
use psaws_core::smoother::{Smoother, SmootherConfig, SmootherState};
use serde::Serialize;

use super::{family, kernel, num, schedule};
use crate::args::{InputFormat, OutputFormat, PgmDepth, SmoothArgs};
use crate::error::{CliError, CliResult};
use crate::io;

fn pair(v: &Option<Vec<f64>>, flag: &str) -> CliResult<Option<(f64, f64)>> {
    match v {
        None => Ok(None),
        Some(v) if v[0] < v[1] => Ok(Some((v[0], v[1]))),
        Some(v) => Err(CliError::Usage(format!("--{flag} needs LO < HI, got {} {}", v[0], v[1]))),
    }
}

#[derive(Serialize)]
struct SmoothReport<'a> {
    family: &'a psaws_core::families::Family,
    lambda: f64,
    design: Design,
    schedule: psaws_core::design::BandwidthSchedule,
    states: &'a [SmootherState],
}

pub fn run(a: &SmoothArgs) -> CliResult<()> {
    let fam = family(&a.family)?;
    let range = pair(&a.range, "range")?;
    let (values, design) = match a.input_format {
        InputFormat::Csv => {
            let v = io::read_column(&a.input, a.column.as_deref())?;
            let d = Design::line(v.len())?;
            (v, d)
        }
        InputFormat::Matrix => {
            let (v, rows, cols) = io::read_matrix(&a.input)?;
            (v, Design::grid(rows, cols)?)
        }
        InputFormat::Pgm => {
            let (lo, hi) = range.unwrap_or((0.0, 1.0));
            let (v, rows, cols) = io::read_pgm(&a.input, lo, hi)?;
            (v, Design::grid(rows, cols)?)
        }
    };
    if a.format == OutputFormat::Pgm && design.dim() != 2 {
        return Err(CliError::Usage("pgm output needs two-dimensional input".into()));
    }
    if !(a.lambda > 0.0) {
        return Err(CliError::Usage(format!("--lambda must be positive, got {}", a.lambda)));
    }
    let stats = fam.statistics(&values)?;
    let sched = schedule(&a.schedule, design.dim())?;
    let mut cfg = SmootherConfig::new(fam, a.lambda, sched);
    cfg.loc_kernel = kernel(a.schedule.lkern);
    cfg.ad_kernel = kernel(a.schedule.akern);
    cfg.boundary_shift = a.boundary_shift;
    if let Some((lo, hi)) = pair(&a.project, "project")? {
        cfg.projection = Some(fam.build_kappa_set(lo, hi)?);
    }
    let smoother = Smoother::new(cfg, design)?;
    let states = if a.trace {
        smoother.run_traced(&stats)?
    } else {
        vec![smoother.run(&stats)?]
    };

    let bytes = match a.format {
        OutputFormat::Csv => io::csv_bytes(
            &["k", "index", "theta_tilde", "n_tilde", "n_bar"],
            states.iter().flat_map(|s| {
                (0..s.len()).map(move |i| {
                    vec![
                        s.k.to_string(),
                        i.to_string(),
                        num(s.theta_tilde[i]),
                        num(s.n_tilde[i]),
                        num(s.n_bar[i]),
                    ]
                })
            }),
        )?,
        OutputFormat::Json => io::json_document(
            "smooth",
            &SmoothReport {
                family: &fam,
                lambda: a.lambda,
                design,
                schedule: sched,
                states: &states,
            },
        )?,
        OutputFormat::Pgm => {
            let last = states.last().expect("at least one state");
            let (lo, hi) = match range {
                Some(r) => r,
                None => {
                    let lo = last.theta_tilde.iter().cloned().fold(f64::INFINITY, f64::min);
                    let hi = last.theta_tilde.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    if hi > lo {
                        (lo, hi)
                    } else {
                        (lo, lo + 1.0)
                    }
                }
            };
            let (rows, cols) = design.shape();
            let maxval = match a.depth {
                PgmDepth::Eight => 255,
                PgmDepth::Sixteen => 65535,
            };
            io::encode_pgm(&last.theta_tilde, rows, cols, lo, hi, maxval)
        }
    };
    io::emit(a.output.as_deref(), &bytes)
}
