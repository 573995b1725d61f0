//! Test functions on `{1, ..., 1000}` and the demo protocol built on them.

use alloc::vec::Vec;

use crate::design::{BandwidthSchedule, Design};
use crate::families::Family;
use crate::rng;
use crate::smoother::{Smoother, SmootherConfig, SmootherState};
use crate::{Error, Result};

/// Design size of the test functions.
pub const DEMO_N: usize = 1000;

/// Piecewise constant: 0, 2, -3, -2.5, -2, -2.5 on
/// `1..=200, 201..=400, 401..=550, 551..=700, 701..=850, 851..=1000`.
pub fn theta1(x: usize) -> f64 {
    match x {
        0..=200 => 0.0,
        201..=400 => 2.0,
        401..=550 => -3.0,
        551..=700 => -2.5,
        701..=850 => -2.0,
        _ => -2.5,
    }
}

/// Piecewise polynomial.
pub fn theta2(x: usize) -> f64 {
    let xf = x as f64;
    match x {
        0..=300 => xf / 300.0,
        301..=800 => {
            let u = xf / 100.0 - 5.0;
            4.0 + u * u / 2.0
        }
        _ => 15.0 - 2.0 * xf / 100.0,
    }
}

/// Values of a named test function at `x = 1..=1000`.
pub fn test_function(name: &str) -> Result<Vec<f64>> {
    let f: fn(usize) -> f64 = match name {
        "theta1" => theta1,
        "theta2" => theta2,
        other => {
            return Err(Error::InvalidArgument(alloc::format!(
                "unknown test function '{other}'"
            )))
        }
    };
    Ok((1..=DEMO_N).map(f).collect())
}

/// Gaussian observations `Y_i ~ N(θ(X_i), σ²)` drawn from the `"demo"` stream.
pub fn gaussian_observations(truth: &[f64], sigma: f64, seed: u64) -> Result<Vec<f64>> {
    let fam = Family::gaussian(sigma)?;
    let mut r = rng::stream(seed, "demo", 0);
    let mut out = Vec::with_capacity(truth.len());
    for &t in truth {
        fam.sample_into(t, 1, &mut r, &mut out)?;
    }
    Ok(out)
}

/// Mean squared errors of every step of a run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MseTrace {
    pub bandwidths: Vec<f64>,
    /// Over all points.
    pub mse: Vec<f64>,
    /// Over points whose step-`k` neighbourhood is not clipped by the design
    /// boundary; `None` once no such point is left.
    pub mse_interior: Vec<Option<f64>>,
}

/// Run the smoother on `data`, recording the MSE against `truth` after each
/// step and passing every state to `observer`.
pub fn mse_trace<F>(smoother: &Smoother, data: &[f64], truth: &[f64], mut observer: F) -> Result<MseTrace>
where
    F: FnMut(&SmootherState),
{
    if truth.len() != data.len() {
        return Err(Error::ShapeMismatch {
            expected: data.len(),
            got: truth.len(),
        });
    }
    let schedule = smoother.config().schedule;
    let design = *smoother.design();
    let interiors: Vec<Option<Vec<usize>>> = schedule
        .bandwidths()
        .iter()
        .map(|&h| design.interior(h).ok())
        .collect();
    let mut mse = Vec::new();
    let mut mse_interior = Vec::new();
    let stats = smoother.config().family.statistics(data)?;
    smoother.run_with_observer(&stats, |s| {
        let sq = |i: usize| {
            let d = s.theta_tilde[i] - truth[i];
            d * d
        };
        mse.push((0..truth.len()).map(sq).sum::<f64>() / truth.len() as f64);
        mse_interior.push(
            interiors[s.k]
                .as_ref()
                .map(|idx| idx.iter().map(|&i| sq(i)).sum::<f64>() / idx.len() as f64),
        );
        observer(s);
    })?;
    Ok(MseTrace {
        bandwidths: schedule.bandwidths(),
        mse,
        mse_interior,
    })
}

/// The demo protocol: Gaussian noise with `σ = 1` on a test function,
/// default kernels, `h0 = 1`, `a = 1.25`, `hmax = 1000`.
pub fn demo_smoother(lambda: f64) -> Result<Smoother> {
    let schedule = BandwidthSchedule::from_hmax(1.0, BandwidthSchedule::default_factor(1), 1000.0)?;
    let cfg = SmootherConfig::new(Family::gaussian(1.0)?, lambda, schedule);
    Smoother::new(cfg, Design::line(DEMO_N)?)
}
