//! Propagation-separation adaptive weights smoothing.
//!
//! Pointwise adaptive estimation of a locally constant parameter function
//! observed through a one-parameter exponential family on a 1D sequence or a
//! 2D regular grid. Every iteration enlarges the location bandwidth and
//! reweights neighbours by a Kullback-Leibler penalty on the previous
//! estimates, so smoothing spreads freely inside homogeneous regions and
//! stops at sharp discontinuities.
//!
//! The crate is `no_std` (it needs `alloc`). Randomness is always passed in
//! explicitly or derived from a 64-bit seed through [`rng::stream`].
//!
//! Modules:
//! - [`families`]: family catalog, KL divergence, Fisher information, samplers.
//! - [`design`]: designs, kernels and the bandwidth schedule.
//! - [`smoother`]: non-adaptive and adaptive estimators.
//! - [`calibration`]: Monte-Carlo exceedance surfaces and the choice of the
//!   adaptation bandwidth.
//! - [`verification`]: empirical checks of the propagation, separation and
//!   stability bounds.
//! - [`scenarios`]: piecewise test functions used by the demos.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod calibration;
pub mod design;
mod error;
pub mod families;
pub(crate) mod math;
pub mod rng;
pub mod scenarios;
pub mod smoother;
pub mod verification;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::calibration::{
        calibrate_lambda, check_propagation, emit_isolines, invariance_report, phat_surface,
        CalibrationSetup, CheckOptions, PropagationCurve, ZGrid,
    };
    pub use crate::design::{BandwidthSchedule, Design, KernelKind, KernelSpec};
    pub use crate::families::{Family, FamilyKind, KappaSet, ParametrizedFamily};
    pub use crate::smoother::{Smoother, SmootherConfig, SmootherState};
    pub use crate::{Error, Result};
}
