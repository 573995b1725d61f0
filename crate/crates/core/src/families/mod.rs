//! One-parameter exponential families in mean parametrization.
//!
//! A [`Family`] describes densities `p(y) exp[T(y) C(θ) - B(θ)]` with
//! `B'(θ) = θ C'(θ)`, so that `E_θ T(Y) = θ`. In this parametrization the
//! Kullback-Leibler divergence is `θ [C(θ) - C(θ')] - [B(θ) - B(θ')]` and the
//! Fisher information is `C'(θ)`.
//!
//! Families tabulated in their textbook parametrization `ϑ` live in
//! [`ParametrizedFamily`]; those with a linear mean map convert to a
//! [`Family`] through [`ParametrizedFamily::reparametrize`].

mod parametrized;

pub use parametrized::{ParametrizedFamily, Reparametrized};

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Binomial, Distribution, Exp1, Gamma, Poisson, StandardNormal};

use crate::math::{exp, ln, powf, sqrt, xlogxy};
use crate::{Error, Result};

/// Default distance kept from a divergent boundary when estimates are shifted
/// into the interior before evaluating a divergence.
pub const DEFAULT_BOUNDARY_SHIFT: f64 = 1e-8;

/// A real interval with optionally closed finite ends.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
    pub lower_closed: bool,
    pub upper_closed: bool,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval {
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
        lower_closed: false,
        upper_closed: false,
    };

    pub const fn open(lower: f64, upper: f64) -> Self {
        Interval {
            lower,
            upper,
            lower_closed: false,
            upper_closed: false,
        }
    }

    pub const fn left_open(lower: f64, upper: f64) -> Self {
        Interval {
            lower,
            upper,
            lower_closed: false,
            upper_closed: true,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        if x.is_nan() {
            return false;
        }
        let lo_ok = if self.lower_closed {
            x >= self.lower
        } else {
            x > self.lower
        };
        let hi_ok = if self.upper_closed {
            x <= self.upper
        } else {
            x < self.upper
        };
        lo_ok && hi_ok
    }

    pub fn contains_interior(&self, x: f64) -> bool {
        x > self.lower && x < self.upper
    }

    pub fn describe(&self) -> String {
        let l = if self.lower_closed { '[' } else { '(' };
        let r = if self.upper_closed { ']' } else { ')' };
        format!("{l}{}, {}{r}", self.lower, self.upper)
    }
}

/// The catalogued families. Nuisance constants are fixed at construction.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "name", rename_all = "snake_case"))]
pub enum FamilyKind {
    /// `N(θ, σ²)`, `T(y) = y`.
    Gaussian { sigma: f64 },
    /// `N(0, θ)`, `T(y) = y²`.
    NormalVariance,
    /// `logN(θ, σ²)`, `T(y) = ln y`.
    LogNormal { sigma: f64 },
    /// `Γ(p, θ/p)`, mean `θ`, `T(y) = y`.
    Gamma { shape: f64 },
    /// `Exp` with mean `θ`, `T(y) = y`.
    Exponential,
    /// `Erlang(n)` with mean `θ`, `T(y) = y`.
    Erlang { n: u32 },
    /// Rayleigh with `θ = E Y² = 2ϑ²`, `T(y) = y²`.
    Rayleigh,
    /// Weibull with shape `k` and `θ = E Yᵏ`, `T(y) = yᵏ`.
    Weibull { k: f64 },
    /// `kY/θ ~ χ²(k)`, `T(y) = y`.
    ScaledChiSquared { k: f64 },
    /// Pareto with scale `x_m` and `θ = E ln(Y/x_m)`, `T(y) = ln(y/x_m)`.
    Pareto { x_m: f64 },
    /// Poisson, `T(k) = k`.
    Poisson,
    /// Binomial with `n` trials and mean `θ`, `T(k) = k`.
    Binomial { n: u32 },
    /// Negative binomial with `r` and mean `θ`, `T(k) = k`.
    NegativeBinomial { r: f64 },
    /// Bernoulli, `T(k) = k`.
    Bernoulli,
}

/// How the divergence of a family looks in mean parametrization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum KlShape {
    /// `(θ - θ')² / (2 s²)`.
    Quadratic { variance: f64 },
    /// `p [θ/θ' - 1 - ln(θ/θ')]`.
    GammaLike { p: f64 },
    /// `θ ln(θ/θ') - θ + θ'`.
    Poisson,
    /// `θ ln(θ/θ') + (n - θ) ln((n - θ)/(n - θ'))`.
    Binomial { n: f64 },
    /// `θ ln(θ(r + θ')/(θ'(r + θ))) + r ln((r + θ')/(r + θ))`.
    NegativeBinomial { r: f64 },
}

/// A one-parameter exponential family in mean parametrization.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Family {
    kind: FamilyKind,
}

/// Nuisance constants accepted by [`Family::by_name`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NuisanceParams {
    pub sigma: Option<f64>,
    pub shape: Option<f64>,
    pub k: Option<f64>,
    pub n: Option<u32>,
    pub x_m: Option<f64>,
    pub r: Option<f64>,
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")))
    }
}

impl Family {
    pub fn new(kind: FamilyKind) -> Result<Self> {
        match kind {
            FamilyKind::Gaussian { sigma } | FamilyKind::LogNormal { sigma } => {
                positive("sigma", sigma)?;
            }
            FamilyKind::Gamma { shape } => {
                positive("shape", shape)?;
            }
            FamilyKind::Weibull { k } | FamilyKind::ScaledChiSquared { k } => {
                positive("k", k)?;
            }
            FamilyKind::Pareto { x_m } => {
                positive("x_m", x_m)?;
            }
            FamilyKind::NegativeBinomial { r } => {
                positive("r", r)?;
            }
            FamilyKind::Erlang { n } | FamilyKind::Binomial { n } => {
                if n == 0 {
                    return Err(Error::InvalidArgument("n must be at least 1".into()));
                }
            }
            FamilyKind::NormalVariance
            | FamilyKind::Exponential
            | FamilyKind::Rayleigh
            | FamilyKind::Poisson
            | FamilyKind::Bernoulli => {}
        }
        Ok(Family { kind })
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        Self::new(FamilyKind::Gaussian { sigma })
    }

    pub fn exponential() -> Self {
        Family {
            kind: FamilyKind::Exponential,
        }
    }

    pub fn poisson() -> Self {
        Family {
            kind: FamilyKind::Poisson,
        }
    }

    pub fn bernoulli() -> Self {
        Family {
            kind: FamilyKind::Bernoulli,
        }
    }

    /// Look a family up by its catalog name, taking nuisance constants from
    /// `params` (defaults: `sigma = 1`, `shape = 1`, `k = 1`, `n = 1`,
    /// `x_m = 1`, `r = 1`).
    pub fn by_name(name: &str, params: &NuisanceParams) -> Result<Self> {
        let sigma = params.sigma.unwrap_or(1.0);
        let kind = match name {
            "gaussian" => FamilyKind::Gaussian { sigma },
            "normal_variance" => FamilyKind::NormalVariance,
            "lognormal" => FamilyKind::LogNormal { sigma },
            "gamma" => FamilyKind::Gamma {
                shape: params.shape.unwrap_or(1.0),
            },
            "exponential" => FamilyKind::Exponential,
            "erlang" => FamilyKind::Erlang {
                n: params.n.unwrap_or(1),
            },
            "rayleigh" => FamilyKind::Rayleigh,
            "weibull" => FamilyKind::Weibull {
                k: params.k.unwrap_or(1.0),
            },
            "scaled_chi_squared" => FamilyKind::ScaledChiSquared {
                k: params.k.unwrap_or(1.0),
            },
            "pareto" => FamilyKind::Pareto {
                x_m: params.x_m.unwrap_or(1.0),
            },
            "poisson" => FamilyKind::Poisson,
            "binomial" => FamilyKind::Binomial {
                n: params.n.unwrap_or(1),
            },
            "negative_binomial" => FamilyKind::NegativeBinomial {
                r: params.r.unwrap_or(1.0),
            },
            "bernoulli" => FamilyKind::Bernoulli,
            other => {
                return Err(Error::InvalidArgument(format!("unknown family '{other}'")));
            }
        };
        Self::new(kind)
    }

    /// Catalog names accepted by [`Family::by_name`].
    pub const NAMES: [&'static str; 14] = [
        "gaussian",
        "normal_variance",
        "lognormal",
        "gamma",
        "exponential",
        "erlang",
        "rayleigh",
        "weibull",
        "scaled_chi_squared",
        "pareto",
        "poisson",
        "binomial",
        "negative_binomial",
        "bernoulli",
    ];

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            FamilyKind::Gaussian { .. } => "gaussian",
            FamilyKind::NormalVariance => "normal_variance",
            FamilyKind::LogNormal { .. } => "lognormal",
            FamilyKind::Gamma { .. } => "gamma",
            FamilyKind::Exponential => "exponential",
            FamilyKind::Erlang { .. } => "erlang",
            FamilyKind::Rayleigh => "rayleigh",
            FamilyKind::Weibull { .. } => "weibull",
            FamilyKind::ScaledChiSquared { .. } => "scaled_chi_squared",
            FamilyKind::Pareto { .. } => "pareto",
            FamilyKind::Poisson => "poisson",
            FamilyKind::Binomial { .. } => "binomial",
            FamilyKind::NegativeBinomial { .. } => "negative_binomial",
            FamilyKind::Bernoulli => "bernoulli",
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(
            self.kind,
            FamilyKind::Poisson
                | FamilyKind::Binomial { .. }
                | FamilyKind::NegativeBinomial { .. }
                | FamilyKind::Bernoulli
        )
    }

    /// Parameter set of the mean parameter, the image of the tabulated domain
    /// under the mean map.
    pub fn domain(&self) -> Interval {
        match self.kind {
            FamilyKind::Gaussian { .. } => Interval::REAL_LINE,
            FamilyKind::Pareto { .. } => Interval::open(0.0, 1.0),
            FamilyKind::Binomial { n } => Interval::left_open(0.0, f64::from(n)),
            FamilyKind::Bernoulli => Interval::left_open(0.0, 1.0),
            _ => Interval::open(0.0, f64::INFINITY),
        }
    }

    /// Named nuisance constants, for catalog listings.
    pub fn nuisance(&self) -> Vec<(&'static str, f64)> {
        let mut out = Vec::new();
        match self.kind {
            FamilyKind::Gaussian { sigma } | FamilyKind::LogNormal { sigma } => {
                out.push(("sigma", sigma))
            }
            FamilyKind::Gamma { shape } => out.push(("shape", shape)),
            FamilyKind::Erlang { n } | FamilyKind::Binomial { n } => out.push(("n", f64::from(n))),
            FamilyKind::Weibull { k } | FamilyKind::ScaledChiSquared { k } => out.push(("k", k)),
            FamilyKind::Pareto { x_m } => out.push(("x_m", x_m)),
            FamilyKind::NegativeBinomial { r } => out.push(("r", r)),
            _ => {}
        }
        out
    }

    /// Human-readable `(T, C, B)` in mean parametrization.
    pub fn describe_tcb(&self) -> (&'static str, &'static str, &'static str) {
        match self.kind {
            FamilyKind::Gaussian { .. } => ("y", "θ/σ²", "θ²/(2σ²)"),
            FamilyKind::LogNormal { .. } => ("ln y", "θ/σ²", "θ²/(2σ²)"),
            FamilyKind::NormalVariance => ("y²", "-1/(2θ)", "ln(θ)/2"),
            FamilyKind::Gamma { .. } => ("y", "-p/θ", "p ln θ"),
            FamilyKind::Exponential => ("y", "-1/θ", "ln θ"),
            FamilyKind::Erlang { .. } => ("y", "-n/θ", "n ln θ"),
            FamilyKind::Rayleigh => ("y²", "-1/θ", "ln θ"),
            FamilyKind::Weibull { .. } => ("y^k", "-1/θ", "ln θ"),
            FamilyKind::ScaledChiSquared { .. } => ("y", "-k/(2θ)", "(k/2) ln θ"),
            FamilyKind::Pareto { .. } => ("ln(y/x_m)", "-1/θ", "ln θ"),
            FamilyKind::Poisson => ("k", "ln θ", "θ"),
            FamilyKind::Binomial { .. } => ("k", "ln(θ/(n-θ))", "-n ln(1-θ/n)"),
            FamilyKind::NegativeBinomial { .. } => ("k", "ln(θ/(r+θ))", "r ln((r+θ)/r)"),
            FamilyKind::Bernoulli => ("k", "ln(θ/(1-θ))", "-ln(1-θ)"),
        }
    }

    pub(crate) fn shape(&self) -> KlShape {
        match self.kind {
            FamilyKind::Gaussian { sigma } | FamilyKind::LogNormal { sigma } => KlShape::Quadratic {
                variance: sigma * sigma,
            },
            FamilyKind::NormalVariance => KlShape::GammaLike { p: 0.5 },
            FamilyKind::Gamma { shape } => KlShape::GammaLike { p: shape },
            FamilyKind::Exponential
            | FamilyKind::Rayleigh
            | FamilyKind::Weibull { .. }
            | FamilyKind::Pareto { .. } => KlShape::GammaLike { p: 1.0 },
            FamilyKind::Erlang { n } => KlShape::GammaLike { p: f64::from(n) },
            FamilyKind::ScaledChiSquared { k } => KlShape::GammaLike { p: 0.5 * k },
            FamilyKind::Poisson => KlShape::Poisson,
            FamilyKind::Binomial { n } => KlShape::Binomial { n: f64::from(n) },
            FamilyKind::Bernoulli => KlShape::Binomial { n: 1.0 },
            FamilyKind::NegativeBinomial { r } => KlShape::NegativeBinomial { r },
        }
    }

    fn check_domain(&self, theta: f64) -> Result<()> {
        if self.domain().contains(theta) {
            Ok(())
        } else {
            Err(Error::Domain {
                family: self.name(),
                value: theta,
                domain: self.domain().describe(),
            })
        }
    }

    fn check_interior(&self, theta: f64) -> Result<()> {
        self.check_domain(theta)?;
        if self.domain().contains_interior(theta) {
            Ok(())
        } else {
            Err(Error::DivergentBoundary {
                family: self.name(),
                value: theta,
            })
        }
    }

    /// `C(θ)`.
    pub fn c_fn(&self, theta: f64) -> f64 {
        match self.shape() {
            KlShape::Quadratic { variance } => theta / variance,
            KlShape::GammaLike { p } => -p / theta,
            KlShape::Poisson => ln(theta),
            KlShape::Binomial { n } => ln(theta / (n - theta)),
            KlShape::NegativeBinomial { r } => ln(theta / (r + theta)),
        }
    }

    /// `B(θ)`.
    pub fn b_fn(&self, theta: f64) -> f64 {
        match self.shape() {
            KlShape::Quadratic { variance } => theta * theta / (2.0 * variance),
            KlShape::GammaLike { p } => p * ln(theta),
            KlShape::Poisson => theta,
            KlShape::Binomial { n } => -n * ln(1.0 - theta / n),
            KlShape::NegativeBinomial { r } => r * ln((r + theta) / r),
        }
    }

    /// Kullback-Leibler divergence `KL(P_θ, P_θ')`.
    ///
    /// `theta` must lie in the parameter set; `theta_prime` must be interior,
    /// otherwise the divergence may be infinite and an error is returned.
    pub fn kl(&self, theta: f64, theta_prime: f64) -> Result<f64> {
        self.check_domain(theta)?;
        self.check_interior(theta_prime)?;
        Ok(self.kl_unchecked(theta, theta_prime))
    }

    /// Closed-form divergence without domain checks.
    #[inline]
    pub fn kl_unchecked(&self, theta: f64, theta_prime: f64) -> f64 {
        let v = match self.shape() {
            KlShape::Quadratic { variance } => {
                let d = theta - theta_prime;
                d * d / (2.0 * variance)
            }
            KlShape::GammaLike { p } => {
                let r = theta / theta_prime;
                p * (r - 1.0 - ln(r))
            }
            KlShape::Poisson => xlogxy(theta, theta_prime) - theta + theta_prime,
            KlShape::Binomial { n } => {
                xlogxy(theta, theta_prime) + xlogxy(n - theta, n - theta_prime)
            }
            KlShape::NegativeBinomial { r } => {
                xlogxy(theta, theta_prime) + theta * ln((r + theta_prime) / (r + theta))
                    + r * ln((r + theta_prime) / (r + theta))
            }
        };
        // Rounding can push an exact zero slightly negative.
        if v < 0.0 {
            0.0
        } else {
            v
        }
    }

    /// Move `theta` at least `delta` away from every finite endpoint at which
    /// the divergence is infinite.
    #[inline]
    pub fn shift_interior(&self, theta: f64, delta: f64) -> f64 {
        match self.shape() {
            KlShape::Quadratic { .. } => theta,
            KlShape::GammaLike { .. } | KlShape::Poisson | KlShape::NegativeBinomial { .. } => {
                if theta < delta {
                    delta
                } else {
                    theta
                }
            }
            KlShape::Binomial { n } => {
                if theta < delta {
                    delta
                } else if theta > n - delta {
                    n - delta
                } else {
                    theta
                }
            }
        }
    }

    /// Divergence after shifting both arguments into the interior.
    #[inline]
    pub fn kl_shifted(&self, theta: f64, theta_prime: f64, delta: f64) -> f64 {
        self.kl_unchecked(
            self.shift_interior(theta, delta),
            self.shift_interior(theta_prime, delta),
        )
    }

    /// Fisher information `I(θ) = C'(θ)`.
    pub fn fisher(&self, theta: f64) -> Result<f64> {
        self.check_interior(theta)?;
        Ok(self.fisher_unchecked(theta))
    }

    pub(crate) fn fisher_unchecked(&self, theta: f64) -> f64 {
        match self.shape() {
            KlShape::Quadratic { variance } => 1.0 / variance,
            KlShape::GammaLike { p } => p / (theta * theta),
            KlShape::Poisson => 1.0 / theta,
            KlShape::Binomial { n } => n / (theta * (n - theta)),
            KlShape::NegativeBinomial { r } => r / (theta * (r + theta)),
        }
    }

    /// `ln p(y, a) - ln p(y, b)` for an observation with statistic `t = T(y)`.
    pub fn log_likelihood_ratio(&self, t: f64, a: f64, b: f64) -> f64 {
        match self.shape() {
            KlShape::Quadratic { variance } => (t * (a - b) - 0.5 * (a * a - b * b)) / variance,
            KlShape::GammaLike { p } => p * (t * (1.0 / b - 1.0 / a) - ln(a / b)),
            KlShape::Poisson => mul_log(t, a / b) - (a - b),
            KlShape::Binomial { n } => mul_log(t, a / b) + mul_log(n - t, (n - a) / (n - b)),
            KlShape::NegativeBinomial { r } => {
                mul_log(t, a * (r + b) / (b * (r + a))) + r * ln((r + b) / (r + a))
            }
        }
    }

    /// The sufficient statistic `T(y)`.
    pub fn apply_statistic(&self, y: f64) -> Result<f64> {
        let bad = || Error::Support {
            family: self.name(),
            value: y,
        };
        if !y.is_finite() {
            return Err(bad());
        }
        let is_count = y >= 0.0 && y == libm::floor(y);
        match self.kind {
            FamilyKind::Gaussian { .. } => Ok(y),
            FamilyKind::NormalVariance => Ok(y * y),
            FamilyKind::LogNormal { .. } => {
                if y > 0.0 {
                    Ok(ln(y))
                } else {
                    Err(bad())
                }
            }
            FamilyKind::Gamma { .. }
            | FamilyKind::Exponential
            | FamilyKind::Erlang { .. }
            | FamilyKind::ScaledChiSquared { .. } => {
                if y >= 0.0 {
                    Ok(y)
                } else {
                    Err(bad())
                }
            }
            FamilyKind::Rayleigh => {
                if y >= 0.0 {
                    Ok(y * y)
                } else {
                    Err(bad())
                }
            }
            FamilyKind::Weibull { k } => {
                if y >= 0.0 {
                    Ok(powf(y, k))
                } else {
                    Err(bad())
                }
            }
            FamilyKind::Pareto { x_m } => {
                if y >= x_m {
                    Ok(ln(y / x_m))
                } else {
                    Err(bad())
                }
            }
            FamilyKind::Poisson | FamilyKind::NegativeBinomial { .. } => {
                if is_count {
                    Ok(y)
                } else {
                    Err(bad())
                }
            }
            FamilyKind::Binomial { n } => {
                if is_count && y <= f64::from(n) {
                    Ok(y)
                } else {
                    Err(bad())
                }
            }
            FamilyKind::Bernoulli => {
                if y == 0.0 || y == 1.0 {
                    Ok(y)
                } else {
                    Err(bad())
                }
            }
        }
    }

    /// Apply [`Family::apply_statistic`] to every observation.
    pub fn statistics(&self, ys: &[f64]) -> Result<Vec<f64>> {
        ys.iter().map(|&y| self.apply_statistic(y)).collect()
    }

    /// Draw `count` i.i.d. observations from `P_θ`.
    pub fn sample<R: Rng + ?Sized>(&self, theta: f64, count: usize, rng: &mut R) -> Result<Vec<f64>> {
        self.check_domain(theta)?;
        if count == 0 {
            return Err(Error::InvalidArgument("sample count must be at least 1".into()));
        }
        let mut out = Vec::with_capacity(count);
        self.sample_into(theta, count, rng, &mut out)?;
        Ok(out)
    }

    /// Append `count` draws to `out`.
    ///
    /// Continuous families transform standardized draws (standard normal,
    /// unit exponential or unit-scale gamma), so two calls with equal
    /// generator state but different `θ` are coupled by a shift (Gaussian,
    /// log-normal) or a scale (gamma-like families).
    pub fn sample_into<R: Rng + ?Sized>(
        &self,
        theta: f64,
        count: usize,
        rng: &mut R,
        out: &mut Vec<f64>,
    ) -> Result<()> {
        self.check_domain(theta)?;
        let normal = |rng: &mut R| -> f64 { rng.sample(StandardNormal) };
        let exp1 = |rng: &mut R| -> f64 { rng.sample(Exp1) };
        let unit_gamma = |shape: f64| {
            Gamma::new(shape, 1.0).map_err(|_| Error::InvalidArgument("gamma shape".into()))
        };
        match self.kind {
            FamilyKind::Gaussian { sigma } => {
                out.extend((0..count).map(|_| theta + sigma * normal(rng)))
            }
            FamilyKind::LogNormal { sigma } => {
                out.extend((0..count).map(|_| exp(theta + sigma * normal(rng))))
            }
            FamilyKind::NormalVariance => {
                let s = sqrt(theta);
                out.extend((0..count).map(|_| s * normal(rng)))
            }
            FamilyKind::Exponential => out.extend((0..count).map(|_| theta * exp1(rng))),
            FamilyKind::Rayleigh => out.extend((0..count).map(|_| sqrt(theta * exp1(rng)))),
            FamilyKind::Weibull { k } => {
                out.extend((0..count).map(|_| powf(theta * exp1(rng), 1.0 / k)))
            }
            FamilyKind::Pareto { x_m } => {
                out.extend((0..count).map(|_| x_m * exp(theta * exp1(rng))))
            }
            FamilyKind::Gamma { .. } | FamilyKind::Erlang { .. } | FamilyKind::ScaledChiSquared { .. } => {
                let p = match self.shape() {
                    KlShape::GammaLike { p } => p,
                    _ => unreachable!(),
                };
                let g = unit_gamma(p)?;
                let scale = theta / p;
                out.extend((0..count).map(|_| scale * g.sample(rng)))
            }
            FamilyKind::Poisson => {
                let d = Poisson::new(theta).map_err(|_| Error::InvalidArgument("poisson rate".into()))?;
                out.extend((0..count).map(|_| d.sample(rng)))
            }
            FamilyKind::Binomial { n } => {
                let d = Binomial::new(u64::from(n), theta / f64::from(n))
                    .map_err(|_| Error::InvalidArgument("binomial probability".into()))?;
                out.extend((0..count).map(|_| d.sample(rng) as f64))
            }
            FamilyKind::Bernoulli => out.extend((0..count).map(|_| {
                if rng.random::<f64>() < theta {
                    1.0
                } else {
                    0.0
                }
            })),
            FamilyKind::NegativeBinomial { r } => {
                // Gamma-Poisson mixture with mixing mean θ.
                let g = unit_gamma(r)?;
                let scale = theta / r;
                for _ in 0..count {
                    let rate = scale * g.sample(rng);
                    let draw = if rate > 0.0 {
                        Poisson::new(rate)
                            .map_err(|_| Error::InvalidArgument("poisson rate".into()))?
                            .sample(rng)
                    } else {
                        0.0
                    };
                    out.push(draw);
                }
            }
        }
        Ok(())
    }

    /// Build `Θ_κ = [lower, upper]` and the smallest `κ` with
    /// `I(θ₁)/I(θ₂) ≤ κ²` on it.
    pub fn build_kappa_set(&self, lower: f64, upper: f64) -> Result<KappaSet> {
        if !(lower < upper) {
            return Err(Error::InvalidArgument(format!(
                "kappa set needs lower < upper, got [{lower}, {upper}]"
            )));
        }
        for v in [lower, upper] {
            self.check_domain(v)?;
            if !v.is_finite() {
                return Err(Error::InvalidArgument("kappa set must be bounded".into()));
            }
            let info = self.fisher_unchecked(v);
            if !info.is_finite() || !self.domain().contains_interior(v) {
                return Err(Error::UnboundedInformation {
                    family: self.name(),
                    value: v,
                });
            }
        }
        let mut candidates = alloc::vec![lower, upper];
        if let KlShape::Binomial { n } = self.shape() {
            let mid = 0.5 * n;
            if mid > lower && mid < upper {
                candidates.push(mid);
            }
        }
        let infos: Vec<f64> = candidates.iter().map(|&v| self.fisher_unchecked(v)).collect();
        let max = infos.iter().cloned().fold(f64::MIN, f64::max);
        let min = infos.iter().cloned().fold(f64::MAX, f64::min);
        Ok(KappaSet {
            kappa: sqrt(max / min),
            lower,
            upper,
        })
    }
}

#[inline]
fn mul_log(t: f64, ratio: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t * ln(ratio)
    }
}

/// A compact set `Θ_κ = [lower, upper]` on which the Fisher information varies
/// by at most the factor `κ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KappaSet {
    pub kappa: f64,
    pub lower: f64,
    pub upper: f64,
}

impl KappaSet {
    /// Clamp onto the set: the closest point of an interval.
    #[inline]
    pub fn project(&self, theta: f64) -> f64 {
        theta.clamp(self.lower, self.upper)
    }

    pub fn contains(&self, theta: f64) -> bool {
        theta >= self.lower && theta <= self.upper
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kl_examples() {
        let g = Family::gaussian(1.0).unwrap();
        assert_eq!(g.kl(2.0, 0.0).unwrap(), 2.0);
        assert_eq!(g.kl(0.3, 0.3).unwrap(), 0.0);
        let p = Family::poisson();
        assert_relative_eq!(p.kl(2.0, 1.0).unwrap(), 2.0 * core::f64::consts::LN_2 - 1.0, epsilon = 1e-15);
        let e = Family::exponential();
        assert_relative_eq!(e.kl(2.0, 1.0).unwrap(), 1.0 - core::f64::consts::LN_2, epsilon = 1e-15);
        assert_eq!(e.kl(3.0, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn kl_boundary_errors() {
        let p = Family::poisson();
        assert!(matches!(p.kl(1.0, 0.0), Err(Error::Domain { .. })));
        let b = Family::bernoulli();
        assert!(matches!(b.kl(0.5, 1.0), Err(Error::DivergentBoundary { .. })));
        assert!(matches!(b.kl(0.5, 0.0), Err(Error::Domain { .. })));
        // first argument may sit on a closed end
        assert_relative_eq!(b.kl(1.0, 0.5).unwrap(), core::f64::consts::LN_2, epsilon = 1e-15);
        assert!(matches!(Family::exponential().kl(-1.0, 1.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn fisher_examples() {
        assert_eq!(Family::gaussian(1.0).unwrap().fisher(5.0).unwrap(), 1.0);
        assert_eq!(Family::poisson().fisher(4.0).unwrap(), 0.25);
        assert_eq!(Family::exponential().fisher(2.0).unwrap(), 0.25);
        assert!(Family::poisson().fisher(0.0).is_err());
    }

    #[test]
    fn statistic_examples() {
        let g = Family::gaussian(1.0).unwrap();
        assert_eq!(g.apply_statistic(1.7).unwrap(), 1.7);
        let r = Family::new(FamilyKind::Rayleigh).unwrap();
        assert_eq!(r.apply_statistic(3.0).unwrap(), 9.0);
        let pa = Family::new(FamilyKind::Pareto { x_m: 1.0 }).unwrap();
        assert_eq!(pa.apply_statistic(1.0).unwrap(), 0.0);
        assert!(pa.apply_statistic(0.5).is_err());
        let ln = Family::new(FamilyKind::LogNormal { sigma: 1.0 }).unwrap();
        assert!(ln.apply_statistic(0.0).is_err());
        assert!(Family::poisson().apply_statistic(1.5).is_err());
    }

    #[test]
    fn kappa_examples() {
        let g = Family::gaussian(1.0).unwrap().build_kappa_set(-5.0, 5.0).unwrap();
        assert_eq!(g.kappa, 1.0);
        let e = Family::exponential().build_kappa_set(1.0, 2.0).unwrap();
        assert_relative_eq!(e.kappa, 2.0, epsilon = 1e-15);
        let p = Family::poisson().build_kappa_set(1.0, 4.0).unwrap();
        assert_relative_eq!(p.kappa, 2.0, epsilon = 1e-15);
        assert!(matches!(
            Family::bernoulli().build_kappa_set(0.5, 1.0),
            Err(Error::UnboundedInformation { .. })
        ));
        assert!(Family::poisson().build_kappa_set(2.0, 1.0).is_err());
        // binomial information is smallest in the middle
        let b = Family::new(FamilyKind::Binomial { n: 10 }).unwrap();
        let ks = b.build_kappa_set(2.0, 8.0).unwrap();
        let expect = sqrt(b.fisher(2.0).unwrap() / b.fisher(5.0).unwrap());
        assert_relative_eq!(ks.kappa, expect, epsilon = 1e-14);
    }

    #[test]
    fn bernoulli_degenerate_sampling() {
        let mut rng = crate::rng::stream(1, "t", 0);
        let draws = Family::bernoulli().sample(1.0, 1000, &mut rng).unwrap();
        assert!(draws.iter().all(|&d| d == 1.0));
    }

    #[test]
    fn by_name_round_trip() {
        for name in Family::NAMES {
            let f = Family::by_name(name, &NuisanceParams::default()).unwrap();
            assert_eq!(f.name(), name);
        }
        assert!(Family::by_name("cauchy", &NuisanceParams::default()).is_err());
        assert!(Family::gaussian(0.0).is_err());
    }

    #[test]
    fn log_likelihood_ratio_zero_counts() {
        // all-zero neighbourhood: the estimate sits on the boundary
        let p = Family::poisson();
        assert_eq!(p.log_likelihood_ratio(0.0, 0.0, 1.0), 1.0);
    }
}
