//! Families in their tabulated parametrization `ϑ` with mean map `t(ϑ)`.

use crate::families::{Family, FamilyKind, Interval};
use crate::math::{ln, powf};
use crate::{Error, Result};

/// A family written as `p(y) exp[T(y) C_t(ϑ) - B_t(ϑ)]` with
/// `E_ϑ T(Y) = t(ϑ) = B_t'(ϑ) / C_t'(ϑ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParametrizedFamily {
    mean: Family,
}

/// Result of [`ParametrizedFamily::reparametrize`]: the mean-parametrized
/// family together with the affine map `θ = α ϑ + β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reparametrized {
    pub family: Family,
    pub alpha: f64,
    pub beta: f64,
}

impl Reparametrized {
    pub fn to_mean(&self, vartheta: f64) -> f64 {
        self.alpha * vartheta + self.beta
    }

    pub fn from_mean(&self, theta: f64) -> f64 {
        (theta - self.beta) / self.alpha
    }
}

impl ParametrizedFamily {
    pub fn new(kind: FamilyKind) -> Result<Self> {
        Ok(ParametrizedFamily {
            mean: Family::new(kind)?,
        })
    }

    pub fn name(&self) -> &'static str {
        self.mean.name()
    }

    pub fn kind(&self) -> FamilyKind {
        self.mean.kind()
    }

    /// Tabulated parameter set of `ϑ`.
    pub fn domain(&self) -> Interval {
        match self.kind() {
            FamilyKind::Gaussian { .. } => Interval::REAL_LINE,
            FamilyKind::Pareto { .. } => Interval::open(1.0, f64::INFINITY),
            FamilyKind::Binomial { .. } | FamilyKind::Bernoulli => Interval::left_open(0.0, 1.0),
            FamilyKind::NegativeBinomial { .. } => Interval::open(0.0, 1.0),
            _ => Interval::open(0.0, f64::INFINITY),
        }
    }

    /// The mean map `t(ϑ)`.
    pub fn t(&self, v: f64) -> f64 {
        match self.kind() {
            FamilyKind::Gaussian { .. }
            | FamilyKind::NormalVariance
            | FamilyKind::LogNormal { .. }
            | FamilyKind::Exponential
            | FamilyKind::ScaledChiSquared { .. }
            | FamilyKind::Poisson
            | FamilyKind::Bernoulli => v,
            FamilyKind::Gamma { shape } => shape * v,
            FamilyKind::Erlang { n } | FamilyKind::Binomial { n } => f64::from(n) * v,
            FamilyKind::Rayleigh => 2.0 * v * v,
            FamilyKind::Weibull { k } => powf(v, k),
            FamilyKind::Pareto { .. } => 1.0 / v,
            FamilyKind::NegativeBinomial { r } => r * v / (1.0 - v),
        }
    }

    /// `C_t(ϑ)`.
    pub fn c_t(&self, v: f64) -> f64 {
        match self.kind() {
            FamilyKind::Gaussian { sigma } | FamilyKind::LogNormal { sigma } => v / (sigma * sigma),
            FamilyKind::NormalVariance => -0.5 / v,
            FamilyKind::Gamma { .. } | FamilyKind::Exponential | FamilyKind::Erlang { .. } => -1.0 / v,
            FamilyKind::Rayleigh => -0.5 / (v * v),
            FamilyKind::Weibull { k } => -1.0 / powf(v, k),
            FamilyKind::ScaledChiSquared { k } => -0.5 * k / v,
            FamilyKind::Pareto { .. } => -v,
            FamilyKind::Poisson | FamilyKind::NegativeBinomial { .. } => ln(v),
            FamilyKind::Binomial { .. } | FamilyKind::Bernoulli => ln(v / (1.0 - v)),
        }
    }

    /// `B_t(ϑ)`.
    pub fn b_t(&self, v: f64) -> f64 {
        match self.kind() {
            FamilyKind::Gaussian { sigma } | FamilyKind::LogNormal { sigma } => {
                v * v / (2.0 * sigma * sigma)
            }
            FamilyKind::NormalVariance => 0.5 * ln(v),
            FamilyKind::Gamma { shape } => shape * ln(v),
            FamilyKind::Exponential => ln(v),
            FamilyKind::Erlang { n } => f64::from(n) * ln(v),
            FamilyKind::Rayleigh => 2.0 * ln(v),
            FamilyKind::Weibull { k } => k * ln(v),
            FamilyKind::ScaledChiSquared { k } => 0.5 * k * ln(v),
            FamilyKind::Pareto { .. } => -ln(v),
            FamilyKind::Poisson => v,
            FamilyKind::Binomial { n } => -f64::from(n) * ln(1.0 - v),
            FamilyKind::Bernoulli => -ln(1.0 - v),
            FamilyKind::NegativeBinomial { r } => -r * ln(1.0 - v),
        }
    }

    /// `KL(ϑ₁, ϑ₂) = t(ϑ₁)[C_t(ϑ₁) - C_t(ϑ₂)] - [B_t(ϑ₁) - B_t(ϑ₂)]`.
    pub fn kl(&self, v1: f64, v2: f64) -> Result<f64> {
        let dom = self.domain();
        for v in [v1, v2] {
            if !dom.contains(v) {
                return Err(Error::Domain {
                    family: self.name(),
                    value: v,
                    domain: dom.describe(),
                });
            }
        }
        if !dom.contains_interior(v2) {
            return Err(Error::DivergentBoundary {
                family: self.name(),
                value: v2,
            });
        }
        if !dom.contains_interior(v1) {
            // C_t and B_t diverge at the closed end; the mean form is finite there
            return self.mean.kl(self.t(v1), self.t(v2));
        }
        let lead = self.t(v1) * (self.c_t(v1) - self.c_t(v2));
        let tail = self.b_t(v1) - self.b_t(v2);
        Ok((lead - tail).max(0.0))
    }

    /// Convert to mean parametrization. Only affine mean maps keep the
    /// divergence and the estimator's theory intact, so a nonlinear `t` is
    /// rejected.
    pub fn reparametrize(&self) -> Result<Reparametrized> {
        let (a, b, c) = match self.kind() {
            FamilyKind::Gaussian { .. } => (-1.0, 0.5, 2.0),
            FamilyKind::Pareto { .. } => (1.5, 2.0, 4.0),
            FamilyKind::Binomial { .. } | FamilyKind::Bernoulli | FamilyKind::NegativeBinomial { .. } => {
                (0.25, 0.5, 0.75)
            }
            _ => (0.5, 1.0, 2.0),
        };
        let (ta, tb, tc) = (self.t(a), self.t(b), self.t(c));
        let alpha = (tb - ta) / (b - a);
        let beta = ta - alpha * a;
        let predicted = alpha * c + beta;
        let scale = tc.abs().max(1.0);
        if alpha == 0.0 || (predicted - tc).abs() > 1e-12 * scale {
            return Err(Error::NonlinearMeanMap(self.name()));
        }
        Ok(Reparametrized {
            family: self.mean,
            alpha,
            beta,
        })
    }
}
