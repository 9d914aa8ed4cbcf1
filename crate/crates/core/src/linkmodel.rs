//! Analytical success probability of one hop.
//!
//! For a tier with `n` co-channel interferers the success event
//! `SINR >= theta` is rewritten as `Z <= 1/theta` with
//!
//! ```text
//! Z = 1 / (rho h) + sum_m h_m d_m^-alpha / (h d^-alpha)
//! ```
//!
//! where all fades are `Exp(lambda)` and all distances follow the disk law.
//! The Laplace transform of `Z` is assembled here and inverted with
//! [`crate::inversion`].
//!
//! The expectation over each interferer's fade is done in closed form,
//! `E[exp(-c h_m)] = lambda / (lambda + c)`. What remains depends on the
//! distances only through `(d / d_m)^alpha`, so both interference modes are
//! evaluated with fixed rules over the distance law (see
//! [`crate::geometry::RatioRule`] and [`crate::geometry::DistanceRule`]) and
//! are independent of the region radius. The desired fade `h` is integrated
//! adaptively.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{DiskRegion, DistanceRule, RatioRule};
use crate::inversion::{
    euler_params_for_digits, invert_cdf, CdfInversion, InversionError, TransformHandle,
};
use crate::quadrature::{self, QuadratureError, Tolerance};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinkError {
    #[error("invalid link tier: {0}")]
    InvalidTier(String),
    #[error("threshold must be positive and finite, got {0}")]
    InvalidThreshold(f64),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Inversion(#[from] InversionError),
}

/// How the desired-link distance enters the interference average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterferenceMode {
    /// Every interferer term averages over its own copy of the desired
    /// distance, so the per-interferer factor is raised to the `n`-th power
    /// after averaging over both distances.
    #[default]
    PaperLiteral,
    /// One desired distance shared by all interferer terms; the power is
    /// taken before averaging over it.
    #[serde(alias = "shared")]
    SharedDesiredDistance,
}

impl InterferenceMode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::PaperLiteral => "paper-literal",
            Self::SharedDesiredDistance => "shared-desired-distance",
        }
    }
}

impl fmt::Display for InterferenceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InterferenceMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper-literal" => Ok(Self::PaperLiteral),
            "shared" | "shared-desired-distance" => Ok(Self::SharedDesiredDistance),
            other => Err(format!(
                "unknown interference mode `{other}` (expected paper-literal or shared-desired-distance)"
            )),
        }
    }
}

/// Statistical model of one hop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkTier {
    pub region: DiskRegion,
    /// Transmitters sharing the channel, the desired one included.
    pub total_nodes: u32,
    /// Received signal-to-noise ratio (linear).
    pub snr: f64,
    /// Rate of the exponential power fading.
    pub fading_rate: f64,
    pub path_loss_exp: f64,
    pub interference_mode: InterferenceMode,
}

impl LinkTier {
    pub fn new(
        region: DiskRegion,
        total_nodes: u32,
        snr: f64,
        fading_rate: f64,
        path_loss_exp: f64,
        interference_mode: InterferenceMode,
    ) -> Result<Self, LinkError> {
        let tier = Self {
            region,
            total_nodes,
            snr,
            fading_rate,
            path_loss_exp,
            interference_mode,
        };
        tier.validate()?;
        Ok(tier)
    }

    pub fn validate(&self) -> Result<(), LinkError> {
        let bad = |msg: String| Err(LinkError::InvalidTier(msg));
        if self.total_nodes == 0 {
            return bad("total_nodes must be at least 1".into());
        }
        if !(self.snr.is_finite() && self.snr > 0.0) {
            return bad(format!("snr must be positive, got {}", self.snr));
        }
        if !(self.fading_rate.is_finite() && self.fading_rate > 0.0) {
            return bad(format!(
                "fading_rate must be positive, got {}",
                self.fading_rate
            ));
        }
        if !(self.path_loss_exp.is_finite() && self.path_loss_exp > 2.0) {
            return bad(format!(
                "path_loss_exp must exceed 2, got {}",
                self.path_loss_exp
            ));
        }
        Ok(())
    }

    pub fn interferers(&self) -> u32 {
        self.total_nodes - 1
    }

    pub fn with_mode(mut self, mode: InterferenceMode) -> Self {
        self.interference_mode = mode;
        self
    }
}

/// Settings of the fixed distance rules; tuned so the rule error stays well
/// below the adaptive tolerance for `alpha` up to about 8.
const RATIO_LOG_SPAN: f64 = 14.0;
const DISTANCE_LOG_SPAN: f64 = 12.0;

/// Tolerance of the adaptive integral over the desired fade.
pub const FADE_TOLERANCE: Tolerance = Tolerance::new(1e-12, 1e-9);

/// `w X / (1 + w X)` with `X = exp(alpha y)`, written so that `X` is never
/// formed: `decay = exp(-alpha |y|)` and `upper` tells the sign of `y`.
#[inline]
fn interference_loss(w: Complex64, decay: f64, upper: bool) -> Complex64 {
    if upper {
        w / (w + decay)
    } else {
        let wd = w * decay;
        wd / (1.0 + wd)
    }
}

#[derive(Debug, Clone)]
struct RatioKernel {
    decay: Vec<f64>,
    upper: Vec<bool>,
    weights: Vec<f64>,
}

impl RatioKernel {
    fn new(alpha: f64) -> Result<Self, QuadratureError> {
        let rule = RatioRule::new(RATIO_LOG_SPAN, (1.0 / alpha).min(0.25))?;
        // Renormalise so the factor is exactly 1 at s = 0.
        let mass = rule.mass();
        Ok(Self {
            decay: rule
                .log_ratios
                .iter()
                .map(|y| (-alpha * y.abs()).exp())
                .collect(),
            upper: rule.log_ratios.iter().map(|&y| y >= 0.0).collect(),
            weights: rule.weights.iter().map(|w| w / mass).collect(),
        })
    }

    fn factor(&self, w: Complex64) -> Complex64 {
        let loss: Complex64 = self
            .decay
            .iter()
            .zip(&self.upper)
            .zip(&self.weights)
            .map(|((&d, &u), &p)| interference_loss(w, d, u) * p)
            .sum();
        1.0 - loss
    }
}

/// Kernel for the shared-distance mode: a product rule over
/// (desired distance, interferer distance).
#[derive(Debug, Clone)]
struct SharedKernel {
    desired_weights: Vec<f64>,
    interferer_weights: Vec<f64>,
    /// Row-major `desired x interferer`.
    decay: Vec<f64>,
    upper: Vec<bool>,
}

impl SharedKernel {
    fn new(alpha: f64) -> Self {
        let rule = DistanceRule::new(DISTANCE_LOG_SPAN, (2.0 / alpha).min(0.5));
        let mass = rule.mass();
        let weights: Vec<f64> = rule.weights.iter().map(|w| w / mass).collect();
        let logs: Vec<f64> = rule.nodes.iter().map(|x| x.ln()).collect();
        let k = logs.len();
        let mut decay = Vec::with_capacity(k * k);
        let mut upper = Vec::with_capacity(k * k);
        for &ld in &logs {
            for &lm in &logs {
                let y = ld - lm;
                decay.push((-alpha * y.abs()).exp());
                upper.push(y >= 0.0);
            }
        }
        Self {
            desired_weights: weights.clone(),
            interferer_weights: weights,
            decay,
            upper,
        }
    }

    /// Conditional per-interferer factor for every desired-distance node.
    fn conditional_factors(&self, w: Complex64) -> impl Iterator<Item = Complex64> + '_ {
        let k = self.interferer_weights.len();
        (0..self.desired_weights.len()).map(move |i| {
            let row = i * k..(i + 1) * k;
            let loss: Complex64 = self.decay[row.clone()]
                .iter()
                .zip(&self.upper[row])
                .zip(&self.interferer_weights)
                .map(|((&d, &u), &p)| interference_loss(w, d, u) * p)
                .sum();
            1.0 - loss
        })
    }

    fn powered_average(&self, w: Complex64, n: u32) -> Complex64 {
        self.conditional_factors(w)
            .zip(&self.desired_weights)
            .map(|(j, &p)| j.powu(n) * p)
            .sum()
    }
}

/// A [`LinkTier`] with its quadrature rules prepared. Immutable once built
/// and safe to share between threads.
#[derive(Debug, Clone)]
pub struct TierModel {
    tier: LinkTier,
    ratio: RatioKernel,
    shared: Option<SharedKernel>,
}

impl TierModel {
    pub fn new(tier: LinkTier) -> Result<Self, LinkError> {
        tier.validate()?;
        let alpha = tier.path_loss_exp;
        let shared = match tier.interference_mode {
            InterferenceMode::SharedDesiredDistance if tier.interferers() > 0 => {
                Some(SharedKernel::new(alpha))
            }
            _ => None,
        };
        Ok(Self {
            tier,
            ratio: RatioKernel::new(alpha)?,
            shared,
        })
    }

    pub fn tier(&self) -> &LinkTier {
        &self.tier
    }

    /// `E[exp(-s h_m d_m^-alpha / (h d^-alpha))]` over one interferer's fade
    /// and both distances, for a fixed desired fade `h_desired`.
    pub fn interference_factor(&self, s: Complex64, h_desired: f64) -> Complex64 {
        self.ratio.factor(s / (self.tier.fading_rate * h_desired))
    }

    /// Laplace transform `E[exp(-s Z)]`.
    pub fn laplace_z(&self, s: Complex64) -> Result<Complex64, QuadratureError> {
        let lambda = self.tier.fading_rate;
        let rho = self.tier.snr;
        let n = self.tier.interferers();

        let interference = |h: f64| -> Complex64 {
            if n == 0 {
                return Complex64::new(1.0, 0.0);
            }
            let w = s / (lambda * h);
            match &self.shared {
                Some(kernel) => kernel.powered_average(w, n),
                None => self.ratio.factor(w).powu(n),
            }
        };

        // h = u / (lambda (1 - u)) maps (0, 1) onto (0, inf); the fade density
        // times the Jacobian is exp(-lambda h) / (1 - u)^2.
        let integrand = |u: f64| -> Complex64 {
            let one_minus = 1.0 - u;
            let h = u / (lambda * one_minus);
            let fade = (-lambda * h).exp() / (one_minus * one_minus);
            if fade == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let noise = (-s / (rho * h)).exp();
            if noise == Complex64::new(0.0, 0.0) {
                return noise;
            }
            noise * fade * interference(h)
        };

        Ok(quadrature::integrate_complex(integrand, 0.0, 1.0, FADE_TOLERANCE)?.value)
    }

    /// Full inversion record for `Pr(Z <= 1/theta)`.
    pub fn success_inversion(&self, theta: f64, digits: u32) -> Result<CdfInversion, LinkError> {
        if !(theta.is_finite() && theta > 0.0) {
            return Err(LinkError::InvalidThreshold(theta));
        }
        let params = euler_params_for_digits(digits)?;
        let handle = TransformHandle::new(
            format!(
                "L_Z for {} nodes, snr {}, alpha {}",
                self.tier.total_nodes, self.tier.snr, self.tier.path_loss_exp
            ),
            |s| self.laplace_z(s),
        );
        Ok(invert_cdf(&handle, 1.0 / theta, params)?)
    }

    /// `Pr(SINR >= theta)`, clamped to `[0, 1]`.
    pub fn success_probability(&self, theta: f64, digits: u32) -> Result<f64, LinkError> {
        Ok(self.success_inversion(theta, digits)?.value)
    }
}

/// One-shot convenience for [`TierModel::success_probability`].
pub fn success_probability(tier: &LinkTier, theta: f64, digits: u32) -> Result<f64, LinkError> {
    TierModel::new(*tier)?.success_probability(theta, digits)
}
