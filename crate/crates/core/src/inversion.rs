//! Numerical inversion of Laplace transforms of probability distributions by
//! Euler summation of the Fourier-series (Bromwich) representation.
//!
//! For a non-negative random variable with transform `L(s) = E[exp(-s X)]`,
//! the CDF at `t` is approximated by
//!
//! ```text
//! F(t) ~ 2^-B * (1/t) * exp(A/2) * sum_{b=0..B} C(B, b) * sum_{c=0..C+b} (-1)^c / D_c * Re(L(s_c) / s_c)
//! s_c  = (A + 2 pi i c) / (2 t),   D_0 = 2, D_c = 1 otherwise
//! ```
//!
//! `A` controls the discretisation error (about `exp(-A)`), `B` and `C` the
//! Euler averaging of the alternating tail.

use std::f64::consts::{LN_10, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::quadrature::QuadratureError;

/// Largest accepted accuracy target, in decimal digits.
pub const MAX_DIGITS: u32 = 15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InversionError {
    #[error("accuracy target must be between 1 and {MAX_DIGITS} digits, got {0}")]
    DigitsOutOfRange(u32),
    #[error("inversion point must be positive and finite, got {0}")]
    InvalidPoint(f64),
    #[error("transform evaluation failed: {0}")]
    Transform(#[from] QuadratureError),
}

/// Controls of the Euler-summation inversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerParams {
    /// Decay parameter `A`.
    pub a_e: f64,
    /// Binomial averaging order `B`.
    pub b_e: u32,
    /// Truncation order `C`.
    pub c_e: u32,
    /// Accuracy target in decimal digits these parameters were chosen for.
    pub digits: u32,
}

impl EulerParams {
    /// Number of transform evaluations one inversion performs.
    pub fn evaluations(&self) -> usize {
        (self.b_e + self.c_e + 1) as usize
    }

    /// Tolerance used for the convergence flag: ten times the target accuracy.
    pub fn convergence_tolerance(&self) -> f64 {
        10.0 * 10f64.powi(-(self.digits as i32))
    }
}

/// Smallest parameters meeting `A >= t ln 10`, `B >= 1.243 t - 1`,
/// `C >= 1.467 t` for an accuracy of `10^-t`. `t = 8` returns the
/// conventional `(8 ln 10, 11, 14)`.
pub fn euler_params_for_digits(digits: u32) -> Result<EulerParams, InversionError> {
    if digits == 0 || digits > MAX_DIGITS {
        return Err(InversionError::DigitsOutOfRange(digits));
    }
    let t = digits as f64;
    let a_e = t * LN_10;
    if digits == 8 {
        return Ok(EulerParams {
            a_e,
            b_e: 11,
            c_e: 14,
            digits,
        });
    }
    Ok(EulerParams {
        a_e,
        b_e: (1.243 * t - 1.0).ceil().max(0.0) as u32,
        c_e: (1.467 * t).ceil() as u32,
        digits,
    })
}

/// Weight divisor of the Fourier series: the zeroth term is halved.
pub fn euler_weight(c: u32) -> f64 {
    if c == 0 {
        2.0
    } else {
        1.0
    }
}

type Evaluator<'a> = dyn Fn(Complex64) -> Result<Complex64, QuadratureError> + Send + Sync + 'a;

/// A Laplace transform `s -> L(s)` defined for `Re(s) > 0`.
pub struct TransformHandle<'a> {
    eval: Box<Evaluator<'a>>,
    description: String,
}

impl<'a> TransformHandle<'a> {
    pub fn new<F>(description: impl Into<String>, eval: F) -> Self
    where
        F: Fn(Complex64) -> Result<Complex64, QuadratureError> + Send + Sync + 'a,
    {
        Self {
            eval: Box::new(eval),
            description: description.into(),
        }
    }

    /// Wraps an infallible closed-form transform.
    pub fn closed_form<F>(description: impl Into<String>, eval: F) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'a,
    {
        Self::new(description, move |s| Ok(eval(s)))
    }

    pub fn eval(&self, s: Complex64) -> Result<Complex64, QuadratureError> {
        (self.eval)(s)
    }

    pub fn description(&self) -> &str {
        &self.description
    }
}

impl std::fmt::Debug for TransformHandle<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TransformHandle")
            .field("description", &self.description)
            .finish_non_exhaustive()
    }
}

/// Outcome of one inversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfInversion {
    /// The Euler-summation value as computed; roundoff can push it slightly
    /// outside `[0, 1]`.
    pub raw: f64,
    /// `raw` clamped to `[0, 1]`.
    pub value: f64,
    /// Change between the Euler averages truncated at `C` and `C - 1`.
    pub last_increment: f64,
    /// Whether `last_increment` is within [`EulerParams::convergence_tolerance`].
    pub converged: bool,
    /// Largest `|L(s)|` seen; above 1 signals a broken transform.
    pub max_modulus: f64,
}

/// Binomial coefficients `C(n, 0..=n)` by the multiplicative recurrence.
fn binomial_row(n: u32) -> Vec<f64> {
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut c = 1.0;
    row.push(c);
    for k in 1..=n {
        c *= (n - k + 1) as f64 / k as f64;
        row.push(c);
    }
    row
}

/// Approximates the CDF `F(t_point)` of the distribution whose Laplace
/// transform is `transform`.
pub fn invert_cdf(
    transform: &TransformHandle<'_>,
    t_point: f64,
    params: EulerParams,
) -> Result<CdfInversion, InversionError> {
    if !(t_point.is_finite() && t_point > 0.0) {
        return Err(InversionError::InvalidPoint(t_point));
    }
    let a = params.a_e;
    let last = (params.b_e + params.c_e) as usize;

    let values: Vec<Complex64> = (0..=last)
        .into_par_iter()
        .map(|c| {
            let s = Complex64::new(a, 2.0 * PI * c as f64) / (2.0 * t_point);
            transform.eval(s)
        })
        .collect::<Result<_, _>>()?;

    let max_modulus = values.iter().map(|v| v.norm()).fold(0.0, f64::max);

    // Partial sums of the alternating series.
    let mut partial = Vec::with_capacity(last + 1);
    let mut acc = 0.0;
    for (c, l) in values.iter().enumerate() {
        let s = Complex64::new(a, 2.0 * PI * c as f64) / (2.0 * t_point);
        let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * (l / s).re / euler_weight(c as u32);
        partial.push(acc);
    }

    let binom = binomial_row(params.b_e);
    let scale = (0.5 * a).exp() / t_point * 2f64.powi(-(params.b_e as i32));
    let euler_at = |c_e: usize| -> f64 {
        binom
            .iter()
            .enumerate()
            .map(|(b, w)| w * partial[c_e + b])
            .sum::<f64>()
            * scale
    };

    let c_e = params.c_e as usize;
    let raw = euler_at(c_e);
    let last_increment = if c_e > 0 {
        (raw - euler_at(c_e - 1)).abs()
    } else {
        0.0
    };

    Ok(CdfInversion {
        raw,
        value: raw.clamp(0.0, 1.0),
        last_increment,
        converged: last_increment <= params.convergence_tolerance(),
        max_modulus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exponential() -> TransformHandle<'static> {
        TransformHandle::closed_form("Exp(1)", |s| 1.0 / (1.0 + s))
    }

    fn erlang2() -> TransformHandle<'static> {
        TransformHandle::closed_form("Erlang(2, 1)", |s| (1.0 + s).powi(-2))
    }

    #[test]
    fn paper_default_parameters() {
        let p = euler_params_for_digits(8).unwrap();
        assert!((p.a_e - 18.420_680_743_952_367).abs() < 1e-12);
        assert_eq!((p.b_e, p.c_e), (11, 14));
        assert_eq!(p.evaluations(), 26);
    }

    #[test]
    fn rule_applied_for_other_targets() {
        let p = euler_params_for_digits(1).unwrap();
        assert!((p.a_e - LN_10).abs() < 1e-15);
        assert_eq!((p.b_e, p.c_e), (1, 2));
        let p = euler_params_for_digits(4).unwrap();
        assert!((p.a_e - 9.210_340_371_976_184).abs() < 1e-12);
        assert_eq!((p.b_e, p.c_e), (4, 6));
        let p = euler_params_for_digits(6).unwrap();
        assert_eq!((p.b_e, p.c_e), (7, 9));
    }

    #[test]
    fn digits_bounds() {
        assert!(euler_params_for_digits(0).is_err());
        assert!(euler_params_for_digits(15).is_ok());
        assert_eq!(
            euler_params_for_digits(16),
            Err(InversionError::DigitsOutOfRange(16))
        );
    }

    #[test]
    fn weights() {
        assert_eq!(euler_weight(0), 2.0);
        assert_eq!(euler_weight(1), 1.0);
        assert_eq!(euler_weight(25), 1.0);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial_row(4), vec![1.0, 4.0, 6.0, 4.0, 1.0]);
        let row = binomial_row(30);
        assert_eq!(row[15], 155_117_520.0);
    }

    #[test]
    fn exponential_and_erlang_at_one() {
        let p = euler_params_for_digits(8).unwrap();
        let r = invert_cdf(&exponential(), 1.0, p).unwrap();
        assert!((r.raw - (1.0 - (-1.0f64).exp())).abs() < 1e-6, "{}", r.raw);
        assert!(r.converged);
        let r = invert_cdf(&erlang2(), 1.0, p).unwrap();
        assert!((r.raw - (1.0 - 2.0 * (-1.0f64).exp())).abs() < 1e-6);
    }

    #[test]
    fn point_mass_at_zero() {
        let p = euler_params_for_digits(8).unwrap();
        let unit = TransformHandle::closed_form("delta_0", |_| Complex64::new(1.0, 0.0));
        let r = invert_cdf(&unit, 1.0, p).unwrap();
        assert!((r.raw - 1.0).abs() < 1e-6, "{}", r.raw);
        assert_eq!(r.max_modulus, 1.0);
    }

    #[test]
    fn rejects_bad_points() {
        let p = euler_params_for_digits(8).unwrap();
        assert!(invert_cdf(&exponential(), 0.0, p).is_err());
        assert!(invert_cdf(&exponential(), f64::NAN, p).is_err());
    }

    #[test]
    fn transform_errors_propagate() {
        let p = euler_params_for_digits(4).unwrap();
        let broken = TransformHandle::new("broken", |_| Err(QuadratureError::NonFinite { x: 0.0 }));
        assert!(matches!(
            invert_cdf(&broken, 1.0, p),
            Err(InversionError::Transform(_))
        ));
    }
}
