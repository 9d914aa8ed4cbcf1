//! Distance between two independent uniform points in a disk.
//!
//! For a disk of radius `R` the distance `d` has density
//!
//! ```text
//! f(x) = 4x / (pi R^2) * (acos(x / 2R) - (x / 2R) * sqrt(1 - x^2 / 4R^2)),  0 <= x <= 2R
//! ```
//!
//! Substituting `x = 2R cos(phi)` turns `f(x) dx` into the analytic angular
//! density `(16 / pi) cos(phi) sin(phi) (phi - sin(phi) cos(phi)) dphi` on
//! `[0, pi/2]`, which is what the quadrature here integrates.
//!
//! Besides the scalar functions this module builds two fixed quadrature rules
//! used by the link model: [`DistanceRule`] for expectations over one distance
//! and [`RatioRule`] for expectations over the log-ratio of two independent
//! distances. Both are expressed in units of `R`; the ratio law does not
//! depend on `R` at all.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

use rand::Rng;
use rand_distr::{Distribution, UnitDisc};
use thiserror::Error;

use crate::quadrature::{self, gauss_legendre, QuadratureError, Tolerance};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("disk radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("distance argument must be finite, got {0}")]
    NonFinite(f64),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// A circular deployment area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskRegion {
    radius: f64,
}

impl DiskRegion {
    pub fn new(radius: f64) -> Result<Self, GeometryError> {
        if radius.is_finite() && radius > 0.0 {
            Ok(Self { radius })
        } else {
            Err(GeometryError::InvalidRadius(radius))
        }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Largest possible distance inside the disk.
    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }

    /// Uniform point in the disk centred on the origin.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 2] {
        let [x, y]: [f64; 2] = UnitDisc.sample(rng);
        [x * self.radius, y * self.radius]
    }
}

/// A distance between two points of a [`DiskRegion`], in meters.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Distance(pub f64);

impl Distance {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Density of the distance in the unit disk.
fn unit_pdf(x: f64) -> f64 {
    if !(0.0..=2.0).contains(&x) {
        return 0.0;
    }
    let h = 0.5 * x;
    let v = 4.0 * x / PI * (h.acos() - h * (1.0 - h * h).max(0.0).sqrt());
    v.max(0.0)
}

/// `f(x) dx / dphi` under `x = 2R cos(phi)`; independent of `R`.
fn angular_density(phi: f64) -> f64 {
    let (s, c) = phi.sin_cos();
    16.0 / PI * c * s * (phi - s * c)
}

/// Unit-disk density evaluated through the angle, accurate near `x = 2`.
fn unit_pdf_at_angle(phi: f64) -> f64 {
    let (s, c) = phi.sin_cos();
    8.0 * c / PI * (phi - s * c)
}

const CDF_TOL: Tolerance = Tolerance::new(1e-14, 1e-12);

/// Density of the distance between two uniform points of `region`.
/// Outside `[0, 2R]` the density is zero.
pub fn distance_pdf(x: f64, region: &DiskRegion) -> Result<f64, GeometryError> {
    if !x.is_finite() {
        return Err(GeometryError::NonFinite(x));
    }
    let r = region.radius;
    Ok(unit_pdf(x / r) / r)
}

/// Cumulative distribution of the disk distance, by adaptive quadrature of
/// the angular form of the density.
pub fn distance_cdf(x: f64, region: &DiskRegion) -> Result<f64, GeometryError> {
    if !x.is_finite() {
        return Err(GeometryError::NonFinite(x));
    }
    let u = x / region.radius;
    if u <= 0.0 {
        return Ok(0.0);
    }
    if u >= 2.0 {
        return Ok(1.0);
    }
    let phi = (0.5 * u).acos();
    let r = quadrature::integrate(angular_density, phi, FRAC_PI_2, CDF_TOL)?;
    Ok(r.value.clamp(0.0, 1.0))
}

/// `E[d^order]` by quadrature. Order 1 is `128 R / (45 pi)`, order 2 is `R^2`.
pub fn distance_moment(order: f64, region: &DiskRegion) -> Result<f64, GeometryError> {
    let r = quadrature::integrate(
        |phi| (2.0 * phi.cos()).powf(order) * angular_density(phi),
        0.0,
        FRAC_PI_2,
        CDF_TOL,
    )?;
    Ok(r.value * region.radius.powf(order))
}

/// Closed-form mean distance, `128 R / (45 pi)`.
pub fn mean_distance(region: &DiskRegion) -> f64 {
    128.0 * region.radius / (45.0 * PI)
}

/// Exact sampler: the distance between two independent uniform points.
pub fn sample_distance<R: Rng + ?Sized>(region: &DiskRegion, rng: &mut R) -> Distance {
    let [ax, ay] = region.sample_point(rng);
    let [bx, by] = region.sample_point(rng);
    Distance((ax - bx).hypot(ay - by))
}

/// Points per Gauss-Legendre panel in the fixed rules.
const PANEL_POINTS: usize = 10;

fn composite_nodes(lo: f64, hi: f64, panels: usize, gl: &(Vec<f64>, Vec<f64>)) -> Vec<(f64, f64)> {
    let width = (hi - lo) / panels as f64;
    let mut out = Vec::with_capacity(panels * gl.0.len());
    for p in 0..panels {
        let a = lo + p as f64 * width;
        for (x, w) in gl.0.iter().zip(&gl.1) {
            out.push((a + 0.5 * width * (x + 1.0), 0.5 * width * w));
        }
    }
    out
}

/// Fixed quadrature rule for `E[g(d / R)]` over the disk-distance law.
///
/// Below `d = R` the rule is a composite Gauss-Legendre rule in `ln(d / R)`,
/// truncated at `ln(d / R) = -log_span` (the neglected mass is about
/// `exp(-2 log_span)`); above `d = R` it is a composite rule in the angle
/// `phi`, where the density is analytic up to the rim `d = 2R`.
#[derive(Debug, Clone)]
pub struct DistanceRule {
    /// Node positions in units of `R`.
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl DistanceRule {
    /// `panel_width` is the panel length both in `ln(d / R)` and in `phi`.
    pub fn new(log_span: f64, panel_width: f64) -> Self {
        assert!(log_span > 0.0 && panel_width > 0.0);
        let gl = gauss_legendre(PANEL_POINTS);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();

        let log_panels = (log_span / panel_width).ceil() as usize;
        for (t, w) in composite_nodes(-log_span, 0.0, log_panels, &gl) {
            let x = t.exp();
            nodes.push(x);
            weights.push(w * unit_pdf(x) * x);
        }
        let angle_panels = (FRAC_PI_3 / panel_width).ceil() as usize;
        for (phi, w) in composite_nodes(0.0, FRAC_PI_3, angle_panels, &gl) {
            nodes.push(2.0 * phi.cos());
            weights.push(w * angular_density(phi));
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Total probability captured by the rule (1 minus the truncated tail).
    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn expect<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * g(x))
            .sum()
    }
}

/// Density of `Y = ln(d1 / d2)` for two independent disk distances.
///
/// `f_Y(y) = integral of f(v e^y) f(v) v e^y dv`; with `v e^|y| = 2 cos(phi)`
/// both factors stay analytic on `[0, pi/2]`. The law is symmetric in `y`.
pub fn log_ratio_density(y: f64) -> Result<f64, QuadratureError> {
    let a = y.abs();
    let shrink = (-a).exp();
    let integrand = |phi: f64| {
        let (s, c) = phi.sin_cos();
        unit_pdf_at_angle(phi) * unit_pdf(2.0 * shrink * c) * 4.0 * shrink * c * s
    };
    let r = quadrature::integrate(integrand, 0.0, FRAC_PI_2, Tolerance::new(1e-16, 1e-12))?;
    Ok(r.value.max(0.0))
}

/// Fixed quadrature rule for `E[g(ln(d1 / d2))]` where `d1, d2` are
/// independent disk distances.
///
/// Composite Gauss-Legendre on `[-log_span, log_span]` with a panel edge at
/// zero, where the density has a derivative discontinuity. The density decays
/// like `exp(-2 |y|)`, so the neglected mass is about `exp(-2 log_span)`.
#[derive(Debug, Clone)]
pub struct RatioRule {
    pub log_ratios: Vec<f64>,
    pub weights: Vec<f64>,
}

impl RatioRule {
    pub fn new(log_span: f64, panel_width: f64) -> Result<Self, QuadratureError> {
        assert!(log_span > 0.0 && panel_width > 0.0);
        let gl = gauss_legendre(PANEL_POINTS);
        let half_panels = (log_span / panel_width).ceil() as usize;
        let span = half_panels as f64 * panel_width;

        let positive = composite_nodes(0.0, span, half_panels, &gl);
        let mut half = Vec::with_capacity(positive.len());
        for (y, w) in positive {
            half.push((y, w * log_ratio_density(y)?));
        }

        let mut log_ratios = Vec::with_capacity(2 * half.len());
        let mut weights = Vec::with_capacity(2 * half.len());
        for &(y, w) in half.iter().rev() {
            log_ratios.push(-y);
            weights.push(w);
        }
        for &(y, w) in &half {
            log_ratios.push(y);
            weights.push(w);
        }
        Ok(Self {
            log_ratios,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.log_ratios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_ratios.is_empty()
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}
