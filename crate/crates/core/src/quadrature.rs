//! Numerical integration primitives.
//!
//! Two tools live here:
//!
//! * [`integrate`] / [`integrate_complex`]: globally adaptive 21-point
//!   Gauss-Kronrod quadrature (QUADPACK `qag` style). The rule is open, so the
//!   integrand is never evaluated at an interval endpoint.
//! * [`gauss_legendre`]: nodes and weights of the n-point Gauss-Legendre rule,
//!   used to build the fixed composite rules in [`crate::geometry`].

use num_complex::Complex64;
use thiserror::Error;

/// Failure of the adaptive integrator. Carries what was achieved so callers
/// can decide whether the estimate is still usable.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum QuadratureError {
    #[error("adaptive quadrature did not converge after {intervals} subintervals (estimate {estimate:e}, error {error:e})")]
    MaxSubdivisions {
        intervals: usize,
        estimate: f64,
        error: f64,
    },
    #[error("integrand returned a non-finite value at x = {x}")]
    NonFinite { x: f64 },
}

/// Tolerances for the adaptive integrator. Convergence is reached once the
/// summed error estimate drops below `max(abs_tol, rel_tol * |I|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub const fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            max_intervals: 2000,
        }
    }

    pub const fn with_max_intervals(mut self, max_intervals: usize) -> Self {
        self.max_intervals = max_intervals;
        self
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::new(1e-12, 1e-9)
    }
}

/// Result of a converged integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    pub error: f64,
    pub intervals: usize,
}

// Kronrod abscissae on [0, 1); odd indices are the embedded 10-point Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_814_811_935,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 {
            res_asc * scale
        } else {
            res_asc
        };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

/// One application of the 21-point Kronrod rule on `[a, b]`, with the error
/// estimate computed separately for the real and imaginary parts.
fn kronrod21<F>(f: &F, a: f64, b: f64) -> Result<Panel, QuadratureError>
where
    F: Fn(f64) -> Complex64,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |x: f64| {
        let v = f(x);
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(QuadratureError::NonFinite { x })
        }
    };

    let mut fv1 = [Complex64::new(0.0, 0.0); 10];
    let mut fv2 = [Complex64::new(0.0, 0.0); 10];
    let fc = eval(center)?;
    let mut gauss = Complex64::new(0.0, 0.0);
    let mut kronrod = fc * WGK[10];
    let mut abs_re = (fc.re * WGK[10]).abs();
    let mut abs_im = (fc.im * WGK[10]).abs();

    for j in 0..10 {
        let x = half * XGK[j];
        let f1 = eval(center - x)?;
        let f2 = eval(center + x)?;
        fv1[j] = f1;
        fv2[j] = f2;
        let sum = f1 + f2;
        kronrod += sum * WGK[j];
        abs_re += WGK[j] * (f1.re.abs() + f2.re.abs());
        abs_im += WGK[j] * (f1.im.abs() + f2.im.abs());
        if j % 2 == 1 {
            gauss += sum * WG[j / 2];
        }
    }

    let mean = kronrod * 0.5;
    let mut asc_re = WGK[10] * (fc.re - mean.re).abs();
    let mut asc_im = WGK[10] * (fc.im - mean.im).abs();
    for j in 0..10 {
        asc_re += WGK[j] * ((fv1[j].re - mean.re).abs() + (fv2[j].re - mean.re).abs());
        asc_im += WGK[j] * ((fv1[j].im - mean.im).abs() + (fv2[j].im - mean.im).abs());
    }

    let h = half.abs();
    let diff = (kronrod - gauss) * half;
    let err_re = rescale_error(diff.re, abs_re * h, asc_re * h);
    let err_im = rescale_error(diff.im, abs_im * h, asc_im * h);

    Ok(Panel {
        a,
        b,
        value: kronrod * half,
        error: err_re.hypot(err_im),
    })
}

/// Adaptively integrates a complex-valued function over the finite interval
/// `[a, b]`.
pub fn integrate_complex<F>(
    f: F,
    a: f64,
    b: f64,
    tol: Tolerance,
) -> Result<Integral<Complex64>, QuadratureError>
where
    F: Fn(f64) -> Complex64,
{
    let first = kronrod21(&f, a, b)?;
    let mut panels = vec![first];
    let mut total = first.value;
    let mut error = first.error;

    loop {
        if error <= tol.abs_tol.max(tol.rel_tol * total.norm()) {
            break;
        }
        if panels.len() >= tol.max_intervals {
            return Err(QuadratureError::MaxSubdivisions {
                intervals: panels.len(),
                estimate: total.re,
                error,
            });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one panel");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // Interval can no longer be split in double precision.
            return Err(QuadratureError::MaxSubdivisions {
                intervals: panels.len() + 1,
                estimate: total.re,
                error,
            });
        }
        let left = kronrod21(&f, p.a, mid)?;
        let right = kronrod21(&f, mid, p.b)?;

        panels.push(left);
        panels.push(right);
        // Re-summing avoids drift from repeated add/subtract of large panels.
        total = panels.iter().map(|p| p.value).sum();
        error = panels.iter().map(|p| p.error).sum();
    }

    Ok(Integral {
        value: total,
        error,
        intervals: panels.len(),
    })
}

/// Real-valued wrapper around [`integrate_complex`].
pub fn integrate<F>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Integral<f64>, QuadratureError>
where
    F: Fn(f64) -> f64,
{
    let r = integrate_complex(|x| Complex64::new(f(x), 0.0), a, b, tol)?;
    Ok(Integral {
        value: r.value.re,
        error: r.error,
        intervals: r.intervals,
    })
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`,
/// ascending in the node. Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}
