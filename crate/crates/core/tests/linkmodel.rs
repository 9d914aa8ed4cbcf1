use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use v2x_chain::geometry::sample_distance;
use v2x_chain::linkmodel::{success_probability, LinkError};
use v2x_chain::montecarlo::estimate_success_z_grid;
use v2x_chain::quadrature::{integrate_complex, Tolerance};
use v2x_chain::{DiskRegion, InterferenceMode, LinkTier, TierModel};

fn tier(r: f64, nodes: u32, snr: f64, alpha: f64, mode: InterferenceMode) -> LinkTier {
    LinkTier::new(DiskRegion::new(r).unwrap(), nodes, snr, 1.0, alpha, mode).unwrap()
}

fn paper(nodes: u32) -> LinkTier {
    tier(200.0, nodes, 20.0, 4.0, InterferenceMode::PaperLiteral)
}

#[test]
fn no_interference_closed_form() {
    for snr in [0.5f64, 3.0, 50.0] {
        for theta in [0.02f64, 0.7, 4.0] {
            let t = tier(1.0, 1, snr, 3.0, InterferenceMode::PaperLiteral);
            let p = success_probability(&t, theta, 8).unwrap();
            assert!(
                (p - (-theta / snr).exp()).abs() <= 1e-6,
                "snr {snr} theta {theta}: {p}"
            );
        }
    }
    let p = success_probability(&paper(1), 1e-6, 8).unwrap();
    assert!(p >= 0.999);
}

#[test]
fn tiny_thresholds_reach_one() {
    for nodes in [2, 10, 100, 500] {
        let p = success_probability(&paper(nodes), 1e-12, 8).unwrap();
        assert!(p >= 0.999, "{nodes} nodes: {p}");
    }
}

#[test]
fn agrees_with_z_sampler_off_the_acceptance_grid() {
    let thetas = [0.3, 3.0];
    for mode in [
        InterferenceMode::PaperLiteral,
        InterferenceMode::SharedDesiredDistance,
    ] {
        for (alpha, nodes) in [(3.0, 2), (5.0, 4)] {
            let t = tier(7.0, nodes, 8.0, alpha, mode);
            let model = TierModel::new(t).unwrap();
            let mc = estimate_success_z_grid(&t, &thetas, 300_000, 21).unwrap();
            for (theta, e) in thetas.iter().zip(mc) {
                let p = model.success_probability(*theta, 8).unwrap();
                let tol = (3.0 * e.stderr).max(1e-3);
                assert!(
                    (p - e.estimate).abs() <= tol,
                    "{mode} alpha {alpha} nodes {nodes} theta {theta}: {p} vs {}",
                    e.estimate
                );
            }
        }
    }
}

#[test]
fn non_increasing_in_threshold() {
    let grid: Vec<f64> = (0..20)
        .map(|i| 10f64.powf(-2.0 + 4.0 * i as f64 / 19.0))
        .collect();
    for nodes in [1, 2, 10] {
        let model = TierModel::new(paper(nodes)).unwrap();
        let ps: Vec<f64> = grid
            .iter()
            .map(|&t| model.success_probability(t, 8).unwrap())
            .collect();
        for w in ps.windows(2) {
            assert!(w[1] <= w[0] + 1e-4, "{nodes} nodes: {ps:?}");
        }
        assert!(ps.iter().all(|p| (0.0..=1.0).contains(p)));
    }
}

#[test]
fn non_increasing_in_node_count() {
    for theta in [1e-4, 1e-2, 1.0] {
        let ps: Vec<f64> = [2, 10, 50, 100]
            .into_iter()
            .map(|m| success_probability(&paper(m), theta, 8).unwrap())
            .collect();
        for w in ps.windows(2) {
            assert!(w[1] <= w[0] + 1e-4, "theta {theta}: {ps:?}");
        }
    }
}

#[test]
fn independent_of_tier_label_and_radius() {
    // A pedestrian, vehicle or backhaul hop is the same computation; only the
    // numbers matter, and the radius cancels out of Z.
    let a = success_probability(&paper(5), 0.01, 8).unwrap();
    let b = success_probability(
        &tier(500.0, 5, 20.0, 4.0, InterferenceMode::PaperLiteral),
        0.01,
        8,
    )
    .unwrap();
    let c = success_probability(
        &tier(1.0, 5, 20.0, 4.0, InterferenceMode::PaperLiteral),
        0.01,
        8,
    )
    .unwrap();
    assert!(
        (a - b).abs() <= 1e-12 && (a - c).abs() <= 1e-12,
        "{a} {b} {c}"
    );
}

#[test]
fn transform_is_bounded_and_conjugate_symmetric() {
    for mode in [
        InterferenceMode::PaperLiteral,
        InterferenceMode::SharedDesiredDistance,
    ] {
        let model = TierModel::new(tier(1.0, 4, 10.0, 4.0, mode)).unwrap();
        for (re, im) in [
            (1e-12, 0.0),
            (0.1, 3.0),
            (2.0, -40.0),
            (9.2, 120.0),
            (30.0, 0.5),
        ] {
            let s = Complex64::new(re, im);
            let l = model.laplace_z(s).unwrap();
            assert!(l.norm() <= 1.0 + 1e-12, "{mode} {s}: {l}");
            let lc = model.laplace_z(s.conj()).unwrap();
            assert!((lc - l.conj()).norm() <= 1e-12, "{mode} {s}");
            let f = model.interference_factor(s, 1.0);
            assert!(f.norm() <= 1.0 + 1e-12);
        }
        // The ratio (d / d_m)^alpha has tail x^(-2 / alpha), so 1 - L(s)
        // vanishes like s^(1/2) here rather than linearly.
        let gap = |s: f64| 1.0 - model.laplace_z(Complex64::new(s, 0.0)).unwrap().re;
        let (g12, g16) = (gap(1e-12), gap(1e-16));
        assert!(g12 > 0.0 && g12 < 1e-4, "{mode}: {g12:e}");
        assert!(g16 > 0.0 && g16 < 3e-2 * g12, "{mode}: {g16:e} vs {g12:e}");
    }
}

/// One-interferer factor by nested adaptive quadrature over both distances,
/// in the angle coordinates `d = 2R cos(phi)` where the density is smooth.
fn factor_by_nested_quadrature(s: Complex64, h: f64, alpha: f64) -> Complex64 {
    let dens = |phi: f64| {
        let (sn, cs) = phi.sin_cos();
        16.0 / PI * cs * sn * (phi - sn * cs)
    };
    let tol = Tolerance::new(1e-13, 1e-11);
    let outer = |p1: f64| {
        let c1 = p1.cos();
        let inner = |p2: f64| {
            let ratio = (c1 / p2.cos()).powf(alpha);
            Complex64::new(dens(p2), 0.0) / (1.0 + s * ratio / h)
        };
        let left = integrate_complex(inner, 0.0, p1, tol).unwrap().value;
        let right = integrate_complex(inner, p1, FRAC_PI_2, tol).unwrap().value;
        (left + right) * dens(p1)
    };
    integrate_complex(outer, 0.0, FRAC_PI_2, tol).unwrap().value
}

#[test]
fn interference_factor_matches_nested_quadrature() {
    for alpha in [3.0, 4.0, 6.0] {
        let model =
            TierModel::new(tier(1.0, 2, 10.0, alpha, InterferenceMode::PaperLiteral)).unwrap();
        for (s, h) in [
            (Complex64::new(1.0, 0.0), 1.0),
            (Complex64::new(0.3, 5.0), 0.2),
            (Complex64::new(40.0, -7.0), 3.0),
        ] {
            let got = model.interference_factor(s, h);
            let want = factor_by_nested_quadrature(s, h, alpha);
            assert!(
                (got - want).norm() <= 1e-8,
                "alpha {alpha} s {s} h {h}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn interference_factor_matches_sampling() {
    // E[exp(-h_m (d / d_m)^4)] for s = 1, h = 1, R = 1.
    let region = DiskRegion::new(1.0).unwrap();
    let fade: Exp<f64> = Exp::new(1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let n = 10_000_000u64;
    let (mut sum, mut sq) = (0.0, 0.0);
    for _ in 0..n {
        let d = sample_distance(&region, &mut rng).value();
        let dm = sample_distance(&region, &mut rng).value();
        let v = (-fade.sample(&mut rng) * (d / dm).powi(4)).exp();
        sum += v;
        sq += v * v;
    }
    let mean = sum / n as f64;
    let se = ((sq / n as f64 - mean * mean) / n as f64).sqrt();
    let model = TierModel::new(tier(1.0, 2, 10.0, 4.0, InterferenceMode::PaperLiteral)).unwrap();
    let got = model.interference_factor(Complex64::new(1.0, 0.0), 1.0);
    assert!(got.im.abs() < 1e-15);
    assert!(
        (got.re - mean).abs() <= 3.0 * se,
        "{} vs {mean} (se {se})",
        got.re
    );
}

#[test]
fn noise_only_transform_matches_sampling() {
    // n_I = 0, rho = 10, s = 1: E[exp(-1 / (10 h))].
    let fade: Exp<f64> = Exp::new(1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 10_000_000u64;
    let (mut sum, mut sq) = (0.0, 0.0);
    for _ in 0..n {
        let v = (-1.0 / (10.0 * fade.sample(&mut rng))).exp();
        sum += v;
        sq += v * v;
    }
    let mean = sum / n as f64;
    let se = ((sq / n as f64 - mean * mean) / n as f64).sqrt();
    let model = TierModel::new(tier(1.0, 1, 10.0, 4.0, InterferenceMode::PaperLiteral)).unwrap();
    let got = model.laplace_z(Complex64::new(1.0, 0.0)).unwrap();
    assert!((got.re - mean).abs() <= 3.0 * se, "{got} vs {mean}");
}

#[test]
fn invalid_inputs() {
    let region = DiskRegion::new(1.0).unwrap();
    assert!(matches!(
        LinkTier::new(region, 3, 10.0, 1.0, 2.0, InterferenceMode::PaperLiteral),
        Err(LinkError::InvalidTier(_))
    ));
    assert!(LinkTier::new(region, 0, 10.0, 1.0, 4.0, InterferenceMode::PaperLiteral).is_err());
    assert!(matches!(
        success_probability(&paper(3), 0.0, 8),
        Err(LinkError::InvalidThreshold(_))
    ));
    assert!(matches!(
        success_probability(&paper(3), 1.0, 0),
        Err(LinkError::Inversion(_))
    ));
}
