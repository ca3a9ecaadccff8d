use std::f64::consts::PI;

use waveqed_core::model::*;
use waveqed_core::quadrature::{trapezoid, trapezoid_fn};
use waveqed_core::{FreeField, PulseSpec};

fn pair(l: f64) -> PulseSpec {
    PulseSpec::new(1.0, -10.0, l, 2).unwrap()
}

#[test]
fn envelope_closed_form_matches_momentum_quadrature() {
    for l in [0.0, 2.0] {
        let s = pair(l);
        let grid = momentum_grid(&s);
        for i in 0..=60 {
            let t = 0.5 * i as f64;
            assert!((envelope_a(t, &s, 1.0) - envelope_a_quadrature(t, &s, 1.0, &grid)).norm() < 1e-8);
            assert!((envelope_b(t, &s, 1.0) - envelope_b_quadrature(t, &s, 1.0, &grid)).norm() < 1e-8);
        }
    }
}

#[test]
fn envelope_peak_is_the_gaussian_integral() {
    let s = PulseSpec::new(2.0, -12.0, 0.0, 1).unwrap();
    let peak: f64 = trapezoid_fn(-20.0, 20.0, 4001, |p: f64| {
        (s.width.sqrt() / PI.powf(0.25)) * (-(s.width * p).powi(2) / 2.0).exp()
    });
    assert!((envelope_a(12.0, &s, 1.0).re - peak).abs() < 1e-8);
    assert!((peak - 2f64.sqrt() * PI.powf(0.25) / s.width.sqrt()).abs() < 1e-12);
}

#[test]
fn overlap_at_two_widths() {
    let s = pair(2.0);
    let chi = overlap_chi(&s);
    let direct = overlap_chi_momentum(&s, &momentum_grid(&s));
    assert!((chi - direct).norm() < 1e-10);
    assert!((chi.re - (-1.0f64).exp()).abs() < 1e-10 && chi.im.abs() < 1e-10);
    let nu = normalization_nu(&s);
    assert!((nu.powi(-2) - (1.0 + (-2.0f64).exp())).abs() < 1e-10);
    assert!((nu - 0.938_508).abs() < 1e-6);
    assert!(overlap_chi(&pair(20.0)).norm() < 1e-20);
}

#[test]
fn both_interference_exponents_follow_from_the_overlap() {
    for l in [1.0, 2.5, 4.0] {
        let s = pair(l);
        let chi = overlap_chi(&s).re;
        assert!((chi - (-l * l / 4.0f64).exp()).abs() < 1e-10);
        assert!((chi * chi - (-l * l / 2.0f64).exp()).abs() < 1e-10);
    }
}

#[test]
fn density_areas_are_two() {
    for l in [0.0, 2.0, 5.0] {
        let s = pair(l);
        let n = 6001;
        let (a, b) = (s.x0 - l - 12.0, s.x0 + 12.0);
        let dx = (b - a) / (n - 1) as f64;
        let rho: Vec<f64> = (0..n).map(|i| initial_density(a + i as f64 * dx, &s)).collect();
        assert!((trapezoid(&rho, dx) - 2.0).abs() < 1e-6, "L = {l}");
    }
}

#[test]
fn free_distribution_integrates_to_two() {
    let s = pair(2.0);
    let free = FreeField::for_spec(&s);
    let (nx, np) = (601, 401);
    let (xa, xb) = (s.x0 - 10.0, s.x0 + 8.0);
    let dx = (xb - xa) / (nx - 1) as f64;
    let dp = 16.0 / (np - 1) as f64;
    let rows: Vec<f64> = (0..nx)
        .map(|i| {
            let x = xa + i as f64 * dx;
            let f: Vec<f64> = (0..np).map(|j| free.phase_space(x, -8.0 + j as f64 * dp, 0.0, &s, 1.0)).collect();
            trapezoid(&f, dp)
        })
        .collect();
    assert!((trapezoid(&rows, dx) - 2.0).abs() < 1e-4);
}

#[test]
fn free_distribution_marginal_translation_and_sign() {
    for l in [0.0, 2.0, 3.0] {
        let s = pair(l);
        let free = FreeField::for_spec(&s);
        let grid = momentum_grid(&s);
        for i in 0..50 {
            let x = s.x0 - l - 4.0 + (l + 8.0) * i as f64 / 49.0;
            let f: Vec<f64> = grid.nodes().map(|p| free.phase_space(x, p, 0.0, &s, 1.0)).collect();
            assert!(f.iter().all(|&v| v >= 0.0));
            assert!((grid.integrate(&f) - initial_density(x, &s)).abs() < 1e-6);
            for p in [-1.0, 0.0, 0.7] {
                let a = free_phase_space(x, p, 3.0, &s, 1.0);
                let b = free_phase_space(x + 1.5, p, 4.5, &s, 1.0);
                assert!((a - b).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn separated_pair_has_two_peaks_on_the_momentum_axis() {
    let s = pair(3.0);
    let xs: Vec<f64> = (0..=1000).map(|i| -7.0 + 0.01 * i as f64).collect();
    let f: Vec<f64> = xs.iter().map(|&big_x| free_phase_space(s.x0 + big_x, 0.0, 0.0, &s, 1.0)).collect();
    let peaks: Vec<f64> = (1..f.len() - 1).filter(|&i| f[i] > f[i - 1] && f[i] > f[i + 1]).map(|i| xs[i]).collect();
    assert_eq!(peaks.len(), 2, "{peaks:?}");
    assert!((peaks[0] + 3.0).abs() < 0.3 && peaks[1].abs() < 0.3, "{peaks:?}");

    let single = pair(0.0);
    let g: Vec<f64> = xs.iter().map(|&big_x| free_phase_space(single.x0 + big_x, 0.0, 0.0, &single, 1.0)).collect();
    assert_eq!((1..g.len() - 1).filter(|&i| g[i] > g[i - 1] && g[i] > g[i + 1]).count(), 1);
}
