use waveqed_core::model::initial_density;
use waveqed_core::observables::*;
use waveqed_core::quadrature::trapezoid;
use waveqed_core::{CorrelatorTables, Error, InputKind, ModelParams, PulseSpec, TimeGrid};

fn tables(gamma: f64, l: f64, t_max: f64) -> CorrelatorTables {
    let p = ModelParams::new(gamma, 0.0, 1.0).unwrap();
    let s = PulseSpec::new(1.0, -10.0, l, 2).unwrap();
    CorrelatorTables::two_photon(&p, &s, &TimeGrid::with_default_step(&p, &s, t_max).unwrap(), 1).unwrap()
}

fn momenta() -> Vec<f64> {
    (0..129).map(|j| -6.0 + 12.0 * j as f64 / 128.0).collect()
}

#[test]
fn free_region_is_the_free_distribution_bit_for_bit() {
    let tabs = tables(1.0, 2.0, 20.0);
    let x = aligned_positions(30.0, 200, &tabs);
    let field = phase_space_field(&tabs, &x, &momenta(), 20.0).unwrap();
    for (i, &xi) in x.iter().enumerate() {
        for (j, &p) in field.p.iter().enumerate() {
            let free = tabs.free.phase_space(xi, p, 20.0, &tabs.spec, 1.0);
            if xi < 0.0 {
                assert_eq!(field.f_l[i][j], free);
                assert_eq!(phase_space_l(xi, p, 20.0, &tabs).unwrap(), free);
            }
            if xi > 0.0 {
                assert_eq!(field.f_r[i][j], 0.0);
            }
        }
    }
    assert!(field.imaginary_residue < 1e-9);
    assert!(field.min_l() < 0.0);
}

#[test]
fn uncoupled_emitter_leaves_the_input_untouched() {
    let tabs = tables(0.0, 2.0, 20.0);
    let x = aligned_positions(30.0, 120, &tabs);
    let field = phase_space_field(&tabs, &x, &momenta(), 20.0).unwrap();
    for (i, &xi) in x.iter().enumerate() {
        for (j, &p) in field.p.iter().enumerate() {
            assert_eq!(field.f_l[i][j], tabs.free.phase_space(xi, p, 20.0, &tabs.spec, 1.0));
            assert_eq!(field.f_r[i][j], 0.0);
        }
    }
}

#[test]
fn densities_at_the_start_are_the_input_density() {
    let tabs = tables(1.0, 2.0, 10.0);
    let x = aligned_positions(20.0, 200, &tabs);
    let prof = density(&tabs, &x, 0.0, &conjugate_momentum_grid(&tabs, 0.0, 20.0)).unwrap();
    for (i, &xi) in x.iter().enumerate() {
        assert!((prof.rho_l[i] - initial_density(xi, &tabs.spec)).abs() < 1e-10);
        assert_eq!(prof.rho_r[i], 0.0);
    }
}

#[test]
fn density_is_the_momentum_sum_of_the_distributions() {
    let tabs = tables(1.0, 0.0, 12.0);
    let t = 12.0;
    let x: Vec<f64> = aligned_positions(22.0, 45, &tabs);
    let grid = conjugate_momentum_grid(&tabs, t, 22.0);
    let nodes: Vec<f64> = grid.nodes().collect();
    let prof = density(&tabs, &x, t, &grid).unwrap();
    let field = phase_space_field(&tabs, &x, &nodes, t).unwrap();
    for i in 0..x.len() {
        let (l, r) = (grid.integrate(&field.f_l[i]), grid.integrate(&field.f_r[i]));
        assert!((l - prof.rho_l[i]).abs() < 1e-10, "x = {}", x[i]);
        assert!((r - prof.rho_r[i]).abs() < 1e-10, "x = {}", x[i]);
    }
}

#[test]
fn reflected_number_from_the_distribution_and_from_the_excitation() {
    let p = ModelParams::new(1.0, 0.0, 1.0).unwrap();
    let s = PulseSpec::new(1.0, -10.0, 0.0, 2).unwrap();
    let t = 32.0;
    let tabs = CorrelatorTables::two_photon(&p, &s, &TimeGrid::with_default_step(&p, &s, t).unwrap(), 1).unwrap();
    let x: Vec<f64> = aligned_positions(t, 300, &tabs).into_iter().filter(|&x| x <= 0.0).collect();
    let dx = x[1] - x[0];
    let momenta: Vec<f64> = (0..321).map(|j| -8.0 + 16.0 * j as f64 / 320.0).collect();
    let dp = momenta[1] - momenta[0];
    let field = phase_space_field(&tabs, &x, &momenta, t).unwrap();
    let rows: Vec<f64> = field.f_r.iter().map(|row| trapezoid(row, dp)).collect();
    let n_r = trapezoid(&rows, dx);
    let stats = PhotonStats::from_tables(&tabs);
    assert!((n_r - stats.n_r).abs() < 1e-3, "{n_r} vs {}", stats.n_r);
}

#[test]
fn reflected_density_follows_the_excitation() {
    let tabs = tables(0.5, 2.0, 24.0);
    let t = 24.0;
    let x: Vec<f64> = aligned_positions(t, 240, &tabs).into_iter().filter(|&x| x < 0.0).collect();
    let prof = density(&tabs, &x, t, &conjugate_momentum_grid(&tabs, t, t)).unwrap();
    let peak = prof.rho_r_shortcut.iter().copied().fold(0.0, f64::max);
    for (q, c) in prof.rho_r.iter().zip(&prof.rho_r_shortcut) {
        if *c > 1e-6 * peak {
            assert!((q / c - 1.0).abs() < 1e-4);
        }
    }
}

#[test]
fn snapshots_must_be_nodes_within_the_tables() {
    let tabs = tables(1.0, 0.0, 10.0);
    assert!(matches!(phase_space_l(1.0, 0.0, 10.5, &tabs), Err(Error::Usage(_))));
    assert!(matches!(phase_space_r(-1.0, 0.0, 3.0 + 0.3 * tabs.grid.dt, &tabs), Err(Error::Usage(_))));
}

#[test]
fn early_spectrum_carries_warnings() {
    let tabs = tables(1.0, 0.0, 12.0);
    let curve = spectrum(&tabs, &[-1.0, 0.0, 1.0], 12.0, 101).unwrap();
    assert_eq!(curve.warnings.len(), 2, "{:?}", curve.warnings);
}

#[test]
fn width_of_a_sampled_gaussian() {
    let x: Vec<f64> = (0..2001).map(|i| -10.0 + 0.01 * i as f64).collect();
    let y: Vec<f64> = x.iter().map(|v| (-v * v / 2.0).exp()).collect();
    let fwhm = full_width_half_maximum(&x, &y).unwrap();
    assert!((fwhm - 2.0 * (2.0 * 2f64.ln()).sqrt()).abs() < 1e-4);
}

#[test]
fn uncoupled_statistics_vanish() {
    let p = ModelParams::new(0.0, 0.0, 1.0).unwrap();
    let s = PulseSpec::new(1.0, -8.0, 1.0, 2).unwrap();
    let grid = TimeGrid::with_default_step(&p, &s, scattering_time(&p, &s)).unwrap();
    let st = photon_stats(&p, &s, &grid, InputKind::TwoPhoton).unwrap();
    assert_eq!((st.n_r, st.var_r, st.n_l), (0.0, Some(0.0), 2.0));
}

#[test]
fn fock_statistics_reduce_to_the_pair_and_single_routes() {
    let p = ModelParams::new(1.0, 0.0, 1.0).unwrap();
    let s = PulseSpec::new(1.0, -8.0, 0.0, 2).unwrap();
    let grid = TimeGrid::with_default_step(&p, &s, scattering_time(&p, &s)).unwrap();
    let pair = photon_stats(&p, &s, &grid, InputKind::TwoPhoton).unwrap();
    let fock = photon_stats(&p, &s, &grid, InputKind::Fock(2)).unwrap();
    assert!((pair.n_r - fock.n_r).abs() < 1e-6);
    assert!((pair.var_r.unwrap() - fock.var_r.unwrap()).abs() < 1e-6);
    assert!(pair.warnings.is_empty(), "{:?}", pair.warnings);

    let single = photon_stats(&p, &s.with_photons(1), &grid, InputKind::SinglePhoton).unwrap();
    assert!(single.var_r.unwrap() >= 0.0);
    assert!((single.var_r.unwrap() - single.n_r * (1.0 - single.n_r)).abs() < 1e-12);

    let triple = photon_stats(&p, &s.with_photons(3), &grid, InputKind::Fock(3)).unwrap();
    assert!(triple.var_r.is_none() && triple.n_r > fock.n_r);
}
