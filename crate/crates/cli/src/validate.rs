use std::time::Instant;

use serde_json::json;
use waveqed_core::correlators::{solve_equal_time, solve_fock_chain, solve_single_photon};
use waveqed_core::observables::*;
use waveqed_core::oracle::{build_initial_state, propagate, DiscreteModel};
use waveqed_core::{InputKind, TimeGrid};

use crate::commands::{grid_json, metadata, setup_json, tables, Context};
use crate::config::Setup;
use crate::error::CliError;
use crate::output::Output;

struct Check {
    name: &'static str,
    pass: bool,
    measured: f64,
    tolerance: f64,
    detail: String,
}

fn excitation(setup: &Setup, grid: &TimeGrid) -> Result<Vec<f64>, CliError> {
    let (p, s) = (&setup.params, &setup.spec);
    Ok(match setup.kind {
        InputKind::TwoPhoton => solve_equal_time(p, s, grid, &solve_single_photon(p, s, grid)?)?.excitation,
        kind => solve_fock_chain(p, s, grid, kind.photons())?.top_excitation().to_vec(),
    })
}

fn step_halving(ctx: &Context, setup: &Setup) -> Result<Vec<Check>, CliError> {
    let t_max = ctx.config.grid.t_max.unwrap_or_else(|| setup.snapshot_time());
    let grid = setup.grid(&ctx.config.grid, t_max)?;
    let runs = [excitation(setup, &grid)?, excitation(setup, &grid.refined())?, excitation(setup, &grid.refined().refined())?];
    let diff = |a: &[f64], b: &[f64]| (0..a.len()).map(|k| (a[k] - b[2 * k]).abs()).fold(0.0, f64::max);
    let (e1, e2) = (diff(&runs[0], &runs[1]), diff(&runs[1], &runs[2]));
    let order = if e2 > 0.0 { (e1 / e2).log2() } else { f64::INFINITY };
    Ok(vec![
        Check {
            name: "step-halving",
            pass: e1 < 1e-6,
            measured: e1,
            tolerance: 1e-6,
            detail: format!("sup |P(dt) - P(dt/2)| at dt = {}", grid.dt),
        },
        Check {
            name: "convergence-order",
            pass: order >= 3.5 || e1 < 1e-12,
            measured: order,
            tolerance: 3.5,
            detail: format!("log2 of successive step-halving differences {e1:.3e}, {e2:.3e}"),
        },
    ])
}

fn table_checks(ctx: &Context, setup: &Setup) -> Result<Vec<Check>, CliError> {
    let t = setup.snapshot_time();
    let (tables, _) = tables(ctx, setup, t, ctx.cache.as_deref())?;
    let n = setup.kind.photons() as f64;
    let mut checks = Vec::new();

    let mut worst = 0.0f64;
    let extent = setup.spec.x0.abs() + setup.spec.separation + setup.params.v_g * t;
    let x = aligned_positions(extent, 400, &tables);
    let mut reflected = 0.0f64;
    for k in 1..=5 {
        let node = (tables.grid.steps * k / 5) / tables.correlation.stride() * tables.correlation.stride();
        let tk = tables.grid.time(node);
        let prof = density(&tables, &x, tk, &conjugate_momentum_grid(&tables, tk, extent))?;
        worst = worst.max((prof.balance(&tables).total() - n).abs() / n);
        let peak = prof.rho_r_shortcut.iter().copied().fold(0.0, f64::max);
        for (q, c) in prof.rho_r.iter().zip(&prof.rho_r_shortcut) {
            if *c > 1e-6 * peak {
                reflected = reflected.max((q / c - 1.0).abs());
            }
        }
    }
    checks.push(Check {
        name: "conservation",
        pass: worst < 1e-3,
        measured: worst,
        tolerance: 1e-3,
        detail: format!("max |N_l + N_r + P - {n}| / {n} at five snapshots"),
    });
    checks.push(Check {
        name: "reflected-density",
        pass: reflected < 1e-4,
        measured: reflected,
        tolerance: 1e-4,
        detail: "max relative deviation of ρ_r from (Γ/2v_g) P(t + x/v_g)".into(),
    });

    let g = &tables.correlation;
    let stride = g.stride();
    let (mut imag, mut excess) = (0.0f64, 0.0f64);
    for k in 0..g.nodes() {
        imag = imag.max(g.lower(k, k).im.abs());
        let pk = tables.excitation[k * stride];
        for j in k..g.nodes() {
            let bound = tables.excitation[j * stride] * pk;
            excess = excess.max(g.lower(j, k).norm_sqr() - bound);
        }
    }
    checks.push(Check {
        name: "hermiticity",
        pass: imag < 1e-12,
        measured: imag,
        tolerance: 1e-12,
        detail: "max |Im G(t, t)|".into(),
    });
    checks.push(Check {
        name: "cauchy-schwarz",
        pass: excess < 1e-12,
        measured: excess.max(0.0),
        tolerance: 1e-12,
        detail: "max excess of |G(t, t')|² over P(t) P(t')".into(),
    });

    let x = aligned_positions(extent, 101, &tables);
    let p: Vec<f64> = (0..65).map(|j| -8.0 + 0.25 * j as f64).collect();
    let field = phase_space_field(&tables, &x, &p, tables.grid.t_max())?;
    checks.push(Check {
        name: "realness",
        pass: field.imaginary_residue < 1e-9,
        measured: field.imaginary_residue,
        tolerance: 1e-9,
        detail: "imaginary residue of the distributions relative to their maximum".into(),
    });
    Ok(checks)
}

fn oracle_checks(ctx: &Context, setup: &Setup) -> Result<Vec<Check>, CliError> {
    let cfg = &ctx.config.validate;
    let n = setup.kind.photons();
    if n > 2 {
        return Err(CliError::Config(format!("the discrete-mode comparison needs one or two photons, not {n}")));
    }
    let disc = DiscreteModel::new(&setup.params, cfg.oracle_modes, cfg.oracle_p_max)?;
    let grid = TimeGrid::new(cfg.oracle_dt, cfg.oracle_t_max)?;
    let run = propagate(&build_initial_state(&setup.spec, &disc)?, &disc, &grid, &[])?;
    let hierarchy = excitation(setup, &grid)?;
    let peak = hierarchy.iter().copied().fold(0.0, f64::max);
    let sup = hierarchy.iter().zip(&run.trajectory.excitation).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / peak;
    let full = setup.grid(&ctx.config.grid, scattering_time(&setup.params, &setup.spec))?;
    let n_r = photon_stats(&setup.params, &setup.spec, &full, setup.kind)?.n_r;
    let oracle_n_r = run.trajectory.n_r.last().unwrap() + 0.5 * run.trajectory.excitation.last().unwrap();
    let rel = (oracle_n_r / n_r - 1.0).abs();
    Ok(vec![
        Check {
            name: "oracle-excitation",
            pass: sup < 0.02,
            measured: sup,
            tolerance: 0.02,
            detail: format!("sup |P_oracle - P| / max P with {} modes per direction", cfg.oracle_modes),
        },
        Check {
            name: "oracle-reflection",
            pass: rel < 0.02,
            measured: rel,
            tolerance: 0.02,
            detail: format!("relative difference of N_r: oracle {oracle_n_r:.6}, hierarchy {n_r:.6}"),
        },
        Check {
            name: "oracle-norm",
            pass: run.trajectory.norm_drift < 1e-6,
            measured: run.trajectory.norm_drift,
            tolerance: 1e-6,
            detail: "largest drift of the discrete state norm".into(),
        },
    ])
}

/// Runs the invariant suite and, when enabled, the discrete-mode comparison.
pub fn validate(ctx: &Context, out: &mut Output) -> Result<(), CliError> {
    let start = Instant::now();
    let setup = ctx.config.resolve()?;
    let mut checks = step_halving(ctx, &setup)?;
    checks.extend(table_checks(ctx, &setup)?);
    if ctx.config.validate.oracle {
        checks.extend(oracle_checks(ctx, &setup)?);
    }
    for c in &checks {
        println!(
            "{} {}: {:.3e} (tolerance {:.1e}) {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.tolerance,
            c.detail
        );
    }
    let report: Vec<_> = checks
        .iter()
        .map(|c| json!({ "name": c.name, "pass": c.pass, "measured": c.measured, "tolerance": c.tolerance, "detail": c.detail }))
        .collect();
    let grid = setup.grid(&ctx.config.grid, setup.snapshot_time())?;
    let extra = json!({ "setup": setup_json(&setup), "grid": grid_json(&grid, ctx.config.grid.stride), "checks": report });
    out.sidecar("validate", &metadata(ctx, "validate", start, &[], extra))?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(format!("failed checks: {}", failed.join(", "))))
    }
}
