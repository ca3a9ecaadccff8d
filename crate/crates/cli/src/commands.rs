use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Map, Value};
use waveqed_core::correlators::{read_cache, write_cache};
use waveqed_core::model::normalization_nu;
use waveqed_core::observables::*;
use waveqed_core::quadrature::trapezoid;
use waveqed_core::{CorrelatorTables, FreeField, TimeGrid};

use crate::config::{RunConfig, Setup};
use crate::error::CliError;
use crate::output::{Column, Output};

/// Global options shared by every command.
pub struct Context {
    pub config: RunConfig,
    pub cache: Option<PathBuf>,
}

pub(crate) fn setup_json(s: &Setup) -> Value {
    let mut v = json!({
        "gamma_over_omega": s.params.gamma,
        "delta_over_omega": s.params.delta,
        "v_g": s.params.v_g,
        "w": s.spec.width,
        "x0_over_w": s.spec.x0,
        "l_over_w": s.spec.separation,
        "n_photons": s.kind.photons(),
        "g": s.params.coupling(),
    });
    if s.kind.photons() == 2 {
        v["nu"] = json!(normalization_nu(&s.spec));
    }
    v
}

pub(crate) fn grid_json(g: &TimeGrid, stride: usize) -> Value {
    json!({ "dt": g.dt, "steps": g.steps, "t_max": g.t_max(), "stride": stride })
}

/// Sidecar metadata: the resolved configuration plus command-specific fields.
pub(crate) fn metadata(ctx: &Context, command: &str, start: Instant, warnings: &[String], extra: Value) -> Value {
    let mut m = Map::new();
    m.insert("command".into(), json!(command));
    m.insert("config".into(), serde_json::to_value(&ctx.config).expect("config serialises"));
    if let Value::Object(e) = extra {
        m.extend(e);
    }
    m.insert("warnings".into(), json!(warnings));
    m.insert("runtime_seconds".into(), json!(start.elapsed().as_secs_f64()));
    Value::Object(m)
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Tables for `setup` up to `t_max`, through the cache file when one is given.
pub(crate) fn tables(ctx: &Context, setup: &Setup, t_max: f64, cache: Option<&Path>) -> Result<(CorrelatorTables, &'static str), CliError> {
    let grid = setup.grid(&ctx.config.grid, t_max)?;
    let options = setup.table_options(&ctx.config.grid, &grid)?;
    let mut status = "off";
    if let Some(path) = cache {
        status = "written";
        if path.exists() {
            let t = read_cache(path)?;
            if t.params == setup.params && t.spec == setup.spec && t.grid == grid && t.kind == setup.kind && t.correlation.stride() == options.stride {
                return Ok((t, "hit"));
            }
            status = "replaced";
        }
    }
    let t = CorrelatorTables::build(&setup.params, &setup.spec, &grid, setup.kind, options.stride)?;
    if let Some(path) = cache {
        write_cache(path, &t)?;
    }
    Ok((t, status))
}

fn panel_cache(ctx: &Context, name: &Option<String>) -> Option<PathBuf> {
    let base = ctx.cache.as_ref()?;
    Some(match name {
        Some(n) => {
            let mut s = base.clone().into_os_string();
            s.push(format!(".{n}"));
            PathBuf::from(s)
        }
        None => base.clone(),
    })
}

/// Snaps `t` to the nearest node of the tables' grid.
fn snap(tables: &CorrelatorTables, t: f64, warnings: &mut Vec<String>) -> f64 {
    let k = (t / tables.grid.dt).round().min(tables.grid.steps as f64);
    let snapped = tables.grid.time(k as usize);
    if (snapped - t).abs() > 1e-9 * t.max(1.0) {
        warnings.push(format!("snapshot {t} moved to the grid node {snapped}"));
    }
    snapped
}

pub fn initial(ctx: &Context, out: &mut Output) -> Result<(), CliError> {
    let start = Instant::now();
    let cfg = &ctx.config;
    let setup = cfg.resolve()?;
    let spec = setup.spec;
    let free = FreeField::for_spec(&spec);
    let x = linspace(spec.x0 - spec.separation - 6.0 * spec.width, spec.x0 + 6.0 * spec.width, cfg.phase_space.x_points);
    let rho: Vec<f64> = x.iter().map(|&xi| free.density(xi, 0.0, &spec, 1.0)).collect();
    let integral = trapezoid(&rho, x[1] - x[0]);
    const DENSITY: [Column; 2] = [("x", "w"), ("rho", "1/w")];
    out.csv("initial_density", "photon density of the input at t = 0", &DENSITY, x.iter().zip(&rho).map(|(&a, &b)| vec![a, b]))?;
    let meta = metadata(ctx, "initial", start, &[], json!({ "setup": setup_json(&setup), "integral": integral }));
    out.sidecar("initial_density", &meta)?;

    let p = linspace(-cfg.phase_space.p_max, cfg.phase_space.p_max, cfg.phase_space.p_points);
    let axis: Vec<f64> = x.iter().map(|&xi| free.phase_space(xi, 0.0, 0.0, &spec, 1.0)).collect();
    let maxima: Vec<f64> = (1..axis.len() - 1)
        .filter(|&i| axis[i] > axis[i - 1] && axis[i] >= axis[i + 1])
        .map(|i| x[i] - spec.x0)
        .collect();
    let rows = x.iter().flat_map(|&xi| p.iter().map(move |&pj| vec![xi, pj, free.phase_space(xi, pj, 0.0, &spec, 1.0)]));
    const FIELD: [Column; 3] = [("x", "w"), ("p", "1/w"), ("f", "1")];
    out.csv("initial_phase_space", "phase-space distribution of the input at t = 0", &FIELD, rows)?;
    let meta = metadata(ctx, "initial", start, &[], json!({ "setup": setup_json(&setup), "maxima_at_p0_relative_to_x0": maxima }));
    out.sidecar("initial_phase_space", &meta)?;
    Ok(())
}

pub fn phase_space(ctx: &Context, out: &mut Output) -> Result<(), CliError> {
    let cfg = &ctx.config;
    for (name, setup, t) in cfg.panel_setups()? {
        let start = Instant::now();
        let mut warnings = Vec::new();
        let t = t.unwrap_or_else(|| setup.snapshot_time());
        let (tables, cache) = tables(ctx, &setup, t, panel_cache(ctx, &name).as_deref())?;
        let t = snap(&tables, t, &mut warnings);
        let extent = cfg.phase_space.x_extent.unwrap_or(setup.spec.x0.abs() + setup.params.v_g * t);
        let x = aligned_positions(extent, cfg.phase_space.x_points, &tables);
        let p = linspace(-cfg.phase_space.p_max, cfg.phase_space.p_max, cfg.phase_space.p_points);
        let field = phase_space_field(&tables, &x, &p, t)?;
        let stem = match &name {
            Some(n) => format!("phase_space_{n}"),
            None => "phase_space".to_string(),
        };
        let rows = field.x.iter().enumerate().flat_map(|(i, &xi)| {
            let f = &field;
            f.p.iter().enumerate().map(move |(j, &pj)| vec![xi, pj, f.f_l[i][j], f.f_r[i][j]])
        });
        const COLUMNS: [Column; 4] = [("x", "w"), ("p", "1/w"), ("f_l", "1"), ("f_r", "1")];
        out.csv(&stem, &format!("phase-space distributions at t = {t}"), &COLUMNS, rows)?;
        let extra = json!({
            "panel": name,
            "setup": setup_json(&setup),
            "grid": grid_json(&tables.grid, tables.correlation.stride()),
            "cache": cache,
            "t_snap": t,
            "min_l": field.min_l(),
            "max_l": field.max_l(),
            "min_r": field.min_r(),
            "max_r": field.max_r(),
            "imaginary_residue": field.imaginary_residue,
        });
        out.sidecar(&stem, &metadata(ctx, "phase-space", start, &warnings, extra))?;
    }
    Ok(())
}

pub fn density_cmd(ctx: &Context, out: &mut Output) -> Result<(), CliError> {
    let start = Instant::now();
    let cfg = &ctx.config;
    let setup = cfg.resolve()?;
    let mut warnings = Vec::new();
    let times = if cfg.density.times.is_empty() {
        (1..=5).map(|k| setup.snapshot_time() * k as f64 / 5.0).collect()
    } else {
        cfg.density.times.clone()
    };
    let last = times.iter().copied().fold(0.0, f64::max);
    let t_max = cfg.grid.t_max.unwrap_or(last).max(last);
    let (tables, cache) = tables(ctx, &setup, t_max, ctx.cache.as_deref())?;
    let extent = setup.spec.x0.abs() + setup.spec.separation + setup.params.v_g * last;
    let x = aligned_positions(extent, cfg.density.x_points, &tables);
    let mut rows = Vec::new();
    let mut balance = Vec::new();
    for &t in &times {
        let t = snap(&tables, t, &mut warnings);
        let prof = density(&tables, &x, t, &conjugate_momentum_grid(&tables, t, extent))?;
        for i in 0..x.len() {
            rows.push(vec![t, x[i], prof.rho_l[i], prof.rho_r[i], prof.rho_r_shortcut[i]]);
        }
        let b = prof.balance(&tables);
        balance.push(vec![b.t, b.n_l, b.n_r, b.excitation, b.total()]);
    }
    const COLUMNS: [Column; 5] = [("t", "w/v_g"), ("x", "w"), ("rho_l", "1/w"), ("rho_r", "1/w"), ("rho_r_shortcut", "1/w")];
    out.csv("density", "transmitted and reflected photon densities", &COLUMNS, rows)?;
    const BALANCE: [Column; 5] = [("t", "w/v_g"), ("N_l", "1"), ("N_r", "1"), ("P", "1"), ("total", "1")];
    out.csv("balance", "photon numbers and emitter excitation", &BALANCE, balance)?;
    let extra = json!({
        "setup": setup_json(&setup),
        "grid": grid_json(&tables.grid, tables.correlation.stride()),
        "cache": cache,
        "times": times,
    });
    let meta = metadata(ctx, "density", start, &warnings, extra);
    out.sidecar("density", &meta)?;
    out.sidecar("balance", &meta)?;
    Ok(())
}

pub fn spectrum_cmd(ctx: &Context, out: &mut Output) -> Result<(), CliError> {
    let start = Instant::now();
    let cfg = &ctx.config;
    let setup = cfg.resolve()?;
    let mut warnings = Vec::new();
    let t_late = cfg.spectrum.t_late.unwrap_or_else(|| setup.late_time());
    let (tables, cache) = tables(ctx, &setup, t_late, ctx.cache.as_deref())?;
    let t_late = snap(&tables, t_late, &mut warnings);
    let omega = linspace(cfg.spectrum.omega_min, cfg.spectrum.omega_max, cfg.spectrum.points);
    let curve = spectrum(&tables, &omega, t_late, cfg.spectrum.x_points)?;
    warnings.extend(curve.warnings.iter().cloned());
    let rows = (0..omega.len()).map(|i| vec![curve.omega[i], curve.n_l[i], curve.n_r[i], curve.n_in[i]]);
    const COLUMNS: [Column; 4] = [("omega", "Ω"), ("n_l", "1/Ω"), ("n_r", "1/Ω"), ("n_in", "1/Ω")];
    out.csv("spectrum", &format!("outgoing spectra at t = {t_late}, frequency offset from the emitter"), &COLUMNS, rows)?;
    let extra = json!({
        "setup": setup_json(&setup),
        "grid": grid_json(&tables.grid, tables.correlation.stride()),
        "cache": cache,
        "t_late": t_late,
        "fwhm_l": curve.fwhm_l(),
        "fwhm_r": curve.fwhm_r(),
        "fwhm_in": curve.fwhm_in(),
    });
    out.sidecar("spectrum", &metadata(ctx, "spectrum", start, &warnings, extra))?;
    Ok(())
}

const STATS: [Column; 9] = [
    ("gamma", "Ω"),
    ("L", "w"),
    ("n_photons", "1"),
    ("N_r", "1"),
    ("N_l", "1"),
    ("N2_r", "1"),
    ("var_r", "1"),
    ("var_l", "1"),
    ("P_end", "1"),
];

fn stats_row(ctx: &Context, setup: &Setup, warnings: &mut Vec<String>) -> Result<(Vec<f64>, TimeGrid), CliError> {
    let t_max = ctx.config.grid.t_max.unwrap_or_else(|| scattering_time(&setup.params, &setup.spec));
    let grid = setup.grid(&ctx.config.grid, t_max)?;
    let st = photon_stats(&setup.params, &setup.spec, &grid, setup.kind)?;
    let label = format!("Γ = {}, L = {}", setup.params.gamma, setup.spec.separation);
    warnings.extend(st.warnings.iter().map(|w| format!("{label}: {w}")));
    let row = vec![
        setup.params.gamma,
        setup.spec.separation,
        st.photons as f64,
        st.n_r,
        st.n_l,
        st.n2_r.unwrap_or(f64::NAN),
        st.var_r.unwrap_or(f64::NAN),
        st.var_l.unwrap_or(f64::NAN),
        st.final_excitation,
    ];
    Ok((row, grid))
}

pub fn stats(ctx: &Context, out: &mut Output) -> Result<(), CliError> {
    let start = Instant::now();
    let setup = ctx.config.resolve()?;
    let mut warnings = Vec::new();
    let (row, grid) = stats_row(ctx, &setup, &mut warnings)?;
    out.csv("stats", "outgoing photon numbers and variances", &STATS, [row])?;
    let extra = json!({ "setup": setup_json(&setup), "grid": grid_json(&grid, 1) });
    out.sidecar("stats", &metadata(ctx, "stats", start, &warnings, extra))?;
    Ok(())
}

pub fn sweep(ctx: &Context, out: &mut Output) -> Result<(), CliError> {
    let start = Instant::now();
    let cfg = &ctx.config;
    cfg.resolve()?;
    let mut warnings = Vec::new();
    let mut rows = Vec::new();
    for &l in &cfg.sweep.l_over_w {
        for &gamma in &cfg.sweep.gammas_over_omega {
            let mut cell = cfg.clone();
            cell.model.gamma_over_omega = gamma;
            cell.pulse.l_over_w = l;
            let setup = cell.resolve()?;
            rows.push(stats_row(ctx, &setup, &mut warnings)?.0);
        }
    }
    out.csv("sweep", "photon statistics over the decay rate and the separation", &STATS, rows)?;
    out.sidecar("sweep", &metadata(ctx, "sweep", start, &warnings, json!({})))?;
    Ok(())
}
