//! Run configuration: a TOML file with sections, overridable by `--set`.
//!
//! Everything is dimensionless: rates in units of the pulse bandwidth
//! `Ω = v_g / w`, lengths in units of `w`, times in `w / v_g`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use waveqed_core::correlators::TwoTimeOptions;
use waveqed_core::{InputKind, ModelParams, PulseSpec, TimeGrid};

use crate::error::CliError;

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub pulse: PulseSection,
    pub grid: GridSection,
    pub output: OutputSection,
    pub phase_space: PhaseSpaceSection,
    pub density: DensitySection,
    pub spectrum: SpectrumSection,
    pub sweep: SweepSection,
    /// Named parameter blocks, each overriding `model`/`pulse` and the snapshot time.
    pub panels: BTreeMap<String, PanelSection>,
    pub validate: ValidateSection,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub gamma_over_omega: f64,
    pub delta_over_omega: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self { gamma_over_omega: 1.0, delta_over_omega: 0.0 }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseSection {
    pub x0_over_w: f64,
    pub l_over_w: f64,
    pub n_photons: usize,
}

impl Default for PulseSection {
    fn default() -> Self {
        Self { x0_over_w: -10.0, l_over_w: 0.0, n_photons: 2 }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    /// Defaults to `min(1, 1/Γ, 1/(|Δ| + 1)) / 50`.
    pub dt: Option<f64>,
    /// Defaults depend on the command.
    pub t_max: Option<f64>,
    /// Column decimation of the two-time table.
    pub stride: usize,
    /// Largest table (nodes per axis) built without an explicit stride.
    pub max_nodes: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { dt: None, t_max: None, stride: 1, max_nodes: 4000 }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub format: String,
    /// Significant digits of every number written.
    pub precision: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { directory: PathBuf::from("out"), format: "csv".into(), precision: 17 }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseSpaceSection {
    /// Defaults to `10 + |x0|`.
    pub t: Option<f64>,
    /// Defaults to `|x0| + t`.
    pub x_extent: Option<f64>,
    pub x_points: usize,
    pub p_max: f64,
    pub p_points: usize,
}

impl Default for PhaseSpaceSection {
    fn default() -> Self {
        Self { t: None, x_extent: None, x_points: 400, p_max: 8.0, p_points: 256 }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct DensitySection {
    /// Snapshot times; five evenly spaced times up to `10 + |x0|` when empty.
    pub times: Vec<f64>,
    pub x_points: usize,
}

impl Default for DensitySection {
    fn default() -> Self {
        Self { times: Vec::new(), x_points: 400 }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumSection {
    /// Defaults to `|x0| + L + 6 + 20/Γ`, rounded up.
    pub t_late: Option<f64>,
    pub omega_min: f64,
    pub omega_max: f64,
    pub points: usize,
    pub x_points: usize,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self { t_late: None, omega_min: -4.0, omega_max: 4.0, points: 321, x_points: 801 }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub gammas_over_omega: Vec<f64>,
    pub l_over_w: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { gammas_over_omega: vec![0.25, 0.5, 1.0, 2.0, 4.0], l_over_w: vec![0.0, 2.0, 5.0] }
    }
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct PanelSection {
    pub gamma_over_omega: Option<f64>,
    pub delta_over_omega: Option<f64>,
    pub x0_over_w: Option<f64>,
    pub l_over_w: Option<f64>,
    pub n_photons: Option<usize>,
    pub t: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateSection {
    /// Compare with the discrete-mode propagator (one or two photons only).
    pub oracle: bool,
    pub oracle_modes: usize,
    pub oracle_p_max: f64,
    pub oracle_dt: f64,
    pub oracle_t_max: f64,
}

impl Default for ValidateSection {
    fn default() -> Self {
        Self { oracle: false, oracle_modes: 512, oracle_p_max: 32.0, oracle_dt: 0.01, oracle_t_max: 22.0 }
    }
}

/// Reads `path` (if any) and applies `key=value` overrides, `key` being a
/// dotted path such as `model.gamma_over_omega`.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig, CliError> {
    let mut table = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            toml::from_str::<toml::Table>(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
        None => toml::Table::new(),
    };
    let mut errors = Vec::new();
    for item in overrides {
        if let Err(e) = apply_override(&mut table, item) {
            errors.push(e);
        }
    }
    if !errors.is_empty() {
        return Err(CliError::Config(errors.join("\n")));
    }
    toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))
}

fn apply_override(table: &mut toml::Table, item: &str) -> Result<(), String> {
    let (key, raw) = item.split_once('=').ok_or_else(|| format!("--set {item}: expected key=value"))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|k| k.is_empty()) {
        return Err(format!("--set {item}: malformed key"));
    }
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let (last, parents) = path.split_last().unwrap();
    let mut node = table;
    for k in parents {
        let entry = node.entry(k.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry.as_table_mut().ok_or_else(|| format!("--set {item}: `{k}` is not a section"))?;
    }
    node.insert(last.to_string(), value);
    Ok(())
}

/// Physical setup of one run after validation.
#[derive(Clone, Copy, Debug)]
pub struct Setup {
    pub params: ModelParams,
    pub spec: PulseSpec,
    pub kind: InputKind,
}

impl Setup {
    pub fn grid(&self, cfg: &GridSection, t_max: f64) -> Result<TimeGrid, CliError> {
        let dt = cfg.dt.unwrap_or_else(|| TimeGrid::default_step(&self.params, &self.spec));
        let grid = TimeGrid::new(dt, t_max)?;
        grid.check_resolution(&self.params, &self.spec)?;
        Ok(grid)
    }

    /// Two-time storage options, refusing oversized tables.
    pub fn table_options(&self, cfg: &GridSection, grid: &TimeGrid) -> Result<TwoTimeOptions, CliError> {
        let options = TwoTimeOptions { stride: cfg.stride, keep_g: true, keep_d: false };
        let nodes = grid.steps / cfg.stride.max(1) + 1;
        if nodes > cfg.max_nodes {
            let hint = TwoTimeOptions::decimated(grid, cfg.max_nodes).map(|o| o.stride).unwrap_or(2);
            let megabytes = (nodes * (nodes + 1) / 2 * 16) as f64 / 1e6;
            return Err(CliError::Config(format!(
                "the correlator table would hold {nodes} nodes per axis ({megabytes:.0} MB), above grid.max_nodes = {}; \
                 decimate with --set grid.stride={hint} or raise grid.max_nodes",
                cfg.max_nodes
            )));
        }
        Ok(options)
    }

    /// Default snapshot `(10 w + |x0|)/v_g`.
    pub fn snapshot_time(&self) -> f64 {
        (10.0 * self.spec.width + self.spec.x0.abs()) / self.params.v_g
    }

    pub fn late_time(&self) -> f64 {
        let decay = if self.params.gamma > 0.0 { 20.0 / self.params.gamma } else { 0.0 };
        ((self.spec.x0.abs() + self.spec.separation + 6.0 * self.spec.width) / self.params.v_g + decay).ceil()
    }
}

fn build_setup(model: &ModelSection, pulse: &PulseSection, errors: &mut Vec<String>) -> Option<Setup> {
    let params = ModelParams::new(model.gamma_over_omega, model.delta_over_omega, 1.0).map_err(|e| errors.push(e.to_string()));
    let spec = PulseSpec::new(1.0, pulse.x0_over_w, pulse.l_over_w, pulse.n_photons).map_err(|e| errors.push(e.to_string()));
    Some(Setup { params: params.ok()?, spec: spec.ok()?, kind: InputKind::for_photons(pulse.n_photons) })
}

impl RunConfig {
    /// Checks every section and returns the base setup, or all problems at once.
    pub fn resolve(&self) -> Result<Setup, CliError> {
        let mut errors = Vec::new();
        let base = build_setup(&self.model, &self.pulse, &mut errors);
        for (name, panel) in &self.panels {
            let (model, pulse) = self.panel_sections(panel);
            let mut panel_errors = Vec::new();
            build_setup(&model, &pulse, &mut panel_errors);
            errors.extend(panel_errors.into_iter().map(|e| format!("panel `{name}`: {e}")));
            if let Some(t) = panel.t {
                positive(&mut errors, &format!("panels.{name}.t"), t);
            }
        }
        if let Some(dt) = self.grid.dt {
            positive(&mut errors, "grid.dt", dt);
        }
        if let Some(t) = self.grid.t_max {
            positive(&mut errors, "grid.t_max", t);
        }
        if self.grid.stride == 0 {
            errors.push("grid.stride must be at least 1".into());
        }
        if self.output.format != "csv" {
            errors.push(format!("output.format `{}` is not supported; use \"csv\"", self.output.format));
        }
        if !(1..=17).contains(&self.output.precision) {
            errors.push(format!("output.precision must lie in 1..=17, got {}", self.output.precision));
        }
        if let Some(t) = self.phase_space.t {
            positive(&mut errors, "phase_space.t", t);
        }
        counts(&mut errors, "phase_space.x_points", self.phase_space.x_points);
        counts(&mut errors, "phase_space.p_points", self.phase_space.p_points);
        positive(&mut errors, "phase_space.p_max", self.phase_space.p_max);
        counts(&mut errors, "density.x_points", self.density.x_points);
        for &t in &self.density.times {
            if !(t >= 0.0 && t.is_finite()) {
                errors.push(format!("density.times must be non-negative, got {t}"));
            }
        }
        counts(&mut errors, "spectrum.points", self.spectrum.points);
        counts(&mut errors, "spectrum.x_points", self.spectrum.x_points);
        if !(self.spectrum.omega_max > self.spectrum.omega_min) {
            errors.push("spectrum.omega_max must exceed spectrum.omega_min".into());
        }
        if let Some(t) = self.spectrum.t_late {
            positive(&mut errors, "spectrum.t_late", t);
        }
        if self.validate.oracle_modes < 2 {
            errors.push("validate.oracle_modes must be at least 2".into());
        }
        positive(&mut errors, "validate.oracle_dt", self.validate.oracle_dt);
        positive(&mut errors, "validate.oracle_t_max", self.validate.oracle_t_max);
        positive(&mut errors, "validate.oracle_p_max", self.validate.oracle_p_max);
        match (base, errors.is_empty()) {
            (Some(setup), true) => Ok(setup),
            _ => Err(CliError::Config(errors.join("\n"))),
        }
    }

    pub fn panel_sections(&self, panel: &PanelSection) -> (ModelSection, PulseSection) {
        let model = ModelSection {
            gamma_over_omega: panel.gamma_over_omega.unwrap_or(self.model.gamma_over_omega),
            delta_over_omega: panel.delta_over_omega.unwrap_or(self.model.delta_over_omega),
        };
        let pulse = PulseSection {
            x0_over_w: panel.x0_over_w.unwrap_or(self.pulse.x0_over_w),
            l_over_w: panel.l_over_w.unwrap_or(self.pulse.l_over_w),
            n_photons: panel.n_photons.unwrap_or(self.pulse.n_photons),
        };
        (model, pulse)
    }

    /// Setups of all panels, in name order; the base setup alone when there are none.
    pub fn panel_setups(&self) -> Result<Vec<(Option<String>, Setup, Option<f64>)>, CliError> {
        let base = self.resolve()?;
        if self.panels.is_empty() {
            return Ok(vec![(None, base, self.phase_space.t)]);
        }
        let mut out = Vec::new();
        for (name, panel) in &self.panels {
            let (model, pulse) = self.panel_sections(panel);
            let mut errors = Vec::new();
            let setup = build_setup(&model, &pulse, &mut errors).ok_or_else(|| CliError::Config(errors.join("\n")))?;
            out.push((Some(name.clone()), setup, panel.t.or(self.phase_space.t)));
        }
        Ok(out)
    }
}

fn positive(errors: &mut Vec<String>, name: &str, v: f64) {
    if !(v > 0.0 && v.is_finite()) {
        errors.push(format!("{name} must be positive, got {v}"));
    }
}

fn counts(errors: &mut Vec<String>, name: &str, v: usize) {
    if v < 3 {
        errors.push(format!("{name} must be at least 3, got {v}"));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_create_sections_and_parse_values() {
        let cfg = load(None, &["model.gamma_over_omega=2".into(), "output.directory=results".into(), "sweep.l_over_w=[0, 3]".into()])
            .unwrap();
        assert_eq!(cfg.model.gamma_over_omega, 2.0);
        assert_eq!(cfg.output.directory, PathBuf::from("results"));
        assert_eq!(cfg.sweep.l_over_w, vec![0.0, 3.0]);
    }

    #[test]
    fn problems_are_reported_together() {
        let cfg = load(None, &["model.gamma_over_omega=-1".into(), "pulse.x0_over_w=-2".into(), "grid.stride=0".into()]).unwrap();
        let CliError::Config(msg) = cfg.resolve().unwrap_err() else { panic!() };
        assert_eq!(msg.lines().count(), 3, "{msg}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(load(None, &["model.gama=1".into()]), Err(CliError::Config(_))));
        assert!(matches!(load(None, &["novalue".into()]), Err(CliError::Config(_))));
    }
}
