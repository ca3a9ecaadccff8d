use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn waveqed(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_waveqed"))
        .args(args)
        .arg("--set")
        .arg(format!("output.directory={}", dir.display()))
        .output()
        .expect("binary runs")
}

fn sidecar(dir: &Path, stem: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(format!("{stem}.json"))).unwrap()).unwrap()
}

fn rows(dir: &Path, stem: &str) -> Vec<Vec<f64>> {
    fs::read_to_string(dir.join(format!("{stem}.csv")))
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

fn header(dir: &Path, stem: &str) -> String {
    fs::read_to_string(dir.join(format!("{stem}.csv"))).unwrap().lines().nth(1).unwrap().to_string()
}

#[test]
fn initial_density_integrates_to_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = waveqed(dir.path(), &["initial", "--set", "pulse.l_over_w=2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let integral = sidecar(dir.path(), "initial_density")["integral"].as_f64().unwrap();
    assert!((integral - 2.0).abs() < 1e-6, "{integral}");
    assert_eq!(sidecar(dir.path(), "initial_phase_space")["config"]["pulse"]["l_over_w"], 2.0);
}

#[test]
fn initial_phase_space_peaks_follow_the_separation() {
    let dir = tempfile::tempdir().unwrap();
    let maxima = |l: &str| {
        let out = waveqed(dir.path(), &["initial", "--set", &format!("pulse.l_over_w={l}"), "--set", "phase_space.x_points=1000"]);
        assert!(out.status.success());
        let v = sidecar(dir.path(), "initial_phase_space")["maxima_at_p0_relative_to_x0"].clone();
        v.as_array().unwrap().iter().map(|m| m.as_f64().unwrap()).collect::<Vec<_>>()
    };
    let two = maxima("3");
    assert_eq!(two.len(), 2, "{two:?}");
    assert!((two[0] + 3.0).abs() < 0.1 && two[1].abs() < 0.1, "{two:?}");
    assert_eq!(maxima("0").len(), 1);
}

#[test]
fn four_panels_from_one_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("panels.toml");
    fs::write(
        &config,
        "[phase_space]\nx_points = 120\np_points = 48\n\n\
         [panels.a]\ngamma_over_omega = 1.0\nl_over_w = 0.0\n\n\
         [panels.b]\ngamma_over_omega = 1.0\nl_over_w = 2.0\n\n\
         [panels.c]\ngamma_over_omega = 1.0\nl_over_w = 5.0\n\n\
         [panels.d]\ngamma_over_omega = 2.0\nl_over_w = 0.0\n",
    )
    .unwrap();
    let out = waveqed(dir.path(), &["phase-space", "--config", config.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for panel in ["a", "b", "c", "d"] {
        let stem = format!("phase_space_{panel}");
        assert_eq!(header(dir.path(), &stem), "# x [w], p [1/w], f_l [1], f_r [1]");
        let n = rows(dir.path(), &stem).len();
        assert!(n % 48 == 0 && (120..=122).contains(&(n / 48)), "{n}");
        let meta = sidecar(dir.path(), &stem);
        assert_eq!(meta["panel"], panel);
        assert_eq!(meta["t_snap"], 20.0);
        assert!(meta["min_l"].as_f64().unwrap() < 0.0);
    }
    assert_eq!(sidecar(dir.path(), "phase_space_d")["setup"]["gamma_over_omega"], 2.0);
}

#[test]
fn sweep_table_has_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let out = waveqed(
        dir.path(),
        &["sweep", "--set", "sweep.gammas_over_omega=[0.5, 1.0, 2.0]", "--set", "sweep.l_over_w=[0.0, 2.0, 5.0]"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        header(dir.path(), "sweep"),
        "# gamma [Ω], L [w], n_photons [1], N_r [1], N_l [1], N2_r [1], var_r [1], var_l [1], P_end [1]"
    );
    let table = rows(dir.path(), "sweep");
    assert_eq!(table.len(), 9);
    for r in &table {
        assert!((r[3] + r[4] + r[8] - 2.0).abs() < 1e-9);
        assert!(r[6] >= 0.0 && r[3] > 0.0);
    }
}

#[test]
fn uncoupled_emitter_scatters_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = waveqed(dir.path(), &["stats", "--set", "model.gamma_over_omega=0"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = &rows(dir.path(), "stats")[0];
    assert_eq!((r[3], r[4], r[5], r[6], r[8]), (0.0, 2.0, 0.0, 0.0, 0.0));

    let out = waveqed(dir.path(), &["density", "--set", "model.gamma_over_omega=0", "--set", "density.times=[0.0, 10.0]"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(header(dir.path(), "density").contains("rho_r"));
    for r in rows(dir.path(), "density") {
        assert_eq!(r[3], 0.0);
    }
}

#[test]
fn validate_passes_by_default_and_fails_on_a_coarse_step() {
    let dir = tempfile::tempdir().unwrap();
    let out = waveqed(dir.path(), &["validate"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("PASS conservation"));
    assert!(sidecar(dir.path(), "validate")["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));

    let out = waveqed(dir.path(), &["validate", "--set", "grid.dt=0.25"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL step-halving"));
}

#[test]
fn single_photon_validation_includes_the_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let out = waveqed(dir.path(), &["validate", "--set", "pulse.n_photons=1", "--set", "validate.oracle=true"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("PASS oracle-excitation") && text.contains("PASS oracle-reflection"));
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = waveqed(dir.path(), &["stats", "--set", "model.gamma_over_omega=-1", "--set", "pulse.n_photons=0"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("gamma") && err.contains("n_photons"), "{err}");

    let out = waveqed(dir.path(), &["stats", "--set", "nonsense.key=1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = waveqed(dir.path(), &["stats", "--config", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn unwritable_output_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = waveqed(&blocker.join("sub"), &["initial"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let one = tempfile::tempdir().unwrap();
    let two = tempfile::tempdir().unwrap();
    let args = ["phase-space", "--set", "phase_space.x_points=80", "--set", "phase_space.p_points=40"];
    for (dir, threads) in [(&one, "1"), (&two, "4")] {
        let mut a = args.to_vec();
        a.extend(["--threads", threads]);
        assert!(waveqed(dir.path(), &a).status.success());
        let mut a = vec!["spectrum", "--set", "spectrum.points=41", "--set", "spectrum.x_points=201"];
        a.extend(["--threads", threads]);
        assert!(waveqed(dir.path(), &a).status.success());
    }
    for stem in ["phase_space.csv", "spectrum.csv"] {
        assert_eq!(fs::read(one.path().join(stem)).unwrap(), fs::read(two.path().join(stem)).unwrap(), "{stem}");
    }
}

#[test]
fn cache_is_reused_when_parameters_match() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("tables.bin");
    let args = ["phase-space", "--cache", cache.to_str().unwrap(), "--set", "phase_space.x_points=40", "--set", "phase_space.p_points=20"];
    assert!(waveqed(dir.path(), &args).status.success());
    assert_eq!(sidecar(dir.path(), "phase_space")["cache"], "written");
    let first = fs::read(dir.path().join("phase_space.csv")).unwrap();
    assert!(waveqed(dir.path(), &args).status.success());
    assert_eq!(sidecar(dir.path(), "phase_space")["cache"], "hit");
    assert_eq!(fs::read(dir.path().join("phase_space.csv")).unwrap(), first);

    let mut changed = args.to_vec();
    changed.extend(["--set", "model.gamma_over_omega=2"]);
    assert!(waveqed(dir.path(), &changed).status.success());
    assert_eq!(sidecar(dir.path(), "phase_space")["cache"], "replaced");
}

#[test]
fn oversized_tables_suggest_decimation() {
    let dir = tempfile::tempdir().unwrap();
    let out = waveqed(dir.path(), &["phase-space", "--set", "grid.dt=0.001"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid.stride"));
}
