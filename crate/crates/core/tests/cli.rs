use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use reactive_settling::induction::BatchCurve;
use reactive_settling::io::{read_batch_curve, read_table, write_batch_curve, FittedParams, RunConfig};

fn sst() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sst"));
    cmd.env_remove("SST_OUTPUT_DIR");
    cmd
}

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn run(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("sst runs");
    if !out.status.success() {
        eprintln!("stdout:\n{}", String::from_utf8_lossy(&out.stdout));
        eprintln!("stderr:\n{}", String::from_utf8_lossy(&out.stderr));
    }
    out
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn help_and_usage_errors() {
    let out = run(sst().arg("--help"));
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for sub in ["simulate", "batch", "transform", "fit-settling", "fit-dispersion", "validate"] {
        assert!(text.contains(sub), "{sub} missing from help");
    }
    assert_eq!(run(sst().arg("frobnicate")).status.code(), Some(1));
    assert_eq!(run(&mut sst()).status.code(), Some(1));
}

#[test]
fn malformed_config_names_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    write(&cfg, "[tank]\nlayers = 40\nheight_above_feed = \"tall\"\n");
    let out = run(sst().arg("-c").arg(&cfg).arg("-o").arg(dir.path()).arg("batch"));
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.toml:3:"), "{err}");

    write(&cfg, "[settling]\neta = 0.5\n");
    let out = run(sst().arg("-c").arg(&cfg).arg("-o").arg(dir.path()).arg("batch"));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("eta"));
}

#[test]
fn numerical_failure_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("overfull.toml");
    write(&cfg, "[initial]\nparticulates = [2e6, 0.0, 0.0, 0.0, 0.0, 0.0]\n");
    let out = run(sst().arg("-c").arg(&cfg).arg("-o").arg(dir.path()).arg("simulate"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn batch_curves_round_trip_and_output_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let env_dir = dir.path().join("from_env");
    let flag_dir = dir.path().join("from_flag");
    let cfg = dir.path().join("cfg.toml");
    write(
        &cfg,
        &format!("[output]\ndir = {:?}\n[batch.options]\nlayers = 40\n", dir.path().join("from_config")),
    );

    let out = run(sst().arg("-c").arg(&cfg).args(["batch", "--x-init", "1.5,3.2"]));
    assert!(out.status.success());
    assert!(dir.path().join("from_config/batch_x1.50.csv").exists());

    let out = run(sst().env("SST_OUTPUT_DIR", &env_dir).arg("-c").arg(&cfg).args(["batch", "--x-init", "2.5"]));
    assert!(out.status.success());
    assert!(env_dir.join("batch_x2.50.csv").exists());

    let out = run(sst()
        .env("SST_OUTPUT_DIR", &env_dir)
        .arg("-c")
        .arg(&cfg)
        .arg("-o")
        .arg(&flag_dir)
        .args(["batch", "--x-init", "2.0"]));
    assert!(out.status.success());
    assert!(flag_dir.join("batch_x2.00.csv").exists());
    assert!(!env_dir.join("batch_x2.00.csv").exists());

    // every default that was applied is echoed
    let echo = RunConfig::load(&flag_dir.join("resolved_config.toml")).unwrap();
    assert_eq!(echo.batch.x_init, vec![2.0]);
    assert_eq!(echo.batch.options.layers, 40);
    assert_eq!(echo.settling, RunConfig::default().settling);

    let path = flag_dir.join("batch_x2.00.csv");
    let curve = read_batch_curve(&path).unwrap();
    assert_eq!(curve.len(), 31);
    assert_eq!(curve.sbl[0], 1.0);
    let copy = dir.path().join("copy.csv");
    write_batch_curve(&copy, &curve).unwrap();
    assert_eq!(std::fs::read(&copy).unwrap(), std::fs::read(&path).unwrap());
}

#[test]
fn transform_leaves_a_curve_without_induction_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("linear.csv");
    let times: Vec<f64> = (0..=10).map(|i| i as f64 * 0.05).collect();
    let sbl: Vec<f64> = times.iter().map(|t| 1.0 - 1.5 * t).collect();
    let curve = BatchCurve::new(times.clone(), sbl, 2.0).unwrap();
    write_batch_curve(&input, &curve).unwrap();
    let out = run(sst().arg("-o").arg(dir.path()).arg("transform").arg(&input));
    assert!(out.status.success());
    let tau = read_batch_curve(&dir.path().join("linear_tau.csv")).unwrap();
    assert_eq!(tau.times, times);
    let fits = read_table(&dir.path().join("induction_fits.csv")).unwrap();
    assert_eq!(fits.rows.len(), 1);
}

#[test]
fn simulate_bundled_scenario_puts_blanket_below_feed() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(sst().arg("-c").arg(bundled("scenario_m.toml")).arg("-o").arg(dir.path()).arg("simulate"));
    assert!(out.status.success());
    let profile = read_table(&dir.path().join("final_profile.csv")).unwrap();
    let z = profile.column("z_m").unwrap();
    let tss = profile.column("tss").unwrap();
    let first = tss.iter().position(|x| *x >= 1000.0).unwrap();
    assert!(z[first] > 0.0, "blanket at {}", z[first]);
    let series = read_table(&dir.path().join("timeseries.csv")).unwrap();
    assert!(series.rows.len() > 2);
    for name in ["sbl_z_m", "tss_effluent", "tss_underflow", "effluent_S_NO", "underflow_X_BH"] {
        assert!(series.column_index(name).is_some(), "{name}");
    }
    let all = read_table(&dir.path().join("profiles.csv")).unwrap();
    assert_eq!(all.rows.len() % 102, 0);
}

#[test]
fn settling_fit_writes_loadable_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    write(&cfg, "[batch.options]\nlayers = 30\n");
    let data = dir.path().join("data");
    let out = run(sst().arg("-c").arg(&cfg).arg("-o").arg(&data).args(["batch", "--x-init", "1.5,2.5,3.2"]));
    assert!(out.status.success());
    let inputs: Vec<PathBuf> = ["1.50", "2.50", "3.20"].iter().map(|x| data.join(format!("batch_x{x}.csv"))).collect();
    let fit_dir = dir.path().join("fit");
    let out = run(sst()
        .arg("-c")
        .arg(&cfg)
        .arg("-o")
        .arg(&fit_dir)
        .args(["fit-settling", "--max-iterations", "20"])
        .args(&inputs));
    assert!(out.status.success());
    let fitted = FittedParams::load(&fit_dir.join("settling_fit.toml")).unwrap();
    let p = fitted.settling.unwrap();
    // data generated at the defaults are already optimal
    assert!((p.v0 / 6.46 - 1.0).abs() < 1e-3, "{p:?}");
    let residuals = read_table(&fit_dir.join("settling_residuals.csv")).unwrap();
    assert_eq!(residuals.rows.len(), 3 * 31);
}

#[test]
fn dispersion_fit_and_validation_workflow() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    write(&cfg, "[tank]\nlayers = 20\n[solver]\nt_end = 2.0\n");
    let data = dir.path().join("steady_M.csv");
    write(
        &data,
        "# measured profile\nz_m,tss,cod,s_o,s_no,s_nh\n-0.6,5.0,18.4,3.3,6.87,0.031\n0.2,4000,18.3,0.1,5.0,0.5\n0.6,8000,18.2,0.0,3.0,1.0\n1.0,9600,18.1,0.0,1.35,1.57\n",
    );
    let fit_dir = dir.path().join("fit");
    let out = run(sst()
        .arg("-c")
        .arg(&cfg)
        .arg("-o")
        .arg(&fit_dir)
        .args(["fit-dispersion", "--mode", "reduced", "--max-iterations", "3"])
        .arg(&data));
    assert!(out.status.success());
    let fitted = FittedParams::load(&fit_dir.join("dispersion_fit.toml")).unwrap();
    let d = fitted.dispersion.unwrap();
    assert_eq!((d.alpha1, d.alpha2), (0.0, 0.0));
    let comparison = read_table(&fit_dir.join("dispersion_comparison.csv")).unwrap();
    assert_eq!(comparison.rows.len(), 4);

    let val_dir = dir.path().join("validate");
    let out = run(sst()
        .arg("-c")
        .arg(&cfg)
        .arg("-o")
        .arg(&val_dir)
        .arg("validate")
        .arg("--params")
        .arg(bundled("fitted_parameters.toml"))
        .arg("--data")
        .arg(dir.path()));
    assert!(out.status.success());
    for label in ["L", "M", "H"] {
        let profile = read_table(&val_dir.join(format!("validate_{label}_profile.csv"))).unwrap();
        assert!(profile.column_index("total_n").is_some());
    }
    assert!(val_dir.join("validate_M_comparison.csv").exists());
    assert!(!val_dir.join("validate_L_comparison.csv").exists());
}

#[test]
fn bundled_files_match_the_built_in_values() {
    use reactive_settling::scenario;
    for (file, sc) in [
        ("scenario_l.toml", scenario::scenario_l()),
        ("scenario_m.toml", scenario::scenario_m()),
        ("scenario_h.toml", scenario::scenario_h()),
    ] {
        let cfg = RunConfig::load(&bundled(file)).unwrap();
        assert_eq!(cfg.scenario.resolve().unwrap(), sc, "{file}");
        assert_eq!(cfg.initial.particulates, scenario::initial_particulates());
        assert_eq!(cfg.initial.solubles, scenario::initial_solubles());
    }
    let fitted = FittedParams::load(&bundled("fitted_parameters.toml")).unwrap();
    assert_eq!(fitted.settling.unwrap(), reactive_settling::SettlingParams::default());
    assert_eq!(fitted.dispersion.unwrap(), reactive_settling::DispersionParams::fitted());
    let text = std::fs::read_to_string(bundled("fitted_parameters.toml")).unwrap();
    let reduced: toml::Table = toml::from_str(&text).unwrap();
    assert_eq!(reduced["dispersion_reduced"]["d_x"].as_float(), Some(0.07044));
}
