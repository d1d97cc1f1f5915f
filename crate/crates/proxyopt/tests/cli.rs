//! End-to-end checks of the `proxyopt` binary: exit codes, file outputs,
//! and seed handling.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_proxyopt"));
    cmd.env_remove("PROXYOPT_SEED");
    cmd
}

fn run(args: &[&str]) -> Output {
    let mut cmd = bin();
    cmd.args(args);
    cmd.output().expect("spawning proxyopt")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("process killed by signal")
}

fn count_data_rows(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().skip(1).count()
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&run(&[])), 2);
    assert_eq!(code(&run(&["sample", "--dim", "2", "--scheme", "dense"])), 2); // missing --function
    assert_eq!(
        code(&run(&["sample", "--function", "langermann", "--dim", "2", "--scheme", "dense"])),
        2
    );
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn runtime_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "optimize", "--ground-truth", "--function", "ackley", "--dim", "2",
        "--opt", "pso", "--iterations", "0",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());

    let out = run(&[
        "figure-data", "--function", "ackley", "--dim", "4", "--scheme", "dense",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn sample_writes_grid_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "sample", "--function", "rastrigin", "--dim", "2", "--scheme", "dense",
        "--n", "100", "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let csv = dir.path().join("samples_rastrigin_2d_dense.csv");
    assert_eq!(count_data_rows(&csv), 100); // 10x10 grid
    let header = fs::read_to_string(&csv).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header, "x0,x1,f");

    let manifest: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("samples_rastrigin_2d_dense.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["command"], "sample");
    assert_eq!(manifest["master_seed"], 0);
    assert!(manifest["outputs"][0].as_str().unwrap().ends_with(".csv"));
}

#[test]
fn seed_env_var_overrides_flag() {
    let dir_env = tempfile::tempdir().unwrap();
    let dir_flag = tempfile::tempdir().unwrap();

    let mut cmd = bin();
    cmd.args([
        "sample", "--function", "ackley", "--dim", "2", "--scheme", "gaussian",
        "--n", "200", "--seed", "1", "--out", dir_env.path().to_str().unwrap(),
    ]);
    cmd.env("PROXYOPT_SEED", "9");
    assert!(cmd.output().unwrap().status.success());

    let out = run(&[
        "sample", "--function", "ackley", "--dim", "2", "--scheme", "gaussian",
        "--n", "200", "--seed", "9", "--out", dir_flag.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);

    let name = "samples_ackley_2d_gaussian.csv";
    assert_eq!(
        fs::read(dir_env.path().join(name)).unwrap(),
        fs::read(dir_flag.path().join(name)).unwrap()
    );

    let mut cmd = bin();
    cmd.args(["sample", "--function", "ackley", "--dim", "2", "--scheme", "dense"]);
    cmd.env("PROXYOPT_SEED", "not-a-number");
    assert_eq!(code(&cmd.output().unwrap()), 1);
}

#[test]
fn sample_train_optimize_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();

    let out = run(&[
        "sample", "--function", "rosenbrock", "--dim", "3", "--scheme", "sparse",
        "--n", "1024", "--out", out_dir,
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = dir.path().join("samples_rosenbrock_3d_sparse.csv");
    assert_eq!(count_data_rows(&csv), 256);

    let out = run(&[
        "train", "--samples", csv.to_str().unwrap(),
        "--function", "rosenbrock", "--dim", "3",
        "--layers", "3,8,8,1", "--epochs", "3",
        "--out", out_dir,
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let model = dir.path().join("model_rosenbrock_3d.mlp");
    assert!(model.is_file());
    assert_eq!(count_data_rows(&dir.path().join("model_rosenbrock_3d_loss.csv")), 3);
    let manifest: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("model_rosenbrock_3d.manifest.json")).unwrap(),
    )
    .unwrap();
    assert!(manifest["config"]["holdout_mse"].as_f64().unwrap().is_finite());

    let out = run(&[
        "optimize", "--model", model.to_str().unwrap(),
        "--function", "rosenbrock", "--dim", "3",
        "--opt", "ga", "--generations", "5", "--seed", "3",
        "--out", out_dir,
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("optimize_rosenbrock_3d_ga.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["trajectory"].as_array().unwrap().len(), 6);
    assert!(report["distance_to_minimum"].as_f64().unwrap().is_finite());

    // Dimension mismatch between the saved model and the request.
    let out = run(&[
        "optimize", "--model", model.to_str().unwrap(),
        "--function", "rosenbrock", "--dim", "2", "--opt", "ga",
        "--out", out_dir,
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn ground_truth_optimize_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = run(&[
            "optimize", "--ground-truth", "--function", "rastrigin", "--dim", "2",
            "--opt", "pso", "--seed", "7", "--iterations", "50",
            "--out", dir.path().to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
    }
    let name = "optimize_rastrigin_2d_pso.json";
    assert_eq!(
        fs::read(a.path().join(name)).unwrap(),
        fs::read(b.path().join(name)).unwrap()
    );
}

#[test]
fn ground_truth_table_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "table", "--dim", "2", "--seeds", "2", "--landscape", "ground-truth",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    // 3 functions x 2 optimizers x 2 seeds.
    let trials = dir.path().join("trials_2d.csv");
    assert_eq!(count_data_rows(&trials), 12);
    let header = fs::read_to_string(&trials).unwrap().lines().next().unwrap().to_string();
    assert_eq!(
        header,
        "function,dim,landscape,optimizer,seed,distance,best_value,evaluations"
    );

    // One summary row per landscape.
    assert_eq!(count_data_rows(&dir.path().join("summary_2d.csv")), 1);

    let manifest: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("table_2d.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["config"]["n_seeds"], 2);
}

#[test]
fn table_config_file_with_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("overrides.json");
    fs::write(
        &config_path,
        r#"{"n_seeds": 3, "iterations": 10, "generations": 10, "master_seed": 42}"#,
    )
    .unwrap();

    // --seeds wins over the file value; iterations/master_seed come from it.
    let out = run(&[
        "table", "--dim", "2", "--seeds", "2", "--landscape", "ground-truth",
        "--function", "ackley", "--opt", "pso",
        "--config", config_path.to_str().unwrap(),
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let manifest: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("table_2d.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["config"]["n_seeds"], 2);
    assert_eq!(manifest["config"]["pso"]["iterations"], 10);
    assert_eq!(manifest["master_seed"], 42);

    fs::write(&config_path, r#"{"swarm": 12}"#).unwrap();
    let out = run(&[
        "table", "--dim", "2", "--landscape", "ground-truth",
        "--config", config_path.to_str().unwrap(),
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1); // unknown config key
}
