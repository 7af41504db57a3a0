//! Black-box tests of the command-line binary: artifacts, exit codes,
//! config layering, and byte determinism.

use std::path::Path;
use std::process::{Command, Output};

fn vkoga(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vkoga"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn assert_code(out: &Output, code: i32, context: &str) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "{context}: stdout={} stderr={}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn synth_fit_predict_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    let out = vkoga(
        &[
            "synth",
            "--generator",
            "franke-vec",
            "--n",
            "80",
            "--d",
            "2",
            "--q",
            "2",
            "--seed",
            "4",
            "--out",
            "s",
        ],
        d,
    );
    assert_code(&out, 0, "synth");
    assert!(d.join("s/dataset.csv").is_file());

    let out = vkoga(
        &[
            "fit",
            "--data",
            "s/dataset.csv",
            "--eps",
            "2",
            "--max-points",
            "30",
            "--split",
            "0.8",
            "--seed",
            "1",
            "--out",
            "f",
        ],
        d,
    );
    assert_code(&out, 0, "fit");
    for name in ["model.json", "trace.csv", "metrics.json"] {
        assert!(d.join("f").join(name).is_file(), "missing {name}");
    }
    let trace = std::fs::read_to_string(d.join("f/trace.csv")).unwrap();
    assert!(trace.starts_with("iteration,chosen_index,power_at_chosen,max_residual_norm,rmse\n"));
    let metrics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("f/metrics.json")).unwrap()).unwrap();
    assert!(metrics["train"]["e_rmse"].as_f64().unwrap().is_finite());
    assert!(metrics["test"]["e_rmse"].as_f64().unwrap().is_finite());

    let out = vkoga(
        &[
            "predict",
            "--model",
            "f/model.json",
            "--data",
            "s/dataset.csv",
            "--out",
            "p",
        ],
        d,
    );
    assert_code(&out, 0, "predict");

    // The prediction file uses the dataset schema, so it loads as a dataset,
    // and its outputs match in-process prediction exactly.
    let original = vkoga::load_csv(d.join("s/dataset.csv")).unwrap();
    let predicted = vkoga::load_csv(d.join("p/predictions.csv")).unwrap();
    assert_eq!(predicted.len(), original.len());
    assert_eq!(predicted.dim_in(), original.dim_in());
    assert_eq!(predicted.dim_out(), original.dim_out());
    let model = vkoga::Surrogate::load(d.join("f/model.json")).unwrap();
    let expect = model.predict(original.inputs()).unwrap();
    for (i, row) in expect.iter().enumerate() {
        assert_eq!(predicted.input(i), original.input(i));
        assert_eq!(predicted.output(i), &row[..]);
    }
}

#[test]
fn zero_targets_give_an_empty_model() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = vkoga(
        &[
            "fit",
            "--generator",
            "zero",
            "--n",
            "40",
            "--d",
            "2",
            "--q",
            "1",
            "--out",
            "z",
        ],
        d,
    );
    assert_code(&out, 0, "fit on zero targets");
    let model = vkoga::Surrogate::load(d.join("z/model.json")).unwrap();
    assert_eq!(model.n_centers(), 0);
    let preds = model.predict(&[vec![0.3, -0.4]]).unwrap();
    assert_eq!(preds, vec![vec![0.0]]);
}

#[test]
fn omitted_gamma_equals_explicit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    vkoga(
        &[
            "synth",
            "--generator",
            "franke-vec",
            "--n",
            "60",
            "--d",
            "2",
            "--q",
            "2",
            "--seed",
            "9",
            "--out",
            "s",
        ],
        d,
    );
    let base = &[
        "fit",
        "--data",
        "s/dataset.csv",
        "--eps",
        "2",
        "--max-points",
        "20",
    ];
    let out = vkoga(&[base, &["--out", "a"][..]].concat(), d);
    assert_code(&out, 0, "fit without gamma");
    let out = vkoga(&[base, &["--gamma", "0", "--out", "b"][..]].concat(), d);
    assert_code(&out, 0, "fit with explicit gamma 0");
    for name in ["model.json", "trace.csv", "metrics.json"] {
        let a = std::fs::read(d.join("a").join(name)).unwrap();
        let b = std::fs::read(d.join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs");
    }
}

#[test]
fn config_file_layers_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    vkoga(
        &[
            "synth",
            "--generator",
            "franke-vec",
            "--n",
            "60",
            "--d",
            "2",
            "--q",
            "1",
            "--seed",
            "2",
            "--out",
            "s",
        ],
        d,
    );
    std::fs::write(d.join("cfg.json"), r#"{"eps": 2.0, "max_points": 10}"#).unwrap();

    // Config alone caps the selection at 10 centers.
    let out = vkoga(
        &[
            "fit",
            "--data",
            "s/dataset.csv",
            "--config",
            "cfg.json",
            "--out",
            "a",
        ],
        d,
    );
    assert_code(&out, 0, "fit with config");
    let model = vkoga::Surrogate::load(d.join("a/model.json")).unwrap();
    assert_eq!(model.n_centers(), 10);
    assert_eq!(model.kernel().epsilon(), 2.0);

    // A flag overrides the config value for the same field.
    let out = vkoga(
        &[
            "fit",
            "--data",
            "s/dataset.csv",
            "--config",
            "cfg.json",
            "--max-points",
            "5",
            "--out",
            "b",
        ],
        d,
    );
    assert_code(&out, 0, "fit with config and flag");
    let model = vkoga::Surrogate::load(d.join("b/model.json")).unwrap();
    assert_eq!(model.n_centers(), 5);
    assert_eq!(model.kernel().epsilon(), 2.0);

    // Unknown config fields are rejected, not ignored.
    std::fs::write(d.join("bad.json"), r#"{"epsilon": 2.0}"#).unwrap();
    let out = vkoga(
        &[
            "fit",
            "--data",
            "s/dataset.csv",
            "--config",
            "bad.json",
            "--out",
            "c",
        ],
        d,
    );
    assert_code(&out, 1, "unknown config field");
}

#[test]
fn parse_and_input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    let out = vkoga(&["fit", "--data", "missing.csv", "--out", "o"], d);
    assert_code(&out, 1, "missing data file");

    std::fs::write(d.join("bad_cell.csv"), "x0,y0\n1.0,abc\n").unwrap();
    let out = vkoga(&["fit", "--data", "bad_cell.csv", "--out", "o"], d);
    assert_code(&out, 1, "unparseable cell");
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(
        msg.contains("row 2") && msg.contains("column 2"),
        "got: {msg}"
    );

    std::fs::write(d.join("bad_header.csv"), "x0,z0\n1.0,2.0\n").unwrap();
    let out = vkoga(&["fit", "--data", "bad_header.csv", "--out", "o"], d);
    assert_code(&out, 1, "bad header");

    let out = vkoga(
        &[
            "fit",
            "--data",
            "missing.csv",
            "--gamma",
            "1.5",
            "--out",
            "o",
        ],
        d,
    );
    assert_code(&out, 1, "gamma out of range");

    let out = vkoga(&["fit", "--unknown-flag", "--out", "o"], d);
    assert_code(&out, 1, "unknown flag");

    let out = vkoga(&["--help"], d);
    assert_code(&out, 0, "help");
}

#[test]
fn numerical_breakdown_exits_two_and_leaves_no_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // A nearly flat kernel exhausts the grid's numerical capacity long
    // before 200 centers, so the run must fail rather than report rates
    // from a truncated selection.
    let out = vkoga(
        &[
            "theory",
            "--kernel",
            "gaussian",
            "--eps",
            "0.0001",
            "--grid-size",
            "15",
            "--n-min",
            "3",
            "--n-max",
            "200",
            "--out",
            "t",
        ],
        d,
    );
    assert_code(&out, 2, "degenerate theory run");
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("stability"), "got: {msg}");
    assert!(
        !d.join("t/theory_report.json").exists(),
        "partial artifact left behind"
    );
}

#[test]
fn theory_report_matches_in_process_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = vkoga(
        &[
            "theory",
            "--grid-size",
            "12",
            "--n-min",
            "5",
            "--n-max",
            "40",
            "--out",
            "t",
        ],
        d,
    );
    assert_code(&out, 0, "theory");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("t/theory_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["kernel_family"], "linmatern");
    assert_eq!(report["records"].as_array().unwrap().len(), 36);
    assert!(report["power_slope"].as_f64().unwrap() < 0.0);
    assert!(report["lambda_min_slope"].as_f64().unwrap() < 0.0);
}
