//! End-to-end tests of the CLI binary: output formats, determinism, and
//! exit codes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cramer-metrics"))
}

fn temp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cramer_metrics_cli_{name}"));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(path: &Path, text: &str) {
    fs::write(path, text).unwrap();
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

#[test]
fn divergence_outputs_json_values() {
    let dir = temp_dir("divergence");
    let a = dir.join("d0.json");
    let b = dir.join("d1.json");
    write(&a, r#"{"support":[0.0],"probs":[1.0]}"#);
    write(&b, r#"{"support":[1.0],"probs":[1.0]}"#);

    let out = run(&[
        "divergence",
        "--kind",
        "cramer",
        "--dist-a",
        a.to_str().unwrap(),
        "--dist-b",
        b.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["value"], 1.0);

    // Disjoint supports make KL infinite, serialized as the string "inf".
    let out = run(&[
        "divergence",
        "--kind",
        "kl",
        "--dist-a",
        a.to_str().unwrap(),
        "--dist-b",
        b.to_str().unwrap(),
    ]);
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["value"], "inf");
}

#[test]
fn w1_and_l1_agree_on_identical_inputs() {
    let dir = temp_dir("w1l1");
    let a = dir.join("a.json");
    let b = dir.join("b.json");
    write(&a, r#"{"support":[-1.0,0.5,2.0],"probs":[0.2,0.5,0.3]}"#);
    write(&b, r#"{"support":[0.0,1.0],"probs":[0.6,0.4]}"#);
    let w1 = run(&[
        "divergence",
        "--kind",
        "w1",
        "--dist-a",
        a.to_str().unwrap(),
        "--dist-b",
        b.to_str().unwrap(),
    ]);
    let l1 = run(&[
        "divergence",
        "--kind",
        "l1",
        "--dist-a",
        a.to_str().unwrap(),
        "--dist-b",
        b.to_str().unwrap(),
    ]);
    let w: serde_json::Value = serde_json::from_str(&stdout(&w1)).unwrap();
    let l: serde_json::Value = serde_json::from_str(&stdout(&l1)).unwrap();
    assert_eq!(w["value"], l["value"]);
}

#[test]
fn bias_experiments_write_csv_and_enforce_bounds() {
    let dir = temp_dir("bias");
    let out_csv = dir.join("minimax.csv");
    let out = run(&[
        "bias",
        "--experiment",
        "minimax",
        "--m",
        "16",
        "--out",
        out_csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(&out_csv).unwrap();
    assert!(text.starts_with("m,theta_star,theta,true_grad,exp_sample_grad,bias\n"));
    assert_eq!(text.lines().count(), 17);

    let curve_csv = dir.join("curve.csv");
    let out = run(&[
        "bias",
        "--experiment",
        "curve",
        "--m",
        "6",
        "--theta-star",
        "0.6",
        "--out",
        curve_csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(&curve_csv).unwrap();
    assert!(text.starts_with("theta,true_loss,expected_sample_loss\n"));

    let cons_csv = dir.join("consistency.csv");
    let out = run(&[
        "bias",
        "--experiment",
        "consistency",
        "--m",
        "1024",
        "--theta-star",
        "0.3",
        "--theta",
        "0.6",
        "--out",
        cons_csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
}

#[test]
fn toy_runs_are_byte_identical() {
    let dir = temp_dir("toy");
    let config = dir.join("toy.json");
    write(
        &config,
        r#"{"version":1,"target":{"support":[0,1,10],"probs":[0.25,0.5,0.25]},
            "m_list":[1],"steps":1000,"n_seeds":2,"eval_every":250}"#,
    );
    let run_once = |tag: &str| {
        let curves = dir.join(format!("curves_{tag}.csv"));
        let mins = dir.join(format!("mins_{tag}.csv"));
        let out = run(&[
            "toy",
            "--config",
            config.to_str().unwrap(),
            "--out-curves",
            curves.to_str().unwrap(),
            "--out-minimizers",
            mins.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        (fs::read(&curves).unwrap(), fs::read(&mins).unwrap())
    };
    let (c1, m1) = run_once("a");
    let (c2, m2) = run_once("b");
    assert_eq!(c1, c2);
    assert_eq!(m1, m2);
    let text = String::from_utf8(c1).unwrap();
    assert!(text.starts_with("loss,mode,m,seed,step,theta,eval_w1\n"));
    // 5 curves * 2 seeds * (1000/250 + 1) recorded points.
    assert_eq!(text.lines().count() - 1, 5 * 2 * 5);

    // A different seed changes the sample-gradient curves.
    let curves3 = dir.join("curves_c.csv");
    let out = run(&[
        "toy",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "99",
        "--out-curves",
        curves3.to_str().unwrap(),
        "--out-minimizers",
        dir.join("mins_c.csv").to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_ne!(fs::read(&curves3).unwrap(), c2);
}

#[test]
fn ordinal_synth_writes_learning_curves() {
    let dir = temp_dir("ordinal");
    let config = dir.join("ord.json");
    write(
        &config,
        r#"{"version":1,"synth":{"n":400,"d":4,"k":5,"noise":1.0},
            "epochs":2,"n_seeds":2,"batch_sizes":[16],"base_learning_rate":0.05}"#,
    );
    let out_csv = dir.join("curves.csv");
    let out = run(&[
        "ordinal",
        "--config",
        config.to_str().unwrap(),
        "--data",
        "synth",
        "--out",
        out_csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&out_csv).unwrap();
    assert!(text.starts_with("loss,batch,epoch,rmse,w1,nll\n"));
    // 3 losses * 1 batch size * 2 epochs.
    assert_eq!(text.lines().count() - 1, 6);
}

#[test]
fn ordinal_csv_ingestion() {
    let dir = temp_dir("ordinal_csv");
    let data = dir.join("data.csv");
    let mut rows = String::from("target,f1,f2\n");
    for i in 0..40 {
        let y = i % 3;
        rows.push_str(&format!("{y},{},{}\n", i as f64 / 40.0, 1.0 - i as f64 / 40.0));
    }
    write(&data, &rows);
    let config = dir.join("ord.json");
    write(
        &config,
        r#"{"version":1,"bin_values":[0,1,2],"epochs":2,"n_seeds":1,
            "batch_sizes":[4],"base_learning_rate":0.1,"train_frac":0.75}"#,
    );
    let out_csv = dir.join("curves.csv");
    let out = run(&[
        "ordinal",
        "--config",
        config.to_str().unwrap(),
        "--data",
        &format!("csv:{}", data.display()),
        "--out",
        out_csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn gan_losses_golden_batch() {
    let dir = temp_dir("gan");
    let batch = dir.join("batch.json");
    write(
        &batch,
        r#"{"version":1,"x_real":[0.0],"x_gen":[1.0],"x_gen_prime":[-1.0],
            "epsilon":0.5,"lambda":10.0,"transform":{"kind":"identity","dim":1}}"#,
    );
    let out = run(&["gan-losses", "--batch", batch.to_str().unwrap()]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["generator_loss"], 0.0);
    assert_eq!(json["surrogate_loss"], 0.0);
    assert_eq!(json["gradient_penalty"], 10.0);
    assert_eq!(json["critic_loss"], 10.0);
}

#[test]
fn exit_codes_for_bad_inputs() {
    let dir = temp_dir("errors");

    // Unknown flags are errors (clap uses exit code 2).
    let out = bin().args(["bias", "--bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Config schema violations report JSON-pointer paths and exit 2.
    let bad = dir.join("bad.json");
    write(
        &bad,
        r#"{"version":1,"target":{"support":[0,1,10],"probs":"oops"}}"#,
    );
    let out = bin()
        .args([
            "toy",
            "--config",
            bad.to_str().unwrap(),
            "--out-curves",
            dir.join("c.csv").to_str().unwrap(),
            "--out-minimizers",
            dir.join("m.csv").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("/target/probs"), "stderr: {stderr}");

    // Wrong schema version.
    let wrong_version = dir.join("version.json");
    write(
        &wrong_version,
        r#"{"version":3,"target":{"support":[0,1,10],"probs":[0.5,0.25,0.25]}}"#,
    );
    let out = bin()
        .args([
            "toy",
            "--config",
            wrong_version.to_str().unwrap(),
            "--out-curves",
            dir.join("c2.csv").to_str().unwrap(),
            "--out-minimizers",
            dir.join("m2.csv").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Invalid distribution files.
    let invalid = dir.join("invalid_dist.json");
    write(&invalid, r#"{"support":[1.0,0.0],"probs":[0.5,0.5]}"#);
    let out = bin()
        .args([
            "divergence",
            "--kind",
            "cramer",
            "--dist-a",
            invalid.to_str().unwrap(),
            "--dist-b",
            invalid.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_lists_every_subcommand() {
    let out = run(&["--help"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for sub in ["divergence", "bias", "toy", "ordinal", "gan-losses"] {
        assert!(text.contains(sub), "--help is missing {sub}");
    }
}
