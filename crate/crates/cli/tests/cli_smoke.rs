//! End-to-end command exercises through the compiled binary: artifact
//! chains, exit codes, and byte-level determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_vfl")
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("exp.conf");
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

fn run_ok(args: &[&str]) {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

const SMALL_DATA: &str = "\
data.n = 40
data.features_a = 2
data.features_b = 2
protocol.key_bits = 1152
seed = 5
";

#[test]
fn gen_is_deterministic_and_loadable() {
    let dir = tempdir("gen");
    let cfg = write_config(&dir, SMALL_DATA);
    let out1 = dir.join("a");
    let out2 = dir.join("b");
    run_ok(&["gen", "--config", cfg.to_str().unwrap(), "--out", out1.to_str().unwrap()]);
    run_ok(&["gen", "--config", cfg.to_str().unwrap(), "--out", out2.to_str().unwrap()]);
    let a = std::fs::read(out1.join("dataset.csv")).unwrap();
    let b = std::fs::read(out2.join("dataset.csv")).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("id,label,"));
    assert_eq!(text.lines().count(), 41);

    // A different seed changes the bytes.
    let out3 = dir.join("c");
    run_ok(&[
        "gen",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "6",
        "--out",
        out3.to_str().unwrap(),
    ]);
    assert_ne!(b, std::fs::read(out3.join("dataset.csv")).unwrap());
}

#[test]
fn logreg_chain_produces_full_recovery_report() {
    let dir = tempdir("logreg");
    let cfg = write_config(
        &dir,
        "data.n = 24\ndata.features_a = 2\ndata.features_b = 2\n\
         protocol.epochs = 6\nprotocol.batch_size = 12\nprotocol.learning_rate = 0.1\n\
         protocol.key_bits = 1152\nseed = 3\n",
    );
    let out = dir.join("out");
    run_ok(&["train-logreg", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(out.join("transcript.jsonl").exists());
    assert!(out.join("coordinator_key.json").exists());
    assert!(out.join("logreg_model.json").exists());

    run_ok(&["attack-revmul", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("revmul_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["leakage_fraction"], 1.0);
    assert!(report["max_abs_error"].as_f64().unwrap() < 1e-6);
    let csv = std::fs::read_to_string(out.join("revmul_report.csv")).unwrap();
    assert!(csv.starts_with("# schema: revmul_report.v1\n"));
}

#[test]
fn attack_without_transcript_is_a_config_error() {
    let dir = tempdir("no-transcript");
    let cfg = write_config(&dir, SMALL_DATA);
    let out = run(&[
        "attack-revmul",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.join("empty").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_config_exits_with_code_two() {
    let dir = tempdir("bad-config");
    let bad = write_config(&dir, "this is not a key value line\n");
    let out = run(&["gen", "--config", bad.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    // batch_size larger than the dataset is rejected as configuration.
    let cfg = write_config(
        &dir,
        "data.n = 10\ndata.features_a = 1\ndata.features_b = 1\n\
         protocol.batch_size = 50\nprotocol.key_bits = 1152\n",
    );
    let out =
        run(&["train-logreg", "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn revsum_chain_writes_reports_bounds_and_parity() {
    let dir = tempdir("revsum");
    let cfg = write_config(
        &dir,
        "data.n = 120\ndata.features_a = 2\ndata.features_b = 2\n\
         protocol.trees = 1\nprotocol.max_depth = 3\nprotocol.bins = 8\n\
         protocol.key_bits = 1152\nattack.k = 2\nattack.b = 2\nattack.aux_size = 96\nseed = 11\n",
    );
    let out = dir.join("out");
    run_ok(&["attack-revsum", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("revsum_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["overall_rate"], 1.0);
    assert!(out.join("partial_orders.json").exists());

    run_ok(&["binmap", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let binmap = std::fs::read_to_string(out.join("binmap.csv")).unwrap();
    assert!(binmap.starts_with("# schema: binmap.v1\n"));
    assert!(binmap.lines().count() > 2);

    run_ok(&["alt-model", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let alt: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("alt_report.json")).unwrap())
            .unwrap();
    assert_eq!(alt["prediction_agreement"], 1.0);
}

#[test]
fn train_sboost_writes_model_and_histograms() {
    let dir = tempdir("sboost");
    let cfg = write_config(
        &dir,
        "data.n = 60\ndata.features_a = 2\ndata.features_b = 2\n\
         protocol.bins = 8\nprotocol.key_bits = 1152\nseed = 2\n",
    );
    let out = dir.join("out");
    run_ok(&["train-sboost", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(out.join("sboost_model.json").exists());
    let hist = std::fs::read_to_string(out.join("histograms.jsonl")).unwrap();
    assert!(hist.lines().count() >= 2);
    let first: serde_json::Value = serde_json::from_str(hist.lines().next().unwrap()).unwrap();
    assert!(first["cells"].is_array());
}

#[test]
fn sweep_outputs_are_byte_identical_across_runs() {
    let dir = tempdir("sweep");
    let cfg = write_config(
        &dir,
        "data.n = 80\ndata.features_a = 2\ndata.features_b = 1\n\
         protocol.bins = 8\nprotocol.key_bits = 1152\n\
         sweep.kind = revsum-bins\nsweep.values = 4,8\nsweep.seeds = 2\nseed = 9\n",
    );
    let out1 = dir.join("a");
    let out2 = dir.join("b");
    run_ok(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out1.to_str().unwrap()]);
    run_ok(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out2.to_str().unwrap()]);
    let a = std::fs::read(out1.join("sweep_revsum_bins.csv")).unwrap();
    assert_eq!(a, std::fs::read(out2.join("sweep_revsum_bins.csv")).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("# schema: revsum-bins.v1\n"));
    // Header plus 2 values x 2 reps.
    assert_eq!(text.lines().count(), 6);

    let bad = write_config(&dir, "sweep.kind = unknown\n");
    let out = run(&["sweep", "--config", bad.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn revmul_batch_sweep_emits_one_row_per_cell() {
    let dir = tempdir("sweep-revmul");
    let cfg = write_config(
        &dir,
        "data.n = 20\ndata.features_a = 2\ndata.features_b = 2\n\
         protocol.epochs = 3\nprotocol.batch_size = 10\nprotocol.key_bits = 1152\n\
         sweep.kind = revmul-batch\nsweep.values = 10,20\nseed = 4\n",
    );
    let out = dir.join("out");
    run_ok(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let text = std::fs::read_to_string(out.join("sweep_revmul_batch.csv")).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 4); // schema comment + header + 2 cells
    assert!(rows[2].starts_with("10,"));
    assert!(rows[3].starts_with("20,"));
    assert!(rows[2].contains(",ok,"));
}

#[test]
fn binmap_and_parity_sweeps_run_end_to_end() {
    let dir = tempdir("sweep-exploit");
    let base = "data.n = 100\ndata.features_a = 2\ndata.features_b = 1\n\
                protocol.bins = 4\nprotocol.key_bits = 1152\nseed = 21\n";
    let cfg = write_config(&dir, &format!("{base}sweep.kind = binmap-aux\nsweep.values = 4,80\n"));
    let out = dir.join("out");
    run_ok(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let text = std::fs::read_to_string(out.join("sweep_binmap.csv")).unwrap();
    assert!(text.starts_with("# schema: binmap-aux.v1\n"));
    // One row per (aux size, feature); bigger aux never knows fewer bins.
    let known: Vec<usize> = text
        .lines()
        .skip(2)
        .map(|l| l.split(',').nth(4).unwrap().parse().unwrap())
        .collect();
    assert_eq!(known.len(), 2);
    assert!(known[1] >= known[0]);

    let cfg2 =
        write_config(&dir, &format!("{base}sweep.kind = alt-parity\nsweep.values = 80\n"));
    run_ok(&["sweep", "--config", cfg2.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let text = std::fs::read_to_string(out.join("sweep_alt_parity.csv")).unwrap();
    assert!(text.lines().nth(2).unwrap().contains(",ok,"));
}

fn tempdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("vfl-cli-test-{tag}-{}", std::process::id()));
    if dir.exists() {
        std::fs::remove_dir_all(&dir).unwrap();
    }
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
