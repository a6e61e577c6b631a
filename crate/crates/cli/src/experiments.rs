//! Experiment orchestration: dataset construction from configuration, the
//! eight CLI commands, and the sweep grids. Every output is a
//! deterministic function of (config, seed); each sweep cell records the
//! sub-seed it ran under.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::Serialize;

use vfl_core::data::{
    self, gen_synthetic, load_csv, partition, train_test_split, Dataset, DistKind,
    DistributionSpec, LabelTeacher, PartitionSpec, SyntheticSpec, VerticalDataset,
};
use vfl_core::logreg::{self, InitScheme, LogRegConfig};
use vfl_core::revmul::{self, CorruptionView};
use vfl_core::revsum::{
    assemble_partial_orders, build_assignment, evaluate_alternative, infer_bin_bounds,
    reverse_sums, BinBounds, EncodingPlan, GroupSize, LayoutGeometry, PartialOrder,
};
use vfl_core::revsum::solver::DEFAULT_SEARCH_BUDGET;
use vfl_core::sboost::{
    train_ensemble, train_layout_sim, BoostConfig, BoostResult, Objective,
};

use crate::config::Config;
use crate::error::CliError;
use crate::report::{fmt_f64, write_csv, write_json};

/// Derive a cell-specific seed so every sweep cell reproduces in
/// isolation.
pub fn sub_seed(seed: u64, kind: &str, cell: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in seed.to_le_bytes().iter().chain(kind.as_bytes()).chain(&cell.to_le_bytes()) {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn dist_kind(cfg: &Config, name: &str) -> Result<DistKind, CliError> {
    let p1 = cfg.f64("data.dist.p1", f64::NAN)?;
    let p2 = cfg.f64("data.dist.p2", f64::NAN)?;
    let pick = |v: f64, d: f64| if v.is_nan() { d } else { v };
    Ok(match name {
        "normal" => DistKind::Normal { mean: pick(p1, 0.0), std: pick(p2, 1.0) },
        "bernoulli" => DistKind::Bernoulli { p: pick(p1, 0.5) },
        "exponential" => DistKind::Exponential { rate: pick(p1, 1.0) },
        "uniform" => DistKind::Uniform { lo: pick(p1, 0.0), hi: pick(p2, 50.0) },
        other => return Err(CliError::Config(format!("unknown distribution {other:?}"))),
    })
}

/// Build the centralized dataset named by the config (synthetic columns or
/// a CSV file).
pub fn dataset_from_config(cfg: &Config, seed: u64) -> Result<Dataset, CliError> {
    match cfg.string("data.kind", "synthetic").as_str() {
        "synthetic" => {
            let n = cfg.usize("data.n", 2000)?;
            let d_a = cfg.usize("data.features_a", 4)?;
            let d_b = cfg.usize("data.features_b", 4)?;
            let kind = dist_kind(cfg, &cfg.string("data.dist", "normal"))?;
            // A's columns stay standard normal; the configured distribution
            // shapes B's columns, matching the 1-D synthetic experiments.
            let mut columns = Vec::with_capacity(d_a + d_b);
            for j in 0..d_a {
                columns.push(DistributionSpec {
                    kind: DistKind::Normal { mean: 0.0, std: 1.0 },
                    n,
                    seed: seed.wrapping_mul(1009).wrapping_add(j as u64),
                });
            }
            for j in 0..d_b {
                columns.push(DistributionSpec {
                    kind,
                    n,
                    seed: seed.wrapping_mul(1009).wrapping_add((d_a + j) as u64),
                });
            }
            let teacher = LabelTeacher {
                seed: seed.wrapping_add(0x7ea0),
                noise: cfg.f64("data.label_noise", 0.0)?,
                regression: cfg.bool("data.regression", false)?,
            };
            Ok(gen_synthetic(&SyntheticSpec { columns, teacher })?)
        }
        "csv" => {
            let path = cfg.require("data.csv_path")?;
            let id = cfg.string("data.id_column", "id");
            let label = cfg.string("data.label_column", "label");
            Ok(load_csv(Path::new(path), &id, &label)?)
        }
        other => Err(CliError::Config(format!("unknown data.kind {other:?}"))),
    }
}

pub fn partition_from_config(cfg: &Config, ds: &Dataset) -> Result<VerticalDataset, CliError> {
    let d = ds.x.cols();
    let spec = if let Some(a) = cfg.list::<usize>("partition.a")? {
        let a_set: BTreeSet<usize> = a.iter().copied().collect();
        PartitionSpec {
            a_features: a,
            b_features: (0..d).filter(|j| !a_set.contains(j)).collect(),
        }
    } else {
        let default_a = cfg.usize("data.features_a", 4)?.min(d.saturating_sub(1)).max(1);
        PartitionSpec::head_split(d, cfg.usize("partition.a_count", default_a)?)
    };
    Ok(partition(ds, &spec)?)
}

pub fn logreg_config(cfg: &Config, seed: u64) -> Result<LogRegConfig, CliError> {
    Ok(LogRegConfig {
        epochs: cfg.usize("protocol.epochs", 100)?,
        batch_size: cfg.usize("protocol.batch_size", 50)?,
        learning_rate: cfg.f64("protocol.learning_rate", 0.05)?,
        seed,
        key_bits: cfg.u32("protocol.key_bits", 2048)?,
        init: match cfg.string("protocol.init", "zeros").as_str() {
            "zeros" => InitScheme::Zeros,
            "random" => InitScheme::Random,
            other => {
                return Err(CliError::Config(format!("unknown protocol.init {other:?}")))
            }
        },
        coordinator_updates: cfg.bool("protocol.coordinator_updates", false)?,
    })
}

pub fn boost_config(cfg: &Config, seed: u64) -> Result<BoostConfig, CliError> {
    Ok(BoostConfig {
        trees: cfg.usize("protocol.trees", 1)?,
        max_depth: cfg.usize("protocol.max_depth", 3)?,
        bins: cfg.usize("protocol.bins", 32)?,
        lambda: cfg.f64("protocol.lambda", 1.0)?,
        gamma: cfg.f64("protocol.gamma", 0.0)?,
        shrinkage: cfg.f64("protocol.shrinkage", 0.3)?,
        min_samples: cfg.usize("protocol.min_samples", 2)?,
        objective: match cfg.string("protocol.objective", "logistic").as_str() {
            "logistic" => Objective::Logistic,
            "squared" => Objective::Squared,
            other => {
                return Err(CliError::Config(format!("unknown protocol.objective {other:?}")))
            }
        },
        key_bits: cfg.u32("protocol.key_bits", 2048)?,
        seed,
    })
}

pub fn encoding_plan(cfg: &Config) -> Result<EncodingPlan, CliError> {
    let k = cfg.u32("attack.k", 2)?;
    let b = cfg.u64("attack.b", 2)?;
    let group_size = match cfg.string("attack.group_size", "full").as_str() {
        "full" => GroupSize::Full,
        "digit_safe" => GroupSize::DigitSafe,
        other => return Err(CliError::Config(format!("unknown attack.group_size {other:?}"))),
    };
    Ok(EncodingPlan::with_geometry(k, b, LayoutGeometry::default(), group_size)?)
}

fn out_file(out: &Path, name: &str) -> PathBuf {
    out.join(name)
}

pub fn cmd_gen(cfg: &Config, seed: u64, out: &Path) -> Result<PathBuf, CliError> {
    let ds = dataset_from_config(cfg, seed)?;
    let path = out_file(out, "dataset.csv");
    let mut text = String::from("id,label");
    for name in &ds.feature_names {
        // Feature names become CSV columns; commas inside distribution
        // descriptions would break the format.
        text.push(',');
        text.push_str(&name.replace(',', ";"));
    }
    text.push('\n');
    for i in 0..ds.len() {
        text.push_str(&ds.ids[i]);
        text.push(',');
        text.push_str(&fmt_f64(ds.y[i]));
        for j in 0..ds.x.cols() {
            text.push(',');
            text.push_str(&fmt_f64(ds.x.get(i, j)));
        }
        text.push('\n');
    }
    std::fs::write(&path, text)?;
    Ok(path)
}

#[derive(Serialize)]
struct LogRegModelFile {
    theta_a: Vec<f64>,
    theta_b: Vec<f64>,
    training_accuracy: f64,
}

pub fn cmd_train_logreg(cfg: &Config, seed: u64, out: &Path) -> Result<(), CliError> {
    let ds = dataset_from_config(cfg, seed)?;
    let vd = partition_from_config(cfg, &ds)?;
    let config = logreg_config(cfg, seed)?;
    let result = logreg::train(&vd, &config)?;

    let transcript_path = out_file(out, "transcript.jsonl");
    let file = std::fs::File::create(&transcript_path)?;
    result.transcript.write_jsonl(std::io::BufWriter::new(file))?;
    write_json(&out_file(out, "coordinator_key.json"), &result.coordinator_key)?;
    write_json(
        &out_file(out, "logreg_model.json"),
        &LogRegModelFile {
            training_accuracy: logreg::training_accuracy(&vd, &result.theta_a, &result.theta_b),
            theta_a: result.theta_a,
            theta_b: result.theta_b,
        },
    )?;
    Ok(())
}

pub fn cmd_attack_revmul(cfg: &Config, seed: u64, out: &Path) -> Result<(), CliError> {
    let transcript_path = out_file(out, "transcript.jsonl");
    let file = std::fs::File::open(&transcript_path).map_err(|e| {
        CliError::Config(format!(
            "cannot open {} (run train-logreg first): {e}",
            transcript_path.display()
        ))
    })?;
    let transcript = logreg::Transcript::read_jsonl(std::io::BufReader::new(file))?;
    let key_text = std::fs::read_to_string(out_file(out, "coordinator_key.json"))
        .map_err(|e| CliError::Config(format!("cannot read coordinator key: {e}")))?;
    let keypair: vfl_core::he::Keypair = serde_json::from_str(&key_text)?;

    // Ground truth for error metrics is available for synthetic data.
    let truth = if cfg.string("data.kind", "synthetic") == "synthetic" {
        let ds = dataset_from_config(cfg, seed)?;
        Some(partition_from_config(cfg, &ds)?.x_b)
    } else {
        None
    };

    let view = CorruptionView::corrupted(&transcript, &keypair);
    let report = revmul::attack(&view, truth.as_ref())?;
    write_json(&out_file(out, "revmul_report.json"), &report)?;
    let rows = vec![vec![
        seed.to_string(),
        report.d_b.to_string(),
        report.total_samples.to_string(),
        report.recovered_samples.to_string(),
        fmt_f64(report.leakage_fraction),
        report.batches.iter().map(|b| b.rank).min().unwrap_or(0).to_string(),
        report.max_abs_error.map(fmt_f64).unwrap_or_default(),
    ]];
    write_csv(
        &out_file(out, "revmul_report.csv"),
        "revmul_report.v1",
        &["seed", "d_b", "total_samples", "recovered_samples", "leakage_fraction", "min_rank", "max_abs_error"],
        &rows,
    )?;
    Ok(())
}

#[derive(Serialize)]
struct SboostMetrics {
    training_accuracy: f64,
    trees: usize,
    histogram_nodes: usize,
}

pub fn cmd_train_sboost(cfg: &Config, seed: u64, out: &Path) -> Result<(), CliError> {
    let ds = dataset_from_config(cfg, seed)?;
    let vd = partition_from_config(cfg, &ds)?;
    let config = boost_config(cfg, seed)?;
    let result = train_ensemble(&vd, &config, None)?;
    write_json(&out_file(out, "sboost_model.json"), &result.model)?;
    // One JSON record per node histogram, the attack module's input shape.
    let mut hist = String::new();
    for node in &result.histograms.nodes {
        hist.push_str(&serde_json::to_string(node)?);
        hist.push('\n');
    }
    std::fs::write(out_file(out, "histograms.jsonl"), hist)?;
    write_json(
        &out_file(out, "sboost_metrics.json"),
        &SboostMetrics {
            training_accuracy: vfl_core::sboost::train::training_accuracy(&vd, &result),
            trees: result.model.trees.len(),
            histogram_nodes: result.histograms.nodes.len(),
        },
    )?;
    Ok(())
}

struct RevsumRun {
    train: VerticalDataset,
    test: VerticalDataset,
    result: BoostResult,
    orders: Vec<PartialOrder>,
    report: vfl_core::revsum::SuccessReport,
}

/// The full reverse sum pipeline on a fresh dataset: encode, train,
/// reverse, assemble.
fn revsum_pipeline(cfg: &Config, seed: u64) -> Result<RevsumRun, CliError> {
    let ds = dataset_from_config(cfg, seed)?;
    let (train_ds, test_ds) =
        train_test_split(&ds, cfg.f64("split.train_fraction", 0.8)?, seed);
    let train = partition_from_config(cfg, &train_ds)?;
    let test = partition_from_config(cfg, &test_ds)?;
    let config = boost_config(cfg, seed)?;
    let plan = encoding_plan(cfg)?;
    let table = build_assignment(&plan, train.len(), seed ^ 0xa77);
    let magic = table.magic_words(train.len());
    let result = if cfg.bool("attack.encrypted", false)? {
        train_ensemble(&train, &config, Some(&magic))?
    } else {
        // Integer layout sums: bit-exact to the decrypted histograms,
        // without the Paillier round trips.
        train_layout_sim(&train, &config, Some(&magic))?
    };
    let budget = cfg.u64("attack.budget", DEFAULT_SEARCH_BUDGET)?;
    let recovered = reverse_sums(&result.histograms, &table, 0, budget);
    let (orders, report) = assemble_partial_orders(&recovered, &table, &result.bins_b);
    Ok(RevsumRun { train, test, result, orders, report })
}

pub fn cmd_attack_revsum(cfg: &Config, seed: u64, out: &Path) -> Result<(), CliError> {
    let run = revsum_pipeline(cfg, seed)?;
    write_json(&out_file(out, "revsum_report.json"), &run.report)?;
    write_json(&out_file(out, "partial_orders.json"), &run.orders)?;
    let rows: Vec<Vec<String>> = run
        .report
        .per_feature
        .iter()
        .map(|f| {
            vec![
                seed.to_string(),
                f.feature.to_string(),
                f.encoded.to_string(),
                f.recovered.to_string(),
                f.correct.to_string(),
                fmt_f64(f.success_rate),
            ]
        })
        .collect();
    write_csv(
        &out_file(out, "revsum_report.csv"),
        "revsum_report.v1",
        &["seed", "feature", "encoded", "recovered", "cracked", "success_rate"],
        &rows,
    )?;
    Ok(())
}

fn aux_ids(n: usize, aux_size: usize, seed: u64) -> Vec<usize> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed ^ 0xau64);
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(&mut rng);
    ids.truncate(aux_size.min(n));
    ids.sort_unstable();
    ids
}

fn bounds_for_run(
    run: &RevsumRun,
    aux: &[usize],
) -> Vec<Vec<Option<BinBounds>>> {
    (0..run.train.d_b())
        .map(|j| {
            infer_bin_bounds(
                &run.orders[j],
                aux,
                &run.train.x_b.column(j),
                run.result.bins_b[j].bin_count,
            )
        })
        .collect()
}

pub fn cmd_binmap(cfg: &Config, seed: u64, out: &Path) -> Result<(), CliError> {
    let run = revsum_pipeline(cfg, seed)?;
    let aux_size = cfg.usize("attack.aux_size", 320)?;
    let aux = aux_ids(run.train.len(), aux_size, seed);
    let inferred = bounds_for_run(&run, &aux);
    let mut rows = Vec::new();
    for (feature, bounds) in inferred.iter().enumerate() {
        for (bin, slot) in bounds.iter().enumerate() {
            let (lo, hi, support) = match slot {
                Some(b) => (fmt_f64(b.lo), fmt_f64(b.hi), b.support.to_string()),
                None => (String::new(), String::new(), "0".into()),
            };
            rows.push(vec![
                aux_size.to_string(),
                feature.to_string(),
                bin.to_string(),
                lo,
                hi,
                support,
            ]);
        }
    }
    write_csv(
        &out_file(out, "binmap.csv"),
        "binmap.v1",
        &["aux_size", "feature", "bin", "lo", "hi", "support"],
        &rows,
    )?;
    Ok(())
}

pub fn cmd_alt_model(cfg: &Config, seed: u64, out: &Path) -> Result<(), CliError> {
    let run = revsum_pipeline(cfg, seed)?;
    let aux_size = cfg.usize("attack.aux_size", 320)?;
    let aux = aux_ids(run.train.len(), aux_size, seed);
    let inferred = bounds_for_run(&run, &aux);
    let config = boost_config(cfg, seed)?;
    let report =
        evaluate_alternative(&run.result, &run.train, &run.test, &inferred, &config)?;
    write_json(&out_file(out, "alt_report.json"), &report)?;
    Ok(())
}

pub fn cmd_sweep(cfg: &Config, seed: u64, out: &Path) -> Result<PathBuf, CliError> {
    match cfg.string("sweep.kind", "").as_str() {
        "revmul-batch" => sweep_revmul(cfg, seed, out, true),
        "revmul-lr" => sweep_revmul(cfg, seed, out, false),
        "revsum-dist" => sweep_revsum_dist(cfg, seed, out),
        "revsum-bins" => sweep_revsum_bins(cfg, seed, out),
        "revsum-grid" => sweep_revsum_grid(cfg, seed, out),
        "binmap-aux" => sweep_binmap(cfg, seed, out),
        "alt-parity" => sweep_alt_parity(cfg, seed, out),
        "" => Err(CliError::Config("sweep.kind is required".into())),
        other => Err(CliError::Config(format!("unknown sweep.kind {other:?}"))),
    }
}

/// Rank and leakage against batch size or learning rate.
fn sweep_revmul(cfg: &Config, seed: u64, out: &Path, by_batch: bool) -> Result<PathBuf, CliError> {
    let ds = dataset_from_config(cfg, seed)?;
    let vd = partition_from_config(cfg, &ds)?;
    let base = logreg_config(cfg, seed)?;
    let kind = if by_batch { "revmul-batch" } else { "revmul-lr" };
    let mut rows = Vec::new();
    let cells: Vec<f64> = if by_batch {
        cfg.list::<f64>("sweep.values")?
            .unwrap_or_else(|| vec![25.0, 50.0, 100.0, vd.len() as f64])
    } else {
        cfg.list::<f64>("sweep.values")?.unwrap_or_else(|| vec![0.01, 0.02, 0.05, 0.1])
    };
    for (i, &value) in cells.iter().enumerate() {
        let cell_seed = sub_seed(seed, kind, i as u64);
        let config = if by_batch {
            LogRegConfig { batch_size: value as usize, ..base.clone() }
        } else {
            LogRegConfig { learning_rate: value, ..base.clone() }
        };
        let rendered =
            if by_batch { (value as usize).to_string() } else { fmt_f64(value) };
        let cell = (|| -> Result<Vec<String>, CliError> {
            let result = logreg::train(&vd, &config)?;
            let view = CorruptionView::corrupted(&result.transcript, &result.coordinator_key);
            let report = revmul::attack(&view, Some(&vd.x_b))?;
            let min_rank = report.batches.iter().map(|b| b.rank).min().unwrap_or(0);
            Ok(vec![
                rendered.clone(),
                cell_seed.to_string(),
                "ok".into(),
                min_rank.to_string(),
                report.d_b.to_string(),
                fmt_f64(report.leakage_fraction),
                report.recovered_samples.to_string(),
                report.total_samples.to_string(),
                report.max_abs_error.map(fmt_f64).unwrap_or_default(),
            ])
        })();
        // Partial failures stay in the sweep as error rows.
        rows.push(cell.unwrap_or_else(|e| {
            vec![
                rendered.clone(),
                cell_seed.to_string(),
                format!("error: {e}").replace(',', ";"),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ]
        }));
    }
    let name = if by_batch { "sweep_revmul_batch.csv" } else { "sweep_revmul_lr.csv" };
    let path = out_file(out, name);
    write_csv(
        &path,
        &format!("{kind}.v1"),
        &["value", "sub_seed", "status", "min_rank", "d_b", "leakage_fraction", "recovered_samples", "total_samples", "max_abs_error"],
        &rows,
    )?;
    Ok(path)
}

fn revsum_cell(
    cfg: &Config,
    cell_cfg: &Config,
    cell_seed: u64,
) -> Result<(f64, Vec<(usize, usize, usize, f64)>), CliError> {
    let _ = cfg;
    let run = revsum_pipeline(cell_cfg, cell_seed)?;
    let per: Vec<(usize, usize, usize, f64)> = run
        .report
        .per_feature
        .iter()
        .map(|f| (f.feature, f.encoded, f.correct, f.success_rate))
        .collect();
    Ok((run.report.overall_rate, per))
}

/// Success rate across the four synthetic distributions.
fn sweep_revsum_dist(cfg: &Config, seed: u64, out: &Path) -> Result<PathBuf, CliError> {
    let reps = cfg.usize("sweep.seeds", 1)?.max(1);
    let mut rows = Vec::new();
    for (i, dist) in ["normal", "bernoulli", "exponential", "uniform"].iter().enumerate() {
        for rep in 0..reps {
            let cell_seed = sub_seed(seed, "revsum-dist", (i * reps + rep) as u64);
            let mut cell_cfg = cfg.clone();
            cell_cfg.set("data.dist", dist);
            let row = match revsum_cell(cfg, &cell_cfg, cell_seed) {
                Ok((overall, _)) => vec![
                    dist.to_string(),
                    rep.to_string(),
                    cell_seed.to_string(),
                    "ok".into(),
                    fmt_f64(overall),
                ],
                Err(e) => vec![
                    dist.to_string(),
                    rep.to_string(),
                    cell_seed.to_string(),
                    format!("error: {e}").replace(',', ";"),
                    String::new(),
                ],
            };
            rows.push(row);
        }
    }
    let path = out_file(out, "sweep_revsum_dist.csv");
    write_csv(
        &path,
        "revsum-dist.v1",
        &["distribution", "rep", "sub_seed", "status", "success_rate"],
        &rows,
    )?;
    Ok(path)
}

/// Success rate against the passive party's bin count.
fn sweep_revsum_bins(cfg: &Config, seed: u64, out: &Path) -> Result<PathBuf, CliError> {
    let bins: Vec<usize> =
        cfg.list("sweep.values")?.unwrap_or_else(|| vec![8, 16, 32, 64]);
    let reps = cfg.usize("sweep.seeds", 1)?.max(1);
    let mut rows = Vec::new();
    for (i, &bin_count) in bins.iter().enumerate() {
        for rep in 0..reps {
            let cell_seed = sub_seed(seed, "revsum-bins", (i * reps + rep) as u64);
            let mut cell_cfg = cfg.clone();
            cell_cfg.set("protocol.bins", bin_count);
            let row = match revsum_cell(cfg, &cell_cfg, cell_seed) {
                Ok((overall, _)) => vec![
                    bin_count.to_string(),
                    rep.to_string(),
                    cell_seed.to_string(),
                    "ok".into(),
                    fmt_f64(overall),
                ],
                Err(e) => vec![
                    bin_count.to_string(),
                    rep.to_string(),
                    cell_seed.to_string(),
                    format!("error: {e}").replace(',', ";"),
                    String::new(),
                ],
            };
            rows.push(row);
        }
    }
    let path = out_file(out, "sweep_revsum_bins.csv");
    write_csv(
        &path,
        "revsum-bins.v1",
        &["bins", "rep", "sub_seed", "status", "success_rate"],
        &rows,
    )?;
    Ok(path)
}

/// (k, b) grid with per-feature cracked counts: the attack-parameter table.
fn sweep_revsum_grid(cfg: &Config, seed: u64, out: &Path) -> Result<PathBuf, CliError> {
    let ks: Vec<u32> = cfg.list("sweep.k")?.unwrap_or_else(|| vec![2, 4]);
    let bs: Vec<u64> = cfg.list("sweep.values")?.unwrap_or_else(|| vec![2, 4, 8, 16, 32]);
    let reps = cfg.usize("sweep.seeds", 1)?.max(1);
    let mut rows = Vec::new();
    for (ki, &k) in ks.iter().enumerate() {
        for (bi, &b) in bs.iter().enumerate() {
            for rep in 0..reps {
                let cell = (ki * bs.len() + bi) * reps + rep;
                let cell_seed = sub_seed(seed, "revsum-grid", cell as u64);
                let mut cell_cfg = cfg.clone();
                cell_cfg.set("attack.k", k);
                cell_cfg.set("attack.b", b);
                match revsum_cell(cfg, &cell_cfg, cell_seed) {
                    Ok((_, per_feature)) => {
                        for (feature, encoded, cracked, rate) in per_feature {
                            rows.push(vec![
                                k.to_string(),
                                b.to_string(),
                                rep.to_string(),
                                cell_seed.to_string(),
                                "ok".into(),
                                feature.to_string(),
                                encoded.to_string(),
                                cracked.to_string(),
                                fmt_f64(rate),
                            ]);
                        }
                    }
                    Err(e) => rows.push(vec![
                        k.to_string(),
                        b.to_string(),
                        rep.to_string(),
                        cell_seed.to_string(),
                        format!("error: {e}").replace(',', ";"),
                        String::new(),
                        String::new(),
                        String::new(),
                        String::new(),
                    ]),
                }
            }
        }
    }
    let path = out_file(out, "sweep_revsum_grid.csv");
    write_csv(
        &path,
        "revsum-grid.v1",
        &["k", "b", "rep", "sub_seed", "status", "feature", "encoded", "cracked", "success_rate"],
        &rows,
    )?;
    Ok(path)
}

/// Percentage of bins whose bounds become known, against auxiliary size.
fn sweep_binmap(cfg: &Config, seed: u64, out: &Path) -> Result<PathBuf, CliError> {
    let sizes: Vec<usize> =
        cfg.list("sweep.values")?.unwrap_or_else(|| vec![5, 10, 20, 40, 80, 160, 320]);
    let run = revsum_pipeline(cfg, seed)?;
    let mut rows = Vec::new();
    for (i, &aux_size) in sizes.iter().enumerate() {
        let cell_seed = sub_seed(seed, "binmap-aux", i as u64);
        let aux = aux_ids(run.train.len(), aux_size, cell_seed);
        let inferred = bounds_for_run(&run, &aux);
        for (feature, bounds) in inferred.iter().enumerate() {
            let total = bounds.len();
            let known = bounds.iter().flatten().count();
            // A bin's bounds are exact when they reach the true extremes of
            // its training values.
            let exact = bounds
                .iter()
                .enumerate()
                .filter(|(bin, b)| {
                    let Some(b) = b else { return false };
                    let part = &run.result.bins_b[feature];
                    let members: Vec<f64> = (0..run.train.len())
                        .filter(|&s| part.assignment[s] == *bin)
                        .map(|s| run.train.x_b.get(s, feature))
                        .collect();
                    if members.is_empty() {
                        return false;
                    }
                    let lo = members.iter().cloned().fold(f64::INFINITY, f64::min);
                    let hi = members.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    b.lo == lo && b.hi == hi
                })
                .count();
            rows.push(vec![
                aux_size.to_string(),
                cell_seed.to_string(),
                feature.to_string(),
                total.to_string(),
                known.to_string(),
                fmt_f64(known as f64 / total as f64),
                fmt_f64(exact as f64 / total as f64),
            ]);
        }
    }
    let path = out_file(out, "sweep_binmap.csv");
    write_csv(
        &path,
        "binmap-aux.v1",
        &["aux_size", "sub_seed", "feature", "bins", "inferred_bins", "inferred_fraction", "exact_fraction"],
        &rows,
    )?;
    Ok(path)
}

/// Alternative-classifier accuracy against auxiliary size.
fn sweep_alt_parity(cfg: &Config, seed: u64, out: &Path) -> Result<PathBuf, CliError> {
    let sizes: Vec<usize> =
        cfg.list("sweep.values")?.unwrap_or_else(|| vec![10, 20, 40, 80, 160, 320]);
    let run = revsum_pipeline(cfg, seed)?;
    let config = boost_config(cfg, seed)?;
    let mut rows = Vec::new();
    for (i, &aux_size) in sizes.iter().enumerate() {
        let cell_seed = sub_seed(seed, "alt-parity", i as u64);
        let aux = aux_ids(run.train.len(), aux_size, cell_seed);
        let inferred = bounds_for_run(&run, &aux);
        let row = match evaluate_alternative(&run.result, &run.train, &run.test, &inferred, &config)
        {
            Ok(report) => vec![
                aux_size.to_string(),
                cell_seed.to_string(),
                "ok".into(),
                fmt_f64(report.original_accuracy),
                fmt_f64(report.alternative_accuracy),
                fmt_f64(report.prediction_agreement),
                report.covered_features.len().to_string(),
                report.excluded_features.len().to_string(),
            ],
            Err(e) => vec![
                aux_size.to_string(),
                cell_seed.to_string(),
                format!("error: {e}").replace(',', ";"),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ],
        };
        rows.push(row);
    }
    let path = out_file(out, "sweep_alt_parity.csv");
    write_csv(
        &path,
        "alt-parity.v1",
        &["aux_size", "sub_seed", "status", "original_accuracy", "alternative_accuracy", "agreement", "covered", "excluded"],
        &rows,
    )?;
    Ok(path)
}

// Re-exported for integration tests.
pub use data::Matrix;
