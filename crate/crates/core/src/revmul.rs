//! Reverse multiplication attack on the logistic regression protocol.
//!
//! The active party A already holds `[[v]]` and its own u values. Once the
//! coordinator is corrupted, A also holds the secret key and B's decrypted
//! partial gradients, and each batch yields one linear system
//!
//! ```text
//!   g_t^B · x_i^B = (v_{t+1,i} - v_{t,i}) * (-4 / η)
//! ```
//!
//! with one row per pair of successive epochs and one column per sample of
//! the batch. Full row rank over B's feature count means full recovery of
//! `X_S^B`; the numerical rank measures how much leaks otherwise.

use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;

use crate::data::Matrix;
use crate::he::{CodecParams, Keypair};
use crate::logreg::{Transcript, TranscriptRound};

#[derive(Debug, Error, PartialEq)]
pub enum AttackError {
    #[error("operation requires a corrupted coordinator (secret key unavailable)")]
    NotCorrupted,
    #[error("batch seen in {found} rounds; need at least 2 to difference")]
    TooFewRounds { found: usize },
    #[error("batch not present in transcript")]
    UnknownBatch,
    #[error("transcript has no rounds")]
    EmptyTranscript,
}

/// What the adversary (A) can see, plus the coordinator's key when the
/// corruption flag is set. Without corruption no decryption is possible and
/// B's gradients stay opaque.
pub struct CorruptionView<'a> {
    pub transcript: &'a Transcript,
    coordinator_key: Option<&'a Keypair>,
    codec: CodecParams,
}

impl<'a> CorruptionView<'a> {
    pub fn honest(transcript: &'a Transcript) -> Self {
        Self { transcript, coordinator_key: None, codec: CodecParams::signed_default() }
    }

    pub fn corrupted(transcript: &'a Transcript, key: &'a Keypair) -> Self {
        Self { transcript, coordinator_key: Some(key), codec: CodecParams::signed_default() }
    }

    pub fn is_corrupted(&self) -> bool {
        self.coordinator_key.is_some()
    }

    fn key(&self) -> Result<&Keypair, AttackError> {
        self.coordinator_key.ok_or(AttackError::NotCorrupted)
    }

    /// B's partial gradient for a round: part of C's view, so gated.
    pub fn grad_b<'r>(&self, round: &'r TranscriptRound) -> Result<&'r [f64], AttackError> {
        self.key()?;
        Ok(&round.grad_b)
    }
}

/// Per-round isolated products `1/4 θ_t^B x_i^B` for one batch, decoded at
/// the signed-codec scale.
#[derive(Debug, Clone)]
pub struct ExtractedProducts {
    /// (round index, per-sample values), cleanly decoded rounds only.
    pub rounds: Vec<(usize, Vec<f64>)>,
    /// Rounds dropped because a decoded magnitude was implausible.
    pub skipped_rounds: Vec<usize>,
}

/// Values beyond this magnitude cannot come from the protocol's residuals
/// and indicate a decode overflow.
const DECODE_PLAUSIBLE_BOUND: f64 = 1e9;

pub fn extract_products(
    view: &CorruptionView,
    batch: &[usize],
) -> Result<ExtractedProducts, AttackError> {
    let key = view.key()?;
    let rounds = view.transcript.rounds_for_batch(batch);
    if rounds.is_empty() {
        return Err(AttackError::UnknownBatch);
    }
    let n = &key.public.n;
    let scale = (view.codec.frac_bits as f64).exp2();
    let mut out = Vec::with_capacity(rounds.len());
    let mut skipped = Vec::new();
    for round in rounds {
        let mut values = Vec::with_capacity(batch.len());
        let mut ok = true;
        for (pos, cipher) in round.v_cipher.iter().enumerate() {
            let word = match key.decrypt(cipher) {
                Ok(w) => w,
                Err(_) => {
                    ok = false;
                    break;
                }
            };
            let v = view.codec.decode_signed(&word, 1, n);
            // Subtract A's own u exactly as it was encoded.
            let u_rounded = (round.u_plain[pos] * scale).round() / scale;
            let isolated = v - u_rounded;
            if !isolated.is_finite() || isolated.abs() > DECODE_PLAUSIBLE_BOUND {
                ok = false;
                break;
            }
            values.push(isolated);
        }
        if ok {
            out.push((round.round, values));
        } else {
            skipped.push(round.round);
        }
    }
    Ok(ExtractedProducts { rounds: out, skipped_rounds: skipped })
}

/// The per-batch equation family: `M X = R` with the samples of the batch
/// as unknown columns.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub batch: Vec<usize>,
    /// T x d_B, rows are B's decrypted partial gradients.
    pub coefficients: DMatrix<f64>,
    /// T x |S|, differenced products scaled by -4/η.
    pub rhs: DMatrix<f64>,
    pub eps_rank: f64,
}

pub const DEFAULT_EPS_RANK: f64 = 1e-10;

pub fn build_system(view: &CorruptionView, batch: &[usize]) -> Result<LinearSystem, AttackError> {
    let rounds = view.transcript.rounds_for_batch(batch);
    if rounds.len() < 2 {
        return Err(AttackError::TooFewRounds { found: rounds.len() });
    }
    let products = extract_products(view, batch)?;
    let eta = view.transcript.learning_rate;
    let d_b = view.transcript.d_b;

    // Index extracted products by round for pairing.
    let by_round: std::collections::HashMap<usize, &Vec<f64>> =
        products.rounds.iter().map(|(r, v)| (*r, v)).collect();

    let mut rows: Vec<f64> = Vec::new();
    let mut rhs_rows: Vec<f64> = Vec::new();
    let mut t = 0usize;
    for pair in rounds.windows(2) {
        let (prev, next) = (pair[0], pair[1]);
        let (Some(v_prev), Some(v_next)) = (by_round.get(&prev.round), by_round.get(&next.round))
        else {
            continue;
        };
        // θ_B moved by -η times the sum of every partial gradient C
        // decrypted between the two occurrences of this batch, so that sum
        // is the equation row.
        let mut row = vec![0.0; d_b];
        for round in &view.transcript.rounds[prev.round..next.round] {
            for (acc, g) in row.iter_mut().zip(view.grad_b(round)?) {
                *acc += g;
            }
        }
        rows.extend_from_slice(&row);
        for i in 0..batch.len() {
            rhs_rows.push((v_next[i] - v_prev[i]) * (-4.0 / eta));
        }
        t += 1;
    }
    if t == 0 {
        return Err(AttackError::TooFewRounds { found: 1 });
    }
    Ok(LinearSystem {
        batch: batch.to_vec(),
        coefficients: DMatrix::from_row_slice(t, d_b, &rows),
        rhs: DMatrix::from_row_slice(t, batch.len(), &rhs_rows),
        eps_rank: DEFAULT_EPS_RANK,
    })
}

/// Count of singular values above `eps_rank * σ_max`.
pub fn numerical_rank(m: &DMatrix<f64>, eps_rank: f64) -> usize {
    let svd = m.clone().svd(false, false);
    let smax = svd.singular_values.max();
    if smax == 0.0 {
        return 0;
    }
    svd.singular_values.iter().filter(|&&s| s > eps_rank * smax).count()
}

#[derive(Debug, Clone)]
pub struct SystemSolution {
    /// |S| x d_B, recovered sample rows (least-squares when rank-deficient).
    pub recovered: Matrix,
    pub rank: usize,
    pub d_b: usize,
    pub leakage_fraction: f64,
    /// Frobenius norm of `M X - R` at the solution.
    pub residual: f64,
}

/// Least-squares solve of the batch system via SVD pseudo-inverse. With
/// full rank this is exact recovery up to codec noise; otherwise it is the
/// row-space projection and the leakage fraction reports the deficiency.
pub fn solve_system(sys: &LinearSystem) -> SystemSolution {
    let svd = sys.coefficients.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let rank = if smax == 0.0 {
        0
    } else {
        svd.singular_values.iter().filter(|&&s| s > sys.eps_rank * smax).count()
    };
    let d_b = sys.coefficients.ncols();
    let x = svd
        .solve(&sys.rhs, sys.eps_rank * smax)
        .expect("svd computed with singular vectors");
    let residual = (&sys.coefficients * &x - &sys.rhs).norm();
    let mut recovered = Matrix::zeros(sys.batch.len(), d_b);
    for i in 0..sys.batch.len() {
        for j in 0..d_b {
            recovered.set(i, j, x[(j, i)]);
        }
    }
    SystemSolution {
        recovered,
        rank,
        d_b,
        leakage_fraction: rank as f64 / d_b as f64,
        residual,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BatchLeakage {
    pub batch_index: usize,
    pub batch_size: usize,
    pub equations: usize,
    pub rank: usize,
    pub leakage_fraction: f64,
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_abs_error: Option<f64>,
}

/// Attack output over all batches of a run.
#[derive(Debug, Clone, Serialize)]
pub struct LeakageReport {
    pub d_b: usize,
    pub total_samples: usize,
    /// Samples sitting in a full-rank batch.
    pub recovered_samples: usize,
    /// Sample-weighted mean of the per-batch rank / d_B.
    pub leakage_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_abs_error: Option<f64>,
    pub batches: Vec<BatchLeakage>,
    /// Recovered feature matrix, NaN rows where the batch system was
    /// rank-deficient.
    #[serde(skip)]
    pub recovered: Matrix,
}

/// Run the attack over every batch of the transcript. `ground_truth` is
/// the evaluation oracle: when B's true feature matrix is supplied, the
/// report carries reconstruction errors.
pub fn attack(
    view: &CorruptionView,
    ground_truth: Option<&Matrix>,
) -> Result<LeakageReport, AttackError> {
    view.key()?;
    if view.transcript.rounds.is_empty() {
        return Err(AttackError::EmptyTranscript);
    }
    let d_b = view.transcript.d_b;
    let total_samples: usize =
        view.transcript.distinct_batches().iter().map(Vec::len).sum();
    let mut recovered = Matrix::zeros(total_samples, d_b);
    for i in 0..total_samples {
        for j in 0..d_b {
            recovered.set(i, j, f64::NAN);
        }
    }

    let mut batches = Vec::new();
    let mut recovered_samples = 0usize;
    let mut weighted_leakage = 0.0;
    let mut max_err: Option<f64> = None;
    for (bi, batch) in view.transcript.distinct_batches().iter().enumerate() {
        let sys = match build_system(view, batch) {
            Ok(s) => s,
            Err(AttackError::TooFewRounds { .. }) => continue,
            Err(e) => return Err(e),
        };
        let sol = solve_system(&sys);
        let full_rank = sol.rank == d_b;
        if full_rank {
            recovered_samples += batch.len();
        }
        weighted_leakage += sol.leakage_fraction * batch.len() as f64;
        for (pos, &sample) in batch.iter().enumerate() {
            for j in 0..d_b {
                recovered.set(sample, j, sol.recovered.get(pos, j));
            }
        }
        let batch_err = ground_truth.filter(|_| full_rank).map(|truth| {
            let mut worst = 0.0f64;
            for (pos, &sample) in batch.iter().enumerate() {
                for j in 0..d_b {
                    worst = worst.max((sol.recovered.get(pos, j) - truth.get(sample, j)).abs());
                }
            }
            worst
        });
        if let Some(e) = batch_err {
            max_err = Some(max_err.map_or(e, |m: f64| m.max(e)));
        }
        batches.push(BatchLeakage {
            batch_index: bi,
            batch_size: batch.len(),
            equations: sys.coefficients.nrows(),
            rank: sol.rank,
            leakage_fraction: sol.leakage_fraction,
            residual: sol.residual,
            max_abs_error: batch_err,
        });
    }
    Ok(LeakageReport {
        d_b,
        total_samples,
        recovered_samples,
        leakage_fraction: weighted_leakage / total_samples as f64,
        max_abs_error: max_err,
        batches,
        recovered,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logreg::{self, tests::small_dataset, LogRegConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn run(n: usize, d_a: usize, d_b: usize, config: LogRegConfig) -> logreg::TrainResult {
        let data = small_dataset(n, d_a, d_b, 21);
        logreg::train(&data, &config).unwrap()
    }

    fn fast_config(epochs: usize, batch: usize) -> LogRegConfig {
        LogRegConfig {
            epochs,
            batch_size: batch,
            learning_rate: 0.05,
            key_bits: 1088,
            seed: 77,
            ..Default::default()
        }
    }

    /// One-sided Jacobi SVD, independent of nalgebra, used as the rank
    /// oracle.
    fn jacobi_singular_values(m: &DMatrix<f64>) -> Vec<f64> {
        let (rows, cols) = m.shape();
        let mut a: Vec<Vec<f64>> = (0..cols).map(|j| (0..rows).map(|i| m[(i, j)]).collect()).collect();
        for _ in 0..60 {
            let mut off = 0.0f64;
            for p in 0..cols {
                for q in (p + 1)..cols {
                    let app: f64 = a[p].iter().map(|v| v * v).sum();
                    let aqq: f64 = a[q].iter().map(|v| v * v).sum();
                    let apq: f64 = a[p].iter().zip(&a[q]).map(|(x, y)| x * y).sum();
                    off += apq.abs();
                    if apq.abs() < 1e-300 {
                        continue;
                    }
                    let tau = (aqq - app) / (2.0 * apq);
                    let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    for i in 0..rows {
                        let vp = a[p][i];
                        let vq = a[q][i];
                        a[p][i] = c * vp - s * vq;
                        a[q][i] = s * vp + c * vq;
                    }
                }
            }
            if off < 1e-14 {
                break;
            }
        }
        let mut sv: Vec<f64> =
            a.iter().map(|col| col.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
        sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
        sv
    }

    fn jacobi_rank(m: &DMatrix<f64>, eps: f64) -> usize {
        let sv = jacobi_singular_values(m);
        let smax = sv[0];
        if smax == 0.0 {
            return 0;
        }
        sv.iter().filter(|&&s| s > eps * smax).count()
    }

    #[test]
    fn honest_view_cannot_extract_anything() {
        let result = run(12, 2, 2, fast_config(2, 6));
        let view = CorruptionView::honest(&result.transcript);
        let batch = result.transcript.distinct_batches()[0].clone();
        assert_eq!(extract_products(&view, &batch).unwrap_err(), AttackError::NotCorrupted);
        assert_eq!(build_system(&view, &batch).unwrap_err(), AttackError::NotCorrupted);
        assert_eq!(attack(&view, None).unwrap_err(), AttackError::NotCorrupted);
    }

    #[test]
    fn extraction_matches_oracle_snapshots() {
        let result = run(12, 2, 3, fast_config(3, 6));
        let data = small_dataset(12, 2, 3, 21);
        let view = CorruptionView::corrupted(&result.transcript, &result.coordinator_key);
        let tol = (-40f64).exp2() * 2.0;
        for batch in result.transcript.distinct_batches() {
            let extracted = extract_products(&view, &batch).unwrap();
            assert!(extracted.skipped_rounds.is_empty());
            for (round_idx, values) in &extracted.rounds {
                let round = &result.transcript.rounds[*round_idx];
                for (pos, &i) in batch.iter().enumerate() {
                    let oracle: f64 = 0.25
                        * round
                            .oracle
                            .theta_b
                            .iter()
                            .zip(data.x_b.row(i))
                            .map(|(t, x)| t * x)
                            .sum::<f64>();
                    assert!((values[pos] - oracle).abs() <= tol, "{} vs {oracle}", values[pos]);
                }
            }
        }
    }

    #[test]
    fn zero_theta_round_extracts_zeros() {
        // Round 0 runs with θ_B = 0, so every isolated product is 0.
        let result = run(10, 2, 2, fast_config(2, 5));
        let view = CorruptionView::corrupted(&result.transcript, &result.coordinator_key);
        let batch = result.transcript.distinct_batches()[0].clone();
        let extracted = extract_products(&view, &batch).unwrap();
        for &v in &extracted.rounds[0].1 {
            assert!(v.abs() <= (-40f64).exp2());
        }
    }

    #[test]
    fn extraction_is_deterministic() {
        let r1 = run(10, 2, 2, fast_config(3, 5));
        let r2 = run(10, 2, 2, fast_config(3, 5));
        let v1 = CorruptionView::corrupted(&r1.transcript, &r1.coordinator_key);
        let v2 = CorruptionView::corrupted(&r2.transcript, &r2.coordinator_key);
        let batch = r1.transcript.distinct_batches()[0].clone();
        assert_eq!(
            extract_products(&v1, &batch).unwrap().rounds,
            extract_products(&v2, &batch).unwrap().rounds
        );
    }

    #[test]
    fn system_rows_equal_transcript_gradients() {
        // Full-batch run: one round per epoch, so each row is exactly one
        // transcript gradient.
        let result = run(12, 2, 3, fast_config(4, 12));
        let view = CorruptionView::corrupted(&result.transcript, &result.coordinator_key);
        let batch = result.transcript.distinct_batches()[0].clone();
        let sys = build_system(&view, &batch).unwrap();
        // 4 epochs -> 3 differenced rows.
        assert_eq!(sys.coefficients.nrows(), 3);
        let rounds = result.transcript.rounds_for_batch(&batch);
        for (t, round) in rounds[..3].iter().enumerate() {
            for j in 0..3 {
                assert_eq!(sys.coefficients[(t, j)], round.grad_b[j]);
            }
        }
    }

    #[test]
    fn system_rows_sum_gradients_between_occurrences() {
        // Two batches per epoch: rows accumulate both batches' gradients.
        let result = run(12, 2, 3, fast_config(3, 6));
        let view = CorruptionView::corrupted(&result.transcript, &result.coordinator_key);
        let batch = result.transcript.distinct_batches()[0].clone();
        let sys = build_system(&view, &batch).unwrap();
        assert_eq!(sys.coefficients.nrows(), 2);
        let all = &result.transcript.rounds;
        for t in 0..2 {
            for j in 0..3 {
                let want = all[2 * t].grad_b[j] + all[2 * t + 1].grad_b[j];
                assert!((sys.coefficients[(t, j)] - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn too_few_rounds_rejected() {
        let result = run(10, 2, 2, fast_config(1, 5));
        let view = CorruptionView::corrupted(&result.transcript, &result.coordinator_key);
        let batch = result.transcript.distinct_batches()[0].clone();
        assert!(matches!(
            build_system(&view, &batch),
            Err(AttackError::TooFewRounds { found: 1 })
        ));
    }

    #[test]
    fn scalar_system_recovers_single_feature() {
        let result = run(8, 2, 1, fast_config(3, 4));
        let data = small_dataset(8, 2, 1, 21);
        let view = CorruptionView::corrupted(&result.transcript, &result.coordinator_key);
        let batch = result.transcript.distinct_batches()[0].clone();
        let sys = build_system(&view, &batch).unwrap();
        let sol = solve_system(&sys);
        assert_eq!(sol.rank, 1);
        for (pos, &i) in batch.iter().enumerate() {
            assert!((sol.recovered.get(pos, 0) - data.x_b.get(i, 0)).abs() < 1e-6);
        }
    }

    #[test]
    fn numerical_rank_basics() {
        let id = DMatrix::<f64>::identity(3, 3);
        assert_eq!(numerical_rank(&id, DEFAULT_EPS_RANK), 3);
        let repeated =
            DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 1.0, 2.0, 3.0, 1.0, 2.0, 3.0]);
        assert_eq!(numerical_rank(&repeated, DEFAULT_EPS_RANK), 1);
        let zero = DMatrix::<f64>::zeros(2, 2);
        assert_eq!(numerical_rank(&zero, DEFAULT_EPS_RANK), 0);
    }

    #[test]
    fn random_gaussian_matrices_have_full_rank_by_independent_svd() {
        let mut rng = ChaCha20Rng::seed_from_u64(31);
        for case in 0..20 {
            let rows = 6 + case % 5;
            let cols = 4;
            let m = DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0));
            let got = numerical_rank(&m, DEFAULT_EPS_RANK);
            assert_eq!(got, jacobi_rank(&m, DEFAULT_EPS_RANK));
            assert_eq!(got, cols);
        }
    }

    #[test]
    fn rank_agrees_with_jacobi_oracle_on_deficient_matrices() {
        let mut rng = ChaCha20Rng::seed_from_u64(57);
        for _ in 0..10 {
            // Rank-2 by construction: third column is a combination.
            let mut m = DMatrix::from_fn(7, 3, |_, _| rng.gen_range(-1.0..1.0));
            for i in 0..7 {
                m[(i, 2)] = 2.0 * m[(i, 0)] - m[(i, 1)];
            }
            assert_eq!(numerical_rank(&m, DEFAULT_EPS_RANK), 2);
            assert_eq!(jacobi_rank(&m, DEFAULT_EPS_RANK), 2);
        }
    }

    #[test]
    fn monotone_rank_when_adding_rows() {
        let mut rng = ChaCha20Rng::seed_from_u64(99);
        let full = DMatrix::from_fn(8, 4, |_, _| rng.gen_range(-1.0..1.0));
        let mut prev = 0;
        for t in 1..=8 {
            let sub = full.rows(0, t).into_owned();
            let r = numerical_rank(&sub, DEFAULT_EPS_RANK);
            assert!(r >= prev);
            prev = r;
        }
    }

    #[test]
    fn zero_rhs_full_rank_solves_to_zero() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let sys = LinearSystem {
            batch: vec![0, 1],
            coefficients: DMatrix::from_fn(5, 3, |_, _| rng.gen_range(-1.0..1.0)),
            rhs: DMatrix::zeros(5, 2),
            eps_rank: DEFAULT_EPS_RANK,
        };
        let sol = solve_system(&sys);
        assert_eq!(sol.rank, 3);
        for i in 0..2 {
            for j in 0..3 {
                assert!(sol.recovered.get(i, j).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rank_deficient_system_reports_partial_leakage() {
        // Duplicate gradient rows: rank 1 over 2 features.
        let sys = LinearSystem {
            batch: vec![0],
            coefficients: DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0]),
            rhs: DMatrix::from_row_slice(3, 1, &[5.0, 5.0, 5.0]),
            eps_rank: DEFAULT_EPS_RANK,
        };
        let sol = solve_system(&sys);
        assert_eq!(sol.rank, 1);
        assert!(sol.leakage_fraction < 1.0);
        assert!(sol.residual < 1e-9);
    }

    #[test]
    fn full_attack_recovers_all_features() {
        let data = small_dataset(20, 3, 3, 21);
        let config = LogRegConfig {
            epochs: 12,
            batch_size: 10,
            learning_rate: 0.1,
            key_bits: 1088,
            seed: 5,
            ..Default::default()
        };
        let result = logreg::train(&data, &config).unwrap();
        let view = CorruptionView::corrupted(&result.transcript, &result.coordinator_key);
        let report = attack(&view, Some(&data.x_b)).unwrap();
        assert_eq!(report.leakage_fraction, 1.0);
        assert_eq!(report.recovered_samples, 20);
        assert!(report.max_abs_error.unwrap() < 1e-6, "{:?}", report.max_abs_error);
        // System consistency: recovered matrix satisfies every system.
        for b in &report.batches {
            assert!(b.residual < 1e-7);
        }
    }

    #[test]
    fn sparse_run_leaks_partially() {
        // More features than usable equations: 3 epochs -> 2 rows < d_B = 6.
        let data = small_dataset(12, 2, 6, 21);
        let config = LogRegConfig {
            epochs: 3,
            batch_size: 6,
            learning_rate: 0.05,
            key_bits: 1088,
            seed: 9,
            ..Default::default()
        };
        let result = logreg::train(&data, &config).unwrap();
        let view = CorruptionView::corrupted(&result.transcript, &result.coordinator_key);
        let report = attack(&view, Some(&data.x_b)).unwrap();
        assert!(report.leakage_fraction < 1.0);
        assert_eq!(report.recovered_samples, 0);
        for b in &report.batches {
            assert!(b.rank <= 2);
        }
    }

    #[test]
    fn report_serializes_to_json() {
        let result = run(10, 2, 2, fast_config(3, 5));
        let view = CorruptionView::corrupted(&result.transcript, &result.coordinator_key);
        let report = attack(&view, None).unwrap();
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("leakage_fraction"));
    }
}
