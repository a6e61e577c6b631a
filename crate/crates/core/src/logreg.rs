//! Two-party secure logistic regression with a third-party coordinator.
//!
//! One round on mini-batch S:
//!
//! 1. A computes `[[u]] = [[1/4 θ_A X_S^A - 1/2 Y_S]]` and sends it to B.
//! 2. B computes `[[v]] = [[1/4 θ_B X_S^B]] + [[u]]` (returned to A) and the
//!    per-feature products `[[v]] X_S^B` (sent to C).
//! 3. A computes `[[v]] X_S^A` and sends it to C.
//! 4. C decrypts both products, averages over |S|, and returns the partial
//!    gradients g_A and g_B; both parties apply `θ <- θ - η g`.
//!
//! Every message is appended to a [`Transcript`], which is the attack
//! modules' input. Training is a single-threaded deterministic simulation:
//! identical seeds give bit-identical transcripts.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{Matrix, VerticalDataset};
use crate::he::{self, Ciphertext, CodecParams, HeError, Keypair, PublicKey};

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("empty mini-batch")]
    EmptyBatch,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("protocol abort at step {step}: {source}")]
    Abort {
        step: &'static str,
        #[source]
        source: HeError,
    },
    #[error("transcript parse error: {0}")]
    Transcript(String),
}

fn abort(step: &'static str) -> impl FnOnce(HeError) -> ProtocolError {
    move |source| ProtocolError::Abort { step, source }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitScheme {
    Zeros,
    Random,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogRegConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub key_bits: u32,
    pub init: InitScheme,
    /// When set, C applies the SGD update itself and returns coefficients
    /// instead of gradients. Numerically identical; changes who holds the
    /// update step.
    pub coordinator_updates: bool,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        Self {
            epochs: 1,
            batch_size: 32,
            learning_rate: 0.05,
            seed: 0,
            key_bits: 2048,
            init: InitScheme::Zeros,
            coordinator_updates: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Active,
    Passive,
    Coordinator,
}

/// Per-party mutable training state. Parties hold only the public key; the
/// coordinator owns the keypair.
#[derive(Debug, Clone)]
pub struct PartyState {
    pub role: Role,
    pub theta: Vec<f64>,
    rng: ChaCha20Rng,
}

impl PartyState {
    fn new(role: Role, dim: usize, config: &LogRegConfig) -> Self {
        let tag: u64 = match role {
            Role::Active => 0xA,
            Role::Passive => 0xB,
            Role::Coordinator => 0xC,
        };
        let mut rng = ChaCha20Rng::seed_from_u64(config.seed ^ (tag << 56));
        let theta = match config.init {
            InitScheme::Zeros => vec![0.0; dim],
            InitScheme::Random => (0..dim).map(|_| rng.gen_range(-0.1..0.1)).collect(),
        };
        Self { role, theta, rng }
    }

    fn next_seed(&mut self) -> u64 {
        self.rng.gen()
    }
}

/// Ground-truth values kept for evaluation only. Attack code must never
/// read these; they are not part of any party's legitimate view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundOracle {
    pub theta_a: Vec<f64>,
    pub theta_b: Vec<f64>,
}

/// Everything produced in one protocol round, tagged by who sees what.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptRound {
    pub round: usize,
    pub batch: Vec<usize>,
    /// A's plaintext u values (A computed them itself).
    pub u_plain: Vec<f64>,
    pub u_cipher: Vec<Ciphertext>,
    /// B's masked products, received by A.
    pub v_cipher: Vec<Ciphertext>,
    /// `[[v]] X_S^A`, sent by A to C.
    pub prod_a_cipher: Vec<Ciphertext>,
    /// `[[v]] X_S^B`, sent by B to C.
    pub prod_b_cipher: Vec<Ciphertext>,
    /// Decrypted partial gradients (C's view; returned to A resp. B).
    pub grad_a: Vec<f64>,
    pub grad_b: Vec<f64>,
    /// Coefficients at the start of the round, evaluation-only.
    pub oracle: RoundOracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub public_key: PublicKey,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub coordinator_updates: bool,
    pub d_a: usize,
    pub d_b: usize,
    pub rounds: Vec<TranscriptRound>,
}

impl Transcript {
    /// Rounds touching exactly the given batch, in round order.
    pub fn rounds_for_batch(&self, batch: &[usize]) -> Vec<&TranscriptRound> {
        self.rounds.iter().filter(|r| r.batch == batch).collect()
    }

    /// The distinct batches of the run, in first-appearance order.
    pub fn distinct_batches(&self) -> Vec<Vec<usize>> {
        let mut seen: Vec<Vec<usize>> = Vec::new();
        for r in &self.rounds {
            if !seen.iter().any(|b| *b == r.batch) {
                seen.push(r.batch.clone());
            }
        }
        seen
    }

    /// One JSON record per line: a header record followed by the rounds.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        #[derive(Serialize)]
        struct Header<'a> {
            record: &'static str,
            public_key: &'a PublicKey,
            learning_rate: f64,
            batch_size: usize,
            epochs: usize,
            coordinator_updates: bool,
            d_a: usize,
            d_b: usize,
        }
        let header = Header {
            record: "header",
            public_key: &self.public_key,
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            epochs: self.epochs,
            coordinator_updates: self.coordinator_updates,
            d_a: self.d_a,
            d_b: self.d_b,
        };
        writeln!(w, "{}", serde_json::to_string(&header)?)?;
        for round in &self.rounds {
            writeln!(w, "{}", serde_json::to_string(round)?)?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self, ProtocolError> {
        #[derive(Deserialize)]
        struct Header {
            public_key: PublicKey,
            learning_rate: f64,
            batch_size: usize,
            epochs: usize,
            coordinator_updates: bool,
            d_a: usize,
            d_b: usize,
        }
        let mut lines = r.lines();
        let first = lines
            .next()
            .ok_or_else(|| ProtocolError::Transcript("empty transcript".into()))?
            .map_err(|e| ProtocolError::Transcript(e.to_string()))?;
        let header: Header = serde_json::from_str(&first)
            .map_err(|e| ProtocolError::Transcript(format!("bad header: {e}")))?;
        let mut rounds = Vec::new();
        for line in lines {
            let line = line.map_err(|e| ProtocolError::Transcript(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            rounds.push(
                serde_json::from_str(&line)
                    .map_err(|e| ProtocolError::Transcript(format!("bad round: {e}")))?,
            );
        }
        Ok(Transcript {
            public_key: header.public_key,
            learning_rate: header.learning_rate,
            batch_size: header.batch_size,
            epochs: header.epochs,
            coordinator_updates: header.coordinator_updates,
            d_a: header.d_a,
            d_b: header.d_b,
            rounds,
        })
    }
}

/// Outcome of a full training run. The keypair models the coordinator's
/// key material; handing it to an attack is what "corrupting C" means.
#[derive(Debug, Clone)]
pub struct TrainResult {
    pub theta_a: Vec<f64>,
    pub theta_b: Vec<f64>,
    pub transcript: Transcript,
    pub coordinator_key: Keypair,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Encryption-free gradient oracle: the averaged Taylor residual
/// `1/4 θ x - 1/2 y` times each party's feature block.
pub fn plaintext_gradient(
    theta_a: &[f64],
    theta_b: &[f64],
    x_a: &Matrix,
    x_b: &Matrix,
    y: &[f64],
    batch: &[usize],
) -> Result<(Vec<f64>, Vec<f64>), ProtocolError> {
    if batch.is_empty() {
        return Err(ProtocolError::EmptyBatch);
    }
    let mut grad_a = vec![0.0; x_a.cols()];
    let mut grad_b = vec![0.0; x_b.cols()];
    for &i in batch {
        let residual =
            0.25 * dot(theta_a, x_a.row(i)) + 0.25 * dot(theta_b, x_b.row(i)) - 0.5 * y[i];
        for (j, g) in grad_a.iter_mut().enumerate() {
            *g += residual * x_a.get(i, j);
        }
        for (j, g) in grad_b.iter_mut().enumerate() {
            *g += residual * x_b.get(i, j);
        }
    }
    let inv = 1.0 / batch.len() as f64;
    grad_a.iter_mut().for_each(|g| *g *= inv);
    grad_b.iter_mut().for_each(|g| *g *= inv);
    Ok((grad_a, grad_b))
}

/// The running pieces of a simulation: party states plus the coordinator's
/// key material and the shared codec.
pub struct Simulation<'a> {
    pub data: &'a VerticalDataset,
    pub config: LogRegConfig,
    pub state_a: PartyState,
    pub state_b: PartyState,
    pub keypair: Keypair,
    pub codec: CodecParams,
    pub transcript: Transcript,
}

impl<'a> Simulation<'a> {
    pub fn new(data: &'a VerticalDataset, config: LogRegConfig) -> Result<Self, ProtocolError> {
        if data.is_empty() {
            return Err(ProtocolError::BadConfig("empty dataset".into()));
        }
        let keypair =
            he::paillier::keygen(config.key_bits, config.seed).map_err(abort("keygen"))?;
        let state_a = PartyState::new(Role::Active, data.d_a(), &config);
        let state_b = PartyState::new(Role::Passive, data.d_b(), &config);
        let transcript = Transcript {
            public_key: keypair.public.clone(),
            learning_rate: config.learning_rate,
            batch_size: config.batch_size,
            epochs: config.epochs,
            coordinator_updates: config.coordinator_updates,
            d_a: data.d_a(),
            d_b: data.d_b(),
            rounds: Vec::new(),
        };
        Ok(Self {
            data,
            config,
            state_a,
            state_b,
            keypair,
            codec: CodecParams::signed_default(),
            transcript,
        })
    }

    /// Execute one protocol round on the given batch.
    pub fn run_round(&mut self, batch: &[usize]) -> Result<(), ProtocolError> {
        if batch.is_empty() {
            return Err(ProtocolError::EmptyBatch);
        }
        let pk = self.keypair.public.clone();
        let n = &pk.n;
        let codec = self.codec;
        let data = self.data;
        let oracle = RoundOracle {
            theta_a: self.state_a.theta.clone(),
            theta_b: self.state_b.theta.clone(),
        };

        // Step 2 (A): u = 1/4 θ_A x^A - 1/2 y, encrypted and sent to B.
        let mut u_plain = Vec::with_capacity(batch.len());
        let mut u_cipher = Vec::with_capacity(batch.len());
        for &i in batch {
            let u = 0.25 * dot(&self.state_a.theta, data.x_a.row(i)) - 0.5 * data.y[i];
            let word = codec.encode_signed(u, n).map_err(abort("encode u"))?;
            u_cipher.push(
                he::paillier::encrypt(&pk, &word, self.state_a.next_seed())
                    .map_err(abort("encrypt u"))?,
            );
            u_plain.push(u);
        }

        // Step 2 (B): v = [[1/4 θ_B x^B]] + [[u]], returned to A.
        let mut v_cipher = Vec::with_capacity(batch.len());
        for (pos, &i) in batch.iter().enumerate() {
            let t = 0.25 * dot(&self.state_b.theta, data.x_b.row(i));
            let word = codec.encode_signed(t, n).map_err(abort("encode v"))?;
            let enc = he::paillier::encrypt(&pk, &word, self.state_b.next_seed())
                .map_err(abort("encrypt v"))?;
            v_cipher.push(
                he::paillier::add_cipher(&pk, &enc, &u_cipher[pos]).map_err(abort("mask v"))?,
            );
        }

        // Steps 2b/3: per-feature products [[v]] X_S, sent to C.
        let product = |x: &Matrix, cols: usize| -> Result<Vec<Ciphertext>, ProtocolError> {
            (0..cols)
                .map(|j| {
                    let words: Vec<_> = batch
                        .iter()
                        .map(|&i| codec.encode_signed(x.get(i, j), n))
                        .collect::<Result<_, _>>()
                        .map_err(abort("encode feature"))?;
                    he::paillier::dot_plain(&pk, &words, &v_cipher)
                        .map_err(abort("feature product"))
                })
                .collect()
        };
        let prod_b_cipher = product(&data.x_b, data.d_b())?;
        let prod_a_cipher = product(&data.x_a, data.d_a())?;

        // Step 4 (C): decrypt, average, return the partial gradients.
        let inv = 1.0 / batch.len() as f64;
        let decrypt_grad = |ciphers: &[Ciphertext]| -> Result<Vec<f64>, ProtocolError> {
            ciphers
                .iter()
                .map(|c| {
                    let word = self.keypair.decrypt(c).map_err(abort("decrypt gradient"))?;
                    Ok(codec.decode_signed(&word, 2, n) * inv)
                })
                .collect()
        };
        let grad_a = decrypt_grad(&prod_a_cipher)?;
        let grad_b = decrypt_grad(&prod_b_cipher)?;

        // SGD update; with coordinator_updates the same arithmetic runs at C.
        let eta = self.config.learning_rate;
        for (t, g) in self.state_a.theta.iter_mut().zip(&grad_a) {
            *t -= eta * g;
        }
        for (t, g) in self.state_b.theta.iter_mut().zip(&grad_b) {
            *t -= eta * g;
        }

        self.transcript.rounds.push(TranscriptRound {
            round: self.transcript.rounds.len(),
            batch: batch.to_vec(),
            u_plain,
            u_cipher,
            v_cipher,
            prod_a_cipher,
            prod_b_cipher,
            grad_a,
            grad_b,
            oracle,
        });
        Ok(())
    }
}

/// The mini-batch schedule: one seeded shuffle, partitioned into
/// `ceil(n / batch_size)` batches. The same batch sequence repeats every
/// epoch, which is what lets the reverse multiplication attack pair
/// equations across epochs.
pub fn batch_schedule(n: usize, batch_size: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x0b47_c401);
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        idx.swap(i, j);
    }
    idx.chunks(batch_size).map(|c| c.to_vec()).collect()
}

pub fn train(data: &VerticalDataset, config: &LogRegConfig) -> Result<TrainResult, ProtocolError> {
    validate(data, config)?;
    let mut sim = Simulation::new(data, config.clone())?;
    let batches = batch_schedule(data.len(), config.batch_size, config.seed);
    for _ in 0..config.epochs {
        for batch in &batches {
            sim.run_round(batch)?;
        }
    }
    Ok(TrainResult {
        theta_a: sim.state_a.theta,
        theta_b: sim.state_b.theta,
        transcript: sim.transcript,
        coordinator_key: sim.keypair,
    })
}

fn validate(data: &VerticalDataset, config: &LogRegConfig) -> Result<(), ProtocolError> {
    if config.epochs == 0 {
        return Err(ProtocolError::BadConfig("epochs must be >= 1".into()));
    }
    if config.batch_size == 0 {
        return Err(ProtocolError::BadConfig("batch_size must be >= 1".into()));
    }
    if config.batch_size > data.len() {
        return Err(ProtocolError::BadConfig(format!(
            "batch_size {} exceeds sample count {}",
            config.batch_size,
            data.len()
        )));
    }
    Ok(())
}

/// Pure-plaintext Taylor SGD on the identical batch schedule: the oracle
/// trajectory the encrypted run must track. Returns the final coefficients
/// plus the coefficient pair before every round.
pub fn train_plaintext(
    data: &VerticalDataset,
    config: &LogRegConfig,
) -> Result<(Vec<f64>, Vec<f64>, Vec<(Vec<f64>, Vec<f64>)>), ProtocolError> {
    validate(data, config)?;
    let mut a = PartyState::new(Role::Active, data.d_a(), config);
    let mut b = PartyState::new(Role::Passive, data.d_b(), config);
    let batches = batch_schedule(data.len(), config.batch_size, config.seed);
    let mut trajectory = Vec::new();
    for _ in 0..config.epochs {
        for batch in &batches {
            trajectory.push((a.theta.clone(), b.theta.clone()));
            let (ga, gb) =
                plaintext_gradient(&a.theta, &b.theta, &data.x_a, &data.x_b, &data.y, batch)?;
            for (t, g) in a.theta.iter_mut().zip(&ga) {
                *t -= config.learning_rate * g;
            }
            for (t, g) in b.theta.iter_mut().zip(&gb) {
                *t -= config.learning_rate * g;
            }
        }
    }
    Ok((a.theta, b.theta, trajectory))
}

/// Joint linear score `θ_A x_A + θ_B x_B`.
pub fn predict(
    theta_a: &[f64],
    theta_b: &[f64],
    x_a: &[f64],
    x_b: &[f64],
) -> Result<f64, ProtocolError> {
    if theta_a.len() != x_a.len() {
        return Err(ProtocolError::DimensionMismatch {
            expected: theta_a.len(),
            found: x_a.len(),
        });
    }
    if theta_b.len() != x_b.len() {
        return Err(ProtocolError::DimensionMismatch {
            expected: theta_b.len(),
            found: x_b.len(),
        });
    }
    Ok(dot(theta_a, x_a) + dot(theta_b, x_b))
}

/// Class decision via the Taylor link `1/4 score + 1/2` against 0.5.
pub fn predict_label(theta_a: &[f64], theta_b: &[f64], x_a: &[f64], x_b: &[f64]) -> f64 {
    let score = predict(theta_a, theta_b, x_a, x_b).expect("dimension checked by caller");
    if 0.25 * score + 0.5 >= 0.5 {
        1.0
    } else {
        0.0
    }
}

pub fn training_accuracy(data: &VerticalDataset, theta_a: &[f64], theta_b: &[f64]) -> f64 {
    let hits = (0..data.len())
        .filter(|&i| {
            predict_label(theta_a, theta_b, data.x_a.row(i), data.x_b.row(i)) == data.y[i]
        })
        .count();
    hits as f64 / data.len() as f64
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::data::{
        gen_synthetic, partition, DistKind, DistributionSpec, LabelTeacher, PartitionSpec,
        SyntheticSpec,
    };

    pub(crate) fn small_dataset(n: usize, d_a: usize, d_b: usize, seed: u64) -> VerticalDataset {
        let spec = SyntheticSpec {
            columns: (0..d_a + d_b)
                .map(|j| DistributionSpec {
                    kind: DistKind::Normal { mean: 0.0, std: 1.0 },
                    n,
                    seed: seed * 131 + j as u64,
                })
                .collect(),
            teacher: LabelTeacher::new(seed),
        };
        partition(&gen_synthetic(&spec).unwrap(), &PartitionSpec::head_split(d_a + d_b, d_a))
            .unwrap()
    }

    fn fast_config(seed: u64) -> LogRegConfig {
        LogRegConfig { key_bits: 1088, seed, ..Default::default() }
    }

    #[test]
    fn zero_theta_zero_labels_zero_gradient() {
        let x = Matrix::from_rows(vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        let (ga, gb) =
            plaintext_gradient(&[0.0, 0.0], &[0.0, 0.0], &x, &x, &[0.0, 0.0], &[0, 1]).unwrap();
        assert_eq!(ga, vec![0.0, 0.0]);
        assert_eq!(gb, vec![0.0, 0.0]);
    }

    #[test]
    fn hand_evaluated_single_sample_gradient() {
        // residual = 1/4*4 + 1/4*4 - 1/2 = 1.5 on x = (1, 1).
        let xa = Matrix::from_rows(vec![vec![1.0]]);
        let xb = Matrix::from_rows(vec![vec![1.0]]);
        let (ga, gb) = plaintext_gradient(&[4.0], &[4.0], &xa, &xb, &[1.0], &[0]).unwrap();
        assert_eq!(ga, vec![1.5]);
        assert_eq!(gb, vec![1.5]);
    }

    #[test]
    fn empty_batch_rejected() {
        let x = Matrix::from_rows(vec![vec![1.0]]);
        assert!(matches!(
            plaintext_gradient(&[0.0], &[0.0], &x, &x, &[0.0], &[]),
            Err(ProtocolError::EmptyBatch)
        ));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        // The surrogate loss whose gradient the protocol computes:
        // mean of (θx)^2/8 - y (θx)/2 over the batch.
        let data = small_dataset(20, 3, 3, 5);
        let theta_a = vec![0.3, -0.2, 0.1];
        let theta_b = vec![-0.4, 0.25, 0.05];
        let batch: Vec<usize> = (0..20).collect();
        let loss = |ta: &[f64], tb: &[f64]| -> f64 {
            batch
                .iter()
                .map(|&i| {
                    let s: f64 = ta.iter().zip(data.x_a.row(i)).map(|(a, b)| a * b).sum::<f64>()
                        + tb.iter().zip(data.x_b.row(i)).map(|(a, b)| a * b).sum::<f64>();
                    s * s / 8.0 - data.y[i] * s / 2.0
                })
                .sum::<f64>()
                / batch.len() as f64
        };
        let (ga, gb) =
            plaintext_gradient(&theta_a, &theta_b, &data.x_a, &data.x_b, &data.y, &batch).unwrap();
        let h = 1e-6;
        for j in 0..3 {
            let mut tp = theta_a.clone();
            tp[j] += h;
            let mut tm = theta_a.clone();
            tm[j] -= h;
            let fd = (loss(&tp, &theta_b) - loss(&tm, &theta_b)) / (2.0 * h);
            assert!((fd - ga[j]).abs() < 1e-6, "A[{j}]: fd={fd} analytic={}", ga[j]);

            let mut tp = theta_b.clone();
            tp[j] += h;
            let mut tm = theta_b.clone();
            tm[j] -= h;
            let fd = (loss(&theta_a, &tp) - loss(&theta_a, &tm)) / (2.0 * h);
            assert!((fd - gb[j]).abs() < 1e-6, "B[{j}]: fd={fd} analytic={}", gb[j]);
        }
    }

    #[test]
    fn encrypted_round_matches_plaintext_oracle() {
        let data = small_dataset(12, 2, 2, 9);
        let config = LogRegConfig { batch_size: 12, ..fast_config(3) };
        let mut sim = Simulation::new(&data, config.clone()).unwrap();
        // Move off the all-zeros start so the round computes something.
        sim.state_a.theta = vec![0.2, -0.1];
        sim.state_b.theta = vec![0.05, 0.15];
        let before_a = sim.state_a.theta.clone();
        let before_b = sim.state_b.theta.clone();
        let batch: Vec<usize> = (0..12).collect();
        sim.run_round(&batch).unwrap();
        let (ga, gb) =
            plaintext_gradient(&before_a, &before_b, &data.x_a, &data.x_b, &data.y, &batch)
                .unwrap();
        let tol = 2.0 * (-40f64).exp2();
        let round = &sim.transcript.rounds[0];
        for (got, want) in round.grad_a.iter().zip(&ga) {
            assert!((got - want).abs() <= tol, "grad_a {got} vs {want}");
        }
        for (got, want) in round.grad_b.iter().zip(&gb) {
            assert!((got - want).abs() <= tol, "grad_b {got} vs {want}");
        }
        for ((t, b), g) in sim.state_a.theta.iter().zip(&before_a).zip(&round.grad_a) {
            assert!((t - (b - config.learning_rate * g)).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_learning_rate_keeps_theta() {
        let data = small_dataset(10, 2, 2, 1);
        let config =
            LogRegConfig { epochs: 2, batch_size: 5, learning_rate: 0.0, ..fast_config(1) };
        let result = train(&data, &config).unwrap();
        assert_eq!(result.theta_a, vec![0.0, 0.0]);
        assert_eq!(result.theta_b, vec![0.0, 0.0]);
    }

    #[test]
    fn identical_seeds_identical_transcripts() {
        let data = small_dataset(10, 2, 2, 2);
        let config = LogRegConfig { epochs: 2, batch_size: 4, ..fast_config(11) };
        let r1 = train(&data, &config).unwrap();
        let r2 = train(&data, &config).unwrap();
        assert_eq!(r1.transcript, r2.transcript);

        let mut buf1 = Vec::new();
        r1.transcript.write_jsonl(&mut buf1).unwrap();
        let mut buf2 = Vec::new();
        r2.transcript.write_jsonl(&mut buf2).unwrap();
        assert_eq!(buf1, buf2);
    }

    #[test]
    fn transcript_round_trip_through_jsonl() {
        let data = small_dataset(8, 2, 2, 3);
        let config = LogRegConfig { epochs: 1, batch_size: 4, ..fast_config(5) };
        let result = train(&data, &config).unwrap();
        let mut buf = Vec::new();
        result.transcript.write_jsonl(&mut buf).unwrap();
        let parsed = Transcript::read_jsonl(&buf[..]).unwrap();
        assert_eq!(parsed, result.transcript);
    }

    #[test]
    fn transcript_length_is_epochs_times_batches() {
        let data = small_dataset(10, 2, 2, 4);
        let config = LogRegConfig { epochs: 3, batch_size: 4, ..fast_config(2) };
        let result = train(&data, &config).unwrap();
        // ceil(10 / 4) = 3 batches per epoch, final batch short.
        assert_eq!(result.transcript.rounds.len(), 9);
        let batches = result.transcript.distinct_batches();
        assert_eq!(batches.len(), 3);
        assert_eq!(batches.iter().map(Vec::len).sum::<usize>(), 10);
        assert_eq!(batches[2].len(), 2);
    }

    #[test]
    fn invalid_configs_rejected() {
        let data = small_dataset(10, 2, 2, 6);
        let bad_epochs = LogRegConfig { epochs: 0, ..fast_config(1) };
        assert!(matches!(train(&data, &bad_epochs), Err(ProtocolError::BadConfig(_))));
        let bad_batch = LogRegConfig { batch_size: 11, ..fast_config(1) };
        assert!(matches!(train(&data, &bad_batch), Err(ProtocolError::BadConfig(_))));
    }

    #[test]
    fn separable_training_reaches_high_accuracy() {
        let data = small_dataset(60, 3, 3, 7);
        let config =
            LogRegConfig { epochs: 60, batch_size: 20, learning_rate: 0.3, ..fast_config(7) };
        let (ta, tb, _) = train_plaintext(&data, &config).unwrap();
        assert!(training_accuracy(&data, &ta, &tb) >= 0.9);
    }

    #[test]
    fn predict_trivial_cases() {
        assert_eq!(predict(&[0.0, 0.0], &[0.0], &[3.0, 1.0], &[2.0]).unwrap(), 0.0);
        // Unit vector picks out a single coefficient.
        assert_eq!(predict(&[0.7, -0.3], &[0.4], &[0.0, 1.0], &[0.0]).unwrap(), -0.3);
        assert!(predict(&[0.1], &[0.1], &[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn batch_predict_equals_per_sample_predict() {
        let data = small_dataset(10, 2, 3, 8);
        let ta = vec![0.3, -0.7];
        let tb = vec![0.2, 0.4, -0.1];
        let batch: Vec<f64> = (0..data.len())
            .map(|i| predict(&ta, &tb, data.x_a.row(i), data.x_b.row(i)).unwrap())
            .collect();
        for (i, &s) in batch.iter().enumerate() {
            assert_eq!(s, predict(&ta, &tb, data.x_a.row(i), data.x_b.row(i)).unwrap());
        }
    }
}
