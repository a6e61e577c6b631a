//! Level-wise tree construction over three interchangeable aggregation
//! backends:
//!
//! * `Encrypted` — the real protocol: B folds ciphertext sums per bin, A
//!   decrypts them during split search;
//! * `LayoutPlain` — integer sums of the same layout words, bit-exact to
//!   what the decryptions produce, without the cryptography;
//! * `Exact` — the plaintext reference trainer used as the parity oracle.
//!
//! Split selection, sample routing, and leaf weights are shared across
//! backends, so any divergence is confined to the decoded bin sums.

use std::collections::VecDeque;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::bins::{build_bins, BinPartition};
use super::model::{Node, Tree, TreeModel};
use super::{
    compute_gradients, leaf_weight, split_gain, BoostConfig, BoostError, GradientPair,
};
use crate::data::VerticalDataset;
use crate::he::{self, codec::CodecParams, Ciphertext, HeError, Keypair, PlaintextWord, PublicKey};

fn abort(step: &'static str) -> impl FnOnce(HeError) -> BoostError {
    move |source| BoostError::Abort { step, source }
}

/// Per-sample magic regions to hide in the layout words; zeros everywhere
/// for a clean run.
#[derive(Debug, Clone, PartialEq)]
pub struct MagicWords {
    pub g: Vec<BigUint>,
    pub h: Vec<BigUint>,
}

impl MagicWords {
    pub fn clean(n: usize) -> Self {
        Self { g: vec![BigUint::zero(); n], h: vec![BigUint::zero(); n] }
    }
}

/// One decoded bin of a node histogram: the adversary's view after
/// decryption.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramCell {
    pub bin: usize,
    pub count: u64,
    pub g_sum: f64,
    pub h_sum: f64,
    pub g_low: BigUint,
    pub h_low: BigUint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeHistograms {
    pub tree: usize,
    pub node: usize,
    /// B-local feature index.
    pub feature: usize,
    /// The node's sample set. Instance spaces are shared between the
    /// parties for routing, so this is part of A's legitimate view.
    pub samples: Vec<usize>,
    pub cells: Vec<HistogramCell>,
}

/// Every B-feature histogram decrypted during training, in search order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct HistogramLog {
    pub nodes: Vec<NodeHistograms>,
}

impl Serialize for HistogramCell {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("HistogramCell", 6)?;
        s.serialize_field("bin", &self.bin)?;
        s.serialize_field("count", &self.count)?;
        s.serialize_field("g_sum", &self.g_sum)?;
        s.serialize_field("h_sum", &self.h_sum)?;
        s.serialize_field("g_low", &self.g_low.to_str_radix(16))?;
        s.serialize_field("h_low", &self.h_low.to_str_radix(16))?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for HistogramCell {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            bin: usize,
            count: u64,
            g_sum: f64,
            h_sum: f64,
            g_low: String,
            h_low: String,
        }
        let raw = Raw::deserialize(deserializer)?;
        let parse = |s: &str| {
            BigUint::parse_bytes(s.as_bytes(), 16)
                .ok_or_else(|| serde::de::Error::custom("invalid hex low region"))
        };
        Ok(HistogramCell {
            bin: raw.bin,
            count: raw.count,
            g_sum: raw.g_sum,
            h_sum: raw.h_sum,
            g_low: parse(&raw.g_low)?,
            h_low: parse(&raw.h_low)?,
        })
    }
}

/// Per-bin homomorphic gradient sums with counts: what B returns to A.
#[derive(Debug, Clone)]
pub struct EncryptedHistogram {
    pub feature: usize,
    /// (G ciphertext, H ciphertext, member count) per bin.
    pub bins: Vec<(Ciphertext, Ciphertext, u64)>,
}

/// B's aggregation step: per-bin ciphertext sums restricted to the node's
/// samples. Executes entirely under the public key.
pub fn aggregate_encrypted(
    pk: &PublicKey,
    enc_g: &[Ciphertext],
    enc_h: &[Ciphertext],
    partition: &BinPartition,
    node_samples: &[usize],
) -> Result<EncryptedHistogram, BoostError> {
    let mut bins = Vec::with_capacity(partition.bin_count);
    for _ in 0..partition.bin_count {
        bins.push((he::paillier::zero_cipher(pk), he::paillier::zero_cipher(pk), 0u64));
    }
    for &i in node_samples {
        let b = partition.assignment[i];
        let (g_acc, h_acc, count) = &mut bins[b];
        *g_acc = he::paillier::add_cipher(pk, g_acc, &enc_g[i]).map_err(abort("aggregate g"))?;
        *h_acc = he::paillier::add_cipher(pk, h_acc, &enc_h[i]).map_err(abort("aggregate h"))?;
        *count += 1;
    }
    Ok(EncryptedHistogram { feature: partition.feature, bins })
}

enum Aggregation<'a> {
    Encrypted { keypair: &'a Keypair, enc_g: Vec<Ciphertext>, enc_h: Vec<Ciphertext> },
    LayoutPlain { g_words: Vec<BigUint>, h_words: Vec<BigUint> },
    Exact { frac_bits: u32 },
}

impl Aggregation<'_> {
    fn frac_bits(&self) -> u32 {
        match self {
            Aggregation::Exact { frac_bits } => *frac_bits,
            _ => 0,
        }
    }

    /// Decode one node-restricted feature histogram as A sees it.
    fn cells(
        &self,
        partition: &BinPartition,
        samples: &[usize],
        grads: &[GradientPair],
        codec: &CodecParams,
    ) -> Result<Vec<HistogramCell>, BoostError> {
        match self {
            Aggregation::Encrypted { keypair, enc_g, enc_h } => {
                let hist =
                    aggregate_encrypted(&keypair.public, enc_g, enc_h, partition, samples)?;
                hist.bins
                    .iter()
                    .enumerate()
                    .map(|(bin, (gc, hc, count))| {
                        let g = keypair.decrypt(gc).map_err(abort("decrypt histogram"))?;
                        let h = keypair.decrypt(hc).map_err(abort("decrypt histogram"))?;
                        let g_dec = codec.decode_layout(&g, *count);
                        let h_dec = codec.decode_layout(&h, *count);
                        Ok(HistogramCell {
                            bin,
                            count: *count,
                            g_sum: g_dec.value_sum,
                            h_sum: h_dec.value_sum,
                            g_low: g_dec.low_region,
                            h_low: h_dec.low_region,
                        })
                    })
                    .collect()
            }
            Aggregation::LayoutPlain { g_words, h_words } => {
                let mut sums =
                    vec![(BigUint::zero(), BigUint::zero(), 0u64); partition.bin_count];
                for &i in samples {
                    let (g_acc, h_acc, count) = &mut sums[partition.assignment[i]];
                    *g_acc += &g_words[i];
                    *h_acc += &h_words[i];
                    *count += 1;
                }
                Ok(sums
                    .into_iter()
                    .enumerate()
                    .map(|(bin, (g, h, count))| {
                        let g_dec = codec.decode_layout(&PlaintextWord::new(g), count);
                        let h_dec = codec.decode_layout(&PlaintextWord::new(h), count);
                        HistogramCell {
                            bin,
                            count,
                            g_sum: g_dec.value_sum,
                            h_sum: h_dec.value_sum,
                            g_low: g_dec.low_region,
                            h_low: h_dec.low_region,
                        }
                    })
                    .collect())
            }
            Aggregation::Exact { .. } => {
                let mut cells: Vec<HistogramCell> = (0..partition.bin_count)
                    .map(|bin| HistogramCell {
                        bin,
                        count: 0,
                        g_sum: 0.0,
                        h_sum: 0.0,
                        g_low: BigUint::zero(),
                        h_low: BigUint::zero(),
                    })
                    .collect();
                // The reference sums the same fixed-point values the
                // protocol transmits; integer-valued f64 sums below 2^53
                // make these bit-equal to the decoded histograms, so split
                // selection cannot diverge on representation noise.
                let scale = (self.frac_bits() as f64).exp2();
                for &i in samples {
                    let cell = &mut cells[partition.assignment[i]];
                    cell.count += 1;
                    cell.g_sum += (grads[i].g * scale).round() / scale;
                    cell.h_sum += (grads[i].h * scale).round() / scale;
                }
                Ok(cells)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct BoostResult {
    pub model: TreeModel,
    /// Decoded B-feature histograms of every searched node, the reverse
    /// sum attack's input.
    pub histograms: HistogramLog,
    /// B's private bin partitions (the simulator returns them so oracles
    /// and prediction routing can use them).
    pub bins_b: Vec<BinPartition>,
    pub bins_a: Vec<BinPartition>,
    /// Final margins on the training samples.
    pub margins: Vec<f64>,
}

/// The full SecureBoost protocol with Paillier-encrypted gradients.
pub fn train_ensemble(
    data: &VerticalDataset,
    config: &BoostConfig,
    magic: Option<&MagicWords>,
) -> Result<BoostResult, BoostError> {
    train_inner(data, config, magic, Mode::Encrypted)
}

/// Same training loop over integer layout-word sums: bit-exact to the
/// encrypted run's decoded histograms, without the cryptography.
pub fn train_layout_sim(
    data: &VerticalDataset,
    config: &BoostConfig,
    magic: Option<&MagicWords>,
) -> Result<BoostResult, BoostError> {
    train_inner(data, config, magic, Mode::LayoutPlain)
}

/// Plaintext reference trainer: exact float sums, the structural oracle.
pub fn train_reference(
    data: &VerticalDataset,
    config: &BoostConfig,
) -> Result<BoostResult, BoostError> {
    train_inner(data, config, None, Mode::Exact)
}

#[derive(Clone, Copy, PartialEq)]
enum Mode {
    Encrypted,
    LayoutPlain,
    Exact,
}

fn train_inner(
    data: &VerticalDataset,
    config: &BoostConfig,
    magic: Option<&MagicWords>,
    mode: Mode,
) -> Result<BoostResult, BoostError> {
    validate(data, config)?;
    let n = data.len();
    let codec = CodecParams::layout_default();

    let bins_a: Vec<BinPartition> = (0..data.d_a())
        .map(|j| build_bins(j, &data.x_a.column(j), config.bins))
        .collect::<Result<_, _>>()?;
    let bins_b: Vec<BinPartition> = (0..data.d_b())
        .map(|j| build_bins(j, &data.x_b.column(j), config.bins))
        .collect::<Result<_, _>>()?;

    let keypair = match mode {
        Mode::Encrypted => {
            Some(he::paillier::keygen(config.key_bits, config.seed).map_err(abort("keygen"))?)
        }
        _ => None,
    };
    // Word width checks need only the modulus bit length in plain modes.
    let modulus = keypair
        .as_ref()
        .map(|kp| kp.public.n.clone())
        .unwrap_or_else(|| (BigUint::one() << config.key_bits) - 1u8);
    let clean = MagicWords::clean(n);
    let magic = magic.unwrap_or(&clean);
    if magic.g.len() != n || magic.h.len() != n {
        return Err(BoostError::BadConfig("magic word vectors must cover every sample".into()));
    }

    let mut enc_rng = ChaCha20Rng::seed_from_u64(config.seed ^ 0x5b00_57ee);
    let mut margins = vec![0.0; n];
    let mut trees = Vec::with_capacity(config.trees);
    let mut log = HistogramLog::default();

    for tree_idx in 0..config.trees {
        let grads = compute_gradients(&data.y, &margins, config.objective);

        // A layout-encodes both statistics for every sample; encoded
        // samples carry their magic region, everyone else carries zeros.
        let words = |values: &dyn Fn(usize) -> f64,
                     magics: &[BigUint]|
         -> Result<Vec<BigUint>, BoostError> {
            (0..n)
                .map(|i| {
                    Ok(codec
                        .encode_layout(values(i), &magics[i], &modulus)
                        .map_err(abort("encode gradient"))?
                        .raw)
                })
                .collect()
        };
        let agg = match mode {
            Mode::Exact => Aggregation::Exact { frac_bits: codec.frac_bits },
            Mode::LayoutPlain => Aggregation::LayoutPlain {
                g_words: words(&|i| grads[i].g, &magic.g)?,
                h_words: words(&|i| grads[i].h, &magic.h)?,
            },
            Mode::Encrypted => {
                let kp = keypair.as_ref().expect("keypair exists in encrypted mode");
                let encrypt_all = |raws: Vec<BigUint>,
                                   rng: &mut ChaCha20Rng|
                 -> Result<Vec<Ciphertext>, BoostError> {
                    raws.into_iter()
                        .map(|raw| {
                            he::paillier::encrypt(&kp.public, &PlaintextWord::new(raw), rng.gen())
                                .map_err(abort("encrypt gradient"))
                        })
                        .collect()
                };
                let g_words = words(&|i| grads[i].g, &magic.g)?;
                let h_words = words(&|i| grads[i].h, &magic.h)?;
                Aggregation::Encrypted {
                    keypair: kp,
                    enc_g: encrypt_all(g_words, &mut enc_rng)?,
                    enc_h: encrypt_all(h_words, &mut enc_rng)?,
                }
            }
        };

        let tree =
            build_tree(tree_idx, data, &bins_a, &bins_b, &grads, &agg, &codec, config, &mut log)?;
        for i in 0..n {
            margins[i] += tree_route(&tree, data, &bins_b, i);
        }
        trees.push(tree);
    }

    Ok(BoostResult {
        model: TreeModel {
            trees,
            objective: config.objective,
            lambda: config.lambda,
            gamma: config.gamma,
            shrinkage: config.shrinkage,
        },
        histograms: log,
        bins_b,
        bins_a,
        margins,
    })
}

fn validate(data: &VerticalDataset, config: &BoostConfig) -> Result<(), BoostError> {
    if data.is_empty() {
        return Err(BoostError::BadConfig("empty dataset".into()));
    }
    if config.trees == 0 {
        return Err(BoostError::BadConfig("trees must be >= 1".into()));
    }
    if config.max_depth == 0 {
        return Err(BoostError::BadConfig("max_depth must be >= 1".into()));
    }
    if !(config.lambda > 0.0) {
        return Err(BoostError::BadConfig("lambda must be positive".into()));
    }
    if config.min_samples < 1 {
        return Err(BoostError::BadConfig("min_samples must be >= 1".into()));
    }
    Ok(())
}

/// Training-time routing uses B's stored assignments directly.
fn tree_route(tree: &Tree, data: &VerticalDataset, bins_b: &[BinPartition], i: usize) -> f64 {
    let mut at = 0usize;
    loop {
        match &tree.nodes[at] {
            Node::Leaf { weight } => return *weight,
            Node::SplitActive { feature, threshold, left, right } => {
                at = if data.x_a.get(i, *feature) <= *threshold { *left } else { *right };
            }
            Node::SplitPassive { feature, bin, left, right } => {
                at = if bins_b[*feature].assignment[i] <= *bin { *left } else { *right };
            }
        }
    }
}

struct Candidate {
    gain: f64,
    node: Node,
    /// Left iff the sample's bin index is <= the boundary, evaluated on
    /// the owner's side.
    owner_passive: bool,
    feature: usize,
    boundary: usize,
}

#[allow(clippy::too_many_arguments)]
fn build_tree(
    tree_idx: usize,
    data: &VerticalDataset,
    bins_a: &[BinPartition],
    bins_b: &[BinPartition],
    grads: &[GradientPair],
    agg: &Aggregation,
    codec: &CodecParams,
    config: &BoostConfig,
    log: &mut HistogramLog,
) -> Result<Tree, BoostError> {
    let mut nodes = vec![Node::Leaf { weight: 0.0 }];
    let mut frontier: VecDeque<(usize, Vec<usize>, usize)> = VecDeque::new();
    frontier.push_back((0, (0..data.len()).collect(), 0));

    while let Some((id, samples, depth)) = frontier.pop_front() {
        let g_tot: f64 = samples.iter().map(|&i| grads[i].g).sum();
        let h_tot: f64 = samples.iter().map(|&i| grads[i].h).sum();
        if depth >= config.max_depth || samples.len() < config.min_samples {
            nodes[id] =
                Node::Leaf { weight: leaf_weight(g_tot, h_tot, config.lambda, config.shrinkage) };
            continue;
        }

        let mut best: Option<Candidate> = None;
        let mut consider = |cand: Candidate| {
            if cand.gain > best.as_ref().map_or(0.0, |b| b.gain) {
                best = Some(cand);
            }
        };

        // A's candidates first: exact plaintext sums over its own bins.
        for part in bins_a {
            if part.bin_count < 2 {
                continue;
            }
            let mut bin_g = vec![0.0; part.bin_count];
            let mut bin_h = vec![0.0; part.bin_count];
            let mut bin_c = vec![0usize; part.bin_count];
            for &i in &samples {
                let b = part.assignment[i];
                bin_g[b] += grads[i].g;
                bin_h[b] += grads[i].h;
                bin_c[b] += 1;
            }
            let (mut gl, mut hl, mut cl) = (0.0, 0.0, 0usize);
            for k in 0..part.bin_count - 1 {
                gl += bin_g[k];
                hl += bin_h[k];
                cl += bin_c[k];
                if cl == 0 || cl == samples.len() {
                    continue;
                }
                consider(Candidate {
                    gain: split_gain(gl, hl, g_tot, h_tot, config.lambda, config.gamma),
                    node: Node::SplitActive {
                        feature: part.feature,
                        threshold: part.upper_edges[k],
                        left: 0,
                        right: 0,
                    },
                    owner_passive: false,
                    feature: part.feature,
                    boundary: k,
                });
            }
        }

        // B's candidates via decrypted histograms, recorded for the
        // attack surface.
        for part in bins_b {
            let cells = agg.cells(part, &samples, grads, codec)?;
            log.nodes.push(NodeHistograms {
                tree: tree_idx,
                node: id,
                feature: part.feature,
                samples: samples.clone(),
                cells: cells.clone(),
            });
            if part.bin_count < 2 {
                continue;
            }
            let (mut gl, mut hl, mut cl) = (0.0, 0.0, 0u64);
            for k in 0..part.bin_count - 1 {
                gl += cells[k].g_sum;
                hl += cells[k].h_sum;
                cl += cells[k].count;
                if cl == 0 || cl == samples.len() as u64 {
                    continue;
                }
                consider(Candidate {
                    gain: split_gain(gl, hl, g_tot, h_tot, config.lambda, config.gamma),
                    node: Node::SplitPassive {
                        feature: part.feature,
                        bin: k,
                        left: 0,
                        right: 0,
                    },
                    owner_passive: true,
                    feature: part.feature,
                    boundary: k,
                });
            }
        }

        match best {
            Some(cand) if cand.gain > 0.0 => {
                let (left_samples, right_samples): (Vec<usize>, Vec<usize>) =
                    samples.iter().partition(|&&i| {
                        if cand.owner_passive {
                            bins_b[cand.feature].assignment[i] <= cand.boundary
                        } else {
                            bins_a[cand.feature].assignment[i] <= cand.boundary
                        }
                    });
                let left = nodes.len();
                nodes.push(Node::Leaf { weight: 0.0 });
                let right = nodes.len();
                nodes.push(Node::Leaf { weight: 0.0 });
                nodes[id] = match cand.node {
                    Node::SplitActive { feature, threshold, .. } => {
                        Node::SplitActive { feature, threshold, left, right }
                    }
                    Node::SplitPassive { feature, bin, .. } => {
                        Node::SplitPassive { feature, bin, left, right }
                    }
                    Node::Leaf { .. } => unreachable!("candidates are always splits"),
                };
                frontier.push_back((left, left_samples, depth + 1));
                frontier.push_back((right, right_samples, depth + 1));
            }
            _ => {
                nodes[id] = Node::Leaf {
                    weight: leaf_weight(g_tot, h_tot, config.lambda, config.shrinkage),
                };
            }
        }
    }
    Ok(Tree { nodes })
}

/// Fraction of training samples the model classifies correctly.
pub fn training_accuracy(data: &VerticalDataset, result: &BoostResult) -> f64 {
    let hits = (0..data.len())
        .filter(|&i| {
            result.model.predict(data.x_a.row(i), data.x_b.row(i), &result.bins_b) == data.y[i]
        })
        .count();
    hits as f64 / data.len() as f64
}
