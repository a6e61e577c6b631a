//! Magic number construction.
//!
//! A magic region of `magic_bits` splits into k contiguous random windows
//! of `window_bits` each at the top (window s sits at bit offset
//! `magic_bits - window_bits * (s + 1)`) and a base-b positional digit
//! string below. Capacities follow the gradient-encoding recurrence:
//!
//! ```text
//!   l  = max { l : b^l <= 2^(magic_bits - window_bits * k) }
//!   g  = 2 * k * l          (two gradient slots per sample)
//!   n' = g * per_group      (per_group = b, or b - 1 in digit-safe mode)
//! ```
//!
//! Encoded index i maps to slot `i mod 2`, supergroup `(i / 2) mod k`,
//! digit position `(i / 2k) mod l`, within-group ordinal `i / 2kl`.

use num_bigint::BigUint;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::RevsumError;
use crate::he::codec::{CodecParams, MAGIC_BITS};
use crate::he::PlaintextWord;
use crate::sboost::{GradientPair, MagicWords};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutGeometry {
    pub magic_bits: u32,
    pub window_bits: u32,
    /// Random values are drawn from `[1, 2^random_bits)`; the remaining
    /// window bits are carry headroom.
    pub random_bits: u32,
}

impl Default for LayoutGeometry {
    fn default() -> Self {
        Self { magic_bits: MAGIC_BITS, window_bits: 30, random_bits: 20 }
    }
}

/// Whether a group holds b members (the capacity recurrence) or b - 1 (the
/// digit-overflow-safe reading).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupSize {
    #[default]
    Full,
    DigitSafe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    /// The first-order gradient histogram.
    First,
    /// The second-order gradient histogram.
    Second,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodingPlan {
    pub k: u32,
    pub b: u64,
    pub geometry: LayoutGeometry,
    pub group_size: GroupSize,
    /// Identifier positions per (slot, supergroup): Algorithm line
    /// `l = log_b 2^(magic_bits - window_bits k)`.
    pub positions: u64,
    /// Total groups `2 k l`.
    pub groups: u64,
    /// Largest encodable sample count.
    pub capacity: u64,
}

impl EncodingPlan {
    /// A plan that encodes nothing.
    pub fn disabled() -> Self {
        Self {
            k: 0,
            b: 2,
            geometry: LayoutGeometry::default(),
            group_size: GroupSize::Full,
            positions: 0,
            groups: 0,
            capacity: 0,
        }
    }

    pub fn with_geometry(
        k: u32,
        b: u64,
        geometry: LayoutGeometry,
        group_size: GroupSize,
    ) -> Result<Self, RevsumError> {
        if k < 1 {
            return Err(RevsumError::BadParams("k must be >= 1".into()));
        }
        if b < 2 {
            return Err(RevsumError::BadParams("base must be >= 2".into()));
        }
        if geometry.window_bits * k >= geometry.magic_bits {
            return Err(RevsumError::BadParams(format!(
                "windows ({} x {} bits) leave no identifier region in {} bits",
                k, geometry.window_bits, geometry.magic_bits
            )));
        }
        if geometry.random_bits == 0 || geometry.random_bits > geometry.window_bits {
            return Err(RevsumError::BadParams(
                "random_bits must be in [1, window_bits]".into(),
            ));
        }
        let id_bits = geometry.magic_bits - geometry.window_bits * k;
        let positions = max_power_below(b, id_bits);
        if positions < 1 {
            return Err(RevsumError::NoPositions { k, b, id_bits });
        }
        let groups = 2 * k as u64 * positions;
        let per_group = match group_size {
            GroupSize::Full => b,
            GroupSize::DigitSafe => b - 1,
        };
        Ok(Self { k, b, geometry, group_size, positions, groups, capacity: groups * per_group })
    }

    pub fn per_group(&self) -> u64 {
        match self.group_size {
            GroupSize::Full => self.b,
            GroupSize::DigitSafe => self.b - 1,
        }
    }

    pub fn id_bits(&self) -> u32 {
        self.geometry.magic_bits - self.geometry.window_bits * self.k
    }

    /// Bit offset of supergroup s's random window inside the magic region.
    pub fn window_offset(&self, s: u32) -> u32 {
        debug_assert!(s < self.k);
        self.geometry.magic_bits - self.geometry.window_bits * (s + 1)
    }

    pub fn encoded_count(&self, n_samples: usize) -> usize {
        (self.capacity as usize).min(n_samples)
    }

    /// The deterministic index bijection of the layout.
    pub fn code_coordinates(&self, index: u64) -> (Slot, u32, u64, u64) {
        debug_assert!(index < self.capacity);
        let slot = if index % 2 == 0 { Slot::First } else { Slot::Second };
        let k = self.k as u64;
        let supergroup = ((index / 2) % k) as u32;
        let position = (index / (2 * k)) % self.positions;
        let ordinal = index / (2 * k * self.positions);
        (slot, supergroup, position, ordinal)
    }
}

/// Largest l with b^l <= 2^bits.
fn max_power_below(b: u64, bits: u32) -> u64 {
    let limit = BigUint::one() << bits;
    let base = BigUint::from(b);
    let mut acc = base.clone();
    let mut l = 0u64;
    while acc <= limit {
        l += 1;
        acc *= &base;
    }
    l
}

/// Capacity parameters for n_samples under the default 960-bit geometry.
pub fn plan_encoding(n_samples: usize, k: u32, b: u64) -> Result<EncodingPlan, RevsumError> {
    let _ = n_samples;
    EncodingPlan::with_geometry(k, b, LayoutGeometry::default(), GroupSize::Full)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MagicNumber {
    pub raw: BigUint,
    pub supergroup: u32,
    pub position: u64,
    pub random_value: u64,
    /// The one-hot base-b digit string as an integer, `b^position`.
    pub identifier: BigUint,
}

/// Compose a magic number from explicit coordinates.
pub fn compose_magic(plan: &EncodingPlan, supergroup: u32, position: u64, random: u64) -> MagicNumber {
    let identifier = BigUint::from(plan.b).pow(position as u32);
    let raw = (BigUint::from(random) << plan.window_offset(supergroup)) | identifier.clone();
    MagicNumber { raw, supergroup, position, random_value: random, identifier }
}

/// Magic number of one encoded index, with the random value drawn from the
/// caller's RNG.
pub fn make_magic(plan: &EncodingPlan, encoded_index: u64, rng: &mut ChaCha20Rng) -> MagicNumber {
    let (_, supergroup, position, _) = plan.code_coordinates(encoded_index);
    let random = rng.gen_range(1..(1u64 << plan.geometry.random_bits));
    compose_magic(plan, supergroup, position, random)
}

/// One encoded sample's coordinates and magic number.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleCode {
    pub sample: usize,
    pub slot: Slot,
    pub supergroup: u32,
    pub position: u64,
    pub ordinal: u64,
    pub random: u64,
    pub magic: BigUint,
}

/// The adversary's own bookkeeping: which sample got which magic number.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentTable {
    pub plan: EncodingPlan,
    pub codes: Vec<SampleCode>,
}

impl AssignmentTable {
    pub fn encoded_count(&self) -> usize {
        self.codes.len()
    }

    /// Per-sample magic regions for the trainer; zeros where not encoded.
    pub fn magic_words(&self, n_samples: usize) -> MagicWords {
        let mut words = MagicWords::clean(n_samples);
        for code in &self.codes {
            match code.slot {
                Slot::First => words.g[code.sample] = code.magic.clone(),
                Slot::Second => words.h[code.sample] = code.magic.clone(),
            }
        }
        words
    }

    pub fn codes_for_slot(&self, slot: Slot) -> Vec<&SampleCode> {
        self.codes.iter().filter(|c| c.slot == slot).collect()
    }
}

/// Sequentially select `min(n_samples, capacity)` samples and assign their
/// magic numbers. Random values are drawn uniquely within each group, so
/// no two same-group members share a value.
pub fn build_assignment(plan: &EncodingPlan, n_samples: usize, seed: u64) -> AssignmentTable {
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x3a61_c0de);
    let count = plan.encoded_count(n_samples);
    let mut used: std::collections::HashMap<(Slot, u32, u64), Vec<u64>> =
        std::collections::HashMap::new();
    let mut codes = Vec::with_capacity(count);
    for i in 0..count as u64 {
        let (slot, supergroup, position, ordinal) = plan.code_coordinates(i);
        let taken = used.entry((slot, supergroup, position)).or_default();
        let magic = loop {
            let m = make_magic(plan, i, &mut rng);
            if !taken.contains(&m.random_value) {
                break m;
            }
        };
        taken.push(magic.random_value);
        codes.push(SampleCode {
            sample: i as usize,
            slot,
            supergroup,
            position,
            ordinal,
            random: magic.random_value,
            magic: magic.raw,
        });
    }
    AssignmentTable { plan: plan.clone(), codes }
}

/// Layout-encode a gradient list with magic numbers: the value windows are
/// untouched, so split selection cannot observe the encoding.
pub fn encode_gradients(
    gradients: &[GradientPair],
    plan: &EncodingPlan,
    seed: u64,
    codec: &CodecParams,
    modulus: &BigUint,
) -> Result<(Vec<PlaintextWord>, Vec<PlaintextWord>, AssignmentTable), crate::he::HeError> {
    let table = build_assignment(plan, gradients.len(), seed);
    let words = table.magic_words(gradients.len());
    let mut g_words = Vec::with_capacity(gradients.len());
    let mut h_words = Vec::with_capacity(gradients.len());
    for (i, pair) in gradients.iter().enumerate() {
        g_words.push(codec.encode_layout(pair.g, &words.g[i], modulus)?);
        h_words.push(codec.encode_layout(pair.h, &words.h[i], modulus)?);
    }
    Ok((g_words, h_words, table))
}
