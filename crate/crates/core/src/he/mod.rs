//! Additively homomorphic encryption and the plaintext codecs shared by the
//! protocol and attack modules.
//!
//! The cryptosystem is Paillier over a seeded PRNG: the simulator needs
//! reproducible keys and ciphertexts, not production-grade randomness.

pub mod codec;
pub mod paillier;

use num_bigint::BigUint;
use thiserror::Error;

pub use codec::{CodecParams, LayoutSum};
pub use paillier::{Ciphertext, Keypair, PublicKey, SecretKey};

/// A plaintext residue in `[0, n)`, ready for encryption.
///
/// Produced either by the signed fixed-point codec (centered-modular
/// residues) or by the layout codec (a 64-bit value window stacked on a
/// 960-bit magic region).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlaintextWord {
    pub raw: BigUint,
}

impl PlaintextWord {
    pub fn new(raw: BigUint) -> Self {
        Self { raw }
    }

    pub fn zero() -> Self {
        Self { raw: BigUint::from(0u8) }
    }
}

impl From<u64> for PlaintextWord {
    fn from(v: u64) -> Self {
        Self { raw: BigUint::from(v) }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum HeError {
    #[error("key size {0} cannot host the 1024-bit plaintext layout (need >= 1088)")]
    KeyTooSmall(u32),
    #[error("key size {0} must be even")]
    KeyBitsOdd(u32),
    #[error("plaintext is not smaller than the modulus")]
    PlaintextOutOfRange,
    #[error("ciphertexts under different keys cannot be combined")]
    KeyMismatch,
    #[error("value {0} overflows the signed fixed-point range")]
    SignedOverflow(f64),
    #[error("value {0} overflows the layout value window")]
    LayoutValueOverflow(f64),
    #[error("magic number does not fit in {0} bits")]
    MagicOverflow(u32),
    #[error("max_count {count} exceeds the layout sum headroom at {key_bits}-bit keys")]
    LayoutHeadroom { count: u64, key_bits: u32 },
}

pub(crate) fn biguint_to_hex(v: &BigUint) -> String {
    v.to_str_radix(16)
}

pub(crate) fn biguint_from_hex(s: &str) -> Option<BigUint> {
    BigUint::parse_bytes(s.as_bytes(), 16)
}
