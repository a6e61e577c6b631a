//! Deterministic two-party vertical federated learning simulator.
//!
//! The crate simulates the secure logistic regression and SecureBoost
//! protocols over additively homomorphic encryption, records every message
//! each party legitimately sees, and implements two data reconstruction
//! attacks on those transcripts: reverse multiplication (linear-system
//! recovery of the passive party's raw features) and reverse sum
//! (partial-order recovery from magic numbers hidden in ciphertext
//! padding), together with the leaked-data exploitation pipeline.
//!
//! Everything is a pure function of its inputs plus explicit seeds; repeated
//! runs produce bit-identical transcripts, models, and reports.

pub mod data;
pub mod he;
pub mod logreg;
pub mod revmul;
pub mod revsum;
pub mod sboost;
