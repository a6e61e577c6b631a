//! Reverse sum attack on SecureBoost.
//!
//! The active party hides a 960-bit magic number in the padding region of
//! every layout-encoded gradient it encrypts: a per-supergroup random value
//! in the top window bits plus a one-hot base-b digit identifying the
//! sample's group. Homomorphic bin sums then add those magics verbatim, so
//! the decrypted low region of each bin is the integer sum of its members'
//! magics. Reversing those sums per bin recovers which encoded samples the
//! bin holds, i.e. the passive party's partial orders, without disturbing
//! the gradient values or the trained model.

pub mod exploit;
pub mod plan;
pub mod solver;

use thiserror::Error;

pub use exploit::{
    assemble_partial_orders, evaluate_alternative, infer_bin_bounds, AlternativeReport, BinBounds,
    FeatureSuccess, PartialOrder, SuccessReport,
};
pub use plan::{
    build_assignment, encode_gradients, make_magic, plan_encoding, AssignmentTable, EncodingPlan,
    GroupSize, LayoutGeometry, MagicNumber, SampleCode, Slot,
};
pub use solver::{reverse_sums, BinRecovery, CellOutcome, FeatureRecovery, RecoveredBins};

#[derive(Debug, Error, PartialEq)]
pub enum RevsumError {
    #[error("plan admits no identifier positions (k={k}, b={b}, id bits={id_bits})")]
    NoPositions { k: u32, b: u64, id_bits: u32 },
    #[error("invalid plan parameters: {0}")]
    BadParams(String),
}
