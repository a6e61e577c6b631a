//! Two-party SecureBoost.
//!
//! The active party A holds the labels and the key material; it computes
//! per-sample first/second order gradient statistics, layout-encodes them
//! (64-bit value window over a 960-bit padding region), encrypts, and ships
//! them to the passive party B. B aggregates the ciphertexts over its
//! per-feature quantile bins and returns per-bin sums, which A decrypts to
//! drive split selection. B's feature values and thresholds never leave B;
//! A sees only bin ids.

pub mod bins;
pub mod model;
pub mod train;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bins::{build_bins, BinPartition};
pub use model::{Node, SplitOwner, Tree, TreeModel};
pub use train::{
    train_ensemble, train_layout_sim, train_reference, BoostResult, HistogramCell, HistogramLog,
    MagicWords, NodeHistograms,
};

use crate::he::HeError;

#[derive(Debug, Error)]
pub enum BoostError {
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("bin_count must be >= 2, got {0}")]
    BadBinCount(usize),
    #[error("protocol abort at step {step}: {source}")]
    Abort {
        step: &'static str,
        #[source]
        source: HeError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Binary logistic loss: g = sigmoid(margin) - y, h = p (1 - p).
    Logistic,
    /// Squared loss for regression targets: g = margin - y, h = 1.
    Squared,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoostConfig {
    pub trees: usize,
    pub max_depth: usize,
    pub bins: usize,
    pub lambda: f64,
    pub gamma: f64,
    pub shrinkage: f64,
    pub min_samples: usize,
    pub objective: Objective,
    pub key_bits: u32,
    pub seed: u64,
}

impl Default for BoostConfig {
    fn default() -> Self {
        Self {
            trees: 1,
            max_depth: 3,
            bins: 32,
            lambda: 1.0,
            gamma: 0.0,
            shrinkage: 0.3,
            min_samples: 2,
            objective: Objective::Logistic,
            key_bits: 2048,
            seed: 0,
        }
    }
}

/// Per-sample first and second order gradient statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientPair {
    pub g: f64,
    pub h: f64,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Gradient statistics of the loss at the current margins.
pub fn compute_gradients(y: &[f64], y_hat: &[f64], objective: Objective) -> Vec<GradientPair> {
    assert_eq!(y.len(), y_hat.len());
    y.iter()
        .zip(y_hat)
        .map(|(&y, &m)| match objective {
            Objective::Logistic => {
                let p = sigmoid(m);
                GradientPair { g: p - y, h: p * (1.0 - p) }
            }
            Objective::Squared => GradientPair { g: m - y, h: 1.0 },
        })
        .collect()
}

/// Loss reduction of a split: `1/2 [G_L^2/(H_L+λ) + G_R^2/(H_R+λ) -
/// G^2/(H+λ)] - γ`.
pub fn split_gain(g_left: f64, h_left: f64, g_total: f64, h_total: f64, lambda: f64, gamma: f64) -> f64 {
    let g_right = g_total - g_left;
    let h_right = h_total - h_left;
    0.5 * (g_left * g_left / (h_left + lambda) + g_right * g_right / (h_right + lambda)
        - g_total * g_total / (h_total + lambda))
        - gamma
}

/// Leaf value `-G / (H + λ)` scaled by the shrinkage rate.
pub fn leaf_weight(g: f64, h: f64, lambda: f64, shrinkage: f64) -> f64 {
    -g / (h + lambda) * shrinkage
}
