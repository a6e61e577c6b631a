//! Boosted tree model with party-split ownership of decision nodes.

use serde::{Deserialize, Serialize};

use super::bins::BinPartition;
use super::Objective;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitOwner {
    Active,
    Passive,
}

/// Decision nodes. Active-party splits store the raw threshold; passive
/// splits store only (feature, bin id) and route through B's bin lookup, so
/// thresholds stay private to B.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Leaf { weight: f64 },
    SplitActive { feature: usize, threshold: f64, left: usize, right: usize },
    SplitPassive { feature: usize, bin: usize, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    /// Route a sample to its leaf weight. `bins_b` is the passive party's
    /// bin lookup for its features.
    pub fn predict(&self, x_a: &[f64], x_b: &[f64], bins_b: &[BinPartition]) -> f64 {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                Node::Leaf { weight } => return *weight,
                Node::SplitActive { feature, threshold, left, right } => {
                    at = if x_a[*feature] <= *threshold { *left } else { *right };
                }
                Node::SplitPassive { feature, bin, left, right } => {
                    at = if bins_b[*feature].bin_of(x_b[*feature]) <= *bin { *left } else { *right };
                }
            }
        }
    }

    pub fn leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub trees: Vec<Tree>,
    pub objective: Objective,
    pub lambda: f64,
    pub gamma: f64,
    pub shrinkage: f64,
}

impl TreeModel {
    /// Raw margin: the sum of leaf weights across the ensemble.
    pub fn predict_margin(&self, x_a: &[f64], x_b: &[f64], bins_b: &[BinPartition]) -> f64 {
        self.trees.iter().map(|t| t.predict(x_a, x_b, bins_b)).sum()
    }

    /// Class decision for the logistic objective (margin >= 0), raw margin
    /// otherwise.
    pub fn predict(&self, x_a: &[f64], x_b: &[f64], bins_b: &[BinPartition]) -> f64 {
        let margin = self.predict_margin(x_a, x_b, bins_b);
        match self.objective {
            Objective::Logistic => {
                if margin >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Objective::Squared => margin,
        }
    }

    /// Split-structure equality ignoring leaf weights.
    pub fn same_structure(&self, other: &TreeModel) -> bool {
        self.trees.len() == other.trees.len()
            && self.trees.iter().zip(&other.trees).all(|(a, b)| {
                a.nodes.len() == b.nodes.len()
                    && a.nodes.iter().zip(&b.nodes).all(|(x, y)| match (x, y) {
                        (Node::Leaf { .. }, Node::Leaf { .. }) => true,
                        (
                            Node::SplitActive { feature: f1, threshold: t1, .. },
                            Node::SplitActive { feature: f2, threshold: t2, .. },
                        ) => f1 == f2 && t1 == t2,
                        (
                            Node::SplitPassive { feature: f1, bin: b1, .. },
                            Node::SplitPassive { feature: f2, bin: b2, .. },
                        ) => f1 == f2 && b1 == b2,
                        _ => false,
                    })
            })
    }
}
