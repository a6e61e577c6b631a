//! Equal-frequency quantile binning of a feature column.

use serde::{Deserialize, Serialize};

use super::BoostError;

/// Sample-to-bin assignment for one feature. Bin k covers
/// `(upper_edges[k-1], upper_edges[k]]`; the last bin is unbounded above.
/// Equal values always share a bin, so duplicate cut points collapse and
/// the effective bin count can be smaller than requested.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinPartition {
    pub feature: usize,
    pub upper_edges: Vec<f64>,
    pub assignment: Vec<usize>,
    pub bin_count: usize,
    pub requested_bins: usize,
}

impl BinPartition {
    /// Smallest bin whose upper edge admits the value.
    pub fn bin_of(&self, value: f64) -> usize {
        // Upper-inclusive edges keep training values at a cut point on the
        // left side, matching the assignment built from the same edges.
        self.upper_edges.iter().position(|&e| value <= e).unwrap_or(self.bin_count - 1)
    }

    /// True when the requested resolution collapsed (ties or constants).
    pub fn degenerate(&self) -> bool {
        self.bin_count < self.requested_bins
    }
}

pub fn build_bins(
    feature: usize,
    column: &[f64],
    bin_count: usize,
) -> Result<BinPartition, BoostError> {
    if bin_count < 2 {
        return Err(BoostError::BadBinCount(bin_count));
    }
    if column.is_empty() {
        return Err(BoostError::BadConfig("cannot bin an empty column".into()));
    }
    let n = column.len();
    let mut sorted = column.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("non-NaN feature values"));

    let mut edges = Vec::with_capacity(bin_count - 1);
    for k in 1..bin_count {
        let pos = n * k / bin_count;
        if pos == 0 || pos >= n {
            continue;
        }
        let edge = sorted[pos - 1];
        // Ties collapse duplicate cut points; an edge equal to the global
        // maximum would leave the last bin empty.
        if edge < sorted[n - 1] && edges.last() != Some(&edge) {
            edges.push(edge);
        }
    }
    let effective = edges.len() + 1;
    let mut partition = BinPartition {
        feature,
        upper_edges: edges,
        assignment: Vec::with_capacity(n),
        bin_count: effective,
        requested_bins: bin_count,
    };
    partition.assignment = column.iter().map(|&v| partition.bin_of(v)).collect();
    Ok(partition)
}
