//! Dataset plumbing: synthetic generation, CSV ingestion, vertical
//! partitioning, and train/test splitting. Everything is seeded and
//! deterministic.

use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("column {0} not found in header")]
    MissingColumn(String),
    #[error("row {row}: duplicate id {id}")]
    DuplicateId { row: usize, id: String },
    #[error("row {row}: missing id")]
    MissingId { row: usize },
    #[error("row {row}, column {column}: non-numeric value {value:?}")]
    NonNumeric { row: usize, column: String, value: String },
    #[error("row {row}: expected {expected} fields, found {found}")]
    RaggedRow { row: usize, expected: usize, found: usize },
    #[error("partition leaves party {0} with no features")]
    EmptyPartition(char),
    #[error("partition is not a disjoint cover of the feature set: {0}")]
    BadPartition(String),
    #[error("invalid distribution parameters: {0}")]
    BadDistribution(String),
    #[error("{0}")]
    Invalid(String),
}

/// Dense row-major matrix of feature values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols));
        let n = rows.len();
        Self { rows: n, cols, data: rows.into_iter().flatten().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hcat(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows);
        let mut out = Matrix::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            out.data[i * out.cols..i * out.cols + self.cols].copy_from_slice(self.row(i));
            out.data[i * out.cols + self.cols..(i + 1) * out.cols]
                .copy_from_slice(other.row(i));
        }
        out
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(idx.len(), self.cols);
        for (r, &i) in idx.iter().enumerate() {
            out.data[r * self.cols..(r + 1) * self.cols].copy_from_slice(self.row(i));
        }
        out
    }

    pub fn select_cols(&self, idx: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.rows, idx.len());
        for i in 0..self.rows {
            for (c, &j) in idx.iter().enumerate() {
                out.set(i, c, self.get(i, j));
            }
        }
        out
    }
}

/// A centralized dataset before vertical partitioning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub ids: Vec<String>,
    pub feature_names: Vec<String>,
    pub x: Matrix,
    pub y: Vec<f64>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn select(&self, idx: &[usize]) -> Dataset {
        Dataset {
            ids: idx.iter().map(|&i| self.ids[i].clone()).collect(),
            feature_names: self.feature_names.clone(),
            x: self.x.select_rows(idx),
            y: idx.iter().map(|&i| self.y[i]).collect(),
        }
    }
}

/// The two parties' views of one dataset: identical id order, disjoint
/// feature blocks, labels held by the active party A.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerticalDataset {
    pub ids: Vec<String>,
    pub x_a: Matrix,
    pub x_b: Matrix,
    pub y: Vec<f64>,
}

impl VerticalDataset {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn d_a(&self) -> usize {
        self.x_a.cols()
    }

    pub fn d_b(&self) -> usize {
        self.x_b.cols()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistKind {
    Normal { mean: f64, std: f64 },
    Bernoulli { p: f64 },
    Exponential { rate: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl fmt::Display for DistKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistKind::Normal { mean, std } => write!(f, "normal({mean},{std})"),
            DistKind::Bernoulli { p } => write!(f, "bernoulli({p})"),
            DistKind::Exponential { rate } => write!(f, "exponential({rate})"),
            DistKind::Uniform { lo, hi } => write!(f, "uniform({lo},{hi})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    pub kind: DistKind,
    pub n: usize,
    pub seed: u64,
}

/// Draw one column. Deterministic per (kind, n, seed).
pub fn sample_column(spec: &DistributionSpec) -> Result<Vec<f64>, DataError> {
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let n = spec.n;
    match spec.kind {
        DistKind::Normal { mean, std } => {
            let d = Normal::new(mean, std)
                .map_err(|e| DataError::BadDistribution(e.to_string()))?;
            Ok((0..n).map(|_| d.sample(&mut rng)).collect())
        }
        DistKind::Bernoulli { p } => {
            if !(0.0..=1.0).contains(&p) {
                return Err(DataError::BadDistribution(format!("bernoulli p={p}")));
            }
            Ok((0..n).map(|_| if rng.gen::<f64>() < p { 1.0 } else { 0.0 }).collect())
        }
        DistKind::Exponential { rate } => {
            let d = Exp::new(rate).map_err(|e| DataError::BadDistribution(e.to_string()))?;
            Ok((0..n).map(|_| d.sample(&mut rng)).collect())
        }
        DistKind::Uniform { lo, hi } => {
            if !(lo < hi) {
                return Err(DataError::BadDistribution(format!("uniform [{lo},{hi})")));
            }
            Ok((0..n).map(|_| rng.gen_range(lo..hi)).collect())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelTeacher {
    pub seed: u64,
    /// Scale of the logistic noise added to the teacher margin; 0 gives a
    /// linearly separable labeling.
    pub noise: f64,
    /// Emit the raw margin instead of a thresholded class label.
    pub regression: bool,
}

impl LabelTeacher {
    pub fn new(seed: u64) -> Self {
        Self { seed, noise: 0.0, regression: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub columns: Vec<DistributionSpec>,
    pub teacher: LabelTeacher,
}

/// Generate a synthetic dataset: one column per distribution spec, labels
/// from a seeded linear teacher on the features plus optional logistic
/// noise. Classification labels are balanced by thresholding the teacher
/// margin at its median.
pub fn gen_synthetic(spec: &SyntheticSpec) -> Result<Dataset, DataError> {
    let n = spec.columns.first().map(|c| c.n).unwrap_or(0);
    if n == 0 {
        return Err(DataError::Invalid("synthetic dataset needs at least one column".into()));
    }
    if spec.columns.iter().any(|c| c.n != n) {
        return Err(DataError::Invalid("all columns must share the same sample count".into()));
    }
    let cols: Vec<Vec<f64>> =
        spec.columns.iter().map(sample_column).collect::<Result<_, _>>()?;
    let d = cols.len();
    let mut x = Matrix::zeros(n, d);
    for (j, col) in cols.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            x.set(i, j, v);
        }
    }

    let mut rng = ChaCha20Rng::seed_from_u64(spec.teacher.seed ^ 0x5bd1_e995);
    let teacher: Vec<f64> = (0..d)
        .map(|_| Normal::new(0.0, 1.0).unwrap().sample(&mut rng))
        .collect();
    let margins: Vec<f64> =
        (0..n).map(|i| x.row(i).iter().zip(&teacher).map(|(a, b)| a * b).sum()).collect();

    let y = if spec.teacher.regression {
        margins
            .iter()
            .map(|&m| m + spec.teacher.noise * logistic_sample(&mut rng))
            .collect()
    } else {
        let mut sorted = margins.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = sorted[n / 2];
        margins
            .iter()
            .map(|&m| {
                let z = m - median + spec.teacher.noise * logistic_sample(&mut rng);
                if z >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect()
    };

    Ok(Dataset {
        ids: (0..n).map(|i| i.to_string()).collect(),
        feature_names: spec.columns.iter().map(|c| c.kind.to_string()).collect(),
        x,
        y,
    })
}

fn logistic_sample(rng: &mut ChaCha20Rng) -> f64 {
    let u: f64 = rng.gen_range(1e-12..1.0 - 1e-12);
    (u / (1.0 - u)).ln()
}

/// Feature index sets for the two parties; labels always stay with A.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionSpec {
    pub a_features: Vec<usize>,
    pub b_features: Vec<usize>,
}

impl PartitionSpec {
    /// First `a_count` features to A, the rest to B.
    pub fn head_split(d: usize, a_count: usize) -> Self {
        Self {
            a_features: (0..a_count.min(d)).collect(),
            b_features: (a_count.min(d)..d).collect(),
        }
    }
}

pub fn partition(ds: &Dataset, spec: &PartitionSpec) -> Result<VerticalDataset, DataError> {
    if spec.a_features.is_empty() {
        return Err(DataError::EmptyPartition('A'));
    }
    if spec.b_features.is_empty() {
        return Err(DataError::EmptyPartition('B'));
    }
    let d = ds.x.cols();
    let mut seen = vec![false; d];
    for &j in spec.a_features.iter().chain(&spec.b_features) {
        if j >= d {
            return Err(DataError::BadPartition(format!("feature index {j} out of range")));
        }
        if seen[j] {
            return Err(DataError::BadPartition(format!("feature {j} assigned twice")));
        }
        seen[j] = true;
    }
    if seen.iter().any(|s| !s) {
        let missing: Vec<usize> =
            seen.iter().enumerate().filter(|(_, s)| !**s).map(|(j, _)| j).collect();
        return Err(DataError::BadPartition(format!("features {missing:?} unassigned")));
    }
    Ok(VerticalDataset {
        ids: ds.ids.clone(),
        x_a: ds.x.select_cols(&spec.a_features),
        x_b: ds.x.select_cols(&spec.b_features),
        y: ds.y.clone(),
    })
}

/// Seeded shuffle split; `train_fraction` of the samples go to the first
/// returned dataset.
pub fn train_test_split(ds: &Dataset, train_fraction: f64, seed: u64) -> (Dataset, Dataset) {
    let n = ds.len();
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x8020_2020);
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        idx.swap(i, j);
    }
    let cut = ((n as f64) * train_fraction).round() as usize;
    (ds.select(&idx[..cut]), ds.select(&idx[cut..]))
}

/// Load a headered CSV of numeric features. `id_column` and `label_column`
/// name the columns carrying sample ids and labels; everything else is a
/// feature.
pub fn load_csv(
    path: &Path,
    id_column: &str,
    label_column: &str,
) -> Result<Dataset, DataError> {
    let text = std::fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_csv(&text, id_column, label_column)
}

pub fn parse_csv(text: &str, id_column: &str, label_column: &str) -> Result<Dataset, DataError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| DataError::Invalid("empty csv".into()))?;
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    let id_idx = names
        .iter()
        .position(|&c| c == id_column)
        .ok_or_else(|| DataError::MissingColumn(id_column.into()))?;
    let label_idx = names
        .iter()
        .position(|&c| c == label_column)
        .ok_or_else(|| DataError::MissingColumn(label_column.into()))?;
    if id_idx == label_idx {
        return Err(DataError::Invalid("id and label columns must differ".into()));
    }
    let feature_idx: Vec<usize> =
        (0..names.len()).filter(|&j| j != id_idx && j != label_idx).collect();
    let feature_names: Vec<String> =
        feature_idx.iter().map(|&j| names[j].to_string()).collect();

    let mut ids = Vec::new();
    let mut rows = Vec::new();
    let mut y = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (line_no, line) in lines {
        let row = line_no + 1; // 1-based for diagnostics
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != names.len() {
            return Err(DataError::RaggedRow { row, expected: names.len(), found: fields.len() });
        }
        let id = fields[id_idx];
        if id.is_empty() {
            return Err(DataError::MissingId { row });
        }
        if !seen.insert(id.to_string()) {
            return Err(DataError::DuplicateId { row, id: id.into() });
        }
        let parse = |j: usize| -> Result<f64, DataError> {
            fields[j].parse::<f64>().map_err(|_| DataError::NonNumeric {
                row,
                column: names[j].to_string(),
                value: fields[j].to_string(),
            })
        };
        y.push(parse(label_idx)?);
        rows.push(feature_idx.iter().map(|&j| parse(j)).collect::<Result<Vec<_>, _>>()?);
        ids.push(id.to_string());
    }
    Ok(Dataset { ids, feature_names, x: Matrix::from_rows(rows), y })
}
