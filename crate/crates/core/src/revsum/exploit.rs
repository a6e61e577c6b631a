//! Exploitation of recovered partial orders: success accounting, bin-bound
//! inference from auxiliary samples, and the alternative classifier trained
//! on the leaked representation.

use std::collections::BTreeMap;

use serde::Serialize;

use super::plan::AssignmentTable;
use super::solver::RecoveredBins;
use crate::data::{Matrix, VerticalDataset};
use crate::sboost::{train_reference, BinPartition, BoostConfig, BoostError, BoostResult};

/// Recovered sample-to-bin mapping of one feature (a partial function on
/// the encoded samples).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartialOrder {
    pub feature: usize,
    pub assignment: BTreeMap<usize, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureSuccess {
    pub feature: usize,
    pub encoded: usize,
    /// Samples the attack committed to a bin.
    pub recovered: usize,
    /// Recovered samples whose bin matches the ground truth.
    pub correct: usize,
    pub success_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuccessReport {
    pub per_feature: Vec<FeatureSuccess>,
    pub overall_rate: f64,
}

/// Fold per-bin recoveries into per-feature partial orders and score them
/// against the ground-truth assignment (the ground truth feeds only the
/// metric, never the attack).
pub fn assemble_partial_orders(
    recovered: &RecoveredBins,
    table: &AssignmentTable,
    truth: &[BinPartition],
) -> (Vec<PartialOrder>, SuccessReport) {
    let encoded: Vec<usize> = table.codes.iter().map(|c| c.sample).collect();
    let mut orders = Vec::new();
    let mut per_feature = Vec::new();
    let mut correct_total = 0usize;
    for feature in &recovered.features {
        let mut assignment = BTreeMap::new();
        for bin in &feature.bins {
            for &s in &bin.samples {
                assignment.insert(s, bin.bin);
            }
        }
        let mut correct = 0usize;
        for &s in &encoded {
            if assignment.get(&s) == Some(&truth[feature.feature].assignment[s]) {
                correct += 1;
            }
        }
        correct_total += correct;
        per_feature.push(FeatureSuccess {
            feature: feature.feature,
            encoded: encoded.len(),
            recovered: assignment.len(),
            correct,
            success_rate: if encoded.is_empty() {
                0.0
            } else {
                correct as f64 / encoded.len() as f64
            },
        });
        orders.push(PartialOrder { feature: feature.feature, assignment });
    }
    let overall_rate = if encoded.is_empty() || per_feature.is_empty() {
        0.0
    } else {
        correct_total as f64 / (encoded.len() * per_feature.len()) as f64
    };
    (orders, SuccessReport { per_feature, overall_rate })
}

/// Inferred value interval of one bin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinBounds {
    pub bin: usize,
    pub lo: f64,
    pub hi: f64,
    pub support: usize,
}

/// Bound every bin of a feature by the min/max of the auxiliary samples
/// that the attack placed there. Bins no auxiliary sample hits stay
/// unknown.
pub fn infer_bin_bounds(
    partial: &PartialOrder,
    aux_ids: &[usize],
    column: &[f64],
    bin_count: usize,
) -> Vec<Option<BinBounds>> {
    let mut bounds: Vec<Option<BinBounds>> = vec![None; bin_count];
    for &s in aux_ids {
        let Some(&bin) = partial.assignment.get(&s) else { continue };
        let v = column[s];
        let entry = bounds[bin].get_or_insert(BinBounds { bin, lo: v, hi: v, support: 0 });
        entry.lo = entry.lo.min(v);
        entry.hi = entry.hi.max(v);
        entry.support += 1;
    }
    bounds
}

#[derive(Debug, Clone, Serialize)]
pub struct AlternativeReport {
    pub original_accuracy: f64,
    pub alternative_accuracy: f64,
    /// Fraction of test samples where the two models predict identically.
    pub prediction_agreement: f64,
    pub covered_features: Vec<usize>,
    pub excluded_features: Vec<usize>,
}

fn map_to_representative(v: f64, bounds: &[Option<BinBounds>]) -> f64 {
    let mut last = None;
    for b in bounds.iter().flatten() {
        if v <= b.hi {
            return 0.5 * (b.lo + b.hi);
        }
        last = Some(b);
    }
    let b = last.expect("covered feature has at least one bound");
    0.5 * (b.lo + b.hi)
}

fn substituted(data: &VerticalDataset, inferred: &[Vec<Option<BinBounds>>], covered: &[usize]) -> VerticalDataset {
    let n = data.len();
    let mut x_b = if covered.is_empty() {
        // No leaked features: a constant column never splits, leaving an
        // A-only model.
        Matrix::zeros(n, 1)
    } else {
        Matrix::zeros(n, covered.len())
    };
    for (c, &j) in covered.iter().enumerate() {
        for i in 0..n {
            x_b.set(i, c, map_to_representative(data.x_b.get(i, j), &inferred[j]));
        }
    }
    VerticalDataset { ids: data.ids.clone(), x_a: data.x_a.clone(), x_b, y: data.y.clone() }
}

/// Train a boosted model with B's raw features replaced by inferred-bin
/// representatives, and compare it with the original model on held-out
/// data.
pub fn evaluate_alternative(
    original: &BoostResult,
    train: &VerticalDataset,
    test: &VerticalDataset,
    inferred: &[Vec<Option<BinBounds>>],
    config: &BoostConfig,
) -> Result<AlternativeReport, BoostError> {
    let (covered, excluded): (Vec<usize>, Vec<usize>) =
        (0..train.d_b()).partition(|&j| !inferred[j].is_empty() && inferred[j].iter().all(Option::is_some));

    let alt_train = substituted(train, inferred, &covered);
    let alt_test = substituted(test, inferred, &covered);
    let alternative = train_reference(&alt_train, config)?;

    let n_test = test.len();
    let mut orig_hits = 0usize;
    let mut alt_hits = 0usize;
    let mut agree = 0usize;
    for i in 0..n_test {
        let orig =
            original.model.predict(test.x_a.row(i), test.x_b.row(i), &original.bins_b);
        let alt = alternative.model.predict(
            alt_test.x_a.row(i),
            alt_test.x_b.row(i),
            &alternative.bins_b,
        );
        if orig == test.y[i] {
            orig_hits += 1;
        }
        if alt == test.y[i] {
            alt_hits += 1;
        }
        if orig == alt {
            agree += 1;
        }
    }
    Ok(AlternativeReport {
        original_accuracy: orig_hits as f64 / n_test as f64,
        alternative_accuracy: alt_hits as f64 / n_test as f64,
        prediction_agreement: agree as f64 / n_test as f64,
        covered_features: covered,
        excluded_features: excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::revsum::plan::{build_assignment, plan_encoding};
    use crate::revsum::solver::reverse_sums;
    use crate::revsum::solver::DEFAULT_SEARCH_BUDGET;
    use crate::logreg::tests::small_dataset;
    use crate::sboost::train_layout_sim;

    #[test]
    fn fully_confident_recovery_scores_one() {
        let data = small_dataset(120, 2, 2, 71);
        let config = BoostConfig { key_bits: 1152, bins: 8, seed: 3, ..Default::default() };
        let plan = plan_encoding(120, 2, 2).unwrap();
        let table = build_assignment(&plan, 120, 9);
        let magic = table.magic_words(120);
        let result = train_layout_sim(&data, &config, Some(&magic)).unwrap();
        let recovered = reverse_sums(&result.histograms, &table, 0, DEFAULT_SEARCH_BUDGET);
        let (orders, report) = assemble_partial_orders(&recovered, &table, &result.bins_b);
        assert_eq!(report.overall_rate, 1.0, "{report:?}");
        for order in &orders {
            assert_eq!(order.assignment.len(), 120);
            for (&s, &bin) in &order.assignment {
                assert_eq!(bin, result.bins_b[order.feature].assignment[s]);
            }
        }
    }

    #[test]
    fn full_aux_bounds_equal_true_bin_extremes() {
        let data = small_dataset(100, 2, 1, 73);
        let config = BoostConfig { key_bits: 1152, bins: 8, seed: 5, ..Default::default() };
        let plan = plan_encoding(100, 2, 2).unwrap();
        let table = build_assignment(&plan, 100, 1);
        let magic = table.magic_words(100);
        let result = train_layout_sim(&data, &config, Some(&magic)).unwrap();
        let recovered = reverse_sums(&result.histograms, &table, 0, DEFAULT_SEARCH_BUDGET);
        let (orders, _) = assemble_partial_orders(&recovered, &table, &result.bins_b);
        let column = data.x_b.column(0);
        let aux: Vec<usize> = (0..100).collect();
        let bounds =
            infer_bin_bounds(&orders[0], &aux, &column, result.bins_b[0].bin_count);
        for (q, b) in bounds.iter().enumerate() {
            let b = b.expect("full aux covers every bin");
            let members: Vec<f64> = (0..100)
                .filter(|&i| result.bins_b[0].assignment[i] == q)
                .map(|i| column[i])
                .collect();
            let lo = members.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = members.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert_eq!((b.lo, b.hi), (lo, hi), "bin {q}");
            assert_eq!(b.support, members.len());
        }
    }

    #[test]
    fn empty_aux_leaves_all_bins_unknown() {
        let partial = PartialOrder { feature: 0, assignment: BTreeMap::new() };
        let bounds = infer_bin_bounds(&partial, &[], &[1.0, 2.0], 4);
        assert!(bounds.iter().all(Option::is_none));
    }

    #[test]
    fn inferred_interval_is_inside_the_true_bin() {
        let mut assignment = BTreeMap::new();
        for s in 0..10 {
            assignment.insert(s, s / 5);
        }
        let partial = PartialOrder { feature: 0, assignment };
        let column: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let bounds = infer_bin_bounds(&partial, &[1, 3, 7], &column, 2);
        let b0 = bounds[0].unwrap();
        assert_eq!((b0.lo, b0.hi, b0.support), (1.0, 3.0, 2));
        let b1 = bounds[1].unwrap();
        assert_eq!((b1.lo, b1.hi, b1.support), (7.0, 7.0, 1));
        // Subset min/max never escapes the true interval [0,4] / [5,9].
        assert!(b0.lo >= 0.0 && b0.hi <= 4.0);
        assert!(b1.lo >= 5.0 && b1.hi <= 9.0);
    }

    #[test]
    fn zero_leaked_features_degrade_to_a_only_model() {
        let data = small_dataset(80, 3, 1, 79);
        let (train, test) = {
            let idx: Vec<usize> = (0..64).collect();
            let tidx: Vec<usize> = (64..80).collect();
            (
                VerticalDataset {
                    ids: idx.iter().map(|i| i.to_string()).collect(),
                    x_a: data.x_a.select_rows(&idx),
                    x_b: data.x_b.select_rows(&idx),
                    y: idx.iter().map(|&i| data.y[i]).collect(),
                },
                VerticalDataset {
                    ids: tidx.iter().map(|i| i.to_string()).collect(),
                    x_a: data.x_a.select_rows(&tidx),
                    x_b: data.x_b.select_rows(&tidx),
                    y: tidx.iter().map(|&i| data.y[i]).collect(),
                },
            )
        };
        let config = BoostConfig { key_bits: 1152, bins: 8, seed: 7, ..Default::default() };
        let original = train_reference(&train, &config).unwrap();
        // Nothing leaked: one empty bounds list.
        let inferred = vec![vec![None; 8]];
        let report = evaluate_alternative(&original, &train, &test, &inferred, &config).unwrap();
        assert!(report.covered_features.is_empty());
        assert_eq!(report.excluded_features, vec![0]);
        // The alternative had strictly less information; it cannot win by
        // more than chance, and it must still produce a valid accuracy.
        assert!((0.0..=1.0).contains(&report.alternative_accuracy));
    }
}
