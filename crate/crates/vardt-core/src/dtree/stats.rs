//! Split statistics over feature columns.
//!
//! All of these work on a node's local rows. Missing values form their own
//! group: they enter the information gain and the split information like
//! any other branch, so a column observed on few rows pays for the rows it
//! cannot separate. Correlation is numeric-only; boolean and nominal
//! columns contribute zero and rely on gain ratio alone.

use std::collections::BTreeMap;

use crate::dtree::table::FeatureValue;

pub fn entropy(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let mut h = 0.0;
    for &c in counts {
        if c > 0 {
            let p = c as f64 / total as f64;
            h -= p * p.log2();
        }
    }
    h
}

fn label_entropy(labels: &[bool]) -> f64 {
    let fails = labels.iter().filter(|&&f| f).count();
    entropy(&[fails, labels.len() - fails])
}

/// Gini impurity of a label multiset, failures against passes.
pub fn gini(labels: &[bool]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let fails = labels.iter().filter(|&&f| f).count() as f64;
    let n = labels.len() as f64;
    let pf = fails / n;
    let pp = 1.0 - pf;
    1.0 - pf * pf - pp * pp
}

/// Absolute Pearson correlation over complete pairs. Fewer than two pairs
/// or a constant side yields zero.
pub fn pearson_abs(pairs: &[(f64, f64)]) -> f64 {
    let n = pairs.len() as f64;
    if pairs.len() < 2 {
        return 0.0;
    }
    let mean_x = pairs.iter().map(|(x, _)| x).sum::<f64>() / n;
    let mean_y = pairs.iter().map(|(_, y)| y).sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (x, y) in pairs {
        let dx = x - mean_x;
        let dy = y - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 || var_y == 0.0 {
        return 0.0;
    }
    (cov / (var_x.sqrt() * var_y.sqrt())).abs()
}

/// Correlation between a column and the fail labels, observed rows only.
/// Non-numeric columns score zero.
pub fn column_correlation(values: &[Option<FeatureValue>], labels: &[bool]) -> f64 {
    let pairs: Vec<(f64, f64)> = values
        .iter()
        .zip(labels)
        .filter_map(|(v, &fail)| match v {
            Some(FeatureValue::Num(x)) => Some((*x, if fail { 1.0 } else { 0.0 })),
            _ => None,
        })
        .collect();
    if pairs.len() != values.iter().filter(|v| v.is_some()).count() {
        // mixed or non-numeric observed values: not a numeric column
        return 0.0;
    }
    pearson_abs(&pairs)
}

/// Row partition induced by a column at one node. Group keys are branch
/// labels; missing rows sit under the dedicated unobserved key.
pub fn partition_rows(
    values: &[Option<FeatureValue>],
    theta: Option<f64>,
) -> BTreeMap<String, Vec<usize>> {
    let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (row, v) in values.iter().enumerate() {
        let key = match (v, theta) {
            (None, _) => "unobs".to_string(),
            (Some(FeatureValue::Num(x)), Some(t)) => {
                if *x <= t {
                    "le".to_string()
                } else {
                    "gt".to_string()
                }
            }
            (Some(FeatureValue::Num(x)), None) => format!("={x}"),
            (Some(FeatureValue::Bool(b)), _) => format!("{b}"),
            (Some(FeatureValue::Nom(s)), _) => format!("={s}"),
        };
        groups.entry(key).or_default().push(row);
    }
    groups
}

fn split_scores(groups: &BTreeMap<String, Vec<usize>>, labels: &[bool]) -> (f64, f64) {
    let n = labels.len() as f64;
    let base = label_entropy(labels);
    let mut cond = 0.0;
    let mut sizes = Vec::new();
    for rows in groups.values() {
        let sub: Vec<bool> = rows.iter().map(|&r| labels[r]).collect();
        cond += (sub.len() as f64 / n) * label_entropy(&sub);
        sizes.push(rows.len());
    }
    let gain = base - cond;
    let split_info = entropy(&sizes);
    (gain, split_info)
}

pub fn information_gain(groups: &BTreeMap<String, Vec<usize>>, labels: &[bool]) -> f64 {
    split_scores(groups, labels).0
}

fn distinct_observed(values: &[Option<FeatureValue>]) -> Vec<&FeatureValue> {
    let mut seen: Vec<&FeatureValue> = Vec::new();
    for v in values.iter().flatten() {
        if !seen.iter().any(|s| **s == *v) {
            seen.push(v);
        }
    }
    seen
}

/// Candidate thresholds for a numeric column: midpoints between consecutive
/// distinct observed values, ascending.
pub fn candidate_thresholds(values: &[Option<FeatureValue>]) -> Vec<f64> {
    let mut xs: Vec<f64> = values
        .iter()
        .filter_map(|v| match v {
            Some(FeatureValue::Num(x)) => Some(*x),
            _ => None,
        })
        .collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect()
}

/// Best numeric threshold by information gain; ties take the smallest.
pub fn best_threshold(values: &[Option<FeatureValue>], labels: &[bool]) -> Option<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for theta in candidate_thresholds(values) {
        let gain = information_gain(&partition_rows(values, Some(theta)), labels);
        let better = match best {
            None => true,
            Some((_, g)) => gain > g + 1e-12,
        };
        if better {
            best = Some((theta, gain));
        }
    }
    best
}

/// C4.5-style gain ratio of the column's best split at this node. Zero when
/// the column has fewer than two distinct observed values or the split
/// information vanishes.
pub fn gain_ratio(values: &[Option<FeatureValue>], labels: &[bool]) -> f64 {
    let distinct = distinct_observed(values);
    if distinct.len() < 2 {
        return 0.0;
    }
    let numeric = distinct
        .iter()
        .all(|v| matches!(v, FeatureValue::Num(_)));
    let groups = if numeric {
        match best_threshold(values, labels) {
            Some((theta, _)) => partition_rows(values, Some(theta)),
            None => return 0.0,
        }
    } else {
        partition_rows(values, None)
    };
    let (gain, split_info) = split_scores(&groups, labels);
    if split_info == 0.0 {
        0.0
    } else {
        gain / split_info
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn num(x: f64) -> Option<FeatureValue> {
        Some(FeatureValue::Num(x))
    }

    fn b(v: bool) -> Option<FeatureValue> {
        Some(FeatureValue::Bool(v))
    }

    #[test]
    fn pearson_textbook_value() {
        let pairs = [(1.0, 0.0), (2.0, 0.0), (3.0, 1.0), (4.0, 1.0)];
        assert!((pearson_abs(&pairs) - 0.8944271909999159).abs() < 1e-12);
    }

    #[test]
    fn pearson_degenerate_cases_are_zero() {
        assert_eq!(pearson_abs(&[(1.0, 1.0)]), 0.0);
        assert_eq!(pearson_abs(&[(2.0, 0.0), (2.0, 1.0)]), 0.0);
        assert_eq!(pearson_abs(&[(1.0, 1.0), (2.0, 1.0)]), 0.0);
    }

    #[test]
    fn correlation_excludes_missing_rows_pairwise() {
        let values = vec![num(-1.0), num(-1.0), num(2.0), None];
        let labels = vec![false, false, true, true];
        // pairs: (-1,0), (-1,0), (2,1) -> perfectly separable
        assert!((column_correlation(&values, &labels) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn correlation_of_non_numeric_columns_is_zero() {
        let values = vec![b(true), b(false), b(true)];
        let labels = vec![true, false, true];
        assert_eq!(column_correlation(&values, &labels), 0.0);
        let noms = vec![
            Some(FeatureValue::Nom("a".into())),
            Some(FeatureValue::Nom("b".into())),
        ];
        assert_eq!(column_correlation(&noms, &[true, false]), 0.0);
    }

    #[test]
    fn gini_of_one_third_failures() {
        let g = gini(&[false, false, true]);
        assert!((g - 4.0 / 9.0).abs() < 1e-12);
        assert_eq!(gini(&[false, false]), 0.0);
        assert_eq!(gini(&[]), 0.0);
    }

    #[test]
    fn entropy_of_even_split_is_one_bit() {
        assert!((entropy(&[2, 2]) - 1.0).abs() < 1e-12);
        assert_eq!(entropy(&[4, 0]), 0.0);
        assert!((entropy(&[2, 1, 1]) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn gain_ratio_matches_hand_computation_for_numeric_column() {
        // string lengths per test with one failure
        let values = vec![num(2.0), num(5.0), num(8.0), num(3.0)];
        let labels = vec![false, false, false, true];
        let gr = gain_ratio(&values, &labels);
        assert!((gr - 0.31127812445913283).abs() < 1e-9);
        let (theta, _) = best_threshold(&values, &labels).unwrap();
        assert!((theta - 4.0).abs() < 1e-12);
    }

    #[test]
    fn gain_ratio_with_missing_group_matches_hand_computation() {
        // boolean column unobserved on one passing row
        let values = vec![b(false), b(false), None, b(true)];
        let labels = vec![false, false, false, true];
        let gr = gain_ratio(&values, &labels);
        // all three groups pure: gain 0.8113, split info 1.5
        assert!((gr - 0.5408520829727552).abs() < 1e-9);
    }

    #[test]
    fn gain_ratio_single_outlier_numeric() {
        let values = vec![num(-1.0), num(-1.0), num(2.0), num(-1.0)];
        let labels = vec![false, false, false, true];
        let gr = gain_ratio(&values, &labels);
        assert!((gr - 0.15106563978903303).abs() < 1e-9);
        let (theta, _) = best_threshold(&values, &labels).unwrap();
        assert!((theta - 0.5).abs() < 1e-12);
    }

    #[test]
    fn gain_ratio_degenerate_columns_are_zero() {
        assert_eq!(gain_ratio(&[num(1.0), num(1.0)], &[true, false]), 0.0);
        assert_eq!(gain_ratio(&[None, None], &[true, false]), 0.0);
        // one observed value cannot anchor a threshold, even with a
        // missing-value group available
        assert_eq!(gain_ratio(&[num(1.0), None], &[true, false]), 0.0);
    }

    #[test]
    fn threshold_ties_take_the_smallest_midpoint() {
        // both midpoints separate equally; smallest wins
        let values = vec![num(1.0), num(2.0), num(3.0)];
        let labels = vec![false, true, true];
        let (theta, _) = best_threshold(&values, &labels).unwrap();
        assert!((theta - 1.5).abs() < 1e-12);
    }

    #[test]
    fn threshold_is_exhaustive_argmax() {
        let values = vec![num(10.0), num(3.0), num(7.0), num(1.0), num(5.0)];
        let labels = vec![true, false, true, false, false];
        let (theta, gain) = best_threshold(&values, &labels).unwrap();
        // brute force over all midpoints
        let mut best = (f64::NAN, -1.0f64);
        for t in candidate_thresholds(&values) {
            let g = information_gain(&partition_rows(&values, Some(t)), &labels);
            if g > best.1 + 1e-12 {
                best = (t, g);
            }
        }
        assert_eq!(theta, best.0);
        assert!((gain - best.1).abs() < 1e-12);
    }

    #[test]
    fn nominal_split_is_multiway() {
        let values = vec![
            Some(FeatureValue::Nom("a".into())),
            Some(FeatureValue::Nom("b".into())),
            Some(FeatureValue::Nom("c".into())),
            Some(FeatureValue::Nom("a".into())),
        ];
        let labels = vec![false, true, false, false];
        let groups = partition_rows(&values, None);
        assert_eq!(groups.len(), 3);
        let gr = gain_ratio(&values, &labels);
        // groups pure: gain = H(1/4) = 0.8113; split info = H(2,1,1) = 1.5
        assert!((gr - 0.5408520829727552).abs() < 1e-9);
    }
}
