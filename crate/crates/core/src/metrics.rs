//! Information loss, privacy verifiers and an independent transport oracle.
//!
//! The verifiers deliberately use the dense distribution path from
//! [`crate::emd`] rather than the rank index the algorithms use.

use std::collections::HashMap;

use serde::Serialize;

use crate::dataset::{NormalizationParams, Role, Table};
use crate::emd::{distribution_of, emd_ordered, table_support, Distribution};
use crate::error::{Error, Result};
use crate::partition::{AnonymizedTable, Partition};

/// Default tolerance added to `t` when checking closeness.
pub const DEFAULT_SLACK: f64 = 1e-9;

/// Normalized sum of squared errors:
/// `(1/n) sum_records (1/m) sum_attributes NED^2`, where NED is the absolute
/// difference over the attribute's range in the original table and `m`
/// counts every released (non-ignored) attribute.
pub fn normalized_sse(original: &Table, anonymized: &AnonymizedTable, params: &NormalizationParams) -> Result<f64> {
    let anon = anonymized.table();
    if anon.n() != original.n() || anon.specs() != original.specs() {
        return Err(Error::Shape(format!(
            "original has {} rows x {} columns, anonymized has {} x {}",
            original.n(),
            original.specs().len(),
            anon.n(),
            anon.specs().len()
        )));
    }
    if params.columns != original.qi_columns() {
        return Err(Error::Shape(
            "normalization parameters do not match the QI columns".into(),
        ));
    }
    let conf = original.confidential_column();
    let conf_values = original.column(conf);
    let conf_min = conf_values.iter().copied().fold(f64::INFINITY, f64::min);
    let conf_range = conf_values.iter().copied().fold(f64::NEG_INFINITY, f64::max) - conf_min;

    let ned = |diff: f64, range: f64| if range > 0.0 { diff.abs() / range } else { 0.0 };
    let m = original.released_attribute_count() as f64;
    let mut total = 0.0;
    for (a, b) in original.rows().iter().zip(anon.rows()) {
        let mut row_sum = 0.0;
        for (qi_pos, &c) in params.columns.iter().enumerate() {
            row_sum += ned(a[c] - b[c], params.range(qi_pos)).powi(2);
        }
        row_sum += ned(a[conf] - b[conf], conf_range).powi(2);
        total += row_sum / m;
    }
    Ok(total / original.n() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KAnonymityCheck {
    pub passed: bool,
    pub k: usize,
    pub min_class_size: usize,
    pub classes: usize,
    /// QI combination occurring fewer than `k` times, with its count.
    pub witness: Option<(Vec<f64>, usize)>,
}

fn key(values: impl Iterator<Item = f64>) -> Vec<u64> {
    // +0.0 and -0.0 are the same released value
    values.map(|v| if v == 0.0 { 0 } else { v.to_bits() }).collect()
}

/// Passes iff every distinct QI combination in `released` occurs in at least `k` rows.
pub fn verify_k_anonymity(released: &Table, k: usize) -> KAnonymityCheck {
    let qi = released.qi_columns();
    let mut classes: HashMap<Vec<u64>, (usize, usize)> = HashMap::new();
    for (i, row) in released.rows().iter().enumerate() {
        classes.entry(key(qi.iter().map(|&c| row[c]))).or_insert((0, i)).0 += 1;
    }
    let min_class_size = classes.values().map(|&(count, _)| count).min().unwrap_or(0);
    let witness = classes
        .values()
        .filter(|&&(count, _)| count < k)
        .min_by_key(|&&(count, first)| (count, first))
        .map(|&(count, first)| (qi.iter().map(|&c| released.row(first)[c]).collect(), count));
    KAnonymityCheck {
        passed: witness.is_none(),
        k,
        min_class_size,
        classes: classes.len(),
        witness,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TClosenessCheck {
    pub passed: bool,
    pub tau: f64,
    pub slack: f64,
    pub worst_cluster: usize,
    pub worst_emd: f64,
}

/// Passes iff every cluster's EMD to the whole table is at most `tau + slack`.
pub fn verify_t_closeness(table: &Table, partition: &Partition, tau: f64, slack: f64) -> Result<TClosenessCheck> {
    let emds = cluster_emds(table, partition)?;
    let (worst_cluster, worst_emd) =
        emds.iter().copied().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |best, (i, e)| if e > best.1 { (i, e) } else { best },
        );
    Ok(TClosenessCheck {
        passed: worst_emd <= tau + slack,
        tau,
        slack,
        worst_cluster,
        worst_emd,
    })
}

/// EMD of every cluster against the table, in partition order.
pub fn cluster_emds(table: &Table, partition: &Partition) -> Result<Vec<f64>> {
    if partition.n() != table.n() {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} records, table has {}",
            partition.n(),
            table.n()
        )));
    }
    let support = table_support(table);
    let whole = distribution_of(&table.confidential_values(), &support)?;
    partition
        .clusters()
        .iter()
        .map(|c| {
            let values: Vec<f64> = c.iter().map(|&i| table.confidential(i)).collect();
            emd_ordered(&distribution_of(&values, &support)?, &whole)
        })
        .collect()
}

/// Optimal transport cost between `p` and `q` with ground distance
/// `|i - j| / (m - 1)`, computed by moving mass greedily from the lowest
/// remaining source bin to the lowest remaining target bin (the monotone
/// coupling, optimal for a convex ground cost on a line).
pub fn transport_oracle_emd(p: &Distribution, q: &Distribution) -> Result<f64> {
    if p.support() != q.support() {
        return Err(Error::SupportMismatch);
    }
    let m = p.m();
    if m < 2 {
        return Ok(0.0);
    }
    let mut supply = p.mass().to_vec();
    let mut demand = q.mass().to_vec();
    let (mut i, mut j) = (0, 0);
    let mut cost = 0.0;
    while i < m && j < m {
        let moved = supply[i].min(demand[j]);
        cost += moved * i.abs_diff(j) as f64;
        supply[i] -= moved;
        demand[j] -= moved;
        if supply[i] <= demand[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    Ok(cost / (m - 1) as f64)
}

/// (smallest cluster size, mean cluster size).
pub fn cluster_size_stats(partition: &Partition) -> (usize, f64) {
    let sizes = partition.sizes();
    let min = sizes.iter().copied().min().unwrap_or(0);
    let avg = sizes.iter().sum::<usize>() as f64 / sizes.len().max(1) as f64;
    (min, avg)
}

/// Whether every confidential cell of the release equals the original.
pub fn confidential_unchanged(original: &Table, anonymized: &AnonymizedTable) -> bool {
    let anon = anonymized.table();
    anon.n() == original.n()
        && anon.specs().iter().position(|s| s.role == Role::Confidential) == Some(original.confidential_column())
        && original.confidential_values() == anon.confidential_values()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{minmax_params, AttributeSpec};
    use crate::partition::{aggregate, Cluster};
    use proptest::prelude::*;

    fn ranks_table(n: usize) -> Table {
        Table::new(
            vec![AttributeSpec::qi("q"), AttributeSpec::confidential("c")],
            (1..=n).map(|i| vec![i as f64, i as f64]).collect(),
        )
        .unwrap()
    }

    #[test]
    fn sse_identity_is_zero() {
        let t = ranks_table(5);
        let p = Partition::from_labels(&[0, 1, 2, 3, 4]).unwrap();
        let anon = aggregate(&t, &p).unwrap();
        assert_eq!(normalized_sse(&t, &anon, &minmax_params(&t)).unwrap(), 0.0);
    }

    #[test]
    fn sse_two_records_collapsed() {
        let t = Table::new(
            vec![AttributeSpec::qi("q"), AttributeSpec::confidential("c")],
            vec![vec![0.0, 1.0], vec![10.0, 2.0]],
        )
        .unwrap();
        let anon = aggregate(&t, &Partition::from_labels(&[0, 0]).unwrap()).unwrap();
        let sse = normalized_sse(&t, &anon, &minmax_params(&t)).unwrap();
        assert!((sse - 0.125).abs() < 1e-15);
    }

    #[test]
    fn sse_ignores_ignored_columns_and_checks_shape() {
        let t = Table::new(
            vec![
                AttributeSpec::qi("q"),
                AttributeSpec::new("id", Role::Ignored),
                AttributeSpec::confidential("c"),
            ],
            vec![vec![0.0, 7.0, 1.0], vec![10.0, 8.0, 2.0]],
        )
        .unwrap();
        let anon = aggregate(&t, &Partition::from_labels(&[0, 0]).unwrap()).unwrap();
        let sse = normalized_sse(&t, &anon, &minmax_params(&t)).unwrap();
        assert!((sse - 0.125).abs() < 1e-15);
        let other = ranks_table(2);
        assert!(matches!(
            normalized_sse(&other, &anon, &minmax_params(&other)),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn sse_coarsening_never_decreases() {
        let t = crate::synth::synth_generate(&crate::synth::SynthConfig::new(60, 2, 0.5, 1)).unwrap();
        let params = minmax_params(&t);
        let fine = crate::partition::mdav_partition(&t, &params, 3).unwrap();
        let all = Partition::from_labels(&vec![0; 60]).unwrap();
        let a = normalized_sse(&t, &aggregate(&t, &fine).unwrap(), &params).unwrap();
        let b = normalized_sse(&t, &aggregate(&t, &all).unwrap(), &params).unwrap();
        assert!(b >= a && a > 0.0 && b <= 1.0);
    }

    #[test]
    fn k_anonymity_checks() {
        let t = ranks_table(10);
        let p = Partition::new(
            vec![
                Cluster::new(vec![0, 1, 2, 3, 4]).unwrap(),
                Cluster::new(vec![5, 6, 7, 8, 9]).unwrap(),
            ],
            10,
        )
        .unwrap();
        let anon = aggregate(&t, &p).unwrap();
        let ok = verify_k_anonymity(anon.table(), 5);
        assert!(ok.passed);
        assert_eq!(ok.min_class_size, 5);
        let bad = verify_k_anonymity(anon.table(), 6);
        assert!(!bad.passed);
        assert_eq!(bad.witness, Some((vec![3.0], 5)));
        let raw = verify_k_anonymity(&t, 2);
        assert!(!raw.passed);
        assert_eq!(raw.witness.unwrap().1, 1);
    }

    #[test]
    fn t_closeness_checks() {
        let t = ranks_table(6);
        let one = Partition::from_labels(&[0; 6]).unwrap();
        let check = verify_t_closeness(&t, &one, 0.0, DEFAULT_SLACK).unwrap();
        assert!(check.passed);
        assert_eq!(check.worst_emd, 0.0);

        let halves = Partition::from_labels(&[0, 0, 0, 1, 1, 1]).unwrap();
        let check = verify_t_closeness(&t, &halves, 0.2, DEFAULT_SLACK).unwrap();
        assert!(!check.passed);
        assert!((check.worst_emd - 0.3).abs() < 1e-12);
        assert_eq!(check.worst_cluster, 0);
    }

    #[test]
    fn oracle_basic_cases() {
        let support = vec![1.0, 2.0, 3.0, 4.0];
        let p = Distribution::new(support.clone(), vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let q = Distribution::new(support.clone(), vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(transport_oracle_emd(&p, &p).unwrap(), 0.0);
        assert!((transport_oracle_emd(&p, &q).unwrap() - 1.0).abs() < 1e-15);
        let other = Distribution::new(vec![1.0, 2.0, 3.0, 5.0], vec![0.25; 4]).unwrap();
        assert!(transport_oracle_emd(&p, &other).is_err());
    }

    #[test]
    fn size_stats() {
        let p = Partition::from_labels(&[0, 0, 0, 1, 1, 1, 1]).unwrap();
        assert_eq!(cluster_size_stats(&p), (3, 3.5));
        let uniform = Partition::from_labels(&(0..30).map(|i| i / 10).collect::<Vec<_>>()).unwrap();
        assert_eq!(cluster_size_stats(&uniform), (10, 10.0));
    }

    proptest! {
        #[test]
        fn oracle_matches_cumulative_formula(
            m in 2usize..=8,
            raw in proptest::collection::vec((0u32..20, 0u32..20), 8),
        ) {
            let support: Vec<f64> = (0..m).map(|i| i as f64 * 1.5).collect();
            let (a, b): (Vec<u32>, Vec<u32>) = raw[..m].iter().map(|&(x, y)| (x + 1, y + 1)).unzip();
            let dist = |w: &[u32]| {
                let total: u32 = w.iter().sum();
                Distribution::new(support.clone(), w.iter().map(|&x| x as f64 / total as f64).collect()).unwrap()
            };
            let (p, q) = (dist(&a), dist(&b));
            let fast = emd_ordered(&p, &q).unwrap();
            let slow = transport_oracle_emd(&p, &q).unwrap();
            prop_assert!((fast - slow).abs() < 1e-9);
        }
    }
}
