//! Microaggregation followed by merging: the cluster farthest from the
//! table's confidential distribution is merged with its QI-nearest neighbour
//! until every cluster is t-close.

use std::time::Instant;

use crate::dataset::{NormalizationParams, Table};
use crate::emd::RankIndex;
use crate::error::{Error, Result};
use crate::partition::{mdav_partition, Cluster, Partition, QiSpace};
use crate::report::{validate_run, Algorithm, Finish, RunOutput};

struct Group {
    members: Vec<usize>,
    // centroid in normalized QI space
    centroid: Vec<f64>,
    emd: f64,
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Coarsens `partition` until every cluster's EMD to the table is at most `tau`.
///
/// Each step merges the cluster with the greatest EMD (lowest index on ties)
/// into the cluster whose centroid is nearest in normalized QI space (lowest
/// index on ties). The merged cluster takes the lower of the two positions.
pub fn merge_until_tclose(
    table: &Table,
    params: &NormalizationParams,
    partition: &Partition,
    tau: f64,
) -> Result<Partition> {
    if tau.is_nan() || tau < 0.0 {
        return Err(Error::param("t", format!("need t >= 0, got {tau}")));
    }
    if partition.n() != table.n() {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} records, table has {}",
            partition.n(),
            table.n()
        )));
    }
    let space = QiSpace::new(table, params);
    let index = RankIndex::new(table);
    merge_groups(&space, &index, partition, tau)
}

pub(crate) fn merge_groups(space: &QiSpace, index: &RankIndex, partition: &Partition, tau: f64) -> Result<Partition> {
    let mut groups: Vec<Group> = partition
        .clusters()
        .iter()
        .map(|c| Group {
            members: c.to_vec(),
            centroid: space.mean_of(c),
            emd: index.cluster_emd(c),
        })
        .collect();

    while groups.len() > 1 {
        let (worst, worst_emd) =
            groups.iter().enumerate().fold(
                (0, f64::NEG_INFINITY),
                |best, (i, g)| if g.emd > best.1 { (i, g.emd) } else { best },
            );
        if worst_emd <= tau {
            break;
        }
        let target = &groups[worst].centroid;
        let (nearest, _) =
            groups
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != worst)
                .fold((usize::MAX, f64::INFINITY), |best, (i, g)| {
                    let d = dist2(&g.centroid, target);
                    if d < best.1 {
                        (i, d)
                    } else {
                        best
                    }
                });
        let (lo, hi) = (worst.min(nearest), worst.max(nearest));
        let absorbed = groups.remove(hi);
        let keep = &mut groups[lo];
        let (a, b) = (keep.members.len() as f64, absorbed.members.len() as f64);
        keep.centroid
            .iter_mut()
            .zip(&absorbed.centroid)
            .for_each(|(c, d)| *c = (*c * a + d * b) / (a + b));
        keep.members.extend(absorbed.members);
        keep.emd = index.cluster_emd(&keep.members);
    }

    let clusters = groups
        .into_iter()
        .map(|g| Cluster::new(g.members))
        .collect::<Result<Vec<_>>>()?;
    Partition::new(clusters, partition.n())
}

pub fn run_merge_algorithm(table: &Table, k: usize, tau: f64) -> Result<RunOutput> {
    let params = validate_run(table, k, tau)?;
    let started = Instant::now();
    let initial = mdav_partition(table, &params, k)?;
    let merged = merge_until_tclose(table, &params, &initial, tau)?;
    Finish {
        table,
        params: &params,
        algorithm: Algorithm::Merge,
        k_requested: k,
        k_effective: k,
        tau,
        merges: initial.len() - merged.len(),
        started,
    }
    .run(merged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{minmax_params, AttributeSpec};
    use crate::metrics::{verify_k_anonymity, verify_t_closeness, DEFAULT_SLACK};
    use crate::synth::{synth_generate, SynthConfig};

    fn ranks_table(n: usize) -> Table {
        Table::new(
            vec![AttributeSpec::qi("q"), AttributeSpec::confidential("c")],
            (1..=n).map(|i| vec![i as f64, i as f64]).collect(),
        )
        .unwrap()
    }

    #[test]
    fn already_close_partition_is_unchanged() {
        let t = ranks_table(6);
        let p = Partition::from_labels(&[0, 1, 0, 1, 0, 1]).unwrap();
        let out = merge_until_tclose(&t, &minmax_params(&t), &p, 0.2).unwrap();
        assert_eq!(out, p);
    }

    #[test]
    fn zero_threshold_collapses_to_one_cluster() {
        let t = ranks_table(12);
        let params = minmax_params(&t);
        let p = mdav_partition(&t, &params, 2).unwrap();
        let out = merge_until_tclose(&t, &params, &p, 0.0).unwrap();
        assert_eq!(out.len(), 1);
        let check = verify_t_closeness(&t, &out, 0.0, 0.0).unwrap();
        assert_eq!(check.worst_emd, 0.0);
    }

    #[test]
    fn violating_pair_is_merged() {
        let t = ranks_table(6);
        let p = Partition::from_labels(&[0, 0, 0, 1, 1, 1]).unwrap();
        let out = merge_until_tclose(&t, &minmax_params(&t), &p, 0.2).unwrap();
        assert_eq!(out.len(), 1);
        assert!(merge_until_tclose(&t, &minmax_params(&t), &p, -1.0).is_err());
    }

    #[test]
    fn slack_threshold_means_plain_mdav() {
        let t = synth_generate(&SynthConfig::mcd(5)).unwrap();
        let params = minmax_params(&t);
        // two-record clusters at the extremes of the confidential range reach
        // an EMD near 0.5, so only t >= 0.5 is slack for k = 2
        let out = run_merge_algorithm(&t, 2, 1.0).unwrap();
        assert_eq!(out.report.merges, 0);
        assert_eq!(out.partition, mdav_partition(&t, &params, 2).unwrap());
    }

    #[test]
    fn output_is_a_coarsening_and_verifies() {
        let t = synth_generate(&SynthConfig::new(300, 2, 0.7, 2)).unwrap();
        let params = minmax_params(&t);
        let initial = mdav_partition(&t, &params, 3).unwrap();
        for tau in [0.05, 0.1, 0.2] {
            let out = run_merge_algorithm(&t, 3, tau).unwrap();
            let labels = out.partition.labels();
            for c in initial.clusters() {
                assert!(c.iter().all(|&i| labels[i] == labels[c[0]]));
            }
            assert!(out.report.merges < 300 / 3);
            assert!(out.report.k_min_actual >= 3);
            assert!(verify_k_anonymity(out.anonymized.table(), 3).passed);
            assert!(
                verify_t_closeness(&t, &out.partition, tau, DEFAULT_SLACK)
                    .unwrap()
                    .passed
            );
        }
    }

    #[test]
    fn tiny_threshold_on_1080_records_collapses() {
        let t = synth_generate(&SynthConfig::mcd(7)).unwrap();
        let out = run_merge_algorithm(&t, 2, 0.01).unwrap();
        assert!(out.report.k_min_actual > 20, "{:?}", out.report);
    }
}
