//! t-closeness-first construction.
//!
//! Records are split by confidential rank into `k` subsets and every cluster
//! takes the QI-nearest record to its seed from each subset, which bounds the
//! cluster's EMD without ever computing it. The cluster size is raised first
//! to the smallest size whose bound meets `t`.

use std::time::Instant;

use crate::bounds::{adjust_cluster_size, required_cluster_size};
use crate::dataset::Table;
use crate::emd::RankIndex;
use crate::error::{Error, Result};
use crate::merge::merge_groups;
use crate::partition::{remove_all, Cluster, Partition, QiSpace};
use crate::report::{validate_run, Algorithm, Finish, RunOutput};

/// Records split into `k` consecutive runs of ascending confidential rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedSubsets {
    subsets: Vec<Vec<usize>>,
    baseline: usize,
    // extra records each subset still holds beyond the baseline
    extras: Vec<usize>,
}

impl RankedSubsets {
    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    pub fn baseline(&self) -> usize {
        self.baseline
    }

    pub fn extras(&self) -> &[usize] {
        &self.extras
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.subsets.iter().map(Vec::len).collect()
    }

    pub fn is_exhausted(&self) -> bool {
        self.subsets.iter().all(Vec::is_empty)
    }
}

/// Splits records, ordered by (confidential value, index), into `k` subsets of
/// `floor(n / k)` records. The `n mod k` leftovers go to the middle subset for
/// odd `k`, or are shared between the two middle subsets (lower one first) for even `k`.
pub fn split_subsets(table: &Table, k: usize) -> Result<RankedSubsets> {
    let n = table.n();
    if k < 2 || k > n {
        return Err(Error::param("k", format!("need 2 <= k <= {n}, got {k}")));
    }
    let (baseline, r) = (n / k, n % k);
    if r > baseline {
        return Err(Error::param(
            "k",
            format!("{r} leftover records exceed the {baseline} clusters; adjust k first"),
        ));
    }
    let mut extras = vec![0; k];
    if k % 2 == 1 {
        extras[k / 2] = r;
    } else {
        extras[k / 2 - 1] = r.div_ceil(2);
        extras[k / 2] = r / 2;
    }
    let order = table.confidential_order();
    let mut subsets = Vec::with_capacity(k);
    let mut start = 0;
    for &e in &extras {
        subsets.push(order[start..start + baseline + e].to_vec());
        start += baseline + e;
    }
    Ok(RankedSubsets {
        subsets,
        baseline,
        extras,
    })
}

fn take_nearest(space: &QiSpace, point: &[f64], subset: &mut Vec<usize>) -> usize {
    let x = space.nearest_to(point, subset);
    let pos = subset.iter().position(|&i| i == x).unwrap();
    subset.swap_remove(pos);
    x
}

/// Takes from every subset the record QI-nearest to `seed_point`, plus a
/// second record from the first subset that still holds extras (at most one
/// extra per cluster).
pub fn build_cluster(space: &QiSpace, seed_point: &[f64], subsets: &mut RankedSubsets) -> Result<Cluster> {
    if subsets.subsets.iter().any(Vec::is_empty) {
        return Err(Error::param("subsets", "a subset is empty"));
    }
    let mut members = Vec::with_capacity(subsets.subsets.len() + 1);
    let mut extra_taken = false;
    for (subset, extra) in subsets.subsets.iter_mut().zip(subsets.extras.iter_mut()) {
        members.push(take_nearest(space, seed_point, subset));
        if !extra_taken && *extra > 0 && !subset.is_empty() {
            members.push(take_nearest(space, seed_point, subset));
            *extra -= 1;
            extra_taken = true;
        }
    }
    Cluster::new(members)
}

/// Cluster size used for `n` records at level `(k, tau)`.
pub fn effective_cluster_size(n: usize, k: usize, tau: f64) -> Result<usize> {
    let required = required_cluster_size(n, k, tau)?;
    Ok(adjust_cluster_size(n, required.min(n)))
}

pub fn run_tfirst_algorithm(table: &Table, k: usize, tau: f64) -> Result<RunOutput> {
    let params = validate_run(table, k, tau)?;
    let started = Instant::now();
    let n = table.n();
    let k_eff = effective_cluster_size(n, k, tau)?;
    let space = QiSpace::new(table, &params);

    let partition = if k_eff >= n {
        Partition::new(vec![Cluster::new((0..n).collect())?], n)?
    } else {
        let mut subsets = split_subsets(table, k_eff)?;
        let mut pool: Vec<usize> = (0..n).collect();
        let mut clusters = Vec::with_capacity(n / k_eff);
        while !pool.is_empty() {
            let avg = space.mean_of(&pool);
            let x0 = space.farthest_from(&avg, &pool);
            let c = build_cluster(&space, space.point(x0), &mut subsets)?;
            remove_all(&mut pool, &c, n);
            clusters.push(c);
            if !pool.is_empty() {
                let x1 = space.farthest_from(space.point(x0), &pool);
                let c = build_cluster(&space, space.point(x1), &mut subsets)?;
                remove_all(&mut pool, &c, n);
                clusters.push(c);
            }
        }
        Partition::new(clusters, n)?
    };

    // The size bound is exact only when k_eff divides n and the confidential
    // values are distinct; anything that still exceeds tau gets merged.
    let index = RankIndex::new(table);
    let built = partition.len();
    let partition = if partition.clusters().iter().any(|c| index.cluster_emd(c) > tau) {
        merge_groups(&space, &index, &partition, tau)?
    } else {
        partition
    };
    Finish {
        table,
        params: &params,
        algorithm: Algorithm::TFirst,
        k_requested: k,
        k_effective: k_eff,
        tau,
        merges: built - partition.len(),
        started,
    }
    .run(partition)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::max_emd_bound;
    use crate::dataset::{minmax_params, AttributeSpec};
    use crate::emd::emd_cluster_vs_table;
    use crate::metrics::{verify_k_anonymity, verify_t_closeness, DEFAULT_SLACK};
    use crate::synth::{synth_generate, SynthConfig};
    use proptest::prelude::*;

    fn ranks_table(n: usize) -> Table {
        Table::new(
            vec![AttributeSpec::qi("q"), AttributeSpec::confidential("c")],
            (1..=n).map(|i| vec![((i * 7) % n) as f64, i as f64]).collect(),
        )
        .unwrap()
    }

    #[test]
    fn split_exact_division() {
        let s = split_subsets(&ranks_table(6), 2).unwrap();
        assert_eq!(s.subsets(), &[vec![0, 1, 2], vec![3, 4, 5]]);
        assert_eq!(s.extras(), &[0, 0]);
    }

    #[test]
    fn split_odd_k_puts_extras_in_middle() {
        let s = split_subsets(&ranks_table(11), 3).unwrap();
        assert_eq!(s.sizes(), vec![3, 5, 3]);
        assert_eq!(s.baseline(), 3);
        assert_eq!(s.extras(), &[0, 2, 0]);
    }

    #[test]
    fn split_even_k_shares_extras() {
        assert_eq!(split_subsets(&ranks_table(10), 4).unwrap().sizes(), vec![2, 3, 3, 2]);
        assert_eq!(split_subsets(&ranks_table(11), 2).unwrap().sizes(), vec![6, 5]);
        assert!(split_subsets(&ranks_table(10), 6).is_err());
    }

    #[test]
    fn build_cluster_sizes_follow_extras() {
        let t = ranks_table(11);
        let space = QiSpace::new(&t, &minmax_params(&t));
        let mut s = split_subsets(&t, 3).unwrap();
        let mut sizes = Vec::new();
        while !s.is_exhausted() {
            let c = build_cluster(&space, &[0.5], &mut s).unwrap();
            sizes.push(c.len());
        }
        assert_eq!(sizes, vec![4, 4, 3]);
        assert!(build_cluster(&space, &[0.5], &mut s).is_err());
    }

    #[test]
    fn six_ranks_clusters_within_max_bound() {
        let t = ranks_table(6);
        let out = run_tfirst_algorithm(&t, 2, 0.2).unwrap();
        assert_eq!(out.report.k_effective, 2);
        for c in out.partition.clusters() {
            assert!(emd_cluster_vs_table(&t, c).unwrap() <= max_emd_bound(6, 2).unwrap() + 1e-12);
        }
        // every one-per-subset cluster is within the bound as well
        for a in 0..3 {
            for b in 3..6 {
                assert!(emd_cluster_vs_table(&t, &[a, b]).unwrap() <= 0.2 + 1e-12);
            }
        }
    }

    #[test]
    fn sizes_at_1080_records() {
        let t = synth_generate(&SynthConfig::mcd(3)).unwrap();
        let out = run_tfirst_algorithm(&t, 2, 0.05).unwrap();
        assert_eq!((out.report.k_min_actual, out.report.k_avg_actual), (10, 10.0));
        assert_eq!(out.report.merges, 0);
        let out = run_tfirst_algorithm(&t, 20, 0.09).unwrap();
        assert_eq!((out.report.k_min_actual, out.report.k_avg_actual), (20, 20.0));
    }

    #[test]
    fn rejects_bad_parameters() {
        let t = ranks_table(10);
        assert!(run_tfirst_algorithm(&t, 2, 0.0).is_err());
        assert!(run_tfirst_algorithm(&t, 1, 0.1).is_err());
        assert!(run_tfirst_algorithm(&t, 11, 0.1).is_err());
    }

    #[test]
    fn subsets_deplete_uniformly() {
        let t = ranks_table(23);
        let space = QiSpace::new(&t, &minmax_params(&t));
        let mut s = split_subsets(&t, 5).unwrap();
        for c in 1..=4 {
            build_cluster(&space, &[0.1 * c as f64], &mut s).unwrap();
            for (i, sub) in s.subsets().iter().enumerate() {
                if i != 2 {
                    assert_eq!(sub.len(), s.baseline() - c);
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn structure_and_guarantees(n in 10usize..150, k in 2usize..6, tau in 0.02f64..0.3, seed in 0u64..500) {
            prop_assume!(k <= n);
            let t = synth_generate(&SynthConfig::new(n, 2, 0.8, seed)).unwrap();
            let out = run_tfirst_algorithm(&t, k, tau).unwrap();
            let k_eff = out.report.k_effective;
            prop_assert!(k_eff >= k);
            prop_assert!(out.report.k_min_actual >= k_eff);
            prop_assert!(verify_k_anonymity(out.anonymized.table(), k).passed);
            prop_assert!(verify_t_closeness(&t, &out.partition, tau, DEFAULT_SLACK).unwrap().passed);
            if out.report.merges == 0 && k_eff < n {
                let sizes = out.partition.sizes();
                prop_assert!(sizes.iter().all(|&s| s == k_eff || s == k_eff + 1));
                prop_assert_eq!(sizes.iter().filter(|&&s| s == k_eff + 1).count(), n % k_eff);
                if n % k_eff == 0 {
                    let bound = max_emd_bound(n, k_eff).unwrap();
                    prop_assert!(out.report.max_cluster_emd <= bound + 1e-12);
                }
            }
        }
    }
}
