//! k-anonymity-first construction: clusters start as the `k` QI-nearest
//! records to a seed and are refined by swapping in further neighbours
//! whenever that strictly lowers the cluster's EMD. The result is then
//! passed through [`crate::merge`] to guarantee t-closeness.

use std::time::Instant;

use crate::dataset::{minmax_params, NormalizationParams, Table};
use crate::emd::RankIndex;
use crate::error::{Error, Result};
use crate::merge::merge_groups;
use crate::partition::{remove_all, Cluster, Partition, QiSpace};
use crate::report::{validate_run, Algorithm, Finish, RunOutput};

pub(crate) fn generate(
    space: &QiSpace,
    index: &RankIndex,
    seed: usize,
    candidates: &[usize],
    k: usize,
    tau: f64,
) -> Vec<usize> {
    if candidates.len() < 2 * k {
        return candidates.to_vec();
    }
    // seed first, then the remaining candidates by distance
    let order: Vec<usize> = std::iter::once(seed)
        .chain(
            space
                .sorted_by_distance(seed, candidates)
                .into_iter()
                .filter(|&i| i != seed),
        )
        .collect();
    let (initial, rest) = order.split_at(k);
    let mut members = initial.to_vec();
    let mut ranks: Vec<usize> = members.iter().map(|&i| index.rank(i)).collect();
    let mut current = index.emd_of_ranks(&mut ranks.clone());
    let mut trial = Vec::with_capacity(k);

    for &y in rest {
        if current <= tau {
            break;
        }
        let ry = index.rank(y);
        let mut best: Option<(usize, f64)> = None;
        for pos in 0..k {
            trial.clear();
            trial.extend_from_slice(&ranks);
            trial[pos] = ry;
            let e = index.emd_of_ranks(&mut trial);
            if best.is_none_or(|(_, b)| e < b) {
                best = Some((pos, e));
            }
        }
        if let Some((pos, e)) = best {
            if e < current {
                members[pos] = y;
                ranks[pos] = ry;
                current = e;
            }
        }
    }
    members
}

/// Builds one cluster around `seed` from `candidates`.
///
/// With fewer than `2k` candidates all of them are returned. Otherwise the
/// cluster is exactly `k` records: the seed and its `k - 1` nearest
/// candidates, after which each further candidate (in order of distance to
/// the seed) replaces the member whose removal gives the lowest EMD, if that
/// lowers the EMD, until the cluster is `tau`-close or candidates run out.
/// `candidates` itself is not modified.
pub fn generate_cluster(
    table: &Table,
    params: &NormalizationParams,
    seed: usize,
    candidates: &[usize],
    k: usize,
    tau: f64,
) -> Result<Cluster> {
    if candidates.is_empty() {
        return Err(Error::EmptyCluster);
    }
    if !candidates.contains(&seed) {
        return Err(Error::param("seed", format!("record {seed} is not a candidate")));
    }
    if k < 2 {
        return Err(Error::param("k", format!("need k >= 2, got {k}")));
    }
    let space = QiSpace::new(table, params);
    let index = RankIndex::new(table);
    Cluster::new(generate(&space, &index, seed, candidates, k, tau))
}

fn partition_with(space: &QiSpace, index: &RankIndex, n: usize, k: usize, tau: f64) -> Result<Partition> {
    let mut pool: Vec<usize> = (0..n).collect();
    let mut clusters = Vec::with_capacity(n / k);
    while !pool.is_empty() {
        let avg = space.mean_of(&pool);
        let x0 = space.farthest_from(&avg, &pool);
        let c = generate(space, index, x0, &pool, k, tau);
        remove_all(&mut pool, &c, n);
        clusters.push(Cluster::new(c)?);

        if !pool.is_empty() {
            let x1 = space.farthest_from(space.point(x0), &pool);
            let c = generate(space, index, x1, &pool, k, tau);
            remove_all(&mut pool, &c, n);
            clusters.push(Cluster::new(c)?);
        }
    }
    Partition::new(clusters, n)
}

/// Seeds alternate between the record farthest from the average of the
/// unassigned records and the record farthest from the previous seed.
/// Clusters are not guaranteed to be t-close.
pub fn kfirst_partition(table: &Table, k: usize, tau: f64) -> Result<Partition> {
    if k < 2 || k > table.n() {
        return Err(Error::param("k", format!("need 2 <= k <= {}, got {k}", table.n())));
    }
    let params = minmax_params(table);
    let space = QiSpace::new(table, &params);
    partition_with(&space, &RankIndex::new(table), table.n(), k, tau)
}

pub fn run_kfirst_algorithm(table: &Table, k: usize, tau: f64) -> Result<RunOutput> {
    let params = validate_run(table, k, tau)?;
    let started = Instant::now();
    let space = QiSpace::new(table, &params);
    let index = RankIndex::new(table);
    let initial = partition_with(&space, &index, table.n(), k, tau)?;
    let merged = merge_groups(&space, &index, &initial, tau)?;
    Finish {
        table,
        params: &params,
        algorithm: Algorithm::KFirst,
        k_requested: k,
        k_effective: k,
        tau,
        merges: initial.len() - merged.len(),
        started,
    }
    .run(merged)
}
