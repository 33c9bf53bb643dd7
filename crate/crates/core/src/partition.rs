//! Record geometry in normalized QI space, clusters and partitions, MDAV
//! microaggregation and centroid aggregation.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::ops::Deref;

use crate::dataset::{NormalizationParams, Table};
use crate::error::{Error, Result};

/// A nonempty set of record indices, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cluster(Vec<usize>);

impl Cluster {
    pub fn new(mut members: Vec<usize>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::EmptyCluster);
        }
        members.sort_unstable();
        if members.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidPartition("duplicate member in cluster".into()));
        }
        Ok(Cluster(members))
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn into_members(self) -> Vec<usize> {
        self.0
    }
}

impl Deref for Cluster {
    type Target = [usize];

    fn deref(&self) -> &[usize] {
        &self.0
    }
}

/// Disjoint clusters covering records `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    clusters: Vec<Cluster>,
    n: usize,
}

impl Partition {
    pub fn new(clusters: Vec<Cluster>, n: usize) -> Result<Self> {
        let mut seen = vec![false; n];
        for c in &clusters {
            for &i in c.members() {
                if i >= n {
                    return Err(Error::InvalidPartition(format!("record {i} out of range (n = {n})")));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::InvalidPartition(format!("record {i} is in two clusters")));
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition(format!("record {i} is not covered")));
        }
        Ok(Partition { clusters, n })
    }

    /// Builds a partition from per-record cluster labels; clusters are ordered by label.
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, &l) in labels.iter().enumerate() {
            groups.entry(l).or_default().push(i);
        }
        let clusters = groups.into_values().map(Cluster).collect();
        Partition::new(clusters, labels.len())
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    /// Number of records covered.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn labels(&self) -> Vec<usize> {
        let mut labels = vec![0; self.n];
        for (id, c) in self.clusters.iter().enumerate() {
            for &i in c.members() {
                labels[i] = id;
            }
        }
        labels
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.clusters.iter().map(|c| c.len()).collect()
    }
}

/// Normalized QI coordinates of every record, stored row-major.
#[derive(Debug, Clone)]
pub struct QiSpace {
    coords: Vec<f64>,
    dim: usize,
}

impl QiSpace {
    pub fn new(table: &Table, params: &NormalizationParams) -> Self {
        let dim = params.columns.len();
        let mut coords = Vec::with_capacity(table.n() * dim);
        for row in table.rows() {
            coords.extend(params.normalized_row(row));
        }
        QiSpace { coords, dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn dist2_to(&self, i: usize, p: &[f64]) -> f64 {
        self.point(i).iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    pub fn dist2(&self, i: usize, j: usize) -> f64 {
        self.dist2_to(i, self.point(j))
    }

    pub fn mean_of(&self, members: &[usize]) -> Vec<f64> {
        let mut mean = vec![0.0; self.dim];
        for &i in members {
            mean.iter_mut().zip(self.point(i)).for_each(|(m, v)| *m += v);
        }
        let len = members.len() as f64;
        mean.iter_mut().for_each(|m| *m /= len);
        mean
    }

    /// Candidate farthest from `p`; ties go to the lowest index.
    pub fn farthest_from(&self, p: &[f64], candidates: &[usize]) -> usize {
        let mut best = (f64::NEG_INFINITY, usize::MAX);
        for &i in candidates {
            let d = self.dist2_to(i, p);
            if d > best.0 || (d == best.0 && i < best.1) {
                best = (d, i);
            }
        }
        best.1
    }

    /// Candidate nearest to `p`; ties go to the lowest index.
    pub fn nearest_to(&self, p: &[f64], candidates: &[usize]) -> usize {
        let mut best = (f64::INFINITY, usize::MAX);
        for &i in candidates {
            let d = self.dist2_to(i, p);
            if d < best.0 || (d == best.0 && i < best.1) {
                best = (d, i);
            }
        }
        best.1
    }

    /// `candidates` ordered by (distance to record `seed`, index).
    pub fn sorted_by_distance(&self, seed: usize, candidates: &[usize]) -> Vec<usize> {
        let p = self.point(seed);
        let mut keyed: Vec<(f64, usize)> = candidates.iter().map(|&i| (self.dist2_to(i, p), i)).collect();
        keyed.sort_unstable_by(by_distance_then_index);
        keyed.into_iter().map(|(_, i)| i).collect()
    }

    /// `seed` followed by its `k - 1` nearest candidates, ties by index.
    pub fn k_nearest(&self, seed: usize, candidates: &[usize], k: usize) -> Vec<usize> {
        let p = self.point(seed);
        let mut keyed: Vec<(f64, usize)> = candidates
            .iter()
            .filter(|&&i| i != seed)
            .map(|&i| (self.dist2_to(i, p), i))
            .collect();
        let take = (k - 1).min(keyed.len());
        if take < keyed.len() && take > 0 {
            keyed.select_nth_unstable_by(take - 1, by_distance_then_index);
        }
        keyed.truncate(take);
        keyed.sort_unstable_by(by_distance_then_index);
        std::iter::once(seed).chain(keyed.into_iter().map(|(_, i)| i)).collect()
    }
}

fn by_distance_then_index(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// Removes `taken` from `pool`, preserving order.
pub(crate) fn remove_all(pool: &mut Vec<usize>, taken: &[usize], n: usize) {
    let mut mask = vec![false; n];
    taken.iter().for_each(|&i| mask[i] = true);
    pool.retain(|&i| !mask[i]);
}

/// Euclidean distance between records `i` and `j` over min-max normalized QIs.
pub fn record_distance(table: &Table, params: &NormalizationParams, i: usize, j: usize) -> f64 {
    let a = params.normalized_row(table.row(i));
    let b = params.normalized_row(table.row(j));
    a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Per-QI mean of a cluster, in original units and QI column order.
#[derive(Debug, Clone, PartialEq)]
pub struct Centroid(pub Vec<f64>);

pub fn centroid(table: &Table, members: &[usize]) -> Result<Centroid> {
    if members.is_empty() {
        return Err(Error::EmptyCluster);
    }
    let qi = table.qi_columns();
    let mut sums = vec![0.0; qi.len()];
    for &i in members {
        let row = table.row(i);
        sums.iter_mut().zip(qi).for_each(|(s, &c)| *s += row[c]);
    }
    let len = members.len() as f64;
    Ok(Centroid(sums.into_iter().map(|s| s / len).collect()))
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::param("k", format!("need k >= 2, got {k}")));
    }
    if k > n {
        return Err(Error::param("k", format!("k = {k} exceeds the {n} records")));
    }
    Ok(())
}

/// Fixed-size MDAV.
///
/// While at least `3k` records remain, two `k`-clusters are built: one around
/// the record farthest from the average of the remaining records, one around
/// the record farthest from that. With `2k..3k` left, one `k`-cluster around
/// the farthest record and one cluster with the rest; with fewer than `2k`,
/// everything left forms the last cluster.
pub fn mdav_partition(table: &Table, params: &NormalizationParams, k: usize) -> Result<Partition> {
    let n = table.n();
    check_k(k, n)?;
    let space = QiSpace::new(table, params);
    let mut pool: Vec<usize> = (0..n).collect();
    let mut clusters = Vec::with_capacity(n / k);

    while pool.len() >= 3 * k {
        let avg = space.mean_of(&pool);
        let r = space.farthest_from(&avg, &pool);
        let first = space.k_nearest(r, &pool, k);
        remove_all(&mut pool, &first, n);
        clusters.push(Cluster::new(first)?);

        let s = space.farthest_from(space.point(r), &pool);
        let second = space.k_nearest(s, &pool, k);
        remove_all(&mut pool, &second, n);
        clusters.push(Cluster::new(second)?);
    }
    if pool.len() >= 2 * k {
        let avg = space.mean_of(&pool);
        let r = space.farthest_from(&avg, &pool);
        let first = space.k_nearest(r, &pool, k);
        remove_all(&mut pool, &first, n);
        clusters.push(Cluster::new(first)?);
    }
    if !pool.is_empty() {
        clusters.push(Cluster::new(pool)?);
    }
    Partition::new(clusters, n)
}

/// A release: the table with QI cells replaced by cluster centroids.
#[derive(Debug, Clone, PartialEq)]
pub struct AnonymizedTable {
    table: Table,
    cluster_ids: Vec<usize>,
}

impl AnonymizedTable {
    pub(crate) fn new(table: Table, cluster_ids: Vec<usize>) -> Self {
        AnonymizedTable { table, cluster_ids }
    }

    pub fn table(&self) -> &Table {
        &self.table
    }

    pub fn cluster_ids(&self) -> &[usize] {
        &self.cluster_ids
    }

    pub fn n(&self) -> usize {
        self.table.n()
    }

    /// Partition induced by the cluster-id column.
    pub fn partition(&self) -> Result<Partition> {
        Partition::from_labels(&self.cluster_ids)
    }

    /// Anonymized QI values of record `i`, in QI column order.
    pub fn qi_values(&self, i: usize) -> Vec<f64> {
        let row = self.table.row(i);
        self.table.qi_columns().iter().map(|&c| row[c]).collect()
    }
}

pub fn aggregate(table: &Table, partition: &Partition) -> Result<AnonymizedTable> {
    if partition.n() != table.n() {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} records, table has {}",
            partition.n(),
            table.n()
        )));
    }
    let qi = table.qi_columns();
    let mut rows = table.rows().to_vec();
    let mut ids = vec![0; table.n()];
    for (id, c) in partition.clusters().iter().enumerate() {
        let Centroid(values) = centroid(table, c)?;
        for &i in c.members() {
            ids[i] = id;
            for (&col, &v) in qi.iter().zip(&values) {
                rows[i][col] = v;
            }
        }
    }
    Ok(AnonymizedTable::new(Table::new(table.specs().to_vec(), rows)?, ids))
}
