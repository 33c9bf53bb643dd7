use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::dataset::{minmax_params, NormalizationParams, Table};
use crate::error::{Error, Result};
use crate::metrics::{cluster_size_stats, normalized_sse, verify_t_closeness, DEFAULT_SLACK};
use crate::partition::{aggregate, AnonymizedTable, Partition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// MDAV followed by merging clusters until every cluster is t-close.
    Merge,
    /// EMD-guided k-anonymous cluster construction, then merging.
    KFirst,
    /// Rank-stratified construction that is t-close by design.
    TFirst,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Merge, Algorithm::KFirst, Algorithm::TFirst];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Merge => "merge",
            Algorithm::KFirst => "kfirst",
            Algorithm::TFirst => "tfirst",
        }
    }

    pub fn run(self, table: &Table, k: usize, tau: f64) -> Result<RunOutput> {
        match self {
            Algorithm::Merge => crate::merge::run_merge_algorithm(table, k, tau),
            Algorithm::KFirst => crate::kfirst::run_kfirst_algorithm(table, k, tau),
            Algorithm::TFirst => crate::tfirst::run_tfirst_algorithm(table, k, tau),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "merge" => Ok(Algorithm::Merge),
            "kfirst" | "k-first" => Ok(Algorithm::KFirst),
            "tfirst" | "t-first" => Ok(Algorithm::TFirst),
            other => Err(Error::param(
                "algorithm",
                format!("`{other}` is not one of merge, kfirst, tfirst"),
            )),
        }
    }
}

/// Outcome summary of one anonymization run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub algorithm: Algorithm,
    pub n: usize,
    pub k_requested: usize,
    /// Cluster size the algorithm actually targeted (differs from
    /// `k_requested` only for tfirst).
    pub k_effective: usize,
    pub tau: f64,
    pub clusters: usize,
    pub merges: usize,
    pub k_min_actual: usize,
    pub k_avg_actual: f64,
    pub max_cluster_emd: f64,
    pub sse: f64,
    /// Number of attributes `m` the SSE averages over.
    pub sse_attributes: usize,
    pub runtime_ms: f64,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub anonymized: AnonymizedTable,
    pub partition: Partition,
    pub report: RunReport,
}

pub(crate) fn validate_run(table: &Table, k: usize, tau: f64) -> Result<NormalizationParams> {
    if k < 2 {
        return Err(Error::param("k", format!("need k >= 2, got {k}")));
    }
    if k > table.n() {
        return Err(Error::param("k", format!("k = {k} exceeds the {} records", table.n())));
    }
    if tau.is_nan() || tau <= 0.0 || tau.is_infinite() {
        return Err(Error::param("t", format!("need t > 0, got {tau}")));
    }
    Ok(minmax_params(table))
}

pub(crate) struct Finish<'a> {
    pub table: &'a Table,
    pub params: &'a NormalizationParams,
    pub algorithm: Algorithm,
    pub k_requested: usize,
    pub k_effective: usize,
    pub tau: f64,
    pub merges: usize,
    pub started: Instant,
}

impl Finish<'_> {
    pub fn run(self, partition: Partition) -> Result<RunOutput> {
        let anonymized = aggregate(self.table, &partition)?;
        let runtime_ms = self.started.elapsed().as_secs_f64() * 1e3;
        let (k_min_actual, k_avg_actual) = cluster_size_stats(&partition);
        let closeness = verify_t_closeness(self.table, &partition, self.tau, DEFAULT_SLACK)?;
        let sse = normalized_sse(self.table, &anonymized, self.params)?;
        let report = RunReport {
            algorithm: self.algorithm,
            n: self.table.n(),
            k_requested: self.k_requested,
            k_effective: self.k_effective,
            tau: self.tau,
            clusters: partition.len(),
            merges: self.merges,
            k_min_actual,
            k_avg_actual,
            max_cluster_emd: closeness.worst_emd,
            sse,
            sse_attributes: self.table.released_attribute_count(),
            runtime_ms,
            seed: None,
        };
        Ok(RunOutput {
            anonymized,
            partition,
            report,
        })
    }
}
