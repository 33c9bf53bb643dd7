//! Microaggregation-based anonymization of numerical microdata with
//! k-anonymity and t-closeness guarantees.
//!
//! Three pipelines are provided, all returning a [`RunOutput`]:
//!
//! * [`run_merge_algorithm`]: MDAV, then merging of clusters until t-close.
//! * [`run_kfirst_algorithm`]: EMD-aware cluster construction, then merging.
//! * [`run_tfirst_algorithm`]: confidential-rank stratified clusters that are
//!   t-close by construction.

pub mod bounds;
pub mod dataset;
pub mod emd;
pub mod error;
pub mod io;
pub mod kfirst;
pub mod merge;
pub mod metrics;
pub mod partition;
pub mod report;
pub mod synth;
pub mod tfirst;

pub use bounds::{adjust_cluster_size, max_emd_bound, min_emd_bound, required_cluster_size};
pub use dataset::{minmax_params, AttributeSpec, NormalizationParams, Role, Table};
pub use emd::{distribution_of, emd_cluster_vs_table, emd_ordered, Distribution, RankIndex};
pub use error::{Error, Result};
pub use io::{load_anonymized_csv, load_csv, load_roles, parse_roles, write_anonymized_csv, write_csv};
pub use kfirst::{generate_cluster, kfirst_partition, run_kfirst_algorithm};
pub use merge::{merge_until_tclose, run_merge_algorithm};
pub use metrics::{
    cluster_size_stats, normalized_sse, transport_oracle_emd, verify_k_anonymity, verify_t_closeness, KAnonymityCheck,
    TClosenessCheck, DEFAULT_SLACK,
};
pub use partition::{aggregate, centroid, mdav_partition, record_distance, AnonymizedTable, Cluster, Partition};
pub use report::{Algorithm, RunOutput, RunReport};
pub use synth::{achieved_correlation, synth_generate, SynthConfig};
pub use tfirst::{build_cluster, run_tfirst_algorithm, split_subsets, RankedSubsets};
