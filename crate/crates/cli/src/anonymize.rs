use std::io::Write;

use microagg::io::{load_csv, load_roles, write_anonymized_csv};
use microagg::metrics::confidential_unchanged;
use microagg::{verify_k_anonymity, verify_t_closeness, RunReport, DEFAULT_SLACK};

use crate::{check_k_t, emit, io_failure, Failure, RunConfig};

/// Runs one algorithm, re-verifies the release, then writes it and its report.
///
/// Nothing is written unless both verifiers pass on the in-memory release.
pub fn cmd_anonymize(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), Failure> {
    check_k_t(cfg.k, cfg.t)?;
    let roles = load_roles(&cfg.roles)?;
    let table = load_csv(&cfg.input, &roles, cfg.drop_missing)?;
    let mut run = cfg.algorithm.run(&table, cfg.k, cfg.t)?;
    run.report.seed = cfg.seed;

    let ka = verify_k_anonymity(run.anonymized.table(), cfg.k);
    if !ka.passed {
        return Err(Failure::Verification(format!(
            "internal error: release is not {}-anonymous (witness {:?})",
            cfg.k, ka.witness
        )));
    }
    let tc = verify_t_closeness(&table, &run.partition, cfg.t, DEFAULT_SLACK)?;
    if !tc.passed {
        return Err(Failure::Verification(format!(
            "internal error: cluster {} has EMD {} > t = {}",
            tc.worst_cluster, tc.worst_emd, cfg.t
        )));
    }
    if !confidential_unchanged(&table, &run.anonymized) {
        return Err(Failure::Verification(
            "internal error: confidential column was modified".into(),
        ));
    }

    write_anonymized_csv(&run.anonymized, &cfg.output)?;
    let json = report_json(&run.report)?;
    match &cfg.report {
        Some(path) => {
            std::fs::write(path, json + "\n").map_err(|e| io_failure(&path.display().to_string(), e))?;
            emit(
                out,
                format_args!(
                    "{}: {} records in {} clusters (min {}, avg {:.2}), max EMD {:.6}, SSE {:.6}",
                    run.report.algorithm,
                    run.report.n,
                    run.report.clusters,
                    run.report.k_min_actual,
                    run.report.k_avg_actual,
                    run.report.max_cluster_emd,
                    run.report.sse
                ),
            )
        }
        None => emit(out, format_args!("{json}")),
    }
}

pub fn report_json(report: &RunReport) -> Result<String, Failure> {
    serde_json::to_string_pretty(report).map_err(|e| io_failure("report", e))
}
