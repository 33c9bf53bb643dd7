use std::io::Write;

use microagg::io::{load_anonymized_csv, load_csv, load_roles};
use microagg::metrics::confidential_unchanged;
use microagg::{minmax_params, normalized_sse, verify_k_anonymity, verify_t_closeness, DEFAULT_SLACK};

use crate::{check_k_t, emit, Failure, VerifyArgs};

fn verdict(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

fn fmt_values(values: &[f64]) -> String {
    let cells: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    format!("({})", cells.join(", "))
}

/// Recomputes the partition from the release's cluster-id column and checks
/// it against the original data.
pub fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<(), Failure> {
    check_k_t(args.k, args.t)?;
    let roles = load_roles(&args.roles)?;
    let original = load_csv(&args.input, &roles, args.drop_missing)?;
    let anon = load_anonymized_csv(&args.anonymized, &roles)?;
    if anon.n() != original.n() {
        return Err(Failure::Verification(format!(
            "release has {} records, original has {}",
            anon.n(),
            original.n()
        )));
    }
    let partition = anon.partition()?;
    let mut failed = Vec::new();

    let ka = verify_k_anonymity(anon.table(), args.k);
    match &ka.witness {
        None => emit(
            out,
            format_args!(
                "k-anonymity (k={}): PASS  {} classes, smallest has {} records",
                args.k, ka.classes, ka.min_class_size
            ),
        )?,
        Some((qi, count)) => {
            failed.push("k-anonymity");
            emit(
                out,
                format_args!(
                    "k-anonymity (k={}): FAIL  QI combination {} occurs in only {count} record(s)",
                    args.k,
                    fmt_values(qi)
                ),
            )?
        }
    }

    let tc = verify_t_closeness(&original, &partition, args.t, DEFAULT_SLACK)?;
    let worst_id = anon.cluster_ids()[partition.clusters()[tc.worst_cluster][0]];
    if !tc.passed {
        failed.push("t-closeness");
    }
    emit(
        out,
        format_args!(
            "t-closeness (t={}): {}  worst cluster_id {worst_id} ({} records) has EMD {:.9}",
            args.t,
            verdict(tc.passed),
            partition.clusters()[tc.worst_cluster].len(),
            tc.worst_emd
        ),
    )?;

    let unchanged = confidential_unchanged(&original, &anon);
    if !unchanged {
        failed.push("confidential column");
    }
    emit(
        out,
        format_args!("confidential column unchanged: {}", verdict(unchanged)),
    )?;

    let sse = normalized_sse(&original, &anon, &minmax_params(&original))?;
    emit(
        out,
        format_args!("clusters: {}, normalized SSE: {sse:.9}", partition.len()),
    )?;

    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(failed.join(", ")))
    }
}
