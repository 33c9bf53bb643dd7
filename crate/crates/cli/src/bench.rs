use std::io::Write;

use microagg::io::{load_csv, load_roles};
use microagg::{synth_generate, verify_k_anonymity, verify_t_closeness, Algorithm, SynthConfig, Table, DEFAULT_SLACK};
use serde::Serialize;

use crate::{check_k_t, emit, io_failure, BenchArgs, Failure};

/// One cell of the grid. Metric columns are empty when the run failed.
#[derive(Debug, Clone, Default, Serialize)]
pub struct BenchRow {
    pub algorithm: String,
    pub n: usize,
    pub k_requested: usize,
    pub tau: f64,
    pub status: String,
    pub k_effective: Option<usize>,
    pub clusters: Option<usize>,
    pub merges: Option<usize>,
    pub k_min_actual: Option<usize>,
    pub k_avg_actual: Option<f64>,
    pub max_cluster_emd: Option<f64>,
    pub sse: Option<f64>,
    pub sse_attributes: Option<usize>,
    pub runtime_ms: Option<f64>,
    pub seed: Option<u64>,
    pub error: String,
}

fn bench_data(args: &BenchArgs) -> Result<(Table, Option<u64>), Failure> {
    match (&args.input, &args.roles) {
        (Some(input), Some(roles)) => {
            let roles = load_roles(roles)?;
            Ok((load_csv(input, &roles, args.drop_missing)?, None))
        }
        (Some(_), None) => Err(Failure::Usage("--input needs --roles".into())),
        (None, _) => {
            let cfg = SynthConfig::new(args.n, args.qi, args.rho, args.seed);
            Ok((synth_generate(&cfg)?, Some(args.seed)))
        }
    }
}

/// Runs one cell and re-verifies its output. Errors become a row, not a failure.
pub fn bench_cell(table: &Table, alg: Algorithm, k: usize, tau: f64, seed: Option<u64>) -> BenchRow {
    let mut row = BenchRow {
        algorithm: alg.to_string(),
        n: table.n(),
        k_requested: k,
        tau,
        seed,
        ..BenchRow::default()
    };
    let run = match check_k_t(k, tau).and_then(|_| alg.run(table, k, tau).map_err(Failure::from)) {
        Ok(run) => run,
        Err(e) => {
            row.status = "error".into();
            row.error = e.to_string();
            return row;
        }
    };
    let r = &run.report;
    row.k_effective = Some(r.k_effective);
    row.clusters = Some(r.clusters);
    row.merges = Some(r.merges);
    row.k_min_actual = Some(r.k_min_actual);
    row.k_avg_actual = Some(r.k_avg_actual);
    row.max_cluster_emd = Some(r.max_cluster_emd);
    row.sse = Some(r.sse);
    row.sse_attributes = Some(r.sse_attributes);
    row.runtime_ms = Some(r.runtime_ms);

    let ka = verify_k_anonymity(run.anonymized.table(), k).passed;
    let tc = verify_t_closeness(table, &run.partition, tau, DEFAULT_SLACK).map(|c| c.passed);
    match (ka, tc) {
        (true, Ok(true)) => row.status = "ok".into(),
        (ka, tc) => {
            row.status = "unverified".into();
            row.error = format!("k-anonymity passed: {ka}, t-closeness: {tc:?}");
        }
    }
    row
}

/// Cells run one after another so each timing gets the machine to itself.
pub fn cmd_bench(args: &BenchArgs, out: &mut dyn Write) -> Result<(), Failure> {
    if args.grid_k.is_empty() || args.grid_t.is_empty() || args.algorithms.is_empty() {
        return Err(Failure::Usage("grid must have at least one k, t and algorithm".into()));
    }
    let (table, seed) = bench_data(args)?;
    let path = args.output.display().to_string();
    let mut writer = csv::Writer::from_path(&args.output).map_err(|e| io_failure(&path, e))?;
    let mut failed = 0;
    let mut cells = 0;
    for &alg in &args.algorithms {
        for &k in &args.grid_k {
            for &tau in &args.grid_t {
                let row = bench_cell(&table, alg, k, tau, seed);
                if row.status != "ok" {
                    failed += 1;
                }
                cells += 1;
                writer.serialize(&row).map_err(|e| io_failure(&path, e))?;
            }
        }
    }
    writer.flush().map_err(|e| io_failure(&path, e))?;
    emit(
        out,
        format_args!(
            "{cells} cells on {} records written to {path}; {failed} failed",
            table.n()
        ),
    )
}
