use microagg::io::{load_anonymized_csv, load_csv, parse_roles, write_anonymized_csv, write_csv};
use microagg::{
    synth_generate, verify_k_anonymity, verify_t_closeness, Algorithm, AttributeSpec, Role, SynthConfig, Table,
    DEFAULT_SLACK,
};
use tempfile::TempDir;

fn with_ignored_column(t: &Table) -> Table {
    let mut specs = t.specs().to_vec();
    specs.insert(1, AttributeSpec::new("row_id", Role::Ignored));
    let rows = t
        .rows()
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut r = r.clone();
            r.insert(1, i as f64);
            r
        })
        .collect();
    Table::new(specs, rows).unwrap()
}

#[test]
fn csv_round_trip_through_every_pipeline() {
    let dir = TempDir::new().unwrap();
    let table = with_ignored_column(&synth_generate(&SynthConfig::new(240, 3, 0.7, 5)).unwrap());
    let roles = parse_roles("qi1=qi\nrow_id=ignore\nqi2=qi\nqi3=qi\nconf=confidential\n").unwrap();
    write_csv(&table, dir.path().join("in.csv")).unwrap();
    let loaded = load_csv(dir.path().join("in.csv"), &roles, false).unwrap();
    assert_eq!(loaded, table);

    for alg in Algorithm::ALL {
        let out = alg.run(&loaded, 4, 0.2).unwrap();
        let path = dir.path().join(format!("{alg}.csv"));
        write_anonymized_csv(&out.anonymized, &path).unwrap();
        let back = load_anonymized_csv(&path, &roles).unwrap();
        assert_eq!(back, out.anonymized, "{alg}");
        assert_eq!(back.partition().unwrap(), out.partition, "{alg}");

        assert!(verify_k_anonymity(back.table(), 4).passed, "{alg}");
        assert!(
            verify_t_closeness(&loaded, &back.partition().unwrap(), 0.2, DEFAULT_SLACK)
                .unwrap()
                .passed
        );
        assert_eq!(
            back.table().column(1),
            loaded.column(1),
            "{alg}: ignored column changed"
        );
        assert_eq!(out.report.sse_attributes, 4);
    }
}

#[test]
fn stricter_t_never_lowers_tfirst_cluster_size() {
    let table = synth_generate(&SynthConfig::hcd(3)).unwrap();
    let mut last = usize::MAX;
    for tau in [0.02, 0.05, 0.1, 0.2, 0.3] {
        let r = Algorithm::TFirst.run(&table, 3, tau).unwrap().report;
        assert!(r.k_min_actual <= last, "t={tau}");
        assert!(r.max_cluster_emd <= tau + DEFAULT_SLACK);
        last = r.k_min_actual;
    }
}

#[test]
fn algorithms_are_deterministic() {
    let table = synth_generate(&SynthConfig::mcd(9)).unwrap();
    for alg in Algorithm::ALL {
        let a = alg.run(&table, 3, 0.15).unwrap();
        let b = alg.run(&table, 3, 0.15).unwrap();
        assert_eq!(a.partition, b.partition, "{alg}");
        assert_eq!(a.anonymized, b.anonymized, "{alg}");
    }
}
