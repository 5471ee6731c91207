use vcell::harness::{read_csv, run_experiment, write_csv, ExperimentConfig, Report, Scheme};

fn small() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.scenario.n_bs = 4;
    cfg.scenario.n_users = 10;
    cfg.scenario.n_bands = 2;
    cfg.realizations = 3;
    cfg.v_list = vec![1, 2, 4];
    cfg
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let mut cfg = small();
    let a = run_experiment(&cfg).unwrap();
    cfg.jobs = 3;
    let b = run_experiment(&cfg).unwrap();
    assert_eq!(a.rows, b.rows);
    assert_eq!(a.samples, b.samples);
}

#[test]
fn csv_round_trips() {
    let report = run_experiment(&small()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.csv");
    write_csv(&report, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# vcell report v1;"));
    assert_eq!(read_csv(&path).unwrap(), report.rows);
}

#[test]
fn empty_report_is_header_only() {
    let report = Report::aggregate(&small(), &[]);
    assert!(report.rows.is_empty());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    write_csv(&report, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(read_csv(&path).unwrap().is_empty());
}

#[test]
fn max_sud_dominates_every_sud_scheme() {
    let report = run_experiment(&small()).unwrap();
    let maxes: Vec<_> = report.rows.iter().filter(|r| r.scheme == Scheme::MaxSud).collect();
    assert!(!maxes.is_empty());
    for m in maxes {
        for r in report.rows.iter().filter(|r| r.v == m.v && r.method == m.method && r.rule == m.rule) {
            if r.scheme.is_sud() {
                assert!(m.mean_bps >= r.mean_bps);
            }
        }
    }
}

#[test]
fn malformed_config_is_rejected() {
    assert!(ExperimentConfig::from_toml_str("realizations = 0").is_err());
    assert!(ExperimentConfig::from_toml_str("no_such_key = 1").is_err());
    assert!(ExperimentConfig::from_toml_str("v_list = [0]").is_err());
    let cfg = small();
    assert_eq!(ExperimentConfig::from_toml_str(&cfg.to_toml_string()).unwrap(), cfg);
}
