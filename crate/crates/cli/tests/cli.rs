use std::process::Command;

fn vcell(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_vcell")).args(args).output().unwrap()
}

const SMALL: &str = "n_bs = 4\nn_users = 10\nn_bands = 2\nrealizations = 2\nv_list = [1, 2, 4]\n";

#[test]
fn run_writes_report_and_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    std::fs::write(&cfg, SMALL).unwrap();
    let out = dir.path().join("out");
    let o = vcell(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["config.toml", "report.csv", "plot_data.csv", "plot.py"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let rows = vcell::harness::read_csv(&out.join("report.csv")).unwrap();
    assert!(!rows.is_empty());
}

#[test]
fn cluster_prints_every_cut() {
    let o = vcell(&["cluster", "--realization", "3"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("# V=15:") && text.contains("# V=1:"));
}

#[test]
fn solve_cell_reports_a_rate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    std::fs::write(&cfg, SMALL).unwrap();
    let o = vcell(&["solve-cell", "--config", cfg.to_str().unwrap(), "--v", "2", "--scheme", "jd"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8(o.stdout).unwrap().contains("Mbit/s"));
}

#[test]
fn bad_config_fails_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "realizations = 0\n").unwrap();
    let o = vcell(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8(o.stderr).unwrap().contains("bad.toml"));
}
