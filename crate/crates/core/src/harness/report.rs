use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, Method, Sample, Scheme};
use crate::cluster::AffiliationRule;
use crate::error::{Error, Result};

/// Bumped whenever the CSV columns change.
pub const CSV_VERSION: u32 = 1;

const CSV_HEADER: [&str; 8] = ["V", "method", "rule", "scheme", "mean_bps", "stderr_bps", "n", "flagged"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    #[serde(rename = "V")]
    pub v: usize,
    pub method: Method,
    pub rule: AffiliationRule,
    pub scheme: Scheme,
    pub mean_bps: f64,
    pub stderr_bps: f64,
    pub n: usize,
    /// Realizations in which some cell hit an iteration cap; their last
    /// iterate still counts toward the mean.
    pub flagged: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metadata {
    pub config: ExperimentConfig,
    /// Realization `r` drew its scenario from stream `r` of this seed.
    pub seed: u64,
    pub streams: std::ops::Range<u64>,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub rows: Vec<ReportRow>,
    /// Per-realization rates behind `rows[i]`, in realization order.
    pub samples: Vec<Vec<f64>>,
    pub metadata: Metadata,
}

fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

impl Report {
    /// Folds per-realization samples (all in the same sweep order) into
    /// rows, then appends a Max SUD row after each `(V, method, rule)` group
    /// that has single-user-decoding schemes.
    pub fn aggregate(cfg: &ExperimentConfig, per_realization: &[Vec<Sample>]) -> Self {
        let mut rows = Vec::new();
        let mut samples = Vec::new();
        if let Some(first) = per_realization.first() {
            let mut i = 0;
            while i < first.len() {
                let key = |s: &Sample| (s.v, s.method.key(), s.rule);
                let group_end = (i..first.len()).find(|&j| key(&first[j]) != key(&first[i])).unwrap_or(first.len());
                let mut best: Option<usize> = None;
                for j in i..group_end {
                    let xs: Vec<f64> = per_realization.iter().map(|r| r[j].rate_bps).collect();
                    let (mean_bps, stderr_bps) = mean_stderr(&xs);
                    let s = &first[j];
                    rows.push(ReportRow {
                        v: s.v,
                        method: s.method,
                        rule: s.rule,
                        scheme: s.scheme,
                        mean_bps,
                        stderr_bps,
                        n: xs.len(),
                        flagged: per_realization.iter().filter(|r| r[j].flagged).count(),
                    });
                    samples.push(xs);
                    let row = rows.len() - 1;
                    if s.scheme.is_sud() && best.map_or(true, |b| rows[row].mean_bps > rows[b].mean_bps) {
                        best = Some(row);
                    }
                }
                if let Some(b) = best {
                    rows.push(ReportRow {
                        scheme: Scheme::MaxSud,
                        ..rows[b].clone()
                    });
                    samples.push(samples[b].clone());
                }
                i = group_end;
            }
        }
        Report {
            rows,
            samples,
            metadata: Metadata {
                config: cfg.clone(),
                seed: cfg.scenario.seed,
                streams: 0..cfg.realizations as u64,
                version: env!("CARGO_PKG_VERSION").to_string(),
            },
        }
    }

    pub fn row(&self, v: usize, method: Method, rule: AffiliationRule, scheme: Scheme) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.v == v && r.method == method && r.rule == rule && r.scheme == scheme)
    }

    /// Per-realization rates of the matching row.
    pub fn samples_of(&self, v: usize, method: Method, rule: AffiliationRule, scheme: Scheme) -> Option<&[f64]> {
        self.rows
            .iter()
            .position(|r| r.v == v && r.method == method && r.rule == rule && r.scheme == scheme)
            .map(|i| self.samples[i].as_slice())
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes the rows behind a versioned `#` comment line.
pub fn write_csv(report: &Report, path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let m = &report.metadata;
    writeln!(
        file,
        "# vcell report v{CSV_VERSION}; code {}; seed {}; streams {}..{}",
        m.version, m.seed, m.streams.start, m.streams.end
    )
    .map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    w.write_record(CSV_HEADER).map_err(csv_err(path))?;
    for row in &report.rows {
        w.serialize(row).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_csv(path: &Path) -> Result<Vec<ReportRow>> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(csv_err(path))?;
    let header = r.headers().map_err(csv_err(path))?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Format(format!("{}: unexpected CSV header {:?}", path.display(), header)));
    }
    r.deserialize().collect::<std::result::Result<_, _>>().map_err(csv_err(path))
}

/// `F1 - F2 - F3` legend label, e.g. `Hierarchical - JD - best channel`.
pub fn series_label(method: Method, scheme: Scheme, rule: AffiliationRule) -> String {
    format!("{} - {} - {}", method.label(), scheme.label(), rule.label())
}

#[derive(Serialize)]
struct PlotPoint<'a> {
    figure: &'a str,
    series: String,
    #[serde(rename = "V")]
    v: usize,
    mean_bps: f64,
    stderr_bps: f64,
}

const PLOT_SCRIPT: &str = r#"# Generated by vcell. Draws one figure per `figure` value of plot_data.csv.
import sys

import matplotlib.pyplot as plt
import pandas as pd

data = pd.read_csv(sys.argv[1] if len(sys.argv) > 1 else "plot_data.csv")
for figure, df in data.groupby("figure", sort=False):
    fig, ax = plt.subplots()
    for series, s in df.groupby("series", sort=False):
        ax.errorbar(s["V"], s["mean_bps"] / 1e6, yerr=s["stderr_bps"] / 1e6, label=series, marker="o", capsize=2)
    ax.set_xlabel("Number of virtual cells")
    ax.set_ylabel("Average system sum rate [Mbit/s]")
    ax.legend(fontsize="small")
    fig.savefig(f"{figure}.png", dpi=150, bbox_inches="tight")
"#;

/// Writes `plot_data.csv` (one series per figure line) and a matplotlib
/// script `plot.py` into `dir`. Returns the written paths.
pub fn emit_plot_data(report: &Report, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    type Pick = fn(&ReportRow) -> bool;
    let figures: [(&str, Pick); 5] = [
        ("sud-schemes", |r| r.method == Method::Hierarchical && r.scheme != Scheme::Jd),
        ("joint-decoding", |r| r.method == Method::Hierarchical && r.scheme == Scheme::Jd),
        ("jd-vs-sud", |r| {
            r.method == Method::Hierarchical && matches!(r.scheme, Scheme::Jd | Scheme::MaxSud)
        }),
        ("clustering-sud", |r| r.scheme == Scheme::MaxSud),
        ("clustering-jd", |r| r.scheme == Scheme::Jd),
    ];
    let data = dir.join("plot_data.csv");
    let mut w = csv::Writer::from_path(&data).map_err(csv_err(&data))?;
    for (figure, pick) in figures {
        let mut rows: Vec<&ReportRow> = report.rows.iter().filter(|r| pick(r)).collect();
        // series together, V ascending inside a series
        rows.sort_by(|a, b| {
            (a.rule, a.method.key(), a.scheme, a.v).cmp(&(b.rule, b.method.key(), b.scheme, b.v))
        });
        for r in rows {
            w.serialize(PlotPoint {
                figure,
                series: series_label(r.method, r.scheme, r.rule),
                v: r.v,
                mean_bps: r.mean_bps,
                stderr_bps: r.stderr_bps,
            })
            .map_err(csv_err(&data))?;
        }
    }
    w.flush().map_err(|e| Error::io(&data, e))?;
    let script = dir.join("plot.py");
    std::fs::write(&script, PLOT_SCRIPT).map_err(|e| Error::io(&script, e))?;
    Ok(vec![data, script])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(v: usize, scheme: Scheme, rate: f64) -> Sample {
        Sample {
            v,
            method: Method::Hierarchical,
            rule: AffiliationRule::BestChannel,
            scheme,
            rate_bps: rate,
            flagged: false,
        }
    }

    #[test]
    fn aggregate_means_and_max_sud() {
        let cfg = ExperimentConfig::default();
        let per = vec![
            vec![sample(1, Scheme::Uc, 1.0), sample(1, Scheme::Msrm, 4.0), sample(1, Scheme::Jd, 9.0)],
            vec![sample(1, Scheme::Uc, 3.0), sample(1, Scheme::Msrm, 0.0), sample(1, Scheme::Jd, 9.0)],
        ];
        let rep = Report::aggregate(&cfg, &per);
        let schemes: Vec<Scheme> = rep.rows.iter().map(|r| r.scheme).collect();
        assert_eq!(schemes, [Scheme::Uc, Scheme::Msrm, Scheme::Jd, Scheme::MaxSud]);
        assert_eq!(rep.rows[0].mean_bps, 2.0);
        assert_eq!(rep.rows[0].stderr_bps, 1.0);
        assert_eq!(rep.rows[2].stderr_bps, 0.0);
        // UC and MSRM tie at 2.0 on average; the first listed wins
        assert_eq!(rep.rows[3].mean_bps, 2.0);
        assert_eq!(rep.samples[3], vec![1.0, 3.0]);
    }

    #[test]
    fn single_realization_mean_is_the_value() {
        let rep = Report::aggregate(&ExperimentConfig::default(), &[vec![sample(3, Scheme::Jd, 7.5)]]);
        assert_eq!(rep.rows.len(), 1);
        assert_eq!((rep.rows[0].mean_bps, rep.rows[0].stderr_bps, rep.rows[0].n), (7.5, 0.0, 1));
    }

    #[test]
    fn labels_follow_legend_grammar() {
        assert_eq!(
            series_label(Method::Hierarchical, Scheme::Jd, AffiliationRule::BestChannel),
            "Hierarchical - JD - best channel"
        );
        assert_eq!(
            series_label(Method::KMeans, Scheme::MaxSud, AffiliationRule::ClosestBs),
            "K-means - Max SUD - closest BS"
        );
    }
}
