use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vcell::cluster::{affiliate_users, cut, minimax_dendrogram, CellMembers};
use vcell::comp::{comp_allocate, CompProblem};
use vcell::harness::{clustering_seed, emit_plot_data, run_experiment_with_progress, write_csv, ExperimentConfig, Method, Scheme};
use vcell::ic::{alternating_allocate, continuous_allocate_dual, continuous_allocate_fast, hungarian_max, ChannelScheme};
use vcell::netgen::generate_scenario_stream;
use vcell::oracle::{brute_force_dendrogram, brute_force_matching, grid_ic_optimum, matching_weight};
use vcell::{AffiliationRule, CellProblem, Point, SolverOptions};

#[derive(Parser)]
#[command(name = "vcell", version, about = "Virtual-cell clustering and uplink resource allocation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML). Defaults to the built-in 15-BS, 100-user setup.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Replace the scenario seed from the config.
    #[arg(long)]
    seed_override: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    jobs: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.seed_override {
            cfg.scenario.seed = s;
        }
        if let Some(j) = self.jobs {
            cfg.jobs = j;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the Monte Carlo sweep and write report.csv plus plot data.
    Run {
        #[command(flatten)]
        common: Common,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Print the minimax dendrogram of one realization and its cuts.
    Cluster {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        realization: u64,
        /// Write the dendrogram here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve one virtual cell of one realization and print the solver trace.
    SolveCell {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        realization: u64,
        /// Number of virtual cells.
        #[arg(long, default_value_t = 1)]
        v: usize,
        /// Which of the V cells (0-based, in BS-label order).
        #[arg(long, default_value_t = 0)]
        cell: usize,
        #[arg(long, default_value = "hierarchical")]
        method: Method,
        #[arg(long, default_value = "best-channel")]
        rule: AffiliationRule,
        #[arg(long, default_value = "msrm")]
        scheme: Scheme,
        /// Use the dual-ascent variant instead of the fast one (continuous only).
        #[arg(long)]
        dual: bool,
        /// Write the per-iteration trace here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-check the fast solvers against brute-force oracles.
    Oracle {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Random instances per check.
        #[arg(long, default_value_t = 20)]
        instances: usize,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run { common, out } => run(&common.load()?, &out),
        Command::Cluster {
            common,
            realization,
            out,
        } => cluster(&common.load()?, realization, out.as_deref()),
        Command::SolveCell {
            common,
            realization,
            v,
            cell,
            method,
            rule,
            scheme,
            dual,
            out,
        } => {
            let cfg = common.load()?;
            let members = pick_cell(&cfg, realization, v, cell, method, rule)?;
            solve_cell(&cfg, realization, &members, scheme, dual, out.as_deref())
        }
        Command::Oracle { seed, instances } => oracle(seed, instances),
    }
}

fn run(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    std::fs::write(out.join("config.toml"), cfg.to_toml_string())?;
    let done = AtomicUsize::new(0);
    let report = run_experiment_with_progress(cfg, |_| {
        let n = done.fetch_add(1, Ordering::Relaxed) + 1;
        eprint!("\rrealization {n}/{}", cfg.realizations);
    })?;
    eprintln!();
    let csv = out.join("report.csv");
    write_csv(&report, &csv)?;
    let plots = emit_plot_data(&report, out)?;
    let flagged: usize = report.rows.iter().map(|r| r.flagged).sum();
    println!("wrote {} ({} rows, {flagged} flagged row-realizations)", csv.display(), report.rows.len());
    for p in plots {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn cluster(cfg: &ExperimentConfig, realization: u64, out: Option<&Path>) -> Result<()> {
    let sc = generate_scenario_stream(&cfg.scenario, realization)?;
    let dend = minimax_dendrogram(&sc.bs_pos);
    let mut text = String::from("# left right height prototype\n");
    text.push_str(&dend.to_text());
    for v in (1..=sc.n_bs()).rev() {
        let labels = cut(&dend, v)?;
        text.push_str(&format!("# V={v}: {:?}\n", labels.labels()));
    }
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn pick_cell(
    cfg: &ExperimentConfig,
    realization: u64,
    v: usize,
    cell: usize,
    method: Method,
    rule: AffiliationRule,
) -> Result<CellMembers> {
    let sc = generate_scenario_stream(&cfg.scenario, realization)?;
    let seed = clustering_seed(cfg.scenario.seed, realization, v);
    let part = method.partition(&sc.bs_pos, v, None, seed)?;
    let cells = affiliate_users(&sc, &part, rule)?.cells();
    match cells.into_iter().nth(cell) {
        Some(c) => Ok(c),
        None => bail!("cell {cell} out of range for V = {v}"),
    }
}

fn solve_cell(
    cfg: &ExperimentConfig,
    realization: u64,
    members: &CellMembers,
    scheme: Scheme,
    dual: bool,
    out: Option<&Path>,
) -> Result<()> {
    let sc = generate_scenario_stream(&cfg.scenario, realization)?;
    println!("cell: {} users {:?}, {} BSs {:?}", members.users.len(), members.users, members.bss.len(), members.bss);
    let t = std::time::Instant::now();
    let (rate, converged, trace): (f64, bool, Vec<f64>) = match scheme {
        Scheme::Jd => {
            let s = comp_allocate(&CompProblem::from_scenario(&sc, members)?, &cfg.comp)?;
            println!("sweeps {}, degenerate {}", s.sweeps, s.degenerate);
            (s.rate, s.converged, s.trace)
        }
        Scheme::Continuous => {
            let cell = CellProblem::from_scenario(&sc, members)?;
            let s = if dual {
                continuous_allocate_dual(&cell, &cfg.solver)
            } else {
                continuous_allocate_fast(&cell, &cfg.solver)
            };
            println!(
                "refreshes {}, sweeps {}, stationarity {:.2e}, slackness {:.2e}",
                s.refreshes, s.sweeps, s.stationarity, s.slackness
            );
            (s.rate, s.converged, s.trace)
        }
        Scheme::Uc | Scheme::Bsc | Scheme::Msrm => {
            let ch = match scheme {
                Scheme::Uc => ChannelScheme::Uc,
                Scheme::Bsc => ChannelScheme::Bsc,
                _ => ChannelScheme::Msrm,
            };
            let cell = CellProblem::from_scenario(&sc, members)?;
            let r = alternating_allocate(&cell, ch, &cfg.solver);
            println!("iterations {}, assigned streams {}", r.iterations, r.gamma.count());
            (r.rate, r.converged, r.trace)
        }
        Scheme::MaxSud => bail!("max-sud is a report column, not a solver"),
    };
    println!(
        "{}: {:.4} Mbit/s, converged {converged}, {:.3} s",
        scheme.label(),
        rate / 1e6,
        t.elapsed().as_secs_f64()
    );
    let text: String = trace.iter().enumerate().map(|(i, r)| format!("{i} {r}\n")).collect();
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn oracle(seed: u64, instances: usize) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut ok = 0;
    for _ in 0..instances {
        let w: Vec<Vec<f64>> = (0..6).map(|_| (0..6).map(|_| rng.random::<f64>()).collect()).collect();
        let (_, best) = brute_force_matching(&w);
        ok += usize::from((matching_weight(&w, &hungarian_max(&w)) - best).abs() <= 1e-12 * best);
    }
    println!("hungarian: {ok}/{instances} optimal on 6x6");

    let mut ok = 0;
    for _ in 0..instances {
        let n = rng.random_range(2..=12);
        let pts: Vec<Point> = (0..n)
            .map(|_| Point::new(rng.random::<f64>() * 2000.0, rng.random::<f64>() * 2000.0))
            .collect();
        ok += usize::from(minimax_dendrogram(&pts) == brute_force_dendrogram(&pts));
    }
    println!("minimax dendrogram: {ok}/{instances} identical to brute force");

    let mut ratios = Vec::new();
    for i in 0..instances {
        let gains: Vec<f64> = (0..8).map(|_| 10f64.powf(rng.random_range(-2.0..1.0))).collect();
        let nk = 1 + i % 2;
        let cell = CellProblem::from_gains(2, 2, nk, &gains[..4 * nk], vec![0.01; 2 * nk], vec![1.0; nk], vec![1.0; 2])?;
        let opt = grid_ic_optimum(&cell, 100)?;
        let fast = continuous_allocate_fast(&cell, &SolverOptions::default()).rate;
        ratios.push(fast / opt);
    }
    let worst = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hits = ratios.iter().filter(|&&r| r >= 0.99).count();
    println!("continuous (fast) vs grid optimum: {hits}/{instances} within 1%, worst ratio {worst:.3}");
    Ok(())
}
