//! Monte Carlo sweeps over cluster counts, clustering methods, affiliation
//! rules and allocation schemes.
//!
//! Every realization draws its scenario from its own seed sub-stream and is
//! evaluated on one thread, so a [`Report`] depends only on the
//! [`ExperimentConfig`], not on how many workers ran it.

mod report;

pub use report::{emit_plot_data, read_csv, series_label, write_csv, Metadata, Report, ReportRow, CSV_VERSION};

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::{
    affiliate_users, cut, kmeans_cluster, minimax_dendrogram, spectral_cluster, AffiliationRule, BsPartition,
    CellMembers, Dendrogram, Point,
};
use crate::comp::{comp_allocate, comp_sum_capacity, CompOptions, CompPower, CompProblem, HermitianMatrix};
use crate::error::{Error, Result};
use crate::ic::{
    alternating_allocate, cell_sum_rate, continuous_allocate_fast, continuous_rate, CellProblem, ChannelAssignment,
    ChannelScheme, PowerAllocation, SolverOptions,
};
use crate::netgen::{generate_scenario_stream, NetworkScenario, ScenarioConfig};

/// How the BSs are grouped into `V` virtual BSs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Method {
    /// Cut of the minimax-linkage dendrogram.
    Hierarchical,
    KMeans,
    /// Gaussian affinity of width `sigma` meters.
    Spectral { sigma: f64 },
}

impl Method {
    /// Config and CSV spelling: `hierarchical`, `kmeans`, `spectral:<sigma>`.
    pub fn key(&self) -> String {
        match self {
            Method::Hierarchical => "hierarchical".into(),
            Method::KMeans => "kmeans".into(),
            Method::Spectral { sigma } => format!("spectral:{sigma}"),
        }
    }

    /// Figure legend spelling.
    pub fn label(&self) -> String {
        match self {
            Method::Hierarchical => "Hierarchical".into(),
            Method::KMeans => "K-means".into(),
            Method::Spectral { sigma } => {
                let s = format!("{sigma:.2}");
                format!("Spectral clustering σ={}", s.trim_end_matches('0').trim_end_matches('.'))
            }
        }
    }

    /// Partition of `points` into `v` clusters. A precomputed dendrogram is
    /// reused when given; `seed` drives the randomized methods.
    pub fn partition(&self, points: &[Point], v: usize, dendrogram: Option<&Dendrogram>, seed: u64) -> Result<BsPartition> {
        match self {
            Method::Hierarchical => match dendrogram {
                Some(d) => cut(d, v),
                None => cut(&minimax_dendrogram(points), v),
            },
            Method::KMeans => kmeans_cluster(points, v, seed),
            Method::Spectral { sigma } => spectral_cluster(points, v, *sigma, seed),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hierarchical" => Ok(Method::Hierarchical),
            "kmeans" => Ok(Method::KMeans),
            _ => {
                let sigma = s
                    .strip_prefix("spectral:")
                    .and_then(|x| x.parse::<f64>().ok())
                    .ok_or_else(|| Error::Config(format!("unknown clustering method {s:?}")))?;
                if !(sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::Config(format!("spectral sigma must be > 0, got {sigma}")));
                }
                Ok(Method::Spectral { sigma })
            }
        }
    }
}

impl TryFrom<String> for Method {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Method> for String {
    fn from(m: Method) -> String {
        m.key()
    }
}

/// Resource allocation inside each virtual cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Continuous relaxation solved by the fast power solver.
    Continuous,
    Uc,
    Bsc,
    Msrm,
    /// Joint decoding.
    Jd,
    /// Best of the four single-user-decoding schemes, picked on averages.
    /// Derived in reports; not a solver.
    MaxSud,
}

impl Scheme {
    pub const SUD: [Scheme; 4] = [Scheme::Continuous, Scheme::Uc, Scheme::Bsc, Scheme::Msrm];

    pub fn label(self) -> &'static str {
        match self {
            Scheme::Continuous => "Continuous",
            Scheme::Uc => "UC",
            Scheme::Bsc => "BSC",
            Scheme::Msrm => "MSRM",
            Scheme::Jd => "JD",
            Scheme::MaxSud => "Max SUD",
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            Scheme::Continuous => "continuous",
            Scheme::Uc => "uc",
            Scheme::Bsc => "bsc",
            Scheme::Msrm => "msrm",
            Scheme::Jd => "jd",
            Scheme::MaxSud => "max-sud",
        }
    }

    pub fn is_sud(self) -> bool {
        Self::SUD.contains(&self)
    }

    fn channel_scheme(self) -> Option<ChannelScheme> {
        match self {
            Scheme::Uc => Some(ChannelScheme::Uc),
            Scheme::Bsc => Some(ChannelScheme::Bsc),
            Scheme::Msrm => Some(ChannelScheme::Msrm),
            _ => None,
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Scheme::Continuous,
            Scheme::Uc,
            Scheme::Bsc,
            Scheme::Msrm,
            Scheme::Jd,
            Scheme::MaxSud,
        ]
        .into_iter()
        .find(|x| x.key() == s)
        .ok_or_else(|| Error::Config(format!("unknown scheme {s:?}")))
    }
}

/// Everything a Monte Carlo run depends on.
///
/// In TOML the scenario keys sit at the top level next to the sweep keys;
/// solver options go in `[solver]` and joint-decoding options in `[comp]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub scenario: ScenarioConfig,
    pub realizations: usize,
    pub v_list: Vec<usize>,
    pub methods: Vec<Method>,
    pub rules: Vec<AffiliationRule>,
    pub schemes: Vec<Scheme>,
    /// Worker threads. Results do not depend on it.
    pub jobs: usize,
    /// Evaluate each cell's rate with the other cells' transmissions added
    /// to its noise. The allocation itself never sees them.
    pub intercell_interference: bool,
    pub solver: SolverOptions,
    pub comp: CompOptions,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let scenario = ScenarioConfig::default();
        Self {
            realizations: 200,
            v_list: (1..=scenario.n_bs).collect(),
            methods: vec![
                Method::Hierarchical,
                Method::KMeans,
                Method::Spectral {
                    sigma: 2000f64.sqrt(),
                },
                Method::Spectral { sigma: 2000.0 },
            ],
            rules: vec![AffiliationRule::ClosestBs, AffiliationRule::BestChannel],
            schemes: vec![Scheme::Continuous, Scheme::Uc, Scheme::Bsc, Scheme::Msrm, Scheme::Jd],
            jobs: 1,
            intercell_interference: true,
            solver: SolverOptions::monte_carlo(),
            comp: CompOptions::default(),
            scenario,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.solver.validate()?;
        let bad = |msg: String| Err(Error::Config(msg));
        if self.realizations == 0 {
            return bad("realizations must be >= 1".into());
        }
        if self.jobs == 0 {
            return bad("jobs must be >= 1".into());
        }
        if self.v_list.is_empty() || self.methods.is_empty() || self.rules.is_empty() || self.schemes.is_empty() {
            return bad("v_list, methods, rules and schemes must be nonempty".into());
        }
        if let Some(&v) = self.v_list.iter().find(|&&v| v == 0 || v > self.scenario.n_bs) {
            return Err(Error::ClusterCount {
                v,
                n: self.scenario.n_bs,
            });
        }
        if self.schemes.contains(&Scheme::MaxSud) {
            return bad("max-sud is derived from the other schemes; list those instead".into());
        }
        if !(self.comp.tol > 0.0) || self.comp.max_sweeps == 0 {
            return bad("comp.tol must be > 0 and comp.max_sweeps >= 1".into());
        }
        Ok(())
    }

    /// Parses and validates a config. Unknown keys are rejected.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = toml::from_str(text)?;
        let known = toml::Table::try_from(Self::default()).expect("default config serializes");
        if let Some(key) = table.keys().find(|k| !known.contains_key(*k)) {
            return Err(Error::Config(format!("unknown key {key:?}")));
        }
        let cfg: Self = table.try_into()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("experiment config always serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            Error::Toml(e) => Error::Config(format!("{}: {e}", path.display())),
            other => other,
        })
    }
}

/// System sum rate of one swept combination in one realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub v: usize,
    pub method: Method,
    pub rule: AffiliationRule,
    pub scheme: Scheme,
    pub rate_bps: f64,
    /// Some cell's solver stopped on an iteration cap.
    pub flagged: bool,
}

#[derive(Debug, Clone)]
enum Allocation {
    /// Continuous relaxation: every `(u, b, k)` stream may carry power.
    Streams(PowerAllocation),
    Assigned(ChannelAssignment, PowerAllocation),
    Joint(CompPower),
}

#[derive(Debug, Clone)]
struct Solved {
    alloc: Allocation,
    /// Rate with the rest of the network silent.
    rate: f64,
    converged: bool,
}

struct CellCache<'a> {
    scenario: &'a NetworkScenario,
    cfg: &'a ExperimentConfig,
    cells: HashMap<CellMembers, HashMap<Scheme, Solved>>,
}

impl<'a> CellCache<'a> {
    fn solved(&mut self, members: &CellMembers, scheme: Scheme) -> Result<&Solved> {
        let per_cell = self.cells.entry(members.clone()).or_default();
        if !per_cell.contains_key(&scheme) {
            let s = solve_cell(self.scenario, members, scheme, self.cfg)?;
            per_cell.insert(scheme, s);
        }
        Ok(&per_cell[&scheme])
    }
}

fn solve_cell(scenario: &NetworkScenario, members: &CellMembers, scheme: Scheme, cfg: &ExperimentConfig) -> Result<Solved> {
    if scheme == Scheme::Jd {
        let prob = CompProblem::from_scenario(scenario, members)?;
        let sol = comp_allocate(&prob, &cfg.comp)?;
        return Ok(Solved {
            alloc: Allocation::Joint(sol.power),
            rate: sol.rate,
            converged: sol.converged,
        });
    }
    let cell = CellProblem::from_scenario(scenario, members)?;
    match scheme.channel_scheme() {
        Some(ch) => {
            let r = alternating_allocate(&cell, ch, &cfg.solver);
            Ok(Solved {
                alloc: Allocation::Assigned(r.gamma, r.power),
                rate: r.rate,
                converged: r.converged,
            })
        }
        None => {
            let sol = continuous_allocate_fast(&cell, &cfg.solver);
            Ok(Solved {
                alloc: Allocation::Streams(sol.power),
                rate: sol.rate,
                converged: sol.converged,
            })
        }
    }
}

/// Seed handed to the randomized clustering methods in realization
/// `realization` at `v` clusters.
pub fn clustering_seed(seed: u64, realization: u64, v: usize) -> u64 {
    let mut z = seed ^ realization.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (v as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
    // splitmix64 finalizer
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Rates of every `(V, method, rule, scheme)` combination of `cfg` on one
/// scenario, in sweep order. Cells shared between combinations are solved
/// once.
pub fn evaluate_realization(scenario: &NetworkScenario, cfg: &ExperimentConfig, realization: u64) -> Result<Vec<Sample>> {
    let dendrogram = cfg
        .methods
        .contains(&Method::Hierarchical)
        .then(|| minimax_dendrogram(&scenario.bs_pos));
    let mut cache = CellCache {
        scenario,
        cfg,
        cells: HashMap::new(),
    };
    let mut out = Vec::with_capacity(cfg.v_list.len() * cfg.methods.len() * cfg.rules.len() * cfg.schemes.len());
    for &v in &cfg.v_list {
        for &method in &cfg.methods {
            let seed = clustering_seed(cfg.scenario.seed, realization, v);
            let part = method.partition(&scenario.bs_pos, v, dendrogram.as_ref(), seed)?;
            for &rule in &cfg.rules {
                let layout = affiliate_users(scenario, &part, rule)?;
                if !layout.is_proper() || layout.n_cells() != v {
                    return Err(Error::domain(format!("{method} produced an improper layout at V = {v}")));
                }
                let cells = layout.cells();
                for &scheme in &cfg.schemes {
                    let (rate_bps, flagged) = system_rate(&mut cache, &cells, scheme, cfg.intercell_interference)?;
                    out.push(Sample {
                        v,
                        method,
                        rule,
                        scheme,
                        rate_bps,
                        flagged,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Sum over cells of each cell's rate, plus whether any cell was flagged.
fn system_rate(cache: &mut CellCache<'_>, cells: &[CellMembers], scheme: Scheme, interference: bool) -> Result<(f64, bool)> {
    let mut solved = Vec::with_capacity(cells.len());
    for c in cells {
        solved.push(cache.solved(c, scheme)?.clone());
    }
    let flagged = solved.iter().any(|s| !s.converged);
    if !interference || cells.len() == 1 {
        return Ok((solved.iter().map(|s| s.rate).sum(), flagged));
    }

    let sc = cache.scenario;
    let nk = sc.n_bands();
    // transmit power of every user on every band
    let mut q = vec![0.0; sc.n_users() * nk];
    for (c, s) in cells.iter().zip(&solved) {
        for (i, &u) in c.users.iter().enumerate() {
            for k in 0..nk {
                q[u * nk + k] = match &s.alloc {
                    Allocation::Streams(p) | Allocation::Assigned(_, p) => p.band_power(i, k),
                    Allocation::Joint(p) => p.get(i, k),
                };
            }
        }
    }

    let mut total = 0.0;
    for (c, s) in cells.iter().zip(&solved) {
        if c.users.is_empty() {
            continue;
        }
        let outsiders: Vec<usize> = {
            let mut inside = vec![false; sc.n_users()];
            c.users.iter().for_each(|&u| inside[u] = true);
            (0..sc.n_users()).filter(|&u| !inside[u]).collect()
        };
        total += match &s.alloc {
            Allocation::Joint(p) => {
                let noise = (0..nk)
                    .map(|k| {
                        let mut m = HermitianMatrix::diagonal(&c.bss.iter().map(|&b| sc.noise(b, k)).collect::<Vec<_>>());
                        for &u in &outsiders {
                            let w = q[u * nk + k];
                            if w > 0.0 {
                                let h: Vec<Complex64> = c.bss.iter().map(|&b| sc.h(u, b, k)).collect();
                                m.add_outer(w, &h);
                            }
                        }
                        m
                    })
                    .collect();
                let prob = CompProblem::from_scenario_with_noise(sc, c, noise)?;
                comp_sum_capacity(&prob, p)?
            }
            Allocation::Streams(p) | Allocation::Assigned(_, p) => {
                let mut extra = vec![0.0; c.bss.len() * nk];
                for (j, &b) in c.bss.iter().enumerate() {
                    for k in 0..nk {
                        extra[j * nk + k] = outsiders.iter().map(|&u| sc.gain(u, b, k) * q[u * nk + k]).sum();
                    }
                }
                let cell = CellProblem::from_scenario(sc, c)?.with_extra_noise(&extra)?;
                match &s.alloc {
                    Allocation::Assigned(gamma, _) => cell_sum_rate(&cell, gamma, p),
                    _ => continuous_rate(&cell, p),
                }
            }
        };
    }
    Ok((total, flagged))
}

/// Runs every realization of `cfg` and aggregates the results.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    run_experiment_with_progress(cfg, |_| {})
}

/// As [`run_experiment`], calling `progress(r)` as realization `r`
/// finishes (from worker threads, in completion order).
pub fn run_experiment_with_progress(cfg: &ExperimentConfig, progress: impl Fn(u64) + Sync) -> Result<Report> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {} workers: {e}", cfg.jobs)))?;
    let per_realization: Vec<Vec<Sample>> = pool.install(|| {
        (0..cfg.realizations as u64)
            .into_par_iter()
            .map(|r| {
                let scenario = generate_scenario_stream(&cfg.scenario, r)?;
                let out = evaluate_realization(&scenario, cfg, r)?;
                progress(r);
                Ok(out)
            })
            .collect::<Result<_>>()
    })?;
    Ok(Report::aggregate(cfg, &per_realization))
}
