//! Resource allocation inside a virtual cell under interference
//! coordination: BSs share channel state and allocate jointly, but each BS
//! decodes its own users treating everything else as noise.
//!
//! Indexing convention inside a cell: local user `u`, local BS `b`, band `k`,
//! flattened as `(u * n_bs + b) * n_bands + k`.

mod alternating;
mod approx;
mod channel;
mod hungarian;
mod power;

pub use alternating::{alternating_allocate, AlternatingResult, ChannelScheme};
pub use approx::alpha_beta;
pub use channel::{
    channel_alloc, channel_alloc_bsc, channel_alloc_msrm, channel_alloc_uc, consolidate,
};
pub use hungarian::hungarian_max;
pub use power::{
    continuous_allocate_dual, continuous_allocate_fast, power_allocate_given_gamma, PowerSolution,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cluster::CellMembers;
use crate::error::{Error, Result};
use crate::netgen::NetworkScenario;

/// Per-cell instance of the allocation problem. Inter-cell interference is
/// not part of the model.
#[derive(Debug, Clone, PartialEq)]
pub struct CellProblem {
    pub users: Vec<usize>,
    pub bss: Vec<usize>,
    n_users: usize,
    n_bs: usize,
    n_bands: usize,
    h: Vec<Complex64>,
    gain: Vec<f64>,
    noise: Vec<f64>,
    band_width: Vec<f64>,
    budget: Vec<f64>,
}

impl CellProblem {
    /// Builds a cell from raw data. `h` is indexed `(u, b, k)`, `noise_mw`
    /// `(b, k)`.
    pub fn new(
        n_users: usize,
        n_bs: usize,
        n_bands: usize,
        h: Vec<Complex64>,
        noise_mw: Vec<f64>,
        band_width_hz: Vec<f64>,
        budget_mw: Vec<f64>,
    ) -> Result<Self> {
        if n_bs == 0 || n_bands == 0 {
            return Err(Error::domain("a cell needs at least one BS and one band"));
        }
        if h.len() != n_users * n_bs * n_bands
            || noise_mw.len() != n_bs * n_bands
            || band_width_hz.len() != n_bands
            || budget_mw.len() != n_users
        {
            return Err(Error::domain("cell tensor dimensions do not match counts"));
        }
        if noise_mw.iter().any(|&n| !(n > 0.0)) {
            return Err(Error::domain("noise power must be > 0"));
        }
        if budget_mw.iter().any(|&p| !(p > 0.0)) || band_width_hz.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::domain("budgets and bandwidths must be > 0"));
        }
        let gain = h.iter().map(|z| z.norm_sqr()).collect();
        Ok(Self {
            users: (0..n_users).collect(),
            bss: (0..n_bs).collect(),
            n_users,
            n_bs,
            n_bands,
            h,
            gain,
            noise: noise_mw,
            band_width: band_width_hz,
            budget: budget_mw,
        })
    }

    /// Convenience constructor from real power gains `|h|^2`.
    pub fn from_gains(
        n_users: usize,
        n_bs: usize,
        n_bands: usize,
        gains: &[f64],
        noise_mw: Vec<f64>,
        band_width_hz: Vec<f64>,
        budget_mw: Vec<f64>,
    ) -> Result<Self> {
        let h = gains.iter().map(|g| Complex64::new(g.sqrt(), 0.0)).collect();
        Self::new(n_users, n_bs, n_bands, h, noise_mw, band_width_hz, budget_mw)
    }

    pub fn from_scenario(scenario: &NetworkScenario, members: &CellMembers) -> Result<Self> {
        let nk = scenario.n_bands();
        let (nu, nb) = (members.users.len(), members.bss.len());
        let mut h = Vec::with_capacity(nu * nb * nk);
        for &u in &members.users {
            for &b in &members.bss {
                for k in 0..nk {
                    h.push(scenario.h(u, b, k));
                }
            }
        }
        let mut noise = Vec::with_capacity(nb * nk);
        for &b in &members.bss {
            for k in 0..nk {
                noise.push(scenario.noise(b, k));
            }
        }
        let budget = members.users.iter().map(|&u| scenario.max_power_mw[u]).collect();
        let mut cell = Self::new(nu, nb, nk, h, noise, scenario.band_width_hz.clone(), budget)?;
        cell.users = members.users.clone();
        cell.bss = members.bss.clone();
        Ok(cell)
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_bs(&self) -> usize {
        self.n_bs
    }

    pub fn n_bands(&self) -> usize {
        self.n_bands
    }

    pub fn len(&self) -> usize {
        self.gain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gain.is_empty()
    }

    #[inline]
    pub fn idx(&self, u: usize, b: usize, k: usize) -> usize {
        (u * self.n_bs + b) * self.n_bands + k
    }

    #[inline]
    pub fn h(&self, u: usize, b: usize, k: usize) -> Complex64 {
        self.h[self.idx(u, b, k)]
    }

    #[inline]
    pub fn gain(&self, u: usize, b: usize, k: usize) -> f64 {
        self.gain[self.idx(u, b, k)]
    }

    #[inline]
    pub fn noise(&self, b: usize, k: usize) -> f64 {
        self.noise[b * self.n_bands + k]
    }

    #[inline]
    pub fn band_width(&self, k: usize) -> f64 {
        self.band_width[k]
    }

    #[inline]
    pub fn budget(&self, u: usize) -> f64 {
        self.budget[u]
    }

    pub(crate) fn gains(&self) -> &[f64] {
        &self.gain
    }

    /// Same cell with the per-`(b, k)` noise raised by `extra_mw`, e.g. by
    /// interference arriving from outside the cell.
    pub fn with_extra_noise(&self, extra_mw: &[f64]) -> Result<Self> {
        if extra_mw.len() != self.noise.len() || extra_mw.iter().any(|&x| !(x >= 0.0)) {
            return Err(Error::domain("extra noise needs one nonnegative value per (BS, band)"));
        }
        let mut cell = self.clone();
        for (n, x) in cell.noise.iter_mut().zip(extra_mw) {
            *n += x;
        }
        Ok(cell)
    }
}

/// Per-stream powers `P[u, b, k]` in mW.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    n_users: usize,
    n_bs: usize,
    n_bands: usize,
    pub p: Vec<f64>,
}

impl PowerAllocation {
    pub fn zeros(cell: &CellProblem) -> Self {
        Self {
            n_users: cell.n_users,
            n_bs: cell.n_bs,
            n_bands: cell.n_bands,
            p: vec![0.0; cell.len()],
        }
    }

    /// `P̄_u / (|B| |K|)` on every stream.
    pub fn uniform(cell: &CellProblem) -> Self {
        let mut out = Self::zeros(cell);
        let share = (cell.n_bs * cell.n_bands) as f64;
        for u in 0..cell.n_users {
            for b in 0..cell.n_bs {
                for k in 0..cell.n_bands {
                    out.p[cell.idx(u, b, k)] = cell.budget(u) / share;
                }
            }
        }
        out
    }

    #[inline]
    pub fn get(&self, u: usize, b: usize, k: usize) -> f64 {
        self.p[(u * self.n_bs + b) * self.n_bands + k]
    }

    #[inline]
    pub fn set(&mut self, u: usize, b: usize, k: usize, v: f64) {
        self.p[(u * self.n_bs + b) * self.n_bands + k] = v;
    }

    /// `Σ_b P[u, b, k]`, the user's transmit power on band `k`.
    pub fn band_power(&self, u: usize, k: usize) -> f64 {
        (0..self.n_bs).map(|b| self.get(u, b, k)).sum()
    }

    pub fn user_total(&self, u: usize) -> f64 {
        let start = u * self.n_bs * self.n_bands;
        self.p[start..start + self.n_bs * self.n_bands].iter().sum()
    }

    /// Nonnegativity and `Σ_{b,k} P ≤ P̄_u (1 + rel_tol)`.
    pub fn is_feasible(&self, cell: &CellProblem, rel_tol: f64) -> bool {
        self.p.iter().all(|&x| x >= 0.0 && x.is_finite())
            && (0..self.n_users).all(|u| self.user_total(u) <= cell.budget(u) * (1.0 + rel_tol))
    }
}

/// Binary channel assignment `γ[u, b, k]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelAssignment {
    n_users: usize,
    n_bs: usize,
    n_bands: usize,
    pub gamma: Vec<bool>,
}

impl ChannelAssignment {
    pub fn empty(cell: &CellProblem) -> Self {
        Self {
            n_users: cell.n_users,
            n_bs: cell.n_bs,
            n_bands: cell.n_bands,
            gamma: vec![false; cell.len()],
        }
    }

    #[inline]
    pub fn get(&self, u: usize, b: usize, k: usize) -> bool {
        self.gamma[(u * self.n_bs + b) * self.n_bands + k]
    }

    #[inline]
    pub fn set(&mut self, u: usize, b: usize, k: usize, v: bool) {
        self.gamma[(u * self.n_bs + b) * self.n_bands + k] = v;
    }

    /// BS serving user `u` on band `k`, if any (lowest index if several).
    pub fn serving(&self, u: usize, k: usize) -> Option<usize> {
        (0..self.n_bs).find(|&b| self.get(u, b, k))
    }

    /// `Σ_b γ[u, b, k] ≤ 1` for every `(u, k)`.
    pub fn single_bs_per_user_band(&self) -> bool {
        (0..self.n_users).all(|u| {
            (0..self.n_bands).all(|k| (0..self.n_bs).filter(|&b| self.get(u, b, k)).count() <= 1)
        })
    }

    pub fn count(&self) -> usize {
        self.gamma.iter().filter(|&&g| g).count()
    }
}

/// How the channel/power alternation seeds the high-SINR coefficients of
/// each power step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alpha0Policy {
    /// `α⁽⁰⁾ = γ`.
    Gamma,
    /// `α⁽⁰⁾ = α(γ · SINR̄)` evaluated at the previous powers moved onto the
    /// new assignment, so the first bound is tight at the starting point.
    TightSinrBar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// High-SINR refresh iterations.
    pub m_max: usize,
    /// Dual gradient steps per refresh (dual variant only).
    pub n_max: usize,
    /// Fixed-point sweeps per solve.
    pub s_max: usize,
    /// Relative change of the true objective between refreshes.
    pub tol_outer: f64,
    /// Budget residual relative to `P̄_u` (dual variant).
    pub tol_dual: f64,
    /// Largest power change relative to `P̄_u` between fixed-point sweeps.
    pub tol_fixed: f64,
    /// Alternation stops once the rate gain is at most `delta` times the rate.
    pub delta: f64,
    pub alternation_max: usize,
    /// Smallest power kept on a live stream, relative to `P̄_u`.
    pub p_floor: f64,
    /// Streams at or below this power (relative to `P̄_u`) at a refresh are
    /// frozen at zero.
    pub p_prune: f64,
    pub alpha0: Alpha0Policy,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            m_max: 50,
            n_max: 400,
            s_max: 500,
            tol_outer: 1e-6,
            tol_dual: 1e-6,
            tol_fixed: 1e-8,
            delta: 1e-3,
            alternation_max: 30,
            p_floor: 1e-12,
            p_prune: 1e-9,
            alpha0: Alpha0Policy::Gamma,
        }
    }
}

impl SolverOptions {
    /// Looser settings for large sweeps: fewer fixed-point sweeps per
    /// refresh, more refreshes, and a coarser outer tolerance.
    pub fn monte_carlo() -> Self {
        Self {
            m_max: 200,
            s_max: 20,
            tol_outer: 1e-5,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_max == 0 || self.n_max == 0 || self.s_max == 0 || self.alternation_max == 0 {
            return Err(Error::Config("iteration caps must be >= 1".into()));
        }
        let tols = [self.tol_outer, self.tol_dual, self.tol_fixed, self.delta, self.p_floor, self.p_prune];
        if tols.iter().any(|&t| !(t > 0.0)) {
            return Err(Error::Config("tolerances must be > 0".into()));
        }
        Ok(())
    }
}

/// Per-band transmit power `q[u, k]` and total received power `rx[b, k]`.
pub(crate) struct Loads {
    pub q: Vec<f64>,
    pub rx: Vec<f64>,
}

impl Loads {
    pub fn of(cell: &CellProblem, p: &[f64]) -> Self {
        let (nu, nb, nk) = (cell.n_users, cell.n_bs, cell.n_bands);
        let mut q = vec![0.0; nu * nk];
        for u in 0..nu {
            for b in 0..nb {
                for k in 0..nk {
                    q[u * nk + k] += p[cell.idx(u, b, k)];
                }
            }
        }
        let mut rx = vec![0.0; nb * nk];
        for u in 0..nu {
            for b in 0..nb {
                for k in 0..nk {
                    rx[b * nk + k] += cell.gain[cell.idx(u, b, k)] * q[u * nk + k];
                }
            }
        }
        Self { q, rx }
    }

    /// Interference at BS `b` on band `k` from every user but `u`.
    #[inline]
    pub fn others(&self, cell: &CellProblem, u: usize, b: usize, k: usize) -> f64 {
        let nk = cell.n_bands;
        (self.rx[b * nk + k] - cell.gain(u, b, k) * self.q[u * nk + k]).max(0.0)
    }

    /// Interference seen by stream `(u, b, k)`: everything except that stream.
    #[inline]
    pub fn stream(&self, cell: &CellProblem, p: &[f64], u: usize, b: usize, k: usize) -> f64 {
        let i = cell.idx(u, b, k);
        (self.rx[b * cell.n_bands + k] - cell.gain[i] * p[i]).max(0.0)
    }
}

/// SINR of stream `(u, b, k)` when every other stream, including the user's
/// own streams to other BSs, is interference at receiver `b`.
pub fn sinr(cell: &CellProblem, p: &PowerAllocation, u: usize, b: usize, k: usize) -> f64 {
    let mut interference = 0.0;
    for uu in 0..cell.n_users {
        for bb in 0..cell.n_bs {
            if (uu, bb) != (u, b) {
                interference += cell.gain(uu, b, k) * p.get(uu, bb, k);
            }
        }
    }
    cell.gain(u, b, k) * p.get(u, b, k) / (cell.noise(b, k) + interference)
}

/// SINR at BS `b` if user `u` sent its whole band-`k` power there; the
/// interference excludes every stream of user `u`.
pub fn sinr_bar(cell: &CellProblem, p: &PowerAllocation, u: usize, b: usize, k: usize) -> f64 {
    let mut interference = 0.0;
    for uu in (0..cell.n_users).filter(|&uu| uu != u) {
        interference += cell.gain(uu, b, k) * p.band_power(uu, k);
    }
    cell.gain(u, b, k) * p.band_power(u, k) / (cell.noise(b, k) + interference)
}

/// Objective of the continuous formulation: `Σ_{u,b,k} W_k log2(1 + SINR)`.
pub fn continuous_rate(cell: &CellProblem, p: &PowerAllocation) -> f64 {
    let loads = Loads::of(cell, &p.p);
    let mut rate = 0.0;
    for u in 0..cell.n_users {
        for b in 0..cell.n_bs {
            for k in 0..cell.n_bands {
                let i = cell.idx(u, b, k);
                if p.p[i] > 0.0 {
                    let s = cell.gain[i] * p.p[i] / (cell.noise(b, k) + loads.stream(cell, &p.p, u, b, k));
                    rate += cell.band_width(k) * s.ln_1p();
                }
            }
        }
    }
    rate / std::f64::consts::LN_2
}

/// Sum rate of a channel assignment: every assigned `(u, b, k)` carries the
/// user's full band power `Σ_b P[u, b, k]` and sees all other users of the
/// cell as interference.
pub fn cell_sum_rate(cell: &CellProblem, gamma: &ChannelAssignment, p: &PowerAllocation) -> f64 {
    let loads = Loads::of(cell, &p.p);
    let nk = cell.n_bands;
    let mut rate = 0.0;
    for u in 0..cell.n_users {
        for b in 0..cell.n_bs {
            for k in 0..nk {
                if gamma.get(u, b, k) {
                    let q = loads.q[u * nk + k];
                    if q > 0.0 {
                        let s = cell.gain(u, b, k) * q / (cell.noise(b, k) + loads.others(cell, u, b, k));
                        rate += cell.band_width(k) * s.ln_1p();
                    }
                }
            }
        }
    }
    rate / std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_user_cell() -> CellProblem {
        // users x BSs x 1 band, gains chosen by hand
        let gains = [2.0, 0.5, 0.25, 3.0];
        CellProblem::from_gains(2, 2, 1, &gains, vec![1.0, 0.5], vec![1.0], vec![1.0, 2.0]).unwrap()
    }

    #[test]
    fn sinr_single_link() {
        let cell = CellProblem::from_gains(1, 1, 1, &[2.0], vec![1.0], vec![1.0], vec![1.0]).unwrap();
        let mut p = PowerAllocation::zeros(&cell);
        p.set(0, 0, 0, 0.5);
        assert!((sinr(&cell, &p, 0, 0, 0) - 1.0).abs() < 1e-15);
        assert!((sinr_bar(&cell, &p, 0, 0, 0) - 1.0).abs() < 1e-15);
        p.set(0, 0, 0, 0.0);
        assert_eq!(sinr(&cell, &p, 0, 0, 0), 0.0);
        assert_eq!(sinr_bar(&cell, &p, 0, 0, 0), 0.0);
    }

    #[test]
    fn sinr_two_users_by_hand() {
        let cell = two_user_cell();
        let mut p = PowerAllocation::zeros(&cell);
        // user 0 splits 0.3 / 0.6, user 1 sends 1.5 to BS 1 and 0.2 to BS 0
        p.set(0, 0, 0, 0.3);
        p.set(0, 1, 0, 0.6);
        p.set(1, 0, 0, 0.2);
        p.set(1, 1, 0, 1.5);
        // Stream (0, 0): receiver 0 hears user 0's BS-1 part (gain 2) and all of
        // user 1 (gain 0.25).
        let want = 2.0 * 0.3 / (1.0 + 2.0 * 0.6 + 0.25 * (0.2 + 1.5));
        assert!((sinr(&cell, &p, 0, 0, 0) - want).abs() < 1e-14);
        // Stream (1, 1) at receiver 1: user 1's BS-0 part (gain 3), user 0 (gain 0.5).
        let want = 3.0 * 1.5 / (0.5 + 3.0 * 0.2 + 0.5 * 0.9);
        assert!((sinr(&cell, &p, 1, 1, 0) - want).abs() < 1e-14);
        // SINR̄: own power summed, only the other user interferes.
        let want = 0.5 * 0.9 / (0.5 + 3.0 * 1.7);
        assert!((sinr_bar(&cell, &p, 0, 1, 0) - want).abs() < 1e-14);
        let want = 0.25 * 1.7 / (1.0 + 2.0 * 0.9);
        assert!((sinr_bar(&cell, &p, 1, 0, 0) - want).abs() < 1e-14);
    }

    #[test]
    fn sum_rate_by_hand() {
        let cell = two_user_cell();
        let mut p = PowerAllocation::zeros(&cell);
        p.set(0, 0, 0, 1.0);
        p.set(1, 1, 0, 2.0);
        let mut g = ChannelAssignment::empty(&cell);
        assert_eq!(cell_sum_rate(&cell, &g, &p), 0.0);
        g.set(0, 0, 0, true);
        g.set(1, 1, 0, true);
        let want = (1.0f64 + 2.0 * 1.0 / (1.0 + 0.25 * 2.0)).log2() + (1.0f64 + 3.0 * 2.0 / (0.5 + 0.5 * 1.0)).log2();
        assert!((cell_sum_rate(&cell, &g, &p) - want).abs() < 1e-13);
        // single-BS streams: the continuous objective agrees
        assert!((continuous_rate(&cell, &p) - want).abs() < 1e-13);
    }

    #[test]
    fn single_triple_rate() {
        let cell = CellProblem::from_gains(1, 1, 1, &[4.0], vec![2.0], vec![20e3], vec![3.0]).unwrap();
        let mut p = PowerAllocation::zeros(&cell);
        p.set(0, 0, 0, 3.0);
        let mut g = ChannelAssignment::empty(&cell);
        g.set(0, 0, 0, true);
        assert!((cell_sum_rate(&cell, &g, &p) - 20e3 * 7f64.log2()).abs() < 1e-9);
    }

    #[test]
    fn feasibility_and_uniform_start() {
        let cell = two_user_cell();
        let p = PowerAllocation::uniform(&cell);
        assert!((p.user_total(1) - 2.0).abs() < 1e-15);
        assert!(p.is_feasible(&cell, 1e-9));
        let mut bad = p.clone();
        bad.set(0, 0, 0, 5.0);
        assert!(!bad.is_feasible(&cell, 1e-9));
        bad.set(0, 0, 0, -1e-3);
        assert!(!bad.is_feasible(&cell, 1e-9));
    }

    #[test]
    fn rejects_bad_cells() {
        assert!(CellProblem::from_gains(1, 0, 1, &[], vec![], vec![1.0], vec![1.0]).is_err());
        assert!(CellProblem::from_gains(1, 1, 1, &[1.0], vec![0.0], vec![1.0], vec![1.0]).is_err());
        assert!(CellProblem::from_gains(1, 1, 1, &[1.0], vec![1.0], vec![1.0], vec![0.0]).is_err());
        assert!(CellProblem::from_gains(0, 1, 1, &[], vec![1.0], vec![1.0], vec![]).is_ok());
    }
}
