//! Joint decoding inside a virtual cell.
//!
//! The BSs of a cell act as one multi-antenna receiver, so the cell is a
//! multiple access channel whose sum capacity is a log-det. Powers are
//! maximized by cyclic coordinate ascent: each user in turn waterfills
//! against the noise plus everyone else's signal.

mod linalg;

pub use linalg::{effective_gain, hermitian_logdet, Cholesky, HermitianMatrix};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cluster::CellMembers;
use crate::error::{Error, Result};
use crate::netgen::NetworkScenario;

#[derive(Debug, Clone, PartialEq)]
pub struct CompProblem {
    pub users: Vec<usize>,
    pub bss: Vec<usize>,
    n_users: usize,
    n_bands: usize,
    /// `h[(u * n_bands + k) * n_bs + b]`, so each `(u, k)` vector is contiguous.
    h: Vec<Complex64>,
    noise_cov: Vec<HermitianMatrix>,
    band_width: Vec<f64>,
    budget: Vec<f64>,
}

impl CompProblem {
    /// `h_vecs[u * n_bands + k]` is user `u`'s channel vector on band `k`.
    pub fn new(
        h_vecs: Vec<Vec<Complex64>>,
        n_users: usize,
        noise_cov: Vec<HermitianMatrix>,
        band_width_hz: Vec<f64>,
        budget_mw: Vec<f64>,
    ) -> Result<Self> {
        let n_bands = band_width_hz.len();
        let n_bs = noise_cov.first().map_or(0, HermitianMatrix::dim);
        if n_bands == 0 || n_bs == 0 {
            return Err(Error::domain("a joint-decoding cell needs at least one BS and one band"));
        }
        if noise_cov.len() != n_bands || noise_cov.iter().any(|m| m.dim() != n_bs) {
            return Err(Error::domain("one noise covariance of the cell's size per band"));
        }
        if h_vecs.len() != n_users * n_bands || h_vecs.iter().any(|v| v.len() != n_bs) {
            return Err(Error::domain("one channel vector of the cell's size per user and band"));
        }
        if budget_mw.len() != n_users || budget_mw.iter().any(|&p| !(p > 0.0)) {
            return Err(Error::domain("one positive budget per user"));
        }
        if band_width_hz.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::domain("bandwidths must be > 0"));
        }
        for m in &noise_cov {
            if !m.is_hermitian(1e-12 * m.max_diag().max(f64::MIN_POSITIVE)) {
                return Err(Error::domain("noise covariance is not Hermitian"));
            }
            Cholesky::new(m)?;
        }
        Ok(Self {
            users: (0..n_users).collect(),
            bss: (0..n_bs).collect(),
            n_users,
            n_bands,
            h: h_vecs.into_iter().flatten().collect(),
            noise_cov,
            band_width: band_width_hz,
            budget: budget_mw,
        })
    }

    /// Cell with white noise `diag(σ²[b, k])`.
    pub fn from_scenario(scenario: &NetworkScenario, members: &CellMembers) -> Result<Self> {
        let nk = scenario.n_bands();
        let noise = (0..nk)
            .map(|k| HermitianMatrix::diagonal(&members.bss.iter().map(|&b| scenario.noise(b, k)).collect::<Vec<_>>()))
            .collect();
        Self::from_scenario_with_noise(scenario, members, noise)
    }

    /// Cell with an arbitrary per-band noise covariance over its BSs.
    pub fn from_scenario_with_noise(
        scenario: &NetworkScenario,
        members: &CellMembers,
        noise_cov: Vec<HermitianMatrix>,
    ) -> Result<Self> {
        let nk = scenario.n_bands();
        let mut h = Vec::with_capacity(members.users.len() * nk);
        for &u in &members.users {
            for k in 0..nk {
                h.push(members.bss.iter().map(|&b| scenario.h(u, b, k)).collect());
            }
        }
        let budget = members.users.iter().map(|&u| scenario.max_power_mw[u]).collect();
        let mut prob = Self::new(h, members.users.len(), noise_cov, scenario.band_width_hz.clone(), budget)?;
        prob.users = members.users.clone();
        prob.bss = members.bss.clone();
        Ok(prob)
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_bs(&self) -> usize {
        self.noise_cov[0].dim()
    }

    pub fn n_bands(&self) -> usize {
        self.n_bands
    }

    pub fn h_vec(&self, u: usize, k: usize) -> &[Complex64] {
        let nb = self.n_bs();
        let start = (u * self.n_bands + k) * nb;
        &self.h[start..start + nb]
    }

    pub fn noise_cov(&self, k: usize) -> &HermitianMatrix {
        &self.noise_cov[k]
    }

    pub fn band_width(&self, k: usize) -> f64 {
        self.band_width[k]
    }

    pub fn budget(&self, u: usize) -> f64 {
        self.budget[u]
    }

    /// `N_k + Σ_u p[u, k] h h†`, optionally leaving one user out.
    pub fn received_cov(&self, p: &CompPower, k: usize, skip: Option<usize>) -> HermitianMatrix {
        let mut m = self.noise_cov[k].clone();
        for u in (0..self.n_users).filter(|&u| Some(u) != skip) {
            let w = p.get(u, k);
            if w > 0.0 {
                m.add_outer(w, self.h_vec(u, k));
            }
        }
        m
    }
}

/// Per-user, per-band powers `p[u, k]` in mW.
#[derive(Debug, Clone, PartialEq)]
pub struct CompPower {
    n_bands: usize,
    pub p: Vec<f64>,
}

impl CompPower {
    pub fn zeros(prob: &CompProblem) -> Self {
        Self {
            n_bands: prob.n_bands,
            p: vec![0.0; prob.n_users * prob.n_bands],
        }
    }

    /// `P̄_u / |K|` on every band.
    pub fn uniform(prob: &CompProblem) -> Self {
        let mut out = Self::zeros(prob);
        for u in 0..prob.n_users {
            for k in 0..prob.n_bands {
                out.set(u, k, prob.budget(u) / prob.n_bands as f64);
            }
        }
        out
    }

    #[inline]
    pub fn get(&self, u: usize, k: usize) -> f64 {
        self.p[u * self.n_bands + k]
    }

    #[inline]
    pub fn set(&mut self, u: usize, k: usize, v: f64) {
        self.p[u * self.n_bands + k] = v;
    }

    pub fn user(&self, u: usize) -> &[f64] {
        &self.p[u * self.n_bands..(u + 1) * self.n_bands]
    }

    pub fn user_total(&self, u: usize) -> f64 {
        self.user(u).iter().sum()
    }

    pub fn is_feasible(&self, prob: &CompProblem, rel_tol: f64) -> bool {
        self.p.iter().all(|&x| x >= 0.0 && x.is_finite())
            && (0..prob.n_users).all(|u| self.user_total(u) <= prob.budget(u) * (1.0 + rel_tol))
    }
}

/// `Σ_k W_k [log2 det(N_k + Σ_u p h h†) - log2 det N_k]` in bit/s.
pub fn comp_sum_capacity(prob: &CompProblem, p: &CompPower) -> Result<f64> {
    let mut rate = 0.0;
    for k in 0..prob.n_bands {
        let total = hermitian_logdet(&prob.received_cov(p, k, None))?;
        let noise = hermitian_logdet(&prob.noise_cov[k])?;
        rate += prob.band_width(k) * (total - noise);
    }
    Ok(rate)
}

/// `∂R/∂p[u, k] = W_k h† (N_k + Σ_j p h h†)⁻¹ h / ln 2`, indexed like
/// [`CompPower::p`].
pub fn comp_gradient(prob: &CompProblem, p: &CompPower) -> Result<Vec<f64>> {
    let mut grad = vec![0.0; p.p.len()];
    for k in 0..prob.n_bands {
        let chol = Cholesky::new(&prob.received_cov(p, k, None))?;
        for u in 0..prob.n_users {
            grad[u * prob.n_bands + k] = prob.band_width(k) * chol.quad_inv(prob.h_vec(u, k)) / std::f64::consts::LN_2;
        }
    }
    Ok(grad)
}

/// Maximizes `Σ_k W_k log(1 + g_k p_k)` subject to `Σ_k p_k = budget`.
///
/// The optimum is `p_k = (W_k / λ - 1 / g_k)⁺`. Bands enter in decreasing
/// order of `W_k g_k`; the active set is the longest prefix whose last band
/// still has `W_k g_k > λ`, which gives `λ` in closed form. Returns the
/// powers and `λ` (in nats per mW); all-zero gains give zero powers and
/// `λ = 0`.
pub fn user_waterfill(gains: &[f64], widths: &[f64], budget: f64) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..gains.len()).filter(|&k| gains[k] > 0.0).collect();
    if order.is_empty() || !(budget > 0.0) {
        return (vec![0.0; gains.len()], 0.0);
    }
    order.sort_by(|&a, &b| (widths[b] * gains[b]).total_cmp(&(widths[a] * gains[a])).then(a.cmp(&b)));
    let (mut sum_w, mut sum_inv) = (0.0, 0.0);
    let mut lambda = 0.0;
    for &k in &order {
        let w = sum_w + widths[k];
        let inv = sum_inv + 1.0 / gains[k];
        let candidate = w / (budget + inv);
        if widths[k] * gains[k] <= candidate {
            break;
        }
        sum_w = w;
        sum_inv = inv;
        lambda = candidate;
    }
    let p = gains
        .iter()
        .zip(widths)
        .map(|(&g, &w)| if g > 0.0 { (w / lambda - 1.0 / g).max(0.0) } else { 0.0 })
        .collect();
    (p, lambda)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompOptions {
    /// Stop when a sweep improves the objective by at most this fraction.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for CompOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_sweeps: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompSolution {
    pub power: CompPower,
    pub rate: f64,
    pub converged: bool,
    pub sweeps: usize,
    /// True when some user has no usable channel on any band.
    pub degenerate: bool,
    /// Objective after every single-user update, starting point first.
    pub trace: Vec<f64>,
}

/// Cyclic coordinate ascent from uniform powers.
///
/// The received covariance of every band is rebuilt at the start of each
/// sweep and updated by rank-one corrections as users change their powers.
/// Each user's interference-plus-noise covariance is formed from it and
/// factored afresh; if rounding ever makes it indefinite, it is rebuilt from
/// scratch.
pub fn comp_allocate(prob: &CompProblem, opts: &CompOptions) -> Result<CompSolution> {
    let (nu, nk) = (prob.n_users, prob.n_bands);
    let mut p = CompPower::uniform(prob);
    let noise_logdet: Vec<f64> = prob.noise_cov.iter().map(hermitian_logdet).collect::<Result<_>>()?;
    let mut rate = comp_sum_capacity(prob, &p)?;
    let mut trace = vec![rate];
    let mut degenerate = false;
    let mut converged = nu == 0;
    let mut sweeps = 0;
    let widths: Vec<f64> = (0..nk).map(|k| prob.band_width(k)).collect();
    // per-band W_k log2 det of the received covariance
    let mut band_rate = vec![0.0; nk];
    let mut gains = vec![0.0; nk];
    let mut own_logdet = vec![0.0; nk];
    while !converged && sweeps < opts.max_sweeps {
        sweeps += 1;
        let start_rate = rate;
        let mut totals: Vec<HermitianMatrix> = (0..nk).map(|k| prob.received_cov(&p, k, None)).collect();
        for (k, m) in totals.iter().enumerate() {
            band_rate[k] = widths[k] * (hermitian_logdet(m)? - noise_logdet[k]);
        }
        for i in 0..nu {
            for k in 0..nk {
                let h = prob.h_vec(i, k);
                let mut sigma = totals[k].clone();
                sigma.add_outer(-p.get(i, k), h);
                let chol = match Cholesky::new(&sigma) {
                    Ok(c) => c,
                    Err(_) => Cholesky::new(&prob.received_cov(&p, k, Some(i)))?,
                };
                gains[k] = chol.quad_inv(h);
                own_logdet[k] = chol.log2_det();
            }
            let (new, _) = user_waterfill(&gains, &widths, prob.budget(i));
            degenerate |= gains.iter().all(|&g| g == 0.0);
            for k in 0..nk {
                let delta = new[k] - p.get(i, k);
                if delta != 0.0 {
                    totals[k].add_outer(delta, prob.h_vec(i, k));
                }
                p.set(i, k, new[k]);
                // det(Σ + p h h†) = det Σ · (1 + p h† Σ⁻¹ h)
                band_rate[k] = widths[k] * (own_logdet[k] + (new[k] * gains[k]).ln_1p() / std::f64::consts::LN_2 - noise_logdet[k]);
            }
            rate = band_rate.iter().sum();
            trace.push(rate);
        }
        converged = rate - start_rate <= opts.tol * rate.abs().max(f64::MIN_POSITIVE);
    }
    let rate = comp_sum_capacity(prob, &p)?;
    Ok(CompSolution {
        power: p,
        rate,
        converged,
        sweeps,
        degenerate,
        trace,
    })
}
