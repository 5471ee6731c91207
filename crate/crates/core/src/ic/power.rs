//! Power control by successive high-SINR approximation.
//!
//! Each refresh replaces `log2(1 + SINR)` with `α log2(SINR) + β`, which is
//! concave in log-powers. The stationarity condition of the approximated
//! problem gives the update `P = W α / (λ ln 2 + T)`, where `T` is the
//! interference price the stream imposes on everyone else. Two ways of
//! handling the budget multiplier are offered: dual gradient ascent on `λ`
//! and a per-sweep solve that makes the budget bind exactly.
//!
//! Only streams with `α > 0` take part in a solve. Optimal allocations are
//! very sparse (roughly one user per BS and band survives), so streams whose
//! power falls to `p_prune` at a refresh are frozen at zero and dropped from
//! the working set.

use std::f64::consts::LN_2;

use super::{
    alpha_beta, continuous_rate, Alpha0Policy, CellProblem, ChannelAssignment, Loads,
    PowerAllocation, SolverOptions,
};

#[derive(Debug, Clone, PartialEq)]
pub struct PowerSolution {
    pub power: PowerAllocation,
    /// Continuous objective (every stream decoded separately) at `power`.
    pub rate: f64,
    pub converged: bool,
    pub refreshes: usize,
    pub sweeps: usize,
    /// Largest relative stationarity residual over live streams, for the
    /// approximation in force when `power` was produced.
    pub stationarity: f64,
    /// Largest `|Σ P_u - P̄_u| / P̄_u` over users with `λ_u > 0`.
    pub slackness: f64,
    /// Objective after each refresh; entry 0 is the starting point.
    pub trace: Vec<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Multiplier {
    Dual,
    Fast,
}

/// The streams of one approximation step, grouped by user.
struct WorkingSet {
    /// Stream indices, ascending.
    idx: Vec<usize>,
    /// `user_start[u]..user_start[u + 1]` indexes user `u`'s streams.
    user_start: Vec<usize>,
    /// `α W_k` per stream.
    weight: Vec<f64>,
    /// `1 / P̄_u` per stream.
    scale: Vec<f64>,
    /// `(u, b, k)` per stream.
    coords: Vec<(usize, usize, usize)>,
}

impl WorkingSet {
    fn new(cell: &CellProblem, alpha: &[f64]) -> Self {
        let (nb, nk) = (cell.n_bs(), cell.n_bands());
        let mut ws = Self {
            idx: Vec::new(),
            user_start: vec![0],
            weight: Vec::new(),
            scale: Vec::new(),
            coords: Vec::new(),
        };
        for u in 0..cell.n_users() {
            for i in u * nb * nk..(u + 1) * nb * nk {
                if alpha[i] > 0.0 {
                    let (b, k) = ((i / nk) % nb, i % nk);
                    ws.idx.push(i);
                    ws.weight.push(alpha[i] * cell.band_width(k));
                    ws.scale.push(1.0 / cell.budget(u));
                    ws.coords.push((u, b, k));
                }
            }
            ws.user_start.push(ws.idx.len());
        }
        ws
    }

    fn users(&self) -> impl Iterator<Item = (usize, std::ops::Range<usize>)> + '_ {
        self.user_start.windows(2).enumerate().map(|(u, w)| (u, w[0]..w[1]))
    }
}

/// Interference prices over a working set.
///
/// `T = Σ_b' g[u,b',k] C[b',k] - g[u,b,k] c` with `c = α W / (σ² + I)` and
/// `C[b,k]` the sum of `c` over streams received at `b` on `k`.
struct Prices {
    q: Vec<f64>,
    rx: Vec<f64>,
    c: Vec<f64>,
    c_sum: Vec<f64>,
    t: Vec<f64>,
}

impl Prices {
    fn new(cell: &CellProblem, n: usize) -> Self {
        Self {
            q: vec![0.0; cell.n_users() * cell.n_bands()],
            rx: vec![0.0; cell.n_bs() * cell.n_bands()],
            c: vec![0.0; n],
            c_sum: vec![0.0; cell.n_bs() * cell.n_bands()],
            t: vec![0.0; n],
        }
    }

    fn update(&mut self, cell: &CellProblem, ws: &WorkingSet, x: &[f64]) {
        let (nb, nk) = (cell.n_bs(), cell.n_bands());
        let g = cell.gains();
        self.q.iter_mut().for_each(|v| *v = 0.0);
        for (j, &(u, _, k)) in ws.coords.iter().enumerate() {
            self.q[u * nk + k] += x[j];
        }
        self.rx.iter_mut().for_each(|v| *v = 0.0);
        for u in 0..cell.n_users() {
            for k in 0..nk {
                let q = self.q[u * nk + k];
                if q > 0.0 {
                    for b in 0..nb {
                        self.rx[b * nk + k] += g[cell.idx(u, b, k)] * q;
                    }
                }
            }
        }
        self.c_sum.iter_mut().for_each(|v| *v = 0.0);
        for (j, (&i, &(_, b, k))) in ws.idx.iter().zip(&ws.coords).enumerate() {
            let interference = (self.rx[b * nk + k] - g[i] * x[j]).max(0.0);
            self.c[j] = ws.weight[j] / (cell.noise(b, k) + interference);
            self.c_sum[b * nk + k] += self.c[j];
        }
        // q now doubles as Σ_b' g[u,b',k] C[b',k] for the (u, k) in use
        for u in 0..cell.n_users() {
            for k in 0..nk {
                let slot = u * nk + k;
                if self.q[slot] > 0.0 {
                    self.q[slot] = (0..nb).map(|b| g[cell.idx(u, b, k)] * self.c_sum[b * nk + k]).sum();
                }
            }
        }
        for (j, (&i, &(u, _, k))) in ws.idx.iter().zip(&ws.coords).enumerate() {
            self.t[j] = (self.q[u * nk + k] - g[i] * self.c[j]).max(0.0);
        }
    }
}

/// Smallest `λ ≥ 0` with `S(λ) = Σ a_j / (λ ln 2 + t_j) ≤ budget`. `S` is
/// strictly decreasing, and `S(λ_hi) ≤ budget` at `λ_hi = Σ a / (budget ln 2)`
/// because every `t_j ≥ 0`. Newton runs on `1 / S`, which is exactly linear
/// for a single term, starting from `guess`.
fn binding_multiplier(a: &[f64], t: &[f64], budget: f64, guess: f64) -> f64 {
    let sum_a: f64 = a.iter().sum();
    if sum_a == 0.0 {
        return 0.0;
    }
    let eval = |lam: f64| -> (f64, f64) {
        let mut s = 0.0;
        let mut ds = 0.0;
        for (&aj, &tj) in a.iter().zip(t) {
            let d = lam * LN_2 + tj;
            s += aj / d;
            ds -= aj * LN_2 / (d * d);
        }
        (s, ds)
    };
    if t.iter().all(|&tj| tj > 0.0) && eval(0.0).0 <= budget {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, sum_a / (budget * LN_2));
    let mut lam = if guess > 0.0 && guess < hi { guess } else { hi };
    for _ in 0..100 {
        let (s, ds) = eval(lam);
        if (s - budget).abs() <= 1e-12 * budget {
            return lam;
        }
        if s > budget {
            lo = lam;
        } else {
            hi = lam;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
        // φ = 1/S - 1/budget is increasing; φ' = -S'/S²
        let phi = 1.0 / s - 1.0 / budget;
        let step = lam - phi * s * s / -ds;
        lam = if step > lo && step < hi { step } else { 0.5 * (lo + hi) };
    }
    hi
}

const ANDERSON_DEPTH: usize = 5;

/// Anderson mixing over the last few iterates, in powers scaled by each
/// user's budget. Only the extrapolated input is mixed; every returned point
/// is an image of the update map, so budgets always hold.
struct Anderson {
    scale: Vec<f64>,
    last_x: Vec<f64>,
    last_r: Vec<f64>,
    // differences of consecutive iterates and residuals, oldest first
    dx: std::collections::VecDeque<Vec<f64>>,
    dr: std::collections::VecDeque<Vec<f64>>,
    gram: std::collections::VecDeque<Vec<f64>>,
    primed: bool,
}

impl Anderson {
    fn new(scale: Vec<f64>) -> Self {
        let n = scale.len();
        Self {
            scale,
            last_x: vec![0.0; n],
            last_r: vec![0.0; n],
            dx: Default::default(),
            dr: Default::default(),
            gram: Default::default(),
            primed: false,
        }
    }

    fn reset(&mut self) {
        self.dx.clear();
        self.dr.clear();
        self.gram.clear();
        self.primed = false;
    }

    /// Records `x -> fx` and writes the next input into `out`. Returns false
    /// when there is no history to mix yet.
    fn next(&mut self, x: &[f64], fx: &[f64], out: &mut [f64]) -> bool {
        let n = x.len();
        if self.primed {
            let (mut dx, mut dr) = if self.dx.len() == ANDERSON_DEPTH {
                self.gram.pop_front();
                for row in self.gram.iter_mut() {
                    row.remove(0);
                }
                (self.dx.pop_front().unwrap(), self.dr.pop_front().unwrap())
            } else {
                (vec![0.0; n], vec![0.0; n])
            };
            for i in 0..n {
                let xs = x[i] * self.scale[i];
                let r = (fx[i] - x[i]) * self.scale[i];
                dx[i] = xs - self.last_x[i];
                dr[i] = r - self.last_r[i];
                self.last_x[i] = xs;
                self.last_r[i] = r;
            }
            let dots: Vec<f64> = self
                .dr
                .iter()
                .map(|col| col.iter().zip(&dr).map(|(a, b)| a * b).sum())
                .collect();
            let own: f64 = dr.iter().map(|v| v * v).sum();
            for (row, &d) in self.gram.iter_mut().zip(&dots) {
                row.push(d);
            }
            let mut new_row = dots;
            new_row.push(own);
            self.gram.push_back(new_row);
            self.dx.push_back(dx);
            self.dr.push_back(dr);
        } else {
            for i in 0..n {
                self.last_x[i] = x[i] * self.scale[i];
                self.last_r[i] = (fx[i] - x[i]) * self.scale[i];
            }
            self.primed = true;
        }
        let m = self.dr.len();
        if m == 0 {
            return false;
        }
        let mut gram = nalgebra::DMatrix::<f64>::zeros(m, m);
        let mut diag_max: f64 = 0.0;
        for a in 0..m {
            for b in 0..m {
                gram[(a, b)] = self.gram[a][b];
            }
            diag_max = diag_max.max(gram[(a, a)]);
        }
        for a in 0..m {
            gram[(a, a)] += 1e-12 * diag_max.max(f64::MIN_POSITIVE);
        }
        let rhs = nalgebra::DVector::from_iterator(
            m,
            self.dr.iter().map(|col| col.iter().zip(&self.last_r).map(|(a, b)| a * b).sum::<f64>()),
        );
        let Some(coef) = gram.lu().solve(&rhs) else {
            return false;
        };
        for i in 0..n {
            let mut v = self.last_x[i] + self.last_r[i];
            for j in 0..m {
                v -= coef[j] * (self.dx[j][i] + self.dr[j][i]);
            }
            out[i] = v / self.scale[i];
        }
        out.iter().all(|v| v.is_finite())
    }
}

struct Inner {
    sweeps: usize,
    converged: bool,
}

/// One application of the update map with `λ` chosen per user so the budget
/// binds (or `λ = 0` if the unconstrained update already fits). Returns the
/// largest power change relative to the user's budget.
#[allow(clippy::too_many_arguments)]
fn fast_map(
    cell: &CellProblem,
    ws: &WorkingSet,
    x: &[f64],
    next: &mut [f64],
    lambda: &mut [f64],
    prices: &mut Prices,
    opts: &SolverOptions,
) -> f64 {
    prices.update(cell, ws, x);
    let mut change: f64 = 0.0;
    for (u, r) in ws.users() {
        if r.is_empty() {
            continue;
        }
        let budget = cell.budget(u);
        lambda[u] = binding_multiplier(&ws.weight[r.clone()], &prices.t[r.clone()], budget, lambda[u]);
        let floor = opts.p_floor * budget;
        for j in r {
            next[j] = (ws.weight[j] / (lambda[u] * LN_2 + prices.t[j])).max(floor);
            change = change.max((next[j] - x[j]).abs() / budget);
        }
    }
    change
}

/// Budget-binding fixed point, accelerated with Anderson mixing.
fn sweep_fast(
    cell: &CellProblem,
    ws: &WorkingSet,
    x: &mut Vec<f64>,
    lambda: &mut [f64],
    opts: &SolverOptions,
) -> Inner {
    let n = x.len();
    let mut prices = Prices::new(cell, n);
    let mut fx = vec![0.0; n];
    let mut mixed = vec![0.0; n];
    let mut accel = Anderson::new(ws.scale.clone());
    let mut best_change = f64::INFINITY;
    for s in 1..=opts.s_max {
        let change = fast_map(cell, ws, x, &mut fx, lambda, &mut prices, opts);
        if change <= opts.tol_fixed {
            x.copy_from_slice(&fx);
            return Inner { sweeps: s, converged: true };
        }
        if change > 4.0 * best_change {
            accel.reset();
        }
        best_change = best_change.min(change);
        if accel.next(x, &fx, &mut mixed) {
            for (j, v) in mixed.iter_mut().enumerate() {
                *v = v.max(opts.p_floor / ws.scale[j]);
            }
            std::mem::swap(x, &mut mixed);
        } else {
            x.copy_from_slice(&fx);
        }
    }
    x.copy_from_slice(&fx);
    Inner {
        sweeps: opts.s_max,
        converged: false,
    }
}

/// Projected gradient ascent on `λ`; the fixed point is iterated to
/// convergence at every fixed `λ`. The step grows while the budget residual
/// keeps its sign and halves when it flips.
fn sweep_dual(
    cell: &CellProblem,
    ws: &WorkingSet,
    x: &mut [f64],
    lambda: &mut [f64],
    step: &mut [f64],
    opts: &SolverOptions,
) -> Inner {
    let mut prices = Prices::new(cell, x.len());
    let mut last_sign = vec![0i8; cell.n_users()];
    let mut sweeps = 0;
    for _ in 0..opts.n_max {
        let mut settled = false;
        for _ in 0..opts.s_max {
            sweeps += 1;
            prices.update(cell, ws, x);
            let mut change: f64 = 0.0;
            for (u, r) in ws.users() {
                let budget = cell.budget(u);
                let floor = opts.p_floor * budget;
                for j in r {
                    let d = lambda[u] * LN_2 + prices.t[j];
                    let new = if d > 0.0 { (ws.weight[j] / d).clamp(floor, budget) } else { budget };
                    change = change.max((new - x[j]).abs() / budget);
                    x[j] = new;
                }
            }
            if change <= opts.tol_fixed {
                settled = true;
                break;
            }
        }
        let mut done = settled;
        for (u, r) in ws.users() {
            if r.is_empty() {
                continue;
            }
            let budget = cell.budget(u);
            let residual = x[r].iter().sum::<f64>() - budget;
            let ok = if lambda[u] > 0.0 {
                residual.abs() <= opts.tol_dual * budget
            } else {
                residual <= opts.tol_dual * budget
            };
            done &= ok;
            if ok {
                continue;
            }
            let sign = if residual > 0.0 { 1 } else { -1 };
            if last_sign[u] != 0 && sign != last_sign[u] {
                step[u] *= 0.5;
            } else if last_sign[u] == sign {
                step[u] *= 1.25;
            }
            last_sign[u] = sign;
            lambda[u] = (lambda[u] + step[u] * residual).max(0.0);
        }
        if done {
            return Inner { sweeps, converged: true };
        }
    }
    Inner {
        sweeps,
        converged: false,
    }
}

/// Stationarity and complementary-slackness residuals of the approximated
/// problem at `x`.
fn residuals(cell: &CellProblem, ws: &WorkingSet, x: &[f64], lambda: &[f64], opts: &SolverOptions) -> (f64, f64) {
    let mut prices = Prices::new(cell, x.len());
    prices.update(cell, ws, x);
    let mut stat: f64 = 0.0;
    let mut slack: f64 = 0.0;
    for (u, r) in ws.users() {
        let budget = cell.budget(u);
        for j in r.clone() {
            // streams pinned at the floor sit on an active bound
            if x[j] > opts.p_floor * budget * (1.0 + 1e-9) {
                let wa = ws.weight[j];
                stat = stat.max((x[j] * (lambda[u] * LN_2 + prices.t[j]) - wa).abs() / wa);
            }
        }
        if lambda[u] > 0.0 && !r.is_empty() {
            slack = slack.max((x[r].iter().sum::<f64>() - budget).abs() / budget);
        }
    }
    (stat, slack)
}

/// `α(SINR)` at `p` for the streams in `keep`; streams at or below the prune
/// level get `α = 0` and are zeroed in `p`.
fn refresh(cell: &CellProblem, p: &mut [f64], keep: &[bool], opts: &SolverOptions) -> Vec<f64> {
    let per_user = cell.n_bs() * cell.n_bands();
    for (i, v) in p.iter_mut().enumerate() {
        if !keep[i] || *v <= opts.p_prune * cell.budget(i / per_user) {
            *v = 0.0;
        }
    }
    let loads = Loads::of(cell, p);
    let mut alpha = vec![0.0; p.len()];
    for u in 0..cell.n_users() {
        for b in 0..cell.n_bs() {
            for k in 0..cell.n_bands() {
                let i = cell.idx(u, b, k);
                if p[i] > 0.0 {
                    let z = cell.gains()[i] * p[i] / (cell.noise(b, k) + loads.stream(cell, p, u, b, k));
                    alpha[i] = alpha_beta(z).0;
                }
            }
        }
    }
    alpha
}

/// Scales users that overshoot their budget back onto it. The dual variant
/// only meets budgets to `tol_dual` and the power floor can add a few ulps,
/// so returned allocations are always projected.
fn fit_budgets(cell: &CellProblem, p: &mut [f64]) {
    let per_user = cell.n_bs() * cell.n_bands();
    for (u, chunk) in p.chunks_mut(per_user).enumerate() {
        let total: f64 = chunk.iter().sum();
        let budget = cell.budget(u);
        if total > budget {
            let s = budget / total;
            chunk.iter_mut().for_each(|v| *v *= s);
        }
    }
}

fn solve(
    cell: &CellProblem,
    keep: &[bool],
    mut alpha: Vec<f64>,
    start: PowerAllocation,
    opts: &SolverOptions,
    mode: Multiplier,
) -> PowerSolution {
    let nu = cell.n_users();
    let start_rate = continuous_rate(cell, &start);
    let mut best = PowerSolution {
        power: start.clone(),
        rate: start_rate,
        converged: false,
        refreshes: 0,
        sweeps: 0,
        stationarity: f64::INFINITY,
        slackness: f64::INFINITY,
        trace: vec![start_rate],
    };
    if nu == 0 || !alpha.iter().any(|&a| a > 0.0) {
        best.converged = true;
        best.stationarity = 0.0;
        best.slackness = 0.0;
        return best;
    }

    let user_weight = |ws: &WorkingSet, u: usize| -> f64 { ws.weight[ws.user_start[u]..ws.user_start[u + 1]].iter().sum() };
    let mut lambda = vec![0.0; nu];
    let mut step = vec![0.0; nu];
    {
        let ws = WorkingSet::new(cell, &alpha);
        for u in 0..nu {
            // λ where Σ α W / (λ ln 2) meets the budget: feasible since T ≥ 0
            lambda[u] = user_weight(&ws, u) / (cell.budget(u) * LN_2);
            step[u] = 0.5 * lambda[u] / cell.budget(u);
        }
    }

    let mut p = start.p;
    let mut prev = start_rate;
    let mut trace = vec![start_rate];
    let mut sweeps = 0;
    let mut converged = false;
    let mut refreshes = 0;
    for m in 1..=opts.m_max {
        refreshes = m;
        let ws = WorkingSet::new(cell, &alpha);
        let mut x: Vec<f64> = ws.idx.iter().map(|&i| p[i]).collect();
        let inner = match mode {
            Multiplier::Fast => sweep_fast(cell, &ws, &mut x, &mut lambda, opts),
            Multiplier::Dual => {
                for u in 0..nu {
                    if step[u] <= 0.0 {
                        step[u] = 0.5 * user_weight(&ws, u) / (cell.budget(u) * cell.budget(u) * LN_2);
                    }
                }
                sweep_dual(cell, &ws, &mut x, &mut lambda, &mut step, opts)
            }
        };
        sweeps += inner.sweeps;
        p.iter_mut().for_each(|v| *v = 0.0);
        for (j, &i) in ws.idx.iter().enumerate() {
            p[i] = x[j];
        }
        fit_budgets(cell, &mut p);
        let candidate = PowerAllocation {
            p: p.clone(),
            ..PowerAllocation::zeros(cell)
        };
        let rate = continuous_rate(cell, &candidate);
        trace.push(rate);
        let first = best.stationarity.is_infinite() && rate >= best.rate * (1.0 - 1e-12);
        if rate >= best.rate || first {
            let (stat, slack) = residuals(cell, &ws, &x, &lambda, opts);
            best.power = candidate;
            best.rate = rate;
            best.stationarity = stat;
            best.slackness = slack;
        }
        let stalled = (rate - prev).abs() <= opts.tol_outer * rate.abs().max(f64::MIN_POSITIVE);
        if stalled && inner.converged {
            converged = true;
            break;
        }
        prev = rate;
        alpha = refresh(cell, &mut p, keep, opts);
    }
    best.converged = converged;
    best.refreshes = refreshes;
    best.sweeps = sweeps;
    best.trace = trace;
    best
}

/// Continuous relaxation solved with dual gradient ascent on the budget
/// multipliers. Slow; kept as a reference for the fast variant.
pub fn continuous_allocate_dual(cell: &CellProblem, opts: &SolverOptions) -> PowerSolution {
    let keep = vec![true; cell.len()];
    solve(cell, &keep, vec![1.0; cell.len()], PowerAllocation::uniform(cell), opts, Multiplier::Dual)
}

/// Continuous relaxation solved with the budget-binding fixed point.
pub fn continuous_allocate_fast(cell: &CellProblem, opts: &SolverOptions) -> PowerSolution {
    let keep = vec![true; cell.len()];
    solve(cell, &keep, vec![1.0; cell.len()], PowerAllocation::uniform(cell), opts, Multiplier::Fast)
}

/// Fast solver restricted to the streams selected by `gamma`. The start
/// point moves each user's band power from `start` onto the selected BSs.
pub fn power_allocate_given_gamma(
    cell: &CellProblem,
    gamma: &ChannelAssignment,
    start: &PowerAllocation,
    opts: &SolverOptions,
) -> PowerSolution {
    let mut p0 = PowerAllocation::zeros(cell);
    for u in 0..cell.n_users() {
        for k in 0..cell.n_bands() {
            let targets: Vec<usize> = (0..cell.n_bs()).filter(|&b| gamma.get(u, b, k)).collect();
            if targets.is_empty() {
                continue;
            }
            let share = start.band_power(u, k) / targets.len() as f64;
            for b in targets {
                p0.set(u, b, k, share);
            }
        }
    }
    let alpha = match opts.alpha0 {
        Alpha0Policy::Gamma => gamma.gamma.iter().map(|&g| if g { 1.0 } else { 0.0 }).collect(),
        Alpha0Policy::TightSinrBar => {
            let mut seed = p0.p.clone();
            let mut alpha = refresh(cell, &mut seed, &gamma.gamma, opts);
            // streams that start without power would be frozen by α(0) = 0
            for (i, a) in alpha.iter_mut().enumerate() {
                if gamma.gamma[i] && seed[i] == 0.0 {
                    *a = 1.0;
                }
            }
            alpha
        }
    };
    solve(cell, &gamma.gamma, alpha, p0, opts, Multiplier::Fast)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(gain: f64, noise: f64, budget: f64) -> CellProblem {
        CellProblem::from_gains(1, 1, 1, &[gain], vec![noise], vec![20e3], vec![budget]).unwrap()
    }

    #[test]
    fn multiplier_binds_budget() {
        let a = [1.0, 2.0, 0.5];
        let t = [0.0, 0.3, 4.0];
        let lam = binding_multiplier(&a, &t, 2.0, 0.0);
        let total: f64 = a.iter().zip(&t).map(|(a, t)| a / (lam * LN_2 + t)).sum();
        assert!((total - 2.0).abs() < 1e-12);
        // unconstrained update already fits
        assert_eq!(binding_multiplier(&[1.0], &[10.0], 1.0, 0.3), 0.0);
        assert_eq!(binding_multiplier(&[], &[], 1.0, 0.0), 0.0);
        let warm = binding_multiplier(&a, &t, 2.0, lam * 1.3);
        assert!((warm - lam).abs() <= 1e-10 * lam);
    }

    #[test]
    fn single_link_full_power() {
        let cell = single(3.0, 0.5, 2.0);
        let want = 20e3 * (1.0 + 3.0 * 2.0 / 0.5f64).log2();
        for sol in [
            continuous_allocate_fast(&cell, &SolverOptions::default()),
            continuous_allocate_dual(&cell, &SolverOptions::default()),
        ] {
            assert!((sol.power.p[0] - 2.0).abs() < 1e-6 * 2.0, "{:?}", sol.power.p);
            assert!((sol.rate - want).abs() < 1e-6 * want);
            assert!(sol.power.is_feasible(&cell, 1e-9));
        }
    }

    #[test]
    fn zero_gamma_gives_zero_power() {
        let cell = CellProblem::from_gains(2, 2, 1, &[1.0, 0.1, 0.2, 1.0], vec![1.0; 2], vec![1.0], vec![1.0; 2]).unwrap();
        let gamma = ChannelAssignment::empty(&cell);
        let sol = power_allocate_given_gamma(&cell, &gamma, &PowerAllocation::uniform(&cell), &SolverOptions::default());
        assert!(sol.power.p.iter().all(|&x| x == 0.0));
        assert_eq!(sol.rate, 0.0);
    }

    #[test]
    fn fast_solver_meets_stopping_contract() {
        let gains = [1.0, 0.2, 0.3, 0.05, 0.1, 2.0, 0.4, 0.9];
        let cell = CellProblem::from_gains(2, 2, 2, &gains, vec![0.1; 4], vec![1.0, 2.0], vec![1.0, 3.0]).unwrap();
        let sol = continuous_allocate_fast(&cell, &SolverOptions::default());
        assert!(sol.converged);
        assert!(sol.stationarity <= 1e-6, "{}", sol.stationarity);
        assert!(sol.slackness <= 1e-6, "{}", sol.slackness);
        assert!(sol.power.is_feasible(&cell, 1e-9));
    }

    #[test]
    fn empty_cell() {
        let cell = CellProblem::from_gains(0, 2, 3, &[], vec![1.0; 6], vec![1.0; 3], vec![]).unwrap();
        let sol = continuous_allocate_fast(&cell, &SolverOptions::default());
        assert_eq!(sol.rate, 0.0);
        assert!(sol.converged);
    }
}
