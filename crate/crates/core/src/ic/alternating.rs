use serde::{Deserialize, Serialize};

use super::{
    cell_sum_rate, channel_alloc, consolidate, power_allocate_given_gamma, CellProblem, ChannelAssignment,
    PowerAllocation, SolverOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelScheme {
    Uc,
    Bsc,
    Msrm,
}

impl ChannelScheme {
    pub fn label(self) -> &'static str {
        match self {
            Self::Uc => "UC",
            Self::Bsc => "BSC",
            Self::Msrm => "MSRM",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlternatingResult {
    pub gamma: ChannelAssignment,
    pub power: PowerAllocation,
    pub rate: f64,
    pub iterations: usize,
    /// False when the iteration cap stopped the loop or a power step did not
    /// converge.
    pub converged: bool,
    /// `R(P⁽ⁿ⁾, γ⁽ⁿ⁾)` for `n = 1, 2, ...`.
    pub trace: Vec<f64>,
}

/// Alternates channel allocation and power allocation from uniform powers
/// until the rate gain drops to `delta` times the rate. Returns the best
/// iterate.
pub fn alternating_allocate(cell: &CellProblem, scheme: ChannelScheme, opts: &SolverOptions) -> AlternatingResult {
    let mut p = PowerAllocation::uniform(cell);
    let mut prev_rate = 0.0;
    let mut best: Option<(ChannelAssignment, PowerAllocation, f64)> = None;
    let mut trace = Vec::new();
    let mut all_converged = true;
    let mut stopped = false;
    for _ in 0..opts.alternation_max {
        let gamma = channel_alloc(scheme, cell, &p);
        let sol = power_allocate_given_gamma(cell, &gamma, &p, opts);
        all_converged &= sol.converged;
        let (gamma, power) = match scheme {
            ChannelScheme::Bsc => consolidate(cell, &sol.power),
            _ => (gamma, sol.power),
        };
        let rate = cell_sum_rate(cell, &gamma, &power);
        trace.push(rate);
        if best.as_ref().map_or(true, |b| rate > b.2) {
            best = Some((gamma, power.clone(), rate));
        }
        p = power;
        let gain = rate - prev_rate;
        prev_rate = rate;
        if gain <= opts.delta * rate {
            stopped = true;
            break;
        }
    }
    let (gamma, power, rate) = best.unwrap_or_else(|| (ChannelAssignment::empty(cell), PowerAllocation::zeros(cell), 0.0));
    AlternatingResult {
        gamma,
        power,
        rate,
        iterations: trace.len(),
        converged: stopped && all_converged,
        trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_triple_full_power() {
        let cell = CellProblem::from_gains(1, 1, 1, &[2.0], vec![0.5], vec![20e3], vec![3.0]).unwrap();
        let want = 20e3 * (1.0 + 2.0 * 3.0 / 0.5f64).log2();
        for scheme in [ChannelScheme::Uc, ChannelScheme::Bsc, ChannelScheme::Msrm] {
            let r = alternating_allocate(&cell, scheme, &SolverOptions::default());
            assert!(r.gamma.get(0, 0, 0));
            assert!((r.power.p[0] - 3.0).abs() < 1e-6 * 3.0);
            assert!((r.rate - want).abs() < 1e-6 * want, "{scheme:?} {}", r.rate);
        }
    }

    #[test]
    fn returned_rate_is_best_of_trace() {
        let gains = [1.0, 0.3, 0.2, 0.05, 0.4, 0.8, 1.5, 0.1, 0.6, 0.7, 0.2, 0.9];
        let cell = CellProblem::from_gains(3, 2, 2, &gains, vec![0.05; 4], vec![1.0; 2], vec![1.0; 3]).unwrap();
        for scheme in [ChannelScheme::Uc, ChannelScheme::Bsc, ChannelScheme::Msrm] {
            let r = alternating_allocate(&cell, scheme, &SolverOptions::default());
            let max = r.trace.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(r.rate, max);
            assert!(r.gamma.single_bs_per_user_band());
            assert!(r.power.is_feasible(&cell, 1e-9));
        }
    }
}
