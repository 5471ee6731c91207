use super::{hungarian_max, ChannelAssignment, ChannelScheme, CellProblem, Loads, PowerAllocation};

/// `g[u,b,k] / (σ²[b,k] + J[u,b,k])` where `J` counts every other user's
/// band power. Multiplying by the user's band power gives SINR̄.
fn gain_to_noise(cell: &CellProblem, loads: &Loads, u: usize, b: usize, k: usize) -> f64 {
    cell.gain(u, b, k) / (cell.noise(b, k) + loads.others(cell, u, b, k))
}

fn argmax_first(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

/// Moves each user's band power onto the single BS, among those it already
/// sends to, where the whole power would see the highest SINR.
pub fn consolidate(cell: &CellProblem, p: &PowerAllocation) -> (ChannelAssignment, PowerAllocation) {
    let loads = Loads::of(cell, &p.p);
    let mut gamma = ChannelAssignment::empty(cell);
    let mut out = PowerAllocation::zeros(cell);
    let nk = cell.n_bands();
    for u in 0..cell.n_users() {
        for k in 0..nk {
            let q = loads.q[u * nk + k];
            if !(q > 0.0) {
                continue;
            }
            let mut best = (usize::MAX, f64::NEG_INFINITY);
            for b in (0..cell.n_bs()).filter(|&b| p.get(u, b, k) > 0.0) {
                let s = gain_to_noise(cell, &loads, u, b, k);
                if s > best.1 {
                    best = (b, s);
                }
            }
            gamma.set(u, best.0, k, true);
            out.set(u, best.0, k, q);
        }
    }
    (gamma, out)
}

/// User-centric: every user picks, per band, the BS with the best SINR̄.
pub fn channel_alloc_uc(cell: &CellProblem, p: &PowerAllocation) -> ChannelAssignment {
    let loads = Loads::of(cell, &p.p);
    let mut gamma = ChannelAssignment::empty(cell);
    for u in 0..cell.n_users() {
        for k in 0..cell.n_bands() {
            let b = argmax_first((0..cell.n_bs()).map(|b| gain_to_noise(cell, &loads, u, b, k)));
            gamma.set(u, b, k, true);
        }
    }
    gamma
}

/// BS-centric: every BS picks, per band, the user with the best SINR̄. A
/// user may be picked by several BSs.
pub fn channel_alloc_bsc(cell: &CellProblem, p: &PowerAllocation) -> ChannelAssignment {
    let loads = Loads::of(cell, &p.p);
    let nk = cell.n_bands();
    let mut gamma = ChannelAssignment::empty(cell);
    if cell.n_users() == 0 {
        return gamma;
    }
    for b in 0..cell.n_bs() {
        for k in 0..nk {
            let u = argmax_first(
                (0..cell.n_users()).map(|u| loads.q[u * nk + k] * gain_to_noise(cell, &loads, u, b, k)),
            );
            gamma.set(u, b, k, true);
        }
    }
    gamma
}

/// Per-band maximum-weight matching of users to BSs with weights
/// `W log2(1 + SINR̄)`.
pub fn channel_alloc_msrm(cell: &CellProblem, p: &PowerAllocation) -> ChannelAssignment {
    let loads = Loads::of(cell, &p.p);
    let nk = cell.n_bands();
    let mut gamma = ChannelAssignment::empty(cell);
    for k in 0..nk {
        let w: Vec<Vec<f64>> = (0..cell.n_users())
            .map(|u| {
                (0..cell.n_bs())
                    .map(|b| {
                        let s = loads.q[u * nk + k] * gain_to_noise(cell, &loads, u, b, k);
                        cell.band_width(k) * s.ln_1p() / std::f64::consts::LN_2
                    })
                    .collect()
            })
            .collect();
        for (u, b) in hungarian_max(&w).into_iter().enumerate() {
            if let Some(b) = b {
                gamma.set(u, b, k, true);
            }
        }
    }
    gamma
}

pub fn channel_alloc(scheme: ChannelScheme, cell: &CellProblem, p: &PowerAllocation) -> ChannelAssignment {
    match scheme {
        ChannelScheme::Uc => channel_alloc_uc(cell, p),
        ChannelScheme::Bsc => channel_alloc_bsc(cell, p),
        ChannelScheme::Msrm => channel_alloc_msrm(cell, p),
    }
}
