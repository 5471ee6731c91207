//! Brute-force references. Slow and simple on purpose; the tests and the
//! `oracle` CLI command compare the fast solvers against them.

use num_complex::Complex64;

use crate::cluster::{minimax_radius, Dendrogram, Merge, Point};
use crate::comp::CompProblem;
use crate::error::{Error, Result};
use crate::ic::CellProblem;

/// Maximum-weight matching by enumerating every partial injection of rows
/// into columns (rows may stay unmatched at zero weight).
pub fn brute_force_matching(weights: &[Vec<f64>]) -> (Vec<Option<usize>>, f64) {
    fn go(
        w: &[Vec<f64>],
        row: usize,
        used: &mut Vec<bool>,
        cur: &mut Vec<Option<usize>>,
        acc: f64,
        best: &mut (Vec<Option<usize>>, f64),
    ) {
        if row == w.len() {
            if acc > best.1 {
                *best = (cur.clone(), acc);
            }
            return;
        }
        cur[row] = None;
        go(w, row + 1, used, cur, acc, best);
        for c in 0..w[row].len() {
            if !used[c] {
                used[c] = true;
                cur[row] = Some(c);
                go(w, row + 1, used, cur, acc + w[row][c], best);
                used[c] = false;
            }
        }
        cur[row] = None;
    }
    let cols = weights.iter().map(Vec::len).max().unwrap_or(0);
    let mut best = (vec![None; weights.len()], 0.0);
    go(weights, 0, &mut vec![false; cols], &mut vec![None; weights.len()], 0.0, &mut best);
    best
}

/// Total weight of a matching.
pub fn matching_weight(weights: &[Vec<f64>], m: &[Option<usize>]) -> f64 {
    m.iter().enumerate().filter_map(|(i, c)| c.map(|c| weights[i][c])).sum()
}

/// Minimax-linkage dendrogram that recomputes the radius of every candidate
/// union from the raw points in every round. Same tie rules as the fast
/// version: lowest `(id, partner id)` pair, lowest-index prototype.
pub fn brute_force_dendrogram(points: &[Point]) -> Dendrogram {
    let n = points.len();
    let mut active: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i, vec![i])).collect();
    let mut merges = Vec::new();
    while active.len() > 1 {
        let mut best: Option<(usize, usize, usize, f64)> = None;
        for a in 0..active.len() {
            for b in (a + 1)..active.len() {
                let mut members: Vec<usize> = active[a].1.iter().chain(&active[b].1).copied().collect();
                members.sort_unstable();
                let pts: Vec<Point> = members.iter().map(|&i| points[i]).collect();
                let (c, r) = minimax_radius(&pts).expect("nonempty union");
                if best.map_or(true, |(_, _, _, h)| r < h) {
                    best = Some((a, b, members[c], r));
                }
            }
        }
        let (a, b, prototype, height) = best.expect("at least one pair");
        let (right_id, right) = active.remove(b);
        let (left_id, mut left) = active.remove(a);
        left.extend(right);
        left.sort_unstable();
        merges.push(Merge {
            left: left_id,
            right: right_id,
            height,
            prototype,
        });
        active.push((n + merges.len() - 1, left));
    }
    Dendrogram { n_leaves: n, merges }
}

/// `Σ_k W_k log2(1 + g_k p_k)`.
pub fn single_user_rate(gains: &[f64], widths: &[f64], p: &[f64]) -> f64 {
    gains.iter().zip(widths).zip(p).map(|((g, w), p)| w * (g * p).ln_1p()).sum::<f64>() / std::f64::consts::LN_2
}

/// Best split of `budget` over three bands on a grid of `steps` points per
/// side of the simplex. The whole budget is always spent, which is optimal
/// since the rate increases in every power.
pub fn grid_waterfill3(gains: &[f64; 3], widths: &[f64; 3], budget: f64, steps: usize) -> ([f64; 3], f64) {
    let mut best = ([0.0; 3], f64::NEG_INFINITY);
    for i in 0..=steps {
        for j in 0..=(steps - i) {
            let p = [
                budget * i as f64 / steps as f64,
                budget * j as f64 / steps as f64,
                budget * (steps - i - j) as f64 / steps as f64,
            ];
            let r = single_user_rate(gains, widths, &p);
            if r > best.1 {
                best = (p, r);
            }
        }
    }
    best
}

/// Optimum of the channel-assigned problem on a 2-user cell with one or two
/// bands, searched over band powers on a grid of `steps` points per user
/// budget (sum over bands at most the budget).
///
/// Given the band powers, each user-band pair is served by whichever BS
/// gives it the best rate, which is optimal because a user's choice of BS
/// does not change what the other user sees.
pub fn grid_ic_optimum(cell: &CellProblem, steps: usize) -> Result<f64> {
    if cell.n_users() != 2 || !(1..=2).contains(&cell.n_bands()) {
        return Err(Error::domain("grid oracle covers 2 users and 1 or 2 bands"));
    }
    let n = steps + 1;
    let q = |u: usize, i: usize| cell.budget(u) * i as f64 / steps as f64;
    // table[k][i * n + j]: band-k rate with user 0 at q(0, i), user 1 at q(1, j)
    let table: Vec<Vec<f64>> = (0..cell.n_bands())
        .map(|k| {
            let mut t = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    let qs = [q(0, i), q(1, j)];
                    let mut r = 0.0;
                    for u in 0..2 {
                        let best = (0..cell.n_bs())
                            .map(|b| {
                                let s = cell.gain(u, b, k) * qs[u] / (cell.noise(b, k) + cell.gain(1 - u, b, k) * qs[1 - u]);
                                s.ln_1p()
                            })
                            .fold(0.0, f64::max);
                        r += cell.band_width(k) * best;
                    }
                    t[i * n + j] = r / std::f64::consts::LN_2;
                }
            }
            t
        })
        .collect();
    if cell.n_bands() == 1 {
        return Ok(table[0].iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    }
    // prefix max of band 1 over [0, i] × [0, j]
    let mut pm = table[1].clone();
    for i in 0..n {
        for j in 0..n {
            let mut m = pm[i * n + j];
            if i > 0 {
                m = m.max(pm[(i - 1) * n + j]);
            }
            if j > 0 {
                m = m.max(pm[i * n + j - 1]);
            }
            pm[i * n + j] = m;
        }
    }
    let mut best = f64::NEG_INFINITY;
    for i in 0..n {
        for j in 0..n {
            best = best.max(table[0][i * n + j] + pm[(steps - i) * n + (steps - j)]);
        }
    }
    Ok(best)
}

/// Square complex matrix, row-major rows.
pub type DenseMatrix = Vec<Vec<Complex64>>;

/// Determinant by cofactor expansion along the first row.
pub fn cofactor_det(m: &DenseMatrix) -> Complex64 {
    let n = m.len();
    match n {
        0 => Complex64::new(1.0, 0.0),
        1 => m[0][0],
        _ => (0..n)
            .map(|j| {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                m[0][j] * sign * cofactor_det(&minor(m, 0, j))
            })
            .sum(),
    }
}

fn minor(m: &DenseMatrix, row: usize, col: usize) -> DenseMatrix {
    m.iter()
        .enumerate()
        .filter(|&(i, _)| i != row)
        .map(|(_, r)| r.iter().enumerate().filter(|&(j, _)| j != col).map(|(_, &z)| z).collect())
        .collect()
}

/// Inverse as adjugate over determinant.
pub fn explicit_inverse(m: &DenseMatrix) -> Result<DenseMatrix> {
    let n = m.len();
    let det = cofactor_det(m);
    if det.norm() == 0.0 {
        return Err(Error::domain("singular matrix"));
    }
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                    cofactor_det(&minor(m, j, i)) * sign / det
                })
                .collect()
        })
        .collect())
}

/// `h† M⁻¹ h` through the explicit inverse.
pub fn explicit_quad_inv(h: &[Complex64], m: &DenseMatrix) -> Result<f64> {
    let inv = explicit_inverse(m)?;
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..h.len() {
        for j in 0..h.len() {
            s += h[i].conj() * inv[i][j] * h[j];
        }
    }
    Ok(s.re)
}

/// Joint-decoding sum capacity evaluated with cofactor determinants.
pub fn direct_comp_capacity(prob: &CompProblem, p: &[f64]) -> f64 {
    let nb = prob.n_bs();
    let mut total = 0.0;
    for k in 0..prob.n_bands() {
        let noise: DenseMatrix = (0..nb).map(|i| (0..nb).map(|j| prob.noise_cov(k).get(i, j)).collect()).collect();
        let mut cov = noise.clone();
        for u in 0..prob.n_users() {
            let h = prob.h_vec(u, k);
            let w = p[u * prob.n_bands() + k];
            for i in 0..nb {
                for j in 0..nb {
                    cov[i][j] += h[i] * h[j].conj() * w;
                }
            }
        }
        total += prob.band_width(k) * (cofactor_det(&cov).re / cofactor_det(&noise).re).log2();
    }
    total
}

/// Best joint-decoding rate of a 2-user, 2-band cell over a grid of
/// `steps + 1` budget splits per user. Full budgets are optimal because the
/// capacity never decreases in any power.
pub fn grid_comp_optimum(prob: &CompProblem, steps: usize) -> Result<(Vec<f64>, f64)> {
    if prob.n_users() != 2 || prob.n_bands() != 2 {
        return Err(Error::domain("grid oracle covers 2 users and 2 bands"));
    }
    let mut best = (vec![0.0; 4], f64::NEG_INFINITY);
    for i in 0..=steps {
        for j in 0..=steps {
            let (a, b) = (i as f64 / steps as f64, j as f64 / steps as f64);
            let p = vec![
                a * prob.budget(0),
                (1.0 - a) * prob.budget(0),
                b * prob.budget(1),
                (1.0 - b) * prob.budget(1),
            ];
            let r = direct_comp_capacity(prob, &p);
            if r > best.1 {
                best = (p, r);
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn matching_counts_unmatched_rows() {
        let (m, w) = brute_force_matching(&[vec![-1.0, 2.0], vec![-2.0, 3.0]]);
        assert_eq!((m, w), (vec![None, Some(1)], 3.0));
        let (m, w) = brute_force_matching(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert_eq!((m, w), (vec![Some(1), Some(0)], 4.0));
    }

    #[test]
    fn determinant_by_hand() {
        let m = vec![vec![c(2.0, 0.0), c(0.0, 1.0)], vec![c(0.0, -1.0), c(2.0, 0.0)]];
        assert_eq!(cofactor_det(&m), c(3.0, 0.0));
        let m3 = vec![
            vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0), c(4.0, 0.0)],
            vec![c(5.0, 0.0), c(6.0, 0.0), c(0.0, 0.0)],
        ];
        assert_eq!(cofactor_det(&m3), c(1.0, 0.0));
        let inv = explicit_inverse(&m3).unwrap();
        assert_eq!(inv[0][0], c(-24.0, 0.0));
        assert_eq!(inv[2][1], c(4.0, 0.0));
    }

    #[test]
    fn waterfill_grid_puts_everything_on_a_lone_good_band() {
        let (p, _) = grid_waterfill3(&[1.0, 1e-9, 1e-9], &[1.0; 3], 1.0, 100);
        assert_eq!(p, [1.0, 0.0, 0.0]);
    }

    #[test]
    fn ic_grid_single_link() {
        // user 1 has no channel, so user 0 transmits at full power alone
        let cell = CellProblem::from_gains(2, 1, 1, &[2.0, 0.0], vec![0.5], vec![1.0], vec![3.0, 3.0]).unwrap();
        let want = (1.0f64 + 12.0).log2();
        assert!((grid_ic_optimum(&cell, 10).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn dendrogram_on_a_line() {
        let pts: Vec<Point> = [0.0, 1.0, 3.0, 10.0].iter().map(|&x| Point::new(x, 0.0)).collect();
        let d = brute_force_dendrogram(&pts);
        assert_eq!(d.heights(), vec![1.0, 2.0, 7.0]);
        assert_eq!((d.merges[1].left, d.merges[1].right), (2, 4));
    }
}
