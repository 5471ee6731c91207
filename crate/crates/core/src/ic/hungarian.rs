/// Maximum-weight one-to-one matching between rows and columns.
///
/// Rows may stay unmatched at zero weight, exactly as if the matrix were
/// padded to a square with zero-weight dummies; such rows come back as
/// `None`. Internally the smaller side is matched against the larger side
/// plus one dummy per row, using shortest augmenting paths with potentials in
/// O(r²(r + c)) for `r ≤ c`.
pub fn hungarian_max(weights: &[Vec<f64>]) -> Vec<Option<usize>> {
    let rows = weights.len();
    let cols = weights.iter().map(Vec::len).max().unwrap_or(0);
    if rows == 0 || cols == 0 {
        return vec![None; rows];
    }
    let at = |i: usize, j: usize| weights[i].get(j).copied().unwrap_or(0.0);
    if rows <= cols {
        let owner = min_cost_rows(rows, cols + rows, |i, j| if j < cols { -at(i, j) } else { 0.0 });
        let mut out = vec![None; rows];
        for (j, o) in owner.into_iter().enumerate().take(cols) {
            if let Some(i) = o {
                out[i] = Some(j);
            }
        }
        out
    } else {
        let owner = min_cost_rows(cols, rows + cols, |j, i| if i < rows { -at(i, j) } else { 0.0 });
        let mut out = vec![None; rows];
        for (i, o) in owner.into_iter().enumerate().take(rows) {
            if let Some(j) = o {
                out[i] = Some(j);
            }
        }
        out
    }
}

/// Assigns each of `n` rows a distinct column out of `m ≥ n`, minimizing the
/// total cost. Returns the owning row of every column.
fn min_cost_rows(n: usize, m: usize, cost: impl Fn(usize, usize) -> f64) -> Vec<Option<usize>> {
    // 1-based, with a virtual column 0 holding the row being inserted
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    let mut minv = vec![0.0; m + 1];
    let mut used = vec![false; m + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        minv.iter_mut().for_each(|x| *x = f64::INFINITY);
        used.iter_mut().for_each(|x| *x = false);
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    owner[1..].iter().map(|&i| (i > 0).then(|| i - 1)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn total(w: &[Vec<f64>], m: &[Option<usize>]) -> f64 {
        m.iter()
            .enumerate()
            .filter_map(|(i, c)| c.map(|c| w[i][c]))
            .sum()
    }

    #[test]
    fn two_by_two() {
        let w = vec![vec![1.0, 2.0], vec![2.0, 1.0]];
        let m = hungarian_max(&w);
        assert_eq!(m, vec![Some(1), Some(0)]);
        assert_eq!(total(&w, &m), 4.0);
    }

    #[test]
    fn diagonal_dominant_is_identity() {
        let w: Vec<Vec<f64>> = (0..5)
            .map(|i| (0..5).map(|j| if i == j { 10.0 } else { (i + j) as f64 * 0.1 }).collect())
            .collect();
        assert_eq!(hungarian_max(&w), (0..5).map(Some).collect::<Vec<_>>());
    }

    #[test]
    fn rectangular_both_ways() {
        let wide = vec![vec![1.0, 5.0, 3.0]];
        assert_eq!(hungarian_max(&wide), vec![Some(1)]);
        let tall = vec![vec![1.0], vec![4.0], vec![2.0]];
        assert_eq!(hungarian_max(&tall), vec![None, Some(0), None]);
        assert!(hungarian_max(&[]).is_empty());
        assert_eq!(hungarian_max(&[vec![], vec![]]), vec![None, None]);
    }

    #[test]
    fn negative_weights_prefer_the_dummy() {
        let w = vec![vec![-1.0, 2.0], vec![-2.0, 3.0]];
        let m = hungarian_max(&w);
        assert_eq!(m, vec![None, Some(1)]);
        assert_eq!(total(&w, &m), 3.0);
    }
}
