use nalgebra::{DMatrix, SymmetricEigen};

use super::kmeans::{kmeans, KMeansOptions};
use super::{check_cluster_count, BsPartition, Point};
use crate::error::{Error, Result};

const EIGEN_TOL: f64 = 1e-10;

/// Ng-Jordan-Weiss spectral clustering with a Gaussian affinity of width
/// `sigma` (meters).
pub fn spectral_cluster(points: &[Point], v: usize, sigma: f64, seed: u64) -> Result<BsPartition> {
    let n = points.len();
    check_cluster_count(v, n)?;
    if !(sigma > 0.0) {
        return Err(Error::domain(format!("spectral sigma must be > 0, got {sigma}")));
    }

    let mut affinity = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = points[i].dist(&points[j]);
            let a = (-d * d / (2.0 * sigma * sigma)).exp();
            affinity[(i, j)] = a;
            affinity[(j, i)] = a;
        }
    }
    // isolated points (all affinities underflow) keep a zero row
    let inv_sqrt_deg: Vec<f64> = (0..n)
        .map(|i| {
            let deg: f64 = affinity.row(i).sum();
            if deg > 0.0 {
                1.0 / deg.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    let normalized = DMatrix::from_fn(n, n, |i, j| inv_sqrt_deg[i] * affinity[(i, j)] * inv_sqrt_deg[j]);

    let eig = SymmetricEigen::try_new(normalized, EIGEN_TOL, 0)
        .ok_or_else(|| Error::domain("symmetric eigensolver did not converge"))?;
    let mut order: Vec<usize> = (0..n).collect();
    // descending eigenvalue, index as tiebreak
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });

    let mut rows = vec![vec![0.0; v]; n];
    for (c, &col) in order.iter().take(v).enumerate() {
        let vec = eig.eigenvectors.column(col);
        let mut pivot = 0;
        for i in 1..n {
            if vec[i].abs() > vec[pivot].abs() {
                pivot = i;
            }
        }
        let sign = if vec[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            rows[i][c] = sign * vec[i];
        }
    }
    for row in &mut rows {
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.iter_mut().for_each(|x| *x /= norm);
        }
    }

    let labels = kmeans(&rows, v, KMeansOptions::default(), seed)?;
    BsPartition::from_labels(&labels)
}
