use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_cluster_count, BsPartition, Point};
use crate::error::Result;

#[derive(Debug, Clone, Copy)]
pub struct KMeansOptions {
    pub restarts: usize,
    pub max_iter: usize,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_iter: 300,
        }
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(row: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(row, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus_seeds(data: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = data.len();
    let mut centroids = vec![data[rng.random_range(0..n)].clone()];
    let mut d2: Vec<f64> = data.iter().map(|r| sq_dist(r, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 && target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            // guard against landing on a zero-weight tail through rounding
            if d2[chosen] == 0.0 {
                chosen = d2.iter().rposition(|&w| w > 0.0).unwrap_or(chosen);
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let c = data[pick].clone();
        for (i, r) in data.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(r, &c));
        }
        centroids.push(c);
    }
    centroids
}

fn lloyd(data: &[Vec<f64>], mut centroids: Vec<Vec<f64>>, max_iter: usize) -> (Vec<usize>, f64) {
    let n = data.len();
    let k = centroids.len();
    let dim = data[0].len();
    let mut labels = vec![usize::MAX; n];
    for _ in 0..max_iter {
        let mut changed = false;
        for (i, row) in data.iter().enumerate() {
            let (c, _) = nearest(row, &centroids);
            if labels[i] != c {
                labels[i] = c;
                changed = true;
            }
        }
        changed |= repair_empty(data, &mut labels, &centroids, k);
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (row, &l) in data.iter().zip(&labels) {
            counts[l] += 1;
            for (s, x) in sums[l].iter_mut().zip(row) {
                *s += x;
            }
        }
        for c in 0..k {
            for s in &mut sums[c] {
                *s /= counts[c] as f64;
            }
        }
        centroids = sums;
        if !changed {
            break;
        }
    }
    let inertia = data
        .iter()
        .zip(&labels)
        .map(|(r, &l)| sq_dist(r, &centroids[l]))
        .sum();
    (labels, inertia)
}

/// Moves the point farthest from its centroid (taken from a cluster with more
/// than one member) into each empty cluster.
fn repair_empty(data: &[Vec<f64>], labels: &mut [usize], centroids: &[Vec<f64>], k: usize) -> bool {
    let mut moved = false;
    loop {
        let mut counts = vec![0usize; k];
        for &l in labels.iter() {
            counts[l] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return moved;
        };
        let mut far = None;
        let mut far_d = -1.0;
        for (i, row) in data.iter().enumerate() {
            if counts[labels[i]] > 1 {
                let d = sq_dist(row, &centroids[labels[i]]);
                if d > far_d {
                    far_d = d;
                    far = Some(i);
                }
            }
        }
        match far {
            Some(i) => {
                labels[i] = empty;
                moved = true;
            }
            None => return moved,
        }
    }
}

/// Lloyd's algorithm with k-means++ seeding; the restart with the lowest
/// inertia wins. Returns per-row labels in `0..k`.
pub fn kmeans(data: &[Vec<f64>], k: usize, opts: KMeansOptions, seed: u64) -> Result<Vec<usize>> {
    check_cluster_count(k, data.len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(Vec<usize>, f64)> = None;
    for _ in 0..opts.restarts.max(1) {
        let seeds = plus_plus_seeds(data, k, &mut rng);
        let (labels, inertia) = lloyd(data, seeds, opts.max_iter.max(1));
        if best.as_ref().map_or(true, |(_, b)| inertia < *b) {
            best = Some((labels, inertia));
        }
    }
    Ok(best.expect("at least one restart").0)
}

pub fn kmeans_cluster(points: &[Point], v: usize, seed: u64) -> Result<BsPartition> {
    let data: Vec<Vec<f64>> = points.iter().map(|p| vec![p.x, p.y]).collect();
    let labels = kmeans(&data, v, KMeansOptions::default(), seed)?;
    BsPartition::from_labels(&labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_groups() -> Vec<Point> {
        vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(1000.0, 1000.0),
            Point::new(1001.0, 1000.0),
            Point::new(1000.0, 1001.0),
        ]
    }

    #[test]
    fn separates_far_groups() {
        let p = kmeans_cluster(&two_groups(), 2, 3).unwrap();
        assert_eq!(p.labels(), &[0, 0, 0, 1, 1, 1]);
    }

    #[test]
    fn v_equal_n_gives_singletons() {
        let pts = two_groups();
        for seed in 0..5 {
            assert_eq!(kmeans_cluster(&pts, 6, seed).unwrap(), BsPartition::singletons(6));
        }
    }

    #[test]
    fn duplicates_still_fill_every_cluster() {
        let pts = vec![Point::new(5.0, 5.0); 4];
        let p = kmeans_cluster(&pts, 4, 1).unwrap();
        assert_eq!(p.n_clusters(), 4);
    }

    #[test]
    fn deterministic_for_seed() {
        let pts: Vec<Point> = (0..12)
            .map(|i| Point::new((i * 37 % 11) as f64, (i * 53 % 7) as f64))
            .collect();
        assert_eq!(kmeans_cluster(&pts, 4, 42).unwrap(), kmeans_cluster(&pts, 4, 42).unwrap());
        assert!(kmeans_cluster(&pts, 0, 1).is_err());
        assert!(kmeans_cluster(&pts, 13, 1).is_err());
    }
}
