//! Agglomerative clustering under the minimax linkage.
//!
//! The linkage between two clusters is the minimax radius of their union:
//! the smallest, over members `c` of the union, of the largest distance from
//! `c` to another member. The member attaining it is the prototype.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{check_cluster_count, BsPartition, Point};
use crate::error::{Error, Result};

/// Largest distance from `center` to any point of `points`.
pub fn set_radius(center: &Point, points: &[Point]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::domain("radius of an empty set"));
    }
    Ok(points.iter().map(|p| center.dist(p)).fold(0.0, f64::max))
}

/// Index (into `points`) of the minimax center and the minimax radius.
/// Ties go to the lowest index.
pub fn minimax_radius(points: &[Point]) -> Result<(usize, f64)> {
    if points.is_empty() {
        return Err(Error::domain("minimax radius of an empty set"));
    }
    let mut best = (0, f64::INFINITY);
    for (i, c) in points.iter().enumerate() {
        let r = set_radius(c, points)?;
        if r < best.1 {
            best = (i, r);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    /// Original point index of the merged cluster's minimax center.
    pub prototype: usize,
}

/// Merge tree over `n` leaves. Leaves are ids `0..n`; merge `i` creates id
/// `n + i`. Within a record `left < right`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    pub n_leaves: usize,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    /// One line per merge: `left right height prototype`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for m in &self.merges {
            let _ = writeln!(out, "{} {} {:e} {}", m.left, m.right, m.height, m.prototype);
        }
        out
    }

    pub fn heights(&self) -> Vec<f64> {
        self.merges.iter().map(|m| m.height).collect()
    }
}

struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    fn new(points: &[Point]) -> Self {
        let n = points.len();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = points[i].dist(&points[j]);
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        Self { n, d }
    }

    /// Minimax center and radius of the union of two ascending member lists.
    fn union_radius(&self, a: &[usize], b: &[usize]) -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        for &c in merge_sorted(a, b).iter() {
            let row = &self.d[c * self.n..(c + 1) * self.n];
            let r = a.iter().chain(b).map(|&m| row[m]).fold(0.0, f64::max);
            if r < best.1 {
                best = (c, r);
            }
        }
        best
    }
}

fn merge_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Builds the full minimax-linkage dendrogram.
///
/// Each round merges the pair of active clusters whose union has the
/// smallest minimax radius; ties go to the lexicographically smallest
/// `(id, partner id)`. Linkages are cached and only the new cluster's row is
/// computed after a merge.
pub fn minimax_dendrogram(points: &[Point]) -> Dendrogram {
    let n = points.len();
    let dm = DistanceMatrix::new(points);
    // Active clusters sorted by id; new ids are always the largest.
    let mut active: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i, vec![i])).collect();
    let mut cache: HashMap<(usize, usize), (usize, f64)> = HashMap::new();
    for i in 0..n {
        for j in (i + 1)..n {
            cache.insert((i, j), (i, dm.d[i * n + j]));
        }
    }

    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    while active.len() > 1 {
        let mut best: Option<(usize, usize, usize, f64)> = None;
        for a in 0..active.len() {
            for b in (a + 1)..active.len() {
                let (proto, h) = cache[&(active[a].0, active[b].0)];
                if best.map_or(true, |(_, _, _, bh)| h < bh) {
                    best = Some((a, b, proto, h));
                }
            }
        }
        let (a, b, prototype, height) = best.expect("at least one pair");
        let (right_id, right) = active.remove(b);
        let (left_id, left) = active.remove(a);
        let members = merge_sorted(&left, &right);
        let new_id = n + merges.len();
        merges.push(Merge {
            left: left_id,
            right: right_id,
            height,
            prototype,
        });
        for (gid, g) in &active {
            cache.insert((*gid, new_id), dm.union_radius(g, &members));
        }
        active.push((new_id, members));
    }
    Dendrogram {
        n_leaves: n,
        merges,
    }
}

/// The clustering left after the first `n - v` merges.
pub fn cut(dend: &Dendrogram, v: usize) -> Result<BsPartition> {
    let n = dend.n_leaves;
    check_cluster_count(v, n)?;
    // parent pointers over leaf and internal ids
    let mut parent: Vec<usize> = (0..n + dend.merges.len()).collect();
    for (i, m) in dend.merges.iter().take(n - v).enumerate() {
        parent[m.left] = n + i;
        parent[m.right] = n + i;
    }
    let root = |mut x: usize| {
        while parent[x] != x {
            x = parent[x];
        }
        x
    };
    let raw: Vec<usize> = (0..n).map(root).collect();
    BsPartition::from_labels(&raw)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> Vec<Point> {
        xs.iter().map(|&x| Point::new(x, 0.0)).collect()
    }

    #[test]
    fn radius_definitions() {
        let pts = line(&[0.0, 1.0, 10.0]);
        assert_eq!(set_radius(&Point::new(0.0, 0.0), &[Point::new(0.0, 0.0)]).unwrap(), 0.0);
        assert_eq!(set_radius(&pts[0], &pts).unwrap(), 10.0);
        assert_eq!(set_radius(&pts[1], &pts).unwrap(), 9.0);
        assert!(set_radius(&pts[0], &[]).is_err());
        assert_eq!(minimax_radius(&[Point::new(0.0, 0.0)]).unwrap(), (0, 0.0));
        assert_eq!(minimax_radius(&pts).unwrap(), (1, 9.0));
        assert_eq!(minimax_radius(&line(&[0.0, 1.0])).unwrap(), (0, 1.0));
        assert!(minimax_radius(&[]).is_err());
    }

    #[test]
    fn three_points_on_a_line() {
        let d = minimax_dendrogram(&line(&[0.0, 1.0, 10.0]));
        assert_eq!(
            d.merges,
            vec![
                Merge { left: 0, right: 1, height: 1.0, prototype: 0 },
                Merge { left: 2, right: 3, height: 9.0, prototype: 1 },
            ]
        );
        assert_eq!(cut(&d, 2).unwrap().labels(), &[0, 0, 1]);
        assert_eq!(cut(&d, 3).unwrap(), BsPartition::singletons(3));
        assert_eq!(cut(&d, 1).unwrap().labels(), &[0, 0, 0]);
        assert!(cut(&d, 0).is_err());
        assert!(cut(&d, 4).is_err());
        assert_eq!(d.to_text(), "0 1 1e0 0\n2 3 9e0 1\n");
    }

    #[test]
    fn single_point_has_no_merges() {
        let d = minimax_dendrogram(&[Point::new(3.0, 4.0)]);
        assert!(d.merges.is_empty());
        assert_eq!(cut(&d, 1).unwrap().labels(), &[0]);
    }

    #[test]
    fn tie_breaks_to_smallest_pair() {
        // Square: all four adjacent pairs tie at height 1.
        let pts = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(1.0, 1.0),
        ];
        let d = minimax_dendrogram(&pts);
        assert_eq!((d.merges[0].left, d.merges[0].right), (0, 1));
        assert_eq!((d.merges[1].left, d.merges[1].right), (2, 3));
    }
}
