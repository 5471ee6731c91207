//! Base-station clustering and user affiliation.

mod kmeans;
mod minimax;
mod spectral;

pub use kmeans::{kmeans, kmeans_cluster, KMeansOptions};
pub use minimax::{cut, minimax_dendrogram, minimax_radius, set_radius, Dendrogram, Merge};
pub use spectral::spectral_cluster;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netgen::NetworkScenario;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// A partition of the base stations into `v` nonempty clusters.
///
/// Labels are `0..v`, numbered in order of first appearance by BS index, so
/// two equal partitions always have equal label vectors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BsPartition {
    labels: Vec<usize>,
    v: usize,
}

impl BsPartition {
    /// Builds a partition from arbitrary labels, renumbering canonically.
    pub fn from_labels(raw: &[usize]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::domain("partition of an empty set"));
        }
        let mut map = std::collections::HashMap::new();
        let labels = raw
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect();
        Ok(Self { labels, v: map.len() })
    }

    pub fn singletons(n: usize) -> Self {
        Self {
            labels: (0..n).collect(),
            v: n,
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, bs: usize) -> usize {
        self.labels[bs]
    }

    pub fn n_clusters(&self) -> usize {
        self.v
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Members of each cluster, ascending.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.v];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l].push(i);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AffiliationRule {
    ClosestBs,
    BestChannel,
}

impl AffiliationRule {
    pub fn label(&self) -> &'static str {
        match self {
            AffiliationRule::ClosestBs => "closest BS",
            AffiliationRule::BestChannel => "best channel",
        }
    }

    pub fn key(&self) -> &'static str {
        match self {
            AffiliationRule::ClosestBs => "closest-bs",
            AffiliationRule::BestChannel => "best-channel",
        }
    }
}

impl std::str::FromStr for AffiliationRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closest-bs" => Ok(AffiliationRule::ClosestBs),
            "best-channel" => Ok(AffiliationRule::BestChannel),
            _ => Err(Error::Config(format!("unknown affiliation rule {s:?}"))),
        }
    }
}

/// BS partition plus the virtual cell of every user.
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualCellLayout {
    pub bs_partition: BsPartition,
    pub user_cell: Vec<usize>,
    pub rule: AffiliationRule,
}

/// Users and BSs (global indices, ascending) of one virtual cell.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CellMembers {
    pub users: Vec<usize>,
    pub bss: Vec<usize>,
}

impl VirtualCellLayout {
    pub fn n_cells(&self) -> usize {
        self.bs_partition.n_clusters()
    }

    pub fn cells(&self) -> Vec<CellMembers> {
        let mut cells: Vec<CellMembers> = self
            .bs_partition
            .clusters()
            .into_iter()
            .map(|bss| CellMembers {
                users: Vec::new(),
                bss,
            })
            .collect();
        for (u, &c) in self.user_cell.iter().enumerate() {
            cells[c].users.push(u);
        }
        cells
    }

    /// Every BS and every user sits in exactly one cell.
    pub fn is_proper(&self) -> bool {
        let v = self.n_cells();
        let clusters = self.bs_partition.clusters();
        clusters.iter().all(|c| !c.is_empty())
            && clusters.iter().map(Vec::len).sum::<usize>() == self.bs_partition.len()
            && self.user_cell.iter().all(|&c| c < v)
    }
}

/// Index of the BS each user is affiliated with under `rule`.
/// Ties go to the lowest BS index.
pub fn affiliated_bs(scenario: &NetworkScenario, rule: AffiliationRule) -> Vec<usize> {
    (0..scenario.n_users())
        .map(|u| {
            let score = |b: usize| match rule {
                AffiliationRule::ClosestBs => -scenario.user_pos[u].dist(&scenario.bs_pos[b]),
                AffiliationRule::BestChannel => {
                    (0..scenario.n_bands()).map(|k| scenario.gain(u, b, k)).sum()
                }
            };
            let mut best = 0;
            let mut best_score = score(0);
            for b in 1..scenario.n_bs() {
                let s = score(b);
                if s > best_score {
                    best = b;
                    best_score = s;
                }
            }
            best
        })
        .collect()
}

pub fn affiliate_users(
    scenario: &NetworkScenario,
    part: &BsPartition,
    rule: AffiliationRule,
) -> Result<VirtualCellLayout> {
    if part.len() != scenario.n_bs() {
        return Err(Error::domain(format!(
            "partition covers {} BSs, scenario has {}",
            part.len(),
            scenario.n_bs()
        )));
    }
    let user_cell = affiliated_bs(scenario, rule)
        .into_iter()
        .map(|b| part.label(b))
        .collect();
    Ok(VirtualCellLayout {
        bs_partition: part.clone(),
        user_cell,
        rule,
    })
}

pub(crate) fn check_cluster_count(v: usize, n: usize) -> Result<()> {
    if v == 0 || v > n {
        Err(Error::ClusterCount { v, n })
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgen::{generate_scenario, ScenarioConfig};

    #[test]
    fn partition_labels_are_canonical() {
        let p = BsPartition::from_labels(&[7, 3, 7, 9]).unwrap();
        assert_eq!(p.labels(), &[0, 1, 0, 2]);
        assert_eq!(p.n_clusters(), 3);
        assert_eq!(p.clusters(), vec![vec![0, 2], vec![1], vec![3]]);
    }

    fn tiny_scenario() -> NetworkScenario {
        let cfg = ScenarioConfig {
            n_bs: 2,
            n_users: 3,
            n_bands: 2,
            shadow_std_db: 0.0,
            ..Default::default()
        };
        let mut s = generate_scenario(&cfg).unwrap();
        s.bs_pos = vec![Point::new(0.0, 0.0), Point::new(200.0, 0.0)];
        // 1 m from BS 0; 1 m from BS 1; equidistant.
        s.user_pos = vec![Point::new(1.0, 0.0), Point::new(199.0, 0.0), Point::new(100.0, 5.0)];
        s
    }

    #[test]
    fn single_cluster_takes_every_user() {
        let s = tiny_scenario();
        let part = BsPartition::from_labels(&[0, 0]).unwrap();
        for rule in [AffiliationRule::ClosestBs, AffiliationRule::BestChannel] {
            let layout = affiliate_users(&s, &part, rule).unwrap();
            assert_eq!(layout.user_cell, vec![0, 0, 0]);
            assert!(layout.is_proper());
        }
    }

    #[test]
    fn closest_rule_and_tie_break() {
        let s = tiny_scenario();
        let part = BsPartition::singletons(2);
        let layout = affiliate_users(&s, &part, AffiliationRule::ClosestBs).unwrap();
        assert_eq!(layout.user_cell, vec![0, 1, 0]);
        let cells = layout.cells();
        assert_eq!(cells[0].users, vec![0, 2]);
        assert_eq!(cells[1].bss, vec![1]);
    }

    #[test]
    fn best_channel_uses_total_energy() {
        let mut s = tiny_scenario();
        let nk = s.n_bands();
        let nb = s.n_bs();
        // Make user 0's link to BS 1 much stronger in aggregate.
        for k in 0..nk {
            s.h[(0 * nb + 1) * nk + k] = s.h[(0 * nb + 0) * nk + k] * 10.0;
        }
        let layout =
            affiliate_users(&s, &BsPartition::singletons(2), AffiliationRule::BestChannel).unwrap();
        assert_eq!(layout.user_cell[0], 1);
    }

    #[test]
    fn mismatched_partition_is_rejected() {
        let s = tiny_scenario();
        assert!(affiliate_users(&s, &BsPartition::singletons(3), AffiliationRule::ClosestBs).is_err());
    }
}
