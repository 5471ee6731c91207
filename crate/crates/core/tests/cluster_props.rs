use proptest::prelude::*;

use vcell::cluster::{cut, kmeans_cluster, minimax_dendrogram, spectral_cluster, CellMembers};
use vcell::oracle::brute_force_dendrogram;
use vcell::Point;

fn points(max: usize) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec((0.0..2000.0f64, 0.0..2000.0f64), 2..=max)
        .prop_map(|v| v.into_iter().map(|(x, y)| Point::new(x, y)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dendrogram_matches_brute_force(pts in points(10)) {
        prop_assert_eq!(minimax_dendrogram(&pts), brute_force_dendrogram(&pts));
    }

    #[test]
    fn merge_heights_never_decrease(pts in points(15)) {
        let h = minimax_dendrogram(&pts).heights();
        prop_assert!(h.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn cuts_are_nested(pts in points(15)) {
        let dend = minimax_dendrogram(&pts);
        let n = pts.len();
        for v in 1..n {
            let fine = cut(&dend, v + 1).unwrap();
            let coarse = cut(&dend, v).unwrap();
            prop_assert_eq!(fine.n_clusters(), v + 1);
            prop_assert_eq!(coarse.n_clusters(), v);
            for i in 0..n {
                for j in 0..n {
                    if fine.label(i) == fine.label(j) {
                        prop_assert_eq!(coarse.label(i), coarse.label(j));
                    }
                }
            }
        }
    }

    #[test]
    fn randomized_methods_give_v_nonempty_clusters(pts in points(15), frac in 0.0..1.0f64, seed: u64) {
        let v = 1 + (frac * (pts.len() - 1) as f64) as usize;
        for part in [kmeans_cluster(&pts, v, seed).unwrap(), spectral_cluster(&pts, v, 2000.0, seed).unwrap()] {
            prop_assert_eq!(part.len(), pts.len());
            prop_assert_eq!(part.n_clusters(), v);
            prop_assert!(part.clusters().iter().all(|c| !c.is_empty()));
        }
    }
}

#[test]
fn cells_cover_everyone_once() {
    use vcell::cluster::affiliate_users;
    use vcell::netgen::generate_scenario;
    use vcell::{AffiliationRule, ScenarioConfig};

    let sc = generate_scenario(&ScenarioConfig::default()).unwrap();
    let dend = minimax_dendrogram(&sc.bs_pos);
    for v in 1..=sc.n_bs() {
        for rule in [AffiliationRule::ClosestBs, AffiliationRule::BestChannel] {
            let layout = affiliate_users(&sc, &cut(&dend, v).unwrap(), rule).unwrap();
            assert!(layout.is_proper());
            let cells: Vec<CellMembers> = layout.cells();
            let mut users: Vec<usize> = cells.iter().flat_map(|c| c.users.clone()).collect();
            let mut bss: Vec<usize> = cells.iter().flat_map(|c| c.bss.clone()).collect();
            users.sort_unstable();
            bss.sort_unstable();
            assert_eq!(users, (0..sc.n_users()).collect::<Vec<_>>());
            assert_eq!(bss, (0..sc.n_bs()).collect::<Vec<_>>());
        }
    }
}

#[test]
fn cut_rejects_bad_counts() {
    let pts = [Point::new(0.0, 0.0), Point::new(1.0, 0.0)];
    let dend = minimax_dendrogram(&pts);
    assert!(cut(&dend, 0).is_err());
    assert!(cut(&dend, 3).is_err());
}
