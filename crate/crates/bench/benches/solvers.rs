use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use vcell::cluster::{minimax_dendrogram, CellMembers};
use vcell::comp::{comp_allocate, hermitian_logdet, CompOptions, CompProblem, HermitianMatrix};
use vcell::ic::{alternating_allocate, continuous_allocate_fast, hungarian_max, ChannelScheme};
use vcell::netgen::{generate_scenario, NetworkScenario, ScenarioConfig};
use vcell::{CellProblem, SolverOptions};

fn scenario() -> NetworkScenario {
    generate_scenario(&ScenarioConfig::default()).unwrap()
}

/// A mid-sized virtual cell: 4 BSs and the users closest to them.
fn members(sc: &NetworkScenario) -> CellMembers {
    let bss = vec![0, 1, 2, 3];
    let users = (0..sc.n_users())
        .filter(|&u| {
            let d = |b: usize| sc.user_pos[u].dist(&sc.bs_pos[b]);
            let nearest = (0..sc.n_bs()).min_by(|&a, &b| d(a).total_cmp(&d(b))).unwrap();
            nearest < 4
        })
        .collect();
    CellMembers { users, bss }
}

fn clustering(c: &mut Criterion) {
    let sc = scenario();
    c.bench_function("minimax_dendrogram/15", |b| b.iter(|| minimax_dendrogram(black_box(&sc.bs_pos))));
}

fn matching(c: &mut Criterion) {
    let w: Vec<Vec<f64>> = (0..100)
        .map(|i| (0..15).map(|j| ((i * 31 + j * 17) % 97) as f64).collect())
        .collect();
    c.bench_function("hungarian/100x15", |b| b.iter(|| hungarian_max(black_box(&w))));
}

fn interference_coordination(c: &mut Criterion) {
    let sc = scenario();
    let cell = CellProblem::from_scenario(&sc, &members(&sc)).unwrap();
    let opts = SolverOptions::monte_carlo();
    let mut group = c.benchmark_group("ic_cell");
    group.sample_size(10);
    group.bench_function("continuous_fast", |b| b.iter(|| continuous_allocate_fast(black_box(&cell), &opts)));
    for scheme in [ChannelScheme::Uc, ChannelScheme::Bsc, ChannelScheme::Msrm] {
        group.bench_function(scheme.label(), |b| b.iter(|| alternating_allocate(black_box(&cell), scheme, &opts)));
    }
    group.finish();
}

fn joint_decoding(c: &mut Criterion) {
    let sc = scenario();
    let prob = CompProblem::from_scenario(&sc, &members(&sc)).unwrap();
    let m = HermitianMatrix::from_lower(15, |i, j| {
        let v = if i == j { 16.0 } else { 1.0 / (1 + i + j) as f64 };
        num_complex::Complex64::new(v, 0.0)
    });
    c.bench_function("hermitian_logdet/15", |b| b.iter(|| hermitian_logdet(black_box(&m))));
    c.bench_function("comp_allocate/cell", |b| b.iter(|| comp_allocate(black_box(&prob), &CompOptions::default())));
}

criterion_group!(benches, clustering, matching, interference_coordination, joint_decoding);
criterion_main!(benches);
