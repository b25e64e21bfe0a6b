use criterion::{black_box, criterion_group, criterion_main, Criterion};

use stoqwalk::dits::DitString;
use stoqwalk::expansion::{self, SubsetSupport};
use stoqwalk::graph;
use stoqwalk::oracle::{self, Method};

fn walk_and_search(c: &mut Criterion) {
    let ring = stoqwalk_bench::frustrated_ring(12);
    let start = DitString::zeros(12);

    c.bench_function("neighbors/ring12", |b| {
        b.iter(|| graph::neighbors(black_box(&start), &ring).unwrap())
    });

    c.bench_function("bt_walk/ring12/256steps", |b| {
        let mut seed = 0u64;
        b.iter(|| {
            seed += 1;
            graph::bt_walk(black_box(&start), &ring, 256, seed).unwrap()
        })
    });

    c.bench_function("bfs_to_bad/ring12", |b| {
        b.iter(|| {
            graph::bfs_to_bad(black_box(&start), &ring, 16, graph::DEFAULT_FRONTIER_CAP)
                .unwrap()
        })
    });
}

fn expansion_ops(c: &mut Criterion) {
    let ring = stoqwalk_bench::frustrated_ring(10);
    let start = DitString::zeros(10);
    let singleton = SubsetSupport::singleton(start.clone());

    c.bench_function("find_frustrated_layer/ring10", |b| {
        b.iter(|| expansion::find_frustrated_layer(black_box(&singleton), &ring, 0.03).unwrap())
    });

    c.bench_function("layers_to_bad/ring10", |b| {
        b.iter(|| expansion::layers_to_bad(black_box(&start), &ring, 0.03, 32).unwrap())
    });
}

fn oracle_solvers(c: &mut Criterion) {
    let chain8 = stoqwalk_bench::bell_chain(8);
    c.bench_function("ground_energy/dense/chain8", |b| {
        b.iter(|| oracle::ground_energy(black_box(&chain8), Method::Dense).unwrap())
    });

    let chain12 = stoqwalk_bench::bell_chain(12);
    c.bench_function("ground_energy/lanczos/chain12", |b| {
        b.iter(|| oracle::ground_energy(black_box(&chain12), Method::Iterative).unwrap())
    });
}

criterion_group!(benches, walk_and_search, expansion_ops, oracle_solvers);
criterion_main!(benches);
