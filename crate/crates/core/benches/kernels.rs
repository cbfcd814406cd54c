use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use tfree_core::density::{census, CensusOptions, Predicate};
use tfree_core::exec::Exec;
use tfree_core::levi::{incidence_matrix, permanent_with, PermanentOptions};
use tfree_core::pg2::Plane;

const PATHS: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn permanent(c: &mut Criterion) {
    let mut group = c.benchmark_group("permanent");
    group.sample_size(10);
    for q in [3u32, 4] {
        let m = incidence_matrix(q).unwrap();
        for (name, exec) in PATHS {
            let opts = PermanentOptions {
                exec,
                ..Default::default()
            };
            group.bench_with_input(BenchmarkId::new(name, q), &m, |b, m| {
                b.iter(|| permanent_with(black_box(m), &opts).unwrap())
            });
        }
    }
    group.finish();
}

fn census_q2(c: &mut Criterion) {
    let plane = Plane::new(2).unwrap();
    let mut group = c.benchmark_group("census_q2");
    group.sample_size(10);
    for (d, text) in [(3u32, "tfree"), (4, "tL(0)")] {
        let pred = Predicate::parse(&plane, text).unwrap();
        for (name, exec) in PATHS {
            let opts = CensusOptions {
                exec,
                ..Default::default()
            };
            group.bench_with_input(BenchmarkId::new(name, format!("d{d}_{text}")), &pred, |b, p| {
                b.iter(|| census(&plane, d, black_box(p), &opts).unwrap().hits)
            });
        }
    }
    group.finish();
}

criterion_group!(benches, permanent, census_q2);
criterion_main!(benches);
