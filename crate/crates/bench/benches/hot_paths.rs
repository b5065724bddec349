use badw_core::group::make_a;
use badw_core::rational::rat;
use badw_core::weights::WeightVector;
use badw_core::{Lattice, Real, SystoleCache, DEFAULT_PRECISION};
use criterion::{criterion_group, criterion_main, Criterion};

fn bench_systole(c: &mut Criterion) {
    let p = DEFAULT_PRECISION;
    let w = WeightVector::new(vec![rat(2, 3), rat(1, 3)]).unwrap();
    let b = Real::from_i64(2, p);
    let x = vec![rat(5, 17), rat(3, 11)];

    c.bench_function("systole cold n=40", |bench| {
        let a = make_a(40, &b, &w).unwrap();
        let l = Lattice::from_structured(&a, &x, p).unwrap();
        bench.iter(|| l.shortest_vector().unwrap())
    });

    c.bench_function("k_eps decision warm n=40", |bench| {
        let a = make_a(40, &b, &w).unwrap();
        let l = Lattice::from_structured(&a, &x, p).unwrap();
        let eps = Real::from_f64(0.25, p);
        let mut cache = SystoleCache::new();
        l.in_k_eps_decision(&eps, &mut cache).unwrap();
        bench.iter(|| l.in_k_eps_decision(&eps, &mut cache).unwrap())
    });
}

criterion_group!(benches, bench_systole);
criterion_main!(benches);
