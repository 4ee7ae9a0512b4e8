use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mebk::simlab::ScenarioId;
use mebk::{bayes_adaptive_bandwidths, ucv_select, CubatureSpec, UcvSettings};
use mebk_bench::{default_prior, fixture};

fn bayes(c: &mut Criterion) {
    let mut group = c.benchmark_group("bayes_adaptive");
    for (id, n) in [(ScenarioId::B, 100), (ScenarioId::B, 500), (ScenarioId::E, 500), (ScenarioId::I, 200)] {
        let s = fixture(id, n);
        let prior = default_prior(&s);
        group.bench_with_input(BenchmarkId::new(id.to_string(), n), &s, |b, s| {
            b.iter(|| bayes_adaptive_bandwidths(s, &prior).unwrap())
        });
    }
    group.finish();
}

fn ucv(c: &mut Criterion) {
    let mut group = c.benchmark_group("ucv_select");
    group.sample_size(10);
    for n in [50, 200] {
        let s = fixture(ScenarioId::B, n);
        let spec = CubatureSpec::default_for(1);
        let settings = UcvSettings::default();
        group.bench_with_input(BenchmarkId::new("B", n), &s, |b, s| b.iter(|| ucv_select(s, &spec, &settings).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, bayes, ucv);
criterion_main!(benches);
