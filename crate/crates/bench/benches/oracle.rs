use criterion::{criterion_group, criterion_main, Criterion};
use padic_tori::cyclomod::classify_minimal_verified;
use padic_tori::oracle::{quotient_group, weil_characters_mod};
use padic_tori::torus::{build_max_torus, TorusParams};

fn quotient(c: &mut Criterion) {
    let t = build_max_torus(&TorusParams::case_b(3, 2, 0), 32).unwrap();
    let mut g = c.benchmark_group("oracle");
    g.sample_size(10);
    g.bench_function("quotient_group_b_3_2_n6", |b| b.iter(|| quotient_group(&t, 6).unwrap()));
    let qg = quotient_group(&t, 6).unwrap();
    g.bench_function("weil_spectrum_b_3_2_n6", |b| b.iter(|| weil_characters_mod(&qg).unwrap()));
    g.bench_function("classify_minimal_f6", |b| b.iter(|| classify_minimal_verified(6, 5_000_000).unwrap()));
    g.finish();
}

criterion_group!(benches, quotient);
criterion_main!(benches);
