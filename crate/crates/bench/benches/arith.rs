use criterion::{black_box, criterion_group, criterion_main, Criterion};
use padic_tori::admissible::is_admissible;
use padic_tori::padic::{FieldElement, LocalField};
use padic_tori::torus::{build_max_torus, TorusParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn field_ops(c: &mut Criterion) {
    let k = LocalField::qp(5, 20).unwrap();
    let e = k.unramified_ext(2).unwrap().eisenstein_ext(2, None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x = FieldElement::one(&e).add(&FieldElement::random(&e, &mut rng, 1, e.capacity()));
    let y = FieldElement::random(&e, &mut rng, 0, e.capacity());

    let mut g = c.benchmark_group("field");
    g.bench_function("mul", |b| b.iter(|| black_box(&x).mul(black_box(&y))));
    g.bench_function("norm", |b| b.iter(|| black_box(&y).norm(&k).unwrap()));
    g.bench_function("hensel_sqrt", |b| b.iter(|| black_box(&x).hensel_sqrt().unwrap()));
    g.bench_function("log", |b| b.iter(|| black_box(&x).log().unwrap()));
    g.finish();
}

fn admissibility(c: &mut Criterion) {
    let tb = build_max_torus(&TorusParams::case_b(7, 3, 0), 48).unwrap();
    let ta = build_max_torus(&TorusParams::case_a(5, 3), 48).unwrap();
    let mut g = c.benchmark_group("admissible");
    g.bench_function("case_b_all_subsets", |b| {
        b.iter(|| {
            for mask in 0u32..16 {
                let ds: Vec<u64> = [1u64, 2, 3, 6].iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &d)| d).collect();
                black_box(is_admissible(&tb.subtorus(&ds).unwrap()).unwrap());
            }
        })
    });
    g.bench_function("case_a_s2", |b| b.iter(|| is_admissible(&ta.subtorus(&[2]).unwrap()).unwrap()));
    g.finish();
}

criterion_group!(benches, field_ops, admissibility);
criterion_main!(benches);
