use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use celab::harness::{gen_corpus_with, lookup, verify_with, VerifyOptions};

fn verify_modes(c: &mut Criterion) {
    let mut group = c.benchmark_group("verify");
    group.sample_size(10);
    for id in ["eqce_to_e0", "e0_to_e3", "emed_to_e0", "e1_to_e0"] {
        let red = lookup(id).unwrap();
        let corpus = gen_corpus_with(&red.source, red.shape, 1, 50).unwrap();
        for parallel in [false, true] {
            let opts = VerifyOptions {
                parallel,
                ..VerifyOptions::default()
            };
            let mode = if parallel { "parallel" } else { "sequential" };
            group.bench_with_input(BenchmarkId::new(mode, id), &corpus, |b, corpus| {
                b.iter(|| verify_with(&red, black_box(corpus), &opts).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, verify_modes);
criterion_main!(benches);
