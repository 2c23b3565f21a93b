use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use healthrec_bench::{bundled, queries, small};
use healthrec_core::{predict, ModelKind, ModelSpec, ValidationMode};

fn training(c: &mut Criterion) {
    let ds = small();
    let mut group = c.benchmark_group("train");
    group.sample_size(10);
    for kind in ModelKind::CLASSIFIERS {
        let spec = ModelSpec::default_for(kind).unwrap();
        group.bench_function(kind.as_str(), |b| {
            b.iter(|| spec.train(black_box(&ds), ValidationMode::Permissive).unwrap())
        });
    }
    group.finish();
}

fn prediction(c: &mut Criterion) {
    let ds = bundled();
    let xs = queries(&ds);
    let mut group = c.benchmark_group("predict");
    for kind in ModelKind::CLASSIFIERS {
        let model = ModelSpec::default_for(kind)
            .unwrap()
            .train(&ds, ValidationMode::Permissive)
            .unwrap();
        group.bench_function(kind.as_str(), |b| {
            b.iter(|| {
                for x in &xs {
                    black_box(predict(&model, x, Some(5)).unwrap());
                }
            })
        });
    }
    group.finish();
}

criterion_group!(benches, training, prediction);
criterion_main!(benches);
