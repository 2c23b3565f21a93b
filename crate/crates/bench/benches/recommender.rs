use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use healthrec_bench::{bundled, queries};
use healthrec_core::clustering::kmeans_fit_vectors;
use healthrec_core::recommender::{
    collaborative_recommend, content_based_recommend, disease_profiles, ProfileStore,
};
use healthrec_core::{SimilarityMetric, UserProfile};

fn store() -> ProfileStore {
    let ds = bundled();
    let profiles = ds
        .samples()
        .iter()
        .enumerate()
        .map(|(i, (x, y))| {
            UserProfile::new(format!("u{i}"), x.clone(), Some(ds.class_names()[*y].clone()), Default::default())
                .unwrap()
        })
        .collect();
    ProfileStore::new(profiles).unwrap()
}

fn filtering(c: &mut Criterion) {
    let ds = bundled();
    let xs = queries(&ds);
    let flat = store();
    let clustered = store().with_cohorts(10, 0).unwrap();
    let profiles = disease_profiles(&ds);
    let mut group = c.benchmark_group("recommend");
    group.bench_function("collaborative", |b| {
        b.iter(|| {
            for x in &xs {
                black_box(collaborative_recommend(x, &flat, SimilarityMetric::Cosine, 5).unwrap());
            }
        })
    });
    group.bench_function("collaborative_cohorts", |b| {
        b.iter(|| {
            for x in &xs {
                black_box(collaborative_recommend(x, &clustered, SimilarityMetric::Cosine, 5).unwrap());
            }
        })
    });
    group.bench_function("content_based", |b| {
        b.iter(|| {
            for x in &xs {
                black_box(content_based_recommend(x, &profiles, SimilarityMetric::Jaccard, 5).unwrap());
            }
        })
    });
    group.finish();
}

fn clustering(c: &mut Criterion) {
    let vectors: Vec<_> = bundled().samples().iter().map(|(x, _)| x.clone()).collect();
    let mut group = c.benchmark_group("kmeans");
    group.sample_size(10);
    group.bench_function("k10", |b| b.iter(|| kmeans_fit_vectors(black_box(&vectors), 10, 100, 0).unwrap()));
    group.finish();
}

criterion_group!(benches, filtering, clustering);
criterion_main!(benches);
