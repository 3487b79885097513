use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use toxgate_bench::synthetic_corpus;
use toxgate_core::preprocess::preprocess;
use toxgate_core::{
    svm, train_all, PreprocessConfig, SparseVector, SvmConfig, TfIdfModel, TfIdfOptions, TrainConfig,
    TreeConfig, TreeModel,
};

fn features(n: usize) -> (Vec<SparseVector>, Vec<bool>, TfIdfModel, Vec<Vec<String>>) {
    let corpus = synthetic_corpus(n, 1);
    let cfg = PreprocessConfig::default();
    let docs: Vec<Vec<String>> = corpus.texts().map(|t| preprocess(t, &cfg)).collect();
    let model = TfIdfModel::fit_corpus(&docs, TfIdfOptions::default()).unwrap();
    let xs = docs.iter().map(|d| model.transform(d)).collect();
    let ys = corpus.records.iter().map(|r| r.labels.0[0]).collect();
    (xs, ys, model, docs)
}

fn bench_preprocess(c: &mut Criterion) {
    let corpus = synthetic_corpus(1_000, 2);
    let cfg = PreprocessConfig::default();
    c.bench_function("preprocess_1k_comments", |b| {
        b.iter(|| {
            for t in corpus.texts() {
                black_box(preprocess(t, &cfg));
            }
        })
    });
}

fn bench_tfidf(c: &mut Criterion) {
    let (_, _, model, docs) = features(2_000);
    c.bench_function("tfidf_transform_2k_docs", |b| {
        b.iter(|| {
            for d in &docs {
                black_box(model.transform(d));
            }
        })
    });
}

fn bench_classifiers(c: &mut Criterion) {
    let (xs, ys, _, _) = features(2_000);
    c.bench_function("svm_train_2k_x100_epochs", |b| {
        b.iter(|| svm::train(black_box(&xs), &ys, &SvmConfig::default()).unwrap())
    });
    c.bench_function("tree_train_2k", |b| {
        b.iter(|| TreeModel::train(black_box(&xs), &ys, &TreeConfig::default()).unwrap())
    });
}

fn bench_multihead(c: &mut Criterion) {
    let corpus = synthetic_corpus(1_000, 3);
    let mut group = c.benchmark_group("multihead");
    group.sample_size(10);
    group.bench_function("train_all_1k", |b| {
        b.iter(|| train_all(&corpus, &TrainConfig::default(), PreprocessConfig::default()).unwrap())
    });
    let model = train_all(&corpus, &TrainConfig::default(), PreprocessConfig::default()).unwrap();
    group.bench_function("predict_row", |b| {
        b.iter(|| model.predict_row(black_box("you are a stupid idiot and I hate this article")))
    });
    group.finish();
}

criterion_group!(benches, bench_preprocess, bench_tfidf, bench_classifiers, bench_multihead);
criterion_main!(benches);
