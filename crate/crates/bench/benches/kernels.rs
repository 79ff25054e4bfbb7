use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use imbench_core::benchmark::{expand_grid, MethodId};
use imbench_core::metrics::{partial_roc_auc, pr_auc, roc_auc};
use imbench_core::neighbors::NeighborIndex;
use imbench_core::report::{aggregate_ranks, friedman_statistic, RankPolicy, RankTable};
use imbench_core::undersampling::tomek_link_pairs;
use imbench_core::{Class, LabeledDataset, ScoredPredictions};

fn dataset(n_maj: usize, n_min: usize, dim: usize) -> LabeledDataset {
    let mut r = ChaCha8Rng::seed_from_u64(1);
    let mut row = |shift: f64| -> Vec<f64> { (0..dim).map(|_| r.random::<f64>() + shift).collect() };
    let maj: Vec<Vec<f64>> = (0..n_maj).map(|_| row(0.0)).collect();
    let min: Vec<Vec<f64>> = (0..n_min).map(|_| row(0.5)).collect();
    LabeledDataset::from_classes(&maj, &min).unwrap()
}

fn neighbors(c: &mut Criterion) {
    let mut g = c.benchmark_group("knn_all_points");
    for dim in [2, 8] {
        let d = dataset(2000, 100, dim);
        let index = NeighborIndex::build(d.features().to_vec(), dim).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(dim), &index, |b, index| {
            b.iter(|| (0..index.len()).map(|i| index.knn_of(i, 5).unwrap().len()).sum::<usize>())
        });
    }
    g.finish();
}

fn resamplers(c: &mut Criterion) {
    let d = dataset(2000, 100, 4);
    let mut g = c.benchmark_group("resample_2100x4");
    g.sample_size(10);
    for m in MethodId::ALL {
        let cfg = expand_grid(m).swap_remove(0);
        g.bench_function(m.id(), |b| b.iter(|| cfg.resample(&d, 7).map(|r| r.dataset.n_samples())));
    }
    g.finish();
    c.bench_function("tomek_pairs_2100x4", |b| b.iter(|| tomek_link_pairs(&d).unwrap().len()));
}

fn metrics(c: &mut Criterion) {
    let mut r = ChaCha8Rng::seed_from_u64(2);
    let n = 100_000;
    let labels: Vec<Class> = (0..n).map(|_| Class::from_bool(r.random_bool(0.05))).collect();
    let scores: Vec<f64> = labels
        .iter()
        .map(|l| r.random::<f64>() + if l.is_minority() { 0.3 } else { 0.0 })
        .collect();
    let sp = ScoredPredictions::new(scores, labels).unwrap();
    c.bench_function("roc_auc_100k", |b| b.iter(|| roc_auc(&sp).unwrap()));
    c.bench_function("pr_auc_100k", |b| b.iter(|| pr_auc(&sp).unwrap()));
    c.bench_function("partial_roc_auc_100k", |b| b.iter(|| partial_roc_auc(&sp, 0.05).unwrap()));
}

fn ranking(c: &mut Criterion) {
    let mut r = ChaCha8Rng::seed_from_u64(3);
    let scores: Vec<Vec<Option<f64>>> = (0..200)
        .map(|_| (0..17).map(|_| r.random_bool(0.9).then(|| r.random::<f64>())).collect())
        .collect();
    c.bench_function("rank_200x17", |b| {
        b.iter(|| {
            let t = RankTable::from_scores(
                (0..200).map(|i| i.to_string()).collect(),
                (0..17).map(|j| j.to_string()).collect(),
                &scores,
                true,
                RankPolicy::default(),
            );
            (aggregate_ranks(&t).len(), friedman_statistic(&t).map(|f| f.statistic).ok())
        })
    });
}

criterion_group!(benches, neighbors, resamplers, metrics, ranking);
criterion_main!(benches);
