use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion, Throughput};
use wpid_core::evaluation::ts_sweep;
use wpid_core::pipeline::{prepare_acc_features, run, run_with_features};
use wpid_core::{PipelineParams, Stage};

fn pipeline(c: &mut Criterion) {
    let s = wpid_bench::two_person();
    let params = PipelineParams::default();
    let mut group = c.benchmark_group("pipeline");
    group.throughput(Throughput::Elements(s.frames.len() as u64));
    group.bench_function("two_person_full", |b| b.iter(|| run(black_box(&s.frames), &s.sensors, &params)));

    let acc = prepare_acc_features(&s.frames, &s.sensors, &params.filter).unwrap();
    group.bench_function("two_person_matching_only", |b| {
        b.iter(|| run_with_features(black_box(&s.frames), &acc, &params))
    });
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let s = wpid_bench::three_person();
    let params = PipelineParams::default();
    let ts = [0.33, 1.0, 2.0, 3.0, 4.0];
    c.bench_function("three_person_sweep", |b| {
        b.iter(|| ts_sweep(&s.frames, &s.sensors, &s.truth, &params, black_box(&ts), &Stage::ALL))
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = pipeline, sweep
}
criterion_main!(benches);
