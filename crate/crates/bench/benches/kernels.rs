use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use loopsampler::analysis::monte_carlo_max_similarity;
use loopsampler::compiler::compile_unitary;
use loopsampler::loop_model::program_unitary;
use loopsampler::matrices::haar_random_unitary;
use loopsampler::sampler::{output_distribution, permanent_ryser};
use loopsampler::{OccupationConfiguration, Strategy};

fn permanents(c: &mut Criterion) {
    let mut group = c.benchmark_group("permanent_ryser");
    group.sample_size(10);
    for k in [10, 12, 14, 16, 18, 20] {
        let m = haar_random_unitary(k, k as u64).unwrap().into_inner();
        group.bench_with_input(BenchmarkId::from_parameter(k), &m, |b, m| {
            b.iter(|| permanent_ryser(black_box(m)))
        });
    }
    group.finish();
}

fn compiler(c: &mut Criterion) {
    let mut group = c.benchmark_group("compile_unitary");
    for n in [4, 8, 16] {
        let u = haar_random_unitary(n, 1).unwrap();
        for strategy in [Strategy::PerRotation, Strategy::Packed] {
            group.bench_with_input(BenchmarkId::new(strategy.to_string(), n), &u, |b, u| {
                b.iter(|| compile_unitary(black_box(u), strategy).unwrap())
            });
        }
        let prog = compile_unitary(&u, Strategy::Packed).unwrap();
        group.bench_with_input(BenchmarkId::new("evaluate-packed", n), &prog, |b, p| {
            b.iter(|| program_unitary(black_box(p)))
        });
    }
    group.finish();
}

fn distributions(c: &mut Criterion) {
    let mut group = c.benchmark_group("output_distribution");
    group.sample_size(10);
    for (n, p) in [(9, 3), (16, 4), (25, 5)] {
        let u = haar_random_unitary(n, 2).unwrap();
        let input = OccupationConfiguration::standard_input(n, p).unwrap();
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("n{n}_p{p}")),
            &(u, input),
            |b, (u, input)| b.iter(|| output_distribution(black_box(u), black_box(input)).unwrap()),
        );
    }
    group.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let mut group = c.benchmark_group("monte_carlo_max_similarity");
    group.sample_size(10);
    for (n, m) in [(4, 8), (7, 8)] {
        group.bench_function(format!("n{n}_m{m}_1000"), |b| {
            b.iter(|| monte_carlo_max_similarity(n, m, 1000, black_box(7)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, permanents, compiler, distributions, monte_carlo);
criterion_main!(benches);
