use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use manifold_ess::mmd::ReferenceSample;
use manifold_ess::rng::stream_rng;
use manifold_ess::samplers::{iid_chain, rwmh_sphere, ChainRunConfig, Target, VmfParams};
use manifold_ess::{gram, kernel_ess, mmd2_empirical, Chain, KernelSpec, UnitVector, WindowSpec};

fn target() -> Target {
    VmfParams::new(UnitVector::basis(3, 2).unwrap(), 12.0).unwrap().into()
}

fn chain(n: usize) -> Chain {
    rwmh_sphere(&ChainRunConfig::random_walk(target(), 35.0, n, 500, 0)).unwrap().chain
}

fn bench_gram(c: &mut Criterion) {
    let spec = KernelSpec::sphere_poisson(0.75).unwrap();
    let mut g = c.benchmark_group("gram");
    for n in [500, 1000, 2000] {
        let x = chain(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &x, |b, x| b.iter(|| gram(&spec, x).unwrap()));
    }
    g.finish();
}

fn bench_kernel_ess(c: &mut Criterion) {
    let spec = KernelSpec::sphere_poisson(0.75).unwrap();
    let w = WindowSpec::bartlett_auto();
    let mut g = c.benchmark_group("kernel_ess");
    g.sample_size(10);
    // 6000 exceeds the dense limit and takes the streaming path.
    for n in [1000, 3000, 6000] {
        let x = chain(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &x, |b, x| b.iter(|| kernel_ess(x, &spec, &w).unwrap()));
    }
    g.finish();
}

fn bench_mmd(c: &mut Criterion) {
    let spec = KernelSpec::sphere_poisson(0.6).unwrap();
    let x = chain(2500);
    let reference = iid_chain(&target(), 8000, &mut stream_rng(1, 0)).unwrap();
    let mut g = c.benchmark_group("mmd");
    g.sample_size(10);
    g.bench_function("empirical_2500x8000", |b| b.iter(|| mmd2_empirical(&x, &reference, &spec).unwrap()));
    let prepared = ReferenceSample::new(&spec, &reference).unwrap();
    g.bench_function("corrected_prepared_2500", |b| b.iter(|| prepared.corrected(&x).unwrap()));
    g.finish();
}

criterion_group!(benches, bench_gram, bench_kernel_ess, bench_mmd);
criterion_main!(benches);
