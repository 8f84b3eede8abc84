use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use homhash_core::group::{orthogonal_subgroup, solve_kernel_from_orthogonal_samples};
use homhash_core::sim::{qft_group, sample_orthogonal, uniform_superposition};
use homhash_core::{
    gen_params, run_attack, AttackConfig, Backend, GenRequest, GroupSpec, HomomorphicHash, Limits, SubgroupBasis,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn qft(c: &mut Criterion) {
    let mut g = c.benchmark_group("qft_group");
    for spec in [GroupSpec::binary(10), GroupSpec::homogeneous(11, 3).unwrap(), GroupSpec::new(vec![8, 9, 10]).unwrap()]
    {
        let state = uniform_superposition(&spec, 1 << 20).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(&spec), &state, |b, s| {
            b.iter(|| qft_group(black_box(s)).unwrap())
        });
    }
    g.finish();
}

fn random_basis(spec: &GroupSpec, count: usize, seed: u64) -> SubgroupBasis {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let gens = (0..count).map(|_| spec.element_at(rng.gen_range(0..spec.order()))).collect();
    SubgroupBasis::new(spec.clone(), gens).unwrap()
}

fn solvers(c: &mut Criterion) {
    let mut g = c.benchmark_group("kernel_solve");
    let mixed = random_basis(&GroupSpec::new(vec![12, 18, 30, 7]).unwrap(), 3, 1);
    g.bench_function("lattice Z_12 x Z_18 x Z_30 x Z_7", |b| {
        b.iter(|| orthogonal_subgroup(black_box(&mixed)).unwrap())
    });
    let bits = random_basis(&GroupSpec::binary(32), 20, 2);
    g.bench_function("field Z_2^32", |b| {
        b.iter(|| solve_kernel_from_orthogonal_samples(black_box(bits.generators()), bits.group()).unwrap())
    });
    g.finish();
}

fn sampling(c: &mut Criterion) {
    let h = gen_params(&GenRequest::XorMatrix { input_bits: 10, output_bits: 5 }, 3).unwrap();
    let limits = Limits::default();
    let mut g = c.benchmark_group("sample_orthogonal");
    for backend in [Backend::Statevector, Backend::Coset] {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        g.bench_function(backend.to_string(), |b| {
            b.iter(|| sample_orthogonal(&h, backend, &mut rng, &limits).unwrap())
        });
    }
    g.finish();
}

fn attack(c: &mut Criterion) {
    let cases: Vec<(&str, HomomorphicHash)> = vec![
        ("xor-matrix 10x5", gen_params(&GenRequest::XorMatrix { input_bits: 10, output_bits: 5 }, 3).unwrap()),
        ("kfm p=47 q=23 m=3", gen_params(&GenRequest::Kfm { p: 47, q: 23, blocks: 3 }, 3).unwrap()),
        ("rsa 37*41 e=5", HomomorphicHash::rsa(37, 41, 5).unwrap()),
    ];
    let mut g = c.benchmark_group("run_attack");
    g.sample_size(10);
    for (name, h) in &cases {
        g.bench_function(*name, |b| b.iter(|| run_attack(h, &AttackConfig::default()).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, qft, solvers, sampling, attack);
criterion_main!(benches);
