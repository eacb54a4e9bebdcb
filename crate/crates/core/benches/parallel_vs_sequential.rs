use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use piestim::curve::sweep;
use piestim::fidelity::{f_known, ReflectionRule};
use piestim::optimal_states::known_opt_state;
use piestim::oracle::{covariant_povm_fidelity, SphereQuadrature};
use piestim::sampling::random_schur_state_with_length;
use piestim::{BlochVector, Execution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MODES: [(&str, Execution); 2] = [
    ("parallel", Execution::Parallel),
    ("sequential", Execution::Sequential),
];

fn bench_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep_n40_1001");
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| sweep(black_box(40), 0.0, 1.0, 1001, exec).unwrap())
        });
    }
    group.finish();
}

fn bench_quadrature(c: &mut Criterion) {
    let mut group = c.benchmark_group("povm_quadrature");
    let state = known_opt_state(8, 0.5, BlochVector::new(0.6, 0.0, 0.8)).unwrap();
    let quad = SphereQuadrature::new(64).unwrap();
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, quad.order()), &quad, |b, quad| {
            b.iter(|| {
                covariant_povm_fidelity(
                    black_box(&state),
                    quad,
                    ReflectionRule::ReflectWhenObtuse,
                    exec,
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

fn bench_random_trials(c: &mut Criterion) {
    let mut group = c.benchmark_group("random_worst_state_trials");
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| {
                exec.map_range(0..2000, |i| {
                    let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
                    let state = random_schur_state_with_length(8, 0.5, &mut rng).unwrap();
                    f_known(&state).unwrap().value
                })
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_sweep, bench_quadrature, bench_random_trials);
criterion_main!(benches);
