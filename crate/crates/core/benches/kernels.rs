use std::f64::consts::PI;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rydberg_grover::hilbert::{AtomSpec, Backend, BlockadeCondition, Control, RegisterState};
use rydberg_grover::pulses::{bright_block, rotation_block};

fn state(k: usize) -> RegisterState {
    RegisterState::uniform_over(vec![AtomSpec::qubit(); k]).unwrap()
}

fn backends() -> Vec<(&'static str, Backend)> {
    vec![
        ("sequential", Backend::Sequential),
        #[cfg(feature = "parallel")]
        ("parallel", Backend::Parallel),
    ]
}

fn pulse_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("bright_sweep");
    group.sample_size(20);
    let block = bright_block(PI, 0.0);
    for k in [8, 10, 12] {
        let base = state(k);
        for (name, backend) in backends() {
            group.bench_with_input(BenchmarkId::new(name, 3usize.pow(k as u32)), &k, |b, &k| {
                b.iter(|| {
                    let mut s = base.clone();
                    for atom in 0..k {
                        s.apply_block_unitary_with(backend, atom, &block, &[0, 1, 2], None)
                            .unwrap();
                    }
                    s
                })
            });
        }
    }
    group.finish();
}

fn blocked_pulse(c: &mut Criterion) {
    let mut group = c.benchmark_group("blocked_pi");
    group.sample_size(20);
    let block = rotation_block(PI, 0.0);
    let k = 12;
    let base = state(k);
    let control = Control::Blockade(BlockadeCondition::new((0..k - 1).collect(), vec![2]));
    for (name, backend) in backends() {
        group.bench_function(name, |b| {
            b.iter(|| {
                let mut s = base.clone();
                s.apply_block_unitary_with(backend, k - 1, &block, &[1, 2], Some(&control))
                    .unwrap();
                s
            })
        });
    }
    group.finish();
}

criterion_group!(benches, pulse_sweep, blocked_pulse);
criterion_main!(benches);
