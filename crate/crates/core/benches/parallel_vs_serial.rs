//! Compares the rayon data-parallel route against the sequential fallback on
//! the three hot loops: shift-rule Jacobians, cut-combination execution and
//! per-sample batch gradients.
//!
//! Run with `cargo bench -p qse-core`. Building with
//! `--no-default-features` leaves only the sequential route; the `parallel`
//! entries then measure the same code path twice.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qse_core::ansatz::{parameter_shift_grad, AnsatzParams, AnsatzSpec, RotationAxis};
use qse_core::cutting::{execute_cut, CutPlan, StatevectorExecutor, WireCut};
use qse_core::model::init_hybrid;
use qse_core::statevector::{Circuit, Gate, Pauli};
use qse_core::ExecPolicy;

fn policies() -> [(&'static str, ExecPolicy); 2] {
    [("serial", ExecPolicy::serial()), ("parallel", ExecPolicy::default())]
}

fn bench_jacobian(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let spec = AnsatzSpec::new(6, 4, RotationAxis::Y).unwrap();
    let angles: Vec<f64> = (0..spec.n_angles()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let params = AnsatzParams::from_angles(&spec, angles).unwrap();
    let x: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();

    let mut group = c.benchmark_group("shift_rule_jacobian_6q_depth4");
    for (name, policy) in policies() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &policy, |b, &policy| {
            b.iter(|| parameter_shift_grad(&spec, &params, &x, policy).unwrap());
        });
    }
    group.finish();
}

fn bench_cut_execution(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let spec = AnsatzSpec::new(6, 3, RotationAxis::Y).unwrap();
    let angles: Vec<f64> = (0..spec.n_angles()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let params = AnsatzParams::from_angles(&spec, angles).unwrap();
    let x: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let circuit: Circuit = qse_core::ansatz::build_circuit(&spec, &params, &x).unwrap();
    let cnot_index = circuit
        .gates
        .iter()
        .position(|g| matches!(g, Gate::Cnot { .. }))
        .unwrap();
    let plan = CutPlan {
        wire_cuts: vec![WireCut { gate_index: cnot_index, qubit: 1 }],
        gate_cuts: vec![cnot_index],
    };
    let observable = [(0, Pauli::Z), (5, Pauli::Z)];

    let mut group = c.benchmark_group("cut_execution_48_combinations");
    for (name, policy) in policies() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &policy, |b, &policy| {
            b.iter(|| {
                execute_cut(&circuit, &plan, &observable, &StatevectorExecutor, policy).unwrap()
            });
        });
    }
    group.finish();
}

fn bench_batch_gradient(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let model = init_hybrid(8, 4, 4, 4, true, RotationAxis::Y, &mut rng).unwrap();
    let batch: Vec<(Vec<f64>, usize)> = (0..32)
        .map(|i| ((0..8).map(|_| rng.gen_range(-1.0..1.0)).collect(), i % 4))
        .collect();

    let mut group = c.benchmark_group("batch_gradient_32x4q");
    for (name, policy) in policies() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &policy, |b, &policy| {
            b.iter(|| {
                let grads = policy.try_map_indexed(batch.len(), |i| {
                    model.loss_and_grad(&batch[i].0, batch[i].1, ExecPolicy::serial())
                });
                grads.unwrap()
            });
        });
    }
    group.finish();
}

criterion_group!(benches, bench_jacobian, bench_cut_execution, bench_batch_gradient);
criterion_main!(benches);
