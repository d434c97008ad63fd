use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qse_core::cutting::{
    enumerate_subcircuits, execute_cut, CutPlan, StatevectorExecutor, WireCut,
};
use qse_core::statevector::{
    expectation_pauli_product, run_circuit, Circuit, Gate, Pauli, Statevector,
};
use qse_core::ExecPolicy;

use crate::config::{check_version, load_config, resolve_seed, CutVerifyDoc};

fn random_circuit(rng: &mut ChaCha8Rng, max_qubits: usize, max_depth: usize) -> Circuit {
    let n = rng.gen_range(2..=max_qubits.max(2));
    let layers = rng.gen_range(1..=max_depth.max(1));
    let mut circuit = Circuit::new(n);
    for _ in 0..layers {
        for q in 0..n {
            match rng.gen_range(0..3) {
                0 => circuit.push(Gate::H(q)),
                1 => circuit.push(Gate::Ry(q, rng.gen_range(-3.0..3.0))),
                _ => circuit.push(Gate::Rz(q, rng.gen_range(-3.0..3.0))),
            }
        }
        let control = rng.gen_range(0..n);
        let mut target = rng.gen_range(0..n);
        while target == control {
            target = rng.gen_range(0..n);
        }
        circuit.push(Gate::Cnot { control, target });
    }
    circuit
}

fn random_observable(rng: &mut ChaCha8Rng, n: usize) -> Vec<(usize, Pauli)> {
    let count = rng.gen_range(1..=n.min(3));
    let mut qubits: Vec<usize> = (0..n).collect();
    for i in (1..qubits.len()).rev() {
        qubits.swap(i, rng.gen_range(0..=i));
    }
    qubits
        .into_iter()
        .take(count)
        .map(|q| (q, [Pauli::X, Pauli::Y, Pauli::Z][rng.gen_range(0..3)]))
        .collect()
}

fn uncut(circuit: &Circuit, observable: &[(usize, Pauli)]) -> Result<f64> {
    let (state, weight) = run_circuit(circuit, &Statevector::zero(circuit.n_qubits))?;
    Ok(weight * expectation_pauli_product(&state, observable)?)
}

pub fn run(config_path: &Path, seed_override: Option<u64>, out: &Path, policy: ExecPolicy) -> Result<()> {
    let doc: CutVerifyDoc = load_config(config_path)?;
    check_version(doc.version)?;
    let seed = resolve_seed(doc.seed, seed_override)?;
    let section = doc.cut_verify;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = String::new();
    let mut max_dev = 0.0f64;
    let mut failures = 0usize;

    // Canonical gate-cut case: the Bell pair keeps its correlations.
    {
        let mut bell = Circuit::new(2);
        bell.push(Gate::H(0));
        bell.push(Gate::Cnot { control: 0, target: 1 });
        let plan = CutPlan { wire_cuts: vec![], gate_cuts: vec![1] };
        for (name, observable) in [
            ("ZZ", vec![(0, Pauli::Z), (1, Pauli::Z)]),
            ("XX", vec![(0, Pauli::X), (1, Pauli::X)]),
        ] {
            let value = execute_cut(&bell, &plan, &observable, &StatevectorExecutor, policy)?;
            let dev = (value - 1.0).abs();
            max_dev = max_dev.max(dev);
            if dev > section.tolerance {
                failures += 1;
            }
            report.push_str(&format!("bell gate-cut {name}: |delta| = {dev:.3e}\n"));
        }
    }

    // Empty plan must be exact.
    {
        let circuit = random_circuit(&mut rng, section.max_qubits, section.max_depth);
        let observable = random_observable(&mut rng, circuit.n_qubits);
        let direct = uncut(&circuit, &observable)?;
        let value =
            execute_cut(&circuit, &CutPlan::empty(), &observable, &StatevectorExecutor, policy)?;
        let exact = value == direct;
        report.push_str(&format!(
            "empty plan: exact equality = {exact} (cut {value}, uncut {direct})\n"
        ));
        if !exact {
            failures += 1;
        }
    }

    let mut run_suite = |label: &str, count: usize, with_gate_cut: bool, rng: &mut ChaCha8Rng, report: &mut String| -> Result<()> {
        let mut suite_max = 0.0f64;
        for _ in 0..count {
            let circuit = random_circuit(rng, section.max_qubits, section.max_depth);
            let observable = random_observable(rng, circuit.n_qubits);
            let wire = WireCut {
                gate_index: rng.gen_range(0..circuit.gates.len()),
                qubit: rng.gen_range(0..circuit.n_qubits),
            };
            let gate_cuts = if with_gate_cut {
                let cnots: Vec<usize> = circuit
                    .gates
                    .iter()
                    .enumerate()
                    .filter_map(|(i, g)| matches!(g, Gate::Cnot { .. }).then_some(i))
                    .collect();
                vec![cnots[rng.gen_range(0..cnots.len())]]
            } else {
                vec![]
            };
            let plan = CutPlan { wire_cuts: vec![wire], gate_cuts };
            let expansion = enumerate_subcircuits(&circuit, &plan, &observable)?;
            let expected = plan.combination_count();
            if expansion.groups.len() != expected {
                bail!(
                    "combination count {} differs from 8^w*6^g = {expected}",
                    expansion.groups.len()
                );
            }
            let value = execute_cut(&circuit, &plan, &observable, &StatevectorExecutor, policy)?;
            let dev = (value - uncut(&circuit, &observable)?).abs();
            suite_max = suite_max.max(dev);
        }
        max_dev = max_dev.max(suite_max);
        if suite_max > section.tolerance {
            failures += 1;
        }
        report.push_str(&format!(
            "{label}: {count} circuits, combinations {}, max |reconstructed - uncut| = {suite_max:.3e}\n",
            if with_gate_cut { 48 } else { 8 }
        ));
        Ok(())
    };

    run_suite("single wire cut", section.single_cut_circuits, false, &mut rng, &mut report)?;
    run_suite("wire + gate cut", section.double_cut_circuits, true, &mut rng, &mut report)?;

    let verdict = if failures == 0 { "PASS" } else { "FAIL" };
    report.push_str(&format!(
        "{verdict}: max deviation {max_dev:.3e} (tolerance {:.1e})\n",
        section.tolerance
    ));
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    fs::write(out.join("cut_verify_report.txt"), &report)?;
    println!("cut-verify: {verdict} (max deviation {max_dev:.3e})");
    if failures > 0 {
        bail!("cut verification failed");
    }
    Ok(())
}
