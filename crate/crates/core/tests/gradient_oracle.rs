//! Finite-difference oracles for the shift-rule Jacobian and the full model
//! backward pass. The finite-difference path exists only here; production
//! gradients always use the shift rule and analytic layer derivatives.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qse_core::ansatz::{forward, parameter_shift_grad, AnsatzParams, AnsatzSpec, RotationAxis};
use qse_core::model::{cross_entropy, init_classical, init_hybrid};
use qse_core::ExecPolicy;

const H: f64 = 1e-5;

fn central_difference(f: impl Fn(f64) -> f64, at: f64) -> f64 {
    (f(at + H) - f(at - H)) / (2.0 * H)
}

#[test]
fn jacobian_matches_finite_differences_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..12 {
        let n = [2, 3, 4, 6][trial % 4];
        let depth = [1, 2, 4][trial % 3];
        let first = if trial % 2 == 0 { RotationAxis::Y } else { RotationAxis::Z };
        let spec = AnsatzSpec::new(n, depth, first).unwrap();
        let angles: Vec<f64> = (0..spec.n_angles()).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let params = AnsatzParams::from_angles(&spec, angles.clone()).unwrap();
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect();

        let jac = parameter_shift_grad(&spec, &params, &x, ExecPolicy::default()).unwrap();

        for out in 0..n {
            for layer in 0..depth {
                for qubit in 0..n {
                    let k = layer * n + qubit;
                    let fd = central_difference(
                        |v| {
                            let mut shifted = angles.clone();
                            shifted[k] = v;
                            let p = AnsatzParams::from_angles(&spec, shifted).unwrap();
                            forward(&spec, &p, &x).unwrap()[out]
                        },
                        angles[k],
                    );
                    let analytic = jac.wrt_angle(&spec, out, layer, qubit);
                    assert!(
                        (analytic - fd).abs() < 1e-6,
                        "angle ({layer},{qubit}) output {out}: {analytic} vs {fd}"
                    );
                }
            }
            for qubit in 0..n {
                let fd = central_difference(
                    |v| {
                        let mut shifted = x.clone();
                        shifted[qubit] = v;
                        forward(&spec, &params, &shifted).unwrap()[out]
                    },
                    x[qubit],
                );
                let analytic = jac.wrt_input(out, qubit);
                assert!(
                    (analytic - fd).abs() < 1e-6,
                    "input {qubit} output {out}: {analytic} vs {fd}"
                );
            }
        }
    }
}

#[test]
fn zero_parameter_layer0_gradient_matches_finite_differences() {
    let spec = AnsatzSpec::new(4, 2, RotationAxis::Y).unwrap();
    let params = AnsatzParams::zeros(&spec);
    let x = [0.4, -0.9, 1.3, 0.2];
    let jac = parameter_shift_grad(&spec, &params, &x, ExecPolicy::default()).unwrap();
    for out in 0..4 {
        for qubit in 0..4 {
            let fd = central_difference(
                |v| {
                    let mut angles = vec![0.0; spec.n_angles()];
                    angles[qubit] = v;
                    let p = AnsatzParams::from_angles(&spec, angles).unwrap();
                    forward(&spec, &p, &x).unwrap()[out]
                },
                0.0,
            );
            let analytic = jac.wrt_angle(&spec, out, 0, qubit);
            assert!((analytic - fd).abs() < 1e-6, "{analytic} vs {fd}");
        }
    }
}

#[test]
fn model_loss_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(4096);
    let feature_dim = 6;
    let n_classes = 3;
    for (use_hybrid, use_skip) in [(false, false), (true, false), (true, true)] {
        let model = if use_hybrid {
            init_hybrid(feature_dim, 4, 2, n_classes, use_skip, RotationAxis::Y, &mut rng).unwrap()
        } else {
            init_classical(feature_dim, 4, n_classes, &mut rng)
        };
        let x: Vec<f64> = (0..feature_dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let label = rng.gen_range(0..n_classes);
        let (_, grad) = model.loss_and_grad(&x, label, ExecPolicy::default()).unwrap();
        let flat = model.params_flat();
        let mut max_abs = 0.0f64;
        for k in 0..flat.len() {
            let fd = central_difference(
                |v| {
                    let mut probe = model.clone();
                    let mut p = flat.clone();
                    p[k] = v;
                    probe.set_params_flat(&p).unwrap();
                    cross_entropy(&probe.forward(&x).unwrap(), label).unwrap()
                },
                flat[k],
            );
            let tol = 1e-7 + 1e-5 * fd.abs();
            let diff = (grad[k] - fd).abs();
            max_abs = max_abs.max(diff);
            assert!(diff < tol, "param {k}: {} vs {fd}", grad[k]);
        }
        assert!(max_abs < 1e-5, "worst deviation {max_abs}");
    }
}

#[test]
fn analytic_single_qubit_gradients_exact() {
    // n = 1 closed form: loss-free check of d⟨Z⟩/dθ = −cos θ cos x and
    // d⟨Z⟩/dx = sin θ sin x to near machine precision.
    let spec = AnsatzSpec::new(1, 1, RotationAxis::Y).unwrap();
    for (theta, x) in [(0.0, 0.0), (0.9, -1.4), (2.2, 0.6)] {
        let params = AnsatzParams::from_angles(&spec, vec![theta]).unwrap();
        let jac = parameter_shift_grad(&spec, &params, &[x], ExecPolicy::default()).unwrap();
        assert!((jac.wrt_angle(&spec, 0, 0, 0) + theta.cos() * x.cos()).abs() < 1e-12);
        assert!((jac.wrt_input(0, 0) - theta.sin() * x.sin()).abs() < 1e-12);
    }
}
