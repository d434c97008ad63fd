use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qse_core::ansatz::{forward, parameter_shift_grad, AnsatzParams, AnsatzSpec, RotationAxis};
use qse_core::model::{cross_entropy, init_hybrid, Model};
use qse_core::ExecPolicy;

use crate::config::{check_version, load_config, resolve_seed, GradcheckDoc};

const FD_STEP: f64 = 1e-5;

/// Central finite difference of the loss over one flat parameter.
fn fd_loss(model: &Model, flat: &[f64], k: usize, x: &[f64], label: usize) -> Result<f64> {
    let mut probe = model.clone();
    let eval = |probe: &mut Model, value: f64| -> Result<f64> {
        let mut params = flat.to_vec();
        params[k] = value;
        probe.set_params_flat(&params)?;
        Ok(cross_entropy(&probe.forward(x)?, label)?)
    };
    Ok((eval(&mut probe, flat[k] + FD_STEP)? - eval(&mut probe, flat[k] - FD_STEP)?)
        / (2.0 * FD_STEP))
}

pub fn run(config_path: &Path, seed_override: Option<u64>, out: &Path, policy: ExecPolicy) -> Result<()> {
    let doc: GradcheckDoc = load_config(config_path)?;
    check_version(doc.version)?;
    let seed = resolve_seed(doc.seed, seed_override)?;
    let section = doc.gradcheck;
    if section.qubit_choices.is_empty() || section.depth_choices.is_empty() {
        bail!("gradcheck.qubit_choices/depth_choices must be non-empty");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = String::new();
    let mut max_dev = 0.0f64;
    let mut failures = 0usize;

    // Closed-form exactness at one qubit: d⟨Z⟩/dθ = −cos θ cos x.
    {
        let spec = AnsatzSpec::new(1, 1, RotationAxis::Y)?;
        let (theta, x) = (0.8123, -0.4456);
        let params = AnsatzParams::from_angles(&spec, vec![theta])?;
        let jac = parameter_shift_grad(&spec, &params, &[x], policy)?;
        let dev_theta = (jac.wrt_angle(&spec, 0, 0, 0) + theta.cos() * x.cos()).abs();
        let dev_x = (jac.wrt_input(0, 0) - theta.sin() * x.sin()).abs();
        let closed_dev = dev_theta.max(dev_x);
        report.push_str(&format!("closed-form single qubit: max |delta| = {closed_dev:.3e}\n"));
        if closed_dev > 1e-12 {
            failures += 1;
        }
    }

    for instance in 0..section.instances {
        let n = section.qubit_choices[instance % section.qubit_choices.len()];
        let depth = section.depth_choices[instance % section.depth_choices.len()];
        let use_skip = instance % 2 == 1;

        // Circuit-level Jacobian check against central finite differences.
        let spec = AnsatzSpec::new(n, depth, RotationAxis::Y)?;
        let angles: Vec<f64> = (0..spec.n_angles()).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let params = AnsatzParams::from_angles(&spec, angles.clone())?;
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let jac = parameter_shift_grad(&spec, &params, &x, policy)?;
        let mut circuit_dev = 0.0f64;
        for out_q in 0..n {
            for k in 0..spec.n_angles() {
                let fd = {
                    let eval = |v: f64| {
                        let mut shifted = angles.clone();
                        shifted[k] = v;
                        let p = AnsatzParams::from_angles(&spec, shifted).unwrap();
                        forward(&spec, &p, &x).unwrap()[out_q]
                    };
                    (eval(angles[k] + FD_STEP) - eval(angles[k] - FD_STEP)) / (2.0 * FD_STEP)
                };
                let analytic = jac.wrt_angle(&spec, out_q, k / n, k % n);
                circuit_dev = circuit_dev.max((analytic - fd).abs());
            }
        }

        // Full-model loss gradient check.
        let model = init_hybrid(
            section.feature_dim,
            n,
            depth,
            section.n_classes,
            use_skip,
            RotationAxis::Y,
            &mut rng,
        )?;
        let sample: Vec<f64> =
            (0..section.feature_dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let label = rng.gen_range(0..section.n_classes);
        let (_, mut grad) = model.loss_and_grad(&sample, label, policy)?;
        if section.negative_control && instance == 0 {
            // Wrong-sign shift: negate the circuit-angle block.
            let proj_params = section.feature_dim * n + n;
            for g in grad.iter_mut().skip(proj_params).take(spec.n_angles()) {
                *g = -*g;
            }
        }
        let flat = model.params_flat();
        let mut model_dev = 0.0f64;
        let mut instance_fail = false;
        for k in 0..flat.len() {
            let fd = fd_loss(&model, &flat, k, &sample, label)?;
            let dev = (grad[k] - fd).abs();
            model_dev = model_dev.max(dev);
            if dev > section.tolerance_abs + section.tolerance_rel * fd.abs() {
                instance_fail = true;
            }
        }

        let instance_dev = circuit_dev.max(model_dev);
        max_dev = max_dev.max(instance_dev);
        if circuit_dev > 1e-6 || instance_fail {
            failures += 1;
        }
        report.push_str(&format!(
            "instance {instance}: n={n} depth={depth} skip={use_skip} circuit_dev={circuit_dev:.3e} model_dev={model_dev:.3e}{}\n",
            if instance_fail { " FAIL" } else { "" }
        ));
    }

    let verdict = if failures == 0 { "PASS" } else { "FAIL" };
    report.push_str(&format!(
        "{verdict}: {} instances, max |analytic - finite difference| = {max_dev:.3e}\n",
        section.instances
    ));
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    fs::write(out.join("gradcheck_report.txt"), &report)?;
    println!("gradcheck: {verdict} (max deviation {max_dev:.3e})");
    if failures > 0 {
        bail!("gradient check failed on {failures} instance(s)");
    }
    Ok(())
}
