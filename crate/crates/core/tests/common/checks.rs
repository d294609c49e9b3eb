//! Oracle comparisons that return a diagnostic instead of panicking, so the
//! acceptance runner can report them line by line.

use ndarray::{array, Array1};
use rand::Rng;
use stdpnet::associativity::AssociativityMap;
use stdpnet::optimizer::{make_directions, AdamConfig, AdamState, UpdateSource};
use stdpnet::rule::{stdp_curve, stdp_delta, CurveVariant, RuleParams, Sign};
use stdpnet::{Label, Network};

use super::*;

pub type Check = Result<String, String>;

/// Backprop against central differences on seeded `[3, 4, 2, 1]` nets.
pub fn fd_gradients_match(nets: u64, rel: f64) -> Check {
    let mut worst = 0.0f64;
    for seed in 0..nets {
        let net = Network::init(&[3, 4, 2, 1], seed).map_err(|e| e.to_string())?;
        let mut r = rng(1000 + seed);
        let x = random_input(&mut r, 3);
        let label = Label::from_bool(seed % 2 == 0);
        let trace = net
            .forward(Array1::from(x.clone()).view())
            .map_err(|e| e.to_string())?;
        let grads = net.backprop_bce(&trace, label).map_err(|e| e.to_string())?;
        let (fd_w, fd_x) = fd_gradients(&to_nested(net.weights()), &x, label.target(), 1e-5);
        let mut pairs = Vec::new();
        for (g, fd) in grads.weights.iter().zip(&fd_w) {
            for ((j, i), &v) in g.indexed_iter() {
                pairs.push((v, fd[j][i]));
            }
        }
        pairs.extend(grads.input.iter().copied().zip(fd_x));
        for (v, fd) in pairs {
            if !close(v, fd, rel, 1e-8) {
                return Err(format!(
                    "seed {seed}: analytic {v:e} vs finite difference {fd:e}"
                ));
            }
            worst = worst.max((v - fd).abs() / v.abs().max(fd.abs()).max(1e-300));
        }
    }
    Ok(format!("{nets} nets, worst relative error {worst:.2e}"))
}

/// Two Adam steps against the textbook recurrence.
pub fn adam_two_steps(tol: f64) -> Check {
    let mut net = Network::from_weights(vec![array![[0.0, 0.5]]]).map_err(|e| e.to_string())?;
    let mut adam = AdamState::new(AdamConfig::default(), &net);
    let mut reference = [ScalarAdam::new(1e-3), ScalarAdam::new(1e-3)];
    let mut w = [0.0, 0.5];
    let grads = [[0.7, -2.5], [-0.1, 4.0]];
    for g in grads {
        adam.step(&mut net, &[array![[g[0], g[1]]]])
            .map_err(|e| e.to_string())?;
        for k in 0..2 {
            w[k] = reference[k].step(w[k], g[k]);
            let got = net.weights()[0][[0, k]];
            if (got - w[k]).abs() > tol {
                return Err(format!(
                    "step {}: weight {k} is {got}, recurrence gives {}",
                    adam.steps(),
                    w[k]
                ));
            }
        }
    }
    Ok(format!("weights after 2 steps {:?}", w))
}

/// Gradient-source Adam on `(w - 3)^2 / 2` from `w0`, compared against the
/// scalar recurrence at every step. Returns the final weight.
pub fn adam_quadratic(w0: f64, steps: usize) -> Result<f64, String> {
    let mut net = Network::from_weights(vec![array![[w0]]]).map_err(|e| e.to_string())?;
    let mut adam = AdamState::new(AdamConfig::default(), &net);
    let mut reference = ScalarAdam::new(1e-3);
    let mut w_ref = w0;
    for step in 1..=steps {
        let w = net.weights()[0][[0, 0]];
        adam.step(&mut net, &[array![[w - 3.0]]])
            .map_err(|e| e.to_string())?;
        w_ref = reference.step(w_ref, w_ref - 3.0);
        let got = net.weights()[0][[0, 0]];
        if (got - w_ref).abs() > 1e-12 {
            return Err(format!("step {step}: {got} vs recurrence {w_ref}"));
        }
    }
    Ok(net.weights()[0][[0, 0]])
}

/// Batched directions against an explicit loop over samples, for both
/// update sources and batch sizes 1..=8.
pub fn batch_mean_matches_loop(tol: f64) -> Check {
    let dims = [5, 4, 3, 1];
    let params = RuleParams::default();
    let mut worst = 0.0f64;
    for n in 1..=8usize {
        let seed = n as u64;
        let net = Network::init(&dims, seed).map_err(|e| e.to_string())?;
        let assoc = AssociativityMap::assign(&dims, seed + 100).map_err(|e| e.to_string())?;
        let mut r = rng(seed + 200);
        let inputs: Vec<Vec<f64>> = (0..n).map(|_| random_input(&mut r, 5)).collect();
        let labels: Vec<_> = (0..n).map(|i| Label::from_bool(i % 3 == 0)).collect();
        let traces: Vec<_> = inputs
            .iter()
            .map(|x| net.forward(Array1::from(x.clone()).view()))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        for source in [UpdateSource::Gradient, UpdateSource::StdpRule] {
            let batch = make_directions(source, &net, &traces, &labels, &assoc, &params)
                .map_err(|e| e.to_string())?;
            let reference = per_sample_directions(source, &net, &assoc, &inputs, &labels);
            for (b, refl) in batch.iter().zip(&reference) {
                for ((j, i), &v) in b.indexed_iter() {
                    let diff = (v - refl[j][i]).abs();
                    worst = worst.max(diff);
                    if diff > tol {
                        return Err(format!(
                            "{source:?} batch {n} entry ({j},{i}): {v:e} vs loop {:e}",
                            refl[j][i]
                        ));
                    }
                }
            }
        }
    }
    Ok(format!(
        "batches 1..=8, both sources, worst abs diff {worst:.1e}"
    ))
}

/// Mean direction computed synapse by synapse with scalar code.
fn per_sample_directions(
    source: UpdateSource,
    net: &Network,
    assoc: &AssociativityMap,
    inputs: &[Vec<f64>],
    labels: &[Label],
) -> Vec<Vec<Vec<f64>>> {
    let weights = to_nested(net.weights());
    let mut sum: Vec<Vec<Vec<f64>>> = weights
        .iter()
        .map(|w| w.iter().map(|r| vec![0.0; r.len()]).collect())
        .collect();
    for (x, &y) in inputs.iter().zip(labels) {
        let acts = naive_activations(&weights, x);
        let flip = if y == Label::One { 1.0 } else { -1.0 };
        let p = acts.last().unwrap()[0];
        // Output-layer error for BCE through a sigmoid.
        let mut delta = vec![p - y.target()];
        for l in (0..weights.len()).rev() {
            let pre = &acts[l];
            let post = &acts[l + 1];
            for j in 0..post.len() {
                for i in 0..pre.len() {
                    sum[l][j][i] += match source {
                        UpdateSource::Gradient => delta[j] * pre[i],
                        UpdateSource::StdpRule => {
                            let z = flip * assoc.layers()[l][j].value();
                            -rule_formula(pre[i], post[j], z, 1.0, 1e-9)
                        }
                    };
                }
            }
            delta = (0..pre.len())
                .map(|i| {
                    let back: f64 = (0..post.len()).map(|j| weights[l][j][i] * delta[j]).sum();
                    back * pre[i] * (1.0 - pre[i])
                })
                .collect();
        }
    }
    let n = inputs.len() as f64;
    for layer in &mut sum {
        for row in layer {
            for v in row {
                *v /= n;
            }
        }
    }
    sum
}

/// Activations of every layer, input included, with explicit loops.
pub fn naive_activations(weights: &[Vec<Vec<f64>>], input: &[f64]) -> Vec<Vec<f64>> {
    let mut acts = vec![input.to_vec()];
    for w in weights {
        let a = acts.last().unwrap();
        let next = w
            .iter()
            .map(|row| {
                let z: f64 = row.iter().zip(a).map(|(wi, ai)| wi * ai).sum();
                1.0 / (1.0 + (-z).exp())
            })
            .collect();
        acts.push(next);
    }
    acts
}

/// Rate form against the spike-timing form on sampled `(x, p)` pairs, plus
/// the exact algebraic properties.
pub fn rule_properties(samples: usize, rel: f64) -> Check {
    let params = RuleParams::default();
    let delta = |x: f64, p: f64, z: Sign, params: &RuleParams| {
        stdp_delta(x, p, z, params).map_err(|e| e.to_string())
    };
    let mut r = rng(7);
    let mut worst = 0.0f64;
    let mut taken = 0;
    while taken < samples {
        let x: f64 = r.gen_range(0.05..0.95);
        let p: f64 = r.gen_range(0.05..0.95);
        if (2.0 * p - x).abs() < 0.05 {
            continue;
        }
        taken += 1;
        let d = delta(x, p, Sign::Positive, &params)?;
        let t = stdp_curve(1.0 / p - 1.0 / x, 1.0 / x, CurveVariant::Corrected)
            .map_err(|e| e.to_string())?;
        let err = (d - t).abs() / d.abs().max(t.abs());
        let agrees = d == t || err <= rel;
        if !agrees {
            return Err(format!("x = {x}, p = {p}: rate {d:e} vs timing {t:e}"));
        }
        worst = worst.max(if d == t { 0.0 } else { err });

        if delta(x, p, Sign::Negative, &params)? != -d {
            return Err(format!("z-linearity broken at x = {x}, p = {p}"));
        }
        let eta = r.gen_range(0.01..10.0);
        let one = delta(x, p, Sign::Positive, &RuleParams { eta, ..params })?;
        let two = delta(
            x,
            p,
            Sign::Positive,
            &RuleParams {
                eta: 2.0 * eta,
                ..params
            },
        )?;
        if two != 2.0 * one {
            return Err(format!(
                "eta-linearity broken at x = {x}, p = {p}, eta = {eta}"
            ));
        }
        for (zx, zp) in [(0.0, p), (x, 0.0), (x, x), (p, p)] {
            if delta(zx, zp, Sign::Positive, &params)? != 0.0 {
                return Err(format!("expected zero at x = {zx}, p = {zp}"));
            }
        }
    }
    Ok(format!("{samples} pairs, worst relative error {worst:.2e}"))
}

/// Corrected curve peaks higher for positive offsets, uncorrected for
/// negative ones, at every grid point.
pub fn curve_asymmetry() -> Check {
    let points = stdpnet::rule::sample_curves(1.0, 0.9, 0.01).map_err(|e| e.to_string())?;
    let n = points.len();
    if n != 181 {
        return Err(format!("expected 181 grid points, got {n}"));
    }
    let mid = n / 2;
    for k in 1..=mid {
        let pos = points[mid + k];
        let neg = points[mid - k];
        if pos.delta_t <= 0.0 || neg.delta_t != -pos.delta_t {
            return Err(format!("grid not symmetric at {k}"));
        }
        let corrected_wins = pos.corrected > neg.corrected.abs();
        if !corrected_wins {
            return Err(format!(
                "corrected at t = {}: {} vs |{}|",
                pos.delta_t, pos.corrected, neg.corrected
            ));
        }
        let uncorrected_loses = pos.uncorrected < neg.uncorrected.abs();
        if !uncorrected_loses {
            return Err(format!(
                "uncorrected at t = {}: {} vs |{}|",
                pos.delta_t, pos.uncorrected, neg.uncorrected
            ));
        }
    }
    let last = points[n - 1];
    Ok(format!(
        "{} offsets; at t = 0.9 corrected {:.3e} vs {:.3e}, uncorrected {:.3e} vs {:.3e}",
        mid,
        last.corrected,
        points[0].corrected.abs(),
        last.uncorrected,
        points[0].uncorrected.abs()
    ))
}
