//! Analytic gradients against central finite differences, and Rectified Adam
//! against an independent scalar transcription of its update rule.

mod common;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use siamstream::nn::{loss, Activation, LayerSpec, Mlp, Radam, RadamConfig};

#[test]
fn dense_gradients_match_finite_differences() {
    let mut worst: f64 = 0.0;
    for seed in 0..100 {
        let e = check_dense(seed);
        assert!(e < TOL, "seed {seed}: relative error {e}");
        worst = worst.max(e);
    }
    println!("worst relative error over 100 nets: {worst:e}");
}

#[test]
fn general_backward_matches_fused_logit_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    for head in [Head::Softmax(3), Head::Sigmoid] {
        let net = random_net(&mut rng, head);
        let x: Vec<f64> = (0..net.input_dim())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let cache = net.forward(&x).unwrap();
        let p = cache.output().to_vec();
        let (d_out, d_logit): (Vec<f64>, Vec<f64>) = match head {
            Head::Softmax(_) => {
                let mut d = vec![0.0; p.len()];
                d[1] = -1.0 / p[1];
                (d, loss::cce_logit_grad(1, &p))
            }
            Head::Sigmoid => (vec![-1.0 / p[0]], vec![loss::bce_logit_grad(1.0, p[0])]),
        };
        let mut g1 = vec![0.0; net.num_params()];
        let mut g2 = vec![0.0; net.num_params()];
        net.backward(&cache, &d_out, &mut g1);
        net.backward_logits(&cache, &d_logit, &mut g2);
        assert!(rel_err(&g1, &g2) < 1e-10);
    }
}

#[test]
fn siamese_gradients_match_finite_differences() {
    for seed in 0..20u64 {
        let e = check_siamese(seed);
        assert!(e < TOL, "seed {seed}: relative error {e}");
    }
}

#[test]
fn saturated_correct_prediction_has_no_gradient() {
    let specs = vec![LayerSpec::new(2, 1, Activation::Sigmoid)];
    let mut net = Mlp::<f64>::zeros(specs, 0.01).unwrap();
    // bias far into saturation
    let n = net.num_params();
    net.params_mut()[n - 1] = 60.0;
    let g = analytic(&net, &[vec![0.2, 0.4]], &[1], Head::Sigmoid);
    assert!(g.iter().map(|v| v * v).sum::<f64>().sqrt() < 1e-6);
    assert!(loss::bce(1.0, net.predict(&[0.2, 0.4]).unwrap()[0]) < 1e-6);
}

#[test]
fn duplicated_batch_has_same_mean_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let net = random_net(&mut rng, Head::Softmax(3));
    let (xs, ys) = random_batch(&mut rng, net.input_dim(), 3, 5);
    let g1 = analytic(&net, &xs, &ys, Head::Softmax(3));
    let xs2: Vec<Vec<f64>> = xs.iter().flat_map(|x| [x.clone(), x.clone()]).collect();
    let ys2: Vec<usize> = ys.iter().flat_map(|&y| [y, y]).collect();
    let g2 = analytic(&net, &xs2, &ys2, Head::Softmax(3));
    assert!(rel_err(&g1, &g2) < 1e-12);
}

/// Straight transcription of the update for a single scalar parameter.
fn reference_radam(w0: f64, grad: impl Fn(f64) -> f64, steps: u64, lr: f64) -> f64 {
    let (b1, b2, eps) = (0.9_f64, 0.999_f64, 1e-8);
    let rho_inf = 2.0 / (1.0 - b2) - 1.0;
    let (mut m, mut v, mut w) = (0.0, 0.0, w0);
    for t in 1..=steps {
        let g = grad(w);
        m = b1 * m + (1.0 - b1) * g;
        v = b2 * v + (1.0 - b2) * g * g;
        let m_hat = m / (1.0 - b1.powi(t as i32));
        let rho = rho_inf - 2.0 * t as f64 * b2.powi(t as i32) / (1.0 - b2.powi(t as i32));
        if rho > 4.0 {
            let v_hat = (v / (1.0 - b2.powi(t as i32))).sqrt();
            let r = ((rho - 4.0) * (rho - 2.0) * rho_inf
                / ((rho_inf - 4.0) * (rho_inf - 2.0) * rho))
                .sqrt();
            w -= lr * r * m_hat / (v_hat + eps);
        } else {
            w -= lr * m_hat;
        }
    }
    w
}

#[test]
fn radam_minimises_quadratic_like_reference() {
    let cfg = RadamConfig::default();
    let mut opt = Radam::<f64>::new(1, cfg);
    let mut w = [1.0];
    for _ in 0..5000 {
        let g = [2.0 * w[0]];
        opt.step(&mut w, &g);
    }
    let reference = reference_radam(1.0, |w| 2.0 * w, 5000, 0.01);
    assert!((w[0] - reference).abs() < 1e-9, "{} vs {}", w[0], reference);
    assert!(w[0].abs() < 1e-3, "|w| = {}", w[0].abs());
}

#[test]
fn training_keeps_parameters_finite() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let specs = Mlp::<f32>::layered(2, &[32, 32, 32], Some((4, Activation::Softmax)));
    let mut net = Mlp::he_normal(specs, 0.01, &mut rng).unwrap();
    let mut opt = Radam::<f32>::new(net.num_params(), RadamConfig::default());
    let mut g = vec![0.0_f32; net.num_params()];
    for _ in 0..20_000 {
        let x = [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)];
        let y = rng.random_range(0..4);
        let cache = net.forward(&x).unwrap();
        g.iter_mut().for_each(|v| *v = 0.0);
        net.backward_logits(&cache, &loss::cce_logit_grad(y, cache.output()), &mut g);
        opt.step(net.params_mut(), &g);
        assert!(cache.activations().iter().flatten().all(|a| a.is_finite()));
    }
    assert!(net.is_finite());
}
