//! Independent oracles shared by the property suites and the acceptance run.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use siamstream::learners::{LearnerParams, SiameseModel};
use siamstream::memory::Pair;
use siamstream::nn::{loss, Activation, Mlp};
use siamstream::streamgen::Instance;

pub const H: f64 = 1e-5;
pub const TOL: f64 = 1e-4;

#[derive(Clone, Copy, Debug)]
pub enum Head {
    Softmax(usize),
    Sigmoid,
}

pub fn random_net(rng: &mut ChaCha8Rng, head: Head) -> Mlp<f64> {
    let input = rng.random_range(1..=4);
    let hidden: Vec<usize> = (0..rng.random_range(0..=2))
        .map(|_| rng.random_range(1..=16))
        .collect();
    let out = match head {
        Head::Softmax(k) => (k, Activation::Softmax),
        Head::Sigmoid => (1, Activation::Sigmoid),
    };
    let mut net =
        Mlp::he_normal(Mlp::<f64>::layered(input, &hidden, Some(out)), 0.01, rng).unwrap();
    // non-zero biases so every parameter is exercised
    for p in net.params_mut() {
        *p += rng.random_range(-0.1..0.1);
    }
    net
}

pub fn batch_loss(net: &Mlp<f64>, xs: &[Vec<f64>], ys: &[usize], head: Head) -> f64 {
    let total: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, &y)| {
            let p = net.predict(x).unwrap();
            match head {
                Head::Softmax(_) => loss::cce(y, &p),
                Head::Sigmoid => loss::bce(y as f64, p[0]),
            }
        })
        .sum();
    total / xs.len() as f64
}

pub fn analytic(net: &Mlp<f64>, xs: &[Vec<f64>], ys: &[usize], head: Head) -> Vec<f64> {
    let mut g = vec![0.0; net.num_params()];
    let scale = 1.0 / xs.len() as f64;
    for (x, &y) in xs.iter().zip(ys) {
        let cache = net.forward(x).unwrap();
        let p = cache.output();
        let delta: Vec<f64> = match head {
            Head::Softmax(_) => loss::cce_logit_grad(y, p),
            Head::Sigmoid => vec![loss::bce_logit_grad(y as f64, p[0])],
        };
        let delta: Vec<f64> = delta.iter().map(|d| d * scale).collect();
        net.backward_logits(&cache, &delta, &mut g);
    }
    g
}

pub fn numeric<F: Fn(&[f64]) -> f64>(params: &[f64], f: F) -> Vec<f64> {
    let mut p = params.to_vec();
    (0..p.len())
        .map(|i| {
            let orig = p[i];
            p[i] = orig + H;
            let up = f(&p);
            p[i] = orig - H;
            let down = f(&p);
            p[i] = orig;
            (up - down) / (2.0 * H)
        })
        .collect()
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt();
    let scale = a
        .iter()
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
        .max(b.iter().map(|x| x * x).sum::<f64>().sqrt());
    if scale < 1e-12 {
        diff
    } else {
        diff / scale
    }
}

pub fn random_batch(
    rng: &mut ChaCha8Rng,
    dim: usize,
    classes: usize,
    n: usize,
) -> (Vec<Vec<f64>>, Vec<usize>) {
    let xs = (0..n)
        .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let ys = (0..n).map(|_| rng.random_range(0..classes)).collect();
    (xs, ys)
}

pub fn check_network(seed: u64, head: Head) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let net = random_net(&mut rng, head);
    let classes = match head {
        Head::Softmax(k) => k,
        Head::Sigmoid => 2,
    };
    let n = rng.random_range(1..=6);
    let (xs, ys) = random_batch(&mut rng, net.input_dim(), classes, n);
    let a = analytic(&net, &xs, &ys, head);
    let num = numeric(net.params(), |p| {
        let mut probe = net.clone();
        probe.params_mut().copy_from_slice(p);
        batch_loss(&probe, &xs, &ys, head)
    });
    rel_err(&a, &num)
}

pub fn siamese_params(model: &SiameseModel<f64>) -> Vec<f64> {
    let mut p = model.embedding_net().params().to_vec();
    p.extend_from_slice(model.head_net().params());
    p
}

pub fn set_siamese_params(model: &mut SiameseModel<f64>, p: &[f64]) {
    let n = model.embedding_net().num_params();
    model
        .embedding_net_mut()
        .params_mut()
        .copy_from_slice(&p[..n]);
    model.head_net_mut().params_mut().copy_from_slice(&p[n..]);
}

pub fn check_siamese(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
    let hidden: Vec<usize> = (0..rng.random_range(1..=3))
        .map(|_| rng.random_range(2..=16))
        .collect();
    let params = LearnerParams {
        hidden,
        ..LearnerParams::default()
    };
    let dim = rng.random_range(1..=3);
    let mut model = SiameseModel::<f64>::new(&params, dim, &mut rng).unwrap();
    let bumped: Vec<f64> = siamese_params(&model)
        .iter()
        .map(|p| p + rng.random_range(-0.1..0.1))
        .collect();
    set_siamese_params(&mut model, &bumped);
    let instances: Vec<Instance<f64>> = (0..6)
        .map(|i| {
            Instance::labelled(
                (0..dim).map(|_| rng.random_range(0.0..1.0)).collect(),
                i % 3,
                i as u64,
            )
        })
        .collect();
    let pairs: Vec<Pair> = (0..10)
        .map(|_| {
            let a = rng.random_range(0..6);
            let b = rng.random_range(0..6);
            Pair {
                a,
                b,
                same: instances[a].y == instances[b].y,
            }
        })
        .collect();
    let (ge, gh) = model.gradients(&instances, &pairs).unwrap();
    let mut a = ge;
    a.extend(gh);
    let base = siamese_params(&model);
    let num = numeric(&base, |p| {
        let mut probe = model.clone();
        set_siamese_params(&mut probe, p);
        probe.loss(&instances, &pairs).unwrap()
    });
    rel_err(&a, &num)
}

/// Dense net with a softmax head on even seeds, a sigmoid head on odd ones.
pub fn check_dense(seed: u64) -> f64 {
    let head = if seed.is_multiple_of(2) {
        Head::Softmax(2 + (seed as usize % 4))
    } else {
        Head::Sigmoid
    };
    check_network(seed, head)
}

/// Counts (identical, same-class, cross-class) over every ordered index
/// pair with i <= j.
pub fn brute_force_pairs(labels: &[usize]) -> (usize, usize, usize) {
    let (mut ident, mut same, mut diff) = (0, 0, 0);
    for i in 0..labels.len() {
        for j in 0..labels.len() {
            if i > j {
                continue;
            }
            if i == j {
                ident += 1;
            } else if labels[i] == labels[j] {
                same += 1;
            } else {
                diff += 1;
            }
        }
    }
    (ident, same, diff)
}

/// Batch G-mean from a full confusion matrix over the classes that occur.
pub fn confusion_gmean(k: usize, pairs: &[(usize, usize)]) -> f64 {
    let mut cm = vec![vec![0u64; k]; k];
    for &(y, p) in pairs {
        cm[y][p] += 1;
    }
    let recalls: Vec<f64> = (0..k)
        .filter(|&c| cm[c].iter().sum::<u64>() > 0)
        .map(|c| cm[c][c] as f64 / cm[c].iter().sum::<u64>() as f64)
        .collect();
    if recalls.is_empty() || recalls.contains(&0.0) {
        return 0.0;
    }
    let log_mean = recalls.iter().map(|r| r.ln()).sum::<f64>() / recalls.len() as f64;
    log_mean.exp()
}

/// `n` random (true, predicted) pairs over `k` classes.
pub fn random_stream(rng: &mut ChaCha8Rng, k: usize, n: usize) -> Vec<(usize, usize)> {
    let accuracy: f64 = rng.random_range(0.3..1.0);
    (0..n)
        .map(|_| {
            let y = rng.random_range(0..k);
            let p = if rng.random_bool(accuracy) {
                y
            } else {
                rng.random_range(0..k)
            };
            (y, p)
        })
        .collect()
}
