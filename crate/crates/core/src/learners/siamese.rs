use rand::Rng;

use super::LearnerParams;
use crate::error::Result;
use crate::memory::{Pair, PairSet};
use crate::nn::{loss, sigmoid, Activation, ForwardCache, LayerSpec, Mlp, Radam};
use crate::scalar::Scalar;
use crate::streamgen::Instance;

/// Twin network with one shared embedding. The similarity of two inputs is
/// a sigmoid unit over the elementwise absolute difference of their
/// embeddings.
#[derive(Debug, Clone)]
pub struct SiameseModel<S> {
    embed: Mlp<S>,
    head: Mlp<S>,
    embed_opt: Radam<S>,
    head_opt: Radam<S>,
    batch_size: usize,
}

impl<S: Scalar> SiameseModel<S> {
    pub fn new<R: Rng + ?Sized>(
        params: &LearnerParams,
        input_dim: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let slope = S::lit(params.leaky_slope);
        let embed = Mlp::he_normal(
            Mlp::<S>::layered(input_dim, &params.hidden, None),
            slope,
            rng,
        )?;
        let width = embed.output_dim();
        let head = Mlp::he_normal(
            vec![LayerSpec::new(width, 1, Activation::Sigmoid)],
            slope,
            rng,
        )?;
        Ok(Self::from_parts(embed, head, params))
    }

    pub fn from_parts(embed: Mlp<S>, head: Mlp<S>, params: &LearnerParams) -> Self {
        assert_eq!(
            head.input_dim(),
            embed.output_dim(),
            "head width must match embedding"
        );
        assert_eq!(head.output_dim(), 1, "head must have a single output");
        SiameseModel {
            embed_opt: Radam::new(embed.num_params(), params.optimizer),
            head_opt: Radam::new(head.num_params(), params.optimizer),
            embed,
            head,
            batch_size: params.batch_size,
        }
    }

    pub fn embedding_net(&self) -> &Mlp<S> {
        &self.embed
    }

    pub fn head_net(&self) -> &Mlp<S> {
        &self.head
    }

    pub fn embedding_net_mut(&mut self) -> &mut Mlp<S> {
        &mut self.embed
    }

    pub fn head_net_mut(&mut self) -> &mut Mlp<S> {
        &mut self.head
    }

    pub fn optimizer_steps(&self) -> u64 {
        self.embed_opt.steps()
    }

    pub fn embed(&self, x: &[S]) -> Result<Vec<S>> {
        self.embed.predict(x)
    }

    /// Similarity of two already-embedded inputs.
    pub fn similarity_of_embeddings(&self, e1: &[S], e2: &[S]) -> S {
        let w = self.head.layer_weights(0);
        let b = self.head.layer_biases(0)[0];
        let z = e1
            .iter()
            .zip(e2)
            .zip(w)
            .fold(b, |acc, ((&a, &c), &wi)| acc + wi * (a - c).abs());
        sigmoid(z)
    }

    pub fn similarity(&self, x1: &[S], x2: &[S]) -> Result<S> {
        Ok(self.similarity_of_embeddings(&self.embed(x1)?, &self.embed(x2)?))
    }

    /// Mean binary cross-entropy over `pairs`.
    pub fn loss(&self, instances: &[Instance<S>], pairs: &[Pair]) -> Result<S> {
        let mut total = S::zero();
        for p in pairs {
            let s = self.similarity(&instances[p.a].x, &instances[p.b].x)?;
            total += loss::bce(p.target(), s);
        }
        Ok(total / S::lit(pairs.len() as f64))
    }

    /// Mean-reduced gradients of [`SiameseModel::loss`] w.r.t. the embedding
    /// and head parameters.
    ///
    /// Each referenced instance is embedded once; the upstream gradients of
    /// all pairs touching it are summed before a single backward pass, which
    /// is exact because backpropagation is linear in the upstream gradient.
    pub fn gradients(&self, instances: &[Instance<S>], pairs: &[Pair]) -> Result<(Vec<S>, Vec<S>)> {
        let mut caches: Vec<Option<ForwardCache<S>>> = vec![None; instances.len()];
        for p in pairs {
            for i in [p.a, p.b] {
                if caches[i].is_none() {
                    caches[i] = Some(self.embed.forward(&instances[i].x)?);
                }
            }
        }
        let width = self.embed.output_dim();
        let mut upstream: Vec<Vec<S>> = vec![Vec::new(); instances.len()];
        let mut head_grad = vec![S::zero(); self.head.num_params()];
        let w = self.head.layer_weights(0);
        let scale = S::one() / S::lit(pairs.len() as f64);
        let mut dist = vec![S::zero(); width];

        for p in pairs {
            let ea = caches[p.a].as_ref().expect("embedded").output();
            let eb = caches[p.b].as_ref().expect("embedded").output();
            let mut z = self.head.layer_biases(0)[0];
            for k in 0..width {
                dist[k] = (ea[k] - eb[k]).abs();
                z += w[k] * dist[k];
            }
            let dz = loss::bce_logit_grad(p.target(), sigmoid(z)) * scale;
            for k in 0..width {
                head_grad[k] += dz * dist[k];
            }
            head_grad[width] += dz;
            if p.a == p.b {
                // identical twins: the distance is zero and so is its gradient
                continue;
            }
            for (idx, sign) in [(p.a, S::one()), (p.b, -S::one())] {
                let up = &mut upstream[idx];
                if up.is_empty() {
                    up.resize(width, S::zero());
                }
                for k in 0..width {
                    let diff = ea[k] - eb[k];
                    let dsign = if diff > S::zero() {
                        S::one()
                    } else if diff < S::zero() {
                        -S::one()
                    } else {
                        S::zero()
                    };
                    up[k] += sign * dz * w[k] * dsign;
                }
            }
        }

        let mut embed_grad = vec![S::zero(); self.embed.num_params()];
        for (cache, up) in caches.iter().zip(&upstream) {
            if let (Some(cache), false) = (cache, up.is_empty()) {
                self.embed.backward(cache, up, &mut embed_grad);
            }
        }
        Ok((embed_grad, head_grad))
    }

    /// One optimizer step on one mini-batch of pairs.
    pub fn train_batch(&mut self, instances: &[Instance<S>], pairs: &[Pair]) -> Result<()> {
        let (ge, gh) = self.gradients(instances, pairs)?;
        self.embed_opt.step(self.embed.params_mut(), &ge);
        self.head_opt.step(self.head.params_mut(), &gh);
        Ok(())
    }

    /// One pass over `set` in its stored order; returns the mini-batch count.
    pub fn train_epoch(&mut self, set: &PairSet<S>) -> Result<usize> {
        let mut batches = 0;
        for chunk in set.pairs().chunks(self.batch_size) {
            self.train_batch(set.instances(), chunk)?;
            batches += 1;
        }
        Ok(batches)
    }

    pub fn is_finite(&self) -> bool {
        self.embed.is_finite() && self.head.is_finite()
    }
}
