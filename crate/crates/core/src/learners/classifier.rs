use rand::seq::SliceRandom;
use rand::Rng;

use super::LearnerParams;
use crate::error::Result;
use crate::nn::{loss, Activation, ForwardCache, Mlp, Radam};
use crate::scalar::Scalar;

/// Fully-connected softmax classifier trained with categorical
/// cross-entropy.
#[derive(Debug, Clone)]
pub struct SoftmaxClassifier<S> {
    net: Mlp<S>,
    opt: Radam<S>,
    batch_size: usize,
    grads: Vec<S>,
    cache: ForwardCache<S>,
}

impl<S: Scalar> SoftmaxClassifier<S> {
    pub fn new<R: Rng + ?Sized>(
        params: &LearnerParams,
        input_dim: usize,
        classes: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let specs = Mlp::<S>::layered(
            input_dim,
            &params.hidden,
            Some((classes, Activation::Softmax)),
        );
        let net = Mlp::he_normal(specs, S::lit(params.leaky_slope), rng)?;
        Ok(Self::from_network(net, params))
    }

    pub fn from_network(net: Mlp<S>, params: &LearnerParams) -> Self {
        let n = net.num_params();
        SoftmaxClassifier {
            cache: net.new_cache(),
            net,
            opt: Radam::new(n, params.optimizer),
            batch_size: params.batch_size,
            grads: vec![S::zero(); n],
        }
    }

    pub fn network(&self) -> &Mlp<S> {
        &self.net
    }

    pub fn optimizer(&self) -> &Radam<S> {
        &self.opt
    }

    pub fn probabilities(&self, x: &[S]) -> Result<Vec<S>> {
        self.net.predict(x)
    }

    /// Predicted class (ties to the lowest index) and its probability.
    pub fn predict(&self, x: &[S]) -> Result<(usize, S)> {
        let p = self.probabilities(x)?;
        let c = super::argmax(&p);
        Ok((c, p[c]))
    }

    /// One gradient step on a single mini-batch. Returns the mean loss.
    pub fn train_batch(&mut self, batch: &[(&[S], usize)]) -> Result<S> {
        self.grads.iter_mut().for_each(|g| *g = S::zero());
        let scale = S::one() / S::lit(batch.len() as f64);
        let mut total = S::zero();
        for &(x, y) in batch {
            self.net.forward_into(x, &mut self.cache)?;
            let p = self.cache.output();
            total += loss::cce(y, p);
            let mut delta = loss::cce_logit_grad(y, p);
            delta.iter_mut().for_each(|d| *d *= scale);
            self.net
                .backward_logits(&self.cache, &delta, &mut self.grads);
        }
        self.opt.step(self.net.params_mut(), &self.grads);
        Ok(total * scale)
    }

    /// One shuffled pass over `examples` in mini-batches.
    pub fn train_epoch<R: Rng + ?Sized>(
        &mut self,
        examples: &[(&[S], usize)],
        rng: &mut R,
    ) -> Result<usize> {
        let mut order: Vec<(&[S], usize)> = examples.to_vec();
        order.shuffle(rng);
        let mut batches = 0;
        for chunk in order.chunks(self.batch_size) {
            self.train_batch(chunk)?;
            batches += 1;
        }
        Ok(batches)
    }
}
