use rand::Rng;

use super::activation::Activation;
use super::init::he_normal_init;
use crate::error::{domain, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerSpec {
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn new(in_dim: usize, out_dim: usize, activation: Activation) -> Self {
        LayerSpec {
            in_dim,
            out_dim,
            activation,
        }
    }

    fn weight_len(&self) -> usize {
        self.in_dim * self.out_dim
    }

    fn param_len(&self) -> usize {
        self.weight_len() + self.out_dim
    }
}

/// A stack of dense layers with all parameters in one flat buffer.
///
/// Layer `l` occupies `params[offsets[l]..]`: first its weights, input-major
/// (`w[i * out_dim + o]`), then its `out_dim` biases.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<S> {
    specs: Vec<LayerSpec>,
    offsets: Vec<usize>,
    params: Vec<S>,
    slope: S,
}

/// Per-layer pre-activations and activations of one forward pass.
/// `acts[0]` is the input; `acts[l + 1]` is the output of layer `l`.
#[derive(Debug, Clone, Default)]
pub struct ForwardCache<S> {
    pre: Vec<Vec<S>>,
    acts: Vec<Vec<S>>,
}

impl<S: Scalar> ForwardCache<S> {
    pub fn output(&self) -> &[S] {
        self.acts.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn activations(&self) -> &[Vec<S>] {
        &self.acts
    }
}

fn validate(specs: &[LayerSpec]) -> Result<()> {
    if specs.is_empty() {
        return Err(domain("network needs at least one layer"));
    }
    for (l, s) in specs.iter().enumerate() {
        if s.in_dim == 0 || s.out_dim == 0 {
            return Err(domain(format!("layer {l} has a zero dimension")));
        }
        if l > 0 && specs[l - 1].out_dim != s.in_dim {
            return Err(domain(format!(
                "layer {l} expects {} inputs but the previous layer emits {}",
                s.in_dim,
                specs[l - 1].out_dim
            )));
        }
    }
    Ok(())
}

impl<S: Scalar> Mlp<S> {
    /// All-zero parameters.
    pub fn zeros(specs: Vec<LayerSpec>, slope: S) -> Result<Self> {
        validate(&specs)?;
        let mut offsets = Vec::with_capacity(specs.len());
        let mut total = 0;
        for s in &specs {
            offsets.push(total);
            total += s.param_len();
        }
        Ok(Mlp {
            specs,
            offsets,
            params: vec![S::zero(); total],
            slope,
        })
    }

    /// He-normal weights, zero biases.
    pub fn he_normal<R: Rng + ?Sized>(
        specs: Vec<LayerSpec>,
        slope: S,
        rng: &mut R,
    ) -> Result<Self> {
        let mut net = Self::zeros(specs, slope)?;
        for l in 0..net.specs.len() {
            let spec = net.specs[l];
            let w = he_normal_init::<S, _>(rng, spec.in_dim, spec.out_dim);
            let off = net.offsets[l];
            net.params[off..off + spec.weight_len()].copy_from_slice(&w);
        }
        Ok(net)
    }

    /// `input -> hidden.. -> output` with LeakyReLU hidden layers.
    pub fn layered(
        input: usize,
        hidden: &[usize],
        output: Option<(usize, Activation)>,
    ) -> Vec<LayerSpec> {
        let mut specs = Vec::new();
        let mut prev = input;
        for &h in hidden {
            specs.push(LayerSpec::new(prev, h, Activation::LeakyRelu));
            prev = h;
        }
        if let Some((out, act)) = output {
            specs.push(LayerSpec::new(prev, out, act));
        }
        specs
    }

    pub fn specs(&self) -> &[LayerSpec] {
        &self.specs
    }

    pub fn input_dim(&self) -> usize {
        self.specs[0].in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.specs[self.specs.len() - 1].out_dim
    }

    pub fn slope(&self) -> S {
        self.slope
    }

    pub fn params(&self) -> &[S] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [S] {
        &mut self.params
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|v| v.is_finite())
    }

    pub fn layer_weights(&self, layer: usize) -> &[S] {
        let off = self.offsets[layer];
        &self.params[off..off + self.specs[layer].weight_len()]
    }

    pub fn layer_biases(&self, layer: usize) -> &[S] {
        let spec = self.specs[layer];
        let off = self.offsets[layer] + spec.weight_len();
        &self.params[off..off + spec.out_dim]
    }

    pub fn new_cache(&self) -> ForwardCache<S> {
        let mut acts = vec![vec![S::zero(); self.input_dim()]];
        let mut pre = Vec::with_capacity(self.specs.len());
        for s in &self.specs {
            pre.push(vec![S::zero(); s.out_dim]);
            acts.push(vec![S::zero(); s.out_dim]);
        }
        ForwardCache { pre, acts }
    }

    pub fn forward(&self, x: &[S]) -> Result<ForwardCache<S>> {
        let mut cache = self.new_cache();
        self.forward_into(x, &mut cache)?;
        Ok(cache)
    }

    /// Forward pass reusing the buffers of `cache`.
    pub fn forward_into(&self, x: &[S], cache: &mut ForwardCache<S>) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(domain(format!(
                "input has {} features, network expects {}",
                x.len(),
                self.input_dim()
            )));
        }
        if cache.pre.len() != self.specs.len() {
            *cache = self.new_cache();
        }
        cache.acts[0].copy_from_slice(x);
        for (l, spec) in self.specs.iter().enumerate() {
            let off = self.offsets[l];
            let w = &self.params[off..off + spec.weight_len()];
            let b = &self.params[off + spec.weight_len()..off + spec.param_len()];
            let (before, after) = cache.acts.split_at_mut(l + 1);
            let input = &before[l];
            let z = &mut cache.pre[l];
            z.copy_from_slice(b);
            for (i, &a) in input.iter().enumerate() {
                let row = &w[i * spec.out_dim..(i + 1) * spec.out_dim];
                for (zo, &wo) in z.iter_mut().zip(row) {
                    *zo += a * wo;
                }
            }
            spec.activation.apply(z, &mut after[0], self.slope);
        }
        Ok(())
    }

    /// Head output only.
    pub fn predict(&self, x: &[S]) -> Result<Vec<S>> {
        Ok(self.forward(x)?.output().to_vec())
    }

    /// Accumulates parameter gradients into `grads` given `d_output`, the
    /// loss gradient w.r.t. the network output (after the final activation).
    /// Returns the gradient w.r.t. the input.
    pub fn backward(&self, cache: &ForwardCache<S>, d_output: &[S], grads: &mut [S]) -> Vec<S> {
        let last = self.specs.len() - 1;
        let mut delta = d_output.to_vec();
        self.specs[last].activation.backprop(
            &cache.pre[last],
            &cache.acts[last + 1],
            &mut delta,
            self.slope,
        );
        self.backward_logits(cache, &delta, grads)
    }

    /// Like [`Mlp::backward`] but `d_logits` is already the gradient w.r.t.
    /// the final layer's pre-activation (fused softmax/sigmoid + cross-entropy).
    pub fn backward_logits(
        &self,
        cache: &ForwardCache<S>,
        d_logits: &[S],
        grads: &mut [S],
    ) -> Vec<S> {
        assert_eq!(grads.len(), self.params.len(), "gradient buffer shape");
        assert_eq!(d_logits.len(), self.output_dim(), "output gradient shape");
        let mut delta = d_logits.to_vec();
        let mut l = self.specs.len();
        loop {
            l -= 1;
            let spec = self.specs[l];
            let off = self.offsets[l];
            let input = &cache.acts[l];
            {
                let (gw, gb) = grads[off..off + spec.param_len()].split_at_mut(spec.weight_len());
                for (i, &a) in input.iter().enumerate() {
                    let row = &mut gw[i * spec.out_dim..(i + 1) * spec.out_dim];
                    for (g, &d) in row.iter_mut().zip(&delta) {
                        *g += a * d;
                    }
                }
                for (g, &d) in gb.iter_mut().zip(&delta) {
                    *g += d;
                }
            }
            let w = &self.params[off..off + spec.weight_len()];
            let mut d_in: Vec<S> = (0..spec.in_dim)
                .map(|i| {
                    w[i * spec.out_dim..(i + 1) * spec.out_dim]
                        .iter()
                        .zip(&delta)
                        .map(|(&wo, &d)| wo * d)
                        .sum()
                })
                .collect();
            if l == 0 {
                return d_in;
            }
            self.specs[l - 1].activation.backprop(
                &cache.pre[l - 1],
                &cache.acts[l],
                &mut d_in,
                self.slope,
            );
            delta = d_in;
        }
    }
}
