use crate::scalar::Scalar;

pub const DEFAULT_LEAKY_SLOPE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    LeakyRelu,
    Sigmoid,
    Softmax,
    Identity,
}

#[inline]
pub fn sigmoid<S: Scalar>(z: S) -> S {
    // split by sign so exp never overflows
    if z >= S::zero() {
        S::one() / (S::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (S::one() + e)
    }
}

/// Elementwise `max(v, slope * v)` for `0 <= slope < 1`.
pub fn leaky_relu<S: Scalar>(v: &[S], slope: S) -> Vec<S> {
    v.iter().map(|&z| z.max(slope * z)).collect()
}

pub fn softmax<S: Scalar>(z: &[S]) -> Vec<S> {
    let mut out = z.to_vec();
    softmax_in_place(&mut out);
    out
}

pub(crate) fn softmax_in_place<S: Scalar>(z: &mut [S]) {
    let max = z.iter().copied().fold(S::neg_infinity(), S::max);
    let mut total = S::zero();
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        total += *v;
    }
    for v in z.iter_mut() {
        *v /= total;
    }
}

impl Activation {
    pub(crate) fn apply<S: Scalar>(self, pre: &[S], out: &mut [S], slope: S) {
        match self {
            Activation::LeakyRelu => {
                for (o, &z) in out.iter_mut().zip(pre) {
                    *o = if z > S::zero() { z } else { slope * z };
                }
            }
            Activation::Sigmoid => {
                for (o, &z) in out.iter_mut().zip(pre) {
                    *o = sigmoid(z);
                }
            }
            Activation::Softmax => {
                out.copy_from_slice(pre);
                softmax_in_place(out);
            }
            Activation::Identity => out.copy_from_slice(pre),
        }
    }

    /// Maps `d_act` (gradient w.r.t. the activation output) to the gradient
    /// w.r.t. the pre-activation, in place.
    pub(crate) fn backprop<S: Scalar>(self, pre: &[S], act: &[S], d: &mut [S], slope: S) {
        match self {
            Activation::LeakyRelu => {
                for (g, &z) in d.iter_mut().zip(pre) {
                    if z <= S::zero() {
                        *g *= slope;
                    }
                }
            }
            Activation::Sigmoid => {
                for (g, &a) in d.iter_mut().zip(act) {
                    *g *= a * (S::one() - a);
                }
            }
            Activation::Softmax => {
                let dot: S = d.iter().zip(act).map(|(&g, &a)| g * a).sum();
                for (g, &a) in d.iter_mut().zip(act) {
                    *g = a * (*g - dot);
                }
            }
            Activation::Identity => {}
        }
    }
}
