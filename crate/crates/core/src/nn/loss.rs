//! Cross-entropy losses on clamped probabilities, and their fused gradients
//! w.r.t. the logits of a sigmoid or softmax head.

use crate::scalar::Scalar;

/// Probabilities are clamped to `[PROB_CLIP, 1 - PROB_CLIP]` before logs.
pub const PROB_CLIP: f64 = 1e-7;

fn clip<S: Scalar>(p: S) -> S {
    let eps = S::lit(PROB_CLIP);
    p.max(eps).min(S::one() - eps)
}

/// Binary cross-entropy of target `y` in {0, 1} against `p`.
pub fn bce<S: Scalar>(y: S, p: S) -> S {
    let p = clip(p);
    -(y * p.ln() + (S::one() - y) * (S::one() - p).ln())
}

/// Categorical cross-entropy of class `y` against the simplex vector `p`.
pub fn cce<S: Scalar>(y: usize, p: &[S]) -> S {
    -clip(p[y]).ln()
}

/// d bce / d logit for a sigmoid head.
#[inline]
pub fn bce_logit_grad<S: Scalar>(y: S, p: S) -> S {
    p - y
}

/// d cce / d logits for a softmax head.
pub fn cce_logit_grad<S: Scalar>(y: usize, p: &[S]) -> Vec<S> {
    let mut g = p.to_vec();
    g[y] -= S::one();
    g
}
