use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::scalar::Scalar;

/// `out_dim x in_dim` weights drawn from `Normal(0, sqrt(2 / in_dim))`,
/// stored input-major (`w[i * out_dim + o]`).
pub fn he_normal_init<S: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    in_dim: usize,
    out_dim: usize,
) -> Vec<S> {
    assert!(in_dim >= 1 && out_dim >= 1, "layer dims must be positive");
    let std = (2.0 / in_dim as f64).sqrt();
    let normal = Normal::new(0.0, std).expect("finite positive std");
    (0..in_dim * out_dim)
        .map(|_| S::lit(normal.sample(rng)))
        .collect()
}
