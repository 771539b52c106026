//! Dense feed-forward networks trained by backpropagation and Rectified Adam.

mod activation;
mod init;
pub mod loss;
mod mlp;
mod radam;

pub use activation::{leaky_relu, sigmoid, softmax, Activation, DEFAULT_LEAKY_SLOPE};
pub use init::he_normal_init;
pub use mlp::{ForwardCache, LayerSpec, Mlp};
pub use radam::{Radam, RadamConfig};
