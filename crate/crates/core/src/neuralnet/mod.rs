//! A small dense-network engine with hand-written backpropagation.
//!
//! Everything is `f64` and row-major. Layers cache what their backward pass
//! needs during `forward`, so a forward/backward pair must not interleave
//! with another forward on the same layer.

mod adam;
mod layers;
mod loss;
mod matrix;
mod network;

pub use adam::{adam_step, Adam, AdamConfig};
pub use layers::{sigmoid, BatchNorm, Dense, Dropout, Layer, LeakyRelu, Pass, Sigmoid, Tanh};
pub use loss::bce_loss;
pub use matrix::Matrix;
pub use network::Sequential;

/// Negative slope used by every LeakyReLU in the patrol networks.
pub const LEAKY_SLOPE: f64 = 0.2;
