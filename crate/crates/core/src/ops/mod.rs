//! Numerical kernels and their gradient counterparts.
//!
//! Every kernel is a pure function of its arguments.

mod activation;
mod conv;
mod gemm;
mod linear;
mod loss;
mod pool;
mod resize;

pub use activation::{relu, relu_backward, softmax, softmax_backward};
pub use conv::{conv2d, conv2d_backward, window_output_len, ConvGrads, ConvParams};
pub use linear::{linear, linear_backward, LinearGrads};
pub use loss::{cross_entropy_backward, cross_entropy_loss, mse_loss, mse_loss_backward};
pub use pool::{maxpool2d, maxpool2d_backward, Pooled};
pub use resize::{resize_bilinear, resize_bilinear_backward};
