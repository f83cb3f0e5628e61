//! Automated image-quality grading for transoesophageal echocardiography
//! views: tensor kernels with exact gradients, dual-head CNNs that regress a
//! quality score while classifying the view, a synthetic multi-rater exam
//! generator, and the agreement and error metrics used to evaluate them.

pub mod data;
pub mod error;
pub mod gradcheck;
pub mod metrics;
pub mod model;
pub mod nn;
pub mod ops;
pub mod parallel;
pub mod seed;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::Tensor;
