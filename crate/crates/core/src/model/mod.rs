//! The two dual-head architectures and per-video grouping of predictions.

mod checkpoint;
mod network;
mod spec;
mod video;

pub use checkpoint::{Checkpoint, Dtype, TrainingMeta, FORMAT_VERSION, MAGIC};
pub use network::{build_model, Model, Output};
pub use spec::{Arch, Layer, ModelSpec, SCORE_LAYER, VIEW_CLASSES, VIEW_LAYER};
pub use video::{majority_vote, mean_and_sigma, predict_video, VideoPrediction};
