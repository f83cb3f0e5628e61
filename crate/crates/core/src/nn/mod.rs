//! Trainable networks: parameter storage, initialization, backpropagation
//! and the Adam optimizer.

mod adam;
mod init;
mod params;
mod train;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use init::init_params;
pub use params::{Param, ParamStore};
pub use train::{
    backprop, predict, thread_count_from_env, train, Batch, EpochRecord, ImageSet, Target, TrainConfig,
    TrainOutcome, CHUNK_SIZE, THREADS_ENV,
};
