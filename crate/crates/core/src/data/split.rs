use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::seed::derived_rng;

/// Participant ids on each side of a train/test partition, sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<u32>,
    pub test: Vec<u32>,
}

pub const DEFAULT_TRAIN_FRACTION: f64 = 32.0 / 38.0;

/// Partitions participants so nobody appears on both sides; the train side
/// gets `round(n·train_fraction)` participants chosen by a seeded shuffle.
pub fn split_by_participant(participants: &[u32], train_fraction: f64, seed: u64) -> Result<Split> {
    let mut ids = participants.to_vec();
    ids.sort_unstable();
    ids.dedup();
    if ids.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 participants to split, got {}",
            ids.len()
        )));
    }
    let n_train = (ids.len() as f64 * train_fraction).round();
    if !n_train.is_finite() || n_train < 1.0 || n_train >= ids.len() as f64 {
        return Err(Error::InvalidArgument(format!(
            "train fraction {train_fraction} leaves one side of a {}-participant split empty",
            ids.len()
        )));
    }
    ids.shuffle(&mut derived_rng(seed, "split"));
    let (train, test) = ids.split_at(n_train as usize);
    let (mut train, mut test) = (train.to_vec(), test.to_vec());
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split { train, test })
}
