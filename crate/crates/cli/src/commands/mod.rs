pub mod agreement;
pub mod eval;
pub mod gen;
pub mod gradcheck;
pub mod train;

use anyhow::Result;
use teegrade::nn::thread_count_from_env;

pub fn threads() -> Result<usize> {
    Ok(thread_count_from_env()?)
}
