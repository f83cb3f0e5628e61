use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::seed::rng_from;

pub const RATERS: usize = 3;
pub const GI_MAX: u8 = 4;

/// One rater's grades for one video.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RaterRecord {
    pub criteria: Vec<bool>,
    pub gi: u8,
}

/// Percentage of checklist items met.
pub fn checklist_score(criteria_met: &[bool]) -> f64 {
    if criteria_met.is_empty() {
        return 0.0;
    }
    let met = criteria_met.iter().filter(|&&m| m).count();
    100.0 * met as f64 / criteria_met.len() as f64
}

/// Noise-free general impression implied by a criteria percentage.
pub fn true_gi(cp: f64) -> f64 {
    f64::from(GI_MAX) * cp / 100.0
}

/// Three independent raters: each flips every criterion with probability
/// `flip`, and reports `clamp(round(true_gi + N(0, gi_sigma)), 0, 4)`.
pub fn simulate_raters(
    true_criteria: &[bool],
    true_gi: f64,
    flip: f64,
    gi_sigma: f64,
    seed: u64,
) -> Result<[RaterRecord; RATERS]> {
    if !(0.0..=1.0).contains(&flip) {
        return Err(Error::InvalidArgument(format!("flip probability {flip} outside [0, 1]")));
    }
    if !(gi_sigma.is_finite() && gi_sigma >= 0.0) {
        return Err(Error::InvalidArgument(format!("GI noise {gi_sigma} must be finite and >= 0")));
    }
    let noise = Normal::new(0.0, gi_sigma).expect("sigma checked above");
    let mut rng = rng_from(seed);
    Ok(std::array::from_fn(|_| {
        let criteria = true_criteria
            .iter()
            .map(|&bit| bit ^ rng.random_bool(flip))
            .collect();
        let gi = (true_gi + noise.sample(&mut rng))
            .round()
            .clamp(0.0, f64::from(GI_MAX)) as u8;
        RaterRecord { criteria, gi }
    }))
}

/// Mean criteria percentage over raters: `100·(bits met)/(raters·K)`.
pub fn mean_cp(raters: &[RaterRecord]) -> f64 {
    let total: usize = raters.iter().map(|r| r.criteria.len()).sum();
    if total == 0 {
        return 0.0;
    }
    let met = raters.iter().flat_map(|r| &r.criteria).filter(|&&b| b).count();
    100.0 * met as f64 / total as f64
}

pub fn mean_gi(raters: &[RaterRecord]) -> f64 {
    if raters.is_empty() {
        return 0.0;
    }
    raters.iter().map(|r| f64::from(r.gi)).sum::<f64>() / raters.len() as f64
}
