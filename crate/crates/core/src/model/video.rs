use crate::error::{Error, Result};
use crate::model::network::Model;
use crate::model::spec::VIEW_CLASSES;
use crate::tensor::Tensor;

/// Aggregate estimate for one captured video.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoPrediction {
    pub mean_score: f64,
    /// Population standard deviation of the per-frame scores.
    pub sigma: f64,
    /// Majority-vote view class (0-based), lowest class on ties.
    pub view: usize,
    pub frame_scores: Vec<f64>,
}

/// Mean and population standard deviation.
pub fn mean_and_sigma(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::Empty("mean_and_sigma"));
    }
    let n = values.len() as f64;
    // Offsetting by the first sample keeps the mean of identical values exact.
    let first = values[0];
    let mean = first + values.iter().map(|v| v - first).sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Ok((mean, var.sqrt()))
}

/// Lowest class with the highest vote count.
pub fn majority_vote(classes: &[usize], num_classes: usize) -> Result<usize> {
    if classes.is_empty() {
        return Err(Error::Empty("majority_vote"));
    }
    let mut counts = vec![0usize; num_classes];
    for &c in classes {
        *counts
            .get_mut(c)
            .ok_or(Error::LabelOutOfRange { label: c, classes: num_classes })? += 1;
    }
    Ok(counts
        .iter()
        .enumerate()
        .fold(0, |best, (i, &n)| if n > counts[best] { i } else { best }))
}

/// Groups the frame-level outputs of one video. `scale` converts normalized
/// scores back to the metric's range (100 for CP, 4 for GI).
pub fn predict_video(model: &Model, frames: &Tensor, scale: f64) -> Result<VideoPrediction> {
    if frames.shape().first().copied().unwrap_or(0) == 0 {
        return Err(Error::Empty("predict_video"));
    }
    let out = model.forward(frames)?;
    let frame_scores: Vec<f64> = out.scores.iter().map(|s| s * scale).collect();
    let (mean_score, sigma) = mean_and_sigma(&frame_scores)?;
    let view = majority_vote(&out.predicted_views(), VIEW_CLASSES)?;
    Ok(VideoPrediction {
        mean_score,
        sigma,
        view,
        frame_scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_model, Arch, ModelSpec};

    #[test]
    fn two_frame_statistics() {
        assert_eq!(mean_and_sigma(&[40.0, 60.0]).unwrap(), (50.0, 10.0));
        assert!(mean_and_sigma(&[]).is_err());
    }

    #[test]
    fn vote_ties_go_to_lowest_class() {
        assert_eq!(majority_vote(&[3, 1, 3, 1], 10).unwrap(), 1);
        assert_eq!(majority_vote(&[7, 7, 2], 10).unwrap(), 7);
        assert!(majority_vote(&[10], 10).is_err());
    }

    #[test]
    fn identical_frames_have_zero_spread() {
        let m = build_model(ModelSpec::default_for(Arch::AlexnetMini).unwrap(), 5).unwrap();
        let frame = Tensor::from_fn(&[1, 1, 64, 64], |i| (i % 13) as f64 / 13.0);
        let frames = Tensor::concat(&[frame.clone(), frame.clone(), frame.clone()]).unwrap();
        let video = predict_video(&m, &frames, 100.0).unwrap();
        let single = m.forward(&frame).unwrap().scores[0] * 100.0;
        assert_eq!(video.sigma, 0.0);
        assert_eq!(video.mean_score, single);
    }
}
