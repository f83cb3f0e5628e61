use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::mean_and_sigma;
use crate::nn::Target;

fn check_pair(pred: &[f64], truth: &[f64]) -> Result<()> {
    if pred.len() != truth.len() {
        return Err(Error::shape(
            "rmse",
            format!("{} predictions for {} truths", pred.len(), truth.len()),
        ));
    }
    if pred.is_empty() {
        return Err(Error::Empty("rmse"));
    }
    Ok(())
}

/// Root mean square error.
pub fn rmse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_pair(pred, truth)?;
    let sse: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok((sse / pred.len() as f64).sqrt())
}

/// One score interval of the error breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinRmse {
    pub label: String,
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    /// `None` when no truth value falls in the bin.
    pub rmse: Option<f64>,
}

/// Interior bin edges; bins are lower-inclusive, the last one closed above.
pub fn bin_edges(metric: Target) -> [f64; 3] {
    match metric {
        Target::Cp => [55.0, 75.0, 90.0],
        Target::Gi => [1.8, 2.8, 3.8],
    }
}

/// Index of the bin holding `truth`.
pub fn bin_of(truth: f64, metric: Target) -> usize {
    bin_edges(metric).iter().filter(|&&e| truth >= e).count()
}

fn bin_labels(metric: Target) -> [String; 4] {
    let name = match metric {
        Target::Cp => "CP",
        Target::Gi => "GI",
    };
    let [a, b, c] = bin_edges(metric);
    [
        format!("{name} < {a}"),
        format!("{a} <= {name} < {b}"),
        format!("{b} <= {name} < {c}"),
        format!("{name} >= {c}"),
    ]
}

/// RMSE within each of the four score intervals, binned by truth.
pub fn interval_rmse(pred: &[f64], truth: &[f64], metric: Target) -> Result<Vec<BinRmse>> {
    check_pair(pred, truth)?;
    let mut sse = [0.0; 4];
    let mut count = [0usize; 4];
    for (p, t) in pred.iter().zip(truth) {
        let b = bin_of(*t, metric);
        sse[b] += (p - t) * (p - t);
        count[b] += 1;
    }
    let [a, b, c] = bin_edges(metric);
    let bounds = [0.0, a, b, c, metric.scale()];
    Ok(bin_labels(metric)
        .into_iter()
        .enumerate()
        .map(|(i, label)| BinRmse {
            label,
            lower: bounds[i],
            upper: bounds[i + 1],
            count: count[i],
            rmse: (count[i] > 0).then(|| (sse[i] / count[i] as f64).sqrt()),
        })
        .collect())
}

/// Per-video aggregate of frame predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoStat {
    pub video_id: u32,
    pub truth: f64,
    pub mean_pred: f64,
    pub sigma: f64,
    pub frames: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupedStats {
    pub rmse: f64,
    pub mean_sigma: f64,
    pub videos: Vec<VideoStat>,
}

/// Averages frame predictions per video, then scores the video means against
/// the video truths. `sigma` is the population standard deviation within a
/// video; `mean_sigma` its average over videos.
pub fn grouped_video_stats(frames: &[(u32, f64)], truth: &BTreeMap<u32, f64>) -> Result<GroupedStats> {
    let mut per_video: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    for &(id, p) in frames {
        if !truth.contains_key(&id) {
            return Err(Error::UnknownVideo(id));
        }
        per_video.entry(id).or_default().push(p);
    }
    if truth.is_empty() {
        return Err(Error::Empty("grouped_video_stats"));
    }
    let mut videos = Vec::with_capacity(truth.len());
    for (&video_id, &t) in truth {
        let preds = per_video.get(&video_id).ok_or_else(|| {
            Error::InvalidArgument(format!("video {video_id} has no frame predictions"))
        })?;
        let (mean_pred, sigma) = mean_and_sigma(preds)?;
        videos.push(VideoStat {
            video_id,
            truth: t,
            mean_pred,
            sigma,
            frames: preds.len(),
        });
    }
    let means: Vec<f64> = videos.iter().map(|v| v.mean_pred).collect();
    let truths: Vec<f64> = videos.iter().map(|v| v.truth).collect();
    Ok(GroupedStats {
        rmse: rmse(&means, &truths)?,
        mean_sigma: videos.iter().map(|v| v.sigma).sum::<f64>() / videos.len() as f64,
        videos,
    })
}

/// Per-video CSV with header `video_id,truth,mean_pred,sigma`.
pub fn predictions_csv(videos: &[VideoStat]) -> String {
    let mut out = String::from("video_id,truth,mean_pred,sigma\n");
    for v in videos {
        out.push_str(&format!("{},{},{},{}\n", v.video_id, v.truth, v.mean_pred, v.sigma));
    }
    out
}
