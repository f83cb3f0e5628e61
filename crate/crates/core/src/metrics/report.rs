use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::agreement::{icc, krippendorff_alpha, pearson, RatingsMatrix};
use super::classification::accuracy;
use super::regression::{grouped_video_stats, interval_rmse, rmse, BinRmse, VideoStat};
use crate::data::{Dataset, ExamRecord};
use crate::error::{Error, Result};
use crate::model::{majority_vote, Model, VIEW_CLASSES};
use crate::nn::{predict, Target};

/// Rater agreement on checklist scores for one view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewAgreement {
    pub view_id: u8,
    pub videos: usize,
    pub icc_single: Option<f64>,
    pub icc_average: Option<f64>,
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub videos: usize,
    pub views: Vec<ViewAgreement>,
    /// Correlation of the rater-mean CP and GI over all videos.
    pub pearson_cp_gi: Option<f64>,
}

impl AgreementReport {
    /// Mean of the defined per-view values picked by `f`.
    pub fn mean_over_views(&self, f: impl Fn(&ViewAgreement) -> Option<f64>) -> Option<f64> {
        let vals: Vec<f64> = self.views.iter().filter_map(f).collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    }
}

/// Per-view ICC and alpha on the rater CPs, plus Pearson of mean CP and GI.
pub fn agreement(records: &[ExamRecord]) -> Result<AgreementReport> {
    if records.is_empty() {
        return Err(Error::Empty("agreement"));
    }
    let mut by_view: BTreeMap<u8, Vec<Vec<f64>>> = BTreeMap::new();
    for r in records {
        by_view.entry(r.view_id).or_default().push(r.rater_cps());
    }
    let views = by_view
        .into_iter()
        .map(|(view_id, rows)| {
            let matrix = RatingsMatrix::from_rows(&rows).ok();
            let coeffs = matrix.as_ref().and_then(|m| icc(m).ok());
            ViewAgreement {
                view_id,
                videos: rows.len(),
                icc_single: coeffs.map(|c| c.single),
                icc_average: coeffs.map(|c| c.average),
                alpha: matrix.as_ref().and_then(|m| krippendorff_alpha(m).ok()),
            }
        })
        .collect();
    let cp: Vec<f64> = records.iter().map(|r| r.mean_cp).collect();
    let gi: Vec<f64> = records.iter().map(|r| r.mean_gi).collect();
    Ok(AgreementReport {
        videos: records.len(),
        views,
        pearson_cp_gi: pearson(&cp, &gi).ok(),
    })
}

/// Full evaluation summary written as `metrics.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub target: Target,
    pub frames: usize,
    pub videos: usize,
    pub overall_rmse: f64,
    pub interval_rmse: Vec<BinRmse>,
    pub grouped_rmse: f64,
    pub mean_sigma: f64,
    pub grouped_interval_rmse: Vec<BinRmse>,
    /// Frame-level view classification accuracy.
    pub view_accuracy: f64,
    /// Accuracy of the per-video majority vote.
    pub video_view_accuracy: f64,
    pub agreement: AgreementReport,
    #[serde(skip)]
    pub per_video: Vec<VideoStat>,
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// Scores `model` on every frame of `data` and assembles the full report.
pub fn evaluate(model: &Model, data: &Dataset, target: Target, threads: usize) -> Result<MetricsReport> {
    let set = data
        .image_set(target)
        .resized(model.spec.input_height, model.spec.input_width)?;
    if set.is_empty() {
        return Err(Error::Empty("evaluation set"));
    }
    let out = predict(model, &set, threads)?;
    let scale = target.scale();
    let pred: Vec<f64> = out.scores.iter().map(|s| s * scale).collect();
    let truth: Vec<f64> = set.targets.iter().map(|t| t * scale).collect();
    let predicted_views = out.predicted_views();

    let video_ids = data.frame_video_ids();
    let frames: Vec<(u32, f64)> = video_ids.iter().copied().zip(pred.iter().copied()).collect();
    let video_truth: BTreeMap<u32, f64> = data
        .records()
        .map(|r| (r.video_id, target_value(r, target)))
        .collect();
    let grouped = grouped_video_stats(&frames, &video_truth)?;

    let mut votes: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (id, view) in video_ids.iter().zip(&predicted_views) {
        votes.entry(*id).or_default().push(*view);
    }
    let mut video_pred = Vec::with_capacity(votes.len());
    let mut video_true = Vec::with_capacity(votes.len());
    for r in data.records() {
        video_pred.push(majority_vote(&votes[&r.video_id], VIEW_CLASSES)?);
        video_true.push(usize::from(r.view_id) - 1);
    }

    let means: Vec<f64> = grouped.videos.iter().map(|v| v.mean_pred).collect();
    let truths: Vec<f64> = grouped.videos.iter().map(|v| v.truth).collect();
    Ok(MetricsReport {
        target,
        frames: set.len(),
        videos: grouped.videos.len(),
        overall_rmse: rmse(&pred, &truth)?,
        interval_rmse: interval_rmse(&pred, &truth, target)?,
        grouped_rmse: grouped.rmse,
        mean_sigma: grouped.mean_sigma,
        grouped_interval_rmse: interval_rmse(&means, &truths, target)?,
        view_accuracy: accuracy(&predicted_views, &set.views)?,
        video_view_accuracy: accuracy(&video_pred, &video_true)?,
        agreement: agreement(&data.records().cloned().collect::<Vec<_>>())?,
        per_video: grouped.videos,
    })
}

fn target_value(record: &ExamRecord, target: Target) -> f64 {
    match target {
        Target::Cp => record.mean_cp,
        Target::Gi => record.mean_gi,
    }
}
