//! Regression, classification and rater-agreement metrics.

mod agreement;
mod classification;
mod regression;
mod report;

pub use agreement::{icc, krippendorff_alpha, pearson, Icc, RatingsMatrix};
pub use classification::accuracy;
pub use regression::{
    bin_edges, bin_of, grouped_video_stats, interval_rmse, predictions_csv, rmse, BinRmse,
    GroupedStats, VideoStat,
};
pub use report::{agreement, evaluate, AgreementReport, MetricsReport, ViewAgreement};
