//! Deterministic synthetic stand-in for a simulator-based TEE exam study.

mod generate;
mod manifest;
mod pgm;
mod raters;
mod render;
mod split;
mod views;

pub use generate::{
    frame_path, generate_dataset, participant_skill, Dataset, GenConfig, Video, MANIFEST_FILE,
};
pub use manifest::{parse_jsonl, to_jsonl, ExamRecord};
pub use pgm::{decode_pgm, encode_pgm, Pgm};
pub use raters::{checklist_score, mean_cp, mean_gi, simulate_raters, true_gi, RaterRecord, GI_MAX, RATERS};
pub use render::{layout, pulsation, render_frame, GrayImage, Placed};
pub use split::{split_by_participant, Split, DEFAULT_TRAIN_FRACTION};
pub use views::{default_view, default_views, Criterion, CriterionKind, Shape, Structure, ViewSpec, NUM_VIEWS};
