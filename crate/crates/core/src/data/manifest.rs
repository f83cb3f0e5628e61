//! JSON-lines manifest: one [`ExamRecord`] per captured video.

use std::path::{Component, Path};

use serde::{Deserialize, Serialize};

use crate::data::raters::{mean_cp, mean_gi, RaterRecord, GI_MAX, RATERS};
use crate::data::views::NUM_VIEWS;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExamRecord {
    pub participant_id: u32,
    pub view_id: u8,
    pub video_id: u32,
    /// Frame files relative to the dataset root.
    pub frame_paths: Vec<String>,
    /// One 0/1 array of checklist outcomes per rater.
    pub rater_criteria: Vec<Vec<u8>>,
    pub rater_gi: Vec<u8>,
    pub mean_cp: f64,
    pub mean_gi: f64,
}

fn invalid(detail: impl Into<String>) -> Error {
    Error::format("manifest", detail)
}

impl ExamRecord {
    pub fn from_raters(
        participant_id: u32,
        view_id: u8,
        video_id: u32,
        frame_paths: Vec<String>,
        raters: &[RaterRecord],
    ) -> Self {
        ExamRecord {
            participant_id,
            view_id,
            video_id,
            frame_paths,
            rater_criteria: raters
                .iter()
                .map(|r| r.criteria.iter().map(|&b| u8::from(b)).collect())
                .collect(),
            rater_gi: raters.iter().map(|r| r.gi).collect(),
            mean_cp: mean_cp(raters),
            mean_gi: mean_gi(raters),
        }
    }

    /// Rater grades decoded back into records.
    pub fn raters(&self) -> Vec<RaterRecord> {
        self.rater_criteria
            .iter()
            .zip(&self.rater_gi)
            .map(|(c, &gi)| RaterRecord {
                criteria: c.iter().map(|&b| b == 1).collect(),
                gi,
            })
            .collect()
    }

    /// Checklist length of this record's view.
    pub fn k(&self) -> usize {
        self.rater_criteria.first().map_or(0, Vec::len)
    }

    /// Per-rater criteria percentages.
    pub fn rater_cps(&self) -> Vec<f64> {
        self.raters()
            .iter()
            .map(|r| mean_cp(std::slice::from_ref(r)))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.view_id == 0 || usize::from(self.view_id) > NUM_VIEWS {
            return Err(invalid(format!("view_id {} not in 1..={NUM_VIEWS}", self.view_id)));
        }
        if self.frame_paths.is_empty() {
            return Err(invalid(format!("video {} lists no frames", self.video_id)));
        }
        for p in &self.frame_paths {
            let safe = Path::new(p)
                .components()
                .all(|c| matches!(c, Component::Normal(_)));
            if p.is_empty() || !safe {
                return Err(invalid(format!("frame path {p:?} must be relative and stay inside the dataset")));
            }
        }
        if self.rater_criteria.len() != RATERS || self.rater_gi.len() != RATERS {
            return Err(invalid(format!("video {} must have {RATERS} raters", self.video_id)));
        }
        let k = self.k();
        if k == 0 || self.rater_criteria.iter().any(|c| c.len() != k) {
            return Err(invalid(format!("video {} has ragged or empty checklists", self.video_id)));
        }
        if self.rater_criteria.iter().flatten().any(|&b| b > 1) {
            return Err(invalid(format!("video {} has a non-binary criterion", self.video_id)));
        }
        if self.rater_gi.iter().any(|&g| g > GI_MAX) {
            return Err(invalid(format!("video {} has GI above {GI_MAX}", self.video_id)));
        }
        let raters = self.raters();
        if (mean_cp(&raters) - self.mean_cp).abs() > 1e-9 || (mean_gi(&raters) - self.mean_gi).abs() > 1e-9 {
            return Err(invalid(format!(
                "video {} mean labels disagree with rater grades",
                self.video_id
            )));
        }
        Ok(())
    }
}

/// One JSON object per line, `\n`-terminated.
pub fn to_jsonl(records: &[ExamRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records always serialize"));
        out.push('\n');
    }
    out
}

/// Parses and validates a manifest. Blank lines are ignored; video ids must be unique.
pub fn parse_jsonl(text: &str) -> Result<Vec<ExamRecord>> {
    let mut records: Vec<ExamRecord> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: ExamRecord = serde_json::from_str(line)
            .map_err(|e| invalid(format!("line {}: {e}", i + 1)))?;
        record
            .validate()
            .map_err(|e| invalid(format!("line {}: {e}", i + 1)))?;
        if records.iter().any(|r| r.video_id == record.video_id) {
            return Err(invalid(format!("line {}: duplicate video_id {}", i + 1, record.video_id)));
        }
        records.push(record);
    }
    Ok(records)
}
