//! Synthetic exam study: participants of graded skill capture every view,
//! three simulated raters grade each capture, and all frames of a video
//! share the raters' mean scores as labels.

use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::manifest::{parse_jsonl, to_jsonl, ExamRecord};
use crate::data::pgm::{decode_pgm, encode_pgm};
use crate::data::raters::{checklist_score, simulate_raters, true_gi};
use crate::data::render::{jitter, render_frame};
use crate::data::split::Split;
use crate::data::views::{default_views, ViewSpec};
use crate::error::{Error, Result};
use crate::nn::{ImageSet, Target};
use crate::parallel::Executor;
use crate::seed::{derive_seed, derived_rng};

pub const MANIFEST_FILE: &str = "manifest.jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub participants: usize,
    pub frames: usize,
    pub image_size: usize,
    /// Probability that a rater flips any one criterion.
    pub flip_noise: f64,
    /// Standard deviation of a rater's GI error before rounding.
    pub gi_noise: f64,
    pub missing_prob: f64,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            participants: 38,
            frames: 8,
            image_size: 64,
            flip_noise: 0.07,
            gi_noise: 0.35,
            missing_prob: 0.0,
            seed: 0,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        let prob = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{name} must lie in [0, 1], got {p}")))
            }
        };
        prob("flip noise", self.flip_noise)?;
        prob("missing-video probability", self.missing_prob)?;
        if !(self.gi_noise.is_finite() && self.gi_noise >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "GI noise must be finite and non-negative, got {}",
                self.gi_noise
            )));
        }
        if self.participants == 0 || self.frames == 0 {
            return Err(Error::InvalidArgument("participants and frames must be positive".into()));
        }
        if self.image_size < 8 {
            return Err(Error::InvalidArgument(format!(
                "image size must be at least 8, got {}",
                self.image_size
            )));
        }
        Ok(())
    }
}

/// One captured video with its decoded frames.
#[derive(Debug, Clone, PartialEq)]
pub struct Video {
    pub record: ExamRecord,
    /// 8-bit frames, row-major.
    pub frames: Vec<Vec<u8>>,
    /// Ground-truth checklist outcome; known only for freshly generated data.
    pub true_criteria: Option<Vec<bool>>,
    pub skill: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub height: usize,
    pub width: usize,
    pub videos: Vec<Video>,
}

/// Evenly spaced skill in `[0.2, 0.95]` for the 1-based participant.
pub fn participant_skill(participant: usize, participants: usize) -> f64 {
    if participants <= 1 {
        return 0.2;
    }
    0.2 + 0.75 * (participant - 1) as f64 / (participants - 1) as f64
}

pub fn frame_path(participant: u32, view: u8, frame: usize) -> String {
    format!("p{participant}/v{view}/f{frame}.pgm")
}

fn participant_videos(config: &GenConfig, views: &[ViewSpec], participant: usize) -> Result<Vec<Video>> {
    let skill = participant_skill(participant, config.participants);
    let pid = participant as u32;
    let mut videos = Vec::new();
    for view in views {
        let stream = format!("participant/{participant}/view/{}", view.id);
        let mut rng = derived_rng(config.seed, &stream);
        if rng.random_bool(config.missing_prob) {
            continue;
        }
        let p_met = (skill + jitter(&mut rng, 0.1)).clamp(0.0, 1.0);
        let criteria: Vec<bool> = (0..view.k()).map(|_| rng.random_bool(p_met)).collect();
        let cp = checklist_score(&criteria);
        let raters = simulate_raters(
            &criteria,
            true_gi(cp),
            config.flip_noise,
            config.gi_noise,
            derive_seed(config.seed, &format!("{stream}/raters")),
        )?;
        let frames = (0..config.frames)
            .map(|f| {
                let seed = derive_seed(config.seed, &format!("{stream}/frame/{f}"));
                let phase = f as f64 / config.frames as f64;
                render_frame(view, &criteria, phase, seed, config.image_size).map(|img| img.to_u8())
            })
            .collect::<Result<Vec<_>>>()?;
        let video_id = (pid - 1) * views.len() as u32 + u32::from(view.id);
        let paths = (0..config.frames).map(|f| frame_path(pid, view.id, f)).collect();
        videos.push(Video {
            record: ExamRecord::from_raters(pid, view.id, video_id, paths, &raters),
            frames,
            true_criteria: Some(criteria),
            skill: Some(skill),
        });
    }
    Ok(videos)
}

/// Generates the full study in memory. Each participant draws from its own
/// named seed streams, so the result is identical for any `threads`.
pub fn generate_dataset(config: &GenConfig, threads: usize) -> Result<Dataset> {
    config.validate()?;
    let views = default_views();
    let participants: Vec<usize> = (1..=config.participants).collect();
    let exec = Executor::new(threads)?;
    let per_participant = exec.map(&participants, |&p| participant_videos(config, &views, p));
    let mut videos = Vec::new();
    for v in per_participant {
        videos.extend(v?);
    }
    Ok(Dataset {
        height: config.image_size,
        width: config.image_size,
        videos,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

impl Dataset {
    pub fn records(&self) -> impl Iterator<Item = &ExamRecord> {
        self.videos.iter().map(|v| &v.record)
    }

    pub fn frame_count(&self) -> usize {
        self.videos.iter().map(|v| v.frames.len()).sum()
    }

    pub fn participants(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = self.records().map(|r| r.participant_id).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    /// Writes every frame as PGM plus `manifest.jsonl` under `root`.
    pub fn write(&self, root: &Path) -> Result<()> {
        for video in &self.videos {
            for (path, frame) in video.record.frame_paths.iter().zip(&video.frames) {
                write_file(&root.join(path), &encode_pgm(self.width, self.height, frame)?)?;
            }
        }
        let records: Vec<ExamRecord> = self.records().cloned().collect();
        write_file(&root.join(MANIFEST_FILE), to_jsonl(&records).as_bytes())
    }

    /// Reads a dataset written by [`Dataset::write`].
    pub fn load(root: &Path) -> Result<Dataset> {
        let manifest_path = root.join(MANIFEST_FILE);
        let text = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
        let records = parse_jsonl(&text)?;
        let mut size: Option<(usize, usize)> = None;
        let mut videos = Vec::with_capacity(records.len());
        for record in records {
            let mut frames = Vec::with_capacity(record.frame_paths.len());
            for rel in &record.frame_paths {
                let path: PathBuf = root.join(rel);
                let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
                let pgm = decode_pgm(&bytes)?;
                if pgm.maxval != 255 {
                    return Err(Error::format("pgm", format!("{rel}: expected 8-bit samples")));
                }
                match size {
                    None => size = Some((pgm.height, pgm.width)),
                    Some(s) if s != (pgm.height, pgm.width) => {
                        return Err(Error::format(
                            "pgm",
                            format!("{rel}: {}×{} differs from {}×{}", pgm.width, pgm.height, s.1, s.0),
                        ))
                    }
                    Some(_) => {}
                }
                frames.push(pgm.samples.iter().map(|&s| s as u8).collect());
            }
            videos.push(Video {
                record,
                frames,
                true_criteria: None,
                skill: None,
            });
        }
        let (height, width) = size.ok_or(Error::Empty("dataset"))?;
        Ok(Dataset { height, width, videos })
    }

    /// Videos whose participant is in `participants`.
    pub fn subset(&self, participants: &[u32]) -> Dataset {
        Dataset {
            height: self.height,
            width: self.width,
            videos: self
                .videos
                .iter()
                .filter(|v| participants.contains(&v.record.participant_id))
                .cloned()
                .collect(),
        }
    }

    pub fn split(&self, split: &Split) -> (Dataset, Dataset) {
        (self.subset(&split.train), self.subset(&split.test))
    }

    /// Every frame as a training sample labelled with its video's mean score
    /// (normalized by the target's scale) and 0-based view.
    pub fn image_set(&self, target: Target) -> ImageSet {
        let mut set = ImageSet::new(self.height, self.width);
        for video in &self.videos {
            let label = match target {
                Target::Cp => video.record.mean_cp,
                Target::Gi => video.record.mean_gi,
            } / target.scale();
            let view = usize::from(video.record.view_id) - 1;
            for frame in &video.frames {
                let pixels: Vec<f64> = frame.iter().map(|&b| f64::from(b) / 255.0).collect();
                set.push(&pixels, label, view).expect("frames share the dataset size");
            }
        }
        set
    }

    /// Video id of each frame, in [`Dataset::image_set`] order.
    pub fn frame_video_ids(&self) -> Vec<u32> {
        self.videos
            .iter()
            .flat_map(|v| std::iter::repeat_n(v.record.video_id, v.frames.len()))
            .collect()
    }
}
