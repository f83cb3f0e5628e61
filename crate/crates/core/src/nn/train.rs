use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Model, Output, VIEW_CLASSES};
use crate::nn::adam::{adam_step, AdamConfig, AdamState};
use crate::ops;
use crate::parallel::Executor;
use crate::seed::derived_rng;
use crate::tensor::Tensor;

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "TEEGRADE_THREADS";

/// Samples per unit of parallel work. Gradients are summed within a chunk
/// and then across chunks in chunk order, so results do not depend on the
/// number of threads.
pub const CHUNK_SIZE: usize = 8;

/// Reads `TEEGRADE_THREADS`, defaulting to 1.
pub fn thread_count_from_env() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(1),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(Error::InvalidArgument(format!(
                "{THREADS_ENV} must be a positive integer, got {s:?}"
            ))),
        },
    }
}

/// Which manual score a network regresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Cp,
    Gi,
}

impl Target {
    /// Maximum of the score range; training targets are divided by it.
    pub fn scale(self) -> f64 {
        match self {
            Target::Cp => 100.0,
            Target::Gi => 4.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Target::Cp => "cp",
            Target::Gi => "gi",
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cp" => Ok(Target::Cp),
            "gi" => Ok(Target::Gi),
            _ => Err(Error::InvalidArgument(format!("unknown target {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    /// Seed of the shuffle stream.
    pub seed: u64,
    pub target: Target,
    /// Weight of the view cross-entropy term; 0 trains the score head alone.
    pub lambda: f64,
    pub shuffle: bool,
    pub threads: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            batch_size: 32,
            adam: AdamConfig::default(),
            seed: 0,
            target: Target::Cp,
            lambda: 0.1,
            shuffle: true,
            threads: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument("batch size must be at least 1".into()));
        }
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "view-loss weight must be finite and non-negative, got {}",
                self.lambda
            )));
        }
        if !(self.adam.lr.is_finite() && self.adam.lr > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be positive, got {}",
                self.adam.lr
            )));
        }
        if self.threads == 0 {
            return Err(Error::InvalidArgument("thread count must be at least 1".into()));
        }
        Ok(())
    }
}

/// Grayscale images with normalized score targets and 0-based view labels.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ImageSet {
    pub height: usize,
    pub width: usize,
    /// `n·h·w` pixels in `[0, 1]`.
    pub pixels: Vec<f64>,
    pub targets: Vec<f64>,
    pub views: Vec<usize>,
}

impl ImageSet {
    pub fn new(height: usize, width: usize) -> Self {
        ImageSet {
            height,
            width,
            ..Default::default()
        }
    }

    pub fn push(&mut self, pixels: &[f64], target: f64, view: usize) -> Result<()> {
        if pixels.len() != self.height * self.width {
            return Err(Error::shape(
                "ImageSet::push",
                format!(
                    "expected {}×{} image, got {} pixels",
                    self.height,
                    self.width,
                    pixels.len()
                ),
            ));
        }
        self.pixels.extend_from_slice(pixels);
        self.targets.push(target);
        self.views.push(view);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Every image bilinearly resized to `height×width`.
    pub fn resized(&self, height: usize, width: usize) -> Result<ImageSet> {
        if (height, width) == (self.height, self.width) {
            return Ok(self.clone());
        }
        let area = self.height * self.width;
        let mut out = ImageSet::new(height, width);
        for i in 0..self.len() {
            let image = Tensor::new(
                &[1, self.height, self.width],
                self.pixels[i * area..(i + 1) * area].to_vec(),
            )?;
            let resized = ops::resize_bilinear(&image, height, width)?;
            out.push(resized.data(), self.targets[i], self.views[i])?;
        }
        Ok(out)
    }

    /// `(k, 1, h, w)` tensor of the selected images.
    pub fn images(&self, indices: &[usize]) -> Result<Tensor> {
        let area = self.height * self.width;
        let mut data = Vec::with_capacity(indices.len() * area);
        for &i in indices {
            data.extend_from_slice(&self.pixels[i * area..(i + 1) * area]);
        }
        Tensor::new(&[indices.len(), 1, self.height, self.width], data)
    }
}

/// One aligned slice of training data.
pub struct Batch {
    pub images: Tensor,
    pub targets: Vec<f64>,
    pub views: Vec<usize>,
    /// Position of this batch within its epoch, for diagnostics.
    pub index: usize,
}

impl Batch {
    pub fn from_set(set: &ImageSet, indices: &[usize], index: usize) -> Result<Self> {
        Ok(Batch {
            images: set.images(indices)?,
            targets: indices.iter().map(|&i| set.targets[i]).collect(),
            views: indices.iter().map(|&i| set.views[i]).collect(),
            index,
        })
    }

    fn len(&self) -> usize {
        self.targets.len()
    }
}

struct ChunkResult {
    squared_error: f64,
    cross_entropy: f64,
    grads: Vec<Tensor>,
}

fn chunk_gradients(
    model: &Model,
    batch: &Batch,
    range: (usize, usize),
    lambda: f64,
    batch_len: f64,
) -> Result<ChunkResult> {
    let (start, count) = range;
    let images = batch.images.rows(start, count)?;
    let targets = &batch.targets[start..start + count];
    let views = &batch.views[start..start + count];
    let (out, trace) = model.forward_traced(&images)?;

    let squared_error = out
        .scores
        .iter()
        .zip(targets)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    let d_scores = Tensor::new(
        &[count, 1],
        out.scores
            .iter()
            .zip(targets)
            .map(|(p, t)| 2.0 * (p - t) / batch_len)
            .collect(),
    )?;

    let (cross_entropy, d_logits) = if lambda > 0.0 {
        let mean = ops::cross_entropy_loss(&out.view_logits, views)?;
        let mut g = ops::cross_entropy_backward(&out.view_logits, views)?;
        // cross_entropy_backward averages over the chunk; rescale to the batch.
        g.scale(lambda * count as f64 / batch_len);
        (mean * count as f64, g)
    } else {
        (0.0, Tensor::zeros(&[count, VIEW_CLASSES]))
    };
    let grads = model.backward(trace, &d_scores, &d_logits)?;
    Ok(ChunkResult {
        squared_error,
        cross_entropy,
        grads,
    })
}

fn backprop_with(model: &mut Model, batch: &Batch, lambda: f64, exec: &Executor) -> Result<f64> {
    let n = batch.len();
    if n == 0 || batch.images.shape()[0] != n || batch.views.len() != n {
        return Err(Error::shape(
            "backprop",
            format!(
                "{} images, {} targets, {} view labels",
                batch.images.shape()[0],
                n,
                batch.views.len()
            ),
        ));
    }
    let ranges: Vec<(usize, usize)> = (0..n)
        .step_by(CHUNK_SIZE)
        .map(|s| (s, CHUNK_SIZE.min(n - s)))
        .collect();
    let frozen: &Model = model;
    let results = exec.map(&ranges, |&r| chunk_gradients(frozen, batch, r, lambda, n as f64));

    let mut squared_error = 0.0;
    let mut cross_entropy = 0.0;
    model.params.zero_grad();
    for result in results {
        let result = result?;
        squared_error += result.squared_error;
        cross_entropy += result.cross_entropy;
        for (p, g) in model.params.iter_mut().zip(&result.grads) {
            p.grad.add_assign(g)?;
        }
    }
    let loss = squared_error / n as f64 + lambda * cross_entropy / n as f64;
    if !loss.is_finite() {
        return Err(Error::NonFiniteLoss {
            batch: batch.index,
            loss,
        });
    }
    Ok(loss)
}

/// Total loss `mse(score) + λ·cross_entropy(view)` for one batch, leaving the
/// gradient of that loss in `model.params`.
pub fn backprop(model: &mut Model, batch: &Batch, lambda: f64, threads: usize) -> Result<f64> {
    let exec = Executor::new(threads)?;
    backprop_with(model, batch, lambda, &exec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_rmse: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub history: Vec<EpochRecord>,
    pub steps: u64,
}

impl TrainOutcome {
    /// CSV with header `epoch,train_loss,val_rmse`.
    pub fn history_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,val_rmse\n");
        for r in &self.history {
            let val = r.val_rmse.map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{},{}\n", r.epoch, r.train_loss, val));
        }
        out
    }
}

/// Forward pass over a whole set in fixed-size chunks.
pub(crate) fn predict_set(model: &Model, set: &ImageSet, exec: &Executor) -> Result<Output> {
    const EVAL_CHUNK: usize = 32;
    let ranges: Vec<Vec<usize>> = (0..set.len())
        .step_by(EVAL_CHUNK)
        .map(|s| (s..set.len().min(s + EVAL_CHUNK)).collect())
        .collect();
    let parts = exec.map(&ranges, |idx| model.forward(&set.images(idx)?));
    let mut scores = Vec::with_capacity(set.len());
    let mut logits = Vec::with_capacity(ranges.len());
    for part in parts {
        let part = part?;
        scores.extend(part.scores);
        logits.push(part.view_logits);
    }
    Ok(Output {
        scores,
        view_logits: Tensor::concat(&logits)?,
    })
}

fn scaled_rmse(pred: &[f64], truth: &[f64], scale: f64) -> f64 {
    let mse = pred
        .iter()
        .zip(truth)
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / pred.len() as f64;
    mse.sqrt() * scale
}

/// Trains `model` in place with Adam on mini-batches drawn in seeded order.
pub fn train(
    model: &mut Model,
    data: &ImageSet,
    config: &TrainConfig,
    validation: Option<&ImageSet>,
) -> Result<TrainOutcome> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::Empty("training set"));
    }
    let exec = Executor::new(config.threads)?;
    let mut rng = derived_rng(config.seed, "shuffle");
    let mut state = AdamState::new(&model.params, config.adam);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        if config.shuffle {
            order.shuffle(&mut rng);
        }
        let mut total = 0.0;
        for (index, indices) in order.chunks(config.batch_size).enumerate() {
            let batch = Batch::from_set(data, indices, index)?;
            let loss = backprop_with(model, &batch, config.lambda, &exec)?;
            total += loss * indices.len() as f64;
            adam_step(&mut model.params, &mut state);
        }
        if !model.params.all_finite() {
            return Err(Error::NonFiniteLoss {
                batch: usize::MAX,
                loss: f64::NAN,
            });
        }
        let val_rmse = match validation {
            Some(v) if !v.is_empty() => {
                let out = predict_set(model, v, &exec)?;
                Some(scaled_rmse(&out.scores, &v.targets, config.target.scale()))
            }
            _ => None,
        };
        history.push(EpochRecord {
            epoch,
            train_loss: total / data.len() as f64,
            val_rmse,
        });
    }
    Ok(TrainOutcome {
        history,
        steps: state.t,
    })
}

/// Predictions for every image of `set`, using `threads` workers.
pub fn predict(model: &Model, set: &ImageSet, threads: usize) -> Result<Output> {
    predict_set(model, set, &Executor::new(threads)?)
}
