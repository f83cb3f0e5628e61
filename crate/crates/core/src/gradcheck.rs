//! Central finite-difference verification of every kernel's gradient.
//!
//! Each trial draws small random operands (at most 64 elements per tensor),
//! reduces the kernel output to a scalar with a random projection, and
//! compares the analytic gradient of that scalar against central
//! differences.

use std::fmt;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::ops::{self, ConvParams};
use crate::seed::derived_rng;
use crate::tensor::Tensor;

pub const STEP: f64 = 1e-5;
pub const TOLERANCE: f64 = 1e-4;
/// Gradients smaller than this are compared absolutely rather than relatively.
pub const RELATIVE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    Conv2d,
    Maxpool2d,
    Linear,
    Relu,
    Softmax,
    MseLoss,
    CrossEntropy,
    ResizeBilinear,
}

impl Kernel {
    pub const ALL: [Kernel; 8] = [
        Kernel::Conv2d,
        Kernel::Maxpool2d,
        Kernel::Linear,
        Kernel::Relu,
        Kernel::Softmax,
        Kernel::MseLoss,
        Kernel::CrossEntropy,
        Kernel::ResizeBilinear,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kernel::Conv2d => "conv2d",
            Kernel::Maxpool2d => "maxpool2d",
            Kernel::Linear => "linear",
            Kernel::Relu => "relu",
            Kernel::Softmax => "softmax",
            Kernel::MseLoss => "mse_loss",
            Kernel::CrossEntropy => "cross_entropy",
            Kernel::ResizeBilinear => "resize_bilinear",
        }
    }

    pub fn from_name(name: &str) -> Option<Kernel> {
        Kernel::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelReport {
    pub kernel: Kernel,
    pub trials: usize,
    pub max_rel_error: f64,
    pub passed: bool,
}

/// Options for a gradient-check sweep.
#[derive(Debug, Clone)]
pub struct GradCheck {
    pub trials: usize,
    pub seed: u64,
    pub tolerance: f64,
    /// Test hook: add a bias to this kernel's analytic gradient.
    pub corrupt: Option<Kernel>,
}

impl Default for GradCheck {
    fn default() -> Self {
        GradCheck {
            trials: 100,
            seed: 0,
            tolerance: TOLERANCE,
            corrupt: None,
        }
    }
}

type ValueFn = Box<dyn Fn(&[Tensor]) -> Result<f64>>;
type GradFn = Box<dyn Fn(&[Tensor]) -> Result<Vec<Tensor>>>;

/// One differentiable scalar function of several tensors.
struct Case {
    inputs: Vec<Tensor>,
    value: ValueFn,
    /// Analytic gradient with respect to every input, in order.
    grad: GradFn,
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(RELATIVE_FLOOR)
}

/// Largest relative error between `grad` and central differences of `value`.
fn max_error(case: &Case, corrupt: bool) -> Result<f64> {
    let mut analytic = (case.grad)(&case.inputs)?;
    if corrupt {
        for g in &mut analytic {
            for v in g.data_mut() {
                *v += 1e-2;
            }
        }
    }
    let mut inputs = case.inputs.clone();
    let mut worst = 0.0f64;
    for (t, grad) in analytic.iter().enumerate() {
        for i in 0..inputs[t].len() {
            let orig = inputs[t].data()[i];
            inputs[t].data_mut()[i] = orig + STEP;
            let plus = (case.value)(&inputs)?;
            inputs[t].data_mut()[i] = orig - STEP;
            let minus = (case.value)(&inputs)?;
            inputs[t].data_mut()[i] = orig;
            let numeric = (plus - minus) / (2.0 * STEP);
            worst = worst.max(relative_error(grad.data()[i], numeric));
        }
    }
    Ok(worst)
}

fn uniform(rng: &mut ChaCha8Rng, shape: &[usize], lo: f64, hi: f64) -> Tensor {
    Tensor::from_fn(shape, |_| rng.random_range(lo..hi))
}

/// Values bounded away from zero so ReLU's kink is never straddled.
fn away_from_zero(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor {
    Tensor::from_fn(shape, |_| {
        let mag = rng.random_range(0.05..1.0);
        if rng.random_bool(0.5) {
            mag
        } else {
            -mag
        }
    })
}

/// Distinct values on a coarse lattice plus jitter, so pooling windows never
/// have near-ties within the finite-difference step.
fn well_separated(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor {
    let n: usize = shape.iter().product();
    let mut levels: Vec<f64> = (0..n).map(|i| i as f64 * 0.1).collect();
    for i in (1..n).rev() {
        levels.swap(i, rng.random_range(0..=i));
    }
    Tensor::new(shape, levels.into_iter().map(|v| v + rng.random_range(0.0..0.01)).collect())
        .expect("shape product matches")
}

fn project(out: &Tensor, weights: &Tensor) -> f64 {
    out.data().iter().zip(weights.data()).map(|(a, b)| a * b).sum()
}

fn conv_case(rng: &mut ChaCha8Rng) -> Case {
    let n = rng.random_range(1..=2);
    let c = rng.random_range(1..=2);
    let h = rng.random_range(3..=5);
    let w = rng.random_range(3..=5);
    let o = rng.random_range(1..=3);
    let k = rng.random_range(1..=3);
    let stride = rng.random_range(1..=2);
    let pad = rng.random_range(0..=1);
    let input = uniform(rng, &[n, c, h, w], -1.0, 1.0);
    let weight = uniform(rng, &[o, c, k, k], -1.0, 1.0);
    let bias = uniform(rng, &[o], -1.0, 1.0);
    let params = move |x: &[Tensor]| ConvParams {
        weight: x[1].clone(),
        bias: x[2].clone(),
        stride,
        padding: pad,
    };
    let out_shape = ops::conv2d(&input, &params(&[input.clone(), weight.clone(), bias.clone()]))
        .expect("valid conv case")
        .shape()
        .to_vec();
    let r = uniform(rng, &out_shape, -1.0, 1.0);
    let r2 = r.clone();
    Case {
        inputs: vec![input, weight, bias],
        value: Box::new(move |x| Ok(project(&ops::conv2d(&x[0], &params(x))?, &r))),
        grad: Box::new(move |x| {
            let g = ops::conv2d_backward(&x[0], &params(x), &r2)?;
            Ok(vec![g.input, g.weight, g.bias])
        }),
    }
}

fn pool_case(rng: &mut ChaCha8Rng) -> Case {
    let c = rng.random_range(1..=2);
    let h = rng.random_range(2..=5);
    let w = rng.random_range(2..=5);
    let k = rng.random_range(1..=2);
    let stride = rng.random_range(1..=2);
    let input = well_separated(rng, &[1, c, h, w]);
    let shape = ops::maxpool2d(&input, k, stride).expect("valid pool case").output.shape().to_vec();
    let r = uniform(rng, &shape, -1.0, 1.0);
    let r2 = r.clone();
    Case {
        inputs: vec![input],
        value: Box::new(move |x| Ok(project(&ops::maxpool2d(&x[0], k, stride)?.output, &r))),
        grad: Box::new(move |x| {
            let p = ops::maxpool2d(&x[0], k, stride)?;
            Ok(vec![ops::maxpool2d_backward(x[0].shape(), &p.argmax, &r2)?])
        }),
    }
}

fn linear_case(rng: &mut ChaCha8Rng) -> Case {
    let b = rng.random_range(1..=4);
    let i = rng.random_range(1..=8);
    let o = rng.random_range(1..=6);
    let x = uniform(rng, &[b, i], -1.0, 1.0);
    let w = uniform(rng, &[o, i], -1.0, 1.0);
    let bias = uniform(rng, &[o], -1.0, 1.0);
    let r = uniform(rng, &[b, o], -1.0, 1.0);
    let r2 = r.clone();
    Case {
        inputs: vec![x, w, bias],
        value: Box::new(move |x| Ok(project(&ops::linear(&x[0], &x[1], &x[2])?, &r))),
        grad: Box::new(move |x| {
            let g = ops::linear_backward(&x[0], &x[1], &x[2], &r2)?;
            Ok(vec![g.input, g.weight, g.bias])
        }),
    }
}

fn relu_case(rng: &mut ChaCha8Rng) -> Case {
    let n = rng.random_range(1..=64);
    let x = away_from_zero(rng, &[n]);
    let r = uniform(rng, &[n], -1.0, 1.0);
    let r2 = r.clone();
    Case {
        inputs: vec![x],
        value: Box::new(move |x| Ok(project(&ops::relu(&x[0]), &r))),
        grad: Box::new(move |x| Ok(vec![ops::relu_backward(&x[0], &r2)?])),
    }
}

fn softmax_case(rng: &mut ChaCha8Rng) -> Case {
    let b = rng.random_range(1..=4);
    let d = rng.random_range(2..=10);
    let x = uniform(rng, &[b, d], -3.0, 3.0);
    let r = uniform(rng, &[b, d], -1.0, 1.0);
    let r2 = r.clone();
    Case {
        inputs: vec![x],
        value: Box::new(move |x| Ok(project(&ops::softmax(&x[0])?, &r))),
        grad: Box::new(move |x| Ok(vec![ops::softmax_backward(&ops::softmax(&x[0])?, &r2)?])),
    }
}

fn mse_case(rng: &mut ChaCha8Rng) -> Case {
    let n = rng.random_range(1..=32);
    let pred = uniform(rng, &[n, 1], -1.0, 1.0);
    let target = uniform(rng, &[n, 1], -1.0, 1.0);
    Case {
        inputs: vec![pred, target],
        value: Box::new(|x| ops::mse_loss(&x[0], &x[1])),
        grad: Box::new(|x| {
            let g = ops::mse_loss_backward(&x[0], &x[1])?;
            let neg = g.map(|v| -v);
            Ok(vec![g, neg])
        }),
    }
}

fn cross_entropy_case(rng: &mut ChaCha8Rng) -> Case {
    let b = rng.random_range(1..=4);
    let d = rng.random_range(2..=10);
    let logits = uniform(rng, &[b, d], -3.0, 3.0);
    let labels: Vec<usize> = (0..b).map(|_| rng.random_range(0..d)).collect();
    let l2 = labels.clone();
    Case {
        inputs: vec![logits],
        value: Box::new(move |x| ops::cross_entropy_loss(&x[0], &labels)),
        grad: Box::new(move |x| Ok(vec![ops::cross_entropy_backward(&x[0], &l2)?])),
    }
}

fn resize_case(rng: &mut ChaCha8Rng) -> Case {
    let c = rng.random_range(1..=2);
    let h = rng.random_range(1..=5);
    let w = rng.random_range(1..=5);
    let oh = rng.random_range(1..=6);
    let ow = rng.random_range(1..=6);
    let img = uniform(rng, &[c, h, w], -1.0, 1.0);
    let r = uniform(rng, &[c, oh, ow], -1.0, 1.0);
    let r2 = r.clone();
    Case {
        inputs: vec![img],
        value: Box::new(move |x| Ok(project(&ops::resize_bilinear(&x[0], oh, ow)?, &r))),
        grad: Box::new(move |x| Ok(vec![ops::resize_bilinear_backward(x[0].shape(), &r2)?])),
    }
}

fn make_case(kernel: Kernel, rng: &mut ChaCha8Rng) -> Case {
    match kernel {
        Kernel::Conv2d => conv_case(rng),
        Kernel::Maxpool2d => pool_case(rng),
        Kernel::Linear => linear_case(rng),
        Kernel::Relu => relu_case(rng),
        Kernel::Softmax => softmax_case(rng),
        Kernel::MseLoss => mse_case(rng),
        Kernel::CrossEntropy => cross_entropy_case(rng),
        Kernel::ResizeBilinear => resize_case(rng),
    }
}

impl GradCheck {
    pub fn run_kernel(&self, kernel: Kernel) -> Result<KernelReport> {
        let mut rng = derived_rng(self.seed, &format!("gradcheck/{kernel}"));
        let mut worst = 0.0f64;
        for _ in 0..self.trials {
            let case = make_case(kernel, &mut rng);
            worst = worst.max(max_error(&case, self.corrupt == Some(kernel))?);
        }
        Ok(KernelReport {
            kernel,
            trials: self.trials,
            max_rel_error: worst,
            passed: worst < self.tolerance,
        })
    }

    pub fn run_all(&self) -> Result<Vec<KernelReport>> {
        Kernel::ALL.into_iter().map(|k| self.run_kernel(k)).collect()
    }
}
