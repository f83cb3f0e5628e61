use crate::error::{Error, Result};
use crate::model::spec::{Layer, ModelSpec, SCORE_LAYER, VIEW_CLASSES};
use crate::nn::{init_params, ParamStore};
use crate::ops::{self, ConvParams};
use crate::tensor::Tensor;

/// A dual-head network: architecture plus its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub spec: ModelSpec,
    pub params: ParamStore,
}

/// Per-image outputs of both heads.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    /// Normalized score estimate for each image.
    pub scores: Vec<f64>,
    /// `(n, 10)` pre-softmax view activations.
    pub view_logits: Tensor,
}

impl Output {
    pub fn view_probabilities(&self) -> Result<Tensor> {
        ops::softmax(&self.view_logits)
    }

    /// Argmax view class per image (lowest index on ties).
    pub fn predicted_views(&self) -> Vec<usize> {
        self.view_logits
            .data()
            .chunks_exact(VIEW_CLASSES)
            .map(|row| {
                row.iter()
                    .enumerate()
                    .fold(0, |best, (i, &v)| if v > row[best] { i } else { best })
            })
            .collect()
    }
}

enum Saved {
    Input(Tensor),
    Pool { input_shape: Vec<usize>, argmax: Vec<usize> },
    Shape(Vec<usize>),
}

/// Activations retained by a training forward pass.
pub(crate) struct Trace {
    saved: Vec<Saved>,
    view_logits: Tensor,
}

fn param_name(layer: &str, kind: &str) -> String {
    format!("{layer}.{kind}")
}

/// Builds a model from `spec` with freshly initialized parameters.
pub fn build_model(spec: ModelSpec, seed: u64) -> Result<Model> {
    Model::new(spec, seed)
}

impl Model {
    pub fn new(spec: ModelSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let params = init_params(&spec, seed)?;
        Ok(Model { spec, params })
    }

    /// Wraps existing parameters, checking names and shapes against `spec`.
    pub fn from_parts(spec: ModelSpec, params: ParamStore) -> Result<Self> {
        let expected = spec.param_shapes()?;
        if expected.len() != params.len() {
            return Err(Error::InvalidArgument(format!(
                "spec needs {} parameter tensors, got {}",
                expected.len(),
                params.len()
            )));
        }
        for ((name, shape), have) in expected.iter().zip(params.iter()) {
            if *name != have.name || shape.as_slice() != have.value.shape() {
                return Err(Error::InvalidArgument(format!(
                    "parameter {} {:?} does not match spec entry {name} {shape:?}",
                    have.name,
                    have.value.shape(),
                )));
            }
        }
        Ok(Model { spec, params })
    }

    fn check_input(&self, images: &Tensor) -> Result<()> {
        let s = &self.spec;
        match images.shape() {
            &[_, c, h, w] if c == s.channels && h == s.input_height && w == s.input_width => Ok(()),
            other => Err(Error::shape(
                "forward",
                format!(
                    "expected (n, {}, {}, {}), got {other:?}",
                    s.channels, s.input_height, s.input_width
                ),
            )),
        }
    }

    fn run(&self, images: &Tensor, mut trace: Option<&mut Vec<Saved>>) -> Result<Output> {
        self.check_input(images)?;
        let mut x = images.clone();
        for layer in &self.spec.layers {
            let next = match layer {
                Layer::Conv {
                    name,
                    stride,
                    padding,
                    ..
                } => {
                    let params = ConvParams {
                        weight: self.params.expect(&param_name(name, "weight"))?.clone(),
                        bias: self.params.expect(&param_name(name, "bias"))?.clone(),
                        stride: *stride,
                        padding: *padding,
                    };
                    ops::conv2d(&x, &params)?
                }
                Layer::Relu => ops::relu(&x),
                Layer::MaxPool { kernel, stride } => {
                    let pooled = ops::maxpool2d(&x, *kernel, *stride)?;
                    if let Some(t) = trace.as_deref_mut() {
                        t.push(Saved::Pool {
                            input_shape: x.shape().to_vec(),
                            argmax: pooled.argmax,
                        });
                    }
                    x = pooled.output;
                    continue;
                }
                Layer::Flatten => {
                    let n = x.shape()[0];
                    let features = x.len() / n;
                    if let Some(t) = trace.as_deref_mut() {
                        t.push(Saved::Shape(x.shape().to_vec()));
                    }
                    x = x.reshape(&[n, features])?;
                    continue;
                }
                Layer::Linear { name, .. } => ops::linear(
                    &x,
                    self.params.expect(&param_name(name, "weight"))?,
                    self.params.expect(&param_name(name, "bias"))?,
                )?,
            };
            if let Some(t) = trace.as_deref_mut() {
                t.push(Saved::Input(x));
            }
            x = next;
        }
        let scores = ops::linear(
            &x,
            self.params.expect(&param_name(SCORE_LAYER, "weight"))?,
            self.params.expect(&param_name(SCORE_LAYER, "bias"))?,
        )?;
        Ok(Output {
            scores: scores.into_data(),
            view_logits: x,
        })
    }

    /// Score and view logits for a batch `(n, channels, h, w)`. Images are
    /// processed independently, so a batch equals its concatenated parts.
    pub fn forward(&self, images: &Tensor) -> Result<Output> {
        self.run(images, None)
    }

    pub(crate) fn forward_traced(&self, images: &Tensor) -> Result<(Output, Trace)> {
        let mut saved = Vec::with_capacity(self.spec.layers.len());
        let out = self.run(images, Some(&mut saved))?;
        let trace = Trace {
            saved,
            view_logits: out.view_logits.clone(),
        };
        Ok((out, trace))
    }

    /// Parameter gradients, in store order, given upstream gradients of the
    /// scores `(n, 1)` and of the view logits `(n, 10)`.
    pub(crate) fn backward(
        &self,
        trace: Trace,
        d_scores: &Tensor,
        d_view_logits: &Tensor,
    ) -> Result<Vec<Tensor>> {
        let mut grads: Vec<Option<Tensor>> = vec![None; self.params.len()];
        let mut put = |name: String, g: Tensor| -> Result<()> {
            let i = self
                .params
                .index_of(&name)
                .ok_or_else(|| Error::InvalidArgument(format!("missing parameter {name}")))?;
            grads[i] = Some(g);
            Ok(())
        };

        let head = ops::linear_backward(
            &trace.view_logits,
            self.params.expect(&param_name(SCORE_LAYER, "weight"))?,
            self.params.expect(&param_name(SCORE_LAYER, "bias"))?,
            d_scores,
        )?;
        put(param_name(SCORE_LAYER, "weight"), head.weight)?;
        put(param_name(SCORE_LAYER, "bias"), head.bias)?;
        let mut dx = head.input;
        dx.add_assign(d_view_logits)?;

        for (layer, saved) in self.spec.layers.iter().zip(trace.saved).rev() {
            dx = match (layer, saved) {
                (
                    Layer::Conv {
                        name,
                        stride,
                        padding,
                        ..
                    },
                    Saved::Input(input),
                ) => {
                    let params = ConvParams {
                        weight: self.params.expect(&param_name(name, "weight"))?.clone(),
                        bias: self.params.expect(&param_name(name, "bias"))?.clone(),
                        stride: *stride,
                        padding: *padding,
                    };
                    let g = ops::conv2d_backward(&input, &params, &dx)?;
                    put(param_name(name, "weight"), g.weight)?;
                    put(param_name(name, "bias"), g.bias)?;
                    g.input
                }
                (Layer::Relu, Saved::Input(input)) => ops::relu_backward(&input, &dx)?,
                (Layer::MaxPool { .. }, Saved::Pool { input_shape, argmax }) => {
                    ops::maxpool2d_backward(&input_shape, &argmax, &dx)?
                }
                (Layer::Flatten, Saved::Shape(shape)) => dx.reshape(&shape)?,
                (Layer::Linear { name, .. }, Saved::Input(input)) => {
                    let g = ops::linear_backward(
                        &input,
                        self.params.expect(&param_name(name, "weight"))?,
                        self.params.expect(&param_name(name, "bias"))?,
                        &dx,
                    )?;
                    put(param_name(name, "weight"), g.weight)?;
                    put(param_name(name, "bias"), g.bias)?;
                    g.input
                }
                _ => unreachable!("trace entries mirror the layer list"),
            };
        }

        Ok(grads
            .into_iter()
            .zip(self.params.iter())
            .map(|(g, p)| g.unwrap_or_else(|| Tensor::zeros(p.value.shape())))
            .collect())
    }
}
