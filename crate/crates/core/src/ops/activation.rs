use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub fn relu(input: &Tensor) -> Tensor {
    input.map(|v| if v > 0.0 { v } else { 0.0 })
}

/// Passes the upstream gradient where the input was strictly positive.
pub fn relu_backward(input: &Tensor, grad_out: &Tensor) -> Result<Tensor> {
    if input.shape() != grad_out.shape() {
        return Err(Error::shape(
            "relu_backward",
            format!("{:?} vs {:?}", input.shape(), grad_out.shape()),
        ));
    }
    let data = input
        .data()
        .iter()
        .zip(grad_out.data())
        .map(|(&x, &g)| if x > 0.0 { g } else { 0.0 })
        .collect();
    Tensor::new(input.shape(), data)
}

fn rows_of(logits: &Tensor, op: &'static str) -> Result<usize> {
    match logits.shape() {
        &[_, d] => Ok(d),
        s => Err(Error::shape(op, format!("expected (batch, d), got {s:?}"))),
    }
}

/// Row-wise softmax with max subtraction.
pub fn softmax(logits: &Tensor) -> Result<Tensor> {
    let d = rows_of(logits, "softmax")?;
    let mut out = Vec::with_capacity(logits.len());
    for row in logits.data().chunks_exact(d) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let start = out.len();
        out.extend(row.iter().map(|&v| (v - max).exp()));
        let sum: f64 = out[start..].iter().sum();
        for p in &mut out[start..] {
            *p /= sum;
        }
    }
    Tensor::new(logits.shape(), out)
}

/// Gradient through softmax given its output `probs`.
pub fn softmax_backward(probs: &Tensor, grad_out: &Tensor) -> Result<Tensor> {
    let d = rows_of(probs, "softmax_backward")?;
    if probs.shape() != grad_out.shape() {
        return Err(Error::shape(
            "softmax_backward",
            format!("{:?} vs {:?}", probs.shape(), grad_out.shape()),
        ));
    }
    let mut out = Vec::with_capacity(probs.len());
    for (p, g) in probs.data().chunks_exact(d).zip(grad_out.data().chunks_exact(d)) {
        let inner: f64 = p.iter().zip(g).map(|(a, b)| a * b).sum();
        out.extend(p.iter().zip(g).map(|(a, b)| a * (b - inner)));
    }
    Tensor::new(probs.shape(), out)
}
