use crate::error::{Error, Result};
use crate::tensor::Tensor;

fn same_shape(pred: &Tensor, target: &Tensor, op: &'static str) -> Result<()> {
    if pred.shape() != target.shape() {
        return Err(Error::shape(
            op,
            format!("pred {:?} vs target {:?}", pred.shape(), target.shape()),
        ));
    }
    Ok(())
}

/// Mean of squared elementwise differences.
pub fn mse_loss(pred: &Tensor, target: &Tensor) -> Result<f64> {
    same_shape(pred, target, "mse_loss")?;
    let sum: f64 = pred
        .data()
        .iter()
        .zip(target.data())
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok(sum / pred.len() as f64)
}

/// `2(pred − target)/n`.
pub fn mse_loss_backward(pred: &Tensor, target: &Tensor) -> Result<Tensor> {
    same_shape(pred, target, "mse_loss_backward")?;
    let n = pred.len() as f64;
    let data = pred
        .data()
        .iter()
        .zip(target.data())
        .map(|(p, t)| 2.0 * (p - t) / n)
        .collect();
    Tensor::new(pred.shape(), data)
}

fn check_labels(logits: &Tensor, labels: &[usize], op: &'static str) -> Result<usize> {
    let &[batch, classes] = logits.shape() else {
        return Err(Error::shape(op, format!("expected (batch, d), got {:?}", logits.shape())));
    };
    if labels.len() != batch {
        return Err(Error::shape(
            op,
            format!("{} labels for batch of {batch}", labels.len()),
        ));
    }
    if let Some(&label) = labels.iter().find(|&&l| l >= classes) {
        return Err(Error::LabelOutOfRange { label, classes });
    }
    Ok(classes)
}

fn log_sum_exp(row: &[f64]) -> f64 {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + row.iter().map(|&v| (v - max).exp()).sum::<f64>().ln()
}

/// Batch mean of `−log softmax(logits)[label]`.
pub fn cross_entropy_loss(logits: &Tensor, labels: &[usize]) -> Result<f64> {
    let d = check_labels(logits, labels, "cross_entropy_loss")?;
    let total: f64 = logits
        .data()
        .chunks_exact(d)
        .zip(labels)
        .map(|(row, &l)| log_sum_exp(row) - row[l])
        .sum();
    Ok(total / labels.len() as f64)
}

/// `(softmax(logits) − onehot(label)) / batch`.
pub fn cross_entropy_backward(logits: &Tensor, labels: &[usize]) -> Result<Tensor> {
    let d = check_labels(logits, labels, "cross_entropy_backward")?;
    let batch = labels.len() as f64;
    let mut out = Vec::with_capacity(logits.len());
    for (row, &l) in logits.data().chunks_exact(d).zip(labels) {
        let lse = log_sum_exp(row);
        out.extend(row.iter().enumerate().map(|(j, &v)| {
            let p = (v - lse).exp();
            (if j == l { p - 1.0 } else { p }) / batch
        }));
    }
    Tensor::new(logits.shape(), out)
}
