use crate::error::{Error, Result};

/// Fraction of matching labels.
pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::shape(
            "accuracy",
            format!("{} predictions for {} labels", pred.len(), truth.len()),
        ));
    }
    if pred.is_empty() {
        return Err(Error::Empty("accuracy"));
    }
    let hits = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / pred.len() as f64)
}
