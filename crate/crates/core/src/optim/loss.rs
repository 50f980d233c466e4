use crate::error::{Error, Result};

/// Mean squared error over all entries and its gradient
/// `2 (pred - target) / len`.
pub fn mse_loss(pred: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>)> {
    if pred.len() != target.len() {
        return Err(Error::Dimension {
            expected: pred.len(),
            found: target.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::Contract("loss of an empty batch".into()));
    }
    let n = pred.len() as f64;
    let diff: Vec<f64> = pred.iter().zip(target).map(|(p, t)| p - t).collect();
    let loss = diff.iter().map(|d| d * d).sum::<f64>() / n;
    let grad = diff.iter().map(|d| 2.0 * d / n).collect();
    Ok((loss, grad))
}
