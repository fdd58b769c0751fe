use super::matrix::Matrix;
use crate::error::{Error, Result};

const CLAMP: f64 = 1e-7;

/// Mean binary cross-entropy and its gradient with respect to the
/// predictions. Predictions are clamped to `[1e-7, 1 - 1e-7]` before the log.
pub fn bce_loss(predictions: &Matrix, targets: &[f64]) -> Result<(f64, Matrix)> {
    let n = predictions.as_slice().len();
    if targets.len() != n {
        return Err(Error::ShapeMismatch {
            op: "bce_loss",
            expected: predictions.shape(),
            found: (targets.len(), 1),
        });
    }
    if n == 0 {
        return Err(Error::EmptyData("bce_loss predictions"));
    }
    let nf = n as f64;
    let mut loss = 0.0;
    let mut grad = Matrix::zeros(predictions.rows(), predictions.cols());
    for ((g, &p), &t) in grad.as_mut_slice().iter_mut().zip(predictions.as_slice()).zip(targets) {
        let p = p.clamp(CLAMP, 1.0 - CLAMP);
        loss -= t * libm::log(p) + (1.0 - t) * libm::log(1.0 - p);
        *g = (-t / p + (1.0 - t) / (1.0 - p)) / nf;
    }
    Ok((loss / nf, grad))
}
