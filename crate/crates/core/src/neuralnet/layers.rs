use alloc::vec;
use alloc::vec::Vec;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::matrix::Matrix;
use crate::error::{Error, Result};

/// Forward-pass mode. Training mode carries the RNG that dropout draws from.
pub enum Pass<'a> {
    Train(&'a mut dyn RngCore),
    Infer,
}

impl Pass<'_> {
    pub fn is_training(&self) -> bool {
        matches!(self, Pass::Train(_))
    }
}

fn missing_cache(op: &'static str) -> Error {
    Error::ShapeMismatch { op, expected: (0, 0), found: (0, 0) }
}

fn check_same(op: &'static str, a: &Matrix, b: &Matrix) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch { op, expected: a.shape(), found: b.shape() });
    }
    Ok(())
}

/// Fully connected layer: `y = x·W + b` with `W` stored `in × out`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub weight: Matrix,
    pub bias: Vec<f64>,
    #[serde(skip)]
    pub grad_weight: Matrix,
    #[serde(skip)]
    pub grad_bias: Vec<f64>,
    #[serde(skip)]
    input: Option<Matrix>,
}

impl Dense {
    /// Glorot-uniform weights, zero bias.
    pub fn new<R: Rng + ?Sized>(fan_in: usize, fan_out: usize, rng: &mut R) -> Self {
        let limit = libm::sqrt(6.0 / (fan_in + fan_out) as f64);
        let weight = Matrix::from_fn(fan_in, fan_out, |_, _| rng.random_range(-limit..=limit));
        Self::from_parts(weight, vec![0.0; fan_out]).expect("shapes agree by construction")
    }

    pub fn from_parts(weight: Matrix, bias: Vec<f64>) -> Result<Self> {
        if bias.len() != weight.cols() {
            return Err(Error::ShapeMismatch {
                op: "Dense::from_parts",
                expected: (1, weight.cols()),
                found: (1, bias.len()),
            });
        }
        Ok(Dense {
            grad_weight: Matrix::zeros(weight.rows(), weight.cols()),
            grad_bias: vec![0.0; bias.len()],
            weight,
            bias,
            input: None,
        })
    }

    pub fn in_features(&self) -> usize {
        self.weight.rows()
    }

    pub fn out_features(&self) -> usize {
        self.weight.cols()
    }

    pub fn forward(&mut self, x: &Matrix) -> Result<Matrix> {
        let mut y = x.matmul(&self.weight)?;
        let cols = y.cols();
        for row in y.as_mut_slice().chunks_exact_mut(cols.max(1)) {
            for (v, b) in row.iter_mut().zip(&self.bias) {
                *v += b;
            }
        }
        self.input = Some(x.clone());
        Ok(y)
    }

    pub fn infer(&self, x: &Matrix) -> Result<Matrix> {
        let mut y = x.matmul(&self.weight)?;
        let cols = y.cols();
        for row in y.as_mut_slice().chunks_exact_mut(cols.max(1)) {
            for (v, b) in row.iter_mut().zip(&self.bias) {
                *v += b;
            }
        }
        Ok(y)
    }

    /// Stores parameter gradients and returns the input gradient when
    /// `need_input_grad` is set (an empty matrix otherwise).
    pub fn backward(&mut self, grad_out: &Matrix, need_input_grad: bool) -> Result<Matrix> {
        let x = self.input.as_ref().ok_or_else(|| missing_cache("Dense::backward"))?;
        if grad_out.rows() != x.rows() || grad_out.cols() != self.out_features() {
            return Err(Error::ShapeMismatch {
                op: "Dense::backward",
                expected: (x.rows(), self.out_features()),
                found: grad_out.shape(),
            });
        }
        self.grad_weight = x.t_matmul(grad_out)?;
        self.grad_bias = grad_out.col_sums();
        if need_input_grad {
            grad_out.matmul_t(&self.weight)
        } else {
            Ok(Matrix::zeros(0, 0))
        }
    }
}

/// Batch normalization over the batch dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchNorm {
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
    pub momentum: f64,
    pub eps: f64,
    #[serde(skip)]
    pub grad_gamma: Vec<f64>,
    #[serde(skip)]
    pub grad_beta: Vec<f64>,
    #[serde(skip)]
    cache: Option<BnCache>,
}

#[derive(Debug, Clone, PartialEq)]
struct BnCache {
    x_hat: Matrix,
    inv_std: Vec<f64>,
    training: bool,
}

impl BatchNorm {
    pub const MOMENTUM: f64 = 0.1;
    pub const EPS: f64 = 1e-5;

    pub fn new(width: usize) -> Self {
        BatchNorm {
            gamma: vec![1.0; width],
            beta: vec![0.0; width],
            running_mean: vec![0.0; width],
            running_var: vec![1.0; width],
            momentum: Self::MOMENTUM,
            eps: Self::EPS,
            grad_gamma: vec![0.0; width],
            grad_beta: vec![0.0; width],
            cache: None,
        }
    }

    pub fn width(&self) -> usize {
        self.gamma.len()
    }

    pub fn forward(&mut self, x: &Matrix, training: bool) -> Result<Matrix> {
        let (n, w) = x.shape();
        if w != self.width() {
            return Err(Error::ShapeMismatch { op: "BatchNorm::forward", expected: (n, self.width()), found: x.shape() });
        }
        let (mean, inv_std) = if training {
            if n < 2 {
                return Err(Error::BatchTooSmall { rows: n });
            }
            let mean = x.col_means();
            let mut var = vec![0.0; w];
            for r in 0..n {
                for (j, v) in x.row(r).iter().enumerate() {
                    let d = v - mean[j];
                    var[j] += d * d;
                }
            }
            let nf = n as f64;
            let m = self.momentum;
            for j in 0..w {
                let biased = var[j] / nf;
                self.running_mean[j] = (1.0 - m) * self.running_mean[j] + m * mean[j];
                self.running_var[j] = (1.0 - m) * self.running_var[j] + m * var[j] / (nf - 1.0);
                var[j] = biased;
            }
            let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / libm::sqrt(v + self.eps)).collect();
            (mean, inv_std)
        } else {
            let inv_std = self.running_var.iter().map(|v| 1.0 / libm::sqrt(v + self.eps)).collect();
            (self.running_mean.clone(), inv_std)
        };

        let x_hat = Matrix::from_fn(n, w, |r, j| (x.get(r, j) - mean[j]) * inv_std[j]);
        let y = Matrix::from_fn(n, w, |r, j| self.gamma[j] * x_hat.get(r, j) + self.beta[j]);
        self.cache = Some(BnCache { x_hat, inv_std, training });
        Ok(y)
    }

    /// Inference-mode normalization with the running statistics.
    pub fn infer(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.width() {
            return Err(Error::ShapeMismatch { op: "BatchNorm::infer", expected: (x.rows(), self.width()), found: x.shape() });
        }
        Ok(Matrix::from_fn(x.rows(), x.cols(), |r, j| {
            let inv_std = 1.0 / libm::sqrt(self.running_var[j] + self.eps);
            self.gamma[j] * (x.get(r, j) - self.running_mean[j]) * inv_std + self.beta[j]
        }))
    }

    pub fn backward(&mut self, grad_out: &Matrix) -> Result<Matrix> {
        let cache = self.cache.as_ref().ok_or_else(|| missing_cache("BatchNorm::backward"))?;
        check_same("BatchNorm::backward", &cache.x_hat, grad_out)?;
        let (n, w) = grad_out.shape();
        let mut dgamma = vec![0.0; w];
        let mut dbeta = vec![0.0; w];
        for r in 0..n {
            for j in 0..w {
                let g = grad_out.get(r, j);
                dgamma[j] += g * cache.x_hat.get(r, j);
                dbeta[j] += g;
            }
        }
        let grad_in = if cache.training {
            // dx = inv_std/N · (N·dx̂ − Σdx̂ − x̂·Σ(dx̂·x̂)), with dx̂ = g·γ
            let nf = n as f64;
            let sum_dxhat: Vec<f64> = (0..w).map(|j| dbeta[j] * self.gamma[j]).collect();
            let sum_dxhat_xhat: Vec<f64> = (0..w).map(|j| dgamma[j] * self.gamma[j]).collect();
            Matrix::from_fn(n, w, |r, j| {
                let dxhat = grad_out.get(r, j) * self.gamma[j];
                cache.inv_std[j] / nf * (nf * dxhat - sum_dxhat[j] - cache.x_hat.get(r, j) * sum_dxhat_xhat[j])
            })
        } else {
            Matrix::from_fn(n, w, |r, j| grad_out.get(r, j) * self.gamma[j] * cache.inv_std[j])
        };
        self.grad_gamma = dgamma;
        self.grad_beta = dbeta;
        Ok(grad_in)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakyRelu {
    pub slope: f64,
    #[serde(skip)]
    input: Option<Matrix>,
}

impl LeakyRelu {
    pub fn new(slope: f64) -> Self {
        LeakyRelu { slope, input: None }
    }

    #[inline]
    pub fn apply(x: f64, slope: f64) -> f64 {
        if x >= 0.0 {
            x
        } else {
            slope * x
        }
    }

    pub fn forward(&mut self, x: &Matrix) -> Matrix {
        let s = self.slope;
        let y = x.map(|v| Self::apply(v, s));
        self.input = Some(x.clone());
        y
    }

    pub fn backward(&mut self, grad_out: &Matrix) -> Result<Matrix> {
        let x = self.input.as_ref().ok_or_else(|| missing_cache("LeakyRelu::backward"))?;
        check_same("LeakyRelu::backward", x, grad_out)?;
        let mut g = grad_out.clone();
        for (gv, xv) in g.as_mut_slice().iter_mut().zip(x.as_slice()) {
            if *xv < 0.0 {
                *gv *= self.slope;
            }
        }
        Ok(g)
    }
}

/// Inverted dropout: training zeroes units with probability `rate` and scales
/// survivors by `1/(1-rate)`; inference is the identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dropout {
    pub rate: f64,
    #[serde(skip)]
    mask: Option<Matrix>,
}

impl Dropout {
    pub fn new(rate: f64) -> Self {
        assert!((0.0..1.0).contains(&rate), "dropout rate must lie in [0, 1)");
        Dropout { rate, mask: None }
    }

    pub fn forward(&mut self, x: &Matrix, pass: &mut Pass<'_>) -> Matrix {
        match pass {
            Pass::Train(rng) if self.rate > 0.0 => {
                let keep = 1.0 / (1.0 - self.rate);
                let rate = self.rate;
                let mask = Matrix::from_fn(x.rows(), x.cols(), |_, _| {
                    if rng.random::<f64>() < rate {
                        0.0
                    } else {
                        keep
                    }
                });
                self.forward_with_mask(x, mask)
            }
            _ => {
                self.mask = None;
                x.clone()
            }
        }
    }

    /// Training-mode forward with a caller-supplied scaled mask.
    pub fn forward_with_mask(&mut self, x: &Matrix, mask: Matrix) -> Matrix {
        let mut y = x.clone();
        for (v, m) in y.as_mut_slice().iter_mut().zip(mask.as_slice()) {
            *v *= m;
        }
        self.mask = Some(mask);
        y
    }

    pub fn backward(&mut self, grad_out: &Matrix) -> Result<Matrix> {
        match &self.mask {
            Some(mask) => {
                check_same("Dropout::backward", mask, grad_out)?;
                let mut g = grad_out.clone();
                for (v, m) in g.as_mut_slice().iter_mut().zip(mask.as_slice()) {
                    *v *= m;
                }
                Ok(g)
            }
            None => Ok(grad_out.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Tanh {
    #[serde(skip)]
    output: Option<Matrix>,
}

impl Tanh {
    pub fn forward(&mut self, x: &Matrix) -> Matrix {
        let y = x.map(libm::tanh);
        self.output = Some(y.clone());
        y
    }

    pub fn backward(&mut self, grad_out: &Matrix) -> Result<Matrix> {
        let y = self.output.as_ref().ok_or_else(|| missing_cache("Tanh::backward"))?;
        check_same("Tanh::backward", y, grad_out)?;
        let mut g = grad_out.clone();
        for (gv, yv) in g.as_mut_slice().iter_mut().zip(y.as_slice()) {
            *gv *= 1.0 - yv * yv;
        }
        Ok(g)
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Sigmoid {
    #[serde(skip)]
    output: Option<Matrix>,
}

impl Sigmoid {
    pub fn forward(&mut self, x: &Matrix) -> Matrix {
        let y = x.map(sigmoid);
        self.output = Some(y.clone());
        y
    }

    pub fn backward(&mut self, grad_out: &Matrix) -> Result<Matrix> {
        let y = self.output.as_ref().ok_or_else(|| missing_cache("Sigmoid::backward"))?;
        check_same("Sigmoid::backward", y, grad_out)?;
        let mut g = grad_out.clone();
        for (gv, yv) in g.as_mut_slice().iter_mut().zip(y.as_slice()) {
            *gv *= yv * (1.0 - yv);
        }
        Ok(g)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Layer {
    Dense(Dense),
    BatchNorm(BatchNorm),
    LeakyRelu(LeakyRelu),
    Dropout(Dropout),
    Tanh(Tanh),
    Sigmoid(Sigmoid),
}

impl Layer {
    pub fn forward(&mut self, x: &Matrix, pass: &mut Pass<'_>) -> Result<Matrix> {
        match self {
            Layer::Dense(l) => l.forward(x),
            Layer::BatchNorm(l) => l.forward(x, pass.is_training()),
            Layer::LeakyRelu(l) => Ok(l.forward(x)),
            Layer::Dropout(l) => Ok(l.forward(x, pass)),
            Layer::Tanh(l) => Ok(l.forward(x)),
            Layer::Sigmoid(l) => Ok(l.forward(x)),
        }
    }

    pub fn backward(&mut self, grad_out: &Matrix, need_input_grad: bool) -> Result<Matrix> {
        match self {
            Layer::Dense(l) => l.backward(grad_out, need_input_grad),
            Layer::BatchNorm(l) => l.backward(grad_out),
            Layer::LeakyRelu(l) => l.backward(grad_out),
            Layer::Dropout(l) => l.backward(grad_out),
            Layer::Tanh(l) => l.backward(grad_out),
            Layer::Sigmoid(l) => l.backward(grad_out),
        }
    }

    /// Inference-mode forward that touches no caches and draws no randomness.
    pub fn infer(&self, x: &Matrix) -> Result<Matrix> {
        match self {
            Layer::Dense(l) => l.infer(x),
            Layer::BatchNorm(l) => l.infer(x),
            Layer::LeakyRelu(l) => {
                let s = l.slope;
                Ok(x.map(|v| LeakyRelu::apply(v, s)))
            }
            Layer::Dropout(_) => Ok(x.clone()),
            Layer::Tanh(_) => Ok(x.map(libm::tanh)),
            Layer::Sigmoid(_) => Ok(x.map(sigmoid)),
        }
    }

    /// Visit (parameters, gradients) pairs in a fixed order.
    pub fn visit_params<F: FnMut(&mut [f64], &[f64])>(&mut self, f: &mut F) {
        match self {
            Layer::Dense(l) => {
                f(l.weight.as_mut_slice(), l.grad_weight.as_slice());
                f(&mut l.bias, &l.grad_bias);
            }
            Layer::BatchNorm(l) => {
                f(&mut l.gamma, &l.grad_gamma);
                f(&mut l.beta, &l.grad_beta);
            }
            _ => {}
        }
    }

    /// Restore gradient buffers after deserialization.
    pub(crate) fn reset_grads(&mut self) {
        match self {
            Layer::Dense(l) => {
                l.grad_weight = Matrix::zeros(l.weight.rows(), l.weight.cols());
                l.grad_bias = vec![0.0; l.bias.len()];
            }
            Layer::BatchNorm(l) => {
                l.grad_gamma = vec![0.0; l.gamma.len()];
                l.grad_beta = vec![0.0; l.beta.len()];
            }
            _ => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_examples() {
        let mut id = Dense::from_parts(Matrix::from_rows(&[&[1.0, 0.0], &[0.0, 1.0]]).unwrap(), vec![0.0, 0.0]).unwrap();
        let x = Matrix::from_rows(&[&[3.0, 4.0]]).unwrap();
        assert_eq!(id.forward(&x).unwrap(), x);

        let mut l = Dense::from_parts(Matrix::from_rows(&[&[2.0]]).unwrap(), vec![1.0]).unwrap();
        let y = l.forward(&Matrix::from_rows(&[&[5.0]]).unwrap()).unwrap();
        assert_eq!(y.get(0, 0), 11.0);

        assert!(l.forward(&x).is_err());
        assert!(Dense::from_parts(Matrix::zeros(2, 2), vec![0.0]).is_err());
    }

    #[test]
    fn activation_examples() {
        assert_eq!(LeakyRelu::apply(-1.0, 0.2), -0.2);
        assert_eq!(LeakyRelu::apply(3.0, 0.2), 3.0);
        assert_eq!(sigmoid(0.0), 0.5);
        assert_eq!(libm::tanh(0.0), 0.0);
        let x = Matrix::from_rows(&[&[1.0, -2.0, 3.0]]).unwrap();
        assert_eq!(Dropout::new(0.3).forward(&x, &mut Pass::Infer), x);
        let big = sigmoid(-800.0);
        assert!(big.is_finite() && big >= 0.0);
    }

    #[test]
    fn batchnorm_identity_on_standardized_input() {
        // columns with mean 0 and biased variance 1
        let x = Matrix::from_rows(&[&[1.0, -1.0], &[-1.0, 1.0], &[1.0, 1.0], &[-1.0, -1.0]]).unwrap();
        let mut bn = BatchNorm::new(2);
        let y = bn.forward(&x, true).unwrap();
        for (a, b) in x.as_slice().iter().zip(y.as_slice()) {
            assert!((a - b).abs() < 1e-5 * 1.0 + 1e-6, "{a} {b}");
        }
    }

    #[test]
    fn batchnorm_constant_column_and_small_batch() {
        let x = Matrix::from_rows(&[&[5.0, 1.0], &[5.0, 2.0], &[5.0, 3.0]]).unwrap();
        let mut bn = BatchNorm::new(2);
        let y = bn.forward(&x, true).unwrap();
        assert!((0..3).all(|r| y.get(r, 0) == 0.0));
        assert_eq!(
            bn.forward(&Matrix::zeros(1, 2), true),
            Err(Error::BatchTooSmall { rows: 1 })
        );
        // inference mode accepts a single row
        assert!(bn.forward(&Matrix::zeros(1, 2), false).is_ok());
        assert!(bn.running_var.iter().all(|v| *v >= 0.0));
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn batchnorm_training_output_is_standardized() {
        let x = Matrix::from_fn(16, 3, |r, c| libm::sin((r * 7 + c * 3) as f64) * (c + 1) as f64 + c as f64);
        let mut bn = BatchNorm::new(3);
        let y = bn.forward(&x, true).unwrap();
        let mean = y.col_means();
        for j in 0..3 {
            assert!(mean[j].abs() < 1e-8);
            let var: f64 = (0..16).map(|r| y.get(r, j).powi(2)).sum::<f64>() / 16.0;
            // epsilon shrinks the variance slightly below one
            assert!((var - 1.0).abs() < 1e-4, "{var}");
        }
    }
}
