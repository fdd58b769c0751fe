//! The patrol GAN: a generator mapping 100-d Gaussian noise to a normalized
//! 2-D location, and a discriminator scoring locations as real or generated.
//! The conditional variant appends a one-hot group label to both inputs.
//!
//! Coordinates are mapped affinely from the city bounding box to `[-1, 1]²`,
//! matching the generator's tanh output range.

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodata::{BoundingBox, LatLon};
use crate::neuralnet::{bce_loss, Adam, AdamConfig, BatchNorm, Dense, Dropout, Layer, LeakyRelu, Matrix, Pass, Sequential, Sigmoid, Tanh, LEAKY_SLOPE};
use crate::seed::{derive, rng_from};
use crate::simulate::RaceGroup;

pub const LATENT_DIM: usize = 100;
pub const DISCRIMINATOR_DROPOUT: f64 = 0.3;

/// Side length of the validation histogram used for concentration checks.
pub const DIAGNOSTIC_GRID: usize = 5;
pub const DIAGNOSTIC_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { epochs: 200, batch_size: 64, lr: 2e-4, beta1: 0.5, beta2: 0.999, seed: 0 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.batch_size >= 1
            && self.lr > 0.0
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(alloc::format!("{self:?}")))
        }
    }

    fn adam(&self) -> AdamConfig {
        AdamConfig { lr: self.lr, beta1: self.beta1, beta2: self.beta2, eps: 1e-8 }
    }

    /// Batch size actually used for `n` training points: shrinks to
    /// `max(n/2, 2)` when fewer than two full batches are available.
    pub fn effective_batch(&self, n: usize) -> usize {
        if n >= 2 * self.batch_size {
            self.batch_size.max(2)
        } else {
            (n / 2).max(2)
        }
    }
}

/// How well generated samples cover the training data on a coarse grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationDiagnostics {
    /// Total-variation distance between real and generated cell shares.
    pub total_variation: f64,
    /// Smallest generated/real share ratio over cells holding ≥ 5% of the data.
    pub worst_cell_ratio: f64,
    /// Some well-populated cell receives under 70% of its real share.
    pub mode_collapsed: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LossHistory {
    pub g_loss: Vec<f64>,
    pub d_loss: Vec<f64>,
    pub diagnostics: Option<ConcentrationDiagnostics>,
}

impl LossHistory {
    pub fn epochs(&self) -> usize {
        self.g_loss.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GanModel {
    pub generator: Sequential,
    pub discriminator: Sequential,
    pub latent_dim: usize,
    /// Number of one-hot label slots; zero for the unconditional model.
    pub label_count: usize,
    pub bbox: BoundingBox,
    pub seed: u64,
    pub g_opt: Adam,
    pub d_opt: Adam,
}

pub fn normalize_coords(p: LatLon, bbox: &BoundingBox) -> [f64; 2] {
    [
        2.0 * (p.lat - bbox.lat_min) / (bbox.lat_max - bbox.lat_min) - 1.0,
        2.0 * (p.lon - bbox.lon_min) / (bbox.lon_max - bbox.lon_min) - 1.0,
    ]
}

pub fn denormalize_coords(uv: [f64; 2], bbox: &BoundingBox) -> LatLon {
    LatLon::new(
        bbox.lat_min + (uv[0] + 1.0) / 2.0 * (bbox.lat_max - bbox.lat_min),
        bbox.lon_min + (uv[1] + 1.0) / 2.0 * (bbox.lon_max - bbox.lon_min),
    )
}

fn normal_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

fn one_hot(labels: &[usize], width: usize) -> Matrix {
    Matrix::from_fn(labels.len(), width, |r, c| if labels[r] == c { 1.0 } else { 0.0 })
}

impl GanModel {
    /// Freshly initialized generator/discriminator pair.
    pub fn new<R: Rng + ?Sized>(bbox: BoundingBox, label_count: usize, cfg: &TrainConfig, rng: &mut R) -> Self {
        let g_in = LATENT_DIM + label_count;
        let d_in = 2 + label_count;
        let generator = Sequential::new(vec![
            Layer::Dense(Dense::new(g_in, 256, rng)),
            Layer::BatchNorm(BatchNorm::new(256)),
            Layer::LeakyRelu(LeakyRelu::new(LEAKY_SLOPE)),
            Layer::Dense(Dense::new(256, 512, rng)),
            Layer::BatchNorm(BatchNorm::new(512)),
            Layer::LeakyRelu(LeakyRelu::new(LEAKY_SLOPE)),
            Layer::Dense(Dense::new(512, 256, rng)),
            Layer::BatchNorm(BatchNorm::new(256)),
            Layer::LeakyRelu(LeakyRelu::new(LEAKY_SLOPE)),
            Layer::Dense(Dense::new(256, 2, rng)),
            Layer::Tanh(Tanh::default()),
        ]);
        let discriminator = Sequential::new(vec![
            Layer::Dense(Dense::new(d_in, 512, rng)),
            Layer::LeakyRelu(LeakyRelu::new(LEAKY_SLOPE)),
            Layer::Dropout(Dropout::new(DISCRIMINATOR_DROPOUT)),
            Layer::Dense(Dense::new(512, 256, rng)),
            Layer::LeakyRelu(LeakyRelu::new(LEAKY_SLOPE)),
            Layer::Dropout(Dropout::new(DISCRIMINATOR_DROPOUT)),
            Layer::Dense(Dense::new(256, 128, rng)),
            Layer::LeakyRelu(LeakyRelu::new(LEAKY_SLOPE)),
            Layer::Dense(Dense::new(128, 1, rng)),
            Layer::Sigmoid(Sigmoid::default()),
        ]);
        GanModel {
            generator,
            discriminator,
            latent_dim: LATENT_DIM,
            label_count,
            bbox,
            seed: cfg.seed,
            g_opt: Adam::new(cfg.adam()),
            d_opt: Adam::new(cfg.adam()),
        }
    }

    pub fn is_conditional(&self) -> bool {
        self.label_count > 0
    }

    fn generator_input(&self, z: Matrix, labels: Option<&[usize]>) -> Result<Matrix> {
        match labels {
            Some(l) if self.is_conditional() => z.hcat(&one_hot(l, self.label_count)),
            _ => Ok(z),
        }
    }

    /// Generate normalized coordinates for `labels.len()` (or `n`) rows in
    /// inference mode.
    fn generate_normalized<R: Rng + ?Sized>(&self, n: usize, labels: Option<&[usize]>, rng: &mut R) -> Result<Matrix> {
        let z = normal_matrix(n, self.latent_dim, rng);
        let input = self.generator_input(z, labels)?;
        self.generator.infer(&input)
    }

    /// Discriminator scores for normalized coordinates (inference mode).
    pub fn discriminate(&self, normalized: &Matrix, labels: Option<&[usize]>) -> Result<Matrix> {
        let input = match labels {
            Some(l) if self.is_conditional() => normalized.hcat(&one_hot(l, self.label_count))?,
            _ => normalized.clone(),
        };
        self.discriminator.infer(&input)
    }

    fn to_points(&self, m: &Matrix) -> Vec<LatLon> {
        (0..m.rows()).map(|r| denormalize_coords([m.get(r, 0), m.get(r, 1)], &self.bbox)).collect()
    }

    /// Re-create gradient buffers after loading from a checkpoint.
    pub fn reset_grads(&mut self) {
        self.generator.reset_grads();
        self.discriminator.reset_grads();
    }
}

/// Draw `n_officers` patrol locations in inference mode. Rows are generated
/// in order from the RNG stream, so a smaller draw is a prefix of a larger
/// one. Conditional models cycle through the labels.
pub fn sample_patrol<R: Rng + ?Sized>(model: &GanModel, n_officers: usize, rng: &mut R) -> Result<Vec<LatLon>> {
    let labels: Option<Vec<usize>> = model.is_conditional().then(|| (0..n_officers).map(|i| i % model.label_count).collect());
    let out = model.generate_normalized(n_officers, labels.as_deref(), rng)?;
    Ok(model.to_points(&out))
}

/// Draw `n` locations conditioned on `group`.
pub fn sample_conditional<R: Rng + ?Sized>(model: &GanModel, group: RaceGroup, n: usize, rng: &mut R) -> Result<Vec<LatLon>> {
    if !model.is_conditional() {
        return Err(Error::InvalidParameter("model is not conditional".into()));
    }
    let labels = vec![group.index(); n];
    let out = model.generate_normalized(n, Some(&labels), rng)?;
    Ok(model.to_points(&out))
}

/// Train the unconditional patrol GAN on raw locations.
pub fn train_gan(points: &[LatLon], cfg: &TrainConfig, bbox: &BoundingBox) -> Result<(GanModel, LossHistory)> {
    let data = Matrix::from_fn(points.len(), 2, |r, c| normalize_coords(points[r], bbox)[c]);
    train_normalized(&data, None, 0, cfg, bbox)
}

/// Train the label-conditioned GAN. Every group needs at least two examples.
pub fn train_conditional_gan(data: &[(LatLon, RaceGroup)], cfg: &TrainConfig, bbox: &BoundingBox) -> Result<(GanModel, LossHistory)> {
    for g in RaceGroup::ALL {
        if data.iter().filter(|(_, l)| *l == g).count() < 2 {
            return Err(Error::MissingLabel(g.as_str().into()));
        }
    }
    let coords = Matrix::from_fn(data.len(), 2, |r, c| normalize_coords(data[r].0, bbox)[c]);
    let labels: Vec<usize> = data.iter().map(|(_, g)| g.index()).collect();
    train_normalized(&coords, Some(&labels), RaceGroup::ALL.len(), cfg, bbox)
}

/// Training loop over points already mapped to `[-1, 1]²`. One
/// discriminator step then one non-saturating generator step per batch; the
/// last partial batch of each shuffled epoch is dropped.
pub fn train_normalized(
    data: &Matrix,
    labels: Option<&[usize]>,
    label_count: usize,
    cfg: &TrainConfig,
    bbox: &BoundingBox,
) -> Result<(GanModel, LossHistory)> {
    cfg.validate()?;
    if !bbox.is_valid() {
        return Err(Error::InvalidParameter("bounding box is degenerate".into()));
    }
    let n = data.rows();
    if n == 0 {
        return Err(Error::EmptyData("GAN training data"));
    }
    if n < 2 {
        return Err(Error::InsufficientObservations { needed: 2, found: n });
    }
    let mut rng = rng_from(cfg.seed);
    let mut model = GanModel::new(*bbox, label_count, cfg, &mut rng);
    let batch = cfg.effective_batch(n);
    let real_targets: Vec<f64> = core::iter::repeat_n(1.0, batch).chain(core::iter::repeat_n(0.0, batch)).collect();
    let gen_targets = vec![1.0; batch];
    let mut history = LossHistory::default();
    let mut order: Vec<usize> = (0..n).collect();

    for epoch in 0..cfg.epochs {
        shuffle(&mut order, &mut rng);
        let (mut g_sum, mut d_sum, mut batches) = (0.0, 0.0, 0usize);
        for chunk in order.chunks_exact(batch) {
            let batch_labels: Option<Vec<usize>> = labels.map(|l| chunk.iter().map(|&i| l[i]).collect());
            let onehot = batch_labels.as_ref().map(|l| one_hot(l, label_count));
            let with_labels = |m: Matrix| -> Result<Matrix> {
                match &onehot {
                    Some(h) => m.hcat(h),
                    None => Ok(m),
                }
            };

            // discriminator: real rows target 1, generated rows target 0
            let z = normal_matrix(batch, model.latent_dim, &mut rng);
            let fake = model.generator.forward(&with_labels(z)?, &mut Pass::Train(&mut rng))?;
            let d_input = with_labels(data.select_rows(chunk))?.vcat(&with_labels(fake)?)?;
            let pred = model.discriminator.forward(&d_input, &mut Pass::Train(&mut rng))?;
            let (d_loss, mut d_grad) = bce_loss(&pred, &real_targets)?;
            // sum of the real-batch and fake-batch means
            d_grad.scale(2.0);
            model.discriminator.backward(&d_grad, false)?;
            model.d_opt.step(&mut model.discriminator);

            // generator: maximize log D(G(z))
            let z = normal_matrix(batch, model.latent_dim, &mut rng);
            let fake = model.generator.forward(&with_labels(z)?, &mut Pass::Train(&mut rng))?;
            let pred = model.discriminator.forward(&with_labels(fake)?, &mut Pass::Train(&mut rng))?;
            let (g_loss, g_grad) = bce_loss(&pred, &gen_targets)?;
            let grad_in = model.discriminator.backward(&g_grad, true)?;
            model.generator.backward(&grad_in.select_cols(0..2), false)?;
            model.g_opt.step(&mut model.generator);

            g_sum += g_loss;
            d_sum += 2.0 * d_loss;
            batches += 1;
        }
        let nb = batches.max(1) as f64;
        let (g, d) = (g_sum / nb, d_sum / nb);
        if !g.is_finite() || !d.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        history.g_loss.push(g);
        history.d_loss.push(d);
    }

    let mut diag_rng = rng_from(derive(cfg.seed, "diagnostics"));
    history.diagnostics = Some(concentration_diagnostics(&model, data, labels, &mut diag_rng)?);
    Ok((model, history))
}

fn shuffle<T, R: Rng + ?Sized>(items: &mut [T], rng: &mut R) {
    for i in (1..items.len()).rev() {
        let j = rng.random_range(0..=i);
        items.swap(i, j);
    }
}

fn grid_cell(u: f64, v: f64) -> usize {
    let g = DIAGNOSTIC_GRID as f64;
    let cx = (((u + 1.0) / 2.0 * g) as usize).min(DIAGNOSTIC_GRID - 1);
    let cy = (((v + 1.0) / 2.0 * g) as usize).min(DIAGNOSTIC_GRID - 1);
    cy * DIAGNOSTIC_GRID + cx
}

/// Compare real and generated cell shares on a coarse grid over `[-1, 1]²`.
pub fn concentration_diagnostics<R: Rng + ?Sized>(
    model: &GanModel,
    data: &Matrix,
    labels: Option<&[usize]>,
    rng: &mut R,
) -> Result<ConcentrationDiagnostics> {
    let cells = DIAGNOSTIC_GRID * DIAGNOSTIC_GRID;
    let mut real = vec![0.0; cells];
    for r in 0..data.rows() {
        real[grid_cell(data.get(r, 0).clamp(-1.0, 1.0), data.get(r, 1).clamp(-1.0, 1.0))] += 1.0;
    }
    let nr = data.rows().max(1) as f64;
    real.iter_mut().for_each(|v| *v /= nr);

    let gen_labels: Option<Vec<usize>> = labels.map(|l| (0..DIAGNOSTIC_SAMPLES).map(|_| l[rng.random_range(0..l.len())]).collect());
    let generated = model.generate_normalized(DIAGNOSTIC_SAMPLES, gen_labels.as_deref(), rng)?;
    let mut gen = vec![0.0; cells];
    for r in 0..generated.rows() {
        gen[grid_cell(generated.get(r, 0), generated.get(r, 1))] += 1.0 / DIAGNOSTIC_SAMPLES as f64;
    }

    let total_variation = real.iter().zip(&gen).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0;
    let worst_cell_ratio = real
        .iter()
        .zip(&gen)
        .filter(|(r, _)| **r >= 0.05)
        .map(|(r, g)| g / r)
        .fold(f64::INFINITY, f64::min);
    Ok(ConcentrationDiagnostics {
        total_variation,
        worst_cell_ratio,
        mode_collapsed: worst_cell_ratio < 0.7,
    })
}

/// Replace `⌊fraction·n⌋` uniformly chosen real records with synthetic ones
/// drawn round-robin over the three groups (counts equal to within one).
/// Kept real records come first in their original order.
pub fn rebalance_training_set<R: Rng + ?Sized>(
    real: &[(LatLon, RaceGroup)],
    model: &GanModel,
    replace_fraction: f64,
    rng: &mut R,
) -> Result<Vec<(LatLon, RaceGroup)>> {
    if !(0.0..1.0).contains(&replace_fraction) {
        return Err(Error::InvalidParameter(alloc::format!("replace_fraction {replace_fraction} outside [0, 1)")));
    }
    if !model.is_conditional() {
        return Err(Error::InvalidParameter("rebalancing needs a conditional model".into()));
    }
    let n = real.len();
    let k = libm::floor(replace_fraction * n as f64) as usize;
    if k == 0 {
        return Ok(real.to_vec());
    }
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        idx.swap(i, j);
    }
    let mut removed = vec![false; n];
    idx[..k].iter().for_each(|&i| removed[i] = true);

    let mut out: Vec<(LatLon, RaceGroup)> = real.iter().zip(&removed).filter(|(_, r)| !**r).map(|(x, _)| *x).collect();
    let mut counts = [0usize; 3];
    for i in 0..k {
        counts[i % 3] += 1;
    }
    for (g, &c) in RaceGroup::ALL.iter().zip(&counts) {
        let pts = sample_conditional(model, *g, c, rng)?;
        out.extend(pts.into_iter().map(|p| (p, *g)));
    }
    Ok(out)
}
