//! Minimal dense network kernel: a zero-hidden-layer logistic probe, a
//! one-hidden-layer ReLU network, binary cross-entropy, mini-batch SGD with
//! an optional L1 penalty, and finite-difference gradient verification.
//!
//! Training is bitwise deterministic for a fixed seed: initialization and
//! shuffling come from a seeded ChaCha stream and gradients are accumulated
//! in row order within each batch.

use crate::dataprep::DatasetMatrix;
use crate::error::{Error, Result};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const BCE_EPS: f64 = 1e-7;

/// Numerically stable logistic function.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Mean binary cross-entropy with predictions clipped to `[eps, 1-eps]`.
pub fn bce_loss(preds: &[f64], targets: &[u8]) -> Result<f64> {
    if preds.len() != targets.len() {
        return Err(Error::LengthMismatch {
            left: preds.len(),
            right: targets.len(),
        });
    }
    if preds.is_empty() {
        return Err(Error::EmptyInput("bce_loss".into()));
    }
    let mut total = 0.0;
    for (&p, &y) in preds.iter().zip(targets) {
        let p = p.clamp(BCE_EPS, 1.0 - BCE_EPS);
        total -= if y == 1 { p.ln() } else { (1.0 - p).ln() };
    }
    Ok(total / preds.len() as f64)
}

/// Anything that maps a feature row to a probability.
pub trait Predictor {
    fn input_dim(&self) -> usize;
    fn predict(&self, x: &[f64]) -> Result<f64>;

    fn predict_all(&self, data: &DatasetMatrix) -> Result<Vec<f64>> {
        (0..data.n()).map(|i| self.predict(data.row(i))).collect()
    }
}

/// Fraction of rows whose hard 0.5-thresholded prediction matches the target.
pub fn accuracy(model: &dyn Predictor, data: &DatasetMatrix) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyInput("accuracy".into()));
    }
    let preds = model.predict_all(data)?;
    let correct = preds
        .iter()
        .zip(data.targets())
        .filter(|(&p, &y)| (p >= 0.5) as u8 == y)
        .count();
    Ok(correct as f64 / data.n() as f64)
}

/// Zero-hidden-layer logistic probe: `sigmoid(w·x + b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProbe {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearProbe {
    pub fn zeros(d: usize) -> Self {
        LinearProbe {
            weights: vec![0.0; d],
            bias: 0.0,
        }
    }

    pub fn abs_weights(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w.abs()).collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.len() + 1
    }

    pub fn is_finite(&self) -> bool {
        self.bias.is_finite() && self.weights.iter().all(|w| w.is_finite())
    }
}

impl Predictor for LinearProbe {
    fn input_dim(&self) -> usize {
        self.weights.len()
    }

    fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                got: x.len(),
            });
        }
        let z: f64 = self.weights.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + self.bias;
        Ok(sigmoid(z))
    }
}

/// One-hidden-layer ReLU network: `sigmoid(w2 · relu(w1·x + b1) + b2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    /// Row-major `hidden_width × d`.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
    input_dim: usize,
}

impl MlpModel {
    pub fn zeros(d: usize, hidden_width: usize) -> Self {
        MlpModel {
            w1: vec![0.0; hidden_width * d],
            b1: vec![0.0; hidden_width],
            w2: vec![0.0; hidden_width],
            b2: 0.0,
            input_dim: d,
        }
    }

    pub fn hidden_width(&self) -> usize {
        self.b1.len()
    }

    pub fn parameter_count(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + 1
    }

    fn hidden(&self, x: &[f64], out: &mut Vec<f64>) {
        let d = self.input_dim;
        out.clear();
        for j in 0..self.hidden_width() {
            let row = &self.w1[j * d..(j + 1) * d];
            let pre: f64 = row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + self.b1[j];
            out.push(pre);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.b2.is_finite()
            && self.w1.iter().all(|v| v.is_finite())
            && self.b1.iter().all(|v| v.is_finite())
            && self.w2.iter().all(|v| v.is_finite())
    }
}

impl Predictor for MlpModel {
    fn input_dim(&self) -> usize {
        self.input_dim
    }

    fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                got: x.len(),
            });
        }
        let mut pre = Vec::new();
        self.hidden(x, &mut pre);
        let z: f64 = pre
            .iter()
            .zip(&self.w2)
            .map(|(&h, w)| w * h.max(0.0))
            .sum::<f64>()
            + self.b2;
        Ok(sigmoid(z))
    }
}

/// SGD hyperparameters. `init_scale` multiplies the default `1/sqrt(fan_in)`
/// uniform initialization range.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub l1_lambda: f64,
    pub init_scale: f64,
}

impl TrainConfig {
    /// Defaults for the linear probe.
    pub fn probe(seed: u64) -> Self {
        TrainConfig {
            learning_rate: 0.1,
            epochs: 200,
            batch_size: 64,
            seed,
            l1_lambda: 0.0,
            init_scale: 1.0,
        }
    }

    /// Defaults for the ReLU network.
    pub fn mlp(seed: u64) -> Self {
        TrainConfig {
            learning_rate: 0.05,
            ..TrainConfig::probe(seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidParameter {
                name: "learning_rate",
                reason: format!("{} must be > 0", self.learning_rate),
            });
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::InvalidParameter {
                name: "epochs/batch_size",
                reason: "must be >= 1".into(),
            });
        }
        if self.l1_lambda < 0.0 {
            return Err(Error::InvalidParameter {
                name: "l1_lambda",
                reason: format!("{} must be >= 0", self.l1_lambda),
            });
        }
        if !(self.init_scale > 0.0) {
            return Err(Error::InvalidParameter {
                name: "init_scale",
                reason: format!("{} must be > 0", self.init_scale),
            });
        }
        Ok(())
    }
}

/// Per-run bookkeeping: objective per epoch plus cost counters.
#[derive(Debug, Clone)]
pub struct TrainingTrace {
    pub epoch_losses: Vec<f64>,
    pub epochs: usize,
    pub parameter_count: usize,
}

impl TrainingTrace {
    pub fn final_loss(&self) -> f64 {
        *self.epoch_losses.last().expect("at least one epoch")
    }
}

fn validate_data(data: &DatasetMatrix) -> Result<()> {
    if data.is_empty() {
        return Err(Error::EmptyInput("training data".into()));
    }
    for (i, &t) in data.targets().iter().enumerate() {
        if t > 1 {
            return Err(Error::NonBinaryTarget {
                row: i,
                value: t as f64,
            });
        }
    }
    Ok(())
}

/// Shrink toward zero by `amount`, clamping at zero instead of crossing it.
fn l1_shrink(w: f64, amount: f64) -> f64 {
    w.signum() * (w.abs() - amount).max(0.0)
}

fn objective(preds: &[f64], targets: &[u8], l1: f64, weights: &[f64]) -> Result<f64> {
    let penalty = l1 * weights.iter().map(|w| w.abs()).sum::<f64>();
    Ok(bce_loss(preds, targets)? + penalty)
}

/// Mini-batch gradient descent for the logistic probe on BCE plus an
/// optional L1 penalty on the weights.
pub fn train_linear(data: &DatasetMatrix, cfg: &TrainConfig) -> Result<(LinearProbe, TrainingTrace)> {
    cfg.validate()?;
    validate_data(data)?;
    let d = data.d();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let scale = cfg.init_scale / (d as f64).sqrt();
    let mut probe = LinearProbe {
        weights: (0..d).map(|_| rng.gen_range(-scale..=scale)).collect(),
        bias: 0.0,
    };

    let mut indices: Vec<usize> = (0..data.n()).collect();
    let mut grad_w = vec![0.0; d];
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        indices.shuffle(&mut rng);
        for batch in indices.chunks(cfg.batch_size) {
            grad_w.iter_mut().for_each(|g| *g = 0.0);
            let mut grad_b = 0.0;
            let inv = 1.0 / batch.len() as f64;
            for &i in batch {
                let x = data.row(i);
                let p = probe.predict(x)?;
                let g = (p - data.targets()[i] as f64) * inv;
                for (gw, xi) in grad_w.iter_mut().zip(x) {
                    *gw += g * xi;
                }
                grad_b += g;
            }
            for (w, gw) in probe.weights.iter_mut().zip(&grad_w) {
                *w = l1_shrink(*w - cfg.learning_rate * gw, cfg.learning_rate * cfg.l1_lambda);
            }
            probe.bias -= cfg.learning_rate * grad_b;
        }
        let preds = probe.predict_all(data)?;
        epoch_losses.push(objective(&preds, data.targets(), cfg.l1_lambda, &probe.weights)?);
    }
    if !probe.is_finite() || epoch_losses.iter().any(|l| !l.is_finite()) {
        return Err(Error::NumericFailure {
            stage: "train_linear".into(),
            reason: "non-finite parameters or loss".into(),
        });
    }
    let trace = TrainingTrace {
        epoch_losses,
        epochs: cfg.epochs,
        parameter_count: probe.parameter_count(),
    };
    Ok((probe, trace))
}

struct MlpGrads {
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: f64,
}

impl MlpGrads {
    fn zeros(d: usize, width: usize) -> Self {
        MlpGrads {
            w1: vec![0.0; width * d],
            b1: vec![0.0; width],
            w2: vec![0.0; width],
            b2: 0.0,
        }
    }

    fn reset(&mut self) {
        self.w1.iter_mut().for_each(|g| *g = 0.0);
        self.b1.iter_mut().for_each(|g| *g = 0.0);
        self.w2.iter_mut().for_each(|g| *g = 0.0);
        self.b2 = 0.0;
    }
}

/// Accumulate mean-BCE gradients over `rows`, in row order.
fn mlp_accumulate(
    model: &MlpModel,
    data: &DatasetMatrix,
    rows: &[usize],
    grads: &mut MlpGrads,
) -> Result<()> {
    let d = model.input_dim();
    let width = model.hidden_width();
    let inv = 1.0 / rows.len() as f64;
    let mut pre = Vec::with_capacity(width);
    for &i in rows {
        let x = data.row(i);
        model.hidden(x, &mut pre);
        let z: f64 = pre
            .iter()
            .zip(&model.w2)
            .map(|(&h, w)| w * h.max(0.0))
            .sum::<f64>()
            + model.b2;
        let p = sigmoid(z);
        let dz = (p - data.targets()[i] as f64) * inv;
        grads.b2 += dz;
        for j in 0..width {
            let h = pre[j].max(0.0);
            grads.w2[j] += dz * h;
            if pre[j] > 0.0 {
                let dh = dz * model.w2[j];
                grads.b1[j] += dh;
                let gw1 = &mut grads.w1[j * d..(j + 1) * d];
                for (g, xi) in gw1.iter_mut().zip(x) {
                    *g += dh * xi;
                }
            }
        }
    }
    Ok(())
}

/// Mini-batch gradient descent with backpropagation for the ReLU network.
pub fn train_mlp(
    data: &DatasetMatrix,
    hidden_width: usize,
    cfg: &TrainConfig,
) -> Result<(MlpModel, TrainingTrace)> {
    cfg.validate()?;
    validate_data(data)?;
    if hidden_width == 0 {
        return Err(Error::InvalidParameter {
            name: "hidden_width",
            reason: "must be >= 1".into(),
        });
    }
    let d = data.d();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let s1 = cfg.init_scale / (d as f64).sqrt();
    let s2 = cfg.init_scale / (hidden_width as f64).sqrt();
    let mut model = MlpModel {
        w1: (0..hidden_width * d).map(|_| rng.gen_range(-s1..=s1)).collect(),
        b1: vec![0.0; hidden_width],
        w2: (0..hidden_width).map(|_| rng.gen_range(-s2..=s2)).collect(),
        b2: 0.0,
        input_dim: d,
    };

    let mut indices: Vec<usize> = (0..data.n()).collect();
    let mut grads = MlpGrads::zeros(d, hidden_width);
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        indices.shuffle(&mut rng);
        for batch in indices.chunks(cfg.batch_size) {
            grads.reset();
            mlp_accumulate(&model, data, batch, &mut grads)?;
            let lr = cfg.learning_rate;
            let shrink = lr * cfg.l1_lambda;
            for (w, g) in model.w1.iter_mut().zip(&grads.w1) {
                *w = l1_shrink(*w - lr * g, shrink);
            }
            for (b, g) in model.b1.iter_mut().zip(&grads.b1) {
                *b -= lr * g;
            }
            for (w, g) in model.w2.iter_mut().zip(&grads.w2) {
                *w = l1_shrink(*w - lr * g, shrink);
            }
            model.b2 -= lr * grads.b2;
        }
        let preds = model.predict_all(data)?;
        let mut weights = model.w1.clone();
        weights.extend_from_slice(&model.w2);
        epoch_losses.push(objective(&preds, data.targets(), cfg.l1_lambda, &weights)?);
    }
    if !model.is_finite() || epoch_losses.iter().any(|l| !l.is_finite()) {
        return Err(Error::NumericFailure {
            stage: "train_mlp".into(),
            reason: "non-finite parameters or loss".into(),
        });
    }
    let trace = TrainingTrace {
        epoch_losses,
        epochs: cfg.epochs,
        parameter_count: model.parameter_count(),
    };
    Ok((model, trace))
}

/// Which model kind a gradient check targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradCheckKind {
    Linear,
    Mlp { hidden_width: usize },
}

const GRAD_CHECK_SEED: u64 = 0x5eed;

/// Compare analytic full-batch gradients against central finite differences
/// for every parameter; returns the maximum relative error
/// `|g_a - g_n| / max(|g_a|, |g_n|, 1e-8)`.
pub fn check_gradients(kind: GradCheckKind, data: &DatasetMatrix, epsilon: f64) -> Result<f64> {
    validate_data(data)?;
    if !(1e-7..=1e-3).contains(&epsilon) {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            reason: format!("{epsilon} not in [1e-7, 1e-3]"),
        });
    }
    let d = data.d();
    let rows: Vec<usize> = (0..data.n()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(GRAD_CHECK_SEED);

    // Pack parameters into one flat vector so the numeric loop is uniform.
    let (mut params, analytic): (Vec<f64>, Vec<f64>) = match kind {
        GradCheckKind::Linear => {
            let scale = 1.0 / (d as f64).sqrt();
            let mut params: Vec<f64> = (0..d).map(|_| rng.gen_range(-scale..=scale)).collect();
            params.push(rng.gen_range(-scale..=scale));
            let probe = linear_from_params(&params, d);
            let mut grad_w = vec![0.0; d];
            let mut grad_b = 0.0;
            let inv = 1.0 / rows.len() as f64;
            for &i in &rows {
                let x = data.row(i);
                let p = probe.predict(x)?;
                let g = (p - data.targets()[i] as f64) * inv;
                for (gw, xi) in grad_w.iter_mut().zip(x) {
                    *gw += g * xi;
                }
                grad_b += g;
            }
            grad_w.push(grad_b);
            (params, grad_w)
        }
        GradCheckKind::Mlp { hidden_width } => {
            if hidden_width == 0 {
                return Err(Error::InvalidParameter {
                    name: "hidden_width",
                    reason: "must be >= 1".into(),
                });
            }
            let s1 = 1.0 / (d as f64).sqrt();
            let s2 = 1.0 / (hidden_width as f64).sqrt();
            let mut params = Vec::with_capacity(hidden_width * (d + 2) + 1);
            params.extend((0..hidden_width * d).map(|_| rng.gen_range(-s1..=s1)));
            params.extend((0..hidden_width).map(|_| rng.gen_range(-s2..=s2)));
            params.extend((0..hidden_width).map(|_| rng.gen_range(-s2..=s2)));
            params.push(rng.gen_range(-s2..=s2));
            let model = mlp_from_params(&params, d, hidden_width);
            let mut grads = MlpGrads::zeros(d, hidden_width);
            mlp_accumulate(&model, data, &rows, &mut grads)?;
            let mut flat = grads.w1;
            flat.extend(grads.b1);
            flat.extend(grads.w2);
            flat.push(grads.b2);
            (params, flat)
        }
    };

    let loss_at = |params: &[f64]| -> Result<f64> {
        let preds = match kind {
            GradCheckKind::Linear => linear_from_params(params, d).predict_all(data)?,
            GradCheckKind::Mlp { hidden_width } => {
                mlp_from_params(params, d, hidden_width).predict_all(data)?
            }
        };
        bce_loss(&preds, data.targets())
    };

    let mut max_rel = 0.0f64;
    for k in 0..params.len() {
        let orig = params[k];
        params[k] = orig + epsilon;
        let hi = loss_at(&params)?;
        params[k] = orig - epsilon;
        let lo = loss_at(&params)?;
        params[k] = orig;
        let numeric = (hi - lo) / (2.0 * epsilon);
        let a = analytic[k];
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
        max_rel = max_rel.max(rel);
    }
    Ok(max_rel)
}

fn linear_from_params(params: &[f64], d: usize) -> LinearProbe {
    LinearProbe {
        weights: params[..d].to_vec(),
        bias: params[d],
    }
}

fn mlp_from_params(params: &[f64], d: usize, width: usize) -> MlpModel {
    let mut at = 0;
    let w1 = params[at..at + width * d].to_vec();
    at += width * d;
    let b1 = params[at..at + width].to_vec();
    at += width;
    let w2 = params[at..at + width].to_vec();
    at += width;
    MlpModel {
        w1,
        b1,
        w2,
        b2: params[at],
        input_dim: d,
    }
}

/// Random standardized-looking data for gradient checks and smoke tests.
pub fn random_dataset(n: usize, d: usize, seed: u64) -> DatasetMatrix {
    use crate::dataprep::{ColumnInfo, ColumnMeta};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect())
        .collect();
    let targets: Vec<u8> = (0..n).map(|_| rng.gen_range(0..=1)).collect();
    let columns = (0..d)
        .map(|j| ColumnMeta {
            name: format!("f{j}"),
            info: ColumnInfo::Numeric { mean: 0.0, std: 1.0 },
        })
        .collect();
    DatasetMatrix::from_rows(rows, targets, columns).expect("consistent shapes")
}
