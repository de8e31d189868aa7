//! Small convolutional baseline: one single-channel convolution, two dense
//! layers and a sigmoid output, trained with binary cross-entropy and Adam.
//!
//! ```text
//! image (s×s) -> conv k×k (valid) -> ReLU -> dense n1 -> ReLU
//!             -> dense n2 -> dense 1 -> sigmoid
//! ```

use std::io::{Read, Write};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{batch_indices, SIDE};
use crate::error::{Error, Result};
use crate::metrics::{self, ScoredPrediction};
use crate::model::EncodedPoint;
use crate::seed;
use crate::trainer::{EpochMetrics, EvalSet, SplitMetrics};

/// Probabilities are clamped to `[EPS, 1 - EPS]` before taking logs.
pub const PROB_EPS: f64 = 1e-7;
pub const ADAM_EPS: f64 = 1e-8;

pub const KERNEL_SIZES: [usize; 2] = [3, 5];
pub const NEURONS_1: [usize; 4] = [4, 8, 16, 24];
pub const NEURONS_2: [usize; 4] = [2, 4, 8, 16];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CnnArchitecture {
    pub kernel_size: usize,
    pub neurons1: usize,
    pub neurons2: usize,
    #[serde(default = "default_side")]
    pub input_side: usize,
}

fn default_side() -> usize {
    SIDE
}

/// Offsets of each parameter block in the flat vector.
#[derive(Debug, Clone, Copy)]
struct Offsets {
    conv_w: usize,
    conv_b: usize,
    d1_w: usize,
    d1_b: usize,
    d2_w: usize,
    d2_b: usize,
    out_w: usize,
    out_b: usize,
    total: usize,
}

impl CnnArchitecture {
    pub fn new(kernel_size: usize, neurons1: usize, neurons2: usize) -> Result<Self> {
        let a = CnnArchitecture {
            kernel_size,
            neurons1,
            neurons2,
            input_side: SIDE,
        };
        a.validate()?;
        Ok(a)
    }

    pub fn with_input_side(mut self, side: usize) -> Result<Self> {
        self.input_side = side;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !KERNEL_SIZES.contains(&self.kernel_size) {
            return Err(Error::Config(format!(
                "kernel size must be 3 or 5, got {}",
                self.kernel_size
            )));
        }
        if !NEURONS_1.contains(&self.neurons1) || !NEURONS_2.contains(&self.neurons2) {
            return Err(Error::Config(format!(
                "unsupported layer widths {} / {}",
                self.neurons1, self.neurons2
            )));
        }
        if self.neurons2 > self.neurons1 {
            return Err(Error::Config(
                "second dense layer cannot be wider than the first".into(),
            ));
        }
        if self.input_side < self.kernel_size {
            return Err(Error::Config("image smaller than the kernel".into()));
        }
        Ok(())
    }

    /// Side of the feature map after the convolution.
    pub fn feature_side(&self) -> usize {
        self.input_side - self.kernel_size + 1
    }

    pub fn features(&self) -> usize {
        self.feature_side() * self.feature_side()
    }

    fn offsets(&self) -> Offsets {
        let (k, f, n1, n2) = (self.kernel_size, self.features(), self.neurons1, self.neurons2);
        let conv_w = 0;
        let conv_b = conv_w + k * k;
        let d1_w = conv_b + 1;
        let d1_b = d1_w + n1 * f;
        let d2_w = d1_b + n1;
        let d2_b = d2_w + n2 * n1;
        let out_w = d2_b + n2;
        let out_b = out_w + n2;
        Offsets {
            conv_w,
            conv_b,
            d1_w,
            d1_b,
            d2_w,
            d2_b,
            out_w,
            out_b,
            total: out_b + 1,
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.offsets().total
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CnnParams {
    pub arch: CnnArchitecture,
    pub data: Vec<f64>,
}

impl CnnParams {
    pub fn zeros(arch: CnnArchitecture) -> Result<Self> {
        arch.validate()?;
        Ok(CnnParams {
            arch,
            data: vec![0.0; arch.parameter_count()],
        })
    }

    /// Every weight and bias uniform in `±1/√fan_in` of its layer.
    pub fn init(arch: CnnArchitecture, seed_value: u64) -> Result<Self> {
        let mut p = Self::zeros(arch)?;
        let o = arch.offsets();
        let mut rng = seed::rng(seed_value);
        let blocks = [
            (o.conv_w, o.d1_w, arch.kernel_size * arch.kernel_size),
            (o.d1_w, o.d2_w, arch.features()),
            (o.d2_w, o.out_w, arch.neurons1),
            (o.out_w, o.total, arch.neurons2),
        ];
        for (start, end, fan_in) in blocks {
            let bound = 1.0 / (fan_in as f64).sqrt();
            for v in &mut p.data[start..end] {
                *v = rng.gen_range(-bound..=bound);
            }
        }
        Ok(p)
    }
}

pub fn relu(x: f64) -> f64 {
    x.max(0.0)
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Binary cross-entropy with the probability clamped to `[EPS, 1 - EPS]`.
pub fn bce(p: f64, y: u8) -> f64 {
    let p = p.clamp(PROB_EPS, 1.0 - PROB_EPS);
    if y == 1 {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

/// `d bce / d p` (zero where the clamp is active).
pub fn bce_grad(p: f64, y: u8) -> f64 {
    if !(PROB_EPS..=1.0 - PROB_EPS).contains(&p) {
        return 0.0;
    }
    if y == 1 {
        -1.0 / p
    } else {
        1.0 / (1.0 - p)
    }
}

struct Activations {
    conv: Vec<f64>,
    h1: Vec<f64>,
    h2: Vec<f64>,
    logit: f64,
}

fn check_shapes(params: &CnnParams, image: &[f64]) -> Result<()> {
    let a = &params.arch;
    if image.len() != a.input_side * a.input_side {
        return Err(Error::Dimension {
            what: "image pixels",
            expected: a.input_side * a.input_side,
            actual: image.len(),
        });
    }
    if params.data.len() != a.parameter_count() {
        return Err(Error::Dimension {
            what: "CNN parameters",
            expected: a.parameter_count(),
            actual: params.data.len(),
        });
    }
    Ok(())
}

fn activations(params: &CnnParams, image: &[f64]) -> Activations {
    let a = &params.arch;
    let o = a.offsets();
    let d = &params.data;
    let (s, k, fs) = (a.input_side, a.kernel_size, a.feature_side());
    let mut conv = vec![0.0; fs * fs];
    for r in 0..fs {
        for c in 0..fs {
            let mut acc = d[o.conv_b];
            for i in 0..k {
                let row = &image[(r + i) * s + c..(r + i) * s + c + k];
                let w = &d[o.conv_w + i * k..o.conv_w + (i + 1) * k];
                acc += row.iter().zip(w).map(|(x, w)| x * w).sum::<f64>();
            }
            conv[r * fs + c] = relu(acc);
        }
    }
    let f = fs * fs;
    let h1: Vec<f64> = (0..a.neurons1)
        .map(|j| {
            let w = &d[o.d1_w + j * f..o.d1_w + (j + 1) * f];
            relu(d[o.d1_b + j] + w.iter().zip(&conv).map(|(w, x)| w * x).sum::<f64>())
        })
        .collect();
    let n1 = a.neurons1;
    let h2: Vec<f64> = (0..a.neurons2)
        .map(|j| {
            let w = &d[o.d2_w + j * n1..o.d2_w + (j + 1) * n1];
            d[o.d2_b + j] + w.iter().zip(&h1).map(|(w, x)| w * x).sum::<f64>()
        })
        .collect();
    let logit = d[o.out_b] + d[o.out_w..o.out_b].iter().zip(&h2).map(|(w, x)| w * x).sum::<f64>();
    Activations { conv, h1, h2, logit }
}

/// Probability of the positive class.
pub fn forward(params: &CnnParams, image: &[f64]) -> Result<f64> {
    check_shapes(params, image)?;
    Ok(sigmoid(activations(params, image).logit))
}

/// Loss and gradient of `bce(forward(image), y)` with respect to every
/// parameter.
pub fn backward(params: &CnnParams, image: &[f64], y: u8) -> Result<(f64, Vec<f64>)> {
    check_shapes(params, image)?;
    let a = &params.arch;
    let o = a.offsets();
    let d = &params.data;
    let act = activations(params, image);
    let p = sigmoid(act.logit);
    let loss = bce(p, y);
    let mut g = vec![0.0; d.len()];

    let dz = bce_grad(p, y) * p * (1.0 - p);
    g[o.out_b] = dz;
    let mut dh2 = vec![0.0; a.neurons2];
    for j in 0..a.neurons2 {
        g[o.out_w + j] = dz * act.h2[j];
        dh2[j] = dz * d[o.out_w + j];
    }
    let n1 = a.neurons1;
    let mut dh1 = vec![0.0; n1];
    for j in 0..a.neurons2 {
        g[o.d2_b + j] = dh2[j];
        for i in 0..n1 {
            g[o.d2_w + j * n1 + i] = dh2[j] * act.h1[i];
            dh1[i] += dh2[j] * d[o.d2_w + j * n1 + i];
        }
    }
    let f = a.features();
    let mut dconv = vec![0.0; f];
    for j in 0..n1 {
        if act.h1[j] <= 0.0 {
            continue;
        }
        let dj = dh1[j];
        g[o.d1_b + j] = dj;
        let w = &d[o.d1_w + j * f..o.d1_w + (j + 1) * f];
        let gw = &mut g[o.d1_w + j * f..o.d1_w + (j + 1) * f];
        for q in 0..f {
            gw[q] = dj * act.conv[q];
            dconv[q] += dj * w[q];
        }
    }
    let (s, k, fs) = (a.input_side, a.kernel_size, a.feature_side());
    for r in 0..fs {
        for c in 0..fs {
            if act.conv[r * fs + c] <= 0.0 {
                continue;
            }
            let dc = dconv[r * fs + c];
            g[o.conv_b] += dc;
            for i in 0..k {
                for jj in 0..k {
                    g[o.conv_w + i * k + jj] += dc * image[(r + i) * s + c + jj];
                }
            }
        }
    }
    Ok((loss, g))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl AdamState {
    pub fn new(n: usize) -> Self {
        AdamState {
            m: vec![0.0; n],
            v: vec![0.0; n],
            step: 0,
        }
    }
}

/// One bias-corrected Adam update in place.
pub fn adam_step(state: &mut AdamState, params: &mut [f64], grad: &[f64], cfg: &AdamConfig) -> Result<()> {
    if state.m.len() != params.len() || grad.len() != params.len() {
        return Err(Error::Dimension {
            what: "Adam state",
            expected: params.len(),
            actual: grad.len(),
        });
    }
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);
    for i in 0..params.len() {
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grad[i];
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
        let mh = state.m[i] / c1;
        let vh = state.v[i] / c2;
        params[i] -= cfg.learning_rate * mh / (vh.sqrt() + ADAM_EPS);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CnnTrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub batch_size: usize,
    pub epochs: usize,
    #[serde(default)]
    pub seed: u64,
}

impl CnnTrainConfig {
    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if !(self.learning_rate >= 0.0) || !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::Config("Adam needs lr >= 0 and betas in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Mean loss and mean gradient over a batch; per-sample work runs in
/// parallel and is reduced in sample order.
pub fn batch_gradient(params: &CnnParams, batch: &[&EncodedPoint]) -> Result<(f64, Vec<f64>)> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let parts: Vec<(f64, Vec<f64>)> = batch
        .par_iter()
        .map(|p| backward(params, &p.inputs, p.labels[0]))
        .collect::<Result<_>>()?;
    let n = batch.len() as f64;
    let mut g = vec![0.0; params.data.len()];
    let mut loss = 0.0;
    for (l, pg) in parts {
        loss += l;
        for (a, b) in g.iter_mut().zip(&pg) {
            *a += b;
        }
    }
    g.iter_mut().for_each(|v| *v /= n);
    Ok((loss / n, g))
}

pub fn score_points(params: &CnnParams, points: &[EncodedPoint]) -> Result<Vec<ScoredPrediction>> {
    points
        .par_iter()
        .map(|p| Ok(ScoredPrediction::from_score(forward(params, &p.inputs)?, p.labels[0])))
        .collect()
}

pub fn evaluate(params: &CnnParams, name: &str, points: &[EncodedPoint]) -> Result<SplitMetrics> {
    let preds = score_points(params, points)?;
    let nll = points
        .iter()
        .zip(&preds)
        .map(|(p, s)| bce(s.score, p.labels[0]))
        .sum::<f64>();
    Ok(SplitMetrics {
        split: name.to_string(),
        acc: metrics::accuracy(&preds)?,
        auc: metrics::auc(&preds).ok(),
        nll: Some(nll),
    })
}

/// Mini-batch Adam training with per-epoch evaluation of `eval`.
pub fn train_cnn(
    params: CnnParams,
    train: &[EncodedPoint],
    eval: &[EvalSet<'_>],
    config: &CnnTrainConfig,
) -> Result<(CnnParams, Vec<EpochMetrics>)> {
    train_cnn_with_callback(params, train, eval, config, |_| {})
}

pub fn train_cnn_with_callback<F: FnMut(&EpochMetrics)>(
    mut params: CnnParams,
    train: &[EncodedPoint],
    eval: &[EvalSet<'_>],
    config: &CnnTrainConfig,
    mut on_epoch: F,
) -> Result<(CnnParams, Vec<EpochMetrics>)> {
    config.validate()?;
    if config.epochs > 0 && train.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let adam = config.adam();
    let mut state = AdamState::new(params.data.len());
    let mut trace = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let order = batch_indices(
            train.len(),
            config.batch_size,
            seed::derive_path(config.seed, &[epoch as u64]),
        )?;
        for idx in order {
            let batch: Vec<&EncodedPoint> = idx.iter().map(|&i| &train[i]).collect();
            let (_, g) = batch_gradient(&params, &batch)?;
            adam_step(&mut state, &mut params.data, &g, &adam)?;
        }
        let splits = eval
            .iter()
            .map(|s| evaluate(&params, s.name, s.points))
            .collect::<Result<Vec<_>>>()?;
        let m = EpochMetrics {
            epoch: epoch + 1,
            splits,
        };
        on_epoch(&m);
        trace.push(m);
    }
    Ok((params, trace))
}

const CNN_MAGIC: &[u8; 5] = b"PCNN1";

/// `PCNN1`, then kernel size, widths and input side as u32 LE, then the
/// flat parameters as f64 LE.
pub fn write_cnn<W: Write>(params: &CnnParams, mut out: W) -> Result<()> {
    let a = &params.arch;
    out.write_all(CNN_MAGIC)?;
    for v in [a.kernel_size, a.neurons1, a.neurons2, a.input_side] {
        out.write_all(&(v as u32).to_le_bytes())?;
    }
    for v in &params.data {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_cnn<R: Read>(mut input: R) -> Result<CnnParams> {
    let mut magic = [0u8; 5];
    input.read_exact(&mut magic)?;
    if &magic != CNN_MAGIC {
        return Err(Error::Format("bad PCNN1 magic".into()));
    }
    let mut dims = [0usize; 4];
    for d in &mut dims {
        let mut b = [0u8; 4];
        input.read_exact(&mut b)?;
        *d = u32::from_le_bytes(b) as usize;
    }
    let arch = CnnArchitecture {
        kernel_size: dims[0],
        neurons1: dims[1],
        neurons2: dims[2],
        input_side: dims[3],
    };
    arch.validate()?;
    let mut buf = vec![0u8; arch.parameter_count() * 8];
    input
        .read_exact(&mut buf)
        .map_err(|_| Error::Format("truncated PCNN1 record".into()))?;
    let mut rest = Vec::new();
    input.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(Error::Format("trailing bytes after PCNN1 record".into()));
    }
    Ok(CnnParams {
        arch,
        data: buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect(),
    })
}
