//! Discriminative training: clamped (positive) and input-clamped (negative)
//! phases, contrastive gradient assembly, exact label NLL and prediction.
//!
//! For a point `(v, l)` the increments are
//!
//! ```text
//! Δb_i  = <s_i>_+ - <s_i>_-
//! ΔW_ij = <s_i s_j>_+ - <s_i s_j>_-        (free–free)
//! ΔW_ik = (<s_i>_+ - <s_i>_-) · v_k        (input→free)
//! ```
//!
//! which equal `-T · ∂NLL/∂θ`. They are averaged over a batch and added with
//! step `η`.

use std::io::Write;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::batch_indices;
use crate::error::{Error, Result};
use crate::metrics::{self, ScoredPrediction};
use crate::model::{clamp_inputs, clamp_inputs_and_label, BmParams, EncodedPoint, ReducedProblem};
use crate::sampler::{exact_distribution, Moments, PhaseSampler};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Inputs and labels clamped.
    Positive,
    /// Only inputs clamped.
    Negative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default)]
    pub seed: u64,
    /// Record the exact label NLL of every evaluated split (enumeration).
    #[serde(default)]
    pub track_nll: bool,
}

fn default_temperature() -> f64 {
    1.0
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0) {
            return Err(Error::Config("learning_rate must be non-negative".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if !(self.temperature > 0.0) {
            return Err(Error::Config("temperature must be positive".into()));
        }
        Ok(())
    }
}

/// Same shape as the trainable parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub biases: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Gradient {
    pub fn zeros_like(params: &BmParams) -> Self {
        Gradient {
            biases: vec![0.0; params.biases.len()],
            weights: vec![0.0; params.weights.len()],
        }
    }

    pub fn norm(&self) -> f64 {
        self.biases
            .iter()
            .chain(&self.weights)
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    fn scale(&mut self, s: f64) {
        self.biases
            .iter_mut()
            .chain(self.weights.iter_mut())
            .for_each(|v| *v *= s);
    }
}

/// Reduced problem of one phase.
pub fn phase_problem(
    params: &BmParams,
    point: &EncodedPoint,
    phase: Phase,
    temperature: f64,
) -> Result<ReducedProblem> {
    point.check(params.layout())?;
    match phase {
        Phase::Positive => clamp_inputs_and_label(params, &point.inputs, &point.labels, temperature),
        Phase::Negative => clamp_inputs(params, &point.inputs, temperature),
    }
}

/// Re-indexes positive-phase moments (hidden units only) onto all free
/// units, with clamped labels contributing their fixed values.
fn lift_positive(hidden: &Moments, labels: &[u8]) -> Moments {
    let nl = labels.len();
    let nh = hidden.m();
    let nf = nl + nh;
    let mut mo = Moments::zeros(nf);
    for (l, &v) in labels.iter().enumerate() {
        mo.first[l] = v as f64;
    }
    mo.first[nl..].copy_from_slice(&hidden.first);
    for f in 0..nf {
        for g in (f + 1)..nf {
            mo.second[f * nf + g] = match (f < nl, g < nl) {
                (true, true) => (labels[f] & labels[g]) as f64,
                (true, false) => labels[f] as f64 * hidden.first[g - nl],
                (false, false) => hidden.pair(f - nl, g - nl),
                (false, true) => unreachable!("labels precede hidden units"),
            };
        }
    }
    mo
}

/// Free-unit moments of one phase for one point, in free-unit coordinates
/// (labels then hidden).
pub fn phase_moments<S: PhaseSampler + ?Sized>(
    params: &BmParams,
    point: &EncodedPoint,
    phase: Phase,
    sampler: &S,
    temperature: f64,
    seed: u64,
) -> Result<Moments> {
    let rp = phase_problem(params, point, phase, temperature)?;
    let mo = sampler.estimate(std::slice::from_ref(&rp), seed)?.remove(0);
    Ok(match phase {
        Phase::Positive => lift_positive(&mo, &point.labels),
        Phase::Negative => mo,
    })
}

fn accumulate(g: &mut Gradient, params: &BmParams, point: &EncodedPoint, pos: &Moments, neg: &Moments) {
    let layout = params.layout();
    let nf = layout.free();
    let diff: Vec<f64> = pos.first.iter().zip(&neg.first).map(|(a, b)| a - b).collect();
    for f in 0..nf {
        g.biases[f] += diff[f];
    }
    for (k, &v) in point.inputs.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let row = &mut g.weights[k * nf..(k + 1) * nf];
        for (w, d) in row.iter_mut().zip(&diff) {
            *w += d * v;
        }
    }
    for f in 0..nf {
        for h in (f + 1)..nf {
            g.weights[params.free_weight_index(f, h)] += pos.pair(f, h) - neg.pair(f, h);
        }
    }
}

/// Batch-averaged contrastive increments (learning rate not applied).
///
/// Both phases of every point are handed to the sampler in one call, ordered
/// `[pos_0, neg_0, pos_1, neg_1, ...]`, so a parallel device can pack them
/// into shared annealing cycles.
pub fn compute_gradient<S: PhaseSampler + ?Sized>(
    params: &BmParams,
    batch: &[EncodedPoint],
    sampler: &S,
    temperature: f64,
    seed: u64,
) -> Result<Gradient> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut problems = Vec::with_capacity(2 * batch.len());
    for p in batch {
        problems.push(phase_problem(params, p, Phase::Positive, temperature)?);
        problems.push(phase_problem(params, p, Phase::Negative, temperature)?);
    }
    let estimates = sampler.estimate(&problems, seed)?;
    let mut g = Gradient::zeros_like(params);
    for (p, pair) in batch.iter().zip(estimates.chunks_exact(2)) {
        let pos = lift_positive(&pair[0], &p.labels);
        accumulate(&mut g, params, p, &pos, &pair[1]);
    }
    g.scale(1.0 / batch.len() as f64);
    Ok(g)
}

/// `params + η · g`.
pub fn apply_update(params: &BmParams, g: &Gradient, learning_rate: f64) -> Result<BmParams> {
    if g.biases.len() != params.biases.len() || g.weights.len() != params.weights.len() {
        return Err(Error::Dimension {
            what: "gradient",
            expected: params.parameter_count(),
            actual: g.biases.len() + g.weights.len(),
        });
    }
    let mut out = params.clone();
    for (p, d) in out.biases.iter_mut().zip(&g.biases) {
        *p += learning_rate * d;
    }
    for (p, d) in out.weights.iter_mut().zip(&g.weights) {
        *p += learning_rate * d;
    }
    Ok(out)
}

/// `-ln P(v_l | v_d)` for one point, by enumeration.
pub fn point_nll(params: &BmParams, point: &EncodedPoint, temperature: f64) -> Result<f64> {
    let pos = exact_distribution(&phase_problem(params, point, Phase::Positive, temperature)?)?;
    let neg = exact_distribution(&phase_problem(params, point, Phase::Negative, temperature)?)?;
    Ok(neg.log_partition - pos.log_partition)
}

/// Summed label negative log-likelihood over `points`.
pub fn nll(params: &BmParams, points: &[EncodedPoint], temperature: f64) -> Result<f64> {
    use rayon::prelude::*;
    points
        .par_iter()
        .map(|p| point_nll(params, p, temperature))
        .collect::<Result<Vec<f64>>>()
        .map(|v| v.iter().sum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: u8,
    /// Fraction of negative-phase samples with the label unit on.
    pub score: f64,
}

/// Classifies each input by the label unit's negative-phase frequency.
pub fn predict_many<S: PhaseSampler + ?Sized>(
    params: &BmParams,
    inputs: &[&[f64]],
    sampler: &S,
    temperature: f64,
    seed: u64,
) -> Result<Vec<Prediction>> {
    if params.layout().labels != 1 {
        return Err(Error::Layout("prediction needs exactly one label unit".into()));
    }
    let problems = inputs
        .iter()
        .map(|v| clamp_inputs(params, v, temperature))
        .collect::<Result<Vec<_>>>()?;
    let estimates = sampler.estimate(&problems, seed)?;
    Ok(estimates
        .iter()
        .map(|mo| {
            let score = mo.first[0].clamp(0.0, 1.0);
            Prediction {
                label: (score >= metrics::THRESHOLD) as u8,
                score,
            }
        })
        .collect())
}

pub fn predict<S: PhaseSampler + ?Sized>(
    params: &BmParams,
    inputs: &[f64],
    sampler: &S,
    temperature: f64,
    seed: u64,
) -> Result<Prediction> {
    Ok(predict_many(params, &[inputs], sampler, temperature, seed)?[0])
}

/// Scored predictions for labelled points.
pub fn score_points<S: PhaseSampler + ?Sized>(
    params: &BmParams,
    points: &[EncodedPoint],
    sampler: &S,
    temperature: f64,
    seed: u64,
) -> Result<Vec<ScoredPrediction>> {
    let inputs: Vec<&[f64]> = points.iter().map(|p| p.inputs.as_slice()).collect();
    let preds = predict_many(params, &inputs, sampler, temperature, seed)?;
    Ok(preds
        .iter()
        .zip(points)
        .map(|(pr, pt)| ScoredPrediction {
            score: pr.score,
            predicted: pr.label,
            truth: pt.labels[0],
        })
        .collect())
}

/// Metrics of one split after one epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitMetrics {
    pub split: String,
    pub acc: f64,
    /// `None` when the split holds a single class.
    pub auc: Option<f64>,
    pub nll: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub splits: Vec<SplitMetrics>,
}

impl EpochMetrics {
    pub fn get(&self, split: &str) -> Option<&SplitMetrics> {
        self.splits.iter().find(|s| s.split == split)
    }
}

/// Writes `epoch,split,acc,auc,nll` rows; missing values are left empty.
pub fn write_trace_csv<W: Write>(trace: &[EpochMetrics], mut out: W) -> Result<()> {
    writeln!(out, "epoch,split,acc,auc,nll")?;
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
    for e in trace {
        for s in &e.splits {
            writeln!(
                out,
                "{},{},{:.6},{},{}",
                e.epoch,
                s.split,
                s.acc,
                opt(s.auc),
                opt(s.nll)
            )?;
        }
    }
    Ok(())
}

/// Computes ACC/AUC (and optionally exact NLL) of `points`.
pub fn evaluate<S: PhaseSampler + ?Sized>(
    params: &BmParams,
    name: &str,
    points: &[EncodedPoint],
    sampler: &S,
    temperature: f64,
    seed: u64,
    with_nll: bool,
) -> Result<SplitMetrics> {
    let preds = score_points(params, points, sampler, temperature, seed)?;
    Ok(SplitMetrics {
        split: name.to_string(),
        acc: metrics::accuracy(&preds)?,
        auc: metrics::auc(&preds).ok(),
        nll: if with_nll {
            Some(nll(params, points, temperature)?)
        } else {
            None
        },
    })
}

/// A named evaluation split.
#[derive(Debug, Clone, Copy)]
pub struct EvalSet<'a> {
    pub name: &'a str,
    pub points: &'a [EncodedPoint],
}

const EVAL_STREAM: u64 = 0xE7A1;

/// Mini-batch training. Each epoch reshuffles the training points with a
/// stream derived from `(seed, epoch)`, updates once per batch, then scores
/// every `eval` split. The trace holds one entry per epoch (with no splits
/// when `eval` is empty).
pub fn train<S: PhaseSampler + ?Sized>(
    params: BmParams,
    train_points: &[EncodedPoint],
    eval: &[EvalSet<'_>],
    config: &TrainConfig,
    sampler: &S,
) -> Result<(BmParams, Vec<EpochMetrics>)> {
    train_with_callback(params, train_points, eval, config, sampler, |_| {})
}

pub fn train_with_callback<S: PhaseSampler + ?Sized, F: FnMut(&EpochMetrics)>(
    mut params: BmParams,
    train_points: &[EncodedPoint],
    eval: &[EvalSet<'_>],
    config: &TrainConfig,
    sampler: &S,
    mut on_epoch: F,
) -> Result<(BmParams, Vec<EpochMetrics>)> {
    config.validate()?;
    if config.epochs > 0 && train_points.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let t = config.temperature;
    let mut trace = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let epoch_seed = seed::derive_path(config.seed, &[epoch as u64]);
        let batches = batch_indices(train_points.len(), config.batch_size, epoch_seed)?;
        for (b, idx) in batches.iter().enumerate() {
            let batch: Vec<EncodedPoint> = idx.iter().map(|&i| train_points[i].clone()).collect();
            let g = compute_gradient(&params, &batch, sampler, t, seed::derive(epoch_seed, b as u64 + 1))?;
            params = apply_update(&params, &g, config.learning_rate)?;
        }
        let mut splits = Vec::with_capacity(eval.len());
        for (k, set) in eval.iter().enumerate() {
            let s = seed::derive_path(config.seed, &[EVAL_STREAM, epoch as u64, k as u64]);
            splits.push(evaluate(
                &params,
                set.name,
                set.points,
                sampler,
                t,
                s,
                config.track_nll,
            )?);
        }
        let m = EpochMetrics {
            epoch: epoch + 1,
            splits,
        };
        on_epoch(&m);
        trace.push(m);
    }
    Ok((params, trace))
}

/// Shuffles a copy of `points` with a seeded stream.
pub fn shuffled(points: &[EncodedPoint], seed_value: u64) -> Vec<EncodedPoint> {
    let mut v = points.to_vec();
    v.shuffle(&mut seed::rng(seed_value));
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::UnitLayout;
    use crate::sampler::{SamplerConfig, Schedule};
    use rand::Rng;

    fn toy_points(layout: &UnitLayout, n: usize, seed_value: u64) -> Vec<EncodedPoint> {
        let mut rng = seed::rng(seed_value);
        (0..n)
            .map(|_| EncodedPoint {
                inputs: (0..layout.inputs).map(|_| rng.gen_range(0.0..=1.0)).collect(),
                labels: (0..layout.labels).map(|_| rng.gen::<bool>() as u8).collect(),
            })
            .collect()
    }

    /// Conditional expectations of the free units by brute force over the
    /// full model.
    fn brute_moments(params: &BmParams, p: &EncodedPoint, clamp_label: bool) -> (Vec<f64>, Vec<Vec<f64>>) {
        let l = params.layout();
        let nf = l.free();
        let mut first = vec![0.0; nf];
        let mut second = vec![vec![0.0; nf]; nf];
        let mut z = 0.0;
        for bits in 0..(1u64 << nf) {
            let free: Vec<f64> = (0..nf).map(|f| ((bits >> f) & 1) as f64).collect();
            if clamp_label && (0..l.labels).any(|k| free[k] as u8 != p.labels[k]) {
                continue;
            }
            let mut s = p.inputs.clone();
            s.extend(&free);
            let w = (-params.energy(&s).unwrap()).exp();
            z += w;
            for f in 0..nf {
                first[f] += w * free[f];
                for g in 0..nf {
                    second[f][g] += w * free[f] * free[g];
                }
            }
        }
        first.iter_mut().for_each(|v| *v /= z);
        second.iter_mut().flatten().for_each(|v| *v /= z);
        (first, second)
    }

    #[test]
    fn exact_phase_moments_equal_brute_force_conditionals() {
        let l = UnitLayout::new(2, 2, 1).unwrap();
        let params = BmParams::init(l, 3).unwrap();
        let p = &toy_points(&l, 1, 5)[0];
        let exact = SamplerConfig::exact();
        for (phase, clamp) in [(Phase::Positive, true), (Phase::Negative, false)] {
            let mo = phase_moments(&params, p, phase, &exact, 1.0, 0).unwrap();
            let (first, second) = brute_moments(&params, p, clamp);
            for f in 0..3 {
                assert!((mo.first[f] - first[f]).abs() < 1e-12);
                for g in (f + 1)..3 {
                    assert!((mo.pair(f, g) - second[f][g]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn zero_model_negative_phase_is_half() {
        let l = UnitLayout::new(3, 2, 1).unwrap();
        let params = BmParams::zeros(l).unwrap();
        let p = &toy_points(&l, 1, 1)[0];
        let mo = phase_moments(&params, p, Phase::Negative, &SamplerConfig::exact(), 1.0, 0).unwrap();
        assert!(mo.first.iter().all(|&v| (v - 0.5).abs() < 1e-15));
    }

    #[test]
    fn single_hidden_positive_phase() {
        let l = UnitLayout::new(2, 1, 1).unwrap();
        let params = BmParams::init(l, 2).unwrap();
        let p = &toy_points(&l, 1, 9)[0];
        let rp = phase_problem(&params, p, Phase::Positive, 1.0).unwrap();
        assert_eq!(rp.m(), 1);
        let mo = phase_moments(&params, p, Phase::Positive, &SamplerConfig::exact(), 1.0, 0).unwrap();
        assert_eq!(mo.first[0], p.labels[0] as f64);
        assert!((mo.pair(0, 1) - p.labels[0] as f64 * mo.first[1]).abs() < 1e-15);
    }

    /// Sampler returning the same moments for both phases.
    struct Echo;
    impl PhaseSampler for Echo {
        fn estimate(&self, problems: &[ReducedProblem], _seed: u64) -> Result<Vec<Moments>> {
            Ok(problems
                .iter()
                .map(|rp| {
                    let mut mo = Moments::zeros(rp.m());
                    mo.first.iter_mut().for_each(|v| *v = 0.3);
                    mo
                })
                .collect())
        }
    }

    #[test]
    fn zero_gradient_cases() {
        let l = UnitLayout::new(3, 2, 1).unwrap();
        let params = BmParams::init(l, 0).unwrap();
        // label 0.3-moments never equal a clamped 0/1 label, so check the
        // hidden/hidden and input→hidden parts only
        let pts = toy_points(&l, 4, 2);
        let g = compute_gradient(&params, &pts, &Echo, 1.0, 0).unwrap();
        for h in 1..3 {
            assert_eq!(g.biases[h], 0.0);
        }
        assert_eq!(g.weights[params.free_weight_index(1, 2)], 0.0);

        let zero_input = EncodedPoint {
            inputs: vec![0.0; 3],
            labels: vec![1],
        };
        let g = compute_gradient(&params, &[zero_input], &SamplerConfig::exact(), 1.0, 0).unwrap();
        assert!(g.weights[..l.input_weight_count()].iter().all(|&w| w == 0.0));
        assert!(matches!(
            compute_gradient(&params, &[], &SamplerConfig::exact(), 1.0, 0),
            Err(Error::EmptyBatch)
        ));
    }

    #[test]
    fn exact_gradient_matches_finite_differences() {
        let l = UnitLayout::new(4, 3, 1).unwrap();
        for s in 0..3 {
            let params = BmParams::init(l, s).unwrap();
            let pts = toy_points(&l, 3, 100 + s);
            let g = compute_gradient(&params, &pts, &SamplerConfig::exact(), 1.0, 0).unwrap();
            let h = 1e-4;
            let fd = |which: &dyn Fn(&mut BmParams) -> &mut f64| {
                let mut a = params.clone();
                *which(&mut a) += h;
                let mut b = params.clone();
                *which(&mut b) -= h;
                (nll(&a, &pts, 1.0).unwrap() - nll(&b, &pts, 1.0).unwrap()) / (2.0 * h)
            };
            let scale = -1.0 / pts.len() as f64;
            for i in 0..params.biases.len() {
                let d = fd(&|p: &mut BmParams| &mut p.biases[i]);
                assert!((g.biases[i] - scale * d).abs() < 1e-5);
            }
            for i in 0..params.weights.len() {
                let d = fd(&|p: &mut BmParams| &mut p.weights[i]);
                assert!((g.weights[i] - scale * d).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn update_algebra() {
        let l = UnitLayout::new(2, 2, 1).unwrap();
        let params = BmParams::init(l, 4).unwrap();
        let pts = toy_points(&l, 2, 4);
        let g = compute_gradient(&params, &pts, &SamplerConfig::exact(), 1.0, 0).unwrap();
        assert_eq!(apply_update(&params, &g, 0.0).unwrap(), params);

        let before = nll(&params, &pts, 1.0).unwrap();
        let after = nll(&apply_update(&params, &g, 0.01).unwrap(), &pts, 1.0).unwrap();
        assert!(after < before);

        // two half steps vs one full step differ at second order only
        let eta = 1e-3;
        let one = apply_update(&params, &g, eta).unwrap();
        let half = apply_update(&params, &g, eta / 2.0).unwrap();
        let g2 = compute_gradient(&half, &pts, &SamplerConfig::exact(), 1.0, 0).unwrap();
        let two = apply_update(&half, &g2, eta / 2.0).unwrap();
        for (a, b) in one.weights.iter().zip(&two.weights) {
            assert!((a - b).abs() < eta * eta);
        }

        let wrong = Gradient {
            biases: vec![0.0],
            weights: vec![],
        };
        assert!(apply_update(&params, &wrong, 0.1).is_err());
    }

    #[test]
    fn nll_zero_model_is_log_two_per_point() {
        let l = UnitLayout::new(5, 3, 1).unwrap();
        let pts = toy_points(&l, 7, 0);
        let v = nll(&BmParams::zeros(l).unwrap(), &pts, 1.0).unwrap();
        assert!((v - 7.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn nll_closed_form_single_coupling() {
        // n_d = 1, n_h = 1, n_l = 1, only W(label, hidden) = w
        // P(l=1) = (1 + e^w) / (1 + 1 + 1 + e^w)
        let l = UnitLayout::new(1, 1, 1).unwrap();
        let mut params = BmParams::zeros(l).unwrap();
        let w = 0.8;
        let i = params.free_weight_index(0, 1);
        params.weights[i] = w;
        let pt = EncodedPoint {
            inputs: vec![0.5],
            labels: vec![1],
        };
        let expected = -((1.0 + w.exp()) / (3.0 + w.exp())).ln();
        assert!((nll(&params, &[pt], 1.0).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn nll_non_increasing_under_exact_training() {
        let l = UnitLayout::new(4, 2, 1).unwrap();
        let pts = toy_points(&l, 4, 12);
        let mut params = BmParams::init(l, 12).unwrap();
        let mut last = nll(&params, &pts, 1.0).unwrap();
        for _ in 0..50 {
            let g = compute_gradient(&params, &pts, &SamplerConfig::exact(), 1.0, 0).unwrap();
            params = apply_update(&params, &g, 0.1).unwrap();
            let now = nll(&params, &pts, 1.0).unwrap();
            assert!(now <= last + 1e-12, "{now} > {last}");
            last = now;
        }
    }

    #[test]
    fn prediction_scores() {
        let l = UnitLayout::new(3, 2, 1).unwrap();
        let zero = BmParams::zeros(l).unwrap();
        let x = [0.2, 0.4, 0.9];
        let sa = SamplerConfig::sa(2000, Schedule::Constant { beta: 1.0, sweeps: 20 });
        let p = predict(&zero, &x, &sa, 1.0, 5).unwrap();
        // 3σ binomial band at 2000 reads
        assert!((p.score - 0.5).abs() < 3.0 * (0.25f64 / 2000.0).sqrt());

        // a large label bias drives the label on
        let mut forced = zero.clone();
        forced.biases[0] = 10.0;
        let p = predict(&forced, &x, &SamplerConfig::exact(), 1.0, 0).unwrap();
        assert!(p.score >= 0.99 && p.label == 1);

        // exact score is the conditional label probability
        let params = BmParams::init(l, 8).unwrap();
        let pt = EncodedPoint {
            inputs: x.to_vec(),
            labels: vec![1],
        };
        let p = predict(&params, &x, &SamplerConfig::exact(), 1.0, 0).unwrap();
        let cond = (-point_nll(&params, &pt, 1.0).unwrap()).exp();
        assert!((p.score - cond).abs() < 1e-12);
    }

    #[test]
    fn train_zero_epochs_is_identity() {
        let l = UnitLayout::new(2, 1, 1).unwrap();
        let params = BmParams::init(l, 1).unwrap();
        let cfg = TrainConfig {
            learning_rate: 0.1,
            batch_size: 2,
            epochs: 0,
            temperature: 1.0,
            seed: 0,
            track_nll: false,
        };
        let (out, trace) = train(
            params.clone(),
            &toy_points(&l, 4, 0),
            &[],
            &cfg,
            &SamplerConfig::exact(),
        )
        .unwrap();
        assert_eq!(out, params);
        assert!(trace.is_empty());
    }

    #[test]
    fn trace_csv_format() {
        let trace = vec![EpochMetrics {
            epoch: 1,
            splits: vec![SplitMetrics {
                split: "test".into(),
                acc: 0.75,
                auc: None,
                nll: Some(1.5),
            }],
        }];
        let mut buf = Vec::new();
        write_trace_csv(&trace, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "epoch,split,acc,auc,nll\n1,test,0.750000,,1.500000\n"
        );
    }
}
