//! Hyperparameter search: seeded random search for the Boltzmann machine and
//! grid-plus-random search for the CNN. Trials are ranked by the composite
//! score on the validation split after the final epoch.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cnn::{self, CnnArchitecture, CnnParams, CnnTrainConfig, KERNEL_SIZES, NEURONS_1, NEURONS_2};
use crate::data::PIXELS;
use crate::error::{Error, Result};
use crate::metrics::composite;
use crate::model::{BmParams, EncodedPoint, UnitLayout};
use crate::sampler::{SamplerConfig, SamplerKind, Schedule};
use crate::seed;
use crate::trainer::{self, EpochMetrics, EvalSet, TrainConfig};

/// Inclusive integer range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntRange {
    pub min: usize,
    pub max: usize,
}

/// Inclusive real range; `log` samples uniformly in log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RealRange {
    pub min: f64,
    pub max: f64,
    #[serde(default)]
    pub log: bool,
}

impl IntRange {
    fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        rng.gen_range(self.min..=self.max)
    }

    fn check(&self, what: &str) -> Result<()> {
        if self.min > self.max {
            return Err(Error::Config(format!("{what}: empty range")));
        }
        Ok(())
    }
}

impl RealRange {
    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        if self.log {
            rng.gen_range(self.min.ln()..=self.max.ln()).exp()
        } else {
            rng.gen_range(self.min..=self.max)
        }
    }

    fn check(&self, what: &str) -> Result<()> {
        if !(self.min <= self.max) || (self.log && !(self.min > 0.0)) {
            return Err(Error::Config(format!("{what}: invalid range")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QbmSearchSpace {
    pub hidden: IntRange,
    pub epochs: IntRange,
    pub batch_size: IntRange,
    pub learning_rate: RealRange,
    pub reads: IntRange,
}

impl Default for QbmSearchSpace {
    fn default() -> Self {
        QbmSearchSpace {
            hidden: IntRange { min: 1, max: 20 },
            epochs: IntRange { min: 1, max: 20 },
            batch_size: IntRange { min: 1, max: 100 },
            learning_rate: RealRange {
                min: 1e-5,
                max: 0.6,
                log: true,
            },
            reads: IntRange { min: 10, max: 1000 },
        }
    }
}

impl QbmSearchSpace {
    pub fn validate(&self) -> Result<()> {
        self.hidden.check("hidden")?;
        self.epochs.check("epochs")?;
        self.batch_size.check("batch_size")?;
        self.learning_rate.check("learning_rate")?;
        self.reads.check("reads")?;
        if self.batch_size.min == 0 || self.reads.min == 0 {
            return Err(Error::Config("batch size and reads must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QbmTrial {
    pub hidden: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub reads: usize,
}

impl QbmTrial {
    pub fn pneumonia() -> Self {
        QbmTrial {
            hidden: 10,
            epochs: 20,
            batch_size: 73,
            learning_rate: 0.45295,
            reads: 100,
        }
    }

    pub fn breast() -> Self {
        QbmTrial {
            hidden: 8,
            epochs: 13,
            batch_size: 12,
            learning_rate: 0.43496,
            reads: 400,
        }
    }
}

pub fn sample_qbm_trials(space: &QbmSearchSpace, n: usize, seed_value: u64) -> Result<Vec<QbmTrial>> {
    space.validate()?;
    let mut rng = seed::rng(seed_value);
    Ok((0..n)
        .map(|_| QbmTrial {
            hidden: space.hidden.sample(&mut rng),
            epochs: space.epochs.sample(&mut rng),
            batch_size: space.batch_size.sample(&mut rng),
            learning_rate: space.learning_rate.sample(&mut rng),
            reads: space.reads.sample(&mut rng),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CnnSearchSpace {
    pub learning_rate: RealRange,
    pub beta1: RealRange,
    pub beta2: RealRange,
    /// Batch sizes are `2^e` for `e` in this range.
    pub batch_exponent: IntRange,
}

impl Default for CnnSearchSpace {
    fn default() -> Self {
        CnnSearchSpace {
            learning_rate: RealRange {
                min: 0.0005,
                max: 0.05,
                log: true,
            },
            beta1: RealRange {
                min: 0.98,
                max: 0.999999,
                log: false,
            },
            beta2: RealRange {
                min: 0.998,
                max: 0.9999,
                log: false,
            },
            batch_exponent: IntRange { min: 2, max: 10 },
        }
    }
}

impl CnnSearchSpace {
    pub fn validate(&self) -> Result<()> {
        self.learning_rate.check("learning_rate")?;
        self.beta1.check("beta1")?;
        self.beta2.check("beta2")?;
        self.batch_exponent.check("batch_exponent")?;
        if self.beta1.max >= 1.0 || self.beta2.max >= 1.0 {
            return Err(Error::Config("betas must stay below 1".into()));
        }
        if self.batch_exponent.max > 20 {
            return Err(Error::Config("batch exponent above 20".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CnnTrial {
    pub arch: CnnArchitecture,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub batch_size: usize,
}

impl CnnTrial {
    pub fn pneumonia() -> Self {
        CnnTrial {
            arch: CnnArchitecture::new(5, 16, 8).unwrap(),
            learning_rate: 0.00384,
            beta1: 0.98428,
            beta2: 0.99925,
            batch_size: 16,
        }
    }

    pub fn breast() -> Self {
        CnnTrial {
            arch: CnnArchitecture::new(5, 24, 8).unwrap(),
            learning_rate: 0.00117,
            beta1: 0.98674,
            beta2: 0.99931,
            batch_size: 8,
        }
    }

    pub fn train_config(&self, epochs: usize, seed_value: u64) -> CnnTrainConfig {
        CnnTrainConfig {
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            batch_size: self.batch_size,
            epochs,
            seed: seed_value,
        }
    }
}

/// Every `(kernel, n1, n2)` with `n2 <= n1`.
pub fn cnn_grid(input_side: usize) -> Result<Vec<CnnArchitecture>> {
    let mut out = Vec::new();
    for &k in &KERNEL_SIZES {
        for &n1 in &NEURONS_1 {
            for &n2 in NEURONS_2.iter().filter(|&&n2| n2 <= n1) {
                out.push(CnnArchitecture::new(k, n1, n2)?.with_input_side(input_side)?);
            }
        }
    }
    Ok(out)
}

/// `per_arch` random optimiser settings for every grid architecture.
pub fn sample_cnn_trials(
    space: &CnnSearchSpace,
    grid: &[CnnArchitecture],
    per_arch: usize,
    seed_value: u64,
) -> Result<Vec<CnnTrial>> {
    space.validate()?;
    let mut out = Vec::with_capacity(grid.len() * per_arch);
    for (g, &arch) in grid.iter().enumerate() {
        let mut rng = seed::rng(seed::derive(seed_value, g as u64));
        for _ in 0..per_arch {
            out.push(CnnTrial {
                arch,
                learning_rate: space.learning_rate.sample(&mut rng),
                beta1: space.beta1.sample(&mut rng),
                beta2: space.beta2.sample(&mut rng),
                batch_size: 1 << space.batch_exponent.sample(&mut rng),
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub val_acc: f64,
    pub val_auc: f64,
    pub composite: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub outcomes: Vec<TrialOutcome>,
    pub best: usize,
}

impl SweepResult {
    pub fn best_outcome(&self) -> &TrialOutcome {
        &self.outcomes[self.best]
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "trial,val_acc,val_auc,composite")?;
        for o in &self.outcomes {
            writeln!(out, "{},{},{},{}", o.trial, o.val_acc, o.val_auc, o.composite)?;
        }
        Ok(())
    }
}

/// Runs `run` on every trial and keeps the first one with the highest
/// validation composite. `run` returns the validation `(acc, auc)`.
pub fn select<T, F>(trials: &[T], mut run: F) -> Result<SweepResult>
where
    F: FnMut(usize, &T) -> Result<(f64, f64)>,
{
    if trials.is_empty() {
        return Err(Error::InvalidArgument("no trials to run".into()));
    }
    let mut outcomes = Vec::with_capacity(trials.len());
    let mut best = 0;
    for (i, t) in trials.iter().enumerate() {
        let (acc, auc) = run(i, t)?;
        let c = composite(acc, auc);
        if c > outcomes
            .get(best)
            .map_or(f64::NEG_INFINITY, |o: &TrialOutcome| o.composite)
        {
            best = i;
        }
        outcomes.push(TrialOutcome {
            trial: i,
            val_acc: acc,
            val_auc: auc,
            composite: c,
        });
    }
    Ok(SweepResult { outcomes, best })
}

fn final_validation(trace: &[EpochMetrics]) -> Result<(f64, f64)> {
    let m = trace
        .last()
        .and_then(|e| e.get("val"))
        .ok_or_else(|| Error::InvalidArgument("trial produced no validation metrics".into()))?;
    // a single-class validation split leaves AUC undefined; count it as chance
    Ok((m.acc, m.auc.unwrap_or(0.5)))
}

/// Trains one Boltzmann machine with an SA sampler configured from the trial.
pub fn run_qbm_trial(
    trial: &QbmTrial,
    train: &[EncodedPoint],
    val: &[EncodedPoint],
    kind: SamplerKind,
    seed_value: u64,
) -> Result<(f64, f64)> {
    let inputs = train.first().map_or(PIXELS, |p| p.inputs.len());
    let layout = UnitLayout::new(inputs, trial.hidden, 1)?;
    let params = BmParams::init(layout, seed::derive(seed_value, 0))?;
    let sampler = SamplerConfig {
        kind,
        reads: trial.reads,
        ..SamplerConfig::sa(trial.reads, Schedule::default())
    };
    let cfg = TrainConfig {
        learning_rate: trial.learning_rate,
        batch_size: trial.batch_size,
        epochs: trial.epochs,
        temperature: 1.0,
        seed: seed::derive(seed_value, 1),
        track_nll: false,
    };
    let eval = [EvalSet {
        name: "val",
        points: val,
    }];
    let (_, trace) = trainer::train(params, train, &eval, &cfg, &sampler)?;
    final_validation(&trace)
}

pub fn run_cnn_trial(
    trial: &CnnTrial,
    train: &[EncodedPoint],
    val: &[EncodedPoint],
    epochs: usize,
    seed_value: u64,
) -> Result<(f64, f64)> {
    let params = CnnParams::init(trial.arch, seed::derive(seed_value, 0))?;
    let eval = [EvalSet {
        name: "val",
        points: val,
    }];
    let (_, trace) = cnn::train_cnn(
        params,
        train,
        &eval,
        &trial.train_config(epochs, seed::derive(seed_value, 1)),
    )?;
    final_validation(&trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qbm_trials_stay_in_range() {
        let space = QbmSearchSpace::default();
        let trials = sample_qbm_trials(&space, 500, 3).unwrap();
        for t in &trials {
            assert!((1..=20).contains(&t.hidden));
            assert!((1..=20).contains(&t.epochs));
            assert!((1..=100).contains(&t.batch_size));
            assert!((1e-5..=0.6).contains(&t.learning_rate));
            assert!((10..=1000).contains(&t.reads));
        }
        assert_eq!(trials, sample_qbm_trials(&space, 500, 3).unwrap());
        assert_ne!(trials, sample_qbm_trials(&space, 500, 4).unwrap());
    }

    #[test]
    fn tuned_best_configs_lie_in_default_spaces() {
        let q = QbmSearchSpace::default();
        for t in [QbmTrial::pneumonia(), QbmTrial::breast()] {
            assert!(q.hidden.min <= t.hidden && t.hidden <= q.hidden.max);
            assert!(q.learning_rate.min <= t.learning_rate && t.learning_rate <= q.learning_rate.max);
        }
        let c = CnnSearchSpace::default();
        for t in [CnnTrial::pneumonia(), CnnTrial::breast()] {
            assert!(c.learning_rate.min <= t.learning_rate && t.learning_rate <= c.learning_rate.max);
            assert!(c.beta1.min <= t.beta1 && t.beta1 <= c.beta1.max);
            assert!(c.beta2.min <= t.beta2 && t.beta2 <= c.beta2.max);
            assert!(t.batch_size.is_power_of_two());
        }
    }

    #[test]
    fn cnn_grid_respects_width_order() {
        let grid = cnn_grid(28).unwrap();
        // n1 = 4, 8, 16, 24 admit 2, 3, 4, 4 choices of n2
        assert_eq!(grid.len(), 2 * (2 + 3 + 4 + 4));
        assert!(grid.iter().all(|a| a.neurons2 <= a.neurons1));
        let trials = sample_cnn_trials(&CnnSearchSpace::default(), &grid, 5, 1).unwrap();
        assert_eq!(trials.len(), grid.len() * 5);
        for t in &trials {
            assert!(t.batch_size >= 4 && t.batch_size <= 1024 && t.batch_size.is_power_of_two());
        }
    }

    #[test]
    fn selection_takes_first_best_composite() {
        let scores = [(0.7, 0.6), (0.8, 0.7), (0.7, 0.8), (0.6, 0.5)];
        let r = select(&scores, |_, &s| Ok(s)).unwrap();
        assert_eq!(r.best, 1);
        assert!((r.best_outcome().composite - 0.75).abs() < 1e-12);
        let mut csv = Vec::new();
        r.write_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 5);
        assert!(select::<(f64, f64), _>(&[], |_, &s| Ok(s)).is_err());
    }

    #[test]
    fn tiny_qbm_trial_runs() {
        let pts: Vec<EncodedPoint> = (0..8)
            .map(|i| EncodedPoint {
                inputs: vec![(i % 2) as f64, 1.0 - (i % 2) as f64],
                labels: vec![(i % 2) as u8],
            })
            .collect();
        let trial = QbmTrial {
            hidden: 1,
            epochs: 5,
            batch_size: 4,
            learning_rate: 0.5,
            reads: 10,
        };
        let (acc, auc) = run_qbm_trial(&trial, &pts, &pts, SamplerKind::Exact, 0).unwrap();
        assert_eq!(acc, 1.0);
        assert_eq!(auc, 1.0);
    }
}
