//! Run configuration file read by the `qbm` binary.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cnn::{CnnArchitecture, CnnTrainConfig};
use crate::data::Split;
use crate::device::{DeviceConfig, Mode, Timing, Workload};
use crate::error::{Error, Result};
use crate::model::UnitLayout;
use crate::sampler::{SamplerConfig, SamplerKind, Schedule};
use crate::sweep::{CnnSearchSpace, QbmSearchSpace};
use crate::trainer::TrainConfig;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelSection,
    pub sampler: SamplerSection,
    pub train: TrainSection,
    pub device: DeviceSection,
    pub data: DataSection,
    pub seeds: SeedSection,
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub hidden: usize,
    pub labels: usize,
    pub cnn: CnnArchitecture,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            hidden: 10,
            labels: 1,
            cnn: CnnArchitecture::new(5, 16, 8).unwrap(),
        }
    }
}

/// Sampler used by training and evaluation. `device` runs simulated
/// annealing on the composed multi-region problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerChoice {
    Exact,
    Gibbs,
    Sa,
    Device,
}

impl std::str::FromStr for SamplerChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "device" => Ok(SamplerChoice::Device),
            other => Ok(match other.parse::<SamplerKind>()? {
                SamplerKind::Exact => SamplerChoice::Exact,
                SamplerKind::Gibbs => SamplerChoice::Gibbs,
                SamplerKind::Sa => SamplerChoice::Sa,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplerSection {
    pub kind: SamplerChoice,
    pub reads: usize,
    pub sweeps: usize,
    pub schedule: Schedule,
}

impl Default for SamplerSection {
    fn default() -> Self {
        SamplerSection {
            kind: SamplerChoice::Sa,
            reads: 100,
            sweeps: 200,
            schedule: Schedule::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub temperature: f64,
    pub track_nll: bool,
    pub cnn: CnnOptimizerSection,
}

impl Default for TrainSection {
    fn default() -> Self {
        TrainSection {
            learning_rate: 0.45295,
            batch_size: 73,
            epochs: 20,
            temperature: 1.0,
            track_nll: false,
            cnn: CnnOptimizerSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CnnOptimizerSection {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub batch_size: usize,
    pub epochs: usize,
}

impl Default for CnnOptimizerSection {
    fn default() -> Self {
        CnnOptimizerSection {
            learning_rate: 0.00384,
            beta1: 0.98428,
            beta2: 0.99925,
            batch_size: 16,
            epochs: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeviceSection {
    /// Pegasus size parameter.
    pub pegasus_m: usize,
    pub regions: usize,
    /// Clique size embedded in every region.
    pub clique: usize,
    /// Partition restarts tried by the buffered planner.
    pub restarts: usize,
    pub chain_strength: Option<f64>,
    pub timing: Timing,
    pub workload: Workload,
    /// Mode summarised by the timing report (both are always written).
    pub report_mode: Mode,
}

impl Default for DeviceSection {
    fn default() -> Self {
        DeviceSection {
            pegasus_m: 16,
            regions: 10,
            clique: 21,
            restarts: 8,
            chain_strength: None,
            timing: Timing::default(),
            workload: Workload {
                batches: 3,
                points_per_batch: 5,
                reads: 1000,
                phases: 2,
            },
            report_mode: Mode::Parallel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataSection {
    pub path: Option<PathBuf>,
    pub eval_split: Split,
    /// Use only the first `n` training items.
    pub train_limit: Option<usize>,
}

impl Default for DataSection {
    fn default() -> Self {
        DataSection {
            path: None,
            eval_split: Split::Test,
            train_limit: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeedSection {
    pub init: u64,
    pub train: u64,
    pub sampler: u64,
    pub partition: u64,
    pub embedding: u64,
}

/// Which model family a sweep searches over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepModel {
    Qbm,
    Cnn,
}

impl std::str::FromStr for SweepModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qbm" => Ok(SweepModel::Qbm),
            "cnn" => Ok(SweepModel::Cnn),
            other => Err(Error::InvalidArgument(format!("unknown sweep model `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub model: SweepModel,
    /// Random trials for the Boltzmann machine.
    pub trials: usize,
    /// Random optimiser settings per CNN grid architecture.
    pub per_arch: usize,
    pub qbm_space: QbmSearchSpace,
    pub cnn_space: CnnSearchSpace,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            model: SweepModel::Qbm,
            trials: 20,
            per_arch: 200,
            qbm_space: QbmSearchSpace::default(),
            cnn_space: CnnSearchSpace::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let c: RunConfig = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.layout(1)?;
        self.model.cnn.validate()?;
        self.sampler_config()
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        self.train_config().validate()?;
        self.cnn_train_config().validate()?;
        self.device_config().validate()?;
        self.sweep.qbm_space.validate()?;
        self.sweep.cnn_space.validate()?;
        if self.device.pegasus_m < 2 || self.device.regions == 0 || self.device.clique == 0 {
            return Err(Error::Config(
                "device needs m >= 2 and positive region and clique counts".into(),
            ));
        }
        Ok(())
    }

    pub fn layout(&self, inputs: usize) -> Result<UnitLayout> {
        UnitLayout::new(inputs, self.model.hidden, self.model.labels).map_err(|e| Error::Config(e.to_string()))
    }

    /// Software sampler settings; the device choice maps onto SA.
    pub fn sampler_config(&self) -> SamplerConfig {
        let kind = match self.sampler.kind {
            SamplerChoice::Exact => SamplerKind::Exact,
            SamplerChoice::Gibbs => SamplerKind::Gibbs,
            SamplerChoice::Sa | SamplerChoice::Device => SamplerKind::Sa,
        };
        SamplerConfig {
            kind,
            reads: self.sampler.reads,
            sweeps: self.sampler.sweeps,
            schedule: self.sampler.schedule.clone(),
            seed: self.seeds.sampler,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.train.learning_rate,
            batch_size: self.train.batch_size,
            epochs: self.train.epochs,
            temperature: self.train.temperature,
            seed: self.seeds.train,
            track_nll: self.train.track_nll,
        }
    }

    pub fn cnn_train_config(&self) -> CnnTrainConfig {
        let c = &self.train.cnn;
        CnnTrainConfig {
            learning_rate: c.learning_rate,
            beta1: c.beta1,
            beta2: c.beta2,
            batch_size: c.batch_size,
            epochs: c.epochs,
            seed: self.seeds.train,
        }
    }

    pub fn device_config(&self) -> DeviceConfig {
        DeviceConfig {
            chain_strength: self.device.chain_strength,
            reads_per_cycle: self.sampler.reads,
            schedule: self.sampler.schedule.clone(),
            timing: self.device.timing,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let c = RunConfig::from_json("{}").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.train.epochs, 20);
        assert_eq!(c.sampler.reads, 100);
    }

    #[test]
    fn json_round_trip() {
        let mut c = RunConfig::default();
        c.model.hidden = 8;
        c.sampler.kind = SamplerChoice::Device;
        c.device.chain_strength = Some(2.5);
        c.data.path = Some("data/breastmnist.qbmd".into());
        c.seeds.train = 7;
        assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_json(r#"{"model": {"hiden": 3}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"extra": {}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"train": {"cnn": {"beta3": 0.9}}}"#).is_err());
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(RunConfig::from_json(r#"{"sampler": {"reads": 0}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"train": {"batch_size": 0}}"#).is_err());
        assert!(
            RunConfig::from_json(r#"{"model": {"cnn": {"kernel_size": 4, "neurons1": 8, "neurons2": 4}}}"#).is_err()
        );
        assert!(RunConfig::from_json(r#"{"model": {"labels": 0}}"#).is_err());
    }

    #[test]
    fn sampler_choice_parses() {
        assert_eq!("device".parse::<SamplerChoice>().unwrap(), SamplerChoice::Device);
        assert_eq!("gibbs".parse::<SamplerChoice>().unwrap(), SamplerChoice::Gibbs);
        assert!("qpu".parse::<SamplerChoice>().is_err());
    }
}
