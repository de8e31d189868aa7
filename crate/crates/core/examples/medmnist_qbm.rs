//! Boltzmann machine classifier on a QBMD1 image file.
//!
//! Reads `$QBM_DATA_DIR/pneumoniamnist.qbmd` when it exists and otherwise
//! generates a small synthetic dataset of the same shape.

use std::path::PathBuf;

use qbm::data::{encode_split, synthetic, Dataset, Split};
use qbm::model::{BmParams, UnitLayout};
use qbm::sampler::SamplerConfig;
use qbm::trainer::{train_with_callback, EvalSet, TrainConfig};

fn load() -> qbm::Result<(Dataset, bool)> {
    let dir = std::env::var_os("QBM_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| "data".into());
    let path = dir.join("pneumoniamnist.qbmd");
    if path.exists() {
        Ok((Dataset::load(path)?, true))
    } else {
        Ok((synthetic([400, 80, 160], 7)?, false))
    }
}

pub fn run_example() -> qbm::Result<()> {
    let (ds, real) = load()?;
    println!(
        "{} data: {} train / {} val / {} test, test prevalence {:.3}",
        if real { "PneumoniaMNIST" } else { "synthetic" },
        ds.count(Split::Train),
        ds.count(Split::Val),
        ds.count(Split::Test),
        ds.prevalence(Split::Test).unwrap_or(f64::NAN)
    );
    let train = encode_split(&ds, Split::Train);
    let val = encode_split(&ds, Split::Val);
    let test = encode_split(&ds, Split::Test);

    let layout = UnitLayout::new(train[0].inputs.len(), 6, 1)?;
    let cfg = TrainConfig {
        learning_rate: 0.05,
        batch_size: 16,
        epochs: if real { 10 } else { 5 },
        temperature: 1.0,
        seed: 0,
        track_nll: true,
    };
    let eval = [
        EvalSet {
            name: "val",
            points: &val,
        },
        EvalSet {
            name: "test",
            points: &test,
        },
    ];
    train_with_callback(
        BmParams::init(layout, 0)?,
        &train,
        &eval,
        &cfg,
        &SamplerConfig::exact(),
        |e| {
            let t = e.get("test").unwrap();
            println!(
                "epoch {:>2}: test acc {:.3} auc {:.3} nll {:.1}",
                e.epoch,
                t.acc,
                t.auc.unwrap_or(f64::NAN),
                t.nll.unwrap_or(f64::NAN)
            );
        },
    )?;
    Ok(())
}

fn main() {
    run_example().unwrap();
}
