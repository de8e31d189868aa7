//! Bars versus stripes on a 4×4 grid, learned with exact Boltzmann averages
//! and with simulated annealing.

use qbm::data::bars_and_stripes;
use qbm::model::{BmParams, UnitLayout};
use qbm::sampler::{SamplerConfig, Schedule};
use qbm::trainer::{train, EvalSet, TrainConfig};

pub fn run_example() -> qbm::Result<()> {
    let points = bars_and_stripes(4)?;
    let layout = UnitLayout::new(16, 4, 1)?;
    let cfg = TrainConfig {
        learning_rate: 1.0,
        batch_size: 1,
        epochs: 20,
        temperature: 1.0,
        seed: 3,
        track_nll: false,
    };
    let eval = [EvalSet {
        name: "train",
        points: &points,
    }];
    let sa = Schedule::Geometric {
        beta_start: 0.1,
        beta_end: 1.0,
        sweeps: 20,
    };
    for (name, sampler) in [("exact", SamplerConfig::exact()), ("sa", SamplerConfig::sa(1000, sa))] {
        let (_, trace) = train(BmParams::init(layout, 3)?, &points, &eval, &cfg, &sampler)?;
        let accs: Vec<String> = trace.iter().map(|m| format!("{:.2}", m.splits[0].acc)).collect();
        println!("{name:>5}: {}", accs.join(" "));
    }
    Ok(())
}

fn main() {
    run_example().unwrap();
}
