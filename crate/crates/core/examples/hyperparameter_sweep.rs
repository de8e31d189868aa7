//! Random search over Boltzmann machine hyperparameters, picking the trial
//! with the best validation mean of accuracy and AUC.

use qbm::data::{encode_split, synthetic, Split};
use qbm::sampler::SamplerKind;
use qbm::sweep::{run_qbm_trial, sample_qbm_trials, select, IntRange, QbmSearchSpace};

pub fn run_example() -> qbm::Result<()> {
    let ds = synthetic([200, 60, 0], 3)?;
    let train = encode_split(&ds, Split::Train);
    let val = encode_split(&ds, Split::Val);

    // narrower than the default space so the example stays quick
    let space = QbmSearchSpace {
        hidden: IntRange { min: 1, max: 6 },
        epochs: IntRange { min: 1, max: 3 },
        ..QbmSearchSpace::default()
    };
    let trials = sample_qbm_trials(&space, 6, 0)?;
    let result = select(&trials, |i, t| {
        let r = run_qbm_trial(t, &train, &val, SamplerKind::Exact, i as u64)?;
        println!(
            "trial {i}: hidden {:>2} epochs {} batch {:>3} lr {:.5} -> acc {:.3} auc {:.3}",
            t.hidden, t.epochs, t.batch_size, t.learning_rate, r.0, r.1
        );
        Ok(r)
    })?;
    let best = result.best_outcome();
    println!("best trial {} with composite {:.4}", best.trial, best.composite);
    Ok(())
}

fn main() {
    run_example().unwrap();
}
