//! The convolutional baseline trained with Adam on synthetic 28×28 images.

use qbm::cnn::{train_cnn, CnnArchitecture, CnnParams, CnnTrainConfig};
use qbm::data::{encode_split, synthetic, Split};
use qbm::trainer::EvalSet;

pub fn run_example() -> qbm::Result<()> {
    let ds = synthetic([300, 60, 100], 4)?;
    let train = encode_split(&ds, Split::Train);
    let val = encode_split(&ds, Split::Val);
    let test = encode_split(&ds, Split::Test);

    let arch = CnnArchitecture::new(5, 16, 8)?;
    println!("kernel 5, dense 16/8: {} parameters", arch.parameter_count());
    let cfg = CnnTrainConfig {
        learning_rate: 0.00384,
        beta1: 0.98428,
        beta2: 0.99925,
        batch_size: 16,
        epochs: 5,
        seed: 0,
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
    let (_, trace) = train_cnn(CnnParams::init(arch, 0)?, &train, &eval, &cfg)?;
    for e in &trace {
        let t = e.get("test").unwrap();
        println!(
            "epoch {}: test acc {:.3} auc {:.3} bce {:.2}",
            e.epoch,
            t.acc,
            t.auc.unwrap_or(f64::NAN),
            t.nll.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}

fn main() {
    run_example().unwrap();
}
