//! Accuracy, ROC curve, AUC and the composite score on hand-made scores.

use qbm::metrics::{accuracy, auc, composite, roc_curve, trapezoid_area, ScoredPrediction};

pub fn run_example() -> qbm::Result<()> {
    let scored = [
        (0.9, 1),
        (0.8, 1),
        (0.7, 0),
        (0.6, 1),
        (0.55, 0),
        (0.4, 1),
        (0.3, 0),
        (0.1, 0),
    ];
    let preds: Vec<ScoredPrediction> = scored
        .iter()
        .map(|&(s, y)| ScoredPrediction::from_score(s, y))
        .collect();
    let acc = accuracy(&preds)?;
    let area = auc(&preds)?;
    let curve = roc_curve(&preds)?;
    println!("roc points {curve:?}");
    println!("acc {acc:.4}, auc {area:.4} (trapezoid {:.4})", trapezoid_area(&curve));
    println!("composite {:.4}", composite(acc, area));

    let always_positive: Vec<ScoredPrediction> = scored
        .iter()
        .map(|&(_, y)| ScoredPrediction::from_score(1.0, y))
        .collect();
    println!(
        "constant positive: acc {:.4}, auc {:.4}",
        accuracy(&always_positive)?,
        auc(&always_positive)?
    );
    Ok(())
}

fn main() {
    run_example().unwrap();
}
