//! Energy of a small Boltzmann machine, clamping of inputs and labels, and
//! the QUBO / Ising forms handed to annealers.

use qbm::model::{clamp_inputs, clamp_inputs_and_label, ising_to_qubo, qubo_to_ising, to_qubo, BmParams, UnitLayout};
use qbm::sampler::{exact_distribution, index_state};

pub fn run_example() -> qbm::Result<()> {
    // 3 inputs, 2 hidden, 1 label: 11 stored parameters plus 9 weights
    let layout = UnitLayout::new(3, 2, 1)?;
    let params = BmParams::init(layout, 7)?;
    println!("{} trainable parameters", params.parameter_count());

    let inputs = [0.2, 1.0, 0.0];
    // state order: inputs, labels, hidden
    let full = [0.2, 1.0, 0.0, 1.0, 0.0, 1.0];
    println!("E(full state) = {:.6}", params.energy(&full)?);

    let pos = clamp_inputs_and_label(&params, &inputs, &[1], 1.0)?;
    println!(
        "positive phase: {} free units, E(h=01) = {:.6}",
        pos.m(),
        pos.energy(&[0, 1])
    );

    let neg = clamp_inputs(&params, &inputs, 1.0)?;
    println!(
        "negative phase: {} free units, E(y=1,h=01) = {:.6}",
        neg.m(),
        neg.energy(&[1, 0, 1])
    );

    let q = to_qubo(&neg);
    let ising = qubo_to_ising(&q);
    let back = ising_to_qubo(&ising);
    let mut worst: f64 = 0.0;
    for i in 0..1 << neg.m() {
        let x = index_state(i, neg.m());
        let s: Vec<i8> = x.iter().map(|&b| 2 * b as i8 - 1).collect();
        worst = worst
            .max((neg.energy(&x) - q.energy(&x)).abs())
            .max((q.energy(&x) - ising.energy(&s)).abs())
            .max((q.energy(&x) - back.energy(&x)).abs());
    }
    println!("largest energy disagreement across forms: {worst:.2e}");

    let dist = exact_distribution(&neg)?;
    let p_label: f64 = (0..dist.probs.len())
        .filter(|&i| index_state(i, neg.m())[0] == 1)
        .map(|i| dist.probs[i])
        .sum();
    println!("P(label = 1 | inputs) = {p_label:.4}");
    Ok(())
}

fn main() {
    run_example().unwrap();
}
