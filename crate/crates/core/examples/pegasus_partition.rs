//! Pegasus hardware graph, a balanced partition into regions and the
//! buffer that removes every coupler between regions.
//!
//! Pass the size parameter as the first argument (default 6; the full
//! device graph is 16).

use qbm::topology::{apply_buffer, partition, pegasus, smallest_region_core};

fn run_example_with(m: usize, k: usize) -> qbm::Result<()> {
    let g = pegasus(m)?;
    let hist: Vec<(usize, usize)> = g
        .degree_histogram()
        .into_iter()
        .enumerate()
        .filter(|&(_, c)| c > 0)
        .collect();
    println!(
        "P{m}: {} qubits, {} couplers, degree histogram {hist:?}",
        g.num_nodes(),
        g.num_edges()
    );

    let plan = partition(&g, k, 0)?;
    println!(
        "{k} regions, sizes {:?}, balance {:.3}, {} cut couplers",
        plan.region_sizes(),
        plan.balance(),
        plan.cross_edges(&g).len()
    );
    let buffered = apply_buffer(&g, &plan);
    buffered.validate(&g)?;
    println!(
        "after buffering: sizes {:?}, {} qubits removed, {} cut couplers, smallest connected core {}",
        buffered.region_sizes(),
        buffered.buffer.len(),
        buffered.cross_edges(&g).len(),
        smallest_region_core(&g, &buffered)
    );
    Ok(())
}

pub fn run_example() -> qbm::Result<()> {
    run_example_with(6, 4)
}

fn main() {
    let m = std::env::args().nth(1).and_then(|a| a.parse().ok());
    match m {
        Some(m) => run_example_with(m, 10).unwrap(),
        None => run_example().unwrap(),
    }
}
