//! One complete-graph embedding per buffered region, checked for chain
//! connectivity, coupler coverage and disjointness across regions.

use qbm::embedding::{build_parallel, validate_embedding};
use qbm::topology::{buffered_partition, pegasus};

pub fn run_example() -> qbm::Result<()> {
    let (m, regions, k) = (6, 4, 8);
    let g = pegasus(m)?;
    let (_, plan) = buffered_partition(&g, regions, 0, 4)?;
    let pe = build_parallel(&g, &plan, k, 0)?;
    pe.validate(&g, &plan)?;
    for (r, e) in &pe.embeddings {
        let report = validate_embedding(e, k, &g, &plan.regions[*r]);
        let s = e.stats();
        println!(
            "region {r}: K_{k} on {} qubits, chains {}..{} (mean {:.2}), valid {}",
            s.total,
            s.min,
            s.max,
            s.mean,
            report.is_valid()
        );
    }
    let s = pe.stats();
    println!("all regions: {} qubits, longest chain {}", s.total, s.max);
    let restored = qbm::embedding::ParallelEmbedding::from_json(&pe.to_json()?)?;
    println!("json round trip equal: {}", restored == pe);
    Ok(())
}

fn main() {
    run_example().unwrap();
}
