//! Several small problems annealed at once on disjoint regions of one
//! simulated device, decoded by chain majority vote, plus the modelled
//! device time of a training workload.

use qbm::device::{compare_timing, DeviceConfig, DeviceSampler, Timing, Workload};
use qbm::model::ReducedProblem;
use qbm::sampler::{exact_distribution, total_variation, PhaseSampler};
use qbm::topology::{buffered_partition, pegasus};
use rand::Rng;

pub fn run_example() -> qbm::Result<()> {
    let g = pegasus(6)?;
    let (_, plan) = buffered_partition(&g, 4, 0, 4)?;
    let device = DeviceSampler::build(g, plan, 5, DeviceConfig::default(), 0)?;

    let mut rng = qbm::seed::rng(2);
    let problems: Vec<ReducedProblem> = (0..6)
        .map(|_| {
            let mut rp = ReducedProblem::new((0..5).map(|_| rng.gen_range(-0.5..0.5)).collect(), 1.0)?;
            for i in 0..5 {
                for j in i + 1..5 {
                    rp.set_weight(i, j, rng.gen_range(-0.5..0.5));
                }
            }
            Ok(rp)
        })
        .collect::<qbm::Result<_>>()?;

    let sets = device.sample_all(&problems, 9)?;
    for (i, (rp, ss)) in problems.iter().zip(&sets).enumerate() {
        let tv = total_variation(&ss.empirical(), &exact_distribution(rp)?.probs);
        println!("problem {i}: {} reads, TV to exact {tv:.3}", ss.total());
    }
    // moments come from the same packed cycles
    let mo = device.estimate(&problems, 9)?;
    println!("first moments of problem 0: {:.3?}", mo[0].first);
    let u = device.usage();
    println!(
        "{} instances in {} cycles, chain break rate {:.4}",
        u.instances, u.cycles, u.mean_chain_break_rate
    );

    let workload = Workload {
        batches: 3,
        points_per_batch: 5,
        reads: 1000,
        phases: 2,
    };
    let cmp = compare_timing(&workload, &Timing::default(), 10)?;
    println!(
        "{} sequential cycles vs {} parallel: {:.1}% fewer cycles, {:.1}% less device time",
        cmp.sequential.cycles,
        cmp.parallel.cycles,
        100.0 * cmp.cycle_reduction,
        100.0 * cmp.speedup
    );
    print!("{}", cmp.to_csv());
    Ok(())
}

fn main() {
    run_example().unwrap();
}
