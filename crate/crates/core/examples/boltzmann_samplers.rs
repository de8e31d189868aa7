//! Exact enumeration, Gibbs sampling and simulated annealing on one random
//! problem, compared by total-variation distance to the exact distribution.

use qbm::model::ReducedProblem;
use qbm::sampler::{exact_distribution, sample, total_variation, SamplerConfig, Schedule};
use rand::Rng;

pub fn run_example() -> qbm::Result<()> {
    let m = 7;
    let mut rng = qbm::seed::rng(11);
    let mut rp = ReducedProblem::new((0..m).map(|_| rng.gen_range(-1.0..1.0)).collect(), 1.0)?;
    for i in 0..m {
        for j in i + 1..m {
            rp.set_weight(i, j, rng.gen_range(-1.0..1.0));
        }
    }
    let exact = exact_distribution(&rp)?;
    println!("most probable state {:?}", exact.argmax());

    let reads = 50_000;
    for (name, cfg) in [
        (
            "exact",
            SamplerConfig {
                reads,
                ..SamplerConfig::exact()
            },
        ),
        ("gibbs", SamplerConfig::gibbs(reads, 50)),
        ("sa", SamplerConfig::sa(reads, Schedule::default())),
        (
            "sa-cold",
            SamplerConfig::sa(
                reads,
                Schedule::Geometric {
                    beta_start: 0.1,
                    beta_end: 10.0,
                    sweeps: 100,
                },
            ),
        ),
    ] {
        let ss = sample(&rp, &cfg.with_seed(5))?;
        let tv = total_variation(&ss.empirical(), &exact.probs);
        println!("{name:>8}: {} distinct states, TV to exact {tv:.4}", ss.distinct());
    }
    Ok(())
}

fn main() {
    run_example().unwrap();
}
