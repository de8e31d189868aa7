//! Simulated annealing device with parallel instance placement: composes
//! several logical problems onto disjoint hardware regions, samples the
//! physical spins, decodes chains back to logical variables and accounts for
//! anneal cycles and device time.

use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::{build_parallel, ParallelEmbedding};
use crate::error::{Error, Result};
use crate::model::{qubo_to_ising, to_qubo, IsingProblem, ReducedProblem};
use crate::sampler::{anneal, moments, Moments, PhaseSampler, SampleSet, Schedule, SparseQubo};
use crate::seed;
use crate::topology::{HardwareGraph, NodeId, PartitionPlan};

/// Default chain strength relative to the largest logical coefficient.
pub const CHAIN_STRENGTH_FACTOR: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Timing {
    pub programming_us: f64,
    pub per_read_us: f64,
    pub per_cycle_overhead_us: f64,
}

impl Default for Timing {
    fn default() -> Self {
        Timing {
            programming_us: 15_000.0,
            per_read_us: 300.0,
            per_cycle_overhead_us: 0.0,
        }
    }
}

impl Timing {
    pub fn cycle_us(&self, reads: usize) -> f64 {
        self.programming_us + reads as f64 * self.per_read_us + self.per_cycle_overhead_us
    }

    pub fn validate(&self) -> Result<()> {
        if [self.programming_us, self.per_read_us, self.per_cycle_overhead_us]
            .iter()
            .any(|v| !(*v >= 0.0) || !v.is_finite())
        {
            return Err(Error::Config("timing constants must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    /// Ferromagnetic chain coupling magnitude. `None` uses
    /// `CHAIN_STRENGTH_FACTOR` times the largest logical coefficient.
    #[serde(default)]
    pub chain_strength: Option<f64>,
    pub reads_per_cycle: usize,
    /// Annealing schedule over the physical spins.
    #[serde(default)]
    pub schedule: Schedule,
    #[serde(default)]
    pub timing: Timing,
}

impl Default for DeviceConfig {
    fn default() -> Self {
        DeviceConfig {
            chain_strength: None,
            reads_per_cycle: 1000,
            schedule: Schedule::default(),
            timing: Timing::default(),
        }
    }
}

impl DeviceConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(cs) = self.chain_strength {
            if !(cs > 0.0) {
                return Err(Error::Config("chain_strength must be positive".into()));
            }
        }
        if self.reads_per_cycle == 0 {
            return Err(Error::Config("reads_per_cycle must be positive".into()));
        }
        self.schedule.validate()?;
        self.timing.validate()
    }
}

/// Ising problem over the physical nodes used by a set of composed
/// instances. Variable `i` is physical node `nodes[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComposedProblem {
    pub ising: IsingProblem,
    pub nodes: Vec<NodeId>,
    /// `(instance, logical unit)` of each variable.
    pub instance_map: Vec<(usize, usize)>,
    /// Variables of each instance's chains: `chains[instance][unit]`.
    pub chains: Vec<Vec<Vec<usize>>>,
    pub chain_strength: f64,
}

impl ComposedProblem {
    pub fn num_instances(&self) -> usize {
        self.chains.len()
    }
}

/// Places instance `i` on the `i`-th region embedding. An instance with
/// fewer variables than the embedding uses its first chains.
///
/// Each logical field is split evenly over its chain, each logical coupling
/// goes to the lexicographically first physical edge between the two chains,
/// and every edge inside a chain gets `-chain_strength`.
pub fn compose(
    g: &HardwareGraph,
    pe: &ParallelEmbedding,
    instances: &[IsingProblem],
    cfg: &DeviceConfig,
) -> Result<ComposedProblem> {
    cfg.validate()?;
    if instances.len() > pe.regions() {
        return Err(Error::InvalidArgument(format!(
            "{} instances exceed {} regions",
            instances.len(),
            pe.regions()
        )));
    }
    for inst in instances {
        if inst.num_vars == 0 || inst.num_vars > pe.k {
            return Err(Error::Dimension {
                what: "instance variables",
                expected: pe.k,
                actual: inst.num_vars,
            });
        }
    }
    let chain_strength = cfg.chain_strength.unwrap_or_else(|| {
        let max = instances
            .iter()
            .map(IsingProblem::max_abs_coefficient)
            .fold(0.0, f64::max);
        if max > 0.0 {
            CHAIN_STRENGTH_FACTOR * max
        } else {
            1.0
        }
    });

    let mut nodes = Vec::new();
    let mut instance_map = Vec::new();
    let mut chains = Vec::with_capacity(instances.len());
    for (i, inst) in instances.iter().enumerate() {
        let emb = &pe.embeddings[i].1;
        let mut inst_chains = Vec::with_capacity(inst.num_vars);
        for unit in 0..inst.num_vars {
            let vars: Vec<usize> = emb.chains[unit]
                .iter()
                .map(|&n| {
                    nodes.push(n);
                    instance_map.push((i, unit));
                    nodes.len() - 1
                })
                .collect();
            inst_chains.push(vars);
        }
        chains.push(inst_chains);
    }
    let local: std::collections::HashMap<NodeId, usize> = nodes.iter().enumerate().map(|(v, &n)| (n, v)).collect();

    let mut ising = IsingProblem::new(nodes.len());
    let nodes = &nodes;
    for (i, inst) in instances.iter().enumerate() {
        ising.offset += inst.offset;
        let ch = &chains[i];
        for (&unit, &h) in &inst.h {
            let share = h / ch[unit].len() as f64;
            for &v in &ch[unit] {
                ising.add_h(v, share);
            }
        }
        for (&(a, b), &j) in &inst.j {
            let edge = ch[a]
                .iter()
                .flat_map(|&va| {
                    let na = nodes[va];
                    g.neighbors(na)
                        .iter()
                        .filter_map(|nb| local.get(nb).copied())
                        .filter(|&vb| instance_map[vb] == (i, b))
                        .map(move |vb| (na.min(nodes[vb]), na.max(nodes[vb])))
                })
                .min()
                .ok_or_else(|| Error::Graph(format!("instance {i}: no edge between chains {a} and {b}")))?;
            ising.add_j(local[&edge.0], local[&edge.1], j);
        }
        for vars in ch {
            for (x, &va) in vars.iter().enumerate() {
                for &vb in &vars[x + 1..] {
                    if g.has_edge(nodes[va], nodes[vb]) {
                        ising.add_j(va, vb, -chain_strength);
                    }
                }
            }
        }
    }
    Ok(ComposedProblem {
        ising,
        nodes: nodes.clone(),
        instance_map,
        chains,
        chain_strength,
    })
}

/// One annealing cycle: `reads_per_cycle` SA reads over the physical spins,
/// reported as binary states `x = (s + 1) / 2`. Besides single-spin moves,
/// every chain is offered a joint flip once per sweep, so chains move as the
/// large effective spins they represent.
pub fn run_cycle(cp: &ComposedProblem, cfg: &DeviceConfig, seed_value: u64) -> Result<SampleSet> {
    cfg.validate()?;
    let q = SparseQubo::from_ising(&cp.ising);
    let chains: Vec<Vec<usize>> = cp.chains.iter().flatten().filter(|c| c.len() > 1).cloned().collect();
    Ok(anneal(
        &q,
        &cfg.schedule.betas(),
        &chains,
        cfg.reads_per_cycle,
        seed_value,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    /// One logical sample set per instance.
    pub sets: Vec<SampleSet>,
    /// Fraction of (read, chain) pairs whose chain was not unanimous.
    pub chain_break_rate: f64,
}

/// Majority vote per chain; ties are broken by a seeded coin flip per read.
pub fn decode(raw: &SampleSet, cp: &ComposedProblem, seed_value: u64) -> Decoded {
    let mut rng = seed::rng(seed_value);
    let mut sets: Vec<SampleSet> = cp.chains.iter().map(|c| SampleSet::new(c.len())).collect();
    let total_chains: usize = cp.chains.iter().map(Vec::len).sum();
    let mut broken = 0u64;
    for (state, count) in raw.iter() {
        // (ones, size) per chain; ties need a fresh coin for every read
        let votes: Vec<Vec<(usize, usize)>> = cp
            .chains
            .iter()
            .map(|inst| {
                inst.iter()
                    .map(|vars| (vars.iter().filter(|&&v| state[v] == 1).count(), vars.len()))
                    .collect()
            })
            .collect();
        let breaks = votes
            .iter()
            .flatten()
            .filter(|&&(ones, n)| ones != 0 && ones != n)
            .count();
        broken += breaks as u64 * count;
        let has_tie = votes.iter().flatten().any(|&(ones, n)| 2 * ones == n);
        let reads = if has_tie { count } else { 1 };
        let weight = if has_tie { 1 } else { count };
        for _ in 0..reads {
            for (i, inst) in votes.iter().enumerate() {
                let x: Vec<u8> = inst
                    .iter()
                    .map(|&(ones, n)| match (2 * ones).cmp(&n) {
                        std::cmp::Ordering::Greater => 1,
                        std::cmp::Ordering::Less => 0,
                        std::cmp::Ordering::Equal => rng.gen::<bool>() as u8,
                    })
                    .collect();
                sets[i].add(x, weight);
            }
        }
    }
    let denom = (total_chains as u64 * raw.total()).max(1);
    Decoded {
        sets,
        chain_break_rate: broken as f64 / denom as f64,
    }
}

/// Anneal cycles needed for `instances` problems on `regions` regions.
pub fn schedule(instances: usize, regions: usize) -> Result<usize> {
    if instances == 0 || regions == 0 {
        return Err(Error::InvalidArgument(
            "schedule needs at least one instance and one region".into(),
        ));
    }
    Ok(instances.div_ceil(regions))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Sequential,
    Parallel,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sequential" => Ok(Mode::Sequential),
            "parallel" => Ok(Mode::Parallel),
            other => Err(Error::InvalidArgument(format!("unknown mode `{other}`"))),
        }
    }
}

/// Sampling demand of a training run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Workload {
    pub batches: usize,
    pub points_per_batch: usize,
    pub reads: usize,
    /// Sampling phases per point (2: clamped and input-clamped).
    pub phases: usize,
}

impl Workload {
    pub fn instances(&self) -> usize {
        self.batches * self.points_per_batch * self.phases
    }

    fn validate(&self) -> Result<()> {
        if self.batches == 0 || self.points_per_batch == 0 || self.reads == 0 || self.phases == 0 {
            return Err(Error::InvalidArgument("workload entries must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub mode: Mode,
    pub regions: usize,
    pub instances: usize,
    pub cycles: usize,
    pub total_time_us: f64,
    pub speedup_vs_sequential: f64,
    pub timing: Timing,
}

fn cycles_for(workload: &Workload, regions: usize, mode: Mode) -> Result<usize> {
    Ok(match mode {
        Mode::Sequential => workload.instances(),
        // parameters change after every batch, so batches never share a cycle
        Mode::Parallel => workload.batches * schedule(workload.points_per_batch * workload.phases, regions)?,
    })
}

/// Device time of a workload. Each cycle costs programming, the reads and
/// a fixed overhead; parallel mode packs up to `regions` instances of one
/// batch into a cycle.
pub fn timing_report(workload: &Workload, timing: &Timing, regions: usize, mode: Mode) -> Result<TimingReport> {
    workload.validate()?;
    timing.validate()?;
    if regions == 0 {
        return Err(Error::InvalidArgument("regions must be positive".into()));
    }
    let per_cycle = timing.cycle_us(workload.reads);
    let cycles = cycles_for(workload, regions, mode)?;
    let sequential = cycles_for(workload, regions, Mode::Sequential)? as f64 * per_cycle;
    let total = cycles as f64 * per_cycle;
    Ok(TimingReport {
        mode,
        regions,
        instances: workload.instances(),
        cycles,
        total_time_us: total,
        speedup_vs_sequential: if sequential > 0.0 {
            1.0 - total / sequential
        } else {
            0.0
        },
        timing: *timing,
    })
}

/// Both modes side by side, plus the cycle-count reduction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingComparison {
    pub workload: Workload,
    pub sequential: TimingReport,
    pub parallel: TimingReport,
    pub speedup: f64,
    pub cycle_reduction: f64,
}

impl TimingComparison {
    /// `mode,cycles,total_time_us` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("mode,cycles,total_time_us\n");
        for r in [&self.sequential, &self.parallel] {
            let mode = if r.mode == Mode::Sequential {
                "sequential"
            } else {
                "parallel"
            };
            s.push_str(&format!("{mode},{},{}\n", r.cycles, r.total_time_us));
        }
        s
    }
}

pub fn compare_timing(workload: &Workload, timing: &Timing, regions: usize) -> Result<TimingComparison> {
    let sequential = timing_report(workload, timing, regions, Mode::Sequential)?;
    let parallel = timing_report(workload, timing, regions, Mode::Parallel)?;
    Ok(TimingComparison {
        workload: *workload,
        speedup: parallel.speedup_vs_sequential,
        cycle_reduction: 1.0 - parallel.cycles as f64 / sequential.cycles as f64,
        sequential,
        parallel,
    })
}

/// Ising form of a reduced problem (same energy on every state).
pub fn reduced_to_ising(rp: &ReducedProblem) -> IsingProblem {
    qubo_to_ising(&to_qubo(rp))
}

/// Running totals of device usage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceUsage {
    pub cycles: usize,
    pub instances: usize,
    pub mean_chain_break_rate: f64,
}

/// A [`PhaseSampler`] backed by the simulated device: every call packs its
/// problems, in order, into cycles of up to one instance per region.
#[derive(Debug)]
pub struct DeviceSampler {
    pub graph: HardwareGraph,
    pub plan: PartitionPlan,
    pub embedding: ParallelEmbedding,
    pub config: DeviceConfig,
    cycles: AtomicUsize,
    instances: AtomicUsize,
    /// Sum of per-cycle break rates, as f64 bits.
    break_sum: AtomicU64,
}

impl DeviceSampler {
    pub fn new(
        graph: HardwareGraph,
        plan: PartitionPlan,
        embedding: ParallelEmbedding,
        config: DeviceConfig,
    ) -> Result<Self> {
        config.validate()?;
        embedding.validate(&graph, &plan)?;
        Ok(DeviceSampler {
            graph,
            plan,
            embedding,
            config,
            cycles: AtomicUsize::new(0),
            instances: AtomicUsize::new(0),
            break_sum: AtomicU64::new(0f64.to_bits()),
        })
    }

    /// Embeds `K_k` into every region of a buffered plan first.
    pub fn build(
        graph: HardwareGraph,
        plan: PartitionPlan,
        k: usize,
        config: DeviceConfig,
        seed_value: u64,
    ) -> Result<Self> {
        let embedding = build_parallel(&graph, &plan, k, seed_value)?;
        Self::new(graph, plan, embedding, config)
    }

    pub fn regions(&self) -> usize {
        self.embedding.regions()
    }

    pub fn usage(&self) -> DeviceUsage {
        let cycles = self.cycles.load(Ordering::Relaxed);
        DeviceUsage {
            cycles,
            instances: self.instances.load(Ordering::Relaxed),
            mean_chain_break_rate: if cycles == 0 {
                0.0
            } else {
                f64::from_bits(self.break_sum.load(Ordering::Relaxed)) / cycles as f64
            },
        }
    }

    fn add_break_rate(&self, rate: f64) {
        let mut cur = self.break_sum.load(Ordering::Relaxed);
        loop {
            let new = (f64::from_bits(cur) + rate).to_bits();
            match self
                .break_sum
                .compare_exchange_weak(cur, new, Ordering::Relaxed, Ordering::Relaxed)
            {
                Ok(_) => return,
                Err(v) => cur = v,
            }
        }
    }

    /// Logical sample sets for each problem, packing them into cycles.
    pub fn sample_all(&self, problems: &[ReducedProblem], seed_value: u64) -> Result<Vec<SampleSet>> {
        let r = self.regions();
        let per_cycle: Vec<Vec<SampleSet>> = problems
            .par_chunks(r)
            .enumerate()
            .map(|(c, chunk)| {
                let instances: Vec<IsingProblem> = chunk.iter().map(reduced_to_ising).collect();
                let cp = compose(&self.graph, &self.embedding, &instances, &self.config)?;
                let cycle_seed = seed::derive(seed_value, c as u64);
                let raw = run_cycle(&cp, &self.config, cycle_seed)?;
                let decoded = decode(&raw, &cp, seed::derive(cycle_seed, u64::MAX));
                self.cycles.fetch_add(1, Ordering::Relaxed);
                self.instances.fetch_add(chunk.len(), Ordering::Relaxed);
                self.add_break_rate(decoded.chain_break_rate);
                Ok(decoded.sets)
            })
            .collect::<Result<_>>()?;
        Ok(per_cycle.into_iter().flatten().collect())
    }
}

impl PhaseSampler for DeviceSampler {
    fn estimate(&self, problems: &[ReducedProblem], seed_value: u64) -> Result<Vec<Moments>> {
        self.sample_all(problems, seed_value)?.iter().map(moments).collect()
    }
}
