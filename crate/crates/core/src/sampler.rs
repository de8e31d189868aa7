//! Boltzmann samplers over reduced problems: exact enumeration, Gibbs
//! sampling and simulated annealing.
//!
//! Reads are independent. Read `r` of a call seeded with `s` draws from the
//! stream `seed::derive(s, r)`, so results are a pure function of the problem
//! and the config regardless of how reads are scheduled across threads.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{IsingProblem, QuboProblem, ReducedProblem};
use crate::seed;

/// Largest free-unit count handled by exact enumeration.
pub const ENUMERATION_LIMIT: usize = 24;

/// Inverse-temperature schedule for simulated annealing. One Metropolis
/// sweep is performed per entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Schedule {
    Geometric {
        beta_start: f64,
        beta_end: f64,
        sweeps: usize,
    },
    Constant {
        beta: f64,
        sweeps: usize,
    },
    Explicit {
        betas: Vec<f64>,
    },
}

impl Schedule {
    /// Geometric from 0.1 to `1 / T` over 100 sweeps, ending at the
    /// temperature whose Boltzmann averages the gradient needs.
    pub fn default_for(temperature: f64) -> Self {
        Schedule::Geometric {
            beta_start: 0.1,
            beta_end: 1.0 / temperature,
            sweeps: 100,
        }
    }

    pub fn betas(&self) -> Vec<f64> {
        match *self {
            Schedule::Geometric {
                beta_start,
                beta_end,
                sweeps,
            } => {
                if sweeps == 1 {
                    return vec![beta_end];
                }
                let (l0, l1) = (beta_start.ln(), beta_end.ln());
                let step = (l1 - l0) / (sweeps - 1) as f64;
                (0..sweeps).map(|i| (l0 + step * i as f64).exp()).collect()
            }
            Schedule::Constant { beta, sweeps } => vec![beta; sweeps],
            Schedule::Explicit { ref betas } => betas.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let betas = self.betas();
        if betas.is_empty() {
            return Err(Error::InvalidArgument("annealing schedule is empty".into()));
        }
        if betas.iter().any(|b| !(*b > 0.0) || !b.is_finite()) {
            return Err(Error::InvalidArgument("inverse temperatures must be positive".into()));
        }
        // geometric rounding can wobble in the last ulp
        if betas.windows(2).any(|w| w[1] < w[0] * (1.0 - 1e-12)) {
            return Err(Error::InvalidArgument("schedule must be non-decreasing in beta".into()));
        }
        Ok(())
    }
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule::default_for(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    Exact,
    Gibbs,
    Sa,
}

impl std::str::FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(SamplerKind::Exact),
            "gibbs" => Ok(SamplerKind::Gibbs),
            "sa" => Ok(SamplerKind::Sa),
            other => Err(Error::InvalidArgument(format!("unknown sampler kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerConfig {
    pub kind: SamplerKind,
    /// Samples drawn per problem.
    pub reads: usize,
    /// Gibbs equilibration passes per read.
    #[serde(default = "default_sweeps")]
    pub sweeps: usize,
    #[serde(default)]
    pub schedule: Schedule,
    #[serde(default)]
    pub seed: u64,
}

fn default_sweeps() -> usize {
    200
}

impl SamplerConfig {
    pub fn exact() -> Self {
        SamplerConfig {
            kind: SamplerKind::Exact,
            reads: 1000,
            sweeps: default_sweeps(),
            schedule: Schedule::default(),
            seed: 0,
        }
    }

    pub fn gibbs(reads: usize, sweeps: usize) -> Self {
        SamplerConfig {
            kind: SamplerKind::Gibbs,
            reads,
            sweeps,
            ..Self::exact()
        }
    }

    pub fn sa(reads: usize, schedule: Schedule) -> Self {
        SamplerConfig {
            kind: SamplerKind::Sa,
            reads,
            schedule,
            ..Self::exact()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.reads == 0 {
            return Err(Error::InvalidArgument("reads must be positive".into()));
        }
        match self.kind {
            SamplerKind::Gibbs if self.sweeps == 0 => {
                Err(Error::InvalidArgument("Gibbs sampling needs at least one sweep".into()))
            }
            SamplerKind::Sa => self.schedule.validate(),
            _ => Ok(()),
        }
    }
}

/// Multiset of binary configurations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSet {
    m: usize,
    counts: BTreeMap<Vec<u8>, u64>,
}

impl SampleSet {
    pub fn new(m: usize) -> Self {
        SampleSet {
            m,
            counts: BTreeMap::new(),
        }
    }

    pub fn from_states<I: IntoIterator<Item = Vec<u8>>>(m: usize, states: I) -> Self {
        let mut ss = SampleSet::new(m);
        for s in states {
            ss.add(s, 1);
        }
        ss
    }

    pub fn add(&mut self, state: Vec<u8>, multiplicity: u64) {
        assert_eq!(state.len(), self.m, "state length must equal m");
        if multiplicity > 0 {
            *self.counts.entry(state).or_insert(0) += multiplicity;
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[u8], u64)> {
        self.counts.iter().map(|(s, &c)| (s.as_slice(), c))
    }

    pub fn multiplicity(&self, state: &[u8]) -> u64 {
        self.counts.get(state).copied().unwrap_or(0)
    }

    /// Most frequent state; ties go to the lexicographically smallest.
    pub fn modal(&self) -> Option<&[u8]> {
        let mut best: Option<(&Vec<u8>, u64)> = None;
        for (s, &c) in &self.counts {
            if best.is_none_or(|(_, bc)| c > bc) {
                best = Some((s, c));
            }
        }
        best.map(|(s, _)| s.as_slice())
    }

    /// Empirical probability table indexed like [`ExactDistribution`].
    pub fn empirical(&self) -> Vec<f64> {
        assert!(self.m <= ENUMERATION_LIMIT);
        let total = self.total() as f64;
        let mut p = vec![0.0; 1 << self.m];
        for (s, &c) in &self.counts {
            p[state_index(s)] += c as f64 / total;
        }
        p
    }

    /// Writes one `<bitstring> <multiplicity>` line per distinct state.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        for (s, c) in self.iter() {
            let mut line = String::with_capacity(s.len() + 12);
            for &b in s {
                line.push(if b != 0 { '1' } else { '0' });
            }
            writeln!(line, " {c}").unwrap();
            out.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let mut ss: Option<SampleSet> = None;
        for (n, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let bad = || Error::Format(format!("line {}: expected `<bitstring> <multiplicity>`", n + 1));
            let mut parts = line.split_whitespace();
            let bits = parts.next().ok_or_else(bad)?;
            let count: u64 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            if parts.next().is_some() {
                return Err(bad());
            }
            let state = bits
                .bytes()
                .map(|b| match b {
                    b'0' => Ok(0),
                    b'1' => Ok(1),
                    _ => Err(bad()),
                })
                .collect::<Result<Vec<u8>>>()?;
            let set = ss.get_or_insert_with(|| SampleSet::new(state.len()));
            if state.len() != set.m {
                return Err(Error::Format(format!("line {}: inconsistent state length", n + 1)));
            }
            set.add(state, count);
        }
        ss.ok_or(Error::EmptySampleSet)
    }
}

/// Bit `i` of the index is unit `i`.
pub fn state_index(x: &[u8]) -> usize {
    x.iter()
        .enumerate()
        .fold(0, |acc, (i, &b)| acc | ((b as usize & 1) << i))
}

pub fn index_state(index: usize, m: usize) -> Vec<u8> {
    (0..m).map(|i| ((index >> i) & 1) as u8).collect()
}

/// Boltzmann probabilities of all `2^m` configurations.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactDistribution {
    pub m: usize,
    pub probs: Vec<f64>,
    /// `ln Z` including the problem offset.
    pub log_partition: f64,
}

impl ExactDistribution {
    pub fn prob(&self, x: &[u8]) -> f64 {
        self.probs[state_index(x)]
    }

    pub fn argmax(&self) -> Vec<u8> {
        let (i, _) = self.probs.iter().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |best, (i, &p)| if p > best.1 { (i, p) } else { best },
        );
        index_state(i, self.m)
    }
}

pub fn exact_distribution(rp: &ReducedProblem) -> Result<ExactDistribution> {
    let m = rp.m();
    if m > ENUMERATION_LIMIT {
        return Err(Error::TooLargeForEnumeration {
            units: m,
            limit: ENUMERATION_LIMIT,
        });
    }
    let t = rp.temperature;
    // energies by Gray-code walk: one field update per state
    let mut x = vec![0u8; m];
    let mut neg_e = vec![0.0; 1 << m];
    let mut e = rp.offset;
    neg_e[0] = -e / t;
    let mut idx = 0usize;
    for step in 1usize..(1 << m) {
        let i = step.trailing_zeros() as usize;
        let row = rp.coupling_row(i);
        let field: f64 = rp.bias[i]
            + row
                .iter()
                .zip(&x)
                .filter(|(_, &xj)| xj != 0)
                .map(|(w, _)| w)
                .sum::<f64>();
        // E = offset - Σ b x - Σ W x x, flipping x_i changes E by ∓field
        if x[i] == 0 {
            e -= field;
            x[i] = 1;
        } else {
            e += field;
            x[i] = 0;
        }
        idx ^= 1 << i;
        neg_e[idx] = -e / t;
    }
    let max = neg_e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut probs: Vec<f64> = neg_e.iter().map(|v| (v - max).exp()).collect();
    let z: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= z);
    Ok(ExactDistribution {
        m,
        probs,
        log_partition: max + z.ln(),
    })
}

/// Inverse-transform sampling from the exact table.
pub fn exact_sample(rp: &ReducedProblem, cfg: &SamplerConfig) -> Result<SampleSet> {
    cfg.validate()?;
    let dist = exact_distribution(rp)?;
    let mut cdf = Vec::with_capacity(dist.probs.len());
    let mut acc = 0.0;
    for p in &dist.probs {
        acc += p;
        cdf.push(acc);
    }
    let m = rp.m();
    let states: Vec<Vec<u8>> = (0..cfg.reads as u64)
        .into_par_iter()
        .map(|r| {
            let u: f64 = seed::rng(seed::derive(cfg.seed, r)).gen::<f64>() * acc;
            let i = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
            index_state(i, m)
        })
        .collect();
    Ok(SampleSet::from_states(m, states))
}

/// QUBO in adjacency-list form for the Monte Carlo kernels.
#[derive(Debug, Clone)]
pub struct SparseQubo {
    linear: Vec<f64>,
    start: Vec<usize>,
    neighbors: Vec<u32>,
    weights: Vec<f64>,
    pub offset: f64,
}

impl SparseQubo {
    pub fn from_reduced(rp: &ReducedProblem) -> Self {
        let m = rp.m();
        let mut start = Vec::with_capacity(m + 1);
        let mut neighbors = Vec::new();
        let mut weights = Vec::new();
        start.push(0);
        for i in 0..m {
            for (j, &w) in rp.coupling_row(i).iter().enumerate() {
                if j != i && w != 0.0 {
                    neighbors.push(j as u32);
                    weights.push(-w);
                }
            }
            start.push(neighbors.len());
        }
        SparseQubo {
            linear: rp.bias.iter().map(|b| -b).collect(),
            start,
            neighbors,
            weights,
            offset: rp.offset,
        }
    }

    pub fn from_qubo(q: &QuboProblem) -> Self {
        let n = q.num_vars;
        let mut linear = vec![0.0; n];
        for (&i, &a) in &q.linear {
            linear[i] += a;
        }
        let mut adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        for (&(i, j), &w) in &q.quadratic {
            adj[i].push((j as u32, w));
            adj[j].push((i as u32, w));
        }
        let mut start = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::new();
        let mut weights = Vec::new();
        start.push(0);
        for row in adj {
            for (j, w) in row {
                neighbors.push(j);
                weights.push(w);
            }
            start.push(neighbors.len());
        }
        SparseQubo {
            linear,
            start,
            neighbors,
            weights,
            offset: q.offset,
        }
    }

    pub fn from_ising(ising: &IsingProblem) -> Self {
        Self::from_qubo(&crate::model::ising_to_qubo(ising))
    }

    pub fn num_vars(&self) -> usize {
        self.linear.len()
    }

    /// `E(x with x_i = 1) - E(x with x_i = 0)`.
    #[inline]
    fn delta_on(&self, i: usize, x: &[u8]) -> f64 {
        let mut d = self.linear[i];
        for k in self.start[i]..self.start[i + 1] {
            if x[self.neighbors[k] as usize] != 0 {
                d += self.weights[k];
            }
        }
        d
    }

    pub fn energy(&self, x: &[u8]) -> f64 {
        let mut e = self.offset;
        for i in 0..self.num_vars() {
            if x[i] == 0 {
                continue;
            }
            e += self.linear[i];
            for k in self.start[i]..self.start[i + 1] {
                let j = self.neighbors[k] as usize;
                if j > i && x[j] != 0 {
                    e += self.weights[k];
                }
            }
        }
        e
    }
}

/// Probability that a stochastic unit turns on, given `ΔE = E(1) - E(0)`.
#[inline]
pub fn on_probability(delta_e: f64, temperature: f64) -> f64 {
    1.0 / (1.0 + (delta_e / temperature).exp())
}

fn random_state<R: Rng>(n: usize, rng: &mut R) -> Vec<u8> {
    (0..n).map(|_| rng.gen::<bool>() as u8).collect()
}

fn gibbs_read(q: &SparseQubo, temperature: f64, sweeps: usize, seed: u64) -> Vec<u8> {
    let mut rng = seed::rng(seed);
    let n = q.num_vars();
    let mut x = random_state(n, &mut rng);
    for _ in 0..sweeps {
        for i in 0..n {
            let p = on_probability(q.delta_on(i, &x), temperature);
            x[i] = (rng.gen::<f64>() < p) as u8;
        }
    }
    x
}

/// Sequential-scan Metropolis annealing of one read. After every sweep each
/// cluster (a set of variables, e.g. an embedding chain) is offered one
/// joint flip.
pub(crate) fn anneal_read(q: &SparseQubo, betas: &[f64], clusters: &[Vec<usize>], seed: u64) -> Vec<u8> {
    let mut rng = seed::rng(seed);
    let n = q.num_vars();
    let mut x = random_state(n, &mut rng);
    for &beta in betas {
        for i in 0..n {
            let d = q.delta_on(i, &x);
            let cost = if x[i] == 0 { d } else { -d };
            if cost <= 0.0 || rng.gen::<f64>() < (-beta * cost).exp() {
                x[i] ^= 1;
            }
        }
        for c in clusters {
            let mut cost = 0.0;
            for &i in c {
                let d = q.delta_on(i, &x);
                cost += if x[i] == 0 { d } else { -d };
                x[i] ^= 1;
            }
            if !(cost <= 0.0 || rng.gen::<f64>() < (-beta * cost).exp()) {
                c.iter().for_each(|&i| x[i] ^= 1);
            }
        }
    }
    x
}

pub(crate) fn anneal(q: &SparseQubo, betas: &[f64], clusters: &[Vec<usize>], reads: usize, seed: u64) -> SampleSet {
    let states: Vec<Vec<u8>> = (0..reads as u64)
        .into_par_iter()
        .map(|r| anneal_read(q, betas, clusters, seed::derive(seed, r)))
        .collect();
    SampleSet::from_states(q.num_vars(), states)
}

/// Gibbs sampling: each read starts from a uniformly random state and runs
/// `cfg.sweeps` full sequential passes of the stochastic unit update.
pub fn gibbs_sample(rp: &ReducedProblem, cfg: &SamplerConfig) -> Result<SampleSet> {
    cfg.validate()?;
    if cfg.sweeps == 0 {
        return Err(Error::InvalidArgument("Gibbs sampling needs at least one sweep".into()));
    }
    let q = SparseQubo::from_reduced(rp);
    let states: Vec<Vec<u8>> = (0..cfg.reads as u64)
        .into_par_iter()
        .map(|r| gibbs_read(&q, rp.temperature, cfg.sweeps, seed::derive(cfg.seed, r)))
        .collect();
    Ok(SampleSet::from_states(rp.m(), states))
}

/// Simulated annealing: one Metropolis sweep per schedule entry, final state
/// recorded.
pub fn sa_sample(rp: &ReducedProblem, cfg: &SamplerConfig) -> Result<SampleSet> {
    cfg.schedule.validate()?;
    if cfg.reads == 0 {
        return Err(Error::InvalidArgument("reads must be positive".into()));
    }
    let q = SparseQubo::from_reduced(rp);
    Ok(anneal(&q, &cfg.schedule.betas(), &[], cfg.reads, cfg.seed))
}

/// Draws `cfg.reads` samples with the configured kind.
pub fn sample(rp: &ReducedProblem, cfg: &SamplerConfig) -> Result<SampleSet> {
    match cfg.kind {
        SamplerKind::Exact => exact_sample(rp, cfg),
        SamplerKind::Gibbs => gibbs_sample(rp, cfg),
        SamplerKind::Sa => sa_sample(rp, cfg),
    }
}

/// First and pairwise moments of the free units.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub first: Vec<f64>,
    /// `m × m` row-major; only entries with `i < j` are meaningful.
    pub second: Vec<f64>,
}

impl Moments {
    pub fn zeros(m: usize) -> Self {
        Moments {
            first: vec![0.0; m],
            second: vec![0.0; m * m],
        }
    }

    pub fn m(&self) -> usize {
        self.first.len()
    }

    #[inline]
    pub fn pair(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        self.second[i * self.m() + j]
    }
}

pub fn moments(ss: &SampleSet) -> Result<Moments> {
    let total = ss.total();
    if total == 0 {
        return Err(Error::EmptySampleSet);
    }
    let m = ss.m();
    let mut mo = Moments::zeros(m);
    for (s, c) in ss.iter() {
        let c = c as f64;
        for i in 0..m {
            if s[i] == 0 {
                continue;
            }
            mo.first[i] += c;
            for j in (i + 1)..m {
                if s[j] != 0 {
                    mo.second[i * m + j] += c;
                }
            }
        }
    }
    let t = total as f64;
    mo.first.iter_mut().for_each(|v| *v /= t);
    mo.second.iter_mut().for_each(|v| *v /= t);
    Ok(mo)
}

/// Boltzmann averages from the exact table.
pub fn exact_moments(dist: &ExactDistribution) -> Moments {
    let m = dist.m;
    let mut mo = Moments::zeros(m);
    for (idx, &p) in dist.probs.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for i in 0..m {
            if (idx >> i) & 1 == 0 {
                continue;
            }
            mo.first[i] += p;
            for j in (i + 1)..m {
                if (idx >> j) & 1 == 1 {
                    mo.second[i * m + j] += p;
                }
            }
        }
    }
    mo
}

/// Total-variation distance between two tables over the same state space.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len());
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Anything that can supply Boltzmann averages for a list of reduced
/// problems. Implementations must be deterministic in `(problems, seed)`.
pub trait PhaseSampler: Sync {
    fn estimate(&self, problems: &[ReducedProblem], seed: u64) -> Result<Vec<Moments>>;
}

/// The exact kind returns exact Boltzmann averages (the infinite-read
/// limit); the stochastic kinds average `reads` samples.
impl PhaseSampler for SamplerConfig {
    fn estimate(&self, problems: &[ReducedProblem], seed: u64) -> Result<Vec<Moments>> {
        self.validate()?;
        problems
            .par_iter()
            .enumerate()
            .map(|(i, rp)| match self.kind {
                SamplerKind::Exact => Ok(exact_moments(&exact_distribution(rp)?)),
                _ => {
                    let cfg = SamplerConfig {
                        seed: seed::derive(seed, i as u64),
                        ..self.clone()
                    };
                    moments(&sample(rp, &cfg)?)
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    fn random_problem(m: usize, seed_value: u64) -> ReducedProblem {
        let mut rng = seed::rng(seed_value);
        let bias = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut rp = ReducedProblem::new(bias, 1.0).unwrap();
        for i in 0..m {
            for j in (i + 1)..m {
                rp.set_weight(i, j, rng.gen_range(-1.0..1.0));
            }
        }
        rp
    }

    #[test]
    fn exact_zero_problem_is_uniform() {
        let rp = ReducedProblem::new(vec![0.0; 3], 1.0).unwrap();
        let d = exact_distribution(&rp).unwrap();
        assert!(d.probs.iter().all(|p| (p - 0.125).abs() < 1e-15));
        assert!((d.log_partition - 8f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn exact_two_state_ratio() {
        // E(1) = -b, so b = -ln 3 · T gives P(1)/P(0) = 1/3
        let t = 0.7;
        let rp = ReducedProblem::new(vec![-(3f64.ln()) * t], t).unwrap();
        let d = exact_distribution(&rp).unwrap();
        assert!((d.probs[1] - 0.25).abs() < 1e-12);
        let rp = ReducedProblem::new(vec![3f64.ln() * t], t).unwrap();
        assert!((exact_distribution(&rp).unwrap().probs[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn exact_table_is_scale_invariant_and_normalized() {
        let rp = random_problem(6, 3);
        let mut scaled = rp.clone();
        scaled.bias.iter_mut().for_each(|b| *b *= 2.5);
        for i in 0..6 {
            for j in (i + 1)..6 {
                scaled.set_weight(i, j, rp.weight(i, j) * 2.5);
            }
        }
        scaled.temperature *= 2.5;
        let a = exact_distribution(&rp).unwrap();
        let b = exact_distribution(&scaled).unwrap();
        assert!((a.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(a.probs.iter().all(|&p| p >= 0.0));
        assert!(total_variation(&a.probs, &b.probs) < 1e-12);
    }

    #[test]
    fn gray_code_energies_match_direct_evaluation() {
        let mut rp = random_problem(7, 11);
        rp.offset = 0.4;
        rp.temperature = 1.3;
        let d = exact_distribution(&rp).unwrap();
        let w: Vec<f64> = (0..128u64).map(|s| (-rp.energy_of_index(s) / 1.3).exp()).collect();
        let z: f64 = w.iter().sum();
        for s in 0..128 {
            assert!((d.probs[s] - w[s] / z).abs() < 1e-14);
        }
        assert!((d.log_partition - z.ln()).abs() < 1e-12);
    }

    #[test]
    fn enumeration_limit_enforced() {
        let rp = ReducedProblem::new(vec![0.0; 25], 1.0).unwrap();
        assert!(matches!(
            exact_distribution(&rp),
            Err(Error::TooLargeForEnumeration { .. })
        ));
    }

    #[test]
    fn exact_sample_uniform_counts_within_binomial_band() {
        // Binomial(1000, 1/4): sd 13.7, so [200, 300] is a ±3.65σ band and
        // the union over 4 states fails with probability below 1.1e-3.
        let rp = ReducedProblem::new(vec![0.0; 2], 1.0).unwrap();
        let ss = exact_sample(&rp, &SamplerConfig::exact().with_seed(42)).unwrap();
        assert_eq!(ss.total(), 1000);
        for i in 0..4 {
            let c = ss.multiplicity(&index_state(i, 2));
            assert!((200..=300).contains(&c), "state {i}: {c}");
        }
        let one = SamplerConfig {
            reads: 1,
            ..SamplerConfig::exact()
        };
        assert_eq!(exact_sample(&rp, &one).unwrap().total(), 1);
    }

    #[test]
    fn samplers_are_seed_deterministic() {
        let rp = random_problem(5, 1);
        for cfg in [
            SamplerConfig::exact(),
            SamplerConfig::gibbs(300, 10),
            SamplerConfig::sa(300, Schedule::Constant { beta: 1.0, sweeps: 10 }),
        ] {
            let cfg = cfg.with_seed(9);
            assert_eq!(sample(&rp, &cfg).unwrap(), sample(&rp, &cfg).unwrap());
            assert_ne!(
                sample(&rp, &cfg).unwrap(),
                sample(&rp, &cfg.clone().with_seed(10)).unwrap()
            );
        }
    }

    #[test]
    fn on_probability_is_half_at_zero_cost() {
        assert_eq!(on_probability(0.0, 1.0), 0.5);
        assert_eq!(on_probability(0.0, 0.01), 0.5);
        assert!(on_probability(-5.0, 1.0) > 0.99);
    }

    #[test]
    fn gibbs_matches_exact_on_six_units() {
        let rp = random_problem(6, 5);
        let exact = exact_distribution(&rp).unwrap();
        let ss = gibbs_sample(&rp, &SamplerConfig::gibbs(100_000, 200).with_seed(1)).unwrap();
        let tv = total_variation(&ss.empirical(), &exact.probs);
        assert!(tv <= 0.02, "tv = {tv}");
    }

    #[test]
    fn zero_problem_marginals_are_half() {
        let rp = ReducedProblem::new(vec![0.0; 4], 1.0).unwrap();
        for cfg in [
            SamplerConfig::gibbs(100_000, 3),
            SamplerConfig::sa(100_000, Schedule::default()),
        ] {
            let mo = moments(&sample(&rp, &cfg.with_seed(3)).unwrap()).unwrap();
            for p in mo.first {
                assert!((p - 0.5).abs() < 0.01, "{p}");
            }
        }
    }

    #[test]
    fn constant_schedule_sa_matches_exact() {
        let rp = random_problem(6, 8);
        let exact = exact_distribution(&rp).unwrap();
        let cfg = SamplerConfig::sa(100_000, Schedule::Constant { beta: 1.0, sweeps: 100 }).with_seed(4);
        let ss = sa_sample(&rp, &cfg).unwrap();
        let tv = total_variation(&ss.empirical(), &exact.probs);
        assert!(tv <= 0.05, "tv = {tv}");
    }

    #[test]
    fn cold_schedule_finds_argmin() {
        let rp = random_problem(8, 21);
        let d = exact_distribution(&rp).unwrap();
        let argmin = d.argmax();
        let cfg = SamplerConfig::sa(
            200,
            Schedule::Geometric {
                beta_start: 0.1,
                beta_end: 50.0,
                sweeps: 300,
            },
        );
        let ss = sa_sample(&rp, &cfg).unwrap();
        assert_eq!(ss.modal().unwrap(), argmin.as_slice());
    }

    #[test]
    fn schedule_shapes() {
        let b = Schedule::default_for(2.0).betas();
        assert_eq!(b.len(), 100);
        assert!((b[0] - 0.1).abs() < 1e-12 && (b[99] - 0.5).abs() < 1e-9);
        assert!(Schedule::default().validate().is_ok());
        assert!(Schedule::Explicit { betas: vec![] }.validate().is_err());
        assert!(Schedule::Explicit { betas: vec![2.0, 1.0] }.validate().is_err());
    }

    #[test]
    fn moments_hand_values() {
        let ss = SampleSet::from_states(3, [vec![1, 0, 1]]);
        let mo = moments(&ss).unwrap();
        assert_eq!(mo.first, vec![1.0, 0.0, 1.0]);
        assert_eq!(mo.pair(0, 2), 1.0);
        assert_eq!(mo.pair(0, 1), 0.0);
        assert_eq!(mo.pair(1, 2), 0.0);

        let ss = SampleSet::from_states(2, [vec![1, 1], vec![0, 0]]);
        let mo = moments(&ss).unwrap();
        assert_eq!(mo.first, vec![0.5, 0.5]);
        assert_eq!(mo.pair(0, 1), 0.5);

        assert!(matches!(moments(&SampleSet::new(2)), Err(Error::EmptySampleSet)));
    }

    #[test]
    fn exact_moments_two_unit_closed_form() {
        let mut rp = ReducedProblem::new(vec![0.3, -0.2], 1.0).unwrap();
        rp.set_weight(0, 1, 0.7);
        // weights exp(-E): 00 -> 1, 10 -> e^0.3, 01 -> e^-0.2, 11 -> e^0.8
        let w = [1.0, 0.3f64.exp(), (-0.2f64).exp(), 0.8f64.exp()];
        let z: f64 = w.iter().sum();
        let mo = exact_moments(&exact_distribution(&rp).unwrap());
        assert!((mo.first[0] - (w[1] + w[3]) / z).abs() < 1e-14);
        assert!((mo.first[1] - (w[2] + w[3]) / z).abs() < 1e-14);
        assert!((mo.pair(0, 1) - w[3] / z).abs() < 1e-14);
    }

    #[test]
    fn text_export_round_trips() {
        let ss = SampleSet::from_states(3, [vec![1, 0, 1], vec![1, 0, 1], vec![0, 0, 0]]);
        let mut buf = Vec::new();
        ss.write_text(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "000 1\n101 2\n");
        assert_eq!(SampleSet::read_text(&buf[..]).unwrap(), ss);
        assert!(SampleSet::read_text(&b"10x 1\n"[..]).is_err());
        assert!(SampleSet::read_text(&b"101 1\n11 1\n"[..]).is_err());
    }

    #[test]
    fn sparse_qubo_energy_matches_reduced() {
        let mut rp = random_problem(5, 2);
        rp.offset = -0.3;
        let q = SparseQubo::from_reduced(&rp);
        for s in 0..32 {
            let x = index_state(s, 5);
            assert!((q.energy(&x) - rp.energy(&x)).abs() < 1e-12);
        }
    }
}
