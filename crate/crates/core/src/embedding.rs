//! Minor embedding of complete graphs into hardware regions.
//!
//! The search follows the usual chain-growth heuristic. Each logical unit
//! is placed by running a node-weighted shortest-path search from every
//! already placed chain, choosing the root with the smallest summed cost and
//! taking the union of the root's paths as the new chain. Nodes already
//! used by other chains cost `α^usage`, so overlaps are allowed early and
//! squeezed out over repeated rip-up-and-replace passes with growing `α`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::sync::Mutex;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use crate::topology::{HardwareGraph, NodeId, PartitionPlan};

/// Largest clique size supported per region.
pub const MAX_CLIQUE: usize = 21;
pub const DEFAULT_ATTEMPTS: usize = 64;
const PASSES_PER_ATTEMPT: usize = 40;
/// Passes without fewer overlapping nodes before an attempt is abandoned.
const STALL_PASSES: usize = 8;
const WEIGHT_JITTER: f64 = 0.3;

/// `chains[i]` holds the physical nodes of logical unit `i`, sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Embedding {
    pub chains: Vec<Vec<NodeId>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EmbeddingFile {
    chains: BTreeMap<usize, Vec<NodeId>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParallelFile {
    k: usize,
    regions: BTreeMap<usize, EmbeddingFile>,
}

impl Embedding {
    pub fn k(&self) -> usize {
        self.chains.len()
    }

    pub fn used_nodes(&self) -> Vec<NodeId> {
        let mut v: Vec<NodeId> = self.chains.iter().flatten().copied().collect();
        v.sort_unstable();
        v
    }

    pub fn stats(&self) -> ChainStats {
        let lens: Vec<usize> = self.chains.iter().map(Vec::len).collect();
        ChainStats {
            min: lens.iter().copied().min().unwrap_or(0),
            max: lens.iter().copied().max().unwrap_or(0),
            mean: lens.iter().sum::<usize>() as f64 / lens.len().max(1) as f64,
            total: lens.iter().sum(),
        }
    }

    /// `{"chains": {"0": [ids], ...}}`
    pub fn to_json(&self) -> Result<String> {
        let file = EmbeddingFile {
            chains: self.chains.iter().cloned().enumerate().collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: EmbeddingFile = serde_json::from_str(s)?;
        let k = file.chains.len();
        if file.chains.keys().copied().ne(0..k) {
            return Err(Error::Format("embedding chains must be keyed 0..k".into()));
        }
        Ok(Embedding {
            chains: file.chains.into_values().collect(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainStats {
    pub min: usize,
    pub max: usize,
    pub mean: f64,
    /// Physical nodes used.
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    WrongSize { expected: usize, actual: usize },
    EmptyChain { unit: usize },
    NotInRegion { unit: usize, node: NodeId },
    SharedNode { node: NodeId, units: (usize, usize) },
    Disconnected { unit: usize },
    MissingCoupling { units: (usize, usize) },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::WrongSize { expected, actual } => write!(f, "expected {expected} chains, found {actual}"),
            Violation::EmptyChain { unit } => write!(f, "chain {unit} is empty"),
            Violation::NotInRegion { unit, node } => write!(f, "chain {unit} uses node {node} outside the region"),
            Violation::SharedNode { node, units } => {
                write!(f, "disjointness: node {node} is in chains {} and {}", units.0, units.1)
            }
            Violation::Disconnected { unit } => write!(f, "connectivity: chain {unit} is not connected"),
            Violation::MissingCoupling { units } => {
                write!(f, "coverage: no edge between chains {} and {}", units.0, units.1)
            }
        }
    }
}

/// Outcome of [`validate_embedding`]; `violation` is the first failure found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub violation: Option<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violation.is_none()
    }
}

/// Checks that `e` is a minor embedding of `K_k` into the subgraph of `g`
/// induced by `region`.
pub fn validate_embedding(e: &Embedding, k: usize, g: &HardwareGraph, region: &[NodeId]) -> ValidationReport {
    let fail = |v| ValidationReport { violation: Some(v) };
    if e.k() != k {
        return fail(Violation::WrongSize {
            expected: k,
            actual: e.k(),
        });
    }
    let mut in_region = vec![false; g.id_bound()];
    for &n in region {
        if g.contains(n) {
            in_region[n] = true;
        }
    }
    let mut owner: HashMap<NodeId, usize> = HashMap::new();
    for (unit, chain) in e.chains.iter().enumerate() {
        if chain.is_empty() {
            return fail(Violation::EmptyChain { unit });
        }
        for &node in chain {
            if !in_region.get(node).copied().unwrap_or(false) {
                return fail(Violation::NotInRegion { unit, node });
            }
            if let Some(prev) = owner.insert(node, unit) {
                if prev != unit {
                    return fail(Violation::SharedNode {
                        node,
                        units: (prev, unit),
                    });
                }
            }
        }
    }
    for (unit, chain) in e.chains.iter().enumerate() {
        if !g.is_connected(chain) {
            return fail(Violation::Disconnected { unit });
        }
    }
    let mut covered = vec![false; k * k];
    for (&a, &ua) in &owner {
        for b in g.neighbors(a) {
            if let Some(&ub) = owner.get(b) {
                covered[ua * k + ub] = true;
            }
        }
    }
    for a in 0..k {
        for b in (a + 1)..k {
            if !covered[a * k + b] {
                return fail(Violation::MissingCoupling { units: (a, b) });
            }
        }
    }
    ValidationReport { violation: None }
}

#[derive(Clone, Copy, PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Region subgraph with local indices `0..n`.
struct Local {
    nodes: Vec<NodeId>,
    adj: Vec<Vec<usize>>,
}

impl Local {
    fn new(g: &HardwareGraph, region: &[NodeId]) -> Self {
        let mut nodes: Vec<NodeId> = region.iter().copied().filter(|&n| g.contains(n)).collect();
        nodes.sort_unstable();
        nodes.dedup();
        let index: HashMap<NodeId, usize> = nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        let adj = nodes
            .iter()
            .map(|&n| g.neighbors(n).iter().filter_map(|b| index.get(b).copied()).collect())
            .collect();
        Local { nodes, adj }
    }

    fn n(&self) -> usize {
        self.nodes.len()
    }

    /// Multi-source node-weighted Dijkstra. Sources cost nothing; entering
    /// any other node costs its weight. Returns distances and parents.
    fn dijkstra(&self, sources: &[usize], weight: &[f64], dist: &mut [f64], parent: &mut [usize]) {
        dist.fill(f64::INFINITY);
        parent.fill(usize::MAX);
        let mut heap = BinaryHeap::new();
        for &s in sources {
            dist[s] = 0.0;
            heap.push(HeapItem(0.0, s));
        }
        while let Some(HeapItem(d, a)) = heap.pop() {
            if d > dist[a] {
                continue;
            }
            for &b in &self.adj[a] {
                let nd = d + weight[b];
                if nd < dist[b] {
                    dist[b] = nd;
                    parent[b] = a;
                    heap.push(HeapItem(nd, b));
                }
            }
        }
    }
}

struct Search<'a> {
    local: &'a Local,
    k: usize,
    chains: Vec<Vec<usize>>,
    usage: Vec<u32>,
    dist: Vec<Vec<f64>>,
    parent: Vec<Vec<usize>>,
}

impl<'a> Search<'a> {
    fn new(local: &'a Local, k: usize) -> Self {
        let n = local.n();
        Search {
            local,
            k,
            chains: vec![Vec::new(); k],
            usage: vec![0; n],
            dist: vec![vec![0.0; n]; k],
            parent: vec![vec![0; n]; k],
        }
    }

    fn remove(&mut self, v: usize) {
        for &n in &self.chains[v] {
            self.usage[n] -= 1;
        }
        self.chains[v].clear();
    }

    fn place<R: Rng>(&mut self, v: usize, alpha: f64, rng: &mut R) {
        let n = self.local.n();
        // jitter breaks ties between equally short paths differently each time
        let weight: Vec<f64> = self
            .usage
            .iter()
            .map(|&u| alpha.powi(u as i32) * (1.0 + WEIGHT_JITTER * rng.gen::<f64>()))
            .collect();
        let placed: Vec<usize> = (0..self.k).filter(|&u| u != v && !self.chains[u].is_empty()).collect();
        let chain = if placed.is_empty() {
            let min_use = *self.usage.iter().min().unwrap();
            let free: Vec<usize> = (0..n).filter(|&i| self.usage[i] == min_use).collect();
            vec![free[rng.gen_range(0..free.len())]]
        } else {
            for &u in &placed {
                let (dist, parent) = (&mut self.dist[u], &mut self.parent[u]);
                self.local.dijkstra(&self.chains[u], &weight, dist, parent);
            }
            let mut best = f64::INFINITY;
            let mut roots = Vec::new();
            for i in 0..n {
                let c: f64 = weight[i] + placed.iter().map(|&u| self.dist[u][i]).sum::<f64>();
                if c < best * (1.0 - 1e-12) {
                    best = c;
                    roots.clear();
                    roots.push(i);
                } else if c <= best * (1.0 + 1e-12) {
                    roots.push(i);
                }
            }
            let root = roots[rng.gen_range(0..roots.len())];
            let mut chain = vec![root];
            let mut member = vec![false; n];
            member[root] = true;
            for &u in &placed {
                let mut cur = root;
                // walk back until the next step would enter chain u
                while self.dist[u][cur] > 0.0 {
                    let p = self.parent[u][cur];
                    if self.dist[u][p] == 0.0 {
                        break;
                    }
                    if !member[p] {
                        member[p] = true;
                        chain.push(p);
                    }
                    cur = p;
                }
            }
            chain
        };
        for &i in &chain {
            self.usage[i] += 1;
        }
        self.chains[v] = chain;
        self.trim(v);
    }

    /// Drops leaf nodes that no coupling depends on.
    fn trim(&mut self, v: usize) {
        if self.chains[v].len() < 2 {
            return;
        }
        let n = self.local.n();
        let mut owners: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (u, c) in self.chains.iter().enumerate() {
            if u != v {
                for &i in c {
                    owners[i].push(u);
                }
            }
        }
        let mut member = vec![false; n];
        for &i in &self.chains[v] {
            member[i] = true;
        }
        let touches = |i: usize| -> Vec<usize> {
            let mut t: Vec<usize> = self.local.adj[i]
                .iter()
                .flat_map(|&b| owners[b].iter().copied())
                .collect();
            t.sort_unstable();
            t.dedup();
            t
        };
        loop {
            let chain = &self.chains[v];
            if chain.len() < 2 {
                return;
            }
            let mut coverage: HashMap<usize, usize> = HashMap::new();
            for &i in chain {
                for u in touches(i) {
                    *coverage.entry(u).or_default() += 1;
                }
            }
            let removable = chain.iter().position(|&i| {
                let internal = self.local.adj[i].iter().filter(|&&b| member[b]).count();
                internal <= 1 && touches(i).iter().all(|u| coverage[u] > 1) && self.usage[i] > 0
            });
            let Some(pos) = removable else { return };
            let i = self.chains[v].swap_remove(pos);
            member[i] = false;
            self.usage[i] -= 1;
        }
    }

    fn overlap(&self) -> usize {
        self.usage.iter().filter(|&&u| u > 1).count()
    }
}

/// Embeds `K_k` into the subgraph induced by `region`, trying up to
/// `attempts` independently seeded searches.
pub fn embed_clique_with_budget(
    g: &HardwareGraph,
    region: &[NodeId],
    k: usize,
    seed_value: u64,
    attempts: usize,
) -> Result<Embedding> {
    if k == 0 || k > MAX_CLIQUE {
        return Err(Error::InvalidArgument(format!(
            "clique size must be in 1..={MAX_CLIQUE}, got {k}"
        )));
    }
    let local = Local::new(g, region);
    if local.n() == 0 {
        return Err(Error::InvalidArgument("region is empty".into()));
    }
    let not_found = || Error::EmbeddingNotFound {
        k,
        region_size: local.n(),
        attempts,
    };
    // search inside the largest connected piece only
    let comps = g.components(&local.nodes);
    let main = Local::new(g, &comps[0]);
    if main.n() < k {
        return Err(not_found());
    }
    for attempt in 0..attempts {
        let mut rng = seed::rng(seed::derive(seed_value, attempt as u64));
        let mut s = Search::new(&main, k);
        let mut order: Vec<usize> = (0..k).collect();
        order.shuffle(&mut rng);
        for &v in &order {
            s.place(v, 2.0, &mut rng);
        }
        let (mut best, mut since_best) = (usize::MAX, 0);
        for pass in 0..PASSES_PER_ATTEMPT {
            let overlap = s.overlap();
            if overlap == 0 {
                break;
            }
            if overlap < best {
                (best, since_best) = (overlap, 0);
            } else {
                since_best += 1;
                if since_best >= STALL_PASSES {
                    break;
                }
            }
            let alpha = (2.0f64).powi(pass as i32 + 2).min(main.n() as f64);
            order.shuffle(&mut rng);
            for &v in &order {
                s.remove(v);
                s.place(v, alpha, &mut rng);
            }
        }
        if s.overlap() > 0 {
            continue;
        }
        let e = Embedding {
            chains: s
                .chains
                .iter()
                .map(|c| {
                    let mut v: Vec<NodeId> = c.iter().map(|&i| main.nodes[i]).collect();
                    v.sort_unstable();
                    v
                })
                .collect(),
        };
        if validate_embedding(&e, k, g, region).is_valid() {
            return Ok(e);
        }
    }
    Err(not_found())
}

pub fn embed_clique(g: &HardwareGraph, region: &[NodeId], k: usize, seed_value: u64) -> Result<Embedding> {
    embed_clique_with_budget(g, region, k, seed_value, DEFAULT_ATTEMPTS)
}

/// One clique embedding per region of a buffered plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParallelEmbedding {
    pub k: usize,
    /// `(region index, embedding)` in region order.
    pub embeddings: Vec<(usize, Embedding)>,
}

impl ParallelEmbedding {
    pub fn regions(&self) -> usize {
        self.embeddings.len()
    }

    /// Checks every embedding against its region, pairwise disjointness
    /// of used nodes and the absence of edges between different embeddings.
    pub fn validate(&self, g: &HardwareGraph, plan: &PartitionPlan) -> Result<()> {
        let mut owner = vec![None; g.id_bound()];
        for (r, e) in &self.embeddings {
            let region = plan
                .regions
                .get(*r)
                .ok_or_else(|| Error::Graph(format!("region {r} is not in the plan")))?;
            if let Some(v) = validate_embedding(e, self.k, g, region).violation {
                return Err(Error::Graph(format!("region {r}: {v}")));
            }
            for n in e.used_nodes() {
                if owner[n].replace(*r).is_some() {
                    return Err(Error::Graph(format!("node {n} used by two embeddings")));
                }
            }
        }
        for (a, b) in g.edges() {
            if let (Some(x), Some(y)) = (owner[a], owner[b]) {
                if x != y {
                    return Err(Error::Graph(format!("edge ({a}, {b}) joins regions {x} and {y}")));
                }
            }
        }
        Ok(())
    }

    /// `{"k": k, "regions": {"<r>": {"chains": {...}}, ...}}`
    pub fn to_json(&self) -> Result<String> {
        let file = ParallelFile {
            k: self.k,
            regions: self
                .embeddings
                .iter()
                .map(|(r, e)| {
                    (
                        *r,
                        EmbeddingFile {
                            chains: e.chains.iter().cloned().enumerate().collect(),
                        },
                    )
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: ParallelFile = serde_json::from_str(s)?;
        let mut embeddings = Vec::with_capacity(file.regions.len());
        for (r, ef) in file.regions {
            let e = Embedding::from_json(&serde_json::to_string(&ef)?)?;
            if e.k() != file.k {
                return Err(Error::Format(format!(
                    "region {r} embeds {} chains, expected {}",
                    e.k(),
                    file.k
                )));
            }
            embeddings.push((r, e));
        }
        Ok(ParallelEmbedding { k: file.k, embeddings })
    }

    pub fn stats(&self) -> ChainStats {
        let all: Vec<ChainStats> = self.embeddings.iter().map(|(_, e)| e.stats()).collect();
        let total: usize = all.iter().map(|s| s.total).sum();
        ChainStats {
            min: all.iter().map(|s| s.min).min().unwrap_or(0),
            max: all.iter().map(|s| s.max).max().unwrap_or(0),
            mean: total as f64 / (self.k * all.len()).max(1) as f64,
            total,
        }
    }
}

/// Embeds `K_k` into every region, in parallel, with region `r` seeded by
/// `derive(seed, r)`.
pub fn build_parallel(g: &HardwareGraph, plan: &PartitionPlan, k: usize, seed_value: u64) -> Result<ParallelEmbedding> {
    let embeddings = plan
        .regions
        .par_iter()
        .enumerate()
        .map(|(r, region)| {
            embed_clique(g, region, k, seed::derive(seed_value, r as u64))
                .map(|e| (r, e))
                .map_err(|source| Error::Region {
                    region: r,
                    source: Box::new(source),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ParallelEmbedding { k, embeddings })
}

/// Memoizes region embeddings by `(region, k, seed)`.
#[derive(Debug, Default)]
pub struct EmbeddingCache {
    map: Mutex<HashMap<(usize, usize, u64), Embedding>>,
}

impl EmbeddingCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn build_parallel(
        &self,
        g: &HardwareGraph,
        plan: &PartitionPlan,
        k: usize,
        seed_value: u64,
    ) -> Result<ParallelEmbedding> {
        let embeddings = plan
            .regions
            .par_iter()
            .enumerate()
            .map(|(r, region)| {
                let key = (r, k, seed_value);
                if let Some(e) = self.map.lock().unwrap().get(&key) {
                    return Ok((r, e.clone()));
                }
                let e =
                    embed_clique(g, region, k, seed::derive(seed_value, r as u64)).map_err(|source| Error::Region {
                        region: r,
                        source: Box::new(source),
                    })?;
                self.map.lock().unwrap().insert(key, e.clone());
                Ok((r, e))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ParallelEmbedding { k, embeddings })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{apply_buffer, partition, pegasus};

    fn cycle6() -> HardwareGraph {
        let edges: Vec<_> = (0..6).map(|i| (i, (i + 1) % 6)).collect();
        HardwareGraph::from_edges(&[0, 1, 2, 3, 4, 5], &edges).unwrap()
    }

    #[test]
    fn hand_built_triangle_on_hexagon() {
        let g = cycle6();
        let all = [0, 1, 2, 3, 4, 5];
        let e = Embedding {
            chains: vec![vec![0, 1], vec![2, 3], vec![4, 5]],
        };
        assert!(validate_embedding(&e, 3, &g, &all).is_valid());

        let shared = Embedding {
            chains: vec![vec![0, 1], vec![1, 2, 3], vec![4, 5]],
        };
        assert!(matches!(
            validate_embedding(&shared, 3, &g, &all).violation,
            Some(Violation::SharedNode { node: 1, .. })
        ));

        let split = Embedding {
            chains: vec![vec![0, 3], vec![1, 2], vec![4, 5]],
        };
        assert_eq!(
            validate_embedding(&split, 3, &g, &all).violation,
            Some(Violation::Disconnected { unit: 0 })
        );

        let short = Embedding {
            chains: vec![vec![0], vec![1], vec![3]],
        };
        assert!(matches!(
            validate_embedding(&short, 3, &g, &all).violation,
            Some(Violation::MissingCoupling { .. })
        ));
        assert!(matches!(
            validate_embedding(&e, 3, &g, &[0, 1, 2, 3]).violation,
            Some(Violation::NotInRegion { .. })
        ));
        assert!(!validate_embedding(&e, 4, &g, &all).is_valid());
    }

    #[test]
    fn tiny_cliques() {
        let g = cycle6();
        let all = [0, 1, 2, 3, 4, 5];
        let e = embed_clique(&g, &all, 1, 0).unwrap();
        assert_eq!(e.chains.len(), 1);
        assert_eq!(e.chains[0].len(), 1);
        let e = embed_clique(&g, &all, 2, 0).unwrap();
        assert!(e.chains.iter().all(|c| c.len() == 1));
        assert!(g.has_edge(e.chains[0][0], e.chains[1][0]));
        let e = embed_clique(&g, &all, 3, 0).unwrap();
        assert!(validate_embedding(&e, 3, &g, &all).is_valid());
        assert!(matches!(
            embed_clique(&g, &all, 4, 0),
            Err(Error::EmbeddingNotFound { k: 4, .. })
        ));
        assert!(embed_clique(&g, &all, 0, 0).is_err());
        assert!(embed_clique(&g, &all, 22, 0).is_err());
    }

    #[test]
    fn json_round_trip() {
        let e = Embedding {
            chains: vec![vec![4, 9], vec![1]],
        };
        let s = e.to_json().unwrap();
        assert!(s.contains("\"0\""));
        assert_eq!(Embedding::from_json(&s).unwrap(), e);
        assert!(Embedding::from_json(r#"{"chains": {"1": [3]}}"#).is_err());
    }

    #[test]
    fn cliques_on_small_pegasus() {
        let g = pegasus(4).unwrap();
        let nodes: Vec<_> = g.nodes().collect();
        for k in [5, 12] {
            let e = embed_clique(&g, &nodes, k, 11).unwrap();
            assert!(validate_embedding(&e, k, &g, &nodes).is_valid());
            assert_eq!(e, embed_clique(&g, &nodes, k, 11).unwrap());
        }
    }

    #[test]
    fn parallel_regions_and_cache() {
        let g = pegasus(6).unwrap();
        let plan = apply_buffer(&g, &partition(&g, 4, 2).unwrap());
        let pe = build_parallel(&g, &plan, 6, 9).unwrap();
        assert_eq!(pe.regions(), 4);
        pe.validate(&g, &plan).unwrap();
        let cache = EmbeddingCache::new();
        assert_eq!(cache.build_parallel(&g, &plan, 6, 9).unwrap(), pe);
        assert_eq!(cache.len(), 4);
        assert_eq!(cache.build_parallel(&g, &plan, 6, 9).unwrap(), pe);

        let single = apply_buffer(&g, &partition(&g, 1, 0).unwrap());
        let pe1 = build_parallel(&g, &single, 6, 3).unwrap();
        assert_eq!(
            pe1.embeddings[0].1,
            embed_clique(&g, &single.regions[0], 6, seed::derive(3, 0)).unwrap()
        );
    }

    #[test]
    fn parallel_json_round_trip() {
        let g = pegasus(4).unwrap();
        let plan = apply_buffer(&g, &partition(&g, 2, 1).unwrap());
        let pe = build_parallel(&g, &plan, 4, 0).unwrap();
        let text = pe.to_json().unwrap();
        assert_eq!(ParallelEmbedding::from_json(&text).unwrap(), pe);
        assert!(ParallelEmbedding::from_json(&text.replacen("\"k\": 4", "\"k\": 5", 1)).is_err());
    }
}
