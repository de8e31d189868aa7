//! Pegasus hardware graphs and their partition into buffered regions.

use std::collections::{BTreeMap, VecDeque};
use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

pub type NodeId = usize;

/// Largest number of couplers per qubit on a Pegasus graph.
pub const MAX_DEGREE: usize = 15;

const SMOOTHING_PASSES: usize = 20;

/// Vertical line offsets, indexed by `k`.
const OFFSETS_VERTICAL: [usize; 12] = [2, 2, 2, 2, 10, 10, 10, 10, 6, 6, 6, 6];
/// Horizontal line offsets, indexed by `k`.
const OFFSETS_HORIZONTAL: [usize; 12] = [6, 6, 6, 6, 2, 2, 2, 2, 10, 10, 10, 10];

/// Pegasus coordinate `(u, w, k, z)`: orientation, perpendicular tile offset,
/// qubit within the tile and parallel offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PegasusCoord {
    pub u: usize,
    pub w: usize,
    pub k: usize,
    pub z: usize,
}

impl PegasusCoord {
    pub fn linear(&self, m: usize) -> NodeId {
        let m1 = m - 1;
        self.u * 12 * m * m1 + self.w * 12 * m1 + self.k * m1 + self.z
    }

    pub fn from_linear(id: NodeId, m: usize) -> Self {
        let m1 = m - 1;
        let z = id % m1;
        let rest = id / m1;
        let k = rest % 12;
        let rest = rest / 12;
        PegasusCoord {
            u: rest / m,
            w: rest % m,
            k,
            z,
        }
    }
}

/// Undirected simple graph over integer node ids.
#[derive(Debug, Clone, PartialEq)]
pub struct HardwareGraph {
    present: Vec<bool>,
    adj: Vec<Vec<NodeId>>,
    num_nodes: usize,
    num_edges: usize,
    /// Pegasus size parameter, when generated by [`pegasus`].
    pegasus_m: Option<usize>,
}

impl HardwareGraph {
    /// Builds a graph over the given node ids. Edges must join listed nodes.
    pub fn from_edges(nodes: &[NodeId], edges: &[(NodeId, NodeId)]) -> Result<Self> {
        let size = nodes.iter().map(|&n| n + 1).max().unwrap_or(0);
        let mut present = vec![false; size];
        for &n in nodes {
            present[n] = true;
        }
        let mut adj = vec![Vec::new(); size];
        for &(a, b) in edges {
            if a == b {
                return Err(Error::Graph(format!("self-loop at node {a}")));
            }
            if a >= size || b >= size || !present[a] || !present[b] {
                return Err(Error::Graph(format!("edge ({a}, {b}) references a missing node")));
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut num_edges = 0;
        for row in &mut adj {
            row.sort_unstable();
            row.dedup();
            num_edges += row.len();
        }
        Ok(HardwareGraph {
            present,
            adj,
            num_nodes: nodes.iter().collect::<std::collections::BTreeSet<_>>().len(),
            num_edges: num_edges / 2,
            pegasus_m: None,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    /// One past the largest id.
    pub fn id_bound(&self) -> usize {
        self.present.len()
    }

    pub fn contains(&self, n: NodeId) -> bool {
        self.present.get(n).copied().unwrap_or(false)
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.present.iter().enumerate().filter(|(_, &p)| p).map(|(i, _)| i)
    }

    /// Edges as `(a, b)` with `a < b`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(a, row)| row.iter().filter(move |&&b| b > a).map(move |&b| (a, b)))
    }

    pub fn neighbors(&self, n: NodeId) -> &[NodeId] {
        &self.adj[n]
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        a < self.adj.len() && self.adj[a].binary_search(&b).is_ok()
    }

    pub fn degree(&self, n: NodeId) -> usize {
        self.adj[n].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// `hist[d]` = number of nodes with degree `d`.
    pub fn degree_histogram(&self) -> Vec<usize> {
        let mut hist = vec![0; self.max_degree() + 1];
        for n in self.nodes() {
            hist[self.degree(n)] += 1;
        }
        hist
    }

    pub fn pegasus_m(&self) -> Option<usize> {
        self.pegasus_m
    }

    pub fn coord(&self, n: NodeId) -> Option<PegasusCoord> {
        self.pegasus_m
            .filter(|_| self.contains(n))
            .map(|m| PegasusCoord::from_linear(n, m))
    }

    /// Copy with the listed nodes (and their edges) removed, for devices
    /// with inactive qubits.
    pub fn without_nodes(&self, removed: &[NodeId]) -> HardwareGraph {
        let mut g = self.clone();
        for &n in removed {
            if !g.contains(n) {
                continue;
            }
            g.present[n] = false;
            g.num_nodes -= 1;
            g.num_edges -= g.adj[n].len();
            for nb in std::mem::take(&mut g.adj[n]) {
                g.adj[nb].retain(|&x| x != n);
            }
        }
        g
    }

    /// Connected components of the subgraph induced by `subset`, largest
    /// first (ties by smallest member).
    pub fn components(&self, subset: &[NodeId]) -> Vec<Vec<NodeId>> {
        let mut mask = vec![false; self.id_bound()];
        for &n in subset {
            if self.contains(n) {
                mask[n] = true;
            }
        }
        let mut seen = vec![false; self.id_bound()];
        let mut comps = Vec::new();
        for &s in subset {
            if !mask[s] || seen[s] {
                continue;
            }
            let mut comp = vec![s];
            seen[s] = true;
            let mut i = 0;
            while i < comp.len() {
                let a = comp[i];
                i += 1;
                for &b in &self.adj[a] {
                    if mask[b] && !seen[b] {
                        seen[b] = true;
                        comp.push(b);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
        comps
    }

    pub fn is_connected(&self, subset: &[NodeId]) -> bool {
        self.components(subset).len() <= 1
    }

    /// `a b` lines, one per edge.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        for (a, b) in self.edges() {
            writeln!(out, "{a} {b}")?;
        }
        Ok(())
    }
}

/// Pegasus graph `P_m` restricted to its main fabric.
///
/// Qubits are line segments on a 12m × 12m grid. Vertical qubit
/// `(0, w, k, z)` sits at column `12w + k` and covers 12 rows starting at
/// `12z + OFFSETS_VERTICAL[k]`; horizontal qubits are the transpose. Couplers
/// join crossing perpendicular qubits (internal), the two qubits of an even/odd
/// pair `k, k+1` (odd) and collinear neighbors `z, z+1` (external).
pub fn pegasus(m: usize) -> Result<HardwareGraph> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!(
            "Pegasus size must be at least 2, got {m}"
        )));
    }
    let m1 = m - 1;
    let size = 24 * m * m1;
    let id = |u, w, k, z| PegasusCoord { u, w, k, z }.linear(m);

    let mut present = vec![true; size];
    for u in 0..2 {
        for z in 0..m1 {
            for k in 0..2 {
                present[id(u, 0, k, z)] = false;
            }
            for k in 10..12 {
                present[id(u, m1, k, z)] = false;
            }
        }
    }

    let mut edges = Vec::new();
    for u in 0..2 {
        for w in 0..m {
            for k in 0..12 {
                for z in 0..m1 {
                    if z + 1 < m1 {
                        edges.push((id(u, w, k, z), id(u, w, k, z + 1)));
                    }
                    if k % 2 == 0 {
                        edges.push((id(u, w, k, z), id(u, w, k + 1, z)));
                    }
                }
            }
        }
    }
    for w in 0..m {
        for k in 0..12 {
            for z in 0..m1 {
                for kk in 0..12 {
                    let w2 = z + (kk < OFFSETS_VERTICAL[k]) as usize;
                    let Some(z2) = w.checked_sub((k < OFFSETS_HORIZONTAL[kk]) as usize) else {
                        continue;
                    };
                    if w2 < m && z2 < m1 {
                        edges.push((id(0, w, k, z), id(1, w2, kk, z2)));
                    }
                }
            }
        }
    }
    edges.retain(|&(a, b)| present[a] && present[b]);
    let nodes: Vec<NodeId> = (0..size).filter(|&n| present[n]).collect();
    let mut g = HardwareGraph::from_edges(&nodes, &edges)?;
    g.pegasus_m = Some(m);
    Ok(g)
}

/// Disjoint regions of a hardware graph plus the buffer of unused nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionPlan {
    pub regions: Vec<Vec<NodeId>>,
    pub buffer: Vec<NodeId>,
}

impl PartitionPlan {
    pub fn k(&self) -> usize {
        self.regions.len()
    }

    pub fn region_sizes(&self) -> Vec<usize> {
        self.regions.iter().map(Vec::len).collect()
    }

    /// Largest over smallest region size.
    pub fn balance(&self) -> f64 {
        let sizes = self.region_sizes();
        let max = sizes.iter().copied().max().unwrap_or(0);
        let min = sizes.iter().copied().min().unwrap_or(0);
        if min == 0 {
            f64::INFINITY
        } else {
            max as f64 / min as f64
        }
    }

    /// `owner[n] = Some(region)` for region members.
    pub fn owners(&self, bound: usize) -> Vec<Option<usize>> {
        let mut owner = vec![None; bound];
        for (r, nodes) in self.regions.iter().enumerate() {
            for &n in nodes {
                owner[n] = Some(r);
            }
        }
        owner
    }

    /// Edges joining two different regions.
    pub fn cross_edges(&self, g: &HardwareGraph) -> Vec<(NodeId, NodeId)> {
        let owner = self.owners(g.id_bound());
        g.edges()
            .filter(|&(a, b)| matches!((owner[a], owner[b]), (Some(x), Some(y)) if x != y))
            .collect()
    }

    /// Checks disjointness, membership and the absence of inter-region edges.
    pub fn validate(&self, g: &HardwareGraph) -> Result<()> {
        let mut seen = vec![false; g.id_bound()];
        for n in self.regions.iter().flatten().chain(&self.buffer) {
            if !g.contains(*n) {
                return Err(Error::Graph(format!("plan node {n} is not in the graph")));
            }
            if std::mem::replace(&mut seen[*n], true) {
                return Err(Error::Graph(format!("node {n} appears twice in the plan")));
            }
        }
        if let Some((a, b)) = self.cross_edges(g).first() {
            return Err(Error::Graph(format!("edge ({a}, {b}) joins two regions")));
        }
        Ok(())
    }
}

fn bfs_distances(g: &HardwareGraph, sources: &[NodeId], mask: &[bool]) -> Vec<usize> {
    let mut dist = vec![usize::MAX; g.id_bound()];
    let mut queue = VecDeque::new();
    for &s in sources {
        dist[s] = 0;
        queue.push_back(s);
    }
    while let Some(a) = queue.pop_front() {
        for &b in g.neighbors(a) {
            if mask[b] && dist[b] == usize::MAX {
                dist[b] = dist[a] + 1;
                queue.push_back(b);
            }
        }
    }
    dist
}

/// Splits the nodes into `k` connected regions of similar size.
///
/// Seeds are spread by farthest-point selection (first seed random), regions
/// grow breadth-first with the currently smallest region expanding next, and
/// boundary nodes then move from large to small regions while the donor
/// stays connected. Nodes outside the largest connected component are put
/// in the buffer.
pub fn partition(g: &HardwareGraph, k: usize, seed_value: u64) -> Result<PartitionPlan> {
    let comps = g.components(&g.nodes().collect::<Vec<_>>());
    let Some(main) = comps.first() else {
        return Err(Error::InvalidArgument("cannot partition an empty graph".into()));
    };
    if k == 0 || k > main.len() {
        return Err(Error::InvalidArgument(format!(
            "cannot split {} connected nodes into {k} regions",
            main.len()
        )));
    }
    let buffer: Vec<NodeId> = comps[1..].iter().flatten().copied().collect();
    let mut mask = vec![false; g.id_bound()];
    for &n in main {
        mask[n] = true;
    }

    let mut rng = seed::rng(seed::derive(seed_value, 0x9A57));
    let mut seeds = vec![main[rng.gen_range(0..main.len())]];
    let mut dist = bfs_distances(g, &seeds, &mask);
    while seeds.len() < k {
        let far = main.iter().map(|&n| dist[n]).max().unwrap();
        let mut cands: Vec<NodeId> = main.iter().copied().filter(|&n| dist[n] == far).collect();
        cands.shuffle(&mut rng);
        let s = cands[0];
        seeds.push(s);
        let d = bfs_distances(g, &[s], &mask);
        for &n in main {
            dist[n] = dist[n].min(d[n]);
        }
    }

    let seed_dist: Vec<Vec<usize>> = seeds.iter().map(|&s| bfs_distances(g, &[s], &mask)).collect();
    let mut owner: Vec<Option<usize>> = vec![None; g.id_bound()];
    let mut sizes = vec![0usize; k];
    // frontier node -> number of its neighbors inside the region
    let mut frontiers: Vec<BTreeMap<NodeId, usize>> = vec![BTreeMap::new(); k];
    for (r, &s) in seeds.iter().enumerate() {
        claim(g, &mask, s, r, &mut owner, &mut sizes, &mut frontiers);
    }
    for _ in k..main.len() {
        // the smallest region that can still grow takes its best-attached
        // frontier node, closest to its seed on ties
        let Some(r) = (0..k)
            .filter(|&r| !frontiers[r].is_empty())
            .min_by_key(|&r| (sizes[r], r))
        else {
            break;
        };
        let (&n, _) = frontiers[r]
            .iter()
            .max_by_key(|&(&n, &c)| (c, std::cmp::Reverse(seed_dist[r][n]), std::cmp::Reverse(n)))
            .unwrap();
        claim(g, &mask, n, r, &mut owner, &mut sizes, &mut frontiers);
    }

    rebalance(g, &mut owner, &mut sizes, main, 1.3);
    smooth(g, &mut owner, &mut sizes, main, 1.3);

    let mut regions = vec![Vec::new(); k];
    for &n in main {
        regions[owner[n].expect("connected component fully grown")].push(n);
    }
    Ok(PartitionPlan { regions, buffer })
}

fn claim(
    g: &HardwareGraph,
    mask: &[bool],
    n: NodeId,
    r: usize,
    owner: &mut [Option<usize>],
    sizes: &mut [usize],
    frontiers: &mut [BTreeMap<NodeId, usize>],
) {
    owner[n] = Some(r);
    sizes[r] += 1;
    for f in frontiers.iter_mut() {
        f.remove(&n);
    }
    for &b in g.neighbors(n) {
        if mask[b] && owner[b].is_none() {
            *frontiers[r].entry(b).or_default() += 1;
        }
    }
}

fn stays_connected(g: &HardwareGraph, owner: &[Option<usize>], r: usize, removed: NodeId) -> bool {
    // removing `removed` keeps region r connected iff all its in-region
    // neighbors remain mutually reachable
    let nbrs: Vec<NodeId> = g
        .neighbors(removed)
        .iter()
        .copied()
        .filter(|&b| owner[b] == Some(r))
        .collect();
    if nbrs.len() <= 1 {
        return true;
    }
    let mut seen = std::collections::HashSet::from([removed, nbrs[0]]);
    let mut queue = VecDeque::from([nbrs[0]]);
    let mut remaining: std::collections::HashSet<NodeId> = nbrs[1..].iter().copied().collect();
    while let Some(a) = queue.pop_front() {
        for &b in g.neighbors(a) {
            if owner[b] == Some(r) && seen.insert(b) {
                remaining.remove(&b);
                if remaining.is_empty() {
                    return true;
                }
                queue.push_back(b);
            }
        }
    }
    false
}

/// Moves nodes to the region holding most of their neighbors, shrinking the
/// cut, while keeping the balance target and donor connectivity.
fn smooth(g: &HardwareGraph, owner: &mut [Option<usize>], sizes: &mut [usize], nodes: &[NodeId], target: f64) {
    let k = sizes.len();
    for _ in 0..SMOOTHING_PASSES {
        let mut moved = false;
        for &n in nodes {
            let own = owner[n].unwrap();
            let mut counts = vec![0usize; k];
            for &b in g.neighbors(n) {
                if let Some(r) = owner[b] {
                    counts[r] += 1;
                }
            }
            let (best, &c) = counts
                .iter()
                .enumerate()
                .max_by_key(|&(r, &c)| (c, std::cmp::Reverse(r)))
                .unwrap();
            if best == own || c <= counts[own] || sizes[own] <= 1 {
                continue;
            }
            let mut after = sizes.to_vec();
            after[own] -= 1;
            after[best] += 1;
            let (max, min) = (*after.iter().max().unwrap(), *after.iter().min().unwrap());
            if max as f64 > target * min as f64 || !stays_connected(g, owner, own, n) {
                continue;
            }
            owner[n] = Some(best);
            sizes.copy_from_slice(&after);
            moved = true;
        }
        if !moved {
            return;
        }
    }
}

fn rebalance(g: &HardwareGraph, owner: &mut [Option<usize>], sizes: &mut [usize], nodes: &[NodeId], target: f64) {
    let k = sizes.len();
    if k < 2 {
        return;
    }
    for _ in 0..nodes.len() {
        let max = *sizes.iter().max().unwrap();
        let min = *sizes.iter().min().unwrap();
        if (max as f64) <= target * min as f64 {
            return;
        }
        // move one boundary node from the largest region that has a
        // smaller neighbor into its smallest neighbor
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by_key(|&r| (std::cmp::Reverse(sizes[r]), r));
        let mut moved = false;
        'donors: for &donor in &order {
            if sizes[donor] <= 1 {
                continue;
            }
            // boundary nodes keyed by the size of their smallest smaller neighbor
            let mut cands: Vec<(usize, NodeId, usize)> = Vec::new();
            for &n in nodes {
                if owner[n] != Some(donor) {
                    continue;
                }
                if let Some(rb) = g
                    .neighbors(n)
                    .iter()
                    .filter_map(|&b| owner[b])
                    .filter(|&rb| rb != donor && sizes[rb] + 1 < sizes[donor])
                    .min_by_key(|&rb| (sizes[rb], rb))
                {
                    cands.push((sizes[rb], n, rb));
                }
            }
            cands.sort_unstable();
            for (_, n, rb) in cands {
                if stays_connected(g, owner, donor, n) {
                    owner[n] = Some(rb);
                    sizes[donor] -= 1;
                    sizes[rb] += 1;
                    moved = true;
                    break 'donors;
                }
            }
        }
        if !moved {
            return;
        }
    }
}

/// Size of the largest connected piece of the poorest region.
pub fn smallest_region_core(g: &HardwareGraph, plan: &PartitionPlan) -> usize {
    plan.regions
        .iter()
        .map(|r| g.components(r).first().map_or(0, Vec::len))
        .min()
        .unwrap_or(0)
}

/// Partitions with `restarts` derived seeds, buffers each plan and keeps the
/// one whose poorest region has the largest connected piece (fewest
/// buffered nodes on ties). Returns the plan before and after buffering.
pub fn buffered_partition(
    g: &HardwareGraph,
    k: usize,
    seed_value: u64,
    restarts: usize,
) -> Result<(PartitionPlan, PartitionPlan)> {
    let mut best: Option<((usize, std::cmp::Reverse<usize>), PartitionPlan, PartitionPlan)> = None;
    for i in 0..restarts.max(1) {
        let plan = partition(g, k, seed::derive(seed_value, i as u64))?;
        let buffered = apply_buffer(g, &plan);
        let score = (
            smallest_region_core(g, &buffered),
            std::cmp::Reverse(buffered.buffer.len()),
        );
        if best.as_ref().is_none_or(|(s, _, _)| score > *s) {
            best = Some((score, plan, buffered));
        }
    }
    let (_, plan, buffered) = best.expect("at least one restart");
    Ok((plan, buffered))
}

/// Moves both endpoints of every inter-region edge into the buffer.
pub fn apply_buffer(g: &HardwareGraph, plan: &PartitionPlan) -> PartitionPlan {
    let cut: std::collections::BTreeSet<NodeId> = plan.cross_edges(g).into_iter().flat_map(|(a, b)| [a, b]).collect();
    let mut buffer: Vec<NodeId> = plan.buffer.iter().copied().chain(cut.iter().copied()).collect();
    buffer.sort_unstable();
    PartitionPlan {
        regions: plan
            .regions
            .iter()
            .map(|r| r.iter().copied().filter(|n| !cut.contains(n)).collect())
            .collect(),
        buffer,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    /// Adjacency re-derived from qubit geometry: two qubits couple when they
    /// are perpendicular and cross, form an even/odd pair of the same line
    /// group, or are collinear and consecutive.
    fn geometric_edges(m: usize) -> BTreeSet<(NodeId, NodeId)> {
        let g = pegasus(m).unwrap();
        let nodes: Vec<PegasusCoord> = g.nodes().map(|n| PegasusCoord::from_linear(n, m)).collect();
        // (fixed coordinate, span start) on the 12m grid
        let line = |c: &PegasusCoord| {
            let off = if c.u == 0 {
                OFFSETS_VERTICAL[c.k]
            } else {
                OFFSETS_HORIZONTAL[c.k]
            };
            (12 * c.w + c.k, 12 * c.z + off)
        };
        let mut out = BTreeSet::new();
        for (i, a) in nodes.iter().enumerate() {
            for b in &nodes[i + 1..] {
                let (fa, sa) = line(a);
                let (fb, sb) = line(b);
                let joined = if a.u != b.u {
                    (sb..sb + 12).contains(&fa) && (sa..sa + 12).contains(&fb)
                } else if a.w == b.w && a.k == b.k {
                    a.z.abs_diff(b.z) == 1
                } else {
                    a.w == b.w && a.z == b.z && a.k / 2 == b.k / 2
                };
                if joined {
                    let (x, y) = (a.linear(m), b.linear(m));
                    out.insert((x.min(y), x.max(y)));
                }
            }
        }
        out
    }

    #[test]
    fn small_graphs_match_geometric_recount() {
        for m in 2..=4 {
            let g = pegasus(m).unwrap();
            let edges: BTreeSet<_> = g.edges().collect();
            assert_eq!(edges, geometric_edges(m), "m = {m}");
        }
    }

    #[test]
    fn sizes_and_degrees() {
        let g = pegasus(6).unwrap();
        assert_eq!(g.num_nodes(), 680);
        assert_eq!(g.num_edges(), 4484);
        assert_eq!(g.max_degree(), MAX_DEGREE);
        assert!(pegasus(1).is_err());
        let p2 = pegasus(2).unwrap();
        assert!(p2.max_degree() <= MAX_DEGREE);
        assert!(p2.nodes().all(|n| !p2.neighbors(n).contains(&n)));
    }

    #[test]
    fn interior_nodes_have_full_degree() {
        let m = 6;
        let g = pegasus(m).unwrap();
        for n in g.nodes() {
            let c = g.coord(n).unwrap();
            if (2..m - 2).contains(&c.w) && (1..m - 2).contains(&c.z) {
                assert_eq!(g.degree(n), 15, "{c:?}");
            }
        }
    }

    #[test]
    fn coordinates_round_trip() {
        let m = 5;
        for id in 0..24 * m * (m - 1) {
            assert_eq!(PegasusCoord::from_linear(id, m).linear(m), id);
        }
    }

    fn path4() -> HardwareGraph {
        HardwareGraph::from_edges(&[0, 1, 2, 3], &[(0, 1), (1, 2), (2, 3)]).unwrap()
    }

    #[test]
    fn buffer_on_split_path() {
        let g = path4();
        let plan = PartitionPlan {
            regions: vec![vec![0, 1], vec![2, 3]],
            buffer: vec![],
        };
        let b = apply_buffer(&g, &plan);
        assert_eq!(b.regions, vec![vec![0], vec![3]]);
        assert_eq!(b.buffer, vec![1, 2]);
        assert_eq!(apply_buffer(&g, &b), b);
        b.validate(&g).unwrap();
        assert!(plan.validate(&g).is_err());
    }

    #[test]
    fn single_region_is_whole_graph() {
        let g = pegasus(3).unwrap();
        let plan = partition(&g, 1, 7).unwrap();
        assert_eq!(plan.regions[0].len(), g.num_nodes());
        let b = apply_buffer(&g, &plan);
        assert!(b.buffer.is_empty());
    }

    #[test]
    fn partition_properties() {
        let g = pegasus(8).unwrap();
        for k in [2, 4, 7] {
            let plan = partition(&g, k, 3).unwrap();
            assert_eq!(plan.k(), k);
            let all: BTreeSet<NodeId> = plan.regions.iter().flatten().copied().collect();
            assert_eq!(all.len(), g.num_nodes());
            assert!(plan.balance() <= 1.3, "k = {k}: {:?}", plan.region_sizes());
            for r in &plan.regions {
                assert!(g.is_connected(r));
            }
            assert_eq!(plan, partition(&g, k, 3).unwrap());
            let b = apply_buffer(&g, &plan);
            assert!(b.cross_edges(&g).is_empty());
            assert_eq!(apply_buffer(&g, &b), b);
        }
        assert!(partition(&g, 0, 0).is_err());
        assert!(partition(&g, g.num_nodes() + 1, 0).is_err());
    }

    #[test]
    fn removed_nodes_leave_the_graph() {
        let g = pegasus(3).unwrap();
        let n = g.nodes().nth(5).unwrap();
        let d = g.degree(n);
        let h = g.without_nodes(&[n]);
        assert_eq!(h.num_nodes(), g.num_nodes() - 1);
        assert_eq!(h.num_edges(), g.num_edges() - d);
        assert!(!h.contains(n));
        assert!(h.edges().all(|(a, b)| a != n && b != n));
    }

    #[test]
    fn stranded_nodes_are_buffered() {
        // triangle plus an isolated edge
        let g = HardwareGraph::from_edges(&[0, 1, 2, 3, 4], &[(0, 1), (1, 2), (0, 2), (3, 4)]).unwrap();
        let plan = partition(&g, 1, 0).unwrap();
        assert_eq!(plan.regions, vec![vec![0, 1, 2]]);
        assert_eq!(plan.buffer, vec![3, 4]);
    }
}
