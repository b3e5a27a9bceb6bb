//! Maximum-weight b-matching solvers, the vertex-splitting reduction and
//! the weighted vertex-cover dual used as a test oracle.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{bipartition_of, Capacities, EdgeId, GraphError, MultiGraph, Subgraph, Vertex, Weight, WeightedEdge};

/// Default node budget for the exact solvers.
pub const DEFAULT_BUDGET: u64 = 2_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatchingError {
    #[error("instance too large for exact oracle (node budget {budget} exhausted)")]
    BudgetExceeded { budget: u64 },
    #[error("graph is not bipartite")]
    NotBipartite,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// An edge set respecting the capacities.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BMatching {
    /// Sorted by edge id.
    pub members: Vec<EdgeId>,
    pub weight: u64,
}

#[derive(Serialize, Deserialize)]
struct MatchedEdge {
    u: Vertex,
    v: Vertex,
    w: Weight,
    edge_id: EdgeId,
}

impl BMatching {
    pub fn from_ids(graph: &MultiGraph, mut members: Vec<EdgeId>) -> Self {
        members.sort_unstable();
        let weight = members.iter().map(|&id| u64::from(graph.edge(id).w)).sum();
        Self { members, weight }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Capacity and weight invariants.
    pub fn is_valid(&self, graph: &MultiGraph, caps: &Capacities) -> bool {
        let mut used = vec![0u32; graph.n()];
        let mut weight = 0u64;
        for w in self.members.windows(2) {
            if w[0] >= w[1] {
                return false;
            }
        }
        for &id in &self.members {
            let Some(e) = graph.get_edge(id) else { return false };
            used[e.u] += 1;
            used[e.v] += 1;
            weight += u64::from(e.w);
        }
        weight == self.weight && (0..graph.n()).all(|v| used[v] <= caps.get(v))
    }

    pub fn to_json(&self, graph: &MultiGraph) -> serde_json::Value {
        let edges: Vec<MatchedEdge> = self
            .members
            .iter()
            .map(|&id| {
                let e = graph.edge(id);
                MatchedEdge { u: e.u, v: e.v, w: e.w, edge_id: id }
            })
            .collect();
        serde_json::json!({ "weight": self.weight, "edges": edges })
    }
}

/// Non-negative vertex labels with `w(u, v) <= alpha_u + alpha_v` on every edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WVertexCover {
    pub alpha: Vec<u64>,
}

impl WVertexCover {
    pub fn weight(&self) -> u64 {
        self.alpha.iter().sum()
    }

    pub fn covers(&self, graph: &MultiGraph) -> bool {
        graph
            .edges()
            .iter()
            .all(|e| u64::from(e.w) <= self.alpha[e.u] + self.alpha[e.v])
    }
}

/// Greedy by non-increasing weight, ties by edge id.
pub fn max_weight_b_matching_greedy(graph: &MultiGraph, caps: &Capacities) -> BMatching {
    greedy_on(graph, &graph.edge_ids(), caps)
}

/// [`max_weight_b_matching_greedy`] restricted to `edges`.
pub fn greedy_on(graph: &MultiGraph, edges: &[EdgeId], caps: &Capacities) -> BMatching {
    let mut order: Vec<&WeightedEdge> = edges.iter().map(|&id| graph.edge(id)).collect();
    order.sort_by_key(|e| (Reverse(e.w), e.id));
    let mut res: Vec<u32> = caps.as_slice().to_vec();
    let mut picked = Vec::new();
    for e in order {
        if res[e.u] > 0 && res[e.v] > 0 {
            res[e.u] -= 1;
            res[e.v] -= 1;
            picked.push(e.id);
        }
    }
    BMatching::from_ids(graph, picked)
}

/// Exact maximum-weight b-matching of the whole graph.
pub fn max_weight_b_matching_exact(graph: &MultiGraph, caps: &Capacities, budget: u64) -> Result<BMatching, MatchingError> {
    exact_on(graph, &graph.edge_ids(), caps, budget)
}

/// Exact maximum-weight b-matching of the sub-multigraph formed by `edges`.
///
/// Bipartite inputs go through min-cost flow and never touch the budget;
/// everything else runs branch and bound.
pub fn exact_on(graph: &MultiGraph, edges: &[EdgeId], caps: &Capacities, budget: u64) -> Result<BMatching, MatchingError> {
    caps.check_for(graph)?;
    match bipartition_of(graph, edges.iter().copied()) {
        Some(side) => Ok(flow_matching(graph, edges, caps, &side)),
        None => branch_and_bound(graph, edges, caps, budget),
    }
}

#[derive(Clone, Copy)]
struct Arc {
    to: usize,
    cap: i64,
    cost: i64,
}

/// Successive shortest paths on `s -> left -> right -> t`, stopping once the
/// cheapest augmenting path no longer has negative cost.
fn flow_matching(graph: &MultiGraph, edges: &[EdgeId], caps: &Capacities, side: &[bool]) -> BMatching {
    let n = graph.n();
    let (s, t) = (n, n + 1);
    let mut arcs: Vec<Arc> = Vec::new();
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n + 2];
    let mut add = |arcs: &mut Vec<Arc>, a: usize, b: usize, cap: i64, cost: i64| {
        out[a].push(arcs.len());
        arcs.push(Arc { to: b, cap, cost });
        out[b].push(arcs.len());
        arcs.push(Arc { to: a, cap: 0, cost: -cost });
        arcs.len() - 2
    };
    for v in 0..n {
        if side[v] {
            add(&mut arcs, s, v, i64::from(caps.get(v)), 0);
        } else {
            add(&mut arcs, v, t, i64::from(caps.get(v)), 0);
        }
    }
    let mut edge_arcs = Vec::with_capacity(edges.len());
    for &id in edges {
        let e = graph.edge(id);
        let (l, r) = if side[e.u] { (e.u, e.v) } else { (e.v, e.u) };
        edge_arcs.push((id, add(&mut arcs, l, r, 1, -i64::from(e.w))));
    }

    // Feasible initial potentials: the network is a DAG with negative arcs
    // only between the two sides.
    let mut pot = vec![0i64; n + 2];
    for &(_, a) in &edge_arcs {
        let r = arcs[a].to;
        pot[r] = pot[r].min(arcs[a].cost);
    }
    pot[t] = (0..n).filter(|&v| !side[v]).map(|v| pot[v]).min().unwrap_or(0).min(0);

    let mut dist = vec![i64::MAX; n + 2];
    let mut prev = vec![usize::MAX; n + 2];
    loop {
        dist.fill(i64::MAX);
        prev.fill(usize::MAX);
        dist[s] = 0;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((0i64, s)));
        while let Some(Reverse((d, x))) = heap.pop() {
            if d > dist[x] {
                continue;
            }
            for &ai in &out[x] {
                let a = arcs[ai];
                if a.cap == 0 {
                    continue;
                }
                let nd = d + a.cost + pot[x] - pot[a.to];
                debug_assert!(a.cost + pot[x] - pot[a.to] >= 0);
                if nd < dist[a.to] {
                    dist[a.to] = nd;
                    prev[a.to] = ai;
                    heap.push(Reverse((nd, a.to)));
                }
            }
        }
        if dist[t] == i64::MAX {
            break;
        }
        let reach_max = dist.iter().copied().filter(|&d| d != i64::MAX).max().unwrap_or(0);
        for v in 0..n + 2 {
            pot[v] += if dist[v] == i64::MAX { reach_max } else { dist[v] };
        }
        if pot[t] - pot[s] >= 0 {
            break;
        }
        let mut bottleneck = i64::MAX;
        let mut x = t;
        while x != s {
            let ai = prev[x];
            bottleneck = bottleneck.min(arcs[ai].cap);
            x = arcs[ai ^ 1].to;
        }
        let mut x = t;
        while x != s {
            let ai = prev[x];
            arcs[ai].cap -= bottleneck;
            arcs[ai ^ 1].cap += bottleneck;
            x = arcs[ai ^ 1].to;
        }
    }
    let picked = edge_arcs
        .into_iter()
        .filter(|&(_, a)| arcs[a].cap == 0)
        .map(|(id, _)| id)
        .collect();
    BMatching::from_ids(graph, picked)
}

/// Branch and bound over edge inclusion in edge-id order (include first).
///
/// The bound on what the remaining edges can add is the smaller of their
/// total weight and half the sum, over vertices, of the heaviest
/// residual-capacity many incident remaining weights.
pub fn branch_and_bound(graph: &MultiGraph, edges: &[EdgeId], caps: &Capacities, budget: u64) -> Result<BMatching, MatchingError> {
    let mut ids = edges.to_vec();
    ids.sort_unstable();
    let incumbent = greedy_on(graph, &ids, caps);
    let mut bb = Bb {
        edges: ids.iter().map(|&id| graph.edge(id)).collect(),
        res: caps.as_slice().to_vec(),
        best: incumbent.weight,
        best_set: incumbent.members,
        cur: Vec::new(),
        nodes: 0,
        budget,
        scratch: vec![Vec::new(); graph.n()],
    };
    bb.search(0, 0)?;
    Ok(BMatching::from_ids(graph, bb.best_set))
}

struct Bb<'g> {
    edges: Vec<&'g WeightedEdge>,
    res: Vec<u32>,
    best: u64,
    best_set: Vec<EdgeId>,
    cur: Vec<EdgeId>,
    nodes: u64,
    budget: u64,
    scratch: Vec<Vec<Weight>>,
}

impl Bb<'_> {
    fn bound(&mut self, from: usize) -> u64 {
        let mut total = 0u64;
        let mut touched = Vec::new();
        for e in &self.edges[from..] {
            if self.res[e.u] > 0 && self.res[e.v] > 0 {
                total += u64::from(e.w);
                for x in [e.u, e.v] {
                    if self.scratch[x].is_empty() {
                        touched.push(x);
                    }
                    self.scratch[x].push(e.w);
                }
            }
        }
        let mut twice = 0u64;
        for x in touched {
            let list = &mut self.scratch[x];
            list.sort_unstable_by(|a, b| b.cmp(a));
            twice += list.iter().take(self.res[x] as usize).map(|&w| u64::from(w)).sum::<u64>();
            list.clear();
        }
        total.min(twice / 2)
    }

    fn search(&mut self, i: usize, cur_w: u64) -> Result<(), MatchingError> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(MatchingError::BudgetExceeded { budget: self.budget });
        }
        if cur_w > self.best {
            self.best = cur_w;
            self.best_set = self.cur.clone();
        }
        if i == self.edges.len() || cur_w + self.bound(i) <= self.best {
            return Ok(());
        }
        let e = self.edges[i];
        if self.res[e.u] > 0 && self.res[e.v] > 0 {
            self.res[e.u] -= 1;
            self.res[e.v] -= 1;
            self.cur.push(e.id);
            self.search(i + 1, cur_w + u64::from(e.w))?;
            self.cur.pop();
            self.res[e.u] += 1;
            self.res[e.v] += 1;
        }
        self.search(i + 1, cur_w)
    }
}

/// Maximum-weight b-matching of a subgraph, exact within `budget` and
/// greedy otherwise. The flag reports whether the exact solver finished.
pub fn best_effort_on(graph: &MultiGraph, edges: &[EdgeId], caps: &Capacities, budget: u64) -> (BMatching, bool) {
    match exact_on(graph, edges, caps, budget) {
        Ok(m) => (m, true),
        Err(_) => (greedy_on(graph, edges, caps), false),
    }
}

/// Same as [`exact_on`] for a [`Subgraph`].
pub fn exact_subgraph(h: &Subgraph<'_>, caps: &Capacities, budget: u64) -> Result<BMatching, MatchingError> {
    exact_on(h.graph(), &h.edge_ids(), caps, budget)
}

/// Minimum w-vertex-cover of a bipartite graph by exhaustive search over the
/// labels of the smaller side; the other side's labels are then forced.
pub fn min_w_vertex_cover_bipartite(graph: &MultiGraph, budget: u64) -> Result<WVertexCover, MatchingError> {
    let side = graph.bipartition().ok_or(MatchingError::NotBipartite)?;
    let n = graph.n();
    let left_count = side.iter().filter(|&&s| s).count();
    let pick = left_count <= n - left_count;
    let free: Vec<Vertex> = (0..n)
        .filter(|&v| side[v] == pick && !graph.incident(v).is_empty())
        .collect();
    let mut cover = CoverSearch {
        graph,
        free: free.clone(),
        alpha: vec![0; n],
        need: vec![0; n],
        best: u64::MAX,
        best_alpha: vec![0; n],
        nodes: 0,
        budget,
    };
    // Trivial incumbent: each chosen vertex takes its heaviest incident weight.
    let mut start = vec![0u64; n];
    for &v in &free {
        start[v] = graph.incident(v).iter().map(|&id| u64::from(graph.edge(id).w)).max().unwrap_or(0);
    }
    cover.best = start.iter().sum();
    cover.best_alpha = start;
    cover.search(0, 0)?;
    let result = WVertexCover { alpha: cover.best_alpha };
    debug_assert!(result.covers(graph));
    Ok(result)
}

struct CoverSearch<'g> {
    graph: &'g MultiGraph,
    free: Vec<Vertex>,
    alpha: Vec<u64>,
    /// Current forced label of each opposite-side vertex.
    need: Vec<u64>,
    best: u64,
    best_alpha: Vec<u64>,
    nodes: u64,
    budget: u64,
}

impl CoverSearch<'_> {
    fn search(&mut self, i: usize, lower: u64) -> Result<(), MatchingError> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(MatchingError::BudgetExceeded { budget: self.budget });
        }
        if lower >= self.best {
            return Ok(());
        }
        if i == self.free.len() {
            self.best = lower;
            self.best_alpha = self.alpha.clone();
            for (v, &need) in self.need.iter().enumerate() {
                if need > 0 {
                    self.best_alpha[v] = need;
                }
            }
            return Ok(());
        }
        let v = self.free[i];
        let graph = self.graph;
        let top = graph.incident(v).iter().map(|&id| u64::from(graph.edge(id).w)).max().unwrap_or(0);
        for a in 0..=top {
            self.alpha[v] = a;
            let mut saved = Vec::new();
            let mut extra = 0u64;
            for &id in graph.incident(v) {
                let e = graph.edge(id);
                let x = e.other(v);
                let req = u64::from(e.w).saturating_sub(a);
                if req > self.need[x] {
                    saved.push((x, self.need[x]));
                    extra += req - self.need[x];
                    self.need[x] = req;
                }
            }
            let res = self.search(i + 1, lower + a + extra);
            for (x, old) in saved.into_iter().rev() {
                self.need[x] = old;
            }
            res?;
        }
        self.alpha[v] = 0;
        Ok(())
    }
}

/// One edge offered to [`distribute_edges`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DistItem {
    pub weight: Weight,
    /// Member of the reference b-matching.
    pub matched: bool,
    /// Member of the sparsifier `H`.
    pub in_h: bool,
}

/// Bucket assignment: `buckets[i]` lists `(group, position)` pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Distribution {
    pub buckets: Vec<Vec<(usize, usize)>>,
    pub used_for_matching: Vec<bool>,
}

impl Distribution {
    pub fn bucket_weight(&self, groups: &[Vec<DistItem>], i: usize) -> u64 {
        self.buckets[i].iter().map(|&(g, j)| u64::from(groups[g][j].weight)).sum()
    }
}

/// Distributes the edges at one vertex over `b_v` buckets, neighbor group by
/// neighbor group. Matched edges go to the lightest buckets that have not
/// yet received a matched edge, the rest to the lightest remaining buckets;
/// ties go to the smaller bucket index.
///
/// Each group must hold at most `b_v` items, listed matched first and by
/// non-increasing weight.
pub fn distribute_edges(groups: &[Vec<DistItem>], b_v: u32) -> Result<Distribution, MatchingError> {
    let b = b_v as usize;
    if b == 0 {
        return Err(MatchingError::Precondition("b_v must be positive".into()));
    }
    let mut total_matched = 0usize;
    for (g, items) in groups.iter().enumerate() {
        if items.len() > b {
            return Err(MatchingError::Precondition(format!("group {g} has {} > b_v = {b} edges", items.len())));
        }
        let m = items.iter().take_while(|x| x.matched).count();
        if items[m..].iter().any(|x| x.matched) {
            return Err(MatchingError::Precondition(format!("group {g}: matched edges must come first")));
        }
        if items.windows(2).any(|w| w[0].weight < w[1].weight) {
            return Err(MatchingError::Precondition(format!("group {g}: weights must be non-increasing")));
        }
        total_matched += m;
    }
    if total_matched > b {
        return Err(MatchingError::Precondition(format!("{total_matched} matched edges exceed b_v = {b}")));
    }

    let mut weight = vec![0u64; b];
    let mut used = vec![false; b];
    let mut buckets: Vec<Vec<(usize, usize)>> = vec![Vec::new(); b];
    let mut taken = vec![false; b];
    for (g, items) in groups.iter().enumerate() {
        taken.fill(false);
        let m = items.iter().take_while(|x| x.matched).count();
        let mut order: Vec<usize> = (0..b).filter(|&i| !used[i]).collect();
        order.sort_by_key(|&i| (weight[i], i));
        for (j, &i) in order.iter().take(m).enumerate() {
            buckets[i].push((g, j));
            weight[i] += u64::from(items[j].weight);
            used[i] = true;
            taken[i] = true;
        }
        let mut order: Vec<usize> = (0..b).filter(|&i| !taken[i]).collect();
        order.sort_by_key(|&i| (weight[i], i));
        for (j, &i) in (m..items.len()).zip(order.iter()) {
            buckets[i].push((g, j));
            weight[i] += u64::from(items[j].weight);
        }
    }
    Ok(Distribution { buckets, used_for_matching: used })
}

/// Which of the distribution properties hold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistributionCheck {
    pub every_item_once: bool,
    pub one_matched_per_bucket: bool,
    pub one_per_neighbor: bool,
    pub within_window: bool,
    /// Largest bucket weight minus smallest.
    pub spread: u64,
}

impl DistributionCheck {
    pub fn all_hold(&self) -> bool {
        self.every_item_once && self.one_matched_per_bucket && self.one_per_neighbor && self.within_window
    }
}

/// Checks a distribution independently of how it was produced. The window
/// is `[wdeg_H/b_v - 2W, wdeg_H/b_v + 3W]`, compared after scaling by `b_v`.
pub fn check_distribution(groups: &[Vec<DistItem>], b_v: u32, w_cap: Weight, dist: &Distribution) -> DistributionCheck {
    let b = i128::from(b_v);
    let w = i128::from(w_cap);
    let mut seen: Vec<Vec<u32>> = groups.iter().map(|g| vec![0; g.len()]).collect();
    let mut one_matched = true;
    let mut one_per_neighbor = true;
    let mut weights = Vec::with_capacity(dist.buckets.len());
    for bucket in &dist.buckets {
        let mut matched = 0;
        let mut groups_here: Vec<usize> = bucket.iter().map(|&(g, _)| g).collect();
        groups_here.sort_unstable();
        if groups_here.windows(2).any(|p| p[0] == p[1]) {
            one_per_neighbor = false;
        }
        let mut total = 0i128;
        for &(g, j) in bucket {
            seen[g][j] += 1;
            let item = groups[g][j];
            matched += usize::from(item.matched);
            total += i128::from(item.weight);
        }
        if matched > 1 {
            one_matched = false;
        }
        weights.push(total);
    }
    let every_item_once = dist.buckets.len() == b_v as usize && seen.iter().flatten().all(|&c| c == 1);
    let wdeg_h: i128 = groups.iter().flatten().filter(|x| x.in_h).map(|x| i128::from(x.weight)).sum();
    let within_window = weights
        .iter()
        .all(|&x| x * b >= wdeg_h - 2 * w * b && x * b <= wdeg_h + 3 * w * b);
    let spread = match (weights.iter().max(), weights.iter().min()) {
        (Some(hi), Some(lo)) => (hi - lo) as u64,
        _ => 0,
    };
    DistributionCheck {
        every_item_once,
        one_matched_per_bucket: one_matched,
        one_per_neighbor,
        within_window,
        spread,
    }
}

/// The graph obtained by splitting every vertex `v` into `b_v` copies.
#[derive(Clone, Debug)]
pub struct SplitGraph {
    /// Simple graph on the copies, carrying the edges of `H` and `M`.
    pub graph: MultiGraph,
    /// Original vertex of each copy.
    pub copy_of: Vec<Vertex>,
    /// First copy of each original vertex; copies are contiguous.
    pub first_copy: Vec<usize>,
    /// Original edge of each split edge.
    pub origin: Vec<EdgeId>,
    /// Split edges coming from `H`.
    pub h_edges: Vec<EdgeId>,
    /// Split edges coming from `M`.
    pub m_edges: Vec<EdgeId>,
}

impl SplitGraph {
    /// Maps split edge ids back to the original graph.
    pub fn lift(&self, ids: &[EdgeId]) -> Vec<EdgeId> {
        let mut out: Vec<EdgeId> = ids.iter().map(|id| self.origin[id.index()]).collect();
        out.sort_unstable();
        out
    }

    /// Weighted degree of every copy counting only `H` edges.
    pub fn h_weighted_degrees(&self) -> Vec<u64> {
        let mut d = vec![0u64; self.copy_of.len()];
        for &id in &self.h_edges {
            let e = self.graph.edge(id);
            d[e.u] += u64::from(e.w);
            d[e.v] += u64::from(e.w);
        }
        d
    }
}

/// Splits every vertex into `b_v` copies and distributes the edges of
/// `H ∪ M` over them with [`distribute_edges`], padding each neighbor group
/// with weight-0 placeholders up to `b_v` items.
pub fn vertex_split(graph: &MultiGraph, caps: &Capacities, h: &Subgraph<'_>, m: &BMatching) -> Result<SplitGraph, MatchingError> {
    caps.check_for(graph)?;
    if !m.is_valid(graph, caps) {
        return Err(MatchingError::Precondition("M is not a b-matching of G".into()));
    }
    let n = graph.n();
    let mut in_m = vec![false; graph.m()];
    for &id in &m.members {
        in_m[id.index()] = true;
    }
    let in_s = |id: EdgeId| h.contains(id) || in_m[id.index()];
    let s_ids: Vec<EdgeId> = graph.edge_ids().into_iter().filter(|&id| in_s(id)).collect();
    crate::graph::check_multiplicity(graph, s_ids.iter().copied(), caps)?;

    let mut first_copy = Vec::with_capacity(n);
    let mut copy_of = Vec::new();
    for v in 0..n {
        first_copy.push(copy_of.len());
        copy_of.extend(std::iter::repeat_n(v, caps.get(v) as usize));
    }
    // endpoint_copy[id] = (copy at u, copy at v)
    let mut endpoint_copy: Vec<[usize; 2]> = vec![[usize::MAX; 2]; graph.m()];

    for v in 0..n {
        let mut by_neighbor: std::collections::BTreeMap<Vertex, Vec<EdgeId>> = Default::default();
        for &id in graph.incident(v) {
            if in_s(id) {
                by_neighbor.entry(graph.edge(id).other(v)).or_default().push(id);
            }
        }
        if by_neighbor.is_empty() {
            continue;
        }
        let b = caps.get(v);
        let mut groups: Vec<Vec<DistItem>> = Vec::new();
        let mut group_ids: Vec<Vec<Option<EdgeId>>> = Vec::new();
        for (_, mut ids) in by_neighbor {
            ids.sort_by_key(|&id| (Reverse(in_m[id.index()]), Reverse(graph.edge(id).w), id));
            let mut items: Vec<DistItem> = ids
                .iter()
                .map(|&id| DistItem {
                    weight: graph.edge(id).w,
                    matched: in_m[id.index()],
                    in_h: h.contains(id),
                })
                .collect();
            let mut slots: Vec<Option<EdgeId>> = ids.into_iter().map(Some).collect();
            while items.len() < b as usize {
                items.push(DistItem { weight: 0, matched: false, in_h: false });
                slots.push(None);
            }
            groups.push(items);
            group_ids.push(slots);
        }
        let dist = distribute_edges(&groups, b)?;
        for (i, bucket) in dist.buckets.iter().enumerate() {
            for &(g, j) in bucket {
                if let Some(id) = group_ids[g][j] {
                    let e = graph.edge(id);
                    let slot = usize::from(e.u != v);
                    endpoint_copy[id.index()][slot] = first_copy[v] + i;
                }
            }
        }
    }

    let mut split = MultiGraph::new(copy_of.len(), graph.w_cap())?;
    let mut origin = Vec::new();
    let mut h_edges = Vec::new();
    let mut m_edges = Vec::new();
    for &id in &s_ids {
        let [cu, cv] = endpoint_copy[id.index()];
        let new_id = split.add_edge(cu, cv, graph.edge(id).w)?;
        origin.push(id);
        if h.contains(id) {
            h_edges.push(new_id);
        }
        if in_m[id.index()] {
            m_edges.push(new_id);
        }
    }
    Ok(SplitGraph {
        graph: split,
        copy_of,
        first_copy,
        origin,
        h_edges,
        m_edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(graph: &MultiGraph, caps: &Capacities) -> u64 {
        let m = graph.m();
        let mut best = 0;
        for mask in 0u32..(1 << m) {
            let mut used = vec![0u32; graph.n()];
            let mut w = 0u64;
            let mut ok = true;
            for (i, e) in graph.edges().iter().enumerate() {
                if mask >> i & 1 == 1 {
                    used[e.u] += 1;
                    used[e.v] += 1;
                    w += u64::from(e.w);
                    ok &= used[e.u] <= caps.get(e.u) && used[e.v] <= caps.get(e.v);
                }
            }
            if ok {
                best = best.max(w);
            }
        }
        best
    }

    fn triangle() -> MultiGraph {
        MultiGraph::from_edges(3, 1, [(0, 1, 1), (1, 2, 1), (0, 2, 1)]).unwrap()
    }

    #[test]
    fn exact_examples() {
        let empty = MultiGraph::new(0, 1).unwrap();
        assert_eq!(max_weight_b_matching_exact(&empty, &Capacities::ones(0), 10).unwrap().weight, 0);
        let one = MultiGraph::from_edges(2, 5, [(0, 1, 5)]).unwrap();
        assert_eq!(max_weight_b_matching_exact(&one, &Capacities::ones(2), 10).unwrap().weight, 5);
        let t = triangle();
        assert_eq!(max_weight_b_matching_exact(&t, &Capacities::ones(3), 100).unwrap().weight, 1);
        let caps = Capacities::uniform(3, 2).unwrap();
        assert_eq!(max_weight_b_matching_exact(&t, &caps, 100).unwrap().weight, 3);
        assert_eq!(brute_force(&t, &caps), 3);
    }

    #[test]
    fn budget_is_reported() {
        // Two triangles: greedy finds 2, the root bound says 3.
        let g = MultiGraph::from_edges(6, 1, [(0, 1, 1), (1, 2, 1), (0, 2, 1), (3, 4, 1), (4, 5, 1), (3, 5, 1)]).unwrap();
        let err = max_weight_b_matching_exact(&g, &Capacities::ones(6), 1).unwrap_err();
        assert_eq!(err, MatchingError::BudgetExceeded { budget: 1 });
        assert!(err.to_string().contains("too large for exact oracle"));
    }

    #[test]
    fn greedy_examples() {
        let path = MultiGraph::from_edges(3, 3, [(0, 1, 3), (1, 2, 3)]).unwrap();
        let m = max_weight_b_matching_greedy(&path, &Capacities::ones(3));
        assert_eq!(m.members, vec![EdgeId(0)]);
        assert_eq!(m.weight, 3);
        let star = MultiGraph::from_edges(4, 5, [(0, 1, 5), (0, 2, 1), (0, 3, 1)]).unwrap();
        let caps = Capacities::from_vec(vec![2, 1, 1, 1]).unwrap();
        assert_eq!(max_weight_b_matching_greedy(&star, &caps).weight, 6);
        assert_eq!(brute_force(&star, &caps), 6);
    }

    #[test]
    fn flow_and_branch_and_bound_agree_on_bipartite_multigraphs() {
        let g = MultiGraph::from_edges(
            6,
            4,
            [(0, 3, 4), (0, 3, 2), (0, 4, 3), (1, 4, 4), (1, 5, 1), (2, 5, 3), (2, 3, 2), (1, 3, 4)],
        )
        .unwrap();
        let caps = Capacities::from_vec(vec![2, 1, 2, 2, 1, 2]).unwrap();
        let flow = max_weight_b_matching_exact(&g, &caps, 10).unwrap();
        let bb = branch_and_bound(&g, &g.edge_ids(), &caps, 1_000_000).unwrap();
        assert_eq!(flow.weight, bb.weight);
        assert_eq!(flow.weight, brute_force(&g, &caps));
        assert!(flow.is_valid(&g, &caps));
    }

    #[test]
    fn cover_examples() {
        let one = MultiGraph::from_edges(2, 3, [(0, 1, 3)]).unwrap();
        assert_eq!(min_w_vertex_cover_bipartite(&one, 1000).unwrap().weight(), 3);
        let path = MultiGraph::from_edges(3, 2, [(0, 1, 2), (1, 2, 2)]).unwrap();
        let c = min_w_vertex_cover_bipartite(&path, 1000).unwrap();
        assert_eq!(c.weight(), 2);
        assert!(c.covers(&path));
        assert_eq!(
            min_w_vertex_cover_bipartite(&triangle(), 1000),
            Err(MatchingError::NotBipartite)
        );
    }

    fn item(weight: Weight, matched: bool) -> DistItem {
        DistItem { weight, matched, in_h: true }
    }

    #[test]
    fn distribution_examples() {
        let groups = vec![vec![item(3, false)]];
        let d = distribute_edges(&groups, 1).unwrap();
        assert_eq!(d.buckets, vec![vec![(0, 0)]]);

        let groups = vec![vec![item(4, true), item(1, false)]];
        let d = distribute_edges(&groups, 2).unwrap();
        assert_eq!(d.buckets, vec![vec![(0, 0)], vec![(0, 1)]]);
        let check = check_distribution(&groups, 2, 4, &d);
        assert!(check.all_hold());
        assert_eq!(check.spread, 3);
    }

    #[test]
    fn distribution_rejects_bad_groups() {
        assert!(distribute_edges(&[vec![item(1, false), item(2, false)]], 2).is_err());
        assert!(distribute_edges(&[vec![item(2, false), item(1, true)]], 2).is_err());
        assert!(distribute_edges(&[vec![item(1, false), item(1, false)]], 1).is_err());
        assert!(distribute_edges(&[vec![item(1, true)], vec![item(1, true)]], 1).is_err());
    }

    #[test]
    fn unit_capacities_split_to_the_same_graph() {
        let g = MultiGraph::from_edges(4, 2, [(0, 1, 2), (1, 2, 1), (2, 3, 2)]).unwrap();
        let caps = Capacities::ones(4);
        let h = Subgraph::from_edges(&g, [EdgeId(0), EdgeId(1)]).unwrap();
        let m = BMatching::from_ids(&g, vec![EdgeId(0), EdgeId(2)]);
        let split = vertex_split(&g, &caps, &h, &m).unwrap();
        assert_eq!(split.copy_of, vec![0, 1, 2, 3]);
        let pairs: Vec<_> = split.graph.edges().iter().map(|e| (e.u, e.v, e.w)).collect();
        assert_eq!(pairs, vec![(0, 1, 2), (1, 2, 1), (2, 3, 2)]);
        assert_eq!(split.origin, vec![EdgeId(0), EdgeId(1), EdgeId(2)]);
    }

    #[test]
    fn triangle_split_is_simple() {
        let t = triangle();
        let caps = Capacities::uniform(3, 2).unwrap();
        let h = Subgraph::full(&t);
        let m = max_weight_b_matching_exact(&t, &caps, 1000).unwrap();
        let split = vertex_split(&t, &caps, &h, &m).unwrap();
        assert_eq!(split.graph.n(), 6);
        assert!(split.graph.is_simple());
    }
}
