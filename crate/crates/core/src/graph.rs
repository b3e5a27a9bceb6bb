//! Multigraph representation shared by every other module.
//!
//! A [`MultiGraph`] owns the edge universe. Edge ids are assigned in input
//! order and every structure built on top of a graph ([`Subgraph`], matchings,
//! streams) refers to edges by [`EdgeId`] only. All tie-breaking in the crate
//! falls back to the smaller edge id, which keeps runs reproducible.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense 0-based vertex index.
pub type Vertex = usize;

/// Integer edge weight in `[1, W]`.
pub type Weight = u32;

/// Opaque edge identifier; the position of the edge in input order.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub u32);

impl EdgeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex {vertex} out of range (n = {n})")]
    VertexOutOfRange { vertex: Vertex, n: usize },
    #[error("self-loop on vertex {0}")]
    SelfLoop(Vertex),
    #[error("weight {weight} outside [1, {cap}]")]
    WeightOutOfRange { weight: Weight, cap: Weight },
    #[error("weight cap must be at least 1")]
    ZeroWeightCap,
    #[error("capacity of vertex {0} must be at least 1")]
    ZeroCapacity(Vertex),
    #[error("capacity vector has {got} entries, graph has {n} vertices")]
    CapacityLength { got: usize, n: usize },
    #[error("edge {0} does not belong to the graph")]
    UnknownEdge(EdgeId),
    #[error("edge {0} listed twice")]
    DuplicateEdge(EdgeId),
    #[error("{count} parallel edges between {u} and {v}, at most {limit} allowed")]
    MultiplicityExceeded {
        u: Vertex,
        v: Vertex,
        count: usize,
        limit: usize,
    },
    #[error("graph has parallel edges between {0} and {1}; a simple graph is required")]
    NotSimple(Vertex, Vertex),
    #[error("too many edges for 32-bit edge ids")]
    TooManyEdges,
}

/// One edge `(u, v, w)` of a multigraph.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeightedEdge {
    pub id: EdgeId,
    pub u: Vertex,
    pub v: Vertex,
    pub w: Weight,
}

impl WeightedEdge {
    /// The endpoint opposite to `x`.
    #[inline]
    pub fn other(&self, x: Vertex) -> Vertex {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }

    /// Endpoints as an unordered pair `(min, max)`.
    #[inline]
    pub fn pair(&self) -> (Vertex, Vertex) {
        if self.u <= self.v {
            (self.u, self.v)
        } else {
            (self.v, self.u)
        }
    }
}

/// Weighted multigraph with a declared weight cap `W`.
///
/// Built once through [`MultiGraph::add_edge`] / [`MultiGraph::from_edges`] and
/// then shared read-only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiGraph {
    n: usize,
    w_cap: Weight,
    edges: Vec<WeightedEdge>,
    adjacency: Vec<Vec<EdgeId>>,
}

impl MultiGraph {
    pub fn new(n: usize, w_cap: Weight) -> Result<Self, GraphError> {
        if w_cap == 0 {
            return Err(GraphError::ZeroWeightCap);
        }
        Ok(Self {
            n,
            w_cap,
            edges: Vec::new(),
            adjacency: vec![Vec::new(); n],
        })
    }

    pub fn from_edges<I>(n: usize, w_cap: Weight, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (Vertex, Vertex, Weight)>,
    {
        let mut g = Self::new(n, w_cap)?;
        for (u, v, w) in edges {
            g.add_edge(u, v, w)?;
        }
        Ok(g)
    }

    /// Appends an edge; its id is the current edge count.
    pub fn add_edge(&mut self, u: Vertex, v: Vertex, w: Weight) -> Result<EdgeId, GraphError> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        if w == 0 || w > self.w_cap {
            return Err(GraphError::WeightOutOfRange {
                weight: w,
                cap: self.w_cap,
            });
        }
        let id = EdgeId(u32::try_from(self.edges.len()).map_err(|_| GraphError::TooManyEdges)?);
        self.edges.push(WeightedEdge { id, u, v, w });
        self.adjacency[u].push(id);
        self.adjacency[v].push(id);
        Ok(id)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn w_cap(&self) -> Weight {
        self.w_cap
    }

    #[inline]
    pub fn edge(&self, id: EdgeId) -> &WeightedEdge {
        &self.edges[id.index()]
    }

    pub fn get_edge(&self, id: EdgeId) -> Option<&WeightedEdge> {
        self.edges.get(id.index())
    }

    #[inline]
    pub fn edges(&self) -> &[WeightedEdge] {
        &self.edges
    }

    pub fn edge_ids(&self) -> Vec<EdgeId> {
        self.edges.iter().map(|e| e.id).collect()
    }

    /// Incident edge ids of `v`, in id order.
    #[inline]
    pub fn incident(&self, v: Vertex) -> &[EdgeId] {
        &self.adjacency[v]
    }

    pub fn check_vertex(&self, v: Vertex) -> Result<(), GraphError> {
        if v < self.n {
            Ok(())
        } else {
            Err(GraphError::VertexOutOfRange {
                vertex: v,
                n: self.n,
            })
        }
    }

    pub fn max_weight(&self) -> Weight {
        self.edges.iter().map(|e| e.w).max().unwrap_or(0)
    }

    /// Number of edges per unordered vertex pair.
    pub fn pair_multiplicities(&self) -> HashMap<(Vertex, Vertex), usize> {
        let mut out = HashMap::new();
        for e in &self.edges {
            *out.entry(e.pair()).or_insert(0) += 1;
        }
        out
    }

    pub fn is_simple(&self) -> bool {
        self.pair_multiplicities().values().all(|&c| c <= 1)
    }

    /// Fails if some pair carries more than `min(b_u, b_v)` edges.
    pub fn check_multiplicity(&self, caps: &Capacities) -> Result<(), GraphError> {
        check_multiplicity(self, self.edges.iter().map(|e| e.id), caps)
    }

    /// Two-colouring of the graph if it is bipartite. `true` marks the side of
    /// the smallest vertex of each component.
    pub fn bipartition(&self) -> Option<Vec<bool>> {
        bipartition_of(self, self.edges.iter().map(|e| e.id))
    }
}

pub(crate) fn check_multiplicity<I>(
    graph: &MultiGraph,
    edges: I,
    caps: &Capacities,
) -> Result<(), GraphError>
where
    I: IntoIterator<Item = EdgeId>,
{
    let mut counts: HashMap<(Vertex, Vertex), usize> = HashMap::new();
    for id in edges {
        let e = graph.edge(id);
        let c = counts.entry(e.pair()).or_insert(0);
        *c += 1;
        let limit = caps.get(e.u).min(caps.get(e.v)) as usize;
        if *c > limit {
            let (u, v) = e.pair();
            return Err(GraphError::MultiplicityExceeded {
                u,
                v,
                count: *c,
                limit,
            });
        }
    }
    Ok(())
}

/// Two-colouring restricted to the given edges, `None` on an odd cycle.
pub fn bipartition_of<I>(graph: &MultiGraph, edges: I) -> Option<Vec<bool>>
where
    I: IntoIterator<Item = EdgeId>,
{
    let n = graph.n();
    let mut adj: Vec<Vec<Vertex>> = vec![Vec::new(); n];
    for id in edges {
        let e = graph.edge(id);
        adj[e.u].push(e.v);
        adj[e.v].push(e.u);
    }
    let mut color: Vec<Option<bool>> = vec![None; n];
    let mut stack = Vec::new();
    for s in 0..n {
        if color[s].is_some() {
            continue;
        }
        color[s] = Some(true);
        stack.push(s);
        while let Some(x) = stack.pop() {
            let cx = color[x].unwrap();
            for &y in &adj[x] {
                match color[y] {
                    None => {
                        color[y] = Some(!cx);
                        stack.push(y);
                    }
                    Some(cy) if cy == cx => return None,
                    Some(_) => {}
                }
            }
        }
    }
    Some(color.into_iter().map(|c| c.unwrap_or(true)).collect())
}

/// Per-vertex capacities `b_v >= 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Capacities(Vec<u32>);

impl Capacities {
    pub fn ones(n: usize) -> Self {
        Self(vec![1; n])
    }

    pub fn uniform(n: usize, b: u32) -> Result<Self, GraphError> {
        Self::from_vec(vec![b; n])
    }

    pub fn from_vec(b: Vec<u32>) -> Result<Self, GraphError> {
        if let Some(v) = b.iter().position(|&x| x == 0) {
            return Err(GraphError::ZeroCapacity(v));
        }
        Ok(Self(b))
    }

    /// Checks that the capacity vector covers exactly the graph's vertices.
    pub fn check_for(&self, graph: &MultiGraph) -> Result<(), GraphError> {
        if self.0.len() != graph.n() {
            return Err(GraphError::CapacityLength {
                got: self.0.len(),
                n: graph.n(),
            });
        }
        Ok(())
    }

    #[inline]
    pub fn get(&self, v: Vertex) -> u32 {
        self.0[v]
    }

    pub fn set(&mut self, v: Vertex, b: u32) -> Result<(), GraphError> {
        if b == 0 {
            return Err(GraphError::ZeroCapacity(v));
        }
        let n = self.0.len();
        *self
            .0
            .get_mut(v)
            .ok_or(GraphError::VertexOutOfRange { vertex: v, n })? = b;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn all_ones(&self) -> bool {
        self.0.iter().all(|&b| b == 1)
    }
}

/// An edge subset of a parent graph with cached degrees.
///
/// `wdeg` and `deg` are updated on every insertion and removal; see
/// [`Subgraph::cache_is_coherent`] for the full recount.
#[derive(Clone, Debug)]
pub struct Subgraph<'g> {
    graph: &'g MultiGraph,
    member: Vec<bool>,
    adj: Vec<Vec<EdgeId>>,
    wdeg: Vec<u64>,
    deg: Vec<u32>,
    len: usize,
    weight: u64,
}

impl<'g> Subgraph<'g> {
    pub fn empty(graph: &'g MultiGraph) -> Self {
        Self {
            graph,
            member: vec![false; graph.m()],
            adj: vec![Vec::new(); graph.n()],
            wdeg: vec![0; graph.n()],
            deg: vec![0; graph.n()],
            len: 0,
            weight: 0,
        }
    }

    pub fn full(graph: &'g MultiGraph) -> Self {
        let mut h = Self::empty(graph);
        for e in graph.edges() {
            h.insert(e.id);
        }
        h
    }

    pub fn from_edges<I>(graph: &'g MultiGraph, ids: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = EdgeId>,
    {
        let mut h = Self::empty(graph);
        for id in ids {
            if graph.get_edge(id).is_none() {
                return Err(GraphError::UnknownEdge(id));
            }
            if !h.insert(id) {
                return Err(GraphError::DuplicateEdge(id));
            }
        }
        Ok(h)
    }

    #[inline]
    pub fn graph(&self) -> &'g MultiGraph {
        self.graph
    }

    #[inline]
    pub fn contains(&self, id: EdgeId) -> bool {
        self.member.get(id.index()).copied().unwrap_or(false)
    }

    /// Adds `id`; returns `false` if it was already a member.
    pub fn insert(&mut self, id: EdgeId) -> bool {
        if self.member[id.index()] {
            return false;
        }
        let e = *self.graph.edge(id);
        self.member[id.index()] = true;
        for x in [e.u, e.v] {
            self.adj[x].push(id);
            self.wdeg[x] += u64::from(e.w);
            self.deg[x] += 1;
        }
        self.len += 1;
        self.weight += u64::from(e.w);
        true
    }

    /// Removes `id`; returns `false` if it was not a member.
    pub fn remove(&mut self, id: EdgeId) -> bool {
        if !self.contains(id) {
            return false;
        }
        let e = *self.graph.edge(id);
        self.member[id.index()] = false;
        for x in [e.u, e.v] {
            let pos = self.adj[x].iter().position(|&f| f == id).expect("adjacency out of sync");
            self.adj[x].swap_remove(pos);
            self.wdeg[x] -= u64::from(e.w);
            self.deg[x] -= 1;
        }
        self.len -= 1;
        self.weight -= u64::from(e.w);
        true
    }

    /// Weighted degree of `v` inside the subgraph.
    pub fn weighted_degree(&self, v: Vertex) -> Result<u64, GraphError> {
        self.graph.check_vertex(v)?;
        Ok(self.wdeg[v])
    }

    #[inline]
    pub fn wdeg(&self, v: Vertex) -> u64 {
        self.wdeg[v]
    }

    #[inline]
    pub fn degree(&self, v: Vertex) -> u32 {
        self.deg[v]
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn total_weight(&self) -> u64 {
        self.weight
    }

    /// Member edges incident to `v`, in no particular order.
    #[inline]
    pub fn incident_members(&self, v: Vertex) -> &[EdgeId] {
        &self.adj[v]
    }

    /// Member edges between `u` and `v`.
    pub fn pair_members(&self, u: Vertex, v: Vertex) -> Vec<EdgeId> {
        let (scan, other) = if self.adj[u].len() <= self.adj[v].len() {
            (u, v)
        } else {
            (v, u)
        };
        let mut out: Vec<EdgeId> = self.adj[scan]
            .iter()
            .copied()
            .filter(|&id| self.graph.edge(id).other(scan) == other)
            .collect();
        out.sort_unstable();
        out
    }

    /// Member ids in ascending order.
    pub fn edge_ids(&self) -> Vec<EdgeId> {
        self.member
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| EdgeId(i as u32))
            .collect()
    }

    pub fn edges(&self) -> impl Iterator<Item = &'g WeightedEdge> + '_ {
        let g = self.graph;
        self.member
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(move |(i, _)| g.edge(EdgeId(i as u32)))
    }

    /// Recounts `wdeg` and `deg` from the member set and compares with the cache.
    pub fn cache_is_coherent(&self) -> bool {
        let n = self.graph.n();
        let mut wdeg = vec![0u64; n];
        let mut deg = vec![0u32; n];
        let mut len = 0;
        for e in self.edges() {
            for x in [e.u, e.v] {
                wdeg[x] += u64::from(e.w);
                deg[x] += 1;
            }
            len += 1;
        }
        wdeg == self.wdeg && deg == self.deg && len == self.len
    }
}

/// For every vertex pair keep the `min(b_u, b_v)` heaviest parallel edges,
/// ties broken by smaller edge id.
pub fn relevant_subgraph<'g>(graph: &'g MultiGraph, caps: &Capacities) -> Subgraph<'g> {
    relevant_edges(graph, graph.edges().iter().map(|e| e.id), caps)
}

/// [`relevant_subgraph`] restricted to a given edge set.
pub fn relevant_edges<'g, I>(graph: &'g MultiGraph, edges: I, caps: &Capacities) -> Subgraph<'g>
where
    I: IntoIterator<Item = EdgeId>,
{
    let mut by_pair: HashMap<(Vertex, Vertex), Vec<EdgeId>> = HashMap::new();
    for id in edges {
        by_pair.entry(graph.edge(id).pair()).or_default().push(id);
    }
    let mut h = Subgraph::empty(graph);
    for ((u, v), mut ids) in by_pair {
        let keep = caps.get(u).min(caps.get(v)) as usize;
        ids.sort_by(|a, b| graph.edge(*b).w.cmp(&graph.edge(*a).w).then(a.cmp(b)));
        for id in ids.into_iter().take(keep) {
            h.insert(id);
        }
    }
    h
}

/// Maps arbitrary vertex labels to dense indices in first-seen order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelMap {
    labels: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, Vertex>,
}

impl LabelMap {
    pub fn intern(&mut self, label: &str) -> Vertex {
        if let Some(&v) = self.index.get(label) {
            return v;
        }
        let v = self.labels.len();
        self.labels.push(label.to_owned());
        self.index.insert(label.to_owned(), v);
        v
    }

    pub fn get(&self, label: &str) -> Option<Vertex> {
        self.index.get(label).copied()
    }

    pub fn label(&self, v: Vertex) -> Option<&str> {
        self.labels.get(v).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Builds a graph from labelled edges, assigning vertex indices in first-seen order.
pub fn ingest_labeled<I, S>(w_cap: Weight, edges: I) -> Result<(MultiGraph, LabelMap), GraphError>
where
    I: IntoIterator<Item = (S, S, Weight)>,
    S: AsRef<str>,
{
    let mut labels = LabelMap::default();
    let mut raw = Vec::new();
    for (a, b, w) in edges {
        let u = labels.intern(a.as_ref());
        let v = labels.intern(b.as_ref());
        raw.push((u, v, w));
    }
    let g = MultiGraph::from_edges(labels.len(), w_cap, raw)?;
    Ok((g, labels))
}
