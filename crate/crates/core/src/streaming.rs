//! Random-order semi-streaming b-matching.
//!
//! Phase 1 grows a subgraph `H` of bounded weighted edge-degree `beta` on an
//! early prefix of the stream, in epochs of `alpha_i` edges; an epoch with no
//! underfull arrival ends it. Phase 2 collects every remaining underfull edge
//! into `X`. The answer is a maximum-weight b-matching of `H ∪ X`.

use std::collections::HashMap;

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::edcs::{compare_load, potential_delta, violates_upper, EdcsError, EdcsParams};
use crate::graph::{Capacities, EdgeId, MultiGraph, Subgraph, Vertex, WeightedEdge};
use crate::matching::{exact_on, greedy_on, BMatching};

/// Identifier of the permutation generator, written into every run record.
pub const PRNG_ID: &str = "chacha8-seed_from_u64/fisher-yates";

/// How `log2(m)` is rounded in the interval sizes.
pub const LOG_ROUNDING: &str = "ceil_log2_min1";

/// Edges of a graph in stream order.
#[derive(Clone, Debug)]
pub struct EdgeStream<'g> {
    graph: &'g MultiGraph,
    order: Vec<EdgeId>,
    cursor: usize,
}

impl<'g> EdgeStream<'g> {
    /// File order.
    pub fn in_order(graph: &'g MultiGraph) -> Self {
        Self::with_order(graph, graph.edge_ids())
    }

    /// Panics unless `order` is a permutation of the edge ids.
    pub fn with_order(graph: &'g MultiGraph, order: Vec<EdgeId>) -> Self {
        let mut seen = vec![false; graph.m()];
        assert_eq!(order.len(), graph.m(), "stream order must list every edge");
        for id in &order {
            assert!(!std::mem::replace(&mut seen[id.index()], true), "edge {id} repeated in stream order");
        }
        Self { graph, order, cursor: 0 }
    }

    pub fn graph(&self) -> &'g MultiGraph {
        self.graph
    }

    pub fn m(&self) -> usize {
        self.order.len()
    }

    pub fn order(&self) -> &[EdgeId] {
        &self.order
    }

    pub fn position(&self) -> usize {
        self.cursor
    }

    pub fn remaining(&self) -> usize {
        self.order.len() - self.cursor
    }

    pub fn rewind(&mut self) {
        self.cursor = 0;
    }
}

impl<'g> Iterator for EdgeStream<'g> {
    type Item = &'g WeightedEdge;

    fn next(&mut self) -> Option<Self::Item> {
        let id = *self.order.get(self.cursor)?;
        self.cursor += 1;
        Some(self.graph.edge(id))
    }
}

/// Uniformly random edge order from `seed`.
pub fn make_stream(graph: &MultiGraph, seed: u64) -> EdgeStream<'_> {
    let mut order = graph.edge_ids();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    EdgeStream { graph, order, cursor: 0 }
}

/// `wdeg_H(u)/b_u + wdeg_H(v)/b_v < beta_minus * w`, exactly.
pub fn is_underfull(h: &Subgraph<'_>, caps: &Capacities, e: &WeightedEdge, params: &EdcsParams) -> bool {
    compare_load(h, caps, e, params.beta_minus).is_lt()
}

/// Underfull test for streams that may carry more parallel edges than the
/// capacities allow: a pair already holding `min(b_u, b_v)` edges of `H`
/// admits exactly the edges heavier than its lightest one.
pub fn is_underfull_relevant(h: &Subgraph<'_>, caps: &Capacities, e: &WeightedEdge, params: &EdcsParams) -> bool {
    let limit = caps.get(e.u).min(caps.get(e.v)) as usize;
    let pair = h.pair_members(e.u, e.v);
    if pair.len() >= limit {
        let graph = h.graph();
        pair.iter().map(|&id| graph.edge(id).w).min().is_some_and(|lightest| lightest < e.w)
    } else {
        is_underfull(h, caps, e, params)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fallback {
    None,
    SmallOutput,
    AlphaZero,
}

impl Fallback {
    pub fn as_str(self) -> &'static str {
        match self {
            Fallback::None => "none",
            Fallback::SmallOutput => "small_output",
            Fallback::AlphaZero => "alpha_zero",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extraction {
    Exact,
    Greedy,
}

impl Extraction {
    pub fn as_str(self) -> &'static str {
        match self {
            Extraction::Exact => "exact",
            Extraction::Greedy => "greedy",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    /// Multiplicities already bounded by the capacities.
    #[serde(rename = "1")]
    Bounded,
    /// Arbitrary multiplicities, irrelevant edges filtered on the fly.
    #[serde(rename = "3")]
    Relevant,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StreamRunStats {
    pub m: usize,
    pub phase1_edges_consumed: usize,
    /// Guess index at which phase 1 ended.
    pub final_guess_i: u32,
    pub epoch_count: u64,
    /// `ProcessStopped` was raised (an epoch found nothing).
    pub phase1_stopped: bool,
    pub phase1_insertions: u64,
    pub phase1_removals: u64,
    pub replacements: u64,
    pub ignored_irrelevant: u64,
    /// Smallest potential gain of a replacement, as `p/q`.
    pub min_replacement_gain: Option<String>,
    /// Replacements whose potential gain was below 1.
    pub replacement_gain_shortfalls: u64,
    pub h_size: usize,
    pub underfull_collected: usize,
    pub peak_stored_edges: usize,
    pub aux_cap: u64,
    pub aux_exceeded: bool,
    pub fallback_used: Fallback,
    pub extraction: Extraction,
    pub result_weight: u64,
    pub prng: &'static str,
    pub log_rounding: &'static str,
}

/// Everything a run produces.
#[derive(Clone, Debug)]
pub struct StreamOutcome<'g> {
    pub h: Subgraph<'g>,
    /// Collected edges in arrival order.
    pub x: Vec<EdgeId>,
    pub matching: BMatching,
    pub stats: StreamRunStats,
}

fn floor_log2(m: usize) -> u32 {
    usize::BITS - 1 - m.leading_zeros()
}

fn ceil_log2(m: usize) -> u32 {
    if m <= 1 {
        0
    } else {
        floor_log2(m - 1) + 1
    }
}

/// Epochs allotted to guess `i`: `2^(i+2) beta^2 W^2 + 1`, `None` on overflow.
pub fn epochs_for(i: u32, params: &EdcsParams) -> Option<u128> {
    let b = u128::from(params.beta);
    let w = u128::from(params.w_cap);
    if i + 2 >= 127 {
        return None;
    }
    (1u128 << (i + 2))
        .checked_mul(b * b)
        .and_then(|p| p.checked_mul(w * w))
        .and_then(|p| p.checked_add(1))
}

/// `floor(eps * m / (L * (2^(i+2) beta^2 W^2 + 1)))` with `L = max(1, ceil(log2 m))`.
pub fn alpha_for(i: u32, m: usize, params: &EdcsParams) -> u64 {
    let Some(epochs) = epochs_for(i, params) else { return 0 };
    let l = u128::from(ceil_log2(m).max(1));
    let p = *params.epsilon.numer() as u128;
    let q = *params.epsilon.denom() as u128;
    match q.checked_mul(l).and_then(|d| d.checked_mul(epochs)) {
        Some(den) => u64::try_from(p * m as u128 / den).unwrap_or(u64::MAX),
        None => 0,
    }
}

/// Edges stored by the auxiliary relevant-graph sketch: for every pair the
/// `min(b_u, b_v)` heaviest edges seen so far. It gives up (and frees its
/// memory) once it would exceed its cap.
#[derive(Clone, Debug)]
pub struct AuxStore {
    cap: u64,
    pairs: HashMap<(Vertex, Vertex), Vec<(u32, EdgeId)>>,
    len: usize,
    exceeded: bool,
}

impl AuxStore {
    pub fn new(cap: u64) -> Self {
        Self {
            cap,
            pairs: HashMap::new(),
            len: 0,
            exceeded: false,
        }
    }

    /// `2n * (3 W^2 / (2 eps^2)) * ln m`, rounded down.
    pub fn paper_cap(n: usize, m: usize, params: &EdcsParams) -> u64 {
        let eps = *params.epsilon.numer() as f64 / *params.epsilon.denom() as f64;
        let w = f64::from(params.w_cap);
        let ln_m = (m.max(1) as f64).ln();
        (2.0 * n as f64 * (3.0 * w * w / (2.0 * eps * eps)) * ln_m).floor() as u64
    }

    pub fn offer(&mut self, e: &WeightedEdge, caps: &Capacities) {
        if self.exceeded {
            return;
        }
        let limit = caps.get(e.u).min(caps.get(e.v)) as usize;
        let list = self.pairs.entry(e.pair()).or_default();
        // Keep heaviest first, ties by smaller id.
        let key = (std::cmp::Reverse(e.w), e.id);
        let pos = list.partition_point(|&(w, id)| (std::cmp::Reverse(w), id) < key);
        if pos >= limit {
            return;
        }
        list.insert(pos, (e.w, e.id));
        if list.len() > limit {
            list.pop();
        } else {
            self.len += 1;
        }
        if self.len as u64 > self.cap {
            self.exceeded = true;
            self.pairs = HashMap::new();
            self.len = 0;
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn exceeded(&self) -> bool {
        self.exceeded
    }

    pub fn edge_ids(&self) -> Vec<EdgeId> {
        let mut ids: Vec<EdgeId> = self.pairs.values().flatten().map(|&(_, id)| id).collect();
        ids.sort_unstable();
        ids
    }
}

struct Runner<'g, 'a> {
    caps: &'a Capacities,
    params: &'a EdcsParams,
    variant: Variant,
    h: Subgraph<'g>,
    x: Vec<EdgeId>,
    aux: Option<&'a mut AuxStore>,
    peak: usize,
    insertions: u64,
    removals: u64,
    replacements: u64,
    ignored: u64,
    min_gain: Option<Ratio<i128>>,
    shortfalls: u64,
    candidates: Vec<EdgeId>,
}

impl<'g> Runner<'g, '_> {
    fn observe(&mut self, e: &WeightedEdge) {
        if let Some(aux) = self.aux.as_deref_mut() {
            aux.offer(e, self.caps);
        }
        let stored = self.h.len() + self.x.len() + self.aux.as_deref().map_or(0, AuxStore::len);
        self.peak = self.peak.max(stored);
    }

    /// One phase-1 arrival; returns whether it counts as an underfull insertion.
    fn arrive(&mut self, e: &'g WeightedEdge) -> bool {
        if !is_underfull(&self.h, self.caps, e, self.params) {
            return false;
        }
        if self.variant == Variant::Relevant {
            let limit = self.caps.get(e.u).min(self.caps.get(e.v)) as usize;
            let pair = self.h.pair_members(e.u, e.v);
            if pair.len() >= limit {
                let graph = self.h.graph();
                // lightest, ties to the smaller id
                let lightest = *pair.iter().min_by_key(|&&id| (graph.edge(id).w, id)).unwrap();
                if e.w <= graph.edge(lightest).w {
                    self.ignored += 1;
                    return false;
                }
                let out = potential_delta(&self.h, self.caps, graph.edge(lightest), self.params.beta, false);
                self.h.remove(lightest);
                let inn = potential_delta(&self.h, self.caps, e, self.params.beta, true);
                let gain = out + inn;
                if gain < Ratio::from_integer(1) {
                    self.shortfalls += 1;
                }
                self.min_gain = Some(self.min_gain.map_or(gain, |g| g.min(gain)));
                self.replacements += 1;
            }
        }
        self.h.insert(e.id);
        self.insertions += 1;
        self.repair(e);
        true
    }

    /// Removes members violating the degree bound. Only members at `e`'s
    /// endpoints can be affected, and removals only lower loads, so one pass
    /// in edge-id order with a recheck suffices.
    fn repair(&mut self, e: &WeightedEdge) {
        let mut candidates = std::mem::take(&mut self.candidates);
        candidates.clear();
        candidates.extend_from_slice(self.h.incident_members(e.u));
        candidates.extend_from_slice(self.h.incident_members(e.v));
        candidates.sort_unstable();
        candidates.dedup();
        let graph = self.h.graph();
        for &id in &candidates {
            if self.h.contains(id) && violates_upper(&self.h, self.caps, graph.edge(id), self.params.beta) {
                self.h.remove(id);
                self.removals += 1;
            }
        }
        self.candidates = candidates;
        debug_assert!(
            [e.u, e.v].iter().all(|&x| self
                .h
                .incident_members(x)
                .iter()
                .all(|&id| !violates_upper(&self.h, self.caps, graph.edge(id), self.params.beta))),
            "bounded edge-degree broken after repair"
        );
    }

    fn collect(&mut self, e: &WeightedEdge) {
        let keep = match self.variant {
            Variant::Bounded => is_underfull(&self.h, self.caps, e, self.params),
            Variant::Relevant => is_underfull_relevant(&self.h, self.caps, e, self.params),
        };
        if keep {
            self.x.push(e.id);
        }
    }
}

/// Algorithm with bounded multiplicities. Fails if some pair carries more
/// than `min(b_u, b_v)` edges.
pub fn run_algorithm1<'g>(stream: EdgeStream<'g>, caps: &Capacities, params: &EdcsParams, budget: u64) -> Result<StreamOutcome<'g>, EdcsError> {
    stream.graph().check_multiplicity(caps)?;
    run(stream, caps, params, Variant::Bounded, budget, None)
}

/// Variant tolerating irrelevant parallel edges.
pub fn run_algorithm3<'g>(stream: EdgeStream<'g>, caps: &Capacities, params: &EdcsParams, budget: u64) -> Result<StreamOutcome<'g>, EdcsError> {
    run(stream, caps, params, Variant::Relevant, budget, None)
}

/// Runs the chosen variant alongside the auxiliary relevant-graph store
/// (capped at [`AuxStore::paper_cap`]). If the store never overflows, the
/// matching is computed on the stored graph instead.
pub fn fallback_controller<'g>(
    stream: EdgeStream<'g>,
    caps: &Capacities,
    params: &EdcsParams,
    variant: Variant,
    budget: u64,
) -> Result<StreamOutcome<'g>, EdcsError> {
    let cap = AuxStore::paper_cap(stream.graph().n(), stream.m(), params);
    fallback_controller_with_cap(stream, caps, params, variant, budget, cap)
}

/// [`fallback_controller`] with an explicit store cap.
pub fn fallback_controller_with_cap<'g>(
    stream: EdgeStream<'g>,
    caps: &Capacities,
    params: &EdcsParams,
    variant: Variant,
    budget: u64,
    cap: u64,
) -> Result<StreamOutcome<'g>, EdcsError> {
    if variant == Variant::Bounded {
        stream.graph().check_multiplicity(caps)?;
    }
    let graph = stream.graph();
    let mut aux = AuxStore::new(cap);
    let mut out = run(stream, caps, params, variant, budget, Some(&mut aux))?;
    out.stats.aux_cap = cap;
    out.stats.aux_exceeded = aux.exceeded();
    if !aux.exceeded() {
        let (matching, extraction) = extract(graph, &aux.edge_ids(), caps, budget);
        out.stats.fallback_used = Fallback::SmallOutput;
        out.stats.extraction = extraction;
        out.stats.result_weight = matching.weight;
        out.matching = matching;
    }
    Ok(out)
}

fn extract(graph: &MultiGraph, ids: &[EdgeId], caps: &Capacities, budget: u64) -> (BMatching, Extraction) {
    match exact_on(graph, ids, caps, budget) {
        Ok(m) => (m, Extraction::Exact),
        Err(_) => (greedy_on(graph, ids, caps), Extraction::Greedy),
    }
}

fn run<'g>(
    mut stream: EdgeStream<'g>,
    caps: &Capacities,
    params: &EdcsParams,
    variant: Variant,
    budget: u64,
    aux: Option<&mut AuxStore>,
) -> Result<StreamOutcome<'g>, EdcsError> {
    params.check()?;
    let graph = stream.graph();
    caps.check_for(graph)?;
    let found = graph.max_weight();
    if found > params.w_cap {
        return Err(EdcsError::WeightAboveCap { found, cap: params.w_cap });
    }
    let m = stream.remaining();
    let mut r = Runner {
        caps,
        params,
        variant,
        h: Subgraph::empty(graph),
        x: Vec::new(),
        aux,
        peak: 0,
        insertions: 0,
        removals: 0,
        replacements: 0,
        ignored: 0,
        min_gain: None,
        shortfalls: 0,
        candidates: Vec::new(),
    };

    let mut fallback = Fallback::None;
    let mut final_i = 0u32;
    let mut epoch_count = 0u64;
    let mut stopped = false;
    if m > 0 {
        'guesses: for i in 0..=floor_log2(m) {
            final_i = i;
            let alpha = alpha_for(i, m, params);
            if alpha == 0 {
                fallback = Fallback::AlphaZero;
                break;
            }
            let epochs = epochs_for(i, params).unwrap_or(u128::MAX);
            let mut epoch = 0u128;
            while epoch < epochs {
                epoch += 1;
                let mut found_underfull = false;
                for _ in 0..alpha {
                    let Some(e) = stream.next() else { break 'guesses };
                    if r.arrive(e) {
                        found_underfull = true;
                    }
                    r.observe(e);
                }
                epoch_count += 1;
                if !found_underfull {
                    stopped = true;
                    break 'guesses;
                }
            }
        }
    }
    let phase1_edges_consumed = stream.position();

    for e in stream.by_ref() {
        if fallback == Fallback::AlphaZero {
            r.x.push(e.id);
        } else {
            r.collect(e);
        }
        r.observe(e);
    }

    let mut stored: Vec<EdgeId> = r.h.edge_ids();
    stored.extend_from_slice(&r.x);
    let (matching, extraction) = extract(graph, &stored, caps, budget);
    let stats = StreamRunStats {
        m,
        phase1_edges_consumed,
        final_guess_i: final_i,
        epoch_count,
        phase1_stopped: stopped,
        phase1_insertions: r.insertions,
        phase1_removals: r.removals,
        replacements: r.replacements,
        ignored_irrelevant: r.ignored,
        min_replacement_gain: r.min_gain.map(|g| g.to_string()),
        replacement_gain_shortfalls: r.shortfalls,
        h_size: r.h.len(),
        underfull_collected: r.x.len(),
        peak_stored_edges: r.peak,
        aux_cap: 0,
        aux_exceeded: false,
        fallback_used: fallback,
        extraction,
        result_weight: matching.weight,
        prng: PRNG_ID,
        log_rounding: LOG_ROUNDING,
    };
    Ok(StreamOutcome {
        h: r.h,
        x: r.x,
        matching,
        stats,
    })
}
