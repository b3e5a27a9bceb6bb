//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library's own solvers or validators.
#![allow(dead_code)]

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wedcs::graph::{Capacities, EdgeId, MultiGraph};

/// Maximum b-matching weight by enumerating every edge subset.
pub fn brute_force_matching(graph: &MultiGraph, ids: &[EdgeId], caps: &Capacities) -> u64 {
    assert!(ids.len() <= 20, "brute force limited to 20 edges");
    let mut best = 0;
    for mask in 0u32..(1u32 << ids.len()) {
        let mut used = vec![0u32; graph.n()];
        let mut weight = 0u64;
        let mut ok = true;
        for (i, &id) in ids.iter().enumerate() {
            if mask >> i & 1 == 1 {
                let e = graph.edge(id);
                used[e.u] += 1;
                used[e.v] += 1;
                weight += u64::from(e.w);
                if used[e.u] > caps.get(e.u) || used[e.v] > caps.get(e.v) {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            best = best.max(weight);
        }
    }
    best
}

/// Minimum w-vertex-cover weight by enumerating all labelings in `0..=W`.
pub fn brute_force_cover(graph: &MultiGraph) -> u64 {
    let n = graph.n();
    let w = u64::from(graph.w_cap());
    let mut alpha = vec![0u64; n];
    let mut best = u64::MAX;
    loop {
        if graph.edges().iter().all(|e| u64::from(e.w) <= alpha[e.u] + alpha[e.v]) {
            best = best.min(alpha.iter().sum());
        }
        let mut i = 0;
        while i < n && alpha[i] == w {
            alpha[i] = 0;
            i += 1;
        }
        if i == n {
            return best;
        }
        alpha[i] += 1;
    }
}

/// Weighted degrees of `ids`, recounted from scratch.
pub fn recount_wdeg(graph: &MultiGraph, ids: &[EdgeId]) -> Vec<u64> {
    let mut d = vec![0u64; graph.n()];
    for &id in ids {
        let e = graph.edge(id);
        d[e.u] += u64::from(e.w);
        d[e.v] += u64::from(e.w);
    }
    d
}

/// Load `wdeg(u)/b_u + wdeg(v)/b_v` of an edge as an exact rational.
pub fn load(graph: &MultiGraph, caps: &Capacities, wdeg: &[u64], id: EdgeId) -> Ratio<i128> {
    let e = graph.edge(id);
    Ratio::new(wdeg[e.u] as i128, i128::from(caps.get(e.u))) + Ratio::new(wdeg[e.v] as i128, i128::from(caps.get(e.v)))
}

/// Both sparsifier properties, evaluated with rationals.
pub fn is_edcs(graph: &MultiGraph, caps: &Capacities, ids: &[EdgeId], beta: u64, beta_minus: u64) -> bool {
    let wdeg = recount_wdeg(graph, ids);
    let mut member = vec![false; graph.m()];
    for &id in ids {
        member[id.index()] = true;
    }
    graph.edges().iter().all(|e| {
        let l = load(graph, caps, &wdeg, e.id);
        let w = i128::from(e.w);
        if member[e.id.index()] {
            l <= Ratio::from_integer(beta as i128 * w)
        } else {
            l >= Ratio::from_integer(beta_minus as i128 * w)
        }
    })
}

/// Property (i) only.
pub fn has_bounded_edge_degree(graph: &MultiGraph, caps: &Capacities, ids: &[EdgeId], beta: u64) -> bool {
    let wdeg = recount_wdeg(graph, ids);
    ids.iter()
        .all(|&id| load(graph, caps, &wdeg, id) <= Ratio::from_integer(beta as i128 * i128::from(graph.edge(id).w)))
}

/// Seeded random multigraph with multiplicities bounded by the capacities.
pub fn random_instance(seed: u64, n: usize, m: usize, w: u32, b_max: u32, bipartite: bool) -> (MultiGraph, Capacities) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let caps = Capacities::from_vec((0..n).map(|_| rng.gen_range(1..=b_max)).collect()).unwrap();
    let mut graph = MultiGraph::new(n, w).unwrap();
    let mut count = std::collections::HashMap::new();
    let left = n.div_ceil(2);
    let mut attempts = 0;
    while graph.m() < m && attempts < 50 * m + 100 {
        attempts += 1;
        let (u, v) = if bipartite {
            (rng.gen_range(0..left), rng.gen_range(left..n))
        } else {
            (rng.gen_range(0..n), rng.gen_range(0..n))
        };
        if u == v {
            continue;
        }
        let c = count.entry((u.min(v), u.max(v))).or_insert(0u32);
        if *c >= caps.get(u).min(caps.get(v)) {
            continue;
        }
        *c += 1;
        graph.add_edge(u, v, rng.gen_range(1..=w)).unwrap();
    }
    (graph, caps)
}
