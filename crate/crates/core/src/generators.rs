//! Instance generators: seeded random multigraphs and the two structured
//! families on which weighted sparsifiers are provably far from optimal.
//!
//! Structured families number their vertices group by group, in the order
//! the groups are listed below.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::edcs::EdcsParams;
use crate::graph::{Capacities, EdgeId, GraphError, MultiGraph, Vertex, Weight};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("infeasible spec: {0}")]
    Infeasible(String),
    #[error("beta_minus = {beta_minus} must equal 2kW = {expected}")]
    Divisibility { beta_minus: u64, expected: u64 },
    #[error("invalid spec: {0}")]
    Invalid(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Generator configuration, read from JSON.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GenSpec {
    Random(RandomSpec),
    Tight {
        k: u32,
        #[serde(rename = "W")]
        w: Weight,
        beta_minus: u64,
    },
    Multicopy {
        k: u32,
        #[serde(rename = "W")]
        w: Weight,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomSpec {
    pub n: usize,
    pub m: usize,
    #[serde(rename = "W")]
    pub w: Weight,
    #[serde(default = "one")]
    pub b_min: u32,
    #[serde(default = "one")]
    pub b_max: u32,
    pub seed: u64,
    /// Only edges between the first `ceil(n/2)` vertices and the rest.
    #[serde(default)]
    pub bipartite: bool,
    /// Allow more parallel edges than `min(b_u, b_v)`.
    #[serde(default)]
    pub raw_multiplicity: bool,
}

fn one() -> u32 {
    1
}

/// A generated graph, with the reference sparsifier for structured families.
#[derive(Clone, Debug)]
pub struct Instance {
    pub graph: MultiGraph,
    pub caps: Capacities,
    pub reference_h: Option<Vec<EdgeId>>,
    /// Parameters for which `reference_h` is a sparsifier.
    pub params: Option<EdcsParams>,
    /// Closed-form `(w(M_H), w(M_G))`.
    pub expected_weights: Option<(u64, u64)>,
}

pub fn generate(spec: &GenSpec) -> Result<Instance, GenError> {
    match spec {
        GenSpec::Random(r) => {
            let (graph, caps) = gen_random(r)?;
            Ok(Instance {
                graph,
                caps,
                reference_h: None,
                params: None,
                expected_weights: None,
            })
        }
        GenSpec::Tight { k, w, beta_minus } => gen_tight(*k, *w, *beta_minus),
        GenSpec::Multicopy { k, w } => gen_multicopy(*k, *w),
    }
}

const MAX_ATTEMPTS_PER_EDGE: usize = 10_000;

pub fn gen_random(spec: &RandomSpec) -> Result<(MultiGraph, Capacities), GenError> {
    if spec.w == 0 {
        return Err(GenError::Invalid("W must be at least 1".into()));
    }
    if spec.b_min == 0 || spec.b_min > spec.b_max {
        return Err(GenError::Invalid(format!("capacity range [{}, {}]", spec.b_min, spec.b_max)));
    }
    let n = spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let caps = Capacities::from_vec((0..n).map(|_| rng.gen_range(spec.b_min..=spec.b_max)).collect())?;
    let mut graph = MultiGraph::new(n, spec.w)?;
    if spec.m == 0 {
        return Ok((graph, caps));
    }
    let left = n.div_ceil(2);
    let pair_ok = |u: Vertex, v: Vertex| u != v && (!spec.bipartite || (u < left) != (v < left));
    if n < 2 {
        return Err(GenError::Infeasible(format!("{} edges on {n} vertices", spec.m)));
    }
    if !spec.raw_multiplicity {
        let mut slots = 0usize;
        for u in 0..n {
            for v in u + 1..n {
                if pair_ok(u, v) {
                    slots += caps.get(u).min(caps.get(v)) as usize;
                }
            }
        }
        if spec.m > slots {
            return Err(GenError::Infeasible(format!(
                "{} edges requested but capacities allow {slots}",
                spec.m
            )));
        }
    }
    let mut count: std::collections::HashMap<(Vertex, Vertex), u32> = Default::default();
    let mut attempts = 0usize;
    while graph.m() < spec.m {
        attempts += 1;
        if attempts > MAX_ATTEMPTS_PER_EDGE * spec.m {
            return Err(GenError::Infeasible("rejection sampling did not converge".into()));
        }
        let (u, v) = if spec.bipartite {
            (rng.gen_range(0..left), rng.gen_range(left..n))
        } else {
            (rng.gen_range(0..n), rng.gen_range(0..n))
        };
        let w = rng.gen_range(1..=spec.w);
        if !pair_ok(u, v) {
            continue;
        }
        let key = (u.min(v), u.max(v));
        let c = count.entry(key).or_insert(0);
        if !spec.raw_multiplicity && *c >= caps.get(u).min(caps.get(v)) {
            continue;
        }
        *c += 1;
        graph.add_edge(u, v, w)?;
    }
    Ok((graph, caps))
}

/// Two mirrored halves around a block of weight-1 edges:
///
/// * `A` (k) -- `B` (k): perfect matching, weight `W`, in `H`
/// * `C` (l) -- `B`: complete bipartite, weight `W`, in `H`
/// * `C` -- `D` (l): perfect matching, weight 1, not in `H`
/// * `D` -- `E` (k): complete bipartite, weight `W`, in `H`
/// * `E` -- `F` (k): perfect matching, weight `W`, in `H`
///
/// with `beta_minus = 2kW`, `beta = beta_minus + 2` and `l = beta - k - 1`.
pub fn gen_tight(k: u32, w: Weight, beta_minus: u64) -> Result<Instance, GenError> {
    if k == 0 || w == 0 {
        return Err(GenError::Invalid("k and W must be positive".into()));
    }
    let expected = 2 * u64::from(k) * u64::from(w);
    if beta_minus != expected {
        return Err(GenError::Divisibility { beta_minus, expected });
    }
    let beta = beta_minus + 2;
    let k = k as usize;
    let l = (beta - k as u64 - 1) as usize;
    let a = 0;
    let b = a + k;
    let c = b + k;
    let d = c + l;
    let e = d + l;
    let f = e + k;
    let n = f + k;
    let mut graph = MultiGraph::new(n, w)?;
    let mut h = Vec::new();
    for i in 0..k {
        h.push(graph.add_edge(a + i, b + i, w)?);
    }
    for j in 0..l {
        for i in 0..k {
            h.push(graph.add_edge(c + j, b + i, w)?);
        }
    }
    for j in 0..l {
        graph.add_edge(c + j, d + j, 1)?;
    }
    for j in 0..l {
        for i in 0..k {
            h.push(graph.add_edge(d + j, e + i, w)?);
        }
    }
    for i in 0..k {
        h.push(graph.add_edge(e + i, f + i, w)?);
    }
    let params = EdcsParams::with_betas(w, beta, beta_minus).map_err(|err| GenError::Invalid(err.to_string()))?;
    Ok(Instance {
        caps: Capacities::ones(n),
        graph,
        reference_h: Some(h),
        params: Some(params),
        expected_weights: Some((expected, expected + l as u64)),
    })
}

/// One copy of the unweighted `3/2` example per weight class `i = 1..=W`,
/// glued along the shared groups `B` and `E` (all groups of size `k`):
///
/// * `A_i` -- `B`: perfect matching, weight `i`, in `H`
/// * `C_i` -- `B`: complete bipartite, weight `i`, in `H`
/// * `C_i` -- `D_i`: perfect matching, weight `i`, not in `H`
/// * `D_i` -- `E`: complete bipartite, weight `i`, in `H`
/// * `E` -- `F_i`: perfect matching, weight `i`, in `H`
///
/// Within each class `H` is an EDCS for `beta = 2k + 1`, `beta_minus = 2k`.
/// Vertex groups are numbered `A_1..A_W, B, C_1..C_W, D_1..D_W, E, F_1..F_W`.
pub fn gen_multicopy(k: u32, w: Weight) -> Result<Instance, GenError> {
    if k == 0 || w < 2 {
        return Err(GenError::Invalid("need k >= 1 and W >= 2".into()));
    }
    let k = k as usize;
    let ww = w as usize;
    let a = |i: usize| (i - 1) * k;
    let b = ww * k;
    let c = |i: usize| b + k + (i - 1) * k;
    let d = |i: usize| b + k + ww * k + (i - 1) * k;
    let e = b + k + 2 * ww * k;
    let f = |i: usize| e + k + (i - 1) * k;
    let n = e + k + ww * k;
    let mut graph = MultiGraph::new(n, w)?;
    let mut h = Vec::new();
    for i in 1..=ww {
        let wi = i as Weight;
        for x in 0..k {
            h.push(graph.add_edge(a(i) + x, b + x, wi)?);
        }
        for x in 0..k {
            for y in 0..k {
                h.push(graph.add_edge(c(i) + x, b + y, wi)?);
            }
        }
        for x in 0..k {
            graph.add_edge(c(i) + x, d(i) + x, wi)?;
        }
        for x in 0..k {
            for y in 0..k {
                h.push(graph.add_edge(d(i) + x, e + y, wi)?);
            }
        }
        for x in 0..k {
            h.push(graph.add_edge(e + x, f(i) + x, wi)?);
        }
    }
    let kw = (k * ww) as u64;
    Ok(Instance {
        caps: Capacities::ones(n),
        graph,
        reference_h: Some(h),
        params: None,
        expected_weights: Some((2 * kw, 2 * kw + kw * (ww as u64 + 1) / 2)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edcs::validate;
    use crate::graph::Subgraph;

    fn random(seed: u64, raw: bool) -> RandomSpec {
        RandomSpec {
            n: 8,
            m: 30,
            w: 3,
            b_min: 1,
            b_max: 2,
            seed,
            bipartite: false,
            raw_multiplicity: raw,
        }
    }

    #[test]
    fn random_graphs_are_reproducible_and_bounded() {
        let (g1, c1) = gen_random(&random(4, false)).unwrap();
        let (g2, c2) = gen_random(&random(4, false)).unwrap();
        assert_eq!(g1.edges(), g2.edges());
        assert_eq!(c1, c2);
        assert!(g1.check_multiplicity(&c1).is_ok());
        assert!(g1.edges().iter().all(|e| (1..=3).contains(&e.w)));

        let spec = RandomSpec { m: 0, ..random(1, false) };
        assert_eq!(gen_random(&spec).unwrap().0.m(), 0);
    }

    #[test]
    fn bipartite_random_graphs_respect_sides() {
        let spec = RandomSpec { bipartite: true, n: 9, m: 15, ..random(2, false) };
        let (g, _) = gen_random(&spec).unwrap();
        assert!(g.edges().iter().all(|e| (e.u < 5) != (e.v < 5)));
    }

    #[test]
    fn infeasible_specs_are_rejected() {
        let spec = RandomSpec { n: 3, m: 10, b_min: 1, b_max: 1, ..random(0, false) };
        assert!(matches!(gen_random(&spec), Err(GenError::Infeasible(_))));
        let spec = RandomSpec { n: 1, m: 1, ..random(0, true) };
        assert!(gen_random(&spec).is_err());
    }

    #[test]
    fn tight_family_shape() {
        let inst = gen_tight(1, 1, 2).unwrap();
        // a, b, c1, c2, d1, d2, e, f
        assert_eq!(inst.graph.n(), 8);
        let params = inst.params.clone().unwrap();
        assert_eq!((params.beta, params.beta_minus), (4, 2));
        let h = Subgraph::from_edges(&inst.graph, inst.reference_h.clone().unwrap()).unwrap();
        assert!(validate(&inst.graph, &inst.caps, &h, &params).is_clean());
        assert_eq!(inst.expected_weights, Some((2, 4)));
        assert!(matches!(gen_tight(1, 2, 2), Err(GenError::Divisibility { .. })));
    }

    #[test]
    fn multicopy_shape() {
        let inst = gen_multicopy(1, 2).unwrap();
        // A1 A2 B C1 C2 D1 D2 E F1 F2
        assert_eq!(inst.graph.n(), 10);
        assert_eq!(inst.expected_weights, Some((4, 7)));
        assert!(gen_multicopy(1, 1).is_err());
    }

    #[test]
    fn spec_json_round_trip() {
        let text = r#"{"kind":"tight","k":2,"W":1,"beta_minus":4}"#;
        let spec: GenSpec = serde_json::from_str(text).unwrap();
        assert_eq!(spec, GenSpec::Tight { k: 2, w: 1, beta_minus: 4 });
        let text = r#"{"kind":"random","n":5,"m":3,"W":2,"seed":9}"#;
        let spec: GenSpec = serde_json::from_str(text).unwrap();
        let GenSpec::Random(r) = spec else { panic!() };
        assert_eq!((r.b_min, r.b_max, r.bipartite), (1, 1, false));
    }
}
