mod common;

use common::*;
use num_rational::Ratio;
use proptest::prelude::*;

use wedcs::edcs::{self, build_wb_edcs, gain_floor, potential, step_gain_floor, EdcsParams, Rational};
use wedcs::graph::{relevant_subgraph, Capacities, EdgeId, MultiGraph, Subgraph};
use wedcs::matching::{
    branch_and_bound, check_distribution, distribute_edges, exact_on, max_weight_b_matching_exact,
    min_w_vertex_cover_bipartite, vertex_split, BMatching, DistItem,
};
use wedcs::streaming::{is_underfull, make_stream, run_algorithm1, run_algorithm3, Fallback};

const BUDGET: u64 = 5_000_000;

fn small_graph() -> impl Strategy<Value = (MultiGraph, Capacities)> {
    (2usize..7, 1u32..4, 1u32..4, any::<u64>()).prop_flat_map(|(n, w, b, seed)| {
        (0usize..9).prop_map(move |m| random_instance(seed, n, m, w, b, false))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn subgraph_cache_survives_random_edits(seed in any::<u64>(), script in prop::collection::vec((any::<bool>(), 0usize..40), 0..80)) {
        let (g, _) = random_instance(seed, 10, 40, 4, 3, false);
        let mut h = Subgraph::empty(&g);
        for (insert, raw) in script {
            if g.m() == 0 { break; }
            let id = EdgeId((raw % g.m()) as u32);
            if insert { h.insert(id); } else { h.remove(id); }
            prop_assert!(h.cache_is_coherent());
        }
        let wdeg = recount_wdeg(&g, &h.edge_ids());
        for v in 0..g.n() {
            prop_assert_eq!(h.weighted_degree(v).unwrap(), wdeg[v]);
        }
    }

    #[test]
    fn relevant_projection_is_idempotent_and_keeps_the_optimum(seed in any::<u64>(), n in 2usize..6) {
        let spec = wedcs::generators::RandomSpec {
            n, m: 10, w: 4, b_min: 1, b_max: 3, seed, bipartite: false, raw_multiplicity: true,
        };
        let (g, caps) = wedcs::generators::gen_random(&spec).unwrap();
        let once = relevant_subgraph(&g, &caps).edge_ids();
        let twice = wedcs::graph::relevant_edges(&g, once.clone(), &caps).edge_ids();
        prop_assert_eq!(&once, &twice);
        let all = g.edge_ids();
        prop_assert_eq!(brute_force_matching(&g, &once, &caps), brute_force_matching(&g, &all, &caps));
    }

    #[test]
    fn branch_and_bound_matches_enumeration((g, caps) in small_graph()) {
        let ids = g.edge_ids();
        let bb = branch_and_bound(&g, &ids, &caps, BUDGET).unwrap();
        prop_assert!(bb.is_valid(&g, &caps));
        prop_assert_eq!(bb.weight, brute_force_matching(&g, &ids, &caps));
        let exact = max_weight_b_matching_exact(&g, &caps, BUDGET).unwrap();
        prop_assert_eq!(exact.weight, bb.weight);
    }

    #[test]
    fn flow_oracle_matches_enumeration(seed in any::<u64>(), n in 2usize..9, m in 0usize..14, b in 1u32..4) {
        let (g, caps) = random_instance(seed, n, m, 4, b, true);
        let exact = max_weight_b_matching_exact(&g, &caps, 1).unwrap();
        prop_assert!(exact.is_valid(&g, &caps));
        prop_assert_eq!(exact.weight, brute_force_matching(&g, &g.edge_ids(), &caps));
    }

    #[test]
    fn cover_equals_matching_on_bipartite_graphs(seed in any::<u64>(), n in 2usize..7, m in 0usize..10) {
        let (g, _) = random_instance(seed, n, m, 3, 1, true);
        let cover = min_w_vertex_cover_bipartite(&g, BUDGET).unwrap();
        prop_assert!(cover.covers(&g));
        prop_assert_eq!(cover.weight(), brute_force_cover(&g));
        prop_assert_eq!(cover.weight(), brute_force_matching(&g, &g.edge_ids(), &Capacities::ones(n)));
    }

    #[test]
    fn greedy_is_a_half_approximation((g, caps) in small_graph()) {
        let greedy = wedcs::matching::max_weight_b_matching_greedy(&g, &caps);
        prop_assert!(greedy.is_valid(&g, &caps));
        prop_assert!(2 * greedy.weight >= brute_force_matching(&g, &g.edge_ids(), &caps));
    }
}

/// Random distribution input: groups listed matched first, by weight.
fn dist_input() -> impl Strategy<Value = (Vec<Vec<DistItem>>, u32, u32)> {
    (1u32..6, 1u32..5).prop_flat_map(|(b, w)| {
        let group = prop::collection::vec((1..=w, any::<bool>(), any::<bool>()), 0..=b as usize);
        (prop::collection::vec(group, 0..6), Just(b), Just(w))
    })
    .prop_map(|(raw, b, w)| {
        let mut matched_left = b as usize;
        let groups = raw
            .into_iter()
            .map(|items| {
                let mut items: Vec<DistItem> = items
                    .into_iter()
                    .map(|(weight, m, h)| DistItem { weight, matched: false, in_h: h || !m })
                    .collect();
                items.sort_by_key(|x| std::cmp::Reverse(x.weight));
                // the heaviest few are the matched ones, as for an optimal matching
                let want = items.len().min(matched_left).min(1 + items.len() / 2);
                for it in items.iter_mut().take(want) {
                    it.matched = true;
                }
                matched_left -= want;
                items.iter_mut().filter(|x| !x.matched).for_each(|x| x.in_h = true);
                items
            })
            .collect();
        (groups, b, w)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn distribution_satisfies_all_three_properties((groups, b, w) in dist_input()) {
        let dist = distribute_edges(&groups, b).unwrap();
        let check = check_distribution(&groups, b, w, &dist);
        prop_assert!(check.all_hold(), "{:?}", check);
        prop_assert!(check.spread <= 2 * u64::from(w));
        // independent recount of the window
        let wdeg_h: i64 = groups.iter().flatten().filter(|x| x.in_h).map(|x| i64::from(x.weight)).sum();
        for i in 0..b as usize {
            let x = dist.bucket_weight(&groups, i) as i64 * i64::from(b);
            prop_assert!(x >= wdeg_h - 2 * i64::from(w) * i64::from(b));
            prop_assert!(x <= wdeg_h + 3 * i64::from(w) * i64::from(b));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn builder_output_is_a_valid_sparsifier(seed in any::<u64>(), n in 2usize..30, dens in 1usize..5, w in 1u32..5, b in 1u32..5, beta_idx in 0usize..3) {
        let beta = [6u64, 10, 14][beta_idx];
        let (g, caps) = random_instance(seed, n, n * dens, w, b, seed % 2 == 0);
        let params = EdcsParams::with_betas(w, beta, beta - 2).unwrap();
        let out = build_wb_edcs(&g, &caps, &params).unwrap();
        let ids = out.subgraph.edge_ids();
        prop_assert!(is_edcs(&g, &caps, &ids, beta, beta - 2));
        prop_assert!(edcs::validate(&g, &caps, &out.subgraph, &params).is_clean());
        let gain = gain_floor(&g, &caps);
        if let Some(min) = out.min_gain {
            prop_assert!(min >= gain);
        }
        if caps.all_ones() {
            prop_assert_eq!(out.below_claimed, 0);
        }
        prop_assert!(out.steps <= out.phi_step_bound(gain));
        prop_assert!(out.degree_cap_held);
        prop_assert_eq!(potential(&out.subgraph, &caps, &params), out.phi_final.clone());
        for v in 0..g.n() {
            prop_assert!(u64::from(out.subgraph.degree(v)) <= beta * u64::from(caps.get(v)));
        }
        let m_g = exact_on(&g, &g.edge_ids(), &caps, BUDGET);
        if let Ok(m_g) = m_g {
            prop_assert!(ids.len() as u64 <= 2 * beta * m_g.len() as u64);
        }
    }

    #[test]
    fn unit_capacity_builder_gains_two_per_step(seed in any::<u64>(), n in 2usize..25) {
        let (g, caps) = random_instance(seed, n, 3 * n, 3, 1, false);
        let params = EdcsParams::with_betas(3, 6, 4).unwrap();
        let out = edcs::build_w_edcs(&g, &params).unwrap();
        prop_assert!(out.min_gain.is_none_or(|g| g >= Ratio::from_integer(2)));
        prop_assert!(is_edcs(&g, &caps, &out.subgraph.edge_ids(), 6, 4));
        for v in 0..n {
            prop_assert!(u64::from(out.subgraph.degree(v)) <= 6);
        }
    }

    #[test]
    fn vertex_split_is_sound(seed in any::<u64>(), n in 2usize..7, m in 1usize..10, b in 1u32..4, w in 1u32..4) {
        let (g, caps) = random_instance(seed, n, m, w, b, false);
        let params = EdcsParams::with_betas(w, 6, 4).unwrap();
        let h = build_wb_edcs(&g, &caps, &params).unwrap().subgraph;
        let opt = max_weight_b_matching_exact(&g, &caps, BUDGET).unwrap();
        let split = vertex_split(&g, &caps, &h, &opt).unwrap();
        prop_assert!(split.graph.is_simple());
        let ones = Capacities::ones(split.graph.n());
        // M is a simple matching of G'
        prop_assert!(BMatching::from_ids(&split.graph, split.m_edges.clone()).is_valid(&split.graph, &ones));
        let m_g_split = exact_on(&split.graph, &split.graph.edge_ids(), &ones, BUDGET).unwrap();
        prop_assert_eq!(m_g_split.weight, opt.weight);
        // any simple matching of H' lifts to a b-matching of H of equal weight
        let m_h_split = exact_on(&split.graph, &split.h_edges, &ones, BUDGET).unwrap();
        let lifted = BMatching::from_ids(&g, split.lift(&m_h_split.members));
        prop_assert!(lifted.is_valid(&g, &caps));
        prop_assert!(lifted.members.iter().all(|&id| h.contains(id)));
        prop_assert_eq!(lifted.weight, m_h_split.weight);
        let m_h = exact_on(&g, &h.edge_ids(), &caps, BUDGET).unwrap();
        prop_assert!(m_h_split.weight <= m_h.weight);
        // each copy carries about a b_v-th of the H-degree
        let d = split.h_weighted_degrees();
        for (c, &dc) in d.iter().enumerate() {
            let v = split.copy_of[c];
            let b = i64::from(caps.get(v));
            let x = b * dc as i64 - h.wdeg(v) as i64;
            prop_assert!(x >= -2 * i64::from(w) * b && x <= 3 * i64::from(w) * b, "copy {} of {}: {}", c, v, x);
        }
    }
}

fn live_params() -> EdcsParams {
    EdcsParams::new(1, Rational::new(2, 5), 4, 2).unwrap()
}

fn stream_instance(seed: u64) -> (MultiGraph, Capacities) {
    random_instance(seed, 200, 2000, 1, 2, true)
}

#[test]
fn gain_floor_can_sit_below_three_halves() {
    // b = 1 against b = 3 with unit weight: a removal that overshoots by 1/3.
    assert_eq!(step_gain_floor(1, 3), Ratio::new(4, 3));
    assert_eq!(step_gain_floor(1, 1), Ratio::from_integer(2));
    assert_eq!(step_gain_floor(2, 2), Ratio::new(3, 2));
    // A seeded instance on which the builder hits such a step.
    let (g, caps) = random_instance(671_517_120_760_598_402, 17, 17, 1, 4, true);
    let params = EdcsParams::with_betas(1, 6, 4).unwrap();
    let out = build_wb_edcs(&g, &caps, &params).unwrap();
    assert!(edcs::validate(&g, &caps, &out.subgraph, &params).is_clean());
    assert!(out.min_gain.unwrap() >= gain_floor(&g, &caps));
    assert!(out.min_gain.unwrap() < Ratio::new(3, 2), "{:?}", out.min_gain);
}

#[test]
fn stream_runs_are_deterministic() {
    let (g, caps) = stream_instance(1);
    let p = live_params();
    let a = run_algorithm1(make_stream(&g, 9), &caps, &p, BUDGET).unwrap();
    let b = run_algorithm1(make_stream(&g, 9), &caps, &p, BUDGET).unwrap();
    assert_eq!(a.h.edge_ids(), b.h.edge_ids());
    assert_eq!(a.x, b.x);
    assert_eq!(a.stats, b.stats);
}

#[test]
fn phase_two_collects_exactly_the_underfull_edges() {
    let p = live_params();
    for seed in 0..6 {
        let (g, caps) = stream_instance(seed);
        let stream = make_stream(&g, seed);
        let order = stream.order().to_vec();
        let out = run_algorithm1(stream, &caps, &p, BUDGET).unwrap();
        assert_eq!(out.stats.fallback_used, Fallback::None, "seed {seed}");
        let late = &order[out.stats.phase1_edges_consumed..];
        let expected: Vec<EdgeId> = late.iter().copied().filter(|&id| is_underfull(&out.h, &caps, g.edge(id), &p)).collect();
        assert_eq!(out.x, expected);
        // with rationals, independently of the library
        let wdeg = recount_wdeg(&g, &out.h.edge_ids());
        for &id in &out.x {
            assert!(load(&g, &caps, &wdeg, id) < Ratio::from_integer(2 * i128::from(g.edge(id).w)));
        }
        assert!(has_bounded_edge_degree(&g, &caps, &out.h.edge_ids(), p.beta));
        assert!(out.stats.peak_stored_edges >= out.h.len() + out.x.len());
        let eps_m = (2 * g.m()).div_ceil(5);
        assert!(out.stats.phase1_edges_consumed <= eps_m);
    }
}

#[test]
fn sandwich_property_on_the_optimal_matching() {
    let p = live_params();
    for seed in 0..6 {
        let (g, caps) = stream_instance(seed + 100);
        let out = run_algorithm1(make_stream(&g, seed), &caps, &p, BUDGET).unwrap();
        let opt = max_weight_b_matching_exact(&g, &caps, BUDGET).unwrap();
        let in_x: std::collections::HashSet<EdgeId> = out.x.iter().copied().collect();
        let mut union = out.h.edge_ids();
        union.extend(opt.members.iter().copied().filter(|id| in_x.contains(id) && !out.h.contains(*id)));
        let base = recount_wdeg(&g, &out.h.edge_ids());
        let with = recount_wdeg(&g, &union);
        for v in 0..g.n() {
            assert!(base[v] <= with[v]);
            assert!(with[v] <= base[v] + u64::from(caps.get(v)) * u64::from(p.w_cap));
        }
    }
}

#[test]
fn variant_three_equals_variant_one_without_parallel_edges() {
    let p = live_params();
    for seed in 0..8 {
        let (g, _) = random_instance(seed, 200, 2000, 1, 1, true);
        let caps = Capacities::ones(g.n());
        let a = run_algorithm1(make_stream(&g, seed), &caps, &p, BUDGET).unwrap();
        let b = run_algorithm3(make_stream(&g, seed), &caps, &p, BUDGET).unwrap();
        assert_eq!(a.h.edge_ids(), b.h.edge_ids());
        assert_eq!(a.x, b.x);
        assert_eq!(a.matching, b.matching);
        assert_eq!(a.stats, b.stats);
    }
}

#[test]
fn combination_bound_at_theorem_scale() {
    // With theorem-scale parameters every edge outside H is underfull, so
    // H together with X is the whole graph.
    let eps = Rational::new(2, 5);
    let p = edcs::parameters_for(eps, 2, edcs::ParamMode::Theorem).unwrap();
    for seed in 0..100 {
        let (g, caps) = random_instance(seed, 8, 12, 2, 2, false);
        let h: Vec<EdgeId> = g.edge_ids().into_iter().filter(|id| id.0 % 2 == 0).collect();
        assert!(has_bounded_edge_degree(&g, &caps, &h, p.beta));
        let hs = Subgraph::from_edges(&g, h.clone()).unwrap();
        let mut union = h.clone();
        union.extend(g.edge_ids().into_iter().filter(|&id| !hs.contains(id) && is_underfull(&hs, &caps, g.edge(id), &p)));
        let lhs = brute_force_matching(&g, &union, &caps) as f64 * (2.0 - 0.25 + 0.4);
        assert!(lhs >= brute_force_matching(&g, &g.edge_ids(), &caps) as f64);
    }
}

#[test]
fn combination_bound_at_practical_scale() {
    let p = EdcsParams::new(3, Rational::new(1, 10), 12, 10).unwrap();
    let factor = 2.0 - 1.0 / 6.0 + 0.1;
    for seed in 0..100 {
        let (g, caps) = random_instance(seed, 30, 200, 3, 3, true);
        // H of bounded edge-degree from a one-pass insertion over a random order
        let mut h = Subgraph::empty(&g);
        for id in make_stream(&g, seed).order().iter().take(100) {
            let e = g.edge(*id);
            if is_underfull(&h, &caps, e, &p) {
                h.insert(*id);
                for f in h.edge_ids() {
                    if edcs::violates_upper(&h, &caps, g.edge(f), p.beta) {
                        h.remove(f);
                    }
                }
            }
        }
        assert!(has_bounded_edge_degree(&g, &caps, &h.edge_ids(), p.beta));
        let mut union = h.edge_ids();
        union.extend(g.edge_ids().into_iter().filter(|&id| !h.contains(id) && is_underfull(&h, &caps, g.edge(id), &p)));
        let m_union = exact_on(&g, &union, &caps, BUDGET).unwrap().weight as f64;
        let m_g = exact_on(&g, &g.edge_ids(), &caps, BUDGET).unwrap().weight as f64;
        assert!(factor * m_union >= m_g, "seed {seed}: {m_union} vs {m_g}");
    }
}
