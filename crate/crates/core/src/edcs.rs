//! Weighted (b-)edge-degree constrained subgraphs.
//!
//! For a subgraph `H` of `G` and capacities `b`, the *load* of an edge
//! `(u, v, w)` is `wdeg_H(u)/b_u + wdeg_H(v)/b_v`. `H` is a
//! `(beta, beta_minus)`-w-b-EDCS when
//!
//! * (i)  every member edge has load `<= beta * w`, and
//! * (ii) every non-member edge has load `>= beta_minus * w`.
//!
//! Loads are compared exactly by cross-multiplying with `b_u * b_v`; the
//! termination argument of the local search relies on the `1/(b_u b_v)`
//! slack, so no floating point is used anywhere on this path.

use std::cmp::Ordering;
use std::collections::VecDeque;
use std::fmt;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::graph::{Capacities, EdgeId, GraphError, MultiGraph, Subgraph, Vertex, Weight, WeightedEdge};

/// Exact rational used for epsilon and lambda.
pub type Rational = Ratio<i64>;

/// Upper end of the theorem-mode parameter search.
pub const THEOREM_BETA_CAP: u64 = 1 << 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EdcsError {
    #[error("epsilon must lie in (0, 1/2), got {0}")]
    EpsilonOutOfRange(Rational),
    #[error("weight cap must be at least 1")]
    ZeroWeightCap,
    #[error("invalid parameters: need beta_minus >= 1 and beta >= beta_minus + 2 (beta = {beta}, beta_minus = {beta_minus})")]
    InvalidParams { beta: u64, beta_minus: u64 },
    #[error("no admissible beta below {cap}")]
    SearchCapExceeded { cap: u64 },
    #[error("graph weight {found} exceeds the parameter weight cap {cap}")]
    WeightAboveCap { found: Weight, cap: Weight },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("cannot parse `{0}` as a decimal or fraction")]
    BadNumber(String),
}

/// Parses `0.25`, `1/4` or `3` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational, EdcsError> {
    let bad = || EdcsError::BadNumber(s.to_owned());
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num: i64 = num.trim().parse().map_err(|_| bad())?;
        let den: i64 = den.trim().parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(num, den));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.len() > 15 || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let int: i64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
    let scale = 10i64.pow(frac.len() as u32);
    let frac_val: i64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
    let sign = if s.starts_with('-') { -1 } else { 1 };
    Ok(Rational::new(int * scale + sign * frac_val, scale))
}

fn ser_ratio<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

/// Parameters of a `(beta, beta_minus)` sparsifier.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EdcsParams {
    pub w_cap: Weight,
    #[serde(serialize_with = "ser_ratio")]
    pub epsilon: Rational,
    #[serde(serialize_with = "ser_ratio")]
    pub lambda: Rational,
    pub beta: u64,
    pub beta_minus: u64,
}

impl EdcsParams {
    /// Explicit parameters; `lambda` is set to `epsilon / (100 W)`.
    pub fn new(w_cap: Weight, epsilon: Rational, beta: u64, beta_minus: u64) -> Result<Self, EdcsError> {
        check_epsilon(epsilon)?;
        if w_cap == 0 {
            return Err(EdcsError::ZeroWeightCap);
        }
        if beta_minus == 0 || beta < beta_minus + 2 {
            return Err(EdcsError::InvalidParams { beta, beta_minus });
        }
        Ok(Self {
            w_cap,
            epsilon,
            lambda: lambda_for(epsilon, w_cap),
            beta,
            beta_minus,
        })
    }

    /// Shorthand for tests and generators that only care about `beta`s.
    pub fn with_betas(w_cap: Weight, beta: u64, beta_minus: u64) -> Result<Self, EdcsError> {
        Self::new(w_cap, Rational::new(1, 10), beta, beta_minus)
    }

    pub fn check(&self) -> Result<(), EdcsError> {
        Self::new(self.w_cap, self.epsilon, self.beta, self.beta_minus).map(|_| ())
    }

    /// Whether both inequalities required by the streaming guarantee hold.
    pub fn satisfies_theorem_conditions(&self) -> bool {
        log_condition(self.beta, self.w_cap, self.lambda)
            && gap_condition(self.beta, self.beta_minus, self.w_cap, self.lambda)
    }
}

fn check_epsilon(epsilon: Rational) -> Result<(), EdcsError> {
    if epsilon <= Rational::zero() || epsilon >= Rational::new(1, 2) {
        return Err(EdcsError::EpsilonOutOfRange(epsilon));
    }
    Ok(())
}

fn lambda_for(epsilon: Rational, w_cap: Weight) -> Rational {
    epsilon / Rational::from_integer(100 * i64::from(w_cap))
}

/// `(beta + 8W) / ln(beta + 8W) >= 2 W^2 / lambda^2`.
pub fn log_condition(beta: u64, w_cap: Weight, lambda: Rational) -> bool {
    let x = beta as f64 + 8.0 * f64::from(w_cap);
    let lam = *lambda.numer() as f64 / *lambda.denom() as f64;
    let w = f64::from(w_cap);
    x / x.ln() >= 2.0 * w * w / (lam * lam)
}

/// `beta_minus - 6W >= (1 - lambda)(beta + 8W)`, exact.
pub fn gap_condition(beta: u64, beta_minus: u64, w_cap: Weight, lambda: Rational) -> bool {
    let p = i128::from(*lambda.numer());
    let q = i128::from(*lambda.denom());
    let w = i128::from(w_cap);
    let lhs = (i128::from(beta_minus) - 6 * w) * q;
    let rhs = (q - p) * (i128::from(beta) + 8 * w);
    lhs >= rhs
}

/// Smallest `beta_minus` satisfying [`gap_condition`] for this `beta`.
fn min_beta_minus(beta: u64, w_cap: Weight, lambda: Rational) -> u64 {
    let p = i128::from(*lambda.numer());
    let q = i128::from(*lambda.denom());
    let w = i128::from(w_cap);
    // ceil((q - p)(beta + 8W) / q) + 6W
    let num = (q - p) * (i128::from(beta) + 8 * w);
    let ceil = (num + q - 1).div_euclid(q);
    (ceil + 6 * w).max(1) as u64
}

/// How [`parameters_for`] chooses `beta`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamMode {
    /// Smallest pair satisfying the guarantee's inequalities.
    Theorem,
    /// `(beta, beta - 2)` for desk-scale experiments.
    Practical { beta: u64 },
}

pub fn parameters_for(epsilon: Rational, w_cap: Weight, mode: ParamMode) -> Result<EdcsParams, EdcsError> {
    check_epsilon(epsilon)?;
    if w_cap == 0 {
        return Err(EdcsError::ZeroWeightCap);
    }
    match mode {
        ParamMode::Practical { beta } => {
            EdcsParams::new(w_cap, epsilon, beta, beta.saturating_sub(2))
        }
        ParamMode::Theorem => {
            let lambda = lambda_for(epsilon, w_cap);
            let ok = |beta: u64| {
                log_condition(beta, w_cap, lambda) && min_beta_minus(beta, w_cap, lambda) + 2 <= beta
            };
            // Both inequalities are monotone in beta, so galloping then
            // bisecting finds the same beta as a linear ascending scan.
            let mut lo = 2u64;
            let mut hi = 3u64;
            while !ok(hi) {
                lo = hi;
                hi = hi.saturating_mul(2);
                if hi > THEOREM_BETA_CAP {
                    if ok(THEOREM_BETA_CAP) {
                        hi = THEOREM_BETA_CAP;
                        break;
                    }
                    return Err(EdcsError::SearchCapExceeded { cap: THEOREM_BETA_CAP });
                }
            }
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if ok(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let beta = hi;
            let beta_minus = min_beta_minus(beta, w_cap, lambda);
            EdcsParams::new(w_cap, epsilon, beta, beta_minus)
        }
    }
}

/// Compares the load of `e` in `h` against `multiplier * w(e)`.
#[inline]
pub fn compare_load(h: &Subgraph<'_>, caps: &Capacities, e: &WeightedEdge, multiplier: u64) -> Ordering {
    let bu = u128::from(caps.get(e.u));
    let bv = u128::from(caps.get(e.v));
    let load = u128::from(h.wdeg(e.u)) * bv + u128::from(h.wdeg(e.v)) * bu;
    load.cmp(&(u128::from(multiplier) * u128::from(e.w) * bu * bv))
}

/// Property (i) fails for member `e`.
#[inline]
pub fn violates_upper(h: &Subgraph<'_>, caps: &Capacities, e: &WeightedEdge, beta: u64) -> bool {
    compare_load(h, caps, e, beta) == Ordering::Greater
}

/// Property (ii) fails for non-member `e` (strictly underloaded).
#[inline]
pub fn violates_lower(h: &Subgraph<'_>, caps: &Capacities, e: &WeightedEdge, beta_minus: u64) -> bool {
    compare_load(h, caps, e, beta_minus) == Ordering::Less
}

/// Edges breaking either EDCS property.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub upper_violations: Vec<EdgeId>,
    pub lower_violations: Vec<EdgeId>,
}

impl ViolationReport {
    pub fn is_clean(&self) -> bool {
        self.upper_violations.is_empty() && self.lower_violations.is_empty()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "clean": self.is_clean(),
            "upper_violations": self.upper_violations,
            "lower_violations": self.lower_violations,
        })
    }
}

/// Checks both properties on every edge of `graph`.
pub fn validate(graph: &MultiGraph, caps: &Capacities, h: &Subgraph<'_>, params: &EdcsParams) -> ViolationReport {
    debug_assert!(std::ptr::eq(graph, h.graph()));
    let mut report = ViolationReport::default();
    for e in graph.edges() {
        if h.contains(e.id) {
            if violates_upper(h, caps, e, params.beta) {
                report.upper_violations.push(e.id);
            }
        } else if violates_lower(h, caps, e, params.beta_minus) {
            report.lower_violations.push(e.id);
        }
    }
    report
}

/// Only property (i): `h` has bounded weighted edge-degree `beta`.
pub fn has_bounded_edge_degree(h: &Subgraph<'_>, caps: &Capacities, beta: u64) -> bool {
    h.edges().all(|e| !violates_upper(h, caps, e, beta))
}

/// `(2 beta - 2) * sum_{e in H} w(e)^2 - sum_v wdeg_H(v)^2 / b_v`, exactly.
pub fn potential(h: &Subgraph<'_>, caps: &Capacities, params: &EdcsParams) -> BigRational {
    let sq: u128 = h.edges().map(|e| u128::from(e.w) * u128::from(e.w)).sum();
    let beta = BigInt::from(params.beta);
    let mut phi = BigRational::from_integer((beta * 2 - 2) * BigInt::from(sq));
    // Group the degree terms by capacity so there are few denominators.
    let mut by_cap: std::collections::BTreeMap<u32, u128> = Default::default();
    for v in 0..h.graph().n() {
        let d = u128::from(h.wdeg(v));
        if d > 0 {
            *by_cap.entry(caps.get(v)).or_default() += d * d;
        }
    }
    for (b, s) in by_cap {
        phi -= BigRational::new(BigInt::from(s), BigInt::from(b));
    }
    phi
}

/// Exact change of the potential when inserting (`insert = true`) or
/// removing `e`, given the current degrees in `h`.
pub fn potential_delta(h: &Subgraph<'_>, caps: &Capacities, e: &WeightedEdge, beta: u64, insert: bool) -> Ratio<i128> {
    let bu = i128::from(caps.get(e.u));
    let bv = i128::from(caps.get(e.v));
    let w = i128::from(e.w);
    let wu = i128::from(h.wdeg(e.u));
    let wv = i128::from(h.wdeg(e.v));
    let sq = (2 * i128::from(beta) - 2) * w * w;
    // numerator over bu * bv
    let num = if insert {
        sq * bu * bv - (2 * wu * w + w * w) * bv - (2 * wv * w + w * w) * bu
    } else {
        -sq * bu * bv + (2 * wu * w - w * w) * bv + (2 * wv * w - w * w) * bu
    };
    Ratio::new(num, bu * bv)
}

/// Result of a local-search construction.
#[derive(Clone, Debug)]
pub struct BuildOutcome<'g> {
    pub subgraph: Subgraph<'g>,
    pub steps: u64,
    pub insertions: u64,
    pub removals: u64,
    /// Smallest potential gain over all steps, `None` when no step ran.
    pub min_gain: Option<Ratio<i128>>,
    /// Steps whose gain fell below [`claimed_gain`].
    pub below_claimed: u64,
    pub phi_initial: BigRational,
    pub phi_final: BigRational,
    /// `deg_H(v) <= beta * b_v + 1` held after every step.
    pub degree_cap_held: bool,
}

impl BuildOutcome<'_> {
    /// `(phi_final - phi_initial) / gain`, rounded down.
    pub fn phi_step_bound(&self, gain: Ratio<i128>) -> u64 {
        let gain = BigRational::new(BigInt::from(*gain.numer()), BigInt::from(*gain.denom()));
        let span = (&self.phi_final - &self.phi_initial) / gain;
        span.floor().to_integer().to_u64().unwrap_or(u64::MAX)
    }
}

/// Per-step gain usually quoted for the local search: 2 with unit
/// capacities, 3/2 otherwise. Not a true lower bound; see [`step_gain_floor`].
pub fn claimed_gain(caps: &Capacities) -> Ratio<i128> {
    if caps.all_ones() {
        Ratio::from_integer(2)
    } else {
        Ratio::new(3, 2)
    }
}

/// Smallest gain a repair of an edge between capacities `bu` and `bv` can
/// have: `2 - 1/bu - 1/bv + 2/(bu bv)`. A violated load misses its bound by
/// at least `1/(bu bv)` and larger weights only add to the gain. Equals 2
/// for `bu = bv = 1` but drops to `1 + 1/bv` when `bu = 1`.
pub fn step_gain_floor(bu: u32, bv: u32) -> Ratio<i128> {
    let (bu, bv) = (i128::from(bu), i128::from(bv));
    Ratio::new(2 * bu * bv - bu - bv + 2, bu * bv)
}

/// Minimum of [`step_gain_floor`] over the edges of `graph` (2 if it has none).
pub fn gain_floor(graph: &MultiGraph, caps: &Capacities) -> Ratio<i128> {
    graph
        .edges()
        .iter()
        .map(|e| step_gain_floor(caps.get(e.u), caps.get(e.v)))
        .min()
        .unwrap_or(Ratio::from_integer(2))
}

/// Upper bound on local-search steps from the final-size argument:
/// `phi <= (2 beta) W^2 * 2 beta |M_G|`, each step gaining at least `gain`.
pub fn matching_step_bound(params: &EdcsParams, matching_size: usize, gain: Ratio<i128>) -> u64 {
    let b = u128::from(params.beta);
    let w = u128::from(params.w_cap);
    let phi_max = 2 * b * w * w * 2 * b * matching_size as u128;
    let (num, den) = (*gain.numer() as u128, *gain.denom() as u128);
    u64::try_from(phi_max * den / num).unwrap_or(u64::MAX)
}

/// Simple-graph step bound `beta^2 W^2 n` (potential at most `2 beta^2 W^2 n`, gain 2).
pub fn simple_step_bound(params: &EdcsParams, n: usize) -> u64 {
    let b = u128::from(params.beta);
    let w = u128::from(params.w_cap);
    u64::try_from(b * b * w * w * n as u128).unwrap_or(u64::MAX)
}

/// Local search on a simple weighted graph (all capacities one).
pub fn build_w_edcs<'g>(graph: &'g MultiGraph, params: &EdcsParams) -> Result<BuildOutcome<'g>, EdcsError> {
    if let Some(((u, v), _)) = graph.pair_multiplicities().into_iter().find(|(_, c)| *c > 1) {
        return Err(GraphError::NotSimple(u, v).into());
    }
    let caps = Capacities::ones(graph.n());
    build_wb_edcs(graph, &caps, params)
}

/// Local search for a w-b-EDCS starting from the empty subgraph.
pub fn build_wb_edcs<'g>(graph: &'g MultiGraph, caps: &Capacities, params: &EdcsParams) -> Result<BuildOutcome<'g>, EdcsError> {
    build_wb_edcs_from(graph, caps, params, Subgraph::empty(graph))
}

/// Local search started from `init`. Property (i) repairs always run before
/// property (ii) repairs; each queue is FIFO and batches enter in id order.
pub fn build_wb_edcs_from<'g>(
    graph: &'g MultiGraph,
    caps: &Capacities,
    params: &EdcsParams,
    init: Subgraph<'g>,
) -> Result<BuildOutcome<'g>, EdcsError> {
    params.check()?;
    caps.check_for(graph)?;
    graph.check_multiplicity(caps)?;
    let found = graph.max_weight();
    if found > params.w_cap {
        return Err(EdcsError::WeightAboveCap { found, cap: params.w_cap });
    }

    let m = graph.m();
    let mut h = init;
    let phi_initial = potential(&h, caps, params);
    let mut upper_q: VecDeque<EdgeId> = VecDeque::new();
    let mut lower_q: VecDeque<EdgeId> = VecDeque::new();
    let mut in_upper = vec![false; m];
    let mut in_lower = vec![false; m];
    for e in graph.edges() {
        if h.contains(e.id) {
            upper_q.push_back(e.id);
            in_upper[e.id.index()] = true;
        } else {
            lower_q.push_back(e.id);
            in_lower[e.id.index()] = true;
        }
    }

    let mut steps = 0u64;
    let mut insertions = 0u64;
    let mut removals = 0u64;
    let mut min_gain: Option<Ratio<i128>> = None;
    let mut degree_cap_held = true;
    let claimed = claimed_gain(caps);
    let mut below_claimed = 0u64;
    let mut batch: Vec<EdgeId> = Vec::new();

    loop {
        if let Some(id) = upper_q.pop_front() {
            in_upper[id.index()] = false;
            let e = graph.edge(id);
            if !h.contains(id) || !violates_upper(&h, caps, e, params.beta) {
                continue;
            }
            let gain = potential_delta(&h, caps, e, params.beta, false);
            debug_assert!(gain >= step_gain_floor(caps.get(e.u), caps.get(e.v)), "removal gain {gain}");
            below_claimed += u64::from(gain < claimed);
            min_gain = Some(min_gain.map_or(gain, |g| g.min(gain)));
            h.remove(id);
            steps += 1;
            removals += 1;
            // Degrees at u and v dropped: non-members there may now be underloaded.
            batch.clear();
            merge_sorted(graph.incident(e.u), graph.incident(e.v), &mut batch);
            for &f in &batch {
                if !h.contains(f) && !in_lower[f.index()] {
                    in_lower[f.index()] = true;
                    lower_q.push_back(f);
                }
            }
            continue;
        }
        if let Some(id) = lower_q.pop_front() {
            in_lower[id.index()] = false;
            let e = graph.edge(id);
            if h.contains(id) || !violates_lower(&h, caps, e, params.beta_minus) {
                continue;
            }
            let gain = potential_delta(&h, caps, e, params.beta, true);
            debug_assert!(gain >= step_gain_floor(caps.get(e.u), caps.get(e.v)), "insertion gain {gain}");
            below_claimed += u64::from(gain < claimed);
            min_gain = Some(min_gain.map_or(gain, |g| g.min(gain)));
            h.insert(id);
            steps += 1;
            insertions += 1;
            for x in [e.u, e.v] {
                if u64::from(h.degree(x)) > params.beta * u64::from(caps.get(x)) + 1 {
                    degree_cap_held = false;
                }
            }
            // Degrees at u and v grew: members there may now be overloaded.
            batch.clear();
            batch.extend_from_slice(h.incident_members(e.u));
            batch.extend_from_slice(h.incident_members(e.v));
            batch.sort_unstable();
            batch.dedup();
            for &f in &batch {
                if !in_upper[f.index()] {
                    in_upper[f.index()] = true;
                    upper_q.push_back(f);
                }
            }
            continue;
        }
        break;
    }

    let phi_final = potential(&h, caps, params);
    Ok(BuildOutcome {
        subgraph: h,
        steps,
        insertions,
        removals,
        min_gain,
        below_claimed,
        phi_initial,
        phi_final,
        degree_cap_held,
    })
}

fn merge_sorted(a: &[EdgeId], b: &[EdgeId], out: &mut Vec<EdgeId>) {
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) if x <= y => {
                i += 1;
                if x == y {
                    j += 1;
                }
                x
            }
            (Some(_), Some(&y)) => {
                j += 1;
                y
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (None, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        out.push(next);
    }
}

/// Maximum over vertices of `deg_H(v) - beta * b_v` (non-positive when the
/// degree bound holds everywhere).
pub fn degree_excess(h: &Subgraph<'_>, caps: &Capacities, beta: u64) -> i64 {
    (0..h.graph().n())
        .map(|v: Vertex| i64::from(h.degree(v)) - (beta * u64::from(caps.get(v))) as i64)
        .max()
        .unwrap_or(0)
}

impl fmt::Display for EdcsParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "beta={} beta_minus={} W={} epsilon={}",
            self.beta, self.beta_minus, self.w_cap, self.epsilon
        )
    }
}
