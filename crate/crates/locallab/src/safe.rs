//! Maximally safe neighborhoods at desk scale: exhaustive enumeration of
//! small path/cycle classes, the safety decision procedure for a computable
//! non-decreasing round bound, and the finite search for a view-to-output
//! mapping that solves a problem on every enumerated instance.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::sync::{Arc, Mutex};

use itertools::Itertools;
use thiserror::Error;

use crate::label::Label;
use crate::lcl::{verify_solution, LclProblem, OutputLabeling, Rule};
use crate::network::{
    canonical_encode, isomorphic, neighborhood, EdgeSpec, Network, NodeHandle, NodeSpec,
    RootedNeighborhood,
};

// ---------------------------------------------------------------------------
// Graph classes
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ClassKind {
    Paths,
    Cycles,
}

/// An exhaustively enumerable family of small networks: every id
/// permutation, port ordering, and node-input assignment of each shape up
/// to `n_cap` nodes, in a fixed canonical order.
#[derive(Clone)]
pub struct GraphClass {
    pub name: String,
    /// Degree cap of the class (2 for paths and cycles).
    pub delta: u32,
    /// Node input alphabet; half-edge inputs are uniformly ⊥.
    pub inputs: Vec<Label>,
    pub n_cap: u32,
    kind: ClassKind,
    /// Enumeration cache: repeated safety queries over the same class walk
    /// the member list many times, and enumeration is deterministic.
    cache: Arc<Mutex<HashMap<u32, Arc<Vec<Network>>>>>,
}

impl GraphClass {
    fn new(name: &str, kind: ClassKind, n_cap: u32, inputs: Vec<Label>) -> Self {
        GraphClass {
            name: name.into(),
            delta: 2,
            inputs,
            n_cap,
            kind,
            cache: Arc::new(Mutex::new(HashMap::new())),
        }
    }

    pub fn paths(n_cap: u32, inputs: Vec<Label>) -> Self {
        GraphClass::new("paths", ClassKind::Paths, n_cap, inputs)
    }

    pub fn cycles(n_cap: u32, inputs: Vec<Label>) -> Self {
        GraphClass::new("cycles", ClassKind::Cycles, n_cap, inputs)
    }

    /// Cached members with exactly `n` nodes, in canonical order.
    pub fn members(&self, n: u32) -> Arc<Vec<Network>> {
        let mut cache = self.cache.lock().expect("cache lock");
        cache
            .entry(n)
            .or_insert_with(|| Arc::new(self.enumerate_n(n)))
            .clone()
    }

    fn smallest_n(&self) -> u32 {
        match self.kind {
            ClassKind::Paths => 1,
            ClassKind::Cycles => 3, // smaller rings need parallel edges
        }
    }

    /// All members with exactly `n` nodes, in canonical order: id
    /// permutations, then port orderings, then input assignments.
    pub fn enumerate_n(&self, n: u32) -> Vec<Network> {
        if n < self.smallest_n() || n > self.n_cap {
            return Vec::new();
        }
        let n = n as usize;
        let mut out = Vec::new();
        for ids in (1..=n as u64).permutations(n) {
            for ports in self.port_choices(n) {
                for inputs in (0..n)
                    .map(|_| self.inputs.iter())
                    .multi_cartesian_product()
                {
                    let nodes = (0..n)
                        .map(|i| NodeSpec { id: ids[i], input: inputs[i].clone() })
                        .collect();
                    let edges = self.edges(n, &ids, &ports);
                    out.push(Network::build(nodes, edges).expect("valid enumerated shape"));
                }
            }
        }
        out
    }

    /// Every member of the class whose size passes the filter.
    pub fn enumerate_where(&self, mut allow: impl FnMut(u32) -> bool) -> Vec<Network> {
        (self.smallest_n()..=self.n_cap)
            .filter(|&n| allow(n))
            .flat_map(|n| self.members(n).iter().cloned().collect::<Vec<_>>())
            .collect()
    }

    pub fn enumerate(&self) -> Vec<Network> {
        self.enumerate_where(|_| true)
    }

    /// Per-network port orderings: one bit per degree-2 node choosing which
    /// incident edge gets port 1.
    fn port_choices(&self, n: usize) -> Vec<Vec<bool>> {
        let free = match self.kind {
            ClassKind::Paths => n.saturating_sub(2),
            ClassKind::Cycles => n,
        };
        (0..1u32 << free)
            .map(|mask| (0..free).map(|i| mask >> i & 1 == 1).collect())
            .collect()
    }

    fn edges(&self, n: usize, ids: &[u64], ports: &[bool]) -> Vec<EdgeSpec> {
        // Port pair of a degree-2 node: (toward predecessor, toward
        // successor); a set bit swaps the default (1, 2).
        let pair = |flip: bool| if flip { (2, 1) } else { (1, 2) };
        match self.kind {
            ClassKind::Paths => (0..n.saturating_sub(1))
                .map(|i| {
                    let u_port = if i == 0 { 1 } else { pair(ports[i - 1]).1 };
                    let v_port = if i + 1 == n - 1 { 1 } else { pair(ports[i]).0 };
                    edge(ids[i], u_port, ids[i + 1], v_port)
                })
                .collect(),
            ClassKind::Cycles => (0..n)
                .map(|i| {
                    let j = (i + 1) % n;
                    edge(ids[i], pair(ports[i]).1, ids[j], pair(ports[j]).0)
                })
                .collect(),
        }
    }
}

fn edge(u_id: u64, u_port: u32, v_id: u64, v_port: u32) -> EdgeSpec {
    EdgeSpec {
        u_id,
        u_port,
        v_id,
        v_port,
        u_halfedge_input: Label::bot(),
        v_halfedge_input: Label::bot(),
    }
}

// ---------------------------------------------------------------------------
// Round bounds
// ---------------------------------------------------------------------------

/// A computable, non-decreasing round bound `T(n)`, optionally declared
/// eventually constant: `T(n) = C` for all `n ≥ N0`. The tail is data the
/// caller supplies; it cannot be detected from a black-box function.
#[derive(Clone)]
pub struct ComplexityBound {
    pub name: String,
    f: Arc<dyn Fn(u64) -> u64 + Send + Sync>,
    pub tail: Option<(u64, u64)>,
}

impl ComplexityBound {
    pub fn new(name: &str, f: impl Fn(u64) -> u64 + Send + Sync + 'static) -> Self {
        ComplexityBound { name: name.into(), f: Arc::new(f), tail: None }
    }

    /// An eventually constant bound: `T(n) = c` for `n ≥ n0`.
    pub fn with_tail(
        name: &str,
        f: impl Fn(u64) -> u64 + Send + Sync + 'static,
        c: u64,
        n0: u64,
    ) -> Self {
        ComplexityBound { name: name.into(), f: Arc::new(f), tail: Some((c, n0)) }
    }

    pub fn at(&self, n: u64) -> u64 {
        (self.f)(n)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SafeError {
    #[error(
        "the bound never reaches radius {t}; declare an eventually-constant tail to decide safety"
    )]
    BoundNotExceeded { t: u32 },
    #[error("no output is mapped for the maximally safe view of node {id}")]
    UnmappedView { id: u64 },
}

// ---------------------------------------------------------------------------
// Safety decision procedure
// ---------------------------------------------------------------------------

/// How far the threshold scan looks for an `n` with `T(n) ≥ t` before
/// giving up on an undeclared tail.
const SCAN_LIMIT: u64 = 1 << 20;

/// Is radius `t = x.radius` safe: does no member network `G′` of the class
/// host a node whose radius-`t` view is isomorphic to `x` while
/// `t > T(|G′|)`? Decided by bounding the sizes that could violate — the
/// bound is non-decreasing, so once `T(n) ≥ t` no larger member can — and
/// exhaustively searching the finitely many candidates below.
pub fn is_t_safe(
    x: &RootedNeighborhood,
    bound: &ComplexityBound,
    cls: &GraphClass,
) -> Result<bool, SafeError> {
    let t = x.radius;
    if t == 0 {
        return Ok(true); // t > T(n′) ≥ 0 is impossible
    }
    let threshold_known = match bound.tail {
        Some((c, _)) => {
            if u64::from(t) <= c {
                // Sizes at and beyond the tail satisfy T(n) = C ≥ t; only
                // the finitely many below can violate, and the candidate
                // filter finds them.
                true
            } else {
                // Every tail size violates the bound side; the class is
                // finite, so the exhaustive search below still decides.
                true
            }
        }
        None => (1..=SCAN_LIMIT).any(|n| bound.at(n) >= u64::from(t)),
    };
    if !threshold_known {
        return Err(SafeError::BoundNotExceeded { t });
    }
    for n in cls.smallest_n()..=cls.n_cap {
        if bound.at(u64::from(n)) >= u64::from(t) {
            continue;
        }
        for host in cls.members(n).iter() {
            for v in host.handles() {
                if root_mismatch(host, v, x) {
                    continue;
                }
                let view = neighborhood(host, v, t).expect("valid handle");
                if isomorphic(&view, x) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Cheap necessary condition for `neighborhood(host, v, t ≥ 1)` to be
/// isomorphic to `x`: the root's id, input, and full port table (far ids,
/// far ports, edge inputs) must already agree, since isomorphism preserves
/// all of them.
fn root_mismatch(host: &Network, v: NodeHandle, x: &RootedNeighborhood) -> bool {
    let a = host.node(v);
    let b = x.fragment.node(x.root);
    if a.id != b.id || a.input != b.input || a.host_degree != b.host_degree {
        return true;
    }
    (1..=a.host_degree).any(|port| match (a.port(port), b.port(port)) {
        (Some(ha), Some(hb)) => {
            ha.neighbor_port != hb.neighbor_port
                || ha.input != hb.input
                || host.node(ha.neighbor).id != x.fragment.node(hb.neighbor).id
        }
        (None, None) => false,
        _ => true,
    })
}

/// One `view=… radius=… safe=…` report line.
pub fn safety_report_line(x: &RootedNeighborhood, safe: bool) -> String {
    format!("view={} radius={} safe={}", canonical_encode(x), x.radius, safe)
}

/// The largest safe radius at `v`: its radius-`t` view is safe but the
/// radius-`t+1` view is not. The caller's network must belong to the class,
/// which guarantees the maximum exists.
pub fn maximally_t_safe_radius(
    net: &Network,
    v: NodeHandle,
    bound: &ComplexityBound,
    cls: &GraphClass,
) -> Result<u32, SafeError> {
    let cap = bound.at(net.len() as u64).max(bound.at(u64::from(cls.n_cap))) as u32
        + net.len() as u32
        + 2;
    let mut t = 0;
    loop {
        let next = neighborhood(net, v, t + 1).expect("valid handle");
        if !is_t_safe(&next, bound, cls)? {
            return Ok(t);
        }
        t += 1;
        assert!(
            t <= cap,
            "no unsafe radius found by t = {t}; is the network a member of the class?",
        );
    }
}

// ---------------------------------------------------------------------------
// Mapping search
// ---------------------------------------------------------------------------

/// A mapping from canonical encodings of maximally safe views to node
/// outputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SafeMapping {
    pub map: BTreeMap<String, Label>,
}

impl SafeMapping {
    /// One `<view encoding> -> <output label>` line per entry.
    pub fn report(&self) -> String {
        let mut text = String::new();
        for (view, out) in &self.map {
            let _ = writeln!(text, "{view} -> {out}");
        }
        text
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MappingOutcome {
    Found(SafeMapping),
    NotFound,
}

/// Memoizing wrapper so repeated views share one safety decision.
struct SafetyCache<'a> {
    bound: &'a ComplexityBound,
    cls: &'a GraphClass,
    safe: HashMap<(String, u32), bool>,
}

impl<'a> SafetyCache<'a> {
    fn new(bound: &'a ComplexityBound, cls: &'a GraphClass) -> Self {
        SafetyCache { bound, cls, safe: HashMap::new() }
    }

    fn is_safe(&mut self, x: &RootedNeighborhood) -> Result<bool, SafeError> {
        let key = (canonical_encode(x), x.radius);
        if let Some(&v) = self.safe.get(&key) {
            return Ok(v);
        }
        let v = is_t_safe(x, self.bound, self.cls)?;
        self.safe.insert(key, v);
        Ok(v)
    }

    fn max_safe_view(
        &mut self,
        net: &Network,
        v: NodeHandle,
    ) -> Result<RootedNeighborhood, SafeError> {
        let cap = self.bound.at(net.len() as u64).max(self.bound.at(u64::from(self.cls.n_cap)))
            as u32
            + net.len() as u32
            + 2;
        let mut t = 0;
        loop {
            let next = neighborhood(net, v, t + 1).expect("valid handle");
            if !self.is_safe(&next)? {
                return Ok(neighborhood(net, v, t).expect("valid handle"));
            }
            t += 1;
            assert!(t <= cap, "no unsafe radius found by t = {t}");
        }
    }
}

/// Search for a view-to-output mapping that solves `p` on every class
/// member with at most `n_bound` nodes (restricted, when a promise bound
/// `f` is given, to sizes with `f(n) ≥ n_bound`). Views are keyed by the
/// canonical encoding of each node's maximally safe neighborhood; outputs
/// are tried in alphabet order with backtracking, checking an instance as
/// soon as all of its views are assigned. Returns the first full mapping in
/// that order, or `NotFound` — confirmed exhaustive at this scale.
pub fn search_mapping(
    p: &LclProblem,
    bound: &ComplexityBound,
    n_bound: u32,
    f_promise: Option<&ComplexityBound>,
    cls: &GraphClass,
) -> Result<MappingOutcome, SafeError> {
    let instances: Vec<Network> = cls.enumerate_where(|n| {
        n <= n_bound && f_promise.is_none_or(|f| f.at(u64::from(n)) >= u64::from(n_bound))
    });
    let mut cache = SafetyCache::new(bound, cls);
    // Keys in first-appearance order, and each instance's per-node keys.
    let mut key_index: HashMap<String, usize> = HashMap::new();
    let mut keys: Vec<String> = Vec::new();
    let mut instance_keys: Vec<Vec<usize>> = Vec::with_capacity(instances.len());
    for net in &instances {
        let mut ks = Vec::with_capacity(net.len());
        for v in net.handles() {
            let view = cache.max_safe_view(net, v)?;
            let enc = canonical_encode(&view);
            let idx = *key_index.entry(enc.clone()).or_insert_with(|| {
                keys.push(enc);
                keys.len() - 1
            });
            ks.push(idx);
        }
        instance_keys.push(ks);
    }
    // An instance becomes checkable once its highest key index is assigned.
    let mut due_at: Vec<Vec<usize>> = vec![Vec::new(); keys.len().max(1)];
    for (i, ks) in instance_keys.iter().enumerate() {
        if let Some(&m) = ks.iter().max() {
            due_at[m].push(i);
        }
    }
    let outputs = &p.node_out;
    let mut assignment: Vec<usize> = Vec::new();
    let passes = |assignment: &[usize], inst: usize| -> bool {
        let net = &instances[inst];
        let mut out = OutputLabeling::uniform(net, Label::bot(), Label::bot());
        for (h, &k) in instance_keys[inst].iter().enumerate() {
            out.node_out[h] = outputs[assignment[k]].clone();
        }
        verify_solution(net, p, &out).map_or(false, |vs| vs.is_empty())
    };
    if keys.is_empty() {
        return Ok(MappingOutcome::Found(SafeMapping { map: BTreeMap::new() }));
    }
    loop {
        // Descend: try output 0 for the next key; on conflict, advance the
        // deepest assignment that still has alternatives.
        let depth = assignment.len();
        assignment.push(0);
        loop {
            let d = assignment.len() - 1;
            let ok = due_at[d].iter().all(|&i| passes(&assignment, i));
            if ok {
                break;
            }
            // Advance at d, backtracking while exhausted.
            loop {
                let last = assignment.last_mut().expect("non-empty");
                *last += 1;
                if *last < outputs.len() {
                    break;
                }
                assignment.pop();
                if assignment.is_empty() {
                    return Ok(MappingOutcome::NotFound);
                }
            }
        }
        if assignment.len() == keys.len() && assignment.len() > depth {
            let map = keys
                .iter()
                .cloned()
                .zip(assignment.iter().map(|&a| outputs[a].clone()))
                .collect();
            return Ok(MappingOutcome::Found(SafeMapping { map }));
        }
    }
}

/// Label every node with the mapping's output for its maximally safe view;
/// half-edges get ⊥ (the classes here carry no half-edge outputs).
pub fn apply_mapping(
    g: &SafeMapping,
    net: &Network,
    bound: &ComplexityBound,
    cls: &GraphClass,
) -> Result<OutputLabeling, SafeError> {
    let mut cache = SafetyCache::new(bound, cls);
    let mut out = OutputLabeling::uniform(net, Label::bot(), Label::bot());
    for v in net.handles() {
        let view = cache.max_safe_view(net, v)?;
        let enc = canonical_encode(&view);
        match g.map.get(&enc) {
            Some(l) => out.node_out[v] = l.clone(),
            None => return Err(SafeError::UnmappedView { id: net.node(v).id }),
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Small reference problems
// ---------------------------------------------------------------------------

/// Radius-0 problem: every node's output equals its input.
pub fn copy_input_problem(alphabet: Vec<Label>) -> LclProblem {
    let rules = vec![Rule::new("copy.1", "output equals input", |ctx| {
        let h = ctx.root();
        if ctx.out_node(h) != ctx.in_node(h, 0) {
            vec![crate::lcl::Violation::new(
                "copy.1",
                vec![ctx.id(h)],
                format!("input {} but output {}", ctx.in_node(h, 0), ctx.out_node(h)),
            )]
        } else {
            Vec::new()
        }
    })];
    LclProblem {
        name: "copy-input".into(),
        node_in: alphabet.clone(),
        halfedge_in: vec![Label::bot()],
        node_out: alphabet,
        halfedge_out: vec![Label::bot()],
        check_radius: 0,
        out_arity: 1,
        rules,
    }
}

/// Proper two-coloring: adjacent nodes get distinct colors.
pub fn two_coloring_problem() -> LclProblem {
    let rules = vec![Rule::new("color.1", "neighbors differ", |ctx| {
        let h = ctx.root();
        let mut out = Vec::new();
        for (_, he) in ctx.node(h).edges() {
            if ctx.out_node(he.neighbor) == ctx.out_node(h) {
                out.push(crate::lcl::Violation::new(
                    "color.1",
                    vec![ctx.id(h), ctx.id(he.neighbor)],
                    format!("both endpoints colored {}", ctx.out_node(h)),
                ));
            }
        }
        out
    })];
    LclProblem {
        name: "two-coloring".into(),
        node_in: vec![Label::bot()],
        halfedge_in: vec![Label::bot()],
        node_out: vec![Label::sym("A"), Label::sym("B")],
        halfedge_out: vec![Label::bot()],
        check_radius: 1,
        out_arity: 1,
        rules,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bot_inputs() -> Vec<Label> {
        vec![Label::bot()]
    }

    #[test]
    fn enumeration_counts_match_the_shape_arithmetic() {
        let paths = GraphClass::paths(4, bot_inputs());
        assert_eq!(paths.enumerate_n(1).len(), 1);
        assert_eq!(paths.enumerate_n(2).len(), 2);
        assert_eq!(paths.enumerate_n(3).len(), 12); // 3! ids × 2 middle ports
        assert_eq!(paths.enumerate_n(4).len(), 96); // 4! × 2²
        let cycles = GraphClass::cycles(4, bot_inputs());
        assert!(cycles.enumerate_n(2).is_empty());
        assert_eq!(cycles.enumerate_n(3).len(), 48); // 3! × 2³
    }

    #[test]
    fn radius_zero_is_always_safe() {
        let cls = GraphClass::paths(4, bot_inputs());
        let bound = ComplexityBound::new("zero", |_| 0);
        let net = &cls.enumerate_n(3)[0];
        let view = neighborhood(net, 1, 0).unwrap();
        assert_eq!(is_t_safe(&view, &bound, &cls), Ok(true));
    }

    #[test]
    fn constant_bound_rejects_radii_beyond_the_tail() {
        let cls = GraphClass::paths(6, bot_inputs());
        let bound = ComplexityBound::with_tail("two", |_| 2, 2, 1);
        let net = &cls.enumerate_n(6)[0];
        let mid = 3;
        let safe2 = is_t_safe(&neighborhood(net, mid, 2).unwrap(), &bound, &cls).unwrap();
        let safe3 = is_t_safe(&neighborhood(net, mid, 3).unwrap(), &bound, &cls).unwrap();
        assert!(safe2, "t = C is accepted directly");
        assert!(!safe3, "every host violates 3 > 2");
        assert_eq!(maximally_t_safe_radius(net, mid, &bound, &cls), Ok(2));
    }

    #[test]
    fn undeclared_flat_bound_is_an_error() {
        let cls = GraphClass::paths(4, bot_inputs());
        let bound = ComplexityBound::new("flat", |_| 1);
        let net = &cls.enumerate_n(3)[0];
        let view = neighborhood(net, 0, 2).unwrap();
        assert_eq!(is_t_safe(&view, &bound, &cls), Err(SafeError::BoundNotExceeded { t: 2 }));
    }

    #[test]
    fn zero_bound_pins_every_radius_to_zero() {
        let cls = GraphClass::paths(3, bot_inputs());
        let bound = ComplexityBound::with_tail("zero", |_| 0, 0, 1);
        for net in cls.enumerate_n(3).iter().take(4) {
            for v in net.handles() {
                assert_eq!(maximally_t_safe_radius(net, v, &bound, &cls), Ok(0));
            }
        }
    }

    #[test]
    fn growing_the_bound_never_shrinks_the_safe_radius() {
        let cls = GraphClass::paths(5, bot_inputs());
        let small = ComplexityBound::new("log", |n| (u64::BITS - n.leading_zeros() - 1).into());
        let large = ComplexityBound::new("linear", |n| n);
        let net = &cls.enumerate_n(5)[0];
        for v in net.handles() {
            let a = maximally_t_safe_radius(net, v, &small, &cls).unwrap();
            let b = maximally_t_safe_radius(net, v, &large, &cls).unwrap();
            assert!(a <= b, "node {v}: radius {a} under log, {b} under linear");
        }
    }

    #[test]
    fn copy_problem_mapping_is_found_and_round_trips() {
        let alphabet = vec![Label::sym("a"), Label::sym("b")];
        let cls = GraphClass::paths(3, alphabet.clone());
        let p = copy_input_problem(alphabet);
        let bound = ComplexityBound::with_tail("zero", |_| 0, 0, 1);
        let MappingOutcome::Found(g) = search_mapping(&p, &bound, 3, None, &cls).unwrap() else {
            panic!("copy mapping must exist");
        };
        for net in cls.enumerate_where(|n| n <= 3) {
            let out = apply_mapping(&g, &net, &bound, &cls).unwrap();
            assert!(verify_solution(&net, &p, &out).unwrap().is_empty());
        }
    }

    #[test]
    fn path_two_coloring_mapping_exists_at_small_scale() {
        let cls = GraphClass::paths(3, bot_inputs());
        let p = two_coloring_problem();
        let bound = ComplexityBound::new("linear", |n| n);
        let outcome = search_mapping(&p, &bound, 3, None, &cls).unwrap();
        let MappingOutcome::Found(g) = outcome else {
            panic!("paths are two-colorable");
        };
        for net in cls.enumerate_where(|n| n <= 3) {
            let out = apply_mapping(&g, &net, &bound, &cls).unwrap();
            assert!(verify_solution(&net, &p, &out).unwrap().is_empty());
        }
    }

    #[test]
    fn odd_cycle_two_coloring_has_no_mapping() {
        let cls = GraphClass::cycles(3, bot_inputs());
        let p = two_coloring_problem();
        let bound = ComplexityBound::new("linear", |n| n);
        assert_eq!(
            search_mapping(&p, &bound, 3, None, &cls).unwrap(),
            MappingOutcome::NotFound,
        );
    }

    #[test]
    fn missing_view_is_reported_by_node_id() {
        let alphabet = vec![Label::sym("a")];
        let cls = GraphClass::paths(2, alphabet.clone());
        let p = copy_input_problem(alphabet);
        let bound = ComplexityBound::with_tail("zero", |_| 0, 0, 1);
        let MappingOutcome::Found(mut g) = search_mapping(&p, &bound, 2, None, &cls).unwrap()
        else {
            panic!("copy mapping must exist");
        };
        let victim = g.map.keys().next().unwrap().clone();
        g.map.remove(&victim);
        let hit = cls
            .enumerate()
            .iter()
            .any(|net| matches!(apply_mapping(&g, net, &bound, &cls), Err(SafeError::UnmappedView { .. })));
        assert!(hit, "some instance must contain the deleted view");
    }
}
