//! Ball-growing simulation of local algorithms, the canonical layered
//! certification labeling, halting oracles, and locality profiling.
//!
//! A local algorithm maps a rooted radius-`t` view to a node decision or
//! "grow further". The simulator grows each node's ball until the algorithm
//! halts, recording per-node halt rounds. The canonical labeling marks, for
//! every node, the first layer whose box it fails, together with the error
//! pointers that justify the bad side of that layer's certification problem.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forge::{slot, stack, triple_of};
use crate::label::Label;
use crate::lcl::{OutputLabeling, ViewCtx};
use crate::network::{neighborhood, Network, NodeData, NodeHandle, RootedNeighborhood};
use crate::pi::{
    good_grid_checks, good_row_checks, good_tree_checks, good_turing_checks, pointer,
    violates_any, NamedCheck, ACCEPT, CONS, CROSS, ERROR, ERROR_ROW, GRID, HEAD, I_E, O_E,
    REJECT, ROW, TREE,
};
use crate::turing::{tm_step, tm_trace, TmConfiguration, TuringMachine};

/// Radius at which layer checks are evaluated (matches the certification
/// problems' check radius).
const CHECK_RADIUS: u32 = 6;

// ---------------------------------------------------------------------------
// Layered status computation
// ---------------------------------------------------------------------------

/// A node's verdict at the first layer whose box it fails: the layer index,
/// the node output there (error marker or pointer), and the half-edge
/// outputs at that layer indexed by port − 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BadMark {
    pub layer: usize,
    pub node_out: Label,
    pub he_out: Vec<Label>,
}

/// Per-node layered status: `None` means the node satisfies every layer.
#[derive(Clone, Debug)]
pub struct StructuralStatus {
    pub bad: Vec<Option<BadMark>>,
}

impl StructuralStatus {
    pub fn good(&self, h: NodeHandle) -> bool {
        self.bad[h].is_none()
    }
}

/// The good-side check groups of the first `layers` layers. The machine
/// layer needs a concrete machine.
pub(crate) fn checks_upto(tm: Option<&TuringMachine>, layers: usize) -> Vec<Vec<NamedCheck>> {
    let mut groups = vec![good_tree_checks()];
    if layers >= 2 {
        groups.push(good_row_checks());
    }
    if layers >= 3 {
        groups.push(good_grid_checks());
    }
    if layers >= 4 {
        groups.push(good_turing_checks(tm.expect("the machine layer needs a machine")));
    }
    groups.truncate(layers);
    groups
}

/// Copy of `net` with non-kept nodes isolated (same handle space).
pub(crate) fn restricted_net(net: &Network, keep: &[bool]) -> Network {
    let nodes = net
        .nodes()
        .map(|(h, nd)| {
            let deg = nd.host_degree;
            let ports = (1..=deg)
                .map(|p| {
                    if !keep[h] {
                        return None;
                    }
                    nd.port(p).filter(|he| keep[he.neighbor]).cloned()
                })
                .collect();
            NodeData::from_raw(nd.id, nd.input.clone(), deg, ports)
        })
        .collect();
    Network::from_parts(nodes)
}

/// Evaluate a layer's checks at the root of a radius-`CHECK_RADIUS` view.
fn view_violates(checks: &[NamedCheck], view: &crate::network::RootedNeighborhood) -> bool {
    let bot_nodes = vec![Label::bot(); view.fragment.len()];
    let bot_hes: Vec<Vec<Label>> = view
        .fragment
        .nodes()
        .map(|(_, n)| vec![Label::bot(); n.host_degree as usize])
        .collect();
    let ctx = ViewCtx { view, out_nodes: &bot_nodes, out_halfedges: &bot_hes };
    violates_any(checks, &ctx, view.root)
}

fn is_type(net: &Network, h: NodeHandle, sym: &str) -> bool {
    slot(&net.node(h).input, TREE).is(sym)
}

/// Neighbor over the first present edge whose own half-edge carries `sym`
/// at input slot `s`.
fn follow_dir(net: &Network, h: NodeHandle, s: usize, sym: &str) -> Option<NodeHandle> {
    net.node(h)
        .edges()
        .find(|(_, e)| slot(&e.input, s).is(sym))
        .map(|(_, e)| e.neighbor)
}

fn dir_port(net: &Network, h: NodeHandle, s: usize, sym: &str) -> Option<u32> {
    net.node(h)
        .edges()
        .find(|(_, e)| slot(&e.input, s).is(sym))
        .map(|(p, _)| p)
}

fn all_cross(net: &Network, h: NodeHandle) -> Vec<Label> {
    vec![Label::sym(CROSS); net.node(h).host_degree as usize]
}

fn err_sym(layer: usize) -> &'static str {
    if layer == 1 {
        ERROR_ROW
    } else {
        ERROR
    }
}

/// Maximal west-to-east runs of kept grid nodes joined by E/W half-edges at
/// input slot `s`, ordered by west-end id.
fn chunks(net: &Network, keep: &[bool], s: usize) -> Vec<Vec<NodeHandle>> {
    let mut starts: Vec<NodeHandle> = net
        .handles()
        .filter(|&h| keep[h] && is_type(net, h, "G") && follow_dir(net, h, s, "W").is_none())
        .collect();
    starts.sort_by_key(|&h| net.node(h).id);
    starts
        .into_iter()
        .map(|st| {
            let mut chunk = vec![st];
            while let Some(nx) = follow_dir(net, *chunk.last().unwrap(), s, "E") {
                if chunk.contains(&nx) {
                    break; // malformed cyclic chain
                }
                chunk.push(nx);
            }
            chunk
        })
        .collect()
}

/// Index of the violator nearest to position `i` (ties toward the west).
fn nearest(vpos: &[usize], i: usize) -> usize {
    *vpos
        .iter()
        .min_by_key(|&&j| (i.abs_diff(j), j))
        .expect("non-empty violator set")
}

/// Components of kept tree nodes joined by tree–tree edges.
fn t_components(net: &Network, keep: &[bool]) -> Vec<Vec<NodeHandle>> {
    let mut seen = vec![false; net.len()];
    let mut comps = Vec::new();
    let mut order: Vec<NodeHandle> = net
        .handles()
        .filter(|&h| keep[h] && is_type(net, h, "T"))
        .collect();
    order.sort_by_key(|&h| net.node(h).id);
    for start in order {
        if seen[start] {
            continue;
        }
        let mut comp = Vec::new();
        let mut queue = vec![start];
        seen[start] = true;
        while let Some(h) = queue.pop() {
            comp.push(h);
            for (_, e) in net.node(h).edges() {
                let v = e.neighbor;
                if !seen[v] && keep[v] && is_type(net, v, "T") {
                    seen[v] = true;
                    queue.push(v);
                }
            }
        }
        comp.sort_by_key(|&h| net.node(h).id);
        comps.push(comp);
    }
    comps
}

/// `(level, position)` coordinates of a tree component, `None` when the
/// component is not a single rooted tree.
fn tree_coords(net: &Network, comp: &[NodeHandle]) -> Option<HashMap<NodeHandle, (u32, u64)>> {
    let members: HashSet<NodeHandle> = comp.iter().copied().collect();
    let has_parent = |h: NodeHandle| {
        net.node(h)
            .edges()
            .any(|(_, e)| slot(&e.input, TREE).is("P") && members.contains(&e.neighbor))
    };
    let roots: Vec<NodeHandle> = comp.iter().copied().filter(|&h| !has_parent(h)).collect();
    let [root] = roots[..] else { return None };
    let mut coords: HashMap<NodeHandle, (u32, u64)> = HashMap::new();
    coords.insert(root, (0, 0));
    let mut queue = vec![root];
    while let Some(h) = queue.pop() {
        let (lev, pos) = coords[&h];
        for (_, e) in net.node(h).edges() {
            let bit = if slot(&e.input, TREE).is("Ch_L") {
                0
            } else if slot(&e.input, TREE).is("Ch_R") {
                1
            } else {
                continue;
            };
            if !members.contains(&e.neighbor) || coords.contains_key(&e.neighbor) {
                continue;
            }
            coords.insert(e.neighbor, (lev + 1, pos * 2 + bit));
            queue.push(e.neighbor);
        }
    }
    (coords.len() == comp.len()).then_some(coords)
}

fn tree_marks(net: &Network, keep: &[bool], violator: &[bool]) -> Vec<(NodeHandle, BadMark)> {
    let mut out = Vec::new();
    for comp in t_components(net, keep) {
        let Some(target) = comp
            .iter()
            .copied()
            .filter(|&h| violator[h])
            .min_by_key(|&h| net.node(h).id)
        else {
            continue;
        };
        let coords = tree_coords(net, &comp);
        for &h in &comp {
            let node_out = if violator[h] {
                Label::sym(ERROR)
            } else {
                match coords
                    .as_ref()
                    .and_then(|c| c.get(&h).zip(c.get(&target)))
                {
                    Some((&(lu, pu), &(le, pe))) => {
                        if lu > le {
                            pointer("P")
                        } else if lu < le {
                            pointer("Ch_R")
                        } else if pu < pe {
                            pointer("R")
                        } else {
                            pointer("L")
                        }
                    }
                    // Degenerate component shape: fall back to the marker.
                    None => Label::sym(ERROR),
                }
            };
            out.push((h, BadMark { layer: 0, node_out, he_out: all_cross(net, h) }));
        }
    }
    out
}

fn chunk_marks(
    net: &Network,
    keep: &[bool],
    violator: &[bool],
    layer: usize,
) -> Vec<(NodeHandle, BadMark)> {
    let s = if layer == 1 { ROW } else { GRID };
    let mut out = Vec::new();
    for chunk in chunks(net, keep, s) {
        let vpos: Vec<usize> = chunk
            .iter()
            .enumerate()
            .filter(|&(_, &h)| violator[h])
            .map(|(i, _)| i)
            .collect();
        if vpos.is_empty() {
            continue;
        }
        for (i, &h) in chunk.iter().enumerate() {
            let node_out = if violator[h] {
                Label::sym(err_sym(layer))
            } else {
                let j = nearest(&vpos, i);
                pointer(if j > i { "E" } else { "W" })
            };
            out.push((h, BadMark { layer, node_out, he_out: all_cross(net, h) }));
        }
    }
    out
}

fn turing_marks(net: &Network, keep: &[bool], violator: &[bool]) -> Vec<(NodeHandle, BadMark)> {
    let mut out = Vec::new();
    for chunk in chunks(net, keep, GRID) {
        let vpos: Vec<usize> = chunk
            .iter()
            .enumerate()
            .filter(|&(_, &h)| violator[h])
            .map(|(i, _)| i)
            .collect();
        if vpos.is_empty() {
            continue;
        }
        for (i, &h) in chunk.iter().enumerate() {
            let mut hes = all_cross(net, h);
            let west = dir_port(net, h, GRID, "W");
            let east = dir_port(net, h, GRID, "E");
            if violator[h] {
                for p in [west, east].into_iter().flatten() {
                    hes[p as usize - 1] = Label::sym(I_E);
                }
            } else {
                let j = nearest(&vpos, i);
                let (toward, away) = if j > i { (east, west) } else { (west, east) };
                if let Some(p) = toward {
                    hes[p as usize - 1] = Label::sym(O_E);
                }
                if let Some(p) = away {
                    hes[p as usize - 1] = Label::sym(I_E);
                }
            }
            out.push((h, BadMark { layer: 3, node_out: Label::sym(ERROR), he_out: hes }));
        }
    }
    out
}

/// Layer-by-layer status: each layer's checks run on the network restricted
/// to the survivors of earlier layers; a violated region (tree component or
/// row chunk) goes bad as a whole, with pointers routed toward its
/// smallest-id violator (ties toward the west).
pub(crate) fn compute_status(net: &Network, checks: &[Vec<NamedCheck>]) -> StructuralStatus {
    let n = net.len();
    let mut bad: Vec<Option<BadMark>> = vec![None; n];
    // The restricted network and the per-node check views only change when
    // a layer marks new nodes bad; reuse them while the keep-mask is stable.
    let mut cache: Option<(Vec<bool>, Network, Vec<Option<RootedNeighborhood>>)> = None;
    for (layer, group) in checks.iter().enumerate() {
        let keep: Vec<bool> = bad.iter().map(|b| b.is_none()).collect();
        if !matches!(&cache, Some((k, _, _)) if *k == keep) {
            cache = Some((keep.clone(), restricted_net(net, &keep), vec![None; n]));
        }
        let (_, rnet, views) = cache.as_mut().expect("just filled");
        let violator: Vec<bool> = (0..n)
            .map(|v| {
                keep[v] && {
                    let view = views[v].get_or_insert_with(|| {
                        neighborhood(rnet, v, CHECK_RADIUS).expect("valid handle")
                    });
                    view_violates(group, view)
                }
            })
            .collect();
        let rnet = &*rnet;
        if !violator.contains(&true) {
            continue;
        }
        let marks = match layer {
            0 => tree_marks(rnet, &keep, &violator),
            3 => turing_marks(rnet, &keep, &violator),
            _ => chunk_marks(rnet, &keep, &violator, layer),
        };
        for (h, m) in marks {
            bad[h] = Some(m);
        }
        // A violator no region walk reached (tree-typed node at a row-like
        // layer, malformed chain) fails alone.
        for h in 0..n {
            if violator[h] && bad[h].is_none() {
                bad[h] = Some(BadMark {
                    layer,
                    node_out: Label::sym(err_sym(layer)),
                    he_out: all_cross(net, h),
                });
            }
        }
    }
    StructuralStatus { bad }
}

fn bad_node_stack(arity: usize, m: &BadMark) -> Label {
    let mut entries = vec![(m.layer, m.node_out.clone())];
    for i in m.layer + 1..arity {
        entries.push((i, Label::null()));
    }
    stack(arity, &entries)
}

fn bad_he_stack(arity: usize, m: &BadMark, idx: usize) -> Label {
    let mut entries = vec![(m.layer, m.he_out[idx].clone())];
    for i in m.layer + 1..arity {
        entries.push((i, Label::null()));
    }
    stack(arity, &entries)
}

/// The canonical labeling of the first `layers` layers: ⊥ everywhere a node
/// is good, the bad-side marks at a node's first failed layer, ∅ afterwards.
pub fn structural_labeling(
    net: &Network,
    tm: Option<&TuringMachine>,
    layers: usize,
) -> OutputLabeling {
    let checks = checks_upto(tm, layers);
    let status = compute_status(net, &checks);
    let mut out = OutputLabeling::uniform(net, stack(layers, &[]), stack(layers, &[]));
    for h in net.handles() {
        if let Some(m) = &status.bad[h] {
            out.node_out[h] = bad_node_stack(layers, m);
            out.halfedge_out[h] = (0..net.node(h).host_degree as usize)
                .map(|i| bad_he_stack(layers, m, i))
                .collect();
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Halting oracles
// ---------------------------------------------------------------------------

/// Answer to a halting query about a configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HaltVerdict {
    HaltsAccept,
    HaltsReject,
    RunsForever,
}

/// Canonical key of a configuration: the tape trimmed of trailing blanks
/// beyond the head, then `bits:head:state`. Row-padded reads of the same
/// configuration share a key.
pub fn config_key(c: &TmConfiguration) -> String {
    let mut end = c.tape.len();
    while end > c.head + 1 && end > 1 && c.tape[end - 1] == 0 {
        end -= 1;
    }
    let bits: String = c.tape[..end]
        .iter()
        .map(|&b| char::from(b'0' + b))
        .collect();
    format!("{bits}:{}:{}", c.head, c.state)
}

enum OracleKind {
    /// Verdicts injected as data, with a default for unlisted keys.
    Injected {
        answers: BTreeMap<String, HaltVerdict>,
        default: HaltVerdict,
    },
    /// Simulate for a budget derived from `n` and the tape length.
    Bounded { n: u64 },
}

/// Decides (or approximates) whether a configuration eventually accepts,
/// rejects, or runs forever. Every query self-checks consistency against
/// the queried configuration's successor and panics on disagreement.
pub struct HaltingOracle {
    tm: TuringMachine,
    kind: OracleKind,
}

/// `t_N`: the number of simulation steps a bounded oracle grants a tape of
/// the given length — the largest `k` with `k(k+1)/2 ≤ n`, minus the length.
pub fn bounded_steps(n: u64, tape_len: usize) -> u64 {
    let mut k = 0u64;
    while (k + 1) * (k + 2) / 2 <= n {
        k += 1;
    }
    k.saturating_sub(tape_len as u64)
}

impl HaltingOracle {
    pub fn injected(
        tm: TuringMachine,
        answers: BTreeMap<String, HaltVerdict>,
        default: HaltVerdict,
    ) -> Self {
        HaltingOracle { tm, kind: OracleKind::Injected { answers, default } }
    }

    pub fn tm(&self) -> &TuringMachine {
        &self.tm
    }

    /// The oracle's verdict for `c`, checked for consistency: a non-halting
    /// configuration must get the same verdict as its one-step successor.
    pub fn query(&self, c: &TmConfiguration) -> HaltVerdict {
        let v = self.raw(c);
        if !c.is_halting(&self.tm) {
            let mut next = tm_step(&self.tm, c);
            while next.tape.len() <= c.tape.len() {
                next.tape.push(0);
            }
            let vn = self.raw(&next);
            assert_eq!(
                v,
                vn,
                "halting oracle is inconsistent: {} and its successor {} disagree",
                config_key(c),
                config_key(&next),
            );
        }
        v
    }

    fn raw(&self, c: &TmConfiguration) -> HaltVerdict {
        if c.is_halting(&self.tm) {
            return if c.state == self.tm.accept {
                HaltVerdict::HaltsAccept
            } else {
                HaltVerdict::HaltsReject
            };
        }
        match &self.kind {
            OracleKind::Injected { answers, default } => {
                answers.get(&config_key(c)).copied().unwrap_or(*default)
            }
            OracleKind::Bounded { n } => {
                let budget = bounded_steps(*n, c.tape.len());
                let mut cur = c.clone();
                for _ in 0..budget {
                    if cur.is_halting(&self.tm) {
                        break;
                    }
                    cur = tm_step(&self.tm, &cur);
                }
                if cur.is_halting(&self.tm) {
                    if cur.state == self.tm.accept {
                        HaltVerdict::HaltsAccept
                    } else {
                        HaltVerdict::HaltsReject
                    }
                } else {
                    HaltVerdict::RunsForever
                }
            }
        }
    }
}

/// Oracle that simulates the machine for `bounded_steps(n, |tape|)` steps.
pub fn bounded_oracle(tm: &TuringMachine, n: u64) -> HaltingOracle {
    HaltingOracle { tm: tm.clone(), kind: OracleKind::Bounded { n } }
}

/// Ground-truth answers for one run: every configuration reached from the
/// input within `steps` steps maps to the run's outcome.
pub fn ground_truth_answers(
    tm: &TuringMachine,
    input: &[u8],
    steps: usize,
) -> BTreeMap<String, HaltVerdict> {
    let trace = tm_trace(tm, input, steps);
    let last = trace.last().expect("non-empty trace");
    let verdict = if last.is_halting(tm) {
        if last.state == tm.accept {
            HaltVerdict::HaltsAccept
        } else {
            HaltVerdict::HaltsReject
        }
    } else {
        HaltVerdict::RunsForever
    };
    trace.iter().map(|c| (config_key(c), verdict)).collect()
}

/// On-disk form of an injected oracle.
#[derive(Serialize, Deserialize)]
pub struct OracleFile {
    pub default: HaltVerdict,
    pub answers: BTreeMap<String, HaltVerdict>,
}

pub fn oracle_from_json(tm: &TuringMachine, text: &str) -> Result<HaltingOracle, serde_json::Error> {
    let file: OracleFile = serde_json::from_str(text)?;
    Ok(HaltingOracle::injected(tm.clone(), file.answers, file.default))
}

pub fn oracle_to_json(answers: &BTreeMap<String, HaltVerdict>, default: HaltVerdict) -> String {
    let file = OracleFile { default, answers: answers.clone() };
    let mut text = serde_json::to_string_pretty(&file).expect("serializable");
    text.push('\n');
    text
}

// ---------------------------------------------------------------------------
// Local algorithms and the simulator
// ---------------------------------------------------------------------------

/// A halted node's output: its node label and one label per host port.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeDecision {
    pub node: Label,
    pub halfedges: Vec<Label>,
}

type DecideFn = dyn Fn(&RootedNeighborhood, u32) -> Option<NodeDecision> + Send + Sync;

/// A local algorithm: a pure function of the rooted view and the round.
/// Sensibility: on an exhausted view it must decide.
pub struct LocalAlgorithm {
    pub name: String,
    decide: Arc<DecideFn>,
}

impl LocalAlgorithm {
    pub fn new(
        name: &str,
        decide: impl Fn(&RootedNeighborhood, u32) -> Option<NodeDecision> + Send + Sync + 'static,
    ) -> Self {
        LocalAlgorithm { name: name.into(), decide: Arc::new(decide) }
    }

    pub fn decide(&self, view: &RootedNeighborhood, t: u32) -> Option<NodeDecision> {
        (self.decide)(view, t)
    }
}

/// Result of simulating an algorithm to quiescence.
#[derive(Clone, Debug)]
pub struct SimulationTrace {
    /// Minimal halting round per node.
    pub halt_round: Vec<u32>,
    pub output: OutputLabeling,
    pub max_round: u32,
}

impl SimulationTrace {
    /// `(round, node count)` pairs for the rounds that occur, ascending.
    pub fn histogram(&self) -> Vec<(u32, usize)> {
        let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
        for &r in &self.halt_round {
            *counts.entry(r).or_default() += 1;
        }
        counts.into_iter().collect()
    }

    /// One `id,halt_round,output` line per node, sorted by id.
    pub fn dump(&self, net: &Network) -> String {
        let mut rows: Vec<(u64, u32, String)> = net
            .nodes()
            .map(|(h, n)| (n.id, self.halt_round[h], self.output.node_out[h].to_string()))
            .collect();
        rows.sort();
        let mut text = String::from("id,halt_round,output\n");
        for (id, r, out) in rows {
            let _ = writeln!(text, "{id},{r},{out}");
        }
        text
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("round budget {budget} exhausted; undecided node ids: {undecided:?}")]
    BudgetExceeded { budget: u32, undecided: Vec<u64> },
}

/// Grow every node's ball until the algorithm halts on it, up to `budget`
/// rounds.
pub fn run(net: &Network, alg: &LocalAlgorithm, budget: u32) -> Result<SimulationTrace, SimError> {
    let mut halt_round = vec![0u32; net.len()];
    let mut output = OutputLabeling::uniform(net, Label::bot(), Label::bot());
    let mut undecided = Vec::new();
    for v in net.handles() {
        let mut done = false;
        for t in 0..=budget {
            let view = neighborhood(net, v, t).expect("valid handle");
            if let Some(d) = alg.decide(&view, t) {
                assert_eq!(
                    d.halfedges.len(),
                    net.node(v).host_degree as usize,
                    "decision of algorithm {} labels the wrong number of ports",
                    alg.name,
                );
                halt_round[v] = t;
                output.node_out[v] = d.node;
                output.halfedge_out[v] = d.halfedges;
                done = true;
                break;
            }
            assert!(
                !view.exhausted(),
                "algorithm {} refused to decide on an exhausted view",
                alg.name,
            );
        }
        if !done {
            undecided.push(net.node(v).id);
        }
    }
    if !undecided.is_empty() {
        undecided.sort_unstable();
        return Err(SimError::BudgetExceeded { budget, undecided });
    }
    let max_round = halt_round.iter().copied().max().unwrap_or(0);
    Ok(SimulationTrace { halt_round, output, max_round })
}

// ---------------------------------------------------------------------------
// Decision scopes (early halting)
// ---------------------------------------------------------------------------

fn full(frag: &Network, h: NodeHandle) -> bool {
    frag.node(h).fully_visible()
}

/// The whole row through `h`, walking row labels west then east; `None`
/// until every member is fully visible.
fn complete_row(frag: &Network, h: NodeHandle) -> Option<Vec<NodeHandle>> {
    let mut row = std::collections::VecDeque::from([h]);
    let mut seen: HashSet<NodeHandle> = HashSet::from([h]);
    if !full(frag, h) {
        return None;
    }
    let mut cur = h;
    while let Some(w) = follow_dir(frag, cur, ROW, "W") {
        if !seen.insert(w) || !full(frag, w) {
            return None;
        }
        row.push_front(w);
        cur = w;
    }
    cur = h;
    while let Some(e) = follow_dir(frag, cur, ROW, "E") {
        if !seen.insert(e) || !full(frag, e) {
            return None;
        }
        row.push_back(e);
        cur = e;
    }
    Some(row.into())
}

/// Gather the tree component of `start` into `out`; fails unless every
/// member is fully visible.
fn t_comp_into(frag: &Network, start: NodeHandle, out: &mut BTreeSet<NodeHandle>) -> bool {
    let mut queue = vec![start];
    while let Some(h) = queue.pop() {
        if !out.insert(h) {
            continue;
        }
        if !full(frag, h) {
            return false;
        }
        for (_, e) in frag.node(h).edges() {
            if is_type(frag, e.neighbor, "T") {
                queue.push(e.neighbor);
            }
        }
    }
    true
}

/// Everything a grid node's layered status (and, with `south_extra`, its
/// consensus verdict) can depend on: its row, the row north, two (or three)
/// rows south, and every tree hanging off those rows.
fn g_scope(
    frag: &Network,
    g: NodeHandle,
    south_extra: usize,
    out: &mut BTreeSet<NodeHandle>,
) -> bool {
    let Some(row_j) = complete_row(frag, g) else {
        return false;
    };
    let mut rows = Vec::new();
    if let Some(n) = row_j.iter().find_map(|&h| follow_dir(frag, h, GRID, "N")) {
        match complete_row(frag, n) {
            Some(r) => rows.push(r),
            None => return false,
        }
    }
    rows.push(row_j.clone());
    let mut cur = row_j;
    for _ in 0..(2 + south_extra) {
        let Some(s) = cur.iter().find_map(|&h| follow_dir(frag, h, GRID, "S")) else {
            break;
        };
        match complete_row(frag, s) {
            Some(r) => {
                cur = r.clone();
                rows.push(r);
            }
            None => return false,
        }
    }
    for row in &rows {
        for &h in row {
            out.insert(h);
            for (_, e) in frag.node(h).edges() {
                if is_type(frag, e.neighbor, "T") && !t_comp_into(frag, e.neighbor, out) {
                    return false;
                }
            }
        }
    }
    true
}

/// A tree node's scope: its component, plus the attached row (with the
/// row's own scope when a consensus verdict is needed).
fn t_scope(frag: &Network, root: NodeHandle, consensus: bool, out: &mut BTreeSet<NodeHandle>) -> bool {
    if !t_comp_into(frag, root, out) {
        return false;
    }
    let members: Vec<NodeHandle> = out.iter().copied().collect();
    let attached = members
        .iter()
        .flat_map(|&h| frag.node(h).edges())
        .filter(|(_, e)| is_type(frag, e.neighbor, "G"))
        .map(|(_, e)| e.neighbor)
        .min_by_key(|&h| frag.node(h).id);
    match attached {
        None => true,
        Some(g) if consensus => g_scope(frag, g, 1, out),
        Some(g) => match complete_row(frag, g) {
            Some(r) => {
                out.extend(r);
                true
            }
            None => false,
        },
    }
}

/// Keep-mask of the nodes the root's decision may read, or `None` while the
/// view is still too small.
fn decision_scope(view: &RootedNeighborhood, consensus: bool) -> Option<Vec<bool>> {
    let frag = &view.fragment;
    if view.exhausted() {
        return Some(vec![true; frag.len()]);
    }
    let root = view.root;
    let mut set = BTreeSet::new();
    let ok = if is_type(frag, root, "T") {
        t_scope(frag, root, consensus, &mut set)
    } else if is_type(frag, root, "G") {
        g_scope(frag, root, usize::from(consensus), &mut set)
    } else {
        false // unrecognized input: wait for exhaustion
    };
    if !ok {
        return None;
    }
    let mut keep = vec![false; frag.len()];
    for h in set {
        keep[h] = true;
    }
    Some(keep)
}

fn render_decision(
    frag: &Network,
    root: NodeHandle,
    arity: usize,
    mark: &Option<BadMark>,
    verdict: Option<&Label>,
) -> NodeDecision {
    let deg = frag.node(root).host_degree as usize;
    match mark {
        None => {
            let node = match verdict {
                Some(v) => stack(arity, &[(CONS, v.clone())]),
                None => stack(arity, &[]),
            };
            NodeDecision { node, halfedges: vec![stack(arity, &[]); deg] }
        }
        Some(m) => NodeDecision {
            node: bad_node_stack(arity, m),
            halfedges: (0..deg).map(|i| bad_he_stack(arity, m, i)).collect(),
        },
    }
}

/// Memo of per-node results of a scope computation, keyed by the scope
/// sub-network's canonical encoding rooted at the deciding node. The
/// encoding covers ids, inputs, degrees, and port tables, so equal keys
/// mean equal labeled scopes — and the computation is a pure function of
/// the labeled scope, making the memo invisible to callers. Roots in the
/// same region share a scope, so this collapses per-region work.
type ScopeMemo<V> = std::sync::Mutex<HashMap<String, Arc<HashMap<u64, V>>>>;

fn scope_lookup<V: Clone>(
    memo: &ScopeMemo<V>,
    sub: &Network,
    root: NodeHandle,
    keep: &[bool],
    compute: impl FnOnce() -> Vec<V>,
) -> V {
    // Anchor the key at the smallest-id kept node so every root sharing a
    // scope produces the same key; cache only the nodes the encoding covers
    // (those reachable from the anchor).
    let anchor = sub
        .handles()
        .filter(|&h| keep[h])
        .min_by_key(|&h| sub.node(h).id)
        .expect("scope contains the root");
    let mut reached = vec![false; sub.len()];
    let mut queue = vec![anchor];
    reached[anchor] = true;
    while let Some(u) = queue.pop() {
        for (_, he) in sub.node(u).edges() {
            if !reached[he.neighbor] {
                reached[he.neighbor] = true;
                queue.push(he.neighbor);
            }
        }
    }
    if !reached[root] {
        // Root sits outside the anchor's component; compute directly.
        return compute()[root].clone();
    }
    let key = crate::network::canonical_encode_at(sub, anchor);
    let mut guard = memo.lock().expect("memo lock");
    let by_id = match guard.get(&key) {
        Some(m) => m.clone(),
        None => {
            let values = compute();
            let m: Arc<HashMap<u64, V>> = Arc::new(
                sub.handles()
                    .filter(|&h| keep[h] && reached[h])
                    .map(|h| (sub.node(h).id, values[h].clone()))
                    .collect(),
            );
            guard.insert(key, m.clone());
            m
        }
    };
    by_id[&sub.node(root).id].clone()
}

/// Local algorithm computing the four-layer canonical labeling: grow until
/// the root's scope is interior (tree shortcuts keep that radius
/// logarithmic), then label from the visible part alone.
pub fn alg_structural(tm: &TuringMachine) -> LocalAlgorithm {
    let checks = Arc::new(checks_upto(Some(tm), 4));
    let memo: Arc<ScopeMemo<Option<BadMark>>> = Arc::default();
    LocalAlgorithm::new("structural", move |view, _t| {
        let keep = decision_scope(view, false)?;
        let sub = restricted_net(&view.fragment, &keep);
        let mark = scope_lookup(&memo, &sub, view.root, &keep, || {
            compute_status(&sub, &checks).bad
        });
        Some(render_decision(&view.fragment, view.root, 4, &mark, None))
    })
}

// ---------------------------------------------------------------------------
// Consensus
// ---------------------------------------------------------------------------

/// The configuration a row spells west to east: one tape bit per node,
/// exactly one head. `None` for headless or non-machine rows.
fn row_config(net: &Network, row: &[NodeHandle]) -> Option<TmConfiguration> {
    let mut tape = Vec::with_capacity(row.len());
    let mut head = None;
    let mut state = None;
    for (i, &h) in row.iter().enumerate() {
        let (b, hd, q) = triple_of(net, h)?;
        tape.push(match b.as_str() {
            "0" => 0,
            "1" => 1,
            _ => return None,
        });
        if hd == HEAD {
            if head.is_some() {
                return None;
            }
            head = Some(i);
            state = Some(q);
        }
    }
    Some(TmConfiguration { tape, head: head?, state: state? })
}

fn verdict_label(v: HaltVerdict) -> Label {
    Label::sym(if v == HaltVerdict::HaltsAccept { ACCEPT } else { REJECT })
}

/// Per-node consensus verdicts: each fully good machine row asks the oracle
/// about its own configuration; a good headless row adopts the verdict of
/// an intact headed row to its south; trees copy their attached row.
/// Everything else rejects. Only meaningful for structurally good nodes.
fn node_verdicts(net: &Network, status: &StructuralStatus, oracle: &HaltingOracle) -> Vec<Label> {
    let reject = Label::sym(REJECT);
    let mut out = vec![reject.clone(); net.len()];
    let all = vec![true; net.len()];
    let rows = chunks(net, &all, ROW);
    let mut row_idx: HashMap<NodeHandle, usize> = HashMap::new();
    for (i, row) in rows.iter().enumerate() {
        for &h in row {
            row_idx.insert(h, i);
        }
    }
    let good_row: Vec<bool> = rows
        .iter()
        .map(|row| row.iter().all(|&h| status.good(h)))
        .collect();
    let headed_verdict = |i: usize| -> Option<Label> {
        row_config(net, &rows[i]).map(|c| verdict_label(oracle.query(&c)))
    };
    for (i, row) in rows.iter().enumerate() {
        if !good_row[i] {
            continue;
        }
        let verdict = headed_verdict(i).unwrap_or_else(|| {
            row.iter()
                .find_map(|&h| follow_dir(net, h, GRID, "S"))
                .and_then(|s| row_idx.get(&s).copied())
                .filter(|&j| good_row[j])
                .and_then(headed_verdict)
                .unwrap_or_else(|| reject.clone())
        });
        for &h in row {
            if status.good(h) {
                out[h] = verdict.clone();
            }
        }
    }
    for comp in t_components(net, &all) {
        if !comp.iter().all(|&h| status.good(h)) {
            continue;
        }
        let attached = comp
            .iter()
            .flat_map(|&h| net.node(h).edges())
            .filter(|(_, e)| is_type(net, e.neighbor, "G"))
            .map(|(_, e)| e.neighbor)
            .min_by_key(|&h| net.node(h).id);
        if let Some(g) = attached.filter(|&g| status.good(g)) {
            let verdict = out[g].clone();
            for &h in &comp {
                out[h] = verdict.clone();
            }
        }
    }
    out
}

/// The five-slot labeling (structure plus consensus) of a whole network.
pub fn consensus_labeling(net: &Network, oracle: &HaltingOracle) -> OutputLabeling {
    let checks = checks_upto(Some(oracle.tm()), 4);
    let status = compute_status(net, &checks);
    let verdicts = node_verdicts(net, &status, oracle);
    let mut out = OutputLabeling::uniform(net, stack(5, &[]), stack(5, &[]));
    for h in net.handles() {
        match &status.bad[h] {
            Some(m) => {
                out.node_out[h] = bad_node_stack(5, m);
                out.halfedge_out[h] = (0..net.node(h).host_degree as usize)
                    .map(|i| bad_he_stack(5, m, i))
                    .collect();
            }
            None => out.node_out[h] = stack(5, &[(CONS, verdicts[h].clone())]),
        }
    }
    out
}

/// Local algorithm for the five-slot problem: the structural marks plus a
/// per-row halting verdict. Good rows query the oracle independently; the
/// oracle's step-consistency makes neighboring rows agree without any
/// global coordination.
pub fn alg_consensus(oracle: Arc<HaltingOracle>) -> LocalAlgorithm {
    let checks = Arc::new(checks_upto(Some(oracle.tm()), 4));
    let memo: Arc<ScopeMemo<(Option<BadMark>, Label)>> = Arc::default();
    LocalAlgorithm::new("consensus", move |view, _t| {
        let keep = decision_scope(view, true)?;
        let sub = restricted_net(&view.fragment, &keep);
        let (mark, verdict) = scope_lookup(&memo, &sub, view.root, &keep, || {
            let status = compute_status(&sub, &checks);
            let verdicts = node_verdicts(&sub, &status, &oracle);
            status.bad.into_iter().zip(verdicts).collect()
        });
        Some(render_decision(&view.fragment, view.root, 5, &mark, Some(&verdict)))
    })
}

// ---------------------------------------------------------------------------
// Locality profiling
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProfileRow {
    pub k: u32,
    pub n: usize,
    pub max_round: u32,
}

/// Run the algorithm on `family(k)` for every `k`, recording instance size
/// and the worst halt round, ascending in `k`.
pub fn locality_profile(
    family: impl Fn(u32) -> Network,
    alg: &LocalAlgorithm,
    ks: &[u32],
    budget: u32,
) -> Result<Vec<ProfileRow>, SimError> {
    let mut ks: Vec<u32> = ks.to_vec();
    ks.sort_unstable();
    ks.dedup();
    let mut rows = Vec::with_capacity(ks.len());
    for k in ks {
        let net = family(k);
        let trace = run(&net, alg, budget)?;
        rows.push(ProfileRow { k, n: net.len(), max_round: trace.max_round });
    }
    Ok(rows)
}

pub fn profile_csv(rows: &[ProfileRow]) -> String {
    let mut text = String::from("k,n,max_round\n");
    for r in rows {
        let _ = writeln!(text, "{},{},{}", r.k, r.n, r.max_round);
    }
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forge::{corrupt, make_gk, make_growing_grid, make_perfect_tree, CorruptKind, GrowingGridSpec};
    use crate::lcl::{compose_cert, verify_solution};
    use crate::pi::{pi_full, pi_grid, pi_row, pi_structural, pi_tree};
    use crate::turing::Move;

    /// Machine that walks right flipping bits until it reads 0, then accepts.
    fn mover() -> TuringMachine {
        TuringMachine::new(
            vec!["s".into(), "accept".into(), "reject".into()],
            "s".into(),
            "accept".into(),
            "reject".into(),
            vec![
                ("s".into(), 1, "s".into(), 0, Move::Right),
                ("s".into(), 0, "accept".into(), 1, Move::Stay),
            ],
        )
        .unwrap()
    }

    fn assert_good(p: &crate::lcl::LclProblem, net: &Network, out: &OutputLabeling) {
        let report = verify_solution(net, p, out).unwrap();
        assert!(report.is_empty(), "unexpected violations: {report:?}");
    }

    #[test]
    fn canonical_labeling_passes_on_every_machine_corruption() {
        let tm = mover();
        let pi = pi_structural(&tm).combined();
        for kind in [CorruptKind::TuringTransition, CorruptKind::TuringTwoHeads] {
            let net = make_gk(&tm, 8, &[1]).unwrap();
            let net = corrupt(&net, kind, 11).unwrap();
            let out = structural_labeling(&net, Some(&tm), 4);
            assert!(net.handles().any(|h| !out.node_out[h].is_bot()), "{kind} unmarked");
            assert_good(&pi, &net, &out);
        }
    }

    #[test]
    fn canonical_labeling_passes_on_structural_corruptions() {
        let pi3 = compose_cert(&compose_cert(&pi_tree(), &pi_row()), &pi_grid()).combined();
        for kind in [CorruptKind::TreeBreak, CorruptKind::RowBreak, CorruptKind::GridBreak] {
            let net = make_growing_grid(&GrowingGridSpec { h: 4, l: 3 });
            let net = corrupt(&net, kind, 5).unwrap();
            let out = structural_labeling(&net, None, 3);
            assert!(net.handles().any(|h| !out.node_out[h].is_bot()), "{kind} unmarked");
            assert_good(&pi3, &net, &out);
        }
    }

    #[test]
    fn canonical_labeling_marks_broken_tree_with_pointers() {
        let net = make_perfect_tree(4);
        let net = corrupt(&net, CorruptKind::TreeBreak, 3).unwrap();
        let out = structural_labeling(&net, None, 1);
        let errors = net
            .handles()
            .filter(|&h| out.node_out[h].is(ERROR))
            .count();
        let pointers = net
            .handles()
            .filter(|&h| crate::pi::as_pointer(&out.node_out[h]).is_some())
            .count();
        assert!(errors >= 1);
        assert_eq!(errors + pointers, net.len(), "whole component is marked");
        assert_good(&pi_tree().combined(), &net, &out);
    }

    #[test]
    fn structural_algorithm_matches_the_global_labeling() {
        let tm = mover();
        let alg = alg_structural(&tm);
        for (kind, seed) in [
            (None, 0),
            (Some(CorruptKind::TuringTransition), 7),
            (Some(CorruptKind::TreeBreak), 2),
        ] {
            let mut net = make_gk(&tm, 9, &[1, 1]).unwrap();
            if let Some(k) = kind {
                net = corrupt(&net, k, seed).unwrap();
            }
            let trace = run(&net, &alg, 64).unwrap();
            let global = structural_labeling(&net, Some(&tm), 4);
            assert_eq!(trace.output, global, "corruption {kind:?}");
        }
    }

    #[test]
    fn consensus_agrees_with_the_machine_and_passes_the_full_problem() {
        let tm = mover();
        // A one-bit input starts the machine on row 1, so every row of the
        // instance is a trace row and the verdict reaches every node.
        let k = 9;
        let input = [1];
        let net = make_gk(&tm, k, &input).unwrap();
        let answers = ground_truth_answers(&tm, &input, 2 * k as usize);
        let injected = Arc::new(HaltingOracle::injected(
            tm.clone(),
            answers,
            HaltVerdict::RunsForever,
        ));
        let bounded = Arc::new(bounded_oracle(&tm, net.len() as u64));
        let expected = {
            let last = tm_trace(&tm, &input, 2 * k as usize).last().unwrap().clone();
            assert!(last.is_halting(&tm), "mover halts on 111");
            verdict_label(if last.state == tm.accept {
                HaltVerdict::HaltsAccept
            } else {
                HaltVerdict::HaltsReject
            })
        };
        for oracle in [injected, bounded] {
            let trace = run(&net, &alg_consensus(oracle.clone()), 64).unwrap();
            assert_eq!(trace.output, consensus_labeling(&net, &oracle));
            assert_good(&pi_full(&tm), &net, &trace.output);
            for h in net.handles() {
                assert_eq!(
                    trace.output.node_out[h].component(CONS, 5),
                    &expected,
                    "node {} disagrees with the halting verdict",
                    net.node(h).id,
                );
            }
        }
    }

    #[test]
    fn bounded_oracle_budget_matches_the_triangular_inversion() {
        assert_eq!(bounded_steps(1, 1), 0);
        assert_eq!(bounded_steps(3, 1), 1);
        assert_eq!(bounded_steps(10, 1), 3);
        assert_eq!(bounded_steps(10, 4), 0);
        assert_eq!(bounded_steps(0, 0), 0);
    }

    #[test]
    #[should_panic(expected = "inconsistent")]
    fn injected_oracle_detects_inconsistent_answers() {
        let tm = mover();
        let mut answers = ground_truth_answers(&tm, &[1, 1], 8);
        let start = TmConfiguration::start(&tm, &[1, 1]);
        answers.insert(config_key(&start), HaltVerdict::RunsForever);
        let oracle = HaltingOracle::injected(tm, answers, HaltVerdict::RunsForever);
        oracle.query(&start);
    }

    #[test]
    fn oracle_round_trips_through_json() {
        let tm = mover();
        let answers = ground_truth_answers(&tm, &[1], 6);
        let text = oracle_to_json(&answers, HaltVerdict::RunsForever);
        let oracle = oracle_from_json(&tm, &text).unwrap();
        let c = TmConfiguration::start(&tm, &[1]);
        assert_eq!(oracle.query(&c), HaltVerdict::HaltsAccept);
    }

    #[test]
    fn padded_and_trimmed_configurations_share_a_key() {
        let c1 = TmConfiguration { tape: vec![1, 0, 0, 0], head: 1, state: "s".into() };
        let c2 = TmConfiguration { tape: vec![1, 0], head: 1, state: "s".into() };
        assert_eq!(config_key(&c1), config_key(&c2));
        assert_eq!(config_key(&c1), "10:1:s");
    }

    #[test]
    fn simulation_reports_budget_exhaustion_with_node_ids() {
        let tm = mover();
        let net = make_gk(&tm, 5, &[1]).unwrap();
        let never = LocalAlgorithm::new("stall", |view, _| {
            // Refuse until exhaustion, then emit a constant.
            view.exhausted().then(|| NodeDecision {
                node: Label::bot(),
                halfedges: vec![
                    Label::bot();
                    view.fragment.node(view.root).host_degree as usize
                ],
            })
        });
        let err = run(&net, &never, 1).unwrap_err();
        match err {
            SimError::BudgetExceeded { budget, undecided } => {
                assert_eq!(budget, 1);
                assert!(!undecided.is_empty());
                assert!(undecided.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }

    #[test]
    fn traces_and_profiles_serialize_deterministically() {
        let tm = mover();
        let net = make_gk(&tm, 6, &[1]).unwrap();
        let alg = alg_structural(&tm);
        let a = run(&net, &alg, 64).unwrap();
        let b = run(&net, &alg, 64).unwrap();
        assert_eq!(a.dump(&net), b.dump(&net));
        assert!(a.dump(&net).starts_with("id,halt_round,output\n"));
        assert_eq!(
            a.histogram().iter().map(|&(_, c)| c).sum::<usize>(),
            net.len(),
        );
        let rows = locality_profile(
            |k| make_gk(&tm, k, &[1]).unwrap(),
            &alg,
            &[6, 4, 5],
            64,
        )
        .unwrap();
        assert_eq!(rows.iter().map(|r| r.k).collect::<Vec<_>>(), vec![4, 5, 6]);
        assert!(profile_csv(&rows).starts_with("k,n,max_round\n"));
    }

    #[test]
    fn early_halting_beats_exhaustion_on_tall_instances() {
        let tm = mover();
        let net = make_gk(&tm, 14, &[1]).unwrap();
        let trace = run(&net, &alg_structural(&tm), 64).unwrap();
        let diameter = net.eccentricity(0);
        assert!(
            trace.max_round < diameter,
            "max round {} should undercut the diameter {}",
            trace.max_round,
            diameter,
        );
    }
}
