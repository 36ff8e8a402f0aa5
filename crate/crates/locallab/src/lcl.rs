//! Locally checkable labeling problems, certification splits, the layered
//! composition operator, path-following, and the solution verifier.
//!
//! Constraints are rules evaluated with every node once as the root of its
//! `check_radius` view. A certification problem carries good/bad output
//! alphabets with all rules in one list; rules condition themselves on the
//! side of the labels they see, so evaluating the full rule set against a
//! one-sided alphabet is always sound.
//!
//! Composition `p1 ⊗ p2` concatenates label tuples. A node whose `p1`
//! output is on the bad side must fill all `p2` slots with the sentinel
//! `∅`; `p2`'s rules are then evaluated on the subgraph that discards
//! `∅` nodes and any edge with an `∅` half-edge slot.

use std::collections::HashSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::label::Label;
use crate::network::{neighborhood, HalfEdge, Network, NodeData, NodeHandle, RootedNeighborhood};

/// A candidate output labeling, indexed like the network it labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputLabeling {
    /// Node output by handle.
    pub node_out: Vec<Label>,
    /// Half-edge output by handle and port slot (`[h][port-1]`).
    pub halfedge_out: Vec<Vec<Label>>,
}

impl OutputLabeling {
    /// Uniform labeling: every node and half-edge gets the same label.
    pub fn uniform(net: &Network, node: Label, halfedge: Label) -> Self {
        OutputLabeling {
            node_out: vec![node; net.len()],
            halfedge_out: net
                .nodes()
                .map(|(_, n)| vec![halfedge.clone(); n.host_degree as usize])
                .collect(),
        }
    }

    /// Restrict a host labeling to a neighborhood fragment.
    pub fn restrict_to(&self, view: &RootedNeighborhood) -> OutputLabeling {
        OutputLabeling {
            node_out: view
                .host_nodes
                .iter()
                .map(|&h| self.node_out[h].clone())
                .collect(),
            halfedge_out: view
                .host_nodes
                .iter()
                .map(|&h| self.halfedge_out[h].clone())
                .collect(),
        }
    }
}

/// One reported constraint violation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Violation {
    pub constraint_id: String,
    pub witness_nodes: Vec<u64>,
    pub message: String,
}

impl Violation {
    pub fn new(constraint_id: &str, witness_nodes: Vec<u64>, message: impl Into<String>) -> Self {
        Violation { constraint_id: constraint_id.to_string(), witness_nodes, message: message.into() }
    }

    /// Report line format used by the CLI and tests.
    pub fn report_line(&self) -> String {
        let ids = self
            .witness_nodes
            .iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(",");
        format!("VIOLATION {} nodes={} {}", self.constraint_id, ids, self.message)
    }
}

/// Evaluation context handed to a rule: a (possibly layer-restricted) view
/// plus the current layer's projected outputs, indexed by fragment handle.
pub struct ViewCtx<'a> {
    pub view: &'a RootedNeighborhood,
    pub out_nodes: &'a [Label],
    pub out_halfedges: &'a [Vec<Label>],
}

impl<'a> ViewCtx<'a> {
    pub fn root(&self) -> NodeHandle {
        self.view.root
    }

    pub fn node(&self, h: NodeHandle) -> &NodeData {
        self.view.fragment.node(h)
    }

    pub fn id(&self, h: NodeHandle) -> u64 {
        self.node(h).id
    }

    /// Input label slot of a node. Atomic inputs expose themselves at slot
    /// 0, so single-layer problems and composed stacks share rule code.
    pub fn in_node(&self, h: NodeHandle, slot: usize) -> &Label {
        slot_of(&self.node(h).input, slot)
    }

    /// Input label slot on a half-edge, if the port is present in the view.
    pub fn in_he(&self, h: NodeHandle, port: u32, slot: usize) -> Option<&Label> {
        self.node(h).port(port).map(|he| slot_of(&he.input, slot))
    }

    pub fn out_node(&self, h: NodeHandle) -> &Label {
        &self.out_nodes[h]
    }

    pub fn out_he(&self, h: NodeHandle, port: u32) -> &Label {
        &self.out_halfedges[h][port as usize - 1]
    }

    /// Present half-edges of `h` whose input slot equals `sym`.
    pub fn edges_with(
        &self,
        h: NodeHandle,
        slot: usize,
        sym: &str,
    ) -> Vec<(u32, &HalfEdge)> {
        self.node(h)
            .edges()
            .filter(|(_, he)| slot_of(&he.input, slot).is(sym))
            .collect()
    }

    pub fn count_he(&self, h: NodeHandle, slot: usize, sym: &str) -> usize {
        self.edges_with(h, slot, sym).len()
    }

    pub fn has_he(&self, h: NodeHandle, slot: usize, sym: &str) -> bool {
        self.count_he(h, slot, sym) > 0
    }

    /// The path-following function f: starting at `from`, walk edges whose
    /// half-edge input slot at the source carries the step label. Returns
    /// the endpoint if exactly one such walk exists, `None` (the paper's ⊥)
    /// otherwise.
    pub fn follow(&self, from: NodeHandle, steps: &[(usize, &str)]) -> Option<NodeHandle> {
        let mut walks: Vec<NodeHandle> = vec![from];
        for &(slot, sym) in steps {
            let mut next = Vec::new();
            for &x in &walks {
                for (_, he) in self.edges_with(x, slot, sym) {
                    next.push(he.neighbor);
                }
            }
            walks = next;
            if walks.len() > 1 {
                return None; // more than one path already
            }
        }
        match walks.as_slice() {
            [end] => Some(*end),
            _ => None,
        }
    }
}

fn slot_of(label: &Label, slot: usize) -> &Label {
    // Rules address layer slots absolutely; a layer absent from the input
    // stack (single-layer instances, shorter stacks) reads as quiescent.
    static FALLBACK: std::sync::OnceLock<Label> = std::sync::OnceLock::new();
    match label {
        Label::Tuple(parts) if slot < parts.len() => &parts[slot],
        atomic @ Label::Sym(_) if slot == 0 => atomic,
        _ => FALLBACK.get_or_init(Label::bot),
    }
}

type RuleFn = dyn Fn(&ViewCtx) -> Vec<Violation> + Send + Sync;

/// One named constraint.
#[derive(Clone)]
pub struct Rule {
    pub id: String,
    pub title: String,
    pub eval: Arc<RuleFn>,
}

impl Rule {
    pub fn new(
        id: &str,
        title: &str,
        eval: impl Fn(&ViewCtx) -> Vec<Violation> + Send + Sync + 'static,
    ) -> Self {
        Rule { id: id.to_string(), title: title.to_string(), eval: Arc::new(eval) }
    }
}

impl std::fmt::Debug for Rule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Rule({})", self.id)
    }
}

/// An LCL problem: alphabets, a check radius, and rules.
#[derive(Clone, Debug)]
pub struct LclProblem {
    pub name: String,
    pub node_in: Vec<Label>,
    pub halfedge_in: Vec<Label>,
    pub node_out: Vec<Label>,
    pub halfedge_out: Vec<Label>,
    pub check_radius: u32,
    /// Number of layer components in output labels (1 for plain problems).
    pub out_arity: usize,
    pub rules: Vec<Rule>,
}

impl LclProblem {
    /// Single-output always-true problem over the given input alphabets.
    pub fn trivial(node_in: Vec<Label>, halfedge_in: Vec<Label>) -> Self {
        LclProblem {
            name: "trivial".into(),
            node_in,
            halfedge_in,
            node_out: vec![Label::bot()],
            halfedge_out: vec![Label::bot()],
            check_radius: 0,
            out_arity: 1,
            rules: vec![],
        }
    }
}

/// A certification LCL: one rule set, two disjoint output alphabets.
#[derive(Clone, Debug)]
pub struct CertificationLcl {
    pub name: String,
    pub node_in: Vec<Label>,
    pub halfedge_in: Vec<Label>,
    pub good_node_out: Vec<Label>,
    pub bad_node_out: Vec<Label>,
    pub good_halfedge_out: Vec<Label>,
    pub bad_halfedge_out: Vec<Label>,
    pub check_radius: u32,
    pub out_arity: usize,
    pub rules: Vec<Rule>,
}

impl CertificationLcl {
    /// Node label lies strictly on the bad side.
    pub fn is_bad_node(&self, l: &Label) -> bool {
        self.bad_node_out.contains(l) && !self.good_node_out.contains(l)
    }

    /// Half-edge label lies strictly on the bad side.
    pub fn is_bad_halfedge(&self, l: &Label) -> bool {
        self.bad_halfedge_out.contains(l) && !self.good_halfedge_out.contains(l)
    }

    fn problem_with(&self, suffix: &str, node_out: Vec<Label>, halfedge_out: Vec<Label>) -> LclProblem {
        LclProblem {
            name: format!("{}.{suffix}", self.name),
            node_in: self.node_in.clone(),
            halfedge_in: self.halfedge_in.clone(),
            node_out,
            halfedge_out,
            check_radius: self.check_radius,
            out_arity: self.out_arity,
            rules: self.rules.clone(),
        }
    }

    /// Good sub-problem: good alphabets, all rules.
    pub fn good(&self) -> LclProblem {
        self.problem_with("good", self.good_node_out.clone(), self.good_halfedge_out.clone())
    }

    /// Bad sub-problem.
    pub fn bad(&self) -> LclProblem {
        self.problem_with("bad", self.bad_node_out.clone(), self.bad_halfedge_out.clone())
    }

    /// Both sides: the problem actually solved by certifying algorithms.
    pub fn combined(&self) -> LclProblem {
        self.problem_with(
            "combined",
            union(&self.good_node_out, &self.bad_node_out),
            union(&self.good_halfedge_out, &self.bad_halfedge_out),
        )
    }
}

fn union(a: &[Label], b: &[Label]) -> Vec<Label> {
    let mut out = a.to_vec();
    for l in b {
        if !out.contains(l) {
            out.push(l.clone());
        }
    }
    out
}

fn product(a: &[Label], a_arity: usize, b: &[Label], b_arity: usize) -> Vec<Label> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(Label::concat(x, a_arity, y, b_arity));
        }
    }
    out
}

/// All-`∅` filler for a discarded right side of the given arity.
pub fn null_fill(arity: usize) -> Label {
    if arity == 1 {
        Label::null()
    } else {
        Label::tuple(vec![Label::null(); arity])
    }
}

/// Reassemble components `[lo, hi)` of an `arity`-tuple label as a label of
/// arity `hi - lo`.
fn slice_label(l: &Label, lo: usize, hi: usize, arity: usize) -> Label {
    if hi - lo == 1 {
        l.component(lo, arity).clone()
    } else {
        Label::tuple((lo..hi).map(|i| l.component(i, arity).clone()))
    }
}

/// Restrict a view to the nodes/edges kept by a layer (used when
/// evaluating a composed problem's right side).
fn restrict_view(
    view: &RootedNeighborhood,
    keep_node: &[bool],
    keep_edge: impl Fn(NodeHandle, u32) -> bool,
) -> Option<(RootedNeighborhood, Vec<Option<NodeHandle>>)> {
    if !keep_node[view.root] {
        return None;
    }
    let mut remap: Vec<Option<NodeHandle>> = vec![None; view.fragment.len()];
    let mut kept: Vec<NodeHandle> = Vec::new();
    for h in view.fragment.handles() {
        if keep_node[h] {
            remap[h] = Some(kept.len());
            kept.push(h);
        }
    }
    let mut nodes = Vec::with_capacity(kept.len());
    for &h in &kept {
        let src = view.fragment.node(h);
        let ports = (1..=src_ports_len(src) as u32)
            .map(|port| {
                src.port(port).and_then(|he| {
                    if keep_node[he.neighbor] && keep_edge(h, port) {
                        Some(HalfEdge {
                            neighbor: remap[he.neighbor].unwrap(),
                            neighbor_port: he.neighbor_port,
                            input: he.input.clone(),
                        })
                    } else {
                        None
                    }
                })
            })
            .collect();
        nodes.push(NodeData::from_raw(src.id, src.input.clone(), src.host_degree, ports));
    }
    let restricted = RootedNeighborhood {
        root: remap[view.root].unwrap(),
        radius: view.radius,
        fragment: Network::from_parts(nodes),
        host_nodes: kept.iter().map(|&h| view.host_nodes[h]).collect(),
        dist: kept.iter().map(|&h| view.dist[h]).collect(),
    };
    Some((restricted, remap))
}

fn src_ports_len(n: &NodeData) -> usize {
    // Port-table length equals host port count for both full networks and
    // fragments (cut edges are holes, not truncation).
    n.edges().map(|(p, _)| p as usize).max().unwrap_or(0).max(n.host_degree as usize)
}

/// Layered composition `p1 ⊗ p2`.
///
/// Output labels are flat tuples of `p1.out_arity + p2.out_arity`
/// components. The admissibility rules enforce the good/bad versus `∅`
/// coupling; `p1`'s rules see the first components, `p2`'s rules see the
/// rest on the `∅`-discarded subgraph.
pub fn compose(p1: &CertificationLcl, p2: &LclProblem) -> LclProblem {
    let (a1, a2) = (p1.out_arity, p2.out_arity);
    let arity = a1 + a2;
    let mut node_out = product(&p1.good_node_out, a1, &p2.node_out, a2);
    for x in &p1.bad_node_out {
        node_out.push(Label::concat(x, a1, &null_fill(a2), a2));
    }
    let mut halfedge_out = product(&p1.good_halfedge_out, a1, &p2.halfedge_out, a2);
    for x in &p1.bad_halfedge_out {
        let filled = Label::concat(x, a1, &null_fill(a2), a2);
        if !halfedge_out.contains(&filled) {
            halfedge_out.push(filled);
        }
    }
    // Good half-edges incident to a discarded edge also carry ∅ on the
    // right (the edge is dropped from the right-side graph when either
    // endpoint or half-edge is discarded).
    for x in &p1.good_halfedge_out {
        let filled = Label::concat(x, a1, &null_fill(a2), a2);
        if !halfedge_out.contains(&filled) {
            halfedge_out.push(filled);
        }
    }

    let mut rules: Vec<Rule> = Vec::new();
    // Admissibility: bad left side forces ∅ right side and vice versa.
    {
        let p1c = p1.clone();
        rules.push(Rule::new(
            "compose.admissibility",
            "bad-side outputs force ∅ in later layers; good-side outputs forbid it",
            move |ctx| {
                let mut v = Vec::new();
                let h = ctx.root();
                let out = ctx.out_node(h);
                let left = slice_label(out, 0, a1, arity);
                let right_first = out.component(a1, arity);
                if p1c.is_bad_node(&left) {
                    if !(a1..arity).all(|i| out.component(i, arity).is_null()) {
                        v.push(Violation::new(
                            "compose.admissibility",
                            vec![ctx.id(h)],
                            format!("bad-side output {left} must be followed by ∅, got {out}"),
                        ));
                    }
                } else if right_first.is_null() {
                    v.push(Violation::new(
                        "compose.admissibility",
                        vec![ctx.id(h)],
                        format!("good-side output {left} must be followed by a real label, got ∅"),
                    ));
                }
                for (port, he) in ctx.node(h).edges() {
                    let out = ctx.out_he(h, port);
                    let left = slice_label(out, 0, a1, arity);
                    if p1c.is_bad_halfedge(&left) {
                        if !(a1..arity).all(|i| out.component(i, arity).is_null()) {
                            v.push(Violation::new(
                                "compose.admissibility",
                                vec![ctx.id(h)],
                                format!("bad-side half-edge output {left} must be followed by ∅"),
                            ));
                        }
                    } else {
                        // A good-side half-edge on an edge both of whose
                        // endpoints stay in the later-layer graph (and whose
                        // far side is also good) must carry a real label.
                        let far = ctx.out_he(he.neighbor, he.neighbor_port);
                        let far_left = slice_label(far, 0, a1, arity);
                        let both_kept = !ctx.out_node(h).component(a1, arity).is_null()
                            && !ctx.out_node(he.neighbor).component(a1, arity).is_null();
                        if both_kept
                            && !p1c.is_bad_halfedge(&far_left)
                            && out.component(a1, arity).is_null()
                        {
                            v.push(Violation::new(
                                "compose.admissibility",
                                vec![ctx.id(h)],
                                format!(
                                    "half-edge output {left} on a kept edge must be followed by a real label"
                                ),
                            ));
                        }
                    }
                }
                v
            },
        ));
    }
    // Left lift: project outputs to the first a1 components.
    for rule in &p1.rules {
        let inner = rule.eval.clone();
        rules.push(Rule {
            id: rule.id.clone(),
            title: rule.title.clone(),
            eval: Arc::new(move |ctx: &ViewCtx| {
                let nodes: Vec<Label> = ctx
                    .out_nodes
                    .iter()
                    .map(|l| slice_label(l, 0, a1, arity))
                    .collect();
                let hes: Vec<Vec<Label>> = ctx
                    .out_halfedges
                    .iter()
                    .map(|v| v.iter().map(|l| slice_label(l, 0, a1, arity)).collect())
                    .collect();
                let sub = ViewCtx { view: ctx.view, out_nodes: &nodes, out_halfedges: &hes };
                inner(&sub)
            }),
        });
    }
    // Right lift: project to the last a2 components and evaluate on the
    // ∅-discarded subgraph; nothing to check if the root is discarded.
    for rule in &p2.rules {
        let inner = rule.eval.clone();
        rules.push(Rule {
            id: rule.id.clone(),
            title: rule.title.clone(),
            eval: Arc::new(move |ctx: &ViewCtx| {
                let keep: Vec<bool> = ctx
                    .out_nodes
                    .iter()
                    .map(|l| !l.component(a1, arity).is_null())
                    .collect();
                let he_kept = |h: NodeHandle, port: u32| -> bool {
                    let he = ctx.node(h).port(port).expect("present edge");
                    !ctx.out_he(h, port).component(a1, arity).is_null()
                        && !ctx
                            .out_he(he.neighbor, he.neighbor_port)
                            .component(a1, arity)
                            .is_null()
                };
                let Some((restricted, remap)) = restrict_view(ctx.view, &keep, he_kept) else {
                    return Vec::new();
                };
                let nodes: Vec<Label> = restricted
                    .host_nodes
                    .iter()
                    .map(|_| Label::bot()) // placeholder, replaced below
                    .collect();
                let mut node_out = nodes;
                let mut he_out: Vec<Vec<Label>> = Vec::with_capacity(restricted.fragment.len());
                for (new_h, old_h) in remap
                    .iter()
                    .enumerate()
                    .filter_map(|(old, new)| new.map(|n| (n, old)))
                    .collect::<std::collections::BTreeMap<_, _>>()
                {
                    node_out[new_h] = slice_label(&ctx.out_nodes[old_h], a1, arity, arity);
                    he_out.push(
                        ctx.out_halfedges[old_h]
                            .iter()
                            .map(|l| slice_label(l, a1, arity, arity))
                            .collect(),
                    );
                }
                let sub = ViewCtx {
                    view: &restricted,
                    out_nodes: &node_out,
                    out_halfedges: &he_out,
                };
                inner(&sub)
            }),
        });
    }

    LclProblem {
        name: format!("{} ⊗ {}", p1.name, p2.name),
        node_in: product(&p1.node_in, a1, &p2.node_in, a2),
        halfedge_in: product(&p1.halfedge_in, a1, &p2.halfedge_in, a2),
        node_out,
        halfedge_out,
        check_radius: p1.check_radius.max(p2.check_radius),
        out_arity: arity,
        rules,
    }
}

/// Composition of two certification problems, itself a certification
/// problem: good = good1 × good2; bad = bad1 × {∅} ∪ good1 × bad2.
pub fn compose_cert(p1: &CertificationLcl, p2: &CertificationLcl) -> CertificationLcl {
    let composed = compose(p1, &p2.combined());
    let (a1, a2) = (p1.out_arity, p2.out_arity);
    let good_node_out = product(&p1.good_node_out, a1, &p2.good_node_out, a2);
    let mut bad_node_out: Vec<Label> = p1
        .bad_node_out
        .iter()
        .map(|x| Label::concat(x, a1, &null_fill(a2), a2))
        .collect();
    bad_node_out.extend(product(&p1.good_node_out, a1, &p2.bad_node_out, a2));
    let good_halfedge_out = product(&p1.good_halfedge_out, a1, &p2.good_halfedge_out, a2);
    let mut bad_halfedge_out: Vec<Label> = p1
        .bad_halfedge_out
        .iter()
        .map(|x| Label::concat(x, a1, &null_fill(a2), a2))
        .collect();
    bad_halfedge_out.extend(product(&p1.good_halfedge_out, a1, &p2.bad_halfedge_out, a2));
    for x in &p1.good_halfedge_out {
        let filled = Label::concat(x, a1, &null_fill(a2), a2);
        if !bad_halfedge_out.contains(&filled) {
            bad_halfedge_out.push(filled);
        }
    }
    CertificationLcl {
        name: composed.name.clone(),
        node_in: composed.node_in,
        halfedge_in: composed.halfedge_in,
        good_node_out,
        bad_node_out,
        good_halfedge_out,
        bad_halfedge_out,
        check_radius: composed.check_radius,
        out_arity: composed.out_arity,
        rules: composed.rules,
    }
}

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("node {id} outputs {label}, outside the problem's node output alphabet")]
    AlphabetMismatchNode { id: u64, label: String },
    #[error("half-edge ({id}, port {port}) outputs {label}, outside the half-edge output alphabet")]
    AlphabetMismatchHalfEdge { id: u64, port: u32, label: String },
    #[error("labeling does not cover node {id}")]
    MissingNode { id: u64 },
    #[error("labeling does not cover half-edge ({id}, port {port})")]
    MissingHalfEdge { id: u64, port: u32 },
}

/// Check a labeling against a problem: every rule at every root, all
/// violations reported in deterministic order.
pub fn verify_solution(
    net: &Network,
    p: &LclProblem,
    out: &OutputLabeling,
) -> Result<Vec<Violation>, VerifyError> {
    let node_alpha: HashSet<&Label> = p.node_out.iter().collect();
    let he_alpha: HashSet<&Label> = p.halfedge_out.iter().collect();
    for (h, n) in net.nodes() {
        let Some(l) = out.node_out.get(h) else {
            return Err(VerifyError::MissingNode { id: n.id });
        };
        if !node_alpha.contains(l) {
            return Err(VerifyError::AlphabetMismatchNode { id: n.id, label: l.to_string() });
        }
        for port in 1..=n.host_degree {
            let Some(l) = out.halfedge_out.get(h).and_then(|v| v.get(port as usize - 1)) else {
                return Err(VerifyError::MissingHalfEdge { id: n.id, port });
            };
            if !he_alpha.contains(l) {
                return Err(VerifyError::AlphabetMismatchHalfEdge {
                    id: n.id,
                    port,
                    label: l.to_string(),
                });
            }
        }
    }
    let mut violations = Vec::new();
    for v in net.handles() {
        let view = neighborhood(net, v, p.check_radius).expect("handle in range");
        let local = out.restrict_to(&view);
        let ctx = ViewCtx {
            view: &view,
            out_nodes: &local.node_out,
            out_halfedges: &local.halfedge_out,
        };
        for rule in &p.rules {
            violations.extend((rule.eval)(&ctx));
        }
    }
    violations.sort_by(|a, b| {
        (a.witness_nodes.first(), &a.constraint_id, &a.message).cmp(&(
            b.witness_nodes.first(),
            &b.constraint_id,
            &b.message,
        ))
    });
    violations.dedup();
    Ok(violations)
}

// ---------------------------------------------------------------------------
// Labeling file format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeOutEntry {
    id: u64,
    output: Label,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HalfEdgeOutEntry {
    u_id: u64,
    u_port: u32,
    output: Label,
}

/// On-disk labeling document mirroring the instance format.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelingFile {
    nodes: Vec<NodeOutEntry>,
    halfedges: Vec<HalfEdgeOutEntry>,
}

#[derive(Debug, Error)]
pub enum LabelingFileError {
    #[error("malformed labeling file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("labeling references unknown node id {0}")]
    UnknownId(u64),
    #[error("labeling references port {port} absent at node {id}")]
    UnknownPort { id: u64, port: u32 },
    #[error("duplicate labeling entry for node {0}")]
    DuplicateNode(u64),
    #[error("duplicate labeling entry for half-edge ({id}, port {port})")]
    DuplicateHalfEdge { id: u64, port: u32 },
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

/// Parse a labeling document against its network.
pub fn labeling_from_json(net: &Network, text: &str) -> Result<OutputLabeling, LabelingFileError> {
    let doc: LabelingFile = serde_json::from_str(text)?;
    let mut node_out: Vec<Option<Label>> = vec![None; net.len()];
    let mut he_out: Vec<Vec<Option<Label>>> = net
        .nodes()
        .map(|(_, n)| vec![None; n.host_degree as usize])
        .collect();
    for e in doc.nodes {
        let h = net.handle_of_id(e.id).ok_or(LabelingFileError::UnknownId(e.id))?;
        if node_out[h].replace(e.output).is_some() {
            return Err(LabelingFileError::DuplicateNode(e.id));
        }
    }
    for e in doc.halfedges {
        let h = net.handle_of_id(e.u_id).ok_or(LabelingFileError::UnknownId(e.u_id))?;
        if e.u_port == 0 || e.u_port > net.node(h).host_degree {
            return Err(LabelingFileError::UnknownPort { id: e.u_id, port: e.u_port });
        }
        if he_out[h][e.u_port as usize - 1].replace(e.output).is_some() {
            return Err(LabelingFileError::DuplicateHalfEdge { id: e.u_id, port: e.u_port });
        }
    }
    let mut nodes = Vec::with_capacity(net.len());
    for (h, n) in net.nodes() {
        nodes.push(node_out[h].take().ok_or(VerifyError::MissingNode { id: n.id })?);
    }
    let mut hes = Vec::with_capacity(net.len());
    for (h, n) in net.nodes() {
        let mut row = Vec::with_capacity(n.host_degree as usize);
        for port in 1..=n.host_degree {
            row.push(
                he_out[h][port as usize - 1]
                    .take()
                    .ok_or(VerifyError::MissingHalfEdge { id: n.id, port })?,
            );
        }
        hes.push(row);
    }
    Ok(OutputLabeling { node_out: nodes, halfedge_out: hes })
}

/// Serialize a labeling (nodes in id order, half-edges by (id, port)).
pub fn labeling_to_json(net: &Network, out: &OutputLabeling) -> String {
    let mut nodes: Vec<NodeOutEntry> = net
        .nodes()
        .map(|(h, n)| NodeOutEntry { id: n.id, output: out.node_out[h].clone() })
        .collect();
    nodes.sort_by_key(|e| e.id);
    let mut halfedges: Vec<HalfEdgeOutEntry> = Vec::new();
    for (h, n) in net.nodes() {
        for port in 1..=n.host_degree {
            halfedges.push(HalfEdgeOutEntry {
                u_id: n.id,
                u_port: port,
                output: out.halfedge_out[h][port as usize - 1].clone(),
            });
        }
    }
    halfedges.sort_by_key(|e| (e.u_id, e.u_port));
    let doc = LabelingFile { nodes, halfedges };
    let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{EdgeSpec, NodeSpec};

    fn sym_net(inputs: &[&str], edges: Vec<(u64, u32, u64, u32, &str, &str)>) -> Network {
        let nodes = inputs
            .iter()
            .enumerate()
            .map(|(i, s)| NodeSpec { id: i as u64 + 1, input: Label::sym(*s) })
            .collect();
        let edges = edges
            .into_iter()
            .map(|(u, up, v, vp, ui, vi)| EdgeSpec {
                u_id: u,
                u_port: up,
                v_id: v,
                v_port: vp,
                u_halfedge_input: Label::sym(ui),
                v_halfedge_input: Label::sym(vi),
            })
            .collect();
        Network::build(nodes, edges).unwrap()
    }

    #[test]
    fn follow_empty_path_is_identity() {
        let net = sym_net(&["a"], vec![]);
        let view = neighborhood(&net, 0, 2).unwrap();
        let out = OutputLabeling::uniform(&net, Label::bot(), Label::bot());
        let local = out.restrict_to(&view);
        let ctx = ViewCtx { view: &view, out_nodes: &local.node_out, out_halfedges: &local.halfedge_out };
        assert_eq!(ctx.follow(0, &[]), Some(0));
    }

    #[test]
    fn follow_ambiguous_is_none() {
        // Star with two R-labeled half-edges at the center.
        let net = sym_net(
            &["a", "a", "a"],
            vec![(1, 1, 2, 1, "R", "x"), (1, 2, 3, 1, "R", "x")],
        );
        let view = neighborhood(&net, 0, 2).unwrap();
        let out = OutputLabeling::uniform(&net, Label::bot(), Label::bot());
        let local = out.restrict_to(&view);
        let ctx = ViewCtx { view: &view, out_nodes: &local.node_out, out_halfedges: &local.halfedge_out };
        assert_eq!(ctx.follow(0, &[(0, "R")]), None);
    }

    #[test]
    fn follow_two_steps() {
        let net = sym_net(
            &["a", "a", "a"],
            vec![(1, 1, 2, 1, "P", "x"), (2, 2, 3, 1, "R", "y")],
        );
        let view = neighborhood(&net, 0, 3).unwrap();
        let out = OutputLabeling::uniform(&net, Label::bot(), Label::bot());
        let local = out.restrict_to(&view);
        let ctx = ViewCtx { view: &view, out_nodes: &local.node_out, out_halfedges: &local.halfedge_out };
        assert_eq!(ctx.follow(0, &[(0, "P"), (0, "R")]), Some(2));
    }

    /// Toy certification problem: nodes with input `g` must output `ok`
    /// (good) and nodes with input `b` must output `no` (bad).
    fn toy_cert() -> CertificationLcl {
        CertificationLcl {
            name: "toy".into(),
            node_in: vec![Label::sym("g"), Label::sym("b")],
            halfedge_in: vec![Label::bot()],
            good_node_out: vec![Label::sym("ok")],
            bad_node_out: vec![Label::sym("no")],
            good_halfedge_out: vec![Label::bot()],
            bad_halfedge_out: vec![Label::bot()],
            check_radius: 1,
            out_arity: 1,
            rules: vec![Rule::new("toy.1", "output matches input side", |ctx| {
                let h = ctx.root();
                let want = if ctx.in_node(h, 0).is("g") { "ok" } else { "no" };
                if !ctx.out_node(h).is(want) {
                    vec![Violation::new("toy.1", vec![ctx.id(h)], "side mismatch")]
                } else {
                    vec![]
                }
            })],
        }
    }

    #[test]
    fn compose_with_trivial_tracks_left_side() {
        let p1 = toy_cert();
        let p2 = LclProblem::trivial(vec![Label::bot()], vec![Label::bot()]);
        let c = compose(&p1, &p2);
        assert_eq!(c.out_arity, 2);
        let net = sym_net(&["g", "b"], vec![(1, 1, 2, 1, "⊥", "⊥")]);
        // Inputs must be 2-tuples under the composed problem.
        let net = {
            let nodes = vec![
                NodeSpec { id: 1, input: Label::tuple([Label::sym("g"), Label::bot()]) },
                NodeSpec { id: 2, input: Label::tuple([Label::sym("b"), Label::bot()]) },
            ];
            let edges = vec![EdgeSpec {
                u_id: 1,
                u_port: 1,
                v_id: 2,
                v_port: 1,
                u_halfedge_input: Label::tuple([Label::bot(), Label::bot()]),
                v_halfedge_input: Label::tuple([Label::bot(), Label::bot()]),
            }];
            drop(net);
            Network::build(nodes, edges).unwrap()
        };
        let good_then_real = Label::tuple([Label::sym("ok"), Label::bot()]);
        let bad_then_null = Label::tuple([Label::sym("no"), Label::null()]);
        let he = Label::tuple([Label::bot(), Label::bot()]);
        let out = OutputLabeling {
            node_out: vec![good_then_real.clone(), bad_then_null.clone()],
            halfedge_out: vec![vec![he.clone()], vec![he.clone()]],
        };
        assert!(verify_solution(&net, &c, &out).unwrap().is_empty());

        // good left + ∅ right is excluded by the composed alphabet itself.
        let out2 = OutputLabeling {
            node_out: vec![Label::tuple([Label::sym("ok"), Label::null()]), bad_then_null],
            halfedge_out: vec![vec![he.clone()], vec![he.clone()]],
        };
        assert!(matches!(
            verify_solution(&net, &c, &out2),
            Err(VerifyError::AlphabetMismatchNode { .. })
        ));

        // bad left + real right is likewise outside the composed alphabet.
        let out3 = OutputLabeling {
            node_out: vec![good_then_real, Label::tuple([Label::sym("no"), Label::bot()])],
            halfedge_out: vec![vec![he.clone()], vec![he]],
        };
        assert!(matches!(
            verify_solution(&net, &c, &out3),
            Err(VerifyError::AlphabetMismatchNode { .. })
        ));
    }

    #[test]
    fn alphabet_mismatch_detected() {
        let p = toy_cert().combined();
        let net = sym_net(&["g"], vec![]);
        let out = OutputLabeling::uniform(&net, Label::sym("weird"), Label::bot());
        assert!(matches!(
            verify_solution(&net, &p, &out),
            Err(VerifyError::AlphabetMismatchNode { .. })
        ));
    }
}
