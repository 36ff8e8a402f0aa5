//! The nine constraint sets of the layered certification problem: perfect
//! trees, rows, growing grids, machine execution, and consensus, each with
//! its good and (where applicable) bad side.
//!
//! Composed instances stack one input component per layer; rules address
//! those components by absolute slot. Checks are written as input-side
//! predicates shared between the good-side rules (which guard on a ⊥
//! output) and the bad-side rules (which ask whether a node "violates a
//! good constraint").

use std::sync::Arc;

use crate::label::Label;
use crate::lcl::{compose, compose_cert, CertificationLcl, LclProblem, Rule, ViewCtx, Violation};
use crate::network::{HalfEdge, NodeHandle};
use crate::turing::{Move, TuringMachine};

/// Input slot carrying the tree-layer labels.
pub const TREE: usize = 0;
/// Input slot carrying the row-layer labels.
pub const ROW: usize = 1;
/// Input slot carrying the grid-layer labels.
pub const GRID: usize = 2;
/// Input slot carrying the machine-layer labels.
pub const TUR: usize = 3;
/// Input slot carrying the consensus-layer labels.
pub const CONS: usize = 4;

/// Head marker in machine-layer node triples.
pub const HEAD: &str = "H";
/// Quiescent member of the head/state alphabets.
pub const BOT_T: &str = "⊥_T";
/// Bad-side node marker for the tree, grid and machine layers.
pub const ERROR: &str = "Error";
/// Bad-side node marker for the row layer.
pub const ERROR_ROW: &str = "error";
/// Inert bad-side half-edge filler (edges a bad region's rules never
/// discuss: attachment, column and tree edges).
pub const CROSS: &str = "✗";
/// Bad-machine half-edge labels: error-pointer in and out.
pub const I_E: &str = "I_E";
pub const O_E: &str = "O_E";
/// Machine-layer half-edge inputs: head-pointer in and out.
pub const I_H: &str = "I_H";
pub const O_H: &str = "O_H";
pub const ACCEPT: &str = "accept";
pub const REJECT: &str = "reject";

/// `(pointer, p)` output label.
pub fn pointer(p: &str) -> Label {
    Label::tuple([Label::sym("pointer"), Label::sym(p)])
}

/// The `p` of a `(pointer, p)` label, if the label is one.
pub fn as_pointer(l: &Label) -> Option<&str> {
    match l {
        Label::Tuple(parts) if parts.len() == 2 && parts[0].is("pointer") => match &parts[1] {
            Label::Sym(s) => Some(&**s),
            _ => None,
        },
        _ => None,
    }
}

/// Machine-layer node input triple `(b, h, q)`.
pub fn triple(b: &str, h: &str, q: &str) -> Label {
    Label::tuple([Label::sym(b), Label::sym(h), Label::sym(q)])
}

/// Decompose a machine-layer triple; `None` when the slot holds anything
/// else (absent layers read as ⊥).
pub fn turing_triple<'a>(ctx: &'a ViewCtx, h: NodeHandle) -> Option<(&'a Label, &'a Label, &'a Label)> {
    match ctx.in_node(h, TUR) {
        Label::Tuple(p) if p.len() == 3 => Some((&p[0], &p[1], &p[2])),
        _ => None,
    }
}

/// Node type (`T` or `G`), always carried by the first slot.
fn type_is(ctx: &ViewCtx, h: NodeHandle, sym: &str) -> bool {
    ctx.in_node(h, TREE).is(sym)
}

/// The unique present edge at `h` whose input `slot` carries `sym`;
/// `None` when absent or ambiguous.
fn unique_edge<'a>(ctx: &'a ViewCtx, h: NodeHandle, slot: usize, sym: &str) -> Option<(u32, &'a HalfEdge)> {
    let es = ctx.edges_with(h, slot, sym);
    match es.as_slice() {
        [one] => Some(*one),
        _ => None,
    }
}

/// Far-side input label of a present half-edge.
fn far_label<'a>(ctx: &'a ViewCtx, he: &HalfEdge, slot: usize) -> &'a Label {
    ctx.in_he(he.neighbor, he.neighbor_port, slot)
        .expect("present edge has a far side")
}

/// One input-side check shared between good-side rules and the bad-side
/// "violates a good constraint" tests.
#[derive(Clone)]
pub struct NamedCheck {
    pub id: &'static str,
    pub title: &'static str,
    pub check: Arc<dyn Fn(&ViewCtx, NodeHandle) -> Vec<Violation> + Send + Sync>,
}

impl NamedCheck {
    fn new(
        id: &'static str,
        title: &'static str,
        check: impl Fn(&ViewCtx, NodeHandle) -> Vec<Violation> + Send + Sync + 'static,
    ) -> Self {
        NamedCheck { id, title, check: Arc::new(check) }
    }
}

/// Does `h` violate any of the given checks?
pub fn violates_any(checks: &[NamedCheck], ctx: &ViewCtx, h: NodeHandle) -> bool {
    checks.iter().any(|c| !(c.check)(ctx, h).is_empty())
}

/// Wrap input-side checks as good-side rules: they bind exactly the nodes
/// whose layer output is ⊥.
fn good_rules(checks: &[NamedCheck]) -> Vec<Rule> {
    checks
        .iter()
        .map(|nc| {
            let check = nc.check.clone();
            Rule::new(nc.id, nc.title, move |ctx| {
                let h = ctx.root();
                if !ctx.out_node(h).is_bot() {
                    return Vec::new();
                }
                check(ctx, h)
            })
        })
        .collect()
}

fn viol(id: &'static str, ctx: &ViewCtx, nodes: &[NodeHandle], msg: impl Into<String>) -> Violation {
    let mut ids: Vec<u64> = nodes.iter().map(|&h| ctx.id(h)).collect();
    ids.sort_unstable();
    ids.dedup();
    Violation::new(id, ids, msg)
}

// ---------------------------------------------------------------------------
// Tree layer
// ---------------------------------------------------------------------------

/// Input-side checks of the good tree box (apply to `T`-typed nodes).
pub fn good_tree_checks() -> Vec<NamedCheck> {
    let mut v = Vec::new();
    v.push(NamedCheck::new(
        "goodTree.1",
        "no two incident edges share a label",
        |ctx, h| {
            if !type_is(ctx, h, "T") {
                return Vec::new();
            }
            let mut seen: Vec<&Label> = Vec::new();
            let mut out = Vec::new();
            for (port, _) in ctx.node(h).edges() {
                let l = ctx.in_he(h, port, TREE).unwrap();
                if l.is_bot() {
                    continue;
                }
                if seen.contains(&l) {
                    out.push(viol(
                        "goodTree.1",
                        ctx,
                        &[h],
                        format!("two incident edges carry the tree label {l}"),
                    ));
                } else {
                    seen.push(l);
                }
            }
            out
        },
    ));
    v.push(NamedCheck::new(
        "goodTree.2",
        "L on one side pairs with R on the other",
        |ctx, h| {
            if !type_is(ctx, h, "T") {
                return Vec::new();
            }
            let mut out = Vec::new();
            for (port, he) in ctx.node(h).edges() {
                let a = ctx.in_he(h, port, TREE).unwrap();
                let b = far_label(ctx, he, TREE);
                if (a.is("L") && !b.is("R")) || (a.is("R") && !b.is("L")) {
                    out.push(viol(
                        "goodTree.2",
                        ctx,
                        &[h, he.neighbor],
                        format!("edge labeled {a} here carries {b} on the far side"),
                    ));
                }
            }
            out
        },
    ));
    v.push(NamedCheck::new(
        "goodTree.3",
        "P on one side pairs with a child label on the other",
        |ctx, h| {
            if !type_is(ctx, h, "T") {
                return Vec::new();
            }
            let mut out = Vec::new();
            for (port, he) in ctx.node(h).edges() {
                let a = ctx.in_he(h, port, TREE).unwrap();
                let b = far_label(ctx, he, TREE);
                let bad = (a.is("P") && !(b.is("Ch_L") || b.is("Ch_R")))
                    || ((a.is("Ch_L") || a.is("Ch_R")) && !b.is("P"));
                if bad {
                    out.push(viol(
                        "goodTree.3",
                        ctx,
                        &[h, he.neighbor],
                        format!("edge labeled {a} here carries {b} on the far side"),
                    ));
                }
            }
            out
        },
    ));
    v.push(NamedCheck::new(
        "goodTree.4",
        "a left child closes the cycle parent → right child → west",
        |ctx, h| {
            if !type_is(ctx, h, "T") {
                return Vec::new();
            }
            let is_left_child = ctx.node(h).edges().any(|(port, he)| {
                ctx.in_he(h, port, TREE).unwrap().is("P") && far_label(ctx, he, TREE).is("Ch_L")
            });
            if is_left_child
                && ctx.follow(h, &[(TREE, "P"), (TREE, "Ch_R"), (TREE, "L")]) != Some(h)
            {
                return vec![viol(
                    "goodTree.4",
                    ctx,
                    &[h],
                    "walk P, Ch_R, L does not return to this left child",
                )];
            }
            Vec::new()
        },
    ));
    v.push(NamedCheck::new(
        "goodTree.5",
        "a right child with an east sibling closes the 4-cycle through the parent's right neighbor",
        |ctx, h| {
            if !type_is(ctx, h, "T") {
                return Vec::new();
            }
            let is_right_child = ctx.node(h).edges().any(|(port, he)| {
                ctx.in_he(h, port, TREE).unwrap().is("P") && far_label(ctx, he, TREE).is("Ch_R")
            });
            if is_right_child
                && ctx.has_he(h, TREE, "R")
                && ctx.follow(h, &[(TREE, "P"), (TREE, "R"), (TREE, "Ch_L"), (TREE, "L")])
                    != Some(h)
            {
                return vec![viol(
                    "goodTree.5",
                    ctx,
                    &[h],
                    "walk P, R, Ch_L, L does not return to this right child",
                )];
            }
            Vec::new()
        },
    ));
    v.push(NamedCheck::new(
        "goodTree.6",
        "children come in pairs: Ch_L iff Ch_R",
        |ctx, h| {
            if !type_is(ctx, h, "T") {
                return Vec::new();
            }
            let l = ctx.has_he(h, TREE, "Ch_L");
            let r = ctx.has_he(h, TREE, "Ch_R");
            if l != r {
                return vec![viol(
                    "goodTree.6",
                    ctx,
                    &[h],
                    format!("has Ch_L: {l}, has Ch_R: {r}"),
                )];
            }
            Vec::new()
        },
    ));
    v.push(NamedCheck::new(
        "goodTree.7",
        "only the root lacks P, and only the root lacks L and R",
        |ctx, h| {
            if !type_is(ctx, h, "T") {
                return Vec::new();
            }
            let no_p = !ctx.has_he(h, TREE, "P");
            let no_lr = !ctx.has_he(h, TREE, "L") && !ctx.has_he(h, TREE, "R");
            if no_p != no_lr {
                return vec![viol(
                    "goodTree.7",
                    ctx,
                    &[h],
                    format!("lacks P: {no_p}, lacks both L and R: {no_lr}"),
                )];
            }
            Vec::new()
        },
    ));
    v.push(NamedCheck::new(
        "goodTree.8",
        "leaves only neighbor leaves horizontally, and carry at most one attachment",
        |ctx, h| {
            if !type_is(ctx, h, "T") {
                return Vec::new();
            }
            let is_leaf =
                !ctx.has_he(h, TREE, "Ch_L") && !ctx.has_he(h, TREE, "Ch_R");
            if !is_leaf {
                return Vec::new();
            }
            let mut out = Vec::new();
            for dir in ["L", "R"] {
                if let Some(n) = ctx.follow(h, &[(TREE, dir)]) {
                    if ctx.has_he(n, TREE, "Ch_L") || ctx.has_he(n, TREE, "Ch_R") {
                        out.push(viol(
                            "goodTree.8",
                            ctx,
                            &[h, n],
                            format!("leaf's {dir}-neighbor has children"),
                        ));
                    }
                }
            }
            if ctx.count_he(h, ROW, "Ch") > 1 {
                out.push(viol("goodTree.8", ctx, &[h], "leaf has more than one Ch attachment"));
            }
            out
        },
    ));
    v.push(NamedCheck::new(
        "goodTree.9",
        "a child has an outer sibling edge iff its parent does",
        |ctx, h| {
            if !type_is(ctx, h, "T") {
                return Vec::new();
            }
            let mut out = Vec::new();
            for (side, dir) in [("Ch_R", "R"), ("Ch_L", "L")] {
                let is_child = ctx.node(h).edges().any(|(port, he)| {
                    ctx.in_he(h, port, TREE).unwrap().is("P") && far_label(ctx, he, TREE).is(side)
                });
                if !is_child {
                    continue;
                }
                let Some(parent) = ctx.follow(h, &[(TREE, "P")]) else { continue };
                let mine = ctx.has_he(h, TREE, dir);
                let parents = ctx.has_he(parent, TREE, dir);
                if mine != parents {
                    out.push(viol(
                        "goodTree.9",
                        ctx,
                        &[h, parent],
                        format!("{side} child has {dir}: {mine}, parent has {dir}: {parents}"),
                    ));
                }
            }
            out
        },
    ));
    v
}

/// Bad-side rule triple shared by the tree, row and grid layers: error only
/// at real violations, pointers along existing edges, transitions per the
/// layer's table.
struct PointerLayer {
    prefix: &'static str,
    error_sym: &'static str,
    /// Node type the bad side binds (`None` = every node). Nodes outside
    /// the scope are quiescent: any output satisfies the layer.
    scope: Option<&'static str>,
    /// Input slot a pointer symbol routes over.
    slot_of_ptr: fn(&str) -> usize,
    /// Allowed target pointer symbols (`None` = any).
    transition: fn(&str, &str) -> bool,
    checks: Vec<NamedCheck>,
}

fn pointer_rules(layer: PointerLayer) -> Vec<Rule> {
    let PointerLayer { prefix, error_sym, scope, slot_of_ptr, transition, checks } = layer;
    let in_scope = move |ctx: &ViewCtx, h: NodeHandle| match scope {
        Some(ty) => type_is(ctx, h, ty),
        None => true,
    };
    let mut rules = Vec::new();
    {
        let checks = checks.clone();
        let id: &'static str = Box::leak(format!("{prefix}.1").into_boxed_str());
        rules.push(Rule::new(id, "error only where a good constraint fails", move |ctx| {
            let h = ctx.root();
            if in_scope(ctx, h) && ctx.out_node(h).is(error_sym) && !violates_any(&checks, ctx, h) {
                return vec![viol(
                    id,
                    ctx,
                    &[h],
                    "node outputs the error marker but satisfies every good constraint",
                )];
            }
            Vec::new()
        }));
    }
    {
        let id: &'static str = Box::leak(format!("{prefix}.2").into_boxed_str());
        rules.push(Rule::new(id, "pointers follow an existing edge label", move |ctx| {
            let h = ctx.root();
            if !in_scope(ctx, h) {
                return Vec::new();
            }
            let Some(p) = as_pointer(ctx.out_node(h)).map(str::to_owned) else {
                return Vec::new();
            };
            if !ctx.has_he(h, slot_of_ptr(&p), &p) {
                return vec![viol(
                    id,
                    ctx,
                    &[h],
                    format!("pointer {p} has no incident {p}-labeled edge"),
                )];
            }
            Vec::new()
        }));
    }
    {
        let id: &'static str = Box::leak(format!("{prefix}.3").into_boxed_str());
        rules.push(Rule::new(
            id,
            "pointer targets are errors or continue the chain",
            move |ctx| {
                let h = ctx.root();
                if !in_scope(ctx, h) {
                    return Vec::new();
                }
                let Some(p) = as_pointer(ctx.out_node(h)).map(str::to_owned) else {
                    return Vec::new();
                };
                let Some(target) = ctx.follow(h, &[(slot_of_ptr(&p), &p)]) else {
                    // Rule 2 reports a missing edge; an ambiguous edge set
                    // leaves the target undefined, which we flag here.
                    if ctx.count_he(h, slot_of_ptr(&p), &p) > 1 {
                        return vec![viol(id, ctx, &[h], format!("pointer {p} target is ambiguous"))];
                    }
                    return Vec::new();
                };
                let t = ctx.out_node(target);
                if t.is(error_sym) {
                    return Vec::new();
                }
                match as_pointer(t) {
                    Some(p2) if transition(&p, p2) => Vec::new(),
                    Some(p2) => vec![viol(
                        id,
                        ctx,
                        &[h, target],
                        format!("pointer {p} may not continue as {p2}"),
                    )],
                    None => vec![viol(
                        id,
                        ctx,
                        &[h, target],
                        format!("pointer {p} targets a node outputting {t}"),
                    )],
                }
            },
        ));
    }
    rules
}

/// Certification problem for perfect tree levels.
pub fn pi_tree() -> CertificationLcl {
    let checks = good_tree_checks();
    let mut rules = good_rules(&checks);
    rules.extend(pointer_rules(PointerLayer {
        prefix: "badTree",
        error_sym: ERROR,
        scope: Some("T"),
        slot_of_ptr: |_| TREE,
        transition: |p, p2| match p {
            "L" | "R" => p2 == p,
            "P" => matches!(p2, "P" | "L" | "R"),
            "Ch_R" => matches!(p2, "Ch_R" | "L" | "R"),
            _ => true, // the box lists no case for Ch_L
        },
        checks,
    }));
    CertificationLcl {
        name: "tree".into(),
        node_in: vec![Label::sym("T"), Label::sym("G")],
        halfedge_in: ["Ch_L", "Ch_R", "P", "L", "R"]
            .into_iter()
            .map(Label::sym)
            .chain([Label::bot()])
            .collect(),
        good_node_out: vec![Label::bot()],
        bad_node_out: [Label::sym(ERROR)]
            .into_iter()
            .chain(["L", "R", "P", "Ch_L", "Ch_R"].into_iter().map(pointer))
            .collect(),
        good_halfedge_out: vec![Label::bot()],
        bad_halfedge_out: vec![Label::sym(CROSS)],
        check_radius: 6,
        out_arity: 1,
        rules,
    }
}

// ---------------------------------------------------------------------------
// Row layer
// ---------------------------------------------------------------------------

/// Input-side checks of the good row box.
pub fn good_row_checks() -> Vec<NamedCheck> {
    let mut v = Vec::new();
    v.push(NamedCheck::new(
        "goodRow.1",
        "(cross-layer) tree nodes satisfy the good tree box — enforced by composition",
        |_, _| Vec::new(),
    ));
    v.push(NamedCheck::new(
        "goodRow.2",
        "grid nodes have at most one E, at most one W, exactly one P",
        |ctx, h| {
            if !type_is(ctx, h, "G") {
                return Vec::new();
            }
            let mut out = Vec::new();
            for (sym, max) in [("E", 1), ("W", 1)] {
                if ctx.count_he(h, ROW, sym) > max {
                    out.push(viol("goodRow.2", ctx, &[h], format!("more than one {sym} half-edge")));
                }
            }
            let p = ctx.count_he(h, ROW, "P");
            if p != 1 {
                out.push(viol("goodRow.2", ctx, &[h], format!("{p} P half-edges, expected exactly one")));
            }
            out
        },
    ));
    v.push(NamedCheck::new(
        "goodRow.3",
        "tree nodes have at most one Ch",
        |ctx, h| {
            if !type_is(ctx, h, "T") {
                return Vec::new();
            }
            if ctx.count_he(h, ROW, "Ch") > 1 {
                return vec![viol("goodRow.3", ctx, &[h], "more than one Ch half-edge")];
            }
            Vec::new()
        },
    ));
    v.push(NamedCheck::new(
        "goodRow.4",
        "every grid node attaches to a childless tree leaf",
        |ctx, h| {
            if !type_is(ctx, h, "G") {
                return Vec::new();
            }
            let ok = ctx.node(h).edges().any(|(port, he)| {
                ctx.in_he(h, port, ROW).unwrap().is("P")
                    && far_label(ctx, he, ROW).is("Ch")
                    && type_is(ctx, he.neighbor, "T")
                    && !ctx.has_he(he.neighbor, TREE, "Ch_L")
                    && !ctx.has_he(he.neighbor, TREE, "Ch_R")
            });
            if !ok {
                return vec![viol(
                    "goodRow.4",
                    ctx,
                    &[h],
                    "no P/Ch attachment to a childless tree leaf",
                )];
            }
            Vec::new()
        },
    ));
    v.push(NamedCheck::new(
        "goodRow.5",
        "a grid node under a leaf with an east sibling has an east neighbor and closes a 4- or 5-cycle",
        |ctx, h| {
            if !type_is(ctx, h, "G") {
                return Vec::new();
            }
            let premise = ctx
                .node(h)
                .edges()
                .any(|(_, he)| ctx.has_he(he.neighbor, TREE, "R"));
            if !premise {
                return Vec::new();
            }
            let mut out = Vec::new();
            if !ctx.has_he(h, ROW, "E") {
                out.push(viol("goodRow.5", ctx, &[h], "no E half-edge despite the leaf's east sibling"));
            }
            let four = ctx.follow(h, &[(ROW, "P"), (TREE, "R"), (ROW, "Ch"), (ROW, "W")]);
            let five =
                ctx.follow(h, &[(ROW, "P"), (TREE, "R"), (TREE, "R"), (ROW, "Ch"), (ROW, "W")]);
            if four != Some(h) && five != Some(h) {
                out.push(viol(
                    "goodRow.5",
                    ctx,
                    &[h],
                    "neither the 4-cycle nor the 5-cycle through the tree returns here",
                ));
            }
            out
        },
    ));
    v.push(NamedCheck::new(
        "goodRow.6",
        "a grid node has W iff its parent has L",
        |ctx, h| row_parent_iff(ctx, h, "goodRow.6", "W", "L"),
    ));
    v.push(NamedCheck::new(
        "goodRow.7",
        "a grid node has E iff its parent has R",
        |ctx, h| row_parent_iff(ctx, h, "goodRow.7", "E", "R"),
    ));
    v
}

fn row_parent_iff(
    ctx: &ViewCtx,
    h: NodeHandle,
    id: &'static str,
    row_sym: &str,
    tree_sym: &str,
) -> Vec<Violation> {
    if !type_is(ctx, h, "G") {
        return Vec::new();
    }
    let Some(parent) = ctx.follow(h, &[(ROW, "P")]) else {
        return Vec::new(); // rule 2 reports a missing/ambiguous parent
    };
    let mine = ctx.has_he(h, ROW, row_sym);
    let parents = ctx.has_he(parent, TREE, tree_sym);
    if mine != parents {
        return vec![viol(
            id,
            ctx,
            &[h, parent],
            format!("has {row_sym}: {mine}, parent has {tree_sym}: {parents}"),
        )];
    }
    Vec::new()
}

/// Certification problem for rows hanging under tree leaves.
pub fn pi_row() -> CertificationLcl {
    let checks = good_row_checks();
    let mut rules = good_rules(&checks);
    rules.extend(pointer_rules(PointerLayer {
        prefix: "badRow",
        error_sym: ERROR_ROW,
        scope: None,
        slot_of_ptr: |_| ROW,
        transition: |p, p2| match p {
            "E" | "W" => p2 == p,
            _ => true,
        },
        checks,
    }));
    CertificationLcl {
        name: "row".into(),
        node_in: vec![Label::sym("T"), Label::sym("G")],
        halfedge_in: ["P", "Ch", "E", "W"]
            .into_iter()
            .map(Label::sym)
            .chain([Label::bot()])
            .collect(),
        good_node_out: vec![Label::bot()],
        bad_node_out: [Label::sym(ERROR_ROW)]
            .into_iter()
            .chain(["E", "W"].into_iter().map(pointer))
            .collect(),
        good_halfedge_out: vec![Label::bot()],
        bad_halfedge_out: vec![Label::sym(CROSS)],
        check_radius: 6,
        out_arity: 1,
        rules,
    }
}

// ---------------------------------------------------------------------------
// Grid layer
// ---------------------------------------------------------------------------

/// Input-side checks of the good grid box.
pub fn good_grid_checks() -> Vec<NamedCheck> {
    let mut v = Vec::new();
    v.push(NamedCheck::new(
        "goodGrid.1",
        "(cross-layer) tree and row boxes hold — enforced by composition",
        |_, _| Vec::new(),
    ));
    v.push(NamedCheck::new(
        "goodGrid.2",
        "east neighbors agree on having a southern row",
        |ctx, h| {
            let mut out = Vec::new();
            for (port, he) in ctx.node(h).edges() {
                if !ctx.in_he(h, port, GRID).unwrap().is("E") {
                    continue;
                }
                let mine = ctx.has_he(h, GRID, "S");
                let theirs = ctx.has_he(he.neighbor, GRID, "S");
                if mine != theirs {
                    out.push(viol(
                        "goodGrid.2",
                        ctx,
                        &[h, he.neighbor],
                        format!("has S: {mine}, east neighbor has S: {theirs}"),
                    ));
                }
            }
            out
        },
    ));
    v.push(NamedCheck::new(
        "goodGrid.3",
        "east then south then west then north returns (squares close)",
        |ctx, h| {
            // Conditioned on an S half-edge: the bottom row has E edges but
            // nothing below, and the cycle is only meaningful above it.
            if !ctx.has_he(h, GRID, "E") || !ctx.has_he(h, GRID, "S") {
                return Vec::new();
            }
            if ctx.follow(h, &[(GRID, "E"), (GRID, "S"), (GRID, "W"), (GRID, "N")]) != Some(h) {
                return vec![viol(
                    "goodGrid.3",
                    ctx,
                    &[h],
                    "walk E, S, W, N does not return to this node",
                )];
            }
            Vec::new()
        },
    ));
    v.push(NamedCheck::new(
        "goodGrid.4",
        "only row ends lack E, and they also lack N (the grid grows)",
        |ctx, h| {
            if !ctx.has_he(h, GRID, "E") && ctx.has_he(h, GRID, "N") {
                return vec![viol("goodGrid.4", ctx, &[h], "node with N but no E half-edge")];
            }
            Vec::new()
        },
    ));
    v
}

/// Certification problem for the growing grid.
pub fn pi_grid() -> CertificationLcl {
    let checks = good_grid_checks();
    let mut rules = good_rules(&checks);
    rules.extend(pointer_rules(PointerLayer {
        prefix: "badGrid",
        error_sym: ERROR,
        scope: None,
        slot_of_ptr: |p| match p {
            "E" | "W" | "N" | "S" => GRID,
            "P" | "Ch" => ROW,
            _ => TREE,
        },
        transition: |p, p2| match p {
            "E" | "W" => p2 == p,
            _ => true,
        },
        checks,
    }));
    CertificationLcl {
        name: "grid".into(),
        node_in: vec![Label::sym("G")],
        halfedge_in: ["W", "E", "N", "S"]
            .into_iter()
            .map(Label::sym)
            .chain([Label::bot()])
            .collect(),
        good_node_out: vec![Label::bot()],
        bad_node_out: [Label::sym(ERROR)]
            .into_iter()
            .chain(
                ["L", "R", "Ch_L", "Ch_R", "E", "W", "P", "Ch"]
                    .into_iter()
                    .map(pointer),
            )
            .collect(),
        good_halfedge_out: vec![Label::bot()],
        bad_halfedge_out: vec![Label::sym(CROSS)],
        check_radius: 6,
        out_arity: 1,
        rules,
    }
}

// ---------------------------------------------------------------------------
// Machine layer
// ---------------------------------------------------------------------------

/// The row-west and row-east edges of a node (unique, by grid labels).
fn row_edges<'a>(
    ctx: &'a ViewCtx,
    h: NodeHandle,
) -> (Option<(u32, &'a HalfEdge)>, Option<(u32, &'a HalfEdge)>) {
    (unique_edge(ctx, h, GRID, "W"), unique_edge(ctx, h, GRID, "E"))
}

/// Input-side checks of the good machine box against a concrete machine.
pub fn good_turing_checks(tm: &TuringMachine) -> Vec<NamedCheck> {
    let tm = Arc::new(tm.clone());
    let mut v = Vec::new();
    v.push(NamedCheck::new(
        "goodTuring.1a",
        "the neighbors point toward the head",
        |ctx, h| {
            let Some((_, hd, _)) = turing_triple(ctx, h) else { return Vec::new() };
            if !hd.is(HEAD) {
                return Vec::new();
            }
            let (w, e) = row_edges(ctx, h);
            let mut out = Vec::new();
            for (port, he) in [w, e].into_iter().flatten() {
                let mine = ctx.in_he(h, port, TUR).unwrap();
                let far = far_label(ctx, he, TUR);
                if !mine.is(I_H) || !far.is(O_H) {
                    out.push(viol(
                        "goodTuring.1a",
                        ctx,
                        &[h, he.neighbor],
                        format!("head edge carries {mine}/{far}, expected I_H here and O_H there"),
                    ));
                }
            }
            out
        },
    ));
    v.push(NamedCheck::new(
        "goodTuring.1b",
        "the west end points east if it is not the head",
        |ctx, h| turing_end_check(ctx, h, "goodTuring.1b", /*west_end=*/ true),
    ));
    v.push(NamedCheck::new(
        "goodTuring.1c",
        "the east end points west if it is not the head",
        |ctx, h| turing_end_check(ctx, h, "goodTuring.1c", /*west_end=*/ false),
    ));
    v.push(NamedCheck::new(
        "goodTuring.1d",
        "head pointers propagate eastward",
        |ctx, h| turing_chain_check(ctx, h, "goodTuring.1d", /*from_west=*/ true),
    ));
    v.push(NamedCheck::new(
        "goodTuring.1e",
        "head pointers propagate westward",
        |ctx, h| turing_chain_check(ctx, h, "goodTuring.1e", /*from_west=*/ false),
    ));
    v.push(NamedCheck::new(
        "goodTuring.1f",
        "only the head absorbs pointers from both sides",
        |ctx, h| {
            let Some((_, hd, _)) = turing_triple(ctx, h) else { return Vec::new() };
            if hd.is(HEAD) {
                return Vec::new();
            }
            let (w, e) = row_edges(ctx, h);
            if let (Some((wp, _)), Some((ep, _))) = (w, e) {
                if ctx.in_he(h, wp, TUR).unwrap().is(I_H) && ctx.in_he(h, ep, TUR).unwrap().is(I_H)
                {
                    return vec![viol(
                        "goodTuring.1f",
                        ctx,
                        &[h],
                        "headless node carries I_H on both its row half-edges",
                    )];
                }
            }
            Vec::new()
        },
    ));
    v.push(NamedCheck::new(
        "goodTuring.2",
        "exactly the head carries a state",
        {
            let tm = tm.clone();
            move |ctx, h| {
                let Some((_, hd, q)) = turing_triple(ctx, h) else { return Vec::new() };
                let has_state = matches!(q, Label::Sym(s) if tm.states.iter().any(|st| st.as_str() == &**s));
                if hd.is(HEAD) != has_state || (!hd.is(HEAD) && !q.is(BOT_T)) {
                    return vec![viol(
                        "goodTuring.2",
                        ctx,
                        &[h],
                        format!("head marker {hd} with state {q}"),
                    )];
                }
                Vec::new()
            }
        },
    ));
    v.push(NamedCheck::new(
        "goodTuring.3",
        "the row below applies one transition",
        {
            let tm = tm.clone();
            move |ctx, h| {
                let Some((b, hd, q)) = turing_triple(ctx, h) else { return Vec::new() };
                if !hd.is(HEAD) {
                    return Vec::new();
                }
                let (Label::Sym(q), Label::Sym(b)) = (q, b) else { return Vec::new() };
                let (q, b) = (&**q, &**b);
                if !tm.states.iter().any(|st| st == q) {
                    return Vec::new(); // rule 2 reports
                }
                let Ok(read) = b.parse::<u8>() else { return Vec::new() };
                let (q_next, b_next, mv) = tm.transition(q, read).clone();
                let mut out = Vec::new();
                let south = ctx.follow(h, &[(GRID, "S")]);
                match mv {
                    Move::Stay => {
                        if let Some(s) = south {
                            let want = triple(&b_next.to_string(), HEAD, &q_next);
                            if ctx.in_node(s, TUR) != &want {
                                out.push(viol(
                                    "goodTuring.3a",
                                    ctx,
                                    &[h, s],
                                    format!(
                                        "south of a staying head is {}, expected {want}",
                                        ctx.in_node(s, TUR)
                                    ),
                                ));
                            }
                        }
                    }
                    Move::Right | Move::Left => {
                        let (sub_id, dir) = if mv == Move::Right {
                            ("goodTuring.3b", "E")
                        } else {
                            ("goodTuring.3c", "W")
                        };
                        if let Some(sd) = ctx.follow(h, &[(GRID, "S"), (GRID, dir)]) {
                            // The head lands here; its tape symbol is free.
                            if let Some((_, sh, sq)) = turing_triple(ctx, sd) {
                                if !sh.is(HEAD) || !sq.is(&q_next) {
                                    out.push(viol(
                                        sub_id,
                                        ctx,
                                        &[h, sd],
                                        format!(
                                            "head should land below with state {q_next}, found ({sh},{sq})"
                                        ),
                                    ));
                                }
                            }
                        }
                        if let Some(s) = south {
                            let want = triple(&b_next.to_string(), BOT_T, BOT_T);
                            if ctx.in_node(s, TUR) != &want {
                                out.push(viol(
                                    sub_id,
                                    ctx,
                                    &[h, s],
                                    format!(
                                        "south of a moving head is {}, expected {want}",
                                        ctx.in_node(s, TUR)
                                    ),
                                ));
                            }
                        }
                    }
                }
                out
            }
        },
    ));
    v.push(NamedCheck::new(
        "goodTuring.4",
        "tape symbols away from the head copy south",
        |ctx, h| {
            let Some((b, hd, _)) = turing_triple(ctx, h) else { return Vec::new() };
            if hd.is(HEAD) {
                return Vec::new();
            }
            if let Some(s) = ctx.follow(h, &[(GRID, "S")]) {
                if let Some((sb, _, _)) = turing_triple(ctx, s) {
                    if sb != b {
                        return vec![viol(
                            "goodTuring.4",
                            ctx,
                            &[h, s],
                            format!("tape symbol {b} becomes {sb} on the row below"),
                        )];
                    }
                }
            }
            Vec::new()
        },
    ));
    v
}

fn turing_end_check(ctx: &ViewCtx, h: NodeHandle, id: &'static str, west_end: bool) -> Vec<Violation> {
    let Some((_, hd, _)) = turing_triple(ctx, h) else { return Vec::new() };
    if hd.is(HEAD) {
        return Vec::new();
    }
    let (w, e) = row_edges(ctx, h);
    let (absent, present) = if west_end { (w, e) } else { (e, w) };
    if absent.is_some() {
        return Vec::new();
    }
    let Some((port, he)) = present else { return Vec::new() };
    let mine = ctx.in_he(h, port, TUR).unwrap();
    let far = far_label(ctx, he, TUR);
    if !mine.is(O_H) || !far.is(I_H) {
        return vec![viol(
            id,
            ctx,
            &[h, he.neighbor],
            format!("row end carries {mine}/{far}, expected O_H here and I_H there"),
        )];
    }
    Vec::new()
}

fn turing_chain_check(ctx: &ViewCtx, h: NodeHandle, id: &'static str, from_west: bool) -> Vec<Violation> {
    let Some((_, hd, _)) = turing_triple(ctx, h) else { return Vec::new() };
    if hd.is(HEAD) {
        return Vec::new();
    }
    let (w, e) = row_edges(ctx, h);
    let (incoming, onward) = if from_west { (w, e) } else { (e, w) };
    let Some((in_port, in_he)) = incoming else { return Vec::new() };
    if !far_label(ctx, in_he, TUR).is(I_H) {
        return Vec::new();
    }
    let mut out = Vec::new();
    if !ctx.in_he(h, in_port, TUR).unwrap().is(O_H) {
        out.push(viol(id, ctx, &[h], "incoming pointer chain not answered with O_H"));
    }
    if let Some((on_port, _)) = onward {
        if !ctx.in_he(h, on_port, TUR).unwrap().is(I_H) {
            out.push(viol(id, ctx, &[h], "pointer chain not propagated with I_H"));
        }
    }
    out
}

/// Certification problem for machine execution on the grid.
pub fn pi_turing(tm: &TuringMachine) -> CertificationLcl {
    let checks = good_turing_checks(tm);
    let mut rules = good_rules(&checks);

    // Bad side: error pointers on the row half-edges.
    let bad_guard = |ctx: &ViewCtx, h: NodeHandle| ctx.out_node(h).is(ERROR);
    rules.push(Rule::new(
        "badTuring.1",
        "outgoing error pointers have a matching incoming end",
        move |ctx| {
            let h = ctx.root();
            if !bad_guard(ctx, h) {
                return Vec::new();
            }
            let (w, e) = row_edges(ctx, h);
            let mut out = Vec::new();
            for (port, he) in [w, e].into_iter().flatten() {
                if ctx.out_he(h, port).is(O_E) && !ctx.out_he(he.neighbor, he.neighbor_port).is(I_E)
                {
                    out.push(viol(
                        "badTuring.1",
                        ctx,
                        &[h, he.neighbor],
                        "O_E half-edge not answered by I_E on the far side",
                    ));
                }
            }
            out
        },
    ));
    {
        let checks = checks.clone();
        rules.push(Rule::new(
            "badTuring.2",
            "violating nodes absorb error pointers on both sides",
            move |ctx| {
                let h = ctx.root();
                if !bad_guard(ctx, h) || !violates_any(&checks, ctx, h) {
                    return Vec::new();
                }
                let (w, e) = row_edges(ctx, h);
                let mut out = Vec::new();
                for (port, _) in [w, e].into_iter().flatten() {
                    if !ctx.out_he(h, port).is(I_E) {
                        out.push(viol(
                            "badTuring.2",
                            ctx,
                            &[h],
                            "violating node's row half-edge does not carry I_E",
                        ));
                    }
                }
                out
            },
        ));
    }
    {
        let checks = checks.clone();
        rules.push(Rule::new(
            "badTuring.3",
            "satisfied nodes propagate an error pointer",
            move |ctx| {
                let h = ctx.root();
                if !bad_guard(ctx, h) || violates_any(&checks, ctx, h) {
                    return Vec::new();
                }
                let (w, e) = row_edges(ctx, h);
                let outgoing = [w, e]
                    .into_iter()
                    .flatten()
                    .any(|(port, _)| ctx.out_he(h, port).is(O_E));
                if !outgoing {
                    return vec![viol(
                        "badTuring.3",
                        ctx,
                        &[h],
                        "satisfied bad-side node points no O_E toward an error",
                    )];
                }
                Vec::new()
            },
        ));
    }

    let mut node_in = Vec::new();
    for b in ["0", "1"] {
        for hd in [HEAD, BOT_T] {
            for q in tm.states.iter().map(String::as_str).chain([BOT_T]) {
                node_in.push(triple(b, hd, q));
            }
        }
    }
    CertificationLcl {
        name: "turing".into(),
        node_in,
        halfedge_in: vec![Label::sym(I_H), Label::sym(O_H), Label::bot()],
        good_node_out: vec![Label::bot()],
        bad_node_out: vec![Label::sym(ERROR)],
        good_halfedge_out: vec![Label::bot()],
        bad_halfedge_out: vec![Label::sym(I_E), Label::sym(O_E), Label::sym(CROSS)],
        check_radius: 6,
        out_arity: 1,
        rules,
    }
}

// ---------------------------------------------------------------------------
// Consensus layer
// ---------------------------------------------------------------------------

/// The consensus problem: halting states fix the verdict, rows agree, and
/// agreement propagates northward. Plain (non-certification) problem; its
/// rules read the machine and grid slots of the composed input.
pub fn pi_consensus() -> LclProblem {
    let mut rules = Vec::new();
    rules.push(Rule::new(
        "consensus.1",
        "a node in a final state outputs that state",
        |ctx| {
            let h = ctx.root();
            let Some((_, _, q)) = turing_triple(ctx, h) else { return Vec::new() };
            for final_state in [ACCEPT, REJECT] {
                if q.is(final_state) && !ctx.out_node(h).is(final_state) {
                    return vec![viol(
                        "consensus.1",
                        ctx,
                        &[h],
                        format!("halting state {q} but output {}", ctx.out_node(h)),
                    )];
                }
            }
            Vec::new()
        },
    ));
    rules.push(Rule::new(
        "consensus.2",
        "outputs agree along a row",
        |ctx| {
            let h = ctx.root();
            let x = ctx.out_node(h);
            let mut out = Vec::new();
            for dir in ["W", "E"] {
                if let Some(n) = ctx.follow(h, &[(GRID, dir)]) {
                    if ctx.out_node(n) != x {
                        out.push(viol(
                            "consensus.2",
                            ctx,
                            &[h, n],
                            format!("output {x} but {dir}-neighbor outputs {}", ctx.out_node(n)),
                        ));
                    }
                }
            }
            out
        },
    ));
    rules.push(Rule::new(
        "consensus.3",
        "outputs propagate northward up a column",
        |ctx| {
            let h = ctx.root();
            let x = ctx.out_node(h);
            if let Some(n) = ctx.follow(h, &[(GRID, "N")]) {
                if ctx.out_node(n) != x {
                    return vec![viol(
                        "consensus.3",
                        ctx,
                        &[h, n],
                        format!("output {x} but N-neighbor outputs {}", ctx.out_node(n)),
                    )];
                }
            }
            Vec::new()
        },
    ));
    LclProblem {
        name: "consensus".into(),
        node_in: vec![Label::bot()],
        halfedge_in: vec![Label::bot()],
        node_out: vec![Label::sym(ACCEPT), Label::sym(REJECT)],
        halfedge_out: vec![Label::bot()],
        check_radius: 2,
        out_arity: 1,
        rules,
    }
}

// ---------------------------------------------------------------------------
// Folds
// ---------------------------------------------------------------------------

/// The four structural layers folded into one certification problem
/// (tree ⊗ row ⊗ grid ⊗ machine).
pub fn pi_structural(tm: &TuringMachine) -> CertificationLcl {
    let mut acc = compose_cert(&pi_tree(), &pi_row());
    acc = compose_cert(&acc, &pi_grid());
    acc = compose_cert(&acc, &pi_turing(tm));
    acc
}

/// The full five-layer problem: structural layers composed with consensus.
pub fn pi_full(tm: &TuringMachine) -> LclProblem {
    compose(&pi_structural(tm), &pi_consensus())
}

/// Catalog of every rule, one line per rule: `layer.rule_id: title`.
pub fn describe() -> String {
    let tm = TuringMachine::new(
        vec!["q0".into(), ACCEPT.into(), REJECT.into()],
        "q0".into(),
        ACCEPT.into(),
        REJECT.into(),
        vec![
            ("q0".into(), 0, ACCEPT.into(), 0, Move::Stay),
            ("q0".into(), 1, REJECT.into(), 1, Move::Stay),
        ],
    )
    .expect("catalog machine is well-formed");
    let mut lines = Vec::new();
    for cert in [pi_tree(), pi_row(), pi_grid(), pi_turing(&tm)] {
        for r in &cert.rules {
            lines.push(format!("{}: {}", r.id, r.title));
        }
    }
    for r in &pi_consensus().rules {
        lines.push(format!("{}: {}", r.id, r.title));
    }
    lines.join("\n") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lcl::{verify_solution, OutputLabeling};
    use crate::network::{EdgeSpec, Network, NodeSpec};

    /// Two-level perfect tree (root + two leaves) with canonical labels.
    fn tiny_tree(swap_lr: bool) -> Network {
        let (a, b) = if swap_lr { ("L", "R") } else { ("R", "L") };
        let nodes = (1..=3)
            .map(|id| NodeSpec { id, input: Label::sym("T") })
            .collect();
        let edge = |u, up, v, vp, ui: &str, vi: &str| EdgeSpec {
            u_id: u,
            u_port: up,
            v_id: v,
            v_port: vp,
            u_halfedge_input: Label::sym(ui),
            v_halfedge_input: Label::sym(vi),
        };
        let edges = vec![
            edge(1, 1, 2, 1, "Ch_L", "P"),
            edge(1, 2, 3, 1, "Ch_R", "P"),
            edge(2, 2, 3, 2, a, b),
        ];
        Network::build(nodes, edges).unwrap()
    }

    #[test]
    fn canonical_tiny_tree_is_good() {
        let net = tiny_tree(false);
        let p = pi_tree().good();
        let out = OutputLabeling::uniform(&net, Label::bot(), Label::bot());
        assert_eq!(verify_solution(&net, &p, &out).unwrap(), vec![]);
    }

    #[test]
    fn swapped_horizontal_labels_are_detected() {
        let net = tiny_tree(true);
        let p = pi_tree().good();
        let out = OutputLabeling::uniform(&net, Label::bot(), Label::bot());
        let vs = verify_solution(&net, &p, &out).unwrap();
        assert!(!vs.is_empty());
    }

    #[test]
    fn error_and_pointer_labeling_accepted_on_broken_tree() {
        let net = tiny_tree(true);
        let p = pi_tree().combined();
        // Both leaves violate (rules 4/5 walks fail); the root points at
        // its right child.
        let out = OutputLabeling {
            node_out: vec![pointer("Ch_R"), Label::sym(ERROR), Label::sym(ERROR)],
            halfedge_out: vec![
                vec![Label::sym(CROSS); 2],
                vec![Label::sym(CROSS); 2],
                vec![Label::sym(CROSS); 2],
            ],
        };
        assert_eq!(verify_solution(&net, &p, &out).unwrap(), vec![]);
    }

    #[test]
    fn unjustified_error_is_rejected() {
        let net = tiny_tree(false);
        let p = pi_tree().combined();
        let out = OutputLabeling {
            node_out: vec![Label::sym(ERROR); 3],
            halfedge_out: vec![
                vec![Label::sym(CROSS); 2],
                vec![Label::sym(CROSS); 2],
                vec![Label::sym(CROSS); 2],
            ],
        };
        let vs = verify_solution(&net, &p, &out).unwrap();
        assert!(vs.iter().all(|v| v.constraint_id == "badTree.1"));
        assert_eq!(vs.len(), 3);
    }

    #[test]
    fn describe_lists_all_layers() {
        let text = describe();
        for needle in [
            "goodTree.1:",
            "goodTree.9:",
            "badTree.3:",
            "goodRow.5:",
            "goodGrid.3:",
            "goodTuring.1f:",
            "goodTuring.3:",
            "badTuring.2:",
            "consensus.3:",
        ] {
            assert!(text.contains(needle), "catalog missing {needle}\n{text}");
        }
    }
}
