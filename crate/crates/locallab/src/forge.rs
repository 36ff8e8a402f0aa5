//! Instance generators: perfect trees, single layers, growing grids,
//! machine-trace grids, and seeded single-site corruptions.
//!
//! Instances carry input stacks exactly as deep as the structure they
//! exhibit: atomic labels for bare trees, two slots for a layer, three
//! for a grid, four for a machine-trace grid. Identifiers are assigned
//! layer by layer — each layer's row nodes west to east, then its tree
//! nodes in (level, west-to-east) order — so two machine-trace grids over
//! the same machine and input agree on their shared prefix of layers.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::label::Label;
use crate::network::{EdgeSpec, Network, NodeHandle, NodeSpec};
use crate::pi::{triple, BOT_T, GRID, HEAD, I_H, O_H, ROW, TREE, TUR};
use crate::turing::{tm_trace, TuringMachine};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ForgeError {
    #[error("input length {m} exceeds the layer count k = {k}")]
    InputTooLong { m: u32, k: u32 },
    #[error("unknown corruption kind {0:?}")]
    UnsupportedKind(String),
    #[error("no eligible site for corruption {kind} in this instance")]
    NoCorruptionSite { kind: CorruptKind },
}

// ---------------------------------------------------------------------------
// Label stacks
// ---------------------------------------------------------------------------

fn bot() -> &'static Label {
    static BOT: OnceLock<Label> = OnceLock::new();
    BOT.get_or_init(Label::bot)
}

/// An `arity`-slot input stack with the given entries and ⊥ elsewhere.
/// Arity 1 collapses to the bare slot-0 entry.
pub(crate) fn stack(arity: usize, entries: &[(usize, Label)]) -> Label {
    if arity == 1 {
        debug_assert!(entries.iter().all(|(i, _)| *i == 0));
        return entries.first().map(|(_, l)| l.clone()).unwrap_or_else(Label::bot);
    }
    let mut parts = vec![Label::bot(); arity];
    for (i, l) in entries {
        parts[*i] = l.clone();
    }
    Label::tuple(parts)
}

/// Half-edge input stack from `(slot, symbol)` pairs.
fn he(arity: usize, entries: &[(usize, &str)]) -> Label {
    let owned: Vec<(usize, Label)> = entries.iter().map(|&(i, s)| (i, Label::sym(s))).collect();
    stack(arity, &owned)
}

fn tree_node_input(arity: usize) -> Label {
    let mut entries = vec![(TREE, Label::sym("T"))];
    if arity >= 2 {
        entries.push((ROW, Label::sym("T")));
    }
    if arity >= 4 {
        entries.push((TUR, triple("0", BOT_T, BOT_T)));
    }
    stack(arity, &entries)
}

fn grid_node_input(arity: usize, tur: Option<Label>) -> Label {
    let mut entries = vec![(TREE, Label::sym("G")), (ROW, Label::sym("G"))];
    if arity >= 3 {
        entries.push((GRID, Label::sym("G")));
    }
    if let Some(t) = tur {
        entries.push((TUR, t));
    }
    stack(arity, &entries)
}

/// Component `i` of an input stack (atomic labels are slot 0 alone).
pub(crate) fn slot(l: &Label, i: usize) -> &Label {
    match l {
        Label::Tuple(parts) => parts.get(i).unwrap_or_else(|| bot()),
        Label::Sym(_) if i == 0 => l,
        Label::Sym(_) => bot(),
    }
}

fn set_slot(l: &mut Label, i: usize, v: Label) {
    match l {
        Label::Tuple(parts) => std::sync::Arc::make_mut(parts)[i] = v,
        Label::Sym(_) if i == 0 => *l = v,
        Label::Sym(_) => panic!("atomic label has no slot {i}"),
    }
}

// ---------------------------------------------------------------------------
// Assembly
// ---------------------------------------------------------------------------

/// Declaration accumulator assigning ports in edge insertion order.
struct Builder {
    nodes: Vec<NodeSpec>,
    edges: Vec<EdgeSpec>,
    next_port: HashMap<u64, u32>,
}

impl Builder {
    fn new() -> Self {
        Builder { nodes: Vec::new(), edges: Vec::new(), next_port: HashMap::new() }
    }

    fn node(&mut self, id: u64, input: Label) {
        self.nodes.push(NodeSpec { id, input });
    }

    fn edge(&mut self, u: u64, u_in: Label, v: u64, v_in: Label) {
        let mut port = |id: u64| {
            let p = self.next_port.entry(id).or_insert(0);
            *p += 1;
            *p
        };
        let (u_port, v_port) = (port(u), port(v));
        self.edges.push(EdgeSpec {
            u_id: u,
            u_port,
            v_id: v,
            v_port,
            u_halfedge_input: u_in,
            v_halfedge_input: v_in,
        });
    }

    fn build(self) -> Network {
        Network::build(self.nodes, self.edges).expect("generated structure is well-formed")
    }
}

/// Smallest h with 2^h ≥ width (height of the tree above a width-n row).
fn tree_height(width: u32) -> u32 {
    let mut h = 0;
    while (1u64 << h) < width as u64 {
        h += 1;
    }
    h
}

/// Declare a perfect tree with `levels` levels. `ids[i]` names the i-th
/// node in (level, west-to-east) order; horizontal sibling edges run on
/// every level. Returns the leaf ids west to east.
fn add_tree(b: &mut Builder, arity: usize, levels: u32, ids: &[u64]) -> Vec<u64> {
    debug_assert_eq!(ids.len() as u64, (1u64 << levels) - 1);
    let idx = |lev: u32, pos: u64| ids[((1u64 << lev) - 1 + pos) as usize];
    for lev in 0..levels {
        for pos in 0..(1u64 << lev) {
            b.node(idx(lev, pos), tree_node_input(arity));
        }
    }
    for lev in 0..levels {
        for pos in 0..(1u64 << lev) - 1 {
            b.edge(
                idx(lev, pos),
                he(arity, &[(TREE, "R")]),
                idx(lev, pos + 1),
                he(arity, &[(TREE, "L")]),
            );
        }
    }
    for lev in 0..levels.saturating_sub(1) {
        for pos in 0..(1u64 << lev) {
            b.edge(
                idx(lev, pos),
                he(arity, &[(TREE, "Ch_L")]),
                idx(lev + 1, 2 * pos),
                he(arity, &[(TREE, "P")]),
            );
            b.edge(
                idx(lev, pos),
                he(arity, &[(TREE, "Ch_R")]),
                idx(lev + 1, 2 * pos + 1),
                he(arity, &[(TREE, "P")]),
            );
        }
    }
    (0..(1u64 << (levels - 1))).map(|pos| idx(levels - 1, pos)).collect()
}

/// Which machine-layer label a row half-edge carries on the side of column
/// `me` toward column `other` when the head sits at `head_col` (1-based;
/// `None` for a headless row, which points east throughout).
fn head_side(me: u32, other: u32, head_col: Option<u32>) -> &'static str {
    let hc = head_col.unwrap_or(u32::MAX);
    if me == hc {
        I_H
    } else if (me < hc) == (other > me) {
        O_H
    } else {
        I_H
    }
}

/// Declare one layer: a width-n row, the perfect tree above it, the P/Ch
/// attachments and the E/W row edges. `turing` optionally supplies the
/// machine-layer node triples and 1-based head column.
fn add_layer(
    b: &mut Builder,
    arity: usize,
    width: u32,
    row_ids: &[u64],
    tree_ids: &[u64],
    turing: Option<(&[Label], Option<u32>)>,
) {
    debug_assert_eq!(row_ids.len(), width as usize);
    for (j, &id) in row_ids.iter().enumerate() {
        let tur = turing.map(|(triples, _)| triples[j].clone());
        b.node(id, grid_node_input(arity, tur));
    }
    let levels = tree_height(width) + 1;
    let leaves = add_tree(b, arity, levels, tree_ids);
    // Greedy attachment: consecutive grid nodes hang under leaves at
    // horizontal distance 1 or 2, taking the surplus-leaf skips early.
    let skips = leaves.len() as u32 - width;
    for j in 1..=width {
        let leaf = leaves[(j - 1 + (j - 1).min(skips)) as usize];
        b.edge(row_ids[j as usize - 1], he(arity, &[(ROW, "P")]), leaf, he(arity, &[(ROW, "Ch")]));
    }
    for j in 1..width {
        let (west, east) = (row_ids[j as usize - 1], row_ids[j as usize]);
        let mut w_entries = vec![(ROW, "E")];
        let mut e_entries = vec![(ROW, "W")];
        if arity >= 3 {
            w_entries.push((GRID, "E"));
            e_entries.push((GRID, "W"));
        }
        if let Some((_, hc)) = turing {
            w_entries.push((TUR, head_side(j, j + 1, hc)));
            e_entries.push((TUR, head_side(j + 1, j, hc)));
        }
        b.edge(west, he(arity, &w_entries), east, he(arity, &e_entries));
    }
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// A perfect tree with `levels` ≥ 1 levels and horizontal sibling edges on
/// every level. Ids run 1..2^levels − 1 in (level, west-to-east) order.
pub fn make_perfect_tree(levels: u32) -> Network {
    assert!(levels >= 1, "a tree has at least one level");
    let ids: Vec<u64> = (1..=(1u64 << levels) - 1).collect();
    let mut b = Builder::new();
    add_tree(&mut b, 1, levels, &ids);
    b.build()
}

/// One width-`width` row hanging under its perfect tree (two input slots).
/// Row ids run 1..width west to east, tree ids follow.
pub fn make_layer(width: u32) -> Network {
    assert!(width >= 1, "a layer has at least one grid node");
    let levels = tree_height(width) + 1;
    let row_ids: Vec<u64> = (1..=width as u64).collect();
    let tree_count = (1u64 << levels) - 1;
    let tree_ids: Vec<u64> = (width as u64 + 1..=width as u64 + tree_count).collect();
    let mut b = Builder::new();
    add_layer(&mut b, 2, width, &row_ids, &tree_ids, None);
    b.build()
}

/// Shape of a growing grid: `h` layers, the top row `l` wide, each layer
/// one wider than the one above.
#[derive(Clone, Copy, Debug)]
pub struct GrowingGridSpec {
    pub h: u32,
    pub l: u32,
}

/// A growing grid with its per-layer trees (three input slots). Column
/// edges join west-aligned nodes of consecutive rows.
pub fn make_growing_grid(spec: &GrowingGridSpec) -> Network {
    assert!(spec.h >= 1 && spec.l >= 1, "grid dimensions are positive");
    let mut b = Builder::new();
    let mut next_id = 1u64;
    let mut prev_row: Vec<u64> = Vec::new();
    for i in 1..=spec.h {
        let width = spec.l + i - 1;
        let row_ids = add_one_layer(&mut b, 3, width, &mut next_id, None);
        add_column_edges(&mut b, 3, &prev_row, &row_ids);
        prev_row = row_ids;
    }
    b.build()
}

fn add_one_layer(
    b: &mut Builder,
    arity: usize,
    width: u32,
    next_id: &mut u64,
    turing: Option<(&[Label], Option<u32>)>,
) -> Vec<u64> {
    let row_ids: Vec<u64> = (*next_id..*next_id + width as u64).collect();
    *next_id += width as u64;
    let tree_count = (1u64 << (tree_height(width) + 1)) - 1;
    let tree_ids: Vec<u64> = (*next_id..*next_id + tree_count).collect();
    *next_id += tree_count;
    add_layer(b, arity, width, &row_ids, &tree_ids, turing);
    row_ids
}

fn add_column_edges(b: &mut Builder, arity: usize, upper: &[u64], lower: &[u64]) {
    for (j, &up) in upper.iter().enumerate() {
        b.edge(up, he(arity, &[(GRID, "S")]), lower[j], he(arity, &[(GRID, "N")]));
    }
}

/// The k-layer machine-trace grid for `tm` on `input` (four input slots):
/// layer widths 1..k, layers above the input row blank, layer m carrying
/// the input head-west in the start state, and each following layer the
/// next configuration padded east with 0s; halting configurations repeat.
pub fn make_gk(tm: &TuringMachine, k: u32, input: &[u8]) -> Result<Network, ForgeError> {
    assert!(k >= 1, "the grid has at least one layer");
    let x: Vec<u8> = if input.is_empty() { vec![0] } else { input.to_vec() };
    let m = x.len() as u32;
    if m > k {
        return Err(ForgeError::InputTooLong { m, k });
    }
    let trace = tm_trace(tm, &x, (k - m) as usize);
    let mut b = Builder::new();
    let mut next_id = 1u64;
    let mut prev_row: Vec<u64> = Vec::new();
    for i in 1..=k {
        let (triples, head_col) = if i < m {
            ((0..i).map(|_| triple("0", BOT_T, BOT_T)).collect::<Vec<_>>(), None)
        } else {
            let c = &trace[(i - m) as usize];
            let triples = (0..i as usize)
                .map(|j| {
                    let b_sym = c.tape.get(j).copied().unwrap_or(0).to_string();
                    if j == c.head {
                        triple(&b_sym, HEAD, &c.state)
                    } else {
                        triple(&b_sym, BOT_T, BOT_T)
                    }
                })
                .collect();
            (triples, Some(c.head as u32 + 1))
        };
        let row_ids = add_one_layer(&mut b, 4, i, &mut next_id, Some((&triples, head_col)));
        add_column_edges(&mut b, 4, &prev_row, &row_ids);
        prev_row = row_ids;
    }
    Ok(b.build())
}

// ---------------------------------------------------------------------------
// Corruptions
// ---------------------------------------------------------------------------

/// A single-site mutation targeting one layer of the certification stack.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorruptKind {
    /// Swap the L/R labels of one horizontal tree edge between internal
    /// nodes.
    TreeBreak,
    /// Blank the P/Ch row labels of one attachment edge.
    RowBreak,
    /// Blank the N/S grid labels of one column edge.
    GridBreak,
    /// Flip a bottom-row tape bit away from the head (the copy constraint
    /// fails one row above).
    TuringTransition,
    /// Plant a second head, in the row's real head state, well away from
    /// the real one.
    TuringTwoHeads,
}

impl CorruptKind {
    pub const ALL: [CorruptKind; 5] = [
        CorruptKind::TreeBreak,
        CorruptKind::RowBreak,
        CorruptKind::GridBreak,
        CorruptKind::TuringTransition,
        CorruptKind::TuringTwoHeads,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CorruptKind::TreeBreak => "tree_break",
            CorruptKind::RowBreak => "row_break",
            CorruptKind::GridBreak => "grid_break",
            CorruptKind::TuringTransition => "turing_transition",
            CorruptKind::TuringTwoHeads => "turing_two_heads",
        }
    }
}

impl fmt::Display for CorruptKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CorruptKind {
    type Err = ForgeError;

    fn from_str(s: &str) -> Result<Self, ForgeError> {
        CorruptKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| ForgeError::UnsupportedKind(s.to_string()))
    }
}

fn to_specs(net: &Network) -> (Vec<NodeSpec>, Vec<EdgeSpec>) {
    let nodes = net
        .nodes()
        .map(|(_, n)| NodeSpec { id: n.id, input: n.input.clone() })
        .collect();
    let mut edges = Vec::new();
    for (h, n) in net.nodes() {
        for (port, e) in n.edges() {
            if h < e.neighbor {
                let far = net.node(e.neighbor);
                edges.push(EdgeSpec {
                    u_id: n.id,
                    u_port: port,
                    v_id: far.id,
                    v_port: e.neighbor_port,
                    u_halfedge_input: e.input.clone(),
                    v_halfedge_input: far.port(e.neighbor_port).unwrap().input.clone(),
                });
            }
        }
    }
    (nodes, edges)
}

/// Rows of grid nodes, west to east, ordered by west-end id (which is the
/// layer order for generated instances).
pub fn rows_of(net: &Network) -> Vec<Vec<NodeHandle>> {
    let follow = |h: NodeHandle, sym: &str| {
        net.node(h)
            .edges()
            .find(|(_, e)| slot(&e.input, ROW).is(sym))
            .map(|(_, e)| e.neighbor)
    };
    let mut starts: Vec<NodeHandle> = net
        .handles()
        .filter(|&h| slot(&net.node(h).input, TREE).is("G") && follow(h, "W").is_none())
        .collect();
    starts.sort_by_key(|&h| net.node(h).id);
    starts
        .into_iter()
        .map(|s| {
            let mut row = vec![s];
            while let Some(next) = follow(*row.last().unwrap(), "E") {
                row.push(next);
            }
            row
        })
        .collect()
}

/// The machine-layer triple of a node, if it carries one.
pub fn triple_of(net: &Network, h: NodeHandle) -> Option<(String, String, String)> {
    match slot(&net.node(h).input, TUR) {
        Label::Tuple(p) if p.len() == 3 => match (&p[0], &p[1], &p[2]) {
            (Label::Sym(b), Label::Sym(hd), Label::Sym(q)) => {
                Some((b.to_string(), hd.to_string(), q.to_string()))
            }
            _ => None,
        },
        _ => None,
    }
}

/// The 0-based head column of a row, if it has one.
fn head_of(net: &Network, row: &[NodeHandle]) -> Option<usize> {
    row.iter()
        .position(|&h| matches!(triple_of(net, h), Some((_, hd, _)) if hd == HEAD))
}

fn far_enough(c: usize, head: Option<usize>, dist: i64) -> bool {
    head.map_or(true, |hc| (c as i64 - hc as i64).abs() >= dist)
}

fn pick<T: Copy>(cands: &[T], rng: &mut ChaCha8Rng, kind: CorruptKind) -> Result<T, ForgeError> {
    if cands.is_empty() {
        return Err(ForgeError::NoCorruptionSite { kind });
    }
    Ok(cands[rng.gen_range(0..cands.len())])
}

/// Apply one seeded corruption and rebuild. The mutation is confined to
/// labels; the graph itself is untouched.
pub fn corrupt(net: &Network, kind: CorruptKind, seed: u64) -> Result<Network, ForgeError> {
    let (mut nodes, mut edges) = to_specs(net);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        CorruptKind::TreeBreak => {
            // Internal nodes: those with children of their own.
            let mut internal: HashSet<u64> = HashSet::new();
            for e in &edges {
                if slot(&e.u_halfedge_input, TREE).is("Ch_L") {
                    internal.insert(e.u_id);
                }
                if slot(&e.v_halfedge_input, TREE).is("Ch_L") {
                    internal.insert(e.v_id);
                }
            }
            let mut cands: Vec<usize> = edges
                .iter()
                .enumerate()
                .filter(|(_, e)| {
                    let (a, b) = (slot(&e.u_halfedge_input, TREE), slot(&e.v_halfedge_input, TREE));
                    (a.is("L") || a.is("R"))
                        && (b.is("L") || b.is("R"))
                        && internal.contains(&e.u_id)
                        && internal.contains(&e.v_id)
                })
                .map(|(i, _)| i)
                .collect();
            cands.sort_by_key(|&i| (edges[i].u_id, edges[i].v_id));
            let i = pick(&cands, &mut rng, kind)?;
            let swap = |l: &mut Label| {
                let cur = if slot(l, TREE).is("L") { "R" } else { "L" };
                set_slot(l, TREE, Label::sym(cur));
            };
            swap(&mut edges[i].u_halfedge_input);
            swap(&mut edges[i].v_halfedge_input);
        }
        CorruptKind::RowBreak => {
            let mut cands: Vec<usize> = edges
                .iter()
                .enumerate()
                .filter(|(_, e)| {
                    let (a, b) = (slot(&e.u_halfedge_input, ROW), slot(&e.v_halfedge_input, ROW));
                    (a.is("P") && b.is("Ch")) || (a.is("Ch") && b.is("P"))
                })
                .map(|(i, _)| i)
                .collect();
            cands.sort_by_key(|&i| (edges[i].u_id, edges[i].v_id));
            let i = pick(&cands, &mut rng, kind)?;
            set_slot(&mut edges[i].u_halfedge_input, ROW, Label::bot());
            set_slot(&mut edges[i].v_halfedge_input, ROW, Label::bot());
        }
        CorruptKind::GridBreak => {
            let mut cands: Vec<usize> = edges
                .iter()
                .enumerate()
                .filter(|(_, e)| {
                    let (a, b) = (slot(&e.u_halfedge_input, GRID), slot(&e.v_halfedge_input, GRID));
                    (a.is("N") && b.is("S")) || (a.is("S") && b.is("N"))
                })
                .map(|(i, _)| i)
                .collect();
            cands.sort_by_key(|&i| (edges[i].u_id, edges[i].v_id));
            let i = pick(&cands, &mut rng, kind)?;
            set_slot(&mut edges[i].u_halfedge_input, GRID, Label::bot());
            set_slot(&mut edges[i].v_halfedge_input, GRID, Label::bot());
        }
        CorruptKind::TuringTransition => {
            let rows = rows_of(net);
            let [.., above, last] = rows.as_slice() else {
                return Err(ForgeError::NoCorruptionSite { kind });
            };
            let (hc_last, hc_above) = (head_of(net, last), head_of(net, above));
            let cands: Vec<u64> = last
                .iter()
                .enumerate()
                .filter(|&(c, _)| {
                    c < above.len() && far_enough(c, hc_last, 3) && far_enough(c, hc_above, 2)
                })
                .map(|(_, &h)| net.node(h).id)
                .collect();
            let id = pick(&cands, &mut rng, kind)?;
            let spec = nodes.iter_mut().find(|n| n.id == id).unwrap();
            let Label::Tuple(t) = slot(&spec.input, TUR).clone() else { unreachable!() };
            let flipped = if t[0].is("0") { "1" } else { "0" };
            let mut t = (*t).clone();
            t[0] = Label::sym(flipped);
            set_slot(&mut spec.input, TUR, Label::tuple(t));
        }
        CorruptKind::TuringTwoHeads => {
            let rows = rows_of(net);
            let mut cands: Vec<(u64, usize)> = Vec::new();
            for row in &rows {
                let Some(hc) = head_of(net, row) else { continue };
                for (c, &h) in row.iter().enumerate() {
                    if far_enough(c, Some(hc), 3) {
                        cands.push((net.node(h).id, row[hc]));
                    }
                }
            }
            let (id, real_head) = pick(&cands, &mut rng, kind)?;
            let (_, _, q) = triple_of(net, real_head).expect("head carries a triple");
            let spec = nodes.iter_mut().find(|n| n.id == id).unwrap();
            let Label::Tuple(t) = slot(&spec.input, TUR).clone() else { unreachable!() };
            let b_sym = t[0].clone();
            set_slot(
                &mut spec.input,
                TUR,
                Label::tuple(vec![b_sym, Label::sym(HEAD), Label::sym(q.as_str())]),
            );
        }
    }
    Ok(Network::build(nodes, edges).expect("label-only mutation preserves the graph"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lcl::{compose_cert, verify_solution, OutputLabeling};
    use crate::network::network_to_json;
    use crate::pi::{pi_grid, pi_row, pi_structural, pi_tree};
    use crate::turing::TuringMachine;
    use crate::turing::Move;

    fn all_bot(net: &Network, arity: usize) -> OutputLabeling {
        let l = stack(arity, &[]);
        OutputLabeling::uniform(net, l.clone(), l)
    }

    fn mover() -> TuringMachine {
        // Flip the bit under the head and walk east forever.
        TuringMachine::new(
            vec!["q0".into(), "accept".into(), "reject".into()],
            "q0".into(),
            "accept".into(),
            "reject".into(),
            vec![
                ("q0".into(), 0, "q0".into(), 1, Move::Right),
                ("q0".into(), 1, "q0".into(), 0, Move::Right),
            ],
        )
        .unwrap()
    }

    #[test]
    fn perfect_tree_counts_and_goodness() {
        let net = make_perfect_tree(3);
        assert_eq!(net.len(), 7);
        let edge_count: u32 = net.nodes().map(|(_, n)| n.present_degree()).sum::<u32>() / 2;
        // 4 horizontal (1 on level 1, 3 on level 2) + 6 parent-child.
        assert_eq!(edge_count, 10);
        let vs = verify_solution(&net, &pi_tree().good(), &all_bot(&net, 1)).unwrap();
        assert_eq!(vs, vec![]);
    }

    #[test]
    fn layers_of_every_width_are_good() {
        let p = compose_cert(&pi_tree(), &pi_row()).good();
        for width in 1..=9 {
            let net = make_layer(width);
            let vs = verify_solution(&net, &p, &all_bot(&net, 2)).unwrap();
            assert_eq!(vs, vec![], "width {width}");
        }
    }

    #[test]
    fn growing_grid_counts_and_goodness() {
        let spec = GrowingGridSpec { h: 3, l: 2 };
        let net = make_growing_grid(&spec);
        let grid_nodes = net
            .nodes()
            .filter(|(_, n)| slot(&n.input, TREE).is("G"))
            .count() as u32;
        assert_eq!(grid_nodes, spec.h * spec.l + spec.h * (spec.h - 1) / 2);
        let p = compose_cert(&compose_cert(&pi_tree(), &pi_row()), &pi_grid()).good();
        let vs = verify_solution(&net, &p, &all_bot(&net, 3)).unwrap();
        assert_eq!(vs, vec![]);
    }

    #[test]
    fn trace_grid_with_immediate_input_is_fully_good() {
        // m = 1: no headless layers, so the all-⊥ labeling certifies
        // every structural layer.
        let tm = mover();
        let net = make_gk(&tm, 6, &[1]).unwrap();
        let p = pi_structural(&tm).good();
        let vs = verify_solution(&net, &p, &all_bot(&net, 4)).unwrap();
        assert_eq!(vs, vec![]);
    }

    #[test]
    fn headless_layers_fail_only_the_machine_layer() {
        let tm = mover();
        let net = make_gk(&tm, 6, &[1, 1, 0]).unwrap();
        let p = pi_structural(&tm).good();
        let vs = verify_solution(&net, &p, &all_bot(&net, 4)).unwrap();
        assert!(!vs.is_empty());
        assert!(vs.iter().all(|v| v.constraint_id.starts_with("goodTuring.")), "{vs:?}");
        // Every violation roots (smallest witness id) in a headless layer:
        // grid ids 1 (layer 1) and 3, 4 (layer 2).
        assert!(
            vs.iter()
                .all(|v| matches!(v.witness_nodes.iter().min(), Some(1 | 3 | 4))),
            "{vs:?}"
        );
    }

    #[test]
    fn input_longer_than_k_is_rejected() {
        let tm = mover();
        assert_eq!(
            make_gk(&tm, 2, &[1, 0, 1]).unwrap_err(),
            ForgeError::InputTooLong { m: 3, k: 2 }
        );
    }

    #[test]
    fn trace_grids_agree_on_shared_prefix() {
        let tm = mover();
        let small = make_gk(&tm, 4, &[1, 0]).unwrap();
        let big = make_gk(&tm, 7, &[1, 0]).unwrap();
        let (sn, se) = to_specs(&small);
        let (bn, be) = to_specs(&big);
        for n in &sn {
            let twin = bn.iter().find(|m| m.id == n.id).expect("shared id");
            assert_eq!(twin.input, n.input, "node {}", n.id);
        }
        for e in &se {
            assert!(
                be.iter().any(|f| (f.u_id, f.u_port, f.v_id, f.v_port) == (e.u_id, e.u_port, e.v_id, e.v_port)
                    && f.u_halfedge_input == e.u_halfedge_input
                    && f.v_halfedge_input == e.v_halfedge_input),
                "edge {}–{}",
                e.u_id,
                e.v_id
            );
        }
    }

    #[test]
    fn corruptions_hit_their_layer_and_are_deterministic() {
        let spec = GrowingGridSpec { h: 4, l: 3 };
        let net = make_growing_grid(&spec);
        let p = compose_cert(&compose_cert(&pi_tree(), &pi_row()), &pi_grid()).good();
        for (kind, prefix) in [
            (CorruptKind::TreeBreak, "goodTree."),
            (CorruptKind::RowBreak, "goodRow."),
            (CorruptKind::GridBreak, "goodGrid."),
        ] {
            let bad = corrupt(&net, kind, 7).unwrap();
            assert_eq!(network_to_json(&bad), network_to_json(&corrupt(&net, kind, 7).unwrap()));
            let vs = verify_solution(&bad, &p, &all_bot(&bad, 3)).unwrap();
            assert!(!vs.is_empty(), "{kind}");
            assert!(
                vs.iter().all(|v| v.constraint_id.starts_with(prefix)),
                "{kind}: {vs:?}"
            );
        }
    }

    #[test]
    fn machine_corruptions_break_one_machine_row() {
        let tm = mover();
        let net = make_gk(&tm, 8, &[1]).unwrap();
        let p = pi_structural(&tm).good();
        let rows = rows_of(&net);
        for kind in [CorruptKind::TuringTransition, CorruptKind::TuringTwoHeads] {
            let bad = corrupt(&net, kind, 3).unwrap();
            let vs = verify_solution(&bad, &p, &all_bot(&bad, 4)).unwrap();
            assert!(!vs.is_empty(), "{kind}");
            assert!(
                vs.iter().all(|v| v.constraint_id.starts_with("goodTuring.")),
                "{kind}: {vs:?}"
            );
            // Every violation roots (smallest witness id) in one machine row.
            let bad_rows: HashSet<usize> = vs
                .iter()
                .filter_map(|v| v.witness_nodes.iter().min())
                .filter_map(|&id| {
                    rows.iter()
                        .position(|r| r.iter().any(|&h| net.node(h).id == id))
                })
                .collect();
            assert_eq!(bad_rows.len(), 1, "{kind}: {vs:?}");
        }
    }

    #[test]
    fn unknown_kind_string_is_rejected() {
        assert_eq!(
            "grid_smash".parse::<CorruptKind>().unwrap_err(),
            ForgeError::UnsupportedKind("grid_smash".into())
        );
    }
}
