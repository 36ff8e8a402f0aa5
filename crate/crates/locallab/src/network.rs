//! Port-numbered networks and rooted neighborhoods.
//!
//! A network is a simple graph together with injective identifiers, input
//! labels on nodes and half-edges, a per-node port bijection onto
//! `{1..deg}`, and a degree annotation. A rooted neighborhood is the
//! radius-`t` view a node sees in the ball-growing formalism: nodes at
//! distance ≤ t, and an edge exactly when one endpoint is at distance
//! ≤ t−1; every node keeps its degree in the host network, which is how a
//! viewer can tell that a frontier node has unseen edges.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::label::Label;

/// Maximum degree Δ of any node.
pub const DELTA_MAX: u32 = 10;
/// Identifier-space exponent: ids live in `[n^C_ID]`.
pub const C_ID: u32 = 3;

/// Internal node handle: index into the network's node vector. Handles are
/// storage, identifiers are data; isomorphism compares identifiers only.
pub type NodeHandle = usize;

/// One endpoint's view of an incident edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HalfEdge {
    pub neighbor: NodeHandle,
    pub neighbor_port: u32,
    /// Input label on this half-edge (this endpoint's side).
    pub input: Label,
}

/// A node with its identifier, input label, host degree, and port table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeData {
    pub id: u64,
    pub input: Label,
    /// Degree in the host network. In a full network this equals the number
    /// of present ports; in a neighborhood fragment it may exceed it.
    pub host_degree: u32,
    /// Port table indexed by `port − 1`. `None` marks an edge that exists in
    /// the host but was cut by the neighborhood rule.
    ports: Vec<Option<HalfEdge>>,
}

impl NodeData {
    /// Assemble a node from raw parts (fragment surgery in this crate).
    pub(crate) fn from_raw(
        id: u64,
        input: Label,
        host_degree: u32,
        ports: Vec<Option<HalfEdge>>,
    ) -> Self {
        NodeData { id, input, host_degree, ports }
    }

    /// Half-edge at the given 1-based port, if present.
    pub fn port(&self, port: u32) -> Option<&HalfEdge> {
        self.ports
            .get(port as usize - 1)
            .and_then(|slot| slot.as_ref())
    }

    /// Present half-edges as `(port, half-edge)` pairs in port order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, &HalfEdge)> {
        self.ports
            .iter()
            .enumerate()
            .filter_map(|(i, slot)| slot.as_ref().map(|he| (i as u32 + 1, he)))
    }

    /// Number of present edges (fragment degree).
    pub fn present_degree(&self) -> u32 {
        self.ports.iter().filter(|s| s.is_some()).count() as u32
    }

    /// True when every host edge of this node is present, i.e. the viewer
    /// knows this node's complete edge set.
    pub fn fully_visible(&self) -> bool {
        self.present_degree() == self.host_degree
    }
}

/// Node declaration for [`Network::build`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub id: u64,
    pub input: Label,
}

/// Edge declaration for [`Network::build`]: endpoints by id with their
/// ports and half-edge input labels.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub u_id: u64,
    pub u_port: u32,
    pub v_id: u64,
    pub v_port: u32,
    pub u_halfedge_input: Label,
    pub v_halfedge_input: Label,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NetworkError {
    #[error("identifier {id} is assigned to more than one node")]
    NonInjectiveIds { id: u64 },
    #[error("identifier {id} exceeds the id space [n^{C_ID}] = [{max}]")]
    IdOutOfRange { id: u64, max: u64 },
    #[error("node {id} declares port {port} more than once")]
    DuplicatePort { id: u64, port: u32 },
    #[error("node {id} has degree {degree}, exceeding Δ = {DELTA_MAX}")]
    DegreeExceedsDelta { id: u64, degree: u32 },
    #[error("node {id} has port gaps: ports must form exactly {{1..degree}}")]
    PortGap { id: u64 },
    #[error("edge references undeclared node id {id}")]
    UnknownEndpoint { id: u64 },
    #[error("edge from node {id} loops back to itself")]
    SelfLoop { id: u64 },
    #[error("nodes {u} and {v} are joined by more than one edge")]
    ParallelEdge { u: u64, v: u64 },
    #[error("port number 0 at node {id}: ports are 1-based")]
    ZeroPort { id: u64 },
    #[error("network must contain at least one node")]
    Empty,
    #[error("unknown node handle {0}")]
    UnknownNode(NodeHandle),
}

/// An immutable port-numbered network.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Network {
    nodes: Vec<NodeData>,
}

impl Network {
    /// Build a network from declarations, checking every type invariant.
    pub fn build(nodes: Vec<NodeSpec>, edges: Vec<EdgeSpec>) -> Result<Self, NetworkError> {
        if nodes.is_empty() {
            return Err(NetworkError::Empty);
        }
        let n = nodes.len() as u64;
        let max_id = n.saturating_pow(C_ID);
        let mut by_id: HashMap<u64, NodeHandle> = HashMap::new();
        for (h, spec) in nodes.iter().enumerate() {
            if by_id.insert(spec.id, h).is_some() {
                return Err(NetworkError::NonInjectiveIds { id: spec.id });
            }
            if spec.id == 0 || spec.id > max_id {
                return Err(NetworkError::IdOutOfRange { id: spec.id, max: max_id });
            }
        }
        let mut ports: Vec<HashMap<u32, HalfEdge>> = vec![HashMap::new(); nodes.len()];
        let mut seen_pairs: HashMap<(u64, u64), ()> = HashMap::new();
        for e in &edges {
            let u = *by_id
                .get(&e.u_id)
                .ok_or(NetworkError::UnknownEndpoint { id: e.u_id })?;
            let v = *by_id
                .get(&e.v_id)
                .ok_or(NetworkError::UnknownEndpoint { id: e.v_id })?;
            if u == v {
                return Err(NetworkError::SelfLoop { id: e.u_id });
            }
            let key = (e.u_id.min(e.v_id), e.u_id.max(e.v_id));
            if seen_pairs.insert(key, ()).is_some() {
                return Err(NetworkError::ParallelEdge { u: key.0, v: key.1 });
            }
            for &(id, port) in &[(e.u_id, e.u_port), (e.v_id, e.v_port)] {
                if port == 0 {
                    return Err(NetworkError::ZeroPort { id });
                }
            }
            let u_he = HalfEdge { neighbor: v, neighbor_port: e.v_port, input: e.u_halfedge_input.clone() };
            let v_he = HalfEdge { neighbor: u, neighbor_port: e.u_port, input: e.v_halfedge_input.clone() };
            if ports[u].insert(e.u_port, u_he).is_some() {
                return Err(NetworkError::DuplicatePort { id: e.u_id, port: e.u_port });
            }
            if ports[v].insert(e.v_port, v_he).is_some() {
                return Err(NetworkError::DuplicatePort { id: e.v_id, port: e.v_port });
            }
        }
        let mut built = Vec::with_capacity(nodes.len());
        for (h, spec) in nodes.into_iter().enumerate() {
            let table = std::mem::take(&mut ports[h]);
            let degree = table.len() as u32;
            if degree > DELTA_MAX {
                return Err(NetworkError::DegreeExceedsDelta { id: spec.id, degree });
            }
            let mut slots: Vec<Option<HalfEdge>> = vec![None; degree as usize];
            for (port, he) in table {
                if port > degree {
                    return Err(NetworkError::PortGap { id: spec.id });
                }
                slots[port as usize - 1] = Some(he);
            }
            built.push(NodeData { id: spec.id, input: spec.input, host_degree: degree, ports: slots });
        }
        Ok(Network { nodes: built })
    }

    /// Construct directly from node data; used internally by fragment
    /// extraction, where the port-bijection invariant is deliberately
    /// relaxed (cut edges leave `None` holes).
    pub(crate) fn from_parts(nodes: Vec<NodeData>) -> Self {
        Network { nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, h: NodeHandle) -> &NodeData {
        &self.nodes[h]
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeHandle, &NodeData)> {
        self.nodes.iter().enumerate()
    }

    pub fn handles(&self) -> impl Iterator<Item = NodeHandle> {
        0..self.nodes.len()
    }

    /// Handle of the node carrying `id`, if any.
    pub fn handle_of_id(&self, id: u64) -> Option<NodeHandle> {
        self.nodes.iter().position(|n| n.id == id)
    }

    /// BFS distances from `from`; `None` for unreachable nodes.
    pub fn distances(&self, from: NodeHandle) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.nodes.len()];
        let mut queue = std::collections::VecDeque::new();
        dist[from] = Some(0);
        queue.push_back(from);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for (_, he) in self.nodes[u].edges() {
                if dist[he.neighbor].is_none() {
                    dist[he.neighbor] = Some(du + 1);
                    queue.push_back(he.neighbor);
                }
            }
        }
        dist
    }

    /// Largest finite distance from `v` (within its component).
    pub fn eccentricity(&self, v: NodeHandle) -> u32 {
        self.distances(v).into_iter().flatten().max().unwrap_or(0)
    }
}

/// The radius-`t` view rooted at a node.
#[derive(Clone, Debug)]
pub struct RootedNeighborhood {
    /// Root's handle inside `fragment`.
    pub root: NodeHandle,
    pub radius: u32,
    pub fragment: Network,
    /// For each fragment handle, the handle of the same node in the host.
    pub host_nodes: Vec<NodeHandle>,
    /// For each fragment handle, its distance from the root.
    pub dist: Vec<u32>,
}

impl RootedNeighborhood {
    /// True when the view provably covers the root's whole component: every
    /// visible node's full edge set is visible, so nothing can lie beyond.
    pub fn exhausted(&self) -> bool {
        self.fragment
            .nodes()
            .all(|(_, n)| n.fully_visible())
    }
}

/// Extract the radius-`t` rooted neighborhood of `v`.
pub fn neighborhood(net: &Network, v: NodeHandle, t: u32) -> Result<RootedNeighborhood, NetworkError> {
    if v >= net.len() {
        return Err(NetworkError::UnknownNode(v));
    }
    // BFS truncated at depth t: only the ball matters here.
    let mut dist: Vec<Option<u32>> = vec![None; net.len()];
    let mut members: Vec<NodeHandle> = vec![v];
    dist[v] = Some(0);
    let mut next = 0usize;
    while next < members.len() {
        let u = members[next];
        next += 1;
        let du = dist[u].unwrap();
        if du == t {
            continue;
        }
        for (_, he) in net.node(u).edges() {
            if dist[he.neighbor].is_none() {
                dist[he.neighbor] = Some(du + 1);
                members.push(he.neighbor);
            }
        }
    }
    // Fragment nodes ordered by (distance, host handle) so extraction is
    // deterministic.
    members.sort_by_key(|&h| (dist[h].unwrap(), h));
    let mut host_to_frag: Vec<usize> = vec![usize::MAX; net.len()];
    for (i, &h) in members.iter().enumerate() {
        host_to_frag[h] = i;
    }
    let mut frag_nodes = Vec::with_capacity(members.len());
    for &h in &members {
        let src = net.node(h);
        let du = dist[h].unwrap();
        let ports = src
            .ports
            .iter()
            .map(|slot| {
                slot.as_ref().and_then(|he| {
                    // Undiscovered neighbors lie beyond the ball.
                    let dv = dist[he.neighbor]?;
                    // Edge rule: present iff one endpoint is at distance ≤ t−1.
                    if t > 0 && du.min(dv) <= t - 1 {
                        Some(HalfEdge {
                            neighbor: host_to_frag[he.neighbor],
                            neighbor_port: he.neighbor_port,
                            input: he.input.clone(),
                        })
                    } else {
                        None
                    }
                })
            })
            .collect();
        frag_nodes.push(NodeData {
            id: src.id,
            input: src.input.clone(),
            host_degree: src.host_degree,
            ports,
        });
    }
    let frag_dist = members.iter().map(|&h| dist[h].unwrap()).collect();
    Ok(RootedNeighborhood {
        root: 0, // root has distance 0 and the smallest handle among those
        radius: t,
        fragment: Network::from_parts(frag_nodes),
        host_nodes: members,
        dist: frag_dist,
    })
}

/// Root-preserving isomorphism of neighborhood fragments.
///
/// Because an isomorphism must preserve port numbers, the map is forced:
/// the neighbor at port p of a node must map to the neighbor at port p of
/// its image. Propagating from root to root therefore either yields the
/// unique candidate bijection or fails.
pub fn isomorphic(a: &RootedNeighborhood, b: &RootedNeighborhood) -> bool {
    let (fa, fb) = (&a.fragment, &b.fragment);
    if fa.len() != fb.len() {
        return false;
    }
    let mut map: Vec<Option<NodeHandle>> = vec![None; fa.len()];
    let mut mapped_to: Vec<bool> = vec![false; fb.len()];
    let mut stack = vec![(a.root, b.root)];
    map[a.root] = Some(b.root);
    mapped_to[b.root] = true;
    while let Some((u, v)) = stack.pop() {
        let (nu, nv) = (fa.node(u), fb.node(v));
        if nu.id != nv.id
            || nu.input != nv.input
            || nu.host_degree != nv.host_degree
            || nu.ports.len() != nv.ports.len()
        {
            return false;
        }
        for port in 1..=nu.ports.len() as u32 {
            match (nu.port(port), nv.port(port)) {
                (None, None) => {}
                (Some(ha), Some(hb)) => {
                    if ha.neighbor_port != hb.neighbor_port || ha.input != hb.input {
                        return false;
                    }
                    match map[ha.neighbor] {
                        Some(existing) => {
                            if existing != hb.neighbor {
                                return false;
                            }
                        }
                        None => {
                            if mapped_to[hb.neighbor] {
                                return false;
                            }
                            map[ha.neighbor] = Some(hb.neighbor);
                            mapped_to[hb.neighbor] = true;
                            stack.push((ha.neighbor, hb.neighbor));
                        }
                    }
                }
                _ => return false,
            }
        }
    }
    // Fragments are connected, so propagation reaches everything.
    map.iter().all(|m| m.is_some())
}

/// Canonical byte-string encoding: equal strings iff [`isomorphic`].
///
/// Port-order BFS from the root assigns canonical indices (forced, for the
/// same reason the isomorphism map is forced), then serializes each node's
/// identity, labels, degree, and port table against canonical indices.
pub fn canonical_encode(x: &RootedNeighborhood) -> String {
    canonical_encode_at(&x.fragment, x.root)
}

/// Canonical encoding of the part of `frag` reachable from `root` (see
/// [`canonical_encode`]).
pub(crate) fn canonical_encode_at(frag: &Network, root: NodeHandle) -> String {
    let mut canon: Vec<Option<usize>> = vec![None; frag.len()];
    let mut order: Vec<NodeHandle> = Vec::with_capacity(frag.len());
    canon[root] = Some(0);
    order.push(root);
    let mut next = 0usize;
    while next < order.len() {
        let u = order[next];
        next += 1;
        for (_, he) in frag.node(u).edges() {
            if canon[he.neighbor].is_none() {
                canon[he.neighbor] = Some(order.len());
                order.push(he.neighbor);
            }
        }
    }
    let mut out = String::new();
    use std::fmt::Write;
    for (ci, &h) in order.iter().enumerate() {
        let n = frag.node(h);
        write!(out, "n{ci} id={} deg={} in={} [", n.id, n.host_degree, n.input).unwrap();
        for port in 1..=n.ports.len() as u32 {
            match n.port(port) {
                None => write!(out, "p{port}:-;").unwrap(),
                Some(he) => write!(
                    out,
                    "p{port}:n{}@{}:{};",
                    canon[he.neighbor].expect("fragment connected"),
                    he.neighbor_port,
                    he.input
                )
                .unwrap(),
            }
        }
        out.push_str("]\n");
    }
    out
}

// ---------------------------------------------------------------------------
// Instance file format
// ---------------------------------------------------------------------------

fn default_c() -> u32 {
    C_ID
}

/// On-disk instance document: `{"c": 3, "nodes": [...], "edges": [...]}`.
/// `c` records the id-space exponent for reproducible validation.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    #[serde(default = "default_c")]
    pub c: u32,
    pub nodes: Vec<NodeSpec>,
    pub edges: Vec<EdgeSpec>,
}

#[derive(Debug, Error)]
pub enum FileError {
    #[error("malformed instance file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("instance declares id exponent c={0}; this build supports c={C_ID}")]
    UnsupportedC(u32),
}

/// Parse an instance document and build the network.
pub fn network_from_json(text: &str) -> Result<Network, FileError> {
    let doc: InstanceFile = serde_json::from_str(text)?;
    if doc.c != C_ID {
        return Err(FileError::UnsupportedC(doc.c));
    }
    Ok(Network::build(doc.nodes, doc.edges)?)
}

/// Serialize a network as an instance document (deterministic field and
/// entry order; nodes in handle order, edges from the smaller endpoint id).
pub fn network_to_json(net: &Network) -> String {
    let nodes: Vec<NodeSpec> = net
        .nodes()
        .map(|(_, n)| NodeSpec { id: n.id, input: n.input.clone() })
        .collect();
    let mut edges: Vec<EdgeSpec> = Vec::new();
    for (h, n) in net.nodes() {
        for (port, he) in n.edges() {
            let m = net.node(he.neighbor);
            if (n.id, h) < (m.id, he.neighbor) {
                edges.push(EdgeSpec {
                    u_id: n.id,
                    u_port: port,
                    v_id: m.id,
                    v_port: he.neighbor_port,
                    u_halfedge_input: he.input.clone(),
                    v_halfedge_input: m.port(he.neighbor_port).unwrap().input.clone(),
                });
            }
        }
    }
    edges.sort_by_key(|e| (e.u_id, e.v_id));
    let doc = InstanceFile { c: C_ID, nodes, edges };
    let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bare(id: u64) -> NodeSpec {
        NodeSpec { id, input: Label::bot() }
    }

    fn edge(u: u64, up: u32, v: u64, vp: u32) -> EdgeSpec {
        EdgeSpec {
            u_id: u,
            u_port: up,
            v_id: v,
            v_port: vp,
            u_halfedge_input: Label::bot(),
            v_halfedge_input: Label::bot(),
        }
    }

    fn path(n: u64) -> Network {
        let nodes = (1..=n).map(bare).collect();
        let edges = (1..n)
            .map(|i| edge(i, if i == 1 { 1 } else { 2 }, i + 1, 1))
            .collect();
        Network::build(nodes, edges).unwrap()
    }

    #[test]
    fn single_node_network() {
        let net = Network::build(vec![bare(1)], vec![]).unwrap();
        assert_eq!(net.len(), 1);
        assert_eq!(net.node(0).host_degree, 0);
    }

    #[test]
    fn two_node_edge() {
        let net = Network::build(vec![bare(1), bare(2)], vec![edge(1, 1, 2, 1)]).unwrap();
        assert_eq!(net.node(0).port(1).unwrap().neighbor, 1);
        assert_eq!(net.node(1).port(1).unwrap().neighbor_port, 1);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let err = Network::build(vec![bare(1), bare(1)], vec![]).unwrap_err();
        assert_eq!(err, NetworkError::NonInjectiveIds { id: 1 });
    }

    #[test]
    fn id_out_of_range_rejected() {
        // n = 1 → ids must be ≤ 1^3 = 1.
        let err = Network::build(vec![bare(2)], vec![]).unwrap_err();
        assert_eq!(err, NetworkError::IdOutOfRange { id: 2, max: 1 });
    }

    #[test]
    fn duplicate_port_rejected() {
        let err = Network::build(
            vec![bare(1), bare(2), bare(3)],
            vec![edge(1, 1, 2, 1), edge(1, 1, 3, 1)],
        )
        .unwrap_err();
        assert_eq!(err, NetworkError::DuplicatePort { id: 1, port: 1 });
    }

    #[test]
    fn port_gap_rejected() {
        // Node 1 uses port 2 as its only port.
        let err = Network::build(vec![bare(1), bare(2)], vec![edge(1, 2, 2, 1)]).unwrap_err();
        assert_eq!(err, NetworkError::PortGap { id: 1 });
    }

    #[test]
    fn radius_zero_view_is_root_only() {
        let net = path(3);
        let view = neighborhood(&net, 1, 0).unwrap();
        assert_eq!(view.fragment.len(), 1);
        assert_eq!(view.fragment.node(0).host_degree, 2);
        assert_eq!(view.fragment.node(0).present_degree(), 0);
    }

    #[test]
    fn triangle_radius_one_omits_far_edge() {
        let net = Network::build(
            vec![bare(1), bare(2), bare(3)],
            vec![edge(1, 1, 2, 1), edge(2, 2, 3, 1), edge(3, 2, 1, 2)],
        )
        .unwrap();
        let view = neighborhood(&net, 0, 1).unwrap();
        assert_eq!(view.fragment.len(), 3);
        // Root keeps both its edges; the edge between the two distance-1
        // nodes has min-distance 1 > t−1 = 0 and must be absent.
        assert_eq!(view.fragment.node(view.root).present_degree(), 2);
        let frag_edges: u32 = view
            .fragment
            .nodes()
            .map(|(_, n)| n.present_degree())
            .sum();
        assert_eq!(frag_edges, 4); // two edges, counted from both sides
        assert!(!view.exhausted());
    }

    #[test]
    fn path_center_radius_one_keeps_both_edges() {
        let net = path(3);
        let view = neighborhood(&net, 1, 1).unwrap();
        assert_eq!(view.fragment.len(), 3);
        let frag_edges: u32 = view.fragment.nodes().map(|(_, n)| n.present_degree()).sum();
        assert_eq!(frag_edges, 4);
        assert!(view.exhausted());
    }

    #[test]
    fn neighborhood_monotone_growth() {
        let net = path(7);
        for v in net.handles() {
            for t in 0..6 {
                let small = neighborhood(&net, v, t).unwrap();
                let big = neighborhood(&net, v, t + 1).unwrap();
                let small_ids: std::collections::HashSet<u64> =
                    small.fragment.nodes().map(|(_, n)| n.id).collect();
                let big_ids: std::collections::HashSet<u64> =
                    big.fragment.nodes().map(|(_, n)| n.id).collect();
                assert!(small_ids.is_subset(&big_ids));
            }
        }
    }

    #[test]
    fn ecc_plus_one_exhausts_component() {
        let net = path(5);
        let v = 0;
        let ecc = net.eccentricity(v);
        assert_eq!(ecc, 4);
        let view = neighborhood(&net, v, ecc + 1).unwrap();
        assert!(view.exhausted());
        assert_eq!(view.fragment.len(), 5);
    }

    #[test]
    fn identity_isomorphic_and_ids_matter() {
        let a = neighborhood(&path(3), 0, 1).unwrap();
        assert!(isomorphic(&a, &a));
        let n1 = Network::build(vec![bare(1)], vec![]).unwrap();
        // id 2 is out of range for n=1, so use a 2-node host for the second view.
        let n2 = Network::build(vec![bare(2), bare(1)], vec![]).unwrap();
        let v1 = neighborhood(&n1, 0, 0).unwrap();
        let v2 = neighborhood(&n2, 0, 0).unwrap();
        assert!(!isomorphic(&v1, &v2));
    }

    #[test]
    fn port_swap_breaks_isomorphism_and_encoding() {
        let nodes = vec![bare(1), bare(2), bare(3)];
        let a = Network::build(nodes.clone(), vec![edge(2, 1, 1, 1), edge(2, 2, 3, 1)]).unwrap();
        let b = Network::build(nodes, vec![edge(2, 2, 1, 1), edge(2, 1, 3, 1)]).unwrap();
        let va = neighborhood(&a, 1, 1).unwrap();
        let vb = neighborhood(&b, 1, 1).unwrap();
        assert!(!isomorphic(&va, &vb));
        assert_ne!(canonical_encode(&va), canonical_encode(&vb));
    }

    #[test]
    fn handle_permutation_preserves_encoding() {
        // Same labeled path declared in two different node orders.
        let a = Network::build(
            vec![bare(1), bare(2), bare(3)],
            vec![edge(1, 1, 2, 1), edge(2, 2, 3, 1)],
        )
        .unwrap();
        let b = Network::build(
            vec![bare(3), bare(1), bare(2)],
            vec![edge(2, 2, 3, 1), edge(1, 1, 2, 1)],
        )
        .unwrap();
        let va = neighborhood(&a, a.handle_of_id(2).unwrap(), 2).unwrap();
        let vb = neighborhood(&b, b.handle_of_id(2).unwrap(), 2).unwrap();
        assert!(isomorphic(&va, &vb));
        assert_eq!(canonical_encode(&va), canonical_encode(&vb));
    }

    #[test]
    fn instance_json_round_trip_and_unknown_fields() {
        let net = path(4);
        let text = network_to_json(&net);
        let back = network_from_json(&text).unwrap();
        assert_eq!(network_to_json(&back), text);
        let bad = r#"{"nodes": [{"id": 1, "input": "⊥"}], "edges": [], "extra": 1}"#;
        assert!(matches!(network_from_json(bad), Err(FileError::Parse(_))));
    }
}
