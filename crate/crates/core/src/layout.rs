//! Qubit layouts: data-ancilla connectivity on a torus (BB codes) or a planar patch
//! (surface codes), length-4 loops, and translation-invariant coupler removal.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::codes::{plaquette_corners, surface_plaquettes, BBSpec, CodeFamily, CssCode, Monomial, Plaquette};
use crate::error::LayoutError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeRole {
    Data,
    XAncilla,
    ZAncilla,
}

impl NodeRole {
    pub fn is_ancilla(self) -> bool {
        self != NodeRole::Data
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: usize,
    pub role: NodeRole,
    pub coord: (i64, i64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeLabel {
    Local,
    LongRange,
}

/// Which polynomial block generated an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Block {
    A,
    B,
    AT,
    BT,
    /// Surface-code plaquette corner (0..4 for TL, TR, BL, BR).
    Corner,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub ancilla: usize,
    pub data: usize,
    pub label: EdgeLabel,
    pub monomial: String,
    pub block: Block,
    pub term: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RemovalScheme {
    Full,
    ThreeQuartersLR,
    HalfLR,
    SurfaceHex,
}

impl RemovalScheme {
    pub fn name(self) -> &'static str {
        match self {
            RemovalScheme::Full => "full",
            RemovalScheme::ThreeQuartersLR => "three-quarters-lr",
            RemovalScheme::HalfLR => "half-lr",
            RemovalScheme::SurfaceHex => "surface-hex",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum LayoutFamily {
    Torus { spec: BBSpec },
    Planar { distance: usize },
}

#[derive(Debug, Clone)]
pub struct ConnectivityGraph {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    family: LayoutFamily,
    scheme: RemovalScheme,
    adjacency: Vec<Vec<usize>>,
    edge_index: HashMap<(usize, usize), usize>,
    by_coord: HashMap<(i64, i64), usize>,
}

impl ConnectivityGraph {
    pub fn new(nodes: Vec<Node>, edges: Vec<Edge>, family: LayoutFamily, scheme: RemovalScheme) -> Self {
        let mut adjacency = vec![Vec::new(); nodes.len()];
        let mut edge_index = HashMap::with_capacity(edges.len());
        for (i, e) in edges.iter().enumerate() {
            debug_assert!(nodes[e.ancilla].role.is_ancilla() && nodes[e.data].role == NodeRole::Data);
            adjacency[e.ancilla].push(e.data);
            adjacency[e.data].push(e.ancilla);
            edge_index.insert((e.ancilla, e.data), i);
        }
        for list in adjacency.iter_mut() {
            list.sort_unstable();
        }
        let by_coord = nodes.iter().map(|n| (n.coord, n.id)).collect();
        ConnectivityGraph { nodes, edges, family, scheme, adjacency, edge_index, by_coord }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn family(&self) -> &LayoutFamily {
        &self.family
    }

    pub fn scheme(&self) -> RemovalScheme {
        self.scheme
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn role(&self, id: usize) -> NodeRole {
        self.nodes[id].role
    }

    pub fn neighbors(&self, id: usize) -> &[usize] {
        &self.adjacency[id]
    }

    pub fn degree(&self, id: usize) -> usize {
        self.adjacency[id].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// True when a coupler joins `a` and `b` (in either order).
    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edge(a, b).is_some()
    }

    pub fn edge(&self, a: usize, b: usize) -> Option<&Edge> {
        self.edge_index
            .get(&(a, b))
            .or_else(|| self.edge_index.get(&(b, a)))
            .map(|&i| &self.edges[i])
    }

    pub fn node_at(&self, coord: (i64, i64)) -> Option<usize> {
        self.by_coord.get(&coord).copied()
    }

    pub fn long_range_count(&self) -> usize {
        self.edges.iter().filter(|e| e.label == EdgeLabel::LongRange).count()
    }

    /// A route `ancilla - q - router - data` through surviving couplers, for a pair
    /// without a direct coupler. Returns `(router, q)`, smallest ids first.
    pub fn find_detour(&self, ancilla: usize, data: usize) -> Option<(usize, usize)> {
        let want = match self.role(ancilla) {
            NodeRole::XAncilla => NodeRole::ZAncilla,
            NodeRole::ZAncilla => NodeRole::XAncilla,
            NodeRole::Data => return None,
        };
        for &router in self.neighbors(data) {
            if self.role(router) != want {
                continue;
            }
            for &q in self.neighbors(router) {
                if q != data && self.has_edge(ancilla, q) {
                    return Some((router, q));
                }
            }
        }
        None
    }

    /// Checks that every stabilizer of `code` can reach each qubit of its support,
    /// directly or through a detour.
    pub fn check_measurable(&self, code: &CssCode) -> Result<(), LayoutError> {
        let (xs, zs) = check_ancillas(self, code)?;
        for (m, ancillas) in [(&code.hx, &xs), (&code.hz, &zs)] {
            for (r, &anc) in ancillas.iter().enumerate() {
                for q in m.row_ones(r) {
                    if !self.has_edge(anc, q) && self.find_detour(anc, q).is_none() {
                        return Err(LayoutError::NoDetour { ancilla: anc, data: q });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "family": self.family,
            "scheme": self.scheme.name(),
            "nodes": self.nodes,
            "edges": self.edges.iter().map(|e| serde_json::json!({
                "ancilla": e.ancilla,
                "data": e.data,
                "label": e.label,
                "monomial": e.monomial,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Node ids of the X and Z check ancillas of `code` in `g`.
pub fn check_ancillas(g: &ConnectivityGraph, code: &CssCode) -> Result<(Vec<usize>, Vec<usize>), LayoutError> {
    match (&code.family, g.family()) {
        (CodeFamily::BivariateBicycle(spec), LayoutFamily::Torus { spec: gs }) if spec == gs => {
            let ids = BbIds::new(spec);
            Ok(((0..spec.size()).map(|s| ids.x(s)).collect(), (0..spec.size()).map(|s| ids.z(s)).collect()))
        }
        (CodeFamily::RotatedSurface { distance, x_checks, z_checks }, LayoutFamily::Planar { distance: gd })
            if distance == gd =>
        {
            let find = |p: &Plaquette| {
                g.node_at(plaquette_coord(*p))
                    .ok_or_else(|| LayoutError::Mismatch(format!("no ancilla at plaquette ({}, {})", p.a, p.b)))
            };
            let xs = x_checks.iter().map(find).collect::<Result<Vec<_>, _>>()?;
            let zs = z_checks.iter().map(find).collect::<Result<Vec<_>, _>>()?;
            Ok((xs, zs))
        }
        _ => Err(LayoutError::Mismatch("code family and layout family differ".into())),
    }
}

/// Qubit numbering of a BB layout: left data, right data, X ancillas, Z ancillas.
#[derive(Debug, Clone, Copy)]
pub struct BbIds {
    pub size: usize,
}

impl BbIds {
    pub fn new(spec: &BBSpec) -> Self {
        BbIds { size: spec.size() }
    }

    pub fn left(&self, s: usize) -> usize {
        s
    }

    pub fn right(&self, s: usize) -> usize {
        self.size + s
    }

    pub fn x(&self, s: usize) -> usize {
        2 * self.size + s
    }

    pub fn z(&self, s: usize) -> usize {
        3 * self.size + s
    }

    pub fn total(&self) -> usize {
        4 * self.size
    }
}

/// Planar coordinates of the four node kinds at torus site `s`.
fn bb_coords(spec: &BBSpec, s: usize) -> [(i64, i64); 4] {
    let (i, j) = spec.coords(s);
    // orient the embedding so that A's unit term runs along the second axis
    let (p, q) = if spec.a_terms[1] == (0, 1 % spec.m) { (i as i64, j as i64) } else { (j as i64, i as i64) };
    [(2 * p, 2 * q), (2 * p - 1, 2 * q + 1), (2 * p, 2 * q + 1), (2 * p - 1, 2 * q)]
}

fn torus_period(spec: &BBSpec) -> (i64, i64) {
    if spec.a_terms[1] == (0, 1 % spec.m) {
        (2 * spec.ell as i64, 2 * spec.m as i64)
    } else {
        (2 * spec.m as i64, 2 * spec.ell as i64)
    }
}

/// Shortest displacement between two coordinates on the layout torus.
pub fn torus_displacement(spec: &BBSpec, from: (i64, i64), to: (i64, i64)) -> (i64, i64) {
    let (px, py) = torus_period(spec);
    let wrap = |d: i64, p: i64| {
        let d = d.rem_euclid(p);
        if d > p / 2 {
            d - p
        } else {
            d
        }
    };
    (wrap(to.0 - from.0, px), wrap(to.1 - from.1, py))
}

/// Full BB connectivity: each ancilla joined to the six data qubits of its check.
pub fn build_bb_layout(code: &CssCode, spec: &BBSpec) -> Result<ConnectivityGraph, LayoutError> {
    match &code.family {
        CodeFamily::BivariateBicycle(s) if s == spec => {}
        _ => return Err(LayoutError::Mismatch("code was not built from this spec".into())),
    }
    let units_ok = spec.a_terms[0] == (0, 0)
        && spec.b_terms[0] == (0, 0)
        && ((spec.a_terms[1] == (0, 1 % spec.m) && spec.b_terms[1] == (1 % spec.ell, 0))
            || (spec.a_terms[1] == (1 % spec.ell, 0) && spec.b_terms[1] == (0, 1 % spec.m)));
    if !units_ok {
        return Err(LayoutError::Mismatch(format!("polynomials are not in 1 + x / 1 + y normal form: {}", spec.describe())));
    }
    let ids = BbIds::new(spec);
    let n = spec.size();
    let mut nodes = Vec::with_capacity(ids.total());
    for (kind, role) in [(0, NodeRole::Data), (1, NodeRole::Data), (2, NodeRole::XAncilla), (3, NodeRole::ZAncilla)] {
        for s in 0..n {
            nodes.push(Node { id: kind * n + s, role, coord: bb_coords(spec, s)[kind] });
        }
    }
    let label = |t: usize| if t < 2 { EdgeLabel::Local } else { EdgeLabel::LongRange };
    let mut edges = Vec::with_capacity(12 * n);
    let mut push = |ancilla, data, t, block, mono: Monomial| {
        edges.push(Edge { ancilla, data, label: label(t), monomial: spec.monomial_name(mono), block, term: t });
    };
    for s in 0..n {
        for (t, &mono) in spec.a_terms.iter().enumerate() {
            push(ids.x(s), ids.left(spec.shift(s, mono)), t, Block::A, mono);
        }
        for (t, &mono) in spec.b_terms.iter().enumerate() {
            push(ids.x(s), ids.right(spec.shift(s, mono)), t, Block::B, mono);
        }
    }
    for s in 0..n {
        for (t, &mono) in spec.b_terms.iter().enumerate() {
            push(ids.z(s), ids.left(spec.unshift(s, mono)), t, Block::BT, spec.neg(mono));
        }
        for (t, &mono) in spec.a_terms.iter().enumerate() {
            push(ids.z(s), ids.right(spec.unshift(s, mono)), t, Block::AT, spec.neg(mono));
        }
    }
    Ok(ConnectivityGraph::new(nodes, edges, LayoutFamily::Torus { spec: spec.clone() }, RemovalScheme::Full))
}

/// A loop `x-ancilla, data[0], z-ancilla, data[1]`; `labels` follow the cycle order
/// `x-d0, d0-z, z-d1, d1-x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Loop {
    pub x_ancilla: usize,
    pub z_ancilla: usize,
    pub data: [usize; 2],
    pub labels: [EdgeLabel; 4],
}

impl Loop {
    pub fn is_all_long_range(&self) -> bool {
        self.labels.iter().all(|&l| l == EdgeLabel::LongRange)
    }

    pub fn is_short_long_alternating(&self) -> bool {
        self.labels[0] == self.labels[2] && self.labels[1] == self.labels[3] && self.labels[0] != self.labels[1]
    }
}

/// Every loop through one X ancilla, two data qubits and one Z ancilla.
pub fn enumerate_length4_loops(g: &ConnectivityGraph) -> Vec<Loop> {
    let mut out = Vec::new();
    for xa in (0..g.node_count()).filter(|&i| g.role(i) == NodeRole::XAncilla) {
        let mut shared: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &d in g.neighbors(xa) {
            for &za in g.neighbors(d) {
                if g.role(za) == NodeRole::ZAncilla {
                    shared.entry(za).or_default().push(d);
                }
            }
        }
        for (za, ds) in shared {
            for (i, &d0) in ds.iter().enumerate() {
                for &d1 in &ds[i + 1..] {
                    let lab = |a, b| g.edge(a, b).expect("edge").label;
                    out.push(Loop {
                        x_ancilla: xa,
                        z_ancilla: za,
                        data: [d0, d1],
                        labels: [lab(xa, d0), lab(za, d0), lab(za, d1), lab(xa, d1)],
                    });
                }
            }
        }
    }
    out
}

/// Applies a translation-invariant removal scheme.
pub fn apply_removal(g: &ConnectivityGraph, scheme: RemovalScheme, spec: Option<&BBSpec>) -> Result<ConnectivityGraph, LayoutError> {
    let mismatch = || LayoutError::SchemeMismatch {
        scheme: scheme.name().into(),
        layout: match g.family() {
            LayoutFamily::Torus { .. } => format!("torus/{}", g.scheme().name()),
            LayoutFamily::Planar { .. } => format!("planar/{}", g.scheme().name()),
        },
    };
    match (scheme, g.family()) {
        (RemovalScheme::Full, _) => Ok(g.clone()),
        (RemovalScheme::SurfaceHex, LayoutFamily::Planar { distance }) if g.scheme() == RemovalScheme::Full => {
            Ok(surface_hex_layout(*distance))
        }
        (RemovalScheme::ThreeQuartersLR | RemovalScheme::HalfLR, LayoutFamily::Torus { spec: gs })
            if g.scheme() == RemovalScheme::Full =>
        {
            if spec.is_some_and(|s| s != gs) {
                return Err(LayoutError::Mismatch("spec differs from the layout's spec".into()));
            }
            if gs.a_terms.len() < 3 || gs.b_terms.len() < 3 {
                return Err(LayoutError::Mismatch("removal needs three-term polynomials".into()));
            }
            let removed = |e: &Edge| {
                (e.block == Block::AT && e.term == 2)
                    || (scheme == RemovalScheme::HalfLR && e.block == Block::B && e.term == 2)
            };
            let kept: Vec<Edge> = g.edges().iter().filter(|e| !removed(e)).cloned().collect();
            let out = ConnectivityGraph::new(g.nodes().to_vec(), kept, g.family().clone(), scheme);
            for e in g.edges().iter().filter(|e| removed(e)) {
                if out.find_detour(e.ancilla, e.data).is_none() {
                    return Err(LayoutError::NoDetour { ancilla: e.ancilla, data: e.data });
                }
            }
            Ok(out)
        }
        _ => Err(mismatch()),
    }
}

/// Planar coordinates of a plaquette's ancilla.
pub fn plaquette_coord(p: Plaquette) -> (i64, i64) {
    (2 * p.a as i64, 2 * p.b as i64)
}

pub fn surface_data_coord(c: usize, r: usize) -> (i64, i64) {
    (2 * c as i64 + 1, 2 * r as i64 + 1)
}

const CORNERS: [&str; 4] = ["TL", "TR", "BL", "BR"];

fn surface_layout(d: usize, hex: bool) -> ConnectivityGraph {
    let (xs, zs) = surface_plaquettes(d);
    let mut nodes = Vec::new();
    for r in 0..d {
        for c in 0..d {
            nodes.push(Node { id: nodes.len(), role: NodeRole::Data, coord: surface_data_coord(c, r) });
        }
    }
    let mut ancillas: Vec<(Plaquette, NodeRole, Vec<usize>)> = Vec::new();
    for p in &xs {
        ancillas.push((*p, NodeRole::XAncilla, vec![0, 1, 2, 3]));
    }
    for p in &zs {
        ancillas.push((*p, NodeRole::ZAncilla, vec![0, 1, 2, 3]));
    }
    if hex {
        // routers for the bottom row of Z checks and the right column of X checks
        for a in (1..d).step_by(2) {
            ancillas.push((Plaquette { a, b: d }, NodeRole::XAncilla, vec![0, 1]));
        }
        for b in (2..d).step_by(2) {
            ancillas.push((Plaquette { a: d, b }, NodeRole::ZAncilla, vec![0, 2]));
        }
    }
    let mut edges = Vec::new();
    for (p, role, corners) in ancillas {
        let id = nodes.len();
        nodes.push(Node { id, role, coord: plaquette_coord(p) });
        let at = plaquette_corners(d, p);
        for corner in corners {
            if hex && corner == 3 {
                continue;
            }
            if let Some(q) = at[corner] {
                edges.push(Edge {
                    ancilla: id,
                    data: q,
                    label: EdgeLabel::Local,
                    monomial: CORNERS[corner].into(),
                    block: Block::Corner,
                    term: corner,
                });
            }
        }
    }
    let scheme = if hex { RemovalScheme::SurfaceHex } else { RemovalScheme::Full };
    ConnectivityGraph::new(nodes, edges, LayoutFamily::Planar { distance: d }, scheme)
}

/// Square-grid layout of the rotated surface code: every ancilla touches its corners.
pub fn surface_square_layout(d: usize) -> ConnectivityGraph {
    surface_layout(d, false)
}

/// Degree-3 layout: every plaquette loses its bottom-right coupler, and extra X (Z)
/// ancillas along the bottom (right) edge serve as routers.
pub fn surface_hex_layout(d: usize) -> ConnectivityGraph {
    surface_layout(d, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{build_bb_code, build_rotated_surface};

    fn bb(name: &str) -> (CssCode, BBSpec, ConnectivityGraph) {
        let spec = BBSpec::named(name).unwrap();
        let code = build_bb_code(&spec).unwrap();
        let g = build_bb_layout(&code, &spec).unwrap();
        (code, spec, g)
    }

    #[test]
    fn bb72_counts() {
        let (_, _, g) = bb("bb72");
        assert_eq!(g.edges().len(), 432);
        assert_eq!(g.long_range_count(), 144);
        for id in 0..g.node_count() {
            if g.role(id).is_ancilla() {
                let local = g.neighbors(id).iter().filter(|&&q| g.edge(id, q).unwrap().label == EdgeLabel::Local).count();
                assert_eq!((g.degree(id), local), (6, 4));
            }
        }
    }

    #[test]
    fn local_edges_are_unit_steps() {
        for name in ["bb72", "bb90", "bb98", "bb108", "bb144"] {
            let (_, spec, g) = bb(name);
            for e in g.edges() {
                let (dx, dy) = torus_displacement(&spec, g.nodes()[e.ancilla].coord, g.nodes()[e.data].coord);
                let unit = dx.abs() + dy.abs() == 1;
                assert_eq!(unit, e.label == EdgeLabel::Local, "{name} {e:?}");
            }
        }
        let spec = BBSpec::toric(3, 3).unwrap();
        let code = build_bb_code(&spec).unwrap();
        let g = build_bb_layout(&code, &spec).unwrap();
        assert_eq!(g.long_range_count(), 0);
        for e in g.edges() {
            let (dx, dy) = torus_displacement(&spec, g.nodes()[e.ancilla].coord, g.nodes()[e.data].coord);
            assert_eq!(dx.abs() + dy.abs(), 1);
        }
    }

    #[test]
    fn spec_mismatch_rejected() {
        let (code, _, _) = bb("bb72");
        let other = BBSpec::named("bb144").unwrap();
        assert!(build_bb_layout(&code, &other).is_err());
    }

    #[test]
    fn removal_fractions() {
        for name in ["bb72", "bb90", "bb98", "bb108", "bb144"] {
            let (code, spec, g) = bb(name);
            let full_lr = 4 * spec.size();
            assert_eq!(g.long_range_count(), full_lr);
            let tq = apply_removal(&g, RemovalScheme::ThreeQuartersLR, Some(&spec)).unwrap();
            let half = apply_removal(&g, RemovalScheme::HalfLR, Some(&spec)).unwrap();
            assert_eq!(4 * tq.long_range_count(), 3 * full_lr);
            assert_eq!(2 * half.long_range_count(), full_lr);
            tq.check_measurable(&code).unwrap();
            half.check_measurable(&code).unwrap();
            let same = apply_removal(&g, RemovalScheme::Full, Some(&spec)).unwrap();
            assert_eq!(same.edges(), g.edges());
        }
    }

    #[test]
    fn removal_is_translation_invariant() {
        let (_, spec, g) = bb("bb72");
        let half = apply_removal(&g, RemovalScheme::HalfLR, Some(&spec)).unwrap();
        let n = spec.size();
        let ids = BbIds::new(&spec);
        let site_of = |id: usize| (id / n, id % n);
        let translate = |id: usize, t: (usize, usize)| {
            let (kind, s) = site_of(id);
            kind * n + spec.shift(s, t)
        };
        for t in [(1, 0), (0, 1), (2, 5)] {
            for e in g.edges() {
                let moved = (translate(e.ancilla, t), translate(e.data, t));
                assert_eq!(half.has_edge(e.ancilla, e.data), half.has_edge(moved.0, moved.1));
            }
        }
        assert!(ids.z(0) < ids.total());
    }

    #[test]
    fn removal_needs_full_layout() {
        let (_, spec, g) = bb("bb72");
        let half = apply_removal(&g, RemovalScheme::HalfLR, Some(&spec)).unwrap();
        assert!(matches!(
            apply_removal(&half, RemovalScheme::ThreeQuartersLR, Some(&spec)),
            Err(LayoutError::SchemeMismatch { .. })
        ));
        assert!(apply_removal(&g, RemovalScheme::SurfaceHex, Some(&spec)).is_err());
    }

    #[test]
    fn every_z_ancilla_has_long_range_loop() {
        // A = 1 + x + xy, B = 1 + y + xy on a 4x4 torus
        let spec = BBSpec { ell: 4, m: 4, a_terms: vec![(0, 0), (1, 0), (1, 1)], b_terms: vec![(0, 0), (0, 1), (1, 1)] };
        let code = build_bb_code(&spec).unwrap();
        let g = build_bb_layout(&code, &spec).unwrap();
        let loops = enumerate_length4_loops(&g);
        for z in (0..g.node_count()).filter(|&i| g.role(i) == NodeRole::ZAncilla) {
            assert!(loops.iter().any(|l| l.z_ancilla == z && l.is_all_long_range()), "z ancilla {z}");
        }
    }

    fn four_cycles_oracle(g: &ConnectivityGraph) -> usize {
        // common-neighbour counts from the X-data and Z-data adjacency matrices
        let n = g.node_count();
        let xs: Vec<usize> = (0..n).filter(|&i| g.role(i) == NodeRole::XAncilla).collect();
        let zs: Vec<usize> = (0..n).filter(|&i| g.role(i) == NodeRole::ZAncilla).collect();
        let mut adj = vec![vec![0u32; n]; n];
        for e in g.edges() {
            adj[e.ancilla][e.data] = 1;
        }
        let mut total = 0;
        for &x in &xs {
            for &z in &zs {
                let c: u32 = (0..n).map(|d| adj[x][d] * adj[z][d]).sum();
                total += (c * c.saturating_sub(1) / 2) as usize;
            }
        }
        total
    }

    #[test]
    fn loop_count_matches_oracle() {
        let (_, spec, g) = bb("bb72");
        let loops = enumerate_length4_loops(&g);
        assert_eq!(loops.len(), four_cycles_oracle(&g));
        let half = apply_removal(&g, RemovalScheme::HalfLR, Some(&spec)).unwrap();
        assert_eq!(enumerate_length4_loops(&half).len(), four_cycles_oracle(&half));
        assert!(loops.iter().any(Loop::is_short_long_alternating));
    }

    #[test]
    fn surface_loops_are_adjacent_plaquettes() {
        let g = surface_square_layout(3);
        let loops = enumerate_length4_loops(&g);
        assert_eq!(loops.len(), four_cycles_oracle(&g));
        for l in &loops {
            let a = g.nodes()[l.x_ancilla].coord;
            let b = g.nodes()[l.z_ancilla].coord;
            assert_eq!((a.0 - b.0).abs() + (a.1 - b.1).abs(), 2);
        }
        let lone = ConnectivityGraph::new(
            vec![Node { id: 0, role: NodeRole::XAncilla, coord: (0, 0) }],
            vec![],
            LayoutFamily::Planar { distance: 3 },
            RemovalScheme::Full,
        );
        assert!(enumerate_length4_loops(&lone).is_empty());
    }

    #[test]
    fn hex_layout_degree_and_detours() {
        for d in [3, 5, 7] {
            let g = surface_hex_layout(d);
            assert_eq!(g.max_degree(), 3, "d={d}");
            let code = build_rotated_surface(d).unwrap();
            g.check_measurable(&code).unwrap();
            let extra_x = g.nodes().iter().filter(|n| n.role == NodeRole::XAncilla).count() - code.hx.rows();
            let extra_z = g.nodes().iter().filter(|n| n.role == NodeRole::ZAncilla).count() - code.hz.rows();
            assert_eq!((extra_x, extra_z), ((d - 1) / 2, (d - 1) / 2));
            let square = surface_square_layout(d);
            assert_eq!(square.max_degree(), 4);
            let hex = apply_removal(&square, RemovalScheme::SurfaceHex, None).unwrap();
            assert_eq!(hex.edges(), g.edges());
        }
    }

    #[test]
    fn json_export_lists_everything() {
        let g = surface_hex_layout(3);
        let v = g.to_json();
        assert_eq!(v["nodes"].as_array().unwrap().len(), g.node_count());
        assert_eq!(v["edges"].as_array().unwrap().len(), g.edges().len());
        assert_eq!(v["scheme"], "surface-hex");
    }
}
