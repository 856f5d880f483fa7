//! Combinatorial 2-complexes.
//!
//! Edge `e` has two darts: `2e` runs from `edges[e].0` to `edges[e].1` and
//! `2e + 1` is its reverse. A face is a closed sequence of darts. Faces keep
//! their attaching path as a dart sequence, so an edge traversed twice by the
//! same face shows up twice.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::words::{Letter, Presentation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComplexError {
    #[error("vertex {0} out of range")]
    VertexOutOfRange(usize),
    #[error("face {0} out of range")]
    FaceOutOfRange(usize),
    #[error("face {0} has an open attaching path")]
    OpenFace(usize),
    #[error("removal leaves cell {0} without its boundary")]
    NotClosed(String),
}

#[inline]
pub fn dart_edge(d: usize) -> usize {
    d / 2
}

#[inline]
pub fn dart_rev(d: usize) -> usize {
    d ^ 1
}

#[inline]
pub fn dart_of(edge: usize, forward: bool) -> usize {
    2 * edge + usize::from(!forward)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FaceLabel {
    /// Index of the relator this face realizes.
    pub relator: usize,
    /// Branching degree `n` of a face attached along `w^n`.
    pub degree: usize,
    /// Length of the root word `w`.
    pub root_len: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Face {
    pub boundary: Vec<usize>,
    pub label: Option<FaceLabel>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoComplex {
    pub num_vertices: usize,
    /// `(origin, target)` of the forward dart of each edge.
    pub edges: Vec<(usize, usize)>,
    /// Generator carried by the forward dart, if labelled.
    pub edge_labels: Vec<Option<usize>>,
    pub faces: Vec<Face>,
}

impl TwoComplex {
    pub fn new(num_vertices: usize) -> Self {
        TwoComplex { num_vertices, ..Default::default() }
    }

    pub fn add_vertex(&mut self) -> usize {
        self.num_vertices += 1;
        self.num_vertices - 1
    }

    pub fn add_edge(&mut self, u: usize, v: usize, label: Option<usize>) -> usize {
        self.edges.push((u, v));
        self.edge_labels.push(label);
        self.edges.len() - 1
    }

    pub fn add_face(&mut self, boundary: Vec<usize>, label: Option<FaceLabel>) -> Result<usize, ComplexError> {
        let idx = self.faces.len();
        self.check_closed(&boundary).map_err(|_| ComplexError::OpenFace(idx))?;
        self.faces.push(Face { boundary, label });
        Ok(idx)
    }

    fn check_closed(&self, boundary: &[usize]) -> Result<(), ()> {
        if boundary.is_empty() {
            return Err(());
        }
        for i in 0..boundary.len() {
            let d = boundary[i];
            let n = boundary[(i + 1) % boundary.len()];
            if dart_edge(d) >= self.edges.len() || dart_edge(n) >= self.edges.len() {
                return Err(());
            }
            if self.target(d) != self.origin(n) {
                return Err(());
            }
        }
        Ok(())
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn origin(&self, d: usize) -> usize {
        let (u, v) = self.edges[dart_edge(d)];
        if d.is_multiple_of(2) { u } else { v }
    }

    pub fn target(&self, d: usize) -> usize {
        self.origin(dart_rev(d))
    }

    /// Letter read along dart `d`, if its edge is labelled.
    pub fn dart_letter(&self, d: usize) -> Option<Letter> {
        self.edge_labels[dart_edge(d)].map(|g| if d.is_multiple_of(2) { Letter::pos(g) } else { Letter::neg(g) })
    }

    /// Number of edge ends at `v` (a loop counts twice).
    pub fn valence(&self, v: usize) -> usize {
        self.edges.iter().map(|&(a, b)| usize::from(a == v) + usize::from(b == v)).sum()
    }

    /// For each edge, the number of times face boundaries traverse it.
    pub fn edge_traversals(&self) -> Vec<usize> {
        let mut t = vec![0; self.edges.len()];
        for f in &self.faces {
            for &d in &f.boundary {
                t[dart_edge(d)] += 1;
            }
        }
        t
    }

    pub fn face_vertices(&self, f: usize) -> BTreeSet<usize> {
        self.faces[f].boundary.iter().map(|&d| self.origin(d)).collect()
    }

    pub fn face_edges(&self, f: usize) -> BTreeSet<usize> {
        self.faces[f].boundary.iter().map(|&d| dart_edge(d)).collect()
    }

    /// Number of connected components (vertices joined by edges).
    pub fn num_components(&self) -> usize {
        let mut uf = UnionFind::new(self.num_vertices);
        for &(u, v) in &self.edges {
            uf.union(u, v);
        }
        uf.count()
    }

    /// Remove the given cells and reindex. The remaining cells must form a
    /// subcomplex.
    pub fn remove_cells(
        &self,
        vertices: &BTreeSet<usize>,
        edges: &BTreeSet<usize>,
        faces: &BTreeSet<usize>,
    ) -> Result<TwoComplex, ComplexError> {
        let mut vmap = vec![usize::MAX; self.num_vertices];
        let mut nv = 0;
        for (v, slot) in vmap.iter_mut().enumerate() {
            if !vertices.contains(&v) {
                *slot = nv;
                nv += 1;
            }
        }
        let mut emap = vec![usize::MAX; self.edges.len()];
        let mut out = TwoComplex::new(nv);
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            if edges.contains(&e) {
                continue;
            }
            if vmap[u] == usize::MAX || vmap[v] == usize::MAX {
                return Err(ComplexError::NotClosed(format!("edge {e}")));
            }
            emap[e] = out.add_edge(vmap[u], vmap[v], self.edge_labels[e]);
        }
        for (fi, f) in self.faces.iter().enumerate() {
            if faces.contains(&fi) {
                continue;
            }
            let mut b = Vec::with_capacity(f.boundary.len());
            for &d in &f.boundary {
                let e = emap[dart_edge(d)];
                if e == usize::MAX {
                    return Err(ComplexError::NotClosed(format!("face {fi}")));
                }
                b.push(2 * e + d % 2);
            }
            out.faces.push(Face { boundary: b, label: f.label });
        }
        Ok(out)
    }

    /// The 1-skeleton together with the given faces, all other faces dropped.
    pub fn with_faces(&self, keep: &BTreeSet<usize>) -> TwoComplex {
        let drop: BTreeSet<usize> = (0..self.faces.len()).filter(|f| !keep.contains(f)).collect();
        self.remove_cells(&BTreeSet::new(), &BTreeSet::new(), &drop).expect("dropping faces keeps closure")
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph complex {\n");
        for v in 0..self.num_vertices {
            let _ = writeln!(s, "  v{v};");
        }
        let trav = self.edge_traversals();
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            let label = match self.edge_labels[e] {
                Some(g) => format!("e{e}:g{g}"),
                None => format!("e{e}"),
            };
            let _ = writeln!(s, "  v{u} -- v{v} [label=\"{label} x{}\"];", trav[e]);
        }
        s.push_str("}\n");
        s
    }
}

/// One vertex, a loop per generator and a face per relator.
pub fn presentation_complex(p: &Presentation) -> TwoComplex {
    let mut c = TwoComplex::new(1);
    for g in &p.generators {
        c.add_edge(0, 0, Some(g.id));
    }
    for (i, r) in p.relators.iter().enumerate() {
        let boundary: Vec<usize> = r.representative.0.iter().map(|l| l.index()).collect();
        let label = FaceLabel { relator: i, degree: 1, root_len: r.len() };
        c.faces.push(Face { boundary, label: Some(label) });
    }
    c
}

pub fn euler_characteristic(c: &TwoComplex) -> i64 {
    c.num_vertices as i64 - c.edges.len() as i64 + c.faces.len() as i64
}

/// Link of a vertex. Nodes are darts entering the vertex; each corner of a
/// face boundary at the vertex contributes one arc.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkGraph {
    pub vertex: usize,
    pub nodes: Vec<usize>,
    /// Arcs as pairs of node positions.
    pub arcs: Vec<(usize, usize)>,
}

impl LinkGraph {
    pub fn to_dot(&self) -> String {
        let mut s = format!("graph link_v{} {{\n", self.vertex);
        for (i, d) in self.nodes.iter().enumerate() {
            let _ = writeln!(s, "  n{i} [label=\"d{d}\"];");
        }
        for &(a, b) in &self.arcs {
            let _ = writeln!(s, "  n{a} -- n{b};");
        }
        s.push_str("}\n");
        s
    }
}

pub fn link(c: &TwoComplex, v: usize) -> Result<LinkGraph, ComplexError> {
    if v >= c.num_vertices {
        return Err(ComplexError::VertexOutOfRange(v));
    }
    let nodes: Vec<usize> = (0..2 * c.edges.len()).filter(|&d| c.target(d) == v).collect();
    let pos: BTreeMap<usize, usize> = nodes.iter().enumerate().map(|(i, &d)| (d, i)).collect();
    let mut arcs = Vec::new();
    for f in &c.faces {
        let k = f.boundary.len();
        for i in 0..k {
            let d = f.boundary[i];
            let n = f.boundary[(i + 1) % k];
            if c.target(d) == v {
                arcs.push((pos[&d], pos[&dart_rev(n)]));
            }
        }
    }
    Ok(LinkGraph { vertex: v, nodes, arcs })
}

/// Shortest cycle length of a multigraph given by node count and arcs;
/// `None` for a forest. Loops have length 1 and parallel arcs length 2.
pub fn multigraph_girth(n: usize, arcs: &[(usize, usize)]) -> Option<usize> {
    if arcs.iter().any(|&(a, b)| a == b) {
        return Some(1);
    }
    let mut seen = BTreeSet::new();
    for &(a, b) in arcs {
        if !seen.insert((a.min(b), a.max(b))) {
            return Some(2);
        }
    }
    let mut adj = vec![Vec::new(); n];
    for (id, &(a, b)) in arcs.iter().enumerate() {
        adj[a].push((b, id));
        adj[b].push((a, id));
    }
    let mut best: Option<usize> = None;
    for root in 0..n {
        let mut dist = vec![usize::MAX; n];
        let mut parent_arc = vec![usize::MAX; n];
        dist[root] = 0;
        let mut q = VecDeque::from([root]);
        while let Some(u) = q.pop_front() {
            if best.is_some_and(|b| 2 * dist[u] + 1 >= b) {
                break;
            }
            for &(w, id) in &adj[u] {
                if id == parent_arc[u] {
                    continue;
                }
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    parent_arc[w] = id;
                    q.push_back(w);
                } else {
                    let len = dist[u] + dist[w] + 1;
                    best = Some(best.map_or(len, |b| b.min(len)));
                }
            }
        }
    }
    best
}

pub fn girth(g: &LinkGraph) -> Option<usize> {
    multigraph_girth(g.nodes.len(), &g.arcs)
}

/// Canonical form of a closed dart path up to rotation and reversal.
pub fn cycle_key(boundary: &[usize]) -> Vec<usize> {
    let rev: Vec<usize> = boundary.iter().rev().map(|&d| dart_rev(d)).collect();
    let mut best: Option<Vec<usize>> = None;
    for seq in [boundary, &rev[..]] {
        let n = seq.len();
        for k in 0..n {
            let cand: Vec<usize> = (0..n).map(|i| seq[(i + k) % n]).collect();
            if best.as_ref().is_none_or(|b| cand < *b) {
                best = Some(cand);
            }
        }
    }
    best.unwrap_or_default()
}

/// Merge faces whose attaching cycles agree up to rotation and reversal.
pub fn quotient_duplicates(c: &TwoComplex) -> TwoComplex {
    let mut seen = BTreeSet::new();
    let mut drop = BTreeSet::new();
    for (i, f) in c.faces.iter().enumerate() {
        if !seen.insert(cycle_key(&f.boundary)) {
            drop.insert(i);
        }
    }
    c.remove_cells(&BTreeSet::new(), &BTreeSet::new(), &drop).expect("dropping faces keeps closure")
}

/// A set of cells of a parent complex closed under taking boundaries.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubComplex {
    pub vertices: BTreeSet<usize>,
    pub edges: BTreeSet<usize>,
    pub faces: BTreeSet<usize>,
}

impl SubComplex {
    /// Closure of the given cells.
    pub fn closure(c: &TwoComplex, vertices: &[usize], edges: &[usize], faces: &[usize]) -> SubComplex {
        let mut s = SubComplex::default();
        s.vertices.extend(vertices.iter().copied());
        s.faces.extend(faces.iter().copied());
        for &f in faces {
            s.edges.extend(c.face_edges(f));
        }
        s.edges.extend(edges.iter().copied());
        for &e in &s.edges {
            let (u, v) = c.edges[e];
            s.vertices.insert(u);
            s.vertices.insert(v);
        }
        s
    }

    pub fn is_closed(&self, c: &TwoComplex) -> bool {
        self.edges.iter().all(|&e| {
            let (u, v) = c.edges[e];
            self.vertices.contains(&u) && self.vertices.contains(&v)
        }) && self.faces.iter().all(|&f| c.face_edges(f).iter().all(|e| self.edges.contains(e)))
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    pub fn is_connected(&self, c: &TwoComplex) -> bool {
        let Some(&start) = self.vertices.iter().next() else {
            return true;
        };
        let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &e in &self.edges {
            let (u, v) = c.edges[e];
            adj.entry(u).or_default().push(v);
            adj.entry(v).or_default().push(u);
        }
        let mut seen = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for &w in adj.get(&u).into_iter().flatten() {
                if seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        seen.len() == self.vertices.len()
    }

    /// Extract as a standalone complex.
    pub fn to_complex(&self, c: &TwoComplex) -> TwoComplex {
        let dv: BTreeSet<usize> = (0..c.num_vertices).filter(|v| !self.vertices.contains(v)).collect();
        let de: BTreeSet<usize> = (0..c.edges.len()).filter(|e| !self.edges.contains(e)).collect();
        let df: BTreeSet<usize> = (0..c.faces.len()).filter(|f| !self.faces.contains(f)).collect();
        c.remove_cells(&dv, &de, &df).expect("subcomplex is closed")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryIntersection {
    pub subcomplex: SubComplex,
    /// True when the intersection is connected; an empty intersection
    /// counts as connected and is flagged separately.
    pub connected: bool,
    pub empty: bool,
}

/// `∂f1 ∩ ∂f2` as a subcomplex of the 1-skeleton.
pub fn boundary_intersection(c: &TwoComplex, f1: usize, f2: usize) -> Result<BoundaryIntersection, ComplexError> {
    for f in [f1, f2] {
        if f >= c.faces.len() {
            return Err(ComplexError::FaceOutOfRange(f));
        }
    }
    let e1 = c.face_edges(f1);
    let e2 = c.face_edges(f2);
    let v1 = c.face_vertices(f1);
    let v2 = c.face_vertices(f2);
    let subcomplex = SubComplex {
        vertices: v1.intersection(&v2).copied().collect(),
        edges: e1.intersection(&e2).copied().collect(),
        faces: BTreeSet::new(),
    };
    let connected = subcomplex.is_connected(c);
    let empty = subcomplex.is_empty();
    Ok(BoundaryIntersection { subcomplex, connected, empty })
}

/// Euler characteristic of the image of `∂f`; zero exactly when that image
/// is a circle, for a connected boundary.
pub fn face_boundary_euler(c: &TwoComplex, f: usize) -> i64 {
    c.face_vertices(f).len() as i64 - c.face_edges(f).len() as i64
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut y = x;
        while self.parent[y] != r {
            let next = self.parent[y];
            self.parent[y] = r;
            y = next;
        }
        r
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }

    pub fn count(&mut self) -> usize {
        (0..self.parent.len()).filter(|&x| self.find(x) == x).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::parse_presentation;

    fn pc(s: &str) -> TwoComplex {
        presentation_complex(&parse_presentation(s).unwrap())
    }

    #[test]
    fn presentation_complex_counts() {
        let t = pc("<a,b | [a,b]>");
        assert_eq!((t.num_vertices, t.num_edges(), t.num_faces()), (1, 2, 1));
        assert_eq!(euler_characteristic(&t), 0);
        let d = pc("<a | a a a^-1>");
        assert_eq!((d.num_vertices, d.num_edges(), d.num_faces()), (1, 1, 1));
        assert_eq!(euler_characteristic(&d), 1);
        let w = pc("<a,b | >");
        assert_eq!(w.num_faces(), 0);
        assert_eq!(euler_characteristic(&TwoComplex::new(1)), 1);
    }

    #[test]
    fn links_and_girth() {
        let t = pc("<a,b | [a,b]>");
        let l = link(&t, 0).unwrap();
        assert_eq!((l.nodes.len(), l.arcs.len()), (4, 4));
        assert_eq!(girth(&l), Some(4));
        let w = link(&pc("<a,b | >"), 0).unwrap();
        assert_eq!((w.nodes.len(), w.arcs.len()), (4, 0));
        assert_eq!(girth(&w), None);
        let d = link(&pc("<a | a a a^-1>"), 0).unwrap();
        assert_eq!((d.nodes.len(), d.arcs.len()), (2, 3));
        assert!(link(&t, 3).is_err());
    }

    #[test]
    fn girth_special_cases() {
        assert_eq!(multigraph_girth(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]), Some(4));
        assert_eq!(multigraph_girth(3, &[(0, 1), (1, 2)]), None);
        assert_eq!(multigraph_girth(2, &[(0, 1), (1, 0)]), Some(2));
        assert_eq!(multigraph_girth(1, &[(0, 0)]), Some(1));
        assert_eq!(multigraph_girth(5, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2)]), Some(3));
    }

    #[test]
    fn duplicates_quotient() {
        let mut c = TwoComplex::new(1);
        c.add_edge(0, 0, Some(0));
        c.add_edge(0, 0, Some(1));
        c.add_face(vec![0, 2], None).unwrap();
        c.add_face(vec![2, 0], None).unwrap();
        c.add_face(vec![3, 1], None).unwrap();
        let q = quotient_duplicates(&c);
        assert_eq!(q.num_faces(), 1);
        assert_eq!(q.num_edges(), 2);
        assert_eq!(quotient_duplicates(&q), q);
        let t = pc("<a,b | [a,b]>");
        assert_eq!(quotient_duplicates(&t), t);
    }

    fn square_strip(n: usize) -> TwoComplex {
        // vertices 0..=n on the bottom, n+1..=2n+1 on top
        let mut c = TwoComplex::new(2 * n + 2);
        let bottom: Vec<usize> = (0..n).map(|i| c.add_edge(i, i + 1, Some(0))).collect();
        let top: Vec<usize> = (0..n).map(|i| c.add_edge(n + 1 + i, n + 2 + i, Some(0))).collect();
        let vert: Vec<usize> = (0..=n).map(|i| c.add_edge(i, n + 1 + i, Some(1))).collect();
        for i in 0..n {
            let b = vec![
                dart_of(bottom[i], true),
                dart_of(vert[i + 1], true),
                dart_of(top[i], false),
                dart_of(vert[i], false),
            ];
            c.add_face(b, None).unwrap();
        }
        c
    }

    #[test]
    fn intersections() {
        let c = square_strip(3);
        let bi = boundary_intersection(&c, 0, 1).unwrap();
        assert!(bi.connected && !bi.empty);
        assert_eq!(bi.subcomplex.edges.len(), 1);
        let far = boundary_intersection(&c, 0, 2).unwrap();
        assert!(far.empty && far.connected);
        assert_eq!(face_boundary_euler(&c, 0), 0);

        // Two faces meeting in two disjoint arcs: an annulus cut into two squares.
        let mut a = TwoComplex::new(4);
        let e0 = a.add_edge(0, 1, None);
        let e1 = a.add_edge(2, 3, None);
        let u0 = a.add_edge(0, 2, None);
        let u1 = a.add_edge(0, 2, None);
        let w0 = a.add_edge(1, 3, None);
        let w1 = a.add_edge(1, 3, None);
        let _ = (u1, w1);
        a.add_face(vec![dart_of(e0, true), dart_of(w0, true), dart_of(e1, false), dart_of(u0, false)], None).unwrap();
        a.add_face(vec![dart_of(e0, true), dart_of(w1, true), dart_of(e1, false), dart_of(u1, false)], None).unwrap();
        let bi = boundary_intersection(&a, 0, 1).unwrap();
        assert!(!bi.connected);
    }

    #[test]
    fn open_face_rejected() {
        let mut c = TwoComplex::new(2);
        let e = c.add_edge(0, 1, None);
        assert!(c.add_face(vec![dart_of(e, true)], None).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let t = pc("<a,b | [a,b]>");
        let s = serde_json::to_string(&t).unwrap();
        let back: TwoComplex = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
        assert!(t.to_dot().contains("v0 -- v0"));
    }

    mod props {
        use super::*;
        use crate::words::{Letter, Word};
        use proptest::prelude::*;

        fn pres() -> impl Strategy<Value = Presentation> {
            (1usize..4, prop::collection::vec(prop::collection::vec((0usize..3, any::<bool>()), 1..7), 0..4))
                .prop_map(|(k, rels)| {
                    let names = ["a", "b", "c"];
                    let rels = rels
                        .into_iter()
                        .map(|r| Word(r.into_iter().map(|(g, s)| {
                            let g = g % k;
                            if s { Letter::pos(g) } else { Letter::neg(g) }
                        }).collect()))
                        .collect();
                    Presentation::new(&names[..k], rels)
                })
        }

        proptest! {
            #[test]
            fn chi_and_link_counts(p in pres()) {
                let c = presentation_complex(&p);
                prop_assert_eq!(euler_characteristic(&c), 1 - p.rank() as i64 + p.relators.len() as i64);
                let l = link(&c, 0).unwrap();
                prop_assert_eq!(l.arcs.len(), p.total_relator_length());
                let q = quotient_duplicates(&c);
                prop_assert_eq!(quotient_duplicates(&q), q);
            }
        }
    }
}
