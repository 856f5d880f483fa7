//! Free faces, elementary collapses, n-collapsing checks and
//! bicollapsibility verdicts.

mod refute;

use std::collections::{BTreeSet, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex2::{dart_edge, presentation_complex, SubComplex, TwoComplex};
use crate::smallcancel::{certify_3_collapsing, is_staggered};
use crate::words::{is_proper_power, Presentation};

pub use refute::{fold_polygons, pi1_trivial, polygon, Pi1Verdict};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CollapseError {
    #[error("free face pair {0:?} is not valid in this complex")]
    Stale(FreeFacePair),
    #[error("the ball has no faces inside its safe region")]
    NoSafeRegion,
    #[error("n must be at least 1")]
    BadN,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FreeFacePair {
    /// A valence-1 vertex and the edge (lying on no face) ending there.
    Spur { vertex: usize, edge: usize },
    /// An edge traversed exactly once in total, by `face`.
    FaceCollapse { edge: usize, face: usize },
}

impl FreeFacePair {
    /// The cell that collapses.
    pub fn collapsing_cell(&self) -> Cell {
        match *self {
            FreeFacePair::Spur { edge, .. } => Cell::Edge(edge),
            FreeFacePair::FaceCollapse { face, .. } => Cell::Face(face),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Cell {
    Vertex(usize),
    Edge(usize),
    Face(usize),
}

pub fn free_face_pairs(c: &TwoComplex) -> Vec<FreeFacePair> {
    let trav = c.edge_traversals();
    let mut out = Vec::new();
    for (e, &(u, v)) in c.edges.iter().enumerate() {
        if trav[e] == 0 && u != v {
            for x in [u, v] {
                if c.valence(x) == 1 {
                    out.push(FreeFacePair::Spur { vertex: x, edge: e });
                }
            }
        }
    }
    for (f, face) in c.faces.iter().enumerate() {
        let mut seen = BTreeSet::new();
        for &d in &face.boundary {
            let e = dart_edge(d);
            if trav[e] == 1 && seen.insert(e) {
                out.push(FreeFacePair::FaceCollapse { edge: e, face: f });
            }
        }
    }
    out.sort();
    out
}

/// Number of distinct cells admitting at least one free face.
pub fn count_collapsible_cells(c: &TwoComplex) -> usize {
    free_face_pairs(c).iter().map(FreeFacePair::collapsing_cell).collect::<BTreeSet<_>>().len()
}

/// Number of free-face pairs, the stricter count.
pub fn count_free_face_pairs(c: &TwoComplex) -> usize {
    free_face_pairs(c).len()
}

pub fn do_collapse(c: &TwoComplex, p: FreeFacePair) -> Result<TwoComplex, CollapseError> {
    if !free_face_pairs(c).contains(&p) {
        return Err(CollapseError::Stale(p));
    }
    let none = BTreeSet::new();
    let out = match p {
        FreeFacePair::Spur { vertex, edge } => c.remove_cells(&BTreeSet::from([vertex]), &BTreeSet::from([edge]), &none),
        FreeFacePair::FaceCollapse { edge, face } => c.remove_cells(&none, &BTreeSet::from([edge]), &BTreeSet::from([face])),
    };
    Ok(out.expect("free face removal keeps closure"))
}

/// Closure of a single 0-cell, a single 1-cell, or a single 2-cell that
/// collapses along a free face.
pub fn is_trivial_complex(c: &TwoComplex) -> bool {
    match (c.num_vertices, c.edges.len(), c.faces.len()) {
        (1, 0, 0) => true,
        (v, 1, 0) => {
            let (a, b) = c.edges[0];
            v == if a == b { 1 } else { 2 }
        }
        (_, _, 1) => {
            let fe = c.face_edges(0);
            let fv = c.face_vertices(0);
            fe.len() == c.edges.len()
                && fv.len() == c.num_vertices
                && free_face_pairs(c).iter().any(|p| matches!(p, FreeFacePair::FaceCollapse { .. }))
        }
        _ => false,
    }
}

/// Pairs in the indexing of the successive complexes they are applied to.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollapseSequence {
    pub steps: Vec<FreeFacePair>,
}

impl CollapseSequence {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Apply every step, failing on the first stale pair.
    pub fn replay(&self, c: &TwoComplex) -> Result<TwoComplex, CollapseError> {
        let mut cur = c.clone();
        for &p in &self.steps {
            cur = do_collapse(&cur, p)?;
        }
        Ok(cur)
    }
}

/// Collapse bookkeeping in the original indexing.
struct Alive {
    vertices: Vec<bool>,
    edges: Vec<bool>,
    faces: Vec<bool>,
    steps: Vec<FreeFacePair>,
}

impl Alive {
    fn new(c: &TwoComplex) -> Self {
        Alive {
            vertices: vec![true; c.num_vertices],
            edges: vec![true; c.edges.len()],
            faces: vec![true; c.faces.len()],
            steps: Vec::new(),
        }
    }

    fn rank(flags: &[bool], i: usize) -> usize {
        flags[..i].iter().filter(|&&x| x).count()
    }

    /// Record a pair given in original ids, storing it in current ids.
    fn apply(&mut self, p: FreeFacePair) {
        let local = match p {
            FreeFacePair::Spur { vertex, edge } => {
                FreeFacePair::Spur { vertex: Self::rank(&self.vertices, vertex), edge: Self::rank(&self.edges, edge) }
            }
            FreeFacePair::FaceCollapse { edge, face } => {
                FreeFacePair::FaceCollapse { edge: Self::rank(&self.edges, edge), face: Self::rank(&self.faces, face) }
            }
        };
        self.steps.push(local);
        match p {
            FreeFacePair::Spur { vertex, edge } => {
                self.vertices[vertex] = false;
                self.edges[edge] = false;
            }
            FreeFacePair::FaceCollapse { edge, face } => {
                self.edges[edge] = false;
                self.faces[face] = false;
            }
        }
    }
}

/// A face collapse available when only the faces in `alive` remain.
fn face_moves(c: &TwoComplex, alive: &[bool]) -> Vec<(usize, usize)> {
    let mut trav = vec![0usize; c.edges.len()];
    for (f, face) in c.faces.iter().enumerate() {
        if alive[f] {
            for &d in &face.boundary {
                trav[dart_edge(d)] += 1;
            }
        }
    }
    let mut out = Vec::new();
    for (f, face) in c.faces.iter().enumerate() {
        if !alive[f] {
            continue;
        }
        if let Some(&d) = face.boundary.iter().find(|&&d| trav[dart_edge(d)] == 1) {
            out.push((dart_edge(d), f));
        }
    }
    out
}

const SEARCH_STATE_LIMIT: usize = 1 << 16;

/// Remove every face by face collapses.
///
/// A free edge of a face stays free when other faces are removed, so the
/// greedy pass finds a sequence whenever one exists. If it fails, a memoized
/// search over face subsets confirms the failure, up to a state limit.
pub fn collapses_to_graph(c: &TwoComplex) -> Option<CollapseSequence> {
    collapse_faces(c).map(|a| CollapseSequence { steps: a.steps })
}

fn collapse_faces(c: &TwoComplex) -> Option<Alive> {
    let mut a = Alive::new(c);
    loop {
        if a.faces.iter().all(|&x| !x) {
            return Some(a);
        }
        match face_moves(c, &a.faces).first() {
            Some(&(edge, face)) => a.apply(FreeFacePair::FaceCollapse { edge, face }),
            None => break,
        }
    }
    let mut failed: HashSet<Vec<bool>> = HashSet::new();
    let mut path = Vec::new();
    let start = vec![true; c.faces.len()];
    if exhaustive(c, &start, &mut failed, &mut path) {
        let mut a = Alive::new(c);
        for (edge, face) in path {
            a.apply(FreeFacePair::FaceCollapse { edge, face });
        }
        return Some(a);
    }
    None
}

fn exhaustive(c: &TwoComplex, alive: &[bool], failed: &mut HashSet<Vec<bool>>, path: &mut Vec<(usize, usize)>) -> bool {
    if alive.iter().all(|&x| !x) {
        return true;
    }
    if failed.contains(alive) || failed.len() > SEARCH_STATE_LIMIT {
        return false;
    }
    for (edge, face) in face_moves(c, alive) {
        let mut next = alive.to_vec();
        next[face] = false;
        path.push((edge, face));
        if exhaustive(c, &next, failed, path) {
            return true;
        }
        path.pop();
    }
    failed.insert(alive.to_vec());
    false
}

/// Collapse to a single vertex: faces first, then spurs of the remaining
/// tree.
pub fn collapses_to_point(c: &TwoComplex) -> Option<CollapseSequence> {
    if c.num_vertices == 0 || c.num_components() != 1 {
        return None;
    }
    let mut a = collapse_faces(c)?;
    let nv = a.vertices.iter().filter(|&&x| x).count();
    let ne = a.edges.iter().filter(|&&x| x).count();
    if nv != ne + 1 {
        return None;
    }
    loop {
        let mut valence = vec![0usize; c.num_vertices];
        for (e, &(u, v)) in c.edges.iter().enumerate() {
            if a.edges[e] {
                valence[u] += 1;
                valence[v] += 1;
            }
        }
        let spur = c.edges.iter().enumerate().find_map(|(e, &(u, v))| {
            if !a.edges[e] {
                return None;
            }
            if valence[u] == 1 {
                Some((u, e))
            } else if valence[v] == 1 {
                Some((v, e))
            } else {
                None
            }
        });
        match spur {
            Some((vertex, edge)) => a.apply(FreeFacePair::Spur { vertex, edge }),
            None => break,
        }
    }
    (a.vertices.iter().filter(|&&x| x).count() == 1).then_some(CollapseSequence { steps: a.steps })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictStatus {
    Certified,
    Refuted,
    Inconclusive,
}

/// A complex with too few collapsing cells.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub complex: TwoComplex,
    /// The same cells inside the searched complex, when there is one.
    pub subcomplex: Option<SubComplex>,
    pub faces: usize,
    pub collapsible_cells: usize,
    pub free_face_pairs: usize,
    /// The number of collapsing cells that was required.
    pub required: usize,
}

impl Witness {
    pub fn new(complex: TwoComplex, subcomplex: Option<SubComplex>, required: usize) -> Self {
        Witness {
            faces: complex.faces.len(),
            collapsible_cells: count_collapsible_cells(&complex),
            free_face_pairs: count_free_face_pairs(&complex),
            complex,
            subcomplex,
            required,
        }
    }

    /// Recount on the stored complex.
    pub fn verify(&self) -> bool {
        count_collapsible_cells(&self.complex) == self.collapsible_cells
            && self.collapsible_cells < self.required
            && !is_trivial_complex(&self.complex)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollapsingVerdict {
    pub status: VerdictStatus,
    /// The rule that produced the verdict.
    pub provenance: String,
    pub witness: Option<Witness>,
    /// Search bound reached, when the verdict depends on one.
    pub bound: Option<String>,
    pub notes: Vec<String>,
}

impl CollapsingVerdict {
    pub fn new(status: VerdictStatus, provenance: impl Into<String>) -> Self {
        CollapsingVerdict { status, provenance: provenance.into(), witness: None, bound: None, notes: Vec::new() }
    }
}

/// Connected (vertex-sharing) sets of at most `n` faces drawn from `faces`.
pub fn connected_face_sets(c: &TwoComplex, faces: &[usize], n: usize) -> Vec<Vec<usize>> {
    let allowed: BTreeSet<usize> = faces.iter().copied().collect();
    let verts: Vec<BTreeSet<usize>> = (0..c.faces.len()).map(|f| c.face_vertices(f)).collect();
    let adjacent = |f: usize, g: usize| !verts[f].is_disjoint(&verts[g]);
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut level: BTreeSet<Vec<usize>> = allowed.iter().map(|&f| vec![f]).collect();
    for size in 1..=n {
        out.extend(level.iter().cloned());
        if size == n {
            break;
        }
        let next: BTreeSet<Vec<usize>> = level
            .par_iter()
            .flat_map_iter(|set| {
                allowed
                    .iter()
                    .filter(|g| !set.contains(g) && set.iter().any(|&f| adjacent(f, **g)))
                    .map(|&g| {
                        let mut s = set.clone();
                        s.push(g);
                        s.sort_unstable();
                        s
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        level = next;
    }
    out
}

/// Every union of `m <= n` closed faces from `faces` has at least `m`
/// collapsing cells.
///
/// Only vertex-connected unions are enumerated: collapses of disjoint
/// unions add up. Extra 1-cells only add spur collapses, so unions of
/// closed faces realize the minimum.
pub fn check_n_collapsing_faces(c: &TwoComplex, faces: &[usize], n: usize) -> Result<CollapsingVerdict, CollapseError> {
    if n == 0 {
        return Err(CollapseError::BadN);
    }
    let sets = connected_face_sets(c, faces, n);
    let mut failures: Vec<(Vec<usize>, SubComplex)> = sets
        .par_iter()
        .filter_map(|set| {
            let sub = SubComplex::closure(c, &[], &[], set);
            let y = sub.to_complex(c);
            (count_collapsible_cells(&y) < set.len()).then(|| (set.clone(), sub))
        })
        .collect();
    failures.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
    let bound = Some(format!("{} faces, {} unions of at most {n} faces", faces.len(), sets.len()));
    let mut v = match failures.first() {
        Some((set, sub)) => {
            let mut v = CollapsingVerdict::new(
                VerdictStatus::Refuted,
                format!("a union of {} closed faces has fewer than {} collapsing cells", set.len(), set.len()),
            );
            v.witness = Some(Witness::new(sub.to_complex(c), Some(sub.clone()), set.len()));
            v.notes.push(format!("{} failing unions", failures.len()));
            v
        }
        None => CollapsingVerdict::new(VerdictStatus::Certified, format!("{n}-collapsing up to the searched region")),
    };
    v.bound = bound;
    Ok(v)
}

/// n-collapsing restricted to the faces of the ball's safe region.
pub fn check_n_collapsing(ball: &crate::geometry::CayleyBall, n: usize) -> Result<CollapsingVerdict, CollapseError> {
    let safe = ball.safe_faces();
    if ball.safe_radius < 0 {
        return Err(CollapseError::NoSafeRegion);
    }
    let mut v = check_n_collapsing_faces(&ball.complex, &safe, n)?;
    v.bound = Some(format!("radius {}, safe radius {}; {}", ball.radius, ball.safe_radius, v.bound.unwrap_or_default()));
    Ok(v)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertifyBudget {
    /// Largest number of relator polygons glued in the refutation search.
    pub max_faces: usize,
}

impl Default for CertifyBudget {
    fn default() -> Self {
        CertifyBudget { max_faces: 2 }
    }
}

/// Certify through small cancellation or staggeredness, or refute with a
/// folded simply connected complex having fewer than two collapsing cells.
pub fn certify_bicollapsible(p: &Presentation, budget: CertifyBudget) -> CollapsingVerdict {
    let sc = certify_3_collapsing(p);
    if sc.status == VerdictStatus::Certified {
        let mut v = CollapsingVerdict::new(
            VerdictStatus::Certified,
            format!("{}; 3-collapsing implies 2-collapsing, which with embedded distinct 2-cells gives bicollapsible", sc.provenance),
        );
        v.notes = sc.notes;
        return v;
    }
    let reduced_roots = p
        .relators
        .iter()
        .all(|r| r.cyclically_reduced && !r.is_empty() && is_proper_power(r).is_none());
    if reduced_roots && is_staggered(p) {
        return CollapsingVerdict::new(
            VerdictStatus::Certified,
            "staggered presentation without torsion (cyclically reduced relators, none a proper power): bicollapsible",
        );
    }
    if let Some(w) = refute::search(p, budget.max_faces) {
        let mut v = CollapsingVerdict::new(
            VerdictStatus::Refuted,
            format!(
                "simply connected immersed complex with {} faces and {} collapsing cells",
                w.faces, w.collapsible_cells
            ),
        );
        v.witness = Some(w);
        v.bound = Some(format!("glued at most {} relator polygons", budget.max_faces));
        return v;
    }
    let mut v = CollapsingVerdict::new(VerdictStatus::Inconclusive, "no certification rule applies and no refutation found");
    v.bound = Some(format!("glued at most {} relator polygons", budget.max_faces));
    v.notes = sc.notes;
    v
}

/// The presentation complex viewed as its own search region.
pub fn presentation_n_collapsing(p: &Presentation, n: usize) -> Result<CollapsingVerdict, CollapseError> {
    let c = presentation_complex(p);
    let faces: Vec<usize> = (0..c.faces.len()).collect();
    check_n_collapsing_faces(&c, &faces, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex2::{dart_of, euler_characteristic};
    use crate::words::parse_presentation;

    fn pc(s: &str) -> TwoComplex {
        presentation_complex(&parse_presentation(s).unwrap())
    }

    fn path(n: usize) -> TwoComplex {
        let mut c = TwoComplex::new(n + 1);
        for i in 0..n {
            c.add_edge(i, i + 1, None);
        }
        c
    }

    #[test]
    fn free_faces() {
        assert!(free_face_pairs(&pc("<a | a a a^-1>")).is_empty());
        assert_eq!(
            free_face_pairs(&pc("<a,b | ab>")),
            vec![FreeFacePair::FaceCollapse { edge: 0, face: 0 }, FreeFacePair::FaceCollapse { edge: 1, face: 0 }]
        );
        assert_eq!(free_face_pairs(&pc("<a,b | ab, b>")), vec![FreeFacePair::FaceCollapse { edge: 0, face: 0 }]);
    }

    #[test]
    fn collapse_steps() {
        let c = pc("<a,b | ab>");
        let d = do_collapse(&c, FreeFacePair::FaceCollapse { edge: 0, face: 0 }).unwrap();
        assert_eq!((d.num_vertices, d.num_edges(), d.num_faces()), (1, 1, 0));
        assert_eq!(d.edge_labels[0], Some(1));
        let p = path(2);
        let q = do_collapse(&p, FreeFacePair::Spur { vertex: 0, edge: 0 }).unwrap();
        assert_eq!((q.num_vertices, q.num_edges()), (2, 1));
        assert!(do_collapse(&d, FreeFacePair::FaceCollapse { edge: 0, face: 0 }).is_err());
    }

    #[test]
    fn graph_and_point() {
        let c = pc("<a,b | ab, b>");
        let s = collapses_to_graph(&c).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.replay(&c).unwrap().num_faces(), 0);
        assert!(collapses_to_graph(&pc("<a | a a a^-1>")).is_none());
        assert!(collapses_to_graph(&path(3)).unwrap().is_empty());
        let pt = collapses_to_point(&c).unwrap();
        let end = pt.replay(&c).unwrap();
        assert_eq!((end.num_vertices, end.num_edges(), end.num_faces()), (1, 0, 0));
        let mut circle = TwoComplex::new(1);
        circle.add_edge(0, 0, None);
        assert!(collapses_to_point(&circle).is_none());
        assert!(collapses_to_point(&TwoComplex::new(1)).unwrap().is_empty());
    }

    #[test]
    fn counts_and_triviality() {
        assert_eq!(count_collapsible_cells(&pc("<a,b | ab, b>")), 1);
        assert_eq!(count_collapsible_cells(&path(2)), 2);
        assert_eq!(count_collapsible_cells(&pc("<a | a a a^-1>")), 0);
        assert!(is_trivial_complex(&TwoComplex::new(1)));
        assert!(is_trivial_complex(&pc("<a,b | ab>")));
        assert!(!is_trivial_complex(&pc("<a | a a a^-1>")));
        assert!(is_trivial_complex(&path(1)));
        assert!(!is_trivial_complex(&path(2)));
    }

    #[test]
    fn n_collapsing_on_presentation_complex() {
        let p = parse_presentation("<a,b | ab, b>").unwrap();
        let v = presentation_n_collapsing(&p, 2).unwrap();
        assert_eq!(v.status, VerdictStatus::Refuted);
        let w = v.witness.unwrap();
        assert!(w.verify());
        assert_eq!((w.faces, w.collapsible_cells), (2, 1));
        assert_eq!(w.complex, presentation_complex(&p));
        assert_eq!(presentation_n_collapsing(&p, 1).unwrap().status, VerdictStatus::Certified);
    }

    #[test]
    fn certification_routes() {
        let b = CertifyBudget::default();
        let t = certify_bicollapsible(&parse_presentation("<a,b | [a,b]>").unwrap(), b);
        assert_eq!(t.status, VerdictStatus::Certified);
        assert!(t.provenance.contains("C(4)-T(4)"));
        let r = certify_bicollapsible(&parse_presentation("<a,b | ab, b>").unwrap(), b);
        assert_eq!(r.status, VerdictStatus::Refuted);
        let w = r.witness.unwrap();
        assert!(w.verify());
        assert_eq!((w.faces, w.collapsible_cells), (2, 1));
        let e = certify_bicollapsible(&parse_presentation("<a,b,c | a a^-1 b, bc>").unwrap(), b);
        assert_eq!(e.status, VerdictStatus::Refuted);
        let d = certify_bicollapsible(&parse_presentation("<a | a a a^-1>").unwrap(), b);
        assert_eq!(d.status, VerdictStatus::Refuted);
        let s = certify_bicollapsible(&parse_presentation("<a,b | a^2 b^3>").unwrap(), b);
        assert_eq!(s.status, VerdictStatus::Certified);
    }

    #[test]
    fn grid_square_strip_collapses() {
        let mut c = TwoComplex::new(6);
        let b: Vec<usize> = (0..2).map(|i| c.add_edge(i, i + 1, None)).collect();
        let t: Vec<usize> = (0..2).map(|i| c.add_edge(3 + i, 4 + i, None)).collect();
        let v: Vec<usize> = (0..3).map(|i| c.add_edge(i, 3 + i, None)).collect();
        for i in 0..2 {
            c.add_face(
                vec![dart_of(b[i], true), dart_of(v[i + 1], true), dart_of(t[i], false), dart_of(v[i], false)],
                None,
            )
            .unwrap();
        }
        let v3 = check_n_collapsing_faces(&c, &[0, 1], 3).unwrap();
        assert_eq!(v3.status, VerdictStatus::Certified);
        assert_eq!(euler_characteristic(&collapses_to_point(&c).unwrap().replay(&c).unwrap()), 1);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        /// Random complexes: a few vertices, random edges, faces from random closed walks.
        fn complex() -> impl Strategy<Value = TwoComplex> {
            (2usize..5, prop::collection::vec((0usize..5, 0usize..5), 1..7), prop::collection::vec(prop::collection::vec(0usize..14, 1..6), 0..4))
                .prop_map(|(nv, es, walks)| {
                    let mut c = TwoComplex::new(nv);
                    for (u, v) in es {
                        c.add_edge(u % nv, v % nv, None);
                    }
                    for w in walks {
                        // greedily turn the choices into a closed walk from vertex of first dart
                        let darts: Vec<usize> = w.iter().map(|&d| d % (2 * c.edges.len())).collect();
                        let mut path = vec![darts[0]];
                        for &d in &darts[1..] {
                            if c.origin(d) == c.target(*path.last().unwrap()) {
                                path.push(d);
                            }
                        }
                        let start = c.origin(path[0]);
                        let last = *path.last().unwrap();
                        if c.target(last) != start {
                            let back: Vec<usize> = path.iter().rev().map(|&d| crate::complex2::dart_rev(d)).collect();
                            path.extend(back);
                        }
                        c.add_face(path, None).unwrap();
                    }
                    c
                })
        }

        proptest! {
            #[test]
            fn collapses_preserve_chi_and_components(c in complex()) {
                let chi = euler_characteristic(&c);
                let comps = c.num_components();
                for p in free_face_pairs(&c) {
                    let d = do_collapse(&c, p).unwrap();
                    prop_assert_eq!(euler_characteristic(&d), chi);
                    prop_assert_eq!(d.num_components(), comps);
                }
                if collapses_to_point(&c).is_some() {
                    prop_assert_eq!(chi, 1);
                }
            }

            #[test]
            fn extra_edges_keep_face_collapses(c in complex(), u in 0usize..5, v in 0usize..5) {
                let before = free_face_pairs(&c).iter().filter(|p| matches!(p, FreeFacePair::FaceCollapse { .. })).count();
                let mut d = c.clone();
                d.add_edge(u % c.num_vertices, v % c.num_vertices, None);
                let after = free_face_pairs(&d).iter().filter(|p| matches!(p, FreeFacePair::FaceCollapse { .. })).count();
                prop_assert!(after >= before);
            }

            #[test]
            fn greedy_agrees_with_exhaustive(c in complex()) {
                let mut failed = HashSet::new();
                let mut path = Vec::new();
                let all = vec![true; c.faces.len()];
                prop_assert_eq!(collapses_to_graph(&c).is_some(), exhaustive(&c, &all, &mut failed, &mut path));
            }

            #[test]
            fn closed_face_unions_realize_minimum(c in complex(), extra in prop::collection::vec(0usize..8, 0..3)) {
                // adding edges of the parent to a closed face union never lowers the count
                let faces: Vec<usize> = (0..c.faces.len()).collect();
                let base = SubComplex::closure(&c, &[], &[], &faces);
                let edges: Vec<usize> = extra.iter().filter(|_| !c.edges.is_empty()).map(|&e| e % c.edges.len()).collect();
                let bigger = SubComplex::closure(&c, &[], &edges, &faces);
                prop_assert!(count_collapsible_cells(&bigger.to_complex(&c)) >= count_collapsible_cells(&base.to_complex(&c)));
            }
        }
    }
}
