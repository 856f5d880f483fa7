//! Spiders, divisive trees, natural walls and the checks built on them.
//!
//! A wall is a component of the frontier of a small neighbourhood of a
//! divisive tree. The frontier meets an edge dual to the tree in two points,
//! one on each side of its midpoint; these points are the nodes of the
//! frontier graph, and inside each face a frontier arc joins the points
//! flanking each sector between consecutive legs of a spider.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex2::{dart_edge, SubComplex, TwoComplex, UnionFind};

use super::CayleyBall;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("path is not a geodesic: length {length}, distance {distance}")]
    NotGeodesic { length: usize, distance: usize },
    #[error("vertices {0} and {1} are not adjacent")]
    NotAdjacent(usize, usize),
    #[error("empty path")]
    EmptyPath,
    #[error("arc has {faces} faces but {edges} edges")]
    BadArc { faces: usize, edges: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Spider {
    pub face: usize,
    /// Boundary positions `class, class + |w|, ...` of the feet.
    pub class: usize,
    pub feet: Vec<usize>,
    pub foot_edges: Vec<usize>,
}

impl Spider {
    pub fn legs(&self) -> usize {
        self.feet.len()
    }
}

fn face_shape(c: &TwoComplex, f: usize) -> (usize, usize) {
    let len = c.faces[f].boundary.len();
    match c.faces[f].label {
        Some(l) if l.degree >= 1 && l.root_len * l.degree == len => (l.degree, l.root_len),
        _ => (1, len),
    }
}

pub fn spiders_in(c: &TwoComplex, faces: &[usize]) -> Vec<Spider> {
    let mut out = Vec::new();
    for &f in faces {
        let (n, m) = face_shape(c, f);
        for class in 0..m {
            let feet: Vec<usize> = (0..n).map(|t| class + t * m).collect();
            let foot_edges = feet.iter().map(|&p| dart_edge(c.faces[f].boundary[p])).collect();
            out.push(Spider { face: f, class, feet, foot_edges });
        }
    }
    out
}

pub fn spiders(ball: &CayleyBall) -> Vec<Spider> {
    let all: Vec<usize> = (0..ball.complex.num_faces()).collect();
    spiders_in(&ball.complex, &all)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivisiveTree {
    /// Indices into the spider list the tree was built from.
    pub spiders: Vec<usize>,
    /// Edges whose midpoints are feet.
    pub edges: Vec<usize>,
    pub arcs: usize,
    pub acyclic: bool,
    /// No two spiders of the same face.
    pub embedded: bool,
    /// Reaches an edge whose faces are not all present.
    pub partial: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeReport {
    pub trees: Vec<DivisiveTree>,
    pub all_acyclic: bool,
    pub all_embedded: bool,
    /// Human-readable descriptions of cycles and self-intersections.
    pub refutations: Vec<String>,
}

/// Components of the graph of spiders glued along their feet.
pub fn trees_from_spiders(c: &TwoComplex, sp: &[Spider], safe_edge: &dyn Fn(usize) -> bool) -> TreeReport {
    let s = sp.len();
    let ne = c.num_edges();
    let mut uf = UnionFind::new(s + ne);
    for (i, spider) in sp.iter().enumerate() {
        for &e in &spider.foot_edges {
            uf.union(i, s + e);
        }
    }
    let mut comps: BTreeMap<usize, (Vec<usize>, BTreeSet<usize>)> = BTreeMap::new();
    for (i, spider) in sp.iter().enumerate() {
        let entry = comps.entry(uf.find(i)).or_default();
        entry.0.push(i);
        entry.1.extend(spider.foot_edges.iter().copied());
    }
    let mut trees = Vec::new();
    let mut refutations = Vec::new();
    for (spiders, edges) in comps.into_values() {
        let arcs: usize = spiders.iter().map(|&i| sp[i].legs()).sum();
        let acyclic = arcs + 1 == spiders.len() + edges.len();
        let faces: BTreeSet<usize> = spiders.iter().map(|&i| sp[i].face).collect();
        let embedded = faces.len() == spiders.len();
        if !acyclic {
            refutations.push(format!("divisive tree through face {} contains a cycle", sp[spiders[0]].face));
        }
        if !embedded {
            refutations.push(format!("divisive tree through face {} meets a face twice", sp[spiders[0]].face));
        }
        let partial = edges.iter().any(|&e| !safe_edge(e));
        trees.push(DivisiveTree { spiders, edges: edges.into_iter().collect(), arcs, acyclic, embedded, partial });
    }
    TreeReport {
        all_acyclic: trees.iter().all(|t| t.acyclic),
        all_embedded: trees.iter().all(|t| t.embedded),
        trees,
        refutations,
    }
}

/// Divisive trees built from the spiders of faces meeting the safe region.
pub fn divisive_trees(ball: &CayleyBall) -> TreeReport {
    let sp = spiders_in(&ball.complex, &ball.safe_faces());
    trees_from_spiders(&ball.complex, &sp, &|e| ball.is_safe_edge(e))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wall {
    /// Frontier points as `(edge, side)`; side 0 lies towards the edge's
    /// origin.
    pub points: Vec<(usize, u8)>,
    pub dual_edges: Vec<usize>,
    /// Faces containing a frontier arc of the wall.
    pub faces: Vec<usize>,
    /// Index of the owning divisive tree among the whole-ball trees.
    pub tree: usize,
    pub partial: bool,
}

/// Frontier arcs `(point, point)` of all spiders in `faces`.
fn frontier_arcs(c: &TwoComplex, sp: &[Spider]) -> Vec<(usize, usize, usize)> {
    let mut arcs = Vec::new();
    for spider in sp {
        let b = &c.faces[spider.face].boundary;
        let n = spider.feet.len();
        for t in 0..n {
            let da = b[spider.feet[t]];
            let db = b[spider.feet[(t + 1) % n]];
            // leaving foot a towards the end of its dart, arriving at foot b from its start
            let end_side = if da.is_multiple_of(2) { 1 } else { 0 };
            let start_side = if db.is_multiple_of(2) { 0 } else { 1 };
            arcs.push((2 * dart_edge(da) + end_side, 2 * dart_edge(db) + start_side, spider.face));
        }
    }
    arcs
}

pub fn walls_in(c: &TwoComplex, faces: &[usize], safe_edge: &dyn Fn(usize) -> bool) -> Vec<Wall> {
    let sp = spiders_in(c, faces);
    let trees = trees_from_spiders(c, &sp, &|_| true);
    let mut tree_of_edge = BTreeMap::new();
    for (ti, t) in trees.trees.iter().enumerate() {
        for &e in &t.edges {
            tree_of_edge.insert(e, ti);
        }
    }
    let arcs = frontier_arcs(c, &sp);
    let mut uf = UnionFind::new(2 * c.num_edges());
    let mut used = BTreeSet::new();
    for &(x, y, _) in &arcs {
        uf.union(x, y);
        used.insert(x);
        used.insert(y);
    }
    let mut groups: BTreeMap<usize, (BTreeSet<usize>, BTreeSet<usize>)> = BTreeMap::new();
    for &x in &used {
        groups.entry(uf.find(x)).or_default().0.insert(x);
    }
    for &(x, _, f) in &arcs {
        groups.get_mut(&uf.find(x)).expect("arc endpoint grouped").1.insert(f);
    }
    let mut out: Vec<Wall> = groups
        .into_values()
        .map(|(points, faces)| {
            let dual: BTreeSet<usize> = points.iter().map(|p| p / 2).collect();
            let first = *dual.iter().next().expect("nonempty wall");
            Wall {
                points: points.iter().map(|&p| (p / 2, (p % 2) as u8)).collect(),
                partial: dual.iter().any(|&e| !safe_edge(e)),
                dual_edges: dual.into_iter().collect(),
                faces: faces.into_iter().collect(),
                tree: tree_of_edge[&first],
            }
        })
        .collect();
    out.sort_by(|a, b| a.points.cmp(&b.points));
    out
}

/// All walls of the ball.
pub fn walls(ball: &CayleyBall) -> Vec<Wall> {
    let all: Vec<usize> = (0..ball.complex.num_faces()).collect();
    walls_in(&ball.complex, &all, &|e| ball.is_safe_edge(e))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Halfspaces {
    /// Vertex sets of the components of the wall's face region minus its
    /// dual edges.
    pub sides: Vec<Vec<usize>>,
    /// The same sides restricted to the safe region.
    pub safe_sides: Vec<Vec<usize>>,
    pub partial: bool,
}

/// Components of the graph of the given edges with `cut` removed, over the
/// vertices those edges touch.
pub fn edge_cut_components(c: &TwoComplex, edges: &BTreeSet<usize>, cut: &BTreeSet<usize>) -> Vec<Vec<usize>> {
    let mut uf = UnionFind::new(c.num_vertices);
    let mut touched = BTreeSet::new();
    for &e in edges {
        let (u, v) = c.edges[e];
        touched.insert(u);
        touched.insert(v);
        if !cut.contains(&e) {
            uf.union(u, v);
        }
    }
    let mut comps: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in touched {
        comps.entry(uf.find(v)).or_default().push(v);
    }
    let mut out: Vec<Vec<usize>> = comps.into_values().collect();
    out.sort();
    out
}

/// Edges lying on at least one face.
pub fn face_edges(c: &TwoComplex) -> BTreeSet<usize> {
    c.faces.iter().flat_map(|f| f.boundary.iter().map(|&d| dart_edge(d))).collect()
}

/// Edges of the component of the union of closed faces that contains the
/// wall.
pub fn wall_region(c: &TwoComplex, w: &Wall) -> BTreeSet<usize> {
    let edges = face_edges(c);
    let Some(&e0) = w.dual_edges.first() else { return BTreeSet::new() };
    let comps = edge_cut_components(c, &edges, &BTreeSet::new());
    let anchor = c.edges[e0].0;
    let Some(comp) = comps.into_iter().find(|comp| comp.binary_search(&anchor).is_ok()) else { return BTreeSet::new() };
    edges.into_iter().filter(|&e| comp.binary_search(&c.edges[e].0).is_ok()).collect()
}

/// Sides of a wall inside the component of the union of closed faces that
/// contains it. A wall there is a properly embedded track, so it separates
/// into exactly two sides.
pub fn halfspaces(ball: &CayleyBall, w: &Wall) -> Halfspaces {
    let cut: BTreeSet<usize> = w.dual_edges.iter().copied().collect();
    let sides = edge_cut_components(&ball.complex, &wall_region(&ball.complex, w), &cut);
    let safe_sides = sides
        .iter()
        .map(|comp| comp.iter().copied().filter(|&v| ball.is_safe_vertex(v)).collect::<Vec<_>>())
        .filter(|s| !s.is_empty())
        .collect();
    Halfspaces { sides, safe_sides, partial: w.partial }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CarrierReport {
    pub carrier: SubComplex,
    pub sampled_pairs: usize,
    /// Pairs of safe carrier vertices with no ball geodesic in the carrier.
    pub failures: Vec<(usize, usize)>,
    /// Set for partial walls: the carrier may be truncated.
    pub advisory: bool,
}

/// The smallest subcomplex containing the wall, with convexity sampled on
/// `samples` pairs of safe vertices (all pairs when there are fewer).
pub fn carrier(ball: &CayleyBall, w: &Wall, samples: usize, seed: u64) -> CarrierReport {
    let c = &ball.complex;
    let carrier = SubComplex::closure(c, &[], &w.dual_edges, &w.faces);
    let in_carrier: BTreeSet<usize> = carrier.edges.iter().copied().collect();
    let safe: Vec<usize> = carrier.vertices.iter().copied().filter(|&v| ball.is_safe_vertex(v)).collect();
    let mut pairs: Vec<(usize, usize)> =
        (0..safe.len()).flat_map(|i| (i + 1..safe.len()).map(move |j| (i, j))).map(|(i, j)| (safe[i], safe[j])).collect();
    if pairs.len() > samples {
        pairs.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        pairs.truncate(samples);
        pairs.sort();
    }
    let by_source: BTreeMap<usize, Vec<usize>> = pairs.iter().fold(BTreeMap::new(), |mut m, &(u, v)| {
        m.entry(u).or_insert_with(Vec::new).push(v);
        m
    });
    let allowed = |e: usize| in_carrier.contains(&e);
    let mut failures: Vec<(usize, usize)> = by_source
        .par_iter()
        .flat_map_iter(|(&u, targets)| {
            let full = ball.graph_distances(u, None);
            let inside = ball.graph_distances(u, Some(&allowed));
            targets.iter().filter(move |&&v| inside[v] != full[v]).map(move |&v| (u, v)).collect::<Vec<_>>()
        })
        .collect();
    failures.sort();
    CarrierReport { carrier, sampled_pairs: pairs.len(), failures, advisory: w.partial }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LadderReport {
    pub faces: usize,
    /// Consecutive shared arcs within a face overlap.
    pub overlapping_pieces: bool,
    pub ladder: bool,
    pub injective: bool,
}

/// Build `M(J)` for an arc through `faces` crossing `edges` (one fewer),
/// gluing consecutive faces along the maximal common boundary arc
/// containing the crossed edge, and check that it is a ladder mapping
/// injectively into the ball.
pub fn ladder_check(ball: &CayleyBall, faces: &[usize], edges: &[usize]) -> Result<LadderReport, GeometryError> {
    if faces.len() != edges.len() + 1 {
        return Err(GeometryError::BadArc { faces: faces.len(), edges: edges.len() });
    }
    let c = &ball.complex;
    let k = faces.len();
    if k == 1 {
        return Ok(LadderReport { faces: 1, overlapping_pieces: false, ladder: true, injective: true });
    }
    let offsets: Vec<usize> = faces
        .iter()
        .scan(0, |acc, &f| {
            let o = *acc;
            *acc += c.faces[f].boundary.len();
            Some(o)
        })
        .collect();
    let corner = |i: usize, pos: usize| offsets[i] + pos % c.faces[faces[i]].boundary.len();
    let total = offsets[k - 1] + c.faces[faces[k - 1]].boundary.len();
    // corners and sides share indexing: side (i, pos) starts at corner (i, pos)
    let mut vuf = UnionFind::new(total);
    let mut euf = UnionFind::new(total);
    let mut used: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); k];
    let mut overlapping = false;
    for i in 0..k - 1 {
        let (bf, bg) = (&c.faces[faces[i]].boundary, &c.faces[faces[i + 1]].boundary);
        let (nf, ng) = (bf.len(), bg.len());
        let Some(a) = bf.iter().position(|&d| dart_edge(d) == edges[i]) else { continue };
        let Some(b) = bg.iter().position(|&d| dart_edge(d) == edges[i]) else { continue };
        let same = bf[a] == bg[b];
        // side of g matching side (a + t) of f
        let partner = |t: isize| -> usize {
            let s = if same { b as isize + t } else { b as isize - t };
            s.rem_euclid(ng as isize) as usize
        };
        let matches = |t: isize| {
            let fa = (a as isize + t).rem_euclid(nf as isize) as usize;
            let d = bf[fa];
            let e = bg[partner(t)];
            if same { d == e } else { d == (e ^ 1) }
        };
        let mut lo = 0isize;
        while lo > -(nf as isize) + 1 && matches(lo - 1) {
            lo -= 1;
        }
        let mut hi = 0isize;
        while hi - lo + 1 < nf as isize && matches(hi + 1) {
            hi += 1;
        }
        for t in lo..=hi {
            let fa = (a as isize + t).rem_euclid(nf as isize) as usize;
            let gb = partner(t);
            overlapping |= !used[i].insert(fa);
            overlapping |= !used[i + 1].insert(gb);
            euf.union(corner(i, fa), corner(i + 1, gb));
            if same {
                vuf.union(corner(i, fa), corner(i + 1, gb));
                vuf.union(corner(i, fa + 1), corner(i + 1, gb + 1));
            } else {
                vuf.union(corner(i, fa), corner(i + 1, gb + 1));
                vuf.union(corner(i, fa + 1), corner(i + 1, gb));
            }
        }
    }
    // injectivity: classes of corners and sides map to distinct ball cells
    let mut vimg: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    let mut eimg: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for i in 0..k {
        for (pos, &d) in c.faces[faces[i]].boundary.iter().enumerate() {
            vimg.entry(c.origin(d)).or_default().insert(vuf.find(corner(i, pos)));
            eimg.entry(dart_edge(d)).or_default().insert(euf.find(corner(i, pos)));
        }
    }
    let injective = vimg.values().all(|s| s.len() == 1) && eimg.values().all(|s| s.len() == 1);
    // ladder: non-consecutive faces share no vertex of M(J)
    let classes: Vec<BTreeSet<usize>> = (0..k)
        .map(|i| (0..c.faces[faces[i]].boundary.len()).map(|p| vuf.find(corner(i, p))).collect())
        .collect();
    let separated = (0..k).all(|i| (i + 2..k).all(|j| classes[i].is_disjoint(&classes[j])));
    Ok(LadderReport { faces: k, overlapping_pieces: overlapping, ladder: separated && !overlapping, injective })
}

/// Faces and crossed edges along the path in a divisive tree between the
/// spiders of two faces, if they lie in one tree.
pub fn tree_arc(ball: &CayleyBall, from_face: usize, to_face: usize) -> Option<(Vec<usize>, Vec<usize>)> {
    let sp = spiders(ball);
    let s = sp.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); s + ball.complex.num_edges()];
    for (i, spider) in sp.iter().enumerate() {
        for &e in &spider.foot_edges {
            adj[i].push(s + e);
            adj[s + e].push(i);
        }
    }
    let starts: Vec<usize> = (0..s).filter(|&i| sp[i].face == from_face).collect();
    let mut prev = vec![usize::MAX; adj.len()];
    let mut queue = std::collections::VecDeque::new();
    for &i in &starts {
        prev[i] = i;
        queue.push_back(i);
    }
    while let Some(x) = queue.pop_front() {
        if x < s && sp[x].face == to_face {
            let mut nodes = vec![x];
            let mut cur = x;
            while prev[cur] != cur {
                cur = prev[cur];
                nodes.push(cur);
            }
            nodes.reverse();
            let faces = nodes.iter().filter(|&&n| n < s).map(|&n| sp[n].face).collect();
            let edges = nodes.iter().filter(|&&n| n >= s).map(|&n| n - s).collect();
            return Some((faces, edges));
        }
        for &y in &adj[x] {
            if prev[y] == usize::MAX {
                prev[y] = x;
                queue.push_back(y);
            }
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossingProfile {
    /// Positions along the path (edge indices) at which each wall is crossed.
    pub crossings: BTreeMap<usize, Vec<usize>>,
    /// Walls crossed at least twice.
    pub doubly_crossed: Vec<usize>,
    /// Doubly crossed walls with no singly crossed wall between their first
    /// and last crossing.
    pub failures: Vec<usize>,
}

/// Per-wall crossing counts along a geodesic vertex path, with the
/// separating-wall test for walls crossed more than once.
pub fn geodesic_crossing_profile(ball: &CayleyBall, walls: &[Wall], path: &[usize]) -> Result<CrossingProfile, GeometryError> {
    let (&first, &last) = (path.first().ok_or(GeometryError::EmptyPath)?, path.last().ok_or(GeometryError::EmptyPath)?);
    let mut edge_at: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (e, &(u, v)) in ball.complex.edges.iter().enumerate() {
        edge_at.entry((u, v)).or_insert(e);
        edge_at.entry((v, u)).or_insert(e);
    }
    let mut steps = Vec::with_capacity(path.len().saturating_sub(1));
    for pair in path.windows(2) {
        steps.push(*edge_at.get(&(pair[0], pair[1])).ok_or(GeometryError::NotAdjacent(pair[0], pair[1]))?);
    }
    let distance = ball.graph_distances(first, None)[last].unwrap_or(usize::MAX);
    if distance != steps.len() {
        return Err(GeometryError::NotGeodesic { length: steps.len(), distance });
    }
    let mut dual: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (wi, w) in walls.iter().enumerate() {
        for &e in &w.dual_edges {
            dual.entry(e).or_default().push(wi);
        }
    }
    let mut crossings: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, e) in steps.iter().enumerate() {
        for &wi in dual.get(e).map(Vec::as_slice).unwrap_or(&[]) {
            crossings.entry(wi).or_default().push(i);
        }
    }
    let singles: Vec<usize> = crossings.values().filter(|v| v.len() == 1).map(|v| v[0]).collect();
    let doubly_crossed: Vec<usize> = crossings.iter().filter(|(_, v)| v.len() >= 2).map(|(&w, _)| w).collect();
    let failures = doubly_crossed
        .iter()
        .copied()
        .filter(|w| {
            let v = &crossings[w];
            let (lo, hi) = (v[0], v[v.len() - 1]);
            !singles.iter().any(|&s| lo <= s && s <= hi)
        })
        .collect();
    Ok(CrossingProfile { crossings, doubly_crossed, failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex2::{presentation_complex, FaceLabel};
    use crate::geometry::{build_ball, EqualityOracle};
    use crate::words::{branch, parse_presentation, BranchedPresentation};

    fn certified(text: &str, exps: &[usize]) -> BranchedPresentation {
        branch(&parse_presentation(text).unwrap(), exps).unwrap().with_certification(true)
    }

    fn ball(text: &str, exps: &[usize], r: usize) -> CayleyBall {
        let b = certified(text, exps);
        build_ball(&b, r, &EqualityOracle::dehn(&b).unwrap()).unwrap()
    }

    #[test]
    fn spider_counts() {
        let t = ball("<a | a>", &[3], 3);
        let sp = spiders(&t);
        assert_eq!(sp.len(), 1);
        assert_eq!(sp[0].legs(), 3);
        let o = ball("<a,b | [a,b]>", &[2], 4);
        let sp = spiders(&o);
        assert_eq!(sp.len(), 4 * o.complex.num_faces());
        assert!(sp.iter().all(|s| s.legs() == 2));
        let empty = ball("<a,b | [a,b]>", &[2], 1);
        assert!(spiders(&empty).is_empty());
    }

    #[test]
    fn tripod_tree_and_walls() {
        let t = ball("<a | a>", &[3], 3);
        let report = divisive_trees(&t);
        assert_eq!(report.trees.len(), 1);
        assert!(report.all_acyclic && report.all_embedded);
        let ws = walls(&t);
        // one frontier arc in each of the three sectors
        assert_eq!(ws.len(), 3);
        for w in &ws {
            assert_eq!(w.dual_edges.len(), 2);
            assert!(!w.partial);
            let h = halfspaces(&t, w);
            assert_eq!(h.sides.len(), 2);
            assert_eq!(h.safe_sides.len(), 2);
            let cr = carrier(&t, w, 100, 7);
            assert!(cr.failures.is_empty());
            assert_eq!(cr.carrier.faces.len(), 1);
        }
    }

    #[test]
    fn cycle_in_gamma_is_reported() {
        // a single 2-cell a^2 of degree 2: its spider has both feet on one edge
        let mut c = presentation_complex(&parse_presentation("<a | a^2>").unwrap());
        c.faces[0].label = Some(FaceLabel { relator: 0, degree: 2, root_len: 1 });
        let sp = spiders_in(&c, &[0]);
        let r = trees_from_spiders(&c, &sp, &|_| true);
        assert!(!r.all_acyclic);
        assert_eq!(r.refutations.len(), 1);
    }

    #[test]
    fn octagon_walls_come_in_pairs() {
        let o = ball("<a,b | [a,b]>", &[2], 5);
        let report = divisive_trees(&o);
        assert!(report.all_acyclic && report.all_embedded);
        let ws = walls(&o);
        // edges at the root are complete, and each is crossed by two walls
        for e in 0..o.complex.num_edges() {
            if o.complex.edges[e].0 == 0 || o.complex.edges[e].1 == 0 {
                assert_eq!(ws.iter().filter(|w| w.dual_edges.contains(&e)).count(), 2);
            }
        }
    }

    #[test]
    fn ladder_of_three_octagons() {
        let o = ball("<a,b | [a,b]>", &[2], 6);
        let sp = spiders(&o);
        let root_faces: Vec<usize> = (0..o.complex.num_faces()).filter(|&f| o.complex.face_vertices(f).contains(&0)).collect();
        let start = root_faces[0];
        // walk two steps along a tree from the first root face
        let spider = sp.iter().find(|s| s.face == start).unwrap();
        let e1 = spider.foot_edges[0];
        let f2 = *o.complex.faces.iter().enumerate().map(|(i, _)| i).filter(|&f| f != start && o.complex.face_edges(f).contains(&e1)).collect::<Vec<_>>().first().unwrap();
        let (faces, edges) = tree_arc(&o, start, f2).unwrap();
        assert_eq!(faces.len(), 2);
        let r = ladder_check(&o, &faces, &edges).unwrap();
        assert!(r.ladder && r.injective);
        assert!(ladder_check(&o, &[start], &[]).unwrap().ladder);
    }

    #[test]
    fn crossing_profile_rejects_detours() {
        let o = ball("<a,b | [a,b]>", &[2], 4);
        let ws = walls(&o);
        let a = o.out_edge[0][0].unwrap();
        let v = o.complex.edges[a].1;
        let p = geodesic_crossing_profile(&o, &ws, &[0, v]).unwrap();
        assert!(p.crossings.values().all(|c| c.len() == 1));
        assert!(matches!(geodesic_crossing_profile(&o, &ws, &[0, v, 0]), Err(GeometryError::NotGeodesic { .. })));
    }
}
