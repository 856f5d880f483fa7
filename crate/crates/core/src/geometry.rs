//! Balls in the Cayley 2-complex with duplicate faces identified, and the
//! wall structure carried by their spiders.

mod cube;
mod walls;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex2::{cycle_key, dart_of, FaceLabel, TwoComplex};
use crate::dehn::{bounded_oracle_trivial, BoundedVerdict, DehnError, DehnSolver};
use crate::snf::{smith_normal_form, SmithForm};
use crate::words::{free_reduce, BranchedPresentation, Letter, Presentation, Word};

pub use cube::{dual_cube_fragment, CubeComplexFragment, CubeError, Wallspace};
pub use walls::{
    carrier, divisive_trees, edge_cut_components, face_edges, geodesic_crossing_profile, halfspaces, ladder_check,
    spiders, spiders_in, tree_arc, trees_from_spiders, wall_region, walls, walls_in, CarrierReport, CrossingProfile, DivisiveTree,
    GeometryError, Halfspaces, LadderReport, Spider, TreeReport, Wall,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BallError {
    #[error("equality oracle could not decide whether {0} is trivial")]
    OracleRefused(String),
    #[error(transparent)]
    Dehn(#[from] DehnError),
}

/// Decides triviality of words in the group.
pub enum EqualityOracle {
    /// Dehn's algorithm; exact on certified branched presentations.
    Dehn(DehnSolver),
    /// Exponent sums modulo the relator lattice; exact for abelian groups.
    Abelian(SmithForm),
    /// Diagram search, falling back on abelianization for nontriviality.
    Bounded { presentation: Presentation, abelian: SmithForm, max_area: usize },
}

impl EqualityOracle {
    pub fn dehn(b: &BranchedPresentation) -> Result<Self, DehnError> {
        Ok(EqualityOracle::Dehn(DehnSolver::new(b)?))
    }

    pub fn abelian(p: &Presentation) -> Self {
        EqualityOracle::Abelian(lattice(p))
    }

    pub fn bounded(p: &Presentation, max_area: usize) -> Self {
        EqualityOracle::Bounded { presentation: p.clone(), abelian: lattice(p), max_area }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EqualityOracle::Dehn(_) => "dehn",
            EqualityOracle::Abelian(_) => "exponent-sum",
            EqualityOracle::Bounded { .. } => "bounded-diagram",
        }
    }

    pub fn is_trivial(&self, w: &Word) -> Result<bool, BallError> {
        match self {
            EqualityOracle::Dehn(s) => Ok(s.is_trivial(w)),
            EqualityOracle::Abelian(snf) => Ok(snf.in_row_lattice(&w.exponent_vector(snf.cols))),
            EqualityOracle::Bounded { presentation, abelian, max_area } => {
                if !abelian.in_row_lattice(&w.exponent_vector(abelian.cols)) {
                    return Ok(false);
                }
                let max_len = w.len() + max_area * presentation.max_relator_length();
                match bounded_oracle_trivial(w, presentation, *max_area, max_len) {
                    BoundedVerdict::Trivial { .. } => Ok(true),
                    BoundedVerdict::Unknown => Err(BallError::OracleRefused(presentation.word_to_string(w))),
                }
            }
        }
    }
}

fn lattice(p: &Presentation) -> SmithForm {
    let k = p.rank();
    let rows: Vec<Vec<i64>> = p.relators.iter().map(|r| r.representative.exponent_vector(k)).collect();
    smith_normal_form(&rows, k)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CayleyBall {
    pub complex: TwoComplex,
    /// Shortlex-least word reaching each vertex; vertex 0 is the root.
    pub words: Vec<Word>,
    pub dist: Vec<usize>,
    pub radius: usize,
    /// Faces meeting the ball of this radius lie entirely in the ball.
    pub safe_radius: i64,
    pub oracle: String,
    pub generators: Vec<String>,
    /// `out_edge[v][g]`: the edge from `v` labelled by generator `g`.
    pub out_edge: Vec<Vec<Option<usize>>>,
    pub in_edge: Vec<Vec<Option<usize>>>,
}

/// Vertices within distance `radius` of the identity, edges between them,
/// and one face per closed relator cycle inside the ball.
pub fn build_ball(b: &BranchedPresentation, radius: usize, oracle: &EqualityOracle) -> Result<CayleyBall, BallError> {
    let p = b.presentation();
    let k = p.rank();
    let key_form = lattice(&p);
    let key = |w: &Word| key_form.canonical_image(&w.exponent_vector(k));
    let mut words = vec![Word::empty()];
    let mut dist = vec![0usize];
    let mut buckets: HashMap<(usize, Vec<i128>), Vec<usize>> = HashMap::new();
    buckets.entry((0, key(&Word::empty()))).or_default().push(0);
    let find = |w: &Word, d: usize, words: &[Word], buckets: &HashMap<(usize, Vec<i128>), Vec<usize>>| -> Result<Option<usize>, BallError> {
        let kw = key(w);
        for level in d.saturating_sub(1)..=d + 1 {
            if let Some(cands) = buckets.get(&(level, kw.clone())) {
                for &u in cands {
                    if oracle.is_trivial(&free_reduce(&words[u].inverse().concat(w)))? {
                        return Ok(Some(u));
                    }
                }
            }
        }
        Ok(None)
    };
    // a neighbour of a vertex at level d lies at level d - 1, d or d + 1
    let mut frontier = vec![0usize];
    for d in 0..radius {
        let mut next = Vec::new();
        for &v in &frontier {
            for li in 0..2 * k {
                let l = Letter::from_index(li);
                if words[v].0.last().is_some_and(|&x| x.is_inverse_of(l)) {
                    continue;
                }
                let mut w = words[v].clone();
                w.0.push(l);
                if find(&w, d, &words, &buckets)?.is_none() {
                    let id = words.len();
                    buckets.entry((d + 1, key(&w))).or_default().push(id);
                    words.push(w);
                    dist.push(d + 1);
                    next.push(id);
                }
            }
        }
        frontier = next;
    }
    let n = words.len();
    let mut complex = TwoComplex::new(n);
    let mut out_edge = vec![vec![None; k]; n];
    let mut in_edge = vec![vec![None; k]; n];
    for v in 0..n {
        for g in 0..k {
            let mut w = words[v].clone();
            w.0.push(Letter::pos(g));
            if let Some(u) = find(&w, dist[v], &words, &buckets)? {
                let e = complex.add_edge(v, u, Some(g));
                out_edge[v][g] = Some(e);
                in_edge[u][g] = Some(e);
            }
        }
    }
    let mut seen = BTreeMap::new();
    for v in 0..n {
        for (i, r) in b.relators.iter().enumerate() {
            let Some(darts) = trace_path(&complex, &out_edge, &in_edge, v, r) else { continue };
            if complex.target(*darts.last().expect("nonempty relator")) != v {
                continue;
            }
            if seen.insert(cycle_key(&darts), ()).is_none() {
                let label = FaceLabel { relator: i, degree: b.exponents[i], root_len: b.base.relators[i].len() };
                complex.add_face(darts, Some(label)).expect("closed cycle");
            }
        }
    }
    let max_rel = b.max_relator_length() as i64;
    Ok(CayleyBall {
        complex,
        words,
        dist,
        radius,
        safe_radius: radius as i64 - (max_rel + 1) / 2,
        oracle: oracle.name().to_string(),
        generators: p.generators.iter().map(|g| g.name.clone()).collect(),
        out_edge,
        in_edge,
    })
}

fn trace_path(
    c: &TwoComplex,
    out_edge: &[Vec<Option<usize>>],
    in_edge: &[Vec<Option<usize>>],
    start: usize,
    w: &Word,
) -> Option<Vec<usize>> {
    let mut cur = start;
    let mut darts = Vec::with_capacity(w.len());
    for l in &w.0 {
        let d = if l.sign > 0 {
            dart_of(out_edge[cur][l.generator]?, true)
        } else {
            dart_of(in_edge[cur][l.generator]?, false)
        };
        darts.push(d);
        cur = c.target(d);
    }
    Some(darts)
}

impl CayleyBall {
    pub fn num_vertices(&self) -> usize {
        self.complex.num_vertices
    }

    pub fn is_safe_vertex(&self, v: usize) -> bool {
        self.dist[v] as i64 <= self.safe_radius
    }

    /// Faces with a vertex in the safe region.
    pub fn safe_faces(&self) -> Vec<usize> {
        (0..self.complex.num_faces())
            .filter(|&f| self.complex.face_vertices(f).iter().any(|&v| self.is_safe_vertex(v)))
            .collect()
    }

    /// Edges with a safe endpoint; every face of the full complex through
    /// such an edge is present in the ball.
    pub fn is_safe_edge(&self, e: usize) -> bool {
        let (u, v) = self.complex.edges[e];
        self.is_safe_vertex(u) || self.is_safe_vertex(v)
    }

    /// Breadth-first distances within the 1-skeleton, optionally restricted
    /// to an allowed edge set.
    pub fn graph_distances(&self, from: usize, allowed: Option<&dyn Fn(usize) -> bool>) -> Vec<Option<usize>> {
        let mut adj = vec![Vec::new(); self.num_vertices()];
        for (e, &(u, v)) in self.complex.edges.iter().enumerate() {
            if allowed.is_none_or(|f| f(e)) {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
        let mut d = vec![None; self.num_vertices()];
        d[from] = Some(0);
        let mut queue = std::collections::VecDeque::from([from]);
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x] {
                if d[y].is_none() {
                    d[y] = Some(d[x].expect("visited") + 1);
                    queue.push_back(y);
                }
            }
        }
        d
    }

    pub fn vertex_name(&self, v: usize) -> String {
        if self.words[v].is_empty() {
            "1".into()
        } else {
            self.words[v].compact_with(&self.generators_as())
        }
    }

    fn generators_as(&self) -> Vec<crate::words::Generator> {
        self.generators
            .iter()
            .enumerate()
            .map(|(id, name)| crate::words::Generator { id, name: name.clone() })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::{branch, parse_presentation};

    fn certified(text: &str, exps: &[usize]) -> BranchedPresentation {
        branch(&parse_presentation(text).unwrap(), exps).unwrap().with_certification(true)
    }

    #[test]
    fn cyclic_ball() {
        let b = certified("<a | a>", &[3]);
        let ball = build_ball(&b, 2, &EqualityOracle::dehn(&b).unwrap()).unwrap();
        assert_eq!((ball.num_vertices(), ball.complex.num_edges(), ball.complex.num_faces()), (3, 3, 1));
        let label = ball.complex.faces[0].label.unwrap();
        assert_eq!((label.degree, label.root_len), (3, 1));
    }

    #[test]
    fn small_balls() {
        let b = certified("<a,b | [a,b]>", &[2]);
        let ball = build_ball(&b, 1, &EqualityOracle::dehn(&b).unwrap()).unwrap();
        assert_eq!((ball.num_vertices(), ball.complex.num_edges(), ball.complex.num_faces()), (5, 4, 0));
        let free = BranchedPresentation::from_powers(&parse_presentation("<a,b | >").unwrap()).unwrap().with_certification(true);
        let ball = build_ball(&free, 2, &EqualityOracle::dehn(&free).unwrap()).unwrap();
        assert_eq!(ball.num_vertices(), 17);
    }

    #[test]
    fn grid_ball() {
        let p = parse_presentation("<a,b | [a,b]>").unwrap();
        let b = branch(&p, &[1]).unwrap();
        let ball = build_ball(&b, 2, &EqualityOracle::abelian(&p)).unwrap();
        // L1 ball of radius 2 in Z^2: 13 vertices, 16 edges, 4 unit squares
        assert_eq!((ball.num_vertices(), ball.complex.num_edges(), ball.complex.num_faces()), (13, 16, 4));
        assert_eq!(ball.safe_radius, 0);
    }

    #[test]
    fn grid_balls_match_lattice_counts() {
        let p = parse_presentation("<a,b | [a,b]>").unwrap();
        let b = branch(&p, &[1]).unwrap();
        for r in 1..=6usize {
            let ball = build_ball(&b, r, &EqualityOracle::abelian(&p)).unwrap();
            // lattice points with |x| + |y| <= r, and unit squares with all corners inside
            let pts = (-(r as i64)..=r as i64)
                .flat_map(|x| (-(r as i64)..=r as i64).map(move |y| (x, y)))
                .filter(|(x, y)| x.abs() + y.abs() <= r as i64)
                .count();
            let inside = |x: i64, y: i64| x.abs() + y.abs() <= r as i64;
            let squares = (-(r as i64)..r as i64)
                .flat_map(|x| (-(r as i64)..r as i64).map(move |y| (x, y)))
                .filter(|&(x, y)| inside(x, y) && inside(x + 1, y) && inside(x, y + 1) && inside(x + 1, y + 1))
                .count();
            assert_eq!(ball.num_vertices(), pts, "radius {r}");
            assert_eq!(ball.complex.num_faces(), squares, "radius {r}");
        }
    }

    #[test]
    fn bounded_oracle_ball_matches_exact() {
        let p = parse_presentation("<a | a^3>").unwrap();
        let b = BranchedPresentation::from_powers(&p).unwrap();
        let ball = build_ball(&b, 2, &EqualityOracle::bounded(&p, 2)).unwrap();
        assert_eq!(ball.num_vertices(), 3);
    }

    #[test]
    fn octagon_ball_is_a_surface_near_the_root() {
        let b = certified("<a,b | [a,b]>", &[2]);
        let ball = build_ball(&b, 4, &EqualityOracle::dehn(&b).unwrap()).unwrap();
        assert_eq!(ball.safe_radius, 0);
        // four octagons meet at every vertex
        let corners = ball.complex.faces.iter().flat_map(|f| f.boundary.iter()).filter(|&&d| ball.complex.origin(d) == 0).count();
        assert_eq!(corners, 4);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(8))]
            #[test]
            fn balls_grow_monotonically(r in 0usize..4) {
                let b = certified("<a,b | [a,b]>", &[2]);
                let o = EqualityOracle::dehn(&b).unwrap();
                let small = build_ball(&b, r, &o).unwrap();
                let big = build_ball(&b, r + 1, &o).unwrap();
                prop_assert!(small.num_vertices() <= big.num_vertices());
                // BFS order makes the smaller ball a prefix of the larger one
                prop_assert_eq!(&big.words[..small.num_vertices()], &small.words[..]);
            }
        }
    }
}
