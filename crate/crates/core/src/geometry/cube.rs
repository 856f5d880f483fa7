//! Bounded fragment of the cube complex dual to a finite wallspace.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::walls::{edge_cut_components, wall_region, Wall};
use super::CayleyBall;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CubeError {
    #[error("wall {wall} has {sides} sides")]
    Inconsistent { wall: usize, sides: usize },
    #[error("root point {0} out of range")]
    BadRoot(usize),
    #[error("no vertex lies in the face region of every wall")]
    NoCommonPoints,
}

/// Points with walls given by one side; the other side is the complement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wallspace {
    pub points: usize,
    pub sides: Vec<BTreeSet<usize>>,
    /// Ball vertex of each point; the identity for abstract wallspaces.
    pub vertices: Vec<usize>,
    /// Position in the input wall list of each wall.
    pub walls: Vec<usize>,
}

impl Wallspace {
    pub fn new(points: usize, sides: Vec<BTreeSet<usize>>) -> Result<Self, CubeError> {
        for (i, s) in sides.iter().enumerate() {
            if s.is_empty() || s.len() >= points || s.iter().any(|&p| p >= points) {
                return Err(CubeError::Inconsistent { wall: i, sides: if s.is_empty() || s.len() >= points { 1 } else { 0 } });
            }
        }
        let walls = (0..sides.len()).collect();
        Ok(Wallspace { points, sides, vertices: (0..points).collect(), walls })
    }

    /// Points are the ball vertices lying in the face region of every wall.
    /// Each wall must split its own region into exactly two parts; walls
    /// that do not separate the common points are dropped, and walls giving
    /// the same partition (the two frontier walls of one tree) are merged.
    pub fn from_ball(ball: &CayleyBall, walls: &[Wall]) -> Result<Self, CubeError> {
        let mut splits = Vec::with_capacity(walls.len());
        let mut common: Option<BTreeSet<usize>> = None;
        for (i, w) in walls.iter().enumerate() {
            let cut: BTreeSet<usize> = w.dual_edges.iter().copied().collect();
            let comps = edge_cut_components(&ball.complex, &wall_region(&ball.complex, w), &cut);
            if comps.len() != 2 {
                return Err(CubeError::Inconsistent { wall: i, sides: comps.len() });
            }
            let region: BTreeSet<usize> = comps.iter().flatten().copied().collect();
            common = Some(match common {
                None => region,
                Some(c) => c.intersection(&region).copied().collect(),
            });
            splits.push(comps[0].iter().copied().collect::<BTreeSet<usize>>());
        }
        let vertices: Vec<usize> = common.unwrap_or_default().into_iter().collect();
        if vertices.is_empty() {
            return Err(CubeError::NoCommonPoints);
        }
        let index: BTreeMap<usize, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut sides = Vec::new();
        let mut kept = Vec::new();
        let mut seen = BTreeSet::new();
        for (i, side) in splits.iter().enumerate() {
            let mut s: BTreeSet<usize> = side.iter().filter_map(|v| index.get(v).copied()).collect();
            if s.is_empty() || s.len() == vertices.len() {
                continue;
            }
            if s.contains(&0) {
                s = (0..vertices.len()).filter(|p| !s.contains(p)).collect();
            }
            if seen.insert(s.clone()) {
                sides.push(s);
                kept.push(i);
            }
        }
        Ok(Wallspace { points: vertices.len(), sides, vertices, walls: kept })
    }

    /// The point at a ball vertex.
    pub fn point_of(&self, vertex: usize) -> Option<usize> {
        self.vertices.binary_search(&vertex).ok()
    }

    fn side(&self, w: usize, positive: bool) -> BTreeSet<usize> {
        if positive {
            self.sides[w].clone()
        } else {
            (0..self.points).filter(|p| !self.sides[w].contains(p)).collect()
        }
    }

    pub fn cross(&self, a: usize, b: usize) -> bool {
        [true, false].iter().all(|&sa| [true, false].iter().all(|&sb| !self.side(a, sa).is_disjoint(&self.side(b, sb))))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubeComplexFragment {
    /// Orientations: `true` selects the listed side of each wall.
    pub vertices: Vec<Vec<bool>>,
    /// `(u, v, wall)` with `u`, `v` differing exactly at `wall`.
    pub edges: Vec<(usize, usize, usize)>,
    /// Vertex 4-cycles for crossing wall pairs.
    pub squares: Vec<[usize; 4]>,
    /// Squares span the cycle space over GF(2).
    pub simply_connected: bool,
    /// Pairwise crossing triples at sampled vertices span cubes.
    pub flag_ok: bool,
}

/// Orientations reachable from the principal orientation at `root` by at
/// most `max_flips` single-wall flips through consistent orientations.
pub fn dual_cube_fragment(space: &Wallspace, root: usize, max_flips: usize) -> Result<CubeComplexFragment, CubeError> {
    if root >= space.points {
        return Err(CubeError::BadRoot(root));
    }
    let k = space.sides.len();
    let halves: Vec<[BTreeSet<usize>; 2]> = (0..k).map(|w| [space.side(w, false), space.side(w, true)]).collect();
    // disjoint[a][b][x][y]: half x of wall a misses half y of wall b
    let disjoint: Vec<Vec<[[bool; 2]; 2]>> = (0..k)
        .map(|a| {
            (0..k)
                .map(|b| {
                    let mut m = [[false; 2]; 2];
                    for (x, row) in m.iter_mut().enumerate() {
                        for (y, cell) in row.iter_mut().enumerate() {
                            *cell = a != b && halves[a][x].is_disjoint(&halves[b][y]);
                        }
                    }
                    m
                })
                .collect()
        })
        .collect();
    // flipping `w` keeps a consistent orientation consistent unless it
    // clashes with another wall
    let consistent_after_flip =
        |o: &[bool], w: usize| (0..k).all(|b| !disjoint[w][b][o[w] as usize][o[b] as usize]);
    let principal: Vec<bool> = (0..k).map(|w| space.sides[w].contains(&root)).collect();
    let mut index: BTreeMap<Vec<bool>, usize> = BTreeMap::new();
    let mut vertices = vec![principal.clone()];
    index.insert(principal, 0);
    let mut depth = vec![0usize];
    let mut queue = VecDeque::from([0usize]);
    let mut edges = BTreeSet::new();
    while let Some(v) = queue.pop_front() {
        for w in 0..k {
            let mut o = vertices[v].clone();
            o[w] = !o[w];
            if !consistent_after_flip(&o, w) {
                continue;
            }
            let u = match index.get(&o) {
                Some(&u) => u,
                None if depth[v] < max_flips => {
                    let u = vertices.len();
                    index.insert(o.clone(), u);
                    vertices.push(o);
                    depth.push(depth[v] + 1);
                    queue.push_back(u);
                    u
                }
                None => continue,
            };
            edges.insert((v.min(u), v.max(u), w));
        }
    }
    let edges: Vec<(usize, usize, usize)> = edges.into_iter().collect();
    let crossing: Vec<Vec<bool>> =
        (0..k).map(|a| (0..k).map(|b| a != b && disjoint[a][b].iter().flatten().all(|&d| !d)).collect()).collect();
    let mut squares = Vec::new();
    for (v, o) in vertices.iter().enumerate() {
        for a in 0..k {
            for b in a + 1..k {
                if !crossing[a][b] {
                    continue;
                }
                let flip = |o: &[bool], ws: &[usize]| {
                    let mut x = o.to_vec();
                    for &w in ws {
                        x[w] = !x[w];
                    }
                    x
                };
                let ids = [vec![], vec![a], vec![a, b], vec![b]].map(|ws| index.get(&flip(o, &ws)).copied());
                if let [Some(p), Some(q), Some(r), Some(s)] = ids {
                    let sq = [p, q, r, s];
                    if p == v && sq.iter().all(|&x| x >= v) {
                        squares.push(sq);
                    }
                }
            }
        }
    }
    let simply_connected = cycle_space_spanned(vertices.len(), &edges, &squares);
    let flag_ok = flag_spot_check(&crossing, &vertices, &index, &depth, max_flips);
    Ok(CubeComplexFragment { vertices, edges, squares, simply_connected, flag_ok })
}

fn cycle_space_spanned(n: usize, edges: &[(usize, usize, usize)], squares: &[[usize; 4]]) -> bool {
    let mut uf = crate::complex2::UnionFind::new(n);
    for &(u, v, _) in edges {
        uf.union(u, v);
    }
    let dim = edges.len() + uf.count() - n;
    let eid: BTreeMap<(usize, usize), usize> = edges.iter().enumerate().map(|(i, &(u, v, _))| ((u, v), i)).collect();
    let rows: Vec<Vec<u64>> = squares
        .iter()
        .map(|sq| {
            let mut row = vec![0u64; edges.len().div_ceil(64)];
            for i in 0..4 {
                let (u, v) = (sq[i].min(sq[(i + 1) % 4]), sq[i].max(sq[(i + 1) % 4]));
                if let Some(&e) = eid.get(&(u, v)) {
                    row[e / 64] ^= 1 << (e % 64);
                }
            }
            row
        })
        .collect();
    gf2_rank(rows) == dim
}

fn gf2_rank(mut rows: Vec<Vec<u64>>) -> usize {
    let mut rank = 0;
    let bits = rows.first().map_or(0, |r| r.len() * 64);
    for bit in 0..bits {
        let Some(p) = (rank..rows.len()).find(|&i| rows[i][bit / 64] >> (bit % 64) & 1 == 1) else { continue };
        rows.swap(rank, p);
        for i in 0..rows.len() {
            if i != rank && rows[i][bit / 64] >> (bit % 64) & 1 == 1 {
                let pivot = rows[rank].clone();
                for (x, y) in rows[i].iter_mut().zip(pivot) {
                    *x ^= y;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// At sampled vertices deep enough inside the fragment that a whole cube
/// fits, three pairwise crossing walls whose single flips are present must
/// span a cube.
fn flag_spot_check(
    crossing: &[Vec<bool>],
    vertices: &[Vec<bool>],
    index: &BTreeMap<Vec<bool>, usize>,
    depth: &[usize],
    max_flips: usize,
) -> bool {
    let k = crossing.len();
    let inner = vertices.iter().zip(depth).filter(|&(_, &d)| d + 3 <= max_flips).map(|(o, _)| o);
    inner.take(64).all(|o| {
        let flip = |ws: &[usize]| {
            let mut x = o.clone();
            for &w in ws {
                x[w] = !x[w];
            }
            x
        };
        let incident: Vec<usize> = (0..k).filter(|&w| index.contains_key(&flip(&[w]))).collect();
        incident.iter().enumerate().all(|(i, &a)| {
            incident[i + 1..].iter().enumerate().all(|(j, &b)| {
                incident[i + 1 + j + 1..].iter().all(|&c| {
                    let pairwise = crossing[a][b] && crossing[a][c] && crossing[b][c];
                    let squares = [[a, b], [a, c], [b, c]].iter().all(|ws| index.contains_key(&flip(ws)));
                    !(pairwise && squares) || index.contains_key(&flip(&[a, b, c]))
                })
            })
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(points: usize, sides: &[&[usize]]) -> Wallspace {
        Wallspace::new(points, sides.iter().map(|s| s.iter().copied().collect()).collect()).unwrap()
    }

    #[test]
    fn one_wall_is_an_edge() {
        let f = dual_cube_fragment(&space(2, &[&[0]]), 0, 4).unwrap();
        assert_eq!((f.vertices.len(), f.edges.len(), f.squares.len()), (2, 1, 0));
        assert!(f.simply_connected);
    }

    #[test]
    fn crossing_walls_give_a_square() {
        // four quadrants
        let f = dual_cube_fragment(&space(4, &[&[0, 1], &[0, 2]]), 0, 4).unwrap();
        assert_eq!((f.vertices.len(), f.edges.len(), f.squares.len()), (4, 4, 1));
        assert!(f.simply_connected && f.flag_ok);
    }

    #[test]
    fn nested_walls_give_a_path() {
        let f = dual_cube_fragment(&space(3, &[&[0], &[0, 1]]), 0, 4).unwrap();
        assert_eq!((f.vertices.len(), f.edges.len(), f.squares.len()), (3, 2, 0));
        assert!(f.simply_connected);
    }

    #[test]
    fn missing_square_is_detected() {
        let edges = vec![(0, 1, 0), (1, 2, 1), (2, 3, 0), (0, 3, 1)];
        assert!(!cycle_space_spanned(4, &edges, &[]));
        assert!(cycle_space_spanned(4, &edges, &[[0, 1, 2, 3]]));
    }

    #[test]
    fn three_crossing_walls_fill_a_cube() {
        let pts: Vec<usize> = (0..8).collect();
        let sides: Vec<BTreeSet<usize>> = (0..3).map(|b| pts.iter().copied().filter(|p| p >> b & 1 == 1).collect()).collect();
        let f = dual_cube_fragment(&Wallspace::new(8, sides).unwrap(), 0, 3).unwrap();
        assert_eq!((f.vertices.len(), f.edges.len(), f.squares.len()), (8, 12, 6));
        assert!(f.simply_connected && f.flag_ok);
    }

    #[test]
    fn octagon_ball_walls_pair_up() {
        use crate::geometry::{build_ball, walls, EqualityOracle};
        use crate::words::{branch, parse_presentation};
        let b = branch(&parse_presentation("<a,b | [a,b]>").unwrap(), &[2]).unwrap().with_certification(true);
        let ball = build_ball(&b, 5, &EqualityOracle::dehn(&b).unwrap()).unwrap();
        let ws: Vec<Wall> = walls(&ball)
            .into_iter()
            .filter(|w| w.dual_edges.iter().any(|&e| ball.is_safe_edge(e)))
            .collect();
        let space = Wallspace::from_ball(&ball, &ws).unwrap();
        // the two frontier walls of each tree give the same partition
        assert_eq!(2 * space.sides.len(), ws.len());
        let f = dual_cube_fragment(&space, space.point_of(0).unwrap(), 3).unwrap();
        assert!(f.simply_connected && f.flag_ok);
        // each edge at the root crosses exactly one partition
        let at_root: Vec<usize> = ball
            .complex
            .edges
            .iter()
            .filter_map(|&(u, v)| if u == 0 { Some(v) } else if v == 0 { Some(u) } else { None })
            .collect();
        assert_eq!(at_root.len(), 4);
        for u in at_root {
            let p = space.point_of(u).unwrap();
            let flipped = space.sides.iter().filter(|s| s.contains(&p) != s.contains(&space.point_of(0).unwrap())).count();
            assert_eq!(flipped, 1);
        }
        assert!(f.edges.iter().filter(|e| e.0 == 0).count() >= 4);
    }
}
