//! Canonical codes, bounded enumeration of reduced disk diagrams, and the
//! search for spherical near-immersions.

use std::collections::{BTreeMap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex2::UnionFind;
use crate::smallcancel::{placement_word, Placement};
use crate::words::{Letter, Presentation};

use super::{mirrored_readings_agree, DiskDiagram};

/// Isomorphism invariant of a diagram as a labelled planar map, up to
/// choice of base point and orientation.
pub fn canonical_code(d: &DiskDiagram) -> Vec<u32> {
    let n = d.dart_origin.len();
    if n == 0 {
        return vec![d.faces.len() as u32];
    }
    let phi = d.phi();
    let mut phi_inv = vec![0; n];
    for (x, &y) in phi.iter().enumerate() {
        phi_inv[y] = x;
    }
    let owner = d.dart_face();
    let tag = |x: usize| owner[x].map_or(0, |f| 1 + d.faces[f].relator as u32);
    let mut best: Option<Vec<u32>> = None;
    for mirror in [false, true] {
        let step = |x: usize| if mirror { phi_inv[x ^ 1] ^ 1 } else { phi[x] };
        let ftag = |x: usize| if mirror { tag(x ^ 1) } else { tag(x) };
        for root in 0..n {
            let mut num = vec![u32::MAX; n];
            let mut order = Vec::with_capacity(n);
            let mut queue = VecDeque::from([root]);
            num[root] = 0;
            while let Some(x) = queue.pop_front() {
                order.push(x);
                for y in [x ^ 1, step(x)] {
                    if num[y] == u32::MAX {
                        num[y] = (order.len() + queue.len()) as u32;
                        queue.push_back(y);
                    }
                }
            }
            let mut code = Vec::with_capacity(4 * n + 1);
            code.push(d.faces.len() as u32);
            for &x in &order {
                code.extend([num[x ^ 1], num[step(x)], d.letter(x).index() as u32, ftag(x)]);
            }
            if best.as_ref().is_none_or(|b| code < *b) {
                best = Some(code);
            }
        }
    }
    best.expect("at least one dart")
}

fn all_placements(p: &Presentation) -> Vec<Placement> {
    let mut out = Vec::new();
    for (relator, r) in p.relators.iter().enumerate() {
        for inverted in [false, true] {
            for offset in 0..r.len() {
                out.push(Placement { relator, inverted, offset });
            }
        }
    }
    out
}

/// All one-face extensions of `d` along a boundary segment that create no
/// cancellable pair.
fn extensions(p: &Presentation, d: &DiskDiagram, placements: &[Placement]) -> Vec<DiskDiagram> {
    let n = d.perimeter();
    let mut out = Vec::new();
    for s in 0..n.max(1) {
        let mut base = d.clone();
        base.rotate(s);
        let seg_letters: Vec<Letter> = base.boundary.iter().map(|&x| base.letter(x ^ 1)).collect();
        for &pl in placements {
            let len = p.relators[pl.relator].len();
            let w = placement_word(p, pl, len);
            for k in 0..=n.min(len - 1) {
                // the face reads Q, then the segment backwards
                if (0..k).any(|i| w.0[len - k + i] != seg_letters[k - 1 - i]) {
                    continue;
                }
                let mut e = base.clone();
                if e.attach_face(k, &w.0[..len - k], p, pl).is_err() {
                    continue;
                }
                let new_face = e.faces.len() - 1;
                let owner = e.dart_face();
                let cancellable = base.boundary[..k].iter().any(|&x| {
                        let g = owner[x].expect("segment dart lies on an old face");
                        e.faces[g].relator == pl.relator && mirrored_readings_agree(&e, new_face, x ^ 1, g, x)
                    });
                if !cancellable {
                    out.push(e);
                }
            }
        }
    }
    out
}

/// Reduced disk diagrams built from faces only, up to `max_area` faces,
/// one representative per isomorphism class, ordered by area then code.
pub fn enumerate_reduced_disks(p: &Presentation, max_area: usize) -> Vec<DiskDiagram> {
    let placements = all_placements(p);
    if placements.is_empty() || max_area == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut level: BTreeMap<Vec<u32>, DiskDiagram> = BTreeMap::new();
    for &pl in &placements {
        let d = DiskDiagram::polygon(p, pl);
        level.entry(canonical_code(&d)).or_insert(d);
    }
    for area in 1..=max_area {
        out.extend(level.values().cloned());
        if area == max_area {
            break;
        }
        let found: Vec<Vec<DiskDiagram>> = level.values().collect::<Vec<_>>().par_iter().map(|d| extensions(p, d, &placements)).collect();
        let mut next = BTreeMap::new();
        for e in found.into_iter().flatten() {
            next.entry(canonical_code(&e)).or_insert(e);
        }
        level = next;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SphereFace {
    pub relator: usize,
    pub inverted: bool,
}

/// A closed surface made of relator polygons with sides glued in pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SphericalDiagram {
    pub faces: Vec<SphereFace>,
    /// Glued sides as `((face, side), (face, side))`.
    pub gluing: Vec<((usize, usize), (usize, usize))>,
    pub vertices: usize,
    pub edges: usize,
}

impl SphericalDiagram {
    pub fn area(&self) -> usize {
        self.faces.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices as i64 - self.edges as i64 + self.faces.len() as i64
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum SphereSearch {
    Found { sphere: SphericalDiagram },
    /// No spherical near-immersion with at most `max_area` faces.
    Absent { max_area: usize },
    /// The search budget ran out before the bound was exhausted.
    Exhausted { completed_area: usize },
}

const SPHERE_NODE_BUDGET: usize = 5_000_000;

struct SideInfo {
    face: usize,
    pos: usize,
    letter: Letter,
    /// Relator and position in the relator of the edge's 2-cell sheet.
    sheet: (usize, usize),
}

struct SphereSearcher<'a> {
    sides: Vec<SideInfo>,
    lens: Vec<usize>,
    mate: Vec<usize>,
    nodes: usize,
    faces: &'a [SphereFace],
}

impl SphereSearcher<'_> {
    fn corner(&self, face: usize, pos: usize) -> usize {
        let start: usize = self.lens[..face].iter().sum();
        start + pos % self.lens[face]
    }

    fn run(&mut self) -> Option<Option<SphericalDiagram>> {
        self.nodes += 1;
        if self.nodes > SPHERE_NODE_BUDGET {
            return None;
        }
        let Some(a) = self.mate.iter().position(|&m| m == usize::MAX) else {
            return Some(self.finish());
        };
        for b in a + 1..self.sides.len() {
            if self.mate[b] != usize::MAX || !self.sides[b].letter.is_inverse_of(self.sides[a].letter) {
                continue;
            }
            // two half-disks on the same sheet fold the edge
            if self.sides[a].sheet == self.sides[b].sheet {
                continue;
            }
            self.mate[a] = b;
            self.mate[b] = a;
            match self.run() {
                Some(None) => {}
                other => return other,
            }
            self.mate[a] = usize::MAX;
            self.mate[b] = usize::MAX;
        }
        Some(None)
    }

    fn finish(&self) -> Option<SphericalDiagram> {
        let total = self.sides.len();
        let mut corners = UnionFind::new(total);
        let mut comps = UnionFind::new(self.faces.len());
        let mut gluing = Vec::new();
        for a in 0..total {
            let b = self.mate[a];
            if a > b {
                continue;
            }
            let (sa, sb) = (&self.sides[a], &self.sides[b]);
            corners.union(self.corner(sa.face, sa.pos), self.corner(sb.face, sb.pos + 1));
            corners.union(self.corner(sa.face, sa.pos + 1), self.corner(sb.face, sb.pos));
            comps.union(sa.face, sb.face);
            gluing.push(((sa.face, sa.pos), (sb.face, sb.pos)));
        }
        let s = SphericalDiagram { faces: self.faces.to_vec(), gluing, vertices: corners.count(), edges: total / 2 };
        (comps.count() == 1 && s.euler_characteristic() == 2).then_some(s)
    }
}

fn face_multisets(types: usize, size: usize) -> Vec<Vec<usize>> {
    fn go(types: usize, size: usize, min: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for t in min..types {
            cur.push(t);
            go(types, size, t, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(types, size, 0, &mut Vec::new(), &mut out);
    out
}

/// Look for a sphere mapping to the presentation complex injectively near
/// every edge, using at most `max_area` faces.
pub fn find_spherical_near_immersion(p: &Presentation, max_area: usize) -> SphereSearch {
    let types: Vec<SphereFace> = (0..p.relators.len())
        .flat_map(|relator| [false, true].map(|inverted| SphereFace { relator, inverted }))
        .collect();
    let mut nodes = 0;
    for area in 1..=max_area {
        for multiset in face_multisets(types.len(), area) {
            let faces: Vec<SphereFace> = multiset.iter().map(|&t| types[t].clone()).collect();
            let mut sides = Vec::new();
            let mut lens = Vec::new();
            for (fi, f) in faces.iter().enumerate() {
                let n = p.relators[f.relator].len();
                lens.push(n);
                let w = placement_word(p, Placement { relator: f.relator, inverted: f.inverted, offset: 0 }, n);
                for (pos, &letter) in w.0.iter().enumerate() {
                    let rpos = if f.inverted { n - 1 - pos } else { pos };
                    sides.push(SideInfo { face: fi, pos, letter, sheet: (f.relator, rpos) });
                }
            }
            if sides.len() % 2 == 1 {
                continue;
            }
            let mut s = SphereSearcher { mate: vec![usize::MAX; sides.len()], sides, lens, nodes, faces: &faces };
            let result = s.run();
            nodes = s.nodes;
            match result {
                None => return SphereSearch::Exhausted { completed_area: area - 1 },
                Some(Some(sphere)) => return SphereSearch::Found { sphere },
                Some(None) => {}
            }
        }
    }
    SphereSearch::Absent { max_area }
}
