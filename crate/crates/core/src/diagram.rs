//! Disk diagrams as planar maps, cell roles, Dehn-property audits and
//! bounded enumeration.
//!
//! Edge `e` has darts `2e` and `2e + 1`. Inner faces are stored as dart
//! cycles read counterclockwise, and so is the outer boundary path. An edge
//! on the boundary therefore appears with the same dart in the boundary path
//! and in its face; an interior edge appears with opposite darts in its two
//! faces; a spur or bridge appears with both darts in the boundary path.

mod enumerate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex2::UnionFind;
use crate::smallcancel::placement_word;
use crate::smallcancel::Placement;
use crate::words::{Letter, Presentation, Word};

pub use enumerate::{
    canonical_code, enumerate_reduced_disks, find_spherical_near_immersion, SphereFace, SphereSearch, SphericalDiagram,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiagramError {
    #[error("position {0} outside the boundary")]
    BadPosition(usize),
    #[error("new face path must have at least one edge")]
    EmptyPath,
    #[error("face reading does not match the relator placement")]
    LabelMismatch,
    #[error("faces have mixed perimeters")]
    MixedPerimeters,
    #[error("diagram has no faces")]
    NoFaces,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramFace {
    pub darts: Vec<usize>,
    pub relator: usize,
    pub inverted: bool,
    pub offset: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiskDiagram {
    pub num_vertices: usize,
    /// Origin vertex of each dart.
    pub dart_origin: Vec<usize>,
    /// Letter read along each forward dart; reverse darts read the inverse.
    pub edge_letter: Vec<Letter>,
    pub faces: Vec<DiagramFace>,
    /// Outer boundary path, counterclockwise from the base point.
    pub boundary: Vec<usize>,
    /// Base vertex, meaningful when the boundary is empty.
    pub base: usize,
}

#[inline]
fn rev(d: usize) -> usize {
    d ^ 1
}

impl DiskDiagram {
    pub fn single_vertex() -> Self {
        DiskDiagram {
            num_vertices: 1,
            dart_origin: Vec::new(),
            edge_letter: Vec::new(),
            faces: Vec::new(),
            boundary: Vec::new(),
            base: 0,
        }
    }

    pub fn num_edges(&self) -> usize {
        self.edge_letter.len()
    }

    pub fn area(&self) -> usize {
        self.faces.len()
    }

    pub fn perimeter(&self) -> usize {
        self.boundary.len()
    }

    pub fn origin(&self, d: usize) -> usize {
        self.dart_origin[d]
    }

    pub fn target(&self, d: usize) -> usize {
        self.dart_origin[rev(d)]
    }

    pub fn letter(&self, d: usize) -> Letter {
        let l = self.edge_letter[d / 2];
        if d.is_multiple_of(2) { l } else { l.inverse() }
    }

    pub fn read(&self, darts: &[usize]) -> Word {
        Word(darts.iter().map(|&d| self.letter(d)).collect())
    }

    pub fn boundary_word(&self) -> Word {
        self.read(&self.boundary)
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices as i64 - self.num_edges() as i64 + self.faces.len() as i64
    }

    fn add_edge(&mut self, u: usize, v: usize, l: Letter) -> usize {
        self.dart_origin.push(u);
        self.dart_origin.push(v);
        self.edge_letter.push(l);
        2 * (self.edge_letter.len() - 1)
    }

    /// Vertex at which boundary position `pos` starts.
    fn boundary_vertex(&self, pos: usize) -> usize {
        if self.boundary.is_empty() {
            self.base
        } else {
            self.origin(self.boundary[pos % self.boundary.len()])
        }
    }

    /// Move the base point `r` steps along the boundary.
    pub fn rotate(&mut self, r: usize) {
        if !self.boundary.is_empty() {
            let r = r % self.boundary.len();
            self.boundary.rotate_left(r);
            self.base = self.origin(self.boundary[0]);
        }
    }

    /// Hang a new edge reading `letter` at boundary position `pos`.
    pub fn attach_spur(&mut self, pos: usize, letter: Letter) -> Result<(), DiagramError> {
        if pos > self.boundary.len() {
            return Err(DiagramError::BadPosition(pos));
        }
        let v = self.boundary_vertex(pos);
        let u = self.num_vertices;
        self.num_vertices += 1;
        let d = self.add_edge(v, u, letter);
        self.boundary.splice(pos..pos, [d, rev(d)]);
        if pos == 0 {
            self.base = v;
        }
        Ok(())
    }

    /// Glue a face along the first `k` boundary darts, adding a new outer
    /// path reading `q`. The face reads `q` followed by the reverse of the
    /// covered segment, which must be the placement's word.
    pub fn attach_face(&mut self, k: usize, q: &[Letter], p: &Presentation, placement: Placement) -> Result<usize, DiagramError> {
        if q.is_empty() {
            return Err(DiagramError::EmptyPath);
        }
        if k > self.boundary.len() {
            return Err(DiagramError::BadPosition(k));
        }
        let seg: Vec<usize> = self.boundary[..k].to_vec();
        let v0 = self.boundary_vertex(0);
        let vk = if k == 0 { v0 } else { self.target(seg[k - 1]) };
        let mut reading: Vec<Letter> = q.to_vec();
        reading.extend(seg.iter().rev().map(|&d| self.letter(rev(d))));
        let len = p.relators[placement.relator].len();
        if reading.len() != len || placement_word(p, placement, len).0 != reading {
            return Err(DiagramError::LabelMismatch);
        }
        let mut path = Vec::with_capacity(q.len());
        let mut cur = v0;
        for (i, &l) in q.iter().enumerate() {
            let next = if i + 1 == q.len() {
                vk
            } else {
                self.num_vertices += 1;
                self.num_vertices - 1
            };
            path.push(self.add_edge(cur, next, l));
            cur = next;
        }
        let mut cycle = path.clone();
        cycle.extend(seg.iter().rev().map(|&d| rev(d)));
        self.faces.push(DiagramFace {
            darts: cycle,
            relator: placement.relator,
            inverted: placement.inverted,
            offset: placement.offset,
        });
        self.boundary.splice(..k, path);
        self.base = v0;
        Ok(self.faces.len() - 1)
    }

    /// A diagram made of one face.
    pub fn polygon(p: &Presentation, placement: Placement) -> Self {
        let len = p.relators[placement.relator].len();
        let w = placement_word(p, placement, len);
        let mut d = DiskDiagram::single_vertex();
        d.attach_face(0, &w.0, p, placement).expect("polygon reading is its placement");
        d
    }

    /// Every dart lies in exactly one inner face or in the reversed boundary.
    pub fn validate(&self) -> bool {
        let mut count = vec![0usize; self.dart_origin.len()];
        for f in &self.faces {
            for &d in &f.darts {
                count[d] += 1;
            }
        }
        for &d in &self.boundary {
            count[rev(d)] += 1;
        }
        let cycles_closed = self
            .faces
            .iter()
            .map(|f| &f.darts)
            .chain(std::iter::once(&self.boundary))
            .all(|c| (0..c.len()).all(|i| self.target(c[i]) == self.origin(c[(i + 1) % c.len()])));
        count.iter().all(|&c| c == 1) && cycles_closed && self.euler_characteristic() == 1
    }

    /// Next dart around the face (inner or outer) containing `d`.
    pub(crate) fn phi(&self) -> Vec<usize> {
        let mut phi = vec![usize::MAX; self.dart_origin.len()];
        for f in &self.faces {
            let n = f.darts.len();
            for i in 0..n {
                phi[f.darts[i]] = f.darts[(i + 1) % n];
            }
        }
        let outer: Vec<usize> = self.boundary.iter().rev().map(|&d| rev(d)).collect();
        let n = outer.len();
        for i in 0..n {
            phi[outer[i]] = outer[(i + 1) % n];
        }
        phi
    }

    /// Face index owning each dart; `None` for the outer face.
    pub(crate) fn dart_face(&self) -> Vec<Option<usize>> {
        let mut owner = vec![None; self.dart_origin.len()];
        for (fi, f) in self.faces.iter().enumerate() {
            for &d in &f.darts {
                owner[d] = Some(fi);
            }
        }
        owner
    }

    pub fn valence(&self, v: usize) -> usize {
        self.dart_origin.iter().filter(|&&o| o == v).count()
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph diagram {\n");
        let on_boundary: BTreeSet<usize> = self.boundary.iter().map(|d| d / 2).collect();
        for v in 0..self.num_vertices {
            let _ = writeln!(s, "  v{v};");
        }
        for e in 0..self.num_edges() {
            let style = if on_boundary.contains(&e) { "bold" } else { "solid" };
            let _ = writeln!(
                s,
                "  v{} -> v{} [label=\"{}{}\", style={style}];",
                self.dart_origin[2 * e],
                self.dart_origin[2 * e + 1],
                self.edge_letter[e].generator,
                if self.edge_letter[e].sign > 0 { "" } else { "'" }
            );
        }
        for (i, f) in self.faces.iter().enumerate() {
            let _ = writeln!(s, "  // face {i}: relator {} inverted {} darts {:?}", f.relator, f.inverted, f.darts);
        }
        s.push_str("}\n");
        s
    }
}

/// Two distinct faces sharing an edge whose readings from that edge, in
/// mirrored directions, agree.
pub fn cancellable_pairs(d: &DiskDiagram) -> Vec<(usize, usize, usize)> {
    let owner = d.dart_face();
    let mut out = Vec::new();
    for e in 0..d.num_edges() {
        let (x, y) = (2 * e, 2 * e + 1);
        let (Some(f), Some(g)) = (owner[x], owner[y]) else { continue };
        if f == g || d.faces[f].relator != d.faces[g].relator {
            continue;
        }
        if mirrored_readings_agree(d, f, x, g, y) {
            out.push((f.min(g), f.max(g), e));
        }
    }
    out
}

/// Reading of face `f` from dart `x`, against the reading of face `g`
/// clockwise from `rev(y) = x`.
pub(crate) fn mirrored_readings_agree(d: &DiskDiagram, f: usize, x: usize, g: usize, y: usize) -> bool {
    let cf = &d.faces[f].darts;
    let cg = &d.faces[g].darts;
    if cf.len() != cg.len() {
        return false;
    }
    let n = cf.len();
    let i = cf.iter().position(|&z| z == x).expect("dart in face");
    let j = cg.iter().position(|&z| z == y).expect("dart in face");
    (0..n).all(|t| {
        let a = d.letter(cf[(i + t) % n]);
        let b = if t == 0 { d.letter(x) } else { d.letter(rev(cg[(j + n - t) % n])) };
        a == b
    })
}

pub fn is_reduced(d: &DiskDiagram) -> bool {
    cancellable_pairs(d).is_empty()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShellMode {
    /// `Q` is a contiguous subpath of the boundary path.
    BoundaryPath,
    /// Additionally the interior of `Q` meets no other cell.
    InteriorFree,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "role", rename_all = "snake_case")]
pub enum CellRole {
    Spur { vertex: usize },
    Shell { face: usize, outer: usize, inner: usize },
    Cutcell { face: usize, lobes: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub roles: Vec<CellRole>,
    /// A single 0-, 1- or 2-cell.
    pub trivial: bool,
    pub spurs: usize,
    pub shells: usize,
    pub cutcells: usize,
    /// Distinct cells carrying at least one role.
    pub distinct: usize,
    pub mode: ShellMode,
}

/// Longest run of a face's darts lying consecutively on the boundary path.
pub fn outer_run(d: &DiskDiagram, f: usize, mode: ShellMode) -> usize {
    let cyc = &d.faces[f].darts;
    let n = cyc.len();
    let bpos: BTreeMap<usize, usize> = d.boundary.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let blen = d.boundary.len();
    let on = |x: usize| bpos.contains_key(&x);
    if (0..n).all(|i| on(cyc[i])) && (0..n).all(|i| bpos[&cyc[(i + 1) % n]] == (bpos[&cyc[i]] + 1) % blen) {
        return n;
    }
    let mut best = 0;
    for start in 0..n {
        if !on(cyc[start]) {
            continue;
        }
        let mut len = 1;
        while len < n {
            let a = cyc[(start + len - 1) % n];
            let b = cyc[(start + len) % n];
            if !on(b) || bpos[&b] != (bpos[&a] + 1) % blen {
                break;
            }
            if mode == ShellMode::InteriorFree && d.valence(d.origin(b)) != 2 {
                break;
            }
            len += 1;
        }
        best = best.max(len);
    }
    best
}

/// Components of `D - cl(R)`.
pub fn lobes(d: &DiskDiagram, f: usize) -> usize {
    let fv: BTreeSet<usize> = d.faces[f].darts.iter().map(|&x| d.origin(x)).collect();
    let fe: BTreeSet<usize> = d.faces[f].darts.iter().map(|&x| x / 2).collect();
    // nodes: vertices, then edges, then faces
    let ne = d.num_edges();
    let nv = d.num_vertices;
    let mut uf = UnionFind::new(nv + ne + d.faces.len());
    let mut present = BTreeSet::new();
    for v in 0..nv {
        if !fv.contains(&v) {
            present.insert(v);
        }
    }
    for e in 0..ne {
        if fe.contains(&e) {
            continue;
        }
        present.insert(nv + e);
        for end in [d.dart_origin[2 * e], d.dart_origin[2 * e + 1]] {
            if !fv.contains(&end) {
                uf.union(nv + e, end);
            }
        }
    }
    for (g, face) in d.faces.iter().enumerate() {
        if g == f {
            continue;
        }
        present.insert(nv + ne + g);
        for &x in &face.darts {
            if !fe.contains(&(x / 2)) {
                uf.union(nv + ne + g, nv + x / 2);
            }
            if !fv.contains(&d.origin(x)) {
                uf.union(nv + ne + g, d.origin(x));
            }
        }
    }
    present.iter().map(|&x| uf.find(x)).collect::<BTreeSet<_>>().len()
}

pub fn is_single_cell(d: &DiskDiagram) -> bool {
    match d.faces.len() {
        0 => (d.num_edges() == 0 && d.num_vertices == 1) || (d.num_edges() == 1 && d.num_vertices == 2),
        1 => d.num_edges() == d.faces[0].darts.iter().map(|x| x / 2).collect::<BTreeSet<_>>().len(),
        _ => false,
    }
}

pub fn classify_cells_with(d: &DiskDiagram, mode: ShellMode) -> Classification {
    let trivial = is_single_cell(d);
    let mut roles = Vec::new();
    if !trivial {
        for v in 0..d.num_vertices {
            if d.valence(v) == 1 {
                roles.push(CellRole::Spur { vertex: v });
            }
        }
        for f in 0..d.faces.len() {
            let n = d.faces[f].darts.len();
            let q = outer_run(d, f, mode);
            if q > 0 && q > n - q {
                roles.push(CellRole::Shell { face: f, outer: q, inner: n - q });
            }
            let l = lobes(d, f);
            if l > 1 {
                roles.push(CellRole::Cutcell { face: f, lobes: l });
            }
        }
    }
    let spurs = roles.iter().filter(|r| matches!(r, CellRole::Spur { .. })).count();
    let shells = roles.iter().filter(|r| matches!(r, CellRole::Shell { .. })).count();
    let cutcells = roles.iter().filter(|r| matches!(r, CellRole::Cutcell { .. })).count();
    let cells: BTreeSet<(u8, usize)> = roles
        .iter()
        .map(|r| match *r {
            CellRole::Spur { vertex } => (0, vertex),
            CellRole::Shell { face, .. } | CellRole::Cutcell { face, .. } => (2, face),
        })
        .collect();
    Classification { roles, trivial, spurs, shells, cutcells, distinct: cells.len(), mode }
}

pub fn classify_cells(d: &DiskDiagram) -> Classification {
    classify_cells_with(d, ShellMode::BoundaryPath)
}

/// A single cell, or at least one (strong: two) spurs, shells or cutcells.
pub fn check_generalized_dehn(d: &DiskDiagram, strong: bool) -> bool {
    let c = classify_cells(d);
    c.trivial || c.distinct >= if strong { 2 } else { 1 }
}

/// A single 0-cell or 2-cell, or a spur, or a shell.
pub fn check_dehn_property(d: &DiskDiagram) -> bool {
    let single = (d.faces.is_empty() && d.num_edges() == 0) || (d.faces.len() == 1 && is_single_cell(d));
    let c = classify_cells(d);
    single || c.spurs > 0 || c.shells > 0
}

/// `Area <= |boundary| + 1 - r` for faces all of perimeter `r`.
pub fn area_bound_check(d: &DiskDiagram, r: usize) -> Result<bool, DiagramError> {
    if d.faces.is_empty() {
        return Err(DiagramError::NoFaces);
    }
    if d.faces.iter().any(|f| f.darts.len() != r) {
        return Err(DiagramError::MixedPerimeters);
    }
    Ok(d.area() as i64 <= d.perimeter() as i64 + 1 - r as i64)
}

/// Shells whose inner path satisfies `n * |S| < |boundary of R|`, with `n`
/// the branching degree of the face's relator.
pub fn tiny_innerpath_shells(d: &DiskDiagram, degrees: &[usize]) -> Vec<CellRole> {
    classify_cells(d)
        .roles
        .into_iter()
        .filter(|r| match *r {
            CellRole::Shell { face, outer, inner } => degrees[d.faces[face].relator] * inner < outer + inner,
            _ => false,
        })
        .collect()
}

/// Cells of the ladder test: faces, and edges on no face.
fn ladder_cells(d: &DiskDiagram) -> Vec<BTreeSet<usize>> {
    let mut on_face = vec![false; d.num_edges()];
    let mut cells: Vec<BTreeSet<usize>> = Vec::new();
    for f in &d.faces {
        for &x in &f.darts {
            on_face[x / 2] = true;
        }
        cells.push(f.darts.iter().map(|&x| d.origin(x)).collect());
    }
    for e in 0..d.num_edges() {
        if !on_face[e] {
            cells.push(BTreeSet::from([d.dart_origin[2 * e], d.dart_origin[2 * e + 1]]));
        }
    }
    cells
}

/// A chain `C_1, ..., C_n` (`n >= 2`) of faces and edges with `C_i` meeting
/// `C_j` exactly when `|i - j| <= 1`.
pub fn is_ladder(d: &DiskDiagram) -> bool {
    let cells = ladder_cells(d);
    let n = cells.len();
    if n < 2 {
        return false;
    }
    let mut deg = vec![0usize; n];
    let mut arcs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if !cells[i].is_disjoint(&cells[j]) {
                deg[i] += 1;
                deg[j] += 1;
                arcs.push((i, j));
            }
        }
    }
    if arcs.len() != n - 1 || deg.iter().any(|&x| x > 2) {
        return false;
    }
    let mut uf = UnionFind::new(n);
    for &(i, j) in &arcs {
        uf.union(i, j);
    }
    uf.count() == 1
}

/// A single 0-cell or 2-cell, a ladder, or at least three tiny-innerpath
/// shells and spurs.
pub fn check_ladder_or_three_exits(d: &DiskDiagram, degrees: &[usize]) -> bool {
    let single = (d.faces.is_empty() && d.num_edges() == 0) || (d.faces.len() == 1 && is_single_cell(d));
    if single || is_ladder(d) {
        return true;
    }
    let spurs = classify_cells(d).spurs;
    tiny_innerpath_shells(d, degrees).len() + spurs >= 3
}

/// A primitive move on a cyclic word, used to record derivations that
/// reduce a word to the empty word.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum WordMove {
    /// Start reading `by` letters later.
    Rotate { by: usize },
    /// Delete the inverse pair at `pos`, `pos + 1`.
    Cancel { pos: usize },
    /// Replace the prefix `Q` (first `len` letters of the placement) by the
    /// inverse of the rest of the placement.
    Relator { placement: Placement, len: usize },
}

pub fn apply_move(p: &Presentation, w: &Word, m: &WordMove) -> Word {
    match m {
        WordMove::Rotate { by } => w.rotate(*by),
        WordMove::Cancel { pos } => {
            let mut v = w.0.clone();
            v.drain(*pos..*pos + 2);
            Word(v)
        }
        WordMove::Relator { placement, len } => {
            let total = p.relators[placement.relator].len();
            let pw = placement_word(p, *placement, total);
            let s_inv = Word(pw.0[*len..].to_vec()).inverse();
            let mut v = s_inv.0;
            v.extend_from_slice(&w.0[*len..]);
            Word(v)
        }
    }
}

/// Build the disk diagram certifying that `w` reduces to the empty word
/// under `moves`, by undoing the moves from a single vertex.
pub fn diagram_from_moves(p: &Presentation, w: &Word, moves: &[WordMove]) -> Result<DiskDiagram, DiagramError> {
    let mut words = vec![w.clone()];
    for m in moves {
        let next = apply_move(p, words.last().expect("nonempty"), m);
        words.push(next);
    }
    if !words.last().expect("nonempty").is_empty() {
        return Err(DiagramError::LabelMismatch);
    }
    let mut d = DiskDiagram::single_vertex();
    for (i, m) in moves.iter().enumerate().rev() {
        let before = &words[i];
        match m {
            WordMove::Rotate { by } => {
                let n = before.len();
                if n > 0 {
                    d.rotate(n - by % n);
                }
            }
            WordMove::Cancel { pos } => d.attach_spur(*pos, before.0[*pos])?,
            WordMove::Relator { placement, len } => {
                let total = p.relators[placement.relator].len();
                d.attach_face(total - len, &before.0[..*len], p, *placement)?;
            }
        }
    }
    debug_assert_eq!(d.boundary_word(), *w);
    Ok(d)
}
