//! Refutation search: glue relator polygons at vertices, fold to an
//! immersion, and look for a simply connected result with fewer than two
//! collapsing cells.

use std::collections::{BTreeMap, BTreeSet};

use crate::complex2::{dart_edge, dart_of, FaceLabel, TwoComplex, UnionFind};
use crate::snf::smith_normal_form;
use crate::words::{free_reduce, Letter, Presentation, Word};

use super::{count_collapsible_cells, is_trivial_complex, Witness};

/// The relator read around a polygon with fresh vertices and edges.
pub fn polygon(p: &Presentation, relator: usize) -> TwoComplex {
    let w = &p.relators[relator].representative.0;
    let n = w.len();
    let mut c = TwoComplex::new(n);
    let mut boundary = Vec::with_capacity(n);
    for (k, l) in w.iter().enumerate() {
        let (a, b) = (k, (k + 1) % n);
        if l.sign > 0 {
            let e = c.add_edge(a, b, Some(l.generator));
            boundary.push(dart_of(e, true));
        } else {
            let e = c.add_edge(b, a, Some(l.generator));
            boundary.push(dart_of(e, false));
        }
    }
    c.faces.push(crate::complex2::Face {
        boundary,
        label: Some(FaceLabel { relator, degree: 1, root_len: n }),
    });
    c
}

/// Disjoint union of complexes.
fn disjoint_union(parts: &[&TwoComplex]) -> TwoComplex {
    let mut out = TwoComplex::new(0);
    for part in parts {
        let v0 = out.num_vertices;
        let e0 = out.edges.len();
        out.num_vertices += part.num_vertices;
        for (e, &(u, v)) in part.edges.iter().enumerate() {
            out.add_edge(u + v0, v + v0, part.edge_labels[e]);
        }
        for f in &part.faces {
            out.faces.push(crate::complex2::Face {
                boundary: f.boundary.iter().map(|&d| d + 2 * e0).collect(),
                label: f.label,
            });
        }
    }
    out
}

/// Identify the given vertex pairs, then fold edges with equal labels and a
/// common origin or target until the labelling is an immersion on the
/// 1-skeleton. Faces reading the same relator along the same cycle are
/// merged.
pub fn fold_polygons(c: &TwoComplex, glue: &[(usize, usize)]) -> TwoComplex {
    let mut vuf = UnionFind::new(c.num_vertices);
    let mut euf = UnionFind::new(c.edges.len());
    for &(a, b) in glue {
        vuf.union(a, b);
    }
    loop {
        let mut changed = false;
        let mut by_origin: BTreeMap<(Option<usize>, usize), usize> = BTreeMap::new();
        let mut by_target: BTreeMap<(Option<usize>, usize), usize> = BTreeMap::new();
        for (e, &(u, v)) in c.edges.iter().enumerate() {
            if euf.find(e) != e {
                continue;
            }
            let (ru, rv) = (vuf.find(u), vuf.find(v));
            let label = c.edge_labels[e];
            if let Some(&f) = by_origin.get(&(label, ru)) {
                let (_, fv) = c.edges[f];
                vuf.union(fv, v);
                euf.union(f, e);
                changed = true;
                break;
            }
            if let Some(&f) = by_target.get(&(label, rv)) {
                let (fu, _) = c.edges[f];
                vuf.union(fu, u);
                euf.union(f, e);
                changed = true;
                break;
            }
            by_origin.insert((label, ru), e);
            by_target.insert((label, rv), e);
        }
        if !changed {
            break;
        }
    }
    let mut vmap = BTreeMap::new();
    for v in 0..c.num_vertices {
        let r = vuf.find(v);
        let next = vmap.len();
        vmap.entry(r).or_insert(next);
    }
    let mut out = TwoComplex::new(vmap.len());
    let mut emap = BTreeMap::new();
    for (e, &(u, v)) in c.edges.iter().enumerate() {
        if euf.find(e) == e {
            let id = out.add_edge(vmap[&vuf.find(u)], vmap[&vuf.find(v)], c.edge_labels[e]);
            emap.insert(e, id);
        }
    }
    let mut seen: BTreeSet<(Option<usize>, Vec<usize>)> = BTreeSet::new();
    for f in &c.faces {
        let b: Vec<usize> = f.boundary.iter().map(|&d| 2 * emap[&euf.find(dart_edge(d))] + d % 2).collect();
        let key = (f.label.map(|l| l.relator), min_rotation(&b));
        if seen.insert(key) {
            out.faces.push(crate::complex2::Face { boundary: b, label: f.label });
        }
    }
    out
}

fn min_rotation(b: &[usize]) -> Vec<usize> {
    (0..b.len().max(1))
        .map(|k| b.iter().cycle().skip(k).take(b.len()).copied().collect::<Vec<_>>())
        .min()
        .unwrap_or_default()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pi1Verdict {
    Trivial,
    Nontrivial,
    Unknown,
}

const ELIMINATION_LENGTH_CAP: usize = 4096;

/// Decide `π1 = 1` for a connected complex: a nonzero abelianization proves
/// nontriviality; eliminating generators that occur once in some relator
/// proves triviality. Anything else is unknown.
pub fn pi1_trivial(c: &TwoComplex) -> Pi1Verdict {
    if c.num_vertices == 0 {
        return Pi1Verdict::Trivial;
    }
    if c.num_components() != 1 {
        return Pi1Verdict::Unknown;
    }
    // spanning tree by BFS; non-tree edges become generators
    let mut tree = vec![false; c.edges.len()];
    let mut seen = vec![false; c.num_vertices];
    seen[0] = true;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        for (e, &(u, v)) in c.edges.iter().enumerate() {
            let other = if u == x { v } else if v == x { u } else { continue };
            if !seen[other] {
                seen[other] = true;
                tree[e] = true;
                queue.push_back(other);
            }
        }
    }
    let gen_of: BTreeMap<usize, usize> =
        (0..c.edges.len()).filter(|&e| !tree[e]).enumerate().map(|(i, e)| (e, i)).collect();
    let k = gen_of.len();
    let relators: Vec<Word> = c
        .faces
        .iter()
        .map(|f| {
            Word(
                f.boundary
                    .iter()
                    .filter_map(|&d| {
                        gen_of.get(&dart_edge(d)).map(|&g| if d % 2 == 0 { Letter::pos(g) } else { Letter::neg(g) })
                    })
                    .collect(),
            )
        })
        .collect();
    if k == 0 {
        return Pi1Verdict::Trivial;
    }
    let rows: Vec<Vec<i64>> = relators.iter().map(|r| r.exponent_vector(k)).collect();
    if !smith_normal_form(&rows, k).abelian_invariants().is_trivial() {
        return Pi1Verdict::Nontrivial;
    }
    eliminate(k, relators)
}

fn eliminate(k: usize, mut rels: Vec<Word>) -> Pi1Verdict {
    let mut alive = vec![true; k];
    loop {
        rels = rels
            .into_iter()
            .map(|r| crate::words::cyclically_reduce(&r).0.representative)
            .filter(|r| !r.is_empty())
            .collect();
        if alive.iter().all(|&a| !a) {
            return Pi1Verdict::Trivial;
        }
        if rels.iter().map(Word::len).sum::<usize>() > ELIMINATION_LENGTH_CAP {
            return Pi1Verdict::Unknown;
        }
        // a generator occurring exactly once in some relator
        let mut pick = None;
        'outer: for (ri, r) in rels.iter().enumerate() {
            for (pos, l) in r.0.iter().enumerate() {
                if r.0.iter().filter(|m| m.generator == l.generator).count() == 1 {
                    pick = Some((ri, pos));
                    break 'outer;
                }
            }
        }
        let Some((ri, pos)) = pick else {
            return Pi1Verdict::Unknown;
        };
        let r = rels.remove(ri).rotate(pos);
        let x = r.0[0];
        // x^s t = 1, so x = t^-1 when s = +1 and x = t otherwise
        let t = Word(r.0[1..].to_vec());
        let image = if x.sign > 0 { t.inverse() } else { t };
        alive[x.generator] = false;
        for w in rels.iter_mut() {
            let mut out = Vec::with_capacity(w.len());
            for &l in &w.0 {
                if l.generator == x.generator {
                    let img = if l.sign > 0 { image.clone() } else { image.inverse() };
                    out.extend(img.0);
                } else {
                    out.push(l);
                }
            }
            *w = free_reduce(&Word(out));
        }
        // generators no longer occurring anywhere are free factors
        for g in 0..k {
            if alive[g] && !rels.iter().any(|r| r.0.iter().any(|l| l.generator == g)) {
                return Pi1Verdict::Nontrivial;
            }
        }
    }
}

/// Glue up to `max_faces` relator polygons one vertex at a time.
pub(super) fn search(p: &Presentation, max_faces: usize) -> Option<Witness> {
    let polys: Vec<TwoComplex> = (0..p.relators.len()).map(|i| polygon(p, i)).collect();
    let mut level: Vec<TwoComplex> = polys.iter().map(|poly| fold_polygons(poly, &[])).collect();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    for size in 1..=max_faces {
        for y in &level {
            if let Some(w) = judge(y) {
                return Some(w);
            }
        }
        if size == max_faces {
            break;
        }
        let mut next = Vec::new();
        for y in &level {
            for poly in &polys {
                for yv in 0..y.num_vertices {
                    for pv in 0..poly.num_vertices {
                        let u = disjoint_union(&[y, poly]);
                        let z = fold_polygons(&u, &[(yv, y.num_vertices + pv)]);
                        if z.faces.len() <= y.faces.len() {
                            continue;
                        }
                        let key = serde_json::to_string(&z).expect("serializable");
                        if seen.insert(key) {
                            next.push(z);
                        }
                    }
                }
            }
        }
        level = next;
    }
    None
}

fn judge(y: &TwoComplex) -> Option<Witness> {
    if is_trivial_complex(y) || count_collapsible_cells(y) >= 2 {
        return None;
    }
    (pi1_trivial(y) == Pi1Verdict::Trivial).then(|| Witness::new(y.clone(), None, 2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex2::presentation_complex;
    use crate::words::parse_presentation;

    #[test]
    fn dunce_cap_polygon_folds_to_itself() {
        let p = parse_presentation("<a | a a a^-1>").unwrap();
        let y = fold_polygons(&polygon(&p, 0), &[]);
        assert_eq!((y.num_vertices, y.num_edges(), y.num_faces()), (1, 1, 1));
        assert_eq!(pi1_trivial(&y), Pi1Verdict::Trivial);
    }

    #[test]
    fn pi1_examples() {
        let t = presentation_complex(&parse_presentation("<a,b | [a,b]>").unwrap());
        assert_eq!(pi1_trivial(&t), Pi1Verdict::Nontrivial);
        let s = presentation_complex(&parse_presentation("<a,b | ab, b>").unwrap());
        assert_eq!(pi1_trivial(&s), Pi1Verdict::Trivial);
        let c3 = presentation_complex(&parse_presentation("<a | a^3>").unwrap());
        assert_eq!(pi1_trivial(&c3), Pi1Verdict::Nontrivial);
        let sq = fold_polygons(&polygon(&parse_presentation("<a,b | [a,b]>").unwrap(), 0), &[]);
        assert_eq!(sq.num_vertices, 4);
        assert_eq!(pi1_trivial(&sq), Pi1Verdict::Trivial);
    }

    #[test]
    fn wedge_then_fold() {
        let p = parse_presentation("<a,b | ab, b>").unwrap();
        let u = disjoint_union(&[&polygon(&p, 0), &polygon(&p, 1)]);
        let y = fold_polygons(&u, &[(0, 2)]);
        assert_eq!((y.num_vertices, y.num_edges(), y.num_faces()), (1, 2, 2));
    }
}
