//! Pieces, C(p) and T(q), staggered presentations and the curvature
//! inequality `2/p + 1/q <= 1`.
//!
//! Conventions. A placement is `(relator, orientation, offset)`: the cyclic
//! reading of the relator (or its inverse) starting at `offset`. A piece is a
//! common prefix of two distinct placements. Its length is capped by the
//! length of both relators involved, and kept strictly shorter than the
//! relator when both placements come from the same relator, so a proper power
//! `u^k` yields pieces of length `|u^k| - 1` rather than the whole cycle.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::collapse::{CollapsingVerdict, VerdictStatus};
use crate::complex2::{dart_rev, girth, link, multigraph_girth, TwoComplex};
use crate::words::{is_proper_power, Letter, Presentation, Word};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SmallCancelError {
    #[error("relator {0} is not cyclically reduced")]
    Unreduced(usize),
    #[error("face {0} has a non-immersed attaching map")]
    NotImmersed(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Placement {
    pub relator: usize,
    pub inverted: bool,
    pub offset: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PieceIndex {
    pub placements: Vec<Placement>,
    /// Longest piece that is a prefix of each placement.
    pub longest_at: Vec<usize>,
    /// All pieces grouped by length.
    pub pieces: BTreeMap<usize, BTreeSet<Word>>,
    /// Longest piece occurring in each relator.
    pub max_piece: Vec<usize>,
}

fn placement_letter(p: &Presentation, pl: Placement, i: usize) -> Letter {
    let w = &p.relators[pl.relator].representative.0;
    let n = w.len();
    if pl.inverted {
        // inverse word read from its own offset: (w^-1)[k] = w[n-1-k]^-1
        w[(2 * n - 1 - (pl.offset + i) % n) % n].inverse()
    } else {
        w[(pl.offset + i) % n]
    }
}

/// Cyclic reading of a placement, `len` letters long.
pub fn placement_word(p: &Presentation, pl: Placement, len: usize) -> Word {
    Word((0..len).map(|i| placement_letter(p, pl, i)).collect())
}

pub fn pieces(p: &Presentation) -> Result<PieceIndex, SmallCancelError> {
    for (i, r) in p.relators.iter().enumerate() {
        if !r.cyclically_reduced || r.is_empty() {
            return Err(SmallCancelError::Unreduced(i));
        }
    }
    let mut placements = Vec::new();
    for (i, r) in p.relators.iter().enumerate() {
        for inverted in [false, true] {
            for offset in 0..r.len() {
                placements.push(Placement { relator: i, inverted, offset });
            }
        }
    }
    let len_of = |pl: &Placement| p.relators[pl.relator].len();
    let mut longest_at = vec![0; placements.len()];
    for (a, pa) in placements.iter().enumerate() {
        for (b, pb) in placements.iter().enumerate() {
            if a == b {
                continue;
            }
            let mut cap = len_of(pa).min(len_of(pb));
            if pa.relator == pb.relator {
                cap = cap.saturating_sub(1);
            }
            let mut l = 0;
            while l < cap && placement_letter(p, *pa, l) == placement_letter(p, *pb, l) {
                l += 1;
            }
            longest_at[a] = longest_at[a].max(l);
        }
    }
    let mut pieces: BTreeMap<usize, BTreeSet<Word>> = BTreeMap::new();
    let mut max_piece = vec![0; p.relators.len()];
    for (a, pa) in placements.iter().enumerate() {
        max_piece[pa.relator] = max_piece[pa.relator].max(longest_at[a]);
        for l in 1..=longest_at[a] {
            pieces.entry(l).or_default().insert(placement_word(p, *pa, l));
        }
    }
    Ok(PieceIndex { placements, longest_at, pieces, max_piece })
}

impl PieceIndex {
    pub fn max_piece_length(&self) -> usize {
        self.max_piece.iter().copied().max().unwrap_or(0)
    }

    fn longest_for(&self, relator: usize) -> Vec<usize> {
        self.placements
            .iter()
            .zip(&self.longest_at)
            .filter(|(pl, _)| pl.relator == relator && !pl.inverted)
            .map(|(_, &l)| l)
            .collect()
    }
}

/// Least number of pieces whose concatenation is the cyclic relator;
/// `None` stands for infinity (some letter is not a piece).
pub fn min_piece_decomposition(relator: usize, idx: &PieceIndex) -> Option<usize> {
    let longest = idx.longest_for(relator);
    let n = longest.len();
    if n == 0 || longest.contains(&0) {
        return None;
    }
    let mut best: Option<usize> = None;
    for start in 0..n {
        // dp[j] = fewest pieces covering positions start..start+j
        let mut dp = vec![usize::MAX; n + 1];
        dp[0] = 0;
        for j in 0..n {
            if dp[j] == usize::MAX {
                continue;
            }
            let l = longest[(start + j) % n].min(n - j);
            for step in 1..=l {
                dp[j + step] = dp[j + step].min(dp[j] + 1);
            }
        }
        if dp[n] != usize::MAX {
            best = Some(best.map_or(dp[n], |b| b.min(dp[n])));
        }
    }
    best
}

/// C(k): no relator is a product of fewer than `k` pieces.
pub fn check_c(p: &Presentation, k: usize) -> Result<bool, SmallCancelError> {
    let idx = pieces(p)?;
    Ok((0..p.relators.len()).all(|i| min_piece_decomposition(i, &idx).is_none_or(|d| d >= k)))
}

/// Letters as nodes; every corner `(x, y)` of a relator cycle gives an arc
/// between `x` and `y^-1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarGraph {
    pub nodes: Vec<Letter>,
    pub arcs: Vec<(usize, usize)>,
}

pub fn star_graph(p: &Presentation) -> StarGraph {
    let nodes: Vec<Letter> = (0..2 * p.rank()).map(Letter::from_index).collect();
    let mut arcs = Vec::new();
    for r in &p.relators {
        let w = &r.representative.0;
        for i in 0..w.len() {
            let x = w[i];
            let y = w[(i + 1) % w.len()];
            arcs.push((x.index(), y.inverse().index()));
        }
    }
    StarGraph { nodes, arcs }
}

impl StarGraph {
    pub fn girth(&self) -> Option<usize> {
        multigraph_girth(self.nodes.len(), &self.arcs)
    }

    /// Lengths `h` in `[lo, hi)` admitting a closed reduced walk of length `h`.
    pub fn reduced_cycle_lengths(&self, lo: usize, hi: usize) -> Vec<usize> {
        // oriented arcs: 2i runs a->b, 2i+1 runs b->a
        let m = 2 * self.arcs.len();
        if m == 0 {
            return Vec::new();
        }
        let head = |o: usize| {
            let (a, b) = self.arcs[o / 2];
            if o.is_multiple_of(2) { b } else { a }
        };
        let tail = |o: usize| head(o ^ 1);
        let step: Vec<Vec<usize>> = (0..m)
            .map(|o| (0..m).filter(|&o2| tail(o2) == head(o) && o2 != (o ^ 1)).collect())
            .collect();
        let mut found = Vec::new();
        // reach[o][o2]: a reduced walk of the current length starts with o and ends with o2
        let mut reach: Vec<Vec<bool>> = (0..m).map(|o| (0..m).map(|o2| o == o2).collect()).collect();
        for h in 1..hi {
            if h >= lo && (0..m).any(|o| (0..m).any(|last| reach[o][last] && step[last].contains(&o))) {
                found.push(h);
            }
            let mut next = vec![vec![false; m]; m];
            for o in 0..m {
                for last in 0..m {
                    if reach[o][last] {
                        for &n in &step[last] {
                            next[o][n] = true;
                        }
                    }
                }
            }
            reach = next;
        }
        found
    }
}

/// T(q): the star graph has no closed reduced walk of length `h` with
/// `3 <= h < q`.
pub fn check_t(p: &Presentation, q: usize) -> Result<bool, SmallCancelError> {
    for (i, r) in p.relators.iter().enumerate() {
        if !r.cyclically_reduced {
            return Err(SmallCancelError::Unreduced(i));
        }
    }
    Ok(star_graph(p).reduced_cycle_lengths(3, q).is_empty())
}

/// Exhaustive search for compatible orderings of generators and relators.
pub fn is_staggered(p: &Presentation) -> bool {
    if p.relators.len() <= 1 {
        return true;
    }
    let supports: Vec<BTreeSet<usize>> = p
        .relators
        .iter()
        .map(|r| r.representative.0.iter().map(|l| l.generator).collect())
        .collect();
    let used: Vec<usize> = supports.iter().flatten().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let mut rank = vec![0usize; p.rank()];
    let mut perm: Vec<usize> = (0..used.len()).collect();
    loop {
        for (i, &g) in used.iter().enumerate() {
            rank[g] = perm[i];
        }
        let mut ends: Vec<(usize, usize)> = supports
            .iter()
            .map(|s| {
                let rs = s.iter().map(|&g| rank[g]);
                (rs.clone().min().unwrap_or(0), rs.max().unwrap_or(0))
            })
            .collect();
        ends.sort();
        if ends.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1) {
            return true;
        }
        if !next_permutation(&mut perm) {
            return false;
        }
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurvatureParams {
    /// Minimum girth of vertex links; `None` is infinity.
    pub p: Option<usize>,
    /// Minimum face perimeter; `None` when there are no faces.
    pub q: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurvatureVerdict {
    Negative,
    Nonpositive,
    #[serde(rename = "none")]
    Fails,
}

pub fn curvature_condition(c: &TwoComplex) -> Result<(CurvatureParams, CurvatureVerdict), SmallCancelError> {
    for (i, f) in c.faces.iter().enumerate() {
        let b = &f.boundary;
        if (0..b.len()).any(|k| b[(k + 1) % b.len()] == dart_rev(b[k])) {
            return Err(SmallCancelError::NotImmersed(i));
        }
    }
    let p = (0..c.num_vertices)
        .filter_map(|v| girth(&link(c, v).expect("vertex in range")))
        .min();
    let q = c.faces.iter().map(|f| f.boundary.len()).min();
    // 2/p + 1/q compared with 1 as 2q + p against pq
    let verdict = match (p, q) {
        (Some(p), Some(q)) => {
            let (lhs, rhs) = (2 * q + p, p * q);
            if lhs < rhs {
                CurvatureVerdict::Negative
            } else if lhs == rhs {
                CurvatureVerdict::Nonpositive
            } else {
                CurvatureVerdict::Fails
            }
        }
        (None, Some(q)) => {
            if q > 1 {
                CurvatureVerdict::Negative
            } else {
                CurvatureVerdict::Nonpositive
            }
        }
        (Some(p), None) => {
            if p > 2 {
                CurvatureVerdict::Negative
            } else if p == 2 {
                CurvatureVerdict::Nonpositive
            } else {
                CurvatureVerdict::Fails
            }
        }
        (None, None) => CurvatureVerdict::Negative,
    };
    Ok((CurvatureParams { p, q }, verdict))
}

/// Everything the small-cancellation certification rule looks at.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SmallCancellationReport {
    pub cyclically_reduced: bool,
    pub max_piece: Option<usize>,
    /// Per relator; `None` is infinity.
    pub decompositions: Vec<Option<usize>>,
    /// Some relator has no piece decomposition, so C(k) holds vacuously for it.
    pub vacuous: bool,
    pub c4: bool,
    pub c6: bool,
    pub t4: bool,
    pub proper_powers: Vec<usize>,
    pub duplicate_pairs: Vec<(usize, usize)>,
}

pub fn small_cancellation_report(p: &Presentation) -> SmallCancellationReport {
    let cyclically_reduced = p.relators.iter().all(|r| r.cyclically_reduced && !r.is_empty());
    let proper_powers: Vec<usize> = p
        .relators
        .iter()
        .enumerate()
        .filter(|(_, r)| r.cyclically_reduced && is_proper_power(r).is_some())
        .map(|(i, _)| i)
        .collect();
    let mut duplicate_pairs = Vec::new();
    for i in 0..p.relators.len() {
        for j in i + 1..p.relators.len() {
            if p.relators[i].equal_up_to_inversion(&p.relators[j]) {
                duplicate_pairs.push((i, j));
            }
        }
    }
    if !cyclically_reduced {
        return SmallCancellationReport {
            cyclically_reduced,
            max_piece: None,
            decompositions: Vec::new(),
            vacuous: false,
            c4: false,
            c6: false,
            t4: false,
            proper_powers,
            duplicate_pairs,
        };
    }
    let idx = pieces(p).expect("relators reduced");
    let decompositions: Vec<Option<usize>> = (0..p.relators.len()).map(|i| min_piece_decomposition(i, &idx)).collect();
    let c_at = |k: usize| decompositions.iter().all(|d| d.is_none_or(|d| d >= k));
    SmallCancellationReport {
        cyclically_reduced,
        max_piece: Some(idx.max_piece_length()),
        vacuous: decompositions.iter().any(Option::is_none),
        c4: c_at(4),
        c6: c_at(6),
        t4: star_graph(p).reduced_cycle_lengths(3, 4).is_empty(),
        decompositions,
        proper_powers,
        duplicate_pairs,
    }
}

/// Certified when C(6), or C(4) and T(4), hold for cyclically reduced
/// relators that are neither proper powers nor duplicates of one another.
/// Never refutes.
pub fn certify_3_collapsing(p: &Presentation) -> CollapsingVerdict {
    let rep = small_cancellation_report(p);
    let sc = if rep.c6 {
        Some("C(6)")
    } else if rep.c4 && rep.t4 {
        Some("C(4)-T(4)")
    } else {
        None
    };
    let mut notes = Vec::new();
    if !rep.cyclically_reduced {
        notes.push("some relator is not cyclically reduced".to_string());
    }
    if !rep.proper_powers.is_empty() {
        notes.push(format!("proper-power relators {:?}", rep.proper_powers));
    }
    if !rep.duplicate_pairs.is_empty() {
        notes.push(format!("duplicate relators {:?}", rep.duplicate_pairs));
    }
    if rep.vacuous {
        notes.push("a relator has no piece decomposition; C(k) holds vacuously for it".into());
    }
    let eligible = rep.cyclically_reduced && rep.proper_powers.is_empty() && rep.duplicate_pairs.is_empty();
    let (status, provenance) = match (sc, eligible) {
        (Some(sc), true) => (
            VerdictStatus::Certified,
            format!("{sc} small cancellation with distinct, non-power relators: 3-collapsing"),
        ),
        (Some(sc), false) => (
            VerdictStatus::Inconclusive,
            format!("{sc} holds but the relators are not eligible"),
        ),
        (None, _) => (VerdictStatus::Inconclusive, "neither C(6) nor C(4)-T(4)".to_string()),
    };
    let mut v = CollapsingVerdict::new(status, provenance);
    v.notes = notes;
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex2::presentation_complex;
    use crate::words::parse_presentation;

    fn pr(s: &str) -> Presentation {
        parse_presentation(s).unwrap()
    }

    #[test]
    fn piece_lengths() {
        assert_eq!(pieces(&pr("<a,b | [a,b]>")).unwrap().max_piece_length(), 1);
        assert_eq!(pieces(&pr("<a | a^3>")).unwrap().max_piece_length(), 2);
        let free = pieces(&pr("<a,b | >")).unwrap();
        assert!(free.pieces.is_empty());
        assert!(pieces(&pr("<a | a a a^-1>")).is_err());
    }

    #[test]
    fn decompositions() {
        let t = pr("<a,b | [a,b]>");
        let idx = pieces(&t).unwrap();
        assert_eq!(min_piece_decomposition(0, &idx), Some(4));
        let c = pr("<a | a^3>");
        assert_eq!(min_piece_decomposition(0, &pieces(&c).unwrap()), Some(2));
        let ab = pr("<a,b | ab>");
        assert_eq!(min_piece_decomposition(0, &pieces(&ab).unwrap()), None);
    }

    #[test]
    fn c_conditions() {
        let t = pr("<a,b | [a,b]>");
        assert!(check_c(&t, 4).unwrap());
        assert!(!check_c(&t, 5).unwrap());
        assert!(!check_c(&pr("<a | a^3>"), 3).unwrap());
        // a relator that is itself a piece of another
        assert!(!check_c(&pr("<a,b | ab, b>"), 2).unwrap());
    }

    #[test]
    fn t_conditions() {
        let t = pr("<a,b | [a,b]>");
        assert!(check_t(&t, 4).unwrap());
        assert!(!check_t(&t, 5).unwrap());
        assert!(check_t(&pr("<a,b | >"), 10).unwrap());
        assert_eq!(star_graph(&t).arcs.len(), 4);
    }

    #[test]
    fn staggered() {
        assert!(is_staggered(&pr("<a,b | [a,b]>")));
        assert!(is_staggered(&pr("<a,b,c | ab, bc>")));
        assert!(!is_staggered(&pr("<a,b | ab, ab^-1>")));
        assert!(!is_staggered(&pr("<a,b | ab, b>")));
    }

    #[test]
    fn curvature() {
        let t = presentation_complex(&pr("<a,b | [a,b]>"));
        let (params, v) = curvature_condition(&t).unwrap();
        assert_eq!(params, CurvatureParams { p: Some(4), q: Some(4) });
        assert_eq!(v, CurvatureVerdict::Negative);
        assert!(curvature_condition(&presentation_complex(&pr("<a | a a a^-1>"))).is_err());
    }

    #[test]
    fn curvature_arithmetic() {
        // 2/p + 1/q with p = 4 and q = 2 is exactly 1
        let mut c = TwoComplex::new(2);
        let e0 = c.add_edge(0, 1, None);
        let e1 = c.add_edge(0, 1, None);
        let e2 = c.add_edge(0, 1, None);
        let e3 = c.add_edge(0, 1, None);
        use crate::complex2::dart_of;
        for (x, y) in [(e0, e1), (e1, e2), (e2, e3), (e3, e0)] {
            c.add_face(vec![dart_of(x, true), dart_of(y, false)], None).unwrap();
        }
        let (params, v) = curvature_condition(&c).unwrap();
        assert_eq!(params, CurvatureParams { p: Some(4), q: Some(2) });
        assert_eq!(v, CurvatureVerdict::Nonpositive);
    }

    #[test]
    fn three_collapsing_rule() {
        assert_eq!(certify_3_collapsing(&pr("<a,b | [a,b]>")).status, VerdictStatus::Certified);
        assert_eq!(certify_3_collapsing(&pr("<a | a^3>")).status, VerdictStatus::Inconclusive);
        assert_eq!(certify_3_collapsing(&pr("<a,b | ab>")).status, VerdictStatus::Certified);
        assert_eq!(certify_3_collapsing(&pr("<a,b | ab, b>")).status, VerdictStatus::Inconclusive);
        assert_eq!(certify_3_collapsing(&pr("<a | a a a^-1>")).status, VerdictStatus::Inconclusive);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn reduced_pres() -> impl Strategy<Value = Presentation> {
            prop::collection::vec(prop::collection::vec((0usize..2, any::<bool>()), 1..7), 1..3).prop_map(|rels| {
                let rels = rels
                    .into_iter()
                    .map(|r| {
                        let w = Word(r.into_iter().map(|(g, s)| if s { Letter::pos(g) } else { Letter::neg(g) }).collect());
                        crate::words::cyclically_reduce(&w).0.representative
                    })
                    .filter(|w| !w.is_empty())
                    .collect::<Vec<_>>();
                Presentation::new(&["a", "b"], rels)
            })
        }

        proptest! {
            #[test]
            fn monotone(p in reduced_pres()) {
                for k in 1..8 {
                    if check_c(&p, k + 1).unwrap() {
                        prop_assert!(check_c(&p, k).unwrap());
                    }
                    if check_t(&p, k + 1).unwrap() {
                        prop_assert!(check_t(&p, k).unwrap());
                    }
                }
                prop_assert_eq!(star_graph(&p).arcs.len(), p.total_relator_length());
            }

            #[test]
            fn pieces_closed_under_subwords(p in reduced_pres()) {
                let idx = pieces(&p).unwrap();
                for (&l, ws) in &idx.pieces {
                    if l < 2 { continue; }
                    for w in ws {
                        let pre = Word(w.0[..l - 1].to_vec());
                        let suf = Word(w.0[1..].to_vec());
                        prop_assert!(idx.pieces[&(l - 1)].contains(&pre));
                        prop_assert!(idx.pieces[&(l - 1)].contains(&suf));
                    }
                }
            }
        }
    }
}
