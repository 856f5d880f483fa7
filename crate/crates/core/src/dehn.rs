//! Dehn's algorithm over branched presentations, relator orders, and two
//! independent oracles: abelianization and bounded diagram search.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagram::{apply_move, diagram_from_moves, DiskDiagram, WordMove};
use crate::smallcancel::{placement_word, Placement};
use crate::snf::smith_normal_form;
use crate::words::{BranchedPresentation, CyclicWord, Presentation, Word};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DehnError {
    #[error("presentation is not eligible for Dehn's algorithm (base not certified, an exponent below 2, or a base relator that is a proper power or not immersed); pass --unsafe to run anyway")]
    NotEligible,
    #[error("relator index {0} out of range")]
    NoSuchRelator(usize),
}

#[derive(Default, Clone, Debug)]
struct TrieNode {
    children: BTreeMap<usize, usize>,
    /// Placements whose reading passes through this node and for which the
    /// prefix read so far exceeds half the relator.
    long: Vec<Placement>,
}

/// Every rotation of every relator and its inverse, in a trie keyed by
/// letters.
#[derive(Clone, Debug)]
pub struct RelatorBank {
    nodes: Vec<TrieNode>,
    lengths: Vec<usize>,
}

impl RelatorBank {
    pub fn new(p: &Presentation) -> Self {
        let mut nodes = vec![TrieNode::default()];
        let lengths: Vec<usize> = p.relators.iter().map(CyclicWord::len).collect();
        for (relator, &len) in lengths.iter().enumerate() {
            for inverted in [false, true] {
                for offset in 0..len {
                    let pl = Placement { relator, inverted, offset };
                    let mut cur = 0;
                    for (depth, l) in placement_word(p, pl, len).0.iter().enumerate() {
                        let next = match nodes[cur].children.get(&l.index()) {
                            Some(&n) => n,
                            None => {
                                nodes.push(TrieNode::default());
                                let n = nodes.len() - 1;
                                nodes[cur].children.insert(l.index(), n);
                                n
                            }
                        };
                        cur = next;
                        if 2 * (depth + 1) > len && !nodes[cur].long.contains(&pl) {
                            nodes[cur].long.push(pl);
                        }
                    }
                }
            }
        }
        for n in nodes.iter_mut() {
            n.long.sort();
        }
        RelatorBank { nodes, lengths }
    }

    /// Half-length thresholds `floor(|R| / 2)`; a match must be longer.
    pub fn thresholds(&self) -> Vec<usize> {
        self.lengths.iter().map(|l| l / 2).collect()
    }

    /// All `(|Q|, placement)` with `Q` starting at `pos` and longer than half
    /// its relator.
    fn matches_at(&self, w: &Word, pos: usize) -> Vec<(usize, Placement)> {
        let mut out = Vec::new();
        let mut cur = 0;
        for (i, l) in w.0[pos..].iter().enumerate() {
            let Some(&next) = self.nodes[cur].children.get(&l.index()) else { break };
            cur = next;
            out.extend(self.nodes[cur].long.iter().map(|&pl| (i + 1, pl)));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum DehnStep {
    Rewrite { pos: usize, placement: Placement, q: Word, s_inv: Word },
    FreeReduction { pos: usize },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DehnTrace {
    pub steps: Vec<DehnStep>,
    /// Set when the run was forced on an ineligible presentation.
    pub heuristic: bool,
}

impl DehnTrace {
    pub fn rewrites(&self) -> usize {
        self.steps.iter().filter(|s| matches!(s, DehnStep::Rewrite { .. })).count()
    }

    /// Apply the steps to `w`; `None` if a step does not fit.
    pub fn replay(&self, w: &Word) -> Option<Word> {
        let mut cur = w.0.clone();
        for s in &self.steps {
            match s {
                DehnStep::Rewrite { pos, q, s_inv, .. } => {
                    if cur.get(*pos..*pos + q.len())? != q.0.as_slice() {
                        return None;
                    }
                    cur.splice(*pos..*pos + q.len(), s_inv.0.iter().copied());
                }
                DehnStep::FreeReduction { pos } => {
                    let (x, y) = (*cur.get(*pos)?, *cur.get(pos + 1)?);
                    if !x.is_inverse_of(y) {
                        return None;
                    }
                    cur.drain(*pos..*pos + 2);
                }
            }
        }
        Some(Word(cur))
    }
}

#[derive(Clone, Copy, Debug)]
pub enum TieBreak {
    /// Leftmost match, then longest `Q`, then lowest relator index.
    Leftmost,
    /// Uniformly random among all matches.
    Random(u64),
}

#[derive(Clone, Debug)]
pub struct DehnSolver {
    presentation: Presentation,
    bank: RelatorBank,
    exponents: Vec<usize>,
    roots: Vec<Word>,
    heuristic: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderReport {
    pub relator: usize,
    pub expected: usize,
    /// Least `m` with `w^m` trivial, searched up to the expected order.
    pub order: Option<usize>,
    pub violation: bool,
}

impl DehnSolver {
    pub fn new(b: &BranchedPresentation) -> Result<Self, DehnError> {
        if !b.dehn_eligible {
            return Err(DehnError::NotEligible);
        }
        Ok(Self::build(b, false))
    }

    /// Run regardless of eligibility; every trace is marked heuristic.
    pub fn new_unchecked(b: &BranchedPresentation) -> Self {
        Self::build(b, !b.dehn_eligible)
    }

    fn build(b: &BranchedPresentation, heuristic: bool) -> Self {
        let presentation = b.presentation();
        DehnSolver {
            bank: RelatorBank::new(&presentation),
            presentation,
            exponents: b.exponents.clone(),
            roots: b.base.relators.iter().map(|r| r.representative.clone()).collect(),
            heuristic,
        }
    }

    pub fn is_heuristic(&self) -> bool {
        self.heuristic
    }

    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    pub fn reduce(&self, w: &Word) -> (Word, DehnTrace) {
        self.reduce_with(w, TieBreak::Leftmost)
    }

    pub fn reduce_with(&self, w: &Word, tie: TieBreak) -> (Word, DehnTrace) {
        let mut rng = match tie {
            TieBreak::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
            TieBreak::Leftmost => None,
        };
        let mut trace = DehnTrace { steps: Vec::new(), heuristic: self.heuristic };
        let mut cur = w.0.clone();
        free_reduce_traced(&mut cur, 0, &mut trace);
        loop {
            let word = Word(cur.clone());
            let pick = match rng.as_mut() {
                None => (0..cur.len()).find_map(|pos| {
                    let ms = self.bank.matches_at(&word, pos);
                    // longest Q, then lowest relator, orientation and offset
                    let best_len = ms.iter().map(|m| m.0).max()?;
                    ms.into_iter().filter(|m| m.0 == best_len).min_by_key(|m| m.1).map(|m| (pos, m))
                }),
                Some(r) => {
                    let all: Vec<(usize, (usize, Placement))> = (0..cur.len())
                        .flat_map(|pos| self.bank.matches_at(&word, pos).into_iter().map(move |m| (pos, m)))
                        .collect();
                    all.choose(r).copied()
                }
            };
            let Some((pos, (qlen, placement))) = pick else { break };
            let total = self.presentation.relators[placement.relator].len();
            let pw = placement_word(&self.presentation, placement, total);
            let q = Word(pw.0[..qlen].to_vec());
            let s_inv = Word(pw.0[qlen..].to_vec()).inverse();
            cur.splice(pos..pos + qlen, s_inv.0.iter().copied());
            trace.steps.push(DehnStep::Rewrite { pos, placement, q, s_inv });
            free_reduce_traced(&mut cur, pos.saturating_sub(1), &mut trace);
        }
        (Word(cur), trace)
    }

    pub fn is_trivial(&self, w: &Word) -> bool {
        self.reduce(w).0.is_empty()
    }

    /// Order-preserving parallel batch.
    pub fn solve_batch(&self, words: &[Word]) -> Vec<bool> {
        words.par_iter().map(|w| self.is_trivial(w)).collect()
    }

    pub fn order_of_relator(&self, i: usize) -> Result<OrderReport, DehnError> {
        let root = self.roots.get(i).ok_or(DehnError::NoSuchRelator(i))?;
        let expected = self.exponents[i];
        let order = (1..=expected).find(|&m| self.is_trivial(&root.repeat(m)));
        Ok(OrderReport { relator: i, expected, order, violation: order != Some(expected) })
    }

    pub fn orders(&self) -> Vec<OrderReport> {
        (0..self.roots.len()).map(|i| self.order_of_relator(i).expect("index in range")).collect()
    }
}

/// Free reduction starting the scan at `from`, recording each cancelled
/// pair.
fn free_reduce_traced(cur: &mut Vec<crate::words::Letter>, from: usize, trace: &mut DehnTrace) {
    let mut i = from;
    while i + 1 < cur.len() {
        if cur[i].is_inverse_of(cur[i + 1]) {
            cur.drain(i..i + 2);
            trace.steps.push(DehnStep::FreeReduction { pos: i });
            i = i.saturating_sub(1);
        } else {
            i += 1;
        }
    }
}

pub fn dehn_reduce(w: &Word, b: &BranchedPresentation) -> Result<(Word, DehnTrace), DehnError> {
    Ok(DehnSolver::new(b)?.reduce(w))
}

pub fn is_trivial(w: &Word, b: &BranchedPresentation) -> Result<bool, DehnError> {
    Ok(DehnSolver::new(b)?.is_trivial(w))
}

pub fn order_of_relator(i: usize, b: &BranchedPresentation) -> Result<OrderReport, DehnError> {
    DehnSolver::new(b)?.order_of_relator(i)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbelianVerdict {
    Nontrivial,
    Inconclusive,
}

/// Nontrivial when the exponent-sum vector lies outside the relator lattice.
pub fn abelianization_test(w: &Word, p: &Presentation) -> AbelianVerdict {
    let k = p.rank();
    let rows: Vec<Vec<i64>> = p.relators.iter().map(|r| r.representative.exponent_vector(k)).collect();
    let snf = smith_normal_form(&rows, k);
    if snf.in_row_lattice(&w.exponent_vector(k)) {
        AbelianVerdict::Inconclusive
    } else {
        AbelianVerdict::Nontrivial
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum BoundedVerdict {
    Trivial { diagram: DiskDiagram, moves: Vec<WordMove> },
    Unknown,
}

/// Cancel inverse pairs, including across the seam, recording the moves.
fn cyclic_reduce_moves(w: &Word, moves: &mut Vec<WordMove>) -> Word {
    let mut cur = w.clone();
    loop {
        if let Some(i) = (0..cur.len().saturating_sub(1)).find(|&i| cur.0[i].is_inverse_of(cur.0[i + 1])) {
            moves.push(WordMove::Cancel { pos: i });
            cur = apply_cancel(&cur, i);
        } else if cur.len() >= 2 && cur.0[0].is_inverse_of(cur.0[cur.len() - 1]) {
            moves.push(WordMove::Rotate { by: 1 });
            cur = cur.rotate(1);
        } else {
            return cur;
        }
    }
}

fn apply_cancel(w: &Word, i: usize) -> Word {
    let mut v = w.0.clone();
    v.drain(i..i + 2);
    Word(v)
}

struct BoundedSearch<'a> {
    p: &'a Presentation,
    placements: Vec<(Placement, Word)>,
    max_len: usize,
    max_rel: usize,
    failed: HashMap<Word, usize>,
}

impl BoundedSearch<'_> {
    /// Moves reducing the cyclically reduced `w` to the empty word using at
    /// most `budget` relator moves.
    fn solve(&mut self, w: &Word, budget: usize) -> Option<Vec<WordMove>> {
        if w.is_empty() {
            return Some(Vec::new());
        }
        if budget == 0 || w.len() > budget * self.max_rel || w.len() > self.max_len {
            return None;
        }
        let key = CyclicWord::new(w.clone()).min_rotation();
        if self.failed.get(&key).is_some_and(|&b| b >= budget) {
            return None;
        }
        let n = w.len();
        for r in 0..n {
            let rw = w.rotate(r);
            for pi in 0..self.placements.len() {
                let (pl, pw) = self.placements[pi].clone();
                let common = rw.0.iter().zip(&pw.0).take_while(|(x, y)| x == y).count();
                for qlen in (1..=common).rev() {
                    let mv = WordMove::Relator { placement: pl, len: qlen };
                    let next = apply_move(self.p, &rw, &mv);
                    let mut tail = Vec::new();
                    let reduced = cyclic_reduce_moves(&next, &mut tail);
                    if let Some(rest) = self.solve(&reduced, budget - 1) {
                        let mut moves = Vec::with_capacity(rest.len() + tail.len() + 2);
                        if r > 0 {
                            moves.push(WordMove::Rotate { by: r });
                        }
                        moves.push(mv);
                        moves.extend(tail);
                        moves.extend(rest);
                        return Some(moves);
                    }
                }
            }
        }
        let entry = self.failed.entry(key).or_insert(0);
        *entry = (*entry).max(budget);
        None
    }
}

/// Search for a disk diagram with boundary `w` and at most `max_area`
/// faces, exploring words of length at most `max_len`. Only triviality can
/// be certified.
pub fn bounded_oracle_trivial(w: &Word, p: &Presentation, max_area: usize, max_len: usize) -> BoundedVerdict {
    let mut moves = Vec::new();
    let start = cyclic_reduce_moves(w, &mut moves);
    let placements = p
        .relators
        .iter()
        .enumerate()
        .flat_map(|(relator, r)| {
            let len = r.len();
            [false, true].into_iter().flat_map(move |inverted| (0..len).map(move |offset| Placement { relator, inverted, offset }))
        })
        .map(|pl| (pl, placement_word(p, pl, p.relators[pl.relator].len())))
        .collect();
    let mut search = BoundedSearch {
        p,
        placements,
        max_len: max_len.max(start.len()),
        max_rel: p.max_relator_length().max(1),
        failed: HashMap::new(),
    };
    match search.solve(&start, max_area) {
        Some(rest) => {
            moves.extend(rest);
            let diagram = diagram_from_moves(p, w, &moves).expect("derivation replays");
            BoundedVerdict::Trivial { diagram, moves }
        }
        None => BoundedVerdict::Unknown,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::classify_cells;
    use crate::words::{branch, parse_presentation, Letter};

    fn branched(text: &str, exps: &[usize]) -> BranchedPresentation {
        branch(&parse_presentation(text).unwrap(), exps).unwrap().with_certification(true)
    }

    fn word(b: &BranchedPresentation, s: &str) -> Word {
        b.base.parse_word(s).unwrap()
    }

    #[test]
    fn reduce_examples() {
        let b = branched("<a,b | [a,b]>", &[2]);
        let (out, trace) = dehn_reduce(&word(&b, "[a,b]^2"), &b).unwrap();
        assert!(out.is_empty());
        assert_eq!(trace.replay(&word(&b, "[a,b]^2")), Some(out));
        let c = word(&b, "[a,b]");
        assert_eq!(dehn_reduce(&c, &b).unwrap().0, c);
        assert!(dehn_reduce(&Word::empty(), &b).unwrap().0.is_empty());
    }

    #[test]
    fn cyclic_group_examples() {
        let b = branched("<a | a>", &[3]);
        let (out, _) = dehn_reduce(&word(&b, "a^5"), &b).unwrap();
        assert_eq!(out, Word(vec![Letter::neg(0)]));
        assert!(is_trivial(&word(&b, "a^6"), &b).unwrap());
        assert_eq!(order_of_relator(0, &b).unwrap().order, Some(3));
    }

    #[test]
    fn gating() {
        let b = branch(&parse_presentation("<a,b | [a,b]>").unwrap(), &[1]).unwrap().with_certification(true);
        assert_eq!(dehn_reduce(&Word::empty(), &b).unwrap_err(), DehnError::NotEligible);
        let s = DehnSolver::new_unchecked(&b);
        assert!(s.is_heuristic());
        assert!(s.reduce(&Word::empty()).1.heuristic);
        let uncertified = branch(&parse_presentation("<a,b | [a,b]>").unwrap(), &[2]).unwrap();
        assert!(DehnSolver::new(&uncertified).is_err());
    }

    #[test]
    fn orders_up_to_four() {
        for n in 2..=4 {
            let b = branched("<a,b | [a,b]>", &[n]);
            let r = order_of_relator(0, &b).unwrap();
            assert_eq!(r.order, Some(n));
            assert!(!r.violation);
        }
    }

    #[test]
    fn abelian_examples() {
        let p = parse_presentation("<a,b | [a,b]^2>").unwrap();
        assert_eq!(abelianization_test(&p.parse_word("a").unwrap(), &p), AbelianVerdict::Nontrivial);
        assert_eq!(abelianization_test(&p.parse_word("[a,b]").unwrap(), &p), AbelianVerdict::Inconclusive);
        let c = parse_presentation("<a | a^3>").unwrap();
        assert_eq!(abelianization_test(&c.parse_word("a").unwrap(), &c), AbelianVerdict::Nontrivial);
    }

    #[test]
    fn bounded_examples() {
        let p = parse_presentation("<a,b | [a,b]^2>").unwrap();
        let w = p.parse_word("[a,b]^2").unwrap();
        let BoundedVerdict::Trivial { diagram, .. } = bounded_oracle_trivial(&w, &p, 1, 16) else { panic!() };
        assert_eq!(diagram.area(), 1);
        assert_eq!(bounded_oracle_trivial(&p.parse_word("a").unwrap(), &p, 3, 24), BoundedVerdict::Unknown);
        let c = parse_presentation("<a | a^3>").unwrap();
        let BoundedVerdict::Trivial { diagram, .. } = bounded_oracle_trivial(&c.parse_word("a^6").unwrap(), &c, 2, 12) else {
            panic!()
        };
        assert_eq!(diagram.area(), 2);
        assert!(diagram.validate());
        assert_eq!(diagram.num_vertices, 5);
        assert_eq!(classify_cells(&diagram).shells, 2);
    }

    #[test]
    fn bounded_handles_conjugates() {
        let p = parse_presentation("<a,b | [a,b]>").unwrap();
        let w = p.parse_word("b a b a^-1 b^-1 a^-1 b^-1 a").unwrap();
        let BoundedVerdict::Trivial { diagram, moves } = bounded_oracle_trivial(&w, &p, 2, 16) else { panic!() };
        assert!(diagram.validate());
        assert_eq!(diagram.boundary_word(), w);
        assert!(moves.iter().filter(|m| matches!(m, WordMove::Relator { .. })).count() <= 2);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_word(rank: usize, max: usize) -> impl Strategy<Value = Word> {
            prop::collection::vec((0..rank, any::<bool>()), 0..max)
                .prop_map(|v| Word(v.into_iter().map(|(g, s)| if s { Letter::pos(g) } else { Letter::neg(g) }).collect()))
        }

        proptest! {
            #[test]
            fn trace_replays_and_shrinks(w in arb_word(2, 24)) {
                let b = branched("<a,b | [a,b]>", &[2]);
                let (out, trace) = dehn_reduce(&w, &b).unwrap();
                prop_assert!(out.len() <= w.len());
                prop_assert!(out.is_freely_reduced());
                prop_assert_eq!(trace.replay(&w), Some(out));
                let mut len = w.len();
                let mut cur = w.clone();
                for s in &trace.steps {
                    let t = DehnTrace { steps: vec![s.clone()], heuristic: false };
                    cur = t.replay(&cur).unwrap();
                    prop_assert!(cur.len() < len);
                    len = cur.len();
                }
            }

            #[test]
            fn tie_break_does_not_change_verdict(w in arb_word(2, 20), seed in any::<u64>()) {
                let b = branched("<a,b | [a,b]>", &[3]);
                let s = DehnSolver::new(&b).unwrap();
                prop_assert_eq!(s.is_trivial(&w), s.reduce_with(&w, TieBreak::Random(seed)).0.is_empty());
            }

            #[test]
            fn products_of_conjugates_are_trivial(
                parts in prop::collection::vec((arb_word(2, 4), any::<bool>()), 0..3)
            ) {
                let b = branched("<a,b | [a,b]>", &[2]);
                let r = b.relators[0].clone();
                let w = parts.iter().fold(Word::empty(), |acc, (c, inv)| {
                    let rel = if *inv { r.inverse() } else { r.clone() };
                    acc.concat(&c.concat(&rel).concat(&c.inverse()))
                });
                prop_assert!(is_trivial(&w, &b).unwrap());
            }

            #[test]
            fn rewrites_respect_area_bound(parts in prop::collection::vec(any::<bool>(), 1..4)) {
                let b = branched("<a,b | [a,b]>", &[2]);
                let w = parts.iter().fold(Word::empty(), |acc, inv| {
                    acc.concat(&if *inv { b.relators[0].inverse() } else { b.relators[0].clone() })
                });
                let w = crate::words::free_reduce(&w);
                let (out, trace) = dehn_reduce(&w, &b).unwrap();
                prop_assert!(out.is_empty());
                if !w.is_empty() {
                    prop_assert!(trace.rewrites() as i64 <= w.len() as i64 + 1 - 8);
                }
            }
        }
    }
}
