//! Free-group words, cyclic words, presentations and the branched construction.
//!
//! Relators are kept exactly as written. Whether a relator is freely or
//! cyclically reduced is recorded as a flag so that presentations such as the
//! dunce cap `<a | a a a^-1>` stay representable.

use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("unknown generator symbol `{0}`")]
    UnknownGenerator(String),
    #[error("empty relator at position {0}")]
    EmptyRelator(usize),
    #[error("malformed presentation: {0}")]
    Syntax(String),
    #[error("duplicate generator name `{0}`")]
    DuplicateGenerator(String),
    #[error("exponent must be at least 1")]
    ZeroExponent,
    #[error("word is not cyclically reduced")]
    NotCyclicallyReduced,
    #[error("expected {expected} exponents, got {got}")]
    ExponentCount { expected: usize, got: usize },
    #[error("relator {0} is not immersed (not cyclically reduced) but is raised to a power")]
    NotImmersed(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Generator {
    pub id: usize,
    pub name: String,
}

/// A generator occurrence with sign `+1` or `-1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub generator: usize,
    pub sign: i8,
}

impl Letter {
    pub fn pos(generator: usize) -> Self {
        Letter { generator, sign: 1 }
    }

    pub fn neg(generator: usize) -> Self {
        Letter { generator, sign: -1 }
    }

    pub fn inverse(self) -> Self {
        Letter { generator: self.generator, sign: -self.sign }
    }

    pub fn is_inverse_of(self, other: Letter) -> bool {
        self.generator == other.generator && self.sign == -other.sign
    }

    /// Dense index `2*generator + (sign < 0)`; orders `a, A, b, B, ...`.
    pub fn index(self) -> usize {
        2 * self.generator + usize::from(self.sign < 0)
    }

    pub fn from_index(i: usize) -> Self {
        Letter { generator: i / 2, sign: if i.is_multiple_of(2) { 1 } else { -1 } }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn repeat(&self, n: usize) -> Word {
        Word(self.0.repeat(n))
    }

    /// Cyclic rotation starting at `k` (mod length).
    pub fn rotate(&self, k: usize) -> Word {
        if self.0.is_empty() {
            return self.clone();
        }
        let k = k % self.0.len();
        let mut v = self.0[k..].to_vec();
        v.extend_from_slice(&self.0[..k]);
        Word(v)
    }

    pub fn is_freely_reduced(&self) -> bool {
        self.0.windows(2).all(|w| !w[0].is_inverse_of(w[1]))
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        self.is_freely_reduced()
            && match (self.0.first(), self.0.last()) {
                (Some(f), Some(l)) if self.0.len() > 1 => !f.is_inverse_of(*l),
                _ => true,
            }
    }

    /// Signed exponent sum per generator.
    pub fn exponent_vector(&self, rank: usize) -> Vec<i64> {
        let mut v = vec![0i64; rank];
        for l in &self.0 {
            if l.generator < rank {
                v[l.generator] += i64::from(l.sign);
            }
        }
        v
    }

    pub fn display_with(&self, gens: &[Generator]) -> String {
        if self.0.is_empty() {
            return "1".to_string();
        }
        self.0
            .iter()
            .map(|l| {
                let name = gens.get(l.generator).map(|g| g.name.as_str()).unwrap_or("?");
                if l.sign > 0 {
                    name.to_string()
                } else {
                    format!("{name}^-1")
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Compact form using upper case for inverses; only faithful for
    /// single-character lower-case generator names.
    pub fn compact_with(&self, gens: &[Generator]) -> String {
        if self.0.is_empty() {
            return "1".to_string();
        }
        self.0
            .iter()
            .map(|l| {
                let name = gens.get(l.generator).map(|g| g.name.as_str()).unwrap_or("?");
                if l.sign > 0 {
                    name.to_string()
                } else if name.chars().all(|c| c.is_ascii_lowercase()) {
                    name.to_ascii_uppercase()
                } else {
                    format!("{name}^-1")
                }
            })
            .collect()
    }
}

impl From<Vec<Letter>> for Word {
    fn from(v: Vec<Letter>) -> Self {
        Word(v)
    }
}

/// Free reduction: cancel adjacent inverse pairs until none remain.
pub fn free_reduce(w: &Word) -> Word {
    let mut out: Vec<Letter> = Vec::with_capacity(w.len());
    for &l in &w.0 {
        match out.last() {
            Some(&top) if top.is_inverse_of(l) => {
                out.pop();
            }
            _ => out.push(l),
        }
    }
    Word(out)
}

/// Returns `(r, c)` with `r` cyclically reduced and `w = c r c^-1` freely.
pub fn cyclically_reduce(w: &Word) -> (CyclicWord, Word) {
    let reduced = free_reduce(w);
    let letters = &reduced.0;
    let mut i = 0;
    let mut j = letters.len();
    while j >= i + 2 && letters[i].is_inverse_of(letters[j - 1]) {
        i += 1;
        j -= 1;
    }
    let core = Word(letters[i..j].to_vec());
    let conj = Word(letters[..i].to_vec());
    (CyclicWord::new(core), conj)
}

/// A word considered up to cyclic rotation.
///
/// Equality and hashing ignore the starting point but not orientation;
/// see [`CyclicWord::equal_up_to_inversion`] for the weaker relation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CyclicWord {
    pub representative: Word,
    pub freely_reduced: bool,
    pub cyclically_reduced: bool,
}

impl CyclicWord {
    pub fn new(w: Word) -> Self {
        CyclicWord {
            freely_reduced: w.is_freely_reduced(),
            cyclically_reduced: w.is_cyclically_reduced(),
            representative: w,
        }
    }

    pub fn len(&self) -> usize {
        self.representative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.representative.is_empty()
    }

    pub fn word(&self) -> &Word {
        &self.representative
    }

    pub fn inverse(&self) -> CyclicWord {
        CyclicWord::new(self.representative.inverse())
    }

    /// Lexicographically least rotation.
    pub fn min_rotation(&self) -> Word {
        let n = self.len();
        (0..n.max(1))
            .map(|k| self.representative.rotate(k))
            .min()
            .unwrap_or_default()
    }

    pub fn equal_up_to_inversion(&self, other: &CyclicWord) -> bool {
        self == other || *self == other.inverse()
    }
}

impl PartialEq for CyclicWord {
    fn eq(&self, other: &Self) -> bool {
        let n = self.len();
        if n != other.len() {
            return false;
        }
        if n == 0 {
            return true;
        }
        (0..n).any(|k| {
            (0..n).all(|i| self.representative.0[(i + k) % n] == other.representative.0[i])
        })
    }
}

impl Eq for CyclicWord {}

impl Hash for CyclicWord {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.min_rotation().hash(state);
    }
}

/// `w^n` as a linear word.
pub fn power(w: &CyclicWord, n: usize) -> Result<Word, WordError> {
    if n == 0 {
        return Err(WordError::ZeroExponent);
    }
    if !w.cyclically_reduced {
        return Err(WordError::NotCyclicallyReduced);
    }
    Ok(w.representative.repeat(n))
}

/// Returns `(root, k)` with `w = root^k`, `k` maximal and `k > 1`.
pub fn is_proper_power(w: &CyclicWord) -> Option<(Word, usize)> {
    let n = w.len();
    if n < 2 {
        return None;
    }
    let letters = &w.representative.0;
    for period in 1..n {
        if !n.is_multiple_of(period) {
            continue;
        }
        if (period..n).all(|i| letters[i] == letters[i - period]) {
            return Some((Word(letters[..period].to_vec()), n / period));
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Presentation {
    pub generators: Vec<Generator>,
    pub relators: Vec<CyclicWord>,
}

impl Presentation {
    pub fn new(names: &[&str], relators: Vec<Word>) -> Self {
        Presentation {
            generators: names
                .iter()
                .enumerate()
                .map(|(id, n)| Generator { id, name: n.to_string() })
                .collect(),
            relators: relators.into_iter().map(CyclicWord::new).collect(),
        }
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    /// Whether relator `i` has an immersed (cyclically reduced) attaching map.
    pub fn immersed(&self, i: usize) -> bool {
        self.relators[i].cyclically_reduced
    }

    pub fn total_relator_length(&self) -> usize {
        self.relators.iter().map(CyclicWord::len).sum()
    }

    pub fn max_relator_length(&self) -> usize {
        self.relators.iter().map(CyclicWord::len).max().unwrap_or(0)
    }

    /// Parse a word over this presentation's generators.
    pub fn parse_word(&self, text: &str) -> Result<Word, WordError> {
        let mut p = Parser::new(text, Some(&self.generators));
        let w = p.relator()?;
        p.skip_ws();
        if p.pos < p.src.len() {
            return Err(WordError::Syntax(format!("trailing input at byte {}", p.pos)));
        }
        Ok(w)
    }

    pub fn word_to_string(&self, w: &Word) -> String {
        w.display_with(&self.generators)
    }
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: Vec<&str> = self.generators.iter().map(|g| g.name.as_str()).collect();
        let rels: Vec<String> = self
            .relators
            .iter()
            .map(|r| r.representative.display_with(&self.generators))
            .collect();
        write!(f, "<{} | {}>", gens.join(", "), rels.join(", "))
    }
}

/// A presentation whose relators are raised to powers `w_i^{n_i}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchedPresentation {
    pub base: Presentation,
    pub exponents: Vec<usize>,
    pub relators: Vec<Word>,
    /// Set once the base presentation has been certified bicollapsible.
    pub base_certified: bool,
    pub dehn_eligible: bool,
}

impl BranchedPresentation {
    /// The presentation `<gens | w_i^{n_i}>`.
    pub fn presentation(&self) -> Presentation {
        Presentation {
            generators: self.base.generators.clone(),
            relators: self.relators.iter().cloned().map(CyclicWord::new).collect(),
        }
    }

    /// Record the outcome of certifying the base presentation.
    pub fn with_certification(mut self, certified: bool) -> Self {
        self.base_certified = certified;
        self.dehn_eligible = self.compute_eligibility();
        self
    }

    fn compute_eligibility(&self) -> bool {
        self.base_certified
            && self.exponents.iter().all(|&n| n >= 2)
            && self
                .base
                .relators
                .iter()
                .all(|r| r.cyclically_reduced && !r.is_empty() && is_proper_power(r).is_none())
    }

    /// Recover the branched structure from a presentation whose relators are
    /// written as powers: each relator is split into its primitive root and
    /// maximal exponent.
    pub fn from_powers(p: &Presentation) -> Result<Self, WordError> {
        let mut roots = Vec::with_capacity(p.relators.len());
        let mut exps = Vec::with_capacity(p.relators.len());
        for r in &p.relators {
            let (root, n) = if r.cyclically_reduced {
                is_proper_power(r).unwrap_or_else(|| (r.representative.clone(), 1))
            } else {
                (r.representative.clone(), 1)
            };
            roots.push(root);
            exps.push(n);
        }
        let base = Presentation {
            generators: p.generators.clone(),
            relators: roots.into_iter().map(CyclicWord::new).collect(),
        };
        branch(&base, &exps)
    }

    pub fn relator_length(&self, i: usize) -> usize {
        self.relators[i].len()
    }

    pub fn max_relator_length(&self) -> usize {
        self.relators.iter().map(Word::len).max().unwrap_or(0)
    }
}

/// Raise each base relator to its exponent. Certification is recorded
/// separately via [`BranchedPresentation::with_certification`].
pub fn branch(p: &Presentation, exponents: &[usize]) -> Result<BranchedPresentation, WordError> {
    if exponents.len() != p.relators.len() {
        return Err(WordError::ExponentCount { expected: p.relators.len(), got: exponents.len() });
    }
    if exponents.contains(&0) {
        return Err(WordError::ZeroExponent);
    }
    if exponents.iter().any(|&n| n > 1) {
        if let Some(i) = (0..p.relators.len()).find(|&i| !p.immersed(i)) {
            return Err(WordError::NotImmersed(i));
        }
    }
    let relators = p
        .relators
        .iter()
        .zip(exponents)
        .map(|(r, &n)| r.representative.repeat(n))
        .collect();
    let b = BranchedPresentation {
        base: p.clone(),
        exponents: exponents.to_vec(),
        relators,
        base_certified: false,
        dehn_eligible: false,
    };
    Ok(b)
}

// ---------------------------------------------------------------------------
// Parsing

/// Parse `< gens | relators >`.
///
/// Relators are comma separated; inside a relator whitespace is ignored,
/// `x^-1` or upper case `X` denotes an inverse, `[u,v]` is the commutator
/// `u v u^-1 v^-1`, parentheses group and `^k` raises to an integer power.
/// `#` starts a comment running to the end of the line.
pub fn parse_presentation(text: &str) -> Result<Presentation, WordError> {
    let cleaned = strip_comments(text);
    let mut p = Parser::new(&cleaned, None);
    p.expect('<')?;
    let mut generators: Vec<Generator> = Vec::new();
    loop {
        p.skip_ws();
        if p.peek() == Some('|') {
            break;
        }
        let name = p.identifier()?;
        if generators.iter().any(|g| g.name == name) {
            return Err(WordError::DuplicateGenerator(name));
        }
        generators.push(Generator { id: generators.len(), name });
        p.skip_ws();
        match p.peek() {
            Some(',') => p.pos += 1,
            Some('|') => break,
            other => return Err(WordError::Syntax(format!("expected `,` or `|`, found {other:?}"))),
        }
    }
    p.expect('|')?;
    p.gens = Some(generators.clone());
    let mut relators = Vec::new();
    p.skip_ws();
    if p.peek() != Some('>') {
        loop {
            let w = p.relator()?;
            if w.is_empty() {
                return Err(WordError::EmptyRelator(relators.len()));
            }
            relators.push(CyclicWord::new(w));
            p.skip_ws();
            match p.peek() {
                Some(',') => p.pos += 1,
                Some('>') => break,
                other => {
                    return Err(WordError::Syntax(format!("expected `,` or `>`, found {other:?}")))
                }
            }
        }
    }
    p.expect('>')?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(WordError::Syntax("trailing input after `>`".into()));
    }
    Ok(Presentation { generators, relators })
}

fn strip_comments(text: &str) -> String {
    text.lines()
        .map(|l| match l.find('#') {
            Some(i) => &l[..i],
            None => l,
        })
        .collect::<Vec<_>>()
        .join("\n")
}

struct Parser<'a> {
    src: Vec<char>,
    pos: usize,
    gens: Option<Vec<Generator>>,
    _marker: std::marker::PhantomData<&'a ()>,
}

impl<'a> Parser<'a> {
    fn new(text: &str, gens: Option<&'a [Generator]>) -> Self {
        Parser {
            src: text.chars().collect(),
            pos: 0,
            gens: gens.map(|g| g.to_vec()),
            _marker: std::marker::PhantomData,
        }
    }

    fn peek(&self) -> Option<char> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, c: char) -> Result<(), WordError> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(WordError::Syntax(format!("expected `{c}` at {}, found {:?}", self.pos, self.peek())))
        }
    }

    fn identifier(&mut self) -> Result<String, WordError> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(WordError::Syntax(format!("expected identifier at {}", self.pos)));
        }
        let s: String = self.src[start..self.pos].iter().collect();
        if s.chars().next().is_some_and(|c| c.is_ascii_digit()) {
            return Err(WordError::Syntax(format!("identifier `{s}` starts with a digit")));
        }
        Ok(s)
    }

    fn integer(&mut self) -> Result<i64, WordError> {
        self.skip_ws();
        let start = self.pos;
        if self.peek() == Some('-') {
            self.pos += 1;
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        let s: String = self.src[start..self.pos].iter().collect();
        s.parse().map_err(|_| WordError::Syntax(format!("bad exponent `{s}`")))
    }

    /// A relator: a sequence of factors up to `,` `]` `)` `>` or end.
    fn relator(&mut self) -> Result<Word, WordError> {
        let mut out = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                None | Some(',') | Some(']') | Some(')') | Some('>') => break,
                Some('[') => {
                    self.pos += 1;
                    let u = self.relator()?;
                    self.expect(',')?;
                    let v = self.relator()?;
                    self.expect(']')?;
                    let comm = u.concat(&v).concat(&u.inverse()).concat(&v.inverse());
                    let comm = self.maybe_power(comm)?;
                    out.extend(comm.0);
                }
                Some('(') => {
                    self.pos += 1;
                    let u = self.relator()?;
                    self.expect(')')?;
                    let u = self.maybe_power(u)?;
                    out.extend(u.0);
                }
                Some('1') => {
                    // explicit identity
                    self.pos += 1;
                }
                Some(c) if c.is_alphabetic() || c == '_' => {
                    let ident = self.identifier()?;
                    let mut letters = self.split_identifier(&ident)?;
                    let last = letters.pop().expect("identifier is nonempty");
                    out.extend(letters);
                    let w = self.maybe_power(Word(vec![last]))?;
                    out.extend(w.0);
                }
                Some(c) => return Err(WordError::Syntax(format!("unexpected `{c}` at {}", self.pos))),
            }
        }
        Ok(Word(out))
    }

    fn maybe_power(&mut self, w: Word) -> Result<Word, WordError> {
        self.skip_ws();
        if self.peek() != Some('^') {
            return Ok(w);
        }
        self.pos += 1;
        let k = self.integer()?;
        let base = if k < 0 { w.inverse() } else { w };
        Ok(base.repeat(k.unsigned_abs() as usize))
    }

    /// Split a run of identifier characters into generator letters by greedy
    /// longest match; an upper-cased generator name denotes its inverse.
    fn split_identifier(&self, ident: &str) -> Result<Vec<Letter>, WordError> {
        let gens = self
            .gens
            .as_ref()
            .ok_or_else(|| WordError::Syntax("generators not yet declared".into()))?;
        let chars: Vec<char> = ident.chars().collect();
        let mut out = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let mut best: Option<(usize, Letter)> = None;
            for g in gens {
                let name: Vec<char> = g.name.chars().collect();
                let upper: Vec<char> = g.name.to_uppercase().chars().collect();
                let upper_is_gen = gens.iter().any(|h| h.name == g.name.to_uppercase());
                if chars[i..].starts_with(&name) && best.is_none_or(|(l, _)| name.len() > l) {
                    best = Some((name.len(), Letter::pos(g.id)));
                }
                if upper != name
                    && !upper_is_gen
                    && chars[i..].starts_with(&upper)
                    && best.is_none_or(|(l, _)| upper.len() > l)
                {
                    best = Some((upper.len(), Letter::neg(g.id)));
                }
            }
            match best {
                Some((l, letter)) => {
                    out.push(letter);
                    i += l;
                }
                None => {
                    let rest: String = chars[i..].iter().collect();
                    return Err(WordError::UnknownGenerator(rest));
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(p: &Presentation, s: &str) -> Word {
        p.parse_word(s).unwrap()
    }

    #[test]
    fn parse_commutator() {
        let p = parse_presentation("<a,b | [a,b]>").unwrap();
        assert_eq!(p.rank(), 2);
        assert_eq!(p.relators.len(), 1);
        assert_eq!(p.relators[0].representative, w(&p, "abAB"));
        assert_eq!(p.relators[0].len(), 4);
    }

    #[test]
    fn parse_dunce_cap_keeps_unreduced_relator() {
        let p = parse_presentation("<a | a a a^-1>").unwrap();
        assert_eq!(p.relators[0].len(), 3);
        assert!(!p.relators[0].freely_reduced);
        assert!(!p.immersed(0));
    }

    #[test]
    fn parse_errors() {
        assert_eq!(parse_presentation("<a | b>"), Err(WordError::UnknownGenerator("b".into())));
        assert!(matches!(parse_presentation("<a | a, >"), Err(WordError::EmptyRelator(1))));
        assert!(matches!(parse_presentation("<a | a"), Err(WordError::Syntax(_))));
        assert!(matches!(parse_presentation("<a, a | a>"), Err(WordError::DuplicateGenerator(_))));
    }

    #[test]
    fn parse_free_and_comments() {
        let p = parse_presentation("# wedge\n<a, b | > # nothing").unwrap();
        assert!(p.relators.is_empty());
        let q = parse_presentation("<x1, x2 | x1 x2^-1 x1^2, [x1,x2]^2>").unwrap();
        assert_eq!(q.relators[0].len(), 4);
        assert_eq!(q.relators[1].len(), 8);
    }

    #[test]
    fn free_reduce_examples() {
        let p = parse_presentation("<a,b | a>").unwrap();
        assert_eq!(free_reduce(&w(&p, "aA")), Word::empty());
        assert_eq!(free_reduce(&w(&p, "aaA")), w(&p, "a"));
        assert_eq!(free_reduce(&w(&p, "abAB")), w(&p, "abAB"));
    }

    #[test]
    fn cyclic_reduce_examples() {
        let p = parse_presentation("<a,b | a>").unwrap();
        let (c, k) = cyclically_reduce(&w(&p, "Bab"));
        assert_eq!(c.representative, w(&p, "a"));
        assert_eq!(k, w(&p, "B"));
        let (c, k) = cyclically_reduce(&w(&p, "aabA"));
        assert_eq!(c.representative, w(&p, "ab"));
        assert_eq!(k, w(&p, "a"));
        let (c, k) = cyclically_reduce(&w(&p, "abAB"));
        assert_eq!(c.representative, w(&p, "abAB"));
        assert!(k.is_empty());
    }

    #[test]
    fn powers() {
        let p = parse_presentation("<a,b | [a,b]>").unwrap();
        assert_eq!(power(&p.relators[0], 2).unwrap().len(), 8);
        let a = CyclicWord::new(w(&p, "a"));
        assert_eq!(power(&a, 3).unwrap(), w(&p, "aaa"));
        assert_eq!(power(&CyclicWord::new(w(&p, "aA")), 2), Err(WordError::NotCyclicallyReduced));
        assert_eq!(power(&a, 0), Err(WordError::ZeroExponent));
    }

    #[test]
    fn proper_powers() {
        let p = parse_presentation("<a,b | a>").unwrap();
        assert_eq!(is_proper_power(&CyclicWord::new(w(&p, "aaa"))), Some((w(&p, "a"), 3)));
        assert_eq!(is_proper_power(&CyclicWord::new(w(&p, "abAB"))), None);
        assert_eq!(is_proper_power(&CyclicWord::new(w(&p, "abab"))), Some((w(&p, "ab"), 2)));
    }

    #[test]
    fn cyclic_equality_is_rotation_only() {
        let p = parse_presentation("<a,b | a>").unwrap();
        let x = CyclicWord::new(w(&p, "abAB"));
        let y = CyclicWord::new(w(&p, "ABab"));
        let z = CyclicWord::new(w(&p, "baBA"));
        assert_eq!(x, y);
        assert_ne!(x, z);
        assert!(x.equal_up_to_inversion(&z));
    }

    #[test]
    fn branching() {
        let p = parse_presentation("<a,b | [a,b]>").unwrap();
        let b = branch(&p, &[2]).unwrap();
        assert_eq!(b.relators[0], w(&p, "abABabAB"));
        assert!(!b.dehn_eligible);
        assert!(b.clone().with_certification(true).dehn_eligible);
        let q = parse_presentation("<a | a>").unwrap();
        assert_eq!(branch(&q, &[3]).unwrap().relators[0], w(&q, "aaa"));
        assert_eq!(branch(&q, &[0]), Err(WordError::ZeroExponent));
        let d = parse_presentation("<a | aaA>").unwrap();
        assert_eq!(branch(&d, &[2]), Err(WordError::NotImmersed(0)));
        assert!(branch(&d, &[1]).is_ok());
        let one = branch(&p, &[1]).unwrap().with_certification(true);
        assert!(!one.dehn_eligible);
    }

    #[test]
    fn from_powers_recovers_roots() {
        let p = parse_presentation("<a,b | [a,b]^2, b^3>").unwrap();
        let b = BranchedPresentation::from_powers(&p).unwrap();
        assert_eq!(b.exponents, vec![2, 3]);
        assert_eq!(b.base.relators[1].representative, w(&p, "b"));
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn word_strategy() -> impl Strategy<Value = Word> {
            prop::collection::vec((0usize..3, prop::bool::ANY), 0..16).prop_map(|v| {
                Word(v.into_iter().map(|(g, s)| if s { Letter::pos(g) } else { Letter::neg(g) }).collect())
            })
        }

        proptest! {
            #[test]
            fn free_reduce_idempotent_and_shrinking(w in word_strategy()) {
                let r = free_reduce(&w);
                prop_assert!(r.len() <= w.len());
                prop_assert!(r.is_freely_reduced());
                prop_assert_eq!(free_reduce(&r), r);
            }

            #[test]
            fn cyclic_reduction_idempotent_and_conjugate(w in word_strategy()) {
                let (c, k) = cyclically_reduce(&w);
                prop_assert!(c.cyclically_reduced);
                let (c2, k2) = cyclically_reduce(&c.representative);
                prop_assert_eq!(&c2.representative, &c.representative);
                prop_assert!(k2.is_empty());
                let back = free_reduce(&k.concat(&c.representative).concat(&k.inverse()));
                prop_assert_eq!(back, free_reduce(&w));
            }

            #[test]
            fn power_exponent_divisible(w in word_strategy(), n in 1usize..5) {
                let (c, _) = cyclically_reduce(&w);
                prop_assume!(!c.is_empty() && is_proper_power(&c).is_none());
                let p = power(&c, n).unwrap();
                prop_assert_eq!(p.len(), n * c.len());
                let k = is_proper_power(&CyclicWord::new(p)).map_or(1, |(_, k)| k);
                prop_assert_eq!(k % n, 0);
            }

            #[test]
            fn serialize_roundtrip(ws in prop::collection::vec(word_strategy(), 0..4)) {
                let rels: Vec<Word> = ws.into_iter().filter(|w| !w.is_empty()).collect();
                let p = Presentation::new(&["a", "b", "c"], rels);
                let q = parse_presentation(&p.to_string()).unwrap();
                prop_assert_eq!(&q, &p);
                let json = serde_json::to_string(&p).unwrap();
                let r: Presentation = serde_json::from_str(&json).unwrap();
                prop_assert_eq!(r.relators.iter().map(|c| c.representative.clone()).collect::<Vec<_>>(),
                                p.relators.iter().map(|c| c.representative.clone()).collect::<Vec<_>>());
            }
        }
    }
}
