//! Combinatorics of the rooted tree `X*`.
//!
//! Vertices are words over the alphabet `{0, .., k-1}`, stored root side
//! first. A [`LeafSet`] is a finite set of pairwise prefix-incomparable
//! vertices; full levels `X^n` are kept symbolic until something needs to
//! iterate them.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A vertex of the tree: a word over the alphabet, root side first.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vertex(Vec<u8>);

impl Vertex {
    pub fn root() -> Self {
        Vertex(Vec::new())
    }

    pub fn new(letters: Vec<u8>, arity: usize) -> Result<Self> {
        if let Some(&l) = letters.iter().find(|&&l| l as usize >= arity) {
            return Err(Error::LetterOutOfRange {
                letter: l as usize,
                arity,
            });
        }
        Ok(Vertex(letters))
    }

    /// Builds a vertex without checking letters against an alphabet.
    pub fn from_letters(letters: Vec<u8>) -> Self {
        Vertex(letters)
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn level(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, letter: u8) -> Vertex {
        let mut v = self.0.clone();
        v.push(letter);
        Vertex(v)
    }

    pub fn concat(&self, other: &Vertex) -> Vertex {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Vertex(v)
    }

    pub fn prefix(&self, len: usize) -> Vertex {
        Vertex(self.0[..len].to_vec())
    }

    pub fn parent(&self) -> Option<Vertex> {
        (!self.0.is_empty()).then(|| self.prefix(self.0.len() - 1))
    }

    pub fn max_letter(&self) -> Option<u8> {
        self.0.iter().copied().max()
    }

    pub fn check_arity(&self, arity: usize) -> Result<()> {
        match self.max_letter() {
            Some(l) if l as usize >= arity => Err(Error::LetterOutOfRange {
                letter: l as usize,
                arity,
            }),
            _ => Ok(()),
        }
    }

    /// Index of this vertex among the `arity^level` vertices of its level,
    /// the root letter being most significant.
    pub fn index(&self, arity: usize) -> usize {
        self.0.iter().fold(0, |acc, &l| acc * arity + l as usize)
    }

    pub fn from_index(mut index: usize, level: usize, arity: usize) -> Vertex {
        let mut letters = vec![0u8; level];
        for slot in letters.iter_mut().rev() {
            *slot = (index % arity) as u8;
            index /= arity;
        }
        Vertex(letters)
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("-");
        }
        for &l in &self.0 {
            write!(f, "{}", l)?;
        }
        Ok(())
    }
}

impl FromStr for Vertex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "-" || s.is_empty() || s == "ε" {
            return Ok(Vertex::root());
        }
        s.chars()
            .map(|c| {
                c.to_digit(10)
                    .map(|d| d as u8)
                    .ok_or_else(|| Error::parse(0, format!("bad vertex letter `{c}`")))
            })
            .collect::<Result<Vec<u8>>>()
            .map(Vertex)
    }
}

/// True iff `u` is a (not necessarily proper) prefix of `v`.
pub fn is_prefix(u: &Vertex, v: &Vertex) -> bool {
    v.0.starts_with(&u.0)
}

pub fn is_leaf_set<'a, I>(vertices: I) -> bool
where
    I: IntoIterator<Item = &'a Vertex>,
{
    // In sorted order a prefix sorts directly before some extension of it,
    // so comparing neighbours is enough.
    let sorted: BTreeSet<&Vertex> = vertices.into_iter().collect();
    sorted
        .iter()
        .zip(sorted.iter().skip(1))
        .all(|(a, b)| !is_prefix(a, b))
}

/// Number of vertices on level `n`, or `None` on overflow.
pub fn level_size(arity: usize, n: usize) -> Option<usize> {
    arity.checked_pow(n as u32)
}

pub fn level_vertices(arity: usize, n: usize) -> impl Iterator<Item = Vertex> {
    let size = level_size(arity, n).expect("level too large to enumerate");
    (0..size).map(move |i| Vertex::from_index(i, n, arity))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Repr {
    Explicit(BTreeSet<Vertex>),
    Level(usize),
}

/// A finite set of pairwise prefix-incomparable vertices.
///
/// Equality is set equality, whether or not a level is kept symbolic.
#[derive(Clone, Debug)]
pub struct LeafSet {
    arity: usize,
    repr: Repr,
}

impl PartialEq for LeafSet {
    fn eq(&self, other: &Self) -> bool {
        if self.arity != other.arity {
            return false;
        }
        match (&self.repr, &other.repr) {
            (Repr::Level(a), Repr::Level(b)) => a == b,
            _ => self.len() == other.len() && self.to_explicit() == other.to_explicit(),
        }
    }
}

impl Eq for LeafSet {}

impl std::hash::Hash for LeafSet {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.arity.hash(state);
        self.len().hash(state);
    }
}

impl LeafSet {
    pub fn new<I: IntoIterator<Item = Vertex>>(arity: usize, vertices: I) -> Result<Self> {
        if arity == 0 {
            return Err(Error::pre("alphabet must be nonempty"));
        }
        let set: BTreeSet<Vertex> = vertices.into_iter().collect();
        for v in &set {
            v.check_arity(arity)?;
        }
        if !is_leaf_set(&set) {
            return Err(Error::pre("vertices are not pairwise prefix-incomparable"));
        }
        Ok(LeafSet {
            arity,
            repr: Repr::Explicit(set),
        })
    }

    pub fn empty(arity: usize) -> Self {
        LeafSet {
            arity,
            repr: Repr::Explicit(BTreeSet::new()),
        }
    }

    /// The full level `X^n`, kept symbolic.
    pub fn full_level(arity: usize, n: usize) -> Self {
        LeafSet {
            arity,
            repr: Repr::Level(n),
        }
    }

    pub fn singleton(arity: usize, v: Vertex) -> Result<Self> {
        LeafSet::new(arity, [v])
    }

    pub fn parse(arity: usize, s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "{}" {
            return Ok(LeafSet::empty(arity));
        }
        if let Some(rest) = s.strip_prefix("X^") {
            let n = rest
                .parse()
                .map_err(|_| Error::parse(0, format!("bad level in `{s}`")))?;
            return Ok(LeafSet::full_level(arity, n));
        }
        let vs = s
            .split(',')
            .map(|p| p.trim().parse::<Vertex>())
            .collect::<Result<Vec<_>>>()?;
        LeafSet::new(arity, vs)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn full_level_of(&self) -> Option<usize> {
        match self.repr {
            Repr::Level(n) => Some(n),
            Repr::Explicit(_) => None,
        }
    }

    pub fn len(&self) -> usize {
        match &self.repr {
            Repr::Explicit(s) => s.len(),
            Repr::Level(n) => level_size(self.arity, *n).unwrap_or(usize::MAX),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Vertices in lexicographic order. Materializes symbolic levels.
    pub fn vertices(&self) -> Vec<Vertex> {
        match &self.repr {
            Repr::Explicit(s) => s.iter().cloned().collect(),
            Repr::Level(n) => level_vertices(self.arity, *n).collect(),
        }
    }

    pub fn contains(&self, v: &Vertex) -> bool {
        match &self.repr {
            Repr::Explicit(s) => s.contains(v),
            Repr::Level(n) => v.level() == *n && v.check_arity(self.arity).is_ok(),
        }
    }

    /// The member of the set that is a prefix of `v`, if any.
    pub fn prefix_of(&self, v: &Vertex) -> Option<Vertex> {
        match &self.repr {
            Repr::Level(n) => (v.level() >= *n).then(|| v.prefix(*n)),
            Repr::Explicit(s) => (0..=v.level()).map(|l| v.prefix(l)).find(|p| s.contains(p)),
        }
    }

    /// Largest level of a member (the "depth" used by shadows).
    pub fn max_level(&self) -> usize {
        match &self.repr {
            Repr::Level(n) => *n,
            Repr::Explicit(s) => s.iter().map(Vertex::level).max().unwrap_or(0),
        }
    }

    pub fn to_explicit(&self) -> BTreeSet<Vertex> {
        self.vertices().into_iter().collect()
    }
}

impl fmt::Display for LeafSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.vertices().iter().map(Vertex::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

/// Least `N` such that every vertex of level at least `N` lies below some
/// member of `y`; `None` when `y` is not spanning.
pub fn spanning_depth(y: &LeafSet) -> Option<usize> {
    if let Some(n) = y.full_level_of() {
        return Some(n);
    }
    let set = y.to_explicit();
    if set.is_empty() {
        return None;
    }
    let max = y.max_level();
    fn covered(u: &Vertex, set: &BTreeSet<Vertex>, arity: usize, max: usize) -> bool {
        if set.contains(u) {
            return true;
        }
        if u.level() >= max {
            return false;
        }
        (0..arity as u8).all(|x| covered(&u.child(x), set, arity, max))
    }
    covered(&Vertex::root(), &set, y.arity(), max).then_some(max)
}

/// Completes `y` with every level-`target_level` vertex not already covered.
pub fn extend_to_spanning(y: &LeafSet, target_level: usize) -> Result<LeafSet> {
    if target_level < y.max_level() {
        return Err(Error::pre(format!(
            "target level {target_level} is below the depth {} of the leaf set",
            y.max_level()
        )));
    }
    if y.full_level_of().is_some() {
        return Ok(y.clone());
    }
    let set = y.to_explicit();
    let arity = y.arity();
    let mut out = set.clone();
    fn walk(
        u: Vertex,
        set: &BTreeSet<Vertex>,
        arity: usize,
        target: usize,
        out: &mut BTreeSet<Vertex>,
    ) {
        if set.contains(&u) {
            return;
        }
        if u.level() == target {
            out.insert(u);
            return;
        }
        for x in 0..arity as u8 {
            walk(u.child(x), set, arity, target, out);
        }
    }
    walk(Vertex::root(), &set, arity, target_level, &mut out);
    LeafSet::new(arity, out)
}

/// The level-`n` vertices lying below some member of `t`.
pub fn shadow(t: &LeafSet, n: usize) -> Result<LeafSet> {
    if t.is_empty() {
        return Err(Error::pre("shadow of an empty leaf set"));
    }
    if n < t.max_level() {
        return Err(Error::pre(format!(
            "shadow level {n} is below the depth {} of the leaf set",
            t.max_level()
        )));
    }
    if t.full_level_of().is_some() {
        return Ok(LeafSet::full_level(t.arity(), n));
    }
    let arity = t.arity();
    let mut out = BTreeSet::new();
    for v in t.vertices() {
        let extra = n - v.level();
        for w in level_vertices(arity, extra) {
            out.insert(v.concat(&w));
        }
    }
    LeafSet::new(arity, out)
}

/// A family is independent when the union of its members is a leaf set.
pub fn is_independent(family: &[LeafSet]) -> bool {
    let mut all = Vec::new();
    for y in family {
        all.extend(y.vertices());
    }
    is_leaf_set(&all)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Vertex {
        s.parse().unwrap()
    }

    fn ls(s: &str) -> LeafSet {
        LeafSet::parse(2, s).unwrap()
    }

    #[test]
    fn prefix_examples() {
        assert!(is_prefix(&Vertex::root(), &v("01")));
        assert!(is_prefix(&v("0"), &v("01")));
        assert!(!is_prefix(&v("1"), &v("01")));
    }

    #[test]
    fn leaf_set_examples() {
        assert!(is_leaf_set(&[v("0"), v("10"), v("11")]));
        assert!(!is_leaf_set(&[v("0"), v("01")]));
        assert!(is_leaf_set(&[]));
    }

    #[test]
    fn spanning_depth_examples() {
        assert_eq!(spanning_depth(&ls("0,10,11")), Some(2));
        assert_eq!(
            spanning_depth(&LeafSet::new(2, level_vertices(2, 3)).unwrap()),
            Some(3)
        );
        assert_eq!(spanning_depth(&ls("0")), None);
        assert_eq!(
            spanning_depth(&LeafSet::singleton(2, Vertex::root()).unwrap()),
            Some(0)
        );
        assert_eq!(spanning_depth(&LeafSet::empty(2)), None);
    }

    #[test]
    fn extend_examples() {
        assert_eq!(extend_to_spanning(&ls("0"), 2).unwrap(), ls("0,10,11"));
        let x1 = LeafSet::full_level(2, 1);
        assert_eq!(
            extend_to_spanning(&x1, 1).unwrap().vertices(),
            x1.vertices()
        );
        assert_eq!(extend_to_spanning(&ls("00"), 2).unwrap(), ls("00,01,10,11"));
        assert!(extend_to_spanning(&ls("000"), 2).is_err());
    }

    #[test]
    fn shadow_examples() {
        assert_eq!(shadow(&ls("0,10"), 2).unwrap(), ls("00,01,10"));
        assert_eq!(
            shadow(&LeafSet::full_level(2, 1), 1).unwrap().vertices(),
            ls("0,1").vertices()
        );
        assert_eq!(shadow(&ls("1"), 3).unwrap(), ls("100,101,110,111"));
        assert!(shadow(&ls("0,10"), 1).is_err());
        assert!(shadow(&LeafSet::empty(2), 3).is_err());
    }

    #[test]
    fn independence_examples() {
        assert!(is_independent(&[ls("0"), ls("10")]));
        assert!(!is_independent(&[ls("0"), ls("01")]));
        assert!(is_independent(&[LeafSet::full_level(2, 1)]));
    }

    #[test]
    fn serialization() {
        assert_eq!(Vertex::root().to_string(), "-");
        assert_eq!(v("012").to_string(), "012");
        assert_eq!(ls("10,0,11").to_string(), "0,10,11");
        assert!(LeafSet::parse(2, "0,2").is_err());
        assert_eq!(LeafSet::parse(3, "X^1").unwrap().to_string(), "0,1,2");
    }

    #[test]
    fn index_roundtrip() {
        for i in 0..27 {
            let w = Vertex::from_index(i, 3, 3);
            assert_eq!(w.index(3), i);
        }
        assert_eq!(v("10").index(2), 2);
    }
}
