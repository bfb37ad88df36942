//! Self-similar groups given by wreath recursions.
//!
//! An element is a reduced [`Word`] over signed generator symbols. Words are
//! read as compositions of functions: `w = s1 s2 … sk` acts on a vertex by
//! applying `sk` first, so `(gh)(v) = g(h(v))` and sections compose as
//! `(gh)_u = g_{h(u)} h_u`.

mod builtin;
mod parse;
mod portrait;
mod reduce;

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::sync::{Arc, Mutex};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::perm::{Perm, Point};
use crate::subgroup::Expr;
use crate::tree::Vertex;
use crate::verdict::{Certificate, Verdict};

pub use builtin::{builtin, BUILTIN_NAMES};
pub use portrait::Portrait;
pub use reduce::Rule;

/// A generator or its inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sym {
    pub gen: u16,
    pub inv: bool,
}

impl Sym {
    pub fn new(gen: usize) -> Self {
        Sym {
            gen: gen as u16,
            inv: false,
        }
    }

    pub fn inverse(self) -> Self {
        Sym {
            gen: self.gen,
            inv: !self.inv,
        }
    }
}

/// A word over generator symbols. Words produced by [`GroupDef`] methods are
/// always reduced.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<Sym>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_syms(syms: Vec<Sym>) -> Self {
        Word(syms)
    }

    pub fn gen(g: usize) -> Self {
        Word(vec![Sym::new(g)])
    }

    pub fn syms(&self) -> &[Sym] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Formal inverse (not reduced).
    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|s| s.inverse()).collect())
    }

    /// Formal concatenation (not reduced).
    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenDef {
    pub name: String,
    /// Root permutation as letter images.
    pub perm: Vec<u8>,
    /// Section word at each letter.
    pub sections: Vec<Word>,
}

/// A wreath-recursion presentation together with its rewriting system.
pub struct GroupDef {
    name: String,
    arity: usize,
    gens: Vec<GenDef>,
    rules: Vec<Rule>,
    branching: Option<Vec<Word>>,
    /// `embedding[x][i]`: an expression over the branching generators whose
    /// value acts as branching generator `i` below letter `x` and trivially
    /// elsewhere.
    embedding: Option<Vec<Vec<Expr>>>,
    hypotheses: bool,
    inv_perm: Vec<Vec<u8>>,
    inv_sections: Vec<Vec<Word>>,
    rules_by_last: Vec<Vec<usize>>,
    level_cache: Mutex<Vec<Arc<Vec<(Perm, Perm)>>>>,
}

impl fmt::Debug for GroupDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroupDef")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .field(
                "gens",
                &self.gens.iter().map(|g| &g.name).collect::<Vec<_>>(),
            )
            .finish()
    }
}

/// Raw parts of a presentation, validated by [`GroupDef::new`].
#[derive(Clone, Debug, Default)]
pub struct GroupSpec {
    pub name: String,
    pub arity: usize,
    pub gens: Vec<GenDef>,
    pub rules: Vec<Rule>,
    pub branching: Option<Vec<Word>>,
    pub embedding: Option<Vec<Vec<Expr>>>,
    pub hypotheses: bool,
}

impl GroupDef {
    pub fn new(spec: GroupSpec) -> Result<Arc<GroupDef>> {
        let GroupSpec {
            name,
            arity,
            gens,
            rules,
            branching,
            embedding,
            hypotheses,
        } = spec;
        if arity < 2 {
            return Err(Error::pre("alphabet must have at least two letters"));
        }
        if gens.is_empty() {
            return Err(Error::pre("at least one generator is required"));
        }
        let n = gens.len();
        let check_word = |w: &Word, what: &str| -> Result<()> {
            if w.syms().iter().any(|s| s.gen as usize >= n) {
                return Err(Error::pre(format!(
                    "{what} references an undeclared generator"
                )));
            }
            Ok(())
        };
        let mut names = HashSet::new();
        for g in &gens {
            if !names.insert(g.name.clone()) {
                return Err(Error::pre(format!("duplicate generator `{}`", g.name)));
            }
            if g.name == "e" || g.name.is_empty() {
                return Err(Error::pre("`e` is reserved for the identity"));
            }
            if g.perm.len() != arity || g.sections.len() != arity {
                return Err(Error::pre(format!(
                    "generator `{}` has wrong arity",
                    g.name
                )));
            }
            let mut seen = vec![false; arity];
            for &x in &g.perm {
                if x as usize >= arity || seen[x as usize] {
                    return Err(Error::pre(format!(
                        "generator `{}` root is not a permutation",
                        g.name
                    )));
                }
                seen[x as usize] = true;
            }
            for w in &g.sections {
                check_word(w, "section word")?;
            }
        }
        for r in &rules {
            check_word(&r.lhs, "rule")?;
            check_word(&r.rhs, "rule")?;
            r.validate()?;
        }
        if let Some(k) = &branching {
            for w in k {
                check_word(w, "branching word")?;
            }
        }
        if let (Some(table), Some(k)) = (&embedding, &branching) {
            if table.len() != arity || table.iter().any(|row| row.len() != k.len()) {
                return Err(Error::pre("embedding table has wrong shape"));
            }
            for row in table {
                for e in row {
                    if e.syms().iter().any(|&(i, _)| i >= k.len()) {
                        return Err(Error::pre(
                            "embedding references an undeclared branching generator",
                        ));
                    }
                }
            }
        }
        let inv_perm = gens
            .iter()
            .map(|g| {
                let mut inv = vec![0u8; arity];
                for (x, &y) in g.perm.iter().enumerate() {
                    inv[y as usize] = x as u8;
                }
                inv
            })
            .collect();
        let inv_sections = gens
            .iter()
            .map(|g| g.sections.iter().map(Word::inverse).collect())
            .collect();
        let mut rules_by_last = vec![Vec::new(); 2 * n];
        for (i, r) in rules.iter().enumerate() {
            let last = *r.lhs.syms().last().expect("validated nonempty");
            rules_by_last[sym_slot(last)].push(i);
        }
        let mut g = GroupDef {
            name,
            arity,
            gens,
            rules,
            branching: None,
            embedding,
            hypotheses,
            inv_perm,
            inv_sections,
            rules_by_last,
            level_cache: Mutex::new(Vec::new()),
        };
        // Section words and branching words are stored reduced.
        let gens_reduced: Vec<GenDef> = g
            .gens
            .iter()
            .map(|gd| GenDef {
                name: gd.name.clone(),
                perm: gd.perm.clone(),
                sections: gd.sections.iter().map(|w| g.reduce(w)).collect(),
            })
            .collect();
        g.gens = gens_reduced;
        g.inv_sections = g
            .gens
            .iter()
            .map(|gd| gd.sections.iter().map(|w| g.inverse(w)).collect())
            .collect();
        g.branching = branching.map(|k| k.iter().map(|w| g.reduce(w)).collect());
        Ok(Arc::new(g))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn gens(&self) -> &[GenDef] {
        &self.gens
    }

    pub fn num_gens(&self) -> usize {
        self.gens.len()
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn branching(&self) -> Option<&[Word]> {
        self.branching.as_deref()
    }

    pub fn embedding(&self) -> Option<&[Vec<Expr>]> {
        self.embedding.as_deref()
    }

    /// Whether the presentation is asserted to satisfy the hypotheses of the
    /// rank classifier (true for the built-ins).
    pub fn hypotheses_asserted(&self) -> bool {
        self.hypotheses
    }

    pub fn gen_words(&self) -> Vec<Word> {
        (0..self.gens.len()).map(Word::gen).collect()
    }

    /// Hex SHA-256 of the canonical text form.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }

    pub fn check_vertex(&self, v: &Vertex) -> Result<()> {
        v.check_arity(self.arity)
            .map_err(|_| Error::AlphabetMismatch {
                expected: self.arity,
                found: v.max_letter().map_or(0, |l| l as usize + 1),
            })
    }

    /// Reduced product `g·h`.
    pub fn mul(&self, g: &Word, h: &Word) -> Word {
        self.reduce_syms(g.syms().iter().chain(h.syms()).copied())
    }

    pub fn inverse(&self, g: &Word) -> Word {
        self.reduce(&g.inverse())
    }

    pub fn product<'a, I: IntoIterator<Item = &'a Word>>(&self, words: I) -> Word {
        self.reduce_syms(words.into_iter().flat_map(|w| w.syms().iter().copied()))
    }

    pub fn conjugate(&self, g: &Word, by: &Word) -> Word {
        // by^{-1} g by
        self.product([&by.inverse(), g, by])
    }

    fn sym_step(&self, s: Sym, x: usize) -> (usize, &Word) {
        let g = s.gen as usize;
        if s.inv {
            let y = self.inv_perm[g][x] as usize;
            (y, &self.inv_sections[g][y])
        } else {
            (self.gens[g].perm[x] as usize, &self.gens[g].sections[x])
        }
    }

    /// Image of letter `x` and the (reduced) section at `x`.
    pub fn step(&self, w: &Word, x: usize) -> (usize, Word) {
        let mut letter = x;
        let mut parts: Vec<&Word> = Vec::with_capacity(w.len());
        for &s in w.syms().iter().rev() {
            let (y, sec) = self.sym_step(s, letter);
            parts.push(sec);
            letter = y;
        }
        let sec = self.reduce_syms(parts.iter().rev().flat_map(|p| p.syms().iter().copied()));
        (letter, sec)
    }

    /// Root permutation of `w` as letter images.
    pub fn root_perm(&self, w: &Word) -> Vec<u8> {
        (0..self.arity)
            .map(|x| {
                w.syms().iter().rev().fold(x, |l, &s| {
                    let g = s.gen as usize;
                    if s.inv {
                        self.inv_perm[g][l] as usize
                    } else {
                        self.gens[g].perm[l] as usize
                    }
                }) as u8
            })
            .collect()
    }

    /// Image of a vertex.
    pub fn act(&self, w: &Word, v: &Vertex) -> Result<Vertex> {
        self.check_vertex(v)?;
        Ok(self.act_unchecked(w, v))
    }

    pub(crate) fn act_unchecked(&self, w: &Word, v: &Vertex) -> Vertex {
        let mut cur = w.clone();
        let mut out = Vec::with_capacity(v.level());
        for &x in v.letters() {
            if cur.is_empty() {
                out.push(x);
                continue;
            }
            let (y, sec) = self.step(&cur, x as usize);
            out.push(y as u8);
            cur = sec;
        }
        Vertex::from_letters(out)
    }

    /// Section `w_u`, satisfying `w(uv) = w(u) w_u(v)`.
    pub fn section(&self, w: &Word, u: &Vertex) -> Result<Word> {
        self.check_vertex(u)?;
        Ok(self.section_unchecked(w, u).1)
    }

    /// Image of `u` together with the section at `u`.
    pub(crate) fn section_unchecked(&self, w: &Word, u: &Vertex) -> (Vertex, Word) {
        let mut cur = self.reduce(w);
        let mut img = Vec::with_capacity(u.level());
        for &x in u.letters() {
            let (y, sec) = self.step(&cur, x as usize);
            img.push(y as u8);
            cur = sec;
        }
        (Vertex::from_letters(img), cur)
    }

    fn level_table(&self, n: usize) -> Result<Arc<Vec<(Perm, Perm)>>> {
        let degree = self
            .arity
            .checked_pow(n as u32)
            .filter(|&d| d <= Point::MAX as usize + 1)
            .ok_or_else(|| {
                Error::budget(format!("level {n} exceeds the permutation size limit"))
            })?;
        let mut cache = self.level_cache.lock().expect("level cache poisoned");
        if cache.is_empty() {
            let id = Perm::identity(1);
            cache.push(Arc::new(vec![(id.clone(), id); self.gens.len()]));
        }
        while cache.len() <= n {
            let m = cache.len();
            let prev = cache[m - 1].clone();
            let block = self.arity.pow(m as u32 - 1);
            let word_perm_prev = |w: &Word| -> Perm {
                let mut p = Perm::identity(block);
                for &s in w.syms().iter().rev() {
                    let (fwd, inv) = &prev[s.gen as usize];
                    p = if s.inv {
                        inv.compose(&p)
                    } else {
                        fwd.compose(&p)
                    };
                }
                p
            };
            let mut level = Vec::with_capacity(self.gens.len());
            for g in &self.gens {
                let mut images = vec![0 as Point; block * self.arity];
                for x in 0..self.arity {
                    let sec = word_perm_prev(&g.sections[x]);
                    let y = g.perm[x] as usize;
                    for w in 0..block {
                        images[x * block + w] = (y * block + sec.apply(w)) as Point;
                    }
                }
                let p = Perm::from_raw(images);
                let inv = p.inverse();
                level.push((p, inv));
            }
            cache.push(Arc::new(level));
        }
        debug_assert_eq!(cache[n][0].0.degree(), degree);
        Ok(cache[n].clone())
    }

    /// Level-`n` permutations of the generators (forward images only).
    pub fn level_gen_perms(&self, n: usize) -> Result<Vec<Perm>> {
        Ok(self
            .level_table(n)?
            .iter()
            .map(|(p, _)| p.clone())
            .collect())
    }

    /// The permutation of `X^n` induced by `w`.
    pub fn act_on_level(&self, w: &Word, n: usize) -> Result<Perm> {
        let table = self.level_table(n)?;
        let mut p = Perm::identity(table[0].0.degree());
        for &s in w.syms().iter().rev() {
            let (fwd, inv) = &table[s.gen as usize];
            p = if s.inv {
                inv.compose(&p)
            } else {
                fwd.compose(&p)
            };
        }
        Ok(p)
    }

    /// Decides `g = h` by bisimulation over section pairs.
    ///
    /// Pairs `(g_u, h_u)` are explored breadth first; a mismatch of root
    /// permutations yields the first vertex on which the two act
    /// differently, and a closed pair set proves equality.
    pub fn equals(&self, g: &Word, h: &Word, pair_budget: usize) -> Verdict {
        let g = self.reduce(g);
        let h = self.reduce(h);
        let mut seen: HashSet<(Word, Word)> = HashSet::new();
        let mut queue: VecDeque<(Word, Word, Vertex)> = VecDeque::new();
        seen.insert((g.clone(), h.clone()));
        queue.push_back((g.clone(), h.clone(), Vertex::root()));
        let (lhs, rhs) = (g, h);
        while let Some((g, h, path)) = queue.pop_front() {
            if g == h {
                continue;
            }
            let pg = self.root_perm(&g);
            let ph = self.root_perm(&h);
            if let Some(x) = (0..self.arity).find(|&x| pg[x] != ph[x]) {
                return Verdict::refuted(Certificate::WitnessVertex {
                    lhs,
                    rhs,
                    vertex: path.child(x as u8),
                });
            }
            for x in 0..self.arity {
                let (_, gx) = self.step(&g, x);
                let (_, hx) = self.step(&h, x);
                if seen.insert((gx.clone(), hx.clone())) {
                    if seen.len() > pair_budget {
                        return Verdict::unknown(
                            format!("pair budget {pair_budget}"),
                            Certificate::None,
                        );
                    }
                    queue.push_back((gx, hx, path.child(x as u8)));
                }
            }
        }
        Verdict::proved(Certificate::Bisimulation {
            lhs,
            rhs,
            pairs: seen.len(),
        })
    }

    pub fn is_identity(&self, w: &Word, pair_budget: usize) -> Verdict {
        self.equals(w, &Word::empty(), pair_budget)
    }

    /// Renders a word with generator names; `'` marks inverses and `e` is the identity.
    pub fn fmt_word(&self, w: &Word) -> String {
        if w.is_empty() {
            return "e".to_string();
        }
        let sep = if self.gens.iter().any(|g| g.name.chars().count() > 1) {
            "*"
        } else {
            ""
        };
        w.syms()
            .iter()
            .map(|s| {
                let n = &self.gens[s.gen as usize].name;
                if s.inv {
                    format!("{n}'")
                } else {
                    n.clone()
                }
            })
            .collect::<Vec<_>>()
            .join(sep)
    }

    pub fn gen_index(&self, name: &str) -> Option<usize> {
        self.gens.iter().position(|g| g.name == name)
    }
}

#[inline]
pub(crate) fn sym_slot(s: Sym) -> usize {
    2 * s.gen as usize + s.inv as usize
}

#[cfg(test)]
mod tests;
