//! Finitely generated subgroups of a self-similar group.

pub(crate) mod search;
pub(crate) mod verdicts;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigUint;

use crate::config::Budget;
use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::quotient::{self, check_level, PermGroup};
use crate::ssgroup::{GroupDef, Sym, Word};
use crate::tree::{level_vertices, LeafSet, Vertex};

pub use search::{find_witness, separation_level};
pub use verdicts::{
    check_closure, coordinate_containment, finite_index_certificate, finiteness_verdict,
    infra_direct_verdict, kernel_masks, minimal_injective_support, stabilizer_containment,
    strictly_growing, KernelSearch,
};

/// A word over the generators of some subgroup: `(index, inverted)` pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr(Vec<(usize, bool)>);

impl Expr {
    pub fn empty() -> Self {
        Expr(Vec::new())
    }

    pub fn gen(i: usize) -> Self {
        Expr(vec![(i, false)])
    }

    pub fn from_syms(syms: Vec<(usize, bool)>) -> Self {
        Expr(syms)
    }

    pub fn syms(&self) -> &[(usize, bool)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Expr {
        Expr(self.0.iter().rev().map(|&(i, inv)| (i, !inv)).collect())
    }

    pub fn concat(&self, other: &Expr) -> Expr {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Expr(v)
    }

    /// Replaces generator `i` by `table[i]`, freely cancelling adjacent inverse pairs.
    pub fn substitute(&self, table: &[Expr]) -> Expr {
        let mut out: Vec<(usize, bool)> = Vec::new();
        for &(i, inv) in &self.0 {
            let part = if inv {
                table[i].inverse()
            } else {
                table[i].clone()
            };
            for s in part.0 {
                if out.last() == Some(&(s.0, !s.1)) {
                    out.pop();
                } else {
                    out.push(s);
                }
            }
        }
        Expr(out)
    }

    /// Reads a word over the ambient generators as an expression in them.
    pub fn from_word(w: &Word) -> Expr {
        Expr(w.syms().iter().map(|s| (s.gen as usize, s.inv)).collect())
    }

    pub fn max_index(&self) -> Option<usize> {
        self.0.iter().map(|&(i, _)| i).max()
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("e");
        }
        for (k, &(i, inv)) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "#{i}{}", if inv { "'" } else { "" })?;
        }
        Ok(())
    }
}

impl FromStr for Expr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "e" || s.is_empty() {
            return Ok(Expr::empty());
        }
        let mut out = Vec::new();
        for tok in s.split_whitespace() {
            let body = tok
                .strip_prefix('#')
                .ok_or_else(|| Error::parse(0, format!("bad expression token `{tok}`")))?;
            let (num, inv) = match body.strip_suffix('\'') {
                Some(n) => (n, true),
                None => (body, false),
            };
            let i = num
                .parse()
                .map_err(|_| Error::parse(0, format!("bad expression token `{tok}`")))?;
            out.push((i, inv));
        }
        Ok(Expr(out))
    }
}

/// `target`, written as a product of subgroup generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MembershipWitness {
    pub target: Word,
    pub expression: Expr,
}

impl MembershipWitness {
    /// Replays the witness against the subgroup's generators.
    pub fn check(&self, h: &FgSubgroup, pair_budget: usize) -> bool {
        match h.eval(&self.expression) {
            Some(w) => h.group().equals(&w, &self.target, pair_budget).is_proved(),
            None => false,
        }
    }
}

/// A subgroup given by generator words in an ambient group.
#[derive(Clone, Debug)]
pub struct FgSubgroup {
    group: Arc<GroupDef>,
    gens: Vec<Word>,
    name: Option<String>,
}

impl PartialEq for FgSubgroup {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.group, &other.group) && self.gens == other.gens
    }
}

impl FgSubgroup {
    /// Reduces the generators and drops those equal to the identity.
    pub fn new(
        group: Arc<GroupDef>,
        gens: Vec<Word>,
        name: Option<String>,
        budget: &Budget,
    ) -> Self {
        Self::with_map(group, gens, name, budget).0
    }

    /// Like [`FgSubgroup::new`], also returning where each input generator went.
    pub fn with_map(
        group: Arc<GroupDef>,
        gens: Vec<Word>,
        name: Option<String>,
        budget: &Budget,
    ) -> (Self, Vec<Option<usize>>) {
        let mut kept = Vec::new();
        let mut map = Vec::with_capacity(gens.len());
        for w in gens {
            let w = group.reduce(&w);
            if w.is_empty() || group.is_identity(&w, budget.pair_budget).is_proved() {
                map.push(None);
            } else {
                map.push(Some(kept.len()));
                kept.push(w);
            }
        }
        (
            FgSubgroup {
                group,
                gens: kept,
                name,
            },
            map,
        )
    }

    pub fn whole(group: &Arc<GroupDef>) -> Self {
        FgSubgroup {
            group: group.clone(),
            gens: group.gen_words(),
            name: Some("G".into()),
        }
    }

    pub fn trivial(group: &Arc<GroupDef>) -> Self {
        FgSubgroup {
            group: group.clone(),
            gens: Vec::new(),
            name: Some("1".into()),
        }
    }

    /// Parses a comma-separated list of words; `G` alone means the whole group.
    pub fn parse(group: &Arc<GroupDef>, s: &str, budget: &Budget) -> Result<Self> {
        let s = s.trim();
        if s == "G" {
            return Ok(Self::whole(group));
        }
        let gens = s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| group.parse_word(t))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(group.clone(), gens, None, budget))
    }

    pub fn group(&self) -> &Arc<GroupDef> {
        &self.group
    }

    pub fn gens(&self) -> &[Word] {
        &self.gens
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn is_trivial(&self) -> bool {
        self.gens.is_empty()
    }

    /// Value of an expression in this subgroup's generators.
    pub fn eval(&self, e: &Expr) -> Option<Word> {
        let mut syms: Vec<Sym> = Vec::new();
        for &(i, inv) in e.syms() {
            let g = self.gens.get(i)?;
            if inv {
                syms.extend(g.inverse().syms().iter().copied());
            } else {
                syms.extend(g.syms().iter().copied());
            }
        }
        Some(self.group.reduce_syms(syms))
    }

    pub fn fmt_gens(&self) -> String {
        if self.gens.is_empty() {
            return "e".into();
        }
        self.gens
            .iter()
            .map(|w| self.group.fmt_word(w))
            .collect::<Vec<_>>()
            .join(", ")
    }

    /// Level permutations of the generators.
    pub(crate) fn level_perms(&self, n: usize) -> Result<Vec<Perm>> {
        self.gens
            .iter()
            .map(|w| self.group.act_on_level(w, n))
            .collect()
    }

    /// `|π_n(G) : π_n(H)|` for `n = 1..=levels`.
    pub fn index_trace(&self, levels: usize, budget: &Budget) -> Result<Vec<BigUint>> {
        (1..=levels)
            .map(|n| quotient::subgroup_index_in_quotient(self, n, budget))
            .collect()
    }

    /// `|π_n(H)|` for `n = 1..=levels`.
    pub fn order_trace(&self, levels: usize, budget: &Budget) -> Result<Vec<BigUint>> {
        (1..=levels)
            .map(|n| Ok(approximate(self, n, budget)?.order()))
            .collect()
    }
}

impl fmt::Display for FgSubgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.name {
            Some(n) => write!(f, "{n} = <{}>", self.fmt_gens()),
            None => write!(f, "<{}>", self.fmt_gens()),
        }
    }
}

/// Orbits of `H` on `X^n`, each sorted, ordered by least element.
pub fn orbit_on_level(h: &FgSubgroup, n: usize, budget: &Budget) -> Result<Vec<Vec<Vertex>>> {
    check_level(h.group(), n, budget)?;
    let arity = h.group().arity();
    let perms = h.level_perms(n)?;
    let size = arity.pow(n as u32);
    let mut label = vec![usize::MAX; size];
    let mut orbits = Vec::new();
    for start in 0..size {
        if label[start] != usize::MAX {
            continue;
        }
        let id = orbits.len();
        label[start] = id;
        let mut orbit = vec![start];
        let mut i = 0;
        while i < orbit.len() {
            let p = orbit[i];
            for g in &perms {
                let q = g.apply(p);
                if label[q] == usize::MAX {
                    label[q] = id;
                    orbit.push(q);
                }
            }
            i += 1;
        }
        orbit.sort_unstable();
        orbits.push(
            orbit
                .into_iter()
                .map(|p| Vertex::from_index(p, n, arity))
                .collect(),
        );
    }
    Ok(orbits)
}

/// `st_H(Y)` with the Schreier data needed to rewrite expressions.
#[derive(Clone, Debug)]
pub struct PointwiseStabilizer {
    pub subgroup: FgSubgroup,
    /// Size of the `H`-orbit of the tuple `Y`, which is `|H : st_H(Y)|`.
    pub index: usize,
    action: Vec<Vec<usize>>,
    inverse_action: Vec<Vec<usize>>,
    schreier: Vec<Vec<Option<usize>>>,
}

impl PointwiseStabilizer {
    /// Rewrites an expression in `H`'s generators whose value fixes `Y`
    /// into one over the stabilizer's generators. `None` if the value does
    /// not fix `Y`.
    pub fn rewrite(&self, e: &Expr) -> Option<Expr> {
        let mut coset = 0;
        let mut parts = Vec::with_capacity(e.len());
        for &(s, inv) in e.syms().iter().rev() {
            if s >= self.action[0].len() {
                return None;
            }
            if inv {
                let prev = self.inverse_action[coset][s];
                if let Some(g) = self.schreier[prev][s] {
                    parts.push((g, true));
                }
                coset = prev;
            } else {
                if let Some(g) = self.schreier[coset][s] {
                    parts.push((g, false));
                }
                coset = self.action[coset][s];
            }
        }
        if coset != 0 {
            return None;
        }
        parts.reverse();
        Some(Expr::from_syms(parts))
    }
}

/// Schreier generators of `st_H(Y)` from the orbit of the tuple `Y`.
pub fn pointwise_stabilizer(
    h: &FgSubgroup,
    y: &LeafSet,
    budget: &Budget,
) -> Result<PointwiseStabilizer> {
    let group = h.group();
    let arity = group.arity();
    if y.arity() != arity {
        return Err(Error::AlphabetMismatch {
            expected: arity,
            found: y.arity(),
        });
    }
    let verts = y.vertices();
    let mut by_level: BTreeMap<usize, Vec<Perm>> = BTreeMap::new();
    for v in &verts {
        if let std::collections::btree_map::Entry::Vacant(e) = by_level.entry(v.level()) {
            check_level(group, v.level(), budget)?;
            e.insert(h.level_perms(v.level())?);
        }
    }
    let start: Vec<usize> = verts.iter().map(|v| v.index(arity)).collect();
    let levels: Vec<usize> = verts.iter().map(Vertex::level).collect();
    let ngens = h.gens().len();
    let mut index: HashMap<Vec<usize>, usize> = HashMap::from([(start.clone(), 0)]);
    let mut tuples = vec![start];
    let mut reps = vec![Word::empty()];
    let mut action: Vec<Vec<usize>> = Vec::new();
    let mut c = 0;
    while c < tuples.len() {
        let mut row = Vec::with_capacity(ngens);
        for s in 0..ngens {
            let img: Vec<usize> = tuples[c]
                .iter()
                .zip(&levels)
                .map(|(&p, l)| by_level[l][s].apply(p))
                .collect();
            let next = match index.get(&img) {
                Some(&i) => i,
                None => {
                    if tuples.len() >= budget.closure_threshold {
                        return Err(Error::budget(format!(
                            "orbit of the tuple exceeds {}",
                            budget.closure_threshold
                        )));
                    }
                    let i = tuples.len();
                    index.insert(img.clone(), i);
                    tuples.push(img);
                    reps.push(group.mul(&h.gens()[s], &reps[c]));
                    i
                }
            };
            row.push(next);
        }
        action.push(row);
        c += 1;
    }
    let mut inverse_action = vec![vec![0; ngens]; tuples.len()];
    for (c, row) in action.iter().enumerate() {
        for (s, &d) in row.iter().enumerate() {
            inverse_action[d][s] = c;
        }
    }
    let mut words = Vec::new();
    let mut slots = vec![vec![None; ngens]; tuples.len()];
    let mut seen: HashMap<Word, usize> = HashMap::new();
    for (c, row) in action.iter().enumerate() {
        for (s, &d) in row.iter().enumerate() {
            let w = group.product([&reps[d].inverse(), &h.gens()[s], &reps[c]]);
            if w.is_empty() {
                continue;
            }
            let slot = *seen.entry(w.clone()).or_insert_with(|| {
                words.push(w);
                words.len() - 1
            });
            slots[c][s] = Some(slot);
        }
    }
    let name = h.name().map(|n| format!("st_{n}({y})"));
    let (subgroup, map) = FgSubgroup::with_map(group.clone(), words, name, budget);
    let schreier = slots
        .into_iter()
        .map(|row| row.into_iter().map(|s| s.and_then(|i| map[i])).collect())
        .collect();
    Ok(PointwiseStabilizer {
        subgroup,
        index: tuples.len(),
        action,
        inverse_action,
        schreier,
    })
}

/// `ψ_y(H)` for `H` fixing `y`, with the fate of each generator.
pub fn section_subgroup_with_map(
    h: &FgSubgroup,
    y: &Vertex,
    budget: &Budget,
) -> Result<(FgSubgroup, Vec<Option<usize>>)> {
    let group = h.group();
    group.check_vertex(y)?;
    let mut secs = Vec::with_capacity(h.gens().len());
    for w in h.gens() {
        let (img, sec) = group.section_unchecked(w, y);
        if &img != y {
            return Err(Error::pre(format!(
                "generator {} moves {}",
                group.fmt_word(w),
                y
            )));
        }
        secs.push(sec);
    }
    let name = h.name().map(|n| format!("psi_{y}({n})"));
    Ok(FgSubgroup::with_map(group.clone(), secs, name, budget))
}

/// `ψ_y(H)`, the subgroup generated by the sections at `y`.
pub fn section_subgroup(h: &FgSubgroup, y: &Vertex, budget: &Budget) -> Result<FgSubgroup> {
    Ok(section_subgroup_with_map(h, y, budget)?.0)
}

/// `ψ_y(st_H(y))`, used when `H` need not fix `y`.
pub fn section_group(h: &FgSubgroup, y: &Vertex, budget: &Budget) -> Result<FgSubgroup> {
    let ly = LeafSet::singleton(h.group().arity(), y.clone())?;
    let st = pointwise_stabilizer(h, &ly, budget)?;
    section_subgroup(&st.subgroup, y, budget)
}

/// `π_n(H)`, the image of `H·st_G(n)` in the level-`n` quotient.
pub fn approximate(h: &FgSubgroup, n: usize, budget: &Budget) -> Result<PermGroup> {
    quotient::subgroup_image(h, n, budget)
}

/// `(|P : P ∩ P^g|, |P^g : P ∩ P^g|)` for `P = π_n(H)`.
///
/// Evidence only: the quotient of an intersection can be smaller than the
/// intersection of the quotients.
pub fn commensuration_indices(
    h: &FgSubgroup,
    g: &Word,
    n: usize,
    budget: &Budget,
) -> Result<(BigUint, BigUint)> {
    let p = approximate(h, n, budget)?;
    let gp = h.group().act_on_level(g, n)?;
    let q = p.conjugate(&gp, budget);
    let limit = budget.closure_threshold.max(1 << 16);
    Ok((
        p.index_of_intersection(&q, limit)?,
        q.index_of_intersection(&p, limit)?,
    ))
}

/// Vertices of levels `0..=max_level` in breadth-first, lexicographic order.
pub(crate) fn vertices_bfs(arity: usize, max_level: usize) -> impl Iterator<Item = Vertex> {
    (0..=max_level).flat_map(move |n| level_vertices(arity, n))
}
