//! Congruence quotients `G/st_G(n)` as permutation groups on `X^n`.

mod bsgs;

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Write as _;
use std::sync::Arc;

use num_bigint::BigUint;

pub use bsgs::StabChain;

use crate::config::Budget;
use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::ssgroup::{GroupDef, Word};
use crate::subgroup::FgSubgroup;

/// Brute-force closure of a permutation group by breadth-first
/// multiplication; `None` once more than `limit` elements appear.
pub fn enumerate_closure(gens: &[Perm], degree: usize, limit: usize) -> Option<HashSet<Perm>> {
    let id = Perm::identity(degree);
    let mut seen: HashSet<Perm> = HashSet::from([id.clone()]);
    let mut queue = VecDeque::from([id]);
    while let Some(p) = queue.pop_front() {
        for g in gens {
            let q = p.compose(g);
            if seen.insert(q.clone()) {
                if seen.len() > limit {
                    return None;
                }
                queue.push_back(q);
            }
        }
    }
    Some(seen)
}

pub(crate) fn check_level(group: &GroupDef, n: usize, budget: &Budget) -> Result<()> {
    let max = budget.max_level(group.arity());
    if n > max {
        return Err(Error::budget(format!(
            "level {n} exceeds the configured maximum {max}"
        )));
    }
    Ok(())
}

#[derive(Clone, Debug)]
enum Closure {
    Elements(HashSet<Perm>),
    Chain(StabChain),
}

/// A subgroup of a level quotient, given by generator images.
///
/// Small groups are closed by enumeration; larger ones get a stabilizer chain.
#[derive(Clone, Debug)]
pub struct PermGroup {
    degree: usize,
    gens: Vec<Perm>,
    closure: Closure,
}

impl PermGroup {
    pub fn new(degree: usize, gens: Vec<Perm>, budget: &Budget) -> Self {
        let closure = match enumerate_closure(&gens, degree, budget.closure_threshold) {
            Some(els) => Closure::Elements(els),
            None => Closure::Chain(StabChain::new(degree, &gens)),
        };
        PermGroup {
            degree,
            gens,
            closure,
        }
    }

    /// Always uses the stabilizer chain.
    pub fn with_chain(degree: usize, gens: Vec<Perm>) -> Self {
        let chain = StabChain::new(degree, &gens);
        PermGroup {
            degree,
            gens,
            closure: Closure::Chain(chain),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn gens(&self) -> &[Perm] {
        &self.gens
    }

    pub fn order(&self) -> BigUint {
        match &self.closure {
            Closure::Elements(e) => BigUint::from(e.len()),
            Closure::Chain(c) => c.order(),
        }
    }

    pub fn contains(&self, p: &Perm) -> bool {
        match &self.closure {
            Closure::Elements(e) => e.contains(p),
            Closure::Chain(c) => c.contains(p),
        }
    }

    pub fn elements(&self, limit: usize) -> Option<Vec<Perm>> {
        match &self.closure {
            Closure::Elements(e) if e.len() <= limit => {
                let mut v: Vec<Perm> = e.iter().cloned().collect();
                v.sort();
                Some(v)
            }
            Closure::Elements(_) => None,
            Closure::Chain(c) => c.elements(limit),
        }
    }

    pub fn is_subgroup_of(&self, other: &PermGroup) -> bool {
        self.gens.iter().all(|g| other.contains(g))
    }

    /// `|self : self ∩ other|` by enumerating `self`.
    pub fn index_of_intersection(&self, other: &PermGroup, limit: usize) -> Result<BigUint> {
        let els = self.elements(limit).ok_or_else(|| {
            Error::budget(format!("intersection needs more than {limit} elements"))
        })?;
        let common = els.iter().filter(|p| other.contains(p)).count();
        Ok(BigUint::from(els.len() / common))
    }

    pub fn conjugate(&self, by: &Perm, budget: &Budget) -> PermGroup {
        let inv = by.inverse();
        let gens = self
            .gens
            .iter()
            .map(|g| inv.compose(g).compose(by))
            .collect();
        PermGroup::new(self.degree, gens, budget)
    }
}

/// The finite quotient `G/st_G(n)` acting on `X^n`.
#[derive(Clone, Debug)]
pub struct LevelQuotient {
    group: Arc<GroupDef>,
    level: usize,
    perms: PermGroup,
}

impl LevelQuotient {
    pub fn new(group: &Arc<GroupDef>, level: usize, budget: &Budget) -> Result<Self> {
        check_level(group, level, budget)?;
        let images = group.level_gen_perms(level)?;
        let degree = images[0].degree();
        Ok(LevelQuotient {
            group: group.clone(),
            level,
            perms: PermGroup::new(degree, images, budget),
        })
    }

    pub fn group(&self) -> &Arc<GroupDef> {
        &self.group
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn generator_images(&self) -> &[Perm] {
        self.perms.gens()
    }

    pub fn perm_group(&self) -> &PermGroup {
        &self.perms
    }

    pub fn order(&self) -> BigUint {
        self.perms.order()
    }

    /// Report: level, order and the cycle form of each generator image.
    pub fn report(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "group: {}", self.group.name());
        let _ = writeln!(out, "level: {}", self.level);
        let _ = writeln!(out, "order: {}", self.order());
        for (g, p) in self.group.gens().iter().zip(self.generator_images()) {
            let _ = writeln!(
                out,
                "gen {}: {}",
                g.name,
                p.level_cycle_string(self.group.arity(), self.level)
            );
        }
        out
    }
}

pub fn project(group: &GroupDef, g: &Word, n: usize, budget: &Budget) -> Result<Perm> {
    check_level(group, n, budget)?;
    group.act_on_level(g, n)
}

pub fn quotient_order(group: &Arc<GroupDef>, n: usize, budget: &Budget) -> Result<BigUint> {
    Ok(LevelQuotient::new(group, n, budget)?.order())
}

/// `π_n(H)` as a permutation group.
pub fn subgroup_image(h: &FgSubgroup, n: usize, budget: &Budget) -> Result<PermGroup> {
    check_level(h.group(), n, budget)?;
    image_unchecked(h, n, budget)
}

/// `π_n(H)` without the `max_level` cap, for internal signature filters.
pub(crate) fn image_unchecked(h: &FgSubgroup, n: usize, budget: &Budget) -> Result<PermGroup> {
    let group = h.group();
    let degree = group.arity().pow(n as u32);
    let gens = h
        .gens()
        .iter()
        .map(|w| group.act_on_level(w, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(PermGroup::new(degree, gens, budget))
}

/// `|G : H·st_G(n)| = |π_n(G) : π_n(H)|`.
pub fn subgroup_index_in_quotient(h: &FgSubgroup, n: usize, budget: &Budget) -> Result<BigUint> {
    let full = quotient_order(h.group(), n, budget)?;
    let sub = subgroup_image(h, n, budget)?.order();
    Ok(full / sub)
}

pub fn membership_in_quotient(p: &Perm, h: &FgSubgroup, n: usize, budget: &Budget) -> Result<bool> {
    let img = subgroup_image(h, n, budget)?;
    if p.degree() != img.degree() {
        return Err(Error::pre("permutation is not on the requested level"));
    }
    Ok(img.contains(p))
}

/// Shortlex-least words (over positive generators) for every element of
/// `π_n(G)`, in discovery order. Words are returned reduced.
pub fn transversal(group: &Arc<GroupDef>, n: usize, budget: &Budget) -> Result<Vec<(Perm, Word)>> {
    check_level(group, n, budget)?;
    let images = group.level_gen_perms(n)?;
    let degree = images[0].degree();
    let id = Perm::identity(degree);
    let mut index: HashMap<Perm, usize> = HashMap::from([(id.clone(), 0)]);
    let mut out = vec![(id, Word::empty())];
    let mut i = 0;
    while i < out.len() {
        for (s, img) in images.iter().enumerate() {
            let p = out[i].0.compose(img);
            if !index.contains_key(&p) {
                if out.len() >= budget.closure_threshold {
                    return Err(Error::budget(format!(
                        "level-{n} quotient has more than {} elements",
                        budget.closure_threshold
                    )));
                }
                let w = group.mul(&out[i].1, &Word::gen(s));
                index.insert(p.clone(), out.len());
                out.push((p, w));
            }
        }
        i += 1;
    }
    Ok(out)
}

/// Schreier generators of `st_G(n)` from the shortlex transversal of `π_n(G)`.
///
/// Generators `t·s·(rep of ts)^{-1}` are reduced, deduplicated, and dropped
/// when they are proved trivial.
pub fn level_stabilizer_generators(
    group: &Arc<GroupDef>,
    n: usize,
    budget: &Budget,
) -> Result<FgSubgroup> {
    if n == 0 {
        return Ok(FgSubgroup::new(
            group.clone(),
            group.gen_words(),
            Some("G".into()),
            budget,
        ));
    }
    let trans = transversal(group, n, budget)?;
    let lookup: HashMap<&Perm, &Word> = trans.iter().map(|(p, w)| (p, w)).collect();
    let images = group.level_gen_perms(n)?;
    let mut seen = HashSet::new();
    let mut gens = Vec::new();
    for (p, t) in &trans {
        for (s, img) in images.iter().enumerate() {
            let q = p.compose(img);
            let rep = lookup[&q];
            let w = group.product([t, &Word::gen(s), &rep.inverse()]);
            if w.is_empty() || !seen.insert(w.clone()) {
                continue;
            }
            gens.push(w);
        }
    }
    Ok(FgSubgroup::new(
        group.clone(),
        gens,
        Some(format!("st({n})")),
        budget,
    ))
}

/// Size of the conjugacy class of `π_n(g)` in `π_n(G)`.
pub fn conjugacy_class_size_in_quotient(
    group: &Arc<GroupDef>,
    g: &Word,
    n: usize,
    budget: &Budget,
) -> Result<usize> {
    check_level(group, n, budget)?;
    let images = group.level_gen_perms(n)?;
    let start = group.act_on_level(g, n)?;
    let mut seen = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    while let Some(p) = queue.pop_front() {
        for s in &images {
            let q = s.inverse().compose(&p).compose(s);
            if seen.insert(q.clone()) {
                if seen.len() > budget.closure_threshold {
                    return Err(Error::budget("conjugacy class exceeds closure threshold"));
                }
                queue.push_back(q);
            }
        }
    }
    Ok(seen.len())
}
