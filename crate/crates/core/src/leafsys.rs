//! Lower leaf systems, invariant families and branching copies.

use std::sync::Arc;

use crate::config::Budget;
use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::ssgroup::{GroupDef, Word};
use crate::subgroup::search::find_matching;
use crate::subgroup::verdicts::{certify_coordinate, coordinate, kernel_search, minimal_support};
use crate::subgroup::{
    coordinate_containment, finiteness_verdict, kernel_masks, orbit_on_level, pointwise_stabilizer,
    section_group, section_subgroup, Expr, FgSubgroup,
};
use crate::tree::{is_independent, level_vertices, shadow, spanning_depth, LeafSet, Vertex};
use crate::verdict::{Certificate, Verdict};

/// The designated branching subgroup `K`, with generators in declared order.
pub fn branching_subgroup(group: &Arc<GroupDef>, budget: &Budget) -> Result<FgSubgroup> {
    let words = group
        .branching()
        .ok_or_else(|| Error::pre(format!("group {} has no branching subgroup", group.name())))?;
    let (k, map) = FgSubgroup::with_map(group.clone(), words.to_vec(), Some("K".into()), budget);
    if map.iter().any(Option::is_none) {
        return Err(Error::pre("a branching generator is trivial"));
    }
    Ok(k)
}

/// Level-`n` permutation of the element acting as `w` below `x` and
/// trivially elsewhere.
pub fn rigid_signature(group: &GroupDef, w: &Word, x: &Vertex, n: usize) -> Result<Perm> {
    let arity = group.arity();
    if x.level() > n {
        return Err(Error::pre("vertex below the signature level"));
    }
    let inner = group.act_on_level(w, n - x.level())?;
    let block = inner.degree();
    let start = x.index(arity) * block;
    let mut images: Vec<usize> = (0..arity.pow(n as u32)).collect();
    for p in 0..block {
        images[start + p] = start + inner.apply(p);
    }
    Ok(Perm::from_images(images).expect("block permutation"))
}

/// Does `c` act as `w` below `x` and trivially elsewhere?
pub fn is_rigid_copy(group: &GroupDef, c: &Word, w: &Word, x: &Vertex, pair_budget: usize) -> bool {
    let mut u = Vertex::root();
    for &letter in x.letters() {
        if group.act_unchecked(c, &u.child(letter)) != u.child(letter) {
            return false;
        }
        for z in 0..group.arity() as u8 {
            if z == letter {
                continue;
            }
            let (img, sec) = group.section_unchecked(c, &u.child(z));
            if img != u.child(z) || !group.is_identity(&sec, pair_budget).is_proved() {
                return false;
            }
        }
        u = u.child(letter);
    }
    let sec = group.section_unchecked(c, x).1;
    group.equals(&sec, w, pair_budget).is_proved()
}

/// Searches `K` for the copies `k_i` below each letter, giving the table
/// used by `embed` lines of a group definition.
pub fn find_embedding_table(group: &Arc<GroupDef>, budget: &Budget) -> Result<Vec<Vec<Expr>>> {
    let k = branching_subgroup(group, budget)?;
    let level = budget.signature_level(group.arity());
    let mut table = Vec::with_capacity(group.arity());
    for x in 0..group.arity() as u8 {
        let xv = Vertex::from_letters(vec![x]);
        let mut row = Vec::with_capacity(k.gens().len());
        for ki in k.gens() {
            let sig = rigid_signature(group, ki, &xv, level)?;
            let accept = |c: &Word| is_rigid_copy(group, c, ki, &xv, budget.pair_budget);
            let e = find_matching(&k, &sig, budget, accept)?.ok_or_else(|| {
                Error::budget(format!(
                    "no copy of {} below {} within the search ball",
                    group.fmt_word(ki),
                    x
                ))
            })?;
            row.push(e);
        }
        table.push(row);
    }
    Ok(table)
}

/// One refinement step `Y_i = (Y_{i-1} \ {y_i}) ∪ y_i X^level`.
#[derive(Clone, Debug)]
pub struct Stage {
    pub vertex: Vertex,
    pub level: usize,
    pub leaf_set: LeafSet,
    /// `st_G(level) ≤ ψ_{y_i}(st_H(Y_{i-1}))`, with witnesses.
    pub certificate: Verdict,
}

/// A system of lower leaf sets, possibly cut short by the budget.
#[derive(Clone, Debug)]
pub struct LowerLeafSystem {
    pub base: LeafSet,
    pub stages: Vec<Stage>,
    /// Set when some stage could not be certified.
    pub bound: Option<String>,
}

impl LowerLeafSystem {
    pub fn is_complete(&self) -> bool {
        self.bound.is_none()
    }

    /// `Y_i`, with `Y_0` the base.
    pub fn leaf_set(&self, i: usize) -> &LeafSet {
        if i == 0 {
            &self.base
        } else {
            &self.stages[i - 1].leaf_set
        }
    }

    pub fn final_leaf_set(&self) -> &LeafSet {
        self.leaf_set(self.stages.len())
    }

    /// The block `y_i Z_i` added at stage `i` (1-based).
    pub fn block(&self, i: usize) -> Vec<Vertex> {
        let s = &self.stages[i - 1];
        level_vertices(self.base.arity(), s.level)
            .map(|z| s.vertex.concat(&z))
            .collect()
    }

    /// Checks the recursion for `Y_i` and that `y_j Z_j ⊆ Y_i` for `j ≤ i`.
    pub fn check_structure(&self) -> bool {
        let ys = self.base.vertices();
        if self.stages.len() > ys.len() {
            return false;
        }
        for (i, s) in self.stages.iter().enumerate() {
            if s.vertex != ys[i] {
                return false;
            }
            let mut expect = self.leaf_set(i).to_explicit();
            expect.remove(&s.vertex);
            expect.extend(self.block(i + 1));
            if s.leaf_set.to_explicit() != expect {
                return false;
            }
            for j in 1..=i + 1 {
                if !self.block(j).iter().all(|v| s.leaf_set.contains(v)) {
                    return false;
                }
            }
        }
        true
    }

    /// The stage certificates as one verdict.
    pub fn verdict(&self) -> Verdict {
        let parts = self
            .stages
            .iter()
            .enumerate()
            .map(|(i, s)| {
                (
                    format!("stage {} {}", i + 1, s.vertex),
                    s.certificate.clone(),
                )
            })
            .collect();
        match &self.bound {
            None => Verdict::proved(Certificate::Composite(parts)),
            Some(b) => Verdict::unknown(b.clone(), Certificate::Composite(parts)),
        }
    }

    /// Indented text listing the stages.
    pub fn to_text(&self) -> String {
        let mut out = format!("base: {}\n", self.base);
        for (i, s) in self.stages.iter().enumerate() {
            out.push_str(&format!(
                "stage {}: y={} Z=X^{} Y={}\n",
                i + 1,
                s.vertex,
                s.level,
                s.leaf_set
            ));
        }
        match &self.bound {
            None => out.push_str("complete: yes\n"),
            Some(b) => out.push_str(&format!("complete: no ({b})\n")),
        }
        out
    }
}

/// Builds `Y_0 = Y, Y_1, …` stage by stage, certifying at each stage the
/// least level `m` with `st_G(m) ≤ ψ_{y_i}(st_H(Y_{i-1}))`.
///
/// A stage whose coordinate is proved finite violates the precondition.
/// A stage that cannot be certified within the budget ends the system,
/// which is then returned incomplete.
pub fn build_lower_leaf_system(
    h: &FgSubgroup,
    y: &LeafSet,
    budget: &Budget,
) -> Result<LowerLeafSystem> {
    if spanning_depth(y).is_none() {
        return Err(Error::pre(format!("leaf set {y} is not spanning")));
    }
    let arity = h.group().arity();
    let levels = budget.evidence_level(arity);
    let mut sys = LowerLeafSystem {
        base: y.clone(),
        stages: Vec::new(),
        bound: None,
    };
    for (i, yi) in y.vertices().into_iter().enumerate() {
        let current = sys.final_leaf_set().clone();
        let attempt = (|| -> Result<Option<Verdict>> {
            let st = pointwise_stabilizer(h, &current, budget)?;
            let coord = coordinate(&st, &yi, budget)?;
            if finiteness_verdict(&coord.subgroup, budget)?.is_proved() {
                return Err(Error::pre(format!(
                    "coordinate {yi} of stage {} is finite",
                    i + 1
                )));
            }
            let trace = coord.subgroup.index_trace(levels, budget)?;
            certify_coordinate(h, &st, &coord, &yi, &trace, budget)
        })();
        let attempt = match attempt {
            Err(Error::Budget(msg)) => {
                sys.bound = Some(format!("stage {}: {msg}", i + 1));
                break;
            }
            other => other?,
        };
        let Some(cert) = attempt else {
            sys.bound = Some(format!(
                "stage {}: no certificate up to level {}",
                i + 1,
                budget.max_certificate_level
            ));
            break;
        };
        let Certificate::StabilizerContainment { level, .. } = cert.certificate else {
            unreachable!("stage certificates are stabilizer containments")
        };
        let mut next = current.to_explicit();
        next.remove(&yi);
        next.extend(level_vertices(arity, level).map(|z| yi.concat(&z)));
        let leaf_set = LeafSet::new(arity, next)?;
        sys.stages.push(Stage {
            vertex: yi,
            level,
            leaf_set,
            certificate: cert,
        });
    }
    Ok(sys)
}

/// Re-certifies every stage of `sys` for a subgroup `l`, keeping the
/// stage levels. Systems for `H` remain systems for any `L ⊇ H`.
pub fn revalidate_lower_leaf_system(
    l: &FgSubgroup,
    sys: &LowerLeafSystem,
    budget: &Budget,
) -> Result<bool> {
    for (i, s) in sys.stages.iter().enumerate() {
        if coordinate_containment(l, sys.leaf_set(i), &s.vertex, s.level, budget)?.is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Replays the key lemma: picks `W ⊆ Y_n` block by block so that `ψ_W`
/// looks injective on `st_H(Y_n)`.
///
/// First the least `U ⊆ Y_0` without a kernel element is found. Then for
/// each `y_{i_j} ∈ U` in order, `W_j ⊆ y_{i_j} Z_{i_j}` is chosen least such
/// that no kernel element of `ψ_{Ω_j}` turns up in `st_H(Y_{i_j})`.
/// Passed-over subsets carry kernel elements; injectivity and finite index
/// are only supported by bounded search and index tables, so the verdict
/// is Unknown.
pub fn key_lemma_support(
    h: &FgSubgroup,
    sys: &LowerLeafSystem,
    budget: &Budget,
) -> Result<(LeafSet, Verdict)> {
    if !sys.is_complete() {
        return Err(Error::pre("the lower leaf system is incomplete"));
    }
    let arity = h.group().arity();
    let base = sys.base.vertices();
    let st0 = pointwise_stabilizer(h, &sys.base, budget)?;
    let ks0 = kernel_masks(&st0.subgroup, &base, budget)?;
    let all: Vec<usize> = (0..base.len()).collect();
    let (umask, mut parts) = minimal_support(&ks0, 0, &all);
    let u: Vec<usize> = all
        .iter()
        .copied()
        .filter(|&i| umask >> i & 1 == 1)
        .collect();
    let mut w: Vec<Vertex> = Vec::new();
    for (j, &i) in u.iter().enumerate() {
        let yset = sys.leaf_set(i + 1);
        let verts = yset.vertices();
        let st = pointwise_stabilizer(h, yset, budget)?;
        let ks = kernel_search(&st.subgroup, st0.subgroup.gens(), &verts, budget)?;
        let later: Vec<Vertex> = u[j + 1..].iter().map(|&l| base[l].clone()).collect();
        let fixed = ks.mask_of(&w) | ks.mask_of(&later);
        let block = sys.block(i + 1);
        let candidates: Vec<usize> = verts
            .iter()
            .enumerate()
            .filter(|(_, v)| block.contains(v))
            .map(|(k, _)| k)
            .collect();
        let (mask, step) = minimal_support(&ks, fixed, &candidates);
        parts.extend(step);
        w.extend(
            candidates
                .iter()
                .filter(|&&k| mask >> k & 1 == 1)
                .map(|&k| verts[k].clone()),
        );
    }
    let support = LeafSet::new(arity, w)?;
    let st_n = pointwise_stabilizer(h, sys.final_leaf_set(), budget)?;
    let levels = budget.evidence_level(arity);
    let mut rows = Vec::new();
    for v in support.vertices() {
        let c = section_subgroup(&st_n.subgroup, &v, budget)?;
        rows.push((format!("index {v}"), c.index_trace(levels, budget)?));
    }
    let bound = format!(
        "kernel search ball of at most {} elements",
        budget.ball_size
    );
    parts.push((
        format!("image on {support}"),
        Verdict::unknown(bound.clone(), Certificate::Table(rows)),
    ));
    Ok((
        support,
        Verdict::unknown(bound, Certificate::Composite(parts)),
    ))
}

/// Does every generator of `h` map `set` onto itself?
pub fn is_invariant(h: &FgSubgroup, set: &LeafSet) -> bool {
    let group = h.group();
    let verts = set.vertices();
    h.gens().iter().all(|w| {
        verts
            .iter()
            .all(|v| set.contains(&group.act_unchecked(w, v)))
    })
}

/// `count` pairwise independent `H`-invariant leaf sets below `T`, with
/// every vertex of level at least `min_level`.
///
/// Each round looks at the shadow of the remaining part on increasing
/// levels until `H` has at least two orbits there, then splits off the
/// lexicographically least orbit and continues below the rest.
pub fn invariant_independent_family(
    h: &FgSubgroup,
    t: &LeafSet,
    count: usize,
    min_level: usize,
    budget: &Budget,
) -> Result<Vec<LeafSet>> {
    if t.is_empty() {
        return Err(Error::pre("empty leaf set"));
    }
    for v in t.vertices() {
        if !finiteness_verdict(&section_group(h, &v, budget)?, budget)?.is_proved() {
            return Err(Error::pre(format!(
                "no finiteness certificate for the section at {v}"
            )));
        }
    }
    let group = h.group();
    let arity = group.arity();
    let max = budget.max_level(arity);
    let mut rest = t.clone();
    let mut k = min_level.max(t.max_level());
    let mut family = Vec::with_capacity(count);
    while family.len() < count {
        let split = loop {
            if k > max {
                return Err(Error::budget(format!(
                    "no level up to {max} splits {rest} into two orbits"
                )));
            }
            let w = shadow(&rest, k)?;
            let orbits: Vec<Vec<Vertex>> = orbit_on_level(h, k, budget)?
                .into_iter()
                .filter(|o| w.contains(&o[0]))
                .collect();
            if orbits.len() >= 2 {
                break orbits;
            }
            k += 1;
        };
        family.push(LeafSet::new(arity, split[0].clone())?);
        rest = LeafSet::new(arity, split[1..].iter().flatten().cloned())?;
        k += 1;
    }
    Ok(family)
}

/// Expression over `K`'s generators for the copy of `k_i` below `x`.
pub fn rigid_copy_expr(table: &[Vec<Expr>], x: &Vertex, i: usize) -> Expr {
    let mut e = Expr::gen(i);
    for &letter in x.letters().iter().rev() {
        e = e.substitute(&table[letter as usize]);
    }
    e
}

fn embedding_table(group: &GroupDef) -> Result<&[Vec<Expr>]> {
    group
        .embedding()
        .ok_or_else(|| Error::pre(format!("group {} has no embedding table", group.name())))
}

/// Generators of the copies `K^{{x}}` for every `x` in the given sets.
fn rigid_copies<'a, I>(k: &FgSubgroup, vertices: I) -> Result<Vec<Word>>
where
    I: IntoIterator<Item = &'a Vertex>,
{
    let table = embedding_table(k.group())?;
    let mut out = Vec::new();
    for x in vertices {
        for i in 0..k.gens().len() {
            out.push(
                k.eval(&rigid_copy_expr(table, x, i))
                    .expect("embedding table fits K"),
            );
        }
    }
    Ok(out)
}

/// `J = ⟨K^{{x}} : x ∈ Y_i, i ∈ support⟩` for an independent family.
pub fn build_j(
    group: &Arc<GroupDef>,
    family: &[LeafSet],
    support: &[usize],
    budget: &Budget,
) -> Result<FgSubgroup> {
    if !is_independent(family) {
        return Err(Error::pre("the family is not independent"));
    }
    let mut idx = support.to_vec();
    idx.sort_unstable();
    idx.dedup();
    if let Some(&bad) = idx.iter().find(|&&i| i >= family.len()) {
        return Err(Error::pre(format!(
            "support index {bad} outside the family"
        )));
    }
    let name = format!(
        "J{{{}}}",
        idx.iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(",")
    );
    if idx.is_empty() {
        return Ok(FgSubgroup::trivial(group).named(name));
    }
    let k = branching_subgroup(group, budget)?;
    let verts: Vec<Vertex> = idx.iter().flat_map(|&i| family[i].vertices()).collect();
    let gens = rigid_copies(&k, &verts)?;
    Ok(FgSubgroup::new(group.clone(), gens, Some(name), budget))
}

/// `⟨f_k : k ∈ gens(K)⟩` where `f_k` fixes `Y` and has section `k` at each `y ∈ Y`.
pub fn diagonal_subgroup(
    group: &Arc<GroupDef>,
    y: &LeafSet,
    budget: &Budget,
) -> Result<FgSubgroup> {
    if spanning_depth(y).is_none() {
        return Err(Error::pre(format!("leaf set {y} is not spanning")));
    }
    let k = branching_subgroup(group, budget)?;
    let table = embedding_table(group)?;
    let verts = y.vertices();
    let mut gens = Vec::with_capacity(k.gens().len());
    for i in 0..k.gens().len() {
        let parts: Vec<Word> = verts
            .iter()
            .map(|x| {
                k.eval(&rigid_copy_expr(table, x, i))
                    .expect("embedding table fits K")
            })
            .collect();
        gens.push(group.product(&parts));
    }
    Ok(FgSubgroup::new(
        group.clone(),
        gens,
        Some(format!("D({y})")),
        budget,
    ))
}

/// `K^Y`, the product of the rigid copies of `K` below each `y ∈ Y`.
pub fn rigid_product(group: &Arc<GroupDef>, y: &LeafSet, budget: &Budget) -> Result<FgSubgroup> {
    let k = branching_subgroup(group, budget)?;
    let gens = rigid_copies(&k, &y.vertices())?;
    Ok(FgSubgroup::new(
        group.clone(),
        gens,
        Some(format!("K^({y})")),
        budget,
    ))
}

/// DOT rendering of the tree down to the deepest member, one colour per set.
pub fn leaf_sets_dot(arity: usize, sets: &[LeafSet]) -> String {
    const COLOURS: [&str; 6] = [
        "lightblue",
        "salmon",
        "palegreen",
        "khaki",
        "plum",
        "lightgrey",
    ];
    let depth = sets.iter().map(LeafSet::max_level).max().unwrap_or(0);
    let mut out = String::from("digraph leafsets {\n  node [shape=circle, label=\"\"];\n");
    let name = |v: &Vertex| format!("\"{v}\"");
    for n in 0..=depth {
        for v in level_vertices(arity, n) {
            let owner = sets.iter().position(|s| s.contains(&v));
            if sets.iter().any(|s| s.prefix_of(&v).is_some_and(|p| p != v)) {
                continue;
            }
            match owner {
                Some(i) => out.push_str(&format!(
                    "  {} [style=filled, fillcolor={}, xlabel=\"{v}\"];\n",
                    name(&v),
                    COLOURS[i % COLOURS.len()]
                )),
                None => out.push_str(&format!("  {};\n", name(&v))),
            }
            if let Some(p) = v.parent() {
                out.push_str(&format!("  {} -> {};\n", name(&p), name(&v)));
            }
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ssgroup::builtin;
    use num_bigint::BigUint;

    fn grig() -> Arc<GroupDef> {
        builtin("grigorchuk").unwrap()
    }

    fn set(arity: usize, s: &str) -> LeafSet {
        LeafSet::parse(arity, s).unwrap()
    }

    fn sub(g: &Arc<GroupDef>, words: &[&str]) -> FgSubgroup {
        let gens = words.iter().map(|w| g.parse_word(w).unwrap()).collect();
        FgSubgroup::new(g.clone(), gens, None, &Budget::default())
    }

    fn strings(sets: &[LeafSet]) -> Vec<String> {
        sets.iter().map(LeafSet::to_string).collect()
    }

    #[test]
    fn builtin_embedding_tables_are_rigid() {
        let b = Budget::default();
        for name in ["grigorchuk", "gupta_sidki3"] {
            let g = builtin(name).unwrap();
            let k = branching_subgroup(&g, &b).unwrap();
            let table = g.embedding().unwrap();
            for x in 0..g.arity() as u8 {
                let xv = Vertex::from_letters(vec![x]);
                for (i, ki) in k.gens().iter().enumerate() {
                    let c = k.eval(&table[x as usize][i]).unwrap();
                    assert!(
                        is_rigid_copy(&g, &c, ki, &xv, b.pair_budget),
                        "{name} {x} {i}"
                    );
                }
            }
        }
    }

    #[test]
    fn nested_copies_are_rigid() {
        let g = grig();
        let b = Budget::default();
        let k = branching_subgroup(&g, &b).unwrap();
        let table = g.embedding().unwrap();
        let x: Vertex = "10".parse().unwrap();
        for i in 0..k.gens().len() {
            let c = k.eval(&rigid_copy_expr(table, &x, i)).unwrap();
            assert!(is_rigid_copy(&g, &c, &k.gens()[i], &x, b.pair_budget));
        }
    }

    #[test]
    fn lower_system_for_whole_group() {
        let g = grig();
        let b = Budget::default();
        let h = FgSubgroup::whole(&g);
        let sys = build_lower_leaf_system(&h, &LeafSet::full_level(2, 1), &b).unwrap();
        assert!(sys.is_complete());
        assert!(sys.check_structure());
        assert_eq!(sys.stages.len(), 2);
        assert!(sys.verdict().is_proved());
        // Every coordinate of st_G(Y_i) below a new block is all of G.
        for i in 1..=sys.stages.len() {
            let st = pointwise_stabilizer(&h, sys.leaf_set(i), &b).unwrap();
            for v in sys.block(i) {
                let c = section_subgroup(&st.subgroup, &v, &b).unwrap();
                let trace = c.index_trace(3, &b).unwrap();
                assert!(trace.iter().all(|x| *x == BigUint::from(1u32)), "{v}");
            }
        }
    }

    #[test]
    fn lower_system_sizes_follow_the_recursion() {
        let g = grig();
        let b = Budget::default();
        let sys = build_lower_leaf_system(&FgSubgroup::whole(&g), &set(2, "0,10,11"), &b).unwrap();
        println!("{}", sys.to_text());
        assert!(sys.check_structure());
        assert!(!sys.stages.is_empty());
        let k = sys.stages.len();
        let total: usize = sys.stages.iter().map(|s| 2usize.pow(s.level as u32)).sum();
        assert_eq!(sys.final_leaf_set().len(), total + 3 - k);
        assert_eq!(sys.is_complete(), k == 3);
    }

    #[test]
    fn lower_system_rejects_finite_coordinates() {
        let g = grig();
        let b = Budget::default();
        assert!(build_lower_leaf_system(&sub(&g, &["b"]), &LeafSet::full_level(2, 1), &b).is_err());
        assert!(build_lower_leaf_system(&FgSubgroup::whole(&g), &set(2, "0"), &b).is_err());
    }

    #[test]
    fn lower_system_survives_enlarging_the_subgroup() {
        let g = grig();
        let b = Budget::default();
        let x1 = LeafSet::full_level(2, 1);
        let d = diagonal_subgroup(&g, &x1, &b).unwrap();
        let sys = build_lower_leaf_system(&d, &x1, &b).unwrap();
        assert!(sys.is_complete() && sys.check_structure());
        assert!(revalidate_lower_leaf_system(&FgSubgroup::whole(&g), &sys, &b).unwrap());
    }

    #[test]
    fn key_lemma_single_vertex_base() {
        let g = grig();
        let b = Budget::default();
        let h = FgSubgroup::whole(&g);
        let sys = build_lower_leaf_system(&h, &set(2, "-"), &b).unwrap();
        let (w, verdict) = key_lemma_support(&h, &sys, &b).unwrap();
        assert_eq!(w.to_explicit(), sys.block(1).into_iter().collect());
        assert!(verdict.is_unknown());
    }

    #[test]
    fn key_lemma_for_products_and_diagonals() {
        let g = grig();
        let b = Budget::default();
        let x1 = LeafSet::full_level(2, 1);
        let k = rigid_product(&g, &x1, &b).unwrap();
        let sys = build_lower_leaf_system(&k, &x1, &b).unwrap();
        let (w, _) = key_lemma_support(&k, &sys, &b).unwrap();
        assert_eq!(&w, sys.final_leaf_set());

        let d = diagonal_subgroup(&g, &x1, &b).unwrap();
        let sys = build_lower_leaf_system(&d, &x1, &b).unwrap();
        let (w, _) = key_lemma_support(&d, &sys, &b).unwrap();
        assert_eq!(w.to_explicit(), sys.block(1).into_iter().collect());
    }

    #[test]
    fn families_are_independent_and_invariant() {
        let g = grig();
        let b = Budget::default();
        let h = sub(&g, &["b"]);
        let fam = invariant_independent_family(&h, &set(2, "0"), 3, 2, &b).unwrap();
        assert_eq!(strings(&fam), ["000,010", "0010,0110", "00110,01110"]);
        assert!(is_independent(&fam));
        assert!(fam.iter().all(|s| is_invariant(&h, s)));
        assert!(fam
            .iter()
            .flat_map(LeafSet::vertices)
            .all(|v| v.level() >= 2));

        let triv = FgSubgroup::trivial(&g);
        let fam = invariant_independent_family(&triv, &set(2, "0"), 3, 0, &b).unwrap();
        assert_eq!(strings(&fam), ["00", "010", "0110"]);

        let fam = invariant_independent_family(&triv, &set(2, "1"), 2, 4, &b).unwrap();
        assert!(fam
            .iter()
            .flat_map(LeafSet::vertices)
            .all(|v| v.level() >= 4));
    }

    #[test]
    fn families_need_finite_sections() {
        let g = grig();
        let b = Budget::default();
        assert!(
            invariant_independent_family(&FgSubgroup::whole(&g), &set(2, "0"), 2, 0, &b).is_err()
        );
    }

    #[test]
    fn j_subgroups() {
        let g = grig();
        let b = Budget::default();
        assert!(build_j(&g, &[set(2, "0")], &[], &b).unwrap().is_trivial());
        assert!(build_j(&g, &[set(2, "0"), set(2, "01")], &[0], &b).is_err());

        let v: Vertex = "01".parse().unwrap();
        let j = build_j(&g, &[set(2, "01")], &[0], &b).unwrap();
        for w in j.gens() {
            for n in 1..=5 {
                for u in level_vertices(2, n)
                    .filter(|u| !crate::tree::is_prefix(&v, u) && !crate::tree::is_prefix(u, &v))
                {
                    assert_eq!(g.act(w, &u).unwrap(), u);
                }
            }
        }
    }

    #[test]
    fn j_subgroups_are_told_apart_by_sections() {
        let g = grig();
        let b = Budget::default();
        let h = sub(&g, &["b"]);
        let fam = invariant_independent_family(&h, &set(2, "0"), 2, 2, &b).unwrap();
        let joined = |i: usize| {
            let j = build_j(&g, &fam, &[i], &b).unwrap();
            let mut gens = h.gens().to_vec();
            gens.extend_from_slice(j.gens());
            FgSubgroup::new(g.clone(), gens, None, &b)
        };
        let v: Vertex = "000".parse().unwrap();
        let with = section_group(&joined(0), &v, &b)
            .unwrap()
            .order_trace(3, &b)
            .unwrap();
        let without = section_group(&joined(1), &v, &b)
            .unwrap()
            .order_trace(3, &b)
            .unwrap();
        let plain = section_group(&h, &v, &b)
            .unwrap()
            .order_trace(3, &b)
            .unwrap();
        assert_eq!(without, plain);
        assert!(with[2] > without[2]);
    }

    #[test]
    fn diagonal_sections_agree() {
        let g = grig();
        let b = Budget::default();
        let k = branching_subgroup(&g, &b).unwrap();
        for y in ["0,1", "0,10,11"] {
            let y = set(2, y);
            let d = diagonal_subgroup(&g, &y, &b).unwrap();
            for (f, ki) in d.gens().iter().zip(k.gens()) {
                for u in y.vertices() {
                    assert_eq!(g.act(f, &u).unwrap(), u);
                    assert!(g
                        .equals(&g.section(f, &u).unwrap(), ki, b.pair_budget)
                        .is_proved());
                }
            }
        }
        let whole = diagonal_subgroup(&g, &set(2, "-"), &b).unwrap();
        for (f, ki) in whole.gens().iter().zip(k.gens()) {
            assert!(g.equals(f, ki, b.pair_budget).is_proved());
        }
    }

    #[test]
    fn diagonal_coordinates_have_index_sixteen() {
        let g = grig();
        let b = Budget::default();
        let x1 = LeafSet::full_level(2, 1);
        let d = diagonal_subgroup(&g, &x1, &b).unwrap();
        let st = pointwise_stabilizer(&d, &x1, &b).unwrap();
        for y in x1.vertices() {
            let trace = section_subgroup(&st.subgroup, &y, &b)
                .unwrap()
                .index_trace(5, &b)
                .unwrap();
            assert_eq!(trace.last(), Some(&BigUint::from(16u32)));
            assert_eq!(trace[trace.len() - 2], trace[trace.len() - 1]);
        }
    }

    #[test]
    fn dot_output_marks_members() {
        let dot = leaf_sets_dot(2, &[set(2, "0"), set(2, "10")]);
        assert!(dot.contains("\"0\" [style=filled"));
        assert!(dot.contains("\"10\" [style=filled"));
        assert!(!dot.contains("\"00\""));
    }
}
