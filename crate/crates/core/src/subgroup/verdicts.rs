//! Verdict-carrying tests on subgroups: finiteness, stabilizer containment,
//! infra-direct coordinates and injective supports.

use num_bigint::BigUint;

use super::search::{ball, find_witness};
use super::{
    pointwise_stabilizer, section_subgroup_with_map, Expr, FgSubgroup, MembershipWitness,
    PointwiseStabilizer,
};
use crate::config::Budget;
use crate::error::{Error, Result};
use crate::quotient::level_stabilizer_generators;
use crate::ssgroup::{GroupDef, Word};
use crate::tree::{spanning_depth, LeafSet, Vertex};
use crate::verdict::{Certificate, Verdict};

/// Proved finite when breadth-first enumeration closes within the
/// enumeration limit; otherwise Unknown with the order trace of `π_n(H)`.
pub fn finiteness_verdict(h: &FgSubgroup, budget: &Budget) -> Result<Verdict> {
    if h.is_trivial() {
        return Ok(Verdict::proved(Certificate::Elements {
            over: Vec::new(),
            elements: vec![Word::empty()],
        }));
    }
    let b = ball(h, budget.enumeration_limit, usize::MAX, budget)?;
    if b.complete {
        return Ok(Verdict::proved(Certificate::Elements {
            over: h.gens().to_vec(),
            elements: b.elems.iter().map(|e| e.word.clone()).collect(),
        }));
    }
    let levels = budget.evidence_level(h.group().arity());
    let trace = h.order_trace(levels, budget)?;
    Ok(Verdict::unknown(
        format!("enumeration limit {}", budget.enumeration_limit),
        Certificate::Table(vec![("order".into(), trace)]),
    ))
}

/// Re-checks an element list of `<over>`: it contains the identity and is
/// closed under right multiplication by every generator.
pub fn check_closure(group: &GroupDef, over: &[Word], elements: &[Word], budget: &Budget) -> bool {
    let level = budget.signature_level(group.arity());
    let Ok(sigs) = elements
        .iter()
        .map(|w| group.act_on_level(w, level))
        .collect::<Result<Vec<_>>>()
    else {
        return false;
    };
    let mut index: std::collections::HashMap<_, Vec<usize>> = std::collections::HashMap::new();
    for (i, s) in sigs.iter().enumerate() {
        index.entry(s.clone()).or_default().push(i);
    }
    let has = |w: &Word| -> bool {
        let Ok(s) = group.act_on_level(w, level) else {
            return false;
        };
        index.get(&s).is_some_and(|b| {
            b.iter().any(|&j| {
                group
                    .equals(&elements[j], w, budget.pair_budget)
                    .is_proved()
            })
        })
    };
    if !has(&Word::empty()) {
        return false;
    }
    elements
        .iter()
        .all(|x| over.iter().all(|g| has(&group.mul(x, g))))
}

fn trace_stable_from(trace: &[BigUint], m: usize) -> bool {
    m >= 1 && m <= trace.len() && trace[m - 1..].iter().all(|v| *v == trace[m - 1])
}

/// Witnesses that every Schreier generator of `st_G(m)` lies in `h`.
pub fn stabilizer_containment(
    h: &FgSubgroup,
    m: usize,
    budget: &Budget,
) -> Result<Option<Vec<MembershipWitness>>> {
    let st = level_stabilizer_generators(h.group(), m, budget)?;
    let mut out = Vec::with_capacity(st.gens().len());
    for t in st.gens() {
        match find_witness(h, t, budget)? {
            Some(w) => out.push(w),
            None => return Ok(None),
        }
    }
    Ok(Some(out))
}

/// Certifies `|G : H| < ∞` by witnessing `st_G(m) ≤ H` for the least `m`
/// at which the index trace of `H` has settled.
pub fn finite_index_certificate(h: &FgSubgroup, budget: &Budget) -> Result<Option<Verdict>> {
    let levels = budget.evidence_level(h.group().arity());
    let trace = h.index_trace(levels, budget)?;
    for m in 0..=budget.max_certificate_level.min(levels) {
        let settled = if m == 0 {
            trace.iter().all(|i| *i == BigUint::from(1u32))
        } else {
            trace_stable_from(&trace, m)
        };
        if !settled {
            continue;
        }
        if let Some(witnesses) = stabilizer_containment(h, m, budget)? {
            return Ok(Some(Verdict::proved(Certificate::StabilizerContainment {
                level: m,
                over: h.gens().to_vec(),
                witnesses,
            })));
        }
    }
    Ok(None)
}

/// Does the trace strictly increase over its last `window` steps?
pub fn strictly_growing(trace: &[BigUint], window: usize) -> bool {
    trace.len() > window
        && trace[trace.len() - window - 1..]
            .windows(2)
            .all(|w| w[0] < w[1])
}

/// The coordinate subgroup `ψ_y(st_H(Y))` together with its Schreier data.
pub(crate) struct Coordinate {
    pub subgroup: FgSubgroup,
    map: Vec<Option<usize>>,
}

pub(crate) fn coordinate(
    st: &PointwiseStabilizer,
    y: &Vertex,
    budget: &Budget,
) -> Result<Coordinate> {
    let (subgroup, map) = section_subgroup_with_map(&st.subgroup, y, budget)?;
    Ok(Coordinate { subgroup, map })
}

/// Witness for `target ∈ ψ_y(st_H(Y))`, found directly or by lifting an
/// expression from `ψ_y(H)` when `H` fixes `y`.
fn coordinate_witness(
    h: &FgSubgroup,
    st: &PointwiseStabilizer,
    coord: &Coordinate,
    y: &Vertex,
    target: &Word,
    budget: &Budget,
) -> Result<Option<MembershipWitness>> {
    if let Some(w) = find_witness(&coord.subgroup, target, budget)? {
        return Ok(Some(w));
    }
    let Ok((outer, outer_map)) = section_subgroup_with_map(h, y, budget) else {
        return Ok(None);
    };
    let Some(w) = find_witness(&outer, target, budget)? else {
        return Ok(None);
    };
    let back: Vec<usize> = (0..outer.gens().len())
        .map(|j| {
            outer_map
                .iter()
                .position(|m| *m == Some(j))
                .expect("kept generator")
        })
        .collect();
    let in_h = Expr::from_syms(
        w.expression
            .syms()
            .iter()
            .map(|&(j, inv)| (back[j], inv))
            .collect(),
    );
    let Some(in_st) = st.rewrite(&in_h) else {
        return Ok(None);
    };
    let in_coord = Expr::from_syms(
        in_st
            .syms()
            .iter()
            .filter_map(|&(i, inv)| coord.map[i].map(|c| (c, inv)))
            .collect(),
    );
    let cand = MembershipWitness {
        target: w.target,
        expression: in_coord,
    };
    Ok(cand
        .check(&coord.subgroup, budget.pair_budget)
        .then_some(cand))
}

/// Witnesses that `st_G(m) ≤ ψ_y(st_H(Y))`, as expressions over the
/// coordinate subgroup's generators.
pub fn coordinate_containment(
    h: &FgSubgroup,
    y_set: &LeafSet,
    y: &Vertex,
    m: usize,
    budget: &Budget,
) -> Result<Option<Vec<MembershipWitness>>> {
    let st = pointwise_stabilizer(h, y_set, budget)?;
    let coord = coordinate(&st, y, budget)?;
    containment_in(h, &st, &coord, y, m, budget)
}

pub(crate) fn containment_in(
    h: &FgSubgroup,
    st: &PointwiseStabilizer,
    coord: &Coordinate,
    y: &Vertex,
    m: usize,
    budget: &Budget,
) -> Result<Option<Vec<MembershipWitness>>> {
    let targets = level_stabilizer_generators(h.group(), m, budget)?;
    let mut out = Vec::with_capacity(targets.gens().len());
    for t in targets.gens() {
        match coordinate_witness(h, st, coord, y, t, budget)? {
            Some(w) => out.push(w),
            None => return Ok(None),
        }
    }
    Ok(Some(out))
}

/// Certifies `st_G(m) ≤ ψ_y(st_H(Y))` for the least workable `m`, using
/// the coordinate's index trace to skip levels that cannot work.
pub(crate) fn certify_coordinate(
    h: &FgSubgroup,
    st: &PointwiseStabilizer,
    coord: &Coordinate,
    y: &Vertex,
    trace: &[BigUint],
    budget: &Budget,
) -> Result<Option<Verdict>> {
    for m in 1..=budget.max_certificate_level.min(trace.len()) {
        if !trace_stable_from(trace, m) {
            continue;
        }
        if let Some(witnesses) = containment_in(h, st, coord, y, m, budget)? {
            return Ok(Some(Verdict::proved(Certificate::StabilizerContainment {
                level: m,
                over: coord.subgroup.gens().to_vec(),
                witnesses,
            })));
        }
    }
    Ok(None)
}

/// Is `st_H(Y)` an infra-direct product of its coordinates `ψ_y(st_H(Y))`?
///
/// Refuted when some coordinate is proved finite. Proved when each
/// coordinate contains a level stabilizer, with witnesses. Otherwise
/// Unknown with the coordinate index traces.
pub fn infra_direct_verdict(h: &FgSubgroup, y_set: &LeafSet, budget: &Budget) -> Result<Verdict> {
    if spanning_depth(y_set).is_none() {
        return Err(Error::pre(format!("leaf set {y_set} is not spanning")));
    }
    let verts = y_set.vertices();
    if h.is_trivial() {
        let fin = Verdict::proved(Certificate::Elements {
            over: Vec::new(),
            elements: vec![Word::empty()],
        });
        return Ok(Verdict::refuted(Certificate::Composite(vec![(
            format!("finite {}", verts[0]),
            fin,
        )])));
    }
    let st = pointwise_stabilizer(h, y_set, budget)?;
    let levels = budget.evidence_level(h.group().arity());
    let mut coords = Vec::with_capacity(verts.len());
    for y in &verts {
        let c = coordinate(&st, y, budget)?;
        let fin = finiteness_verdict(&c.subgroup, budget)?;
        if fin.is_proved() {
            return Ok(Verdict::refuted(Certificate::Composite(vec![(
                format!("finite {y}"),
                fin,
            )])));
        }
        coords.push(c);
    }
    let mut rows = Vec::new();
    let mut parts = Vec::new();
    let mut closed = true;
    for (y, c) in verts.iter().zip(&coords) {
        let trace = c.subgroup.index_trace(levels, budget)?;
        rows.push((format!("index {y}"), trace.clone()));
        if !closed {
            continue;
        }
        match certify_coordinate(h, &st, c, y, &trace, budget)? {
            Some(v) => parts.push((format!("coordinate {y}"), v)),
            None => closed = false,
        }
    }
    if closed {
        Ok(Verdict::proved(Certificate::Composite(parts)))
    } else {
        Ok(Verdict::unknown(
            format!("certificate level {}", budget.max_certificate_level),
            Certificate::Table(rows),
        ))
    }
}

/// For each nontrivial element of a bounded ball of `h`, the set of
/// vertices (as a bit mask over `vertices`) where its section is trivial.
#[derive(Clone, Debug)]
pub struct KernelSearch {
    pub vertices: Vec<Vertex>,
    over: Vec<Word>,
    pub(crate) elems: Vec<(Word, Expr, u64)>,
    pub ball_size: usize,
}

impl KernelSearch {
    /// A nontrivial element whose sections vanish on every vertex of `mask`.
    pub fn kernel_element(&self, mask: u64) -> Option<(&Word, &Expr)> {
        self.elems
            .iter()
            .find(|e| e.2 & mask == mask)
            .map(|e| (&e.0, &e.1))
    }

    pub fn mask_of(&self, set: &[Vertex]) -> u64 {
        set.iter()
            .map(|v| {
                self.vertices
                    .iter()
                    .position(|u| u == v)
                    .map_or(0, |i| 1u64 << i)
            })
            .fold(0, |a, b| a | b)
    }

    pub fn vertices_of(&self, mask: u64) -> Vec<Vertex> {
        self.vertices
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, v)| v.clone())
            .collect()
    }

    pub(crate) fn kernel_verdict(&self, mask: u64) -> Option<Verdict> {
        self.kernel_element(mask).map(|(w, e)| {
            Verdict::proved(Certificate::KernelElement {
                over: self.over.clone(),
                element: MembershipWitness {
                    target: w.clone(),
                    expression: e.clone(),
                },
                trivial_on: self.vertices_of(mask),
            })
        })
    }
}

/// Collects nontrivial elements of `h` with their trivial-section masks:
/// first a bounded ball, then commutators of pool elements.
///
/// At vertices fixed by `h`, the section of `[x, y]` is the commutator of
/// the sections, so it is trivial wherever either factor's section is.
pub fn kernel_masks(h: &FgSubgroup, vertices: &[Vertex], budget: &Budget) -> Result<KernelSearch> {
    kernel_search(h, &[], vertices, budget)
}

/// Like [`kernel_masks`], also conjugating pool elements by `extra`, whose
/// members must permute `vertices`. Expressions are over the generators
/// of `h` followed by `extra`.
pub(crate) fn kernel_search(
    h: &FgSubgroup,
    extra: &[Word],
    vertices: &[Vertex],
    budget: &Budget,
) -> Result<KernelSearch> {
    if vertices.len() > 20 {
        return Err(Error::budget("kernel search supports at most 20 vertices"));
    }
    let group = h.group();
    let limit = budget.ball_size.min(budget.enumeration_limit.max(4096));
    let b = ball(h, limit, budget.witness_depth, budget)?;
    let mask_of = |w: &Word| -> Option<u64> {
        let mut mask = 0u64;
        for (i, v) in vertices.iter().enumerate() {
            let (img, sec) = group.section_unchecked(w, v);
            if &img != v {
                return None;
            }
            if sec.is_empty() || group.is_identity(&sec, budget.pair_budget).is_proved() {
                mask |= 1 << i;
            }
        }
        Some(mask)
    };
    let mut elems = Vec::new();
    for e in b.elems.iter().skip(1) {
        let nontrivial =
            !e.sig.is_identity() || group.is_identity(&e.word, budget.pair_budget).is_refuted();
        if nontrivial {
            let mask = mask_of(&e.word).ok_or_else(|| {
                Error::pre(format!(
                    "{} moves a vertex of the set",
                    group.fmt_word(&e.word)
                ))
            })?;
            elems.push((e.word.clone(), e.expr.clone(), mask));
        }
    }
    let full = (1u64 << vertices.len()) - 1;
    let mut known: Vec<u64> = Vec::new();
    for e in &elems {
        if !known.contains(&e.2) {
            known.push(e.2);
        }
    }
    let covered = |m: u64, known: &[u64]| known.iter().any(|&k| k & m == m);
    let offset = h.gens().len();
    for _ in 0..KERNEL_ROUNDS {
        let reps = mask_representatives(&elems);
        let mut fresh: Vec<(Word, Expr, u64)> = Vec::new();
        let add =
            |word: Word, expr: Expr, known: &mut Vec<u64>, fresh: &mut Vec<(Word, Expr, u64)>| {
                if let Some(mask) = mask_of(&word) {
                    if mask != full && !covered(mask, known) {
                        known.push(mask);
                        fresh.push((word, expr, mask));
                    }
                }
            };
        for &i in &reps {
            for (k, c) in extra.iter().enumerate() {
                for inv in [false, true] {
                    let (c, sym) = if inv {
                        (c.inverse(), (offset + k, true))
                    } else {
                        (c.clone(), (offset + k, false))
                    };
                    let x = &elems[i];
                    let word = group.product([&c.inverse(), &x.0, &c]);
                    let cexpr = Expr::from_syms(vec![sym]);
                    let expr = cexpr.inverse().concat(&x.1).concat(&cexpr);
                    add(word, expr, &mut known, &mut fresh);
                }
            }
        }
        for (a, &i) in reps.iter().enumerate() {
            for &j in &reps[a + 1..] {
                let (xi, xj) = (&elems[i], &elems[j]);
                let union = xi.2 | xj.2;
                if union == full || covered(union, &known) {
                    continue;
                }
                let word = group.product([&xi.0.inverse(), &xj.0.inverse(), &xi.0, &xj.0]);
                if word.is_empty() || !group.is_identity(&word, budget.pair_budget).is_refuted() {
                    continue;
                }
                let expr =
                    xi.1.inverse()
                        .concat(&xj.1.inverse())
                        .concat(&xi.1)
                        .concat(&xj.1);
                add(word, expr, &mut known, &mut fresh);
            }
        }
        if fresh.is_empty() {
            break;
        }
        elems.extend(fresh);
    }
    let mut over = h.gens().to_vec();
    over.extend_from_slice(extra);
    Ok(KernelSearch {
        vertices: vertices.to_vec(),
        over,
        elems,
        ball_size: b.elems.len(),
    })
}

const KERNEL_ROUNDS: usize = 6;
const KERNEL_REPS: usize = 4;

/// Indices of up to `KERNEL_REPS` elements per mask, in order of first
/// appearance.
fn mask_representatives(elems: &[(Word, Expr, u64)]) -> Vec<usize> {
    let mut count: std::collections::HashMap<u64, usize> = std::collections::HashMap::new();
    let mut out = Vec::new();
    for (i, e) in elems.iter().enumerate() {
        let c = count.entry(e.2).or_insert(0);
        if *c < KERNEL_REPS {
            *c += 1;
            out.push(i);
        }
    }
    out
}

/// Least `U ⊆ Y` (by size, then lexicographically) for which no kernel
/// element of `ψ_U` on `H` was found.
///
/// Each smaller subset carries a proved kernel element; the injectivity of
/// `ψ_U` itself is only bound-grade and reported as Unknown.
pub fn minimal_injective_support(
    h: &FgSubgroup,
    y_set: &LeafSet,
    budget: &Budget,
) -> Result<(LeafSet, Verdict)> {
    let verts = y_set.vertices();
    let group = h.group();
    for w in h.gens() {
        for v in &verts {
            if &group.act_unchecked(w, v) != v {
                return Err(Error::pre(format!("{} moves {}", group.fmt_word(w), v)));
            }
        }
    }
    let ks = kernel_masks(h, &verts, budget)?;
    let (mask, parts) = minimal_support(&ks, 0, &(0..verts.len()).collect::<Vec<_>>());
    let support = LeafSet::new(y_set.arity(), ks.vertices_of(mask))?;
    let verdict = match ks.kernel_verdict(mask) {
        Some(v) => Verdict::refuted(Certificate::Composite(vec![(
            format!("kernel on {support}"),
            v,
        )])),
        None => {
            let mut parts = parts;
            parts.push((
                format!("injective on {support}"),
                Verdict::unknown(
                    format!("ball of {} elements", ks.ball_size),
                    Certificate::None,
                ),
            ));
            Verdict::unknown(
                format!("ball of {} elements", ks.ball_size),
                Certificate::Composite(parts),
            )
        }
    };
    Ok((support, verdict))
}

/// Searches `fixed ∪ U` over subsets `U` of `candidates` by increasing size;
/// returns the first mask without a kernel element (or everything), plus
/// the kernel certificates for the subsets passed over.
pub(crate) fn minimal_support(
    ks: &KernelSearch,
    fixed: u64,
    candidates: &[usize],
) -> (u64, Vec<(String, Verdict)>) {
    let mut parts = Vec::new();
    let n = candidates.len();
    for size in 0..=n {
        for combo in combinations(n, size) {
            let mask = combo.iter().fold(fixed, |m, &i| m | 1u64 << candidates[i]);
            match ks.kernel_verdict(mask) {
                Some(v) => {
                    let label = format!("kernel on {}", fmt_vertices(&ks.vertices_of(mask)));
                    parts.push((label, v));
                }
                None => return (mask, parts),
            }
        }
    }
    let all = candidates.iter().fold(fixed, |m, &i| m | 1u64 << i);
    (all, parts)
}

fn fmt_vertices(vs: &[Vertex]) -> String {
    if vs.is_empty() {
        return "{}".into();
    }
    vs.iter()
        .map(Vertex::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}
