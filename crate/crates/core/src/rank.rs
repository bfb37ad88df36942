//! Depth chains and rank classification.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;

use crate::config::Budget;
use crate::error::{Error, Result};
use crate::leafsys::build_lower_leaf_system;
use crate::ssgroup::{builtin, GroupDef, Word};
use crate::subgroup::{
    find_witness, finite_index_certificate, finiteness_verdict, infra_direct_verdict,
    pointwise_stabilizer, section_group, section_subgroup, separation_level, strictly_growing,
    vertices_bfs, Expr, FgSubgroup, MembershipWitness,
};
use crate::tree::{LeafSet, Vertex};
use crate::verdict::{Certificate, Status, Verdict};

/// A descending chain `G = H_0 ⊇ H_1 ⊇ … ⊇ H_n` with containment witnesses.
#[derive(Clone, Debug)]
pub struct DepthChain {
    pub subgroups: Vec<FgSubgroup>,
    /// `witnesses[i][j]` writes generator `j` of `H_{i+1}` over `H_i`.
    pub witnesses: Vec<Vec<MembershipWitness>>,
}

impl DepthChain {
    /// Finds containment witnesses for consecutive members of `subgroups`,
    /// which must start with the whole group.
    pub fn build(subgroups: Vec<FgSubgroup>, budget: &Budget) -> Result<DepthChain> {
        let Some(first) = subgroups.first() else {
            return Err(Error::pre("a chain needs at least one subgroup"));
        };
        let group = first.group().clone();
        if first.gens() != FgSubgroup::whole(&group).gens() {
            return Err(Error::pre("a chain starts with the whole group"));
        }
        let mut witnesses = Vec::with_capacity(subgroups.len().saturating_sub(1));
        for pair in subgroups.windows(2) {
            let mut step = Vec::with_capacity(pair[1].gens().len());
            for g in pair[1].gens() {
                let w = find_witness(&pair[0], g, budget)?.ok_or_else(|| {
                    Error::budget(format!(
                        "no witness for {} in the previous subgroup",
                        group.fmt_word(g)
                    ))
                })?;
                step.push(w);
            }
            witnesses.push(step);
        }
        Ok(DepthChain {
            subgroups,
            witnesses,
        })
    }

    pub fn group(&self) -> &Arc<GroupDef> {
        self.subgroups[0].group()
    }

    /// Number of inclusions in the chain.
    pub fn len(&self) -> usize {
        self.subgroups.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Chain file text: a `group` line, then one `subgroup` line per member
    /// and, after each but the first, a `witness` line of expressions over
    /// the previous member's generators.
    pub fn to_text(&self) -> String {
        let group = self.group();
        let mut out = format!("group {}\nhash {}\n", group.name(), group.hash());
        for (i, h) in self.subgroups.iter().enumerate() {
            out.push_str(&format!(
                "subgroup {}: {}\n",
                h.name().unwrap_or("-"),
                h.fmt_gens()
            ));
            if i > 0 {
                let exprs: Vec<String> = self.witnesses[i - 1]
                    .iter()
                    .map(|w| w.expression.to_string())
                    .collect();
                out.push_str(&format!("witness: {}\n", exprs.join("; ")));
            }
        }
        out
    }

    /// Reads a chain file. The `group` line names a built-in group; without
    /// it `default` is used. A `hash` line, when present, must match.
    pub fn parse(
        text: &str,
        default: Option<&Arc<GroupDef>>,
        budget: &Budget,
    ) -> Result<DepthChain> {
        let mut group = default.cloned();
        let mut subgroups: Vec<FgSubgroup> = Vec::new();
        let mut witnesses: Vec<Vec<MembershipWitness>> = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let ln = ln + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let rest = rest.trim();
            match key {
                "group" => group = Some(builtin(rest)?),
                "hash" => {
                    let g = group
                        .as_ref()
                        .ok_or_else(|| Error::parse(ln, "hash before group"))?;
                    if g.hash() != rest {
                        return Err(Error::parse(ln, "group hash does not match"));
                    }
                }
                "subgroup" => {
                    let g = group
                        .as_ref()
                        .ok_or_else(|| Error::parse(ln, "subgroup before group"))?;
                    let (name, gens) = rest
                        .split_once(':')
                        .ok_or_else(|| Error::parse(ln, "expected `name: gens`"))?;
                    let words = gens
                        .split(',')
                        .map(str::trim)
                        .filter(|t| !t.is_empty())
                        .map(|t| g.parse_word(t))
                        .collect::<Result<Vec<_>>>()?;
                    let name = name.trim();
                    let name = (name != "-").then(|| name.to_string());
                    let (h, map) = FgSubgroup::with_map(g.clone(), words, name, budget);
                    if map.iter().any(Option::is_none) {
                        return Err(Error::parse(ln, "trivial generator in a chain member"));
                    }
                    subgroups.push(h);
                }
                "witness:" | "witness" => {
                    let Some(h) = subgroups.last() else {
                        return Err(Error::parse(ln, "witness before any subgroup"));
                    };
                    let body = rest.trim_start_matches(':');
                    let exprs = body
                        .split(';')
                        .map(str::parse::<Expr>)
                        .collect::<Result<Vec<_>>>()?;
                    if exprs.len() != h.gens().len() {
                        return Err(Error::parse(ln, "one witness per generator expected"));
                    }
                    witnesses.push(
                        h.gens()
                            .iter()
                            .zip(exprs)
                            .map(|(t, expression)| MembershipWitness {
                                target: t.clone(),
                                expression,
                            })
                            .collect(),
                    );
                }
                other => return Err(Error::parse(ln, format!("unknown key `{other}`"))),
            }
        }
        if subgroups.is_empty() {
            return Err(Error::parse(0, "empty chain"));
        }
        if witnesses.len() + 1 != subgroups.len() {
            return Err(Error::parse(
                0,
                "every member after the first needs a witness line",
            ));
        }
        Ok(DepthChain {
            subgroups,
            witnesses,
        })
    }
}

/// Replays the chain: containments must check, or the chain is malformed.
///
/// Each step also gets an index part: Refuted when the smaller member is
/// certified to have finite index, otherwise Unknown with the trace of
/// `|π_n(H_i) : π_n(H_{i+1})|`.
pub fn verify_depth_chain(chain: &DepthChain, budget: &Budget) -> Result<Verdict> {
    let first = &chain.subgroups[0];
    if first.gens() != FgSubgroup::whole(first.group()).gens() {
        return Err(Error::MalformedCertificate(
            "the chain does not start with the whole group".into(),
        ));
    }
    let levels = budget.evidence_level(first.group().arity());
    let mut parts = Vec::new();
    for (i, pair) in chain.subgroups.windows(2).enumerate() {
        let ws = &chain.witnesses[i];
        if ws.len() != pair[1].gens().len() {
            return Err(Error::MalformedCertificate(format!(
                "step {}: witness count",
                i + 1
            )));
        }
        for (w, g) in ws.iter().zip(pair[1].gens()) {
            if &w.target != g || !w.check(&pair[0], budget.pair_budget) {
                return Err(Error::MalformedCertificate(format!(
                    "step {}: witness for {} does not replay",
                    i + 1,
                    pair[0].group().fmt_word(g)
                )));
            }
        }
        parts.push((
            format!("containment {}", i + 1),
            Verdict::proved(Certificate::Witnesses {
                over: pair[0].gens().to_vec(),
                witnesses: ws.clone(),
            }),
        ));
        let index = match finite_index_certificate(&pair[1], budget)? {
            Some(cert) => Verdict::refuted(cert.certificate),
            None => {
                let upper = pair[0].order_trace(levels, budget)?;
                let lower = pair[1].order_trace(levels, budget)?;
                let trace: Vec<BigUint> = upper.iter().zip(&lower).map(|(a, b)| a / b).collect();
                let bound = if strictly_growing(&trace, budget.growth_window) {
                    format!("index grows through level {levels}")
                } else {
                    format!("index not growing at level {levels}")
                };
                Verdict::unknown(bound, Certificate::Table(vec![("index".into(), trace)]))
            }
        };
        parts.push((format!("index {}", i + 1), index));
    }
    Ok(Verdict::proved(Certificate::Composite(parts)))
}

/// Steps of a verified chain whose index part shows growth.
pub fn growing_steps(verdict: &Verdict, budget: &Budget) -> usize {
    let Certificate::Composite(parts) = &verdict.certificate else {
        return 0;
    };
    parts
        .iter()
        .filter(|(label, v)| {
            label.starts_with("index ")
                && v.is_unknown()
                && v.table("index")
                    .is_some_and(|t| strictly_growing(t, budget.growth_window))
        })
        .count()
}

/// `2^{|Y_n|}` for the final leaf set of a complete lower leaf system.
pub fn depth_upper_bound(final_leaf_set: &LeafSet) -> BigUint {
    BigUint::from(1u32) << final_leaf_set.len()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KernelCase {
    /// `ψ_y(H)` is finite.
    FiniteSection(Vertex),
    NotFinitelyGenerated,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RankKind {
    /// Finite index, rank 0.
    FiniteIndex,
    /// Depth lies in `[lower, upper]`; `upper` is absent when the lower
    /// leaf system could not be completed.
    FiniteRank {
        lower: usize,
        upper: Option<BigUint>,
    },
    PerfectKernel(KernelCase),
    Unknown,
}

#[derive(Clone, Debug)]
pub struct RankClassification {
    pub kind: RankKind,
    pub evidence: Verdict,
}

impl fmt::Display for RankKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RankKind::FiniteIndex => write!(f, "rank 0 (finite index)"),
            RankKind::FiniteRank {
                lower,
                upper: Some(u),
            } => write!(f, "finite rank, depth in [{lower}, {u}]"),
            RankKind::FiniteRank { lower, upper: None } => {
                write!(f, "finite rank, depth at least {lower}")
            }
            RankKind::PerfectKernel(KernelCase::FiniteSection(v)) => {
                write!(f, "perfect kernel (finite section at {v})")
            }
            RankKind::PerfectKernel(KernelCase::NotFinitelyGenerated) => {
                write!(f, "perfect kernel (not finitely generated)")
            }
            RankKind::Unknown => write!(f, "unknown"),
        }
    }
}

/// First vertex, in breadth-first order up to the section search level,
/// at which the section group of `h` is proved finite.
pub fn finite_section(h: &FgSubgroup, budget: &Budget) -> Result<Option<(Vertex, Verdict)>> {
    let arity = h.group().arity();
    for v in vertices_bfs(arity, budget.section_search_level) {
        let s = section_group(h, &v, budget)?;
        let fin = finiteness_verdict(&s, budget)?;
        if fin.is_proved() {
            return Ok(Some((v, fin)));
        }
    }
    Ok(None)
}

fn require_hypotheses(group: &GroupDef) -> Result<()> {
    if group.hypotheses_asserted() {
        Ok(())
    } else {
        Err(Error::pre(format!(
            "group {} is not asserted to satisfy the branch hypotheses",
            group.name()
        )))
    }
}

/// Classifies a finitely generated subgroup:
/// finite index gives rank 0, a finite section gives the perfect kernel,
/// an infra-direct leaf-set stabilizer gives finite rank with a depth
/// interval, and anything else is Unknown.
pub fn classify(h: &FgSubgroup, budget: &Budget) -> Result<RankClassification> {
    let group = h.group();
    require_hypotheses(group)?;
    if let Some(cert) = finite_index_certificate(h, budget)? {
        return Ok(RankClassification {
            kind: RankKind::FiniteIndex,
            evidence: cert,
        });
    }
    let mut tried = Vec::new();
    if let Some((v, fin)) = finite_section(h, budget)? {
        return Ok(RankClassification {
            kind: RankKind::PerfectKernel(KernelCase::FiniteSection(v.clone())),
            evidence: Verdict::proved(Certificate::Composite(vec![(format!("finite {v}"), fin)])),
        });
    }
    for level in 1..=budget.section_search_level.max(1) {
        let y = LeafSet::full_level(group.arity(), level);
        let infra = match infra_direct_verdict(h, &y, budget) {
            Err(Error::Budget(msg)) => {
                tried.push((
                    format!("infra {y}"),
                    Verdict::unknown(msg, Certificate::None),
                ));
                continue;
            }
            other => other?,
        };
        let accepted = match infra.status {
            Status::Proved => true,
            Status::Refuted => false,
            Status::Unknown => match &infra.certificate {
                Certificate::Table(rows) => rows
                    .iter()
                    .all(|(_, t)| t.len() >= 2 && t[t.len() - 1] == t[t.len() - 2]),
                _ => false,
            },
        };
        if !accepted {
            tried.push((format!("infra {y}"), infra));
            continue;
        }
        let sys = build_lower_leaf_system(h, &y, budget)?;
        let upper = sys
            .is_complete()
            .then(|| depth_upper_bound(sys.final_leaf_set()));
        let chain = DepthChain::build(vec![FgSubgroup::whole(group), h.clone()], budget)?;
        let chain_verdict = verify_depth_chain(&chain, budget)?;
        let lower = growing_steps(&chain_verdict, budget);
        let parts = vec![
            (format!("infra {y}"), infra),
            ("lower system".to_string(), sys.verdict()),
            ("chain".to_string(), chain_verdict),
        ];
        let evidence = Verdict::unknown(
            "depth interval from evidence",
            Certificate::Composite(parts),
        );
        return Ok(RankClassification {
            kind: RankKind::FiniteRank { lower, upper },
            evidence,
        });
    }
    Ok(RankClassification {
        kind: RankKind::Unknown,
        evidence: Verdict::unknown("no applicable certificate", Certificate::Composite(tried)),
    })
}

/// A subgroup known only to be infinitely generated lies in the perfect kernel.
pub fn classify_not_finitely_generated() -> RankClassification {
    RankClassification {
        kind: RankKind::PerfectKernel(KernelCase::NotFinitelyGenerated),
        evidence: Verdict::unknown("input marked as not finitely generated", Certificate::None),
    }
}

/// Outcome of the alternative classifier.
#[derive(Clone, Debug)]
pub enum GnOutcome {
    /// `ψ_y(H)` is finite.
    FiniteSection {
        vertex: Vertex,
        verdict: Verdict,
    },
    /// `st_H(Y)` is infra-direct.
    InfraDirect {
        leaves: LeafSet,
        verdict: Verdict,
    },
    Unknown {
        bound: String,
    },
}

/// Decides between a finite section and an infra-direct leaf-set
/// stabilizer by recursing into first-level sections of `st_H(X^1)`.
///
/// Below the top, a subgroup certified to have finite index contributes
/// the leaf set `{ε}`. Recursion deeper than the budget gives Unknown.
pub fn gn_classify(h: &FgSubgroup, budget: &Budget) -> Result<GnOutcome> {
    require_hypotheses(h.group())?;
    gn_step(h, 0, budget)
}

fn gn_step(h: &FgSubgroup, depth: usize, budget: &Budget) -> Result<GnOutcome> {
    if depth > budget.gn_depth {
        return Ok(GnOutcome::Unknown {
            bound: format!("recursion depth {}", budget.gn_depth),
        });
    }
    if let Some((vertex, verdict)) = finite_section(h, budget)? {
        return Ok(GnOutcome::FiniteSection { vertex, verdict });
    }
    let arity = h.group().arity();
    if depth > 0 {
        if let Some(cert) = finite_index_certificate(h, budget)? {
            return Ok(GnOutcome::InfraDirect {
                leaves: LeafSet::parse(arity, "-")?,
                verdict: cert,
            });
        }
    }
    let x1 = LeafSet::full_level(arity, 1);
    let st = pointwise_stabilizer(h, &x1, budget)?;
    let mut leaves = Vec::new();
    let mut parts = Vec::new();
    for x in x1.vertices() {
        let child = section_subgroup(&st.subgroup, &x, budget)?;
        match gn_step(&child, depth + 1, budget)? {
            GnOutcome::FiniteSection { vertex, verdict } => {
                let status = verdict.status;
                let certificate = Certificate::Composite(vec![(format!("section {x}"), verdict)]);
                return Ok(GnOutcome::FiniteSection {
                    vertex: x.concat(&vertex),
                    verdict: Verdict {
                        status,
                        certificate,
                        bound: None,
                    },
                });
            }
            GnOutcome::InfraDirect {
                leaves: ys,
                verdict,
            } => {
                leaves.extend(ys.vertices().into_iter().map(|y| x.concat(&y)));
                parts.push((format!("section {x}"), verdict));
            }
            unknown @ GnOutcome::Unknown { .. } => return Ok(unknown),
        }
    }
    let status = if parts.iter().all(|(_, v)| v.is_proved()) {
        Status::Proved
    } else {
        Status::Unknown
    };
    let bound =
        (status == Status::Unknown).then(|| "a section certificate is evidence only".to_string());
    Ok(GnOutcome::InfraDirect {
        leaves: LeafSet::new(arity, leaves)?,
        verdict: Verdict {
            status,
            certificate: Certificate::Composite(parts),
            bound,
        },
    })
}

/// Is `H` in the basic open set that avoids every element of `avoid` and
/// contains every element of `contain`?
pub fn neighborhood_contains(
    h: &FgSubgroup,
    avoid: &[Word],
    contain: &[Word],
    budget: &Budget,
) -> Result<Verdict> {
    let group = h.group();
    for a in avoid {
        for c in contain {
            let eq = group.equals(a, c, budget.pair_budget);
            if eq.is_proved() {
                return Ok(Verdict::refuted(eq.certificate));
            }
        }
    }
    let mut parts = Vec::new();
    let mut status = Status::Proved;
    for c in contain {
        let label = format!("contains {}", group.fmt_word(c));
        if let Some(w) = find_witness(h, c, budget)? {
            parts.push((
                label,
                Verdict::proved(Certificate::Witnesses {
                    over: h.gens().to_vec(),
                    witnesses: vec![w],
                }),
            ));
        } else if let Some(level) = separation_level(h, c, budget)? {
            let sep = Certificate::Separation {
                level,
                element: c.clone(),
                over: h.gens().to_vec(),
            };
            return Ok(Verdict::refuted(Certificate::Composite(vec![(
                label,
                Verdict::proved(sep),
            )])));
        } else {
            status = Status::Unknown;
            parts.push((
                label,
                Verdict::unknown("no witness found", Certificate::None),
            ));
        }
    }
    for a in avoid {
        let label = format!("avoids {}", group.fmt_word(a));
        if let Some(level) = separation_level(h, a, budget)? {
            let sep = Certificate::Separation {
                level,
                element: a.clone(),
                over: h.gens().to_vec(),
            };
            parts.push((label, Verdict::proved(sep)));
        } else if let Some(w) = find_witness(h, a, budget)? {
            let wit = Certificate::Witnesses {
                over: h.gens().to_vec(),
                witnesses: vec![w],
            };
            return Ok(Verdict::refuted(Certificate::Composite(vec![(
                label,
                Verdict::proved(wit),
            )])));
        } else {
            status = Status::Unknown;
            parts.push((
                label,
                Verdict::unknown("not separated within the level budget", Certificate::None),
            ));
        }
    }
    let certificate = Certificate::Composite(parts);
    Ok(match status {
        Status::Unknown => Verdict::unknown("membership undecided", certificate),
        _ => Verdict::proved(certificate),
    })
}

#[cfg(test)]
mod tests;
