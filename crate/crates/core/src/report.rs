//! Structured reports and certificate replay.
//!
//! A report is an indented tree of `key: value` lines. It embeds the group
//! definition and its hash, then one `claim` node per verdict:
//!
//! ```text
//! report: 1
//! group-hash: 3f…
//! group:
//!   line: group grigorchuk
//!   …
//! claim: equal bc d
//!   status: Proved
//!   certificate: bisimulation
//!     lhs: bc
//!     rhs: d
//!     pairs: 3
//! ```

use std::fmt::Write as _;
use std::sync::Arc;

use num_bigint::BigUint;

use crate::config::Budget;
use crate::error::{Error, Result};
use crate::quotient::{level_stabilizer_generators, subgroup_image};
use crate::ssgroup::{GroupDef, Word};
use crate::subgroup::{check_closure, Expr, FgSubgroup, MembershipWitness};
use crate::tree::Vertex;
use crate::verdict::{Certificate, Status, Verdict};

/// A group together with labelled verdicts about it.
#[derive(Clone, Debug)]
pub struct Report {
    pub group: Arc<GroupDef>,
    pub claims: Vec<(String, Verdict)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Node {
    key: String,
    value: String,
    children: Vec<Node>,
}

impl Node {
    fn new(key: &str, value: impl Into<String>) -> Node {
        Node {
            key: key.to_string(),
            value: value.into(),
            children: Vec::new(),
        }
    }

    fn with(mut self, child: Node) -> Node {
        self.children.push(child);
        self
    }

    fn write(&self, depth: usize, out: &mut String) {
        let pad = "  ".repeat(depth);
        if self.value.is_empty() {
            let _ = writeln!(out, "{pad}{}:", self.key);
        } else {
            let _ = writeln!(out, "{pad}{}: {}", self.key, self.value);
        }
        for c in &self.children {
            c.write(depth + 1, out);
        }
    }

    fn child(&self, key: &str) -> Result<&Node> {
        self.children
            .iter()
            .find(|c| c.key == key)
            .ok_or_else(|| Error::parse(0, format!("`{}` node lacks `{key}`", self.key)))
    }

    fn all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a Node> + 'a {
        self.children.iter().filter(move |c| c.key == key)
    }
}

fn parse_nodes(text: &str) -> Result<Vec<Node>> {
    let mut roots: Vec<Node> = Vec::new();
    let mut stack: Vec<(usize, Node)> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let indent = raw.len() - raw.trim_start_matches(' ').len();
        if indent % 2 != 0 {
            return Err(Error::parse(
                ln + 1,
                "indentation must be a multiple of two spaces",
            ));
        }
        let depth = indent / 2;
        let line = raw.trim();
        let (key, value) = match line.split_once(':') {
            Some((k, v)) => (k.trim(), v.trim()),
            None => {
                return Err(Error::parse(
                    ln + 1,
                    format!("expected `key: value`, found `{line}`"),
                ))
            }
        };
        while let Some((d, _)) = stack.last() {
            if *d < depth {
                break;
            }
            let (_, done) = stack.pop().expect("nonempty");
            match stack.last_mut() {
                Some((_, parent)) => parent.children.push(done),
                None => roots.push(done),
            }
        }
        let parent_depth = stack.last().map_or(0, |(d, _)| d + 1);
        if depth != parent_depth {
            return Err(Error::parse(ln + 1, "unexpected indentation"));
        }
        stack.push((depth, Node::new(key, value)));
    }
    while let Some((_, done)) = stack.pop() {
        match stack.last_mut() {
            Some((_, parent)) => parent.children.push(done),
            None => roots.push(done),
        }
    }
    Ok(roots)
}

fn words_value(group: &GroupDef, ws: &[Word]) -> String {
    ws.iter()
        .map(|w| group.fmt_word(&group.reduce(w)))
        .collect::<Vec<_>>()
        .join(", ")
}

fn parse_words(group: &GroupDef, s: &str) -> Result<Vec<Word>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| group.parse_word(t))
        .collect()
}

fn expr_value(e: &Expr) -> String {
    if e.is_empty() {
        "e".to_string()
    } else {
        e.to_string()
    }
}

fn witness_node(group: &GroupDef, w: &MembershipWitness) -> Node {
    Node::new(
        "witness",
        format!(
            "{} = {}",
            group.fmt_word(&group.reduce(&w.target)),
            expr_value(&w.expression)
        ),
    )
}

fn parse_witness(group: &GroupDef, s: &str) -> Result<MembershipWitness> {
    let (t, e) = s
        .split_once('=')
        .ok_or_else(|| Error::parse(0, "witness needs `target = expression`"))?;
    Ok(MembershipWitness {
        target: group.parse_word(t.trim())?,
        expression: e.trim().parse()?,
    })
}

fn numbers(v: &[BigUint]) -> String {
    v.iter()
        .map(BigUint::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

fn certificate_node(group: &GroupDef, c: &Certificate) -> Node {
    let word = |w: &Word| group.fmt_word(&group.reduce(w));
    match c {
        Certificate::None => Node::new("certificate", "none"),
        Certificate::Bisimulation { lhs, rhs, pairs } => Node::new("certificate", "bisimulation")
            .with(Node::new("lhs", word(lhs)))
            .with(Node::new("rhs", word(rhs)))
            .with(Node::new("pairs", pairs.to_string())),
        Certificate::WitnessVertex { lhs, rhs, vertex } => {
            Node::new("certificate", "witness-vertex")
                .with(Node::new("lhs", word(lhs)))
                .with(Node::new("rhs", word(rhs)))
                .with(Node::new("vertex", vertex.to_string()))
        }
        Certificate::Witnesses { over, witnesses } => {
            let mut n = Node::new("certificate", "witnesses")
                .with(Node::new("over", words_value(group, over)));
            n.children
                .extend(witnesses.iter().map(|w| witness_node(group, w)));
            n
        }
        Certificate::Elements { over, elements } => {
            let mut n = Node::new("certificate", "elements")
                .with(Node::new("over", words_value(group, over)));
            n.children
                .extend(elements.iter().map(|e| Node::new("element", word(e))));
            n
        }
        Certificate::StabilizerContainment {
            level,
            over,
            witnesses,
        } => {
            let mut n = Node::new("certificate", "stabilizer-containment")
                .with(Node::new("level", level.to_string()))
                .with(Node::new("over", words_value(group, over)));
            n.children
                .extend(witnesses.iter().map(|w| witness_node(group, w)));
            n
        }
        Certificate::Separation {
            level,
            element,
            over,
        } => Node::new("certificate", "separation")
            .with(Node::new("level", level.to_string()))
            .with(Node::new("element", word(element)))
            .with(Node::new("over", words_value(group, over))),
        Certificate::KernelElement {
            over,
            element,
            trivial_on,
        } => Node::new("certificate", "kernel-element")
            .with(Node::new("over", words_value(group, over)))
            .with(witness_node(group, element))
            .with(Node::new(
                "trivial-on",
                trivial_on
                    .iter()
                    .map(Vertex::to_string)
                    .collect::<Vec<_>>()
                    .join(","),
            )),
        Certificate::Table(rows) => {
            let mut n = Node::new("certificate", "table");
            n.children.extend(
                rows.iter()
                    .map(|(name, v)| Node::new("row", format!("{name} = {}", numbers(v)))),
            );
            n
        }
        Certificate::Composite(parts) => {
            let mut n = Node::new("certificate", "composite");
            n.children.extend(
                parts
                    .iter()
                    .map(|(label, v)| verdict_node(group, "part", label, v)),
            );
            n
        }
    }
}

fn verdict_node(group: &GroupDef, key: &str, label: &str, v: &Verdict) -> Node {
    let mut n = Node::new(key, label).with(Node::new("status", v.status.to_string()));
    if let Some(b) = &v.bound {
        n.children.push(Node::new("bound", b.clone()));
    }
    n.with(certificate_node(group, &v.certificate))
}

fn parse_usize(s: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::parse(0, format!("expected a number, found `{s}`")))
}

fn parse_certificate(group: &GroupDef, n: &Node) -> Result<Certificate> {
    let word = |key: &str| group.parse_word(&n.child(key)?.value);
    let over = || parse_words(group, &n.child("over")?.value);
    let witnesses = || {
        n.all("witness")
            .map(|w| parse_witness(group, &w.value))
            .collect::<Result<Vec<_>>>()
    };
    Ok(match n.value.as_str() {
        "none" => Certificate::None,
        "bisimulation" => Certificate::Bisimulation {
            lhs: word("lhs")?,
            rhs: word("rhs")?,
            pairs: parse_usize(&n.child("pairs")?.value)?,
        },
        "witness-vertex" => Certificate::WitnessVertex {
            lhs: word("lhs")?,
            rhs: word("rhs")?,
            vertex: n.child("vertex")?.value.parse()?,
        },
        "witnesses" => Certificate::Witnesses {
            over: over()?,
            witnesses: witnesses()?,
        },
        "elements" => Certificate::Elements {
            over: over()?,
            elements: n
                .all("element")
                .map(|e| group.parse_word(&e.value))
                .collect::<Result<_>>()?,
        },
        "stabilizer-containment" => Certificate::StabilizerContainment {
            level: parse_usize(&n.child("level")?.value)?,
            over: over()?,
            witnesses: witnesses()?,
        },
        "separation" => Certificate::Separation {
            level: parse_usize(&n.child("level")?.value)?,
            element: word("element")?,
            over: over()?,
        },
        "kernel-element" => {
            let tv = &n.child("trivial-on")?.value;
            Certificate::KernelElement {
                over: over()?,
                element: parse_witness(group, &n.child("witness")?.value)?,
                trivial_on: tv
                    .split(',')
                    .filter(|t| !t.is_empty())
                    .map(str::parse)
                    .collect::<Result<_>>()?,
            }
        }
        "table" => Certificate::Table(
            n.all("row")
                .map(|r| {
                    let (name, vals) = r
                        .value
                        .split_once('=')
                        .ok_or_else(|| Error::parse(0, "row needs `name = values`"))?;
                    let vals = vals
                        .split_whitespace()
                        .map(|x| {
                            x.parse::<BigUint>()
                                .map_err(|_| Error::parse(0, format!("bad number `{x}`")))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    Ok((name.trim().to_string(), vals))
                })
                .collect::<Result<_>>()?,
        ),
        "composite" => Certificate::Composite(
            n.all("part")
                .map(|p| Ok((p.value.clone(), parse_verdict(group, p)?)))
                .collect::<Result<_>>()?,
        ),
        other => {
            return Err(Error::parse(
                0,
                format!("unknown certificate kind `{other}`"),
            ))
        }
    })
}

fn parse_verdict(group: &GroupDef, n: &Node) -> Result<Verdict> {
    let status: Status = n
        .child("status")?
        .value
        .parse()
        .map_err(|_| Error::parse(0, format!("bad status in `{}`", n.value)))?;
    let bound = n.all("bound").next().map(|b| b.value.clone());
    let certificate = parse_certificate(group, n.child("certificate")?)?;
    Ok(Verdict {
        status,
        certificate,
        bound,
    })
}

impl Report {
    pub fn new(group: &Arc<GroupDef>) -> Report {
        Report {
            group: group.clone(),
            claims: Vec::new(),
        }
    }

    pub fn push(&mut self, label: impl Into<String>, verdict: Verdict) {
        self.claims.push((label.into(), verdict));
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        Node::new("report", "1").write(0, &mut out);
        Node::new("group-hash", self.group.hash()).write(0, &mut out);
        let mut g = Node::new("group", "");
        g.children
            .extend(self.group.to_text().lines().map(|l| Node::new("line", l)));
        g.write(0, &mut out);
        for (label, v) in &self.claims {
            verdict_node(&self.group, "claim", label, v).write(0, &mut out);
        }
        out
    }

    /// Reads a report, rebuilding the embedded group and checking its hash.
    pub fn parse(text: &str) -> Result<Report> {
        let nodes = parse_nodes(text)?;
        let mut hash = None;
        let mut group = None;
        let mut claims = Vec::new();
        for n in &nodes {
            match n.key.as_str() {
                "report" => {
                    if n.value != "1" {
                        return Err(Error::parse(
                            0,
                            format!("unsupported report version {}", n.value),
                        ));
                    }
                }
                "group-hash" => hash = Some(n.value.clone()),
                "group" => {
                    let text: String = n.all("line").map(|l| format!("{}\n", l.value)).collect();
                    group = Some(GroupDef::parse_text(&text)?);
                }
                "claim" => {
                    let g = group
                        .as_ref()
                        .ok_or_else(|| Error::parse(0, "claim before group"))?;
                    claims.push((n.value.clone(), parse_verdict(g, n)?));
                }
                other => return Err(Error::parse(0, format!("unknown report key `{other}`"))),
            }
        }
        let group = group.ok_or_else(|| Error::parse(0, "report without group"))?;
        if hash.as_deref() != Some(group.hash().as_str()) {
            return Err(Error::MalformedCertificate(
                "group hash does not match the embedded definition".into(),
            ));
        }
        Ok(Report { group, claims })
    }
}

/// One verdict in the report's node format, without the group header.
pub fn verdict_text(group: &GroupDef, label: &str, v: &Verdict) -> String {
    let mut out = String::new();
    verdict_node(group, "claim", label, v).write(0, &mut out);
    out
}

/// Result of replaying a report.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerifySummary {
    /// Certificates replayed successfully.
    pub checked: usize,
    /// Paths of verdicts whose certificate failed to replay.
    pub failures: Vec<String>,
}

impl VerifySummary {
    pub fn is_ok(&self) -> bool {
        self.failures.is_empty()
    }
}

fn eval_over(group: &GroupDef, over: &[Word], e: &Expr) -> Option<Word> {
    let mut parts = Vec::with_capacity(e.len());
    for &(i, inv) in e.syms() {
        let g = over.get(i)?;
        parts.push(if inv { group.inverse(g) } else { g.clone() });
    }
    Some(group.product(&parts))
}

fn witness_holds(group: &GroupDef, over: &[Word], w: &MembershipWitness, budget: &Budget) -> bool {
    eval_over(group, over, &w.expression)
        .is_some_and(|v| group.equals(&v, &w.target, budget.pair_budget).is_proved())
}

/// Replays one certificate. `None` for certificates that carry no
/// replayable content.
fn replay(group: &Arc<GroupDef>, c: &Certificate, budget: &Budget) -> Option<bool> {
    let pb = budget.pair_budget;
    Some(match c {
        Certificate::None | Certificate::Table(_) | Certificate::Composite(_) => return None,
        Certificate::Bisimulation { lhs, rhs, .. } => group.equals(lhs, rhs, pb).is_proved(),
        Certificate::WitnessVertex { lhs, rhs, vertex } => {
            group.check_vertex(vertex).is_ok()
                && group.act(lhs, vertex).ok() != group.act(rhs, vertex).ok()
        }
        Certificate::Witnesses { over, witnesses } => witnesses
            .iter()
            .all(|w| witness_holds(group, over, w, budget)),
        Certificate::Elements { over, elements } => check_closure(group, over, elements, budget),
        Certificate::StabilizerContainment {
            level,
            over,
            witnesses,
        } => {
            let Ok(st) = level_stabilizer_generators(group, *level, budget) else {
                return Some(false);
            };
            st.gens().len() == witnesses.len()
                && st
                    .gens()
                    .iter()
                    .zip(witnesses)
                    .all(|(t, w)| group.equals(t, &w.target, pb).is_proved())
                && witnesses
                    .iter()
                    .all(|w| witness_holds(group, over, w, budget))
        }
        Certificate::Separation {
            level,
            element,
            over,
        } => {
            let h = FgSubgroup::new(group.clone(), over.clone(), None, budget);
            match (
                group.act_on_level(element, *level),
                subgroup_image(&h, *level, budget),
            ) {
                (Ok(p), Ok(img)) => !img.contains(&p),
                _ => false,
            }
        }
        Certificate::KernelElement {
            over,
            element,
            trivial_on,
        } => {
            witness_holds(group, over, element, budget)
                && group.is_identity(&element.target, pb).is_refuted()
                && trivial_on.iter().all(|u| {
                    group.act(&element.target, u).ok().as_ref() == Some(u)
                        && group
                            .section(&element.target, u)
                            .is_ok_and(|s| group.is_identity(&s, pb).is_proved())
                })
        }
    })
}

fn verify_verdict(
    group: &Arc<GroupDef>,
    path: &str,
    v: &Verdict,
    budget: &Budget,
    out: &mut VerifySummary,
) {
    if let Certificate::Composite(parts) = &v.certificate {
        for (label, p) in parts {
            verify_verdict(group, &format!("{path} / {label}"), p, budget, out);
        }
        return;
    }
    match replay(group, &v.certificate, budget) {
        Some(true) => out.checked += 1,
        Some(false) => out
            .failures
            .push(format!("{path}: certificate does not replay")),
        None if v.status != Status::Unknown => out.failures.push(format!(
            "{path}: {} verdict without replayable evidence",
            v.status
        )),
        None => {}
    }
}

/// Replays every certificate in the report.
pub fn verify(report: &Report, budget: &Budget) -> VerifySummary {
    let mut out = VerifySummary::default();
    for (label, v) in &report.claims {
        verify_verdict(&report.group, label, v, budget, &mut out);
    }
    out
}
