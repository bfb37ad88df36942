//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion does.

use std::collections::{HashSet, VecDeque};
use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use branchlab_core::leafsys::{
    build_j, build_lower_leaf_system, diagonal_subgroup, invariant_independent_family,
    is_invariant, rigid_product,
};
use branchlab_core::quotient::{level_stabilizer_generators, quotient_order, LevelQuotient};
use branchlab_core::rank::{
    classify, gn_classify, verify_depth_chain, DepthChain, GnOutcome, KernelCase, RankKind,
};
use branchlab_core::report::{self, Report};
use branchlab_core::ssgroup::builtin;
use branchlab_core::subgroup::{
    approximate, finite_index_certificate, finiteness_verdict, infra_direct_verdict, section_group,
    strictly_growing,
};
use branchlab_core::tree::{is_independent, level_vertices, shadow};
use branchlab_core::{Budget, FgSubgroup, GroupDef, LeafSet, Verdict, Vertex, Word};
use num_bigint::BigUint;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Proved verdicts gathered for the replay criterion, by group.
#[derive(Default)]
struct Claims {
    grig: Vec<(String, Verdict)>,
    gs: Vec<(String, Verdict)>,
}

impl Claims {
    fn push(&mut self, group: &GroupDef, label: String, v: &Verdict) {
        if !v.is_proved() {
            return;
        }
        let list = if group.name() == "grigorchuk" {
            &mut self.grig
        } else {
            &mut self.gs
        };
        list.push((label, v.clone()));
    }
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn grig() -> Arc<GroupDef> {
    builtin("grigorchuk").unwrap()
}

fn gs() -> Arc<GroupDef> {
    builtin("gupta_sidki3").unwrap()
}

fn sub(g: &Arc<GroupDef>, words: &[&str], b: &Budget) -> FgSubgroup {
    let gens = words.iter().map(|w| g.parse_word(w).unwrap()).collect();
    FgSubgroup::new(g.clone(), gens, None, b)
}

fn set(arity: usize, s: &str) -> LeafSet {
    LeafSet::parse(arity, s).unwrap()
}

/// Permutation of `X^n` induced by `w`, computed vertex by vertex.
fn level_images(g: &GroupDef, w: &Word, n: usize) -> Vec<usize> {
    let arity = g.arity();
    level_vertices(arity, n)
        .map(|v| g.act(w, &v).unwrap().index(arity))
        .collect()
}

/// Order of the permutation group generated by `gens`, by breadth-first closure.
fn brute_force_order(gens: &[Vec<usize>]) -> usize {
    let id: Vec<usize> = (0..gens[0].len()).collect();
    let mut seen = HashSet::from([id.clone()]);
    let mut queue = VecDeque::from([id]);
    while let Some(p) = queue.pop_front() {
        for s in gens {
            let q: Vec<usize> = p.iter().map(|&i| s[i]).collect();
            if seen.insert(q.clone()) {
                queue.push_back(q);
            }
        }
    }
    seen.len()
}

/// Group, depth of the action cross-check, relations.
type RelationSuite = (
    Arc<GroupDef>,
    usize,
    &'static [(&'static str, &'static str)],
);

fn relations(claims: &mut Claims, b: &Budget) -> Outcome {
    let start = Instant::now();
    let suites: [RelationSuite; 2] = [
        (
            grig(),
            10,
            &[
                ("aa", "e"),
                ("bb", "e"),
                ("cc", "e"),
                ("dd", "e"),
                ("bc", "d"),
                ("cd", "b"),
                ("db", "c"),
            ],
        ),
        (gs(), 6, &[("aaa", "e"), ("ttt", "e")]),
    ];
    let mut failures = Vec::new();
    let mut count = 0;
    for (g, depth, rels) in suites.iter() {
        for (l, r) in rels.iter() {
            count += 1;
            let (lw, rw) = (g.parse_word(l).unwrap(), g.parse_word(r).unwrap());
            let v = g.equals(&lw, &rw, b.pair_budget);
            let agree = level_images(g, &lw, *depth) == level_images(g, &rw, *depth);
            if !v.is_proved() || !agree {
                failures.push(format!("{}: {l}={r}", g.name()));
            }
            claims.push(g, format!("relation {l} = {r}"), &v);
        }
    }
    let t = start.elapsed();
    outcome(
        failures.is_empty() && t < Duration::from_secs(5),
        format!(
            "{count} relations, failures {failures:?}, {:.2}s",
            t.as_secs_f64()
        ),
    )
}

fn quotient_orders(b: &Budget) -> Outcome {
    let start = Instant::now();
    let cases = [
        (grig(), 1, 2usize),
        (grig(), 2, 8),
        (grig(), 3, 128),
        (gs(), 1, 3),
    ];
    let mut rows = Vec::new();
    let mut ok = true;
    for (g, n, expected) in cases {
        let gens: Vec<Vec<usize>> = g
            .gen_words()
            .iter()
            .map(|w| level_images(&g, w, n))
            .collect();
        let oracle = brute_force_order(&gens);
        let chain = LevelQuotient::new(&g, n, b).unwrap().order();
        ok &= oracle == expected && chain == BigUint::from(expected);
        rows.push(format!(
            "{} level {n}: oracle {oracle}, chain {chain}",
            g.name()
        ));
    }
    let t = start.elapsed();
    outcome(
        ok && t < Duration::from_secs(10),
        format!("{}; {:.2}s", rows.join("; "), t.as_secs_f64()),
    )
}

fn random_word(g: &GroupDef, rng: &mut StdRng, max_len: usize) -> Word {
    let len = rng.gen_range(0..=max_len);
    let gens = g.gen_words();
    let mut w = Word::empty();
    for _ in 0..len {
        let x = &gens[rng.gen_range(0..gens.len())];
        w = w.concat(&if rng.gen_bool(0.5) {
            x.clone()
        } else {
            x.inverse()
        });
    }
    w
}

fn section_law(b: &Budget) -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5ec7);
    let mut checks = 0;
    let mut failures = 0;
    for g in [grig(), gs()] {
        let verts: Vec<Vertex> = (0..=3).flat_map(|n| level_vertices(g.arity(), n)).collect();
        for _ in 0..200 {
            let x = random_word(&g, &mut rng, 12);
            let y = random_word(&g, &mut rng, 12);
            let xy = g.mul(&x, &y);
            for u in &verts {
                let lhs = g.section(&xy, u).unwrap();
                let rhs = g.mul(
                    &g.section(&x, &g.act(&y, u).unwrap()).unwrap(),
                    &g.section(&y, u).unwrap(),
                );
                checks += 1;
                if !g.equals(&lhs, &rhs, b.pair_budget).is_proved() {
                    failures += 1;
                }
            }
        }
    }
    outcome(
        failures == 0,
        format!("{checks} checks over 200 pairs per group, {failures} failures"),
    )
}

fn self_replication(b: &Budget) -> Outcome {
    let mut checks = 0;
    let mut failures = Vec::new();
    for g in [grig(), gs()] {
        let full: Vec<BigUint> = (1..=4).map(|m| quotient_order(&g, m, b).unwrap()).collect();
        for n in 1..=2 {
            let st = level_stabilizer_generators(&g, n, b).unwrap();
            for x in level_vertices(g.arity(), n) {
                let secs: Vec<Word> = st
                    .gens()
                    .iter()
                    .map(|w| g.section(w, &x).unwrap())
                    .collect();
                let s = FgSubgroup::new(g.clone(), secs, None, b);
                for m in 1..=4 {
                    checks += 1;
                    if approximate(&s, m, b).unwrap().order() != full[m - 1] {
                        failures.push(format!("{} n={n} x={x} m={m}", g.name()));
                    }
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("{checks} checks, failures {failures:?}"),
    )
}

fn monotone_approximation(claims: &mut Claims, b: &Budget) -> Outcome {
    let g = grig();
    let cases = [
        ("<b>", sub(&g, &["b"], b), false),
        ("<a,b>", sub(&g, &["a", "b"], b), false),
        (
            "st_G(1)",
            level_stabilizer_generators(&g, 1, b).unwrap(),
            true,
        ),
        (
            "D(X^1)",
            diagonal_subgroup(&g, &LeafSet::full_level(2, 1), b).unwrap(),
            false,
        ),
    ];
    let mut ok = true;
    let mut rows = Vec::new();
    for (name, h, finite_index) in cases {
        let trace = h.index_trace(4, b).unwrap();
        let monotone = trace.windows(2).all(|w| w[0] <= w[1]);
        ok &= monotone;
        let mut row = format!("{name} {trace:?}");
        if finite_index {
            let cert = finite_index_certificate(&h, b).unwrap();
            let proved = cert.as_ref().is_some_and(Verdict::is_proved);
            let stable = trace.windows(2).last().is_some_and(|w| w[0] == w[1]);
            ok &= proved && stable;
            row.push_str(if proved { " certified" } else { " uncertified" });
            if let Some(v) = cert {
                claims.push(&g, format!("finite index {name}"), &v);
            }
        }
        rows.push(row);
    }
    outcome(ok, rows.join("; "))
}

fn shadow_invariance(b: &Budget) -> Outcome {
    let g = grig();
    let h = sub(&g, &["b"], b);
    let t: Vec<Vertex> = level_vertices(2, 1)
        .filter(|v| {
            finiteness_verdict(&section_group(&h, v, b).unwrap(), b)
                .unwrap()
                .is_proved()
        })
        .collect();
    if t.is_empty() {
        return outcome(false, "no finite-section vertex at level 1");
    }
    let t = LeafSet::new(2, t).unwrap();
    let mut failures = 0;
    for n in 2..=5 {
        let s = shadow(&t, n).unwrap();
        let members = s.to_explicit();
        for w in h.gens() {
            for v in &members {
                if !members.contains(&g.act(w, v).unwrap()) {
                    failures += 1;
                }
            }
        }
        if !is_invariant(&h, &s) {
            failures += 1;
        }
    }
    outcome(
        failures == 0,
        format!("T = {t}, levels 2..=5, {failures} failures"),
    )
}

fn independent_families(b: &Budget) -> Outcome {
    let g = grig();
    let cases = [
        ("<b>", sub(&g, &["b"], b), set(2, "0")),
        ("<d>", sub(&g, &["d"], b), set(2, "0")),
    ];
    let mut ok = true;
    let mut rows = Vec::new();
    for (name, h, t) in cases {
        match invariant_independent_family(&h, &t, 3, 2, b) {
            Ok(fam) => {
                let good = fam.len() == 3
                    && is_independent(&fam)
                    && fam.iter().all(|y| is_invariant(&h, y))
                    && fam
                        .iter()
                        .flat_map(LeafSet::vertices)
                        .all(|v| v.level() >= 2);
                ok &= good;
                let shown: Vec<String> = fam.iter().map(ToString::to_string).collect();
                rows.push(format!("{name}: [{}]", shown.join(" | ")));
            }
            Err(e) => {
                ok = false;
                rows.push(format!("{name}: {e}"));
            }
        }
    }
    outcome(ok, rows.join("; "))
}

fn witness_distinctness(claims: &mut Claims, b: &Budget) -> Outcome {
    let g = grig();
    let h = sub(&g, &["b"], b);
    let fam = invariant_independent_family(&h, &set(2, "0"), 2, 2, b).unwrap();
    let joined = |i: usize| {
        let j = build_j(&g, &fam, &[i], b).unwrap();
        let mut gens = h.gens().to_vec();
        gens.extend_from_slice(j.gens());
        FgSubgroup::new(g.clone(), gens, None, b)
    };
    let (with, without) = (joined(0), joined(1));
    for v in fam[0].vertices() {
        let s_with = section_group(&with, &v, b).unwrap();
        let s_without = section_group(&without, &v, b).unwrap();
        let fin = finiteness_verdict(&s_without, b).unwrap();
        let grow = s_with.order_trace(4, b).unwrap();
        if fin.is_proved() && grow.windows(2).all(|w| w[0] < w[1]) {
            claims.push(&g, format!("finite section of HJ at {v}"), &fin);
            return outcome(
                true,
                format!("at {v}: one side finite, other orders {grow:?}"),
            );
        }
    }
    outcome(false, format!("no separating coordinate in {}", fam[0]))
}

fn diagonal_depth(claims: &mut Claims, b: &Budget) -> Outcome {
    let g = grig();
    let x1 = LeafSet::full_level(2, 1);
    let d = diagonal_subgroup(&g, &x1, b).unwrap();
    let infra = infra_direct_verdict(&d, &x1, b).unwrap();
    let k = rigid_product(&g, &x1, b).unwrap();
    let chain = DepthChain::build(vec![FgSubgroup::whole(&g), k, d], b).unwrap();
    let v = verify_depth_chain(&chain, b).unwrap();
    claims.push(&g, "infra-direct D(X^1)".into(), &infra);
    claims.push(&g, "chain G > K^(X^1) > D(X^1)".into(), &v);
    let last = v
        .part(&format!("index {}", chain.len()))
        .and_then(|p| p.table("index"))
        .map(<[BigUint]>::to_vec);
    let growing = last
        .as_deref()
        .is_some_and(|t| strictly_growing(t, b.growth_window));
    let contained = (1..=chain.len()).all(|i| {
        v.part(&format!("containment {i}"))
            .is_some_and(Verdict::is_proved)
    });
    outcome(
        infra.is_proved() && contained && growing,
        format!(
            "infra {:?}, containments proved {contained}, last index trace {last:?}",
            infra.status
        ),
    )
}

fn classification(claims: &mut Claims, b: &Budget) -> Outcome {
    let start = Instant::now();
    let g = grig();
    let mut ok = true;
    let mut rows = Vec::new();
    for n in 0..=3 {
        let st = level_stabilizer_generators(&g, n, b).unwrap();
        let c = classify(&st, b).unwrap();
        ok &= c.kind == RankKind::FiniteIndex;
        claims.push(&g, format!("classify st_G({n})"), &c.evidence);
        rows.push(format!("st_G({n}): {}", c.kind));
    }
    for w in ["b", "d"] {
        let c = classify(&sub(&g, &[w], b), b).unwrap();
        ok &= matches!(
            c.kind,
            RankKind::PerfectKernel(KernelCase::FiniteSection(_))
        );
        claims.push(&g, format!("classify <{w}>"), &c.evidence);
        rows.push(format!("<{w}>: {}", c.kind));
    }
    let x1 = LeafSet::full_level(2, 1);
    let d = diagonal_subgroup(&g, &x1, b).unwrap();
    let c = classify(&d, b).unwrap();
    let sys = build_lower_leaf_system(&d, &x1, b).unwrap();
    let expected = sys
        .is_complete()
        .then(|| BigUint::from(1u32) << sys.final_leaf_set().len());
    match &c.kind {
        RankKind::FiniteRank { lower, upper } => {
            let contains_one =
                *lower <= 1 && upper.as_ref().is_some_and(|u| *u >= BigUint::from(1u32));
            ok &= contains_one && expected.is_some() && *upper == expected;
        }
        _ => ok = false,
    }
    rows.push(format!(
        "D(X^1): {} with |Y_n| = {}",
        c.kind,
        sys.final_leaf_set().len()
    ));
    for (name, h) in [
        ("G", FgSubgroup::whole(&g)),
        ("st_G(1)", level_stabilizer_generators(&g, 1, b).unwrap()),
    ] {
        match gn_classify(&h, b).unwrap() {
            GnOutcome::InfraDirect { leaves, verdict } => {
                ok &= leaves == x1;
                claims.push(&g, format!("gn {name}"), &verdict);
                rows.push(format!("gn {name}: infra-direct over {leaves}"));
            }
            _ => {
                ok = false;
                rows.push(format!("gn {name}: wrong case"));
            }
        }
    }
    match gn_classify(&sub(&g, &["d"], b), b).unwrap() {
        GnOutcome::FiniteSection { vertex, verdict } => {
            claims.push(&g, "gn <d>".into(), &verdict);
            rows.push(format!("gn <d>: finite section at {vertex}"));
        }
        _ => {
            ok = false;
            rows.push("gn <d>: wrong case".into());
        }
    }
    let t = start.elapsed();
    rows.push(format!("{:.1}s", t.as_secs_f64()));
    outcome(ok && t < Duration::from_secs(60), rows.join("; "))
}

fn replay(claims: &Claims, b: &Budget) -> Outcome {
    let mut ok = true;
    let mut rows = Vec::new();
    for (g, list) in [(grig(), &claims.grig), (gs(), &claims.gs)] {
        let mut r = Report::new(&g);
        for (label, v) in list {
            r.push(label.clone(), v.clone());
        }
        let text = r.to_text();
        let parsed = Report::parse(&text).unwrap();
        let summary = report::verify(&parsed, b);
        let stable = parsed.to_text() == text;
        let mut again = Report::new(&g);
        for (label, v) in list {
            again.push(label.clone(), v.clone());
        }
        let deterministic = again.to_text() == text;
        ok &= summary.is_ok() && summary.checked >= list.len() && stable && deterministic;
        rows.push(format!(
            "{}: {} claims, {} certificates checked, {} failures",
            g.name(),
            list.len(),
            summary.checked,
            summary.failures.len()
        ));
    }
    let (mut first, mut second) = (Claims::default(), Claims::default());
    let b2 = b.clone();
    relations(&mut first, b);
    relations(&mut second, &b2);
    let rerun = |c: &Claims| {
        let mut r = Report::new(&grig());
        for (l, v) in &c.grig {
            r.push(l.clone(), v.clone());
        }
        r.to_text()
    };
    let same = rerun(&first) == rerun(&second);
    ok &= same;
    rows.push(format!("recomputed report identical: {same}"));
    outcome(ok, rows.join("; "))
}

#[test]
fn acceptance() {
    let b = Budget::default();
    let mut claims = Claims::default();
    let results = [
        ("1 relations", relations(&mut claims, &b)),
        ("2 quotient orders", quotient_orders(&b)),
        ("3 section law", section_law(&b)),
        ("4 strong self-replication", self_replication(&b)),
        (
            "5 monotone approximation",
            monotone_approximation(&mut claims, &b),
        ),
        ("6 shadow invariance", shadow_invariance(&b)),
        ("7 independent families", independent_families(&b)),
        (
            "8 witness distinctness",
            witness_distinctness(&mut claims, &b),
        ),
        ("9 diagonal depth", diagonal_depth(&mut claims, &b)),
        ("10 classification", classification(&mut claims, &b)),
    ];
    let eleven = replay(&claims, &b);
    let mut failed = Vec::new();
    for (name, o) in results
        .iter()
        .chain(std::iter::once(&("11 certificate replay", eleven)))
    {
        // Written past the test harness capture so the lines always show.
        let line = format!(
            "{} criterion {name}: {}\n",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        std::io::stdout().write_all(line.as_bytes()).unwrap();
        if !o.pass {
            failed.push(*name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
