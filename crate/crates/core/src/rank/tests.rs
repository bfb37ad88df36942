use super::*;
use crate::leafsys::{diagonal_subgroup, rigid_product};
use crate::quotient::level_stabilizer_generators;

use proptest::prelude::*;

fn grig() -> Arc<GroupDef> {
    builtin("grigorchuk").unwrap()
}

fn gs() -> Arc<GroupDef> {
    builtin("gupta_sidki3").unwrap()
}

fn sub(g: &Arc<GroupDef>, words: &[&str]) -> FgSubgroup {
    let gens = words.iter().map(|w| g.parse_word(w).unwrap()).collect();
    FgSubgroup::new(g.clone(), gens, None, &Budget::default())
}

fn words(g: &GroupDef, ws: &[&str]) -> Vec<Word> {
    ws.iter().map(|w| g.parse_word(w).unwrap()).collect()
}

fn diagonal_chain(b: &Budget) -> DepthChain {
    let g = grig();
    let x1 = LeafSet::full_level(2, 1);
    let k = rigid_product(&g, &x1, b).unwrap();
    let d = diagonal_subgroup(&g, &x1, b).unwrap();
    DepthChain::build(vec![FgSubgroup::whole(&g), k, d], b).unwrap()
}

#[test]
fn trivial_chain_has_depth_zero() {
    let b = Budget::default();
    let chain = DepthChain::build(vec![FgSubgroup::whole(&grig())], &b).unwrap();
    assert!(chain.is_empty());
    let v = verify_depth_chain(&chain, &b).unwrap();
    assert!(v.is_proved());
    assert_eq!(growing_steps(&v, &b), 0);
}

#[test]
fn level_stabilizer_step_has_finite_index() {
    let g = grig();
    let b = Budget::default();
    let st1 = level_stabilizer_generators(&g, 1, &b).unwrap();
    let chain = DepthChain::build(vec![FgSubgroup::whole(&g), st1], &b).unwrap();
    let v = verify_depth_chain(&chain, &b).unwrap();
    assert!(v.part("containment 1").unwrap().is_proved());
    assert!(v.part("index 1").unwrap().is_refuted());
    assert_eq!(growing_steps(&v, &b), 0);
}

#[test]
fn diagonal_chain_grows_at_the_last_step() {
    let b = Budget::default();
    let chain = diagonal_chain(&b);
    let v = verify_depth_chain(&chain, &b).unwrap();
    assert!(v.is_proved());
    assert!(v.part("containment 1").unwrap().is_proved());
    assert!(v.part("containment 2").unwrap().is_proved());
    let last = v.part("index 2").unwrap();
    assert!(last.is_unknown());
    assert!(strictly_growing(
        last.table("index").unwrap(),
        b.growth_window
    ));
    assert_eq!(growing_steps(&v, &b), 1);
}

#[test]
fn chain_text_round_trips() {
    let b = Budget::default();
    let chain = diagonal_chain(&b);
    let text = chain.to_text();
    let back = DepthChain::parse(&text, None, &b).unwrap();
    assert_eq!(back.to_text(), text);
    assert!(verify_depth_chain(&back, &b).unwrap().is_proved());
}

#[test]
fn tampered_chain_is_malformed() {
    let b = Budget::default();
    let text = diagonal_chain(&b).to_text();
    let lines: Vec<&str> = text.lines().collect();
    let pos = lines
        .iter()
        .rposition(|l| l.starts_with("witness"))
        .unwrap();
    let mut bad: Vec<String> = lines.iter().map(|s| s.to_string()).collect();
    let n = lines[pos].matches(';').count() + 1;
    bad[pos] = format!("witness: {}", vec!["#0"; n].join("; "));
    let chain = DepthChain::parse(&bad.join("\n"), None, &b).unwrap();
    assert!(matches!(
        verify_depth_chain(&chain, &b),
        Err(Error::MalformedCertificate(_))
    ));

    let wrong_hash = text.replace("hash ", "hash 00");
    assert!(DepthChain::parse(&wrong_hash, None, &b).is_err());
}

#[test]
fn upper_bound_is_a_power_of_two() {
    for (s, expect) in [("0,1", 4u32), ("-", 2), ("0,10,11", 8)] {
        assert_eq!(
            depth_upper_bound(&LeafSet::parse(2, s).unwrap()),
            BigUint::from(expect)
        );
    }
}

#[test]
fn level_stabilizers_have_rank_zero() {
    let b = Budget::default();
    for g in [grig(), gs()] {
        for n in 0..=3 {
            let h = level_stabilizer_generators(&g, n, &b).unwrap();
            assert_eq!(
                classify(&h, &b).unwrap().kind,
                RankKind::FiniteIndex,
                "{} level {n}",
                g.name()
            );
        }
    }
}

#[test]
fn finite_subgroups_are_in_the_perfect_kernel() {
    let b = Budget::default();
    let g = grig();
    let t = gs();
    for h in [
        sub(&g, &["b"]),
        sub(&g, &["d"]),
        sub(&g, &["a", "d"]),
        sub(&t, &["a"]),
        FgSubgroup::trivial(&g),
    ] {
        assert!(finiteness_verdict(&h, &b).unwrap().is_proved());
        let c = classify(&h, &b).unwrap();
        assert_eq!(
            c.kind,
            RankKind::PerfectKernel(KernelCase::FiniteSection(Vertex::root()))
        );
    }
}

#[test]
fn diagonal_has_finite_rank() {
    let g = grig();
    let b = Budget::default();
    let x1 = LeafSet::full_level(2, 1);
    let d = diagonal_subgroup(&g, &x1, &b).unwrap();
    let c = classify(&d, &b).unwrap();
    let RankKind::FiniteRank {
        lower,
        upper: Some(upper),
    } = c.kind
    else {
        panic!("{}", c.kind)
    };
    let sys = build_lower_leaf_system(&d, &x1, &b).unwrap();
    assert_eq!(upper, depth_upper_bound(sys.final_leaf_set()));
    assert!(lower <= 1 && BigUint::from(1u32) <= upper);
    assert_eq!(lower, 1);
    let chain = verify_depth_chain(&diagonal_chain(&b), &b).unwrap();
    assert!(BigUint::from(growing_steps(&chain, &b)) <= upper);
}

#[test]
fn classify_requires_hypotheses() {
    let text = "group plain\nalphabet 2\ngen a perm (0 1) sections e,e\n";
    let g = GroupDef::parse_text(text).unwrap();
    assert!(!g.hypotheses_asserted());
    assert!(classify(&FgSubgroup::whole(&g), &Budget::default()).is_err());
}

#[test]
fn not_finitely_generated_marker() {
    assert_eq!(
        classify_not_finitely_generated().kind,
        RankKind::PerfectKernel(KernelCase::NotFinitelyGenerated)
    );
}

#[test]
fn alternative_examples() {
    let g = grig();
    let b = Budget::default();
    for h in [
        FgSubgroup::whole(&g),
        level_stabilizer_generators(&g, 1, &b).unwrap(),
    ] {
        match gn_classify(&h, &b).unwrap() {
            GnOutcome::InfraDirect { leaves, verdict } => {
                assert_eq!(leaves, LeafSet::full_level(2, 1));
                assert!(verdict.is_proved());
            }
            other => panic!("{other:?}"),
        }
    }
    match gn_classify(&sub(&g, &["d"]), &b).unwrap() {
        GnOutcome::FiniteSection { vertex, verdict } => {
            assert!(vertex.is_root());
            assert!(verdict.is_proved());
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn alternative_finds_deeper_finite_sections() {
    let g = grig();
    let b = Budget {
        section_search_level: 0,
        ..Budget::default()
    };
    // `⟨b, c⟩` is finite; with the search confined to the root it is still found there.
    let h = sub(&g, &["b", "c"]);
    match gn_classify(&h, &b).unwrap() {
        GnOutcome::FiniteSection { vertex, .. } => assert!(vertex.is_root()),
        other => panic!("{other:?}"),
    }
    // The rigid copy of K below 1 is infinite with trivial sections at 0.
    let h = rigid_product(&g, &LeafSet::parse(2, "1").unwrap(), &b).unwrap();
    match gn_classify(&h, &b).unwrap() {
        GnOutcome::FiniteSection { vertex, .. } => assert_eq!(vertex.to_string(), "0"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn alternative_depth_bound_gives_unknown() {
    let g = grig();
    let b = Budget {
        gn_depth: 0,
        ..Budget::default()
    };
    assert!(matches!(
        gn_classify(&FgSubgroup::whole(&g), &b).unwrap(),
        GnOutcome::Unknown { .. }
    ));
}

#[test]
fn neighborhood_examples() {
    let g = grig();
    let b = Budget::default();
    let h = sub(&g, &["a", "b"]);
    assert!(neighborhood_contains(&h, &[], h.gens(), &b)
        .unwrap()
        .is_proved());
    let bb = sub(&g, &["b"]);
    let v = neighborhood_contains(&bb, &words(&g, &["a"]), &[], &b).unwrap();
    assert!(v.is_proved());
    let Certificate::Composite(parts) = &v.certificate else {
        panic!()
    };
    assert!(matches!(
        parts[0].1.certificate,
        Certificate::Separation { level: 1, .. }
    ));
    let bw = words(&g, &["b"]);
    assert!(neighborhood_contains(&bb, &bw, &bw, &b)
        .unwrap()
        .is_refuted());
    assert!(neighborhood_contains(&bb, &[], &words(&g, &["a"]), &b)
        .unwrap()
        .is_refuted());
    assert!(neighborhood_contains(&h, &words(&g, &["abab"]), &[], &b)
        .unwrap()
        .is_refuted());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn neighborhood_witnesses_replay(picks in prop::collection::vec(0usize..12, 0..5)) {
        let g = grig();
        let b = Budget::default();
        let h = sub(&g, &["a", "b"]);
        let pool = words(&g, &["a", "b", "ab", "ba", "aba", "bab", "abab", "c", "d", "ac", "ad", "cd"]);
        let contain: Vec<Word> = picks.iter().map(|&i| pool[i].clone()).collect();
        let v = neighborhood_contains(&h, &[], &contain, &b).unwrap();
        if let Certificate::Composite(parts) = &v.certificate {
            for (_, p) in parts {
                if let Certificate::Witnesses { over, witnesses } = &p.certificate {
                    let owner = FgSubgroup::new(g.clone(), over.clone(), None, &b);
                    for w in witnesses {
                        prop_assert!(w.check(&owner, b.pair_budget));
                    }
                }
            }
        }
        // Adding a member of C can only keep or lose a Proved verdict.
        let smaller = neighborhood_contains(&h, &[], &contain[..contain.len().saturating_sub(1)], &b).unwrap();
        if v.is_proved() {
            prop_assert!(smaller.is_proved());
        }
        let in_h = contain.iter().all(|w| separation_level(&h, w, &b).unwrap().is_none());
        prop_assert_eq!(v.is_refuted(), !in_h);
    }
}
