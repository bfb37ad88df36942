use super::*;
use crate::tree::level_vertices;

use proptest::prelude::*;

fn grig() -> Arc<GroupDef> {
    builtin("grigorchuk").unwrap()
}

fn gs() -> Arc<GroupDef> {
    builtin("gupta_sidki3").unwrap()
}

fn v(s: &str) -> Vertex {
    s.parse().unwrap()
}

/// Applies a word symbol by symbol straight from the recursion table,
/// without any rewriting.
fn naive_act(g: &GroupDef, w: &Word, vert: &[u8]) -> Vec<u8> {
    let mut cur = vert.to_vec();
    for &s in w.syms().iter().rev() {
        cur = naive_sym(g, s, &cur);
    }
    cur
}

fn naive_sym(g: &GroupDef, s: Sym, vert: &[u8]) -> Vec<u8> {
    let Some((&x, rest)) = vert.split_first() else {
        return Vec::new();
    };
    let gd = &g.gens()[s.gen as usize];
    if !s.inv {
        let mut out = vec![gd.perm[x as usize]];
        out.extend(naive_act(g, &gd.sections[x as usize], rest));
        out
    } else {
        // s^{-1}(x w) = y s_y^{-1}(w) where s(y) = x
        let y = gd.perm.iter().position(|&p| p == x).unwrap();
        let mut out = vec![y as u8];
        out.extend(naive_act(g, &gd.sections[y].inverse(), rest));
        out
    }
}

fn agree_on_level(g: &GroupDef, a: &Word, b: &Word, n: usize) -> bool {
    level_vertices(g.arity(), n)
        .all(|u| naive_act(g, a, u.letters()) == naive_act(g, b, u.letters()))
}

#[test]
fn act_examples() {
    let g = grig();
    let a = g.parse_word("a").unwrap();
    let b = g.parse_word("b").unwrap();
    assert_eq!(g.act(&a, &v("011")).unwrap(), v("111"));
    assert_eq!(g.act(&b, &v("0")).unwrap(), v("0"));
    assert_eq!(g.act(&b, &v("01")).unwrap(), v("00"));
    assert_eq!(naive_act(&g, &b, &[0, 1]), vec![0, 0]);
    assert!(matches!(
        g.act(&a, &v("2")),
        Err(Error::AlphabetMismatch { .. })
    ));
}

#[test]
fn section_examples() {
    let g = grig();
    let w = |s: &str| g.parse_word(s).unwrap();
    assert_eq!(g.section(&w("b"), &v("0")).unwrap(), w("a"));
    let ab1 = g.section(&w("ab"), &v("1")).unwrap();
    assert_eq!(ab1, w("c"));
    // Cross-check the composition law by action agreement below vertex 1.
    for n in 0..=8 {
        for tail in level_vertices(2, n) {
            let full = v("1").concat(&tail);
            let image = naive_act(&g, &w("ab"), full.letters());
            let head = naive_act(&g, &w("ab"), &[1]);
            let mut expect = head.clone();
            expect.extend(naive_act(&g, &ab1, tail.letters()));
            assert_eq!(image, expect);
        }
    }
    let h = gs();
    assert_eq!(
        h.section(&h.parse_word("t").unwrap(), &v("2")).unwrap(),
        h.parse_word("t").unwrap()
    );
}

#[test]
fn level_action_examples() {
    let g = grig();
    assert!(g.act_on_level(&Word::empty(), 3).unwrap().is_identity());
    let a1 = g.act_on_level(&g.parse_word("a").unwrap(), 1).unwrap();
    assert_eq!(a1.level_cycle_string(2, 1), "(0 1)");
    let h = gs();
    let a1 = h.act_on_level(&h.parse_word("a").unwrap(), 1).unwrap();
    assert_eq!(a1.level_cycle_string(3, 1), "(0 1 2)");
}

#[test]
fn level_action_matches_naive_action() {
    for g in [grig(), gs()] {
        let n = if g.arity() == 2 { 6 } else { 4 };
        for s in ["a", "b", "ab", "abcd", "t", "at'a'"] {
            let Ok(w) = g.parse_word(s) else { continue };
            let p = g.act_on_level(&w, n).unwrap();
            for u in level_vertices(g.arity(), n) {
                let img = Vertex::from_letters(naive_act(&g, &w, u.letters()));
                assert_eq!(p.apply(u.index(g.arity())), img.index(g.arity()));
            }
            // Projection to the level above is consistent.
            assert_eq!(
                p.project_down(g.arity()),
                g.act_on_level(&w, n - 1).unwrap()
            );
        }
    }
}

#[test]
fn equality_examples() {
    let g = grig();
    let w = |s: &str| g.parse_word(s).unwrap();
    // Unreduced words go through the bisimulation.
    let aa = Word::from_syms(vec![Sym::new(0), Sym::new(0)]);
    assert!(g.equals(&aa, &Word::empty(), 1000).is_proved());
    let bc = Word::from_syms(vec![Sym::new(1), Sym::new(2)]);
    assert!(g.equals(&bc, &w("d"), 1000).is_proved());
    assert!(agree_on_level(&g, &bc, &w("d"), 10));
    let r = g.equals(&w("a"), &w("b"), 1000);
    assert!(r.is_refuted());
    match r.certificate {
        Certificate::WitnessVertex { vertex, .. } => assert_eq!(vertex, v("0")),
        other => panic!("unexpected certificate {other:?}"),
    }
}

#[test]
fn equality_budget_gives_unknown() {
    let g = grig();
    // (ab)^16 is trivial but the rewriting rules do not see it.
    let x = g.parse_word("(ab)^16").unwrap();
    assert_eq!(x.len(), 32);
    assert!(g.equals(&x, &Word::empty(), 10_000).is_proved());
    let r = g.equals(&x, &Word::empty(), 1);
    assert!(r.is_unknown());
    assert!(r.bound.is_some());
}

#[test]
fn builtin_shapes() {
    assert_eq!(grig().num_gens(), 4);
    assert_eq!(grig().arity(), 2);
    assert_eq!(gs().num_gens(), 2);
    assert_eq!(gs().arity(), 3);
    assert!(builtin("nope").is_err());
}

#[test]
fn builtin_relations_hold() {
    let g = grig();
    let raw = |s: &str| {
        super::parse::parse_word_with(
            &g.gens().iter().map(|x| x.name.clone()).collect::<Vec<_>>(),
            s,
        )
        .unwrap()
    };
    for (l, r) in [
        ("aa", "e"),
        ("bb", "e"),
        ("cc", "e"),
        ("dd", "e"),
        ("bc", "d"),
        ("cd", "b"),
        ("db", "c"),
    ] {
        assert!(g.equals(&raw(l), &raw(r), 10_000).is_proved(), "{l} = {r}");
    }
    let h = gs();
    let raw = |s: &str| super::parse::parse_word_with(&["a".into(), "t".into()], s).unwrap();
    for (l, r) in [("aaa", "e"), ("ttt", "e")] {
        assert!(h.equals(&raw(l), &raw(r), 10_000).is_proved());
    }
}

#[test]
fn portrait_examples() {
    let g = grig();
    let p = g.portrait(&Word::empty(), 3, 1000).unwrap();
    assert!(p.labels.iter().all(|(_, q)| q.is_identity()));
    let d = g.portrait(&g.parse_word("d").unwrap(), 1, 1000).unwrap();
    assert!(d.labels[0].1.is_identity());
    assert_eq!(
        d.frontier,
        vec![
            (v("0"), Word::empty()),
            (v("1"), g.parse_word("b").unwrap())
        ]
    );
    let a = g.portrait(&g.parse_word("a").unwrap(), 2, 1000).unwrap();
    assert_eq!(a.labels[0].1.cycle_string(|x| x.to_string()), "(0 1)");
    assert!(a.labels[1..].iter().all(|(_, q)| q.is_identity()));
    assert!(a.to_dot(&g).starts_with("digraph"));
    assert!(g.portrait(&Word::empty(), 30, 1000).is_err());
}

#[test]
fn text_roundtrip() {
    for g in [grig(), gs()] {
        let again = GroupDef::parse_text(&g.to_text()).unwrap();
        assert_eq!(again.to_text(), g.to_text());
        assert_eq!(again.hash(), g.hash());
    }
}

#[test]
fn parse_errors() {
    assert!(GroupDef::parse_text("alphabet 2\ngen a perm (0 1) sections e,q\n").is_err());
    assert!(
        GroupDef::parse_text("alphabet 2\ngen a perm (0 1) sections e,e\nrule a -> aa\n").is_err()
    );
    assert!(GroupDef::parse_text("alphabet 2\nfrobnicate\n").is_err());
    let g = grig();
    assert!(g.parse_word("ax").is_err());
    assert_eq!(
        g.parse_word("(ab)^2").unwrap(),
        g.parse_word("abab").unwrap()
    );
    assert_eq!(g.parse_word("b^-1").unwrap(), g.parse_word("b").unwrap());
}

fn word_strategy(ngens: usize, max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec((0..ngens, any::<bool>()), 0..=max_len).prop_map(|v| {
        Word::from_syms(
            v.into_iter()
                .map(|(g, inv)| Sym { gen: g as u16, inv })
                .collect(),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reduction_preserves_action(w in word_strategy(4, 16)) {
        let g = grig();
        let r = g.reduce(&w);
        prop_assert!(r.len() <= w.len());
        prop_assert!(agree_on_level(&g, &w, &r, 7));
    }

    #[test]
    fn section_identity(gw in word_strategy(4, 12), hw in word_strategy(4, 12), ui in 0usize..16, ul in 0usize..=4) {
        let g = grig();
        let gh = g.mul(&gw, &hw);
        let u = Vertex::from_index(ui % (1 << ul), ul, 2);
        let sec = g.section(&gh, &u).unwrap();
        let hu = g.act(&hw, &u).unwrap();
        for wv in (0..=3).flat_map(|n| level_vertices(2, n)) {
            let lhs = g.act(&gh, &u.concat(&wv)).unwrap();
            let rhs = g.act(&gw, &hu).unwrap().concat(&g.act(&sec, &wv).unwrap());
            prop_assert_eq!(lhs, rhs);
        }
        // (gh)_u = g_{h(u)} h_u
        let composed = g.mul(&g.section(&gw, &hu).unwrap(), &g.section(&hw, &u).unwrap());
        prop_assert!(g.equals(&sec, &composed, 10_000).is_proved());
    }

    #[test]
    fn equality_is_symmetric(a in word_strategy(2, 10), b in word_strategy(2, 10)) {
        let h = gs();
        let ab = h.equals(&a, &b, 10_000).status;
        let ba = h.equals(&b, &a, 10_000).status;
        prop_assert_eq!(ab, ba);
        let r = h.equals(&a, &b, 10_000);
        if r.is_proved() {
            prop_assert!(agree_on_level(&h, &a, &b, 5));
        }
        if let Certificate::WitnessVertex { vertex: wv, .. } = &r.certificate {
            prop_assert_ne!(naive_act(&h, &a, wv.letters()), naive_act(&h, &b, wv.letters()));
        }
    }
}
