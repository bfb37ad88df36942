//! Cayley-ball search for membership witnesses.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::{approximate, Expr, FgSubgroup, MembershipWitness};
use crate::config::Budget;
use crate::error::Result;
use crate::perm::Perm;
use crate::quotient::PermGroup;
use crate::ssgroup::Word;

#[derive(Debug)]
pub(crate) struct BallElem {
    pub word: Word,
    pub expr: Expr,
    pub sig: Perm,
}

/// Elements of a subgroup reached by breadth-first multiplication,
/// deduplicated by their action on a fixed level and, within a level
/// signature, by the equality test.
#[derive(Debug)]
pub(crate) struct Ball {
    pub elems: Vec<BallElem>,
    by_sig: HashMap<Perm, Vec<usize>>,
    /// No new elements were left unexplored: the subgroup is finite and listed.
    pub complete: bool,
}

impl Ball {
    fn build(
        h: &FgSubgroup,
        level: usize,
        max_elems: usize,
        max_depth: usize,
        pair_budget: usize,
    ) -> Result<Ball> {
        let group = h.group();
        let id = Perm::identity(group.arity().pow(level as u32));
        let mut steps = Vec::new();
        for (i, g) in h.gens().iter().enumerate() {
            let p = group.act_on_level(g, level)?;
            steps.push(((i, false), g.clone(), p.clone()));
            steps.push(((i, true), group.inverse(g), p.inverse()));
        }
        let mut ball = Ball {
            elems: Vec::new(),
            by_sig: HashMap::new(),
            complete: true,
        };
        ball.push(BallElem {
            word: Word::empty(),
            expr: Expr::empty(),
            sig: id,
        });
        let mut i = 0;
        while i < ball.elems.len() {
            if ball.elems[i].expr.len() >= max_depth {
                ball.complete = false;
                break;
            }
            for (sym, w, p) in &steps {
                let last = ball.elems[i].expr.syms().last().copied();
                if last == Some((sym.0, !sym.1)) {
                    continue;
                }
                let word = group.mul(&ball.elems[i].word, w);
                let sig = ball.elems[i].sig.compose(p);
                if ball.find(group, &sig, &word, pair_budget).is_some() {
                    continue;
                }
                if ball.elems.len() >= max_elems {
                    ball.complete = false;
                    return Ok(ball);
                }
                let expr = ball.elems[i].expr.concat(&Expr::from_syms(vec![*sym]));
                ball.push(BallElem { word, expr, sig });
            }
            i += 1;
        }
        Ok(ball)
    }

    fn push(&mut self, e: BallElem) {
        self.by_sig
            .entry(e.sig.clone())
            .or_default()
            .push(self.elems.len());
        self.elems.push(e);
    }

    /// Index of an element equal to `word`, among those with signature `sig`.
    pub fn find(
        &self,
        group: &crate::ssgroup::GroupDef,
        sig: &Perm,
        word: &Word,
        pair_budget: usize,
    ) -> Option<usize> {
        let bucket = self.by_sig.get(sig)?;
        if let Some(&j) = bucket.iter().find(|&&j| &self.elems[j].word == word) {
            return Some(j);
        }
        bucket.iter().copied().find(|&j| {
            group
                .equals(&self.elems[j].word, word, pair_budget)
                .is_proved()
        })
    }

    pub fn bucket(&self, sig: &Perm) -> &[usize] {
        self.by_sig.get(sig).map(Vec::as_slice).unwrap_or(&[])
    }
}

type BallKey = (String, Vec<Word>, usize, usize, usize);
type ImageKey = (String, Vec<Word>, usize);

fn ball_cache() -> &'static Mutex<HashMap<BallKey, Arc<Ball>>> {
    static CACHE: OnceLock<Mutex<HashMap<BallKey, Arc<Ball>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

fn image_cache() -> &'static Mutex<HashMap<ImageKey, Arc<PermGroup>>> {
    static CACHE: OnceLock<Mutex<HashMap<ImageKey, Arc<PermGroup>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// The ball of `h` with at most `max_elems` elements, memoized per generator list.
pub(crate) fn ball(
    h: &FgSubgroup,
    max_elems: usize,
    max_depth: usize,
    budget: &Budget,
) -> Result<Arc<Ball>> {
    let level = budget.signature_level(h.group().arity());
    let key = (
        h.group().hash(),
        h.gens().to_vec(),
        level,
        max_elems,
        max_depth,
    );
    if let Some(b) = ball_cache().lock().expect("cache poisoned").get(&key) {
        return Ok(b.clone());
    }
    let b = Arc::new(Ball::build(
        h,
        level,
        max_elems,
        max_depth,
        budget.pair_budget,
    )?);
    ball_cache()
        .lock()
        .expect("cache poisoned")
        .insert(key, b.clone());
    Ok(b)
}

/// `π_L(H)` at the signature level, memoized per generator list.
pub(crate) fn signature_image(h: &FgSubgroup, budget: &Budget) -> Result<Arc<PermGroup>> {
    let level = budget.signature_level(h.group().arity());
    let key = (h.group().hash(), h.gens().to_vec(), level);
    if let Some(g) = image_cache().lock().expect("cache poisoned").get(&key) {
        return Ok(g.clone());
    }
    let img = Arc::new(crate::quotient::image_unchecked(h, level, budget)?);
    image_cache()
        .lock()
        .expect("cache poisoned")
        .insert(key, img.clone());
    Ok(img)
}

/// Searches for an expression of `target` in the generators of `h`.
///
/// Targets outside `π_L(H)` are rejected at once. Otherwise the ball of
/// `h` is searched for `target` and for products `x·y` of two ball
/// elements; every hit is confirmed by the equality test.
pub fn find_witness(
    h: &FgSubgroup,
    target: &Word,
    budget: &Budget,
) -> Result<Option<MembershipWitness>> {
    let group = h.group();
    let target = group.reduce(target);
    let found = |expression: Expr| {
        Some(MembershipWitness {
            target: target.clone(),
            expression,
        })
    };
    if target.is_empty() {
        return Ok(found(Expr::empty()));
    }
    for (i, g) in h.gens().iter().enumerate() {
        if *g == target {
            return Ok(found(Expr::gen(i)));
        }
        if group.inverse(g) == target {
            return Ok(found(Expr::from_syms(vec![(i, true)])));
        }
    }
    if h.is_trivial() {
        return Ok(None);
    }
    let level = budget.signature_level(group.arity());
    let sig = group.act_on_level(&target, level)?;
    if !signature_image(h, budget)?.contains(&sig) {
        return Ok(None);
    }
    let accept = |w: &Word| group.equals(w, &target, budget.pair_budget).is_proved();
    Ok(find_matching(h, &sig, budget, accept)?.and_then(found))
}

/// An expression for an element of the ball of `h`, or a product of two
/// ball elements, with level signature `sig` that passes `accept`.
///
/// Balls are tried with geometrically growing size up to the budget, so
/// easy targets do not pay for the full ball.
pub(crate) fn find_matching<F>(
    h: &FgSubgroup,
    sig: &Perm,
    budget: &Budget,
    accept: F,
) -> Result<Option<Expr>>
where
    F: Fn(&Word) -> bool,
{
    let mut size = budget.ball_size.min(FIRST_BALL);
    loop {
        let b = ball(h, size, budget.witness_depth, budget)?;
        if let Some(e) = match_in(h, &b, sig, &accept) {
            return Ok(Some(e));
        }
        if b.complete || size >= budget.ball_size {
            return Ok(None);
        }
        size = (size * 8).min(budget.ball_size);
    }
}

const FIRST_BALL: usize = 300;

fn match_in<F>(h: &FgSubgroup, ball: &Ball, sig: &Perm, accept: &F) -> Option<Expr>
where
    F: Fn(&Word) -> bool,
{
    let group = h.group();
    for &j in ball.bucket(sig) {
        if accept(&ball.elems[j].word) {
            return Some(ball.elems[j].expr.clone());
        }
    }
    for x in &ball.elems {
        let need = x.sig.inverse().compose(sig);
        for &j in ball.bucket(&need) {
            let y = &ball.elems[j];
            if accept(&group.mul(&x.word, &y.word)) {
                return Some(x.expr.concat(&y.expr));
            }
        }
    }
    None
}

/// Least level `n ≤` the evidence level with `π_n(g) ∉ π_n(H)`.
pub fn separation_level(h: &FgSubgroup, g: &Word, budget: &Budget) -> Result<Option<usize>> {
    let group = h.group();
    for n in 1..=budget.evidence_level(group.arity()) {
        let p = group.act_on_level(g, n)?;
        if !approximate(h, n, budget)?.contains(&p) {
            return Ok(Some(n));
        }
    }
    Ok(None)
}
