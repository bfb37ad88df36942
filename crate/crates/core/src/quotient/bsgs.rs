//! Deterministic Schreier–Sims.

use num_bigint::BigUint;
use num_traits::One;

use crate::perm::Perm;

#[derive(Clone, Debug)]
struct ChainLevel {
    base: usize,
    gens: Vec<Perm>,
    orbit: Vec<usize>,
    /// `transversal[β]` maps the base point to `β`.
    transversal: Vec<Option<Perm>>,
    /// `checked[p]`: Schreier generators for `orbit[p]` and `gens[..checked[p]]`
    /// are known to sift.
    checked: Vec<usize>,
}

impl ChainLevel {
    fn new(base: usize, degree: usize) -> Self {
        let mut transversal = vec![None; degree];
        transversal[base] = Some(Perm::identity(degree));
        ChainLevel {
            base,
            gens: Vec::new(),
            orbit: vec![base],
            transversal,
            checked: vec![0],
        }
    }

    /// Adds a generator and extends the orbit. Existing transversal
    /// elements are kept, so earlier sifting results stay valid.
    fn add_gen(&mut self, g: Perm) {
        self.gens.push(g);
        let k = self.gens.len() - 1;
        let old = self.orbit.len();
        for p in 0..old {
            self.visit(self.orbit[p], k);
        }
        let mut i = old;
        while i < self.orbit.len() {
            for k in 0..self.gens.len() {
                self.visit(self.orbit[i], k);
            }
            i += 1;
        }
    }

    fn visit(&mut self, beta: usize, k: usize) {
        let g = &self.gens[k];
        let gamma = g.apply(beta);
        if self.transversal[gamma].is_none() {
            let u = self.transversal[beta]
                .as_ref()
                .expect("orbit point has a transversal");
            self.transversal[gamma] = Some(g.compose(u));
            self.orbit.push(gamma);
            self.checked.push(0);
        }
    }
}

/// A base and strong generating set for a permutation group.
#[derive(Clone, Debug)]
pub struct StabChain {
    degree: usize,
    levels: Vec<ChainLevel>,
}

impl StabChain {
    pub fn new(degree: usize, gens: &[Perm]) -> Self {
        let gens: Vec<Perm> = gens.iter().filter(|g| !g.is_identity()).cloned().collect();
        let mut chain = StabChain {
            degree,
            levels: Vec::new(),
        };
        for g in &gens {
            if chain.levels.iter().all(|l| g.apply(l.base) == l.base) {
                let moved = (0..degree).find(|&x| g.apply(x) != x).expect("nonidentity");
                chain.levels.push(ChainLevel::new(moved, degree));
            }
        }
        for g in &gens {
            for lvl in 0..chain.levels.len() {
                chain.levels[lvl].add_gen(g.clone());
                if g.apply(chain.levels[lvl].base) != chain.levels[lvl].base {
                    break;
                }
            }
        }
        chain.complete();
        chain
    }

    fn complete(&mut self) {
        let mut i = self.levels.len() as isize - 1;
        while i >= 0 {
            let lvl = i as usize;
            match self.unsifted_schreier_generator(lvl) {
                Some((res, j)) => {
                    if j == self.levels.len() {
                        let moved = (0..self.degree)
                            .find(|&p| res.apply(p) != p)
                            .expect("nonidentity");
                        self.levels.push(ChainLevel::new(moved, self.degree));
                    }
                    for l in lvl + 1..=j {
                        self.levels[l].add_gen(res.clone());
                    }
                    i = j as isize;
                }
                None => i -= 1,
            }
        }
    }

    /// The residue and level of the first Schreier generator of level
    /// `lvl` that does not sift through the levels below it.
    fn unsifted_schreier_generator(&mut self, lvl: usize) -> Option<(Perm, usize)> {
        let mut p = 0;
        while p < self.levels[lvl].orbit.len() {
            while self.levels[lvl].checked[p] < self.levels[lvl].gens.len() {
                let level = &self.levels[lvl];
                let k = level.checked[p];
                let beta = level.orbit[p];
                let x = &level.gens[k];
                let xu = x.compose(level.transversal[beta].as_ref().expect("in orbit"));
                let u_gamma = level.transversal[x.apply(beta)]
                    .as_ref()
                    .expect("orbit closed");
                let schreier = (*u_gamma != xu).then(|| u_gamma.inverse().compose(&xu));
                self.levels[lvl].checked[p] += 1;
                if let Some(sg) = schreier {
                    let (res, j) = self.strip_from(sg, lvl + 1);
                    if j < self.levels.len() || !res.is_identity() {
                        return Some((res, j));
                    }
                }
            }
            p += 1;
        }
        None
    }

    fn strip_from(&self, mut g: Perm, start: usize) -> (Perm, usize) {
        for (l, level) in self.levels.iter().enumerate().skip(start) {
            let beta = g.apply(level.base);
            match &level.transversal[beta] {
                Some(u) => g = u.inverse().compose(&g),
                None => return (g, l),
            }
        }
        (g, self.levels.len())
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> BigUint {
        self.levels
            .iter()
            .fold(BigUint::one(), |acc, l| acc * BigUint::from(l.orbit.len()))
    }

    pub fn contains(&self, p: &Perm) -> bool {
        if p.degree() != self.degree {
            return false;
        }
        let (res, j) = self.strip_from(p.clone(), 0);
        j == self.levels.len() && res.is_identity()
    }

    pub fn base(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.base).collect()
    }

    pub fn strong_generators(&self) -> Vec<Perm> {
        self.levels
            .first()
            .map(|l| l.gens.clone())
            .unwrap_or_default()
    }

    /// All elements, if there are at most `limit` of them.
    pub fn elements(&self, limit: usize) -> Option<Vec<Perm>> {
        let order = self.order();
        if order > BigUint::from(limit) {
            return None;
        }
        let mut out = vec![Perm::identity(self.degree)];
        for level in self.levels.iter().rev() {
            let mut next = Vec::with_capacity(out.len() * level.orbit.len());
            for &beta in &level.orbit {
                let u = level.transversal[beta].as_ref().expect("orbit");
                for e in &out {
                    next.push(u.compose(e));
                }
            }
            out = next;
        }
        Some(out)
    }
}
