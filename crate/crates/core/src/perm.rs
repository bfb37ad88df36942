//! Permutations of `{0, .., n-1}` stored as image arrays.
//!
//! Composition follows the function convention used everywhere in the
//! crate: `p.compose(q)` is `p ∘ q`, i.e. apply `q` first.

use std::fmt;

use crate::tree::Vertex;

pub type Point = u16;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm(Vec<Point>);

impl Perm {
    pub fn identity(degree: usize) -> Self {
        assert!(
            degree <= Point::MAX as usize + 1,
            "degree {degree} too large"
        );
        Perm((0..degree).map(|i| i as Point).collect())
    }

    /// Builds a permutation from images; `None` if `images` is not a bijection.
    pub fn from_images(images: Vec<usize>) -> Option<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return None;
            }
            seen[i] = true;
        }
        Some(Perm(images.into_iter().map(|i| i as Point).collect()))
    }

    pub(crate) fn from_raw(images: Vec<Point>) -> Self {
        Perm(images)
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.0[x] as usize
    }

    pub fn images(&self) -> &[Point] {
        &self.0
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Perm) -> Perm {
        debug_assert_eq!(self.degree(), other.degree());
        Perm(other.0.iter().map(|&x| self.0[x as usize]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0 as Point; self.0.len()];
        for (i, &x) in self.0.iter().enumerate() {
            inv[x as usize] = i as Point;
        }
        Perm(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &x)| i == x as usize)
    }

    pub fn pow(&self, mut e: u64) -> Perm {
        let mut base = self.clone();
        let mut acc = Perm::identity(self.degree());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&base);
            }
            base = base.compose(&base);
            e >>= 1;
        }
        acc
    }

    /// Nontrivial cycles, each starting at its least point, sorted by that point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.degree()];
        let mut out = Vec::new();
        for start in 0..self.degree() {
            if seen[start] {
                continue;
            }
            let mut cyc = vec![start];
            seen[start] = true;
            let mut x = self.apply(start);
            while x != start {
                seen[x] = true;
                cyc.push(x);
                x = self.apply(x);
            }
            if cyc.len() > 1 {
                out.push(cyc);
            }
        }
        out
    }

    /// Cycle notation with custom point labels; `id` for the identity.
    pub fn cycle_string<F: Fn(usize) -> String>(&self, label: F) -> String {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return "id".to_string();
        }
        cycles
            .iter()
            .map(|c| {
                let parts: Vec<String> = c.iter().map(|&x| label(x)).collect();
                format!("({})", parts.join(" "))
            })
            .collect()
    }

    /// Cycle notation over the vertex strings of level `level`.
    pub fn level_cycle_string(&self, arity: usize, level: usize) -> String {
        self.cycle_string(|x| Vertex::from_index(x, level, arity).to_string())
    }

    /// The permutation induced on level `level - 1` by forgetting the last letter.
    pub fn project_down(&self, arity: usize) -> Perm {
        let n = self.degree() / arity;
        Perm(
            (0..n)
                .map(|i| (self.apply(i * arity) / arity) as Point)
                .collect(),
        )
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Perm{}", self.cycle_string(|x| x.to_string()))
    }
}

/// Parses cycle notation such as `(0 1 2)(3 4)` or `id` over `degree` points.
pub fn parse_cycles(s: &str, degree: usize) -> Option<Perm> {
    let s = s.trim();
    let mut images: Vec<usize> = (0..degree).collect();
    if s == "id" || s.is_empty() {
        return Perm::from_images(images);
    }
    let mut rest = s;
    let mut touched = vec![false; degree];
    while !rest.is_empty() {
        let open = rest.strip_prefix('(')?;
        let close = open.find(')')?;
        let body = &open[..close];
        let pts: Vec<usize> = body
            .split([' ', ','])
            .filter(|t| !t.is_empty())
            .map(|t| t.parse().ok())
            .collect::<Option<_>>()?;
        for (i, &p) in pts.iter().enumerate() {
            if p >= degree || touched[p] {
                return None;
            }
            touched[p] = true;
            images[p] = pts[(i + 1) % pts.len()];
        }
        rest = open[close + 1..].trim_start();
    }
    Perm::from_images(images)
}
