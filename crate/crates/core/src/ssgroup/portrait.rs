use std::fmt::Write as _;

use super::{GroupDef, Word};
use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::tree::{level_size, Vertex};

/// Root permutations of all sections above a depth, plus frontier sections.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Portrait {
    pub arity: usize,
    pub depth: usize,
    /// `(u, root permutation of w_u)` for every vertex `u` with `|u| < depth`.
    pub labels: Vec<(Vertex, Perm)>,
    /// `(u, w_u)` for every vertex `u` with `|u| = depth`.
    pub frontier: Vec<(Vertex, Word)>,
}

impl GroupDef {
    pub fn portrait(&self, w: &Word, depth: usize, max_vertices: usize) -> Result<Portrait> {
        let total: usize = (0..=depth)
            .map(|l| level_size(self.arity, l).unwrap_or(usize::MAX))
            .fold(0usize, |a, b| a.saturating_add(b));
        if total > max_vertices {
            return Err(Error::budget(format!(
                "portrait of depth {depth} has {total} vertices"
            )));
        }
        let mut labels = Vec::new();
        let mut frontier = Vec::new();
        let mut layer = vec![(Vertex::root(), self.reduce(w))];
        for _ in 0..depth {
            let mut next = Vec::with_capacity(layer.len() * self.arity);
            for (u, sec) in layer {
                let perm =
                    Perm::from_images(self.root_perm(&sec).iter().map(|&x| x as usize).collect())
                        .expect("root action is a permutation");
                labels.push((u.clone(), perm));
                for x in 0..self.arity {
                    let (_, s) = self.step(&sec, x);
                    next.push((u.child(x as u8), s));
                }
            }
            layer = next;
        }
        frontier.extend(layer);
        Ok(Portrait {
            arity: self.arity,
            depth,
            labels,
            frontier,
        })
    }
}

impl Portrait {
    pub fn to_text(&self, group: &GroupDef) -> String {
        let mut out = String::new();
        for (u, p) in &self.labels {
            let _ = writeln!(out, "{} {}", u, p.cycle_string(|x| x.to_string()));
        }
        for (u, w) in &self.frontier {
            let _ = writeln!(out, "{} [{}]", u, group.fmt_word(w));
        }
        out
    }

    pub fn to_dot(&self, group: &GroupDef) -> String {
        let mut out = String::from("digraph portrait {\n  node [shape=circle];\n");
        let id = |u: &Vertex| format!("\"v{}\"", u);
        for (u, p) in &self.labels {
            let label = if p.is_identity() {
                String::new()
            } else {
                p.cycle_string(|x| x.to_string())
            };
            let _ = writeln!(out, "  {} [label=\"{}\"];", id(u), label);
        }
        for (u, w) in &self.frontier {
            let _ = writeln!(
                out,
                "  {} [shape=box,label=\"{}\"];",
                id(u),
                group.fmt_word(w)
            );
        }
        for (u, _) in &self.labels {
            for x in 0..self.arity as u8 {
                let c = u.child(x);
                let _ = writeln!(out, "  {} -> {} [label=\"{}\"];", id(u), id(&c), x);
            }
        }
        out.push_str("}\n");
        out
    }
}
