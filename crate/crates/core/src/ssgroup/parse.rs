//! Line-based group-definition format and word syntax.
//!
//! ```text
//! group grigorchuk
//! alphabet 2
//! gen a perm (0 1) sections e,e
//! gen b perm id sections a,c
//! rule bc -> d
//! branching abab;badabada;abadabad
//! embed 0 #1;...
//! hypotheses asserted
//! ```

use std::sync::Arc;

use super::{GenDef, GroupDef, GroupSpec, Rule, Sym, Word};
use crate::error::{Error, Result};
use crate::perm::parse_cycles;
use crate::subgroup::Expr;

/// Parses a word over the given generator names.
///
/// Juxtaposition multiplies; `'` inverts; `^n` raises to an integer power;
/// parentheses group; `e` is the identity; whitespace, `*` and `.` are ignored.
pub fn parse_word_with(names: &[String], s: &str) -> Result<Word> {
    let chars: Vec<char> = s.chars().collect();
    let mut pos = 0;
    let w = parse_seq(names, &chars, &mut pos)?;
    if pos != chars.len() {
        return Err(Error::parse(
            0,
            format!("unexpected `{}` in word `{s}`", chars[pos]),
        ));
    }
    Ok(w)
}

fn skip_seps(chars: &[char], pos: &mut usize) {
    while *pos < chars.len()
        && (chars[*pos].is_whitespace() || chars[*pos] == '*' || chars[*pos] == '.')
    {
        *pos += 1;
    }
}

fn parse_seq(names: &[String], chars: &[char], pos: &mut usize) -> Result<Word> {
    let mut out: Vec<Sym> = Vec::new();
    loop {
        skip_seps(chars, pos);
        if *pos >= chars.len() || chars[*pos] == ')' {
            return Ok(Word(out));
        }
        let mut atom = if chars[*pos] == '(' {
            *pos += 1;
            let inner = parse_seq(names, chars, pos)?;
            if *pos >= chars.len() || chars[*pos] != ')' {
                return Err(Error::parse(0, "unbalanced parenthesis"));
            }
            *pos += 1;
            inner
        } else {
            // Longest generator name matching here, else `e`.
            let rest: String = chars[*pos..].iter().collect();
            let best = names
                .iter()
                .enumerate()
                .filter(|(_, n)| rest.starts_with(n.as_str()))
                .max_by_key(|(_, n)| n.len());
            match best {
                Some((i, n)) => {
                    *pos += n.chars().count();
                    Word::gen(i)
                }
                None if chars[*pos] == 'e' => {
                    *pos += 1;
                    Word::empty()
                }
                None => {
                    return Err(Error::parse(0, format!("unknown generator at `{rest}`")));
                }
            }
        };
        while *pos < chars.len() && chars[*pos] == '\'' {
            atom = atom.inverse();
            *pos += 1;
        }
        if *pos < chars.len() && chars[*pos] == '^' {
            *pos += 1;
            let start = *pos;
            if *pos < chars.len() && chars[*pos] == '-' {
                *pos += 1;
            }
            while *pos < chars.len() && chars[*pos].is_ascii_digit() {
                *pos += 1;
            }
            let e: i64 = chars[start..*pos]
                .iter()
                .collect::<String>()
                .parse()
                .map_err(|_| Error::parse(0, "bad exponent"))?;
            let base = if e < 0 { atom.inverse() } else { atom };
            atom = Word(
                std::iter::repeat_n(base.syms().to_vec(), e.unsigned_abs() as usize)
                    .flatten()
                    .collect(),
            );
        }
        out.extend_from_slice(atom.syms());
    }
}

impl GroupDef {
    /// Parses and reduces a word over this group's generators.
    pub fn parse_word(&self, s: &str) -> Result<Word> {
        let names: Vec<String> = self.gens.iter().map(|g| g.name.clone()).collect();
        Ok(self.reduce(&parse_word_with(&names, s)?))
    }

    pub fn parse_text(text: &str) -> Result<Arc<GroupDef>> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with("//") && !l.starts_with("# "))
            .collect();
        let mut spec = GroupSpec {
            name: "user".into(),
            ..Default::default()
        };
        // Generator names first, so that section words may refer forward.
        let mut names = Vec::new();
        for &(ln, l) in &lines {
            if let Some(rest) = l.strip_prefix("gen ") {
                let name = rest
                    .split_whitespace()
                    .next()
                    .ok_or_else(|| Error::parse(ln, "missing generator name"))?;
                names.push(name.to_string());
            }
        }
        let word = |ln: usize, s: &str| -> Result<Word> {
            parse_word_with(&names, s).map_err(|e| match e {
                Error::Parse { msg, .. } => Error::parse(ln, msg),
                other => other,
            })
        };
        let mut embed_rows: Vec<(usize, Vec<Expr>)> = Vec::new();
        for &(ln, l) in &lines {
            let (kw, rest) = l.split_once(char::is_whitespace).unwrap_or((l, ""));
            let rest = rest.trim();
            match kw {
                "group" => spec.name = rest.to_string(),
                "alphabet" => {
                    spec.arity = rest
                        .parse()
                        .map_err(|_| Error::parse(ln, "bad alphabet size"))?
                }
                "gen" => {
                    let (name, rest) = rest
                        .split_once(char::is_whitespace)
                        .ok_or_else(|| Error::parse(ln, "incomplete gen line"))?;
                    let rest = rest
                        .trim()
                        .strip_prefix("perm")
                        .ok_or_else(|| Error::parse(ln, "expected `perm`"))?;
                    let (perm_s, secs_s) = rest
                        .split_once("sections")
                        .ok_or_else(|| Error::parse(ln, "expected `sections`"))?;
                    if spec.arity == 0 {
                        return Err(Error::parse(ln, "`alphabet` must precede generators"));
                    }
                    let perm = parse_cycles(perm_s, spec.arity)
                        .ok_or_else(|| Error::parse(ln, "bad root permutation"))?;
                    let sections = secs_s
                        .split(',')
                        .map(|w| word(ln, w.trim()))
                        .collect::<Result<Vec<_>>>()?;
                    spec.gens.push(GenDef {
                        name: name.to_string(),
                        perm: perm.images().iter().map(|&x| x as u8).collect(),
                        sections,
                    });
                }
                "rule" => {
                    let (l, r) = rest
                        .split_once("->")
                        .ok_or_else(|| Error::parse(ln, "rule needs `->`"))?;
                    spec.rules
                        .push(Rule::new(word(ln, l.trim())?, word(ln, r.trim())?));
                }
                "branching" => {
                    spec.branching = Some(
                        rest.split(';')
                            .map(|w| word(ln, w.trim()))
                            .collect::<Result<Vec<_>>>()?,
                    );
                }
                "embed" => {
                    let (letter, exprs) = rest
                        .split_once(char::is_whitespace)
                        .ok_or_else(|| Error::parse(ln, "incomplete embed line"))?;
                    let letter: usize = letter
                        .parse()
                        .map_err(|_| Error::parse(ln, "bad embed letter"))?;
                    let row = exprs
                        .split(';')
                        .map(|e| {
                            e.trim()
                                .parse::<Expr>()
                                .map_err(|_| Error::parse(ln, "bad expression"))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    embed_rows.push((letter, row));
                }
                "hypotheses" => spec.hypotheses = rest == "asserted",
                _ => return Err(Error::parse(ln, format!("unknown directive `{kw}`"))),
            }
        }
        if !embed_rows.is_empty() {
            embed_rows.sort_by_key(|(l, _)| *l);
            if embed_rows.iter().enumerate().any(|(i, (l, _))| i != *l) {
                return Err(Error::parse(
                    0,
                    "embed rows must cover each letter exactly once",
                ));
            }
            spec.embedding = Some(embed_rows.into_iter().map(|(_, r)| r).collect());
        }
        GroupDef::new(spec)
    }

    /// Canonical text form; `parse_text(to_text())` reproduces the group.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("group {}\n", self.name));
        out.push_str(&format!("alphabet {}\n", self.arity));
        for g in &self.gens {
            let perm = crate::perm::Perm::from_images(g.perm.iter().map(|&x| x as usize).collect())
                .expect("validated");
            let secs: Vec<String> = g.sections.iter().map(|w| self.fmt_word(w)).collect();
            out.push_str(&format!(
                "gen {} perm {} sections {}\n",
                g.name,
                perm.cycle_string(|x| x.to_string()),
                secs.join(",")
            ));
        }
        for r in &self.rules {
            out.push_str(&format!(
                "rule {} -> {}\n",
                self.fmt_word(&r.lhs),
                self.fmt_word(&r.rhs)
            ));
        }
        if let Some(k) = &self.branching {
            let ws: Vec<String> = k.iter().map(|w| self.fmt_word(w)).collect();
            out.push_str(&format!("branching {}\n", ws.join(";")));
        }
        if let Some(table) = &self.embedding {
            for (x, row) in table.iter().enumerate() {
                let es: Vec<String> = row.iter().map(Expr::to_string).collect();
                out.push_str(&format!("embed {} {}\n", x, es.join(";")));
            }
        }
        if self.hypotheses {
            out.push_str("hypotheses asserted\n");
        }
        out
    }
}
