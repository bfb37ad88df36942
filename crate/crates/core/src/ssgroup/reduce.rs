use super::{sym_slot, GroupDef, Sym, Word};
use crate::error::{Error, Result};

/// A length-nonincreasing rewriting rule `lhs -> rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub lhs: Word,
    pub rhs: Word,
}

impl Rule {
    pub fn new(lhs: Word, rhs: Word) -> Self {
        Rule { lhs, rhs }
    }

    /// Rules must strictly decrease in shortlex order, which makes the
    /// rewriting terminate.
    pub(crate) fn validate(&self) -> Result<()> {
        if self.lhs.is_empty() {
            return Err(Error::pre("rule with empty left side"));
        }
        let shorter = self.rhs.len() < self.lhs.len();
        let same_len_smaller = self.rhs.len() == self.lhs.len() && self.rhs < self.lhs;
        if !(shorter || same_len_smaller) {
            return Err(Error::pre(
                "rule right side must be shorter, or equally long and lexicographically smaller",
            ));
        }
        Ok(())
    }
}

impl GroupDef {
    pub fn reduce(&self, w: &Word) -> Word {
        self.reduce_syms(w.syms().iter().copied())
    }

    /// Free reduction plus the rewriting rules, applied to a fixpoint.
    ///
    /// The output is kept on a stack that is irreducible at all times; each
    /// incoming symbol can only create redexes ending at the top.
    pub fn reduce_syms<I: IntoIterator<Item = Sym>>(&self, syms: I) -> Word {
        let mut pending: Vec<Sym> = syms.into_iter().collect();
        pending.reverse();
        let mut stack: Vec<Sym> = Vec::with_capacity(pending.len());
        while let Some(s) = pending.pop() {
            if stack.last() == Some(&s.inverse()) {
                stack.pop();
                continue;
            }
            stack.push(s);
            for &ri in &self.rules_by_last[sym_slot(s)] {
                let rule = &self.rules[ri];
                if stack.ends_with(rule.lhs.syms()) {
                    stack.truncate(stack.len() - rule.lhs.len());
                    pending.extend(rule.rhs.syms().iter().rev());
                    break;
                }
            }
        }
        Word(stack)
    }
}
