//! Three-valued answers for semi-decidable questions.
//!
//! `Proved` and `Refuted` always carry evidence that can be replayed;
//! `Unknown` always names the bound that was exhausted.

use std::fmt;

use num_bigint::BigUint;

use crate::ssgroup::Word;
use crate::subgroup::MembershipWitness;
use crate::tree::Vertex;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Proved,
    Refuted,
    Unknown,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Proved => "Proved",
            Status::Refuted => "Refuted",
            Status::Unknown => "Unknown",
        })
    }
}

impl std::str::FromStr for Status {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "Proved" => Ok(Status::Proved),
            "Refuted" => Ok(Status::Refuted),
            "Unknown" => Ok(Status::Unknown),
            _ => Err(()),
        }
    }
}

/// Evidence attached to a verdict.
///
/// Variants that mention subgroup elements carry the generator list
/// (`over`) their expressions refer to, so each certificate can be
/// replayed on its own.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Certificate {
    None,
    /// Equality closed after exploring this many section pairs.
    Bisimulation {
        lhs: Word,
        rhs: Word,
        pairs: usize,
    },
    /// The two sides act differently on this vertex.
    WitnessVertex {
        lhs: Word,
        rhs: Word,
        vertex: Vertex,
    },
    /// Expressions of targets in the generators `over`.
    Witnesses {
        over: Vec<Word>,
        witnesses: Vec<MembershipWitness>,
    },
    /// A full element list of `<over>`, closed under its generators.
    Elements {
        over: Vec<Word>,
        elements: Vec<Word>,
    },
    /// Every Schreier generator of `st_G(level)` lies in `<over>`.
    StabilizerContainment {
        level: usize,
        over: Vec<Word>,
        witnesses: Vec<MembershipWitness>,
    },
    /// The level-`level` quotient separates `element` from `<over>`.
    Separation {
        level: usize,
        element: Word,
        over: Vec<Word>,
    },
    /// A nontrivial element of `<over>` with trivial sections on `trivial_on`.
    KernelElement {
        over: Vec<Word>,
        element: MembershipWitness,
        trivial_on: Vec<Vertex>,
    },
    /// Named numeric traces over levels `1..`.
    Table(Vec<(String, Vec<BigUint>)>),
    /// Sub-verdicts with labels.
    Composite(Vec<(String, Verdict)>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub status: Status,
    pub certificate: Certificate,
    pub bound: Option<String>,
}

impl Verdict {
    pub fn proved(certificate: Certificate) -> Self {
        Verdict {
            status: Status::Proved,
            certificate,
            bound: None,
        }
    }

    pub fn refuted(certificate: Certificate) -> Self {
        Verdict {
            status: Status::Refuted,
            certificate,
            bound: None,
        }
    }

    pub fn unknown(bound: impl Into<String>, evidence: Certificate) -> Self {
        Verdict {
            status: Status::Unknown,
            certificate: evidence,
            bound: Some(bound.into()),
        }
    }

    pub fn is_proved(&self) -> bool {
        self.status == Status::Proved
    }

    pub fn is_refuted(&self) -> bool {
        self.status == Status::Refuted
    }

    pub fn is_unknown(&self) -> bool {
        self.status == Status::Unknown
    }

    /// The labelled sub-verdict, if this is a composite certificate.
    pub fn part(&self, label: &str) -> Option<&Verdict> {
        match &self.certificate {
            Certificate::Composite(parts) => parts.iter().find(|(l, _)| l == label).map(|(_, v)| v),
            _ => None,
        }
    }

    pub fn table(&self, name: &str) -> Option<&[BigUint]> {
        match &self.certificate {
            Certificate::Table(rows) => rows
                .iter()
                .find(|(l, _)| l == name)
                .map(|(_, v)| v.as_slice()),
            _ => None,
        }
    }
}
