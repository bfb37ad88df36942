//! Exact computation in finitely generated self-similar branch groups.
//!
//! The crate is organised bottom-up:
//!
//! * [`tree`] – vertices, leaf sets, shadows.
//! * [`ssgroup`] – wreath-recursion presentations, words, sections, equality.
//! * [`quotient`] – the finite congruence quotients `G/st_G(n)`.
//! * [`subgroup`] – finitely generated subgroups and verdict-carrying tests.
//! * [`leafsys`] – lower leaf systems, invariant families, branching copies.
//! * [`rank`] – depth chains and the rank classifier.
//! * [`report`] – the structured certificate format and its replay checker.

pub mod config;
pub mod error;
pub mod leafsys;
pub mod perm;
pub mod quotient;
pub mod rank;
pub mod report;
pub mod ssgroup;
pub mod subgroup;
pub mod tree;
pub mod verdict;

pub use config::Budget;
pub use error::{Error, Result};
pub use perm::Perm;
pub use ssgroup::{GroupDef, Sym, Word};
pub use subgroup::FgSubgroup;
pub use tree::{LeafSet, Vertex};
pub use verdict::{Certificate, Status, Verdict};
