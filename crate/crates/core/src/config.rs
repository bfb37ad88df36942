/// Every resource limit used by the library, in one place.
///
/// Semi-decision procedures stop at these bounds and report `Unknown`
/// together with the bound that was hit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Hard cap on quotient levels for a binary alphabet.
    pub max_level_binary: usize,
    /// Hard cap on quotient levels for larger alphabets.
    pub max_level_other: usize,
    /// Levels used for index and order traces (binary alphabet).
    pub evidence_level_binary: usize,
    /// Levels used for index and order traces (larger alphabets).
    pub evidence_level_other: usize,
    /// Quotients up to this order are closed by plain enumeration; above it
    /// a stabilizer chain is used.
    pub closure_threshold: usize,
    /// Pair budget for the bisimulation equality test.
    pub pair_budget: usize,
    /// Longest word (in subgroup generators) tried by membership search.
    pub witness_depth: usize,
    /// Node budget of the Cayley-ball used by membership search.
    pub ball_size: usize,
    /// Element budget for finiteness enumeration.
    pub enumeration_limit: usize,
    /// Number of trailing levels over which growth must be strict to count
    /// as growth evidence.
    pub growth_window: usize,
    /// Recursion bound of the alternative classifier.
    pub gn_depth: usize,
    /// Deepest level searched for a finite section.
    pub section_search_level: usize,
    /// Largest stabilizer level offered as a containment certificate.
    pub max_certificate_level: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_level_binary: 8,
            max_level_other: 5,
            evidence_level_binary: 5,
            evidence_level_other: 4,
            closure_threshold: 4096,
            pair_budget: 100_000,
            witness_depth: 12,
            ball_size: 20_000,
            enumeration_limit: 2_000,
            growth_window: 3,
            gn_depth: 6,
            section_search_level: 1,
            max_certificate_level: 3,
        }
    }
}

impl Budget {
    pub fn max_level(&self, arity: usize) -> usize {
        if arity <= 2 {
            self.max_level_binary
        } else {
            self.max_level_other
        }
    }

    pub fn evidence_level(&self, arity: usize) -> usize {
        let e = if arity <= 2 {
            self.evidence_level_binary
        } else {
            self.evidence_level_other
        };
        e.min(self.max_level(arity))
    }

    /// Level whose permutation is used as a hash signature of an element.
    /// Independent of `max_level`: it only buckets elements.
    pub fn signature_level(&self, arity: usize) -> usize {
        let mut n = 0;
        while arity.pow(n as u32 + 1) <= 256 {
            n += 1;
        }
        n
    }
}
