//! `branchlab`: command-line front end to `branchlab-core`.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use branchlab_core::leafsys::{
    branching_subgroup, build_j, build_lower_leaf_system, diagonal_subgroup,
    invariant_independent_family, key_lemma_support, leaf_sets_dot, rigid_product,
};
use branchlab_core::quotient::{level_stabilizer_generators, LevelQuotient};
use branchlab_core::rank::{
    classify, classify_not_finitely_generated, gn_classify, neighborhood_contains,
    verify_depth_chain, DepthChain, GnOutcome, RankClassification,
};
use branchlab_core::report::{self, verdict_text, Report};
use branchlab_core::ssgroup::builtin;
use branchlab_core::subgroup::{
    approximate, infra_direct_verdict, minimal_injective_support, orbit_on_level,
    pointwise_stabilizer, section_group,
};
use branchlab_core::tree::shadow;
use branchlab_core::{Budget, Error, FgSubgroup, GroupDef, LeafSet, Status, Verdict, Vertex, Word};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "branchlab",
    version,
    about = "Exact computation in self-similar branch groups"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Built-in group to work in.
    #[arg(
        long,
        global = true,
        env = "BRANCHLAB_GROUP",
        default_value = "grigorchuk"
    )]
    group: String,
    /// Group definition file; overrides --group.
    #[arg(long, global = true, env = "BRANCHLAB_GROUP_FILE")]
    group_file: Option<PathBuf>,
    /// Hard cap on quotient levels.
    #[arg(long, global = true, env = "BRANCHLAB_MAX_LEVEL")]
    max_level: Option<usize>,
    /// Largest quotient closed by plain enumeration, and largest orbit handled.
    #[arg(long, global = true, env = "BRANCHLAB_BUDGET")]
    budget: Option<usize>,
    /// Pair budget of the equality test.
    #[arg(long, global = true, env = "BRANCHLAB_PAIR_BUDGET")]
    pair_budget: Option<usize>,
    /// Longest word tried by membership search.
    #[arg(long, global = true, env = "BRANCHLAB_WITNESS_DEPTH")]
    witness_depth: Option<usize>,
    /// Cayley ball size for membership search.
    #[arg(long, global = true, env = "BRANCHLAB_BALL_SIZE")]
    ball_size: Option<usize>,
    /// Element budget for finiteness enumeration.
    #[arg(long, global = true, env = "BRANCHLAB_ENUMERATION_LIMIT")]
    enumeration_limit: Option<usize>,
    /// Recursion bound of `gn`.
    #[arg(long, global = true, env = "BRANCHLAB_GN_DEPTH")]
    gn_depth: Option<usize>,
    #[arg(
        long,
        global = true,
        env = "BRANCHLAB_FORMAT",
        value_enum,
        default_value = "text"
    )]
    format: Format,
    /// Seed for randomized sampling; mathematical output does not depend on it.
    #[arg(long, global = true, env = "BRANCHLAB_SEED", default_value_t = 0)]
    seed: u64,
    /// Exit with status 2 when the answer is Unknown.
    #[arg(long, global = true)]
    require_decision: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Load or print a group definition.
    #[command(subcommand)]
    Group(GroupCmd),
    /// Image of a vertex.
    Eval { word: String, vertex: String },
    /// Section of a word at a vertex.
    Section { word: String, vertex: String },
    /// Decide equality of two words.
    Equal { lhs: String, rhs: String },
    /// Portrait of a word down to a depth.
    Portrait {
        word: String,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long)]
        dot: bool,
    },
    /// The level quotient of a group.
    Quotient {
        /// Built-in group name; defaults to the global group.
        #[arg(value_name = "GROUP")]
        name: Option<String>,
        #[arg(long)]
        level: usize,
    },
    /// Pointwise stabilizer of a leaf set.
    Stab { subgroup: String, leafset: String },
    /// Section group `ψ_v(st_H(v))`.
    Sections { subgroup: String, vertex: String },
    /// Image of a subgroup in a level quotient.
    Approx {
        subgroup: String,
        #[arg(long)]
        level: usize,
    },
    /// Orbits on a level.
    Orbit {
        subgroup: String,
        #[arg(long)]
        level: usize,
    },
    /// Shadow of a leaf set on a level.
    Shadow {
        leafset: String,
        #[arg(long)]
        level: usize,
    },
    /// Infra-direct test for `st_H(Y)`.
    Infra { subgroup: String, leafset: String },
    /// Least support on which the section map looks injective.
    Support { subgroup: String, leafset: String },
    /// System of lower leaf sets.
    LowerSystem {
        subgroup: String,
        leafset: String,
        #[arg(long, value_enum, default_value = "text")]
        emit: Emit,
        /// Also replay the key-lemma construction.
        #[arg(long)]
        key_lemma: bool,
    },
    /// Independent family of invariant leaf sets.
    Family {
        subgroup: String,
        leafset: String,
        #[arg(long, default_value_t = 2)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        min_level: usize,
    },
    /// Rigid copies of the branching subgroup over a family.
    #[command(name = "buildJ")]
    BuildJ {
        /// Leaf sets separated by `;`.
        #[arg(long)]
        family: String,
        /// Indices into the family, separated by commas.
        #[arg(long, default_value = "")]
        support: String,
    },
    /// Diagonal copy of the branching subgroup over a spanning leaf set.
    Diagonal { leafset: String },
    /// Depth chains.
    #[command(subcommand)]
    Depth(DepthCmd),
    /// Rank classification.
    Classify {
        subgroup: String,
        /// Treat the input as not finitely generated.
        #[arg(long)]
        not_fg: bool,
    },
    /// Finite section or infra-direct leaf set.
    Gn { subgroup: String },
    /// Membership in a basic open set of subgroups.
    Nbhd {
        subgroup: String,
        /// Words that must not lie in the subgroup, separated by commas.
        #[arg(long, default_value = "")]
        avoid: String,
        /// Words that must lie in the subgroup, separated by commas.
        #[arg(long, default_value = "")]
        contain: String,
    },
    /// Replay every certificate in a structured report.
    Verify { report: PathBuf },
}

#[derive(Subcommand, Debug)]
enum GroupCmd {
    /// Print a built-in definition.
    Builtin { name: String },
    /// Parse a definition file and print its canonical form.
    Load { path: PathBuf },
}

#[derive(Subcommand, Debug)]
enum DepthCmd {
    /// Replay a chain file.
    Verify { chain: PathBuf },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Emit {
    Text,
    Dot,
}

/// What a command produced: free text or key-value lines, verdicts for
/// the structured report, and whether a decision was reached.
struct Output {
    text: String,
    claims: Vec<(String, Verdict)>,
    decided: bool,
}

impl Output {
    fn plain(text: String) -> Output {
        Output {
            text,
            claims: Vec::new(),
            decided: true,
        }
    }

    fn verdict(group: &GroupDef, label: String, v: Verdict) -> Output {
        let decided = v.status != Status::Unknown;
        let text = verdict_text(group, &label, &v);
        Output {
            text,
            claims: vec![(label, v)],
            decided,
        }
    }
}

fn budget_from(g: &Global) -> Budget {
    let mut b = Budget::default();
    if let Some(m) = g.max_level {
        b.max_level_binary = m;
        b.max_level_other = m;
    }
    if let Some(x) = g.budget {
        b.closure_threshold = x;
    }
    if let Some(x) = g.pair_budget {
        b.pair_budget = x;
    }
    if let Some(x) = g.witness_depth {
        b.witness_depth = x;
    }
    if let Some(x) = g.ball_size {
        b.ball_size = x;
    }
    if let Some(x) = g.enumeration_limit {
        b.enumeration_limit = x;
    }
    if let Some(x) = g.gn_depth {
        b.gn_depth = x;
    }
    b
}

fn load_group(g: &Global) -> Result<Arc<GroupDef>, Error> {
    match &g.group_file {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Precondition(format!("cannot read {}: {e}", path.display())))?;
            GroupDef::parse_text(&text)
        }
        None => builtin(&g.group),
    }
}

fn read(path: &PathBuf) -> Result<String, Error> {
    fs::read_to_string(path)
        .map_err(|e| Error::Precondition(format!("cannot read {}: {e}", path.display())))
}

fn inner(s: &str, prefix: &str) -> Option<String> {
    s.strip_prefix(prefix)
        .and_then(|r| r.strip_suffix(')'))
        .map(str::to_string)
}

/// Subgroup syntax: `G`, `1`, `K`, `st(n)`, `D(Y)`, `K^(Y)`, or a comma
/// separated list of words.
fn subgroup(group: &Arc<GroupDef>, s: &str, budget: &Budget) -> Result<FgSubgroup, Error> {
    let s = s.trim();
    let arity = group.arity();
    if s == "1" || s == "trivial" {
        return Ok(FgSubgroup::trivial(group));
    }
    if s == "K" {
        return branching_subgroup(group, budget);
    }
    if let Some(n) = inner(s, "st(") {
        let n = n.trim().parse().map_err(|_| Error::Parse {
            line: 0,
            msg: format!("bad level in `{s}`"),
        })?;
        return level_stabilizer_generators(group, n, budget);
    }
    if let Some(y) = inner(s, "D(") {
        return diagonal_subgroup(group, &LeafSet::parse(arity, &y)?, budget);
    }
    if let Some(y) = inner(s, "K^(") {
        return rigid_product(group, &LeafSet::parse(arity, &y)?, budget);
    }
    FgSubgroup::parse(group, s, budget)
}

fn words(group: &GroupDef, s: &str) -> Result<Vec<Word>, Error> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| group.parse_word(t))
        .collect()
}

fn vertex(group: &GroupDef, s: &str) -> Result<Vertex, Error> {
    let v: Vertex = s.parse()?;
    group.check_vertex(&v)?;
    Ok(v)
}

fn gens_text(h: &FgSubgroup) -> String {
    format!("generators: {}\n", h.fmt_gens())
}

fn classification_output(group: &GroupDef, label: &str, c: RankClassification) -> Output {
    let mut out = Output::verdict(group, format!("{label}: {}", c.kind), c.evidence);
    out.decided = c.kind != branchlab_core::rank::RankKind::Unknown;
    out
}

fn run(cli: &Cli) -> Result<Output, Error> {
    let g = &cli.global;
    let budget = budget_from(g);
    let b = &budget;
    if let Command::Group(GroupCmd::Builtin { name }) = &cli.command {
        let group = builtin(name)?;
        return Ok(Output::plain(format!(
            "{}hash: {}\n",
            group.to_text(),
            group.hash()
        )));
    }
    if let Command::Group(GroupCmd::Load { path }) = &cli.command {
        let group = GroupDef::parse_text(&read(path)?)?;
        return Ok(Output::plain(format!(
            "{}hash: {}\n",
            group.to_text(),
            group.hash()
        )));
    }
    if let Command::Verify { report: path } = &cli.command {
        let r = Report::parse(&read(path)?)?;
        let summary = report::verify(&r, b);
        let mut text = format!("claims: {}\nchecked: {}\n", r.claims.len(), summary.checked);
        for f in &summary.failures {
            let _ = writeln!(text, "failed: {f}");
        }
        if !summary.is_ok() {
            return Err(Error::MalformedCertificate(text));
        }
        return Ok(Output::plain(text));
    }
    if let Command::Quotient {
        name: Some(name),
        level,
    } = &cli.command
    {
        let group = builtin(name)?;
        return Ok(Output::plain(
            LevelQuotient::new(&group, *level, b)?.report(),
        ));
    }
    let group = load_group(g)?;
    let arity = group.arity();
    let leafset = |s: &str| LeafSet::parse(arity, s);
    Ok(match &cli.command {
        Command::Group(_) | Command::Verify { .. } => unreachable!("handled above"),
        Command::Eval { word, vertex: v } => {
            let w = group.parse_word(word)?;
            Output::plain(format!("{}\n", group.act(&w, &vertex(&group, v)?)?))
        }
        Command::Section { word, vertex: v } => {
            let w = group.parse_word(word)?;
            Output::plain(format!(
                "{}\n",
                group.fmt_word(&group.section(&w, &vertex(&group, v)?)?)
            ))
        }
        Command::Equal { lhs, rhs } => {
            let (l, r) = (group.parse_word(lhs)?, group.parse_word(rhs)?);
            Output::verdict(
                &group,
                format!("equal {lhs} {rhs}"),
                group.equals(&l, &r, b.pair_budget),
            )
        }
        Command::Portrait { word, depth, dot } => {
            let w = group.parse_word(word)?;
            let p = group.portrait(&w, *depth, 1 << 16)?;
            Output::plain(if *dot {
                p.to_dot(&group)
            } else {
                p.to_text(&group)
            })
        }
        Command::Quotient { level, .. } => {
            Output::plain(LevelQuotient::new(&group, *level, b)?.report())
        }
        Command::Stab {
            subgroup: s,
            leafset: y,
        } => {
            let h = subgroup(&group, s, b)?;
            let st = pointwise_stabilizer(&h, &leafset(y)?, b)?;
            Output::plain(format!("index: {}\n{}", st.index, gens_text(&st.subgroup)))
        }
        Command::Sections {
            subgroup: s,
            vertex: v,
        } => {
            let h = subgroup(&group, s, b)?;
            Output::plain(gens_text(&section_group(&h, &vertex(&group, v)?, b)?))
        }
        Command::Approx { subgroup: s, level } => {
            let h = subgroup(&group, s, b)?;
            let p = approximate(&h, *level, b)?;
            let index = branchlab_core::quotient::subgroup_index_in_quotient(&h, *level, b)?;
            Output::plain(format!(
                "level: {level}\norder: {}\nindex: {index}\n",
                p.order()
            ))
        }
        Command::Orbit { subgroup: s, level } => {
            let h = subgroup(&group, s, b)?;
            let mut text = String::new();
            for o in orbit_on_level(&h, *level, b)? {
                let names: Vec<String> = o.iter().map(Vertex::to_string).collect();
                let _ = writeln!(text, "{}", names.join(","));
            }
            Output::plain(text)
        }
        Command::Shadow { leafset: y, level } => {
            Output::plain(format!("{}\n", shadow(&leafset(y)?, *level)?))
        }
        Command::Infra {
            subgroup: s,
            leafset: y,
        } => {
            let h = subgroup(&group, s, b)?;
            Output::verdict(
                &group,
                format!("infra {s} {y}"),
                infra_direct_verdict(&h, &leafset(y)?, b)?,
            )
        }
        Command::Support {
            subgroup: s,
            leafset: y,
        } => {
            let h = subgroup(&group, s, b)?;
            let (u, v) = minimal_injective_support(&h, &leafset(y)?, b)?;
            Output::verdict(&group, format!("support {s} {y}: {u}"), v)
        }
        Command::LowerSystem {
            subgroup: s,
            leafset: y,
            emit,
            key_lemma,
        } => {
            let h = subgroup(&group, s, b)?;
            let sys = build_lower_leaf_system(&h, &leafset(y)?, b)?;
            if *emit == Emit::Dot {
                let sets: Vec<LeafSet> = (1..=sys.stages.len())
                    .map(|i| LeafSet::new(arity, sys.block(i)))
                    .collect::<Result<_, _>>()?;
                return Ok(Output::plain(leaf_sets_dot(arity, &sets)));
            }
            let mut out = Output::verdict(&group, format!("lower-system {s} {y}"), sys.verdict());
            out.text = format!("{}{}", sys.to_text(), out.text);
            if *key_lemma && sys.is_complete() {
                let (w, v) = key_lemma_support(&h, &sys, b)?;
                let label = format!("key-lemma {s} {y}: {w}");
                out.text.push_str(&verdict_text(&group, &label, &v));
                out.claims.push((label, v));
            }
            out
        }
        Command::Family {
            subgroup: s,
            leafset: t,
            count,
            min_level,
        } => {
            let h = subgroup(&group, s, b)?;
            let fam = invariant_independent_family(&h, &leafset(t)?, *count, *min_level, b)?;
            Output::plain(fam.iter().map(|f| format!("{f}\n")).collect())
        }
        Command::BuildJ { family, support } => {
            let fam = family
                .split(';')
                .map(|y| leafset(y.trim()))
                .collect::<Result<Vec<_>, _>>()?;
            let idx = support
                .split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<usize>().map_err(|_| Error::Parse {
                        line: 0,
                        msg: format!("bad index `{t}`"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            Output::plain(gens_text(&build_j(&group, &fam, &idx, b)?))
        }
        Command::Diagonal { leafset: y } => {
            Output::plain(gens_text(&diagonal_subgroup(&group, &leafset(y)?, b)?))
        }
        Command::Depth(DepthCmd::Verify { chain }) => {
            let c = DepthChain::parse(&read(chain)?, Some(&group), b)?;
            let v = verify_depth_chain(&c, b)?;
            let mut out =
                Output::verdict(c.group(), format!("depth chain of length {}", c.len()), v);
            if c.group().hash() != group.hash() {
                out.text = format!("group: {}\n{}", c.group().name(), out.text);
            }
            out
        }
        Command::Classify {
            subgroup: s,
            not_fg,
        } => {
            let c = if *not_fg {
                classify_not_finitely_generated()
            } else {
                classify(&subgroup(&group, s, b)?, b)?
            };
            classification_output(&group, &format!("classify {s}"), c)
        }
        Command::Gn { subgroup: s } => {
            let h = subgroup(&group, s, b)?;
            match gn_classify(&h, b)? {
                GnOutcome::FiniteSection { vertex, verdict } => Output::verdict(
                    &group,
                    format!("gn {s}: finite section at {vertex}"),
                    verdict,
                ),
                GnOutcome::InfraDirect { leaves, verdict } => Output::verdict(
                    &group,
                    format!("gn {s}: infra-direct over {leaves}"),
                    verdict,
                ),
                GnOutcome::Unknown { bound } => Output {
                    text: format!("gn {s}: unknown ({bound})\n"),
                    claims: vec![(
                        format!("gn {s}"),
                        Verdict::unknown(bound, branchlab_core::Certificate::None),
                    )],
                    decided: false,
                },
            }
        }
        Command::Nbhd {
            subgroup: s,
            avoid,
            contain,
        } => {
            let h = subgroup(&group, s, b)?;
            let v = neighborhood_contains(&h, &words(&group, avoid)?, &words(&group, contain)?, b)?;
            Output::verdict(
                &group,
                format!("nbhd {s} avoid {avoid} contain {contain}"),
                v,
            )
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            if cli.global.format == Format::Structured && !out.claims.is_empty() {
                let group = match &cli.command {
                    Command::Depth(DepthCmd::Verify { chain }) => read(chain)
                        .ok()
                        .and_then(|t| DepthChain::parse(&t, None, &budget_from(&cli.global)).ok())
                        .map(|c| c.group().clone()),
                    _ => None,
                };
                let group = match group.map(Ok).unwrap_or_else(|| load_group(&cli.global)) {
                    Ok(g) => g,
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(3);
                    }
                };
                let mut r = Report::new(&group);
                for (label, v) in out.claims {
                    r.push(label, v);
                }
                print!("{}", r.to_text());
            } else {
                print!("{}", out.text);
            }
            if cli.global.require_decision && !out.decided {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Budget(_) => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}
