//! `plott`: command-line front end for path-independent choice and stable
//! contract sets.
//!
//! Exit codes: 0 success, 1 domain error (one `error: ` line on stderr),
//! 2 usage error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use plott_core::choice::table::format_table;
use plott_core::choice::{decompose_into_orders, is_plott, CheckMode, PlottReport};
use plott_core::config::{DEFAULT_CAP, DEFAULT_TRIALS};
use plott_core::hyperorder::{
    audit_lehmann_axioms, reconstruct_choice, AxiomStatus, ExtensionalRelation, LehmannRelation,
};
use plott_core::oracle::{enumerate_stable_sets, verify_lattice};
use plott_core::set::powerset;
use plott_core::stability::{
    blair_compare_stable, comparative_statics, lattice_join, lattice_meet, run_to_fixpoint, side_optimal, BlairOrdering,
};
use plott_core::{
    ChoiceFunction, Config, ContractSet, Error, MarketInstance, SemiStablePair, Side, SidePair, Universe,
};

#[derive(Parser)]
#[command(name = "plott", version, about = "Path-independent choice and stable sets of contracts")]
struct Cli {
    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Largest universe handled exhaustively.
    #[arg(long, global = true, default_value_t = DEFAULT_CAP)]
    cap: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check path independence of a side or a single agent.
    Check {
        instance: PathBuf,
        #[command(flatten)]
        target: Target,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        /// Samples drawn in sampled mode.
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
        /// Also audit the induced hyper-order against L0-L5 and transitivity.
        #[arg(long)]
        axioms: bool,
    },
    /// Run the offer/accept process to the stable set best for one side.
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = SideArg::F)]
        favor: SideArg,
        /// Print every snapshot of the process before the result.
        #[arg(long)]
        trace: bool,
    },
    /// List every stable set.
    Enumerate {
        instance: PathBuf,
        /// Print the full catalog with both Blair matrices.
        #[arg(long)]
        catalog: bool,
    },
    /// Join or meet stable sets, or verify the whole lattice.
    Lattice {
        instance: PathBuf,
        #[arg(long, num_args = 1.., conflicts_with = "meet")]
        join: Vec<String>,
        #[arg(long, num_args = 1..)]
        meet: Vec<String>,
    },
    /// Compare two stable sets under the chosen side's Blair order.
    Compare {
        instance: PathBuf,
        first: String,
        second: String,
        #[arg(long, value_enum, default_value_t = SideArg::G)]
        side: SideArg,
    },
    /// Move a stable set to the market where the workers' choice is weakened.
    Statics {
        instance: PathBuf,
        /// Instance over the same contracts whose worker side is the weaker `F'`.
        weakened: PathBuf,
        /// Stable set to move; defaults to the F-optimal one.
        #[arg(long)]
        set: Option<String>,
    },
    /// Audit the hyper-order of a choice function and rebuild the function from it.
    Lehmann {
        instance: PathBuf,
        #[command(flatten)]
        target: Target,
        /// Rebuild the function and compare it on every subset.
        #[arg(long)]
        roundtrip: bool,
        /// Use this relation file (`{A} < {B}` lines) instead of the derived relation.
        #[arg(long)]
        relation: Option<PathBuf>,
        /// Print the derived relation in the relation-file format.
        #[arg(long)]
        export: bool,
    },
    /// Write a choice function as a union of linear orders.
    Decompose {
        instance: PathBuf,
        #[command(flatten)]
        target: Target,
    },
}

#[derive(Args)]
struct Target {
    /// A single agent's choice over its own contracts.
    #[arg(long, conflicts_with = "side")]
    agent: Option<String>,
    /// An aggregated side: F (workers) or G (firms).
    #[arg(long, value_enum)]
    side: Option<SideArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    #[value(name = "F", alias = "f")]
    F,
    #[value(name = "G", alias = "g")]
    G,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::F => Side::F,
            SideArg::G => Side::G,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exhaustive,
    Sampled,
}

type CmdResult = Result<String, String>;
type LatticeOp = fn(&SidePair, &[ContractSet]) -> plott_core::Result<ContractSet>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = Config::default().with_seed(cli.seed).with_cap(cli.cap);
    match run(cli.command, cfg) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command, cfg: Config) -> CmdResult {
    match command {
        Command::Check { instance, target, mode, trials, axioms } => {
            let cfg = Config { trials, ..cfg };
            cmd_check(&load(&instance, &cfg)?, &target, mode, axioms, &cfg)
        }
        Command::Solve { instance, favor, trace } => cmd_solve(&load(&instance, &cfg)?, favor.into(), trace, &cfg),
        Command::Enumerate { instance, catalog } => cmd_enumerate(&load(&instance, &cfg)?, catalog, &cfg),
        Command::Lattice { instance, join, meet } => cmd_lattice(&load(&instance, &cfg)?, &join, &meet, &cfg),
        Command::Compare { instance, first, second, side } => {
            cmd_compare(&load(&instance, &cfg)?, &first, &second, side.into(), &cfg)
        }
        Command::Statics { instance, weakened, set } => {
            cmd_statics(&load(&instance, &cfg)?, &load(&weakened, &cfg)?, set.as_deref(), &cfg)
        }
        Command::Lehmann { instance, target, roundtrip, relation, export } => {
            cmd_lehmann(&load(&instance, &cfg)?, &target, roundtrip, relation.as_deref(), export, &cfg)
        }
        Command::Decompose { instance, target } => cmd_decompose(&load(&instance, &cfg)?, &target, &cfg),
    }
}

fn err(e: Error) -> String {
    e.to_string()
}

fn load(path: &Path, cfg: &Config) -> Result<MarketInstance, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    MarketInstance::parse(&text, cfg).map_err(|e| format!("{}: {e}", path.display()))
}

struct Subject {
    name: String,
    universe: Universe,
    choice: ChoiceFunction,
}

/// The chosen agent, the chosen side, or side `G` when neither is given.
fn subject(m: &MarketInstance, target: &Target) -> Result<Subject, String> {
    if let Some(name) = &target.agent {
        let agent = m.agent(name).ok_or_else(|| format!("unknown agent `{name}`"))?;
        return Ok(Subject {
            name: format!("agent {name}"),
            universe: m.agent_universe(agent),
            choice: m.agent_choice(agent).choice.clone(),
        });
    }
    let side: Side = target.side.map_or(Side::G, Side::from);
    Ok(Subject { name: format!("side {side}"), universe: m.universe().clone(), choice: m.side_choice(side) })
}

fn parse_set(universe: &Universe, text: &str) -> Result<ContractSet, String> {
    universe.parse_set(text).map_err(err)
}

fn describe_plott(u: &Universe, report: &PlottReport) -> String {
    if let Some(w) = report.heredity_witness {
        return format!(
            "NOT PLOTT: heredity violated at B={}, A={}, element {}",
            u.format_set(&w.big),
            u.format_set(&w.small),
            u.labels()[w.element]
        );
    }
    if let Some(w) = report.outcast_witness {
        return format!("NOT PLOTT: outcast violated at X={}, Y={}", u.format_set(&w.x), u.format_set(&w.y));
    }
    match report.mode {
        CheckMode::Exhaustive => "PLOTT (exhaustive)".into(),
        CheckMode::Sampled { seed, trials } => format!("PLOTT (sampled, seed {seed}, {trials} trials)"),
    }
}

fn cmd_check(m: &MarketInstance, target: &Target, mode: Option<Mode>, axioms: bool, cfg: &Config) -> CmdResult {
    let subjects = if target.agent.is_none() && target.side.is_none() {
        vec![
            subject(m, &Target { agent: None, side: Some(SideArg::F) })?,
            subject(m, &Target { agent: None, side: Some(SideArg::G) })?,
        ]
    } else {
        vec![subject(m, target)?]
    };
    let mut out = String::new();
    for s in &subjects {
        let n = s.universe.len();
        let mode = match mode {
            None => CheckMode::auto(n, cfg),
            Some(Mode::Exhaustive) => CheckMode::Exhaustive,
            Some(Mode::Sampled) => CheckMode::Sampled { seed: cfg.seed, trials: cfg.trials },
        };
        let report = is_plott(&s.choice, mode, cfg).map_err(err)?;
        if subjects.len() > 1 {
            let _ = write!(out, "{}: ", s.name);
        }
        let _ = writeln!(out, "{}", describe_plott(&s.universe, &report));
        if axioms {
            let audit = audit_lehmann_axioms(&LehmannRelation::Derived(s.choice.clone()), cfg).map_err(err)?;
            out.push_str(&format_audit(&s.universe, &audit.results));
        }
    }
    Ok(out)
}

fn format_audit(u: &Universe, results: &[(plott_core::hyperorder::Axiom, AxiomStatus)]) -> String {
    let mut out = String::new();
    for (axiom, status) in results {
        match status {
            AxiomStatus::Pass => {
                let _ = writeln!(out, "{axiom}: pass");
            }
            AxiomStatus::Fail(sets) => {
                let shown: Vec<String> = sets.iter().map(|s| u.format_set(s)).collect();
                let _ = writeln!(out, "{axiom}: FAIL at {}", shown.join(" "));
            }
        }
    }
    out
}

fn cmd_solve(m: &MarketInstance, favor: Side, trace: bool, cfg: &Config) -> CmdResult {
    let sides = m.certified_sides(cfg).map_err(err)?;
    let u = m.universe();
    if !trace {
        return Ok(format!("{}\n", u.format_set(&side_optimal(&sides, favor).map_err(err)?)));
    }
    // The G-favoured run is the F-favoured run with roles exchanged.
    let sides = match favor {
        Side::F => sides,
        Side::G => sides.swapped(),
    };
    let t = run_to_fixpoint(&sides, &SemiStablePair::bottom(&sides)).map_err(err)?;
    let mut out = t.export(u);
    if favor == Side::G {
        out = out.replace("F(Z)", "G(Z)").replace("G(G(Z))", "F(G(Z))");
    }
    let _ = writeln!(out, "{}", u.format_set(&t.result.set));
    Ok(out)
}

fn cmd_enumerate(m: &MarketInstance, catalog: bool, cfg: &Config) -> CmdResult {
    let cat = enumerate_stable_sets(&m.aggregate_sides(), cfg).map_err(err)?;
    let u = m.universe();
    if catalog {
        return Ok(cat.export(u));
    }
    let mut out = format!("{} stable sets\n", cat.len());
    for s in &cat.stable_sets {
        let _ = writeln!(out, "{}", u.format_set(s));
    }
    Ok(out)
}

fn cmd_lattice(m: &MarketInstance, join: &[String], meet: &[String], cfg: &Config) -> CmdResult {
    let sides = m.certified_sides(cfg).map_err(err)?;
    let u = m.universe();
    if !join.is_empty() || !meet.is_empty() {
        let (args, op): (&[String], LatticeOp) =
            if join.is_empty() { (meet, lattice_meet) } else { (join, lattice_join) };
        let sets = args.iter().map(|s| parse_set(u, s)).collect::<Result<Vec<_>, _>>()?;
        return Ok(format!("{}\n", u.format_set(&op(&sides, &sets).map_err(err)?)));
    }
    let cat = enumerate_stable_sets(&sides, cfg).map_err(err)?;
    let report = verify_lattice(&cat, &sides).map_err(err)?;
    if !report.passed() {
        return Err(format!("lattice check failed: {:?}", report.failures[0]));
    }
    let mut out = format!("lattice verified: {} stable sets, {} pairs\n", cat.len(), report.pairs_checked);
    let name = |i: Option<usize>| i.map_or("none".to_string(), |i| u.format_set(&cat.stable_sets[i]));
    let _ = writeln!(out, "bottom {}", name(cat.g_minimum()));
    let _ = writeln!(out, "top {}", name(cat.g_maximum()));
    for (i, s) in cat.stable_sets.iter().enumerate() {
        for (j, t) in cat.stable_sets.iter().enumerate() {
            // Covering pairs only.
            let covers = i != j
                && cat.blair_g[i][j]
                && !(0..cat.len()).any(|k| k != i && k != j && cat.blair_g[i][k] && cat.blair_g[k][j]);
            if covers {
                let _ = writeln!(out, "{} < {}", u.format_set(s), u.format_set(t));
            }
        }
    }
    Ok(out)
}

fn cmd_compare(m: &MarketInstance, first: &str, second: &str, side: Side, cfg: &Config) -> CmdResult {
    let sides = m.certified_sides(cfg).map_err(err)?;
    let sides = if side == Side::F { sides.swapped() } else { sides };
    let u = m.universe();
    let (s, t) = (parse_set(u, first)?, parse_set(u, second)?);
    let word = match blair_compare_stable(&sides, &s, &t).map_err(err)? {
        BlairOrdering::Less => "less",
        BlairOrdering::Greater => "greater",
        BlairOrdering::Equal => "equal",
        BlairOrdering::Incomparable => "incomparable",
    };
    Ok(format!("{word}\n"))
}

fn cmd_statics(m: &MarketInstance, weak: &MarketInstance, set: Option<&str>, cfg: &Config) -> CmdResult {
    if m.universe().labels() != weak.universe().labels() {
        return Err("weakened instance must list the same contracts in the same order".into());
    }
    let sides = m.certified_sides(cfg).map_err(err)?;
    let u = m.universe();
    let s = match set {
        Some(text) => parse_set(u, text)?,
        None => side_optimal(&sides, Side::F).map_err(err)?,
    };
    let out = comparative_statics(&sides, &weak.side_choice(Side::F), &s, cfg).map_err(err)?;
    Ok(format!(
        "start Y={} Z={}\nresult {}\noriginal still stable: {}\n",
        u.format_set(&out.start.y()),
        u.format_set(&out.start.z()),
        u.format_set(&out.stable),
        if out.original_still_stable { "yes" } else { "no" }
    ))
}

fn cmd_lehmann(
    m: &MarketInstance,
    target: &Target,
    roundtrip: bool,
    relation: Option<&Path>,
    export: bool,
    cfg: &Config,
) -> CmdResult {
    let s = subject(m, target)?;
    let n = s.universe.len();
    if n > cfg.audit_cap {
        return Err(err(Error::CapExceeded { size: n, cap: cfg.audit_cap }));
    }
    if export {
        let pairs = powerset(n).flat_map(|a| powerset(n).map(move |b| (a, b)));
        let derived = LehmannRelation::Derived(s.choice.clone());
        let mut held = Vec::new();
        for (a, b) in pairs {
            if derived.holds(&a, &b).map_err(err)? {
                held.push((a, b));
            }
        }
        let ext = ExtensionalRelation::from_true_pairs(n, held).map_err(err)?;
        return Ok(ext.format(&s.universe));
    }
    let rel = match relation {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            LehmannRelation::Extensional(ExtensionalRelation::parse(&s.universe, &text).map_err(err)?)
        }
        None => LehmannRelation::Derived(s.choice.clone()),
    };
    let audit = audit_lehmann_axioms(&rel, cfg).map_err(err)?;
    if !roundtrip && relation.is_none() {
        return Ok(format_audit(&s.universe, &audit.results));
    }
    if !audit.overall() {
        return Err(format!("relation violates the Lehmann axioms\n{}", format_audit(&s.universe, &audit.results))
            .lines()
            .collect::<Vec<_>>()
            .join("; "));
    }
    let rebuilt = reconstruct_choice(&rel, cfg).map_err(err)?;
    if relation.is_some() && !roundtrip {
        let mut out = String::new();
        for row in format_table(&s.universe, &rebuilt) {
            let _ = writeln!(out, "{row}");
        }
        return Ok(out);
    }
    let total = 1usize << n;
    let agree = powerset(n).filter(|&x| rebuilt.apply(x) == s.choice.apply(x)).count();
    if agree != total {
        return Err(format!("round-trip FAILED ({agree}/{total} subsets)"));
    }
    Ok(format!("round-trip OK ({agree}/{total} subsets)\n"))
}

fn cmd_decompose(m: &MarketInstance, target: &Target, cfg: &Config) -> CmdResult {
    let s = subject(m, target)?;
    let d = decompose_into_orders(&s.choice, cfg).map_err(err)?;
    let mut out = String::new();
    for order in d.orders() {
        let ranking: Vec<usize> = order.acceptable_ranking().collect();
        let _ = writeln!(out, "{}", s.universe.format_order(&ranking));
    }
    let union = d.to_choice_function();
    let n = s.universe.len();
    let agree = powerset(n).filter(|&x| union.apply(x) == s.choice.apply(x)).count();
    let total = 1usize << n;
    if agree != total {
        return Err(format!("union differs from {} ({agree}/{total} subsets)", s.name));
    }
    let _ = writeln!(out, "union verified on {agree}/{total} subsets");
    Ok(out)
}
