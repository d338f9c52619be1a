//! Multi-agent market instances and their text format.
//!
//! ```text
//! # comment
//! [firms] f1 f2
//! [workers] w1
//! [contracts]
//! a f1 w1 0 20          # id firm worker [u_worker u_firm]
//! [choice f1] kind=order acceptable={a}
//! a b
//! [choice w1] kind=quota q=2
//! b a
//! [choice f2] kind=explicit
//! {} -> {}
//! [choice w2] kind=utility
//! ```
//!
//! Every agent owns the contracts naming it; its choice specification may
//! only mention that block. `order`/`quota` rank the whole block best first,
//! `utility` maximises the agent's side of the contract utilities over the
//! non-negative ones, and `explicit` lists a full table over the block.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::choice::table::{format_table, parse_table};
use crate::choice::{Block, ChoiceFunction, LinearOrder};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::set::{ContractSet, Universe};
use crate::stability::{Side, SidePair};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Contract {
    pub label: String,
    pub firm: usize,
    pub worker: usize,
    /// `(u_worker, u_firm)`.
    pub utilities: Option<(i64, i64)>,
}

/// Source-level choice specification; contract references are global indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChoiceSpec {
    /// Local table indexed by block-relative masks.
    Explicit(Vec<u64>),
    Order {
        ranking: Vec<usize>,
        acceptable: Option<Vec<usize>>,
    },
    Quota {
        ranking: Vec<usize>,
        acceptable: Option<Vec<usize>>,
        quota: usize,
    },
    Utility,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AgentRef {
    pub side: Side,
    pub index: usize,
}

#[derive(Clone, Debug)]
pub struct AgentChoice {
    pub spec: ChoiceSpec,
    /// Global contract indices owned by the agent, ascending.
    pub block: Vec<usize>,
    /// The agent's function over its block, indexed in `block` order.
    pub choice: ChoiceFunction,
}

/// Firms choose with the aggregated `G`, workers with the aggregated `F`.
#[derive(Clone, Debug)]
pub struct MarketInstance {
    firms: Vec<String>,
    workers: Vec<String>,
    contracts: Vec<Contract>,
    universe: Universe,
    firm_choices: Vec<AgentChoice>,
    worker_choices: Vec<AgentChoice>,
}

impl PartialEq for MarketInstance {
    fn eq(&self, other: &Self) -> bool {
        let specs = |v: &[AgentChoice]| v.iter().map(|a| a.spec.clone()).collect::<Vec<_>>();
        self.firms == other.firms
            && self.workers == other.workers
            && self.contracts == other.contracts
            && specs(&self.firm_choices) == specs(&other.firm_choices)
            && specs(&self.worker_choices) == specs(&other.worker_choices)
    }
}

struct RawChoice {
    line: usize,
    agent: String,
    params: Vec<String>,
    body: Vec<(usize, String)>,
}

enum Section {
    None,
    Firms,
    Workers,
    Contracts,
    Choice(usize),
}

/// Whitespace split that keeps `{a, b}` groups together.
fn tokens(text: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut depth = 0i32;
    for t in text.split_whitespace() {
        if depth > 0 {
            let last = out.last_mut().expect("open group");
            last.push(' ');
            last.push_str(t);
        } else {
            out.push(t.to_string());
        }
        depth += t.matches('{').count() as i32 - t.matches('}').count() as i32;
    }
    out
}

impl MarketInstance {
    pub fn parse(text: &str, cfg: &Config) -> Result<Self> {
        let mut firms: Vec<(usize, String)> = Vec::new();
        let mut workers: Vec<(usize, String)> = Vec::new();
        let mut contract_lines: Vec<(usize, Vec<String>)> = Vec::new();
        let mut choices: Vec<RawChoice> = Vec::new();
        let mut section = Section::None;

        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let rest = if let Some(h) = content.strip_prefix('[') {
                let (name, rest) = h
                    .split_once(']')
                    .ok_or_else(|| Error::Syntax { line, msg: "unterminated section header".into() })?;
                let mut words = name.split_whitespace();
                section = match (words.next(), words.next(), words.next()) {
                    (Some("firms"), None, _) => Section::Firms,
                    (Some("workers"), None, _) => Section::Workers,
                    (Some("contracts"), None, _) => Section::Contracts,
                    (Some("choice"), Some(agent), None) => {
                        choices.push(RawChoice {
                            line,
                            agent: agent.to_string(),
                            params: tokens(rest),
                            body: Vec::new(),
                        });
                        section = Section::Choice(choices.len() - 1);
                        continue;
                    }
                    _ => return Err(Error::Syntax { line, msg: format!("unknown section `[{name}]`") }),
                };
                rest.trim()
            } else {
                content
            };
            if rest.is_empty() {
                continue;
            }
            match section {
                Section::None => return Err(Error::Syntax { line, msg: "content before any section".into() }),
                Section::Firms => firms.extend(rest.split_whitespace().map(|t| (line, t.to_string()))),
                Section::Workers => workers.extend(rest.split_whitespace().map(|t| (line, t.to_string()))),
                Section::Contracts => contract_lines.push((line, tokens(rest))),
                Section::Choice(k) => choices[k].body.push((line, rest.to_string())),
            }
        }

        let mut agents: HashMap<String, AgentRef> = HashMap::new();
        for (side, list) in [(Side::G, &firms), (Side::F, &workers)] {
            for (index, (line, name)) in list.iter().enumerate() {
                if agents.insert(name.clone(), AgentRef { side, index }).is_some() {
                    return Err(Error::Syntax { line: *line, msg: format!("duplicate agent `{name}`") });
                }
            }
        }

        let mut contracts = Vec::with_capacity(contract_lines.len());
        for (line, toks) in &contract_lines {
            let line = *line;
            if toks.len() != 3 && toks.len() != 5 {
                return Err(Error::Syntax { line, msg: "expected `id firm worker [u_worker u_firm]`".into() });
            }
            let lookup = |name: &str, side: Side| match agents.get(name) {
                Some(r) if r.side == side => Ok(r.index),
                _ => Err(Error::UnknownAgent { line, name: name.to_string() }),
            };
            let firm = lookup(&toks[1], Side::G)?;
            let worker = lookup(&toks[2], Side::F)?;
            let utilities = if toks.len() == 5 {
                let p = |t: &str| {
                    t.parse::<i64>()
                        .map_err(|_| Error::Syntax { line, msg: format!("utility `{t}` is not an integer") })
                };
                Some((p(&toks[3])?, p(&toks[4])?))
            } else {
                None
            };
            contracts.push(Contract { label: toks[0].clone(), firm, worker, utilities });
        }
        let universe = Universe::new(contracts.iter().map(|c| c.label.clone())).map_err(|e| match e {
            Error::DuplicateLabel(l) => Error::Syntax { line: 0, msg: format!("duplicate contract `{l}`") },
            other => other,
        })?;

        let mut specs: HashMap<AgentRef, (ChoiceSpec, usize)> = HashMap::new();
        for rc in &choices {
            let agent =
                *agents.get(&rc.agent).ok_or_else(|| Error::UnknownAgent { line: rc.line, name: rc.agent.clone() })?;
            let block = block_of(&contracts, agent);
            let spec = parse_spec(rc, &universe, &block, &contracts, agent, cfg)?;
            if specs.insert(agent, (spec, rc.line)).is_some() {
                return Err(Error::Syntax { line: rc.line, msg: format!("second choice section for `{}`", rc.agent) });
            }
        }

        let mut build = |side: Side, names: &[(usize, String)]| -> Result<Vec<AgentChoice>> {
            (0..names.len())
                .map(|index| {
                    let agent = AgentRef { side, index };
                    let (spec, _) = specs.remove(&agent).ok_or_else(|| Error::MissingChoice(names[index].1.clone()))?;
                    let block = block_of(&contracts, agent);
                    let choice = materialise(&spec, &block, &contracts, side, cfg)?;
                    Ok(AgentChoice { spec, block, choice })
                })
                .collect()
        };
        let firm_choices = build(Side::G, &firms)?;
        let worker_choices = build(Side::F, &workers)?;

        Ok(MarketInstance {
            firms: firms.into_iter().map(|(_, n)| n).collect(),
            workers: workers.into_iter().map(|(_, n)| n).collect(),
            contracts,
            universe,
            firm_choices,
            worker_choices,
        })
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn firms(&self) -> &[String] {
        &self.firms
    }

    pub fn workers(&self) -> &[String] {
        &self.workers
    }

    pub fn contracts(&self) -> &[Contract] {
        &self.contracts
    }

    pub fn agent(&self, name: &str) -> Option<AgentRef> {
        if let Some(i) = self.firms.iter().position(|f| f == name) {
            return Some(AgentRef { side: Side::G, index: i });
        }
        self.workers.iter().position(|w| w == name).map(|i| AgentRef { side: Side::F, index: i })
    }

    pub fn agent_choice(&self, agent: AgentRef) -> &AgentChoice {
        match agent.side {
            Side::G => &self.firm_choices[agent.index],
            Side::F => &self.worker_choices[agent.index],
        }
    }

    /// Labels of an agent's block, in block order.
    pub fn agent_universe(&self, agent: AgentRef) -> Universe {
        let block = &self.agent_choice(agent).block;
        Universe::new(block.iter().map(|&c| self.contracts[c].label.clone())).expect("labels are unique")
    }

    /// Aggregated `F` (workers) or `G` (firms) over the whole universe.
    pub fn side_choice(&self, side: Side) -> ChoiceFunction {
        let agents = match side {
            Side::G => &self.firm_choices,
            Side::F => &self.worker_choices,
        };
        let blocks =
            agents.iter().map(|a| Block::new(a.block.clone(), a.choice.clone()).expect("block sizes match")).collect();
        ChoiceFunction::aggregate(self.contracts.len(), blocks).expect("blocks partition the contracts")
    }

    /// Both aggregated sides, not yet certified.
    pub fn aggregate_sides(&self) -> SidePair {
        SidePair::uncertified(self.side_choice(Side::F), self.side_choice(Side::G)).expect("shared universe")
    }

    /// Both aggregated sides, certified path-independent.
    pub fn certified_sides(&self, cfg: &Config) -> Result<SidePair> {
        SidePair::certify(self.side_choice(Side::F), self.side_choice(Side::G), cfg)
    }

    /// Canonical text form; parsing it yields an equal instance.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "[firms] {}", self.firms.join(" "));
        let _ = writeln!(out, "[workers] {}", self.workers.join(" "));
        out.push_str("[contracts]\n");
        for c in &self.contracts {
            let _ = write!(out, "{} {} {}", c.label, self.firms[c.firm], self.workers[c.worker]);
            if let Some((uw, uf)) = c.utilities {
                let _ = write!(out, " {uw} {uf}");
            }
            out.push('\n');
        }
        let label = |i: &usize| self.contracts[*i].label.as_str();
        let acceptable = |a: &Option<Vec<usize>>| match a {
            Some(a) => format!(" acceptable={{{}}}", a.iter().map(label).collect::<Vec<_>>().join(",")),
            None => String::new(),
        };
        let sections = self.firms.iter().zip(&self.firm_choices).chain(self.workers.iter().zip(&self.worker_choices));
        for (name, ac) in sections {
            match &ac.spec {
                ChoiceSpec::Explicit(_) => {
                    let _ = writeln!(out, "[choice {name}] kind=explicit");
                    let u = Universe::new(ac.block.iter().map(|&c| self.contracts[c].label.clone())).expect("unique");
                    for row in format_table(&u, &ac.choice) {
                        let _ = writeln!(out, "{row}");
                    }
                }
                ChoiceSpec::Order { ranking, acceptable: a } => {
                    let _ = writeln!(out, "[choice {name}] kind=order{}", acceptable(a));
                    let _ = writeln!(out, "{}", ranking.iter().map(label).collect::<Vec<_>>().join(" "));
                }
                ChoiceSpec::Quota { ranking, acceptable: a, quota } => {
                    let _ = writeln!(out, "[choice {name}] kind=quota q={quota}{}", acceptable(a));
                    let _ = writeln!(out, "{}", ranking.iter().map(label).collect::<Vec<_>>().join(" "));
                }
                ChoiceSpec::Utility => {
                    let _ = writeln!(out, "[choice {name}] kind=utility");
                }
            }
        }
        out
    }
}

fn block_of(contracts: &[Contract], agent: AgentRef) -> Vec<usize> {
    contracts
        .iter()
        .enumerate()
        .filter(|(_, c)| match agent.side {
            Side::G => c.firm == agent.index,
            Side::F => c.worker == agent.index,
        })
        .map(|(i, _)| i)
        .collect()
}

fn parse_spec(
    rc: &RawChoice,
    universe: &Universe,
    block: &[usize],
    contracts: &[Contract],
    agent: AgentRef,
    cfg: &Config,
) -> Result<ChoiceSpec> {
    let line = rc.line;
    let mut kind = None;
    let mut quota = None;
    let mut acceptable = None;
    let mut ranked = Vec::new();
    let body_tokens: Vec<(usize, String)> = match rc.params.iter().find(|p| p.as_str() == "kind=explicit") {
        Some(_) => Vec::new(),
        None => rc.body.iter().flat_map(|(l, t)| tokens(t).into_iter().map(move |t| (*l, t))).collect(),
    };
    let header = rc.params.iter().map(|t| (line, t.clone()));
    let in_block = |l: usize, label: &str| -> Result<usize> {
        match universe.lookup(label) {
            Some(id) if block.contains(&id.0) => Ok(id.0),
            _ => Err(Error::ContractOutsideBlock { line: l, agent: rc.agent.clone(), contract: label.to_string() }),
        }
    };
    for (l, tok) in header.chain(body_tokens) {
        if let Some(v) = tok.strip_prefix("kind=") {
            kind = Some(v.to_string());
        } else if let Some(v) = tok.strip_prefix("q=") {
            quota = Some(v.parse::<usize>().map_err(|_| Error::Syntax { line: l, msg: format!("bad quota `{v}`") })?);
        } else if let Some(v) = tok.strip_prefix("acceptable=") {
            let inner = v
                .trim()
                .strip_prefix('{')
                .and_then(|r| r.strip_suffix('}'))
                .ok_or_else(|| Error::Syntax { line: l, msg: format!("bad acceptable set `{v}`") })?;
            let mut set: Vec<usize> = inner
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| in_block(l, s))
                .collect::<Result<_>>()?;
            set.sort_unstable();
            set.dedup();
            acceptable = Some(set);
        } else if tok.contains('=') {
            return Err(Error::Syntax { line: l, msg: format!("unknown parameter `{tok}`") });
        } else {
            ranked.push(in_block(l, &tok)?);
        }
    }
    let kind = kind.ok_or_else(|| Error::Syntax { line, msg: "choice section without `kind=`".into() })?;
    let check_ranking = |ranking: &[usize]| {
        let mut sorted = ranking.to_vec();
        sorted.sort_unstable();
        if sorted != block {
            return Err(Error::Syntax {
                line,
                msg: format!("order for `{}` must rank every contract of its block exactly once", rc.agent),
            });
        }
        Ok(())
    };
    match kind.as_str() {
        "order" | "quota" => {
            check_ranking(&ranked)?;
            if kind == "order" {
                if quota.is_some() {
                    return Err(Error::Syntax { line, msg: "`q=` is only valid for kind=quota".into() });
                }
                Ok(ChoiceSpec::Order { ranking: ranked, acceptable })
            } else {
                let quota = quota.ok_or_else(|| Error::Syntax { line, msg: "kind=quota requires `q=`".into() })?;
                Ok(ChoiceSpec::Quota { ranking: ranked, acceptable, quota })
            }
        }
        "utility" => {
            if !ranked.is_empty() || quota.is_some() || acceptable.is_some() {
                return Err(Error::Syntax { line, msg: "kind=utility takes no body".into() });
            }
            if let Some(&c) = block.iter().find(|&&c| contracts[c].utilities.is_none()) {
                return Err(Error::Syntax { line, msg: format!("contract `{}` has no utilities", contracts[c].label) });
            }
            Ok(ChoiceSpec::Utility)
        }
        "explicit" => {
            if rc.params.len() != 1 {
                return Err(Error::Syntax { line, msg: "kind=explicit takes no parameters".into() });
            }
            let local = Universe::new(block.iter().map(|&c| contracts[c].label.clone()))?;
            let cf = parse_table(&local, rc.body.iter().map(|(l, t)| (*l, t.as_str())), cfg.cap, &rc.agent).map_err(
                |e| match e {
                    Error::PartialTable { line: 0, agent, missing } => Error::PartialTable { line, agent, missing },
                    other => other,
                },
            )?;
            let _ = agent;
            let table = crate::set::powerset(block.len()).map(|x| cf.apply(x).bits()).collect();
            Ok(ChoiceSpec::Explicit(table))
        }
        other => Err(Error::Syntax { line, msg: format!("unknown choice kind `{other}`") }),
    }
}

fn materialise(
    spec: &ChoiceSpec,
    block: &[usize],
    contracts: &[Contract],
    side: Side,
    cfg: &Config,
) -> Result<ChoiceFunction> {
    let k = block.len();
    let local = |global: usize| block.iter().position(|&c| c == global).expect("validated against block");
    let order = |ranking: &[usize], acceptable: &Option<Vec<usize>>| -> Result<LinearOrder> {
        let acc = acceptable.as_ref().map(|a| ContractSet::from_indices(k, a.iter().map(|&g| local(g)))).transpose()?;
        LinearOrder::new(ranking.iter().map(|&g| local(g)).collect(), acc)
    };
    match spec {
        ChoiceSpec::Explicit(table) => {
            let rows = table.iter().map(|&b| ContractSet::from_bits(k, b)).collect::<Result<Vec<_>>>()?;
            ChoiceFunction::explicit(k, rows, cfg.cap)
        }
        ChoiceSpec::Order { ranking, acceptable } => Ok(ChoiceFunction::linear_order(order(ranking, acceptable)?)),
        ChoiceSpec::Quota { ranking, acceptable, quota } => {
            Ok(ChoiceFunction::quota(order(ranking, acceptable)?, *quota))
        }
        ChoiceSpec::Utility => ChoiceFunction::utility(
            block
                .iter()
                .map(|&c| {
                    let (uw, uf) = contracts[c].utilities.expect("validated");
                    match side {
                        Side::F => uw as f64,
                        Side::G => uf as f64,
                    }
                })
                .collect(),
        ),
    }
}
