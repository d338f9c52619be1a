//! Text form of explicit choice tables: one `{SUBSET} -> {CHOICE}` per line.

use super::ChoiceFunction;
use crate::error::{Error, Result};
use crate::set::{powerset, ContractSet, Universe};

/// Parses numbered table lines over `universe`. Every subset must appear
/// exactly once; `owner` names the agent in error messages.
pub fn parse_table<'a, I>(universe: &Universe, lines: I, cap: usize, owner: &str) -> Result<ChoiceFunction>
where
    I: IntoIterator<Item = (usize, &'a str)>,
{
    let n = universe.len();
    if n > cap {
        return Err(Error::CapExceeded { size: n, cap });
    }
    let mut rows: Vec<Option<ContractSet>> = vec![None; 1 << n];
    let mut first_line = 0;
    for (line, text) in lines {
        if first_line == 0 {
            first_line = line;
        }
        let (lhs, rhs) = text
            .split_once("->")
            .ok_or_else(|| Error::Syntax { line, msg: format!("expected `SUBSET -> CHOICE`, got `{text}`") })?;
        let arg = parse_braced(universe, lhs, line, owner)?;
        let chosen = parse_braced(universe, rhs, line, owner)?;
        if !chosen.is_subset(&arg) {
            return Err(Error::Syntax {
                line,
                msg: format!("choice `{}` is not a subset of its argument", rhs.trim()),
            });
        }
        if arg.is_empty() && !chosen.is_empty() {
            return Err(Error::Syntax { line, msg: "the empty set must choose the empty set".into() });
        }
        let slot = &mut rows[arg.bits() as usize];
        if slot.is_some() {
            return Err(Error::Syntax { line, msg: format!("duplicate row for `{}`", lhs.trim()) });
        }
        *slot = Some(chosen);
    }
    let missing = rows.iter().filter(|r| r.is_none()).count();
    if missing > 0 {
        return Err(Error::PartialTable { line: first_line, agent: owner.to_string(), missing });
    }
    ChoiceFunction::explicit(n, rows.into_iter().map(Option::unwrap).collect(), cap)
}

fn parse_braced(universe: &Universe, text: &str, line: usize, owner: &str) -> Result<ContractSet> {
    let t = text.trim();
    if !(t.starts_with('{') && t.ends_with('}')) {
        return Err(Error::Syntax { line, msg: format!("expected a braced set, got `{t}`") });
    }
    universe.parse_set(t).map_err(|e| match e {
        Error::UnknownContract(c) => Error::ContractOutsideBlock { line, agent: owner.to_string(), contract: c },
        other => other,
    })
}

/// Every row of `cf`, ascending by subset mask.
pub fn format_table(universe: &Universe, cf: &ChoiceFunction) -> Vec<String> {
    powerset(universe.len())
        .map(|x| format!("{} -> {}", universe.format_set(&x), universe.format_set(&cf.apply(x))))
        .collect()
}
