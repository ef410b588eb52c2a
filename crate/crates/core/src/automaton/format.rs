//! Line-oriented automaton exchange format.
//!
//! ```text
//! # optional comments
//! states: q0 q1
//! initial: q0
//! accepting: q1
//! alphabet: a b
//! q0 -- a & !b --> q1
//! q1 -- true --> q1
//! ```
//!
//! Guards use the boolean fragment of the LTL surface grammar
//! (atoms, `!`, `&`, `|`, `true`, `false`, parentheses).

use super::{Guard, Nba};
use crate::ltl::{parse_ltl, Ltl};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum NbaFormatError {
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("line {line}: guard parse error: {msg}")]
    Guard { line: usize, msg: String },
}

fn fmt_err(line: usize, msg: impl Into<String>) -> NbaFormatError {
    NbaFormatError::Format {
        line,
        msg: msg.into(),
    }
}

fn ltl_to_guard(f: &Ltl) -> Option<Guard> {
    Some(match f {
        Ltl::True => Guard::True,
        Ltl::False => Guard::False,
        Ltl::Atom(a) => Guard::Atom(a.clone()),
        Ltl::Not(x) => Guard::not(ltl_to_guard(x)?),
        Ltl::And(a, b) => Guard::and(ltl_to_guard(a)?, ltl_to_guard(b)?),
        Ltl::Or(a, b) => Guard::or(ltl_to_guard(a)?, ltl_to_guard(b)?),
        _ => return None, // temporal operators are not guards
    })
}

pub(crate) fn parse_guard_text(text: &str, line: usize) -> Result<Guard, NbaFormatError> {
    let f = parse_ltl(text).map_err(|e| NbaFormatError::Guard {
        line,
        msg: e.to_string(),
    })?;
    ltl_to_guard(&f).ok_or_else(|| NbaFormatError::Guard {
        line,
        msg: "temporal operators are not allowed in guards".into(),
    })
}

/// Parse the `.nba` text format.
pub fn parse_nba(text: &str) -> Result<Nba, NbaFormatError> {
    let mut states: Option<Vec<String>> = None;
    let mut initial: Vec<String> = Vec::new();
    let mut accepting: Vec<String> = Vec::new();
    let mut alphabet: Vec<String> = Vec::new();
    let mut edges: Vec<(usize, String, String, String)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("states:") {
            states = Some(rest.split_whitespace().map(String::from).collect());
        } else if let Some(rest) = line.strip_prefix("initial:") {
            initial.extend(rest.split_whitespace().map(String::from));
        } else if let Some(rest) = line.strip_prefix("accepting:") {
            accepting.extend(rest.split_whitespace().map(String::from));
        } else if let Some(rest) = line.strip_prefix("alphabet:") {
            alphabet.extend(rest.split_whitespace().map(String::from));
        } else if let Some(arrow) = line.find("--") {
            let src = line[..arrow].trim().to_string();
            let rest = &line[arrow + 2..];
            let close = rest
                .find("-->")
                .ok_or_else(|| fmt_err(line_no, "edge line is missing `-->`"))?;
            let guard = rest[..close].trim().to_string();
            let dst = rest[close + 3..].trim().to_string();
            if src.is_empty() || dst.is_empty() {
                return Err(fmt_err(line_no, "edge endpoints must be non-empty"));
            }
            edges.push((line_no, src, guard, dst));
        } else {
            return Err(fmt_err(line_no, format!("unrecognized line {line:?}")));
        }
    }

    let states = states.ok_or_else(|| fmt_err(0, "missing `states:` header"))?;
    if states.is_empty() {
        return Err(fmt_err(0, "state list is empty"));
    }
    let mut index: HashMap<&str, u32> = HashMap::new();
    for (i, name) in states.iter().enumerate() {
        if index.insert(name, i as u32).is_some() {
            return Err(fmt_err(0, format!("duplicate state name {name:?}")));
        }
    }

    let mut nba = Nba::new(alphabet);
    for name in &states {
        nba.add_state(name.clone());
    }
    if initial.is_empty() {
        return Err(fmt_err(0, "missing or empty `initial:` header"));
    }
    for name in &initial {
        let q = *index
            .get(name.as_str())
            .ok_or_else(|| fmt_err(0, format!("initial state {name:?} not in the state list")))?;
        nba.mark_initial(q);
    }
    for name in &accepting {
        let q = *index.get(name.as_str()).ok_or_else(|| {
            fmt_err(0, format!("accepting state {name:?} not in the state list"))
        })?;
        nba.mark_accepting(q);
    }
    for (line_no, src, guard_text, dst) in edges {
        let s = *index
            .get(src.as_str())
            .ok_or_else(|| fmt_err(line_no, format!("edge source {src:?} not in the state list")))?;
        let d = *index
            .get(dst.as_str())
            .ok_or_else(|| fmt_err(line_no, format!("edge target {dst:?} not in the state list")))?;
        let guard = parse_guard_text(&guard_text, line_no)?;
        nba.add_edge(s, guard, d)
            .map_err(|e| fmt_err(line_no, e.to_string()))?;
    }
    Ok(nba)
}

/// Emit the `.nba` text format; `parse_nba(emit_nba(a))` reconstructs an
/// automaton with identical indices, sets and guards.
pub fn emit_nba(nba: &Nba) -> String {
    let mut out = String::new();
    let names: Vec<&str> = (0..nba.num_states() as u32)
        .map(|q| nba.state_name(q))
        .collect();
    out.push_str("states:");
    for n in &names {
        out.push(' ');
        out.push_str(n);
    }
    out.push('\n');
    out.push_str("initial:");
    for &q in nba.initial_states() {
        out.push(' ');
        out.push_str(names[q as usize]);
    }
    out.push('\n');
    out.push_str("accepting:");
    for &q in nba.accepting_states() {
        out.push(' ');
        out.push_str(names[q as usize]);
    }
    out.push('\n');
    out.push_str("alphabet:");
    for a in nba.alphabet() {
        out.push(' ');
        out.push_str(a);
    }
    out.push('\n');
    for e in nba.edges() {
        out.push_str(&format!(
            "{} -- {} --> {}\n",
            names[e.src as usize], e.guard, names[e.dst as usize]
        ));
    }
    out
}
