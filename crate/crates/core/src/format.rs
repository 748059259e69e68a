//! Line-oriented text format for automata.
//!
//! ```text
//! critex-automaton v1
//! # Thue–Morse
//! base: 2
//! tracks: 1
//! kind: dfao
//! order: msd
//! states: 2
//! initial: 0
//! output: 0:0 1:1
//! trans: 0 [0] -> 0
//! trans: 0 [1] -> 1
//! trans: 1 [0] -> 1
//! trans: 1 [1] -> 0
//! ```
//!
//! A `dfa` lists `accepting: q q …` instead of `output:`. Missing `dfa`
//! transitions go to an implicit dead state; a `dfao` must be complete.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::automaton::{AutomatonError, Dfa, Dfao, StateId};
use crate::numeral::{DigitOrder, Radix};

pub const HEADER: &str = "critex-automaton v1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("{0}")]
    Incomplete(String),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Automaton {
    Dfa(Dfa),
    Dfao(Dfao),
}

fn syntax(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        msg: msg.into(),
    }
}

fn number<T: std::str::FromStr>(line: usize, text: &str, what: &str) -> Result<T, FormatError> {
    text.trim()
        .parse()
        .map_err(|_| syntax(line, format!("expected {what}, found `{}`", text.trim())))
}

#[derive(Default)]
struct Header {
    base: Option<u32>,
    tracks: Option<usize>,
    kind: Option<bool>,
    order: Option<DigitOrder>,
    states: Option<usize>,
    initial: Option<StateId>,
    accepting: Option<Vec<StateId>>,
    output: Option<Vec<(StateId, u32)>>,
}

fn set<T>(slot: &mut Option<T>, value: T, line: usize, key: &str) -> Result<(), FormatError> {
    if slot.is_some() {
        return Err(syntax(line, format!("`{key}` given twice")));
    }
    *slot = Some(value);
    Ok(())
}

/// Parses the text format.
pub fn parse(text: &str) -> Result<Automaton, FormatError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()));
    match lines.next() {
        Some((_, HEADER)) => {}
        _ => return Err(syntax(1, format!("first line must be `{HEADER}`"))),
    }
    let mut h = Header::default();
    let mut trans: Vec<(usize, StateId, Vec<u32>, StateId)> = Vec::new();
    for (line, content) in lines {
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once(':')
            .ok_or_else(|| syntax(line, "expected `key: value`"))?;
        let value = value.trim();
        match key.trim() {
            "base" => set(&mut h.base, number(line, value, "a base")?, line, "base")?,
            "tracks" => set(&mut h.tracks, number(line, value, "a track count")?, line, "tracks")?,
            "states" => set(&mut h.states, number(line, value, "a state count")?, line, "states")?,
            "initial" => set(&mut h.initial, number(line, value, "a state")?, line, "initial")?,
            "kind" => {
                let dfao = match value {
                    "dfa" => false,
                    "dfao" => true,
                    other => return Err(syntax(line, format!("unknown kind `{other}`"))),
                };
                set(&mut h.kind, dfao, line, "kind")?
            }
            "order" => {
                let order = match value {
                    "msd" => DigitOrder::Msd,
                    "lsd" => DigitOrder::Lsd,
                    other => return Err(syntax(line, format!("unknown order `{other}`"))),
                };
                set(&mut h.order, order, line, "order")?
            }
            "accepting" => {
                let qs = value
                    .split_whitespace()
                    .map(|q| number(line, q, "a state"))
                    .collect::<Result<_, _>>()?;
                set(&mut h.accepting, qs, line, "accepting")?
            }
            "output" => {
                let pairs = value
                    .split_whitespace()
                    .map(|entry| {
                        let (q, o) = entry
                            .split_once(':')
                            .ok_or_else(|| syntax(line, format!("expected `state:symbol`, found `{entry}`")))?;
                        Ok((number(line, q, "a state")?, number(line, o, "an output symbol")?))
                    })
                    .collect::<Result<_, FormatError>>()?;
                set(&mut h.output, pairs, line, "output")?
            }
            "trans" => {
                let (lhs, rhs) = value
                    .split_once("->")
                    .ok_or_else(|| syntax(line, "expected `q [d,…] -> q'`"))?;
                let (from, digits) = lhs
                    .trim()
                    .split_once('[')
                    .ok_or_else(|| syntax(line, "expected `[` before the digits"))?;
                let digits = digits
                    .trim()
                    .strip_suffix(']')
                    .ok_or_else(|| syntax(line, "expected `]` after the digits"))?;
                let digits = digits
                    .split(',')
                    .map(|d| number(line, d, "a digit"))
                    .collect::<Result<_, _>>()?;
                trans.push((
                    line,
                    number(line, from, "a state")?,
                    digits,
                    number(line, rhs, "a state")?,
                ));
            }
            other => return Err(syntax(line, format!("unknown key `{other}`"))),
        }
    }
    let missing = |what: &str| FormatError::Incomplete(format!("missing `{what}:` line"));
    let radix = Radix::new(h.base.ok_or_else(|| missing("base"))?)
        .map_err(|e| FormatError::Incomplete(e.to_string()))?;
    let tracks = h.tracks.ok_or_else(|| missing("tracks"))?;
    if tracks == 0 {
        return Err(FormatError::Incomplete("tracks must be at least 1".into()));
    }
    let dfao = h.kind.ok_or_else(|| missing("kind"))?;
    let order = h.order.ok_or_else(|| missing("order"))?;
    let states = h.states.ok_or_else(|| missing("states"))?;
    let initial = h.initial.ok_or_else(|| missing("initial"))?;
    if states == 0 || initial as usize >= states {
        return Err(FormatError::Incomplete(format!(
            "initial state {initial} out of range for {states} states"
        )));
    }
    let sigma = radix
        .alphabet_size(tracks)
        .map_err(|e| FormatError::Incomplete(e.to_string()))?;

    let mut table: HashMap<(StateId, u32), StateId> = HashMap::new();
    for (line, from, digits, to) in trans {
        if digits.len() != tracks {
            return Err(syntax(line, format!("expected {tracks} digits, found {}", digits.len())));
        }
        if let Some(&d) = digits.iter().find(|&&d| d >= radix.k()) {
            return Err(syntax(line, format!("digit {d} out of range for base {}", radix.k())));
        }
        if from as usize >= states || to as usize >= states {
            return Err(syntax(line, "state out of range"));
        }
        if table.insert((from, radix.pack(&digits)), to).is_some() {
            return Err(syntax(line, "duplicate transition"));
        }
    }
    let complete = table.len() == states * sigma;

    if dfao {
        if h.accepting.is_some() {
            return Err(FormatError::Incomplete("a dfao takes `output:`, not `accepting:`".into()));
        }
        let pairs = h.output.ok_or_else(|| missing("output"))?;
        let mut output = vec![None; states];
        for (q, o) in pairs {
            let slot = output
                .get_mut(q as usize)
                .ok_or_else(|| FormatError::Incomplete(format!("output for missing state {q}")))?;
            if slot.replace(o).is_some() {
                return Err(FormatError::Incomplete(format!("state {q} has two outputs")));
            }
        }
        let output = output
            .into_iter()
            .enumerate()
            .map(|(q, o)| o.ok_or_else(|| FormatError::Incomplete(format!("state {q} has no output"))))
            .collect::<Result<Vec<_>, _>>()?;
        if !complete {
            return Err(FormatError::Incomplete(format!(
                "a dfao needs all {} transitions, found {}",
                states * sigma,
                table.len()
            )));
        }
        let delta = (0..states * sigma)
            .map(|i| table[&((i / sigma) as StateId, (i % sigma) as u32)])
            .collect();
        return Ok(Automaton::Dfao(Dfao::from_parts(
            radix, tracks, order, initial, delta, output,
        )?));
    }

    if h.output.is_some() {
        return Err(FormatError::Incomplete("a dfa takes `accepting:`, not `output:`".into()));
    }
    let accepting = h.accepting.unwrap_or_default();
    if let Some(q) = accepting.iter().find(|&&q| q as usize >= states) {
        return Err(FormatError::Incomplete(format!("accepting state {q} out of range")));
    }
    if complete {
        let delta = (0..states * sigma)
            .map(|i| table[&((i / sigma) as StateId, (i % sigma) as u32)])
            .collect();
        let mut acc = vec![false; states];
        for q in accepting {
            acc[q as usize] = true;
        }
        return Ok(Automaton::Dfa(Dfa::from_parts(radix, tracks, order, initial, delta, acc)?));
    }
    let list: Vec<(StateId, u32, StateId)> = table.into_iter().map(|((p, a), q)| (p, a, q)).collect();
    Ok(Automaton::Dfa(Dfa::from_transitions(
        radix, tracks, order, states, initial, &list, &accepting,
    )?))
}

fn write_common(out: &mut String, radix: Radix, tracks: usize, kind: &str, order: DigitOrder, states: usize, initial: StateId) {
    let order = match order {
        DigitOrder::Msd => "msd",
        DigitOrder::Lsd => "lsd",
    };
    let _ = writeln!(out, "{HEADER}");
    let _ = writeln!(out, "base: {}", radix.k());
    let _ = writeln!(out, "tracks: {tracks}");
    let _ = writeln!(out, "kind: {kind}");
    let _ = writeln!(out, "order: {order}");
    let _ = writeln!(out, "states: {states}");
    let _ = writeln!(out, "initial: {initial}");
}

fn write_transitions(out: &mut String, radix: Radix, tracks: usize, states: usize, step: impl Fn(StateId, u32) -> StateId) {
    let sigma = radix.alphabet_size(tracks).expect("valid automaton");
    for q in 0..states as StateId {
        for a in 0..sigma as u32 {
            let digits: Vec<String> = radix.unpack(a, tracks).iter().map(u32::to_string).collect();
            let _ = writeln!(out, "trans: {q} [{}] -> {}", digits.join(","), step(q, a));
        }
    }
}

/// Renders an automaton with every transition listed.
pub fn write(automaton: &Automaton) -> String {
    let mut out = String::new();
    match automaton {
        Automaton::Dfa(d) => {
            write_common(&mut out, d.radix(), d.tracks(), "dfa", d.order(), d.num_states(), d.initial());
            let acc: Vec<String> = (0..d.num_states() as StateId)
                .filter(|&q| d.is_accepting(q))
                .map(|q| q.to_string())
                .collect();
            let _ = writeln!(out, "accepting: {}", acc.join(" "));
            write_transitions(&mut out, d.radix(), d.tracks(), d.num_states(), |q, a| d.step(q, a));
        }
        Automaton::Dfao(d) => {
            write_common(&mut out, d.radix(), d.tracks(), "dfao", d.order(), d.num_states(), d.initial());
            let outs: Vec<String> = d
                .outputs()
                .iter()
                .enumerate()
                .map(|(q, o)| format!("{q}:{o}"))
                .collect();
            let _ = writeln!(out, "output: {}", outs.join(" "));
            write_transitions(&mut out, d.radix(), d.tracks(), d.num_states(), |q, a| d.step(q, a));
        }
    }
    out
}
