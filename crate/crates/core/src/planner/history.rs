//! Step history as a newest-first list of one-line records.
//!
//! Record template:
//! `STEP <t> | STATE <X> | ANSWER <letter> | CONFIDENT <true|false> | CONFIDENCE <p> | ACTION <u>`
//! where `p` has two decimals and `u` is `none`,
//! `Goto_object_node_step(<room>, <region>, <object>)` or
//! `Goto_frontier_node_step(<frontier>)`.

use std::fmt;

use super::wire::{answer_letter, letter_index};
use crate::scenegraph::NodeId;

const SEP: &str = " | ";

/// The ids an action targeted, without its explanations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionRef {
    Object { room: NodeId, region: NodeId, object: NodeId },
    Frontier { frontier: NodeId },
}

impl fmt::Display for ActionRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionRef::Object { room, region, object } => {
                write!(f, "Goto_object_node_step({room}, {region}, {object})")
            }
            ActionRef::Frontier { frontier } => write!(f, "Goto_frontier_node_step({frontier})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistoryEntry {
    pub t: usize,
    pub state: String,
    pub answer_index: usize,
    pub is_confident: bool,
    /// Stored at the two decimals the record carries.
    pub confidence_level: f64,
    pub action: Option<ActionRef>,
}

impl HistoryEntry {
    pub fn new(
        t: usize,
        state: &str,
        answer_index: usize,
        is_confident: bool,
        confidence_level: f64,
        action: Option<ActionRef>,
    ) -> Self {
        Self {
            t,
            // records are single lines
            state: state.replace(['\n', '\r'], " "),
            answer_index,
            is_confident,
            confidence_level: (confidence_level * 100.0).round() / 100.0,
            action,
        }
    }

    pub fn render(&self) -> String {
        let action = self.action.map_or_else(|| "none".to_string(), |a| a.to_string());
        format!(
            "STEP {} | STATE {} | ANSWER {} | CONFIDENT {} | CONFIDENCE {:.2} | ACTION {}",
            self.t,
            self.state,
            answer_letter(self.answer_index),
            self.is_confident,
            self.confidence_level,
            action
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct History {
    /// Newest first.
    pub entries: Vec<HistoryEntry>,
    pub rendered: String,
}

impl History {
    pub fn new() -> Self {
        Self::default()
    }
}

/// Prepends one record; the previous rendering survives verbatim as suffix.
pub fn update_history(hist: &History, entry: HistoryEntry) -> History {
    let record = entry.render();
    let rendered = if hist.rendered.is_empty() {
        record
    } else {
        format!("{record}\n{}", hist.rendered)
    };
    let mut entries = Vec::with_capacity(hist.entries.len() + 1);
    entries.push(entry);
    entries.extend(hist.entries.iter().cloned());
    History { entries, rendered }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("history line {line}: {reason}")]
pub struct HistoryParseError {
    pub line: usize,
    pub reason: String,
}

fn parse_action(s: &str) -> Option<Option<ActionRef>> {
    if s == "none" {
        return Some(None);
    }
    let (name, rest) = s.split_once('(')?;
    let args: Vec<NodeId> = rest
        .strip_suffix(')')?
        .split(", ")
        .map(|a| a.parse().ok())
        .collect::<Option<_>>()?;
    match (name, args.as_slice()) {
        ("Goto_object_node_step", [room, region, object]) => Some(Some(ActionRef::Object {
            room: *room,
            region: *region,
            object: *object,
        })),
        ("Goto_frontier_node_step", [frontier]) => Some(Some(ActionRef::Frontier { frontier: *frontier })),
        _ => None,
    }
}

fn parse_record(line: &str) -> Result<HistoryEntry, String> {
    let rest = line.strip_prefix("STEP ").ok_or("missing STEP")?;
    let (t, rest) = rest.split_once(SEP).ok_or("missing STATE")?;
    let t = t.parse().map_err(|_| format!("bad step `{t}`"))?;
    let rest = rest.strip_prefix("STATE ").ok_or("missing STATE")?;
    // the state is free text, so peel the fixed fields off the right
    let mut fields: Vec<&str> = rest.rsplitn(5, SEP).collect();
    if fields.len() != 5 {
        return Err("expected six fields".into());
    }
    fields.reverse();
    let field = |i: usize, key: &str| {
        fields[i]
            .strip_prefix(key)
            .and_then(|v| v.strip_prefix(' '))
            .ok_or_else(|| format!("missing {key}"))
    };
    let answer = field(1, "ANSWER")?;
    let answer_index = letter_index(answer).ok_or_else(|| format!("bad answer `{answer}`"))?;
    let is_confident = match field(2, "CONFIDENT")? {
        "true" => true,
        "false" => false,
        other => return Err(format!("bad confident flag `{other}`")),
    };
    let p = field(3, "CONFIDENCE")?;
    let confidence_level = p.parse().map_err(|_| format!("bad confidence `{p}`"))?;
    let u = field(4, "ACTION")?;
    let action = parse_action(u).ok_or_else(|| format!("bad action `{u}`"))?;
    Ok(HistoryEntry {
        t,
        state: fields[0].to_string(),
        answer_index,
        is_confident,
        confidence_level,
        action,
    })
}

/// Recovers entries, newest first, from a rendering.
pub fn parse_history(rendered: &str) -> Result<Vec<HistoryEntry>, HistoryParseError> {
    if rendered.is_empty() {
        return Ok(Vec::new());
    }
    rendered
        .split('\n')
        .enumerate()
        .map(|(i, line)| parse_record(line).map_err(|reason| HistoryParseError { line: i + 1, reason }))
        .collect()
}
