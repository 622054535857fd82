//! Text formats for belief models and belief networks.
//!
//! A model file:
//!
//! ```text
//! frame
//! var X 2 x1 x2
//! var Y 2 y1 y2
//! mass
//! {(x1,y1)} 0.2
//! {(x1,*),(x2,y2)} 0.3
//! * 0.5
//! ```
//!
//! A network file lists `node <name> parents <p1,p2,..>` lines, then one
//! model block per node introduced by `valuation <name>`. Blank lines and
//! `#` comments are ignored everywhere.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::frames::{parse_event, Frame, Variable};
use crate::mass::{MassFunction, Tolerance};
use crate::network::{BeliefNetwork, Dag};

/// Renders focal sets in canonical order with shortest round-trip decimals.
pub fn write_model(m: &MassFunction) -> String {
    let mut s = String::from("frame\n");
    for v in m.frame().variables() {
        let _ = writeln!(s, "var {} {} {}", v.name(), v.card(), v.labels().join(" "));
    }
    s.push_str("mass\n");
    for (set, v) in m.focal_elements() {
        let _ = writeln!(s, "{set} {v}");
    }
    s
}

pub fn parse_model(text: &str, tol: Tolerance) -> Result<MassFunction> {
    let lines: Vec<(usize, &str)> = text.lines().enumerate().map(|(i, l)| (i + 1, l)).collect();
    parse_model_lines(&lines, tol)
}

fn strip(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim_end()
}

fn first_column(raw: &str) -> usize {
    raw.len() - raw.trim_start().len() + 1
}

fn parse_model_lines(lines: &[(usize, &str)], tol: Tolerance) -> Result<MassFunction> {
    enum Section {
        Start,
        Vars,
        Masses,
    }
    let mut section = Section::Start;
    let mut vars: Vec<Variable> = Vec::new();
    let mut frame: Option<Frame> = None;
    let mut entries = Vec::new();
    let mut last_line = 0;
    for &(n, raw) in lines {
        last_line = n;
        let line = strip(raw);
        if line.trim().is_empty() {
            continue;
        }
        let col = first_column(line);
        let body = line.trim();
        match section {
            Section::Start => {
                if body != "frame" {
                    return Err(Error::parse(n, col, "expected `frame`"));
                }
                section = Section::Vars;
            }
            Section::Vars if body == "mass" => {
                frame = Some(Frame::new(vars.drain(..)).map_err(|e| Error::parse(n, col, e.to_string()))?);
                section = Section::Masses;
            }
            Section::Vars => {
                let words: Vec<&str> = body.split_whitespace().collect();
                if words.first() != Some(&"var") || words.len() < 3 {
                    return Err(Error::parse(n, col, "expected `var <name> <card> <labels..>` or `mass`"));
                }
                let card: usize = words[2]
                    .parse()
                    .map_err(|_| Error::parse(n, col, format!("bad cardinality `{}`", words[2])))?;
                let labels = &words[3..];
                if labels.len() != card {
                    return Err(Error::parse(
                        n,
                        col,
                        format!("variable `{}` declares {card} values but lists {}", words[1], labels.len()),
                    ));
                }
                vars.push(
                    Variable::new(words[1], labels.iter().copied())
                        .map_err(|e| Error::parse(n, col, e.to_string()))?,
                );
            }
            Section::Masses => {
                let f = frame.as_ref().expect("frame set before masses");
                let split = body
                    .rfind(char::is_whitespace)
                    .ok_or_else(|| Error::parse(n, col, "expected `<event> <mass>`"))?;
                let (event, value) = (&body[..split], body[split..].trim());
                let value: f64 = value.parse().map_err(|_| {
                    Error::parse(n, col + split + 1, format!("bad mass `{value}`"))
                })?;
                let set = parse_event(event, f).map_err(|e| match e {
                    Error::Parse { column, message, .. } => Error::parse(n, col + column - 1, message),
                    other => Error::parse(n, col, other.to_string()),
                })?;
                entries.push((set, value));
            }
        }
    }
    let frame = match section {
        Section::Masses => frame.expect("frame set"),
        _ => return Err(Error::parse(last_line.max(1), 1, "missing `mass` section")),
    };
    MassFunction::new(&frame, entries, tol)
}

pub fn write_network(net: &BeliefNetwork) -> String {
    let dag = net.dag();
    let mut s = String::new();
    for node in dag.nodes() {
        let ps = dag.ordered_parents(node).expect("known node");
        let _ = writeln!(s, "node {node} parents {}", ps.join(","));
    }
    for node in dag.nodes() {
        let _ = writeln!(s, "valuation {node}");
        s.push_str(&write_model(net.valuation(node).expect("valuation")));
    }
    s
}

/// A `valuation` block: node name, header line and the raw lines after it.
type Block<'a> = (String, usize, Vec<(usize, &'a str)>);

pub fn parse_network(text: &str, tol: Tolerance) -> Result<BeliefNetwork> {
    let lines: Vec<(usize, &str)> = text.lines().enumerate().map(|(i, l)| (i + 1, l)).collect();
    let mut nodes: Vec<String> = Vec::new();
    let mut parents: Vec<(String, Vec<String>)> = Vec::new();
    let mut blocks: Vec<Block> = Vec::new();
    for &(n, raw) in &lines {
        let line = strip(raw);
        let body = line.trim();
        let col = first_column(line);
        let words: Vec<&str> = body.split_whitespace().collect();
        match words.first() {
            Some(&"valuation") => {
                if words.len() != 2 {
                    return Err(Error::parse(n, col, "expected `valuation <name>`"));
                }
                blocks.push((words[1].to_string(), n, Vec::new()));
            }
            _ if !blocks.is_empty() => blocks.last_mut().expect("open block").2.push((n, raw)),
            None => {}
            Some(&"node") => {
                let name = words
                    .get(1)
                    .ok_or_else(|| Error::parse(n, col, "expected `node <name> parents <list>`"))?;
                let ps: Vec<String> = match words.get(2) {
                    None => Vec::new(),
                    Some(&"parents") => {
                        let rest = words[3..].join("");
                        rest.split(',').filter(|p| !p.is_empty()).map(String::from).collect()
                    }
                    Some(w) => return Err(Error::parse(n, col, format!("unexpected `{w}`, expected `parents`"))),
                };
                nodes.push(name.to_string());
                parents.push((name.to_string(), ps));
            }
            Some(w) => return Err(Error::parse(n, col, format!("unexpected `{w}`"))),
        }
    }
    let dag = Dag::new(
        &nodes,
        &parents.iter().map(|(c, ps)| (c.clone(), ps.clone())).collect::<Vec<_>>(),
    )?;
    let mut valuations = BTreeMap::new();
    for (name, n, block) in blocks {
        let m = parse_model_lines(&block, tol)?;
        if valuations.insert(name.clone(), m).is_some() {
            return Err(Error::parse(n, 1, format!("second valuation for `{name}`")));
        }
    }
    BeliefNetwork::new(dag, valuations)
}
