use std::fmt::Write as _;

use crate::formulas::Graph;

use super::IoError;

fn parse_error(line: usize, message: impl Into<String>) -> IoError {
    IoError::Parse { line, message: message.into() }
}

/// `p nodes N`, then edges `u v` (1-based); `c name i label` names node `i`,
/// other `c` lines are comments. Unnamed nodes are called `v1..vN`.
pub fn parse_graph(text: &str) -> Result<Graph, IoError> {
    let mut n: Option<usize> = None;
    let mut names: Vec<(usize, usize, String)> = Vec::new();
    let mut edges: Vec<(usize, usize, usize)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let fields: Vec<&str> = raw.split_whitespace().collect();
        let number =
            |s: &str| s.parse::<usize>().map_err(|_| parse_error(line, format!("expected a number, found {s:?}")));
        match fields.as_slice() {
            [] => {}
            ["c", "name", index, label] => names.push((line, number(index)?, label.to_string())),
            ["c", ..] => {}
            ["p", "nodes", count] if n.is_none() => n = Some(number(count)?),
            [u, v] if n.is_some() => edges.push((line, number(u)?, number(v)?)),
            _ => return Err(parse_error(line, format!("unrecognized line {raw:?}"))),
        }
    }
    let n = n.ok_or(IoError::EmptyDocument)?;
    let mut labels: Vec<String> = (1..=n).map(|i| format!("v{i}")).collect();
    for (line, index, label) in names {
        if index == 0 || index > n {
            return Err(parse_error(line, format!("node {index} outside 1..={n}")));
        }
        labels[index - 1] = label;
    }
    let mut g = Graph::new(labels)?;
    for (line, u, v) in edges {
        if u == 0 || v == 0 || u > n || v > n {
            return Err(parse_error(line, format!("edge {u} {v} outside 1..={n}")));
        }
        g.add_edge(u - 1, v - 1).map_err(|e| parse_error(line, e.to_string()))?;
    }
    Ok(g)
}

/// The format read by [`parse_graph`], names included.
pub fn write_graph(g: &Graph) -> String {
    let mut out = format!("p nodes {}\n", g.len());
    for (i, name) in g.names().iter().enumerate() {
        writeln!(out, "c name {} {}", i + 1, name).expect("string write");
    }
    for (u, v) in g.edges() {
        writeln!(out, "{} {}", u + 1, v + 1).expect("string write");
    }
    out
}
