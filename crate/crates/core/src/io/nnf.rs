use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::circuit::{Circuit, CircuitBuilder, Determinism, FeatureId, FeatureSpace, Gate, GateId};

use super::IoError;

#[derive(Debug, Clone, Copy, Default)]
pub struct NnfOptions {
    /// Treat the document as deterministic even without a `c d-DNNF` line.
    pub trust_determinism: bool,
}

#[derive(Debug, Clone)]
enum Record {
    /// Signed 1-based variable.
    Literal(i64),
    /// 1-based variable, 0-based domain index.
    Equals(usize, usize),
    And(Vec<usize>),
    Or(Vec<usize>),
}

fn parse_error(line: usize, message: impl Into<String>) -> IoError {
    IoError::Parse { line, message: message.into() }
}

fn numbers<T: std::str::FromStr>(line: usize, fields: &[&str]) -> Result<Vec<T>, IoError> {
    fields.iter().map(|f| f.parse().map_err(|_| parse_error(line, format!("expected a number, found {f:?}")))).collect()
}

/// Parses a document over binary features named `x1..xV`.
pub fn parse_nnf(text: &str, options: NnfOptions) -> Result<Circuit, IoError> {
    let vars = header_vars(text)?;
    let space = FeatureSpace::binary((1..=vars).map(|i| format!("x{i}")))?;
    parse_nnf_with_space(text, &space, options)
}

fn header_vars(text: &str) -> Result<usize, IoError> {
    for (i, line) in text.lines().enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.first() {
            None | Some(&"c") => continue,
            Some(&"nnf") if fields.len() == 4 => return Ok(numbers::<usize>(i + 1, &fields[3..])?[0]),
            _ => return Err(parse_error(i + 1, "expected header `nnf <nodes> <edges> <vars>`")),
        }
    }
    Err(IoError::EmptyDocument)
}

/// Parses a document whose variable `i` is feature `i − 1` of `space`.
pub fn parse_nnf_with_space(text: &str, space: &FeatureSpace, options: NnfOptions) -> Result<Circuit, IoError> {
    let mut header: Option<(usize, usize, usize, usize)> = None;
    let mut records: Vec<Record> = Vec::new();
    let mut trusted = options.trust_determinism;
    let mut edges = 0usize;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let fields: Vec<&str> = raw.split_whitespace().collect();
        let Some(&kind) = fields.first() else { continue };
        if kind == "c" {
            if fields.get(1).is_some_and(|t| t.eq_ignore_ascii_case("d-dnnf")) {
                trusted = true;
            }
            continue;
        }
        let Some((_, _, vars, _)) = header else {
            if kind != "nnf" || fields.len() != 4 {
                return Err(parse_error(line, "expected header `nnf <nodes> <edges> <vars>`"));
            }
            let h: Vec<usize> = numbers(line, &fields[1..])?;
            if h[2] > space.len() {
                return Err(parse_error(line, format!("{} variables declared, {} features known", h[2], space.len())));
            }
            header = Some((h[0], h[1], h[2], line));
            continue;
        };
        let index = records.len();
        let children = |start: usize, count_at: usize| -> Result<Vec<usize>, IoError> {
            let count: usize = *numbers::<usize>(line, &fields[count_at..=count_at])?.first().expect("one field");
            if fields.len() != start + count {
                return Err(parse_error(line, format!("declared {count} children, found {}", fields.len() - start)));
            }
            let kids: Vec<usize> = numbers(line, &fields[start..])?;
            if let Some(&bad) = kids.iter().find(|&&k| k >= index) {
                return Err(IoError::ForwardReference { line, node: bad });
            }
            Ok(kids)
        };
        let check_var = |v: usize| {
            if v == 0 || v > vars {
                Err(parse_error(line, format!("variable {v} outside 1..={vars}")))
            } else {
                Ok(v)
            }
        };
        let record = match kind {
            "L" if fields.len() == 2 => {
                let lit: i64 = numbers(line, &fields[1..])?[0];
                check_var(lit.unsigned_abs() as usize)?;
                Record::Literal(lit)
            }
            "E" if fields.len() == 3 => {
                let v: Vec<usize> = numbers(line, &fields[1..])?;
                let f = FeatureId(check_var(v[0])? - 1);
                if v[1] >= space.domain_size(f) {
                    return Err(parse_error(line, format!("value {} outside the domain of {}", v[1], space.name(f))));
                }
                Record::Equals(v[0], v[1])
            }
            "A" if fields.len() >= 2 => {
                let kids = children(2, 1)?;
                edges += kids.len();
                Record::And(kids)
            }
            "O" if fields.len() >= 3 => {
                let kids = children(3, 2)?;
                edges += kids.len();
                Record::Or(kids)
            }
            _ => return Err(parse_error(line, format!("unrecognized record {raw:?}"))),
        };
        records.push(record);
    }
    let (nodes, declared_edges, _, header_line) = header.ok_or(IoError::EmptyDocument)?;
    if records.is_empty() {
        return Err(IoError::EmptyDocument);
    }
    if records.len() != nodes || edges != declared_edges {
        return Err(parse_error(
            header_line,
            format!("header declares {nodes} nodes and {declared_edges} edges, found {} and {edges}", records.len()),
        ));
    }
    let circuit = build(space, &records)?;
    Ok(circuit.with_determinism(if trusted { Determinism::Trusted } else { Determinism::Unknown }))
}

/// Builds the gates reachable from the last record.
fn build(space: &FeatureSpace, records: &[Record]) -> Result<Circuit, IoError> {
    let root = records.len() - 1;
    let mut reachable = vec![false; records.len()];
    reachable[root] = true;
    for i in (0..records.len()).rev() {
        if reachable[i] {
            if let Record::And(kids) | Record::Or(kids) = &records[i] {
                for &k in kids {
                    reachable[k] = true;
                }
            }
        }
    }
    let mut b = CircuitBuilder::new(Arc::new(space.clone()));
    let mut vars: HashMap<usize, GateId> = HashMap::new();
    let mut gate_of: Vec<Option<GateId>> = vec![None; records.len()];
    for (i, record) in records.iter().enumerate() {
        if !reachable[i] {
            continue;
        }
        let mut var = |v: usize, b: &mut CircuitBuilder| *vars.entry(v).or_insert_with(|| b.var(FeatureId(v - 1)));
        let gate = match record {
            Record::Literal(lit) if *lit > 0 => var(*lit as usize, &mut b),
            Record::Literal(lit) => {
                let pos = var(lit.unsigned_abs() as usize, &mut b);
                b.not(pos)
            }
            Record::Equals(v, value) => b.eq(FeatureId(v - 1), *value),
            Record::And(kids) if kids.is_empty() => b.constant(true),
            Record::Or(kids) if kids.is_empty() => b.constant(false),
            Record::And(kids) => b.and(kids.iter().map(|&k| gate_of[k].expect("children precede parents"))),
            Record::Or(kids) => b.or(kids.iter().map(|&k| gate_of[k].expect("children precede parents"))),
        };
        gate_of[i] = Some(gate);
    }
    Ok(b.finish(gate_of[root].expect("root is reachable"))?)
}

/// Writes `c` as an NNF document. Negations are pushed onto literals; a
/// negated and- or or-gate has no d-D-preserving NNF form and is rejected.
/// A negated non-binary equality `¬(x = v)` becomes the disjoint `∨_{w≠v} x = w`.
pub fn write_nnf(c: &Circuit) -> Result<String, IoError> {
    let space = c.space();
    let n = c.num_gates();
    // needs[g] = (positive occurrence, negated occurrence)
    let mut needs = vec![(false, false); n];
    needs[c.output().0].0 = true;
    for &g in c.topological_order().iter().rev() {
        let (pos, neg) = needs[g.0];
        if !pos && !neg {
            continue;
        }
        match c.gate(g) {
            Gate::And(inputs) | Gate::Or(inputs) => {
                if neg {
                    return Err(IoError::NotNnfExpressible(g));
                }
                for i in inputs {
                    needs[i.0].0 = true;
                }
            }
            Gate::Not(h) => {
                if pos {
                    needs[h.0].1 = true;
                }
                if neg {
                    needs[h.0].0 = true;
                }
            }
            _ => {}
        }
    }

    let mut w = Records::default();
    let mut node: Vec<(Option<usize>, Option<usize>)> = vec![(None, None); n];
    for &g in c.topological_order() {
        let (pos, neg) = needs[g.0];
        for (polarity, wanted) in [(true, pos), (false, neg)] {
            if !wanted {
                continue;
            }
            let id = match c.gate(g) {
                Gate::Variable(f) => w.leaf(literal(*f, polarity)),
                Gate::Equality(f, v) if space.is_binary_feature(*f) => w.leaf(literal(*f, polarity == (*v == 1))),
                Gate::Equality(f, v) if polarity => w.leaf(format!("E {} {}", f.0 + 1, v)),
                Gate::Equality(f, v) => {
                    let others: Vec<usize> = (0..space.domain_size(*f))
                        .filter(|u| u != v)
                        .map(|u| w.leaf(format!("E {} {}", f.0 + 1, u)))
                        .collect();
                    w.emit(or_record(&others), others.len())
                }
                Gate::Constant(b) => w.leaf(if *b == polarity { "A 0".to_string() } else { "O 0 0".to_string() }),
                Gate::And(inputs) => {
                    let kids: Vec<usize> = inputs.iter().map(|i| node[i.0].0.expect("inputs precede")).collect();
                    w.emit(and_record(&kids), kids.len())
                }
                Gate::Or(inputs) => {
                    let kids: Vec<usize> = inputs.iter().map(|i| node[i.0].0.expect("inputs precede")).collect();
                    w.emit(or_record(&kids), kids.len())
                }
                Gate::Not(h) => {
                    let (p, q) = node[h.0];
                    if polarity { q } else { p }.expect("inputs precede")
                }
            };
            if polarity {
                node[g.0].0 = Some(id);
            } else {
                node[g.0].1 = Some(id);
            }
        }
    }
    let root = node[c.output().0].0.expect("output is needed");
    // The root must be the last record; re-emit it as a one-child conjunction otherwise.
    if root != w.lines.len() - 1 {
        w.emit(format!("A 1 {root}"), 1);
    }
    let mut out = String::new();
    if c.determinism().is_established() {
        out.push_str("c d-DNNF\n");
    }
    writeln!(out, "nnf {} {} {}", w.lines.len(), w.edges, space.len()).expect("string write");
    for l in w.lines {
        out.push_str(&l);
        out.push('\n');
    }
    Ok(out)
}

/// Output records; leaves (literals, constants) are emitted once.
#[derive(Default)]
struct Records {
    lines: Vec<String>,
    edges: usize,
    leaves: HashMap<String, usize>,
}

impl Records {
    fn emit(&mut self, record: String, kids: usize) -> usize {
        self.edges += kids;
        self.lines.push(record);
        self.lines.len() - 1
    }

    fn leaf(&mut self, record: String) -> usize {
        if let Some(&i) = self.leaves.get(&record) {
            return i;
        }
        let i = self.emit(record.clone(), 0);
        self.leaves.insert(record, i);
        i
    }
}

fn literal(f: FeatureId, positive: bool) -> String {
    let v = f.0 as i64 + 1;
    format!("L {}", if positive { v } else { -v })
}

fn and_record(kids: &[usize]) -> String {
    let mut s = format!("A {}", kids.len());
    for k in kids {
        write!(s, " {k}").expect("string write");
    }
    s
}

fn or_record(kids: &[usize]) -> String {
    let mut s = format!("O 0 {}", kids.len());
    for k in kids {
        write!(s, " {k}").expect("string write");
    }
    s
}
