use std::fmt::Write as _;

use crate::circuit::{FeatureId, FeatureSpace};
use crate::formulas::{DnfFormula, FormulaClass, Literal};

use super::IoError;

/// `p dnf V T`, `c name i label` lines, then one term per line as signed
/// 1-based literals ending in `0`.
pub fn write_dnf(f: &DnfFormula) -> String {
    let space = f.space();
    let mut out = format!("p dnf {} {}\n", space.len(), f.terms().len());
    for (i, name) in space.names().iter().enumerate() {
        writeln!(out, "c name {} {}", i + 1, name).expect("string write");
    }
    for term in f.terms() {
        for lit in term {
            let v = lit.feature.0 as i64 + 1;
            write!(out, "{} ", if lit.positive { v } else { -v }).expect("string write");
        }
        out.push_str("0\n");
    }
    out
}

/// Reads [`write_dnf`] output. The class is inferred: positive or negative if
/// all literals agree, width the longest term.
pub fn parse_dnf(text: &str) -> Result<DnfFormula, IoError> {
    let parse_error = |line: usize, message: String| IoError::Parse { line, message };
    let mut header: Option<(usize, usize)> = None;
    let mut names: Vec<(usize, usize, String)> = Vec::new();
    let mut terms: Vec<Vec<Literal>> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let fields: Vec<&str> = raw.split_whitespace().collect();
        match fields.as_slice() {
            [] => {}
            ["c", "name", index, label] => {
                let index = index.parse().map_err(|_| parse_error(line, format!("bad index {index:?}")))?;
                names.push((line, index, label.to_string()));
            }
            ["c", ..] => {}
            ["p", "dnf", v, t] if header.is_none() => {
                let v = v.parse().map_err(|_| parse_error(line, format!("bad count {v:?}")))?;
                let t = t.parse().map_err(|_| parse_error(line, format!("bad count {t:?}")))?;
                header = Some((v, t));
            }
            [.., "0"] if header.is_some() => {
                let vars = header.expect("checked").0;
                let mut term = Vec::new();
                for field in &fields[..fields.len() - 1] {
                    let lit: i64 = field.parse().map_err(|_| parse_error(line, format!("bad literal {field:?}")))?;
                    let v = lit.unsigned_abs() as usize;
                    if lit == 0 || v > vars {
                        return Err(parse_error(line, format!("literal {lit} outside ±1..={vars}")));
                    }
                    term.push(Literal { feature: FeatureId(v - 1), positive: lit > 0 });
                }
                terms.push(term);
            }
            _ => return Err(parse_error(line, format!("unrecognized line {raw:?}"))),
        }
    }
    let (vars, count) = header.ok_or(IoError::EmptyDocument)?;
    if terms.len() != count {
        return Err(parse_error(1, format!("header declares {count} terms, found {}", terms.len())));
    }
    let mut labels: Vec<String> = (1..=vars).map(|i| format!("x{i}")).collect();
    for (line, index, label) in names {
        if index == 0 || index > vars {
            return Err(parse_error(line, format!("variable {index} outside 1..={vars}")));
        }
        labels[index - 1] = label;
    }
    let space = FeatureSpace::binary(labels)?;
    let lits = || terms.iter().flatten();
    let polarity = if lits().all(|l| l.positive) {
        Some(crate::formulas::Polarity::Positive)
    } else if lits().all(|l| !l.positive) {
        Some(crate::formulas::Polarity::Negative)
    } else {
        None
    };
    let width = terms.iter().map(Vec::len).max().unwrap_or(0);
    Ok(DnfFormula::new(space, terms, FormulaClass { polarity, width: Some(width) })?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulas::{build_theta, Graph};

    #[test]
    fn theta_round_trip() {
        let g = Graph::with_edges(["a", "b", "c", "d"], &[(2, 3)]).unwrap();
        let theta = build_theta(&g).unwrap();
        let text = write_dnf(&theta);
        assert!(text.starts_with("p dnf 4 5\n"));
        assert!(text.contains("1 2 0\n"));
        let back = parse_dnf(&text).unwrap();
        assert_eq!(back.terms(), theta.terms());
        assert_eq!(back.space(), theta.space());
        assert!(back.class().within(FormulaClass::positive(2)));
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_dnf("p dnf 2 1\n3 0\n"), Err(IoError::Parse { line: 2, .. })));
        assert!(matches!(parse_dnf("p dnf 2 2\n1 0\n"), Err(IoError::Parse { .. })));
        assert!(matches!(parse_dnf("p dnf 2 1\n1 -1 0\n"), Err(IoError::Formula(_))));
        assert_eq!(parse_dnf(""), Err(IoError::EmptyDocument));
    }
}
