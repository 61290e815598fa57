//! Free-format MPS export and import.
//!
//! Names come from the registries with whitespace replaced by `_`. The
//! objective constant is written as the negated right-hand side of the
//! objective row, the usual MPS convention.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::lp::{Key, LinearProgram, LpBuilder, Relation, RowKind, VarKind};

const OBJ: &str = "obj";

fn clean(name: String) -> String {
    name.chars().map(|c| if c.is_whitespace() { '_' } else { c }).collect()
}

pub fn write_mps(lp: &LinearProgram, name: &str) -> String {
    let cols: Vec<String> = lp.variables.keys().iter().map(|k| clean(k.to_string())).collect();
    let rows: Vec<String> = lp.constraints.keys().iter().map(|k| clean(k.to_string())).collect();
    let mut out = String::new();
    let _ = writeln!(out, "NAME {}", clean(name.to_string()));
    out.push_str("ROWS\n");
    let _ = writeln!(out, " N  {OBJ}");
    for (r, rel) in lp.relations.iter().enumerate() {
        let tag = match rel {
            Relation::Le => "L",
            Relation::Ge => "G",
            Relation::Eq => "E",
        };
        let _ = writeln!(out, " {tag}  {}", rows[r]);
    }

    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); lp.n_vars()];
    for &(r, c, v) in &lp.triplets {
        by_col[c].push((r, v));
    }
    out.push_str("COLUMNS\n");
    for (j, entries) in by_col.iter().enumerate() {
        if lp.costs[j] != 0.0 {
            let _ = writeln!(out, "    {}  {OBJ}  {:?}", cols[j], lp.costs[j]);
        }
        for &(r, v) in entries {
            let _ = writeln!(out, "    {}  {}  {:?}", cols[j], rows[r], v);
        }
        if lp.costs[j] == 0.0 && entries.is_empty() {
            // Keep empty columns visible to readers.
            let _ = writeln!(out, "    {}  {OBJ}  0.0", cols[j]);
        }
    }

    out.push_str("RHS\n");
    if lp.objective_offset != 0.0 {
        let _ = writeln!(out, "    RHS  {OBJ}  {:?}", -lp.objective_offset);
    }
    for (r, &b) in lp.rhs.iter().enumerate() {
        if b != 0.0 {
            let _ = writeln!(out, "    RHS  {}  {:?}", rows[r], b);
        }
    }

    out.push_str("BOUNDS\n");
    for j in 0..lp.n_vars() {
        let (lo, hi) = (lp.lower[j], lp.upper[j]);
        let c = &cols[j];
        if lo == hi {
            let _ = writeln!(out, " FX BND  {c}  {lo:?}");
            continue;
        }
        match (lo.is_finite(), hi.is_finite()) {
            (false, false) => {
                let _ = writeln!(out, " FR BND  {c}");
            }
            (false, true) => {
                let _ = writeln!(out, " MI BND  {c}");
                let _ = writeln!(out, " UP BND  {c}  {hi:?}");
            }
            (true, hi_finite) => {
                if lo != 0.0 || (hi_finite && hi < 0.0) {
                    let _ = writeln!(out, " LO BND  {c}  {lo:?}");
                }
                if hi_finite {
                    let _ = writeln!(out, " UP BND  {c}  {hi:?}");
                }
            }
        }
    }
    out.push_str("ENDATA\n");
    out
}

#[derive(Debug, Error, PartialEq)]
pub enum MpsError {
    #[error("line {line}: {detail}")]
    Syntax { line: usize, detail: String },
}

/// Reads free MPS as written by [`write_mps`]. Rows and columns come back
/// with generic keys whose entity is the MPS name.
pub fn read_mps(text: &str) -> Result<LinearProgram, MpsError> {
    #[derive(PartialEq)]
    enum Section {
        None,
        Rows,
        Columns,
        Rhs,
        Bounds,
    }
    let mut section = Section::None;
    let mut obj_name = String::new();
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut row_names: Vec<String> = Vec::new();
    let mut relations: Vec<Relation> = Vec::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut col_names: Vec<String> = Vec::new();
    let mut costs: Vec<f64> = Vec::new();
    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let mut offset = 0.0;
    let mut lower: Vec<f64> = Vec::new();
    let mut upper: Vec<f64> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |detail: String| MpsError::Syntax { line, detail };
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('*') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        if !raw.starts_with(' ') {
            section = match tokens[0] {
                "NAME" => Section::None,
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => break,
                other => return Err(err(format!("unknown section {other}"))),
            };
            continue;
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| err(format!("bad number {s}")));
        match section {
            Section::Rows => {
                let [tag, name] = tokens[..] else {
                    return Err(err("expected `<type> <name>`".into()));
                };
                let rel = match tag {
                    "N" => {
                        obj_name = name.to_string();
                        continue;
                    }
                    "L" => Relation::Le,
                    "G" => Relation::Ge,
                    "E" => Relation::Eq,
                    other => return Err(err(format!("unknown row type {other}"))),
                };
                row_index.insert(name.to_string(), row_names.len());
                row_names.push(name.to_string());
                relations.push(rel);
                rhs.push(0.0);
            }
            Section::Columns => {
                if tokens.len() < 3 || tokens.len() % 2 == 0 {
                    return Err(err("expected `<col> <row> <value> ...`".into()));
                }
                let j = *col_index.entry(tokens[0].to_string()).or_insert_with(|| {
                    col_names.push(tokens[0].to_string());
                    costs.push(0.0);
                    lower.push(0.0);
                    upper.push(f64::INFINITY);
                    col_names.len() - 1
                });
                for pair in tokens[1..].chunks(2) {
                    let v = num(pair[1])?;
                    if pair[0] == obj_name {
                        costs[j] += v;
                    } else {
                        let r = *row_index.get(pair[0]).ok_or_else(|| err(format!("unknown row {}", pair[0])))?;
                        entries.push((r, j, v));
                    }
                }
            }
            Section::Rhs => {
                if tokens.len() < 3 || tokens.len() % 2 == 0 {
                    return Err(err("expected `<set> <row> <value> ...`".into()));
                }
                for pair in tokens[1..].chunks(2) {
                    let v = num(pair[1])?;
                    if pair[0] == obj_name {
                        offset = -v;
                    } else {
                        let r = *row_index.get(pair[0]).ok_or_else(|| err(format!("unknown row {}", pair[0])))?;
                        rhs[r] = v;
                    }
                }
            }
            Section::Bounds => {
                if tokens.len() < 3 {
                    return Err(err("expected `<type> <set> <col> [value]`".into()));
                }
                let j = *col_index.get(tokens[2]).ok_or_else(|| err(format!("unknown column {}", tokens[2])))?;
                let value = || -> Result<f64, MpsError> {
                    let s = tokens.get(3).ok_or_else(|| err("missing bound value".into()))?;
                    num(s)
                };
                match tokens[0] {
                    "LO" => lower[j] = value()?,
                    "UP" => upper[j] = value()?,
                    "FX" => {
                        let v = value()?;
                        lower[j] = v;
                        upper[j] = v;
                    }
                    "FR" => {
                        lower[j] = f64::NEG_INFINITY;
                        upper[j] = f64::INFINITY;
                    }
                    "MI" => lower[j] = f64::NEG_INFINITY,
                    "PL" => upper[j] = f64::INFINITY,
                    other => return Err(err(format!("unknown bound type {other}"))),
                }
            }
            Section::None => return Err(err("data outside a section".into())),
        }
    }

    let mut b = LpBuilder::new();
    for (j, name) in col_names.iter().enumerate() {
        b.add_var(Key::new(VarKind::Generic, name.as_str(), None), costs[j], lower[j], upper[j]);
    }
    let mut per_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); row_names.len()];
    for (r, c, v) in entries {
        per_row[r].push((c, v));
    }
    for (r, name) in row_names.iter().enumerate() {
        b.add_row(
            Key::new(RowKind::Generic, name.as_str(), None),
            std::mem::take(&mut per_row[r]),
            relations[r],
            rhs[r],
        );
    }
    b.add_offset(offset);
    Ok(b.build())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulation::dense_lp;

    #[test]
    fn round_trip_preserves_data() {
        let mut lp = dense_lp(
            &[1.5, -2.0, 0.0],
            &[(0.0, 4.0), (f64::NEG_INFINITY, f64::INFINITY), (-1.0, -1.0)],
            &[
                (vec![1.0, 1.0, 0.0], Relation::Le, 3.0),
                (vec![0.0, 1.0, 2.0], Relation::Ge, -5.0),
                (vec![1.0, 0.0, 1.0], Relation::Eq, 0.1),
            ],
        );
        lp.objective_offset = 7.25;
        let back = read_mps(&write_mps(&lp, "t")).unwrap();
        assert_eq!(back.costs, lp.costs);
        assert_eq!(back.lower, lp.lower);
        assert_eq!(back.upper, lp.upper);
        assert_eq!(back.rhs, lp.rhs);
        assert_eq!(back.relations, lp.relations);
        assert_eq!(back.triplets, lp.triplets);
        assert_eq!(back.objective_offset, 7.25);
        assert_eq!(back.variables.key(1).entity, "x[1]");
    }

    #[test]
    fn negative_upper_bound_keeps_zero_lower() {
        let lp = dense_lp(&[1.0], &[(-3.0, -2.0)], &[]);
        let back = read_mps(&write_mps(&lp, "n")).unwrap();
        assert_eq!((back.lower[0], back.upper[0]), (-3.0, -2.0));
    }

    #[test]
    fn syntax_errors_carry_line() {
        let e = read_mps("NAME x\nROWS\n Q  r\n").unwrap_err();
        assert_eq!(e, MpsError::Syntax { line: 3, detail: "unknown row type Q".into() });
    }
}
