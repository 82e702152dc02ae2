//! Plain-text LP interchange.
//!
//! ```text
//! \ knapsack
//! Maximize
//!  obj: + 10.0 a + 6.0 b
//! Subject To
//!  cap: + 5.0 a + 4.0 b <= 8.0
//! Bounds
//!  0.0 <= a <= 1.0
//! Binaries
//!  a
//! End
//! ```
//!
//! Every variable is listed under `Bounds` in index order, so an export
//! followed by an import reproduces the model exactly. Numbers are printed
//! in shortest round-trip form.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::model::{Cmp, Constraint, Model, Sense, VarKind, Variable};
use crate::{Error, Result};

fn clean(name: &str) -> String {
    if name.is_empty() {
        return "_".into();
    }
    name.chars().map(|c| if c.is_whitespace() || c == ':' { '_' } else { c }).collect()
}

fn write_terms(out: &mut String, terms: &[(usize, f64)], names: &[String]) {
    for &(j, a) in terms {
        let (sign, mag) = if a.is_sign_negative() { ('-', -a) } else { ('+', a) };
        let _ = write!(out, " {sign} {mag:?} {}", names[j]);
    }
}

/// Render `model` in LP text form.
pub fn write_lp(model: &Model) -> String {
    let names: Vec<String> = model.vars.iter().map(|v| clean(&v.name)).collect();
    let mut out = String::new();
    let _ = writeln!(out, "\\ {}", model.name.replace('\n', " "));
    out.push_str(match model.sense {
        Sense::Minimize => "Minimize\n",
        Sense::Maximize => "Maximize\n",
    });
    out.push_str(" obj:");
    let obj: Vec<(usize, f64)> =
        model.vars.iter().enumerate().filter(|(_, v)| v.obj != 0.0).map(|(j, v)| (j, v.obj)).collect();
    write_terms(&mut out, &obj, &names);
    out.push_str("\nSubject To\n");
    for r in &model.rows {
        let _ = write!(out, " {}:", clean(&r.name));
        write_terms(&mut out, &r.terms, &names);
        let op = match r.cmp {
            Cmp::Le => "<=",
            Cmp::Ge => ">=",
            Cmp::Eq => "=",
        };
        let _ = writeln!(out, " {op} {:?}", r.rhs);
    }
    out.push_str("Bounds\n");
    for (v, name) in model.vars.iter().zip(&names) {
        let _ = writeln!(out, " {:?} <= {name} <= {:?}", v.lower, v.upper);
    }
    out.push_str("Binaries\n");
    for (v, name) in model.vars.iter().zip(&names) {
        if v.kind == VarKind::Binary {
            let _ = writeln!(out, " {name}");
        }
    }
    out.push_str("End\n");
    out
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Head,
    Objective,
    Rows,
    Bounds,
    Binaries,
    Done,
}

struct Reader {
    vars: Vec<Variable>,
    index: HashMap<String, usize>,
}

impl Reader {
    fn var(&mut self, name: &str) -> usize {
        if let Some(&j) = self.index.get(name) {
            return j;
        }
        self.vars.push(Variable {
            name: name.to_string(),
            lower: 0.0,
            upper: f64::INFINITY,
            kind: VarKind::Continuous,
            obj: 0.0,
        });
        self.index.insert(name.to_string(), self.vars.len() - 1);
        self.vars.len() - 1
    }
}

fn number(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>().map_err(|_| Error::Parse { line, message: format!("expected a number, found {tok:?}") })
}

/// `(name, terms)` from `name: + c v - c v ...` up to an optional comparison.
fn parse_terms<'a>(
    toks: &mut std::iter::Peekable<impl Iterator<Item = &'a str>>,
    line: usize,
) -> Result<Vec<(f64, &'a str)>> {
    let mut terms = Vec::new();
    while let Some(&tok) = toks.peek() {
        if matches!(tok, "<=" | ">=" | "=") {
            break;
        }
        toks.next();
        let sign = match tok {
            "+" => 1.0,
            "-" => -1.0,
            _ => return Err(Error::Parse { line, message: format!("expected + or -, found {tok:?}") }),
        };
        let coef = toks.next().ok_or(Error::Parse { line, message: "dangling sign".into() })?;
        let name = toks.next().ok_or(Error::Parse { line, message: "missing variable name".into() })?;
        terms.push((sign * number(coef, line)?, name));
    }
    Ok(terms)
}

/// Parse LP text produced by [`write_lp`].
pub fn read_lp(text: &str) -> Result<Model> {
    let mut name = String::new();
    let mut sense = None;
    let mut section = Section::Head;
    // Objective and rows are resolved once all variables are known so that
    // the `Bounds` order decides the indices.
    let mut objective: Vec<(f64, String)> = Vec::new();
    let mut rows: Vec<(String, Vec<(f64, String)>, Cmp, f64)> = Vec::new();
    let mut bounds: Vec<(String, f64, f64)> = Vec::new();
    let mut binaries: Vec<String> = Vec::new();

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('\\') {
            if section == Section::Head && name.is_empty() {
                name = rest.trim().to_string();
            }
            continue;
        }
        let header = match trimmed.to_ascii_lowercase().as_str() {
            "minimize" => Some((Section::Objective, Some(Sense::Minimize))),
            "maximize" => Some((Section::Objective, Some(Sense::Maximize))),
            "subject to" => Some((Section::Rows, None)),
            "bounds" => Some((Section::Bounds, None)),
            "binaries" => Some((Section::Binaries, None)),
            "end" => Some((Section::Done, None)),
            _ => None,
        };
        if let Some((next, s)) = header {
            section = next;
            if s.is_some() {
                sense = s;
            }
            continue;
        }
        match section {
            Section::Head | Section::Done => {
                return Err(Error::Parse { line, message: format!("unexpected text {trimmed:?}") })
            }
            Section::Objective | Section::Rows => {
                let (label, body) = trimmed
                    .split_once(':')
                    .ok_or(Error::Parse { line, message: "expected `name:`".into() })?;
                let mut toks = body.split_whitespace().peekable();
                let terms = parse_terms(&mut toks, line)?;
                let owned = terms.into_iter().map(|(a, v)| (a, v.to_string())).collect();
                if section == Section::Objective {
                    objective = owned;
                    continue;
                }
                let cmp = match toks.next() {
                    Some("<=") => Cmp::Le,
                    Some(">=") => Cmp::Ge,
                    Some("=") => Cmp::Eq,
                    _ => return Err(Error::Parse { line, message: "missing comparison".into() }),
                };
                let rhs = number(toks.next().ok_or(Error::Parse { line, message: "missing rhs".into() })?, line)?;
                if toks.next().is_some() {
                    return Err(Error::Parse { line, message: "trailing tokens".into() });
                }
                rows.push((label.trim().to_string(), owned, cmp, rhs));
            }
            Section::Bounds => {
                let toks: Vec<&str> = trimmed.split_whitespace().collect();
                match toks.as_slice() {
                    [lo, "<=", v, "<=", hi] => bounds.push((v.to_string(), number(lo, line)?, number(hi, line)?)),
                    _ => return Err(Error::Parse { line, message: format!("bad bound line {trimmed:?}") }),
                }
            }
            Section::Binaries => binaries.extend(trimmed.split_whitespace().map(str::to_string)),
        }
    }
    let sense = sense.ok_or(Error::Parse { line: 0, message: "no Minimize/Maximize section".into() })?;

    let mut reader = Reader { vars: Vec::new(), index: HashMap::new() };
    for (v, lo, hi) in &bounds {
        let j = reader.var(v);
        reader.vars[j].lower = *lo;
        reader.vars[j].upper = *hi;
    }
    for (a, v) in &objective {
        let j = reader.var(v);
        reader.vars[j].obj += a;
    }
    let mut constraints = Vec::with_capacity(rows.len());
    for (label, terms, cmp, rhs) in rows {
        let terms = terms.iter().map(|(a, v)| (reader.var(v), *a)).collect();
        constraints.push(Constraint { name: label, terms, cmp, rhs });
    }
    for b in &binaries {
        let j = reader.var(b);
        reader.vars[j].kind = VarKind::Binary;
    }
    let model = Model { name, sense, vars: reader.vars, rows: constraints };
    model.validate()?;
    Ok(model)
}
