//! CPLEX LP text format: writer and a reader for the subset it emits.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{ModelInstance, Sense, VarKind};

const LINE_WIDTH: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct LpRowDoc {
    pub name: String,
    pub terms: Vec<(String, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// Name-level view of a model, as stored in an LP file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LpDocument {
    pub objective: Vec<(String, f64)>,
    pub rows: Vec<LpRowDoc>,
    /// Continuous variables with their bounds.
    pub bounds: Vec<(String, f64, f64)>,
    pub binaries: Vec<String>,
}

impl LpDocument {
    pub fn from_model(model: &ModelInstance) -> Self {
        let name = |j: usize| model.variables[j].name.clone();
        let objective = model.objective.iter().map(|&(j, c)| (name(j), c)).collect();
        let rows = model
            .constraints
            .iter()
            .map(|c| LpRowDoc {
                name: c.name.clone(),
                terms: c.terms.iter().map(|&(j, a)| (name(j), a)).collect(),
                sense: c.sense,
                rhs: c.rhs,
            })
            .collect();
        let mut bounds = Vec::new();
        let mut binaries = Vec::new();
        for v in &model.variables {
            match v.kind {
                VarKind::Binary => binaries.push(v.name.clone()),
                VarKind::Continuous => bounds.push((v.name.clone(), v.lower, v.upper)),
            }
        }
        LpDocument { objective, rows, bounds, binaries }
    }

    /// Same document with rows sorted by name, for comparison modulo row order.
    pub fn canonical(&self) -> LpDocument {
        let mut doc = self.clone();
        doc.rows.sort_by(|a, b| a.name.cmp(&b.name));
        doc
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("Minimize\n");
        write_expr(&mut out, " obj:", &self.objective, "");
        out.push_str("Subject To\n");
        for r in &self.rows {
            let tail = format!(" {} {}", r.sense.symbol(), num(r.rhs));
            write_expr(&mut out, &format!(" {}:", r.name), &r.terms, &tail);
        }
        out.push_str("Bounds\n");
        for (name, lo, hi) in &self.bounds {
            match (lo.is_finite(), hi.is_finite()) {
                (true, true) => writeln!(out, " {} <= {name} <= {}", num(*lo), num(*hi)),
                (true, false) => writeln!(out, " {name} >= {}", num(*lo)),
                (false, true) => writeln!(out, " -inf <= {name} <= {}", num(*hi)),
                (false, false) => writeln!(out, " {name} free"),
            }
            .expect("write to string");
        }
        out.push_str("Binaries\n");
        let mut line = String::new();
        for b in &self.binaries {
            if line.len() + b.len() + 1 > LINE_WIDTH {
                out.push_str(&line);
                out.push('\n');
                line.clear();
            }
            line.push(' ');
            line.push_str(b);
        }
        if !line.is_empty() {
            out.push_str(&line);
            out.push('\n');
        }
        out.push_str("End\n");
        out
    }
}

fn num(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else {
        format!("{x}")
    }
}

fn write_expr(out: &mut String, head: &str, terms: &[(String, f64)], tail: &str) {
    let mut line = String::from(head);
    for (i, (name, c)) in terms.iter().enumerate() {
        let piece = match (i, c.is_sign_negative() && *c != 0.0) {
            (0, false) => format!(" {} {name}", num(*c)),
            (0, true) => format!(" - {} {name}", num(-c)),
            (_, false) => format!(" + {} {name}", num(*c)),
            (_, true) => format!(" - {} {name}", num(-c)),
        };
        if line.len() + piece.len() > LINE_WIDTH {
            out.push_str(&line);
            out.push('\n');
            line = String::from(" ");
        }
        line.push_str(&piece);
    }
    if line.len() + tail.len() > LINE_WIDTH {
        out.push_str(&line);
        out.push('\n');
        line = String::from(" ");
    }
    line.push_str(tail);
    out.push_str(&line);
    out.push('\n');
}

/// Byte-stable LP text for `model`.
pub fn export_lp(model: &ModelInstance) -> String {
    LpDocument::from_model(model).to_text()
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Objective,
    Constraints,
    Bounds,
    Binaries,
    End,
}

fn section_keyword(line: &str) -> Option<Section> {
    match line.trim().to_ascii_lowercase().as_str() {
        "minimize" | "minimise" | "min" => Some(Section::Objective),
        "subject to" | "such that" | "st" | "s.t." => Some(Section::Constraints),
        "bounds" | "bound" => Some(Section::Bounds),
        "binaries" | "binary" | "bin" => Some(Section::Binaries),
        "end" => Some(Section::End),
        _ => None,
    }
}

fn is_name(tok: &str) -> bool {
    let mut chars = tok.chars();
    let Some(first) = chars.next() else { return false };
    let ok = |c: char| c.is_ascii_alphanumeric() || "!\"#$%&()/,.;?@_`'{}|~".contains(c);
    !first.is_ascii_digit() && first != '.' && ok(first) && chars.all(ok)
}

fn parse_num(tok: &str, line: usize) -> Result<f64> {
    match tok.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "+infinity" => Ok(f64::INFINITY),
        "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
        _ => {
            tok.parse::<f64>().map_err(|_| Error::LpParse { line, reason: format!("expected a number, found `{tok}`") })
        }
    }
}

fn parse_sense(tok: &str) -> Option<Sense> {
    match tok {
        "<=" | "=<" | "<" => Some(Sense::Le),
        ">=" | "=>" | ">" => Some(Sense::Ge),
        "=" => Some(Sense::Eq),
        _ => None,
    }
}

/// Linear expression `[sign] [coef] name ...` from a token stream.
fn parse_terms(tokens: &[(usize, String)]) -> Result<Vec<(String, f64)>> {
    let mut terms = Vec::new();
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    for (line, tok) in tokens {
        match tok.as_str() {
            "+" => {}
            "-" => sign = -sign,
            t if is_name(t) => {
                terms.push((t.to_string(), sign * coef.unwrap_or(1.0)));
                sign = 1.0;
                coef = None;
            }
            t => {
                if coef.is_some() {
                    return Err(Error::LpParse { line: *line, reason: format!("two coefficients in a row at `{t}`") });
                }
                coef = Some(parse_num(t, *line)?);
            }
        }
    }
    if coef.is_some() {
        let line = tokens.last().map_or(0, |t| t.0);
        return Err(Error::LpParse { line, reason: "coefficient without variable".into() });
    }
    Ok(terms)
}

/// Reads an LP document in the layout [`export_lp`] writes.
pub fn parse_lp(text: &str) -> Result<LpDocument> {
    let mut doc = LpDocument::default();
    let mut section = Section::None;
    let mut pending: Vec<(usize, String)> = Vec::new();
    let mut objective_seen = false;

    let flush_objective = |pending: &mut Vec<(usize, String)>, doc: &mut LpDocument| -> Result<()> {
        if pending.is_empty() {
            return Ok(());
        }
        let mut toks = &pending[..];
        if let Some((_, t)) = toks.first() {
            if t.ends_with(':') {
                toks = &toks[1..];
            }
        }
        doc.objective = parse_terms(toks)?;
        pending.clear();
        Ok(())
    };

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('\\').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        if let Some(next) = section_keyword(line) {
            if section == Section::Objective {
                flush_objective(&mut pending, &mut doc)?;
                objective_seen = true;
            }
            if section == Section::Constraints && !pending.is_empty() {
                return Err(Error::LpParse { line: lineno, reason: "unterminated constraint".into() });
            }
            if next == Section::Constraints && !objective_seen {
                return Err(Error::LpParse { line: lineno, reason: "missing objective section".into() });
            }
            section = next;
            continue;
        }
        let tokens = line.split_whitespace().map(|t| (lineno, t.to_string()));
        match section {
            Section::None => {
                return Err(Error::LpParse { line: lineno, reason: "content before objective section".into() })
            }
            Section::End => return Err(Error::LpParse { line: lineno, reason: "content after End".into() }),
            Section::Objective => pending.extend(tokens),
            Section::Constraints => {
                pending.extend(tokens);
                // a row is complete once a sense and right-hand side are present
                let Some(pos) = pending.iter().position(|(_, t)| parse_sense(t).is_some()) else { continue };
                if pending.len() < pos + 2 {
                    continue;
                }
                if pending.len() > pos + 2 {
                    return Err(Error::LpParse {
                        line: lineno,
                        reason: "trailing tokens after right-hand side".into(),
                    });
                }
                let (_, head) = &pending[0];
                let name = head
                    .strip_suffix(':')
                    .filter(|n| is_name(n))
                    .ok_or_else(|| Error::LpParse { line: lineno, reason: format!("row without name: `{head}`") })?
                    .to_string();
                let terms = parse_terms(&pending[1..pos])?;
                let sense = parse_sense(&pending[pos].1).expect("checked above");
                let rhs = parse_num(&pending[pos + 1].1, lineno)?;
                doc.rows.push(LpRowDoc { name, terms, sense, rhs });
                pending.clear();
            }
            Section::Bounds => {
                let toks: Vec<&str> = line.split_whitespace().collect();
                let bound = match toks.as_slice() {
                    [lo, "<=", name, "<=", hi] if is_name(name) => {
                        (name.to_string(), parse_num(lo, lineno)?, parse_num(hi, lineno)?)
                    }
                    [name, ">=", lo] if is_name(name) => (name.to_string(), parse_num(lo, lineno)?, f64::INFINITY),
                    [name, "<=", hi] if is_name(name) => (name.to_string(), 0.0, parse_num(hi, lineno)?),
                    [name, "=", v] if is_name(name) => {
                        let v = parse_num(v, lineno)?;
                        (name.to_string(), v, v)
                    }
                    [name, "free"] if is_name(name) => (name.to_string(), f64::NEG_INFINITY, f64::INFINITY),
                    _ => {
                        return Err(Error::LpParse {
                            line: lineno,
                            reason: format!("malformed bound `{}`", line.trim()),
                        })
                    }
                };
                doc.bounds.push(bound);
            }
            Section::Binaries => {
                for (_, t) in tokens {
                    if !is_name(&t) {
                        return Err(Error::LpParse { line: lineno, reason: format!("bad binary name `{t}`") });
                    }
                    doc.binaries.push(t);
                }
            }
        }
    }
    if section != Section::End {
        return Err(Error::LpParse { line: text.lines().count(), reason: "missing End".into() });
    }
    Ok(doc)
}
