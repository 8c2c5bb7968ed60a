//! Standalone checker for the CPLEX LP grammar, independent of the crate's
//! own reader.

use std::collections::HashSet;

const MAX_LINE: usize = 560;
const MAX_NAME: usize = 255;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    Objective,
    Constraints,
    Bounds,
    Binaries,
    Generals,
    End,
}

fn section(line: &str) -> Option<Section> {
    match line.trim().to_ascii_lowercase().as_str() {
        "minimize" | "maximize" | "minimum" | "maximum" | "min" | "max" => Some(Section::Objective),
        "subject to" | "such that" | "st" | "s.t." | "st." => Some(Section::Constraints),
        "bounds" | "bound" => Some(Section::Bounds),
        "binaries" | "binary" | "bin" => Some(Section::Binaries),
        "generals" | "general" | "gen" => Some(Section::Generals),
        "end" => Some(Section::End),
        _ => None,
    }
}

fn valid_name(name: &str) -> bool {
    const EXTRA: &str = "!\"#$%&()/,.;?@_`'{}|~";
    let Some(first) = name.chars().next() else { return false };
    name.len() <= MAX_NAME
        && !first.is_ascii_digit()
        && first != '.'
        && name.chars().all(|c| c.is_ascii_alphanumeric() || EXTRA.contains(c))
        && !looks_like_exponent(name)
}

fn looks_like_exponent(name: &str) -> bool {
    name.starts_with(['e', 'E']) && name[1..].chars().all(|c| c.is_ascii_digit())
}

fn valid_number(tok: &str) -> bool {
    let t = tok.to_ascii_lowercase();
    if t == "inf" || t == "infinity" {
        return true;
    }
    let (mantissa, exponent) = match t.split_once('e') {
        Some((m, e)) => (m, Some(e)),
        None => (t.as_str(), None),
    };
    let digits = mantissa.chars().filter(|c| c.is_ascii_digit()).count();
    let mantissa_ok = digits > 0
        && mantissa.chars().filter(|&c| c == '.').count() <= 1
        && mantissa.chars().all(|c| c.is_ascii_digit() || c == '.');
    let exponent_ok = exponent.is_none_or(|e| {
        let e = e.strip_prefix(['+', '-']).unwrap_or(e);
        !e.is_empty() && e.chars().all(|c| c.is_ascii_digit())
    });
    mantissa_ok && exponent_ok
}

/// Linear expression: `[sign] [coef] name { sign [coef] name }`.
fn check_expr(tokens: &[&str], names: &mut HashSet<String>) -> Result<(), String> {
    let mut i = 0;
    let mut first = true;
    while i < tokens.len() {
        let mut sign = false;
        if tokens[i] == "+" || tokens[i] == "-" {
            sign = true;
            i += 1;
        }
        if !first && !sign {
            return Err(format!("missing operator before `{}`", tokens.get(i).unwrap_or(&"")));
        }
        first = false;
        if i < tokens.len() && valid_number(tokens[i]) {
            i += 1;
        }
        let Some(name) = tokens.get(i) else { return Err("dangling coefficient".into()) };
        if !valid_name(name) {
            return Err(format!("bad variable name `{name}`"));
        }
        names.insert(name.to_string());
        i += 1;
    }
    Ok(())
}

fn split_label(line: &str) -> Result<(Option<&str>, &str), String> {
    match line.split_once(':') {
        Some((label, rest)) => {
            let label = label.trim();
            if !valid_name(label) {
                return Err(format!("bad label `{label}`"));
            }
            Ok((Some(label), rest))
        }
        None => Ok((None, line)),
    }
}

fn is_sense(t: &str) -> bool {
    matches!(t, "<=" | ">=" | "=" | "<" | ">" | "=<" | "=>")
}

/// Statements may span lines; a constraint ends at its right-hand side.
fn constraint_statements(lines: &[&str]) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for line in lines {
        cur.push(' ');
        cur.push_str(line);
        let toks: Vec<&str> = cur.split_whitespace().collect();
        let n = toks.len();
        if n >= 2 && is_sense(toks[n - 2]) {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.trim().is_empty() {
        return Err(format!("unterminated constraint `{}`", cur.trim()));
    }
    Ok(out)
}

fn check_bound(line: &str, names: &mut HashSet<String>) -> Result<(), String> {
    let t: Vec<&str> = line.split_whitespace().collect();
    let num = |s: &str| valid_number(s.strip_prefix(['+', '-']).unwrap_or(s));
    let name = |s: &str, names: &mut HashSet<String>| {
        names.insert(s.to_string());
        valid_name(s)
    };
    let ok = match t.as_slice() {
        [v, "free"] => name(v, names),
        [v, op, b] => is_sense(op) && num(b) && name(v, names),
        [a, op1, v, op2, b] => is_sense(op1) && is_sense(op2) && num(a) && num(b) && name(v, names),
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(format!("bad bound `{line}`"))
    }
}

/// Checks `text` against the LP-format grammar: section order, line width,
/// name charset, expression and bound syntax, and that every variable
/// mentioned in the body is declared or used consistently.
pub fn check(text: &str) -> Result<(), String> {
    let mut current: Option<Section> = None;
    let mut chunks: Vec<(Section, Vec<&str>)> = Vec::new();
    for (no, line) in text.lines().enumerate() {
        if line.len() > MAX_LINE {
            return Err(format!("line {} exceeds {MAX_LINE} characters", no + 1));
        }
        let body = line.split('\\').next().unwrap_or("");
        if body.trim().is_empty() {
            continue;
        }
        if let Some(s) = section(body) {
            if current.is_some_and(|c| s <= c) {
                return Err(format!("section {s:?} out of order at line {}", no + 1));
            }
            if current.is_none() && s != Section::Objective {
                return Err("document must open with an objective sense".into());
            }
            current = Some(s);
            chunks.push((s, Vec::new()));
            continue;
        }
        match chunks.last_mut() {
            Some((Section::End, _)) => return Err(format!("content after End at line {}", no + 1)),
            Some((_, lines)) => lines.push(body),
            None => return Err(format!("content before any section at line {}", no + 1)),
        }
    }
    if current != Some(Section::End) {
        return Err("missing End".into());
    }
    if !chunks.iter().any(|(s, _)| *s == Section::Constraints) {
        return Err("missing Subject To".into());
    }

    let mut names = HashSet::new();
    let mut labels = HashSet::new();
    let mut declared = HashSet::new();
    for (s, lines) in &chunks {
        match s {
            Section::Objective => {
                let joined = lines.join(" ");
                let (_, rest) = split_label(&joined)?;
                check_expr(&rest.split_whitespace().collect::<Vec<_>>(), &mut names)?;
            }
            Section::Constraints => {
                for stmt in constraint_statements(lines)? {
                    let (label, rest) = split_label(&stmt)?;
                    if let Some(l) = label {
                        if !labels.insert(l.to_string()) {
                            return Err(format!("duplicate row name `{l}`"));
                        }
                    }
                    let toks: Vec<&str> = rest.split_whitespace().collect();
                    let n = toks.len();
                    let rhs = toks[n - 1];
                    if !valid_number(rhs.strip_prefix(['+', '-']).unwrap_or(rhs)) {
                        return Err(format!("bad right-hand side `{rhs}`"));
                    }
                    if n < 3 {
                        return Err(format!("empty constraint `{}`", stmt.trim()));
                    }
                    check_expr(&toks[..n - 2], &mut names)?;
                }
            }
            Section::Bounds => {
                for line in lines {
                    check_bound(line, &mut declared)?;
                }
            }
            Section::Binaries | Section::Generals => {
                for name in lines.iter().flat_map(|l| l.split_whitespace()) {
                    if !valid_name(name) {
                        return Err(format!("bad integer name `{name}`"));
                    }
                    if !declared.insert(name.to_string()) {
                        return Err(format!("`{name}` declared twice"));
                    }
                }
            }
            Section::End => {}
        }
    }
    if let Some(n) = names.iter().find(|n| !declared.contains(*n)) {
        return Err(format!("`{n}` used but never declared"));
    }
    Ok(())
}
