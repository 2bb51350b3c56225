use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use super::{natural_key, Instruction, SlpProgram, Term, VarId};
use crate::error::{FmmError, Result};

struct Stmt {
    line: usize,
    target: String,
    rhs: Rhs,
}

enum Rhs {
    Lin(Vec<(bool, String, i64)>, i64),
    Prod(String, String),
}

impl Rhs {
    fn reads(&self) -> Vec<&str> {
        match self {
            Rhs::Lin(t, _) => t.iter().map(|x| x.1.as_str()).collect(),
            Rhs::Prod(a, b) => vec![a.as_str(), b.as_str()],
        }
    }
}

fn is_ident(s: &str) -> bool {
    let mut c = s.chars();
    matches!(c.next(), Some(ch) if ch.is_ascii_alphabetic()) && c.all(|ch| ch.is_ascii_alphanumeric())
}

fn pow2_exponent(lit: &str) -> Option<i64> {
    let v: u64 = lit.parse().ok()?;
    v.is_power_of_two().then(|| v.trailing_zeros() as i64)
}

/// Splits a signed sum at top-level `+`/`-`.
fn split_terms(s: &str) -> Option<Vec<(bool, &str)>> {
    let mut out = Vec::new();
    let bytes = s.as_bytes();
    let mut start = 0;
    let mut negative = false;
    if let Some(&b) = bytes.first() {
        if b == b'+' || b == b'-' {
            negative = b == b'-';
            start = 1;
        }
    }
    let mut i = start;
    while i <= bytes.len() {
        if i == bytes.len() || bytes[i] == b'+' || bytes[i] == b'-' {
            if i == start {
                return None;
            }
            out.push((negative, &s[start..i]));
            if i < bytes.len() {
                negative = bytes[i] == b'-';
            }
            start = i + 1;
        }
        i += 1;
    }
    Some(out)
}

/// `x`, `x*4`, `x/8`, `2*x`, with any number of power-of-two factors.
fn parse_term(t: &str) -> std::result::Result<(&str, i64), String> {
    let mut ident = None;
    let mut scale = 0i64;
    let mut rest = t;
    let mut op = '*';
    loop {
        let end = rest.find(['*', '/']).unwrap_or(rest.len());
        let tok = &rest[..end];
        if is_ident(tok) {
            if ident.is_some() || op == '/' {
                return Err(format!("unexpected identifier '{tok}' in term '{t}'"));
            }
            ident = Some(tok);
        } else {
            let e = pow2_exponent(tok)
                .ok_or_else(|| format!("'{tok}' is not a power-of-two constant"))?;
            scale += if op == '*' { e } else { -e };
        }
        if end == rest.len() {
            break;
        }
        op = rest.as_bytes()[end] as char;
        rest = &rest[end + 1..];
    }
    ident.map(|i| (i, scale)).ok_or_else(|| format!("term '{t}' has no variable"))
}

fn parse_rhs(rhs: &str) -> std::result::Result<Rhs, String> {
    if rhs.is_empty() {
        return Err("empty right-hand side".into());
    }
    if let Some((a, b)) = rhs.split_once('*') {
        if is_ident(a) && is_ident(b) {
            return Ok(Rhs::Prod(a.to_string(), b.to_string()));
        }
    }
    let (sum, post) = if let Some(inner) = rhs.strip_prefix('(') {
        let close = inner.rfind(')').ok_or("unbalanced parenthesis")?;
        let suffix = &inner[close + 1..];
        let post = if suffix.is_empty() {
            0
        } else {
            let (op, lit) = suffix.split_at(1);
            let e = pow2_exponent(lit).ok_or_else(|| format!("'{lit}' is not a power-of-two constant"))?;
            match op {
                "/" => -e,
                "*" => e,
                _ => return Err(format!("unexpected '{suffix}' after parenthesis")),
            }
        };
        (&inner[..close], post)
    } else {
        (rhs, 0)
    };
    if sum.contains(['(', ')']) {
        return Err("nested parentheses are not supported".into());
    }
    let terms = split_terms(sum).ok_or("malformed sum")?;
    let mut out = Vec::with_capacity(terms.len());
    for (neg, t) in terms {
        let (v, s) = parse_term(t)?;
        out.push((neg, v.to_string(), s));
    }
    Ok(Rhs::Lin(out, post))
}

/// Drops whitespace, refusing it between two alphanumeric characters.
fn compact(s: &str) -> Option<String> {
    let mut out = String::with_capacity(s.len());
    let mut gap = false;
    for c in s.chars() {
        if c.is_whitespace() {
            gap = true;
            continue;
        }
        if gap && c.is_ascii_alphanumeric() && out.chars().last().is_some_and(|p| p.is_ascii_alphanumeric()) {
            return None;
        }
        gap = false;
        out.push(c);
    }
    Some(out)
}

/// Parses listing syntax.
///
/// Optional header lines `#inputs: a b ...` and `#outputs: x y ...` fix the
/// interface. Without them, inputs are the variables read before any
/// assignment and outputs are the assigned variables never read, both in
/// natural order (`A11 < A12`, `l2 < l10`). Other `#` lines are comments.
pub fn parse_slp(text: &str) -> Result<SlpProgram> {
    let mut declared_inputs: Option<Vec<&str>> = None;
    let mut declared_outputs: Option<Vec<&str>> = None;
    let mut stmts = Vec::new();

    for (lno, raw) in text.lines().enumerate() {
        let line = lno + 1;
        let trimmed = raw.trim();
        if let Some(c) = trimmed.strip_prefix('#') {
            let c = c.trim();
            if let Some(list) = c.strip_prefix("inputs:") {
                declared_inputs = Some(list.split_whitespace().collect());
            } else if let Some(list) = c.strip_prefix("outputs:") {
                declared_outputs = Some(list.split_whitespace().collect());
            }
            continue;
        }
        let mut col = 0;
        for piece in raw.split(';') {
            let start_col = col + 1;
            col += piece.len() + 1;
            let s = piece.trim();
            if s.is_empty() {
                continue;
            }
            let err = |msg: String| FmmError::ParseLine {
                line,
                msg: format!("column {start_col}: {msg} in '{s}'"),
            };
            let (lhs, rhs) = s.split_once('=').ok_or_else(|| err("missing '='".into()))?;
            let lhs = lhs.trim();
            if !is_ident(lhs) {
                return Err(err(format!("invalid target '{lhs}'")));
            }
            let rhs = compact(rhs.trim()).ok_or_else(|| err("whitespace inside a token".into()))?;
            let rhs = parse_rhs(&rhs).map_err(err)?;
            stmts.push(Stmt {
                line,
                target: lhs.to_string(),
                rhs,
            });
        }
        if !raw.trim_end().ends_with(';') && !raw.trim().is_empty() {
            return Err(FmmError::ParseLine {
                line,
                msg: "statement not terminated by ';'".into(),
            });
        }
    }
    build(stmts, declared_inputs, declared_outputs)
}

fn build(stmts: Vec<Stmt>, inputs: Option<Vec<&str>>, outputs: Option<Vec<&str>>) -> Result<SlpProgram> {
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<String, VarId> = HashMap::new();
    let mut intern = |n: &str, names: &mut Vec<String>| -> VarId {
        *index.entry(n.to_string()).or_insert_with(|| {
            names.push(n.to_string());
            names.len() - 1
        })
    };

    // free variables, in order of first appearance
    let mut assigned = HashSet::new();
    let mut free: Vec<&str> = Vec::new();
    let mut read = HashSet::new();
    for s in &stmts {
        for u in s.rhs.reads() {
            read.insert(u);
            if !assigned.contains(u) && !free.contains(&u) {
                free.push(u);
            }
        }
        if !assigned.insert(s.target.as_str()) {
            return Err(FmmError::ParseLine {
                line: s.line,
                msg: format!("'{}' assigned twice", s.target),
            });
        }
    }

    let input_list: Vec<&str> = match inputs {
        Some(list) => {
            for f in &free {
                if !list.contains(f) {
                    let line = stmts
                        .iter()
                        .find(|s| s.rhs.reads().contains(f))
                        .map(|s| s.line)
                        .unwrap_or(0);
                    return Err(FmmError::ParseLine {
                        line,
                        msg: format!("'{f}' used before definition"),
                    });
                }
            }
            list
        }
        None => {
            let mut f = free.clone();
            f.sort_by_key(|n| natural_key(n));
            f
        }
    };
    let output_list: Vec<&str> = match outputs {
        Some(list) => list,
        None => {
            let mut o: Vec<&str> = stmts
                .iter()
                .map(|s| s.target.as_str())
                .filter(|t| !read.contains(t))
                .collect();
            o.sort_by_key(|n| natural_key(n));
            o
        }
    };

    let input_ids: Vec<VarId> = input_list.iter().map(|n| intern(n, &mut names)).collect();
    let mut instructions = Vec::with_capacity(stmts.len());
    for s in &stmts {
        let ins = match &s.rhs {
            Rhs::Lin(terms, post) => {
                let terms = terms
                    .iter()
                    .map(|(negative, v, scale)| Term {
                        negative: *negative,
                        var: intern(v, &mut names),
                        scale: *scale,
                    })
                    .collect();
                Instruction::LinCombine {
                    target: intern(&s.target, &mut names),
                    terms,
                    post_scale: *post,
                }
            }
            Rhs::Prod(a, b) => {
                let left = intern(a, &mut names);
                let right = intern(b, &mut names);
                Instruction::Product {
                    target: intern(&s.target, &mut names),
                    left,
                    right,
                }
            }
        };
        instructions.push(ins);
    }
    let output_ids = output_list.iter().map(|n| intern(n, &mut names)).collect();
    SlpProgram::new(names, input_ids, output_ids, instructions)
}

fn render_scale(out: &mut String, e: i64) {
    match e {
        0 => {}
        e if e > 0 => {
            let _ = write!(out, "*{}", 1u128 << e);
        }
        e => {
            let _ = write!(out, "/{}", 1u128 << -e);
        }
    }
}

pub(super) fn render(p: &SlpProgram) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "#inputs: {}", p.input_names().join(" "));
    let _ = writeln!(out, "#outputs: {}", p.output_names().join(" "));
    for ins in p.instructions() {
        match ins {
            Instruction::LinCombine {
                target,
                terms,
                post_scale,
            } => {
                let mut body = String::new();
                for (i, t) in terms.iter().enumerate() {
                    if t.negative {
                        body.push('-');
                    } else if i > 0 {
                        body.push('+');
                    }
                    body.push_str(p.name(t.var));
                    render_scale(&mut body, t.scale);
                }
                let _ = write!(out, "{}=", p.name(*target));
                if *post_scale != 0 {
                    let _ = write!(out, "({body})");
                    render_scale(&mut out, *post_scale);
                } else {
                    out.push_str(&body);
                }
                out.push_str(";\n");
            }
            Instruction::Product {
                target,
                left,
                right,
            } => {
                let _ = writeln!(out, "{}={}*{};", p.name(*target), p.name(*left), p.name(*right));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn listing_statements() {
        let p = parse_slp("x16=A13+A31;").unwrap();
        match &p.instructions()[0] {
            Instruction::LinCombine {
                terms, post_scale, ..
            } => {
                assert_eq!(terms.len(), 2);
                assert_eq!(*post_scale, 0);
            }
            _ => panic!(),
        }
        let p = parse_slp("e88=(d55-r13-r23)/2;").unwrap();
        match &p.instructions()[0] {
            Instruction::LinCombine {
                terms, post_scale, ..
            } => {
                assert_eq!(terms.len(), 3);
                assert_eq!(*post_scale, -1);
                assert!(terms[1].negative && terms[2].negative && !terms[0].negative);
            }
            _ => panic!(),
        }
        let p = parse_slp("p0=l0*r0;").unwrap();
        assert!(matches!(p.instructions()[0], Instruction::Product { .. }));
        assert_eq!(p.input_names(), vec!["l0", "r0"]);
        assert_eq!(p.output_names(), vec!["p0"]);
    }

    #[test]
    fn scaled_terms() {
        let p = parse_slp("q37=p3*2-q12+q6; y=8*a/2;").unwrap();
        match &p.instructions()[0] {
            Instruction::LinCombine { terms, .. } => assert_eq!(terms[0].scale, 1),
            _ => panic!(),
        }
        match &p.instructions()[1] {
            Instruction::LinCombine { terms, .. } => assert_eq!(terms[0].scale, 2),
            _ => panic!(),
        }
    }

    #[test]
    fn syntax_errors() {
        for bad in [
            "x=a*3;",
            "x=(a+b)/6;",
            "x=a+;",
            "x==a;",
            "1x=a;",
            "x=a b;",
            "x=(a+b;",
            "x=a",
            "x=a*b*c;",
        ] {
            assert!(parse_slp(bad).is_err(), "{bad} should fail");
        }
    }

    #[test]
    fn whitespace_insensitive() {
        let a = parse_slp("x = ( a - b ) / 2 ;\ny = x + a ;").unwrap();
        let b = parse_slp("x=(a-b)/2;y=x+a;").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn render_round_trip() {
        let text = "#inputs: a b\n#outputs: z\nx=(a-b)/8;\ny=-a*4+x;\nz=x*y;\n";
        let p = parse_slp(text).unwrap();
        assert_eq!(p.render(), text);
        assert_eq!(parse_slp(&p.render()).unwrap(), p);
    }
}
