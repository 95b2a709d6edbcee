//! The line-oriented graph format:
//!
//! ```text
//! # comment
//! nodes 3
//! name 1 x
//! edge x 2 p=1 q=2
//! edge 2 3 p=c(5) q=c(5) m=5
//! ```

use super::{BondOrder, EGcmGraph, GraphBuilder, GraphError};
use crate::arith::parse_expr;

fn syntax(line: usize, column: usize, message: impl Into<String>) -> GraphError {
    GraphError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

/// Whitespace-separated tokens with their byte offsets.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

struct Line<'a> {
    number: usize,
    text: &'a str,
    toks: Vec<(usize, &'a str)>,
}

fn parse_count(l: &Line, idx: usize) -> Result<usize, GraphError> {
    let (off, tok) = l
        .toks
        .get(idx)
        .copied()
        .ok_or_else(|| syntax(l.number, l.text.len() + 1, "missing number"))?;
    tok.parse::<usize>()
        .map_err(|_| syntax(l.number, off + 1, format!("expected a number, found '{tok}'")))
}

/// Parses the format, inferring bond orders up to `m_max`.
pub fn parse_graph_with(text: &str, m_max: u32) -> Result<EGcmGraph, GraphError> {
    let mut lines = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("");
        let toks = tokens(body);
        if !toks.is_empty() {
            lines.push(Line {
                number: k + 1,
                text: body,
                toks,
            });
        }
    }
    let Some(first) = lines.first() else {
        return Err(syntax(1, 1, "expected 'nodes <n>'"));
    };
    if first.toks[0].1 != "nodes" {
        return Err(syntax(first.number, first.toks[0].0 + 1, "expected 'nodes <n>' first"));
    }
    let n = parse_count(first, 1)?;
    if let Some(&(off, _)) = first.toks.get(2) {
        return Err(syntax(first.number, off + 1, "unexpected token"));
    }
    if n == 0 {
        return Err(syntax(first.number, first.toks[1].0 + 1, "graph must have at least one node"));
    }

    // Names first, so edges may refer to names declared later.
    let mut names: Vec<Option<String>> = vec![None; n];
    for l in &lines[1..] {
        if l.toks[0].1 != "name" {
            continue;
        }
        let idx = parse_count(l, 1)?;
        if idx == 0 || idx > n {
            return Err(syntax(l.number, l.toks[1].0 + 1, format!("node {idx} out of range 1..={n}")));
        }
        let (off, name) = l
            .toks
            .get(2)
            .copied()
            .ok_or_else(|| syntax(l.number, l.text.len() + 1, "missing name"))?;
        if !is_ident(name) {
            return Err(syntax(l.number, off + 1, format!("invalid name '{name}'")));
        }
        if names.iter().any(|s| s.as_deref() == Some(name)) {
            return Err(syntax(l.number, off + 1, format!("name '{name}' used twice")));
        }
        if names[idx - 1].is_some() {
            return Err(syntax(l.number, l.toks[1].0 + 1, format!("node {idx} already named")));
        }
        if let Some(&(off, _)) = l.toks.get(3) {
            return Err(syntax(l.number, off + 1, "unexpected token"));
        }
        names[idx - 1] = Some(name.to_string());
    }

    let resolve = |l: &Line, idx: usize| -> Result<usize, GraphError> {
        let (off, tok) = l
            .toks
            .get(idx)
            .copied()
            .ok_or_else(|| syntax(l.number, l.text.len() + 1, "missing node"))?;
        if let Ok(k) = tok.parse::<usize>() {
            if k == 0 || k > n {
                return Err(syntax(l.number, off + 1, format!("node {k} out of range 1..={n}")));
            }
            return Ok(k - 1);
        }
        names
            .iter()
            .position(|s| s.as_deref() == Some(tok))
            .ok_or_else(|| syntax(l.number, off + 1, format!("unknown node '{tok}'")))
    };

    let mut builder = GraphBuilder::new(n).m_max(m_max);
    for (i, name) in names.iter().enumerate() {
        if let Some(name) = name {
            builder = builder.name(i, name.clone());
        }
    }
    for l in &lines[1..] {
        match l.toks[0].1 {
            "name" => continue,
            "nodes" => return Err(syntax(l.number, l.toks[0].0 + 1, "'nodes' given twice")),
            "edge" => {}
            other => {
                return Err(syntax(l.number, l.toks[0].0 + 1, format!("unknown directive '{other}'")))
            }
        }
        let a = resolve(l, 1)?;
        let b = resolve(l, 2)?;
        // Attributes: key=value, where a value may contain spaces.
        let mut attrs: Vec<(usize, &str, usize, usize)> = Vec::new();
        for &(off, tok) in &l.toks[3..] {
            match tok.find('=') {
                Some(eq) => attrs.push((off, &tok[..eq], off + eq + 1, off + tok.len())),
                None => match attrs.last_mut() {
                    Some(last) => last.3 = off + tok.len(),
                    None => return Err(syntax(l.number, off + 1, "expected key=value")),
                },
            }
        }
        let (mut p, mut q, mut m) = (None, None, None);
        for (off, key, vs, ve) in attrs {
            let value = &l.text[vs..ve];
            let expr = |v: &str| {
                parse_expr(v).map_err(|e| syntax(l.number, vs + e.column, e.message))
            };
            match key {
                "p" if p.is_none() => p = Some(expr(value)?),
                "q" if q.is_none() => q = Some(expr(value)?),
                "m" if m.is_none() => {
                    m = Some(match value.trim() {
                        "inf" => BondOrder::Infinite,
                        v => BondOrder::Finite(v.parse::<u32>().map_err(|_| {
                            syntax(l.number, vs + 1, format!("invalid bond order '{v}'"))
                        })?),
                    })
                }
                "p" | "q" | "m" => {
                    return Err(syntax(l.number, off + 1, format!("'{key}' given twice")))
                }
                _ => return Err(syntax(l.number, off + 1, format!("unknown attribute '{key}'"))),
            }
        }
        let p = p.ok_or_else(|| syntax(l.number, l.text.len() + 1, "missing p="))?;
        let q = q.ok_or_else(|| syntax(l.number, l.text.len() + 1, "missing q="))?;
        builder = builder.push(a, b, p, q, m, Some(l.number));
    }
    builder.build()
}
