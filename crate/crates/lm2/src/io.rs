//! The face-list text format: one face per line as three whitespace-separated
//! positive integers, `edge a b` lines for bare edges, `#` comments. This is
//! the interchange currency of the CLI. Writing is canonical (faces sorted,
//! then bare edges sorted), so `write(parse(file)) == file` for canonical
//! files. Isolated vertices are not expressible in the format.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use crate::complex::{Complex2, Edge, Face};
use crate::error::{Error, Result};

pub fn parse_complex_str(text: &str, origin: &str) -> Result<Complex2> {
    let mut faces: Vec<(u32, u32, u32)> = Vec::new();
    let mut seen_faces: BTreeSet<Face> = BTreeSet::new();
    let mut extra_edges: Vec<(u32, u32)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let tokens = tokenize(content);
        if tokens.is_empty() {
            continue;
        }
        let fail = |column: usize, msg: String| Error::Parse {
            path: origin.to_string(),
            line,
            column,
            msg,
        };
        if tokens[0].1 == "edge" {
            if tokens.len() != 3 {
                return Err(fail(
                    tokens[0].0,
                    format!("edge line needs exactly 2 endpoints, got {}", tokens.len() - 1),
                ));
            }
            let a = parse_vertex(&tokens[1], origin, line)?;
            let b = parse_vertex(&tokens[2], origin, line)?;
            if a == b {
                return Err(fail(tokens[1].0, format!("degenerate edge ({a} {b})")));
            }
            extra_edges.push((a, b));
        } else {
            if tokens.len() != 3 {
                return Err(fail(
                    tokens[0].0,
                    format!("face line needs exactly 3 vertices, got {}", tokens.len()),
                ));
            }
            let a = parse_vertex(&tokens[0], origin, line)?;
            let b = parse_vertex(&tokens[1], origin, line)?;
            let c = parse_vertex(&tokens[2], origin, line)?;
            let face = Face::try_new(a, b, c)
                .map_err(|_| fail(tokens[0].0, format!("degenerate face ({a} {b} {c})")))?;
            if !seen_faces.insert(face) {
                return Err(fail(tokens[0].0, format!("duplicate face ({a} {b} {c})")));
            }
            faces.push((a, b, c));
        }
    }
    Complex2::build(&faces, &extra_edges)
}

pub fn parse_complex_file(path: &Path) -> Result<Complex2> {
    let text = fs::read_to_string(path).map_err(|e| Error::io_at(path, e))?;
    parse_complex_str(&text, &path.display().to_string())
}

pub fn write_complex_string(c: &Complex2) -> String {
    let mut out = String::new();
    for f in c.faces() {
        let [a, b, v] = f.vertices();
        out.push_str(&format!("{a} {b} {v}\n"));
    }
    let covered: BTreeSet<Edge> = c.faces().iter().flat_map(|f| f.edges()).collect();
    for e in c.edges() {
        if !covered.contains(e) {
            let (a, b) = e.endpoints();
            out.push_str(&format!("edge {a} {b}\n"));
        }
    }
    out
}

pub fn write_complex_file(c: &Complex2, path: &Path) -> Result<()> {
    fs::write(path, write_complex_string(c)).map_err(|e| Error::io_at(path, e))?;
    Ok(())
}

/// Split a line into (1-based column, token) pairs.
fn tokenize(line: &str) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut start = 0;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if !current.is_empty() {
                out.push((start + 1, std::mem::take(&mut current)));
            }
        } else {
            if current.is_empty() {
                start = i;
            }
            current.push(ch);
        }
    }
    if !current.is_empty() {
        out.push((start + 1, current));
    }
    out
}

fn parse_vertex(token: &(usize, String), origin: &str, line: usize) -> Result<u32> {
    match token.1.parse::<u32>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(Error::Parse {
            path: origin.to_string(),
            line,
            column: token.0,
            msg: format!("expected a positive integer vertex id, got `{}`", token.1),
        }),
    }
}
