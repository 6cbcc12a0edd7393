//! Strict line-oriented N-Triples reader.

use std::io::BufRead;

use crate::error::{Error, Result};
use crate::term::{Cursor, Triple};

/// Parses N-Triples from `input`. Blank node labels become IRIs under
/// [`SKOLEM_PREFIX`](crate::term::SKOLEM_PREFIX) qualified by `scope`, so the
/// same label in two files yields two distinct resources.
pub fn parse_ntriples<R: BufRead>(input: R, scope: &str) -> Result<Vec<Triple>> {
    let mut out = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse {
            line: idx + 1,
            column: 1,
            message: e.to_string(),
        })?;
        if let Some(t) = parse_line(&line, idx + 1, scope)? {
            out.push(t);
        }
    }
    Ok(out)
}

pub fn parse_ntriples_str(input: &str, scope: &str) -> Result<Vec<Triple>> {
    parse_ntriples(input.as_bytes(), scope)
}

fn parse_line(line: &str, number: usize, scope: &str) -> Result<Option<Triple>> {
    let line = line.strip_suffix('\r').unwrap_or(line);
    let mut cur = Cursor::new(line, number);
    cur.skip_ws();
    if cur.at_end() || cur.peek() == Some('#') {
        return Ok(None);
    }
    let subject = cur.term(Some(scope))?;
    if subject.is_literal() {
        return Err(cur.error("literal in subject position"));
    }
    cur.skip_ws();
    let predicate = cur.iri()?;
    cur.skip_ws();
    let object = cur.term(Some(scope))?;
    cur.skip_ws();
    if !cur.eat('.') {
        return Err(cur.error("expected '.' at end of statement"));
    }
    cur.skip_ws();
    if !cur.at_end() && cur.peek() != Some('#') {
        return Err(cur.error("unexpected content after '.'"));
    }
    Ok(Some(Triple {
        subject,
        predicate,
        object,
    }))
}

/// Serializes triples one per line.
pub fn write_ntriples<'a, W, I>(mut out: W, triples: I) -> std::io::Result<()>
where
    W: std::io::Write,
    I: IntoIterator<Item = &'a Triple>,
{
    for t in triples {
        writeln!(out, "{t}")?;
    }
    Ok(())
}
