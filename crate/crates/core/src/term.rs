use std::fmt::{self, Write};

use crate::error::{Error, Result};

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const RDF_PROPERTY: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#Property";
pub const RDFS_SUBCLASS_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
pub const RDFS_SUBPROPERTY_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subPropertyOf";
pub const RDFS_DOMAIN: &str = "http://www.w3.org/2000/01/rdf-schema#domain";
pub const RDFS_RANGE: &str = "http://www.w3.org/2000/01/rdf-schema#range";
pub const RDFS_CLASS: &str = "http://www.w3.org/2000/01/rdf-schema#Class";
pub const RDFS_RESOURCE: &str = "http://www.w3.org/2000/01/rdf-schema#Resource";
pub const RDFS_LITERAL: &str = "http://www.w3.org/2000/01/rdf-schema#Literal";
pub const RDFS_DATATYPE: &str = "http://www.w3.org/2000/01/rdf-schema#Datatype";
pub const OWL_THING: &str = "http://www.w3.org/2002/07/owl#Thing";
pub const OWL_CLASS: &str = "http://www.w3.org/2002/07/owl#Class";
pub const OWL_EQUIVALENT_CLASS: &str = "http://www.w3.org/2002/07/owl#equivalentClass";
pub const OWL_OBJECT_PROPERTY: &str = "http://www.w3.org/2002/07/owl#ObjectProperty";
pub const OWL_DATATYPE_PROPERTY: &str = "http://www.w3.org/2002/07/owl#DatatypeProperty";
pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

/// Namespace under which blank node labels are skolemized.
pub const SKOLEM_PREFIX: &str = "urn:x-wfwl:skolem:";

/// An RDF term. `Display` renders canonical N-Triples syntax.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Iri(String),
    BlankNode(String),
    Literal {
        lexical: String,
        datatype: Option<String>,
        lang: Option<String>,
    },
}

impl Term {
    pub fn iri(s: impl Into<String>) -> Self {
        Term::Iri(s.into())
    }

    pub fn literal(s: impl Into<String>) -> Self {
        Term::Literal {
            lexical: s.into(),
            datatype: None,
            lang: None,
        }
    }

    pub fn typed_literal(s: impl Into<String>, datatype: impl Into<String>) -> Self {
        Term::Literal {
            lexical: s.into(),
            datatype: Some(datatype.into()),
            lang: None,
        }
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal { .. })
    }

    /// Numeric value of an integer, decimal, double or float literal, or of
    /// a plain literal whose lexical form parses as a number.
    pub fn numeric_value(&self) -> Option<f64> {
        match self {
            Term::Literal {
                lexical,
                datatype,
                lang: None,
            } => {
                let numeric_type = datatype.as_deref().is_some_and(|d| {
                    d.strip_prefix(XSD).is_some_and(|local| {
                        matches!(
                            local,
                            "integer"
                                | "decimal"
                                | "double"
                                | "float"
                                | "int"
                                | "long"
                                | "short"
                                | "byte"
                                | "nonNegativeInteger"
                                | "positiveInteger"
                                | "unsignedInt"
                                | "unsignedLong"
                        )
                    })
                });
                if numeric_type || datatype.is_none() {
                    lexical.trim().parse::<f64>().ok().filter(|v| v.is_finite())
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    /// Lexical form used for string comparisons (IRIs compare by their text).
    pub fn lexical(&self) -> &str {
        match self {
            Term::Iri(s) | Term::BlankNode(s) => s,
            Term::Literal { lexical, .. } => lexical,
        }
    }

    /// Parses one term in N-Triples syntax (the whole input must be consumed).
    pub fn parse(s: &str) -> Result<Term> {
        let mut cur = Cursor::new(s, 1);
        let t = cur.term(None)?;
        cur.skip_ws();
        if !cur.at_end() {
            return Err(cur.error("trailing characters after term"));
        }
        Ok(t)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => write_iri(f, iri),
            Term::BlankNode(label) => write!(f, "_:{label}"),
            Term::Literal {
                lexical,
                datatype,
                lang,
            } => {
                f.write_char('"')?;
                for c in lexical.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        '\r' => f.write_str("\\r")?,
                        '\t' => f.write_str("\\t")?,
                        '\u{8}' => f.write_str("\\b")?,
                        '\u{c}' => f.write_str("\\f")?,
                        c if (c as u32) < 0x20 || c as u32 == 0x7f => {
                            write!(f, "\\u{:04X}", c as u32)?
                        }
                        c => f.write_char(c)?,
                    }
                }
                f.write_char('"')?;
                if let Some(lang) = lang {
                    write!(f, "@{lang}")?;
                } else if let Some(dt) = datatype {
                    f.write_str("^^")?;
                    write_iri(f, dt)?;
                }
                Ok(())
            }
        }
    }
}

fn write_iri(f: &mut fmt::Formatter<'_>, iri: &str) -> fmt::Result {
    f.write_char('<')?;
    for c in iri.chars() {
        match c {
            '\0'..=' ' | '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\' => {
                write!(f, "\\u{:04X}", c as u32)?
            }
            c => f.write_char(c)?,
        }
    }
    f.write_char('>')
}

/// A triple of raw terms; the predicate is always an IRI.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub subject: Term,
    pub predicate: String,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: impl Into<String>, object: Term) -> Self {
        Triple {
            subject,
            predicate: predicate.into(),
            object,
        }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ", self.subject)?;
        write_iri(f, &self.predicate)?;
        write!(f, " {} .", self.object)
    }
}

/// Character cursor over one line of N-Triples (also reused for SPARQL terms).
pub(crate) struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(src: &'a str, line: usize) -> Self {
        Cursor { src, pos: 0, line }
    }

    pub(crate) fn error(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            column: self.src[..self.pos].chars().count() + 1,
            message: msg.into(),
        }
    }

    pub(crate) fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    pub(crate) fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    pub(crate) fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    pub(crate) fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t')) {
            self.pos += 1;
        }
    }

    fn hex(&mut self, digits: usize) -> Result<char> {
        let start = self.pos;
        for _ in 0..digits {
            match self.bump() {
                Some(c) if c.is_ascii_hexdigit() => {}
                _ => return Err(self.error("invalid unicode escape")),
            }
        }
        let v = u32::from_str_radix(&self.src[start..self.pos], 16).unwrap();
        char::from_u32(v).ok_or_else(|| self.error("escape is not a unicode scalar value"))
    }

    pub(crate) fn iri(&mut self) -> Result<String> {
        if !self.eat('<') {
            return Err(self.error("expected '<'"));
        }
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return Err(self.error("unterminated IRI")),
                Some('>') => return Ok(out),
                Some('\\') => match self.bump() {
                    Some('u') => out.push(self.hex(4)?),
                    Some('U') => out.push(self.hex(8)?),
                    _ => return Err(self.error("invalid escape in IRI")),
                },
                Some(c @ ('\0'..=' ' | '<' | '"' | '{' | '}' | '|' | '^' | '`')) => {
                    return Err(self.error(format!("character {c:?} not allowed in IRI")))
                }
                Some(c) => out.push(c),
            }
        }
    }

    pub(crate) fn quoted(&mut self) -> Result<String> {
        if !self.eat('"') {
            return Err(self.error("expected '\"'"));
        }
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return Err(self.error("unterminated literal")),
                Some('"') => return Ok(out),
                Some('\\') => match self.bump() {
                    Some('t') => out.push('\t'),
                    Some('b') => out.push('\u{8}'),
                    Some('n') => out.push('\n'),
                    Some('r') => out.push('\r'),
                    Some('f') => out.push('\u{c}'),
                    Some('"') => out.push('"'),
                    Some('\'') => out.push('\''),
                    Some('\\') => out.push('\\'),
                    Some('u') => out.push(self.hex(4)?),
                    Some('U') => out.push(self.hex(8)?),
                    _ => return Err(self.error("invalid escape in literal")),
                },
                Some('\n' | '\r') => return Err(self.error("line break inside literal")),
                Some(c) => out.push(c),
            }
        }
    }

    pub(crate) fn lang_tag(&mut self) -> Result<String> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.error("empty language tag"));
        }
        while self.peek() == Some('-') {
            self.pos += 1;
            let sub = self.pos;
            while self.peek().is_some_and(|c| c.is_ascii_alphanumeric()) {
                self.pos += 1;
            }
            if self.pos == sub {
                return Err(self.error("empty language subtag"));
            }
        }
        Ok(self.src[start..self.pos].to_string())
    }

    fn blank_label(&mut self) -> Result<String> {
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | '\u{b7}'))
        {
            self.pos += self.peek().unwrap().len_utf8();
        }
        // A trailing '.' terminates the statement rather than the label.
        while self.pos > start && self.src[..self.pos].ends_with('.') {
            self.pos -= 1;
        }
        if self.pos == start {
            return Err(self.error("empty blank node label"));
        }
        Ok(self.src[start..self.pos].to_string())
    }

    /// Parses an IRI, blank node or literal. Blank nodes are rewritten to
    /// skolem IRIs when `skolem_scope` is given.
    pub(crate) fn term(&mut self, skolem_scope: Option<&str>) -> Result<Term> {
        match self.peek() {
            Some('<') => Ok(Term::Iri(self.iri()?)),
            Some('_') => {
                self.bump();
                if !self.eat(':') {
                    return Err(self.error("expected ':' after '_'"));
                }
                let label = self.blank_label()?;
                Ok(match skolem_scope {
                    Some(scope) => Term::Iri(format!("{SKOLEM_PREFIX}{scope}/{label}")),
                    None => Term::BlankNode(label),
                })
            }
            Some('"') => {
                let lexical = self.quoted()?;
                if self.eat('@') {
                    let lang = self.lang_tag()?;
                    Ok(Term::Literal {
                        lexical,
                        datatype: None,
                        lang: Some(lang),
                    })
                } else if self.src[self.pos..].starts_with("^^") {
                    self.pos += 2;
                    let dt = self.iri()?;
                    Ok(Term::Literal {
                        lexical,
                        datatype: Some(dt),
                        lang: None,
                    })
                } else {
                    Ok(Term::Literal {
                        lexical,
                        datatype: None,
                        lang: None,
                    })
                }
            }
            Some(c) => Err(self.error(format!("unexpected character {c:?}"))),
            None => Err(self.error("unexpected end of line")),
        }
    }
}
