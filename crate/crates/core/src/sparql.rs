//! Parser for the supported SPARQL subset.
//!
//! `SELECT [DISTINCT] vars|* WHERE { ... }` with triple patterns (`a`, `;`
//! and `,` abbreviations), nested groups, `UNION`, `OPTIONAL` and `FILTER`
//! comparisons combined with `&&`, `||` and `!`, followed by `ORDER BY`,
//! `LIMIT` and `OFFSET`. Anything else is rejected with
//! [`Error::Unsupported`] rather than a syntax error when it is recognisably
//! a SPARQL construct.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::term::{self, Term};

/// A subject, predicate or object position of a pattern.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Slot {
    Var(String),
    Term(Term),
}

impl Slot {
    pub fn var(&self) -> Option<&str> {
        match self {
            Slot::Var(v) => Some(v),
            Slot::Term(_) => None,
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Var(v) => write!(f, "?{v}"),
            Slot::Term(t) => write!(f, "{t}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PatternTriple {
    pub subject: Slot,
    pub predicate: Slot,
    pub object: Slot,
}

impl PatternTriple {
    pub fn slots(&self) -> [&Slot; 3] {
        [&self.subject, &self.predicate, &self.object]
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.slots().into_iter().filter_map(Slot::var)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompareOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Var(String),
    Const(Term),
    Compare(CompareOp, Box<Expr>, Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
}

impl Expr {
    pub fn vars(&self, out: &mut Vec<String>) {
        match self {
            Expr::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Expr::Const(_) => {}
            Expr::Compare(_, a, b) | Expr::And(a, b) | Expr::Or(a, b) => {
                a.vars(out);
                b.vars(out);
            }
            Expr::Not(a) => a.vars(out),
        }
    }
}

/// A `{ ... }` group. Elements keep their textual order within each kind.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Group {
    pub triples: Vec<PatternTriple>,
    /// Each entry is a list of alternatives; a plain nested group is a
    /// union with one branch.
    pub unions: Vec<Vec<Group>>,
    pub optionals: Vec<Group>,
    pub filters: Vec<Expr>,
}

impl Group {
    /// Variables in textual order of first appearance, filters excluded.
    pub fn vars(&self, out: &mut Vec<String>) {
        for t in &self.triples {
            for v in t.vars() {
                if !out.iter().any(|o| o == v) {
                    out.push(v.to_owned());
                }
            }
        }
        for u in &self.unions {
            for g in u {
                g.vars(out);
            }
        }
        for g in &self.optionals {
            g.vars(out);
        }
    }

    pub fn triple_count(&self) -> usize {
        self.triples.len()
            + self
                .unions
                .iter()
                .flatten()
                .map(Group::triple_count)
                .sum::<usize>()
            + self
                .optionals
                .iter()
                .map(Group::triple_count)
                .sum::<usize>()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderKey {
    pub var: String,
    pub descending: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Query {
    pub prefixes: Vec<(String, String)>,
    /// `None` for `SELECT *`.
    pub projection: Option<Vec<String>>,
    pub distinct: bool,
    pub pattern: Group,
    pub order_by: Vec<OrderKey>,
    pub limit: Option<u64>,
    pub offset: Option<u64>,
}

impl Query {
    /// Projected variables: the explicit list, or every named variable of
    /// the pattern (blank nodes excluded) for `SELECT *`.
    pub fn variables(&self) -> Vec<String> {
        match &self.projection {
            Some(v) => v.clone(),
            None => {
                let mut all = Vec::new();
                self.pattern.vars(&mut all);
                all.retain(|v| !v.starts_with(BNODE_VAR));
                all
            }
        }
    }
}

/// Blank nodes in patterns become variables named with this prefix, which
/// cannot clash with user variables.
const BNODE_VAR: &str = "_:";

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Iri(String),
    Pname(String, String),
    Var(String),
    Bnode(String),
    Literal(Term),
    Word(String),
    Punct(&'static str),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Iri(s) => write!(f, "<{s}>"),
            Tok::Pname(p, l) => write!(f, "{p}:{l}"),
            Tok::Var(v) => write!(f, "?{v}"),
            Tok::Bnode(b) => write!(f, "_:{b}"),
            Tok::Literal(t) => write!(f, "{t}"),
            Tok::Word(w) => f.write_str(w),
            Tok::Punct(p) => f.write_str(p),
        }
    }
}

const PUNCT: [&str; 25] = [
    "&&", "||", "!=", "<=", ">=", "^^", "{", "}", "(", ")", "[", "]", ".", ";", ",", "*", "=", "<",
    ">", "!", "+", "-", "/", "|", "^",
];

fn syntax(position: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        position,
        message: message.into(),
    }
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | '\u{b7}')
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>> {
    let mut out = Vec::new();
    let b = src.as_bytes();
    let mut i = 0;
    while i < src.len() {
        let c = src[i..].chars().next().unwrap();
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        if c == '#' {
            while i < src.len() && b[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        if c == '<' {
            if let Some(end) = iri_end(&src[i..]) {
                let mut cur = term::Cursor::new(&src[i..i + end], 1);
                let iri = cur.iri().map_err(|e| syntax(start, e.to_string()))?;
                out.push((start, Tok::Iri(iri)));
                i += end;
                continue;
            }
        }
        if c == '?' || c == '$' {
            let name_start = i + 1;
            let mut j = name_start;
            while let Some(ch) = src[j..]
                .chars()
                .next()
                .filter(|&ch| ch.is_alphanumeric() || ch == '_')
            {
                j += ch.len_utf8();
            }
            if j == name_start {
                return Err(syntax(start, "empty variable name"));
            }
            out.push((start, Tok::Var(src[name_start..j].to_owned())));
            i = j;
            continue;
        }
        if c == '"' || c == '\'' {
            let (lexical, end) = string_literal(src, i)?;
            i = end;
            let lit = if src[i..].starts_with('@') {
                let mut j = i + 1;
                while j < src.len() && (b[j].is_ascii_alphanumeric() || b[j] == b'-') {
                    j += 1;
                }
                if j == i + 1 {
                    return Err(syntax(i, "empty language tag"));
                }
                let lang = src[i + 1..j].to_owned();
                i = j;
                Term::Literal {
                    lexical,
                    datatype: None,
                    lang: Some(lang),
                }
            } else {
                Term::Literal {
                    lexical,
                    datatype: None,
                    lang: None,
                }
            };
            out.push((start, Tok::Literal(lit)));
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && b.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            let (lit, end) = number(src, i);
            out.push((start, Tok::Literal(lit)));
            i = end;
            continue;
        }
        if src[i..].starts_with("_:") {
            let mut j = i + 2;
            while let Some(ch) = src[j..].chars().next().filter(|&ch| is_name_char(ch)) {
                j += ch.len_utf8();
            }
            while j > i + 2 && src[..j].ends_with('.') {
                j -= 1;
            }
            if j == i + 2 {
                return Err(syntax(start, "empty blank node label"));
            }
            out.push((start, Tok::Bnode(src[i + 2..j].to_owned())));
            i = j;
            continue;
        }
        if c.is_alphabetic() || c == ':' || c == '_' {
            let mut j = i;
            while let Some(ch) = src[j..].chars().next().filter(|&ch| is_name_char(ch)) {
                j += ch.len_utf8();
            }
            if src[j..].starts_with(':') {
                let prefix = src[i..j].to_owned();
                let mut k = j + 1;
                while let Some(ch) = src[k..]
                    .chars()
                    .next()
                    .filter(|&ch| is_name_char(ch) || ch == ':')
                {
                    k += ch.len_utf8();
                }
                while k > j + 1 && src[..k].ends_with('.') {
                    k -= 1;
                }
                out.push((start, Tok::Pname(prefix, src[j + 1..k].to_owned())));
                i = k;
            } else {
                while j > i && src[..j].ends_with('.') {
                    j -= 1;
                }
                out.push((start, Tok::Word(src[i..j].to_owned())));
                i = j;
            }
            continue;
        }
        match PUNCT.iter().find(|p| src[i..].starts_with(**p)) {
            Some(p) => {
                out.push((start, Tok::Punct(p)));
                i += p.len();
            }
            None => return Err(syntax(start, format!("unexpected character {c:?}"))),
        }
    }
    Ok(out)
}

/// Length of an IRI reference at the start of `s`, if it is one. A `<`
/// followed by whitespace or a disallowed character is a comparison.
fn iri_end(s: &str) -> Option<usize> {
    for (k, c) in s.char_indices().skip(1) {
        match c {
            '>' => return Some(k + 1),
            '\0'..=' ' | '<' | '"' | '{' | '}' | '|' | '^' | '`' => return None,
            _ => {}
        }
    }
    None
}

fn string_literal(src: &str, start: usize) -> Result<(String, usize)> {
    let quote = src[start..].chars().next().unwrap();
    let mut out = String::new();
    let mut chars = src[start + 1..].char_indices();
    while let Some((k, c)) = chars.next() {
        let at = start + 1 + k;
        match c {
            c if c == quote => return Ok((out, at + 1)),
            '\\' => {
                let esc = chars.next().map(|x| x.1);
                match esc {
                    Some('t') => out.push('\t'),
                    Some('n') => out.push('\n'),
                    Some('r') => out.push('\r'),
                    Some('b') => out.push('\u{8}'),
                    Some('f') => out.push('\u{c}'),
                    Some(e @ ('"' | '\'' | '\\')) => out.push(e),
                    Some(u @ ('u' | 'U')) => {
                        let n = if u == 'u' { 4 } else { 8 };
                        let hex: String = chars.by_ref().take(n).map(|x| x.1).collect();
                        let ch = u32::from_str_radix(&hex, 16)
                            .ok()
                            .filter(|_| hex.len() == n)
                            .and_then(char::from_u32)
                            .ok_or_else(|| syntax(at, "invalid unicode escape"))?;
                        out.push(ch);
                    }
                    _ => return Err(syntax(at, "invalid escape in string")),
                }
            }
            '\n' | '\r' => return Err(syntax(at, "line break inside string")),
            c => out.push(c),
        }
    }
    Err(syntax(start, "unterminated string"))
}

fn number(src: &str, start: usize) -> (Term, usize) {
    let b = src.as_bytes();
    let mut i = start;
    let digits = |i: &mut usize| {
        while *i < b.len() && b[*i].is_ascii_digit() {
            *i += 1;
        }
    };
    digits(&mut i);
    let mut kind = "integer";
    if i < b.len() && b[i] == b'.' && b.get(i + 1).is_some_and(u8::is_ascii_digit) {
        i += 1;
        digits(&mut i);
        kind = "decimal";
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        let mut j = i + 1;
        if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
            j += 1;
        }
        if b.get(j).is_some_and(u8::is_ascii_digit) {
            i = j;
            digits(&mut i);
            kind = "double";
        }
    }
    (
        Term::typed_literal(&src[start..i], format!("{}{kind}", term::XSD)),
        i,
    )
}

const UNSUPPORTED_WORDS: [&str; 20] = [
    "CONSTRUCT",
    "ASK",
    "DESCRIBE",
    "FROM",
    "GRAPH",
    "GROUP",
    "HAVING",
    "VALUES",
    "BIND",
    "MINUS",
    "SERVICE",
    "REDUCED",
    "INSERT",
    "DELETE",
    "LOAD",
    "CLEAR",
    "EXISTS",
    "NOT",
    "AS",
    "BASE",
];

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    prefixes: HashMap<String, String>,
    prefix_list: Vec<(String, String)>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.0)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.1.clone());
        self.pos += 1;
        t
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(syntax(self.offset(), msg))
    }

    fn describe(&self) -> String {
        self.peek()
            .map_or_else(|| "end of query".to_owned(), |t| format!("'{t}'"))
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(x)) if x.eq_ignore_ascii_case(w))
    }

    fn eat_word(&mut self, w: &str) -> bool {
        let hit = self.is_word(w);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Some(Tok::Punct(x)) if *x == p)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        let hit = self.is_punct(p);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn expect_punct(&mut self, p: &str) -> Result<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            self.fail(format!("expected '{p}', found {}", self.describe()))
        }
    }

    fn check_unsupported(&self) -> Result<()> {
        if let Some(Tok::Word(w)) = self.peek() {
            let upper = w.to_ascii_uppercase();
            if UNSUPPORTED_WORDS.contains(&upper.as_str()) {
                return Err(Error::Unsupported(upper));
            }
        }
        Ok(())
    }

    fn query(&mut self) -> Result<Query> {
        while self.is_word("PREFIX") {
            self.pos += 1;
            let Some(Tok::Pname(p, l)) = self.next() else {
                self.pos -= 1;
                return self.fail("expected prefix name after PREFIX");
            };
            if !l.is_empty() {
                self.pos -= 1;
                return self.fail("prefix name must end with ':'");
            }
            let Some(Tok::Iri(iri)) = self.next() else {
                self.pos -= 1;
                return self.fail("expected IRI in PREFIX declaration");
            };
            self.prefixes.insert(p.clone(), iri.clone());
            self.prefix_list.push((p, iri));
        }
        self.check_unsupported()?;
        if !self.eat_word("SELECT") {
            return self.fail(format!("expected SELECT, found {}", self.describe()));
        }
        let distinct = self.eat_word("DISTINCT");
        self.check_unsupported()?;
        let projection = if self.eat_punct("*") {
            None
        } else {
            let mut vars = Vec::new();
            while let Some(Tok::Var(v)) = self.peek() {
                if !vars.contains(v) {
                    vars.push(v.clone());
                }
                self.pos += 1;
            }
            if self.is_punct("(") {
                return Err(Error::Unsupported("projection expressions".into()));
            }
            if vars.is_empty() {
                return self.fail(format!(
                    "expected variables or '*' after SELECT, found {}",
                    self.describe()
                ));
            }
            Some(vars)
        };
        self.check_unsupported()?;
        self.eat_word("WHERE");
        let pattern = self.group()?;
        let mut order_by = Vec::new();
        if self.is_word("GROUP") || self.is_word("HAVING") {
            self.check_unsupported()?;
        }
        if self.eat_word("ORDER") {
            if !self.eat_word("BY") {
                return self.fail("expected BY after ORDER");
            }
            loop {
                if let Some(Tok::Var(v)) = self.peek() {
                    order_by.push(OrderKey {
                        var: v.clone(),
                        descending: false,
                    });
                    self.pos += 1;
                } else if self.is_word("ASC") || self.is_word("DESC") {
                    let descending = self.is_word("DESC");
                    self.pos += 1;
                    self.expect_punct("(")?;
                    let Some(Tok::Var(v)) = self.next() else {
                        self.pos -= 1;
                        return Err(Error::Unsupported(
                            "ORDER BY expressions other than variables".into(),
                        ));
                    };
                    self.expect_punct(")")?;
                    order_by.push(OrderKey { var: v, descending });
                } else if self.is_punct("(")
                    || matches!(self.peek(), Some(Tok::Word(_)))
                        && !self.is_word("LIMIT")
                        && !self.is_word("OFFSET")
                {
                    return Err(Error::Unsupported(
                        "ORDER BY expressions other than variables".into(),
                    ));
                } else {
                    break;
                }
            }
            if order_by.is_empty() {
                return self.fail("expected ORDER BY keys");
            }
        }
        let (mut limit, mut offset) = (None, None);
        loop {
            if self.eat_word("LIMIT") {
                if limit.is_some() {
                    return self.fail("duplicate LIMIT");
                }
                limit = Some(self.integer()?);
            } else if self.eat_word("OFFSET") {
                if offset.is_some() {
                    return self.fail("duplicate OFFSET");
                }
                offset = Some(self.integer()?);
            } else {
                break;
            }
        }
        self.check_unsupported()?;
        if self.peek().is_some() {
            return self.fail(format!("unexpected {} after query", self.describe()));
        }
        let query = Query {
            prefixes: std::mem::take(&mut self.prefix_list),
            projection,
            distinct,
            pattern,
            order_by,
            limit,
            offset,
        };
        let mut in_pattern = Vec::new();
        query.pattern.vars(&mut in_pattern);
        for v in query
            .projection
            .iter()
            .flatten()
            .chain(query.order_by.iter().map(|k| &k.var))
        {
            if !in_pattern.contains(v) {
                return Err(Error::Query(format!(
                    "variable ?{v} does not occur in the pattern"
                )));
            }
        }
        Ok(query)
    }

    fn integer(&mut self) -> Result<u64> {
        match self.next() {
            Some(Tok::Literal(Term::Literal {
                lexical,
                datatype: Some(dt),
                ..
            })) if dt.ends_with("#integer") => match lexical.parse() {
                Ok(v) => Ok(v),
                Err(_) => {
                    self.pos -= 1;
                    Err(Error::Query(format!("integer {lexical} out of range")))
                }
            },
            _ => {
                self.pos -= 1;
                self.fail("expected a non-negative integer")
            }
        }
    }

    fn group(&mut self) -> Result<Group> {
        self.expect_punct("{")?;
        let mut g = Group::default();
        loop {
            self.check_unsupported()?;
            if self.eat_punct("}") {
                return Ok(g);
            }
            if self.is_punct("{") {
                let mut branches = vec![self.group()?];
                while self.eat_word("UNION") {
                    branches.push(self.group()?);
                }
                g.unions.push(branches);
            } else if self.eat_word("OPTIONAL") {
                g.optionals.push(self.group()?);
            } else if self.eat_word("FILTER") {
                if !self.is_punct("(") {
                    return Err(Error::Unsupported(format!(
                        "FILTER {}",
                        self.describe().trim_matches('\'')
                    )));
                }
                g.filters.push(self.primary()?);
            } else if self.is_word("SELECT") {
                return Err(Error::Unsupported("subqueries".into()));
            } else if self.is_word("UNION") {
                return self.fail("UNION must follow a group");
            } else if self.peek().is_none() {
                return self.fail("unterminated group, expected '}'");
            } else {
                self.triples_same_subject(&mut g.triples)?;
                self.check_unsupported()?;
                if !self.eat_punct(".")
                    && !self.is_punct("}")
                    && !self.is_punct("{")
                    && !self.is_word("OPTIONAL")
                    && !self.is_word("FILTER")
                {
                    return self.fail(format!("expected '.' or '}}', found {}", self.describe()));
                }
                continue;
            }
            self.eat_punct(".");
        }
    }

    fn triples_same_subject(&mut self, out: &mut Vec<PatternTriple>) -> Result<()> {
        let subject = self.slot(false)?;
        loop {
            let predicate = if self.eat_word("a") {
                Slot::Term(Term::iri(term::RDF_TYPE))
            } else {
                self.slot(true)?
            };
            if ["/", "|", "^", "*", "+"].iter().any(|p| self.is_punct(p)) || self.is_punct("?") {
                return Err(Error::Unsupported("property paths".into()));
            }
            loop {
                let object = self.slot(false)?;
                out.push(PatternTriple {
                    subject: subject.clone(),
                    predicate: predicate.clone(),
                    object,
                });
                if !self.eat_punct(",") {
                    break;
                }
            }
            if !self.eat_punct(";") {
                return Ok(());
            }
            while self.eat_punct(";") {}
            if self.is_punct(".") || self.is_punct("}") {
                return Ok(());
            }
        }
    }

    fn slot(&mut self, predicate: bool) -> Result<Slot> {
        let at = self.offset();
        let what = if predicate { "predicate" } else { "term" };
        if self.is_punct("[") || self.is_punct("(") {
            return Err(Error::Unsupported(
                "blank node property lists and collections".into(),
            ));
        }
        if self.is_punct("^") {
            return Err(Error::Unsupported("property paths".into()));
        }
        match self.next() {
            Some(Tok::Var(v)) => Ok(Slot::Var(v)),
            Some(Tok::Bnode(b)) if !predicate => Ok(Slot::Var(format!("{BNODE_VAR}{b}"))),
            Some(Tok::Iri(i)) => Ok(Slot::Term(Term::Iri(i))),
            Some(Tok::Pname(p, l)) => Ok(Slot::Term(Term::Iri(self.expand(at, &p, &l)?))),
            Some(Tok::Literal(_)) if predicate => {
                Err(syntax(at, "a literal cannot be a predicate"))
            }
            Some(Tok::Literal(lit)) => Ok(Slot::Term(self.literal_suffix(lit)?)),
            Some(Tok::Word(w)) if !predicate && (w == "true" || w == "false") => Ok(Slot::Term(
                Term::typed_literal(w, format!("{}boolean", term::XSD)),
            )),
            Some(Tok::Punct("-" | "+")) if !predicate => match self.next() {
                Some(Tok::Literal(Term::Literal {
                    lexical,
                    datatype: Some(dt),
                    ..
                })) if dt.starts_with(term::XSD) => {
                    let sign = if self.toks[self.pos - 2].1 == Tok::Punct("-") {
                        "-"
                    } else {
                        "+"
                    };
                    Ok(Slot::Term(Term::typed_literal(
                        format!("{sign}{lexical}"),
                        dt,
                    )))
                }
                _ => Err(syntax(at, "expected a number after sign")),
            },
            _ => {
                self.pos -= 1;
                self.fail(format!("expected {what}, found {}", self.describe()))
            }
        }
    }

    fn literal_suffix(&mut self, lit: Term) -> Result<Term> {
        match lit {
            Term::Literal {
                lexical,
                datatype: None,
                lang: None,
            } if self.eat_punct("^^") => {
                let at = self.offset();
                let dt = match self.next() {
                    Some(Tok::Iri(i)) => i,
                    Some(Tok::Pname(p, l)) => self.expand(at, &p, &l)?,
                    _ => return Err(syntax(at, "expected datatype IRI after '^^'")),
                };
                Ok(Term::Literal {
                    lexical,
                    datatype: Some(dt),
                    lang: None,
                })
            }
            other => Ok(other),
        }
    }

    fn expand(&self, at: usize, prefix: &str, local: &str) -> Result<String> {
        match self.prefixes.get(prefix) {
            Some(ns) => Ok(format!("{ns}{local}")),
            None => Err(syntax(at, format!("undeclared prefix '{prefix}:'"))),
        }
    }

    // Filter expressions, lowest precedence first.

    fn or_expr(&mut self) -> Result<Expr> {
        let mut e = self.and_expr()?;
        while self.eat_punct("||") {
            e = Expr::Or(Box::new(e), Box::new(self.and_expr()?));
        }
        Ok(e)
    }

    fn and_expr(&mut self) -> Result<Expr> {
        let mut e = self.relational()?;
        while self.eat_punct("&&") {
            e = Expr::And(Box::new(e), Box::new(self.relational()?));
        }
        Ok(e)
    }

    fn relational(&mut self) -> Result<Expr> {
        let lhs = self.unary()?;
        let op = match self.peek() {
            Some(Tok::Punct("=")) => CompareOp::Eq,
            Some(Tok::Punct("!=")) => CompareOp::Ne,
            Some(Tok::Punct("<")) => CompareOp::Lt,
            Some(Tok::Punct("<=")) => CompareOp::Le,
            Some(Tok::Punct(">")) => CompareOp::Gt,
            Some(Tok::Punct(">=")) => CompareOp::Ge,
            Some(Tok::Punct("+" | "-" | "*" | "/")) => {
                return Err(Error::Unsupported("arithmetic in FILTER".into()))
            }
            Some(Tok::Word(w)) if w.eq_ignore_ascii_case("IN") || w.eq_ignore_ascii_case("NOT") => {
                return Err(Error::Unsupported("IN / NOT IN".into()))
            }
            _ => return Ok(lhs),
        };
        self.pos += 1;
        let rhs = self.unary()?;
        Ok(Expr::Compare(op, Box::new(lhs), Box::new(rhs)))
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat_punct("!") {
            return Ok(Expr::Not(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr> {
        let at = self.offset();
        if self.eat_punct("(") {
            let e = self.or_expr()?;
            self.expect_punct(")")?;
            return Ok(e);
        }
        match self.peek() {
            Some(Tok::Word(w)) if w != "true" && w != "false" => {
                let name = w.clone();
                if matches!(self.toks.get(self.pos + 1), Some((_, Tok::Punct("(")))) {
                    return Err(Error::Unsupported(format!(
                        "function {}",
                        name.to_ascii_uppercase()
                    )));
                }
                self.fail(format!("unexpected '{name}' in expression"))
            }
            Some(Tok::Pname(..) | Tok::Iri(_))
                if matches!(self.toks.get(self.pos + 1), Some((_, Tok::Punct("(")))) =>
            {
                Err(Error::Unsupported("function calls".into()))
            }
            Some(
                Tok::Var(_)
                | Tok::Iri(_)
                | Tok::Pname(..)
                | Tok::Literal(_)
                | Tok::Word(_)
                | Tok::Punct("-" | "+"),
            ) => match self.slot(false)? {
                Slot::Var(v) => Ok(Expr::Var(v)),
                Slot::Term(t) => Ok(Expr::Const(t)),
            },
            _ => Err(syntax(
                at,
                format!("expected expression, found {}", self.describe()),
            )),
        }
    }
}

/// Parses query text.
pub fn parse_query(text: &str) -> Result<Query> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
        prefixes: HashMap::new(),
        prefix_list: Vec::new(),
    };
    p.query()
}
