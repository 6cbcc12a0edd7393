//! Query evaluation over a [`Database`].
//!
//! A parsed query is checked against the dictionaries first: a pattern
//! naming an unknown or never-used element can match nothing, so its group
//! is dropped (a UNION branch or OPTIONAL alone, the whole query when the
//! pattern is mandatory) before the store is touched. The surviving
//! patterns are encoded, ordered greedily by estimated cardinality and
//! evaluated as nested index probes over the store.
//!
//! Under RDFS entailment a concept or property constant is turned into its
//! prefix code, so one probe covers every sub-element, and variables bound
//! to stored classes or properties are extended with their ancestors.
//! `owl:Thing` types every resource (any non-literal term of the data).

use std::cell::{Cell, OnceCell};
use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::str::FromStr;

use crate::code::PrefixCode;
use crate::database::Database;
use crate::error::{Error, Result};
use crate::ontology::PropertyClass;
use crate::sparql::{self, CompareOp, Expr, Group, PatternTriple, Query, Slot};
use crate::store::{EncodedTriple, Object, ObjectPattern, TriplePattern};
use crate::term::Term;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Entailment {
    /// Match stored triples only.
    Simple,
    #[default]
    Rdfs,
}

impl FromStr for Entailment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simple" => Ok(Entailment::Simple),
            "rdfs" => Ok(Entailment::Rdfs),
            _ => Err(Error::Query(format!("unknown entailment mode '{s}'"))),
        }
    }
}

/// How the patterns of a group are ordered.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PlanMode {
    #[default]
    Greedy,
    /// Textual order; used to check that results do not depend on the plan.
    AsWritten,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QueryOptions {
    pub entailment: Entailment,
    pub plan: PlanMode,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ExecStats {
    /// Store accesses (one per resolved pattern instance).
    pub probes: u64,
    /// Stored triples read by those accesses.
    pub matches: u64,
    /// Solutions before modifiers.
    pub solutions: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QueryResult {
    pub variables: Vec<String>,
    /// One entry per solution; `None` marks an unbound variable.
    pub rows: Vec<Vec<Option<Term>>>,
    /// The dictionaries ruled the query out before execution.
    pub unsatisfiable: bool,
    pub stats: ExecStats,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConstantKind {
    Instance,
    Concept,
    Property,
}

/// One constant of the query as seen by the dictionaries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstantInfo {
    pub term: Term,
    pub kind: ConstantKind,
    /// Instance id, or sentinel of the stored (self) code, or of the
    /// element code when the element has no self entry.
    pub id: u64,
    pub direct: u64,
    /// Occurrences including sub-elements; equals `direct` for instances.
    pub total: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemanticCheck {
    pub satisfiable: bool,
    pub constants: Vec<ConstantInfo>,
}

/// Looks up every constant of the query. Unsatisfiability is decided the
/// same way `execute` decides it.
pub fn semantic_check(db: &Database, query: &Query, entailment: Entailment) -> SemanticCheck {
    let ctx = Context::new(db, query, entailment);
    let mut constants = Vec::new();
    let mut seen = HashSet::new();
    collect_constants(&query.pattern, &mut |t, role| {
        let c = ctx.constant(t);
        if role != Role::Predicate {
            if let Some(id) = c.instance {
                let occ = db.stats.subject_occurrences(id) + db.stats.object_occurrences(id);
                if seen.insert((t.clone(), ConstantKind::Instance)) {
                    constants.push(ConstantInfo {
                        term: t.clone(),
                        kind: ConstantKind::Instance,
                        id,
                        direct: occ,
                        total: occ,
                    });
                }
            }
        }
        if role == Role::Object {
            if let Some(i) = c.concept {
                let e = db.ontology.concepts.element(i);
                let id = e.self_code().unwrap_or(e.code).to_sentinel();
                if seen.insert((t.clone(), ConstantKind::Concept)) {
                    constants.push(ConstantInfo {
                        term: t.clone(),
                        kind: ConstantKind::Concept,
                        id,
                        direct: e.direct,
                        total: e.total,
                    });
                }
            }
        }
        if role == Role::Predicate {
            if let Some(i) = c.property {
                let e = db.ontology.properties.element(i);
                let id = e.self_code().unwrap_or(e.code).to_sentinel();
                if seen.insert((t.clone(), ConstantKind::Property)) {
                    constants.push(ConstantInfo {
                        term: t.clone(),
                        kind: ConstantKind::Property,
                        id,
                        direct: e.direct,
                        total: e.total,
                    });
                }
            }
        }
    });
    SemanticCheck {
        satisfiable: ctx.compile_group(&query.pattern).is_some(),
        constants,
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Role {
    Subject,
    Predicate,
    Object,
}

fn collect_constants(g: &Group, f: &mut impl FnMut(&Term, Role)) {
    for t in &g.triples {
        for (slot, role) in [
            (&t.subject, Role::Subject),
            (&t.predicate, Role::Predicate),
            (&t.object, Role::Object),
        ] {
            if let Slot::Term(term) = slot {
                f(term, role);
            }
        }
    }
    for g in g.unions.iter().flatten().chain(&g.optionals) {
        collect_constants(g, f);
    }
}

/// Parses and runs `text`.
pub fn run(db: &Database, text: &str, options: QueryOptions) -> Result<QueryResult> {
    execute(db, &sparql::parse_query(text)?, options)
}

pub fn execute(db: &Database, query: &Query, options: QueryOptions) -> Result<QueryResult> {
    let ctx = Context::new(db, query, options.entailment);
    let variables = query.variables();
    let Some(root) = ctx.compile_group(&query.pattern) else {
        return Ok(QueryResult {
            variables,
            rows: Vec::new(),
            unsatisfiable: true,
            stats: ExecStats::default(),
        });
    };
    let exec = Executor {
        ctx: &ctx,
        mode: options.plan,
        probes: Cell::new(0),
        matches: Cell::new(0),
    };
    let rows = exec.eval_group(&root, vec![vec![None; ctx.vars.len()]])?;
    let solutions = rows.len() as u64;
    let rows = ctx.finish(query, &variables, rows)?;
    let stats = ExecStats {
        probes: exec.probes.get(),
        matches: exec.matches.get(),
        solutions,
    };
    Ok(QueryResult {
        variables,
        rows,
        unsatisfiable: false,
        stats,
    })
}

/// Order in which the mandatory patterns of the outermost group would be
/// evaluated (indices into `query.pattern.triples`), or `None` when the
/// query is unsatisfiable.
pub fn plan(db: &Database, query: &Query, options: QueryOptions) -> Option<Vec<usize>> {
    let ctx = Context::new(db, query, options.entailment);
    let root = ctx.compile_group(&query.pattern)?;
    let order = ctx.order(&root.triples, &HashSet::new(), options.plan);
    Some(order.into_iter().map(|i| root.triples[i].index).collect())
}

impl Database {
    /// Parses and runs a query with the given options.
    pub fn query(&self, text: &str, options: QueryOptions) -> Result<QueryResult> {
        run(self, text, options)
    }
}

/// A bound value. Classes and properties keep their element index so that
/// entailment can walk the hierarchy without going through the dictionary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Value {
    Instance(u64),
    Concept(usize),
    Property(usize),
}

type Row = Vec<Option<Value>>;

/// A constant term as found in each dictionary.
#[derive(Clone, Debug)]
struct Constant {
    instance: Option<u64>,
    concept: Option<usize>,
    property: Option<usize>,
}

#[derive(Clone, Debug)]
enum CSlot {
    Var(usize),
    Const(Constant),
}

#[derive(Clone, Debug)]
struct CTriple {
    /// Position in the source group, for `AsWritten` plans.
    index: usize,
    slots: [CSlot; 3],
    estimate: u64,
}

impl CTriple {
    fn vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.slots.iter().filter_map(|s| match s {
            CSlot::Var(v) => Some(*v),
            CSlot::Const(_) => None,
        })
    }
}

#[derive(Clone, Debug)]
enum CExpr {
    Var(usize),
    Const(Term),
    Compare(CompareOp, Box<CExpr>, Box<CExpr>),
    And(Box<CExpr>, Box<CExpr>),
    Or(Box<CExpr>, Box<CExpr>),
    Not(Box<CExpr>),
}

impl CExpr {
    fn vars(&self, out: &mut Vec<usize>) {
        match self {
            CExpr::Var(v) => out.push(*v),
            CExpr::Const(_) => {}
            CExpr::Compare(_, a, b) | CExpr::And(a, b) | CExpr::Or(a, b) => {
                a.vars(out);
                b.vars(out);
            }
            CExpr::Not(a) => a.vars(out),
        }
    }
}

#[derive(Clone, Debug, Default)]
struct CGroup {
    triples: Vec<CTriple>,
    unions: Vec<Vec<CGroup>>,
    optionals: Vec<CGroup>,
    filters: Vec<CExpr>,
}

struct Context<'a> {
    db: &'a Database,
    entailment: Entailment,
    vars: Vec<String>,
    /// Non-literal instance ids, computed on first use.
    resources: OnceCell<Vec<u64>>,
}

impl<'a> Context<'a> {
    fn new(db: &'a Database, query: &Query, entailment: Entailment) -> Self {
        let mut vars = Vec::new();
        query.pattern.vars(&mut vars);
        Context {
            db,
            entailment,
            vars,
            resources: OnceCell::new(),
        }
    }

    fn rdfs(&self) -> bool {
        self.entailment == Entailment::Rdfs
    }

    fn var(&self, name: &str) -> usize {
        self.vars
            .iter()
            .position(|v| v == name)
            .expect("variable collected from the pattern")
    }

    fn constant(&self, t: &Term) -> Constant {
        let iri = t.as_iri();
        Constant {
            instance: self.db.dictionary.encode(t),
            concept: iri.and_then(|i| self.db.ontology.concepts.index_of(i)),
            property: iri.and_then(|i| self.db.ontology.properties.index_of(i)),
        }
    }

    fn occurrences(&self, direct: u64, total: u64) -> u64 {
        if self.rdfs() {
            total
        } else {
            direct
        }
    }

    /// Occurrences of a concept as a type, or `None` if it cannot match.
    fn concept_count(&self, c: usize) -> Option<u64> {
        if c == 0 && self.rdfs() {
            return Some(self.db.stats.n_subjects + self.db.stats.n_objects);
        }
        let e = self.db.ontology.concepts.element(c);
        Some(self.occurrences(e.direct, e.total)).filter(|&n| n > 0)
    }

    fn property_count(&self, p: usize) -> Option<u64> {
        if p == 0 && self.rdfs() {
            // rdf:type always holds through owl:Thing.
            return Some(self.db.stats.n_triples.max(1));
        }
        let e = self.db.ontology.properties.element(p);
        Some(self.occurrences(e.direct, e.total)).filter(|&n| n > 0)
    }

    /// Compiles a group, or `None` when one of its mandatory patterns can
    /// never match.
    fn compile_group(&self, g: &Group) -> Option<CGroup> {
        let mut out = CGroup::default();
        for (index, t) in g.triples.iter().enumerate() {
            out.triples.push(self.compile_triple(index, t)?);
        }
        for branches in &g.unions {
            let live: Vec<CGroup> = branches
                .iter()
                .filter_map(|b| self.compile_group(b))
                .collect();
            if live.is_empty() {
                return None;
            }
            out.unions.push(live);
        }
        out.optionals = g
            .optionals
            .iter()
            .filter_map(|o| self.compile_group(o))
            .collect();
        out.filters = g.filters.iter().map(|f| self.compile_expr(f)).collect();
        Some(out)
    }

    fn compile_expr(&self, e: &Expr) -> CExpr {
        match e {
            Expr::Var(v) => match self.vars.iter().position(|x| x == v) {
                Some(i) => CExpr::Var(i),
                // Never bound: every comparison with it is an error.
                None => CExpr::Var(usize::MAX),
            },
            Expr::Const(t) => CExpr::Const(t.clone()),
            Expr::Compare(op, a, b) => CExpr::Compare(
                *op,
                Box::new(self.compile_expr(a)),
                Box::new(self.compile_expr(b)),
            ),
            Expr::And(a, b) => CExpr::And(
                Box::new(self.compile_expr(a)),
                Box::new(self.compile_expr(b)),
            ),
            Expr::Or(a, b) => CExpr::Or(
                Box::new(self.compile_expr(a)),
                Box::new(self.compile_expr(b)),
            ),
            Expr::Not(a) => CExpr::Not(Box::new(self.compile_expr(a))),
        }
    }

    fn compile_triple(&self, index: usize, t: &PatternTriple) -> Option<CTriple> {
        let stats = &self.db.stats;
        let mut estimate = stats.n_triples;
        let slot = |s: &Slot| match s {
            Slot::Var(v) => CSlot::Var(self.var(v)),
            Slot::Term(t) => CSlot::Const(self.constant(t)),
        };
        let slots = [slot(&t.subject), slot(&t.predicate), slot(&t.object)];
        if let CSlot::Const(c) = &slots[0] {
            let id = c.instance?;
            let occ = stats.subject_occurrences(id);
            // Under rdfs a resource seen only as an object is still an owl:Thing.
            let typed = |s: &CSlot| {
                matches!(s, CSlot::Var(_)) || matches!(s, CSlot::Const(k) if k.property == Some(0))
            };
            let thing = |s: &CSlot| {
                matches!(s, CSlot::Var(_)) || matches!(s, CSlot::Const(k) if k.concept == Some(0))
            };
            if occ == 0
                && !(self.rdfs() && self.is_resource(id) && typed(&slots[1]) && thing(&slots[2]))
            {
                return None;
            }
            estimate = estimate.min(occ.max(1));
        }
        let pred = match &slots[1] {
            CSlot::Const(c) => {
                let p = c.property?;
                estimate = estimate.min(self.property_count(p)?);
                Some(p)
            }
            CSlot::Var(_) => None,
        };
        if let CSlot::Const(c) = &slots[2] {
            let as_instance = || {
                c.instance
                    .map(|id| stats.object_occurrences(id))
                    .filter(|&n| n > 0)
            };
            let as_concept = || c.concept.and_then(|i| self.concept_count(i));
            let n = match pred {
                Some(0) => as_concept()?,
                Some(_) => as_instance()?,
                None => match (as_instance(), as_concept()) {
                    (None, None) => return None,
                    (a, b) => a.unwrap_or(0) + b.unwrap_or(0),
                },
            };
            estimate = estimate.min(n);
        }
        Some(CTriple {
            index,
            slots,
            estimate,
        })
    }

    /// Greedy order: among patterns sharing a variable with what is already
    /// bound (any pattern when none does), the smallest estimate first;
    /// ties go to a bound subject, then a bound object, then a bound
    /// predicate.
    fn order(&self, triples: &[CTriple], bound: &HashSet<usize>, mode: PlanMode) -> Vec<usize> {
        if mode == PlanMode::AsWritten {
            return (0..triples.len()).collect();
        }
        let stats = &self.db.stats;
        let per = |n: u64| stats.n_triples.div_ceil(n.max(1));
        let mut bound = bound.clone();
        let mut left: Vec<usize> = (0..triples.len()).collect();
        let mut out = Vec::with_capacity(left.len());
        while !left.is_empty() {
            let connected: Vec<usize> = left
                .iter()
                .copied()
                .filter(|&i| triples[i].vars().any(|v| bound.contains(&v)))
                .collect();
            let pool = if connected.is_empty() {
                &left
            } else {
                &connected
            };
            let key = |i: usize| {
                let t = &triples[i];
                let is_bound = |s: &CSlot| match s {
                    CSlot::Const(_) => true,
                    CSlot::Var(v) => bound.contains(v),
                };
                let mut est = t.estimate;
                if matches!(t.slots[0], CSlot::Var(v) if bound.contains(&v)) {
                    est = est.min(per(stats.n_subjects));
                }
                if matches!(t.slots[2], CSlot::Var(v) if bound.contains(&v)) {
                    est = est.min(per(stats.n_objects));
                }
                if matches!(t.slots[1], CSlot::Var(v) if bound.contains(&v)) {
                    est = est.min(per(stats.n_predicates));
                }
                let tie = [0, 2, 1]
                    .into_iter()
                    .find(|&k| is_bound(&t.slots[k]))
                    .map_or(3, |k| [0, 2, 1][k]);
                (est, tie, t.index)
            };
            let best = *pool
                .iter()
                .min_by_key(|&&i| key(i))
                .expect("non-empty pool");
            left.retain(|&i| i != best);
            bound.extend(triples[best].vars());
            out.push(best);
        }
        out
    }

    fn resources(&self) -> &[u64] {
        self.resources.get_or_init(|| {
            self.db
                .dictionary
                .iter()
                .filter(|(_, s)| !s.starts_with('"'))
                .map(|(id, _)| id)
                .collect()
        })
    }

    fn is_resource(&self, id: u64) -> bool {
        self.resources().binary_search(&id).is_ok()
    }

    fn decode(&self, v: Value) -> Result<Term> {
        Ok(match v {
            Value::Instance(id) => self
                .db
                .dictionary
                .decode(id)
                .map_err(|e| Error::Internal(e.to_string()))?,
            Value::Concept(i) => Term::iri(&self.db.ontology.concepts.element(i).iri),
            Value::Property(i) => Term::iri(&self.db.ontology.properties.element(i).iri),
        })
    }

    fn iri_of(&self, v: Value) -> Option<String> {
        match v {
            Value::Instance(id) => self
                .db
                .dictionary
                .decode(id)
                .ok()?
                .as_iri()
                .map(str::to_owned),
            Value::Concept(i) => Some(self.db.ontology.concepts.element(i).iri.clone()),
            Value::Property(i) => Some(self.db.ontology.properties.element(i).iri.clone()),
        }
    }

    fn same_term(&self, a: Value, b: Value) -> bool {
        match (a, b) {
            (Value::Instance(x), Value::Instance(y)) => x == y,
            (Value::Concept(x), Value::Concept(y)) | (Value::Property(x), Value::Property(y)) => {
                x == y
            }
            _ => self.iri_of(a).is_some_and(|i| Some(i) == self.iri_of(b)),
        }
    }

    fn as_instance(&self, b: &Bound<'_>) -> Option<u64> {
        match b {
            Bound::Const(c) => c.instance,
            Bound::Value(Value::Instance(id)) => Some(*id),
            Bound::Value(v) => self.db.dictionary.encode(&Term::iri(self.iri_of(*v)?)),
        }
    }

    fn as_concept(&self, b: &Bound<'_>) -> Option<usize> {
        match b {
            Bound::Const(c) => c.concept,
            Bound::Value(Value::Concept(i)) => Some(*i),
            Bound::Value(v) => self.db.ontology.concepts.index_of(&self.iri_of(*v)?),
        }
    }

    fn as_property(&self, b: &Bound<'_>) -> Option<usize> {
        match b {
            Bound::Const(c) => c.property,
            Bound::Value(Value::Property(i)) => Some(*i),
            Bound::Value(v) => self.db.ontology.properties.index_of(&self.iri_of(*v)?),
        }
    }

    /// Codes to probe for a bound concept: its prefixes under RDFS, its
    /// stored code otherwise.
    fn concept_codes(&self, c: usize) -> Vec<PrefixCode> {
        let h = &self.db.ontology.concepts;
        if self.rdfs() {
            h.prefixes(c)
        } else {
            h.element(c).self_code().into_iter().collect()
        }
    }

    fn property_codes(&self, p: usize) -> Vec<PrefixCode> {
        let h = &self.db.ontology.properties;
        if self.rdfs() {
            h.prefixes(p)
        } else {
            h.element(p).self_code().into_iter().collect()
        }
    }

    /// Values a stored class stands for under the entailment mode.
    fn concept_values(&self, stored: &PrefixCode) -> Result<Vec<Value>> {
        let h = &self.db.ontology.concepts;
        let i = h
            .index_of_stored(stored.to_sentinel())
            .ok_or_else(|| Error::Internal(format!("no concept stored under code {stored}")))?;
        let mut out = vec![Value::Concept(i)];
        if self.rdfs() {
            out.extend(h.ancestors(i).iter().map(|&a| Value::Concept(a)));
        }
        Ok(out)
    }

    fn property_values(&self, stored: &PrefixCode) -> Result<Vec<Value>> {
        let h = &self.db.ontology.properties;
        let i = h
            .index_of_stored(stored.to_sentinel())
            .ok_or_else(|| Error::Internal(format!("no property stored under code {stored}")))?;
        let mut out = vec![Value::Property(i)];
        if self.rdfs() {
            out.extend(h.ancestors(i).iter().map(|&a| Value::Property(a)));
        }
        Ok(out)
    }

    fn eval_expr(&self, e: &CExpr, row: &Row) -> Option<bool> {
        match e {
            CExpr::And(a, b) => match (self.eval_expr(a, row), self.eval_expr(b, row)) {
                (Some(false), _) | (_, Some(false)) => Some(false),
                (Some(true), Some(true)) => Some(true),
                _ => None,
            },
            CExpr::Or(a, b) => match (self.eval_expr(a, row), self.eval_expr(b, row)) {
                (Some(true), _) | (_, Some(true)) => Some(true),
                (Some(false), Some(false)) => Some(false),
                _ => None,
            },
            CExpr::Not(a) => self.eval_expr(a, row).map(|b| !b),
            CExpr::Compare(op, a, b) => {
                let (x, y) = (self.operand(a, row)?, self.operand(b, row)?);
                let ord = match (x.numeric_value(), y.numeric_value()) {
                    (Some(p), Some(q)) => p.partial_cmp(&q)?,
                    _ if matches!(op, CompareOp::Eq | CompareOp::Ne) => {
                        return Some((x == y) == (*op == CompareOp::Eq));
                    }
                    _ => x.lexical().cmp(y.lexical()),
                };
                Some(match op {
                    CompareOp::Eq => ord == Ordering::Equal,
                    CompareOp::Ne => ord != Ordering::Equal,
                    CompareOp::Lt => ord == Ordering::Less,
                    CompareOp::Le => ord != Ordering::Greater,
                    CompareOp::Gt => ord == Ordering::Greater,
                    CompareOp::Ge => ord != Ordering::Less,
                })
            }
            // A bare term is not a boolean in this subset.
            CExpr::Var(_) | CExpr::Const(_) => None,
        }
    }

    fn operand(&self, e: &CExpr, row: &Row) -> Option<Term> {
        match e {
            CExpr::Var(v) => self.decode((*row.get(*v)?)?).ok(),
            CExpr::Const(t) => Some(t.clone()),
            _ => None,
        }
    }

    /// Applies ORDER BY, projection, DISTINCT, OFFSET and LIMIT.
    fn finish(
        &self,
        query: &Query,
        variables: &[String],
        rows: Vec<Row>,
    ) -> Result<Vec<Vec<Option<Term>>>> {
        let mut cache: HashMap<Value, Term> = HashMap::new();
        let mut decode = |v: Option<Value>| -> Result<Option<Term>> {
            match v {
                None => Ok(None),
                Some(v) => {
                    if let Some(t) = cache.get(&v) {
                        return Ok(Some(t.clone()));
                    }
                    let t = self.decode(v)?;
                    cache.insert(v, t.clone());
                    Ok(Some(t))
                }
            }
        };
        let keys: Vec<(usize, bool)> = query
            .order_by
            .iter()
            .map(|k| (self.var(&k.var), k.descending))
            .collect();
        let proj: Vec<usize> = variables.iter().map(|v| self.var(v)).collect();
        let mut decoded = Vec::with_capacity(rows.len());
        for row in &rows {
            let sort: Vec<Option<Term>> = keys
                .iter()
                .map(|&(v, _)| decode(row[v]))
                .collect::<Result<_>>()?;
            let out: Vec<Option<Term>> = proj
                .iter()
                .map(|&v| decode(row[v]))
                .collect::<Result<_>>()?;
            decoded.push((sort, out));
        }
        if !keys.is_empty() {
            decoded.sort_by(|a, b| {
                for (k, &(_, desc)) in keys.iter().enumerate() {
                    let o = compare_terms(a.0[k].as_ref(), b.0[k].as_ref());
                    let o = if desc { o.reverse() } else { o };
                    if o != Ordering::Equal {
                        return o;
                    }
                }
                Ordering::Equal
            });
        }
        let mut out: Vec<Vec<Option<Term>>> = decoded.into_iter().map(|(_, r)| r).collect();
        if query.distinct {
            let mut seen = HashSet::new();
            out.retain(|r| seen.insert(r.clone()));
        }
        let offset = usize::try_from(query.offset.unwrap_or(0))
            .map_err(|_| Error::Query("OFFSET too large".into()))?;
        let limit = match query.limit {
            None => usize::MAX,
            Some(l) => usize::try_from(l).map_err(|_| Error::Query("LIMIT too large".into()))?,
        };
        Ok(out.into_iter().skip(offset).take(limit).collect())
    }
}

/// Ordering used by ORDER BY: unbound first, numbers numerically, anything
/// else by code point of the lexical form, then of the full term.
pub fn compare_terms(a: Option<&Term>, b: Option<&Term>) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, _) => Ordering::Less,
        (_, None) => Ordering::Greater,
        (Some(x), Some(y)) => {
            if let (Some(p), Some(q)) = (x.numeric_value(), y.numeric_value()) {
                if let Some(o) = p.partial_cmp(&q).filter(|o| o.is_ne()) {
                    return o;
                }
            }
            x.lexical()
                .cmp(y.lexical())
                .then_with(|| x.to_string().cmp(&y.to_string()))
        }
    }
}

enum Bound<'b> {
    Const(&'b Constant),
    Value(Value),
}

/// One store access derived from a pattern and a row.
enum Probe {
    Store(TriplePattern),
    /// `(s, rdf:type, owl:Thing)` for every resource, or for `s`.
    Things(Option<u64>),
}

struct Executor<'c, 'a> {
    ctx: &'c Context<'a>,
    mode: PlanMode,
    probes: Cell<u64>,
    matches: Cell<u64>,
}

impl Executor<'_, '_> {
    fn eval_group(&self, g: &CGroup, mut rows: Vec<Row>) -> Result<Vec<Row>> {
        let ctx = self.ctx;
        let mut bound: HashSet<usize> = (0..ctx.vars.len())
            .filter(|&v| !rows.is_empty() && rows.iter().all(|r| r[v].is_some()))
            .collect();
        let mut pending: Vec<(&CExpr, Vec<usize>)> = g
            .filters
            .iter()
            .map(|f| {
                let mut vs = Vec::new();
                f.vars(&mut vs);
                (f, vs)
            })
            .collect();
        self.apply_ready(&mut pending, &bound, &mut rows);
        for i in ctx.order(&g.triples, &bound, self.mode) {
            if rows.is_empty() {
                break;
            }
            let t = &g.triples[i];
            let mut next = Vec::new();
            for row in &rows {
                self.extend(t, row, &mut next)?;
            }
            rows = next;
            bound.extend(t.vars());
            self.apply_ready(&mut pending, &bound, &mut rows);
        }
        for branches in &g.unions {
            let mut next = Vec::new();
            for b in branches {
                next.extend(self.eval_group(b, rows.clone())?);
            }
            rows = next;
        }
        for opt in &g.optionals {
            let mut next = Vec::with_capacity(rows.len());
            for row in rows {
                let ext = self.eval_group(opt, vec![row.clone()])?;
                if ext.is_empty() {
                    next.push(row);
                } else {
                    next.extend(ext);
                }
            }
            rows = next;
        }
        for (f, _) in pending {
            rows.retain(|r| ctx.eval_expr(f, r) == Some(true));
        }
        Ok(rows)
    }

    fn apply_ready(
        &self,
        pending: &mut Vec<(&CExpr, Vec<usize>)>,
        bound: &HashSet<usize>,
        rows: &mut Vec<Row>,
    ) {
        pending.retain(|(f, vs)| {
            if vs.iter().all(|v| bound.contains(v)) {
                rows.retain(|r| self.ctx.eval_expr(f, r) == Some(true));
                false
            } else {
                true
            }
        });
    }

    /// Extends `row` with every match of `t`, each distinct assignment of
    /// the newly bound variables once.
    fn extend(&self, t: &CTriple, row: &Row, out: &mut Vec<Row>) -> Result<()> {
        let ctx = self.ctx;
        fn bound<'b>(s: &'b CSlot, row: &Row) -> Option<Bound<'b>> {
            match s {
                CSlot::Const(c) => Some(Bound::Const(c)),
                CSlot::Var(v) => row[*v].map(Bound::Value),
            }
        }
        let (sb, pb, ob) = (
            bound(&t.slots[0], row),
            bound(&t.slots[1], row),
            bound(&t.slots[2], row),
        );
        let subject = match &sb {
            Some(b) => match ctx.as_instance(b) {
                Some(id) => Some(id),
                None => return Ok(()),
            },
            None => None,
        };
        let type_code = PropertyClass::Type.prefix();
        let mut probes = Vec::new();
        // Predicate: None = variable, Some(None) = rdf:type, Some(Some(p)).
        let predicate = match &pb {
            None => None,
            Some(b) => match ctx.as_property(b) {
                None => return Ok(()),
                Some(0) => Some(None),
                Some(p) => Some(Some(p)),
            },
        };
        let concept_probes = |c: usize, probes: &mut Vec<Probe>| {
            if c == 0 && ctx.rdfs() {
                probes.push(Probe::Things(subject));
            } else {
                for code in ctx.concept_codes(c) {
                    probes.push(Probe::Store(TriplePattern::new(
                        subject,
                        Some(type_code),
                        ObjectPattern::Concept(code),
                    )));
                }
            }
        };
        match (predicate, &ob) {
            (Some(None), None) => {
                probes.push(Probe::Store(TriplePattern::new(
                    subject,
                    Some(type_code),
                    ObjectPattern::Any,
                )));
                if ctx.rdfs() {
                    probes.push(Probe::Things(subject));
                }
            }
            (Some(None), Some(o)) => match ctx.as_concept(o) {
                Some(c) => concept_probes(c, &mut probes),
                None => return Ok(()),
            },
            (Some(Some(p)), o) => {
                let object = match o {
                    None => ObjectPattern::Any,
                    Some(o) => match ctx.as_instance(o) {
                        Some(id) => ObjectPattern::Instance(id),
                        None => return Ok(()),
                    },
                };
                for code in ctx.property_codes(p) {
                    probes.push(Probe::Store(TriplePattern::new(
                        subject,
                        Some(code),
                        object,
                    )));
                }
            }
            (None, None) => {
                probes.push(Probe::Store(TriplePattern::new(
                    subject,
                    None,
                    ObjectPattern::Any,
                )));
                if ctx.rdfs() {
                    probes.push(Probe::Things(subject));
                }
            }
            (None, Some(o)) => {
                if let Some(id) = ctx.as_instance(o) {
                    probes.push(Probe::Store(TriplePattern::new(
                        subject,
                        None,
                        ObjectPattern::Instance(id),
                    )));
                }
                if let Some(c) = ctx.as_concept(o) {
                    concept_probes(c, &mut probes);
                }
            }
        }

        let targets: [Option<usize>; 3] = std::array::from_fn(|k| match t.slots[k] {
            CSlot::Var(v) if row[v].is_none() => Some(v),
            _ => None,
        });
        let mut seen: HashSet<[Option<Value>; 3]> = HashSet::new();
        let mut emit = |s: Value, ps: &[Value], os: &[Value], out: &mut Vec<Row>| {
            for &p in ps {
                for &o in os {
                    let vals = [s, p, o];
                    let mut new = row.clone();
                    let mut key = [None; 3];
                    let mut ok = true;
                    for k in 0..3 {
                        let Some(v) = targets[k] else { continue };
                        match new[v] {
                            Some(prev) if !ctx.same_term(prev, vals[k]) => ok = false,
                            Some(_) => {}
                            None => new[v] = Some(vals[k]),
                        }
                        key[k] = Some(vals[k]);
                    }
                    if ok && seen.insert(key) {
                        out.push(new);
                    }
                }
            }
        };
        for probe in probes {
            self.probes.set(self.probes.get() + 1);
            match probe {
                Probe::Store(pattern) => {
                    for m in ctx.db.store.resolve(&pattern)? {
                        self.matches.set(self.matches.get() + 1);
                        let EncodedTriple {
                            subject: s,
                            predicate: p,
                            object: o,
                        } = m;
                        let ps = if targets[1].is_some() {
                            ctx.property_values(&p)?
                        } else {
                            vec![Value::Property(0)]
                        };
                        let os = match (o, targets[2].is_some()) {
                            (Object::Concept(c), true) => ctx.concept_values(&c)?,
                            (Object::Concept(_), false) => vec![Value::Concept(0)],
                            (Object::Instance(id), _) => vec![Value::Instance(id)],
                        };
                        emit(Value::Instance(s), &ps, &os, out);
                    }
                }
                Probe::Things(Some(s)) => {
                    if ctx.is_resource(s) {
                        self.matches.set(self.matches.get() + 1);
                        emit(
                            Value::Instance(s),
                            &[Value::Property(0)],
                            &[Value::Concept(0)],
                            out,
                        );
                    }
                }
                Probe::Things(None) => {
                    for &s in ctx.resources() {
                        self.matches.set(self.matches.get() + 1);
                        emit(
                            Value::Instance(s),
                            &[Value::Property(0)],
                            &[Value::Concept(0)],
                            out,
                        );
                    }
                }
            }
        }
        Ok(())
    }
}
