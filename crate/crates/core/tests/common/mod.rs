//! Reference implementations used by the integration and acceptance tests.
//! They share no code with the library beyond the term types and the query
//! parser.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, HashSet};

use rand::seq::IndexedRandom;
use rand::Rng;
use wfwl::sparql::{PatternTriple, Slot};
use wfwl::term::{self, Term, Triple};

/// Brute-force RDFS closure of the assertional triples.
///
/// Rules: subproperty (rdfs7), domain (rdfs2), range on non-literal
/// objects (rdfs3), subclass (rdfs9), with the subclass and subproperty
/// relations closed transitively (rdfs5, rdfs11). Every resource, i.e. any
/// subject or non-literal object of a non-type triple, is an `owl:Thing`.
/// Schema triples are not part of the result.
pub fn rdfs_closure(tbox: &[Triple], abox: &[Triple]) -> HashSet<Triple> {
    let mut sub_class: HashMap<&str, Vec<&str>> = HashMap::new();
    let mut sub_prop: HashMap<&str, Vec<&str>> = HashMap::new();
    let mut domain: HashMap<&str, Vec<&str>> = HashMap::new();
    let mut range: HashMap<&str, Vec<&str>> = HashMap::new();
    for t in tbox.iter().chain(abox) {
        let (Some(s), Some(o)) = (t.subject.as_iri(), t.object.as_iri()) else {
            continue;
        };
        let map = match t.predicate.as_str() {
            term::RDFS_SUBCLASS_OF => &mut sub_class,
            term::RDFS_SUBPROPERTY_OF => &mut sub_prop,
            term::RDFS_DOMAIN => &mut domain,
            term::RDFS_RANGE => &mut range,
            _ => continue,
        };
        map.entry(s).or_default().push(o);
    }
    let up = |map: &HashMap<&str, Vec<&str>>, start: &str| -> BTreeSet<String> {
        let mut seen = BTreeSet::from([start.to_owned()]);
        let mut stack = vec![start.to_owned()];
        while let Some(x) = stack.pop() {
            for &y in map.get(x.as_str()).into_iter().flatten() {
                if seen.insert(y.to_owned()) {
                    stack.push(y.to_owned());
                }
            }
        }
        seen
    };
    let is_schema = |t: &Triple| {
        matches!(
            t.predicate.as_str(),
            term::RDFS_SUBCLASS_OF
                | term::RDFS_SUBPROPERTY_OF
                | term::RDFS_DOMAIN
                | term::RDFS_RANGE
        ) || (t.predicate == term::RDF_TYPE
            && matches!(
                t.object.as_iri(),
                Some(
                    term::RDFS_CLASS
                        | term::OWL_CLASS
                        | term::RDF_PROPERTY
                        | term::OWL_OBJECT_PROPERTY
                        | term::OWL_DATATYPE_PROPERTY
                        | term::RDFS_DATATYPE
                )
            ))
    };

    let mut out = HashSet::new();
    let mut types: HashMap<Term, BTreeSet<String>> = HashMap::new();
    let mut resources: HashSet<Term> = HashSet::new();
    for t in abox.iter().filter(|t| !is_schema(t)) {
        resources.insert(t.subject.clone());
        if t.predicate == term::RDF_TYPE {
            let c = t.object.as_iri().expect("class IRI");
            if c != term::OWL_THING && c != term::RDFS_RESOURCE {
                types
                    .entry(t.subject.clone())
                    .or_default()
                    .insert(c.to_owned());
            }
            continue;
        }
        if !t.object.is_literal() {
            resources.insert(t.object.clone());
        }
        for q in up(&sub_prop, &t.predicate) {
            for &d in domain.get(q.as_str()).into_iter().flatten() {
                types
                    .entry(t.subject.clone())
                    .or_default()
                    .insert(d.to_owned());
            }
            if !t.object.is_literal() {
                for &r in range.get(q.as_str()).into_iter().flatten() {
                    types
                        .entry(t.object.clone())
                        .or_default()
                        .insert(r.to_owned());
                }
            }
            out.insert(Triple::new(t.subject.clone(), q, t.object.clone()));
        }
    }
    for (s, cs) in types {
        for c in cs {
            for a in up(&sub_class, &c) {
                out.insert(Triple::new(s.clone(), term::RDF_TYPE, Term::iri(a)));
            }
        }
    }
    for r in resources {
        out.insert(Triple::new(r, term::RDF_TYPE, Term::iri(term::OWL_THING)));
    }
    out
}

/// Naive basic-graph-pattern evaluation over a set of triples.
pub struct Naive {
    triples: Vec<Triple>,
    by_p: HashMap<String, Vec<usize>>,
    by_ps: HashMap<(String, Term), Vec<usize>>,
    by_po: HashMap<(String, Term), Vec<usize>>,
}

impl Naive {
    pub fn new(triples: impl IntoIterator<Item = Triple>) -> Self {
        let mut triples: Vec<Triple> = triples.into_iter().collect();
        triples.sort();
        let mut n = Naive {
            triples,
            by_p: HashMap::new(),
            by_ps: HashMap::new(),
            by_po: HashMap::new(),
        };
        for (i, t) in n.triples.iter().enumerate() {
            n.by_p.entry(t.predicate.clone()).or_default().push(i);
            n.by_ps
                .entry((t.predicate.clone(), t.subject.clone()))
                .or_default()
                .push(i);
            n.by_po
                .entry((t.predicate.clone(), t.object.clone()))
                .or_default()
                .push(i);
        }
        n
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    /// Solutions of the conjunction, projected on `vars`, as a sorted
    /// multiset.
    pub fn eval(&self, patterns: &[PatternTriple], vars: &[String]) -> Vec<Vec<Term>> {
        let mut rows: Vec<HashMap<String, Term>> = vec![HashMap::new()];
        let mut left: Vec<&PatternTriple> = patterns.iter().collect();
        let mut bound: HashSet<String> = HashSet::new();
        while !left.is_empty() {
            // Most constrained pattern next, to keep intermediate results small.
            let score = |p: &PatternTriple| {
                p.slots()
                    .iter()
                    .filter(|s| s.var().is_none_or(|v| bound.contains(v)))
                    .count()
            };
            let k = (0..left.len())
                .max_by_key(|&k| (score(left[k]), usize::MAX - k))
                .unwrap();
            let p = left.remove(k);
            let mut next = Vec::new();
            for row in &rows {
                let value = |s: &Slot| match s {
                    Slot::Term(t) => Some(t.clone()),
                    Slot::Var(v) => row.get(v).cloned(),
                };
                let (s, pr, o) = (value(&p.subject), value(&p.predicate), value(&p.object));
                let candidates: Box<dyn Iterator<Item = &Triple>> = match (&pr, &s, &o) {
                    (Some(Term::Iri(pi)), Some(st), _) => Box::new(
                        self.by_ps
                            .get(&(pi.clone(), st.clone()))
                            .into_iter()
                            .flatten()
                            .map(|&i| &self.triples[i]),
                    ),
                    (Some(Term::Iri(pi)), None, Some(ot)) => Box::new(
                        self.by_po
                            .get(&(pi.clone(), ot.clone()))
                            .into_iter()
                            .flatten()
                            .map(|&i| &self.triples[i]),
                    ),
                    (Some(Term::Iri(pi)), None, None) => Box::new(
                        self.by_p
                            .get(pi)
                            .into_iter()
                            .flatten()
                            .map(|&i| &self.triples[i]),
                    ),
                    (Some(_), _, _) => Box::new(std::iter::empty()),
                    (None, _, _) => Box::new(self.triples.iter()),
                };
                for t in candidates {
                    let mut r = row.clone();
                    let mut ok = true;
                    for (slot, val) in [
                        (&p.subject, &t.subject),
                        (&p.predicate, &Term::iri(&t.predicate)),
                        (&p.object, &t.object),
                    ] {
                        match slot {
                            Slot::Term(c) => ok &= c == val,
                            Slot::Var(v) => match r.get(v) {
                                Some(prev) => ok &= prev == val,
                                None => {
                                    r.insert(v.clone(), val.clone());
                                }
                            },
                        }
                        if !ok {
                            break;
                        }
                    }
                    if ok {
                        next.push(r);
                    }
                }
            }
            rows = next;
            bound.extend(p.vars().map(str::to_owned));
        }
        let mut out: Vec<Vec<Term>> = rows
            .into_iter()
            .map(|r| vars.iter().map(|v| r[v].clone()).collect())
            .collect();
        out.sort();
        out
    }
}

/// Result rows of the engine as a sorted multiset; unbound cells panic.
pub fn sorted_rows(rows: &[Vec<Option<Term>>]) -> Vec<Vec<Term>> {
    let mut out: Vec<Vec<Term>> = rows
        .iter()
        .map(|r| r.iter().map(|c| c.clone().expect("bound")).collect())
        .collect();
    out.sort();
    out
}

/// A random schema and dataset.
pub struct RandomData {
    pub tbox: Vec<Triple>,
    pub abox: Vec<Triple>,
    pub concepts: Vec<String>,
    pub object_properties: Vec<String>,
    pub datatype_properties: Vec<String>,
    pub instances: Vec<String>,
}

const NS: &str = "http://r.example/";

fn t(s: &str, p: &str, o: Term) -> Triple {
    Triple::new(Term::iri(s), p, o)
}

/// Hierarchies of up to `max_concepts` concepts and `max_properties`
/// properties, depth at most four, about one concept in ten with a second
/// parent; up to `max_triples` data triples.
pub fn random_data<R: Rng>(
    rng: &mut R,
    max_concepts: usize,
    max_properties: usize,
    max_triples: usize,
) -> RandomData {
    let mut tbox = Vec::new();
    let n_concepts = rng.random_range(1..=max_concepts);
    let mut concepts = Vec::new();
    let mut level = Vec::new();
    for i in 0..n_concepts {
        let c = format!("{NS}C{i}");
        tbox.push(t(&c, term::RDF_TYPE, Term::iri(term::OWL_CLASS)));
        let candidates: Vec<usize> = (0..i).filter(|&j| level[j] < 3).collect();
        let root = i == 0 || candidates.is_empty() || rng.random_bool(0.15);
        if root {
            level.push(0);
        } else {
            let p = *candidates.choose(rng).unwrap();
            tbox.push(t(&c, term::RDFS_SUBCLASS_OF, Term::iri(&concepts[p])));
            let mut lv = level[p] + 1;
            if rng.random_bool(0.1) {
                if let Some(&q) = candidates
                    .iter()
                    .filter(|&&q| q != p)
                    .collect::<Vec<_>>()
                    .choose(rng)
                {
                    tbox.push(t(&c, term::RDFS_SUBCLASS_OF, Term::iri(&concepts[*q])));
                    lv = lv.max(level[*q] + 1);
                }
            }
            level.push(lv);
        }
        concepts.push(c);
    }

    let n_props = rng.random_range(1..=max_properties);
    let (mut object_properties, mut datatype_properties) = (Vec::new(), Vec::new());
    let mut depth: HashMap<String, usize> = HashMap::new();
    for i in 0..n_props {
        let p = format!("{NS}p{i}");
        let object = rng.random_bool(0.6);
        let (list, kind) = if object {
            (&mut object_properties, term::OWL_OBJECT_PROPERTY)
        } else {
            (&mut datatype_properties, term::OWL_DATATYPE_PROPERTY)
        };
        tbox.push(t(&p, term::RDF_TYPE, Term::iri(kind)));
        let parents: Vec<String> = list.iter().filter(|q| depth[*q] < 2).cloned().collect();
        let mut d = 0;
        if !parents.is_empty() && rng.random_bool(0.4) {
            let q = parents.choose(rng).unwrap();
            tbox.push(t(&p, term::RDFS_SUBPROPERTY_OF, Term::iri(q)));
            d = depth[q] + 1;
        }
        if rng.random_bool(0.3) {
            tbox.push(t(
                &p,
                term::RDFS_DOMAIN,
                Term::iri(concepts.choose(rng).unwrap()),
            ));
        }
        if object && rng.random_bool(0.3) {
            tbox.push(t(
                &p,
                term::RDFS_RANGE,
                Term::iri(concepts.choose(rng).unwrap()),
            ));
        }
        depth.insert(p.clone(), d);
        list.push(p);
    }

    let n_inst = rng.random_range(5..=200);
    let instances: Vec<String> = (0..n_inst).map(|i| format!("{NS}i{i}")).collect();
    let n_triples = rng.random_range(0..=max_triples);
    let mut abox = Vec::with_capacity(n_triples);
    for _ in 0..n_triples {
        let s = instances.choose(rng).unwrap();
        let roll = rng.random_range(0..10);
        if roll < 3 {
            abox.push(t(
                s,
                term::RDF_TYPE,
                Term::iri(concepts.choose(rng).unwrap()),
            ));
        } else if roll < 8 && !object_properties.is_empty() {
            let p = object_properties.choose(rng).unwrap();
            abox.push(t(s, p, Term::iri(instances.choose(rng).unwrap())));
        } else if !datatype_properties.is_empty() {
            let p = datatype_properties.choose(rng).unwrap();
            let v = rng.random_range(0..20);
            let o = if rng.random_bool(0.5) {
                Term::literal(format!("v{v}"))
            } else {
                Term::typed_literal(v.to_string(), format!("{}integer", term::XSD))
            };
            abox.push(t(s, p, o));
        }
    }
    RandomData {
        tbox,
        abox,
        concepts,
        object_properties,
        datatype_properties,
        instances,
    }
}

/// Canonical N-Triples lines of a triple collection, sorted.
pub fn lines<'a>(triples: impl IntoIterator<Item = &'a Triple>) -> Vec<String> {
    let mut v: Vec<String> = triples.into_iter().map(|t| t.to_string()).collect();
    v.sort();
    v.dedup();
    v
}
