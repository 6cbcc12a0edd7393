//! From raw triples to sorted encoded triples.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::ontology::{is_schema_triple, Ontology, Usage};
use crate::store::{EncodedTriple, Object};
use crate::term::{self, Term, Triple};

/// Separates schema triples from instance triples, keeping input order.
pub fn split_tbox_abox(triples: Vec<Triple>) -> (Vec<Triple>, Vec<Triple>) {
    triples.into_iter().partition(is_schema_triple)
}

/// Concepts and properties referenced by instance triples.
pub fn usage(abox: &[Triple]) -> Result<Usage> {
    let mut u = Usage::default();
    for t in abox {
        u.properties.insert(t.predicate.clone());
        if t.predicate == term::RDF_TYPE {
            let c = t
                .object
                .as_iri()
                .ok_or_else(|| Error::Ingest(format!("rdf:type object must be an IRI: {t}")))?;
            u.concepts.insert(c.to_owned());
        }
    }
    Ok(u)
}

/// Removes `rdf:type owl:Thing` / `rdf:type rdfs:Resource`, which hold for
/// every resource. Returns how many were dropped.
pub fn drop_top_typing(abox: &mut Vec<Triple>) -> usize {
    let before = abox.len();
    abox.retain(|t| {
        !(t.predicate == term::RDF_TYPE
            && matches!(
                t.object.as_iri(),
                Some(term::OWL_THING | term::RDFS_RESOURCE)
            ))
    });
    before - abox.len()
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MaterializeReport {
    pub added: Vec<Triple>,
    pub removed: Vec<Triple>,
}

/// Adds the deepest types implied by property domains and ranges.
///
/// For each resource, the required concepts are the effective domains of
/// the properties it is the subject of and the effective ranges of the
/// properties it is the (IRI) object of. A required concept already
/// subsuming one of the resource's types changes nothing; otherwise a type
/// triple is added, and asserted types strictly above the added concept are
/// removed unless `keep_superseded` is set. Duplicate triples are dropped.
pub fn materialize_domain_range(
    abox: Vec<Triple>,
    ontology: &Ontology,
    keep_superseded: bool,
) -> Result<(Vec<Triple>, MaterializeReport)> {
    let concepts = &ontology.concepts;
    let mut seen = HashSet::new();
    let abox: Vec<Triple> = abox
        .into_iter()
        .filter(|t| seen.insert(t.clone()))
        .collect();
    drop(seen);

    let mut order: Vec<Term> = Vec::new();
    let mut index: HashMap<Term, usize> = HashMap::new();
    let mut slot = |t: &Term, order: &mut Vec<Term>| -> usize {
        *index.entry(t.clone()).or_insert_with(|| {
            order.push(t.clone());
            order.len() - 1
        })
    };
    let mut types: Vec<BTreeSet<usize>> = Vec::new();
    let mut required: Vec<BTreeSet<usize>> = Vec::new();
    for t in &abox {
        let s = slot(&t.subject, &mut order);
        types.resize(order.len(), BTreeSet::new());
        required.resize(order.len(), BTreeSet::new());
        if t.predicate == term::RDF_TYPE {
            let iri = t
                .object
                .as_iri()
                .ok_or_else(|| Error::Ingest(format!("rdf:type object must be an IRI: {t}")))?;
            let c = concepts
                .index_of(iri)
                .ok_or_else(|| Error::Ingest(format!("unknown concept {iri}")))?;
            if c != 0 {
                types[s].insert(c);
            }
            continue;
        }
        let p = ontology
            .properties
            .index_of(&t.predicate)
            .ok_or_else(|| Error::Ingest(format!("unknown property {}", t.predicate)))?;
        required[s].extend(ontology.effective_domains(p));
        if !t.object.is_literal() {
            let ranges = ontology.effective_ranges(p);
            if !ranges.is_empty() {
                let o = slot(&t.object, &mut order);
                types.resize(order.len(), BTreeSet::new());
                required.resize(order.len(), BTreeSet::new());
                required[o].extend(ranges);
            }
        }
    }

    let mut report = MaterializeReport::default();
    let mut removed: HashSet<(usize, usize)> = HashSet::new();
    for r in 0..order.len() {
        let req = &required[r];
        let deepest: Vec<usize> = req
            .iter()
            .copied()
            .filter(|&d| !req.iter().any(|&e| e != d && concepts.subsumes(d, e)))
            .collect();
        let mut current: BTreeSet<usize> = types[r].clone();
        for d in deepest {
            if current.iter().any(|&t| concepts.subsumes(d, t)) {
                continue;
            }
            if !keep_superseded {
                for &t in &types[r] {
                    if t != d && concepts.subsumes(t, d) && removed.insert((r, t)) {
                        report
                            .removed
                            .push(type_triple(&order[r], &concepts.element(t).iri));
                    }
                }
            }
            current.insert(d);
            report
                .added
                .push(type_triple(&order[r], &concepts.element(d).iri));
        }
    }
    let mut out: Vec<Triple> = if removed.is_empty() {
        abox
    } else {
        abox.into_iter()
            .filter(|t| {
                if t.predicate != term::RDF_TYPE {
                    return true;
                }
                let (Some(&r), Some(c)) = (
                    index.get(&t.subject),
                    t.object.as_iri().and_then(|i| concepts.index_of(i)),
                ) else {
                    return true;
                };
                !removed.contains(&(r, c))
            })
            .collect()
    };
    out.extend(report.added.iter().cloned());
    Ok((out, report))
}

fn type_triple(subject: &Term, concept: &str) -> Triple {
    Triple::new(subject.clone(), term::RDF_TYPE, Term::iri(concept))
}

/// Instance terms in first-occurrence order: every subject, and every
/// object outside `rdf:type`.
pub fn instance_terms(abox: &[Triple]) -> impl Iterator<Item = &Term> {
    abox.iter().flat_map(|t| {
        let object = (t.predicate != term::RDF_TYPE).then_some(&t.object);
        std::iter::once(&t.subject).chain(object)
    })
}

/// Encodes and sorts by (subject, predicate, object), dropping duplicates.
pub fn encode_and_sort(
    abox: &[Triple],
    dict: &Dictionary,
    ontology: &Ontology,
) -> Result<Vec<EncodedTriple>> {
    let mut out = Vec::with_capacity(abox.len());
    let mut pred_cache: HashMap<&str, crate::code::PrefixCode> = HashMap::new();
    for t in abox {
        let subject = dict
            .encode(&t.subject)
            .ok_or_else(|| Error::Ingest(format!("subject missing from dictionary: {t}")))?;
        let predicate = match pred_cache.get(t.predicate.as_str()) {
            Some(&c) => c,
            None => {
                let e = ontology
                    .properties
                    .get(&t.predicate)
                    .ok_or_else(|| Error::Ingest(format!("unknown property {}", t.predicate)))?;
                let c = e.self_code().ok_or_else(|| {
                    Error::Internal(format!("property {} has no stored code", e.iri))
                })?;
                pred_cache.insert(&t.predicate, c);
                c
            }
        };
        let object = if t.predicate == term::RDF_TYPE {
            let iri = t
                .object
                .as_iri()
                .ok_or_else(|| Error::Ingest(format!("rdf:type object must be an IRI: {t}")))?;
            let e = ontology
                .concepts
                .get(iri)
                .ok_or_else(|| Error::Ingest(format!("unknown concept {iri}")))?;
            Object::Concept(
                e.self_code()
                    .ok_or_else(|| Error::Ingest(format!("{iri} cannot be stored as a type")))?,
            )
        } else {
            Object::Instance(
                dict.encode(&t.object)
                    .ok_or_else(|| Error::Ingest(format!("object missing from dictionary: {t}")))?,
            )
        };
        out.push(EncodedTriple {
            subject,
            predicate,
            object,
        });
    }
    out.sort_by_key(EncodedTriple::sort_key);
    out.dedup();
    Ok(out)
}
