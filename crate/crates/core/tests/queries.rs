mod common;

use std::collections::{BTreeSet, HashMap};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wfwl::query::{execute, Entailment, PlanMode, QueryOptions};
use wfwl::sparql::Slot;
use wfwl::term::{self, Term};
use wfwl::{parse_query, BuildOptions, Database};

use common::{random_data, rdfs_closure, sorted_rows, Naive, RandomData};

fn slot_text(s: &Slot) -> String {
    s.to_string()
}

fn var(rng: &mut ChaCha8Rng, used: &mut Vec<&'static str>, reuse: bool) -> Slot {
    const NAMES: [&str; 3] = ["a", "b", "c"];
    let v = if reuse && !used.is_empty() {
        *used.choose(rng).unwrap()
    } else {
        let v = NAMES[rng.random_range(0..NAMES.len())];
        if !used.contains(&v) {
            used.push(v);
        }
        v
    };
    Slot::Var(v.into())
}

/// A connected conjunctive query of up to four patterns over at most three
/// variables, as SPARQL text.
fn random_query(rng: &mut ChaCha8Rng, data: &RandomData) -> String {
    let mut used: Vec<&'static str> = Vec::new();
    let mut patterns = Vec::new();
    let n = rng.random_range(1..=4);
    for _ in 0..n {
        let first = used.is_empty();
        let subject_var = first || rng.random_bool(0.8);
        let subject = if subject_var {
            {
                let reuse = !first && rng.random_bool(0.7);
                var(rng, &mut used, reuse)
            }
        } else {
            Slot::Term(Term::iri(data.instances.choose(rng).unwrap()))
        };
        let roll = rng.random_range(0..10);
        let (predicate, object) = if roll < 4
            || (data.object_properties.is_empty() && data.datatype_properties.is_empty())
        {
            let object = if rng.random_bool(0.8) {
                let mut c: Vec<&String> = data.concepts.iter().collect();
                let thing = term::OWL_THING.to_string();
                c.push(&thing);
                Slot::Term(Term::iri(*c.choose(rng).unwrap()))
            } else {
                var(rng, &mut used, false)
            };
            (Slot::Term(Term::iri(term::RDF_TYPE)), object)
        } else if roll < 9 {
            let props: Vec<&String> = data
                .object_properties
                .iter()
                .chain(&data.datatype_properties)
                .collect();
            let p = *props.choose(rng).unwrap();
            let object = if data.datatype_properties.contains(p) && rng.random_bool(0.2) {
                Slot::Term(Term::literal(format!("v{}", rng.random_range(0..20))))
            } else if rng.random_bool(0.15) {
                Slot::Term(Term::iri(data.instances.choose(rng).unwrap()))
            } else {
                {
                    let reuse = !subject_var || rng.random_bool(0.3);
                    var(rng, &mut used, reuse)
                }
            };
            (Slot::Term(Term::iri(p)), object)
        } else {
            let s_bound = !matches!(subject, Slot::Var(_));
            let object = if s_bound {
                var(rng, &mut used, true)
            } else {
                Slot::Term(Term::iri(data.instances.choose(rng).unwrap()))
            };
            (var(rng, &mut used, false), object)
        };
        patterns.push(format!(
            "{} {} {} .",
            slot_text(&subject),
            slot_text(&predicate),
            slot_text(&object)
        ));
    }
    let vars: Vec<String> = used.iter().map(|v| format!("?{v}")).collect();
    let projection = if vars.is_empty() {
        "*".to_string()
    } else {
        vars.join(" ")
    };
    format!("SELECT {projection} WHERE {{ {} }}", patterns.join(" "))
}

fn rows(db: &Database, text: &str, options: QueryOptions) -> Vec<Vec<Term>> {
    let q = parse_query(text).unwrap_or_else(|e| panic!("{text}: {e}"));
    let r = execute(db, &q, options).unwrap_or_else(|e| panic!("{text}: {e}"));
    if q.variables().is_empty() {
        return vec![Vec::new(); r.rows.len()];
    }
    sorted_rows(&r.rows)
}

fn databases(
    seed: u64,
    count: usize,
    max_triples: usize,
) -> impl Iterator<Item = (ChaCha8Rng, RandomData, Database)> {
    (0..count).map(move |k| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed * 1000 + k as u64);
        let data = random_data(&mut rng, 25, 10, max_triples);
        let (db, _) = Database::build(
            data.tbox.clone(),
            data.abox.clone(),
            BuildOptions::default(),
        )
        .unwrap();
        (rng, data, db)
    })
}

#[test]
fn random_conjunctive_queries_match_the_closure() {
    let mut checked = 0;
    for (mut rng, data, db) in databases(1, 40, 300) {
        let naive = Naive::new(rdfs_closure(&data.tbox, &data.abox));
        for _ in 0..25 {
            let text = random_query(&mut rng, &data);
            let q = parse_query(&text).unwrap();
            let want = naive.eval(&q.pattern.triples, &q.variables());
            assert_eq!(rows(&db, &text, QueryOptions::default()), want, "{text}");
            checked += 1;
        }
    }
    assert_eq!(checked, 1000);
}

#[test]
fn answers_do_not_depend_on_pattern_order() {
    for (mut rng, data, db) in databases(2, 30, 300) {
        for _ in 0..10 {
            let text = random_query(&mut rng, &data);
            let q = parse_query(&text).unwrap();
            let base = rows(&db, &text, QueryOptions::default());
            let mut patterns: Vec<String> = q
                .pattern
                .triples
                .iter()
                .map(|t| format!("{} {} {} .", t.subject, t.predicate, t.object))
                .collect();
            patterns.shuffle(&mut rng);
            let head = &text[..text.find('{').unwrap()];
            let permuted = format!("{head}{{ {} }}", patterns.join(" "));
            for plan in [PlanMode::Greedy, PlanMode::AsWritten] {
                let options = QueryOptions {
                    entailment: Entailment::Rdfs,
                    plan,
                };
                assert_eq!(rows(&db, &permuted, options), base, "{permuted} ({plan:?})");
            }
            let simple = rows(
                &db,
                &text,
                QueryOptions {
                    entailment: Entailment::Simple,
                    plan: PlanMode::Greedy,
                },
            );
            let simple_as_written = rows(
                &db,
                &permuted,
                QueryOptions {
                    entailment: Entailment::Simple,
                    plan: PlanMode::AsWritten,
                },
            );
            assert_eq!(simple, simple_as_written, "{permuted}");
        }
    }
}

fn closure_below(edges: &[(String, String)], top: &str) -> BTreeSet<String> {
    let mut children: HashMap<&str, Vec<&str>> = HashMap::new();
    for (c, p) in edges {
        children.entry(p.as_str()).or_default().push(c.as_str());
    }
    let mut out = BTreeSet::new();
    let mut stack = vec![top];
    while let Some(x) = stack.pop() {
        if out.insert(x.to_string()) {
            stack.extend(children.get(x).into_iter().flatten());
        }
    }
    out
}

fn edges(data: &RandomData, predicate: &str) -> Vec<(String, String)> {
    data.tbox
        .iter()
        .filter(|t| t.predicate == predicate)
        .map(|t| {
            (
                t.subject.as_iri().unwrap().to_string(),
                t.object.as_iri().unwrap().to_string(),
            )
        })
        .collect()
}

fn union(parts: impl IntoIterator<Item = Vec<Vec<Term>>>) -> Vec<Vec<Term>> {
    let set: BTreeSet<Vec<Term>> = parts.into_iter().flatten().collect();
    set.into_iter().collect()
}

#[test]
fn rdfs_is_the_union_of_simple_queries_over_descendants() {
    let simple = QueryOptions {
        entailment: Entailment::Simple,
        plan: PlanMode::Greedy,
    };
    for (_, data, db) in databases(3, 30, 500) {
        let sub_class = edges(&data, term::RDFS_SUBCLASS_OF);
        for c in &data.concepts {
            let rdfs = rows(
                &db,
                &format!("SELECT ?x WHERE {{ ?x a <{c}> }}"),
                QueryOptions::default(),
            );
            let parts = closure_below(&sub_class, c)
                .into_iter()
                .map(|d| rows(&db, &format!("SELECT ?x WHERE {{ ?x a <{d}> }}"), simple));
            assert_eq!(rdfs, union(parts), "concept {c}");
        }
        let sub_prop = edges(&data, term::RDFS_SUBPROPERTY_OF);
        for p in data
            .object_properties
            .iter()
            .chain(&data.datatype_properties)
        {
            let rdfs = rows(
                &db,
                &format!("SELECT ?s ?o WHERE {{ ?s <{p}> ?o }}"),
                QueryOptions::default(),
            );
            let parts = closure_below(&sub_prop, p).into_iter().map(|q| {
                rows(
                    &db,
                    &format!("SELECT ?s ?o WHERE {{ ?s <{q}> ?o }}"),
                    simple,
                )
            });
            assert_eq!(rdfs, union(parts), "property {p}");
        }
    }
}

#[test]
fn simple_entailment_returns_exactly_the_stored_triples() {
    let simple = QueryOptions {
        entailment: Entailment::Simple,
        plan: PlanMode::Greedy,
    };
    for (_, data, db) in databases(4, 20, 400) {
        let stored: Vec<_> = db.triples().collect::<Result<_, _>>().unwrap();
        for p in data
            .object_properties
            .iter()
            .chain(&data.datatype_properties)
        {
            let mut want: Vec<Vec<Term>> = stored
                .iter()
                .filter(|t| t.predicate == *p)
                .map(|t| vec![t.subject.clone(), t.object.clone()])
                .collect();
            want.sort();
            want.dedup();
            assert_eq!(
                rows(
                    &db,
                    &format!("SELECT ?s ?o WHERE {{ ?s <{p}> ?o }}"),
                    simple
                ),
                want,
                "{p}"
            );
        }
        let mut all: Vec<Vec<Term>> = stored
            .iter()
            .map(|t| vec![t.subject.clone(), Term::iri(&t.predicate), t.object.clone()])
            .collect();
        all.sort();
        assert_eq!(rows(&db, "SELECT ?s ?p ?o WHERE { ?s ?p ?o }", simple), all);
    }
}
