//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so that every criterion reports even
//! when an earlier one fails. The process exits nonzero if any fails.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

mod common;

use std::cell::Cell;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wfwl::ntriples::{parse_ntriples_str, write_ntriples};
use wfwl::query::{execute, Entailment, PlanMode, QueryOptions};
use wfwl::sparql::{PatternTriple, Slot};
use wfwl::synth::{self, SynthConfig};
use wfwl::term::{self, Term};
use wfwl::{
    parse_query, BitVector, BuildOptions, CodeTree, Database, DictPolicy, Error, ObjectPattern,
    PrefixCode, TriplePattern, WaveletTree,
};

use common::{rdfs_closure, sorted_rows, Naive};

const TBOX: &str = include_str!("data/lubm_tbox.nt");
const SAMPLE: &str = include_str!("data/sample_abox.nt");
const ADVISOR: &str = include_str!("data/advisor_abox.nt");
const UB: &str = "http://swat.cse.lehigh.edu/onto/univ-bench.owl#";

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn main() {
    let criteria: [(u32, &str, Duration, fn() -> Check); 8] = [
        (
            1,
            "worked-example bitmaps",
            Duration::from_secs(1),
            worked_example_bitmaps,
        ),
        (
            2,
            "prefix-code fixtures",
            Duration::from_secs(1),
            prefix_code_fixtures,
        ),
        (
            3,
            "domain/range materialization",
            Duration::from_secs(1),
            materialization,
        ),
        (
            4,
            "oracle equivalence suite",
            Duration::from_secs(300),
            oracle_equivalence,
        ),
        (5, "SDS oracle suite", Duration::from_secs(120), sds_oracles),
        (
            6,
            "LUBM-subset queries",
            Duration::from_secs(120),
            lubm_queries,
        ),
        (
            7,
            "unsatisfiability short-circuit",
            Duration::from_secs(1),
            short_circuit,
        ),
        (
            8,
            "serialization round trip",
            Duration::from_secs(420),
            round_trip,
        ),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (n, name, limit, f) in criteria {
        if !filter.is_empty()
            && !filter
                .iter()
                .any(|x| name.contains(x.as_str()) || *x == n.to_string())
        {
            continue;
        }
        let start = Instant::now();
        let outcome = match catch_unwind(AssertUnwindSafe(f)) {
            Ok(r) => r,
            Err(e) => Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into())),
        };
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if took > limit => Err(format!("{msg}; took {took:.2?}, limit {limit:?}")),
            other => other,
        };
        match outcome {
            Ok(msg) => println!("acceptance {n} {name}: PASS ({took:.2?}, limit {limit:?}) {msg}"),
            Err(msg) => {
                failed += 1;
                println!("acceptance {n} {name}: FAIL ({took:.2?}, limit {limit:?}) {msg}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}

fn build(tbox: &str, abox: &str, options: BuildOptions) -> Database {
    Database::from_ntriples(tbox, abox, options)
        .expect("build")
        .0
}

fn first_seen() -> BuildOptions {
    BuildOptions {
        policy: DictPolicy::FirstSeen,
        ..Default::default()
    }
}

fn restored(db: &Database) -> Database {
    let copy = Database::from_bytes(&db.to_bytes()).expect("deserialize");
    assert_eq!(&copy, db, "round trip changed the database");
    copy
}

// 1

fn bitmaps_of(db: &Database) -> Check {
    let got = [
        db.store.b_p().to_string(),
        db.store.b_o().to_string(),
        db.store.b_c().to_string(),
    ];
    let want = ["101001000101", "1111111101111", "1010010000101"];
    ensure!(got == want, "bitmaps {got:?}, expected {want:?}");
    Ok(format!("B_p={} B_o={} B_c={}", got[0], got[1], got[2]))
}

fn worked_example_bitmaps() -> Check {
    bitmaps_of(&build(TBOX, SAMPLE, first_seen()))
}

// 2

fn codes_of(db: &Database) -> Check {
    let c = &db.ontology.concepts;
    let code = |name: &str| {
        c.get(&format!("{UB}{name}"))
            .map(|e| e.code.to_string())
            .unwrap_or_default()
    };
    let org = c.get(&format!("{UB}Organization")).unwrap();
    let prof = c.get(&format!("{UB}Professor")).unwrap();
    let emp = c.get(&format!("{UB}Employee")).unwrap();
    let got = [
        code("Organization"),
        code("Person"),
        code("Work"),
        org.self_code().unwrap().to_string(),
        code("Department"),
        prof.code.to_string(),
        prof.code.to_sentinel().to_string(),
        emp.code.to_sentinel().to_string(),
    ];
    let want = ["00", "01", "10", "00000", "00001", "010101011", "683", "42"];
    ensure!(got == want, "codes {got:?}, expected {want:?}");
    Ok("Organization=00 Person=01 Work=10 self=00000 Department=00001 Professor=010101011/683 Employee=42".into())
}

fn prefix_code_fixtures() -> Check {
    codes_of(&build(TBOX, SAMPLE, BuildOptions::default()))
}

// 3

const QR1: &str = "PREFIX ub: <http://swat.cse.lehigh.edu/onto/univ-bench.owl#>
SELECT ?x ?y WHERE { ?x a ub:Professor . ?y a ub:Department . ?x ub:worksFor ?y . }";

fn qr1_on(with: &Database, without: &Database) -> Check {
    let r = with
        .query(QR1, QueryOptions::default())
        .map_err(|e| e.to_string())?;
    let want = vec![vec![
        Some(Term::iri("http://example.org/gblin")),
        Some(Term::iri("http://example.org/esipe")),
    ]];
    ensure!(
        r.rows == want,
        "QR1 with materialization returned {:?}",
        r.rows
    );
    let r = without
        .query(QR1, QueryOptions::default())
        .map_err(|e| e.to_string())?;
    ensure!(
        r.rows.is_empty(),
        "QR1 without materialization returned {:?}",
        r.rows
    );
    Ok("QR1 = {(gblin, esipe)}, empty without materialization".into())
}

fn materialization() -> Check {
    let (db, report) = Database::from_ntriples(TBOX, ADVISOR, BuildOptions::default())
        .map_err(|e| e.to_string())?;
    let mut added: Vec<String> = report
        .materialized
        .added
        .iter()
        .map(|t| t.to_string())
        .collect();
    added.sort();
    let want = [
        "<http://example.org/gblin> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://swat.cse.lehigh.edu/onto/univ-bench.owl#Professor> .",
        "<http://example.org/smith> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://swat.cse.lehigh.edu/onto/univ-bench.owl#Person> .",
    ];
    ensure!(added == want, "added {added:?}");
    let without = build(
        TBOX,
        ADVISOR,
        BuildOptions {
            materialize: false,
            ..Default::default()
        },
    );
    qr1_on(&db, &without)
}

// 4

/// Every single-pattern query over one random database: all eight
/// bound/unbound shapes, every property, every concept, sampled subjects
/// and objects. Answers are compared with the closure, and each store
/// probe's `count` with its `resolve`.
fn check_random_db(
    db: &Database,
    data: &common::RandomData,
    rng: &mut ChaCha8Rng,
) -> Result<usize, String> {
    let closure = Naive::new(rdfs_closure(&data.tbox, &data.abox));
    let pick = |rng: &mut ChaCha8Rng, v: &[String]| -> Vec<Slot> {
        (0..2)
            .filter(|_| !v.is_empty())
            .map(|_| Slot::Term(Term::iri(&v[rng.random_range(0..v.len())])))
            .collect()
    };
    let var = |n: &str| Slot::Var(n.into());
    let mut subjects = vec![var("s")];
    subjects.extend(pick(rng, &data.instances));
    let mut predicates = vec![var("p"), Slot::Term(Term::iri(term::RDF_TYPE))];
    predicates.extend(
        data.object_properties
            .iter()
            .chain(&data.datatype_properties)
            .map(|p| Slot::Term(Term::iri(p))),
    );
    let mut instance_objects = vec![var("o")];
    instance_objects.extend(pick(rng, &data.instances));
    instance_objects.push(Slot::Term(Term::literal(format!(
        "v{}",
        rng.random_range(0..20)
    ))));
    let concept_objects: Vec<Slot> = data
        .concepts
        .iter()
        .map(|c| Slot::Term(Term::iri(c)))
        .chain([Slot::Term(Term::iri(term::OWL_THING))])
        .collect();
    let mut n = 0;
    for s in &subjects {
        for p in &predicates {
            let typed = matches!(p, Slot::Var(_)) || *p == Slot::Term(Term::iri(term::RDF_TYPE));
            let objects =
                instance_objects
                    .iter()
                    .chain(if typed { &concept_objects[..] } else { &[] });
            for o in objects {
                let pattern = PatternTriple {
                    subject: s.clone(),
                    predicate: p.clone(),
                    object: o.clone(),
                };
                let vars: Vec<String> = pattern.vars().map(str::to_owned).collect();
                let text = format!(
                    "SELECT {} WHERE {{ {} {} {} }}",
                    if vars.is_empty() {
                        "*".to_owned()
                    } else {
                        vars.iter()
                            .map(|v| format!("?{v}"))
                            .collect::<Vec<_>>()
                            .join(" ")
                    },
                    s,
                    p,
                    o
                );
                let query = parse_query(&text).map_err(|e| format!("{text}: {e}"))?;
                let got = execute(db, &query, QueryOptions::default())
                    .map_err(|e| format!("{text}: {e}"))?;
                let want = closure.eval(std::slice::from_ref(&pattern), &vars);
                let got_rows = if vars.is_empty() {
                    vec![Vec::new(); got.rows.len()]
                } else {
                    sorted_rows(&got.rows)
                };
                ensure!(
                    got_rows == want,
                    "{text}: engine {} rows, closure {} rows",
                    got_rows.len(),
                    want.len()
                );
                n += 1;
            }
        }
    }
    // Store level: count agrees with resolve on every prefix pattern.
    let type_code = wfwl::PropertyClass::Type.prefix();
    let mut patterns = Vec::new();
    for e in db.ontology.concepts.elements() {
        for code in db.ontology.concepts.expand(&e.code) {
            patterns.push(TriplePattern::new(
                None,
                Some(type_code),
                ObjectPattern::Concept(code),
            ));
            patterns.push(TriplePattern::new(None, None, ObjectPattern::Concept(code)));
        }
    }
    for e in db.ontology.properties.elements() {
        for code in db.ontology.properties.expand(&e.code) {
            patterns.push(TriplePattern::new(None, Some(code), ObjectPattern::Any));
            if let Some(id) = db.dictionary.encode(&Term::iri(&data.instances[0])) {
                patterns.push(TriplePattern::new(Some(id), Some(code), ObjectPattern::Any));
                patterns.push(TriplePattern::new(
                    None,
                    Some(code),
                    ObjectPattern::Instance(id),
                ));
            }
        }
    }
    for p in patterns {
        let c = db.store.count(&p).map_err(|e| e.to_string())?;
        let r = db.store.resolve(&p).map_err(|e| e.to_string())?.count();
        ensure!(c == r, "count {c} != resolve {r} for {p:?}");
    }
    Ok(n)
}

fn random_dbs(cases: u32) -> Result<(u32, usize, usize), String> {
    let mut runner = TestRunner::new_with_rng(
        Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    );
    let (dbs, queries, max_triples) = (Cell::new(0u32), Cell::new(0usize), Cell::new(0usize));
    let result = runner.run(&proptest::num::u64::ANY, |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = common::random_data(&mut rng, 50, 20, 2000);
        let policy = if seed % 2 == 0 {
            DictPolicy::Sorted
        } else {
            DictPolicy::FirstSeen
        };
        let (db, _) = Database::build(
            data.tbox.clone(),
            data.abox.clone(),
            BuildOptions {
                policy,
                ..Default::default()
            },
        )
        .map_err(|e| proptest::test_runner::TestCaseError::fail(e.to_string()))?;
        let db = restored(&db);
        let n = check_random_db(&db, &data, &mut rng)
            .map_err(proptest::test_runner::TestCaseError::fail)?;
        dbs.set(dbs.get() + 1);
        queries.set(queries.get() + n);
        max_triples.set(max_triples.get().max(db.store.len()));
        Ok(())
    });
    result.map_err(|e| e.to_string())?;
    Ok((dbs.get(), queries.get(), max_triples.get()))
}

fn oracle_equivalence() -> Check {
    let (dbs, queries, max_triples) = random_dbs(200)?;
    Ok(format!(
        "{dbs} databases, {queries} pattern queries, up to {max_triples} stored triples"
    ))
}

// 5

fn check_bits(bits: &[bool], queries: Option<(usize, &mut ChaCha8Rng)>) -> Result<(), String> {
    let bv = BitVector::new(bits);
    let mut prefix = Vec::with_capacity(bits.len() + 1);
    prefix.push(0usize);
    for &b in bits {
        prefix.push(prefix.last().unwrap() + b as usize);
    }
    let ones: Vec<usize> = (0..bits.len()).filter(|&i| bits[i]).collect();
    let zeros: Vec<usize> = (0..bits.len()).filter(|&i| !bits[i]).collect();
    let mut probe = |i: usize| -> Result<(), String> {
        ensure!(
            bv.rank1(i) == prefix[i] && bv.rank0(i) == i - prefix[i],
            "rank at {i}"
        );
        if i < bits.len() {
            ensure!(
                bv.access(i).map_err(|e| e.to_string())? == bits[i],
                "access at {i}"
            );
        }
        let k = i + 1;
        ensure!(bv.select1(k) == ones.get(i).copied(), "select1({k})");
        ensure!(bv.select0(k) == zeros.get(i).copied(), "select0({k})");
        Ok(())
    };
    match queries {
        None => (0..=bits.len()).try_for_each(&mut probe)?,
        Some((n, rng)) => (0..n).try_for_each(|_| probe(rng.random_range(0..=bits.len())))?,
    }
    ensure!(
        bv.select1(0).is_none() && bv.select0(0).is_none(),
        "select(0)"
    );
    ensure!(
        matches!(bv.access(bits.len()), Err(Error::OutOfRange { .. })),
        "access past end"
    );
    ensure!(
        BitVector::from_bytes(&bv.to_bytes()).map_err(|e| e.to_string())? == bv,
        "bit vector round trip"
    );
    Ok(())
}

/// A random prefix-free code set: leaves of a random binary tree with
/// some single-child internal nodes.
fn random_codes(rng: &mut ChaCha8Rng, max_leaves: usize) -> Vec<PrefixCode> {
    let mut frontier = vec![PrefixCode::EMPTY];
    let mut leaves = Vec::new();
    while let Some(c) = frontier.pop() {
        let stop = c.len() >= 12
            || leaves.len() + frontier.len() + 2 > max_leaves
            || (!c.is_empty() && rng.random_bool(0.35));
        if stop {
            leaves.push(c);
        } else if rng.random_bool(0.15) {
            frontier.push(c.push(rng.random_bool(0.5)).unwrap());
        } else {
            frontier.push(c.push(false).unwrap());
            frontier.push(c.push(true).unwrap());
        }
    }
    leaves.sort_by_key(|c| c.to_sentinel());
    leaves
}

fn check_wavelet(
    seq: &[PrefixCode],
    codes: &[PrefixCode],
    queries: Option<(usize, &mut ChaCha8Rng)>,
) -> Result<(), String> {
    let tree = CodeTree::from_leaves(codes.iter().map(|c| (*c, c.to_sentinel())))
        .map_err(|e| e.to_string())?;
    let wt = WaveletTree::new(seq, tree).map_err(|e| e.to_string())?;
    let mut prefixes: Vec<PrefixCode> = codes
        .iter()
        .flat_map(|c| (0..=c.len()).map(move |l| c.truncate(l)))
        .collect();
    prefixes.sort_by_key(|c| c.to_sentinel());
    prefixes.dedup();
    let err = |e: Error| e.to_string();
    match queries {
        None => {
            for (i, c) in seq.iter().enumerate() {
                ensure!(wt.access(i).map_err(err)? == *c, "access({i})");
            }
            for p in &prefixes {
                let hits: Vec<usize> = (0..seq.len())
                    .filter(|&i| p.is_prefix_of(&seq[i]))
                    .collect();
                let leaf = codes.contains(p);
                let mut r = 0;
                for i in 0..=seq.len() {
                    ensure!(
                        wt.rank_prefix(p, i).map_err(err)? == r,
                        "rank_prefix({p}, {i})"
                    );
                    if leaf {
                        ensure!(wt.rank(p, i).map_err(err)? == r, "rank({p}, {i})");
                    }
                    if i < seq.len() && p.is_prefix_of(&seq[i]) {
                        r += 1;
                    }
                }
                for (k, &pos) in hits.iter().enumerate() {
                    ensure!(
                        wt.select_prefix(p, k + 1).map_err(err)? == pos,
                        "select_prefix({p}, {})",
                        k + 1
                    );
                    if leaf {
                        ensure!(
                            wt.select(p, k + 1).map_err(err)? == pos,
                            "select({p}, {})",
                            k + 1
                        );
                    }
                }
                ensure!(
                    matches!(
                        wt.select_prefix(p, hits.len() + 1),
                        Err(Error::NotFound { .. })
                    ),
                    "select_prefix past the last occurrence of {p}"
                );
            }
        }
        Some((n, rng)) => {
            // Plain prefix-count table per prefix, sampled positions.
            let sample: Vec<&PrefixCode> = (0..16)
                .map(|_| &prefixes[rng.random_range(0..prefixes.len())])
                .collect();
            for p in sample {
                let mut cum = Vec::with_capacity(seq.len() + 1);
                let mut pos = Vec::new();
                cum.push(0usize);
                for (i, c) in seq.iter().enumerate() {
                    let hit = p.is_prefix_of(c);
                    if hit {
                        pos.push(i);
                    }
                    cum.push(cum[i] + hit as usize);
                }
                for _ in 0..n / 16 {
                    let i = rng.random_range(0..=seq.len());
                    ensure!(
                        wt.rank_prefix(p, i).map_err(err)? == cum[i],
                        "rank_prefix({p}, {i})"
                    );
                    if i < seq.len() {
                        ensure!(wt.access(i).map_err(err)? == seq[i], "access({i})");
                    }
                    if !pos.is_empty() {
                        let k = rng.random_range(1..=pos.len());
                        ensure!(
                            wt.select_prefix(p, k).map_err(err)? == pos[k - 1],
                            "select_prefix({p}, {k})"
                        );
                    }
                }
            }
        }
    }
    ensure!(
        WaveletTree::from_bytes(&wt.to_bytes()).map_err(err)? == wt,
        "wavelet round trip"
    );
    Ok(())
}

fn sds_oracles() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut exhaustive = 0;
    for &len in &[0usize, 1, 63, 64, 65, 511, 512, 513, 4096, 1 << 14] {
        for density in [0.0, 0.02, 0.5, 0.98, 1.0] {
            let bits: Vec<bool> = (0..len).map(|_| rng.random_bool(density)).collect();
            check_bits(&bits, None)?;
            exhaustive += 1;
        }
    }
    for &len in &[0usize, 1, 100, 1000, 1 << 14] {
        for max_leaves in [1, 2, 7, 60] {
            let codes = random_codes(&mut rng, max_leaves);
            let seq: Vec<PrefixCode> = (0..len)
                .map(|_| codes[rng.random_range(0..codes.len())])
                .collect();
            check_wavelet(&seq, &codes, None)?;
            exhaustive += 1;
        }
    }
    let big: Vec<bool> = (0..1_000_000).map(|_| rng.random_bool(0.3)).collect();
    check_bits(&big, Some((100_000, &mut rng)))?;
    let codes = random_codes(&mut rng, 200);
    let seq: Vec<PrefixCode> = (0..1_000_000)
        .map(|_| codes[rng.random_range(0..codes.len())])
        .collect();
    check_wavelet(&seq, &codes, Some((100_000, &mut rng)))?;
    Ok(format!(
        "{exhaustive} exhaustive inputs up to 2^14, 10^5 sampled queries on 10^6 elements"
    ))
}

// 6

fn lubm_answers(db: &Database, naive: &Naive) -> Result<Vec<(u32, usize)>, String> {
    let mut counts = Vec::new();
    for (n, text) in synth::benchmark_queries() {
        let query = parse_query(&text).map_err(|e| e.to_string())?;
        let got = execute(db, &query, QueryOptions::default()).map_err(|e| format!("Q{n}: {e}"))?;
        let want = naive.eval(&query.pattern.triples, &query.variables());
        let got = sorted_rows(&got.rows);
        ensure!(
            got == want,
            "Q{n}: engine {} rows, naive {} rows",
            got.len(),
            want.len()
        );
        ensure!(
            !want.is_empty(),
            "Q{n} has no answers on the synthetic data"
        );
        counts.push((n, want.len()));
    }
    Ok(counts)
}

struct Lubm {
    db: Database,
    naive: Naive,
    raw_bytes: usize,
    triples: usize,
}

fn lubm() -> Lubm {
    let abox = synth::generate(&SynthConfig::default());
    let mut raw = Vec::new();
    write_ntriples(&mut raw, &abox).unwrap();
    let tbox = parse_ntriples_str(synth::UNIV_BENCH_TBOX, "tbox").unwrap();
    let naive = Naive::new(rdfs_closure(&tbox, &abox));
    let triples = abox.len();
    let db = Database::build(tbox, abox, BuildOptions::default())
        .expect("build")
        .0;
    Lubm {
        db,
        naive,
        raw_bytes: raw.len(),
        triples,
    }
}

fn lubm_queries() -> Check {
    let l = lubm();
    let counts = lubm_answers(&l.db, &l.naive)?;
    let size = l.db.to_bytes().len();
    let ratio = size as f64 / l.raw_bytes as f64;
    let sections: Vec<String> =
        l.db.section_sizes()
            .iter()
            .map(|(n, s)| format!("{n}={s}"))
            .collect();
    ensure!(
        ratio <= 0.35,
        "container {size} bytes is {:.1}% of {} raw bytes",
        ratio * 100.0,
        l.raw_bytes
    );
    Ok(format!(
        "{} triples; answers {:?}; container {} B = {:.1}% of {} B N-Triples (limit 35%); sections {}",
        l.triples,
        counts,
        size,
        ratio * 100.0,
        l.raw_bytes,
        sections.join(" ")
    ))
}

// 7

fn short_circuit_on(db: &Database) -> Check {
    let text = "PREFIX ub: <http://swat.cse.lehigh.edu/onto/univ-bench.owl#>
        SELECT ?x WHERE { ?x a ub:Course . ?x ub:name ?n . ?x ub:teacherOf <http://nowhere.example/unknown> }";
    for entailment in [Entailment::Rdfs, Entailment::Simple] {
        let r = db
            .query(
                text,
                QueryOptions {
                    entailment,
                    plan: PlanMode::Greedy,
                },
            )
            .map_err(|e| e.to_string())?;
        ensure!(r.unsatisfiable && r.rows.is_empty(), "not short-circuited");
        ensure!(
            r.stats.probes == 0 && r.stats.matches == 0,
            "store touched: {:?}",
            r.stats
        );
    }
    Ok("unknown IRI: empty, 0 store probes".into())
}

fn short_circuit() -> Check {
    short_circuit_on(&build(TBOX, SAMPLE, BuildOptions::default()))
}

// 8

fn round_trip() -> Check {
    let mut done = Vec::new();
    bitmaps_of(&restored(&build(TBOX, SAMPLE, first_seen())))?;
    codes_of(&restored(&build(TBOX, SAMPLE, BuildOptions::default())))?;
    let with = build(TBOX, ADVISOR, BuildOptions::default());
    let without = build(
        TBOX,
        ADVISOR,
        BuildOptions {
            materialize: false,
            ..Default::default()
        },
    );
    qr1_on(&restored(&with), &restored(&without))?;
    short_circuit_on(&restored(&build(TBOX, SAMPLE, BuildOptions::default())))?;
    done.push("suites 1-3, 7");
    // Suite 4 on restored copies (every random database is rebuilt from bytes).
    random_dbs(40)?;
    done.push("suite 4 (40 databases)");
    sds_round_trips()?;
    done.push("suite 5 structures");
    let l = lubm();
    lubm_answers(&restored(&l.db), &l.naive)?;
    done.push("suite 6");
    corrupted_headers(&l.db)?;
    done.push("corrupted headers rejected");
    Ok(done.join(", "))
}

fn sds_round_trips() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for len in [0, 1, 1000, 70_000] {
        let bits: Vec<bool> = (0..len).map(|_| rng.random_bool(0.4)).collect();
        let bv = BitVector::new(&bits);
        let back = BitVector::from_bytes(&bv.to_bytes()).map_err(|e| e.to_string())?;
        ensure!(
            back == bv && (0..=len).all(|i| back.rank1(i) == bv.rank1(i)),
            "bit vector answers differ"
        );
        let codes = random_codes(&mut rng, 30);
        let seq: Vec<PrefixCode> = (0..len)
            .map(|_| codes[rng.random_range(0..codes.len())])
            .collect();
        let tree = CodeTree::from_leaves(codes.iter().map(|c| (*c, c.to_sentinel())))
            .map_err(|e| e.to_string())?;
        let wt = WaveletTree::new(&seq, tree).map_err(|e| e.to_string())?;
        let back = WaveletTree::from_bytes(&wt.to_bytes()).map_err(|e| e.to_string())?;
        ensure!(back == wt, "wavelet tree differs after round trip");
        for c in &codes {
            ensure!(
                back.count_prefix(c).ok() == wt.count_prefix(c).ok(),
                "wavelet answers differ"
            );
        }
    }
    Ok(())
}

fn corrupted_headers(db: &Database) -> Result<(), String> {
    let bytes = db.to_bytes();
    let mut bad = bytes.clone();
    bad[0] = b'X';
    ensure!(
        matches!(
            Database::from_bytes(&bad),
            Err(Error::Format { offset: 0, .. })
        ),
        "bad magic accepted"
    );
    let mut bad = bytes.clone();
    bad[4] = 99;
    ensure!(
        matches!(
            Database::from_bytes(&bad),
            Err(Error::Format { offset: 4, .. })
        ),
        "bad version accepted"
    );
    ensure!(
        matches!(
            Database::from_bytes(&bytes[..bytes.len() - 1]),
            Err(Error::Format { .. })
        ),
        "truncation accepted"
    );
    ensure!(
        matches!(Database::from_bytes(&bytes[..5]), Err(Error::Format { .. })),
        "short header accepted"
    );
    let mut bad = bytes.clone();
    bad[10] ^= 0x40;
    ensure!(
        Database::from_bytes(&bad).is_err(),
        "corrupted section table accepted"
    );
    Ok(())
}
