//! Deterministic university data in the shape of the LUBM benchmark.
//!
//! IRIs follow the LUBM generator (`http://www.Department0.University0.edu/
//! GraduateCourse0` and so on) so the benchmark queries apply unchanged.
//! Heads of department carry `headOf` but no `worksFor`, some graduate
//! students are also research assistants, and teaching and advising
//! relations leave types for domain/range materialization to add.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::term::{Term, Triple, RDF_TYPE};

pub const UB: &str = "http://swat.cse.lehigh.edu/onto/univ-bench.owl#";

/// Schema of the benchmark ontology (RDFS subset) in N-Triples.
pub const UNIV_BENCH_TBOX: &str = include_str!("../tests/data/lubm_tbox.nt");

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SynthConfig {
    pub universities: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    /// About 50k triples.
    fn default() -> Self {
        SynthConfig {
            universities: 14,
            seed: 7,
        }
    }
}

struct Out {
    triples: Vec<Triple>,
}

impl Out {
    fn add(&mut self, s: &str, p: &str, o: Term) {
        self.triples
            .push(Triple::new(Term::iri(s), format!("{UB}{p}"), o));
    }

    fn link(&mut self, s: &str, p: &str, o: &str) {
        self.add(s, p, Term::iri(o));
    }

    fn typed(&mut self, s: &str, class: &str) {
        self.triples.push(Triple::new(
            Term::iri(s),
            RDF_TYPE,
            Term::iri(format!("{UB}{class}")),
        ));
    }

    fn person(&mut self, iri: &str, class: &str, name: &str, u: usize, d: usize) {
        self.typed(iri, class);
        self.add(iri, "name", Term::literal(name));
        self.add(
            iri,
            "emailAddress",
            Term::literal(format!("{name}@Department{d}.University{u}.edu")),
        );
        self.add(
            iri,
            "telephone",
            Term::literal(format!("xxx-{u:03}-{d:02}{:04}", iri.len())),
        );
    }
}

pub fn university(u: usize) -> String {
    format!("http://www.University{u}.edu")
}

pub fn department(u: usize, d: usize) -> String {
    format!("http://www.Department{d}.University{u}.edu")
}

/// Generates the ABox. The same configuration always yields the same
/// triples in the same order.
pub fn generate(cfg: &SynthConfig) -> Vec<Triple> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Out {
        triples: Vec::new(),
    };
    let n = cfg.universities.max(1);
    for u in 0..n {
        let univ = university(u);
        out.typed(&univ, "University");
        out.add(&univ, "name", Term::literal(format!("University{u}")));
        for d in 0..rng.random_range(3..=5) {
            department_data(&mut out, &mut rng, n, u, d);
        }
    }
    out.triples
}

fn department_data(out: &mut Out, rng: &mut ChaCha8Rng, n_univ: usize, u: usize, d: usize) {
    let dept = department(u, d);
    out.typed(&dept, "Department");
    out.add(&dept, "name", Term::literal(format!("Department{d}")));
    out.link(&dept, "subOrganizationOf", &university(u));

    let n_courses = rng.random_range(10..=16);
    let n_grad_courses = rng.random_range(6..=10);
    let courses: Vec<String> = (0..n_courses)
        .map(|i| format!("{dept}/Course{i}"))
        .collect();
    let grad_courses: Vec<String> = (0..n_grad_courses)
        .map(|i| format!("{dept}/GraduateCourse{i}"))
        .collect();
    for (i, c) in courses.iter().enumerate() {
        out.typed(c, "Course");
        out.add(c, "name", Term::literal(format!("Course{i}")));
    }
    for (i, c) in grad_courses.iter().enumerate() {
        out.typed(c, "GraduateCourse");
        out.add(c, "name", Term::literal(format!("GraduateCourse{i}")));
    }

    let ranks = [
        ("FullProfessor", rng.random_range(2..=3)),
        ("AssociateProfessor", rng.random_range(3..=4)),
        ("AssistantProfessor", rng.random_range(2..=4)),
        ("Lecturer", rng.random_range(1..=2)),
    ];
    let mut faculty = Vec::new();
    let mut professors = Vec::new();
    let (mut next_course, mut next_grad) = (0, 0);
    for (class, count) in ranks {
        for i in 0..count {
            let iri = format!("{dept}/{class}{i}");
            out.person(&iri, class, &format!("{class}{i}"), u, d);
            if class == "FullProfessor" && i == 0 {
                out.link(&iri, "headOf", &dept);
            } else {
                out.link(&iri, "worksFor", &dept);
            }
            for p in [
                "undergraduateDegreeFrom",
                "mastersDegreeFrom",
                "doctoralDegreeFrom",
            ] {
                if class != "Lecturer" || p == "undergraduateDegreeFrom" {
                    out.link(&iri, p, &university(rng.random_range(0..n_univ + 3)));
                }
            }
            out.add(
                &iri,
                "researchInterest",
                Term::literal(format!("Research{}", rng.random_range(0..30))),
            );
            // Every course gets a teacher before any teacher gets a second one.
            for _ in 0..rng.random_range(1..=2) {
                if next_course < courses.len() {
                    out.link(&iri, "teacherOf", &courses[next_course]);
                    next_course += 1;
                }
            }
            if class != "Lecturer" && next_grad < grad_courses.len() {
                out.link(&iri, "teacherOf", &grad_courses[next_grad]);
                next_grad += 1;
            }
            for k in 0..rng.random_range(1..=4) {
                let publication = format!("{iri}/Publication{k}");
                out.typed(&publication, "Publication");
                out.add(
                    &publication,
                    "name",
                    Term::literal(format!("Publication{k}")),
                );
                out.link(&publication, "publicationAuthor", &iri);
            }
            if class != "Lecturer" {
                professors.push(iri.clone());
            }
            faculty.push(iri);
        }
    }

    let n_under = faculty.len() * rng.random_range(3..=5);
    for i in 0..n_under {
        let iri = format!("{dept}/UndergraduateStudent{i}");
        out.person(
            &iri,
            "UndergraduateStudent",
            &format!("UndergraduateStudent{i}"),
            u,
            d,
        );
        out.link(&iri, "memberOf", &dept);
        for _ in 0..rng.random_range(2..=4) {
            out.link(
                &iri,
                "takesCourse",
                &courses[rng.random_range(0..courses.len())],
            );
        }
        if rng.random_bool(0.2) {
            out.link(
                &iri,
                "advisor",
                &professors[rng.random_range(0..professors.len())],
            );
        }
    }

    let n_grad = faculty.len() * rng.random_range(1..=2);
    for i in 0..n_grad {
        let iri = format!("{dept}/GraduateStudent{i}");
        out.person(
            &iri,
            "GraduateStudent",
            &format!("GraduateStudent{i}"),
            u,
            d,
        );
        out.link(&iri, "memberOf", &dept);
        out.link(
            &iri,
            "undergraduateDegreeFrom",
            &university(rng.random_range(0..n_univ + 3)),
        );
        for _ in 0..rng.random_range(1..=3) {
            out.link(
                &iri,
                "takesCourse",
                &grad_courses[rng.random_range(0..grad_courses.len())],
            );
        }
        out.link(
            &iri,
            "advisor",
            &professors[rng.random_range(0..professors.len())],
        );
        if rng.random_bool(0.25) {
            out.link(
                &iri,
                "teachingAssistantOf",
                &courses[rng.random_range(0..courses.len())],
            );
        } else if rng.random_bool(0.3) {
            out.typed(&iri, "ResearchAssistant");
        }
        if rng.random_bool(0.3) {
            let author = &faculty[rng.random_range(0..faculty.len())];
            out.link(&format!("{author}/Publication0"), "publicationAuthor", &iri);
        }
    }
}

/// The benchmark queries used by the acceptance suite, as `(number, text)`.
///
/// Two typos of the published text are fixed: `rdf:typetype` reads
/// `rdf:type`, and `mailAddress` reads `emailAddress`.
pub fn benchmark_queries() -> Vec<(u32, String)> {
    let head =
        format!("PREFIX rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#>\nPREFIX ub: <{UB}>\n");
    [
        (1, "SELECT ?x WHERE { ?x rdf:type ub:GraduateStudent . ?x ub:takesCourse <http://www.Department0.University0.edu/GraduateCourse0> }"),
        (2, "SELECT ?x ?y ?z WHERE { ?x rdf:type ub:GraduateStudent . ?y rdf:type ub:University . ?z rdf:type ub:Department . \
             ?x ub:memberOf ?z . ?z ub:subOrganizationOf ?y . ?x ub:undergraduateDegreeFrom ?y }"),
        (4, "SELECT ?x ?y1 ?y2 ?y3 WHERE { ?x rdf:type ub:Professor . ?x ub:worksFor <http://www.Department0.University0.edu> . \
             ?x ub:name ?y1 . ?x ub:emailAddress ?y2 . ?x ub:telephone ?y3 }"),
        (5, "SELECT ?x WHERE { ?x rdf:type ub:Person . ?x ub:memberOf <http://www.Department0.University0.edu> }"),
        (6, "SELECT ?x WHERE { ?x rdf:type ub:Student }"),
        (7, "SELECT ?x ?y WHERE { ?x rdf:type ub:Student . ?y rdf:type ub:Course . ?x ub:takesCourse ?y . \
             <http://www.Department0.University0.edu/AssociateProfessor0> ub:teacherOf ?y }"),
        (10, "SELECT ?x WHERE { ?x rdf:type ub:Student . ?x ub:takesCourse <http://www.Department0.University0.edu/GraduateCourse0> }"),
        (14, "SELECT ?x WHERE { ?x rdf:type ub:UndergraduateStudent }"),
    ]
    .into_iter()
    .map(|(n, q)| (n, format!("{head}{q}")))
    .collect()
}
