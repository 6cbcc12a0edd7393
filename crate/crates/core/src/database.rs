//! Build pipeline and the `WFWL` container.
//!
//! Layout: magic `WFWL`, format version (u16), section count (u16), then one
//! table entry per section (id u16, offset u64, length u64) followed by the
//! section payloads in table order. All integers are little-endian.

use std::collections::HashMap;

use crate::code::PrefixCode;
use crate::codec::{Reader, Writer};
use crate::dictionary::{DictPolicy, Dictionary};
use crate::error::{Error, Result};
use crate::ingest;
use crate::ntriples::parse_ntriples_str;
use crate::ontology::{Hierarchy, HierarchyKind, Ontology};
use crate::stats::DatasetStats;
use crate::store::{EncodedTriple, Object, TripleStore};
use crate::term::{Term, Triple};

pub const MAGIC: &[u8; 4] = b"WFWL";
pub const FORMAT_VERSION: u16 = 1;

/// Section ids in container order.
pub const SECTIONS: [(u16, &str); 12] = [
    (1, "dictionary"),
    (2, "concept_tree"),
    (3, "property_tree"),
    (4, "equivalences"),
    (5, "stats"),
    (6, "B_p"),
    (7, "WT_p"),
    (8, "B_o"),
    (9, "B_c"),
    (10, "WT_oc"),
    (11, "WT_oi"),
    (12, "subjects"),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BuildOptions {
    pub policy: DictPolicy,
    pub materialize: bool,
    /// Keep asserted types that a materialized deeper type supersedes.
    pub keep_superseded: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            policy: DictPolicy::Sorted,
            materialize: true,
            keep_superseded: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BuildReport {
    pub input_triples: usize,
    pub schema_triples: usize,
    pub materialized: ingest::MaterializeReport,
    pub dropped_top_types: usize,
    pub stored_triples: usize,
}

/// Dictionary, ontology, statistics and triple index of one dataset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Database {
    pub dictionary: Dictionary,
    pub ontology: Ontology,
    pub stats: DatasetStats,
    pub store: TripleStore,
}

impl Database {
    /// Runs the full pipeline. Schema triples found in `abox` are moved to
    /// the schema.
    pub fn build(
        tbox: Vec<Triple>,
        abox: Vec<Triple>,
        options: BuildOptions,
    ) -> Result<(Database, BuildReport)> {
        let input_triples = tbox.len() + abox.len();
        let (mut schema, mut data) = ingest::split_tbox_abox(tbox);
        let (more_schema, more_data) = ingest::split_tbox_abox(abox);
        schema.extend(more_schema);
        data.extend(more_data);
        let dropped_top_types = ingest::drop_top_typing(&mut data);
        let usage = ingest::usage(&data)?;
        let mut ontology = Ontology::build(&schema, &usage)?;
        let (data, materialized) = if options.materialize {
            ingest::materialize_domain_range(data, &ontology, options.keep_superseded)?
        } else {
            (data, ingest::MaterializeReport::default())
        };
        let dictionary = Dictionary::build(ingest::instance_terms(&data), options.policy);
        let encoded = ingest::encode_and_sort(&data, &dictionary, &ontology)?;
        count_elements(&mut ontology, &encoded);
        let n_ids = dictionary.len() as u64;
        let store = TripleStore::build(
            &encoded,
            n_ids,
            ontology.properties.code_tree().clone(),
            ontology.concepts.code_tree().clone(),
        )?;
        let mut stats = DatasetStats::compute(&encoded, n_ids);
        stats.input_triples = input_triples as u64;
        stats.schema_triples = schema.len() as u64;
        stats.materialized_added = materialized.added.len() as u64;
        stats.materialized_removed = materialized.removed.len() as u64;
        stats.dropped_top_types = dropped_top_types as u64;
        let report = BuildReport {
            input_triples,
            schema_triples: schema.len(),
            materialized,
            dropped_top_types,
            stored_triples: encoded.len(),
        };
        Ok((
            Database {
                dictionary,
                ontology,
                stats,
                store,
            },
            report,
        ))
    }

    /// Parses both documents and builds.
    pub fn from_ntriples(
        tbox: &str,
        abox: &str,
        options: BuildOptions,
    ) -> Result<(Database, BuildReport)> {
        let t = parse_ntriples_str(tbox, "tbox")?;
        let a = parse_ntriples_str(abox, "abox")?;
        Self::build(t, a, options)
    }

    pub fn decode_object(&self, o: &Object) -> Result<Term> {
        match o {
            Object::Instance(id) => self.dictionary.decode(*id),
            Object::Concept(c) => self.concept_iri(c).map(Term::iri),
        }
    }

    pub fn concept_iri(&self, stored: &PrefixCode) -> Result<&str> {
        self.ontology
            .concepts
            .iri_of_stored(stored)
            .ok_or_else(|| Error::Internal(format!("no concept stored under code {stored}")))
    }

    pub fn property_iri(&self, stored: &PrefixCode) -> Result<&str> {
        self.ontology
            .properties
            .iri_of_stored(stored)
            .ok_or_else(|| Error::Internal(format!("no property stored under code {stored}")))
    }

    pub fn decode_triple(&self, t: &EncodedTriple) -> Result<Triple> {
        Ok(Triple {
            subject: self.dictionary.decode(t.subject)?,
            predicate: self.property_iri(&t.predicate)?.to_owned(),
            object: self.decode_object(&t.object)?,
        })
    }

    /// Every stored triple, decoded, in store order.
    pub fn triples(&self) -> impl Iterator<Item = Result<Triple>> + '_ {
        self.store.iter().map(move |t| self.decode_triple(&t))
    }

    fn section_payloads(&self) -> Vec<Vec<u8>> {
        let mut out = Vec::with_capacity(SECTIONS.len());
        let mut w = Writer::new();
        self.dictionary.write_to(&mut w);
        out.push(w.into_inner());
        let mut w = Writer::new();
        self.ontology.concepts.write_topology(&mut w);
        out.push(w.into_inner());
        let mut w = Writer::new();
        self.ontology.properties.write_topology(&mut w);
        self.ontology.write_domains(&mut w);
        out.push(w.into_inner());
        let mut w = Writer::new();
        self.ontology.concepts.write_equivalences(&mut w);
        self.ontology.properties.write_equivalences(&mut w);
        out.push(w.into_inner());
        let mut w = Writer::new();
        self.stats.write_to(&mut w);
        self.ontology.concepts.write_counts(&mut w);
        self.ontology.properties.write_counts(&mut w);
        out.push(w.into_inner());
        let mut store = self.store.write_sections();
        let subjects = store.remove(0);
        out.extend(store);
        out.push(subjects);
        out
    }

    /// Serialized size of each section, in container order.
    pub fn section_sizes(&self) -> Vec<(&'static str, usize)> {
        SECTIONS
            .iter()
            .map(|s| s.1)
            .zip(self.section_payloads().iter().map(Vec::len))
            .collect()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let payloads = self.section_payloads();
        let mut w = Writer::new();
        w.buf.extend_from_slice(MAGIC);
        w.u16(FORMAT_VERSION);
        w.u16(payloads.len() as u16);
        let header = 4 + 2 + 2 + payloads.len() * (2 + 8 + 8);
        let mut offset = header as u64;
        for ((id, _), p) in SECTIONS.iter().zip(&payloads) {
            w.u16(*id);
            w.u64(offset);
            w.u64(p.len() as u64);
            offset += p.len() as u64;
        }
        for p in payloads {
            w.buf.extend_from_slice(&p);
        }
        w.into_inner()
    }

    pub fn write_to<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        out.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Database> {
        let mut r = Reader::new(bytes, 0);
        if r.take(4)
            .map_err(|_| Error::format(0, "truncated header"))?
            != MAGIC
        {
            return Err(Error::format(0, "bad magic, not a WFWL container"));
        }
        let version = r.u16()?;
        if version != FORMAT_VERSION {
            return Err(Error::format(
                4,
                format!("unsupported format version {version}"),
            ));
        }
        let at = r.offset();
        let count = r.u16()? as usize;
        if count != SECTIONS.len() {
            return Err(Error::format(
                at,
                format!("expected {} sections, found {count}", SECTIONS.len()),
            ));
        }
        let header_end = 8 + count * 18;
        let mut spans = Vec::with_capacity(count);
        let mut expected_offset = header_end as u64;
        for &(want, name) in &SECTIONS {
            let at = r.offset();
            let id = r.u16()?;
            let offset = r.u64()?;
            let len = r.u64()?;
            if id != want {
                return Err(Error::format(
                    at,
                    format!("expected section {want} ({name}), found {id}"),
                ));
            }
            if offset != expected_offset
                || offset
                    .checked_add(len)
                    .is_none_or(|end| end > bytes.len() as u64)
            {
                return Err(Error::format(
                    at,
                    format!("section {name} spans outside the file"),
                ));
            }
            spans.push((offset as usize, len as usize));
            expected_offset = offset + len;
        }
        if expected_offset != bytes.len() as u64 {
            return Err(Error::format(
                expected_offset as usize,
                "trailing bytes after last section",
            ));
        }
        let mut readers: Vec<Reader<'_>> = spans
            .iter()
            .map(|&(o, l)| Reader::new(&bytes[o..o + l], o))
            .collect();

        let dictionary = Dictionary::read_from(&mut readers[0])?;
        let mut concept_elems = Hierarchy::read_topology(&mut readers[1])?;
        let mut property_elems = Hierarchy::read_topology(&mut readers[2])?;
        let (domains, ranges) =
            Ontology::read_domains(&mut readers[2], property_elems.len(), concept_elems.len())?;
        Hierarchy::read_equivalences(&mut readers[3], &mut concept_elems)?;
        Hierarchy::read_equivalences(&mut readers[3], &mut property_elems)?;
        let stats = DatasetStats::read_from(&mut readers[4])?;
        Hierarchy::read_counts(&mut readers[4], &mut concept_elems)?;
        Hierarchy::read_counts(&mut readers[4], &mut property_elems)?;
        let wrap = |off: usize| {
            move |e: Error| match e {
                Error::Format { .. } => e,
                other => Error::format(off, other),
            }
        };
        let concepts =
            Hierarchy::assemble(HierarchyKind::Concept, concept_elems).map_err(wrap(spans[1].0))?;
        let properties = Hierarchy::assemble(HierarchyKind::Property, property_elems)
            .map_err(wrap(spans[2].0))?;
        for (i, rd) in readers.iter().enumerate().take(5) {
            if !rd.is_empty() {
                return rd.fail(format!("trailing bytes in section {}", SECTIONS[i].1));
            }
        }
        let mut it = readers.drain(5..);
        let (b_p, wt_p, b_o, b_c, wt_oc, wt_oi, subjects) = (
            it.next().unwrap(),
            it.next().unwrap(),
            it.next().unwrap(),
            it.next().unwrap(),
            it.next().unwrap(),
            it.next().unwrap(),
            it.next().unwrap(),
        );
        let store = TripleStore::read_sections([subjects, b_p, wt_p, b_o, b_c, wt_oc, wt_oi])?;
        if store.wt_p().code_tree() != properties.code_tree()
            || store.wt_oc().code_tree() != concepts.code_tree()
        {
            return Err(Error::format(
                spans[6].0,
                "store code trees disagree with the ontology",
            ));
        }
        if stats.n_triples != store.len() as u64 {
            return Err(Error::format(
                spans[4].0,
                "statistics disagree with the store",
            ));
        }
        let ontology = Ontology::from_parts(concepts, properties, domains, ranges);
        Ok(Database {
            dictionary,
            ontology,
            stats,
            store,
        })
    }

    pub fn read_from<R: std::io::Read>(mut input: R) -> Result<Database> {
        let mut bytes = Vec::new();
        input.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }
}

fn count_elements(ontology: &mut Ontology, triples: &[EncodedTriple]) {
    let mut concepts: HashMap<usize, u64> = HashMap::new();
    let mut properties: HashMap<usize, u64> = HashMap::new();
    for t in triples {
        if let Some(p) = ontology
            .properties
            .index_of_stored(t.predicate.to_sentinel())
        {
            *properties.entry(p).or_default() += 1;
        }
        if let Object::Concept(c) = t.object {
            if let Some(i) = ontology.concepts.index_of_stored(c.to_sentinel()) {
                *concepts.entry(i).or_default() += 1;
            }
        }
    }
    ontology.concepts.set_counts(&concepts);
    ontology.properties.set_counts(&properties);
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    const TBOX: &str = include_str!("../tests/data/lubm_tbox.nt");
    const SAMPLE: &str = include_str!("../tests/data/sample_abox.nt");

    fn sample(policy: DictPolicy) -> Database {
        Database::from_ntriples(
            TBOX,
            SAMPLE,
            BuildOptions {
                policy,
                ..Default::default()
            },
        )
        .unwrap()
        .0
    }

    #[test]
    fn sample_bitmaps() {
        let db = sample(DictPolicy::FirstSeen);
        assert_eq!(db.store.b_p().to_string(), "101001000101");
        assert_eq!(db.store.b_o().to_string(), "1111111101111");
        assert_eq!(db.store.b_c().to_string(), "1010010000101");
        assert_eq!(db.stats.n_subjects, 5);
        let ty = db.ontology.properties.get(crate::term::RDF_TYPE).unwrap();
        assert_eq!(ty.direct, 5);
        let prof = db
            .ontology
            .concepts
            .get("http://swat.cse.lehigh.edu/onto/univ-bench.owl#Professor")
            .unwrap();
        assert_eq!((prof.direct, prof.total), (0, 1));
    }

    #[test]
    fn container_round_trip_is_byte_exact() {
        for policy in [DictPolicy::Sorted, DictPolicy::FirstSeen] {
            let db = sample(policy);
            let bytes = db.to_bytes();
            let back = Database::from_bytes(&bytes).unwrap();
            assert_eq!(back, db);
            assert_eq!(back.to_bytes(), bytes);
            let sizes = db.section_sizes();
            assert_eq!(sizes.len(), 12);
            assert_eq!(
                sizes.iter().map(|s| s.1).sum::<usize>() + 8 + 12 * 18,
                bytes.len()
            );
        }
    }

    #[test]
    fn dump_equals_input() {
        let db = sample(DictPolicy::Sorted);
        let got: BTreeSet<String> = db.triples().map(|t| t.unwrap().to_string()).collect();
        let want: BTreeSet<String> = SAMPLE.lines().map(str::to_owned).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn corrupted_headers_are_rejected() {
        let bytes = sample(DictPolicy::Sorted).to_bytes();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(
            Database::from_bytes(&bad),
            Err(Error::Format { offset: 0, .. })
        ));
        let mut bad = bytes.clone();
        bad[4] = 9;
        assert!(matches!(
            Database::from_bytes(&bad),
            Err(Error::Format { offset: 4, .. })
        ));
        assert!(matches!(
            Database::from_bytes(&bytes[..bytes.len() - 3]),
            Err(Error::Format { .. })
        ));
        assert!(matches!(
            Database::from_bytes(&bytes[..3]),
            Err(Error::Format { .. })
        ));
        assert!(Database::from_bytes(&[]).is_err());
    }

    #[test]
    fn flipped_payload_bytes_never_panic() {
        let bytes = sample(DictPolicy::FirstSeen).to_bytes();
        for i in (0..bytes.len()).step_by(7) {
            let mut bad = bytes.clone();
            bad[i] ^= 0x5a;
            let _ = Database::from_bytes(&bad);
        }
    }

    #[test]
    fn empty_database() {
        let (db, report) =
            Database::build(Vec::new(), Vec::new(), BuildOptions::default()).unwrap();
        assert_eq!(report.stored_triples, 0);
        assert_eq!(db.store.len(), 0);
        let back = Database::from_bytes(&db.to_bytes()).unwrap();
        assert_eq!(back, db);
    }
}
