//! Dataset statistics used for planning and reporting.

use std::collections::HashSet;

use crate::codec::{Reader, Writer};
use crate::error::Result;
use crate::store::{EncodedTriple, Object};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DatasetStats {
    pub n_triples: u64,
    pub n_subjects: u64,
    pub n_predicates: u64,
    /// Distinct objects (instances and concepts).
    pub n_objects: u64,
    /// Occurrences of id `i + 1` as subject.
    subject_occ: Vec<u32>,
    /// Occurrences of id `i + 1` as instance object.
    object_occ: Vec<u32>,
    /// Ingest counters kept for `info`.
    pub input_triples: u64,
    pub schema_triples: u64,
    pub materialized_added: u64,
    pub materialized_removed: u64,
    pub dropped_top_types: u64,
}

impl DatasetStats {
    pub fn compute(triples: &[EncodedTriple], n_ids: u64) -> Self {
        let mut s = DatasetStats {
            n_triples: triples.len() as u64,
            subject_occ: vec![0; n_ids as usize],
            object_occ: vec![0; n_ids as usize],
            ..Default::default()
        };
        let mut preds = HashSet::new();
        let mut concepts = HashSet::new();
        for t in triples {
            s.subject_occ[t.subject as usize - 1] += 1;
            preds.insert(t.predicate);
            match t.object {
                Object::Instance(id) => s.object_occ[id as usize - 1] += 1,
                Object::Concept(c) => {
                    concepts.insert(c);
                }
            }
        }
        s.n_subjects = s.subject_occ.iter().filter(|&&c| c > 0).count() as u64;
        s.n_predicates = preds.len() as u64;
        s.n_objects =
            s.object_occ.iter().filter(|&&c| c > 0).count() as u64 + concepts.len() as u64;
        s
    }

    /// Triples with instance `id` as subject.
    pub fn subject_occurrences(&self, id: u64) -> u64 {
        id.checked_sub(1)
            .and_then(|i| self.subject_occ.get(i as usize))
            .map_or(0, |&c| c as u64)
    }

    /// Triples with instance `id` as object.
    pub fn object_occurrences(&self, id: u64) -> u64 {
        id.checked_sub(1)
            .and_then(|i| self.object_occ.get(i as usize))
            .map_or(0, |&c| c as u64)
    }

    pub(crate) fn write_to(&self, w: &mut Writer) {
        for v in [
            self.n_triples,
            self.n_subjects,
            self.n_predicates,
            self.n_objects,
            self.input_triples,
            self.schema_triples,
            self.materialized_added,
            self.materialized_removed,
            self.dropped_top_types,
        ] {
            w.varint(v);
        }
        w.varint(self.subject_occ.len() as u64);
        for v in self.subject_occ.iter().chain(&self.object_occ) {
            w.varint(*v as u64);
        }
    }

    pub(crate) fn read_from(r: &mut Reader<'_>) -> Result<Self> {
        let mut head = [0u64; 9];
        for v in &mut head {
            *v = r.varint()?;
        }
        let n = r.len(r.remaining())?;
        let mut occ = Vec::with_capacity(2 * n);
        for _ in 0..2 * n {
            let v = r.varint()?;
            if v > u32::MAX as u64 {
                return r.fail("occurrence count overflow");
            }
            occ.push(v as u32);
        }
        let object_occ = occ.split_off(n);
        Ok(DatasetStats {
            n_triples: head[0],
            n_subjects: head[1],
            n_predicates: head[2],
            n_objects: head[3],
            subject_occ: occ,
            object_occ,
            input_triples: head[4],
            schema_triples: head[5],
            materialized_added: head[6],
            materialized_removed: head[7],
            dropped_top_types: head[8],
        })
    }
}
