//! Two-layer succinct triple index.
//!
//! Layer one maps subjects to predicate nodes (`B_p`, `WT_p`), layer two maps
//! predicate nodes to objects (`B_o`), with objects split by `B_c` into
//! concept codes (`WT_oc`, objects of `rdf:type`) and instance ids (`WT_oi`).

use crate::bits::{BitVector, BitVectorBuilder};
use crate::code::PrefixCode;
use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};
use crate::ontology::PropertyClass;
use crate::wavelet::{CodeTree, WaveletTree};

/// An object in encoded form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Object {
    /// Stored concept code (objects of `rdf:type`).
    Concept(PrefixCode),
    /// Instance dictionary id.
    Instance(u64),
}

impl Object {
    fn key(&self) -> u64 {
        match self {
            Object::Concept(c) => c.to_sentinel(),
            Object::Instance(id) => *id,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EncodedTriple {
    pub subject: u64,
    /// Stored property code.
    pub predicate: PrefixCode,
    pub object: Object,
}

impl EncodedTriple {
    pub fn sort_key(&self) -> (u64, u64, u64) {
        (
            self.subject,
            self.predicate.to_sentinel(),
            self.object.key(),
        )
    }
}

/// Object slot of a pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObjectPattern {
    Any,
    Instance(u64),
    /// Every concept code starting with this prefix.
    Concept(PrefixCode),
}

/// A triple pattern over encoded values. The predicate, when given, is a
/// prefix: a stored code matches exactly, an element code matches the
/// element and everything below it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TriplePattern {
    pub subject: Option<u64>,
    pub predicate: Option<PrefixCode>,
    pub object: ObjectPattern,
}

impl TriplePattern {
    pub fn new(subject: Option<u64>, predicate: Option<PrefixCode>, object: ObjectPattern) -> Self {
        TriplePattern {
            subject,
            predicate,
            object,
        }
    }

    pub fn any() -> Self {
        Self::new(None, None, ObjectPattern::Any)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TripleStore {
    /// Bit `id` set when instance `id` is a subject.
    subjects: BitVector,
    b_p: BitVector,
    wt_p: WaveletTree,
    b_o: BitVector,
    b_c: BitVector,
    wt_oc: WaveletTree,
    wt_oi: WaveletTree,
    id_width: u8,
}

/// Bits per instance id in `WT_oi` for a dictionary of `n` terms.
pub fn id_width(n: u64) -> u8 {
    (64 - n.leading_zeros()).max(1) as u8
}

type TripleIter<'a> = Box<dyn Iterator<Item = EncodedTriple> + 'a>;

impl TripleStore {
    /// Builds the index from triples sorted by (subject, predicate, object)
    /// without duplicates. `n_ids` is the dictionary size; the trees give
    /// the shapes of `WT_p` and `WT_oc`.
    pub fn build(
        triples: &[EncodedTriple],
        n_ids: u64,
        property_tree: CodeTree,
        concept_tree: CodeTree,
    ) -> Result<Self> {
        for w in triples.windows(2) {
            if w[0].sort_key() >= w[1].sort_key() {
                return Err(Error::Build(format!(
                    "triples not strictly sorted at {:?}",
                    w[1]
                )));
            }
        }
        let type_code = PropertyClass::Type.prefix();
        let mut subjects = BitVectorBuilder::with_capacity(n_ids as usize + 1);
        let mut b_p = BitVectorBuilder::new();
        let mut preds = Vec::new();
        let mut b_o = BitVectorBuilder::with_capacity(triples.len());
        let mut b_c = BitVectorBuilder::with_capacity(triples.len());
        let mut concepts = Vec::new();
        let mut instances = Vec::new();
        let width = id_width(n_ids);
        let mut last_subject = 0u64;
        for (i, t) in triples.iter().enumerate() {
            if t.subject == 0 || t.subject > n_ids {
                return Err(Error::Build(format!(
                    "subject id {} outside dictionary",
                    t.subject
                )));
            }
            let new_subject = i == 0 || t.subject != triples[i - 1].subject;
            let new_pred = new_subject || t.predicate != triples[i - 1].predicate;
            if new_subject {
                while (subjects.len() as u64) < t.subject {
                    subjects.push(false);
                }
                subjects.push(true);
                last_subject = t.subject;
            }
            if new_pred {
                b_p.push(new_subject);
                preds.push(t.predicate);
            }
            b_o.push(new_pred);
            match t.object {
                Object::Concept(c) => {
                    if t.predicate != type_code {
                        return Err(Error::Build(format!(
                            "concept object under non-type predicate {}",
                            t.predicate
                        )));
                    }
                    b_c.push(true);
                    concepts.push(c);
                }
                Object::Instance(id) => {
                    if t.predicate == type_code {
                        return Err(Error::Build("instance object under rdf:type".into()));
                    }
                    if id == 0 || id > n_ids {
                        return Err(Error::Build(format!("object id {id} outside dictionary")));
                    }
                    b_c.push(false);
                    instances.push(PrefixCode::new(id, width)?);
                }
            }
        }
        debug_assert!(last_subject <= n_ids);
        while (subjects.len() as u64) <= n_ids {
            subjects.push(false);
        }
        let mut ids: Vec<u64> = instances.iter().map(PrefixCode::bits).collect();
        ids.sort_unstable();
        ids.dedup();
        let oi_tree = CodeTree::fixed_width(ids, width)?;
        let store = TripleStore {
            subjects: subjects.finish(),
            b_p: b_p.finish(),
            wt_p: WaveletTree::new(&preds, property_tree)?,
            b_o: b_o.finish(),
            b_c: b_c.finish(),
            wt_oc: WaveletTree::new(&concepts, concept_tree)?,
            wt_oi: WaveletTree::new(&instances, oi_tree)?,
            id_width: width,
        };
        store.check_invariants()?;
        Ok(store)
    }

    /// Structural invariants linking the layers.
    pub fn check_invariants(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Build(format!("store invariant violated: {m}")));
        if self.b_p.len() != self.wt_p.len() {
            return fail("|B_p| != |WT_p|");
        }
        if self.b_p.count_ones() != self.subjects.count_ones() {
            return fail("subjects in B_p differ from subject bitmap");
        }
        if self.b_o.len() != self.b_c.len() || self.b_o.count_ones() != self.b_p.len() {
            return fail("B_o does not match predicate nodes");
        }
        if self.b_c.count_ones() != self.wt_oc.len() || self.b_c.count_zeros() != self.wt_oi.len() {
            return fail("B_c does not split objects between WT_oc and WT_oi");
        }
        if (!self.b_p.is_empty() && !self.b_p.get(0)) || (!self.b_o.is_empty() && !self.b_o.get(0))
        {
            return fail("first node does not open a group");
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.b_o.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b_o.is_empty()
    }

    pub fn n_subjects(&self) -> usize {
        self.b_p.count_ones()
    }

    pub fn n_predicate_nodes(&self) -> usize {
        self.b_p.len()
    }

    pub fn b_p(&self) -> &BitVector {
        &self.b_p
    }

    pub fn b_o(&self) -> &BitVector {
        &self.b_o
    }

    pub fn b_c(&self) -> &BitVector {
        &self.b_c
    }

    pub fn wt_p(&self) -> &WaveletTree {
        &self.wt_p
    }

    pub fn wt_oc(&self) -> &WaveletTree {
        &self.wt_oc
    }

    pub fn wt_oi(&self) -> &WaveletTree {
        &self.wt_oi
    }

    /// 1-based subject ordinal of instance `id`.
    fn ordinal(&self, id: u64) -> Option<usize> {
        let i = usize::try_from(id).ok()?;
        (i < self.subjects.len() && self.subjects.get(i)).then(|| self.subjects.rank1(i + 1))
    }

    fn subject_id(&self, ordinal: usize) -> u64 {
        self.subjects
            .select1(ordinal)
            .expect("ordinal within subject count") as u64
    }

    /// Predicate-node interval of the subject with this ordinal.
    fn predicate_range(&self, ordinal: usize) -> (usize, usize) {
        let lo = self
            .b_p
            .select1(ordinal)
            .expect("ordinal within subject count");
        (lo, self.b_p.select1(ordinal + 1).unwrap_or(self.b_p.len()))
    }

    /// Object interval of predicate node `j`.
    fn object_range(&self, j: usize) -> (usize, usize) {
        let lo = self.b_o.select1(j + 1).expect("node within B_p");
        (lo, self.b_o.select1(j + 2).unwrap_or(self.b_o.len()))
    }

    fn object_at(&self, g: usize) -> Object {
        if self.b_c.get(g) {
            Object::Concept(
                self.wt_oc
                    .access(self.b_c.rank1(g))
                    .expect("position in WT_oc"),
            )
        } else {
            Object::Instance(
                self.wt_oi
                    .access(self.b_c.rank0(g))
                    .expect("position in WT_oi")
                    .bits(),
            )
        }
    }

    fn node_of(&self, g: usize) -> usize {
        self.b_o.rank1(g + 1) - 1
    }

    fn subject_of_node(&self, j: usize) -> u64 {
        self.subject_id(self.b_p.rank1(j + 1))
    }

    fn triple(&self, subject: u64, j: usize, g: usize) -> EncodedTriple {
        EncodedTriple {
            subject,
            predicate: self.wt_p.access(j).expect("node in WT_p"),
            object: self.object_at(g),
        }
    }

    fn triple_at(&self, g: usize) -> EncodedTriple {
        let j = self.node_of(g);
        self.triple(self.subject_of_node(j), j, g)
    }

    /// Code of instance `id` in `WT_oi`, if it occurs there at all.
    fn instance_code(&self, id: u64) -> Option<PrefixCode> {
        let c = PrefixCode::new(id, self.id_width).ok()?;
        self.wt_oi.code_tree().leaf_symbol(&c).map(|_| c)
    }

    fn prefix_in(&self, wt: &WaveletTree, p: &PrefixCode) -> bool {
        wt.code_tree().contains_path(p)
    }

    /// Predicate nodes in `[lo, hi)` whose code starts with `p`.
    fn nodes_in(
        &self,
        lo: usize,
        hi: usize,
        p: Option<PrefixCode>,
    ) -> Box<dyn Iterator<Item = usize> + '_> {
        match p {
            None => Box::new(lo..hi),
            Some(p) if !self.prefix_in(&self.wt_p, &p) => Box::new(std::iter::empty()),
            Some(p) => {
                let r0 = self.wt_p.rank_prefix(&p, lo).expect("valid prefix");
                let r1 = self.wt_p.rank_prefix(&p, hi).expect("valid prefix");
                Box::new(
                    (r0 + 1..=r1)
                        .map(move |k| self.wt_p.select_prefix(&p, k).expect("k within rank")),
                )
            }
        }
    }

    /// Global object positions in `[a, b)` matching `o`, ascending.
    fn objects_in(
        &self,
        a: usize,
        b: usize,
        o: ObjectPattern,
    ) -> Box<dyn Iterator<Item = usize> + '_> {
        match o {
            ObjectPattern::Any => Box::new(a..b),
            ObjectPattern::Instance(id) => {
                let Some(c) = self.instance_code(id) else {
                    return Box::new(std::iter::empty());
                };
                let (x0, x1) = (self.b_c.rank0(a), self.b_c.rank0(b));
                let r0 = self.wt_oi.rank(&c, x0).expect("leaf code");
                let r1 = self.wt_oi.rank(&c, x1).expect("leaf code");
                Box::new((r0 + 1..=r1).map(move |k| {
                    let pos = self.wt_oi.select(&c, k).expect("k within rank");
                    self.b_c.select0(pos + 1).expect("instance position")
                }))
            }
            ObjectPattern::Concept(p) => {
                if !self.prefix_in(&self.wt_oc, &p) {
                    return Box::new(std::iter::empty());
                }
                let (x0, x1) = (self.b_c.rank1(a), self.b_c.rank1(b));
                let r0 = self.wt_oc.rank_prefix(&p, x0).expect("valid prefix");
                let r1 = self.wt_oc.rank_prefix(&p, x1).expect("valid prefix");
                Box::new((r0 + 1..=r1).map(move |k| {
                    let pos = self.wt_oc.select_prefix(&p, k).expect("k within rank");
                    self.b_c.select1(pos + 1).expect("concept position")
                }))
            }
        }
    }

    fn object_count(&self, o: ObjectPattern) -> usize {
        match o {
            ObjectPattern::Any => self.len(),
            ObjectPattern::Instance(id) => self
                .instance_code(id)
                .map_or(0, |c| self.wt_oi.rank(&c, self.wt_oi.len()).unwrap()),
            ObjectPattern::Concept(p) => {
                if self.prefix_in(&self.wt_oc, &p) {
                    self.wt_oc.count_prefix(&p).unwrap()
                } else {
                    0
                }
            }
        }
    }

    fn predicate_count(&self, p: &PrefixCode) -> usize {
        if self.prefix_in(&self.wt_p, p) {
            self.wt_p.count_prefix(p).unwrap()
        } else {
            0
        }
    }

    fn validate(&self, pattern: &TriplePattern) -> Result<bool> {
        let type_code = PropertyClass::Type.prefix();
        match (pattern.predicate, pattern.object) {
            (Some(p), ObjectPattern::Concept(_)) if p != type_code => Err(Error::Query(format!(
                "concept object requires the rdf:type predicate, found {p}"
            ))),
            (Some(p), ObjectPattern::Instance(_)) if p == type_code => Ok(false),
            _ => Ok(true),
        }
    }

    /// Stored triples matching `pattern`, lazily, in store order.
    pub fn resolve(&self, pattern: &TriplePattern) -> Result<TripleIter<'_>> {
        if !self.validate(pattern)? {
            return Ok(Box::new(std::iter::empty()));
        }
        let TriplePattern {
            subject,
            predicate,
            object,
        } = *pattern;
        if let Some(s) = subject {
            let Some(ord) = self.ordinal(s) else {
                return Ok(Box::new(std::iter::empty()));
            };
            let (lo, hi) = self.predicate_range(ord);
            return Ok(Box::new(self.nodes_in(lo, hi, predicate).flat_map(
                move |j| {
                    let (a, b) = self.object_range(j);
                    self.objects_in(a, b, object)
                        .map(move |g| self.triple(s, j, g))
                },
            )));
        }
        let object_driven = match (predicate, object) {
            (_, ObjectPattern::Any) => false,
            (None, _) => true,
            (Some(p), o) => self.object_count(o) <= self.predicate_count(&p),
        };
        if object_driven {
            return Ok(Box::new(self.objects_in(0, self.len(), object).filter_map(
                move |g| {
                    let j = self.node_of(g);
                    match predicate {
                        Some(p) if !p.is_prefix_of(&self.wt_p.access(j).expect("node in WT_p")) => {
                            None
                        }
                        _ => Some(self.triple(self.subject_of_node(j), j, g)),
                    }
                },
            )));
        }
        if predicate.is_none() {
            return Ok(Box::new((0..self.len()).map(move |g| self.triple_at(g))));
        }
        Ok(Box::new(
            self.nodes_in(0, self.b_p.len(), predicate)
                .flat_map(move |j| {
                    let subject = self.subject_of_node(j);
                    let (a, b) = self.object_range(j);
                    self.objects_in(a, b, object)
                        .map(move |g| self.triple(subject, j, g))
                }),
        ))
    }

    /// Number of triples `resolve` would yield, using rank arithmetic where
    /// the pattern allows it.
    pub fn count(&self, pattern: &TriplePattern) -> Result<usize> {
        if !self.validate(pattern)? {
            return Ok(0);
        }
        let type_code = PropertyClass::Type.prefix();
        let TriplePattern {
            subject,
            predicate,
            object,
        } = *pattern;
        match (subject, predicate, object) {
            (None, None, o) => Ok(self.object_count(o)),
            (None, Some(p), ObjectPattern::Concept(_)) if p == type_code => {
                Ok(self.object_count(object))
            }
            (None, Some(p), ObjectPattern::Any) if p == type_code => Ok(self.b_c.count_ones()),
            (Some(s), None, o) => {
                let Some(ord) = self.ordinal(s) else {
                    return Ok(0);
                };
                let (lo, hi) = self.predicate_range(ord);
                let a = self.object_range(lo).0;
                let b = self.object_range(hi - 1).1;
                Ok(match o {
                    ObjectPattern::Any => b - a,
                    ObjectPattern::Instance(id) => match self.instance_code(id) {
                        None => 0,
                        Some(c) => {
                            let (x0, x1) = (self.b_c.rank0(a), self.b_c.rank0(b));
                            self.wt_oi.rank(&c, x1)? - self.wt_oi.rank(&c, x0)?
                        }
                    },
                    ObjectPattern::Concept(p) if self.prefix_in(&self.wt_oc, &p) => {
                        let (x0, x1) = (self.b_c.rank1(a), self.b_c.rank1(b));
                        self.wt_oc.rank_prefix(&p, x1)? - self.wt_oc.rank_prefix(&p, x0)?
                    }
                    ObjectPattern::Concept(_) => 0,
                })
            }
            (None, Some(p), ObjectPattern::Any) => Ok(self
                .nodes_in(0, self.b_p.len(), Some(p))
                .map(|j| {
                    let (a, b) = self.object_range(j);
                    b - a
                })
                .sum()),
            _ => Ok(self.resolve(pattern)?.count()),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = EncodedTriple> + '_ {
        (0..self.len()).map(move |g| self.triple_at(g))
    }

    /// Serialized sections in container order:
    /// subjects, B_p, WT_p, B_o, B_c, WT_oc, WT_oi.
    pub(crate) fn write_sections(&self) -> Vec<Vec<u8>> {
        let mut out = Vec::new();
        for bv in [&self.subjects, &self.b_p] {
            let mut w = Writer::new();
            bv.write_to(&mut w);
            out.push(w.into_inner());
        }
        let mut w = Writer::new();
        self.wt_p.write_to(&mut w);
        out.push(w.into_inner());
        for bv in [&self.b_o, &self.b_c] {
            let mut w = Writer::new();
            bv.write_to(&mut w);
            out.push(w.into_inner());
        }
        let mut w = Writer::new();
        self.wt_oc.write_to(&mut w);
        out.push(w.into_inner());
        let mut w = Writer::new();
        w.u8(self.id_width);
        self.wt_oi.write_to(&mut w);
        out.push(w.into_inner());
        out
    }

    /// Inverse of `write_sections`; each reader covers one section.
    pub(crate) fn read_sections(mut r: [Reader<'_>; 7]) -> Result<Self> {
        let subjects = BitVector::read_from(&mut r[0])?;
        let b_p = BitVector::read_from(&mut r[1])?;
        let wt_p = WaveletTree::read_from(&mut r[2])?;
        let b_o = BitVector::read_from(&mut r[3])?;
        let b_c = BitVector::read_from(&mut r[4])?;
        let wt_oc = WaveletTree::read_from(&mut r[5])?;
        let id_width = r[6].u8()?;
        if id_width == 0 || id_width > 63 {
            return r[6].fail(format!("invalid instance id width {id_width}"));
        }
        let wt_oi = WaveletTree::read_from(&mut r[6])?;
        for rd in &r {
            if !rd.is_empty() {
                return rd.fail("trailing bytes in store section");
            }
        }
        let store = TripleStore {
            subjects,
            b_p,
            wt_p,
            b_o,
            b_c,
            wt_oc,
            wt_oi,
            id_width,
        };
        store
            .check_invariants()
            .map_err(|e| Error::format(r[0].offset(), e))?;
        Ok(store)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn c(s: &str) -> PrefixCode {
        PrefixCode::parse(s).unwrap()
    }

    /// Tiny vocabulary: properties 00 (type), 010, 011 under 01 and 10;
    /// concepts 00, 010, 011, 1.
    fn trees() -> (CodeTree, CodeTree) {
        let props = ["00", "010", "011", "10"].map(|s| (c(s), c(s).to_sentinel()));
        let concepts = ["00", "010", "011", "1"].map(|s| (c(s), c(s).to_sentinel()));
        (
            CodeTree::from_leaves(props).unwrap(),
            CodeTree::from_leaves(concepts).unwrap(),
        )
    }

    fn arb_triples() -> impl Strategy<Value = Vec<EncodedTriple>> {
        let props = ["00", "010", "011", "10"];
        let concepts = ["00", "010", "011", "1"];
        proptest::collection::vec((1u64..=12, 0usize..4, 0usize..4, 1u64..=12), 0..120).prop_map(
            move |raw| {
                let mut v: Vec<EncodedTriple> = raw
                    .into_iter()
                    .map(|(s, p, k, o)| {
                        let predicate = c(props[p]);
                        let object = if p == 0 {
                            Object::Concept(c(concepts[k]))
                        } else {
                            Object::Instance(o)
                        };
                        EncodedTriple {
                            subject: s,
                            predicate,
                            object,
                        }
                    })
                    .collect();
                v.sort_by_key(EncodedTriple::sort_key);
                v.dedup();
                v
            },
        )
    }

    fn matches(t: &EncodedTriple, p: &TriplePattern) -> bool {
        p.subject.is_none_or(|s| s == t.subject)
            && p.predicate.is_none_or(|q| q.is_prefix_of(&t.predicate))
            && match p.object {
                ObjectPattern::Any => true,
                ObjectPattern::Instance(id) => t.object == Object::Instance(id),
                ObjectPattern::Concept(q) => {
                    matches!(t.object, Object::Concept(x) if q.is_prefix_of(&x))
                }
            }
    }

    #[test]
    fn unsorted_input_rejected() {
        let (pt, ct) = trees();
        let a = EncodedTriple {
            subject: 2,
            predicate: c("10"),
            object: Object::Instance(1),
        };
        let b = EncodedTriple {
            subject: 1,
            predicate: c("10"),
            object: Object::Instance(1),
        };
        assert!(matches!(
            TripleStore::build(&[a, b], 2, pt, ct),
            Err(Error::Build(_))
        ));
    }

    #[test]
    fn empty_store() {
        let (pt, ct) = trees();
        let s = TripleStore::build(&[], 0, pt, ct).unwrap();
        assert_eq!(s.len(), 0);
        assert_eq!(s.resolve(&TriplePattern::any()).unwrap().count(), 0);
        assert_eq!(
            s.count(&TriplePattern::new(Some(1), None, ObjectPattern::Any))
                .unwrap(),
            0
        );
    }

    #[test]
    fn concept_object_needs_type_predicate() {
        let (pt, ct) = trees();
        let s = TripleStore::build(&[], 0, pt, ct).unwrap();
        let bad = TriplePattern::new(None, Some(c("10")), ObjectPattern::Concept(c("0")));
        assert!(matches!(s.resolve(&bad), Err(Error::Query(_))));
    }

    proptest! {
        #[test]
        fn resolve_and_count_match_scan(triples in arb_triples()) {
            let (pt, ct) = trees();
            let store = TripleStore::build(&triples, 12, pt, ct).unwrap();
            prop_assert_eq!(store.iter().collect::<Vec<_>>(), triples.clone());
            let subjects: Vec<Option<u64>> = std::iter::once(None).chain((1..=13).map(Some)).collect();
            let preds: Vec<Option<PrefixCode>> =
                [None, Some(c("")), Some(c("0")), Some(c("00")), Some(c("01")), Some(c("010")), Some(c("10")), Some(c("11"))].into();
            let mut objects = vec![ObjectPattern::Any];
            objects.extend((1..=13).map(ObjectPattern::Instance));
            objects.extend(["", "0", "01", "010", "1"].map(|s| ObjectPattern::Concept(c(s))));
            for &s in &subjects {
                for &p in &preds {
                    for &o in &objects {
                        let pat = TriplePattern::new(s, p, o);
                        let expected: Vec<EncodedTriple> = if matches!(o, ObjectPattern::Concept(_)) && p.is_some_and(|p| p != c("00")) {
                            prop_assert!(store.resolve(&pat).is_err());
                            continue;
                        } else {
                            triples.iter().filter(|t| matches(t, &pat)).copied().collect()
                        };
                        let got: Vec<EncodedTriple> = store.resolve(&pat).unwrap().collect();
                        let mut sorted_expected = expected.clone();
                        sorted_expected.sort_by_key(|t| triples.iter().position(|x| x == t));
                        prop_assert_eq!(&got, &sorted_expected, "pattern {:?}", pat);
                        prop_assert_eq!(store.count(&pat).unwrap(), expected.len(), "count {:?}", pat);
                    }
                }
            }
            let all: BTreeSet<_> = store.iter().map(|t| t.sort_key()).collect();
            prop_assert_eq!(all.len(), triples.len());
        }

        #[test]
        fn sections_round_trip(triples in arb_triples()) {
            let (pt, ct) = trees();
            let store = TripleStore::build(&triples, 12, pt, ct).unwrap();
            let sections = store.write_sections();
            let readers: [Reader<'_>; 7] = std::array::from_fn(|i| Reader::new(&sections[i], 0));
            let back = TripleStore::read_sections(readers).unwrap();
            prop_assert_eq!(&back, &store);
            prop_assert_eq!(back.write_sections(), sections);
        }
    }
}
