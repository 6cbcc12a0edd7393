//! Concept and property hierarchies encoded as prefix codes.
//!
//! Every element gets a code extending its primary parent's code by a local
//! field. Elements with sub-elements reserve local value 0 for a "self"
//! entry, which is the code stored for their direct instances; the bare code
//! is then a prefix covering the element and everything below it.

use std::collections::{BTreeSet, HashMap, HashSet};

use petgraph::algo::{tarjan_scc, toposort};
use petgraph::graph::{DiGraph, NodeIndex};

use crate::code::{PrefixCode, MAX_CODE_LEN};
use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};
use crate::term::{self, Term, Triple};
use crate::wavelet::CodeTree;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PropertyClass {
    Type,
    Datatype,
    Object,
}

impl PropertyClass {
    fn tag(self) -> u8 {
        match self {
            PropertyClass::Type => 0,
            PropertyClass::Datatype => 1,
            PropertyClass::Object => 2,
        }
    }

    fn from_tag(t: u8) -> Option<Self> {
        match t {
            0 => Some(PropertyClass::Type),
            1 => Some(PropertyClass::Datatype),
            2 => Some(PropertyClass::Object),
            _ => None,
        }
    }

    /// Two-bit prefix under which this class's properties are coded.
    pub fn prefix(self) -> PrefixCode {
        match self {
            PropertyClass::Type => PrefixCode::parse("00").unwrap(),
            PropertyClass::Datatype => PrefixCode::parse("01").unwrap(),
            PropertyClass::Object => PrefixCode::parse("10").unwrap(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HierarchyKind {
    Concept,
    Property,
}

/// One concept or property.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Element {
    pub iri: String,
    /// IRIs collapsed into this element because of a subsumption cycle.
    pub aliases: Vec<String>,
    pub code: PrefixCode,
    /// Width of the local field given to sub-elements (and self).
    pub width: u8,
    pub has_self: bool,
    pub primary: Option<usize>,
    pub secondary: Vec<usize>,
    /// Codes under secondary parents.
    pub alternates: Vec<PrefixCode>,
    pub class: Option<PropertyClass>,
    /// Stored triples carrying exactly this element.
    pub direct: u64,
    /// Stored triples carrying this element or any sub-element.
    pub total: u64,
}

impl Element {
    /// Code written into the store for this element's own occurrences.
    pub fn self_code(&self) -> Option<PrefixCode> {
        self.has_self.then(|| {
            self.code
                .extend(0, self.width)
                .expect("validated at assignment")
        })
    }

    pub fn is_leaf(&self) -> bool {
        self.width == 0
    }
}

/// A coded hierarchy with its lookup tables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hierarchy {
    kind: HierarchyKind,
    elements: Vec<Element>,
    by_iri: HashMap<String, usize>,
    by_stored: HashMap<u64, usize>,
    by_code: HashMap<u64, usize>,
    children: Vec<Vec<usize>>,
    ancestors: Vec<Vec<usize>>,
    tree: CodeTree,
}

fn ceil_log2(x: u64) -> u8 {
    if x <= 1 {
        0
    } else {
        (64 - (x - 1).leading_zeros()) as u8
    }
}

impl Hierarchy {
    pub fn kind(&self) -> HierarchyKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn element(&self, idx: usize) -> &Element {
        &self.elements[idx]
    }

    /// H2: element index for an IRI (aliases included).
    pub fn index_of(&self, iri: &str) -> Option<usize> {
        self.by_iri.get(iri).copied()
    }

    pub fn get(&self, iri: &str) -> Option<&Element> {
        self.index_of(iri).map(|i| &self.elements[i])
    }

    /// H1: element whose stored code has this sentinel form.
    pub fn index_of_stored(&self, sentinel: u64) -> Option<usize> {
        self.by_stored.get(&sentinel).copied()
    }

    pub fn iri_of_stored(&self, code: &PrefixCode) -> Option<&str> {
        self.index_of_stored(code.to_sentinel())
            .map(|i| self.elements[i].iri.as_str())
    }

    /// Element whose prefix code is exactly `code`.
    pub fn index_of_code(&self, code: &PrefixCode) -> Option<usize> {
        self.by_code.get(&code.to_sentinel()).copied()
    }

    /// Code tree whose leaves are the stored codes.
    pub fn code_tree(&self) -> &CodeTree {
        &self.tree
    }

    /// Direct sub-elements (primary and secondary), in IRI order.
    pub fn children(&self, idx: usize) -> &[usize] {
        &self.children[idx]
    }

    /// Strict ancestors, excluding the virtual top.
    pub fn ancestors(&self, idx: usize) -> &[usize] {
        &self.ancestors[idx]
    }

    /// True when `a` equals or subsumes `b`. For concepts the top (index 0)
    /// subsumes everything.
    pub fn subsumes(&self, a: usize, b: usize) -> bool {
        a == b
            || (self.kind == HierarchyKind::Concept && a == 0)
            || self.ancestors[b].binary_search(&a).is_ok()
    }

    /// `idx` and every element below it.
    pub fn descendants(&self, idx: usize) -> Vec<usize> {
        if self.kind == HierarchyKind::Concept && idx == 0 {
            return (0..self.elements.len()).collect();
        }
        let mut seen = BTreeSet::from([idx]);
        let mut stack = vec![idx];
        while let Some(n) = stack.pop() {
            for &c in &self.children[n] {
                if seen.insert(c) {
                    stack.push(c);
                }
            }
        }
        seen.into_iter().collect()
    }

    /// The element's prefix given its stored (self) code; leaves map to
    /// themselves.
    pub fn strip_self(&self, stored: &PrefixCode) -> Option<PrefixCode> {
        self.index_of_stored(stored.to_sentinel())
            .map(|i| self.elements[i].code)
    }

    /// Alternate codes of the element stored under `stored`.
    pub fn equivalents(&self, stored: &PrefixCode) -> &[PrefixCode] {
        let idx = self
            .index_of_stored(stored.to_sentinel())
            .or_else(|| self.index_of_code(stored));
        idx.map(|i| self.elements[i].alternates.as_slice())
            .unwrap_or(&[])
    }

    /// Expands a query prefix into a prefix-free set of primary codes
    /// covering every element that has some code (primary or alternate)
    /// under `p`.
    pub fn expand(&self, p: &PrefixCode) -> Vec<PrefixCode> {
        let mut set: Vec<PrefixCode> = vec![*p];
        loop {
            let mut grew = false;
            for e in &self.elements {
                if e.alternates.is_empty() || set.iter().any(|s| s.is_prefix_of(&e.code)) {
                    continue;
                }
                if e.alternates
                    .iter()
                    .any(|a| set.iter().any(|s| s.is_prefix_of(a)))
                {
                    set.push(e.code);
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        set.sort_by_key(|c| (c.len(), c.bits()));
        let mut out: Vec<PrefixCode> = Vec::new();
        for c in set {
            if !out.iter().any(|o| o.is_prefix_of(&c)) {
                out.push(c);
            }
        }
        out.sort_by_key(|c| c.to_sentinel());
        out
    }

    /// Prefixes matching `idx` and all its sub-elements.
    pub fn prefixes(&self, idx: usize) -> Vec<PrefixCode> {
        self.expand(&self.elements[idx].code)
    }

    /// Records per-element occurrence counts from the stored triples.
    pub fn set_counts(&mut self, direct: &HashMap<usize, u64>) {
        for (i, e) in self.elements.iter_mut().enumerate() {
            e.direct = direct.get(&i).copied().unwrap_or(0);
        }
        for i in 0..self.elements.len() {
            let total = self
                .descendants(i)
                .iter()
                .map(|&d| self.elements[d].direct)
                .sum();
            self.elements[i].total = total;
        }
    }

    fn from_elements(kind: HierarchyKind, elements: Vec<Element>) -> Result<Self> {
        let n = elements.len();
        let mut by_iri = HashMap::new();
        let mut by_stored = HashMap::new();
        let mut by_code = HashMap::new();
        let mut children = vec![Vec::new(); n];
        for (i, e) in elements.iter().enumerate() {
            for iri in std::iter::once(&e.iri).chain(&e.aliases) {
                if by_iri.insert(iri.clone(), i).is_some() {
                    return Err(Error::Build(format!("IRI {iri} names two elements")));
                }
            }
            if let Some(s) = e.self_code() {
                by_stored.insert(s.to_sentinel(), i);
            }
            by_code.insert(e.code.to_sentinel(), i);
            for &p in e.primary.iter().chain(&e.secondary) {
                if p >= n || p == i {
                    return Err(Error::Build(format!(
                        "element {} has an invalid parent",
                        e.iri
                    )));
                }
                children[p].push(i);
            }
        }
        for c in &mut children {
            c.sort_by(|&a, &b| elements[a].iri.cmp(&elements[b].iri));
        }
        let mut graph = DiGraph::<usize, ()>::new();
        let nodes: Vec<NodeIndex> = (0..n).map(|i| graph.add_node(i)).collect();
        for (i, e) in elements.iter().enumerate() {
            for &p in e.primary.iter().chain(&e.secondary) {
                graph.add_edge(nodes[p], nodes[i], ());
            }
        }
        let order =
            toposort(&graph, None).map_err(|_| Error::Build("hierarchy has a cycle".into()))?;
        let mut ancestors: Vec<Vec<usize>> = vec![Vec::new(); n];
        for node in order {
            let i = graph[node];
            let mut set = BTreeSet::new();
            for &p in elements[i].primary.iter().chain(&elements[i].secondary) {
                set.insert(p);
                set.extend(ancestors[p].iter().copied());
            }
            ancestors[i] = set.into_iter().collect();
        }
        let leaves = elements
            .iter()
            .filter_map(|e| e.self_code())
            .map(|c| (c, c.to_sentinel()));
        let tree = CodeTree::from_leaves(leaves)?;
        Ok(Hierarchy {
            kind,
            elements,
            by_iri,
            by_stored,
            by_code,
            children,
            ancestors,
            tree,
        })
    }

    pub(crate) fn write_topology(&self, w: &mut Writer) {
        w.u8(match self.kind {
            HierarchyKind::Concept => 0,
            HierarchyKind::Property => 1,
        });
        w.varint(self.elements.len() as u64);
        for e in &self.elements {
            w.str(&e.iri);
            w.varint(e.aliases.len() as u64);
            for a in &e.aliases {
                w.str(a);
            }
            w.u8(e.code.len());
            w.varint(e.code.bits());
            w.u8(e.width);
            w.u8(e.has_self as u8 | (e.class.map_or(3, PropertyClass::tag) << 1));
            w.varint(e.primary.map_or(0, |p| p as u64 + 1));
            w.varint(e.secondary.len() as u64);
            for &s in &e.secondary {
                w.varint(s as u64);
            }
        }
    }

    pub(crate) fn read_topology(r: &mut Reader<'_>) -> Result<Vec<Element>> {
        let at = r.offset();
        let _kind = match r.u8()? {
            0 => HierarchyKind::Concept,
            1 => HierarchyKind::Property,
            t => return Err(Error::format(at, format!("unknown hierarchy kind {t}"))),
        };
        let n = r.len(r.remaining())?;
        let mut elements = Vec::with_capacity(n);
        for _ in 0..n {
            let iri = r.string()?;
            let n_alias = r.len(r.remaining())?;
            let mut aliases = Vec::with_capacity(n_alias);
            for _ in 0..n_alias {
                aliases.push(r.string()?);
            }
            let at = r.offset();
            let len = r.u8()?;
            let bits = r.varint()?;
            let code = PrefixCode::new(bits, len).map_err(|e| Error::format(at, e))?;
            let width = r.u8()?;
            if code.len() as u32 + width as u32 > MAX_CODE_LEN as u32 {
                return r.fail("element code too long");
            }
            let flags = r.u8()?;
            let class = match flags >> 1 {
                3 => None,
                t => Some(
                    PropertyClass::from_tag(t)
                        .ok_or_else(|| Error::format(at, "bad property class"))?,
                ),
            };
            let primary = match r.len(n)? {
                0 => None,
                p => Some(p - 1),
            };
            let n_sec = r.len(n)?;
            let mut secondary = Vec::with_capacity(n_sec);
            for _ in 0..n_sec {
                let s = r.len(n)?;
                if s >= n {
                    return r.fail("parent index out of range");
                }
                secondary.push(s);
            }
            elements.push(Element {
                iri,
                aliases,
                code,
                width,
                has_self: flags & 1 == 1,
                primary,
                secondary,
                alternates: Vec::new(),
                class,
                direct: 0,
                total: 0,
            });
        }
        Ok(elements)
    }

    pub(crate) fn write_equivalences(&self, w: &mut Writer) {
        let with_alt: Vec<usize> = (0..self.elements.len())
            .filter(|&i| !self.elements[i].alternates.is_empty())
            .collect();
        w.varint(with_alt.len() as u64);
        for i in with_alt {
            w.varint(i as u64);
            w.varint(self.elements[i].alternates.len() as u64);
            for a in &self.elements[i].alternates {
                w.u8(a.len());
                w.varint(a.bits());
            }
        }
    }

    pub(crate) fn read_equivalences(r: &mut Reader<'_>, elements: &mut [Element]) -> Result<()> {
        let n = r.len(elements.len())?;
        for _ in 0..n {
            let i = r.len(elements.len())?;
            if i >= elements.len() {
                return r.fail("equivalence for unknown element");
            }
            let k = r.len(r.remaining())?;
            for _ in 0..k {
                let at = r.offset();
                let len = r.u8()?;
                let bits = r.varint()?;
                elements[i]
                    .alternates
                    .push(PrefixCode::new(bits, len).map_err(|e| Error::format(at, e))?);
            }
        }
        Ok(())
    }

    pub(crate) fn write_counts(&self, w: &mut Writer) {
        for e in &self.elements {
            w.varint(e.direct);
            w.varint(e.total);
        }
    }

    pub(crate) fn read_counts(r: &mut Reader<'_>, elements: &mut [Element]) -> Result<()> {
        for e in elements.iter_mut() {
            e.direct = r.varint()?;
            e.total = r.varint()?;
        }
        Ok(())
    }

    pub(crate) fn assemble(kind: HierarchyKind, elements: Vec<Element>) -> Result<Self> {
        Self::from_elements(kind, elements)
    }
}

/// Concept and property hierarchies plus domain/range declarations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ontology {
    pub concepts: Hierarchy,
    pub properties: Hierarchy,
    /// Declared domains per property element (concept indices).
    domains: Vec<Vec<usize>>,
    ranges: Vec<Vec<usize>>,
}

/// Vocabulary seen in the instance data that the ontology must cover.
#[derive(Clone, Debug, Default)]
pub struct Usage {
    pub concepts: BTreeSet<String>,
    pub properties: BTreeSet<String>,
}

fn is_top_concept(iri: &str) -> bool {
    iri == term::OWL_THING || iri == term::RDFS_RESOURCE
}

fn is_datatype(iri: &str, declared: &HashSet<String>) -> bool {
    iri.starts_with(term::XSD) || iri == term::RDFS_LITERAL || declared.contains(iri)
}

/// Groups `nodes` into cycle-collapsed canonical elements. Returns the
/// canonical IRIs (sorted), their aliases, a member→canonical index map and
/// the transitively reduced parent sets.
struct Collapsed {
    iris: Vec<String>,
    aliases: Vec<Vec<String>>,
    parents: Vec<Vec<usize>>,
}

fn collapse(nodes: &BTreeSet<String>, edges: &[(String, String)]) -> Result<Collapsed> {
    let names: Vec<&String> = nodes.iter().collect();
    let pos: HashMap<&str, usize> = names
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let mut graph = DiGraph::<usize, ()>::new();
    let gn: Vec<NodeIndex> = (0..names.len()).map(|i| graph.add_node(i)).collect();
    for (sub, sup) in edges {
        let (a, b) = (pos[sub.as_str()], pos[sup.as_str()]);
        if a != b {
            graph.update_edge(gn[a], gn[b], ());
        }
    }
    let mut groups: Vec<Vec<usize>> = tarjan_scc(&graph)
        .into_iter()
        .map(|c| c.into_iter().map(|n| graph[n]).collect::<Vec<_>>())
        .collect();
    for g in &mut groups {
        g.sort_unstable();
    }
    groups.sort_by_key(|g| g[0]);
    let mut canon_of = vec![0usize; names.len()];
    for (ci, g) in groups.iter().enumerate() {
        for &m in g {
            canon_of[m] = ci;
        }
    }
    let iris: Vec<String> = groups.iter().map(|g| names[g[0]].clone()).collect();
    let aliases: Vec<Vec<String>> = groups
        .iter()
        .map(|g| g[1..].iter().map(|&m| names[m].clone()).collect())
        .collect();
    let mut index = HashMap::new();
    for (i, name) in names.iter().enumerate() {
        index.insert((*name).clone(), canon_of[i]);
    }
    let n = iris.len();
    let mut supers: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    let mut dag = DiGraph::<usize, ()>::new();
    let dn: Vec<NodeIndex> = (0..n).map(|i| dag.add_node(i)).collect();
    for (sub, sup) in edges {
        let (a, b) = (index[sub], index[sup]);
        if a != b && supers[a].insert(b) {
            dag.add_edge(dn[b], dn[a], ());
        }
    }
    let order = toposort(&dag, None)
        .map_err(|_| Error::Internal("collapsed hierarchy still cyclic".into()))?;
    let mut ancestors: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for node in order {
        let i = dag[node];
        let mut set = BTreeSet::new();
        for &s in &supers[i] {
            set.insert(s);
            set.extend(ancestors[s].iter().copied());
        }
        ancestors[i] = set;
    }
    let parents = (0..n)
        .map(|i| {
            supers[i]
                .iter()
                .copied()
                .filter(|&s| {
                    !supers[i]
                        .iter()
                        .any(|&t| t != s && ancestors[t].contains(&s))
                })
                .collect()
        })
        .collect();
    Ok(Collapsed {
        iris,
        aliases,
        parents,
    })
}

/// Assigns codes top-down. Element 0 is fixed in advance. `groups` are
/// the virtual anchors (code, whether they reserve a self slot); `group_of`
/// places each root under an anchor.
fn assign_codes(
    elements: &mut [Element],
    groups: &[(PrefixCode, bool)],
    group_of: &dyn Fn(usize) -> usize,
) -> Result<()> {
    let n = elements.len();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut roots: Vec<Vec<usize>> = vec![Vec::new(); groups.len()];
    for i in 1..n {
        match elements[i].primary {
            Some(p) => children[p].push(i),
            None => roots[group_of(i)].push(i),
        }
        for &s in &elements[i].secondary {
            children[s].push(i);
        }
    }
    let by_iri = |v: &mut Vec<usize>| v.sort_by(|&a, &b| elements[a].iri.cmp(&elements[b].iri));
    for c in &mut children {
        by_iri(c);
    }
    for r in &mut roots {
        by_iri(r);
    }
    let too_long = |iri: &str| Error::Build(format!("code for {iri} exceeds {MAX_CODE_LEN} bits"));
    let mut queue: Vec<usize> = Vec::new();
    for (g, &(base, self_slot)) in groups.iter().enumerate() {
        let m = roots[g].len() as u64;
        if m == 0 {
            continue;
        }
        let (width, first) = if self_slot {
            (ceil_log2(m + 1), 1)
        } else {
            (ceil_log2(m).max(1), 0)
        };
        for (k, &c) in roots[g].iter().enumerate() {
            elements[c].code = base
                .extend(first + k as u64, width)
                .map_err(|_| too_long(&elements[c].iri))?;
            queue.push(c);
        }
    }
    let mut head = 0;
    while head < queue.len() {
        let p = queue[head];
        head += 1;
        let m = children[p].len() as u64;
        elements[p].width = if m == 0 { 0 } else { ceil_log2(m + 1) };
        if elements[p].code.len() as u32 + elements[p].width as u32 > MAX_CODE_LEN as u32 {
            return Err(too_long(&elements[p].iri));
        }
        let (code, width) = (elements[p].code, elements[p].width);
        for k in 0..children[p].len() {
            let c = children[p][k];
            let local = code
                .extend(k as u64 + 1, width)
                .map_err(|_| too_long(&elements[c].iri))?;
            if elements[c].primary == Some(p) {
                elements[c].code = local;
                queue.push(c);
            }
        }
    }
    for c in 0..n {
        let mut alts = Vec::new();
        for &s in &elements[c].secondary {
            let k = children[s]
                .iter()
                .position(|&x| x == c)
                .expect("child listed under parent");
            alts.push(
                elements[s]
                    .code
                    .extend(k as u64 + 1, elements[s].width)
                    .map_err(|_| too_long(&elements[c].iri))?,
            );
        }
        elements[c].alternates = alts;
    }
    Ok(())
}

fn blank_element(iri: String, aliases: Vec<String>) -> Element {
    Element {
        iri,
        aliases,
        code: PrefixCode::EMPTY,
        width: 0,
        has_self: true,
        primary: None,
        secondary: Vec::new(),
        alternates: Vec::new(),
        class: None,
        direct: 0,
        total: 0,
    }
}

/// True for triples that belong to the schema rather than the instance data.
pub fn is_schema_triple(t: &Triple) -> bool {
    match t.predicate.as_str() {
        term::RDFS_SUBCLASS_OF
        | term::RDFS_SUBPROPERTY_OF
        | term::RDFS_DOMAIN
        | term::RDFS_RANGE
        | term::OWL_EQUIVALENT_CLASS => true,
        term::RDF_TYPE => matches!(
            t.object.as_iri(),
            Some(
                term::OWL_CLASS
                    | term::RDFS_CLASS
                    | term::OWL_OBJECT_PROPERTY
                    | term::OWL_DATATYPE_PROPERTY
                    | term::RDF_PROPERTY
                    | term::RDFS_DATATYPE
            )
        ),
        _ => false,
    }
}

impl Ontology {
    /// Classifies the schema triples and codes both hierarchies. Concepts
    /// and properties listed in `usage` but absent from the schema become
    /// roots (properties default to the object class).
    pub fn build(tbox: &[Triple], usage: &Usage) -> Result<Ontology> {
        let iri_of = |t: &Term, what: &str| -> Result<String> {
            t.as_iri()
                .map(str::to_owned)
                .ok_or_else(|| Error::Ingest(format!("{what} must be an IRI, found {t}")))
        };
        let mut concept_nodes: BTreeSet<String> = BTreeSet::new();
        let mut concept_edges: Vec<(String, String)> = Vec::new();
        let mut prop_nodes: BTreeSet<String> = BTreeSet::new();
        let mut prop_edges: Vec<(String, String)> = Vec::new();
        let mut declared_dt: HashSet<String> = HashSet::new();
        let mut declared_obj: HashSet<String> = HashSet::new();
        let mut datatypes: HashSet<String> = HashSet::new();
        let mut domain_decl: Vec<(String, String)> = Vec::new();
        let mut range_decl: Vec<(String, String)> = Vec::new();
        let add_concept = |nodes: &mut BTreeSet<String>, iri: &str| {
            if !is_top_concept(iri) {
                nodes.insert(iri.to_owned());
            }
        };
        for t in tbox {
            if t.predicate == term::RDF_TYPE && t.object.as_iri() == Some(term::RDFS_DATATYPE) {
                datatypes.insert(iri_of(&t.subject, "datatype")?);
            }
        }
        for t in tbox {
            let s = iri_of(&t.subject, "schema subject")?;
            match t.predicate.as_str() {
                term::RDFS_SUBCLASS_OF | term::OWL_EQUIVALENT_CLASS => {
                    let o = iri_of(&t.object, "super-concept")?;
                    add_concept(&mut concept_nodes, &s);
                    add_concept(&mut concept_nodes, &o);
                    if !is_top_concept(&s) && !is_top_concept(&o) {
                        concept_edges.push((s.clone(), o.clone()));
                        if t.predicate == term::OWL_EQUIVALENT_CLASS {
                            concept_edges.push((o, s));
                        }
                    }
                }
                term::RDFS_SUBPROPERTY_OF => {
                    let o = iri_of(&t.object, "super-property")?;
                    if s != term::RDF_TYPE && o != term::RDF_TYPE {
                        prop_nodes.insert(s.clone());
                        prop_nodes.insert(o.clone());
                        prop_edges.push((s, o));
                    }
                }
                term::RDFS_DOMAIN | term::RDFS_RANGE => {
                    let o = iri_of(&t.object, "domain/range")?;
                    if s != term::RDF_TYPE {
                        prop_nodes.insert(s.clone());
                    }
                    if is_datatype(&o, &datatypes) {
                        if t.predicate == term::RDFS_RANGE {
                            declared_dt.insert(s);
                        }
                        continue;
                    }
                    add_concept(&mut concept_nodes, &o);
                    if !is_top_concept(&o) {
                        if t.predicate == term::RDFS_DOMAIN {
                            domain_decl.push((s, o));
                        } else {
                            range_decl.push((s, o));
                        }
                    }
                }
                term::RDF_TYPE => match t.object.as_iri() {
                    Some(term::OWL_CLASS | term::RDFS_CLASS) => add_concept(&mut concept_nodes, &s),
                    Some(term::OWL_DATATYPE_PROPERTY) => {
                        prop_nodes.insert(s.clone());
                        declared_dt.insert(s);
                    }
                    Some(term::OWL_OBJECT_PROPERTY) => {
                        prop_nodes.insert(s.clone());
                        declared_obj.insert(s);
                    }
                    Some(term::RDF_PROPERTY) => {
                        prop_nodes.insert(s);
                    }
                    _ => {}
                },
                _ => {}
            }
        }
        for c in &usage.concepts {
            add_concept(&mut concept_nodes, c);
        }
        for p in &usage.properties {
            if p != term::RDF_TYPE {
                prop_nodes.insert(p.clone());
            }
        }
        prop_nodes.remove(term::RDF_TYPE);

        // Concepts: element 0 is the top.
        let cc = collapse(&concept_nodes, &concept_edges)?;
        let mut concepts = vec![Element {
            has_self: false,
            ..blank_element(
                term::OWL_THING.to_owned(),
                vec![term::RDFS_RESOURCE.to_owned()],
            )
        }];
        for (i, iri) in cc.iris.iter().enumerate() {
            let mut e = blank_element(iri.clone(), cc.aliases[i].clone());
            let parents: Vec<usize> = cc.parents[i].iter().map(|&p| p + 1).collect();
            e.primary = parents.first().copied();
            e.secondary = parents.iter().skip(1).copied().collect();
            concepts.push(e);
        }
        assign_codes(&mut concepts, &[(PrefixCode::EMPTY, false)], &|_| 0)?;
        let roots = concepts
            .iter()
            .skip(1)
            .filter(|e| e.primary.is_none())
            .count() as u64;
        concepts[0].width = if roots == 0 {
            0
        } else {
            ceil_log2(roots).max(1)
        };

        // Properties: element 0 is rdf:type.
        let pc = collapse(&prop_nodes, &prop_edges)?;
        let n = pc.iris.len();
        let mut class: Vec<Option<PropertyClass>> = vec![None; n];
        for i in 0..n {
            let members = std::iter::once(&pc.iris[i]).chain(&pc.aliases[i]);
            let (mut dt, mut obj) = (false, false);
            for m in members {
                dt |= declared_dt.contains(m);
                obj |= declared_obj.contains(m);
            }
            if dt && !obj {
                class[i] = Some(PropertyClass::Datatype);
            } else if obj {
                class[i] = Some(PropertyClass::Object);
            }
        }
        // Undeclared properties inherit the class of their least parent.
        let mut changed = true;
        while changed {
            changed = false;
            for i in 0..n {
                if class[i].is_none() {
                    if let Some(c) = pc.parents[i].iter().find_map(|&p| class[p]) {
                        class[i] = Some(c);
                        changed = true;
                    }
                }
            }
        }
        let mut properties = vec![Element {
            code: PropertyClass::Type.prefix(),
            class: Some(PropertyClass::Type),
            ..blank_element(term::RDF_TYPE.to_owned(), Vec::new())
        }];
        for (i, iri) in pc.iris.iter().enumerate() {
            let mut e = blank_element(iri.clone(), pc.aliases[i].clone());
            let c = class[i].unwrap_or(PropertyClass::Object);
            e.class = Some(c);
            let same: Vec<usize> = pc.parents[i]
                .iter()
                .copied()
                .filter(|&p| class[p].unwrap_or(PropertyClass::Object) == c)
                .collect();
            e.primary = same.first().map(|&p| p + 1);
            e.secondary = pc.parents[i]
                .iter()
                .map(|&p| p + 1)
                .filter(|&p| Some(p) != e.primary)
                .collect();
            properties.push(e);
        }
        let groups = [
            (PropertyClass::Datatype.prefix(), true),
            (PropertyClass::Object.prefix(), true),
        ];
        let class_of: Vec<Option<PropertyClass>> = properties.iter().map(|e| e.class).collect();
        assign_codes(&mut properties, &groups, &|i| match class_of[i] {
            Some(PropertyClass::Datatype) => 0,
            _ => 1,
        })?;

        let concept_h = Hierarchy::from_elements(HierarchyKind::Concept, concepts)?;
        let property_h = Hierarchy::from_elements(HierarchyKind::Property, properties)?;
        let mut domains = vec![Vec::new(); property_h.len()];
        let mut ranges = vec![Vec::new(); property_h.len()];
        for (decls, out) in [(&domain_decl, &mut domains), (&range_decl, &mut ranges)] {
            for (p, c) in decls.iter() {
                let pi = property_h
                    .index_of(p)
                    .ok_or_else(|| Error::Ingest(format!("unknown property {p}")))?;
                let ci = concept_h
                    .index_of(c)
                    .ok_or_else(|| Error::Ingest(format!("unknown concept {c}")))?;
                if !out[pi].contains(&ci) {
                    out[pi].push(ci);
                }
            }
        }
        for v in domains.iter_mut().chain(ranges.iter_mut()) {
            v.sort_unstable();
        }
        Ok(Ontology {
            concepts: concept_h,
            properties: property_h,
            domains,
            ranges,
        })
    }

    /// Declared domains of `property` and of all its super-properties.
    pub fn effective_domains(&self, property: usize) -> Vec<usize> {
        self.effective(property, &self.domains)
    }

    pub fn effective_ranges(&self, property: usize) -> Vec<usize> {
        self.effective(property, &self.ranges)
    }

    fn effective(&self, property: usize, table: &[Vec<usize>]) -> Vec<usize> {
        let mut out: BTreeSet<usize> = table[property].iter().copied().collect();
        for &a in self.properties.ancestors(property) {
            out.extend(table[a].iter().copied());
        }
        out.into_iter().collect()
    }

    pub fn declared_domains(&self, property: usize) -> &[usize] {
        &self.domains[property]
    }

    pub fn declared_ranges(&self, property: usize) -> &[usize] {
        &self.ranges[property]
    }

    pub(crate) fn write_domains(&self, w: &mut Writer) {
        for table in [&self.domains, &self.ranges] {
            for v in table.iter() {
                w.varint(v.len() as u64);
                for &c in v {
                    w.varint(c as u64);
                }
            }
        }
    }

    pub(crate) fn from_parts(
        concepts: Hierarchy,
        properties: Hierarchy,
        domains: Vec<Vec<usize>>,
        ranges: Vec<Vec<usize>>,
    ) -> Self {
        Ontology {
            concepts,
            properties,
            domains,
            ranges,
        }
    }

    pub(crate) fn read_domains(
        r: &mut Reader<'_>,
        n_props: usize,
        n_concepts: usize,
    ) -> Result<(Vec<Vec<usize>>, Vec<Vec<usize>>)> {
        let mut tables = Vec::new();
        for _ in 0..2 {
            let mut table = Vec::with_capacity(n_props);
            for _ in 0..n_props {
                let k = r.len(n_concepts)?;
                let mut v = Vec::with_capacity(k);
                for _ in 0..k {
                    let c = r.len(n_concepts)?;
                    if c >= n_concepts {
                        return r.fail("domain/range concept out of range");
                    }
                    v.push(c);
                }
                table.push(v);
            }
            tables.push(table);
        }
        let ranges = tables.pop().unwrap();
        let domains = tables.pop().unwrap();
        Ok((domains, ranges))
    }
}
