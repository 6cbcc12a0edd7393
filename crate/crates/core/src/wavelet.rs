//! Pointer-free wavelet trees shaped by arbitrary prefix-free code trees.
//!
//! The alphabet split is not balanced: every symbol is a leaf of a
//! [`CodeTree`] and its code is its root-to-leaf path. For ontology elements
//! that tree is the subsumption hierarchy itself, so the elements below a
//! concept occupy one subtree and `rank_prefix`/`select_prefix` answer
//! "any sub-concept of C" by stopping the traversal at C's depth.
//!
//! All nodes of one depth share a single [`BitVector`]; each internal node
//! owns a contiguous interval of its level. Node intervals are not stored:
//! they are derived top-down from the level bits after build or load.

use std::collections::HashSet;

use crate::bits::{BitVector, BitVectorBuilder};
use crate::code::PrefixCode;
use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};

const NONE: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq, Eq)]
struct Node {
    child: [u32; 2],
    symbol: Option<u64>,
}

impl Node {
    fn empty() -> Self {
        Node {
            child: [NONE, NONE],
            symbol: None,
        }
    }

    fn is_leaf(&self) -> bool {
        self.symbol.is_some()
    }
}

/// Binary tree whose leaves carry symbols; leaf paths form a prefix-free code.
///
/// Internal nodes may have a single child.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeTree {
    nodes: Vec<Node>,
    leaves: usize,
}

impl Default for CodeTree {
    fn default() -> Self {
        CodeTree {
            nodes: vec![Node::empty()],
            leaves: 0,
        }
    }
}

impl CodeTree {
    pub fn from_leaves<I>(leaves: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PrefixCode, u64)>,
    {
        // Inserting in lexicographic code order allocates nodes in preorder,
        // the same arena layout `read_from` produces.
        let mut leaves: Vec<(PrefixCode, u64)> = leaves.into_iter().collect();
        leaves.sort_by_key(|(c, _)| {
            (
                if c.is_empty() {
                    0
                } else {
                    c.bits() << (64 - c.len() as u32)
                },
                c.len(),
            )
        });
        let mut tree = CodeTree::default();
        let mut seen = HashSet::new();
        for (code, symbol) in leaves {
            if !seen.insert(symbol) {
                return Err(Error::encoding(format!(
                    "symbol {symbol} assigned to two leaves"
                )));
            }
            tree.insert(code, symbol)?;
        }
        Ok(tree)
    }

    /// Balanced tree over `width`-bit binary codes of the given symbols.
    pub fn fixed_width<I>(symbols: I, width: u8) -> Result<Self>
    where
        I: IntoIterator<Item = u64>,
    {
        let leaves: Result<Vec<_>> = symbols
            .into_iter()
            .map(|s| PrefixCode::new(s, width).map(|c| (c, s)))
            .collect();
        Self::from_leaves(leaves?)
    }

    fn insert(&mut self, code: PrefixCode, symbol: u64) -> Result<()> {
        let mut node = 0usize;
        for d in 0..code.len() {
            if self.nodes[node].is_leaf() {
                return Err(Error::encoding(format!(
                    "code {code} extends the leaf code {}",
                    code.truncate(d)
                )));
            }
            let bit = code.bit(d) as usize;
            let next = self.nodes[node].child[bit];
            node = if next == NONE {
                self.nodes.push(Node::empty());
                let idx = self.nodes.len() - 1;
                self.nodes[node].child[bit] = idx as u32;
                idx
            } else {
                next as usize
            };
        }
        let n = &mut self.nodes[node];
        if n.is_leaf() || n.child != [NONE, NONE] {
            return Err(Error::encoding(format!(
                "code {code} is a prefix of another code"
            )));
        }
        n.symbol = Some(symbol);
        self.leaves += 1;
        Ok(())
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves
    }

    pub fn is_empty(&self) -> bool {
        self.leaves == 0
    }

    fn find(&self, code: &PrefixCode) -> Option<usize> {
        let mut node = 0usize;
        for d in 0..code.len() {
            let next = self.nodes[node].child[code.bit(d) as usize];
            if next == NONE {
                return None;
            }
            node = next as usize;
        }
        Some(node)
    }

    /// True when `code` addresses a node (leaf or internal) of this tree.
    pub fn contains_path(&self, code: &PrefixCode) -> bool {
        self.find(code).is_some() && (!code.is_empty() || !self.is_empty())
    }

    pub fn leaf_symbol(&self, code: &PrefixCode) -> Option<u64> {
        self.find(code).and_then(|n| self.nodes[n].symbol)
    }

    /// Leaves in preorder (which is also lexicographic code order).
    pub fn leaves(&self) -> Vec<(PrefixCode, u64)> {
        let mut out = Vec::with_capacity(self.leaves);
        let mut stack = vec![(0usize, PrefixCode::EMPTY)];
        while let Some((n, code)) = stack.pop() {
            let node = &self.nodes[n];
            if let Some(s) = node.symbol {
                out.push((code, s));
                continue;
            }
            for bit in [1usize, 0] {
                let c = node.child[bit];
                if c != NONE {
                    stack.push((
                        c as usize,
                        code.push(bit == 1)
                            .expect("tree depth bounded by code length"),
                    ));
                }
            }
        }
        out
    }

    pub fn depth(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((n, d)) = stack.pop() {
            best = best.max(d);
            for &c in &self.nodes[n].child {
                if c != NONE {
                    stack.push((c as usize, d + 1));
                }
            }
        }
        best
    }

    /// Preorder, two bits per node (`00` leaf, `10` left only, `01` right
    /// only, `11` both children), then leaf symbols as varints.
    pub(crate) fn write_to(&self, w: &mut Writer) {
        let mut tags = BitVectorBuilder::new();
        let mut symbols = Vec::with_capacity(self.leaves);
        let mut stack = vec![0usize];
        let mut count = 0u64;
        while let Some(n) = stack.pop() {
            count += 1;
            let node = &self.nodes[n];
            tags.push(node.child[0] != NONE);
            tags.push(node.child[1] != NONE);
            if let Some(s) = node.symbol {
                symbols.push(s);
            }
            for bit in [1usize, 0] {
                if node.child[bit] != NONE {
                    stack.push(node.child[bit] as usize);
                }
            }
        }
        w.varint(if self.is_empty() { 0 } else { count });
        if self.is_empty() {
            return;
        }
        let tags = tags.finish();
        let mut byte = 0u8;
        for (i, b) in tags.iter().enumerate() {
            byte |= (b as u8) << (i % 8);
            if i % 8 == 7 {
                w.u8(byte);
                byte = 0;
            }
        }
        if !tags.len().is_multiple_of(8) {
            w.u8(byte);
        }
        for s in symbols {
            w.varint(s);
        }
    }

    pub(crate) fn read_from(r: &mut Reader<'_>) -> Result<Self> {
        let count = r.len(r.remaining().saturating_mul(4))?;
        if count == 0 {
            return Ok(CodeTree::default());
        }
        let tag_bytes = r.take((2 * count).div_ceil(8))?;
        if (2 * count) % 8 != 0 && tag_bytes[tag_bytes.len() - 1] >> ((2 * count) % 8) != 0 {
            return r.fail("nonzero padding in code tree topology");
        }
        let tag = |i: usize| (tag_bytes[i / 8] >> (i % 8)) & 1 == 1;
        let mut nodes: Vec<Node> = Vec::with_capacity(count);
        // Stack of (parent index, child slot) awaiting a node.
        let mut pending: Vec<(usize, usize)> = Vec::new();
        let mut leaves = 0;
        for i in 0..count {
            let idx = nodes.len();
            if i > 0 {
                let Some((parent, slot)) = pending.pop() else {
                    return r.fail("code tree topology has extra nodes");
                };
                nodes[parent].child[slot] = idx as u32;
            }
            let (left, right) = (tag(2 * i), tag(2 * i + 1));
            nodes.push(Node::empty());
            if !left && !right {
                nodes[idx].symbol = Some(0);
                leaves += 1;
            }
            if right {
                pending.push((idx, 1));
            }
            if left {
                pending.push((idx, 0));
            }
        }
        if !pending.is_empty() {
            return r.fail("code tree topology is truncated");
        }
        let mut seen = HashSet::with_capacity(leaves);
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            if nodes[n].is_leaf() {
                let s = r.varint()?;
                if !seen.insert(s) {
                    return r.fail(format!("duplicate leaf symbol {s}"));
                }
                nodes[n].symbol = Some(s);
                continue;
            }
            for bit in [1usize, 0] {
                if nodes[n].child[bit] != NONE {
                    stack.push(nodes[n].child[bit] as usize);
                }
            }
        }
        Ok(CodeTree { nodes, leaves })
    }
}

/// Sequence index over the leaf codes of a [`CodeTree`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WaveletTree {
    tree: CodeTree,
    levels: Vec<BitVector>,
    /// Start of each internal node's interval within its level.
    starts: Vec<usize>,
    len: usize,
}

impl WaveletTree {
    pub fn new(seq: &[PrefixCode], tree: CodeTree) -> Result<Self> {
        let mut leaf_of = Vec::with_capacity(seq.len());
        for (i, code) in seq.iter().enumerate() {
            match tree.find(code) {
                Some(n) if tree.nodes[n].is_leaf() => leaf_of.push(n),
                _ => {
                    return Err(Error::encoding(format!(
                        "element {i} ({code}) is not a leaf code"
                    )))
                }
            }
        }
        let mut levels = Vec::new();
        let root_internal = !tree.nodes[0].is_leaf() && !seq.is_empty();
        // Items reaching the current level, grouped by node in left-to-right order.
        let mut items: Vec<(u32, usize)> = if root_internal {
            (0..seq.len()).map(|i| (0, i)).collect()
        } else {
            Vec::new()
        };
        let mut depth = 0u8;
        while !items.is_empty() {
            let mut level = BitVectorBuilder::with_capacity(items.len());
            for &(_, i) in &items {
                level.push(seq[i].bit(depth));
            }
            levels.push(level.finish());
            let mut next = Vec::with_capacity(items.len());
            let mut g = 0;
            while g < items.len() {
                let node = items[g].0 as usize;
                let mut end = g;
                while end < items.len() && items[end].0 as usize == node {
                    end += 1;
                }
                for bit in [false, true] {
                    let child = tree.nodes[node].child[bit as usize] as usize;
                    for &(_, i) in &items[g..end] {
                        if seq[i].bit(depth) == bit && !tree.nodes[child].is_leaf() {
                            next.push((child as u32, i));
                        }
                    }
                }
                g = end;
            }
            items = next;
            depth += 1;
        }
        let starts = compute_starts(&tree, &levels, seq.len()).map_err(Error::Build)?;
        debug_assert!(leaf_of.len() == seq.len());
        Ok(WaveletTree {
            tree,
            levels,
            starts,
            len: seq.len(),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn code_tree(&self) -> &CodeTree {
        &self.tree
    }

    /// Total payload bits over all levels.
    pub fn level_bits(&self) -> usize {
        self.levels.iter().map(BitVector::len).sum()
    }

    fn node(&self, n: usize) -> &Node {
        &self.tree.nodes[n]
    }

    fn leaf_at(&self, i: usize) -> Result<(PrefixCode, u64)> {
        if i >= self.len {
            return Err(Error::OutOfRange {
                index: i,
                len: self.len,
            });
        }
        let mut node = 0usize;
        let mut pos = i;
        let mut code = PrefixCode::EMPTY;
        let mut depth = 0;
        while let Node {
            child,
            symbol: None,
        } = self.node(node)
        {
            let level = &self.levels[depth];
            let b = self.starts[node];
            let bit = level.get(b + pos);
            pos = level.rank_bit(bit, b + pos) - level.rank_bit(bit, b);
            node = child[bit as usize] as usize;
            code = code.push(bit)?;
            depth += 1;
        }
        Ok((code, self.node(node).symbol.unwrap()))
    }

    /// Leaf code of the `i`-th element.
    pub fn access(&self, i: usize) -> Result<PrefixCode> {
        self.leaf_at(i).map(|(c, _)| c)
    }

    /// Leaf symbol of the `i`-th element.
    pub fn symbol_at(&self, i: usize) -> Result<u64> {
        self.leaf_at(i).map(|(_, s)| s)
    }

    /// Descends along `p`, mapping the prefix length `i` to each node's
    /// interval. Returns the final node and the mapped count.
    fn descend(&self, p: &PrefixCode, i: usize) -> Result<(usize, usize)> {
        if p.is_empty() {
            return Ok((0, i));
        }
        let mut node = 0usize;
        let mut pos = i;
        for depth in 0..p.len() {
            let n = self.node(node);
            if n.is_leaf() {
                return Err(Error::encoding(format!(
                    "{p} is not a path of the code tree"
                )));
            }
            let bit = p.bit(depth);
            let child = n.child[bit as usize];
            if child == NONE {
                return Err(Error::encoding(format!(
                    "{p} is not a path of the code tree"
                )));
            }
            if pos > 0 {
                let level = &self.levels[depth as usize];
                let b = self.starts[node];
                pos = level.rank_bit(bit, b + pos) - level.rank_bit(bit, b);
            }
            node = child as usize;
        }
        Ok((node, pos))
    }

    /// Occurrences in `[0, i)` of elements whose code starts with `p`.
    pub fn rank_prefix(&self, p: &PrefixCode, i: usize) -> Result<usize> {
        if i > self.len {
            return Err(Error::OutOfRange {
                index: i,
                len: self.len,
            });
        }
        self.descend(p, i).map(|(_, n)| n)
    }

    /// Occurrences of leaf code `c` in `[0, i)`.
    pub fn rank(&self, c: &PrefixCode, i: usize) -> Result<usize> {
        if i > self.len {
            return Err(Error::OutOfRange {
                index: i,
                len: self.len,
            });
        }
        let (node, n) = self.descend(c, i)?;
        if !self.node(node).is_leaf() {
            return Err(Error::encoding(format!("{c} is not a leaf code")));
        }
        Ok(n)
    }

    /// Total occurrences of codes starting with `p`.
    pub fn count_prefix(&self, p: &PrefixCode) -> Result<usize> {
        self.rank_prefix(p, self.len)
    }

    /// Position of the `k`-th (1-based) element whose code starts with `p`.
    pub fn select_prefix(&self, p: &PrefixCode, k: usize) -> Result<usize> {
        self.select_impl(p, k, false)
    }

    /// Position of the `k`-th (1-based) occurrence of leaf code `c`.
    pub fn select(&self, c: &PrefixCode, k: usize) -> Result<usize> {
        self.select_impl(c, k, true)
    }

    fn select_impl(&self, p: &PrefixCode, k: usize, leaf_only: bool) -> Result<usize> {
        let mut path = Vec::with_capacity(p.len() as usize);
        let mut node = 0usize;
        let mut size = self.len;
        for depth in 0..p.len() {
            let n = self.node(node);
            let child = if n.is_leaf() {
                NONE
            } else {
                n.child[p.bit(depth) as usize]
            };
            if child == NONE || self.tree.is_empty() {
                return Err(Error::encoding(format!(
                    "{p} is not a path of the code tree"
                )));
            }
            let bit = p.bit(depth);
            if size > 0 {
                let level = &self.levels[depth as usize];
                let b = self.starts[node];
                size = level.rank_bit(bit, b + size) - level.rank_bit(bit, b);
                path.push((depth as usize, b, bit));
            }
            node = child as usize;
        }
        if leaf_only && !self.node(node).is_leaf() {
            return Err(Error::encoding(format!("{p} is not a leaf code")));
        }
        if k == 0 || k > size {
            return Err(Error::NotFound {
                ordinal: k,
                available: size,
            });
        }
        let mut pos = k - 1;
        for &(depth, b, bit) in path.iter().rev() {
            let level = &self.levels[depth];
            let target = level.rank_bit(bit, b) + pos + 1;
            pos = level
                .select_bit(bit, target)
                .ok_or_else(|| Error::Internal("wavelet level select".into()))?
                - b;
        }
        Ok(pos)
    }

    /// Standalone serialized form (the same bytes the container uses).
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        self.write_to(&mut w);
        w.into_inner()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes, 0);
        let v = Self::read_from(&mut r)?;
        if !r.is_empty() {
            return r.fail("trailing bytes after wavelet tree");
        }
        Ok(v)
    }

    pub(crate) fn write_to(&self, w: &mut Writer) {
        w.u64(self.len as u64);
        self.tree.write_to(w);
        w.varint(self.levels.len() as u64);
        for level in &self.levels {
            level.write_to(w);
        }
    }

    pub(crate) fn read_from(r: &mut Reader<'_>) -> Result<Self> {
        let len = r.u64()? as usize;
        let tree = CodeTree::read_from(r)?;
        let n_levels = r.len(64)?;
        let mut levels = Vec::with_capacity(n_levels);
        for _ in 0..n_levels {
            levels.push(BitVector::read_from(r)?);
        }
        let starts =
            compute_starts(&tree, &levels, len).map_err(|m| Error::format(r.offset(), m))?;
        Ok(WaveletTree {
            tree,
            levels,
            starts,
            len,
        })
    }
}

/// Derives every internal node's interval start from the level bits,
/// checking that the levels are consistent with the tree shape.
fn compute_starts(
    tree: &CodeTree,
    levels: &[BitVector],
    len: usize,
) -> std::result::Result<Vec<usize>, String> {
    let mut starts = vec![0usize; tree.nodes.len()];
    let root_internal = !tree.nodes[0].is_leaf() && len > 0;
    if len > 0 && tree.is_empty() {
        return Err("non-empty sequence over an empty code tree".into());
    }
    let mut frontier: Vec<(usize, usize, usize)> = if root_internal {
        vec![(0, 0, len)]
    } else {
        Vec::new()
    };
    let mut depth = 0;
    while !frontier.is_empty() {
        let Some(level) = levels.get(depth) else {
            return Err(format!("missing wavelet level {depth}"));
        };
        let mut next = Vec::new();
        let mut offset = 0;
        for &(node, b, size) in &frontier {
            let e = b + size;
            if e > level.len() {
                return Err(format!("wavelet level {depth} shorter than node interval"));
            }
            let ones = level.rank1(e) - level.rank1(b);
            for (bit, count) in [(0usize, size - ones), (1, ones)] {
                let child = tree.nodes[node].child[bit];
                if child == NONE {
                    if count > 0 {
                        return Err(format!("bits at level {depth} lead to a missing child"));
                    }
                    continue;
                }
                if !tree.nodes[child as usize].is_leaf() {
                    starts[child as usize] = offset;
                    if count > 0 {
                        next.push((child as usize, offset, count));
                    }
                    offset += count;
                }
            }
        }
        if offset != levels.get(depth + 1).map_or(0, BitVector::len) {
            return Err(format!("wavelet level {} has unexpected length", depth + 1));
        }
        frontier = next;
        depth += 1;
    }
    if depth != levels.len() {
        return Err(format!(
            "{} wavelet levels present, {depth} reachable",
            levels.len()
        ));
    }
    if root_internal && levels[0].len() != len {
        return Err("root level length differs from sequence length".into());
    }
    Ok(starts)
}
