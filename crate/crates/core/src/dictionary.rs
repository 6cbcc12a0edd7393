//! Instance-term dictionary: front-coded sorted strings with binary search.

use std::collections::HashSet;

use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};
use crate::term::Term;

const BLOCK: usize = 16;

/// How ids are assigned to terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DictPolicy {
    /// Ids follow the codepoint order of the canonical N-Triples form.
    #[default]
    Sorted,
    /// Ids follow first occurrence in the input.
    FirstSeen,
}

impl DictPolicy {
    fn tag(self) -> u8 {
        match self {
            DictPolicy::Sorted => 0,
            DictPolicy::FirstSeen => 1,
        }
    }
}

impl std::str::FromStr for DictPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sorted" => Ok(DictPolicy::Sorted),
            "first_seen" | "first-seen" => Ok(DictPolicy::FirstSeen),
            other => Err(Error::Query(format!("unknown dictionary policy {other:?}"))),
        }
    }
}

/// Bijection between instance terms and ids `1..=len`. Id 0 means absent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dictionary {
    policy: DictPolicy,
    len: usize,
    /// Front-coded blocks of the sorted canonical strings.
    data: Vec<u8>,
    block_starts: Vec<usize>,
    /// Only for `FirstSeen`: sorted rank of id `i + 1`, and its inverse.
    rank_of_id: Vec<u32>,
    id_of_rank: Vec<u32>,
}

impl Default for Dictionary {
    fn default() -> Self {
        Dictionary::build(std::iter::empty::<&Term>(), DictPolicy::Sorted)
    }
}

fn shared_prefix(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

impl Dictionary {
    pub fn build<'a, I>(terms: I, policy: DictPolicy) -> Self
    where
        I: IntoIterator<Item = &'a Term>,
    {
        let mut first_seen: Vec<String> = Vec::new();
        let mut seen: HashSet<String> = HashSet::new();
        for t in terms {
            let s = t.to_string();
            if seen.insert(s.clone()) {
                first_seen.push(s);
            }
        }
        drop(seen);
        let mut sorted: Vec<usize> = (0..first_seen.len()).collect();
        sorted.sort_by(|&a, &b| first_seen[a].cmp(&first_seen[b]));
        let (rank_of_id, id_of_rank) = match policy {
            DictPolicy::Sorted => (Vec::new(), Vec::new()),
            DictPolicy::FirstSeen => {
                let mut rank_of_id = vec![0u32; sorted.len()];
                for (rank, &i) in sorted.iter().enumerate() {
                    rank_of_id[i] = rank as u32;
                }
                let id_of_rank = sorted.iter().map(|&i| i as u32 + 1).collect();
                (rank_of_id, id_of_rank)
            }
        };
        let mut w = Writer::new();
        let mut prev: &[u8] = &[];
        for (rank, &i) in sorted.iter().enumerate() {
            let cur = first_seen[i].as_bytes();
            if rank % BLOCK == 0 {
                w.bytes(cur);
            } else {
                let common = shared_prefix(prev, cur);
                w.varint(common as u64);
                w.bytes(&cur[common..]);
            }
            prev = cur;
        }
        let data = w.into_inner();
        let block_starts =
            index_blocks(&data, sorted.len()).expect("freshly written blocks are well formed");
        Dictionary {
            policy,
            len: sorted.len(),
            data,
            block_starts,
            rank_of_id,
            id_of_rank,
        }
    }

    pub fn policy(&self) -> DictPolicy {
        self.policy
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Bytes used by the front-coded strings.
    pub fn payload_bytes(&self) -> usize {
        self.data.len()
    }

    fn block_head(&self, b: usize) -> &[u8] {
        let mut r = Reader::new(&self.data[self.block_starts[b]..], 0);
        r.bytes().expect("validated block")
    }

    /// Sorted rank of `s`, if present.
    fn rank_of(&self, s: &[u8]) -> Option<usize> {
        let blocks = self.block_starts.len();
        // Last block whose head is <= s.
        let (mut lo, mut hi) = (0usize, blocks);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.block_head(mid) <= s {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        if lo == 0 {
            return None;
        }
        let b = lo - 1;
        let mut r = Reader::new(&self.data[self.block_starts[b]..], 0);
        let mut cur = r.bytes().ok()?.to_vec();
        let end = ((b + 1) * BLOCK).min(self.len);
        for rank in b * BLOCK..end {
            if rank > b * BLOCK {
                let common = r.varint().ok()? as usize;
                cur.truncate(common);
                cur.extend_from_slice(r.bytes().ok()?);
            }
            match cur.as_slice().cmp(s) {
                std::cmp::Ordering::Equal => return Some(rank),
                std::cmp::Ordering::Greater => return None,
                std::cmp::Ordering::Less => {}
            }
        }
        None
    }

    fn string_at(&self, rank: usize) -> String {
        let b = rank / BLOCK;
        let mut r = Reader::new(&self.data[self.block_starts[b]..], 0);
        let mut cur = r.bytes().expect("validated block").to_vec();
        for _ in b * BLOCK..rank {
            let common = r.varint().expect("validated block") as usize;
            cur.truncate(common);
            cur.extend_from_slice(r.bytes().expect("validated block"));
        }
        String::from_utf8(cur).expect("validated utf-8")
    }

    /// Id of a term in canonical N-Triples form, or `None`.
    pub fn encode_str(&self, canonical: &str) -> Option<u64> {
        let rank = self.rank_of(canonical.as_bytes())?;
        Some(match self.policy {
            DictPolicy::Sorted => rank as u64 + 1,
            DictPolicy::FirstSeen => self.id_of_rank[rank] as u64,
        })
    }

    pub fn encode(&self, term: &Term) -> Option<u64> {
        self.encode_str(&term.to_string())
    }

    /// Canonical N-Triples form of `id`.
    pub fn decode_str(&self, id: u64) -> Result<String> {
        if id == 0 || id > self.len as u64 {
            return Err(Error::OutOfRange {
                index: id as usize,
                len: self.len,
            });
        }
        let rank = match self.policy {
            DictPolicy::Sorted => id as usize - 1,
            DictPolicy::FirstSeen => self.rank_of_id[id as usize - 1] as usize,
        };
        Ok(self.string_at(rank))
    }

    pub fn decode(&self, id: u64) -> Result<Term> {
        Term::parse(&self.decode_str(id)?)
    }

    /// Ids with their canonical strings, in id order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, String)> + '_ {
        (1..=self.len as u64).map(move |id| (id, self.decode_str(id).expect("id in range")))
    }

    pub(crate) fn write_to(&self, w: &mut Writer) {
        w.u8(self.policy.tag());
        w.varint(self.len as u64);
        w.bytes(&self.data);
        for &id in &self.id_of_rank {
            w.varint(id as u64);
        }
    }

    pub(crate) fn read_from(r: &mut Reader<'_>) -> Result<Self> {
        let policy = match r.u8()? {
            0 => DictPolicy::Sorted,
            1 => DictPolicy::FirstSeen,
            t => return r.fail(format!("unknown dictionary policy tag {t}")),
        };
        let len = r.len(u32::MAX as usize)?;
        let at = r.offset();
        let data = r.bytes()?.to_vec();
        let block_starts = index_blocks(&data, len)
            .map_err(|m| Error::format(at, format!("dictionary blocks: {m}")))?;
        let (mut rank_of_id, mut id_of_rank) = (Vec::new(), Vec::new());
        if policy == DictPolicy::FirstSeen {
            rank_of_id = vec![u32::MAX; len];
            for rank in 0..len {
                let id = r.len(len)?;
                if id == 0 || rank_of_id[id - 1] != u32::MAX {
                    return r.fail("dictionary permutation is not a bijection");
                }
                rank_of_id[id - 1] = rank as u32;
                id_of_rank.push(id as u32);
            }
        }
        Ok(Dictionary {
            policy,
            len,
            data,
            block_starts,
            rank_of_id,
            id_of_rank,
        })
    }
}

/// Validates the front-coded stream and returns each block's byte offset.
fn index_blocks(data: &[u8], len: usize) -> std::result::Result<Vec<usize>, String> {
    let mut r = Reader::new(data, 0);
    let mut starts = Vec::with_capacity(len.div_ceil(BLOCK));
    let mut prev: Vec<u8> = Vec::new();
    for rank in 0..len {
        if rank % BLOCK == 0 {
            starts.push(r.offset());
            let head = r.bytes().map_err(|e| e.to_string())?;
            if rank > 0 && head <= prev.as_slice() {
                return Err(format!("entry {rank} out of order"));
            }
            prev = head.to_vec();
        } else {
            let common = r.varint().map_err(|e| e.to_string())? as usize;
            if common > prev.len() {
                return Err(format!("entry {rank} shares more than its predecessor"));
            }
            let mut cur = prev[..common].to_vec();
            cur.extend_from_slice(r.bytes().map_err(|e| e.to_string())?);
            if cur <= prev {
                return Err(format!("entry {rank} out of order"));
            }
            prev = cur;
        }
        if std::str::from_utf8(&prev).is_err() {
            return Err(format!("entry {rank} is not utf-8"));
        }
    }
    if !r.is_empty() {
        return Err("trailing bytes".into());
    }
    Ok(starts)
}
