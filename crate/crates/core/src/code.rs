use std::fmt;

use crate::error::{Error, Result};

/// Longest code representable in sentinel form inside a `u64`.
pub const MAX_CODE_LEN: u8 = 63;

/// A variable-length bit string, most significant bit first.
///
/// Codes identify ontology elements (a concept's code is a prefix of the
/// codes of all its sub-concepts) and, more generally, paths in a
/// [`CodeTree`](crate::wavelet::CodeTree).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PrefixCode {
    bits: u64,
    len: u8,
}

impl PrefixCode {
    pub const EMPTY: PrefixCode = PrefixCode { bits: 0, len: 0 };

    pub fn new(bits: u64, len: u8) -> Result<Self> {
        if len > MAX_CODE_LEN {
            return Err(Error::encoding(format!(
                "code length {len} exceeds {MAX_CODE_LEN}"
            )));
        }
        if len < 64 && bits >> len != 0 {
            return Err(Error::encoding(format!(
                "value {bits:#b} does not fit in {len} bits"
            )));
        }
        Ok(PrefixCode { bits, len })
    }

    /// Parses `0`/`1` characters, ignoring spaces (`"01 010 10 11"`).
    pub fn parse(s: &str) -> Result<Self> {
        let mut code = PrefixCode::EMPTY;
        for c in s.chars() {
            match c {
                '0' => code = code.push(false)?,
                '1' => code = code.push(true)?,
                ' ' | '_' => {}
                other => return Err(Error::encoding(format!("invalid code character {other:?}"))),
            }
        }
        Ok(code)
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> u8 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Bit at depth `i` (0 = most significant).
    pub fn bit(&self, i: u8) -> bool {
        debug_assert!(i < self.len);
        (self.bits >> (self.len - 1 - i)) & 1 == 1
    }

    pub fn push(&self, bit: bool) -> Result<Self> {
        self.extend(bit as u64, 1)
    }

    /// Appends a `width`-bit local field.
    pub fn extend(&self, value: u64, width: u8) -> Result<Self> {
        let len = self.len as u32 + width as u32;
        if len > MAX_CODE_LEN as u32 {
            return Err(Error::encoding(format!(
                "code length {len} exceeds {MAX_CODE_LEN}"
            )));
        }
        if width < 64 && value >> width != 0 {
            return Err(Error::encoding(format!(
                "local value {value} does not fit in {width} bits"
            )));
        }
        let bits = if width == 0 {
            self.bits
        } else {
            (self.bits << width) | value
        };
        Ok(PrefixCode {
            bits,
            len: len as u8,
        })
    }

    /// The first `len` bits.
    pub fn truncate(&self, len: u8) -> Self {
        if len >= self.len {
            return *self;
        }
        PrefixCode {
            bits: self.bits >> (self.len - len),
            len,
        }
    }

    pub fn is_prefix_of(&self, other: &PrefixCode) -> bool {
        self.len <= other.len && other.truncate(self.len) == *self
    }

    /// `(1 << len) | bits`: the leading one marks where significant bits start.
    pub fn to_sentinel(&self) -> u64 {
        (1u64 << self.len) | self.bits
    }

    pub fn from_sentinel(x: u64) -> Result<Self> {
        if x == 0 {
            return Err(Error::encoding("sentinel integer 0 carries no code"));
        }
        let len = 63 - x.leading_zeros() as u8;
        Ok(PrefixCode {
            bits: x ^ (1u64 << len),
            len,
        })
    }
}

impl fmt::Display for PrefixCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.bit(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for PrefixCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PrefixCode({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sentinel_examples() {
        let professor = PrefixCode::parse("01 010 10 11").unwrap();
        assert_eq!(professor.to_sentinel(), 683);
        let employee = PrefixCode::parse("01 010").unwrap();
        assert_eq!(employee.to_sentinel(), 42);
        let back = PrefixCode::from_sentinel(683).unwrap();
        assert_eq!(back.to_string(), "010101011");
        assert_eq!(back.len(), 9);
        assert!(PrefixCode::from_sentinel(0).is_err());
        assert_eq!(PrefixCode::EMPTY.to_sentinel(), 1);
    }

    #[test]
    fn prefix_relation() {
        let a = PrefixCode::parse("0101").unwrap();
        let b = PrefixCode::parse("010110").unwrap();
        assert!(a.is_prefix_of(&b));
        assert!(!b.is_prefix_of(&a));
        assert!(PrefixCode::EMPTY.is_prefix_of(&a));
        assert_eq!(b.truncate(4), a);
    }

    #[test]
    fn overlong_codes_rejected() {
        let c = PrefixCode::new(0, 63).unwrap();
        assert!(c.push(true).is_err());
        assert!(PrefixCode::new(4, 2).is_err());
    }

    proptest! {
        #[test]
        fn sentinel_round_trip(len in 0u8..=63, raw in any::<u64>()) {
            let bits = if len == 0 { 0 } else { raw & (u64::MAX >> (64 - len as u32)) };
            let c = PrefixCode::new(bits, len).unwrap();
            prop_assert!(c.to_sentinel() > 0);
            prop_assert_eq!(PrefixCode::from_sentinel(c.to_sentinel()).unwrap(), c);
        }
    }
}
