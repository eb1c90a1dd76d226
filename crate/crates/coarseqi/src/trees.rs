//! Regular trees with a distinguished end, addressed by finite digit strings.
//!
//! A vertex of the (l+1)-regular tree `T_l` is encoded by its Busemann height
//! together with the digits written on the edges of its upward path. Heights
//! increase toward the distinguished end: every vertex has one neighbour
//! above itself and `l` children below, and the all-zero path through height
//! 0 is the origin. The digit on the edge between heights `i` and `i+1` has
//! index `i`.
//!
//! [`LadicAddress`] values are finitely supported digit maps on the integers.
//! An address names both a vertex (digits at indices at or above its height;
//! everything below is zero) and the boundary ray obtained by continuing
//! downward through the zero child forever. Addresses print as
//! `l:h:d1d2...dk` where `h` is one above the index of `d1` and digits are
//! listed downward; the zero address prints as `l:0:0`.

use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// Finitely supported digit map on `Z` with digits in `0..base`.
///
/// Invariants: `2 <= base <= 10`; stored digits are normalized so that the
/// first and last stored digit are nonzero (the zero map stores nothing and
/// anchors at 0). Equality, hashing and ordering are on the normal form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LadicAddress {
    base: u8,
    /// One above the index of the first stored digit.
    anchor: i64,
    /// `digits[j]` is the digit at index `anchor - 1 - j`.
    digits: Vec<u8>,
}

impl LadicAddress {
    /// The zero address in the given base.
    pub fn zero(base: u8) -> Result<Self> {
        if !(2..=10).contains(&base) {
            return Err(Error::Parse {
                detail: format!("address base {base} outside 2..=10"),
            });
        }
        Ok(LadicAddress { base, anchor: 0, digits: Vec::new() })
    }

    /// Builds an address from digits listed downward from index `anchor - 1`.
    pub fn from_digits(base: u8, anchor: i64, digits: Vec<u8>) -> Result<Self> {
        if !(2..=10).contains(&base) {
            return Err(Error::Parse {
                detail: format!("address base {base} outside 2..=10"),
            });
        }
        if let Some(&d) = digits.iter().find(|&&d| d >= base) {
            return Err(Error::Parse {
                detail: format!("digit {d} out of range for base {base}"),
            });
        }
        Ok(Self::normalized(base, anchor, digits))
    }

    fn normalized(base: u8, mut anchor: i64, mut digits: Vec<u8>) -> Self {
        let lead = digits.iter().take_while(|&&d| d == 0).count();
        if lead > 0 {
            digits.drain(..lead);
            anchor -= lead as i64;
        }
        while digits.last() == Some(&0) {
            digits.pop();
        }
        if digits.is_empty() {
            anchor = 0;
        }
        LadicAddress { base, anchor, digits }
    }

    pub fn base(&self) -> u8 {
        self.base
    }

    pub fn is_zero(&self) -> bool {
        self.digits.is_empty()
    }

    /// Digit at `index` (zero outside the stored span).
    pub fn digit(&self, index: i64) -> u8 {
        if self.digits.is_empty() || index >= self.anchor {
            return 0;
        }
        let j = self.anchor - 1 - index;
        if j as usize >= self.digits.len() {
            return 0;
        }
        self.digits[j as usize]
    }

    /// Highest index carrying a nonzero digit.
    pub fn support_max(&self) -> Option<i64> {
        if self.digits.is_empty() { None } else { Some(self.anchor - 1) }
    }

    /// Lowest index carrying a nonzero digit.
    pub fn support_min(&self) -> Option<i64> {
        if self.digits.is_empty() {
            None
        } else {
            Some(self.anchor - self.digits.len() as i64)
        }
    }

    /// Copy with the digit at `index` replaced by `d`.
    pub fn with_digit(&self, index: i64, d: u8) -> Result<Self> {
        if d >= self.base {
            return Err(Error::Parse {
                detail: format!("digit {d} out of range for base {}", self.base),
            });
        }
        if self.digit(index) == d {
            return Ok(self.clone());
        }
        let top = self.support_max().map_or(index, |t| t.max(index));
        let bot = self.support_min().map_or(index, |b| b.min(index));
        let mut digits = Vec::with_capacity((top - bot + 1) as usize);
        let mut i = top;
        while i >= bot {
            digits.push(if i == index { d } else { self.digit(i) });
            i -= 1;
        }
        Ok(Self::normalized(self.base, top + 1, digits))
    }

    /// Copy with every digit below `cutoff` zeroed.
    pub fn truncate_below(&self, cutoff: i64) -> Self {
        match self.support_min() {
            Some(b) if b < cutoff => {
                let keep = (self.anchor - cutoff).max(0) as usize;
                let digits = self.digits[..keep.min(self.digits.len())].to_vec();
                Self::normalized(self.base, self.anchor, digits)
            }
            _ => self.clone(),
        }
    }

    /// Copy with all indices shifted upward by `k`.
    pub fn shift(&self, k: i64) -> Self {
        if self.digits.is_empty() {
            return self.clone();
        }
        LadicAddress { base: self.base, anchor: self.anchor + k, digits: self.digits.clone() }
    }

    /// Digitwise difference `self - other` mod base (requires equal bases).
    pub fn digit_sub(&self, other: &Self) -> Result<Self> {
        if self.base != other.base {
            return Err(Error::Parse {
                detail: format!("base mismatch {} vs {}", self.base, other.base),
            });
        }
        let (mut top, mut bot) = (i64::MIN, i64::MAX);
        for a in [self, other] {
            if let (Some(t), Some(b)) = (a.support_max(), a.support_min()) {
                top = top.max(t);
                bot = bot.min(b);
            }
        }
        if top < bot {
            return LadicAddress::zero(self.base);
        }
        let mut digits = Vec::with_capacity((top - bot + 1) as usize);
        let mut i = top;
        while i >= bot {
            let d = (self.digit(i) + self.base - other.digit(i)) % self.base;
            digits.push(d);
            i -= 1;
        }
        Ok(Self::normalized(self.base, top + 1, digits))
    }

    /// Rewrites every nonzero digit through `f(index, digit)`, optionally into
    /// a new base. `f` must send 0 to 0 for the result to stay well formed;
    /// digits out of range for `new_base` are an error.
    pub fn digit_map(&self, new_base: u8, mut f: impl FnMut(i64, u8) -> u8) -> Result<Self> {
        let (Some(top), Some(bot)) = (self.support_max(), self.support_min()) else {
            return LadicAddress::zero(new_base);
        };
        let mut digits = Vec::with_capacity((top - bot + 1) as usize);
        let mut i = top;
        while i >= bot {
            digits.push(f(i, self.digit(i)));
            i -= 1;
        }
        LadicAddress::from_digits(new_base, top + 1, digits)
    }

    /// Highest index `>= floor` where `self` and `other` disagree.
    pub fn max_disagreement_at_or_above(&self, other: &Self, floor: i64) -> Option<i64> {
        let top = match (self.support_max(), other.support_max()) {
            (None, None) => return None,
            (a, b) => a.unwrap_or(i64::MIN).max(b.unwrap_or(i64::MIN)),
        };
        let mut i = top;
        while i >= floor {
            if self.digit(i) != other.digit(i) {
                return Some(i);
            }
            i -= 1;
        }
        None
    }
}

impl fmt::Display for LadicAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:", self.base, self.anchor)?;
        if self.digits.is_empty() {
            return write!(f, "0");
        }
        for d in &self.digits {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for LadicAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for LadicAddress {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Parse {
                detail: format!("address `{s}` is not of the form base:anchor:digits"),
            });
        }
        let base: u8 = parts[0].parse().map_err(|_| Error::Parse {
            detail: format!("bad base in address `{s}`"),
        })?;
        let anchor: i64 = parts[1].parse().map_err(|_| Error::Parse {
            detail: format!("bad anchor in address `{s}`"),
        })?;
        let mut digits = Vec::with_capacity(parts[2].len());
        for c in parts[2].chars() {
            let d = c.to_digit(10).ok_or_else(|| Error::Parse {
                detail: format!("bad digit `{c}` in address `{s}`"),
            })?;
            digits.push(d as u8);
        }
        LadicAddress::from_digits(base, anchor, digits)
    }
}

/// A vertex of `T_l`: a height plus the digits on its upward path.
///
/// Invariant: the address carries no digit below the height, so the address
/// is also the canonical ray through the vertex.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct TreeVertex {
    height: i64,
    address: LadicAddress,
}

impl TreeVertex {
    /// Vertex at `height` on the ray `address` (digits below get zeroed).
    pub fn new(height: i64, address: LadicAddress) -> Self {
        TreeVertex { height, address: address.truncate_below(height) }
    }

    pub fn origin(base: u8) -> Result<Self> {
        Ok(TreeVertex { height: 0, address: LadicAddress::zero(base)? })
    }

    pub fn height(&self) -> i64 {
        self.height
    }

    pub fn address(&self) -> &LadicAddress {
        &self.address
    }

    pub fn base(&self) -> u8 {
        self.address.base()
    }

    /// The neighbour above.
    pub fn parent(&self) -> TreeVertex {
        TreeVertex {
            height: self.height + 1,
            address: self.address.truncate_below(self.height + 1),
        }
    }

    /// The child reached through digit `d`.
    pub fn child(&self, d: u8) -> Result<TreeVertex> {
        Ok(TreeVertex {
            height: self.height - 1,
            address: self.address.with_digit(self.height - 1, d)?,
        })
    }

    pub fn children(&self) -> Vec<TreeVertex> {
        (0..self.base()).map(|d| self.child(d).expect("digit in range")).collect()
    }

    /// Ancestor at `h >= height`.
    pub fn ancestor_at(&self, h: i64) -> TreeVertex {
        assert!(h >= self.height, "ancestor height {h} below vertex height {}", self.height);
        TreeVertex { height: h, address: self.address.truncate_below(h) }
    }

    /// Descendant reached by reading `word` downward (first digit on the edge
    /// just below this vertex).
    pub fn descend(&self, word: &[u8]) -> Result<TreeVertex> {
        let mut v = self.clone();
        for &d in word {
            v = v.child(d)?;
        }
        Ok(v)
    }

    pub fn is_ancestor_of(&self, other: &TreeVertex) -> bool {
        other.height <= self.height && &other.ancestor_at(self.height) == self
    }

    /// Height of the lowest common upward meeting point.
    pub fn confluence_height(&self, other: &TreeVertex) -> i64 {
        let floor = self.height.max(other.height);
        match self.address.max_disagreement_at_or_above(&other.address, floor) {
            Some(i) => i + 1,
            None => floor,
        }
    }
}

impl fmt::Display for TreeVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[h={} {}]", self.height, self.address)
    }
}

/// Graph distance in the tree: both vertices climb to the confluence.
pub fn tree_distance(u: &TreeVertex, v: &TreeVertex) -> u64 {
    let c = u.confluence_height(v);
    ((c - u.height) + (c - v.height)) as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn addr(s: &str) -> LadicAddress {
        s.parse().unwrap()
    }

    #[test]
    fn zero_address_prints_and_parses() {
        let z = LadicAddress::zero(3).unwrap();
        assert_eq!(z.to_string(), "3:0:0");
        assert_eq!(addr("3:0:0"), z);
        assert_eq!(addr("3:5:000"), z);
        assert!(z.is_zero());
    }

    #[test]
    fn normalization_trims_both_ends() {
        let a = LadicAddress::from_digits(3, 4, vec![0, 0, 2, 1, 0, 0]).unwrap();
        assert_eq!(a.anchor, 2);
        assert_eq!(a.digits, vec![2, 1]);
        assert_eq!(a.to_string(), "3:2:21");
        assert_eq!(a.digit(1), 2);
        assert_eq!(a.digit(0), 1);
        assert_eq!(a.digit(2), 0);
        assert_eq!(a.digit(-1), 0);
        assert_eq!(a.support_max(), Some(1));
        assert_eq!(a.support_min(), Some(0));
    }

    #[test]
    fn with_digit_extends_span() {
        let a = addr("2:0:0");
        let b = a.with_digit(3, 1).unwrap();
        assert_eq!(b.to_string(), "2:4:1");
        let c = b.with_digit(-2, 1).unwrap();
        assert_eq!(c.to_string(), "2:4:100001");
        let d = c.with_digit(3, 0).unwrap();
        assert_eq!(d.to_string(), "2:-1:1");
    }

    #[test]
    fn truncate_and_shift() {
        let a = addr("3:3:1202");
        assert_eq!(a.truncate_below(1).to_string(), "3:3:12");
        assert_eq!(a.truncate_below(4).to_string(), "3:0:0");
        assert_eq!(a.truncate_below(-5), a);
        assert_eq!(a.shift(2).to_string(), "3:5:1202");
        assert_eq!(a.shift(-3).to_string(), "3:0:1202");
    }

    #[test]
    fn vertex_parent_child_roundtrip() {
        let o = TreeVertex::origin(3).unwrap();
        let c = o.child(2).unwrap();
        assert_eq!(c.height(), -1);
        assert_eq!(c.parent(), o);
        assert_eq!(o.children().len(), 3);
        let w = o.descend(&[1, 0, 2]).unwrap();
        assert_eq!(w.height(), -3);
        assert_eq!(w.address().digit(-1), 1);
        assert_eq!(w.address().digit(-2), 0);
        assert_eq!(w.address().digit(-3), 2);
        assert_eq!(w.ancestor_at(0), o);
        assert!(o.is_ancestor_of(&w));
    }

    #[test]
    fn confluence_and_distance_small_cases() {
        let o = TreeVertex::origin(2).unwrap();
        let a = o.descend(&[0, 1]).unwrap();
        let b = o.descend(&[1, 1]).unwrap();
        // a and b split immediately below the origin.
        assert_eq!(a.confluence_height(&b), 0);
        assert_eq!(tree_distance(&a, &b), 4);
        assert_eq!(tree_distance(&a, &o), 2);
        assert_eq!(tree_distance(&a, &a), 0);
        let c = o.descend(&[0, 0]).unwrap();
        assert_eq!(tree_distance(&a, &c), 2);
        // Vertices above the origin along the trunk.
        let up = TreeVertex::new(3, LadicAddress::zero(2).unwrap());
        assert_eq!(tree_distance(&up, &a), 5);
    }

    #[test]
    fn parse_rejects_malformed() {
        assert!("3:0".parse::<LadicAddress>().is_err());
        assert!("1:0:0".parse::<LadicAddress>().is_err());
        assert!("11:0:0".parse::<LadicAddress>().is_err());
        assert!("3:0:3".parse::<LadicAddress>().is_err());
        assert!("3:x:0".parse::<LadicAddress>().is_err());
    }

    fn arb_address(base: u8) -> impl Strategy<Value = LadicAddress> {
        (prop::collection::vec(0..base, 0..8), -6i64..6).prop_map(move |(digits, anchor)| {
            LadicAddress::from_digits(base, anchor, digits).unwrap()
        })
    }

    proptest! {
        #[test]
        fn display_parse_roundtrip(a in arb_address(3)) {
            let s = a.to_string();
            prop_assert_eq!(s.parse::<LadicAddress>().unwrap(), a);
        }

        #[test]
        fn with_digit_reads_back(a in arb_address(4), i in -8i64..8, d in 0u8..4) {
            let b = a.with_digit(i, d).unwrap();
            prop_assert_eq!(b.digit(i), d);
            for j in -10..10 {
                if j != i {
                    prop_assert_eq!(b.digit(j), a.digit(j));
                }
            }
        }

        #[test]
        fn digit_sub_self_is_zero(a in arb_address(5)) {
            prop_assert!(a.digit_sub(&a).unwrap().is_zero());
        }

        #[test]
        fn distance_is_a_metric_sample(
            da in prop::collection::vec(0u8..3, 0..5),
            db in prop::collection::vec(0u8..3, 0..5),
            dc in prop::collection::vec(0u8..3, 0..5),
        ) {
            let o = TreeVertex::origin(3).unwrap();
            let a = o.descend(&da).unwrap();
            let b = o.descend(&db).unwrap();
            let c = o.descend(&dc).unwrap();
            prop_assert_eq!(tree_distance(&a, &b), tree_distance(&b, &a));
            prop_assert_eq!(tree_distance(&a, &b) == 0, a == b);
            prop_assert!(tree_distance(&a, &c) <= tree_distance(&a, &b) + tree_distance(&b, &c));
        }
    }
}
