//! Young diagrams and their point configurations on the half-integer lattice.
//!
//! A diagram `lambda` with charge `n` is mapped to the set
//! `S_n(lambda) = { lambda_i - i + 1/2 + n : i >= 1 }`. Half-integers are stored
//! doubled so that all arithmetic on them is exact.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// Default hard cap on [`enumerate_partitions`].
pub const DEFAULT_ENUMERATION_CAP: usize = 40;

/// A half-integer `k`, stored as the odd integer `2k`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfInt(i64);

impl HalfInt {
    pub fn from_twice(twice: i64) -> Result<Self> {
        if twice.rem_euclid(2) == 1 {
            Ok(HalfInt(twice))
        } else {
            Err(Error::NotHalfInteger(twice))
        }
    }

    /// `i + 1/2`.
    pub const fn plus_half(i: i64) -> Self {
        HalfInt(2 * i + 1)
    }

    /// `i - 1/2`.
    pub const fn minus_half(i: i64) -> Self {
        HalfInt(2 * i - 1)
    }

    pub const fn twice(self) -> i64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    /// Shift by an integer.
    pub const fn shift(self, n: i64) -> Self {
        HalfInt(self.0 + 2 * n)
    }

    /// `self + other`, which is always an integer.
    pub const fn add_half(self, other: HalfInt) -> i64 {
        (self.0 + other.0) / 2
    }

    pub const fn is_positive(self) -> bool {
        self.0 > 0
    }
}

impl std::ops::Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt(-self.0)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2", self.0)
    }
}

impl fmt::Debug for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2", self.0)
    }
}

impl FromStr for HalfInt {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let num = s
            .trim()
            .strip_suffix("/2")
            .ok_or_else(|| Error::Parse(format!("half-integer must look like \"k/2\", got {s:?}")))?;
        let twice: i64 =
            num.trim().parse().map_err(|_| Error::Parse(format!("bad half-integer numerator in {s:?}")))?;
        HalfInt::from_twice(twice)
    }
}

impl Serialize for HalfInt {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for HalfInt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A Young diagram: weakly decreasing positive parts, no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    pub fn empty() -> Self {
        Partition { parts: Vec::new() }
    }

    /// Builds a partition, dropping trailing zeros. Fails when the parts are not
    /// weakly decreasing.
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        while parts.last() == Some(&0) {
            parts.pop();
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Precondition(format!("partition parts must be weakly decreasing: {parts:?}")));
        }
        Ok(Partition { parts })
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn size(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn length(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// `lambda_i` with 1-based `i`; zero beyond the length.
    pub fn part(&self, i: usize) -> usize {
        debug_assert!(i >= 1);
        self.parts.get(i - 1).copied().unwrap_or(0)
    }

    pub fn conjugate(&self) -> Partition {
        let first = self.parts.first().copied().unwrap_or(0);
        let parts = (1..=first).map(|j| self.parts.iter().take_while(|&&p| p >= j).count()).collect();
        Partition { parts }
    }

    /// The `i`-th point `lambda_i - i + 1/2 + n` of `S_n(lambda)`, 1-based.
    pub fn point(&self, i: usize, n: i64) -> HalfInt {
        HalfInt::plus_half(self.part(i) as i64 - i as i64 + n)
    }

    /// Whether `x` belongs to `S_n(lambda)`.
    pub fn has_point(&self, n: i64, x: HalfInt) -> bool {
        if (1..=self.length()).any(|i| self.point(i, n) == x) {
            return true;
        }
        // Beyond the length the points are n - i + 1/2, i.e. i = n - x + 1/2.
        let i = n - (x.twice() - 1) / 2;
        i > self.length() as i64
    }
}

impl Ord for Partition {
    /// Size first, then lexicographic order of the parts.
    fn cmp(&self, other: &Self) -> Ordering {
        self.size().cmp(&other.size()).then_with(|| self.parts.cmp(&other.parts))
    }
}

impl PartialOrd for Partition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.parts)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.parts)
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.parts.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let parts = <Vec<usize>>::deserialize(d)?;
        Partition::new(parts).map_err(serde::de::Error::custom)
    }
}

/// All partitions of size `<= max_size`, ordered by (size, lexicographic parts).
pub fn enumerate_partitions(max_size: usize) -> Result<Vec<Partition>> {
    enumerate_partitions_capped(max_size, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_partitions_capped(max_size: usize, cap: usize) -> Result<Vec<Partition>> {
    if max_size > cap {
        return Err(Error::SizeLimit { requested: max_size, cap });
    }
    let mut out = Vec::new();
    for size in 0..=max_size {
        let start = out.len();
        push_partitions_of(size, size, &mut Vec::new(), &mut out);
        out[start..].sort();
    }
    Ok(out)
}

/// Partitions of exactly `size`, same order as [`enumerate_partitions`].
pub fn partitions_of(size: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    push_partitions_of(size, size, &mut Vec::new(), &mut out);
    out.sort();
    out
}

fn push_partitions_of(rest: usize, max_part: usize, prefix: &mut Vec<usize>, out: &mut Vec<Partition>) {
    if rest == 0 {
        out.push(Partition { parts: prefix.clone() });
        return;
    }
    for p in (1..=rest.min(max_part)).rev() {
        prefix.push(p);
        push_partitions_of(rest - p, p, prefix, out);
        prefix.pop();
    }
}

/// The top `depth` points of `S_n(lambda)`, decreasing.
pub fn point_config(lambda: &Partition, n: i64, depth: usize) -> Result<Vec<HalfInt>> {
    if depth < lambda.length() {
        return Err(Error::Truncation { depth, length: lambda.length() });
    }
    Ok((1..=depth).map(|i| lambda.point(i, n)).collect())
}

/// `mu ⊂ lambda`, i.e. `mu_i <= lambda_i` for all `i`.
pub fn contains(lambda: &Partition, mu: &Partition) -> bool {
    mu.length() <= lambda.length() && mu.parts.iter().zip(&lambda.parts).all(|(m, l)| m <= l)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(parts: &[usize]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    fn h(twice: i64) -> HalfInt {
        HalfInt::from_twice(twice).unwrap()
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_partitions(0).unwrap(), vec![Partition::empty()]);
        assert_eq!(enumerate_partitions(3).unwrap().len(), 7);
        assert_eq!(
            enumerate_partitions(3).unwrap(),
            vec![p(&[]), p(&[1]), p(&[1, 1]), p(&[2]), p(&[1, 1, 1]), p(&[2, 1]), p(&[3])]
        );
    }

    #[test]
    fn enumeration_cap() {
        assert!(matches!(enumerate_partitions(41), Err(Error::SizeLimit { requested: 41, cap: 40 })));
        assert!(enumerate_partitions_capped(5, 4).is_err());
    }

    #[test]
    fn trailing_zeros_dropped() {
        assert_eq!(p(&[2, 1, 0, 0]).parts(), &[2, 1]);
        assert!(Partition::new(vec![1, 2]).is_err());
    }

    #[test]
    fn point_configs() {
        assert_eq!(point_config(&p(&[]), 0, 3).unwrap(), vec![h(-1), h(-3), h(-5)]);
        assert_eq!(point_config(&p(&[2, 1]), 0, 4).unwrap(), vec![h(3), h(-1), h(-5), h(-7)]);
        assert_eq!(point_config(&p(&[2, 1]), 2, 4).unwrap(), vec![h(7), h(3), h(-1), h(-3)]);
        assert!(matches!(point_config(&p(&[2, 1]), 0, 1), Err(Error::Truncation { depth: 1, length: 2 })));
    }

    #[test]
    fn containment() {
        assert!(contains(&p(&[2, 1]), &p(&[])));
        assert!(contains(&p(&[2, 1]), &p(&[1, 1])));
        assert!(!contains(&p(&[2, 1]), &p(&[3])));
        assert!(!contains(&p(&[2, 1]), &p(&[1, 1, 1])));
    }

    #[test]
    fn membership_matches_point_config() {
        for lam in enumerate_partitions(6).unwrap() {
            for n in -2..=2 {
                let pts = point_config(&lam, n, lam.length() + 12).unwrap();
                for twice in (-15..=15).step_by(2) {
                    let x = h(twice);
                    assert_eq!(lam.has_point(n, x), pts.contains(&x), "{lam} n={n} x={x}");
                }
            }
        }
    }

    #[test]
    fn conjugation() {
        assert_eq!(p(&[3, 1]).conjugate(), p(&[2, 1, 1]));
        assert_eq!(p(&[]).conjugate(), p(&[]));
        for lam in enumerate_partitions(8).unwrap() {
            assert_eq!(lam.conjugate().conjugate(), lam);
            assert_eq!(lam.conjugate().size(), lam.size());
        }
    }

    #[test]
    fn half_int_text_form() {
        assert_eq!(h(-3).to_string(), "-3/2");
        assert_eq!("5/2".parse::<HalfInt>().unwrap(), h(5));
        assert!("4/2".parse::<HalfInt>().is_err());
        assert!("3".parse::<HalfInt>().is_err());
        assert_eq!(serde_json::to_string(&h(1)).unwrap(), "\"1/2\"");
        assert_eq!(serde_json::to_string(&p(&[2, 1])).unwrap(), "[2,1]");
        assert_eq!(serde_json::from_str::<Partition>("[3,3,0]").unwrap(), p(&[3, 3]));
    }
}
