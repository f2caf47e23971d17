//! Ordinal-pattern combinatorics.
//!
//! A window `(x_1, ..., x_d)` maps to the permutation `π` of `{1..d}` that
//! sorts it: `x_{π_1} <= x_{π_2} <= ... <= x_{π_d}`. Equal values are ordered
//! with the larger original index first, so `(1, 2, 2)` maps to `(1, 3, 2)`.
//!
//! Patterns are densely indexed by their Lehmer code, which is also their
//! rank in lexicographic order; the identity permutation has code 0.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default upper bound on the window length.
pub const DEFAULT_MAX_D: usize = 8;
/// Largest window length the id type can address (10! < 2^32).
pub const ABSOLUTE_MAX_D: usize = 10;

static MAX_D: AtomicUsize = AtomicUsize::new(DEFAULT_MAX_D);

/// Current cap on the window length.
pub fn max_d() -> usize {
    MAX_D.load(Ordering::Relaxed)
}

/// Raise or lower the window-length cap (process wide).
pub fn set_max_d(cap: usize) -> Result<()> {
    if !(2..=ABSOLUTE_MAX_D).contains(&cap) {
        return Err(Error::InvalidArgument(format!(
            "window-length cap must lie in 2..={ABSOLUTE_MAX_D}, got {cap}"
        )));
    }
    MAX_D.store(cap, Ordering::Relaxed);
    Ok(())
}

pub(crate) fn check_d(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::WindowTooShort(d));
    }
    let cap = max_d();
    if d > cap {
        return Err(Error::WindowTooLong { d, cap });
    }
    Ok(())
}

/// `d!` for window lengths up to [`ABSOLUTE_MAX_D`].
pub fn factorial(d: usize) -> usize {
    (1..=d).product()
}

/// A permutation of `{1..d}` recording the relative order of a window.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrdinalPattern {
    ranks: Vec<u8>,
}

impl OrdinalPattern {
    /// Builds a pattern from 1-based entries, checking that they form a
    /// permutation of `{1..d}`.
    pub fn new(ranks: Vec<u8>) -> Result<Self> {
        let d = ranks.len();
        check_d(d)?;
        let mut seen = vec![false; d];
        for &r in &ranks {
            let r = r as usize;
            if r == 0 || r > d || seen[r - 1] {
                return Err(Error::InvalidPattern(format!(
                    "{ranks:?} is not a permutation of 1..={d}"
                )));
            }
            seen[r - 1] = true;
        }
        Ok(OrdinalPattern { ranks })
    }

    pub fn d(&self) -> usize {
        self.ranks.len()
    }

    pub fn ranks(&self) -> &[u8] {
        &self.ranks
    }

    /// Time reversal: `(π_d, ..., π_1)`.
    pub fn reverse(&self) -> OrdinalPattern {
        let mut ranks = self.ranks.clone();
        ranks.reverse();
        OrdinalPattern { ranks }
    }

    /// Rank flip: `(d+1-π_1, ..., d+1-π_d)`.
    pub fn reflect(&self) -> OrdinalPattern {
        let top = self.d() as u8 + 1;
        OrdinalPattern {
            ranks: self.ranks.iter().map(|&r| top - r).collect(),
        }
    }

    pub fn encode(&self) -> PatternId {
        PatternId {
            id: lehmer_code(&self.ranks),
            d: self.d() as u8,
        }
    }

    pub fn decode(id: u32, d: usize) -> Result<OrdinalPattern> {
        check_d(d)?;
        let max = factorial(d) as u32;
        if id >= max {
            return Err(Error::IdOutOfRange { id, d, max });
        }
        Ok(OrdinalPattern {
            ranks: lehmer_decode(id, d),
        })
    }
}

impl fmt::Display for OrdinalPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, r) in self.ranks.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{r}")?;
        }
        f.write_str(")")
    }
}

impl FromStr for OrdinalPattern {
    type Err = Error;

    /// Parses tuple notation such as `(2,1,3)`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidPattern(s.to_string());
        let inner = s
            .trim()
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(bad)?;
        let ranks = inner
            .split(',')
            .map(|tok| tok.trim().parse::<u8>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        OrdinalPattern::new(ranks)
    }
}

impl Serialize for OrdinalPattern {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for OrdinalPattern {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Dense index of a pattern in `{0, ..., d!-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PatternId {
    pub id: u32,
    pub d: u8,
}

impl PatternId {
    pub fn new(id: u32, d: usize) -> Result<Self> {
        check_d(d)?;
        let max = factorial(d) as u32;
        if id >= max {
            return Err(Error::IdOutOfRange { id, d, max });
        }
        Ok(PatternId { id, d: d as u8 })
    }

    pub fn index(self) -> usize {
        self.id as usize
    }

    pub fn pattern(self) -> OrdinalPattern {
        OrdinalPattern {
            ranks: lehmer_decode(self.id, self.d as usize),
        }
    }
}

fn lehmer_code(perm: &[u8]) -> u32 {
    let d = perm.len();
    let mut code = 0u32;
    for i in 0..d {
        let smaller = perm[i + 1..].iter().filter(|&&v| v < perm[i]).count() as u32;
        code = code * (d - i) as u32 + smaller;
    }
    code
}

fn lehmer_decode(mut id: u32, d: usize) -> Vec<u8> {
    let mut digits = vec![0u32; d];
    for i in (0..d).rev() {
        let radix = (d - i) as u32;
        digits[i] = id % radix;
        id /= radix;
    }
    let mut pool: Vec<u8> = (1..=d as u8).collect();
    digits
        .into_iter()
        .map(|k| pool.remove(k as usize))
        .collect()
}

/// Sorting permutation of a window with finite values, as 1-based entries.
fn sort_window(window: &[f64], out: &mut [u8]) {
    let d = window.len();
    let mut order = [0usize; ABSOLUTE_MAX_D];
    for (i, slot) in order.iter_mut().take(d).enumerate() {
        *slot = i;
    }
    // insertion sort on (value asc, index desc)
    for i in 1..d {
        let cur = order[i];
        let mut j = i;
        while j > 0 {
            let prev = order[j - 1];
            let before = window[cur] < window[prev] || (window[cur] == window[prev] && cur > prev);
            if !before {
                break;
            }
            order[j] = prev;
            j -= 1;
        }
        order[j] = cur;
    }
    for (o, &idx) in out.iter_mut().zip(order.iter()) {
        *o = idx as u8 + 1;
    }
}

fn check_finite(values: &[f64], offset: usize) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::NonFiniteValue {
            index: offset + i,
            value: values[i],
        }),
        None => Ok(()),
    }
}

/// Ordinal pattern of a single window.
pub fn extract_pattern(window: &[f64]) -> Result<OrdinalPattern> {
    check_d(window.len())?;
    check_finite(window, 0)?;
    let mut ranks = vec![0u8; window.len()];
    sort_window(window, &mut ranks);
    Ok(OrdinalPattern { ranks })
}

/// Raw pattern codes of all overlapping windows of length `d`.
pub fn pattern_codes(series: &[f64], d: usize) -> Result<Vec<u32>> {
    check_d(d)?;
    if series.len() < d {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            needed: d,
        });
    }
    check_finite(series, 0)?;
    let mut buf = [0u8; ABSOLUTE_MAX_D];
    Ok(series
        .windows(d)
        .map(|w| {
            sort_window(w, &mut buf[..d]);
            lehmer_code(&buf[..d])
        })
        .collect())
}

/// Pattern ids of the `len - d + 1` overlapping windows.
pub fn pattern_sequence(series: &[f64], d: usize) -> Result<Vec<PatternId>> {
    Ok(pattern_codes(series, d)?
        .into_iter()
        .map(|id| PatternId { id, d: d as u8 })
        .collect())
}

/// All `d!` patterns in id order.
pub fn all_patterns(d: usize) -> Result<Vec<OrdinalPattern>> {
    check_d(d)?;
    Ok((0..factorial(d) as u32)
        .map(|id| OrdinalPattern {
            ranks: lehmer_decode(id, d),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pat(s: &str) -> OrdinalPattern {
        s.parse().unwrap()
    }

    #[test]
    fn worked_examples() {
        assert_eq!(extract_pattern(&[4.2, 3.1, 5.0]).unwrap(), pat("(2,1,3)"));
        assert_eq!(extract_pattern(&[5.0, 6.3, 2.9]).unwrap(), pat("(3,1,2)"));
        assert_eq!(extract_pattern(&[1.0, 2.0, 3.0]).unwrap(), pat("(1,2,3)"));
    }

    #[test]
    fn ties_put_larger_index_first() {
        assert_eq!(extract_pattern(&[1.0, 2.0, 2.0]).unwrap(), pat("(1,3,2)"));
        assert_eq!(extract_pattern(&[1.0, 1.0, 1.0]).unwrap(), pat("(3,2,1)"));
    }

    #[test]
    fn extraction_errors() {
        assert_eq!(extract_pattern(&[1.0]), Err(Error::WindowTooShort(1)));
        assert!(matches!(
            extract_pattern(&[1.0, f64::NAN]),
            Err(Error::NonFiniteValue { index: 1, .. })
        ));
        assert!(matches!(
            pattern_sequence(&[1.0, 2.0, f64::INFINITY, 0.0], 2),
            Err(Error::NonFiniteValue { index: 2, .. })
        ));
        assert!(matches!(
            pattern_sequence(&[1.0, 2.0], 3),
            Err(Error::SeriesTooShort { len: 2, needed: 3 })
        ));
    }

    #[test]
    fn sequences() {
        let seq = pattern_sequence(&[4.2, 3.1, 5.0, 6.3], 3).unwrap();
        let got: Vec<_> = seq.iter().map(|p| p.pattern()).collect();
        assert_eq!(got, vec![pat("(2,1,3)"), pat("(1,2,3)")]);

        let seq = pattern_sequence(&[4.2, 3.1, 5.0, 6.3, 2.9, 7.1], 3).unwrap();
        let got: Vec<_> = seq.iter().map(|p| p.pattern().to_string()).collect();
        assert_eq!(got, ["(2,1,3)", "(1,2,3)", "(3,1,2)", "(2,1,3)"]);

        let seq = pattern_sequence(&[1.0, 2.0, 3.0, 4.0, 5.0], 3).unwrap();
        assert_eq!(seq.len(), 3);
        assert!(seq.iter().all(|p| p.id == 0));

        let seq = pattern_sequence(&[3.0, 1.0, 2.0], 3).unwrap();
        assert_eq!(seq[0].pattern(), pat("(2,3,1)"));
    }

    #[test]
    fn reverse_and_reflect() {
        assert_eq!(pat("(1,2,3)").reverse(), pat("(3,2,1)"));
        assert_eq!(pat("(2,1,3)").reverse(), pat("(3,1,2)"));
        assert_eq!(pat("(1,3,2)").reverse(), pat("(2,3,1)"));
        assert_eq!(pat("(1,2,3)").reflect(), pat("(3,2,1)"));
        assert_eq!(pat("(2,1,3)").reflect(), pat("(2,3,1)"));
        assert_eq!(pat("(1,3,2)").reflect(), pat("(3,1,2)"));
    }

    #[test]
    fn encoding() {
        assert_eq!(pat("(1,2,3)").encode().id, 0);
        assert_eq!(pat("(2,1)").encode().id, 1);
        assert_eq!(pat("(1,2)").encode().id, 0);
        let ids: Vec<u32> = all_patterns(3)
            .unwrap()
            .iter()
            .map(|p| p.encode().id)
            .collect();
        assert_eq!(ids, vec![0, 1, 2, 3, 4, 5]);
        assert!(matches!(
            OrdinalPattern::decode(6, 3),
            Err(Error::IdOutOfRange { id: 6, .. })
        ));
    }

    #[test]
    fn involutions_and_bijection() {
        for d in 2..=6 {
            let all = all_patterns(d).unwrap();
            assert_eq!(all.len(), factorial(d));
            for (i, p) in all.iter().enumerate() {
                assert_eq!(p.reverse().reverse(), *p);
                assert_eq!(p.reflect().reflect(), *p);
                assert_eq!(p.encode().id as usize, i);
                assert_eq!(OrdinalPattern::decode(i as u32, d).unwrap(), *p);
            }
        }
    }

    #[test]
    fn rejects_invalid_literals() {
        assert!("(0,1,2)".parse::<OrdinalPattern>().is_err());
        assert!("(1,1,2)".parse::<OrdinalPattern>().is_err());
        assert!("1,2,3".parse::<OrdinalPattern>().is_err());
        assert!(OrdinalPattern::new(vec![1]).is_err());
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            extract_pattern(&[0.0; 9]),
            Err(Error::WindowTooLong { d: 9, cap: 8 })
        ));
    }

    proptest! {
        #[test]
        fn invariant_under_monotone_maps(
            window in prop::collection::vec(-100.0f64..100.0, 2..7),
            slopes in prop::collection::vec(0.1f64..5.0, 4),
            shift in -10.0f64..10.0,
        ) {
            // increasing piecewise-linear map with knots at -50, 0, 50
            let knots = [-50.0, 0.0, 50.0];
            let f = |x: f64| {
                let mut y = shift + slopes[0] * x.min(knots[0]);
                for k in 0..3 {
                    let lo = knots[k];
                    let hi = if k + 1 < 3 { knots[k + 1] } else { f64::INFINITY };
                    if x > lo {
                        y += slopes[k + 1] * (x.min(hi) - lo);
                    }
                }
                y
            };
            let mapped: Vec<f64> = window.iter().map(|&x| f(x)).collect();
            prop_assert_eq!(extract_pattern(&window).unwrap(), extract_pattern(&mapped).unwrap());
        }

        #[test]
        fn matches_explicit_sort(window in prop::collection::vec(-1e3f64..1e3, 2..9)) {
            let mut distinct = window.clone();
            distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
            distinct.dedup();
            prop_assume!(distinct.len() == window.len());
            let pi = extract_pattern(&window).unwrap();
            let sorted: Vec<f64> = pi.ranks().iter().map(|&r| window[r as usize - 1]).collect();
            prop_assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
