//! Partitions of the pattern set into groups of patterns that share a
//! probability under the null hypothesis.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::patterns::{all_patterns, check_d, factorial, OrdinalPattern};

/// Disjoint groups of pattern ids covering all `d!` patterns.
///
/// Groups are kept in canonical order: members ascending, groups sorted by
/// their smallest member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    d: usize,
    name: String,
    groups: Vec<Vec<u32>>,
    group_of: Vec<usize>,
}

impl Partition {
    /// Validates and canonicalizes a list of groups.
    pub fn new(d: usize, name: impl Into<String>, groups: Vec<Vec<u32>>) -> Result<Self> {
        check_d(d)?;
        let total = factorial(d);
        let mut group_of = vec![usize::MAX; total];
        let mut groups: Vec<Vec<u32>> = groups
            .into_iter()
            .map(|mut g| {
                g.sort_unstable();
                g
            })
            .collect();
        if groups.iter().any(|g| g.is_empty()) {
            return Err(Error::InvalidArgument(
                "partition contains an empty group".into(),
            ));
        }
        groups.sort_by_key(|g| g[0]);
        for (gi, g) in groups.iter().enumerate() {
            for &id in g {
                let slot = group_of.get_mut(id as usize).ok_or(Error::IdOutOfRange {
                    id,
                    d,
                    max: total as u32,
                })?;
                if *slot != usize::MAX {
                    return Err(Error::DuplicatePattern(
                        OrdinalPattern::decode(id, d)?.to_string(),
                    ));
                }
                *slot = gi;
            }
        }
        let missing = group_of.iter().filter(|&&g| g == usize::MAX).count();
        if missing > 0 {
            return Err(Error::NotAPartition { missing, total });
        }
        Ok(Partition {
            d,
            name: name.into(),
            groups,
            group_of,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn groups(&self) -> &[Vec<u32>] {
        &self.groups
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn num_patterns(&self) -> usize {
        self.group_of.len()
    }

    /// Index of the group containing pattern `id`.
    pub fn group_of(&self, id: u32) -> usize {
        self.group_of[id as usize]
    }

    /// Number of non-zero eigenvalues of the limiting law, `d! - m`.
    pub fn degrees(&self) -> usize {
        self.num_patterns() - self.num_groups()
    }

    /// Groups rendered as pattern tuples, e.g. `["(1,2,3)", "(3,2,1)"]`.
    pub fn describe(&self) -> Vec<Vec<String>> {
        self.groups
            .iter()
            .map(|g| {
                g.iter()
                    .map(|&id| {
                        OrdinalPattern::decode(id, self.d)
                            .map(|p| p.to_string())
                            .unwrap_or_default()
                    })
                    .collect()
            })
            .collect()
    }
}

/// Orbits of the group generated by `ops` acting on all patterns.
fn orbit_partition(
    d: usize,
    name: &str,
    ops: &[fn(&OrdinalPattern) -> OrdinalPattern],
) -> Result<Partition> {
    let all = all_patterns(d)?;
    let mut assigned = vec![false; all.len()];
    let mut groups = Vec::new();
    for (start, p) in all.iter().enumerate() {
        if assigned[start] {
            continue;
        }
        let mut orbit = BTreeSet::new();
        let mut frontier = vec![p.clone()];
        while let Some(q) = frontier.pop() {
            if orbit.insert(q.encode().id) {
                frontier.extend(ops.iter().map(|op| op(&q)));
            }
        }
        for &id in &orbit {
            assigned[id as usize] = true;
        }
        groups.push(orbit.into_iter().collect());
    }
    Partition::new(d, name, groups)
}

/// Pairs `{π, reverse(π)}`: time reversibility.
pub fn reversal_partition(d: usize) -> Result<Partition> {
    orbit_partition(d, "reversal", &[OrdinalPattern::reverse])
}

/// Pairs `{π, reflect(π)}`: reflection symmetry.
pub fn reflection_partition(d: usize) -> Result<Partition> {
    orbit_partition(d, "reflection", &[OrdinalPattern::reflect])
}

/// Orbits under both reversal and reflection: the symmetries shared by all
/// stationary Gaussian processes.
pub fn gaussian_partition(d: usize) -> Result<Partition> {
    orbit_partition(
        d,
        "gaussian",
        &[OrdinalPattern::reverse, OrdinalPattern::reflect],
    )
}

/// Every pattern in its own group (no symmetry constraint).
pub fn singleton_partition(d: usize) -> Result<Partition> {
    check_d(d)?;
    Partition::new(
        d,
        "singleton",
        (0..factorial(d) as u32).map(|id| vec![id]).collect(),
    )
}

/// Parses a partition from text: one group per line, patterns written as
/// tuples separated by whitespace, `#` starting a comment.
///
/// With `complete_singletons`, patterns not listed become singleton groups;
/// otherwise an incomplete listing is rejected.
pub fn custom_partition(
    d: usize,
    spec: &str,
    complete_singletons: bool,
    name: &str,
) -> Result<Partition> {
    check_d(d)?;
    let total = factorial(d);
    let mut seen = vec![false; total];
    let mut groups = Vec::new();
    for (lineno, raw) in spec.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut group = Vec::new();
        for lit in split_tuples(line).map_err(|text| Error::BadPatternLiteral {
            line: lineno + 1,
            text,
        })? {
            let pattern: OrdinalPattern = lit.parse().map_err(|_| Error::BadPatternLiteral {
                line: lineno + 1,
                text: lit.clone(),
            })?;
            if pattern.d() != d {
                return Err(Error::BadPatternLiteral {
                    line: lineno + 1,
                    text: format!("{lit} has length {} but d = {d}", pattern.d()),
                });
            }
            let id = pattern.encode().id;
            if std::mem::replace(&mut seen[id as usize], true) {
                return Err(Error::DuplicatePattern(pattern.to_string()));
            }
            group.push(id);
        }
        groups.push(group);
    }
    if complete_singletons {
        groups.extend(
            seen.iter()
                .enumerate()
                .filter(|(_, &s)| !s)
                .map(|(id, _)| vec![id as u32]),
        );
    }
    Partition::new(d, name, groups)
}

fn split_tuples(line: &str) -> std::result::Result<Vec<String>, String> {
    let mut out = Vec::new();
    let mut rest = line.trim();
    while !rest.is_empty() {
        if !rest.starts_with('(') {
            return Err(rest.to_string());
        }
        let end = rest.find(')').ok_or_else(|| rest.to_string())?;
        out.push(rest[..=end].to_string());
        rest =
            rest[end + 1..].trim_start_matches(|c: char| c.is_whitespace() || c == ',' || c == ';');
    }
    Ok(out)
}
