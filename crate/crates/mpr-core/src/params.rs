use crate::error::{Error, Result};
use serde::Serialize;
use std::fmt;

/// A finite set of station identifiers, kept sorted and duplicate-free.
/// Stations are 1-based: valid identifiers lie in `1..=n` for a width-`n`
/// schedule.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct StationSet {
    members: Vec<u32>,
}

impl StationSet {
    /// Builds a set from any iterator of station ids, sorting and removing
    /// duplicates. Station `0` is rejected.
    pub fn new<I: IntoIterator<Item = u32>>(stations: I) -> Result<Self> {
        let mut members: Vec<u32> = stations.into_iter().collect();
        if members.contains(&0) {
            return Err(Error::StationOutOfRange { station: 0, n: 0 });
        }
        members.sort_unstable();
        members.dedup();
        Ok(Self { members })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// The full set `{1, ..., n}`.
    pub fn full(n: u32) -> Self {
        Self {
            members: (1..=n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, station: u32) -> bool {
        self.members.binary_search(&station).is_ok()
    }

    pub fn members(&self) -> &[u32] {
        &self.members
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.members.iter().copied()
    }

    pub fn max(&self) -> Option<u32> {
        self.members.last().copied()
    }

    /// Errors unless every member lies in `1..=n`.
    pub fn validate_within(&self, n: u32) -> Result<()> {
        match self.max() {
            Some(s) if s > n => Err(Error::StationOutOfRange { station: s, n }),
            _ => Ok(()),
        }
    }

    /// Parses a comma-separated list such as `"1,4,7"`. Whitespace around
    /// entries is tolerated; an empty or all-whitespace string is the empty set.
    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim();
        if trimmed.is_empty() {
            return Ok(Self::empty());
        }
        let mut members = Vec::new();
        for part in trimmed.split(',') {
            let part = part.trim();
            let station: u32 = part.parse().map_err(|_| Error::Parse {
                line: 1,
                msg: format!("invalid station id {part:?}"),
            })?;
            members.push(station);
        }
        Self::new(members)
    }

    /// Bitmask view: bit `s-1` of the word array is set iff station `s` is a
    /// member. `words` is the word count of the target row.
    pub(crate) fn to_mask(&self, words: usize) -> Vec<u64> {
        let mut mask = vec![0u64; words];
        for &s in &self.members {
            let idx = (s - 1) as usize;
            mask[idx / 64] |= 1u64 << (idx % 64);
        }
        mask
    }

    pub(crate) fn from_mask(mask: &[u64]) -> Self {
        let mut members = Vec::new();
        for (w, &word) in mask.iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                let b = bits.trailing_zeros();
                members.push((w * 64) as u32 + b + 1);
                bits &= bits - 1;
            }
        }
        Self { members }
    }
}

impl fmt::Display for StationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, s) in self.members.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "}}")
    }
}

/// Parameters of a conflict-resolution code: among `n` stations, any set of
/// at most `k` active ones must be fully resolved on a channel that delivers
/// up to `d` simultaneous packets per slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct KGParams {
    pub k: u32,
    pub d: u32,
    pub n: u32,
}

impl KGParams {
    /// Requires `1 <= d <= k <= n`.
    pub fn new(k: u32, d: u32, n: u32) -> Result<Self> {
        if !(1 <= d && d <= k && k <= n) {
            return Err(Error::InvalidParams(format!(
                "need 1 <= d <= k <= n, got k={k}, d={d}, n={n}"
            )));
        }
        Ok(Self { k, d, n })
    }
}

/// Parameters of a generalized selector: every `k`-subset of the `n` columns
/// must be covered in at least `m` positions by rows whose restricted weight
/// lies in `1..=d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SelectorParams {
    pub k: u32,
    pub m: u32,
    pub d: u32,
    pub n: u32,
}

impl SelectorParams {
    /// Strict constructor: requires `1 <= d <= m <= k <= n`.
    pub fn new(k: u32, m: u32, d: u32, n: u32) -> Result<Self> {
        if !(1 <= d && d <= m && m <= k && k <= n) {
            return Err(Error::InvalidParams(format!(
                "need 1 <= d <= m <= k <= n, got k={k}, m={m}, d={d}, n={n}"
            )));
        }
        Ok(Self { k, m, d, n })
    }

    /// Relaxed constructor for planning and generation: `d` may exceed `m`,
    /// in which case procedures substitute [`Self::effective_d`]. Still
    /// requires `1 <= m <= k <= n` and `d >= 1`.
    pub fn new_relaxed(k: u32, m: u32, d: u32, n: u32) -> Result<Self> {
        if !(1 <= m && m <= k && k <= n && d >= 1) {
            return Err(Error::InvalidParams(format!(
                "need 1 <= m <= k <= n and d >= 1, got k={k}, m={m}, d={d}, n={n}"
            )));
        }
        Ok(Self { k, m, d, n })
    }

    /// `min(d, m)`: rows heavier than `m` within a `k`-subset can never be
    /// needed, so a capacity above `m` buys nothing.
    pub fn effective_d(&self) -> u32 {
        self.d.min(self.m)
    }

    /// Whether the parameters already satisfy the strict ordering `d <= m`.
    pub fn is_strict(&self) -> bool {
        self.d <= self.m
    }
}
