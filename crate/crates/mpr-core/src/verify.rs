use crate::channel::drain_mask;
use crate::error::{Error, Result};
use crate::matrix::ScheduleMatrix;
use crate::params::{KGParams, SelectorParams, StationSet};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashSet;

/// Widest matrix the exhaustive verifiers accept without `force`.
pub const MAX_EXHAUSTIVE_N: u32 = 30;
/// Default cap on the number of column subsets a verification may enumerate.
pub const DEFAULT_MAX_COMBOS: u64 = 100_000_000;

/// Knobs for the exhaustive verifiers.
#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    /// Skip the width and subset-count caps.
    pub force: bool,
    /// Partition the subset space across threads. The verdict, the reported
    /// counterexample, and `subsets_checked` are identical to a sequential run.
    pub parallel: bool,
    /// Cap on enumerated subsets (ignored with `force`).
    pub max_combos: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            force: false,
            parallel: false,
            max_combos: DEFAULT_MAX_COMBOS,
        }
    }
}

/// Evidence that one subset satisfies the selector property: the rows whose
/// restricted weight lies in `1..=d` and the union of their supports inside
/// the subset.
#[derive(Clone, Debug, Serialize)]
pub struct SelectorWitness {
    pub good_rows: Vec<usize>,
    pub covered: StationSet,
}

impl SelectorWitness {
    /// Re-derives the witness facts from scratch: every listed row has
    /// restricted weight in `1..=d`, `covered` is exactly the union of their
    /// supports inside `subset`, and at least `m` stations are covered.
    pub fn check(&self, m: &ScheduleMatrix, subset: &StationSet, d: u32, m_target: u32) -> bool {
        let mut covered: Vec<u32> = Vec::new();
        for &row in &self.good_rows {
            let w = match m.restricted_row_weight(row, subset) {
                Ok(w) => w,
                Err(_) => return false,
            };
            if w < 1 || w > d {
                return false;
            }
            covered.extend(subset.iter().filter(|&s| m.bit(row, s)));
        }
        let covered = match StationSet::new(covered) {
            Ok(c) => c,
            Err(_) => return false,
        };
        covered == self.covered && covered.len() as u32 >= m_target
    }
}

/// Evidence that one subset satisfies the conflict-resolution property: slot
/// indices `i_1 < ... < i_l` and a partition of the subset into blocks of
/// size `1..=d`, where slot `i_j` schedules all of block `j` and none of the
/// later blocks.
#[derive(Clone, Debug, Serialize)]
pub struct KGWitness {
    pub slot_indices: Vec<usize>,
    pub blocks: Vec<StationSet>,
}

impl KGWitness {
    /// Re-derives the witness facts from scratch.
    pub fn check(&self, m: &ScheduleMatrix, subset: &StationSet, d: u32) -> bool {
        if self.slot_indices.len() != self.blocks.len() {
            return false;
        }
        if self.slot_indices.windows(2).any(|w| w[0] >= w[1]) {
            return false;
        }
        let mut seen: Vec<u32> = Vec::new();
        for (j, (&slot, block)) in self.slot_indices.iter().zip(&self.blocks).enumerate() {
            if slot < 1 || slot > m.t() {
                return false;
            }
            if block.is_empty() || block.len() as u32 > d {
                return false;
            }
            if block.iter().any(|s| !subset.contains(s)) {
                return false;
            }
            // All-ones on its own block...
            if block.iter().any(|s| !m.bit(slot, s)) {
                return false;
            }
            // ...and all-zeros on every later block.
            for later in &self.blocks[j + 1..] {
                if later.iter().any(|s| m.bit(slot, s)) {
                    return false;
                }
            }
            seen.extend(block.iter());
        }
        match StationSet::new(seen) {
            Ok(u) => u == *subset && u.len() == self.blocks.iter().map(StationSet::len).sum::<usize>(),
            Err(_) => false,
        }
    }
}

/// Witness attached to a passing report; which variant appears depends on the
/// property that was verified.
#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum Witness {
    Selector(SelectorWitness),
    Kg(KGWitness),
}

/// Outcome of an exhaustive verification.
///
/// On failure, `counterexample` is the first offending subset in
/// size-ascending, then lexicographic order, and `subsets_checked` counts the
/// subsets inspected up to and including it. On success, `subsets_checked` is
/// the full count and `witness` (when the property has one) certifies the
/// first subset in that order.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub pass: bool,
    pub counterexample: Option<StationSet>,
    pub witness: Option<Witness>,
    pub subsets_checked: u64,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialization cannot fail")
    }

    fn passed(witness: Option<Witness>, subsets_checked: u64) -> Self {
        Self {
            pass: true,
            counterexample: None,
            witness,
            subsets_checked,
        }
    }

    fn failed(counterexample: StationSet, subsets_checked: u64) -> Self {
        Self {
            pass: false,
            counterexample: Some(counterexample),
            witness: None,
            subsets_checked,
        }
    }
}

// ---------------------------------------------------------------------------
// Combination enumeration (ascending 0-based index tuples, lexicographic).
// ---------------------------------------------------------------------------

/// `C(n, k)` with overflow detection.
pub(crate) fn combination_count(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 1..=k {
        c = c.checked_mul((n - k + i) as u128)?;
        c /= i as u128;
    }
    Some(c)
}

/// Advances `combo` to the next k-subset of `0..n` in lexicographic order;
/// returns false when `combo` was the last one.
fn next_combination(combo: &mut [u32], n: u32) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - (k - i) as u32 {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// The `rank`-th k-subset of `0..n` in lexicographic order.
fn unrank_combination(n: u32, k: u32, mut rank: u128) -> Vec<u32> {
    let mut combo = Vec::with_capacity(k as usize);
    let mut v = 0u32;
    for pos in 0..k {
        loop {
            let below = combination_count((n - 1 - v) as u64, (k - pos - 1) as u64)
                .expect("count fits: caller checked");
            if rank < below {
                combo.push(v);
                v += 1;
                break;
            }
            rank -= below;
            v += 1;
        }
    }
    combo
}

fn mask_of(combo: &[u32], wpr: usize) -> Vec<u64> {
    let mut mask = vec![0u64; wpr];
    for &c in combo {
        mask[c as usize / 64] |= 1u64 << (c as usize % 64);
    }
    mask
}

fn set_of(combo: &[u32]) -> StationSet {
    StationSet::new(combo.iter().map(|&c| c + 1)).expect("0-based indices shift to valid stations")
}

// ---------------------------------------------------------------------------
// Per-subset predicates on raw masks.
// ---------------------------------------------------------------------------

fn selector_subset_ok(m: &ScheduleMatrix, mask: &[u64], d: u32, m_target: u32) -> bool {
    let wpr = mask.len();
    let mut covered = vec![0u64; wpr];
    for i in 0..m.t() {
        let w = m.row_mask_weight(i, mask);
        if w >= 1 && w <= d {
            let row = m.row_words(i);
            for j in 0..wpr {
                covered[j] |= row[j] & mask[j];
            }
        }
    }
    covered.iter().map(|w| w.count_ones()).sum::<u32>() >= m_target
}

fn selector_witness_for(m: &ScheduleMatrix, subset: &StationSet, d: u32) -> SelectorWitness {
    let wpr = m.words_per_row();
    let mask = subset.to_mask(wpr);
    let mut covered = vec![0u64; wpr];
    let mut good_rows = Vec::new();
    for i in 0..m.t() {
        let w = m.row_mask_weight(i, &mask);
        if w >= 1 && w <= d {
            good_rows.push(i + 1);
            let row = m.row_words(i);
            for j in 0..wpr {
                covered[j] |= row[j] & mask[j];
            }
        }
    }
    SelectorWitness {
        good_rows,
        covered: StationSet::from_mask(&covered),
    }
}

fn kg_sim_subset_ok(m: &ScheduleMatrix, mask: &[u64], d: u32) -> bool {
    let mut live = mask.to_vec();
    drain_mask(m, &mut live, d)
}

/// Depth-first search for the defining slot sequence and partition. The block
/// taken at a slot is forced (the slot's support inside the remaining set), so
/// the search branches only over which slot to use next; failed
/// `(start, remaining)` states are memoized.
fn kg_def_search(
    m: &ScheduleMatrix,
    mask: &[u64],
    d: u32,
) -> Option<(Vec<usize>, Vec<Vec<u64>>)> {
    let t = m.t();
    let wpr = mask.len();
    // suffix_or[i] = union of rows i.. restricted to the subset; a state whose
    // remaining stations are not all reachable from the remaining rows is dead.
    let mut suffix_or = vec![vec![0u64; wpr]; t + 1];
    for i in (0..t).rev() {
        let row = m.row_words(i);
        for j in 0..wpr {
            suffix_or[i][j] = suffix_or[i + 1][j] | (row[j] & mask[j]);
        }
    }
    let mut failed: HashSet<(usize, Vec<u64>)> = HashSet::new();

    fn dfs(
        m: &ScheduleMatrix,
        d: u32,
        suffix_or: &[Vec<u64>],
        failed: &mut HashSet<(usize, Vec<u64>)>,
        start: usize,
        remaining: &[u64],
    ) -> Option<Vec<(usize, Vec<u64>)>> {
        if remaining.iter().all(|&w| w == 0) {
            return Some(Vec::new());
        }
        if remaining
            .iter()
            .zip(&suffix_or[start])
            .any(|(r, s)| r & !s != 0)
        {
            return None;
        }
        if failed.contains(&(start, remaining.to_vec())) {
            return None;
        }
        for i in start..m.t() {
            let row = m.row_words(i);
            let mut block = vec![0u64; remaining.len()];
            for j in 0..remaining.len() {
                block[j] = row[j] & remaining[j];
            }
            let c: u32 = block.iter().map(|w| w.count_ones()).sum();
            if c >= 1 && c <= d {
                let mut rest = remaining.to_vec();
                for j in 0..rest.len() {
                    rest[j] &= !row[j];
                }
                if let Some(mut path) = dfs(m, d, suffix_or, failed, i + 1, &rest) {
                    path.insert(0, (i, block));
                    return Some(path);
                }
            }
        }
        failed.insert((start, remaining.to_vec()));
        None
    }

    dfs(m, d, &suffix_or, &mut failed, 0, mask).map(|path| {
        let (slots, blocks): (Vec<_>, Vec<_>) =
            path.into_iter().map(|(i, b)| (i + 1, b)).unzip();
        (slots, blocks)
    })
}

fn lt_subset_ok(m: &ScheduleMatrix, mask: &[u64], d: u32) -> bool {
    (0..m.t()).any(|i| {
        let w = m.row_mask_weight(i, mask);
        w >= 1 && w <= d
    })
}

// ---------------------------------------------------------------------------
// Shared exhaustive driver.
// ---------------------------------------------------------------------------

struct SizeRun {
    size: u32,
    total: u128,
}

fn plan_sizes(m: &ScheduleMatrix, sizes: &[u32], opts: &VerifyOptions) -> Result<Vec<SizeRun>> {
    let n = m.n();
    if !opts.force && n > MAX_EXHAUSTIVE_N {
        return Err(Error::WidthCap {
            n,
            cap: MAX_EXHAUSTIVE_N,
        });
    }
    let mut runs = Vec::new();
    let mut total: u128 = 0;
    for &size in sizes {
        let c = combination_count(n as u64, size as u64);
        match c {
            Some(c) => {
                total = total.saturating_add(c);
                runs.push(SizeRun { size, total: c });
            }
            None => {
                if !opts.force {
                    return Err(Error::CombinationCap {
                        combos: u128::MAX,
                        cap: opts.max_combos as u128,
                    });
                }
                return Err(Error::Numeric(
                    "subset count overflows u128; exhaustive verification is impossible".into(),
                ));
            }
        }
    }
    if !opts.force && total > opts.max_combos as u128 {
        return Err(Error::CombinationCap {
            combos: total,
            cap: opts.max_combos as u128,
        });
    }
    Ok(runs)
}

/// Scans every subset of each size in order; returns the first failure
/// (0-based global rank and combination) or the total checked on pass.
fn scan<F>(m: &ScheduleMatrix, runs: &[SizeRun], opts: &VerifyOptions, ok: F) -> ScanOutcome
where
    F: Fn(&[u64]) -> bool + Sync,
{
    let n = m.n();
    let wpr = m.words_per_row();
    let mut offset: u64 = 0;
    for run in runs {
        if run.total == 0 {
            continue;
        }
        let fail_rank: Option<(u64, Vec<u32>)> = if opts.parallel && run.total <= u64::MAX as u128
        {
            let total = run.total as u64;
            const BLOCK: u64 = 4096;
            let blocks = total.div_ceil(BLOCK);
            (0..blocks)
                .into_par_iter()
                .find_map_first(|b| {
                    let lo = b * BLOCK;
                    let hi = (lo + BLOCK).min(total);
                    let mut combo = unrank_combination(n, run.size, lo as u128);
                    let mut rank = lo;
                    loop {
                        let mask = mask_of(&combo, wpr);
                        if !ok(&mask) {
                            return Some((rank, combo));
                        }
                        rank += 1;
                        if rank == hi || !next_combination(&mut combo, n) {
                            return None;
                        }
                    }
                })
        } else {
            let mut combo: Vec<u32> = (0..run.size).collect();
            let mut rank: u64 = 0;
            loop {
                let mask = mask_of(&combo, wpr);
                if !ok(&mask) {
                    break Some((rank, combo));
                }
                rank += 1;
                if rank as u128 == run.total || !next_combination(&mut combo, n) {
                    break None;
                }
            }
        };
        if let Some((rank, combo)) = fail_rank {
            return ScanOutcome::Failed {
                counterexample: set_of(&combo),
                checked: offset + rank + 1,
            };
        }
        offset = offset.saturating_add(run.total.min(u64::MAX as u128) as u64);
    }
    ScanOutcome::Passed { checked: offset }
}

enum ScanOutcome {
    Passed { checked: u64 },
    Failed { counterexample: StationSet, checked: u64 },
}

fn check_width(m: &ScheduleMatrix, n: u32) -> Result<()> {
    if m.n() != n {
        return Err(Error::ColumnCountMismatch {
            expected: n,
            got: m.n(),
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Public verifiers.
// ---------------------------------------------------------------------------

/// Exhaustively checks the selector property: every `k`-subset of columns must
/// have rows of restricted weight `1..=d` whose supports cover at least `m`
/// of its stations. Relaxed parameters (`d > m`) are checked with `d` as
/// given, which only widens the set of usable rows.
pub fn is_selector(
    m: &ScheduleMatrix,
    p: &SelectorParams,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    check_width(m, p.n)?;
    let runs = plan_sizes(m, &[p.k], opts)?;
    match scan(m, &runs, opts, |mask| {
        selector_subset_ok(m, mask, p.d, p.m)
    }) {
        ScanOutcome::Failed {
            counterexample,
            checked,
        } => Ok(VerificationReport::failed(counterexample, checked)),
        ScanOutcome::Passed { checked } => {
            let witness = (checked > 0).then(|| {
                let first = set_of(&(0..p.k).collect::<Vec<_>>());
                Witness::Selector(selector_witness_for(m, &first, p.d))
            });
            Ok(VerificationReport::passed(witness, checked))
        }
    }
}

/// Exhaustively checks conflict resolution by running the protocol on every
/// `k`-subset. Resolving every set of size exactly `k` implies resolving all
/// smaller sets as well, so only size-`k` subsets are enumerated.
pub fn is_kg_sim(
    m: &ScheduleMatrix,
    p: &KGParams,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    check_width(m, p.n)?;
    let runs = plan_sizes(m, &[p.k], opts)?;
    match scan(m, &runs, opts, |mask| kg_sim_subset_ok(m, mask, p.d)) {
        ScanOutcome::Failed {
            counterexample,
            checked,
        } => Ok(VerificationReport::failed(counterexample, checked)),
        ScanOutcome::Passed { checked } => Ok(VerificationReport::passed(None, checked)),
    }
}

/// Exhaustively checks the defining combinatorial property: every `k`-subset
/// admits slots `i_1 < ... < i_l` and a partition into blocks of size `1..=d`
/// where slot `i_j` schedules exactly block `j` among the not-yet-covered
/// stations. Equivalent to [`is_kg_sim`] but decided by backtracking search
/// rather than protocol simulation.
pub fn is_kg_def(
    m: &ScheduleMatrix,
    p: &KGParams,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    check_width(m, p.n)?;
    let runs = plan_sizes(m, &[p.k], opts)?;
    match scan(m, &runs, opts, |mask| kg_def_search(m, mask, p.d).is_some()) {
        ScanOutcome::Failed {
            counterexample,
            checked,
        } => Ok(VerificationReport::failed(counterexample, checked)),
        ScanOutcome::Passed { checked } => {
            let witness = (checked > 0).then(|| {
                let combo: Vec<u32> = (0..p.k).collect();
                let mask = mask_of(&combo, m.words_per_row());
                let (slots, blocks) =
                    kg_def_search(m, &mask, p.d).expect("first subset passed the scan");
                Witness::Kg(KGWitness {
                    slot_indices: slots,
                    blocks: blocks.iter().map(|b| StationSet::from_mask(b)).collect(),
                })
            });
            Ok(VerificationReport::passed(witness, checked))
        }
    }
}

/// Checks local thinness for every subset size `s` with `d <= s <= k`: each
/// such subset must contain at least one row of restricted weight `1..=d`.
/// Subsets are scanned in size-ascending, then lexicographic order.
pub fn is_locally_thin_leq(
    m: &ScheduleMatrix,
    p: &KGParams,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    check_width(m, p.n)?;
    let sizes: Vec<u32> = (p.d..=p.k).collect();
    let runs = plan_sizes(m, &sizes, opts)?;
    match scan(m, &runs, opts, |mask| lt_subset_ok(m, mask, p.d)) {
        ScanOutcome::Failed {
            counterexample,
            checked,
        } => Ok(VerificationReport::failed(counterexample, checked)),
        ScanOutcome::Passed { checked } => Ok(VerificationReport::passed(None, checked)),
    }
}

/// Checks local thinness for subsets of size exactly `k` only.
pub fn is_locally_thin_exact(
    m: &ScheduleMatrix,
    p: &KGParams,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    check_width(m, p.n)?;
    let runs = plan_sizes(m, &[p.k], opts)?;
    match scan(m, &runs, opts, |mask| lt_subset_ok(m, mask, p.d)) {
        ScanOutcome::Failed {
            counterexample,
            checked,
        } => Ok(VerificationReport::failed(counterexample, checked)),
        ScanOutcome::Passed { checked } => Ok(VerificationReport::passed(None, checked)),
    }
}
