use crate::bounds::{ln_choose, p1p2, prescribed_p};
use crate::error::{Error, Result};
use crate::matrix::ScheduleMatrix;
use crate::params::{KGParams, SelectorParams};
use crate::verify::{is_kg_sim, is_locally_thin_exact, is_locally_thin_leq, is_selector, VerifyOptions};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Identifier of the sampling scheme recorded in sidecar metadata. Bump this
/// if the seed derivation or the bit-sampling order ever changes.
pub const GENERATOR_ID: &str = "chacha8-sha256-v1";

/// Default resampling limit for verified generation.
pub const DEFAULT_ATTEMPT_CAP: u64 = 1000;

/// Default failure budget for verified generation, where the budget only
/// steers the planned length and verification guarantees correctness.
pub const DEFAULT_EPS: f64 = 0.5;

/// How a randomized construction treats its samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GenMode {
    /// Resample until the exhaustive verifier accepts (Las Vegas): the result
    /// is certified, the budget `eps` only sets the planned length.
    Verified,
    /// Return the first sample: correct with probability at least `1 - eps`,
    /// never verified.
    Whp,
}

impl std::str::FromStr for GenMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "verified" => Ok(GenMode::Verified),
            "whp" => Ok(GenMode::Whp),
            other => Err(Error::InvalidParams(format!(
                "unknown generation mode {other:?}; use `verified` or `whp`"
            ))),
        }
    }
}

impl std::fmt::Display for GenMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GenMode::Verified => "verified",
            GenMode::Whp => "whp",
        })
    }
}

/// The sampling plan for one randomized selector: row probability, row count,
/// the budget and effective capacity they were derived from, and the mode the
/// plan is meant for.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct GenPlan {
    pub p: f64,
    pub t: usize,
    pub eps: f64,
    pub effective_d: u32,
    pub mode: GenMode,
}

/// Derives the sampling plan for a `(k, m, d, n)`-selector with failure budget
/// `eps` in `(0, 1]`: entries are Bernoulli with the prescribed probability,
/// and the row count is the union-bound threshold
/// `ceil((ln(C(n,k) * C(k, k-m+1)) + ln(1/eps)) / rate)` with `rate` the exact
/// per-row log-rate, clamped to at least one row. Relaxed parameters with
/// `d > m` plan for the effective capacity `min(d, m)`.
pub fn plan_selector(params: &SelectorParams, eps: f64) -> Result<GenPlan> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParams(format!(
            "failure budget eps must lie in (0, 1], got {eps}"
        )));
    }
    let d_eff = params.effective_d();
    let p = prescribed_p(params.k, d_eff);
    let rate = p1p2(params.k, params.m, d_eff, p)?.log_rate;
    if !rate.is_finite() || rate <= 0.0 {
        return Err(Error::Numeric(format!(
            "per-row rate {rate} is not positive for k={}, m={}, d={}; cannot plan",
            params.k, params.m, d_eff
        )));
    }
    let threshold = ln_choose(params.n as u64, params.k as u64)
        + ln_choose(params.k as u64, (params.k - params.m + 1) as u64)
        + (1.0 / eps).ln();
    let t = ((threshold / rate).ceil() as i64).max(1) as usize;
    Ok(GenPlan {
        p,
        t,
        eps,
        effective_d: d_eff,
        mode: GenMode::Verified,
    })
}

/// Deterministic per-purpose RNG: the 256-bit ChaCha key is
/// `SHA-256(domain || seed || stream || attempt)`, so every component and
/// every resampling attempt draws from an independent, reproducible stream.
fn rng_for(seed: u64, stream: u64, attempt: u64) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(b"mpr-codes/v1");
    h.update(seed.to_le_bytes());
    h.update(stream.to_le_bytes());
    h.update(attempt.to_le_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}

/// Deterministic uniformly random `size`-subset of `1..=n` (partial
/// Fisher-Yates over a dedicated hash-derived stream).
pub fn sample_station_subset(n: u32, size: u32, seed: u64) -> Result<crate::params::StationSet> {
    if size > n {
        return Err(Error::InvalidParams(format!(
            "cannot draw {size} distinct stations from 1..={n}"
        )));
    }
    let mut h = Sha256::new();
    h.update(b"mpr-codes/subset/v1");
    h.update(seed.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(h.finalize().into());
    let mut pool: Vec<u32> = (1..=n).collect();
    for i in 0..size as usize {
        let j = rng.random_range(i..pool.len());
        pool.swap(i, j);
    }
    crate::params::StationSet::new(pool[..size as usize].iter().copied())
}

/// Stable 64-bit sub-seed for derived tasks (stages, sweep trials).
pub fn derive_subseed(seed: u64, tags: &[u64]) -> u64 {
    let mut h = Sha256::new();
    h.update(b"mpr-codes/subseed/v1");
    h.update(seed.to_le_bytes());
    for t in tags {
        h.update(t.to_le_bytes());
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

fn sample_matrix(t: usize, n: u32, p: f64, rng: &mut ChaCha8Rng) -> ScheduleMatrix {
    // Row-major sampling order is part of the generator contract.
    ScheduleMatrix::from_fn(t, n, |_, _| rng.random_bool(p))
        .expect("n >= 1 was validated by the parameter type")
}

/// A generated selector matrix together with everything needed to reproduce
/// and audit it.
#[derive(Clone, Debug)]
pub struct SelectorSample {
    pub matrix: ScheduleMatrix,
    pub params: SelectorParams,
    pub plan: GenPlan,
    pub seed: u64,
    pub attempts: u64,
}

#[derive(Serialize)]
struct SelectorSidecar<'a> {
    k: u32,
    m: u32,
    d: u32,
    n: u32,
    eps: f64,
    seed: u64,
    mode: GenMode,
    plan: &'a GenPlan,
    attempts: u64,
    generator: &'static str,
}

impl SelectorSample {
    /// Metadata JSON describing how the matrix was produced.
    pub fn sidecar_json(&self) -> String {
        serde_json::to_string(&SelectorSidecar {
            k: self.params.k,
            m: self.params.m,
            d: self.params.d,
            n: self.params.n,
            eps: self.plan.eps,
            seed: self.seed,
            mode: self.plan.mode,
            plan: &self.plan,
            attempts: self.attempts,
            generator: GENERATOR_ID,
        })
        .expect("sidecar serialization cannot fail")
    }
}

fn gen_selector_stream(
    params: &SelectorParams,
    eps: f64,
    seed: u64,
    stream: u64,
    mode: GenMode,
    opts: &VerifyOptions,
    attempt_cap: u64,
) -> Result<SelectorSample> {
    let mut plan = plan_selector(params, eps)?;
    plan.mode = mode;
    let verify_params = SelectorParams::new(params.k, params.m, plan.effective_d, params.n)
        .expect("effective capacity restores the strict ordering");
    let cap = match mode {
        GenMode::Verified => attempt_cap.max(1),
        GenMode::Whp => 1,
    };
    for attempt in 1..=cap {
        let mut rng = rng_for(seed, stream, attempt);
        let matrix = sample_matrix(plan.t, params.n, plan.p, &mut rng);
        let accepted = match mode {
            GenMode::Whp => true,
            GenMode::Verified => is_selector(&matrix, &verify_params, opts)?.pass,
        };
        if accepted {
            return Ok(SelectorSample {
                matrix,
                params: *params,
                plan,
                seed,
                attempts: attempt,
            });
        }
    }
    Err(Error::AttemptLimit(cap))
}

/// Samples a `(k, m, d, n)`-selector. In `Verified` mode the sample is
/// exhaustively checked and resampled until it passes (up to
/// [`DEFAULT_ATTEMPT_CAP`] attempts), so the exhaustive-verification caps
/// apply to the parameters; in `Whp` mode the first sample is returned as-is.
pub fn gen_selector(
    params: &SelectorParams,
    eps: f64,
    seed: u64,
    mode: GenMode,
) -> Result<SelectorSample> {
    gen_selector_with(params, eps, seed, mode, &VerifyOptions::default(), DEFAULT_ATTEMPT_CAP)
}

/// [`gen_selector`] with explicit verification options and resampling cap.
pub fn gen_selector_with(
    params: &SelectorParams,
    eps: f64,
    seed: u64,
    mode: GenMode,
    opts: &VerifyOptions,
    attempt_cap: u64,
) -> Result<SelectorSample> {
    gen_selector_stream(params, eps, seed, 0, mode, opts, attempt_cap)
}

/// One selector component of the recursive conflict-resolution construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ComponentRecord {
    pub k: u32,
    pub m: u32,
    pub d_eff: u32,
    pub t: usize,
}

/// A conflict-resolution schedule produced by the recursive construction,
/// with its component plan and reproduction metadata.
#[derive(Clone, Debug)]
pub struct KGCode {
    pub matrix: ScheduleMatrix,
    pub params: KGParams,
    pub eps: f64,
    pub seed: u64,
    pub mode: GenMode,
    pub plan: Vec<ComponentRecord>,
}

#[derive(Serialize)]
struct KGSidecar<'a> {
    k: u32,
    d: u32,
    n: u32,
    eps: f64,
    seed: u64,
    mode: GenMode,
    plan: &'a [ComponentRecord],
    generator: &'static str,
}

impl KGCode {
    /// Metadata JSON describing how the schedule was produced.
    pub fn sidecar_json(&self) -> String {
        serde_json::to_string(&KGSidecar {
            k: self.params.k,
            d: self.params.d,
            n: self.params.n,
            eps: self.eps,
            seed: self.seed,
            mode: self.mode,
            plan: &self.plan,
            generator: GENERATOR_ID,
        })
        .expect("sidecar serialization cannot fail")
    }
}

fn ceil_log2(x: u32) -> u32 {
    debug_assert!(x >= 1);
    32 - (x - 1).leading_zeros()
}

fn floor_log2(x: u32) -> u32 {
    debug_assert!(x >= 1);
    31 - x.leading_zeros()
}

/// The halving chain of selector components behind a `(k, d, n)` schedule:
/// for `v` from `ceil(log2 k) - 1` down to `floor(log2 d)`, a selector with
/// `k_v = min(2^(v+1), n)`, `m_v = min(2^v, ceil(k_v / 2))`, and capacity
/// `min(d, m_v)`, all over `n` columns. Each component at least halves the
/// number of unresolved stations; the chain is empty when `k = 1` or
/// `k <= d`, where a single broadcast slot already suffices.
pub fn kg_components(params: &KGParams) -> Vec<SelectorParams> {
    let hi = ceil_log2(params.k) as i64 - 1;
    let lo = floor_log2(params.d) as i64;
    let mut out = Vec::new();
    let mut v = hi;
    while v >= lo {
        let kv = (1u64 << (v + 1)).min(params.n as u64) as u32;
        let mv = (1u64 << v).min(kv.div_ceil(2) as u64) as u32;
        let deff = params.d.min(mv);
        out.push(
            SelectorParams::new(kv, mv, deff, params.n)
                .expect("halving chain parameters are always well-ordered"),
        );
        v -= 1;
    }
    out
}

/// Builds a `(k, d, n)` conflict-resolution schedule: the stacked halving
/// selector components followed by one all-ones broadcast slot. In `Verified`
/// mode every component is certified, which makes the whole schedule certified.
pub fn build_kg(params: &KGParams, eps: f64, seed: u64, mode: GenMode) -> Result<KGCode> {
    build_kg_with(params, eps, seed, mode, &VerifyOptions::default(), DEFAULT_ATTEMPT_CAP)
}

/// [`build_kg`] with explicit verification options and resampling cap.
pub fn build_kg_with(
    params: &KGParams,
    eps: f64,
    seed: u64,
    mode: GenMode,
    opts: &VerifyOptions,
    attempt_cap: u64,
) -> Result<KGCode> {
    let components = kg_components(params);
    let mut parts = Vec::with_capacity(components.len() + 1);
    let mut plan = Vec::with_capacity(components.len());
    for (idx, comp) in components.iter().enumerate() {
        // Stream 0 is reserved for standalone selectors.
        let sample = gen_selector_stream(comp, eps, seed, idx as u64 + 1, mode, opts, attempt_cap)?;
        plan.push(ComponentRecord {
            k: comp.k,
            m: comp.m,
            d_eff: comp.d,
            t: sample.plan.t,
        });
        parts.push(sample.matrix);
    }
    parts.push(ScheduleMatrix::all_ones(1, params.n)?);
    Ok(KGCode {
        matrix: ScheduleMatrix::stack(&parts)?,
        params: *params,
        eps,
        seed,
        mode,
        plan,
    })
}

/// Builds the doubling ladder for an unknown number of active stations: one
/// schedule per stage `i = 0, 1, ...` with `k_i = min(2^i, n)` and capacity
/// `min(d, k_i)`, ending at the first stage with `k_i = n`. Running the
/// stages back to back resolves any active set, whatever its size; the
/// failure budget applies to each stage separately.
pub fn build_staged(n: u32, d: u32, eps: f64, seed: u64, mode: GenMode) -> Result<Vec<KGCode>> {
    build_staged_with(n, d, eps, seed, mode, &VerifyOptions::default(), DEFAULT_ATTEMPT_CAP)
}

/// [`build_staged`] with explicit verification options and resampling cap.
pub fn build_staged_with(
    n: u32,
    d: u32,
    eps: f64,
    seed: u64,
    mode: GenMode,
    opts: &VerifyOptions,
    attempt_cap: u64,
) -> Result<Vec<KGCode>> {
    if n < 1 || d < 1 {
        return Err(Error::InvalidParams(format!(
            "need n >= 1 and d >= 1, got n={n}, d={d}"
        )));
    }
    let mut stages = Vec::new();
    for i in 0..=ceil_log2(n) {
        let k = (1u64 << i).min(n as u64) as u32;
        let params = KGParams::new(k, d.min(k), n)?;
        let stage_seed = derive_subseed(seed, &[1, i as u64]);
        stages.push(build_kg_with(&params, eps, stage_seed, mode, opts, attempt_cap)?);
    }
    Ok(stages)
}

/// A verifiable property a schedule can be searched for.
#[derive(Clone, Copy, Debug)]
pub enum PropertySpec {
    Kg(KGParams),
    Selector(SelectorParams),
    LocallyThinLeq(KGParams),
    LocallyThinExact(KGParams),
}

impl PropertySpec {
    fn n(&self) -> u32 {
        match self {
            PropertySpec::Kg(p) | PropertySpec::LocallyThinLeq(p) | PropertySpec::LocallyThinExact(p) => p.n,
            PropertySpec::Selector(p) => p.n,
        }
    }

    /// Exhaustive check of the property on one matrix.
    pub fn holds(&self, m: &ScheduleMatrix) -> Result<bool> {
        let opts = VerifyOptions {
            force: true,
            ..Default::default()
        };
        Ok(match self {
            PropertySpec::Kg(p) => is_kg_sim(m, p, &opts)?.pass,
            PropertySpec::Selector(p) => is_selector(m, p, &opts)?.pass,
            PropertySpec::LocallyThinLeq(p) => is_locally_thin_leq(m, p, &opts)?.pass,
            PropertySpec::LocallyThinExact(p) => is_locally_thin_exact(m, p, &opts)?.pass,
        })
    }
}

/// Smallest row count `t <= t_max` for which some `t x n` matrix satisfies
/// the property, or `None` if none exists up to `t_max`. All four properties
/// are invariant under column permutation, so the search enumerates column
/// multisets (each column is a `t`-bit value, ordered nondecreasingly)
/// instead of raw matrices. Without `force` the search refuses `n > 5` or
/// `t_max > 4`; no `t = 0` matrix satisfies any of the properties, so the
/// scan starts at `t = 1`.
pub fn minimal_t_search(prop: &PropertySpec, t_max: usize, force: bool) -> Result<Option<usize>> {
    const N_CAP: u32 = 5;
    const T_CAP: usize = 4;
    let n = prop.n();
    if !force && (n > N_CAP || t_max > T_CAP) {
        return Err(Error::SearchCap(format!(
            "minimal-length search over n={n}, t_max={t_max} (caps: n <= {N_CAP}, t_max <= {T_CAP})"
        )));
    }
    for t in 1..=t_max {
        if t >= 64 {
            return Err(Error::SearchCap(format!(
                "column values for t={t} do not fit a machine word"
            )));
        }
        let top: u64 = (1u64 << t) - 1;
        let mut cols = vec![0u64; n as usize];
        'tuples: loop {
            let m = ScheduleMatrix::from_fn(t, n, |slot, station| {
                cols[(station - 1) as usize] >> (slot - 1) & 1 == 1
            })?;
            if prop.holds(&m)? {
                return Ok(Some(t));
            }
            // Advance to the next nondecreasing column tuple: bump the
            // rightmost incrementable column and level the suffix to it.
            let mut i = n as usize;
            while i > 0 {
                i -= 1;
                if cols[i] < top {
                    let v = cols[i] + 1;
                    for c in cols.iter_mut().skip(i) {
                        *c = v;
                    }
                    continue 'tuples;
                }
            }
            break; // every column at `top`: tuples for this t are exhausted
        }
    }
    Ok(None)
}
