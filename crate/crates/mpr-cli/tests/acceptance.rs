//! Acceptance suite: one pass/fail line per criterion, nonzero exit on any
//! failure. Run with `cargo test --test acceptance` (the target has no libtest
//! harness, so the lines always print).

use mpr_core::bounds::{claim1_rate, p1p2, prescribed_p, tkg_upper_explicit, tlt_lower_leq, tsel_upper};
use mpr_core::channel::{residual_active, staged_simulate};
use mpr_core::construct::{build_kg, build_staged, gen_selector, minimal_t_search, GenMode, PropertySpec};
use mpr_core::verify::{is_kg_def, is_kg_sim, is_locally_thin_leq};
use mpr_core::{KGParams, ScheduleMatrix, SelectorParams, StationSet, VerifyOptions};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

type Criterion = fn() -> Result<String, String>;

fn main() {
    let criteria: Vec<(u32, Criterion)> = vec![
        (1, c1_sim_def_equivalence),
        (2, c2_kg_implies_locally_thin),
        (3, c3_selector_residual_guarantee),
        (4, c4_construction_end_to_end),
        (5, c5_claim1_regression),
        (6, c6_frozen_bound_values),
        (7, c7_length_monotone_in_capacity),
        (8, c8_minimal_length_search),
        (9, c9_capacity_monotonicity),
        (10, c10_cli_determinism),
    ];
    let mut failures = 0;
    for (idx, f) in criteria {
        match catch_unwind(AssertUnwindSafe(f)) {
            Ok(Ok(detail)) => println!("criterion {idx}: PASS - {detail}"),
            Ok(Err(why)) => {
                println!("criterion {idx}: FAIL - {why}");
                failures += 1;
            }
            Err(_) => {
                println!("criterion {idx}: FAIL - panicked");
                failures += 1;
            }
        }
    }
    if failures > 0 {
        std::process::exit(1);
    }
}

// ---------------------------------------------------------------------------
// Shared case generators.
// ---------------------------------------------------------------------------

/// Deterministic stand-alone generator so the suite does not depend on the
/// crate's own seeding scheme for its inputs.
struct SplitMix(u64);

impl SplitMix {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

fn matrix_from_bits(t: usize, n: u32, bits: u64) -> ScheduleMatrix {
    ScheduleMatrix::from_fn(t, n, |slot, station| {
        bits >> ((slot - 1) * n as usize + (station - 1) as usize) & 1 == 1
    })
    .expect("n >= 1")
}

/// Every matrix with t <= 3 rows and n <= 3 columns (including empty
/// schedules), paired with nothing; callers choose (k, d).
fn all_tiny_matrices() -> Vec<ScheduleMatrix> {
    let mut out = Vec::new();
    for n in 1..=3u32 {
        for t in 0..=3usize {
            let cells = t * n as usize;
            for bits in 0u64..(1u64 << cells) {
                out.push(matrix_from_bits(t, n, bits));
            }
        }
    }
    out
}

/// 10^4 random (matrix, k, d) cases with t <= 8, n <= 6 from a fixed seed.
fn random_cases() -> Vec<(ScheduleMatrix, u32, u32)> {
    let mut rng = SplitMix(0x4D50_525F_4143_4301);
    let mut out = Vec::with_capacity(10_000);
    for _ in 0..10_000 {
        let t = 1 + (rng.next() % 8) as usize;
        let n = 1 + (rng.next() % 6) as u32;
        let density = 10 + rng.next() % 81;
        let m = ScheduleMatrix::from_fn(t, n, |_, _| rng.next() % 100 < density).expect("n >= 1");
        let k = 1 + (rng.next() % n as u64) as u32;
        let d = 1 + (rng.next() % k as u64) as u32;
        out.push((m, k, d));
    }
    out
}

fn legal_kd(n: u32) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for k in 1..=n {
        for d in 1..=k {
            out.push((k, d));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Criteria.
// ---------------------------------------------------------------------------

/// The protocol simulation and the defining partition search must agree on
/// every matrix: same verdict, same first counterexample, same subset count.
fn c1_sim_def_equivalence() -> Result<String, String> {
    let start = Instant::now();
    let opts = VerifyOptions::default();
    let mut cases = 0u64;
    let mut compare = |m: &ScheduleMatrix, k: u32, d: u32| -> Result<(), String> {
        let p = KGParams::new(k, d, m.n()).expect("legal grid");
        let sim = is_kg_sim(m, &p, &opts).map_err(|e| e.to_string())?;
        let def = is_kg_def(m, &p, &opts).map_err(|e| e.to_string())?;
        if sim.pass != def.pass
            || sim.counterexample != def.counterexample
            || sim.subsets_checked != def.subsets_checked
        {
            return Err(format!(
                "disagreement on {m:?} with k={k}, d={d}: sim pass={} cex={:?}, def pass={} cex={:?}",
                sim.pass, sim.counterexample, def.pass, def.counterexample
            ));
        }
        cases += 1;
        Ok(())
    };
    for m in all_tiny_matrices() {
        for (k, d) in legal_kd(m.n()) {
            compare(&m, k, d)?;
        }
    }
    for (m, k, d) in random_cases() {
        compare(&m, k, d)?;
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(300) {
        return Err(format!("took {elapsed:.1?}, budget is 5 minutes"));
    }
    Ok(format!(
        "simulation and definition agree on {cases} cases ({elapsed:.1?})"
    ))
}

/// Every conflict-resolving schedule must be locally thin at all sizes d..=k.
fn c2_kg_implies_locally_thin() -> Result<String, String> {
    let opts = VerifyOptions::default();
    let mut implications = 0u64;
    let mut check = |m: &ScheduleMatrix, k: u32, d: u32| -> Result<(), String> {
        let p = KGParams::new(k, d, m.n()).expect("legal grid");
        if is_kg_sim(m, &p, &opts).map_err(|e| e.to_string())?.pass {
            let lt = is_locally_thin_leq(m, &p, &opts).map_err(|e| e.to_string())?;
            if !lt.pass {
                return Err(format!(
                    "kg holds but local thinness fails on {m:?} with k={k}, d={d} (cex {:?})",
                    lt.counterexample
                ));
            }
            implications += 1;
        }
        Ok(())
    };
    for m in all_tiny_matrices() {
        for (k, d) in legal_kd(m.n()) {
            check(&m, k, d)?;
        }
    }
    for (m, k, d) in random_cases() {
        check(&m, k, d)?;
    }
    Ok(format!(
        "local thinness held for all {implications} conflict-resolving cases"
    ))
}

/// Verified selectors must honor their semantics on the channel: any k active
/// stations end with at most k - m of them unresolved.
fn c3_selector_residual_guarantee() -> Result<String, String> {
    let shapes: [(u32, u32, u32); 9] = [
        (2, 1, 1),
        (2, 2, 1),
        (3, 2, 1),
        (3, 2, 2),
        (4, 2, 1),
        (4, 2, 2),
        (4, 3, 2),
        (5, 3, 2),
        (3, 3, 1),
    ];
    let mut selectors = 0u64;
    let mut subsets = 0u64;
    for n in 5..=10u32 {
        for (i, &(k, m, d)) in shapes.iter().enumerate() {
            let p = SelectorParams::new(k, m, d, n).map_err(|e| e.to_string())?;
            let seed = 1_000 + (n as u64) * 100 + i as u64;
            let sample = gen_selector(&p, 0.5, seed, GenMode::Verified)
                .map_err(|e| format!("generation failed for {p:?}: {e}"))?;
            selectors += 1;
            let mut combo: Vec<u32> = (1..=k).collect();
            loop {
                let set = StationSet::new(combo.clone()).expect("valid stations");
                let residual = residual_active(&sample.matrix, &set, d)
                    .map_err(|e| e.to_string())?
                    .len() as u32;
                if residual > k - m {
                    return Err(format!(
                        "selector {p:?} (seed {seed}) left {residual} > k-m = {} of {set} active",
                        k - m
                    ));
                }
                subsets += 1;
                // next k-combination of 1..=n
                let len = combo.len();
                let mut idx = len;
                let done = loop {
                    if idx == 0 {
                        break true;
                    }
                    idx -= 1;
                    if combo[idx] < n - (len - 1 - idx) as u32 {
                        combo[idx] += 1;
                        for j in idx + 1..len {
                            combo[j] = combo[j - 1] + 1;
                        }
                        break false;
                    }
                };
                if done {
                    break;
                }
            }
        }
    }
    if selectors < 50 {
        return Err(format!("only {selectors} selectors exercised"));
    }
    Ok(format!(
        "{selectors} verified selectors left <= k-m residual on all {subsets} active sets"
    ))
}

/// The recursive construction must verify as a conflict-resolution code for
/// every (k, d, n) with n <= 10, k <= 4, and the staged ladder must resolve
/// every subset of every size.
fn c4_construction_end_to_end() -> Result<String, String> {
    let opts = VerifyOptions::default();
    let mut builds = 0u64;
    for n in 1..=10u32 {
        for k in 1..=n.min(4) {
            for d in 1..=k {
                let p = KGParams::new(k, d, n).expect("legal");
                let code = build_kg(&p, 0.5, 7_000 + builds, GenMode::Verified)
                    .map_err(|e| format!("build failed for {p:?}: {e}"))?;
                let rep = is_kg_sim(&code.matrix, &p, &opts).map_err(|e| e.to_string())?;
                if !rep.pass {
                    return Err(format!(
                        "built schedule fails verification for {p:?} (cex {:?})",
                        rep.counterexample
                    ));
                }
                builds += 1;
            }
        }
    }
    let mut ladders = 0u64;
    for n in 1..=10u32 {
        for d in 1..=4u32 {
            let stages = build_staged(n, d, 0.5, 9_000 + ladders, GenMode::Verified)
                .map_err(|e| e.to_string())?;
            let mats: Vec<_> = stages.iter().map(|s| s.matrix.clone()).collect();
            for bits in 0u64..(1u64 << n) {
                let s = StationSet::new((1..=n).filter(|j| bits >> (j - 1) & 1 == 1))
                    .expect("valid stations");
                let tr = staged_simulate(&mats, &s, d).map_err(|e| e.to_string())?;
                if !tr.resolved() {
                    return Err(format!("ladder (n={n}, d={d}) failed on {s}"));
                }
            }
            ladders += 1;
        }
    }
    Ok(format!(
        "{builds} recursive builds verified; {ladders} ladders resolved every subset"
    ))
}

/// The exact per-row rate at the prescribed probability must dominate the
/// claimed closed-form rate on the whole hypothesis grid up to k = 64.
fn c5_claim1_regression() -> Result<String, String> {
    let mut checked = 0u64;
    for k in 1..=64u32 {
        for m in 1..=k {
            if 2 * (m - 1) >= k {
                continue;
            }
            for d in 1..=m {
                let claimed = claim1_rate(k, m, d).map_err(|e| e.to_string())?;
                let exact = p1p2(k, m, d, prescribed_p(k, d))
                    .map_err(|e| e.to_string())?
                    .log_rate;
                if exact < claimed - 1e-9 {
                    return Err(format!(
                        "exact rate {exact} < claimed {claimed} at k={k}, m={m}, d={d}"
                    ));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("exact rate dominates the claimed rate at {checked} grid points"))
}

/// Frozen reference values of the closed-form bounds.
fn c6_frozen_bound_values() -> Result<String, String> {
    let within = |value: f64, want: f64, tol: f64, what: &str| -> Result<(), String> {
        if (value - want).abs() > tol {
            Err(format!("{what} = {value}, expected {want} +- {tol}"))
        } else {
            Ok(())
        }
    };
    let b = tsel_upper(&SelectorParams::new(4, 2, 1, 16).expect("valid"));
    within(b.raw, 214.53, 0.01, "tsel_upper(4,2,1,16)")?;
    if b.integral != 215 {
        return Err(format!("tsel_upper(4,2,1,16) integral = {}, expected 215", b.integral));
    }
    let b = tsel_upper(&SelectorParams::new(8, 4, 3, 64).expect("valid"));
    within(b.raw, 176.65, 0.05, "tsel_upper(8,4,3,64)")?;
    let b = tlt_lower_leq(&KGParams::new(9, 2, 216).expect("valid"));
    within(b.raw, 2.973, 0.001, "tlt_lower_leq(9,2,216)")?;
    Ok("tsel_upper and tlt_lower_leq match their reference values".into())
}

/// At k = 16, n = 256 the planned construction length must not increase with
/// the channel capacity, and capacity 8 must at least halve the capacity-1
/// length. Checked at both the default and the unit failure budget.
fn c7_length_monotone_in_capacity() -> Result<String, String> {
    let mut summaries = Vec::new();
    for (eps, frozen) in [(0.5f64, [624i64, 248, 177, 58]), (1.0, [614, 243, 175, 57])] {
        let mut lengths = Vec::new();
        for d in [1u32, 2, 4, 8] {
            let p = KGParams::new(16, d, 256).expect("valid");
            let b = tkg_upper_explicit(&p, eps).map_err(|e| e.to_string())?;
            lengths.push(b.integral);
        }
        if lengths != frozen {
            return Err(format!("lengths at eps={eps} are {lengths:?}, expected {frozen:?}"));
        }
        if lengths.windows(2).any(|w| w[1] > w[0]) {
            return Err(format!("lengths not nonincreasing at eps={eps}: {lengths:?}"));
        }
        if 2 * lengths[3] > lengths[0] {
            return Err(format!(
                "d=8 length {} exceeds half of d=1 length {} at eps={eps}",
                lengths[3], lengths[0]
            ));
        }
        summaries.push(format!("eps={eps}: {lengths:?}"));
    }
    Ok(format!("planned lengths fall with capacity ({})", summaries.join("; ")))
}

/// Brute-force minimal lengths for the two smallest interesting cases, fast.
fn c8_minimal_length_search() -> Result<String, String> {
    let start = Instant::now();
    let kg21 = PropertySpec::Kg(KGParams::new(2, 1, 2).expect("valid"));
    let kg22 = PropertySpec::Kg(KGParams::new(2, 2, 2).expect("valid"));
    let got21 = minimal_t_search(&kg21, 4, false).map_err(|e| e.to_string())?;
    let got22 = minimal_t_search(&kg22, 4, false).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    if got21 != Some(2) {
        return Err(format!("minimal length for (k=2,d=1,n=2) reported {got21:?}, expected 2"));
    }
    if got22 != Some(1) {
        return Err(format!("minimal length for (k=2,d=2,n=2) reported {got22:?}, expected 1"));
    }
    if elapsed > Duration::from_secs(1) {
        return Err(format!("search took {elapsed:.1?}, budget is 1 second"));
    }
    Ok(format!("minimal lengths 2 and 1 found in {elapsed:.1?}"))
}

/// Raising the channel capacity can never break conflict resolution:
/// exhaustively, every schedule that works at capacity d works at d + 1.
fn c9_capacity_monotonicity() -> Result<String, String> {
    let opts = VerifyOptions::default();
    let mut implications = 0u64;
    for m in all_tiny_matrices() {
        let n = m.n();
        for k in 1..=n {
            for d in 1..k {
                let lo = KGParams::new(k, d, n).expect("legal");
                let hi = KGParams::new(k, d + 1, n).expect("legal");
                let lo_pass = is_kg_sim(&m, &lo, &opts).map_err(|e| e.to_string())?.pass;
                if lo_pass {
                    let hi_pass = is_kg_sim(&m, &hi, &opts).map_err(|e| e.to_string())?.pass;
                    if !hi_pass {
                        return Err(format!(
                            "capacity increase broke resolution on {m:?} (k={k}, d={d})"
                        ));
                    }
                    implications += 1;
                }
            }
        }
    }
    Ok(format!("capacity monotonicity held in {implications} cases"))
}

/// Fixed-seed CLI runs must be byte-identical.
fn c10_cli_determinism() -> Result<String, String> {
    let bin = env!("CARGO_BIN_EXE_mpr");
    let commands: Vec<Vec<&str>> = vec![
        vec!["gen", "kg", "--k", "3", "--d", "1", "--n", "9", "--seed", "42"],
        vec!["gen", "selector", "--k", "3", "--m", "2", "--d", "2", "--n", "9", "--seed", "43"],
        vec!["gen", "staged", "--n", "5", "--d", "1", "--seed", "44"],
        vec![
            "sweep", "--measurement", "gen_attempts", "--k", "2,3", "--d", "1", "--n", "6",
            "--trials", "3", "--seed", "9",
        ],
        vec![
            "sweep", "--measurement", "resolution_slots", "--k", "2,3", "--d", "1,2", "--n", "8",
            "--trials", "2", "--seed", "5",
        ],
    ];
    for args in &commands {
        let mut outputs = Vec::new();
        for _ in 0..3 {
            let out = Command::new(bin)
                .args(args)
                .env_remove("MPR_MAX_COMBOS")
                .output()
                .map_err(|e| format!("spawning mpr: {e}"))?;
            if !out.status.success() {
                return Err(format!(
                    "`mpr {}` exited with {:?}: {}",
                    args.join(" "),
                    out.status.code(),
                    String::from_utf8_lossy(&out.stderr)
                ));
            }
            outputs.push(out.stdout);
        }
        if outputs[0] != outputs[1] || outputs[1] != outputs[2] {
            return Err(format!("`mpr {}` output differed across runs", args.join(" ")));
        }
    }
    Ok(format!("{} fixed-seed commands byte-identical across 3 runs", commands.len()))
}
