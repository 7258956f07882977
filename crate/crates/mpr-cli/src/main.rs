//! `mpr`: generate, verify, simulate, and bound conflict-resolution schedules
//! for multiple-access channels with multi-packet reception.
//!
//! Exit codes: 0 on success (including a passing verification or a resolved
//! simulation), 1 when a verified property fails or a simulation leaves
//! stations unresolved, 2 on usage errors, parse errors, and refused caps.

use clap::{Args, Parser, Subcommand, ValueEnum};
use mpr_core::bounds::{
    claim1_rate, p1p2, prescribed_p, tkg_upper_explicit, tlt_lower_exact, tlt_lower_leq,
    tsel_upper,
};
use mpr_core::channel::{residual_active, simulate, staged_simulate};
use mpr_core::construct::{
    build_kg_with, build_staged_with, derive_subseed, gen_selector_with, sample_station_subset,
    DEFAULT_ATTEMPT_CAP,
};
use mpr_core::verify::{is_kg_sim, is_locally_thin_exact, is_locally_thin_leq, is_selector};
use mpr_core::{GenMode, KGParams, ScheduleMatrix, SelectorParams, StationSet, VerifyOptions};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

#[derive(Parser)]
#[command(
    name = "mpr",
    version,
    about = "Conflict-resolution schedules for channels that deliver up to d simultaneous packets"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate schedules from seeded randomness
    #[command(subcommand)]
    Gen(GenCmd),
    /// Exhaustively verify a property of a schedule file
    Verify(VerifyArgs),
    /// Run the channel protocol on one or more schedule files stacked in order
    Simulate(SimulateArgs),
    /// Evaluate closed-form bounds and rates
    #[command(subcommand)]
    Bounds(BoundsCmd),
    /// Measure schedules over a parameter grid; CSV on stdout
    Sweep(SweepArgs),
}

fn run(cli: Cli) -> Result<u8, String> {
    match cli.cmd {
        Cmd::Gen(g) => run_gen(g),
        Cmd::Verify(v) => run_verify(v),
        Cmd::Simulate(s) => run_simulate(s),
        Cmd::Bounds(b) => run_bounds(b),
        Cmd::Sweep(s) => run_sweep(s),
    }
}

fn core_err(e: mpr_core::Error) -> String {
    e.to_string()
}

/// Verification knobs shared by every command that checks properties. The
/// `MPR_MAX_COMBOS` environment variable overrides the default subset cap.
fn verify_opts(force: bool, parallel: bool) -> Result<VerifyOptions, String> {
    let mut opts = VerifyOptions {
        force,
        parallel,
        ..Default::default()
    };
    if let Ok(v) = std::env::var("MPR_MAX_COMBOS") {
        opts.max_combos = v
            .trim()
            .parse()
            .map_err(|_| format!("MPR_MAX_COMBOS must be an unsigned integer, got {v:?}"))?;
    }
    Ok(opts)
}

fn load_matrix(path: &Path) -> Result<ScheduleMatrix, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("reading {}: {e}", path.display()))?;
    ScheduleMatrix::from_text(&text).map_err(|e| format!("{}: {e}", path.display()))
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

#[derive(Subcommand)]
enum GenCmd {
    /// A (k, d, n) conflict-resolution schedule
    Kg(GenKgArgs),
    /// A (k, m, d, n) generalized selector
    Selector(GenSelectorArgs),
    /// The doubling ladder of schedules for an unknown number of active stations
    Staged(GenStagedArgs),
}

#[derive(Args)]
struct GenCommon {
    /// Failure budget in (0, 1]
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    /// Generation seed; drawn from system entropy and recorded in the sidecar when omitted
    #[arg(long)]
    seed: Option<u64>,
    /// `verified` resamples until the exhaustive check passes; `whp` keeps the first sample
    #[arg(long, default_value = "verified")]
    mode: String,
    /// Write the matrix here and a JSON sidecar to `<FILE>.json`
    /// (without this, the matrix goes to stdout with the sidecar as a trailing `#` comment)
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Skip the exhaustive-verification caps
    #[arg(long)]
    force: bool,
    /// Verify subsets across threads
    #[arg(long)]
    parallel: bool,
    /// Resampling limit in verified mode
    #[arg(long, default_value_t = DEFAULT_ATTEMPT_CAP)]
    attempt_cap: u64,
}

impl GenCommon {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or_else(|| rand::rng().random())
    }

    fn mode(&self) -> Result<GenMode, String> {
        self.mode.parse().map_err(core_err)
    }
}

#[derive(Args)]
struct GenKgArgs {
    /// Largest active-set size to resolve
    #[arg(long)]
    k: u32,
    /// Channel capacity (simultaneous packets that get through)
    #[arg(long)]
    d: u32,
    /// Number of stations
    #[arg(long)]
    n: u32,
    #[command(flatten)]
    common: GenCommon,
}

#[derive(Args)]
struct GenSelectorArgs {
    #[arg(long)]
    k: u32,
    /// Minimum number of covered stations per k-subset
    #[arg(long)]
    m: u32,
    #[arg(long)]
    d: u32,
    #[arg(long)]
    n: u32,
    #[command(flatten)]
    common: GenCommon,
}

#[derive(Args)]
struct GenStagedArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    d: u32,
    #[command(flatten)]
    common: GenCommon,
}

fn emit_matrix(output: Option<&Path>, matrix: &ScheduleMatrix, sidecar: &str) -> Result<(), String> {
    match output {
        Some(path) => {
            std::fs::write(path, matrix.to_text())
                .map_err(|e| format!("writing {}: {e}", path.display()))?;
            let sc = format!("{}.json", path.display());
            std::fs::write(&sc, format!("{sidecar}\n")).map_err(|e| format!("writing {sc}: {e}"))?;
        }
        None => {
            print!("{}", matrix.to_text());
            println!("# {sidecar}");
        }
    }
    Ok(())
}

fn run_gen(cmd: GenCmd) -> Result<u8, String> {
    match cmd {
        GenCmd::Kg(a) => {
            let params = KGParams::new(a.k, a.d, a.n).map_err(core_err)?;
            let opts = verify_opts(a.common.force, a.common.parallel)?;
            let code = build_kg_with(
                &params,
                a.common.eps,
                a.common.seed(),
                a.common.mode()?,
                &opts,
                a.common.attempt_cap,
            )
            .map_err(core_err)?;
            emit_matrix(a.common.output.as_deref(), &code.matrix, &code.sidecar_json())?;
            Ok(0)
        }
        GenCmd::Selector(a) => {
            let params = SelectorParams::new_relaxed(a.k, a.m, a.d, a.n).map_err(core_err)?;
            let opts = verify_opts(a.common.force, a.common.parallel)?;
            let sample = gen_selector_with(
                &params,
                a.common.eps,
                a.common.seed(),
                a.common.mode()?,
                &opts,
                a.common.attempt_cap,
            )
            .map_err(core_err)?;
            emit_matrix(a.common.output.as_deref(), &sample.matrix, &sample.sidecar_json())?;
            Ok(0)
        }
        GenCmd::Staged(a) => {
            let opts = verify_opts(a.common.force, a.common.parallel)?;
            let stages = build_staged_with(
                a.n,
                a.d,
                a.common.eps,
                a.common.seed(),
                a.common.mode()?,
                &opts,
                a.common.attempt_cap,
            )
            .map_err(core_err)?;
            match a.common.output.as_deref() {
                Some(prefix) => {
                    for (i, stage) in stages.iter().enumerate() {
                        let path = PathBuf::from(format!("{}.stage{i}.mpr", prefix.display()));
                        emit_matrix(Some(&path), &stage.matrix, &stage.sidecar_json())?;
                        println!("{}", path.display());
                    }
                }
                None => {
                    for stage in &stages {
                        emit_matrix(None, &stage.matrix, &stage.sidecar_json())?;
                    }
                }
            }
            Ok(0)
        }
    }
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, ValueEnum)]
enum Property {
    /// Conflict resolution, decided by protocol simulation
    Kg,
    /// Generalized selector coverage
    Selector,
    /// Local thinness for every subset size d..=k
    #[value(name = "lt-leq")]
    LtLeq,
    /// Local thinness for subsets of size exactly k
    #[value(name = "lt-exact")]
    LtExact,
}

#[derive(Args)]
struct VerifyArgs {
    /// Property to check
    #[arg(value_enum)]
    property: Property,
    /// Schedule file in MPRMAT text format
    file: PathBuf,
    #[arg(long)]
    k: u32,
    /// Coverage target; required for `selector`
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    d: u32,
    /// Cross-check against the file's column count
    #[arg(long)]
    n: Option<u32>,
    /// Skip the width and subset-count caps
    #[arg(long)]
    force: bool,
    /// Scan subsets across threads (same verdict, counterexample, and count)
    #[arg(long)]
    parallel: bool,
}

fn run_verify(a: VerifyArgs) -> Result<u8, String> {
    let matrix = load_matrix(&a.file)?;
    let n = a.n.unwrap_or_else(|| matrix.n());
    let opts = verify_opts(a.force, a.parallel)?;
    let report = match a.property {
        Property::Kg => {
            let p = KGParams::new(a.k, a.d, n).map_err(core_err)?;
            is_kg_sim(&matrix, &p, &opts).map_err(core_err)?
        }
        Property::Selector => {
            let m = a.m.ok_or("selector verification requires --m")?;
            let p = SelectorParams::new_relaxed(a.k, m, a.d, n).map_err(core_err)?;
            is_selector(&matrix, &p, &opts).map_err(core_err)?
        }
        Property::LtLeq => {
            let p = KGParams::new(a.k, a.d, n).map_err(core_err)?;
            is_locally_thin_leq(&matrix, &p, &opts).map_err(core_err)?
        }
        Property::LtExact => {
            let p = KGParams::new(a.k, a.d, n).map_err(core_err)?;
            is_locally_thin_exact(&matrix, &p, &opts).map_err(core_err)?
        }
    };
    println!("{}", report.to_json());
    Ok(u8::from(!report.pass))
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[derive(Args)]
struct SimulateArgs {
    /// One or more schedule files, run back to back
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Comma-separated active stations (empty for none)
    #[arg(long, default_value = "")]
    active: String,
    /// Channel capacity
    #[arg(long)]
    d: u32,
}

fn run_simulate(a: SimulateArgs) -> Result<u8, String> {
    let mats = a
        .files
        .iter()
        .map(|f| load_matrix(f))
        .collect::<Result<Vec<_>, _>>()?;
    let active = StationSet::parse(&a.active).map_err(core_err)?;
    let trace = staged_simulate(&mats, &active, a.d).map_err(core_err)?;
    print!("{}", trace.to_csv());
    eprintln!(
        "resolved={} slots_used={}",
        trace.resolved(),
        trace.last_success_slot()
    );
    Ok(u8::from(!trace.resolved()))
}

// ---------------------------------------------------------------------------
// bounds
// ---------------------------------------------------------------------------

#[derive(Subcommand)]
enum BoundsCmd {
    /// Upper bound on the shortest (k, m, d, n)-selector
    Tsel {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        d: u32,
        #[arg(long)]
        n: u32,
    },
    /// Planned length of the recursive (k, d, n) construction
    Tkg {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        d: u32,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
    },
    /// Lower bound for schedules locally thin at every size d..=k
    #[command(name = "tlt-leq")]
    TltLeq {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        d: u32,
        #[arg(long)]
        n: u32,
    },
    /// Lower bound for schedules locally thin at size exactly k
    #[command(name = "tlt-exact")]
    TltExact {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        d: u32,
        #[arg(long)]
        n: u32,
    },
    /// Guaranteed per-row log-rate of the randomized construction
    Claim1 {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        d: u32,
    },
    /// Exact per-row failure probabilities at a given (default: prescribed) p
    P1p2 {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        d: u32,
        #[arg(long)]
        p: Option<f64>,
    },
}

#[derive(Serialize)]
struct Claim1Out {
    name: &'static str,
    k: u32,
    m: u32,
    d: u32,
    value: f64,
}

#[derive(Serialize)]
struct P1p2Out {
    name: &'static str,
    k: u32,
    m: u32,
    d: u32,
    p: f64,
    p1: f64,
    p2: f64,
    log_rate: f64,
}

fn run_bounds(cmd: BoundsCmd) -> Result<u8, String> {
    let json = match cmd {
        BoundsCmd::Tsel { k, m, d, n } => {
            let p = SelectorParams::new_relaxed(k, m, d, n).map_err(core_err)?;
            tsel_upper(&p).to_json()
        }
        BoundsCmd::Tkg { k, d, n, eps } => {
            let p = KGParams::new(k, d, n).map_err(core_err)?;
            tkg_upper_explicit(&p, eps).map_err(core_err)?.to_json()
        }
        BoundsCmd::TltLeq { k, d, n } => {
            let p = KGParams::new(k, d, n).map_err(core_err)?;
            tlt_lower_leq(&p).to_json()
        }
        BoundsCmd::TltExact { k, d, n } => {
            let p = KGParams::new(k, d, n).map_err(core_err)?;
            tlt_lower_exact(&p).to_json()
        }
        BoundsCmd::Claim1 { k, m, d } => {
            let value = claim1_rate(k, m, d).map_err(core_err)?;
            serde_json::to_string(&Claim1Out {
                name: "claim1_rate",
                k,
                m,
                d,
                value,
            })
            .expect("serialization cannot fail")
        }
        BoundsCmd::P1p2 { k, m, d, p } => {
            let p = p.unwrap_or_else(|| prescribed_p(k, d.min(m)));
            let v = p1p2(k, m, d, p).map_err(core_err)?;
            serde_json::to_string(&P1p2Out {
                name: "p1p2",
                k,
                m,
                d,
                p,
                p1: v.p1,
                p2: v.p2,
                log_rate: v.log_rate,
            })
            .expect("serialization cannot fail")
        }
    };
    println!("{json}");
    Ok(0)
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Measurement {
    /// Planned length of the recursive construction (seed-independent)
    #[value(name = "construction_length", alias = "construction-length")]
    ConstructionLength,
    /// Last successful slot when resolving a random k-subset (-1 if unresolved)
    #[value(name = "resolution_slots", alias = "resolution-slots")]
    ResolutionSlots,
    /// Stations a generated selector leaves active out of a random k-subset
    #[value(name = "residual_actives", alias = "residual-actives")]
    ResidualActives,
    /// Resampling attempts until a selector sample verified
    #[value(name = "gen_attempts", alias = "gen-attempts")]
    GenAttempts,
}

impl Measurement {
    fn as_str(self) -> &'static str {
        match self {
            Measurement::ConstructionLength => "construction_length",
            Measurement::ResolutionSlots => "resolution_slots",
            Measurement::ResidualActives => "residual_actives",
            Measurement::GenAttempts => "gen_attempts",
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    /// What to measure in every grid cell
    #[arg(long, value_enum)]
    measurement: Measurement,
    /// Comma-separated k values
    #[arg(long, value_delimiter = ',', required = true)]
    k: Vec<u32>,
    /// Comma-separated d values
    #[arg(long, value_delimiter = ',', required = true)]
    d: Vec<u32>,
    /// Comma-separated n values
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<u32>,
    /// Coverage target for selector measurements (default: ceil(k/2) per cell)
    #[arg(long)]
    m: Option<u32>,
    /// Comma-separated failure budgets
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.5])]
    eps: Vec<f64>,
    /// Trials per cell, numbered from 1
    #[arg(long, default_value_t = 1)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Generation mode for measurements that build schedules
    #[arg(long, default_value = "verified")]
    mode: String,
    /// Skip the exhaustive-verification caps
    #[arg(long)]
    force: bool,
    /// Evaluate cells across threads (output order is unchanged)
    #[arg(long)]
    parallel: bool,
    #[arg(long, default_value_t = DEFAULT_ATTEMPT_CAP)]
    attempt_cap: u64,
}

#[derive(Clone, Copy)]
struct SweepJob {
    k: u32,
    d: u32,
    n: u32,
    eps: f64,
    trial: u64,
}

fn sweep_cell_params(a: &SweepArgs, job: &SweepJob) -> Result<(), String> {
    match a.measurement {
        Measurement::ConstructionLength | Measurement::ResolutionSlots => {
            KGParams::new(job.k, job.d, job.n).map_err(core_err)?;
        }
        Measurement::ResidualActives | Measurement::GenAttempts => {
            let m = a.m.unwrap_or_else(|| job.k.div_ceil(2));
            SelectorParams::new_relaxed(job.k, m, job.d, job.n).map_err(core_err)?;
        }
    }
    if !(job.eps > 0.0 && job.eps <= 1.0) {
        return Err(format!("eps must lie in (0, 1], got {}", job.eps));
    }
    Ok(())
}

fn sweep_value(
    a: &SweepArgs,
    mode: GenMode,
    opts: &VerifyOptions,
    job: &SweepJob,
) -> Result<i64, String> {
    let gen_seed = derive_subseed(a.seed, &[2, job.k as u64, job.d as u64, job.n as u64, job.eps.to_bits(), job.trial]);
    let subset_seed = derive_subseed(a.seed, &[3, job.k as u64, job.d as u64, job.n as u64, job.eps.to_bits(), job.trial]);
    match a.measurement {
        Measurement::ConstructionLength => {
            let p = KGParams::new(job.k, job.d, job.n).map_err(core_err)?;
            Ok(tkg_upper_explicit(&p, job.eps).map_err(core_err)?.integral)
        }
        Measurement::ResolutionSlots => {
            let p = KGParams::new(job.k, job.d, job.n).map_err(core_err)?;
            let code = build_kg_with(&p, job.eps, gen_seed, mode, opts, a.attempt_cap)
                .map_err(core_err)?;
            let active = sample_station_subset(job.n, job.k, subset_seed).map_err(core_err)?;
            let trace = simulate(&code.matrix, &active, job.d).map_err(core_err)?;
            Ok(trace
                .slots_to_resolution()
                .map_or(-1, |s| s as i64))
        }
        Measurement::ResidualActives | Measurement::GenAttempts => {
            let m = a.m.unwrap_or_else(|| job.k.div_ceil(2));
            let p = SelectorParams::new_relaxed(job.k, m, job.d, job.n).map_err(core_err)?;
            let sample = gen_selector_with(&p, job.eps, gen_seed, mode, opts, a.attempt_cap)
                .map_err(core_err)?;
            if a.measurement == Measurement::GenAttempts {
                return Ok(sample.attempts as i64);
            }
            let active = sample_station_subset(job.n, job.k, subset_seed).map_err(core_err)?;
            let residual = residual_active(&sample.matrix, &active, job.d).map_err(core_err)?;
            Ok(residual.len() as i64)
        }
    }
}

fn run_sweep(a: SweepArgs) -> Result<u8, String> {
    let mode: GenMode = a.mode.parse().map_err(core_err)?;
    if a.measurement == Measurement::GenAttempts && mode == GenMode::Whp {
        return Err("gen_attempts is only meaningful in verified mode".into());
    }
    if a.trials < 1 {
        return Err("need at least one trial".into());
    }
    let opts = verify_opts(a.force, false)?;
    let mut jobs = Vec::new();
    for &k in &a.k {
        for &d in &a.d {
            for &n in &a.n {
                for &eps in &a.eps {
                    for trial in 1..=a.trials {
                        jobs.push(SweepJob { k, d, n, eps, trial });
                    }
                }
            }
        }
    }
    // Refuse the whole grid before emitting anything if any cell is invalid.
    for job in &jobs {
        sweep_cell_params(&a, job)?;
    }
    let values: Vec<i64> = if a.parallel {
        jobs.par_iter()
            .map(|j| sweep_value(&a, mode, &opts, j))
            .collect::<Result<_, _>>()?
    } else {
        jobs.iter()
            .map(|j| sweep_value(&a, mode, &opts, j))
            .collect::<Result<_, _>>()?
    };
    let mut out = String::from("k,d,n,eps,trial,measurement,value\n");
    for (job, value) in jobs.iter().zip(&values) {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            job.k,
            job.d,
            job.n,
            job.eps,
            job.trial,
            a.measurement.as_str(),
            value
        ));
    }
    print!("{out}");
    Ok(0)
}
