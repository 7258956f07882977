//! Conflict-resolution schedules for multiple-access channels on which up to
//! `d` simultaneous transmissions all get through.
//!
//! A schedule is a binary `t x n` matrix: row `i` lists which of the `n`
//! stations transmit in slot `i` (if they still hold a packet). When between
//! 1 and `d` stations transmit in a slot, all of them succeed and fall silent;
//! when more than `d` collide, nothing changes. The crate provides:
//!
//! - [`matrix::ScheduleMatrix`]: the bit-packed schedule with a plain text
//!   serialization format,
//! - [`channel`]: exact protocol simulation, including staged ladders for an
//!   unknown number of active stations,
//! - [`verify`]: exhaustive checkers for the conflict-resolution property
//!   (both by simulation and by its combinatorial definition), for
//!   generalized selectors, and for local thinness, with machine-checkable
//!   witnesses and counterexamples,
//! - [`construct`]: randomized generation of selectors and of the recursive
//!   conflict-resolution construction, deterministic under a seed, with
//!   Las-Vegas (`verified`) and one-shot (`whp`) modes, plus a brute-force
//!   minimal-length search,
//! - [`bounds`]: closed-form upper and lower bounds on achievable schedule
//!   lengths and the exact per-row failure probabilities behind the
//!   randomized analysis.

pub mod bounds;
pub mod channel;
pub mod construct;
pub mod error;
pub mod matrix;
pub mod params;
pub mod verify;

pub use bounds::{BoundValue, P1P2};
pub use channel::{SimulationTrace, SlotKind, SlotOutcome};
pub use construct::{GenMode, GenPlan, KGCode, PropertySpec, SelectorSample};
pub use error::{Error, Result};
pub use matrix::ScheduleMatrix;
pub use params::{KGParams, SelectorParams, StationSet};
pub use verify::{VerificationReport, VerifyOptions, Witness};
