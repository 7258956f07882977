use crate::error::{Error, Result};
use crate::matrix::ScheduleMatrix;
use crate::params::StationSet;
use serde::Serialize;
use std::collections::BTreeMap;

/// What the channel reports for one slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SlotKind {
    /// No active station transmitted.
    Silence,
    /// Between 1 and `d` stations transmitted; all of them got through.
    Success,
    /// More than `d` stations transmitted; nothing got through.
    Conflict,
}

impl SlotKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SlotKind::Silence => "silence",
            SlotKind::Success => "success",
            SlotKind::Conflict => "conflict",
        }
    }
}

/// Per-slot record of a protocol run.
#[derive(Clone, Debug, Serialize)]
pub struct SlotOutcome {
    pub slot: usize,
    pub kind: SlotKind,
    pub transmitters: StationSet,
    pub succeeded: StationSet,
}

/// Full record of running a schedule against an initial active set on a
/// channel that delivers up to `d` simultaneous packets.
#[derive(Clone, Debug)]
pub struct SimulationTrace {
    d: u32,
    initial: StationSet,
    outcomes: Vec<SlotOutcome>,
    success_slot: BTreeMap<u32, usize>,
    residual: StationSet,
}

impl SimulationTrace {
    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn initial(&self) -> &StationSet {
        &self.initial
    }

    pub fn outcomes(&self) -> &[SlotOutcome] {
        &self.outcomes
    }

    /// Slot in which `station` delivered its packet, if it did.
    pub fn success_slot(&self, station: u32) -> Option<usize> {
        self.success_slot.get(&station).copied()
    }

    /// Stations still holding a packet after the last slot.
    pub fn residual(&self) -> &StationSet {
        &self.residual
    }

    /// Whether every initially active station delivered its packet.
    pub fn resolved(&self) -> bool {
        self.residual.is_empty()
    }

    /// Index of the last successful slot, or 0 when no slot succeeded (in
    /// particular for an initially empty active set).
    pub fn last_success_slot(&self) -> usize {
        self.success_slot.values().copied().max().unwrap_or(0)
    }

    /// Slots needed until the whole active set was resolved: the index of the
    /// last successful slot, or `None` when the run left stations unresolved.
    pub fn slots_to_resolution(&self) -> Option<usize> {
        self.resolved().then(|| self.last_success_slot())
    }

    /// CSV rendering: header `slot,kind,num_transmitters,succeeded_stations`,
    /// one line per slot, successful stations joined with `;`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("slot,kind,num_transmitters,succeeded_stations\n");
        for o in &self.outcomes {
            let succ = o
                .succeeded
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(";");
            out.push_str(&format!(
                "{},{},{},{}\n",
                o.slot,
                o.kind.as_str(),
                o.transmitters.len(),
                succ
            ));
        }
        out
    }
}

/// Runs the protocol: in each slot every still-active station scheduled by the
/// matrix transmits; if between 1 and `d` transmit, all of them succeed and
/// fall silent for good; if more than `d` transmit, the slot is a conflict and
/// nothing changes. Requires `d >= 1` and `active` within `1..=n`.
pub fn simulate(m: &ScheduleMatrix, active: &StationSet, d: u32) -> Result<SimulationTrace> {
    if d == 0 {
        return Err(Error::InvalidParams("channel capacity d must be >= 1".into()));
    }
    active.validate_within(m.n())?;
    let wpr = m.words_per_row();
    let mut live = active.to_mask(wpr);
    let mut outcomes = Vec::with_capacity(m.t());
    let mut success_slot = BTreeMap::new();
    for i in 0..m.t() {
        let row = m.row_words(i);
        let mut tx = vec![0u64; wpr];
        for w in 0..wpr {
            tx[w] = row[w] & live[w];
        }
        let count: u32 = tx.iter().map(|w| w.count_ones()).sum();
        let transmitters = StationSet::from_mask(&tx);
        let (kind, succeeded) = if count == 0 {
            (SlotKind::Silence, StationSet::empty())
        } else if count <= d {
            for w in 0..wpr {
                live[w] &= !tx[w];
            }
            for s in transmitters.iter() {
                success_slot.insert(s, i + 1);
            }
            (SlotKind::Success, transmitters.clone())
        } else {
            (SlotKind::Conflict, StationSet::empty())
        };
        outcomes.push(SlotOutcome {
            slot: i + 1,
            kind,
            transmitters,
            succeeded,
        });
    }
    Ok(SimulationTrace {
        d,
        initial: active.clone(),
        outcomes,
        success_slot,
        residual: StationSet::from_mask(&live),
    })
}

/// Whether the schedule resolves the given active set completely.
pub fn resolves(m: &ScheduleMatrix, active: &StationSet, d: u32) -> Result<bool> {
    if d == 0 {
        return Err(Error::InvalidParams("channel capacity d must be >= 1".into()));
    }
    active.validate_within(m.n())?;
    let mut live = active.to_mask(m.words_per_row());
    Ok(drain_mask(m, &mut live, d))
}

/// Stations left active after running the schedule.
pub fn residual_active(m: &ScheduleMatrix, active: &StationSet, d: u32) -> Result<StationSet> {
    if d == 0 {
        return Err(Error::InvalidParams("channel capacity d must be >= 1".into()));
    }
    active.validate_within(m.n())?;
    let mut live = active.to_mask(m.words_per_row());
    drain_mask(m, &mut live, d);
    Ok(StationSet::from_mask(&live))
}

/// Runs a sequence of schedules back to back against one persistent active
/// set, which is exactly running their vertical concatenation.
pub fn staged_simulate(
    stages: &[ScheduleMatrix],
    active: &StationSet,
    d: u32,
) -> Result<SimulationTrace> {
    let stacked = ScheduleMatrix::stack(stages)?;
    simulate(&stacked, active, d)
}

/// Allocation-light core loop on raw masks: drains `live` in place and
/// reports whether it ended empty.
pub(crate) fn drain_mask(m: &ScheduleMatrix, live: &mut [u64], d: u32) -> bool {
    let mut remaining: u32 = live.iter().map(|w| w.count_ones()).sum();
    if remaining == 0 {
        return true;
    }
    for i in 0..m.t() {
        let row = m.row_words(i);
        let count: u32 = row.iter().zip(live.iter()).map(|(r, l)| (r & l).count_ones()).sum();
        if count >= 1 && count <= d {
            for (l, r) in live.iter_mut().zip(row) {
                *l &= !r;
            }
            remaining -= count;
            if remaining == 0 {
                return true;
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ScheduleMatrix {
        ScheduleMatrix::from_rows(&[vec![1, 1, 1], vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]])
            .unwrap()
    }

    #[test]
    fn conflict_then_singletons() {
        let m = sample();
        let s = StationSet::full(3);
        let tr = simulate(&m, &s, 2).unwrap();
        assert_eq!(tr.outcomes()[0].kind, SlotKind::Conflict);
        assert_eq!(tr.outcomes()[0].transmitters.len(), 3);
        assert_eq!(tr.outcomes()[1].kind, SlotKind::Success);
        assert_eq!(tr.success_slot(1), Some(2));
        assert_eq!(tr.success_slot(2), Some(3));
        assert_eq!(tr.success_slot(3), Some(4));
        assert!(tr.resolved());
        assert_eq!(tr.slots_to_resolution(), Some(4));
        assert_eq!(
            tr.to_csv(),
            "slot,kind,num_transmitters,succeeded_stations\n\
             1,conflict,3,\n\
             2,success,1,1\n\
             3,success,1,2\n\
             4,success,1,3\n"
        );
    }

    #[test]
    fn capacity_three_resolves_in_first_slot() {
        let m = sample();
        let tr = simulate(&m, &StationSet::full(3), 3).unwrap();
        assert_eq!(tr.outcomes()[0].kind, SlotKind::Success);
        assert_eq!(tr.outcomes()[0].succeeded.len(), 3);
        // Everyone fell silent, so the remaining slots are silence.
        assert!(tr.outcomes()[1..]
            .iter()
            .all(|o| o.kind == SlotKind::Silence));
        assert_eq!(tr.slots_to_resolution(), Some(1));
    }

    #[test]
    fn empty_active_set_is_resolved_trivially() {
        let m = sample();
        let tr = simulate(&m, &StationSet::empty(), 1).unwrap();
        assert!(tr.resolved());
        assert_eq!(tr.slots_to_resolution(), Some(0));
        assert!(tr.outcomes().iter().all(|o| o.kind == SlotKind::Silence));
    }

    #[test]
    fn unresolved_residual() {
        let m = ScheduleMatrix::all_ones(1, 3).unwrap();
        let s = StationSet::new([1, 2]).unwrap();
        let tr = simulate(&m, &s, 1).unwrap();
        assert!(!tr.resolved());
        assert_eq!(tr.residual(), &s);
        assert_eq!(tr.slots_to_resolution(), None);
        assert_eq!(residual_active(&m, &s, 1).unwrap(), s);
        assert!(!resolves(&m, &s, 1).unwrap());
        assert!(resolves(&m, &s, 2).unwrap());
    }

    #[test]
    fn input_validation() {
        let m = sample();
        assert!(simulate(&m, &StationSet::full(3), 0).is_err());
        assert!(simulate(&m, &StationSet::new([4]).unwrap(), 1).is_err());
        assert!(resolves(&m, &StationSet::new([9]).unwrap(), 2).is_err());
    }

    #[test]
    fn staged_equals_stacked() {
        let stages = vec![
            ScheduleMatrix::all_ones(1, 3).unwrap(),
            ScheduleMatrix::identity(3).unwrap(),
        ];
        let s = StationSet::full(3);
        let staged = staged_simulate(&stages, &s, 2).unwrap();
        let direct = simulate(&ScheduleMatrix::stack(&stages).unwrap(), &s, 2).unwrap();
        assert_eq!(staged.to_csv(), direct.to_csv());
        assert_eq!(staged.resolved(), direct.resolved());
        // Slot 1 conflicts (3 > 2), slots 2-4 pick off singletons.
        assert_eq!(staged.slots_to_resolution(), Some(4));
    }

    #[test]
    fn larger_capacity_never_hurts() {
        // On every subset of a fixed schedule, raising d shrinks the residual.
        let m = ScheduleMatrix::from_rows(&[
            vec![1, 1, 0, 1],
            vec![0, 1, 1, 0],
            vec![1, 0, 1, 1],
            vec![0, 0, 1, 1],
        ])
        .unwrap();
        for bits in 0u32..16 {
            let s = StationSet::new((1..=4).filter(|j| bits >> (j - 1) & 1 == 1)).unwrap();
            for d in 1..=3u32 {
                let r_lo = residual_active(&m, &s, d).unwrap();
                let r_hi = residual_active(&m, &s, d + 1).unwrap();
                assert!(
                    r_hi.iter().all(|x| r_lo.contains(x)),
                    "residual grew when d rose: S={s}, d={d}"
                );
            }
        }
    }

    #[test]
    fn drain_matches_simulate() {
        let m = sample();
        for bits in 0u32..8 {
            let s = StationSet::new((1..=3).filter(|j| bits >> (j - 1) & 1 == 1)).unwrap();
            for d in 1..=3 {
                let tr = simulate(&m, &s, d).unwrap();
                assert_eq!(resolves(&m, &s, d).unwrap(), tr.resolved());
                assert_eq!(&residual_active(&m, &s, d).unwrap(), tr.residual());
            }
        }
    }
}
