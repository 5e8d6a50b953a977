//! State-time accounting for a single resource.

use serde::{Deserialize, Serialize};

use super::time::{SimDuration, SimTime};
use super::KernelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResourceState {
    Idle,
    Busy,
    Waiting,
}

impl ResourceState {
    pub const ALL: [ResourceState; 3] = [
        ResourceState::Idle,
        ResourceState::Busy,
        ResourceState::Waiting,
    ];

    fn slot(self) -> usize {
        match self {
            ResourceState::Idle => 0,
            ResourceState::Busy => 1,
            ResourceState::Waiting => 2,
        }
    }
}

/// Accumulated time per state, episode counts, and a completed-move counter.
///
/// Accumulators are integer ticks, so at any flush time the three totals sum
/// to exactly `flush - created_at`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceMeter {
    id: String,
    state: ResourceState,
    entered_at: SimTime,
    created_at: SimTime,
    accumulated: [SimDuration; 3],
    episodes: [u64; 3],
    moves: u64,
    flushed_at: Option<SimTime>,
}

impl ResourceMeter {
    /// A meter that starts `Idle` at `created_at`.
    pub fn new(id: impl Into<String>, created_at: SimTime) -> Self {
        let mut episodes = [0; 3];
        episodes[ResourceState::Idle.slot()] = 1;
        Self {
            id: id.into(),
            state: ResourceState::Idle,
            entered_at: created_at,
            created_at,
            accumulated: [SimDuration::ZERO; 3],
            episodes,
            moves: 0,
            flushed_at: None,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn state(&self) -> ResourceState {
        self.state
    }

    pub fn entered_at(&self) -> SimTime {
        self.entered_at
    }

    pub fn created_at(&self) -> SimTime {
        self.created_at
    }

    pub fn moves(&self) -> u64 {
        self.moves
    }

    /// Time accrued to `state` up to the last transition or flush.
    pub fn accumulated(&self, state: ResourceState) -> SimDuration {
        self.accumulated[state.slot()]
    }

    /// Number of times the meter entered `state` (the initial idle counts).
    pub fn episodes(&self, state: ResourceState) -> u64 {
        self.episodes[state.slot()]
    }

    pub fn total_accumulated(&self) -> SimDuration {
        self.accumulated.iter().copied().sum()
    }

    pub fn flushed_at(&self) -> Option<SimTime> {
        self.flushed_at
    }

    /// Accrues the time since the last state entry to the current state, then
    /// switches to `new_state`. Re-entering the current state only accrues.
    pub fn transition(&mut self, new_state: ResourceState, at: SimTime) -> Result<(), KernelError> {
        self.accrue(at)?;
        if new_state != self.state {
            self.state = new_state;
            self.episodes[new_state.slot()] += 1;
        }
        self.flushed_at = None;
        Ok(())
    }

    /// [`transition`](Self::transition) plus one completed move.
    pub fn transition_counting_move(
        &mut self,
        new_state: ResourceState,
        at: SimTime,
    ) -> Result<(), KernelError> {
        self.transition(new_state, at)?;
        self.moves += 1;
        Ok(())
    }

    pub fn count_move(&mut self) {
        self.moves += 1;
    }

    /// Accrues up to `at` without changing state and marks the meter as read.
    pub fn flush(&mut self, at: SimTime) -> Result<(), KernelError> {
        self.accrue(at)?;
        self.flushed_at = Some(at);
        Ok(())
    }

    fn accrue(&mut self, at: SimTime) -> Result<(), KernelError> {
        let span = at
            .checked_since(self.entered_at)
            .ok_or(KernelError::TimeReversal {
                at,
                entered_at: self.entered_at,
            })?;
        self.accumulated[self.state.slot()] += span;
        self.entered_at = at;
        Ok(())
    }
}
