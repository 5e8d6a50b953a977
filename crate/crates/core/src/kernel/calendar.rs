//! Future event list.
//!
//! Ordering is `(time, seq)`: earliest time first, and among equal times the
//! event scheduled first pops first. `seq` comes from a counter bumped on
//! every `schedule` call, so the order never depends on payload contents.

use std::collections::{BTreeMap, HashMap};

use super::time::{SimDuration, SimTime};
use super::KernelError;

/// Handle returned by [`EventCalendar::schedule`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventId(u64);

impl EventId {
    pub fn raw(self) -> u64 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event<P> {
    pub id: EventId,
    pub time: SimTime,
    /// Insertion sequence number. Ids are issued from the same counter, so
    /// `id.raw() == seq` for every event.
    pub seq: u64,
    pub payload: P,
}

#[derive(Debug, Clone)]
pub struct EventCalendar<P> {
    pending: BTreeMap<(SimTime, u64), Event<P>>,
    // id -> scheduled time, for O(log n) cancel
    times: HashMap<u64, SimTime>,
    next_seq: u64,
    clock: SimTime,
}

impl<P> Default for EventCalendar<P> {
    fn default() -> Self {
        Self::new()
    }
}

impl<P> EventCalendar<P> {
    pub fn new() -> Self {
        Self {
            pending: BTreeMap::new(),
            times: HashMap::new(),
            next_seq: 0,
            clock: SimTime::ZERO,
        }
    }

    #[inline]
    pub fn clock(&self) -> SimTime {
        self.clock
    }

    pub fn len(&self) -> usize {
        self.pending.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pending.is_empty()
    }

    pub fn schedule(&mut self, time: SimTime, payload: P) -> Result<EventId, KernelError> {
        if time < self.clock {
            return Err(KernelError::SchedulingInPast {
                requested: time,
                clock: self.clock,
            });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        let id = EventId(seq);
        self.times.insert(seq, time);
        self.pending.insert(
            (time, seq),
            Event {
                id,
                time,
                seq,
                payload,
            },
        );
        Ok(id)
    }

    /// Schedules relative to the current clock. Cannot fail.
    pub fn schedule_in(&mut self, delay: SimDuration, payload: P) -> EventId {
        let at = self.clock + delay;
        self.schedule(at, payload)
            .expect("a non-negative delay never lands in the past")
    }

    /// Removes the minimum `(time, seq)` event and advances the clock to it.
    pub fn next_event(&mut self) -> Option<Event<P>> {
        let (_, event) = self.pending.pop_first()?;
        self.times.remove(&event.seq);
        debug_assert!(event.time >= self.clock);
        self.clock = event.time;
        Some(event)
    }

    pub fn peek_time(&self) -> Option<SimTime> {
        self.pending.first_key_value().map(|(&(t, _), _)| t)
    }

    /// Returns `true` if the event was pending and is now removed.
    pub fn cancel(&mut self, id: EventId) -> bool {
        match self.times.remove(&id.0) {
            Some(time) => self.pending.remove(&(time, id.0)).is_some(),
            None => false,
        }
    }

    /// Moves the clock forward without popping anything. Used to close a run
    /// at its horizon.
    pub fn advance_to(&mut self, time: SimTime) -> Result<(), KernelError> {
        if time < self.clock {
            return Err(KernelError::SchedulingInPast {
                requested: time,
                clock: self.clock,
            });
        }
        if let Some(first) = self.peek_time() {
            if first < time {
                return Err(KernelError::SkipsPendingEvent {
                    target: time,
                    pending: first,
                });
            }
        }
        self.clock = time;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(m: f64) -> SimTime {
        SimTime::from_minutes(m)
    }

    #[test]
    fn pops_in_time_order() {
        let mut cal = EventCalendar::new();
        cal.schedule(t(5.0), "late").unwrap();
        cal.schedule(t(3.0), "early").unwrap();
        assert_eq!(cal.next_event().unwrap().payload, "early");
        assert_eq!(cal.next_event().unwrap().payload, "late");
    }

    #[test]
    fn equal_times_pop_fifo() {
        let mut cal = EventCalendar::new();
        cal.schedule(t(7.0), 'A').unwrap();
        cal.schedule(t(7.0), 'B').unwrap();
        assert_eq!(cal.next_event().unwrap().payload, 'A');
        assert_eq!(cal.next_event().unwrap().payload, 'B');
    }

    #[test]
    fn scheduling_in_the_past_is_rejected() {
        let mut cal = EventCalendar::new();
        cal.schedule(t(10.0), ()).unwrap();
        cal.next_event().unwrap();
        assert_eq!(cal.clock(), t(10.0));
        let err = cal.schedule(t(9.0), ()).unwrap_err();
        assert!(matches!(err, KernelError::SchedulingInPast { .. }));
    }

    #[test]
    fn empty_calendar_leaves_clock_alone() {
        let mut cal: EventCalendar<()> = EventCalendar::new();
        assert!(cal.next_event().is_none());
        assert_eq!(cal.clock(), SimTime::ZERO);
    }

    #[test]
    fn three_pops_end_at_last_time() {
        let mut cal = EventCalendar::new();
        for m in [1.0, 2.0, 3.0] {
            cal.schedule(t(m), m).unwrap();
        }
        let popped: Vec<f64> = std::iter::from_fn(|| cal.next_event().map(|e| e.payload)).collect();
        assert_eq!(popped, vec![1.0, 2.0, 3.0]);
        assert_eq!(cal.clock(), t(3.0));
    }

    #[test]
    fn cancel_semantics() {
        let mut cal = EventCalendar::new();
        let a = cal.schedule(t(1.0), 'a').unwrap();
        cal.schedule(t(2.0), 'b').unwrap();
        assert!(cal.cancel(a));
        assert!(!cal.cancel(a));
        assert!(!cal.cancel(EventId(999)));
        assert_eq!(cal.next_event().unwrap().payload, 'b');
    }

    #[test]
    fn cancel_after_pop_is_false() {
        let mut cal = EventCalendar::new();
        let a = cal.schedule(t(1.0), ()).unwrap();
        cal.next_event();
        assert!(!cal.cancel(a));
    }

    #[test]
    fn ids_are_monotone() {
        let mut cal = EventCalendar::new();
        let a = cal.schedule(t(4.0), ()).unwrap();
        let b = cal.schedule(t(1.0), ()).unwrap();
        assert!(b > a);
    }

    #[test]
    fn advance_to_refuses_to_skip_events() {
        let mut cal = EventCalendar::new();
        cal.schedule(t(5.0), ()).unwrap();
        assert!(cal.advance_to(t(6.0)).is_err());
        cal.advance_to(t(5.0)).unwrap();
        assert_eq!(cal.clock(), t(5.0));
    }
}
