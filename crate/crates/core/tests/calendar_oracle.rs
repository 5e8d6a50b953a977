//! The calendar against a plain sorted list under random schedule, cancel,
//! pop and advance operations.

use portsim::kernel::{EventCalendar, EventId, KernelError, SimDuration, SimTime};

struct SplitMix(u64);

impl SplitMix {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }
}

/// Pending events as `(time, seq, payload)`, kept unsorted; the minimum is
/// found by a linear scan.
#[derive(Default)]
struct Oracle {
    pending: Vec<(u64, u64, u32)>,
    next_seq: u64,
    clock: u64,
}

impl Oracle {
    fn schedule(&mut self, t: u64, payload: u32) -> Option<u64> {
        if t < self.clock {
            return None;
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.pending.push((t, seq, payload));
        Some(seq)
    }

    fn pop(&mut self) -> Option<(u64, u64, u32)> {
        let i = (0..self.pending.len()).min_by_key(|&i| (self.pending[i].0, self.pending[i].1))?;
        let e = self.pending.swap_remove(i);
        self.clock = e.0;
        Some(e)
    }

    fn cancel(&mut self, seq: u64) -> bool {
        match self.pending.iter().position(|e| e.1 == seq) {
            Some(i) => {
                self.pending.swap_remove(i);
                true
            }
            None => false,
        }
    }

    fn min_time(&self) -> Option<u64> {
        self.pending.iter().map(|e| e.0).min()
    }
}

fn run_case(seed: u64, ops: usize) {
    let mut rng = SplitMix(seed);
    let mut cal: EventCalendar<u32> = EventCalendar::new();
    let mut oracle = Oracle::default();
    let mut ids: Vec<EventId> = Vec::new();

    for op in 0..ops {
        let payload = op as u32;
        match rng.below(10) {
            // Absolute schedule, sometimes in the past, often at a tied time.
            0..=3 => {
                let t = if rng.below(4) == 0 {
                    oracle.clock.saturating_sub(rng.below(5))
                } else {
                    oracle.clock + rng.below(50)
                };
                let got = cal.schedule(SimTime::from_ticks(t), payload);
                match oracle.schedule(t, payload) {
                    Some(seq) => {
                        let id = got.expect("oracle accepted this time");
                        assert_eq!(id.raw(), seq, "seed {seed} op {op}");
                        ids.push(id);
                    }
                    None => assert!(
                        matches!(got, Err(KernelError::SchedulingInPast { .. })),
                        "seed {seed} op {op}: past schedule accepted"
                    ),
                }
            }
            4 => {
                let d = rng.below(30);
                let id = cal.schedule_in(SimDuration::from_ticks(d), payload);
                let seq = oracle.schedule(oracle.clock + d, payload).unwrap();
                assert_eq!(id.raw(), seq);
                ids.push(id);
            }
            5..=7 => {
                let got = cal.next_event();
                let want = oracle.pop();
                match (got, want) {
                    (None, None) => {}
                    (Some(e), Some((t, seq, p))) => {
                        assert_eq!(
                            (e.time.ticks(), e.seq, e.payload, e.id.raw()),
                            (t, seq, p, seq),
                            "seed {seed} op {op}"
                        );
                    }
                    (g, w) => panic!("seed {seed} op {op}: calendar {g:?}, oracle {w:?}"),
                }
            }
            8 => {
                if ids.is_empty() {
                    continue;
                }
                let id = ids[rng.below(ids.len() as u64) as usize];
                assert_eq!(
                    cal.cancel(id),
                    oracle.cancel(id.raw()),
                    "seed {seed} op {op}"
                );
            }
            _ => {
                let target = oracle.clock + rng.below(20);
                let got = cal.advance_to(SimTime::from_ticks(target));
                match oracle.min_time() {
                    Some(m) if m < target => assert!(
                        matches!(got, Err(KernelError::SkipsPendingEvent { .. })),
                        "seed {seed} op {op}: advance skipped an event"
                    ),
                    _ => {
                        got.unwrap();
                        oracle.clock = target;
                    }
                }
            }
        }
        assert_eq!(cal.clock().ticks(), oracle.clock);
        assert_eq!(cal.len(), oracle.pending.len());
        assert_eq!(cal.peek_time().map(SimTime::ticks), oracle.min_time());
    }

    // Drain: the remaining order must match too.
    while let Some((t, seq, p)) = oracle.pop() {
        let e = cal.next_event().expect("calendar ran dry early");
        assert_eq!((e.time.ticks(), e.seq, e.payload), (t, seq, p));
    }
    assert!(cal.next_event().is_none());
}

#[test]
fn matches_sorted_list_over_many_seeds() {
    for seed in 0..100 {
        run_case(seed, 10_000);
    }
}

#[test]
fn equal_times_pop_in_insertion_order() {
    let mut cal = EventCalendar::new();
    let t = SimTime::from_minutes(5.0);
    for p in 0..1000u32 {
        cal.schedule(t, p).unwrap();
    }
    let popped: Vec<u32> = std::iter::from_fn(|| cal.next_event().map(|e| e.payload)).collect();
    assert_eq!(popped, (0..1000).collect::<Vec<_>>());
}

#[test]
fn cancelled_event_never_fires_and_cancel_is_idempotent() {
    let mut cal = EventCalendar::new();
    let a = cal.schedule(SimTime::from_ticks(10), 'a').unwrap();
    cal.schedule(SimTime::from_ticks(20), 'b').unwrap();
    assert!(cal.cancel(a));
    assert!(!cal.cancel(a));
    assert_eq!(cal.next_event().unwrap().payload, 'b');
    assert!(cal.next_event().is_none());
}
