//! Discrete-event core: clock, event calendar, random streams, and resource
//! meters. Nothing in here knows about containers or ships.

pub mod calendar;
pub mod meter;
pub mod rng;
pub mod time;

pub use calendar::{Event, EventCalendar, EventId};
pub use meter::{ResourceMeter, ResourceState};
pub use rng::{Distribution, DistributionError, RngStream};
pub use time::{SimDuration, SimTime, TICKS_PER_HOUR, TICKS_PER_MINUTE};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("cannot schedule at {requested}: clock is already at {clock}")]
    SchedulingInPast { requested: SimTime, clock: SimTime },
    #[error("cannot advance clock to {target}: an event is pending at {pending}")]
    SkipsPendingEvent { target: SimTime, pending: SimTime },
    #[error("meter transition at {at} precedes state entry at {entered_at}")]
    TimeReversal { at: SimTime, entered_at: SimTime },
}
