//! Simulation clock values.
//!
//! Time is stored as an integer count of milliseconds since the start of the
//! run. Durations sampled in minutes are rounded to the nearest tick once, at
//! the boundary, so every accumulator downstream is exact integer arithmetic.

use std::fmt;
use std::ops::{Add, AddAssign, Sub};

use serde::{Deserialize, Serialize};

/// Ticks per simulated minute (one tick is one millisecond).
pub const TICKS_PER_MINUTE: u64 = 60_000;
pub const TICKS_PER_HOUR: u64 = 60 * TICKS_PER_MINUTE;

/// A point on the simulation clock.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct SimTime(u64);

/// A non-negative span of simulated time.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct SimDuration(u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    #[inline]
    pub const fn from_ticks(ticks: u64) -> Self {
        SimTime(ticks)
    }

    #[inline]
    pub const fn ticks(self) -> u64 {
        self.0
    }

    /// Rounds to the nearest tick. Negative or non-finite input clamps to zero.
    pub fn from_minutes(minutes: f64) -> Self {
        SimTime(minutes_to_ticks(minutes))
    }

    pub fn from_hours(hours: f64) -> Self {
        Self::from_minutes(hours * 60.0)
    }

    pub fn as_minutes(self) -> f64 {
        self.0 as f64 / TICKS_PER_MINUTE as f64
    }

    pub fn as_hours(self) -> f64 {
        self.0 as f64 / TICKS_PER_HOUR as f64
    }

    /// Elapsed span since `earlier`; `None` if `earlier` is in the future.
    pub fn checked_since(self, earlier: SimTime) -> Option<SimDuration> {
        self.0.checked_sub(earlier.0).map(SimDuration)
    }

    pub fn saturating_since(self, earlier: SimTime) -> SimDuration {
        SimDuration(self.0.saturating_sub(earlier.0))
    }
}

impl SimDuration {
    pub const ZERO: SimDuration = SimDuration(0);

    #[inline]
    pub const fn from_ticks(ticks: u64) -> Self {
        SimDuration(ticks)
    }

    #[inline]
    pub const fn ticks(self) -> u64 {
        self.0
    }

    pub fn from_minutes(minutes: f64) -> Self {
        SimDuration(minutes_to_ticks(minutes))
    }

    pub fn from_hours(hours: f64) -> Self {
        Self::from_minutes(hours * 60.0)
    }

    pub fn as_minutes(self) -> f64 {
        self.0 as f64 / TICKS_PER_MINUTE as f64
    }

    pub fn as_hours(self) -> f64 {
        self.0 as f64 / TICKS_PER_HOUR as f64
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

fn minutes_to_ticks(minutes: f64) -> u64 {
    if !minutes.is_finite() || minutes <= 0.0 {
        return 0;
    }
    (minutes * TICKS_PER_MINUTE as f64).round() as u64
}

impl Add<SimDuration> for SimTime {
    type Output = SimTime;

    fn add(self, rhs: SimDuration) -> SimTime {
        SimTime(self.0 + rhs.0)
    }
}

impl AddAssign<SimDuration> for SimTime {
    fn add_assign(&mut self, rhs: SimDuration) {
        self.0 += rhs.0;
    }
}

impl Add for SimDuration {
    type Output = SimDuration;

    fn add(self, rhs: SimDuration) -> SimDuration {
        SimDuration(self.0 + rhs.0)
    }
}

impl AddAssign for SimDuration {
    fn add_assign(&mut self, rhs: SimDuration) {
        self.0 += rhs.0;
    }
}

impl Sub for SimTime {
    type Output = SimDuration;

    /// Panics if `rhs` is later than `self`.
    fn sub(self, rhs: SimTime) -> SimDuration {
        self.checked_since(rhs)
            .expect("subtracting a later SimTime from an earlier one")
    }
}

impl std::iter::Sum for SimDuration {
    fn sum<I: Iterator<Item = SimDuration>>(iter: I) -> Self {
        iter.fold(SimDuration::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.3} min", self.as_minutes())
    }
}

impl fmt::Display for SimDuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.3} min", self.as_minutes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minute_conversions_are_exact_for_millisecond_values() {
        assert_eq!(SimTime::from_minutes(2.4).ticks(), 144_000);
        assert_eq!(SimTime::from_hours(168.0).ticks(), 168 * TICKS_PER_HOUR);
        assert_eq!(
            SimDuration::from_minutes(2.4).ticks() * 100,
            240 * TICKS_PER_MINUTE
        );
    }

    #[test]
    fn negative_and_nan_clamp_to_zero() {
        assert_eq!(SimTime::from_minutes(-3.0), SimTime::ZERO);
        assert_eq!(SimDuration::from_minutes(f64::NAN), SimDuration::ZERO);
    }

    #[test]
    fn checked_since_rejects_reversal() {
        let a = SimTime::from_minutes(10.0);
        let b = SimTime::from_minutes(12.0);
        assert_eq!(b.checked_since(a), Some(SimDuration::from_minutes(2.0)));
        assert_eq!(a.checked_since(b), None);
    }
}
