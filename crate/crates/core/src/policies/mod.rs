//! Decision rules used by the terminal model.
//!
//! Every rule is selected by id from the scenario file and is a pure function
//! of the state it is handed, so a run is fully determined by its scenario
//! and seed.

mod compare;

pub use compare::{
    compare_policies, compare_scenarios, run_report, CompareError, KpiDelta, PairedComparison,
    SeedPair,
};

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::terminal::{BlockId, Category, CraneId, Quay, TruckId, TruckRequest, YardBlock};

/// Where in the process a rule is consulted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecisionPoint {
    Berth,
    Crane,
    Truck,
    Storage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BerthPolicy {
    /// Leftmost position with room.
    FirstFit,
    /// Long ships take the rightmost position with room, others the leftmost.
    /// Keeps long ships under the high-index cranes.
    LongShipsRight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CranePolicy {
    /// `ceil(remaining / moves_per_crane)` cranes, between 1 and the cap.
    Proportional,
    /// Always ask for the cap.
    Max,
    /// Proportional, with the highest-index crane dedicated to ships above
    /// the long-ship threshold. It may help a short ship while no long ship
    /// needs it, and goes back as soon as one does.
    LongShip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TruckPolicy {
    /// Idle truck that has waited longest; FIFO request queue.
    LongestIdle,
    /// Idle truck with the lowest number; FIFO request queue.
    LowestId,
    /// Longest-idle truck; requests from long ships jump the queue.
    LongShipPriority,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StoragePolicy {
    /// Matching block with the lowest committed occupancy, ties by block order.
    LeastOccupancy,
    /// Matching blocks in turn, skipping full ones.
    RoundRobin,
}

macro_rules! policy_ids {
    ($ty:ident { $($variant:ident => $id:literal),+ $(,)? }) => {
        impl $ty {
            pub const IDS: &'static [&'static str] = &[$($id),+];

            pub fn id(self) -> &'static str {
                match self { $($ty::$variant => $id),+ }
            }

            pub fn from_id(id: &str) -> Option<Self> {
                match id { $($id => Some($ty::$variant),)+ _ => None }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.id())
            }
        }
    };
}

policy_ids!(BerthPolicy { FirstFit => "first-fit", LongShipsRight => "long-ships-right" });
policy_ids!(CranePolicy { Proportional => "proportional", Max => "max", LongShip => "long-ship" });
policy_ids!(TruckPolicy {
    LongestIdle => "longest-idle",
    LowestId => "lowest-id",
    LongShipPriority => "long-ship-priority",
});
policy_ids!(StoragePolicy { LeastOccupancy => "least-occupancy", RoundRobin => "round-robin" });

/// The rule returned for one decision point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    Berth(BerthPolicy),
    Crane(CranePolicy),
    Truck(TruckPolicy),
    Storage(StoragePolicy),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySet {
    pub berth: BerthPolicy,
    pub crane: CranePolicy,
    pub max_cranes_per_ship: u32,
    /// Remaining moves per requested crane for the proportional rules.
    pub moves_per_crane: u32,
    pub truck: TruckPolicy,
    pub storage: StoragePolicy,
    pub long_ship_threshold_m: Option<f64>,
    /// Export fetches a loading crane keeps in flight.
    pub load_lookahead: u32,
}

impl Default for PolicySet {
    fn default() -> Self {
        Self {
            berth: BerthPolicy::FirstFit,
            crane: CranePolicy::Proportional,
            max_cranes_per_ship: 3,
            moves_per_crane: 150,
            truck: TruckPolicy::LongestIdle,
            storage: StoragePolicy::LeastOccupancy,
            long_ship_threshold_m: None,
            load_lookahead: 3,
        }
    }
}

impl PolicySet {
    pub fn resolve(&self, point: DecisionPoint) -> Rule {
        match point {
            DecisionPoint::Berth => Rule::Berth(self.berth),
            DecisionPoint::Crane => Rule::Crane(self.crane),
            DecisionPoint::Truck => Rule::Truck(self.truck),
            DecisionPoint::Storage => Rule::Storage(self.storage),
        }
    }

    pub fn is_long(&self, length_m: f64) -> bool {
        self.long_ship_threshold_m
            .is_some_and(|threshold| length_m >= threshold)
    }
}

impl BerthPolicy {
    pub fn choose(self, quay: &Quay, length_m: f64, long: bool) -> Option<f64> {
        match self {
            BerthPolicy::FirstFit => quay.first_fit(length_m),
            BerthPolicy::LongShipsRight if long => quay.last_fit(length_m),
            BerthPolicy::LongShipsRight => quay.first_fit(length_m),
        }
    }
}

/// What the crane rule sees about the ship asking for cranes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CraneRequest {
    pub position_m: f64,
    pub length_m: f64,
    pub quay_length_m: f64,
    pub long: bool,
    pub remaining_moves: u64,
    pub assigned: usize,
    /// The ship already has the dedicated crane.
    pub holds_dedicated: bool,
    /// The dedicated crane is free or on a short ship, so a long ship can
    /// expect it.
    pub dedicated_available: bool,
    /// Some long ship is alongside without the dedicated crane, or heads the
    /// berth queue.
    pub long_ship_waiting: bool,
}

impl CranePolicy {
    pub fn desired(self, set: &PolicySet, remaining_moves: u64) -> usize {
        let cap = set.max_cranes_per_ship.max(1) as usize;
        match self {
            CranePolicy::Max => cap,
            CranePolicy::Proportional | CranePolicy::LongShip => {
                let per = u64::from(set.moves_per_crane.max(1));
                (remaining_moves.div_ceil(per) as usize).clamp(1, cap)
            }
        }
    }

    /// Picks cranes from `feasible` (free cranes inside the ship's
    /// non-crossing window, ascending). `crane_count` is the pool size.
    pub fn assign(
        self,
        set: &PolicySet,
        request: &CraneRequest,
        feasible: &[CraneId],
        crane_count: usize,
    ) -> Vec<CraneId> {
        if request.remaining_moves == 0 {
            return Vec::new();
        }
        let want = self
            .desired(set, request.remaining_moves)
            .saturating_sub(request.assigned);
        if want == 0 {
            return Vec::new();
        }
        let dedicated = crane_count.checked_sub(1).map(CraneId);
        let mut pool: Vec<CraneId> = feasible.to_vec();
        let mut picked = Vec::with_capacity(want);
        let mut reserve = 0;
        if self == CranePolicy::LongShip {
            if request.long {
                if let Some(d) = dedicated.filter(|d| pool.contains(d)) {
                    picked.push(d);
                    pool.retain(|&c| c != d);
                } else if !request.holds_dedicated && request.dedicated_available {
                    // keep a slot for it
                    reserve = 1;
                }
                // the rest come from the dedicated crane's side
                pool.reverse();
            } else {
                if request.long_ship_waiting {
                    pool.retain(|&c| Some(c) != dedicated);
                }
                if !left_half(request) {
                    pool.reverse();
                }
            }
        } else if !left_half(request) {
            pool.reverse();
        }
        let room = want.saturating_sub(reserve);
        if room <= picked.len() {
            picked.sort();
            return picked;
        }
        picked.extend(pool.into_iter().take(room - picked.len()));
        picked.sort();
        picked
    }
}

fn left_half(request: &CraneRequest) -> bool {
    request.position_m + 0.5 * request.length_m < 0.5 * request.quay_length_m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdleTruck {
    pub id: TruckId,
    pub idle_since: crate::kernel::SimTime,
}

impl TruckPolicy {
    pub fn pick_truck(self, idle: &[IdleTruck]) -> Option<TruckId> {
        match self {
            TruckPolicy::LongestIdle | TruckPolicy::LongShipPriority => idle
                .iter()
                .min_by_key(|t| (t.idle_since, t.id))
                .map(|t| t.id),
            TruckPolicy::LowestId => idle.iter().map(|t| t.id).min(),
        }
    }

    /// Index of the queued request to serve next.
    pub fn next_request(self, queue: &VecDeque<TruckRequest>) -> Option<usize> {
        if queue.is_empty() {
            return None;
        }
        match self {
            TruckPolicy::LongShipPriority => {
                Some(queue.iter().position(|r| r.priority).unwrap_or(0))
            }
            TruckPolicy::LongestIdle | TruckPolicy::LowestId => Some(0),
        }
    }
}

impl StoragePolicy {
    /// Block for an incoming box of `category`, or `None` when every matching
    /// block is full. `turn` is the number of earlier decisions for this
    /// category, used by round-robin.
    pub fn select_block(
        self,
        category: Category,
        blocks: &[YardBlock],
        turn: u64,
    ) -> Option<BlockId> {
        let candidates: Vec<&YardBlock> = blocks
            .iter()
            .filter(|b| b.category == category && b.has_room())
            .collect();
        match self {
            StoragePolicy::LeastOccupancy => candidates
                .into_iter()
                .min_by_key(|b| (b.committed(), b.id))
                .map(|b| b.id),
            StoragePolicy::RoundRobin => {
                let matching: Vec<&YardBlock> =
                    blocks.iter().filter(|b| b.category == category).collect();
                if matching.is_empty() {
                    return None;
                }
                let n = matching.len();
                let start = (turn % n as u64) as usize;
                (0..n)
                    .map(|k| matching[(start + k) % n])
                    .find(|b| b.has_room())
                    .map(|b| b.id)
            }
        }
    }
}

/// Export block to pull from: most unpromised stock, ties by block order.
pub fn select_retrieval_block(category: Category, blocks: &[YardBlock]) -> Option<BlockId> {
    blocks
        .iter()
        .filter(|b| b.category == category && !b.available.is_empty())
        .min_by_key(|b| (std::cmp::Reverse(b.available.len()), b.id))
        .map(|b| b.id)
}
