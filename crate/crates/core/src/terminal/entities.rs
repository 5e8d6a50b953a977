use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::kernel::{ResourceMeter, SimTime};

macro_rules! index_id {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub usize);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0
            }
        }
    };
}

index_id!(ContainerId);
index_id!(ShipId);
index_id!(
    /// Zero-based rail position; crane 0 is the leftmost along the quay.
    CraneId
);
index_id!(TruckId);
index_id!(BlockId);
index_id!(
    /// A yard-handling group: one RTG, or the pooled top-lift/empty-handler fleet.
    HandlerId
);

impl fmt::Display for CraneId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Crane {}", self.0 + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ContainerSize {
    #[serde(rename = "20ft")]
    Twenty,
    #[serde(rename = "40ft")]
    Forty,
}

impl ContainerSize {
    pub fn teu(self) -> u32 {
        match self {
            ContainerSize::Twenty => 1,
            ContainerSize::Forty => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Import,
    Export,
    Empty,
    Reefer,
    Hazardous,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::Import,
        Category::Export,
        Category::Empty,
        Category::Reefer,
        Category::Hazardous,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::Import => "import",
            Category::Export => "export",
            Category::Empty => "empty",
            Category::Reefer => "reefer",
            Category::Hazardous => "hazardous",
        }
    }

    /// Categories that arrive on ships and are discharged into the yard.
    pub fn is_discharged(self) -> bool {
        self != Category::Export
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Distance class of a block from the quay apron; selects the truck travel
/// time distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceClass {
    Near,
    Mid,
    Far,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "at", content = "id", rename_all = "kebab-case")]
pub enum Location {
    OnShip(ShipId),
    AtQuayCrane(CraneId),
    OnTruck(TruckId),
    /// On the block apron, handed to the yard equipment but not yet stacked
    /// (stores), or being lifted out (retrieves).
    AtYardCrane(BlockId),
    InBlock(BlockId),
    Departed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Container {
    pub id: ContainerId,
    pub size: ContainerSize,
    pub category: Category,
    pub location: Location,
}

impl Container {
    pub fn teu(&self) -> u32 {
        self.size.teu()
    }
}

/// A ship as generated by the arrival process, before it enters the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShipArrival {
    pub arrival: SimTime,
    pub length_m: f64,
    pub discharge: Vec<(ContainerSize, Category)>,
    pub load_demand: u32,
}

impl ShipArrival {
    pub fn total_moves(&self) -> u64 {
        self.discharge.len() as u64 + u64::from(self.load_demand)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ship {
    pub id: ShipId,
    pub arrival: SimTime,
    pub length_m: f64,
    /// Above the long-ship threshold, when the scenario defines one.
    pub long: bool,
    pub discharge: Vec<ContainerId>,
    pub load_demand: u32,
    pub berth_position_m: Option<f64>,
    pub berthed_at: Option<SimTime>,
    pub departed_at: Option<SimTime>,
    /// Cranes currently working this ship, in rail order.
    pub cranes: Vec<CraneId>,
    /// Index of the next discharge container not yet picked by a crane.
    pub next_discharge: usize,
    /// Discharge containers handed over to trucks.
    pub discharged: u32,
    pub loads_requested: u32,
    pub loads_completed: u32,
    /// Load slots dropped because no export box was left in the yard.
    pub load_shortfall: u32,
    pub loaded: Vec<ContainerId>,
}

impl Ship {
    pub fn unstarted_discharge(&self) -> usize {
        self.discharge.len() - self.next_discharge
    }

    pub fn unrequested_loads(&self) -> u32 {
        self.load_demand - self.loads_requested
    }

    /// Moves not yet started by any crane.
    pub fn remaining_moves(&self) -> u64 {
        self.unstarted_discharge() as u64 + u64::from(self.unrequested_loads())
    }

    pub fn is_berthed(&self) -> bool {
        self.berthed_at.is_some() && self.departed_at.is_none()
    }

    pub fn work_complete(&self) -> bool {
        self.discharged as usize == self.discharge.len() && self.loads_completed == self.load_demand
    }

    /// `(start, end)` along the quay while berthed.
    pub fn quay_span(&self) -> Option<(f64, f64)> {
        self.berth_position_m.map(|p| (p, p + self.length_m))
    }
}

/// A berthed interval along the quay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerthedShip {
    pub ship: ShipId,
    pub position_m: f64,
    pub length_m: f64,
}

impl BerthedShip {
    pub fn end_m(&self) -> f64 {
        self.position_m + self.length_m
    }
}

/// Continuous quay line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quay {
    pub length_m: f64,
    pub clearance_m: f64,
    /// Sorted by position.
    pub berthed: Vec<BerthedShip>,
}

impl Quay {
    pub fn new(length_m: f64, clearance_m: f64) -> Self {
        Self {
            length_m,
            clearance_m,
            berthed: Vec::new(),
        }
    }

    /// Feasible `[lo, hi]` ranges for the start position of a ship of
    /// `length`, one per gap, left to right.
    fn start_windows(&self, length: f64) -> Vec<(f64, f64)> {
        let mut windows = Vec::new();
        let mut lo = 0.0;
        for b in &self.berthed {
            let hi = b.position_m - self.clearance_m - length;
            if hi >= lo {
                windows.push((lo, hi));
            }
            lo = b.end_m() + self.clearance_m;
        }
        let hi = self.length_m - length;
        if hi >= lo {
            windows.push((lo, hi));
        }
        windows
    }

    /// Leftmost start position where `length` fits with clearance to its
    /// neighbours.
    pub fn first_fit(&self, length: f64) -> Option<f64> {
        self.start_windows(length).first().map(|&(lo, _)| lo)
    }

    /// Rightmost start position where `length` fits.
    pub fn last_fit(&self, length: f64) -> Option<f64> {
        self.start_windows(length).last().map(|&(_, hi)| hi)
    }

    pub fn berth(&mut self, ship: ShipId, position_m: f64, length_m: f64) {
        let entry = BerthedShip {
            ship,
            position_m,
            length_m,
        };
        let at = self.berthed.partition_point(|b| b.position_m < position_m);
        self.berthed.insert(at, entry);
    }

    pub fn unberth(&mut self, ship: ShipId) -> Option<BerthedShip> {
        let at = self.berthed.iter().position(|b| b.ship == ship)?;
        Some(self.berthed.remove(at))
    }

    pub fn occupied_m(&self) -> f64 {
        self.berthed.iter().map(|b| b.length_m).sum()
    }

    /// Pairwise disjoint and inside `[0, length]`.
    pub fn is_consistent(&self) -> bool {
        let inside = self
            .berthed
            .iter()
            .all(|b| b.position_m >= 0.0 && b.end_m() <= self.length_m + 1e-9);
        let disjoint = self
            .berthed
            .windows(2)
            .all(|w| w[0].end_m() <= w[1].position_m);
        inside && disjoint
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YardBlock {
    pub id: BlockId,
    pub name: String,
    pub category: Category,
    pub capacity: u32,
    pub distance: DistanceClass,
    pub handler: HandlerId,
    /// Stacked boxes.
    pub occupancy: u32,
    /// Boxes on their way in (block chosen, not yet stacked).
    pub inbound: u32,
    /// Stacked boxes promised to a pending retrieval.
    pub outbound: u32,
    pub transactions: u64,
    pub stores: u64,
    pub retrieves: u64,
    /// Stacked boxes not yet promised to a retrieval.
    pub available: Vec<ContainerId>,
}

impl YardBlock {
    /// Occupancy plus boxes already committed to arrive.
    pub fn committed(&self) -> u32 {
        self.occupancy + self.inbound
    }

    pub fn has_room(&self) -> bool {
        self.committed() < self.capacity
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HandlerKind {
    /// One rubber-tyred gantry crane dedicated to one block.
    Rtg,
    /// Heavy top-lift trucks and empty handlers pooled over several blocks.
    TopLiftGroup,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum YardJob {
    Store {
        container: ContainerId,
        block: BlockId,
    },
    Retrieve {
        container: ContainerId,
        block: BlockId,
        truck: TruckId,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YardUnit {
    pub meter: ResourceMeter,
    pub current: Option<YardJob>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YardHandler {
    pub id: HandlerId,
    pub name: String,
    pub kind: HandlerKind,
    pub blocks: Vec<BlockId>,
    pub units: Vec<YardUnit>,
    pub queue: VecDeque<YardJob>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "kebab-case")]
pub enum TruckTask {
    Idle,
    /// Carrying a discharged box to its block.
    Delivering {
        container: ContainerId,
        block: BlockId,
    },
    /// Holding a discharged box at the quay because every matching block is full.
    OverflowHold {
        container: ContainerId,
    },
    /// Driving empty back to the quay.
    Returning,
    /// Driving empty to a block to collect an export box.
    Fetching {
        container: ContainerId,
        block: BlockId,
        crane: CraneId,
    },
    /// At the block, waiting for the yard equipment to lift the box on.
    AwaitingRetrieve {
        container: ContainerId,
        block: BlockId,
        crane: CraneId,
    },
    /// Carrying an export box to the quay crane.
    Bringing {
        container: ContainerId,
        crane: CraneId,
    },
    /// Queued under the quay crane with an export box.
    AtCrane {
        container: ContainerId,
        crane: CraneId,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truck {
    pub id: TruckId,
    pub meter: ResourceMeter,
    pub task: TruckTask,
    pub idle_since: SimTime,
    /// Containers carried between quay and yard, credited when the quay side
    /// of the transfer completes.
    pub carried: u64,
}

impl Truck {
    pub fn cargo(&self) -> Option<ContainerId> {
        match self.task {
            TruckTask::Delivering { container, .. }
            | TruckTask::OverflowHold { container }
            | TruckTask::Bringing { container, .. }
            | TruckTask::AtCrane { container, .. } => Some(container),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "cycle", rename_all = "kebab-case")]
pub enum CraneCycle {
    Discharge {
        container: ContainerId,
    },
    Load {
        container: ContainerId,
        truck: TruckId,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuayCrane {
    pub id: CraneId,
    pub meter: ResourceMeter,
    pub ship: Option<ShipId>,
    /// Cycle in progress.
    pub cycle: Option<CraneCycle>,
    /// Discharged box in the spreader waiting for a truck.
    pub holding: Option<ContainerId>,
    /// Export fetches requested for this crane and not yet arrived.
    pub pending_fetches: u32,
    /// Trucks queued under the crane with export boxes.
    pub delivered: VecDeque<TruckId>,
}

impl QuayCrane {
    pub fn is_free(&self) -> bool {
        self.ship.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TruckRequestKind {
    /// Take a discharged box away from the crane.
    Pickup {
        crane: CraneId,
        container: ContainerId,
    },
    /// Collect an export box from `block` for the crane.
    Fetch {
        crane: CraneId,
        container: ContainerId,
        block: BlockId,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruckRequest {
    pub kind: TruckRequestKind,
    pub requested_at: SimTime,
    /// Raised for requests from ships above the long-ship threshold.
    pub priority: bool,
    pub seq: u64,
}
