//! The discharge/load process network driven by the event calendar.
//!
//! Discharge: quay crane lifts a box off the ship (busy), then holds it until
//! a truck takes it (waiting). The truck drives to the block chosen by the
//! storage rule, drops the box at the yard equipment and drives back empty.
//! The box is stacked by the block's yard crane.
//!
//! Load: once a ship has nothing left to discharge, each of its cranes keeps
//! up to `load_lookahead` export fetches in flight. A fetch sends a truck to
//! an export block, waits for the retrieve, and brings the box under the
//! crane, where it queues until the crane lifts it aboard.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::{
    EventCalendar, KernelError, ResourceMeter, ResourceState, RngStream, SimDuration, SimTime,
};
use crate::policies::{select_retrieval_block, CranePolicy, CraneRequest, IdleTruck, PolicySet};
use crate::scenario::ScenarioConfig;

use super::arrivals::{generate_arrivals, ArrivalStreams};
use super::entities::*;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("model logic error: {0}")]
    ModelLogic(String),
}

/// Event payloads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Action {
    ShipArrives(ShipId),
    QuayCycleDone(CraneId),
    TruckAtBlock(TruckId),
    TruckAtQuay(TruckId),
    YardCycleDone(HandlerId, usize),
}

/// Running totals over the whole run. Every field only ever grows.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowCounters {
    /// Discharged boxes handed from quay cranes to trucks.
    pub discharged: u64,
    /// Export boxes lifted aboard.
    pub loaded: u64,
    pub teu_moved: u64,
    pub twenty_ft_moves: u64,
    pub forty_ft_moves: u64,
    /// Discharged boxes stacked in a block.
    pub discharge_stored: u64,
    pub overflow_events: u64,
    pub load_shortfall: u64,
    pub truck_requests: u64,
}

impl FlowCounters {
    fn crossed_quay(&mut self, size: ContainerSize) {
        self.teu_moved += u64::from(size.teu());
        match size {
            ContainerSize::Twenty => self.twenty_ft_moves += 1,
            ContainerSize::Forty => self.forty_ft_moves += 1,
        }
    }
}

/// Time-integrated length of the truck request queue plus per-request waits.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueueStats {
    /// Integral of queue length over time, in tick-requests.
    pub area: u128,
    pub last_change: SimTime,
    pub arrivals: u64,
    pub served: u64,
    /// Sum of waits of served requests, in ticks.
    pub total_wait: u128,
    pub max_len: usize,
}

impl QueueStats {
    fn advance(&mut self, now: SimTime, len: usize) {
        let span = now.saturating_since(self.last_change).ticks();
        self.area += u128::from(span) * len as u128;
        self.last_change = now;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerminalState {
    pub clock: SimTime,
    pub quay: Quay,
    pub ships: Vec<Ship>,
    /// Arrived ships waiting for quay space, first come first served.
    pub berth_queue: VecDeque<ShipId>,
    pub containers: Vec<Container>,
    pub cranes: Vec<QuayCrane>,
    pub trucks: Vec<Truck>,
    pub handlers: Vec<YardHandler>,
    pub blocks: Vec<YardBlock>,
    pub truck_queue: VecDeque<TruckRequest>,
    /// Trucks stuck at the quay with a box no block has room for.
    pub overflow_hold: VecDeque<TruckId>,
    pub counters: FlowCounters,
    pub truck_queue_stats: QueueStats,
    pub policies: PolicySet,
    storage_turns: [u64; 5],
    next_request_seq: u64,
}

impl TerminalState {
    fn new(config: &ScenarioConfig) -> Self {
        let start = SimTime::ZERO;
        let mut blocks: Vec<YardBlock> = Vec::with_capacity(config.blocks.len());
        let mut handlers: Vec<YardHandler> = Vec::new();

        for (i, spec) in config.blocks.iter().enumerate() {
            blocks.push(YardBlock {
                id: BlockId(i),
                name: spec.id.clone(),
                category: spec.category,
                capacity: spec.capacity,
                distance: spec.distance,
                handler: HandlerId(usize::MAX),
                occupancy: 0,
                inbound: 0,
                outbound: 0,
                transactions: 0,
                stores: 0,
                retrieves: 0,
                available: Vec::new(),
            });
        }

        for rtg in &config.yard_cranes {
            let id = HandlerId(handlers.len());
            let block = blocks
                .iter_mut()
                .find(|b| b.name == rtg.block)
                .expect("validated yard crane block");
            block.handler = id;
            handlers.push(YardHandler {
                id,
                name: rtg.name.clone(),
                kind: HandlerKind::Rtg,
                blocks: vec![block.id],
                units: vec![YardUnit {
                    meter: ResourceMeter::new(rtg.name.clone(), start),
                    current: None,
                }],
                queue: VecDeque::new(),
            });
        }

        let pooled: Vec<BlockId> = blocks
            .iter()
            .filter(|b| b.handler.0 == usize::MAX)
            .map(|b| b.id)
            .collect();
        if !pooled.is_empty() {
            let id = HandlerId(handlers.len());
            let names: Vec<&str> = pooled.iter().map(|b| blocks[b.0].name.as_str()).collect();
            let name = format!(
                "Heavy Top Lift & Empty Handler Spreader ({})",
                names.join(", ")
            );
            for b in &pooled {
                blocks[b.0].handler = id;
            }
            let units = (0..config.equipment.top_lift_group())
                .map(|u| YardUnit {
                    meter: ResourceMeter::new(format!("top-lift-{}", u + 1), start),
                    current: None,
                })
                .collect();
            handlers.push(YardHandler {
                id,
                name,
                kind: HandlerKind::TopLiftGroup,
                blocks: pooled,
                units,
                queue: VecDeque::new(),
            });
        }

        let cranes = (0..config.equipment.quay_cranes as usize)
            .map(|i| QuayCrane {
                id: CraneId(i),
                meter: ResourceMeter::new(CraneId(i).to_string(), start),
                ship: None,
                cycle: None,
                holding: None,
                pending_fetches: 0,
                delivered: VecDeque::new(),
            })
            .collect();
        let trucks = (0..config.equipment.trucks as usize)
            .map(|i| Truck {
                id: TruckId(i),
                meter: ResourceMeter::new(format!("Truck {}", i + 1), start),
                task: TruckTask::Idle,
                idle_since: start,
                carried: 0,
            })
            .collect();

        TerminalState {
            clock: start,
            quay: Quay::new(
                config.terminal.quay_length_m,
                config.terminal.berth_clearance_m,
            ),
            ships: Vec::new(),
            berth_queue: VecDeque::new(),
            containers: Vec::new(),
            cranes,
            trucks,
            handlers,
            blocks,
            truck_queue: VecDeque::new(),
            overflow_hold: VecDeque::new(),
            counters: FlowCounters::default(),
            truck_queue_stats: QueueStats::default(),
            policies: config.policies.clone(),
            storage_turns: [0; 5],
            next_request_seq: 0,
        }
    }

    fn add_container(
        &mut self,
        size: ContainerSize,
        category: Category,
        location: Location,
    ) -> ContainerId {
        let id = ContainerId(self.containers.len());
        self.containers.push(Container {
            id,
            size,
            category,
            location,
        });
        id
    }

    /// Containers currently between the quay crane and the stack on the
    /// discharge side.
    pub fn discharge_in_transit(&self) -> u64 {
        self.containers
            .iter()
            .filter(|c| c.category.is_discharged())
            .filter(|c| match c.location {
                Location::OnTruck(_) => true,
                Location::AtYardCrane(b) => self.blocks[b.0].category == c.category,
                _ => false,
            })
            .count() as u64
    }

    pub fn quay_crane_moves(&self) -> u64 {
        self.cranes.iter().map(|c| c.meter.moves()).sum()
    }

    pub fn truck_moves(&self) -> u64 {
        self.trucks.iter().map(|t| t.carried).sum()
    }
}

/// Independent operational streams, one per stochastic input.
#[derive(Debug, Clone)]
struct OpStreams {
    crane_cycle: RngStream,
    truck_travel: RngStream,
    yard_cycle: RngStream,
    inventory: RngStream,
}

impl OpStreams {
    fn new(seed: u64) -> Self {
        Self {
            crane_cycle: RngStream::derive(seed, "crane_cycle"),
            truck_travel: RngStream::derive(seed, "truck_travel"),
            yard_cycle: RngStream::derive(seed, "yard_cycle"),
            inventory: RngStream::derive(seed, "inventory"),
        }
    }
}

/// Everything a finished run hands to reporting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationOutcome {
    pub scenario: String,
    pub seed: u64,
    pub horizon: SimTime,
    pub state: TerminalState,
}

pub struct Simulation {
    config: ScenarioConfig,
    seed: u64,
    horizon: SimTime,
    calendar: EventCalendar<Action>,
    streams: OpStreams,
    state: TerminalState,
    events: u64,
}

impl Simulation {
    /// Builds a run with arrivals drawn from the scenario's arrival process.
    pub fn new(config: &ScenarioConfig, seed: u64, horizon: SimTime) -> Self {
        let arrivals = generate_arrivals(config, horizon, &mut ArrivalStreams::new(seed));
        Self::with_arrivals(config, seed, horizon, arrivals)
    }

    /// Builds a run with a given list of ships.
    pub fn with_arrivals(
        config: &ScenarioConfig,
        seed: u64,
        horizon: SimTime,
        arrivals: Vec<ShipArrival>,
    ) -> Self {
        let mut state = TerminalState::new(config);
        let mut streams = OpStreams::new(seed);
        let mut calendar = EventCalendar::new();

        // opening yard inventory
        for b in 0..state.blocks.len() {
            let category = state.blocks[b].category;
            for _ in 0..config.blocks[b].initial_occupancy {
                let size = if streams.inventory.chance(config.arrivals.forty_foot_share) {
                    ContainerSize::Forty
                } else {
                    ContainerSize::Twenty
                };
                let id = state.add_container(size, category, Location::InBlock(BlockId(b)));
                let block = &mut state.blocks[b];
                block.occupancy += 1;
                block.available.push(id);
            }
        }

        for plan in arrivals {
            let ship_id = ShipId(state.ships.len());
            let discharge = plan
                .discharge
                .iter()
                .map(|&(size, category)| {
                    state.add_container(size, category, Location::OnShip(ship_id))
                })
                .collect();
            state.ships.push(Ship {
                id: ship_id,
                arrival: plan.arrival,
                length_m: plan.length_m,
                long: config.policies.is_long(plan.length_m),
                discharge,
                load_demand: plan.load_demand,
                berth_position_m: None,
                berthed_at: None,
                departed_at: None,
                cranes: Vec::new(),
                next_discharge: 0,
                discharged: 0,
                loads_requested: 0,
                loads_completed: 0,
                load_shortfall: 0,
                loaded: Vec::new(),
            });
            calendar
                .schedule(plan.arrival, Action::ShipArrives(ship_id))
                .expect("arrivals are never before time zero");
        }

        Self {
            config: config.clone(),
            seed,
            horizon,
            calendar,
            streams,
            state,
            events: 0,
        }
    }

    pub fn state(&self) -> &TerminalState {
        &self.state
    }

    pub fn clock(&self) -> SimTime {
        self.calendar.clock()
    }

    pub fn horizon(&self) -> SimTime {
        self.horizon
    }

    pub fn events_processed(&self) -> u64 {
        self.events
    }

    /// Processes the next event if it falls within the horizon. Returns the
    /// action handled, or `None` once the run has nothing left to do.
    pub fn step(&mut self) -> Result<Option<Action>, SimError> {
        match self.calendar.peek_time() {
            Some(t) if t <= self.horizon => {}
            _ => return Ok(None),
        }
        let event = self.calendar.next_event().expect("peeked");
        self.state.clock = event.time;
        self.events += 1;
        match event.payload {
            Action::ShipArrives(s) => self.on_ship_arrives(s)?,
            Action::QuayCycleDone(c) => self.on_quay_cycle_done(c)?,
            Action::TruckAtBlock(t) => self.on_truck_at_block(t)?,
            Action::TruckAtQuay(t) => self.on_truck_at_quay(t)?,
            Action::YardCycleDone(h, u) => self.on_yard_cycle_done(h, u)?,
        }
        self.settle()?;
        Ok(Some(event.payload))
    }

    /// Runs to the horizon and flushes every meter there.
    pub fn run(mut self) -> Result<SimulationOutcome, SimError> {
        while self.step()?.is_some() {}
        self.finish()
    }

    pub fn finish(mut self) -> Result<SimulationOutcome, SimError> {
        let horizon = self.horizon;
        self.calendar
            .advance_to(horizon.max(self.calendar.clock()))?;
        let state = &mut self.state;
        state.clock = horizon;
        let queue_len = state.truck_queue.len();
        state.truck_queue_stats.advance(horizon, queue_len);
        for c in &mut state.cranes {
            c.meter.flush(horizon)?;
        }
        for t in &mut state.trucks {
            t.meter.flush(horizon)?;
        }
        for h in &mut state.handlers {
            for u in &mut h.units {
                u.meter.flush(horizon)?;
            }
        }
        Ok(SimulationOutcome {
            scenario: self.config.name.clone(),
            seed: self.seed,
            horizon,
            state: self.state,
        })
    }

    fn now(&self) -> SimTime {
        self.calendar.clock()
    }

    fn sample_minutes(stream: &mut RngStream, dist: &crate::kernel::Distribution) -> SimDuration {
        SimDuration::from_minutes(stream.sample(dist))
    }

    // -- ships and berths ---------------------------------------------------

    fn on_ship_arrives(&mut self, ship: ShipId) -> Result<(), SimError> {
        self.state.berth_queue.push_back(ship);
        Ok(())
    }

    fn try_berth(&mut self, ship: ShipId) -> bool {
        let (length, long) = {
            let s = &self.state.ships[ship.0];
            (s.length_m, s.long)
        };
        let Some(position) = self
            .state
            .policies
            .berth
            .choose(&self.state.quay, length, long)
        else {
            return false;
        };
        let now = self.now();
        self.state.quay.berth(ship, position, length);
        let s = &mut self.state.ships[ship.0];
        s.berth_position_m = Some(position);
        s.berthed_at = Some(now);
        true
    }

    fn depart(&mut self, ship: ShipId) -> Result<(), SimError> {
        let now = self.now();
        let cranes = std::mem::take(&mut self.state.ships[ship.0].cranes);
        for c in cranes {
            self.release_crane(c)?;
        }
        self.state.quay.unberth(ship);
        let s = &mut self.state.ships[ship.0];
        s.departed_at = Some(now);
        for &id in &s.loaded {
            self.state.containers[id.0].location = Location::Departed;
        }
        Ok(())
    }

    /// Brings the state to a fixed point after an event: departs finished
    /// ships, berths waiting ones, and hands free cranes to ships with work.
    fn settle(&mut self) -> Result<(), SimError> {
        loop {
            let mut changed = false;

            let done: Vec<ShipId> = self
                .state
                .quay
                .berthed
                .iter()
                .map(|b| b.ship)
                .filter(|s| self.state.ships[s.0].work_complete())
                .collect();
            for s in done {
                self.depart(s)?;
                changed = true;
            }

            while let Some(&head) = self.state.berth_queue.front() {
                if !self.try_berth(head) {
                    break;
                }
                self.state.berth_queue.pop_front();
                changed = true;
            }

            let mut berthed: Vec<ShipId> = self.state.quay.berthed.iter().map(|b| b.ship).collect();
            berthed.sort();
            for s in berthed {
                if self.assign_cranes(s)? {
                    changed = true;
                }
            }

            if !changed {
                return Ok(());
            }
        }
    }

    // -- quay cranes --------------------------------------------------------

    /// Free cranes that can reach `ship` without crossing a crane working a
    /// neighbouring ship.
    fn feasible_cranes(&self, ship: ShipId) -> Vec<CraneId> {
        let pos = self.state.ships[ship.0]
            .berth_position_m
            .expect("only berthed ships get cranes");
        let mut lo: Option<usize> = None;
        let mut hi: Option<usize> = None;
        for other in &self.state.quay.berthed {
            if other.ship == ship {
                continue;
            }
            let cranes = &self.state.ships[other.ship.0].cranes;
            if other.position_m < pos {
                if let Some(max) = cranes.iter().map(|c| c.0).max() {
                    lo = Some(lo.map_or(max, |l| l.max(max)));
                }
            } else if let Some(min) = cranes.iter().map(|c| c.0).min() {
                hi = Some(hi.map_or(min, |h| h.min(min)));
            }
        }
        self.state
            .cranes
            .iter()
            .filter(|c| c.is_free())
            .map(|c| c.id)
            .filter(|c| lo.is_none_or(|l| c.0 > l) && hi.is_none_or(|h| c.0 < h))
            .collect()
    }

    fn assign_cranes(&mut self, ship: ShipId) -> Result<bool, SimError> {
        let s = &self.state.ships[ship.0];
        if s.remaining_moves() == 0 {
            return Ok(false);
        }
        let dedicated = self.dedicated_crane();
        let request = CraneRequest {
            position_m: s.berth_position_m.expect("berthed"),
            length_m: s.length_m,
            quay_length_m: self.state.quay.length_m,
            long: s.long,
            remaining_moves: s.remaining_moves(),
            assigned: s.cranes.len(),
            holds_dedicated: dedicated.is_some_and(|d| s.cranes.contains(&d)),
            dedicated_available: dedicated.is_some_and(|d| match self.state.cranes[d.0].ship {
                None => true,
                Some(on) => !self.state.ships[on.0].long,
            }),
            long_ship_waiting: self.long_ship_waiting(ship),
        };
        let feasible = self.feasible_cranes(ship);
        if feasible.is_empty() {
            return Ok(false);
        }
        let picked = self.state.policies.crane.assign(
            &self.state.policies,
            &request,
            &feasible,
            self.state.cranes.len(),
        );
        if picked.is_empty() {
            return Ok(false);
        }
        for &c in &picked {
            self.state.cranes[c.0].ship = Some(ship);
        }
        let s = &mut self.state.ships[ship.0];
        s.cranes.extend(&picked);
        s.cranes.sort();
        for c in picked {
            self.crane_next_work(c)?;
        }
        Ok(true)
    }

    fn dedicated_crane(&self) -> Option<CraneId> {
        if self.state.policies.crane != CranePolicy::LongShip {
            return None;
        }
        self.state.cranes.len().checked_sub(1).map(CraneId)
    }

    /// A long ship other than `except` could use the dedicated crane now.
    fn long_ship_waiting(&self, except: ShipId) -> bool {
        let Some(d) = self.dedicated_crane() else {
            return false;
        };
        let berthed = self.state.quay.berthed.iter().any(|b| {
            let s = &self.state.ships[b.ship.0];
            s.id != except && s.long && s.remaining_moves() > 0 && !s.cranes.contains(&d)
        });
        let queued = self
            .state
            .berth_queue
            .front()
            .is_some_and(|&s| s != except && self.state.ships[s.0].long);
        berthed || queued
    }

    /// The dedicated crane is on a short ship while a long ship wants it.
    fn should_yield(&self, crane: CraneId, ship: ShipId) -> bool {
        self.dedicated_crane() == Some(crane)
            && !self.state.ships[ship.0].long
            && self.long_ship_waiting(ship)
    }

    fn release_crane(&mut self, crane: CraneId) -> Result<(), SimError> {
        let now = self.now();
        let c = &mut self.state.cranes[crane.0];
        if let Some(ship) = c.ship.take() {
            self.state.ships[ship.0].cranes.retain(|&x| x != crane);
        }
        debug_assert!(c.cycle.is_none() && c.holding.is_none() && c.delivered.is_empty());
        c.meter.transition(ResourceState::Idle, now)?;
        Ok(())
    }

    /// Gives an assigned, empty-handed crane its next job.
    fn crane_next_work(&mut self, crane: CraneId) -> Result<(), SimError> {
        let now = self.now();
        let c = &self.state.cranes[crane.0];
        if c.cycle.is_some() || c.holding.is_some() {
            return Ok(());
        }
        let Some(ship) = c.ship else {
            return Ok(());
        };

        let yielding = self.should_yield(crane, ship);
        if yielding && c.pending_fetches == 0 && c.delivered.is_empty() {
            return self.release_crane(crane);
        }

        if !yielding && self.state.ships[ship.0].unstarted_discharge() > 0 {
            let s = &mut self.state.ships[ship.0];
            let container = s.discharge[s.next_discharge];
            s.next_discharge += 1;
            let long = s.long;
            self.state.containers[container.0].location = Location::AtQuayCrane(crane);
            let c = &mut self.state.cranes[crane.0];
            c.cycle = Some(CraneCycle::Discharge { container });
            c.meter.transition(ResourceState::Busy, now)?;
            let d = Self::sample_minutes(
                &mut self.streams.crane_cycle,
                self.config.durations.quay_cycle(long),
            );
            self.calendar.schedule_in(d, Action::QuayCycleDone(crane));
            return Ok(());
        }

        if !yielding {
            self.top_up_fetches(crane)?;
        }

        let c = &mut self.state.cranes[crane.0];
        if let Some(truck) = c.delivered.pop_front() {
            return self.start_load(crane, truck);
        }
        if c.pending_fetches > 0 {
            c.meter.transition(ResourceState::Waiting, now)?;
            return Ok(());
        }
        self.release_crane(crane)
    }

    fn top_up_fetches(&mut self, crane: CraneId) -> Result<(), SimError> {
        let ship = self.state.cranes[crane.0].ship.expect("assigned");
        let lookahead = self.state.policies.load_lookahead;
        loop {
            let c = &self.state.cranes[crane.0];
            let in_flight = c.pending_fetches + c.delivered.len() as u32;
            let s = &self.state.ships[ship.0];
            if in_flight >= lookahead || s.unrequested_loads() == 0 {
                return Ok(());
            }
            let Some(block) = select_retrieval_block(Category::Export, &self.state.blocks) else {
                let s = &mut self.state.ships[ship.0];
                let dropped = s.unrequested_loads();
                s.load_shortfall += dropped;
                s.load_demand -= dropped;
                self.state.counters.load_shortfall += u64::from(dropped);
                return Ok(());
            };
            let b = &mut self.state.blocks[block.0];
            let container = b.available.pop().expect("selected block has stock");
            b.outbound += 1;
            let s = &mut self.state.ships[ship.0];
            s.loads_requested += 1;
            let priority = s.long;
            self.state.cranes[crane.0].pending_fetches += 1;
            self.request_truck(
                TruckRequestKind::Fetch {
                    crane,
                    container,
                    block,
                },
                priority,
            )?;
        }
    }

    fn start_load(&mut self, crane: CraneId, truck: TruckId) -> Result<(), SimError> {
        let now = self.now();
        let TruckTask::AtCrane { container, .. } = self.state.trucks[truck.0].task else {
            return Err(SimError::ModelLogic(format!(
                "truck {} under {crane} without an export box",
                truck.0 + 1
            )));
        };
        let ship = self.state.cranes[crane.0].ship.expect("assigned");
        let long = self.state.ships[ship.0].long;
        self.state.containers[container.0].location = Location::AtQuayCrane(crane);
        let c = &mut self.state.cranes[crane.0];
        c.cycle = Some(CraneCycle::Load { container, truck });
        c.meter.transition(ResourceState::Busy, now)?;
        let d = Self::sample_minutes(
            &mut self.streams.crane_cycle,
            self.config.durations.quay_cycle(long),
        );
        self.calendar.schedule_in(d, Action::QuayCycleDone(crane));
        self.truck_freed(truck)
    }

    fn on_quay_cycle_done(&mut self, crane: CraneId) -> Result<(), SimError> {
        let now = self.now();
        let ship = self.state.cranes[crane.0]
            .ship
            .expect("cycling crane is assigned");
        match self.state.cranes[crane.0].cycle.take() {
            Some(CraneCycle::Discharge { container }) => {
                self.state.cranes[crane.0].holding = Some(container);
                let priority = self.state.ships[ship.0].long;
                let served =
                    self.request_truck(TruckRequestKind::Pickup { crane, container }, priority)?;
                if !served {
                    self.state.cranes[crane.0]
                        .meter
                        .transition(ResourceState::Waiting, now)?;
                }
                Ok(())
            }
            Some(CraneCycle::Load { container, truck }) => {
                self.state.containers[container.0].location = Location::OnShip(ship);
                let size = self.state.containers[container.0].size;
                let s = &mut self.state.ships[ship.0];
                s.loaded.push(container);
                s.loads_completed += 1;
                self.state.cranes[crane.0].meter.count_move();
                self.state.trucks[truck.0].carried += 1;
                self.state.counters.loaded += 1;
                self.state.counters.crossed_quay(size);
                self.crane_next_work(crane)
            }
            None => Err(SimError::ModelLogic(format!(
                "{crane} finished a cycle it never started"
            ))),
        }
    }

    // -- trucks -------------------------------------------------------------

    /// Serves the request at once if a truck is idle, otherwise queues it.
    /// Returns whether it was served.
    fn request_truck(&mut self, kind: TruckRequestKind, priority: bool) -> Result<bool, SimError> {
        let now = self.now();
        let request = TruckRequest {
            kind,
            requested_at: now,
            priority,
            seq: self.state.next_request_seq,
        };
        self.state.next_request_seq += 1;
        self.state.counters.truck_requests += 1;
        self.state.truck_queue_stats.arrivals += 1;

        let idle: Vec<IdleTruck> = self
            .state
            .trucks
            .iter()
            .filter(|t| t.task == TruckTask::Idle)
            .map(|t| IdleTruck {
                id: t.id,
                idle_since: t.idle_since,
            })
            .collect();
        match self.state.policies.truck.pick_truck(&idle) {
            Some(truck) => {
                self.dispatch(truck, request)?;
                Ok(true)
            }
            None => {
                let len = self.state.truck_queue.len();
                let stats = &mut self.state.truck_queue_stats;
                stats.advance(now, len);
                self.state.truck_queue.push_back(request);
                stats.max_len = stats.max_len.max(len + 1);
                Ok(false)
            }
        }
    }

    fn truck_freed(&mut self, truck: TruckId) -> Result<(), SimError> {
        let now = self.now();
        let t = &mut self.state.trucks[truck.0];
        t.task = TruckTask::Idle;
        t.idle_since = now;
        t.meter.transition(ResourceState::Idle, now)?;
        if let Some(i) = self
            .state
            .policies
            .truck
            .next_request(&self.state.truck_queue)
        {
            let len = self.state.truck_queue.len();
            self.state.truck_queue_stats.advance(now, len);
            let request = self.state.truck_queue.remove(i).expect("index from policy");
            self.dispatch(truck, request)?;
        }
        Ok(())
    }

    fn travel(&mut self, block: BlockId) -> SimDuration {
        let class = self.state.blocks[block.0].distance;
        Self::sample_minutes(
            &mut self.streams.truck_travel,
            self.config.durations.truck_travel_min.for_class(class),
        )
    }

    fn dispatch(&mut self, truck: TruckId, request: TruckRequest) -> Result<(), SimError> {
        let now = self.now();
        let stats = &mut self.state.truck_queue_stats;
        stats.served += 1;
        stats.total_wait += u128::from(now.saturating_since(request.requested_at).ticks());

        match request.kind {
            TruckRequestKind::Pickup { crane, container } => {
                // hand-off: the crane's move completes as the box lands on the truck
                let c = &mut self.state.cranes[crane.0];
                c.holding = None;
                c.meter.count_move();
                let ship = c.ship.expect("holding crane is assigned");
                self.state.ships[ship.0].discharged += 1;
                let t = &mut self.state.trucks[truck.0];
                t.carried += 1;
                self.state.counters.discharged += 1;
                let box_ = &mut self.state.containers[container.0];
                box_.location = Location::OnTruck(truck);
                let category = box_.category;
                let size = box_.size;
                self.state.counters.crossed_quay(size);

                self.route_to_block(truck, container, category)?;
                self.crane_next_work(crane)
            }
            TruckRequestKind::Fetch {
                crane,
                container,
                block,
            } => {
                let t = &mut self.state.trucks[truck.0];
                t.task = TruckTask::Fetching {
                    container,
                    block,
                    crane,
                };
                t.meter.transition(ResourceState::Busy, now)?;
                let d = self.travel(block);
                self.calendar.schedule_in(d, Action::TruckAtBlock(truck));
                Ok(())
            }
        }
    }

    /// Picks a block for a loaded truck and sends it there, or parks it in
    /// overflow.
    fn route_to_block(
        &mut self,
        truck: TruckId,
        container: ContainerId,
        category: Category,
    ) -> Result<bool, SimError> {
        let now = self.now();
        let turn_slot = Category::ALL
            .iter()
            .position(|&c| c == category)
            .expect("known");
        let turn = self.state.storage_turns[turn_slot];
        let chosen = self
            .state
            .policies
            .storage
            .select_block(category, &self.state.blocks, turn);
        let t = &mut self.state.trucks[truck.0];
        match chosen {
            Some(block) => {
                self.state.storage_turns[turn_slot] += 1;
                self.state.blocks[block.0].inbound += 1;
                t.task = TruckTask::Delivering { container, block };
                t.meter.transition(ResourceState::Busy, now)?;
                let d = self.travel(block);
                self.calendar.schedule_in(d, Action::TruckAtBlock(truck));
                Ok(true)
            }
            None => {
                if t.task != (TruckTask::OverflowHold { container }) {
                    self.state.counters.overflow_events += 1;
                    t.task = TruckTask::OverflowHold { container };
                    t.meter.transition(ResourceState::Waiting, now)?;
                    self.state.overflow_hold.push_back(truck);
                }
                Ok(false)
            }
        }
    }

    fn retry_overflow(&mut self) -> Result<(), SimError> {
        let held: Vec<TruckId> = self.state.overflow_hold.iter().copied().collect();
        for truck in held {
            let TruckTask::OverflowHold { container } = self.state.trucks[truck.0].task else {
                continue;
            };
            let category = self.state.containers[container.0].category;
            if self.route_to_block(truck, container, category)? {
                self.state.overflow_hold.retain(|&t| t != truck);
            }
        }
        Ok(())
    }

    fn on_truck_at_block(&mut self, truck: TruckId) -> Result<(), SimError> {
        let now = self.now();
        match self.state.trucks[truck.0].task {
            TruckTask::Delivering { container, block } => {
                self.state.containers[container.0].location = Location::AtYardCrane(block);
                let handler = self.state.blocks[block.0].handler;
                self.state.handlers[handler.0]
                    .queue
                    .push_back(YardJob::Store { container, block });
                let t = &mut self.state.trucks[truck.0];
                t.task = TruckTask::Returning;
                let d = self.travel(block);
                self.calendar.schedule_in(d, Action::TruckAtQuay(truck));
                self.start_yard_work(handler)
            }
            TruckTask::Fetching {
                container,
                block,
                crane,
            } => {
                let t = &mut self.state.trucks[truck.0];
                t.task = TruckTask::AwaitingRetrieve {
                    container,
                    block,
                    crane,
                };
                t.meter.transition(ResourceState::Waiting, now)?;
                let handler = self.state.blocks[block.0].handler;
                self.state.handlers[handler.0]
                    .queue
                    .push_back(YardJob::Retrieve {
                        container,
                        block,
                        truck,
                    });
                self.start_yard_work(handler)
            }
            other => Err(SimError::ModelLogic(format!(
                "truck {} reached a block while {other:?}",
                truck.0 + 1
            ))),
        }
    }

    fn on_truck_at_quay(&mut self, truck: TruckId) -> Result<(), SimError> {
        let now = self.now();
        match self.state.trucks[truck.0].task {
            TruckTask::Returning => self.truck_freed(truck),
            TruckTask::Bringing { container, crane } => {
                let t = &mut self.state.trucks[truck.0];
                t.task = TruckTask::AtCrane { container, crane };
                t.meter.transition(ResourceState::Waiting, now)?;
                let c = &mut self.state.cranes[crane.0];
                c.pending_fetches -= 1;
                c.delivered.push_back(truck);
                self.crane_next_work(crane)
            }
            other => Err(SimError::ModelLogic(format!(
                "truck {} reached the quay while {other:?}",
                truck.0 + 1
            ))),
        }
    }

    // -- yard ---------------------------------------------------------------

    fn start_yard_work(&mut self, handler: HandlerId) -> Result<(), SimError> {
        let now = self.now();
        loop {
            let h = &mut self.state.handlers[handler.0];
            if h.queue.is_empty() {
                return Ok(());
            }
            let Some(unit) = h.units.iter().position(|u| u.current.is_none()) else {
                return Ok(());
            };
            let job = h.queue.pop_front().expect("non-empty");
            h.units[unit].current = Some(job);
            h.units[unit].meter.transition(ResourceState::Busy, now)?;
            if let YardJob::Retrieve {
                container, block, ..
            } = job
            {
                self.state.containers[container.0].location = Location::AtYardCrane(block);
            }
            let d = Self::sample_minutes(
                &mut self.streams.yard_cycle,
                &self.config.durations.yard_cycle_min,
            );
            self.calendar
                .schedule_in(d, Action::YardCycleDone(handler, unit));
        }
    }

    fn on_yard_cycle_done(&mut self, handler: HandlerId, unit: usize) -> Result<(), SimError> {
        let now = self.now();
        let job = self.state.handlers[handler.0].units[unit]
            .current
            .take()
            .ok_or_else(|| SimError::ModelLogic("yard unit finished an unknown job".into()))?;
        self.state.handlers[handler.0].units[unit]
            .meter
            .transition_counting_move(ResourceState::Idle, now)?;

        match job {
            YardJob::Store { container, block } => {
                self.state.blocks[block.0].store(container)?;
                self.state.containers[container.0].location = Location::InBlock(block);
                if self.state.containers[container.0].category.is_discharged() {
                    self.state.counters.discharge_stored += 1;
                }
            }
            YardJob::Retrieve {
                container,
                block,
                truck,
            } => {
                self.state.blocks[block.0].retrieve()?;
                let TruckTask::AwaitingRetrieve { crane, .. } = self.state.trucks[truck.0].task
                else {
                    return Err(SimError::ModelLogic(
                        "retrieve without a waiting truck".into(),
                    ));
                };
                self.state.containers[container.0].location = Location::OnTruck(truck);
                let t = &mut self.state.trucks[truck.0];
                t.task = TruckTask::Bringing { container, crane };
                t.meter.transition(ResourceState::Busy, now)?;
                let d = self.travel(block);
                self.calendar.schedule_in(d, Action::TruckAtQuay(truck));
                self.retry_overflow()?;
            }
        }
        self.start_yard_work(handler)
    }
}

impl YardBlock {
    /// Stacks an inbound box.
    pub fn store(&mut self, container: ContainerId) -> Result<(), SimError> {
        if self.occupancy >= self.capacity {
            return Err(SimError::ModelLogic(format!("block {} is full", self.name)));
        }
        self.occupancy += 1;
        self.inbound = self.inbound.saturating_sub(1);
        self.transactions += 1;
        self.stores += 1;
        self.available.push(container);
        Ok(())
    }

    /// Lifts out a box previously promised to a retrieval.
    pub fn retrieve(&mut self) -> Result<(), SimError> {
        if self.occupancy == 0 || self.outbound == 0 {
            return Err(SimError::ModelLogic(format!(
                "retrieve from block {} with nothing promised",
                self.name
            )));
        }
        self.occupancy -= 1;
        self.outbound -= 1;
        self.transactions += 1;
        self.retrieves += 1;
        Ok(())
    }
}

/// Builds and runs one replication.
pub fn run_simulation(
    config: &ScenarioConfig,
    seed: u64,
    horizon: SimTime,
) -> Result<SimulationOutcome, SimError> {
    Simulation::new(config, seed, horizon).run()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn empty_block() -> YardBlock {
        YardBlock {
            id: BlockId(0),
            name: "C1".into(),
            category: Category::Import,
            capacity: 10,
            distance: DistanceClass::Near,
            handler: HandlerId(0),
            occupancy: 0,
            inbound: 1,
            outbound: 0,
            transactions: 0,
            stores: 0,
            retrieves: 0,
            available: Vec::new(),
        }
    }

    #[test]
    fn store_into_empty_block() {
        let mut b = empty_block();
        b.store(ContainerId(0)).unwrap();
        assert_eq!((b.occupancy, b.transactions), (1, 1));
    }

    #[test]
    fn store_then_retrieve() {
        let mut b = empty_block();
        b.store(ContainerId(0)).unwrap();
        b.available.pop();
        b.outbound += 1;
        b.retrieve().unwrap();
        assert_eq!((b.occupancy, b.transactions), (0, 2));
    }

    #[test]
    fn retrieve_from_empty_block_is_a_logic_error() {
        let mut b = empty_block();
        assert!(matches!(b.retrieve(), Err(SimError::ModelLogic(_))));
    }
}
