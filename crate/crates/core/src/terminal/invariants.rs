//! State checks usable after any event.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::kernel::{ResourceMeter, SimTime};

use super::entities::*;
use super::sim::TerminalState;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule: &'static str,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.rule, self.detail)
    }
}

/// Every counter that must never go down.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterSnapshot {
    pub crane_moves: Vec<u64>,
    pub truck_carried: Vec<u64>,
    pub yard_moves: Vec<u64>,
    pub block_transactions: Vec<u64>,
    pub discharged: u64,
    pub loaded: u64,
    pub teu_moved: u64,
    pub overflow_events: u64,
    pub truck_requests: u64,
}

impl CounterSnapshot {
    pub fn take(state: &TerminalState) -> Self {
        Self {
            crane_moves: state.cranes.iter().map(|c| c.meter.moves()).collect(),
            truck_carried: state.trucks.iter().map(|t| t.carried).collect(),
            yard_moves: state
                .handlers
                .iter()
                .flat_map(|h| h.units.iter().map(|u| u.meter.moves()))
                .collect(),
            block_transactions: state.blocks.iter().map(|b| b.transactions).collect(),
            discharged: state.counters.discharged,
            loaded: state.counters.loaded,
            teu_moved: state.counters.teu_moved,
            overflow_events: state.counters.overflow_events,
            truck_requests: state.counters.truck_requests,
        }
    }

    /// True when no counter in `self` is below its value in `earlier`.
    pub fn dominates(&self, earlier: &CounterSnapshot) -> bool {
        fn ge(a: &[u64], b: &[u64]) -> bool {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x >= y)
        }
        ge(&self.crane_moves, &earlier.crane_moves)
            && ge(&self.truck_carried, &earlier.truck_carried)
            && ge(&self.yard_moves, &earlier.yard_moves)
            && ge(&self.block_transactions, &earlier.block_transactions)
            && self.discharged >= earlier.discharged
            && self.loaded >= earlier.loaded
            && self.teu_moved >= earlier.teu_moved
            && self.overflow_events >= earlier.overflow_events
            && self.truck_requests >= earlier.truck_requests
    }
}

fn meter_ok(meter: &ResourceMeter, now: SimTime) -> Option<String> {
    let elapsed = now.saturating_since(meter.created_at());
    let open = now.saturating_since(meter.entered_at());
    let total = meter.total_accumulated() + open;
    if total != elapsed {
        return Some(format!(
            "{}: state times {} != elapsed {}",
            meter.id(),
            total,
            elapsed
        ));
    }
    None
}

/// Checks quay non-overlap, crane non-crossing, container location
/// agreement, meter conservation, flow conservation and ship time order.
pub fn check_invariants(state: &TerminalState) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |rule: &'static str, detail: String| out.push(Violation { rule, detail });
    let now = state.clock;

    // quay
    if !state.quay.is_consistent() {
        push("quay-non-overlap", format!("{:?}", state.quay.berthed));
    }
    for w in state.quay.berthed.windows(2) {
        if w[0].end_m() + state.quay.clearance_m > w[1].position_m + 1e-9 {
            push(
                "quay-clearance",
                format!("ships {} and {}", w[0].ship.0, w[1].ship.0),
            );
        }
    }

    // cranes in rail order follow ships in quay order
    let mut last_max: Option<usize> = None;
    for b in &state.quay.berthed {
        let cranes = &state.ships[b.ship.0].cranes;
        if let (Some(min), Some(max)) = (cranes.iter().min(), cranes.iter().max()) {
            if last_max.is_some_and(|m| min.0 <= m) {
                push(
                    "non-crossing",
                    format!("ship {} cranes {:?}", b.ship.0, cranes),
                );
            }
            last_max = Some(max.0);
        }
        for c in cranes {
            if state.cranes[c.0].ship != Some(b.ship) {
                push(
                    "crane-assignment",
                    format!("{c} listed on ship {}", b.ship.0),
                );
            }
        }
    }

    // locations: each container's location must be backed by its holder
    let mut in_block: HashMap<BlockId, u32> = HashMap::new();
    for c in &state.containers {
        let backed = match c.location {
            Location::OnShip(s) => {
                let ship = &state.ships[s.0];
                ship.discharge[ship.next_discharge..].contains(&c.id)
                    || (ship.departed_at.is_none() && ship.loaded.contains(&c.id))
            }
            Location::AtQuayCrane(k) => {
                let crane = &state.cranes[k.0];
                crane.holding == Some(c.id)
                    || matches!(crane.cycle,
                        Some(CraneCycle::Discharge { container }) | Some(CraneCycle::Load { container, .. })
                        if container == c.id)
            }
            Location::OnTruck(t) => state.trucks[t.0].cargo() == Some(c.id),
            Location::AtYardCrane(b) => {
                let h = &state.handlers[state.blocks[b.0].handler.0];
                let held = |job: &YardJob| match *job {
                    YardJob::Store { container, block } => container == c.id && block == b,
                    YardJob::Retrieve {
                        container, block, ..
                    } => container == c.id && block == b,
                };
                h.queue.iter().any(held)
                    || h.units.iter().filter_map(|u| u.current.as_ref()).any(held)
            }
            Location::InBlock(b) => {
                *in_block.entry(b).or_default() += 1;
                true
            }
            Location::Departed => state
                .ships
                .iter()
                .any(|s| s.departed_at.is_some() && s.loaded.contains(&c.id)),
        };
        if !backed {
            push(
                "location-unique",
                format!("container {} at {:?}", c.id.0, c.location),
            );
        }
    }
    for b in &state.blocks {
        // retrieves in progress are still counted in occupancy
        let lifting = state.handlers[b.handler.0]
            .units
            .iter()
            .filter(|u| matches!(u.current, Some(YardJob::Retrieve { block, .. }) if block == b.id))
            .count() as u32;
        let stacked = in_block.get(&b.id).copied().unwrap_or(0);
        if stacked + lifting != b.occupancy {
            push(
                "block-occupancy",
                format!(
                    "{}: {} stacked + {} lifting != {}",
                    b.name, stacked, lifting, b.occupancy
                ),
            );
        }
        if b.occupancy > b.capacity {
            push("block-capacity", b.name.clone());
        }
    }
    for t in &state.trucks {
        if let Some(c) = t.cargo() {
            if state.containers[c.0].location != Location::OnTruck(t.id) {
                push(
                    "location-unique",
                    format!("truck {} cargo {}", t.id.0 + 1, c.0),
                );
            }
        }
    }

    // meters
    let meters = state
        .cranes
        .iter()
        .map(|c| &c.meter)
        .chain(state.trucks.iter().map(|t| &t.meter))
        .chain(
            state
                .handlers
                .iter()
                .flat_map(|h| h.units.iter().map(|u| &u.meter)),
        );
    for m in meters {
        if let Some(d) = meter_ok(m, now) {
            push("meter-conservation", d);
        }
    }

    // flow
    if state.quay_crane_moves() != state.truck_moves() {
        push(
            "flow-conservation",
            format!(
                "crane moves {} != truck moves {}",
                state.quay_crane_moves(),
                state.truck_moves()
            ),
        );
    }
    let in_transit = state.discharge_in_transit();
    if state.counters.discharged != state.counters.discharge_stored + in_transit {
        push(
            "discharge-conservation",
            format!(
                "discharged {} != stored {} + in transit {}",
                state.counters.discharged, state.counters.discharge_stored, in_transit
            ),
        );
    }

    for s in &state.ships {
        let ordered = match (s.berthed_at, s.departed_at) {
            (Some(b), Some(d)) => s.arrival <= b && b <= d,
            (Some(b), None) => s.arrival <= b,
            (None, None) => true,
            (None, Some(_)) => false,
        };
        if !ordered {
            push("ship-time-order", format!("ship {}", s.id.0));
        }
    }

    out
}
