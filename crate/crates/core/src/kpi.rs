//! Statistics over a finished run: crane, yard, block and truck tables,
//! crane waiting for trucks, berth occupancy, ship times and TEU totals.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::{ResourceMeter, ResourceState, SimDuration, SimTime, TICKS_PER_HOUR};
use crate::scenario::{berth_plan_entries, BerthPlanEntry, SCHEMA_VERSION};
use crate::terminal::{Category, Ship, SimulationOutcome, YardBlock};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KpiError {
    #[error("meter {0} was not flushed at the horizon")]
    Unflushed(String),
    #[error("horizon must be positive")]
    EmptyHorizon,
}

/// Busy share of the horizon, in percent.
pub fn utilization(meter: &ResourceMeter, horizon: SimTime) -> Result<f64, KpiError> {
    if meter.flushed_at().is_none() {
        return Err(KpiError::Unflushed(meter.id().to_string()));
    }
    busy_percent(meter.accumulated(ResourceState::Busy), horizon)
}

pub fn busy_percent(busy: SimDuration, horizon: SimTime) -> Result<f64, KpiError> {
    if horizon == SimTime::ZERO {
        return Err(KpiError::EmptyHorizon);
    }
    Ok((busy.ticks() as f64 / horizon.ticks() as f64 * 100.0).clamp(0.0, 100.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetRate {
    pub moves_per_hour: f64,
    /// Set when there was no busy time to divide by.
    pub zero_activity: bool,
}

/// Completed moves per busy hour. Waiting is not in the denominator.
pub fn net_moves_per_hour(meter: &ResourceMeter) -> NetRate {
    net_rate(meter.moves(), meter.accumulated(ResourceState::Busy))
}

pub fn net_rate(moves: u64, busy: SimDuration) -> NetRate {
    if busy.is_zero() {
        return NetRate {
            moves_per_hour: 0.0,
            zero_activity: true,
        };
    }
    NetRate {
        moves_per_hour: moves as f64 * TICKS_PER_HOUR as f64 / busy.ticks() as f64,
        zero_activity: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaitingStats {
    pub total_min: f64,
    pub mean_min: f64,
    pub episodes: u64,
}

/// Time a crane spent holding for a truck, total and per episode.
pub fn waiting_stats(meter: &ResourceMeter) -> WaitingStats {
    let total = meter.accumulated(ResourceState::Waiting);
    let episodes = meter.episodes(ResourceState::Waiting);
    let total_min = total.as_minutes();
    WaitingStats {
        total_min,
        mean_min: if episodes == 0 {
            0.0
        } else {
            total_min / episodes as f64
        },
        episodes,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerthOccupancy {
    /// Occupied quay metre-hours over quay length times horizon.
    pub length_weighted_pct: f64,
    /// Share of the horizon with at least one ship alongside.
    pub any_ship_pct: f64,
}

/// Ships still alongside at the horizon count up to the horizon.
pub fn berth_occupancy(
    entries: &[BerthPlanEntry],
    quay_length_m: f64,
    horizon: SimTime,
) -> BerthOccupancy {
    if horizon == SimTime::ZERO || quay_length_m <= 0.0 {
        return BerthOccupancy {
            length_weighted_pct: 0.0,
            any_ship_pct: 0.0,
        };
    }
    let clipped: Vec<(u64, u64, f64)> = entries
        .iter()
        .map(|e| {
            let from = e.berthed_at.min(horizon).ticks();
            let to = e.departed_at.unwrap_or(horizon).min(horizon).ticks();
            (from, to.max(from), e.length_m)
        })
        .collect();
    let metre_ticks: f64 = clipped
        .iter()
        .map(|&(a, b, len)| (b - a) as f64 * len)
        .sum();

    let mut spans: Vec<(u64, u64)> = clipped.iter().map(|&(a, b, _)| (a, b)).collect();
    spans.sort_unstable();
    let mut covered = 0u64;
    let mut current: Option<(u64, u64)> = None;
    for (a, b) in spans {
        match current {
            Some((s, e)) if a <= e => current = Some((s, e.max(b))),
            _ => {
                if let Some((s, e)) = current {
                    covered += e - s;
                }
                current = Some((a, b));
            }
        }
    }
    if let Some((s, e)) = current {
        covered += e - s;
    }

    let h = horizon.ticks() as f64;
    BerthOccupancy {
        length_weighted_pct: (metre_ticks / (quay_length_m * h) * 100.0).clamp(0.0, 100.0),
        any_ship_pct: (covered as f64 / h * 100.0).clamp(0.0, 100.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShipTimes {
    pub departed: usize,
    pub mean_service_h: f64,
    pub max_service_h: f64,
    pub mean_turnaround_h: f64,
    pub max_turnaround_h: f64,
}

/// Service (departure minus berthing) and turnaround (departure minus
/// arrival) over departed ships.
pub fn ship_times(ships: &[Ship]) -> ShipTimes {
    let mut out = ShipTimes {
        departed: 0,
        mean_service_h: 0.0,
        max_service_h: 0.0,
        mean_turnaround_h: 0.0,
        max_turnaround_h: 0.0,
    };
    for s in ships {
        let (Some(berthed), Some(departed)) = (s.berthed_at, s.departed_at) else {
            continue;
        };
        let service = departed.saturating_since(berthed).as_hours();
        let turnaround = departed.saturating_since(s.arrival).as_hours();
        out.departed += 1;
        out.mean_service_h += service;
        out.mean_turnaround_h += turnaround;
        out.max_service_h = out.max_service_h.max(service);
        out.max_turnaround_h = out.max_turnaround_h.max(turnaround);
    }
    if out.departed > 0 {
        out.mean_service_h /= out.departed as f64;
        out.mean_turnaround_h /= out.departed as f64;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TeuTotals {
    pub twenty_ft_moves: u64,
    pub forty_ft_moves: u64,
    /// TEU moved across the quay during the horizon.
    pub teu: u64,
    /// `teu` scaled to one week of 168 h.
    pub weekly_teu: f64,
    /// `52 * weekly_teu`.
    pub annual_teu: f64,
}

pub fn teu_totals(twenty_ft_moves: u64, forty_ft_moves: u64, horizon: SimTime) -> TeuTotals {
    let teu = twenty_ft_moves + 2 * forty_ft_moves;
    let weeks = horizon.as_hours() / 168.0;
    let weekly_teu = if teu == 0 || weeks <= 0.0 {
        0.0
    } else if horizon == SimTime::from_hours(168.0) {
        teu as f64
    } else {
        teu as f64 / weeks
    };
    TeuTotals {
        twenty_ft_moves,
        forty_ft_moves,
        teu,
        weekly_teu,
        annual_teu: 52.0 * weekly_teu,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryTransactions {
    pub category: Category,
    pub blocks: usize,
    pub total: u64,
    /// Total over every block of the category, busy or not.
    pub average: f64,
}

pub fn block_report(blocks: &[YardBlock]) -> Vec<CategoryTransactions> {
    Category::ALL
        .iter()
        .map(|&category| {
            let matching: Vec<&YardBlock> =
                blocks.iter().filter(|b| b.category == category).collect();
            let total: u64 = matching.iter().map(|b| b.transactions).sum();
            CategoryTransactions {
                category,
                blocks: matching.len(),
                total,
                average: if matching.is_empty() {
                    0.0
                } else {
                    total as f64 / matching.len() as f64
                },
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Full report

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuayCraneStats {
    pub crane: String,
    pub working_pct: f64,
    pub net_moves_per_hour: f64,
    pub zero_activity: bool,
    pub throughput: u64,
    pub waiting: WaitingStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YardCraneStats {
    pub name: String,
    pub blocks: Vec<String>,
    pub units: usize,
    /// Busy time over units times horizon.
    pub working_pct: f64,
    pub net_moves_per_hour: f64,
    pub zero_activity: bool,
    pub moves: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockStats {
    pub block: String,
    pub category: Category,
    pub capacity: u32,
    pub occupancy: u32,
    pub transactions: u64,
    pub stores: u64,
    pub retrieves: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruckStats {
    pub trucks: usize,
    pub total_throughput: u64,
    pub working_pct: f64,
    pub waiting_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruckQueueStats {
    pub requests: u64,
    pub served: u64,
    pub arrival_rate_per_hour: f64,
    pub mean_length: f64,
    /// Mean wait of served requests, immediate ones included as zero.
    pub mean_wait_min: f64,
    pub max_length: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShipCounts {
    pub arrived: usize,
    pub berthed: usize,
    pub departed: usize,
    pub queued_at_horizon: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpiReport {
    pub schema_version: u32,
    pub scenario: String,
    pub seed: u64,
    pub horizon_hours: f64,
    pub quay_cranes: Vec<QuayCraneStats>,
    pub quay_crane_total_throughput: u64,
    pub yard_cranes: Vec<YardCraneStats>,
    pub blocks: Vec<BlockStats>,
    pub block_categories: Vec<CategoryTransactions>,
    pub trucks: TruckStats,
    pub truck_queue: TruckQueueStats,
    pub berth_occupancy: BerthOccupancy,
    pub ships: ShipCounts,
    pub ship_times: ShipTimes,
    pub teu: TeuTotals,
    pub discharged: u64,
    pub loaded: u64,
    pub overflow_events: u64,
    pub load_shortfall: u64,
}

impl KpiReport {
    pub fn from_outcome(outcome: &SimulationOutcome) -> Result<Self, KpiError> {
        let state = &outcome.state;
        let horizon = outcome.horizon;
        if horizon == SimTime::ZERO {
            return Err(KpiError::EmptyHorizon);
        }

        let mut quay_cranes = Vec::with_capacity(state.cranes.len());
        for c in &state.cranes {
            let rate = net_moves_per_hour(&c.meter);
            quay_cranes.push(QuayCraneStats {
                crane: c.id.to_string(),
                working_pct: utilization(&c.meter, horizon)?,
                net_moves_per_hour: rate.moves_per_hour,
                zero_activity: rate.zero_activity,
                throughput: c.meter.moves(),
                waiting: waiting_stats(&c.meter),
            });
        }

        let mut yard_cranes = Vec::with_capacity(state.handlers.len());
        for h in &state.handlers {
            let mut busy = SimDuration::ZERO;
            let mut moves = 0;
            for u in &h.units {
                if u.meter.flushed_at().is_none() {
                    return Err(KpiError::Unflushed(u.meter.id().to_string()));
                }
                busy += u.meter.accumulated(ResourceState::Busy);
                moves += u.meter.moves();
            }
            let rate = net_rate(moves, busy);
            let units = h.units.len();
            let working_pct = if units == 0 {
                0.0
            } else {
                (busy.ticks() as f64 / (units as f64 * horizon.ticks() as f64) * 100.0)
                    .clamp(0.0, 100.0)
            };
            yard_cranes.push(YardCraneStats {
                name: h.name.clone(),
                blocks: h
                    .blocks
                    .iter()
                    .map(|b| state.blocks[b.0].name.clone())
                    .collect(),
                units,
                working_pct,
                net_moves_per_hour: rate.moves_per_hour,
                zero_activity: rate.zero_activity,
                moves,
            });
        }

        let mut truck_busy = SimDuration::ZERO;
        let mut truck_waiting = SimDuration::ZERO;
        for t in &state.trucks {
            if t.meter.flushed_at().is_none() {
                return Err(KpiError::Unflushed(t.meter.id().to_string()));
            }
            truck_busy += t.meter.accumulated(ResourceState::Busy);
            truck_waiting += t.meter.accumulated(ResourceState::Waiting);
        }
        let fleet = state.trucks.len() as f64 * horizon.ticks() as f64;
        let fleet_pct = |d: SimDuration| {
            if state.trucks.is_empty() {
                0.0
            } else {
                (d.ticks() as f64 / fleet * 100.0).clamp(0.0, 100.0)
            }
        };

        let q = &state.truck_queue_stats;
        let hours = horizon.as_hours();
        let truck_queue = TruckQueueStats {
            requests: q.arrivals,
            served: q.served,
            arrival_rate_per_hour: q.arrivals as f64 / hours,
            mean_length: q.area as f64 / horizon.ticks() as f64,
            mean_wait_min: if q.served == 0 {
                0.0
            } else {
                q.total_wait as f64 / q.served as f64 / crate::kernel::TICKS_PER_MINUTE as f64
            },
            max_length: q.max_len,
        };

        let teu = teu_totals(
            state.counters.twenty_ft_moves,
            state.counters.forty_ft_moves,
            horizon,
        );

        let entries = berth_plan_entries(state);
        let ships = ShipCounts {
            arrived: state.ships.iter().filter(|s| s.arrival <= horizon).count(),
            berthed: state
                .ships
                .iter()
                .filter(|s| s.berthed_at.is_some())
                .count(),
            departed: state
                .ships
                .iter()
                .filter(|s| s.departed_at.is_some())
                .count(),
            queued_at_horizon: state.berth_queue.len(),
        };

        Ok(KpiReport {
            schema_version: SCHEMA_VERSION,
            scenario: outcome.scenario.clone(),
            seed: outcome.seed,
            horizon_hours: hours,
            quay_crane_total_throughput: quay_cranes.iter().map(|c| c.throughput).sum(),
            quay_cranes,
            yard_cranes,
            blocks: state
                .blocks
                .iter()
                .map(|b| BlockStats {
                    block: b.name.clone(),
                    category: b.category,
                    capacity: b.capacity,
                    occupancy: b.occupancy,
                    transactions: b.transactions,
                    stores: b.stores,
                    retrieves: b.retrieves,
                })
                .collect(),
            block_categories: block_report(&state.blocks),
            trucks: TruckStats {
                trucks: state.trucks.len(),
                total_throughput: state.truck_moves(),
                working_pct: fleet_pct(truck_busy),
                waiting_pct: fleet_pct(truck_waiting),
            },
            truck_queue,
            berth_occupancy: berth_occupancy(&entries, state.quay.length_m, horizon),
            ships,
            ship_times: ship_times(&state.ships),
            teu,
            discharged: state.counters.discharged,
            loaded: state.counters.loaded,
            overflow_events: state.counters.overflow_events,
            load_shortfall: state.counters.load_shortfall,
        })
    }

    /// Flat, ordered `(name, value)` view used for replication summaries and
    /// paired comparisons.
    pub fn scalars(&self) -> Vec<(String, f64)> {
        let mut v: Vec<(String, f64)> = vec![
            ("weekly_teu".into(), self.teu.weekly_teu),
            ("annual_teu".into(), self.teu.annual_teu),
            (
                "quay_crane_total_throughput".into(),
                self.quay_crane_total_throughput as f64,
            ),
            (
                "truck_total_throughput".into(),
                self.trucks.total_throughput as f64,
            ),
            (
                "berth_occupancy_pct".into(),
                self.berth_occupancy.length_weighted_pct,
            ),
            (
                "berth_any_ship_pct".into(),
                self.berth_occupancy.any_ship_pct,
            ),
            ("ships_berthed".into(), self.ships.berthed as f64),
            ("ships_departed".into(), self.ships.departed as f64),
            ("mean_service_h".into(), self.ship_times.mean_service_h),
            (
                "mean_turnaround_h".into(),
                self.ship_times.mean_turnaround_h,
            ),
            ("truck_working_pct".into(), self.trucks.working_pct),
            (
                "truck_queue_mean_length".into(),
                self.truck_queue.mean_length,
            ),
            (
                "truck_queue_mean_wait_min".into(),
                self.truck_queue.mean_wait_min,
            ),
            ("overflow_events".into(), self.overflow_events as f64),
            ("load_shortfall".into(), self.load_shortfall as f64),
            (
                "crane_waiting_total_min".into(),
                self.quay_cranes.iter().map(|c| c.waiting.total_min).sum(),
            ),
        ];
        for c in &self.quay_cranes {
            let key = c.crane.to_lowercase().replace(' ', "_");
            v.push((format!("{key}_working_pct"), c.working_pct));
            v.push((format!("{key}_net_moves_per_hour"), c.net_moves_per_hour));
            v.push((format!("{key}_throughput"), c.throughput as f64));
            v.push((format!("{key}_waiting_total_min"), c.waiting.total_min));
            v.push((format!("{key}_waiting_mean_min"), c.waiting.mean_min));
        }
        for (i, y) in self.yard_cranes.iter().enumerate() {
            let key = match y.blocks.as_slice() {
                [one] => format!("yard_{}", one.to_lowercase()),
                _ => format!("yard_group_{}", i + 1),
            };
            v.push((format!("{key}_working_pct"), y.working_pct));
            v.push((format!("{key}_net_moves_per_hour"), y.net_moves_per_hour));
        }
        for c in &self.block_categories {
            v.push((format!("{}_block_avg_transactions", c.category), c.average));
        }
        v
    }
}
