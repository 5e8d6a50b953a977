//! Invariants over small random terminals. Capacities and opening stock are
//! kept tight so overflow, load shortfall and queueing all show up.

use proptest::prelude::*;

use portsim::kernel::{Distribution, ResourceMeter, SimTime};
use portsim::kpi::KpiReport;
use portsim::policies::{BerthPolicy, CranePolicy, PolicySet, StoragePolicy, TruckPolicy};
use portsim::scenario::ScenarioConfig;
use portsim::terminal::{check_invariants, Category, CounterSnapshot, Simulation};

#[derive(Debug, Clone)]
struct Knobs {
    quay_length_m: f64,
    clearance_m: f64,
    quay_cranes: u32,
    trucks: u32,
    ships_per_day: f64,
    horizon_hours: f64,
    policies: PolicySet,
    capacity: u32,
    export_stock_pct: u32,
    moves_per_meter: f64,
    forty_share: f64,
}

fn policies() -> impl Strategy<Value = PolicySet> {
    (
        prop_oneof![
            Just(BerthPolicy::FirstFit),
            Just(BerthPolicy::LongShipsRight)
        ],
        prop_oneof![
            Just(CranePolicy::Proportional),
            Just(CranePolicy::Max),
            Just(CranePolicy::LongShip)
        ],
        prop_oneof![
            Just(TruckPolicy::LongestIdle),
            Just(TruckPolicy::LowestId),
            Just(TruckPolicy::LongShipPriority)
        ],
        prop_oneof![
            Just(StoragePolicy::LeastOccupancy),
            Just(StoragePolicy::RoundRobin)
        ],
        1u32..=4,
        1u32..=300,
        1u32..=4,
        60.0f64..180.0,
    )
        .prop_map(
            |(berth, crane, truck, storage, cap, per_crane, lookahead, threshold)| PolicySet {
                berth,
                crane,
                max_cranes_per_ship: cap,
                moves_per_crane: per_crane,
                truck,
                storage,
                long_ship_threshold_m: Some(threshold),
                load_lookahead: lookahead,
            },
        )
}

fn knobs() -> impl Strategy<Value = Knobs> {
    (
        (200.0f64..530.0, 0.0f64..20.0, 0u32..=6, 0u32..=30),
        (0.0f64..8.0, 12.0f64..72.0),
        policies(),
        (5u32..200, 0u32..=100, 0.2f64..1.5, 0.0f64..=1.0),
    )
        .prop_map(
            |(
                (quay_length_m, clearance_m, quay_cranes, trucks),
                (ships_per_day, horizon_hours),
                policies,
                (capacity, export_stock_pct, moves_per_meter, forty_share),
            )| Knobs {
                quay_length_m,
                clearance_m,
                quay_cranes,
                trucks,
                ships_per_day,
                horizon_hours,
                policies,
                capacity,
                export_stock_pct,
                moves_per_meter,
                forty_share,
            },
        )
}

fn build(k: &Knobs) -> ScenarioConfig {
    let mut c = ScenarioConfig::act();
    c.name = "fuzz".into();
    c.horizon_hours = k.horizon_hours;
    c.terminal.quay_length_m = k.quay_length_m;
    c.terminal.berth_clearance_m = k.clearance_m;
    c.equipment.quay_cranes = k.quay_cranes;
    c.equipment.trucks = k.trucks;
    c.arrivals.ships_per_day = k.ships_per_day;
    c.arrivals.ship_length_m = Distribution::triangular(40.0, 100.0, 200.0);
    c.arrivals.moves_per_meter = Distribution::constant(k.moves_per_meter);
    c.arrivals.forty_foot_share = k.forty_share;
    for b in &mut c.blocks {
        b.capacity = k.capacity;
        b.initial_occupancy = if b.category == Category::Export {
            k.capacity * k.export_stock_pct / 100
        } else {
            0
        };
    }
    c.policies = k.policies.clone();
    c.validated().expect("generated scenario is valid")
}

fn meter_covers(meter: &ResourceMeter, horizon: SimTime) -> bool {
    meter.flushed_at() == Some(horizon) && meter.total_accumulated() == horizon - meter.created_at()
}

fn in_percent(x: f64) -> bool {
    (0.0..=100.0).contains(&x)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn invariants_hold_after_every_event(k in knobs(), seed in any::<u64>()) {
        let config = build(&k);
        let mut sim = Simulation::new(&config, seed, config.horizon());
        let mut before = CounterSnapshot::take(sim.state());
        while sim.step().unwrap().is_some() {
            let violations = check_invariants(sim.state());
            prop_assert!(violations.is_empty(), "{:?}", violations);
            let now = CounterSnapshot::take(sim.state());
            prop_assert!(now.dominates(&before), "counter went down");
            before = now;
        }
        let outcome = sim.finish().unwrap();
        let state = &outcome.state;
        prop_assert!(check_invariants(state).is_empty());
        prop_assert_eq!(state.quay_crane_moves(), state.truck_moves());

        let horizon = outcome.horizon;
        for c in &state.cranes {
            prop_assert!(meter_covers(&c.meter, horizon), "crane {:?}", c.id);
        }
        for t in &state.trucks {
            prop_assert!(meter_covers(&t.meter, horizon), "truck {:?}", t.id);
        }
        for h in &state.handlers {
            for u in &h.units {
                prop_assert!(meter_covers(&u.meter, horizon));
            }
        }

        let r = KpiReport::from_outcome(&outcome).unwrap();
        for c in &r.quay_cranes {
            prop_assert!(in_percent(c.working_pct), "{}", c.working_pct);
            prop_assert!(c.net_moves_per_hour >= 0.0);
        }
        for y in &r.yard_cranes {
            prop_assert!(in_percent(y.working_pct), "{}", y.working_pct);
        }
        prop_assert!(in_percent(r.trucks.working_pct));
        prop_assert!(in_percent(r.trucks.waiting_pct));
        prop_assert!(in_percent(r.berth_occupancy.length_weighted_pct));
        prop_assert!(in_percent(r.berth_occupancy.any_ship_pct));
        prop_assert!(r.berth_occupancy.length_weighted_pct <= r.berth_occupancy.any_ship_pct + 1e-9);
        prop_assert_eq!(r.teu.annual_teu, 52.0 * r.teu.weekly_teu);
    }

    #[test]
    fn same_inputs_same_outcome(k in knobs(), seed in any::<u64>()) {
        let config = build(&k);
        let a = Simulation::new(&config, seed, config.horizon()).run().unwrap();
        let b = Simulation::new(&config, seed, config.horizon()).run().unwrap();
        prop_assert_eq!(
            KpiReport::from_outcome(&a).unwrap(),
            KpiReport::from_outcome(&b).unwrap()
        );
    }
}
