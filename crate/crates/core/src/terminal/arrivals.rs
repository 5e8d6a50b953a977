use crate::kernel::{Distribution, RngStream, SimTime};
use crate::scenario::ScenarioConfig;

use super::entities::{Category, ContainerSize, ShipArrival};

/// Streams consumed by the arrival process. Kept apart from the operational
/// streams so that policy changes never perturb the generated ships.
#[derive(Debug, Clone)]
pub struct ArrivalStreams {
    pub arrivals: RngStream,
    pub ship_size: RngStream,
    pub cargo: RngStream,
}

impl ArrivalStreams {
    pub fn new(seed: u64) -> Self {
        Self {
            arrivals: RngStream::derive(seed, "arrivals"),
            ship_size: RngStream::derive(seed, "ship_size"),
            cargo: RngStream::derive(seed, "cargo_mix"),
        }
    }
}

/// Poisson ship arrivals up to and including `horizon`.
///
/// Each ship draws a length, then `round(length * moves_per_meter)` moves;
/// each move draws a category from the mix (export moves become load
/// demand) and a size. Both draws are made for every move so the stream
/// stride does not depend on the outcome.
pub fn generate_arrivals(
    config: &ScenarioConfig,
    horizon: SimTime,
    streams: &mut ArrivalStreams,
) -> Vec<ShipArrival> {
    let arrivals = &config.arrivals;
    if arrivals.ships_per_day <= 0.0 || horizon == SimTime::ZERO {
        return Vec::new();
    }
    let gap = Distribution::exponential(24.0 * 60.0 / arrivals.ships_per_day);
    let mix = Distribution::Empirical {
        values: (0..Category::ALL.len()).map(|i| i as f64).collect(),
        weights: Category::ALL
            .iter()
            .map(|&c| config.category_mix.weight(c))
            .collect(),
    };

    let mut ships = Vec::new();
    let mut clock_min = 0.0;
    loop {
        clock_min += streams.arrivals.sample(&gap);
        let arrival = SimTime::from_minutes(clock_min);
        if arrival > horizon {
            break;
        }
        let length_m = streams
            .ship_size
            .sample(&arrivals.ship_length_m)
            .round()
            .clamp(1.0, config.terminal.quay_length_m.floor().max(1.0));
        let per_meter = streams.ship_size.sample(&arrivals.moves_per_meter);
        let moves = (length_m * per_meter).round().max(0.0) as u64;

        let mut discharge = Vec::new();
        let mut load_demand = 0u32;
        for _ in 0..moves {
            let category = Category::ALL[streams.cargo.sample(&mix) as usize];
            let size = if streams.cargo.chance(arrivals.forty_foot_share) {
                ContainerSize::Forty
            } else {
                ContainerSize::Twenty
            };
            if category.is_discharged() {
                discharge.push((size, category));
            } else {
                load_demand += 1;
            }
        }
        ships.push(ShipArrival {
            arrival,
            length_m,
            discharge,
            load_demand,
        });
    }
    ships
}
