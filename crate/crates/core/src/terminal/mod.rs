//! Ships, quay cranes, trucks, yard equipment and blocks, wired together
//! as a discrete-event process network.

mod arrivals;
mod entities;
pub mod invariants;
mod sim;

pub use arrivals::{generate_arrivals, ArrivalStreams};
pub use entities::*;
pub use invariants::{check_invariants, CounterSnapshot, Violation};
pub use sim::{
    run_simulation, Action, FlowCounters, QueueStats, SimError, Simulation, SimulationOutcome,
    TerminalState,
};
