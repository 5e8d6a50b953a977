//! Deterministic discrete-event simulator of a seaport container terminal.
//!
//! [`kernel`] is a generic event engine. [`terminal`] models ships, quay
//! cranes, trucks, yard equipment and blocks on top of it; [`policies`]
//! holds the swappable decision rules; [`kpi`] turns a finished run into
//! statistics; [`scenario`] reads scenario files and writes reports.

pub mod kernel;
pub mod kpi;
pub mod policies;
pub mod scenario;
pub mod terminal;
