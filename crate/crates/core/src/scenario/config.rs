//! Scenario schema.
//!
//! A scenario is a TOML document. It is read into [`ScenarioDocument`], a
//! loose mirror of the file with signed counts and policy ids as strings, and
//! then validated into a [`ScenarioConfig`]. Validation reports every problem
//! it finds, each tagged with the key path it came from.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::Distribution;
use crate::policies::{BerthPolicy, CranePolicy, PolicySet, StoragePolicy, TruckPolicy};
use crate::terminal::{Category, DistanceClass};

pub const SCHEMA_VERSION: u32 = 1;

/// The shipped Alexandria Container Terminal scenario.
pub const ACT_SCENARIO: &str = include_str!("../../../../scenarios/act.scenario");
/// Planner-style baseline for the same terminal.
pub const ACT_BASELINE_SCENARIO: &str = include_str!("../../../../scenarios/act-baseline.scenario");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("scenario does not parse: {0}")]
    Parse(String),
    #[error("scenario is invalid:\n{}", format_issues(.0))]
    Invalid(Vec<ConfigIssue>),
}

fn format_issues(issues: &[ConfigIssue]) -> String {
    issues
        .iter()
        .map(|i| format!("  - {i}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl ScenarioError {
    pub fn issues(&self) -> &[ConfigIssue] {
        match self {
            ScenarioError::Invalid(issues) => issues,
            _ => &[],
        }
    }
}

// ---------------------------------------------------------------------------
// Validated configuration

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerminalGeometry {
    pub quay_length_m: f64,
    pub berth_clearance_m: f64,
    /// Carried as metadata only.
    pub water_depth_m: Option<f64>,
    /// Carried as metadata only.
    pub area_m2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Equipment {
    pub quay_cranes: u32,
    pub trucks: u32,
    pub top_lift_trucks: u32,
    pub empty_handlers: u32,
}

impl Equipment {
    /// Size of the pooled top-lift / empty-handler group.
    pub fn top_lift_group(&self) -> u32 {
        self.top_lift_trucks + self.empty_handlers
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct YardCraneSpec {
    pub name: String,
    pub block: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub id: String,
    pub category: Category,
    pub capacity: u32,
    pub distance: DistanceClass,
    pub initial_occupancy: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrivalSpec {
    /// Poisson rate; inter-arrival times are exponential with mean
    /// `24 / ships_per_day` hours. Zero means no ships.
    pub ships_per_day: f64,
    pub ship_length_m: Distribution,
    /// Moves per ship = round(length * draw).
    pub moves_per_meter: Distribution,
    pub forty_foot_share: f64,
}

/// Relative weights of each category among a ship's moves. Export moves
/// become load demand; the rest are discharged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryMix {
    pub import: f64,
    pub export: f64,
    pub empty: f64,
    pub reefer: f64,
    pub hazardous: f64,
}

impl CategoryMix {
    pub fn weight(&self, category: Category) -> f64 {
        match category {
            Category::Import => self.import,
            Category::Export => self.export,
            Category::Empty => self.empty,
            Category::Reefer => self.reefer,
            Category::Hazardous => self.hazardous,
        }
    }

    pub fn total(&self) -> f64 {
        Category::ALL.iter().map(|&c| self.weight(c)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TravelTimes {
    pub near: Distribution,
    pub mid: Distribution,
    pub far: Distribution,
}

impl TravelTimes {
    pub fn for_class(&self, class: DistanceClass) -> &Distribution {
        match class {
            DistanceClass::Near => &self.near,
            DistanceClass::Mid => &self.mid,
            DistanceClass::Far => &self.far,
        }
    }
}

/// All durations in minutes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Durations {
    pub quay_cycle_min: Distribution,
    /// Cycle on ships above the long-ship threshold; falls back to
    /// `quay_cycle_min`.
    pub quay_cycle_long_ship_min: Option<Distribution>,
    pub yard_cycle_min: Distribution,
    /// One-way quay to block.
    pub truck_travel_min: TravelTimes,
}

impl Durations {
    pub fn quay_cycle(&self, long_ship: bool) -> &Distribution {
        match (&self.quay_cycle_long_ship_min, long_ship) {
            (Some(d), true) => d,
            _ => &self.quay_cycle_min,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub name: String,
    pub horizon_hours: f64,
    pub terminal: TerminalGeometry,
    pub equipment: Equipment,
    pub yard_cranes: Vec<YardCraneSpec>,
    pub blocks: Vec<BlockSpec>,
    pub arrivals: ArrivalSpec,
    pub category_mix: CategoryMix,
    pub durations: Durations,
    pub policies: PolicySet,
}

impl ScenarioConfig {
    pub fn from_toml_str(source: &str) -> Result<Self, ScenarioError> {
        let doc: ScenarioDocument =
            toml::from_str(source).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        doc.validate()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    /// The shipped ACT scenario.
    pub fn act() -> Self {
        Self::from_toml_str(ACT_SCENARIO).expect("shipped act.scenario is valid")
    }

    pub fn act_baseline() -> Self {
        Self::from_toml_str(ACT_BASELINE_SCENARIO).expect("shipped act-baseline.scenario is valid")
    }

    pub fn to_document(&self) -> ScenarioDocument {
        let p = &self.policies;
        ScenarioDocument {
            schema_version: i64::from(self.schema_version),
            name: self.name.clone(),
            horizon_hours: self.horizon_hours,
            terminal: self.terminal.clone(),
            equipment: EquipmentDoc {
                quay_cranes: i64::from(self.equipment.quay_cranes),
                trucks: i64::from(self.equipment.trucks),
                top_lift_trucks: i64::from(self.equipment.top_lift_trucks),
                empty_handlers: i64::from(self.equipment.empty_handlers),
            },
            yard_cranes: self.yard_cranes.clone(),
            blocks: self
                .blocks
                .iter()
                .map(|b| BlockDoc {
                    id: b.id.clone(),
                    category: b.category,
                    capacity: i64::from(b.capacity),
                    distance: b.distance,
                    initial_occupancy: i64::from(b.initial_occupancy),
                })
                .collect(),
            arrivals: self.arrivals.clone(),
            category_mix: self.category_mix.clone(),
            durations: self.durations.clone(),
            policies: PoliciesDoc {
                berth: p.berth.id().to_string(),
                crane: p.crane.id().to_string(),
                max_cranes_per_ship: i64::from(p.max_cranes_per_ship),
                moves_per_crane: i64::from(p.moves_per_crane),
                truck: p.truck.id().to_string(),
                storage: p.storage.id().to_string(),
                long_ship_threshold_m: p.long_ship_threshold_m,
                load_lookahead: i64::from(p.load_lookahead),
            },
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(&self.to_document()).expect("scenario documents always serialize")
    }

    pub fn horizon(&self) -> crate::kernel::SimTime {
        crate::kernel::SimTime::from_hours(self.horizon_hours)
    }

    pub fn rtg_count(&self) -> usize {
        self.yard_cranes.len()
    }

    /// Re-runs validation on an in-memory config, e.g. after a test or the
    /// CLI edited fields.
    pub fn validated(self) -> Result<Self, ScenarioError> {
        self.to_document().validate()
    }
}

// ---------------------------------------------------------------------------
// Raw document

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    pub schema_version: i64,
    #[serde(default)]
    pub name: String,
    pub horizon_hours: f64,
    pub terminal: TerminalGeometry,
    pub equipment: EquipmentDoc,
    #[serde(default)]
    pub yard_cranes: Vec<YardCraneSpec>,
    #[serde(default)]
    pub blocks: Vec<BlockDoc>,
    pub arrivals: ArrivalSpec,
    pub category_mix: CategoryMix,
    pub durations: Durations,
    #[serde(default)]
    pub policies: PoliciesDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquipmentDoc {
    pub quay_cranes: i64,
    pub trucks: i64,
    #[serde(default)]
    pub top_lift_trucks: i64,
    #[serde(default)]
    pub empty_handlers: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockDoc {
    pub id: String,
    pub category: Category,
    pub capacity: i64,
    pub distance: DistanceClass,
    #[serde(default)]
    pub initial_occupancy: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoliciesDoc {
    pub berth: String,
    pub crane: String,
    pub max_cranes_per_ship: i64,
    pub moves_per_crane: i64,
    pub truck: String,
    pub storage: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub long_ship_threshold_m: Option<f64>,
    pub load_lookahead: i64,
}

impl Default for PoliciesDoc {
    fn default() -> Self {
        let p = PolicySet::default();
        Self {
            berth: p.berth.id().into(),
            crane: p.crane.id().into(),
            max_cranes_per_ship: i64::from(p.max_cranes_per_ship),
            moves_per_crane: i64::from(p.moves_per_crane),
            truck: p.truck.id().into(),
            storage: p.storage.id().into(),
            long_ship_threshold_m: p.long_ship_threshold_m,
            load_lookahead: i64::from(p.load_lookahead),
        }
    }
}

struct Issues(Vec<ConfigIssue>);

impl Issues {
    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.0.push(ConfigIssue {
            path: path.into(),
            message: message.into(),
        });
    }

    fn count(&mut self, path: &str, value: i64, min: i64) -> u32 {
        if value < min {
            self.push(path, format!("must be >= {min}, got {value}"));
            return 0;
        }
        match u32::try_from(value) {
            Ok(v) => v,
            Err(_) => {
                self.push(path, format!("{value} is too large"));
                0
            }
        }
    }

    fn positive(&mut self, path: &str, value: f64) {
        if !(value.is_finite() && value > 0.0) {
            self.push(path, format!("must be a positive number, got {value}"));
        }
    }

    fn distribution(&mut self, path: &str, dist: &Distribution) -> bool {
        match dist.validate() {
            Ok(()) => true,
            Err(e) => {
                self.push(path, e.to_string());
                false
            }
        }
    }

    fn duration(&mut self, path: &str, dist: &Distribution) {
        if self.distribution(path, dist) && dist.lower_bound() < 0.0 {
            self.push(path, "durations cannot be negative");
        }
    }

    fn policy<T>(
        &mut self,
        path: &str,
        id: &str,
        parse: fn(&str) -> Option<T>,
        ids: &[&str],
    ) -> Option<T> {
        let parsed = parse(id);
        if parsed.is_none() {
            self.push(
                path,
                format!(
                    "unknown policy id {id:?}; expected one of {}",
                    ids.join(", ")
                ),
            );
        }
        parsed
    }
}

impl ScenarioDocument {
    pub fn validate(&self) -> Result<ScenarioConfig, ScenarioError> {
        let mut issues = Issues(Vec::new());

        let schema_version = self.schema_version;
        if schema_version != i64::from(SCHEMA_VERSION) {
            issues.push(
                "schema_version",
                format!("unsupported version {schema_version}, expected {SCHEMA_VERSION}"),
            );
        }
        issues.positive("horizon_hours", self.horizon_hours);

        let t = &self.terminal;
        issues.positive("terminal.quay_length_m", t.quay_length_m);
        if !(t.berth_clearance_m.is_finite() && t.berth_clearance_m >= 0.0) {
            issues.push("terminal.berth_clearance_m", "must be >= 0");
        }

        let e = &self.equipment;
        let equipment = Equipment {
            quay_cranes: issues.count("equipment.quay_cranes", e.quay_cranes, 0),
            trucks: issues.count("equipment.trucks", e.trucks, 0),
            top_lift_trucks: issues.count("equipment.top_lift_trucks", e.top_lift_trucks, 0),
            empty_handlers: issues.count("equipment.empty_handlers", e.empty_handlers, 0),
        };

        let mut blocks = Vec::with_capacity(self.blocks.len());
        let mut seen = BTreeSet::new();
        for (i, b) in self.blocks.iter().enumerate() {
            let path = format!("blocks[{i}]");
            if b.id.trim().is_empty() {
                issues.push(format!("{path}.id"), "must not be empty");
            } else if !seen.insert(b.id.clone()) {
                issues.push(
                    format!("{path}.id"),
                    format!("duplicate block id {:?}", b.id),
                );
            }
            let capacity = issues.count(&format!("{path}.capacity"), b.capacity, 0);
            let initial =
                issues.count(&format!("{path}.initial_occupancy"), b.initial_occupancy, 0);
            if initial > capacity {
                issues.push(
                    format!("{path}.initial_occupancy"),
                    format!("{initial} exceeds capacity {capacity}"),
                );
            }
            blocks.push(BlockSpec {
                id: b.id.clone(),
                category: b.category,
                capacity,
                distance: b.distance,
                initial_occupancy: initial,
            });
        }

        let mut rtg_blocks = BTreeSet::new();
        for (i, yc) in self.yard_cranes.iter().enumerate() {
            let path = format!("yard_cranes[{i}].block");
            if !seen.contains(&yc.block) {
                issues.push(path, format!("unknown block {:?}", yc.block));
            } else if !rtg_blocks.insert(yc.block.clone()) {
                issues.push(
                    path,
                    format!("block {:?} already has a yard crane", yc.block),
                );
            }
        }
        let group_served = blocks.iter().any(|b| !rtg_blocks.contains(&b.id));
        if group_served && equipment.top_lift_group() == 0 {
            issues.push(
                "equipment.top_lift_trucks",
                "blocks without a yard crane need at least one top-lift truck or empty handler",
            );
        }

        let a = &self.arrivals;
        if !(a.ships_per_day.is_finite() && a.ships_per_day >= 0.0) {
            issues.push("arrivals.ships_per_day", "must be >= 0");
        }
        if issues.distribution("arrivals.ship_length_m", &a.ship_length_m) {
            if a.ship_length_m.lower_bound() <= 0.0 {
                issues.push("arrivals.ship_length_m", "ship lengths must be positive");
            }
            if a.ship_length_m.upper_bound() > t.quay_length_m {
                issues.push(
                    "arrivals.ship_length_m",
                    format!(
                        "ships up to {} m do not fit a {} m quay",
                        a.ship_length_m.upper_bound(),
                        t.quay_length_m
                    ),
                );
            }
        }
        if issues.distribution("arrivals.moves_per_meter", &a.moves_per_meter)
            && a.moves_per_meter.lower_bound() < 0.0
        {
            issues.push("arrivals.moves_per_meter", "must not be negative");
        }
        if !(0.0..=1.0).contains(&a.forty_foot_share) {
            issues.push("arrivals.forty_foot_share", "must be within [0, 1]");
        }

        let mix = &self.category_mix;
        for c in Category::ALL {
            let w = mix.weight(c);
            let path = format!("category_mix.{}", c.name());
            if !(w.is_finite() && w >= 0.0) {
                issues.push(path, "weights must be >= 0");
            } else if w > 0.0 && !blocks.iter().any(|b| b.category == c) {
                issues.push(path, format!("no block stores {c} containers"));
            }
        }
        if a.ships_per_day > 0.0 && mix.total() <= 0.0 {
            issues.push("category_mix", "at least one weight must be positive");
        }

        let d = &self.durations;
        issues.duration("durations.quay_cycle_min", &d.quay_cycle_min);
        if let Some(long) = &d.quay_cycle_long_ship_min {
            issues.duration("durations.quay_cycle_long_ship_min", long);
        }
        issues.duration("durations.yard_cycle_min", &d.yard_cycle_min);
        issues.duration("durations.truck_travel_min.near", &d.truck_travel_min.near);
        issues.duration("durations.truck_travel_min.mid", &d.truck_travel_min.mid);
        issues.duration("durations.truck_travel_min.far", &d.truck_travel_min.far);

        let p = &self.policies;
        let berth = issues.policy(
            "policies.berth",
            &p.berth,
            BerthPolicy::from_id,
            BerthPolicy::IDS,
        );
        let crane = issues.policy(
            "policies.crane",
            &p.crane,
            CranePolicy::from_id,
            CranePolicy::IDS,
        );
        let truck = issues.policy(
            "policies.truck",
            &p.truck,
            TruckPolicy::from_id,
            TruckPolicy::IDS,
        );
        let storage = issues.policy(
            "policies.storage",
            &p.storage,
            StoragePolicy::from_id,
            StoragePolicy::IDS,
        );
        let max_cranes_per_ship =
            issues.count("policies.max_cranes_per_ship", p.max_cranes_per_ship, 1);
        let moves_per_crane = issues.count("policies.moves_per_crane", p.moves_per_crane, 1);
        let load_lookahead = issues.count("policies.load_lookahead", p.load_lookahead, 1);
        if let Some(th) = p.long_ship_threshold_m {
            issues.positive("policies.long_ship_threshold_m", th);
        }
        let needs_threshold = berth == Some(BerthPolicy::LongShipsRight)
            || crane == Some(CranePolicy::LongShip)
            || truck == Some(TruckPolicy::LongShipPriority);
        if needs_threshold && p.long_ship_threshold_m.is_none() {
            issues.push(
                "policies.long_ship_threshold_m",
                "required by the long-ship policies",
            );
        }

        if !issues.0.is_empty() {
            return Err(ScenarioError::Invalid(issues.0));
        }

        Ok(ScenarioConfig {
            schema_version: SCHEMA_VERSION,
            name: self.name.clone(),
            horizon_hours: self.horizon_hours,
            terminal: self.terminal.clone(),
            equipment,
            yard_cranes: self.yard_cranes.clone(),
            blocks,
            arrivals: self.arrivals.clone(),
            category_mix: self.category_mix.clone(),
            durations: self.durations.clone(),
            policies: PolicySet {
                berth: berth.expect("checked"),
                crane: crane.expect("checked"),
                max_cranes_per_ship,
                moves_per_crane,
                truck: truck.expect("checked"),
                storage: storage.expect("checked"),
                long_ship_threshold_m: p.long_ship_threshold_m,
                load_lookahead,
            },
        })
    }
}
