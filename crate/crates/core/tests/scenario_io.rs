use portsim::kernel::{Distribution, SimTime};
use portsim::kpi::KpiReport;
use portsim::policies::{BerthPolicy, CranePolicy, PolicySet, StoragePolicy, TruckPolicy};
use portsim::scenario::{emit_report, ReportFormat, ScenarioConfig, ScenarioError, ACT_SCENARIO};
use portsim::terminal::run_simulation;

const MINIMAL: &str = r#"
schema_version = 1
name = "tiny"
horizon_hours = 24.0

[terminal]
quay_length_m = 300.0
berth_clearance_m = 10.0

[equipment]
quay_cranes = 2
trucks = 4
top_lift_trucks = 1

[[blocks]]
id = "I1"
category = "import"
capacity = 500
distance = "near"

[arrivals]
ships_per_day = 1.0
forty_foot_share = 0.0
ship_length_m = { kind = "constant", value = 100.0 }
moves_per_meter = { kind = "constant", value = 1.0 }

[category_mix]
import = 1.0
export = 0.0
empty = 0.0
reefer = 0.0
hazardous = 0.0

[durations]
quay_cycle_min = { kind = "constant", value = 2.0 }
yard_cycle_min = { kind = "constant", value = 3.0 }
truck_travel_min = { near = { kind = "constant", value = 5.0 }, mid = { kind = "constant", value = 7.0 }, far = { kind = "constant", value = 9.0 } }
"#;

fn issues_of(result: Result<ScenarioConfig, ScenarioError>) -> Vec<String> {
    match result {
        Err(e) => e.issues().iter().map(|i| i.path.clone()).collect(),
        Ok(_) => panic!("expected a validation error"),
    }
}

#[test]
fn shipped_act_scenario_matches_the_terminal() {
    let act = ScenarioConfig::act();
    assert_eq!(act.terminal.quay_length_m, 530.0);
    assert_eq!(act.equipment.quay_cranes, 5);
    assert_eq!(act.equipment.trucks, 25);
    assert_eq!(act.rtg_count(), 8);
    assert_eq!(act.equipment.top_lift_group(), 23);
    assert_eq!(act.terminal.water_depth_m, Some(14.0));
    assert_eq!(act.terminal.area_m2, Some(163_000.0));
    assert_eq!(act.blocks.len(), 12);
    assert_eq!(act.horizon(), SimTime::from_hours(168.0));
}

#[test]
fn shipped_file_on_disk_equals_embedded_copy() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/act.scenario");
    let text = std::fs::read_to_string(path).unwrap();
    assert_eq!(text, ACT_SCENARIO);
    assert_eq!(ScenarioConfig::load(path).unwrap(), ScenarioConfig::act());
}

#[test]
fn negative_truck_count_names_the_key() {
    let text = MINIMAL.replace("trucks = 4", "trucks = -1");
    let paths = issues_of(ScenarioConfig::from_toml_str(&text));
    assert_eq!(paths, vec!["equipment.trucks"]);
}

#[test]
fn all_problems_are_reported_together() {
    let text = MINIMAL
        .replace("trucks = 4", "trucks = -1")
        .replace("quay_cranes = 2", "quay_cranes = -3")
        .replace("value = 100.0", "value = 600.0")
        .replace("reefer = 0.0", "reefer = 2.0");
    let paths = issues_of(ScenarioConfig::from_toml_str(&text));
    for expected in [
        "equipment.quay_cranes",
        "equipment.trucks",
        "arrivals.ship_length_m",
        "category_mix.reefer",
    ] {
        assert!(
            paths.iter().any(|p| p == expected),
            "{expected} missing from {paths:?}"
        );
    }
}

#[test]
fn ship_longer_than_quay_is_rejected() {
    let text = ACT_SCENARIO.replace("max = 300.0", "max = 600.0");
    let paths = issues_of(ScenarioConfig::from_toml_str(&text));
    assert_eq!(paths, vec!["arrivals.ship_length_m"]);
}

#[test]
fn bad_distribution_is_rejected() {
    let text = MINIMAL.replace(
        r#"yard_cycle_min = { kind = "constant", value = 3.0 }"#,
        r#"yard_cycle_min = { kind = "uniform", min = 5.0, max = 1.0 }"#,
    );
    let paths = issues_of(ScenarioConfig::from_toml_str(&text));
    assert_eq!(paths, vec!["durations.yard_cycle_min"]);
}

#[test]
fn omitted_policies_take_defaults() {
    let config = ScenarioConfig::from_toml_str(MINIMAL).unwrap();
    let p = &config.policies;
    assert_eq!(*p, PolicySet::default());
    assert_eq!(p.berth, BerthPolicy::FirstFit);
    assert_eq!(p.crane, CranePolicy::Proportional);
    assert_eq!(p.truck, TruckPolicy::LongestIdle);
    assert_eq!(p.storage, StoragePolicy::LeastOccupancy);
}

#[test]
fn storage_round_robin_is_selectable() {
    let text = format!("{MINIMAL}\n[policies]\nstorage = \"round-robin\"\n");
    let config = ScenarioConfig::from_toml_str(&text).unwrap();
    assert_eq!(config.policies.storage, StoragePolicy::RoundRobin);
}

#[test]
fn unknown_policy_names_the_key() {
    let text = format!("{MINIMAL}\n[policies]\nstorage = \"magic\"\n");
    let err = ScenarioConfig::from_toml_str(&text).unwrap_err();
    assert_eq!(err.issues().len(), 1);
    assert_eq!(err.issues()[0].path, "policies.storage");
    assert!(err.issues()[0].message.contains("magic"));
}

#[test]
fn long_ship_rules_need_a_threshold() {
    let text = format!("{MINIMAL}\n[policies]\ncrane = \"long-ship\"\n");
    let paths = issues_of(ScenarioConfig::from_toml_str(&text));
    assert_eq!(paths, vec!["policies.long_ship_threshold_m"]);
}

#[test]
fn unknown_keys_fail_to_parse() {
    let text = MINIMAL.replace("[equipment]", "[equipment]\ncranes = 3");
    assert!(matches!(
        ScenarioConfig::from_toml_str(&text),
        Err(ScenarioError::Parse(_))
    ));
}

#[test]
fn missing_file_is_an_io_error() {
    assert!(matches!(
        ScenarioConfig::load("/nonexistent/act.scenario"),
        Err(ScenarioError::Io { .. })
    ));
}

#[test]
fn emit_then_reload_round_trips() {
    for config in [
        ScenarioConfig::from_toml_str(MINIMAL).unwrap(),
        ScenarioConfig::act(),
        ScenarioConfig::act_baseline(),
    ] {
        let text = config.to_toml_string();
        let again = ScenarioConfig::from_toml_str(&text).unwrap();
        assert_eq!(again, config);
        assert_eq!(again.to_toml_string(), text);
    }
}

#[test]
fn distributions_round_trip_through_toml() {
    let mut config = ScenarioConfig::from_toml_str(MINIMAL).unwrap();
    config.durations.quay_cycle_min = Distribution::Empirical {
        values: vec![1.5, 2.0, 2.5],
        weights: vec![1.0, 2.0, 1.0],
    };
    let config = config.validated().unwrap();
    let again = ScenarioConfig::from_toml_str(&config.to_toml_string()).unwrap();
    assert_eq!(again, config);
}

fn empty_report() -> KpiReport {
    let mut config = ScenarioConfig::act();
    config.arrivals.ships_per_day = 0.0;
    let outcome = run_simulation(&config, 1, config.horizon()).unwrap();
    KpiReport::from_outcome(&outcome).unwrap()
}

#[test]
fn empty_run_emits_all_zero_tables() {
    let report = empty_report();
    let csv = emit_report(&report, ReportFormat::Csv);
    assert!(csv.contains("Crane 1,0.0,0.0,0,0.00,0.00"));
    assert!(csv.contains("Total,,,0,0.00,"));
    assert!(csv.contains("Terminal Tractors,0"));
    assert!(csv.contains("weekly_teu,0.0"));
    let json: serde_json::Value =
        serde_json::from_str(&emit_report(&report, ReportFormat::Json)).unwrap();
    assert_eq!(json["quay_crane_total_throughput"], 0);
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["seed"], 1);
    assert_eq!(json["horizon_hours"], 168.0);
}

#[test]
fn csv_sections_follow_the_four_tables() {
    let config = ScenarioConfig::act();
    let outcome = run_simulation(&config, 3, config.horizon()).unwrap();
    let csv = emit_report(
        &KpiReport::from_outcome(&outcome).unwrap(),
        ReportFormat::Csv,
    );
    let titles: Vec<&str> = csv
        .split("\n\n")
        .map(|s| s.lines().next().unwrap())
        .collect();
    assert_eq!(
        titles,
        [
            "Quay cranes Statistics",
            "Yard Cranes Statistics",
            "Yard Blocks Transactions",
            "Trucks Statistics",
            "Terminal Summary"
        ]
    );
    assert!(csv.contains(
        "crane,working_pct,net_moves_per_hour,throughput,waiting_total_min,waiting_mean_min"
    ));
}

#[test]
fn serializing_twice_gives_identical_bytes() {
    let config = ScenarioConfig::act();
    let outcome = run_simulation(&config, 9, config.horizon()).unwrap();
    let report = KpiReport::from_outcome(&outcome).unwrap();
    for format in [ReportFormat::Csv, ReportFormat::Json] {
        assert_eq!(emit_report(&report, format), emit_report(&report, format));
    }
    let again =
        KpiReport::from_outcome(&run_simulation(&config, 9, config.horizon()).unwrap()).unwrap();
    assert_eq!(
        emit_report(&report, ReportFormat::Json),
        emit_report(&again, ReportFormat::Json)
    );
}
