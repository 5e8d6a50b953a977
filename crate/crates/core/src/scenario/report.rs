//! KPI report serialization.
//!
//! CSV output has four sections (quay cranes, yard cranes, yard blocks,
//! trucks), each a title line, a header line and its rows, separated by a
//! blank line. Numbers use a dot decimal and fixed precision.

use serde::{Deserialize, Serialize};

use crate::kpi::KpiReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        }
    }
}

pub fn emit_report(report: &KpiReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            serde_json::to_string_pretty(report).expect("reports serialize") + "\n"
        }
        ReportFormat::Csv => report_csv(report),
    }
}

fn section<I, R>(title: &str, header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::WriterBuilder::new()
        .flexible(true)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record([title]).expect("in-memory write");
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn f1(x: f64) -> String {
    format!("{x:.1}")
}

fn f2(x: f64) -> String {
    format!("{x:.2}")
}

fn report_csv(r: &KpiReport) -> String {
    let mut out = Vec::new();

    let mut quay: Vec<Vec<String>> = r
        .quay_cranes
        .iter()
        .map(|c| {
            vec![
                c.crane.clone(),
                f1(c.working_pct),
                f1(c.net_moves_per_hour),
                c.throughput.to_string(),
                f2(c.waiting.total_min),
                f2(c.waiting.mean_min),
            ]
        })
        .collect();
    quay.push(vec![
        "Total".into(),
        String::new(),
        String::new(),
        r.quay_crane_total_throughput.to_string(),
        f2(r.quay_cranes.iter().map(|c| c.waiting.total_min).sum()),
        String::new(),
    ]);
    out.push(section(
        "Quay cranes Statistics",
        &[
            "crane",
            "working_pct",
            "net_moves_per_hour",
            "throughput",
            "waiting_total_min",
            "waiting_mean_min",
        ],
        quay,
    ));

    out.push(section(
        "Yard Cranes Statistics",
        &["yard_crane", "working_pct", "net_moves_per_hour", "moves"],
        r.yard_cranes.iter().map(|y| {
            vec![
                y.name.clone(),
                f1(y.working_pct),
                f1(y.net_moves_per_hour),
                y.moves.to_string(),
            ]
        }),
    ));

    let mut blocks: Vec<Vec<String>> = r
        .block_categories
        .iter()
        .map(|c| {
            vec![
                c.category.to_string(),
                c.blocks.to_string(),
                f1(c.average),
                c.total.to_string(),
            ]
        })
        .collect();
    blocks.extend(r.blocks.iter().map(|b| {
        vec![
            format!("block {}", b.block),
            "1".into(),
            b.transactions.to_string(),
            b.transactions.to_string(),
        ]
    }));
    out.push(section(
        "Yard Blocks Transactions",
        &[
            "category",
            "blocks",
            "average_transactions",
            "total_transactions",
        ],
        blocks,
    ));

    out.push(section(
        "Trucks Statistics",
        &["equipment", "throughput"],
        [vec![
            "Terminal Tractors".to_string(),
            r.trucks.total_throughput.to_string(),
        ]],
    ));

    out.push(section(
        "Terminal Summary",
        &["kpi", "value"],
        [
            ("seed", r.seed.to_string()),
            ("horizon_hours", f1(r.horizon_hours)),
            ("weekly_teu", f1(r.teu.weekly_teu)),
            ("annual_teu", f1(r.teu.annual_teu)),
            (
                "berth_occupancy_pct",
                f1(r.berth_occupancy.length_weighted_pct),
            ),
            ("berth_any_ship_pct", f1(r.berth_occupancy.any_ship_pct)),
            ("ships_berthed", r.ships.berthed.to_string()),
            ("ships_departed", r.ships.departed.to_string()),
            ("mean_service_h", f2(r.ship_times.mean_service_h)),
            ("max_service_h", f2(r.ship_times.max_service_h)),
            ("mean_turnaround_h", f2(r.ship_times.mean_turnaround_h)),
            ("max_turnaround_h", f2(r.ship_times.max_turnaround_h)),
            ("overflow_events", r.overflow_events.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| vec![k.to_string(), v]),
    ));

    out.join("\n")
}
