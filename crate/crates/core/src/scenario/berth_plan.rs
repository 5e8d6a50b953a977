//! Berth plan: one rectangle per berthed ship in (quay metre x time).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::kernel::SimTime;
use crate::terminal::{ShipId, TerminalState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerthPlanEntry {
    pub ship: ShipId,
    pub position_m: f64,
    pub length_m: f64,
    pub arrival: SimTime,
    pub berthed_at: SimTime,
    /// `None` while still alongside at the horizon.
    pub departed_at: Option<SimTime>,
}

/// Every ship that got a berth, in berthing order.
pub fn berth_plan_entries(state: &TerminalState) -> Vec<BerthPlanEntry> {
    let mut entries: Vec<BerthPlanEntry> = state
        .ships
        .iter()
        .filter_map(|s| {
            Some(BerthPlanEntry {
                ship: s.id,
                position_m: s.berth_position_m?,
                length_m: s.length_m,
                arrival: s.arrival,
                berthed_at: s.berthed_at?,
                departed_at: s.departed_at,
            })
        })
        .collect();
    entries.sort_by_key(|e| (e.berthed_at, e.ship));
    entries
}

/// JSON body of the plan document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerthPlan {
    pub schema_version: u32,
    pub quay_length_m: f64,
    pub horizon_hours: f64,
    pub weekly_teu: f64,
    pub entries: Vec<BerthPlanRow>,
}

/// Entry with times in hours, ready for plotting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerthPlanRow {
    pub ship: usize,
    pub position_m: f64,
    pub length_m: f64,
    pub arrival_h: f64,
    pub berthed_h: f64,
    /// Clipped to the horizon for ships still alongside.
    pub departed_h: f64,
    pub departed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerthPlanDocument {
    pub json: String,
    pub grid: String,
}

pub const GRID_COLUMN_M: f64 = 10.0;
pub const GRID_ROW_H: f64 = 4.0;
const DAYS: [&str; 7] = ["Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"];

fn ship_glyph(ship: ShipId) -> char {
    const GLYPHS: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";
    GLYPHS[ship.0 % GLYPHS.len()] as char
}

pub fn emit_berth_plan(
    entries: &[BerthPlanEntry],
    quay_length_m: f64,
    horizon: SimTime,
    weekly_teu: f64,
) -> BerthPlanDocument {
    let horizon_h = horizon.as_hours();
    let plan = BerthPlan {
        schema_version: super::SCHEMA_VERSION,
        quay_length_m,
        horizon_hours: horizon_h,
        weekly_teu,
        entries: entries
            .iter()
            .map(|e| BerthPlanRow {
                ship: e.ship.0 + 1,
                position_m: e.position_m,
                length_m: e.length_m,
                arrival_h: e.arrival.as_hours(),
                berthed_h: e.berthed_at.as_hours(),
                departed_h: e.departed_at.unwrap_or(horizon).min(horizon).as_hours(),
                departed: e.departed_at.is_some_and(|d| d <= horizon),
            })
            .collect(),
    };
    let json = serde_json::to_string_pretty(&plan).expect("plan serializes") + "\n";
    BerthPlanDocument {
        json,
        grid: render_grid(&plan),
    }
}

/// Text grid: one column per 10 m of quay, one row per 4 h starting Monday
/// 00:00. A cell shows the ship covering its centre point, `.` if none.
pub fn render_grid(plan: &BerthPlan) -> String {
    let cols = (plan.quay_length_m / GRID_COLUMN_M).ceil().max(0.0) as usize;
    let rows = (plan.horizon_hours / GRID_ROW_H).ceil().max(0.0) as usize;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "berth plan: quay {} m, horizon {} h, weekly TEU {:.0}",
        plan.quay_length_m, plan.horizon_hours, plan.weekly_teu
    );
    let _ = writeln!(
        out,
        "columns: {GRID_COLUMN_M} m each; rows: {GRID_ROW_H} h each"
    );

    let mut ruler = String::from("          ");
    for c in 0..cols {
        let m = c as f64 * GRID_COLUMN_M;
        ruler.push(if (m as u64).is_multiple_of(100) {
            '|'
        } else {
            ' '
        });
    }
    let _ = writeln!(out, "{}", ruler.trim_end());
    let mut labels = String::from("          ");
    let mut c = 0;
    while c < cols {
        let m = (c as f64 * GRID_COLUMN_M) as u64;
        if m.is_multiple_of(100) {
            let label = m.to_string();
            labels.push_str(&label);
            c += label.len();
        } else {
            labels.push(' ');
            c += 1;
        }
    }
    let _ = writeln!(out, "{}", labels.trim_end());

    for r in 0..rows {
        let t = (r as f64 + 0.5) * GRID_ROW_H;
        let start_h = r as f64 * GRID_ROW_H;
        let day = DAYS[((start_h / 24.0) as usize) % 7];
        let hour = (start_h % 24.0) as u32;
        let mut line = format!("{day} {hour:02}:00 ");
        for c in 0..cols {
            let x = (c as f64 + 0.5) * GRID_COLUMN_M;
            let cell = plan
                .entries
                .iter()
                .find(|e| {
                    e.berthed_h <= t
                        && t < e.departed_h
                        && e.position_m <= x
                        && x < e.position_m + e.length_m
                })
                .map(|e| ship_glyph(ShipId(e.ship - 1)))
                .unwrap_or('.');
            line.push(cell);
        }
        let _ = writeln!(out, "{line}");
    }
    out
}
