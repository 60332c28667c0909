//! Run records and their CSV / JSON serialization.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::Scenario;

/// Densities on a uniform probe grid at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub values: Vec<f64>,
}

/// One diagnostics row per step (GOF) or window (WFT).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagRow {
    pub t: f64,
    pub mass: f64,
    pub tv: f64,
    /// `dt · Φ_sup / dx` for GOF, `dt · ‖φ′‖_∞` for WFT.
    pub cfl: f64,
    pub events: u64,
    /// `min_i (y_{i+1} − y_i − β_{i+1} − β_i)`, Model B only.
    pub min_gap: Option<f64>,
}

/// A bottleneck–front interaction recorded by the front-tracking solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventEntry {
    pub t: f64,
    pub y: f64,
    pub kind: String,
    pub left: f64,
    pub right: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Summary {
    pub solver: String,
    pub steps: usize,
    pub dt: f64,
    pub completed: bool,
    /// Set when a bottleneck left the domain and the run stopped early.
    pub stopped_at: Option<f64>,
    pub warnings: Vec<String>,
    pub mass_drift_max: f64,
    pub min_gap: Option<f64>,
    pub t_max: Option<f64>,
    pub eta: Option<f64>,
    pub mu: Option<f64>,
    pub k_phi: Option<f64>,
    pub tv_violations: usize,
    pub separation_checks: usize,
    pub separation_failures: usize,
    pub events: Vec<EventEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub x0: f64,
    pub dx: f64,
    pub traj_t: Vec<f64>,
    /// `traj_y[k][i]` is vehicle `i` at `traj_t[k]`.
    pub traj_y: Vec<Vec<f64>>,
    pub snapshots: Vec<Snapshot>,
    pub final_state: Snapshot,
    pub diagnostics: Vec<DiagRow>,
    pub summary: Summary,
}

impl RunRecord {
    pub fn vehicles(&self) -> usize {
        self.traj_y.first().map_or(0, Vec::len)
    }

    pub fn trajectory(&self, i: usize) -> Vec<f64> {
        self.traj_y.iter().map(|row| row[i]).collect()
    }

    pub fn cell_centers(&self) -> Vec<f64> {
        (0..self.final_state.values.len())
            .map(|m| self.x0 + (m as f64 + 0.5) * self.dx)
            .collect()
    }
}

/// Formats with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn row(out: &mut String, first: f64, rest: impl IntoIterator<Item = f64>) {
    out.push_str(&num(first));
    for v in rest {
        out.push(',');
        out.push_str(&num(v));
    }
    out.push('\n');
}

pub fn trajectory_csv(r: &RunRecord) -> String {
    let mut s = String::from("t");
    for i in 1..=r.vehicles() {
        let _ = write!(s, ",y_{i}");
    }
    s.push('\n');
    for (t, ys) in r.traj_t.iter().zip(&r.traj_y) {
        row(&mut s, *t, ys.iter().copied());
    }
    s
}

/// Header carries the cell centers after the `t` column.
pub fn density_csv(r: &RunRecord) -> String {
    let mut s = String::from("t");
    for x in r.cell_centers() {
        s.push(',');
        s.push_str(&num(x));
    }
    s.push('\n');
    for snap in &r.snapshots {
        row(&mut s, snap.t, snap.values.iter().copied());
    }
    s
}

pub fn diagnostics_csv(r: &RunRecord) -> String {
    let mut s = String::from("t,mass,tv,cfl,events,min_gap\n");
    for d in &r.diagnostics {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            num(d.t),
            num(d.mass),
            num(d.tv),
            num(d.cfl),
            d.events,
            d.min_gap.map(num).unwrap_or_default()
        );
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDocument {
    pub scenario: Scenario,
    pub record: RunRecord,
}

pub fn summary_json(scenario: &Scenario, record: &RunRecord) -> String {
    let doc = RunDocument {
        scenario: scenario.clone(),
        record: record.clone(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("record serializes");
    s.push('\n');
    s
}

pub const FILES: [&str; 4] = ["trajectory.csv", "density.csv", "diagnostics.csv", "summary.json"];

/// Writes the three CSVs and `summary.json` into `dir`.
pub fn write_record(dir: &Path, scenario: &Scenario, record: &RunRecord) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(FILES[0]), trajectory_csv(record))?;
    fs::write(dir.join(FILES[1]), density_csv(record))?;
    fs::write(dir.join(FILES[2]), diagnostics_csv(record))?;
    fs::write(dir.join(FILES[3]), summary_json(scenario, record))?;
    Ok(())
}

/// Reads back the JSON document written by [`write_record`].
pub fn read_record(dir: &Path) -> Result<RunDocument> {
    let text = fs::read_to_string(dir.join(FILES[3]))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))
}
