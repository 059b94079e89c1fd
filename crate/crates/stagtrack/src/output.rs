use std::io::Write;
use std::path::Path;

use heat_jet::PointType;
use serde::{Deserialize, Serialize};

use crate::continuation::Tracking;
use crate::TrackError;

/// One row of the trajectory table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub traj_id: usize,
    pub t: f64,
    pub x: f64,
    pub y: f64,
    #[serde(rename = "type")]
    pub kind: PointType,
    pub det_hess: f64,
    pub trace_hess: f64,
    pub newton_residual: f64,
}

pub fn trajectory_rows(tracking: &Tracking) -> Vec<TrajectoryRow> {
    let mut rows = Vec::new();
    for tr in &tracking.trajectories {
        for p in &tr.points {
            rows.push(TrajectoryRow {
                traj_id: tr.id,
                t: p.t,
                x: p.x,
                y: p.y,
                kind: p.kind,
                det_hess: p.det,
                trace_hess: p.trace,
                newton_residual: p.newton_residual,
            });
        }
    }
    rows
}

pub fn write_trajectories_csv(path: &Path, tracking: &Tracking) -> Result<(), TrackError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in trajectory_rows(tracking) {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trajectories_csv(path: &Path) -> Result<Vec<TrajectoryRow>, TrackError> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in r.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), TrackError> {
    let mut f = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, TrackError> {
    let f = std::fs::File::open(path)?;
    Ok(serde_json::from_reader(std::io::BufReader::new(f))?)
}
