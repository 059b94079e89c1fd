use std::path::{Path, PathBuf};

use cauchy_synth::CauchyDataSet;
use linkgeom::FrameField;
use serde::Serialize;
use stag_core::uniform_grid;
use stagtrack::{connecting_arcs, LinkPolyline};

use crate::pipeline::{SimReport, TrackReport};
use crate::run::{RunDir, Stage};
use crate::LabError;

pub const ETA_ROWS: usize = 4096;

#[derive(Serialize)]
struct EtaRow {
    theta: f64,
    x: f64,
    y: f64,
    t: f64,
    eta: f64,
}

#[derive(Serialize)]
struct EnergyRow {
    t: f64,
    energy: f64,
    enstrophy: f64,
}

#[derive(Serialize)]
struct TubeRow {
    source: &'static str,
    id: usize,
    t: f64,
    x: f64,
    y: f64,
    #[serde(rename = "type")]
    kind: String,
    link_distance: f64,
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<(), LabError> {
    let err = |e: csv::Error| LabError::Io { path: path.into(), source: e.into() };
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    for r in rows {
        w.serialize(r).map_err(err)?;
    }
    w.flush().map_err(|e| LabError::Io { path: path.into(), source: e })
}

pub fn write_eta_profile(path: &Path, frame: &FrameField, data: &CauchyDataSet) -> Result<(), LabError> {
    write_rows(
        path,
        uniform_grid(ETA_ROWS).into_iter().map(|theta| {
            let p = frame.curve.point(theta);
            EtaRow { theta, x: p[0], y: p[1], t: p[2], eta: data.eta(frame, theta) }
        }),
    )
}

/// Energy and enstrophy of the run, with time in link units.
pub fn write_energy(path: &Path, sim: &SimReport) -> Result<(), LabError> {
    let eta = sim.domain.eta;
    write_rows(path, sim.energy.iter().map(|e| EnergyRow { t: e[0] / eta, energy: e[1], enstrophy: e[2] }))
}

pub fn write_tubes(path: &Path, frame: &FrameField, tr: &TrackReport, arc_samples: usize) -> Result<(), LabError> {
    let link = LinkPolyline::new(&frame.curve, 4096);
    let mut rows = Vec::new();
    for (i, a) in connecting_arcs(frame, arc_samples).iter().enumerate() {
        for (p, k) in a.points.iter().zip(&a.types) {
            rows.push(TubeRow { source: "arc", id: i, t: p[2], x: p[0], y: p[1], kind: k.to_string(), link_distance: 0.0 });
        }
    }
    for traj in &tr.tracking.trajectories {
        for p in &traj.points {
            rows.push(TubeRow {
                source: "trajectory",
                id: traj.id,
                t: p.t,
                x: p.x,
                y: p.y,
                kind: p.kind.to_string(),
                link_distance: link.distance([p.x, p.y, p.t]),
            });
        }
    }
    write_rows(path, rows)
}

/// Writes `eta_profile.csv`, `energy.csv` and `tubes.csv` under
/// `plotdata/` of the run directory.
pub fn plotdata(run: &RunDir) -> Result<Vec<PathBuf>, LabError> {
    let frame: FrameField = run.load(Stage::Synthesize, "frame.json")?;
    let data: CauchyDataSet = run.load(Stage::Synthesize, "data.json")?;
    let sim: SimReport = run.load(Stage::Simulate, "sim.json")?;
    let tr: TrackReport = run.load(Stage::Track, "tracking.json")?;
    let dir = run.root.join("plotdata");
    std::fs::create_dir_all(&dir).map_err(|e| LabError::Io { path: dir.clone(), source: e })?;
    let files = [dir.join("eta_profile.csv"), dir.join("energy.csv"), dir.join("tubes.csv")];
    write_eta_profile(&files[0], &frame, &data)?;
    write_energy(&files[1], &sim)?;
    write_tubes(&files[2], &frame, &tr, run.config.compare.arc_samples)?;
    Ok(files.to_vec())
}
