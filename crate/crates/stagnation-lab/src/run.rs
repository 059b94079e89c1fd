use std::path::{Path, PathBuf};
use std::time::Instant;

use cauchy_synth::CauchyDataSet;
use flow_sim::{write_field, IndexEntry, SnapshotIndex, SpectralField};
use heat_jet::ConditionReport;
use linkgeom::FrameField;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use stagtrack::PatternReport;

use crate::config::LabConfig;
use crate::pipeline::{self, Certificate, FitArtifact, ProbeReport, SimReport, TrackReport};
use crate::LabError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Synthesize,
    Verify,
    Fit,
    Simulate,
    Track,
    Compare,
}

impl Stage {
    pub const ALL: [Stage; 6] = [Stage::Synthesize, Stage::Verify, Stage::Fit, Stage::Simulate, Stage::Track, Stage::Compare];

    pub fn number(self) -> usize {
        self as usize + 1
    }

    pub fn name(self) -> &'static str {
        match self {
            Stage::Synthesize => "synthesize",
            Stage::Verify => "verify",
            Stage::Fit => "fit",
            Stage::Simulate => "simulate",
            Stage::Track => "track",
            Stage::Compare => "compare",
        }
    }

    pub fn dir_name(self) -> String {
        format!("stage-{}-{}", self.number(), self.name())
    }

    pub fn previous(self) -> Option<Stage> {
        (self.number() > 1).then(|| Stage::ALL[self.number() - 2])
    }
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageStatus {
    Passed,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: Stage,
    pub status: StageStatus,
    /// Paths relative to the run directory.
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub seconds: f64,
    pub message: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub version: String,
    pub stages: Vec<StageRecord>,
}

impl Manifest {
    pub fn record(&self, stage: Stage) -> Option<&StageRecord> {
        self.stages.iter().find(|r| r.stage == stage)
    }

    fn set(&mut self, rec: StageRecord) {
        self.stages.retain(|r| r.stage != rec.stage);
        self.stages.push(rec);
        self.stages.sort_by_key(|r| r.stage);
    }
}

/// Result of asking for one stage.
#[derive(Clone, Debug, PartialEq)]
pub struct StageOutcome {
    pub record: StageRecord,
    /// The stage was already done and nothing ran.
    pub cached: bool,
}

struct Lock(PathBuf);

impl Drop for Lock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.0);
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> LabError + '_ {
    move |source| LabError::Io { path: path.to_path_buf(), source }
}

/// `runs/<hash>/` owned by this process for its lifetime.
pub struct RunDir {
    pub root: PathBuf,
    pub config: LabConfig,
    pub manifest: Manifest,
    _lock: Lock,
}

const MANIFEST: &str = "manifest.json";

impl RunDir {
    pub fn open(runs: &Path, config: LabConfig) -> Result<Self, LabError> {
        let hash = config.hash();
        let root = runs.join(&hash);
        std::fs::create_dir_all(&root).map_err(io_err(&root))?;
        let lock_path = root.join("lock");
        let mut f = match std::fs::OpenOptions::new().write(true).create_new(true).open(&lock_path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => return Err(LabError::Locked { path: root }),
            Err(e) => return Err(io_err(&lock_path)(e)),
        };
        let lock = Lock(lock_path.clone());
        use std::io::Write;
        writeln!(f, "{}", std::process::id()).map_err(io_err(&lock_path))?;
        let cfg_path = root.join("config.json");
        write_json(&cfg_path, &config)?;
        let mpath = root.join(MANIFEST);
        let manifest = if mpath.exists() {
            read_json(&mpath)?
        } else {
            Manifest { config_hash: hash, version: env!("CARGO_PKG_VERSION").to_string(), stages: Vec::new() }
        };
        Ok(RunDir { root, config, manifest, _lock: lock })
    }

    pub fn stage_dir(&self, s: Stage) -> PathBuf {
        self.root.join(s.dir_name())
    }

    fn rel(&self, s: Stage, file: &str) -> PathBuf {
        PathBuf::from(s.dir_name()).join(file)
    }

    pub fn artifact(&self, s: Stage, file: &str) -> PathBuf {
        self.stage_dir(s).join(file)
    }

    /// Deserializes an artifact of a finished stage.
    pub fn load<T: DeserializeOwned>(&self, s: Stage, file: &str) -> Result<T, LabError> {
        let p = self.artifact(s, file);
        if !p.exists() {
            return Err(LabError::MissingArtifact { path: p });
        }
        read_json(&p)
    }

    fn save_manifest(&self) -> Result<(), LabError> {
        write_json(&self.root.join(MANIFEST), &self.manifest)
    }

    fn is_done(&self, s: Stage) -> bool {
        self.manifest.record(s).is_some_and(|r| {
            r.status == StageStatus::Passed && r.outputs.iter().all(|o| self.root.join(o).exists())
        })
    }

    /// Runs `stage` unless it already passed; missing prerequisites run
    /// first. `force` re-runs `stage` itself, never its prerequisites.
    pub fn run(&mut self, stage: Stage, force: bool) -> Result<StageOutcome, LabError> {
        if let Some(p) = stage.previous() {
            self.run(p, false)?;
        }
        if !force && self.is_done(stage) {
            let record = self.manifest.record(stage).cloned().expect("record of a done stage");
            return Ok(StageOutcome { record, cached: true });
        }
        let dir = self.stage_dir(stage);
        if dir.exists() {
            std::fs::remove_dir_all(&dir).map_err(io_err(&dir))?;
        }
        std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let start = Instant::now();
        let mut inputs = Vec::new();
        let mut outputs = Vec::new();
        let res = self.execute(stage, &mut inputs, &mut outputs);
        let record = StageRecord {
            stage,
            status: if res.is_ok() { StageStatus::Passed } else { StageStatus::Failed },
            inputs,
            outputs,
            seconds: start.elapsed().as_secs_f64(),
            message: res.as_ref().err().map(|e| e.to_string()),
        };
        self.manifest.set(record.clone());
        self.save_manifest()?;
        res.map(|_| StageOutcome { record, cached: false })
    }

    /// Runs every stage through `compare`.
    pub fn run_all(&mut self, force: bool) -> Result<Vec<StageOutcome>, LabError> {
        let mut out = Vec::new();
        for s in Stage::ALL {
            out.push(self.run(s, force)?);
        }
        Ok(out)
    }

    fn input<T: DeserializeOwned>(&self, inputs: &mut Vec<PathBuf>, s: Stage, file: &str) -> Result<T, LabError> {
        inputs.push(self.rel(s, file));
        self.load(s, file)
    }

    fn output<T: Serialize>(&self, outputs: &mut Vec<PathBuf>, s: Stage, file: &str, v: &T) -> Result<(), LabError> {
        outputs.push(self.rel(s, file));
        write_json(&self.artifact(s, file), v)
    }

    pub fn snapshots(&self) -> Result<Vec<SpectralField>, LabError> {
        let idx = self.artifact(Stage::Simulate, "snapshots/index.json");
        if !idx.exists() {
            return Err(LabError::MissingArtifact { path: idx });
        }
        let dir = idx.parent().expect("index has a parent").to_path_buf();
        let err = |e: flow_sim::SimError| LabError::Stage { stage: "track", message: e.to_string() };
        SnapshotIndex::load(&idx).map_err(err)?.load_fields(&dir).map_err(err)
    }

    fn execute(&self, stage: Stage, inputs: &mut Vec<PathBuf>, outputs: &mut Vec<PathBuf>) -> Result<(), LabError> {
        let cfg = &self.config;
        use Stage::*;
        match stage {
            Synthesize => {
                let s = pipeline::run_synthesize(cfg)?;
                self.output(outputs, stage, "frame.json", &s.frame)?;
                self.output(outputs, stage, "data.json", &s.data)?;
                self.output(outputs, stage, "certificate.json", &s.certificate)?;
            }
            Verify => {
                let frame: FrameField = self.input(inputs, Synthesize, "frame.json")?;
                let data: CauchyDataSet = self.input(inputs, Synthesize, "data.json")?;
                let r = pipeline::run_verify(cfg, &frame, &data)?;
                self.output(outputs, stage, "conditions.json", &r)?;
            }
            Fit => {
                let frame: FrameField = self.input(inputs, Synthesize, "frame.json")?;
                let data: CauchyDataSet = self.input(inputs, Synthesize, "data.json")?;
                let _: ConditionReport = self.input(inputs, Verify, "conditions.json")?;
                let fit = pipeline::run_fit(cfg, &frame, &data)?;
                self.output(outputs, stage, "fit.json", &fit)?;
            }
            Simulate => {
                let frame: FrameField = self.input(inputs, Synthesize, "frame.json")?;
                let fit: FitArtifact = self.input(inputs, Fit, "fit.json")?;
                let sim = pipeline::run_simulate(cfg, &frame, &fit, None)?;
                self.output(outputs, stage, "sim.json", &sim.report)?;
                let energy = self.artifact(stage, "energy.csv");
                crate::plot::write_energy(&energy, &sim.report)?;
                outputs.push(self.rel(stage, "energy.csv"));
                let sdir = self.artifact(stage, "snapshots");
                std::fs::create_dir_all(&sdir).map_err(io_err(&sdir))?;
                let mut index = SnapshotIndex {
                    n: sim.report.domain.n,
                    period: sim.report.domain.period,
                    delta: sim.report.delta,
                    snapshots: Vec::new(),
                };
                let err = |e: flow_sim::SimError| LabError::Stage { stage: "simulate", message: e.to_string() };
                for (k, f) in sim.snapshots.iter().enumerate() {
                    let name = format!("snap-{k:05}.bin");
                    write_field(&sdir.join(&name), f).map_err(err)?;
                    index.snapshots.push(IndexEntry { path: name.into(), time: f.time });
                }
                index.save(&sdir.join("index.json")).map_err(err)?;
                outputs.push(self.rel(stage, "snapshots/index.json"));
            }
            Track => {
                let frame: FrameField = self.input(inputs, Synthesize, "frame.json")?;
                let fit: FitArtifact = self.input(inputs, Fit, "fit.json")?;
                inputs.push(self.rel(Simulate, "snapshots/index.json"));
                let snaps = self.snapshots()?;
                let tr = pipeline::run_track(cfg, &frame, fit.eta, &snaps)?;
                self.output(outputs, stage, "tracking.json", &tr)?;
                let csv = self.artifact(stage, "trajectories.csv");
                stagtrack::write_trajectories_csv(&csv, &tr.tracking)
                    .map_err(|e| LabError::Stage { stage: "track", message: e.to_string() })?;
                outputs.push(self.rel(stage, "trajectories.csv"));
            }
            Compare => {
                let frame: FrameField = self.input(inputs, Synthesize, "frame.json")?;
                let tr: TrackReport = self.input(inputs, Track, "tracking.json")?;
                let report = pipeline::run_compare(cfg, &frame, &tr.tracking);
                self.output(outputs, stage, "pattern.json", &report)?;
                let txt = self.artifact(stage, "pattern.txt");
                std::fs::write(&txt, report.to_string()).map_err(io_err(&txt))?;
                outputs.push(self.rel(stage, "pattern.txt"));
                let mut probe_failed = None;
                if cfg.compare.stability_probe {
                    let fit: FitArtifact = self.input(inputs, Fit, "fit.json")?;
                    let p: ProbeReport = pipeline::stability_probe(cfg, &frame, &fit, &report)?;
                    self.output(outputs, stage, "probe.json", &p)?;
                    if !p.passed {
                        probe_failed = Some(format!(
                            "stability probe changed the pattern: census {:?} -> {:?}",
                            p.base_census, p.probe_census
                        ));
                    }
                }
                if let Err(e) = report.into_result() {
                    return Err(LabError::Stage { stage: "compare", message: e.to_string() });
                }
                if let Some(m) = probe_failed {
                    return Err(LabError::Stage { stage: "compare", message: m });
                }
            }
        }
        Ok(())
    }

    pub fn certificate(&self) -> Result<Certificate, LabError> {
        self.load(Stage::Synthesize, "certificate.json")
    }

    pub fn sim_report(&self) -> Result<SimReport, LabError> {
        self.load(Stage::Simulate, "sim.json")
    }

    pub fn pattern(&self) -> Result<PatternReport, LabError> {
        self.load(Stage::Compare, "pattern.json")
    }
}

pub fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<(), LabError> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| LabError::Io { path: path.into(), source: e.into() })?;
    s.push('\n');
    std::fs::write(path, s).map_err(io_err(path))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, LabError> {
    let s = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&s).map_err(|e| LabError::Io { path: path.into(), source: e.into() })
}
