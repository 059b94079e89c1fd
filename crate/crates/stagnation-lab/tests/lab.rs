use std::path::Path;
use std::process::Command;

use flow_sim::SpectralField;
use proptest::prelude::*;
use stagnation_lab::config::LabelSpec;
use stagnation_lab::pipeline::{Domain, SimReport};
use stagnation_lab::run::{RunDir, Stage, StageStatus};
use stagnation_lab::{plot, LabConfig, LabError, Mode};

/// Demo circle on a coarse grid and coarse slicing: cheap, not certified.
fn quick() -> LabConfig {
    let mut c = LabConfig::demo();
    c.sim.n = 64;
    c.sim.dt = 0.05;
    c.sim.slice_dt = 0.05;
    c.sim.delta = Some(0.0);
    c.track.seed_spacing = 0.02;
    c
}

fn config_error(text: &str) -> String {
    match LabConfig::from_toml(text) {
        Err(LabError::Config(m)) => m,
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn parse_errors_name_the_key() {
    let m = config_error("[fit]\nbogus = 1\n");
    assert!(m.contains("bogus"), "{m}");
    let m = config_error("[link]\npreset = \"circle\"\n[track]\nseed_spacing = \"fine\"\n");
    assert!(m.contains("seed_spacing"), "{m}");
    let m = config_error("[link]\npreset = \"circle\"\n[sim]\nn = 7\n");
    assert!(m.contains("sim.n"), "{m}");
    let m = config_error("[link]\npreset = \"square\"\n");
    assert!(m.contains("link.preset"), "{m}");
    let m = config_error("[fit]\nage = 2.0\n");
    assert!(m.contains("`link`"), "{m}");
}

#[test]
fn example_config_parses() {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/demo.toml");
    let c = LabConfig::load(&p).unwrap();
    assert_eq!(c.link.preset.as_deref(), Some("circle"));
    assert_eq!(c.link.labels, vec![LabelSpec { interval_index: 1, label: "MAX".into() }]);
    assert!(c.compare.stability_probe);
}

#[test]
fn cached_rerun_is_a_no_op_unless_forced() {
    let dir = tempfile::tempdir().unwrap();
    let mut run = RunDir::open(dir.path(), quick()).unwrap();
    let a = run.run(Stage::Synthesize, false).unwrap();
    assert!(!a.cached);
    assert_eq!(a.record.status, StageStatus::Passed);
    let cert = run.artifact(Stage::Synthesize, "certificate.json");
    let before = std::fs::read(&cert).unwrap();
    let modified = std::fs::metadata(&cert).unwrap().modified().unwrap();
    let b = run.run(Stage::Synthesize, false).unwrap();
    assert!(b.cached);
    assert_eq!(b.record, a.record);
    assert_eq!(std::fs::metadata(&cert).unwrap().modified().unwrap(), modified);
    let c = run.run(Stage::Synthesize, true).unwrap();
    assert!(!c.cached);
    assert_eq!(std::fs::read(&cert).unwrap(), before);
    assert!(run.certificate().unwrap().min_eta > 0.0);
    drop(run);
    // a new process sees the manifest and does nothing
    let mut again = RunDir::open(dir.path(), quick()).unwrap();
    assert!(again.run(Stage::Synthesize, false).unwrap().cached);
}

#[test]
fn run_directory_is_locked() {
    let dir = tempfile::tempdir().unwrap();
    let run = RunDir::open(dir.path(), quick()).unwrap();
    assert!(matches!(RunDir::open(dir.path(), quick()), Err(LabError::Locked { .. })));
    drop(run);
    assert!(RunDir::open(dir.path(), quick()).is_ok());
}

#[test]
fn empty_run_has_no_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let run = RunDir::open(dir.path(), quick()).unwrap();
    let e = plot::plotdata(&run).unwrap_err();
    assert!(matches!(e, LabError::MissingArtifact { .. }), "{e}");
    assert_eq!(e.exit_code(), 2);
}

#[test]
fn prerequisites_run_and_downstream_deletion_keeps_upstream() {
    let dir = tempfile::tempdir().unwrap();
    let mut run = RunDir::open(dir.path(), quick()).unwrap();
    run.run(Stage::Fit, false).unwrap();
    for s in [Stage::Synthesize, Stage::Verify, Stage::Fit] {
        assert_eq!(run.manifest.record(s).unwrap().status, StageStatus::Passed);
    }
    let fit = run.manifest.record(Stage::Fit).unwrap();
    assert!(fit.inputs.iter().all(|p| p.starts_with("stage-1-synthesize") || p.starts_with("stage-2-verify")));
    let cert = std::fs::read(run.artifact(Stage::Synthesize, "certificate.json")).unwrap();
    std::fs::remove_dir_all(run.stage_dir(Stage::Verify)).unwrap();
    // the missing prerequisite is regenerated, the fit itself is kept
    let o = run.run(Stage::Fit, false).unwrap();
    assert!(o.cached);
    assert!(run.artifact(Stage::Verify, "conditions.json").exists());
    assert!(run.run(Stage::Verify, false).unwrap().cached);
    assert_eq!(std::fs::read(run.artifact(Stage::Synthesize, "certificate.json")).unwrap(), cert);
    assert!(run.manifest.record(Stage::Synthesize).is_some());
}

fn rel_max_diff(a: &SpectralField, b: &SpectralField) -> f64 {
    let (ga, gb) = (a.to_grid(), b.to_grid());
    let scale = gb.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    ga.iter().zip(&gb).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

#[test]
fn zero_delta_run_is_heat_flow_and_outputs_are_deterministic() {
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut outputs = Vec::new();
    for d in [&d1, &d2] {
        let mut run = RunDir::open(d.path(), quick()).unwrap();
        run.run(Stage::Track, false).unwrap();
        let files = plot::plotdata(&run).unwrap();
        outputs.push(files.iter().map(|f| std::fs::read(f).unwrap()).collect::<Vec<_>>());
        outputs.last_mut().unwrap().push(std::fs::read(run.artifact(Stage::Track, "trajectories.csv")).unwrap());
        if outputs.len() == 2 {
            break;
        }
        let sim: SimReport = run.sim_report().unwrap();
        assert_eq!(sim.delta, 0.0);
        let snaps = run.snapshots().unwrap();
        assert!(snaps.len() > 10);
        let fit = run.load(Stage::Fit, "fit.json").unwrap();
        let d = Domain::new(&run.config, sim.domain.eta);
        assert_eq!(d, sim.domain);
        let (u0, _) = SpectralField::from_grid(&d.initial_grid(&fit_ansatz(&fit)), d.n, d.period, 0.0);
        for s in &snaps {
            assert!(rel_max_diff(s, &u0.heat(s.time)) < 1e-12, "t = {}", s.time);
        }
        // energy curve does not increase
        let text = std::fs::read_to_string(&files[1]).unwrap();
        let e: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
        assert!(e.len() > 10);
        assert!(e.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
        // η profile: 4096 positive rows
        let text = std::fs::read_to_string(&files[0]).unwrap();
        let rows: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(4).unwrap().parse().unwrap()).collect();
        assert_eq!(rows.len(), plot::ETA_ROWS);
        assert!(rows.iter().all(|v| *v > 0.0));
    }
    assert_eq!(outputs[0], outputs[1]);
}

fn fit_ansatz(fit: &stagnation_lab::pipeline::FitArtifact) -> global_fit::HeatAnsatz {
    fit.result.ansatz.clone()
}

fn lab(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_stagnation-lab")).args(args).output().unwrap()
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[link]\npreset = \"circle\"\nfit_degre = 3\n").unwrap();
    let runs = dir.path().join("runs");
    let out = lab(&["synthesize", "--config", bad.to_str().unwrap(), "--runs", runs.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("fit_degre"));
    let out = lab(&["verify", "--runs", runs.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    // a link whose time dips below zero fails in the synthesize stage
    let neg = dir.path().join("neg.toml");
    std::fs::write(&neg, "[link]\ncoeffs = { x = { a0 = 0.0, cos = [1.0], sin = [0.0] }, y = { a0 = 0.0, cos = [0.0], sin = [0.0] }, t = { a0 = 0.5, cos = [0.0], sin = [1.0] } }\n").unwrap();
    let out = lab(&["synthesize", "--config", neg.to_str().unwrap(), "--runs", runs.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("synthesize"));
    let good = dir.path().join("good.toml");
    std::fs::write(&good, "[link]\npreset = \"circle\"\nfit_degree = 3\nsliding_seed = [0.0, 0.7071067811865476, 0.7071067811865476]\nlabels = [{ interval_index = 1, label = \"MAX\" }]\n").unwrap();
    let args = ["verify", "--config", good.to_str().unwrap(), "--runs", runs.to_str().unwrap()];
    let out = lab(&args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = lab(&args);
    assert!(String::from_utf8_lossy(&out.stdout).contains("verify: cached"));
    let torus = lab(&["synthesize", "--mode", "torus", "--config", good.to_str().unwrap(), "--runs", runs.to_str().unwrap()]);
    assert_eq!(torus.status.code(), Some(0));
    assert_eq!(std::fs::read_dir(&runs).unwrap().count(), 3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn domain_maps_are_inverse(eta in 0.01f64..1.0, x in -3.0f64..3.0, y in -3.0f64..3.0, t in 0.0f64..5.0) {
        let mut c = LabConfig::demo();
        c.fit.mode = Mode::Torus;
        let d = Domain::new(&c, eta);
        let q = d.to_link(d.to_sim([x, y, t]));
        prop_assert!((q[0] - x).abs() < 1e-12 && (q[1] - y).abs() < 1e-12 && (q[2] - t).abs() < 1e-12);
    }

    #[test]
    fn hash_tracks_content(seed in any::<u64>(), n in 4usize..200) {
        let mut a = LabConfig::demo();
        a.seed = seed;
        a.sim.n = 2 * n;
        let text = toml::to_string(&a).unwrap();
        let b = LabConfig::from_toml(&text).unwrap();
        prop_assert_eq!(a.hash(), b.hash());
        let mut c = b.clone();
        c.sim.n += 2;
        prop_assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn mode_round_trips(torus in any::<bool>()) {
        let m = if torus { Mode::Torus } else { Mode::Plane };
        prop_assert_eq!(m.to_string().parse::<Mode>().unwrap(), m);
    }
}
