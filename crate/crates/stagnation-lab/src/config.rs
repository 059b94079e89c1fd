use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use stag_core::TrigPoly;

use crate::LabError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Plane,
    Torus,
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plane" => Ok(Mode::Plane),
            "torus" => Ok(Mode::Torus),
            _ => Err(format!("unknown mode `{s}` (expected plane or torus)")),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Plane => "plane",
            Mode::Torus => "torus",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveCoeffs {
    pub x: TrigPoly,
    pub y: TrigPoly,
    pub t: TrigPoly,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelSpec {
    pub interval_index: usize,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkSection {
    /// `circle` or `trefoil`; sampled at `samples` points.
    pub preset: Option<String>,
    pub points: Option<Vec<[f64; 3]>>,
    pub coeffs: Option<CurveCoeffs>,
    /// `false` closes an open polyline before fitting.
    pub closed: bool,
    pub samples: usize,
    pub orientation: i8,
    pub labels: Vec<LabelSpec>,
    pub sliding_seed: Option<[f64; 3]>,
    pub sigma1: Option<f64>,
    pub rho1: Option<f64>,
    pub fit_degree: usize,
    pub fit_tol: f64,
    pub horizontal_tol: f64,
    pub k3_tol: f64,
}

impl Default for LinkSection {
    fn default() -> Self {
        LinkSection {
            preset: None,
            points: None,
            coeffs: None,
            closed: true,
            samples: 128,
            orientation: 1,
            labels: Vec::new(),
            sliding_seed: None,
            sigma1: None,
            rho1: None,
            fit_degree: 6,
            fit_tol: 1e-8,
            horizontal_tol: 1e-6,
            k3_tol: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub beta_degree: usize,
    pub dip: f64,
    pub grid: usize,
    pub tau_fraction: f64,
    pub exterior_margin: f64,
    pub radius_bound: f64,
    pub smooth_min_degree: usize,
    pub smooth_max_degree: usize,
    /// Samples of the condition check.
    pub verify_samples: usize,
}

impl Default for DataSection {
    fn default() -> Self {
        DataSection {
            beta_degree: 8,
            dip: 0.5,
            grid: 4096,
            tau_fraction: 0.125,
            exterior_margin: 0.5,
            radius_bound: 1e6,
            smooth_min_degree: 2,
            smooth_max_degree: 512,
            verify_samples: 2048,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitSection {
    pub mode: Mode,
    /// Time shift of the Gaussian multipole.
    pub age: f64,
    pub order: usize,
    pub samples: usize,
    pub ring_radii: Vec<f64>,
    pub ring_angles: usize,
    pub fg_degree: usize,
    pub prior_weight: f64,
    pub lambda: f64,
    pub weights: [f64; 3],
    pub ring_weight: f64,
    pub measure: [f64; 3],
    pub delta1: f64,
    pub max_condition: f64,
    pub eta0: f64,
    pub eta_floor: f64,
    pub k_max: usize,
    pub eps2: f64,
}

impl Default for FitSection {
    fn default() -> Self {
        FitSection {
            mode: Mode::Plane,
            age: 2.0,
            order: 18,
            samples: 256,
            ring_radii: vec![0.03],
            ring_angles: 8,
            fg_degree: 4,
            prior_weight: 0.1,
            lambda: 1e-8,
            weights: [1.0, 1.0, 1.0],
            ring_weight: 1.0,
            measure: [1.0, 0.1, 0.01],
            delta1: 1e-3,
            max_condition: 1e13,
            eta0: 1.0,
            eta_floor: 1e-3,
            k_max: 6,
            eps2: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    pub n: usize,
    /// Box period of the plane run; the torus run always uses 2π.
    pub period: f64,
    /// Step in link time units.
    pub dt: f64,
    /// Fixed δ; chosen from the measured heat/Navier–Stokes gap when absent.
    pub delta: Option<f64>,
    /// Target gap as a fraction of the fit margin when δ is chosen.
    pub delta_safety: f64,
    pub dealias: flow_sim::Dealias,
    pub max_cfl: f64,
    /// Snapshot spacing in link time units.
    pub slice_dt: f64,
    /// Extra time before and after the link; one tube radius when absent.
    pub time_margin: Option<f64>,
}

impl Default for SimSection {
    fn default() -> Self {
        SimSection {
            n: 128,
            period: 40.0,
            dt: 0.01,
            delta: None,
            delta_safety: 0.1,
            dealias: flow_sim::Dealias::TwoThirds,
            max_cfl: 1.0,
            slice_dt: 0.01,
            time_margin: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackSection {
    pub seed_spacing: f64,
    /// Margin of the seed window around the link; one tube radius when
    /// absent.
    pub window_margin: Option<f64>,
    pub newton_tol: f64,
    pub max_iter: usize,
    pub dedup_radius: f64,
    pub max_depth: usize,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub fold_coefficient: f64,
    pub gate_max: Option<f64>,
    pub fold_slices: usize,
    pub strict: bool,
    pub threads: Option<usize>,
}

impl Default for TrackSection {
    fn default() -> Self {
        TrackSection {
            seed_spacing: 0.005,
            window_margin: None,
            newton_tol: 1e-10,
            max_iter: 40,
            dedup_radius: 1e-6,
            max_depth: 6,
            c1: None,
            c2: None,
            fold_coefficient: 4.0,
            gate_max: None,
            fold_slices: 6,
            strict: false,
            threads: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareSection {
    pub tube_radius: f64,
    /// Hausdorff budget; 0.1 tube radii when absent.
    pub epsilon: Option<f64>,
    pub apex_exclusion: Option<f64>,
    pub arc_samples: usize,
    pub link_samples: usize,
    /// Re-run simulate, track and compare on a perturbed datum.
    pub stability_probe: bool,
    /// Size of that perturbation as a fraction of the fit margin.
    pub probe_fraction: f64,
}

impl Default for CompareSection {
    fn default() -> Self {
        CompareSection {
            tube_radius: 0.1,
            epsilon: None,
            apex_exclusion: None,
            arc_samples: 400,
            link_samples: 4096,
            stability_probe: false,
            probe_fraction: 0.1,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabConfig {
    pub seed: u64,
    pub link: LinkSection,
    pub data: DataSection,
    pub fit: FitSection,
    pub sim: SimSection,
    pub track: TrackSection,
    pub compare: CompareSection,
}

fn bad(key: &str, why: impl std::fmt::Display) -> LabError {
    LabError::Config(format!("`{key}`: {why}"))
}

impl LabConfig {
    pub fn from_toml(text: &str) -> Result<Self, LabError> {
        let cfg: LabConfig = toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// One merging and one splitting arc: the unit circle in the `(x, t)`
    /// plane centred at `t = 2`, with a MAX on the right.
    pub fn demo() -> Self {
        LabConfig {
            link: LinkSection {
                preset: Some("circle".into()),
                fit_degree: 3,
                sliding_seed: Some([0.0, std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2]),
                labels: vec![LabelSpec { interval_index: 1, label: "MAX".into() }],
                ..LinkSection::default()
            },
            ..LabConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), LabError> {
        let l = &self.link;
        let sources = l.preset.is_some() as u8 + l.points.is_some() as u8 + l.coeffs.is_some() as u8;
        if sources != 1 {
            return Err(bad("link", "exactly one of `preset`, `points`, `coeffs` is required"));
        }
        if let Some(p) = &l.preset {
            if p != "circle" && p != "trefoil" {
                return Err(bad("link.preset", format!("unknown preset `{p}` (expected circle or trefoil)")));
            }
        }
        if let Some(p) = &l.points {
            if p.len() < 2 * l.fit_degree + 1 {
                return Err(bad("link.points", format!("{} points are too few for degree {}", p.len(), l.fit_degree)));
            }
        }
        if l.orientation != 1 && l.orientation != -1 {
            return Err(bad("link.orientation", "must be 1 or -1"));
        }
        for s in &l.labels {
            if s.label != "MAX" && s.label != "MIN" {
                return Err(bad("link.labels.label", format!("`{}` is not MAX or MIN", s.label)));
            }
        }
        let pos = |key: &str, v: f64| if v > 0.0 && v.is_finite() { Ok(()) } else { Err(bad(key, "must be positive")) };
        pos("link.fit_tol", l.fit_tol)?;
        pos("fit.age", self.fit.age)?;
        pos("fit.delta1", self.fit.delta1)?;
        pos("fit.eps2", self.fit.eps2)?;
        if !(self.fit.eta0 > 0.0 && self.fit.eta0 <= 1.0) {
            return Err(bad("fit.eta0", "must lie in (0, 1]"));
        }
        pos("sim.period", self.sim.period)?;
        pos("sim.dt", self.sim.dt)?;
        pos("sim.slice_dt", self.sim.slice_dt)?;
        pos("sim.delta_safety", self.sim.delta_safety)?;
        if let Some(d) = self.sim.delta {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(bad("sim.delta", "must be non-negative"));
            }
        }
        if self.sim.n < 8 || self.sim.n % 2 != 0 {
            return Err(bad("sim.n", "must be even and at least 8"));
        }
        pos("track.seed_spacing", self.track.seed_spacing)?;
        pos("track.newton_tol", self.track.newton_tol)?;
        pos("compare.tube_radius", self.compare.tube_radius)?;
        if self.track.fold_slices < 2 {
            return Err(bad("track.fold_slices", "must be at least 2"));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, as 16 hex digits.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let d = Sha256::digest(json.as_bytes());
        d.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn epsilon(&self) -> f64 {
        self.compare.epsilon.unwrap_or(0.1 * self.compare.tube_radius)
    }

    pub fn time_margin(&self) -> f64 {
        self.sim.time_margin.unwrap_or(self.compare.tube_radius)
    }

    pub fn window_margin(&self) -> f64 {
        self.track.window_margin.unwrap_or(self.compare.tube_radius)
    }
}
