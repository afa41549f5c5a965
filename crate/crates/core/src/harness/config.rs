//! Experiment configuration files.
//!
//! A config is one TOML document:
//!
//! ```toml
//! name = "growth-sphere-zonal"
//! kind = "growth"
//! seed = 1
//! output = "growth-sphere-zonal.csv"
//!
//! [model]
//! kind = "round-sphere"      # round-sphere | flat-torus | surface-of-revolution | triaxial-ellipsoid
//! dim = 2
//! radius = 1.0
//!
//! [point]
//! kind = "pole"              # pole | south-pole | umbilic | origin | explicit
//!
//! [parameters]
//! l_min = 10
//! l_max = 200
//! ```
//!
//! Model keys: `dim`, `radius` (sphere); `side` or `basis` (torus);
//! `[model.profile]` with `kind = "sine"` or `kind = "perturbed-sine"` plus
//! `amplitude`, `center`, `width` (surface of revolution); `axes` (ellipsoid).
//! Explicit points take `coordinates` in native coordinates. The accepted
//! `parameters` keys depend on `kind`; see [`ExperimentKind::allowed_parameters`].

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geometry::{ManifoldModel, Profile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Flow,
    ReturnMap,
    Recurrence,
    Classify,
    Quasimode,
    Projector,
    Growth,
    Lemma2,
    SmoothedSum,
    Maslov,
    StationaryPhase,
    Normalization,
    Conservation,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Flow => "flow",
            ExperimentKind::ReturnMap => "return-map",
            ExperimentKind::Recurrence => "recurrence",
            ExperimentKind::Classify => "classify",
            ExperimentKind::Quasimode => "quasimode",
            ExperimentKind::Projector => "projector",
            ExperimentKind::Growth => "growth",
            ExperimentKind::Lemma2 => "lemma2",
            ExperimentKind::SmoothedSum => "smoothed-sum",
            ExperimentKind::Maslov => "maslov",
            ExperimentKind::StationaryPhase => "stationary-phase",
            ExperimentKind::Normalization => "normalization",
            ExperimentKind::Conservation => "conservation",
        }
    }

    /// Keys of the `[parameters]` table this kind reads.
    pub fn allowed_parameters(&self) -> &'static [&'static str] {
        const LOOPS: &[&str] = &["grid_size", "t_max_diameters", "delta", "n_iter", "rtol", "orbits"];
        const QUASI: &[&str] = &[
            "k_min",
            "k_max",
            "k_step",
            "ks",
            "cutoff_radius",
            "annulus_exponent",
            "ball_radius",
            "residual",
        ];
        match self {
            ExperimentKind::Flow => &["direction", "t_max", "rtol", "dump"],
            ExperimentKind::ReturnMap | ExperimentKind::Recurrence | ExperimentKind::Classify => LOOPS,
            ExperimentKind::Quasimode | ExperimentKind::Normalization => QUASI,
            ExperimentKind::Projector => &["lambda_min", "lambda_max", "lambda_step", "deltas"],
            ExperimentKind::Growth => &["mode", "l_min", "l_max", "k_min", "k_max", "k_step", "ks", "cutoff_radius"],
            ExperimentKind::Lemma2 => &["trials", "lambdas", "deltas", "spectrum_max", "points_per_wavelength"],
            ExperimentKind::SmoothedSum => &["lambdas", "measures", "t_smooth", "center"],
            ExperimentKind::Maslov => &["k_min", "k_max", "k_step", "ks"],
            ExperimentKind::StationaryPhase => &["radii", "halvings", "k", "cutoff_radius"],
            ExperimentKind::Conservation => &["diameters", "samples"],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProfileSpec {
    Sine,
    PerturbedSine { amplitude: f64, center: f64, width: f64 },
}

impl Default for ProfileSpec {
    fn default() -> Self {
        ProfileSpec::Sine
    }
}

impl ProfileSpec {
    pub fn to_profile(&self) -> Profile {
        match *self {
            ProfileSpec::Sine => Profile::Sine,
            ProfileSpec::PerturbedSine { amplitude, center, width } => Profile::PerturbedSine { amplitude, center, width },
        }
    }
}

fn two() -> usize {
    2
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    RoundSphere {
        #[serde(default = "two")]
        dim: usize,
        #[serde(default = "one")]
        radius: f64,
    },
    FlatTorus {
        side: Option<f64>,
        basis: Option<[[f64; 2]; 2]>,
    },
    SurfaceOfRevolution {
        #[serde(default)]
        profile: ProfileSpec,
    },
    TriaxialEllipsoid {
        axes: [f64; 3],
    },
}

impl ModelSpec {
    pub fn build(&self) -> Result<ManifoldModel> {
        let m = match self {
            ModelSpec::RoundSphere { dim, radius } => ManifoldModel::round_sphere(*dim, *radius),
            ModelSpec::FlatTorus { side, basis } => match (side, basis) {
                (Some(s), None) => ManifoldModel::flat_torus([[*s, 0.0], [0.0, *s]]),
                (None, Some(b)) => ManifoldModel::flat_torus(*b),
                (None, None) => ManifoldModel::flat_torus([[2.0 * PI, 0.0], [0.0, 2.0 * PI]]),
                (Some(_), Some(_)) => return Err(Error::config("model", "give either `side` or `basis`, not both")),
            },
            ModelSpec::SurfaceOfRevolution { profile } => ManifoldModel::surface_of_revolution(profile.to_profile()),
            ModelSpec::TriaxialEllipsoid { axes } => ManifoldModel::triaxial_ellipsoid(axes[0], axes[1], axes[2]),
        };
        m.map_err(|e| Error::config("model", e.to_string()))
    }

    /// Named presets accepted on the command line.
    pub fn preset(name: &str) -> Result<Self> {
        Ok(match name {
            "sphere" => ModelSpec::RoundSphere { dim: 2, radius: 1.0 },
            "sphere3" => ModelSpec::RoundSphere { dim: 3, radius: 1.0 },
            "torus" => ModelSpec::FlatTorus { side: Some(2.0 * PI), basis: None },
            "sor" | "sor-sine" => ModelSpec::SurfaceOfRevolution { profile: ProfileSpec::Sine },
            "sor-bump" => ModelSpec::SurfaceOfRevolution {
                profile: ProfileSpec::PerturbedSine { amplitude: 0.2, center: PI / 2.0, width: 0.6 },
            },
            "ellipsoid" => ModelSpec::TriaxialEllipsoid { axes: [1.0, 0.8, 0.6] },
            other => {
                return Err(Error::config(
                    "--model",
                    format!("unknown preset `{other}` (sphere, sphere3, torus, sor-sine, sor-bump, ellipsoid)"),
                ))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PointSpec {
    #[default]
    Pole,
    SouthPole,
    Umbilic,
    Origin,
    Explicit {
        coordinates: Vec<f64>,
    },
}

impl PointSpec {
    pub fn resolve(&self, model: &ManifoldModel) -> Result<Vec<f64>> {
        let r = match self {
            PointSpec::Pole => model.pole(),
            PointSpec::SouthPole => model.south_pole(),
            PointSpec::Umbilic => model.umbilic(),
            PointSpec::Origin => Ok(vec![0.0; model.native_dim()]),
            PointSpec::Explicit { coordinates } => {
                if coordinates.len() != model.native_dim() {
                    Err(Error::Domain(format!(
                        "expected {} coordinates, got {}",
                        model.native_dim(),
                        coordinates.len()
                    )))
                } else {
                    let mut x = coordinates.clone();
                    if model.level_set(&x).abs() > 1e-6 {
                        return Err(Error::config("point.coordinates", "point is not on the surface"));
                    }
                    model.project_to_surface(&mut x);
                    Ok(x)
                }
            }
        };
        r.map_err(|e| Error::config("point", e.to_string()))
    }
}

/// Union of every experiment's numeric parameters; each kind reads a subset.
#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters {
    pub direction: Option<Vec<f64>>,
    pub t_max: Option<f64>,
    pub rtol: Option<f64>,
    pub dump: Option<bool>,
    pub grid_size: Option<usize>,
    pub t_max_diameters: Option<f64>,
    pub delta: Option<f64>,
    pub n_iter: Option<usize>,
    pub orbits: Option<usize>,
    pub k_min: Option<usize>,
    pub k_max: Option<usize>,
    pub k_step: Option<usize>,
    pub k: Option<usize>,
    /// Explicit mode list; overrides the `k_min..=k_max` range.
    pub ks: Option<Vec<usize>>,
    pub cutoff_radius: Option<f64>,
    pub annulus_exponent: Option<f64>,
    pub ball_radius: Option<f64>,
    pub residual: Option<bool>,
    pub mode: Option<String>,
    pub l_min: Option<usize>,
    pub l_max: Option<usize>,
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub lambda_step: Option<f64>,
    pub lambdas: Option<Vec<f64>>,
    pub deltas: Option<Vec<f64>>,
    pub measures: Option<Vec<f64>>,
    pub trials: Option<usize>,
    pub spectrum_max: Option<f64>,
    pub points_per_wavelength: Option<f64>,
    pub t_smooth: Option<f64>,
    pub center: Option<f64>,
    pub radii: Option<Vec<f64>>,
    pub halvings: Option<usize>,
    pub diameters: Option<f64>,
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: String,
    kind: ExperimentKind,
    #[serde(default)]
    seed: u64,
    threads: Option<usize>,
    output: Option<PathBuf>,
    model: ModelSpec,
    #[serde(default)]
    point: PointSpec,
    #[serde(default)]
    parameters: toml::Table,
}

/// A validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub kind: ExperimentKind,
    pub seed: u64,
    pub threads: Option<usize>,
    pub output: Option<PathBuf>,
    pub model: ModelSpec,
    pub point: PointSpec,
    pub parameters: Parameters,
}

impl ExperimentConfig {
    /// Default config for `kind` on `model`, with no parameter overrides.
    pub fn new(name: impl Into<String>, kind: ExperimentKind, model: ModelSpec, point: PointSpec) -> Self {
        ExperimentConfig {
            name: name.into(),
            kind,
            seed: 0,
            threads: None,
            output: None,
            model,
            point,
            parameters: Parameters::default(),
        }
    }

    /// Re-run the range checks, e.g. after overriding fields by hand.
    pub fn validate(&self) -> Result<()> {
        validate(self)
    }
}

/// Parse and validate a config document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let de = toml::Deserializer::new(text);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::config(if path.is_empty() { ".".into() } else { path }, e.into_inner().message().trim().to_string())
    })?;
    let allowed = raw.kind.allowed_parameters();
    for key in raw.parameters.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::config(
                format!("parameters.{key}"),
                format!("not a parameter of `{}` experiments (allowed: {})", raw.kind.name(), allowed.join(", ")),
            ));
        }
    }
    let parameters: Parameters = serde_path_to_error::deserialize(toml::Value::Table(raw.parameters))
        .map_err(|e| Error::config(format!("parameters.{}", e.path()), e.into_inner().to_string()))?;
    let cfg = ExperimentConfig {
        name: raw.name,
        kind: raw.kind,
        seed: raw.seed,
        threads: raw.threads,
        output: raw.output,
        model: raw.model,
        point: raw.point,
        parameters,
    };
    validate(&cfg)?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(path.display().to_string(), format!("cannot read: {e}")))?;
    parse_config(&text)
}

fn validate(cfg: &ExperimentConfig) -> Result<()> {
    let p = &cfg.parameters;
    if cfg.name.trim().is_empty() {
        return Err(Error::config("name", "must not be empty"));
    }
    if let (Some(a), Some(b)) = (p.k_min, p.k_max) {
        if a > b {
            return Err(Error::config("parameters.k_max", format!("empty k-range {a}..={b}")));
        }
    }
    if let (Some(a), Some(b)) = (p.l_min, p.l_max) {
        if a > b {
            return Err(Error::config("parameters.l_max", format!("empty degree range {a}..={b}")));
        }
    }
    if matches!(&p.ks, Some(v) if v.is_empty()) {
        return Err(Error::config("parameters.ks", "empty k-range"));
    }
    if p.k_step == Some(0) {
        return Err(Error::config("parameters.k_step", "must be positive"));
    }
    if let (Some(a), Some(b)) = (p.lambda_min, p.lambda_max) {
        if a > b {
            return Err(Error::config("parameters.lambda_max", "empty frequency range"));
        }
    }
    if let Some(s) = p.lambda_step {
        if !(s > 0.0) {
            return Err(Error::config("parameters.lambda_step", "must be positive"));
        }
    }
    for (key, list) in [("deltas", &p.deltas), ("measures", &p.measures), ("lambdas", &p.lambdas), ("radii", &p.radii)] {
        if let Some(v) = list {
            if v.is_empty() {
                return Err(Error::config(format!("parameters.{key}"), "must not be empty"));
            }
            if v.iter().any(|x| !(*x > 0.0)) {
                return Err(Error::config(format!("parameters.{key}"), "entries must be positive"));
            }
        }
    }
    if let Some(g) = p.grid_size {
        if g < 64 {
            return Err(Error::config("parameters.grid_size", "must be at least 64"));
        }
    }
    if let Some(r) = p.cutoff_radius {
        if !(r > 1.0) {
            return Err(Error::config("parameters.cutoff_radius", "must exceed 1"));
        }
    }
    if cfg.threads == Some(0) {
        return Err(Error::config("threads", "must be positive"));
    }
    Ok(())
}

impl Parameters {
    /// `k_min..=k_max` stepping by `k_step`.
    pub fn k_range(&self, default: (usize, usize, usize)) -> Result<Vec<usize>> {
        if let Some(ks) = &self.ks {
            if ks.is_empty() {
                return Err(Error::config("parameters.ks", "empty k-range"));
            }
            return Ok(ks.clone());
        }
        let a = self.k_min.unwrap_or(default.0);
        let b = self.k_max.unwrap_or(default.1);
        let s = self.k_step.unwrap_or(default.2);
        if a > b || s == 0 {
            return Err(Error::config("parameters.k_max", format!("empty k-range {a}..={b}")));
        }
        Ok((a..=b).step_by(s).collect())
    }
}
