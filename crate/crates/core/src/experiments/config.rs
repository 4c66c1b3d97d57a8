//! TOML scenario files.
//!
//! ```toml
//! [scenario]
//! name = "example"
//! seed = 7
//!
//! [system]
//! n = 1
//! gamma = 0.5
//! delta = 1.0
//!
//! [ancilla]
//! n = 1
//! delta = 1.0
//! init = "all_left"
//!
//! [coupling]
//! alpha = { value = 1.0, learnable = true }
//! ```
//!
//! A parameter is either a bare number (held fixed) or a table
//! `{ value = .., learnable = true }`.

use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{Axis, ConventionFlags, HamiltonianParams, SpinScale, UnitSystem};
use crate::dynamics::NoiseParams;
use crate::linalg::CMatrix;
use crate::model::{AncillaInit, AncillaParams, Coupling, CouplingKind, ModelConfig, Param};
use crate::optimize::{AncillaConstraint, OptConfig};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("invalid value for `{field}`{}: {message}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Invalid {
        field: String,
        line: Option<usize>,
        message: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Learn the learnable parameters, then report.
    #[default]
    Optimize,
    /// Report the configured values as they are.
    Simulate,
}

/// Output grid of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReportConfig {
    /// End of the reported time window.
    pub t_max: f64,
    /// Uniform samples for noiseless trajectories.
    pub points: usize,
    /// RK4 step for noisy trajectories.
    pub dt: f64,
    /// Noisy trajectories are subsampled to at most this many rows.
    pub max_rows: usize,
    /// Also report the coupled model at its starting parameters.
    pub unoptimized: bool,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            t_max: 10.0,
            points: 2000,
            dt: 0.05,
            max_rows: 4000,
            unoptimized: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n_s: Vec<usize>,
    pub n_a: Vec<usize>,
}

impl SweepConfig {
    pub fn cells(&self) -> Vec<(usize, usize)> {
        self.n_s
            .iter()
            .flat_map(|&s| self.n_a.iter().map(move |&a| (s, a)))
            .collect()
    }

    /// Seed of one grid cell, derived from the scenario seed.
    pub fn cell_seed(base: u64, n_s: usize, n_a: usize) -> u64 {
        base.wrapping_add(1000 * n_s as u64 + n_a as u64)
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub name: String,
    pub description: String,
    pub mode: Mode,
    pub model: ModelConfig,
    pub opt: OptConfig,
    pub report: ReportConfig,
    pub sweep: Option<SweepConfig>,
}

impl ScenarioConfig {
    pub fn seed(&self) -> u64 {
        self.opt.seed
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.opt.seed = seed;
        self
    }

    /// The single scenario of sweep cell `(n_s, n_a)`.
    pub fn cell(&self, n_s: usize, n_a: usize) -> ScenarioConfig {
        let mut c = self.clone();
        c.name = format!("{}_ns{n_s}_na{n_a}", self.name);
        c.model.n_s = n_s;
        c.model.n_a = n_a;
        c.model.conv_s.spin_scale = SpinScale::default_for(n_s);
        c.model.conv_a.spin_scale = SpinScale::J;
        c.opt.seed = SweepConfig::cell_seed(self.opt.seed, n_s, n_a);
        c.sweep = None;
        c
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
enum RawParam {
    Fixed(f64),
    Marked {
        value: f64,
        #[serde(default)]
        learnable: bool,
    },
}

impl RawParam {
    fn param(self) -> Param {
        match self {
            RawParam::Fixed(value) => Param::fixed(value),
            RawParam::Marked { value, learnable } => Param { value, learnable },
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum RawInit {
    Named(String),
    Number { number: usize },
    Vector { vector: Vec<[f64; 2]> },
    Density { density: Vec<Vec<[f64; 2]>> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    #[serde(default)]
    description: String,
    #[serde(default)]
    mode: Mode,
    #[serde(default)]
    seed: u64,
    unit_system: Option<UnitSystem>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    n: usize,
    #[serde(default)]
    eta: f64,
    #[serde(default)]
    gamma: f64,
    #[serde(default)]
    delta: f64,
    spin_scale: Option<SpinScale>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAncilla {
    #[serde(default)]
    n: usize,
    eta: Option<RawParam>,
    gamma: Option<RawParam>,
    delta: Option<RawParam>,
    init: Option<RawInit>,
    #[serde(default)]
    learnable_state: bool,
    #[serde(default)]
    constraint: AncillaConstraint,
    spin_scale: Option<SpinScale>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoupling {
    #[serde(default = "default_kind")]
    kind: String,
    alpha: Option<RawParam>,
    matrix: Option<[[f64; 3]; 3]>,
}

fn default_kind() -> String {
    "zz".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTime {
    t_hat: RawParam,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOptimizer {
    learning_rate: Option<f64>,
    max_iters: Option<usize>,
    time_penalty: Option<f64>,
    minimize_probability: Option<bool>,
    dt: Option<f64>,
    mask_temperature: Option<f64>,
    plateau_tol: Option<f64>,
    plateau_window: Option<usize>,
    randomize_initial: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: RawScenario,
    system: RawSystem,
    ancilla: Option<RawAncilla>,
    coupling: Option<RawCoupling>,
    time: Option<RawTime>,
    noise: Option<NoiseParams>,
    optimizer: Option<RawOptimizer>,
    report: Option<ReportConfig>,
    sweep: Option<SweepConfig>,
}

/// Line (1-based) of `key = ...` inside `[section]`, for error messages.
fn line_of(src: &str, section: &str, key: &str) -> Option<usize> {
    let header = format!("[{section}]");
    let mut inside = false;
    for (i, line) in src.lines().enumerate() {
        let t = line.trim();
        if t.starts_with('[') {
            inside = t == header;
            continue;
        }
        if inside {
            if let Some((k, _)) = t.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

struct Checker<'a> {
    src: &'a str,
}

impl Checker<'_> {
    fn fail<T>(
        &self,
        section: &str,
        key: &str,
        message: impl Into<String>,
    ) -> Result<T, ConfigError> {
        Err(ConfigError::Invalid {
            field: format!("{section}.{key}"),
            line: line_of(self.src, section, key),
            message: message.into(),
        })
    }

    fn positive(&self, section: &str, key: &str, v: f64) -> Result<(), ConfigError> {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            self.fail(section, key, format!("must be positive, got {v}"))
        }
    }

    fn non_negative(&self, section: &str, key: &str, v: f64) -> Result<(), ConfigError> {
        if v >= 0.0 && v.is_finite() {
            Ok(())
        } else {
            self.fail(section, key, format!("must be non-negative, got {v}"))
        }
    }

    fn finite(&self, section: &str, key: &str, v: f64) -> Result<(), ConfigError> {
        if v.is_finite() {
            Ok(())
        } else {
            self.fail(section, key, "must be finite")
        }
    }
}

fn complex_vec(v: &[[f64; 2]]) -> Vec<C64> {
    v.iter().map(|[re, im]| C64::new(*re, *im)).collect()
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ScenarioConfig, ConfigError> {
    let path = path.as_ref();
    let src = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&src)
}

pub fn parse_config(src: &str) -> Result<ScenarioConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(src).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let ck = Checker { src };

    let sc = raw.scenario;
    if sc.name.trim().is_empty() {
        return ck.fail("scenario", "name", "must not be empty");
    }
    let unit_system = sc.unit_system.unwrap_or(UnitSystem::DeltaSUnits);

    let sys = raw.system;
    if sys.n == 0 {
        return ck.fail("system", "n", "the system needs at least one boson");
    }
    for (k, v) in [("eta", sys.eta), ("gamma", sys.gamma), ("delta", sys.delta)] {
        ck.finite("system", k, v)?;
    }
    let spin_s = sys.spin_scale.unwrap_or(SpinScale::default_for(sys.n));
    if spin_s == SpinScale::Pauli && sys.n != 1 {
        return ck.fail(
            "system",
            "spin_scale",
            "pauli scaling needs exactly one boson",
        );
    }

    let anc = raw.ancilla.unwrap_or(RawAncilla {
        n: 0,
        eta: None,
        gamma: None,
        delta: None,
        init: None,
        learnable_state: false,
        constraint: AncillaConstraint::None,
        spin_scale: None,
    });
    let dim_a = anc.n + 1;
    let get = |p: Option<RawParam>| p.map(RawParam::param).unwrap_or(Param::fixed(0.0));
    let ancilla = AncillaParams {
        eta: get(anc.eta),
        gamma: get(anc.gamma),
        delta: get(anc.delta),
    };
    for (k, p) in [
        ("eta", ancilla.eta),
        ("gamma", ancilla.gamma),
        ("delta", ancilla.delta),
    ] {
        ck.finite("ancilla", k, p.value)?;
    }
    let spin_a = anc.spin_scale.unwrap_or(SpinScale::J);
    if spin_a == SpinScale::Pauli && anc.n != 1 {
        return ck.fail(
            "ancilla",
            "spin_scale",
            "pauli scaling needs exactly one boson",
        );
    }
    let ancilla_init = match anc.init {
        None => {
            if anc.learnable_state {
                AncillaInit::Random
            } else {
                AncillaInit::AllLeft
            }
        }
        Some(RawInit::Named(s)) => match s.as_str() {
            "random" => AncillaInit::Random,
            "all_left" => AncillaInit::AllLeft,
            "all_right" => AncillaInit::AllRight,
            other => {
                return ck.fail(
                    "ancilla",
                    "init",
                    format!("unknown initial state `{other}`"),
                )
            }
        },
        Some(RawInit::Number { number }) => {
            if number > anc.n {
                return ck.fail(
                    "ancilla",
                    "init",
                    format!("number state {number} exceeds n = {}", anc.n),
                );
            }
            AncillaInit::Number(number)
        }
        Some(RawInit::Vector { vector }) => {
            if vector.len() != dim_a {
                return ck.fail(
                    "ancilla",
                    "init",
                    format!("vector needs {dim_a} amplitudes, got {}", vector.len()),
                );
            }
            let v = complex_vec(&vector);
            let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            if (norm - 1.0).abs() > 1e-9 {
                return ck.fail(
                    "ancilla",
                    "init",
                    format!("vector is not normalized (norm^2 = {norm})"),
                );
            }
            AncillaInit::Vector(v)
        }
        Some(RawInit::Density { density }) => {
            if density.len() != dim_a || density.iter().any(|r| r.len() != dim_a) {
                return ck.fail(
                    "ancilla",
                    "init",
                    format!("density matrix must be {dim_a}x{dim_a}"),
                );
            }
            let data: Vec<C64> = density.iter().flat_map(|r| complex_vec(r)).collect();
            let m = CMatrix::from_vec(dim_a, dim_a, data).expect("shape checked");
            if let Err(e) = crate::dynamics::DensityMatrix::new(m.clone()) {
                return ck.fail("ancilla", "init", e.to_string());
            }
            AncillaInit::Density(m)
        }
    };
    if anc.constraint != AncillaConstraint::None && !anc.learnable_state {
        return ck.fail(
            "ancilla",
            "constraint",
            "a constraint needs learnable_state = true",
        );
    }

    let cp = raw.coupling.unwrap_or(RawCoupling {
        kind: default_kind(),
        alpha: None,
        matrix: None,
    });
    let alpha = get(cp.alpha);
    ck.finite("coupling", "alpha", alpha.value)?;
    let kind = match cp.kind.as_str() {
        "zz" => CouplingKind::DensityDensity,
        "general" => CouplingKind::General {
            matrix: cp.matrix.unwrap_or([[0.0; 3]; 3]),
        },
        other => {
            let axes: Vec<Axis> = other
                .chars()
                .map(|c| match c {
                    'x' => Some(Axis::X),
                    'y' => Some(Axis::Y),
                    'z' => Some(Axis::Z),
                    _ => None,
                })
                .collect::<Option<_>>()
                .unwrap_or_default();
            if axes.len() != 2 {
                return ck.fail(
                    "coupling",
                    "kind",
                    format!("expected zz, general or a pair of axes like xz, got `{other}`"),
                );
            }
            CouplingKind::Axes {
                system: axes[0],
                ancilla: axes[1],
            }
        }
    };
    if cp.matrix.is_some() && !matches!(kind, CouplingKind::General { .. }) {
        return ck.fail("coupling", "matrix", "only used with kind = \"general\"");
    }

    let t_hat = raw
        .time
        .map(|t| t.t_hat.param())
        .unwrap_or(Param::learnable(1.0));
    ck.positive("time", "t_hat", t_hat.value)?;

    let noise = raw.noise.unwrap_or_default();
    ck.non_negative("noise", "lambda_s", noise.lambda_s)?;
    ck.non_negative("noise", "lambda_a", noise.lambda_a)?;

    let report = raw.report.unwrap_or_default();
    ck.positive("report", "t_max", report.t_max)?;
    ck.positive("report", "dt", report.dt)?;
    if report.points < 2 {
        return ck.fail("report", "points", "need at least two points");
    }
    if report.max_rows < 2 {
        return ck.fail("report", "max_rows", "need at least two rows");
    }

    let mut opt = OptConfig {
        seed: sc.seed,
        ancilla_constraint: anc.constraint,
        t_window: report.t_max,
        ..OptConfig::default()
    };
    if let Some(o) = raw.optimizer {
        if let Some(v) = o.learning_rate {
            ck.positive("optimizer", "learning_rate", v)?;
            opt.learning_rate = v;
        }
        if let Some(v) = o.max_iters {
            opt.max_iters = v;
        }
        if let Some(v) = o.time_penalty {
            ck.non_negative("optimizer", "time_penalty", v)?;
            opt.time_penalty = v;
        }
        if let Some(v) = o.minimize_probability {
            opt.minimize_probability = v;
        }
        if let Some(v) = o.dt {
            ck.positive("optimizer", "dt", v)?;
            opt.dt = v;
        }
        if let Some(v) = o.mask_temperature {
            ck.positive("optimizer", "mask_temperature", v)?;
            opt.mask_temperature = Some(v);
        }
        if let Some(v) = o.plateau_tol {
            ck.non_negative("optimizer", "plateau_tol", v)?;
            opt.plateau_tol = v;
        }
        if let Some(v) = o.plateau_window {
            if v == 0 {
                return ck.fail("optimizer", "plateau_window", "must be at least 1");
            }
            opt.plateau_window = v;
        }
        if let Some(v) = o.randomize_initial {
            opt.randomize_initial = v;
        }
    }

    if let Some(sw) = &raw.sweep {
        if sw.n_s.is_empty() || sw.n_a.is_empty() {
            return ck.fail(
                "sweep",
                if sw.n_s.is_empty() { "n_s" } else { "n_a" },
                "grid must not be empty",
            );
        }
        if sw.n_s.contains(&0) {
            return ck.fail("sweep", "n_s", "every system needs at least one boson");
        }
    }

    let model = ModelConfig {
        n_s: sys.n,
        n_a: anc.n,
        system: HamiltonianParams::new(sys.eta, sys.gamma, sys.delta),
        conv_s: ConventionFlags::new(spin_s, unit_system),
        conv_a: ConventionFlags::new(spin_a, unit_system),
        ancilla,
        coupling: Coupling { kind, alpha },
        t_hat,
        noise,
        ancilla_init,
        ancilla_learnable: anc.learnable_state,
    };
    model.validate().map_err(|e| ConfigError::Invalid {
        field: "model".into(),
        line: None,
        message: e.to_string(),
    })?;
    Ok(ScenarioConfig {
        name: sc.name,
        description: sc.description,
        mode: sc.mode,
        model,
        opt,
        report,
        sweep: raw.sweep,
    })
}
