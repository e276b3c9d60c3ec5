//! Experiment configuration: defaults, presets, TOML files and flags.
//!
//! Later sources win: built-in defaults, then a preset, then the config
//! file, then command-line flags.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::Args;
use num_complex::Complex64;
use qfts_core::control::ControlLaw;
use qfts_core::qstate::{normalize, StateVector};
use serde::Deserialize;

use crate::error::ConfigError;

pub const DEFAULT_K: f64 = 0.5;
pub const DEFAULT_ALPHA: f64 = 2.0 / 3.0;
pub const DEFAULT_DT: f64 = 1e-4;
pub const DEFAULT_T_MAX: f64 = 15.0;
pub const DEFAULT_EPS_SETTLE: f64 = 1e-6;
pub const DEFAULT_C1: f64 = 1.0;

/// Which equations of motion are integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    State,
    Polar,
    Coherence,
}

impl Representation {
    pub fn name(self) -> &'static str {
        match self {
            Representation::State => "state",
            Representation::Polar => "polar",
            Representation::Coherence => "coherence",
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Representation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "state" => Ok(Representation::State),
            "polar" => Ok(Representation::Polar),
            "coherence" => Ok(Representation::Coherence),
            _ => Err(format!("unknown representation `{s}` (state, polar, coherence)")),
        }
    }
}

/// Initial state: a named preset or explicit amplitudes (normalized on use).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    Ket0,
    Ket1,
    /// `[1/2, √3/2]`
    Half,
    Amplitudes([Complex64; 2]),
}

impl InitialState {
    pub fn to_state(&self) -> qfts_core::Result<StateVector> {
        match self {
            InitialState::Ket0 => Ok(StateVector::ket0()),
            InitialState::Ket1 => Ok(StateVector::ket1()),
            InitialState::Half => StateVector::qubit(Complex64::new(0.5, 0.0), Complex64::new(0.75f64.sqrt(), 0.0)),
            InitialState::Amplitudes(amps) => normalize(amps),
        }
    }

    fn from_reals(v: &[f64]) -> Result<Self, String> {
        match v {
            [a, b, c, d] => Ok(InitialState::Amplitudes([
                Complex64::new(*a, *b),
                Complex64::new(*c, *d),
            ])),
            _ => Err(format!(
                "expected 4 numbers (re x1, im x1, re x2, im x2), got {}",
                v.len()
            )),
        }
    }
}

impl fmt::Display for InitialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialState::Ket0 => f.write_str("ket0"),
            InitialState::Ket1 => f.write_str("ket1"),
            InitialState::Half => f.write_str("half"),
            InitialState::Amplitudes([a, b]) => write!(f, "{},{},{},{}", a.re, a.im, b.re, b.im),
        }
    }
}

impl FromStr for InitialState {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ket0" => Ok(InitialState::Ket0),
            "ket1" => Ok(InitialState::Ket1),
            "half" => Ok(InitialState::Half),
            other => {
                let nums = other
                    .split(',')
                    .map(|x| x.trim().parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| format!("bad amplitude list `{s}`: {e}"))?;
                InitialState::from_reals(&nums)
            }
        }
    }
}

/// Hard-coded experiment setups.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Ket0NonSmooth,
    Ket0Standard,
    Ket0BangBang,
    HalfNonSmooth,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::Ket0NonSmooth,
        Preset::Ket0Standard,
        Preset::Ket0BangBang,
        Preset::HalfNonSmooth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Ket0NonSmooth => "ket0-nonsmooth",
            Preset::Ket0Standard => "ket0-standard",
            Preset::Ket0BangBang => "ket0-bangbang",
            Preset::HalfNonSmooth => "half-nonsmooth",
        }
    }

    fn apply(self, cfg: &mut ExperimentConfig) {
        let (law, psi0) = match self {
            Preset::Ket0NonSmooth => (ControlLaw::NonSmooth, InitialState::Ket0),
            Preset::Ket0Standard => (ControlLaw::Standard, InitialState::Ket0),
            Preset::Ket0BangBang => (ControlLaw::BangBang, InitialState::Ket0),
            Preset::HalfNonSmooth => (ControlLaw::NonSmooth, InitialState::Half),
        };
        cfg.control_law = law;
        cfg.psi0 = psi0;
        cfg.k = DEFAULT_K;
        cfg.alpha = DEFAULT_ALPHA;
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown preset `{s}`"))
    }
}

/// Fully resolved experiment settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub control_law: ControlLaw,
    pub k: f64,
    pub alpha: f64,
    pub psi0: InitialState,
    pub dt: f64,
    pub t_max: f64,
    pub eps_settle: f64,
    pub output_path: Option<PathBuf>,
    pub representation: Representation,
    /// Rate magnitude used in the neighborhood settling bound.
    pub c1: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            control_law: ControlLaw::NonSmooth,
            k: DEFAULT_K,
            alpha: DEFAULT_ALPHA,
            psi0: InitialState::Ket0,
            dt: DEFAULT_DT,
            t_max: DEFAULT_T_MAX,
            eps_settle: DEFAULT_EPS_SETTLE,
            output_path: None,
            representation: Representation::State,
            c1: DEFAULT_C1,
        }
    }
}

impl ExperimentConfig {
    pub fn from_preset(preset: Preset) -> Self {
        let mut cfg = Self::default();
        preset.apply(&mut cfg);
        cfg
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("k", self.k),
            ("dt", self.dt),
            ("t_max", self.t_max),
            ("eps_settle", self.eps_settle),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::Validation(format!(
                    "{key} must be positive and finite, got {v}"
                )));
            }
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(ConfigError::Validation(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if self.dt > self.t_max {
            return Err(ConfigError::Validation(format!(
                "dt ({}) must not exceed t_max ({})",
                self.dt, self.t_max
            )));
        }
        if !(self.c1 != 0.0 && self.c1.is_finite()) {
            return Err(ConfigError::Validation(format!(
                "c1 must be finite and nonzero, got {}",
                self.c1
            )));
        }
        if self.representation == Representation::Polar && self.control_law != ControlLaw::NonSmooth {
            return Err(ConfigError::Validation(
                "the polar representation only supports the nonsmooth law".into(),
            ));
        }
        self.psi0
            .to_state()
            .map_err(|e| ConfigError::Validation(format!("psi0 does not normalize: {e}")))?;
        Ok(())
    }
}

/// Command-line flags for a single run; every field overrides the file.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Start from a built-in setup (ket0-nonsmooth, ket0-standard, ket0-bangbang, half-nonsmooth).
    #[arg(long)]
    pub preset: Option<String>,
    /// TOML file with the same keys as the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// nonsmooth, standard or bangbang.
    #[arg(long = "law")]
    pub control_law: Option<String>,
    /// Feedback gain K.
    #[arg(long, short = 'k')]
    pub k: Option<f64>,
    /// Fractional exponent, 0 < alpha < 1.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// ket0, ket1, half, or "re1,im1,re2,im2".
    #[arg(long, allow_hyphen_values = true)]
    pub psi0: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub dt: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub t_max: Option<f64>,
    /// Lyapunov threshold for settling detection.
    #[arg(long, allow_negative_numbers = true)]
    pub eps_settle: Option<f64>,
    /// Trajectory CSV path; the report goes next to it with a .report extension.
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
    /// state, polar or coherence.
    #[arg(long)]
    pub representation: Option<String>,
    /// Rate magnitude for the neighborhood settling bound.
    #[arg(long, allow_negative_numbers = true)]
    pub c1: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Psi0Value {
    Name(String),
    Reals(Vec<f64>),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    preset: Option<String>,
    control_law: Option<String>,
    #[serde(alias = "K")]
    k: Option<f64>,
    alpha: Option<f64>,
    psi0: Option<Psi0Value>,
    dt: Option<f64>,
    t_max: Option<f64>,
    eps_settle: Option<f64>,
    output_path: Option<PathBuf>,
    representation: Option<String>,
    c1: Option<f64>,
}

fn parse_key<T: FromStr>(key: &str, raw: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    raw.parse().map_err(|e: T::Err| ConfigError::Parse {
        key: key.to_string(),
        message: e.to_string(),
    })
}

fn toml_error(e: toml::de::Error) -> ConfigError {
    let message = e.message().to_string();
    let key = message
        .strip_prefix("unknown field `")
        .and_then(|rest| rest.split('`').next())
        .unwrap_or("file")
        .to_string();
    ConfigError::Parse { key, message }
}

impl RunArgs {
    /// Applies file contents and then these flags on top of the defaults.
    pub fn resolve(&self, file: Option<&str>) -> Result<ExperimentConfig, ConfigError> {
        let fc: FileConfig = match file {
            Some(text) => toml::from_str(text).map_err(toml_error)?,
            None => FileConfig::default(),
        };

        let mut cfg = ExperimentConfig::default();
        match (&self.preset, &fc.preset) {
            (Some(p), _) => parse_key::<Preset>("preset", p)?.apply(&mut cfg),
            (None, Some(p)) => parse_key::<Preset>("preset", p)?.apply(&mut cfg),
            (None, None) => {}
        }

        if let Some(v) = &fc.control_law {
            cfg.control_law = parse_key("control_law", v)?;
        }
        if let Some(v) = fc.k {
            cfg.k = v;
        }
        if let Some(v) = fc.alpha {
            cfg.alpha = v;
        }
        match &fc.psi0 {
            Some(Psi0Value::Name(s)) => cfg.psi0 = parse_key("psi0", s)?,
            Some(Psi0Value::Reals(v)) => {
                cfg.psi0 = InitialState::from_reals(v).map_err(|message| ConfigError::Parse {
                    key: "psi0".into(),
                    message,
                })?
            }
            None => {}
        }
        if let Some(v) = fc.dt {
            cfg.dt = v;
        }
        if let Some(v) = fc.t_max {
            cfg.t_max = v;
        }
        if let Some(v) = fc.eps_settle {
            cfg.eps_settle = v;
        }
        if let Some(v) = fc.output_path {
            cfg.output_path = Some(v);
        }
        if let Some(v) = &fc.representation {
            cfg.representation = parse_key("representation", v)?;
        }
        if let Some(v) = fc.c1 {
            cfg.c1 = v;
        }

        if let Some(v) = &self.control_law {
            cfg.control_law = parse_key("--law", v)?;
        }
        if let Some(v) = self.k {
            cfg.k = v;
        }
        if let Some(v) = self.alpha {
            cfg.alpha = v;
        }
        if let Some(v) = &self.psi0 {
            cfg.psi0 = parse_key("--psi0", v)?;
        }
        if let Some(v) = self.dt {
            cfg.dt = v;
        }
        if let Some(v) = self.t_max {
            cfg.t_max = v;
        }
        if let Some(v) = self.eps_settle {
            cfg.eps_settle = v;
        }
        if let Some(v) = &self.output {
            cfg.output_path = Some(v.clone());
        }
        if let Some(v) = &self.representation {
            cfg.representation = parse_key("--representation", v)?;
        }
        if let Some(v) = self.c1 {
            cfg.c1 = v;
        }

        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(clap::Parser)]
#[command(no_binary_name = true)]
struct RunOnly {
    #[command(flatten)]
    args: RunArgs,
}

/// Parses `run` flags (without the program or subcommand name) and merges
/// them with optional TOML `file` contents.
pub fn parse_config<S: AsRef<str>>(args: &[S], file: Option<&str>) -> Result<ExperimentConfig, ConfigError> {
    use clap::error::ContextKind;
    use clap::Parser;

    let parsed = RunOnly::try_parse_from(args.iter().map(|s| s.as_ref())).map_err(|e| {
        let key = e
            .get(ContextKind::InvalidArg)
            .map(|v| v.to_string())
            .unwrap_or_else(|| "args".into());
        ConfigError::Parse {
            key,
            message: e.kind().to_string(),
        }
    })?;
    parsed.args.resolve(file)
}
