use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bath::{
    compute_couplings_with, generate_bath_with, parse_bath, parse_supercell, BathSpin, CouplingMode, Dissipator,
    GenerateOptions, JumpOp, Supercell,
};
use crate::cce::{uniform_times, EngineConfig, Method, PulseSequence, SpinSystem};
use crate::noise::{parse_spectrum, SpectralDensity};
use crate::spinops::{CentralSpin, IsotopeTable, LevelSelector, Spin};

use super::ConfigError;

/// Physical dimension of a unit-tagged config value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Field,
    Frequency,
    Time,
    Length,
}

impl Dimension {
    fn units(self) -> &'static [(&'static str, f64)] {
        const TWO_PI: f64 = 2.0 * PI;
        match self {
            Dimension::Field => &[("G", 1.0), ("kG", 1e3), ("mT", 10.0), ("T", 1e4)],
            Dimension::Frequency => &[
                ("rad/ms", 1.0),
                ("rad/us", 1e3),
                ("rad/s", 1e-3),
                ("Hz", TWO_PI * 1e-3),
                ("kHz", TWO_PI),
                ("MHz", TWO_PI * 1e3),
                ("GHz", TWO_PI * 1e6),
            ],
            Dimension::Time => &[("ms", 1.0), ("s", 1e3), ("us", 1e-3), ("µs", 1e-3), ("ns", 1e-6)],
            Dimension::Length => &[("A", 1.0), ("Å", 1.0), ("nm", 10.0), ("pm", 0.01)],
        }
    }

    /// Internal unit used when echoing values.
    fn canonical(self) -> &'static str {
        self.units()[0].0
    }

    fn name(self) -> &'static str {
        match self {
            Dimension::Field => "magnetic field",
            Dimension::Frequency => "frequency",
            Dimension::Time => "time",
            Dimension::Length => "length",
        }
    }
}

/// Parses `"<number> <unit>"` into internal units (G, rad/ms, ms, Å).
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64, ConfigError> {
    let t = text.trim();
    let split = t.find(|c: char| c.is_whitespace()).ok_or_else(|| ConfigError::Unit {
        value: text.to_string(),
        msg: format!("missing unit; expected a {} such as `1 {}`", dim.name(), dim.canonical()),
    })?;
    let (num, unit) = (&t[..split], t[split..].trim());
    let x: f64 = num.parse().map_err(|_| ConfigError::Unit {
        value: text.to_string(),
        msg: format!("`{num}` is not a number"),
    })?;
    if x.is_nan() {
        return Err(ConfigError::Unit {
            value: text.to_string(),
            msg: "value is NaN".into(),
        });
    }
    let factor = dim.units().iter().find(|(u, _)| *u == unit).map(|(_, f)| *f).ok_or_else(|| {
        let known: Vec<&str> = dim.units().iter().map(|(u, _)| *u).collect();
        ConfigError::Unit {
            value: text.to_string(),
            msg: format!("`{unit}` is not a {} unit (expected one of {})", dim.name(), known.join(", ")),
        }
    })?;
    Ok(x * factor)
}

macro_rules! quantity {
    ($name:ident, $dim:expr) => {
        #[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
        #[serde(try_from = "String", into = "String")]
        pub struct $name(pub f64);

        impl TryFrom<String> for $name {
            type Error = ConfigError;
            fn try_from(s: String) -> Result<Self, ConfigError> {
                parse_quantity(&s, $dim).map($name)
            }
        }

        impl From<$name> for String {
            fn from(q: $name) -> String {
                format!("{:?} {}", q.0, $dim.canonical())
            }
        }
    };
}

quantity!(Field, Dimension::Field);
quantity!(Frequency, Dimension::Frequency);
quantity!(Time, Dimension::Time);
quantity!(Length, Dimension::Length);

/// Known sections and their keys, used for strict rejection.
pub const SCHEMA: &[(&str, &[&str])] = &[
    ("central", &["spin", "g", "d", "e", "levels", "level_basis"]),
    ("field", &["b"]),
    (
        "bath",
        &[
            "source",
            "lattice",
            "cell_file",
            "isotopes",
            "radius",
            "seed",
            "realization",
            "file",
            "couplings",
            "r_min",
            "max_spins",
            "dissipation_rate",
            "dissipation_jump",
        ],
    ),
    (
        "engine",
        &[
            "method",
            "order",
            "r_dipole",
            "bath_radius",
            "samples",
            "seed",
            "epsilon",
            "mean_field",
            "hybrid_inner",
            "max_dim",
        ],
    ),
    ("pulses", &["sequence", "fractions"]),
    ("time", &["t_max", "points"]),
    ("output", &["dir", "prefix"]),
    (
        "noise",
        &[
            "model",
            "variance",
            "tau_c",
            "s0",
            "file",
            "sequences",
            "qubit_frequency",
            "filter_points",
            "filter_omega_max",
            "bloch_detuning",
            "monte_carlo",
            "mc_seed",
        ],
    ),
    ("converge", &["orders", "r_dipoles", "radii", "realizations", "tolerance"]),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CentralConfig {
    pub spin: f64,
    pub g: f64,
    pub d: Frequency,
    pub e: Frequency,
    pub levels: [f64; 2],
    /// `sz` or `eigen`.
    pub level_basis: String,
}

impl Default for CentralConfig {
    fn default() -> Self {
        Self {
            spin: 1.0,
            g: 2.0028,
            d: Frequency(2870.0 * 2.0 * PI * 1e3),
            e: Frequency(0.0),
            levels: [0.0, -1.0],
            level_basis: "sz".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldConfig {
    pub b: [Field; 3],
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self {
            b: [Field(0.0), Field(0.0), Field(500.0)],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BathConfig {
    /// `generate` or `file`.
    pub source: String,
    /// `diamond`, `sic` or `file` (with `cell_file`).
    pub lattice: String,
    pub cell_file: Option<String>,
    /// `isotope:fraction` overrides of the lattice abundances.
    pub isotopes: Vec<String>,
    pub radius: Length,
    pub seed: u64,
    pub realization: u64,
    pub file: Option<String>,
    /// `point-dipole`, `file-only` or `uncoupled`.
    pub couplings: String,
    pub r_min: Length,
    pub max_spins: usize,
    pub dissipation_rate: Frequency,
    pub dissipation_jump: String,
}

impl Default for BathConfig {
    fn default() -> Self {
        Self {
            source: "generate".into(),
            lattice: "diamond".into(),
            cell_file: None,
            isotopes: Vec::new(),
            radius: Length(40.0),
            seed: 0,
            realization: 0,
            file: None,
            couplings: "point-dipole".into(),
            r_min: Length(crate::spinops::DEFAULT_R_MIN),
            max_spins: crate::bath::DEFAULT_MAX_SPINS,
            dissipation_rate: Frequency(0.0),
            dissipation_jump: "z".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineSection {
    pub method: String,
    pub order: usize,
    pub r_dipole: Length,
    pub bath_radius: Length,
    pub samples: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub mean_field: bool,
    pub hybrid_inner: usize,
    pub max_dim: usize,
}

impl Default for EngineSection {
    fn default() -> Self {
        let e = EngineConfig::default();
        Self {
            method: e.method.name().into(),
            order: e.order,
            r_dipole: Length(e.r_dipole),
            bath_radius: Length(e.bath_radius),
            samples: e.samples,
            seed: e.seed,
            epsilon: e.epsilon,
            mean_field: e.mean_field,
            hybrid_inner: e.hybrid_inner,
            max_dim: e.max_dim,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseConfig {
    /// `ramsey`, `hahn`, `cpmg-N` or `custom`.
    pub sequence: String,
    /// Pulse positions as fractions of the total time, for `custom`.
    pub fractions: Vec<f64>,
}

impl Default for PulseConfig {
    fn default() -> Self {
        Self {
            sequence: "hahn".into(),
            fractions: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeConfig {
    pub t_max: Time,
    pub points: usize,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self {
            t_max: Time(2.0),
            points: 201,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
    pub prefix: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: "out".into(),
            prefix: "run".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    /// `white`, `lorentzian`, `static` or `tabulated`.
    pub model: String,
    /// (rad/ms)²
    pub variance: f64,
    pub tau_c: Time,
    /// (rad/ms)²·ms
    pub s0: f64,
    /// Two-column spectrum file for `tabulated`.
    pub file: Option<String>,
    pub sequences: Vec<String>,
    pub qubit_frequency: Frequency,
    pub filter_points: usize,
    /// Upper end of the filter-function table; zero picks `40π/t_max`.
    pub filter_omega_max: Frequency,
    /// Rotating-frame detuning for the Bloch trajectory, if wanted.
    pub bloch_detuning: Option<Frequency>,
    /// Ornstein–Uhlenbeck trajectories for a Lorentzian cross-check; 0 skips.
    pub monte_carlo: usize,
    pub mc_seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            model: "lorentzian".into(),
            variance: 1.0,
            tau_c: Time(1.0),
            s0: 1.0,
            file: None,
            sequences: vec!["ramsey".into(), "hahn".into()],
            qubit_frequency: Frequency(0.0),
            filter_points: 401,
            filter_omega_max: Frequency(0.0),
            bloch_detuning: None,
            monte_carlo: 0,
            mc_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergeConfig {
    pub orders: Vec<usize>,
    pub r_dipoles: Vec<Length>,
    pub radii: Vec<Length>,
    pub realizations: usize,
    pub tolerance: f64,
}

impl Default for ConvergeConfig {
    fn default() -> Self {
        Self {
            orders: vec![1, 2, 3],
            r_dipoles: Vec::new(),
            radii: Vec::new(),
            realizations: 1,
            tolerance: 0.01,
        }
    }
}

/// Fully resolved run configuration. Every key has an explicit value after
/// loading, so the serialized form is a complete record of the run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub central: CentralConfig,
    pub field: FieldConfig,
    pub bath: BathConfig,
    pub engine: EngineSection,
    pub pulses: PulseConfig,
    pub time: TimeConfig,
    pub output: OutputConfig,
    pub noise: NoiseConfig,
    pub converge: ConvergeConfig,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn nearest<'a>(key: &str, candidates: impl IntoIterator<Item = &'a str>) -> Option<&'a str> {
    candidates
        .into_iter()
        .map(|c| (strsim::damerau_levenshtein(key, c), c))
        .min()
        .filter(|(d, c)| *d <= 3.max(c.len() / 2))
        .map(|(_, c)| c)
}

fn unknown(path: String, key: &str, candidates: &[&str]) -> ConfigError {
    ConfigError::UnknownKey {
        suggestion: nearest(key, candidates.iter().copied()).map(str::to_string),
        key: path,
    }
}

/// Rejects any key not in [`SCHEMA`], suggesting the closest valid one.
fn check_keys(table: &toml::Table) -> Result<(), ConfigError> {
    let sections: Vec<&str> = SCHEMA.iter().map(|(s, _)| *s).collect();
    for (name, value) in table {
        let Some((_, keys)) = SCHEMA.iter().find(|(s, _)| s == name) else {
            return Err(unknown(name.clone(), name, &sections));
        };
        let toml::Value::Table(inner) = value else {
            return Err(ConfigError::Invalid(format!("`{name}` must be a section")));
        };
        for key in inner.keys() {
            if !keys.contains(&key.as_str()) {
                let path = format!("{name}.{key}");
                return Err(unknown(path, key, keys));
            }
        }
    }
    Ok(())
}

/// Splits `section.key=value`; the value is read as a TOML literal and falls
/// back to a plain string.
fn apply_override(table: &mut toml::Table, spec: &str) -> Result<(), ConfigError> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| ConfigError::Invalid(format!("override `{spec}` is not of the form section.key=value")))?;
    let (section, key) = path
        .trim()
        .split_once('.')
        .ok_or_else(|| ConfigError::Invalid(format!("override key `{path}` must be section.key")))?;
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let entry = table
        .entry(section.to_string())
        .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    match entry {
        toml::Value::Table(t) => {
            t.insert(key.to_string(), value);
            Ok(())
        }
        _ => Err(ConfigError::Invalid(format!("`{section}` must be a section"))),
    }
}

impl RunConfig {
    /// Parses TOML text, applies `section.key=value` overrides and validates.
    pub fn from_toml(text: &str, overrides: &[String], base_dir: &Path) -> Result<Self, ConfigError> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.message().to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        check_keys(&table)?;
        let mut cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Invalid(e.message().to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    /// The resolved configuration as TOML, defaults included.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration always serializes")
    }

    pub fn resolve_path(&self, p: &str) -> PathBuf {
        let path = Path::new(p);
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        self.central_spin()?;
        self.engine_config()?;
        self.pulse_sequence()?;
        self.times()?;
        if !matches!(self.bath.source.as_str(), "generate" | "file") {
            return bad(format!("bath.source must be `generate` or `file`, got `{}`", self.bath.source));
        }
        if self.bath.source == "file" {
            let Some(f) = &self.bath.file else {
                return bad("bath.source = \"file\" needs bath.file".into());
            };
            self.require_file(f, "bath.file")?;
        } else {
            self.supercell()?;
        }
        if !(self.bath.radius.0 > 0.0) {
            return bad("bath.radius must be positive".into());
        }
        self.coupling_mode()?;
        if JumpOp::parse(&self.bath.dissipation_jump).is_none() {
            return bad(format!(
                "bath.dissipation_jump `{}` is not one of x, y, z, plus, minus",
                self.bath.dissipation_jump
            ));
        }
        if !(self.bath.dissipation_rate.0 >= 0.0) {
            return bad("bath.dissipation_rate must be non-negative".into());
        }
        self.spectral_density()?;
        for s in &self.noise.sequences {
            PulseSequence::parse(s).map_err(|e| ConfigError::Invalid(format!("noise.sequences: {e}")))?;
        }
        if self.noise.filter_points < 2 {
            return bad("noise.filter_points must be at least 2".into());
        }
        if !(self.converge.tolerance > 0.0) {
            return bad("converge.tolerance must be positive".into());
        }
        if self.converge.realizations == 0 {
            return bad("converge.realizations must be at least 1".into());
        }
        Ok(())
    }

    fn require_file(&self, f: &str, key: &str) -> Result<PathBuf, ConfigError> {
        let p = self.resolve_path(f);
        if !p.is_file() {
            return Err(ConfigError::MissingFile {
                key: key.to_string(),
                path: p.display().to_string(),
            });
        }
        Ok(p)
    }

    fn read(&self, f: &str, key: &str) -> Result<(String, String), ConfigError> {
        let p = self.require_file(f, key)?;
        let text = std::fs::read_to_string(&p).map_err(|e| ConfigError::Invalid(format!("{}: {e}", p.display())))?;
        Ok((text, p.display().to_string()))
    }

    pub fn central_spin(&self) -> Result<CentralSpin, ConfigError> {
        let c = &self.central;
        let s = Spin::from_f64(c.spin).map_err(|e| ConfigError::Invalid(format!("central.spin: {e}")))?;
        let levels = match c.level_basis.as_str() {
            "sz" => LevelSelector::Sz(c.levels[0], c.levels[1]),
            "eigen" => LevelSelector::Eigen(c.levels[0], c.levels[1]),
            other => {
                return Err(ConfigError::Invalid(format!(
                    "central.level_basis must be `sz` or `eigen`, got `{other}`"
                )))
            }
        };
        CentralSpin::electron(s, c.g, c.d.0, c.e.0, levels).map_err(|e| ConfigError::Invalid(format!("central: {e}")))
    }

    pub fn field(&self) -> [f64; 3] {
        self.field.b.map(|f| f.0)
    }

    pub fn engine_config(&self) -> Result<EngineConfig, ConfigError> {
        let e = &self.engine;
        let method: Method = e.method.parse().map_err(|err| ConfigError::Invalid(format!("engine.method: {err}")))?;
        let cfg = EngineConfig {
            method,
            order: e.order,
            r_dipole: e.r_dipole.0,
            bath_radius: e.bath_radius.0,
            samples: e.samples,
            seed: e.seed,
            epsilon: e.epsilon,
            mean_field: e.mean_field,
            hybrid_inner: e.hybrid_inner,
            max_dim: e.max_dim,
        };
        cfg.validate().map_err(|err| ConfigError::Invalid(format!("engine: {err}")))?;
        Ok(cfg)
    }

    pub fn pulse_sequence(&self) -> Result<PulseSequence, ConfigError> {
        let p = &self.pulses;
        let seq = if p.sequence == "custom" {
            PulseSequence::custom(p.fractions.clone())
        } else if !p.fractions.is_empty() {
            return Err(ConfigError::Invalid("pulses.fractions requires pulses.sequence = \"custom\"".into()));
        } else {
            PulseSequence::parse(&p.sequence)
        };
        seq.map_err(|e| ConfigError::Invalid(format!("pulses: {e}")))
    }

    pub fn times(&self) -> Result<Vec<f64>, ConfigError> {
        let t = &self.time;
        if !(t.t_max.0 > 0.0 && t.t_max.0.is_finite()) || t.points < 2 {
            return Err(ConfigError::Invalid("time needs t_max > 0 and at least 2 points".into()));
        }
        Ok(uniform_times(t.t_max.0, t.points))
    }

    pub fn coupling_mode(&self) -> Result<CouplingMode, ConfigError> {
        match self.bath.couplings.as_str() {
            "point-dipole" => Ok(CouplingMode::PointDipole),
            "file-only" => Ok(CouplingMode::FileOnly),
            "uncoupled" => Ok(CouplingMode::Uncoupled),
            other => Err(ConfigError::Invalid(format!(
                "bath.couplings must be point-dipole, file-only or uncoupled, got `{other}`"
            ))),
        }
    }

    /// Lattice with the abundance overrides of `bath.isotopes` applied.
    pub fn supercell(&self) -> Result<Supercell, ConfigError> {
        let mut cell = match self.bath.lattice.as_str() {
            "diamond" => Supercell::diamond(0.011),
            "sic" => Supercell::silicon_carbide(0.047, 0.011),
            "file" => {
                let f = self
                    .bath
                    .cell_file
                    .as_deref()
                    .ok_or_else(|| ConfigError::Invalid("bath.lattice = \"file\" needs bath.cell_file".into()))?;
                let (text, name) = self.read(f, "bath.cell_file")?;
                parse_supercell(&text, &name).map_err(|e| ConfigError::Invalid(e.to_string()))?
            }
            other => {
                return Err(ConfigError::Invalid(format!(
                    "bath.lattice must be diamond, sic or file, got `{other}`"
                )))
            }
        };
        let table = IsotopeTable::builtin();
        for entry in &self.bath.isotopes {
            let (name, frac) = entry
                .split_once(':')
                .ok_or_else(|| ConfigError::Invalid(format!("bath.isotopes entry `{entry}` must be isotope:fraction")))?;
            let name = name.trim();
            if table.get(name).is_none() {
                return Err(ConfigError::UnknownIsotope {
                    name: name.to_string(),
                    available: table.names().join(", "),
                });
            }
            let frac: f64 = frac
                .trim()
                .parse()
                .map_err(|_| ConfigError::Invalid(format!("bath.isotopes entry `{entry}`: bad fraction")))?;
            let element: String = name.trim_start_matches(|c: char| c.is_ascii_digit()).to_string();
            let isos = cell.abundances.get_mut(&element).ok_or_else(|| {
                ConfigError::Invalid(format!("bath.isotopes: lattice has no `{element}` sites for {name}"))
            })?;
            match isos.iter_mut().find(|(n, _)| n == name) {
                Some(slot) => slot.1 = frac,
                None => isos.push((name.to_string(), frac)),
            }
        }
        cell.validate().map_err(|e| ConfigError::Invalid(format!("bath: {e}")))?;
        Ok(cell)
    }

    /// Bath spins for realization `stream` (ignored for file baths).
    pub fn bath_spins(&self, stream: u64) -> crate::Result<Vec<BathSpin>> {
        let mut spins = if self.bath.source == "file" {
            let (text, name) = self.read(self.bath.file.as_deref().unwrap_or_default(), "bath.file")?;
            parse_bath(&text, &name, IsotopeTable::builtin())?
        } else {
            let opts = GenerateOptions {
                radius: self.bath.radius.0,
                seed: self.bath.seed,
                stream,
                r_min: self.bath.r_min.0,
                max_spins: self.bath.max_spins,
            };
            generate_bath_with(&self.supercell()?, IsotopeTable::builtin(), &opts)?
        };
        if self.bath.dissipation_rate.0 > 0.0 {
            let jump = JumpOp::parse(&self.bath.dissipation_jump).expect("validated");
            for s in spins.iter_mut() {
                s.dissipators.push(Dissipator {
                    rate: self.bath.dissipation_rate.0,
                    jump,
                });
            }
        }
        Ok(spins)
    }

    /// Central spin, bath of realization `stream` and couplings.
    pub fn spin_system(&self, stream: u64) -> crate::Result<SpinSystem> {
        let central = self.central_spin()?;
        let bath = self.bath_spins(stream)?;
        let couplings = compute_couplings_with(&central, &bath, self.coupling_mode()?, &BTreeMap::new(), self.bath.r_min.0)?;
        Ok(SpinSystem {
            central,
            bath,
            couplings,
            b: self.field(),
        })
    }

    pub fn spectral_density(&self) -> Result<SpectralDensity, ConfigError> {
        let n = &self.noise;
        let s = match n.model.as_str() {
            "white" => SpectralDensity::White { s0: n.s0 },
            "lorentzian" => SpectralDensity::Lorentzian {
                variance: n.variance,
                tau_c: n.tau_c.0,
            },
            "static" => SpectralDensity::Static { variance: n.variance },
            "tabulated" => {
                let f = n
                    .file
                    .as_deref()
                    .ok_or_else(|| ConfigError::Invalid("noise.model = \"tabulated\" needs noise.file".into()))?;
                let (text, name) = self.read(f, "noise.file")?;
                parse_spectrum(&text, &name).map_err(|e| ConfigError::Invalid(e.to_string()))?
            }
            other => {
                return Err(ConfigError::Invalid(format!(
                    "noise.model must be white, lorentzian, static or tabulated, got `{other}`"
                )))
            }
        };
        s.validate().map_err(|e| ConfigError::Invalid(format!("noise: {e}")))?;
        Ok(s)
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_toml())
    }
}
