//! Physical constants, unit conversions and the isotope table.
//!
//! Both tables ship as plain-text data files embedded at compile time; a
//! different isotope table can be loaded from disk at run time.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use std::sync::LazyLock;

use super::{Spin, SpinError};

const CONSTANTS_TXT: &str = include_str!("../../data/constants.txt");
const ISOTOPES_TXT: &str = include_str!("../../data/isotopes.txt");

/// 1 MHz (linear frequency) in rad/ms.
pub const MHZ_TO_RAD_PER_MS: f64 = 2.0 * PI * 1.0e3;
/// Gyromagnetic ratio: rad/ms/G to rad/s/T.
pub const GAMMA_INTERNAL_TO_SI: f64 = 1.0e7;
pub const ANGSTROM_TO_M: f64 = 1.0e-10;
/// rad/s to rad/ms.
pub const PER_SECOND_TO_PER_MS: f64 = 1.0e-3;
/// Tesla per Gauss.
pub const GAUSS_TO_TESLA: f64 = 1.0e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalConstants {
    pub mu0_over_4pi: f64,
    pub hbar: f64,
    pub mu_b: f64,
    pub mu_n: f64,
    pub g_e: f64,
}

impl PhysicalConstants {
    pub fn parse(text: &str) -> Result<Self, SpinError> {
        let mut map = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let (Some(name), Some(value)) = (it.next(), it.next()) else {
                return Err(SpinError::Table(format!("constants line {}: expected `name value unit`", lineno + 1)));
            };
            let value: f64 = value
                .parse()
                .map_err(|_| SpinError::Table(format!("constants line {}: bad number `{value}`", lineno + 1)))?;
            map.insert(name.to_string(), value);
        }
        let get = |k: &str| {
            map.get(k)
                .copied()
                .ok_or_else(|| SpinError::Table(format!("constants table lacks `{k}`")))
        };
        Ok(Self {
            mu0_over_4pi: get("mu0_over_4pi")?,
            hbar: get("hbar")?,
            mu_b: get("mu_b")?,
            mu_n: get("mu_n")?,
            g_e: get("g_e")?,
        })
    }

    pub fn builtin() -> &'static PhysicalConstants {
        &BUILTIN_CONSTANTS
    }

    /// μB/ħ in rad/ms/G.
    pub fn bohr_rate(&self) -> f64 {
        self.mu_b / self.hbar / GAMMA_INTERNAL_TO_SI
    }

    /// Free-electron gyromagnetic ratio γe = ge·μB/ħ in rad/ms/G.
    pub fn gamma_e(&self) -> f64 {
        self.g_e * self.bohr_rate()
    }

    /// Prefactor turning `γ1 γ2 / r³` (rad/ms/G, Å) into rad/ms for a
    /// point-dipole coupling.
    pub fn dipolar_prefactor(&self) -> f64 {
        self.mu0_over_4pi * GAMMA_INTERNAL_TO_SI * GAMMA_INTERNAL_TO_SI * self.hbar
            / ANGSTROM_TO_M.powi(3)
            * PER_SECOND_TO_PER_MS
    }
}

static BUILTIN_CONSTANTS: LazyLock<PhysicalConstants> =
    LazyLock::new(|| PhysicalConstants::parse(CONSTANTS_TXT).expect("embedded constants table is valid"));

/// Isotope identity and nuclear (or electronic) spin properties.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinSpecies {
    pub name: String,
    pub s: Spin,
    /// rad/ms/G, sign preserved.
    pub gamma: f64,
    /// Electric quadrupole moment in millibarn.
    pub q_moment: f64,
    pub abundance: f64,
}

impl SpinSpecies {
    pub fn new(name: &str, s: Spin, gamma: f64, abundance: f64, q_moment: f64) -> Result<Self, SpinError> {
        if !gamma.is_finite() {
            return Err(SpinError::InvalidSpecies(format!("{name}: gamma must be finite")));
        }
        if !(0.0..=1.0).contains(&abundance) {
            return Err(SpinError::InvalidSpecies(format!("{name}: abundance {abundance} outside [0, 1]")));
        }
        Ok(Self {
            name: name.to_string(),
            s,
            gamma,
            q_moment,
            abundance,
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct IsotopeTable {
    species: BTreeMap<String, SpinSpecies>,
}

impl IsotopeTable {
    pub fn parse(text: &str) -> Result<Self, SpinError> {
        let mut species = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 5 {
                return Err(SpinError::Table(format!(
                    "isotope line {}: expected 5 fields `name spin gamma abundance q_moment`, got {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| SpinError::Table(format!("isotope line {}: bad number `{s}`", lineno + 1)))
            };
            let s = Spin::parse(fields[1])?;
            let sp = SpinSpecies::new(fields[0], s, num(fields[2])?, num(fields[3])?, num(fields[4])?)?;
            species.insert(sp.name.clone(), sp);
        }
        Ok(Self { species })
    }

    pub fn builtin() -> &'static IsotopeTable {
        &BUILTIN_ISOTOPES
    }

    pub fn get(&self, name: &str) -> Option<&SpinSpecies> {
        self.species.get(name)
    }

    pub fn lookup(&self, name: &str) -> Result<&SpinSpecies, SpinError> {
        self.get(name).ok_or_else(|| SpinError::UnknownIsotope {
            name: name.to_string(),
            available: self.names().join(", "),
        })
    }

    pub fn names(&self) -> Vec<String> {
        self.species.keys().cloned().collect()
    }

    pub fn insert(&mut self, sp: SpinSpecies) {
        self.species.insert(sp.name.clone(), sp);
    }
}

static BUILTIN_ISOTOPES: LazyLock<IsotopeTable> =
    LazyLock::new(|| IsotopeTable::parse(ISOTOPES_TXT).expect("embedded isotope table is valid"));
