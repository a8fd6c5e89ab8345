use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::linalg::C64;
use crate::Error;

use super::RunConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes through a temporary file in the same directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> crate::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_err(dir, e))?;
    tmp.write_all(contents).map_err(|e| io_err(path, e))?;
    tmp.as_file().sync_all().map_err(|e| io_err(path, e))?;
    tmp.persist(path).map_err(|e| io_err(path, e.error))?;
    Ok(())
}

/// Run identity repeated at the top of every output file.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub engine: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub bath_seed: u64,
    pub guarded: usize,
    pub config: RunConfig,
}

impl Provenance {
    pub fn new(command: &str, config: &RunConfig, guarded: usize) -> Self {
        Self {
            engine: env!("CARGO_PKG_NAME"),
            version: VERSION,
            command: command.to_string(),
            seed: config.engine.seed,
            bath_seed: config.bath.seed,
            guarded,
            config: config.clone(),
        }
    }

    /// `#`-prefixed header lines.
    pub fn header(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {} {} {}", self.engine, self.version, self.command);
        let _ = writeln!(out, "# seed = {}", self.seed);
        let _ = writeln!(out, "# bath_seed = {}", self.bath_seed);
        let _ = writeln!(out, "# guarded = {}", self.guarded);
        out.push_str("# resolved configuration:\n");
        for line in self.config.to_toml().lines() {
            let _ = writeln!(out, "#   {line}");
        }
        out
    }
}

/// Scientific notation with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn curve_csv(prov: &Provenance, times: &[f64], values: &[C64]) -> String {
    let mut out = prov.header();
    out.push_str("t_ms,re_L,im_L,abs_L\n");
    for (t, v) in times.iter().zip(values) {
        let _ = writeln!(out, "{},{},{},{}", num(*t), num(v.re), num(v.im), num(v.norm()));
    }
    out
}

/// Generic table with a provenance header.
pub fn table_csv(prov: &Provenance, columns: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = prov.header();
    out.push_str(&columns.join(","));
    out.push('\n');
    for r in rows {
        let line: Vec<String> = r.iter().map(|&x| num(x)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct Summary<'a, T: Serialize> {
    provenance: &'a Provenance,
    #[serde(flatten)]
    body: &'a T,
}

pub fn summary_json<T: Serialize>(prov: &Provenance, body: &T) -> String {
    let mut s = serde_json::to_string_pretty(&Summary { provenance: prov, body }).expect("summary serializes");
    s.push('\n');
    s
}

/// Reads `t` and `|L|` from a curve CSV, skipping `#` lines and the header.
pub fn read_curve(text: &str, source: &str) -> Result<(Vec<f64>, Vec<f64>), super::ConfigError> {
    let mut t = Vec::new();
    let mut a = Vec::new();
    let mut abs_col = None;
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let Some(col) = abs_col else {
            // header: |L| column by name, otherwise the last one
            abs_col = Some(fields.iter().position(|f| *f == "abs_L").unwrap_or(fields.len() - 1));
            continue;
        };
        let bad = || super::ConfigError::Invalid(format!("{source}:{}: malformed row", k + 1));
        let parse = |i: usize| fields.get(i).and_then(|f| f.parse::<f64>().ok()).ok_or_else(bad);
        t.push(parse(0)?);
        a.push(parse(col)?);
    }
    Ok((t, a))
}
