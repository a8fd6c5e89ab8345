use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::spinops::{IsotopeTable, Tensor3, TensorUnit};

use super::{BathError, BathSpin, Supercell};

fn parse_err(source_name: &str, line: usize, msg: impl Into<String>) -> BathError {
    BathError::Parse {
        source_name: source_name.to_string(),
        line,
        msg: msg.into(),
    }
}

fn numbers(fields: &[&str], source_name: &str, line: usize) -> Result<Vec<f64>, BathError> {
    fields
        .iter()
        .map(|f| {
            f.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| parse_err(source_name, line, format!("bad number `{f}`")))
        })
        .collect()
}

/// Reads `isotope x y z [A (9, MHz)] [Q (9, MHz)]` records, positions in Å.
pub fn parse_bath(text: &str, source_name: &str, table: &IsotopeTable) -> Result<Vec<BathSpin>, BathError> {
    let mut bath = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        if !matches!(fields.len(), 4 | 13 | 22) {
            return Err(parse_err(
                source_name,
                line,
                format!("expected 4, 13 or 22 fields, got {}", fields.len()),
            ));
        }
        let species = table.get(fields[0]).ok_or_else(|| BathError::UnknownIsotope {
            name: fields[0].to_string(),
            available: table.names().join(", "),
        })?;
        let nums = numbers(&fields[1..], source_name, line)?;
        let mut spin = BathSpin::new(species.clone(), [nums[0], nums[1], nums[2]]);
        if nums.len() >= 12 {
            spin.a = Some(Tensor3::from_components(&nums[3..12], TensorUnit::Mhz)?);
        }
        if nums.len() == 21 {
            if species.s.twice() < 2 {
                return Err(parse_err(source_name, line, format!("{} has spin 1/2 and no quadrupole", species.name)));
            }
            spin.q = Some(Tensor3::from_components(&nums[12..21], TensorUnit::Mhz)?);
        }
        bath.push(spin);
    }
    Ok(bath)
}

/// Writes a bath in the format read by [`parse_bath`]; floats use the
/// shortest representation that round-trips exactly.
pub fn write_bath(bath: &[BathSpin]) -> String {
    let mut out = String::from("# isotope x y z [Axx .. Azz] [Qxx .. Qzz]  (Å, MHz)\n");
    for s in bath {
        let _ = write!(out, "{} {:?} {:?} {:?}", s.species.name, s.position[0], s.position[1], s.position[2]);
        let tensors: Vec<Tensor3> = match (&s.a, &s.q) {
            (Some(a), Some(q)) => vec![a.to_mhz(), q.to_mhz()],
            (Some(a), None) => vec![a.to_mhz()],
            (None, Some(q)) => vec![Tensor3::zeros(TensorUnit::Mhz), q.to_mhz()],
            (None, None) => vec![],
        };
        for t in tensors {
            for v in t.components() {
                let _ = write!(out, " {v:?}");
            }
        }
        out.push('\n');
    }
    out
}

/// Reads a supercell with `[cell]`, `[sites]` and `[abundances]` sections.
///
/// ```text
/// [cell]
/// 3.567 0 0
/// 0 3.567 0
/// 0 0 3.567
/// [sites]
/// 0 0 0 C
/// 0.25 0.25 0.25 C
/// [abundances]
/// C 13C 0.011
/// ```
pub fn parse_supercell(text: &str, source_name: &str) -> Result<Supercell, BathError> {
    let mut section = "";
    let mut vectors = Vec::new();
    let mut sites = Vec::new();
    let mut abundances: BTreeMap<String, Vec<(String, f64)>> = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if body.starts_with('[') && body.ends_with(']') {
            section = match &body[1..body.len() - 1] {
                "cell" => "cell",
                "sites" => "sites",
                "abundances" => "abundances",
                other => return Err(parse_err(source_name, line, format!("unknown section [{other}]"))),
            };
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        match section {
            "cell" => {
                let v = numbers(&fields, source_name, line)?;
                if v.len() != 3 {
                    return Err(parse_err(source_name, line, "lattice vector needs 3 components"));
                }
                vectors.push([v[0], v[1], v[2]]);
            }
            "sites" => {
                if fields.len() != 4 {
                    return Err(parse_err(source_name, line, "site needs `fx fy fz element`"));
                }
                let v = numbers(&fields[..3], source_name, line)?;
                sites.push(([v[0], v[1], v[2]], fields[3].to_string()));
            }
            "abundances" => {
                if fields.len() % 2 != 1 {
                    return Err(parse_err(source_name, line, "expected `element isotope fraction ...`"));
                }
                let entry = abundances.entry(fields[0].to_string()).or_default();
                for pair in fields[1..].chunks(2) {
                    let f = numbers(&pair[1..], source_name, line)?[0];
                    entry.push((pair[0].to_string(), f));
                }
            }
            _ => return Err(parse_err(source_name, line, "data outside a section")),
        }
    }
    if vectors.len() != 3 {
        return Err(parse_err(source_name, 0, format!("[cell] needs 3 vectors, got {}", vectors.len())));
    }
    Supercell::new([vectors[0], vectors[1], vectors[2]], sites, abundances)
}
