use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::spinops::{IsotopeTable, DEFAULT_R_MIN};

use super::{norm, BathError, BathSpin};

pub const DEFAULT_MAX_SPINS: usize = 100_000;

/// Periodic crystal description used to place bath spins.
#[derive(Debug, Clone, PartialEq)]
pub struct Supercell {
    /// Lattice vectors in Å (rows).
    pub vectors: [[f64; 3]; 3],
    /// Fractional coordinates and element label of each basis site.
    pub sites: Vec<([f64; 3], String)>,
    /// Element -> spinful isotopes with their fractions; the remainder is spinless.
    pub abundances: BTreeMap<String, Vec<(String, f64)>>,
}

impl Supercell {
    pub fn new(
        vectors: [[f64; 3]; 3],
        sites: Vec<([f64; 3], String)>,
        abundances: BTreeMap<String, Vec<(String, f64)>>,
    ) -> Result<Self, BathError> {
        let cell = Self {
            vectors,
            sites,
            abundances,
        };
        cell.validate()?;
        Ok(cell)
    }

    pub fn validate(&self) -> Result<(), BathError> {
        let det = det3(&self.vectors);
        let scale: f64 = self.vectors.iter().map(|v| norm(*v)).product();
        if !det.is_finite() || det.abs() <= 1e-10 * scale {
            return Err(BathError::Lattice("lattice vectors are linearly dependent".into()));
        }
        for (el, isos) in &self.abundances {
            let mut total = 0.0;
            for (name, f) in isos {
                if !(0.0..=1.0).contains(f) {
                    return Err(BathError::Lattice(format!("{el}: abundance of {name} outside [0, 1]")));
                }
                total += f;
            }
            if total > 1.0 + 1e-12 {
                return Err(BathError::Lattice(format!("{el}: abundances sum to {total} > 1")));
            }
        }
        for (_, el) in &self.sites {
            if self.abundances.get(el).is_none_or(|v| v.is_empty()) {
                return Err(BathError::EmptyAbundance(el.clone()));
            }
        }
        Ok(())
    }

    /// Cubic diamond (a = 3.567 Å) with the given ¹³C fraction.
    pub fn diamond(c13: f64) -> Self {
        let a = 3.567;
        let sites = fcc_with_basis(&[[0.0; 3], [0.25; 3]], &["C", "C"]);
        let mut ab = BTreeMap::new();
        ab.insert("C".to_string(), vec![("13C".to_string(), c13)]);
        Self {
            vectors: cubic(a),
            sites,
            abundances: ab,
        }
    }

    /// Cubic (3C) silicon carbide, a = 4.3596 Å, Si on the fcc sites and C
    /// shifted by (¼, ¼, ¼).
    pub fn silicon_carbide(si29: f64, c13: f64) -> Self {
        let a = 4.3596;
        let sites = fcc_with_basis(&[[0.0; 3], [0.25; 3]], &["Si", "C"]);
        let mut ab = BTreeMap::new();
        ab.insert("Si".to_string(), vec![("29Si".to_string(), si29)]);
        ab.insert("C".to_string(), vec![("13C".to_string(), c13)]);
        Self {
            vectors: cubic(a),
            sites,
            abundances: ab,
        }
    }

    /// Number density of lattice sites per Å³.
    pub fn site_density(&self) -> f64 {
        self.sites.len() as f64 / det3(&self.vectors).abs()
    }

    fn cartesian(&self, n: [i64; 3], frac: [f64; 3]) -> [f64; 3] {
        let mut r = [0.0; 3];
        for (k, rk) in r.iter_mut().enumerate() {
            *rk = (0..3).map(|i| (n[i] as f64 + frac[i]) * self.vectors[i][k]).sum();
        }
        r
    }

    /// All lattice sites with `r_min <= |r| <= radius`, in a fixed order.
    pub fn sites_within(&self, radius: f64, r_min: f64) -> Vec<([f64; 3], &str)> {
        let recip = reciprocal(&self.vectors);
        let bound: Vec<i64> = (0..3).map(|i| (radius * norm(recip[i])).ceil() as i64 + 1).collect();
        let mut out = Vec::new();
        for n0 in -bound[0]..=bound[0] {
            for n1 in -bound[1]..=bound[1] {
                for n2 in -bound[2]..=bound[2] {
                    for (frac, el) in &self.sites {
                        let r = self.cartesian([n0, n1, n2], *frac);
                        let d = norm(r);
                        if d <= radius && d >= r_min {
                            out.push((r, el.as_str()));
                        }
                    }
                }
            }
        }
        out
    }
}

fn cubic(a: f64) -> [[f64; 3]; 3] {
    [[a, 0.0, 0.0], [0.0, a, 0.0], [0.0, 0.0, a]]
}

fn fcc_with_basis(basis: &[[f64; 3]], elements: &[&str]) -> Vec<([f64; 3], String)> {
    let fcc = [[0.0, 0.0, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]];
    let mut sites = Vec::new();
    for (b, el) in basis.iter().zip(elements) {
        for f in &fcc {
            sites.push(([f[0] + b[0], f[1] + b[1], f[2] + b[2]], el.to_string()));
        }
    }
    sites
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Reciprocal vectors without the 2π factor.
fn reciprocal(v: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let det = det3(v);
    let c = [cross(v[1], v[2]), cross(v[2], v[0]), cross(v[0], v[1])];
    c.map(|x| x.map(|y| y / det))
}

#[derive(Debug, Clone)]
pub struct GenerateOptions {
    pub radius: f64,
    pub seed: u64,
    /// Stream index of the generator, one per realization.
    pub stream: u64,
    /// Sites closer than this to the origin are left out (the defect site).
    pub r_min: f64,
    pub max_spins: usize,
}

impl GenerateOptions {
    pub fn new(radius: f64, seed: u64) -> Self {
        Self {
            radius,
            seed,
            stream: 0,
            r_min: DEFAULT_R_MIN,
            max_spins: DEFAULT_MAX_SPINS,
        }
    }
}

pub fn generate_bath(cell: &Supercell, table: &IsotopeTable, radius: f64, seed: u64) -> Result<Vec<BathSpin>, BathError> {
    generate_bath_with(cell, table, &GenerateOptions::new(radius, seed))
}

/// Places isotopes on every site within `radius` of the origin. Each site
/// consumes exactly one uniform draw from a ChaCha20 generator seeded with
/// `seed` on stream `stream`, so realizations are reproducible and independent.
/// Output is sorted by distance from the origin.
pub fn generate_bath_with(cell: &Supercell, table: &IsotopeTable, opts: &GenerateOptions) -> Result<Vec<BathSpin>, BathError> {
    if !(opts.radius > 0.0 && opts.radius.is_finite()) {
        return Err(BathError::InvalidRadius(opts.radius));
    }
    cell.validate()?;
    let mut resolved: BTreeMap<&str, Vec<(&crate::spinops::SpinSpecies, f64)>> = BTreeMap::new();
    for (el, isos) in &cell.abundances {
        let mut v = Vec::new();
        for (name, f) in isos {
            let sp = table.get(name).ok_or_else(|| BathError::UnknownIsotope {
                name: name.clone(),
                available: table.names().join(", "),
            })?;
            v.push((sp, *f));
        }
        resolved.insert(el.as_str(), v);
    }

    let mut rng = ChaCha20Rng::seed_from_u64(opts.seed);
    rng.set_stream(opts.stream);
    let mut bath = Vec::new();
    for (r, el) in cell.sites_within(opts.radius, opts.r_min) {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (sp, f) in &resolved[el] {
            acc += f;
            if u < acc {
                bath.push(BathSpin::new((*sp).clone(), r));
                break;
            }
        }
    }
    if bath.len() > opts.max_spins {
        return Err(BathError::TooManySpins {
            count: bath.len(),
            limit: opts.max_spins,
        });
    }
    sort_by_distance(&mut bath);
    Ok(bath)
}

pub(crate) fn sort_by_distance(bath: &mut [BathSpin]) {
    bath.sort_by(|a, b| {
        a.distance()
            .total_cmp(&b.distance())
            .then_with(|| a.position[0].total_cmp(&b.position[0]))
            .then_with(|| a.position[1].total_cmp(&b.position[1]))
            .then_with(|| a.position[2].total_cmp(&b.position[2]))
    });
}
