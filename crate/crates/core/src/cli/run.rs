use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::bath::{write_bath, BathSpin};
use crate::cce::{
    fit_stretched, select_levels, simulate, BathState, CoherenceCurve, Diagnostics, EngineConfig, FitResult,
    PulseSequence, SpinSystem,
};
use crate::linalg::{kron, CMatrix, C64};
use crate::noise::{
    bloch_solve, compose_t2, filter_freq, gaussian_coherence, relaxation_from_spectrum, BlochParams, FieldProfile,
    Relaxation, SpectralDensity,
};
use crate::oracle::{exact_coherence, exact_lindblad, ou_monte_carlo, JointSystem, OracleError, OracleLimits};
use crate::spinops::assemble_cluster_hamiltonian;
use crate::{Error, Result};

use super::output::{curve_csv, num, summary_json, table_csv, write_atomic, Provenance};
use super::{ConfigError, RunConfig};

/// Reads and validates a TOML config; relative paths in it resolve against
/// the file's directory.
pub fn load_config(path: &Path, overrides: &[String]) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    Ok(RunConfig::from_toml(&text, overrides, base)?)
}

fn out_path(cfg: &RunConfig, suffix: &str) -> PathBuf {
    cfg.resolve_path(&cfg.output.dir).join(format!("{}{}", cfg.output.prefix, suffix))
}

fn emit(path: PathBuf, text: String, written: &mut Vec<PathBuf>) -> Result<()> {
    write_atomic(&path, text.as_bytes())?;
    log::info!("wrote {}", path.display());
    written.push(path);
    Ok(())
}

#[derive(Serialize)]
struct FitOutcome {
    fit: Option<FitResult>,
    fit_error: Option<String>,
}

impl FitOutcome {
    fn of(times: &[f64], abs_l: &[f64]) -> Self {
        match fit_stretched(times, abs_l) {
            Ok(f) => FitOutcome {
                fit: Some(f),
                fit_error: None,
            },
            Err(e) => FitOutcome {
                fit: None,
                fit_error: Some(e.to_string()),
            },
        }
    }
}

fn species_counts(bath: &[BathSpin]) -> std::collections::BTreeMap<String, usize> {
    let mut m = std::collections::BTreeMap::new();
    for s in bath {
        *m.entry(s.species.name.clone()).or_insert(0) += 1;
    }
    m
}

/// Writes the bath of the configured realization.
pub fn run_generate(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    if cfg.bath.source != "generate" {
        return Err(ConfigError::Invalid("generate needs bath.source = \"generate\"".into()).into());
    }
    let bath = cfg.bath_spins(cfg.bath.realization)?;
    let prov = Provenance::new("generate", cfg, 0);
    let mut written = Vec::new();
    emit(out_path(cfg, "_bath.xyz"), prov.header() + &write_bath(&bath), &mut written)?;
    #[derive(Serialize)]
    struct Body {
        spins: usize,
        species: std::collections::BTreeMap<String, usize>,
    }
    let body = Body {
        spins: bath.len(),
        species: species_counts(&bath),
    };
    emit(out_path(cfg, "_bath.json"), summary_json(&prov, &body), &mut written)?;
    Ok(written)
}

#[derive(Serialize)]
struct SimulateBody<'a> {
    sequence: &'a str,
    diagnostics: &'a Diagnostics,
    #[serde(flatten)]
    fit: FitOutcome,
}

fn simulate_system(cfg: &RunConfig, stream: u64, engine: &EngineConfig) -> Result<(CoherenceCurve, SpinSystem)> {
    let sys = cfg.spin_system(stream)?;
    Ok(simulate(&sys, engine, &cfg.pulse_sequence()?, &cfg.times()?)?)
}

/// Coherence curve CSV plus JSON summary with diagnostics and the
/// stretched-exponential fit.
pub fn run_simulate(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let (curve, _) = simulate_system(cfg, cfg.bath.realization, &cfg.engine_config()?)?;
    let prov = Provenance::new("simulate", cfg, curve.diagnostics.guarded);
    let mut written = Vec::new();
    emit(out_path(cfg, ".csv"), curve_csv(&prov, &curve.times, &curve.values), &mut written)?;
    let body = SimulateBody {
        sequence: cfg.pulses.sequence.as_str(),
        diagnostics: &curve.diagnostics,
        fit: FitOutcome::of(&curve.times, &curve.abs()),
    };
    emit(out_path(cfg, ".json"), summary_json(&prov, &body), &mut written)?;
    Ok(written)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub value: f64,
    pub t2: Option<f64>,
    pub n: Option<f64>,
    /// `max_t |ΔL|` against the previous setting.
    pub delta: Option<f64>,
    pub guarded: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct AxisReport {
    pub axis: String,
    pub rows: Vec<ConvergenceRow>,
    pub converged: bool,
    /// First setting whose delta falls below the tolerance.
    pub converged_at: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnsembleStats {
    pub realizations: usize,
    pub fitted: usize,
    pub t2_median: Option<f64>,
    pub t2_q1: Option<f64>,
    pub t2_q3: Option<f64>,
    pub t2_iqr: Option<f64>,
    pub n_median: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub tolerance: f64,
    pub axes: Vec<AxisReport>,
    pub ensemble: EnsembleStats,
}

/// Quantile with linear interpolation between order statistics.
fn quantile(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Some(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

fn max_delta(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn strictly_increasing(name: &str, v: &[f64]) -> std::result::Result<(), ConfigError> {
    if v.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(ConfigError::Invalid(format!("converge.{name} must be strictly increasing")));
    }
    Ok(())
}

fn axis_report(axis: &str, values: &[f64], curves: &[(CoherenceCurve, Option<FitResult>)], tol: f64) -> AxisReport {
    let mut rows = Vec::with_capacity(values.len());
    for (k, (&v, (c, fit))) in values.iter().zip(curves).enumerate() {
        rows.push(ConvergenceRow {
            value: v,
            t2: fit.map(|f| f.t2),
            n: fit.map(|f| f.n),
            delta: (k > 0).then(|| max_delta(&c.values, &curves[k - 1].0.values)),
            guarded: c.diagnostics.guarded,
        });
    }
    let converged_at = rows.iter().find(|r| r.delta.is_some_and(|d| d < tol)).map(|r| r.value);
    let converged = rows.last().and_then(|r| r.delta).is_some_and(|d| d < tol);
    AxisReport {
        axis: axis.to_string(),
        rows,
        converged,
        converged_at,
    }
}

/// Sweeps cluster order, connectivity cutoff, bath radius and bath
/// realizations, each with the other settings held at the engine values.
pub fn run_converge(cfg: &RunConfig) -> Result<(ConvergenceReport, Vec<PathBuf>)> {
    let c = &cfg.converge;
    let orders: Vec<f64> = c.orders.iter().map(|&o| o as f64).collect();
    let r_dips: Vec<f64> = c.r_dipoles.iter().map(|l| l.0).collect();
    let radii: Vec<f64> = c.radii.iter().map(|l| l.0).collect();
    strictly_increasing("orders", &orders)?;
    strictly_increasing("r_dipoles", &r_dips)?;
    strictly_increasing("radii", &radii)?;
    if orders.len() < 2 && r_dips.len() < 2 && radii.len() < 2 && c.realizations < 2 {
        return Err(ConfigError::Invalid("converge needs at least one axis with two or more settings".into()).into());
    }
    if c.realizations > 1 && cfg.bath.source != "generate" {
        return Err(ConfigError::Invalid("realization sweeps need bath.source = \"generate\"".into()).into());
    }
    if cfg.bath.source == "generate" && radii.last().is_some_and(|&r| r > cfg.bath.radius.0) {
        return Err(ConfigError::Invalid("converge.radii exceed the generated bath.radius".into()).into());
    }
    let base = cfg.engine_config()?;
    let pulses = cfg.pulse_sequence()?;
    let times = cfg.times()?;
    let sys = cfg.spin_system(cfg.bath.realization)?;
    let run = |engine: EngineConfig, sys: &SpinSystem| -> Result<(CoherenceCurve, Option<FitResult>)> {
        let (curve, _) = simulate(sys, &engine, &pulses, &times)?;
        let fit = fit_stretched(&times, &curve.abs()).ok();
        Ok((curve, fit))
    };
    let sweep = |values: &[f64], set: &dyn Fn(&mut EngineConfig, f64)| -> Result<Vec<(CoherenceCurve, Option<FitResult>)>> {
        values
            .iter()
            .map(|&v| {
                let mut e = base.clone();
                set(&mut e, v);
                run(e, &sys)
            })
            .collect()
    };
    let mut axes = Vec::new();
    let mut guarded = 0;
    for (name, values, set) in [
        ("order", &orders, (&|e: &mut EngineConfig, v: f64| e.order = v as usize) as &dyn Fn(&mut EngineConfig, f64)),
        ("r_dipole", &r_dips, &|e: &mut EngineConfig, v: f64| e.r_dipole = v),
        ("bath_radius", &radii, &|e: &mut EngineConfig, v: f64| e.bath_radius = v),
    ] {
        if values.len() < 2 {
            continue;
        }
        log::info!("sweeping {name} over {values:?}");
        let curves = sweep(values, set)?;
        guarded += curves.iter().map(|(c, _)| c.diagnostics.guarded).sum::<usize>();
        axes.push(axis_report(name, values, &curves, c.tolerance));
    }

    let streams: Vec<u64> = (0..c.realizations as u64).map(|k| cfg.bath.realization + k).collect();
    let ensemble: Vec<(CoherenceCurve, Option<FitResult>)> = streams
        .par_iter()
        .map(|&s| {
            let sys = if s == cfg.bath.realization { sys.clone() } else { cfg.spin_system(s)? };
            run(base.clone(), &sys)
        })
        .collect::<Result<_>>()?;
    guarded += ensemble.iter().map(|(c, _)| c.diagnostics.guarded).sum::<usize>();
    if c.realizations > 1 {
        // running ensemble mean after k realizations
        let mut acc = vec![C64::new(0.0, 0.0); times.len()];
        let mut means = Vec::new();
        for (k, (curve, _)) in ensemble.iter().enumerate() {
            acc.iter_mut().zip(&curve.values).for_each(|(a, v)| *a += v);
            let mut m = curve.clone();
            m.values = acc.iter().map(|a| a / (k + 1) as f64).collect();
            means.push((m, ensemble[k].1));
        }
        let values: Vec<f64> = (1..=c.realizations).map(|k| k as f64).collect();
        axes.push(axis_report("realizations", &values, &means, c.tolerance));
    }
    let mut t2: Vec<f64> = ensemble.iter().filter_map(|(_, f)| f.map(|f| f.t2)).collect();
    let mut ns: Vec<f64> = ensemble.iter().filter_map(|(_, f)| f.map(|f| f.n)).collect();
    t2.sort_by(f64::total_cmp);
    ns.sort_by(f64::total_cmp);
    let (q1, q3) = (quantile(&t2, 0.25), quantile(&t2, 0.75));
    let report = ConvergenceReport {
        tolerance: c.tolerance,
        axes,
        ensemble: EnsembleStats {
            realizations: c.realizations,
            fitted: t2.len(),
            t2_median: quantile(&t2, 0.5),
            t2_q1: q1,
            t2_q3: q3,
            t2_iqr: q1.zip(q3).map(|(a, b)| b - a),
            n_median: quantile(&ns, 0.5),
        },
    };

    let prov = Provenance::new("converge", cfg, guarded);
    let mut written = Vec::new();
    let mut csv = prov.header();
    csv.push_str("axis,value,t2_ms,n,delta\n");
    let opt = |x: Option<f64>| x.map(num).unwrap_or_else(|| "nan".into());
    for a in &report.axes {
        for r in &a.rows {
            csv.push_str(&format!("{},{},{},{},{}\n", a.axis, num(r.value), opt(r.t2), opt(r.n), opt(r.delta)));
        }
    }
    emit(out_path(cfg, "_converge.csv"), csv, &mut written)?;
    emit(out_path(cfg, "_converge.json"), summary_json(&prov, &report), &mut written)?;
    Ok((report, written))
}

#[derive(Serialize)]
struct SequenceSummary {
    sequence: String,
    #[serde(flatten)]
    fit: FitOutcome,
    /// `1/T2 = 1/(2T1) + 1/Tφ` with `Tφ` from the fit.
    t2_total: Option<f64>,
    monte_carlo_max_delta: Option<f64>,
}

#[derive(Serialize)]
struct NoiseBody {
    model: String,
    relaxation: Option<Relaxation>,
    relaxation_error: Option<String>,
    sequences: Vec<SequenceSummary>,
}

/// Gaussian-noise coherence per sequence, filter-function table, golden-rule
/// T1 and composed T2, optional Monte Carlo check and Bloch trajectory.
pub fn run_noise(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let n = &cfg.noise;
    let s = cfg.spectral_density()?;
    let times = cfg.times()?;
    let t_max = *times.last().expect("at least two times");
    let seqs: Vec<PulseSequence> = n
        .sequences
        .iter()
        .map(|q| PulseSequence::parse(q).map_err(|e| Error::from(ConfigError::Invalid(e.to_string()))))
        .collect::<Result<_>>()?;
    let prov = Provenance::new("noise", cfg, 0);
    let mut written = Vec::new();

    let (relaxation, relaxation_error) = match relaxation_from_spectrum(&s, n.qubit_frequency.0) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let t1 = relaxation.map_or(f64::INFINITY, |r| r.t1);

    let mut summaries = Vec::new();
    for seq in &seqs {
        let l = gaussian_coherence(&s, seq, &times)?;
        let values: Vec<C64> = l.iter().map(|&x| C64::new(x, 0.0)).collect();
        emit(out_path(cfg, &format!("_noise_{}.csv", seq.name())), curve_csv(&prov, &times, &values), &mut written)?;
        let fit = FitOutcome::of(&times, &l);
        let t2_total = fit.fit.and_then(|f| compose_t2(t1, f.t2).ok());
        let mut mc_delta = None;
        if n.monte_carlo > 0 {
            if let SpectralDensity::Lorentzian { variance, tau_c } = s {
                let mc = ou_monte_carlo(variance, tau_c, seq, &times, n.monte_carlo, n.mc_seed);
                mc_delta = Some(mc.iter().zip(&l).map(|(a, b)| (a.norm() - b).abs()).fold(0.0, f64::max));
                emit(out_path(cfg, &format!("_mc_{}.csv", seq.name())), curve_csv(&prov, &times, &mc), &mut written)?;
            } else {
                log::warn!("noise.monte_carlo only applies to the lorentzian model");
            }
        }
        summaries.push(SequenceSummary {
            sequence: seq.name().to_string(),
            fit,
            t2_total,
            monte_carlo_max_delta: mc_delta,
        });
    }

    let omega_max = if n.filter_omega_max.0 > 0.0 {
        n.filter_omega_max.0
    } else {
        40.0 * std::f64::consts::PI / t_max
    };
    let mut columns = vec!["omega_rad_per_ms".to_string()];
    columns.extend(seqs.iter().map(|q| format!("F_{}", q.name())));
    let rows: Vec<Vec<f64>> = (0..n.filter_points)
        .map(|k| {
            let w = omega_max * k as f64 / (n.filter_points - 1) as f64;
            std::iter::once(w).chain(seqs.iter().map(|q| filter_freq(q, w, t_max))).collect()
        })
        .collect();
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    emit(out_path(cfg, "_filter.csv"), table_csv(&prov, &cols, &rows), &mut written)?;

    if let Some(det) = n.bloch_detuning {
        // rotating frame: unit gyromagnetic ratio, the detuning as a z field
        let t2 = summaries.first().and_then(|q| q.t2_total).unwrap_or(f64::INFINITY);
        let params = BlochParams {
            gamma: 1.0,
            field: FieldProfile::Constant([0.0, 0.0, det.0]),
            t1,
            t2,
            m0: 1.0,
        };
        let m = bloch_solve(&params, [1.0, 0.0, 0.0], &times)?;
        let rows: Vec<Vec<f64>> = times.iter().zip(&m).map(|(&t, v)| vec![t, v[0], v[1], v[2]]).collect();
        emit(out_path(cfg, "_bloch.csv"), table_csv(&prov, &["t_ms", "mx", "my", "mz"], &rows), &mut written)?;
    }

    let body = NoiseBody {
        model: n.model.clone(),
        relaxation,
        relaxation_error,
        sequences: summaries,
    };
    emit(out_path(cfg, "_noise.json"), summary_json(&prov, &body), &mut written)?;
    Ok(written)
}

/// Stretched-exponential fit of the `abs_L` column of a curve CSV.
pub fn run_fit(path: &Path) -> Result<FitResult> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let (t, a) = super::read_curve(&text, &path.display().to_string())?;
    Ok(fit_stretched(&t, &a)?)
}

#[derive(Serialize)]
struct OracleBody<'a> {
    sequence: &'a str,
    joint_dim: usize,
    max_abs_delta: f64,
    diagnostics: &'a Diagnostics,
}

/// Runs the configured engine and the exact joint-space propagation on the
/// same (small) bath and tabulates both.
pub fn run_oracle_compare(cfg: &RunConfig) -> Result<(f64, Vec<PathBuf>)> {
    let engine = cfg.engine_config()?;
    let limits = OracleLimits::default();
    let full = cfg.spin_system(cfg.bath.realization)?;
    let sys = full.within(engine.bath_radius);
    let ds = sys.central.s.dim();
    let dim = sys.bath.iter().fold(ds, |d, s| d.saturating_mul(s.species.s.dim()));
    let dissipative = sys.bath.iter().any(|s| !s.dissipators.is_empty());
    let limit = if dissipative { limits.max_lindblad_dim } else { limits.max_unitary_dim };
    if dim > limit {
        return Err(OracleError::DimensionOverflow { dim, limit }.into());
    }
    let pulses = cfg.pulse_sequence()?;
    let times = cfg.times()?;
    let (curve, _) = simulate(&full, &engine, &pulses, &times)?;

    let members: Vec<usize> = (0..sys.bath.len()).collect();
    let asm = assemble_cluster_hamiltonian(Some(&sys.central), &sys.bath, &sys.couplings, &members, sys.b)?;
    let hs = &asm.central.as_ref().expect("central spin present").1;
    let levels = select_levels(sys.central.levels, sys.central.s, hs)?;
    let rho = BathState::mixed(sys.bath.len()).cluster_rho(&members, &sys.bath);
    let joint = JointSystem::from_assembly(&asm, levels, rho)?;
    let exact = if dissipative {
        let id = CMatrix::identity(ds, ds);
        let mut jumps = Vec::new();
        for (k, s) in sys.bath.iter().enumerate() {
            for d in &s.dissipators {
                let l = crate::cce::jump_operator(&asm.bath_ops[k], d.jump);
                jumps.push((kron(&id, &l), d.rate));
            }
        }
        exact_lindblad(&joint, &jumps, &pulses, &times, &limits)?.0
    } else {
        exact_coherence(&joint, &pulses, &times, &limits)?
    };

    let rows: Vec<Vec<f64>> = times
        .iter()
        .zip(curve.values.iter().zip(&exact))
        .map(|(&t, (a, b))| vec![t, a.re, a.im, b.re, b.im, (a - b).norm()])
        .collect();
    let max_abs_delta = rows.iter().map(|r| r[5]).fold(0.0, f64::max);
    let prov = Provenance::new("oracle-compare", cfg, curve.diagnostics.guarded);
    let mut written = Vec::new();
    let columns = ["t_ms", "re_L", "im_L", "re_exact", "im_exact", "abs_delta"];
    emit(out_path(cfg, "_oracle.csv"), table_csv(&prov, &columns, &rows), &mut written)?;
    let body = OracleBody {
        sequence: pulses.name(),
        joint_dim: dim,
        max_abs_delta,
        diagnostics: &curve.diagnostics,
    };
    emit(out_path(cfg, "_oracle.json"), summary_json(&prov, &body), &mut written)?;
    Ok((max_abs_delta, written))
}
