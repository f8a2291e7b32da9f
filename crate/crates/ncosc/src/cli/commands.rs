//! Subcommand implementations. Each returns deterministic artifacts; writing
//! them to disk and picking exit codes happens in the CLI driver.

use rayon::prelude::*;
use serde::Serialize;

use super::config::{axis_values, HamiltonianChoice, RunConfig, SweepSection};
use super::output::{fmt_float, json_artifact, Artifact, CsvWriter};
use crate::dynamics::{
    assemble_solution_phase, geometric_phase, ReferenceEngine, Sector, TDParams,
};
use crate::error::{Error, Result};
use crate::fockspace::{angular_momentum, number_operators, position_momentum};
use crate::ncspace::{effective_params, smallness_warnings, CouplingConvention};
use crate::oracle::{
    evolve, extract_phase, phase_safe_nodes, spectrum_crosscheck, uniform_grid, HamiltonianSource,
    Trajectory,
};
use crate::spectrum::{energy_closed_form, level_splitting, spectrum_table};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Levels shown by `spectrum` and checked by the crosscheck.
const CROSSCHECK_LEVELS: usize = 6;

#[derive(Serialize)]
struct SpectrumRow {
    n_g: usize,
    n_d: usize,
    total_quanta: usize,
    energy_bare: f64,
    energy_hbar_scaled: f64,
}

#[derive(Serialize)]
struct SpectrumReport<C: Serialize> {
    schema_version: u32,
    warnings: Vec<String>,
    crosscheck: C,
}

pub fn cmd_spectrum(cfg: &RunConfig, format: Format) -> Result<(Vec<Artifact>, Vec<String>)> {
    let osc = cfg.osc_params()?;
    let nc = cfg.nc_params()?;
    let basis = cfg.basis()?;
    let warnings = smallness_warnings(&osc, &nc);

    let guard_total = basis.n_max().checked_sub(6).ok_or_else(|| {
        Error::TruncationOverflow(format!(
            "spectrum table needs n_max >= 6, got {}",
            basis.n_max()
        ))
    })?;
    let table = spectrum_table(&osc, &nc, guard_total, CouplingConvention::HbarScaled);
    let rows: Vec<SpectrumRow> = table
        .iter()
        .map(|l| SpectrumRow {
            n_g: l.n_g,
            n_d: l.n_d,
            total_quanta: l.n_g + l.n_d,
            energy_bare: energy_closed_form(l.n_g, l.n_d, &osc, &nc, CouplingConvention::Bare),
            energy_hbar_scaled: l.energy,
        })
        .collect();

    let crosscheck = spectrum_crosscheck(&osc, &nc, basis, CROSSCHECK_LEVELS)?;
    let report = SpectrumReport {
        schema_version: 1,
        warnings: warnings.clone(),
        crosscheck,
    };

    let mut artifacts = Vec::new();
    match format {
        Format::Csv => {
            let mut w = CsvWriter::new(&[
                "n_g",
                "n_d",
                "total_quanta",
                "energy_bare",
                "energy_hbar_scaled",
            ]);
            for r in &rows {
                w.row(&[
                    r.n_g.to_string(),
                    r.n_d.to_string(),
                    r.total_quanta.to_string(),
                    fmt_float(r.energy_bare),
                    fmt_float(r.energy_hbar_scaled),
                ]);
            }
            artifacts.push(w.into_artifact("spectrum.csv", 1));
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Table<'a> {
                schema_version: u32,
                rows: &'a [SpectrumRow],
            }
            artifacts.push(json_artifact(
                "spectrum.json",
                1,
                &Table {
                    schema_version: 1,
                    rows: &rows,
                },
            )?);
        }
    }
    artifacts.push(json_artifact("crosscheck.json", 1, &report)?);
    Ok((artifacts, warnings))
}

/// Pick the evolution generator: the explicit choice, or for `auto` the
/// direct matrix for constant profiles and the circular form otherwise.
fn resolve_source(choice: HamiltonianChoice, params: &TDParams) -> HamiltonianSource {
    match choice {
        HamiltonianChoice::Ladder => HamiltonianSource::Ladder,
        HamiltonianChoice::Direct => HamiltonianSource::Direct,
        HamiltonianChoice::GSector => HamiltonianSource::GSector,
        HamiltonianChoice::Auto => {
            if params.is_stationary() {
                HamiltonianSource::Direct
            } else {
                HamiltonianSource::Ladder
            }
        }
    }
}

struct EvolutionRun {
    params: TDParams,
    traj: Trajectory,
    phases: Vec<f64>,
}

fn run_evolution(cfg: &RunConfig) -> Result<EvolutionRun> {
    let basis = cfg.basis()?;
    let params = cfg.td_params()?;
    let consts_g = cfg.invariant_g()?;
    let consts_d = cfg.invariant_d()?;
    let (n_g, n_d) = cfg.state();
    let num = cfg.numerics();
    let convention = CouplingConvention::HbarScaled;
    let source = resolve_source(num.hamiltonian, &params);

    let safe = phase_safe_nodes(
        &params,
        convention,
        n_g,
        n_d,
        consts_g.rho0_sqr(),
        consts_d.rho0_sqr(),
        params.horizon(),
    )?;
    let grid = uniform_grid(params.horizon(), num.grid_points.max(safe));
    let reference = ReferenceEngine::new(
        &consts_g,
        &consts_d,
        &params,
        n_g,
        n_d,
        basis,
        convention,
        num.tol_quad,
    )?;
    let psi0 = reference.state_at(0.0)?;
    let traj = evolve(source, &params, convention, &psi0, &grid, num.tol_ode)?;
    let phases = extract_phase(&traj, |t| reference.state_at(t))?;
    Ok(EvolutionRun {
        params,
        traj,
        phases,
    })
}

pub fn cmd_evolve(cfg: &RunConfig, format: Format) -> Result<(Vec<Artifact>, Vec<String>)> {
    let osc = cfg.osc_params()?;
    let nc = cfg.nc_params()?;
    let basis = cfg.basis()?;
    let warnings = smallness_warnings(&osc, &nc);
    let consts_g = cfg.invariant_g()?;
    let num = cfg.numerics();
    let convention = CouplingConvention::HbarScaled;

    let run = run_evolution(cfg)?;

    let (n_g_op, n_d_op) = number_operators(basis);
    let eff = effective_params(&osc, &nc);
    let lz_op = angular_momentum(&position_momentum(&eff, nc.hbar(), basis));
    let mode_ops = crate::fockspace::mode_operators(basis);
    let (a_g, _) = crate::fockspace::circular_operators(&mode_ops.a_x, &mode_ops.a_y)?;

    #[derive(Serialize)]
    struct EvolveRow {
        t: f64,
        norm_dev: f64,
        n_g_exp: f64,
        n_d_exp: f64,
        l_z_exp: f64,
        invariant_g_exp: f64,
        phase: f64,
    }

    let mut rows = Vec::with_capacity(run.traj.times.len());
    for (k, (t, state)) in run.traj.times.iter().zip(&run.traj.states).enumerate() {
        let coeff = crate::dynamics::invariant_coefficients(
            &consts_g,
            &run.params,
            Sector::G,
            *t,
            convention,
            num.tol_quad,
        )?;
        let a_exp = a_g.expectation(state)?;
        let inv_exp = coeff.alpha1 * n_g_op.expectation(state)?.re
            + (coeff.beta1 * a_exp.conj()).re
            + (coeff.gamma1 * a_exp).re
            + coeff.delta1;
        rows.push(EvolveRow {
            t: *t,
            norm_dev: run.traj.node_norm_devs[k],
            n_g_exp: n_g_op.expectation(state)?.re,
            n_d_exp: n_d_op.expectation(state)?.re,
            l_z_exp: lz_op.expectation(state)?.re,
            invariant_g_exp: inv_exp,
            phase: run.phases[k],
        });
    }

    let mut artifacts = Vec::new();
    match format {
        Format::Csv => {
            let mut w = CsvWriter::new(&[
                "t",
                "norm_dev",
                "n_g_exp",
                "n_d_exp",
                "l_z_exp",
                "invariant_g_exp",
                "phase",
            ]);
            for r in &rows {
                w.row(&[
                    fmt_float(r.t),
                    fmt_float(r.norm_dev),
                    fmt_float(r.n_g_exp),
                    fmt_float(r.n_d_exp),
                    fmt_float(r.l_z_exp),
                    fmt_float(r.invariant_g_exp),
                    fmt_float(r.phase),
                ]);
            }
            artifacts.push(w.into_artifact("evolve.csv", 1));
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                schema_version: u32,
                rows: &'a [EvolveRow],
            }
            artifacts.push(json_artifact(
                "evolve.json",
                1,
                &Out {
                    schema_version: 1,
                    rows: &rows,
                },
            )?);
        }
    }
    Ok((artifacts, warnings))
}

pub fn cmd_phases(cfg: &RunConfig, format: Format) -> Result<(Vec<Artifact>, Vec<String>)> {
    let osc = cfg.osc_params()?;
    let nc = cfg.nc_params()?;
    let warnings = smallness_warnings(&osc, &nc);
    let consts_g = cfg.invariant_g()?;
    let consts_d = cfg.invariant_d()?;
    let (n_g, n_d) = cfg.state();
    let num = cfg.numerics();
    let convention = CouplingConvention::HbarScaled;
    if num.hamiltonian == HamiltonianChoice::GSector {
        return Err(Error::Config(
            "phases compares against the full two-sector solution; \
             numerics.hamiltonian = \"g_sector\" is not meaningful here"
                .into(),
        ));
    }

    let run = run_evolution(cfg)?;

    #[derive(Serialize)]
    struct PhaseRow {
        t: f64,
        zero_point: f64,
        xi1d_bare: f64,
        xi1d_displaced: f64,
        xi1g: f64,
        xi2d_bare: f64,
        xi2d_displaced: f64,
        xi2g: f64,
        total_bare: f64,
        total_displaced: f64,
        total_numeric: f64,
        numeric_minus_displaced: f64,
        numeric_minus_bare: f64,
    }

    let mut rows = Vec::with_capacity(run.traj.times.len());
    for (t, phi) in run.traj.times.iter().zip(&run.phases) {
        let ledger = assemble_solution_phase(
            &consts_g,
            &consts_d,
            &run.params,
            n_g,
            n_d,
            *t,
            convention,
            num.tol_quad,
        )?
        .with_numeric(*phi);
        rows.push(PhaseRow {
            t: *t,
            zero_point: ledger.zero_point,
            xi1d_bare: ledger.g.dynamical_bare,
            xi1d_displaced: ledger.g.dynamical_displaced,
            xi1g: ledger.g.geometric,
            xi2d_bare: ledger.d.dynamical_bare,
            xi2d_displaced: ledger.d.dynamical_displaced,
            xi2g: ledger.d.geometric,
            total_bare: ledger.total_bare,
            total_displaced: ledger.total_displaced,
            total_numeric: *phi,
            numeric_minus_displaced: ledger.numeric_minus_displaced().unwrap_or(f64::NAN),
            numeric_minus_bare: ledger.numeric_minus_bare().unwrap_or(f64::NAN),
        });
    }

    let mut artifacts = Vec::new();
    match format {
        Format::Csv => {
            let mut w = CsvWriter::new(&[
                "t",
                "zero_point",
                "xi1d_bare",
                "xi1d_displaced",
                "xi1g",
                "xi2d_bare",
                "xi2d_displaced",
                "xi2g",
                "total_bare",
                "total_displaced",
                "total_numeric",
                "numeric_minus_displaced",
                "numeric_minus_bare",
            ]);
            for r in &rows {
                w.row(&[
                    fmt_float(r.t),
                    fmt_float(r.zero_point),
                    fmt_float(r.xi1d_bare),
                    fmt_float(r.xi1d_displaced),
                    fmt_float(r.xi1g),
                    fmt_float(r.xi2d_bare),
                    fmt_float(r.xi2d_displaced),
                    fmt_float(r.xi2g),
                    fmt_float(r.total_bare),
                    fmt_float(r.total_displaced),
                    fmt_float(r.total_numeric),
                    fmt_float(r.numeric_minus_displaced),
                    fmt_float(r.numeric_minus_bare),
                ]);
            }
            artifacts.push(w.into_artifact("phases.csv", 1));
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                schema_version: u32,
                rows: &'a [PhaseRow],
            }
            artifacts.push(json_artifact(
                "phases.json",
                1,
                &Out {
                    schema_version: 1,
                    rows: &rows,
                },
            )?);
        }
    }
    Ok((artifacts, warnings))
}

/// Number of grid points above which a sweep is refused.
const MAX_SWEEP_POINTS: usize = 10_000;

struct SweepPoint {
    values: Vec<f64>,
}

fn sweep_grid(section: &SweepSection) -> Result<(Vec<String>, Vec<SweepPoint>)> {
    let keys: Vec<String> = section.axes.iter().map(|a| a.key.clone()).collect();
    let axes: Vec<Vec<f64>> = section
        .axes
        .iter()
        .map(axis_values)
        .collect::<Result<_>>()?;
    let total: usize = axes.iter().map(Vec::len).product();
    if total > MAX_SWEEP_POINTS {
        return Err(Error::Config(format!(
            "sweep grid has {total} points, above the {MAX_SWEEP_POINTS} cap"
        )));
    }
    let mut points = Vec::with_capacity(total);
    let mut idx = vec![0usize; axes.len()];
    loop {
        points.push(SweepPoint {
            values: idx.iter().zip(&axes).map(|(&i, ax)| ax[i]).collect(),
        });
        // odometer increment, last axis fastest
        let mut k = axes.len();
        loop {
            if k == 0 {
                return Ok((keys, points));
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Apply one axis assignment to a copy of the raw config text layer.
fn apply_axis(cfg: &RunConfig, key: &str, value: f64) -> Result<RunConfig> {
    let mut raw = cfg.raw().clone();
    match key {
        "theta" => raw.system.theta = value,
        "theta_bar" => raw.system.theta_bar = value,
        "m" => raw.system.m = value,
        "omega" => raw.system.omega = value,
        _ => {
            let profiles = raw.profiles.as_mut().ok_or_else(|| {
                Error::Config(format!(
                    "[sweep] axis '{key}' needs the [profiles] section"
                ))
            })?;
            match key {
                "m_base" => profiles.m_base = Some(value),
                "m_rate" => profiles.m_rate = Some(value),
                "m_amplitude" => profiles.m_amplitude = Some(value),
                "m_angular_freq" => profiles.m_angular_freq = Some(value),
                "omega_base" => profiles.omega_base = Some(value),
                "omega_rate" => profiles.omega_rate = Some(value),
                "omega_amplitude" => profiles.omega_amplitude = Some(value),
                "omega_angular_freq" => profiles.omega_angular_freq = Some(value),
                _ => return Err(Error::Config(format!("[sweep] unknown axis key '{key}'"))),
            }
        }
    }
    RunConfig::from_raw(raw)
}

fn sweep_point_rows(
    cfg: &RunConfig,
    keys: &[String],
    point: &SweepPoint,
    levels_max_total: usize,
) -> Result<Vec<(String, f64)>> {
    let mut local = cfg.clone();
    for (key, value) in keys.iter().zip(&point.values) {
        local = apply_axis(&local, key, *value)?;
    }
    let osc = local.osc_params()?;
    let nc = local.nc_params()?;
    let convention = CouplingConvention::HbarScaled;
    let mut rows = Vec::new();
    for level in spectrum_table(&osc, &nc, levels_max_total, convention) {
        rows.push((
            format!("energy_{}_{}", level.n_g, level.n_d),
            level.energy,
        ));
    }
    rows.push((
        "splitting".to_string(),
        level_splitting(&osc, &nc, 1, convention)?,
    ));
    let params = local.td_params()?;
    let consts_g = local.invariant_g()?;
    rows.push((
        "geometric_phase_g".to_string(),
        geometric_phase(
            &consts_g,
            &params,
            Sector::G,
            params.horizon(),
            convention,
            local.numerics().tol_quad,
        )?,
    ));
    Ok(rows)
}

pub fn cmd_sweep(
    cfg: &RunConfig,
    format: Format,
    workers: usize,
) -> Result<(Vec<Artifact>, Vec<String>)> {
    let section = cfg.sweep()?.clone();
    cfg.td_params()?; // sweeps always emit the geometric phase, so profiles are required
    let (keys, points) = sweep_grid(&section)?;

    let eval = |point: &SweepPoint| sweep_point_rows(cfg, &keys, point, section.levels_max_total);
    let results: Vec<std::result::Result<Vec<(String, f64)>, String>> = if workers == 1 {
        points
            .iter()
            .map(|p| eval(p).map_err(|e| e.to_string()))
            .collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
        pool.install(|| {
            points
                .par_iter()
                .map(|p| eval(p).map_err(|e| e.to_string()))
                .collect()
        })
    };

    let mut header: Vec<&str> = vec!["point"];
    for k in &keys {
        header.push(k);
    }
    header.extend_from_slice(&["observable", "value", "error"]);

    #[derive(Serialize)]
    struct SweepRow {
        point: usize,
        axes: Vec<f64>,
        observable: String,
        value: Option<f64>,
        error: Option<String>,
    }

    let mut json_rows = Vec::new();
    let mut w = CsvWriter::new(&header);
    for (i, (point, result)) in points.iter().zip(&results).enumerate() {
        let axis_fields: Vec<String> = point.values.iter().map(|v| fmt_float(*v)).collect();
        match result {
            Ok(rows) => {
                for (obs, value) in rows {
                    let mut fields = vec![i.to_string()];
                    fields.extend(axis_fields.iter().cloned());
                    fields.push(obs.clone());
                    fields.push(fmt_float(*value));
                    fields.push(String::new());
                    w.row(&fields);
                    json_rows.push(SweepRow {
                        point: i,
                        axes: point.values.clone(),
                        observable: obs.clone(),
                        value: Some(*value),
                        error: None,
                    });
                }
            }
            Err(message) => {
                let mut fields = vec![i.to_string()];
                fields.extend(axis_fields.iter().cloned());
                fields.push("error".into());
                fields.push(String::new());
                fields.push(message.clone());
                w.row(&fields);
                json_rows.push(SweepRow {
                    point: i,
                    axes: point.values.clone(),
                    observable: "error".into(),
                    value: None,
                    error: Some(message.clone()),
                });
            }
        }
    }

    let artifacts = match format {
        Format::Csv => vec![w.into_artifact("sweep.csv", 1)],
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                schema_version: u32,
                axis_keys: &'a [String],
                rows: &'a [SweepRow],
            }
            vec![json_artifact(
                "sweep.json",
                1,
                &Out {
                    schema_version: 1,
                    axis_keys: &keys,
                    rows: &json_rows,
                },
            )?]
        }
    };
    let osc = cfg.osc_params()?;
    let nc = cfg.nc_params()?;
    Ok((artifacts, smallness_warnings(&osc, &nc)))
}
