//! Scan drivers behind the command-line subcommands. Each returns the tables
//! it produces; numerical failures become per-row error text.

use rayon::prelude::*;

use crate::bell::bell_vs_clock_scan;
use crate::clock::{clock_backaction, finite_times, tau_limits_exact};
use crate::config::{PathsTruncation, RunConfig};
use crate::error::{Error, Result};
use crate::medium::{ClockSetting, StructureSpec};
use crate::output::{Cell, Table};
use crate::paths::{expand_paths_with_cap, reconstruct_amplitude, Truncation};
use crate::polarimetry::{interferometer_curve, polarizer_curve, PolarizationState};
use crate::readout::{Probe, ReadoutRegistry};
use crate::scatter::{circular_amplitudes, scan, transmission_amplitude, FrequencyGrid};

fn error_cell<T>(results: &[&Result<T>]) -> Cell {
    results
        .iter()
        .find_map(|r| r.as_ref().err())
        .map_or(Cell::Missing, |e| Cell::Text(e.to_string()))
}

fn clock(split: f64) -> Result<ClockSetting> {
    if split == 0.0 {
        Ok(ClockSetting::off())
    } else {
        ClockSetting::new(split)
    }
}

/// Splittings to sweep; the weak-clock limit if none are given.
fn splits(cfg: &RunConfig) -> Vec<f64> {
    if cfg.clock.is_empty() {
        vec![0.0]
    } else {
        cfg.clock.clone()
    }
}

fn section<'a, T>(value: &'a Option<T>, name: &str) -> Result<&'a T> {
    value
        .as_ref()
        .ok_or_else(|| Error::Config(format!("the `{name}` section is required for this subcommand")))
}

/// Spectral scan, traversal times and clock back-action over the frequency
/// grid.
pub fn run_scan(cfg: &RunConfig) -> Result<Vec<Table>> {
    let structure = cfg.structure()?;
    let grid = cfg.omega.grid()?;
    Ok(vec![
        spectral_table(&structure, &grid)?,
        times_table(&structure, grid.values(), &splits(cfg)),
        backaction_table(&structure, grid.values(), &splits(cfg)),
    ])
}

fn spectral_table(structure: &StructureSpec, grid: &FrequencyGrid) -> Result<Table> {
    let mut t = Table::new(
        "spectral",
        &["omega", "re_s", "im_s", "abs_s2", "phase_unwrapped", "error"],
    );
    match scan(structure, grid) {
        Ok(sc) => {
            for ((w, a), phase) in sc.omegas.iter().zip(&sc.amplitudes).zip(&sc.unwrapped_phase) {
                t.push(vec![
                    (*w).into(),
                    a.value.re.into(),
                    a.value.im.into(),
                    a.probability().into(),
                    (*phase).into(),
                    Cell::Missing,
                ]);
            }
        }
        Err(e) => {
            let rows: Vec<_> = grid
                .values()
                .par_iter()
                .map(|&w| transmission_amplitude(structure, w))
                .collect();
            for (w, a) in grid.values().iter().zip(rows) {
                let a = a?;
                t.push(vec![
                    (*w).into(),
                    a.value.re.into(),
                    a.value.im.into(),
                    a.probability().into(),
                    Cell::Missing,
                    Cell::Text(e.to_string()),
                ]);
            }
        }
    }
    Ok(t)
}

fn grid_pairs(splits: &[f64], omegas: &[f64]) -> Vec<(f64, f64)> {
    splits
        .iter()
        .flat_map(|&x| omegas.iter().map(move |&w| (x, w)))
        .collect()
}

fn times_table(structure: &StructureSpec, omegas: &[f64], splits: &[f64]) -> Table {
    let mut t = Table::new(
        "times",
        &[
            "omega_split",
            "omega",
            "tau_ph",
            "tau_orth",
            "tau_amp",
            "p_clock",
            "p_noclock",
            "error",
        ],
    );
    let rows: Vec<Vec<Cell>> = grid_pairs(splits, omegas)
        .par_iter()
        .map(|&(x, w)| {
            let times = clock(x).and_then(|c| {
                if c.is_off() {
                    tau_limits_exact(structure, w)
                } else {
                    finite_times(structure, w, c)
                }
            });
            let probs = clock(x).and_then(|c| clock_backaction(structure, w, c));
            let field = |f: fn(&crate::clock::TraversalTimes) -> f64| Cell::from(times.as_ref().map(f));
            vec![
                x.into(),
                w.into(),
                field(|t| t.tau_ph),
                field(|t| t.tau_orth),
                field(|t| t.tau_amp),
                probs.as_ref().map(|p| p.p_clock).into(),
                probs.as_ref().map(|p| p.p_noclock).into(),
                error_cell(&[&times.map(|_| ()), &probs.map(|_| ())]),
            ]
        })
        .collect();
    t.rows = rows;
    t
}

fn backaction_table(structure: &StructureSpec, omegas: &[f64], splits: &[f64]) -> Table {
    let mut t = Table::new(
        "backaction",
        &[
            "omega_split",
            "omega",
            "p_clock",
            "p_noclock",
            "quadratic_prediction",
            "error",
        ],
    );
    t.rows = grid_pairs(splits, omegas)
        .par_iter()
        .map(|&(x, w)| {
            let c = clock(x).and_then(|c| clock_backaction(structure, w, c));
            vec![
                x.into(),
                w.into(),
                c.as_ref().map(|c| c.p_clock).into(),
                c.as_ref().map(|c| c.p_noclock).into(),
                c.as_ref().map(|c| c.quadratic_prediction).into(),
                error_cell(&[&c]),
            ]
        })
        .collect();
    t
}

/// Maximal CHSH value for each clock splitting at the configured frequency.
pub fn run_bell(cfg: &RunConfig) -> Result<Vec<Table>> {
    let structure = cfg.structure()?;
    let omega = section(&cfg.bell, "bell")?.omega;
    let splits = splits(cfg);
    let mut t = Table::new(
        "bell",
        &["omega_split", "b_value", "correlation_factor", "phase_shift", "error"],
    );
    for (x, r) in splits.iter().zip(bell_vs_clock_scan(&structure, omega, &splits)) {
        t.push(vec![
            (*x).into(),
            r.as_ref().map(|r| r.b_value).into(),
            r.as_ref().map(|r| r.correlation_factor).into(),
            r.as_ref().map(|r| r.phase_shift).into(),
            error_cell(&[&r]),
        ]);
    }
    Ok(vec![t])
}

/// Multiple-reflection path terms and how well they rebuild `s` across the
/// frequency grid.
pub fn run_paths(cfg: &RunConfig) -> Result<Vec<Table>> {
    let structure = cfg.structure()?;
    let pc = section(&cfg.paths, "paths")?;
    let truncation = match pc.truncation {
        PathsTruncation::MaxBounces(b) => Truncation::Bounces(b),
        PathsTruncation::MaxDelay(d) => Truncation::Delay(d),
    };
    let exp = expand_paths_with_cap(&structure, truncation, pc.term_cap)?;

    let classes = exp.materials.len();
    let mut columns: Vec<String> = (1..=classes).map(|k| format!("N{k}")).collect();
    columns.extend(["bounces", "re_c", "im_c", "delay"].map(String::from));
    let mut terms = Table {
        name: "paths".into(),
        columns,
        rows: Vec::with_capacity(exp.terms.len()),
    };
    for term in &exp.terms {
        let mut row: Vec<Cell> = term.traversal_counts.iter().map(|&n| Cell::Int(n.into())).collect();
        row.push(Cell::Int(term.bounce_count.into()));
        row.extend([term.amplitude.re.into(), term.amplitude.im.into(), term.delay.into()]);
        terms.push(row);
    }

    let mut report = Table::new(
        "paths_residual",
        &[
            "omega",
            "re_paths",
            "im_paths",
            "re_s",
            "im_s",
            "deviation",
            "truncation_residual",
            "error",
        ],
    );
    let omegas = cfg.omegas()?;
    report.rows = omegas
        .par_iter()
        .map(|&w| {
            let rebuilt = reconstruct_amplitude(&exp, w);
            let s = transmission_amplitude(&structure, w).map(|a| a.value);
            vec![
                w.into(),
                rebuilt.re.into(),
                rebuilt.im.into(),
                s.as_ref().map(|s| s.re).into(),
                s.as_ref().map(|s| s.im).into(),
                s.as_ref().map(|s| (s - rebuilt).norm()).into(),
                exp.truncation_residual.into(),
                error_cell(&[&s]),
            ]
        })
        .collect();
    Ok(vec![terms, report])
}

/// Polarizer and fringe curves at one frequency, plus the selected time
/// read-outs across the frequency grid.
pub fn run_polarimetry(cfg: &RunConfig, registry: &ReadoutRegistry) -> Result<Vec<Table>> {
    let structure = cfg.structure()?;
    let pc = section(&cfg.polarimetry, "polarimetry")?;
    let schemes = pc
        .readouts
        .iter()
        .map(|name| registry.get(name))
        .collect::<Result<Vec<_>>>()?;
    let split = ClockSetting::new(pc.omega_split)?;

    let (plus, minus) = circular_amplitudes(&structure, pc.omega, split)?;
    let curve = polarizer_curve(&PolarizationState::transmitted(plus.value, minus.value), pc.angles)?;
    let mut polarizer = Table::new("polarizer", &["angle", "probability"]);
    for (a, p) in curve.angles.iter().zip(&curve.counts) {
        polarizer.push(vec![(*a).into(), (*p).into()]);
    }

    let dx = cfg.dx_values()?;
    let mut fringe = Table::new("fringe", &["dx", "intensity"]);
    for (x, i) in dx.iter().zip(interferometer_curve(&plus, &minus, pc.delta_phi, &dx)?) {
        fringe.push(vec![(*x).into(), i.into()]);
    }

    let mut readouts = Table::new("readouts", &["omega", "readout", "tau", "error"]);
    let omegas = cfg.omegas()?;
    let pairs: Vec<(f64, usize)> = omegas
        .iter()
        .flat_map(|&w| (0..schemes.len()).map(move |k| (w, k)))
        .collect();
    readouts.rows = pairs
        .par_iter()
        .map(|&(w, k)| {
            let probe = Probe {
                structure: &structure,
                omega: w,
                clock: split,
            };
            let tau = schemes[k].read(&probe);
            vec![
                w.into(),
                Cell::Text(schemes[k].name().to_string()),
                tau.as_ref().map(|t| *t).into(),
                error_cell(&[&tau]),
            ]
        })
        .collect();
    Ok(vec![polarizer, fringe, readouts])
}
