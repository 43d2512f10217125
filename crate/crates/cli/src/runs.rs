//! Experiment drivers: single runs and initial-penalty sweeps.

use std::fs;
use std::path::{Path, PathBuf};
use std::thread;

use anyhow::{bail, Context, Result};
use topopt::admm::{Admm, AdmmRun};
use topopt::mesh::{build_adjacency, build_unit_square_mesh};
use topopt::SolverConfig;

use crate::config_file;
use crate::output;

/// Executes one solve, writing artifacts into `config.output_dir`.
pub fn run_single(config: &SolverConfig) -> Result<AdmmRun> {
    run_into(config, Path::new(&config.output_dir), true)
}

/// Executes one solve with artifacts in `dir`; snapshots are optional so
/// sweep sub-runs stay lean.
fn run_into(config: &SolverConfig, dir: &Path, snapshots: bool) -> Result<AdmmRun> {
    config.validate()?;
    fs::create_dir_all(dir)
        .with_context(|| format!("output directory {} is not writable", dir.display()))?;
    fs::write(
        dir.join("config_used.txt"),
        config_file::config_text(config),
    )
    .with_context(|| format!("output directory {} is not writable", dir.display()))?;

    let mesh = build_unit_square_mesh(config.n)?;
    let graph = build_adjacency(&mesh);
    let admm = Admm::new(&mesh, &graph, config, config.funnel())?;

    if snapshots {
        let init = admm.initialize()?;
        output::write_field_snapshot(dir, "v", 0, &mesh, &init.v)?;
        output::write_field_snapshot(dir, "w", 0, &mesh, &init.w)?;
    }

    let stride = config.snapshot_stride;
    let mut snapshot_err = None;
    let mut last_snapshot = 0usize;
    let run = admm.run_with_observer(|state, rec| {
        if snapshots && rec.j % stride == 0 && snapshot_err.is_none() {
            let out = output::write_field_snapshot(dir, "v", rec.j, &mesh, &state.v)
                .and_then(|()| output::write_field_snapshot(dir, "w", rec.j, &mesh, &state.w));
            if let Err(e) = out {
                snapshot_err = Some(e);
            }
            last_snapshot = rec.j;
        }
    })?;
    if let Some(e) = snapshot_err {
        return Err(e);
    }
    if snapshots && run.state.iteration != last_snapshot {
        output::write_field_snapshot(dir, "v", run.state.iteration, &mesh, &run.state.v)?;
        output::write_field_snapshot(dir, "w", run.state.iteration, &mesh, &run.state.w)?;
    }

    output::write_history_csv(&dir.join("history.csv"), &run.history)?;
    output::write_final_w(&dir.join("final_w.txt"), &run.state.w)?;
    output::write_summary(&dir.join("summary.txt"), &run, config.rho0, config.seed)?;
    Ok(run)
}

/// One row of `sweep.csv`.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub rho0: f64,
    pub failed: bool,
    pub converged: bool,
    pub iterations: usize,
    pub rho_final: f64,
    pub rho_ratio: f64,
}

/// Runs one solve per initial penalty with the sweep stopping rule
/// `||w - v||^2 <= 1`, concurrently; each run owns a subdirectory.
pub fn run_rho_sweep(config: &SolverConfig, rho_list: &[f64]) -> Result<Vec<SweepRow>> {
    if rho_list.is_empty() {
        bail!("the sweep needs at least one initial penalty value");
    }
    if let Some(bad) = rho_list.iter().find(|&&r| !r.is_finite() || r <= 0.0) {
        bail!("initial penalty values must be positive, got {bad}");
    }
    let base = PathBuf::from(&config.output_dir);
    fs::create_dir_all(&base)
        .with_context(|| format!("output directory {} is not writable", base.display()))?;

    let rows: Vec<SweepRow> = thread::scope(|scope| {
        let handles: Vec<_> = rho_list
            .iter()
            .enumerate()
            .map(|(idx, &rho0)| {
                let sub = SolverConfig {
                    rho0,
                    delta_tol: 1.0,
                    ..config.clone()
                };
                let dir = base.join(format!("rho_{idx}_{rho0:e}"));
                scope.spawn(move || {
                    let outcome = run_into(&sub, &dir, false);
                    match outcome {
                        Ok(run) => SweepRow {
                            rho0,
                            failed: false,
                            converged: run.converged,
                            iterations: run.state.iteration,
                            rho_final: run.state.rho,
                            rho_ratio: run.state.rho / rho0,
                        },
                        Err(err) => {
                            eprintln!("sweep run rho0={rho0} failed: {err:#}");
                            SweepRow {
                                rho0,
                                failed: true,
                                converged: false,
                                iterations: 0,
                                rho_final: f64::NAN,
                                rho_ratio: f64::NAN,
                            }
                        }
                    }
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });

    let mut csv =
        String::from("rho0,failed,converged,iterations_to_converge,rho_final,rho_ratio\n");
    for row in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.rho0,
            row.failed as u8,
            row.converged as u8,
            row.iterations,
            row.rho_final,
            row.rho_ratio
        ));
    }
    let path = base.join("sweep.csv");
    fs::write(&path, csv).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(rows)
}
