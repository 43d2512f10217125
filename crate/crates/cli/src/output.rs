//! Run artifacts: CSV history, PGM field snapshots and text summaries.

use std::fs::{self, File};
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use topopt::admm::{AdmmRun, IterationRecord};
use topopt::mesh::Mesh;

/// Pixels per mesh cell in rasterized snapshots.
pub const PIXELS_PER_CELL: usize = 4;

pub const HISTORY_HEADER: &str =
    "j,accepted,residual,tau,rho,compliance,tv_value,original_objective,aug_lagrangian,wall_time";

pub fn write_history_csv(path: &Path, history: &[IterationRecord]) -> Result<()> {
    let mut out = String::from(HISTORY_HEADER);
    out.push('\n');
    for rec in history {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            rec.j,
            rec.accepted as u8,
            rec.residual,
            rec.tau,
            rec.rho,
            rec.compliance,
            rec.tv_value,
            rec.original_objective,
            rec.aug_lagrangian,
            rec.wall_time,
        ));
    }
    fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))
}

/// Paints each triangle flat with its element value onto a square pixel
/// grid of `PIXELS_PER_CELL * n` pixels per side. Row 0 is the top of the
/// domain (`y = 1`).
pub fn rasterize(mesh: &Mesh, values: &[f64]) -> (usize, Vec<u8>) {
    let n = mesh.subdivisions;
    let size = PIXELS_PER_CELL * n;
    let mut pixels = vec![0u8; size * size];
    for py in 0..size {
        let y = 1.0 - (py as f64 + 0.5) / size as f64;
        for px in 0..size {
            let x = (px as f64 + 0.5) / size as f64;
            let ix = ((x * n as f64) as usize).min(n - 1);
            let iy = ((y * n as f64) as usize).min(n - 1);
            let fx = x * n as f64 - ix as f64;
            let fy = y * n as f64 - iy as f64;
            // cells split along the lower-left to upper-right diagonal
            let elem = 2 * (iy * n + ix) + usize::from(fy > fx);
            let value = values[elem].clamp(0.0, 1.0);
            pixels[py * size + px] = (value * 255.0).round() as u8;
        }
    }
    (size, pixels)
}

/// Binary 8-bit PGM (P5).
pub fn write_pgm(path: &Path, size: usize, pixels: &[u8]) -> Result<()> {
    let mut file =
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    write!(file, "P5\n{size} {size}\n255\n")?;
    file.write_all(pixels)?;
    Ok(())
}

pub fn write_field_snapshot(
    dir: &Path,
    name: &str,
    j: usize,
    mesh: &Mesh,
    values: &[f64],
) -> Result<()> {
    let (size, pixels) = rasterize(mesh, values);
    write_pgm(&dir.join(format!("{name}_{j:03}.pgm")), size, &pixels)
}

/// Element index/value listing of the final binary design.
pub fn write_final_w(path: &Path, w: &[f64]) -> Result<()> {
    let mut out = String::new();
    for (e, &value) in w.iter().enumerate() {
        out.push_str(&format!("{e} {}\n", value as u8));
    }
    fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))
}

pub fn write_summary(path: &Path, run: &AdmmRun, rho0: f64, seed: u64) -> Result<()> {
    let rejections = run.history.iter().filter(|r| !r.accepted).count();
    let last = run.history.last();
    let mut out = String::new();
    out.push_str(&format!("converged: {}\n", run.converged));
    out.push_str(&format!("iterations: {}\n", run.state.iteration));
    out.push_str(&format!("final_residual: {}\n", run.state.residual_sq()));
    out.push_str(&format!(
        "original_objective: {}\n",
        last.map_or(f64::NAN, |r| r.original_objective)
    ));
    out.push_str(&format!(
        "compliance: {}\n",
        last.map_or(f64::NAN, |r| r.compliance)
    ));
    out.push_str(&format!(
        "tv_value: {}\n",
        last.map_or(f64::NAN, |r| r.tv_value)
    ));
    out.push_str(&format!("rho0: {rho0}\n"));
    out.push_str(&format!("rho_final: {}\n", run.state.rho));
    out.push_str(&format!("rho_ratio: {}\n", run.state.rho / rho0));
    out.push_str(&format!("rejections: {rejections}\n"));
    out.push_str(&format!("seed: {seed}\n"));
    fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))
}
