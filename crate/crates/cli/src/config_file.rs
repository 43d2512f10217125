//! Flat `key=value` configuration files.
//!
//! Lines are `key=value`, `#` starts a comment, blank lines are ignored.
//! Unknown keys are errors; missing keys take the documented defaults.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use topopt::SolverConfig;

/// Parses the configuration file at `path` and validates every range.
pub fn load_config(path: &Path) -> Result<SolverConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    let config = parse_config(&text)?;
    config.validate()?;
    Ok(config)
}

/// Parses configuration text; exposed separately for tests.
pub fn parse_config(text: &str) -> Result<SolverConfig> {
    let mut config = SolverConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("line {line_no}: expected `key=value`, got `{line}`");
        };
        let key = key.trim();
        let value = value.trim();
        apply(&mut config, key, value).map_err(|e| anyhow!("line {line_no}: {e}"))?;
    }
    Ok(config)
}

/// Serializes the effective configuration as a loadable `key=value` file,
/// so every run artifact records exactly what produced it.
pub fn config_text(config: &SolverConfig) -> String {
    format!(
        "n={}\nalpha={}\nrho0={}\ngamma={}\nbeta={}\nzeta={}\nc={}\ndelta_tol={}\n\
         v_max={}\nsimp_delta={}\nsimp_p={}\nsource={}\ntol_inner={}\nmax_inner={}\n\
         tol_lin={}\nq={}\nr_max={}\nsweeps={}\nrestarts={}\nseed={}\nmax_outer={}\n\
         output_dir={}\nsnapshot_stride={}\n",
        config.n,
        config.alpha,
        config.rho0,
        config.gamma,
        config.beta,
        config.zeta,
        config.c,
        config.delta_tol,
        config.v_max,
        config.simp_delta,
        config.simp_p,
        config.source,
        config.tol_inner,
        config.max_inner,
        config.tol_lin,
        config.q,
        config.r_max,
        config.sweeps,
        config.restarts,
        config.seed,
        config.max_outer,
        config.output_dir,
        config.snapshot_stride,
    )
}

fn apply(config: &mut SolverConfig, key: &str, value: &str) -> Result<()> {
    fn float(key: &str, value: &str) -> Result<f64> {
        value
            .parse()
            .map_err(|_| anyhow!("value `{value}` for `{key}` is not a number"))
    }
    fn integer(key: &str, value: &str) -> Result<usize> {
        value
            .parse()
            .map_err(|_| anyhow!("value `{value}` for `{key}` is not a nonnegative integer"))
    }

    match key {
        "n" => config.n = integer(key, value)?,
        "alpha" => config.alpha = float(key, value)?,
        "rho0" => config.rho0 = float(key, value)?,
        "gamma" => config.gamma = float(key, value)?,
        "beta" => config.beta = float(key, value)?,
        "zeta" => config.zeta = float(key, value)?,
        "c" => config.c = float(key, value)?,
        "delta_tol" => config.delta_tol = float(key, value)?,
        "v_max" => config.v_max = float(key, value)?,
        "simp_delta" => config.simp_delta = float(key, value)?,
        "simp_p" => config.simp_p = float(key, value)?,
        "source" => config.source = float(key, value)?,
        "tol_inner" => config.tol_inner = float(key, value)?,
        "max_inner" => config.max_inner = integer(key, value)?,
        "tol_lin" => config.tol_lin = float(key, value)?,
        "q" => config.q = float(key, value)?,
        "r_max" => config.r_max = integer(key, value)?,
        "sweeps" => config.sweeps = integer(key, value)?,
        "restarts" => config.restarts = integer(key, value)?,
        "seed" => {
            config.seed = value
                .parse()
                .map_err(|_| anyhow!("value `{value}` for `seed` is not a nonnegative integer"))?
        }
        "max_outer" => config.max_outer = integer(key, value)?,
        "output_dir" => config.output_dir = value.to_string(),
        "snapshot_stride" => config.snapshot_stride = integer(key, value)?,
        other => bail!("unknown key `{other}`"),
    }
    Ok(())
}
