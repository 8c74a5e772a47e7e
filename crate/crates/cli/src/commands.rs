//! Subcommand implementations. Every failure is classified: bad input
//! (config or arguments) exits 2, runtime and validation failures exit 1.

use crate::config::{parse_config, resolve, ConfigError, Resolved, RunConfig, SCHEMA_VERSION};
use crate::output::{series_text, summary_text};
use std::path::{Path, PathBuf};
use xmem_core::experiments::{
    optimize_thickness, preset_names, scenario_efficiency_map, ExperimentError, OptimizeOpts,
};
use xmem_core::model::IsotopeParams;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
    #[error("{failed} validation check(s) failed")]
    Validation { failed: usize },
}

impl CliError {
    /// 2 for bad input, 1 for runtime or validation failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Runtime(_) | CliError::Validation { .. } => 1,
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(runtime)?;
    }
    std::fs::write(path, text).map_err(runtime)?;
    println!("wrote {}", path.display());
    Ok(())
}

/// `xmem run`: execute one scenario from a config file or a preset name.
pub fn cmd_run(
    config: Option<PathBuf>,
    preset: Option<String>,
    out: Option<String>,
    stride: Option<usize>,
) -> Result<(), CliError> {
    let parsed: RunConfig = match (&config, &preset) {
        (Some(path), None) => parse_config(path)?,
        (None, Some(name)) => RunConfig {
            schema: SCHEMA_VERSION,
            scenario: Some(name.clone()),
            isotope: None,
            target: None,
            grid: None,
            magnets: Vec::new(),
            inputs: Vec::new(),
            run: None,
            output: None,
        },
        _ => return Err(CliError::Usage("give exactly one of --config or --preset".into())),
    };
    let canonical = crate::config::serialize_config(&parsed);
    let mut resolved: Resolved = resolve(&parsed)?;
    if let Some(dir) = out {
        resolved.output.dir = dir;
    }
    if let Some(stride) = stride {
        if stride == 0 {
            return Err(CliError::Usage("--stride must be >= 1".into()));
        }
        resolved.output.stride = stride;
    }

    let series = resolved.scenario.run(&resolved.isotope).map_err(runtime)?;
    let dir = PathBuf::from(&resolved.output.dir);
    if resolved.output.series {
        let text = series_text(&series, resolved.output.stride);
        write_file(&dir.join(format!("{}_series.csv", resolved.stem)), &text)?;
    }
    if resolved.output.summary {
        let text = summary_text(&resolved, &series, &canonical);
        write_file(&dir.join(format!("{}_summary.toml", resolved.stem)), &text)?;
    }
    Ok(())
}

/// Parse a thickness axis: a single value, a comma list, or `lo:hi:n`.
pub fn parse_axis(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = |why: &str| CliError::Usage(format!("cannot parse axis `{spec}`: {why}"));
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected lo:hi:count"));
        }
        let lo: f64 = parts[0].parse().map_err(|_| bad("lo is not a number"))?;
        let hi: f64 = parts[1].parse().map_err(|_| bad("hi is not a number"))?;
        let n: usize = parts[2].parse().map_err(|_| bad("count is not an integer"))?;
        if n < 2 || !(hi > lo) {
            return Err(bad("need hi > lo and count >= 2"));
        }
        return Ok((0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect());
    }
    spec.split(',').map(|s| s.trim().parse::<f64>().map_err(|_| bad("not a number"))).collect()
}

/// `xmem sweep`: efficiency over a thickness × storage-time grid.
pub fn cmd_sweep(
    thickness: String,
    storage_times: Vec<f64>,
    no_decay: bool,
    serial: bool,
    out: Option<String>,
) -> Result<(), CliError> {
    let xis = parse_axis(&thickness)?;
    if xis.iter().any(|&x| x < 0.0) {
        return Err(CliError::Usage("thickness values must be >= 0".into()));
    }
    let times = if storage_times.is_empty() { vec![75.0] } else { storage_times };
    if times.iter().any(|&t| !(t > 0.0)) {
        return Err(CliError::Usage("storage times must be > 0 ns".into()));
    }
    let fe = IsotopeParams::iron57();
    let decay = !no_decay;

    let eta: Vec<Vec<f64>> = if serial {
        let mut rows = Vec::with_capacity(xis.len());
        for &xi in &xis {
            let mut row = Vec::with_capacity(times.len());
            for &t in &times {
                row.push(
                    xmem_core::experiments::retrieval_efficiency(xi, t, decay, &fe)
                        .map_err(runtime)?,
                );
            }
            rows.push(row);
        }
        rows
    } else {
        scenario_efficiency_map(&xis, &times, decay, &fe).map_err(runtime)?.eta
    };

    let mut text = String::from("# xmem sweep v1; times in ns\n");
    text.push_str(&format!("# decay = {decay}\n"));
    text.push_str("xi,storage_time_ns,efficiency\n");
    let mut best = (0.0f64, 0.0f64, f64::NEG_INFINITY);
    for (i, &xi) in xis.iter().enumerate() {
        for (j, &t) in times.iter().enumerate() {
            text.push_str(&format!("{xi:.4},{t:.4},{:.9e}\n", eta[i][j]));
            if eta[i][j] > best.2 {
                best = (xi, t, eta[i][j]);
            }
        }
    }
    let dir = out
        .or_else(|| std::env::var(crate::config::OUT_DIR_ENV).ok())
        .unwrap_or_else(|| ".".to_string());
    write_file(&PathBuf::from(dir).join("sweep.csv"), &text)?;
    println!("best: xi = {:.4}, T = {:.1} ns, efficiency = {:.6}", best.0, best.1, best.2);
    Ok(())
}

/// `xmem optimize`: golden-section search for the best thickness.
pub fn cmd_optimize(
    lo: f64,
    hi: f64,
    tol: f64,
    storage_time: f64,
    read_fwhm: f64,
    no_decay: bool,
) -> Result<(), CliError> {
    let fe = IsotopeParams::iron57();
    let opts = OptimizeOpts { decay: !no_decay, storage_time, read_fwhm };
    let best = optimize_thickness((lo, hi), tol, &opts, &fe).map_err(|e| match e {
        ExperimentError::InvalidBounds(_) => CliError::Usage(e.to_string()),
        other => CliError::Runtime(other.to_string()),
    })?;
    println!("optimal_xi = {:.4}", best.xi);
    println!("efficiency = {:.6}", best.eta);
    println!("evaluations = {}", best.evaluations);
    Ok(())
}

/// `xmem validate`: run the oracle suite; nonzero failures exit 1.
pub fn cmd_validate(quick: bool) -> Result<(), CliError> {
    let failed = crate::validate::run_checks(quick);
    if failed > 0 {
        return Err(CliError::Validation { failed });
    }
    Ok(())
}

/// `xmem presets`: list the built-in scenarios.
pub fn cmd_presets() -> Result<(), CliError> {
    for name in preset_names() {
        println!("{name}");
    }
    Ok(())
}
