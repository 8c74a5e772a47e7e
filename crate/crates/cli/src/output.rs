//! Output artifacts: a delimited time-series file and a structured summary
//! document per run. Formats are schema-stable — fixed column order, fixed
//! float formatting — so identical configs rewrite identical bytes.

use crate::config::Resolved;
use num_complex::Complex64 as C64;
use serde::Serialize;
use xmem_core::solver::TimeSeries;

/// 64-bit FNV-1a, used to stamp the summary with a hash of the config text.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

const SERIES_HEADER: &str = "\
# xmem series v1; times in ns, angular quantities in rad/ns
# intensity = |omega_x|^2 + |omega_y|^2
t_ns,re_omega_x,im_omega_x,re_omega_y,im_omega_y,intensity,rhoS_exit,im_rhoP_exit
";

/// Render the time series with the given sampling stride.
pub fn series_text(series: &TimeSeries, stride: usize) -> String {
    let zero: Vec<C64> = Vec::new();
    let orth = series.omega_orth.as_deref().unwrap_or(&zero);
    let rho_s = series.rho_s_exit.as_deref().unwrap_or(&zero);
    let rho_p = series.rho_p_exit.as_deref().unwrap_or(&zero);
    let at = |v: &[C64], k: usize| v.get(k).copied().unwrap_or_default();

    let mut out = String::with_capacity(SERIES_HEADER.len() + series.t.len() / stride * 128);
    out.push_str(SERIES_HEADER);
    for k in (0..series.t.len()).step_by(stride) {
        let x = series.omega[k];
        let y = at(orth, k);
        let intensity = x.norm_sqr() + y.norm_sqr();
        out.push_str(&format!(
            "{:.4},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e}\n",
            series.t[k],
            x.re,
            x.im,
            y.re,
            y.im,
            intensity,
            at(rho_s, k).re,
            at(rho_p, k).im,
        ));
    }
    out
}

#[derive(Serialize)]
struct Summary {
    schema: u32,
    name: String,
    solver_version: String,
    config_hash: String,
    model: String,
    decay: bool,
    resonant_thickness: f64,
    input_energy: f64,
    window: Vec<WindowSummary>,
}

#[derive(Serialize)]
struct WindowSummary {
    index: usize,
    lo_ns: f64,
    hi_ns: f64,
    energy: f64,
    energy_orth: f64,
    efficiency: f64,
    peak_abs: f64,
    peak_time_ns: f64,
    peak_re: f64,
    centroid_ns: f64,
    fwhm_ns: f64,
}

/// Render the per-run summary document (echo reports, efficiencies, config
/// hash, solver version) as versioned structured text.
pub fn summary_text(resolved: &Resolved, series: &TimeSeries, config_text: &str) -> String {
    let s = &resolved.scenario;
    let e_in = series.input_energy();
    let windows = s.windows();
    let reports = s.reports(series);
    let window = windows
        .iter()
        .zip(&reports)
        .map(|(w, r)| {
            let energy = series.energy_between(w.lo, w.hi);
            let energy_orth = series.energy_between_orth(w.lo, w.hi);
            WindowSummary {
                index: w.pulse_index,
                lo_ns: w.lo,
                hi_ns: w.hi,
                energy,
                energy_orth,
                efficiency: if e_in > 0.0 { (energy + energy_orth) / e_in } else { 0.0 },
                peak_abs: r.peak_abs,
                peak_time_ns: r.peak_time,
                peak_re: r.peak_re,
                centroid_ns: r.centroid,
                fwhm_ns: r.fwhm,
            }
        })
        .collect();
    let summary = Summary {
        schema: 1,
        name: s.name.clone(),
        solver_version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: format!("{:016x}", fnv1a64(config_text.as_bytes())),
        model: format!("{:?}", s.model).to_lowercase(),
        decay: s.decay,
        resonant_thickness: s.target.xi,
        input_energy: e_in,
        window,
    };
    toml::to_string_pretty(&summary).expect("summary serializes")
}
