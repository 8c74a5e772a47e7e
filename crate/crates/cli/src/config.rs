//! Run configuration: a versioned TOML document that either names a preset
//! scenario or builds one from scratch, with optional section-by-section
//! overrides. Unknown keys are rejected, and every invariant violation is
//! reported with the exact field path.

use serde::{Deserialize, Serialize};
use std::path::Path;
use xmem_core::experiments::{preset, preset_names, ModelKind, Scenario};
use xmem_core::model::{
    splitting_from_field, GaussianEnvelope, Grid, InputPulse, IsotopeParams, MagneticPulse,
    PulseTrain, TargetParams,
};

/// Config-file format version understood by this build.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    /// Syntax errors and unknown keys, straight from the deserializer.
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    /// An invariant violation, named by its field path.
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

fn invalid(path: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { path: path.to_string(), message: message.into() }
}

/// Top-level config document. Every section is optional on top of a named
/// scenario; a config without `scenario` must carry at least `target`, one
/// `[[magnet]]`, and `grid.t_end`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Format version; this build understands version 1.
    pub schema: u32,
    /// Preset scenario name (see `xmem presets`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub isotope: Option<IsotopeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    /// Magnetic pulse train; replaces the preset's train when nonempty.
    #[serde(default, rename = "magnet", skip_serializing_if = "Vec::is_empty")]
    pub magnets: Vec<MagnetSection>,
    /// Input x-ray pulses; replaces the preset's inputs when nonempty.
    #[serde(default, rename = "input", skip_serializing_if = "Vec::is_empty")]
    pub inputs: Vec<InputSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<RunSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
}

/// Isotope overrides; defaults are the ⁵⁷Fe values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsotopeSection {
    /// Excited-state lifetime 1/Γ in ns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lifetime: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_ground: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_excited: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSection {
    /// Resonant thickness ξ (dimensionless).
    pub resonant_thickness: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth_nodes: Option<usize>,
    /// Time step in ns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// End of the integration window in ns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
}

/// One magnetic pulse. Strength is given either as `area` (∫Δ dt in rad) or
/// as `field_tesla` (peak field); exactly one of the two.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MagnetSection {
    /// Center time in ns.
    pub center: f64,
    /// Full width at half maximum in ns.
    pub fwhm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_tesla: Option<f64>,
    /// Field axis angle in the transverse plane, rad (0 = x̂).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis_angle: Option<f64>,
}

/// One weak input x-ray pulse.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSection {
    pub center: f64,
    pub fwhm: f64,
    /// Peak Rabi frequency in rad/ns; defaults to 1e−3 Γ (weak-field regime).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    /// Carrier phase in rad.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelChoice {
    Reduced,
    Full,
    Vector,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelChoice>,
    /// Keep the Γ/2 coherence damping (true) or zero it (false).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<bool>,
    /// Name stem for output files.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Output directory; defaults to $XMEM_OUT_DIR, then the working directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    /// Keep every k-th time sample in the series file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stride: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<bool>,
}

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "XMEM_OUT_DIR";

/// File-writing choices after resolution.
#[derive(Clone, Debug)]
pub struct OutputOpts {
    pub dir: String,
    pub stride: usize,
    pub series: bool,
    pub summary: bool,
}

impl Default for OutputOpts {
    fn default() -> Self {
        let dir = std::env::var(OUT_DIR_ENV).unwrap_or_else(|_| ".".to_string());
        OutputOpts { dir, stride: 1, series: true, summary: true }
    }
}

/// A validated, runnable configuration.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub scenario: Scenario,
    pub isotope: IsotopeParams,
    pub output: OutputOpts,
    /// Output file stem (sanitized scenario or run name).
    pub stem: String,
}

/// Parse and structurally validate a config document.
pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let config: RunConfig = toml::from_str(text)?;
    if config.schema != SCHEMA_VERSION {
        return Err(invalid(
            "schema",
            format!("unsupported version {} (this build reads {SCHEMA_VERSION})", config.schema),
        ));
    }
    Ok(config)
}

/// Parse a config file.
pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    parse_config_str(&text)
}

/// Canonical serialization; `parse_config_str(serialize_config(c))` yields a
/// config equal to `c`.
pub fn serialize_config(config: &RunConfig) -> String {
    toml::to_string_pretty(config).expect("config serializes")
}

fn require_finite(x: f64, path: &str) -> Result<(), ConfigError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(invalid(path, format!("must be finite, got {x}")))
    }
}

fn resolve_isotope(section: Option<&IsotopeSection>) -> Result<IsotopeParams, ConfigError> {
    let mut iso = IsotopeParams::iron57();
    let Some(s) = section else { return Ok(iso) };
    if let Some(lifetime) = s.lifetime {
        require_finite(lifetime, "isotope.lifetime")?;
        if lifetime <= 0.0 {
            return Err(invalid("isotope.lifetime", format!("must be > 0 ns, got {lifetime}")));
        }
        iso.gamma = 1.0 / lifetime;
    }
    if let Some(g) = s.g_ground {
        require_finite(g, "isotope.g_ground")?;
        iso.g_ground = g;
    }
    if let Some(g) = s.g_excited {
        require_finite(g, "isotope.g_excited")?;
        iso.g_excited = g;
    }
    if iso.g_ground == iso.g_excited {
        return Err(invalid(
            "isotope.g_excited",
            "g-factors must differ (zero splitting per tesla)",
        ));
    }
    Ok(iso)
}

fn resolve_train(
    magnets: &[MagnetSection],
    iso: &IsotopeParams,
) -> Result<PulseTrain, ConfigError> {
    let mut pulses = Vec::with_capacity(magnets.len());
    for (k, m) in magnets.iter().enumerate() {
        require_finite(m.center, &format!("magnet[{k}].center"))?;
        if !(m.fwhm > 0.0) {
            return Err(invalid(
                &format!("magnet[{k}].fwhm"),
                format!("must be > 0 ns, got {}", m.fwhm),
            ));
        }
        let pulse = match (m.area, m.field_tesla) {
            (Some(area), None) => {
                require_finite(area, &format!("magnet[{k}].area"))?;
                MagneticPulse::with_area(m.center, m.fwhm, area, m.axis_angle.unwrap_or(0.0))
            }
            (None, Some(b)) => {
                require_finite(b, &format!("magnet[{k}].field_tesla"))?;
                let amplitude = splitting_from_field(b, iso);
                MagneticPulse {
                    envelope: GaussianEnvelope::new(m.center, m.fwhm, amplitude),
                    axis_angle: m.axis_angle.unwrap_or(0.0),
                }
            }
            (None, None) => {
                return Err(invalid(
                    &format!("magnet[{k}].area"),
                    "give either area or field_tesla",
                ));
            }
            (Some(_), Some(_)) => {
                return Err(invalid(
                    &format!("magnet[{k}].area"),
                    "area and field_tesla are mutually exclusive",
                ));
            }
        };
        pulses.push(pulse);
    }
    for k in 1..magnets.len() {
        if magnets[k].center == magnets[k - 1].center {
            return Err(invalid(
                &format!("magnet[{k}].center"),
                "pulse centers must be distinct (echo windows would collapse)",
            ));
        }
    }
    Ok(PulseTrain::new(pulses))
}

fn resolve_inputs(
    inputs: &[InputSection],
    iso: &IsotopeParams,
) -> Result<Vec<InputPulse>, ConfigError> {
    let weak = 1e-3 * iso.gamma;
    inputs
        .iter()
        .enumerate()
        .map(|(k, inp)| {
            require_finite(inp.center, &format!("input[{k}].center"))?;
            if !(inp.fwhm > 0.0) {
                return Err(invalid(
                    &format!("input[{k}].fwhm"),
                    format!("must be > 0 ns, got {}", inp.fwhm),
                ));
            }
            let amplitude = inp.amplitude.unwrap_or(weak);
            if !(amplitude >= 0.0) || !amplitude.is_finite() {
                return Err(invalid(
                    &format!("input[{k}].amplitude"),
                    format!("must be a finite Rabi frequency >= 0 rad/ns, got {amplitude}"),
                ));
            }
            Ok(InputPulse::new(inp.center, inp.fwhm, amplitude)
                .with_phase(inp.phase.unwrap_or(0.0)))
        })
        .collect()
}

fn sanitize_stem(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    for c in name.chars() {
        if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('-') {
            out.push('-');
        }
    }
    let trimmed = out.trim_matches('-');
    if trimmed.is_empty() {
        "run".to_string()
    } else {
        trimmed.to_string()
    }
}

/// Validate the cross-field invariants and build the runnable scenario.
pub fn resolve(config: &RunConfig) -> Result<Resolved, ConfigError> {
    let isotope = resolve_isotope(config.isotope.as_ref())?;

    let mut scenario = match &config.scenario {
        Some(name) => preset(name).ok_or_else(|| {
            invalid(
                "scenario",
                format!("unknown preset `{name}` (available: {})", preset_names().join(", ")),
            )
        })?,
        None => {
            if config.target.is_none() {
                return Err(invalid("target", "section required when no scenario preset is named"));
            }
            if config.magnets.is_empty() {
                return Err(invalid(
                    "magnet",
                    "at least one pulse required when no scenario preset is named",
                ));
            }
            let t_end = config.grid.as_ref().and_then(|g| g.t_end).ok_or_else(|| {
                invalid("grid.t_end", "required when no scenario preset is named")
            })?;
            Scenario {
                name: "custom".to_string(),
                train: PulseTrain::default(),
                inputs: Vec::new(),
                target: TargetParams::new(0.0),
                grid: Grid::default_to(t_end),
                model: ModelKind::Reduced,
                decay: true,
            }
        }
    };

    if let Some(t) = &config.target {
        require_finite(t.resonant_thickness, "target.resonant_thickness")?;
        if t.resonant_thickness < 0.0 {
            return Err(invalid(
                "target.resonant_thickness",
                format!("must be >= 0, got {}", t.resonant_thickness),
            ));
        }
        scenario.target = TargetParams::new(t.resonant_thickness);
    }

    if let Some(g) = &config.grid {
        if let Some(n) = g.depth_nodes {
            if n == 0 {
                return Err(invalid("grid.depth_nodes", "must be >= 1"));
            }
            scenario.grid.n_z = n;
        }
        if let Some(dt) = g.dt {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(invalid("grid.dt", format!("must be > 0 ns, got {dt}")));
            }
            scenario.grid.dt = dt;
        }
        if let Some(t_end) = g.t_end {
            if !(t_end > 0.0) || !t_end.is_finite() {
                return Err(invalid("grid.t_end", format!("must be > 0 ns, got {t_end}")));
            }
            scenario.grid.t_end = t_end;
        }
    }

    if !config.magnets.is_empty() {
        scenario.train = resolve_train(&config.magnets, &isotope)?;
    }
    if !config.inputs.is_empty() {
        scenario.inputs = resolve_inputs(&config.inputs, &isotope)?;
    }
    if scenario.train.is_empty() {
        return Err(invalid("magnet", "the resolved pulse train is empty"));
    }
    for (k, p) in scenario.train.pulses().iter().enumerate() {
        if p.envelope.center > scenario.grid.t_end {
            return Err(invalid(
                &format!("magnet[{k}].center"),
                format!(
                    "pulse at {} ns lies past grid.t_end = {} ns",
                    p.envelope.center, scenario.grid.t_end
                ),
            ));
        }
    }

    if let Some(r) = &config.run {
        if let Some(model) = r.model {
            scenario.model = match model {
                ModelChoice::Reduced => ModelKind::Reduced,
                ModelChoice::Full => ModelKind::Full,
                ModelChoice::Vector => ModelKind::Vector,
            };
        }
        if let Some(decay) = r.decay {
            scenario.decay = decay;
        }
        if let Some(name) = &r.name {
            scenario.name = name.clone();
        }
    }

    let mut output = OutputOpts::default();
    if let Some(o) = &config.output {
        if let Some(dir) = &o.dir {
            output.dir = dir.clone();
        }
        if let Some(stride) = o.stride {
            if stride == 0 {
                return Err(invalid("output.stride", "must be >= 1"));
            }
            output.stride = stride;
        }
        if let Some(series) = o.series {
            output.series = series;
        }
        if let Some(summary) = o.summary {
            output.summary = summary;
        }
    }

    let stem = sanitize_stem(&scenario.name);
    Ok(Resolved { scenario, isotope, output, stem })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_preset_config_resolves() {
        let cfg = parse_config_str("schema = 1\nscenario = \"storage-retrieval\"\n").unwrap();
        let r = resolve(&cfg).unwrap();
        assert_eq!(r.scenario.target.xi, 16.0);
        assert_eq!(r.scenario.train.len(), 2);
        assert_eq!(r.stem, "storage-retrieval");
    }

    #[test]
    fn negative_thickness_names_the_field() {
        let cfg = parse_config_str(
            "schema = 1\nscenario = \"storage-retrieval\"\n[target]\nresonant_thickness = -1.0\n",
        )
        .unwrap();
        let err = resolve(&cfg).unwrap_err().to_string();
        assert!(err.contains("target.resonant_thickness"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse_config_str("schema = 1\nscenario = \"storage-retrieval\"\nbogus = 3\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("bogus"), "{err}");
    }

    #[test]
    fn unknown_scenario_is_rejected() {
        let cfg = parse_config_str("schema = 1\nscenario = \"no-such\"\n").unwrap();
        let err = resolve(&cfg).unwrap_err().to_string();
        assert!(err.starts_with("scenario"), "{err}");
    }

    #[test]
    fn custom_scenario_requires_core_sections() {
        let cfg = parse_config_str("schema = 1\n[target]\nresonant_thickness = 8.0\n").unwrap();
        let err = resolve(&cfg).unwrap_err().to_string();
        assert!(err.starts_with("magnet"), "{err}");
    }

    #[test]
    fn field_strength_in_tesla_is_accepted() {
        let text = "schema = 1\n[target]\nresonant_thickness = 8.0\n[grid]\nt_end = 100.0\n\
                    [[magnet]]\ncenter = 15.0\nfwhm = 9.0\nfield_tesla = 34.0\n";
        let r = resolve(&parse_config_str(text).unwrap()).unwrap();
        let amp = r.scenario.train.pulses()[0].envelope.amplitude;
        assert!((amp / (34.0 * r.isotope.splitting_per_tesla()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn area_and_field_are_mutually_exclusive() {
        let text = "schema = 1\n[target]\nresonant_thickness = 8.0\n[grid]\nt_end = 100.0\n\
                    [[magnet]]\ncenter = 15.0\nfwhm = 9.0\narea = 3.14\nfield_tesla = 34.0\n";
        let err = resolve(&parse_config_str(text).unwrap()).unwrap_err().to_string();
        assert!(err.contains("magnet[0].area"), "{err}");
    }

    #[test]
    fn stem_is_filename_safe() {
        assert_eq!(sanitize_stem("storage-retrieval(xi=16, T=75)"), "storage-retrieval-xi-16-t-75");
        assert_eq!(sanitize_stem("///"), "run");
    }
}
