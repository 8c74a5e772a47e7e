//! Ready-made experiment scenarios: storage and retrieval of a weak pulse,
//! the efficiency landscape over thickness and storage time, temporal
//! shaping, beam splitting into echo trains, two-pulse interference, and the
//! polarization switch. Plus a 1-D golden-section optimizer for the target
//! thickness.
//!
//! Conventions shared by every preset: the input pulse is centered at
//! t = 15 ns (4σ clear of the grid start) with amplitude 10⁻³·Γ, control
//! pulses are Gaussians of area π and 9 ns width unless stated, and all runs
//! use the default 200-slab, 0.01 ns grid.

use rayon::prelude::*;

use crate::analytic::{absorption_parameter, EchoPrediction};
use crate::model::{
    Channel, Grid, InputPulse, IsotopeParams, MagneticPulse, PulseTrain, TargetParams,
    WEAK_FIELD_RATIO,
};
use crate::polarization::run_vector;
use crate::solver::{
    echo_segments, run_full, run_reduced, EchoReport, SolveOpts, SolverError, TimeSeries,
    TimeWindow,
};

/// Center of the input pulse (and of the first control pulse) in every preset.
pub const INPUT_CENTER: f64 = 15.0;

/// Default pulse width (intensity FWHM) in ns.
pub const PULSE_FWHM: f64 = 9.0;

/// Which integrator a scenario uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Reduced,
    Full,
    Vector,
}

/// A fully specified run: pulses, inputs, target, grid, and model choice.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub train: PulseTrain,
    pub inputs: Vec<InputPulse>,
    pub target: TargetParams,
    pub grid: Grid,
    pub model: ModelKind,
    pub decay: bool,
}

impl Scenario {
    /// Execute the scenario with the configured integrator.
    pub fn run(&self, isotope: &IsotopeParams) -> Result<TimeSeries, SolverError> {
        let opts = SolveOpts { decay: self.decay, ..Default::default() };
        match self.model {
            ModelKind::Reduced => {
                run_reduced(&self.train, &self.inputs, &self.target, &self.grid, isotope, opts)
            }
            ModelKind::Full => {
                run_full(&self.train, &self.inputs, &self.target, &self.grid, isotope, opts)
            }
            ModelKind::Vector => {
                run_vector(&self.train, &self.inputs, &self.target, &self.grid, isotope, opts)
            }
        }
    }

    /// Output windows, one per control pulse (window 0 = transmission).
    pub fn windows(&self) -> Vec<TimeWindow> {
        echo_segments(&self.train, self.grid.t_end)
    }

    /// Per-window reports of the primary channel.
    pub fn reports(&self, series: &TimeSeries) -> Vec<EchoReport> {
        self.windows().into_iter().map(|w| EchoReport::analyze(series, w)).collect()
    }

    /// Leading-order prediction for echo `n` (1 = first echo, released by
    /// pulse n+1); `None` when the train has no such pulse.
    pub fn echo_prediction(&self, n: usize, isotope: &IsotopeParams) -> Option<EchoPrediction> {
        let read = self.train.pulses().get(n)?;
        let write = self.train.pulses().first()?;
        let a = absorption_parameter(self.target.xi, write.envelope.amplitude, isotope.gamma);
        let gamma = if self.decay { isotope.gamma } else { 0.0 };
        Some(EchoPrediction::nth(self.omega0(), n, a, read, INPUT_CENTER, gamma))
    }

    /// Amplitude of the (first) input pulse.
    pub fn omega0(&self) -> f64 {
        self.inputs.first().map_or(0.0, |p| p.envelope.amplitude)
    }
}

fn weak_amplitude(isotope: &IsotopeParams) -> f64 {
    WEAK_FIELD_RATIO * isotope.gamma
}

fn pi_pulse(center: f64, fwhm: f64, axis_angle: f64) -> MagneticPulse {
    MagneticPulse::with_area(center, fwhm, std::f64::consts::PI, axis_angle)
}

/// Write/read pair with an adjustable thickness and storage time; the
/// workhorse behind the storage preset, the efficiency map, and the
/// thickness optimizer.
pub fn storage_retrieval(xi: f64, storage_time: f64) -> Scenario {
    let read_center = INPUT_CENTER + storage_time;
    let fe = IsotopeParams::iron57();
    Scenario {
        name: format!("storage-retrieval(xi={xi}, T={storage_time})"),
        train: PulseTrain::new(vec![
            pi_pulse(INPUT_CENTER, PULSE_FWHM, 0.0),
            pi_pulse(read_center, PULSE_FWHM, 0.0),
        ]),
        inputs: vec![InputPulse::new(INPUT_CENTER, PULSE_FWHM, weak_amplitude(&fe))],
        target: TargetParams::new(xi),
        grid: Grid::default_to(read_center + 210.0),
        model: ModelKind::Reduced,
        decay: true,
    }
}

/// Storage and retrieval preset: ξ = 16, read pulse 75 ns after the input.
pub fn scenario_storage_retrieval() -> Scenario {
    let mut s = storage_retrieval(16.0, 75.0);
    s.name = "storage-retrieval".into();
    s
}

/// First-echo efficiency η = echo energy / input energy on a (ξ, T) grid.
#[derive(Clone, Debug)]
pub struct EfficiencyMap {
    pub xi: Vec<f64>,
    pub storage_time: Vec<f64>,
    /// η[i][j] for xi[i], storage_time[j].
    pub eta: Vec<Vec<f64>>,
}

impl EfficiencyMap {
    /// Maximum η and its (ξ, T) location.
    pub fn argmax(&self) -> (f64, f64, f64) {
        let mut best = (self.xi[0], self.storage_time[0], f64::NEG_INFINITY);
        for (i, &x) in self.xi.iter().enumerate() {
            for (j, &t) in self.storage_time.iter().enumerate() {
                if self.eta[i][j] > best.2 {
                    best = (x, t, self.eta[i][j]);
                }
            }
        }
        best
    }
}

/// First-echo efficiency of one (ξ, T) cell.
pub fn retrieval_efficiency(
    xi: f64,
    storage_time: f64,
    decay: bool,
    isotope: &IsotopeParams,
) -> Result<f64, SolverError> {
    let mut s = storage_retrieval(xi, storage_time);
    s.decay = decay;
    let series = s.run(isotope)?;
    let w = s.windows()[1];
    Ok(series.energy_between(w.lo, w.hi) / series.input_energy())
}

/// Compute the efficiency map over the given axes (parallel over cells).
pub fn scenario_efficiency_map(
    xis: &[f64],
    storage_times: &[f64],
    decay: bool,
    isotope: &IsotopeParams,
) -> Result<EfficiencyMap, SolverError> {
    let cells: Vec<(usize, usize)> =
        (0..xis.len()).flat_map(|i| (0..storage_times.len()).map(move |j| (i, j))).collect();
    let values: Result<Vec<f64>, SolverError> = cells
        .par_iter()
        .map(|&(i, j)| retrieval_efficiency(xis[i], storage_times[j], decay, isotope))
        .collect();
    let values = values?;
    let mut eta = vec![vec![0.0; storage_times.len()]; xis.len()];
    for (k, &(i, j)) in cells.iter().enumerate() {
        eta[i][j] = values[k];
    }
    Ok(EfficiencyMap { xi: xis.to_vec(), storage_time: storage_times.to_vec(), eta })
}

/// Retrieval with a read pulse of different width: `read_fwhm` < 9 ns
/// compresses the echo, > 9 ns stretches it (area stays π).
pub fn temporal_shaping(read_fwhm: f64) -> Scenario {
    let fe = IsotopeParams::iron57();
    Scenario {
        name: format!("temporal-shaping(read={read_fwhm}ns)"),
        train: PulseTrain::new(vec![
            pi_pulse(INPUT_CENTER, PULSE_FWHM, 0.0),
            pi_pulse(90.0, read_fwhm, 0.0),
        ]),
        inputs: vec![InputPulse::new(INPUT_CENTER, PULSE_FWHM, weak_amplitude(&fe))],
        target: TargetParams::new(16.0),
        grid: Grid::default_to(300.0),
        model: ModelKind::Reduced,
        decay: true,
    }
}

/// The two shaping presets: a 4.5 ns (compressing) and an 18 ns (stretching)
/// read pulse.
pub fn scenario_temporal_shaping() -> (Scenario, Scenario) {
    let mut fast = temporal_shaping(4.5);
    fast.name = "temporal-compression".into();
    let mut slow = temporal_shaping(18.0);
    slow.name = "temporal-stretching".into();
    (fast, slow)
}

/// Four identical π pulses split the stored photon into an echo train whose
/// signed amplitudes follow the thickness parameter A = 2Γξ/Δ0.
pub fn scenario_beam_splitter(xi: f64) -> Scenario {
    let fe = IsotopeParams::iron57();
    Scenario {
        name: format!("beam-splitter(xi={xi})"),
        train: PulseTrain::new(vec![
            pi_pulse(15.0, PULSE_FWHM, 0.0),
            pi_pulse(90.0, PULSE_FWHM, 0.0),
            pi_pulse(165.0, PULSE_FWHM, 0.0),
            pi_pulse(240.0, PULSE_FWHM, 0.0),
        ]),
        inputs: vec![InputPulse::new(INPUT_CENTER, PULSE_FWHM, weak_amplitude(&fe))],
        target: TargetParams::new(xi),
        grid: Grid::default_to(500.0),
        model: ModelKind::Reduced,
        decay: true,
    }
}

/// Two inputs stored under three π pulses 50 ns apart: the second input
/// (half amplitude, phase 0 or π) arrives with the second pulse and its
/// retrieval interferes with the delayed retrieval of the first.
pub fn scenario_interference(phase_shift: f64, xi: f64) -> Scenario {
    let fe = IsotopeParams::iron57();
    let om0 = weak_amplitude(&fe);
    Scenario {
        name: format!("interference(phase={phase_shift:.3}, xi={xi})"),
        train: PulseTrain::new(vec![
            pi_pulse(15.0, PULSE_FWHM, 0.0),
            pi_pulse(65.0, PULSE_FWHM, 0.0),
            pi_pulse(115.0, PULSE_FWHM, 0.0),
        ]),
        inputs: vec![
            InputPulse::new(15.0, PULSE_FWHM, om0),
            InputPulse::new(65.0, PULSE_FWHM, 0.5 * om0).with_phase(phase_shift),
        ],
        target: TargetParams::new(xi),
        grid: Grid::default_to(300.0),
        model: ModelKind::Reduced,
        decay: true,
    }
}

/// Write with the control field along ŷ, read along x̂: the echo leaves in
/// the polarization orthogonal to the π-polarized input.
pub fn scenario_polarization() -> Scenario {
    let fe = IsotopeParams::iron57();
    Scenario {
        name: "polarization-switch".into(),
        train: PulseTrain::new(vec![
            pi_pulse(INPUT_CENTER, PULSE_FWHM, std::f64::consts::FRAC_PI_2),
            pi_pulse(90.0, PULSE_FWHM, 0.0),
        ]),
        inputs: vec![InputPulse::new(INPUT_CENTER, PULSE_FWHM, weak_amplitude(&fe))
            .with_polarization(Channel::Pi)],
        target: TargetParams::new(16.0),
        grid: Grid::default_to(300.0),
        model: ModelKind::Vector,
        decay: true,
    }
}

/// All built-in presets by name.
pub fn preset_names() -> &'static [&'static str] {
    &[
        "storage-retrieval",
        "temporal-compression",
        "temporal-stretching",
        "beam-splitter-thin",
        "beam-splitter-null",
        "beam-splitter-thick",
        "interference-thin-phase0",
        "interference-thin-phasepi",
        "interference-thick-phase0",
        "interference-thick-phasepi",
        "polarization-switch",
    ]
}

/// Look up a preset by name (see [`preset_names`]).
pub fn preset(name: &str) -> Option<Scenario> {
    let pi = std::f64::consts::PI;
    let named = |mut s: Scenario| {
        s.name = name.into();
        Some(s)
    };
    match name {
        "storage-retrieval" => Some(scenario_storage_retrieval()),
        "temporal-compression" => Some(scenario_temporal_shaping().0),
        "temporal-stretching" => Some(scenario_temporal_shaping().1),
        "beam-splitter-thin" => named(scenario_beam_splitter(8.0)),
        "beam-splitter-null" => named(scenario_beam_splitter(16.0)),
        "beam-splitter-thick" => named(scenario_beam_splitter(24.0)),
        "interference-thin-phase0" => named(scenario_interference(0.0, 8.0)),
        "interference-thin-phasepi" => named(scenario_interference(pi, 8.0)),
        "interference-thick-phase0" => named(scenario_interference(0.0, 24.0)),
        "interference-thick-phasepi" => named(scenario_interference(pi, 24.0)),
        "polarization-switch" => Some(scenario_polarization()),
        _ => None,
    }
}

/// Errors from the thickness optimizer.
#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
    #[error(
        "bounds [{lo}, {hi}] do not bracket an interior maximum (best ξ = {xi:.3} on the boundary)"
    )]
    NotBracketed { lo: f64, hi: f64, xi: f64 },
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Settings for [`optimize_thickness`].
#[derive(Clone, Copy, Debug)]
pub struct OptimizeOpts {
    pub decay: bool,
    /// Delay between write and read centers (ns).
    pub storage_time: f64,
    pub read_fwhm: f64,
}

impl Default for OptimizeOpts {
    fn default() -> Self {
        OptimizeOpts { decay: true, storage_time: 75.0, read_fwhm: PULSE_FWHM }
    }
}

/// Result of the thickness search.
#[derive(Clone, Copy, Debug)]
pub struct ThicknessOptimum {
    pub xi: f64,
    pub eta: f64,
    pub evaluations: usize,
}

/// Golden-section search for the ξ maximizing the first-echo efficiency
/// (objective evaluated with `run_reduced`). Deterministic for a fixed
/// tolerance; errors if the bounds leave [0, 100] or the optimum sits on a
/// boundary instead of being bracketed.
pub fn optimize_thickness(
    bounds: (f64, f64),
    tol: f64,
    opts: &OptimizeOpts,
    isotope: &IsotopeParams,
) -> Result<ThicknessOptimum, ExperimentError> {
    let (lo, hi) = bounds;
    if !(0.0..=100.0).contains(&lo) || !(0.0..=100.0).contains(&hi) || lo > hi {
        return Err(ExperimentError::InvalidBounds(format!(
            "need 0 <= lo <= hi <= 100, got [{lo}, {hi}]"
        )));
    }
    if !(tol > 0.0) {
        return Err(ExperimentError::InvalidBounds(format!("tolerance {tol} must be positive")));
    }
    let mut evals = 0usize;
    let mut eta_at = |xi: f64| -> Result<f64, ExperimentError> {
        evals += 1;
        let mut s = storage_retrieval(xi, opts.storage_time);
        s.decay = opts.decay;
        s.train = PulseTrain::new(vec![
            pi_pulse(INPUT_CENTER, PULSE_FWHM, 0.0),
            pi_pulse(INPUT_CENTER + opts.storage_time, opts.read_fwhm, 0.0),
        ]);
        let series = s.run(isotope)?;
        let w = s.windows()[1];
        Ok(series.energy_between(w.lo, w.hi) / series.input_energy())
    };

    if hi - lo <= tol {
        let xi = if hi == lo { lo } else { 0.5 * (lo + hi) };
        let eta = eta_at(xi)?;
        return Ok(ThicknessOptimum { xi, eta, evaluations: evals });
    }

    // Standard golden-section: keep one of the two interior probes each turn.
    let invphi = 0.5 * (5.0f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - invphi * (b - a);
    let mut d = a + invphi * (b - a);
    let mut fc = eta_at(c)?;
    let mut fd = eta_at(d)?;
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = eta_at(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = eta_at(d)?;
        }
    }
    let (xi, eta) = if fc > fd { (c, fc) } else { (d, fd) };
    // The probes never reach the original endpoints; an optimum pinned to the
    // edge of the search interval means the bounds failed to bracket it.
    if xi - lo < tol || hi - xi < tol {
        let edge = if xi - lo < tol { lo } else { hi };
        return Err(ExperimentError::NotBracketed { lo, hi, xi: edge });
    }
    Ok(ThicknessOptimum { xi, eta, evaluations: evals })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_resolve_and_are_well_formed() {
        for &name in preset_names() {
            let s = preset(name).unwrap_or_else(|| panic!("missing preset {name}"));
            assert_eq!(s.name, name);
            assert!(!s.train.is_empty());
            assert!(!s.inputs.is_empty());
            assert!(s.grid.validate().is_ok());
            let fe = IsotopeParams::iron57();
            for inp in &s.inputs {
                inp.validate_weak_field(&fe, WEAK_FIELD_RATIO).expect("preset input too strong");
            }
            // Windows tile [0, t_end] with one window per pulse.
            let w = s.windows();
            assert_eq!(w.len(), s.train.len());
            assert_eq!(w[0].lo, 0.0);
            assert_eq!(w.last().unwrap().hi, s.grid.t_end);
        }
        assert!(preset("no-such-preset").is_none());
    }

    #[test]
    fn storage_preset_geometry() {
        let s = scenario_storage_retrieval();
        let p = s.train.pulses();
        assert_eq!(p.len(), 2);
        assert_eq!(p[0].envelope.center, 15.0);
        assert_eq!(p[1].envelope.center, 90.0);
        assert!((p[0].envelope.area() - std::f64::consts::PI).abs() < 1e-12);
        assert_eq!(s.grid.t_end, 300.0);
        assert_eq!(s.target.xi, 16.0);
    }

    #[test]
    fn interference_preset_second_input() {
        let s = scenario_interference(std::f64::consts::PI, 8.0);
        assert_eq!(s.inputs.len(), 2);
        assert_eq!(s.inputs[1].envelope.center, 65.0);
        assert!(
            (s.inputs[1].envelope.amplitude / s.inputs[0].envelope.amplitude - 0.5).abs() < 1e-12
        );
        assert_eq!(s.inputs[1].phase, std::f64::consts::PI);
        assert_eq!(s.train.len(), 3);
    }

    #[test]
    fn optimizer_validates_bounds() {
        let fe = IsotopeParams::iron57();
        let opts = OptimizeOpts::default();
        assert!(matches!(
            optimize_thickness((-1.0, 30.0), 0.1, &opts, &fe),
            Err(ExperimentError::InvalidBounds(_))
        ));
        assert!(matches!(
            optimize_thickness((10.0, 101.0), 0.1, &opts, &fe),
            Err(ExperimentError::InvalidBounds(_))
        ));
        assert!(matches!(
            optimize_thickness((30.0, 10.0), 0.1, &opts, &fe),
            Err(ExperimentError::InvalidBounds(_))
        ));
        assert!(matches!(
            optimize_thickness((10.0, 30.0), 0.0, &opts, &fe),
            Err(ExperimentError::InvalidBounds(_))
        ));
    }

    #[test]
    fn efficiency_map_shape() {
        // Tiny grid just to exercise the plumbing; physics-scale checks live
        // in the integration suite.
        let fe = IsotopeParams::iron57();
        let map = scenario_efficiency_map(&[0.0], &[75.0], true, &fe).unwrap();
        assert_eq!(map.eta.len(), 1);
        assert_eq!(map.eta[0].len(), 1);
        // ξ = 0: no medium, nothing stored, nothing retrieved.
        assert!(map.eta[0][0] < 1e-12, "eta(0) = {}", map.eta[0][0]);
    }
}
