//! Physical constants, level structure, pulse definitions, and the couplings
//! (Clebsch–Gordan table, field→splitting law) shared by every solver.
//!
//! Units throughout the crate: time in ns, rates and Rabi/splitting amplitudes
//! in rad/ns, magnetic field in tesla, depth in units of the target thickness.

use thiserror::Error;

/// Reduced Planck constant in neV·ns.
pub const HBAR_NEV_NS: f64 = 658.2119569;

/// Nuclear magneton over ħ, in rad ns⁻¹ T⁻¹.
pub const NUCLEAR_MAGNETON_PER_HBAR: f64 = 4.7894166e-2;

/// Clebsch–Gordan coefficient of the two Δm = 0 transitions, √(2/3).
pub const CG_DELTA_M0: f64 = 0.816_496_580_927_726;

/// Errors from constructing or validating model inputs.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("input pulse amplitude {amplitude:.3e} exceeds the weak-field bound {bound:.3e} (ratio limit {ratio:.1e} of the decay rate)")]
    WeakFieldViolated { amplitude: f64, bound: f64, ratio: f64 },
    #[error("pulse train is empty")]
    EmptyTrain,
}

/// Isotope-level data for the resonant nuclear transition.
///
/// The defaults describe the 14.413 keV Mössbauer transition of ⁵⁷Fe:
/// ground spin 1/2, excited spin 3/2, lifetime 141 ns. The g-factors are
/// overridable; only their difference enters the scalar splitting law.
#[derive(Clone, Debug, PartialEq)]
pub struct IsotopeParams {
    /// Spontaneous decay rate Γ in rad/ns (inverse lifetime).
    pub gamma: f64,
    /// Ground-state g-factor (μ_ground / (I_ground · μ_N)).
    pub g_ground: f64,
    /// Excited-state g-factor (μ_excited / (I_excited · μ_N)).
    pub g_excited: f64,
    /// Transition energy in keV (bookkeeping only; the envelope model is resonant).
    pub transition_kev: f64,
}

impl IsotopeParams {
    /// ⁵⁷Fe preset: Γ = 1/141 ns⁻¹, g_g = +0.18088, g_e = −0.10327.
    pub fn iron57() -> Self {
        IsotopeParams {
            gamma: 1.0 / 141.0,
            g_ground: 0.18088,
            g_excited: -0.10327,
            transition_kev: 14.413,
        }
    }

    /// Excited-state lifetime 1/Γ in ns.
    pub fn lifetime_ns(&self) -> f64 {
        1.0 / self.gamma
    }

    /// Natural linewidth ħΓ in neV.
    pub fn linewidth_nev(&self) -> f64 {
        HBAR_NEV_NS * self.gamma
    }

    /// Splitting of the Δm = 0 lines per tesla: ½(g_g − g_e)·μ_N/ħ, in rad ns⁻¹ T⁻¹.
    pub fn splitting_per_tesla(&self) -> f64 {
        0.5 * (self.g_ground - self.g_excited) * NUCLEAR_MAGNETON_PER_HBAR
    }
}

/// Hyperfine splitting Δ of the Δm = 0 transitions for a field of `b_tesla`.
pub fn splitting_from_field(b_tesla: f64, isotope: &IsotopeParams) -> f64 {
    isotope.splitting_per_tesla() * b_tesla
}

/// Field strength in tesla that produces the splitting `delta` (rad/ns).
pub fn field_for_splitting(delta: f64, isotope: &IsotopeParams) -> f64 {
    delta / isotope.splitting_per_tesla()
}

/// Clebsch–Gordan coefficient C(1/2 1 3/2; m_g M m_e) for the M1 manifold,
/// indexed by doubled magnetic quantum numbers (`two_m_g` ∈ {−1, +1},
/// `two_m_e` ∈ {−3, −1, +1, +3}). Zero for |m_e − m_g| > 1.
pub fn clebsch_gordan(two_m_g: i32, two_m_e: i32) -> f64 {
    match (two_m_g, two_m_e) {
        (-1, -3) | (1, 3) => 1.0,
        (-1, -1) | (1, 1) => CG_DELTA_M0,
        (-1, 1) | (1, -1) => (1.0f64 / 3.0).sqrt(),
        _ => 0.0,
    }
}

/// Error function, |error| < 1.2e−7 (rational approximation of erfc).
pub fn erf(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let erfc = t
        * (-z * z - 1.26551223
            + t * (1.00002368
                + t * (0.37409196
                    + t * (0.09678418
                        + t * (-0.18628806
                            + t * (0.27886807
                                + t * (-1.13520398
                                    + t * (1.48851587 + t * (-0.82215223 + t * 0.17087277)))))))))
            .exp();
    if x >= 0.0 {
        1.0 - erfc
    } else {
        erfc - 1.0
    }
}

/// Gaussian envelope f(t) = amplitude · exp(−2 ln2 ((t − center)/fwhm)²).
///
/// `fwhm` is the full width at half maximum of the squared envelope |f|²;
/// the envelope itself has width √2·fwhm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianEnvelope {
    pub center: f64,
    pub fwhm: f64,
    pub amplitude: f64,
}

impl GaussianEnvelope {
    pub fn new(center: f64, fwhm: f64, amplitude: f64) -> Self {
        GaussianEnvelope { center, fwhm, amplitude }
    }

    /// Envelope with `area` = ∫f dt fixed instead of the amplitude.
    pub fn from_area(center: f64, fwhm: f64, area: f64) -> Self {
        GaussianEnvelope { center, fwhm, amplitude: amplitude_for_area(fwhm, area) }
    }

    pub fn value(&self, t: f64) -> f64 {
        let u = (t - self.center) / self.fwhm;
        self.amplitude * (-2.0 * std::f64::consts::LN_2 * u * u).exp()
    }

    /// Standard deviation of the envelope, fwhm/√(8 ln2).
    pub fn sigma(&self) -> f64 {
        self.fwhm / (8.0 * std::f64::consts::LN_2).sqrt()
    }

    /// Closed-form area ∫f dt = amplitude · fwhm · √(π/(2 ln2)).
    pub fn area(&self) -> f64 {
        self.amplitude * self.fwhm * (std::f64::consts::PI / (2.0 * std::f64::consts::LN_2)).sqrt()
    }

    /// Running integral ∫_{−∞}^t f dt′ (Gaussian CDF scaled to the area).
    pub fn integral_to(&self, t: f64) -> f64 {
        let s = self.sigma();
        self.area() * 0.5 * (1.0 + erf((t - self.center) / (s * std::f64::consts::SQRT_2)))
    }
}

/// Amplitude that gives a Gaussian of width `fwhm` the time integral `area`.
pub fn amplitude_for_area(fwhm: f64, area: f64) -> f64 {
    area / (fwhm * (std::f64::consts::PI / (2.0 * std::f64::consts::LN_2)).sqrt())
}

/// One pulse of the control magnetic field. The envelope amplitude is the
/// splitting amplitude Δ0 in rad/ns; `axis_angle` is the field direction in
/// the transverse plane, measured from x̂ (the propagation axis is ẑ).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MagneticPulse {
    pub envelope: GaussianEnvelope,
    pub axis_angle: f64,
}

impl MagneticPulse {
    /// Pulse with a prescribed area ∫Δ dt (π for the storage protocol).
    pub fn with_area(center: f64, fwhm: f64, area: f64, axis_angle: f64) -> Self {
        MagneticPulse { envelope: GaussianEnvelope::from_area(center, fwhm, area), axis_angle }
    }

    /// Splitting Δ(t) in rad/ns.
    pub fn delta(&self, t: f64) -> f64 {
        self.envelope.value(t)
    }

    /// Accumulated phase ∫_{−∞}^t Δ dt′.
    pub fn phase_integral(&self, t: f64) -> f64 {
        self.envelope.integral_to(t)
    }

    /// Peak field strength in tesla for the given isotope.
    pub fn peak_field_tesla(&self, isotope: &IsotopeParams) -> f64 {
        field_for_splitting(self.envelope.amplitude, isotope)
    }
}

/// Linear polarization channel of the x-ray field, named by the electric
/// field direction: `Pi` along x̂, `Sigma` along ŷ (propagation along ẑ).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Channel {
    Pi,
    Sigma,
}

/// One weak input x-ray pulse (Rabi-frequency envelope, rad/ns).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InputPulse {
    pub envelope: GaussianEnvelope,
    /// Carrier phase in radians (0 or π in the interference protocol).
    pub phase: f64,
    pub polarization: Channel,
}

impl InputPulse {
    pub fn new(center: f64, fwhm: f64, amplitude: f64) -> Self {
        InputPulse {
            envelope: GaussianEnvelope::new(center, fwhm, amplitude),
            phase: 0.0,
            polarization: Channel::Pi,
        }
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn with_polarization(mut self, polarization: Channel) -> Self {
        self.polarization = polarization;
        self
    }

    /// Complex envelope value amplitude·e^{iφ}·gaussian(t).
    pub fn value(&self, t: f64) -> num_complex::Complex64 {
        num_complex::Complex64::from_polar(self.envelope.value(t), self.phase)
    }

    /// Enforce the weak-field regime: amplitude ≤ ratio · Γ.
    pub fn validate_weak_field(
        &self,
        isotope: &IsotopeParams,
        ratio: f64,
    ) -> Result<(), ModelError> {
        let bound = ratio * isotope.gamma;
        if self.envelope.amplitude.abs() > bound {
            return Err(ModelError::WeakFieldViolated {
                amplitude: self.envelope.amplitude,
                bound,
                ratio,
            });
        }
        Ok(())
    }
}

/// Default weak-field ratio bound: amplitudes up to 10⁻³·Γ.
pub const WEAK_FIELD_RATIO: f64 = 1e-3;

/// Ordered train of control pulses.
#[derive(Clone, Debug, Default)]
pub struct PulseTrain {
    pulses: Vec<MagneticPulse>,
}

impl PulseTrain {
    /// Build a train; pulses are kept sorted by center time.
    pub fn new(mut pulses: Vec<MagneticPulse>) -> Self {
        pulses.sort_by(|a, b| a.envelope.center.total_cmp(&b.envelope.center));
        PulseTrain { pulses }
    }

    pub fn pulses(&self) -> &[MagneticPulse] {
        &self.pulses
    }

    pub fn len(&self) -> usize {
        self.pulses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pulses.is_empty()
    }

    /// Total splitting Δ(t) summed over pulses (they are far apart in practice).
    pub fn delta(&self, t: f64) -> f64 {
        self.pulses.iter().map(|p| p.delta(t)).sum()
    }

    /// Midpoints between consecutive pulse centers; segment k of
    /// [boundary(k−1), boundary(k)] belongs to pulse k.
    pub fn boundaries(&self, t_end: f64) -> Vec<f64> {
        let mut b = Vec::with_capacity(self.pulses.len() + 1);
        for w in self.pulses.windows(2) {
            b.push(0.5 * (w[0].envelope.center + w[1].envelope.center));
        }
        b.push(t_end);
        b
    }

    /// Index of the pulse whose segment contains time `t`.
    pub fn active_index(&self, t: f64) -> usize {
        let mut k = 0;
        for w in self.pulses.windows(2) {
            if t >= 0.5 * (w[0].envelope.center + w[1].envelope.center) {
                k += 1;
            }
        }
        k
    }
}

/// Target geometry: resonant thickness ξ (dimensionless optical depth) and
/// physical thickness L (arbitrary unit; only β·L = 4Γξ is observable).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TargetParams {
    pub xi: f64,
    pub thickness: f64,
}

impl TargetParams {
    pub fn new(xi: f64) -> Self {
        TargetParams { xi, thickness: 1.0 }
    }

    /// Coupling density β = 4Γξ/L in rad ns⁻¹ per unit depth.
    pub fn beta(&self, gamma: f64) -> f64 {
        4.0 * gamma * self.xi / self.thickness
    }
}

/// Discretization: `n_z` slabs over the target depth, fixed time step `dt`
/// up to `t_end` (ns).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub n_z: usize,
    pub dt: f64,
    pub t_end: f64,
}

impl Grid {
    pub fn new(n_z: usize, dt: f64, t_end: f64) -> Self {
        Grid { n_z, dt, t_end }
    }

    /// Default resolution: 200 slabs, 0.01 ns steps.
    pub fn default_to(t_end: f64) -> Self {
        Grid { n_z: 200, dt: 0.01, t_end }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.n_z < 2 {
            return Err(ModelError::InvalidGrid(format!("n_z = {} (need ≥ 2)", self.n_z)));
        }
        if !(self.dt > 0.0) {
            return Err(ModelError::InvalidGrid(format!("dt = {} (need > 0)", self.dt)));
        }
        if !(self.t_end > self.dt) {
            return Err(ModelError::InvalidGrid(format!(
                "t_end = {} (need > dt = {})",
                self.t_end, self.dt
            )));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}
