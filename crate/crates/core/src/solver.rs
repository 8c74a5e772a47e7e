//! Direct numerical integration of the propagation equations on a slab grid:
//! classic RK4 in time, with the field reconstructed at every stage by
//! trapezoidal integration of the source term over depth.
//!
//! Two solvers share the scheme. `run_reduced` evolves the two collective
//! coherences (sum and difference of the Δm = 0 lines) that close on
//! themselves for an unmagnetized initial state; `run_full` keeps all four
//! populations and both optical coherences of the Δm = 0 transitions and is
//! used to confirm that the reduction is exact in the weak-field limit.

use num_complex::Complex64 as C64;

use crate::model::{
    Grid, InputPulse, IsotopeParams, ModelError, PulseTrain, TargetParams, CG_DELTA_M0,
};

/// Solver switches. `decay` scales every Γ term; disabling it isolates the
/// interference structure of the retrieval from the exponential envelope.
#[derive(Clone, Copy, Debug)]
pub struct SolveOpts {
    pub decay: bool,
    /// Record the input envelope alongside the output.
    pub record_input: bool,
    /// Record the exit-face coherences.
    pub record_coherences: bool,
    /// Keep the final depth-resolved state in the result.
    pub keep_final_state: bool,
}

impl Default for SolveOpts {
    fn default() -> Self {
        SolveOpts {
            decay: true,
            record_input: true,
            record_coherences: true,
            keep_final_state: false,
        }
    }
}

impl SolveOpts {
    pub fn no_decay() -> Self {
        SolveOpts { decay: false, ..Default::default() }
    }
}

/// Errors raised during integration.
#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("integration unstable at t = {t:.2} ns: max |coherence| = {magnitude:.3e} exceeds {bound:.3e}; reduce dt or refine n_z")]
    Instability { t: f64, magnitude: f64, bound: f64 },
}

/// Depth-resolved snapshot of the reduced model: coherences and field on the
/// slab nodes (z in units of the thickness, node 0 at the entrance face).
#[derive(Clone, Debug)]
pub struct FieldState {
    pub z: Vec<f64>,
    pub rho_s: Vec<C64>,
    pub rho_p: Vec<C64>,
    pub omega: Vec<C64>,
}

/// Time-resolved record of a run. `omega` is the exit-face envelope of the
/// channel the inputs were launched into; `omega_orth` is the orthogonal
/// polarization channel when a solver propagates one (vector model only).
#[derive(Clone, Debug, Default)]
pub struct TimeSeries {
    pub t: Vec<f64>,
    pub omega: Vec<C64>,
    pub omega_orth: Option<Vec<C64>>,
    pub omega_in: Option<Vec<C64>>,
    pub rho_s_exit: Option<Vec<C64>>,
    pub rho_p_exit: Option<Vec<C64>>,
    pub final_state: Option<FieldState>,
}

impl TimeSeries {
    /// Trapezoidal ∫|Ω|² dt of the primary channel over [lo, hi].
    pub fn energy_between(&self, lo: f64, hi: f64) -> f64 {
        trapezoid_energy(&self.t, &self.omega, lo, hi)
    }

    /// Trapezoidal ∫|Ω|² dt of the orthogonal channel over [lo, hi] (0 if absent).
    pub fn energy_between_orth(&self, lo: f64, hi: f64) -> f64 {
        self.omega_orth.as_ref().map_or(0.0, |om| trapezoid_energy(&self.t, om, lo, hi))
    }

    /// Energy of the recorded input envelope (entire record).
    pub fn input_energy(&self) -> f64 {
        self.omega_in
            .as_ref()
            .map_or(0.0, |om| trapezoid_energy(&self.t, om, f64::NEG_INFINITY, f64::INFINITY))
    }

    /// Index of the first sample with t ≥ lo.
    pub fn index_at(&self, lo: f64) -> usize {
        self.t.partition_point(|&t| t < lo)
    }
}

fn trapezoid_energy(t: &[f64], om: &[C64], lo: f64, hi: f64) -> f64 {
    let mut acc = 0.0;
    for k in 1..t.len() {
        // Count only segments fully inside [lo, hi]; windows are aligned to
        // the sample grid in practice.
        if t[k - 1] < lo || t[k] > hi {
            continue;
        }
        acc += 0.5 * (om[k].norm_sqr() + om[k - 1].norm_sqr()) * (t[k] - t[k - 1]);
    }
    acc
}

/// Time window [lo, hi] owned by control pulse `pulse_index`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeWindow {
    pub lo: f64,
    pub hi: f64,
    pub pulse_index: usize,
}

/// Split [0, t_end] at the midpoints between consecutive pulse centers.
/// Window 0 around the first (write) pulse holds the transmitted light;
/// windows k ≥ 1 hold the echo released by read pulse k.
pub fn echo_segments(train: &PulseTrain, t_end: f64) -> Vec<TimeWindow> {
    let mut windows = Vec::with_capacity(train.len());
    let mut lo = 0.0;
    for (k, hi) in train.boundaries(t_end).into_iter().enumerate() {
        windows.push(TimeWindow { lo, hi, pulse_index: k });
        lo = hi;
    }
    windows
}

/// Scalar summary of one output window.
#[derive(Clone, Copy, Debug)]
pub struct EchoReport {
    pub window: TimeWindow,
    /// ∫|Ω|² dt over the window.
    pub energy: f64,
    /// Peak |Ω| and its location.
    pub peak_abs: f64,
    pub peak_time: f64,
    /// Re Ω at the |Ω| peak (sign of the retrieved field).
    pub peak_re: f64,
    /// Intensity-weighted mean time.
    pub centroid: f64,
    /// Full width at half maximum of |Ω|², linearly interpolated.
    pub fwhm: f64,
}

impl EchoReport {
    /// Analyze the primary channel of `series` over `window`.
    pub fn analyze(series: &TimeSeries, window: TimeWindow) -> Self {
        Self::analyze_channel(&series.t, &series.omega, window)
    }

    /// Analyze an explicit channel over `window`.
    pub fn analyze_channel(t: &[f64], om: &[C64], window: TimeWindow) -> Self {
        let i0 = t.partition_point(|&x| x < window.lo);
        let i1 = t.partition_point(|&x| x <= window.hi);
        let (mut peak_abs2, mut peak_idx) = (0.0f64, i0);
        let (mut energy, mut moment) = (0.0, 0.0);
        for k in i0..i1 {
            let p = om[k].norm_sqr();
            if p > peak_abs2 {
                peak_abs2 = p;
                peak_idx = k;
            }
            if k > i0 {
                let seg = 0.5 * (p + om[k - 1].norm_sqr()) * (t[k] - t[k - 1]);
                energy += seg;
                moment += seg * 0.5 * (t[k] + t[k - 1]);
            }
        }
        let half = 0.5 * peak_abs2;
        let cross = |a: usize, b: usize| -> f64 {
            // Linear interpolation of |Ω|² between samples a < b across `half`.
            let (pa, pb) = (om[a].norm_sqr(), om[b].norm_sqr());
            if (pb - pa).abs() < f64::EPSILON {
                t[a]
            } else {
                t[a] + (half - pa) / (pb - pa) * (t[b] - t[a])
            }
        };
        let mut left = t.get(i0).copied().unwrap_or(window.lo);
        let mut k = peak_idx;
        while k > i0 {
            if om[k - 1].norm_sqr() < half {
                left = cross(k - 1, k);
                break;
            }
            k -= 1;
        }
        let mut right = t.get(i1.saturating_sub(1)).copied().unwrap_or(window.hi);
        let mut k = peak_idx;
        while k + 1 < i1 {
            if om[k + 1].norm_sqr() < half {
                right = cross(k, k + 1);
                break;
            }
            k += 1;
        }
        EchoReport {
            window,
            energy,
            peak_abs: peak_abs2.sqrt(),
            peak_time: t.get(peak_idx).copied().unwrap_or(window.lo),
            peak_re: om.get(peak_idx).map_or(0.0, |c| c.re),
            centroid: if energy > 0.0 { moment / energy } else { 0.5 * (window.lo + window.hi) },
            fwhm: right - left,
        }
    }
}

/// Reports for every window of the train.
pub fn window_reports(series: &TimeSeries, train: &PulseTrain, t_end: f64) -> Vec<EchoReport> {
    echo_segments(train, t_end).into_iter().map(|w| EchoReport::analyze(series, w)).collect()
}

// Shared integration plumbing: the field is slaved to the coherences, so each
// RK4 stage first rebuilds Ω(z) by a cumulative trapezoid of the source and
// then evaluates the local time derivatives.

struct Recorder {
    series: TimeSeries,
}

impl Recorder {
    fn new(opts: SolveOpts, n_samples: usize, dual: bool) -> Self {
        let series = TimeSeries {
            t: Vec::with_capacity(n_samples),
            omega: Vec::with_capacity(n_samples),
            omega_orth: dual.then(|| Vec::with_capacity(n_samples)),
            omega_in: opts.record_input.then(|| Vec::with_capacity(n_samples)),
            rho_s_exit: opts.record_coherences.then(|| Vec::with_capacity(n_samples)),
            rho_p_exit: opts.record_coherences.then(|| Vec::with_capacity(n_samples)),
            final_state: None,
        };
        Recorder { series }
    }

    fn push(&mut self, t: f64, omega: C64, omega_orth: Option<C64>, input: C64, rs: C64, rp: C64) {
        self.series.t.push(t);
        self.series.omega.push(omega);
        if let Some(v) = self.series.omega_orth.as_mut() {
            v.push(omega_orth.unwrap_or_default());
        }
        if let Some(v) = self.series.omega_in.as_mut() {
            v.push(input);
        }
        if let Some(v) = self.series.rho_s_exit.as_mut() {
            v.push(rs);
        }
        if let Some(v) = self.series.rho_p_exit.as_mut() {
            v.push(rp);
        }
    }
}

fn input_sum(inputs: &[InputPulse], t: f64) -> C64 {
    inputs.iter().map(|p| p.value(t)).sum()
}

/// Amplitude bound used by the runaway guard: the linear response keeps the
/// coherences below ~C·Ω0/(2Δ0); an order of magnitude above that (corrected
/// for the decay envelope) can only be numerical instability.
fn guard_bound(inputs: &[InputPulse], train: &PulseTrain) -> Option<f64> {
    let om0 = inputs.iter().map(|p| p.envelope.amplitude.abs()).fold(0.0, f64::max);
    let d0 =
        train.pulses().iter().map(|p| p.envelope.amplitude.abs()).fold(f64::INFINITY, f64::min);
    (om0 > 0.0 && d0.is_finite() && d0 > 0.0).then(|| 10.0 * CG_DELTA_M0 * om0 / (2.0 * d0))
}

/// Integrate the reduced two-coherence model and record the exit face.
///
/// The state per node is (ρS, ρP); the field obeys ∂z Ω = i(β/C)·ρP and the
/// inputs enter as the boundary value at z = 0. Polarization tags on the
/// inputs are ignored here: the scalar model describes a single channel.
pub fn run_reduced(
    train: &PulseTrain,
    inputs: &[InputPulse],
    target: &TargetParams,
    grid: &Grid,
    isotope: &IsotopeParams,
    opts: SolveOpts,
) -> Result<TimeSeries, SolverError> {
    grid.validate()?;
    let n = grid.n_z;
    let dz = target.thickness / n as f64;
    let beta = target.beta(isotope.gamma);
    let src_pref = C64::new(0.0, beta / CG_DELTA_M0);
    let drive_pref = C64::new(0.0, 0.5 * CG_DELTA_M0);
    let g2 = if opts.decay { 0.5 * isotope.gamma } else { 0.0 };
    let bound0 = guard_bound(inputs, train);

    let n_nodes = n + 1;
    let mut rs = vec![C64::default(); n_nodes];
    let mut rp = vec![C64::default(); n_nodes];
    let mut omega = vec![C64::default(); n_nodes];

    // Rebuild the field for given coherences at time t.
    let field = |rp: &[C64], t: f64, omega: &mut [C64]| {
        omega[0] = input_sum(inputs, t);
        for i in 1..n_nodes {
            omega[i] = omega[i - 1] + src_pref * (0.5 * dz) * (rp[i - 1] + rp[i]);
        }
    };

    let rhs =
        |rs: &[C64], rp: &[C64], t: f64, omega: &mut [C64], drs: &mut [C64], drp: &mut [C64]| {
            field(rp, t, omega);
            let d = train.delta(t);
            let rot = C64::new(0.0, d);
            for i in 0..n_nodes {
                drs[i] = -g2 * rs[i] - rot * rp[i];
                drp[i] = -g2 * rp[i] - rot * rs[i] + drive_pref * omega[i];
            }
        };

    let n_steps = grid.n_steps();
    let mut rec = Recorder::new(opts, n_steps + 1, false);
    field(&rp, 0.0, &mut omega);
    rec.push(0.0, omega[n], None, input_sum(inputs, 0.0), rs[n], rp[n]);

    let dt = grid.dt;
    let mut k1 = (vec![C64::default(); n_nodes], vec![C64::default(); n_nodes]);
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut tmp_s = vec![C64::default(); n_nodes];
    let mut tmp_p = vec![C64::default(); n_nodes];

    for step in 0..n_steps {
        let t = step as f64 * dt;
        rhs(&rs, &rp, t, &mut omega, &mut k1.0, &mut k1.1);
        for i in 0..n_nodes {
            tmp_s[i] = rs[i] + 0.5 * dt * k1.0[i];
            tmp_p[i] = rp[i] + 0.5 * dt * k1.1[i];
        }
        rhs(&tmp_s, &tmp_p, t + 0.5 * dt, &mut omega, &mut k2.0, &mut k2.1);
        for i in 0..n_nodes {
            tmp_s[i] = rs[i] + 0.5 * dt * k2.0[i];
            tmp_p[i] = rp[i] + 0.5 * dt * k2.1[i];
        }
        rhs(&tmp_s, &tmp_p, t + 0.5 * dt, &mut omega, &mut k3.0, &mut k3.1);
        for i in 0..n_nodes {
            tmp_s[i] = rs[i] + dt * k3.0[i];
            tmp_p[i] = rp[i] + dt * k3.1[i];
        }
        rhs(&tmp_s, &tmp_p, t + dt, &mut omega, &mut k4.0, &mut k4.1);
        for i in 0..n_nodes {
            rs[i] += dt / 6.0 * (k1.0[i] + 2.0 * (k2.0[i] + k3.0[i]) + k4.0[i]);
            rp[i] += dt / 6.0 * (k1.1[i] + 2.0 * (k2.1[i] + k3.1[i]) + k4.1[i]);
        }
        let t_new = (step + 1) as f64 * dt;
        field(&rp, t_new, &mut omega);
        rec.push(t_new, omega[n], None, input_sum(inputs, t_new), rs[n], rp[n]);

        if let Some(b0) = bound0 {
            let m = rs.iter().chain(rp.iter()).map(|c| c.norm_sqr()).fold(0.0, f64::max).sqrt();
            let bound = b0 * if opts.decay { (0.5 * isotope.gamma * t_new).exp() } else { 1.0 };
            if m > bound {
                return Err(SolverError::Instability { t: t_new, magnitude: m, bound });
            }
        }
    }

    let mut series = rec.series;
    if opts.keep_final_state {
        series.final_state = Some(FieldState {
            z: (0..n_nodes).map(|i| i as f64 * dz).collect(),
            rho_s: rs,
            rho_p: rp,
            omega: omega.clone(),
        });
    }
    Ok(series)
}

// Per-node state of the four-level model: populations of the two ground and
// two excited sublevels plus the two Δm = 0 optical coherences.
#[derive(Clone, Copy, Default)]
struct FullNode {
    r11: f64,
    r22: f64,
    r33: f64,
    r44: f64,
    r32: C64,
    r41: C64,
}

impl FullNode {
    fn axpy(&mut self, a: f64, d: &FullNode) {
        self.r11 += a * d.r11;
        self.r22 += a * d.r22;
        self.r33 += a * d.r33;
        self.r44 += a * d.r44;
        self.r32 += a * d.r32;
        self.r41 += a * d.r41;
    }
}

/// Integrate the four-level system (populations + both Δm = 0 coherences)
/// without the weak-field reduction. Initial state: the ground doublet
/// equally populated, no coherence. Agrees with `run_reduced` to rounding
/// error for weak inputs; kept as the independent reference.
pub fn run_full(
    train: &PulseTrain,
    inputs: &[InputPulse],
    target: &TargetParams,
    grid: &Grid,
    isotope: &IsotopeParams,
    opts: SolveOpts,
) -> Result<TimeSeries, SolverError> {
    grid.validate()?;
    let n = grid.n_z;
    let dz = target.thickness / n as f64;
    let beta = target.beta(isotope.gamma);
    // Source iβ(ρ41/C14 + ρ32/C23); both Δm = 0 lines share C = √(2/3).
    let src_pref = C64::new(0.0, beta / CG_DELTA_M0);
    let g = if opts.decay { isotope.gamma } else { 0.0 };
    let c0 = CG_DELTA_M0;
    let c_in2 = 1.0 / 3.0; // squared coefficient of the Δm = ±1 decay branches
    let bound0 = guard_bound(inputs, train);

    let n_nodes = n + 1;
    let mut state = vec![FullNode { r11: 0.5, r22: 0.5, ..Default::default() }; n_nodes];
    let mut omega = vec![C64::default(); n_nodes];

    let field = |st: &[FullNode], t: f64, omega: &mut [C64]| {
        omega[0] = input_sum(inputs, t);
        for i in 1..n_nodes {
            let s0 = st[i - 1].r41 + st[i - 1].r32;
            let s1 = st[i].r41 + st[i].r32;
            omega[i] = omega[i - 1] + src_pref * (0.5 * dz) * (s0 + s1);
        }
    };

    let rhs = |st: &[FullNode], t: f64, omega: &mut [C64], out: &mut [FullNode]| {
        field(st, t, omega);
        let d = train.delta(t);
        for i in 0..n_nodes {
            let s = &st[i];
            let om = omega[i];
            // Im(Ω ρ̄) with ρ̄ the lower→upper coherence = conj of the stored one.
            let w41 = (om * s.r41.conj()).im;
            let w32 = (om * s.r32.conj()).im;
            out[i] = FullNode {
                r11: g * (c_in2 * s.r33 + (2.0 / 3.0) * s.r44) + c0 * w41,
                r22: g * ((2.0 / 3.0) * s.r33 + c_in2 * s.r44) + c0 * w32,
                r33: -g * s.r33 - c0 * w32,
                r44: -g * s.r44 - c0 * w41,
                r32: -(C64::new(0.5 * g, -d)) * s.r32
                    - C64::new(0.0, 0.5 * c0) * om * (s.r33 - s.r22),
                r41: -(C64::new(0.5 * g, d)) * s.r41
                    - C64::new(0.0, 0.5 * c0) * om * (s.r44 - s.r11),
            };
        }
    };

    let n_steps = grid.n_steps();
    let mut rec = Recorder::new(opts, n_steps + 1, false);
    field(&state, 0.0, &mut omega);
    let exit_pair = |st: &FullNode| {
        // Map back to the (ρS, ρP) pair of the reduced model for recording.
        let rs = (st.r41 - st.r32) / C64::new(0.0, 1.0);
        let rp = st.r41 + st.r32;
        (rs, rp)
    };
    let (rs0, rp0) = exit_pair(&state[n]);
    rec.push(0.0, omega[n], None, input_sum(inputs, 0.0), rs0, rp0);

    let dt = grid.dt;
    let mut k1 = vec![FullNode::default(); n_nodes];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut tmp = state.clone();

    for step in 0..n_steps {
        let t = step as f64 * dt;
        rhs(&state, t, &mut omega, &mut k1);
        for i in 0..n_nodes {
            tmp[i] = state[i];
            tmp[i].axpy(0.5 * dt, &k1[i]);
        }
        rhs(&tmp, t + 0.5 * dt, &mut omega, &mut k2);
        for i in 0..n_nodes {
            tmp[i] = state[i];
            tmp[i].axpy(0.5 * dt, &k2[i]);
        }
        rhs(&tmp, t + 0.5 * dt, &mut omega, &mut k3);
        for i in 0..n_nodes {
            tmp[i] = state[i];
            tmp[i].axpy(dt, &k3[i]);
        }
        rhs(&tmp, t + dt, &mut omega, &mut k4);
        for i in 0..n_nodes {
            state[i].axpy(dt / 6.0, &k1[i]);
            state[i].axpy(dt / 3.0, &k2[i]);
            state[i].axpy(dt / 3.0, &k3[i]);
            state[i].axpy(dt / 6.0, &k4[i]);
        }
        let t_new = (step + 1) as f64 * dt;
        field(&state, t_new, &mut omega);
        let (rs, rp) = exit_pair(&state[n]);
        rec.push(t_new, omega[n], None, input_sum(inputs, t_new), rs, rp);

        if let Some(b0) = bound0 {
            let m = state
                .iter()
                .map(|s| s.r41.norm_sqr().max(s.r32.norm_sqr()))
                .fold(0.0, f64::max)
                .sqrt();
            let bound = b0 * if opts.decay { (0.5 * isotope.gamma * t_new).exp() } else { 1.0 };
            if m > bound {
                return Err(SolverError::Instability { t: t_new, magnitude: m, bound });
            }
        }
    }

    let mut series = rec.series;
    if opts.keep_final_state {
        let (rho_s, rho_p) = state.iter().map(exit_pair).unzip();
        series.final_state = Some(FieldState {
            z: (0..n_nodes).map(|i| i as f64 * dz).collect(),
            rho_s,
            rho_p,
            omega: omega.clone(),
        });
    }
    Ok(series)
}
