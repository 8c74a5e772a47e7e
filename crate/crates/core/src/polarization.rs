//! Polarization-resolved propagation. The control field may point along any
//! transverse direction, pulse by pulse; the photon field carries two linear
//! channels (π: E ∥ x̂, σ: E ∥ ŷ, propagation along ẑ, so the photon's
//! magnetic field is ŷ and −x̂ respectively, the component that drives the
//! M1 transitions).
//!
//! Between pulses the state is kept in the quantization frame of the active
//! pulse; at each segment boundary the sublevel amplitudes are rotated to the
//! frame of the next pulse. All transverse axes share the same frame ŷ-axis
//! (−ẑ), so frame changes are single rotations about it, implemented with the
//! real Wigner matrices of spin 1/2 and 3/2.
//!
//! In the weak-field limit the ground doublet stays frozen at half
//! population and only the 4×2 block of excited–ground amplitudes evolves.
//! With a fixed axis along ŷ and a π-polarized input, the Δm = 0 pair
//! decouples and this model reduces exactly to the scalar one.

use num_complex::Complex64 as C64;

use crate::model::{
    Channel, Grid, InputPulse, IsotopeParams, ModelError, PulseTrain, TargetParams, CG_DELTA_M0,
};
use crate::solver::{SolveOpts, SolverError, TimeSeries};

/// The six M1 transitions as (excited index, ground index, Δm, coefficient);
/// excited sublevels ascend m_e = −3/2…+3/2, ground m_g = −1/2, +1/2.
const TRANSITIONS: [(usize, usize, i32, f64); 6] = [
    (0, 0, -1, 1.0),
    (1, 0, 0, 0.816_496_580_927_726),
    (1, 1, -1, 0.577_350_269_189_625_8),
    (2, 0, 1, 0.577_350_269_189_625_8),
    (2, 1, 0, 0.816_496_580_927_726),
    (3, 1, 1, 1.0),
];

/// Precession-rate factors (ground, excited) relative to the line splitting:
/// γ_g = scale_g·Δ(t), γ_e = scale_e·Δ(t), normalized so the Δm = 0 lines
/// sit at ∓Δ.
pub fn precession_scales(isotope: &IsotopeParams) -> (f64, f64) {
    let diff = isotope.g_ground - isotope.g_excited;
    (2.0 * isotope.g_ground / diff, 2.0 * isotope.g_excited / diff)
}

/// Projection of the two photon channels onto the spherical components of the
/// quantization frame of an axis at `axis_angle` from x̂ in the transverse
/// plane: rows M = −1, 0, +1; columns (π, σ). All entries are real, the
/// columns are unit-norm and mutually orthogonal.
pub fn channel_projections(axis_angle: f64) -> [[f64; 2]; 3] {
    let (nx, ny) = (axis_angle.cos(), axis_angle.sin());
    let r = std::f64::consts::FRAC_1_SQRT_2;
    [[-nx * r, -ny * r], [ny, -nx], [nx * r, ny * r]]
}

/// Real Wigner rotation matrix d^j(θ) about the frame ŷ-axis, ascending-m
/// basis, for doubled spin `two_j` (1 or 3 here). Computed as exp(θK) with K
/// the real antisymmetric generator, by scaling-and-squaring; exact identity
/// at θ = 0 and d(2π) = −1 for half-integer spin.
pub fn little_d(two_j: u32, theta: f64) -> Vec<Vec<f64>> {
    let dim = (two_j + 1) as usize;
    let j = two_j as f64 / 2.0;
    // K[m][m+1] = +a_m/2, K[m+1][m] = −a_m/2 with a_m = √(j(j+1) − m(m+1)).
    let mut k = vec![vec![0.0; dim]; dim];
    for b in 0..dim - 1 {
        let m = b as f64 - j;
        let a = (j * (j + 1.0) - m * (m + 1.0)).sqrt();
        k[b][b + 1] = 0.5 * a;
        k[b + 1][b] = -0.5 * a;
    }
    // Scale so the Taylor series of exp converges fast, then square back.
    let norm = theta.abs() * (j + 0.5);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let h = theta / f64::powi(2.0, squarings as i32);
    let mut term = identity(dim);
    let mut result = identity(dim);
    for order in 1..=16 {
        term = mat_mul(&term, &k);
        scale_in_place(&mut term, h / order as f64);
        add_in_place(&mut result, &term);
    }
    for _ in 0..squarings {
        result = mat_mul(&result, &result);
    }
    result
}

fn identity(dim: usize) -> Vec<Vec<f64>> {
    (0..dim).map(|i| (0..dim).map(|j| f64::from(i == j)).collect()).collect()
}

fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let dim = a.len();
    let mut out = vec![vec![0.0; dim]; dim];
    for i in 0..dim {
        for l in 0..dim {
            let v = a[i][l];
            if v != 0.0 {
                for j in 0..dim {
                    out[i][j] += v * b[l][j];
                }
            }
        }
    }
    out
}

fn scale_in_place(m: &mut [Vec<f64>], s: f64) {
    for row in m {
        for v in row {
            *v *= s;
        }
    }
}

fn add_in_place(a: &mut [Vec<f64>], b: &[Vec<f64>]) {
    for (ra, rb) in a.iter_mut().zip(b) {
        for (va, vb) in ra.iter_mut().zip(rb) {
            *va += vb;
        }
    }
}

/// Excited–ground amplitude block of one slab node in the weak-field limit:
/// rows are the four excited sublevels, columns the frozen ground doublet
/// (populations ½ each, excited populations of higher order and dropped).
#[derive(Clone, Copy, Debug, Default)]
pub struct SublevelState {
    pub block: [[C64; 2]; 4],
}

impl SublevelState {
    /// Re-express the amplitudes in the frame of an axis rotated by `theta`
    /// about the shared frame ŷ-axis: block ← d^{3/2}(θ)ᵀ · block · d^{1/2}(θ).
    pub fn rotated(&self, theta: f64) -> Self {
        let de = little_d(3, theta);
        let dg = little_d(1, theta);
        let mut out = SublevelState::default();
        for e in 0..4 {
            for g in 0..2 {
                let mut acc = C64::default();
                for a in 0..4 {
                    for b in 0..2 {
                        acc += de[a][e] * self.block[a][b] * dg[b][g];
                    }
                }
                out.block[e][g] = acc;
            }
        }
        out
    }

    /// Frobenius norm of the block (rotation invariant).
    pub fn norm(&self) -> f64 {
        self.block.iter().flatten().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Full 6×6 density matrix (ground doublet first), with the ground block
    /// at ½·I and zero excited populations, completed hermitially.
    pub fn as_matrix(&self) -> [[C64; 6]; 6] {
        let mut m = [[C64::default(); 6]; 6];
        m[0][0] = C64::new(0.5, 0.0);
        m[1][1] = C64::new(0.5, 0.0);
        for e in 0..4 {
            for g in 0..2 {
                m[2 + e][g] = self.block[e][g];
                m[g][2 + e] = self.block[e][g].conj();
            }
        }
        m
    }

    /// Smallest eigenvalue of [`Self::as_matrix`]. The block structure
    /// (ground ½·I, excited 0) pins the spectrum to (¼ ± √(1/16 + s²)) per
    /// singular value s of the block, so only the 2×2 Gram matrix is needed.
    pub fn min_eigenvalue(&self) -> f64 {
        // Largest eigenvalue of blockᴴ·block, closed form for 2×2 Hermitian.
        let mut gram = [[C64::default(); 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                let mut acc = C64::default();
                for e in 0..4 {
                    acc += self.block[e][a].conj() * self.block[e][b];
                }
                gram[a][b] = acc;
            }
        }
        let tr = gram[0][0].re + gram[1][1].re;
        let det = gram[0][0].re * gram[1][1].re - gram[0][1].norm_sqr();
        let s2 = 0.5 * (tr + (tr * tr - 4.0 * det).max(0.0).sqrt());
        0.25 - (1.0 / 16.0 + s2).sqrt()
    }

    /// Physical-state check: the dropped excited populations are O(|block|²),
    /// so the matrix may dip below zero by that order but no further.
    pub fn is_valid(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }
}

/// Integrate the polarization-resolved model and record both exit channels:
/// the primary series is π (E ∥ x̂), `omega_orth` is σ (E ∥ ŷ).
pub fn run_vector(
    train: &PulseTrain,
    inputs: &[InputPulse],
    target: &TargetParams,
    grid: &Grid,
    isotope: &IsotopeParams,
    opts: SolveOpts,
) -> Result<TimeSeries, SolverError> {
    grid.validate()?;
    if train.is_empty() {
        return Err(ModelError::EmptyTrain.into());
    }
    let n = grid.n_z;
    let n_nodes = n + 1;
    let dz = target.thickness / n as f64;
    let beta = target.beta(isotope.gamma);
    // Emission prefactor 3β/2 per transition restores ∂zΩ = i(β/C)·ρP on the
    // Δm = 0 pair (3C/2 = 1/C for C = √(2/3)).
    let emit = C64::new(0.0, 1.5 * beta);
    let g2 = if opts.decay { 0.5 * isotope.gamma } else { 0.0 };
    let (scale_g, scale_e) = precession_scales(isotope);
    let pulses = train.pulses();
    let boundaries = train.boundaries(grid.t_end);

    // Per-transition splitting factors ω_ij = Δ(t)·(scale_e·m_e − scale_g·m_g).
    let detune_factor: Vec<f64> = TRANSITIONS
        .iter()
        .map(|&(e, g, _, _)| {
            let me = e as f64 - 1.5;
            let mg = g as f64 - 0.5;
            scale_e * me - scale_g * mg
        })
        .collect();

    let om0 = inputs.iter().map(|p| p.envelope.amplitude.abs()).fold(0.0, f64::max);
    let d0 = pulses.iter().map(|p| p.envelope.amplitude.abs()).fold(f64::INFINITY, f64::min);
    let bound0 = (om0 > 0.0 && d0 > 0.0).then(|| 10.0 * CG_DELTA_M0 * om0 / (2.0 * d0));

    let boundary_value = |t: f64, ch: Channel| -> C64 {
        inputs.iter().filter(|p| p.polarization == ch).map(|p| p.value(t)).sum()
    };

    let mut state = vec![SublevelState::default(); n_nodes];
    let mut om_pi = vec![C64::default(); n_nodes];
    let mut om_sg = vec![C64::default(); n_nodes];

    // Rebuild both channel fields from the node sources at time t.
    let field = |st: &[SublevelState],
                 proj: &[[f64; 2]; 3],
                 t: f64,
                 om_pi: &mut [C64],
                 om_sg: &mut [C64]| {
        om_pi[0] = boundary_value(t, Channel::Pi);
        om_sg[0] = boundary_value(t, Channel::Sigma);
        let mut prev = node_source(&st[0], proj);
        for i in 1..n_nodes {
            let cur = node_source(&st[i], proj);
            om_pi[i] = om_pi[i - 1] + emit * (0.5 * dz) * (prev[0] + cur[0]);
            om_sg[i] = om_sg[i - 1] + emit * (0.5 * dz) * (prev[1] + cur[1]);
            prev = cur;
        }
    };

    let rhs = |st: &[SublevelState],
               proj: &[[f64; 2]; 3],
               delta: f64,
               t: f64,
               om_pi: &mut [C64],
               om_sg: &mut [C64],
               out: &mut [SublevelState]| {
        field(st, proj, t, om_pi, om_sg);
        for i in 0..n_nodes {
            let mut d = SublevelState::default();
            for (k, &(e, g, m, cg)) in TRANSITIONS.iter().enumerate() {
                let p = proj[(m + 1) as usize];
                let om_m = p[0] * om_pi[i] + p[1] * om_sg[i];
                let rot = C64::new(g2, detune_factor[k] * delta);
                d.block[e][g] = -rot * st[i].block[e][g] + C64::new(0.0, 0.25 * cg) * om_m;
            }
            out[i] = d;
        }
    };

    let n_steps = grid.n_steps();
    let mut t_rec = Vec::with_capacity(n_steps + 1);
    let mut rec_pi = Vec::with_capacity(n_steps + 1);
    let mut rec_sg = Vec::with_capacity(n_steps + 1);
    let mut rec_in = opts.record_input.then(|| Vec::with_capacity(n_steps + 1));

    let mut seg = 0usize;
    let mut proj = channel_projections(pulses[0].axis_angle);
    field(&state, &proj, 0.0, &mut om_pi, &mut om_sg);
    t_rec.push(0.0);
    rec_pi.push(om_pi[n]);
    rec_sg.push(om_sg[n]);
    if let Some(v) = rec_in.as_mut() {
        v.push(boundary_value(0.0, Channel::Pi) + boundary_value(0.0, Channel::Sigma));
    }

    let dt = grid.dt;
    let mut k1 = vec![SublevelState::default(); n_nodes];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut tmp = state.clone();
    let axpy = |dst: &mut [SublevelState], a: f64, src: &[SublevelState]| {
        for (d, s) in dst.iter_mut().zip(src) {
            for e in 0..4 {
                for g in 0..2 {
                    d.block[e][g] += a * s.block[e][g];
                }
            }
        }
    };

    for step in 0..n_steps {
        let t = step as f64 * dt;
        let pulse = &pulses[seg];
        let dl = |tt: f64| pulse.delta(tt);

        rhs(&state, &proj, dl(t), t, &mut om_pi, &mut om_sg, &mut k1);
        tmp.copy_from_slice(&state);
        axpy(&mut tmp, 0.5 * dt, &k1);
        rhs(&tmp, &proj, dl(t + 0.5 * dt), t + 0.5 * dt, &mut om_pi, &mut om_sg, &mut k2);
        tmp.copy_from_slice(&state);
        axpy(&mut tmp, 0.5 * dt, &k2);
        rhs(&tmp, &proj, dl(t + 0.5 * dt), t + 0.5 * dt, &mut om_pi, &mut om_sg, &mut k3);
        tmp.copy_from_slice(&state);
        axpy(&mut tmp, dt, &k3);
        rhs(&tmp, &proj, dl(t + dt), t + dt, &mut om_pi, &mut om_sg, &mut k4);
        axpy(&mut state, dt / 6.0, &k1);
        axpy(&mut state, dt / 3.0, &k2);
        axpy(&mut state, dt / 3.0, &k3);
        axpy(&mut state, dt / 6.0, &k4);

        let t_new = (step + 1) as f64 * dt;
        // Hand over to the next pulse's frame at the segment midpoint; both
        // pulses are negligible there, so the handover time is not critical.
        while seg + 1 < pulses.len() && t_new >= boundaries[seg] {
            let theta = pulses[seg + 1].axis_angle - pulses[seg].axis_angle;
            if theta != 0.0 {
                for s in state.iter_mut() {
                    *s = s.rotated(theta);
                }
            }
            seg += 1;
            proj = channel_projections(pulses[seg].axis_angle);
        }

        field(&state, &proj, t_new, &mut om_pi, &mut om_sg);
        t_rec.push(t_new);
        rec_pi.push(om_pi[n]);
        rec_sg.push(om_sg[n]);
        if let Some(v) = rec_in.as_mut() {
            v.push(boundary_value(t_new, Channel::Pi) + boundary_value(t_new, Channel::Sigma));
        }

        if let Some(b0) = bound0 {
            let m = state.iter().map(|s| s.norm()).fold(0.0, f64::max);
            let bound = b0 * if opts.decay { (0.5 * isotope.gamma * t_new).exp() } else { 1.0 };
            if m > bound {
                return Err(SolverError::Instability { t: t_new, magnitude: m, bound });
            }
        }
    }

    Ok(TimeSeries {
        t: t_rec,
        omega: rec_pi,
        omega_orth: Some(rec_sg),
        omega_in: rec_in,
        rho_s_exit: None,
        rho_p_exit: None,
        final_state: None,
    })
}

// Channel source of one node: Σ over transitions of C·p_{M,c}·ρ_eg.
fn node_source(s: &SublevelState, proj: &[[f64; 2]; 3]) -> [C64; 2] {
    let mut out = [C64::default(); 2];
    for &(e, g, m, cg) in TRANSITIONS.iter() {
        let p = proj[(m + 1) as usize];
        let amp = s.block[e][g];
        out[0] += cg * p[0] * amp;
        out[1] += cg * p[1] * amp;
    }
    out
}
