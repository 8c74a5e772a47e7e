//! Built-in oracle suite behind `xmem validate`: cheap closed-form identities
//! in the quick tier, solver cross-checks in the full tier. Each check
//! returns a precise failure message; the command prints one line per check.

use xmem_core::analytic::{
    echo_weight, echo_weight_by_summation, first_echo_amplitude, peak_retrieval_efficiency,
    second_echo_amplitude,
};
use xmem_core::experiments::{
    retrieval_efficiency, scenario_storage_retrieval, INPUT_CENTER, PULSE_FWHM,
};
use xmem_core::model::{
    field_for_splitting, splitting_from_field, Grid, InputPulse, IsotopeParams, MagneticPulse,
    PulseTrain, TargetParams,
};
use xmem_core::polarization::{little_d, run_vector};
use xmem_core::solver::{echo_segments, run_full, run_reduced, SolveOpts};

type Check = (&'static str, fn() -> Result<(), String>);

fn fail(msg: String) -> Result<(), String> {
    Err(msg)
}

fn check_transparency() -> Result<(), String> {
    let fe = IsotopeParams::iron57();
    let train =
        PulseTrain::new(vec![MagneticPulse::with_area(10.0, 4.0, std::f64::consts::PI, 0.0)]);
    let inputs = vec![InputPulse::new(10.0, 4.0, 1e-3 * fe.gamma)];
    let grid = Grid::new(8, 0.05, 30.0);
    let out =
        run_reduced(&train, &inputs, &TargetParams::new(0.0), &grid, &fe, SolveOpts::default())
            .map_err(|e| e.to_string())?;
    for (k, &t) in out.t.iter().enumerate() {
        if (out.omega[k] - inputs[0].value(t)).norm() > 1e-12 * inputs[0].envelope.amplitude {
            return fail(format!("zero-thickness output differs from input at t = {t:.2} ns"));
        }
    }
    Ok(())
}

fn check_prefactors() -> Result<(), String> {
    let e = std::f64::consts::E;
    if (first_echo_amplitude(1.0, 1.0) - 2.0 / e).abs() > 1e-14 {
        return fail("first-echo prefactor at A = 1 is not 2/e".into());
    }
    if (peak_retrieval_efficiency(1.0) - 4.0 / (e * e)).abs() > 1e-14 {
        return fail("peak efficiency at A = 1 is not 4/e^2".into());
    }
    if second_echo_amplitude(1.0, 1.0) != 0.0 {
        return fail("second echo does not vanish at A = 1".into());
    }
    if second_echo_amplitude(1.0, 0.5) >= 0.0 || second_echo_amplitude(1.0, 1.45) <= 0.0 {
        return fail("second-echo sign structure wrong around A = 1".into());
    }
    Ok(())
}

fn check_weights() -> Result<(), String> {
    for n in 2..=10usize {
        for j in 1..n {
            if echo_weight(n, j) != echo_weight_by_summation(n, j) {
                return fail(format!("weight recurrence diverges from summation at ({n}, {j})"));
            }
        }
    }
    Ok(())
}

fn check_rotations() -> Result<(), String> {
    for two_j in [1u32, 3] {
        let d = little_d(two_j, 0.7);
        let n = two_j as usize + 1;
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..n).map(|k| d[k][i] * d[k][j]).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                if (dot - expect).abs() > 1e-12 {
                    return fail(format!(
                        "rotation matrix 2j = {two_j} not orthogonal at ({i}, {j})"
                    ));
                }
            }
        }
    }
    let fe = IsotopeParams::iron57();
    if (field_for_splitting(splitting_from_field(33.3, &fe), &fe) - 33.3).abs() > 1e-9 {
        return fail("field/splitting conversion does not round-trip".into());
    }
    Ok(())
}

fn check_segments() -> Result<(), String> {
    let pi = std::f64::consts::PI;
    let train = PulseTrain::new(vec![
        MagneticPulse::with_area(15.0, 9.0, pi, 0.0),
        MagneticPulse::with_area(90.0, 9.0, pi, 0.0),
    ]);
    let w = echo_segments(&train, 300.0);
    if w.len() != 2 || w[0].lo != 0.0 || w[0].hi != 52.5 || w[1].hi != 300.0 {
        return fail(format!("unexpected window partition: {w:?}"));
    }
    Ok(())
}

fn check_decay_law() -> Result<(), String> {
    let fe = IsotopeParams::iron57();
    let eta25 = retrieval_efficiency(16.0, 25.0, true, &fe).map_err(|e| e.to_string())?;
    let eta50 = retrieval_efficiency(16.0, 50.0, true, &fe).map_err(|e| e.to_string())?;
    let expected = (-fe.gamma * 25.0).exp();
    let err = (eta50 / eta25 / expected - 1.0).abs();
    if err > 0.05 {
        return fail(format!("decay law off by {err:.3} over 25 ns"));
    }
    Ok(())
}

fn check_echo_timing() -> Result<(), String> {
    let fe = IsotopeParams::iron57();
    let s = scenario_storage_retrieval();
    let series = s.run(&fe).map_err(|e| e.to_string())?;
    let rep = s.reports(&series)[1];
    if (rep.centroid - 90.0).abs() > 1.0 {
        return fail(format!(
            "echo centroid {:.2} ns not within 1 ns of the read center",
            rep.centroid
        ));
    }
    let eta = series.energy_between(s.windows()[1].lo, s.windows()[1].hi) / series.input_energy();
    if !(0.28..0.35).contains(&eta) {
        return fail(format!("storage-retrieval efficiency {eta:.4} left its reference band"));
    }
    Ok(())
}

fn check_full_vs_reduced() -> Result<(), String> {
    let fe = IsotopeParams::iron57();
    let s = scenario_storage_retrieval();
    let opts = SolveOpts { decay: s.decay, ..Default::default() };
    let red = run_reduced(&s.train, &s.inputs, &s.target, &s.grid, &fe, opts)
        .map_err(|e| e.to_string())?;
    let full =
        run_full(&s.train, &s.inputs, &s.target, &s.grid, &fe, opts).map_err(|e| e.to_string())?;
    let peak = red.omega.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let dev = red.omega.iter().zip(&full.omega).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    if dev > 0.01 * peak {
        return fail(format!(
            "four-level and reduced models deviate by {:.3e} of peak",
            dev / peak
        ));
    }
    Ok(())
}

fn check_vector_fixed_axis() -> Result<(), String> {
    let fe = IsotopeParams::iron57();
    let half_pi = std::f64::consts::FRAC_PI_2;
    let pi = std::f64::consts::PI;
    let train = PulseTrain::new(vec![
        MagneticPulse::with_area(INPUT_CENTER, PULSE_FWHM, pi, half_pi),
        MagneticPulse::with_area(90.0, PULSE_FWHM, pi, half_pi),
    ]);
    let inputs = vec![InputPulse::new(INPUT_CENTER, PULSE_FWHM, 1e-3 * fe.gamma)];
    let target = TargetParams::new(16.0);
    let grid = Grid::default_to(200.0);
    let v = run_vector(&train, &inputs, &target, &grid, &fe, SolveOpts::default())
        .map_err(|e| e.to_string())?;
    let r = run_reduced(&train, &inputs, &target, &grid, &fe, SolveOpts::default())
        .map_err(|e| e.to_string())?;
    let peak = r.omega.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let dev = r.omega.iter().zip(&v.omega).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    if dev > 0.01 * peak {
        return fail(format!(
            "vector model deviates from scalar by {:.3e} of peak on a fixed axis",
            dev / peak
        ));
    }
    Ok(())
}

/// The quick tier: closed-form identities, no slab integrations.
pub fn quick_checks() -> Vec<Check> {
    vec![
        ("zero-thickness transparency", check_transparency),
        ("echo prefactor identities", check_prefactors),
        ("echo-weight recurrence", check_weights),
        ("rotation and conversion algebra", check_rotations),
        ("window partition", check_segments),
    ]
}

/// The full tier: everything in quick, plus solver cross-checks.
pub fn all_checks() -> Vec<Check> {
    let mut checks = quick_checks();
    checks.extend_from_slice(&[
        ("decay law", check_decay_law as fn() -> Result<(), String>),
        ("echo timing and efficiency", check_echo_timing),
        ("four-level vs reduced model", check_full_vs_reduced),
        ("vector model on a fixed axis", check_vector_fixed_axis),
    ]);
    checks
}

/// Run a tier, print one line per check, and return the failure count.
pub fn run_checks(quick: bool) -> usize {
    let checks = if quick { quick_checks() } else { all_checks() };
    let mut failures = 0;
    for (name, check) in checks {
        match check() {
            Ok(()) => println!("ok   {name}"),
            Err(why) => {
                failures += 1;
                println!("FAIL {name}");
                eprintln!("{name}: {why}");
            }
        }
    }
    failures
}
