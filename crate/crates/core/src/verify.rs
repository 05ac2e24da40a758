//! Named verification suites. Each suite runs a fixed, deterministic
//! scenario matrix, measures defects and convergence orders, and returns a
//! [`VerificationReport`] whose JSON serialization is byte-identical across
//! reruns.
//!
//! Error tolerances scale with [`VerifyOptions::tolerance_scale`];
//! convergence-order windows are dimensionless and never scaled.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calculus::convergence_order;
use crate::constants::PhysicalConstants;
use crate::convention::{
    calibrate_with_reference_scale, standard_calibration_family, CALIBRATION_RELATIVE_TOLERANCE,
};
use crate::dynamics::{continuity_residual, evolve, max_stable_dt, EvolutionRun};
use crate::error::{Error, Result};
use crate::field::{vec3, MaskField};
use crate::grid::GridSpec;
use crate::hydro::{
    expected_spread, fit_precession_frequency, mean_spin, measure_spread, momentum_residual,
    quantum_force, spin_residual,
};
use crate::observables::{self, ConventionSignature};
use crate::report::{Check, VerificationReport};
use crate::scenario::{self, FrameScenario, SpinorScenario};
use crate::streamline::{frame_winding, frenet_apparatus, kappa_tau_from_torsion, trace};
use crate::teleparallel::catalog::{rotating_frame, TetradKind};
use crate::teleparallel::connection::{metric, weitzenboeck};
use crate::teleparallel::curvature::{curvature_report, curvature_report_windowed};
use crate::teleparallel::frames::{
    identity4, lorentz_boost, metric_preservation_defect, mul4, rotation_zxz, transpose4,
};
use crate::teleparallel::geodesic::{
    four_velocity, integrate_autoparallel, rotating_autoparallel_oracle, rotating_carried_oracle,
};
use crate::teleparallel::patch::Patch4D;
use crate::triad::{
    frame_divergences, guidance_velocity_from_jacobian, guidance_velocity_geometric,
    relative_velocity_discrepancy, torsion3, triad_from_spinor, triad_geodesic_residual,
    velocity_frenet,
};

/// The available suite names, `all` last.
pub const SUITES: [&str; 6] = [
    "observables",
    "hydro",
    "triad",
    "frenet",
    "teleparallel",
    "all",
];

/// Options shared by every suite.
#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Grid resolutions for the refinement studies (at least three).
    pub resolutions: Vec<usize>,
    /// Multiplier applied to every error tolerance (not to order windows).
    pub tolerance_scale: f64,
    /// Test hook: calibrate against a deliberately mis-scaled reference so
    /// the calibration-failure path is exercised end to end.
    pub corrupt_calibration: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            resolutions: vec![32, 48, 64],
            tolerance_scale: 1.0,
            corrupt_calibration: false,
        }
    }
}

/// Runs one suite by name. `all` merges every other suite, in the order of
/// [`SUITES`], with check names prefixed by their suite.
pub fn run_suite(name: &str, opts: &VerifyOptions) -> Result<VerificationReport> {
    if !(opts.tolerance_scale.is_finite() && opts.tolerance_scale > 0.0) {
        return Err(Error::InvalidInput(format!(
            "tolerance scale must be positive, got {}",
            opts.tolerance_scale
        )));
    }
    match name {
        "observables" => suite_observables(opts),
        "hydro" => suite_hydro(opts),
        "triad" => suite_triad(opts),
        "frenet" => suite_frenet(opts),
        "teleparallel" => suite_teleparallel(opts),
        "all" => {
            let mut report = VerificationReport::new("all", &opts.resolutions, opts.tolerance_scale);
            for suite in SUITES.iter().filter(|s| **s != "all") {
                report.merge(run_suite(suite, opts)?);
            }
            Ok(report)
        }
        other => Err(Error::InvalidInput(format!(
            "unknown suite '{other}'; expected one of {}",
            SUITES.join(", ")
        ))),
    }
}

fn require_refinement_ladder(opts: &VerifyOptions) -> Result<()> {
    if opts.resolutions.len() < 3 {
        return Err(Error::TooFewResolutions(opts.resolutions.len()));
    }
    Ok(())
}

fn grid1(n: usize) -> Result<GridSpec> {
    GridSpec::new(1, &[TAU], &[n])
}

fn median(mut values: Vec<f64>) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidInput(
            "median requested over an empty sample set".into(),
        ));
    }
    values.sort_by(f64::total_cmp);
    Ok(values[values.len() / 2])
}

/// Runs calibration (possibly corrupted) and records the outcome as a check.
/// Returns the signature on success; `None` leaves the report failed with
/// the measured best discrepancy in place.
fn calibration_check(
    opts: &VerifyOptions,
    constants: &PhysicalConstants,
    report: &mut VerificationReport,
) -> Result<Option<ConventionSignature>> {
    let members = standard_calibration_family(64, constants)?;
    let reference_scale = if opts.corrupt_calibration { 2.0 } else { 1.0 };
    match calibrate_with_reference_scale(&members, constants, reference_scale) {
        Ok(outcome) => {
            report.signature = Some(outcome.signature);
            let worst = outcome.euler_discrepancy.max(outcome.frenet_discrepancy);
            report.push(
                Check::max_below(
                    "calibration_discrepancy",
                    worst,
                    CALIBRATION_RELATIVE_TOLERANCE,
                )
                .with_note(format!(
                    "signature sigma_euler={} sigma_frenet={} role_swap={}",
                    outcome.signature.sigma_euler,
                    outcome.signature.sigma_frenet,
                    outcome.signature.role_swap
                )),
            );
            Ok(Some(outcome.signature))
        }
        Err(Error::CalibrationFailed { best, tol }) => {
            report.push(
                Check::max_below("calibration_discrepancy", best, tol)
                    .with_note("no formula candidate fit every calibration member"),
            );
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

fn spinor_families(grid: &GridSpec, constants: &PhysicalConstants) -> Result<Vec<SpinorScenario>> {
    Ok(vec![
        scenario::plane_wave(grid, scenario::DEFAULT_PLANE_WAVE_CYCLES, constants)?,
        scenario::two_component_wave(
            grid,
            scenario::DEFAULT_PLANE_WAVE_CYCLES,
            scenario::DEFAULT_MIX_ANGLE,
            constants,
        )?,
        scenario::spin_helix(grid, scenario::DEFAULT_HELIX_CYCLES, constants)?,
    ])
}

/// Observable-level suite: calibration, triad orthonormality on analytic and
/// evolved states, equivalence of the three velocity forms under refinement,
/// and the closed-form traveling-wave hand values.
fn suite_observables(opts: &VerifyOptions) -> Result<VerificationReport> {
    require_refinement_ladder(opts)?;
    let constants = PhysicalConstants::default();
    let scale = opts.tolerance_scale;
    let mut report = VerificationReport::new("observables", &opts.resolutions, scale);
    report.note_env("velocity_families", "plane_wave,two_component_wave,spin_helix");

    let signature = match calibration_check(opts, &constants, &mut report)? {
        Some(sig) => sig,
        None => return Ok(report),
    };

    // Orthonormality of the bilinear frame, analytic states, 64^3 grid.
    let grid3 = GridSpec::cubic(3, TAU, 64)?;
    let mut analytic_worst = 0.0f64;
    for sc in spinor_families(&grid3, &constants)? {
        let triad = triad_from_spinor(&sc.psi)?;
        analytic_worst = analytic_worst.max(triad.orthonormality_defect());
    }
    report.push(
        Check::max_below("orthonormality_analytic", analytic_worst, 1e-10 * scale)
            .with_note("worst over three analytic states on a 64^3 grid"),
    );

    // Same bound after genuine evolution of a 3D packet.
    let packet = scenario::gaussian(&grid3, scenario::DEFAULT_SIGMA_FRACTION, &constants)?;
    let dt = 0.4 * max_stable_dt(&grid3, &constants);
    let run = evolve(&packet.psi, &packet.ext, &constants, dt, 24, 12)?;
    let evolved = triad_from_spinor(run.final_state())?;
    report.push(
        Check::max_below(
            "orthonormality_evolved",
            evolved.orthonormality_defect(),
            1e-10 * scale,
        )
        .with_note(format!("gaussian packet after 24 steps, dt={dt:.3e}")),
    );

    // Velocity-form equivalence under refinement: worst relative discrepancy
    // of the angle-gradient and frame-derivative forms against the bilinear
    // reference, across the three families, per resolution.
    let mut euler_series = Vec::new();
    let mut geometric_series = Vec::new();
    for &n in &opts.resolutions {
        let grid = grid1(n)?;
        let mut worst_euler = 0.0f64;
        let mut worst_geometric = 0.0f64;
        for sc in spinor_families(&grid, &constants)? {
            let (v_ref, ref_mask) = observables::bilinear_velocity(&sc.psi, None, &constants)?;
            let euler = observables::euler_decompose(&sc.psi);
            let (v_euler, euler_mask) =
                observables::velocity_euler(&euler, None, &constants, &signature)?;
            let triad = triad_from_spinor(&sc.psi)?;
            let (v_geo, geo_mask) = guidance_velocity_geometric(&triad, &constants);
            let mask = ref_mask.and(&euler_mask)?.and(&geo_mask)?;
            mask.require_nonempty("velocity comparison")?;
            worst_euler =
                worst_euler.max(relative_velocity_discrepancy(&v_euler, &v_ref, &mask)?);
            worst_geometric =
                worst_geometric.max(relative_velocity_discrepancy(&v_geo, &v_ref, &mask)?);
        }
        let h = grid.min_spacing();
        euler_series.push((h, worst_euler));
        geometric_series.push((h, worst_geometric));
    }
    report.push(Check::slope_at_least(
        "velocity_euler_order",
        &convergence_order(&euler_series)?,
        1.8,
    ));
    report.push(Check::slope_at_least(
        "velocity_geometric_order",
        &convergence_order(&geometric_series)?,
        1.8,
    ));

    // Traveling wave, finest grid: the closed-form frame derivative must
    // reproduce the exact flow velocity with no stencil error at all.
    let finest = *opts.resolutions.iter().max().expect("nonempty ladder");
    let grid = grid1(finest)?;
    let sc = scenario::plane_wave(&grid, scenario::DEFAULT_PLANE_WAVE_CYCLES, &constants)?;
    let k = sc.refs["k"];
    let triad = triad_from_spinor(&sc.psi)?;
    let jac = scenario::plane_wave_frame_jacobian(&grid, k);
    let v_exact = guidance_velocity_from_jacobian(&triad.e2, &jac, &constants)?;
    let v_target = sc.refs["velocity_x"];
    let mut closed_form_defect = 0.0f64;
    for p in 0..grid.len() {
        if triad.mask.valid[p] {
            closed_form_defect = closed_form_defect
                .max((v_exact.data[p][0] - v_target).abs())
                .max(v_exact.data[p][1].abs())
                .max(v_exact.data[p][2].abs());
        }
    }
    report.push(
        Check::max_below("guidance_closed_form_defect", closed_form_defect, 1e-10 * scale)
            .with_note(format!("traveling wave at n={finest}, reference v={v_target:.6}")),
    );

    // Hand values for the in-plane leg divergences of the same state:
    // div m = -2k sin 2kx and div n = 2k cos 2kx, met at the stencil's
    // second-order accuracy (the discrete rate is sin(2k dx)/dx).
    let fd = frame_divergences(&triad);
    let dx = grid.min_spacing();
    let mut worst_m = 0.0f64;
    let mut worst_n = 0.0f64;
    for p in 0..grid.len() {
        if fd.mask.valid[p] {
            let x = grid.position(p)[0];
            let angle = 2.0 * k * x;
            worst_m = worst_m.max((fd.div_m.data[p] + 2.0 * k * angle.sin()).abs());
            worst_n = worst_n.max((fd.div_n.data[p] - 2.0 * k * angle.cos()).abs());
        }
    }
    let hand_tol = (2.0 * k).powi(3) * dx * dx / 5.0 * scale;
    report.push(
        Check::max_below("hand_divergence_m", worst_m, hand_tol)
            .with_note("template -2k sin 2kx at the finest resolution"),
    );
    report.push(
        Check::max_below("hand_divergence_n", worst_n, hand_tol)
            .with_note("template 2k cos 2kx at the finest resolution"),
    );

    Ok(report)
}

/// One joint space-time refinement level: the step shrinks with the grid's
/// own stability bound (proportional to dx^2), holding the physical window
/// `t_end` fixed across levels.
fn refine_run(
    sc: &SpinorScenario,
    constants: &PhysicalConstants,
    t_end: f64,
) -> Result<EvolutionRun> {
    let grid = &sc.psi.grid;
    let dt = 0.4 * max_stable_dt(grid, constants);
    let steps = (t_end / dt).ceil() as usize;
    let stride = (steps / 4).max(1);
    evolve(&sc.psi, &sc.ext, constants, dt, steps, stride)
}

fn max_norm(series: &crate::dynamics::ResidualSeries) -> f64 {
    series.norms.iter().copied().fold(0.0, f64::max)
}

/// Hydrodynamic suite: conservation-law residuals (exact floors on uniform
/// states, second-order joint refinement on structured ones), the precession
/// frequency, packet dispersion, and the two quantum-force forms.
fn suite_hydro(opts: &VerifyOptions) -> Result<VerificationReport> {
    let constants = PhysicalConstants::default();
    let scale = opts.tolerance_scale;
    let mut report = VerificationReport::new("hydro", &opts.resolutions, scale);
    // Internal dyadic ladder: residual studies refine time with space, which
    // needs exact step ratios rather than the report-level resolution list.
    let ladder = [32usize, 64, 128];
    report.note_env("residual_ladder", "32,64,128");
    report.note_env("residual_window", "t_end = 8 steps at n=32");

    let t_end = 8.0 * 0.4 * max_stable_dt(&grid1(32)?, &constants);

    // Uniform-density states: continuity and momentum residuals sit at the
    // round-off floor at any resolution.
    for (name, sc) in [
        (
            "plane_wave",
            scenario::plane_wave(&grid1(64)?, scenario::DEFAULT_PLANE_WAVE_CYCLES, &constants)?,
        ),
        (
            "spin_helix",
            scenario::spin_helix(&grid1(64)?, scenario::DEFAULT_HELIX_CYCLES, &constants)?,
        ),
    ] {
        let run = refine_run(&sc, &constants, t_end)?;
        let cont = max_norm(&continuity_residual(&run, &sc.ext, &constants)?);
        let mom = max_norm(&momentum_residual(&run, &sc.ext, &constants)?);
        report.push(Check::max_below(
            &format!("continuity_floor_{name}"),
            cont,
            1e-10 * scale,
        ));
        report.push(Check::max_below(
            &format!("momentum_floor_{name}"),
            mom,
            1e-10 * scale,
        ));
    }

    // Joint refinement: continuity and momentum on a spreading packet, spin
    // transport on the winding-spin state.
    let mut cont_series = Vec::new();
    let mut mom_series = Vec::new();
    let mut spin_series = Vec::new();
    for &n in &ladder {
        let grid = grid1(n)?;
        let h = grid.min_spacing();
        let packet = scenario::gaussian(&grid, 0.1, &constants)?;
        let run = refine_run(&packet, &constants, t_end)?;
        cont_series.push((h, max_norm(&continuity_residual(&run, &packet.ext, &constants)?)));
        mom_series.push((h, max_norm(&momentum_residual(&run, &packet.ext, &constants)?)));
        let helix = scenario::spin_helix(&grid, scenario::DEFAULT_HELIX_CYCLES, &constants)?;
        let run = refine_run(&helix, &constants, t_end)?;
        spin_series.push((h, max_norm(&spin_residual(&run, &helix.ext, &constants)?)));
    }
    report.push(Check::slope_at_least(
        "continuity_residual_order",
        &convergence_order(&cont_series)?,
        1.8,
    ));
    report.push(Check::slope_at_least(
        "momentum_residual_order",
        &convergence_order(&mom_series)?,
        1.8,
    ));
    report.push(Check::slope_at_least(
        "spin_residual_order",
        &convergence_order(&spin_series)?,
        1.8,
    ));

    // Precession frequency against the gyromagnetic reference.
    let charged = PhysicalConstants::with_charge(1.0);
    let grid = grid1(32)?;
    let sc = scenario::larmor(&grid, 1.0, &charged)?;
    let omega_ref = sc.refs["omega"];
    let dt = 0.4 * max_stable_dt(&grid, &charged);
    let period = TAU / omega_ref;
    let steps = (2.0 * period / dt).ceil() as usize;
    let run = evolve(&sc.psi, &sc.ext, &charged, dt, steps, (steps / 32).max(1))?;
    let transverse: Vec<[f64; 2]> = run
        .snapshots
        .iter()
        .map(|psi| {
            let s = mean_spin(psi, &charged);
            [s[0], s[1]]
        })
        .collect();
    let omega_fit = fit_precession_frequency(&run.times, &transverse)?;
    report.push(
        Check::max_below(
            "larmor_frequency_error",
            (omega_fit - omega_ref).abs() / omega_ref,
            1e-3 * scale,
        )
        .with_note(format!("fit {omega_fit:.8} vs reference {omega_ref:.8} over two periods")),
    );

    // Free-packet dispersion across the analytic spreading window.
    let grid = grid1(64)?;
    let packet = scenario::gaussian(&grid, scenario::DEFAULT_SIGMA_FRACTION, &constants)?;
    let sigma0 = packet.refs["sigma0"];
    let spread_time = packet.refs["spread_time"];
    let center = [
        packet.refs["center_x"],
        packet.refs["center_y"],
        packet.refs["center_z"],
    ];
    let dt = 0.4 * max_stable_dt(&grid, &constants);
    let steps = (spread_time / dt).ceil() as usize;
    let run = evolve(&packet.psi, &packet.ext, &constants, dt, steps, (steps / 8).max(1))?;
    let mut worst_spread = 0.0f64;
    for (i, psi) in run.snapshots.iter().enumerate() {
        let measured = measure_spread(psi, center)[0];
        let expected = expected_spread(sigma0, run.times[i], &constants);
        worst_spread = worst_spread.max((measured - expected).abs() / expected);
    }
    report.push(
        Check::max_below("dispersion_spread_error", worst_spread, 1e-2 * scale)
            .with_note(format!("window t in [0, {spread_time:.3}] (spread time)")),
    );

    // The two algebraic forms of the quantum force agree at second order.
    let mut force_series = Vec::new();
    for n in [40usize, 56, 80] {
        let grid = grid1(n)?;
        let packet = scenario::gaussian(&grid, 0.1, &constants)?;
        let rho = observables::density(&packet.psi);
        let qf = quantum_force(&rho, &constants)?;
        // Compare away from the far tail, where the density underflows and
        // both forms divide by it.
        let sigma = packet.refs["sigma0"];
        let cx = packet.refs["center_x"];
        let window = MaskField::from_fn(&grid, |p| (p[0] - cx).abs() <= 2.5 * sigma);
        let mask = window.and(&qf.mask)?;
        mask.require_nonempty("quantum force window")?;
        let gap = qf
            .potential_form
            .sub(&qf.stress_form)?
            .max_magnitude(Some(&mask));
        force_series.push((grid.min_spacing(), gap));
    }
    report.push(Check::slope_at_least(
        "quantum_force_forms_order",
        &convergence_order(&force_series)?,
        1.8,
    ));

    Ok(report)
}

/// Frame-representation suite: the curve-geometry velocity against the
/// bilinear reference, the frame divergence relation, the transport
/// identity, and frozen traveling-wave torsion components.
fn suite_triad(opts: &VerifyOptions) -> Result<VerificationReport> {
    require_refinement_ladder(opts)?;
    let constants = PhysicalConstants::default();
    let scale = opts.tolerance_scale;
    let mut report = VerificationReport::new("triad", &opts.resolutions, scale);

    let signature = match calibration_check(opts, &constants, &mut report)? {
        Some(sig) => sig,
        None => return Ok(report),
    };

    // Curve-geometry velocity vs. bilinear velocity under refinement, on the
    // two members whose spin axis is uniform (the formula's domain).
    let mut frenet_series = Vec::new();
    for &n in &opts.resolutions {
        let grid = grid1(n)?;
        let mut worst = 0.0f64;
        for sc in [
            scenario::plane_wave(&grid, scenario::DEFAULT_PLANE_WAVE_CYCLES, &constants)?,
            scenario::two_component_wave(
                &grid,
                scenario::DEFAULT_PLANE_WAVE_CYCLES,
                scenario::DEFAULT_MIX_ANGLE,
                &constants,
            )?,
        ] {
            let triad = triad_from_spinor(&sc.psi)?;
            let fd = frame_divergences(&triad);
            let (v_frenet, f_mask) = velocity_frenet(&triad, &fd, &constants, &signature)?;
            let (v_ref, ref_mask) = observables::bilinear_velocity(&sc.psi, None, &constants)?;
            let mask = f_mask.and(&ref_mask)?;
            mask.require_nonempty("curve-velocity comparison")?;
            worst = worst.max(relative_velocity_discrepancy(&v_frenet, &v_ref, &mask)?);
        }
        frenet_series.push((grid.min_spacing(), worst));
    }
    report.push(Check::slope_at_least(
        "velocity_frenet_order",
        &convergence_order(&frenet_series)?,
        1.8,
    ));

    // Frame divergence relation div s = theta_ms + theta_ns: exact in the
    // continuum, second order through the shared stencils.
    let mut relation_series = Vec::new();
    for &n in &opts.resolutions {
        let grid = grid1(n)?;
        let psi = scenario::random_smooth(&grid, 7, 3);
        let triad = triad_from_spinor(&psi)?;
        let fd = frame_divergences(&triad);
        let mut worst = 0.0f64;
        for p in 0..grid.len() {
            if fd.mask.valid[p] {
                worst = worst.max(
                    (fd.div_s.data[p] - fd.theta_ms.data[p] - fd.theta_ns.data[p]).abs(),
                );
            }
        }
        relation_series.push((grid.min_spacing(), worst));
    }
    report.push(Check::slope_at_least(
        "divergence_relation_order",
        &convergence_order(&relation_series)?,
        1.8,
    ));

    // Transport identity: the torsion built from a frame moves that frame
    // with zero residual, pointwise, including on an evolved state.
    let grid = grid1(64)?;
    let packet = scenario::gaussian(&grid, scenario::DEFAULT_SIGMA_FRACTION, &constants)?;
    let dt = 0.4 * max_stable_dt(&grid, &constants);
    let run = evolve(&packet.psi, &packet.ext, &constants, dt, 16, 8)?;
    let mut worst_transport = 0.0f64;
    for psi in [&packet.psi, run.final_state()] {
        let triad = triad_from_spinor(psi)?;
        let torsion = torsion3(&triad);
        worst_transport = worst_transport.max(triad_geodesic_residual(&triad, &torsion)?);
    }
    report.push(
        Check::max_below("transport_identity_residual", worst_transport, 1e-10 * scale)
            .with_note("initial and evolved packet states"),
    );

    // Frozen traveling-wave torsion: the only in-plane components are the
    // discrete frame rotation rate kd = sin(2k dx)/dx.
    let sc = scenario::plane_wave(&grid, scenario::DEFAULT_PLANE_WAVE_CYCLES, &constants)?;
    let k = sc.refs["k"];
    let dx = grid.min_spacing();
    let kd = (2.0 * k * dx).sin() / dx;
    let triad = triad_from_spinor(&sc.psi)?;
    let torsion = torsion3(&triad);
    let mut worst_frozen = 0.0f64;
    for p in 0..grid.len() {
        if !torsion.mask.valid[p] {
            continue;
        }
        let t = &torsion.data[p];
        worst_frozen = worst_frozen
            .max((t[0][1][0] + kd).abs())
            .max((t[1][0][0] - kd).abs())
            .max(t[0][0][0].abs())
            .max(t[1][1][0].abs())
            .max(t[2][2][0].abs());
    }
    report.push(
        Check::max_below("plane_wave_torsion_frozen", worst_frozen, 1e-10 * scale)
            .with_note(format!("discrete rotation rate kd={kd:.8}")),
    );

    Ok(report)
}

struct TracedFrame {
    scenario: FrameScenario,
    geometry: crate::streamline::StreamlineGeometry,
}

/// Traces one full loop of a frame scenario's spin-axis flow from its first
/// seed and builds the moving frame along it.
fn traced_loop(scenario: FrameScenario, ds_fraction: f64) -> Result<TracedFrame> {
    let grid = scenario.triad.grid().clone();
    let h = grid.min_spacing();
    let ds = h * ds_fraction;
    let radius = scenario.refs["radius"];
    let pitch = scenario.refs["pitch"];
    let loop_length = TAU * (radius * radius + pitch * pitch).sqrt();
    let steps = (loop_length / ds).ceil() as usize;
    let line = trace(
        &scenario.triad.e3,
        &scenario.triad.mask,
        scenario.seeds[0],
        ds,
        steps,
    )?;
    let geometry = frenet_apparatus(&scenario.triad.e3, &line, h)?;
    Ok(TracedFrame { scenario, geometry })
}

fn unflagged(geometry: &crate::streamline::StreamlineGeometry) -> Vec<usize> {
    (0..geometry.kappa.len())
        .filter(|&i| geometry.flags[i] == 0)
        .collect()
}

/// Curve-geometry suite: curvature/torsion recovery on circular and helical
/// frames, the torsion-projected predictions, and the frame winding count.
fn suite_frenet(opts: &VerifyOptions) -> Result<VerificationReport> {
    let scale = opts.tolerance_scale;
    let mut report = VerificationReport::new("frenet", &opts.resolutions, scale);
    report.note_env("circle_grid", "160^2");
    report.note_env("helix_ladder", "64,96,128 (xy), 16 (z)");
    report.note_env("step_fraction", "ds = dx/3");

    // Closed circle: median curvature within 0.5%, torsion at zero.
    let grid = GridSpec::new(2, &[TAU, TAU], &[160, 160])?;
    let circle = scenario::circle_frame(&grid, TAU * scenario::DEFAULT_RADIUS_FRACTION)?;
    let kappa_ref = circle.refs["kappa"];
    let radius = circle.refs["radius"];
    let traced = traced_loop(circle, 1.0 / 3.0)?;
    let samples = unflagged(&traced.geometry);
    if samples.len() < 16 {
        return Err(Error::InvalidInput(
            "circle trace produced too few regular samples".into(),
        ));
    }
    let kappa_med = median(samples.iter().map(|&i| traced.geometry.kappa[i]).collect())?;
    let tau_med = median(
        samples
            .iter()
            .map(|&i| traced.geometry.tau[i].abs())
            .collect(),
    )?;
    report.push(
        Check::max_below(
            "circle_curvature_error",
            (kappa_med - kappa_ref).abs() / kappa_ref,
            5e-3 * scale,
        )
        .with_note(format!("median kappa {kappa_med:.6} vs 1/r = {kappa_ref:.6}")),
    );
    report.push(
        Check::max_below("circle_torsion_bound", tau_med, 1e-3 / radius * scale)
            .with_note("median |tau| on a planar loop"),
    );
    let winding = frame_winding(&traced.scenario.triad, &traced.geometry)?;
    report.push(
        Check::max_below("frame_winding_turns", winding.abs(), 0.05 * scale)
            .with_note("net in-plane-leg rotation about the tangent, full loop"),
    );

    // Helical frame ladder.  The torsion-projected curvature/torsion come
    // from centered derivatives of the smooth grid legs, so their medians
    // against the analytic values shrink at second order in the grid
    // spacing; those carry the slope checks.  The curve-fit estimator
    // differentiates the multilinearly interpolated tangent field twice
    // along the path, so its torsion picks up interpolation-kink noise
    // amplified by 1/ds and does not follow a clean order; it is checked
    // against the analytic values at the finest rung and against the
    // projected route through fixed agreement bounds.
    let mut kappa_proj_series = Vec::new();
    let mut tau_proj_series = Vec::new();
    let mut kappa_route_gap = 0.0f64;
    let mut tau_route_gap = 0.0f64;
    let mut finest: Option<TracedFrame> = None;
    for &n in &[64usize, 96, 128] {
        let grid = GridSpec::new(3, &[TAU, TAU, TAU], &[n, n, 16])?;
        let helix = scenario::helix_frame(
            &grid,
            TAU * scenario::DEFAULT_RADIUS_FRACTION,
            0.05 * TAU,
        )?;
        let traced = traced_loop(helix, 1.0 / 3.0)?;
        let torsion = torsion3(&traced.scenario.triad);
        let (kappa_t, tau_t) =
            kappa_tau_from_torsion(&traced.scenario.triad, &torsion, &traced.geometry)?;
        let samples = unflagged(&traced.geometry);
        if samples.len() < 16 {
            return Err(Error::InvalidInput(
                "helix trace produced too few regular samples".into(),
            ));
        }
        let kappa_ref = traced.scenario.refs["kappa"];
        let tau_ref = traced.scenario.refs["tau"];
        let kappa_err = median(
            samples
                .iter()
                .map(|&i| (kappa_t[i] - kappa_ref).abs())
                .collect(),
        )?;
        let tau_err = median(
            samples
                .iter()
                .map(|&i| (tau_t[i] - tau_ref).abs())
                .collect(),
        )?;
        kappa_route_gap = median(
            samples
                .iter()
                .map(|&i| (kappa_t[i] - traced.geometry.kappa[i]).abs())
                .collect(),
        )?;
        tau_route_gap = median(
            samples
                .iter()
                .map(|&i| (tau_t[i] - traced.geometry.tau[i]).abs())
                .collect(),
        )?;
        let h = traced.scenario.triad.grid().min_spacing();
        kappa_proj_series.push((h, kappa_err));
        tau_proj_series.push((h, tau_err));
        finest = Some(traced);
    }
    let traced = finest.expect("ladder is nonempty");
    let samples = unflagged(&traced.geometry);
    let kappa_ref = traced.scenario.refs["kappa"];
    let tau_ref = traced.scenario.refs["tau"];
    let kappa_med = median(samples.iter().map(|&i| traced.geometry.kappa[i]).collect())?;
    let tau_med = median(samples.iter().map(|&i| traced.geometry.tau[i]).collect())?;
    report.push(
        Check::max_below(
            "helix_curvature_error",
            (kappa_med - kappa_ref).abs() / kappa_ref,
            5e-3 * scale,
        )
        .with_note(format!("median kappa {kappa_med:.6} vs r/(r^2+b^2) = {kappa_ref:.6}")),
    );
    report.push(
        Check::max_below(
            "helix_torsion_error",
            (tau_med - tau_ref).abs() / tau_ref,
            5e-3 * scale,
        )
        .with_note(format!("median tau {tau_med:.6} vs b/(r^2+b^2) = {tau_ref:.6}")),
    );
    report.push(
        Check::slope_within(
            "projected_curvature_order",
            &convergence_order(&kappa_proj_series)?,
            1.5,
            2.2,
        )
        .with_note("median |projected - analytic| kappa vs grid spacing"),
    );
    report.push(
        Check::slope_within(
            "projected_torsion_order",
            &convergence_order(&tau_proj_series)?,
            1.5,
            2.2,
        )
        .with_note("median |projected - analytic| tau vs grid spacing"),
    );
    report.push(
        Check::max_below("curvature_routes_agree", kappa_route_gap, 5e-3 * scale)
            .with_note("median |projected - curve-fit| kappa, finest rung"),
    );
    report.push(
        Check::max_below("torsion_routes_agree", tau_route_gap, 5e-3 * scale)
            .with_note("median |projected - curve-fit| tau, finest rung"),
    );

    Ok(report)
}

/// 4D flat-connection suite: transformation-group properties on random
/// draws, the catalog's exact members, convergence of every curvature-chain
/// identity on the varying members, and the rotating-frame autoparallel
/// against its closed form.
fn suite_teleparallel(opts: &VerifyOptions) -> Result<VerificationReport> {
    let scale = opts.tolerance_scale;
    let mut report = VerificationReport::new("teleparallel", &opts.resolutions, scale);
    report.note_env("random_draws", "1000");
    report.note_env("boosted_ladder", "12,16,24");
    report.note_env("wave_ladder", "24,32,48");

    // Random transformation draws: boosts preserve the metric, z-x-z
    // rotations are orthogonal.
    let mut rng = ChaCha8Rng::seed_from_u64(0x7e1e_4d00);
    let mut worst_boost = 0.0f64;
    let mut worst_rotation = 0.0f64;
    for _ in 0..1000 {
        let beta = loop {
            let b = [
                rng.random_range(-0.9..0.9),
                rng.random_range(-0.9..0.9),
                rng.random_range(-0.9..0.9),
            ];
            if vec3::norm(b) < 0.9 {
                break b;
            }
        };
        let l = lorentz_boost(beta)?;
        worst_boost = worst_boost.max(metric_preservation_defect(&l));
        let r = rotation_zxz(
            rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
            rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
            rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
        );
        let rtr = mul4(&transpose4(&r), &r);
        let id = identity4();
        let mut defect = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                defect = defect.max((rtr[i][j] - id[i][j]).abs());
            }
        }
        worst_rotation = worst_rotation.max(defect);
    }
    report.push(Check::max_below(
        "boost_metric_preservation",
        worst_boost,
        1e-12 * scale,
    ));
    report.push(Check::max_below(
        "rotation_orthogonality",
        worst_rotation,
        1e-12 * scale,
    ));

    // Constant catalog members: the whole curvature chain is silent.
    let mut worst_constant = 0.0f64;
    for kind in [TetradKind::Identity, TetradKind::Boost, TetradKind::Rotation] {
        let scenario = kind.build(8)?;
        let rep = curvature_report(&scenario.tetrad, 1.0, 1.0)?;
        worst_constant = worst_constant
            .max(rep.frame_flatness_defect)
            .max(rep.torsion_route_defect)
            .max(rep.torsion_pair_defect)
            .max(rep.split_defect)
            .max(rep.max_riemann)
            .max(rep.max_torsion)
            .max(rep.max_matter_density);
    }
    report.push(Check::max_below(
        "constant_frame_defects",
        worst_constant,
        1e-12 * scale,
    ));

    // Uniformly rotating frame: constant connection, so every identity
    // closes to round-off while the torsion carries the rotation rate. The
    // centered time stencil reads the turning sin/cos columns as the exact
    // constant sin(omega h)/h, so that is the value to pin.
    let rotating = TetradKind::Rotating.build(16)?;
    let h_t = rotating.tetrad.patch.spacing()[0];
    let rate = (rotating.refs["omega"] * h_t).sin() / h_t;
    let rep = curvature_report(&rotating.tetrad, 1.0, 1.0)?;
    report.push(
        Check::max_below(
            "rotating_identity_defects",
            rep.frame_flatness_defect
                .max(rep.torsion_route_defect)
                .max(rep.max_riemann),
            1e-12 * scale,
        )
        .with_note("constant connection: defects are pure round-off"),
    );
    report.push(
        Check::equals_within("rotating_torsion_value", rep.max_torsion, rate, 1e-12 * scale)
            .with_note("discrete rotation rate sin(omega h)/h as the centered stencil reads it"),
    );
    report.push(Check::max_below(
        "rotating_torsion_pair_defect",
        rep.torsion_pair_defect,
        1e-12 * scale,
    ));

    // Boosted rotation: flat metric but genuinely varying legs, so the
    // frame-flatness, route, split, and stencil-pair defects all shrink at
    // the scheme's order. Margins keep margin * spacing = 0.4 on every
    // rung, so the maxima are taken over a fixed coordinate window instead
    // of creeping toward the rim as the grid refines.
    let mut flat_series = Vec::new();
    let mut route_series = Vec::new();
    let mut split_series = Vec::new();
    let mut pair_series = Vec::new();
    for &(n, margin) in &[(11usize, 2usize), (16, 3), (21, 4)] {
        let scenario = TetradKind::RotatingBoost.build(n)?;
        let h = scenario.tetrad.patch.min_spacing();
        let rep = curvature_report_windowed(&scenario.tetrad, 1.0, 1.0, margin)?;
        flat_series.push((h, rep.frame_flatness_defect));
        route_series.push((h, rep.torsion_route_defect));
        split_series.push((h, rep.split_defect));
        pair_series.push((h, rep.torsion_pair_defect));
    }
    for (name, series) in [
        ("boosted_flatness_order", &flat_series),
        ("boosted_route_order", &route_series),
        ("boosted_split_order", &split_series),
        ("boosted_pair_order", &pair_series),
    ] {
        report.push(Check::slope_within(name, &convergence_order(series)?, 1.8, 2.2));
    }

    // Plane-fronted wave: genuine curvature; both curvature routes, both
    // scalar contractions, the split, and the torsion stencil pair converge
    // together, while the algebraic trace identity stays at round-off.
    let mut route_series = Vec::new();
    let mut scalar_series = Vec::new();
    let mut split_series = Vec::new();
    let mut pair_series = Vec::new();
    let mut finest_rep = None;
    // Fixed window again (margin * spacing = period / 8), with at least 16
    // nodes per oscillation so the leading error term dominates.
    for &(n, margin) in &[(33usize, 4usize), (49, 6), (65, 8)] {
        let scenario = TetradKind::Wave.build(n)?;
        let h = scenario.tetrad.patch.min_spacing();
        let rep = curvature_report_windowed(&scenario.tetrad, 1.0, 1.0, margin)?;
        route_series.push((h, rep.torsion_route_defect));
        scalar_series.push((h, rep.scalar_route_defect));
        split_series.push((h, rep.split_defect));
        pair_series.push((h, rep.torsion_pair_defect));
        finest_rep = Some(rep);
    }
    for (name, series) in [
        ("wave_route_order", &route_series),
        ("wave_scalar_order", &scalar_series),
        ("wave_split_order", &split_series),
        ("wave_pair_order", &pair_series),
    ] {
        report.push(Check::slope_within(name, &convergence_order(series)?, 1.8, 2.2));
    }
    let rep = finest_rep.expect("ladder is nonempty");
    report.push(
        Check::min_above("wave_curvature_visible", rep.max_riemann, 1e-1).with_note(
            "genuine curvature: the wave metric is null, so its scalar vanishes identically \
             and visibility lives in the Riemann components",
        ),
    );
    report.push(Check::max_below(
        "wave_trace_identity",
        rep.trace_route_defect,
        1e-10 * rep.max_matter_density.max(1.0) * scale,
    ));
    report.push(Check::max_below(
        "wave_compatibility",
        rep.compatibility_defect,
        1e-10 * scale,
    ));

    // Autoparallel in a uniformly rotating frame over one full turn: the
    // closed-form inertial motion, seen from the rotating frame. Two layers
    // of comparison: against the closed form at the discrete rotation rate
    // sin(omega h)/h (tight: isolates the integrator from the stencil), and
    // against the design-rate closed form (the physical statement; its gap
    // is the second-order stencil bias, kept small by the fine time axis).
    let omega = 0.2;
    let patch = Patch4D::new(
        [0.0, -3.0, -3.0, 0.0],
        [33.0, 6.0, 6.0, 0.0],
        [320, 12, 12, 1],
    )?;
    let tetrad = rotating_frame(&patch, omega, false)?;
    let conn = weitzenboeck(&tetrad);
    let metric4 = metric(&tetrad);
    let h_t = patch.spacing()[0];
    let rate = (omega * h_t).sin() / h_t;
    let u0 = four_velocity([0.2, 0.0, 0.0])?;
    let x0 = [0.6, 0.3, 0.0, 0.0];
    let v0 = [0.4, 0.25, -0.1, 0.15];
    let steps = 1000usize;
    let period = TAU / (omega * u0[0]);
    let ds = period / steps as f64;
    let geo = integrate_autoparallel(&conn, &metric4, x0, u0, v0, ds, steps)?;
    let motion_scale = 2.0 * 0.2 / omega; // turning-circle diameter |v|/omega * 2
    let mut worst_x = 0.0f64;
    let mut worst_u = 0.0f64;
    let mut worst_carried = 0.0f64;
    let mut worst_x_discrete = 0.0f64;
    for i in 0..geo.s.len() {
        let (x_ref, u_ref) = rotating_autoparallel_oracle(omega, x0, u0, geo.s[i]);
        let v_ref = rotating_carried_oracle(omega, u0[0], v0, geo.s[i]);
        let (xd_ref, _) = rotating_autoparallel_oracle(rate, x0, u0, geo.s[i]);
        for c in 0..4 {
            worst_x = worst_x.max((geo.x[i][c] - x_ref[c]).abs());
            worst_u = worst_u.max((geo.u[i][c] - u_ref[c]).abs());
            worst_carried = worst_carried.max((geo.carried[i][c] - v_ref[c]).abs());
            worst_x_discrete = worst_x_discrete.max((geo.x[i][c] - xd_ref[c]).abs());
        }
    }
    report.push(
        Check::max_below(
            "geodesic_discrete_oracle_error",
            worst_x_discrete / motion_scale,
            1e-8 * scale,
        )
        .with_note("closed form at the discrete rate sin(omega h)/h: integrator-only error"),
    );
    report.push(
        Check::max_below("geodesic_position_error", worst_x / motion_scale, 1e-3 * scale)
            .with_note(format!(
                "one turn, {steps} steps; error relative to the turning-circle diameter {motion_scale:.3}"
            )),
    );
    report.push(Check::max_below(
        "geodesic_velocity_error",
        worst_u,
        1e-3 * scale,
    ));
    report.push(Check::max_below(
        "geodesic_carried_error",
        worst_carried,
        1e-3 * scale,
    ));
    report.push(Check::max_below(
        "geodesic_norm_drift",
        geo.norm_drift,
        1e-8 * scale,
    ));

    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_rejected_by_name() {
        let err = run_suite("nonsense", &VerifyOptions::default()).unwrap_err();
        assert!(err.to_string().contains("nonsense"));
    }

    #[test]
    fn short_refinement_ladder_is_rejected() {
        let opts = VerifyOptions {
            resolutions: vec![32, 64],
            ..VerifyOptions::default()
        };
        assert!(run_suite("observables", &opts).is_err());
    }

    #[test]
    fn corrupted_calibration_fails_the_suite_without_erroring() {
        let opts = VerifyOptions {
            corrupt_calibration: true,
            ..VerifyOptions::default()
        };
        let report = run_suite("observables", &opts).unwrap();
        assert!(!report.passed);
        assert_eq!(report.failed_names(), vec!["calibration_discrepancy"]);
        assert!(report.signature.is_none());
    }

    #[test]
    fn median_is_order_independent() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]).unwrap(), 2.0);
        assert_eq!(median(vec![1.0, 2.0]).unwrap(), 2.0);
        assert!(median(Vec::new()).is_err());
    }
}
