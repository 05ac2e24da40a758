//! Closed-form states with their reference data.
//!
//! Every verification suite and most tests draw their inputs from here, so
//! the construction formulas and the reference values live next to each
//! other. References are stored as named scalars (`BTreeMap`, deterministic
//! order) so they can be embedded into reports unchanged.

use crate::constants::PhysicalConstants;
use crate::dynamics::ExternalFields;
use crate::error::{Error, Result};
use crate::field::{vec3, MaskField, SpinorField, VectorField};
use crate::grid::GridSpec;
use crate::triad::TriadField;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Default number of spatial cycles of the single-component traveling wave.
pub const DEFAULT_PLANE_WAVE_CYCLES: f64 = 2.0;
/// Default number of spin-rotation cycles of the spin-helix state.
pub const DEFAULT_HELIX_CYCLES: f64 = 3.0;
/// Default mixing angle of the two-component traveling wave.
pub const DEFAULT_MIX_ANGLE: f64 = PI / 6.0;
/// Default Gaussian width as a fraction of the box.
pub const DEFAULT_SIGMA_FRACTION: f64 = 1.0 / 16.0;
/// Default circle/helix radius as a fraction of the box.
pub const DEFAULT_RADIUS_FRACTION: f64 = 1.0 / 6.0;
/// Minimum resolved points per wavelength accepted by the constructors.
pub const MIN_POINTS_PER_WAVELENGTH: f64 = 8.0;

/// A spinor state together with its external fields and reference values.
#[derive(Debug, Clone)]
pub struct SpinorScenario {
    pub name: String,
    pub psi: SpinorField,
    pub ext: ExternalFields,
    pub refs: BTreeMap<String, f64>,
}

/// An analytic frame state (unit legs given directly, no spinor behind it)
/// with reference curve data and canonical streamline seed points.
#[derive(Debug, Clone)]
pub struct FrameScenario {
    pub name: String,
    pub triad: TriadField,
    pub refs: BTreeMap<String, f64>,
    pub seeds: Vec<[f64; 3]>,
}

fn check_resolvable(grid: &GridSpec, cycles: f64) -> Result<()> {
    let n = grid.points()[0] as f64;
    if cycles <= 0.0 || cycles * MIN_POINTS_PER_WAVELENGTH > n {
        return Err(Error::InvalidInput(format!(
            "{cycles} cycles on {n} points leaves fewer than {MIN_POINTS_PER_WAVELENGTH} \
             points per wavelength"
        )));
    }
    Ok(())
}

fn refs(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

/// Single-component traveling wave `psi = e^{ikx} (1, 0)`,
/// `k = 2 pi cycles / L`. The bilinear frame rotates about `z` by `-2kx`;
/// the flow velocity is `hbar k / m`.
pub fn plane_wave(
    grid: &GridSpec,
    cycles: f64,
    constants: &PhysicalConstants,
) -> Result<SpinorScenario> {
    check_resolvable(grid, cycles)?;
    let k = 2.0 * PI * cycles / grid.extents()[0];
    let psi = SpinorField::from_fn(grid, |p| {
        [Complex64::from_polar(1.0, k * p[0]), Complex64::new(0.0, 0.0)]
    });
    let v = constants.hbar * k / constants.mass;
    Ok(SpinorScenario {
        name: "plane_wave".into(),
        psi,
        ext: ExternalFields::free(),
        refs: refs(&[
            ("k", k),
            ("velocity_x", v),
            ("frame_rotation_rate", 2.0 * k),
            ("energy_density", 0.5 * constants.hbar * constants.hbar * k * k / constants.mass),
        ]),
    })
}

/// Analytic spatial derivatives of the first frame leg of [`plane_wave`]:
/// `d_x e1 = 2k (-sin 2kx, -cos 2kx, 0)`, other axes zero. Used to evaluate
/// frame formulas without stencil truncation error.
pub fn plane_wave_frame_jacobian(grid: &GridSpec, k: f64) -> [VectorField; 3] {
    let d0 = VectorField::from_fn(grid, |p| {
        let a = 2.0 * k * p[0];
        [-2.0 * k * a.sin(), -2.0 * k * a.cos(), 0.0]
    });
    [d0, VectorField::zeros(grid), VectorField::zeros(grid)]
}

/// Two-component traveling wave `psi = e^{ikx} (cos alpha, sin alpha)`:
/// same flow velocity as [`plane_wave`], but the spin axis is tilted to
/// `(sin 2 alpha, 0, cos 2 alpha)`, which makes the state sensitive to the
/// role assignment of the two phase angles.
pub fn two_component_wave(
    grid: &GridSpec,
    cycles: f64,
    alpha: f64,
    constants: &PhysicalConstants,
) -> Result<SpinorScenario> {
    check_resolvable(grid, cycles)?;
    let k = 2.0 * PI * cycles / grid.extents()[0];
    let (ca, sa) = (alpha.cos(), alpha.sin());
    let psi = SpinorField::from_fn(grid, |p| {
        let phase = Complex64::from_polar(1.0, k * p[0]);
        [phase * ca, phase * sa]
    });
    Ok(SpinorScenario {
        name: "two_component_wave".into(),
        psi,
        ext: ExternalFields::free(),
        refs: refs(&[
            ("k", k),
            ("alpha", alpha),
            ("velocity_x", constants.hbar * k / constants.mass),
            ("spin_x", 0.5 * constants.hbar * (2.0 * alpha).sin()),
            ("spin_z", 0.5 * constants.hbar * (2.0 * alpha).cos()),
        ]),
    })
}

/// Spin helix `psi = (e^{-iqx}, 1)/sqrt2`: uniform density, spin direction
/// `(cos qx, sin qx, 0)`, flow velocity `-hbar q / 2m`.
pub fn spin_helix(
    grid: &GridSpec,
    cycles: f64,
    constants: &PhysicalConstants,
) -> Result<SpinorScenario> {
    check_resolvable(grid, cycles)?;
    let q = 2.0 * PI * cycles / grid.extents()[0];
    let inv = 1.0 / 2.0f64.sqrt();
    let psi = SpinorField::from_fn(grid, |p| {
        [
            Complex64::from_polar(inv, -q * p[0]),
            Complex64::new(inv, 0.0),
        ]
    });
    Ok(SpinorScenario {
        name: "spin_helix".into(),
        psi,
        ext: ExternalFields::free(),
        refs: refs(&[
            ("q", q),
            ("velocity_x", -0.5 * constants.hbar * q / constants.mass),
            ("spin_magnitude", 0.5 * constants.hbar),
        ]),
    })
}

/// Normalized spin-up Gaussian packet
/// `psi ~ e^{-|x - c|^2 / (4 sigma0^2)} (1, 0)` centered in the box and
/// periodized by summing over box images along every active axis. A bare
/// Gaussian restricted to the box has a derivative kink where its tails
/// meet across the seam, and spectral evolution turns that kink into
/// slowly decaying high-frequency contamination; the image sum makes the
/// state genuinely smooth on the torus. Free evolution spreads the width as
/// `<(x - c)^2> = sigma0^2 (1 + (hbar t / 2 m sigma0^2)^2)` per active axis.
pub fn gaussian(
    grid: &GridSpec,
    sigma_fraction: f64,
    constants: &PhysicalConstants,
) -> Result<SpinorScenario> {
    if !(sigma_fraction > 0.0 && sigma_fraction < 0.25) {
        return Err(Error::InvalidInput(format!(
            "gaussian width fraction {sigma_fraction} outside (0, 0.25)"
        )));
    }
    let sigma = sigma_fraction * grid.extents()[0];
    if sigma < 3.0 * grid.min_spacing() {
        return Err(Error::InvalidInput(format!(
            "gaussian width {sigma} under-resolved (dx = {})",
            grid.min_spacing()
        )));
    }
    let ext = grid.extents();
    let dims = grid.dims();
    let center = [0.5 * ext[0], 0.5 * ext[1], 0.5 * ext[2]];
    let mut psi = SpinorField::from_fn(grid, |p| {
        // Three images per side cover the widest admitted packet
        // (sigma = L/4) to beyond double precision.
        let mut amp = 1.0;
        for a in 0..dims {
            let mut g1 = 0.0;
            for m in -3i32..=3 {
                let d = p[a] - center[a] - f64::from(m) * ext[a];
                g1 += (-d * d / (4.0 * sigma * sigma)).exp();
            }
            amp *= g1;
        }
        [Complex64::new(amp, 0.0), Complex64::new(0.0, 0.0)]
    });
    psi.normalize();
    let spread_time = 2.0 * constants.mass * sigma * sigma / constants.hbar;
    Ok(SpinorScenario {
        name: "gaussian".into(),
        psi,
        ext: ExternalFields::free(),
        refs: refs(&[
            ("sigma0", sigma),
            ("center_x", center[0]),
            ("center_y", center[1]),
            ("center_z", center[2]),
            ("spread_time", spread_time),
        ]),
    })
}

/// Uniform transverse spin state in a uniform magnetic field `B0 z`:
/// the spin precesses at the gyromagnetic frequency `e B0 / m c`.
pub fn larmor(
    grid: &GridSpec,
    b0: f64,
    constants: &PhysicalConstants,
) -> Result<SpinorScenario> {
    if constants.charge == 0.0 {
        return Err(Error::InvalidInput(
            "precession scenario needs a nonzero charge".into(),
        ));
    }
    let inv = 1.0 / 2.0f64.sqrt();
    let psi = SpinorField::from_fn(grid, |_| {
        [Complex64::new(inv, 0.0), Complex64::new(inv, 0.0)]
    });
    Ok(SpinorScenario {
        name: "larmor".into(),
        psi,
        ext: ExternalFields::uniform_b(grid, [0.0, 0.0, b0]),
        refs: refs(&[("b0", b0), ("omega", constants.larmor_frequency(b0))]),
    })
}

/// Gaussian envelope with transverse spin in a uniform field: spin
/// precession on top of packet spreading.
pub fn gaussian_larmor(
    grid: &GridSpec,
    sigma_fraction: f64,
    b0: f64,
    constants: &PhysicalConstants,
) -> Result<SpinorScenario> {
    let base = gaussian(grid, sigma_fraction, constants)?;
    if constants.charge == 0.0 {
        return Err(Error::InvalidInput(
            "precession scenario needs a nonzero charge".into(),
        ));
    }
    let inv = 1.0 / 2.0f64.sqrt();
    let psi = SpinorField {
        grid: base.psi.grid.clone(),
        data: base
            .psi
            .data
            .iter()
            .map(|s| [s[0] * inv, s[0] * inv])
            .collect(),
    };
    let mut r = base.refs.clone();
    r.insert("b0".into(), b0);
    r.insert("omega".into(), constants.larmor_frequency(b0));
    Ok(SpinorScenario {
        name: "gaussian_larmor".into(),
        psi,
        ext: ExternalFields::uniform_b(grid, [0.0, 0.0, b0]),
        refs: r,
    })
}

/// Band-limited random spinor: a constant offset plus seeded low-frequency
/// modes, so the state is smooth, resolvable, and bounded away from zero
/// density almost everywhere. Deterministic in `seed`.
pub fn random_smooth(grid: &GridSpec, seed: u64, band: usize) -> SpinorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let band = band.max(1) as isize;
    // modes per active axis
    let mut modes: Vec<([f64; 3], Complex64, usize)> = Vec::new();
    let ext = grid.extents();
    for comp in 0..2usize {
        for fx in -band..=band {
            for fy in -band..=band {
                for fz in -band..=band {
                    let f = [fx, fy, fz];
                    let mut k = [0.0; 3];
                    let mut f2 = 0.0;
                    let mut skip = false;
                    for a in 0..3 {
                        if a < grid.dims() {
                            k[a] = 2.0 * PI * f[a] as f64 / ext[a];
                            f2 += (f[a] * f[a]) as f64;
                        } else if f[a] != 0 {
                            skip = true;
                        }
                    }
                    if skip || f2 == 0.0 {
                        continue;
                    }
                    let amp = 0.35 / (1.0 + f2);
                    let re = amp * (2.0 * rng.random::<f64>() - 1.0);
                    let im = amp * (2.0 * rng.random::<f64>() - 1.0);
                    modes.push((k, Complex64::new(re, im), comp));
                }
            }
        }
    }
    let offsets = [Complex64::new(1.2, 0.0), Complex64::new(0.25, 0.15)];
    SpinorField::from_fn(grid, |p| {
        let mut out = offsets;
        for (k, a, comp) in &modes {
            let phase = k[0] * p[0] + k[1] * p[1] + k[2] * p[2];
            out[*comp] += a * Complex64::from_polar(1.0, phase);
        }
        out
    })
}

/// Analytic helix-aligned frame about the box center: the spin axis winds
/// around the `z` axis on cylinders,
/// `s = (r e_phi + b z_hat)/sqrt(r^2 + b^2)`, with inward normal `-e_rho`.
/// Streamlines seeded on the design cylinder are circular helices with
/// curvature `r/(r^2 + b^2)` and torsion `b/(r^2 + b^2)`; the frame is
/// curve-aligned and twist-free there. `b = 0` degenerates to closed
/// circles. The mask excludes the axis neighborhood and the periodic seam
/// (the frame is not box-periodic).
pub fn helix_frame(grid: &GridSpec, radius: f64, b: f64) -> Result<FrameScenario> {
    if grid.dims() < 2 {
        return Err(Error::InvalidInput(
            "circulating frame needs at least 2 active axes".into(),
        ));
    }
    let ext = grid.extents();
    let l = ext[0].min(ext[1]);
    if !(radius > 0.0 && radius < 0.35 * l) {
        return Err(Error::InvalidInput(format!(
            "design radius {radius} outside (0, {})",
            0.35 * l
        )));
    }
    let center = [0.5 * ext[0], 0.5 * ext[1], 0.0];
    let norm = (radius * radius + b * b).sqrt();
    let axis_floor = 0.5 * radius.min(0.08 * l);
    let seam_margin = 0.045 * l;
    // e_phi = (-dy, dx)/rho about the center; near the axis (always masked
    // out) fall back to a fixed orthonormal set to keep samples finite.
    let s_hat = VectorField::from_fn(grid, |p| {
        let (dx, dy) = (p[0] - center[0], p[1] - center[1]);
        let rho = (dx * dx + dy * dy).sqrt();
        if rho < 1e-12 {
            return [0.0, 0.0, 1.0];
        }
        [
            -radius * dy / (rho * norm),
            radius * dx / (rho * norm),
            b / norm,
        ]
    });
    let e1 = VectorField::from_fn(grid, |p| {
        let (dx, dy) = (p[0] - center[0], p[1] - center[1]);
        let rho = (dx * dx + dy * dy).sqrt();
        if rho < 1e-12 {
            return [1.0, 0.0, 0.0];
        }
        [-dx / rho, -dy / rho, 0.0]
    });
    let e2 = VectorField {
        grid: grid.clone(),
        data: (0..grid.len())
            .map(|p| vec3::cross(s_hat.data[p], e1.data[p]))
            .collect(),
    };
    let mask = MaskField::from_fn(grid, |p| {
        let dx = p[0] - center[0];
        let dy = p[1] - center[1];
        let rho = (dx * dx + dy * dy).sqrt();
        rho >= axis_floor
            && dx.abs() <= 0.5 * ext[0] - seam_margin
            && dy.abs() <= 0.5 * ext[1] - seam_margin
    });
    // a right-handed frame: e2 = s x e1, legs (e1, e2, s)
    let triad = TriadField::from_fields(e1, e2, s_hat, mask)?;
    let kappa = radius / (norm * norm);
    let tau = b / (norm * norm);
    let seeds = (0..4)
        .map(|i| {
            let a = 2.0 * PI * i as f64 / 4.0 + 0.3;
            [
                center[0] + radius * a.cos(),
                center[1] + radius * a.sin(),
                0.0,
            ]
        })
        .collect();
    Ok(FrameScenario {
        name: if b == 0.0 { "circle_frame" } else { "helix_frame" }.into(),
        triad,
        refs: refs(&[
            ("radius", radius),
            ("pitch", b),
            ("kappa", kappa),
            ("tau", tau),
            ("center_x", center[0]),
            ("center_y", center[1]),
            ("circumference", 2.0 * PI * radius),
        ]),
        seeds,
    })
}

/// Closed-circle frame: [`helix_frame`] with zero pitch.
pub fn circle_frame(grid: &GridSpec, radius: f64) -> Result<FrameScenario> {
    helix_frame(grid, radius, 0.0)
}

/// Scenario lookup by name, as used by the command line and the config file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    PlaneWave,
    TwoComponentWave,
    SpinHelix,
    Gaussian,
    Larmor,
    GaussianLarmor,
    RandomSmooth,
    CircleFrame,
    HelixFrame,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 9] = [
        ScenarioKind::PlaneWave,
        ScenarioKind::TwoComponentWave,
        ScenarioKind::SpinHelix,
        ScenarioKind::Gaussian,
        ScenarioKind::Larmor,
        ScenarioKind::GaussianLarmor,
        ScenarioKind::RandomSmooth,
        ScenarioKind::CircleFrame,
        ScenarioKind::HelixFrame,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::PlaneWave => "plane_wave",
            ScenarioKind::TwoComponentWave => "two_component_wave",
            ScenarioKind::SpinHelix => "spin_helix",
            ScenarioKind::Gaussian => "gaussian",
            ScenarioKind::Larmor => "larmor",
            ScenarioKind::GaussianLarmor => "gaussian_larmor",
            ScenarioKind::RandomSmooth => "random_smooth",
            ScenarioKind::CircleFrame => "circle_frame",
            ScenarioKind::HelixFrame => "helix_frame",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.name() == name)
            .ok_or_else(|| {
                let known: Vec<&str> = Self::ALL.iter().map(|k| k.name()).collect();
                Error::InvalidInput(format!(
                    "unknown scenario '{name}'; known: {}",
                    known.join(", ")
                ))
            })
    }

    /// True for analytic frame states (no spinor behind them).
    pub fn is_frame(&self) -> bool {
        matches!(self, ScenarioKind::CircleFrame | ScenarioKind::HelixFrame)
    }

    /// Build a spinor scenario from named parameters (unknown keys rejected
    /// by the config layer before this is called; missing keys take the
    /// documented defaults).
    pub fn build_spinor(
        &self,
        grid: &GridSpec,
        params: &BTreeMap<String, f64>,
        constants: &PhysicalConstants,
    ) -> Result<SpinorScenario> {
        let get = |key: &str, default: f64| params.get(key).copied().unwrap_or(default);
        match self {
            ScenarioKind::PlaneWave => {
                plane_wave(grid, get("cycles", DEFAULT_PLANE_WAVE_CYCLES), constants)
            }
            ScenarioKind::TwoComponentWave => two_component_wave(
                grid,
                get("cycles", DEFAULT_PLANE_WAVE_CYCLES),
                get("alpha", DEFAULT_MIX_ANGLE),
                constants,
            ),
            ScenarioKind::SpinHelix => {
                spin_helix(grid, get("cycles", DEFAULT_HELIX_CYCLES), constants)
            }
            ScenarioKind::Gaussian => {
                gaussian(grid, get("sigma_fraction", DEFAULT_SIGMA_FRACTION), constants)
            }
            ScenarioKind::Larmor => larmor(grid, get("b0", 1.0), constants),
            ScenarioKind::GaussianLarmor => gaussian_larmor(
                grid,
                get("sigma_fraction", DEFAULT_SIGMA_FRACTION),
                get("b0", 1.0),
                constants,
            ),
            ScenarioKind::RandomSmooth => {
                let psi = random_smooth(grid, get("seed", 7.0) as u64, get("band", 3.0) as usize);
                Ok(SpinorScenario {
                    name: "random_smooth".into(),
                    psi,
                    ext: ExternalFields::free(),
                    refs: BTreeMap::new(),
                })
            }
            _ => Err(Error::InvalidInput(format!(
                "scenario '{}' is a frame state; use build_frame",
                self.name()
            ))),
        }
    }

    /// Build a frame scenario from named parameters.
    pub fn build_frame(
        &self,
        grid: &GridSpec,
        params: &BTreeMap<String, f64>,
    ) -> Result<FrameScenario> {
        let get = |key: &str, default: f64| params.get(key).copied().unwrap_or(default);
        let l = grid.extents()[0].min(grid.extents()[1]);
        let radius = get("radius_fraction", DEFAULT_RADIUS_FRACTION) * l;
        match self {
            ScenarioKind::CircleFrame => circle_frame(grid, radius),
            ScenarioKind::HelixFrame => {
                helix_frame(grid, radius, get("pitch_fraction", 0.05) * l)
            }
            _ => Err(Error::InvalidInput(format!(
                "scenario '{}' is a spinor state; use build_spinor",
                self.name()
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables;

    fn consts() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    fn grid1d(n: usize) -> GridSpec {
        GridSpec::new(1, &[2.0 * PI], &[n]).unwrap()
    }

    #[test]
    fn plane_wave_velocity_reference_is_consistent() {
        let g = grid1d(64);
        let sc = plane_wave(&g, 2.0, &consts()).unwrap();
        let (v, mask) = observables::bilinear_velocity(&sc.psi, None, &consts()).unwrap();
        let k = sc.refs["k"];
        let dx = g.min_spacing();
        let expect = (k * dx).sin() / dx; // discrete dispersion of the stencil
        for p in 0..g.len() {
            if mask.valid[p] {
                assert!((v.data[p][0] - expect).abs() < 1e-12);
            }
        }
        assert!((sc.refs["velocity_x"] - k).abs() < 1e-14);
    }

    #[test]
    fn two_component_wave_spin_matches_reference() {
        let g = grid1d(64);
        let sc = two_component_wave(&g, 2.0, DEFAULT_MIX_ANGLE, &consts()).unwrap();
        let (s, _) = observables::spin(&sc.psi, &consts());
        assert!((s.data[10][0] - sc.refs["spin_x"]).abs() < 1e-14);
        assert!(s.data[10][1].abs() < 1e-14);
        assert!((s.data[10][2] - sc.refs["spin_z"]).abs() < 1e-14);
    }

    #[test]
    fn spin_helix_has_uniform_density_and_planar_spin() {
        let g = grid1d(64);
        let sc = spin_helix(&g, 3.0, &consts()).unwrap();
        let rho = observables::density(&sc.psi);
        let (s, _) = observables::spin(&sc.psi, &consts());
        let q = sc.refs["q"];
        for p in [0usize, 11, 40] {
            let x = g.position(p)[0];
            assert!((rho.data[p] - 1.0).abs() < 1e-14);
            assert!((s.data[p][0] - 0.5 * (q * x).cos()).abs() < 1e-13);
            assert!((s.data[p][1] - 0.5 * (q * x).sin()).abs() < 1e-13);
            assert!(s.data[p][2].abs() < 1e-14);
        }
    }

    #[test]
    fn gaussian_is_normalized_and_centered() {
        let g = grid1d(128);
        let sc = gaussian(&g, DEFAULT_SIGMA_FRACTION, &consts()).unwrap();
        assert!((sc.psi.norm() - 1.0).abs() < 1e-12);
        let rho = observables::density(&sc.psi);
        let mut best = (0usize, 0.0f64);
        for (p, &r) in rho.data.iter().enumerate() {
            if r > best.1 {
                best = (p, r);
            }
        }
        assert!((g.position(best.0)[0] - sc.refs["center_x"]).abs() <= g.min_spacing());
    }

    #[test]
    fn constructors_reject_unresolvable_waves() {
        let g = grid1d(16);
        assert!(plane_wave(&g, 3.0, &consts()).is_err());
        assert!(spin_helix(&g, 5.0, &consts()).is_err());
        assert!(gaussian(&grid1d(8), DEFAULT_SIGMA_FRACTION, &consts()).is_err());
        assert!(larmor(&g, 1.0, &consts()).is_err(), "zero charge");
    }

    #[test]
    fn random_smooth_is_deterministic_in_the_seed() {
        let g = grid1d(32);
        let a = random_smooth(&g, 11, 3);
        let b = random_smooth(&g, 11, 3);
        let c = random_smooth(&g, 12, 3);
        assert!(a.max_abs_diff(&b).unwrap() == 0.0);
        assert!(a.max_abs_diff(&c).unwrap() > 1e-3);
    }

    #[test]
    fn helix_frame_is_orthonormal_and_curve_references_hold() {
        let g = GridSpec::new(2, &[2.0 * PI, 2.0 * PI], &[96, 96]).unwrap();
        let sc = helix_frame(&g, 2.0 * PI / 6.0, 0.2).unwrap();
        assert!(sc.triad.orthonormality_defect() < 1e-12);
        assert!(sc.triad.mask.fraction_valid() > 0.5);
        // field-level curvature at the seed radius approaches r/(r^2+b^2)
        let sca = crate::triad::frame_divergences(&sc.triad);
        let seed = sc.seeds[0];
        // nearest grid point to the seed
        let h = g.spacing();
        let i = (seed[0] / h[0]).round() as usize % g.points()[0];
        let j = (seed[1] / h[1]).round() as usize % g.points()[1];
        let p = g.idx(i, j, 0);
        let expect = sc.refs["kappa"];
        let got = sca.kappa.data[p];
        // the sampled point is up to half a cell off the design cylinder;
        // kappa varies like r^2/(c^2 rho) there
        assert!((got - expect).abs() < 0.1 * expect, "kappa {got} vs {expect}");
    }

    #[test]
    fn scenario_names_roundtrip() {
        for kind in ScenarioKind::ALL {
            assert_eq!(ScenarioKind::from_name(kind.name()).unwrap(), kind);
        }
        assert!(ScenarioKind::from_name("nope").is_err());
    }
}
