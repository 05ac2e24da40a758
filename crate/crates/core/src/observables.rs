//! Bilinear observables of a Pauli spinor field and the Euler-angle
//! representation.
//!
//! For `psi = (psi1, psi2)` the derived fields are
//!
//! * density `rho = psi^dagger psi`,
//! * velocity `v = (hbar/m) Im(psi^dagger grad psi) / rho - (e/mc) A`,
//! * spin `s = (hbar/2) psi^dagger sigma psi / rho`,
//! * transverse pair `M^j + i N^j = psibar sigma^j psi` with
//!   `psibar = (-psi2, psi1)` (components, not conjugates).
//!
//! `(M/rho, N/rho, 2s/hbar)` is an exactly orthonormal right-handed frame at
//! every point with `rho > 0` — pointwise algebra, no derivatives involved —
//! which is what makes it usable as a frame field for the geometric modules.

use crate::calculus::central_diff_axis;
use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::field::{vec3, MaskField, ScalarField, SpinorField, VectorField};
use num_complex::Complex64;

/// Pauli matrices as row-major 2x2 complex arrays.
pub const SIGMA: [[[Complex64; 2]; 2]; 3] = {
    const O: Complex64 = Complex64::new(0.0, 0.0);
    const I: Complex64 = Complex64::new(1.0, 0.0);
    const J: Complex64 = Complex64::new(0.0, 1.0);
    const NI: Complex64 = Complex64::new(-1.0, 0.0);
    const NJ: Complex64 = Complex64::new(0.0, -1.0);
    [
        [[O, I], [I, O]],   // sigma_x
        [[O, NJ], [J, O]],  // sigma_y
        [[I, O], [O, NI]],  // sigma_z
    ]
};

/// Relative density floor below which points are masked invalid in derived
/// hydrodynamic fields.
pub const DENSITY_MASK_FLOOR: f64 = 1e-10;

/// Stricter relative floor used by residual evaluations.
pub const RESIDUAL_MASK_FLOOR: f64 = 1e-6;

/// Polar-angle margin (radians) inside which the Euler decomposition switches
/// to a pole gauge.
pub const POLE_MARGIN: f64 = 1e-6;

/// Hydrodynamic representation of a spinor state.
#[derive(Debug, Clone)]
pub struct HydroFields {
    pub rho: ScalarField,
    pub v: VectorField,
    pub s: VectorField,
    /// In-plane frame vector `M` (magnitude `rho`).
    pub m: VectorField,
    /// In-plane frame vector `N` (magnitude `rho`).
    pub n: VectorField,
    /// Valid where `rho >= DENSITY_MASK_FLOOR * max(rho)`.
    pub mask: MaskField,
}

/// Euler-angle representation `psi1 = R cos(theta/2) e^{-i(phi+chi)/2}`,
/// `psi2 = R sin(theta/2) e^{i(-phi+chi)/2}`.
#[derive(Debug, Clone)]
pub struct EulerFields {
    pub r: ScalarField,
    pub theta: ScalarField,
    pub phi: ScalarField,
    pub chi: ScalarField,
    /// True where the pole gauge (phi := 0) was applied.
    pub pole: MaskField,
    /// Valid where `rho` is above the mask floor.
    pub mask: MaskField,
}

/// `rho = |psi1|^2 + |psi2|^2`.
pub fn density(psi: &SpinorField) -> ScalarField {
    ScalarField {
        grid: psi.grid.clone(),
        data: psi
            .data
            .iter()
            .map(|s| s[0].norm_sqr() + s[1].norm_sqr())
            .collect(),
    }
}

/// `psi^dagger sigma^j psi` for j = x, y, z (unnormalized spin density * 2/hbar).
fn sigma_expectation(s: &[Complex64; 2]) -> [f64; 3] {
    let cross = s[0].conj() * s[1];
    [
        2.0 * cross.re,
        2.0 * cross.im,
        s[0].norm_sqr() - s[1].norm_sqr(),
    ]
}

/// Spin density and unit-spin fields: `s = (hbar/2) psi^dagger sigma psi / rho`.
pub fn spin(psi: &SpinorField, constants: &PhysicalConstants) -> (VectorField, MaskField) {
    let rho = density(psi);
    let mask = MaskField::from_density(&rho, DENSITY_MASK_FLOOR);
    let half_hbar = 0.5 * constants.hbar;
    let data = psi
        .data
        .iter()
        .zip(rho.data.iter())
        .map(|(c, &r)| {
            if r > 0.0 {
                vec3::scale(sigma_expectation(c), half_hbar / r)
            } else {
                [0.0; 3]
            }
        })
        .collect();
    (
        VectorField {
            grid: psi.grid.clone(),
            data,
        },
        mask,
    )
}

/// Bilinear velocity `v = (hbar/m) Im(psi^dagger grad psi)/rho - (e/mc) A`.
/// `a` is the vector potential (`None` means zero).
pub fn bilinear_velocity(
    psi: &SpinorField,
    a: Option<&VectorField>,
    constants: &PhysicalConstants,
) -> Result<(VectorField, MaskField)> {
    if let Some(a) = a {
        psi.grid.check_same(&a.grid, "vector potential")?;
    }
    let rho = density(psi);
    let mask = MaskField::from_density(&rho, DENSITY_MASK_FLOOR);
    let grid = &psi.grid;
    let mut v = VectorField::zeros(grid);
    let hbar_m = constants.hbar / constants.mass;
    for axis in 0..grid.dims() {
        for comp in 0..2 {
            let column: Vec<Complex64> = psi.data.iter().map(|s| s[comp]).collect();
            let d = central_diff_axis(grid, &column, axis);
            for i in 0..grid.len() {
                // Im(conj(psi_c) * d psi_c)
                v.data[i][axis] += (psi.data[i][comp].conj() * d[i]).im;
            }
        }
    }
    let gauge = constants.charge / (constants.mass * constants.light_speed);
    for i in 0..grid.len() {
        let r = rho.data[i];
        for c in 0..3 {
            v.data[i][c] = if r > 0.0 { hbar_m * v.data[i][c] / r } else { 0.0 };
            if let Some(a) = a {
                v.data[i][c] -= gauge * a.data[i][c];
            }
        }
    }
    Ok((v, mask))
}

/// The pair `(M, N)` with `M^j + i N^j = psibar sigma^j psi`,
/// `psibar = (-psi2, psi1)`.
pub fn bilinear_mn(psi: &SpinorField) -> (VectorField, VectorField) {
    let grid = psi.grid.clone();
    let mut m = VectorField::zeros(&grid);
    let mut n = VectorField::zeros(&grid);
    for (i, s) in psi.data.iter().enumerate() {
        let bar = [-s[1], s[0]];
        for j in 0..3 {
            let mut acc = Complex64::new(0.0, 0.0);
            for (a, bar_a) in bar.iter().enumerate() {
                for (b, s_b) in s.iter().enumerate() {
                    acc += bar_a * SIGMA[j][a][b] * s_b;
                }
            }
            m.data[i][j] = acc.re;
            n.data[i][j] = acc.im;
        }
    }
    (m, n)
}

/// All bilinear observables of a state in one pass.
pub fn hydro_fields(
    psi: &SpinorField,
    a: Option<&VectorField>,
    constants: &PhysicalConstants,
) -> Result<HydroFields> {
    let rho = density(psi);
    let mask = MaskField::from_density(&rho, DENSITY_MASK_FLOOR);
    let (v, _) = bilinear_velocity(psi, a, constants)?;
    let (s, _) = spin(psi, constants);
    let (m, n) = bilinear_mn(psi);
    Ok(HydroFields {
        rho,
        v,
        s,
        m,
        n,
        mask,
    })
}

/// Euler-angle decomposition with pole gauge `phi := 0` where
/// `sin(theta) < POLE_MARGIN`-equivalent (detected via the spin z-projection).
pub fn euler_decompose(psi: &SpinorField) -> EulerFields {
    let grid = psi.grid.clone();
    let rho = density(psi);
    let mask = MaskField::from_density(&rho, DENSITY_MASK_FLOOR);
    let mut r = ScalarField::zeros(&grid);
    let mut theta = ScalarField::zeros(&grid);
    let mut phi = ScalarField::zeros(&grid);
    let mut chi = ScalarField::zeros(&grid);
    let mut pole = MaskField {
        grid: grid.clone(),
        valid: vec![false; grid.len()],
    };
    for i in 0..grid.len() {
        let s = psi.data[i];
        let rr = rho.data[i].sqrt();
        r.data[i] = rr;
        if rho.data[i] == 0.0 {
            continue;
        }
        let sz = (s[0].norm_sqr() - s[1].norm_sqr()) / rho.data[i];
        let th = sz.clamp(-1.0, 1.0).acos();
        theta.data[i] = th;
        if th < POLE_MARGIN {
            // psi2 ~ 0: phi is unobservable; chi absorbs the total phase.
            pole.valid[i] = true;
            phi.data[i] = 0.0;
            chi.data[i] = -2.0 * s[0].arg();
        } else if th > std::f64::consts::PI - POLE_MARGIN {
            pole.valid[i] = true;
            phi.data[i] = 0.0;
            chi.data[i] = 2.0 * s[1].arg();
        } else {
            let a = s[0].arg();
            let b = s[1].arg();
            phi.data[i] = -(a + b);
            chi.data[i] = b - a;
        }
    }
    EulerFields {
        r,
        theta,
        phi,
        chi,
        pole,
        mask,
    }
}

/// Rebuild a spinor from Euler fields (inverse of [`euler_decompose`] up to a
/// per-point sign: the angle representation double-covers the spinor).
pub fn euler_compose(fields: &EulerFields) -> SpinorField {
    let grid = fields.r.grid.clone();
    let data = (0..grid.len())
        .map(|i| {
            let r = fields.r.data[i];
            let half = 0.5 * fields.theta.data[i];
            let phi = fields.phi.data[i];
            let chi = fields.chi.data[i];
            [
                Complex64::from_polar(r * half.cos(), -0.5 * (phi + chi)),
                Complex64::from_polar(r * half.sin(), 0.5 * (chi - phi)),
            ]
        })
        .collect();
    SpinorField { grid, data }
}

/// Gradient of an angle field: central difference of per-cell wrapped
/// increments, so 2*pi jumps of the representative do not pollute the
/// derivative. Resolvable fields wind less than pi per cell.
pub fn angle_gradient(angle: &ScalarField) -> VectorField {
    let grid = &angle.grid;
    let mut out = VectorField::zeros(grid);
    let h = grid.spacing();
    let wrap = |d: f64| {
        let mut x = d % std::f64::consts::TAU;
        if x > std::f64::consts::PI {
            x -= std::f64::consts::TAU;
        } else if x < -std::f64::consts::PI {
            x += std::f64::consts::TAU;
        }
        x
    };
    for axis in 0..grid.dims() {
        for flat in 0..grid.len() {
            let up = angle.data[grid.neighbor(flat, axis, 1)];
            let dn = angle.data[grid.neighbor(flat, axis, -1)];
            let here = angle.data[flat];
            out.data[flat][axis] = (wrap(up - here) + wrap(here - dn)) / (2.0 * h[axis]);
        }
    }
    out
}

/// Convention signature fixed by [`crate::convention::calibrate_conventions`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ConventionSignature {
    /// Overall sign of the Euler-angle velocity formula.
    pub sigma_euler: i8,
    /// Overall sign of the Serret-Frenet velocity formula.
    pub sigma_frenet: i8,
    /// Whether the roles of phi and chi in the Euler velocity formula are
    /// exchanged relative to the printed form.
    pub role_swap: bool,
}

impl Default for ConventionSignature {
    /// The printed forms, before calibration.
    fn default() -> Self {
        Self {
            sigma_euler: 1,
            sigma_frenet: 1,
            role_swap: false,
        }
    }
}

/// Euler-angle velocity
/// `v = sigma_euler * (hbar/2m) (grad chi + cos(theta) grad phi) - (e/mc) A`,
/// with `phi <-> chi` exchanged when `conv.role_swap` is set.
///
/// Points whose stencil neighborhood mixes pole-gauged and regular samples
/// are masked out (the gauge jump would contaminate the angle gradients);
/// uniformly pole-gauged regions evaluate normally.
pub fn velocity_euler(
    fields: &EulerFields,
    a: Option<&VectorField>,
    constants: &PhysicalConstants,
    conv: &ConventionSignature,
) -> Result<(VectorField, MaskField)> {
    if let Some(a) = a {
        fields.r.grid.check_same(&a.grid, "vector potential")?;
    }
    let grid = &fields.r.grid;
    let grad_phi = angle_gradient(&fields.phi);
    let grad_chi = angle_gradient(&fields.chi);
    let coeff = f64::from(conv.sigma_euler) * 0.5 * constants.hbar / constants.mass;
    let gauge = constants.charge / (constants.mass * constants.light_speed);
    let mut v = VectorField::zeros(grid);
    for i in 0..grid.len() {
        let ct = fields.theta.data[i].cos();
        let (g1, g2) = if conv.role_swap {
            (grad_phi.data[i], grad_chi.data[i])
        } else {
            (grad_chi.data[i], grad_phi.data[i])
        };
        for c in 0..3 {
            v.data[i][c] = coeff * (g1[c] + ct * g2[c]);
            if let Some(a) = a {
                v.data[i][c] -= gauge * a.data[i][c];
            }
        }
    }
    // Valid where density is fine and the gauge is uniform across the stencil.
    let mut gauge_ok = vec![true; grid.len()];
    for flat in 0..grid.len() {
        let here = fields.pole.valid[flat];
        'axes: for axis in 0..grid.dims() {
            for step in [-1isize, 1] {
                if fields.pole.valid[grid.neighbor(flat, axis, step)] != here {
                    gauge_ok[flat] = false;
                    break 'axes;
                }
            }
        }
    }
    let mask = fields.mask.and(&MaskField {
        grid: grid.clone(),
        valid: gauge_ok,
    })?;
    Ok((v, mask))
}

/// Max pointwise orthonormality defect of the bilinear frame
/// `(M/rho, N/rho, 2s/hbar)`: deviations of the six inner products from the
/// identity pattern plus the right-handedness defect `|e1 x e2 - e3|`.
pub fn triad_orthonormality_defect(h: &HydroFields, constants: &PhysicalConstants) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..h.rho.grid.len() {
        if !h.mask.valid[i] {
            continue;
        }
        let r = h.rho.data[i];
        let e1 = vec3::scale(h.m.data[i], 1.0 / r);
        let e2 = vec3::scale(h.n.data[i], 1.0 / r);
        let e3 = vec3::scale(h.s.data[i], 2.0 / constants.hbar);
        worst = worst
            .max((vec3::dot(e1, e1) - 1.0).abs())
            .max((vec3::dot(e2, e2) - 1.0).abs())
            .max((vec3::dot(e3, e3) - 1.0).abs())
            .max(vec3::dot(e1, e2).abs())
            .max(vec3::dot(e1, e3).abs())
            .max(vec3::dot(e2, e3).abs())
            .max(vec3::norm(vec3::sub(vec3::cross(e1, e2), e3)));
    }
    worst
}

/// Verify that a global phase `psi -> e^{i alpha} psi` rotates `(M, N)` by
/// `2 alpha` in their plane; returns the max defect.
pub fn gauge_rotation_defect(psi: &SpinorField, alpha: f64) -> f64 {
    let (m, n) = bilinear_mn(psi);
    let mut rotated = psi.clone();
    rotated.scale(Complex64::from_polar(1.0, alpha));
    let (m2, n2) = bilinear_mn(&rotated);
    let (c2a, s2a) = ((2.0 * alpha).cos(), (2.0 * alpha).sin());
    let mut worst = 0.0f64;
    for i in 0..psi.grid.len() {
        for c in 0..3 {
            let em = m2.data[i][c] - (c2a * m.data[i][c] - s2a * n.data[i][c]);
            let en = n2.data[i][c] - (s2a * m.data[i][c] + c2a * n.data[i][c]);
            worst = worst.max(em.abs()).max(en.abs());
        }
    }
    worst
}

/// Check the per-point double-cover round trip `compose(decompose(psi)) = ±psi`;
/// returns the max residual after choosing the better sign at each point.
pub fn euler_roundtrip_defect(psi: &SpinorField) -> f64 {
    let back = euler_compose(&euler_decompose(psi));
    let mut worst = 0.0f64;
    for (orig, rec) in psi.data.iter().zip(back.data.iter()) {
        let plus = (rec[0] - orig[0]).norm().max((rec[1] - orig[1]).norm());
        let minus = (rec[0] + orig[0]).norm().max((rec[1] + orig[1]).norm());
        worst = worst.max(plus.min(minus));
    }
    worst
}

/// Unit spin magnitude defect `max | |2s/hbar| - 1 |` over valid points.
pub fn unit_spin_defect(psi: &SpinorField, constants: &PhysicalConstants) -> f64 {
    let (s, mask) = spin(psi, constants);
    let mut worst = 0.0f64;
    for i in 0..s.grid.len() {
        if mask.valid[i] {
            worst = worst.max((vec3::norm(s.data[i]) * 2.0 / constants.hbar - 1.0).abs());
        }
    }
    worst
}

/// Internal guard used by ops that require two fields from the same state.
pub fn check_state_pair(a: &SpinorField, b: &SpinorField) -> Result<()> {
    a.grid.check_same(&b.grid, "state pair")?;
    if a.data.len() != b.data.len() {
        return Err(Error::GridMismatch("state pair length".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use std::f64::consts::PI;

    fn consts() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    fn grid1d(n: usize) -> GridSpec {
        GridSpec::new(1, &[2.0 * PI], &[n]).unwrap()
    }

    fn plane_wave(grid: &GridSpec, k: f64) -> SpinorField {
        SpinorField::from_fn(grid, |p| {
            [Complex64::from_polar(1.0, k * p[0]), Complex64::new(0.0, 0.0)]
        })
    }

    // --- frozen oracle values -------------------------------------------
    //
    // Hand-evaluated 2x2 matrix algebra for reference spinors, written down
    // before the implementation and asserted literally.

    #[test]
    fn oracle_spin_up_frame() {
        // psi = (1, 0): M = x_hat, N = y_hat, s = (hbar/2) z_hat.
        let g = grid1d(8);
        let psi = SpinorField::from_fn(&g, |_| {
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
        });
        let (m, n) = bilinear_mn(&psi);
        let (s, _) = spin(&psi, &consts());
        assert_eq!(m.data[3], [1.0, 0.0, 0.0]);
        assert_eq!(n.data[3], [0.0, 1.0, 0.0]);
        assert_eq!(s.data[3], [0.0, 0.0, 0.5]);
    }

    #[test]
    fn oracle_spin_down_frame() {
        // psi = (0, 1): M = -x_hat, N = y_hat, s = -(hbar/2) z_hat,
        // frame still right-handed: (-x) x (y) = -z.
        let g = grid1d(8);
        let psi = SpinorField::from_fn(&g, |_| {
            [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]
        });
        let (m, n) = bilinear_mn(&psi);
        let (s, _) = spin(&psi, &consts());
        assert_eq!(m.data[0], [-1.0, 0.0, 0.0]);
        assert_eq!(n.data[0], [0.0, 1.0, 0.0]);
        assert_eq!(s.data[0], [0.0, 0.0, -0.5]);
        let e3 = vec3::cross(m.data[0], n.data[0]);
        assert_eq!(e3, [0.0, 0.0, -1.0]);
    }

    #[test]
    fn oracle_plane_wave_mn_rotation() {
        // psi = e^{ikx} (1,0): M = (cos 2kx, -sin 2kx, 0),
        // N = (sin 2kx, cos 2kx, 0).
        let g = grid1d(32);
        let k = 2.0;
        let psi = plane_wave(&g, k);
        let (m, n) = bilinear_mn(&psi);
        for i in [0usize, 5, 17, 31] {
            let x = g.position(i)[0];
            let (c, s2) = ((2.0 * k * x).cos(), (2.0 * k * x).sin());
            for (got, want) in m.data[i].iter().zip([c, -s2, 0.0]) {
                assert!((got - want).abs() < 1e-12);
            }
            for (got, want) in n.data[i].iter().zip([s2, c, 0.0]) {
                assert!((got - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn oracle_mixed_spinor_spin_direction() {
        // psi = (1, 1)/sqrt(2): s = (hbar/2) x_hat.
        let g = grid1d(8);
        let inv = 1.0 / 2.0f64.sqrt();
        let psi = SpinorField::from_fn(&g, |_| {
            [Complex64::new(inv, 0.0), Complex64::new(inv, 0.0)]
        });
        let (s, _) = spin(&psi, &consts());
        for (got, want) in s.data[0].iter().zip([0.5, 0.0, 0.0]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn plane_wave_velocity_matches_discrete_dispersion() {
        // v = (hbar k / m) * sinc(k dx) for the central stencil; converges to
        // hbar k / m at second order.
        let k = 2.0;
        let mut samples = Vec::new();
        for n in [16usize, 32, 64, 128] {
            let g = grid1d(n);
            let psi = plane_wave(&g, k);
            let (v, _) = bilinear_velocity(&psi, None, &consts()).unwrap();
            let err = (v.data[4][0] - k).abs();
            samples.push((g.min_spacing(), err));
        }
        match crate::calculus::convergence_order(&samples).unwrap() {
            crate::calculus::ConvergenceEstimate::Order(p) => {
                assert!((p - 2.0).abs() < 0.05, "order {p}")
            }
            _ => panic!("expected finite order"),
        }
        // and the discrete value itself matches the sinc formula to round-off
        let g = grid1d(64);
        let psi = plane_wave(&g, k);
        let (v, _) = bilinear_velocity(&psi, None, &consts()).unwrap();
        let dx = g.min_spacing();
        let expect = (k * dx).sin() / dx;
        assert!((v.data[10][0] - expect).abs() < 1e-12);
    }

    #[test]
    fn gauge_shift_leaves_rho_and_velocity_invariant() {
        // A -> A + grad(Lambda), psi -> e^{i e Lambda / (hbar c)} psi.
        let consts = PhysicalConstants::with_charge(1.0);
        let g = grid1d(64);
        let k = 2.0;
        let a0 = VectorField::from_fn(&g, |_| [0.3, 0.0, 0.0]);
        let psi = plane_wave(&g, k);
        let (v0, _) = bilinear_velocity(&psi, Some(&a0), &consts).unwrap();
        // Lambda = sin(x); grad Lambda = cos(x)
        let lam = ScalarField::from_fn(&g, |p| p[0].sin());
        let a1 = VectorField::from_fn(&g, |p| [0.3 + p[0].cos(), 0.0, 0.0]);
        let shifted = SpinorField {
            grid: g.clone(),
            data: psi
                .data
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let ph = Complex64::from_polar(
                        1.0,
                        consts.charge * lam.data[i] / (consts.hbar * consts.light_speed),
                    );
                    [s[0] * ph, s[1] * ph]
                })
                .collect(),
        };
        let (v1, _) = bilinear_velocity(&shifted, Some(&a1), &consts).unwrap();
        let rho0 = density(&psi);
        let rho1 = density(&shifted);
        let drho = rho0.zip_with(&rho1, |a, b| a - b).unwrap().max_abs();
        assert!(drho < 1e-13);
        // the two velocity fields agree to O(dx^2); the coefficient is
        // bounded by the third derivative of the total phase (~(k+1)^3/6)
        let dv = v0.sub(&v1).unwrap().max_magnitude(None);
        let dx = g.min_spacing();
        assert!(dv < 6.0 * dx * dx, "dv = {dv}");
    }

    #[test]
    fn orthonormality_is_pointwise_exact() {
        let g = grid1d(32);
        // generic smooth state with both components populated
        let psi = SpinorField::from_fn(&g, |p| {
            [
                Complex64::new(1.0 + 0.3 * p[0].sin(), 0.2 * (2.0 * p[0]).cos()),
                Complex64::new(0.4 * p[0].cos(), -0.1 + 0.25 * (3.0 * p[0]).sin()),
            ]
        });
        let h = hydro_fields(&psi, None, &consts()).unwrap();
        assert!(triad_orthonormality_defect(&h, &consts()) < 1e-13);
        assert!(unit_spin_defect(&psi, &consts()) < 1e-13);
    }

    #[test]
    fn euler_decompose_identities() {
        let g = grid1d(8);
        // psi = (1, 0) -> R=1, theta=0, pole gauge, chi=0
        let up = SpinorField::from_fn(&g, |_| {
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
        });
        let e = euler_decompose(&up);
        assert!(e.pole.valid[0]);
        assert_eq!(e.r.data[0], 1.0);
        assert_eq!(e.theta.data[0], 0.0);
        assert_eq!(e.phi.data[0], 0.0);
        assert_eq!(e.chi.data[0], 0.0);
        // psi = (1,1)/sqrt(2) -> theta = pi/2, phi = chi = 0
        let inv = 1.0 / 2.0f64.sqrt();
        let mixed = SpinorField::from_fn(&g, |_| {
            [Complex64::new(inv, 0.0), Complex64::new(inv, 0.0)]
        });
        let e = euler_decompose(&mixed);
        assert!(!e.pole.valid[0]);
        assert!((e.theta.data[0] - PI / 2.0).abs() < 1e-12);
        assert!(e.phi.data[0].abs() < 1e-12);
        assert!(e.chi.data[0].abs() < 1e-12);
    }

    #[test]
    fn euler_roundtrip_on_generic_state() {
        let g = grid1d(48);
        let psi = SpinorField::from_fn(&g, |p| {
            [
                Complex64::new(0.8 + 0.2 * p[0].sin(), 0.3 * (2.0 * p[0]).cos()),
                Complex64::new(-0.1 * p[0].cos(), 0.5 + 0.3 * (3.0 * p[0]).sin()),
            ]
        });
        assert!(euler_roundtrip_defect(&psi) < 1e-12);
    }

    #[test]
    fn gauge_rotation_pattern_holds() {
        let g = grid1d(16);
        let psi = plane_wave(&g, 1.0);
        for alpha in [0.3, 1.1, -0.7] {
            assert!(gauge_rotation_defect(&psi, alpha) < 1e-12);
        }
    }

    #[test]
    fn angle_gradient_handles_branch_cuts() {
        let g = grid1d(64);
        // angle = 3x stored wrapped into (-pi, pi]
        let raw = ScalarField::from_fn(&g, |p| {
            let mut a = 3.0 * p[0];
            while a > PI {
                a -= 2.0 * PI;
            }
            a
        });
        let grad = angle_gradient(&raw);
        for i in 0..g.len() {
            assert!((grad.data[i][0] - 3.0).abs() < 1e-10, "at {i}");
        }
    }
}
