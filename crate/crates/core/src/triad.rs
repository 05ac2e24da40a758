//! Orthonormal frame fields ("triads") built from spinor bilinears or
//! supplied analytically, the flat-space torsion they induce, the frame
//! anholonomity object, the geometric guidance velocity, and the
//! frame-divergence scalars feeding the curve-geometry velocity formula.
//!
//! Conventions fixed here:
//!
//! * `e1 = M/rho`, `e2 = N/rho`, `e3 = 2s/hbar` — exactly orthonormal and
//!   right-handed at every point with `rho > 0` (pointwise algebra).
//! * Torsion of the flat connection carried by the frame:
//!   `T^i_{jk} = -sum_b (D_k e_b[i]) e_b[j]`, the discretization of
//!   `e^i_b d_k e^b_j` with the derivative moved onto the inverse legs via
//!   `d(e e) = d(identity) = 0`. With this placement the transport identity
//!   `D_k e_a[i] + T^i_{jk} e_a[j] = 0` is an algebraic consequence of
//!   pointwise orthonormality, so its residual measures only round-off —
//!   both sides share the single stencil evaluation `D_k e_b`.

use crate::calculus::{directional_derivative, divergence, jacobian};
use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::field::{vec3, MaskField, ScalarField, SpinorField, VectorField};
use crate::grid::GridSpec;
use crate::observables::{self, ConventionSignature, DENSITY_MASK_FLOOR};

/// Orthonormal right-handed frame per grid point.
#[derive(Debug, Clone)]
pub struct TriadField {
    pub e1: VectorField,
    pub e2: VectorField,
    pub e3: VectorField,
    pub mask: MaskField,
}

/// Rank-3 torsion coefficients `T^i_{jk}` per grid point
/// (`data[p][i][j][k]`), flat Cartesian background.
#[derive(Debug, Clone)]
pub struct TorsionField3 {
    pub grid: GridSpec,
    pub data: Vec<[[[f64; 3]; 3]; 3]>,
    /// Input mask eroded by the stencil radius.
    pub mask: MaskField,
}

/// Frame anholonomity coefficients `Omega^a_{bc}` per grid point
/// (`data[p][a][b][c]`).
#[derive(Debug, Clone)]
pub struct AnholonomyField3 {
    pub grid: GridSpec,
    pub data: Vec<[[[f64; 3]; 3]; 3]>,
    pub mask: MaskField,
}

/// Scalar fields derived from a frame: directional stretches of the spin
/// axis, divergences of the three legs, field-level curvature/torsion of the
/// spin-axis flow, and the two abnormality components.
#[derive(Debug, Clone)]
pub struct FrameDerivedScalars {
    /// `m . (m . grad) s_hat`
    pub theta_ms: ScalarField,
    /// `n . (n . grad) s_hat`
    pub theta_ns: ScalarField,
    pub div_s: ScalarField,
    pub div_m: ScalarField,
    pub div_n: ScalarField,
    /// `kappa = m . (s_hat . grad) s_hat`
    pub kappa: ScalarField,
    /// `tau = n . (s_hat . grad) m`
    pub tau: ScalarField,
    /// `omega_n = n . (m . grad) s_hat - tau`
    pub omega_n: ScalarField,
    /// `omega_m = -m . (n . grad) s_hat - tau`
    pub omega_m: ScalarField,
    pub mask: MaskField,
}

impl TriadField {
    /// Assemble from explicit unit-vector fields (analytic frame states).
    pub fn from_fields(
        e1: VectorField,
        e2: VectorField,
        e3: VectorField,
        mask: MaskField,
    ) -> Result<Self> {
        e1.grid.check_same(&e2.grid, "frame leg 2")?;
        e1.grid.check_same(&e3.grid, "frame leg 3")?;
        e1.grid.check_same(&mask.grid, "frame mask")?;
        Ok(Self { e1, e2, e3, mask })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.e1.grid
    }

    /// Max pointwise orthonormality defect over valid points: deviations of
    /// the six inner products from the identity pattern plus the
    /// right-handedness defect `|e1 x e2 - e3|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.e1.grid.len() {
            if !self.mask.valid[i] {
                continue;
            }
            let (a, b, c) = (self.e1.data[i], self.e2.data[i], self.e3.data[i]);
            worst = worst
                .max((vec3::dot(a, a) - 1.0).abs())
                .max((vec3::dot(b, b) - 1.0).abs())
                .max((vec3::dot(c, c) - 1.0).abs())
                .max(vec3::dot(a, b).abs())
                .max(vec3::dot(a, c).abs())
                .max(vec3::dot(b, c).abs())
                .max(vec3::norm(vec3::sub(vec3::cross(a, b), c)));
        }
        worst
    }

    /// Leg by frame index (0 -> e1, 1 -> e2, 2 -> e3).
    pub fn leg(&self, a: usize) -> &VectorField {
        match a {
            0 => &self.e1,
            1 => &self.e2,
            _ => &self.e3,
        }
    }
}

/// Build the bilinear frame from a spinor: `e1 = M/rho`, `e2 = N/rho`,
/// `e3` the unit spin direction. No re-orthogonalization is applied, so
/// orthonormality deviations stay measurable.
pub fn triad_from_spinor(psi: &SpinorField) -> Result<TriadField> {
    let rho = observables::density(psi);
    let mask = MaskField::from_density(&rho, DENSITY_MASK_FLOOR);
    mask.require_nonempty("bilinear frame")?;
    let (m, n) = observables::bilinear_mn(psi);
    let grid = psi.grid.clone();
    let mut e1 = VectorField::zeros(&grid);
    let mut e2 = VectorField::zeros(&grid);
    let mut e3 = VectorField::zeros(&grid);
    for i in 0..grid.len() {
        let r = rho.data[i];
        if r <= 0.0 {
            continue;
        }
        e1.data[i] = vec3::scale(m.data[i], 1.0 / r);
        e2.data[i] = vec3::scale(n.data[i], 1.0 / r);
        // unit spin direction, independent of hbar
        let s = psi.data[i];
        let cross = s[0].conj() * s[1];
        e3.data[i] = [
            2.0 * cross.re / r,
            2.0 * cross.im / r,
            (s[0].norm_sqr() - s[1].norm_sqr()) / r,
        ];
    }
    TriadField::from_fields(e1, e2, e3, mask)
}

fn erode_for_stencil(mask: &MaskField, radius: usize) -> MaskField {
    mask.erode(radius)
}

/// Flat-background torsion `T^i_{jk} = -sum_b (D_k e_b[i]) e_b[j]`.
pub fn torsion3(triad: &TriadField) -> TorsionField3 {
    let grid = triad.grid().clone();
    let mut data = vec![[[[0.0f64; 3]; 3]; 3]; grid.len()];
    // jac[b][axis].data[p][comp] = D_axis e_b[comp]
    for b in 0..3 {
        let jac = jacobian(triad.leg(b));
        for (k, jk) in jac.iter().enumerate() {
            for p in 0..grid.len() {
                let leg = triad.leg(b).data[p];
                let d = jk.data[p];
                for i in 0..3 {
                    for j in 0..3 {
                        data[p][i][j][k] -= d[i] * leg[j];
                    }
                }
            }
        }
    }
    let mask = erode_for_stencil(&triad.mask, 1);
    TorsionField3 { grid, data, mask }
}

/// Max residual of the frame transport identity
/// `D_k e_a[i] + T^i_{jk} e_a[j] = 0` over the torsion mask.
pub fn triad_geodesic_residual(triad: &TriadField, torsion: &TorsionField3) -> Result<f64> {
    triad.grid().check_same(&torsion.grid, "torsion field")?;
    let grid = triad.grid();
    let mut worst = 0.0f64;
    for a in 0..3 {
        let jac = jacobian(triad.leg(a));
        for p in 0..grid.len() {
            if !torsion.mask.valid[p] {
                continue;
            }
            let leg = triad.leg(a).data[p];
            for k in 0..grid.dims() {
                for i in 0..3 {
                    let mut r = jac[k].data[p][i];
                    for j in 0..3 {
                        r += torsion.data[p][i][j][k] * leg[j];
                    }
                    worst = worst.max(r.abs());
                }
            }
        }
    }
    Ok(worst)
}

/// Frame anholonomity `Omega^a_{bc} = (D_i e_a[k] - D_k e_a[i]) e_b[k] e_c[i]`
/// (summed over spatial `i`, `k`). Antisymmetric in `b`, `c` by construction.
pub fn spin_space_anholonomity(triad: &TriadField) -> AnholonomyField3 {
    let grid = triad.grid().clone();
    let mut data = vec![[[[0.0f64; 3]; 3]; 3]; grid.len()];
    for a in 0..3 {
        let jac = jacobian(triad.leg(a)); // jac[i].data[p][k] = D_i e_a[k]
        for p in 0..grid.len() {
            // curl-like antisymmetrized derivative w[i][k] = D_i e_a[k] - D_k e_a[i]
            let mut w = [[0.0f64; 3]; 3];
            for i in 0..grid.dims() {
                for k in 0..3 {
                    w[i][k] += jac[i].data[p][k];
                }
            }
            for k in 0..grid.dims() {
                for i in 0..3 {
                    w[i][k] -= jac[k].data[p][i];
                }
            }
            let (eb, ec) = (&triad, &triad);
            for b in 0..3 {
                for c in 0..3 {
                    let mut acc = 0.0;
                    for i in 0..3 {
                        for k in 0..3 {
                            acc += w[i][k] * eb.leg(b).data[p][k] * ec.leg(c).data[p][i];
                        }
                    }
                    data[p][a][b][c] = acc;
                }
            }
        }
    }
    let mask = erode_for_stencil(&triad.mask, 1);
    AnholonomyField3 { grid, data, mask }
}

/// Frame rotation coefficients `c_{ab,k} = e_a . D_k e_b` for one index pair,
/// returned as a vector field over `k`. Antisymmetric in `a`, `b` up to
/// O(dx^2).
pub fn frame_coefficient(triad: &TriadField, a: usize, b: usize) -> VectorField {
    let grid = triad.grid().clone();
    let jac = jacobian(triad.leg(b));
    let mut out = VectorField::zeros(&grid);
    for p in 0..grid.len() {
        for k in 0..grid.dims() {
            out.data[p][k] = vec3::dot(triad.leg(a).data[p], jac[k].data[p]);
        }
    }
    out
}

/// Geometric guidance velocity `v_i = -(hbar/2m) e2^k D_i e1_k`, stencil
/// derivatives. The sign is as derived from the bilinear construction;
/// calibration certifies it against the bilinear velocity.
pub fn guidance_velocity_geometric(
    triad: &TriadField,
    constants: &PhysicalConstants,
) -> (VectorField, MaskField) {
    let grid = triad.grid().clone();
    let jac = jacobian(&triad.e1); // jac[i].data[p][k] = D_i e1[k]
    let coeff = -0.5 * constants.hbar / constants.mass;
    let mut v = VectorField::zeros(&grid);
    for p in 0..grid.len() {
        for i in 0..grid.dims() {
            v.data[p][i] = coeff * vec3::dot(triad.e2.data[p], jac[i].data[p]);
        }
    }
    (v, erode_for_stencil(&triad.mask, 1))
}

/// Guidance velocity with a closed-form frame derivative supplied instead of
/// stencils: `grad_e1[i]` holds the analytic `d_i e1`. Exact up to round-off
/// when the derivative is exact — used to pin hand values without stencil
/// truncation error.
pub fn guidance_velocity_from_jacobian(
    e2: &VectorField,
    grad_e1: &[VectorField; 3],
    constants: &PhysicalConstants,
) -> Result<VectorField> {
    for g in grad_e1 {
        e2.grid.check_same(&g.grid, "frame jacobian")?;
    }
    let coeff = -0.5 * constants.hbar / constants.mass;
    let mut v = VectorField::zeros(&e2.grid);
    for p in 0..e2.grid.len() {
        for (i, g) in grad_e1.iter().enumerate() {
            v.data[p][i] = coeff * vec3::dot(e2.data[p], g.data[p]);
        }
    }
    Ok(v)
}

/// All frame-derivative scalars of a triad, treating `(e1, e2, e3)` as
/// `(m, n, s_hat)`. For analytic curve-aligned frames these are the
/// curve-geometry quantities; for bilinear triads they are the frame-level
/// analogues (the frame normal need not coincide with the flow's curvature
/// normal — that alignment is measured, not assumed).
pub fn frame_divergences(triad: &TriadField) -> FrameDerivedScalars {
    let grid = triad.grid().clone();
    let (m, n, s) = (&triad.e1, &triad.e2, &triad.e3);
    // legs of one triad always share a grid, so these cannot fail
    let dd = |w: &VectorField, v: &VectorField| {
        directional_derivative(w, v).expect("triad legs share one grid")
    };
    let ds_dm = dd(m, s);
    let ds_dn = dd(n, s);
    let ds_ds = dd(s, s);
    let dm_ds = dd(s, m);

    let dot_field = |a: &VectorField, b: &VectorField| -> ScalarField {
        ScalarField {
            grid: grid.clone(),
            data: (0..grid.len())
                .map(|p| vec3::dot(a.data[p], b.data[p]))
                .collect(),
        }
    };

    let theta_ms = dot_field(m, &ds_dm);
    let theta_ns = dot_field(n, &ds_dn);
    let kappa = dot_field(m, &ds_ds);
    let tau = dot_field(n, &dm_ds);
    let div_s = divergence(s);
    let div_m = divergence(m);
    let div_n = divergence(n);
    let n_dot_ds_dm = dot_field(n, &ds_dm);
    let m_dot_ds_dn = dot_field(m, &ds_dn);
    let omega_n = ScalarField {
        grid: grid.clone(),
        data: (0..grid.len())
            .map(|p| n_dot_ds_dm.data[p] - tau.data[p])
            .collect(),
    };
    let omega_m = ScalarField {
        grid: grid.clone(),
        data: (0..grid.len())
            .map(|p| -m_dot_ds_dn.data[p] - tau.data[p])
            .collect(),
    };
    let mask = erode_for_stencil(&triad.mask, 1);
    FrameDerivedScalars {
        theta_ms,
        theta_ns,
        div_s,
        div_m,
        div_n,
        kappa,
        tau,
        omega_n,
        omega_m,
        mask,
    }
}

/// Curve-geometry velocity
/// `v = sigma_frenet (hbar/2m) (tau s - div(n) m + (kappa + div m) n)`,
/// evaluated with the triad legs as `(m, n, s)` and the field-level
/// `kappa`, `tau` from [`frame_divergences`].
pub fn velocity_frenet(
    triad: &TriadField,
    scalars: &FrameDerivedScalars,
    constants: &PhysicalConstants,
    conv: &ConventionSignature,
) -> Result<(VectorField, MaskField)> {
    triad.grid().check_same(&scalars.kappa.grid, "frame scalars")?;
    let grid = triad.grid().clone();
    let coeff = f64::from(conv.sigma_frenet) * 0.5 * constants.hbar / constants.mass;
    let mut v = VectorField::zeros(&grid);
    for p in 0..grid.len() {
        let tau = scalars.tau.data[p];
        let dn = scalars.div_n.data[p];
        let dm = scalars.div_m.data[p];
        let kap = scalars.kappa.data[p];
        for c in 0..3 {
            v.data[p][c] = coeff
                * (tau * triad.e3.data[p][c] - dn * triad.e1.data[p][c]
                    + (kap + dm) * triad.e2.data[p][c]);
        }
    }
    Ok((v, scalars.mask.clone()))
}

/// Normalized max discrepancy `max|a - b| / max|b|` over a mask; used by the
/// velocity-equivalence checks.
pub fn relative_velocity_discrepancy(
    a: &VectorField,
    b: &VectorField,
    mask: &MaskField,
) -> Result<f64> {
    a.grid.check_same(&b.grid, "velocity comparison")?;
    let scale = b.max_magnitude(Some(mask));
    if scale == 0.0 {
        return Err(Error::InvalidInput(
            "reference velocity is zero on the mask".into(),
        ));
    }
    Ok(a.sub(b)?.max_magnitude(Some(mask)) / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn consts() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    fn grid1d(n: usize) -> GridSpec {
        GridSpec::new(1, &[2.0 * PI], &[n]).unwrap()
    }

    fn plane_wave_triad(n: usize, k: f64) -> TriadField {
        let g = grid1d(n);
        let psi = SpinorField::from_fn(&g, |p| {
            [Complex64::from_polar(1.0, k * p[0]), Complex64::new(0.0, 0.0)]
        });
        triad_from_spinor(&psi).unwrap()
    }

    // --- frozen oracle values -------------------------------------------

    #[test]
    fn oracle_identity_triad() {
        let g = grid1d(8);
        let psi = SpinorField::from_fn(&g, |_| {
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
        });
        let t = triad_from_spinor(&psi).unwrap();
        assert_eq!(t.e1.data[2], [1.0, 0.0, 0.0]);
        assert_eq!(t.e2.data[2], [0.0, 1.0, 0.0]);
        assert_eq!(t.e3.data[2], [0.0, 0.0, 1.0]);
    }

    #[test]
    fn oracle_flipped_triad() {
        let g = grid1d(8);
        let psi = SpinorField::from_fn(&g, |_| {
            [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]
        });
        let t = triad_from_spinor(&psi).unwrap();
        assert_eq!(t.e1.data[0], [-1.0, 0.0, 0.0]);
        assert_eq!(t.e2.data[0], [0.0, 1.0, 0.0]);
        assert_eq!(t.e3.data[0], [0.0, 0.0, -1.0]);
    }

    #[test]
    fn oracle_plane_wave_torsion_components() {
        // Frame rotates by -2kx about z. Discrete rate kd = sin(2k dx)/dx:
        // T^x_{yx} = -kd, T^y_{xx} = +kd, all other first-axis components of
        // the xy block vanish; z row/column zero.
        let (n, k) = (64usize, 2.0);
        let triad = plane_wave_triad(n, k);
        let tor = torsion3(&triad);
        let g = grid1d(n);
        let dx = g.min_spacing();
        let kd = (2.0 * k * dx).sin() / dx;
        for p in [3usize, 20, 41] {
            let t = &tor.data[p];
            assert!((t[0][1][0] + kd).abs() < 1e-12, "T^x_yx");
            assert!((t[1][0][0] - kd).abs() < 1e-12, "T^y_xx");
            assert!(t[0][0][0].abs() < 1e-12);
            assert!(t[1][1][0].abs() < 1e-12);
            for j in 0..3 {
                assert!(t[2][j][0].abs() < 1e-12, "z row");
                assert!(t[j][2][0].abs() < 1e-12, "z column");
            }
        }
    }

    #[test]
    fn geodesic_identity_is_roundoff_exact() {
        // The transport identity holds algebraically for the shared stencil,
        // for any state — here a generic smooth two-component spinor.
        let g = grid1d(48);
        let psi = SpinorField::from_fn(&g, |p| {
            [
                Complex64::new(0.9 + 0.2 * p[0].sin(), 0.3 * (2.0 * p[0]).cos()),
                Complex64::new(0.4 * p[0].cos(), 0.5 + 0.25 * (3.0 * p[0]).sin()),
            ]
        });
        let triad = triad_from_spinor(&psi).unwrap();
        let tor = torsion3(&triad);
        let res = triad_geodesic_residual(&triad, &tor).unwrap();
        assert!(res < 1e-12, "residual {res}");
    }

    #[test]
    fn geodesic_residual_sees_injected_torsion_error() {
        let triad = plane_wave_triad(64, 2.0);
        let mut tor = torsion3(&triad);
        let clean = triad_geodesic_residual(&triad, &tor).unwrap();
        for t in tor.data.iter_mut() {
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        t[i][j][k] *= 1.01;
                    }
                }
            }
        }
        let perturbed = triad_geodesic_residual(&triad, &tor).unwrap();
        // 1% perturbation of T ~ 4 in magnitude -> residual ~ 0.04
        assert!(perturbed > 1e3 * clean.max(1e-15), "perturbed {perturbed}");
        assert!((perturbed - 0.01 * 4.0).abs() / (0.01 * 4.0) < 0.2);
    }

    #[test]
    fn oracle_plane_wave_anholonomity() {
        // Omega^1_{12} = kd cos 2kx, Omega^2_{12} = kd sin 2kx, third frame
        // row zero, antisymmetric in the last index pair.
        let (n, k) = (64usize, 2.0);
        let triad = plane_wave_triad(n, k);
        let om = spin_space_anholonomity(&triad);
        let g = grid1d(n);
        let dx = g.min_spacing();
        let kd = (2.0 * k * dx).sin() / dx;
        for p in [1usize, 13, 50] {
            let x = g.position(p)[0];
            let o = &om.data[p];
            assert!((o[0][0][1] - kd * (2.0 * k * x).cos()).abs() < 1e-12);
            assert!((o[1][0][1] - kd * (2.0 * k * x).sin()).abs() < 1e-12);
            for b in 0..3 {
                for c in 0..3 {
                    assert!((o[0][b][c] + o[0][c][b]).abs() < 1e-12, "antisym");
                    assert!(o[2][b][c].abs() < 1e-12, "spin row");
                }
            }
        }
    }

    #[test]
    fn oracle_plane_wave_guidance_velocity() {
        // Stencil route: v = (hbar k / m) sinc(2 k dx) exactly; closed-form
        // jacobian route: v = hbar k / m to round-off.
        let (n, k) = (64usize, 2.0);
        let triad = plane_wave_triad(n, k);
        let (v, mask) = guidance_velocity_geometric(&triad, &consts());
        let g = grid1d(n);
        let dx = g.min_spacing();
        let expect = (2.0 * k * dx).sin() / (2.0 * dx);
        for p in 0..g.len() {
            if mask.valid[p] {
                assert!((v.data[p][0] - expect).abs() < 1e-12);
                assert!(v.data[p][1].abs() < 1e-13);
            }
        }
        // analytic d_x e1 = -2k e2; transverse axes zero
        let grad0 = VectorField::from_fn(&g, |p| {
            let a = 2.0 * k * p[0];
            [2.0 * k * -a.sin(), 2.0 * k * -a.cos(), 0.0]
        });
        let zero = VectorField::zeros(&g);
        let exact =
            guidance_velocity_from_jacobian(&triad.e2, &[grad0, zero.clone(), zero], &consts())
                .unwrap();
        for p in 0..g.len() {
            assert!((exact.data[p][0] - k).abs() < 1e-13);
        }
    }

    #[test]
    fn guidance_matches_bilinear_on_spin_helix() {
        // psi = (e^{-iqx}, 1)/sqrt2. The frame legs carry double-frequency
        // components (m_x = (cos 2qx - 1)/2, ...), so the geometric route
        // mixes the centered-stencil rates sin(2q dx)/dx and sin(q dx)/dx
        // while the bilinear route sees only the latter; working out the
        // dot products gives a relative gap of exactly 1 - cos(q dx),
        // peaking where cos 2qx = 1. Second order, with a known constant.
        let q = 3.0;
        let mut samples = Vec::new();
        for n in [32usize, 64, 128] {
            let g = grid1d(n);
            let inv = 1.0 / 2.0f64.sqrt();
            let psi = SpinorField::from_fn(&g, |p| {
                [
                    Complex64::from_polar(inv, -q * p[0]),
                    Complex64::new(inv, 0.0),
                ]
            });
            let triad = triad_from_spinor(&psi).unwrap();
            let (vg, mask) = guidance_velocity_geometric(&triad, &consts());
            let (vb, _) = observables::bilinear_velocity(&psi, None, &consts()).unwrap();
            let disc = relative_velocity_discrepancy(&vg, &vb, &mask).unwrap();
            let expected = 1.0 - (q * g.min_spacing()).cos();
            assert!(
                (disc - expected).abs() < 1e-12,
                "n = {n}: discrepancy {disc} vs closed form {expected}"
            );
            samples.push((g.min_spacing(), disc));
        }
        match crate::calculus::convergence_order(&samples).unwrap() {
            crate::calculus::ConvergenceEstimate::Order(p) => {
                assert!(p > 1.8, "order {p}")
            }
            crate::calculus::ConvergenceEstimate::Exact => {}
        }
    }

    #[test]
    fn oracle_plane_wave_frame_divergences_and_frenet_velocity() {
        // div m = -kd sin 2kx, div n = kd cos 2kx, kappa = tau = 0; the raw
        // curve-geometry formula yields -(hbar/2m) kd x_hat.
        let (n, k) = (64usize, 2.0);
        let triad = plane_wave_triad(n, k);
        let sc = frame_divergences(&triad);
        let g = grid1d(n);
        let dx = g.min_spacing();
        let kd = (2.0 * k * dx).sin() / dx;
        for p in [2usize, 30, 61] {
            let x = g.position(p)[0];
            assert!((sc.div_m.data[p] + kd * (2.0 * k * x).sin()).abs() < 1e-12);
            assert!((sc.div_n.data[p] - kd * (2.0 * k * x).cos()).abs() < 1e-12);
            assert!(sc.kappa.data[p].abs() < 1e-13);
            assert!(sc.tau.data[p].abs() < 1e-13);
            assert!(sc.div_s.data[p].abs() < 1e-13);
        }
        let raw = ConventionSignature {
            sigma_euler: 1,
            sigma_frenet: 1,
            role_swap: false,
        };
        let (v, mask) = velocity_frenet(&triad, &sc, &consts(), &raw).unwrap();
        for p in 0..g.len() {
            if mask.valid[p] {
                assert!((v.data[p][0] + 0.5 * kd).abs() < 1e-12, "raw sign");
                assert!(v.data[p][1].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn frame_divergence_relation_closes_on_random_smooth_state() {
        // div s = theta_ms + theta_ns within O(dx^2) under refinement.
        let mut samples = Vec::new();
        for n in [24usize, 48, 96] {
            let g = grid1d(n);
            let psi = SpinorField::from_fn(&g, |p| {
                [
                    Complex64::new(1.0 + 0.3 * p[0].sin(), 0.2 * (2.0 * p[0]).cos()),
                    Complex64::new(0.5 * (2.0 * p[0]).sin(), 0.4 + 0.3 * p[0].cos()),
                ]
            });
            let triad = triad_from_spinor(&psi).unwrap();
            let sc = frame_divergences(&triad);
            let mut worst = 0.0f64;
            for p in 0..g.len() {
                if sc.mask.valid[p] {
                    worst = worst.max(
                        (sc.div_s.data[p] - sc.theta_ms.data[p] - sc.theta_ns.data[p]).abs(),
                    );
                }
            }
            samples.push((g.min_spacing(), worst));
        }
        match crate::calculus::convergence_order(&samples).unwrap() {
            crate::calculus::ConvergenceEstimate::Order(p) => {
                assert!(p > 1.8, "order {p}")
            }
            crate::calculus::ConvergenceEstimate::Exact => {}
        }
    }

    #[test]
    fn frame_coefficient_antisymmetry_converges() {
        let mut samples = Vec::new();
        for n in [24usize, 48, 96] {
            let g = grid1d(n);
            let psi = SpinorField::from_fn(&g, |p| {
                [
                    Complex64::new(1.0, 0.4 * p[0].sin()),
                    Complex64::new(0.3 * (2.0 * p[0]).cos(), 0.6),
                ]
            });
            let triad = triad_from_spinor(&psi).unwrap();
            let c12 = frame_coefficient(&triad, 0, 1);
            let c21 = frame_coefficient(&triad, 1, 0);
            let sum = c12.zip_with(&c21, |a, b| {
                [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
            })
            .unwrap();
            samples.push((g.min_spacing(), sum.max_magnitude(Some(&triad.mask))));
        }
        match crate::calculus::convergence_order(&samples).unwrap() {
            crate::calculus::ConvergenceEstimate::Order(p) => {
                assert!(p > 1.8, "order {p}")
            }
            crate::calculus::ConvergenceEstimate::Exact => {}
        }
    }
}
