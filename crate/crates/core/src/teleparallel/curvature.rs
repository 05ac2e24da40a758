//! Curvature identities linking the frame connection, its torsion, and the
//! metric curvature, evaluated per interior node without ever storing a
//! rank-4 field.
//!
//! Three curvature evaluations are compared:
//!
//! * the curvature of the frame connection, which must vanish (parallel
//!   transport that keeps frame components constant is path independent);
//! * the curvature of the symmetric (Levi-Civita) connection, computed
//!   directly; and
//! * the same curvature reconstructed from torsion data alone: substituting
//!   `frame = symmetric + contorsion` into the vanishing frame curvature
//!   yields
//!
//!   ```text
//!   R^a_{b c d}(symmetric) = -(grad_c K^a_{b d} - grad_d K^a_{b c})
//!                            - (K^a_{m c} K^m_{b d} - K^a_{m d} K^m_{b c})
//!   ```
//!
//!   with `grad` the symmetric-connection covariant derivative acting on all
//!   three indices of the contorsion `K`.
//!
//! Contractions follow `Ricci_{b d} = R^a_{b a d}` and `scalar = g^{b d}
//! Ricci_{b d}`. The stress tensor derived from the torsion route is
//! `stress_{a b} = (Ricci_{a b} - g_{a b} scalar / 2) / coupling`, and the
//! associated matter density is its metric trace over `c^2`, equal to
//! `-scalar / (c^2 coupling)`.

use rayon::prelude::*;

use serde::Serialize;

use super::catalog::TetradField4;
use super::connection::{
    christoffel, contorsion, contorsion_defect, metric, metric_compatibility_defect,
    torsion_from_coframe, torsion_from_frame, weitzenboeck,
};
use super::patch::{Patch4D, Tensor3Field4, PATCH_INTERIOR_MARGIN};
use crate::error::{Error, Result};

type Rank4 = [[[[f64; 4]; 4]; 4]; 4];

/// Curvature tensor of a connection field at one node:
/// `R^a_{b c d} = D_c C^a_{b d} - D_d C^a_{b c} + C^a_{m c} C^m_{b d}
/// - C^a_{m d} C^m_{b c}`. The node must be at least two layers inside the
/// patch so the connection's own stencil stays on populated nodes.
fn riemann_at(patch: &Patch4D, conn: &Tensor3Field4, p: usize) -> Rank4 {
    let spacing = patch.spacing();
    let mut dc = [[[[0.0; 4]; 4]; 4]; 4]; // dc[c][a][b][d] = D_c C^a_{b d}
    for c in 0..4 {
        if !patch.is_active(c) {
            continue;
        }
        let plus = patch
            .offset(p, c, 1)
            .expect("curvature requested on a boundary node");
        let minus = patch
            .offset(p, c, -1)
            .expect("curvature requested on a boundary node");
        let cp = &conn.data[plus];
        let cm = &conn.data[minus];
        let inv2h = 1.0 / (2.0 * spacing[c]);
        for a in 0..4 {
            for b in 0..4 {
                for d in 0..4 {
                    dc[c][a][b][d] = (cp[a][b][d] - cm[a][b][d]) * inv2h;
                }
            }
        }
    }
    let here = &conn.data[p];
    let mut r = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let mut acc = dc[c][a][b][d] - dc[d][a][b][c];
                    for m in 0..4 {
                        acc += here[a][m][c] * here[m][b][d] - here[a][m][d] * here[m][b][c];
                    }
                    r[a][b][c][d] = acc;
                }
            }
        }
    }
    r
}

/// Covariant derivative of the contorsion with respect to the symmetric
/// connection at one node: `out[c][a][b][d] = grad_c K^a_{b d}`.
fn contorsion_gradient_at(
    patch: &Patch4D,
    gamma: &Tensor3Field4,
    kont: &Tensor3Field4,
    p: usize,
) -> Rank4 {
    let spacing = patch.spacing();
    let g = &gamma.data[p];
    let k = &kont.data[p];
    let mut out = [[[[0.0; 4]; 4]; 4]; 4];
    for c in 0..4 {
        let (kp, km) = if patch.is_active(c) {
            let plus = patch
                .offset(p, c, 1)
                .expect("gradient requested on a boundary node");
            let minus = patch
                .offset(p, c, -1)
                .expect("gradient requested on a boundary node");
            (Some(&kont.data[plus]), Some(&kont.data[minus]))
        } else {
            (None, None)
        };
        let inv2h = 1.0 / (2.0 * spacing[c]);
        for a in 0..4 {
            for b in 0..4 {
                for d in 0..4 {
                    let mut acc = match (kp, km) {
                        (Some(kp), Some(km)) => (kp[a][b][d] - km[a][b][d]) * inv2h,
                        _ => 0.0,
                    };
                    for m in 0..4 {
                        acc += g[a][m][c] * k[m][b][d];
                        acc -= g[m][b][c] * k[a][m][d];
                        acc -= g[m][d][c] * k[a][b][m];
                    }
                    out[c][a][b][d] = acc;
                }
            }
        }
    }
    out
}

/// Metric curvature rebuilt from torsion data alone (through the contorsion).
fn torsion_route_riemann_at(
    patch: &Patch4D,
    gamma: &Tensor3Field4,
    kont: &Tensor3Field4,
    p: usize,
) -> Rank4 {
    let grad = contorsion_gradient_at(patch, gamma, kont, p);
    let k = &kont.data[p];
    let mut r = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let mut acc = -(grad[c][a][b][d] - grad[d][a][b][c]);
                    for m in 0..4 {
                        acc -= k[a][m][c] * k[m][b][d] - k[a][m][d] * k[m][b][c];
                    }
                    r[a][b][c][d] = acc;
                }
            }
        }
    }
    r
}

fn max_abs4(r: &Rank4) -> f64 {
    let mut worst = 0.0f64;
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    worst = worst.max(r[a][b][c][d].abs());
                }
            }
        }
    }
    worst
}

fn ricci_of(r: &Rank4) -> [[f64; 4]; 4] {
    let mut out = [[0.0; 4]; 4];
    for b in 0..4 {
        for d in 0..4 {
            let mut acc = 0.0;
            for a in 0..4 {
                acc += r[a][b][a][d];
            }
            out[b][d] = acc;
        }
    }
    out
}

/// Norms and identity defects of the full curvature chain for one tetrad
/// field. All entries are maxima over interior nodes.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureReport {
    /// Curvature of the frame connection; zero in the continuum.
    pub frame_flatness_defect: f64,
    /// Componentwise gap between the direct metric curvature and its
    /// torsion-route reconstruction.
    pub torsion_route_defect: f64,
    /// Gap between the two scalar-curvature evaluations.
    pub scalar_route_defect: f64,
    /// Gap between the two matter-density evaluations (assembled stress
    /// trace vs. the scalar shortcut); algebraic, so round-off sized.
    pub trace_route_defect: f64,
    /// Violation of metric compatibility of the symmetric connection.
    pub compatibility_defect: f64,
    /// Violation of the `frame = symmetric + contorsion` split.
    pub split_defect: f64,
    /// Componentwise gap between the frame-leg and inverse-leg torsion
    /// stencils; shrinks at the scheme's order wherever the legs vary.
    pub torsion_pair_defect: f64,
    /// Largest metric-curvature component.
    pub max_riemann: f64,
    /// Largest Ricci component (direct route).
    pub max_ricci: f64,
    /// Largest absolute scalar curvature (direct route).
    pub max_scalar: f64,
    /// Largest torsion component.
    pub max_torsion: f64,
    /// Largest component of the quadratic torsion invariant
    /// `H_{c m} = T^a_{b c} T^b_{a m}`.
    pub max_quadratic_invariant: f64,
    /// Largest absolute matter density from the stress trace.
    pub max_matter_density: f64,
    /// Number of interior nodes the maxima were taken over.
    pub interior_points: usize,
}

#[derive(Clone, Copy, Default)]
struct Extrema {
    flat: f64,
    route: f64,
    scalar_route: f64,
    trace_route: f64,
    riemann: f64,
    ricci: f64,
    scalar: f64,
    torsion: f64,
    quad: f64,
    rho: f64,
}

impl Extrema {
    fn merge(self, other: Self) -> Self {
        Self {
            flat: self.flat.max(other.flat),
            route: self.route.max(other.route),
            scalar_route: self.scalar_route.max(other.scalar_route),
            trace_route: self.trace_route.max(other.trace_route),
            riemann: self.riemann.max(other.riemann),
            ricci: self.ricci.max(other.ricci),
            scalar: self.scalar.max(other.scalar),
            torsion: self.torsion.max(other.torsion),
            quad: self.quad.max(other.quad),
            rho: self.rho.max(other.rho),
        }
    }
}

/// Runs the full curvature chain on a tetrad field.
///
/// `coupling` scales curvature into stress (the geometry-to-matter constant),
/// and `light_speed` converts the stress trace into a mass density. Both are
/// read by vacuum/flat tests with their natural-unit value `1.0`.
pub fn curvature_report(
    tetrad: &TetradField4,
    coupling: f64,
    light_speed: f64,
) -> Result<CurvatureReport> {
    curvature_report_windowed(tetrad, coupling, light_speed, PATCH_INTERIOR_MARGIN)
}

/// Same as [`curvature_report`], but takes the maxima over nodes at least
/// `margin` layers inside the patch. Convergence studies need this: with a
/// margin fixed in node count, the evaluation window creeps toward the
/// boundary as the grid refines, and a defect coefficient that grows toward
/// the boundary then masks the stencil order. Choosing `margin` so that
/// `margin * spacing` is the same length on every rung keeps the window
/// fixed in coordinates.
pub fn curvature_report_windowed(
    tetrad: &TetradField4,
    coupling: f64,
    light_speed: f64,
    margin: usize,
) -> Result<CurvatureReport> {
    if !(coupling.is_finite() && coupling != 0.0) {
        return Err(Error::InvalidInput(format!(
            "stress coupling must be finite and nonzero, got {coupling}"
        )));
    }
    if !(light_speed.is_finite() && light_speed > 0.0) {
        return Err(Error::InvalidInput(format!(
            "light speed must be positive, got {light_speed}"
        )));
    }
    if margin < PATCH_INTERIOR_MARGIN {
        return Err(Error::InvalidInput(format!(
            "curvature stencils need a margin of at least {PATCH_INTERIOR_MARGIN} layers, \
             got {margin}"
        )));
    }
    let patch = &tetrad.patch;
    let m = metric(tetrad);
    let delta = weitzenboeck(tetrad);
    let gamma = christoffel(&m);
    let torsion = torsion_from_frame(&delta);
    let kont = contorsion(&torsion, &m)?;

    let compatibility_defect = metric_compatibility_defect(&m, &gamma, margin);
    let split_defect = contorsion_defect(&delta, &gamma, &kont, margin);
    let torsion_alt = torsion_from_coframe(tetrad);
    let torsion_pair_defect = patch
        .interior_indices(margin)
        .into_par_iter()
        .map(|p| {
            let t1 = &torsion.data[p];
            let t2 = &torsion_alt.data[p];
            let mut worst = 0.0f64;
            for a in 0..4 {
                for b in 0..4 {
                    for c in 0..4 {
                        worst = worst.max((t1[a][b][c] - t2[a][b][c]).abs());
                    }
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max);

    let interior = patch.interior_indices(margin);
    if interior.is_empty() {
        return Err(Error::InvalidGrid(
            "patch has no interior nodes at the curvature margin".into(),
        ));
    }
    let interior_points = interior.len();
    let c2 = light_speed * light_speed;

    let extrema = interior
        .into_par_iter()
        .map(|p| {
            let r_frame = riemann_at(patch, &delta, p);
            let r_direct = riemann_at(patch, &gamma, p);
            let r_torsion = torsion_route_riemann_at(patch, &gamma, &kont, p);

            let mut route = 0.0f64;
            for a in 0..4 {
                for b in 0..4 {
                    for c in 0..4 {
                        for d in 0..4 {
                            route =
                                route.max((r_torsion[a][b][c][d] - r_direct[a][b][c][d]).abs());
                        }
                    }
                }
            }

            let ricci_direct = ricci_of(&r_direct);
            let ricci_torsion = ricci_of(&r_torsion);
            let g = &m.g.data[p];
            let ginv = &m.ginv.data[p];
            let mut scalar_direct = 0.0;
            let mut scalar_torsion = 0.0;
            let mut max_ricci = 0.0f64;
            for b in 0..4 {
                for d in 0..4 {
                    scalar_direct += ginv[b][d] * ricci_direct[b][d];
                    scalar_torsion += ginv[b][d] * ricci_torsion[b][d];
                    max_ricci = max_ricci.max(ricci_direct[b][d].abs());
                }
            }

            // Stress tensor from the torsion route and its trace, compared
            // against the scalar shortcut for the matter density.
            let mut stress_trace = 0.0;
            for a in 0..4 {
                for b in 0..4 {
                    let stress =
                        (ricci_torsion[a][b] - 0.5 * g[a][b] * scalar_torsion) / coupling;
                    stress_trace += ginv[a][b] * stress;
                }
            }
            let rho_assembled = stress_trace / c2;
            let rho_shortcut = -scalar_torsion / (c2 * coupling);

            let t = &torsion.data[p];
            let mut quad = 0.0f64;
            let mut max_t = 0.0f64;
            for c in 0..4 {
                for mm in 0..4 {
                    let mut h = 0.0;
                    for a in 0..4 {
                        for b in 0..4 {
                            h += t[a][b][c] * t[b][a][mm];
                        }
                        max_t = max_t.max(t[a][c][mm].abs());
                    }
                    quad = quad.max(h.abs());
                }
            }

            Extrema {
                flat: max_abs4(&r_frame),
                route,
                scalar_route: (scalar_direct - scalar_torsion).abs(),
                trace_route: (rho_assembled - rho_shortcut).abs(),
                riemann: max_abs4(&r_direct),
                ricci: max_ricci,
                scalar: scalar_direct.abs(),
                torsion: max_t,
                quad,
                rho: rho_shortcut.abs(),
            }
        })
        .reduce(Extrema::default, Extrema::merge);

    Ok(CurvatureReport {
        frame_flatness_defect: extrema.flat,
        torsion_route_defect: extrema.route,
        scalar_route_defect: extrema.scalar_route,
        trace_route_defect: extrema.trace_route,
        compatibility_defect,
        split_defect,
        torsion_pair_defect,
        max_riemann: extrema.riemann,
        max_ricci: extrema.ricci,
        max_scalar: extrema.scalar,
        max_torsion: extrema.torsion,
        max_quadratic_invariant: extrema.quad,
        max_matter_density: extrema.rho,
        interior_points,
    })
}
