//! Constant frame transformations: 4x4 matrix helpers, pure boosts, and
//! z-x-z rotations, all preserving the `(-+++)` Minkowski metric.

use super::MINKOWSKI_DIAG;
use crate::error::{Error, Result};

pub type Mat4 = [[f64; 4]; 4];

pub fn identity4() -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        out[i][i] = 1.0;
    }
    out
}

pub fn mul4(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = 0.0;
            for k in 0..4 {
                acc += a[i][k] * b[k][j];
            }
            out[i][j] = acc;
        }
    }
    out
}

pub fn transpose4(a: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = a[j][i];
        }
    }
    out
}

/// Largest absolute entry of `L^T diag(-+++) L - diag(-+++)`; zero for an
/// exact Lorentz transformation.
pub fn metric_preservation_defect(l: &Mat4) -> f64 {
    let mut worst = 0.0f64;
    for a in 0..4 {
        for b in 0..4 {
            let mut acc = 0.0;
            for c in 0..4 {
                acc += l[c][a] * MINKOWSKI_DIAG[c] * l[c][b];
            }
            let want = if a == b { MINKOWSKI_DIAG[a] } else { 0.0 };
            worst = worst.max((acc - want).abs());
        }
    }
    worst
}

/// Symmetric pure boost with velocity `beta` in units of the light speed.
///
/// With rapidity `theta = artanh(|beta|)` and direction cosines
/// `n_i = beta_i / |beta|`:
///
/// ```text
/// L[0][0] = cosh(theta)
/// L[0][i] = L[i][0] = -sinh(theta) n_i
/// L[i][j] = delta_ij + (cosh(theta) - 1) n_i n_j
/// ```
///
/// Requires `|beta| < 1`; `beta = 0` yields the identity.
pub fn lorentz_boost(beta: [f64; 3]) -> Result<Mat4> {
    let speed = (beta[0] * beta[0] + beta[1] * beta[1] + beta[2] * beta[2]).sqrt();
    if !speed.is_finite() || speed >= 1.0 {
        return Err(Error::InvalidInput(format!(
            "boost speed must satisfy |beta| < 1, got {speed}"
        )));
    }
    if speed == 0.0 {
        return Ok(identity4());
    }
    let n = [beta[0] / speed, beta[1] / speed, beta[2] / speed];
    let gamma = 1.0 / (1.0 - speed * speed).sqrt();
    let gb = gamma * speed; // sinh of the rapidity
    let mut out = identity4();
    out[0][0] = gamma;
    for i in 0..3 {
        out[0][i + 1] = -gb * n[i];
        out[i + 1][0] = -gb * n[i];
        for j in 0..3 {
            out[i + 1][j + 1] = if i == j { 1.0 } else { 0.0 } + (gamma - 1.0) * n[i] * n[j];
        }
    }
    Ok(out)
}

/// Spatial rotation about the z axis by `angle`, embedded with an identity
/// time row and column.
pub fn rotation_z(angle: f64) -> Mat4 {
    let (s, c) = angle.sin_cos();
    let mut out = identity4();
    out[1][1] = c;
    out[1][2] = -s;
    out[2][1] = s;
    out[2][2] = c;
    out
}

/// Spatial rotation about the x axis by `angle`, embedded with an identity
/// time row and column.
pub fn rotation_x(angle: f64) -> Mat4 {
    let (s, c) = angle.sin_cos();
    let mut out = identity4();
    out[2][2] = c;
    out[2][3] = -s;
    out[3][2] = s;
    out[3][3] = c;
    out
}

/// z-x-z rotation with the orientation-angle convention used throughout the
/// crate: `R(phi, theta, chi) = Rz(-phi) Rx(-theta) Rz(-chi)`.
pub fn rotation_zxz(phi: f64, theta: f64, chi: f64) -> Mat4 {
    mul4(
        &rotation_z(-phi),
        &mul4(&rotation_x(-theta), &rotation_z(-chi)),
    )
}
