//! Periodic interpolation of grid fields at arbitrary points.
//!
//! Two kernels are provided:
//!
//! * **Multilinear** — the contract interpolant for the public sampling API
//!   and for streamline position integration. Exact on nodes, exact for
//!   per-axis linear data inside a cell, and bounded by the local cell
//!   extrema.
//! * **Cubic convolution** (Keys kernel, a = -1/2) — a C^1 kernel used where
//!   interpolated values are subsequently *differenced along a path*
//!   (Frenet tangents, torsion projections). Differencing a C^0 interpolant
//!   injects first-order noise; the C^1 kernel keeps such derived
//!   quantities second-order accurate.

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::GridSpec;

/// Interpolation kernel selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    Multilinear,
    CubicConvolution,
}

/// Per-axis weights and base node index for a sample point.
struct AxisTaps {
    /// Index of the first contributing node (to be wrapped periodically).
    base: isize,
    weights: [f64; 4],
    /// Number of taps actually used (2 for linear, 4 for cubic).
    count: usize,
}

fn axis_taps(kernel: Kernel, n: usize, h: f64, coord: f64) -> AxisTaps {
    if n == 1 {
        // Collapsed axis: the single sample carries full weight.
        return AxisTaps {
            base: 0,
            weights: [1.0, 0.0, 0.0, 0.0],
            count: 1,
        };
    }
    let u = coord / h;
    let cell = u.floor();
    let t = u - cell;
    match kernel {
        Kernel::Multilinear => AxisTaps {
            base: cell as isize,
            weights: [1.0 - t, t, 0.0, 0.0],
            count: 2,
        },
        Kernel::CubicConvolution => {
            // Keys kernel, a = -1/2: w_{-1}..w_{+2} as cubics in t.
            let t2 = t * t;
            let t3 = t2 * t;
            AxisTaps {
                base: cell as isize - 1,
                weights: [
                    0.5 * (-t3 + 2.0 * t2 - t),
                    0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
                    0.5 * (-3.0 * t3 + 4.0 * t2 + t),
                    0.5 * (t3 - t2),
                ],
                count: 4,
            }
        }
    }
}

#[inline]
fn wrap(i: isize, n: usize) -> usize {
    let n = n as isize;
    (((i % n) + n) % n) as usize
}

fn check_point(point: [f64; 3]) -> Result<()> {
    if point.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "interpolation point {point:?} has non-finite coordinates"
        )))
    }
}

/// Generic periodic tensor-product interpolation over per-point payloads of
/// width `W` (used internally for multi-component tensors).
pub(crate) fn sample_payload<const W: usize>(
    grid: &GridSpec,
    get: impl Fn(usize) -> [f64; W],
    point: [f64; 3],
    kernel: Kernel,
) -> Result<[f64; W]> {
    check_point(point)?;
    let h = grid.spacing();
    let pts = grid.points();
    let taps = [
        axis_taps(kernel, pts[0], h[0], point[0]),
        axis_taps(kernel, pts[1], h[1], point[1]),
        axis_taps(kernel, pts[2], h[2], point[2]),
    ];
    let mut acc = [0.0; W];
    for a in 0..taps[0].count {
        let ia = wrap(taps[0].base + a as isize, pts[0]);
        let wa = taps[0].weights[a];
        if wa == 0.0 {
            continue;
        }
        for b in 0..taps[1].count {
            let ib = wrap(taps[1].base + b as isize, pts[1]);
            let wab = wa * taps[1].weights[b];
            if wab == 0.0 {
                continue;
            }
            for c in 0..taps[2].count {
                let ic = wrap(taps[2].base + c as isize, pts[2]);
                let w = wab * taps[2].weights[c];
                if w == 0.0 {
                    continue;
                }
                let v = get(grid.idx(ia, ib, ic));
                for (dst, src) in acc.iter_mut().zip(v.iter()) {
                    *dst += w * src;
                }
            }
        }
    }
    Ok(acc)
}

/// Multilinear sample of a scalar field (the public contract interpolant).
pub fn interpolate_scalar(f: &ScalarField, point: [f64; 3]) -> Result<f64> {
    Ok(sample_payload(&f.grid, |i| [f.data[i]], point, Kernel::Multilinear)?[0])
}

/// Multilinear sample of a vector field.
pub fn interpolate_vector(v: &VectorField, point: [f64; 3]) -> Result<[f64; 3]> {
    sample_payload(&v.grid, |i| v.data[i], point, Kernel::Multilinear)
}

/// Kernel-selectable sample of a vector field.
pub fn sample_vector(v: &VectorField, point: [f64; 3], kernel: Kernel) -> Result<[f64; 3]> {
    sample_payload(&v.grid, |i| v.data[i], point, kernel)
}

/// Kernel-selectable sample of a scalar field.
pub fn sample_scalar(f: &ScalarField, point: [f64; 3], kernel: Kernel) -> Result<f64> {
    Ok(sample_payload(&f.grid, |i| [f.data[i]], point, kernel)?[0])
}
