//! Shared finite-difference stencils and convergence estimation.
//!
//! Every derivative in the crate routes through the central second-order
//! periodic stencils defined here, so discrete identities degrade coherently:
//! an identity that holds analytically is violated at O(dx^2) with constants
//! tied to one stencil family, and convergence orders are meaningful.

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::GridSpec;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Sub};

/// Element types the stencils operate on.
pub trait StencilElement:
    Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
}

impl StencilElement for f64 {
    fn zero() -> Self {
        0.0
    }
}

impl StencilElement for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
}

/// Central first difference along `axis`: `(f[i+1] - f[i-1]) / (2 dx)`,
/// periodic wrap. Along a collapsed axis this is exactly zero.
pub fn central_diff_axis<T: StencilElement>(grid: &GridSpec, data: &[T], axis: usize) -> Vec<T> {
    let h2 = 2.0 * grid.spacing()[axis];
    (0..grid.len())
        .into_par_iter()
        .map(|flat| {
            let plus = data[grid.neighbor(flat, axis, 1)];
            let minus = data[grid.neighbor(flat, axis, -1)];
            (plus - minus) * (1.0 / h2)
        })
        .collect()
}

/// Central second difference along `axis`: `(f[i+1] - 2 f[i] + f[i-1]) / dx^2`.
pub fn second_diff_axis<T: StencilElement>(grid: &GridSpec, data: &[T], axis: usize) -> Vec<T> {
    let h = grid.spacing()[axis];
    let inv_h2 = 1.0 / (h * h);
    (0..grid.len())
        .into_par_iter()
        .map(|flat| {
            let plus = data[grid.neighbor(flat, axis, 1)];
            let minus = data[grid.neighbor(flat, axis, -1)];
            let center = data[flat];
            (plus + minus - center * 2.0) * inv_h2
        })
        .collect()
}

/// Gradient of a scalar field (zero components along collapsed axes).
pub fn gradient(f: &ScalarField) -> VectorField {
    let mut out = VectorField::zeros(&f.grid);
    for axis in 0..f.grid.dims() {
        let d = central_diff_axis(&f.grid, &f.data, axis);
        for (o, v) in out.data.iter_mut().zip(d) {
            o[axis] = v;
        }
    }
    out
}

/// Divergence of a vector field.
pub fn divergence(v: &VectorField) -> ScalarField {
    let mut out = ScalarField::zeros(&v.grid);
    for axis in 0..v.grid.dims() {
        let comp: Vec<f64> = v.data.iter().map(|x| x[axis]).collect();
        let d = central_diff_axis(&v.grid, &comp, axis);
        for (o, val) in out.data.iter_mut().zip(d) {
            *o += val;
        }
    }
    out
}

/// Curl of a vector field. All three output components are computed;
/// derivatives along collapsed axes vanish.
pub fn curl(v: &VectorField) -> VectorField {
    let grid = &v.grid;
    // d[c][axis] = partial_axis v_c
    let mut d = [[None, None, None], [None, None, None], [None, None, None]];
    for axis in 0..grid.dims() {
        for (c, row) in d.iter_mut().enumerate() {
            let comp: Vec<f64> = v.data.iter().map(|x| x[c]).collect();
            row[axis] = Some(central_diff_axis(grid, &comp, axis));
        }
    }
    let get = |c: usize, axis: usize, i: usize| -> f64 {
        d[c][axis].as_ref().map_or(0.0, |v: &Vec<f64>| v[i])
    };
    let mut out = VectorField::zeros(grid);
    for i in 0..grid.len() {
        out.data[i] = [
            get(2, 1, i) - get(1, 2, i),
            get(0, 2, i) - get(2, 0, i),
            get(1, 0, i) - get(0, 1, i),
        ];
    }
    out
}

/// Laplacian of a scalar field.
pub fn laplacian(f: &ScalarField) -> ScalarField {
    let mut out = ScalarField::zeros(&f.grid);
    for axis in 0..f.grid.dims() {
        let d = second_diff_axis(&f.grid, &f.data, axis);
        for (o, val) in out.data.iter_mut().zip(d) {
            *o += val;
        }
    }
    out
}

/// Per-axis first derivatives of every component of a vector field:
/// `result[axis].data[i][c] = partial_axis v_c (i)`.
pub fn jacobian(v: &VectorField) -> [VectorField; 3] {
    let grid = &v.grid;
    let mut out = [
        VectorField::zeros(grid),
        VectorField::zeros(grid),
        VectorField::zeros(grid),
    ];
    for axis in 0..grid.dims() {
        for c in 0..3 {
            let comp: Vec<f64> = v.data.iter().map(|x| x[c]).collect();
            let d = central_diff_axis(grid, &comp, axis);
            for (o, val) in out[axis].data.iter_mut().zip(d) {
                o[c] = val;
            }
        }
    }
    out
}

/// Directional derivative `(w · grad) v` evaluated with the shared stencils.
pub fn directional_derivative(w: &VectorField, v: &VectorField) -> Result<VectorField> {
    w.grid.check_same(&v.grid, "directional derivative")?;
    let jac = jacobian(v);
    let mut out = VectorField::zeros(&v.grid);
    for i in 0..v.grid.len() {
        let wv = w.data[i];
        for c in 0..3 {
            out.data[i][c] =
                wv[0] * jac[0].data[i][c] + wv[1] * jac[1].data[i][c] + wv[2] * jac[2].data[i][c];
        }
    }
    Ok(out)
}

/// Kinds of first-class derivative operations (dynamic entry point used by
/// the CLI and bindings; library code calls the typed functions directly).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffKind {
    Gradient,
    Divergence,
    Curl,
    Laplacian,
}

/// Dynamic field wrapper for [`differential`].
pub enum FieldRef<'a> {
    Scalar(&'a ScalarField),
    Vector(&'a VectorField),
}

/// Dynamic result of [`differential`].
pub enum FieldValue {
    Scalar(ScalarField),
    Vector(VectorField),
}

/// Apply `kind` to `field`, rejecting rank mismatches.
pub fn differential(field: FieldRef<'_>, kind: DiffKind) -> Result<FieldValue> {
    match (field, kind) {
        (FieldRef::Scalar(f), DiffKind::Gradient) => Ok(FieldValue::Vector(gradient(f))),
        (FieldRef::Scalar(f), DiffKind::Laplacian) => Ok(FieldValue::Scalar(laplacian(f))),
        (FieldRef::Vector(v), DiffKind::Divergence) => Ok(FieldValue::Scalar(divergence(v))),
        (FieldRef::Vector(v), DiffKind::Curl) => Ok(FieldValue::Vector(curl(v))),
        (FieldRef::Scalar(_), k) => Err(Error::InvalidInput(format!(
            "{k:?} is not defined for scalar fields"
        ))),
        (FieldRef::Vector(_), k) => Err(Error::InvalidInput(format!(
            "{k:?} is not defined for vector fields"
        ))),
    }
}

/// Outcome of a convergence study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ConvergenceEstimate {
    /// Least-squares slope of log(norm) against log(dx).
    Order(f64),
    /// Every residual sat at the round-off floor; the quantity is exact to
    /// within machine precision and no order can be measured.
    Exact,
}

impl ConvergenceEstimate {
    /// True when the estimate satisfies `order >= min` (Exact always passes).
    pub fn at_least(&self, min: f64) -> bool {
        match self {
            ConvergenceEstimate::Exact => true,
            ConvergenceEstimate::Order(p) => *p >= min,
        }
    }

    /// True when the estimate lies in `[lo, hi]` (Exact always passes).
    pub fn within(&self, lo: f64, hi: f64) -> bool {
        match self {
            ConvergenceEstimate::Exact => true,
            ConvergenceEstimate::Order(p) => *p >= lo && *p <= hi,
        }
    }
}

/// Residual norms below this are treated as round-off and excluded from the
/// log-log fit.
pub const ROUNDOFF_FLOOR: f64 = 1e-13;

/// Least-squares slope of `log(norm)` vs `log(dx)` over at least three
/// resolutions. Norms at or below [`ROUNDOFF_FLOOR`] are classified as exact.
pub fn convergence_order(samples: &[(f64, f64)]) -> Result<ConvergenceEstimate> {
    if samples.len() < 3 {
        return Err(Error::TooFewResolutions(samples.len()));
    }
    for &(dx, norm) in samples {
        if !(dx > 0.0 && dx.is_finite()) || !norm.is_finite() || norm < 0.0 {
            return Err(Error::InvalidInput(format!(
                "convergence sample (dx={dx}, norm={norm}) is not usable"
            )));
        }
    }
    let live: Vec<(f64, f64)> = samples
        .iter()
        .copied()
        .filter(|&(_, n)| n > ROUNDOFF_FLOOR)
        .collect();
    if live.len() < samples.len() {
        // At least one residual is at round-off; a slope through mixed
        // round-off and genuine error would be meaningless. If everything
        // converged to the floor the quantity is exact; a partial hit is
        // reported the same way (the residual fell through the floor before
        // the study finished, which is stronger than any finite order).
        return Ok(ConvergenceEstimate::Exact);
    }
    let xs: Vec<f64> = live.iter().map(|&(dx, _)| dx.ln()).collect();
    let ys: Vec<f64> = live.iter().map(|&(_, n)| n.ln()).collect();
    let xbar = xs.iter().sum::<f64>() / xs.len() as f64;
    let ybar = ys.iter().sum::<f64>() / ys.len() as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys.iter()) {
        num += (x - xbar) * (y - ybar);
        den += (x - xbar) * (x - xbar);
    }
    if den == 0.0 {
        return Err(Error::InvalidInput(
            "convergence study needs distinct resolutions".into(),
        ));
    }
    Ok(ConvergenceEstimate::Order(num / den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid1d(n: usize) -> GridSpec {
        GridSpec::new(1, &[2.0 * PI], &[n]).unwrap()
    }

    #[test]
    fn gradient_of_sine_matches_cosine_to_second_order() {
        let mut norms = Vec::new();
        for n in [16usize, 32, 64, 128] {
            let g = grid1d(n);
            let f = ScalarField::from_fn(&g, |p| (3.0 * p[0]).sin());
            let grad = gradient(&f);
            let exact = VectorField::from_fn(&g, |p| [3.0 * (3.0 * p[0]).cos(), 0.0, 0.0]);
            let err = grad.sub(&exact).unwrap().max_magnitude(None);
            norms.push((g.min_spacing(), err));
        }
        match convergence_order(&norms).unwrap() {
            ConvergenceEstimate::Order(p) => assert!((p - 2.0).abs() < 0.1, "order {p}"),
            ConvergenceEstimate::Exact => panic!("should not be exact"),
        }
    }

    #[test]
    fn gradient_of_linear_field_is_exact_away_from_seam() {
        // Linear data is reproduced exactly by the central stencil at
        // interior points (the periodic seam sees the wrap jump).
        let g = grid1d(32);
        let f = ScalarField::from_fn(&g, |p| 2.5 * p[0]);
        let grad = gradient(&f);
        let pts = g.points()[0];
        for i in 1..pts - 1 {
            assert!((grad.data[i][0] - 2.5).abs() < 1e-12, "at {i}");
        }
    }

    #[test]
    fn laplacian_matches_second_derivative() {
        let g = grid1d(64);
        let f = ScalarField::from_fn(&g, |p| (2.0 * p[0]).cos());
        let lap = laplacian(&f);
        let exact = ScalarField::from_fn(&g, |p| -4.0 * (2.0 * p[0]).cos());
        let err = lap
            .zip_with(&exact, |a, b| a - b)
            .unwrap()
            .max_abs();
        assert!(err < 4.0 * (2.0 * g.min_spacing()).powi(2), "err {err}");
    }

    #[test]
    fn divergence_of_curl_vanishes_to_roundoff() {
        // Discrete shift operators commute, so div(curl) is zero in exact
        // arithmetic, not just at O(dx^2).
        let g = GridSpec::new(3, &[2.0 * PI, 2.0 * PI, 2.0 * PI], &[12, 12, 12]).unwrap();
        let v = VectorField::from_fn(&g, |p| {
            [
                (p[1]).sin() * (2.0 * p[2]).cos(),
                (p[0] + p[2]).cos(),
                (2.0 * p[0]).sin() * p[1].cos(),
            ]
        });
        let dc = divergence(&curl(&v));
        assert!(dc.max_abs() < 1e-12, "max {}", dc.max_abs());
    }

    #[test]
    fn curl_of_gradient_vanishes_to_roundoff() {
        let g = GridSpec::new(3, &[2.0 * PI, 2.0 * PI, 2.0 * PI], &[12, 12, 12]).unwrap();
        let f = ScalarField::from_fn(&g, |p| (p[0]).sin() * (p[1]).cos() + (p[2]).sin());
        let cg = curl(&gradient(&f));
        assert!(cg.max_magnitude(None) < 1e-12);
    }

    #[test]
    fn integral_of_divergence_vanishes_periodically() {
        let g = GridSpec::new(2, &[2.0 * PI, 2.0 * PI], &[16, 24]).unwrap();
        let v = VectorField::from_fn(&g, |p| {
            [p[0].sin() * p[1].cos(), (2.0 * p[1]).sin(), 0.0]
        });
        assert!(divergence(&v).integral().abs() < 1e-12);
    }

    #[test]
    fn differential_rejects_rank_mismatch() {
        let g = grid1d(8);
        let f = ScalarField::zeros(&g);
        assert!(differential(FieldRef::Scalar(&f), DiffKind::Divergence).is_err());
        let v = VectorField::zeros(&g);
        assert!(differential(FieldRef::Vector(&v), DiffKind::Gradient).is_err());
    }

    #[test]
    fn convergence_order_second_order_sequence() {
        let samples: Vec<(f64, f64)> = [0.1, 0.05, 0.025, 0.0125]
            .iter()
            .map(|&h| (h, 3.0 * h * h))
            .collect();
        match convergence_order(&samples).unwrap() {
            ConvergenceEstimate::Order(p) => assert!((p - 2.0).abs() < 1e-10),
            _ => panic!(),
        }
    }

    #[test]
    fn convergence_order_exact_marker_and_errors() {
        let zeroes = [(0.1, 0.0), (0.05, 0.0), (0.025, 0.0)];
        assert_eq!(
            convergence_order(&zeroes).unwrap(),
            ConvergenceEstimate::Exact
        );
        assert!(convergence_order(&[(0.1, 1.0), (0.05, 0.5)]).is_err());
        assert!(convergence_order(&[(0.1, 1.0), (0.1, 1.0), (0.1, 1.0)]).is_err());
    }
}
