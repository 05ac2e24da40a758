//! Integral curves of a unit direction field and their curve geometry.
//!
//! A streamline is traced with fixed-arclength RK4 steps through the
//! multilinear interpolant of the field (directions are re-normalized after
//! every interpolation, so the parameter is arclength to integrator order).
//! The moving trihedron along the curve is then built from cubic-convolution
//! tangent resamples and centered arclength differences, with a
//! parallel-transport fallback where the curvature is too small to define a
//! normal. An independent estimate of the same curvature and torsion comes
//! from projecting the grid torsion coefficients onto the frame along the
//! curve; agreement of the two routes is a cross-check that the torsion
//! field encodes the bending of the integral curves.

use crate::error::{Error, Result};
use crate::field::{vec3, MaskField, VectorField};
use crate::grid::GridSpec;
use crate::interp::{sample_payload, sample_vector, Kernel};
use crate::triad::{TorsionField3, TriadField};

/// Per-sample flag: centered stencil clipped at a curve endpoint.
pub const FLAG_CLIPPED_STENCIL: u8 = 1;
/// Per-sample flag: curvature under the degeneracy floor, normal continued
/// by parallel transport.
pub const FLAG_DEGENERATE_NORMAL: u8 = 2;

/// Curvature floor (in units of `1 / reference spacing`) below which the
/// normal direction is treated as undefined.
pub const DEGENERATE_CURVATURE_FLOOR: f64 = 1e-8;

/// Direction magnitudes below this are treated as a field zero (the trace
/// cannot continue through a stagnation point).
const DIRECTION_FLOOR: f64 = 1e-12;

/// A traced integral curve. Positions are unwrapped (they may leave the
/// fundamental periodic cell; sampling wraps them back), so closure and
/// drift of nominally closed curves stay measurable.
#[derive(Debug, Clone)]
pub struct Streamline {
    /// Arclength parameter, `s[i] = i * ds`.
    pub s: Vec<f64>,
    pub points: Vec<[f64; 3]>,
    /// False when the trace stopped early because the interpolation support
    /// touched a masked-out node or a field zero.
    pub complete: bool,
}

/// Distance between the last and first sample of a trace (closure defect
/// when the requested arclength is one full loop).
pub fn endpoint_gap(line: &Streamline) -> f64 {
    match (line.points.first(), line.points.last()) {
        (Some(a), Some(b)) => vec3::norm(vec3::sub(*b, *a)),
        _ => 0.0,
    }
}

/// True when every node in the multilinear support of `point` is valid.
fn support_valid(mask: &MaskField, point: [f64; 3]) -> bool {
    let grid = &mask.grid;
    let h = grid.spacing();
    let pts = grid.points();
    let mut corners = [[0usize; 2]; 3];
    for a in 0..3 {
        if pts[a] == 1 {
            corners[a] = [0, 0];
            continue;
        }
        let u = (point[a] / h[a]).floor() as isize;
        let n = pts[a] as isize;
        let lo = ((u % n) + n) % n;
        let hi = (lo + 1) % n;
        corners[a] = [lo as usize, hi as usize];
    }
    for &i in &corners[0] {
        for &j in &corners[1] {
            for &k in &corners[2] {
                if !mask.valid[grid.idx(i, j, k)] {
                    return false;
                }
            }
        }
    }
    true
}

/// Normalized field direction at `point`, or `None` at a field zero.
fn direction(field: &VectorField, point: [f64; 3], kernel: Kernel) -> Result<Option<[f64; 3]>> {
    let v = sample_vector(field, point, kernel)?;
    Ok(vec3::unit(v, DIRECTION_FLOOR))
}

/// Trace an integral curve of `field` from `start` with `steps` RK4 steps of
/// arclength `ds`. The trace truncates (with `complete = false`) when any
/// stage of a step needs data outside `mask` or hits a field zero; a `start`
/// outside the mask is an error.
pub fn trace(
    field: &VectorField,
    mask: &MaskField,
    start: [f64; 3],
    ds: f64,
    steps: usize,
) -> Result<Streamline> {
    field.grid.check_same(&mask.grid, "streamline trace")?;
    if !(ds > 0.0 && ds.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "streamline step {ds} must be positive"
        )));
    }
    if steps == 0 {
        return Err(Error::InvalidInput("streamline needs at least one step".into()));
    }
    if !support_valid(mask, start) {
        return Err(Error::StreamlineLeftDomain { s: 0.0 });
    }
    let mut s = vec![0.0];
    let mut points = vec![start];
    let mut complete = true;
    let mut x = start;
    'steps: for step in 0..steps {
        // classical RK4 on dx/ds = unit field direction
        let mut stages = [[0.0; 3]; 4];
        let offsets = [0.0, 0.5, 0.5, 1.0];
        for stage in 0..4 {
            let probe = if stage == 0 {
                x
            } else {
                let prev = stages[stage - 1];
                [
                    x[0] + offsets[stage] * ds * prev[0],
                    x[1] + offsets[stage] * ds * prev[1],
                    x[2] + offsets[stage] * ds * prev[2],
                ]
            };
            if !support_valid(mask, probe) {
                complete = false;
                break 'steps;
            }
            match direction(field, probe, Kernel::Multilinear)? {
                Some(d) => stages[stage] = d,
                None => {
                    complete = false;
                    break 'steps;
                }
            }
        }
        let mut next = x;
        for c in 0..3 {
            next[c] += ds / 6.0
                * (stages[0][c] + 2.0 * stages[1][c] + 2.0 * stages[2][c] + stages[3][c]);
        }
        if !support_valid(mask, next) {
            complete = false;
            break;
        }
        x = next;
        s.push((step + 1) as f64 * ds);
        points.push(x);
    }
    Ok(Streamline { s, points, complete })
}

/// Frenet-style moving frame and curvature/torsion along a traced curve.
#[derive(Debug, Clone)]
pub struct StreamlineGeometry {
    pub s: Vec<f64>,
    pub points: Vec<[f64; 3]>,
    pub tangent: Vec<[f64; 3]>,
    pub normal: Vec<[f64; 3]>,
    pub binormal: Vec<[f64; 3]>,
    pub kappa: Vec<f64>,
    pub tau: Vec<f64>,
    /// Bitwise OR of the `FLAG_*` constants per sample.
    pub flags: Vec<u8>,
    pub complete: bool,
}

fn perpendicular_part(v: [f64; 3], t: [f64; 3]) -> [f64; 3] {
    vec3::sub(v, vec3::scale(t, vec3::dot(v, t)))
}

/// Deterministic unit vector perpendicular to `t`: the coordinate axis least
/// aligned with `t`, projected and normalized.
fn fallback_normal(t: [f64; 3]) -> [f64; 3] {
    let mut best = 0;
    for a in 1..3 {
        if t[a].abs() < t[best].abs() {
            best = a;
        }
    }
    let mut axis = [0.0; 3];
    axis[best] = 1.0;
    vec3::unit(perpendicular_part(axis, t), 0.0).unwrap_or([1.0, 0.0, 0.0])
}

/// Centered derivative of a sampled quantity with second-order one-sided
/// ends. First-order end stencils are not enough here: an O(ds) tilt in the
/// endpoint frame leaks into the centered difference one sample in and
/// biases the torsion there by a fixed fraction independent of `ds`.
fn path_derivative(s: &[f64], v: &[[f64; 3]], i: usize) -> [f64; 3] {
    let n = v.len();
    if i > 0 && i + 1 < n {
        return vec3::scale(vec3::sub(v[i + 1], v[i - 1]), 1.0 / (s[i + 1] - s[i - 1]));
    }
    // three-point one-sided stencil on possibly non-uniform spacing
    let (i0, i1, i2) = if i == 0 { (0, 1, 2) } else { (n - 1, n - 2, n - 3) };
    let h1 = s[i1] - s[i0];
    let h2 = s[i2] - s[i1];
    let c0 = -(2.0 * h1 + h2) / (h1 * (h1 + h2));
    let c1 = (h1 + h2) / (h1 * h2);
    let c2 = -h1 / (h2 * (h1 + h2));
    let mut out = [0.0; 3];
    for c in 0..3 {
        out[c] = c0 * v[i0][c] + c1 * v[i1][c] + c2 * v[i2][c];
    }
    out
}

/// Build the moving frame along a traced curve. Tangents are resampled from
/// `field` with the cubic kernel (differencing a multilinear interpolant
/// along the path would inject first-order noise); curvature is the
/// magnitude of the tangent-orthogonal part of `dT/ds`, torsion is
/// `-N . dB/ds`. The degeneracy floor scales with `reference_spacing`.
pub fn frenet_apparatus(
    field: &VectorField,
    line: &Streamline,
    reference_spacing: f64,
) -> Result<StreamlineGeometry> {
    if line.points.len() < 3 {
        return Err(Error::InvalidInput(
            "curve geometry needs at least three samples".into(),
        ));
    }
    let n = line.points.len();
    let mut tangent = Vec::with_capacity(n);
    for &p in &line.points {
        match direction(field, p, Kernel::CubicConvolution)? {
            Some(d) => tangent.push(d),
            None => {
                return Err(Error::InvalidInput(
                    "field zero on a traced curve; cannot orient the frame".into(),
                ))
            }
        }
    }
    let kappa_floor = DEGENERATE_CURVATURE_FLOOR / reference_spacing;
    let mut flags = vec![0u8; n];
    flags[0] |= FLAG_CLIPPED_STENCIL;
    flags[n - 1] |= FLAG_CLIPPED_STENCIL;

    let mut normal = Vec::with_capacity(n);
    let mut kappa = Vec::with_capacity(n);
    let mut prev_normal: Option<[f64; 3]> = None;
    for i in 0..n {
        let dt = path_derivative(&line.s, &tangent, i);
        let curv_vec = perpendicular_part(dt, tangent[i]);
        let k = vec3::norm(curv_vec);
        kappa.push(k);
        let nrm = if k >= kappa_floor {
            vec3::scale(curv_vec, 1.0 / k)
        } else {
            flags[i] |= FLAG_DEGENERATE_NORMAL;
            let carried = prev_normal
                .map(|p| perpendicular_part(p, tangent[i]))
                .and_then(|p| vec3::unit(p, 1e-12));
            carried.unwrap_or_else(|| fallback_normal(tangent[i]))
        };
        prev_normal = Some(nrm);
        normal.push(nrm);
    }
    let binormal: Vec<[f64; 3]> = (0..n).map(|i| vec3::cross(tangent[i], normal[i])).collect();
    let mut tau = Vec::with_capacity(n);
    for i in 0..n {
        let db = path_derivative(&line.s, &binormal, i);
        tau.push(-vec3::dot(normal[i], db));
    }
    Ok(StreamlineGeometry {
        s: line.s.clone(),
        points: line.points.clone(),
        tangent,
        normal,
        binormal,
        kappa,
        tau,
        flags,
        complete: line.complete,
    })
}

fn sample_vector_ml(v: &VectorField, point: [f64; 3]) -> Result<[f64; 3]> {
    sample_vector(v, point, Kernel::Multilinear)
}

/// Curvature and torsion along a curve predicted by the grid torsion
/// coefficients: with the frame transported by the torsion
/// (`D_k e_a = -T e_a`), the tangent-projected coefficients give
/// `kappa = -[m_i s_j T^i_{jk}] t^k` and `tau = -[n_i m_j T^i_{jk}] t^k`
/// for a frame `(m, n, s)` whose first leg plays the normal role.
pub fn kappa_tau_from_torsion(
    triad: &TriadField,
    torsion: &TorsionField3,
    geometry: &StreamlineGeometry,
) -> Result<(Vec<f64>, Vec<f64>)> {
    triad
        .grid()
        .check_same(&torsion.grid, "torsion projection")?;
    let grid: &GridSpec = &torsion.grid;
    let mut kappa = Vec::with_capacity(geometry.points.len());
    let mut tau = Vec::with_capacity(geometry.points.len());
    for (idx, &p) in geometry.points.iter().enumerate() {
        let raw_m = sample_vector_ml(&triad.e1, p)?;
        let raw_s = sample_vector_ml(&triad.e3, p)?;
        let s_hat = vec3::unit(raw_s, DIRECTION_FLOOR).ok_or_else(|| {
            Error::InvalidInput("spin leg vanishes on a traced curve".into())
        })?;
        let m = vec3::unit(perpendicular_part(raw_m, s_hat), DIRECTION_FLOOR)
            .ok_or_else(|| {
                Error::InvalidInput("frame leg degenerate on a traced curve".into())
            })?;
        let n_leg = vec3::cross(s_hat, m);
        let t = sample_payload::<27>(
            grid,
            |q| {
                let src = &torsion.data[q];
                let mut out = [0.0; 27];
                for i in 0..3 {
                    for j in 0..3 {
                        for k in 0..3 {
                            out[(i * 3 + j) * 3 + k] = src[i][j][k];
                        }
                    }
                }
                out
            },
            p,
            Kernel::Multilinear,
        )?;
        let tan = geometry.tangent[idx];
        let mut k_acc = 0.0;
        let mut tau_acc = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let tt = t[(i * 3 + j) * 3 + k] * tan[k];
                    k_acc -= m[i] * s_hat[j] * tt;
                    tau_acc -= n_leg[i] * m[j] * tt;
                }
            }
        }
        kappa.push(k_acc);
        tau.push(tau_acc);
    }
    Ok((kappa, tau))
}

/// Net rotation count of the frame's first leg about the tangent, relative
/// to the curve normal, over the full curve (in turns). Zero for a frame
/// whose first leg tracks the curve normal; integer counts expose frames
/// that wind around the tangent.
pub fn frame_winding(triad: &TriadField, geometry: &StreamlineGeometry) -> Result<f64> {
    if geometry.points.len() < 2 {
        return Err(Error::InvalidInput("winding needs at least two samples".into()));
    }
    let mut total = 0.0;
    let mut prev: Option<f64> = None;
    for (idx, &p) in geometry.points.iter().enumerate() {
        let raw_m = sample_vector_ml(&triad.e1, p)?;
        let t = geometry.tangent[idx];
        let m = match vec3::unit(perpendicular_part(raw_m, t), DIRECTION_FLOOR) {
            Some(v) => v,
            None => continue,
        };
        let angle = vec3::dot(m, geometry.binormal[idx])
            .atan2(vec3::dot(m, geometry.normal[idx]));
        if let Some(a0) = prev {
            let mut d = angle - a0;
            while d > std::f64::consts::PI {
                d -= 2.0 * std::f64::consts::PI;
            }
            while d < -std::f64::consts::PI {
                d += 2.0 * std::f64::consts::PI;
            }
            total += d;
        }
        prev = Some(angle);
    }
    Ok(total / (2.0 * std::f64::consts::PI))
}
