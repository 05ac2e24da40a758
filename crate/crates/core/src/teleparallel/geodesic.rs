//! Autoparallel integration on a 4D patch: worldlines `x(s)` whose
//! four-velocity and any carried vector are transported with a sampled
//! connection field,
//!
//! ```text
//! dx/ds = u,   du^a/ds = -C^a_{b c} u^b u^c,   dv^a/ds = -C^a_{b c} v^b u^c.
//! ```
//!
//! With the frame connection of a uniformly rotating frame this reproduces
//! inertial motion as seen from the frame: the spatial velocity turns
//! backwards at the frame rate while the coordinate speed stays constant
//! ([`rotating_autoparallel_oracle`] gives the closed form).

use super::connection::MetricField4;
use super::frames::Mat4;
use super::patch::Tensor3Field4;
use crate::error::{Error, Result};

/// Margin used when sampling connection fields: their boundary layer is
/// never populated, so multilinear supports must stay one node inside.
const SAMPLE_MARGIN: usize = 1;

/// An integrated autoparallel: parameter values, positions, four-velocities,
/// the carried vector, and the worst drift of the four-velocity norm
/// `g(u, u)` away from its initial value.
#[derive(Debug, Clone)]
pub struct Geodesic4 {
    pub s: Vec<f64>,
    pub x: Vec<[f64; 4]>,
    pub u: Vec<[f64; 4]>,
    pub carried: Vec<[f64; 4]>,
    pub norm_drift: f64,
}

impl Geodesic4 {
    /// Errors when the norm drift exceeds `tol`; the drift measures how well
    /// the integrator preserved the metric length of the four-velocity.
    pub fn require_norm_drift_below(&self, tol: f64) -> Result<()> {
        if self.norm_drift > tol {
            return Err(Error::NormalizationDrift {
                drift: self.norm_drift,
                tol,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
struct State {
    x: [f64; 4],
    u: [f64; 4],
    v: [f64; 4],
}

fn derivative(conn: &Tensor3Field4, state: &State, s: f64) -> Result<State> {
    let c = conn
        .sample(state.x, SAMPLE_MARGIN)
        .ok_or(Error::LeftPatch { s })?;
    let mut du = [0.0; 4];
    let mut dv = [0.0; 4];
    for a in 0..4 {
        let mut acc_u = 0.0;
        let mut acc_v = 0.0;
        for b in 0..4 {
            for g in 0..4 {
                acc_u -= c[a][b][g] * state.u[b] * state.u[g];
                acc_v -= c[a][b][g] * state.v[b] * state.u[g];
            }
        }
        du[a] = acc_u;
        dv[a] = acc_v;
    }
    Ok(State {
        x: state.u,
        u: du,
        v: dv,
    })
}

fn advance(state: &State, rate: &State, h: f64) -> State {
    let mut out = *state;
    for a in 0..4 {
        out.x[a] = state.x[a] + h * rate.x[a];
        out.u[a] = state.u[a] + h * rate.u[a];
        out.v[a] = state.v[a] + h * rate.v[a];
    }
    out
}

fn metric_norm(metric: &MetricField4, x: [f64; 4], u: [f64; 4], s: f64) -> Result<f64> {
    let g = metric
        .g
        .sample(x, SAMPLE_MARGIN)
        .ok_or(Error::LeftPatch { s })?;
    let mut acc = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            acc += g[a][b] * u[a] * u[b];
        }
    }
    Ok(acc)
}

/// Integrates an autoparallel of the sampled connection with classic
/// fourth-order Runge-Kutta steps of size `ds`, carrying `v0` along by the
/// same transport. Fails with [`Error::LeftPatch`] if any stage leaves the
/// trusted interior of the patch.
pub fn integrate_autoparallel(
    conn: &Tensor3Field4,
    metric: &MetricField4,
    x0: [f64; 4],
    u0: [f64; 4],
    v0: [f64; 4],
    ds: f64,
    steps: usize,
) -> Result<Geodesic4> {
    if !(ds.is_finite() && ds > 0.0) {
        return Err(Error::InvalidInput(format!(
            "autoparallel step must be positive, got {ds}"
        )));
    }
    if steps == 0 {
        return Err(Error::InvalidInput(
            "autoparallel needs at least one step".into(),
        ));
    }
    let mut state = State {
        x: x0,
        u: u0,
        v: v0,
    };
    let norm0 = metric_norm(metric, state.x, state.u, 0.0)?;
    let mut out = Geodesic4 {
        s: Vec::with_capacity(steps + 1),
        x: Vec::with_capacity(steps + 1),
        u: Vec::with_capacity(steps + 1),
        carried: Vec::with_capacity(steps + 1),
        norm_drift: 0.0,
    };
    out.s.push(0.0);
    out.x.push(state.x);
    out.u.push(state.u);
    out.carried.push(state.v);
    for step in 0..steps {
        let s = step as f64 * ds;
        let k1 = derivative(conn, &state, s)?;
        let k2 = derivative(conn, &advance(&state, &k1, 0.5 * ds), s)?;
        let k3 = derivative(conn, &advance(&state, &k2, 0.5 * ds), s)?;
        let k4 = derivative(conn, &advance(&state, &k3, ds), s)?;
        let mut next = state;
        for a in 0..4 {
            next.x[a] += ds / 6.0 * (k1.x[a] + 2.0 * k2.x[a] + 2.0 * k3.x[a] + k4.x[a]);
            next.u[a] += ds / 6.0 * (k1.u[a] + 2.0 * k2.u[a] + 2.0 * k3.u[a] + k4.u[a]);
            next.v[a] += ds / 6.0 * (k1.v[a] + 2.0 * k2.v[a] + 2.0 * k3.v[a] + k4.v[a]);
        }
        let s_next = (step + 1) as f64 * ds;
        let norm = metric_norm(metric, next.x, next.u, s_next)?;
        out.norm_drift = out.norm_drift.max((norm - norm0).abs());
        out.s.push(s_next);
        out.x.push(next.x);
        out.u.push(next.u);
        out.carried.push(next.v);
        state = next;
    }
    Ok(out)
}

/// Closed-form autoparallel of the uniformly rotating frame (no rim boost)
/// with rotation rate `omega`: returns `(x(s), u(s))`.
///
/// The time component of the four-velocity is conserved, and the transverse
/// velocity turns backwards at rate `omega * u0[0]`:
///
/// ```text
/// u_perp(s) = Rz(-omega u0t s) u_perp(0)
/// x_perp(s) = x_perp(0) + integral of u_perp
/// ```
pub fn rotating_autoparallel_oracle(
    omega: f64,
    x0: [f64; 4],
    u0: [f64; 4],
    s: f64,
) -> ([f64; 4], [f64; 4]) {
    let a = omega * u0[0];
    let (sin, cos) = (a * s).sin_cos();
    let u = [
        u0[0],
        cos * u0[1] + sin * u0[2],
        -sin * u0[1] + cos * u0[2],
        u0[3],
    ];
    let x = if a.abs() < 1e-300 {
        [
            x0[0] + u0[0] * s,
            x0[1] + u0[1] * s,
            x0[2] + u0[2] * s,
            x0[3] + u0[3] * s,
        ]
    } else {
        // Antiderivatives of the rotating velocity components above.
        [
            x0[0] + u0[0] * s,
            x0[1] + (sin * u0[1] + (1.0 - cos) * u0[2]) / a,
            x0[2] + (-(1.0 - cos) * u0[1] + sin * u0[2]) / a,
            x0[3] + u0[3] * s,
        ]
    };
    (x, u)
}

/// Rotates the spatial part of a carried vector the way the rotating-frame
/// transport does over parameter length `s`.
pub fn rotating_carried_oracle(omega: f64, u0t: f64, v0: [f64; 4], s: f64) -> [f64; 4] {
    let (sin, cos) = (omega * u0t * s).sin_cos();
    [
        v0[0],
        cos * v0[1] + sin * v0[2],
        -sin * v0[1] + cos * v0[2],
        v0[3],
    ]
}

/// Four-velocity with unit coordinate-speed normalization `gamma (1, v)` for
/// a spatial velocity `v` in units of the light speed.
pub fn four_velocity(v: [f64; 3]) -> Result<[f64; 4]> {
    let speed2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    if !(speed2 < 1.0) {
        return Err(Error::InvalidInput(format!(
            "spatial speed must stay below the light speed, got |v|^2 = {speed2}"
        )));
    }
    let gamma = 1.0 / (1.0 - speed2).sqrt();
    Ok([gamma, gamma * v[0], gamma * v[1], gamma * v[2]])
}

/// Applies a constant 4x4 matrix to a four-vector.
pub fn apply4(m: &Mat4, v: [f64; 4]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i] += m[i][j] * v[j];
        }
    }
    out
}
