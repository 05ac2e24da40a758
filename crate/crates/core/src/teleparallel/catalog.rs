//! Tetrad fields on 4D patches and a catalog of reference frames with known
//! analytic behavior: constant frames, uniformly rotating frames (with or
//! without the local velocity boost), and a plane-symmetric wave frame.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::frames::{identity4, lorentz_boost, metric_preservation_defect, mul4, rotation_z, rotation_zxz, Mat4};
use super::patch::Patch4D;
use crate::error::{Error, Result};

/// Fraction of the light speed that rotating-frame rim velocities must stay
/// below everywhere on the patch.
pub const MAX_RIM_SPEED: f64 = 0.95;

/// Default parameters for catalog members built by [`TetradKind::build`].
pub const DEFAULT_OMEGA: f64 = 0.3;
pub const DEFAULT_BOOST: [f64; 3] = [0.24, -0.12, 0.32];
pub const DEFAULT_ANGLES: [f64; 3] = [0.7, 0.9, -0.4];
pub const DEFAULT_WAVE_EPS: f64 = 0.08;
pub const DEFAULT_WAVE_K: f64 = 2.0;

/// Frame field on a patch: per node, the leg components `e[b][beta]`
/// (frame index first) and the inverse components `inv[alpha][b]` satisfying
/// `sum_b inv[alpha][b] e[b][beta] = delta`.
#[derive(Debug, Clone)]
pub struct TetradField4 {
    pub patch: Patch4D,
    pub e: Vec<Mat4>,
    pub inv: Vec<Mat4>,
}

impl TetradField4 {
    /// Builds the field by evaluating `legs` at every node position and
    /// inverting pointwise. Fails if any node's legs are singular.
    pub fn from_fn(patch: &Patch4D, legs: impl Fn([f64; 4]) -> Mat4 + Sync) -> Result<Self> {
        let e: Vec<Mat4> = (0..patch.len())
            .into_par_iter()
            .map(|p| legs(patch.position(p)))
            .collect();
        let inv: Vec<Option<Mat4>> = e.par_iter().map(invert4).collect();
        let mut resolved = Vec::with_capacity(inv.len());
        for (p, m) in inv.into_iter().enumerate() {
            match m {
                Some(m) => resolved.push(m),
                None => {
                    return Err(Error::InvalidInput(format!(
                        "tetrad legs are singular at node {p}"
                    )))
                }
            }
        }
        Ok(Self {
            patch: patch.clone(),
            e,
            inv: resolved,
        })
    }

    /// Largest absolute entry of `inv * e - identity` over all nodes.
    pub fn inversion_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for p in 0..self.patch.len() {
            for alpha in 0..4 {
                for beta in 0..4 {
                    let mut acc = 0.0;
                    for b in 0..4 {
                        acc += self.inv[p][alpha][b] * self.e[p][b][beta];
                    }
                    let want = if alpha == beta { 1.0 } else { 0.0 };
                    worst = worst.max((acc - want).abs());
                }
            }
        }
        worst
    }
}

/// Inverts a 4x4 matrix by Gauss-Jordan elimination with partial pivoting.
/// Returns `None` when a pivot degenerates.
fn invert4(m: &Mat4) -> Option<Mat4> {
    let mut a = *m;
    let mut inv = identity4();
    for col in 0..4 {
        let mut pivot = col;
        for row in col + 1..4 {
            if a[row][col].abs() > a[pivot][col].abs() {
                pivot = row;
            }
        }
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let scale = a[col][col];
        for j in 0..4 {
            a[col][j] /= scale;
            inv[col][j] /= scale;
        }
        for row in 0..4 {
            if row == col {
                continue;
            }
            let factor = a[row][col];
            if factor == 0.0 {
                continue;
            }
            for j in 0..4 {
                a[row][j] -= factor * a[col][j];
                inv[row][j] -= factor * inv[col][j];
            }
        }
    }
    Some(inv)
}

/// Frame whose legs equal the coordinate axes everywhere.
pub fn identity_frame(patch: &Patch4D) -> Result<TetradField4> {
    TetradField4::from_fn(patch, |_| identity4())
}

/// Frame with the same constant leg matrix at every node.
pub fn constant_frame(patch: &Patch4D, legs: &Mat4) -> Result<TetradField4> {
    let legs = *legs;
    TetradField4::from_fn(patch, move |_| legs)
}

/// Frame rotating uniformly about the z axis: at coordinate time `x0` the
/// legs are the coordinate axes turned by `omega * x0`.
///
/// With `with_boost` the angular motion is promoted to a local Lorentz frame:
/// each node's legs are additionally boosted by the rim velocity
/// `omega x (x, y, z)`, so the frame models observers riding the rotation.
/// Rim speeds must stay below [`MAX_RIM_SPEED`] over the whole patch.
pub fn rotating_frame(patch: &Patch4D, omega: f64, with_boost: bool) -> Result<TetradField4> {
    if !omega.is_finite() {
        return Err(Error::InvalidInput("rotation rate must be finite".into()));
    }
    let rim = max_rim_speed(patch, omega);
    if rim >= MAX_RIM_SPEED {
        return Err(Error::InvalidInput(format!(
            "rotating frame rim speed {rim:.3} exceeds the {MAX_RIM_SPEED} guard; \
             shrink the patch or the rotation rate"
        )));
    }
    TetradField4::from_fn(patch, move |x| {
        let turn = rotation_z(omega * x[0]);
        if !with_boost {
            return turn;
        }
        let beta = [-omega * x[2], omega * x[1], 0.0];
        let boost = lorentz_boost(beta).expect("rim speed already validated");
        mul4(&turn, &boost)
    })
}

fn max_rim_speed(patch: &Patch4D, omega: f64) -> f64 {
    let mut worst = 0.0f64;
    let points = patch.points();
    let origin = patch.origin();
    let spacing = patch.spacing();
    for &ix in &[0, points[1] - 1] {
        for &iy in &[0, points[2] - 1] {
            let x = origin[1] + ix as f64 * spacing[1];
            let y = origin[2] + iy as f64 * spacing[2];
            worst = worst.max(omega.abs() * (x * x + y * y).sqrt());
        }
    }
    worst
}

/// Plane-symmetric wave frame: two transverse legs are stretched in
/// opposition by a profile riding along z at unit speed,
/// `e^1_1 = 1 + eps sin(k (z - x0))` and `e^2_2 = 1 - eps sin(k (z - x0))`.
/// Unlike the rotating frames this produces a genuinely curved metric.
pub fn wave_frame(patch: &Patch4D, eps: f64, wavenumber: f64) -> Result<TetradField4> {
    if !(eps.is_finite() && eps.abs() < 0.5) {
        return Err(Error::InvalidInput(format!(
            "wave amplitude must satisfy |eps| < 0.5, got {eps}"
        )));
    }
    if !(wavenumber.is_finite() && wavenumber != 0.0) {
        return Err(Error::InvalidInput(
            "wave frame needs a finite nonzero wavenumber".into(),
        ));
    }
    TetradField4::from_fn(patch, move |x| {
        let s = eps * (wavenumber * (x[3] - x[0])).sin();
        let mut legs = identity4();
        legs[1][1] = 1.0 + s;
        legs[2][2] = 1.0 - s;
        legs
    })
}

/// A catalog member: the tetrad field plus reference values that tests and
/// reports compare against.
#[derive(Debug, Clone)]
pub struct TetradScenario4 {
    pub name: String,
    pub kind: TetradKind,
    pub tetrad: TetradField4,
    pub refs: BTreeMap<String, f64>,
}

/// Catalog of frame families with known analytic behavior.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TetradKind {
    /// Coordinate-axis legs; every derived quantity vanishes.
    Identity,
    /// Constant pure boost; derived quantities still vanish.
    Boost,
    /// Constant z-x-z rotation; derived quantities still vanish.
    Rotation,
    /// Uniform rotation about z, no local boost: constant frame connection,
    /// flat metric, constant torsion.
    Rotating,
    /// Uniform rotation with rim-velocity boosts: flat metric but
    /// position-dependent torsion.
    RotatingBoost,
    /// Opposed transverse stretching riding along z: curved metric.
    Wave,
}

impl TetradKind {
    pub const ALL: [TetradKind; 6] = [
        TetradKind::Identity,
        TetradKind::Boost,
        TetradKind::Rotation,
        TetradKind::Rotating,
        TetradKind::RotatingBoost,
        TetradKind::Wave,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TetradKind::Identity => "identity",
            TetradKind::Boost => "boost",
            TetradKind::Rotation => "rotation",
            TetradKind::Rotating => "rotating",
            TetradKind::RotatingBoost => "rotating_boost",
            TetradKind::Wave => "wave",
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
                    "unknown frame kind '{name}', expected one of {known:?}"
                ))
            })
    }

    /// A patch shaped for this member at `resolution` nodes per active axis,
    /// collapsing axes the member does not depend on.
    pub fn default_patch(&self, resolution: usize) -> Result<Patch4D> {
        let n = resolution;
        match self {
            TetradKind::Identity | TetradKind::Boost | TetradKind::Rotation => Patch4D::new(
                [0.0, 0.0, 0.0, 0.0],
                [1.0, 1.0, 1.0, 0.0],
                [n.max(8), 8, 8, 1],
            ),
            TetradKind::Rotating => Patch4D::new(
                [0.0, -2.0, -2.0, 0.0],
                [2.6, 4.0, 4.0, 0.0],
                [n, 8, 8, 1],
            ),
            TetradKind::RotatingBoost => Patch4D::new(
                [0.0, -1.0, -1.0, 0.0],
                [2.0, 2.0, 2.0, 0.0],
                [n, n, n, 1],
            ),
            TetradKind::Wave => {
                let period = std::f64::consts::TAU;
                Patch4D::new([0.0, 0.0, 0.0, 0.0], [period, 0.0, 0.0, period], [n, 1, 1, n])
            }
        }
    }

    /// Builds this member with its default parameters on its default patch.
    pub fn build(&self, resolution: usize) -> Result<TetradScenario4> {
        let patch = self.default_patch(resolution)?;
        let mut refs = BTreeMap::new();
        let tetrad = match self {
            TetradKind::Identity => identity_frame(&patch)?,
            TetradKind::Boost => {
                let b = DEFAULT_BOOST;
                refs.insert(
                    "speed".into(),
                    (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt(),
                );
                constant_frame(&patch, &lorentz_boost(b)?)?
            }
            TetradKind::Rotation => {
                let [phi, theta, chi] = DEFAULT_ANGLES;
                refs.insert("phi".into(), phi);
                refs.insert("theta".into(), theta);
                refs.insert("chi".into(), chi);
                constant_frame(&patch, &rotation_zxz(phi, theta, chi))?
            }
            TetradKind::Rotating => {
                refs.insert("omega".into(), DEFAULT_OMEGA);
                refs.insert("torsion_x_y0".into(), -DEFAULT_OMEGA);
                rotating_frame(&patch, DEFAULT_OMEGA, false)?
            }
            TetradKind::RotatingBoost => {
                refs.insert("omega".into(), DEFAULT_OMEGA);
                rotating_frame(&patch, DEFAULT_OMEGA, true)?
            }
            TetradKind::Wave => {
                refs.insert("eps".into(), DEFAULT_WAVE_EPS);
                refs.insert("wavenumber".into(), DEFAULT_WAVE_K);
                wave_frame(&patch, DEFAULT_WAVE_EPS, DEFAULT_WAVE_K)?
            }
        };
        Ok(TetradScenario4 {
            name: self.name().to_string(),
            kind: *self,
            tetrad,
            refs,
        })
    }
}

/// Largest deviation of the pointwise legs from a Lorentz transformation,
/// i.e. of `e^T diag(-+++) e` from `diag(-+++)`. Zero exactly when the metric
/// the frame induces is Minkowski.
pub fn max_lorentz_defect(tetrad: &TetradField4) -> f64 {
    let mut worst = 0.0f64;
    for legs in &tetrad.e {
        worst = worst.max(metric_preservation_defect(legs));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_frame_is_its_own_inverse() {
        let patch = TetradKind::Identity.default_patch(8).unwrap();
        let frame = identity_frame(&patch).unwrap();
        assert_eq!(frame.e[0], identity4());
        assert_eq!(frame.inv[0], identity4());
        assert!(frame.inversion_defect() < 1e-14);
    }

    #[test]
    fn rotating_frame_rejects_superluminal_rims() {
        let patch = TetradKind::Rotating.default_patch(16).unwrap();
        assert!(rotating_frame(&patch, 2.0, false).is_err());
        assert!(rotating_frame(&patch, DEFAULT_OMEGA, false).is_ok());
    }

    #[test]
    fn boosted_rotation_keeps_the_metric_flat() {
        let patch = TetradKind::RotatingBoost.default_patch(10).unwrap();
        let frame = rotating_frame(&patch, DEFAULT_OMEGA, true).unwrap();
        assert!(max_lorentz_defect(&frame) < 1e-12);
        assert!(frame.inversion_defect() < 1e-12);
    }

    #[test]
    fn wave_frame_matches_its_profile() {
        let patch = TetradKind::Wave.default_patch(16).unwrap();
        let frame = wave_frame(&patch, DEFAULT_WAVE_EPS, DEFAULT_WAVE_K).unwrap();
        let p = patch.idx([3, 0, 0, 7]);
        let x = patch.position(p);
        let s = DEFAULT_WAVE_EPS * (DEFAULT_WAVE_K * (x[3] - x[0])).sin();
        assert!((frame.e[p][1][1] - (1.0 + s)).abs() < 1e-14);
        assert!((frame.e[p][2][2] - (1.0 - s)).abs() < 1e-14);
        assert!(frame.inversion_defect() < 1e-12);
        // The stretch is opposed, not compensating: the metric is not flat.
        assert!(max_lorentz_defect(&frame) > 1e-3);
    }

    #[test]
    fn kind_names_roundtrip() {
        for kind in TetradKind::ALL {
            assert_eq!(TetradKind::from_name(kind.name()).unwrap(), kind);
        }
        assert!(TetradKind::from_name("nope").is_err());
    }

    #[test]
    fn all_members_build_at_modest_resolution() {
        for kind in TetradKind::ALL {
            let scenario = kind.build(12).unwrap();
            assert_eq!(scenario.name, kind.name());
            assert!(scenario.tetrad.inversion_defect() < 1e-10);
        }
    }
}
