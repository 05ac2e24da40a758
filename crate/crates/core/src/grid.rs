use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Uniform periodic grid in 1–3 spatial dimensions.
///
/// Internally every grid is handled as a 3D array `(n[0], n[1], n[2])` in
/// row-major order (axis 0 outermost); axes beyond `dims` collapse to a single
/// point. A central difference along a collapsed axis wraps onto the same
/// point and is therefore exactly zero, so field operators never need to
/// special-case the dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dims: usize,
    extents: [f64; 3],
    points: [usize; 3],
}

/// Minimum number of points per active axis (stencils plus at least one
/// resolved wavelength need this much room).
pub const MIN_POINTS: usize = 8;

impl GridSpec {
    /// New grid; `extents`/`points` must have `dims` entries (1..=3), each
    /// extent positive and each axis at least [`MIN_POINTS`] points.
    pub fn new(dims: usize, extents: &[f64], points: &[usize]) -> Result<Self> {
        if !(1..=3).contains(&dims) {
            return Err(Error::InvalidGrid(format!("dims must be 1..=3, got {dims}")));
        }
        if extents.len() != dims || points.len() != dims {
            return Err(Error::InvalidGrid(format!(
                "expected {dims} extents and point counts, got {} and {}",
                extents.len(),
                points.len()
            )));
        }
        let mut ext = [1.0; 3];
        let mut pts = [1usize; 3];
        for a in 0..dims {
            if !extents[a].is_finite() || extents[a] <= 0.0 {
                return Err(Error::InvalidGrid(format!(
                    "extent along axis {a} must be positive and finite, got {}",
                    extents[a]
                )));
            }
            if points[a] < MIN_POINTS {
                return Err(Error::InvalidGrid(format!(
                    "axis {a} has {} points, need at least {MIN_POINTS}",
                    points[a]
                )));
            }
            ext[a] = extents[a];
            pts[a] = points[a];
        }
        Ok(Self {
            dims,
            extents: ext,
            points: pts,
        })
    }

    /// Cubic grid: `n` points per axis over a box of side `length`.
    pub fn cubic(dims: usize, length: f64, n: usize) -> Result<Self> {
        let ext = vec![length; dims];
        let pts = vec![n; dims];
        Self::new(dims, &ext, &pts)
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Extents padded to 3 entries (collapsed axes report 1.0).
    pub fn extents(&self) -> [f64; 3] {
        self.extents
    }

    /// Point counts padded to 3 entries (collapsed axes report 1).
    pub fn points(&self) -> [usize; 3] {
        self.points
    }

    /// Extents of the active axes only.
    pub fn active_extents(&self) -> Vec<f64> {
        self.extents[..self.dims].to_vec()
    }

    /// Point counts of the active axes only.
    pub fn active_points(&self) -> Vec<usize> {
        self.points[..self.dims].to_vec()
    }

    /// Grid spacing per axis; collapsed axes report 1.0 (never used, since
    /// differences along them vanish identically).
    pub fn spacing(&self) -> [f64; 3] {
        let mut h = [1.0; 3];
        for a in 0..self.dims {
            h[a] = self.extents[a] / self.points[a] as f64;
        }
        h
    }

    /// Smallest active spacing: the `dx` used in stability guards and
    /// convergence plots.
    pub fn min_spacing(&self) -> f64 {
        let h = self.spacing();
        h[..self.dims].iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Total number of points.
    pub fn len(&self) -> usize {
        self.points[0] * self.points[1] * self.points[2]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Cell volume `dx * dy * dz` over the active axes.
    pub fn cell_volume(&self) -> f64 {
        let h = self.spacing();
        h[..self.dims].iter().product()
    }

    /// Flat index of `(i, j, k)` (already in range).
    #[inline]
    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.points[1] + j) * self.points[2] + k
    }

    /// Inverse of [`GridSpec::idx`].
    #[inline]
    pub fn coords(&self, flat: usize) -> [usize; 3] {
        let k = flat % self.points[2];
        let rest = flat / self.points[2];
        let j = rest % self.points[1];
        let i = rest / self.points[1];
        [i, j, k]
    }

    /// Flat index of the periodic neighbor `step` points away along `axis`.
    #[inline]
    pub fn neighbor(&self, flat: usize, axis: usize, step: isize) -> usize {
        let mut c = self.coords(flat);
        let n = self.points[axis] as isize;
        c[axis] = (((c[axis] as isize + step) % n) + n) as usize % self.points[axis];
        self.idx(c[0], c[1], c[2])
    }

    /// Physical position of a node.
    pub fn position(&self, flat: usize) -> [f64; 3] {
        let c = self.coords(flat);
        let h = self.spacing();
        [
            c[0] as f64 * h[0],
            c[1] as f64 * h[1],
            c[2] as f64 * h[2],
        ]
    }

    /// True if the two grids have identical layout.
    pub fn same_layout(&self, other: &GridSpec) -> bool {
        self == other
    }

    /// Error unless layouts match (used as a precondition by field algebra).
    pub fn check_same(&self, other: &GridSpec, what: &str) -> Result<()> {
        if self.same_layout(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{what}: {:?}/{:?} vs {:?}/{:?}",
                self.active_points(),
                self.active_extents(),
                other.active_points(),
                other.active_extents()
            )))
        }
    }
}
