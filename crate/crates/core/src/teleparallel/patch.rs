//! Bounded, non-periodic 4D sampling patches and dense tensor fields on them.
//!
//! Axis order is `[t, x, y, z]` with `x^0 = c t`. Nodes are vertex-centered:
//! `position = origin + index * spacing`, with `spacing = extent / (points-1)`
//! on active axes. An axis with a single node is collapsed: fields are
//! constant along it and derivatives along it vanish. Patches are bounded, so
//! finite-difference results are only trusted on interior nodes; consumers
//! state how many boundary layers they need via an explicit margin.

use crate::error::{Error, Result};

/// Boundary layers consumed by the curvature pipeline (two nested first
/// derivatives). Norms and defects are evaluated on nodes at least this far
/// from every active-axis boundary.
pub const PATCH_INTERIOR_MARGIN: usize = 2;

/// Minimum node count along an active axis; keeps a usable interior after
/// shedding `PATCH_INTERIOR_MARGIN` layers on each side.
pub const MIN_ACTIVE_POINTS: usize = 8;

/// Vertex-centered rectangular patch of 4D spacetime.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch4D {
    origin: [f64; 4],
    points: [usize; 4],
    spacing: [f64; 4],
}

impl Patch4D {
    /// Builds a patch from its lower corner, edge lengths, and node counts.
    ///
    /// Axes with `points == 1` are collapsed and must have zero extent;
    /// active axes need at least [`MIN_ACTIVE_POINTS`] nodes and positive
    /// extent. At least one axis must be active.
    pub fn new(origin: [f64; 4], extents: [f64; 4], points: [usize; 4]) -> Result<Self> {
        let mut spacing = [1.0; 4];
        let mut active = 0;
        for axis in 0..4 {
            if !origin[axis].is_finite() || !extents[axis].is_finite() {
                return Err(Error::InvalidGrid(format!(
                    "patch axis {axis} has non-finite origin or extent"
                )));
            }
            if points[axis] == 1 {
                if extents[axis] != 0.0 {
                    return Err(Error::InvalidGrid(format!(
                        "collapsed patch axis {axis} must have zero extent, got {}",
                        extents[axis]
                    )));
                }
            } else {
                if points[axis] < MIN_ACTIVE_POINTS {
                    return Err(Error::InvalidGrid(format!(
                        "active patch axis {axis} needs at least {MIN_ACTIVE_POINTS} nodes, \
                         got {}",
                        points[axis]
                    )));
                }
                if extents[axis] <= 0.0 {
                    return Err(Error::InvalidGrid(format!(
                        "active patch axis {axis} needs positive extent, got {}",
                        extents[axis]
                    )));
                }
                spacing[axis] = extents[axis] / (points[axis] - 1) as f64;
                active += 1;
            }
        }
        if active == 0 {
            return Err(Error::InvalidGrid(
                "patch needs at least one active axis".into(),
            ));
        }
        Ok(Self {
            origin,
            points,
            spacing,
        })
    }

    pub fn origin(&self) -> [f64; 4] {
        self.origin
    }

    pub fn points(&self) -> [usize; 4] {
        self.points
    }

    pub fn spacing(&self) -> [f64; 4] {
        self.spacing
    }

    /// Total number of nodes.
    pub fn len(&self) -> usize {
        self.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_active(&self, axis: usize) -> bool {
        self.points[axis] > 1
    }

    /// Smallest spacing among active axes.
    pub fn min_spacing(&self) -> f64 {
        (0..4)
            .filter(|&a| self.is_active(a))
            .map(|a| self.spacing[a])
            .fold(f64::INFINITY, f64::min)
    }

    /// Flattened index of a node, row-major with axis 3 fastest.
    pub fn idx(&self, coords: [usize; 4]) -> usize {
        debug_assert!((0..4).all(|a| coords[a] < self.points[a]));
        ((coords[0] * self.points[1] + coords[1]) * self.points[2] + coords[2]) * self.points[3]
            + coords[3]
    }

    /// Inverse of [`Self::idx`].
    pub fn coords(&self, flat: usize) -> [usize; 4] {
        let mut rest = flat;
        let mut out = [0usize; 4];
        for axis in (0..4).rev() {
            out[axis] = rest % self.points[axis];
            rest /= self.points[axis];
        }
        out
    }

    /// Physical position of a node.
    pub fn position(&self, flat: usize) -> [f64; 4] {
        let c = self.coords(flat);
        let mut out = [0.0; 4];
        for axis in 0..4 {
            out[axis] = self.origin[axis] + c[axis] as f64 * self.spacing[axis];
        }
        out
    }

    /// Neighbor of `flat` shifted by `step` nodes along `axis`, or `None` if
    /// that would leave the patch.
    pub fn offset(&self, flat: usize, axis: usize, step: isize) -> Option<usize> {
        let c = self.coords(flat);
        let moved = c[axis] as isize + step;
        if moved < 0 || moved >= self.points[axis] as isize {
            return None;
        }
        let mut c2 = c;
        c2[axis] = moved as usize;
        Some(self.idx(c2))
    }

    /// Whether a node sits at least `margin` layers from every active-axis
    /// boundary.
    pub fn is_interior(&self, flat: usize, margin: usize) -> bool {
        let c = self.coords(flat);
        (0..4).all(|axis| {
            if !self.is_active(axis) {
                return true;
            }
            c[axis] >= margin && c[axis] + margin < self.points[axis]
        })
    }

    /// Flat indices of all nodes that satisfy [`Self::is_interior`].
    pub fn interior_indices(&self, margin: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|&p| self.is_interior(p, margin))
            .collect()
    }

    /// Multilinear sampling stencil for an off-node position: per axis, the
    /// lower node index and the interpolation fraction. Mandates that every
    /// support node is at least `margin` layers inside the patch; collapsed
    /// axes require the coordinate to match the single node's position.
    fn stencil(&self, x: [f64; 4], margin: usize) -> Option<[(usize, f64); 4]> {
        let mut out = [(0usize, 0.0f64); 4];
        for axis in 0..4 {
            if !x[axis].is_finite() {
                return None;
            }
            let rel = (x[axis] - self.origin[axis]) / self.spacing[axis];
            if !self.is_active(axis) {
                if rel.abs() > 1e-9 {
                    return None;
                }
                out[axis] = (0, 0.0);
                continue;
            }
            let lo = rel.floor();
            let frac = rel - lo;
            let lo = lo as isize;
            let hi = lo + 1;
            let last = (self.points[axis] - 1) as isize;
            if lo < margin as isize || hi > last - margin as isize {
                return None;
            }
            out[axis] = (lo as usize, frac);
        }
        Some(out)
    }
}

/// Dense rank-2 tensor field `data[p][alpha][beta]` on a patch.
#[derive(Debug, Clone)]
pub struct Tensor2Field4 {
    pub patch: Patch4D,
    pub data: Vec<[[f64; 4]; 4]>,
}

impl Tensor2Field4 {
    pub fn zeros(patch: &Patch4D) -> Self {
        Self {
            patch: patch.clone(),
            data: vec![[[0.0; 4]; 4]; patch.len()],
        }
    }

    /// Multilinear sample at an arbitrary position, trusting only nodes at
    /// least `margin` layers inside the patch.
    pub fn sample(&self, x: [f64; 4], margin: usize) -> Option<[[f64; 4]; 4]> {
        let stencil = self.patch.stencil(x, margin)?;
        let mut out = [[0.0; 4]; 4];
        accumulate_corners(&self.patch, &stencil, |flat, w| {
            let v = &self.data[flat];
            for a in 0..4 {
                for b in 0..4 {
                    out[a][b] += w * v[a][b];
                }
            }
        });
        Some(out)
    }
}

/// Dense rank-3 tensor field `data[p][alpha][beta][gamma]` on a patch. For
/// connection-like objects the convention is: `alpha` the upper index, `beta`
/// the transported lower index, `gamma` the derivative index.
#[derive(Debug, Clone)]
pub struct Tensor3Field4 {
    pub patch: Patch4D,
    pub data: Vec<[[[f64; 4]; 4]; 4]>,
}

impl Tensor3Field4 {
    pub fn zeros(patch: &Patch4D) -> Self {
        Self {
            patch: patch.clone(),
            data: vec![[[[0.0; 4]; 4]; 4]; patch.len()],
        }
    }

    /// Largest absolute component over interior nodes.
    pub fn max_abs_interior(&self, margin: usize) -> f64 {
        let mut best = 0.0f64;
        for p in 0..self.patch.len() {
            if !self.patch.is_interior(p, margin) {
                continue;
            }
            for a in 0..4 {
                for b in 0..4 {
                    for c in 0..4 {
                        best = best.max(self.data[p][a][b][c].abs());
                    }
                }
            }
        }
        best
    }

    /// Multilinear sample at an arbitrary position, trusting only nodes at
    /// least `margin` layers inside the patch.
    pub fn sample(&self, x: [f64; 4], margin: usize) -> Option<[[[f64; 4]; 4]; 4]> {
        let stencil = self.patch.stencil(x, margin)?;
        let mut out = [[[0.0; 4]; 4]; 4];
        accumulate_corners(&self.patch, &stencil, |flat, w| {
            let v = &self.data[flat];
            for a in 0..4 {
                for b in 0..4 {
                    for c in 0..4 {
                        out[a][b][c] += w * v[a][b][c];
                    }
                }
            }
        });
        Some(out)
    }
}

/// Visits the (up to 16) corner nodes of a multilinear stencil with their
/// tensor-product weights. Collapsed axes contribute a single tap.
fn accumulate_corners(
    patch: &Patch4D,
    stencil: &[(usize, f64); 4],
    mut visit: impl FnMut(usize, f64),
) {
    let taps: Vec<Vec<(usize, f64)>> = (0..4)
        .map(|axis| {
            let (lo, frac) = stencil[axis];
            if !patch.is_active(axis) {
                vec![(0usize, 1.0)]
            } else if frac == 0.0 {
                vec![(lo, 1.0)]
            } else {
                vec![(lo, 1.0 - frac), (lo + 1, frac)]
            }
        })
        .collect();
    for &(i0, w0) in &taps[0] {
        for &(i1, w1) in &taps[1] {
            for &(i2, w2) in &taps[2] {
                for &(i3, w3) in &taps[3] {
                    let flat = patch.idx([i0, i1, i2, i3]);
                    visit(flat, w0 * w1 * w2 * w3);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_patch() -> Patch4D {
        Patch4D::new(
            [0.0, -1.0, -1.0, 0.0],
            [2.0, 2.0, 2.0, 0.0],
            [9, 9, 9, 1],
        )
        .unwrap()
    }

    /// Centered derivative of a per-node scalar accessor along one axis;
    /// zero on collapsed axes.
    fn diff_at(patch: &Patch4D, flat: usize, axis: usize, get: impl Fn(usize) -> f64) -> f64 {
        if !patch.is_active(axis) {
            return 0.0;
        }
        let plus = patch.offset(flat, axis, 1).expect("boundary node");
        let minus = patch.offset(flat, axis, -1).expect("boundary node");
        (get(plus) - get(minus)) / (2.0 * patch.spacing()[axis])
    }

    #[test]
    fn index_and_coords_roundtrip() {
        let patch = sample_patch();
        for flat in [0, 1, 17, 500, patch.len() - 1] {
            assert_eq!(patch.idx(patch.coords(flat)), flat);
        }
    }

    #[test]
    fn positions_span_origin_to_far_corner() {
        let patch = sample_patch();
        assert_eq!(patch.position(0), [0.0, -1.0, -1.0, 0.0]);
        let far = patch.position(patch.len() - 1);
        assert!((far[0] - 2.0).abs() < 1e-12);
        assert!((far[1] - 1.0).abs() < 1e-12);
        assert!((far[2] - 1.0).abs() < 1e-12);
        assert_eq!(far[3], 0.0);
        assert!((patch.spacing()[0] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn offsets_stop_at_boundaries() {
        let patch = sample_patch();
        let first = 0;
        assert!(patch.offset(first, 0, -1).is_none());
        let neighbor = patch.offset(first, 0, 1).unwrap();
        assert_eq!(patch.coords(neighbor)[0], 1);
        // Collapsed axis has no neighbors in either direction.
        assert!(patch.offset(first, 3, 1).is_none());
        assert!(patch.offset(first, 3, -1).is_none());
    }

    #[test]
    fn interior_margin_excludes_boundary_layers() {
        let patch = sample_patch();
        let corner = patch.idx([1, 1, 1, 0]);
        assert!(patch.is_interior(corner, 1));
        assert!(!patch.is_interior(corner, 2));
        let middle = patch.idx([4, 4, 4, 0]);
        assert!(patch.is_interior(middle, 2));
        let count = patch.interior_indices(2).len();
        assert_eq!(count, 5 * 5 * 5);
    }

    #[test]
    fn collapsed_axis_rejects_wrong_extent() {
        let err = Patch4D::new([0.0; 4], [1.0, 1.0, 1.0, 0.5], [9, 9, 9, 1]);
        assert!(err.is_err());
        let err = Patch4D::new([0.0; 4], [0.0; 4], [1, 1, 1, 1]);
        assert!(err.is_err());
    }

    #[test]
    fn multilinear_sampling_reproduces_linear_fields() {
        let patch = sample_patch();
        let mut field = Tensor2Field4::zeros(&patch);
        for p in 0..patch.len() {
            let x = patch.position(p);
            field.data[p][0][1] = 3.0 * x[0] - 2.0 * x[1] + 0.5 * x[2] + 1.0;
        }
        let probe = [0.9, -0.3, 0.45, 0.0];
        let got = field.sample(probe, 1).unwrap()[0][1];
        let want = 3.0 * probe[0] - 2.0 * probe[1] + 0.5 * probe[2] + 1.0;
        assert!((got - want).abs() < 1e-12, "got {got}, want {want}");
    }

    #[test]
    fn sampling_respects_margin_and_bounds() {
        let patch = sample_patch();
        let field = Tensor3Field4::zeros(&patch);
        // Outside the patch entirely.
        assert!(field.sample([5.0, 0.0, 0.0, 0.0], 1).is_none());
        // Inside the patch but within the distrusted margin.
        assert!(field.sample([0.1, 0.0, 0.0, 0.0], 1).is_none());
        // Off the collapsed axis.
        assert!(field.sample([1.0, 0.0, 0.0, 0.3], 1).is_none());
        // Valid interior position.
        assert!(field.sample([1.0, 0.0, 0.0, 0.0], 1).is_some());
    }

    #[test]
    fn diff_at_matches_linear_slope() {
        let patch = sample_patch();
        let values: Vec<f64> = (0..patch.len())
            .map(|p| {
                let x = patch.position(p);
                2.0 * x[0] - 0.5 * x[1]
            })
            .collect();
        let node = patch.idx([4, 4, 4, 0]);
        let d0 = diff_at(&patch, node, 0, |p| values[p]);
        let d1 = diff_at(&patch, node, 1, |p| values[p]);
        let d3 = diff_at(&patch, node, 3, |p| values[p]);
        assert!((d0 - 2.0).abs() < 1e-12);
        assert!((d1 + 0.5).abs() < 1e-12);
        assert_eq!(d3, 0.0);
    }
}
