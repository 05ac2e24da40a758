use crate::error::{Error, Result};
use crate::grid::GridSpec;
use num_complex::Complex64;
use rayon::prelude::*;

/// Real scalar samples on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: GridSpec,
    pub data: Vec<f64>,
}

/// 3-vector samples on a [`GridSpec`]. Components are always 3 regardless of
/// the grid dimension (a 1D grid still carries full 3-vectors).
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub grid: GridSpec,
    pub data: Vec<[f64; 3]>,
}

/// Two-component complex (Pauli) spinor samples on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    pub grid: GridSpec,
    pub data: Vec<[Complex64; 2]>,
}

/// Per-point validity flags accompanying derived fields.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskField {
    pub grid: GridSpec,
    pub valid: Vec<bool>,
}

impl ScalarField {
    pub fn zeros(grid: &GridSpec) -> Self {
        Self {
            grid: grid.clone(),
            data: vec![0.0; grid.len()],
        }
    }

    /// Sample `f(position)` at every node (parallel map).
    pub fn from_fn(grid: &GridSpec, f: impl Fn([f64; 3]) -> f64 + Sync) -> Self {
        let data = (0..grid.len())
            .into_par_iter()
            .map(|i| f(grid.position(i)))
            .collect();
        Self {
            grid: grid.clone(),
            data,
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64 + Sync) -> Self {
        Self {
            grid: self.grid.clone(),
            data: self.data.par_iter().map(|&x| f(x)).collect(),
        }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64 + Sync) -> Result<Self> {
        self.grid.check_same(&other.grid, "scalar zip")?;
        Ok(Self {
            grid: self.grid.clone(),
            data: self
                .data
                .par_iter()
                .zip(other.data.par_iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
    }

    pub fn max(&self) -> f64 {
        self.data.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x))
    }

    /// Root-mean-square over points selected by `mask` (all points if `None`).
    /// Returns 0 when no point is selected.
    pub fn rms(&self, mask: Option<&MaskField>) -> f64 {
        let mut sum = 0.0;
        let mut n = 0usize;
        for (i, &x) in self.data.iter().enumerate() {
            if mask.map_or(true, |m| m.valid[i]) {
                sum += x * x;
                n += 1;
            }
        }
        if n == 0 {
            0.0
        } else {
            (sum / n as f64).sqrt()
        }
    }

    /// Max |value| over points selected by `mask`.
    pub fn max_abs_masked(&self, mask: Option<&MaskField>) -> f64 {
        let mut m = 0.0f64;
        for (i, &x) in self.data.iter().enumerate() {
            if mask.map_or(true, |msk| msk.valid[i]) {
                m = m.max(x.abs());
            }
        }
        m
    }

    /// Integral over the box: sum * cell volume.
    pub fn integral(&self) -> f64 {
        self.data.iter().sum::<f64>() * self.grid.cell_volume()
    }
}

impl VectorField {
    pub fn zeros(grid: &GridSpec) -> Self {
        Self {
            grid: grid.clone(),
            data: vec![[0.0; 3]; grid.len()],
        }
    }

    pub fn from_fn(grid: &GridSpec, f: impl Fn([f64; 3]) -> [f64; 3] + Sync) -> Self {
        let data = (0..grid.len())
            .into_par_iter()
            .map(|i| f(grid.position(i)))
            .collect();
        Self {
            grid: grid.clone(),
            data,
        }
    }

    pub fn component(&self, c: usize) -> ScalarField {
        ScalarField {
            grid: self.grid.clone(),
            data: self.data.iter().map(|v| v[c]).collect(),
        }
    }

    pub fn from_components(x: &ScalarField, y: &ScalarField, z: &ScalarField) -> Result<Self> {
        x.grid.check_same(&y.grid, "vector components")?;
        x.grid.check_same(&z.grid, "vector components")?;
        Ok(Self {
            grid: x.grid.clone(),
            data: (0..x.data.len())
                .map(|i| [x.data[i], y.data[i], z.data[i]])
                .collect(),
        })
    }

    pub fn map(&self, f: impl Fn([f64; 3]) -> [f64; 3] + Sync) -> Self {
        Self {
            grid: self.grid.clone(),
            data: self.data.par_iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(
        &self,
        other: &Self,
        f: impl Fn([f64; 3], [f64; 3]) -> [f64; 3] + Sync,
    ) -> Result<Self> {
        self.grid.check_same(&other.grid, "vector zip")?;
        Ok(Self {
            grid: self.grid.clone(),
            data: self
                .data
                .par_iter()
                .zip(other.data.par_iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> ScalarField {
        ScalarField {
            grid: self.grid.clone(),
            data: self.data.iter().map(|v| vec3::norm(*v)).collect(),
        }
    }

    /// RMS of the pointwise magnitude over `mask`.
    pub fn rms(&self, mask: Option<&MaskField>) -> f64 {
        let mut sum = 0.0;
        let mut n = 0usize;
        for (i, v) in self.data.iter().enumerate() {
            if mask.map_or(true, |m| m.valid[i]) {
                sum += vec3::dot(*v, *v);
                n += 1;
            }
        }
        if n == 0 {
            0.0
        } else {
            (sum / n as f64).sqrt()
        }
    }

    /// Max pointwise magnitude over `mask`.
    pub fn max_magnitude(&self, mask: Option<&MaskField>) -> f64 {
        let mut m = 0.0f64;
        for (i, v) in self.data.iter().enumerate() {
            if mask.map_or(true, |msk| msk.valid[i]) {
                m = m.max(vec3::norm(*v));
            }
        }
        m
    }

    /// Pointwise difference, as a new field.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| [a[0] - b[0], a[1] - b[1], a[2] - b[2]])
    }
}

impl SpinorField {
    pub fn from_fn(grid: &GridSpec, f: impl Fn([f64; 3]) -> [Complex64; 2] + Sync) -> Self {
        let data = (0..grid.len())
            .into_par_iter()
            .map(|i| f(grid.position(i)))
            .collect();
        Self {
            grid: grid.clone(),
            data,
        }
    }

    /// One complex component as a flat vector (used by spectral transforms).
    pub fn component(&self, c: usize) -> Vec<Complex64> {
        self.data.iter().map(|s| s[c]).collect()
    }

    /// Total norm `integral of psi^dagger psi`.
    pub fn norm(&self) -> f64 {
        let sum: f64 = self
            .data
            .iter()
            .map(|s| s[0].norm_sqr() + s[1].norm_sqr())
            .sum();
        sum * self.grid.cell_volume()
    }

    /// Multiply every sample by `c`.
    pub fn scale(&mut self, c: Complex64) {
        self.data.par_iter_mut().for_each(|s| {
            s[0] *= c;
            s[1] *= c;
        });
    }

    /// Rescale so that [`SpinorField::norm`] is 1.
    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.scale(Complex64::new(1.0 / n.sqrt(), 0.0));
        }
    }

    /// Hermitian inner product `integral psi^dagger phi dV` (sequential sum,
    /// deterministic).
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.grid.check_same(&other.grid, "spinor inner product")?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, b) in self.data.iter().zip(other.data.iter()) {
            acc += a[0].conj() * b[0] + a[1].conj() * b[1];
        }
        Ok(acc * self.grid.cell_volume())
    }

    /// True when every sample is finite.
    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|s| s[0].re.is_finite() && s[0].im.is_finite() && s[1].re.is_finite() && s[1].im.is_finite())
    }

    /// Max pointwise component difference against another spinor field.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.grid.check_same(&other.grid, "spinor diff")?;
        Ok(self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a[0] - b[0]).norm().max((a[1] - b[1]).norm()))
            .fold(0.0f64, f64::max))
    }
}

impl MaskField {
    pub fn all_valid(grid: &GridSpec) -> Self {
        Self {
            grid: grid.clone(),
            valid: vec![true; grid.len()],
        }
    }

    pub fn from_fn(grid: &GridSpec, f: impl Fn([f64; 3]) -> bool + Sync) -> Self {
        let valid = (0..grid.len())
            .into_par_iter()
            .map(|i| f(grid.position(i)))
            .collect();
        Self {
            grid: grid.clone(),
            valid,
        }
    }

    /// Threshold mask: valid where `rho >= eps * max(rho)`.
    pub fn from_density(rho: &ScalarField, relative_floor: f64) -> Self {
        let floor = relative_floor * rho.max_abs();
        Self {
            grid: rho.grid.clone(),
            valid: rho.data.iter().map(|&r| r >= floor).collect(),
        }
    }

    /// Pointwise AND.
    pub fn and(&self, other: &Self) -> Result<Self> {
        self.grid.check_same(&other.grid, "mask and")?;
        Ok(Self {
            grid: self.grid.clone(),
            valid: self
                .valid
                .iter()
                .zip(other.valid.iter())
                .map(|(&a, &b)| a && b)
                .collect(),
        })
    }

    /// Shrink the valid region: a point stays valid only if all periodic
    /// neighbors within `radius` steps along every active axis are valid.
    /// Derived fields built from stencils of that radius use this.
    pub fn erode(&self, radius: usize) -> Self {
        let mut valid = self.valid.clone();
        for _ in 0..radius {
            let prev = valid.clone();
            for flat in 0..self.grid.len() {
                if !prev[flat] {
                    continue;
                }
                let mut ok = true;
                'axes: for axis in 0..self.grid.dims() {
                    for step in [-1isize, 1] {
                        if !prev[self.grid.neighbor(flat, axis, step)] {
                            ok = false;
                            break 'axes;
                        }
                    }
                }
                valid[flat] = ok;
            }
        }
        Self {
            grid: self.grid.clone(),
            valid,
        }
    }

    pub fn count_valid(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    pub fn fraction_valid(&self) -> f64 {
        self.count_valid() as f64 / self.valid.len() as f64
    }

    /// Error if no point is valid.
    pub fn require_nonempty(&self, what: &str) -> Result<()> {
        if self.count_valid() == 0 {
            Err(Error::InvalidInput(format!("{what}: mask has no valid points")))
        } else {
            Ok(())
        }
    }
}

/// Small fixed-size 3-vector helpers shared across modules.
pub mod vec3 {
    #[inline]
    pub fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    }

    #[inline]
    pub fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    }

    #[inline]
    pub fn norm(a: [f64; 3]) -> f64 {
        dot(a, a).sqrt()
    }

    #[inline]
    pub fn scale(a: [f64; 3], c: f64) -> [f64; 3] {
        [a[0] * c, a[1] * c, a[2] * c]
    }

    #[inline]
    pub fn add(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
        [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
    }

    #[inline]
    pub fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
        [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
    }

    /// Unit vector, or `None` when shorter than `floor`.
    pub fn unit(a: [f64; 3], floor: f64) -> Option<[f64; 3]> {
        let n = norm(a);
        if n <= floor {
            None
        } else {
            Some(scale(a, 1.0 / n))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid1d(n: usize) -> GridSpec {
        GridSpec::new(1, &[1.0], &[n]).unwrap()
    }

    #[test]
    fn scalar_from_fn_and_integral() {
        let g = grid1d(16);
        let f = ScalarField::from_fn(&g, |_| 2.0);
        assert!((f.integral() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn zip_rejects_grid_mismatch() {
        let a = ScalarField::zeros(&grid1d(16));
        let b = ScalarField::zeros(&grid1d(32));
        assert!(a.zip_with(&b, |x, y| x + y).is_err());
    }

    #[test]
    fn mask_erode_shrinks_by_radius() {
        let g = grid1d(16);
        let mut m = MaskField::all_valid(&g);
        m.valid[5] = false;
        let e = m.erode(1);
        assert!(!e.valid[4] && !e.valid[5] && !e.valid[6]);
        assert!(e.valid[3] && e.valid[7]);
        assert_eq!(e.count_valid(), 13);
    }

    #[test]
    fn spinor_norm_and_normalize() {
        let g = grid1d(8);
        let mut psi = SpinorField::from_fn(&g, |_| {
            [Complex64::new(3.0, 0.0), Complex64::new(0.0, 4.0)]
        });
        assert!((psi.norm() - 25.0).abs() < 1e-12);
        psi.normalize();
        assert!((psi.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn vec3_cross_is_right_handed() {
        let z = vec3::cross([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        assert_eq!(z, [0.0, 0.0, 1.0]);
    }
}
