//! Discretization substrate: periodic grids, centered finite differences,
//! slice quadrature and small dense matrices.
//!
//! Spatial slices are closed, so every direction is periodic. Centered
//! second-order differences together with the periodic trapezoid rule give an
//! exact discrete summation-by-parts identity, `integrate(partial_u(f)) = 0`,
//! which the conservation and gauge-invariance checks downstream rely on.

use nalgebra::DMatrix;
use std::ops::Deref;

use crate::error::{Error, Result};

/// Relative threshold below which a matrix determinant counts as degenerate.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

/// A uniform periodic grid over the spatial slice, plus the evolution step
/// associated with this discretization.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dims: Vec<usize>,
    spacing: Vec<f64>,
    dtau: f64,
}

impl Grid {
    pub fn new(dims: Vec<usize>, spacing: Vec<f64>, dtau: f64) -> Result<Self> {
        if dims.is_empty() || dims.len() > 2 {
            return Err(Error::ConfigValidation {
                field: "grid.dims".into(),
                reason: format!("spatial dimension must be 1 or 2, got {}", dims.len()),
            });
        }
        if dims.len() != spacing.len() {
            return Err(Error::ConfigValidation {
                field: "grid.spacing".into(),
                reason: "one spacing per direction required".into(),
            });
        }
        if dims.iter().any(|&n| n < 4) {
            return Err(Error::ConfigValidation {
                field: "grid.dims".into(),
                reason: "need at least 4 points per direction".into(),
            });
        }
        if spacing.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(Error::ConfigValidation {
                field: "grid.spacing".into(),
                reason: "spacings must be positive and finite".into(),
            });
        }
        if !(dtau > 0.0) || !dtau.is_finite() {
            return Err(Error::ConfigValidation {
                field: "dtau".into(),
                reason: format!("tau step must be positive, got {dtau}"),
            });
        }
        Ok(Grid { dims, spacing, dtau })
    }

    /// `n` points on the circle `[0, 2*pi)`.
    pub fn circle(n: usize, dtau: f64) -> Result<Self> {
        Grid::new(vec![n], vec![std::f64::consts::TAU / n as f64], dtau)
    }

    /// `n0 x n1` points on the 2-torus `[0, 2*pi)^2`.
    pub fn torus(n0: usize, n1: usize, dtau: f64) -> Result<Self> {
        let tau = std::f64::consts::TAU;
        Grid::new(vec![n0, n1], vec![tau / n0 as f64, tau / n1 as f64], dtau)
    }

    /// Number of spatial directions (1 or 2).
    pub fn p(&self) -> usize {
        self.dims.len()
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn spacing(&self, dir: usize) -> f64 {
        self.spacing[dir]
    }

    pub fn dtau(&self) -> f64 {
        self.dtau
    }

    pub fn with_dtau(&self, dtau: f64) -> Self {
        Grid { dims: self.dims.clone(), spacing: self.spacing.clone(), dtau }
    }

    /// Coordinate extent of one direction (`n * du`).
    pub fn extent(&self, dir: usize) -> f64 {
        self.dims[dir] as f64 * self.spacing[dir]
    }

    /// Quadrature weight of one grid cell (product of spacings).
    pub fn measure(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Coordinate volume of the whole slice.
    pub fn volume(&self) -> f64 {
        self.measure() * self.len() as f64
    }

    /// Spatial coordinates `u^A` of a flattened point index.
    pub fn coords(&self, k: usize) -> Vec<f64> {
        match self.dims.len() {
            1 => vec![k as f64 * self.spacing[0]],
            _ => {
                let n1 = self.dims[1];
                vec![(k / n1) as f64 * self.spacing[0], (k % n1) as f64 * self.spacing[1]]
            }
        }
    }

    /// Flattened index of the periodic neighbor `offset` steps along `dir`.
    pub fn neighbor(&self, k: usize, dir: usize, offset: isize) -> usize {
        match self.dims.len() {
            1 => {
                let n = self.dims[0] as isize;
                (((k as isize + offset) % n + n) % n) as usize
            }
            _ => {
                let n0 = self.dims[0] as isize;
                let n1 = self.dims[1] as isize;
                let (i0, i1) = ((k / self.dims[1]) as isize, (k % self.dims[1]) as isize);
                let (j0, j1) = if dir == 0 {
                    (((i0 + offset) % n0 + n0) % n0, i1)
                } else {
                    (i0, ((i1 + offset) % n1 + n1) % n1)
                };
                (j0 * n1 + j1) as usize
            }
        }
    }
}

/// A field of real tuples sampled on a [`Grid`], stored point-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    grid: Grid,
    arity: usize,
    data: Vec<f64>,
}

impl GridField {
    pub fn zeros(grid: &Grid, arity: usize) -> Self {
        GridField { grid: grid.clone(), arity, data: vec![0.0; grid.len() * arity] }
    }

    /// Build a field by evaluating `f(u, out)` at every grid point.
    pub fn from_fn(grid: &Grid, arity: usize, mut f: impl FnMut(&[f64], &mut [f64])) -> Self {
        let mut field = GridField::zeros(grid, arity);
        for k in 0..grid.len() {
            let u = grid.coords(k);
            f(&u, field.point_mut(k));
        }
        field
    }

    pub fn scalar_from_fn(grid: &Grid, mut f: impl FnMut(&[f64]) -> f64) -> Self {
        GridField::from_fn(grid, 1, |u, out| out[0] = f(u))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.data[k * self.arity..(k + 1) * self.arity]
    }

    pub fn point_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.data[k * self.arity..(k + 1) * self.arity]
    }

    pub fn get(&self, k: usize, c: usize) -> f64 {
        self.data[k * self.arity + c]
    }

    pub fn set(&mut self, k: usize, c: usize, v: f64) {
        self.data[k * self.arity + c] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Rejects NaN/Inf entries; fields are expected to stay finite past
    /// construction.
    pub fn validate_finite(&self, context: &str) -> Result<()> {
        if self.data.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite { context: context.to_string() })
        }
    }

    /// Centered second-order periodic difference along `dir`.
    pub fn partial_u(&self, dir: usize) -> Result<GridField> {
        if dir >= self.grid.p() {
            return Err(Error::DirectionOutOfRange { dir, p: self.grid.p() });
        }
        let inv2h = 1.0 / (2.0 * self.grid.spacing(dir));
        let mut out = GridField::zeros(&self.grid, self.arity);
        for k in 0..self.grid.len() {
            let kp = self.grid.neighbor(k, dir, 1);
            let km = self.grid.neighbor(k, dir, -1);
            for c in 0..self.arity {
                out.data[k * self.arity + c] =
                    (self.data[kp * self.arity + c] - self.data[km * self.arity + c]) * inv2h;
            }
        }
        Ok(out)
    }

    /// Periodic trapezoid quadrature of a scalar density over the slice.
    pub fn integrate(&self) -> f64 {
        assert_eq!(self.arity, 1, "integrate expects a scalar density");
        self.data.iter().sum::<f64>() * self.grid.measure()
    }

    /// `self + a * other`, component-wise.
    pub fn axpy(&mut self, a: f64, other: &GridField) {
        assert_eq!(self.data.len(), other.data.len());
        for (x, y) in self.data.iter_mut().zip(other.data.iter()) {
            *x += a * y;
        }
    }

    pub fn scale(&mut self, a: f64) {
        for x in self.data.iter_mut() {
            *x *= a;
        }
    }

    pub fn linear_combination(terms: &[(f64, &GridField)]) -> GridField {
        let first = terms[0].1;
        let mut out = GridField::zeros(&first.grid, first.arity);
        for &(a, f) in terms {
            out.axpy(a, f);
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Centered second-order finite difference of `field` along `dir`.
pub fn partial_u(field: &GridField, dir: usize) -> Result<GridField> {
    field.partial_u(dir)
}

/// Riemann/trapezoid quadrature of a scalar density over the spatial slice.
pub fn integrate_slice(density: &GridField) -> f64 {
    density.integrate()
}

/// Square dense matrix of small dimension with guarded inversion.
///
/// Inversion refuses to proceed when `|det|` falls below
/// [`DEGENERACY_THRESHOLD`] relative to the matrix scale: collapsing branes
/// drive the induced metrics degenerate and must fail loudly instead of
/// returning garbage.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallMatrix(DMatrix<f64>);

impl SmallMatrix {
    pub fn from_matrix(m: DMatrix<f64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "SmallMatrix must be square");
        SmallMatrix(m)
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        SmallMatrix(DMatrix::from_fn(n, n, f))
    }

    pub fn identity(n: usize) -> Self {
        SmallMatrix(DMatrix::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn det(&self) -> f64 {
        match self.dim() {
            1 => self.0[(0, 0)],
            2 => self.0[(0, 0)] * self.0[(1, 1)] - self.0[(0, 1)] * self.0[(1, 0)],
            _ => self.0.determinant(),
        }
    }

    /// Scale against which the determinant is compared: (max |entry|)^n,
    /// which is homogeneous of the same degree as the determinant.
    pub fn scale(&self) -> f64 {
        let m = self.0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        m.powi(self.dim() as i32)
    }

    pub fn inverse(&self) -> Result<SmallMatrix> {
        let det = self.det();
        let threshold = DEGENERACY_THRESHOLD * self.scale().max(f64::MIN_POSITIVE);
        if !det.is_finite() || det.abs() < threshold {
            return Err(Error::SingularMatrix { det, threshold });
        }
        match self.dim() {
            1 => Ok(SmallMatrix(DMatrix::from_element(1, 1, 1.0 / det))),
            2 => {
                let inv = 1.0 / det;
                let (a, b, c, d) =
                    (self.0[(0, 0)], self.0[(0, 1)], self.0[(1, 0)], self.0[(1, 1)]);
                Ok(SmallMatrix(DMatrix::from_row_slice(
                    2,
                    2,
                    &[d * inv, -b * inv, -c * inv, a * inv],
                )))
            }
            _ => self
                .0
                .clone()
                .try_inverse()
                .map(SmallMatrix)
                .ok_or(Error::SingularMatrix { det, threshold }),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }
}

impl Deref for SmallMatrix {
    type Target = DMatrix<f64>;

    fn deref(&self) -> &Self::Target {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample_grid(n: usize) -> Grid {
        Grid::circle(n, 1e-3).unwrap()
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let grid = sample_grid(32);
        let f = GridField::scalar_from_fn(&grid, |_| 3.5);
        let df = partial_u(&f, 0).unwrap();
        assert_eq!(df.max_abs(), 0.0);
    }

    #[test]
    fn derivative_of_sine_matches_cosine_at_second_order() {
        let grid = sample_grid(64);
        let du = grid.spacing(0);
        let f = GridField::scalar_from_fn(&grid, |u| u[0].sin());
        let df = partial_u(&f, 0).unwrap();
        let mut max_err = 0.0f64;
        for k in 0..grid.len() {
            let u = grid.coords(k)[0];
            max_err = max_err.max((df.get(k, 0) - u.cos()).abs());
        }
        assert!(max_err <= du * du, "max error {max_err} vs du^2 {}", du * du);
    }

    #[test]
    fn derivative_is_linear() {
        let grid = sample_grid(48);
        let f = GridField::scalar_from_fn(&grid, |u| u[0].sin());
        let g = GridField::scalar_from_fn(&grid, |u| (2.0 * u[0]).cos());
        let (a, b) = (1.25, -0.75);
        let combo = GridField::linear_combination(&[(a, &f), (b, &g)]);
        let lhs = partial_u(&combo, 0).unwrap();
        let rhs = GridField::linear_combination(&[
            (a, &partial_u(&f, 0).unwrap()),
            (b, &partial_u(&g, 0).unwrap()),
        ]);
        let mut diff = lhs.clone();
        diff.axpy(-1.0, &rhs);
        assert!(diff.max_abs() < 1e-14);
    }

    #[test]
    fn trapezoid_is_exact_for_constants_and_band_limited_fields() {
        let grid = sample_grid(128);
        let one = GridField::scalar_from_fn(&grid, |_| 1.0);
        assert!((integrate_slice(&one) - std::f64::consts::TAU).abs() < 1e-14);

        let sin2 = GridField::scalar_from_fn(&grid, |u| u[0].sin().powi(2));
        assert!((integrate_slice(&sin2) - std::f64::consts::PI).abs() < 1e-12);

        let zero = GridField::zeros(&grid, 1);
        assert_eq!(integrate_slice(&zero), 0.0);
    }

    #[test]
    fn mixed_partials_commute_on_smooth_torus_fields() {
        let grid = Grid::torus(32, 24, 1e-3).unwrap();
        let f = GridField::scalar_from_fn(&grid, |u| u[0].sin() * (2.0 * u[1]).cos());
        let dxy = partial_u(&partial_u(&f, 0).unwrap(), 1).unwrap();
        let dyx = partial_u(&partial_u(&f, 1).unwrap(), 0).unwrap();
        let mut diff = dxy.clone();
        diff.axpy(-1.0, &dyx);
        assert!(diff.max_abs() < 1e-13);
    }

    #[test]
    fn refinement_halves_spacing_quarters_error() {
        let err_at = |n: usize| {
            let grid = sample_grid(n);
            let f = GridField::scalar_from_fn(&grid, |u| (3.0 * u[0]).sin());
            let df = partial_u(&f, 0).unwrap();
            (0..grid.len()).fold(0.0f64, |m, k| {
                let u = grid.coords(k)[0];
                m.max((df.get(k, 0) - 3.0 * (3.0 * u).cos()).abs())
            })
        };
        let ratio = err_at(64) / err_at(128);
        assert!((3.5..4.5).contains(&ratio), "convergence ratio {ratio}");
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let m = SmallMatrix::from_fn(2, |i, j| ((i + 1) * (j + 1)) as f64);
        assert!(matches!(m.inverse(), Err(Error::SingularMatrix { .. })));
        let id = SmallMatrix::identity(3);
        assert_eq!(id.inverse().unwrap().matrix(), id.matrix());
    }

    #[test]
    fn direction_out_of_range_is_an_error() {
        let grid = sample_grid(16);
        let f = GridField::zeros(&grid, 1);
        assert!(matches!(
            partial_u(&f, 1),
            Err(Error::DirectionOutOfRange { dir: 1, p: 1 })
        ));
    }

    proptest! {
        /// Discrete summation by parts: the integral of a periodic derivative
        /// vanishes to machine precision for arbitrary band-limited fields.
        #[test]
        fn integral_of_derivative_vanishes(
            a in -5.0f64..5.0,
            b in -5.0f64..5.0,
            c in -5.0f64..5.0,
            k1 in 1usize..6,
            k2 in 1usize..6,
        ) {
            let grid = sample_grid(64);
            let f = GridField::scalar_from_fn(&grid, |u| {
                a * (k1 as f64 * u[0]).sin() + b * (k2 as f64 * u[0]).cos() + c
            });
            let df = partial_u(&f, 0).unwrap();
            prop_assert!(integrate_slice(&df).abs() < 1e-12 * (1.0 + f.max_abs()));
        }

        /// Quadrature is linear and exact on constants regardless of offset.
        #[test]
        fn quadrature_of_constant(c in -100.0f64..100.0) {
            let grid = sample_grid(32);
            let f = GridField::scalar_from_fn(&grid, |_| c);
            let expected = c * std::f64::consts::TAU;
            prop_assert!((integrate_slice(&f) - expected).abs() < 1e-12 * (1.0 + c.abs()));
        }
    }
}
