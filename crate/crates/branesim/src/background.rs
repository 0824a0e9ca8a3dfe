//! Fixed background spacetime {M, g}: metric evaluation, inverses,
//! coordinate derivatives of the metric and Christoffel symbols.
//!
//! The metric interface is a single pointwise evaluator; coordinate
//! derivatives are taken by central finite differences with step
//! `H_FD * coordinate scale`. Signature is validated by sampling at
//! construction time, not proven (documented limitation).

use nalgebra::DMatrix;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::SmallMatrix;

/// Finite-difference step used for metric coordinate derivatives.
pub const H_FD: f64 = 1e-5;

type MetricFn = dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MetricKind {
    Minkowski,
    General,
}

/// An immutable background metric, shareable across threads.
#[derive(Clone)]
pub struct BackgroundMetric {
    dim: usize,
    kind: MetricKind,
    evaluator: Arc<MetricFn>,
    /// Coordinate scale used for finite-difference steps.
    coord_scale: f64,
}

/// A sample of the connection coefficients at one point, symmetric in the
/// lower indices: `gamma[mu][nu][lam]` is `Gamma^mu_{nu lam}`.
#[derive(Debug, Clone)]
pub struct ChristoffelSample {
    pub dim: usize,
    pub gamma: Vec<f64>,
}

impl ChristoffelSample {
    fn zeros(dim: usize) -> Self {
        ChristoffelSample { dim, gamma: vec![0.0; dim * dim * dim] }
    }

    #[inline]
    pub fn get(&self, mu: usize, nu: usize, lam: usize) -> f64 {
        self.gamma[(mu * self.dim + nu) * self.dim + lam]
    }

    #[inline]
    fn set(&mut self, mu: usize, nu: usize, lam: usize, v: f64) {
        self.gamma[(mu * self.dim + nu) * self.dim + lam] = v;
    }
}

/// First coordinate derivatives of the metric at one point:
/// `d[lam][mu][nu]` is `partial_lam g_{mu nu}`.
#[derive(Debug, Clone)]
pub struct MetricGradient {
    pub dim: usize,
    pub d: Vec<f64>,
}

impl MetricGradient {
    fn zeros(dim: usize) -> Self {
        MetricGradient { dim, d: vec![0.0; dim * dim * dim] }
    }

    #[inline]
    pub fn get(&self, lam: usize, mu: usize, nu: usize) -> f64 {
        self.d[(lam * self.dim + mu) * self.dim + nu]
    }

    pub fn is_zero(&self) -> bool {
        self.d.iter().all(|&v| v == 0.0)
    }
}

fn minkowski_matrix(dim: usize) -> DMatrix<f64> {
    let mut g = DMatrix::identity(dim, dim);
    g[(0, 0)] = -1.0;
    g
}

impl BackgroundMetric {
    /// Flat Minkowski metric with signature (-, +, ..., +).
    pub fn minkowski(dim: usize) -> Self {
        BackgroundMetric {
            dim,
            kind: MetricKind::Minkowski,
            evaluator: Arc::new(move |_x| minkowski_matrix(dim)),
            coord_scale: 1.0,
        }
    }

    /// Conformally flat metric `Omega(x)^2 eta` with `Omega = 1 + grad . x`.
    pub fn conformal(dim: usize, gradient: Vec<f64>) -> Result<Self> {
        if gradient.len() != dim {
            return Err(Error::ConfigValidation {
                field: "background.gradient".into(),
                reason: format!("expected {dim} components, got {}", gradient.len()),
            });
        }
        let grad = gradient.clone();
        let eval = move |x: &[f64]| {
            let omega = 1.0 + grad.iter().zip(x).map(|(g, x)| g * x).sum::<f64>();
            minkowski_matrix(dim) * (omega * omega)
        };
        BackgroundMetric::general(dim, Arc::new(eval), 1.0)
    }

    /// General metric from a pointwise evaluator. Signature is checked at a
    /// handful of sample points near the origin.
    pub fn general(
        dim: usize,
        evaluator: Arc<MetricFn>,
        coord_scale: f64,
    ) -> Result<Self> {
        let bg = BackgroundMetric { dim, kind: MetricKind::General, evaluator, coord_scale };
        let mut sample = vec![0.0; dim];
        bg.check_signature(&sample)?;
        for axis in 0..dim {
            sample[axis] = 0.5 * coord_scale;
            bg.check_signature(&sample)?;
            sample[axis] = 0.0;
        }
        Ok(bg)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    pub fn is_flat(&self) -> bool {
        self.kind == MetricKind::Minkowski
    }

    fn check_signature(&self, x: &[f64]) -> Result<()> {
        let g = (self.evaluator)(x);
        let sym = nalgebra::SymmetricEigen::new(g.clone());
        let negatives = sym.eigenvalues.iter().filter(|&&e| e < 0.0).count();
        let max = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let asym = (&g - g.transpose()).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if negatives != 1 || asym > 1e-12 * max.max(1.0) {
            return Err(Error::SignatureViolation { point: x.to_vec() });
        }
        Ok(())
    }

    /// Metric components at `x`.
    pub fn metric_at(&self, x: &[f64]) -> Result<SmallMatrix> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { context: "metric_at point".into() });
        }
        let g = (self.evaluator)(x);
        // Lorentzian necessary condition: det < 0 for one timelike direction.
        if self.kind == MetricKind::General {
            let det = g.determinant();
            if !(det < 0.0) {
                return Err(Error::SignatureViolation { point: x.to_vec() });
            }
        }
        Ok(SmallMatrix::from_matrix(g))
    }

    pub fn inverse_metric_at(&self, x: &[f64]) -> Result<SmallMatrix> {
        if self.is_flat() {
            return Ok(SmallMatrix::from_matrix(minkowski_matrix(self.dim)));
        }
        self.metric_at(x)?.inverse()
    }

    /// Coordinate derivatives of the metric by central differences
    /// (identically zero on the Minkowski fast path).
    pub fn metric_gradient_at(&self, x: &[f64]) -> Result<MetricGradient> {
        let mut out = MetricGradient::zeros(self.dim);
        if self.is_flat() {
            return Ok(out);
        }
        let h = H_FD * self.coord_scale;
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        for lam in 0..self.dim {
            xp[lam] = x[lam] + h;
            xm[lam] = x[lam] - h;
            let gp = (self.evaluator)(&xp);
            let gm = (self.evaluator)(&xm);
            for mu in 0..self.dim {
                for nu in 0..self.dim {
                    out.d[(lam * self.dim + mu) * self.dim + nu] =
                        (gp[(mu, nu)] - gm[(mu, nu)]) / (2.0 * h);
                }
            }
            xp[lam] = x[lam];
            xm[lam] = x[lam];
        }
        Ok(out)
    }

    /// Christoffel symbols `Gamma^mu_{nu lam}` at `x`.
    pub fn christoffel_at(&self, x: &[f64]) -> Result<ChristoffelSample> {
        let mut out = ChristoffelSample::zeros(self.dim);
        if self.is_flat() {
            return Ok(out);
        }
        let ginv = self.inverse_metric_at(x)?;
        let dg = self.metric_gradient_at(x)?;
        for mu in 0..self.dim {
            for nu in 0..self.dim {
                for lam in nu..self.dim {
                    let mut sum = 0.0;
                    for rho in 0..self.dim {
                        sum += ginv[(mu, rho)]
                            * (dg.get(nu, rho, lam) + dg.get(lam, rho, nu) - dg.get(rho, nu, lam));
                    }
                    let v = 0.5 * sum;
                    out.set(mu, nu, lam, v);
                    out.set(mu, lam, nu, v);
                }
            }
        }
        Ok(out)
    }
}

impl std::fmt::Debug for BackgroundMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BackgroundMetric")
            .field("dim", &self.dim)
            .field("kind", &self.kind)
            .finish()
    }
}
