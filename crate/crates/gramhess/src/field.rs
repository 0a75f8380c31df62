//! Smooth ambient functions bundled with analytic derivative evaluators,
//! plus the finite-difference oracles used to verify them.
//!
//! Analytic gradients and Hessians are mandatory: the finite-difference
//! routines exist only as independent checks and are never substituted
//! for a missing evaluator.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{dot, Mat};
use crate::{Error, Result};

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type HessFn = dyn Fn(&[f64]) -> Mat + Send + Sync;
/// Christoffel symbols `Γ^w_{uv}` flattened as `[(w * m + u) * m + v]`.
type ChristoffelFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// A point of the ambient space, in ambient coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

impl From<Vec<f64>> for Point {
    fn from(coords: Vec<f64>) -> Self {
        Self::new(coords)
    }
}

impl From<&[f64]> for Point {
    fn from(coords: &[f64]) -> Self {
        Self::new(coords.to_vec())
    }
}

/// A smooth function on the ambient space with analytic value, gradient
/// and Hessian evaluators, and an optional Christoffel hook for
/// non-Euclidean ambient metrics.
///
/// Evaluators must be reentrant and deterministic; a `ScalarField` is
/// `Send + Sync` and safe to share across threads. Evaluators are assumed
/// to be exact C² implementations — the library does not detect lower
/// regularity.
#[derive(Clone)]
pub struct ScalarField {
    dim: usize,
    value: Arc<ValueFn>,
    gradient: Arc<GradFn>,
    hessian: Arc<HessFn>,
    christoffel: Option<Arc<ChristoffelFn>>,
}

impl core::fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ScalarField")
            .field("dim", &self.dim)
            .field("christoffel", &self.christoffel.is_some())
            .finish()
    }
}

impl ScalarField {
    pub fn new(
        dim: usize,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        hessian: impl Fn(&[f64]) -> Mat + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            value: Arc::new(value),
            gradient: Arc::new(gradient),
            hessian: Arc::new(hessian),
            christoffel: None,
        }
    }

    /// Attach Christoffel symbols `Γ^w_{uv}` of the ambient metric. The
    /// evaluator returns the rank-3 array flattened as
    /// `[(w * m + u) * m + v]`. Only symmetric connections are supported;
    /// the corrected Hessian is symmetrized in `(u, v)`.
    pub fn with_christoffel(
        mut self,
        christoffel: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.christoffel = Some(Arc::new(christoffel));
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_christoffel(&self) -> bool {
        self.christoffel.is_some()
    }

    fn check_dim(&self, x: &Point) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: x.dim(),
            });
        }
        Ok(())
    }

    pub fn value(&self, x: &Point) -> Result<f64> {
        self.check_dim(x)?;
        Ok((self.value)(x.coords()))
    }

    pub fn gradient(&self, x: &Point) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        Ok((self.gradient)(x.coords()))
    }

    /// Plain second-partials matrix, without the Christoffel correction.
    pub fn raw_hessian(&self, x: &Point) -> Result<Mat> {
        self.check_dim(x)?;
        Ok((self.hessian)(x.coords()))
    }

    pub(crate) fn value_raw(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    pub(crate) fn gradient_raw(&self, x: &[f64]) -> Vec<f64> {
        (self.gradient)(x)
    }

    pub(crate) fn hessian_raw(&self, x: &[f64]) -> Mat {
        (self.hessian)(x)
    }

    /// Constant field.
    pub fn constant(dim: usize, c: f64) -> Self {
        Self::new(
            dim,
            move |_| c,
            move |_| vec![0.0; dim],
            move |_| Mat::zeros(dim, dim),
        )
    }

    /// Quadratic field `½ xᵀQx + bᵀx + c` for symmetric `Q`.
    pub fn quadratic(q: Mat, b: Vec<f64>, c: f64) -> Result<Self> {
        let dim = b.len();
        if q.rows() != dim || q.cols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: q.rows(),
            });
        }
        crate::linalg::require_symmetric(&q, 1e-12)?;
        let qv = q.clone();
        let qg = q.clone();
        let bv = b.clone();
        let bg = b;
        Ok(Self::new(
            dim,
            move |x| 0.5 * dot(x, &qv.matvec(x)) + dot(&bv, x) + c,
            move |x| {
                let mut g = qg.matvec(x);
                for (gi, bi) in g.iter_mut().zip(bg.iter()) {
                    *gi += bi;
                }
                g
            },
            move |_| q.clone(),
        ))
    }
}

/// Ambient Hessian matrix of `field` at `x`: the plain second partials
/// when no Christoffel hook is present, and
/// `∂²G/∂x^u∂x^v − Γ^w_{uv} ∂G/∂x^w` otherwise. The result is
/// symmetrized after the contraction, so it is exactly symmetric.
pub fn ambient_hessian(field: &ScalarField, x: &Point) -> Result<Mat> {
    field.check_dim(x)?;
    let m = field.dim();
    let mut h = field.hessian_raw(x.coords());
    if h.rows() != m || h.cols() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: h.rows(),
        });
    }
    if let Some(gamma_fn) = &field.christoffel {
        let grad = field.gradient_raw(x.coords());
        let gamma = gamma_fn(x.coords());
        if gamma.len() != m * m * m {
            return Err(Error::DimensionMismatch {
                expected: m * m * m,
                actual: gamma.len(),
            });
        }
        for u in 0..m {
            for v in 0..m {
                let mut contraction = 0.0;
                for w in 0..m {
                    contraction += gamma[(w * m + u) * m + v] * grad[w];
                }
                h[(u, v)] -= contraction;
            }
        }
    }
    h.symmetrize();
    Ok(h)
}

/// Central-difference gradient oracle,
/// `(f(x + h·e_u) − f(x − h·e_u)) / 2h` per coordinate.
pub fn fd_gradient(field: &ScalarField, x: &Point, h: f64) -> Result<Vec<f64>> {
    field.check_dim(x)?;
    if h <= 0.0 {
        return Err(Error::InvalidParameter(
            "finite-difference step must be > 0",
        ));
    }
    let mut xs = x.coords().to_vec();
    let mut g = vec![0.0; field.dim()];
    for u in 0..field.dim() {
        let orig = xs[u];
        xs[u] = orig + h;
        let plus = field.value_raw(&xs);
        xs[u] = orig - h;
        let minus = field.value_raw(&xs);
        xs[u] = orig;
        g[u] = (plus - minus) / (2.0 * h);
    }
    Ok(g)
}

/// Second-order central-stencil Hessian oracle acting on the value
/// evaluator alone. The output is symmetrized.
pub fn fd_hessian(field: &ScalarField, x: &Point, h: f64) -> Result<Mat> {
    field.check_dim(x)?;
    if h <= 0.0 {
        return Err(Error::InvalidParameter(
            "finite-difference step must be > 0",
        ));
    }
    let m = field.dim();
    let mut xs = x.coords().to_vec();
    let f0 = field.value_raw(&xs);
    let mut hess = Mat::zeros(m, m);
    for u in 0..m {
        let ou = xs[u];
        xs[u] = ou + h;
        let plus = field.value_raw(&xs);
        xs[u] = ou - h;
        let minus = field.value_raw(&xs);
        xs[u] = ou;
        hess[(u, u)] = (plus - 2.0 * f0 + minus) / (h * h);
        for v in (u + 1)..m {
            let ov = xs[v];
            xs[u] = ou + h;
            xs[v] = ov + h;
            let pp = field.value_raw(&xs);
            xs[v] = ov - h;
            let pm = field.value_raw(&xs);
            xs[u] = ou - h;
            let mm = field.value_raw(&xs);
            xs[v] = ov + h;
            let mp = field.value_raw(&xs);
            xs[u] = ou;
            xs[v] = ov;
            let val = (pp - pm - mp + mm) / (4.0 * h * h);
            hess[(u, v)] = val;
            hess[(v, u)] = val;
        }
    }
    Ok(hess)
}

/// Default central-difference step for the gradient oracle (truncation /
/// round-off balance at double precision).
pub const FD_GRADIENT_STEP: f64 = 1e-5;
/// Default central-difference step for the Hessian oracle.
pub const FD_HESSIAN_STEP: f64 = 1e-4;
