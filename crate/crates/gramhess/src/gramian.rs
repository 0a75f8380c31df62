//! Gramian matrices, multipliers and the restricted Hessian for arbitrary
//! constraint systems `S = F⁻¹(c)`.
//!
//! Everything is expressed in ambient coordinates: a tangent basis of `S`
//! at a point is a list of ambient vectors, and the restricted Hessian of
//! a cost `G` is the corrected ambient matrix `Hess G − Σ σᵢ Hess Fᵢ`
//! squeezed through that basis. The formula is valid at every on-manifold
//! point, not only at critical points.

use alloc::vec::Vec;

use crate::field::{ambient_hessian, Point, ScalarField};
use crate::linalg::{self, cholesky_solve, dot, lu_det, Mat};
use crate::{Error, Result};

/// Relative tangency gate for user-supplied bases. Closed-form bases are
/// exactly tangent; this is the strict but floating-point-realistic gate
/// applied to everything else.
pub const TANGENCY_TOL: f64 = 1e-10;

/// An ordered list of constraint functions together with the regular
/// value that carves out `S = F⁻¹(c)`.
#[derive(Debug, Clone)]
pub struct ConstraintSystem {
    constraints: Vec<ScalarField>,
    regular_value: Vec<f64>,
}

impl ConstraintSystem {
    /// All constraints must share one ambient dimension `m`, with
    /// `k < m`, `k ≥ 1`.
    pub fn new(constraints: Vec<ScalarField>, regular_value: Vec<f64>) -> Result<Self> {
        if constraints.is_empty() {
            return Err(Error::InvalidParameter("constraint list must be non-empty"));
        }
        if regular_value.len() != constraints.len() {
            return Err(Error::DimensionMismatch {
                expected: constraints.len(),
                actual: regular_value.len(),
            });
        }
        let m = constraints[0].dim();
        for c in &constraints {
            if c.dim() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    actual: c.dim(),
                });
            }
        }
        if constraints.len() >= m {
            return Err(Error::InvalidParameter(
                "need fewer constraints than ambient dimensions",
            ));
        }
        Ok(Self {
            constraints,
            regular_value,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.constraints[0].dim()
    }

    /// Number of constraints `k`.
    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees at least one constraint
    }

    /// Manifold dimension `m − k`.
    pub fn manifold_dim(&self) -> usize {
        self.ambient_dim() - self.len()
    }

    pub fn constraints(&self) -> &[ScalarField] {
        &self.constraints
    }

    pub fn regular_value(&self) -> &[f64] {
        &self.regular_value
    }

    /// `max_i |F_i(x) − c_i|`, the constraint violation at `x`.
    pub fn residual(&self, x: &Point) -> Result<f64> {
        let mut worst = 0.0f64;
        for (field, c) in self.constraints.iter().zip(self.regular_value.iter()) {
            worst = worst.max((field.value(x)? - c).abs());
        }
        Ok(worst)
    }

    fn gradients(&self, x: &Point) -> Result<Vec<Vec<f64>>> {
        self.constraints.iter().map(|f| f.gradient(x)).collect()
    }

    /// Symmetric `k×k` Gramian of the constraint gradients at `x`.
    pub fn gramian_matrix(&self, x: &Point) -> Result<Mat> {
        let grads = self.gradients(x)?;
        Ok(gramian_of(&grads, &grads))
    }

    /// Gramian matrix, determinant and the conformal factor `1/Σ(x)`
    /// that relates the control metric to the induced metric.
    pub fn gramian_report(&self, x: &Point) -> Result<GramianReport> {
        let matrix = self.gramian_matrix(x)?;
        let determinant = lu_det(&matrix);
        let tol = singularity_guard(&matrix);
        if determinant <= tol {
            return Err(Error::SingularGramian {
                det: determinant,
                tol,
            });
        }
        Ok(GramianReport {
            conformal_factor: 1.0 / determinant,
            matrix,
            determinant,
        })
    }
}

/// Gramian data at a point: the matrix of pairwise gradient inner
/// products, its determinant `Σ(x)`, and the conformal factor `1/Σ(x)`.
#[derive(Debug, Clone)]
pub struct GramianReport {
    pub matrix: Mat,
    pub determinant: f64,
    pub conformal_factor: f64,
}

/// Scale-aware guard below which the Gramian is treated as singular:
/// `1e-12 · (trace/k)^k`.
pub fn singularity_guard(gram: &Mat) -> f64 {
    let k = gram.rows();
    let mean_diag = gram.trace() / k as f64;
    1e-12 * libm::pow(mean_diag.abs().max(f64::MIN_POSITIVE), k as f64)
}

fn gramian_of(row_grads: &[Vec<f64>], col_grads: &[Vec<f64>]) -> Mat {
    let mut g = Mat::zeros(row_grads.len(), col_grads.len());
    for (i, fi) in row_grads.iter().enumerate() {
        for (j, gj) in col_grads.iter().enumerate() {
            g[(i, j)] = dot(gj, fi);
        }
    }
    g
}

/// Gramian matrix generated by two lists of smooth functions: entry
/// `(i, j)` is `⟨∇gⱼ(x), ∇fᵢ(x)⟩` — rows indexed by `rows`, columns by
/// `cols`.
pub fn gramian(rows: &[ScalarField], cols: &[ScalarField], x: &Point) -> Result<Mat> {
    let m = x.dim();
    for f in rows.iter().chain(cols.iter()) {
        if f.dim() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: f.dim(),
            });
        }
    }
    let rg: Vec<Vec<f64>> = rows.iter().map(|f| f.gradient_raw(x.coords())).collect();
    let cg: Vec<Vec<f64>> = cols.iter().map(|f| f.gradient_raw(x.coords())).collect();
    Ok(gramian_of(&rg, &cg))
}

fn check_cost(cs: &ConstraintSystem, cost: &ScalarField, x: &Point) -> Result<()> {
    if cost.dim() != cs.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: cs.ambient_dim(),
            actual: cost.dim(),
        });
    }
    if x.dim() != cs.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: cs.ambient_dim(),
            actual: x.dim(),
        });
    }
    Ok(())
}

/// Multipliers `σᵢ(x)` of the extended cost, as Gramian-determinant
/// ratios. Computed by solving the symmetric positive-definite system
/// `Σ·σ = (⟨∇G, ∇Fᵢ⟩)ᵢ`, which is algebraically identical to the
/// determinant ratios by Cramer's rule; see
/// [`sigma_multipliers_cramer`] for the literal ratio form.
pub fn sigma_multipliers(cs: &ConstraintSystem, cost: &ScalarField, x: &Point) -> Result<Vec<f64>> {
    check_cost(cs, cost, x)?;
    let gram = cs.gramian_matrix(x)?;
    let tol = singularity_guard(&gram);
    let det = lu_det(&gram);
    if det <= tol {
        return Err(Error::SingularGramian { det, tol });
    }
    let b = cost_projections(cs, cost, x)?;
    cholesky_solve(&gram, &b).ok_or(Error::SingularGramian { det, tol })
}

/// Literal determinant-ratio form of `σᵢ`: the numerator Gramian has the
/// cost in the i-th column slot. O(k · k³) and ill-conditioned — kept as
/// a cross-check oracle for small `k`.
pub fn sigma_multipliers_cramer(
    cs: &ConstraintSystem,
    cost: &ScalarField,
    x: &Point,
) -> Result<Vec<f64>> {
    check_cost(cs, cost, x)?;
    let gram = cs.gramian_matrix(x)?;
    let tol = singularity_guard(&gram);
    let det = lu_det(&gram);
    if det <= tol {
        return Err(Error::SingularGramian { det, tol });
    }
    let b = cost_projections(cs, cost, x)?;
    let mut sigma = Vec::with_capacity(cs.len());
    for i in 0..cs.len() {
        let mut numerator = gram.clone();
        numerator.set_col(i, &b);
        sigma.push(lu_det(&numerator) / det);
    }
    Ok(sigma)
}

/// `(⟨∇G, ∇Fᵢ⟩)ᵢ`.
fn cost_projections(cs: &ConstraintSystem, cost: &ScalarField, x: &Point) -> Result<Vec<f64>> {
    let g = cost.gradient(x)?;
    cs.constraints
        .iter()
        .map(|f| Ok(dot(&g, &f.gradient(x)?)))
        .collect()
}

/// The standard control vector field
/// `v₀ = Σ(x)·∇G − Σᵢ det Σᵢ(x)·∇Fᵢ`, where `det Σᵢ` is the Gramian
/// determinant with the cost in the i-th column slot. Defined at every
/// ambient point (no regularity guard); its restriction to `S` is the
/// gradient of `G|_S` in the conformal metric.
pub fn standard_control_field(
    cs: &ConstraintSystem,
    cost: &ScalarField,
    x: &Point,
) -> Result<Vec<f64>> {
    check_cost(cs, cost, x)?;
    let gram = cs.gramian_matrix(x)?;
    let b = cost_projections(cs, cost, x)?;
    let det = lu_det(&gram);
    let mut v = cost.gradient(x)?;
    for entry in v.iter_mut() {
        *entry *= det;
    }
    for i in 0..cs.len() {
        let mut numerator = gram.clone();
        numerator.set_col(i, &b);
        let coeff = lu_det(&numerator);
        linalg::axpy(&mut v, -coeff, &cs.constraints[i].gradient(x)?);
    }
    Ok(v)
}

/// `∇G(x) − Σᵢ σᵢ(x) ∇Fᵢ(x) = v₀/Σ`: the ambient prolongation of the
/// gradient of `G|_S` in the induced metric. Tangent to `S` at
/// on-manifold points.
pub fn induced_gradient(cs: &ConstraintSystem, cost: &ScalarField, x: &Point) -> Result<Vec<f64>> {
    let sigma = sigma_multipliers(cs, cost, x)?;
    let mut v = cost.gradient(x)?;
    for (i, s) in sigma.iter().enumerate() {
        linalg::axpy(&mut v, -s, &cs.constraints[i].gradient(x)?);
    }
    Ok(v)
}

/// An ordered set of ambient vectors spanning the tangent space of `S`
/// at `base_point`.
#[derive(Debug, Clone)]
pub struct TangentBasis {
    base_point: Point,
    vectors: Vec<Vec<f64>>,
}

impl TangentBasis {
    /// No validation happens here; tangency and independence are checked
    /// against a concrete constraint system by [`TangentBasis::validate`]
    /// or by the operations that consume the basis.
    pub fn new(base_point: Point, vectors: Vec<Vec<f64>>) -> Self {
        Self {
            base_point,
            vectors,
        }
    }

    pub fn base_point(&self) -> &Point {
        &self.base_point
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Check tangency (`|⟨v, ∇Fᵢ⟩| ≤ 1e-10·‖v‖·‖∇Fᵢ‖` for every i) and
    /// linear independence (positive Gram determinant).
    pub fn validate(&self, cs: &ConstraintSystem) -> Result<()> {
        if self.base_point.dim() != cs.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: cs.ambient_dim(),
                actual: self.base_point.dim(),
            });
        }
        for v in &self.vectors {
            if v.len() != cs.ambient_dim() {
                return Err(Error::DimensionMismatch {
                    expected: cs.ambient_dim(),
                    actual: v.len(),
                });
            }
        }
        for field in cs.constraints() {
            let grad = field.gradient(&self.base_point)?;
            let g_norm = linalg::norm(&grad);
            for (idx, v) in self.vectors.iter().enumerate() {
                let d = dot(v, &grad);
                if d.abs() > TANGENCY_TOL * linalg::norm(v) * g_norm {
                    return Err(Error::NotTangent { index: idx, dot: d });
                }
            }
        }
        let gram = gramian_of(&self.vectors, &self.vectors);
        if linalg::cholesky(&gram).is_none() {
            return Err(Error::DependentBasis);
        }
        Ok(())
    }
}

/// The restricted Hessian of a cost on `S` at a point, expressed in a
/// tangent basis, together with the multipliers that produced it.
#[derive(Debug, Clone)]
pub struct RestrictedHessian {
    pub matrix: Mat,
    pub basis: TangentBasis,
    pub multipliers: Vec<f64>,
}

impl RestrictedHessian {
    /// Quadratic form `cᵀ H c` for a direction given by its coordinates
    /// in the basis.
    pub fn quadratic_form(&self, coords: &[f64]) -> f64 {
        dot(coords, &self.matrix.matvec(coords))
    }
}

/// Restricted Hessian of `cost` on `S` in the supplied tangent basis:
/// `[Hess G_S]_{ab} = f̃ₐᵀ (Hess G − Σᵢ σᵢ Hess Fᵢ) f̃_b`.
///
/// The corrected ambient matrix is formed once and squeezed through the
/// basis by congruence, so the output is exactly symmetric. Valid at
/// every on-manifold point, critical or not.
pub fn restricted_hessian(
    cs: &ConstraintSystem,
    cost: &ScalarField,
    basis: &TangentBasis,
) -> Result<RestrictedHessian> {
    basis.validate(cs)?;
    let x = basis.base_point();
    let sigma = sigma_multipliers(cs, cost, x)?;
    let corrected = corrected_ambient_hessian(cs, cost, &sigma, x)?;
    let matrix = linalg::congruence(&corrected, basis.vectors());
    Ok(RestrictedHessian {
        matrix,
        basis: basis.clone(),
        multipliers: sigma,
    })
}

/// `Hess G(x) − Σᵢ σᵢ Hess Fᵢ(x)` as an ambient matrix.
pub(crate) fn corrected_ambient_hessian(
    cs: &ConstraintSystem,
    cost: &ScalarField,
    sigma: &[f64],
    x: &Point,
) -> Result<Mat> {
    let mut h = ambient_hessian(cost, x)?;
    for (field, s) in cs.constraints().iter().zip(sigma.iter()) {
        let hf = ambient_hessian(field, x)?;
        h = h.sub(&hf.scale(*s));
    }
    h.symmetrize();
    Ok(h)
}
