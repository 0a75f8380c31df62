//! Closed-form machinery for the orthogonal group `O(n)` seen as the
//! level set `𝒪(n) ⊂ ℝ^{n²}` of the constraints
//! `F_s = ½‖x_s‖²`, `F_pq = ⟨x_p, x_q⟩` at the regular value
//! `(½,…,½, 0,…,0)`.
//!
//! A matrix `X` with rows `x_1,…,x_n` is flattened row by row
//! (`x̃ = (x_1,…,x_n)`), a convention fixed project-wide. Constraints are
//! ordered `F_1,…,F_n, F_{12}, F_{13}, …, F_{n-1,n}` (pairs
//! lexicographic); tangent-basis elements `ω̃_αβ` follow the same pair
//! order.
//!
//! Off-manifold inputs are rejected, not projected: the closed forms
//! (Gramian constant `2^{n(n-1)/2}`, multiplier shortcuts, basis norms)
//! hold only on `𝒪(n)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::field::{ambient_hessian, Point, ScalarField};
use crate::gramian::{ConstraintSystem, RestrictedHessian, TangentBasis};
use crate::linalg::{dot, lu_det, Mat};
use crate::rng::SplitMix64;
use crate::{Error, Result};

/// Absolute tolerance on the row-orthonormality defect of points
/// accepted as lying on `𝒪(n)`.
pub const ON_MANIFOLD_TOL: f64 = 1e-10;

/// A point of `𝒪(n)`: a flattened orthogonal matrix, validated at
/// construction so every closed form downstream may assume
/// row-orthonormality within [`ON_MANIFOLD_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalPoint {
    n: usize,
    coords: Vec<f64>,
}

impl OrthogonalPoint {
    pub fn new(n: usize, coords: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter("n must be at least 2"));
        }
        if coords.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                actual: coords.len(),
            });
        }
        let defect = orthonormality_defect(n, &coords);
        if defect > ON_MANIFOLD_TOL {
            return Err(Error::OffManifold { defect });
        }
        Ok(Self { n, coords })
    }

    pub fn from_matrix(x: &Mat) -> Result<Self> {
        if !x.is_square() {
            return Err(Error::DimensionMismatch {
                expected: x.rows(),
                actual: x.cols(),
            });
        }
        Self::new(x.rows(), x.as_slice().to_vec())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_matrix(&Mat::identity(n)).expect("identity is orthogonal")
    }

    /// Haar-ish random orthogonal point: Gram-Schmidt on a Gaussian
    /// matrix (both connected components of `O(n)` occur).
    pub fn random(n: usize, rng: &mut SplitMix64) -> Self {
        loop {
            let mut rows: Vec<Vec<f64>> = (0..n).map(|_| rng.normal_vec(n)).collect();
            if let Some(coords) = gram_schmidt(&mut rows) {
                return Self { n, coords };
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Ambient dimension `n²`.
    pub fn ambient_dim(&self) -> usize {
        self.n * self.n
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn point(&self) -> Point {
        Point::new(self.coords.clone())
    }

    pub fn to_matrix(&self) -> Mat {
        Mat::from_vec(self.n, self.n, self.coords.clone()).expect("square by construction")
    }

    /// Entry `x_{ij}` (0-based row/column).
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.coords[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.coords[i * self.n..(i + 1) * self.n]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.entry(i, j)).collect()
    }
}

fn orthonormality_defect(n: usize, coords: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for s in 0..n {
        let row_s = &coords[s * n..(s + 1) * n];
        worst = worst.max((dot(row_s, row_s) - 1.0).abs());
        for r in (s + 1)..n {
            let row_r = &coords[r * n..(r + 1) * n];
            worst = worst.max(dot(row_s, row_r).abs());
        }
    }
    worst
}

/// Modified Gram-Schmidt with one re-orthogonalization pass; `None` when
/// a pivot degenerates.
fn gram_schmidt(rows: &mut [Vec<f64>]) -> Option<Vec<f64>> {
    let n = rows.len();
    for i in 0..n {
        for _ in 0..2 {
            for j in 0..i {
                let proj = dot(&rows[i], &rows[j]);
                let prev = rows[j].clone();
                for (r, p) in rows[i].iter_mut().zip(prev.iter()) {
                    *r -= proj * p;
                }
            }
        }
        let norm = libm::sqrt(dot(&rows[i], &rows[i]));
        if norm < 1e-6 {
            return None;
        }
        for r in rows[i].iter_mut() {
            *r /= norm;
        }
    }
    let mut flat = Vec::with_capacity(n * n);
    for row in rows {
        flat.extend_from_slice(row);
    }
    Some(flat)
}

/// Index of constraint `F_pq` (0-based `p < q`) in the system order
/// `F_1,…,F_n, F_{12}, F_{13}, …`.
pub fn pair_index(n: usize, p: usize, q: usize) -> usize {
    debug_assert!(p < q && q < n);
    n + p * (2 * n - p - 1) / 2 + (q - p - 1)
}

/// Lexicographically ordered index pairs `(α, β)`, `α < β` (0-based).
pub fn index_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for a in 0..n {
        for b in (a + 1)..n {
            pairs.push((a, b));
        }
    }
    pairs
}

/// The constraint system whose level set is `𝒪(n)`: fields
/// `F_s = ½‖x_s‖²` and `F_pq = ⟨x_p, x_q⟩` with their closed-form
/// gradients and (constant) Hessians, at the regular value
/// `(½,…,½, 0,…,0)`.
pub fn constraint_system(n: usize) -> Result<ConstraintSystem> {
    if n < 2 {
        return Err(Error::InvalidParameter("n must be at least 2"));
    }
    let m = n * n;
    let mut fields = Vec::with_capacity(n + n * (n - 1) / 2);
    for s in 0..n {
        fields.push(ScalarField::new(
            m,
            move |x| 0.5 * dot(&x[s * n..(s + 1) * n], &x[s * n..(s + 1) * n]),
            move |x| {
                let mut g = vec![0.0; m];
                g[s * n..(s + 1) * n].copy_from_slice(&x[s * n..(s + 1) * n]);
                g
            },
            move |_| {
                let mut h = Mat::zeros(m, m);
                for j in 0..n {
                    h[(s * n + j, s * n + j)] = 1.0;
                }
                h
            },
        ));
    }
    for (p, q) in index_pairs(n) {
        fields.push(ScalarField::new(
            m,
            move |x| dot(&x[p * n..(p + 1) * n], &x[q * n..(q + 1) * n]),
            move |x| {
                let mut g = vec![0.0; m];
                g[p * n..(p + 1) * n].copy_from_slice(&x[q * n..(q + 1) * n]);
                g[q * n..(q + 1) * n].copy_from_slice(&x[p * n..(p + 1) * n]);
                g
            },
            move |_| {
                let mut h = Mat::zeros(m, m);
                for j in 0..n {
                    h[(p * n + j, q * n + j)] = 1.0;
                    h[(q * n + j, p * n + j)] = 1.0;
                }
                h
            },
        ));
    }
    let mut c = vec![0.5; n];
    c.extend(vec![0.0; n * (n - 1) / 2]);
    ConstraintSystem::new(fields, c)
}

/// A signed elementary skew-symmetric generator
/// `Ω_αβ = (−1)^{α+β}(e_α⊗e_β − e_β⊗e_α)`, `α < β` (0-based indices;
/// the sign uses the same parity as the 1-based convention).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SkewBasisElement {
    pub alpha: usize,
    pub beta: usize,
}

impl SkewBasisElement {
    pub fn new(alpha: usize, beta: usize) -> Result<Self> {
        if alpha >= beta {
            return Err(Error::InvalidParameter("need alpha < beta"));
        }
        Ok(Self { alpha, beta })
    }

    pub fn sign(&self) -> f64 {
        if (self.alpha + self.beta).is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    /// The antisymmetric `n×n` matrix this element generates.
    pub fn matrix(&self, n: usize) -> Mat {
        let mut omega = Mat::zeros(n, n);
        omega[(self.alpha, self.beta)] = self.sign();
        omega[(self.beta, self.alpha)] = -self.sign();
        omega
    }
}

/// The tangent vector `ω̃_αβ(x̃) = 𝓘(X·Ω_αβ)` as an ambient vector.
fn omega_tilde(p: &OrthogonalPoint, alpha: usize, beta: usize) -> Vec<f64> {
    let n = p.n();
    let sign = SkewBasisElement { alpha, beta }.sign();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + beta] = sign * p.entry(i, alpha);
        v[i * n + alpha] = -sign * p.entry(i, beta);
    }
    v
}

/// Tangent basis `{ω̃_αβ}` of `𝒪(n)` at `p`, pairs in lexicographic
/// order. The vectors are mutually orthogonal with squared norm 2 and
/// exactly tangent by construction.
pub fn tangent_basis(p: &OrthogonalPoint) -> TangentBasis {
    let vectors = index_pairs(p.n())
        .into_iter()
        .map(|(a, b)| omega_tilde(p, a, b))
        .collect();
    TangentBasis::new(p.point(), vectors)
}

/// The `n = 3` tangent basis in the order
/// `(ν₁, ν₂, ν₃) = (ω̃₂₃, ω̃₁₃, ω̃₁₂)`, which matches the symmetry of
/// `O(3)` (a view of [`tangent_basis`] with reversed pair order).
pub fn nu_basis(p: &OrthogonalPoint) -> Result<TangentBasis> {
    if p.n() != 3 {
        return Err(Error::InvalidParameter(
            "nu basis is defined for n = 3 only",
        ));
    }
    let vectors = vec![
        omega_tilde(p, 1, 2),
        omega_tilde(p, 0, 2),
        omega_tilde(p, 0, 1),
    ];
    Ok(TangentBasis::new(p.point(), vectors))
}

/// Coordinates of an antisymmetric matrix in the `Ω_αβ` basis,
/// lexicographic pair order: `c_αβ = (−1)^{α+β}·Ω[α][β]`. The tangent
/// vector `𝓘(X·Ω)` then has the same coordinates in the `ω̃` basis.
pub fn skew_coordinates(omega: &Mat) -> Result<Vec<f64>> {
    require_antisymmetric(omega)?;
    let n = omega.rows();
    Ok(index_pairs(n)
        .into_iter()
        .map(|(a, b)| SkewBasisElement { alpha: a, beta: b }.sign() * omega[(a, b)])
        .collect())
}

fn require_antisymmetric(omega: &Mat) -> Result<()> {
    if !omega.is_square() {
        return Err(Error::DimensionMismatch {
            expected: omega.rows(),
            actual: omega.cols(),
        });
    }
    let n = omega.rows();
    let mut defect = 0.0f64;
    for i in 0..n {
        for j in i..n {
            defect = defect.max((omega[(i, j)] + omega[(j, i)]).abs());
        }
    }
    if defect > 1e-12 {
        return Err(Error::NotAntisymmetric { defect });
    }
    Ok(())
}

fn check_cost_dim(cost: &ScalarField, p: &OrthogonalPoint) -> Result<()> {
    if cost.dim() != p.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: p.ambient_dim(),
            actual: cost.dim(),
        });
    }
    Ok(())
}

/// Annexe-style closed-form multipliers on `𝒪(n)`:
/// `σ_s = ⟨∇G, ∇F_s⟩`, `σ_pq = ½⟨∇G, ∇F_pq⟩`, in constraint order.
/// Valid only on the manifold, where the Gramian is `diag(I_n, 2I)`.
pub fn sigma_closed_form(cost: &ScalarField, p: &OrthogonalPoint) -> Result<Vec<f64>> {
    check_cost_dim(cost, p)?;
    let n = p.n();
    let g = cost.gradient_raw(p.coords());
    let mut sigma = Vec::with_capacity(n + n * (n - 1) / 2);
    for s in 0..n {
        sigma.push(dot(&g[s * n..(s + 1) * n], p.row(s)));
    }
    for (pp, qq) in index_pairs(n) {
        let a = dot(&g[pp * n..(pp + 1) * n], p.row(qq));
        let b = dot(&g[qq * n..(qq + 1) * n], p.row(pp));
        sigma.push(0.5 * (a + b));
    }
    Ok(sigma)
}

/// The Gramian determinant on `𝒪(n)` is the constant `2^{n(n−1)/2}`.
/// The closed form is cross-checked against the numerically computed
/// determinant of the constraint Gramian at `p` (1e-9 relative).
pub fn gramian_determinant(p: &OrthogonalPoint) -> Result<f64> {
    let n = p.n();
    let closed = libm::pow(2.0, (n * (n - 1) / 2) as f64);
    let cs = constraint_system(n)?;
    let numeric = lu_det(&cs.gramian_matrix(&p.point())?);
    if (numeric - closed).abs() > 1e-9 * closed {
        return Err(Error::OracleMismatch {
            expected: closed,
            actual: numeric,
        });
    }
    Ok(closed)
}

/// Restricted Hessian of `cost` on `𝒪(n)` at `p`, in the lexicographic
/// `ω̃` basis, evaluated through the explicit `(γτ)(αβ)` component
/// formula with `ε = (−1)^{α+β+γ+τ}`.
///
/// This is the primary path; it must agree with the generic
/// [`crate::gramian::restricted_hessian`] congruence path to 1e-10 (the
/// tests enforce that). The returned multipliers are the closed forms of
/// [`sigma_closed_form`].
pub fn restricted_hessian_on(cost: &ScalarField, p: &OrthogonalPoint) -> Result<RestrictedHessian> {
    check_cost_dim(cost, p)?;
    let n = p.n();
    let grad = cost.gradient_raw(p.coords());
    let hess = ambient_hessian(cost, &p.point())?;
    let x = |i: usize, j: usize| p.entry(i, j);
    let g = |i: usize, j: usize| grad[i * n + j];
    let h2 = |a: usize, b: usize, c: usize, d: usize| hess[(a * n + b, c * n + d)];
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };

    // row sums sigma_s and half-sums sigma_pq reused across entries
    let sig_s: Vec<f64> = (0..n)
        .map(|s| (0..n).map(|i| x(s, i) * g(s, i)).sum())
        .collect();
    let pairs = index_pairs(n);
    let sig_pq: Vec<f64> = pairs
        .iter()
        .map(|&(pp, qq)| {
            0.5 * (0..n)
                .map(|i| x(qq, i) * g(pp, i) + x(pp, i) * g(qq, i))
                .sum::<f64>()
        })
        .collect();

    let d = pairs.len();
    let mut matrix = Mat::zeros(d, d);
    for (row, &(gamma, tau)) in pairs.iter().enumerate() {
        for (col, &(alpha, beta)) in pairs.iter().enumerate() {
            let eps = if (alpha + beta + gamma + tau) % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            let mut term1 = 0.0;
            for a in 0..n {
                for c in 0..n {
                    term1 += x(a, gamma) * x(c, alpha) * h2(a, tau, c, beta)
                        - x(a, gamma) * x(c, beta) * h2(a, tau, c, alpha)
                        - x(a, tau) * x(c, alpha) * h2(a, gamma, c, beta)
                        + x(a, tau) * x(c, beta) * h2(a, gamma, c, alpha);
                }
            }
            let mut term2 = 0.0;
            for (s, sig) in sig_s.iter().enumerate() {
                term2 += sig
                    * (x(s, tau) * x(s, beta) * delta(gamma, alpha)
                        - x(s, gamma) * x(s, beta) * delta(tau, alpha)
                        - x(s, tau) * x(s, alpha) * delta(gamma, beta)
                        + x(s, gamma) * x(s, alpha) * delta(tau, beta));
            }
            let mut term3 = 0.0;
            for (k, &(pp, qq)) in pairs.iter().enumerate() {
                term3 += sig_pq[k]
                    * (x(pp, tau) * x(qq, beta) * delta(gamma, alpha)
                        - x(pp, gamma) * x(qq, beta) * delta(tau, alpha)
                        - x(pp, tau) * x(qq, alpha) * delta(gamma, beta)
                        + x(pp, gamma) * x(qq, alpha) * delta(tau, beta)
                        + x(qq, tau) * x(pp, beta) * delta(gamma, alpha)
                        - x(qq, gamma) * x(pp, beta) * delta(tau, alpha)
                        - x(qq, tau) * x(pp, alpha) * delta(gamma, beta)
                        + x(qq, gamma) * x(pp, alpha) * delta(tau, beta));
            }
            matrix[(row, col)] = eps * (term1 - term2 - term3);
        }
    }
    matrix.symmetrize();

    let mut multipliers = sig_s;
    multipliers.extend(sig_pq);
    Ok(RestrictedHessian {
        matrix,
        basis: tangent_basis(p),
        multipliers,
    })
}

/// `exp(tΩ)` for antisymmetric `Ω`, via scaling-and-squaring on the
/// truncated series. The result is orthogonal to ~1e-12.
pub fn matrix_exponential(omega: &Mat, t: f64) -> Result<Mat> {
    require_antisymmetric(omega)?;
    let n = omega.rows();
    let mut squarings = 0u32;
    let mut scaled = omega.scale(t);
    while scaled.inf_norm() * n as f64 > 0.5 && squarings < 64 {
        scaled = scaled.scale(0.5);
        squarings += 1;
    }
    let mut result = Mat::identity(n);
    let mut term = Mat::identity(n);
    for k in 1..=24 {
        term = term.matmul(&scaled).scale(1.0 / k as f64);
        result = result.add(&term);
        if term.inf_norm() < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    Ok(result)
}

/// Central second difference of `t ↦ G(𝓘(X·exp(tΩ)))` at `t = 0`.
///
/// The curves `X·exp(tΩ)` are geodesics of the induced (bi-invariant)
/// metric, so this equals the restricted-Hessian quadratic form
/// `Hess G_S(ω, ω)` with `ω = 𝓘(XΩ)` — at every on-manifold point, which
/// makes it an oracle for the closed-form Hessian paths.
pub fn geodesic_second_derivative(
    cost: &ScalarField,
    p: &OrthogonalPoint,
    omega: &Mat,
    h: f64,
) -> Result<f64> {
    check_cost_dim(cost, p)?;
    if h <= 0.0 {
        return Err(Error::InvalidParameter("geodesic step must be > 0"));
    }
    require_antisymmetric(omega)?;
    if omega.rows() != p.n() {
        return Err(Error::DimensionMismatch {
            expected: p.n(),
            actual: omega.rows(),
        });
    }
    let x = p.to_matrix();
    let eval = |t: f64| -> Result<f64> {
        let e = matrix_exponential(omega, t)?;
        let moved = x.matmul(&e);
        Ok(cost.value_raw(moved.as_slice()))
    };
    let plus = eval(h)?;
    let center = cost.value_raw(p.coords());
    let minus = eval(-h)?;
    Ok((plus - 2.0 * center + minus) / (h * h))
}

/// Default step for the geodesic second-difference oracle.
pub const GEODESIC_ORACLE_STEP: f64 = 1e-3;

/// The 2-power cost `G(X) = ½ Σᵢ ‖X − Rᵢ‖²_F` on `ℝ^{n²}` for reference
/// matrices `Rᵢ`: gradient `k(x̃ − r̃)` with `r̃` the flattened mean,
/// Hessian `k·I`.
pub fn power2_field(n: usize, samples: &[Mat]) -> Result<ScalarField> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("need at least one sample matrix"));
    }
    let m = n * n;
    let mut flats = Vec::with_capacity(samples.len());
    for s in samples {
        if s.rows() != n || s.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: s.rows(),
            });
        }
        flats.push(s.as_slice().to_vec());
    }
    let k = flats.len() as f64;
    let mut mean = vec![0.0; m];
    for f in &flats {
        for (mi, fi) in mean.iter_mut().zip(f.iter()) {
            *mi += fi / k;
        }
    }
    let mean_g = mean.clone();
    Ok(ScalarField::new(
        m,
        move |x| {
            0.5 * flats
                .iter()
                .map(|r| {
                    x.iter()
                        .zip(r.iter())
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                })
                .sum::<f64>()
        },
        move |x| {
            x.iter()
                .zip(mean_g.iter())
                .map(|(a, b)| k * (a - b))
                .collect()
        },
        move |_| Mat::identity(m).scale(k),
    ))
}
