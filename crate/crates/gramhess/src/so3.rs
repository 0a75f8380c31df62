//! 2-power (Procrustes) costs on `SO(3)` built from rotation samples:
//! the mean-column Hessian coefficients, the quaternion parametrization
//! of the five critical-point families of the three-sample α-cost, their
//! eigenvalue classification, and the α-sweeps behind the bifurcation
//! picture.
//!
//! The cost is `G(X) = ½ Σᵢ ‖X − Rᵢ‖²_F`; in flattened coordinates its
//! gradient is `k(x̃ − r̃)` with `r̃` the flattened sample mean, so every
//! closed form below depends on the samples only through the mean matrix.

use alloc::vec;
use alloc::vec::Vec;

use crate::field::ScalarField;
use crate::gramian::RestrictedHessian;
use crate::linalg::{dot, Mat};
use crate::orthogonal::{self, OrthogonalPoint};
use crate::stability::symmetric_eigenvalues;
use crate::{Error, Result};

/// A set of sample rotations with the cached mean used by the cost and
/// the Hessian coefficients. Samples must be orthogonal with determinant
/// +1, both within 1e-10.
#[derive(Debug, Clone)]
pub struct RotationSampleSet {
    samples: Vec<Mat>,
    mean: Mat,
    mean_flat: Vec<f64>,
}

impl RotationSampleSet {
    pub fn new(samples: Vec<Mat>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidParameter("need at least one sample rotation"));
        }
        for s in &samples {
            if s.rows() != 3 || s.cols() != 3 {
                return Err(Error::DimensionMismatch {
                    expected: 3,
                    actual: s.rows().max(s.cols()),
                });
            }
            let p = OrthogonalPoint::from_matrix(s)?; // orthogonality gate
            let det = crate::linalg::lu_det(s);
            if (det - 1.0).abs() > 1e-10 {
                return Err(Error::OffManifold {
                    defect: (det - 1.0).abs(),
                });
            }
            drop(p);
        }
        let k = samples.len() as f64;
        let mut mean = Mat::zeros(3, 3);
        for s in &samples {
            mean = mean.add(&s.scale(1.0 / k));
        }
        let mean_flat = mean.as_slice().to_vec();
        Ok(Self {
            samples,
            mean,
            mean_flat,
        })
    }

    /// The three-sample family of x-axis rotations
    /// `R₁ = diag(1,−1,−1)`, `R₂ = rot_x(π/2)`, `R₃ = rot_x(α)`,
    /// `α ∈ [−π, π]`.
    pub fn alpha_family(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let r1 = Mat::from_rows(&[&[1.0, 0.0, 0.0], &[0.0, -1.0, 0.0], &[0.0, 0.0, -1.0]]);
        let r2 = Mat::from_rows(&[&[1.0, 0.0, 0.0], &[0.0, 0.0, -1.0], &[0.0, 1.0, 0.0]]);
        let (sa, ca) = (libm::sin(alpha), libm::cos(alpha));
        let r3 = Mat::from_rows(&[&[1.0, 0.0, 0.0], &[0.0, ca, -sa], &[0.0, sa, ca]]);
        Self::new(vec![r1, r2, r3])
    }

    pub fn k(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> &[Mat] {
        &self.samples
    }

    /// Mean matrix `R̄ = (1/k) Σ Rᵢ`.
    pub fn mean(&self) -> &Mat {
        &self.mean
    }

    /// Flattened mean `r̃`.
    pub fn mean_flat(&self) -> &[f64] {
        &self.mean_flat
    }

    /// Column `j` of the mean matrix (the `s_j` vectors of the
    /// coefficient formulas).
    pub fn mean_col(&self, j: usize) -> Vec<f64> {
        self.mean.col(j)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha.abs() > core::f64::consts::PI + 1e-12 {
        return Err(Error::InvalidParameter("alpha must lie in [-pi, pi]"));
    }
    Ok(())
}

/// The 2-power cost of a sample set as a `ScalarField` on `ℝ⁹`:
/// value `½ Σᵢ ‖x̃ − r̃ᵢ‖²`, gradient `k(x̃ − r̃)`, Hessian `k·I₉`.
pub fn power2_cost(samples: &RotationSampleSet) -> ScalarField {
    orthogonal::power2_field(3, samples.samples()).expect("validated 3x3 samples")
}

/// Restricted Hessian of the 2-power cost at `p` in the
/// `(ν₁, ν₂, ν₃) = (ω̃₂₃, ω̃₁₃, ω̃₁₂)` basis, from the mean-column
/// coefficient formulas: with `yᵢ` the columns of `X` and `sᵢ` the
/// columns of `R̄`,
///
/// ```text
/// h̄₁₁ = k(⟨y₂,s₂⟩ + ⟨y₃,s₃⟩)    h̄₁₂ = −k/2(⟨y₁,s₂⟩ + ⟨y₂,s₁⟩)
/// h̄₂₂ = k(⟨y₁,s₁⟩ + ⟨y₃,s₃⟩)    h̄₁₃ = −k/2(⟨y₁,s₃⟩ + ⟨y₃,s₁⟩)
/// h̄₃₃ = k(⟨y₁,s₁⟩ + ⟨y₂,s₂⟩)    h̄₂₃ = −k/2(⟨y₂,s₃⟩ + ⟨y₃,s₂⟩)
/// ```
///
/// Valid at every point of `𝒪(3)`, not only at critical points. The
/// multipliers are the closed forms of the cost at `p`.
pub fn hessian_coefficients(
    p: &OrthogonalPoint,
    samples: &RotationSampleSet,
) -> Result<RestrictedHessian> {
    if p.n() != 3 {
        return Err(Error::InvalidParameter(
            "hessian coefficients require n = 3",
        ));
    }
    let k = samples.k() as f64;
    let y: Vec<Vec<f64>> = (0..3).map(|j| p.col(j)).collect();
    let s: Vec<Vec<f64>> = (0..3).map(|j| samples.mean_col(j)).collect();
    let ys = |i: usize, j: usize| dot(&y[i], &s[j]);

    let mut h = Mat::zeros(3, 3);
    h[(0, 0)] = k * (ys(1, 1) + ys(2, 2));
    h[(1, 1)] = k * (ys(0, 0) + ys(2, 2));
    h[(2, 2)] = k * (ys(0, 0) + ys(1, 1));
    h[(0, 1)] = -0.5 * k * (ys(0, 1) + ys(1, 0));
    h[(0, 2)] = -0.5 * k * (ys(0, 2) + ys(2, 0));
    h[(1, 2)] = -0.5 * k * (ys(1, 2) + ys(2, 1));
    h[(1, 0)] = h[(0, 1)];
    h[(2, 0)] = h[(0, 2)];
    h[(2, 1)] = h[(1, 2)];

    let cost = power2_cost(samples);
    let multipliers = orthogonal::sigma_closed_form(&cost, p)?;
    Ok(RestrictedHessian {
        matrix: h,
        basis: orthogonal::nu_basis(p)?,
        multipliers,
    })
}

/// A unit quaternion `(q⁰, q¹, q², q³)`, validated to `|‖q‖² − 1| ≤ 1e-12`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitQuaternion {
    q: [f64; 4],
}

impl UnitQuaternion {
    pub fn new(q: [f64; 4]) -> Result<Self> {
        let norm_sq = q.iter().map(|v| v * v).sum::<f64>();
        if (norm_sq - 1.0).abs() > 1e-12 {
            return Err(Error::NotUnitQuaternion { norm_sq });
        }
        Ok(Self { q })
    }

    pub fn components(&self) -> [f64; 4] {
        self.q
    }

    pub fn negated(&self) -> Self {
        Self {
            q: [-self.q[0], -self.q[1], -self.q[2], -self.q[3]],
        }
    }
}

/// The rotation matrix of a unit quaternion. `q` and `−q` map to the
/// same rotation; no silent normalization happens on the way in.
pub fn quaternion_to_rotation(q: &UnitQuaternion) -> Mat {
    let [q0, q1, q2, q3] = q.components();
    Mat::from_rows(&[
        &[
            q0 * q0 + q1 * q1 - q2 * q2 - q3 * q3,
            2.0 * (q1 * q2 - q0 * q3),
            2.0 * (q1 * q3 + q0 * q2),
        ],
        &[
            2.0 * (q1 * q2 + q0 * q3),
            q0 * q0 - q1 * q1 + q2 * q2 - q3 * q3,
            2.0 * (q2 * q3 - q0 * q1),
        ],
        &[
            2.0 * (q1 * q3 - q0 * q2),
            2.0 * (q2 * q3 + q0 * q1),
            q0 * q0 - q1 * q1 - q2 * q2 + q3 * q3,
        ],
    ])
}

/// Value of the critical-set quartic
/// `Q₂,α(Z) = A·Z⁴ − A·Z² + B` with `A = 128s⁴ − 32s² + 4`,
/// `B = −16s⁶ + 16s⁵c + 28s⁴ − 8s² + 1`, `s = sin(α/2)`, `c = cos(α/2)`.
pub fn q_value(alpha: f64, z: f64) -> f64 {
    let (a, b) = q_coefficients(alpha);
    let z2 = z * z;
    a * z2 * z2 - a * z2 + b
}

fn q_coefficients(alpha: f64) -> (f64, f64) {
    let s = libm::sin(0.5 * alpha);
    let c = libm::cos(0.5 * alpha);
    let s2 = s * s;
    let s4 = s2 * s2;
    let s5 = s4 * s;
    let s6 = s4 * s2;
    let a = 128.0 * s4 - 32.0 * s2 + 4.0;
    let b = -16.0 * s6 + 16.0 * s5 * c + 28.0 * s4 - 8.0 * s2 + 1.0;
    (a, b)
}

/// Smallest and largest non-negative real roots of `Q₂,α`, solved as a
/// quadratic in `Z²` (the polynomial has only even powers).
///
/// The leading coefficient `A = 128s⁴ − 32s² + 4` has negative
/// discriminant and is therefore never zero; an assertion guards that
/// analysis instead of a degenerate-quartic branch. On `[-π, π]` the
/// constant term stays ≥ 0, touching zero only at `α = −π/2`, where the
/// smaller root degenerates to exactly 0 and is reported as such.
pub fn solve_q(alpha: f64) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    let (a, b) = q_coefficients(alpha);
    debug_assert!(a > 0.0, "leading coefficient is provably positive");
    roots_of_even_quartic(a, b).ok_or(Error::NoPositiveRoots { alpha })
}

/// Positive roots of `A·Z⁴ − A·Z² + B` via the quadratic formula in
/// `Z²`; `None` when the discriminant is negative (no real roots) or the
/// constant term is negative (no root pair in `[0, 1]`).
fn roots_of_even_quartic(a: f64, b: f64) -> Option<(f64, f64)> {
    let disc = 1.0 - 4.0 * b / a;
    if disc < -1e-12 || b < -1e-9 {
        return None;
    }
    let root = libm::sqrt(disc.max(0.0));
    let w_minus = (0.5 * (1.0 - root)).clamp(0.0, 1.0);
    let w_plus = (0.5 * (1.0 + root)).clamp(0.0, 1.0);
    Some((libm::sqrt(w_minus), libm::sqrt(w_plus)))
}

/// The five critical-point families of the three-sample α-cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SetLabel {
    Black,
    Green,
    Pink,
    Red,
    Blue,
}

impl SetLabel {
    pub const ALL: [SetLabel; 5] = [
        SetLabel::Black,
        SetLabel::Green,
        SetLabel::Pink,
        SetLabel::Red,
        SetLabel::Blue,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SetLabel::Black => "black",
            SetLabel::Green => "green",
            SetLabel::Pink => "pink",
            SetLabel::Red => "red",
            SetLabel::Blue => "blue",
        }
    }
}

impl core::fmt::Display for SetLabel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for SetLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "black" => Ok(SetLabel::Black),
            "green" => Ok(SetLabel::Green),
            "pink" => Ok(SetLabel::Pink),
            "red" => Ok(SetLabel::Red),
            "blue" => Ok(SetLabel::Blue),
            _ => Err(Error::InvalidParameter("unknown set label")),
        }
    }
}

/// Nature of a critical point as read off the restricted-Hessian
/// eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    LocalMin,
    LocalMax,
    Saddle,
    Degenerate,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::LocalMin => "local-min",
            Classification::LocalMax => "local-max",
            Classification::Saddle => "saddle",
            Classification::Degenerate => "degenerate",
        }
    }
}

impl core::fmt::Display for Classification {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Classify by eigenvalue signs with the scale-aware zero band
/// `|λ| ≤ 1e-8·(1 + scale)`: any eigenvalue inside the band makes the
/// point degenerate; otherwise all positive is a minimum, all negative a
/// maximum, a sign mix a saddle.
pub fn classify(eigenvalues: &[f64], scale: f64) -> Classification {
    let tol = 1e-8 * (1.0 + scale);
    if eigenvalues.iter().any(|l| l.abs() <= tol) {
        return Classification::Degenerate;
    }
    let pos = eigenvalues.iter().filter(|l| **l > tol).count();
    if pos == eigenvalues.len() {
        Classification::LocalMin
    } else if pos == 0 {
        Classification::LocalMax
    } else {
        Classification::Saddle
    }
}

/// One classified critical point: where it is (quaternion and rotation),
/// the multipliers, the restricted Hessian in the ν basis, the sorted
/// eigenvalues, and the classification.
#[derive(Debug, Clone)]
pub struct CriticalPointReport {
    pub set_label: SetLabel,
    pub quaternion: UnitQuaternion,
    pub rotation: OrthogonalPoint,
    pub multipliers: Vec<f64>,
    pub hessian: RestrictedHessian,
    pub eigenvalues: Vec<f64>,
    pub classification: Classification,
}

fn report_for(alpha: f64, label: SetLabel, q: UnitQuaternion) -> Result<CriticalPointReport> {
    let samples = RotationSampleSet::alpha_family(alpha)?;
    let rotation = OrthogonalPoint::from_matrix(&quaternion_to_rotation(&q))?;
    let hessian = hessian_coefficients(&rotation, &samples)?;
    let eigenvalues = symmetric_eigenvalues(&hessian.matrix)?;
    let classification = classify(&eigenvalues, hessian.matrix.inf_norm());
    Ok(CriticalPointReport {
        set_label: label,
        quaternion: q,
        rotation,
        multipliers: hessian.multipliers.clone(),
        hessian,
        eigenvalues,
        classification,
    })
}

fn black_quaternion(t: f64, positive_branch: bool) -> Result<UnitQuaternion> {
    if !(-1.0..=1.0).contains(&t) {
        return Err(Error::InvalidParameter(
            "black-set parameter t must be in [-1, 1]",
        ));
    }
    let w = libm::sqrt((1.0 - t * t).max(0.0));
    let q2 = if positive_branch { w } else { -w };
    UnitQuaternion::new([0.0, 0.0, q2, t])
}

fn family_quaternion(label: SetLabel, x2: f64) -> Result<UnitQuaternion> {
    let w = libm::sqrt((1.0 - x2 * x2).max(0.0));
    let q0 = match label {
        SetLabel::Green | SetLabel::Red => w,
        SetLabel::Pink | SetLabel::Blue => -w,
        SetLabel::Black => return Err(Error::InvalidParameter("black is parametrized by t")),
    };
    UnitQuaternion::new([q0, x2, 0.0, 0.0])
}

/// All five critical families at `alpha`: the black circle sampled over
/// `t_grid` (both signs of `√(1−t²)` emitted as distinct reports, in the
/// order +,− per t), then green, pink, red, blue from the quartic roots.
/// A quartic failure aborts the call; [`sweep`] degrades per-set instead.
pub fn critical_sets(alpha: f64, t_grid: &[f64]) -> Result<Vec<CriticalPointReport>> {
    check_alpha(alpha)?;
    let mut reports = Vec::with_capacity(2 * t_grid.len() + 4);
    for &t in t_grid {
        reports.push(report_for(
            alpha,
            SetLabel::Black,
            black_quaternion(t, true)?,
        )?);
        reports.push(report_for(
            alpha,
            SetLabel::Black,
            black_quaternion(t, false)?,
        )?);
    }
    let (x2_min, x2_max) = solve_q(alpha)?;
    for (label, x2) in [
        (SetLabel::Green, x2_min),
        (SetLabel::Pink, x2_min),
        (SetLabel::Red, x2_max),
        (SetLabel::Blue, x2_max),
    ] {
        reports.push(report_for(alpha, label, family_quaternion(label, x2)?)?);
    }
    Ok(reports)
}

/// Criticality residual `‖∇G − Σ σᵢ ∇Fᵢ‖_∞` at the report's rotation,
/// recomputed through the generic Gramian-solve path (independent of the
/// closed forms that built the report). Points of a genuine critical set
/// come out ≤ 1e-9.
pub fn verify_critical(report: &CriticalPointReport, cost: &ScalarField) -> Result<f64> {
    let cs = orthogonal::constraint_system(3)?;
    let g = crate::gramian::induced_gradient(&cs, cost, &report.rotation.point())?;
    Ok(crate::linalg::inf_norm(&g))
}

/// Closed-form black-set eigenvalues
/// `{0, −3 ± √(3 + 2 sin α − 2 cos α)}`, ascending.
pub fn black_eigenvalues_closed_form(alpha: f64) -> [f64; 3] {
    let root = libm::sqrt(3.0 + 2.0 * libm::sin(alpha) - 2.0 * libm::cos(alpha));
    [-3.0 - root, -3.0 + root, 0.0]
}

/// One sweep row: a set evaluated at one `alpha`. Sets whose quartic has
/// no admissible roots carry `None` everywhere (reported, not assumed).
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub alpha: f64,
    pub set: SetLabel,
    pub eigenvalues: Option<[f64; 3]>,
    pub classification: Option<Classification>,
    pub quaternion: Option<[f64; 4]>,
    /// Closed-form eigenvalue check, black rows only.
    pub closed_form: Option<[f64; 3]>,
}

/// Evaluate all five sets over an α-grid. The black set is represented
/// by `t = 0` on its positive branch (its eigenvalues do not depend on
/// `t`). Rows are ordered by `(alpha, set label)` regardless of the
/// input grid order.
pub fn sweep(alpha_grid: &[f64]) -> Result<Vec<SweepRow>> {
    let mut alphas = alpha_grid.to_vec();
    alphas.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    let mut rows = Vec::with_capacity(alphas.len() * 5);
    for &alpha in &alphas {
        check_alpha(alpha)?;
        let mut per_alpha: Vec<SweepRow> = Vec::with_capacity(5);

        let black = report_for(alpha, SetLabel::Black, black_quaternion(0.0, true)?)?;
        per_alpha.push(SweepRow {
            alpha,
            set: SetLabel::Black,
            eigenvalues: Some([
                black.eigenvalues[0],
                black.eigenvalues[1],
                black.eigenvalues[2],
            ]),
            classification: Some(black.classification),
            quaternion: Some(black.quaternion.components()),
            closed_form: Some(black_eigenvalues_closed_form(alpha)),
        });

        let roots = solve_q(alpha);
        for label in [
            SetLabel::Green,
            SetLabel::Pink,
            SetLabel::Red,
            SetLabel::Blue,
        ] {
            let row = match &roots {
                Ok((x2_min, x2_max)) => {
                    let x2 = match label {
                        SetLabel::Green | SetLabel::Pink => *x2_min,
                        _ => *x2_max,
                    };
                    let report = report_for(alpha, label, family_quaternion(label, x2)?)?;
                    SweepRow {
                        alpha,
                        set: label,
                        eigenvalues: Some([
                            report.eigenvalues[0],
                            report.eigenvalues[1],
                            report.eigenvalues[2],
                        ]),
                        classification: Some(report.classification),
                        quaternion: Some(report.quaternion.components()),
                        closed_form: None,
                    }
                }
                Err(Error::NoPositiveRoots { .. }) => SweepRow {
                    alpha,
                    set: label,
                    eigenvalues: None,
                    classification: None,
                    quaternion: None,
                    closed_form: None,
                },
                Err(e) => return Err(e.clone()),
            };
            per_alpha.push(row);
        }
        per_alpha.sort_by(|a, b| a.set.as_str().cmp(b.set.as_str()));
        rows.extend(per_alpha);
    }
    Ok(rows)
}

/// Locate the α values where a family's Hessian determinant changes
/// sign: crossings are bracketed on a scan grid and bisected until the
/// eigenvalue nearest zero has magnitude ≤ 1e-10 (or the bracket is
/// exhausted at f64 resolution). Returns the crossings found in
/// `[lo, hi]`, ascending. The black family is rejected — its spectrum
/// has a structural zero, so `det H` never crosses.
pub fn bifurcation_alphas(
    label: SetLabel,
    lo: f64,
    hi: f64,
    scan_points: usize,
) -> Result<Vec<f64>> {
    check_alpha(lo)?;
    check_alpha(hi)?;
    if lo >= hi {
        return Err(Error::InvalidParameter("need lo < hi"));
    }
    if scan_points < 2 {
        return Err(Error::InvalidParameter("need at least two scan points"));
    }

    let det_at = |alpha: f64| -> Result<f64> {
        let (x2_min, x2_max) = solve_q(alpha)?;
        let x2 = match label {
            SetLabel::Green | SetLabel::Pink => x2_min,
            SetLabel::Red | SetLabel::Blue => x2_max,
            SetLabel::Black => {
                return Err(Error::InvalidParameter(
                    "black-set eigenvalues have a structural zero; no det crossing",
                ))
            }
        };
        let report = report_for(alpha, label, family_quaternion(label, x2)?)?;
        Ok(crate::linalg::lu_det(&report.hessian.matrix))
    };
    let min_abs_eig = |alpha: f64| -> Result<f64> {
        let (x2_min, x2_max) = solve_q(alpha)?;
        let x2 = match label {
            SetLabel::Green | SetLabel::Pink => x2_min,
            _ => x2_max,
        };
        let report = report_for(alpha, label, family_quaternion(label, x2)?)?;
        Ok(report
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |m, l| m.min(l.abs())))
    };

    let mut crossings = Vec::new();
    let step = (hi - lo) / (scan_points - 1) as f64;
    let mut prev_alpha = lo;
    let mut prev_det = det_at(lo)?;
    for i in 1..scan_points {
        let alpha = lo + i as f64 * step;
        let det = det_at(alpha)?;
        if prev_det == 0.0 {
            crossings.push(prev_alpha);
        } else if det != 0.0 && (prev_det < 0.0) != (det < 0.0) {
            // bisect the bracket
            let (mut a, mut b) = (prev_alpha, alpha);
            let mut fa = prev_det;
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if min_abs_eig(mid)? <= 1e-10 || (b - a) < f64::EPSILON * a.abs().max(1.0) {
                    a = mid;
                    b = mid;
                    break;
                }
                let fm = det_at(mid)?;
                if (fa < 0.0) != (fm < 0.0) {
                    b = mid;
                } else {
                    a = mid;
                    fa = fm;
                }
            }
            crossings.push(0.5 * (a + b));
        }
        prev_alpha = alpha;
        prev_det = det;
    }
    Ok(crossings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::inf_norm;

    const PI: f64 = core::f64::consts::PI;

    #[test]
    fn alpha_family_mean_matches_display() {
        // r̃ = (1,0,0, 0,(−1+cosα)/3,(−1−sinα)/3, 0,(1+sinα)/3,(−1+cosα)/3)
        for alpha in [-2.0, 0.0, 0.7, PI] {
            let set = RotationSampleSet::alpha_family(alpha).unwrap();
            let (sa, ca) = (libm::sin(alpha), libm::cos(alpha));
            let expect = [
                1.0,
                0.0,
                0.0,
                0.0,
                (-1.0 + ca) / 3.0,
                (-1.0 - sa) / 3.0,
                0.0,
                (1.0 + sa) / 3.0,
                (-1.0 + ca) / 3.0,
            ];
            for (a, b) in set.mean_flat().iter().zip(expect.iter()) {
                assert!((a - b).abs() < 1e-15, "alpha={alpha}");
            }
        }
    }

    #[test]
    fn sample_set_rejects_reflections_and_non_orthogonal() {
        let reflection = Mat::from_rows(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, -1.0]]);
        assert!(RotationSampleSet::new(vec![reflection]).is_err());
        let skewed = Mat::from_rows(&[&[1.0, 0.1, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        assert!(RotationSampleSet::new(vec![skewed]).is_err());
        assert!(RotationSampleSet::new(vec![]).is_err());
    }

    #[test]
    fn power2_cost_single_identity_sample() {
        let set = RotationSampleSet::new(vec![Mat::identity(3)]).unwrap();
        let cost = power2_cost(&set);
        let p = OrthogonalPoint::identity(3).point();
        assert_eq!(cost.value(&p).unwrap(), 0.0);
        assert_eq!(inf_norm(&cost.gradient(&p).unwrap()), 0.0);
    }

    #[test]
    fn quaternion_identity_and_z_flip() {
        let id = quaternion_to_rotation(&UnitQuaternion::new([1.0, 0.0, 0.0, 0.0]).unwrap());
        assert!(id.sub(&Mat::identity(3)).inf_norm() == 0.0);
        let flip = quaternion_to_rotation(&UnitQuaternion::new([0.0, 0.0, 0.0, 1.0]).unwrap());
        let expect = Mat::from_rows(&[&[-1.0, 0.0, 0.0], &[0.0, -1.0, 0.0], &[0.0, 0.0, 1.0]]);
        assert!(flip.sub(&expect).inf_norm() == 0.0);
    }

    #[test]
    fn quaternion_sign_symmetry_is_exact() {
        let mut rng = crate::rng::SplitMix64::new(4);
        for _ in 0..50 {
            let v = rng.normal_vec(4);
            let n = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
            let q = UnitQuaternion::new([v[0] / n, v[1] / n, v[2] / n, v[3] / n]);
            let q = match q {
                Ok(q) => q,
                Err(_) => continue,
            };
            let r1 = quaternion_to_rotation(&q);
            let r2 = quaternion_to_rotation(&q.negated());
            assert_eq!(r1, r2);
        }
    }

    #[test]
    fn quaternion_rejects_non_unit() {
        assert!(matches!(
            UnitQuaternion::new([1.0, 0.1, 0.0, 0.0]),
            Err(Error::NotUnitQuaternion { .. })
        ));
    }

    #[test]
    fn hessian_coefficients_at_identity_alpha_zero() {
        let set = RotationSampleSet::alpha_family(0.0).unwrap();
        let p = OrthogonalPoint::identity(3);
        let rh = hessian_coefficients(&p, &set).unwrap();
        let expect = Mat::from_rows(&[&[0.0, 0.0, 0.0], &[0.0, 3.0, 0.0], &[0.0, 0.0, 3.0]]);
        assert!(rh.matrix.sub(&expect).inf_norm() < 1e-14);
        // multipliers (σ₁,σ₂,σ₃,σ₁₂,σ₁₃,σ₂₃) = (0,3,3,0,0,0)
        let expect_sigma = [0.0, 3.0, 3.0, 0.0, 0.0, 0.0];
        for (a, b) in rh.multipliers.iter().zip(expect_sigma.iter()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn hessian_coefficients_at_black_point_alpha_zero() {
        let set = RotationSampleSet::alpha_family(0.0).unwrap();
        let x = Mat::from_rows(&[&[-1.0, 0.0, 0.0], &[0.0, -1.0, 0.0], &[0.0, 0.0, 1.0]]);
        let p = OrthogonalPoint::from_matrix(&x).unwrap();
        let rh = hessian_coefficients(&p, &set).unwrap();
        let expect = Mat::from_rows(&[&[0.0, 0.0, 0.0], &[0.0, -3.0, -1.0], &[0.0, -1.0, -3.0]]);
        assert!(rh.matrix.sub(&expect).inf_norm() < 1e-14);
        let eig = symmetric_eigenvalues(&rh.matrix).unwrap();
        assert!((eig[0] + 4.0).abs() < 1e-12);
        assert!((eig[1] + 2.0).abs() < 1e-12);
        assert!(eig[2].abs() < 1e-12);
    }

    #[test]
    fn coefficients_match_component_formula_everywhere() {
        // also verifies that the h ↔ h̄ relabeling is the index reversal
        let mut rng = crate::rng::SplitMix64::new(12);
        for _ in 0..10 {
            let alpha = rng.uniform(-PI, PI);
            let set = RotationSampleSet::alpha_family(alpha).unwrap();
            let cost = power2_cost(&set);
            let p = OrthogonalPoint::random(3, &mut rng);
            let nu = hessian_coefficients(&p, &set).unwrap();
            let lex = orthogonal::restricted_hessian_on(&cost, &p).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    let diff = (nu.matrix[(i, j)] - lex.matrix[(2 - i, 2 - j)]).abs();
                    assert!(diff < 1e-10, "alpha={alpha} entry ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn solve_q_alpha_pi_golden() {
        let (lo, hi) = solve_q(PI).unwrap();
        // Q = 100Z⁴ − 100Z² + 5 at α = π
        assert!((q_value(PI, lo)).abs() < 1e-10);
        assert!((q_value(PI, hi)).abs() < 1e-10);
        assert!((lo - 0.2297529).abs() < 1e-6);
        assert!((hi - 0.9732490).abs() < 1e-6);
    }

    #[test]
    fn solve_q_alpha_zero_double_root() {
        let (lo, hi) = solve_q(0.0).unwrap();
        let inv_sqrt2 = 1.0 / libm::sqrt(2.0);
        assert!((lo - inv_sqrt2).abs() < 1e-12);
        assert!((hi - inv_sqrt2).abs() < 1e-12);
    }

    #[test]
    fn solve_q_even_symmetry_of_roots() {
        for alpha in [-2.5, -1.0, 0.3, 2.0, PI] {
            let (lo, hi) = solve_q(alpha).unwrap();
            // even polynomial: −Z is a root exactly when Z is
            assert!((q_value(alpha, -lo) - q_value(alpha, lo)).abs() < 1e-12);
            assert!((q_value(alpha, -hi) - q_value(alpha, hi)).abs() < 1e-12);
        }
    }

    #[test]
    fn quartic_helper_rejects_rootless_coefficients() {
        // disc = 1 − 4B/A < 0 for B > A/4
        assert!(roots_of_even_quartic(4.0, 2.0).is_none());
        // genuinely negative constant term: no pair of roots in [0, 1]
        assert!(roots_of_even_quartic(4.0, -1.0).is_none());
    }

    #[test]
    fn solve_q_rejects_out_of_range_alpha() {
        assert!(solve_q(3.5).is_err());
        assert!(solve_q(f64::NAN).is_err());
    }

    #[test]
    fn critical_sets_alpha_zero_classifications() {
        let reports = critical_sets(0.0, &[0.0, 0.5, -0.7]).unwrap();
        for r in &reports {
            match r.set_label {
                SetLabel::Black => {
                    assert_eq!(r.classification, Classification::Degenerate);
                    assert!((r.eigenvalues[0] + 4.0).abs() < 1e-9);
                    assert!((r.eigenvalues[1] + 2.0).abs() < 1e-9);
                    assert!(r.eigenvalues[2].abs() < 1e-9);
                }
                SetLabel::Green | SetLabel::Red => {
                    assert_eq!(r.classification, Classification::LocalMin);
                }
                SetLabel::Pink | SetLabel::Blue => {
                    assert_eq!(r.classification, Classification::Saddle);
                    // one negative, two equal positive
                    assert!(r.eigenvalues[0] < 0.0);
                    assert!((r.eigenvalues[1] - r.eigenvalues[2]).abs() < 1e-8);
                    assert!(r.eigenvalues[1] > 0.0);
                }
            }
        }
    }

    #[test]
    fn black_pink_red_reports_are_critical_everywhere() {
        for alpha in [-PI, -2.2, -PI / 2.0, -0.4, 0.0, 1.3, PI / 2.0, PI] {
            let set = RotationSampleSet::alpha_family(alpha).unwrap();
            let cost = power2_cost(&set);
            for r in critical_sets(alpha, &[0.25, -0.6]).unwrap() {
                match r.set_label {
                    SetLabel::Black | SetLabel::Pink | SetLabel::Red => {
                        let res = verify_critical(&r, &cost).unwrap();
                        assert!(
                            res <= 1e-9,
                            "alpha={alpha} set={} residual={res:e}",
                            r.set_label
                        );
                    }
                    _ => {}
                }
            }
        }
    }

    #[test]
    fn green_blue_critical_exactly_at_symmetric_alphas() {
        // The green/blue parametrizations mirror the pink/red rotations
        // across the circle; the mirror coincides with a critical point
        // only where the critical angle satisfies sin θ = 0 or cos θ = 0,
        // i.e. at α = −π/2 and α = 0. Elsewhere they carry an O(1)
        // criticality residual even though their Hessian data (which is
        // defined at every point of the manifold) is meaningful.
        for (alpha, critical) in [
            (-PI / 2.0, true),
            (0.0, true),
            (1.3, false),
            (-2.0, false),
            (PI, false),
        ] {
            let set = RotationSampleSet::alpha_family(alpha).unwrap();
            let cost = power2_cost(&set);
            for r in critical_sets(alpha, &[]).unwrap() {
                if matches!(r.set_label, SetLabel::Green | SetLabel::Blue) {
                    let res = verify_critical(&r, &cost).unwrap();
                    if critical {
                        assert!(
                            res <= 1e-9,
                            "alpha={alpha} set={} residual={res:e}",
                            r.set_label
                        );
                    } else {
                        assert!(
                            res > 1e-2,
                            "alpha={alpha} set={} residual={res:e}",
                            r.set_label
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn identity_at_alpha_zero_is_not_critical() {
        let set = RotationSampleSet::alpha_family(0.0).unwrap();
        let cost = power2_cost(&set);
        let fake = CriticalPointReport {
            set_label: SetLabel::Black,
            quaternion: UnitQuaternion::new([1.0, 0.0, 0.0, 0.0]).unwrap(),
            rotation: OrthogonalPoint::identity(3),
            multipliers: vec![],
            hessian: hessian_coefficients(&OrthogonalPoint::identity(3), &set).unwrap(),
            eigenvalues: vec![],
            classification: Classification::Degenerate,
        };
        let res = verify_critical(&fake, &cost).unwrap();
        assert!((res - 1.0).abs() < 1e-9, "residual {res}");
    }

    #[test]
    fn sweep_rows_sorted_and_black_closed_form() {
        let grid = [PI / 2.0, 0.0, -1.0];
        let rows = sweep(&grid).unwrap();
        assert_eq!(rows.len(), 15);
        for w in rows.windows(2) {
            let key = |r: &SweepRow| (r.alpha, r.set.as_str());
            assert!(key(&w[0]) <= key(&w[1]));
        }
        for r in rows.iter().filter(|r| r.set == SetLabel::Black) {
            let eig = r.eigenvalues.unwrap();
            let closed = r.closed_form.unwrap();
            for (a, b) in eig.iter().zip(closed.iter()) {
                assert!((a - b).abs() < 1e-9, "alpha={}", r.alpha);
            }
        }
    }

    #[test]
    fn bifurcations_of_green_set_at_quarter_angles() {
        let found = bifurcation_alphas(SetLabel::Green, -PI, PI, 256).unwrap();
        assert_eq!(found.len(), 2, "found {found:?}");
        assert!((found[0] + PI / 4.0).abs() < 1e-6, "found {found:?}");
        assert!((found[1] - 3.0 * PI / 4.0).abs() < 1e-6, "found {found:?}");
    }

    #[test]
    fn black_branch_parameter_validated() {
        assert!(black_quaternion(1.5, true).is_err());
        let q = black_quaternion(1.0, true).unwrap();
        assert_eq!(q.components(), [0.0, 0.0, 0.0, 1.0]);
    }
}
