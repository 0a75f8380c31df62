//! Cross-module invariants: tangency and conformal identities of the
//! control field, congruence behavior of the restricted Hessian,
//! prolongation independence, eigensolver conservation laws, and
//! scale invariance of the stability verdicts.

use gramhess::field::{Point, ScalarField};
use gramhess::gramian::{
    self, induced_gradient, restricted_hessian, sigma_multipliers, sigma_multipliers_cramer,
    standard_control_field, ConstraintSystem, TangentBasis,
};
use gramhess::linalg::{dot, inf_norm, norm, Mat};
use gramhess::orthogonal::{constraint_system, tangent_basis, OrthogonalPoint};
use gramhess::rng::SplitMix64;
use gramhess::so3::{power2_cost, RotationSampleSet};
use gramhess::stability::{
    augmented_hessian, stability_certificate, symmetric_eigenvalues, CertificateConfig, Verdict,
};

use proptest::prelude::*;

fn random_symmetric(m: usize, rng: &mut SplitMix64) -> Mat {
    let mut q = Mat::zeros(m, m);
    for i in 0..m {
        for j in 0..=i {
            let v = rng.uniform(-1.0, 1.0);
            q[(i, j)] = v;
            q[(j, i)] = v;
        }
    }
    q
}

fn random_quadratic(m: usize, rng: &mut SplitMix64) -> ScalarField {
    let q = random_symmetric(m, rng);
    let b = rng.normal_vec(m);
    ScalarField::quadratic(q, b, rng.uniform(-1.0, 1.0)).unwrap()
}

/// `base + coeff·(F_i − c_i)·(F_j − c_j)` as an analytic field, assembled
/// by the product rule (test-side prolongation constructor).
fn add_constraint_product(
    base: &ScalarField,
    cs: &ConstraintSystem,
    i: usize,
    j: usize,
    coeff: f64,
) -> ScalarField {
    let (fi, fj) = (cs.constraints()[i].clone(), cs.constraints()[j].clone());
    let (ci, cj) = (cs.regular_value()[i], cs.regular_value()[j]);
    let b_v = base.clone();
    let b_g = base.clone();
    let b_h = base.clone();
    let (fi_g, fj_g) = (fi.clone(), fj.clone());
    let (fi_h, fj_h) = (fi.clone(), fj.clone());
    let dim = base.dim();
    ScalarField::new(
        dim,
        move |x| {
            b_v.value(&Point::new(x.to_vec())).unwrap()
                + coeff
                    * (fi.value(&Point::new(x.to_vec())).unwrap() - ci)
                    * (fj.value(&Point::new(x.to_vec())).unwrap() - cj)
        },
        move |x| {
            let p = Point::new(x.to_vec());
            let u = fi_g.value(&p).unwrap() - ci;
            let v = fj_g.value(&p).unwrap() - cj;
            let gu = fi_g.gradient(&p).unwrap();
            let gv = fj_g.gradient(&p).unwrap();
            let mut g = b_g.gradient(&p).unwrap();
            for k in 0..g.len() {
                g[k] += coeff * (v * gu[k] + u * gv[k]);
            }
            g
        },
        move |x| {
            let p = Point::new(x.to_vec());
            let u = fi_h.value(&p).unwrap() - ci;
            let v = fj_h.value(&p).unwrap() - cj;
            let gu = fi_h.gradient(&p).unwrap();
            let gv = fj_h.gradient(&p).unwrap();
            let mut h = b_h.raw_hessian(&p).unwrap();
            let hu = fi_h.raw_hessian(&p).unwrap();
            let hv = fj_h.raw_hessian(&p).unwrap();
            for a in 0..x.len() {
                for b in 0..x.len() {
                    h[(a, b)] +=
                        coeff * (v * hu[(a, b)] + u * hv[(a, b)] + gu[a] * gv[b] + gv[a] * gu[b]);
                }
            }
            h
        },
    )
}

/// `c·base` as an analytic field.
fn scaled_field(base: &ScalarField, c: f64) -> ScalarField {
    let (b_v, b_g, b_h) = (base.clone(), base.clone(), base.clone());
    ScalarField::new(
        base.dim(),
        move |x| c * b_v.value(&Point::new(x.to_vec())).unwrap(),
        move |x| {
            b_g.gradient(&Point::new(x.to_vec()))
                .unwrap()
                .into_iter()
                .map(|g| c * g)
                .collect()
        },
        move |x| b_h.raw_hessian(&Point::new(x.to_vec())).unwrap().scale(c),
    )
}

#[test]
fn control_field_is_tangent_to_constraints() {
    let mut rng = SplitMix64::new(101);
    for n in [3usize, 4] {
        let cs = constraint_system(n).unwrap();
        for _ in 0..10 {
            let p = OrthogonalPoint::random(n, &mut rng).point();
            let cost = random_quadratic(n * n, &mut rng);
            let v0 = standard_control_field(&cs, &cost, &p).unwrap();
            for f in cs.constraints() {
                let grad = f.gradient(&p).unwrap();
                let d = dot(&v0, &grad);
                let scale = 1.0 + norm(&v0) * norm(&grad);
                assert!(d.abs() <= 1e-9 * scale, "n={n}: ⟨v0, ∇F⟩ = {d:e}");
            }
        }
    }
}

#[test]
fn cramer_consistency_of_multipliers() {
    let mut rng = SplitMix64::new(55);
    let cs = constraint_system(3).unwrap();
    for _ in 0..20 {
        let p = OrthogonalPoint::random(3, &mut rng).point();
        let cost = random_quadratic(9, &mut rng);
        let sigma = sigma_multipliers(&cs, &cost, &p).unwrap();
        let cramer = sigma_multipliers_cramer(&cs, &cost, &p).unwrap();
        for (a, b) in sigma.iter().zip(cramer.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
        // the Gramian system Σσ = (⟨∇G,∇F_i⟩) is solved
        let gram = cs.gramian_matrix(&p).unwrap();
        let g = cost.gradient(&p).unwrap();
        let lhs = gram.matvec(&sigma);
        for (i, f) in cs.constraints().iter().enumerate() {
            let bi = dot(&g, &f.gradient(&p).unwrap());
            assert!((lhs[i] - bi).abs() < 1e-10);
        }
        // residual vector is orthogonal to every constraint gradient
        let res = induced_gradient(&cs, &cost, &p).unwrap();
        for f in cs.constraints() {
            let grad = f.gradient(&p).unwrap();
            assert!(dot(&res, &grad).abs() < 1e-10 * (1.0 + norm(&res) * norm(&grad)));
        }
    }
}

#[test]
fn conformal_relation_between_control_field_and_induced_gradient() {
    let mut rng = SplitMix64::new(7);
    for n in [2usize, 3, 4] {
        let cs = constraint_system(n).unwrap();
        for _ in 0..8 {
            let p = OrthogonalPoint::random(n, &mut rng).point();
            let cost = random_quadratic(n * n, &mut rng);
            let det = gramhess::linalg::lu_det(&cs.gramian_matrix(&p).unwrap());
            let v0 = standard_control_field(&cs, &cost, &p).unwrap();
            let ind = induced_gradient(&cs, &cost, &p).unwrap();
            for (a, b) in v0.iter().zip(ind.iter()) {
                assert!((a - det * b).abs() < 1e-10 * (1.0 + a.abs()), "n={n}");
            }
        }
    }
}

#[test]
fn control_field_and_induced_gradient_hand_values_at_identity() {
    // three-sample cost at alpha = 0, evaluated at the identity frame
    let set = RotationSampleSet::alpha_family(0.0).unwrap();
    let cost = power2_cost(&set);
    let cs = constraint_system(3).unwrap();
    let p = OrthogonalPoint::identity(3).point();
    let expect = [0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, -1.0, 0.0];
    let ind = induced_gradient(&cs, &cost, &p).unwrap();
    let v0 = standard_control_field(&cs, &cost, &p).unwrap();
    for k in 0..9 {
        assert!((ind[k] - expect[k]).abs() < 1e-12);
        assert!((v0[k] - 8.0 * expect[k]).abs() < 1e-10);
    }
    // the black-set rotation at t = 1 is an equilibrium of v0
    let flip = OrthogonalPoint::new(3, vec![-1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 1.0])
        .unwrap()
        .point();
    assert!(inf_norm(&standard_control_field(&cs, &cost, &flip).unwrap()) < 1e-10);
}

#[test]
fn gramian_entries_match_closed_inner_products_off_manifold() {
    // the Annexe inner-product formulas hold at arbitrary ambient points
    let mut rng = SplitMix64::new(31);
    let cs = constraint_system(3).unwrap();
    let coords: Vec<f64> = (0..9).map(|_| rng.uniform(-2.0, 2.0)).collect();
    let x = Point::new(coords.clone());
    let row = |s: usize| -> &[f64] { &coords[3 * s..3 * s + 3] };
    let f1 = cs.constraints()[0].clone();
    let f12 = cs.constraints()[3].clone();
    let g = gramian::gramian(&[f1.clone(), f12.clone()], &[f1, f12], &x).unwrap();
    let x1x1 = dot(row(0), row(0));
    let x1x2 = dot(row(0), row(1));
    let x2x2 = dot(row(1), row(1));
    assert!((g[(0, 0)] - x1x1).abs() < 1e-12);
    // ⟨∇F₁, ∇F₁₂⟩ = ⟨x₁,x₂⟩δ₁₁ + ⟨x₁,x₁⟩δ₁₂ ... with s=1, (p,q)=(1,2)
    assert!((g[(0, 1)] - x1x2).abs() < 1e-12);
    assert!((g[(1, 0)] - x1x2).abs() < 1e-12);
    // ⟨∇F₁₂, ∇F₁₂⟩ = ‖x₂‖² + ‖x₁‖²
    assert!((g[(1, 1)] - (x1x1 + x2x2)).abs() < 1e-12);
}

#[test]
fn gramian_rows_index_first_list_and_columns_the_second() {
    // rectangular case pins the layout: entry (i, j) = ⟨∇cols_j, ∇rows_i⟩
    let mut rng = SplitMix64::new(131);
    let cs = constraint_system(3).unwrap();
    let coords: Vec<f64> = (0..9).map(|_| rng.uniform(-2.0, 2.0)).collect();
    let x = Point::new(coords);
    let f1 = cs.constraints()[0].clone();
    let f2 = cs.constraints()[1].clone();
    let f12 = cs.constraints()[3].clone();
    let wide = gramian::gramian(
        std::slice::from_ref(&f1),
        &[f1.clone(), f2.clone(), f12.clone()],
        &x,
    )
    .unwrap();
    assert_eq!((wide.rows(), wide.cols()), (1, 3));
    let tall = gramian::gramian(&[f1.clone(), f2, f12], std::slice::from_ref(&f1), &x).unwrap();
    assert_eq!((tall.rows(), tall.cols()), (3, 1));
    for j in 0..3 {
        assert_eq!(wide[(0, j)], tall[(j, 0)]);
    }
}

#[test]
fn restricted_hessian_transforms_congruently_under_basis_permutation() {
    let mut rng = SplitMix64::new(2);
    let cs = constraint_system(3).unwrap();
    for _ in 0..5 {
        let op = OrthogonalPoint::random(3, &mut rng);
        let cost = random_quadratic(9, &mut rng);
        let basis = tangent_basis(&op);
        let rh = restricted_hessian(&cs, &cost, &basis).unwrap();
        assert_eq!(rh.matrix.symmetry_defect(), 0.0);
        // permute (0,1,2) -> (2,0,1)
        let perm = [2usize, 0, 1];
        let permuted = TangentBasis::new(
            basis.base_point().clone(),
            perm.iter().map(|&i| basis.vectors()[i].clone()).collect(),
        );
        let rh_p = restricted_hessian(&cs, &cost, &permuted).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let diff = (rh_p.matrix[(a, b)] - rh.matrix[(perm[a], perm[b])]).abs();
                assert!(diff < 1e-12);
            }
        }
    }
}

#[test]
fn restricted_hessian_is_prolongation_independent() {
    let cs = constraint_system(3).unwrap();
    let set = RotationSampleSet::alpha_family(0.7).unwrap();
    let cost = power2_cost(&set);

    // a critical point of the cost (red family) and a generic point
    let reports = gramhess::so3::critical_sets(0.7, &[]).unwrap();
    let red = reports
        .iter()
        .find(|r| r.set_label == gramhess::so3::SetLabel::Red)
        .unwrap();
    let mut rng = SplitMix64::new(91);
    let generic = OrthogonalPoint::random(3, &mut rng);

    for (point, label) in [(&red.rotation, "critical"), (&generic, "generic")] {
        let basis = tangent_basis(point);
        let reference = restricted_hessian(&cs, &cost, &basis).unwrap();

        // second-order vanishing term μ(F_i − c_i)(F_j − c_j)
        let prolonged = add_constraint_product(&cost, &cs, 1, 4, 2.5);
        let rh2 = restricted_hessian(&cs, &prolonged, &basis).unwrap();
        assert!(
            rh2.matrix.sub(&reference.matrix).inf_norm() < 1e-10,
            "{label}: quadratic constraint term changed the Hessian"
        );

        // first-order term λ(F_i − c_i): Theorem-1 path with recomputed σ
        // agrees; the naive ambient restriction does not.
        let linear = {
            let f = cs.constraints()[0].clone();
            let c0 = cs.regular_value()[0];
            let base = cost.clone();
            let (b_g, f_g) = (base.clone(), f.clone());
            let (b_h, f_h) = (base.clone(), f.clone());
            ScalarField::new(
                9,
                move |x| {
                    let p = Point::new(x.to_vec());
                    base.value(&p).unwrap() + (f.value(&p).unwrap() - c0)
                },
                move |x| {
                    let p = Point::new(x.to_vec());
                    let mut g = b_g.gradient(&p).unwrap();
                    let fg = f_g.gradient(&p).unwrap();
                    for k in 0..g.len() {
                        g[k] += fg[k];
                    }
                    g
                },
                move |x| {
                    let p = Point::new(x.to_vec());
                    b_h.raw_hessian(&p)
                        .unwrap()
                        .add(&f_h.raw_hessian(&p).unwrap())
                },
            )
        };
        let rh3 = restricted_hessian(&cs, &linear, &basis).unwrap();
        assert!(
            rh3.matrix.sub(&reference.matrix).inf_norm() < 1e-10,
            "{label}: linear constraint term changed the full Theorem-1 value"
        );
        let naive_base = gramhess::linalg::congruence(
            &gramhess::field::ambient_hessian(&cost, basis.base_point()).unwrap(),
            basis.vectors(),
        );
        let naive_prol = gramhess::linalg::congruence(
            &gramhess::field::ambient_hessian(&linear, basis.base_point()).unwrap(),
            basis.vectors(),
        );
        assert!(
            naive_prol.sub(&naive_base).inf_norm() > 1e-3,
            "{label}: naive restriction should be prolongation-dependent"
        );
    }
}

#[test]
fn stability_verdicts_invariant_under_cost_rescaling() {
    for alpha in [0.0f64] {
        let cs = constraint_system(3).unwrap();
        let set = RotationSampleSet::alpha_family(alpha).unwrap();
        let cost = power2_cost(&set);
        let reports = gramhess::so3::critical_sets(alpha, &[0.3]).unwrap();
        for report in reports.iter().filter(|r| {
            matches!(
                r.set_label,
                gramhess::so3::SetLabel::Black
                    | gramhess::so3::SetLabel::Pink
                    | gramhess::so3::SetLabel::Red
            )
        }) {
            let basis = gramhess::orthogonal::nu_basis(&report.rotation).unwrap();
            let mut labels = Vec::new();
            for c in [1e-3, 1.0, 1e3] {
                let scaled = scaled_field(&cost, c);
                let verdict = stability_certificate(
                    &cs,
                    &scaled,
                    None,
                    &report.rotation.point(),
                    &basis,
                    &CertificateConfig::default(),
                )
                .unwrap();
                labels.push(verdict.label());
            }
            assert!(
                labels.windows(2).all(|w| w[0] == w[1]),
                "set {}: labels {labels:?}",
                report.set_label
            );
        }
    }
}

#[test]
fn stability_verdict_unchanged_by_squared_constraint_terms() {
    let cs = constraint_system(3).unwrap();
    let set = RotationSampleSet::alpha_family(0.0).unwrap();
    let cost = power2_cost(&set);
    let reports = gramhess::so3::critical_sets(0.0, &[0.0]).unwrap();
    let red = reports
        .iter()
        .find(|r| r.set_label == gramhess::so3::SetLabel::Red)
        .unwrap();
    let basis = gramhess::orthogonal::nu_basis(&red.rotation).unwrap();
    let mut labels = Vec::new();
    for c in [0.0, 1.0, 10.0] {
        let modified = add_constraint_product(&cost, &cs, 2, 2, c);
        let verdict = stability_certificate(
            &cs,
            &modified,
            None,
            &red.rotation.point(),
            &basis,
            &CertificateConfig::default(),
        )
        .unwrap();
        labels.push(verdict.label());
    }
    assert!(
        labels.iter().all(|l| l == "certified-stable-modulo-(i)"),
        "{labels:?}"
    );
}

#[test]
fn augmented_hessian_agrees_beyond_the_orthogonal_group() {
    // height cost on the unit sphere, critical at the poles
    let f = ScalarField::new(3, |x| 0.5 * dot(x, x), |x| x.to_vec(), |_| Mat::identity(3));
    let cs = ConstraintSystem::new(vec![f], vec![0.5]).unwrap();
    let cost = ScalarField::new(3, |x| x[2], |_| vec![0.0, 0.0, 1.0], |_| Mat::zeros(3, 3));
    let pole = Point::new(vec![0.0, 0.0, -1.0]);
    let basis = TangentBasis::new(pole.clone(), vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]);
    let aug = augmented_hessian(&cs, &cost, &pole, &basis).unwrap();
    let reference = restricted_hessian(&cs, &cost, &basis).unwrap();
    assert!(aug.matrix.sub(&reference.matrix).inf_norm() <= 1e-12);
    // south pole is the minimum: certificate certifies it
    let verdict = stability_certificate(
        &cs,
        &cost,
        None,
        &pole,
        &basis,
        &CertificateConfig::default(),
    )
    .unwrap();
    assert_eq!(verdict.verdict, Verdict::CertifiedStable);
    assert_eq!(verdict.label(), "certified-stable-modulo-(i)");

    // a constraint used as the cost gives the zero augmented Hessian
    let casimir_cost = cs.constraints()[0].clone();
    let aug0 = augmented_hessian(&cs, &casimir_cost, &pole, &basis).unwrap();
    assert!(aug0.matrix.inf_norm() <= 1e-14);

    // non-critical points are rejected
    let off = Point::new(vec![0.0, 1.0, 0.0]);
    let basis_off = TangentBasis::new(off.clone(), vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]]);
    assert!(matches!(
        augmented_hessian(&cs, &cost, &off, &basis_off),
        Err(gramhess::Error::NotCriticalPoint { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    /// Jacobi rotations are orthogonal similarities: the spectrum must
    /// carry the trace and the Frobenius norm of the input.
    #[test]
    fn eigenvalues_preserve_trace_and_frobenius(
        dim in 1usize..=10,
        seed in any::<u64>(),
    ) {
        let mut rng = SplitMix64::new(seed);
        let mut h = Mat::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..=i {
                let v = rng.uniform(-5.0, 5.0);
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        let eig = symmetric_eigenvalues(&h).unwrap();
        let trace: f64 = eig.iter().sum();
        let fro_sq: f64 = eig.iter().map(|l| l * l).sum();
        let scale = 1.0 + h.frobenius_norm();
        prop_assert!((trace - h.trace()).abs() <= 1e-12 * scale * scale);
        prop_assert!(
            (fro_sq - h.frobenius_norm() * h.frobenius_norm()).abs() <= 1e-12 * scale * scale
        );
        // ascending order
        prop_assert!(eig.windows(2).all(|w| w[0] <= w[1]));
    }
}
