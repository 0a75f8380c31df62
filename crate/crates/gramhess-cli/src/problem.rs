//! Problem-file schema and loading.
//!
//! A problem file is a JSON object with a `kind` discriminator:
//!
//! * `"so3-example"` — the built-in three-sample family of x-axis
//!   rotations; requires `alpha` in `[-pi, pi]`.
//! * `"generic"` — a user-supplied list of 3×3 rotation `samples`.
//! * `"orthogonal"` — `O(n)` with a named cost; requires `n` and
//!   `cost = {"name": "power2", "samples": [n×n matrices]}`.
//!
//! The optional `point` is the flattened (row-major) evaluation point and
//! must satisfy the on-manifold invariants when present. The optional
//! `field` names a built-in vector field (`"neg-gradient"`) for the
//! stability command's decay check.

use serde::Deserialize;

use gramhess::field::ScalarField;
use gramhess::gramian::ConstraintSystem;
use gramhess::linalg::{lu_det, Mat};
use gramhess::orthogonal::{constraint_system, power2_field, OrthogonalPoint};
use gramhess::so3::RotationSampleSet;
use gramhess::stability::VectorFieldSpec;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub kind: String,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub samples: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default)]
    pub point: Option<Vec<f64>>,
    #[serde(default)]
    pub cost: Option<CostSpec>,
    #[serde(default)]
    pub field: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostSpec {
    pub name: String,
    #[serde(default)]
    pub samples: Option<Vec<Vec<Vec<f64>>>>,
}

/// A fully resolved problem: constraint system, cost and optional data.
pub struct Problem {
    pub kind: String,
    pub n: usize,
    pub cs: ConstraintSystem,
    pub cost: ScalarField,
    pub point: Option<OrthogonalPoint>,
    pub field: Option<VectorFieldSpec>,
}

fn nested_to_mat(rows: &[Vec<f64>], n: usize) -> Result<Mat, CliError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(CliError::validation(format!(
            "sample matrix must be {n}x{n}"
        )));
    }
    let mut flat = Vec::with_capacity(n * n);
    for r in rows {
        flat.extend_from_slice(r);
    }
    Mat::from_vec(n, n, flat).map_err(|e| CliError::validation(e.to_string()))
}

/// Validate that a matrix is a rotation (orthogonal, det +1) the same way
/// the 3×3 sample-set loader does, for general `n`.
fn require_rotation(m: &Mat) -> Result<(), CliError> {
    OrthogonalPoint::from_matrix(m)
        .map_err(|e| CliError::validation(format!("sample is not orthogonal: {e}")))?;
    let det = lu_det(m);
    if (det - 1.0).abs() > 1e-10 {
        return Err(CliError::validation(format!(
            "sample has determinant {det}, expected +1"
        )));
    }
    Ok(())
}

pub fn load(path: &std::path::Path) -> Result<Problem, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
    let file: ProblemFile = serde_json::from_str(&text)
        .map_err(|e| CliError::validation(format!("malformed problem file: {e}")))?;
    resolve(file)
}

pub fn resolve(file: ProblemFile) -> Result<Problem, CliError> {
    let (n, cost) = match file.kind.as_str() {
        "so3-example" => {
            let alpha = file
                .alpha
                .ok_or_else(|| CliError::validation("so3-example requires `alpha`".into()))?;
            let set = RotationSampleSet::alpha_family(alpha)
                .map_err(|e| CliError::validation(e.to_string()))?;
            (3usize, gramhess::so3::power2_cost(&set))
        }
        "generic" => {
            let raw = file
                .samples
                .as_ref()
                .ok_or_else(|| CliError::validation("generic requires `samples`".into()))?;
            let mats: Vec<Mat> = raw
                .iter()
                .map(|m| nested_to_mat(m, 3))
                .collect::<Result<_, _>>()?;
            let set = RotationSampleSet::new(mats)
                .map_err(|e| CliError::validation(format!("invalid sample set: {e}")))?;
            (3usize, gramhess::so3::power2_cost(&set))
        }
        "orthogonal" => {
            let n = file
                .n
                .ok_or_else(|| CliError::validation("orthogonal requires `n`".into()))?;
            let spec = file
                .cost
                .as_ref()
                .ok_or_else(|| CliError::validation("orthogonal requires `cost`".into()))?;
            if spec.name != "power2" {
                return Err(CliError::validation(format!(
                    "unknown cost `{}` (built-ins: power2)",
                    spec.name
                )));
            }
            let raw = spec
                .samples
                .as_ref()
                .ok_or_else(|| CliError::validation("power2 cost requires `samples`".into()))?;
            let mats: Vec<Mat> = raw
                .iter()
                .map(|m| nested_to_mat(m, n))
                .collect::<Result<_, _>>()?;
            for m in &mats {
                require_rotation(m)?;
            }
            let cost = power2_field(n, &mats).map_err(|e| CliError::validation(e.to_string()))?;
            (n, cost)
        }
        other => {
            return Err(CliError::validation(format!(
                "unknown kind `{other}` (expected so3-example, generic or orthogonal)"
            )))
        }
    };

    let cs = constraint_system(n).map_err(|e| CliError::validation(e.to_string()))?;

    let point = match file.point {
        Some(coords) => Some(OrthogonalPoint::new(n, coords).map_err(|e| match e {
            gramhess::Error::OffManifold { .. } => {
                CliError::off_manifold(format!("point rejected: {e}"))
            }
            other => CliError::validation(other.to_string()),
        })?),
        None => None,
    };

    let field = match file.field.as_deref() {
        None => None,
        Some("neg-gradient") => Some(VectorFieldSpec::neg_gradient(&cost)),
        Some(other) => {
            return Err(CliError::validation(format!(
                "unknown field `{other}` (built-ins: neg-gradient)"
            )))
        }
    };

    Ok(Problem {
        kind: file.kind,
        n,
        cs,
        cost,
        point,
        field,
    })
}
