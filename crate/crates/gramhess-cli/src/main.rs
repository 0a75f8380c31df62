//! Command-line front-end: restricted-Hessian reports, α-sweeps of the
//! three-sample critical families, Theorem-vs-geodesic verification and
//! stability certificates, over JSON problem files.
//!
//! Exit codes: 0 success/certified, 2 parse or validation failure,
//! 3 off-manifold point, 4 oracle mismatch, 5 negative verdict.

mod output;
mod problem;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use gramhess::gramian::induced_gradient;
use gramhess::linalg::{inf_norm, Mat};
use gramhess::orthogonal::{
    geodesic_second_derivative, index_pairs, restricted_hessian_on, skew_coordinates,
    SkewBasisElement,
};
use gramhess::rng::SplitMix64;
use gramhess::so3::{classify, sweep, SetLabel};
use gramhess::stability::{stability_certificate, symmetric_eigenvalues, CertificateConfig};

use output::{fmt_f64, sweep_csv};
use problem::Problem;

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub fn validation(message: String) -> Self {
        Self { code: 2, message }
    }
    pub fn off_manifold(message: String) -> Self {
        Self { code: 3, message }
    }
    pub fn oracle(message: String) -> Self {
        Self { code: 4, message }
    }
    pub fn verdict(message: String) -> Self {
        Self { code: 5, message }
    }
    fn from_lib(e: gramhess::Error) -> Self {
        match e {
            gramhess::Error::OffManifold { .. } => Self::off_manifold(e.to_string()),
            other => Self::validation(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "gramhess",
    version,
    about = "Restricted Hessians, critical-point classification and stability certificates on O(n)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum BasisArg {
    /// Lexicographic skew basis ω̃_αβ (any n)
    Omega,
    /// The (ν₁,ν₂,ν₃) = (ω̃₂₃, ω̃₁₃, ω̃₁₂) order (n = 3 only)
    Nu,
}

#[derive(Subcommand)]
enum Command {
    /// Multipliers, restricted Hessian, eigenvalues and classification at
    /// the problem point.
    Hessian {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "omega")]
        basis: BasisArg,
        /// JSON report on stdout (default)
        #[arg(long)]
        json: bool,
        /// CSV report on stdout
        #[arg(long, conflicts_with = "json")]
        csv: bool,
    },
    /// Evaluate the five critical families of the three-sample cost over
    /// an α-grid and write a CSV table.
    Sweep {
        #[arg(long, allow_hyphen_values = true)]
        alpha_min: f64,
        #[arg(long, allow_hyphen_values = true)]
        alpha_max: f64,
        /// Number of grid points (inclusive endpoints)
        #[arg(long)]
        steps: usize,
        /// Comma-separated subset of black,green,pink,red,blue
        #[arg(long, value_delimiter = ',')]
        sets: Option<Vec<String>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare the restricted-Hessian quadratic form against the geodesic
    /// second-difference oracle in every basis direction plus ten random
    /// tangent directions.
    Verify {
        file: PathBuf,
        /// Second-difference step
        #[arg(long, default_value_t = gramhess::orthogonal::GEODESIC_ORACLE_STEP)]
        h: f64,
    },
    /// Run the stability certificate at the problem point.
    Stability {
        file: PathBuf,
        /// Decay-check sample count
        #[arg(long, default_value_t = 256)]
        samples: usize,
        /// Decay-check RNG seed
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Decay-check ball radius
        #[arg(long, default_value_t = 0.1)]
        radius: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Hessian {
            file, basis, csv, ..
        } => cmd_hessian(&file, basis, csv),
        Command::Sweep {
            alpha_min,
            alpha_max,
            steps,
            sets,
            out,
        } => cmd_sweep(alpha_min, alpha_max, steps, sets.as_deref(), &out),
        Command::Verify { file, h } => cmd_verify(&file, h),
        Command::Stability {
            file,
            samples,
            seed,
            radius,
        } => cmd_stability(&file, samples, seed, radius),
    }
}

fn mat_to_rows(m: &Mat) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

fn require_point(problem: &Problem) -> Result<&gramhess::OrthogonalPoint, CliError> {
    problem
        .point
        .as_ref()
        .ok_or_else(|| CliError::validation("problem file has no `point`".into()))
}

fn cmd_hessian(file: &std::path::Path, basis: BasisArg, csv: bool) -> Result<(), CliError> {
    let problem = problem::load(file)?;
    let point = require_point(&problem)?;
    if basis == BasisArg::Nu && problem.n != 3 {
        return Err(CliError::validation(
            "the nu basis is defined for n = 3 only".into(),
        ));
    }

    let rh = restricted_hessian_on(&problem.cost, point).map_err(CliError::from_lib)?;
    let matrix = match basis {
        BasisArg::Omega => rh.matrix.clone(),
        BasisArg::Nu => {
            // index reversal: (ν₁,ν₂,ν₃) = (ω̃₂₃, ω̃₁₃, ω̃₁₂)
            let d = rh.matrix.rows();
            let mut m = Mat::zeros(d, d);
            for i in 0..d {
                for j in 0..d {
                    m[(i, j)] = rh.matrix[(d - 1 - i, d - 1 - j)];
                }
            }
            m
        }
    };
    let eigenvalues = symmetric_eigenvalues(&matrix).map_err(CliError::from_lib)?;
    let classification = classify(&eigenvalues, matrix.inf_norm());
    let residual = inf_norm(
        &induced_gradient(&problem.cs, &problem.cost, &point.point())
            .map_err(CliError::from_lib)?,
    );
    let grad = problem
        .cost
        .gradient(&point.point())
        .map_err(CliError::from_lib)?;
    let critical = residual <= 1e-9 * (1.0 + inf_norm(&grad));
    let basis_name = match basis {
        BasisArg::Omega => "omega",
        BasisArg::Nu => "nu",
    };

    if csv {
        let mut out = String::from("quantity,i,j,value\n");
        for (i, s) in rh.multipliers.iter().enumerate() {
            out.push_str(&format!("sigma,{},,{}\n", i + 1, fmt_f64(*s)));
        }
        for i in 0..matrix.rows() {
            for j in 0..matrix.cols() {
                out.push_str(&format!(
                    "hessian,{},{},{}\n",
                    i + 1,
                    j + 1,
                    fmt_f64(matrix[(i, j)])
                ));
            }
        }
        for (i, l) in eigenvalues.iter().enumerate() {
            out.push_str(&format!("eigenvalue,{},,{}\n", i + 1, fmt_f64(*l)));
        }
        out.push_str(&format!("classification,,,{classification}\n"));
        out.push_str(&format!("critical_residual,,,{}\n", fmt_f64(residual)));
        out.push_str(&format!("basis,,,{basis_name}\n"));
        print!("{out}");
    } else {
        let mut report = serde_json::json!({
            "basis": basis_name,
            "multipliers": rh.multipliers,
            "hessian": mat_to_rows(&matrix),
            "eigenvalues": eigenvalues,
            "classification": classification.as_str(),
            "critical_residual": residual,
            "critical": critical,
        });
        if !critical {
            report["note"] = serde_json::json!(format!(
                "not a critical point (residual {})",
                fmt_f64(residual)
            ));
        }
        println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("serializable")
        );
    }
    Ok(())
}

fn cmd_sweep(
    alpha_min: f64,
    alpha_max: f64,
    steps: usize,
    sets: Option<&[String]>,
    out: &std::path::Path,
) -> Result<(), CliError> {
    if steps < 2 {
        return Err(CliError::validation("need at least 2 steps".into()));
    }
    if alpha_min.is_nan() || alpha_max.is_nan() || alpha_min >= alpha_max {
        return Err(CliError::validation("need alpha-min < alpha-max".into()));
    }
    let pi = std::f64::consts::PI;
    if alpha_min < -pi - 1e-12 || alpha_max > pi + 1e-12 {
        return Err(CliError::validation(
            "alpha range must lie in [-pi, pi]".into(),
        ));
    }
    let selected: Vec<SetLabel> = match sets {
        None => SetLabel::ALL.to_vec(),
        Some(names) => names
            .iter()
            .map(|s| s.trim().parse::<SetLabel>())
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::validation(e.to_string()))?,
    };
    let grid: Vec<f64> = (0..steps)
        .map(|i| alpha_min + i as f64 * (alpha_max - alpha_min) / (steps - 1) as f64)
        .collect();
    let rows: Vec<_> = sweep(&grid)
        .map_err(CliError::from_lib)?
        .into_iter()
        .filter(|r| selected.contains(&r.set))
        .collect();
    let csv = sweep_csv(&rows);
    std::fs::write(out, csv)
        .map_err(|e| CliError::validation(format!("cannot write {}: {e}", out.display())))?;
    println!("wrote {} rows to {}", rows.len(), out.display());
    Ok(())
}

fn cmd_verify(file: &std::path::Path, h: f64) -> Result<(), CliError> {
    let problem = problem::load(file)?;
    if problem.kind != "orthogonal" && problem.kind != "so3-example" {
        return Err(CliError::validation(
            "verify expects kind orthogonal or so3-example".into(),
        ));
    }
    let point = require_point(&problem)?;
    if h <= 0.0 {
        return Err(CliError::validation("step h must be positive".into()));
    }
    let n = problem.n;
    let rh = restricted_hessian_on(&problem.cost, point).map_err(CliError::from_lib)?;

    let mut max_diff = 0.0f64;
    println!(
        "{:<14} {:>24} {:>24} {:>12}",
        "direction", "formula", "oracle", "abs_diff"
    );
    let mut check = |name: String, omega: &Mat, formula: f64| -> Result<(), CliError> {
        let oracle = geodesic_second_derivative(&problem.cost, point, omega, h)
            .map_err(CliError::from_lib)?;
        let diff = (formula - oracle).abs();
        max_diff = max_diff.max(diff);
        println!(
            "{name:<14} {:>24} {:>24} {diff:>12.3e}",
            fmt_f64(formula),
            fmt_f64(oracle)
        );
        Ok(())
    };

    for (a, (alpha, beta)) in index_pairs(n).into_iter().enumerate() {
        let omega = SkewBasisElement::new(alpha, beta)
            .map_err(CliError::from_lib)?
            .matrix(n);
        check(
            format!("omega({},{})", alpha + 1, beta + 1),
            &omega,
            rh.matrix[(a, a)],
        )?;
    }
    let mut rng = SplitMix64::new(0x7665_7269);
    for k in 0..10 {
        let mut omega = Mat::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let v = rng.next_normal();
                omega[(i, j)] = v;
                omega[(j, i)] = -v;
            }
        }
        let scale = omega.frobenius_norm().max(f64::MIN_POSITIVE);
        let omega = omega.scale(1.0 / scale);
        let coords = skew_coordinates(&omega).map_err(CliError::from_lib)?;
        check(
            format!("random-{}", k + 1),
            &omega,
            rh.quadratic_form(&coords),
        )?;
    }

    println!("max abs diff: {} (tolerance 5e-5)", fmt_f64(max_diff));
    if max_diff <= 5e-5 {
        Ok(())
    } else {
        Err(CliError::oracle(format!(
            "restricted Hessian disagrees with the geodesic oracle by {max_diff:e}"
        )))
    }
}

fn cmd_stability(
    file: &std::path::Path,
    samples: usize,
    seed: u64,
    radius: f64,
) -> Result<(), CliError> {
    let problem = problem::load(file)?;
    let point = require_point(&problem)?;
    let basis = if problem.n == 3 {
        gramhess::orthogonal::nu_basis(point).map_err(CliError::from_lib)?
    } else {
        gramhess::orthogonal::tangent_basis(point)
    };
    let config = CertificateConfig {
        radius,
        samples,
        seed,
    };
    let verdict = stability_certificate(
        &problem.cs,
        &problem.cost,
        problem.field.as_ref(),
        &point.point(),
        &basis,
        &config,
    )
    .map_err(CliError::from_lib)?;

    let report = serde_json::json!({
        "verdict": verdict.label(),
        "critical_residual": verdict.critical_residual,
        "multipliers": verdict.multipliers,
        "eigenvalues": verdict.eigenvalues,
        "min_eigenvalue": verdict.min_eigenvalue,
        "decay_violations": verdict.decay_violations,
        "hessian": mat_to_rows(&verdict.hessian.matrix),
        "decay_samples": verdict.decay_violations.map(|_| samples),
        "seed": seed,
    });
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("serializable")
    );
    if verdict.is_certified() {
        Ok(())
    } else {
        Err(CliError::verdict(format!("verdict {}", verdict.label())))
    }
}
