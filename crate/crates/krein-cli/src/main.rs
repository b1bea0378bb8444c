//! Command-line front end: loads matrices, actions and kernel specs from
//! files, runs the library analyses, and emits deterministic reports.
//!
//! Exit codes: 0 = success/verified, 1 = a verdict in the report is false
//! (the report carries its certificate), 2 = input or parse error,
//! 3 = inconclusive (a search ended without a proof either way).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use krein::io::{self, GeneratorEntry};
use krein::kernels::{
    demo_multiplicity, minimal_majorant, HermitianKernel, KernelFunction, KernelPair,
};
use krein::linalg::{self, identity, to_complex};
use krein::report::Report;
use krein::representations::{
    boost12, boost13, check_kernel_invariance, half_turn23, irreducibility_report,
    poly_representation, rot23, sample_point_pairs, shear_action, shear_gram, GroupAction,
};
use krein::space::{IndefiniteSpace, Subspace};
use krein::{CMatrix, RMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(
    name = "krein",
    version,
    about = "Indefinite inner products, Hermitian kernel pairs, invariant decompositions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Tolerance for Hermiticity, unitarity and verdict checks.
    #[arg(long, global = true, default_value_t = krein::DEFAULT_TOL)]
    tol: f64,

    /// Seed for every randomized search.
    #[arg(long, global = true, default_value_t = krein::DEFAULT_SEED)]
    seed: u64,

    /// Emit the report as JSON instead of text.
    #[arg(long, global = true)]
    json: bool,

    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Regularity, signature and canonical symmetry of a Gram matrix.
    AnalyzeSpace {
        /// Matrix file holding the Gram matrix.
        #[arg(long)]
        gram: PathBuf,
    },
    /// Classify a subspace (sign, signature, regularity) against a Gram.
    ClassifySubspace {
        #[arg(long)]
        gram: PathBuf,
        /// Matrix file whose columns span the subspace.
        #[arg(long)]
        basis: PathBuf,
    },
    /// Minimal majorant of a Hermitian kernel, or minimality of a given pair.
    MinimalPair {
        /// Matrix file holding the Hermitian kernel.
        #[arg(long)]
        kernel: PathBuf,
        /// Optional matrix file holding a candidate majorant; defaults to
        /// the spectral modulus of the kernel.
        #[arg(long)]
        majorant: Option<PathBuf>,
    },
    /// Invariance of a kernel function under generators, on sampled pairs.
    CheckInvariance {
        /// Kernel spec, e.g. `kernel lorentz-poly degree=2 [metric=<file>]`.
        #[arg(long)]
        kernel: String,
        /// Generator file: matrix blocks and/or `builtin <name> <args...>`.
        #[arg(long)]
        generators: PathBuf,
        /// Number of sampled point pairs.
        #[arg(long, default_value_t = 100)]
        pairs: usize,
        /// Points are sampled from `[-halfwidth, halfwidth]^dim`.
        #[arg(long, default_value_t = 0.8)]
        halfwidth: f64,
        /// Dimension of the sample points.
        #[arg(long, default_value_t = 3)]
        dim: usize,
    },
    /// Commutant-based irreducibility and degeneracy report for an action.
    Irreducibility {
        #[arg(long)]
        gram: PathBuf,
        #[arg(long)]
        generators: PathBuf,
        /// Index of a generator that is itself a fundamental symmetry.
        #[arg(long)]
        fundamental: Option<usize>,
    },
    /// Decompose an invariant kernel pair into irreducible components.
    Decompose {
        /// Matrix file holding the Hermitian kernel K.
        #[arg(long)]
        kernel: PathBuf,
        /// Matrix file holding the symmetry J (H = JK must be positive).
        #[arg(long)]
        symmetry: PathBuf,
        #[arg(long)]
        generators: PathBuf,
    },
    /// Built-in demonstrations.
    #[command(subcommand)]
    Demo(DemoCommand),
}

#[derive(Subcommand)]
enum DemoCommand {
    /// Graded decomposition of the indefinite exponential kernel on
    /// sampled points, verified against the analytic tail bound.
    Lorentz {
        /// Truncation degree N.
        #[arg(long, default_value_t = 12)]
        degree: usize,
        /// Number of sample points.
        #[arg(long, default_value_t = 40)]
        points: usize,
        /// Points are sampled from `[-halfwidth, halfwidth]^3`.
        #[arg(long, default_value_t = 0.8)]
        halfwidth: f64,
    },
    /// Two direct sums carrying the identical kernel with inequivalent
    /// norms (one convergent, one divergent squared-norm series).
    Multiplicity {
        /// Number of summands.
        #[arg(long, default_value_t = 1000)]
        summands: usize,
    },
    /// The shear action: regularly irreducible yet degenerate (a neutral
    /// invariant subspace exists).
    Ex3 {
        /// Half-dimension of the paired blocks (must be even).
        #[arg(long = "dimH", default_value_t = 2)]
        dim_h: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match execute(&cli) {
        Ok(report) => {
            let rendered = if cli.json {
                report.to_json()
            } else {
                report.to_text()
            };
            match &cli.out {
                Some(path) => {
                    if let Err(err) = std::fs::write(path, &rendered) {
                        eprintln!("error: cannot write {}: {err}", path.display());
                        return ExitCode::from(2);
                    }
                }
                None => print!("{rendered}"),
            }
            if report.any_false() {
                1
            } else if report.any_inconclusive() {
                3
            } else {
                0
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            2
        }
    };
    ExitCode::from(code)
}

fn execute(cli: &Cli) -> Result<Report, String> {
    match &cli.command {
        Command::AnalyzeSpace { gram } => analyze_space(gram, cli.tol),
        Command::ClassifySubspace { gram, basis } => classify_subspace(gram, basis, cli.tol),
        Command::MinimalPair { kernel, majorant } => {
            minimal_pair(kernel, majorant.as_deref(), cli.tol)
        }
        Command::CheckInvariance {
            kernel,
            generators,
            pairs,
            halfwidth,
            dim,
        } => check_invariance(
            kernel, generators, *pairs, *halfwidth, *dim, cli.tol, cli.seed,
        ),
        Command::Irreducibility {
            gram,
            generators,
            fundamental,
        } => irreducibility(gram, generators, *fundamental, cli.tol, cli.seed),
        Command::Decompose {
            kernel,
            symmetry,
            generators,
        } => decompose(kernel, symmetry, generators, cli.tol, cli.seed),
        Command::Demo(DemoCommand::Lorentz {
            degree,
            points,
            halfwidth,
        }) => {
            let (_, report) =
                krein::decomposition::lorentz_graded_demo(*degree, *points, *halfwidth, cli.seed)
                    .map_err(|e| e.to_string())?;
            Ok(report)
        }
        Command::Demo(DemoCommand::Multiplicity { summands }) => {
            demo_multiplicity(*summands).map_err(|e| e.to_string())
        }
        Command::Demo(DemoCommand::Ex3 { dim_h }) => demo_ex3(*dim_h, cli.tol, cli.seed),
    }
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|err| format!("cannot read {}: {err}", path.display()))
}

fn load_matrix(path: &Path) -> Result<CMatrix, String> {
    io::parse_matrix(&read(path)?).map_err(|err| format!("{}: {err}", path.display()))
}

fn load_real_matrix(path: &Path) -> Result<RMatrix, String> {
    let m = load_matrix(path)?;
    if !linalg::is_real(&m, 0.0) {
        return Err(format!("{}: matrix must be real", path.display()));
    }
    Ok(linalg::real_part(&m))
}

/// Resolves one `builtin <name> <args...>` generator line.
fn resolve_builtin(name: &str, args: &[String]) -> Result<CMatrix, String> {
    let theta = |expected: usize| -> Result<f64, String> {
        if args.len() != expected {
            return Err(format!("builtin {name} takes {expected} argument(s)"));
        }
        args[0]
            .parse::<f64>()
            .map_err(|_| format!("builtin {name}: bad angle `{}`", args[0]))
    };
    match name {
        "boost12" => Ok(to_complex(&boost12(theta(1)?))),
        "boost13" => Ok(to_complex(&boost13(theta(1)?))),
        "rot23" => Ok(to_complex(&rot23(theta(1)?))),
        "half-turn23" => {
            if !args.is_empty() {
                return Err("builtin half-turn23 takes no arguments".into());
            }
            Ok(to_complex(&half_turn23()))
        }
        "identity" => {
            let n: usize = args
                .first()
                .and_then(|a| a.parse().ok())
                .ok_or("builtin identity takes a dimension")?;
            Ok(identity(n))
        }
        "poly-rep" => {
            // `poly-rep <degree> <base builtin> <base args...>`.
            let degree: usize = args
                .first()
                .and_then(|a| a.parse().ok())
                .ok_or("builtin poly-rep takes a degree then a base builtin")?;
            let base_name = args.get(1).ok_or("builtin poly-rep needs a base builtin")?;
            let base = resolve_builtin(base_name, &args[2..])?;
            poly_representation(&base, degree).map_err(|e| e.to_string())
        }
        other => Err(format!("unknown builtin generator `{other}`")),
    }
}

fn load_action(path: &Path) -> Result<GroupAction, String> {
    let entries = io::parse_generator_file(&read(path)?)
        .map_err(|err| format!("{}: {err}", path.display()))?;
    if entries.is_empty() {
        return Err(format!("{}: no generators", path.display()));
    }
    let mut generators = Vec::new();
    for entry in entries {
        generators.push(match entry {
            GeneratorEntry::Matrix(m) => m,
            GeneratorEntry::Builtin { name, args } => resolve_builtin(&name, &args)?,
        });
    }
    GroupAction::new(generators).map_err(|e| e.to_string())
}

fn load_kernel_function(spec_line: &str) -> Result<KernelFunction, String> {
    let spec = io::parse_kernel_spec(spec_line).map_err(|e| e.to_string())?;
    let metric = match &spec.metric_path {
        Some(path) => Some(load_real_matrix(Path::new(path))?),
        None => None,
    };
    let values = match &spec.values_path {
        Some(path) => Some(load_matrix(Path::new(path))?),
        None => None,
    };
    KernelFunction::from_parts(&spec.name, spec.degree, metric, values).map_err(|e| e.to_string())
}

fn analyze_space(gram: &Path, tol: f64) -> Result<Report, String> {
    let space = IndefiniteSpace::new(load_matrix(gram)?, tol).map_err(|e| e.to_string())?;
    let mut report = Report::new("space analysis");
    report.int("dim", space.dim() as i64);
    let regular = !space.is_degenerate();
    report.bool("regular", regular);
    if regular {
        let fs = space.canonical_symmetry().map_err(|e| e.to_string())?;
        let (p, q) = fs.signature();
        report.int("signature_plus", p as i64);
        report.int("signature_minus", q as i64);
        report.matrix("canonical_symmetry", fs.j().clone());
        report.matrix("hilbert_metric", fs.metric().clone());
    } else {
        // Certificate: a basis of the Gram's nullspace.
        report.matrix(
            "null_directions",
            linalg::nullspace_auto(space.gram(), krein::RANK_TOL),
        );
    }
    Ok(report)
}

fn classify_subspace(gram: &Path, basis: &Path, tol: f64) -> Result<Report, String> {
    let space = IndefiniteSpace::new(load_matrix(gram)?, tol).map_err(|e| e.to_string())?;
    let sub = Subspace::new(space.dim(), load_matrix(basis)?).map_err(|e| e.to_string())?;
    let class = space.classify_subspace(&sub).map_err(|e| e.to_string())?;
    let mut report = Report::new("subspace classification");
    report.int("ambient_dim", space.dim() as i64);
    report.int("dim", sub.dim() as i64);
    report.text("kind", class.kind.as_str());
    let (p, q, z) = class.signature;
    report.int("signature_plus", p as i64);
    report.int("signature_minus", q as i64);
    report.int("signature_zero", z as i64);
    report.bool("regular", class.regular);
    if class.degenerate {
        let iso = space.isotropic_part(&sub).map_err(|e| e.to_string())?;
        report.matrix("isotropic_basis", iso.basis().clone());
    }
    Ok(report)
}

fn minimal_pair(kernel: &Path, majorant: Option<&Path>, tol: f64) -> Result<Report, String> {
    let k = HermitianKernel::new(load_matrix(kernel)?, tol).map_err(|e| e.to_string())?;
    let pair: KernelPair = match majorant {
        Some(path) => {
            let h = HermitianKernel::new(load_matrix(path)?, tol).map_err(|e| e.to_string())?;
            KernelPair::new(k, h, tol).map_err(|e| e.to_string())?
        }
        None => minimal_majorant(&k, tol).map_err(|e| e.to_string())?,
    };
    let mut report = Report::new("kernel pair");
    report.int("dim", pair.k.dim() as i64);
    report.int("kernel_rank", pair.k.rank() as i64);
    report.bool("bounded", true);
    report.bool("minimal", pair.minimal);
    // Certificate: the rank-additivity table deciding minimality.
    let difference = pair.h.matrix() - pair.k.matrix();
    let sum = pair.h.matrix() + pair.k.matrix();
    let scale = linalg::max_abs(&difference).max(linalg::max_abs(&sum));
    let rank_at = |m: &CMatrix| linalg::rank_at_scale(m, krein::RANK_TOL, scale.max(1e-300)) as i64;
    report.int("rank_h_minus_k", rank_at(&difference));
    report.int("rank_h_plus_k", rank_at(&sum));
    report.int("rank_sum", rank_at(&(&difference + &sum)));
    report.matrix("majorant", pair.h.matrix().clone());
    Ok(report)
}

fn check_invariance(
    kernel_spec: &str,
    generators: &Path,
    pairs: usize,
    halfwidth: f64,
    dim: usize,
    tol: f64,
    seed: u64,
) -> Result<Report, String> {
    let kfun = load_kernel_function(kernel_spec)?;
    let entries = io::parse_generator_file(&read(generators)?)
        .map_err(|err| format!("{}: {err}", generators.display()))?;
    let mut mats: Vec<RMatrix> = Vec::new();
    for entry in entries {
        let m = match entry {
            GeneratorEntry::Matrix(m) => m,
            GeneratorEntry::Builtin { name, args } => resolve_builtin(&name, &args)?,
        };
        if !linalg::is_real(&m, 0.0) {
            return Err("kernel invariance acts on points: generators must be real".into());
        }
        mats.push(linalg::real_part(&m));
    }
    if mats.is_empty() {
        return Err(format!("{}: no generators", generators.display()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sampled = sample_point_pairs(&mut rng, pairs, dim, halfwidth);

    let mut report = Report::new("kernel invariance");
    report.text("kernel", kfun.name());
    report.int("pairs", sampled.len() as i64);
    let mut all_ok = true;
    let mut items = Vec::new();
    for (index, g) in mats.iter().enumerate() {
        let verdict =
            check_kernel_invariance(&kfun, g, &sampled, tol).map_err(|e| e.to_string())?;
        all_ok &= verdict.ok;
        let mut item = Report::new(format!("generator {index}"));
        item.float("residual", verdict.residual);
        item.bool("invariant", verdict.ok);
        items.push(item);
    }
    report.bool("invariant", all_ok);
    report.list("generators", items);
    Ok(report)
}

fn irreducibility(
    gram: &Path,
    generators: &Path,
    fundamental: Option<usize>,
    tol: f64,
    seed: u64,
) -> Result<Report, String> {
    let space = IndefiniteSpace::new(load_matrix(gram)?, tol).map_err(|e| e.to_string())?;
    let mut action = load_action(generators)?;
    if let Some(index) = fundamental {
        action = action.with_fundamental(index).map_err(|e| e.to_string())?;
    }
    let rep = irreducibility_report(&space, &action, seed).map_err(|e| e.to_string())?;
    Ok(rep.to_report())
}

fn decompose(
    kernel: &Path,
    symmetry: &Path,
    generators: &Path,
    tol: f64,
    seed: u64,
) -> Result<Report, String> {
    let k = load_matrix(kernel)?;
    let j = load_matrix(symmetry)?;
    let action = load_action(generators)?;
    let result = krein::decomposition::decompose_invariant_pair(&action, &k, &j, tol, seed)
        .map_err(|e| e.to_string())?;
    Ok(result.to_report())
}

fn demo_ex3(dim_h: usize, tol: f64, seed: u64) -> Result<Report, String> {
    let action = shear_action(dim_h).map_err(|e| e.to_string())?;
    let space = IndefiniteSpace::new(shear_gram(dim_h), tol).map_err(|e| e.to_string())?;
    let rep = irreducibility_report(&space, &action, seed).map_err(|e| e.to_string())?;
    let mut report = Report::new("shear action demo");
    report.int("block_dim", dim_h as i64);
    report.int("ambient_dim", 2 * dim_h as i64);
    report.nested("irreducibility", rep.to_report());
    Ok(report)
}
