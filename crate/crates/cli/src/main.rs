//! Benchmark driver.
//!
//! Subcommands: `solve` runs one accelerated solve from flags or a manifest,
//! `sweep` repeats it over a grid-size or diffusion-constant axis,
//! `problems emit` writes a test matrix in Matrix Market form, and
//! `analyze-fap` reports weak/strong approximation constants of a level-0
//! restriction. `AIRAMG_THREADS` caps sweep parallelism.

use airamg::analysis::{approximation_report_with, build_spd_surrogate, WAP_SAP_PAIRS};
use airamg::hierarchy::{setup, SolverConfig};
use airamg::io::write_matrix_market;
use airamg::krylov::{KrylovConfig, KrylovMethod};
use airamg::problems::{block_diag_prescale, ProblemKind, ProblemSpec};
use airamg::transfer::{CoarsenType, ConstraintMode, InverseType, RestrictionSource};
use airamg_cli::run::write_sweep_csv;
use airamg_cli::{run_benchmark, run_sweep, OutputPaths, RunManifest, SweepAxis};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::io::Write;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "airamg",
    version,
    about = "Reduction-based AMG benchmark driver"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one benchmark solve and write its reports.
    Solve(SolveArgs),
    /// Run the benchmark over a parameter axis and write a CSV table.
    Sweep(SweepArgs),
    /// Test-matrix utilities.
    Problems {
        #[command(subcommand)]
        cmd: ProblemsCmd,
    },
    /// Approximation-property report for a level-0 restriction operator.
    AnalyzeFap(AnalyzeArgs),
}

#[derive(Subcommand)]
enum ProblemsCmd {
    /// Write the matrix in Matrix Market form plus a JSON metadata sidecar.
    Emit {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Output path for the .mtx file.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Poisson2d,
    Poisson3d,
    Aniso2d,
    JumpBox,
    JumpSawtooth,
    AdvdiffConstant,
    AdvdiffRecirc,
}

impl From<KindArg> for ProblemKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Poisson2d => ProblemKind::Poisson2D,
            KindArg::Poisson3d => ProblemKind::Poisson3D,
            KindArg::Aniso2d => ProblemKind::AnisoDiffusion2D,
            KindArg::JumpBox => ProblemKind::JumpBoxInBox,
            KindArg::JumpSawtooth => ProblemKind::JumpSawtooth,
            KindArg::AdvdiffConstant => ProblemKind::AdvDiffConstant,
            KindArg::AdvdiffRecirc => ProblemKind::AdvDiffRecirculating,
        }
    }
}

#[derive(Args)]
struct ProblemArgs {
    /// Test problem family.
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    /// Interior grid points per axis.
    #[arg(long, default_value_t = 32)]
    n: usize,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    #[arg(long)]
    nz: Option<usize>,
    /// Anisotropy strength.
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    /// Anisotropy rotation angle in radians.
    #[arg(long, default_value_t = 0.0)]
    angle: f64,
    /// Diffusion constant for advection-diffusion kinds.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Coefficient inside the jump region.
    #[arg(long, default_value_t = 1e4)]
    d_high: f64,
    /// Emit raw stencils without the 1/h^2 scaling.
    #[arg(long)]
    no_h_scaling: bool,
}

impl ProblemArgs {
    fn to_spec(&self) -> airamg::Result<ProblemSpec> {
        let kind = self
            .kind
            .ok_or_else(|| airamg::AmgError::InvalidConfig("--kind is required".into()))?;
        let mut spec = ProblemSpec::new(kind.into(), self.n);
        if let Some(nx) = self.nx {
            spec.nx = nx;
        }
        if let Some(ny) = self.ny {
            spec.ny = ny;
        }
        if let Some(nz) = self.nz {
            spec.nz = nz;
        }
        spec.epsilon = self.epsilon;
        spec.angle = self.angle;
        spec.alpha = self.alpha;
        spec.d_high = self.d_high;
        spec.h_scaling = !self.no_h_scaling;
        Ok(spec)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    /// Constrained transfers, aggregation coarsening, CG (symmetric).
    ClairSym,
    /// Constrained transfers for nonsymmetric problems, GMRES.
    ClairNonsym,
    /// Constrained transfers on first-pass Ruge-Stuben coarsening.
    ClairHc,
    /// Plain local ideal restriction with classical interpolation.
    Lair,
    /// lAIR with the nonsymmetric protocol (second pass, prescale).
    LairNonsym,
    /// Classical Ruge-Stuben baseline with R = P^T.
    ClassicalRs,
}

#[derive(Clone, Copy, ValueEnum)]
enum CoarsenArg {
    Fc,
    Agg,
}

#[derive(Clone, Copy, ValueEnum)]
enum InverseArg {
    Lu,
    Diag,
}

#[derive(Clone, Copy, ValueEnum)]
enum RFromArg {
    /// Build R by running the constrained builder on A^T.
    At,
    /// Reuse interpolation: R = P^T.
    Pt,
}

#[derive(Clone, Copy, ValueEnum)]
enum KrylovArg {
    Cg,
    Gmres,
}

#[derive(Args)]
struct SolverArgs {
    /// Named parameter set to start from; individual flags override it.
    #[arg(long, value_enum, default_value = "clair-sym")]
    preset: PresetArg,
    #[arg(long, value_enum)]
    coarsen: Option<CoarsenArg>,
    /// Sparsity pattern degree m.
    #[arg(long)]
    sparsity_degree: Option<usize>,
    #[arg(long)]
    coarsen_theta: Option<f64>,
    #[arg(long)]
    interp_theta: Option<f64>,
    /// CFF-Jacobi sweeps applied to the constraint vector per level.
    #[arg(long)]
    constraint_steps: Option<usize>,
    /// Drop the near-nullspace mode constraints entirely.
    #[arg(long)]
    no_constraints: bool,
    #[arg(long, value_enum)]
    inverse: Option<InverseArg>,
    /// Outer residual-update iterations k.
    #[arg(long)]
    outer_k: Option<usize>,
    #[arg(long, value_enum)]
    r_from: Option<RFromArg>,
    /// Enable the second pass of Ruge-Stuben coarsening.
    #[arg(long)]
    second_pass: Option<bool>,
    /// Pattern degree of the lAIR restriction.
    #[arg(long)]
    r_degree: Option<usize>,
    #[arg(long)]
    drop_tol: Option<f64>,
    /// Filter coarse operators after each triple product.
    #[arg(long)]
    coarse_filter: Option<bool>,
    /// Block size for diagonal prescaling; 0 disables it.
    #[arg(long)]
    prescale_block: Option<usize>,
    #[arg(long)]
    max_levels: Option<usize>,
    #[arg(long)]
    max_coarse: Option<usize>,
    /// Run FFC postsmoothing unweighted.
    #[arg(long)]
    unweighted_post: bool,
    /// Fixed Jacobi weight instead of the per-level Arnoldi estimate.
    #[arg(long)]
    fixed_weight: Option<f64>,
}

impl SolverArgs {
    fn to_config(&self) -> SolverConfig {
        let mut cfg = match self.preset {
            PresetArg::ClairSym => SolverConfig::clair_symmetric(),
            PresetArg::ClairNonsym => SolverConfig::clair_nonsymmetric(),
            PresetArg::ClairHc => SolverConfig::clair_high_complexity(),
            PresetArg::Lair => SolverConfig::lair_default(),
            PresetArg::LairNonsym => SolverConfig::lair_nonsymmetric(),
            PresetArg::ClassicalRs => SolverConfig::classical_rs(),
        };
        if let Some(c) = self.coarsen {
            cfg.transfer.coarsen_type = match c {
                CoarsenArg::Fc => CoarsenType::Fc,
                CoarsenArg::Agg => CoarsenType::Agg,
            };
        }
        if let Some(m) = self.sparsity_degree {
            cfg.transfer.sparsity_degree = m;
        }
        if let Some(t) = self.coarsen_theta {
            cfg.coarsen_theta = t;
        }
        if let Some(t) = self.interp_theta {
            cfg.transfer.interp_strength_theta = t;
        }
        if let Some(s) = self.constraint_steps {
            cfg.transfer.constraint_smoothing_steps = s;
        }
        if self.no_constraints {
            cfg.transfer.constraints = ConstraintMode::None;
        }
        if let Some(inv) = self.inverse {
            cfg.transfer.inverse_type = match inv {
                InverseArg::Lu => InverseType::ExactLu,
                InverseArg::Diag => InverseType::Diagonal,
            };
        }
        if let Some(k) = self.outer_k {
            cfg.transfer.outer_iterations = k;
        }
        if let Some(r) = self.r_from {
            cfg.transfer.build_r_from = match r {
                RFromArg::At => RestrictionSource::TransposeOfA,
                RFromArg::Pt => RestrictionSource::PTranspose,
            };
        }
        if let Some(sp) = self.second_pass {
            cfg.second_pass = sp;
        }
        if let Some(d) = self.r_degree {
            cfg.restriction_degree = d;
        }
        if let Some(d) = self.drop_tol {
            cfg.drop_tol = d;
        }
        if let Some(f) = self.coarse_filter {
            cfg.coarse_filter = f;
        }
        if let Some(bs) = self.prescale_block {
            cfg.prescale_block = if bs == 0 { None } else { Some(bs) };
        }
        if let Some(m) = self.max_levels {
            cfg.max_levels = m;
        }
        if let Some(m) = self.max_coarse {
            cfg.max_coarse = m;
        }
        if self.unweighted_post {
            cfg.weighted_postsmoothing = false;
        }
        if let Some(w) = self.fixed_weight {
            cfg.fixed_weight = Some(w);
        }
        cfg
    }

    fn default_krylov(&self) -> KrylovMethod {
        match self.preset {
            PresetArg::ClairSym | PresetArg::ClassicalRs => KrylovMethod::Cg,
            _ => KrylovMethod::Gmres,
        }
    }
}

#[derive(Args)]
struct KrylovArgs {
    #[arg(long, value_enum)]
    krylov: Option<KrylovArg>,
    #[arg(long, default_value_t = 1e-8)]
    rel_tol: f64,
    #[arg(long, default_value_t = 0.0)]
    abs_tol: f64,
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
    #[arg(long, default_value_t = 100)]
    restart: usize,
}

impl KrylovArgs {
    fn to_config(&self, default_method: KrylovMethod) -> KrylovConfig {
        KrylovConfig {
            method: match self.krylov {
                Some(KrylovArg::Cg) => KrylovMethod::Cg,
                Some(KrylovArg::Gmres) => KrylovMethod::Gmres,
                None => default_method,
            },
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_iters: self.max_iters,
            restart: self.restart,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Load the whole run from a manifest file instead of flags.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    krylov: KrylovArgs,
    #[arg(long, default_value_t = 1234)]
    seed: u64,
    /// Prefix for {prefix}.manifest.json, {prefix}.report.json,
    /// {prefix}.residuals.csv.
    #[arg(long)]
    out_prefix: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    krylov: KrylovArgs,
    #[arg(long, default_value_t = 1234)]
    seed: u64,
    /// Axis to sweep: "size" or "alpha".
    #[arg(long)]
    axis: String,
    /// Comma-separated axis values.
    #[arg(long)]
    values: String,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Prefix for {prefix}.fap.csv and {prefix}.fap.json.
    #[arg(long)]
    out_prefix: PathBuf,
}

fn build_manifest(
    manifest_path: &Option<PathBuf>,
    problem: &ProblemArgs,
    solver: &SolverArgs,
    krylov: &KrylovArgs,
    seed: u64,
) -> airamg::Result<RunManifest> {
    if let Some(path) = manifest_path {
        return RunManifest::load(path);
    }
    Ok(RunManifest {
        problem: problem.to_spec()?,
        solver: solver.to_config(),
        krylov: krylov.to_config(solver.default_krylov()),
        seed,
        output: OutputPaths::default(),
    })
}

fn cmd_solve(args: SolveArgs) -> airamg::Result<()> {
    let mut manifest = build_manifest(
        &args.manifest,
        &args.problem,
        &args.solver,
        &args.krylov,
        args.seed,
    )?;
    if let Some(prefix) = &args.out_prefix {
        let stem = prefix.to_string_lossy();
        manifest.output.report_json = Some(PathBuf::from(format!("{stem}.report.json")));
        manifest.output.residuals_csv = Some(PathBuf::from(format!("{stem}.residuals.csv")));
        manifest.save(&PathBuf::from(format!("{stem}.manifest.json")))?;
    }
    let (report, timing) = run_benchmark(&manifest)?;
    println!(
        "{} n={} status={} iters={} gamma={:.4} OC={:.3} wpd={:.2} setup={:.2}s solve={:.2}s",
        report.kind,
        report.n,
        report.status,
        report.iterations,
        report.gamma,
        report.operator_complexity,
        report.work_per_digit,
        timing.setup_seconds,
        timing.solve_seconds
    );
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> airamg::Result<()> {
    let manifest = build_manifest(
        &args.manifest,
        &args.problem,
        &args.solver,
        &args.krylov,
        args.seed,
    )?;
    let axis = match args.axis.as_str() {
        "size" => SweepAxis::GridSize(
            args.values
                .split(',')
                .map(|s| s.trim().parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| airamg::AmgError::Parse(format!("--values: {e}")))?,
        ),
        "alpha" => SweepAxis::Alpha(
            args.values
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| airamg::AmgError::Parse(format!("--values: {e}")))?,
        ),
        other => {
            return Err(airamg::AmgError::InvalidConfig(format!(
                "unknown axis '{other}' (expected 'size' or 'alpha')"
            )))
        }
    };
    let rows = run_sweep(&manifest, &axis)?;
    write_sweep_csv(&rows, &args.out)?;
    for r in &rows {
        println!(
            "{}={} {} n={} iters={} status={} OC={:.3} wpd={:.2}",
            r.axis,
            r.value,
            r.method,
            r.n,
            r.iterations,
            r.status,
            r.operator_complexity,
            r.work_per_digit
        );
    }
    Ok(())
}

fn cmd_emit(problem: ProblemArgs, out: PathBuf) -> airamg::Result<()> {
    let spec = problem.to_spec()?;
    let a = spec.build()?;
    write_matrix_market(&a, &out)?;
    let meta = serde_json::json!({
        "spec": spec,
        "n": a.n_rows(),
        "nnz": a.nnz(),
        "h": spec.h(),
    });
    let meta_path = out.with_extension("meta.json");
    std::fs::write(
        &meta_path,
        format!("{}\n", serde_json::to_string_pretty(&meta).unwrap()),
    )?;
    println!(
        "wrote {} ({} rows, {} nonzeros) and {}",
        out.display(),
        a.n_rows(),
        a.nnz(),
        meta_path.display()
    );
    Ok(())
}

fn cmd_analyze(args: AnalyzeArgs) -> airamg::Result<()> {
    let spec = args.problem.to_spec()?;
    let cfg = args.solver.to_config();
    let a0 = spec.build()?;
    let h = setup(&a0, &cfg)?;
    if h.levels.is_empty() {
        return Err(airamg::AmgError::InvalidConfig(
            "problem too small: hierarchy has a single level and no restriction".into(),
        ));
    }
    let a = match cfg.prescale_block {
        Some(bs) => block_diag_prescale(&a0, bs)?,
        None => a0,
    };
    let surrogate = build_spd_surrogate(&a)?;
    let reports = approximation_report_with(&surrogate, &h.levels[0].r.matrix, &WAP_SAP_PAIRS)?;
    let stem = args.out_prefix.to_string_lossy();

    let csv_path = PathBuf::from(format!("{stem}.fap.csv"));
    let mut f = std::io::BufWriter::new(std::fs::File::create(&csv_path)?);
    writeln!(f, "index,sigma,K_wap,K_sap")?;
    let n = reports[0].singular_values.len();
    for i in 0..n {
        writeln!(
            f,
            "{},{:.16e},{:.16e},{:.16e}",
            i,
            reports[0].singular_values[i],
            reports[0].per_vector_constants[i],
            reports[1].per_vector_constants[i]
        )?;
    }
    f.flush()?;

    let json_path = PathBuf::from(format!("{stem}.fap.json"));
    let doc = serde_json::json!({
        "method": format!("{:?}", cfg.method),
        "n": n,
        "side": "left",
        "k_max": { "wap": reports[0].k_max, "sap": reports[1].k_max },
    });
    std::fs::write(
        &json_path,
        format!("{}\n", serde_json::to_string_pretty(&doc).unwrap()),
    )?;
    println!(
        "K_max: WAP {:.4e}, SAP {:.4e}; wrote {} and {}",
        reports[0].k_max,
        reports[1].k_max,
        csv_path.display(),
        json_path.display()
    );
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Command::Solve(args) => cmd_solve(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Problems { cmd } => match cmd {
            ProblemsCmd::Emit { problem, out } => cmd_emit(problem, out),
        },
        Command::AnalyzeFap(args) => cmd_analyze(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
