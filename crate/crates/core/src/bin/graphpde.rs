use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use graphpde::fd::{self, Side};
use graphpde::generate;
use graphpde::io::{self, LoadedGraph, ReportFile, RunManifest};
use graphpde::operators::{classify_ellipticity, homogeneity_check, ClassifyConfig, Exponent, HomogeneityOutcome};
use graphpde::solvers::detect_infeasibility;
use graphpde::verify::{self, ComparisonOutcome, Expected, Family, FuzzConfig, EPS_STRICT};
use graphpde::{Error, Graph, InitialGuess, OperatorKind, OperatorSpec, Scheme, SolveStatus, SolverConfig, VertexField};

const EXIT_USAGE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_VERIFY: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "graphpde", version, about = "Elliptic equations on weighted directed graphs")]
struct Cli {
    /// Seed for every random choice in the run.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker thread cap (also read from GRAPHPDE_THREADS).
    #[arg(long, global = true, env = "GRAPHPDE_THREADS")]
    threads: Option<usize>,
    /// Directory for outputs and the run manifest.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve a Dirichlet problem.
    Solve(SolveArgs),
    /// Check comparison, Harnack, ellipticity or propagation of maxima.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Write a counterexample instance and check its expected outcome.
    Counterexample {
        /// `k3` or `median12`.
        name: String,
    },
    /// Error tables for the finite difference schemes.
    FdConsistency(FdArgs),
    /// Write a generated graph as JSON.
    Generate(GenerateArgs),
    /// Shortest directed path distances from a vertex.
    Distance {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: Option<String>,
    },
    /// Re-run a manifest and compare the outputs byte for byte.
    Replay { manifest: PathBuf },
}

#[derive(Args, Debug, Clone)]
struct OpArgs {
    /// Operator kind, e.g. laplacian, eikonal-plus, one-laplacian, normalized-p.
    #[arg(long, conflicts_with = "spec")]
    op: Option<String>,
    /// Operator spec JSON file.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Exponent for normalized-p (a number or `inf`).
    #[arg(long)]
    p: Option<f64>,
    /// Constant right-hand side.
    #[arg(long, allow_negative_numbers = true)]
    rhs: Option<f64>,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum SchemeArg {
    FixedPoint,
    GaussSeidel,
    Eikonal,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long)]
    graph: PathBuf,
    #[command(flatten)]
    op: OpArgs,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    max_iter: usize,
    #[arg(long, default_value_t = 1.0)]
    damping: f64,
    #[arg(long, default_value_t = 1000)]
    window: usize,
    #[arg(long, value_enum, default_value = "gauss-seidel")]
    scheme: SchemeArg,
    /// `midrange`, a number, or a field CSV for a warm start.
    #[arg(long, default_value = "midrange", allow_hyphen_values = true)]
    init: String,
}

#[derive(Subcommand, Debug)]
enum VerifyCommand {
    /// `F(u) ≥ F(v)` implies `u ≤ v`.
    Comparison {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        op: OpArgs,
        #[arg(long)]
        u: PathBuf,
        #[arg(long)]
        v: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Harnack-type dichotomy at every interior vertex of a solution.
    Harnack {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        op: OpArgs,
        #[arg(long)]
        solution: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        residual_tol: f64,
        #[arg(long, default_value_t = EPS_STRICT)]
        eps: f64,
    },
    /// Randomized search for violations of the ellipticity conditions.
    Ellipticity {
        /// Defaults to a 5×5 grid.
        #[arg(long)]
        graph: Option<PathBuf>,
        #[command(flatten)]
        op: OpArgs,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 10.0)]
        range: f64,
    },
    /// Walk active neighbors from the maximum set of `u − v`.
    Propagate {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        op: OpArgs,
        #[arg(long)]
        u: PathBuf,
        #[arg(long)]
        v: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Sandwich `w0·min p ≤ f(p) ≤ w0·max p` on random gradients.
    Homogeneity {
        #[arg(long)]
        graph: Option<PathBuf>,
        #[command(flatten)]
        op: OpArgs,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
    /// Comparison on random ordered boundary data over a graph family.
    Fuzz {
        #[command(flatten)]
        op: OpArgs,
        /// trees, grids, mixed or random.
        #[arg(long, default_value = "mixed")]
        family: String,
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq)]
enum FdScheme {
    SecondDiff,
    AbsGrad,
    AbsGradLower,
    InfLaplacianBall,
    Lambda1,
}

#[derive(Args, Debug)]
struct FdArgs {
    #[arg(long, value_enum)]
    scheme: FdScheme,
    /// Test function name.
    #[arg(long = "fn")]
    function: String,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.05,0.025")]
    steps: Vec<f64>,
    /// Radii for the ball scheme (defaults to the steps).
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
    /// Directions on the circle (ball) or half circle (lambda1).
    #[arg(long, default_value_t = 64)]
    directions: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum GraphKind {
    Grid,
    Path,
    Tree,
    Random,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    kind: GraphKind,
    #[arg(long, default_value_t = 5)]
    nx: usize,
    #[arg(long, default_value_t = 5)]
    ny: usize,
    #[arg(long, default_value_t = 1.0)]
    h: f64,
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 0.15)]
    density: f64,
    /// Output file name inside `--out`.
    #[arg(long, default_value = "graph.json")]
    name: String,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Validation(String),
    Solver(String),
    Verify(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Validation(_) => EXIT_VALIDATION,
            Failure::Solver(_) => EXIT_SOLVER,
            Failure::Verify(_) => EXIT_VERIFY,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Validation(m) | Failure::Solver(m) | Failure::Verify(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } | Error::Json(_) | Error::Csv(_) | Error::Io(_) | Error::UnknownName(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Validation(e.to_string()),
        }
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Collects what a run read, wrote and was configured with.
struct Run {
    out: PathBuf,
    manifest: RunManifest,
}

impl Run {
    fn input(&mut self, p: &Path) {
        self.manifest.inputs.push(p.display().to_string());
    }

    fn config(&mut self, key: &str, value: impl ToString) {
        self.manifest.config.insert(key.to_string(), value.to_string());
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), Failure> {
        fs::write(self.out.join(name), contents).map_err(|e| Failure::Usage(format!("{name}: {e}")))?;
        self.manifest.outputs.push(name.to_string());
        Ok(())
    }

    fn write_json(&mut self, name: &str, value: &impl serde::Serialize) -> Result<(), Failure> {
        let text = serde_json::to_string_pretty(value).expect("serializable") + "\n";
        self.write(name, &text)
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match execute(cli, strip_out(&argv[1..])) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

/// Arguments without `--out`, so a manifest can be replayed elsewhere.
fn strip_out(args: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip = false;
    for a in args {
        if skip {
            skip = false;
        } else if a == "--out" {
            skip = true;
        } else if !a.starts_with("--out=") {
            out.push(a.clone());
        }
    }
    out
}

fn execute(cli: Cli, args: Vec<String>) -> CmdResult {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(format!("thread pool: {e}")))?;
    }
    fs::create_dir_all(&cli.out).map_err(|e| Failure::Usage(format!("{}: {e}", cli.out.display())))?;
    let name = command_name(&cli.command);
    let mut run = Run {
        out: cli.out.clone(),
        manifest: RunManifest {
            command: name.to_string(),
            args,
            inputs: Vec::new(),
            config: BTreeMap::new(),
            seed: cli.seed,
            version: graphpde::VERSION.to_string(),
            outputs: Vec::new(),
        },
    };
    if let Ok(cwd) = std::env::current_dir() {
        run.config("cwd", cwd.display());
    }
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(&mut run, a),
        Command::Verify(v) => cmd_verify(&mut run, v, cli.seed),
        Command::Counterexample { name } => cmd_counterexample(&mut run, &name),
        Command::FdConsistency(a) => cmd_fd(&mut run, a),
        Command::Generate(a) => cmd_generate(&mut run, a, cli.seed),
        Command::Distance { graph, from, to } => cmd_distance(&mut run, &graph, &from, to.as_deref()),
        Command::Replay { manifest } => return cmd_replay(&manifest, &cli.out),
    };
    // the manifest is written even when the run fails
    run.manifest.outputs.push("manifest.json".into());
    run.manifest.write(&run.out.join("manifest.json")).map_err(Failure::from)?;
    result
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Solve(_) => "solve",
        Command::Verify(v) => match v {
            VerifyCommand::Comparison { .. } => "verify comparison",
            VerifyCommand::Harnack { .. } => "verify harnack",
            VerifyCommand::Ellipticity { .. } => "verify ellipticity",
            VerifyCommand::Propagate { .. } => "verify propagate",
            VerifyCommand::Homogeneity { .. } => "verify homogeneity",
            VerifyCommand::Fuzz { .. } => "verify fuzz",
        },
        Command::Counterexample { .. } => "counterexample",
        Command::FdConsistency(_) => "fd-consistency",
        Command::Generate(_) => "generate",
        Command::Distance { .. } => "distance",
        Command::Replay { .. } => "replay",
    }
}

fn load_graph(run: &mut Run, path: &Path) -> Result<LoadedGraph, Failure> {
    run.input(path);
    io::read_graph(path).map_err(|e| match e {
        Error::InvalidGraph(_) => Failure::Validation(format!("{}: {e}", path.display())),
        other => other.into(),
    })
}

fn load_spec(run: &mut Run, a: &OpArgs) -> Result<OperatorSpec, Failure> {
    let mut spec = match (&a.op, &a.spec) {
        (_, Some(path)) => {
            run.input(path);
            let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            OperatorSpec::from_json(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        (Some(name), None) => OperatorSpec::new(OperatorKind::parse(name)?),
        (None, None) => return Err(Failure::Usage("one of --op or --spec is required".into())),
    };
    if let Some(p) = a.p {
        spec.p = Some(Exponent::from_value(p));
    }
    if let Some(rhs) = a.rhs {
        spec.source = Some(rhs.into());
    }
    run.config("operator", spec.to_json());
    Ok(spec)
}

fn load_field(run: &mut Run, path: &Path, graph: &Graph) -> Result<VertexField, Failure> {
    run.input(path);
    Ok(io::read_field_file(path, graph)?)
}

fn cmd_solve(run: &mut Run, a: SolveArgs) -> CmdResult {
    let LoadedGraph { graph, g } = load_graph(run, &a.graph)?;
    let spec = load_spec(run, &a.op)?;
    let op = spec.bind(&graph)?;
    let initial = match a.init.as_str() {
        "midrange" => InitialGuess::Midrange,
        s => match s.parse::<f64>() {
            Ok(c) => InitialGuess::Constant(c),
            Err(_) => InitialGuess::Field(load_field(run, Path::new(s), &graph)?),
        },
    };
    let scheme = match a.scheme {
        SchemeArg::FixedPoint => Scheme::FixedPointT,
        SchemeArg::GaussSeidel => Scheme::GaussSeidelLocal,
        SchemeArg::Eikonal => Scheme::EikonalLabelSetting,
    };
    let cfg = SolverConfig {
        tolerance: a.tol,
        max_iterations: a.max_iter,
        damping: a.damping,
        stagnation_window: a.window,
        scheme,
        initial,
    };
    for (k, v) in [
        ("tolerance", a.tol.to_string()),
        ("max_iterations", a.max_iter.to_string()),
        ("damping", a.damping.to_string()),
        ("stagnation_window", a.window.to_string()),
        ("scheme", format!("{scheme:?}")),
        ("init", a.init.clone()),
    ] {
        run.config(k, v);
    }
    let diag = detect_infeasibility(&op, &graph, &g, &cfg)?;
    let report = &diag.report;
    run.write("solution.csv", &io::field_to_csv(&graph, &report.solution))?;
    run.write("history.csv", &io::history_to_csv(report))?;
    let mut file = serde_json::to_value(ReportFile::new(&graph, report)).expect("serializable");
    file["infeasible"] = json!(diag.infeasible);
    file["floor"] = json!(diag.floor);
    file["diverging"] = json!(diag.diverging);
    run.write_json("report.json", &file)?;
    println!(
        "status: {}\niterations: {}\nresidual: {:e}",
        report.status.name(),
        report.iterations,
        report.residual_inf_norm
    );
    if let Some(floor) = diag.floor {
        println!("residual floor: {floor:e}{}", if diag.diverging { " (iterates diverging)" } else { "" });
    }
    match report.status {
        SolveStatus::Converged => Ok(()),
        s => Err(Failure::Solver(format!("solver finished with status {}", s.name()))),
    }
}

fn default_graph(run: &mut Run, path: &Option<PathBuf>) -> Result<Graph, Failure> {
    match path {
        Some(p) => Ok(load_graph(run, p)?.graph),
        None => {
            run.config("graph", "grid 5x5");
            Ok(generate::grid_graph(5, 5, 1.0))
        }
    }
}

fn cmd_verify(run: &mut Run, v: VerifyCommand, seed: u64) -> CmdResult {
    match v {
        VerifyCommand::Comparison { graph, op, u, v, tol } => {
            let LoadedGraph { graph, g } = load_graph(run, &graph)?;
            let op = load_spec(run, &op)?.bind(&graph)?;
            let (u, v) = (load_field(run, &u, &graph)?, load_field(run, &v, &graph)?);
            run.config("tol", tol);
            let outcome = verify::comparison_check(&op, &graph, &g, &u, &v, tol)?;
            run.write_json("comparison.json", &outcome)?;
            match outcome {
                ComparisonOutcome::Pass { max_difference } => {
                    println!("comparison: pass (max u - v = {max_difference:e})");
                    Ok(())
                }
                ComparisonOutcome::Violation(w) => {
                    println!("comparison: violated");
                    println!("M = {}\nW = {{{}}}\nC = {}\nZ = {{{}}}", w.m, w.w.join(", "), w.c, w.z.join(", "));
                    Err(Failure::Verify(format!(
                        "u > v at `{}`",
                        w.violating_vertex.unwrap_or_default()
                    )))
                }
            }
        }
        VerifyCommand::Harnack { graph, op, solution, residual_tol, eps } => {
            let LoadedGraph { graph, .. } = load_graph(run, &graph)?;
            let op = load_spec(run, &op)?.bind(&graph)?;
            let u = load_field(run, &solution, &graph)?;
            run.config("residual_tol", residual_tol);
            run.config("eps", eps);
            let rep = verify::harnack_check(&op, &graph, &u, residual_tol, eps)?;
            run.write_json("harnack.json", &rep)?;
            use verify::HarnackBranch::*;
            println!(
                "strict: {}  zero: {}  indeterminate: {}  violation: {}  residual too large: {}",
                rep.count(Strict),
                rep.count(Zero),
                rep.count(Indeterminate),
                rep.count(Violation),
                rep.precondition_failures.len()
            );
            if !rep.precondition_failures.is_empty() {
                let ids: Vec<&str> = rep.precondition_failures.iter().map(|(id, _)| id.as_str()).collect();
                return Err(Failure::Validation(format!("residual exceeds tolerance at {}", ids.join(", "))));
            }
            if rep.passed() {
                println!("harnack: pass");
                Ok(())
            } else {
                Err(Failure::Verify("dichotomy not established at every vertex".into()))
            }
        }
        VerifyCommand::Ellipticity { graph, op, trials, range } => {
            let graph = default_graph(run, &graph)?;
            let op = load_spec(run, &op)?.bind(&graph)?;
            run.config("trials", trials);
            run.config("range", range);
            let rep = classify_ellipticity(&op, &graph, ClassifyConfig { trials, seed, range })?;
            println!("{rep}");
            let summary = json!({
                "elliptic": rep.elliptic.to_string(),
                "proper": rep.proper.to_string(),
                "uniformly_elliptic": rep.uniformly_elliptic.to_string(),
                "weak_combined": rep.weak_combined.to_string(),
            });
            run.write_json("ellipticity.json", &summary)?;
            Ok(())
        }
        VerifyCommand::Propagate { graph, op, u, v, tol } => {
            let LoadedGraph { graph, .. } = load_graph(run, &graph)?;
            let op = load_spec(run, &op)?.bind(&graph)?;
            let (u, v) = (load_field(run, &u, &graph)?, load_field(run, &v, &graph)?);
            let trace = verify::propagate_max(&op, &graph, &u, &v, tol)?;
            run.write_json("propagation.json", &trace)?;
            println!(
                "M = {}  |W| = {}  steps: {}  reached boundary: {}",
                trace.m,
                trace.w.len(),
                trace.steps.len(),
                trace.reached_boundary
            );
            if trace.violations.is_empty() {
                Ok(())
            } else {
                Err(Failure::Verify(format!("{} active neighbors left W", trace.violations.len())))
            }
        }
        VerifyCommand::Homogeneity { graph, op, trials } => {
            let graph = default_graph(run, &graph)?;
            let op = load_spec(run, &op)?.bind(&graph)?;
            run.config("trials", trials);
            match homogeneity_check(&op, &graph, trials, seed)? {
                HomogeneityOutcome::Pass { trials } => {
                    println!("homogeneity: no violation found in {trials} trials");
                    run.write_json("homogeneity.json", &json!({"outcome": "pass", "trials": trials}))
                }
                HomogeneityOutcome::Counterexample { vertex, p, f, w0 } => {
                    let id = graph.id(vertex).to_string();
                    println!("homogeneity: counterexample at `{id}`: f = {f}, w0 = {w0}, p = {p:?}");
                    run.write_json(
                        "homogeneity.json",
                        &json!({"outcome": "counterexample", "vertex": id, "p": p, "f": f, "w0": w0}),
                    )?;
                    Err(Failure::Verify("homogeneity bound violated".into()))
                }
            }
        }
        VerifyCommand::Fuzz { op, family, trials } => {
            let spec = load_spec(run, &op)?;
            let family = Family::parse(&family)?;
            run.config("family", format!("{family:?}"));
            run.config("trials", trials);
            let cfg = FuzzConfig { trials, seed, family, bundle_dir: Some(run.out.join("bundles")), ..FuzzConfig::default() };
            let s = verify::comparison_fuzz(&spec, &cfg)?;
            run.write_json("fuzz.json", &s)?;
            if s.covered == 0 {
                println!("no theorem applies; {} trials run, orderings not asserted", s.trials);
            }
            println!(
                "trials: {}  covered: {}  converged: {}  max excess: {:e}  violations: {}",
                s.trials, s.covered, s.converged, s.max_excess, s.violations
            );
            if s.violations > 0 || s.harnack_violations > 0 {
                Err(Failure::Verify(format!("{} comparison counterexamples", s.violations)))
            } else if s.unconverged > 0 {
                Err(Failure::Solver(format!("{} trials did not converge", s.unconverged)))
            } else {
                Ok(())
            }
        }
    }
}

fn cmd_counterexample(run: &mut Run, name: &str) -> CmdResult {
    let ce = verify::counterexample_catalog(name).map_err(|e| Failure::Usage(e.to_string()))?;
    let op = ce.spec.bind(&ce.graph)?;
    let stem = match ce.expected {
        Expected::Infeasible => "k3",
        Expected::TwoSolutions { .. } => "median12",
    };
    run.write(&format!("{stem}.graph.json"), ce.graph_json)?;
    run.write(&format!("{stem}.op.json"), ce.op_json)?;
    match &ce.expected {
        Expected::Infeasible => {
            let cfg = SolverConfig { max_iterations: 10_000, ..SolverConfig::default() };
            let mut transcript = String::new();
            let mut all = true;
            for scheme in [Scheme::FixedPointT, Scheme::GaussSeidelLocal] {
                let d = detect_infeasibility(&op, &ce.graph, &ce.g, &SolverConfig { scheme, ..cfg.clone() })?;
                all &= d.infeasible;
                transcript += &format!(
                    "{scheme:?}: status {} after {} iterations, residual floor {:e}, diverging {}\n",
                    d.report.status.name(),
                    d.report.iterations,
                    d.floor.unwrap_or(0.0),
                    d.diverging
                );
            }
            print!("{transcript}");
            run.write("transcript.txt", &transcript)?;
            if all {
                Ok(())
            } else {
                Err(Failure::Verify("expected the instance to be flagged infeasible".into()))
            }
        }
        Expected::TwoSolutions { first, second } => {
            run.write("u_plus.csv", &io::field_to_csv(&ce.graph, first))?;
            run.write("u_minus.csv", &io::field_to_csv(&ce.graph, second))?;
            let mut ok = true;
            let mut transcript = String::new();
            for (label, u) in [("u = +1", first), ("u = -1", second)] {
                let r = op.evaluate(&ce.graph, u, &ce.g)?;
                let norm = r.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
                ok &= norm == 0.0;
                transcript += &format!("{label}: residual sup norm {norm:e}\n");
            }
            ok &= first != second;
            print!("{transcript}");
            run.write("transcript.txt", &transcript)?;
            if ok {
                Ok(())
            } else {
                Err(Failure::Verify("expected two distinct zero-residual fields".into()))
            }
        }
    }
}

fn cmd_fd(run: &mut Run, a: FdArgs) -> CmdResult {
    run.config("scheme", format!("{:?}", a.scheme));
    run.config("fn", &a.function);
    run.config("steps", format!("{:?}", a.steps));
    run.config("directions", a.directions);
    let (csv, ok, summary) = match a.scheme {
        FdScheme::SecondDiff | FdScheme::AbsGrad | FdScheme::AbsGradLower => {
            let f = fd::test_fn_1d(&a.function)?;
            let (table, bar) = match a.scheme {
                FdScheme::SecondDiff => (fd::second_difference_consistency(f.u, (f.d2u)(f.x0), f.x0, &a.steps), 1.9),
                FdScheme::AbsGrad => {
                    (fd::abs_gradient_consistency(f.u, (f.du)(f.x0).abs(), f.x0, &a.steps, Side::Upper), 0.9)
                }
                _ => (fd::abs_gradient_consistency(f.u, (f.du)(f.x0).abs(), f.x0, &a.steps, Side::Lower), 0.9),
            };
            // an exact scheme has no resolved error and meets every bar
            let ok = table.order.map_or(table.rows.iter().all(|r| r.resolved_error() == 0.0), |o| o >= bar);
            let summary = format!("fitted order: {} (bar {bar})", fmt_order(table.order));
            (table.to_csv(), ok, summary)
        }
        FdScheme::InfLaplacianBall => {
            let f = fd::test_fn_2d(&a.function)?;
            let radii = a.radii.clone().unwrap_or_else(|| a.steps.clone());
            let (cx, cy) = f.center;
            let t = fd::inf_laplacian_ball_consistency(
                f.u,
                (f.grad)(cx, cy),
                f.normalized_inf_laplacian(),
                f.center,
                &radii,
                a.directions,
            )?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["step", "value", "exact", "error", "floor", "angular_error", "fitted_order"]).expect("in memory");
            for r in &t.rows {
                let f = io::fmt_f64;
                w.write_record([
                    f(r.row.step),
                    f(r.row.value),
                    f(r.row.exact),
                    f(r.row.error),
                    f(r.row.floor),
                    f(r.angular_error),
                    t.table.order.map_or_else(|| "nan".into(), f),
                ])
                .expect("in memory");
            }
            let csv = String::from_utf8(w.into_inner().expect("in memory")).expect("utf-8");
            let summary = format!(
                "error non-increasing in r: {}; fitted order: {} (>= 1: {:?}, >= 2: {:?})",
                t.table.is_monotone(),
                fmt_order(t.table.order),
                t.order_at_least_one,
                t.order_at_least_two
            );
            (csv, t.table.is_monotone(), summary)
        }
        FdScheme::Lambda1 => {
            let f = fd::test_fn_2d(&a.function)?;
            let exact = f.lambda1();
            let (cx, cy) = f.center;
            let (xx, xy, yy) = (f.hess)(cx, cy);
            let spread = ((xx - yy).powi(2) + 4.0 * xy * xy).sqrt();
            // worst case of sampling the eigen-direction at spacing π/k, plus an O(h²) allowance
            let angular = spread * (std::f64::consts::PI / (2.0 * a.directions as f64)).sin().powi(2);
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["step", "value", "exact", "error", "bound"]).expect("in memory");
            let mut ok = true;
            for &h in &a.steps {
                let value = fd::lambda1_scheme(f.u, f.center, h, a.directions)?;
                let bound = angular + h * h + 1e-12;
                ok &= (value - exact).abs() <= bound;
                let f = io::fmt_f64;
                w.write_record([f(h), f(value), f(exact), f((value - exact).abs()), f(bound)]).expect("in memory");
            }
            let csv = String::from_utf8(w.into_inner().expect("in memory")).expect("utf-8");
            (csv, ok, format!("exact smallest eigenvalue: {exact}"))
        }
    };
    let name = format!("fd_{}_{}.csv", scheme_slug(a.scheme), a.function);
    print!("{csv}");
    println!("{summary}");
    run.write(&name, &csv)?;
    if ok {
        Ok(())
    } else {
        Err(Failure::Verify(format!("consistency bar missed: {summary}")))
    }
}

fn fmt_order(o: Option<f64>) -> String {
    o.map_or_else(|| "n/a (no resolved error)".into(), |o| format!("{o:.4}"))
}

fn scheme_slug(s: FdScheme) -> &'static str {
    match s {
        FdScheme::SecondDiff => "second_diff",
        FdScheme::AbsGrad => "abs_grad",
        FdScheme::AbsGradLower => "abs_grad_lower",
        FdScheme::InfLaplacianBall => "inf_laplacian_ball",
        FdScheme::Lambda1 => "lambda1",
    }
}

fn cmd_generate(run: &mut Run, a: GenerateArgs, seed: u64) -> CmdResult {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let graph = match a.kind {
        GraphKind::Grid => {
            if a.nx < 3 || a.ny < 3 {
                return Err(Failure::Usage("grid needs --nx and --ny of at least 3".into()));
            }
            generate::grid_graph(a.nx, a.ny, a.h)
        }
        GraphKind::Path if a.n >= 3 => generate::path_graph(a.n, 1.0 / a.h),
        GraphKind::Tree if a.n >= 3 => generate::random_tree(&mut rng, a.n, (0.1, 10.0)),
        GraphKind::Random if a.n >= 2 => generate::random_connected(&mut rng, a.n, a.density, (0.1, 10.0)),
        _ => return Err(Failure::Usage("--n is too small for this kind".into())),
    };
    run.config("kind", format!("{:?}", a.kind));
    run.config("nx", a.nx);
    run.config("ny", a.ny);
    run.config("h", a.h);
    run.config("n", a.n);
    run.config("density", a.density);
    run.write(&a.name, &(io::graph_to_json(&graph, None) + "\n"))?;
    println!("{} vertices, {} boundary, {} edges", graph.len(), graph.boundary().count(), graph.edge_count());
    Ok(())
}

fn cmd_distance(run: &mut Run, path: &Path, from: &str, to: Option<&str>) -> CmdResult {
    let LoadedGraph { graph, .. } = load_graph(run, path)?;
    let x = graph.index_of(from)?;
    run.config("from", from);
    let d = graph.distances_from(x);
    if let Some(to) = to {
        let y = graph.index_of(to)?;
        run.config("to", to);
        println!("{}", d[y]);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["vertex", "distance"]).expect("in memory");
    for (y, dist) in d.iter().enumerate() {
        let text = dist.finite().map_or_else(|| "inf".to_string(), io::fmt_f64);
        w.write_record([graph.id(y), &text]).expect("in memory");
    }
    let csv = String::from_utf8(w.into_inner().expect("in memory")).expect("utf-8");
    if to.is_none() {
        print!("{csv}");
    }
    run.write("distances.csv", &csv)
}

fn cmd_replay(manifest_path: &Path, out: &Path) -> CmdResult {
    let manifest = RunManifest::read(manifest_path)?;
    if manifest.version != graphpde::VERSION {
        eprintln!("warning: manifest written by version {}, running {}", manifest.version, graphpde::VERSION);
    }
    let original = manifest_path.parent().unwrap_or(Path::new("."));
    let out = std::path::absolute(out).map_err(|e| Failure::Usage(e.to_string()))?;
    let original = std::path::absolute(original).map_err(|e| Failure::Usage(e.to_string()))?;
    if out == original {
        return Err(Failure::Usage("replay needs an --out directory different from the original run".into()));
    }
    if let Some(cwd) = manifest.config.get("cwd") {
        std::env::set_current_dir(cwd).map_err(|e| Failure::Usage(format!("{cwd}: {e}")))?;
    }
    let mut argv = vec!["graphpde".to_string()];
    argv.extend(manifest.args.iter().cloned());
    argv.push("--out".into());
    argv.push(out.display().to_string());
    let cli = Cli::try_parse_from(&argv).map_err(|e| Failure::Usage(e.to_string()))?;
    let status = execute(cli, manifest.args.clone());
    let mut mismatched = Vec::new();
    for name in manifest.outputs.iter().filter(|n| n.as_str() != "manifest.json") {
        let a = fs::read(original.join(name)).map_err(|e| Failure::Usage(format!("{name}: {e}")))?;
        let b = fs::read(out.join(name)).unwrap_or_default();
        if a != b {
            mismatched.push(name.clone());
        }
    }
    if mismatched.is_empty() {
        println!("replay: {} outputs identical", manifest.outputs.len() - 1);
        status
    } else {
        Err(Failure::Verify(format!("outputs differ: {}", mismatched.join(", "))))
    }
}
