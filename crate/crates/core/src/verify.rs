//! Comparison principle, maximum sets, propagation of maxima, the Harnack-type
//! dichotomy, and the two counterexample instances.

use std::collections::VecDeque;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generate;
use crate::graph::{Graph, VertexField};
use crate::io;
use crate::operators::{classify_ellipticity, gradient_into, max_entry, min_entry, ClassifyConfig, Operator, OperatorSpec};
use crate::solvers::{self, SolveStatus, SolverConfig};

/// Tolerance band for strict inequalities; values inside it are indeterminate.
pub const EPS_STRICT: f64 = 1e-8;

/// `M = max (u − v)` and `W = {x : u(x) − v(x) = M}`, computed exactly.
pub fn max_set(u: &VertexField, v: &VertexField) -> (f64, Vec<usize>) {
    let diff: Vec<f64> = u.values().iter().zip(v.values()).map(|(a, b)| a - b).collect();
    let m = diff.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w = (0..diff.len()).filter(|&x| diff[x] == m).collect();
    (m, w)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonWitness {
    pub m: f64,
    pub w: Vec<String>,
    /// `max u` over `W`.
    pub c: f64,
    /// Vertices of `W` where `u = C`.
    pub z: Vec<String>,
    pub violating_vertex: Option<String>,
}

impl ComparisonWitness {
    fn new(graph: &Graph, u: &VertexField, v: &VertexField) -> Self {
        let (m, w) = max_set(u, v);
        let c = w.iter().map(|&x| u[x]).fold(f64::NEG_INFINITY, f64::max);
        let z = w.iter().copied().filter(|&x| u[x] == c).collect::<Vec<_>>();
        let name = |xs: &[usize]| xs.iter().map(|&x| graph.id(x).to_string()).collect::<Vec<_>>();
        Self { m, w: name(&w), c, z: name(&z), violating_vertex: w.first().map(|&x| graph.id(x).to_string()) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ComparisonOutcome {
    Pass { max_difference: f64 },
    Violation(ComparisonWitness),
}

/// Checks `F(u) ≥ F(v)` everywhere (within `tol`) and then `u ≤ v` everywhere.
///
/// Fails with [`Error::Hypothesis`] when the residual ordering does not hold,
/// which is distinct from a failed comparison.
pub fn comparison_check(
    op: &Operator,
    graph: &Graph,
    g: &VertexField,
    u: &VertexField,
    v: &VertexField,
    tol: f64,
) -> Result<ComparisonOutcome> {
    let fu = op.evaluate(graph, u, g)?;
    let fv = op.evaluate(graph, v, g)?;
    if let Some(x) = (0..graph.len()).find(|&x| fu[x] < fv[x] - tol) {
        return Err(Error::Hypothesis(format!(
            "F(u) < F(v) at `{}` ({} < {})",
            graph.id(x),
            fu[x],
            fv[x]
        )));
    }
    // on the boundary F(u) ≥ F(v) is g − u ≥ g − v, i.e. u ≤ v
    debug_assert!(graph.boundary().all(|b| u[b] <= v[b] + 2.0 * tol));
    let (m, _) = max_set(u, v);
    if m <= tol {
        Ok(ComparisonOutcome::Pass { max_difference: m })
    } else {
        Ok(ComparisonOutcome::Violation(ComparisonWitness::new(graph, u, v)))
    }
}

/// Neighbors `z` with `w_xz (u(z) − u(x)) = ‖∇u(x)‖⁺` (the whole argmax set).
pub fn active_neighbors(graph: &Graph, u: &VertexField, x: usize) -> Result<Vec<usize>> {
    graph.require_interior(x)?;
    u.check_len(graph)?;
    let mut p = Vec::new();
    gradient_into(graph, u.values(), x, &mut p);
    let top = max_entry(&p);
    Ok(graph.neighbors(x).iter().zip(&p).filter(|(_, &pi)| pi == top).map(|(e, _)| e.to).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropagationTrace {
    pub m: f64,
    /// `W` up to the membership tolerance.
    pub w: Vec<String>,
    /// Visited `(x, z)` pairs, `z` an active neighbor of `x ∈ W`.
    pub steps: Vec<(String, String)>,
    pub reached_boundary: bool,
    /// Active neighbors that left `W`. Nonempty means a bug upstream.
    pub violations: Vec<(String, String)>,
}

/// Breadth-first walk from `W ∩ interior` along all active neighbors of `u`,
/// checking that each landing vertex is again in `W`.
///
/// Requires the operator to split as `wplus·‖∇u‖⁺ + H`, `F(u) ≥ F(v)` on the
/// interior and `M > 0`. Membership in `W` is tested as `u − v ≥ M − tol`.
pub fn propagate_max(
    op: &Operator,
    graph: &Graph,
    u: &VertexField,
    v: &VertexField,
    tol: f64,
) -> Result<PropagationTrace> {
    if !op.has_active_eikonal_form(graph) {
        return Err(Error::Hypothesis("operator has no positive ‖∇u‖⁺ coefficient".into()));
    }
    let g = VertexField::constant(graph, 0.0);
    let fu = op.evaluate(graph, u, &g)?;
    let fv = op.evaluate(graph, v, &g)?;
    if let Some(x) = graph.interior().find(|&x| fu[x] < fv[x] - tol) {
        return Err(Error::Hypothesis(format!("F(u) < F(v) at `{}`", graph.id(x))));
    }
    let (m, _) = max_set(u, v);
    if !(m > 0.0) {
        return Err(Error::Hypothesis(format!("M = {m} is not positive")));
    }
    let in_w = |x: usize| u[x] - v[x] >= m - tol;
    let w: Vec<usize> = (0..graph.len()).filter(|&x| in_w(x)).collect();

    let mut seen = vec![false; graph.len()];
    let mut queue: VecDeque<usize> = w.iter().copied().filter(|&x| !graph.is_boundary(x)).collect();
    for &x in &queue {
        seen[x] = true;
    }
    let mut trace = PropagationTrace {
        m,
        w: w.iter().map(|&x| graph.id(x).to_string()).collect(),
        steps: Vec::new(),
        reached_boundary: false,
        violations: Vec::new(),
    };
    while let Some(x) = queue.pop_front() {
        for z in active_neighbors(graph, u, x)? {
            let step = (graph.id(x).to_string(), graph.id(z).to_string());
            if !in_w(z) {
                trace.violations.push(step);
                continue;
            }
            trace.steps.push(step);
            if graph.is_boundary(z) {
                trace.reached_boundary = true;
            } else if !seen[z] {
                seen[z] = true;
                queue.push_back(z);
            }
        }
    }
    Ok(trace)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HarnackBranch {
    /// `‖∇u‖⁻ < 0 < ‖∇u‖⁺`, outside the tolerance band.
    Strict,
    /// `∇u = 0` within the band.
    Zero,
    Indeterminate,
    Violation,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HarnackVertex {
    pub vertex: String,
    pub branch: HarnackBranch,
    pub min: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HarnackReport {
    pub vertices: Vec<HarnackVertex>,
    /// Interior vertices where the residual exceeds the tolerance.
    pub precondition_failures: Vec<(String, f64)>,
}

impl HarnackReport {
    pub fn passed(&self) -> bool {
        self.precondition_failures.is_empty()
            && self.vertices.iter().all(|v| matches!(v.branch, HarnackBranch::Strict | HarnackBranch::Zero))
    }

    pub fn count(&self, branch: HarnackBranch) -> usize {
        self.vertices.iter().filter(|v| v.branch == branch).count()
    }
}

/// Dichotomy check at every interior vertex of a p-harmonious solution.
///
/// Vertices whose residual exceeds `residual_tol` are listed as precondition
/// failures and not classified.
pub fn harnack_check(op: &Operator, graph: &Graph, u: &VertexField, residual_tol: f64, eps: f64) -> Result<HarnackReport> {
    if !op.is_p_harmonious(graph) {
        return Err(Error::Hypothesis("operator is not p-harmonious (needs wplus, wminus > 0)".into()));
    }
    if !op.is_source_free(graph) {
        return Err(Error::Hypothesis("p-harmonious check needs a source-free operator".into()));
    }
    u.check_len(graph)?;
    let mut report = HarnackReport { vertices: Vec::new(), precondition_failures: Vec::new() };
    let mut p = Vec::new();
    for x in graph.interior() {
        gradient_into(graph, u.values(), x, &mut p);
        let r = op.apply(x, u[x], &p);
        if !(r.abs() <= residual_tol) {
            report.precondition_failures.push((graph.id(x).to_string(), r));
            continue;
        }
        let (lo, hi) = (min_entry(&p), max_entry(&p));
        let branch = if lo.abs() <= eps && hi.abs() <= eps {
            HarnackBranch::Zero
        } else if lo < -eps && hi > eps {
            HarnackBranch::Strict
        } else if hi < -eps || lo > eps {
            HarnackBranch::Violation
        } else {
            HarnackBranch::Indeterminate
        };
        report.vertices.push(HarnackVertex { vertex: graph.id(x).to_string(), branch, min: lo, max: hi });
    }
    Ok(report)
}

pub const K3_GRAPH_JSON: &str = include_str!("../fixtures/k3.graph.json");
pub const K3_OP_JSON: &str = include_str!("../fixtures/k3.op.json");
pub const MEDIAN12_GRAPH_JSON: &str = include_str!("../fixtures/median12.graph.json");
pub const MEDIAN12_OP_JSON: &str = include_str!("../fixtures/median12.op.json");

#[derive(Clone, Debug, PartialEq)]
pub enum Expected {
    /// No solution exists; solvers should stagnate.
    Infeasible,
    /// Two distinct zero-residual fields with the same boundary data.
    TwoSolutions { first: VertexField, second: VertexField },
}

#[derive(Clone, Debug)]
pub struct Counterexample {
    pub name: &'static str,
    pub graph: Graph,
    pub g: VertexField,
    pub spec: OperatorSpec,
    pub expected: Expected,
    pub graph_json: &'static str,
    pub op_json: &'static str,
}

/// Wrong-sign eikonal equation `‖∇u‖⁺ = −1` on the complete graph on three
/// vertices with one boundary vertex.
pub fn k3_instance() -> (Graph, OperatorSpec, VertexField) {
    let loaded = io::graph_from_json(K3_GRAPH_JSON).expect("fixture parses");
    let spec = OperatorSpec::from_json(K3_OP_JSON).expect("fixture parses");
    (loaded.graph, spec, loaded.g)
}

/// Median equation on the 12-vertex cross with `∓1` boundary data.
pub fn median12_instance() -> (Graph, OperatorSpec, VertexField) {
    let loaded = io::graph_from_json(MEDIAN12_GRAPH_JSON).expect("fixture parses");
    let spec = OperatorSpec::from_json(MEDIAN12_OP_JSON).expect("fixture parses");
    (loaded.graph, spec, loaded.g)
}

pub fn counterexample_catalog(name: &str) -> Result<Counterexample> {
    match name {
        "k3" | "k3_nonexistence" | "k3-nonexistence" => {
            let (graph, spec, g) = k3_instance();
            Ok(Counterexample {
                name: "k3_nonexistence",
                graph,
                g,
                spec,
                expected: Expected::Infeasible,
                graph_json: K3_GRAPH_JSON,
                op_json: K3_OP_JSON,
            })
        }
        "median12" | "median_nonuniqueness" | "median-nonuniqueness" => {
            let (graph, spec, g) = median12_instance();
            let with = |c: f64| VertexField::from_fn(&graph, |x| if graph.is_boundary(x) { g[x] } else { c });
            let expected = Expected::TwoSolutions { first: with(1.0), second: with(-1.0) };
            Ok(Counterexample {
                name: "median_nonuniqueness",
                graph,
                g,
                spec,
                expected,
                graph_json: MEDIAN12_GRAPH_JSON,
                op_json: MEDIAN12_OP_JSON,
            })
        }
        other => Err(Error::UnknownName(other.to_string())),
    }
}

/// Which comparison theorem covers an operator on a graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Guarantee {
    UniformlyElliptic,
    Proper,
    WeakCombined,
    PHarmonious,
    PositiveEikonal,
    NoTheoremApplies,
}

impl Guarantee {
    pub fn applies(self) -> bool {
        self != Guarantee::NoTheoremApplies
    }
}

/// Structural checks first, then the randomized classifier.
pub fn guarantee(op: &Operator, graph: &Graph, trials: usize, seed: u64) -> Result<Guarantee> {
    if op.is_p_harmonious(graph) && op.is_source_free(graph) {
        return Ok(Guarantee::PHarmonious);
    }
    if op.has_active_eikonal_form(graph) && graph.interior().all(|x| op.terms(x).offset < 0.0 && op.terms(x).reaction == 0.0) {
        return Ok(Guarantee::PositiveEikonal);
    }
    let report = classify_ellipticity(op, graph, ClassifyConfig { trials, seed, ..ClassifyConfig::default() })?;
    Ok(if report.uniformly_elliptic.holds() {
        Guarantee::UniformlyElliptic
    } else if report.proper.holds() {
        Guarantee::Proper
    } else if report.weak_combined.holds() {
        Guarantee::WeakCombined
    } else {
        Guarantee::NoTheoremApplies
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Trees,
    Grids,
    /// Trees on even trials, grids on odd ones.
    Mixed,
    RandomDirected,
}

impl Family {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "trees" | "tree" => Ok(Family::Trees),
            "grids" | "grid" => Ok(Family::Grids),
            "mixed" => Ok(Family::Mixed),
            "random" | "random-directed" => Ok(Family::RandomDirected),
            other => Err(Error::UnknownName(other.to_string())),
        }
    }

    pub fn sample(self, rng: &mut ChaCha8Rng, trial: usize) -> Graph {
        let tree = |rng: &mut ChaCha8Rng| {
            let n = rng.gen_range(3..=30);
            generate::random_tree(rng, n, (0.1, 10.0))
        };
        let grid = |rng: &mut ChaCha8Rng| {
            let (nx, ny) = (rng.gen_range(3..=7), rng.gen_range(3..=7));
            let h = [1.0, 0.5, 0.25][rng.gen_range(0..3)];
            generate::grid_graph(nx, ny, h)
        };
        match self {
            Family::Trees => tree(rng),
            Family::Grids => grid(rng),
            Family::Mixed if trial % 2 == 0 => tree(rng),
            Family::Mixed => grid(rng),
            Family::RandomDirected => {
                let n = rng.gen_range(2..=20);
                generate::random_connected(rng, n, 0.15, (0.1, 10.0))
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct FuzzConfig {
    pub trials: usize,
    pub seed: u64,
    pub family: Family,
    pub solver: SolverConfig,
    /// Allowed excess `max(u1 − u2)`; the default is twice the nominal
    /// solver tolerance of `1e-10`.
    pub slack: f64,
    pub classify_trials: usize,
    /// Counterexample bundles are written below this directory.
    pub bundle_dir: Option<PathBuf>,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        Self {
            trials: 200,
            seed: 0,
            family: Family::Mixed,
            solver: SolverConfig { tolerance: 1e-12, ..SolverConfig::default() },
            slack: 2e-10,
            classify_trials: 1000,
            bundle_dir: None,
        }
    }
}

/// A comparison failure with everything needed to reproduce it.
#[derive(Clone, Debug)]
pub struct Bundle {
    pub trial: usize,
    pub graph: Graph,
    pub g1: VertexField,
    pub g2: VertexField,
    pub u1: VertexField,
    pub u2: VertexField,
    pub vertex: String,
    pub excess: f64,
}

impl Bundle {
    /// Writes `graph.json` (with `g1`), `g2.csv`, `u1.csv`, `u2.csv`.
    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        let dir = dir.join(format!("trial_{:04}", self.trial));
        fs::create_dir_all(&dir)?;
        io::write_graph(&dir.join("graph.json"), &self.graph, Some(&self.g1))?;
        io::write_field_file(&dir.join("g2.csv"), &self.graph, &self.g2)?;
        io::write_field_file(&dir.join("u1.csv"), &self.graph, &self.u1)?;
        io::write_field_file(&dir.join("u2.csv"), &self.graph, &self.u2)?;
        Ok(dir)
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct FuzzSummary {
    pub trials: usize,
    /// Trials where a comparison theorem applies.
    pub covered: usize,
    pub converged: usize,
    pub unconverged: usize,
    pub max_excess: f64,
    pub harnack_checked: usize,
    pub harnack_violations: usize,
    pub violations: usize,
    pub bundles: Vec<String>,
}

impl FuzzSummary {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.harnack_violations == 0 && self.unconverged == 0
    }
}

struct TrialOutcome {
    covered: bool,
    converged: bool,
    excess: f64,
    harnack: Option<bool>,
    bundle: Option<Bundle>,
}

fn run_trial(spec: &OperatorSpec, cfg: &FuzzConfig, trial: usize) -> Result<TrialOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(trial as u64));
    let graph = cfg.family.sample(&mut rng, trial);
    let reach = graph.connected_to_boundary();
    if !reach.connected {
        return Err(Error::NotConnected(reach.stranded.iter().map(|&x| graph.id(x).to_string()).collect()));
    }
    let op = spec.bind(&graph)?;
    let covered = guarantee(&op, &graph, cfg.classify_trials, cfg.seed ^ trial as u64)?.applies();

    let g1 = VertexField::from_fn(&graph, |x| if graph.is_boundary(x) { rng.gen_range(-1.0..=1.0) } else { 0.0 });
    let equal = rng.gen_bool(0.1);
    let g2 = VertexField::from_fn(&graph, |x| {
        if !graph.is_boundary(x) || equal {
            g1[x]
        } else {
            g1[x] + rng.gen_range(0.0..=1.0)
        }
    });
    let r1 = solvers::solve(&op, &graph, &g1, &cfg.solver)?;
    let r2 = solvers::solve(&op, &graph, &g2, &cfg.solver)?;
    let converged = r1.status == SolveStatus::Converged && r2.status == SolveStatus::Converged;

    let harnack = (converged && op.is_p_harmonious(&graph) && op.is_source_free(&graph))
        .then(|| -> Result<bool> {
            let tol = 10.0 * cfg.solver.tolerance;
            Ok(harnack_check(&op, &graph, &r1.solution, tol, EPS_STRICT)?.passed()
                && harnack_check(&op, &graph, &r2.solution, tol, EPS_STRICT)?.passed())
        })
        .transpose()?;

    let (excess, x) = (0..graph.len())
        .map(|x| (r1.solution[x] - r2.solution[x], x))
        .fold((f64::NEG_INFINITY, 0), |a, b| if b.0 > a.0 { b } else { a });
    let bundle = (covered && converged && excess > cfg.slack).then(|| Bundle {
        trial,
        vertex: graph.id(x).to_string(),
        g1,
        g2,
        u1: r1.solution,
        u2: r2.solution,
        excess,
        graph,
    });
    Ok(TrialOutcome { covered, converged, excess, harnack, bundle })
}

/// Solves random ordered Dirichlet problems and checks `u1 ≤ u2 + slack`.
///
/// Trials where no comparison theorem applies still run, but their
/// orderings are not counted as violations.
pub fn comparison_fuzz(spec: &OperatorSpec, cfg: &FuzzConfig) -> Result<FuzzSummary> {
    let outcomes: Vec<TrialOutcome> =
        (0..cfg.trials).into_par_iter().map(|t| run_trial(spec, cfg, t)).collect::<Result<_>>()?;
    let mut s = FuzzSummary { trials: cfg.trials, max_excess: f64::NEG_INFINITY, ..FuzzSummary::default() };
    for o in outcomes {
        s.covered += o.covered as usize;
        if o.converged {
            s.converged += 1;
            if o.covered {
                s.max_excess = s.max_excess.max(o.excess);
            }
        } else {
            s.unconverged += 1;
        }
        if let Some(ok) = o.harnack {
            s.harnack_checked += 1;
            s.harnack_violations += (!ok) as usize;
        }
        if let Some(b) = o.bundle {
            s.violations += 1;
            match &cfg.bundle_dir {
                Some(dir) => s.bundles.push(b.save(dir)?.display().to_string()),
                None => s.bundles.push(format!("trial {} at `{}`: excess {}", b.trial, b.vertex, b.excess)),
            }
        }
    }
    Ok(s)
}
