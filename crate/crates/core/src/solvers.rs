//! Dirichlet-problem solvers.
//!
//! Three schemes are provided:
//!
//! * [`solve_fixed_point`] iterates the map `T(u) = u + F(u)/L` (Jacobi
//!   semantics, optional damping). For homogeneous elliptic operators `T`
//!   maps the box `[min g, max g]` into itself, so every iterate stays there.
//! * [`solve_gauss_seidel`] sweeps the interior in vertex order and solves the
//!   scalar equation `F(u)(x) = 0` exactly at each visit; for the declarative
//!   family that scalar function is continuous, piecewise linear and strictly
//!   decreasing in `u(x)`.
//! * [`solve_eikonal`] builds the rescaled, boundary-augmented auxiliary graph
//!   and returns a shifted shortest-path distance.
//!
//! Existence of a fixed point does not imply convergence of the iteration;
//! stagnation is reported, never hidden.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Distance, Graph, GraphBuilder, VertexField};
use crate::operators::{Operator, OperatorKind, Terms};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    FixedPointT,
    GaussSeidelLocal,
    EikonalLabelSetting,
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialGuess {
    /// `(min g + max g) / 2` on the interior.
    Midrange,
    Constant(f64),
    /// Warm start; boundary entries are replaced by `g`.
    Field(VertexField),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Threshold on the interior residual ∞-norm.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Relaxation `θ ∈ (0, 1]`: `u ← (1 − θ)u + θ·update`.
    pub damping: f64,
    /// Iterations without a 0.1% improvement of the best residual before
    /// declaring stagnation.
    pub stagnation_window: usize,
    pub scheme: Scheme,
    pub initial: InitialGuess,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 1_000_000,
            damping: 1.0,
            stagnation_window: 1000,
            scheme: Scheme::GaussSeidelLocal,
            initial: InitialGuess::Midrange,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidSpec(format!("tolerance must be > 0, got {}", self.tolerance)));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidSpec(format!("damping must lie in (0, 1], got {}", self.damping)));
        }
        if self.stagnation_window == 0 {
            return Err(Error::InvalidSpec("stagnation window must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIter,
    Stagnated,
    InfeasibleDetected,
}

impl SolveStatus {
    pub fn name(self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIter => "max_iter",
            SolveStatus::Stagnated => "stagnated",
            SolveStatus::InfeasibleDetected => "infeasible_detected",
        }
    }
}

/// One decimated sample of the iteration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub iteration: usize,
    pub residual: f64,
    /// `max |u(x)|` over the interior.
    pub sup_norm: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub solution: VertexField,
    /// Interior residual ∞-norm of `solution`.
    pub residual_inf_norm: f64,
    pub iterations: usize,
    pub status: SolveStatus,
    pub residual_history: Vec<HistoryEntry>,
}

const STAGNATION_RELATIVE: f64 = 1e-3;

struct Monitor {
    tolerance: f64,
    max_iterations: usize,
    window: usize,
    best: f64,
    last_improvement: usize,
    history: Vec<HistoryEntry>,
}

impl Monitor {
    fn new(cfg: &SolverConfig) -> Self {
        Self {
            tolerance: cfg.tolerance,
            max_iterations: cfg.max_iterations,
            window: cfg.stagnation_window,
            best: f64::INFINITY,
            last_improvement: 0,
            history: Vec::new(),
        }
    }

    fn record(&mut self, entry: HistoryEntry) {
        let it = entry.iteration;
        let stride = if it < 128 { 1 } else { 1 << (usize::BITS - it.leading_zeros() - 6) };
        if it % stride == 0 {
            self.history.push(entry);
        }
    }

    fn observe(&mut self, iteration: usize, residual: f64, sup_norm: f64) -> Option<SolveStatus> {
        self.record(HistoryEntry { iteration, residual, sup_norm });
        if residual <= self.tolerance {
            return Some(SolveStatus::Converged);
        }
        if !residual.is_finite() {
            return Some(SolveStatus::Stagnated);
        }
        if residual < self.best * (1.0 - STAGNATION_RELATIVE) {
            self.best = residual;
            self.last_improvement = iteration;
        }
        if iteration - self.last_improvement >= self.window {
            return Some(SolveStatus::Stagnated);
        }
        if iteration >= self.max_iterations {
            return Some(SolveStatus::MaxIter);
        }
        None
    }

    fn finish(mut self, solution: VertexField, iterations: usize, residual: f64, status: SolveStatus) -> SolveReport {
        if self.history.last().map(|h| h.iteration) != Some(iterations) {
            let sup_norm = solution.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            self.history.push(HistoryEntry { iteration: iterations, residual, sup_norm });
        }
        SolveReport { solution, residual_inf_norm: residual, iterations, status, residual_history: self.history }
    }
}

fn boundary_range(graph: &Graph, g: &VertexField) -> (f64, f64) {
    graph.boundary().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), b| (lo.min(g[b]), hi.max(g[b])))
}

fn interior_sup(graph: &Graph, u: &[f64]) -> f64 {
    graph.interior().map(|x| u[x].abs()).fold(0.0, f64::max)
}

/// Starting field: `g` on the boundary, the configured guess inside.
pub fn initial_field(graph: &Graph, g: &VertexField, initial: &InitialGuess) -> Result<VertexField> {
    g.check_len(graph)?;
    let (lo, hi) = boundary_range(graph, g);
    let mut u = match initial {
        InitialGuess::Midrange => VertexField::constant(graph, (lo + hi) / 2.0),
        InitialGuess::Constant(c) => VertexField::constant(graph, *c),
        InitialGuess::Field(f) => {
            f.check_len(graph)?;
            f.clone()
        }
    };
    for b in graph.boundary() {
        u[b] = g[b];
    }
    Ok(u)
}

/// `L = max_x (reaction(x) + (w0 + wplus + wminus)(x) · max_y w_xy)`.
///
/// For a source-free operator this reduces to `max w0(x)·w_xy`, with `w0`
/// the envelope of the whole gradient part.
pub fn fixed_point_constant(op: &Operator, graph: &Graph) -> f64 {
    graph
        .interior()
        .map(|x| {
            let wmax = graph.neighbors(x).iter().map(|e| e.weight).fold(0.0, f64::max);
            op.terms(x).reaction + op.total_envelope(x) * wmax
        })
        .fold(0.0, f64::max)
}

/// `T(u)(x) = u(x) + F(u)(x)/L` inside, `g(x)` on the boundary.
///
/// Returns [`Error::DegenerateMap`] when `L = 0`: then the operator vanishes
/// identically and any extension of `g` solves the problem.
pub fn fixed_point_map(op: &Operator, graph: &Graph, g: &VertexField, u: &VertexField) -> Result<VertexField> {
    op.check_graph(graph)?;
    u.check_len(graph)?;
    g.check_len(graph)?;
    let l = fixed_point_constant(op, graph);
    if l == 0.0 {
        return Err(Error::DegenerateMap);
    }
    let mut scratch = Vec::new();
    let mut out = u.clone();
    for x in 0..graph.len() {
        out[x] = if graph.is_boundary(x) {
            g[x]
        } else {
            map_value(op, graph, u.values(), x, op.residual_at(graph, u.values(), x, &mut scratch), l)
        };
    }
    Ok(out)
}

/// `u(x) + r/L`. For a source-free operator the exact value lies between the
/// smallest and largest `u` on the closed neighborhood of `x`; the rounded
/// value is clamped back into that range so the property survives in floats.
fn map_value(op: &Operator, graph: &Graph, u: &[f64], x: usize, r: f64, l: f64) -> f64 {
    let t = u[x] + r / l;
    let terms = op.terms(x);
    if terms.reaction != 0.0 || terms.offset != 0.0 {
        return t;
    }
    let (lo, hi) = graph.neighbors(x).iter().fold((u[x], u[x]), |(a, b), e| (a.min(u[e.to]), b.max(u[e.to])));
    t.clamp(lo, hi)
}

/// Iterates `u ← (1 − θ)u + θ T(u)` until the residual drops below tolerance.
pub fn solve_fixed_point(op: &Operator, graph: &Graph, g: &VertexField, cfg: &SolverConfig) -> Result<SolveReport> {
    cfg.validate()?;
    op.check_graph(graph)?;
    let mut u = initial_field(graph, g, &cfg.initial)?;
    let mut monitor = Monitor::new(cfg);
    let l = fixed_point_constant(op, graph);
    if l == 0.0 {
        let res = op.interior_residual(graph, u.values());
        let status = if res <= cfg.tolerance { SolveStatus::Converged } else { SolveStatus::Stagnated };
        return Ok(monitor.finish(u, 0, res, status));
    }

    let source_free = op.is_source_free(graph);
    let (lo, hi) = boundary_range(graph, g);
    let interior: Vec<usize> = graph.interior().collect();
    let mut scratch = Vec::new();
    let mut residuals = vec![0.0; graph.len()];
    let theta = cfg.damping;
    let mut iteration = 0;
    loop {
        let mut res = 0.0f64;
        for &x in &interior {
            let r = op.residual_at(graph, u.values(), x, &mut scratch);
            residuals[x] = r;
            res = res.max(r.abs());
        }
        if let Some(status) = monitor.observe(iteration, res, interior_sup(graph, u.values())) {
            return Ok(monitor.finish(u, iteration, res, status));
        }
        for &x in &interior {
            residuals[x] = map_value(op, graph, u.values(), x, residuals[x], l);
        }
        for &x in &interior {
            let t = residuals[x];
            u[x] = if theta == 1.0 { t } else { ((1.0 - theta) * u[x] + theta * t).clamp(u[x].min(t), u[x].max(t)) };
        }
        if source_free && cfg.initial == InitialGuess::Midrange {
            debug_assert!(
                interior.iter().all(|&x| u[x] >= lo && u[x] <= hi),
                "fixed-point iterate left [min g, max g]"
            );
        }
        iteration += 1;
    }
}

/// Nonlinear Gauss–Seidel with exact scalar solves, sweeping in vertex order.
pub fn solve_gauss_seidel(op: &Operator, graph: &Graph, g: &VertexField, cfg: &SolverConfig) -> Result<SolveReport> {
    cfg.validate()?;
    op.check_graph(graph)?;
    let mut u = initial_field(graph, g, &cfg.initial)?;
    let mut monitor = Monitor::new(cfg);
    let interior: Vec<usize> = graph.interior().collect();
    let theta = cfg.damping;
    let mut scratch = Vec::new();
    let mut iteration = 0;
    loop {
        let res = op.interior_residual(graph, u.values());
        if let Some(status) = monitor.observe(iteration, res, interior_sup(graph, u.values())) {
            return Ok(monitor.finish(u, iteration, res, status));
        }
        for &x in &interior {
            let t = local_solve(op.terms(x), graph, u.values(), x, &mut scratch)
                .ok_or_else(|| Error::ScalarSolve(graph.id(x).to_string()))?;
            u[x] = if theta == 1.0 { t } else { (1.0 - theta) * u[x] + theta * t };
        }
        iteration += 1;
    }
}

/// Root of `t ↦ f(x, t, (w_i (u_i − t))_i)` with the neighbors frozen.
///
/// The function is continuous, piecewise linear and strictly decreasing
/// unless every coefficient vanishes. Its kinks sit where two entries
/// `w_i (u_i − t)` cross; between kinks the root is found by linear
/// interpolation, which is exact up to rounding.
pub fn local_solve(terms: &Terms, graph: &Graph, u: &[f64], x: usize, scratch: &mut Vec<f64>) -> Option<f64> {
    let edges = graph.neighbors(x);
    let mut phi = |t: f64| -> f64 {
        scratch.clear();
        scratch.extend(edges.iter().map(|e| e.weight * (u[e.to] - t)));
        terms.apply(t, scratch)
    };
    if terms.is_zero() {
        return (terms.offset == 0.0).then_some(u[x]);
    }
    if terms.median == 0.0 && terms.plus == 0.0 && terms.minus == 0.0 {
        // linear: lap·Σ w (u_y − t) − reaction·t + offset = 0
        let (mut num, mut den) = (terms.offset, terms.reaction);
        for e in edges {
            num += terms.lap * e.weight * u[e.to];
            den += terms.lap * e.weight;
        }
        return Some(num / den);
    }

    let mut kinks = Vec::new();
    for (i, a) in edges.iter().enumerate() {
        for b in &edges[i + 1..] {
            if a.weight != b.weight {
                let t = (a.weight * u[a.to] - b.weight * u[b.to]) / (a.weight - b.weight);
                if t.is_finite() {
                    kinks.push(t);
                }
            }
        }
    }
    kinks.sort_by(f64::total_cmp);
    kinks.dedup();


    if kinks.is_empty() {
        let t0 = u[x];
        let t1 = t0 + 1.0;
        let (f0, f1) = (phi(t0), phi(t1));
        return Some(linear_root(&mut phi, t0, f0, t1, f1, (f64::NEG_INFINITY, f64::INFINITY)));
    }

    let span = (kinks[kinks.len() - 1] - kinks[0]).max(1.0);
    let first = kinks[0];
    let f_first = phi(first);
    if f_first <= 0.0 {
        if f_first == 0.0 {
            return Some(first);
        }
        let a = first - span;
        let fa = phi(a);
        return Some(linear_root(&mut phi, a, fa, first, f_first, (f64::NEG_INFINITY, first)));
    }
    let last = kinks[kinks.len() - 1];
    let f_last = phi(last);
    if f_last > 0.0 {
        let b = last + span;
        let fb = phi(b);
        return Some(linear_root(&mut phi, last, f_last, b, fb, (last, f64::INFINITY)));
    }
    // phi(kinks[lo]) > 0 >= phi(kinks[hi])
    let (mut lo, mut hi) = (0usize, kinks.len() - 1);
    let (mut f_lo, mut f_hi) = (f_first, f_last);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        let fm = phi(kinks[mid]);
        if fm > 0.0 {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
            f_hi = fm;
        }
    }
    if f_hi == 0.0 {
        return Some(kinks[hi]);
    }
    let t = linear_root(&mut phi, kinks[lo], f_lo, kinks[hi], f_hi, (kinks[lo], kinks[hi]));
    Some(t.clamp(kinks[lo], kinks[hi]))
}

/// Root of `phi` through `(a, fa)`, `(b, fb)` on a piece where it is linear,
/// kept inside `bounds`. Interpolating across a wide segment loses digits, so
/// the first guess is polished by secant steps with the segment slope.
fn linear_root(phi: &mut impl FnMut(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64, bounds: (f64, f64)) -> f64 {
    if fa == fb {
        return a;
    }
    let slope = (fb - fa) / (b - a);
    let mut t = (a - fa / slope).clamp(bounds.0, bounds.1);
    let mut ft = phi(t);
    for _ in 0..3 {
        if ft == 0.0 {
            break;
        }
        let next = (t - ft / slope).clamp(bounds.0, bounds.1);
        let f_next = phi(next);
        if !(f_next.abs() < ft.abs()) {
            break;
        }
        t = next;
        ft = f_next;
    }
    t
}

/// Dispatches on `cfg.scheme`.
pub fn solve(op: &Operator, graph: &Graph, g: &VertexField, cfg: &SolverConfig) -> Result<SolveReport> {
    match cfg.scheme {
        Scheme::FixedPointT => solve_fixed_point(op, graph, g, cfg),
        Scheme::GaussSeidelLocal => solve_gauss_seidel(op, graph, g, cfg),
        Scheme::EikonalLabelSetting => {
            let (sign, h) = eikonal_data(op, graph)?;
            solve_eikonal(graph, g, &h, sign, cfg)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EikonalSign {
    /// `‖∇u‖⁺ − h = 0`; the solution is a shifted negative distance.
    Plus,
    /// `‖∇u‖⁻ + h = 0`; the solution is a shifted positive distance.
    Minus,
}

/// Reads `(sign, h)` off a pure eikonal operator `w‖∇u‖± = ±h`.
pub fn eikonal_data(op: &Operator, graph: &Graph) -> Result<(EikonalSign, VertexField)> {
    let sign = match op.kind() {
        OperatorKind::EikonalPlus => EikonalSign::Plus,
        OperatorKind::EikonalMinus => EikonalSign::Minus,
        other => {
            return Err(Error::InvalidSpec(format!("label setting needs an eikonal operator, got `{other}`")));
        }
    };
    let h = VertexField::from_fn(graph, |x| {
        if graph.is_boundary(x) {
            return 1.0;
        }
        let t = op.terms(x);
        match sign {
            EikonalSign::Plus => -t.offset / t.plus,
            EikonalSign::Minus => t.offset / t.minus,
        }
    });
    Ok((sign, h))
}

/// Exact solution of the eikonal Dirichlet problem with positive source `h`.
///
/// Boundary data are shifted so the active side is nonnegative. Each boundary
/// vertex `b` with nonzero shifted value `s_b` becomes interior with a single
/// new neighbor at directed distance `s_b`, the new vertex carrying zero data.
/// Interior weights are divided by `h(x)`, so `‖∇u‖⁺ = h` on the original
/// graph becomes `‖∇u‖⁺ = 1` on the auxiliary one. Shortest distances to
/// the auxiliary boundary are computed by label setting and shifted back.
pub fn solve_eikonal(
    graph: &Graph,
    g: &VertexField,
    h: &VertexField,
    sign: EikonalSign,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    g.check_len(graph)?;
    h.check_len(graph)?;
    for x in graph.interior() {
        if !(h[x] > 0.0) {
            return Err(Error::NonpositiveSource { vertex: graph.id(x).to_string(), value: h[x] });
        }
    }
    let (lo, hi) = boundary_range(graph, g);
    // u = shift − D (plus) or u = shift + D (minus), with D ≥ 0 on the auxiliary graph
    let shift = match sign {
        EikonalSign::Plus => hi.max(0.0),
        EikonalSign::Minus => lo.min(0.0),
    };
    let offset = |b: usize| match sign {
        EikonalSign::Plus => shift - g[b],
        EikonalSign::Minus => g[b] - shift,
    };

    let aux = auxiliary_graph(graph, h, offset)?;
    let dist = aux.distances_to_boundary();
    let stranded: Vec<String> = (0..graph.len())
        .filter(|&x| dist[x].is_infinite())
        .map(|x| graph.id(x).to_string())
        .collect();
    if !stranded.is_empty() {
        return Err(Error::NotConnected(stranded));
    }
    let mut u = VertexField::from_fn(graph, |x| {
        let d = match dist[x] {
            Distance::Finite(d) => d,
            Distance::Infinite => unreachable!(),
        };
        match sign {
            EikonalSign::Plus => shift - d,
            EikonalSign::Minus => shift + d,
        }
    });
    for b in graph.boundary() {
        u[b] = g[b];
    }

    let residual = eikonal_residual(graph, &u, h, sign);
    let status = if residual <= cfg.tolerance { SolveStatus::Converged } else { SolveStatus::Stagnated };
    let sup_norm = interior_sup(graph, u.values());
    Ok(SolveReport {
        solution: u,
        residual_inf_norm: residual,
        iterations: 0,
        status,
        residual_history: vec![HistoryEntry { iteration: 0, residual, sup_norm }],
    })
}

/// The graph used by [`solve_eikonal`]: interior weights `w_xy / h(x)`,
/// original boundary out-edges dropped, one auxiliary boundary vertex per
/// boundary vertex with positive offset.
pub fn auxiliary_graph(graph: &Graph, h: &VertexField, offset: impl Fn(usize) -> f64) -> Result<Graph> {
    let mut b = GraphBuilder::new();
    let mut aux_edges = Vec::new();
    for x in 0..graph.len() {
        let id = graph.id(x);
        if graph.is_boundary(x) {
            let s = offset(x);
            if s > 0.0 {
                let mut aux_id = format!("{id}#aux");
                while graph.index_of(&aux_id).is_ok() {
                    aux_id.push('_');
                }
                b.vertex(id, false);
                aux_edges.push((id.to_string(), aux_id, 1.0 / s));
            } else {
                b.vertex(id, true);
            }
        } else {
            b.vertex(id, false);
            for e in graph.neighbors(x) {
                b.edge(id, graph.id(e.to), e.weight / h[x]);
            }
        }
    }
    for (from, to, w) in aux_edges {
        b.vertex(to.clone(), true);
        b.edge(from, to, w);
    }
    b.build()
}

fn eikonal_residual(graph: &Graph, u: &VertexField, h: &VertexField, sign: EikonalSign) -> f64 {
    let mut scratch = Vec::new();
    graph
        .interior()
        .map(|x| {
            crate::operators::gradient_into(graph, u.values(), x, &mut scratch);
            match sign {
                EikonalSign::Plus => crate::operators::max_entry(&scratch) - h[x],
                EikonalSign::Minus => crate::operators::min_entry(&scratch) + h[x],
            }
            .abs()
        })
        .fold(0.0, f64::max)
}

/// Outcome of [`detect_infeasibility`].
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnosis {
    pub report: SolveReport,
    pub infeasible: bool,
    /// Smallest residual seen, when the run did not converge.
    pub floor: Option<f64>,
    /// The interior sup-norm kept growing over the last stagnation window.
    pub diverging: bool,
}

/// Runs the configured solver and flags a persistent residual floor.
///
/// This is a diagnostic: a stagnating run is evidence, not proof, that no
/// solution exists.
pub fn detect_infeasibility(op: &Operator, graph: &Graph, g: &VertexField, cfg: &SolverConfig) -> Result<Diagnosis> {
    let mut report = solve(op, graph, g, cfg)?;
    if report.status == SolveStatus::Converged {
        return Ok(Diagnosis { report, infeasible: false, floor: None, diverging: false });
    }
    let floor = report.residual_history.iter().map(|h| h.residual).fold(f64::INFINITY, f64::min);
    let last = *report.residual_history.last().expect("history is never empty");
    let data_bound = graph.boundary().map(|b| g[b].abs()).fold(0.0, f64::max);
    let diverging = report
        .residual_history
        .iter()
        .rev()
        .find(|h| h.iteration + cfg.stagnation_window <= last.iteration)
        .is_some_and(|earlier| last.sup_norm > earlier.sup_norm && last.sup_norm > data_bound);
    let infeasible = floor > cfg.tolerance;
    if infeasible {
        report.status = SolveStatus::InfeasibleDetected;
    }
    Ok(Diagnosis { report, infeasible, floor: Some(floor), diverging })
}
