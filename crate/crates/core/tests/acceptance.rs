//! The ten acceptance criteria. Runs without the libtest harness so every
//! criterion prints exactly one PASS/FAIL line.

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use graphpde::fd::{self, Side};
use graphpde::generate::{grid_graph, path_graph, random_connected, random_tree};
use graphpde::operators::{classify_ellipticity, homogeneity_check, ClassifyConfig, Coefficient, HomogeneityOutcome};
use graphpde::solvers::{self, auxiliary_graph, detect_infeasibility, fixed_point_map, solve, solve_fixed_point, solve_gauss_seidel};
use graphpde::verify::{self, harnack_check, median12_instance, k3_instance, Family, FuzzConfig, HarnackBranch, EPS_STRICT};
use graphpde::{Graph, InitialGuess, OperatorKind, OperatorSpec, Scheme, SolveStatus, SolverConfig, VertexField};

use common::{bellman_ford_to_boundary, interior_sup, neighborhood_range};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn random_graph(rng: &mut ChaCha8Rng, i: usize, max_n: usize) -> Graph {
    match i % 3 {
        0 => {
            let n = rng.gen_range(3..=max_n);
            random_tree(rng, n, (0.1, 10.0))
        }
        1 => {
            let n = rng.gen_range(2..=max_n);
            random_connected(rng, n, 0.1, (0.1, 10.0))
        }
        _ => {
            let n = rng.gen_range(2..=max_n.min(20));
            random_connected(rng, n, 0.4, (0.1, 10.0))
        }
    }
}

fn boundary_data(rng: &mut ChaCha8Rng, graph: &Graph, lo: f64, hi: f64) -> VertexField {
    VertexField::from_fn(graph, |x| if graph.is_boundary(x) { rng.gen_range(lo..=hi) } else { 0.0 })
}

fn eikonal_cfg() -> SolverConfig {
    SolverConfig { scheme: Scheme::EikonalLabelSetting, tolerance: 1e-12, ..SolverConfig::default() }
}

fn c1_eikonal_is_distance() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut exact, mut compared, mut worst) = (0usize, 0usize, 0.0f64);
    for i in 0..100 {
        let graph = random_graph(&mut rng, i, 50);
        let g = VertexField::constant(&graph, 0.0);
        let oracle = bellman_ford_to_boundary(&graph);
        for (spec, sign) in [
            (OperatorSpec::eikonal_plus().with_source(1.0), -1.0),
            (OperatorSpec::eikonal_minus().with_source(-1.0), 1.0),
        ] {
            let op = spec.bind(&graph).unwrap();
            let report = solve(&op, &graph, &g, &eikonal_cfg()).unwrap();
            for x in 0..graph.len() {
                let want = sign * oracle[x];
                let got = report.solution[x];
                compared += 1;
                if got == want {
                    exact += 1;
                } else {
                    worst = worst.max((got - want).abs() / want.abs());
                }
            }
        }
    }
    let elapsed = start.elapsed();
    Outcome::new(
        worst <= 1e-12 && elapsed < Duration::from_secs(5),
        format!("{exact}/{compared} values bit-identical to the oracle, worst relative gap {worst:e}, {elapsed:.2?}"),
    )
}

fn c2_k3_infeasible() -> Outcome {
    let start = Instant::now();
    let (graph, spec, g) = k3_instance();
    let op = spec.bind(&graph).unwrap();
    let mut notes = Vec::new();
    let mut pass = true;
    for scheme in [Scheme::FixedPointT, Scheme::GaussSeidelLocal] {
        let cfg = SolverConfig { scheme, max_iterations: 10_000, ..SolverConfig::default() };
        let d = detect_infeasibility(&op, &graph, &g, &cfg).unwrap();
        let floor = d.floor.unwrap_or(0.0);
        pass &= d.infeasible && d.report.status == SolveStatus::InfeasibleDetected && floor >= 0.4;
        pass &= d.report.iterations <= 10_000;
        notes.push(format!("{scheme:?} floor {floor} after {} iterations", d.report.iterations));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(1);
    Outcome::new(pass, format!("{}, {elapsed:.2?}", notes.join("; ")))
}

fn c3_median_nonuniqueness() -> Outcome {
    let start = Instant::now();
    let (graph, spec, g) = median12_instance();
    let op = spec.bind(&graph).unwrap();
    let with = |c: f64| VertexField::from_fn(&graph, |x| if graph.is_boundary(x) { g[x] } else { c });
    let (plus, minus) = (with(1.0), with(-1.0));
    let r_plus = interior_sup(&graph, &op.evaluate(&graph, &plus, &g).unwrap());
    let r_minus = interior_sup(&graph, &op.evaluate(&graph, &minus, &g).unwrap());
    let mut solved = Vec::new();
    for c in [1.0, -1.0] {
        let cfg = SolverConfig { initial: InitialGuess::Constant(c), ..SolverConfig::default() };
        let rep = solve_gauss_seidel(&op, &graph, &g, &cfg).unwrap();
        solved.push((rep.status, rep.solution));
    }
    let pass = graph.len() == 12
        && r_plus == 0.0
        && r_minus == 0.0
        && solved.iter().all(|(s, _)| *s == SolveStatus::Converged)
        && solved[0].1 == plus
        && solved[1].1 == minus
        && plus != minus;
    let elapsed = start.elapsed();
    Outcome::new(
        pass && elapsed < Duration::from_secs(1),
        format!("residuals {r_plus:e} and {r_minus:e}; Gauss–Seidel from ±1 reached u ≡ +1 and v ≡ −1, {elapsed:.2?}"),
    )
}

fn c4_comparison(harnack: &mut (usize, usize)) -> Outcome {
    let start = Instant::now();
    let specs = [
        ("laplacian", OperatorSpec::laplacian()),
        ("normalized_p(2)", OperatorSpec::normalized_p(2.0)),
        ("normalized_p(4)", OperatorSpec::normalized_p(4.0)),
        ("normalized_p(inf)", OperatorSpec::normalized_p(f64::INFINITY)),
    ];
    let mut pass = true;
    let mut notes = Vec::new();
    for (i, (name, spec)) in specs.iter().enumerate() {
        let cfg = FuzzConfig { trials: 200, seed: 40 + i as u64, family: Family::Mixed, ..FuzzConfig::default() };
        let s = verify::comparison_fuzz(spec, &cfg).unwrap();
        harnack.0 += s.harnack_checked;
        harnack.1 += s.harnack_violations;
        pass &= s.trials == 200 && s.covered == 200 && s.converged == 200 && s.violations == 0;
        pass &= s.max_excess <= 2e-10;
        notes.push(format!("{name} covered {} converged {} max excess {:e}", s.covered, s.converged, s.max_excess));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(60);
    Outcome::new(pass, format!("{}, {elapsed:.2?}", notes.join("; ")))
}

fn c5_harnack(from_fuzz: (usize, usize)) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut solutions = 0;
    let mut failures = 0;
    let specs = [
        OperatorSpec::inf_laplacian(),
        OperatorSpec::normalized_p(1.5),
        OperatorSpec::normalized_p(4.0),
        OperatorSpec::normalized_p(f64::INFINITY),
        OperatorSpec::from_json(r#"{"kind":"p_harmonious","lap":0.2,"w1":0.5,"wplus":0.3,"wminus":0.7}"#).unwrap(),
    ];
    for i in 0..60 {
        let graph = if i % 2 == 0 {
            let n = rng.gen_range(3..=25);
            random_tree(&mut rng, n, (0.1, 10.0))
        } else {
            grid_graph(rng.gen_range(3..=6), rng.gen_range(3..=6), 0.5)
        };
        let g = boundary_data(&mut rng, &graph, -1.0, 1.0);
        let op = specs[i % specs.len()].bind(&graph).unwrap();
        let cfg = SolverConfig { tolerance: 1e-12, ..SolverConfig::default() };
        let rep = solve_gauss_seidel(&op, &graph, &g, &cfg).unwrap();
        if rep.status != SolveStatus::Converged {
            failures += 1;
            continue;
        }
        solutions += 1;
        let h = harnack_check(&op, &graph, &rep.solution, 1e-10, EPS_STRICT).unwrap();
        failures += h.precondition_failures.len();
        for (branch, name) in [
            (HarnackBranch::Strict, "strict"),
            (HarnackBranch::Zero, "zero"),
            (HarnackBranch::Indeterminate, "indeterminate"),
            (HarnackBranch::Violation, "violation"),
        ] {
            *counts.entry(name).or_default() += h.count(branch);
        }
    }
    let violations = counts["violation"] + from_fuzz.1;
    Outcome::new(
        violations == 0 && failures == 0,
        format!(
            "{solutions} solved instances: {counts:?}; {} more solutions from the comparison fuzz with {} violations",
            from_fuzz.0, from_fuzz.1
        ),
    )
}

fn c6_classification() -> Outcome {
    let graph = grid_graph(5, 5, 1.0);
    let cfg = ClassifyConfig { trials: 10_000, seed: 6, ..ClassifyConfig::default() };
    let classify = |spec: OperatorSpec| classify_ellipticity(&spec.bind(&graph).unwrap(), &graph, cfg).unwrap();
    let mut pass = true;
    let mut notes = Vec::new();

    let lap = classify(OperatorSpec::laplacian());
    pass &= lap.elliptic.holds() && lap.uniformly_elliptic.holds() && !lap.proper.holds();
    notes.push("laplacian uniformly elliptic, not proper".to_string());

    let trivial = classify(OperatorSpec::trivial());
    pass &= trivial.proper.holds() && trivial.elliptic.holds();
    notes.push("trivial proper".into());

    for spec in [
        OperatorSpec::eikonal_plus(),
        OperatorSpec::eikonal_minus(),
        OperatorSpec::inf_laplacian(),
        OperatorSpec::one_laplacian(),
    ] {
        let name = spec.kind.name();
        let r = classify(spec);
        let ok = r.elliptic.holds() && !r.proper.holds() && !r.uniformly_elliptic.holds();
        pass &= ok;
        notes.push(format!("{name} {}", if ok { "elliptic only" } else { "MISMATCH" }));
    }
    Outcome::new(pass, notes.join("; "))
}

fn random_custom_spec(rng: &mut ChaCha8Rng) -> OperatorSpec {
    loop {
        let mut draw = || if rng.gen_bool(1.0 / 3.0) { None } else { Some(Coefficient::Constant(rng.gen_range(0.05..=2.0))) };
        let spec = OperatorSpec {
            lap: draw(),
            w1: draw(),
            wplus: draw(),
            wminus: draw(),
            ..OperatorSpec::new(OperatorKind::Custom)
        };
        if spec.lap.is_some() || spec.w1.is_some() || spec.wplus.is_some() || spec.wminus.is_some() {
            return spec;
        }
    }
}

fn c7_fixed_point_range() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut checks, mut bad_local, mut bad_global) = (0usize, 0usize, 0usize);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let graph = if i % 4 == 3 { grid_graph(rng.gen_range(3..=6), rng.gen_range(3..=6), 0.5) } else { random_graph(&mut rng, i, 25) };
        let spec = random_custom_spec(&mut rng);
        let op = spec.bind(&graph).unwrap();
        if !matches!(homogeneity_check(&op, &graph, 200, i as u64).unwrap(), HomogeneityOutcome::Pass { .. }) {
            return Outcome::new(false, format!("spec {} fails its own homogeneity envelope", spec.to_json()));
        }
        let g = boundary_data(&mut rng, &graph, -3.0, 3.0);
        let u = VertexField::from_fn(&graph, |x| if graph.is_boundary(x) { g[x] } else { rng.gen_range(-5.0..=5.0) });
        let t = fixed_point_map(&op, &graph, &g, &u).unwrap();
        for x in graph.interior() {
            let (lo, hi) = neighborhood_range(&graph, &u, x);
            checks += 1;
            if t[x] < lo || t[x] > hi {
                bad_local += 1;
                worst = worst.max(lo - t[x]).max(t[x] - hi);
            }
        }
        let (m, big_m) = graph.boundary().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(g[x]), b.max(g[x])));
        let mut it = solvers::initial_field(&graph, &g, &InitialGuess::Midrange).unwrap();
        for _ in 0..50 {
            it = fixed_point_map(&op, &graph, &g, &it).unwrap();
            if graph.interior().any(|x| it[x] < m || it[x] > big_m) {
                bad_global += 1;
                break;
            }
        }
    }
    Outcome::new(
        bad_local == 0 && bad_global == 0,
        format!("{checks} vertex checks, {bad_local} outside the neighborhood range (worst {worst:e}), {bad_global} runs left [min g, max g]"),
    )
}

fn c8_boundary_surgery() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut worst, mut surgeries, mut unconverged) = (0.0f64, 0usize, 0usize);
    for i in 0..50 {
        let graph = random_graph(&mut rng, i, 40);
        let g = boundary_data(&mut rng, &graph, -5.0, 5.0);
        let h: BTreeMap<String, f64> = graph.interior().map(|x| (graph.id(x).to_string(), rng.gen_range(0.5..=2.0))).collect();
        let (spec, sign) = if i % 2 == 0 {
            (OperatorSpec::eikonal_plus(), 1.0)
        } else {
            (OperatorSpec::eikonal_minus(), -1.0)
        };
        let h_signed: BTreeMap<String, f64> = h.iter().map(|(k, v)| (k.clone(), sign * v)).collect();
        let op = spec.with_source(Coefficient::PerVertex(h_signed)).bind(&graph).unwrap();
        let (eik_sign, h_field) = solvers::eikonal_data(&op, &graph).unwrap();
        let (lo, hi) = graph.boundary().fold((0.0f64, 0.0f64), |(a, b), x| (a.min(g[x]), b.max(g[x])));
        let aux = auxiliary_graph(&graph, &h_field, |b| match eik_sign {
            graphpde::EikonalSign::Plus => hi - g[b],
            graphpde::EikonalSign::Minus => g[b] - lo,
        })
        .unwrap();
        surgeries += aux.len() - graph.len();
        let rep = solve(&op, &graph, &g, &eikonal_cfg()).unwrap();
        if rep.status != SolveStatus::Converged {
            unconverged += 1;
        }
        worst = worst.max(interior_sup(&graph, &op.evaluate(&graph, &rep.solution, &g).unwrap()));
    }
    Outcome::new(
        worst < 1e-12 && unconverged == 0 && surgeries > 0,
        format!("worst residual {worst:e} over 50 instances, {surgeries} auxiliary vertices added"),
    )
}

fn c9_fd_consistency() -> Outcome {
    let start = Instant::now();
    let steps = [0.1, 0.05, 0.025];
    let sin = fd::test_fn_1d("sin").unwrap();
    let t = fd::second_difference_consistency(sin.u, (sin.d2u)(sin.x0), sin.x0, &steps);
    let o2 = t.order.unwrap_or(f64::NAN);

    let xsq = fd::test_fn_1d("xsq").unwrap();
    let t = fd::abs_gradient_consistency(xsq.u, (xsq.du)(xsq.x0).abs(), xsq.x0, &steps, Side::Upper);
    let o1 = t.order.unwrap_or(f64::NAN);

    let f = fd::test_fn_2d("xsq").unwrap();
    let ball = fd::inf_laplacian_ball_consistency(
        f.u,
        (f.grad)(f.center.0, f.center.1),
        f.normalized_inf_laplacian(),
        f.center,
        &[0.2, 0.1, 0.05],
        64,
    )
    .unwrap();
    let ball_max = ball.table.max_error();

    let e = fd::test_fn_2d("ellipse").unwrap();
    let lambda = fd::lambda1_scheme(e.u, e.center, 0.125, 4).unwrap();

    let elapsed = start.elapsed();
    let pass = o2 >= 1.9 && o1 >= 0.9 && ball.table.is_monotone() && lambda == 2.0 && elapsed < Duration::from_secs(10);
    Outcome::new(
        pass,
        format!(
            "second difference order {o2:.4}; |u_x| order {o1:.4}; ball error non-increasing (max {ball_max:e}); λ₁ = {lambda}; {elapsed:.2?}"
        ),
    )
}

fn c10_cross_solver() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut problems: Vec<(Graph, OperatorSpec)> = Vec::new();
    let mixed = OperatorSpec::from_json(r#"{"kind":"custom","lap":1,"w1":0.5,"wplus":0.25,"wminus":0.75}"#).unwrap();
    let p_harm = OperatorSpec::from_json(r#"{"kind":"p_harmonious","lap":0.5,"wplus":0.25,"wminus":0.25}"#).unwrap();
    for n in [3, 5, 9] {
        problems.push((path_graph(n, 1.0), OperatorSpec::laplacian()));
    }
    for (nx, ny, h) in [(3, 3, 1.0), (4, 5, 0.5), (6, 6, 0.25)] {
        problems.push((grid_graph(nx, ny, h), OperatorSpec::laplacian()));
        problems.push((grid_graph(nx, ny, h), mixed.clone()));
        problems.push((grid_graph(nx, ny, h), p_harm.clone()));
    }
    for _ in 0..12 {
        let n = rng.gen_range(3..=15);
        let graph = random_tree(&mut rng, n, (0.5, 2.0));
        problems.push((graph.clone(), OperatorSpec::laplacian()));
        problems.push((graph, mixed.clone()));
    }
    let (mut worst, mut used, mut skipped, mut unconverged) = (0.0f64, 0usize, 0usize, 0usize);
    for (i, (graph, spec)) in problems.iter().enumerate() {
        let op = spec.bind(graph).unwrap();
        let cls = classify_ellipticity(&op, graph, ClassifyConfig { trials: 2000, seed: i as u64, ..ClassifyConfig::default() }).unwrap();
        if !cls.uniformly_elliptic.holds() {
            skipped += 1;
            continue;
        }
        used += 1;
        let g = boundary_data(&mut rng, graph, -1.0, 1.0);
        let cfg = SolverConfig { tolerance: 1e-12, ..SolverConfig::default() };
        let a = solve_fixed_point(&op, graph, &g, &cfg).unwrap();
        let b = solve_gauss_seidel(&op, graph, &g, &cfg).unwrap();
        if a.status != SolveStatus::Converged || b.status != SolveStatus::Converged {
            unconverged += 1;
            continue;
        }
        worst = worst.max(a.solution.max_abs_diff(&b.solution, 0..graph.len()));
    }
    Outcome::new(
        worst <= 1e-8 && unconverged == 0 && skipped == 0,
        format!("{used} uniformly elliptic problems, max |u_T − u_GS| = {worst:e}, {unconverged} unconverged"),
    )
}

fn main() {
    let mut harnack_from_fuzz = (0usize, 0usize);
    let mut results = Vec::new();
    let mut run = |n: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::new(false, format!("panicked: {msg}"))
        });
        println!(
            "{} criterion {n:>2} {name}: {} [{:.2?}]",
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.detail,
            start.elapsed()
        );
        results.push(outcome.pass);
    };
    run(1, "eikonal equals graph distance", &mut c1_eikonal_is_distance);
    run(2, "K3 non-existence flagged", &mut c2_k3_infeasible);
    run(3, "median non-uniqueness", &mut c3_median_nonuniqueness);
    run(4, "comparison principle fuzz", &mut || c4_comparison(&mut harnack_from_fuzz));
    run(5, "Harnack-type dichotomy", &mut || c5_harnack(harnack_from_fuzz));
    run(6, "ellipticity classification", &mut c6_classification);
    run(7, "fixed-point map range contract", &mut c7_fixed_point_range);
    run(8, "eikonal boundary surgery", &mut c8_boundary_surgery);
    run(9, "finite difference consistency", &mut c9_fd_consistency);
    run(10, "fixed point vs Gauss-Seidel", &mut c10_cross_solver);
    let failed = results.iter().filter(|p| !**p).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
