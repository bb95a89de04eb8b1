mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use graphpde::fd::{self, StencilGrid};
use graphpde::generate::{path_graph, random_connected, random_tree};
use graphpde::io;
use graphpde::operators::{self, gradient, normalized_p_weights};
use graphpde::solvers::{fixed_point_map, solve_gauss_seidel};
use graphpde::verify::{max_set, propagate_max};
use graphpde::{Distance, Graph, InitialGuess, OperatorSpec, SolveStatus, SolverConfig, VertexField};

use common::{bellman_ford_to_boundary, floyd_warshall, interior_sup, simple_path_minimum};

fn graph_from_seed(seed: u64, max_n: usize) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if seed % 2 == 0 {
        let n = rng.gen_range(3..=max_n);
        random_tree(&mut rng, n, (0.1, 10.0))
    } else {
        let n = rng.gen_range(2..=max_n);
        random_connected(&mut rng, n, 0.3, (0.1, 10.0))
    }
}

fn random_field(graph: &Graph, seed: u64, range: f64) -> VertexField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    VertexField::from_fn(graph, |_| rng.gen_range(-range..=range))
}

fn builtin_specs() -> Vec<OperatorSpec> {
    vec![
        OperatorSpec::laplacian(),
        OperatorSpec::eikonal_plus(),
        OperatorSpec::eikonal_minus(),
        OperatorSpec::inf_laplacian(),
        OperatorSpec::one_laplacian(),
        OperatorSpec::normalized_p(3.0),
        OperatorSpec::from_json(r#"{"kind":"custom","lap":0.5,"w1":1,"wplus":0.25}"#).unwrap(),
    ]
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + scale)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn triangle_inequality(seed in any::<u64>()) {
        let graph = graph_from_seed(seed, 12);
        let d: Vec<Vec<Distance>> = (0..graph.len()).map(|x| graph.distances_from(x)).collect();
        for x in 0..graph.len() {
            for y in 0..graph.len() {
                for z in 0..graph.len() {
                    if let (Distance::Finite(a), Distance::Finite(b)) = (d[x][y], d[y][z]) {
                        let c = d[x][z].finite().expect("z reachable through y");
                        prop_assert!(c <= a + b + 1e-12 * (a + b), "{x} {y} {z}: {c} > {a} + {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn path_distance_matches_simple_path_enumeration(seed in any::<u64>()) {
        let graph = graph_from_seed(seed, 8);
        let fw = floyd_warshall(&graph);
        for x in 0..graph.len() {
            for y in 0..graph.len() {
                let brute = simple_path_minimum(&graph, x, y);
                match graph.path_distance(x, y) {
                    Distance::Infinite => {
                        prop_assert!(brute.is_infinite());
                        prop_assert!(fw[x][y].is_infinite());
                    }
                    Distance::Finite(d) => {
                        prop_assert!(close(d, brute, brute), "{d} vs {brute}");
                        prop_assert!(close(d, fw[x][y], brute));
                    }
                }
            }
        }
    }

    #[test]
    fn distance_to_boundary_matches_bellman_ford(seed in any::<u64>()) {
        let graph = graph_from_seed(seed, 40);
        let oracle = bellman_ford_to_boundary(&graph);
        for (x, d) in graph.distances_to_boundary().into_iter().enumerate() {
            prop_assert_eq!(d.finite().unwrap_or(f64::INFINITY), oracle[x]);
        }
    }

    #[test]
    fn regular_grids_have_full_interior_stencils(nx in 3usize..7, ny in 3usize..7, nz in 3usize..5, three in any::<bool>()) {
        let dims: Vec<usize> = if three { vec![nx, ny, nz] } else { vec![nx, ny] };
        let grid = StencilGrid::regular(&dims, 0.5).unwrap();
        let graph = grid.graph();
        prop_assert!(graph.to_builder().validate().is_ok());
        let expected: usize = dims.iter().map(|n| n - 2).product();
        prop_assert_eq!(graph.interior().count(), expected);
        for x in graph.interior() {
            prop_assert_eq!(graph.degree(x), 2 * dims.len());
        }
    }

    #[test]
    fn operators_ignore_neighbor_order(seed in any::<u64>()) {
        let graph = graph_from_seed(seed, 15);
        let u = random_field(&graph, seed ^ 1, 5.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
        let mut shuffled = graph.clone();
        for x in 0..graph.len() {
            let mut order: Vec<usize> = (0..graph.degree(x)).collect();
            order.shuffle(&mut rng);
            shuffled = shuffled.with_neighbor_order(x, &order).unwrap();
        }
        let g = VertexField::constant(&graph, 0.0);
        for spec in builtin_specs() {
            let a = spec.bind(&graph).unwrap().evaluate(&graph, &u, &g).unwrap();
            let b = spec.bind(&shuffled).unwrap().evaluate(&shuffled, &u, &g).unwrap();
            for x in graph.interior() {
                // only the Laplacian sum depends on summation order, and only by rounding
                prop_assert!(close(a[x], b[x], 50.0), "{}: {} vs {}", spec.to_json(), a[x], b[x]);
            }
        }
    }

    #[test]
    fn homogeneous_operators_ignore_constants_and_scale(seed in any::<u64>(), c in -100.0f64..100.0, lambda in 0.0f64..10.0) {
        let graph = graph_from_seed(seed, 15);
        let u = random_field(&graph, seed ^ 3, 5.0);
        let shifted = VertexField::from_fn(&graph, |x| u[x] + c);
        let scaled = VertexField::from_fn(&graph, |x| lambda * u[x]);
        let g = VertexField::constant(&graph, 0.0);
        for spec in builtin_specs() {
            let op = spec.bind(&graph).unwrap();
            let base = op.evaluate(&graph, &u, &g).unwrap();
            let a = op.evaluate(&graph, &shifted, &g).unwrap();
            let b = op.evaluate(&graph, &scaled, &g).unwrap();
            for x in graph.interior() {
                prop_assert!(close(a[x], base[x], 1e4 * (1.0 + c.abs())), "shift {}: {} vs {}", spec.to_json(), a[x], base[x]);
                prop_assert!(close(b[x], lambda * base[x], 1e4 * (1.0 + lambda)), "scale {}", spec.to_json());
            }
        }
    }

    #[test]
    fn local_maxima_have_nonpositive_gradient(seed in any::<u64>()) {
        let graph = graph_from_seed(seed, 15);
        let u = random_field(&graph, seed ^ 4, 5.0);
        for x in graph.interior() {
            let top = graph.neighbors(x).iter().map(|e| u[e.to]).fold(f64::NEG_INFINITY, f64::max);
            let mut v = u.clone();
            v[x] = top;
            prop_assert!(gradient(&graph, &v, x).unwrap().entries().iter().all(|&p| p <= 0.0));
            v[x] = top + 0.5;
            prop_assert!(gradient(&graph, &v, x).unwrap().entries().iter().all(|&p| p < 0.0));
        }
    }

    #[test]
    fn monotone_in_value_and_gradient(seed in any::<u64>()) {
        // u(x) ≥ v(x) and ∇u(x) ≤ ∇v(x) entrywise imply F(u)(x) ≤ F(v)(x)
        let graph = graph_from_seed(seed, 15);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 5);
        let mut specs = builtin_specs();
        specs.push(OperatorSpec::trivial());
        specs.push(OperatorSpec::laplacian().with_source(1.5));
        for spec in specs {
            let op = spec.bind(&graph).unwrap();
            for x in graph.interior() {
                let q: Vec<f64> = (0..graph.degree(x)).map(|_| rng.gen_range(-10.0..10.0)).collect();
                let p: Vec<f64> = q.iter().map(|&qi| if rng.gen_bool(0.5) { qi - rng.gen_range(0.0..5.0) } else { qi }).collect();
                let s = rng.gen_range(-10.0..10.0);
                let r = s + if rng.gen_bool(0.5) { rng.gen_range(0.0..5.0) } else { 0.0 };
                prop_assert!(op.apply(x, r, &p) <= op.apply(x, s, &q), "{}", spec.to_json());
            }
        }
    }

    #[test]
    fn fixed_point_map_is_monotone(seed in any::<u64>()) {
        let graph = graph_from_seed(seed, 15);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 6);
        let g = VertexField::from_fn(&graph, |x| if graph.is_boundary(x) { rng.gen_range(-1.0..1.0) } else { 0.0 });
        let u = random_field(&graph, seed ^ 7, 3.0);
        let v = VertexField::from_fn(&graph, |x| u[x] + if rng.gen_bool(0.7) { rng.gen_range(0.0..2.0) } else { 0.0 });
        for spec in builtin_specs() {
            let op = spec.bind(&graph).unwrap();
            let tu = fixed_point_map(&op, &graph, &g, &u).unwrap();
            let tv = fixed_point_map(&op, &graph, &g, &v).unwrap();
            for x in 0..graph.len() {
                prop_assert!(tu[x] <= tv[x] + 1e-13, "{}: {} > {}", spec.to_json(), tu[x], tv[x]);
            }
        }
    }

    #[test]
    fn inf_laplacian_is_mean_of_eikonals_bitwise(seed in any::<u64>()) {
        let graph = graph_from_seed(seed, 15);
        let u = random_field(&graph, seed ^ 8, 5.0);
        let g = VertexField::constant(&graph, 0.0);
        let spec_value = OperatorSpec::inf_laplacian().bind(&graph).unwrap().evaluate(&graph, &u, &g).unwrap();
        for x in graph.interior() {
            let plus = operators::eikonal_plus(&graph, &u, x).unwrap();
            let minus = operators::eikonal_minus(&graph, &u, x).unwrap();
            let mean = (plus + minus) / 2.0;
            prop_assert_eq!(operators::inf_laplacian(&graph, &u, x).unwrap().to_bits(), mean.to_bits());
            prop_assert_eq!(spec_value[x].to_bits(), mean.to_bits());
        }
    }

    #[test]
    fn normalized_two_laplacian_is_half_laplacian_on_paths(n in 3usize..20, seed in any::<u64>()) {
        let graph = path_graph(n, 1.0);
        let u = random_field(&graph, seed, 5.0);
        let g = VertexField::constant(&graph, 0.0);
        let half = OperatorSpec::normalized_p(2.0).bind(&graph).unwrap().evaluate(&graph, &u, &g).unwrap();
        for x in graph.interior() {
            let lap = operators::laplacian(&graph, &u, x).unwrap();
            prop_assert!(close(half[x], lap / 2.0, 10.0));
        }
    }

    #[test]
    fn normalized_p_weights_are_conjugate(p in 1.0f64..1e6) {
        let (w1, w_pm) = normalized_p_weights(p);
        prop_assert!((w1 + 2.0 * w_pm - 1.0).abs() < 1e-15);
        prop_assert!(w1 >= 0.0 && w_pm >= 0.0);
    }

    #[test]
    fn converged_reports_meet_tolerance(seed in any::<u64>()) {
        let graph = graph_from_seed(seed, 15);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 9);
        let g = VertexField::from_fn(&graph, |x| if graph.is_boundary(x) { rng.gen_range(-2.0..2.0) } else { 0.0 });
        let cfg = SolverConfig { tolerance: 1e-9, max_iterations: 100_000, ..SolverConfig::default() };
        for spec in [OperatorSpec::laplacian(), OperatorSpec::inf_laplacian(), OperatorSpec::normalized_p(3.0)] {
            let op = spec.bind(&graph).unwrap();
            let rep = solve_gauss_seidel(&op, &graph, &g, &cfg).unwrap();
            if rep.status == SolveStatus::Converged {
                let r = interior_sup(&graph, &op.evaluate(&graph, &rep.solution, &g).unwrap());
                prop_assert!(r <= cfg.tolerance, "{}: {r}", spec.to_json());
            }
        }
    }

    #[test]
    fn laplacian_solutions_do_not_depend_on_the_start(seed in any::<u64>()) {
        let graph = graph_from_seed(seed, 15);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 10);
        let g = VertexField::from_fn(&graph, |x| if graph.is_boundary(x) { rng.gen_range(-2.0..2.0) } else { 0.0 });
        let op = OperatorSpec::laplacian().bind(&graph).unwrap();
        let tol = 1e-11;
        let a = solve_gauss_seidel(&op, &graph, &g, &SolverConfig { tolerance: tol, ..SolverConfig::default() }).unwrap();
        let b = solve_gauss_seidel(&op, &graph, &g, &SolverConfig { tolerance: tol, initial: InitialGuess::Constant(40.0), ..SolverConfig::default() }).unwrap();
        prop_assert_eq!(a.status, SolveStatus::Converged);
        prop_assert_eq!(b.status, SolveStatus::Converged);
        // a residual of tol moves the solution by at most tol times the Green's function norm
        prop_assert!(a.solution.max_abs_diff(&b.solution, 0..graph.len()) <= 1e-8);
    }

    #[test]
    fn max_set_is_exact(seed in any::<u64>()) {
        let graph = graph_from_seed(seed, 20);
        let u = random_field(&graph, seed ^ 11, 1.0);
        let mut v = random_field(&graph, seed ^ 12, 1.0);
        // force ties
        v[0] = u[0] - 3.0;
        if graph.len() > 1 {
            v[1] = u[1] - 3.0;
        }
        let (m, w) = max_set(&u, &v);
        prop_assert_eq!(m, 3.0);
        for x in 0..graph.len() {
            prop_assert_eq!(w.contains(&x), u[x] - v[x] == m);
        }
    }

    #[test]
    fn active_neighbors_stay_in_the_max_set(seed in any::<u64>()) {
        let graph = graph_from_seed(seed, 12);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 13);
        let op = OperatorSpec::from_json(r#"{"kind":"custom","lap":0.3,"wplus":1}"#).unwrap().bind(&graph).unwrap();
        let u = random_field(&graph, seed ^ 14, 2.0);
        // v = u − φ with φ ≤ 1 and φ = 1 on most vertices; draws that miss
        // the hypothesis F(u) ≥ F(v) are skipped
        for _ in 0..4 {
            let phi = VertexField::from_fn(&graph, |_| if rng.gen_bool(0.7) { 1.0 } else { rng.gen_range(-1.0..0.9) });
            let v = VertexField::from_fn(&graph, |x| u[x] - phi[x]);
            match propagate_max(&op, &graph, &u, &v, 1e-9) {
                Ok(trace) => prop_assert!(trace.violations.is_empty(), "{:?}", trace.violations),
                Err(graphpde::Error::Hypothesis(_)) => {}
                Err(e) => prop_assert!(false, "{e}"),
            }
        }
    }

    #[test]
    fn stencils_are_monotone(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = rng.gen_range(0.01..1.0);
        let (a, u0, b) = (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        let d = rng.gen_range(0.0..1.0);
        type Scheme1 = fn(f64, f64, f64, f64) -> f64;
        let schemes: [Scheme1; 3] = [fd::second_difference_values, fd::abs_gradient_upper_values, fd::abs_gradient_lower_values];
        for s in schemes {
            let base = s(a, u0, b, h);
            prop_assert!(s(a + d, u0, b, h) >= base);
            prop_assert!(s(a, u0, b + d, h) >= base);
            prop_assert!(s(a, u0 + d, b, h) <= base);
        }
        let ring: Vec<f64> = (0..8).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let k = rng.gen_range(0..8);
        let mut up = ring.clone();
        up[k] += d;
        prop_assert!(fd::ball_inf_laplacian_values(u0, &up, h) >= fd::ball_inf_laplacian_values(u0, &ring, h));
        prop_assert!(fd::ball_inf_laplacian_values(u0 + d, &ring, h) <= fd::ball_inf_laplacian_values(u0, &ring, h));
        let pairs: Vec<(f64, f64)> = ring.chunks(2).map(|c| (c[0], c[1])).collect();
        let mut up = pairs.clone();
        up[k / 2].0 += d;
        prop_assert!(fd::lambda1_values(u0, &up, h) >= fd::lambda1_values(u0, &pairs, h));
        prop_assert!(fd::lambda1_values(u0 + d, &pairs, h) <= fd::lambda1_values(u0, &pairs, h));
    }

    #[test]
    fn field_csv_round_trips(values in proptest::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 3..20)) {
        let graph = path_graph(values.len(), 1.0);
        let f = VertexField::new(&graph, values).unwrap();
        let back = io::read_field(io::field_to_csv(&graph, &f).as_bytes(), &graph, "mem").unwrap();
        prop_assert_eq!(back, f);
    }
}

#[test]
fn normalized_two_laplacian_differs_from_half_laplacian_at_degree_three() {
    // the median of three entries is not their mean, so the identity is a degree-2 fact
    let mut b = graphpde::GraphBuilder::new();
    b.vertex("x", false);
    for y in ["a", "b", "c"] {
        b.vertex(y, true).edge("x", y, 1.0);
    }
    let graph = b.build().unwrap();
    let u = VertexField::new(&graph, vec![0.0, 0.0, 1.0, 5.0]).unwrap();
    let g = VertexField::constant(&graph, 0.0);
    let half = OperatorSpec::normalized_p(2.0).bind(&graph).unwrap().evaluate(&graph, &u, &g).unwrap();
    let lap = operators::laplacian(&graph, &u, 0).unwrap();
    assert_eq!(lap / 2.0, 3.0);
    assert_eq!(half[0], 0.5 * 1.0 + 0.25 * 5.0 + 0.25 * 0.0);
    assert_ne!(half[0], lap / 2.0);
}
