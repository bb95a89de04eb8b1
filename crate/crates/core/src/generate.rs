//! Graph generators for grids, paths, and seeded random families.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::Result;
use crate::graph::{geometric_grid, Graph, GraphBuilder};

/// Undirected path `v0 – v1 – … – v(n-1)` with both ends on the boundary.
pub fn path_graph(n: usize, weight: f64) -> Graph {
    assert!(n >= 2, "a path needs at least two vertices");
    let mut b = GraphBuilder::new();
    for i in 0..n {
        b.vertex(format!("v{i}"), i == 0 || i == n - 1);
    }
    for i in 1..n {
        b.undirected_edge(format!("v{}", i - 1), format!("v{i}"), weight);
    }
    b.build().expect("path graph is valid")
}

/// `nx × ny` lattice with spacing `h` and the 5-point neighborhood.
pub fn grid_graph(nx: usize, ny: usize, h: f64) -> Graph {
    let points = lattice(&[nx, ny], h);
    geometric_grid(&[vec![h, 0.0], vec![0.0, h]], &points).expect("grid needs nx, ny >= 3")
}

/// Points `h·(i_1, …, i_k)` with `0 ≤ i_j < dims[j]`, in row-major order.
pub fn lattice(dims: &[usize], h: f64) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for &n in dims {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..n).map(move |i| {
                    let mut p = prefix.clone();
                    p.push(i as f64 * h);
                    p
                })
            })
            .collect();
    }
    out
}

/// 1-D grid `{0, h, …, (n-1)h}` as a geometric graph.
pub fn line_grid(n: usize, h: f64) -> Result<Graph> {
    geometric_grid(&[vec![h]], &lattice(&[n], h))
}

/// Random tree on `n ≥ 3` vertices with undirected edges; leaves form the
/// boundary. Weights are uniform in `weights`.
pub fn random_tree<R: Rng>(rng: &mut R, n: usize, weights: (f64, f64)) -> Graph {
    assert!(n >= 3);
    loop {
        let parent: Vec<usize> = (1..n).map(|i| rng.gen_range(0..i)).collect();
        let mut degree = vec![0usize; n];
        for (i, &p) in parent.iter().enumerate() {
            degree[i + 1] += 1;
            degree[p] += 1;
        }
        if degree.iter().all(|&d| d == 1) || degree.iter().all(|&d| d > 1) {
            continue;
        }
        let mut b = GraphBuilder::new();
        for (i, &d) in degree.iter().enumerate() {
            b.vertex(format!("t{i}"), d == 1);
        }
        for (i, &p) in parent.iter().enumerate() {
            let w = sample_weight(rng, weights);
            b.undirected_edge(format!("t{p}"), format!("t{}", i + 1), w);
        }
        if let Ok(g) = b.build() {
            if g.interior().count() > 0 {
                return g;
            }
        }
    }
}

/// Random directed graph on `n ≥ 2` vertices that is connected to its boundary.
///
/// A random nonempty boundary is chosen; every other vertex gets an edge to
/// some earlier vertex in a random order that starts at the boundary, then
/// extra random edges are added with probability `density`.
pub fn random_connected<R: Rng>(rng: &mut R, n: usize, density: f64, weights: (f64, f64)) -> Graph {
    assert!(n >= 2);
    let n_boundary = rng.gen_range(1..n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut is_boundary = vec![false; n];
    for &v in &order[..n_boundary] {
        is_boundary[v] = true;
    }
    let mut b = GraphBuilder::new();
    for (i, &bd) in is_boundary.iter().enumerate() {
        b.vertex(format!("n{i}"), bd);
    }
    let mut present = std::collections::HashSet::new();
    for k in n_boundary..n {
        let from = order[k];
        let to = order[rng.gen_range(0..k)];
        present.insert((from, to));
        b.edge(format!("n{from}"), format!("n{to}"), sample_weight(rng, weights));
    }
    for from in 0..n {
        for to in 0..n {
            if from != to && !present.contains(&(from, to)) && rng.gen_bool(density) {
                present.insert((from, to));
                b.edge(format!("n{from}"), format!("n{to}"), sample_weight(rng, weights));
            }
        }
    }
    b.build().expect("generated graph is valid")
}

fn sample_weight<R: Rng>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}
