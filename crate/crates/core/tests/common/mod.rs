//! Reference computations that share no code with the library.
#![allow(dead_code)]

use graphpde::{Graph, VertexField};

/// Shortest directed path length from every vertex to the boundary, by
/// Bellman–Ford relaxation. Paths stop at the first boundary vertex.
pub fn bellman_ford_to_boundary(graph: &Graph) -> Vec<f64> {
    let n = graph.len();
    let mut d: Vec<f64> = (0..n).map(|x| if graph.is_boundary(x) { 0.0 } else { f64::INFINITY }).collect();
    for _ in 0..n {
        let mut changed = false;
        for x in 0..n {
            if graph.is_boundary(x) {
                continue;
            }
            for e in graph.neighbors(x) {
                let cand = 1.0 / e.weight + d[e.to];
                if cand < d[x] {
                    d[x] = cand;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    d
}

/// All-pairs shortest directed path lengths over every edge.
pub fn floyd_warshall(graph: &Graph) -> Vec<Vec<f64>> {
    let n = graph.len();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for x in 0..n {
        d[x][x] = 0.0;
        for e in graph.neighbors(x) {
            d[x][e.to] = d[x][e.to].min(1.0 / e.weight);
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// Minimum over all simple directed paths `x → y`, by exhaustive search.
pub fn simple_path_minimum(graph: &Graph, x: usize, y: usize) -> f64 {
    fn walk(graph: &Graph, at: usize, target: usize, seen: &mut Vec<bool>, len: f64, best: &mut f64) {
        if at == target {
            *best = best.min(len);
            return;
        }
        for e in graph.neighbors(at) {
            if !seen[e.to] {
                seen[e.to] = true;
                walk(graph, e.to, target, seen, len + 1.0 / e.weight, best);
                seen[e.to] = false;
            }
        }
    }
    let mut seen = vec![false; graph.len()];
    seen[x] = true;
    let mut best = f64::INFINITY;
    walk(graph, x, y, &mut seen, 0.0, &mut best);
    best
}

/// Closed neighborhood range `[min, max]` of `u` at `x`.
pub fn neighborhood_range(graph: &Graph, u: &VertexField, x: usize) -> (f64, f64) {
    graph
        .neighbors(x)
        .iter()
        .map(|e| u[e.to])
        .fold((u[x], u[x]), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Interior ∞-norm of a residual field.
pub fn interior_sup(graph: &Graph, r: &VertexField) -> f64 {
    graph.interior().map(|x| r[x].abs()).fold(0.0, f64::max)
}
