//! Finite difference schemes and their graph realizations.
//!
//! Graph gradient entries are first difference quotients (weight `1/h`), so on
//! a grid with step `h` the graph Laplacian equals `h` times the usual
//! `h⁻²` stencil. Every helper here that moves between the two states the
//! factor explicitly; see [`GRAPH_TO_STENCIL`].

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::generate::lattice;
use crate::graph::{stencil_graph, Graph, VertexField};

/// Relative size of rounding noise assumed for a difference of `O(1)` values.
const ROUNDING_FACTOR: f64 = 64.0 * f64::EPSILON;

/// One row of an error table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorRow {
    pub step: f64,
    pub value: f64,
    pub exact: f64,
    pub error: f64,
    /// Estimated rounding floor; errors at or below it are not resolved.
    pub floor: f64,
}

impl ErrorRow {
    fn new(step: f64, value: f64, exact: f64, floor: f64) -> Self {
        Self { step, value, exact, error: (value - exact).abs(), floor }
    }

    /// The error with unresolved rounding noise replaced by zero.
    pub fn resolved_error(&self) -> f64 {
        if self.error <= self.floor {
            0.0
        } else {
            self.error
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorTable {
    pub rows: Vec<ErrorRow>,
    /// Least-squares slope of `log error` against `log step` over the
    /// resolved rows; `None` with fewer than two of them.
    pub order: Option<f64>,
}

impl ErrorTable {
    fn new(rows: Vec<ErrorRow>) -> Self {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.resolved_error() > 0.0)
            .map(|r| (r.step, r.error))
            .collect();
        let order = fit_order(&pts);
        Self { rows, order }
    }

    /// Resolved errors are non-increasing as the step shrinks.
    pub fn is_monotone(&self) -> bool {
        let mut rows = self.rows.clone();
        rows.sort_by(|a, b| b.step.total_cmp(&a.step));
        rows.windows(2).all(|w| w[1].resolved_error() <= w[0].resolved_error())
    }

    /// Every resolved error is strictly below its predecessor.
    pub fn is_strictly_decreasing(&self) -> bool {
        let mut rows = self.rows.clone();
        rows.sort_by(|a, b| b.step.total_cmp(&a.step));
        rows.windows(2).all(|w| w[1].resolved_error() < w[0].resolved_error())
    }

    pub fn max_error(&self) -> f64 {
        self.rows.iter().map(|r| r.error).fold(0.0, f64::max)
    }

    /// CSV with columns `step,value,exact,error,floor,fitted_order`.
    pub fn to_csv(&self) -> String {
        let order = self.order.map_or_else(|| "nan".to_string(), crate::io::fmt_f64);
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["step", "value", "exact", "error", "floor", "fitted_order"]).expect("in memory");
        for r in &self.rows {
            let f = crate::io::fmt_f64;
            w.write_record([f(r.step), f(r.value), f(r.exact), f(r.error), f(r.floor), order.clone()])
                .expect("in memory");
        }
        String::from_utf8(w.into_inner().expect("in memory")).expect("utf-8")
    }
}

/// Least-squares slope of `ln e` against `ln h`; needs two points with `e > 0`.
pub fn fit_order(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|(h, e)| *h > 0.0 && *e > 0.0).map(|(h, e)| (h.ln(), e.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// `(u₊ − 2u₀ + u₋) / h²`.
pub fn second_difference_values(u_minus: f64, u0: f64, u_plus: f64, h: f64) -> f64 {
    (u_plus - 2.0 * u0 + u_minus) / (h * h)
}

/// `max(u₊ − u₀, u₋ − u₀) / h`, consistent with `|u'|`.
pub fn abs_gradient_upper_values(u_minus: f64, u0: f64, u_plus: f64, h: f64) -> f64 {
    (u_plus - u0).max(u_minus - u0) / h
}

/// `min(u₊ − u₀, u₋ − u₀) / h`, consistent with `−|u'|`.
pub fn abs_gradient_lower_values(u_minus: f64, u0: f64, u_plus: f64, h: f64) -> f64 {
    (u_plus - u0).min(u_minus - u0) / h
}

/// `(min ring + max ring − 2u₀) / r²`.
pub fn ball_inf_laplacian_values(u0: f64, ring: &[f64], r: f64) -> f64 {
    let lo = ring.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ring.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo + hi - 2.0 * u0) / (r * r)
}

/// Smallest directional second difference over `(u(x + hv), u(x − hv))` pairs.
pub fn lambda1_values(u0: f64, pairs: &[(f64, f64)], h: f64) -> f64 {
    pairs
        .iter()
        .map(|&(plus, minus)| second_difference_values(minus, u0, plus, h))
        .fold(f64::INFINITY, f64::min)
}

pub fn second_difference(u: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    second_difference_values(u(x - h), u(x), u(x + h), h)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// The max scheme, for `|u'|`.
    Upper,
    /// The min scheme, for `−|u'|`.
    Lower,
}

pub fn abs_gradient(u: impl Fn(f64) -> f64, x: f64, h: f64, side: Side) -> f64 {
    let (m, c, p) = (u(x - h), u(x), u(x + h));
    match side {
        Side::Upper => abs_gradient_upper_values(m, c, p, h),
        Side::Lower => abs_gradient_lower_values(m, c, p, h),
    }
}

fn scale1(u: &impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    u(x - h).abs().max(u(x).abs()).max(u(x + h).abs())
}

/// Error of the three-point second difference against the exact `u''(x)`.
pub fn second_difference_consistency(u: impl Fn(f64) -> f64, exact: f64, x: f64, steps: &[f64]) -> ErrorTable {
    ErrorTable::new(
        steps
            .iter()
            .map(|&h| {
                let floor = 4.0 * ROUNDING_FACTOR * scale1(&u, x, h) / (h * h);
                ErrorRow::new(h, second_difference(&u, x, h), exact, floor)
            })
            .collect(),
    )
}

/// Error of the upwind `|u'|` scheme (or its lower twin) against `±|u'(x)|`.
pub fn abs_gradient_consistency(u: impl Fn(f64) -> f64, exact_abs: f64, x: f64, steps: &[f64], side: Side) -> ErrorTable {
    let exact = match side {
        Side::Upper => exact_abs,
        Side::Lower => -exact_abs,
    };
    ErrorTable::new(
        steps
            .iter()
            .map(|&h| {
                let floor = 2.0 * ROUNDING_FACTOR * scale1(&u, x, h) / h;
                ErrorRow::new(h, abs_gradient(&u, x, h, side), exact, floor)
            })
            .collect(),
    )
}

/// `k` equally spaced unit vectors `(cos 2πj/k, sin 2πj/k)`.
pub fn circle_directions(k: usize) -> Vec<(f64, f64)> {
    (0..k).map(|j| turn_direction(j, k)).collect()
}

/// `k` equally spaced unit vectors with angles `πj/k`, `j < k`.
pub fn half_circle_directions(k: usize) -> Vec<(f64, f64)> {
    (0..k).map(|j| turn_direction(j, 2 * k)).collect()
}

// angle 2πj/n, with exact axes at quarter turns
fn turn_direction(j: usize, n: usize) -> (f64, f64) {
    if (4 * j) % n == 0 {
        return match (4 * j / n) % 4 {
            0 => (1.0, 0.0),
            1 => (0.0, 1.0),
            2 => (-1.0, 0.0),
            _ => (0.0, -1.0),
        };
    }
    let theta = 2.0 * PI * j as f64 / n as f64;
    (theta.cos(), theta.sin())
}

/// Wide-stencil infinity Laplacian on the circle of radius `r`.
pub fn inf_laplacian_ball(u: impl Fn(f64, f64) -> f64, center: (f64, f64), r: f64, k: usize) -> f64 {
    let (cx, cy) = center;
    let ring: Vec<f64> = circle_directions(k).iter().map(|&(a, b)| u(cx + r * a, cy + r * b)).collect();
    ball_inf_laplacian_values(u(cx, cy), &ring, r)
}

/// Row of [`inf_laplacian_ball_consistency`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BallRow {
    pub row: ErrorRow,
    pub directions: usize,
    /// `|scheme(k) − scheme(16k)|`: the part of the error due to the
    /// angular sampling.
    pub angular_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BallTable {
    pub table: ErrorTable,
    pub rows: Vec<BallRow>,
    /// Whether the fitted order reaches 1 and 2 (both are reported).
    pub order_at_least_one: Option<bool>,
    pub order_at_least_two: Option<bool>,
}

/// Error of the ball scheme against the exact normalized infinity Laplacian
/// `⟨D²u ∇u, ∇u⟩ / |∇u|²`. The gradient at the center must be nonzero.
pub fn inf_laplacian_ball_consistency(
    u: impl Fn(f64, f64) -> f64,
    gradient: (f64, f64),
    exact: f64,
    center: (f64, f64),
    radii: &[f64],
    k: usize,
) -> Result<BallTable> {
    if gradient.0 == 0.0 && gradient.1 == 0.0 {
        return Err(Error::InvalidSpec("gradient vanishes at the center".into()));
    }
    if k < 2 {
        return Err(Error::InvalidSpec("need at least two directions".into()));
    }
    let (cx, cy) = center;
    let rows: Vec<BallRow> = radii
        .iter()
        .map(|&r| {
            let value = inf_laplacian_ball(&u, center, r, k);
            let fine = inf_laplacian_ball(&u, center, r, 16 * k);
            let scale = circle_directions(k)
                .iter()
                .map(|&(a, b)| u(cx + r * a, cy + r * b).abs())
                .fold(u(cx, cy).abs(), f64::max);
            let floor = 4.0 * ROUNDING_FACTOR * scale / (r * r);
            BallRow { row: ErrorRow::new(r, value, exact, floor), directions: k, angular_error: (value - fine).abs() }
        })
        .collect();
    let table = ErrorTable::new(rows.iter().map(|r| r.row).collect());
    let order_at_least_one = table.order.map(|o| o >= 0.9);
    let order_at_least_two = table.order.map(|o| o >= 1.9);
    Ok(BallTable { table, rows, order_at_least_one, order_at_least_two })
}

/// `min_v (u(x + hv) − 2u(x) + u(x − hv)) / h²` over `k` directions with
/// angles `πj/k`. Axis directions are included whenever `k` is even.
pub fn lambda1_scheme(u: impl Fn(f64, f64) -> f64, center: (f64, f64), h: f64, k: usize) -> Result<f64> {
    if k < 2 {
        return Err(Error::InvalidSpec("need at least two directions".into()));
    }
    let (cx, cy) = center;
    let pairs: Vec<(f64, f64)> = half_circle_directions(k)
        .iter()
        .map(|&(a, b)| (u(cx + h * a, cy + h * b), u(cx - h * a, cy - h * b)))
        .collect();
    Ok(lambda1_values(u(cx, cy), &pairs, h))
}

/// Grid graph realizing a stencil: points, direction set and step.
#[derive(Clone, Debug)]
pub struct StencilGrid {
    pub dim: usize,
    /// Common length of all stencil directions.
    pub step: f64,
    pub directions: Vec<Vec<f64>>,
    pub points: Vec<Vec<f64>>,
    graph: Graph,
}

/// Multiply a graph second-order operator by this power of `1/h` to get the
/// standard stencil value: graph Δ = h · (h⁻² stencil).
pub const GRAPH_TO_STENCIL: i32 = 1;

impl StencilGrid {
    /// Arbitrary points and directions; all directions must share one length.
    pub fn new(directions: Vec<Vec<f64>>, points: Vec<Vec<f64>>) -> Result<Self> {
        let lengths: Vec<f64> = directions.iter().map(|v| v.iter().map(|c| c * c).sum::<f64>().sqrt()).collect();
        let step = *lengths.first().ok_or(Error::DependentDirections)?;
        if lengths.iter().any(|&l| (l - step).abs() > 1e-12 * step) {
            return Err(Error::InvalidSpec("stencil directions must have equal length".into()));
        }
        let graph = stencil_graph(&directions, &points)?;
        Ok(Self { dim: directions[0].len(), step, directions, points, graph })
    }

    /// Axis-aligned lattice `h·{0..n_1} × …` with the `2d`-point stencil.
    pub fn regular(dims: &[usize], h: f64) -> Result<Self> {
        let directions = (0..dims.len())
            .map(|i| (0..dims.len()).map(|j| if i == j { h } else { 0.0 }).collect())
            .collect();
        Self::new(directions, lattice(dims, h))
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn point(&self, x: usize) -> &[f64] {
        &self.points[x]
    }

    /// Samples a function at every grid point.
    pub fn sample(&self, f: impl Fn(&[f64]) -> f64) -> VertexField {
        VertexField::from_fn(&self.graph, |x| f(&self.points[x]))
    }

    /// Standard `h⁻²` stencil Laplacian at `x`: `Σ_j (u(x+v_j) + u(x−v_j) − 2u(x)) / h²`.
    pub fn stencil_laplacian(&self, u: &VertexField, x: usize) -> Result<f64> {
        self.graph.require_interior(x)?;
        let h2 = self.step * self.step;
        let nbrs = self.graph.neighbors(x);
        Ok(nbrs.iter().map(|e| u[e.to] - u[x]).sum::<f64>() / h2)
    }

    /// Converts a graph second-order value to the stencil scale.
    pub fn graph_to_stencil(&self, graph_value: f64) -> f64 {
        graph_value / self.step.powi(GRAPH_TO_STENCIL)
    }
}

/// The geometric graph behind a stencil grid.
pub fn grid_to_graph(stencil: &StencilGrid) -> Graph {
    stencil.graph.clone()
}

/// Built-in one-dimensional test functions for the CLI.
#[derive(Clone, Copy, Debug)]
pub struct TestFn1 {
    pub name: &'static str,
    pub u: fn(f64) -> f64,
    pub du: fn(f64) -> f64,
    pub d2u: fn(f64) -> f64,
    /// Evaluation point.
    pub x0: f64,
}

pub const TEST_FNS_1D: &[TestFn1] = &[
    TestFn1 { name: "sin", u: f64::sin, du: f64::cos, d2u: |x| -x.sin(), x0: 1.0 },
    TestFn1 { name: "quartic", u: |x| x.powi(4), du: |x| 4.0 * x.powi(3), d2u: |x| 12.0 * x * x, x0: 1.0 },
    TestFn1 { name: "xsq", u: |x| x * x, du: |x| 2.0 * x, d2u: |_| 2.0, x0: 1.0 },
    TestFn1 { name: "linear", u: |x| 3.0 * x - 1.0, du: |_| 3.0, d2u: |_| 0.0, x0: 0.3 },
    TestFn1 { name: "exp", u: f64::exp, du: f64::exp, d2u: f64::exp, x0: 0.0 },
];

/// Built-in two-dimensional test functions with exact derivatives.
#[derive(Clone, Copy, Debug)]
pub struct TestFn2 {
    pub name: &'static str,
    pub u: fn(f64, f64) -> f64,
    pub grad: fn(f64, f64) -> (f64, f64),
    /// `(u_xx, u_xy, u_yy)`.
    pub hess: fn(f64, f64) -> (f64, f64, f64),
    pub center: (f64, f64),
}

impl TestFn2 {
    /// `⟨D²u ∇u, ∇u⟩ / |∇u|²` at the center.
    pub fn normalized_inf_laplacian(&self) -> f64 {
        let (x, y) = self.center;
        let (a, b) = (self.grad)(x, y);
        let (xx, xy, yy) = (self.hess)(x, y);
        (xx * a * a + 2.0 * xy * a * b + yy * b * b) / (a * a + b * b)
    }

    /// Smallest Hessian eigenvalue at the center.
    pub fn lambda1(&self) -> f64 {
        let (x, y) = self.center;
        let (a, b, c) = (self.hess)(x, y);
        (a + c) / 2.0 - (((a - c) / 2.0).powi(2) + b * b).sqrt()
    }
}

pub const TEST_FNS_2D: &[TestFn2] = &[
    TestFn2 { name: "xsq", u: |x, _| x * x, grad: |x, _| (2.0 * x, 0.0), hess: |_, _| (2.0, 0.0, 0.0), center: (1.0, 0.0) },
    TestFn2 {
        name: "ellipse",
        u: |x, y| x * x + 4.0 * y * y,
        grad: |x, y| (2.0 * x, 8.0 * y),
        hess: |_, _| (2.0, 0.0, 8.0),
        center: (0.0, 0.0),
    },
    TestFn2 { name: "saddle", u: |x, y| x * y, grad: |x, y| (y, x), hess: |_, _| (0.0, 1.0, 0.0), center: (0.0, 0.0) },
    TestFn2 {
        name: "hyperbolic",
        u: |x, y| x * x - y * y,
        grad: |x, y| (2.0 * x, -2.0 * y),
        hess: |_, _| (2.0, 0.0, -2.0),
        center: (1.0, 1.0),
    },
    TestFn2 {
        name: "linear",
        u: |x, y| 2.0 * x - y + 0.5,
        grad: |_, _| (2.0, -1.0),
        hess: |_, _| (0.0, 0.0, 0.0),
        center: (0.3, -0.2),
    },
    TestFn2 { name: "exp", u: |x, _| x.exp(), grad: |x, _| (x.exp(), 0.0), hess: |x, _| (x.exp(), 0.0, 0.0), center: (0.0, 0.0) },
];

pub fn test_fn_1d(name: &str) -> Result<&'static TestFn1> {
    TEST_FNS_1D.iter().find(|f| f.name == name).ok_or_else(|| Error::UnknownName(name.to_string()))
}

pub fn test_fn_2d(name: &str) -> Result<&'static TestFn2> {
    TEST_FNS_2D.iter().find(|f| f.name == name).ok_or_else(|| Error::UnknownName(name.to_string()))
}
