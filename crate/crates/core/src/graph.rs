//! Weighted directed graphs with a Dirichlet boundary.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// An out-edge `x -> to` with weight `w_{x,to} > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub to: usize,
    pub weight: f64,
}

impl Edge {
    /// Directed distance `1 / w`.
    pub fn length(&self) -> f64 {
        1.0 / self.weight
    }
}

/// A violated structural assumption found by [`GraphBuilder::validate`].
#[derive(Clone, Debug, PartialEq)]
pub enum GraphIssue {
    EmptyBoundary,
    NonpositiveWeight { from: String, to: String, weight: f64 },
    NonFiniteWeight { from: String, to: String },
    SelfLoop(String),
    DuplicateEdge { from: String, to: String },
    IsolatedInterior(String),
    DuplicateVertex(String),
    UnknownVertex(String),
}

impl fmt::Display for GraphIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphIssue::EmptyBoundary => write!(f, "empty boundary"),
            GraphIssue::NonpositiveWeight { from, to, weight } => {
                write!(f, "nonpositive weight {weight} on edge {from} -> {to}")
            }
            GraphIssue::NonFiniteWeight { from, to } => {
                write!(f, "non-finite weight on edge {from} -> {to}")
            }
            GraphIssue::SelfLoop(v) => write!(f, "self-loop at {v}"),
            GraphIssue::DuplicateEdge { from, to } => write!(f, "duplicate edge {from} -> {to}"),
            GraphIssue::IsolatedInterior(v) => write!(f, "isolated interior vertex {v}"),
            GraphIssue::DuplicateVertex(v) => write!(f, "duplicate vertex id {v}"),
            GraphIssue::UnknownVertex(v) => write!(f, "edge references unknown vertex {v}"),
        }
    }
}

/// Collects vertices and edges; [`GraphBuilder::build`] validates and freezes them.
#[derive(Clone, Debug, Default)]
pub struct GraphBuilder {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    boundary: Vec<bool>,
    edges: Vec<(String, String, f64)>,
    duplicates: Vec<String>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a vertex. Ids keep insertion order; a repeated id is reported by `validate`.
    pub fn vertex(&mut self, id: impl Into<String>, boundary: bool) -> &mut Self {
        let id = id.into();
        if self.index.contains_key(&id) {
            self.duplicates.push(id);
        } else {
            self.index.insert(id.clone(), self.ids.len());
            self.ids.push(id);
            self.boundary.push(boundary);
        }
        self
    }

    pub fn edge(&mut self, from: impl Into<String>, to: impl Into<String>, weight: f64) -> &mut Self {
        self.edges.push((from.into(), to.into(), weight));
        self
    }

    /// Adds `from -> to` and `to -> from` with the same weight.
    pub fn undirected_edge(&mut self, a: impl Into<String>, b: impl Into<String>, weight: f64) -> &mut Self {
        let (a, b) = (a.into(), b.into());
        self.edges.push((a.clone(), b.clone(), weight));
        self.edges.push((b, a, weight));
        self
    }

    /// Every violated invariant, in a deterministic order.
    pub fn validate(&self) -> std::result::Result<(), Vec<GraphIssue>> {
        let mut issues: Vec<GraphIssue> =
            self.duplicates.iter().cloned().map(GraphIssue::DuplicateVertex).collect();
        if !self.boundary.iter().any(|&b| b) {
            issues.push(GraphIssue::EmptyBoundary);
        }
        let mut seen = HashSet::new();
        let mut degree = vec![0usize; self.ids.len()];
        for (from, to, w) in &self.edges {
            let (Some(&i), Some(&j)) = (self.index.get(from), self.index.get(to)) else {
                for name in [from, to] {
                    if !self.index.contains_key(name) {
                        issues.push(GraphIssue::UnknownVertex(name.clone()));
                    }
                }
                continue;
            };
            if i == j {
                issues.push(GraphIssue::SelfLoop(from.clone()));
                continue;
            }
            if !w.is_finite() {
                issues.push(GraphIssue::NonFiniteWeight { from: from.clone(), to: to.clone() });
            } else if *w <= 0.0 {
                issues.push(GraphIssue::NonpositiveWeight { from: from.clone(), to: to.clone(), weight: *w });
            }
            if !seen.insert((i, j)) {
                issues.push(GraphIssue::DuplicateEdge { from: from.clone(), to: to.clone() });
            }
            degree[i] += 1;
        }
        for (i, id) in self.ids.iter().enumerate() {
            if !self.boundary[i] && degree[i] == 0 {
                issues.push(GraphIssue::IsolatedInterior(id.clone()));
            }
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(issues)
        }
    }

    pub fn build(&self) -> Result<Graph> {
        self.validate().map_err(Error::InvalidGraph)?;
        let mut adjacency = vec![Vec::new(); self.ids.len()];
        for (from, to, w) in &self.edges {
            let i = self.index[from];
            adjacency[i].push(Edge { to: self.index[to], weight: *w });
        }
        Ok(Graph {
            ids: self.ids.clone(),
            index: self.index.clone(),
            boundary: self.boundary.clone(),
            adjacency,
        })
    }
}

/// Finite weighted directed graph with a nonempty boundary.
///
/// Immutable once built. Vertex indices follow insertion order and the
/// out-edges of each vertex are stored in its neighbor order.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    boundary: Vec<bool>,
    adjacency: Vec<Vec<Edge>>,
}

impl Graph {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn id(&self, x: usize) -> &str {
        &self.ids[x]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.index.get(id).copied().ok_or_else(|| Error::UnknownVertex(id.to_string()))
    }

    pub fn is_boundary(&self, x: usize) -> bool {
        self.boundary[x]
    }

    pub fn boundary(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&x| self.boundary[x])
    }

    pub fn interior(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&x| !self.boundary[x])
    }

    /// Out-edges of `x` in neighbor order.
    pub fn neighbors(&self, x: usize) -> &[Edge] {
        &self.adjacency[x]
    }

    pub fn degree(&self, x: usize) -> usize {
        self.adjacency[x].len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum()
    }

    pub fn weight(&self, x: usize, y: usize) -> Option<f64> {
        self.adjacency[x].iter().find(|e| e.to == y).map(|e| e.weight)
    }

    /// Errors with [`Error::BoundaryVertex`] unless `x` is interior.
    pub fn require_interior(&self, x: usize) -> Result<()> {
        if self.boundary[x] {
            Err(Error::BoundaryVertex(self.ids[x].clone()))
        } else {
            Ok(())
        }
    }

    /// `d(x, y) = 1 / w_xy` for a neighbor, `0` for `y == x`.
    pub fn directed_distance(&self, x: usize, y: usize) -> Result<f64> {
        if x == y {
            return Ok(0.0);
        }
        self.weight(x, y).map(|w| 1.0 / w).ok_or_else(|| Error::NotANeighbor {
            from: self.ids[x].clone(),
            to: self.ids[y].clone(),
        })
    }

    /// Shortest directed path length from `x` to `y`.
    pub fn path_distance(&self, x: usize, y: usize) -> Distance {
        self.distances_from(x)[y]
    }

    /// Single-source shortest path lengths along out-edges.
    pub fn distances_from(&self, source: usize) -> Vec<Distance> {
        let mut dist = vec![Distance::Infinite; self.len()];
        let mut heap = BinaryHeap::new();
        dist[source] = Distance::Finite(0.0);
        heap.push(HeapEntry { dist: 0.0, vertex: source });
        while let Some(HeapEntry { dist: d, vertex: v }) = heap.pop() {
            if Distance::Finite(d) > dist[v] {
                continue;
            }
            for e in &self.adjacency[v] {
                let nd = d + e.length();
                if Distance::Finite(nd) < dist[e.to] {
                    dist[e.to] = Distance::Finite(nd);
                    heap.push(HeapEntry { dist: nd, vertex: e.to });
                }
            }
        }
        dist
    }

    /// `min_{b in boundary} d(x, b)` for every vertex, by label setting from
    /// the boundary over reversed edges. Out-edges of boundary vertices are
    /// never used: a path ends at the first boundary vertex it reaches.
    pub fn distances_to_boundary(&self) -> Vec<Distance> {
        let mut reverse: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.len()];
        for x in self.interior() {
            for e in &self.adjacency[x] {
                reverse[e.to].push((x, e.length()));
            }
        }
        let mut dist = vec![Distance::Infinite; self.len()];
        let mut heap = BinaryHeap::new();
        for b in self.boundary() {
            dist[b] = Distance::Finite(0.0);
            heap.push(HeapEntry { dist: 0.0, vertex: b });
        }
        while let Some(HeapEntry { dist: d, vertex: v }) = heap.pop() {
            if Distance::Finite(d) > dist[v] {
                continue;
            }
            for &(x, len) in &reverse[v] {
                let nd = len + d;
                if Distance::Finite(nd) < dist[x] {
                    dist[x] = Distance::Finite(nd);
                    heap.push(HeapEntry { dist: nd, vertex: x });
                }
            }
        }
        dist
    }

    /// Whether every vertex reaches the boundary, with the stranded vertices otherwise.
    pub fn connected_to_boundary(&self) -> BoundaryReach {
        let stranded: Vec<usize> = self
            .distances_to_boundary()
            .iter()
            .enumerate()
            .filter(|(_, d)| d.is_infinite())
            .map(|(x, _)| x)
            .collect();
        BoundaryReach { connected: stranded.is_empty(), stranded }
    }

    /// Copy of the graph with the neighbor list of `x` reordered; `order[k]`
    /// is the old position of the new k-th neighbor.
    pub fn with_neighbor_order(&self, x: usize, order: &[usize]) -> Result<Graph> {
        let old = &self.adjacency[x];
        let mut sorted = order.to_vec();
        sorted.sort_unstable();
        if sorted != (0..old.len()).collect::<Vec<_>>() {
            return Err(Error::Parse {
                context: format!("neighbor order of {}", self.ids[x]),
                message: "not a permutation of the neighbor list".into(),
            });
        }
        let mut g = self.clone();
        g.adjacency[x] = order.iter().map(|&k| old[k]).collect();
        Ok(g)
    }

    /// Builder holding the same vertices and edges, for derived graphs.
    pub fn to_builder(&self) -> GraphBuilder {
        let mut b = GraphBuilder::new();
        for x in 0..self.len() {
            b.vertex(self.ids[x].clone(), self.boundary[x]);
        }
        for x in 0..self.len() {
            for e in &self.adjacency[x] {
                b.edge(self.ids[x].clone(), self.ids[e.to].clone(), e.weight);
            }
        }
        b
    }
}

/// Result of [`Graph::connected_to_boundary`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryReach {
    pub connected: bool,
    pub stranded: Vec<usize>,
}

/// A path length, with disconnection kept distinct from any float.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Distance {
    Finite(f64),
    Infinite,
}

impl Distance {
    pub fn is_infinite(self) -> bool {
        matches!(self, Distance::Infinite)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Distance::Finite(d) => Some(d),
            Distance::Infinite => None,
        }
    }
}

impl PartialOrd for Distance {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Distance::Finite(a), Distance::Finite(b)) => a.partial_cmp(b),
            (Distance::Finite(_), Distance::Infinite) => Some(Ordering::Less),
            (Distance::Infinite, Distance::Finite(_)) => Some(Ordering::Greater),
            (Distance::Infinite, Distance::Infinite) => Some(Ordering::Equal),
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Finite(d) => write!(f, "{d}"),
            Distance::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(PartialEq)]
struct HeapEntry {
    dist: f64,
    vertex: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    // min-heap on distance, ties by vertex index for determinism
    fn cmp(&self, other: &Self) -> Ordering {
        other.dist.total_cmp(&self.dist).then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// One finite real per vertex, indexed like the graph it belongs to.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexField(Vec<f64>);

impl VertexField {
    /// Wraps raw values after checking length and finiteness against `graph`.
    pub fn new(graph: &Graph, values: Vec<f64>) -> Result<Self> {
        if values.len() != graph.len() {
            return Err(Error::FieldLength { expected: graph.len(), found: values.len() });
        }
        if let Some(x) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue(graph.id(x).to_string()));
        }
        Ok(Self(values))
    }

    /// Wraps values without checks; callers guarantee the length.
    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn constant(graph: &Graph, value: f64) -> Self {
        Self(vec![value; graph.len()])
    }

    pub fn from_fn(graph: &Graph, f: impl FnMut(usize) -> f64) -> Self {
        Self((0..graph.len()).map(f).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn check_len(&self, graph: &Graph) -> Result<()> {
        if self.0.len() == graph.len() {
            Ok(())
        } else {
            Err(Error::FieldLength { expected: graph.len(), found: self.0.len() })
        }
    }

    /// `max |self - other|` over the given vertices.
    pub fn max_abs_diff(&self, other: &VertexField, over: impl Iterator<Item = usize>) -> f64 {
        over.map(|x| (self.0[x] - other.0[x]).abs()).fold(0.0, f64::max)
    }
}

impl Index<usize> for VertexField {
    type Output = f64;
    fn index(&self, x: usize) -> &f64 {
        &self.0[x]
    }
}

impl IndexMut<usize> for VertexField {
    fn index_mut(&mut self, x: usize) -> &mut f64 {
        &mut self.0[x]
    }
}

/// Geometric graph on `points` with neighbors `x ± v_j`.
///
/// The boundary is every point missing at least one of its `2l` neighbors;
/// edge weights are `1 / |v_j|`. Edges are added from every vertex, boundary
/// included, to whichever of `x ± v_j` exist. Directions must be nonzero and
/// linearly independent, and the result must have an interior vertex.
pub fn geometric_grid(vectors: &[Vec<f64>], points: &[Vec<f64>]) -> Result<Graph> {
    check_independent(vectors)?;
    stencil_graph(vectors, points)
}

/// Like [`geometric_grid`] but accepts linearly dependent direction sets,
/// as used by wide stencils.
pub fn stencil_graph(vectors: &[Vec<f64>], points: &[Vec<f64>]) -> Result<Graph> {
    let dim = vectors.first().map(Vec::len).unwrap_or(0);
    for (j, v) in vectors.iter().enumerate() {
        if v.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: v.len() });
        }
        if v.iter().all(|&c| c == 0.0) {
            return Err(Error::ZeroDirection(j));
        }
    }
    for p in points {
        if p.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: p.len() });
        }
    }
    let key = |p: &[f64]| -> Vec<i64> { p.iter().map(|c| (c * 1e9).round() as i64).collect() };
    let lookup: HashMap<Vec<i64>, usize> =
        points.iter().enumerate().map(|(i, p)| (key(p), i)).collect();
    let shifted = |p: &[f64], v: &[f64], sign: f64| -> Vec<f64> {
        p.iter().zip(v).map(|(a, b)| a + sign * b).collect()
    };

    let mut neighbors: Vec<Vec<(usize, f64)>> = vec![Vec::new(); points.len()];
    let mut full = vec![true; points.len()];
    for (i, p) in points.iter().enumerate() {
        for v in vectors {
            let w = 1.0 / v.iter().map(|c| c * c).sum::<f64>().sqrt();
            for sign in [1.0, -1.0] {
                match lookup.get(&key(&shifted(p, v, sign))) {
                    Some(&k) if k != i => neighbors[i].push((k, w)),
                    _ => full[i] = false,
                }
            }
        }
    }
    if !full.iter().any(|&f| f) {
        return Err(Error::NoInteriorVertex);
    }
    let ids: Vec<String> = points.iter().map(|p| point_id(p)).collect();
    let mut b = GraphBuilder::new();
    for (i, id) in ids.iter().enumerate() {
        b.vertex(id.clone(), !full[i]);
    }
    for (i, list) in neighbors.iter().enumerate() {
        for &(k, w) in list {
            b.edge(ids[i].clone(), ids[k].clone(), w);
        }
    }
    b.build()
}

/// Vertex id for a point, e.g. `(1,-0.5)`.
pub fn point_id(p: &[f64]) -> String {
    let parts: Vec<String> = p.iter().map(|c| format!("{}", c + 0.0)).collect();
    format!("({})", parts.join(","))
}

fn check_independent(vectors: &[Vec<f64>]) -> Result<()> {
    let Some(dim) = vectors.first().map(Vec::len) else {
        return Err(Error::DependentDirections);
    };
    for (j, v) in vectors.iter().enumerate() {
        if v.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: v.len() });
        }
        if v.iter().all(|&c| c == 0.0) {
            return Err(Error::ZeroDirection(j));
        }
    }
    if vectors.len() > dim {
        return Err(Error::DependentDirections);
    }
    // Gaussian elimination with partial pivoting on the rows.
    let mut rows: Vec<Vec<f64>> = vectors.to_vec();
    let scale = rows.iter().flatten().fold(0.0f64, |m, c| m.max(c.abs()));
    let mut rank = 0;
    for col in 0..dim {
        let Some(pivot) = (rank..rows.len())
            .max_by(|&a, &b| rows[a][col].abs().total_cmp(&rows[b][col].abs()))
        else {
            break;
        };
        if rows[pivot][col].abs() <= 1e-12 * scale {
            continue;
        }
        rows.swap(rank, pivot);
        for r in rank + 1..rows.len() {
            let factor = rows[r][col] / rows[rank][col];
            for c in col..dim {
                rows[r][c] -= factor * rows[rank][c];
            }
        }
        rank += 1;
    }
    if rank < vectors.len() {
        Err(Error::DependentDirections)
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_abc() -> Graph {
        let mut b = GraphBuilder::new();
        b.vertex("A", false).vertex("B", false).vertex("C", true);
        b.undirected_edge("A", "B", 1.0).undirected_edge("B", "C", 1.0);
        b.build().unwrap()
    }

    #[test]
    fn validate_accepts_path() {
        let mut b = GraphBuilder::new();
        b.vertex("A", false).vertex("B", false).vertex("C", true);
        b.undirected_edge("A", "B", 1.0).undirected_edge("B", "C", 1.0);
        assert_eq!(b.validate(), Ok(()));
    }

    #[test]
    fn validate_reports_empty_boundary() {
        let mut b = GraphBuilder::new();
        b.vertex("A", false).vertex("B", false).undirected_edge("A", "B", 1.0);
        let issues = b.validate().unwrap_err();
        assert_eq!(issues, vec![GraphIssue::EmptyBoundary]);
        assert_eq!(issues[0].to_string(), "empty boundary");
    }

    #[test]
    fn validate_reports_every_violation() {
        let mut b = GraphBuilder::new();
        b.vertex("A", false).vertex("B", true).vertex("C", false).vertex("A", true);
        b.edge("A", "B", 0.0).edge("A", "B", 1.0).edge("B", "B", 1.0).edge("A", "Z", 1.0);
        let issues = b.validate().unwrap_err();
        assert!(issues.contains(&GraphIssue::NonpositiveWeight {
            from: "A".into(),
            to: "B".into(),
            weight: 0.0
        }));
        assert!(issues[0].to_string().contains("duplicate vertex"));
        assert!(issues.iter().any(|i| i.to_string().starts_with("nonpositive weight")));
        assert!(issues.contains(&GraphIssue::DuplicateEdge { from: "A".into(), to: "B".into() }));
        assert!(issues.contains(&GraphIssue::SelfLoop("B".into())));
        assert!(issues.contains(&GraphIssue::IsolatedInterior("C".into())));
        assert!(issues.contains(&GraphIssue::UnknownVertex("Z".into())));
        assert!(b.build().is_err());
    }

    #[test]
    fn directed_distance_is_reciprocal_weight() {
        let mut b = GraphBuilder::new();
        b.vertex("x", false).vertex("y", true).vertex("z", true);
        b.edge("x", "y", 2.0).edge("x", "z", 1.0);
        let g = b.build().unwrap();
        assert_eq!(g.directed_distance(0, 1).unwrap(), 0.5);
        assert_eq!(g.directed_distance(0, 0).unwrap(), 0.0);
        assert_eq!(g.directed_distance(0, 2).unwrap(), 1.0);
        assert!(matches!(g.directed_distance(1, 0), Err(Error::NotANeighbor { .. })));
    }

    #[test]
    fn path_distance_examples() {
        let mut b = GraphBuilder::new();
        b.vertex("A", false).vertex("B", false).vertex("C", true);
        b.edge("A", "B", 1.0).edge("B", "C", 1.0);
        let g = b.build().unwrap();
        assert_eq!(g.path_distance(0, 2), Distance::Finite(2.0));
        assert_eq!(g.path_distance(2, 0), Distance::Infinite);

        let mut b = GraphBuilder::new();
        b.vertex("A", false).vertex("B", false).vertex("C", true);
        b.edge("A", "B", 1.0).edge("B", "C", 1.0).edge("A", "C", 0.4);
        let g = b.build().unwrap();
        assert_eq!(g.path_distance(0, 2), Distance::Finite(2.0));
    }

    #[test]
    fn connected_to_boundary_examples() {
        let g = path_abc();
        assert!(g.connected_to_boundary().connected);

        let mut b = GraphBuilder::new();
        b.vertex("A", false).vertex("B", true).vertex("P", false).vertex("Q", false);
        b.undirected_edge("A", "B", 1.0).undirected_edge("P", "Q", 1.0);
        let g = b.build().unwrap();
        let reach = g.connected_to_boundary();
        assert!(!reach.connected);
        assert_eq!(reach.stranded, vec![2, 3]);

        let mut b = GraphBuilder::new();
        b.vertex("x", false).vertex("b", true).edge("x", "b", 3.0);
        assert!(b.build().unwrap().connected_to_boundary().connected);
    }

    #[test]
    fn geometric_grid_lattice() {
        let pts: Vec<Vec<f64>> =
            (0..3).flat_map(|i| (0..3).map(move |j| vec![i as f64, j as f64])).collect();
        let g = geometric_grid(&[vec![1.0, 0.0], vec![0.0, 1.0]], &pts).unwrap();
        assert_eq!(g.interior().count(), 1);
        assert_eq!(g.boundary().count(), 8);
        let center = g.index_of("(1,1)").unwrap();
        assert!(!g.is_boundary(center));
        assert_eq!(g.degree(center), 4);
        assert!((0..g.len()).all(|x| g.neighbors(x).iter().all(|e| e.weight == 1.0)));
    }

    #[test]
    fn geometric_grid_scaled_line() {
        let pts = vec![vec![0.0], vec![2.0], vec![4.0]];
        let g = geometric_grid(&[vec![2.0]], &pts).unwrap();
        assert_eq!(g.boundary().map(|x| g.id(x).to_string()).collect::<Vec<_>>(), vec!["(0)", "(4)"]);
        assert_eq!(g.weight(1, 0), Some(0.5));
    }

    #[test]
    fn geometric_grid_errors() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0]];
        assert!(matches!(geometric_grid(&[vec![0.0, 0.0]], &pts), Err(Error::ZeroDirection(0))));
        assert!(matches!(
            geometric_grid(&[vec![1.0, 0.0], vec![2.0, 0.0]], &pts),
            Err(Error::DependentDirections)
        ));
        assert!(matches!(geometric_grid(&[vec![1.0, 0.0]], &pts), Err(Error::NoInteriorVertex)));
    }

    #[test]
    fn neighbor_reorder_rejects_non_permutation() {
        let g = path_abc();
        assert!(g.with_neighbor_order(1, &[1, 0]).is_ok());
        assert!(g.with_neighbor_order(1, &[0, 0]).is_err());
    }

    #[test]
    fn vertex_field_checks() {
        let g = path_abc();
        assert!(matches!(VertexField::new(&g, vec![1.0]), Err(Error::FieldLength { .. })));
        assert!(matches!(
            VertexField::new(&g, vec![1.0, f64::NAN, 0.0]),
            Err(Error::NonFiniteValue(v)) if v == "B"
        ));
    }
}
