//! Graph gradient, the elementary operators built from it, and declarative
//! operator specs.
//!
//! Every built-in operator is an instance of
//!
//! ```text
//! F(u)(x) = lap·Δu + median·Δ₁u + plus·‖∇u‖⁺ + minus·‖∇u‖⁻ − reaction·u(x) + offset
//! ```
//!
//! at interior vertices, with nonnegative per-vertex coefficients, and
//! `F(u)(x) = g(x) − u(x)` on the boundary.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexField};

/// `∇u(x)`: one weighted difference `w_xy (u(y) − u(x))` per neighbor, in neighbor order.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradient(Vec<f64>);

impl Gradient {
    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    pub fn max(&self) -> f64 {
        max_entry(&self.0)
    }

    pub fn min(&self) -> f64 {
        min_entry(&self.0)
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn median(&self) -> f64 {
        median(&self.0)
    }
}

pub fn gradient(graph: &Graph, u: &VertexField, x: usize) -> Result<Gradient> {
    graph.require_interior(x)?;
    u.check_len(graph)?;
    let mut out = Vec::with_capacity(graph.degree(x));
    gradient_into(graph, u.values(), x, &mut out);
    Ok(Gradient(out))
}

/// Unchecked gradient into a reusable buffer.
pub(crate) fn gradient_into(graph: &Graph, u: &[f64], x: usize, out: &mut Vec<f64>) {
    out.clear();
    let ux = u[x];
    out.extend(graph.neighbors(x).iter().map(|e| e.weight * (u[e.to] - ux)));
}

pub fn max_entry(p: &[f64]) -> f64 {
    p.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

pub fn min_entry(p: &[f64]) -> f64 {
    p.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Middle value; for an even count, the mean of the two middle values.
pub fn median(p: &[f64]) -> f64 {
    let mut s = p.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

/// Weighted graph Laplacian `1 · ∇u(x)`.
pub fn laplacian(graph: &Graph, u: &VertexField, x: usize) -> Result<f64> {
    Ok(gradient(graph, u, x)?.sum())
}

/// `‖∇u(x)‖⁺`, the largest gradient entry.
pub fn eikonal_plus(graph: &Graph, u: &VertexField, x: usize) -> Result<f64> {
    Ok(gradient(graph, u, x)?.max())
}

/// `‖∇u(x)‖⁻`, the smallest gradient entry.
pub fn eikonal_minus(graph: &Graph, u: &VertexField, x: usize) -> Result<f64> {
    Ok(gradient(graph, u, x)?.min())
}

pub fn inf_laplacian(graph: &Graph, u: &VertexField, x: usize) -> Result<f64> {
    let g = gradient(graph, u, x)?;
    Ok((g.max() + g.min()) / 2.0)
}

/// 1-Laplacian: median of the gradient entries.
pub fn one_laplacian(graph: &Graph, u: &VertexField, x: usize) -> Result<f64> {
    Ok(gradient(graph, u, x)?.median())
}

/// Coefficients of the canonical operator at one interior vertex.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Terms {
    pub lap: f64,
    pub median: f64,
    pub plus: f64,
    pub minus: f64,
    pub reaction: f64,
    pub offset: f64,
}

impl Terms {
    /// `f(x, r, p)` for value `r = u(x)` and gradient `p`.
    pub fn apply(&self, r: f64, p: &[f64]) -> f64 {
        self.homogeneous_part(p) + self.eikonal_part(p) - self.reaction * r + self.offset
    }

    /// `lap·Σp + median·med(p)`: the part checked against the declared envelope `w0`.
    pub fn homogeneous_part(&self, p: &[f64]) -> f64 {
        let mut f = 0.0;
        if self.lap != 0.0 {
            f += self.lap * p.iter().sum::<f64>();
        }
        if self.median != 0.0 {
            f += self.median * median(p);
        }
        f
    }

    pub fn eikonal_part(&self, p: &[f64]) -> f64 {
        let mut f = 0.0;
        if self.plus != 0.0 {
            f += self.plus * max_entry(p);
        }
        if self.minus != 0.0 {
            f += self.minus * min_entry(p);
        }
        f
    }

    /// Natural envelope of the homogeneous part at a vertex of degree `d`.
    pub fn natural_w0(&self, degree: usize) -> f64 {
        self.lap * degree as f64 + self.median
    }

    /// No gradient, reaction or value dependence at all.
    pub fn is_zero(&self) -> bool {
        self.lap == 0.0 && self.median == 0.0 && self.plus == 0.0 && self.minus == 0.0 && self.reaction == 0.0
    }
}

/// Operator family tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Laplacian,
    EikonalPlus,
    EikonalMinus,
    InfLaplacian,
    OneLaplacian,
    PHarmonious,
    NormalizedP,
    PositiveEikonal,
    /// `F(u) = g − u` at every vertex.
    Trivial,
    /// Nonnegative combination of Δ, Δ₁, ‖∇u‖⁺, ‖∇u‖⁻.
    Custom,
}

impl OperatorKind {
    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::Laplacian => "laplacian",
            OperatorKind::EikonalPlus => "eikonal_plus",
            OperatorKind::EikonalMinus => "eikonal_minus",
            OperatorKind::InfLaplacian => "inf_laplacian",
            OperatorKind::OneLaplacian => "one_laplacian",
            OperatorKind::PHarmonious => "p_harmonious",
            OperatorKind::NormalizedP => "normalized_p",
            OperatorKind::PositiveEikonal => "positive_eikonal",
            OperatorKind::Trivial => "trivial",
            OperatorKind::Custom => "custom",
        }
    }

    /// Parses either `snake_case` or the CLI's `kebab-case` spelling.
    pub fn parse(s: &str) -> Result<Self> {
        let norm = s.replace('-', "_");
        let all = [
            OperatorKind::Laplacian,
            OperatorKind::EikonalPlus,
            OperatorKind::EikonalMinus,
            OperatorKind::InfLaplacian,
            OperatorKind::OneLaplacian,
            OperatorKind::PHarmonious,
            OperatorKind::NormalizedP,
            OperatorKind::PositiveEikonal,
            OperatorKind::Trivial,
            OperatorKind::Custom,
        ];
        all.into_iter().find(|k| k.name() == norm).ok_or_else(|| Error::UnknownName(s.to_string()))
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A coefficient field: one constant or a per-vertex map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Constant(f64),
    PerVertex(BTreeMap<String, f64>),
}

impl From<f64> for Coefficient {
    fn from(c: f64) -> Self {
        Coefficient::Constant(c)
    }
}

impl Coefficient {
    fn at(&self, graph: &Graph, x: usize, name: &str) -> Result<f64> {
        let v = match self {
            Coefficient::Constant(c) => *c,
            Coefficient::PerVertex(m) => *m.get(graph.id(x)).ok_or_else(|| {
                Error::InvalidSpec(format!("`{name}` has no value for vertex `{}`", graph.id(x)))
            })?,
        };
        if !v.is_finite() {
            return Err(Error::InvalidSpec(format!("`{name}` is not finite at `{}`", graph.id(x))));
        }
        Ok(v)
    }

    fn check_ids(&self, graph: &Graph, name: &str) -> Result<()> {
        if let Coefficient::PerVertex(m) = self {
            for id in m.keys() {
                graph.index_of(id).map_err(|_| {
                    Error::InvalidSpec(format!("`{name}` names unknown vertex `{id}`"))
                })?;
            }
        }
        Ok(())
    }
}

/// The exponent of a normalized p-Laplacian, `1 ≤ p ≤ ∞`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Exponent {
    Finite(f64),
    /// Any of `"inf"`, `"infinity"`, `"∞"`.
    Named(InfinityName),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum InfinityName {
    #[serde(rename = "inf", alias = "infinity", alias = "∞")]
    Inf,
}

impl Exponent {
    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Named(_) => f64::INFINITY,
        }
    }

    pub fn from_value(p: f64) -> Self {
        if p.is_infinite() {
            Exponent::Named(InfinityName::Inf)
        } else {
            Exponent::Finite(p)
        }
    }
}

/// Declarative description of an operator, as read from JSON.
///
/// `lap`, `w1`, `wplus`, `wminus` are the coefficients of Δ, Δ₁, ‖∇u‖⁺ and
/// ‖∇u‖⁻. `w0` is the declared homogeneity envelope of the part
/// `lap·Δ + w1·Δ₁` (defaults to `lap·d(x) + w1`). `source` is the right-hand
/// side: the interior equation reads `operator = source`, except for
/// `trivial` where `F(u) = source − u`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    pub kind: OperatorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Exponent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lap: Option<Coefficient>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w0: Option<Coefficient>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w1: Option<Coefficient>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wplus: Option<Coefficient>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wminus: Option<Coefficient>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<Coefficient>,
}

impl OperatorSpec {
    pub fn new(kind: OperatorKind) -> Self {
        Self { kind, p: None, lap: None, w0: None, w1: None, wplus: None, wminus: None, source: None }
    }

    pub fn laplacian() -> Self {
        Self::new(OperatorKind::Laplacian)
    }

    pub fn eikonal_plus() -> Self {
        Self::new(OperatorKind::EikonalPlus)
    }

    pub fn eikonal_minus() -> Self {
        Self::new(OperatorKind::EikonalMinus)
    }

    pub fn inf_laplacian() -> Self {
        Self::new(OperatorKind::InfLaplacian)
    }

    pub fn one_laplacian() -> Self {
        Self::new(OperatorKind::OneLaplacian)
    }

    pub fn trivial() -> Self {
        Self::new(OperatorKind::Trivial)
    }

    pub fn normalized_p(p: f64) -> Self {
        Self { p: Some(Exponent::from_value(p)), ..Self::new(OperatorKind::NormalizedP) }
    }

    pub fn with_source(mut self, source: impl Into<Coefficient>) -> Self {
        self.source = Some(source.into());
        self
    }

    pub fn with_w0(mut self, w0: impl Into<Coefficient>) -> Self {
        self.w0 = Some(w0.into());
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serializes")
    }

    /// Resolves the coefficient fields on `graph`.
    pub fn bind(&self, graph: &Graph) -> Result<Operator> {
        Operator::bind(self, graph)
    }

    fn allowed_fields(&self) -> &'static [&'static str] {
        match self.kind {
            OperatorKind::Laplacian => &["lap", "w0", "source"],
            OperatorKind::EikonalPlus => &["wplus", "w0", "source"],
            OperatorKind::EikonalMinus => &["wminus", "w0", "source"],
            OperatorKind::InfLaplacian => &["wplus", "wminus", "w0", "source"],
            OperatorKind::OneLaplacian => &["w1", "w0", "source"],
            OperatorKind::PHarmonious | OperatorKind::Custom => {
                &["lap", "w1", "wplus", "wminus", "w0", "source"]
            }
            OperatorKind::NormalizedP => &["p", "w0", "source"],
            OperatorKind::PositiveEikonal => &["lap", "w1", "wplus", "w0", "source"],
            OperatorKind::Trivial => &["source"],
        }
    }

    fn present_fields(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.p.is_some() {
            out.push("p");
        }
        for (name, c) in [
            ("lap", &self.lap),
            ("w0", &self.w0),
            ("w1", &self.w1),
            ("wplus", &self.wplus),
            ("wminus", &self.wminus),
            ("source", &self.source),
        ] {
            if c.is_some() {
                out.push(name);
            }
        }
        out
    }
}

/// An [`OperatorSpec`] resolved on a particular graph.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    kind: OperatorKind,
    p: Option<f64>,
    terms: Vec<Terms>,
    w0: Vec<f64>,
}

impl Operator {
    pub fn bind(spec: &OperatorSpec, graph: &Graph) -> Result<Self> {
        let allowed = spec.allowed_fields();
        for field in spec.present_fields() {
            if !allowed.contains(&field) {
                return Err(Error::InvalidSpec(format!("`{field}` is not used by kind `{}`", spec.kind)));
            }
        }
        for (name, c) in [
            ("lap", &spec.lap),
            ("w0", &spec.w0),
            ("w1", &spec.w1),
            ("wplus", &spec.wplus),
            ("wminus", &spec.wminus),
            ("source", &spec.source),
        ] {
            if let Some(c) = c {
                c.check_ids(graph, name)?;
            }
        }

        let p = match spec.kind {
            OperatorKind::NormalizedP => {
                let p = spec
                    .p
                    .ok_or_else(|| Error::InvalidSpec("normalized_p requires `p`".into()))?
                    .value();
                if !(p >= 1.0) {
                    return Err(Error::InvalidSpec(format!("p must satisfy 1 <= p <= inf, got {p}")));
                }
                Some(p)
            }
            _ => None,
        };

        let mut terms = vec![Terms::default(); graph.len()];
        let mut w0 = vec![0.0; graph.len()];
        for x in graph.interior() {
            let get = |c: &Option<Coefficient>, name: &str, default: f64| -> Result<f64> {
                match c {
                    Some(c) => c.at(graph, x, name),
                    None => Ok(default),
                }
            };
            let source = get(&spec.source, "source", 0.0)?;
            let t = match spec.kind {
                OperatorKind::Laplacian => Terms { lap: get(&spec.lap, "lap", 1.0)?, offset: -source, ..Terms::default() },
                OperatorKind::EikonalPlus => Terms { plus: get(&spec.wplus, "wplus", 1.0)?, offset: -source, ..Terms::default() },
                OperatorKind::EikonalMinus => Terms { minus: get(&spec.wminus, "wminus", 1.0)?, offset: -source, ..Terms::default() },
                OperatorKind::InfLaplacian => Terms {
                    plus: get(&spec.wplus, "wplus", 0.5)?,
                    minus: get(&spec.wminus, "wminus", 0.5)?,
                    offset: -source,
                    ..Terms::default()
                },
                OperatorKind::OneLaplacian => Terms { median: get(&spec.w1, "w1", 1.0)?, offset: -source, ..Terms::default() },
                OperatorKind::PHarmonious | OperatorKind::Custom | OperatorKind::PositiveEikonal => Terms {
                    lap: get(&spec.lap, "lap", 0.0)?,
                    median: get(&spec.w1, "w1", 0.0)?,
                    plus: get(&spec.wplus, "wplus", 0.0)?,
                    minus: get(&spec.wminus, "wminus", 0.0)?,
                    offset: -source,
                    ..Terms::default()
                },
                OperatorKind::NormalizedP => {
                    let (median, side) = normalized_p_weights(p.expect("checked above"));
                    Terms { median, plus: side, minus: side, offset: -source, ..Terms::default() }
                }
                OperatorKind::Trivial => Terms { reaction: 1.0, offset: source, ..Terms::default() },
            };
            for (name, v) in [("lap", t.lap), ("w1", t.median), ("wplus", t.plus), ("wminus", t.minus)] {
                if v < 0.0 {
                    return Err(Error::InvalidSpec(format!("`{name}` must be nonnegative at `{}`", graph.id(x))));
                }
            }
            match spec.kind {
                OperatorKind::PHarmonious if t.plus <= 0.0 || t.minus <= 0.0 => {
                    return Err(Error::InvalidSpec(format!(
                        "p_harmonious needs wplus > 0 and wminus > 0 at `{}`",
                        graph.id(x)
                    )));
                }
                OperatorKind::PositiveEikonal if t.plus <= 0.0 || source <= 0.0 => {
                    return Err(Error::InvalidSpec(format!(
                        "positive_eikonal needs wplus > 0 and source > 0 at `{}`",
                        graph.id(x)
                    )));
                }
                _ => {}
            }
            let declared = get(&spec.w0, "w0", t.natural_w0(graph.degree(x)))?;
            if declared < 0.0 {
                return Err(Error::InvalidSpec(format!("`w0` must be nonnegative at `{}`", graph.id(x))));
            }
            terms[x] = t;
            w0[x] = declared;
        }
        Ok(Self { kind: spec.kind, p, terms, w0 })
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    /// The exponent for `normalized_p`.
    pub fn p(&self) -> Option<f64> {
        self.p
    }

    pub fn terms(&self, x: usize) -> &Terms {
        &self.terms[x]
    }

    /// Declared homogeneity envelope `w0(x)` of the homogeneous part.
    pub fn w0(&self, x: usize) -> f64 {
        self.w0[x]
    }

    /// Envelope of the whole gradient-dependent part: `w0 + plus + minus`.
    pub fn total_envelope(&self, x: usize) -> f64 {
        let t = &self.terms[x];
        self.w0[x] + t.plus + t.minus
    }

    /// True when the interior operator has no reaction or source term.
    pub fn is_source_free(&self, graph: &Graph) -> bool {
        graph.interior().all(|x| self.terms[x].reaction == 0.0 && self.terms[x].offset == 0.0)
    }

    /// Positive eikonal coefficient at every interior vertex, so the operator
    /// splits as `wplus·‖∇u‖⁺ + H` with `H` elliptic.
    pub fn has_active_eikonal_form(&self, graph: &Graph) -> bool {
        graph.interior().all(|x| self.terms[x].plus > 0.0)
    }

    /// `wplus > 0`, `wminus > 0`, no reaction term: the p-harmonious form.
    pub fn is_p_harmonious(&self, graph: &Graph) -> bool {
        graph.interior().all(|x| {
            let t = &self.terms[x];
            t.plus > 0.0 && t.minus > 0.0 && t.reaction == 0.0
        })
    }

    /// `f(x, r, p)` at an interior vertex.
    pub fn apply(&self, x: usize, r: f64, p: &[f64]) -> f64 {
        self.terms[x].apply(r, p)
    }

    pub(crate) fn check_graph(&self, graph: &Graph) -> Result<()> {
        if self.terms.len() != graph.len() {
            return Err(Error::InvalidSpec(format!(
                "operator bound to {} vertices, graph has {}",
                self.terms.len(),
                graph.len()
            )));
        }
        Ok(())
    }

    pub(crate) fn residual_at(&self, graph: &Graph, u: &[f64], x: usize, scratch: &mut Vec<f64>) -> f64 {
        gradient_into(graph, u, x, scratch);
        self.terms[x].apply(u[x], scratch)
    }

    /// The residual field `F(u)`; `u` solves the Dirichlet problem iff it is zero.
    pub fn evaluate(&self, graph: &Graph, u: &VertexField, g: &VertexField) -> Result<VertexField> {
        self.check_graph(graph)?;
        u.check_len(graph)?;
        g.check_len(graph)?;
        let mut scratch = Vec::new();
        let values = (0..graph.len())
            .map(|x| {
                if graph.is_boundary(x) {
                    g[x] - u[x]
                } else {
                    self.residual_at(graph, u.values(), x, &mut scratch)
                }
            })
            .collect();
        Ok(VertexField::from_raw(values))
    }

    /// `max |F(u)(x)|` over interior vertices.
    pub fn interior_residual(&self, graph: &Graph, u: &[f64]) -> f64 {
        let mut scratch = Vec::new();
        graph
            .interior()
            .map(|x| self.residual_at(graph, u, x, &mut scratch).abs())
            .fold(0.0, f64::max)
    }
}

/// `(w1, wplus = wminus)` for the normalized p-Laplacian: `1/p` and `1/(2q)`
/// with `1/p + 1/q = 1`.
pub fn normalized_p_weights(p: f64) -> (f64, f64) {
    if p.is_infinite() {
        return (0.0, 0.5);
    }
    let inv_p = 1.0 / p;
    let inv_q = 1.0 - inv_p;
    (inv_p, inv_q / 2.0)
}

/// Free-function form of [`Operator::evaluate`].
pub fn evaluate(op: &Operator, graph: &Graph, u: &VertexField, g: &VertexField) -> Result<VertexField> {
    op.evaluate(graph, u, g)
}

/// Outcome of [`homogeneity_check`].
#[derive(Clone, Debug, PartialEq)]
pub enum HomogeneityOutcome {
    Pass { trials: usize },
    Counterexample { vertex: usize, p: Vec<f64>, f: f64, w0: f64 },
}

/// Samples gradient vectors at each interior vertex and checks
/// `w0·min(p) ≤ f(p) ≤ w0·max(p)` for the homogeneous part `f = lap·Δ + w1·Δ₁`.
pub fn homogeneity_check(op: &Operator, graph: &Graph, trials: usize, seed: u64) -> Result<HomogeneityOutcome> {
    op.check_graph(graph)?;
    let interior: Vec<usize> = graph.interior().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        let x = interior[trial % interior.len()];
        let d = graph.degree(x);
        let p: Vec<f64> = if trial % 10 == 0 {
            vec![rng.gen_range(-10.0..=10.0); d]
        } else {
            (0..d).map(|_| rng.gen_range(-10.0..=10.0)).collect()
        };
        let f = op.terms[x].homogeneous_part(&p);
        let w0 = op.w0[x];
        let (lo, hi) = (w0 * min_entry(&p), w0 * max_entry(&p));
        let slack = 1e-12 * (1.0 + f.abs() + lo.abs() + hi.abs());
        if f < lo - slack || f > hi + slack {
            return Ok(HomogeneityOutcome::Counterexample { vertex: x, p, f, w0 });
        }
    }
    Ok(HomogeneityOutcome::Pass { trials })
}

/// Sampling parameters for [`classify_ellipticity`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassifyConfig {
    pub trials: usize,
    pub seed: u64,
    /// Components are drawn uniformly from `[-range, range]`.
    pub range: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self { trials: 10_000, seed: 0, range: 10.0 }
    }
}

/// A sample violating one of the structure conditions.
#[derive(Clone, Debug, PartialEq)]
pub struct EllipticityWitness {
    pub vertex: usize,
    pub r: f64,
    pub s: f64,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub f_rp: f64,
    pub f_sq: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    /// No sample violated the implication; `checked` samples met its hypothesis.
    NoViolation { checked: usize },
    Violated(EllipticityWitness),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::NoViolation { .. })
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::NoViolation { checked } => write!(f, "no violation found in {checked} trials"),
            Verdict::Violated(w) => write!(
                f,
                "violated (f(r={}, p) = {} vs f(s={}, q) = {})",
                w.r, w.f_rp, w.s, w.f_sq
            ),
        }
    }
}

/// Falsification report for the four monotonicity conditions.
#[derive(Clone, Debug, PartialEq)]
pub struct EllipticityReport {
    /// `r ≥ s, p ≤ q ⇒ f(r,p) ≤ f(s,q)`.
    pub elliptic: Verdict,
    /// `r > s, p ≤ q ⇒ f(r,p) < f(s,q)`.
    pub proper: Verdict,
    /// `r ≥ s, p < q ⇒ f(r,p) < f(s,q)`, with `<` strict in at least one component.
    pub uniformly_elliptic: Verdict,
    /// `r > s, p < q ⇒ f(r,p) < f(s,q)`.
    pub weak_combined: Verdict,
}

impl fmt::Display for EllipticityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "elliptic: {}", self.elliptic)?;
        writeln!(f, "proper: {}", self.proper)?;
        writeln!(f, "uniformly elliptic: {}", self.uniformly_elliptic)?;
        write!(f, "weak combined: {}", self.weak_combined)
    }
}

/// Randomized falsifier for the ellipticity conditions at every interior vertex.
///
/// Each trial draws `r, s, p, q` with `r = s` or `r > s`, and `q = p` or
/// `q = p + δ` with `δ ≥ 0` positive on a random nonempty subset of
/// components, so both equality and strict cases are exercised. Only the
/// gradient-dependent part and the reaction term enter; the constant source
/// cancels in every comparison.
pub fn classify_ellipticity(op: &Operator, graph: &Graph, cfg: ClassifyConfig) -> Result<EllipticityReport> {
    op.check_graph(graph)?;
    let interior: Vec<usize> = graph.interior().collect();
    if interior.is_empty() {
        return Err(Error::NoInteriorVertex);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let range = cfg.range;

    let mut counts = [0usize; 4];
    let mut witnesses: [Option<EllipticityWitness>; 4] = Default::default();

    for trial in 0..cfg.trials {
        let x = interior[trial % interior.len()];
        let d = graph.degree(x);
        let s = rng.gen_range(-range..=range);
        let r_equal = rng.gen_bool(0.5);
        let r = if r_equal { s } else { s + rng.gen_range(0.01..=range) };
        let p: Vec<f64> = (0..d).map(|_| rng.gen_range(-range..=range)).collect();
        let q_equal = rng.gen_bool(1.0 / 3.0);
        let q: Vec<f64> = if q_equal {
            p.clone()
        } else {
            let forced = rng.gen_range(0..d);
            p.iter()
                .enumerate()
                .map(|(i, &pi)| {
                    if i == forced || rng.gen_bool(0.5) {
                        pi + rng.gen_range(0.01..=range)
                    } else {
                        pi
                    }
                })
                .collect()
        };
        let f_rp = op.apply(x, r, &p);
        let f_sq = op.apply(x, s, &q);
        let witness = || EllipticityWitness { vertex: x, r, s, p: p.clone(), q: q.clone(), f_rp, f_sq };

        // p ≤ q always holds; p < q iff !q_equal; r ≥ s always; r > s iff !r_equal.
        let checks = [
            (true, f_rp <= f_sq),
            (!r_equal, f_rp < f_sq),
            (!q_equal, f_rp < f_sq),
            (!r_equal && !q_equal, f_rp < f_sq),
        ];
        for (k, (applies, ok)) in checks.into_iter().enumerate() {
            if !applies || witnesses[k].is_some() {
                continue;
            }
            counts[k] += 1;
            if !ok {
                witnesses[k] = Some(witness());
            }
        }
    }

    let verdict = |k: usize, w: &mut [Option<EllipticityWitness>; 4]| match w[k].take() {
        Some(w) => Verdict::Violated(w),
        None => Verdict::NoViolation { checked: counts[k] },
    };
    Ok(EllipticityReport {
        elliptic: verdict(0, &mut witnesses),
        proper: verdict(1, &mut witnesses),
        uniformly_elliptic: verdict(2, &mut witnesses),
        weak_combined: verdict(3, &mut witnesses),
    })
}
