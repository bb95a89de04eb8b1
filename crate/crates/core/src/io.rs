//! File formats: graph JSON, field CSV, run manifests.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphBuilder, VertexField};
use crate::solvers::SolveReport;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexRecord {
    pub id: String,
    pub boundary: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub from: String,
    pub to: String,
    pub w: f64,
}

/// On-disk graph. With `undirected = true` every edge is loaded in both
/// directions with the same weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<EdgeRecord>,
    #[serde(default)]
    pub undirected: bool,
}

/// A graph together with its boundary data (`g = 0` where none is given).
#[derive(Clone, Debug)]
pub struct LoadedGraph {
    pub graph: Graph,
    pub g: VertexField,
}

impl GraphFile {
    pub fn from_graph(graph: &Graph, g: Option<&VertexField>) -> Self {
        let vertices = (0..graph.len())
            .map(|x| VertexRecord {
                id: graph.id(x).to_string(),
                boundary: graph.is_boundary(x),
                g: g.filter(|_| graph.is_boundary(x)).map(|g| g[x]),
            })
            .collect();
        let edges = (0..graph.len())
            .flat_map(|x| {
                graph.neighbors(x).iter().map(move |e| EdgeRecord {
                    from: graph.id(x).to_string(),
                    to: graph.id(e.to).to_string(),
                    w: e.weight,
                })
            })
            .collect();
        Self { vertices, edges, undirected: false }
    }

    pub fn load(&self) -> Result<LoadedGraph> {
        let mut b = GraphBuilder::new();
        for v in &self.vertices {
            b.vertex(v.id.clone(), v.boundary);
        }
        for e in &self.edges {
            if self.undirected {
                b.undirected_edge(e.from.clone(), e.to.clone(), e.w);
            } else {
                b.edge(e.from.clone(), e.to.clone(), e.w);
            }
        }
        let graph = b.build()?;
        let mut g = VertexField::constant(&graph, 0.0);
        for v in &self.vertices {
            if let Some(value) = v.g {
                if !value.is_finite() {
                    return Err(Error::NonFiniteValue(v.id.clone()));
                }
                g[graph.index_of(&v.id)?] = value;
            }
        }
        Ok(LoadedGraph { graph, g })
    }
}

fn parse_error(context: &str, e: serde_json::Error) -> Error {
    Error::Parse { context: context.to_string(), message: e.to_string() }
}

pub fn graph_from_json(text: &str) -> Result<LoadedGraph> {
    let file: GraphFile = serde_json::from_str(text).map_err(|e| parse_error("graph JSON", e))?;
    file.load()
}

pub fn graph_to_json(graph: &Graph, g: Option<&VertexField>) -> String {
    serde_json::to_string_pretty(&GraphFile::from_graph(graph, g)).expect("graph serializes")
}

pub fn read_graph(path: &Path) -> Result<LoadedGraph> {
    let text = fs::read_to_string(path)?;
    let file: GraphFile = serde_json::from_str(&text).map_err(|e| parse_error(&path.display().to_string(), e))?;
    file.load()
}

pub fn write_graph(path: &Path, graph: &Graph, g: Option<&VertexField>) -> Result<()> {
    fs::write(path, graph_to_json(graph, g) + "\n")?;
    Ok(())
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_field<W: Write>(out: W, graph: &Graph, field: &VertexField) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["vertex", "value"])?;
    for x in 0..graph.len() {
        w.write_record([graph.id(x), &fmt_f64(field[x])])?;
    }
    w.flush()?;
    Ok(())
}

pub fn field_to_csv(graph: &Graph, field: &VertexField) -> String {
    let mut buf = Vec::new();
    write_field(&mut buf, graph, field).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}

/// Reads a `vertex,value` table; every vertex must appear exactly once.
pub fn read_field<R: Read>(input: R, graph: &Graph, context: &str) -> Result<VertexField> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "vertex" || &headers[1] != "value" {
        return Err(Error::Parse { context: context.into(), message: "expected header `vertex,value`".into() });
    }
    let mut values: Vec<Option<f64>> = vec![None; graph.len()];
    for record in r.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let at = |message: String| Error::Parse { context: format!("{context}:{line}"), message };
        let x = graph.index_of(&record[0]).map_err(|e| at(e.to_string()))?;
        let v: f64 = record[1].trim().parse().map_err(|e| at(format!("bad value `{}`: {e}", &record[1])))?;
        if values[x].replace(v).is_some() {
            return Err(at(format!("vertex `{}` listed twice", &record[0])));
        }
    }
    let missing: Vec<&str> = (0..graph.len()).filter(|&x| values[x].is_none()).map(|x| graph.id(x)).collect();
    if !missing.is_empty() {
        return Err(Error::Parse { context: context.into(), message: format!("missing vertices: {}", missing.join(", ")) });
    }
    VertexField::new(graph, values.into_iter().map(Option::unwrap).collect())
}

pub fn read_field_file(path: &Path, graph: &Graph) -> Result<VertexField> {
    read_field(fs::File::open(path)?, graph, &path.display().to_string())
}

pub fn write_field_file(path: &Path, graph: &Graph, field: &VertexField) -> Result<()> {
    write_field(fs::File::create(path)?, graph, field)
}

/// JSON form of a [`SolveReport`]; the solution itself goes to CSV.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportFile {
    pub status: crate::solvers::SolveStatus,
    pub residual_inf_norm: f64,
    pub iterations: usize,
    pub solution: BTreeMap<String, f64>,
    pub residual_history: Vec<crate::solvers::HistoryEntry>,
}

impl ReportFile {
    pub fn new(graph: &Graph, report: &SolveReport) -> Self {
        Self {
            status: report.status,
            residual_inf_norm: report.residual_inf_norm,
            iterations: report.iterations,
            solution: (0..graph.len()).map(|x| (graph.id(x).to_string(), report.solution[x])).collect(),
            residual_history: report.residual_history.clone(),
        }
    }
}

pub fn history_to_csv(report: &SolveReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["iteration", "residual", "sup_norm"]).expect("in memory");
    for h in &report.residual_history {
        w.write_record([h.iteration.to_string(), fmt_f64(h.residual), fmt_f64(h.sup_norm)]).expect("in memory");
    }
    String::from_utf8(w.into_inner().expect("in memory")).expect("utf-8")
}

/// Everything needed to replay a CLI run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Full argument vector after the program name.
    pub args: Vec<String>,
    pub inputs: Vec<String>,
    pub config: BTreeMap<String, String>,
    pub seed: u64,
    pub version: String,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| parse_error(&path.display().to_string(), e))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}
