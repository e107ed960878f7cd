//! JSON instance files and result exports.
//!
//! Instance files carry a `"type"` tag: `"metric"` with an upper-triangle
//! `"costs"` array, or `"graph"` with an `"edges"` list. A prize-collecting
//! file is either form plus `"prizes"` for the internal vertices. Floats are
//! written in shortest round-trip form, so reading back is bit-exact.

use std::fs;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::decompose::TreeCombination;
use crate::error::{Error, Result};
use crate::instance::{metric_closure, EdgeVector, Edge, GraphicalInstance, Instance};
use crate::lp::HkSolution;
use crate::narrow::{CertificateReport, DominatorCertificate};
use crate::prize::{PcInstance, PcReport};

#[derive(Clone, Debug, PartialEq)]
pub enum InstanceFile {
    Metric(Instance),
    Graph(GraphicalInstance),
}

impl InstanceFile {
    /// The metric instance, taking the shortest-path closure of a graph.
    pub fn to_metric(&self) -> Result<Instance> {
        match self {
            InstanceFile::Metric(inst) => Ok(inst.clone()),
            InstanceFile::Graph(g) => metric_closure(g),
        }
    }
}

fn field<'a>(obj: &'a Map<String, Value>, name: &str) -> Result<&'a Value> {
    obj.get(name).ok_or_else(|| Error::Parse(format!("missing field \"{name}\"")))
}

fn uint(obj: &Map<String, Value>, name: &str) -> Result<usize> {
    field(obj, name)?
        .as_u64()
        .map(|v| v as usize)
        .ok_or_else(|| Error::Parse(format!("field \"{name}\" must be a nonnegative integer")))
}

fn floats(obj: &Map<String, Value>, name: &str) -> Result<Vec<f64>> {
    let arr = field(obj, name)?.as_array().ok_or_else(|| Error::Parse(format!("field \"{name}\" must be an array")))?;
    arr.iter()
        .enumerate()
        .map(|(i, v)| v.as_f64().ok_or_else(|| Error::Parse(format!("\"{name}\"[{i}] must be a number"))))
        .collect()
}

fn pairs(obj: &Map<String, Value>, name: &str) -> Result<Vec<Edge>> {
    let arr = field(obj, name)?.as_array().ok_or_else(|| Error::Parse(format!("field \"{name}\" must be an array")))?;
    arr.iter()
        .enumerate()
        .map(|(i, v)| match v.as_array().map(Vec::as_slice) {
            Some([a, b]) => match (a.as_u64(), b.as_u64()) {
                (Some(a), Some(b)) => Ok((a as usize, b as usize)),
                _ => Err(Error::Parse(format!("\"{name}\"[{i}] must hold two vertex indices"))),
            },
            _ => Err(Error::Parse(format!("\"{name}\"[{i}] must be a pair [u, v]"))),
        })
        .collect()
}

fn object(text: &str) -> Result<Map<String, Value>> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("line {} column {}: {e}", e.line(), e.column())))?;
    match value {
        Value::Object(map) => Ok(map),
        _ => Err(Error::Parse("top level must be a JSON object".into())),
    }
}

fn from_object(obj: &Map<String, Value>) -> Result<InstanceFile> {
    let kind = field(obj, "type")?.as_str().ok_or_else(|| Error::Parse("field \"type\" must be a string".into()))?;
    let n = uint(obj, "n")?;
    let s = uint(obj, "s")?;
    let t = uint(obj, "t")?;
    match kind {
        "metric" => Ok(InstanceFile::Metric(Instance::from_upper_triangle(n, s, t, &floats(obj, "costs")?)?)),
        "graph" => {
            let g = GraphicalInstance::new(n, s, t, &pairs(obj, "edges")?)?;
            if !g.is_connected() {
                return Err(Error::NotConnected);
            }
            Ok(InstanceFile::Graph(g))
        }
        other => Err(Error::Parse(format!("unknown instance type \"{other}\" (expected \"metric\" or \"graph\")"))),
    }
}

pub fn parse_instance_file(text: &str) -> Result<InstanceFile> {
    from_object(&object(text)?)
}

pub fn read_instance_file(path: impl AsRef<Path>) -> Result<InstanceFile> {
    parse_instance_file(&fs::read_to_string(path)?)
}

/// Reads either instance form as a metric instance.
pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance> {
    read_instance_file(path)?.to_metric()
}

pub fn read_graph(path: impl AsRef<Path>) -> Result<GraphicalInstance> {
    match read_instance_file(path)? {
        InstanceFile::Graph(g) => Ok(g),
        InstanceFile::Metric(_) => Err(Error::Parse("expected an instance of type \"graph\"".into())),
    }
}

pub fn instance_json(inst: &Instance) -> Value {
    json!({"type": "metric", "n": inst.n(), "s": inst.s(), "t": inst.t(), "costs": inst.upper_triangle()})
}

pub fn graph_json(g: &GraphicalInstance) -> Value {
    let edges: Vec<[usize; 2]> = g.edges().iter().map(|&(u, v)| [u, v]).collect();
    json!({"type": "graph", "n": g.n(), "s": g.s(), "t": g.t(), "edges": edges})
}

pub fn instance_file_json(file: &InstanceFile) -> Value {
    match file {
        InstanceFile::Metric(inst) => instance_json(inst),
        InstanceFile::Graph(g) => graph_json(g),
    }
}

fn write_json(value: &Value, path: impl AsRef<Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn write_instance(inst: &Instance, path: impl AsRef<Path>) -> Result<()> {
    write_json(&instance_json(inst), path)
}

pub fn write_graph(g: &GraphicalInstance, path: impl AsRef<Path>) -> Result<()> {
    write_json(&graph_json(g), path)
}

pub fn parse_pc_instance(text: &str) -> Result<PcInstance> {
    let obj = object(text)?;
    let inst = from_object(&obj)?.to_metric()?;
    PcInstance::new(inst, &floats(&obj, "prizes")?)
}

pub fn read_pc_instance(path: impl AsRef<Path>) -> Result<PcInstance> {
    parse_pc_instance(&fs::read_to_string(path)?)
}

pub fn pc_instance_json(pc: &PcInstance) -> Value {
    let mut value = instance_json(pc.instance());
    value["prizes"] = json!(pc.internal_prizes());
    value
}

pub fn write_pc_instance(pc: &PcInstance, path: impl AsRef<Path>) -> Result<()> {
    write_json(&pc_instance_json(pc), path)
}

/// `{"edges": [[u, v, value], ...]}` over nonzero entries.
pub fn edge_vector_json(x: &EdgeVector) -> Value {
    json!({ "edges": x })
}

pub fn hk_json(hk: &HkSolution) -> Value {
    json!({"value": hk.value, "x": hk.x, "iterations": hk.iterations})
}

pub fn combination_json(combo: &TreeCombination) -> Value {
    let trees: Vec<Vec<[usize; 2]>> =
        combo.trees.iter().map(|tree| tree.iter().map(|&(u, v)| [u, v]).collect()).collect();
    json!({"lambdas": combo.lambdas, "trees": trees, "residual": combo.residual})
}

pub fn certificate_json(cert: &DominatorCertificate, report: &CertificateReport) -> Value {
    json!({
        "variant": cert.variant.name(),
        "alpha": cert.alpha,
        "beta": cert.beta,
        "tau": cert.tau,
        "y": cert.y,
        "feasible": report.feasible,
        "worst_cut": report.worst_cut,
        "cost": report.cost,
    })
}

pub fn pc_result_json(report: &PcReport) -> Value {
    json!({
        "order": report.order,
        "path_cost": report.path_cost,
        "missed_prize": report.missed_prize,
        "objective": report.objective,
        "lp_value": report.lp_value,
        "expectation": report.expectation,
    })
}
