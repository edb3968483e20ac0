use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use super::instance::{constraints_value, location_value, points_value, scalar_value, scalars_value};
use super::{Instance, InstanceFile, IoError};
use crate::curve::{curvature, ddc, energy_graph, green, solve_poisson, GraphFunction, GraphMeasure, MetricGraph};
use crate::scalar::{parse_scalar, Point, Scalar};
use crate::solver::{normalize, solve, SolverError};
use crate::toric::{energy, energy_legendre, envelope, AtomicMeasure, NewtonPolytope, ToricPsh};

pub const FORMAT_VERSION: u64 = 1;

/// SHA-256 of the compact canonical rendering of an instance.
pub fn instance_hash(inst: &InstanceFile) -> String {
    let text = serde_json::to_string(&inst.to_value()).expect("plain JSON values");
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultFile {
    pub format_version: u64,
    pub instance_hash: String,
    pub command: String,
    pub kind: String,
    pub mode: String,
    /// Seconds since the Unix epoch; omitted for reproducible output.
    pub timestamp: Option<u64>,
    pub solution: Value,
}

impl ResultFile {
    fn new(inst: &InstanceFile, command: &str, solution: Value) -> Self {
        ResultFile {
            format_version: FORMAT_VERSION,
            instance_hash: instance_hash(inst),
            command: command.to_string(),
            kind: inst.instance.kind().to_string(),
            mode: inst.mode.as_str().to_string(),
            timestamp: None,
            solution,
        }
    }

    pub fn to_value(&self) -> Value {
        let mut m = Map::new();
        m.insert("format_version".into(), json!(self.format_version));
        m.insert("instance_hash".into(), json!(self.instance_hash));
        m.insert("command".into(), json!(self.command));
        m.insert("kind".into(), json!(self.kind));
        m.insert("mode".into(), json!(self.mode));
        if let Some(t) = self.timestamp {
            m.insert("timestamp".into(), json!(t));
        }
        m.insert("solution".into(), self.solution.clone());
        Value::Object(m)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("plain JSON values");
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<ResultFile, IoError> {
        let v: Value = serde_json::from_str(text).map_err(|e| IoError::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        let o = v.as_object().ok_or_else(|| invalid("$", "expected an object"))?;
        for k in o.keys() {
            if !["format_version", "instance_hash", "command", "kind", "mode", "timestamp", "solution"].contains(&k.as_str()) {
                return Err(invalid(k, "unknown field"));
            }
        }
        let text_field = |k: &str| -> Result<String, IoError> {
            o.get(k)
                .and_then(|x| x.as_str())
                .map(str::to_string)
                .ok_or_else(|| invalid(k, "missing or not a string"))
        };
        let format_version = o
            .get("format_version")
            .and_then(|x| x.as_u64())
            .ok_or_else(|| invalid("format_version", "missing or not an integer"))?;
        if format_version != FORMAT_VERSION {
            return Err(invalid("format_version", format!("unsupported version {format_version}")));
        }
        let timestamp = match o.get("timestamp") {
            None => None,
            Some(t) => Some(t.as_u64().ok_or_else(|| invalid("timestamp", "not an integer"))?),
        };
        Ok(ResultFile {
            format_version,
            instance_hash: text_field("instance_hash")?,
            command: text_field("command")?,
            kind: text_field("kind")?,
            mode: text_field("mode")?,
            timestamp,
            solution: o.get("solution").cloned().ok_or_else(|| invalid("solution", "missing field"))?,
        })
    }
}

fn invalid(field: &str, message: impl Into<String>) -> IoError {
    IoError::Validation {
        field: field.to_string(),
        message: message.into(),
    }
}

fn wrong_kind(command: &str, inst: &InstanceFile) -> IoError {
    invalid("kind", format!("`{command}` does not accept {} instances", inst.instance.kind()))
}

pub fn atoms_value(mu: &AtomicMeasure) -> Value {
    Value::Array(
        mu.atoms()
            .iter()
            .map(|(p, w)| json!({"point": scalars_value(p), "weight": scalar_value(w)}))
            .collect(),
    )
}

fn potential_value(f: &ToricPsh) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("polytope".into(), points_value(f.delta().vertices()));
    m.insert("generators".into(), constraints_value(f.generators()));
    m.insert(
        "pieces".into(),
        Value::Array(
            f.to_pieces()
                .iter()
                .map(|(s, c)| json!({"slope": scalars_value(s), "intercept": scalar_value(c)}))
                .collect(),
        ),
    );
    m.insert("atoms".into(), atoms_value(&f.ma_measure()));
    m
}

fn function_value(g: &MetricGraph, f: &GraphFunction) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("values".into(), scalars_value(&f.values));
    m.insert(
        "breakpoints".into(),
        Value::Array(
            (0..g.edges().len())
                .map(|e| {
                    Value::Array(
                        f.breakpoints[e]
                            .iter()
                            .map(|(p, v)| json!({"position": scalar_value(p), "value": scalar_value(v)}))
                            .collect(),
                    )
                })
                .collect(),
        ),
    );
    m
}

fn graph_measure_value(mu: &GraphMeasure) -> Value {
    Value::Array(
        mu.atoms()
            .map(|(l, w)| {
                let mut m = location_value(l);
                m.insert("weight".into(), scalar_value(w));
                Value::Object(m)
            })
            .collect(),
    )
}

fn reference_of(delta: &NewtonPolytope, reference: &Option<Vec<(Point, Scalar)>>) -> Result<ToricPsh, IoError> {
    match reference {
        None => Ok(ToricPsh::support_function(delta)),
        Some(r) => envelope(delta, r).map_err(|e| invalid("reference", e.to_string())),
    }
}

/// Result of `solve`, and whether the solver converged.
pub fn solve_result(inst: &InstanceFile) -> Result<(ResultFile, bool), IoError> {
    let Instance::ToricDirac { problem, .. } = &inst.instance else {
        return Err(wrong_kind("solve", inst));
    };
    let cfg = inst.solver_config();
    let (sol, converged) = match solve(problem, &cfg) {
        Ok(s) => (s, true),
        Err(SolverError::NotConverged(s)) => (*s, false),
        Err(e) => return Err(invalid("sites", e.to_string())),
    };
    let sol = normalize(&sol);
    let e = energy(&sol.potential, &problem.reference()).map_err(|e| invalid("polytope", e.to_string()))?;
    let mut m = potential_value(&sol.potential);
    m.insert("t".into(), scalars_value(&sol.t));
    m.insert("residual".into(), scalar_value(&sol.residual));
    m.insert("iterations".into(), json!(sol.iterations));
    m.insert("objective".into(), scalar_value(&sol.objective));
    m.insert("energy".into(), scalar_value(&e));
    m.insert("converged".into(), json!(converged));
    Ok((ResultFile::new(inst, "solve", Value::Object(m)), converged))
}

pub fn envelope_result(inst: &InstanceFile) -> Result<ResultFile, IoError> {
    let Instance::ToricEnvelope {
        delta,
        constraints,
        reference,
    } = &inst.instance
    else {
        return Err(wrong_kind("envelope", inst));
    };
    let f = envelope(delta, constraints).map_err(|e| invalid("constraints", e.to_string()))?;
    let r = reference_of(delta, reference)?;
    let e = energy(&f, &r).map_err(|e| invalid("reference", e.to_string()))?;
    let mut m = potential_value(&f);
    m.insert("energy".into(), scalar_value(&e));
    Ok(ResultFile::new(inst, "envelope", Value::Object(m)))
}

pub fn energy_result(inst: &InstanceFile) -> Result<ResultFile, IoError> {
    let mut m = Map::new();
    match &inst.instance {
        Instance::ToricEnvelope {
            delta,
            constraints,
            reference,
        } => {
            let f = envelope(delta, constraints).map_err(|e| invalid("constraints", e.to_string()))?;
            let r = reference_of(delta, reference)?;
            let e = energy(&f, &r).map_err(|e| invalid("reference", e.to_string()))?;
            let l = energy_legendre(&f, &r).map_err(|e| invalid("reference", e.to_string()))?;
            m.insert("energy".into(), scalar_value(&e));
            m.insert("energy_legendre".into(), scalar_value(&l));
        }
        Instance::CurvePoisson { graph, omega, mu } => {
            let phi = solve_poisson(graph, omega, mu).map_err(|e| invalid("mu", e.to_string()))?;
            let e = energy_graph(graph, &phi, omega).map_err(|e| invalid("omega", e.to_string()))?;
            let f = &e - mu.integrate(graph, &phi);
            m.insert("energy".into(), scalar_value(&e));
            m.insert("functional".into(), scalar_value(&f));
        }
        _ => return Err(wrong_kind("energy", inst)),
    }
    Ok(ResultFile::new(inst, "energy", Value::Object(m)))
}

pub fn green_result(inst: &InstanceFile) -> Result<ResultFile, IoError> {
    let Instance::CurveGreen { graph, x, y } = &inst.instance else {
        return Err(wrong_kind("green", inst));
    };
    let g = green(graph, *x, *y).map_err(|e| invalid("y", e.to_string()))?;
    let mut m = function_value(graph, &g);
    m.insert("ddc".into(), graph_measure_value(&ddc(graph, &g).expect("valid function")));
    Ok(ResultFile::new(inst, "green", Value::Object(m)))
}

pub fn poisson_result(inst: &InstanceFile) -> Result<ResultFile, IoError> {
    let Instance::CurvePoisson { graph, omega, mu } = &inst.instance else {
        return Err(wrong_kind("poisson", inst));
    };
    let phi = solve_poisson(graph, omega, mu).map_err(|e| invalid("mu", e.to_string()))?;
    let curv = curvature(graph, &phi, omega).map_err(|e| invalid("omega", e.to_string()))?;
    let e = energy_graph(graph, &phi, omega).map_err(|e| invalid("omega", e.to_string()))?;
    let mut m = function_value(graph, &phi);
    m.insert("curvature".into(), graph_measure_value(&curv));
    m.insert("energy".into(), scalar_value(&e));
    Ok(ResultFile::new(inst, "poisson", Value::Object(m)))
}

/// Runs the command that produced `result` again and compares. For
/// `solve`, the residual is recomputed from the stored `t` alone.
pub fn verify_result(inst: &InstanceFile, result: &ResultFile) -> Result<(), IoError> {
    if result.instance_hash != instance_hash(inst) {
        return Err(invalid("instance_hash", "does not match the instance"));
    }
    if result.command == "solve" {
        let Instance::ToricDirac { problem, .. } = &inst.instance else {
            return Err(wrong_kind("solve", inst));
        };
        let t = scalar_list(&result.solution, "t")?;
        let stored = scalar_field(&result.solution, "residual")?;
        let f = problem.potential(&t).map_err(|e| invalid("solution.t", e.to_string()))?;
        let ma = f.ma_measure();
        let residual = problem
            .sites()
            .iter()
            .zip(problem.weights())
            .map(|(x, w)| num_traits::Signed::abs(&(ma.weight_at(x) - w)))
            .max()
            .expect("at least one site");
        if residual != stored {
            return Err(invalid("solution.residual", "differs from the recomputed residual"));
        }
        return Ok(());
    }
    let again = match result.command.as_str() {
        "envelope" => envelope_result(inst)?,
        "energy" => energy_result(inst)?,
        "green" => green_result(inst)?,
        "poisson" => poisson_result(inst)?,
        other => return Err(invalid("command", format!("unknown command {other:?}"))),
    };
    if again.solution != result.solution {
        return Err(invalid("solution", "differs from a fresh computation"));
    }
    Ok(())
}

pub(crate) fn scalar_field(v: &Value, key: &str) -> Result<Scalar, IoError> {
    let field = format!("solution.{key}");
    let s = v
        .get(key)
        .and_then(|x| x.as_str())
        .ok_or_else(|| invalid(&field, "missing or not a string"))?;
    parse_scalar(s).map_err(|e| invalid(&field, e.to_string()))
}

pub(crate) fn scalar_list(v: &Value, key: &str) -> Result<Vec<Scalar>, IoError> {
    let field = format!("solution.{key}");
    let items = v
        .get(key)
        .and_then(|x| x.as_array())
        .ok_or_else(|| invalid(&field, "missing or not an array"))?;
    items
        .iter()
        .map(|x| {
            x.as_str()
                .ok_or_else(|| invalid(&field, "expected strings"))
                .and_then(|s| parse_scalar(s).map_err(|e| invalid(&field, e.to_string())))
        })
        .collect()
}
