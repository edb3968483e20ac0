use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};
use serde_json::{json, Map, Value};

use super::IoError;
use crate::curve::{Edge, GraphMeasure, Location, MetricGraph};
use crate::polyhedra::hull;
use crate::scalar::{format_scalar, from_f64, parse_scalar, Point, Scalar};
use crate::solver::{DiracProblem, Mode, SolverConfig};
use crate::toric::NewtonPolytope;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverBlock {
    pub tol: Option<Scalar>,
    pub max_iter: Option<usize>,
    pub damping: Option<Scalar>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instance {
    ToricDirac {
        problem: DiracProblem,
        solver: Option<SolverBlock>,
    },
    ToricEnvelope {
        delta: NewtonPolytope,
        constraints: Vec<(Point, Scalar)>,
        /// Generators of the reference potential; the support function of
        /// the polytope when absent.
        reference: Option<Vec<(Point, Scalar)>>,
    },
    CurvePoisson {
        graph: MetricGraph,
        omega: GraphMeasure,
        mu: GraphMeasure,
    },
    CurveGreen {
        graph: MetricGraph,
        x: usize,
        y: usize,
    },
}

impl Instance {
    pub fn kind(&self) -> &'static str {
        match self {
            Instance::ToricDirac { .. } => "toric-dirac",
            Instance::ToricEnvelope { .. } => "toric-envelope",
            Instance::CurvePoisson { .. } => "curve-poisson",
            Instance::CurveGreen { .. } => "curve-green",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceFile {
    pub mode: Mode,
    pub instance: Instance,
}

impl InstanceFile {
    pub fn new(mode: Mode, instance: Instance) -> Self {
        InstanceFile { mode, instance }
    }

    /// Solver settings: the defaults of the mode, overridden by the
    /// solver block.
    pub fn solver_config(&self) -> SolverConfig {
        let mut cfg = match self.mode {
            Mode::Rational => SolverConfig::rational(),
            Mode::Float => SolverConfig::float(),
        };
        if let Instance::ToricDirac { solver: Some(b), .. } = &self.instance {
            if let Some(t) = &b.tol {
                cfg.tol = t.clone();
            }
            if let Some(k) = b.max_iter {
                cfg.max_iter = k;
            }
            if let Some(d) = &b.damping {
                cfg.damping = d.clone();
            }
        }
        cfg
    }

    pub fn to_value(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("kind".into(), json!(self.instance.kind()));
        obj.insert("mode".into(), json!(self.mode.as_str()));
        match &self.instance {
            Instance::ToricDirac { problem, solver } => {
                obj.insert("polytope".into(), points_value(problem.delta().vertices()));
                obj.insert("sites".into(), points_value(problem.sites()));
                obj.insert("weights".into(), scalars_value(problem.weights()));
                if let Some(b) = solver {
                    let mut s = Map::new();
                    if let Some(t) = &b.tol {
                        s.insert("tol".into(), scalar_value(t));
                    }
                    if let Some(k) = b.max_iter {
                        s.insert("max_iter".into(), json!(k));
                    }
                    if let Some(d) = &b.damping {
                        s.insert("damping".into(), scalar_value(d));
                    }
                    obj.insert("solver".into(), Value::Object(s));
                }
            }
            Instance::ToricEnvelope {
                delta,
                constraints,
                reference,
            } => {
                obj.insert("polytope".into(), points_value(delta.vertices()));
                obj.insert("constraints".into(), constraints_value(constraints));
                if let Some(r) = reference {
                    obj.insert("reference".into(), constraints_value(r));
                }
            }
            Instance::CurvePoisson { graph, omega, mu } => {
                graph_into(&mut obj, graph);
                obj.insert("omega".into(), measure_value(omega));
                obj.insert("mu".into(), measure_value(mu));
            }
            Instance::CurveGreen { graph, x, y } => {
                graph_into(&mut obj, graph);
                obj.insert("x".into(), json!(x));
                obj.insert("y".into(), json!(y));
            }
        }
        Value::Object(obj)
    }

    /// Canonical pretty rendering; keys are sorted.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("plain JSON values");
        s.push('\n');
        s
    }
}

pub fn scalar_value(q: &Scalar) -> Value {
    Value::String(format_scalar(q))
}

pub fn scalars_value(qs: &[Scalar]) -> Value {
    Value::Array(qs.iter().map(scalar_value).collect())
}

pub fn points_value(ps: &[Point]) -> Value {
    Value::Array(ps.iter().map(|p| scalars_value(p)).collect())
}

pub fn constraints_value(cs: &[(Point, Scalar)]) -> Value {
    Value::Array(
        cs.iter()
            .map(|(x, t)| json!({"site": scalars_value(x), "value": scalar_value(t)}))
            .collect(),
    )
}

pub fn location_value(loc: &Location) -> Map<String, Value> {
    let mut m = Map::new();
    match loc {
        Location::Vertex(v) => {
            m.insert("vertex".into(), json!(v));
        }
        Location::Edge { edge, pos } => {
            m.insert("edge".into(), json!(edge));
            m.insert("position".into(), scalar_value(pos));
        }
    }
    m
}

pub fn measure_value(mu: &GraphMeasure) -> Value {
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

fn graph_into(obj: &mut Map<String, Value>, g: &MetricGraph) {
    obj.insert("vertices".into(), json!(g.vertex_count()));
    obj.insert(
        "edges".into(),
        Value::Array(
            g.edges()
                .iter()
                .map(|e| json!({"u": e.u, "v": e.v, "length": scalar_value(&e.length)}))
                .collect(),
        ),
    );
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> IoError {
    IoError::Validation {
        field: field.into(),
        message: message.into(),
    }
}

/// A JSON object whose keys are tracked so that leftovers can be
/// rejected.
struct Obj<'a> {
    map: &'a Map<String, Value>,
    path: String,
    seen: BTreeSet<&'a str>,
}

impl<'a> Obj<'a> {
    fn new(v: &'a Value, path: &str) -> Result<Self, IoError> {
        let map = v
            .as_object()
            .ok_or_else(|| invalid(root(path), "expected an object"))?;
        Ok(Obj {
            map,
            path: path.to_string(),
            seen: BTreeSet::new(),
        })
    }

    fn field(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.path)
        }
    }

    fn opt(&mut self, key: &str) -> Option<(&'a Value, String)> {
        let (k, v) = self.map.get_key_value(key)?;
        self.seen.insert(k.as_str());
        Some((v, self.field(key)))
    }

    fn req(&mut self, key: &str) -> Result<(&'a Value, String), IoError> {
        let f = self.field(key);
        self.opt(key).ok_or_else(|| invalid(f, "missing field"))
    }

    fn finish(self) -> Result<(), IoError> {
        match self.map.keys().find(|k| !self.seen.contains(k.as_str())) {
            Some(k) => Err(invalid(self.field(k), "unknown field")),
            None => Ok(()),
        }
    }
}

fn root(path: &str) -> String {
    if path.is_empty() {
        "$".to_string()
    } else {
        path.to_string()
    }
}

fn array<'a>(v: &'a Value, field: &str) -> Result<&'a Vec<Value>, IoError> {
    v.as_array().ok_or_else(|| invalid(field, "expected an array"))
}

fn string<'a>(v: &'a Value, field: &str) -> Result<&'a str, IoError> {
    v.as_str().ok_or_else(|| invalid(field, "expected a string"))
}

fn index(v: &Value, field: &str) -> Result<usize, IoError> {
    v.as_u64()
        .map(|k| k as usize)
        .ok_or_else(|| invalid(field, "expected a non-negative integer"))
}

fn scalar(v: &Value, field: &str, mode: Mode) -> Result<Scalar, IoError> {
    match v {
        Value::String(s) => parse_scalar(s).map_err(|e| invalid(field, e.to_string())),
        Value::Number(n) => {
            if let Some(k) = n.as_i64() {
                return Ok(Scalar::from_integer(k.into()));
            }
            if mode == Mode::Rational {
                return Err(invalid(field, "binary floats are not allowed in rational mode; use a string"));
            }
            n.as_f64()
                .and_then(from_f64)
                .ok_or_else(|| invalid(field, "not a finite number"))
        }
        _ => Err(invalid(field, "expected a number or a rational string")),
    }
}

fn points(v: &Value, field: &str, mode: Mode, dim: Option<usize>) -> Result<Vec<Point>, IoError> {
    let items = array(v, field)?;
    let mut out: Vec<Point> = Vec::with_capacity(items.len());
    for (i, p) in items.iter().enumerate() {
        out.push(point(p, &format!("{field}[{i}]"), mode, dim.or(out.first().map(|q| q.len())))?);
    }
    Ok(out)
}

fn point(v: &Value, field: &str, mode: Mode, dim: Option<usize>) -> Result<Point, IoError> {
    let items = array(v, field)?;
    if items.is_empty() {
        return Err(invalid(field, "empty point"));
    }
    if let Some(d) = dim {
        if items.len() != d {
            return Err(invalid(field, format!("expected {d} coordinates, found {}", items.len())));
        }
    }
    items
        .iter()
        .enumerate()
        .map(|(i, c)| scalar(c, &format!("{field}[{i}]"), mode))
        .collect()
}

fn polytope(v: &Value, field: &str, mode: Mode) -> Result<NewtonPolytope, IoError> {
    let verts = points(v, field, mode, None)?;
    if verts.is_empty() {
        return Err(invalid(field, "no vertices"));
    }
    let dim = verts[0].len();
    if dim > 2 {
        return Err(invalid(field, format!("dimension {dim} is not supported")));
    }
    let body = hull(&verts, dim).map_err(|e| invalid(field, e.to_string()))?;
    NewtonPolytope::new(body).map_err(|e| invalid(field, e.to_string()))
}

fn constraints(v: &Value, field: &str, mode: Mode, dim: usize) -> Result<Vec<(Point, Scalar)>, IoError> {
    let items = array(v, field)?;
    if items.is_empty() {
        return Err(invalid(field, "at least one constraint is required"));
    }
    items
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut o = Obj::new(c, &format!("{field}[{i}]"))?;
            let (s, sf) = o.req("site")?;
            let x = point(s, &sf, mode, Some(dim))?;
            let (t, tf) = o.req("value")?;
            let t = scalar(t, &tf, mode)?;
            o.finish()?;
            Ok((x, t))
        })
        .collect()
}

fn graph(o: &mut Obj, mode: Mode) -> Result<MetricGraph, IoError> {
    let (n, nf) = o.req("vertices")?;
    let n = index(n, &nf)?;
    if n == 0 {
        return Err(invalid(nf, "at least one vertex is required"));
    }
    let (es, ef) = o.req("edges")?;
    let mut edges = Vec::new();
    for (i, e) in array(es, &ef)?.iter().enumerate() {
        let path = format!("{ef}[{i}]");
        let mut eo = Obj::new(e, &path)?;
        let (u, uf) = eo.req("u")?;
        let u = index(u, &uf)?;
        let (v, vf) = eo.req("v")?;
        let v = index(v, &vf)?;
        let (l, lf) = eo.req("length")?;
        let length = scalar(l, &lf, mode)?;
        eo.finish()?;
        if u >= n {
            return Err(invalid(uf, "vertex out of range"));
        }
        if v >= n {
            return Err(invalid(vf, "vertex out of range"));
        }
        if u == v {
            return Err(invalid(path, "self-loop"));
        }
        if !length.is_positive() {
            return Err(invalid(lf, "length must be positive"));
        }
        edges.push(Edge { u, v, length });
    }
    MetricGraph::new(n, edges).map_err(|e| invalid(ef, e.to_string()))
}

fn measure(v: &Value, field: &str, mode: Mode, g: &MetricGraph) -> Result<GraphMeasure, IoError> {
    let mut mu = GraphMeasure::default();
    for (i, a) in array(v, field)?.iter().enumerate() {
        let mut o = Obj::new(a, &format!("{field}[{i}]"))?;
        let loc = match (o.opt("vertex"), o.opt("edge")) {
            (Some((vv, vf)), None) => {
                let k = index(vv, &vf)?;
                if k >= g.vertex_count() {
                    return Err(invalid(vf, "vertex out of range"));
                }
                Location::Vertex(k)
            }
            (None, Some((ev, efield))) => {
                let e = index(ev, &efield)?;
                if e >= g.edges().len() {
                    return Err(invalid(efield, "edge out of range"));
                }
                let (p, pf) = o.req("position")?;
                let pos = scalar(p, &pf, mode)?;
                if !pos.is_positive() || pos >= Scalar::one() {
                    return Err(invalid(pf, "position must lie strictly between 0 and 1"));
                }
                Location::Edge { edge: e, pos }
            }
            _ => return Err(invalid(o.field("vertex"), "exactly one of vertex or edge is required")),
        };
        let (w, wf) = o.req("weight")?;
        let w = scalar(w, &wf, mode)?;
        o.finish()?;
        if !w.is_positive() {
            return Err(invalid(wf, "weight must be positive"));
        }
        mu.add(loc, w);
    }
    Ok(mu)
}

/// Strict two-stage parse: JSON syntax, then schema and invariants.
pub fn parse_instance(text: &str) -> Result<InstanceFile, IoError> {
    let v: Value = serde_json::from_str(text).map_err(|e| IoError::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    instance_from_value(&v)
}

pub fn instance_from_value(v: &Value) -> Result<InstanceFile, IoError> {
    let mut o = Obj::new(v, "")?;
    let (k, kf) = o.req("kind")?;
    let kind = string(k, &kf)?.to_string();
    let (m, mf) = o.req("mode")?;
    let mode = match string(m, &mf)? {
        "rational" => Mode::Rational,
        "float" => Mode::Float,
        other => return Err(invalid(mf, format!("unknown mode {other:?}"))),
    };
    let instance = match kind.as_str() {
        "toric-dirac" => {
            let (p, pf) = o.req("polytope")?;
            let delta = polytope(p, &pf, mode)?;
            let dim = delta.dim();
            let (s, sf) = o.req("sites")?;
            let sites = points(s, &sf, mode, Some(dim))?;
            if sites.is_empty() {
                return Err(invalid(sf, "at least one site is required"));
            }
            for (i, x) in sites.iter().enumerate() {
                if sites[..i].contains(x) {
                    return Err(invalid(sf, format!("site {i} repeats an earlier site")));
                }
            }
            let (w, wf) = o.req("weights")?;
            let ws = array(w, &wf)?;
            if ws.len() != sites.len() {
                return Err(invalid(wf, format!("expected {} weights, found {}", sites.len(), ws.len())));
            }
            let weights = ws
                .iter()
                .enumerate()
                .map(|(i, x)| scalar(x, &format!("{wf}[{i}]"), mode))
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(i) = weights.iter().position(|w| !w.is_positive()) {
                return Err(invalid(format!("{wf}[{i}]"), "weight must be positive"));
            }
            let total: Scalar = weights.iter().sum();
            if &total != delta.volume() {
                return Err(invalid(
                    wf,
                    format!(
                        "weights sum to {} but the polytope has volume {}",
                        format_scalar(&total),
                        format_scalar(delta.volume())
                    ),
                ));
            }
            let solver = match o.opt("solver") {
                None => None,
                Some((b, bf)) => Some(solver_block(b, &bf, mode)?),
            };
            let problem = DiracProblem::new(delta, sites, weights).map_err(|e| invalid(sf, e.to_string()))?;
            Instance::ToricDirac { problem, solver }
        }
        "toric-envelope" => {
            let (p, pf) = o.req("polytope")?;
            let delta = polytope(p, &pf, mode)?;
            let (c, cf) = o.req("constraints")?;
            let cs = constraints(c, &cf, mode, delta.dim())?;
            let reference = match o.opt("reference") {
                None => None,
                Some((r, rf)) => Some(constraints(r, &rf, mode, delta.dim())?),
            };
            Instance::ToricEnvelope {
                delta,
                constraints: cs,
                reference,
            }
        }
        "curve-poisson" => {
            let g = graph(&mut o, mode)?;
            let (w, wf) = o.req("omega")?;
            let omega = measure(w, &wf, mode, &g)?;
            let (u, uf) = o.req("mu")?;
            let mu = measure(u, &uf, mode, &g)?;
            let (a, b) = (omega.total_mass(), mu.total_mass());
            if a.is_zero() {
                return Err(invalid(wf, "omega has zero mass"));
            }
            if a != b {
                return Err(invalid(
                    uf,
                    format!("mass {} differs from the mass {} of omega", format_scalar(&b), format_scalar(&a)),
                ));
            }
            Instance::CurvePoisson { graph: g, omega, mu }
        }
        "curve-green" => {
            let g = graph(&mut o, mode)?;
            let (x, xf) = o.req("x")?;
            let x = index(x, &xf)?;
            let (y, yf) = o.req("y")?;
            let y = index(y, &yf)?;
            if x >= g.vertex_count() {
                return Err(invalid(xf, "vertex out of range"));
            }
            if y >= g.vertex_count() {
                return Err(invalid(yf, "vertex out of range"));
            }
            if x == y {
                return Err(invalid(yf, "must differ from x"));
            }
            Instance::CurveGreen { graph: g, x, y }
        }
        other => return Err(invalid(kf, format!("unknown kind {other:?}"))),
    };
    o.finish()?;
    Ok(InstanceFile { mode, instance })
}

fn solver_block(v: &Value, field: &str, mode: Mode) -> Result<SolverBlock, IoError> {
    let mut o = Obj::new(v, field)?;
    let tol = match o.opt("tol") {
        Some((t, tf)) => {
            let t = scalar(t, &tf, mode)?;
            if t.is_negative() {
                return Err(invalid(tf, "tolerance must be non-negative"));
            }
            Some(t)
        }
        None => None,
    };
    let max_iter = match o.opt("max_iter") {
        Some((k, kf)) => Some(index(k, &kf)?),
        None => None,
    };
    let damping = match o.opt("damping") {
        Some((d, df)) => {
            let d = scalar(d, &df, mode)?;
            if !d.is_positive() || d > Scalar::one() {
                return Err(invalid(df, "damping must lie in (0, 1]"));
            }
            Some(d)
        }
        None => None,
    };
    o.finish()?;
    Ok(SolverBlock { tol, max_iter, damping })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    const DIRAC: &str = r#"{
        "kind": "toric-dirac",
        "mode": "rational",
        "polytope": [["0"], ["1"]],
        "sites": [["1/3"]],
        "weights": ["1"]
    }"#;

    #[test]
    fn minimal_dirac_parses_and_round_trips() {
        let f = parse_instance(DIRAC).unwrap();
        match &f.instance {
            Instance::ToricDirac { problem, solver } => {
                assert_eq!(problem.sites(), &[vec![ratio(1, 3)]]);
                assert!(solver.is_none());
            }
            other => panic!("wrong kind {other:?}"),
        }
        assert_eq!(parse_instance(&f.to_json()).unwrap(), f);
    }

    #[test]
    fn weights_must_balance() {
        let text = DIRAC.replace(r#""weights": ["1"]"#, r#""weights": ["1/2"]"#);
        match parse_instance(&text) {
            Err(IoError::Validation { field, .. }) => assert_eq!(field, "weights"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_fields_and_floats_are_rejected() {
        let text = DIRAC.replace(r#""mode""#, r#""extra": 1, "mode""#);
        assert!(matches!(parse_instance(&text), Err(IoError::Validation { field, .. }) if field == "extra"));
        let text = DIRAC.replace(r#"[["1/3"]]"#, "[[0.25]]");
        assert!(matches!(parse_instance(&text), Err(IoError::Validation { field, .. }) if field == "sites[0][0]"));
        let float = text.replace("rational", "float");
        assert!(parse_instance(&float).is_ok());
    }

    #[test]
    fn syntax_errors_carry_the_line() {
        let err = parse_instance("{\n  \"kind\": \n}").unwrap_err();
        assert!(matches!(err, IoError::Parse { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn curve_measures_must_balance() {
        let text = r#"{"kind": "curve-poisson", "mode": "rational", "vertices": 2,
            "edges": [{"u": 0, "v": 1, "length": "2"}],
            "omega": [{"vertex": 0, "weight": "1"}],
            "mu": [{"edge": 0, "position": "1/2", "weight": "1"}]}"#;
        let f = parse_instance(text).unwrap();
        assert_eq!(parse_instance(&f.to_json()).unwrap(), f);
        let bad = text.replace(r#""position": "1/2", "weight": "1""#, r#""position": "1/2", "weight": "2""#);
        assert!(matches!(parse_instance(&bad), Err(IoError::Validation { field, .. }) if field == "mu"));
        let disconnected = text.replace(r#""vertices": 2"#, r#""vertices": 3"#);
        assert!(matches!(parse_instance(&disconnected), Err(IoError::Validation { field, .. }) if field == "edges"));
    }
}
