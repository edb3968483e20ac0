use serde_json::Value;

use super::{IoError, ResultFile};
use crate::polyhedra::hull;
use crate::scalar::{format_scalar, parse_scalar, to_f64, Point, Scalar};
use crate::toric::{envelope, NewtonPolytope, ToricPsh};

fn invalid(field: &str, message: impl Into<String>) -> IoError {
    IoError::Validation {
        field: field.to_string(),
        message: message.into(),
    }
}

fn scalar(v: &Value, field: &str) -> Result<Scalar, IoError> {
    let s = v.as_str().ok_or_else(|| invalid(field, "expected a rational string"))?;
    parse_scalar(s).map_err(|e| invalid(field, e.to_string()))
}

fn point(v: &Value, field: &str) -> Result<Point, IoError> {
    v.as_array()
        .ok_or_else(|| invalid(field, "expected an array"))?
        .iter()
        .map(|c| scalar(c, field))
        .collect()
}

/// Rebuilds the potential stored in a `solve` or `envelope` result.
pub fn potential_from_result(result: &ResultFile) -> Result<ToricPsh, IoError> {
    let sol = &result.solution;
    let verts = sol
        .get("polytope")
        .and_then(|v| v.as_array())
        .ok_or_else(|| invalid("solution.polytope", "missing; not a toric result"))?
        .iter()
        .map(|p| point(p, "solution.polytope"))
        .collect::<Result<Vec<_>, _>>()?;
    let dim = verts.first().map(|p| p.len()).unwrap_or(0);
    let body = hull(&verts, dim).map_err(|e| invalid("solution.polytope", e.to_string()))?;
    let delta = NewtonPolytope::new(body).map_err(|e| invalid("solution.polytope", e.to_string()))?;
    let gens = sol
        .get("generators")
        .and_then(|v| v.as_array())
        .ok_or_else(|| invalid("solution.generators", "missing"))?
        .iter()
        .map(|g| {
            let x = point(g.get("site").unwrap_or(&Value::Null), "solution.generators")?;
            let t = scalar(g.get("value").unwrap_or(&Value::Null), "solution.generators")?;
            Ok((x, t))
        })
        .collect::<Result<Vec<_>, IoError>>()?;
    envelope(&delta, &gens).map_err(|e| invalid("solution.generators", e.to_string()))
}

/// One row per vertex of every Laguerre cell. In rational mode exact
/// `p/q` columns follow the decimal ones.
pub fn export_cells(f: &ToricPsh, exact: bool) -> String {
    let n = f.dim();
    let mut header: Vec<String> = vec!["cell_id".into()];
    header.extend((0..n).map(|i| format!("site_{i}")));
    header.push("weight".into());
    header.extend((0..n).map(|i| format!("vertex_{i}")));
    if exact {
        header.extend((0..n).map(|i| format!("site_{i}_exact")));
        header.push("weight_exact".into());
        header.extend((0..n).map(|i| format!("vertex_{i}_exact")));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).expect("in-memory writer");
    for (id, ((x, _), cell)) in f.generators().iter().zip(f.cells()).enumerate() {
        let vol = cell.volume();
        for v in cell.vertices() {
            let mut row = vec![id.to_string()];
            row.extend(x.iter().map(|c| to_f64(c).to_string()));
            row.push(to_f64(&vol).to_string());
            row.extend(v.iter().map(|c| to_f64(c).to_string()));
            if exact {
                row.extend(x.iter().map(format_scalar));
                row.push(format_scalar(&vol));
                row.extend(v.iter().map(format_scalar));
            }
            w.write_record(&row).expect("in-memory writer");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("ASCII output")
}

pub fn export_cells_from_result(result: &ResultFile) -> Result<String, IoError> {
    let f = potential_from_result(result)?;
    Ok(export_cells(&f, result.mode == "rational"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ipoint;

    #[test]
    fn single_cell_square() {
        let sq = NewtonPolytope::unit_cube(2);
        let f = envelope(&sq, &[(ipoint(&[0, 0]), Scalar::from_integer(0.into()))]).unwrap();
        let text = export_cells(&f, true);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(
            lines[0],
            "cell_id,site_0,site_1,weight,vertex_0,vertex_1,site_0_exact,site_1_exact,weight_exact,vertex_0_exact,vertex_1_exact"
        );
        assert_eq!(lines[1], "0,0,0,1,0,0,0,0,1,0,0");
    }
}
