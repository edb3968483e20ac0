//! Laguerre (power) cells inside a polytope, generic over the scalar
//! field so the solver's float mode can share the construction.

use crate::polyhedra::planar;
use crate::scalar::Field;

/// `{m in delta : <x_a, m> - t_a >= <x_b, m> - t_b for all b}`.
pub fn laguerre_cell<F: Field>(
    dim: usize,
    delta: &[Vec<F>],
    sites: &[Vec<F>],
    t: &[F],
    a: usize,
) -> Vec<Vec<F>> {
    let mut cell = delta.to_vec();
    for b in 0..sites.len() {
        if b == a {
            continue;
        }
        let normal: Vec<F> = sites[b]
            .iter()
            .zip(&sites[a])
            .map(|(p, q)| p.clone() - q.clone())
            .collect();
        let offset = t[b].clone() - t[a].clone();
        if normal.iter().all(|v| v.is_zero()) {
            if offset < F::zero() {
                return Vec::new();
            }
            continue;
        }
        cell = planar::clip(dim, &cell, &normal, &offset);
        if cell.is_empty() {
            break;
        }
    }
    cell
}

pub fn laguerre_cells<F: Field>(
    dim: usize,
    delta: &[Vec<F>],
    sites: &[Vec<F>],
    t: &[F],
) -> Vec<Vec<Vec<F>>> {
    (0..sites.len())
        .map(|a| laguerre_cell(dim, delta, sites, t, a))
        .collect()
}

/// Derivative of the mass of cell `a` with respect to `t_b` (`b != a`):
/// the (n-1)-volume of the common face divided by `|x_b - x_a|`.
/// For exact fields the ratio is computed without square roots.
pub fn face_coupling<F: Field>(
    dim: usize,
    cell_a: &[Vec<F>],
    site_a: &[F],
    site_b: &[F],
    t_a: &F,
    t_b: &F,
) -> F {
    let d: Vec<F> = site_b
        .iter()
        .zip(site_a)
        .map(|(p, q)| p.clone() - q.clone())
        .collect();
    let offset = t_b.clone() - t_a.clone();
    let dd = planar::dot(&d, &d);
    if dd.is_zero() || cell_a.is_empty() {
        return F::zero();
    }
    let scale = cell_a
        .iter()
        .flat_map(|v| v.iter())
        .fold(F::one(), |acc, x| if x.abs() > acc { x.abs() } else { acc })
        * d.iter()
            .fold(F::one(), |acc, x| if x.abs() > acc { x.abs() } else { acc });
    let on_face: Vec<&Vec<F>> = cell_a
        .iter()
        .filter(|v| (planar::dot(&d, v) - offset.clone()).negligible(&scale))
        .collect();
    match dim {
        1 => {
            if on_face.is_empty() {
                F::zero()
            } else {
                // |x_b - x_a| in one dimension.
                F::one() / d[0].abs()
            }
        }
        _ => {
            if on_face.len() < 2 {
                return F::zero();
            }
            // Extreme pair along the face direction perp(d).
            let perp = [-d[1].clone(), d[0].clone()];
            let proj: Vec<F> = on_face.iter().map(|v| planar::dot(&perp, v)).collect();
            let mut lo = proj[0].clone();
            let mut hi = proj[0].clone();
            for p in &proj[1..] {
                if *p < lo {
                    lo = p.clone();
                }
                if *p > hi {
                    hi = p.clone();
                }
            }
            // |e| / |d| with e = lambda perp(d) and |perp(d)| = |d|.
            (hi - lo) / dd
        }
    }
}
