use std::collections::BTreeMap;

use num_traits::Zero;

use super::combine::convex_combination;
use super::psh::ToricPsh;
use super::{AtomicMeasure, Evaluate, ToricError};
use crate::scalar::{dot, int, ratio, Point, Scalar};

/// Mixed Monge-Ampère measure `MA(f_1, ..., f_n)`, by polarization over
/// the nodes `0, 1/2, 1` in dimension two.
pub fn mixed_ma(fs: &[&ToricPsh]) -> Result<AtomicMeasure, ToricError> {
    let first = fs.first().ok_or(ToricError::WrongArity {
        expected: 1,
        found: 0,
    })?;
    let n = first.dim();
    if fs.len() != n {
        return Err(ToricError::WrongArity {
            expected: n,
            found: fs.len(),
        });
    }
    for f in &fs[1..] {
        first.check_same_delta(f)?;
    }
    if n == 1 || fs[0] == fs[1] {
        return Ok(fs[0].ma_measure());
    }
    // MA(mid) = (MA(f) + 2 MA(f, g) + MA(g)) / 4.
    let mid = convex_combination(fs[0], fs[1], &ratio(1, 2))?;
    let mut acc: BTreeMap<Point, Scalar> = BTreeMap::new();
    for (p, w) in mid.ma_measure().atoms() {
        *acc.entry(p.clone()).or_insert_with(Scalar::zero) += w * int(2);
    }
    for f in &fs[..2] {
        for (p, w) in f.ma_measure().atoms() {
            *acc.entry(p.clone()).or_insert_with(Scalar::zero) -= w * ratio(1, 2);
        }
    }
    AtomicMeasure::new(acc)
}

/// `E(f) = 1/(n+1) sum_j \int (f - ref) dMA(f^j, ref^(n-j))`.
pub fn energy(f: &ToricPsh, reference: &ToricPsh) -> Result<Scalar, ToricError> {
    f.check_same_delta(reference)?;
    let n = f.dim();
    let mut total = Scalar::zero();
    for j in 0..=n {
        let mut args: Vec<&ToricPsh> = vec![f; j];
        args.extend(std::iter::repeat(reference).take(n - j));
        let mu = mixed_ma(&args)?;
        for (p, w) in mu.atoms() {
            total += (f.value_at(p) - reference.value_at(p)) * w;
        }
    }
    Ok(total / int(n as i64 + 1))
}

/// `\int_delta u dm` for the dual function of `f`.
fn dual_integral(f: &ToricPsh) -> Scalar {
    f.generators()
        .iter()
        .zip(f.cells())
        .map(|((x, t), cell)| dot(x, &cell.moment()) - t * cell.volume())
        .sum()
}

/// The same energy through Legendre duality:
/// `\int_delta (u_ref - u_f) dm`.
pub fn energy_legendre(f: &ToricPsh, reference: &ToricPsh) -> Result<Scalar, ToricError> {
    f.check_same_delta(reference)?;
    Ok(dual_integral(reference) - dual_integral(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ipoint;
    use crate::toric::{envelope, NewtonPolytope};

    #[test]
    fn interval_translate_energy() {
        let i = NewtonPolytope::unit_cube(1);
        let g = ToricPsh::support_function(&i);
        for x in [-3, 0, 2, 5] {
            let f = envelope(&i, &[(ipoint(&[x]), int(0))]).unwrap();
            assert_eq!(energy(&f, &g).unwrap(), ratio(-x, 2));
            assert_eq!(energy_legendre(&f, &g).unwrap(), ratio(-x, 2));
        }
    }

    #[test]
    fn constants_shift_energy_by_the_volume() {
        let tri = NewtonPolytope::standard_simplex(2);
        let g = ToricPsh::support_function(&tri);
        let f = envelope(&tri, &[(ipoint(&[1, 0]), int(0)), (ipoint(&[0, 2]), ratio(1, 2))]).unwrap();
        let e = energy(&f, &g).unwrap();
        assert_eq!(e, energy_legendre(&f, &g).unwrap());
        assert_eq!(energy(&f.shift(&int(3)), &g).unwrap(), e + int(3) * ratio(1, 2));
        assert_eq!(energy(&g, &g).unwrap(), int(0));
    }

    #[test]
    fn mixed_measure_of_square_and_translate() {
        let sq = NewtonPolytope::unit_cube(2);
        let f = ToricPsh::support_function(&sq);
        let g = envelope(&sq, &[(ipoint(&[1, 1]), int(0))]).unwrap();
        let mixed = mixed_ma(&[&f, &g]).unwrap();
        assert_eq!(mixed.total_mass(), int(1));
        assert_eq!(mixed, mixed_ma(&[&g, &f]).unwrap());
        assert!(matches!(mixed_ma(&[&f]), Err(ToricError::WrongArity { .. })));
    }
}
