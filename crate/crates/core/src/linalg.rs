//! Dense LU factorization with partial pivoting, shared by the solver's
//! Newton step (exact or float) and the graph Laplacian solves.

use crate::scalar::Field;

/// `P A = L U`, stored compactly.
#[derive(Debug, Clone)]
pub struct Lu<F> {
    lu: Vec<Vec<F>>,
    perm: Vec<usize>,
}

impl<F: Field> Lu<F> {
    /// Factors a square matrix. Returns `None` if it is singular (exactly,
    /// or up to the float tolerance relative to the largest entry).
    pub fn factor(mut a: Vec<Vec<F>>) -> Option<Lu<F>> {
        let n = a.len();
        let scale = a
            .iter()
            .flat_map(|r| r.iter())
            .fold(F::zero(), |acc, x| if x.abs() > acc { x.abs() } else { acc });
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut piv = k;
            for i in k + 1..n {
                if a[i][k].abs() > a[piv][k].abs() {
                    piv = i;
                }
            }
            if a[piv][k].negligible(&scale) {
                return None;
            }
            a.swap(k, piv);
            perm.swap(k, piv);
            let (top, rest) = a.split_at_mut(k + 1);
            let pivot_row = &top[k];
            for row in rest.iter_mut() {
                if row[k].is_zero() {
                    continue;
                }
                let factor = row[k].clone() / pivot_row[k].clone();
                for j in k + 1..n {
                    let delta = factor.clone() * pivot_row[j].clone();
                    row[j] = row[j].clone() - delta;
                }
                row[k] = factor;
            }
        }
        Some(Lu { lu: a, perm })
    }

    pub fn solve(&self, b: &[F]) -> Vec<F> {
        let n = self.lu.len();
        let mut y: Vec<F> = self.perm.iter().map(|&i| b[i].clone()).collect();
        for i in 0..n {
            for j in 0..i {
                let d = self.lu[i][j].clone() * y[j].clone();
                y[i] = y[i].clone() - d;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let d = self.lu[i][j].clone() * y[j].clone();
                y[i] = y[i].clone() - d;
            }
            y[i] = y[i].clone() / self.lu[i][i].clone();
        }
        y
    }
}

pub fn solve_dense<F: Field>(a: Vec<Vec<F>>, b: &[F]) -> Option<Vec<F>> {
    Lu::factor(a).map(|lu| lu.solve(b))
}
