//! Dense tableau simplex over exact rationals.
//!
//! Solves `max cᵀx s.t. Ax ≤ b, x ≥ 0` with `b ≥ 0`, so the slack basis is
//! feasible from the start. Bland's rule prevents cycling.

use num_traits::{Signed, Zero};

use crate::error::{CarnotError, Result};
use crate::poly::Rational;

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub x: Vec<Rational>,
    /// Dual values, one per row of `A`; they solve `min bᵀy s.t. Aᵀy ≥ c, y ≥ 0`.
    pub y: Vec<Rational>,
    pub objective: Rational,
    pub pivots: usize,
}

pub fn maximize(c: &[Rational], a: &[Vec<Rational>], b: &[Rational]) -> Result<LpSolution> {
    let m = a.len();
    let n = c.len();
    if b.len() != m || a.iter().any(|r| r.len() != n) {
        return Err(CarnotError::invalid("LP dimensions do not match"));
    }
    if b.iter().any(|v| v.is_negative()) {
        return Err(CarnotError::invalid("LP right-hand side must be nonnegative"));
    }
    let width = n + m + 1;
    // rows 0..m constraints, row m the reduced-cost row (−c for maximization)
    let mut t: Vec<Vec<Rational>> = Vec::with_capacity(m + 1);
    for i in 0..m {
        let mut row = vec![Rational::zero(); width];
        row[..n].clone_from_slice(&a[i]);
        row[n + i] = Rational::from_integer(1.into());
        row[width - 1] = b[i].clone();
        t.push(row);
    }
    let mut obj = vec![Rational::zero(); width];
    for j in 0..n {
        obj[j] = -c[j].clone();
    }
    t.push(obj);
    let mut basis: Vec<usize> = (n..n + m).collect();
    let mut pivots = 0;
    loop {
        let Some(enter) = (0..n + m).find(|&j| t[m][j].is_negative()) else {
            break;
        };
        let mut leave: Option<(usize, Rational)> = None;
        for i in 0..m {
            if t[i][enter].is_positive() {
                let ratio = &t[i][width - 1] / &t[i][enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((r, _)) = leave else {
            return Err(CarnotError::Internal("LP is unbounded".into()));
        };
        let p = t[r][enter].clone();
        for v in t[r].iter_mut() {
            *v /= &p;
        }
        let pivot_row = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i == r || row[enter].is_zero() {
                continue;
            }
            let f = row[enter].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        basis[r] = enter;
        pivots += 1;
    }
    let mut x = vec![Rational::zero(); n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            x[bv] = t[i][width - 1].clone();
        }
    }
    let y = (0..m).map(|i| t[m][n + i].clone()).collect();
    Ok(LpSolution {
        x,
        y,
        objective: t[m][width - 1].clone(),
        pivots,
    })
}
