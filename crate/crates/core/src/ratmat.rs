//! Exact rational linear algebra helpers: square solves, rank, and a
//! small Fourier-Motzkin feasibility test for separating functionals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

pub type Rat = BigRational;

pub fn rat(v: i64) -> Rat {
    BigRational::from_integer(BigInt::from(v))
}

/// Solve the square system `a * x = b`; None when `a` is singular.
pub fn solve_square(a: &[Vec<Rat>], b: &[Rat]) -> Option<Vec<Rat>> {
    let n = a.len();
    debug_assert!(a.iter().all(|r| r.len() == n) && b.len() == n);
    let mut m: Vec<Vec<Rat>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        let p = m[col][col].clone();
        for entry in m[col].iter_mut() {
            *entry /= p.clone();
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in col..=n {
                    let sub = f.clone() * m[col][c].clone();
                    m[r][c] -= sub;
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[n].clone()).collect())
}

pub fn rank(rows: &[Vec<i64>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let n = rows[0].len();
    let mut m: Vec<Vec<Rat>> = rows
        .iter()
        .map(|r| r.iter().map(|&v| rat(v)).collect())
        .collect();
    let mut rk = 0;
    for col in 0..n {
        if let Some(piv) = (rk..m.len()).find(|&r| !m[r][col].is_zero()) {
            m.swap(rk, piv);
            let p = m[rk][col].clone();
            for entry in m[rk].iter_mut() {
                *entry /= p.clone();
            }
            for r in 0..m.len() {
                if r != rk && !m[r][col].is_zero() {
                    let f = m[r][col].clone();
                    for c in 0..n {
                        let sub = f.clone() * m[rk][c].clone();
                        m[r][c] -= sub;
                    }
                }
            }
            rk += 1;
        }
    }
    rk
}

/// Feasibility of the system `coeffs . w >= rhs` (one row per constraint)
/// by Fourier-Motzkin elimination.  Intended for a handful of variables.
pub fn feasible_ge(constraints: &[(Vec<Rat>, Rat)]) -> bool {
    fn go(cons: Vec<(Vec<Rat>, Rat)>, vars: usize) -> bool {
        if vars == 0 {
            return cons.iter().all(|(_, rhs)| *rhs <= Rat::zero());
        }
        let v = vars - 1;
        let mut pos = Vec::new(); // w_v >= expr
        let mut neg = Vec::new(); // w_v <= expr
        let mut rest = Vec::new();
        for (c, rhs) in cons {
            let a = c[v].clone();
            if a.is_zero() {
                rest.push((c, rhs));
            } else if a.is_positive() {
                // w_v >= (rhs - sum_{i<v} c_i w_i) / a
                let row: Vec<Rat> = (0..v).map(|i| c[i].clone() / a.clone()).collect();
                pos.push((row, rhs / a));
            } else {
                let row: Vec<Rat> = (0..v).map(|i| c[i].clone() / a.clone()).collect();
                neg.push((row, rhs / a));
            }
        }
        let mut next = rest;
        // lower bound <= upper bound for each pair
        for (lr, lb) in &pos {
            for (ur, ub) in &neg {
                // lb - lr.w <= ub - ur.w  ==>  (lr - ur).w >= lb - ub
                let row: Vec<Rat> = (0..v).map(|i| lr[i].clone() - ur[i].clone()).collect();
                next.push((row, lb.clone() - ub.clone()));
            }
        }
        go(next, v)
    }
    let vars = constraints.first().map_or(0, |(c, _)| c.len());
    go(constraints.to_vec(), vars)
}
