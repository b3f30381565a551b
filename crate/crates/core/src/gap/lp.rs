//! Dense two-phase simplex, generic over the scalar type.
//! With `Rational` the result is exact; with `f64` comparisons use
//! `Scalar::epsilon`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

/// Maximize `objective · x` subject to the rows, with `x ≥ 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram<S> {
    pub objective: Vec<S>,
    pub rows: Vec<(Vec<S>, Relation, S)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<S> {
    pub value: S,
    pub x: Vec<S>,
    pub pivots: usize,
}

impl<S: Scalar> LinearProgram<S> {
    pub fn new(objective: Vec<S>) -> Self {
        Self {
            objective,
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, coeffs: Vec<S>, rel: Relation, rhs: S) -> &mut Self {
        self.rows.push((coeffs, rel, rhs));
        self
    }

    pub fn solve(&self) -> Result<LpSolution<S>> {
        solve(self)
    }
}

struct Tableau<S> {
    /// `rows × (cols + 1)`; the last column is the right-hand side.
    a: Vec<Vec<S>>,
    basis: Vec<usize>,
    cols: usize,
    pivots: usize,
}

/// Largest-coefficient entering rule until this many degenerate pivots in a
/// row, then Bland's rule, which cannot cycle.
const DEGENERATE_STREAK: usize = 50;

impl<S: Scalar> Tableau<S> {
    fn pivot(&mut self, r: usize, c: usize, z: &mut [S]) {
        let p = self.a[r][c].clone();
        for v in self.a[r].iter_mut() {
            if !v.is_zero() {
                *v = v.clone() / p.clone();
            }
        }
        let pivot_row = std::mem::take(&mut self.a[r]);
        let nz: Vec<usize> = (0..pivot_row.len()).filter(|&j| !pivot_row[j].is_zero()).collect();
        let eliminate = |row: &mut [S]| {
            let f = row[c].clone();
            if f.is_zero() {
                return;
            }
            for &j in &nz {
                row[j] = row[j].clone() - f.clone() * pivot_row[j].clone();
            }
        };
        for row in self.a.iter_mut() {
            if !row.is_empty() {
                eliminate(row);
            }
        }
        eliminate(z);
        self.a[r] = pivot_row;
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Maximizes `obj · x` over the current feasible basis, restricted to
    /// columns where `allowed` holds.
    fn optimize(&mut self, obj: &[S], allowed: &dyn Fn(usize) -> bool) -> Result<()> {
        let limit = 50_000 + 50 * (self.a.len() + self.cols);
        // z[j] = reduced cost of column j; z[cols] = −(current objective)
        let mut z: Vec<S> = obj.to_vec();
        z.push(S::zero());
        for (i, row) in self.a.iter().enumerate() {
            let cb = obj[self.basis[i]].clone();
            if cb.is_zero() {
                continue;
            }
            for (zj, aij) in z.iter_mut().zip(row) {
                if !aij.is_zero() {
                    *zj = zj.clone() - cb.clone() * aij.clone();
                }
            }
        }
        let mut basic = vec![false; self.cols];
        for &b in &self.basis {
            basic[b] = true;
        }
        let mut streak = 0usize;
        loop {
            if self.pivots > limit {
                return Err(Error::Lp(format!("pivot limit {limit} reached")));
            }
            let candidates = (0..self.cols).filter(|&j| allowed(j) && !basic[j] && z[j].is_positive_strict());
            let entering = if streak >= DEGENERATE_STREAK {
                candidates.min()
            } else {
                candidates.fold(None, |best: Option<usize>, j| match best {
                    Some(b) if z[b] >= z[j] => Some(b),
                    _ => Some(j),
                })
            };
            let Some(c) = entering else { return Ok(()) };
            let mut leave: Option<(usize, S)> = None;
            for (i, row) in self.a.iter().enumerate() {
                if !row[c].is_positive_strict() {
                    continue;
                }
                let ratio = row[self.cols].clone() / row[c].clone();
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => {
                        let d = ratio.clone() - lr.clone();
                        d.is_negative_strict() || (!d.is_positive_strict() && self.basis[i] < self.basis[*li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, ratio)) = leave else {
                return Err(Error::Lp("objective is unbounded".into()));
            };
            if ratio.is_negligible() {
                streak += 1;
            } else {
                streak = 0;
            }
            basic[self.basis[r]] = false;
            basic[c] = true;
            self.pivot(r, c, &mut z);
        }
    }
}

fn solve<S: Scalar>(lp: &LinearProgram<S>) -> Result<LpSolution<S>> {
    let nv = lp.objective.len();
    let m = lp.rows.len();
    for (coeffs, _, _) in &lp.rows {
        if coeffs.len() != nv {
            return Err(Error::Lp(format!("row has {} coefficients, expected {nv}", coeffs.len())));
        }
    }
    // Normalize to non-negative right-hand sides.
    let rows: Vec<(Vec<S>, Relation, S)> = lp
        .rows
        .iter()
        .map(|(c, rel, b)| {
            if b.is_negative_strict() {
                let flip = match rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                (c.iter().map(|v| -v.clone()).collect(), flip, -b.clone())
            } else {
                (c.clone(), *rel, b.clone())
            }
        })
        .collect();
    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let cols = nv + n_slack + n_art;
    let art_start = nv + n_slack;
    let mut a = vec![vec![S::zero(); cols + 1]; m];
    let mut basis = vec![0; m];
    let (mut s, mut t) = (nv, art_start);
    for (i, (c, rel, b)) in rows.iter().enumerate() {
        a[i][..nv].clone_from_slice(c);
        a[i][cols] = b.clone();
        match rel {
            Relation::Le => {
                a[i][s] = S::one();
                basis[i] = s;
                s += 1;
            }
            Relation::Ge => {
                a[i][s] = -S::one();
                s += 1;
                a[i][t] = S::one();
                basis[i] = t;
                t += 1;
            }
            Relation::Eq => {
                a[i][t] = S::one();
                basis[i] = t;
                t += 1;
            }
        }
    }
    let mut tab = Tableau {
        a,
        basis,
        cols,
        pivots: 0,
    };
    if n_art > 0 {
        let mut phase1 = vec![S::zero(); cols];
        for v in phase1.iter_mut().skip(art_start) {
            *v = -S::one();
        }
        tab.optimize(&phase1, &|_| true)?;
        let infeas: S = (0..m)
            .filter(|&i| tab.basis[i] >= art_start)
            .map(|i| tab.a[i][cols].clone())
            .fold(S::zero(), |x, y| x + y);
        if infeas.is_positive_strict() {
            return Err(Error::Lp(format!("infeasible (phase-one residual {:.3e})", infeas.approx())));
        }
        // Drive remaining artificials out of the basis where possible.
        for i in 0..m {
            if tab.basis[i] < art_start {
                continue;
            }
            if let Some(j) = (0..art_start).find(|&j| !tab.a[i][j].is_negligible() && !tab.basis.contains(&j)) {
                let mut scratch = vec![S::zero(); cols + 1];
                tab.pivot(i, j, &mut scratch);
            }
        }
    }
    let mut obj = vec![S::zero(); cols];
    obj[..nv].clone_from_slice(&lp.objective);
    tab.optimize(&obj, &|j| j < art_start)?;
    let mut x = vec![S::zero(); nv];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < nv {
            x[b] = tab.a[i][cols].clone();
        }
    }
    let value = x
        .iter()
        .zip(&lp.objective)
        .fold(S::zero(), |acc, (xi, ci)| acc + xi.clone() * ci.clone());
    Ok(LpSolution {
        value,
        x,
        pivots: tab.pivots,
    })
}
