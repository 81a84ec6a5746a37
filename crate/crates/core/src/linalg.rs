//! Dense linear algebra over [`Scalar`]: Gaussian elimination and a
//! two-phase tableau simplex with Bland's rule.
//!
//! Both routines are exact over rationals. Over `f64` pivots whose
//! magnitude falls below the slack count as zero.


use crate::numerics::Scalar;

/// Solves the square system `a x = b` (row-major `a`), or `None` when it is
/// singular.
pub(crate) fn solve_square<T: Scalar>(mut a: Vec<T>, mut b: Vec<T>, tol: f64) -> Option<Vec<T>> {
    let n = b.len();
    debug_assert_eq!(a.len(), n * n);
    let slack = T::slack(tol);
    for col in 0..n {
        let mut pivot = None;
        let mut best = slack.clone();
        for row in col..n {
            let m = a[row * n + col].magnitude();
            if if T::EXACT { !m.is_zero() } else { m > best } {
                best = m;
                pivot = Some(row);
                if T::EXACT {
                    break;
                }
            }
        }
        let pivot = pivot?;
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            b.swap(pivot, col);
        }
        let p = a[col * n + col].clone();
        for row in col + 1..n {
            let factor = a[row * n + col].clone() / p.clone();
            if factor.is_zero() {
                continue;
            }
            for k in col..n {
                let v = a[col * n + k].clone() * factor.clone();
                a[row * n + k] = a[row * n + k].clone() - v;
            }
            let v = b[col].clone() * factor;
            b[row] = b[row].clone() - v;
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut acc = b[row].clone();
        for k in row + 1..n {
            acc = acc - a[row * n + k].clone() * x[k].clone();
        }
        x[row] = acc / a[row * n + row].clone();
    }
    Some(x)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Relation {
    Le,
    Ge,
    Eq,
}

/// `minimize objective . x` subject to the constraints and `x >= 0`.
#[derive(Clone, Debug)]
pub(crate) struct LinearProgram<T> {
    pub num_vars: usize,
    pub objective: Vec<T>,
    pub constraints: Vec<(Vec<T>, Relation, T)>,
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum LpOutcome<T> {
    Optimal { x: Vec<T>, value: T },
    Infeasible,
    Unbounded,
}

impl<T: Scalar> LinearProgram<T> {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            objective: vec![T::zero(); num_vars],
            constraints: Vec::new(),
        }
    }

    pub fn constrain(&mut self, row: Vec<T>, rel: Relation, rhs: T) {
        debug_assert_eq!(row.len(), self.num_vars);
        self.constraints.push((row, rel, rhs));
    }

    pub fn solve(&self, tol: f64) -> LpOutcome<T> {
        Tableau::build(self, tol).run(self, tol)
    }
}

struct Tableau<T> {
    /// `rows x (cols + 1)`, last column is the right-hand side.
    cells: Vec<Vec<T>>,
    basis: Vec<usize>,
    cols: usize,
    artificial_from: usize,
}

impl<T: Scalar> Tableau<T> {
    fn build(lp: &LinearProgram<T>, _tol: f64) -> Self {
        let n = lp.num_vars;
        let rows: Vec<(Vec<T>, Relation, T)> = lp
            .constraints
            .iter()
            .map(|(row, rel, rhs)| {
                if *rhs < T::zero() {
                    let flipped = match rel {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (row.iter().map(|v| -v.clone()).collect(), flipped, -rhs.clone())
                } else {
                    (row.clone(), *rel, rhs.clone())
                }
            })
            .collect();
        let slacks = rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let artificials = rows.iter().filter(|r| r.1 != Relation::Le).count();
        let cols = n + slacks + artificials;
        let artificial_from = n + slacks;
        let mut cells = Vec::with_capacity(rows.len());
        let mut basis = Vec::with_capacity(rows.len());
        let (mut s, mut a) = (n, artificial_from);
        for (row, rel, rhs) in rows {
            let mut line = row;
            line.resize(cols + 1, T::zero());
            match rel {
                Relation::Le => {
                    line[s] = T::one();
                    basis.push(s);
                    s += 1;
                }
                Relation::Ge => {
                    line[s] = -T::one();
                    s += 1;
                    line[a] = T::one();
                    basis.push(a);
                    a += 1;
                }
                Relation::Eq => {
                    line[a] = T::one();
                    basis.push(a);
                    a += 1;
                }
            }
            line[cols] = rhs;
            cells.push(line);
        }
        Tableau {
            cells,
            basis,
            cols,
            artificial_from,
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.cells[row][col].clone();
        for v in self.cells[row].iter_mut() {
            *v = v.clone() / p.clone();
        }
        let pivot_row = self.cells[row].clone();
        for (r, line) in self.cells.iter_mut().enumerate() {
            if r == row {
                continue;
            }
            let factor = line[col].clone();
            if factor.is_zero() {
                continue;
            }
            for (v, pv) in line.iter_mut().zip(pivot_row.iter()) {
                if !pv.is_zero() {
                    *v = v.clone() - factor.clone() * pv.clone();
                }
            }
        }
        self.basis[row] = col;
    }

    /// Reduced costs of `cost` (indexed by column) under the current basis.
    fn reduced_costs(&self, cost: &[T]) -> Vec<T> {
        let mut reduced: Vec<T> = cost.to_vec();
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = cost[b].clone();
            if cb.is_zero() {
                continue;
            }
            for (j, red) in reduced.iter_mut().enumerate() {
                let v = &self.cells[r][j];
                if !v.is_zero() {
                    *red = red.clone() - cb.clone() * v.clone();
                }
            }
        }
        reduced
    }

    /// Bland's rule; returns false when the program is unbounded.
    fn optimize(&mut self, cost: &[T], allowed: usize, tol: f64) -> bool {
        let slack = T::slack(tol);
        loop {
            let reduced = self.reduced_costs(cost);
            let entering = (0..allowed).find(|&j| reduced[j] < -slack.clone());
            let Some(col) = entering else {
                return true;
            };
            let mut leave: Option<(usize, T)> = None;
            for r in 0..self.cells.len() {
                let a = &self.cells[r][col];
                if *a > slack {
                    let ratio = self.cells[r][self.cols].clone() / a.clone();
                    let better = match &leave {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < *lratio || (ratio == *lratio && self.basis[r] < self.basis[*lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            match leave {
                Some((row, _)) => self.pivot(row, col),
                None => return false,
            }
        }
    }

    fn run(mut self, lp: &LinearProgram<T>, tol: f64) -> LpOutcome<T> {
        let slack = T::slack(tol);
        if self.artificial_from < self.cols {
            let mut phase1 = vec![T::zero(); self.cols];
            for c in phase1.iter_mut().skip(self.artificial_from) {
                *c = T::one();
            }
            self.optimize(&phase1, self.cols, tol);
            let infeasibility = self
                .basis
                .iter()
                .enumerate()
                .filter(|(_, &b)| b >= self.artificial_from)
                .fold(T::zero(), |acc, (r, _)| acc + self.cells[r][self.cols].clone());
            if infeasibility > slack {
                return LpOutcome::Infeasible;
            }
            // Drive zero-level artificials out of the basis; drop redundant rows.
            let mut r = 0;
            while r < self.cells.len() {
                if self.basis[r] >= self.artificial_from {
                    let col = (0..self.artificial_from)
                        .find(|&j| self.cells[r][j].magnitude() > slack);
                    match col {
                        Some(col) => {
                            self.pivot(r, col);
                            r += 1;
                        }
                        None => {
                            self.cells.remove(r);
                            self.basis.remove(r);
                        }
                    }
                } else {
                    r += 1;
                }
            }
        }
        let mut cost = vec![T::zero(); self.cols];
        cost[..lp.num_vars].clone_from_slice(&lp.objective);
        if !self.optimize(&cost, self.artificial_from, tol) {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![T::zero(); lp.num_vars];
        for (r, &b) in self.basis.iter().enumerate() {
            if b < lp.num_vars {
                x[b] = self.cells[r][self.cols].clone();
            }
        }
        let value = x
            .iter()
            .zip(&lp.objective)
            .fold(T::zero(), |acc, (xi, ci)| acc + xi.clone() * ci.clone());
        LpOutcome::Optimal { x, value }
    }
}
