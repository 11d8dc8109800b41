//! Dense two-phase simplex over exact rationals, with Bland's rule.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Row {
    pub coeffs: Vec<Q>,
    pub cmp: Cmp,
    pub rhs: Q,
}

/// `max objective · x` subject to `rows`, `x ≥ 0`.
#[derive(Clone, Debug)]
pub struct Lp {
    pub vars: usize,
    pub objective: Vec<Q>,
    pub rows: Vec<Row>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpResult {
    Infeasible,
    Unbounded,
    Optimal { x: Vec<Q>, value: Q },
}

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Exact rational value of a finite float.
pub fn from_f64(x: f64) -> Option<Q> {
    Q::from_float(x)
}

impl Lp {
    pub fn feasibility(vars: usize, rows: Vec<Row>) -> Self {
        Lp { vars, objective: vec![Q::zero(); vars], rows }
    }

    /// Checks `x` against every row and the sign constraints.
    pub fn satisfied_by(&self, x: &[Q]) -> bool {
        x.len() == self.vars
            && x.iter().all(|v| !v.is_negative())
            && self.rows.iter().all(|r| {
                let lhs: Q = r.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
                match r.cmp {
                    Cmp::Le => lhs <= r.rhs,
                    Cmp::Ge => lhs >= r.rhs,
                    Cmp::Eq => lhs == r.rhs,
                }
            })
    }

    pub fn solve(&self) -> LpResult {
        Tableau::build(self).run(&self.objective)
    }

    /// Multipliers `y` proving infeasibility: `y ≥ 0` on `≥` rows, `y ≤ 0` on `≤` rows,
    /// free on `=` rows, with `Σ y_k a_k ≤ 0` componentwise and `Σ y_k b_k > 0`.
    pub fn farkas(&self) -> Option<Vec<Q>> {
        // Variables: one nonnegative y per Ge/Le row (sign folded in), y⁺ and y⁻ per Eq row.
        let mut cols: Vec<(usize, Q)> = Vec::new();
        for (k, r) in self.rows.iter().enumerate() {
            match r.cmp {
                Cmp::Ge => cols.push((k, q(1))),
                Cmp::Le => cols.push((k, q(-1))),
                Cmp::Eq => {
                    cols.push((k, q(1)));
                    cols.push((k, q(-1)));
                }
            }
        }
        let mut rows: Vec<Row> = (0..self.vars)
            .map(|j| Row {
                coeffs: cols.iter().map(|(k, s)| s * &self.rows[*k].coeffs[j]).collect(),
                cmp: Cmp::Le,
                rhs: Q::zero(),
            })
            .collect();
        rows.push(Row { coeffs: cols.iter().map(|(k, s)| s * &self.rows[*k].rhs).collect(), cmp: Cmp::Eq, rhs: q(1) });
        match Lp::feasibility(cols.len(), rows).solve() {
            LpResult::Optimal { x, .. } => {
                let mut y = vec![Q::zero(); self.rows.len()];
                for ((k, s), v) in cols.iter().zip(&x) {
                    y[*k] += s * v;
                }
                Some(y)
            }
            _ => None,
        }
    }

    /// Verifies a certificate produced by [`Lp::farkas`].
    pub fn check_farkas(&self, y: &[Q]) -> bool {
        if y.len() != self.rows.len() {
            return false;
        }
        let signs_ok = self.rows.iter().zip(y).all(|(r, v)| match r.cmp {
            Cmp::Ge => !v.is_negative(),
            Cmp::Le => !v.is_positive(),
            Cmp::Eq => true,
        });
        let combo_ok = (0..self.vars).all(|j| {
            let s: Q = self.rows.iter().zip(y).map(|(r, v)| v * &r.coeffs[j]).sum();
            !s.is_positive()
        });
        let rhs: Q = self.rows.iter().zip(y).map(|(r, v)| v * &r.rhs).sum();
        signs_ok && combo_ok && rhs.is_positive()
    }
}

/// Rows are negated so the right-hand side is nonnegative, and `≥ 0` rows become `≤ 0`.
fn flipped(r: &Row) -> bool {
    r.rhs.is_negative() || (r.rhs.is_zero() && r.cmp == Cmp::Ge)
}

fn needs_artificial(r: &Row) -> bool {
    match r.cmp {
        Cmp::Eq => true,
        Cmp::Le => flipped(r),
        Cmp::Ge => !flipped(r),
    }
}

struct Tableau {
    /// Constraint rows; the last entry of each is the right-hand side.
    t: Vec<Vec<Q>>,
    basis: Vec<usize>,
    vars: usize,
    /// Columns at or beyond this index are artificial.
    first_art: usize,
}

impl Tableau {
    fn build(lp: &Lp) -> Self {
        let m = lp.rows.len();
        let extra = lp.rows.iter().filter(|r| r.cmp != Cmp::Eq).count();
        let arts = lp.rows.iter().filter(|r| needs_artificial(r)).count();
        let width = lp.vars + extra + arts;
        let first_art = lp.vars + extra;
        let mut t = vec![vec![Q::zero(); width + 1]; m];
        let mut basis = vec![0; m];
        let (mut slack, mut art) = (lp.vars, first_art);
        for (i, r) in lp.rows.iter().enumerate() {
            let flip = flipped(r);
            let sign = if flip { q(-1) } else { q(1) };
            for (j, a) in r.coeffs.iter().enumerate() {
                t[i][j] = a * &sign;
            }
            t[i][width] = &r.rhs * &sign;
            let mut slack_col = None;
            if r.cmp != Cmp::Eq {
                let s = if r.cmp == Cmp::Le { q(1) } else { q(-1) };
                t[i][slack] = s * &sign;
                slack_col = Some(slack);
                slack += 1;
            }
            match slack_col {
                Some(c) if t[i][c].is_one() => basis[i] = c,
                _ => {
                    t[i][art] = q(1);
                    basis[i] = art;
                    art += 1;
                }
            }
        }
        Tableau { t, basis, vars: lp.vars, first_art }
    }

    fn width(&self) -> usize {
        self.t.first().map_or(self.first_art, |r| r.len() - 1)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.t[row][col].clone();
        for v in self.t[row].iter_mut() {
            *v /= &p;
        }
        let pivot_row = self.t[row].clone();
        for (i, r) in self.t.iter_mut().enumerate() {
            if i == row || r[col].is_zero() {
                continue;
            }
            let f = r[col].clone();
            for (v, pv) in r.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Maximizes `cost` over the columns below `limit`. Returns false when unbounded.
    fn optimize(&mut self, cost: &[Q], limit: usize) -> bool {
        let w = self.width();
        loop {
            let entering = (0..limit).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let z: Q = self.t.iter().zip(&self.basis).map(|(r, &b)| &cost[b] * &r[j]).sum();
                &cost[j] - z > Q::zero()
            });
            let Some(j) = entering else { return true };
            let mut best: Option<(usize, Q)> = None;
            for (i, r) in self.t.iter().enumerate() {
                if r[j].is_positive() {
                    let ratio = &r[w] / &r[j];
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            match best {
                Some((i, _)) => self.pivot(i, j),
                None => return false,
            }
        }
    }

    fn run(mut self, objective: &[Q]) -> LpResult {
        let w = self.width();
        if self.first_art < w {
            let cost: Vec<Q> = (0..w).map(|j| if j >= self.first_art { q(-1) } else { Q::zero() }).collect();
            self.optimize(&cost, w);
            let infeasibility: Q = self.t.iter().zip(&self.basis).filter(|(_, &b)| b >= self.first_art).map(|(r, _)| r[w].clone()).sum();
            if infeasibility.is_positive() {
                return LpResult::Infeasible;
            }
            // Drive zero-level artificials out, dropping redundant rows.
            let mut i = 0;
            while i < self.t.len() {
                if self.basis[i] >= self.first_art {
                    match (0..self.first_art).find(|&j| !self.t[i][j].is_zero()) {
                        Some(j) => self.pivot(i, j),
                        None => {
                            self.t.remove(i);
                            self.basis.remove(i);
                            continue;
                        }
                    }
                }
                i += 1;
            }
        }
        let mut cost = vec![Q::zero(); w];
        cost[..self.vars].clone_from_slice(objective);
        if !self.optimize(&cost, self.first_art) {
            return LpResult::Unbounded;
        }
        let mut x = vec![Q::zero(); self.vars];
        for (r, &b) in self.t.iter().zip(&self.basis) {
            if b < self.vars {
                x[b] = r[w].clone();
            }
        }
        let value = x.iter().zip(objective).map(|(a, c)| a * c).sum();
        LpResult::Optimal { x, value }
    }
}
