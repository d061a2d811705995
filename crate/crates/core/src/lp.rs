//! Exact linear programming: `min <c,x>` subject to `<u_i,x> <= b_i`, `x` free.
//!
//! Two-phase primal simplex with Bland's rule on an integer tableau. The tableau
//! is kept fraction-free: the stored integers are the true entries times a common
//! denominator, which after each pivot is the pivot element itself.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::{dot, IVec, IndexSet};
use crate::rational::{big, common_denominator, Rat};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearProgram {
    pub variables: IndexSet,
    pub objective: Vec<Rat>,
    pub constraint_names: Vec<String>,
    pub rows: Vec<Vec<Rat>>,
    pub rhs: Vec<Rat>,
}

impl LinearProgram {
    pub fn new(variables: IndexSet, objective: Vec<Rat>) -> Result<Self> {
        if objective.len() != variables.len() {
            return Err(Error::IndexMismatch("objective length differs from the variable count".into()));
        }
        Ok(LinearProgram { variables, objective, constraint_names: Vec::new(), rows: Vec::new(), rhs: Vec::new() })
    }

    /// Adds `<row, x> <= rhs`.
    pub fn add_constraint(&mut self, name: impl Into<String>, row: Vec<Rat>, rhs: Rat) -> Result<()> {
        if row.len() != self.variables.len() {
            return Err(Error::IndexMismatch("constraint length differs from the variable count".into()));
        }
        self.constraint_names.push(name.into());
        self.rows.push(row);
        self.rhs.push(rhs);
        Ok(())
    }

    pub fn objective_ivec(&self) -> IVec {
        IVec { index: self.variables.clone(), values: self.objective.clone() }
    }

    pub fn is_feasible_point(&self, x: &[Rat]) -> bool {
        self.rows.iter().zip(&self.rhs).all(|(r, b)| dot(r, x) <= *b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpVerdict {
    /// −1 infeasible, 0 optimal, 1 unbounded.
    pub flag: i8,
    pub solution: Option<IVec>,
    pub value: Option<Rat>,
}

impl LpVerdict {
    fn infeasible() -> Self {
        LpVerdict { flag: -1, solution: None, value: None }
    }
    fn unbounded() -> Self {
        LpVerdict { flag: 1, solution: None, value: None }
    }
}

struct Tableau {
    // rows 0..m are constraints; row m is the objective (reduced costs)
    t: Vec<Vec<BigInt>>,
    basis: Vec<usize>,
    denom: BigInt,
    cols: usize,
}

enum Step {
    Optimal,
    Unbounded,
    Pivoted,
}

impl Tableau {
    fn rhs_col(&self) -> usize {
        self.cols
    }

    fn m(&self) -> usize {
        self.basis.len()
    }

    fn pivot(&mut self, r: usize, s: usize) {
        let prs = self.t[r][s].clone();
        debug_assert!(prs.is_positive());
        let row_r = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let pis = row[s].clone();
            if pis.is_zero() {
                for x in row.iter_mut() {
                    *x = &*x * &prs / &self.denom;
                }
            } else {
                for (x, rj) in row.iter_mut().zip(&row_r) {
                    *x = (&prs * &*x - &pis * rj) / &self.denom;
                }
            }
        }
        self.denom = prs;
        self.basis[r] = s;
    }

    /// One Bland step over the columns allowed by `usable`.
    fn step(&mut self, usable: usize) -> Step {
        let m = self.m();
        let Some(s) = (0..usable).find(|&j| self.t[m][j].is_negative()) else {
            return Step::Optimal;
        };
        let rc = self.rhs_col();
        let mut best: Option<usize> = None;
        for i in 0..m {
            if !self.t[i][s].is_positive() {
                continue;
            }
            best = Some(match best {
                None => i,
                Some(b) => {
                    // compare t[i][rhs]/t[i][s] with t[b][rhs]/t[b][s]
                    let lhs = &self.t[i][rc] * &self.t[b][s];
                    let rhs = &self.t[b][rc] * &self.t[i][s];
                    if lhs < rhs || (lhs == rhs && self.basis[i] < self.basis[b]) {
                        i
                    } else {
                        b
                    }
                }
            });
        }
        match best {
            None => Step::Unbounded,
            Some(r) => {
                self.pivot(r, s);
                Step::Pivoted
            }
        }
    }

    fn run(&mut self, usable: usize) -> bool {
        loop {
            match self.step(usable) {
                Step::Optimal => return true,
                Step::Unbounded => return false,
                Step::Pivoted => {}
            }
        }
    }

    /// Reprices the objective row for integer costs `c` (length `cols`).
    fn set_objective(&mut self, c: &[BigInt]) {
        let m = self.m();
        let rc = self.rhs_col();
        let mut obj: Vec<BigInt> = c.iter().map(|cj| cj * &self.denom).collect();
        obj.push(BigInt::zero());
        for i in 0..m {
            let cb = &c[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for j in 0..=rc {
                obj[j] -= cb * &self.t[i][j];
            }
        }
        self.t[m] = obj;
    }
}

fn integer_row(row: &[Rat], rhs: &Rat) -> (Vec<BigInt>, BigInt) {
    let l = common_denominator(row.iter().chain(std::iter::once(rhs)));
    let lr = big(&l);
    (row.iter().map(|x| (x * &lr).to_integer()).collect(), (rhs * &lr).to_integer())
}

pub fn solve_lp(p: &LinearProgram) -> LpVerdict {
    let n = p.variables.len();
    let m = p.rows.len();
    // columns: x+ (n), x- (n), slacks (m), artificials (na)
    let mut negative_rows = Vec::new();
    let mut rows = Vec::with_capacity(m);
    for (i, (r, b)) in p.rows.iter().zip(&p.rhs).enumerate() {
        let (ri, bi) = integer_row(r, b);
        if bi.is_negative() {
            negative_rows.push(i);
        }
        rows.push((ri, bi));
    }
    let na = negative_rows.len();
    let structural = 2 * n + m;
    let cols = structural + na;
    let mut t = Vec::with_capacity(m + 1);
    let mut basis = Vec::with_capacity(m);
    let mut art_of_row = vec![None; m];
    for (k, &i) in negative_rows.iter().enumerate() {
        art_of_row[i] = Some(k);
    }
    for (i, (ri, bi)) in rows.into_iter().enumerate() {
        let sign = if bi.is_negative() { -BigInt::one() } else { BigInt::one() };
        let mut row = vec![BigInt::zero(); cols + 1];
        for j in 0..n {
            row[j] = &sign * &ri[j];
            row[n + j] = -&sign * &ri[j];
        }
        row[2 * n + i] = sign.clone();
        row[cols] = &sign * &bi;
        match art_of_row[i] {
            Some(k) => {
                row[structural + k] = BigInt::one();
                basis.push(structural + k);
            }
            None => basis.push(2 * n + i),
        }
        t.push(row);
    }
    t.push(vec![BigInt::zero(); cols + 1]);
    let mut tab = Tableau { t, basis, denom: BigInt::one(), cols };

    if na > 0 {
        let mut c1 = vec![BigInt::zero(); cols];
        for k in 0..na {
            c1[structural + k] = BigInt::one();
        }
        tab.set_objective(&c1);
        let bounded = tab.run(cols);
        debug_assert!(bounded, "phase one is bounded below by zero");
        if tab.t[m][cols].is_negative() {
            return LpVerdict::infeasible();
        }
        drive_out_artificials(&mut tab, structural);
        for row in tab.t.iter_mut() {
            let rhs = row[cols].clone();
            row.truncate(structural);
            row.push(rhs);
        }
        tab.cols = structural;
    }

    let lc = common_denominator(p.objective.iter());
    let lcr = big(&lc);
    let mut c2 = vec![BigInt::zero(); structural];
    for j in 0..n {
        let cj = (&p.objective[j] * &lcr).to_integer();
        c2[n + j] = -cj.clone();
        c2[j] = cj;
    }
    tab.set_objective(&c2);
    if !tab.run(structural) {
        return LpVerdict::unbounded();
    }

    let mut x = vec![Rat::zero(); n];
    let rc = tab.rhs_col();
    for (i, &b) in tab.basis.iter().enumerate() {
        let v = Rat::new(tab.t[i][rc].clone(), tab.denom.clone());
        if b < n {
            x[b] += v;
        } else if b < 2 * n {
            x[b - n] -= v;
        }
    }
    let value = dot(&p.objective, &x);
    LpVerdict { flag: 0, solution: Some(IVec { index: p.variables.clone(), values: x }), value: Some(value) }
}

/// After a successful phase one every artificial still basic sits at zero; pivot it
/// out on any structural column, or drop its row when the row is redundant.
fn drive_out_artificials(tab: &mut Tableau, structural: usize) {
    let mut i = 0;
    while i < tab.m() {
        if tab.basis[i] < structural {
            i += 1;
            continue;
        }
        match (0..structural).find(|&j| !tab.t[i][j].is_zero()) {
            Some(j) => {
                if tab.t[i][j].is_negative() {
                    for x in tab.t[i].iter_mut() {
                        *x = -&*x;
                    }
                }
                tab.pivot(i, j);
                i += 1;
            }
            None => {
                tab.t.remove(i);
                tab.basis.remove(i);
            }
        }
    }
}
