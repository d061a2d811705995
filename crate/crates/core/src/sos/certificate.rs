//! Exact refutation certificates found by linear algebra.
//!
//! Equations of the system get free polynomial multipliers; Boolean axioms
//! and single-monomial equations are applied implicitly by working with
//! multilinear monomials that no vanishing monomial divides. When the system is
//! small, inequalities also get nonnegative multiples of squared juntas and of
//! squared sums and differences of two monomials, and the search becomes an LP. A solution is expanded into Gram matrices for
//! every block of the encoding and checked with [`verify_refutation`].

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Signed, Zero};

use super::{monomials_up_to, verify_certificate, BlockCertificate, CertificateBlock, Monomial, PolySystem, Polynomial};
use crate::error::{Error, Result};
use crate::linalg::{solve_sparse, IndexSet};
use crate::lp::{solve_lp, LinearProgram};
use crate::rational::Rat;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Role {
    /// `x_i^2 - x_i` or its negation.
    Boolean(usize, bool),
    /// `c * m` with `m` multilinear, whose negation is also present.
    Vanishing,
    /// Any other polynomial whose negation is present; `partner` is that block.
    Equation { partner: usize },
    /// Partner of an equation already counted.
    Mirror,
    Inequality,
}

struct Plan<'a> {
    n: usize,
    d: u32,
    blocks: Vec<(&'a Polynomial, u32)>,
    roles: Vec<Role>,
    /// Vanishing monomial supports with their block.
    vanishing: Vec<(Monomial, usize)>,
}

fn multilinear(m: &Monomial) -> Monomial {
    Monomial::from_exponents(m.exponents().iter().map(|&e| e.min(1)).collect())
}

fn divides(a: &Monomial, b: &Monomial) -> bool {
    a.exponents().iter().zip(b.exponents()).all(|(x, y)| x <= y)
}

fn quotient(a: &Monomial, b: &Monomial) -> Monomial {
    Monomial::from_exponents(a.exponents().iter().zip(b.exponents()).map(|(x, y)| x - y).collect())
}

impl<'a> Plan<'a> {
    fn new(n: usize, d: u32, blocks: Vec<(&'a Polynomial, u32)>) -> Self {
        let index: HashMap<&Polynomial, usize> = blocks.iter().enumerate().map(|(i, (p, _))| (*p, i)).collect();
        let mut roles = vec![Role::Inequality; blocks.len()];
        let mut vanishing = Vec::new();
        for (i, (p, _)) in blocks.iter().enumerate() {
            let Some(&partner) = index.get(&p.neg()) else { continue };
            if let Some(v) = boolean_axiom(p) {
                roles[i] = Role::Boolean(v.0, v.1);
                continue;
            }
            let terms: Vec<_> = p.terms().collect();
            if terms.len() == 1 && terms[0].0.degree() >= 1 && multilinear(terms[0].0) == *terms[0].0 {
                roles[i] = Role::Vanishing;
                let m = terms[0].0.clone();
                if !vanishing.iter().any(|(v, _)| *v == m) {
                    vanishing.push((m, i));
                }
                continue;
            }
            roles[i] = if partner < i { Role::Mirror } else { Role::Equation { partner } };
        }
        Plan { n, d, blocks, roles, vanishing }
    }

    /// Whether the multilinear `m` is a multiple of a vanishing monomial within budget.
    fn killer(&self, m: &Monomial) -> Option<(usize, Monomial)> {
        self.vanishing.iter().find_map(|(v, b)| {
            let budget = self.blocks[*b].1;
            (divides(v, m) && m.degree() - v.degree() <= 2 * budget).then(|| (*b, v.clone()))
        })
    }

    fn reduce(&self, p: &Polynomial) -> BTreeMap<Monomial, Rat> {
        let mut out: BTreeMap<Monomial, Rat> = BTreeMap::new();
        for (m, c) in p.terms() {
            let m = multilinear(m);
            if self.killer(&m).is_some() {
                continue;
            }
            *out.entry(m).or_insert_with(Rat::zero) += c;
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    fn live_multilinear(&self, deg: u32) -> Vec<Monomial> {
        multilinear_up_to(self.n, deg).into_iter().filter(|m| self.killer(m).is_none()).collect()
    }
}

fn boolean_axiom(p: &Polynomial) -> Option<(usize, bool)> {
    let terms: Vec<_> = p.terms().collect();
    if terms.len() != 2 {
        return None;
    }
    let (sq, lin) = if terms[0].0.degree() == 2 { (terms[0], terms[1]) } else { (terms[1], terms[0]) };
    let i = lin.0.exponents().iter().position(|&e| e == 1)?;
    let ok = lin.0.degree() == 1 && sq.0.exponents()[i] == 2 && sq.0.degree() == 2 && (sq.1 + lin.1).is_zero() && sq.1.abs().is_one();
    ok.then(|| (i, sq.1.is_positive()))
}

fn multilinear_up_to(n: usize, deg: u32) -> Vec<Monomial> {
    fn rec(start: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        out.push(Monomial::from_exponents(cur.clone()));
        if left == 0 {
            return;
        }
        for i in start..cur.len() {
            cur[i] = 1;
            rec(i + 1, left - 1, cur, out);
            cur[i] = 0;
        }
    }
    let mut out = Vec::new();
    rec(0, deg, &mut vec![0; n], &mut out);
    out.sort();
    out
}

fn multilinear_count(n: usize, deg: u32) -> usize {
    let mut c: usize = 1;
    let mut total: usize = 1;
    for i in 0..deg as usize {
        if i >= n {
            break;
        }
        c = c.saturating_mul(n - i) / (i + 1);
        total = total.saturating_add(c);
    }
    total
}

/// Products of at most `deg` factors `x_i` or `1 - x_i` over distinct variables.
fn juntas(n: usize, deg: u32) -> Vec<Polynomial> {
    fn rec(start: usize, left: u32, cur: Polynomial, out: &mut Vec<Polynomial>) {
        out.push(cur.clone());
        if left == 0 {
            return;
        }
        let n = cur.n_vars();
        for i in start..n {
            let x = Polynomial::var(n, i);
            let nx = Polynomial::constant(n, Rat::one()).sub(&x);
            rec(i + 1, left - 1, cur.mul(&x), out);
            rec(i + 1, left - 1, cur.mul(&nx), out);
        }
    }
    let mut out = Vec::new();
    rec(0, deg, Polynomial::constant(n, Rat::one()), &mut out);
    out
}

/// Squared juntas and, with `pairs`, `m + m'` and `m - m'` for multilinear
/// monomials of degree at most `deg`; with pairs their nonnegative combinations
/// include every diagonally dominant Gram matrix on that basis.
fn square_roots(n: usize, deg: u32, pairs: bool) -> Vec<Polynomial> {
    let mut out = juntas(n, deg);
    if pairs {
        let monos = multilinear_up_to(n, deg);
        let one = Rat::one();
        for (i, a) in monos.iter().enumerate() {
            for b in &monos[i + 1..] {
                let pa = Polynomial::from_terms(n, [(a.clone(), one.clone())]);
                let pb = Polynomial::from_terms(n, [(b.clone(), one.clone())]);
                out.push(pa.add(&pb));
                out.push(pa.sub(&pb));
            }
        }
    }
    let mut seen = std::collections::BTreeSet::new();
    out.retain(|p| seen.insert(p.clone()));
    out
}

/// An upper bound on `square_roots(n, deg, pairs).len()`.
fn square_root_count(n: usize, deg: u32, pairs: bool) -> usize {
    let mut juntas: usize = 0;
    let mut choose: usize = 1;
    for k in 0..=deg as usize {
        if k > n {
            break;
        }
        if k > 0 {
            choose = choose.saturating_mul(n - k + 1) / k;
        }
        juntas = juntas.saturating_add(choose.saturating_mul(1 << k.min(40)));
    }
    if !pairs {
        return juntas;
    }
    let m = multilinear_count(n, deg);
    juntas.saturating_add(m.saturating_mul(m.saturating_sub(1)))
}

enum Column {
    Free { block: usize, monomial: Monomial },
    Square { block: usize, junta: Polynomial },
}

/// Limits for the exact search.
#[derive(Clone, Debug)]
pub struct ExactLimits {
    /// Largest number of unknowns for the equation-only linear system.
    pub max_unknowns: usize,
    /// Largest number of columns for the LP that also uses inequalities.
    pub max_lp_columns: usize,
    /// Largest LP for which squared sums and differences of monomials are added.
    pub max_pair_lp_columns: usize,
    /// Rounds of adding a squared negative direction of the dual point.
    pub generation_rounds: usize,
}

impl Default for ExactLimits {
    fn default() -> Self {
        ExactLimits { max_unknowns: 20_000, max_lp_columns: 400, max_pair_lp_columns: 200, generation_rounds: 6 }
    }
}

/// Looks for an exact degree-`2d` refutation, already checked at `eps = 0`.
pub fn exact_refutation(q: &PolySystem, d: u32, limits: &ExactLimits) -> Result<Option<BlockCertificate>> {
    let closure = super::closure(q, d)?;
    let blocks: Vec<(&Polynomial, u32)> = closure.iter().map(|(_, p, b)| (p, *b)).collect();
    let plan = Plan::new(q.n(), d, blocks);

    let mut columns = Vec::new();
    let equations = plan.roles.iter().filter(|r| matches!(r, Role::Equation { .. })).count();
    let widest = plan.blocks.iter().map(|(_, b)| *b).max().unwrap_or(0);
    if equations.saturating_mul(multilinear_count(plan.n, 2 * widest)) > limits.max_unknowns.saturating_mul(8) {
        return Ok(None);
    }
    for (i, role) in plan.roles.iter().enumerate() {
        if let Role::Equation { .. } = role {
            for m in plan.live_multilinear(2 * plan.blocks[i].1) {
                columns.push(Column::Free { block: i, monomial: m });
            }
        }
    }
    let free_count = columns.len();
    let solution = if free_count > 0 && free_count <= limits.max_unknowns {
        solve_equations(&plan, &columns)
    } else {
        None
    };
    let solution = match solution {
        Some(s) => Some(s),
        None => {
            let estimate = |pairs: bool| {
                plan.roles
                    .iter()
                    .zip(&plan.blocks)
                    .filter(|(r, _)| **r == Role::Inequality)
                    .map(|(_, (_, b))| square_root_count(plan.n, *b, pairs))
                    .fold(columns.len(), usize::saturating_add)
            };
            let pairs = estimate(true) <= limits.max_pair_lp_columns.min(limits.max_lp_columns);
            if !pairs && estimate(false) > limits.max_lp_columns {
                return Ok(None);
            }
            for (i, role) in plan.roles.iter().enumerate() {
                if *role == Role::Inequality {
                    for j in square_roots(plan.n, plan.blocks[i].1, pairs) {
                        columns.push(Column::Square { block: i, junta: j });
                    }
                }
            }
            if columns.len() > limits.max_lp_columns {
                None
            } else {
                solve_with_generation(&plan, &mut columns, limits)
            }
        }
    };
    let Some(values) = solution else { return Ok(None) };
    let names: Vec<String> = closure.iter().map(|(n, _, _)| n.clone()).collect();
    Ok(Some(assemble(q, &plan, &names, &columns, &values)?))
}

fn column_image(plan: &Plan, col: &Column) -> BTreeMap<Monomial, Rat> {
    match col {
        Column::Free { block, monomial } => {
            let m = Polynomial::from_terms(plan.n, [(monomial.clone(), Rat::one())]);
            plan.reduce(&plan.blocks[*block].0.mul(&m))
        }
        Column::Square { block, junta } => plan.reduce(&plan.blocks[*block].0.mul(&junta.mul(junta))),
    }
}

fn rows_of(plan: &Plan, columns: &[Column]) -> (Vec<Vec<(usize, Rat)>>, Vec<Rat>) {
    let images: Vec<_> = columns.iter().map(|c| column_image(plan, c)).collect();
    let mut row_of: BTreeMap<Monomial, usize> = BTreeMap::new();
    row_of.insert(Monomial::one(plan.n), 0);
    let mut rows: Vec<Vec<(usize, Rat)>> = vec![Vec::new()];
    for (j, img) in images.iter().enumerate() {
        for (m, c) in img {
            let next = rows.len();
            let r = *row_of.entry(m.clone()).or_insert(next);
            if r == rows.len() {
                rows.push(Vec::new());
            }
            rows[r].push((j, c.clone()));
        }
    }
    let mut rhs = vec![Rat::zero(); rows.len()];
    rhs[0] = -Rat::one();
    (rows, rhs)
}

fn solve_equations(plan: &Plan, columns: &[Column]) -> Option<Vec<Rat>> {
    let (rows, rhs) = rows_of(plan, columns);
    solve_sparse(columns.len(), &rows, &rhs)
}

fn solve_with_inequalities(plan: &Plan, columns: &[Column]) -> Option<Vec<Rat>> {
    let (rows, rhs) = rows_of(plan, columns);
    let vars = IndexSet::range(columns.len());
    let mut lp = LinearProgram::new(vars, vec![Rat::zero(); columns.len()]).ok()?;
    for (r, (row, b)) in rows.iter().zip(&rhs).enumerate() {
        let mut dense = vec![Rat::zero(); columns.len()];
        for (j, c) in row {
            dense[*j] += c;
        }
        let neg: Vec<Rat> = dense.iter().map(|v| -v).collect();
        lp.add_constraint(format!("m{r}<="), dense, b.clone()).ok()?;
        lp.add_constraint(format!("m{r}>="), neg, -b.clone()).ok()?;
    }
    for (j, col) in columns.iter().enumerate() {
        if let Column::Square { .. } = col {
            let mut row = vec![Rat::zero(); columns.len()];
            row[j] = -Rat::one();
            lp.add_constraint(format!("nonneg{j}"), row, Rat::zero()).ok()?;
        }
    }
    let verdict = solve_lp(&lp);
    if verdict.flag != 0 {
        return None;
    }
    verdict.solution.map(|s| s.values)
}

/// The inequality LP, grown by columns `(v . basis)^2` where `v` is a negative
/// direction of a localizing matrix at the LP's dual point.
fn solve_with_generation(plan: &Plan, columns: &mut Vec<Column>, limits: &ExactLimits) -> Option<Vec<Rat>> {
    for _ in 0..=limits.generation_rounds {
        if let Some(s) = solve_with_inequalities(plan, columns) {
            return Some(s);
        }
        if columns.len() >= limits.max_lp_columns {
            return None;
        }
        let y = dual_point(plan, columns)?;
        let value = |p: &BTreeMap<Monomial, Rat>| p.iter().fold(Rat::zero(), |acc, (m, c)| acc + c * y.get(m).cloned().unwrap_or_else(Rat::zero));
        let mut added = false;
        for (b, role) in plan.roles.iter().enumerate() {
            if *role != Role::Inequality {
                continue;
            }
            let (poly, budget) = plan.blocks[b];
            let basis = multilinear_up_to(plan.n, budget);
            let m: Vec<Vec<Rat>> = basis
                .iter()
                .map(|bi| {
                    basis
                        .iter()
                        .map(|bj| {
                            let prod = Polynomial::from_terms(plan.n, [(bi.mul(bj), Rat::one())]);
                            value(&plan.reduce(&poly.mul(&prod)))
                        })
                        .collect()
                })
                .collect();
            if let Some(v) = negative_direction(m) {
                let root = Polynomial::from_terms(plan.n, basis.iter().cloned().zip(v));
                columns.push(Column::Square { block: b, junta: root });
                added = true;
            }
        }
        if !added {
            // the dual point is a pseudoexpectation for these blocks
            return None;
        }
    }
    None
}

/// A pseudo-moment vector `y` with `y(1) = 1`, `y(p m) = 0` on equation columns
/// and `y(p s^2) >= 0` on square columns; it exists exactly when the LP fails.
fn dual_point(plan: &Plan, columns: &[Column]) -> Option<BTreeMap<Monomial, Rat>> {
    let images: Vec<_> = columns.iter().map(|c| column_image(plan, c)).collect();
    let mut monos: Vec<Monomial> = vec![Monomial::one(plan.n)];
    for img in &images {
        monos.extend(img.keys().cloned());
    }
    monos.sort();
    monos.dedup();
    let pos: HashMap<&Monomial, usize> = monos.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut lp = LinearProgram::new(IndexSet::range(monos.len()), vec![Rat::zero(); monos.len()]).ok()?;
    for (j, (col, img)) in columns.iter().zip(&images).enumerate() {
        let mut row = vec![Rat::zero(); monos.len()];
        for (m, c) in img {
            row[pos[m]] = -c.clone();
        }
        if let Column::Free { .. } = col {
            let neg: Vec<Rat> = row.iter().map(|v| -v).collect();
            lp.add_constraint(format!("eq{j}-"), neg, Rat::zero()).ok()?;
        }
        lp.add_constraint(format!("col{j}"), row, Rat::zero()).ok()?;
    }
    let one = pos[&Monomial::one(plan.n)];
    let mut row = vec![Rat::zero(); monos.len()];
    row[one] = Rat::one();
    lp.add_constraint("one<=", row.clone(), Rat::one()).ok()?;
    lp.add_constraint("one>=", row.iter().map(|v| -v).collect(), -Rat::one()).ok()?;
    let verdict = solve_lp(&lp);
    let values = verdict.solution?.values;
    Some(monos.into_iter().zip(values).collect())
}

/// An exact `v` with `v^T m v < 0`, or `None` when `m` is PSD.
fn negative_direction(m: Vec<Vec<Rat>>) -> Option<Vec<Rat>> {
    let n = m.len();
    if n == 0 {
        return None;
    }
    if let Some(k) = (0..n).find(|&k| m[k][k].is_negative()) {
        let mut v = vec![Rat::zero(); n];
        v[k] = Rat::one();
        return Some(v);
    }
    match (0..n).find(|&k| m[k][k].is_positive()) {
        Some(k) => {
            // v^T m v equals w^T S w for the Schur complement S of the pivot
            let rest: Vec<usize> = (0..n).filter(|&i| i != k).collect();
            let schur: Vec<Vec<Rat>> =
                rest.iter().map(|&i| rest.iter().map(|&j| &m[i][j] - &m[i][k] * &m[k][j] / &m[k][k]).collect()).collect();
            let w = negative_direction(schur)?;
            let mut v = vec![Rat::zero(); n];
            let mut dot = Rat::zero();
            for (&i, wi) in rest.iter().zip(&w) {
                v[i] = wi.clone();
                dot += &m[k][i] * wi;
            }
            v[k] = -dot / &m[k][k];
            Some(v)
        }
        None => {
            let (i, j) = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).find(|&(i, j)| !m[i][j].is_zero())?;
            let mut v = vec![Rat::zero(); n];
            v[i] = Rat::one();
            v[j] = if m[i][j].is_positive() { -Rat::one() } else { Rat::one() };
            Some(v)
        }
    }
}

/// Splits `m` into two factors of degree at most `ceil(deg/2)`.
fn halves(m: &Monomial) -> (Monomial, Monomial) {
    let mut left = vec![0; m.exponents().len()];
    let mut need = m.degree().div_ceil(2);
    for (i, &e) in m.exponents().iter().enumerate() {
        let take = e.min(need);
        left[i] = take;
        need -= take;
    }
    let a = Monomial::from_exponents(left);
    let b = quotient(m, &a);
    (a, b)
}

fn assemble(q: &PolySystem, plan: &Plan, names: &[String], columns: &[Column], values: &[Rat]) -> Result<BlockCertificate> {
    let n = plan.n;
    // free multipliers per block and Gram contributions from squares
    let mut free: Vec<Polynomial> = vec![Polynomial::zero(n); plan.blocks.len()];
    let mut squares: Vec<Vec<(Polynomial, Rat)>> = vec![Vec::new(); plan.blocks.len()];
    for (col, v) in columns.iter().zip(values) {
        if v.is_zero() {
            continue;
        }
        match col {
            Column::Free { block, monomial } => free[*block].add_term(monomial.clone(), v.clone()),
            Column::Square { block, junta } => squares[*block].push((junta.clone(), v.clone())),
        }
    }
    let mut residual = Polynomial::constant(n, Rat::one());
    for (i, (p, _)) in plan.blocks.iter().enumerate() {
        residual = residual.add(&p.mul(&free[i]));
        for (j, c) in &squares[i] {
            residual = residual.add(&p.mul(&j.mul(j)).scale(c));
        }
    }
    // clear what the implicit axioms account for, highest degree first
    let boolean_block: HashMap<(usize, bool), usize> = plan
        .roles
        .iter()
        .enumerate()
        .filter_map(|(b, r)| if let Role::Boolean(i, pos) = r { Some(((*i, *pos), b)) } else { None })
        .collect();
    while let Some((m, c)) = residual.terms().last().map(|(m, c)| (m.clone(), c.clone())) {
        if let Some(i) = m.exponents().iter().position(|&e| e >= 2) {
            let block = boolean_block[&(i, true)];
            let r = quotient(&m, &Monomial::var(n, i).mul(&Monomial::var(n, i)));
            let mult = Polynomial::from_terms(n, [(r, -c.clone())]);
            residual = residual.add(&plan.blocks[block].0.mul(&mult));
            free[block] = free[block].add(&mult);
        } else if let Some((block, v)) = plan.killer(&m) {
            let coef = plan.blocks[block].0.coefficient(&v);
            let mult = Polynomial::from_terms(n, [(quotient(&m, &v), -c / coef)]);
            residual = residual.add(&plan.blocks[block].0.mul(&mult));
            free[block] = free[block].add(&mult);
        } else {
            return Err(Error::Invariant(format!("certificate residual keeps a live monomial (degree {})", m.degree())));
        }
    }

    let mut blocks = Vec::with_capacity(plan.blocks.len());
    let mut shifts: Vec<Rat> = vec![Rat::zero(); plan.blocks.len()];
    let mut grams = Vec::with_capacity(plan.blocks.len());
    for (b, (poly, budget)) in plan.blocks.iter().enumerate() {
        let basis = monomials_up_to(n, *budget);
        let pos: HashMap<&Monomial, usize> = basis.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let mut gram: BTreeMap<(usize, usize), Rat> = BTreeMap::new();
        for (m, c) in free[b].terms() {
            let (a, bb) = halves(m);
            let (i, j) = (pos[&a].min(pos[&bb]), pos[&a].max(pos[&bb]));
            let v = if i == j { c.clone() } else { c / Rat::from_integer(2.into()) };
            *gram.entry((i, j)).or_insert_with(Rat::zero) += v;
        }
        for (junta, c) in &squares[b] {
            let v: Vec<(usize, Rat)> = basis
                .iter()
                .enumerate()
                .map(|(i, m)| (i, junta.coefficient(m)))
                .filter(|(_, x)| !x.is_zero())
                .collect();
            for (i, vi) in &v {
                for (j, vj) in &v {
                    if i <= j {
                        *gram.entry((*i, *j)).or_insert_with(Rat::zero) += c * vi * vj;
                    }
                }
            }
        }
        let mirror = match plan.roles[b] {
            Role::Equation { partner } => Some(partner),
            Role::Boolean(i, true) => Some(boolean_block[&(i, false)]),
            Role::Vanishing => plan.roles.iter().enumerate().find_map(|(k, r)| {
                (*r == Role::Vanishing && *plan.blocks[k].0 == poly.neg()).then_some(k)
            }),
            _ => None,
        };
        if let (Some(m), false) = (mirror, free[b].is_zero()) {
            // G + sI is diagonally dominant; the mirror block gets sI so the shifts cancel
            let mut row_sums = vec![Rat::zero(); basis.len()];
            for ((i, j), v) in &gram {
                row_sums[*i] += v.abs();
                if i != j {
                    row_sums[*j] += v.abs();
                }
            }
            let shift = row_sums.into_iter().fold(Rat::zero(), |a, s| if s > a { s } else { a });
            shifts[b] += &shift;
            shifts[m] += shift;
        }
        grams.push(gram);
        let _ = poly;
    }
    for (b, mut gram) in grams.into_iter().enumerate() {
        if !shifts[b].is_zero() {
            for i in 0..monomials_up_to(n, plan.blocks[b].1).len() {
                *gram.entry((i, i)).or_insert_with(Rat::zero) += &shifts[b];
            }
        }
        let entries = gram.into_iter().filter(|(_, v)| !v.is_zero()).map(|((i, j), v)| (i, j, v)).collect();
        blocks.push(CertificateBlock {
            name: names[b].clone(),
            poly: plan.blocks[b].0.clone(),
            budget: plan.blocks[b].1,
            entries,
        });
    }
    let cert = BlockCertificate { degree: plan.d, n_vars: n, blocks };
    if !verify_certificate(&cert, q, plan.d, &Rat::zero())? {
        return Err(Error::Invariant("assembled certificate failed exact verification".into()));
    }
    Ok(cert)
}
