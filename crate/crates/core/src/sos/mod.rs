//! Polynomials over 0/1 variables, localizing matrices, the SDP encoding of
//! degree-2d SOS proofs, pseudoexpectations, and the refutation search.

pub mod certificate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::ellipsoid::CcSettings;
use crate::error::{Error, Result};
use crate::linalg::{self, IMat, IVec, IndexSet};
use crate::par;
use crate::rational::{int, Rat};
use crate::sdp::{feasibility_eps_r, EpsRVerdict, SdpSet, SymSparse};
use crate::trace::Trace;

pub use certificate::{exact_refutation, ExactLimits};

/// Dense exponent vector over the system's variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    exps: Vec<u32>,
}

impl Monomial {
    pub fn one(n: usize) -> Self {
        Monomial { exps: vec![0; n] }
    }

    pub fn var(n: usize, i: usize) -> Self {
        let mut m = Self::one(n);
        m.exps[i] = 1;
        m
    }

    pub fn from_exponents(exps: Vec<u32>) -> Self {
        Monomial { exps }
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exps
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial { exps: self.exps.iter().zip(&other.exps).map(|(a, b)| a + b).collect() }
    }

    /// Value at a 0/1 point.
    pub fn eval_bool(&self, x: &[bool]) -> bool {
        self.exps.iter().zip(x).all(|(&e, &v)| e == 0 || v)
    }

    pub fn display(&self, names: &[String]) -> String {
        if self.is_one() {
            return "1".into();
        }
        let parts: Vec<String> = self
            .exps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| if e == 1 { names[i].clone() } else { format!("{}^{}", names[i], e) })
            .collect();
        parts.join("*")
    }
}

/// Graded order: by degree, then lexicographically with earlier variables heavier.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.exps.cmp(&self.exps))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// All monomials in `n` variables of degree at most `deg`, in graded order.
pub fn monomials_up_to(n: usize, deg: u32) -> Vec<Monomial> {
    fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if i == cur.len() {
            out.push(Monomial { exps: cur.clone() });
            return;
        }
        for e in 0..=left {
            cur[i] = e;
            rec(i + 1, left - e, cur, out);
        }
        cur[i] = 0;
    }
    let mut out = Vec::new();
    rec(0, deg, &mut vec![0; n], &mut out);
    out.sort();
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<Monomial, Rat>,
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        Polynomial { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: Rat) -> Self {
        let mut p = Self::zero(n);
        p.add_term(Monomial::one(n), c);
        p
    }

    pub fn var(n: usize, i: usize) -> Self {
        let mut p = Self::zero(n);
        p.add_term(Monomial::var(n, i), Rat::one());
        p
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (Monomial, Rat)>) -> Self {
        let mut p = Self::zero(n);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn n_vars(&self) -> usize {
        self.n
    }

    pub fn add_term(&mut self, m: Monomial, c: Rat) {
        assert_eq!(m.exps.len(), self.n, "monomial arity");
        let e = self.terms.entry(m.clone()).or_insert_with(Rat::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rat {
        self.terms.get(m).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut p = self.clone();
        for (m, c) in &other.terms {
            p.add_term(m.clone(), c.clone());
        }
        p
    }

    pub fn scale(&self, c: &Rat) -> Polynomial {
        Polynomial::from_terms(self.n, self.terms.iter().map(|(m, v)| (m.clone(), v * c)))
    }

    pub fn neg(&self) -> Polynomial {
        self.scale(&-Rat::one())
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut p = Polynomial::zero(self.n);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                p.add_term(m1.mul(m2), c1 * c2);
            }
        }
        p
    }

    pub fn eval_bool(&self, x: &[bool]) -> Rat {
        self.terms
            .iter()
            .filter(|(m, _)| m.eval_bool(x))
            .fold(Rat::zero(), |acc, (_, c)| acc + c)
    }

    /// Renames variables: variable `i` becomes variable `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Polynomial {
        let terms = self.terms.iter().map(|(m, c)| {
            let mut e = vec![0; self.n];
            for (i, &x) in m.exps.iter().enumerate() {
                e[perm[i]] = x;
            }
            (Monomial { exps: e }, c.clone())
        });
        Polynomial::from_terms(self.n, terms)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..self.n).map(|i| format!("x{i}")).collect();
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| format!("{}*{}", crate::rational::format_rat(c), m.display(&names)))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Named polynomial inequalities `q >= 0` over 0/1 variables. An equation is
/// stored as the two inequalities `q >= 0` and `-q >= 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolySystem {
    pub variables: Vec<String>,
    pub polys: Vec<(String, Polynomial)>,
}

impl PolySystem {
    pub fn new(variables: Vec<String>) -> Result<Self> {
        IndexSet::new(variables.clone())?;
        Ok(PolySystem { variables, polys: Vec::new() })
    }

    pub fn n(&self) -> usize {
        self.variables.len()
    }

    pub fn add_inequality(&mut self, name: impl Into<String>, q: Polynomial) -> Result<()> {
        if q.n != self.n() {
            return Err(Error::InvalidArgument("polynomial uses undeclared variables".into()));
        }
        self.polys.push((name.into(), q));
        Ok(())
    }

    pub fn add_equation(&mut self, name: impl Into<String>, q: Polynomial) -> Result<()> {
        let name = name.into();
        self.add_inequality(format!("{name}(+)"), q.clone())?;
        self.add_inequality(format!("{name}(-)"), q.neg())
    }

    pub fn is_satisfied_by(&self, x: &[bool]) -> bool {
        self.polys.iter().all(|(_, q)| !q.eval_bool(x).is_negative())
    }

    /// The same system with variable `i` renamed to `names[perm[i]]` at position `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> PolySystem {
        let mut vars = vec![String::new(); self.n()];
        for (i, v) in self.variables.iter().enumerate() {
            vars[perm[i]] = v.clone();
        }
        PolySystem {
            variables: vars,
            polys: self.polys.iter().map(|(n, q)| (n.clone(), q.permuted(perm))).collect(),
        }
    }
}

/// `1` and, per variable, `x`, `1 - x`, `x^2 - x`, `x - x^2`.
pub fn boolean_axioms(n: usize) -> Result<Vec<Polynomial>> {
    if n < 1 {
        return Err(Error::InvalidArgument("at least one variable is required".into()));
    }
    let one = Polynomial::constant(n, Rat::one());
    let mut out = vec![one.clone()];
    for i in 0..n {
        let x = Polynomial::var(n, i);
        let sq = x.mul(&x).sub(&x);
        out.push(x.clone());
        out.push(one.sub(&x));
        out.push(sq.clone());
        out.push(sq.neg());
    }
    Ok(out)
}

/// `floor((2d - deg q) / 2)`.
pub fn degree_budget(q: &Polynomial, d: u32) -> Result<u32> {
    let dq = q.degree();
    if dq > 2 * d {
        return Err(Error::InvalidArgument(format!("degree {dq} exceeds 2d = {}", 2 * d)));
    }
    Ok((2 * d - dq) / 2)
}

/// The matrices `A_{q,t,α}` with `sum_α x^α A_{q,t,α} = q * M_t`, where
/// `M_t` is the moment matrix on the monomials of degree at most `t`.
pub fn localizing_coefficients(q: &Polynomial, t: u32) -> (Vec<Monomial>, BTreeMap<Monomial, SymSparse>) {
    let basis = monomials_up_to(q.n, t);
    let mut acc: BTreeMap<Monomial, Vec<(usize, usize, Rat)>> = BTreeMap::new();
    for (i, b) in basis.iter().enumerate() {
        for (j, g) in basis.iter().enumerate().skip(i) {
            let bg = b.mul(g);
            for (mu, c) in q.terms() {
                acc.entry(mu.mul(&bg)).or_default().push((i, j, c.clone()));
            }
        }
    }
    let out = acc.into_iter().map(|(a, e)| (a, SymSparse::from_entries(e))).collect();
    (basis, out)
}

/// `Q ∪ B_n` without duplicates, keeping polynomials of degree at most `2d`.
/// Returns `(name, polynomial, budget)`; the axioms come first.
pub fn closure(q: &PolySystem, d: u32) -> Result<Vec<(String, Polynomial, u32)>> {
    let n = q.n();
    let axioms = boolean_axioms(n)?;
    let mut names = vec!["1".to_string()];
    for v in &q.variables {
        names.push(v.clone());
        names.push(format!("1-{v}"));
        names.push(format!("{v}^2-{v}"));
        names.push(format!("{v}-{v}^2"));
    }
    let mut seen: BTreeSet<Vec<(Monomial, Rat)>> = BTreeSet::new();
    let mut out = Vec::new();
    let all = names.into_iter().zip(axioms).chain(q.polys.iter().cloned());
    for (name, p) in all {
        if p.degree() > 2 * d {
            continue;
        }
        let key: Vec<(Monomial, Rat)> = p.terms().map(|(m, c)| (m.clone(), c.clone())).collect();
        if seen.insert(key) {
            let b = degree_budget(&p, d)?;
            out.push((name, p, b));
        }
    }
    Ok(out)
}

impl PartialOrd for Polynomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Polynomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.terms.iter().cmp(other.terms.iter())
    }
}

/// One diagonal block of the encoding.
#[derive(Clone, Debug)]
pub struct Block {
    pub name: String,
    pub poly: Polynomial,
    pub budget: u32,
    pub basis: Vec<Monomial>,
    pub offset: usize,
}

/// How the SDP variables of the encoding map back to polynomial data.
#[derive(Clone, Debug)]
pub struct KdLayout {
    pub blocks: Vec<Block>,
    /// The monomials whose coefficients are constrained, one constraint pair each.
    pub moments: Vec<Monomial>,
    pub n_vars: usize,
    pub degree: u32,
}

/// The SDP set whose points are degree-`2d` SOS proofs of `p >= 0` from `Q`.
pub fn build_k_d(q: &PolySystem, p: &Polynomial, d: u32) -> Result<(SdpSet, KdLayout)> {
    if d < 1 {
        return Err(Error::InvalidArgument("d must be positive".into()));
    }
    if p.degree() > 2 * d {
        return Err(Error::InvalidArgument("target polynomial exceeds degree 2d".into()));
    }
    let n = q.n();
    let mut blocks = Vec::new();
    let mut labels = Vec::new();
    let mut offset = 0;
    let mut per_block = Vec::new();
    for (name, poly, budget) in closure(q, d)? {
        let (basis, coeffs) = localizing_coefficients(&poly, budget);
        for m in &basis {
            labels.push(format!("{}|{}", name, m.display(&q.variables)));
        }
        let len = basis.len();
        blocks.push(Block { name, poly, budget, basis, offset });
        per_block.push(coeffs);
        offset += len;
    }
    let j = IndexSet::new(labels)?;
    let moments = monomials_up_to(n, 2 * d);
    let mut set = SdpSet::new(j);
    for alpha in &moments {
        let mut entries = Vec::new();
        for (blk, coeffs) in blocks.iter().zip(&per_block) {
            if let Some(a) = coeffs.get(alpha) {
                entries.extend(a.entries.iter().map(|(i, j, v)| (i + blk.offset, j + blk.offset, v.clone())));
            }
        }
        let a = SymSparse { entries };
        let target = p.coefficient(alpha);
        let tag = alpha.display(&q.variables);
        set.add_constraint(format!("coef[{tag}]<="), a.clone(), target.clone())?;
        set.add_constraint(format!("coef[{tag}]>="), a.negated(), -target)?;
    }
    Ok((set, KdLayout { blocks, moments, n_vars: n, degree: d }))
}

/// `1 / (3 C(n + 2d - 1, 2d))`.
pub fn epsilon_nd(n: u32, d: u32) -> Rat {
    let (top, k) = (n + 2 * d - 1, 2 * d);
    let mut c = BigInt::one();
    for i in 0..k {
        c = c * BigInt::from(top - i) / BigInt::from(i + 1);
    }
    Rat::new(BigInt::one(), c * 3)
}

/// A linear functional on polynomials of degree at most `degree_bound`, stored by its monomial values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PseudoExpectation {
    pub n_vars: usize,
    pub degree_bound: u32,
    pub values: BTreeMap<Monomial, Rat>,
}

impl PseudoExpectation {
    pub fn value(&self, m: &Monomial) -> Result<&Rat> {
        self.values
            .get(m)
            .ok_or_else(|| Error::InvalidArgument("pseudoexpectation misses a monomial".into()))
    }

    pub fn apply(&self, p: &Polynomial) -> Result<Rat> {
        p.terms().try_fold(Rat::zero(), |acc, (m, c)| Ok(acc + c * self.value(m)?))
    }

    /// The point evaluation at a 0/1 assignment.
    pub fn point(n: usize, d: u32, x: &[bool]) -> Self {
        let values = monomials_up_to(n, 2 * d)
            .into_iter()
            .map(|m| {
                let v = if m.eval_bool(x) { Rat::one() } else { Rat::zero() };
                (m, v)
            })
            .collect();
        PseudoExpectation { n_vars: n, degree_bound: 2 * d, values }
    }

    /// Uniform average of functionals of the same shape.
    pub fn average(items: &[PseudoExpectation]) -> Result<Self> {
        let first = items.first().ok_or_else(|| Error::InvalidArgument("nothing to average".into()))?;
        let k = int(items.len() as i64);
        let mut values = BTreeMap::new();
        for m in first.values.keys() {
            let s = items.iter().try_fold(Rat::zero(), |acc, f| Ok::<_, Error>(acc + f.value(m)?))?;
            values.insert(m.clone(), s / &k);
        }
        Ok(PseudoExpectation { n_vars: first.n_vars, degree_bound: first.degree_bound, values })
    }

    /// Matrix `M_{q,t}(F)` with entries `F(q x^{β+γ})`.
    pub fn localizing_matrix(&self, q: &Polynomial, t: u32) -> Result<IMat> {
        let basis = monomials_up_to(self.n_vars, t);
        let mut rows = vec![vec![Rat::zero(); basis.len()]; basis.len()];
        for i in 0..basis.len() {
            for j in i..basis.len() {
                let bg = basis[i].mul(&basis[j]);
                let v = q.terms().try_fold(Rat::zero(), |acc, (mu, c)| Ok::<_, Error>(acc + c * self.value(&mu.mul(&bg))?))?;
                rows[i][j] = v.clone();
                rows[j][i] = v;
            }
        }
        Ok(IMat::square(rows))
    }
}

/// `F(1) = 1` and every localizing matrix over `Q ∪ B_n` is PSD.
pub fn check_pseudoexpectation(f: &PseudoExpectation, q: &PolySystem, d: u32) -> Result<bool> {
    if f.degree_bound != 2 * d || f.n_vars != q.n() {
        return Err(Error::InvalidArgument("pseudoexpectation shape does not match".into()));
    }
    if !f.value(&Monomial::one(q.n()))?.is_one() {
        return Ok(false);
    }
    for (_, poly, budget) in closure(q, d)? {
        if !linalg::psd_check(&f.localizing_matrix(&poly, budget)?)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Value bounds and the identity `F(x^2 m) = F(x m)`.
pub fn pe_bounds_check(f: &PseudoExpectation) -> bool {
    let d = f.degree_bound / 2;
    let (zero, one) = (Rat::zero(), Rat::one());
    for (m, v) in &f.values {
        let deg = m.degree();
        if deg <= d && (*v < zero || *v > one) {
            return false;
        }
        if deg <= 2 * d && v.abs() > one {
            return false;
        }
        for (i, &e) in m.exps.iter().enumerate() {
            if e >= 2 {
                let mut lower = m.clone();
                lower.exps[i] -= 1;
                match f.values.get(&lower) {
                    Some(w) if w == v => {}
                    _ => return false,
                }
            }
        }
    }
    true
}

/// Residual coefficients `a_α` of `sum_q q <M_{d_q}, Z_q>` for a point of the encoding.
pub fn residual_coefficients(set: &SdpSet, layout: &KdLayout, x: &[Vec<Rat>]) -> Vec<(Monomial, Rat)> {
    layout
        .moments
        .iter()
        .enumerate()
        .map(|(k, m)| (m.clone(), set.a[2 * k].pairing(x)))
        .collect()
}

/// One block `Z_q` of a proof, as upper-triangle entries over the monomial basis of degree `budget`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertificateBlock {
    pub name: String,
    pub poly: Polynomial,
    pub budget: u32,
    pub entries: Vec<(usize, usize, Rat)>,
}

impl CertificateBlock {
    pub fn dense(&self, n_vars: usize) -> Vec<Vec<Rat>> {
        let len = monomials_up_to(n_vars, self.budget).len();
        SymSparse::from_entries(self.entries.iter().cloned()).to_dense(len)
    }

    /// The polynomial `<M_budget, Z>`.
    pub fn multiplier(&self, n_vars: usize) -> Polynomial {
        let basis = monomials_up_to(n_vars, self.budget);
        let mut p = Polynomial::zero(n_vars);
        for (i, j, v) in &self.entries {
            let c = if i == j { v.clone() } else { v * int(2) };
            p.add_term(basis[*i].mul(&basis[*j]), c);
        }
        p
    }
}

/// A degree-`2d` proof stored block by block, in the order of [`closure`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockCertificate {
    pub degree: u32,
    pub n_vars: usize,
    pub blocks: Vec<CertificateBlock>,
}

impl BlockCertificate {
    /// The principal blocks of a point of `K_d(Q, -1)`.
    pub fn from_point(point: &IVec, q: &PolySystem, d: u32) -> Result<Self> {
        let target = Polynomial::constant(q.n(), -Rat::one());
        let (set, layout) = build_k_d(q, &target, d)?;
        let point = point.aligned_to(&set.variable_index())?;
        let x = set.matrix_of(&point.values);
        let blocks = layout
            .blocks
            .iter()
            .map(|b| {
                let len = b.basis.len();
                let entries = (0..len)
                    .flat_map(|i| (i..len).map(move |j| (i, j)))
                    .filter(|&(i, j)| !x[b.offset + i][b.offset + j].is_zero())
                    .map(|(i, j)| (i, j, x[b.offset + i][b.offset + j].clone()))
                    .collect();
                CertificateBlock { name: b.name.clone(), poly: b.poly.clone(), budget: b.budget, entries }
            })
            .collect();
        Ok(BlockCertificate { degree: d, n_vars: q.n(), blocks })
    }

    /// `sum_q q <M_{d_q}, Z_q>`.
    pub fn proof_polynomial(&self) -> Polynomial {
        self.blocks.iter().fold(Polynomial::zero(self.n_vars), |acc, b| {
            if b.entries.is_empty() {
                acc
            } else {
                acc.add(&b.poly.mul(&b.multiplier(self.n_vars)))
            }
        })
    }
}

/// Every block PSD, the blocks matching the closure of `q`, and the
/// residual within `eps` of the refutation target `-1`.
pub fn verify_certificate(cert: &BlockCertificate, q: &PolySystem, d: u32, eps: &Rat) -> Result<bool> {
    let closure = closure(q, d)?;
    if cert.degree != d || cert.n_vars != q.n() || cert.blocks.len() != closure.len() {
        return Err(Error::IndexMismatch("certificate blocks do not match the encoding".into()));
    }
    for (b, (_, poly, budget)) in cert.blocks.iter().zip(&closure) {
        if b.poly != *poly || b.budget != *budget {
            return Err(Error::IndexMismatch(format!("certificate block {} does not match", b.name)));
        }
        let len = monomials_up_to(q.n(), b.budget).len();
        if b.entries.iter().any(|(i, j, _)| i > j || *j >= len) {
            return Err(Error::IndexMismatch(format!("entry outside block {}", b.name)));
        }
    }
    let checks = par::par_map(&cert.blocks, |b| {
        b.entries.is_empty() || linalg::psd_check(&IMat::square(b.dense(q.n()))).unwrap_or(false)
    });
    if checks.iter().any(|ok| !ok) {
        return Ok(false);
    }
    let residual = cert.proof_polynomial().add(&Polynomial::constant(q.n(), Rat::one()));
    if residual.degree() > 2 * d {
        return Ok(false);
    }
    let ok = residual.terms().all(|(_, c)| c.abs() <= *eps);
    Ok(ok)
}

/// Every block PSD and the residual within `eps` of the refutation target `-1`.
pub fn verify_refutation(point: &IVec, q: &PolySystem, d: u32, eps: &Rat) -> Result<bool> {
    let cert = BlockCertificate::from_point(point, q, d)?;
    verify_certificate(&cert, q, d, eps)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RefutationStatus {
    Refuted,
    NotRefutable,
    Inconclusive,
}

impl RefutationStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RefutationStatus::Refuted => "REFUTED",
            RefutationStatus::NotRefutable => "NOT_REFUTABLE",
            RefutationStatus::Inconclusive => "INCONCLUSIVE",
        }
    }
}

#[derive(Clone, Debug)]
pub enum RefutationWitness {
    /// A proof accepted by [`verify_certificate`] at `epsilon`; `point` is
    /// the encoding point it came from when the ellipsoid search found it.
    Refutation { certificate: BlockCertificate, point: Option<IVec>, epsilon: Rat },
    /// An exactly verified pseudoexpectation and the assignments it averages.
    PseudoExpectation { functional: PseudoExpectation, assignments: Vec<Vec<bool>> },
}

#[derive(Clone, Debug)]
pub struct RefutationVerdict {
    pub status: RefutationStatus,
    pub witness: Option<RefutationWitness>,
    pub searched_radius: Option<Rat>,
    /// Why the search stopped when inconclusive.
    pub note: String,
}

#[derive(Clone, Debug)]
pub struct SearchOptions {
    /// Strictly increasing radii tried by the ellipsoid search.
    pub radius_schedule: Vec<Rat>,
    /// Largest number of 0/1 assignments enumerated.
    pub assignment_budget: u64,
    /// Assignments tried before enumeration (e.g. known isomorphisms).
    pub candidates: Vec<Vec<bool>>,
    /// Per-segment ellipsoid iteration cap; exhaustion makes the search inconclusive.
    pub iteration_cap: Option<u64>,
    /// Encodings with more matrix rows than this skip the ellipsoid search.
    pub max_matrix_rows: usize,
    /// Limits for the exact linear-algebra certificate search; `None` skips it.
    pub exact: Option<ExactLimits>,
    /// Run the refutation searches even after a pseudoexpectation was found, and
    /// fail if it also yields a refutation.
    pub cross_check: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            radius_schedule: (0..=8).map(|e| int(1 << e)).collect(),
            assignment_budget: 1 << 20,
            candidates: Vec::new(),
            iteration_cap: None,
            max_matrix_rows: 8,
            exact: Some(ExactLimits::default()),
            cross_check: false,
        }
    }
}

fn assignment(bits: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| bits >> i & 1 == 1).collect()
}

/// 0/1 assignments satisfying `q`: the supplied candidates first, then an
/// enumeration within the budget. Returns the satisfying ones and whether the
/// enumeration covered all of `{0,1}^n`.
pub fn satisfying_assignments(q: &PolySystem, candidates: &[Vec<bool>], budget: u64) -> (Vec<Vec<bool>>, bool) {
    let n = q.n();
    if let Some(x) = candidates.iter().find(|x| x.len() == n && q.is_satisfied_by(x)) {
        return (vec![x.clone()], false);
    }
    let complete = n < 64 && (1u64 << n) <= budget;
    let total = if complete { 1u64 << n } else { budget };
    let chunk = 1u64 << 12;
    let starts: Vec<u64> = (0..total.div_ceil(chunk)).map(|c| c * chunk).collect();
    let found = par::par_map(&starts, |&s| {
        (s..(s + chunk).min(total)).find(|&b| q.is_satisfied_by(&assignment(b, n)))
    });
    match found.into_iter().flatten().min() {
        Some(b) => (vec![assignment(b, n)], complete),
        None => (Vec::new(), complete),
    }
}

/// Number of matrix rows of the encoding at degree `2d`, without building it.
pub fn encoding_rows(q: &PolySystem, d: u32) -> Result<usize> {
    let n = q.n() as u64;
    let mut total: u64 = 0;
    for (_, _, b) in closure(q, d)? {
        total = total.saturating_add(binomial(n + b as u64, b as u64));
    }
    Ok(total.min(usize::MAX as u64) as usize)
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Looks for a degree-`2d` refutation of `q` or a pseudoexpectation ruling one out.
pub fn refutation_search(q: &PolySystem, d: u32, opts: &SearchOptions) -> Result<RefutationVerdict> {
    refutation_search_traced(q, d, opts, None)
}

/// [`refutation_search`], recording ellipsoid queries into `trace`.
pub fn refutation_search_traced(
    q: &PolySystem,
    d: u32,
    opts: &SearchOptions,
    mut trace: Option<&mut Trace>,
) -> Result<RefutationVerdict> {
    if opts.radius_schedule.windows(2).any(|w| w[1] <= w[0]) || opts.radius_schedule.iter().any(|r| !r.is_positive()) {
        return Err(Error::InvalidArgument("radius schedule must be positive and strictly increasing".into()));
    }
    let n = q.n();
    let (sat, complete) = satisfying_assignments(q, &opts.candidates, opts.assignment_budget);
    let mut pseudo = None;
    if !sat.is_empty() {
        let points: Vec<PseudoExpectation> = sat.iter().map(|x| PseudoExpectation::point(n, d, x)).collect();
        let f = PseudoExpectation::average(&points)?;
        if !check_pseudoexpectation(&f, q, d)? || !pe_bounds_check(&f) {
            return Err(Error::Invariant("point evaluation failed the pseudoexpectation check".into()));
        }
        pseudo = Some(RefutationWitness::PseudoExpectation { functional: f, assignments: sat });
        if !opts.cross_check {
            return Ok(RefutationVerdict {
                status: RefutationStatus::NotRefutable,
                witness: pseudo,
                searched_radius: None,
                note: String::new(),
            });
        }
    }

    let rows = encoding_rows(q, d)?;
    let mut note = if complete || opts.assignment_budget == 0 { String::new() } else { "assignment enumeration was partial; ".into() };
    let mut searched = None;
    let mut refutation = None;
    if let Some(limits) = &opts.exact {
        if let Some(certificate) = exact_refutation(q, d, limits)? {
            refutation = Some(RefutationWitness::Refutation { certificate, point: None, epsilon: Rat::zero() });
        }
    }
    if refutation.is_some() {
    } else if rows > opts.max_matrix_rows {
        note.push_str(&format!(
            "exact search found no certificate and the encoding has {rows} matrix rows, above the ellipsoid limit {}",
            opts.max_matrix_rows
        ));
    } else {
        let target = Polynomial::constant(n, -Rat::one());
        let (set, _) = build_k_d(q, &target, d)?;
        let eps = epsilon_nd(n as u32, d);
        let settings = CcSettings { iteration_cap: opts.iteration_cap };
        for r in &opts.radius_schedule {
            searched = Some(r.clone());
            let out = match feasibility_eps_r(&set, r, &eps, &settings, trace.as_deref_mut()) {
                Ok(o) => o,
                Err(Error::Config(msg)) => {
                    note.push_str(&format!("iteration cap reached at radius {}: {msg}", crate::rational::format_rat(r)));
                    break;
                }
                Err(e) => return Err(e),
            };
            if out.verdict == EpsRVerdict::Top {
                let point = out.weak.witness.expect("flag 1 carries a witness");
                let point = IVec::new(set.variable_index(), point.values)?;
                let certificate = BlockCertificate::from_point(&point, q, d)?;
                if !verify_certificate(&certificate, q, d, &eps)? {
                    return Err(Error::Invariant("ellipsoid witness is not an approximate refutation".into()));
                }
                refutation = Some(RefutationWitness::Refutation { certificate, point: Some(point), epsilon: eps.clone() });
                break;
            }
        }
        if refutation.is_none() && searched.is_some() && note.is_empty() {
            note = "radius schedule exhausted".into();
        }
    }
    match (refutation, pseudo) {
        (Some(_), Some(_)) => Err(Error::Invariant(
            "both a refutation and a pseudoexpectation were produced for the same system".into(),
        )),
        (Some(w), None) => Ok(RefutationVerdict {
            status: RefutationStatus::Refuted,
            witness: Some(w),
            searched_radius: searched,
            note: String::new(),
        }),
        (None, Some(w)) => Ok(RefutationVerdict {
            status: RefutationStatus::NotRefutable,
            witness: Some(w),
            searched_radius: searched,
            note: String::new(),
        }),
        (None, None) => Ok(RefutationVerdict {
            status: RefutationStatus::Inconclusive,
            witness: None,
            searched_radius: searched,
            note,
        }),
    }
}

/// `F(sum a_α x^α)` for the residual of a refutation point; a genuine
/// pseudoexpectation makes this at least `F(sum q s_q) >= 0`.
pub fn pairing_with_residual(f: &PseudoExpectation, residual: &[(Monomial, Rat)]) -> Result<Rat> {
    residual.iter().try_fold(Rat::zero(), |acc, (m, a)| Ok(acc + a * f.value(m)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn x(n: usize, i: usize) -> Polynomial {
        Polynomial::var(n, i)
    }

    fn one(n: usize) -> Polynomial {
        Polynomial::constant(n, Rat::one())
    }

    fn contradiction() -> PolySystem {
        let mut q = PolySystem::new(vec!["x".into()]).unwrap();
        q.add_equation("zero", x(1, 0)).unwrap();
        q.add_equation("one", x(1, 0).sub(&one(1))).unwrap();
        q
    }

    #[test]
    fn axioms_for_one_variable() {
        let b = boolean_axioms(1).unwrap();
        let sq = x(1, 0).mul(&x(1, 0));
        assert_eq!(b, vec![one(1), x(1, 0), one(1).sub(&x(1, 0)), sq.sub(&x(1, 0)), x(1, 0).sub(&sq)]);
        assert_eq!(boolean_axioms(2).unwrap().len(), 9);
        assert!(boolean_axioms(0).is_err());
    }

    #[test]
    fn axioms_nonnegative_on_cube() {
        for n in 1..=3 {
            for bits in 0..1u32 << n {
                let pt: Vec<bool> = (0..n).map(|i| bits >> i & 1 == 1).collect();
                assert!(boolean_axioms(n).unwrap().iter().all(|p| !p.eval_bool(&pt).is_negative()));
            }
        }
    }

    #[test]
    fn budgets() {
        assert_eq!(degree_budget(&x(1, 0), 2).unwrap(), 1);
        assert_eq!(degree_budget(&one(1), 2).unwrap(), 2);
        assert_eq!(degree_budget(&x(1, 0).mul(&x(1, 0)), 1).unwrap(), 0);
        assert!(degree_budget(&x(1, 0).mul(&x(1, 0)).mul(&x(1, 0)), 1).is_err());
    }

    #[test]
    fn localizing_coefficients_of_one() {
        let (basis, coeffs) = localizing_coefficients(&one(1), 1);
        assert_eq!(basis.len(), 2);
        assert_eq!(coeffs[&Monomial::one(1)].entries, vec![(0, 0, Rat::one())]);
        assert_eq!(coeffs[&Monomial::var(1, 0)].entries, vec![(0, 1, Rat::one())]);
        let (basis, coeffs) = localizing_coefficients(&x(1, 0), 0);
        assert_eq!(basis.len(), 1);
        assert_eq!(coeffs.len(), 1);
        assert_eq!(coeffs[&Monomial::var(1, 0)].entries, vec![(0, 0, Rat::one())]);
    }

    #[test]
    fn epsilon_values() {
        assert_eq!(epsilon_nd(1, 1), rat(1, 3));
        assert_eq!(epsilon_nd(2, 1), rat(1, 9));
        assert_eq!(epsilon_nd(3, 1), rat(1, 18));
    }

    #[test]
    fn encoding_of_trivial_proof() {
        let q = PolySystem::new(vec!["x".into()]).unwrap();
        let (set, layout) = build_k_d(&q, &one(1), 1).unwrap();
        let mut y = vec![vec![Rat::zero(); set.n()]; set.n()];
        let first = &layout.blocks[0];
        assert_eq!(first.name, "1");
        y[first.offset][first.offset] = Rat::one();
        assert!(set.contains(&y));
    }

    #[test]
    fn encoding_of_minus_one_has_no_point_at_origin() {
        let q = PolySystem::new(vec!["x".into()]).unwrap();
        let (set, _) = build_k_d(&q, &Polynomial::constant(1, -Rat::one()), 1).unwrap();
        let y = vec![vec![Rat::zero(); set.n()]; set.n()];
        assert!(!set.contains(&y));
    }

    #[test]
    fn pseudoexpectation_examples() {
        let mut q = PolySystem::new(vec!["x".into()]).unwrap();
        q.add_equation("x=0", x(1, 0)).unwrap();
        assert!(check_pseudoexpectation(&PseudoExpectation::point(1, 1, &[false]), &q, 1).unwrap());
        assert!(!check_pseudoexpectation(&PseudoExpectation::point(1, 1, &[true]), &q, 1).unwrap());

        let mut f = PseudoExpectation::point(1, 1, &[true]);
        f.values.insert(Monomial::var(1, 0), int(2));
        let free = PolySystem::new(vec!["x".into()]).unwrap();
        assert!(!check_pseudoexpectation(&f, &free, 1).unwrap());
    }

    #[test]
    fn bounds_examples() {
        assert!(pe_bounds_check(&PseudoExpectation::point(2, 1, &[true, false])));
        let all: Vec<PseudoExpectation> = (0..4)
            .map(|b| PseudoExpectation::point(2, 1, &[b & 1 == 1, b & 2 == 2]))
            .collect();
        assert!(pe_bounds_check(&PseudoExpectation::average(&all).unwrap()));
        let mut f = PseudoExpectation::point(1, 1, &[true]);
        f.values.insert(Monomial::from_exponents(vec![2]), rat(1, 2));
        assert!(!pe_bounds_check(&f));
    }

    #[test]
    fn zero_point_against_refutation_target() {
        let q = PolySystem::new(vec!["x".into()]).unwrap();
        let (set, _) = build_k_d(&q, &Polynomial::constant(1, -Rat::one()), 1).unwrap();
        let zero = IVec::zeros(&set.variable_index());
        assert!(!verify_refutation(&zero, &q, 1, &Rat::zero()).unwrap());
        assert!(verify_refutation(&zero, &q, 1, &Rat::one()).unwrap());
    }

    #[test]
    fn contradiction_is_refuted_exactly() {
        let q = contradiction();
        let v = refutation_search(&q, 1, &SearchOptions::default()).unwrap();
        assert_eq!(v.status, RefutationStatus::Refuted);
        let Some(RefutationWitness::Refutation { certificate, epsilon, .. }) = v.witness else { panic!() };
        assert!(epsilon.is_zero());
        assert!(verify_certificate(&certificate, &q, 1, &Rat::zero()).unwrap());
        assert_eq!(certificate.proof_polynomial(), Polynomial::constant(1, -Rat::one()));
    }

    #[test]
    fn satisfiable_systems_are_not_refutable() {
        let empty = PolySystem::new(vec!["x".into()]).unwrap();
        for d in 1..=2 {
            let v = refutation_search(&empty, d, &SearchOptions::default()).unwrap();
            assert_eq!(v.status, RefutationStatus::NotRefutable);
        }
        let mut q = PolySystem::new(vec!["x".into()]).unwrap();
        q.add_equation("x(1-x)", x(1, 0).mul(&one(1).sub(&x(1, 0)))).unwrap();
        let v = refutation_search(&q, 1, &SearchOptions::default()).unwrap();
        assert_eq!(v.status, RefutationStatus::NotRefutable);
        let Some(RefutationWitness::PseudoExpectation { functional, .. }) = v.witness else { panic!() };
        assert!(check_pseudoexpectation(&functional, &q, 1).unwrap());
        assert!(pe_bounds_check(&functional));
    }

    #[test]
    fn cross_check_finds_no_conflict() {
        let opts = SearchOptions { cross_check: true, ..SearchOptions::default() };
        let empty = PolySystem::new(vec!["x".into(), "y".into()]).unwrap();
        assert_eq!(refutation_search(&empty, 1, &opts).unwrap().status, RefutationStatus::NotRefutable);
    }

    #[test]
    fn schedule_must_increase() {
        let opts = SearchOptions { radius_schedule: vec![int(2), int(1)], ..SearchOptions::default() };
        assert!(refutation_search(&contradiction(), 1, &opts).is_err());
    }

    #[test]
    fn monomial_display_and_order() {
        let names = vec!["x".to_string(), "y".to_string()];
        let m = Monomial::from_exponents(vec![2, 1]);
        assert_eq!(m.display(&names), "x^2*y");
        assert_eq!(Monomial::one(2).display(&names), "1");
        let basis = monomials_up_to(2, 2);
        assert_eq!(basis.len(), 6);
        assert!(basis.windows(2).all(|w| w[0].degree() <= w[1].degree()));
    }
}
