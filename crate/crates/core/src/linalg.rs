//! Index-labelled vectors and matrices over exact rationals, plus the PSD test.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{big, common_denominator, int, Rat};

/// A finite, duplicate-free list of opaque labels. The order only fixes iteration.
#[derive(Clone)]
pub struct IndexSet {
    labels: Arc<Vec<String>>,
    lookup: Arc<HashMap<String, usize>>,
}

impl IndexSet {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let mut lookup = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if lookup.insert(l.clone(), i).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate index label {l:?}")));
            }
        }
        Ok(IndexSet { labels: Arc::new(labels), lookup: Arc::new(lookup) })
    }

    /// The labels `"1"`, …, `"k"`.
    pub fn range(k: usize) -> Self {
        Self::new((1..=k).map(|i| i.to_string())).expect("distinct labels")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.lookup.get(label).copied()
    }

    pub fn require(&self, label: &str) -> Result<usize> {
        self.position(label)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown index label {label:?}")))
    }

    /// Same labels as a set, regardless of order.
    pub fn same_members(&self, other: &IndexSet) -> bool {
        self.len() == other.len() && self.labels.iter().all(|l| other.lookup.contains_key(l))
    }

    /// `perm[i]` is the position in `other` of our i-th label.
    pub fn alignment(&self, other: &IndexSet) -> Result<Vec<usize>> {
        if !self.same_members(other) {
            return Err(Error::IndexMismatch(format!(
                "index sets of sizes {} and {} differ",
                self.len(),
                other.len()
            )));
        }
        Ok(self.labels.iter().map(|l| other.lookup[l]).collect())
    }
}

impl PartialEq for IndexSet {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.labels, &other.labels) || self.labels == other.labels
    }
}

impl Eq for IndexSet {}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.labels.iter()).finish()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IVec {
    pub index: IndexSet,
    pub values: Vec<Rat>,
}

impl IVec {
    pub fn new(index: IndexSet, values: Vec<Rat>) -> Result<Self> {
        if index.len() != values.len() {
            return Err(Error::IndexMismatch(format!(
                "{} labels but {} values",
                index.len(),
                values.len()
            )));
        }
        Ok(IVec { index, values })
    }

    pub fn zeros(index: &IndexSet) -> Self {
        IVec { index: index.clone(), values: vec![Rat::zero(); index.len()] }
    }

    pub fn get(&self, label: &str) -> Option<&Rat> {
        self.index.position(label).map(|i| &self.values[i])
    }

    /// Reorders the entries to follow `target`, which must have the same labels.
    pub fn aligned_to(&self, target: &IndexSet) -> Result<IVec> {
        if &self.index == target {
            return Ok(self.clone());
        }
        let perm = target.alignment(&self.index)?;
        Ok(IVec { index: target.clone(), values: perm.iter().map(|&p| self.values[p].clone()).collect() })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    L1,
    L2Squared,
    LInf,
}

pub fn inner_product(u: &IVec, v: &IVec) -> Result<Rat> {
    let v = v.aligned_to(&u.index)?;
    Ok(dot(&u.values, &v.values))
}

pub fn dot(u: &[Rat], v: &[Rat]) -> Rat {
    u.iter().zip(v).fold(Rat::zero(), |acc, (a, b)| acc + a * b)
}

pub fn norm(v: &IVec, kind: NormKind) -> Rat {
    norm_slice(&v.values, kind)
}

pub fn norm_slice(v: &[Rat], kind: NormKind) -> Rat {
    match kind {
        NormKind::L1 => v.iter().fold(Rat::zero(), |acc, x| acc + x.abs()),
        NormKind::L2Squared => v.iter().fold(Rat::zero(), |acc, x| acc + x * x),
        NormKind::LInf => v.iter().map(|x| x.abs()).max().unwrap_or_else(Rat::zero),
    }
}

/// Row-major matrix with labelled rows and columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IMat {
    pub rows: IndexSet,
    pub cols: IndexSet,
    pub data: Vec<Rat>,
}

impl IMat {
    pub fn zeros(rows: &IndexSet, cols: &IndexSet) -> Self {
        IMat { rows: rows.clone(), cols: cols.clone(), data: vec![Rat::zero(); rows.len() * cols.len()] }
    }

    pub fn identity(index: &IndexSet) -> Self {
        let mut m = Self::zeros(index, index);
        for i in 0..index.len() {
            m.set(i, i, Rat::one());
        }
        m
    }

    pub fn from_rows(rows: &IndexSet, cols: &IndexSet, entries: Vec<Vec<Rat>>) -> Result<Self> {
        if entries.len() != rows.len() || entries.iter().any(|r| r.len() != cols.len()) {
            return Err(Error::IndexMismatch("matrix shape does not match index sets".into()));
        }
        Ok(IMat { rows: rows.clone(), cols: cols.clone(), data: entries.into_iter().flatten().collect() })
    }

    pub fn square(entries: Vec<Vec<Rat>>) -> Self {
        let idx = IndexSet::range(entries.len());
        Self::from_rows(&idx, &idx, entries).expect("square input")
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn at(&self, i: usize, j: usize) -> &Rat {
        &self.data[i * self.cols.len() + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        let c = self.cols.len();
        self.data[i * c + j] = v;
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.n_rows()).all(|i| (0..i).all(|j| self.at(i, j) == self.at(j, i)))
    }

    pub fn transpose(&self) -> IMat {
        let mut t = IMat::zeros(&self.cols, &self.rows);
        for i in 0..self.n_rows() {
            for j in 0..self.n_cols() {
                t.set(j, i, self.at(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &IMat) -> Result<IMat> {
        if self.cols != other.rows {
            return Err(Error::IndexMismatch("inner dimensions differ".into()));
        }
        let mut out = IMat::zeros(&self.rows, &other.cols);
        for i in 0..self.n_rows() {
            for k in 0..self.n_cols() {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.n_cols() {
                    let v = out.at(i, j) + a * other.at(k, j);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &IVec) -> Result<IVec> {
        let v = v.aligned_to(&self.cols)?;
        let values = (0..self.n_rows())
            .map(|i| dot(&self.data[i * self.n_cols()..(i + 1) * self.n_cols()], &v.values))
            .collect();
        Ok(IVec { index: self.rows.clone(), values })
    }

    pub fn scale(&self, c: &Rat) -> IMat {
        IMat { rows: self.rows.clone(), cols: self.cols.clone(), data: self.data.iter().map(|x| x * c).collect() }
    }

    pub fn add(&self, other: &IMat) -> Result<IMat> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::IndexMismatch("matrix index sets differ".into()));
        }
        Ok(IMat {
            rows: self.rows.clone(),
            cols: self.cols.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &IMat) -> Result<IMat> {
        self.add(&other.scale(&int(-1)))
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> Rat {
        norm_slice(&self.data, NormKind::LInf)
    }

    /// Frobenius-style pairing `sum_ij A_ij B_ij`.
    pub fn pairing(&self, other: &IMat) -> Result<Rat> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::IndexMismatch("matrix index sets differ".into()));
        }
        Ok(dot(&self.data, &other.data))
    }

    pub fn rows_vec(&self) -> Vec<Vec<Rat>> {
        self.data.chunks(self.n_cols().max(1)).map(|r| r.to_vec()).collect()
    }
}

fn require_symmetric(a: &IMat) -> Result<()> {
    if !a.is_square() {
        return Err(Error::IndexMismatch("row and column index sets differ".into()));
    }
    if !a.is_symmetric() {
        return Err(Error::InvalidArgument("matrix is not symmetric".into()));
    }
    Ok(())
}

/// Exact PSD test for a symmetric integer matrix given row by row.
///
/// Fraction-free symmetric elimination in the order of the rows. A negative
/// pivot rejects; a zero pivot is allowed only when its whole remaining row vanishes.
pub fn psd_integer(mut a: Vec<Vec<BigInt>>) -> bool {
    let n = a.len();
    let mut prev = BigInt::one();
    for k in 0..n {
        let pivot = a[k][k].clone();
        if pivot.is_negative() {
            return false;
        }
        if pivot.is_zero() {
            if (k + 1..n).any(|j| !a[k][j].is_zero()) {
                return false;
            }
            continue;
        }
        let (head, tail) = a.split_at_mut(k + 1);
        let row_k = &head[k];
        for (off, row_i) in tail.iter_mut().enumerate() {
            let i = k + 1 + off;
            let aki = &row_k[i];
            for j in i..n {
                let v = &pivot * &row_i[j] - aki * &row_k[j];
                row_i[j] = v / &prev;
            }
        }
        prev = pivot;
    }
    true
}

/// Integer form `L*A` of a rational matrix, with `L` the common denominator.
pub fn integer_scaled(a: &IMat) -> (Vec<Vec<BigInt>>, BigInt) {
    let l = common_denominator(a.data.iter());
    let n = a.n_cols();
    let rows = a
        .data
        .chunks(n.max(1))
        .map(|r| r.iter().map(|x| (x * big(&l)).to_integer()).collect())
        .collect();
    (rows, l)
}

/// Symmetric-matrix PSD test. Input is validated for squareness and symmetry.
pub fn psd_check(a: &IMat) -> Result<bool> {
    require_symmetric(a)?;
    Ok(psd_integer(integer_scaled(a).0))
}

/// PSD test of `A - t I` for the integer form of `A` with scale `l`.
fn shifted_psd(a_int: &[Vec<BigInt>], l: &BigInt, t: &Rat) -> bool {
    let (p, q) = (t.numer(), t.denom());
    let shift = l * p;
    let rows = a_int
        .iter()
        .enumerate()
        .map(|(i, r)| {
            r.iter()
                .enumerate()
                .map(|(j, x)| if i == j { q * x - &shift } else { q * x })
                .collect()
        })
        .collect();
    psd_integer(rows)
}

/// Gershgorin bound `max_i sum_j |a_ij|` on the spectral radius.
pub fn gershgorin_bound(a: &IMat) -> Rat {
    let n = a.n_cols();
    a.data
        .chunks(n.max(1))
        .map(|r| norm_slice(r, NormKind::L1))
        .max()
        .unwrap_or_else(Rat::zero)
}

/// An approximation of the least eigenvalue within `delta`, by bisection with PSD tests.
pub fn min_eigenvalue_approx(a: &IMat, delta: &Rat) -> Result<Rat> {
    require_symmetric(a)?;
    if !delta.is_positive() {
        return Err(Error::InvalidArgument("delta must be positive".into()));
    }
    let bound = gershgorin_bound(a);
    if bound.is_zero() {
        return Ok(Rat::zero());
    }
    let (a_int, l) = integer_scaled(a);
    // invariant: lo <= lambda_min <= hi
    let mut lo = -bound.clone();
    let mut hi = bound.clone();
    let span = (&bound * int(2)) / delta;
    let iterations = crate::rational::floor_log2(&span.max(Rat::one())) + 2;
    for _ in 0..iterations {
        let mid = (&lo + &hi) / int(2);
        if shifted_psd(&a_int, &l, &mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / int(2))
}

/// Whether `A - t I` is PSD, i.e. `lambda_min(A) >= t`.
pub fn psd_shift_check(a: &IMat, t: &Rat) -> Result<bool> {
    require_symmetric(a)?;
    let (a_int, l) = integer_scaled(a);
    Ok(shifted_psd(&a_int, &l, t))
}

/// Exact inverse by Gauss-Jordan elimination.
pub fn inverse(a: &IMat) -> Result<IMat> {
    if a.n_rows() != a.n_cols() {
        return Err(Error::IndexMismatch("inverse of a non-square matrix".into()));
    }
    let n = a.n_rows();
    let mut m = a.rows_vec();
    let mut inv: Vec<Vec<Rat>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }).collect()).collect();
    for c in 0..n {
        let p = (c..n)
            .find(|&r| !m[r][c].is_zero())
            .ok_or_else(|| Error::InvalidArgument("matrix is singular".into()))?;
        m.swap(c, p);
        inv.swap(c, p);
        let piv = m[c][c].clone();
        for j in 0..n {
            m[c][j] = &m[c][j] / &piv;
            inv[c][j] = &inv[c][j] / &piv;
        }
        for r in 0..n {
            if r == c || m[r][c].is_zero() {
                continue;
            }
            let f = m[r][c].clone();
            for j in 0..n {
                let t = &f * &m[c][j];
                m[r][j] -= t;
                let t = &f * &inv[c][j];
                inv[r][j] -= t;
            }
        }
    }
    IMat::from_rows(&a.cols, &a.rows, inv)
}

/// Exact determinant by fraction-free elimination with row pivoting.
pub fn determinant(a: &IMat) -> Result<Rat> {
    if a.n_rows() != a.n_cols() {
        return Err(Error::IndexMismatch("determinant of a non-square matrix".into()));
    }
    let (mut m, l) = integer_scaled(a);
    let n = m.len();
    let mut prev = BigInt::one();
    let mut sign = 1;
    for k in 0..n {
        let Some(p) = (k..n).find(|&r| !m[r][k].is_zero()) else {
            return Ok(Rat::zero());
        };
        if p != k {
            m.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[k][k] * &m[i][j] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    let det = if n == 0 { BigInt::one() } else { m[n - 1][n - 1].clone() };
    Ok(Rat::new(det * sign, num_traits::pow(l, n)))
}

/// Some solution of a sparse system `sum_j a_ij x_j = b_i`, with free
/// unknowns set to zero; `None` when the system is inconsistent.
pub fn solve_sparse(n_cols: usize, rows: &[Vec<(usize, Rat)>], rhs: &[Rat]) -> Option<Vec<Rat>> {
    // pivot column -> (row with leading entry 1 at that column, rhs)
    let mut pivots: BTreeMap<usize, (BTreeMap<usize, Rat>, Rat)> = BTreeMap::new();
    for (row, b) in rows.iter().zip(rhs) {
        let mut r: BTreeMap<usize, Rat> = BTreeMap::new();
        for (c, v) in row {
            let e = r.entry(*c).or_insert_with(Rat::zero);
            *e += v;
        }
        r.retain(|_, v| !v.is_zero());
        let mut b = b.clone();
        let mut from = 0;
        loop {
            let next = r.range(from..).map(|(c, _)| *c).find(|c| pivots.contains_key(c));
            let Some(c) = next else { break };
            let f = r.remove(&c).expect("present");
            let (prow, pb) = &pivots[&c];
            for (k, v) in prow.iter().filter(|(k, _)| **k != c) {
                let e = r.entry(*k).or_insert_with(Rat::zero);
                *e -= &f * v;
                if e.is_zero() {
                    r.remove(k);
                }
            }
            b -= &f * pb;
            from = c + 1;
        }
        match r.keys().next().copied() {
            None if b.is_zero() => {}
            None => return None,
            Some(c) => {
                let lead = r[&c].clone();
                for v in r.values_mut() {
                    *v /= &lead;
                }
                pivots.insert(c, (r, b / lead));
            }
        }
    }
    let mut x = vec![Rat::zero(); n_cols];
    for (c, (row, b)) in pivots.iter().rev() {
        let mut v = b.clone();
        for (k, a) in row.iter().filter(|(k, _)| *k != c) {
            v -= a * &x[*k];
        }
        x[*c] = v;
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn m(rows: &[&[i64]]) -> IMat {
        IMat::square(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect())
    }

    #[test]
    fn psd_examples() {
        assert!(psd_check(&m(&[&[2, 1], &[1, 2]])).unwrap());
        assert!(!psd_check(&m(&[&[1, 2], &[2, 1]])).unwrap());
        assert!(psd_check(&m(&[&[0, 0], &[0, 0]])).unwrap());
        assert!(!psd_check(&m(&[&[0, 1], &[1, 0]])).unwrap());
        assert!(psd_check(&m(&[&[1, 1], &[1, 1]])).unwrap());
        assert!(psd_check(&m(&[&[0, 0, 0], &[0, 1, 1], &[0, 1, 1]])).unwrap());
    }

    #[test]
    fn psd_rejects_asymmetric() {
        assert!(psd_check(&m(&[&[1, 2], &[0, 1]])).is_err());
    }

    #[test]
    fn eigenvalue_examples() {
        let d = rat(1, 1000);
        let l = min_eigenvalue_approx(&m(&[&[2, 1], &[1, 2]]), &d).unwrap();
        assert!((l - int(1)).abs() <= d);
        let l = min_eigenvalue_approx(&IMat::square(vec![vec![int(-3)]]), &rat(1, 100)).unwrap();
        assert!((l + int(3)).abs() <= rat(1, 100));
        assert_eq!(min_eigenvalue_approx(&m(&[&[0, 0], &[0, 0]]), &d).unwrap(), int(0));
    }

    #[test]
    fn inverse_and_determinant() {
        let a = m(&[&[2, 1], &[1, 3]]);
        let inv = inverse(&a).unwrap();
        assert_eq!(a.mul(&inv).unwrap(), IMat::identity(&a.rows));
        assert_eq!(determinant(&a).unwrap(), int(5));
        assert_eq!(determinant(&m(&[&[0, 1], &[1, 0]])).unwrap(), int(-1));
    }

    #[test]
    fn inner_product_aligns_labels() {
        let i1 = IndexSet::new(["a", "b"]).unwrap();
        let i2 = IndexSet::new(["b", "a"]).unwrap();
        let u = IVec::new(i1, vec![int(1), int(2)]).unwrap();
        let v = IVec::new(i2, vec![int(3), int(5)]).unwrap();
        assert_eq!(inner_product(&u, &v).unwrap(), int(11));
        let w = IVec::new(IndexSet::new(["c", "a"]).unwrap(), vec![int(1), int(1)]).unwrap();
        assert!(inner_product(&u, &w).is_err());
        assert_eq!(norm(&u, NormKind::L1), int(3));
        assert_eq!(norm(&u, NormKind::L2Squared), int(5));
        assert_eq!(norm(&u, NormKind::LInf), int(2));
    }
}
