//! Semidefinite sets `{X ⪰ 0 : <A_i, X> <= b_i}`, their separation oracle, and
//! the (R, ε) feasibility decider built on the folded ellipsoid method.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::ellipsoid::{cc_prime, CcSettings, Separation, SeparationOracle, WeakFeasibilityResult};
use crate::error::{Error, Result};
use crate::linalg::{self, IMat, IndexSet, NormKind};
use crate::lp::{solve_lp, LinearProgram};
use crate::par;
use crate::rational::{big, ceil_isqrt, ceil_log2, int, rat_pow2, Rat};
use crate::trace::Trace;

/// A symmetric matrix given by its upper triangle.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymSparse {
    /// `(i, j, v)` with `i <= j`, meaning `A_ij = A_ji = v`; no repeated positions.
    pub entries: Vec<(usize, usize, Rat)>,
}

impl SymSparse {
    /// Collects entries, symmetrizing: a lone `(i,j)` or `(j,i)` fills both
    /// positions, and two different values are averaged.
    pub fn from_entries(entries: impl IntoIterator<Item = (usize, usize, Rat)>) -> Self {
        let mut upper: BTreeMap<(usize, usize), (Option<Rat>, Option<Rat>)> = BTreeMap::new();
        for (i, j, v) in entries {
            let slot = upper.entry((i.min(j), i.max(j))).or_default();
            if i <= j {
                slot.0 = Some(v);
            } else {
                slot.1 = Some(v);
            }
        }
        let entries = upper
            .into_iter()
            .filter_map(|((i, j), (a, b))| {
                let v = match (a, b) {
                    (Some(a), Some(b)) if i != j => (a + b) / int(2),
                    (Some(a), _) => a,
                    (None, Some(b)) => b,
                    (None, None) => unreachable!(),
                };
                (!v.is_zero()).then_some((i, j, v))
            })
            .collect();
        SymSparse { entries }
    }

    /// `<A, Y> = sum_ij A_ij Y_ij`.
    pub fn pairing(&self, y: &[Vec<Rat>]) -> Rat {
        self.entries.iter().fold(Rat::zero(), |acc, (i, j, v)| {
            let t = v * &y[*i][*j];
            if i == j {
                acc + t
            } else {
                acc + t * int(2)
            }
        })
    }

    pub fn to_dense(&self, n: usize) -> Vec<Vec<Rat>> {
        let mut d = vec![vec![Rat::zero(); n]; n];
        for (i, j, v) in &self.entries {
            d[*i][*j] = v.clone();
            d[*j][*i] = v.clone();
        }
        d
    }

    pub fn negated(&self) -> Self {
        SymSparse { entries: self.entries.iter().map(|(i, j, v)| (*i, *j, -v)).collect() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SdpSet {
    pub j: IndexSet,
    pub constraint_names: Vec<String>,
    pub a: Vec<SymSparse>,
    pub b: Vec<Rat>,
}

/// An SDP set with the promise that it lies in the Euclidean ball of radius `radius` in `R^I`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircumscribedSdpSet {
    pub set: SdpSet,
    pub radius: Rat,
}

impl SdpSet {
    pub fn new(j: IndexSet) -> Self {
        SdpSet { j, constraint_names: Vec::new(), a: Vec::new(), b: Vec::new() }
    }

    pub fn add_constraint(&mut self, name: impl Into<String>, a: SymSparse, b: Rat) -> Result<()> {
        let n = self.j.len();
        if a.entries.iter().any(|(i, j, _)| *i >= n || *j >= n || i > j) {
            return Err(Error::IndexMismatch("constraint matrix entry outside J x J".into()));
        }
        self.constraint_names.push(name.into());
        self.a.push(a);
        self.b.push(b);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.j.len()
    }

    /// Unordered pairs `(i, j)`, `i <= j`, in row-major upper-triangular order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        pairs(self.n())
    }

    /// The variable index set `I`, labelled `{a,b}`.
    pub fn variable_index(&self) -> IndexSet {
        let labels = self.pairs().into_iter().map(|(i, j)| format!("{{{},{}}}", self.j.label(i), self.j.label(j)));
        IndexSet::new(labels).expect("pairs are distinct")
    }

    /// Symmetric matrix of a point of `R^I`.
    pub fn matrix_of(&self, x: &[Rat]) -> Vec<Vec<Rat>> {
        let n = self.n();
        let mut y = vec![vec![Rat::zero(); n]; n];
        for (v, (i, j)) in x.iter().zip(self.pairs()) {
            y[i][j] = v.clone();
            y[j][i] = v.clone();
        }
        y
    }

    pub fn point_of(&self, y: &[Vec<Rat>]) -> Vec<Rat> {
        self.pairs().into_iter().map(|(i, j)| y[i][j].clone()).collect()
    }

    /// The normal of constraint `i` in `R^I`: `A_ii` on the diagonal, `2 A_ij` off it.
    pub fn normal_in_pairs(&self, i: usize) -> Vec<Rat> {
        let n = self.n();
        let mut v = vec![Rat::zero(); n * (n + 1) / 2];
        for (p, q, a) in &self.a[i].entries {
            let w = if p == q { a.clone() } else { a * int(2) };
            v[pair_position(n, *p, *q)] = w;
        }
        v
    }

    /// Every linear constraint holds with slack `slack`.
    pub fn constraints_hold(&self, y: &[Vec<Rat>], slack: &Rat) -> bool {
        self.a.iter().zip(&self.b).all(|(a, b)| a.pairing(y) <= b + slack)
    }

    /// Exact membership: constraints hold and the matrix is PSD.
    pub fn contains(&self, y: &[Vec<Rat>]) -> bool {
        self.constraints_hold(y, &Rat::zero()) && linalg::psd_check(&IMat::square(y.to_vec())).unwrap_or(false)
    }

    /// Relabels `J` (and constraint names) by a bijection; `perm[i]` is the new position of index `i`.
    pub fn permuted(&self, new_j: IndexSet, perm: &[usize]) -> SdpSet {
        let a = self
            .a
            .iter()
            .map(|m| SymSparse::from_entries(m.entries.iter().map(|(i, j, v)| (perm[*i], perm[*j], v.clone()))))
            .collect();
        SdpSet { j: new_j, constraint_names: self.constraint_names.clone(), a, b: self.b.clone() }
    }
}

pub fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect()
}

pub fn pair_position(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = (i.min(j), i.max(j));
    // row i of the upper triangle starts after sum_{r<i} (n - r) entries
    i * n - i * i.saturating_sub(1) / 2 + (j - i)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Violated,
    Eigenvalue,
    Eigenvector,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SdpSeparation {
    pub flag: u8,
    pub s: Vec<Vec<Rat>>,
    pub branch: Branch,
    /// |T| in the eigenvector branch
    pub t_size: usize,
    /// `||sum v v^T||_inf` in the eigenvector branch
    pub norm: Rat,
}

fn identity(n: usize) -> Vec<Vec<Rat>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }).collect()).collect()
}

fn max_abs(m: &[Vec<Rat>]) -> Rat {
    m.iter().map(|r| linalg::norm_slice(r, NormKind::LInf)).max().unwrap_or_else(Rat::zero)
}

/// The LP over `(x, y)`: minimize `sum x_i` subject to
/// `-x_i <= ((Y - lambda I) y)_i <= x_i`, `-1 <= y_i <= 1`, `y_l = 1`.
pub fn eigenvector_lp(y: &[Vec<Rat>], lambda: &Rat, l: usize) -> LinearProgram {
    let n = y.len();
    let labels = (0..n).map(|i| format!("x{i}")).chain((0..n).map(|i| format!("y{i}")));
    let vars = IndexSet::new(labels).expect("distinct");
    let mut obj = vec![Rat::zero(); 2 * n];
    for o in obj.iter_mut().take(n) {
        *o = Rat::one();
    }
    let mut p = LinearProgram::new(vars, obj).expect("sizes match");
    for i in 0..n {
        let mut row = vec![Rat::zero(); 2 * n];
        for k in 0..n {
            let mut v = y[i][k].clone();
            if i == k {
                v -= lambda;
            }
            row[n + k] = v;
        }
        let mut up = row.clone();
        up[i] = -Rat::one();
        p.add_constraint(format!("upper{i}"), up, Rat::zero()).expect("sizes match");
        let mut lo: Vec<Rat> = row.iter().map(|v| -v).collect();
        lo[i] = -Rat::one();
        p.add_constraint(format!("lower{i}"), lo, Rat::zero()).expect("sizes match");
    }
    for i in 0..n {
        let mut e = vec![Rat::zero(); 2 * n];
        e[n + i] = Rat::one();
        let ne: Vec<Rat> = e.iter().map(|v| -v).collect();
        if i == l {
            p.add_constraint(format!("fix{i}"), e, Rat::one()).expect("sizes match");
            p.add_constraint(format!("fix{i}-"), ne, -Rat::one()).expect("sizes match");
        } else {
            p.add_constraint(format!("box{i}"), e, Rat::one()).expect("sizes match");
            p.add_constraint(format!("box{i}-"), ne, Rat::one()).expect("sizes match");
        }
    }
    p
}

/// Acceptance threshold for the eigenvector LPs: `delta / (2n)`.
pub fn eigenvector_threshold(delta: &Rat, n: usize) -> Rat {
    delta / int(2 * n as i64)
}

/// Separation oracle for `K` at the symmetric matrix `y`.
///
/// Flag 1 means every constraint holds and `lambda_min(y) > 0`. Flag 0 comes
/// with `S`, `||S||_inf = 1`, and `<S,Y> + delta >= <S,X>` for all `X` in `K`.
pub fn separation_oracle(k: &SdpSet, y: &[Vec<Rat>], delta: &Rat) -> Result<SdpSeparation> {
    if !delta.is_positive() {
        return Err(Error::InvalidArgument("delta must be positive".into()));
    }
    let n = k.n();
    if y.len() != n || y.iter().any(|r| r.len() != n) {
        return Err(Error::IndexMismatch("query matrix is not J x J".into()));
    }
    if (0..n).any(|i| (0..i).any(|j| y[i][j] != y[j][i])) {
        return Err(Error::InvalidArgument("query matrix is not symmetric".into()));
    }
    let violated: Vec<usize> = (0..k.a.len()).filter(|&i| k.a[i].pairing(y) > k.b[i]).collect();
    if !violated.is_empty() {
        let mut sum = vec![vec![Rat::zero(); n]; n];
        for &i in &violated {
            for (p, q, v) in &k.a[i].entries {
                sum[*p][*q] += v;
                if p != q {
                    sum[*q][*p] += v;
                }
            }
        }
        let d = max_abs(&sum);
        let s = if d.is_zero() {
            identity(n)
        } else {
            sum.into_iter().map(|r| r.into_iter().map(|v| v / &d).collect()).collect()
        };
        return Ok(SdpSeparation { flag: 0, s, branch: Branch::Violated, t_size: 0, norm: d });
    }
    if n == 0 {
        return Ok(SdpSeparation { flag: 1, s: Vec::new(), branch: Branch::Eigenvalue, t_size: 0, norm: Rat::zero() });
    }
    let precision = delta / int(2 * (n * n) as i64);
    let ym = IMat::square(y.to_vec());
    let lambda = linalg::min_eigenvalue_approx(&ym, &precision)?;
    if lambda > precision {
        return Ok(SdpSeparation { flag: 1, s: identity(n), branch: Branch::Eigenvalue, t_size: 0, norm: Rat::zero() });
    }
    let threshold = eigenvector_threshold(delta, n);
    let solved = par::par_range(n, |l| solve_lp(&eigenvector_lp(y, &lambda, l)));
    let mut sum = vec![vec![Rat::zero(); n]; n];
    let mut t_size = 0;
    for verdict in solved {
        if verdict.flag != 0 {
            return Err(Error::Invariant("eigenvector LP is always feasible and bounded".into()));
        }
        if verdict.value.as_ref().expect("optimal") > &threshold {
            continue;
        }
        t_size += 1;
        let sol = verdict.solution.expect("optimal");
        let v = &sol.values[n..];
        for p in 0..n {
            if v[p].is_zero() {
                continue;
            }
            for q in 0..n {
                sum[p][q] += &v[p] * &v[q];
            }
        }
    }
    if t_size == 0 {
        return Err(Error::Invariant("no index passed the eigenvector threshold".into()));
    }
    let d = max_abs(&sum);
    if d < Rat::one() || d > int(t_size as i64) {
        return Err(Error::Invariant("norm of the eigenvector sum out of range".into()));
    }
    let s: Vec<Vec<Rat>> = sum.into_iter().map(|r| r.into_iter().map(|v| -v / &d).collect()).collect();
    if !max_abs(&s).is_one() {
        return Err(Error::Invariant("separating matrix is not unit".into()));
    }
    Ok(SdpSeparation { flag: 0, s, branch: Branch::Eigenvector, t_size, norm: d })
}

/// The oracle of an SDP set seen as a convex set in `R^I`.
pub struct SdpOracle<'a> {
    set: &'a SdpSet,
    index: IndexSet,
}

impl<'a> SdpOracle<'a> {
    pub fn new(set: &'a SdpSet) -> Self {
        SdpOracle { set, index: set.variable_index() }
    }
}

impl SeparationOracle for SdpOracle<'_> {
    fn index_set(&self) -> &IndexSet {
        &self.index
    }

    fn separate(&self, y: &[Rat], delta: &Rat) -> Result<Separation> {
        let ym = self.set.matrix_of(y);
        let ans = separation_oracle(self.set, &ym, delta)?;
        if ans.flag == 1 {
            return Ok(Separation { member: true, normal: Vec::new() });
        }
        // <S, X> = sum over pairs of w * S_ij * x_ij, w = 1 on the diagonal and 2 off it
        let mut normal: Vec<Rat> = self
            .set
            .pairs()
            .into_iter()
            .map(|(i, j)| if i == j { ans.s[i][j].clone() } else { &ans.s[i][j] * int(2) })
            .collect();
        let mx = linalg::norm_slice(&normal, NormKind::LInf);
        for v in normal.iter_mut() {
            *v /= &mx;
        }
        Ok(Separation { member: false, normal })
    }
}

/// Adds `±X_ij <= R` for every pair.
pub fn restrict(k: &SdpSet, radius: &Rat) -> SdpSet {
    let mut out = k.clone();
    for (i, j) in k.pairs() {
        let v = if i == j { Rat::one() } else { Rat::new(BigInt::one(), BigInt::from(2)) };
        let a = SymSparse { entries: vec![(i, j, v)] };
        let tag = format!("{},{}", k.j.label(i), k.j.label(j));
        out.constraint_names.push(format!("box+{{{tag}}}"));
        out.a.push(a.clone());
        out.b.push(radius.clone());
        out.constraint_names.push(format!("box-{{{tag}}}"));
        out.a.push(a.negated());
        out.b.push(radius.clone());
    }
    out
}

/// Loosens every right-hand side by `epsilon`.
pub fn relax(k: &SdpSet, epsilon: &Rat) -> SdpSet {
    let mut out = k.clone();
    for b in out.b.iter_mut() {
        *b += epsilon;
    }
    out
}

/// `epsilon^k / (k! (2 k m)^k)`.
pub fn ball_volume_threshold(k: usize, m: &Rat, epsilon: &Rat) -> Rat {
    let mut fact = BigInt::one();
    for i in 2..=k {
        fact *= i;
    }
    let kk = int(k as i64);
    num_traits::pow(epsilon.clone(), k) / (big(&fact) * num_traits::pow(int(2) * kk * m, k))
}

/// Power-of-two upper bound on the largest constraint normal length in `R^I`
/// (at least 1), doubled when `|J| >= 2` to cover the gap between that length and
/// the matrix norm used by the ball argument.
pub fn normal_bound(k: &SdpSet) -> Rat {
    let mut sq = Rat::one();
    for i in 0..k.a.len() {
        let l = linalg::norm_slice(&k.normal_in_pairs(i), NormKind::L2Squared);
        if l > sq {
            sq = l;
        }
    }
    // 2^e >= sqrt(sq)  iff  4^e >= sq
    let e = (ceil_log2(&sq) + 1) / 2;
    let m = rat_pow2(e.max(0));
    if k.n() >= 2 {
        m * int(2)
    } else {
        m
    }
}

/// The volume threshold for `epsilon`-relaxations of `k`, with `k = |I|`.
pub fn volume_lower_bound(k: &SdpSet, epsilon: &Rat) -> Rat {
    let dim = k.n() * (k.n() + 1) / 2;
    ball_volume_threshold(dim, &normal_bound(k), epsilon)
}

pub fn weak_feasibility(
    k: &CircumscribedSdpSet,
    epsilon: &Rat,
    settings: &CcSettings,
    trace: Option<&mut Trace>,
) -> Result<WeakFeasibilityResult> {
    let oracle = SdpOracle::new(&k.set);
    cc_prime(epsilon, &k.radius, &oracle, settings, trace)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EpsRVerdict {
    /// The ε-relaxation of the R-restriction is non-empty.
    Top,
    /// The R-restriction is empty.
    Bottom,
}

impl EpsRVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            EpsRVerdict::Top => "TOP",
            EpsRVerdict::Bottom => "BOTTOM",
        }
    }
}

#[derive(Clone, Debug)]
pub struct EpsROutcome {
    pub verdict: EpsRVerdict,
    pub outer_radius: BigInt,
    pub tolerance: Rat,
    pub weak: WeakFeasibilityResult,
    /// The relaxed restriction the ellipsoid ran on.
    pub relaxed: SdpSet,
}

/// `ceil(sqrt(k (R + epsilon)^2))`.
pub fn outer_radius(k: usize, radius: &Rat, epsilon: &Rat) -> BigInt {
    let r = radius + epsilon;
    let x = int(k as i64) * &r * &r;
    ceil_isqrt(&x.ceil().to_integer())
}

pub fn feasibility_eps_r(
    k: &SdpSet,
    radius: &Rat,
    epsilon: &Rat,
    settings: &CcSettings,
    trace: Option<&mut Trace>,
) -> Result<EpsROutcome> {
    if !radius.is_positive() || !epsilon.is_positive() {
        return Err(Error::InvalidArgument("radius and epsilon must be positive".into()));
    }
    let dim = k.n() * (k.n() + 1) / 2;
    let outer = outer_radius(dim, radius, epsilon);
    let restricted = restrict(k, radius);
    let relaxed = relax(&restricted, epsilon);
    let tolerance = volume_lower_bound(&restricted, epsilon);
    let circ = CircumscribedSdpSet { set: relaxed.clone(), radius: big(&outer).max(Rat::one()) };
    let weak = weak_feasibility(&circ, &tolerance, settings, trace)?;
    let verdict = if weak.flag == 1 { EpsRVerdict::Top } else { EpsRVerdict::Bottom };
    Ok(EpsROutcome { verdict, outer_radius: outer, tolerance, weak, relaxed })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScheduleOutcome {
    /// The R-restriction is empty, shown at this ε.
    Bottom(Rat),
    /// Every ε in the schedule gave TOP.
    Inconclusive,
}

/// Runs the decider for each ε of a strictly decreasing schedule until one says BOTTOM.
pub fn feasibility_schedule(k: &SdpSet, radius: &Rat, schedule: &[Rat], settings: &CcSettings) -> Result<ScheduleOutcome> {
    if schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("ε schedule must be strictly decreasing".into()));
    }
    for eps in schedule {
        if feasibility_eps_r(k, radius, eps, settings, None)?.verdict == EpsRVerdict::Bottom {
            return Ok(ScheduleOutcome::Bottom(eps.clone()));
        }
    }
    Ok(ScheduleOutcome::Inconclusive)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn one_by_one(upper: i64) -> SdpSet {
        let mut k = SdpSet::new(IndexSet::new(["a"]).unwrap());
        k.add_constraint("upper", SymSparse::from_entries([(0, 0, int(1))]), int(upper)).unwrap();
        k
    }

    fn free(n: usize) -> SdpSet {
        SdpSet::new(IndexSet::range(n))
    }

    fn pairing(s: &[Vec<Rat>], x: &[Vec<Rat>]) -> Rat {
        s.iter().zip(x).map(|(r, q)| linalg::dot(r, q)).sum()
    }

    #[test]
    fn violated_branch() {
        let mut k = SdpSet::new(IndexSet::new(["a"]).unwrap());
        k.add_constraint("trace", SymSparse::from_entries([(0, 0, int(1))]), int(0)).unwrap();
        let ans = separation_oracle(&k, &[vec![int(2)]], &rat(1, 4)).unwrap();
        assert_eq!((ans.flag, ans.branch), (0, Branch::Violated));
        assert_eq!(ans.s, vec![vec![int(1)]]);
    }

    #[test]
    fn eigenvalue_branch_accepts_identity() {
        let y = identity(2);
        let ans = separation_oracle(&free(2), &y, &rat(1, 4)).unwrap();
        assert_eq!((ans.flag, ans.branch), (1, Branch::Eigenvalue));
        assert_eq!(ans.s, identity(2));
    }

    #[test]
    fn eigenvector_branch_separates_swap() {
        let y = vec![vec![int(0), int(1)], vec![int(1), int(0)]];
        let delta = rat(1, 4);
        let ans = separation_oracle(&free(2), &y, &delta).unwrap();
        assert_eq!((ans.flag, ans.branch), (0, Branch::Eigenvector));
        assert!(max_abs(&ans.s).is_one());
        let neg: Vec<Vec<Rat>> = ans.s.iter().map(|r| r.iter().map(|v| -v).collect()).collect();
        assert!(linalg::psd_check(&IMat::square(neg)).unwrap());
        let half = rat(1, 2);
        let candidates = [
            vec![vec![int(0), int(0)], vec![int(0), int(0)]],
            identity(2),
            vec![vec![half.clone(), half.clone()], vec![half.clone(), half]],
        ];
        for x in &candidates {
            assert!(pairing(&ans.s, &y) + &delta >= pairing(&ans.s, x));
        }
    }

    #[test]
    fn restriction_adds_box() {
        let k = restrict(&free(1), &int(1));
        assert_eq!(k.b, vec![int(1), int(1)]);
        assert!(k.contains(&[vec![int(1)]]));
        assert!(!k.contains(&[vec![int(2)]]));
        assert!(k.contains(&[vec![int(0)]]));
    }

    #[test]
    fn relaxation_shifts_rhs() {
        let k = SdpSet { b: vec![int(0)], ..one_by_one(0) };
        assert_eq!(relax(&k, &rat(1, 2)).b, vec![rat(1, 2)]);
        assert_eq!(relax(&relax(&k, &rat(1, 3)), &rat(1, 6)), relax(&k, &rat(1, 2)));
        let r = relax(&one_by_one(-1), &rat(1, 2));
        assert!(!r.contains(&[vec![int(0)]]));
    }

    #[test]
    fn volume_thresholds() {
        assert_eq!(ball_volume_threshold(1, &int(1), &rat(1, 2)), rat(1, 4));
        assert_eq!(ball_volume_threshold(1, &int(1), &int(1)), rat(1, 2));
        assert_eq!(ball_volume_threshold(3, &int(1), &int(1)), rat(1, 1296));
    }

    #[test]
    fn weak_feasibility_examples() {
        let mut k = one_by_one(1);
        k.add_constraint("lower", SymSparse::from_entries([(0, 0, int(-1))]), int(0)).unwrap();
        let circ = CircumscribedSdpSet { set: k.clone(), radius: int(2) };
        let eps = rat(1, 2);
        let r = weak_feasibility(&circ, &eps, &CcSettings::default(), None).unwrap();
        assert_eq!(r.flag, 1);
        let w = k.matrix_of(&r.witness.unwrap().values);
        assert!(k.constraints_hold(&w, &eps));

        let empty = CircumscribedSdpSet { set: one_by_one(-1), radius: int(2) };
        assert_eq!(weak_feasibility(&empty, &rat(1, 8), &CcSettings::default(), None).unwrap().flag, 0);
    }

    #[test]
    fn eps_r_examples() {
        let s = CcSettings::default();
        assert_eq!(feasibility_eps_r(&one_by_one(1), &int(2), &rat(1, 4), &s, None).unwrap().verdict, EpsRVerdict::Top);
        for r in [1, 2, 5] {
            let out = feasibility_eps_r(&one_by_one(-1), &int(r), &rat(1, 4), &s, None).unwrap();
            assert_eq!(out.verdict, EpsRVerdict::Bottom);
        }
        assert_eq!(outer_radius(1, &int(2), &rat(1, 4)), BigInt::from(3));
    }

    #[test]
    fn schedules_must_decrease() {
        let s = CcSettings::default();
        assert!(feasibility_schedule(&one_by_one(1), &int(1), &[rat(1, 4), rat(1, 2)], &s).is_err());
        let out = feasibility_schedule(&one_by_one(-1), &int(1), &[rat(1, 2), rat(1, 4)], &s).unwrap();
        assert_eq!(out, ScheduleOutcome::Bottom(rat(1, 2)));
    }

    #[test]
    fn permuted_set_keeps_membership() {
        let mut k = SdpSet::new(IndexSet::new(["a", "b"]).unwrap());
        k.add_constraint("c", SymSparse::from_entries([(0, 0, int(1)), (0, 1, int(1))]), int(1)).unwrap();
        let p = k.permuted(IndexSet::new(["b", "a"]).unwrap(), &[1, 0]);
        let y = vec![vec![int(1), int(0)], vec![int(0), int(2)]];
        let yp = vec![vec![int(2), int(0)], vec![int(0), int(1)]];
        assert_eq!(k.contains(&y), p.contains(&yp));
    }
}
