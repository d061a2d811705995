//! Reference oracles shared by the integration tests. They are written
//! independently of the library routines they check.

#![allow(dead_code)]

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sosfold::iso::Graph;
use sosfold::sos::PolySystem;
use sosfold::Rat;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn int(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

pub fn frac(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}

/// A rational `p/q` with `|p| <= num` and `1 <= q <= den`.
pub fn small_rat(rng: &mut ChaCha8Rng, num: i64, den: i64) -> Rat {
    frac(rng.gen_range(-num..=num), rng.gen_range(1..=den))
}

pub fn random_permutation(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        p.swap(i, rng.gen_range(0..=i));
    }
    p
}

// ---- univariate polynomials, coefficients from the constant term up ----

fn trim(mut p: Vec<Rat>) -> Vec<Rat> {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

fn eval(p: &[Rat], t: &Rat) -> Rat {
    p.iter().rev().fold(Rat::zero(), |acc, c| acc * t + c)
}

fn derivative(p: &[Rat]) -> Vec<Rat> {
    trim(p.iter().enumerate().skip(1).map(|(i, c)| c * int(i as i64)).collect())
}

/// Quotient and remainder of `a / b`, `b` nonzero.
fn div_rem(a: &[Rat], b: &[Rat]) -> (Vec<Rat>, Vec<Rat>) {
    let mut r = trim(a.to_vec());
    let b = trim(b.to_vec());
    let lead = b.last().expect("nonzero divisor").clone();
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let mut q = vec![Rat::zero(); r.len() - b.len() + 1];
    while r.len() >= b.len() && !r.is_empty() {
        let shift = r.len() - b.len();
        let c = r.last().expect("nonempty") / &lead;
        for (i, bc) in b.iter().enumerate() {
            r[shift + i] -= &c * bc;
        }
        q[shift] = c;
        r = trim(r);
    }
    (trim(q), r)
}

fn gcd(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
    while !b.is_empty() {
        let (_, r) = div_rem(&a, &b);
        a = b;
        b = r;
    }
    a
}

fn sign_changes(values: impl Iterator<Item = Rat>) -> usize {
    let signs: Vec<bool> = values.filter(|v| !v.is_zero()).map(|v| v.is_positive()).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Number of distinct real roots of `p` strictly below `t`, by a Sturm sequence.
pub fn roots_below(p: &[Rat], t: &Rat) -> usize {
    let p = trim(p.to_vec());
    if p.len() <= 1 {
        return 0;
    }
    let (mut q, _) = div_rem(&p, &gcd(&p, &derivative(&p)));
    if eval(&q, t).is_zero() {
        q = div_rem(&q, &[-t.clone(), Rat::one()]).0;
    }
    if q.len() <= 1 {
        return 0;
    }
    let mut seq = vec![q.clone(), derivative(&q)];
    loop {
        let (_, r) = div_rem(&seq[seq.len() - 2], &seq[seq.len() - 1]);
        if r.is_empty() {
            break;
        }
        seq.push(r.into_iter().map(|c| -c).collect());
    }
    let at_minus_inf = seq.iter().map(|s| {
        let lead = s.last().expect("nonzero").clone();
        if s.len() % 2 == 0 {
            -lead
        } else {
            lead
        }
    });
    sign_changes(at_minus_inf) - sign_changes(seq.iter().map(|s| eval(s, t)))
}

/// `det(tI - A)` by the Faddeev-LeVerrier recursion.
pub fn char_poly(a: &[Vec<Rat>]) -> Vec<Rat> {
    let n = a.len();
    let mut coeffs = vec![Rat::zero(); n + 1];
    coeffs[n] = Rat::one();
    let mut m = vec![vec![Rat::zero(); n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = vec![vec![Rat::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = Rat::zero();
                for l in 0..n {
                    s += &a[i][l] * &m[l][j];
                }
                if i == j {
                    s += &coeffs[n - k + 1];
                }
                next[i][j] = s;
            }
        }
        m = next;
        let mut tr = Rat::zero();
        for i in 0..n {
            for l in 0..n {
                tr += &a[i][l] * &m[l][i];
            }
        }
        coeffs[n - k] = -tr / int(k as i64);
    }
    coeffs
}

/// PSD test through the eigenvalues of a symmetric matrix.
pub fn psd_by_sturm(a: &[Vec<Rat>]) -> bool {
    roots_below(&char_poly(a), &Rat::zero()) == 0
}

/// Whether the least eigenvalue of `a` lies in `[lo, hi]`.
pub fn min_eigenvalue_in(a: &[Vec<Rat>], lo: &Rat, hi: &Rat) -> bool {
    let p = char_poly(a);
    roots_below(&p, lo) == 0 && (roots_below(&p, hi) > 0 || eval(&p, hi).is_zero())
}

// ---- Fourier-Motzkin ----

type Row = (Vec<Rat>, Rat);

fn normalized(row: Row) -> Row {
    let scale = row.0.iter().find(|c| !c.is_zero()).map(|c| c.abs());
    match scale {
        Some(s) => (row.0.iter().map(|c| c / &s).collect(), row.1 / s),
        None => row,
    }
}

/// Projects out variable `k`; `None` when a constant row is violated.
fn eliminate(rows: Vec<Row>, k: usize) -> Option<Vec<Row>> {
    let mut out = BTreeSet::new();
    let (mut pos, mut neg) = (Vec::new(), Vec::new());
    for (a, b) in rows {
        if a[k].is_positive() {
            pos.push((a, b));
        } else if a[k].is_negative() {
            neg.push((a, b));
        } else {
            out.insert(normalized((a, b)));
        }
    }
    for (ap, bp) in &pos {
        for (an, bn) in &neg {
            let (sp, sn) = (ap[k].clone(), -an[k].clone());
            let a: Vec<Rat> = ap.iter().zip(an).map(|(x, y)| x / &sp + y / &sn).collect();
            out.insert(normalized((a, bp / &sp + bn / &sn)));
        }
    }
    let mut kept = Vec::new();
    for (a, b) in out {
        if a.iter().all(Zero::is_zero) {
            if b.is_negative() {
                return None;
            }
        } else {
            kept.push((a, b));
        }
    }
    Some(kept)
}

/// Flag and optimal value of `min <c,x>` subject to `row . x <= rhs` over free
/// variables: −1 infeasible, 0 optimal, 1 unbounded.
pub fn fourier_motzkin(rows: &[Vec<Rat>], rhs: &[Rat], objective: &[Rat]) -> (i8, Option<Rat>) {
    let n = objective.len();
    // extra variable z >= <c,x>
    let mut sys: Vec<Row> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            let mut a = r.clone();
            a.push(Rat::zero());
            (a, b.clone())
        })
        .collect();
    let mut obj = objective.to_vec();
    obj.push(-Rat::one());
    sys.push((obj, Rat::zero()));
    for k in 0..n {
        match eliminate(sys, k) {
            Some(s) => sys = s,
            None => return (-1, None),
        }
    }
    let mut lower: Option<Rat> = None;
    let mut upper: Option<Rat> = None;
    for (a, b) in &sys {
        let bound = b / &a[n];
        if a[n].is_negative() {
            lower = Some(lower.map_or(bound.clone(), |l| l.max(bound)));
        } else {
            upper = Some(upper.map_or(bound.clone(), |u| u.min(bound)));
        }
    }
    if let (Some(l), Some(u)) = (&lower, &upper) {
        if l > u {
            return (-1, None);
        }
    }
    match lower {
        Some(l) => (0, Some(l)),
        None => (1, None),
    }
}

// ---- 0/1 systems and graphs ----

pub fn assignments(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u64..1 << n).map(move |b| (0..n).map(|i| b >> i & 1 == 1).collect())
}

pub fn brute_force_sat(q: &PolySystem) -> Option<Vec<bool>> {
    assignments(q.n()).find(|x| q.is_satisfied_by(x))
}

/// Whether `x`, read as `x[u * n + v]`, is a permutation matrix carrying `g` onto `h`.
pub fn encodes_isomorphism(g: &Graph, h: &Graph, x: &[bool]) -> bool {
    let n = g.order();
    if h.order() != n || x.len() != n * n {
        return false;
    }
    let mut map = vec![usize::MAX; n];
    for u in 0..n {
        let targets: Vec<usize> = (0..n).filter(|&v| x[u * n + v]).collect();
        if targets.len() != 1 {
            return false;
        }
        map[u] = targets[0];
    }
    let image: BTreeSet<usize> = map.iter().copied().collect();
    image.len() == n && (0..n).all(|u| (0..n).all(|w| g.adjacent(u, w) == h.adjacent(map[u], map[w])))
}
