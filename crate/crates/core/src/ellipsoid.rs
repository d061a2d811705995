//! The central-cut ellipsoid method over exact rationals, and the folded driver
//! that runs it on quotients of the variable space and restarts on refinement.
//!
//! Ellipsoids are kept in covariance form `E = {x : (x-a)^T D^{-1} (x-a) <= 1}`
//! with `D` and `a` stored as integers over a shared power of two. Every update
//! carries a short scalar proof that the rounded ellipsoid still contains the
//! true half-ellipsoid, so an enclosure verdict is certified without floats.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::folding::OntoMap;
use crate::linalg::{self, IMat, IVec, IndexSet, NormKind};
use crate::rational::{
    big, ceil_log2, common_denominator, floor_log2, format_rat, int, pow2, rat, rat_bitlength,
    rat_pow2, round_div, round_down_significant, round_up_significant, sqrt_lower, sqrt_upper, Rat,
};
use crate::trace::{Trace, TraceRecord};

/// `{x : (x - center)^T covariance^{-1} (x - center) <= 1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ellipsoid {
    pub covariance: IMat,
    pub center: IVec,
}

impl Ellipsoid {
    pub fn ball(index: &IndexSet, radius: &Rat) -> Self {
        Ellipsoid {
            covariance: IMat::identity(index).scale(&(radius * radius)),
            center: IVec::zeros(index),
        }
    }

    pub fn dimension(&self) -> usize {
        self.center.values.len()
    }

    /// The matrix `A = D^{-1}` of the form `{x : (x-a)^T A (x-a) <= 1}`.
    pub fn shape(&self) -> Result<IMat> {
        linalg::inverse(&self.covariance)
    }

    pub fn contains(&self, x: &IVec) -> Result<bool> {
        let x = x.aligned_to(&self.center.index)?;
        let d: Vec<Rat> = x.values.iter().zip(&self.center.values).map(|(p, q)| p - q).collect();
        let dv = IVec::new(self.center.index.clone(), d)?;
        let a = self.shape()?;
        Ok(linalg::inner_product(&dv, &a.mul_vec(&dv)?)? <= Rat::one())
    }

    /// An upper bound on the squared volume.
    pub fn volume_squared_upper(&self) -> Result<Rat> {
        Ok(unit_ball_volume_squared_upper(self.dimension()) * linalg::determinant(&self.covariance)?)
    }
}

/// Upper bound on the squared volume of the unit ball in `n` dimensions,
/// from `V_n = V_{n-2} * 2 pi / n` with `pi <= 355/113`.
pub fn unit_ball_volume_squared_upper(n: usize) -> Rat {
    let pi = rat(355, 113);
    let mut v = if n % 2 == 0 { Rat::one() } else { int(2) };
    let mut k = if n % 2 == 0 { 2 } else { 3 };
    while k <= n {
        v = v * int(2) * &pi / int(k as i64);
        k += 2;
    }
    &v * &v
}

/// What a separation oracle reports for a query point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Separation {
    /// The query point is within `delta` of the set.
    pub member: bool,
    /// When not a member: `s` with `||s||_inf = 1` and `<s,y> + delta >= sup_K <s,x>`.
    pub normal: Vec<Rat>,
}

/// A not-so-weak separation oracle for a convex set in `R^I`.
pub trait SeparationOracle: Sync {
    fn index_set(&self) -> &IndexSet;
    fn separate(&self, y: &[Rat], delta: &Rat) -> Result<Separation>;
}

/// Answer of the folded oracle: flag 1 (member), 0 (a cut for the folded set),
/// or −1 (the map does not respect the returned normal, which is then given unfolded).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldedAnswer {
    pub flag: i8,
    pub normal: Vec<Rat>,
}

pub fn folded_oracle(sigma: &OntoMap, y: &[Rat], delta: &Rat, oracle: &dyn SeparationOracle) -> Result<FoldedAnswer> {
    if y.len() != sigma.class_count() {
        return Err(Error::IndexMismatch("folded query has the wrong dimension".into()));
    }
    let ans = oracle.separate(&sigma.unfold_slice(y), delta)?;
    if ans.member {
        return Ok(FoldedAnswer { flag: 1, normal: Vec::new() });
    }
    if !sigma.respects_slice(&ans.normal) {
        return Ok(FoldedAnswer { flag: -1, normal: ans.normal });
    }
    // `<s, unfold y> = sum_j |C_j| t_j y_j` for `s = unfold t`, so the cut for the
    // folded set uses class sums; rescaling to unit norm only shrinks the slack.
    let sums: Vec<Rat> = sigma
        .fold_slice(&ans.normal)
        .into_iter()
        .zip(sigma.class_sizes())
        .map(|(t, n)| t * int(n as i64))
        .collect();
    let m = linalg::norm_slice(&sums, NormKind::LInf);
    Ok(FoldedAnswer { flag: 0, normal: sums.into_iter().map(|v| v / &m).collect() })
}

#[derive(Clone, Debug, Default)]
pub struct CcSettings {
    /// Per-segment iteration cap; `None` uses [`default_iteration_cap`].
    pub iteration_cap: Option<u64>,
}

/// `ceil(10 n^2 (bitlength(R) + bitlength(1/gamma) + 2n))`.
pub fn default_iteration_cap(n: usize, radius: &Rat, gamma: &Rat) -> u64 {
    let n = n as u64;
    let inv = Rat::one() / gamma;
    10 * n * n * (rat_bitlength(radius) + rat_bitlength(&inv) + 2 * n).max(1)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CcOutcome {
    /// The last query was answered "member" with `delta <= gamma`.
    Point(Vec<Rat>),
    /// The last query produced a cut and the enclosing ellipsoid has volume at most `gamma`.
    Enclosure(Ellipsoid),
    /// The oracle asked for a restart; carries the normal it returned.
    Restart(Vec<Rat>),
}

/// What the oracle closure tells the central-cut loop.
pub enum CutAnswer {
    Member,
    Cut(Vec<Rat>),
    Restart(Vec<Rat>),
}

/// Constants that depend only on the dimension.
struct Params {
    n: usize,
    /// blow-up beyond the exact Löwner-John ellipsoid
    eta: Rat,
    /// allowed relative center error, in the norm of the reference ellipsoid
    theta: Rat,
    /// largest admissible `delta / sqrt(c^T D c)`
    tau_max: Rat,
    /// `lambda_min(D_LJ) >= shrink * lambda_min(D)`
    shrink: Rat,
    /// squared-volume ratio bound per step
    rho: Rat,
}

impl Params {
    fn new(n: usize) -> Self {
        let nr = int(n as i64);
        let n2 = &nr * &nr;
        let eta = if n == 1 { rat(1, 4) } else { (&n2 - int(3)) / (int(2) * &n2 * &n2) };
        let theta = &eta / int(6);
        let tau_max = &eta * &n2 / (int(32) * (&nr + int(1)));
        let shrink = &n2 / ((&nr + int(1)) * (&nr + int(1)));
        let grow = Rat::one() + &eta * rat(5, 4);
        let rho = if n == 1 {
            grow / int(4)
        } else {
            let kappa = &n2 / (&n2 - int(1));
            num_traits::pow(grow * kappa, n) * (&nr - int(1)) / (&nr + int(1))
        };
        let rho = round_up_significant(&rho, 64);
        Params { n, eta, theta, tau_max, shrink, rho }
    }
}

/// Ellipsoid state: covariance `m / 2^p`, center `center / 2^p`.
struct State {
    p: u64,
    m: Vec<BigInt>,
    center: Vec<BigInt>,
    /// certified lower bound on `lambda_min(D)`
    floor: Rat,
    /// certified upper bound on the squared volume
    vol_sq: Rat,
}

impl State {
    fn ball(n: usize, radius: &Rat) -> Self {
        let r2 = radius * radius;
        let p = (64 - floor_log2(&r2)).max(0) as u64;
        let d = (&r2 * big(&pow2(p))).ceil().to_integer();
        let mut m = vec![BigInt::zero(); n * n];
        for i in 0..n {
            m[i * n + i] = d.clone();
        }
        let diag = Rat::new(d, pow2(p));
        let vol_sq = round_up_significant(&(unit_ball_volume_squared_upper(n) * num_traits::pow(diag.clone(), n)), 64);
        State { p, m, center: vec![BigInt::zero(); n], floor: diag, vol_sq }
    }

    fn center_rat(&self) -> Vec<Rat> {
        self.center.iter().map(|c| Rat::new(c.clone(), pow2(self.p))).collect()
    }

    fn ellipsoid(&self, n: usize) -> Ellipsoid {
        let idx = IndexSet::range(n);
        let scale = pow2(self.p);
        let data = self.m.iter().map(|x| Rat::new(x.clone(), scale.clone())).collect();
        Ellipsoid {
            covariance: IMat { rows: idx.clone(), cols: idx.clone(), data },
            center: IVec { index: idx, values: self.center_rat() },
        }
    }

    /// Tries to raise `floor` by exact PSD tests of `D - 2^e I`.
    fn refresh_floor(&mut self, n: usize) {
        let e0 = floor_log2(&self.floor);
        let mut best = None;
        let mut step = 1i64;
        while step <= 256 {
            let e = e0 + step;
            if self.dominates(n, e) {
                best = Some(e);
                step *= 2;
            } else {
                break;
            }
        }
        if let Some(e) = best {
            self.floor = rat_pow2(e);
        }
    }

    /// Whether `D - 2^e I` is PSD.
    fn dominates(&self, n: usize, e: i64) -> bool {
        let shift = e + self.p as i64;
        let (scale, sub) = if shift >= 0 { (BigInt::one(), pow2(shift as u64)) } else { (pow2((-shift) as u64), BigInt::one()) };
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let v = &self.m[i * n + j] * &scale;
                        if i == j {
                            v - &sub
                        } else {
                            v
                        }
                    })
                    .collect()
            })
            .collect();
        linalg::psd_integer(rows)
    }

    /// Replaces the ellipsoid by a certified enclosure of
    /// `E ∩ {x : c^T x <= c^T a + delta}`.
    fn cut(&mut self, par: &Params, c: &[Rat], delta: &Rat) -> Result<()> {
        let n = par.n;
        let l = common_denominator(c.iter());
        let lr = big(&l);
        let ci: Vec<BigInt> = c.iter().map(|x| (x * &lr).to_integer()).collect();
        let w: Vec<BigInt> = (0..n)
            .map(|i| {
                let row = &self.m[i * n..(i + 1) * n];
                row.iter().zip(&ci).fold(BigInt::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect();
        let q_int = ci.iter().zip(&w).fold(BigInt::zero(), |acc, (a, b)| acc + a * b);
        if !q_int.is_positive() {
            return Err(Error::Invariant("ellipsoid lost positive definiteness".into()));
        }
        let two_p = pow2(self.p);

        // depth of the cut relative to the ellipsoid width
        let tau_sq = delta * delta * big(&(&l * &l * &two_p)) / big(&q_int);
        let tau = sqrt_upper(&tau_sq, 40);
        let omega = int(2) * int(n as i64 + 1) * &tau * (Rat::one() + &tau) / int((n * n) as i64);
        if omega > &par.eta / int(8) {
            return Err(Error::Invariant("cut depth exceeds the certified range".into()));
        }

        let floor_lj = &par.shrink * &self.floor;
        let nn = int(n as i64);
        let need_a = ceil_log2(&(int(2) * &nn / (&par.eta * &floor_lj)));
        let need_b = (ceil_log2(&(&nn / (&par.theta * &par.theta * &floor_lj))) + 1) / 2;
        let p_new = (need_a.max(need_b) + 2).max(8) as u64;
        let two_pn = pow2(p_new);

        // covariance
        let np1 = BigInt::from(n + 1);
        let mut m_new = vec![BigInt::zero(); n * n];
        if n == 1 {
            let den = BigInt::from(16) * &two_p;
            m_new[0] = round_div(&(BigInt::from(5) * &self.m[0] * &two_pn), &den);
        } else {
            let n2 = BigInt::from(n * n);
            let beta_num = BigInt::from(2) * &n2 + 3;
            let beta_den = BigInt::from(2) * &n2;
            let den = &beta_den * &np1 * &q_int * &two_p;
            let lead = &np1 * &q_int;
            for i in 0..n {
                for j in i..n {
                    let inner = &self.m[i * n + j] * &lead - BigInt::from(2) * &w[i] * &w[j];
                    let v = round_div(&(&beta_num * inner * &two_pn), &den);
                    m_new[j * n + i] = v.clone();
                    m_new[i * n + j] = v;
                }
            }
        }

        // center: a - D c / ((n+1) sqrt(c^T D c)), with the root taken on integers
        let radicand = &q_int * &two_p;
        let mut f = (64 + ceil_log2(&(Rat::one() / &par.theta)).max(0)) as u64;
        let root = loop {
            let scaled = &radicand << (2 * f);
            let s = scaled.sqrt();
            // |sqrt(z) - 1| <= |z - 1| bounds the relative error of the root
            let err = (Rat::new(scaled, &s * &s) - Rat::one()).abs();
            if err <= &par.theta * &nn / int(2) {
                break s;
            }
            f += 32;
        };
        let shift_den = &np1 * &root;
        let den = &shift_den * &two_p;
        let wscale = pow2(f) * &two_p;
        let center_new: Vec<BigInt> = (0..n)
            .map(|i| {
                let num = (&self.center[i] * &shift_den - &w[i] * &wscale) * &two_pn;
                round_div(&num, &den)
            })
            .collect();

        // bookkeeping for the next step
        let slack = &nn / int(2) * Rat::new(BigInt::one(), two_pn.clone());
        let floor_new = (Rat::one() + &par.eta) * &floor_lj - slack;
        if !floor_new.is_positive() {
            return Err(Error::Invariant("precision bound failed to keep the ellipsoid positive".into()));
        }
        self.floor = round_down_significant(&floor_new, 64);
        self.vol_sq = round_up_significant(&(&self.vol_sq * &par.rho), 64);
        self.m = m_new;
        self.center = center_new;
        self.p = p_new;
        Ok(())
    }
}

/// Normalizes a cut vector to unit max-norm, scaling `delta` along with it.
fn normalize_cut(c: Vec<Rat>, delta: &Rat) -> Result<(Vec<Rat>, Rat)> {
    let mx = linalg::norm_slice(&c, NormKind::LInf);
    if mx.is_zero() {
        return Err(Error::Protocol("oracle returned a zero normal".into()));
    }
    if mx.is_one() {
        return Ok((c, delta.clone()));
    }
    Ok((c.iter().map(|x| x / &mx).collect(), delta / &mx))
}

fn trace_query(trace: &mut Option<&mut Trace>, iteration: u64, k: usize, y: &[Rat], delta: &Rat, flag: i8) {
    if let Some(t) = trace.as_deref_mut() {
        t.records.push(TraceRecord {
            event: "query".into(),
            iteration,
            k,
            query_center: y.iter().map(format_rat).collect(),
            delta: format_rat(delta),
            answer_flag: flag,
            refined: false,
        });
    }
}

/// Largest power of two not above `x > 0`.
fn pow2_floor(x: &Rat) -> Rat {
    rat_pow2(floor_log2(x))
}

/// The central-cut ellipsoid method in `R^n` starting from the ball of radius `radius`.
///
/// Query tolerances adapt to the current ellipsoid so that every cut stays
/// shallow enough for the certified update; a "member" answer given at a
/// tolerance above `gamma` is re-asked at `gamma`, and the query preceding an
/// enclosure verdict is always asked at a tolerance of at most `gamma`.
pub fn central_cut<F>(
    gamma: &Rat,
    n: usize,
    radius: &Rat,
    cap: u64,
    mut oracle: F,
    trace: &mut Option<&mut Trace>,
    iteration: &mut u64,
) -> Result<CcOutcome>
where
    F: FnMut(&[Rat], &Rat) -> Result<CutAnswer>,
{
    if !gamma.is_positive() || !radius.is_positive() {
        return Err(Error::InvalidArgument("gamma and radius must be positive".into()));
    }
    if n == 0 {
        *iteration += 1;
        return match oracle(&[], gamma)? {
            CutAnswer::Member => {
                trace_query(trace, *iteration, 0, &[], gamma, 1);
                Ok(CcOutcome::Point(Vec::new()))
            }
            CutAnswer::Restart(s) => Ok(CcOutcome::Restart(s)),
            CutAnswer::Cut(_) => {
                trace_query(trace, *iteration, 0, &[], gamma, 0);
                let idx = IndexSet::range(0);
                Ok(CcOutcome::Enclosure(Ellipsoid { covariance: IMat::zeros(&idx, &idx), center: IVec::zeros(&idx) }))
            }
        };
    }
    let par = Params::new(n);
    let mut st = State::ball(n, radius);
    let gamma_sq = gamma * gamma;
    let refresh_period = n.max(4) as u64;
    for step in 0..cap {
        *iteration += 1;
        let last = &st.vol_sq * &par.rho <= gamma_sq;
        let root = sqrt_lower(&st.floor, (64 - floor_log2(&st.floor) / 2).max(64) as u64);
        let mut delta = pow2_floor(&(&par.tau_max * root / int(2)));
        if last && delta > *gamma {
            delta = gamma.clone();
        }
        let y = st.center_rat();
        let mut answer = oracle(&y, &delta)?;
        if matches!(answer, CutAnswer::Member) && delta > *gamma {
            trace_query(trace, *iteration, n, &y, &delta, 1);
            delta = gamma.clone();
            answer = oracle(&y, &delta)?;
        }
        let c = match answer {
            CutAnswer::Member => {
                trace_query(trace, *iteration, n, &y, &delta, 1);
                return Ok(CcOutcome::Point(y));
            }
            CutAnswer::Restart(s) => {
                trace_query(trace, *iteration, n, &y, &delta, -1);
                return Ok(CcOutcome::Restart(s));
            }
            CutAnswer::Cut(c) => c,
        };
        trace_query(trace, *iteration, n, &y, &delta, 0);
        if c.len() != n {
            return Err(Error::Protocol("cut vector has the wrong dimension".into()));
        }
        let (c, delta) = normalize_cut(c, &delta)?;
        st.cut(&par, &c, &delta)?;
        if st.vol_sq <= gamma_sq {
            return Ok(CcOutcome::Enclosure(st.ellipsoid(n)));
        }
        if (step + 1) % refresh_period == 0 {
            st.refresh_floor(n);
        }
    }
    Err(Error::Config(format!(
        "iteration cap {cap} reached before the enclosing volume fell below the target"
    )))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeakFeasibilityResult {
    /// 1: a point within `epsilon` of the set was found; 0: the set has volume at most `epsilon`.
    pub flag: u8,
    pub witness: Option<IVec>,
    /// The final folding map and the folded enclosing ellipsoid, for flag 0.
    pub enclosure: Option<(OntoMap, Ellipsoid)>,
    pub iterations: u64,
    pub refinements: usize,
    pub final_class_count: usize,
}

/// `min{(eps / (2^n R^(n-1) n k))^k, eps}`.
pub fn folded_tolerance(epsilon: &Rat, n: usize, radius: &Rat, k: usize) -> Rat {
    if n == 0 || k == 0 {
        return epsilon.clone();
    }
    let denom = big(&pow2(n as u64)) * num_traits::pow(radius.clone(), n - 1) * int(n as i64) * int(k as i64);
    let g = num_traits::pow(epsilon / denom, k);
    g.min(epsilon.clone())
}

/// Weak feasibility of a circumscribed convex set by the ellipsoid method on folded
/// quotients: start with a single class and refine whenever the oracle's normal is
/// not constant on the classes.
pub fn cc_prime(
    epsilon: &Rat,
    radius: &Rat,
    oracle: &dyn SeparationOracle,
    settings: &CcSettings,
    mut trace: Option<&mut Trace>,
) -> Result<WeakFeasibilityResult> {
    if !epsilon.is_positive() || !radius.is_positive() {
        return Err(Error::InvalidArgument("epsilon and radius must be positive".into()));
    }
    let index = oracle.index_set().clone();
    let n = index.len();
    let mut sigma = OntoMap::constant(&index);
    let mut iteration = 0u64;
    let mut refinements = 0usize;
    loop {
        let k = sigma.class_count();
        let gamma = folded_tolerance(epsilon, n, radius, k);
        let cap = settings.iteration_cap.unwrap_or_else(|| default_iteration_cap(k, radius, &gamma));
        let sig = sigma.clone();
        let outcome = central_cut(
            &gamma,
            k,
            radius,
            cap,
            |y, delta| {
                let ans = folded_oracle(&sig, y, delta, oracle)?;
                Ok(match ans.flag {
                    1 => CutAnswer::Member,
                    0 => CutAnswer::Cut(ans.normal),
                    _ => CutAnswer::Restart(ans.normal),
                })
            },
            &mut trace,
            &mut iteration,
        )?;
        match outcome {
            CcOutcome::Point(y) => {
                return Ok(WeakFeasibilityResult {
                    flag: 1,
                    witness: Some(IVec::new(index.clone(), sigma.unfold_slice(&y))?),
                    enclosure: None,
                    iterations: iteration,
                    refinements,
                    final_class_count: k,
                });
            }
            CcOutcome::Enclosure(e) => {
                return Ok(WeakFeasibilityResult {
                    flag: 0,
                    witness: None,
                    enclosure: Some((sigma.clone(), e)),
                    iterations: iteration,
                    refinements,
                    final_class_count: k,
                });
            }
            CcOutcome::Restart(s) => {
                let refined = sigma.refine_slice(&s);
                if refined.class_count() <= k {
                    return Err(Error::Invariant("refinement did not split any class".into()));
                }
                sigma = refined;
                refinements += 1;
                if let Some(t) = trace.as_deref_mut() {
                    t.records.push(TraceRecord {
                        event: "refine".into(),
                        iteration,
                        k: sigma.class_count(),
                        query_center: Vec::new(),
                        delta: String::new(),
                        answer_flag: -1,
                        refined: true,
                    });
                }
            }
        }
    }
}
