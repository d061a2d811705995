//! Folding vectors along an onto map `I -> {1..k}` (class averages) and back.

use std::collections::BTreeSet;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{IMat, IVec, IndexSet};
use crate::rational::Rat;

/// An onto map from `domain` to the classes `1..=k`, stored 0-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OntoMap {
    domain: IndexSet,
    k: usize,
    class_of: Vec<usize>,
}

impl OntoMap {
    /// Builds the map from 1-based class numbers; fails unless every class is hit.
    pub fn new(domain: IndexSet, classes: Vec<usize>) -> Result<Self> {
        if classes.len() != domain.len() {
            return Err(Error::IndexMismatch("one class number per label is required".into()));
        }
        let k = classes.iter().copied().max().unwrap_or(0);
        let mut hit = vec![false; k];
        for &c in &classes {
            if c == 0 {
                return Err(Error::InvalidArgument("class numbers start at 1".into()));
            }
            hit[c - 1] = true;
        }
        if hit.iter().any(|h| !h) {
            return Err(Error::InvalidArgument("map is not onto its classes".into()));
        }
        Ok(OntoMap { domain, k, class_of: classes.into_iter().map(|c| c - 1).collect() })
    }

    /// Everything in one class.
    pub fn constant(domain: &IndexSet) -> Self {
        let k = usize::from(!domain.is_empty());
        OntoMap { domain: domain.clone(), k, class_of: vec![0; domain.len()] }
    }

    /// Every label in its own class, in index order.
    pub fn identity(domain: &IndexSet) -> Self {
        OntoMap { domain: domain.clone(), k: domain.len(), class_of: (0..domain.len()).collect() }
    }

    pub fn domain(&self) -> &IndexSet {
        &self.domain
    }

    pub fn class_count(&self) -> usize {
        self.k
    }

    /// 1-based class of the label at `position`.
    pub fn class_of(&self, position: usize) -> usize {
        self.class_of[position] + 1
    }

    /// 0-based class of every position.
    pub fn class_index(&self) -> &[usize] {
        &self.class_of
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &c in &self.class_of {
            sizes[c] += 1;
        }
        sizes
    }

    /// The label positions in each class.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, &c) in self.class_of.iter().enumerate() {
            out[c].push(i);
        }
        out
    }

    pub fn codomain(&self) -> IndexSet {
        IndexSet::range(self.k)
    }

    /// The same map with the domain relabelled; `perm[i]` is the new position of label `i`.
    pub fn relabel(&self, domain: &IndexSet) -> Result<OntoMap> {
        let perm = domain.alignment(&self.domain)?;
        Ok(OntoMap { domain: domain.clone(), k: self.k, class_of: perm.iter().map(|&p| self.class_of[p]).collect() })
    }

    /// Class averages of `u`, indexed by position.
    pub fn fold_slice(&self, u: &[Rat]) -> Vec<Rat> {
        let mut sums = vec![Rat::zero(); self.k];
        for (x, &c) in u.iter().zip(&self.class_of) {
            sums[c] += x;
        }
        sums.into_iter()
            .zip(self.class_sizes())
            .map(|(s, n)| s / Rat::from_integer(n.into()))
            .collect()
    }

    /// Copies class values back onto the domain.
    pub fn unfold_slice(&self, v: &[Rat]) -> Vec<Rat> {
        self.class_of.iter().map(|&c| v[c].clone()).collect()
    }

    pub fn respects_slice(&self, v: &[Rat]) -> bool {
        let mut seen: Vec<Option<&Rat>> = vec![None; self.k];
        for (x, &c) in v.iter().zip(&self.class_of) {
            match seen[c] {
                None => seen[c] = Some(x),
                Some(y) if y != x => return false,
                _ => {}
            }
        }
        true
    }

    /// The canonical refinement by the values of `v`: within each class, labels are
    /// split by value and the pieces are numbered in increasing value order.
    pub fn refine_slice(&self, v: &[Rat]) -> OntoMap {
        let mut values: Vec<BTreeSet<&Rat>> = vec![BTreeSet::new(); self.k];
        for (x, &c) in v.iter().zip(&self.class_of) {
            values[c].insert(x);
        }
        let mut offsets = Vec::with_capacity(self.k);
        let mut total = 0;
        for vals in &values {
            offsets.push(total);
            total += vals.len();
        }
        let class_of = v
            .iter()
            .zip(&self.class_of)
            .map(|(x, &c)| offsets[c] + values[c].range::<Rat, _>(..x).count())
            .collect();
        OntoMap { domain: self.domain.clone(), k: total, class_of }
    }
}

fn on_domain(u: &IVec, sigma: &OntoMap) -> Result<IVec> {
    u.aligned_to(&sigma.domain)
}

pub fn fold(u: &IVec, sigma: &OntoMap) -> Result<IVec> {
    let u = on_domain(u, sigma)?;
    IVec::new(sigma.codomain(), sigma.fold_slice(&u.values))
}

pub fn unfold(v: &IVec, sigma: &OntoMap) -> Result<IVec> {
    let v = v.aligned_to(&sigma.codomain())?;
    IVec::new(sigma.domain.clone(), sigma.unfold_slice(&v.values))
}

pub fn respects(sigma: &OntoMap, v: &IVec) -> Result<bool> {
    Ok(sigma.respects_slice(&on_domain(v, sigma)?.values))
}

pub fn refine(sigma: &OntoMap, v: &IVec) -> Result<OntoMap> {
    Ok(sigma.refine_slice(&on_domain(v, sigma)?.values))
}

/// The averaging map `R` (k x |I|): row `j` spreads `1/|class j|` over class `j`.
pub fn averaging_matrix(sigma: &OntoMap) -> IMat {
    let mut r = IMat::zeros(&sigma.codomain(), &sigma.domain);
    let sizes = sigma.class_sizes();
    for (i, &c) in sigma.class_of.iter().enumerate() {
        r.set(c, i, Rat::new(1.into(), sizes[c].into()));
    }
    r
}

/// The copying map `L` (|I| x k).
pub fn copying_matrix(sigma: &OntoMap) -> IMat {
    let mut l = IMat::zeros(&sigma.domain, &sigma.codomain());
    for (i, &c) in sigma.class_of.iter().enumerate() {
        l.set(i, c, Rat::one());
    }
    l
}

/// Lifts the folded ellipsoid `{y : (y-a)^T A (y-a) <= 1}` to the cylinder
/// `{x : (fold(x)-a)^T A (fold(x)-a) <= 1}`, returned as `(R^T A R, L a)`.
pub fn unfold_ellipsoid(shape: &IMat, center: &IVec, sigma: &OntoMap) -> Result<(IMat, IVec)> {
    let cod = sigma.codomain();
    if !shape.rows.same_members(&cod) || !shape.cols.same_members(&cod) {
        return Err(Error::IndexMismatch("ellipsoid does not live on the folded space".into()));
    }
    let r = averaging_matrix(sigma);
    let lifted = r.transpose().mul(shape)?.mul(&r)?;
    let c = unfold(center, sigma)?;
    Ok((lifted, c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn dom(n: usize) -> IndexSet {
        IndexSet::new((0..n).map(|i| format!("i{i}"))).unwrap()
    }

    #[test]
    fn fold_example() {
        let s = OntoMap::new(dom(3), vec![1, 1, 2]).unwrap();
        let u = IVec::new(dom(3), vec![int(1), int(3), int(5)]).unwrap();
        assert_eq!(fold(&u, &s).unwrap().values, vec![int(2), int(5)]);
        let v = IVec::new(IndexSet::range(2), vec![int(2), int(5)]).unwrap();
        assert_eq!(unfold(&v, &s).unwrap().values, vec![int(2), int(2), int(5)]);
    }

    #[test]
    fn refine_example() {
        let s = OntoMap::constant(&dom(4));
        let v = IVec::new(dom(4), vec![int(3), int(1), int(3), int(2)]).unwrap();
        assert!(!respects(&s, &v).unwrap());
        let r = refine(&s, &v).unwrap();
        assert_eq!(r.class_count(), 3);
        assert_eq!((0..4).map(|i| r.class_of(i)).collect::<Vec<_>>(), vec![3, 1, 3, 2]);
        assert!(respects(&r, &v).unwrap());
    }

    #[test]
    fn onto_is_checked() {
        assert!(OntoMap::new(dom(2), vec![1, 3]).is_err());
        assert!(OntoMap::new(dom(2), vec![0, 1]).is_err());
    }

    #[test]
    fn unfold_ellipsoid_matches_membership() {
        let s = OntoMap::new(dom(3), vec![1, 2, 2]).unwrap();
        let shape = IMat::square(vec![vec![int(1), int(0)], vec![int(0), int(4)]]);
        let center = IVec::new(IndexSet::range(2), vec![rat(1, 2), int(0)]).unwrap();
        let (a, c) = unfold_ellipsoid(&shape, &center, &s).unwrap();
        assert_eq!(c.values, vec![rat(1, 2), int(0), int(0)]);
        let x = vec![int(1), rat(1, 4), rat(-1, 4)];
        let d: Vec<Rat> = x.iter().zip(&c.values).map(|(p, q)| p - q).collect();
        let xv = IVec::new(dom(3), d).unwrap();
        let q = crate::linalg::inner_product(&xv, &a.mul_vec(&xv).unwrap()).unwrap();
        assert_eq!(q, rat(1, 4));
    }
}
