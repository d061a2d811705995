//! Graphs, the isomorphism polynomial system, Weisfeiler-Leman equivalence
//! and the harness comparing WL levels with refutation degrees.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::rational::{format_rat, Rat};
use crate::sos::{refutation_search, PolySystem, Polynomial, RefutationStatus, SearchOptions};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    vertices: Vec<String>,
    adjacency: Vec<Vec<bool>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AtomicType {
    Equal,
    Edge,
    NonEdge,
}

impl Graph {
    pub fn new<S: AsRef<str>>(vertices: Vec<String>, edges: &[(S, S)]) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if index.insert(v.clone(), i).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate vertex {v}")));
            }
        }
        let n = vertices.len();
        let mut adjacency = vec![vec![false; n]; n];
        for (a, b) in edges {
            let (a, b) = (a.as_ref(), b.as_ref());
            let i = *index.get(a).ok_or_else(|| Error::InvalidArgument(format!("unknown vertex {a}")))?;
            let j = *index.get(b).ok_or_else(|| Error::InvalidArgument(format!("unknown vertex {b}")))?;
            if i == j {
                return Err(Error::InvalidArgument(format!("self-loop at {a}")));
            }
            adjacency[i][j] = true;
            adjacency[j][i] = true;
        }
        Ok(Graph { vertices, adjacency })
    }

    /// Vertices `0..n` labelled by their number.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let names: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let pairs: Vec<(String, String)> = edges.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        Graph::new(names, &pairs)
    }

    pub fn cycle(n: usize) -> Self {
        let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::from_edges(n, &edges).expect("cycle")
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        Graph::from_edges(n, &edges).expect("complete graph")
    }

    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let n = self.order();
        let mut vertices: Vec<String> = self.vertices.iter().map(|v| format!("{v}'0")).collect();
        vertices.extend(other.vertices.iter().map(|v| format!("{v}'1")));
        let mut edges = self.edge_indices();
        edges.extend(other.edge_indices().into_iter().map(|(a, b)| (a + n, b + n)));
        let pairs: Vec<(String, String)> = edges.iter().map(|&(a, b)| (vertices[a].clone(), vertices[b].clone())).collect();
        Graph::new(vertices, &pairs).expect("union of valid graphs")
    }

    pub fn order(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.adjacency[i][j]
    }

    pub fn edge_indices(&self) -> Vec<(usize, usize)> {
        let n = self.order();
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| self.adjacency[i][j]).collect()
    }

    pub fn edges(&self) -> Vec<(String, String)> {
        self.edge_indices().into_iter().map(|(i, j)| (self.vertices[i].clone(), self.vertices[j].clone())).collect()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].iter().filter(|&&b| b).count()
    }

    pub fn degree_sequence(&self) -> Vec<usize> {
        let mut d: Vec<usize> = (0..self.order()).map(|i| self.degree(i)).collect();
        d.sort_unstable_by(|a, b| b.cmp(a));
        d
    }

    fn position(&self, v: &str) -> Result<usize> {
        self.vertices
            .iter()
            .position(|x| x == v)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown vertex {v}")))
    }

    fn type_at(&self, i: usize, j: usize) -> AtomicType {
        if i == j {
            AtomicType::Equal
        } else if self.adjacency[i][j] {
            AtomicType::Edge
        } else {
            AtomicType::NonEdge
        }
    }

    /// The same graph with vertex `i` moved to position `perm[i]`.
    pub fn relabeled(&self, perm: &[usize]) -> Graph {
        let n = self.order();
        let mut vertices = vec![String::new(); n];
        for i in 0..n {
            vertices[perm[i]] = self.vertices[i].clone();
        }
        let mut adjacency = vec![vec![false; n]; n];
        for i in 0..n {
            for j in 0..n {
                adjacency[perm[i]][perm[j]] = self.adjacency[i][j];
            }
        }
        Graph { vertices, adjacency }
    }
}

pub fn atomic_type(g: &Graph, u1: &str, u2: &str) -> Result<AtomicType> {
    Ok(g.type_at(g.position(u1)?, g.position(u2)?))
}

/// Name of the variable for the pair `(u, v)`.
pub fn pair_variable(u: &str, v: &str) -> String {
    format!("x[{u},{v}]")
}

/// One variable per pair `(u, v)`, row and column sums equal to one, and
/// `x_{u1 v1} x_{u2 v2} = 0` whenever the atomic types of `(u1, u2)` and `(v1, v2)` differ.
pub fn iso_system(g: &Graph, h: &Graph) -> PolySystem {
    let (m, n) = (g.order(), h.order());
    let var = |u: usize, v: usize| u * n + v;
    let names: Vec<String> = (0..m)
        .flat_map(|u| (0..n).map(move |v| (u, v)))
        .map(|(u, v)| pair_variable(&g.vertices[u], &h.vertices[v]))
        .collect();
    let total = names.len();
    let mut sys = PolySystem::new(names).expect("pair labels are distinct");
    let one = Polynomial::constant(total, Rat::one());
    for u in 0..m {
        let sum = (0..n).fold(Polynomial::zero(total), |acc, v| acc.add(&Polynomial::var(total, var(u, v))));
        sys.add_equation(format!("row[{}]", g.vertices[u]), sum.sub(&one)).expect("arity");
    }
    for v in 0..n {
        let sum = (0..m).fold(Polynomial::zero(total), |acc, u| acc.add(&Polynomial::var(total, var(u, v))));
        sys.add_equation(format!("col[{}]", h.vertices[v]), sum.sub(&one)).expect("arity");
    }
    for a in 0..total {
        for b in a + 1..total {
            let (u1, v1, u2, v2) = (a / n, a % n, b / n, b % n);
            if g.type_at(u1, u2) != h.type_at(v1, v2) {
                let p = Polynomial::var(total, a).mul(&Polynomial::var(total, b));
                let name = format!("type[{},{};{},{}]", g.vertices[u1], h.vertices[v1], g.vertices[u2], h.vertices[v2]);
                sys.add_equation(name, p).expect("arity");
            }
        }
    }
    sys
}

/// Color refinement run on both graphs with a shared color dictionary.
fn color_refinement(g: &Graph, h: &Graph) -> (Vec<usize>, Vec<usize>) {
    let mut cg = vec![0usize; g.order()];
    let mut ch = vec![0usize; h.order()];
    let mut classes = 1;
    loop {
        let sig = |graph: &Graph, col: &[usize], i: usize| {
            let mut nb: Vec<usize> = (0..graph.order()).filter(|&j| graph.adjacent(i, j)).map(|j| col[j]).collect();
            nb.sort_unstable();
            (col[i], nb)
        };
        let sg: Vec<_> = (0..g.order()).map(|i| sig(g, &cg, i)).collect();
        let sh: Vec<_> = (0..h.order()).map(|i| sig(h, &ch, i)).collect();
        let dict: BTreeMap<_, usize> = sg
            .iter()
            .chain(&sh)
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .enumerate()
            .map(|(i, s)| (s, i))
            .collect();
        cg = sg.iter().map(|s| dict[s]).collect();
        ch = sh.iter().map(|s| dict[s]).collect();
        if dict.len() == classes {
            return (cg, ch);
        }
        classes = dict.len();
    }
}

fn histogram(colors: &[usize]) -> BTreeMap<usize, usize> {
    let mut h = BTreeMap::new();
    for &c in colors {
        *h.entry(c).or_insert(0) += 1;
    }
    h
}

fn tuples(n: usize, len: usize) -> Vec<Vec<usize>> {
    let total = n.pow(len as u32);
    (0..total)
        .map(|mut t| {
            let mut v = vec![0; len];
            for slot in v.iter_mut().rev() {
                *slot = t % n;
                t /= n;
            }
            v
        })
        .collect()
}

fn tuple_type(g: &Graph, t: &[usize]) -> Vec<AtomicType> {
    let mut out = Vec::with_capacity(t.len() * t.len());
    for &a in t {
        for &b in t {
            out.push(g.type_at(a, b));
        }
    }
    out
}

/// Folklore WL on `dim`-tuples of both graphs with a shared dictionary.
fn folklore_wl(g: &Graph, h: &Graph, dim: usize) -> (Vec<usize>, Vec<usize>) {
    let tg = tuples(g.order(), dim);
    let th = tuples(h.order(), dim);
    let initial = |graph: &Graph, ts: &[Vec<usize>]| -> Vec<Vec<AtomicType>> { ts.iter().map(|t| tuple_type(graph, t)).collect() };
    let (ig, ih) = (initial(g, &tg), initial(h, &th));
    let dict: BTreeMap<&Vec<AtomicType>, usize> = ig
        .iter()
        .chain(&ih)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(i, s)| (s, i))
        .collect();
    let mut cg: Vec<usize> = ig.iter().map(|s| dict[s]).collect();
    let mut ch: Vec<usize> = ih.iter().map(|s| dict[s]).collect();
    let mut classes = dict.len();
    let index = |n: usize, t: &[usize]| t.iter().fold(0, |acc, &x| acc * n + x);
    loop {
        let refine = |graph: &Graph, ts: &[Vec<usize>], col: &[usize]| -> Vec<(usize, Vec<Vec<usize>>)> {
            let n = graph.order();
            par::par_map(ts, |t| {
                let mut multiset: Vec<Vec<usize>> = (0..n)
                    .map(|w| {
                        (0..dim)
                            .map(|i| {
                                let mut s = t.clone();
                                s[i] = w;
                                col[index(n, &s)]
                            })
                            .collect()
                    })
                    .collect();
                multiset.sort_unstable();
                (col[index(n, t)], multiset)
            })
        };
        let sg = refine(g, &tg, &cg);
        let sh = refine(h, &th, &ch);
        let dict: BTreeMap<&(usize, Vec<Vec<usize>>), usize> = sg
            .iter()
            .chain(&sh)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .enumerate()
            .map(|(i, s)| (s, i))
            .collect();
        let ng: Vec<usize> = sg.iter().map(|s| dict[s]).collect();
        let nh: Vec<usize> = sh.iter().map(|s| dict[s]).collect();
        let stable = dict.len() == classes;
        classes = dict.len();
        cg = ng;
        ch = nh;
        if stable {
            return (cg, ch);
        }
    }
}

/// `C^k` equivalence: vertex counts for `k = 1`, color refinement for `k = 2`,
/// folklore `(k-1)`-WL otherwise.
pub fn wl_equivalent(g: &Graph, h: &Graph, k: usize) -> Result<bool> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    if g.order() != h.order() {
        return Ok(false);
    }
    if k == 1 {
        return Ok(true);
    }
    let (cg, ch) = if k == 2 { color_refinement(g, h) } else { folklore_wl(g, h, k - 1) };
    Ok(histogram(&cg) == histogram(&ch))
}

/// Whether no degree-`k` Sherali-Adams refutation of `iso_system(g, h)` exists,
/// decided through `C^k` equivalence.
pub fn sa_nonrefutable_level(g: &Graph, h: &Graph, k: usize) -> Result<bool> {
    wl_equivalent(g, h, k)
}

/// An isomorphism as `map[u] = v`, found by backtracking.
pub fn find_isomorphism(g: &Graph, h: &Graph) -> Option<Vec<usize>> {
    let n = g.order();
    if n != h.order() || g.degree_sequence() != h.degree_sequence() {
        return None;
    }
    let (cg, ch) = color_refinement(g, h);
    if histogram(&cg) != histogram(&ch) {
        return None;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&u| std::cmp::Reverse(g.degree(u)));
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn rec(
        k: usize,
        order: &[usize],
        g: &Graph,
        h: &Graph,
        cg: &[usize],
        ch: &[usize],
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
    ) -> bool {
        if k == order.len() {
            return true;
        }
        let u = order[k];
        for v in 0..h.order() {
            if used[v] || cg[u] != ch[v] {
                continue;
            }
            if order[..k].iter().any(|&w| g.adjacent(u, w) != h.adjacent(v, map[w])) {
                continue;
            }
            map[u] = v;
            used[v] = true;
            if rec(k + 1, order, g, h, cg, ch, map, used) {
                return true;
            }
            used[v] = false;
            map[u] = usize::MAX;
        }
        false
    }
    rec(0, &order, g, h, &cg, &ch, &mut map, &mut used).then_some(map)
}

/// Assignment of `iso_system(g, h)` encoding the bijection `map`.
pub fn permutation_assignment(map: &[usize], n: usize) -> Vec<bool> {
    let mut x = vec![false; map.len() * n];
    for (u, &v) in map.iter().enumerate() {
        x[u * n + v] = true;
    }
    x
}

/// `(2d, status)` per tested degree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeStatus {
    pub degree: u32,
    pub status: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollapseRow {
    pub pair: String,
    /// Smallest `k` with `C^k` inequivalence, `None` when none up to the cap.
    pub wl_level: Option<usize>,
    pub isomorphic: Option<bool>,
    pub sos_status: Vec<DegreeStatus>,
}

impl CollapseRow {
    pub fn min_refuted_degree(&self) -> Option<u32> {
        self.sos_status.iter().filter(|s| s.status == "REFUTED").map(|s| s.degree).min()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatioRow {
    pub pair: String,
    pub wl_level: usize,
    pub min_refuted_degree: u32,
    /// `min_refuted_degree / wl_level`.
    pub ratio: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollapseReport {
    pub rows: Vec<CollapseRow>,
    pub ratios: Vec<RatioRow>,
}

/// Largest graph order for which the bijection search is run.
pub const BRUTE_FORCE_ORDER: usize = 8;

/// WL level, brute-force isomorphism status and refutation status at each degree `2, 4, ..., 2 d_max`.
pub fn compare(id: &str, g: &Graph, h: &Graph, d_max: u32, wl_cap: usize, opts: &SearchOptions) -> Result<CollapseRow> {
    let mut wl_level = None;
    for k in 1..=wl_cap {
        if !wl_equivalent(g, h, k)? {
            wl_level = Some(k);
            break;
        }
    }
    let iso = (g.order().max(h.order()) <= BRUTE_FORCE_ORDER).then(|| find_isomorphism(g, h));
    let isomorphic = iso.as_ref().map(Option::is_some);
    let sys = iso_system(g, h);
    let mut opts = opts.clone();
    match &iso {
        Some(Some(map)) => opts.candidates.push(permutation_assignment(map, h.order())),
        // satisfying assignments are exactly the isomorphisms, so enumeration cannot help
        Some(None) => opts.assignment_budget = 0,
        None => {}
    }
    let mut sos_status = Vec::new();
    for d in 1..=d_max {
        let v = if sys.n() == 0 {
            None
        } else {
            Some(refutation_search(&sys, d, &opts)?)
        };
        let (status, note) = match v {
            Some(v) => (v.status, v.note),
            None => (RefutationStatus::NotRefutable, "both graphs are empty".into()),
        };
        if status == RefutationStatus::Refuted && isomorphic == Some(true) {
            return Err(Error::Invariant(format!("{id}: refutation found for isomorphic graphs")));
        }
        sos_status.push(DegreeStatus { degree: 2 * d, status: status.as_str().into(), note });
    }
    Ok(CollapseRow { pair: id.into(), wl_level, isomorphic, sos_status })
}

/// Runs [`compare`] on every pair in parallel and tabulates observed ratios.
pub fn collapse_experiment(
    pairs: &[(String, Graph, Graph)],
    d_max: u32,
    wl_cap: usize,
    opts: &SearchOptions,
) -> Result<CollapseReport> {
    let rows: Vec<CollapseRow> = par::par_map(pairs, |(id, g, h)| compare(id, g, h, d_max, wl_cap, opts))
        .into_iter()
        .collect::<Result<_>>()?;
    let ratios = rows
        .iter()
        .filter_map(|r| {
            let (k, deg) = (r.wl_level?, r.min_refuted_degree()?);
            Some(RatioRow {
                pair: r.pair.clone(),
                wl_level: k,
                min_refuted_degree: deg,
                ratio: format_rat(&Rat::new((deg as i64).into(), (k as i64).into())),
            })
        })
        .collect();
    Ok(CollapseReport { rows, ratios })
}

/// All graphs on `n` vertices up to isomorphism, as edge lists over `0..n`.
pub fn graphs_up_to_iso(n: usize) -> Vec<Graph> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut out: Vec<Graph> = Vec::new();
    for mask in 0u64..(1u64 << pairs.len()) {
        let edges: Vec<(usize, usize)> = pairs.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &e)| e).collect();
        let g = Graph::from_edges(n, &edges).expect("valid edges");
        if !out.iter().any(|o| find_isomorphism(o, &g).is_some()) {
            out.push(g);
        }
    }
    out
}

/// Non-isomorphic pairs on at most `max_order` vertices with equal degree sequences.
pub fn equal_degree_pairs(max_order: usize) -> Vec<(Graph, Graph)> {
    let mut out = Vec::new();
    for n in 1..=max_order {
        let gs = graphs_up_to_iso(n);
        for i in 0..gs.len() {
            for j in i + 1..gs.len() {
                if gs[i].degree_sequence() == gs[j].degree_sequence() {
                    out.push((gs[i].clone(), gs[j].clone()));
                }
            }
        }
    }
    out
}

/// Compact CFI pair over `K_4`: vertices `(v, S)` with `S` an even subset of
/// the neighbours of `v`; `(v, S)` and `(w, T)` are adjacent iff
/// `[w in S] = [v in T]`, flipped on one edge for the twisted copy.
pub fn cfi_k4_pair() -> (Graph, Graph) {
    let build = |twisted: bool| {
        let mut verts = Vec::new();
        for v in 0..4usize {
            let nbrs: Vec<usize> = (0..4).filter(|&w| w != v).collect();
            for mask in 0u32..8 {
                if mask.count_ones() % 2 == 0 {
                    let set: BTreeSet<usize> = nbrs.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &w)| w).collect();
                    verts.push((v, set));
                }
            }
        }
        let names: Vec<String> = verts
            .iter()
            .map(|(v, s)| format!("{v}:{}", s.iter().map(|w| w.to_string()).collect::<Vec<_>>().join("")))
            .collect();
        let mut edges = Vec::new();
        for a in 0..verts.len() {
            for b in a + 1..verts.len() {
                let ((v, s), (w, t)) = (&verts[a], &verts[b]);
                if v == w {
                    continue;
                }
                let mut same = s.contains(w) == t.contains(v);
                if twisted && (*v.min(w), *v.max(w)) == (0, 1) {
                    same = !same;
                }
                if same {
                    edges.push((names[a].clone(), names[b].clone()));
                }
            }
        }
        Graph::new(names, &edges).expect("valid CFI graph")
    };
    (build(false), build(true))
}
