mod common;

use num_traits::{One, Zero};
use proptest::prelude::*;

use common::{brute_force_sat, encodes_isomorphism, frac, int, psd_by_sturm};
use sosfold::folding::OntoMap;
use sosfold::iso::{self, Graph};
use sosfold::linalg::{self, IMat, IVec, IndexSet, NormKind};
use sosfold::lp::{solve_lp, LinearProgram};
use sosfold::sos::{self, PolySystem, Polynomial, PseudoExpectation, RefutationStatus, SearchOptions};
use sosfold::Rat;

fn rats(len: usize) -> impl Strategy<Value = Vec<Rat>> {
    prop::collection::vec((-20i64..=20, 1i64..=6), len).prop_map(|v| v.into_iter().map(|(n, d)| frac(n, d)).collect())
}

/// An onto map on `n` labels together with `n`.
fn onto_map() -> impl Strategy<Value = OntoMap> {
    (1usize..=6).prop_flat_map(|n| {
        prop::collection::vec(0usize..n, n).prop_map(move |raw| {
            // renumber the used values 1..=k in order of first appearance
            let mut seen: Vec<usize> = Vec::new();
            let classes = raw
                .iter()
                .map(|r| match seen.iter().position(|s| s == r) {
                    Some(p) => p + 1,
                    None => {
                        seen.push(*r);
                        seen.len()
                    }
                })
                .collect();
            OntoMap::new(IndexSet::new((0..n).map(|i| format!("i{i}"))).unwrap(), classes).unwrap()
        })
    })
}

fn map_and_vector() -> impl Strategy<Value = (OntoMap, Vec<Rat>)> {
    onto_map().prop_flat_map(|s| {
        let n = s.domain().len();
        (Just(s), rats(n))
    })
}

fn small_graph() -> impl Strategy<Value = Graph> {
    (1usize..=4).prop_flat_map(graph_of_order)
}

fn graph_of_order(n: usize) -> impl Strategy<Value = Graph> {
    {
        prop::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
            let edges: Vec<(usize, usize)> = pairs.into_iter().zip(bits).filter(|(_, b)| *b).map(|(e, _)| e).collect();
            Graph::from_edges(n, &edges).unwrap()
        })
    }
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<usize>>()).prop_shuffle()
}

proptest! {
    #[test]
    fn unfold_then_fold_is_identity((sigma, v) in onto_map().prop_flat_map(|s| { let k = s.class_count(); (Just(s), rats(k)) })) {
        prop_assert_eq!(sigma.fold_slice(&sigma.unfold_slice(&v)), v);
    }

    #[test]
    fn folding_contracts_the_norm((sigma, u) in map_and_vector()) {
        let folded = linalg::norm_slice(&sigma.fold_slice(&u), NormKind::L2Squared);
        prop_assert!(folded <= linalg::norm_slice(&u, NormKind::L2Squared));
        let inf = linalg::norm_slice(&sigma.fold_slice(&u), NormKind::LInf);
        prop_assert!(inf <= linalg::norm_slice(&u, NormKind::LInf));
    }

    #[test]
    fn unfolded_vectors_are_respected((sigma, v) in onto_map().prop_flat_map(|s| { let k = s.class_count(); (Just(s), rats(k)) })) {
        prop_assert!(sigma.respects_slice(&sigma.unfold_slice(&v)));
    }

    #[test]
    fn refinement_respects_and_is_idempotent((sigma, v) in map_and_vector()) {
        let r = sigma.refine_slice(&v);
        prop_assert!(r.respects_slice(&v));
        prop_assert_eq!(r.refine_slice(&v), r.clone());
        prop_assert_eq!(r.class_count() == sigma.class_count(), sigma.respects_slice(&v));
        for i in 0..v.len() {
            for j in 0..v.len() {
                if r.class_of(i) == r.class_of(j) {
                    prop_assert_eq!(sigma.class_of(i), sigma.class_of(j));
                }
            }
        }
    }

    #[test]
    fn cauchy_schwarz((u, v) in (1usize..=6).prop_flat_map(|n| (rats(n), rats(n)))) {
        let ip = linalg::dot(&u, &v);
        prop_assert!(&ip * &ip <= linalg::norm_slice(&u, NormKind::L2Squared) * linalg::norm_slice(&v, NormKind::L2Squared));
    }

    #[test]
    fn gram_matrices_are_psd(b in (1usize..=4, 1usize..=4).prop_flat_map(|(r, c)| prop::collection::vec(rats(c), r))) {
        let c = b[0].len();
        let g: Vec<Vec<Rat>> = (0..c)
            .map(|i| (0..c).map(|j| b.iter().map(|row| &row[i] * &row[j]).sum()).collect())
            .collect();
        prop_assert!(linalg::psd_check(&IMat::square(g)).unwrap());
    }

    #[test]
    fn psd_check_matches_eigenvalues(entries in prop::collection::vec(-3i64..=3, 6)) {
        let m = vec![
            vec![int(entries[0]), int(entries[1]), int(entries[2])],
            vec![int(entries[1]), int(entries[3]), int(entries[4])],
            vec![int(entries[2]), int(entries[4]), int(entries[5])],
        ];
        prop_assert_eq!(linalg::psd_check(&IMat::square(m.clone())).unwrap(), psd_by_sturm(&m));
    }

    #[test]
    fn eigenvalue_estimate_brackets(entries in prop::collection::vec(-4i64..=4, 3), exp in 1u32..10) {
        let m = IMat::square(vec![vec![int(entries[0]), int(entries[1])], vec![int(entries[1]), int(entries[2])]]);
        let delta = frac(1, 1 << exp);
        let approx = linalg::min_eigenvalue_approx(&m, &delta).unwrap();
        prop_assert!(linalg::psd_shift_check(&m, &(&approx - &delta)).unwrap());
        let above = &approx + &delta;
        // strictly above the least eigenvalue unless it sits exactly on the boundary
        prop_assert!(!linalg::psd_shift_check(&m, &(&above + frac(1, 1 << 20))).unwrap());
    }

    #[test]
    fn lp_optimum_is_feasible_and_no_worse_than_feasible_points(
        rows in prop::collection::vec(prop::collection::vec(-3i64..=3, 2), 1..=4),
        rhs in prop::collection::vec(0i64..=4, 4),
        obj in prop::collection::vec(-3i64..=3, 2),
        probe in prop::collection::vec(-2i64..=2, 2),
    ) {
        let mut p = LinearProgram::new(IndexSet::new(["x", "y"]).unwrap(), obj.iter().map(|&c| int(c)).collect()).unwrap();
        for (i, r) in rows.iter().enumerate() {
            p.add_constraint(format!("c{i}"), r.iter().map(|&c| int(c)).collect(), int(rhs[i])).unwrap();
        }
        // rhs >= 0 makes the origin feasible
        let v = solve_lp(&p);
        prop_assert!(v.flag >= 0);
        let probe: Vec<Rat> = probe.iter().map(|&c| int(c)).collect();
        if v.flag == 0 {
            let x = v.solution.unwrap();
            prop_assert!(p.is_feasible_point(&x.values));
            if p.is_feasible_point(&probe) {
                prop_assert!(v.value.unwrap() <= linalg::dot(&p.objective, &probe));
            }
        }
    }

    #[test]
    fn lp_value_scales_with_the_objective(
        rows in prop::collection::vec(prop::collection::vec(-3i64..=3, 2), 1..=4),
        rhs in prop::collection::vec(-2i64..=4, 4),
        obj in prop::collection::vec(-3i64..=3, 2),
        scale in 1i64..=5,
    ) {
        let build = |c: i64| {
            let mut p = LinearProgram::new(IndexSet::new(["x", "y"]).unwrap(), obj.iter().map(|&o| int(o * c)).collect()).unwrap();
            for (i, r) in rows.iter().enumerate() {
                p.add_constraint(format!("c{i}"), r.iter().map(|&v| int(v)).collect(), int(rhs[i])).unwrap();
            }
            solve_lp(&p)
        };
        let (a, b) = (build(1), build(scale));
        prop_assert_eq!(a.flag, b.flag);
        if a.flag == 0 {
            prop_assert_eq!(a.value.unwrap() * int(scale), b.value.unwrap());
        }
    }

    #[test]
    fn polynomial_product_distributes(a in rats(3), b in rats(3), c in rats(3)) {
        let lin = |v: &[Rat]| Polynomial::constant(2, v[0].clone())
            .add(&Polynomial::var(2, 0).scale(&v[1]))
            .add(&Polynomial::var(2, 1).scale(&v[2]));
        let (p, q, r) = (lin(&a), lin(&b), lin(&c));
        prop_assert_eq!(p.mul(&q.add(&r)), p.mul(&q).add(&p.mul(&r)));
        prop_assert!(p.sub(&p).is_zero());
    }

    #[test]
    fn point_evaluations_give_pseudoexpectations(bits in prop::collection::vec(any::<bool>(), 1..=3), d in 1u32..=2) {
        let n = bits.len();
        let f = PseudoExpectation::point(n, d, &bits);
        let q = PolySystem::new((0..n).map(|i| format!("x{i}")).collect()).unwrap();
        prop_assert!(sos::check_pseudoexpectation(&f, &q, d).unwrap());
        prop_assert!(sos::pe_bounds_check(&f));
    }

    #[test]
    fn nonnegative_combinations_keep_localizing_matrices_psd(
        bits in prop::collection::vec(any::<bool>(), 2),
        other in prop::collection::vec(any::<bool>(), 2),
        weights in prop::collection::vec(0i64..=3, 3),
    ) {
        // F averages two points; the combination includes n - sum x_i^2 from the axioms
        let n = 2;
        let f = PseudoExpectation::average(&[PseudoExpectation::point(n, 1, &bits), PseudoExpectation::point(n, 1, &other)]).unwrap();
        let one = Polynomial::constant(n, Rat::one());
        let parts = [Polynomial::var(n, 0), one.sub(&Polynomial::var(n, 1)), Polynomial::constant(n, int(2))
            .sub(&Polynomial::var(n, 0).mul(&Polynomial::var(n, 0)))
            .sub(&Polynomial::var(n, 1).mul(&Polynomial::var(n, 1)))];
        let mut p = Polynomial::zero(n);
        for (w, q) in weights.iter().zip(&parts) {
            prop_assert!(linalg::psd_check(&f.localizing_matrix(q, (2 - q.degree()) / 2).unwrap()).unwrap());
            p = p.add(&q.scale(&int(*w)));
        }
        if !p.is_zero() {
            prop_assert!(linalg::psd_check(&f.localizing_matrix(&p, (2 - p.degree()) / 2).unwrap()).unwrap());
        }
    }

    #[test]
    fn renaming_variables_keeps_the_status(
        coeffs in prop::collection::vec(-2i64..=2, 4),
        perm in permutation(3),
    ) {
        let n = 3;
        let mut p = Polynomial::constant(n, int(coeffs[3]));
        for i in 0..n {
            p = p.add(&Polynomial::var(n, i).scale(&int(coeffs[i])));
        }
        let mut q = PolySystem::new(vec!["a".into(), "b".into(), "c".into()]).unwrap();
        q.add_equation("e", p).unwrap();
        let opts = SearchOptions { max_matrix_rows: 0, ..SearchOptions::default() };
        let a = sos::refutation_search(&q, 1, &opts).unwrap();
        let b = sos::refutation_search(&q.permuted(&perm), 1, &opts).unwrap();
        prop_assert_eq!(a.status, b.status);
        prop_assert_eq!(a.status == RefutationStatus::NotRefutable, brute_force_sat(&q).is_some());
    }

    #[test]
    fn iso_system_solutions_are_isomorphisms((g, h) in (1usize..=3).prop_flat_map(|n| (graph_of_order(n), graph_of_order(n)))) {
        let sys = iso::iso_system(&g, &h);
        for x in common::assignments(sys.n()) {
            prop_assert_eq!(sys.is_satisfied_by(&x), encodes_isomorphism(&g, &h, &x));
        }
    }

    #[test]
    fn relabelling_keeps_wl_verdicts((g, perm) in small_graph().prop_flat_map(|g| { let n = g.order(); (Just(g), permutation(n)) }), h in small_graph(), k in 1usize..=3) {
        let relabeled = g.relabeled(&perm);
        prop_assert!(iso::wl_equivalent(&g, &relabeled, k).unwrap());
        prop_assert_eq!(iso::wl_equivalent(&g, &h, k).unwrap(), iso::wl_equivalent(&relabeled, &h, k).unwrap());
        prop_assert_eq!(iso::wl_equivalent(&g, &h, k).unwrap(), iso::wl_equivalent(&h, &g, k).unwrap());
    }

    #[test]
    fn refinement_commutes_with_relabelling((sigma, v) in map_and_vector(), seed in any::<u64>()) {
        let n = v.len();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let mut names = vec![String::new(); n];
        let mut pv = vec![Rat::zero(); n];
        for i in 0..n {
            names[perm[i]] = sigma.domain().label(i).to_string();
            pv[perm[i]] = v[i].clone();
        }
        let dom = IndexSet::new(names).unwrap();
        prop_assert_eq!(sigma.relabel(&dom).unwrap().refine_slice(&pv), sigma.refine_slice(&v).relabel(&dom).unwrap());
    }
}

#[test]
fn ivec_alignment_round_trip() {
    let a = IndexSet::new(["p", "q", "r"]).unwrap();
    let b = IndexSet::new(["r", "p", "q"]).unwrap();
    let v = IVec::new(a.clone(), vec![int(1), int(2), int(3)]).unwrap();
    let w = v.aligned_to(&b).unwrap();
    assert_eq!(w.values, vec![int(3), int(1), int(2)]);
    assert_eq!(w.aligned_to(&a).unwrap(), v);
}
