use std::collections::BTreeMap;

use conjpair::bounds::{in_gamma, in_theta, BoundChecker};
use conjpair::channels::{moment_formula, sample_channel_indexed, InputSpec};
use conjpair::diagram::DiagramElement;
use conjpair::limit::{p_from_a, AParameters};
use conjpair::partial_perm::sign_between;
use conjpair::tensor::constructions::tensor_permutation;
use conjpair::{wg_exact, PartialPermutation, Permutation};
use proptest::prelude::*;

fn arb_perm(p: usize) -> impl Strategy<Value = Permutation> {
    Just((0..p).collect::<Vec<_>>())
        .prop_shuffle()
        .prop_map(|v| Permutation::from_images(v).unwrap())
}

fn arb_partial(r: usize) -> impl Strategy<Value = PartialPermutation> {
    (arb_perm(r), proptest::collection::vec(any::<bool>(), r)).prop_map(move |(p, keep)| {
        let pairs: Vec<(usize, usize)> = (0..r).filter(|&x| keep[x]).map(|x| (x, p.apply(x))).collect();
        PartialPermutation::from_pairs(r, &pairs).unwrap()
    })
}

fn arb_a_map(r: usize) -> impl Strategy<Value = AParameters> {
    let all = PartialPermutation::enumerate_all(r).unwrap();
    proptest::collection::vec(0.0f64..=1.0, all.len()).prop_map(move |vals| {
        let values: BTreeMap<_, _> = all
            .iter()
            .zip(vals)
            .map(|(b, v)| (b.clone(), if b.is_empty() { 1.0 } else { v }))
            .collect();
        AParameters::new(r, values).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_order_axioms(a in arb_partial(3), b in arb_partial(3), c in arb_partial(3)) {
        prop_assert!(a.leq(&a).unwrap());
        if a.leq(&b).unwrap() && b.leq(&a).unwrap() {
            prop_assert_eq!(&a, &b);
        }
        if a.leq(&b).unwrap() && b.leq(&c).unwrap() {
            prop_assert!(a.leq(&c).unwrap());
        }
    }

    #[test]
    fn mobius_sign_inverts_zeta(beta in arb_partial(4)) {
        for alpha in beta.restrictions() {
            let sum: f64 = beta
                .restrictions()
                .into_iter()
                .filter(|g| alpha.leq(g).unwrap())
                .map(|g| sign_between(&alpha, &g))
                .sum();
            prop_assert_eq!(sum, if alpha == beta { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn weingarten_is_a_class_function(sigma in arb_perm(4), tau in arb_perm(4), n in 4u64..9) {
        let conj = tau.compose(&sigma).unwrap().compose(&tau.inverse()).unwrap();
        prop_assert_eq!(wg_exact(n, &sigma).unwrap(), wg_exact(n, &conj).unwrap());
    }

    #[test]
    fn diagram_product_is_associative(x in arb_perm(4), y in arb_perm(4), z in arb_perm(4)) {
        let (x, y, z) = (
            DiagramElement::from_permutation(&x).unwrap(),
            DiagramElement::from_permutation(&y).unwrap(),
            DiagramElement::from_permutation(&z).unwrap(),
        );
        let (l1, xy) = x.multiply(&y).unwrap();
        let (l2, left) = xy.multiply(&z).unwrap();
        let (l3, yz) = y.multiply(&z).unwrap();
        let (l4, right) = x.multiply(&yz).unwrap();
        prop_assert_eq!(&left, &right);
        prop_assert_eq!(l1 + l2, l3 + l4);
    }

    #[test]
    fn diagram_permutation_round_trip(s in arb_perm(6)) {
        prop_assert_eq!(DiagramElement::from_permutation(&s).unwrap().to_permutation(), s);
    }

    #[test]
    fn tensor_permutation_is_a_homomorphism(s in arb_perm(3), t in arb_perm(3)) {
        let st = tensor_permutation(&s.compose(&t).unwrap(), 2).unwrap();
        let prod = tensor_permutation(&s, 2).unwrap().mul(&tensor_permutation(&t, 2).unwrap()).unwrap();
        prop_assert!(st.max_abs_diff(&prod) < 1e-15);
    }

    #[test]
    fn mobius_inversion_round_trips(a in arb_a_map(2)) {
        let back = p_from_a(&a).unwrap().to_a();
        for (beta, v) in back {
            prop_assert!((v - a.get(&beta)).abs() < 1e-12);
        }
    }

    #[test]
    fn first_moment_is_one(a in arb_a_map(2)) {
        let m = moment_formula(1, 2, 2, a.values()).unwrap();
        prop_assert!((m - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampled_isometries_and_outputs(seed in any::<u64>(), index in 0u64..1000) {
        let ch = sample_channel_indexed(8, 3, seed, index).unwrap();
        prop_assert!(ch.isometry_defect() < 1e-10);
        let z = ch.bell_product_output(&Permutation::identity(1)).unwrap();
        prop_assert!((z.trace().re - 1.0).abs() < 1e-10);
        prop_assert!(z.is_hermitian() && z.is_psd());
        let ghz = ch.ghz_output(2).unwrap();
        prop_assert!((ghz.trace().re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn distances_are_bounded_and_vanish_on_members(s in arb_perm(6)) {
        let checker = BoundChecker::new(2, 3).unwrap();
        let d = checker.distances(&s).unwrap();
        prop_assert!(d.dist_gamma <= 5);
        prop_assert!(d.dist_theta.unwrap() <= 5);
        prop_assert_eq!(d.dist_gamma == 0, in_gamma(&s, 2, 3).unwrap());
        prop_assert_eq!(d.dist_theta == Some(0), in_theta(&s, 2, 3).unwrap());
    }

    #[test]
    fn bell_overlaps_are_indicators(pi in arb_perm(2), beta in arb_partial(2), n in 2usize..40) {
        let v = InputSpec::Bell(pi.clone()).overlap(&beta, n).unwrap();
        let below = beta.leq(&PartialPermutation::from_permutation(&pi)).unwrap();
        if below {
            prop_assert_eq!(v, 1.0);
        } else {
            prop_assert!(v <= 1.0 / n as f64 + 1e-15);
        }
    }
}
