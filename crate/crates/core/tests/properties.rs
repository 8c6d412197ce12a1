//! Randomized algebraic properties: exact arithmetic laws, group laws under
//! canonical equality, geometry of supports and domination, and the cocycle
//! identity. These complement the deterministic unit tests with broader
//! input coverage.

use proptest::prelude::*;

use circlewalk_core::cocycle::{act, cocycle, shift_config, verify_chain_rule};
use circlewalk_core::domination::dominates;
use circlewalk_core::exact::{CirclePoint, Rational};
use circlewalk_core::map::{PiecewiseAffineCircleMap, Support};
use circlewalk_core::thompson::GeneratorSet;

fn rational() -> impl Strategy<Value = Rational> {
    (any::<i32>(), 1u32..100_000).prop_map(|(n, d)| Rational::new(n as i64, d as i64).unwrap())
}

fn nonzero_rational() -> impl Strategy<Value = Rational> {
    rational().prop_filter("nonzero", |r| !r.is_zero())
}

fn circle_point() -> impl Strategy<Value = CirclePoint> {
    rational().prop_map(CirclePoint::new)
}

fn gens() -> &'static GeneratorSet {
    use std::sync::OnceLock;
    static GENS: OnceLock<GeneratorSet> = OnceLock::new();
    GENS.get_or_init(|| GeneratorSet::bundled().unwrap())
}

fn word() -> impl Strategy<Value = PiecewiseAffineCircleMap> {
    proptest::collection::vec(0usize..6, 0..9).prop_map(|idx| {
        let gs = gens();
        let names = gs.names();
        let mut acc = PiecewiseAffineCircleMap::identity();
        for i in idx {
            acc = acc.compose(gs.get(&names[i]).unwrap());
        }
        acc
    })
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 64,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn rational_addition_associative(a in rational(), b in rational(), c in rational()) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
    }

    #[test]
    fn rational_multiplicative_inverse(a in nonzero_rational()) {
        prop_assert!((&a * &a.recip().unwrap()).is_one());
    }

    #[test]
    fn rational_reduction_idempotent(a in rational()) {
        let again = Rational::new(a.numer().clone(), a.denom().clone()).unwrap();
        prop_assert_eq!(again, a);
    }

    #[test]
    fn circle_dist_triangle(x in circle_point(), y in circle_point(), z in circle_point()) {
        let xy = x.dist(&y);
        let yz = y.dist(&z);
        let xz = x.dist(&z);
        prop_assert!(xz <= xy + yz);
    }

    #[test]
    fn circle_dist_symmetric_and_bounded(x in circle_point(), y in circle_point()) {
        prop_assert_eq!(x.dist(&y), y.dist(&x));
        prop_assert!(x.dist(&y) <= Rational::new(1, 2).unwrap());
        prop_assert_eq!(x.dist(&x), Rational::zero());
    }
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 24,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn group_associativity(g in word(), h in word(), k in word()) {
        prop_assert_eq!(g.compose(&h).compose(&k), g.compose(&h.compose(&k)));
    }

    #[test]
    fn group_identity_and_inverse_laws(g in word()) {
        let id = PiecewiseAffineCircleMap::identity();
        prop_assert_eq!(g.compose(&id), g.clone());
        prop_assert_eq!(id.compose(&g), g.clone());
        prop_assert!(g.compose(&g.invert()).is_identity());
        prop_assert!(g.invert().compose(&g).is_identity());
        prop_assert_eq!(g.invert().invert(), g);
    }

    #[test]
    fn compose_evaluates_pointwise(g in word(), h in word(), x in circle_point()) {
        let gh = g.compose(&h);
        prop_assert_eq!(gh.evaluate(&x), g.evaluate(&h.evaluate(&x)));
    }

    #[test]
    fn breakpoint_count_subadditive(g in word(), h in word()) {
        let gh = g.compose(&h);
        prop_assert!(gh.breakpoint_count() <= g.breakpoint_count() + h.breakpoint_count());
    }

    #[test]
    fn canonicalize_idempotent(g in word()) {
        let again = PiecewiseAffineCircleMap::canonicalize(g.segments()).unwrap();
        prop_assert_eq!(again, g);
    }

    #[test]
    fn thompson_membership_closed(g in word(), h in word()) {
        prop_assert!(g.is_in_thompson_t());
        prop_assert!(g.compose(&h).is_in_thompson_t());
        prop_assert!(g.invert().is_in_thompson_t());
    }

    #[test]
    fn derivative_jump_product_rule(g in word(), h in word(), x in circle_point()) {
        // jump of g h at x = jump of h at x times jump of g at h(x)
        let gh = g.compose(&h);
        let lhs = gh.derivative_jump_ratio(&x);
        let rhs = &h.derivative_jump_ratio(&x) * &g.derivative_jump_ratio(&h.evaluate(&x));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn support_conjugation(t in word()) {
        let a = circlewalk_core::thompson::remark_element(
            &CirclePoint::from_ratio(1, 2).unwrap(),
            3,
        )
        .unwrap();
        let conj = t.compose(&a).compose(&t.invert());
        match (a.support(), conj.support()) {
            (Support::Arcs(arcs_a), Support::Arcs(arcs_c)) => {
                prop_assert_eq!(arcs_a.len(), arcs_c.len());
                for (sa, sc) in arcs_a.iter().zip(arcs_c.iter()) {
                    prop_assert_eq!(&sa.map_through(&t), sc);
                }
            }
            other => prop_assert!(false, "unexpected supports {:?}", other),
        }
    }

    #[test]
    fn domination_preserved_by_group(g in word()) {
        let arcs = [
            circlewalk_core::map::CircleArc::new(
                CirclePoint::from_ratio(0, 1).unwrap(),
                CirclePoint::from_ratio(1, 4).unwrap(),
            ),
            circlewalk_core::map::CircleArc::new(
                CirclePoint::from_ratio(1, 16).unwrap(),
                CirclePoint::from_ratio(3, 16).unwrap(),
            ),
            circlewalk_core::map::CircleArc::new(
                CirclePoint::from_ratio(1, 2).unwrap(),
                CirclePoint::from_ratio(3, 4).unwrap(),
            ),
        ];
        for i1 in &arcs {
            for i2 in &arcs {
                prop_assert_eq!(
                    dominates(i1, i2),
                    dominates(&i1.map_through(&g), &i2.map_through(&g))
                );
            }
        }
    }

    #[test]
    fn cocycle_chain_rule_random_pairs(g in word(), h in word()) {
        prop_assert!(verify_chain_rule(&g, &h));
    }

    #[test]
    fn cocycle_left_action_law(g in word(), h in word()) {
        let c = cocycle(&circlewalk_core::thompson::remark_element(
            &CirclePoint::from_ratio(1, 2).unwrap(),
            2,
        )
        .unwrap());
        prop_assert_eq!(act(&g, &act(&h, &c)), act(&g.compose(&h), &c));
    }

    #[test]
    fn cocycle_inverse_identity(g in word()) {
        let ginv = g.invert();
        let lhs = cocycle(&ginv);
        let neg_shift = shift_config(&ginv, &cocycle(&g));
        prop_assert!(lhs.add(&neg_shift).is_empty());
    }
}
