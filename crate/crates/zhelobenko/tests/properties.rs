//! Property-based invariants over the exact arithmetic layers.

use proptest::prelude::*;

use zhelobenko::chevalley::{Algebra, LieElement};
use zhelobenko::classical::{Carrier, PolyFunc};
use zhelobenko::coeffs::{
    q_ratio, weight_shift, CartanPoly, ClassicalLocRat, CorootShift, QuantumLocRat, RootFactor, Q,
};
use zhelobenko::expr;
use zhelobenko::quantum::{mul, pbw_normal_form, Atom, PbwContext};
use zhelobenko::roots::{default_ordering, Root};

fn a2() -> Algebra {
    Algebra::from_label("A2").unwrap()
}

prop_compose! {
    fn arb_q()(n in -9i64..=9, d in 1i64..=4) -> Q {
        q_ratio(n, d)
    }
}

prop_compose! {
    fn arb_poly()(terms in prop::collection::vec(((0u32..3, 0u32..3), arb_q()), 1..4)) -> CartanPoly {
        let mut p = CartanPoly::zero(2);
        for ((e1, e2), c) in terms {
            let mono = CartanPoly::var(2, 0).pow(e1).mul(&CartanPoly::var(2, 1).pow(e2));
            p = p.add(&mono.scale(&c));
        }
        p
    }
}

prop_compose! {
    fn arb_classical()(p in arb_poly(), den in prop::collection::vec(0usize..3, 0..2)) -> ClassicalLocRat {
        let alg = a2();
        let mut f = ClassicalLocRat::from_poly(p);
        for i in den {
            let root = alg.rs().positive_roots()[i].clone();
            f = f.div_factor(alg.rs(), RootFactor(root), 1);
        }
        f
    }
}

prop_compose! {
    fn arb_quantum()(p in arb_poly(), den in prop::collection::vec((0usize..3, -2i64..=2), 0..2)) -> QuantumLocRat {
        let alg = a2();
        let mut f = QuantumLocRat::from_poly(p);
        for (i, m) in den {
            let root = alg.rs().positive_roots()[i].clone();
            f = f.div_factor(alg.rs(), CorootShift { root, shift: m }, 1);
        }
        f
    }
}

prop_compose! {
    fn arb_lie()(h in prop::collection::vec(arb_q(), 2),
                 e in prop::collection::vec((0usize..6, arb_q()), 0..5)) -> LieElement {
        let alg = a2();
        let mut roots: Vec<Root> = alg.rs().positive_roots().to_vec();
        roots.extend(alg.rs().positive_roots().iter().map(Root::neg));
        let mut x = LieElement::cartan(h);
        for (i, c) in e {
            x.add_e(roots[i].clone(), c);
        }
        x
    }
}

prop_compose! {
    fn arb_word()(w in prop::collection::vec(0usize..6, 1..4)) -> Vec<Root> {
        let alg = a2();
        let mut roots: Vec<Root> = alg.rs().positive_roots().to_vec();
        roots.extend(alg.rs().positive_roots().iter().map(Root::neg));
        w.into_iter().map(|i| roots[i].clone()).collect()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn classical_ring_axioms(a in arb_classical(), b in arb_classical(), c in arb_classical()) {
        let alg = a2();
        let rs = alg.rs();
        prop_assert_eq!(a.add(rs, &b), b.add(rs, &a));
        prop_assert_eq!(a.mul(rs, &b), b.mul(rs, &a));
        prop_assert_eq!(a.add(rs, &b).add(rs, &c), a.add(rs, &b.add(rs, &c)));
        prop_assert_eq!(a.mul(rs, &b).mul(rs, &c), a.mul(rs, &b.mul(rs, &c)));
        prop_assert_eq!(
            a.mul(rs, &b.add(rs, &c)),
            a.mul(rs, &b).add(rs, &a.mul(rs, &c))
        );
        // canonical-form uniqueness: a − a = 0 with empty denominator
        let z = a.sub(rs, &a);
        prop_assert!(z.is_zero() && z.den().is_empty());
    }

    #[test]
    fn quantum_weight_shift_homomorphism(a in arb_quantum(), b in arb_quantum(),
                                         l1 in -2i64..=2, l2 in -2i64..=2) {
        let alg = a2();
        let rs = alg.rs();
        let lam = Root(vec![l1, l2]);
        prop_assert_eq!(
            weight_shift(rs, &a.mul(rs, &b), &lam),
            weight_shift(rs, &a, &lam).mul(rs, &weight_shift(rs, &b, &lam))
        );
        prop_assert_eq!(
            weight_shift(rs, &a.add(rs, &b), &lam),
            weight_shift(rs, &a, &lam).add(rs, &weight_shift(rs, &b, &lam))
        );
        // denominators stay inside the admissible factor set
        for key in weight_shift(rs, &a, &lam).den().keys() {
            prop_assert!(rs.is_positive_root(&key.root));
        }
    }

    #[test]
    fn jacobi_identity_random(x in arb_lie(), y in arb_lie(), z in arb_lie()) {
        let alg = a2();
        let j = alg
            .bracket(&alg.bracket(&x, &y), &z)
            .add(&alg.bracket(&alg.bracket(&y, &z), &x))
            .add(&alg.bracket(&alg.bracket(&z, &x), &y));
        prop_assert!(j.is_zero());
        prop_assert!(alg.bracket(&x, &x).is_zero());
    }

    #[test]
    fn pbw_confluence_associativity(a in arb_word(), b in arb_word(), c in arb_word()) {
        let alg = a2();
        let ordering = default_ordering(alg.rs());
        let ctx = PbwContext::standard(&ordering);
        let to_u = |w: &Vec<Root>| {
            let atoms: Vec<Atom> = w.iter().map(|r| Atom::R(r.clone())).collect();
            pbw_normal_form(&alg, &ctx, &atoms)
        };
        let (ua, ub, uc) = (to_u(&a), to_u(&b), to_u(&c));
        prop_assert_eq!(
            mul(&alg, &mul(&alg, &ua, &ub), &uc),
            mul(&alg, &ua, &mul(&alg, &ub, &uc))
        );
    }

    #[test]
    fn lie_print_parse_round_trip(x in arb_lie()) {
        let alg = a2();
        let printed = expr::print_lie_element(&x);
        let re = expr::parse_lie_element(alg.rs(), &printed).unwrap();
        prop_assert_eq!(x, re);
    }

    #[test]
    fn polyfunc_print_parse_round_trip(c in arb_classical(), syms in prop::collection::vec((0usize..3, 1u32..3), 0..3)) {
        let alg = a2();
        let mut f = PolyFunc::coefficient(Carrier::Borel, c);
        for (i, p) in syms {
            let beta = alg.rs().positive_roots()[i].clone();
            let s = PolyFunc::symbol(&alg, Carrier::Borel, &beta.neg()).unwrap();
            f = f.mul(&alg, &s.pow(&alg, p));
        }
        let printed = expr::print_polyfunc(&f);
        let re = expr::parse_polyfunc(&alg, Carrier::Borel, &printed).unwrap();
        prop_assert_eq!(f, re);
    }

    #[test]
    fn uelement_print_parse_round_trip(w in arb_word(), c in arb_quantum()) {
        let alg = a2();
        let ordering = default_ordering(alg.rs());
        let ctx = PbwContext::standard(&ordering);
        let mut atoms: Vec<Atom> = w.iter().map(|r| Atom::R(r.clone())).collect();
        atoms.push(Atom::C(c));
        let u = pbw_normal_form(&alg, &ctx, &atoms);
        let printed = expr::print_uelement(&u);
        if u.is_zero() {
            prop_assert_eq!(printed, "0");
        } else {
            let (re, _) = expr::parse_uelement(&alg, &ctx, &printed).unwrap();
            prop_assert_eq!(u, re);
        }
    }
}
