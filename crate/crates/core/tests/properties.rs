use num_rational::BigRational;
use paradox_core::cert::Certificate;
use paradox_core::crossed::{equal_on, CPElem};
use paradox_core::induced::{induced_act, ActionTable, SubgroupSpec, YPoint};
use paradox_core::paradox::{doubling_matching, type_order, witness_check, witness_from_matching, Doubling, TypeOrder};
use paradox_core::smallsets::{absorbing_check, absorbing_scan};
use paradox_core::verify::verify;
use paradox_core::{Elem, GroupSpec, Membership, SetExpr, Universe};
use proptest::prelude::*;

const GROUPS: [GroupSpec; 3] = [GroupSpec::Free(2), GroupSpec::Zn(2), GroupSpec::DyadicAffine];

/// A product of up to `len` generators or inverses.
fn elem(group: GroupSpec, len: usize) -> impl Strategy<Value = Elem> {
    let gens = group.generators();
    prop::collection::vec((0..gens.len(), any::<bool>()), 0..=len).prop_map(move |steps| {
        steps.into_iter().fold(group.identity(), |acc, (i, inv)| {
            let g = if inv { gens[i].inverse() } else { gens[i].clone() };
            acc.op(&g)
        })
    })
}

fn group_and_elems(n: usize, len: usize) -> impl Strategy<Value = (GroupSpec, Vec<Elem>)> {
    (0..GROUPS.len()).prop_flat_map(move |i| {
        let g = GROUPS[i];
        (Just(g), prop::collection::vec(elem(g, len), n))
    })
}

fn set_expr(group: GroupSpec) -> impl Strategy<Value = SetExpr> {
    let leaf = prop_oneof![
        Just(SetExpr::All),
        Just(SetExpr::Empty),
        prop::collection::vec(elem(group, 3), 0..4).prop_map(SetExpr::finite),
        Just(SetExpr::Ball(2)),
        Just(SetExpr::semigroup(group.generators()[..1].to_vec(), true)),
    ];
    leaf.prop_recursive(3, 12, 2, move |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| SetExpr::union(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| SetExpr::intersect(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| SetExpr::diff(a, b)),
            (elem(group, 2), inner).prop_map(|(t, a)| SetExpr::translate(&t, &a)),
        ]
    })
}

fn integer_case() -> impl Strategy<Value = (GroupSpec, Vec<Elem>, u32)> {
    (1u8..=2).prop_flat_map(|d| {
        let g = GroupSpec::Zn(d);
        let pool = g.ball(2).elements().to_vec();
        (Just(g), prop::sample::subsequence(pool.clone(), 1..=pool.len()), 0u32..=3)
    })
}

fn large_window_case() -> impl Strategy<Value = (GroupSpec, Vec<Elem>, u32)> {
    (1u8..=2).prop_flat_map(|d| {
        let g = GroupSpec::Zn(d);
        let pool = g.ball(3).elements().to_vec();
        // about 10^4 points either way
        let r = if d == 1 { 4999 } else { 70 };
        (Just(g), prop::sample::subsequence(pool.clone(), 1..=pool.len()), Just(r))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn integer_lattices_never_double_on_large_windows((g, s, r) in large_window_case()) {
        let u = Universe::new(g);
        let w = g.ball(r);
        prop_assert!(w.len() <= 10_000);
        match doubling_matching(&u, &SetExpr::All, &s, &w).unwrap() {
            Doubling::Deficiency(d) => prop_assert!(verify(&Certificate::from_deficiency(&d)).passed()),
            Doubling::Match(_) => prop_assert!(false, "{g} doubles with {s:?} on ball({r})"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_axioms((g, xs) in group_and_elems(3, 6)) {
        let (x, y, z) = (&xs[0], &xs[1], &xs[2]);
        prop_assert_eq!(x.op(y).op(z), x.op(&y.op(z)));
        prop_assert!(x.op(&x.inverse()).is_identity());
        prop_assert_eq!(g.identity().op(x), x.clone());
        prop_assert_eq!(x.op(y).inverse(), y.inverse().op(&x.inverse()));
        prop_assert_eq!(&g.parse_elem(&x.to_string()).unwrap(), x);
    }

    #[test]
    fn word_length_is_symmetric_and_subadditive((g, xs) in group_and_elems(2, 4)) {
        let (x, y) = (&xs[0], &xs[1]);
        let lx = g.word_length(x, 10).unwrap();
        prop_assert_eq!(g.word_length(&x.inverse(), 10), Some(lx));
        prop_assert!(g.word_length(&x.op(y), 10).unwrap() <= lx + g.word_length(y, 10).unwrap());
        prop_assert!(lx <= 4);
    }

    #[test]
    fn set_expressions_print_and_parse(
        (g, a) in (0..GROUPS.len()).prop_flat_map(|i| (Just(GROUPS[i]), set_expr(GROUPS[i])))
    ) {
        let back = SetExpr::parse(g, &a.to_string());
        prop_assert!(back.is_ok(), "{}", a);
        prop_assert_eq!(back.unwrap(), a);
    }

    #[test]
    fn boolean_operations_follow_kleene_logic(
        (g, a, b, x, t) in (0..GROUPS.len()).prop_flat_map(|i| {
            let g = GROUPS[i];
            (Just(g), set_expr(g), set_expr(g), elem(g, 4), elem(g, 2))
        })
    ) {
        let u = Universe::new(g);
        let ma = u.member(&a, &x, 8);
        let mb = u.member(&b, &x, 8);
        let both = [ma, mb];
        let or = if both.contains(&Membership::In) { Membership::In }
            else if both.contains(&Membership::Unknown) { Membership::Unknown } else { Membership::Out };
        let and = if both.contains(&Membership::Out) { Membership::Out }
            else if both.contains(&Membership::Unknown) { Membership::Unknown } else { Membership::In };
        prop_assert_eq!(u.member(&SetExpr::union(a.clone(), b.clone()), &x, 8), or);
        prop_assert_eq!(u.member(&SetExpr::intersect(a.clone(), b.clone()), &x, 8), and);
        prop_assert_eq!(u.member(&SetExpr::translate(&t, &a), &t.op(&x), 10), u.member(&a, &x, 10));
    }

    #[test]
    fn doubling_returns_exactly_one_verified_certificate((g, s, r) in integer_case()) {
        let u = Universe::new(g);
        let w = g.ball(r);
        let cert = match doubling_matching(&u, &SetExpr::All, &s, &w).unwrap() {
            Doubling::Match(m) => {
                let wit = witness_from_matching(&m);
                prop_assert!(witness_check(&u, &wit, &w).passed());
                Certificate::from_match(&m)
            }
            Doubling::Deficiency(d) => {
                prop_assert!(d.neighborhood < 2 * d.violator.len());
                // the same violator still works on a larger window
                let big = g.ball(r + 2);
                let more = Certificate::from_deficiency(&paradox_core::paradox::DeficiencyCert { window: big, ..d.clone() });
                prop_assert!(verify(&more).passed());
                Certificate::from_deficiency(&d)
            }
        };
        prop_assert!(verify(&cert).passed());
    }

    #[test]
    fn doubling_is_type_order_two_over_one((g, s, r) in integer_case()) {
        let u = Universe::new(g);
        let w = g.ball(r);
        let d = matches!(doubling_matching(&u, &SetExpr::All, &s, &w).unwrap(), Doubling::Match(_));
        let t = type_order(&u, 2, &SetExpr::All, 1, &SetExpr::All, &s, &w).unwrap();
        prop_assert_eq!(d, matches!(t, TypeOrder::Flow(_)));
        let cert = match &t {
            TypeOrder::Flow(f) => Certificate::from_flow(f),
            TypeOrder::Deficiency(f) => Certificate::from_flow_deficiency(f),
        };
        prop_assert!(verify(&cert).passed());
    }

    #[test]
    fn coset_normal_forms((i, xs) in (0usize..3).prop_flat_map(|i| (Just(i), prop::collection::vec(elem(GROUPS[i], 6), 2)))) {
        let g = GROUPS[i];
        let h = match i {
            0 => SubgroupSpec::parse(g, "cyclic:a b a^-1").unwrap(),
            1 => SubgroupSpec::parse(g, "coords:0").unwrap(),
            _ => SubgroupSpec::parse(g, "kernel").unwrap(),
        };
        let (x, y) = (&xs[0], &xs[1]);
        let (rep, r) = h.normalize(x).unwrap();
        prop_assert_eq!(&rep.op(&r), x);
        prop_assert!(h.contains(&r).unwrap());
        prop_assert_eq!(h.normalize(&rep).unwrap(), (rep.clone(), g.identity()));
        // the representative depends only on the coset
        if h.contains(&x.inverse().op(y)).unwrap() {
            prop_assert_eq!(h.normalize(y).unwrap().0, rep);
        } else {
            prop_assert_ne!(h.normalize(y).unwrap().0, rep);
        }
    }

    #[test]
    fn induced_action_law(s1 in elem(GroupSpec::Free(2), 4), s2 in elem(GroupSpec::Free(2), 4), x in 0i64..5) {
        // <a> acts on Z/5 by a^k . i = i + k
        let f = GroupSpec::Free(2);
        let h = SubgroupSpec::parse(f, "cyclic:a").unwrap();
        let a = f.parse_elem("a").unwrap();
        let mut table = ActionTable::new();
        for k in -12..=12 {
            for i in 0..5 {
                table.insert(a.pow(k), &format!("x{i}"), &format!("x{}", (i + k).rem_euclid(5)));
            }
        }
        let p = YPoint { rep: f.identity(), x: format!("x{x}") };
        let step = induced_act(&h, &table, &s2, &induced_act(&h, &table, &s1, &p).unwrap()).unwrap();
        prop_assert_eq!(step, induced_act(&h, &table, &s2.op(&s1), &p).unwrap());
    }

    #[test]
    fn crossed_product_laws(
        terms in prop::collection::vec(
            (-2i64..=2, prop::collection::vec(-3i64..=3, 0..4), -2i64..=2), 1..9)
    ) {
        let z = GroupSpec::Zn(1);
        let w = z.ball(8);
        let u = Universe::new(z);
        let mk = |ts: &[(i64, Vec<i64>, i64)]| ts.iter().fold(CPElem::zero(), |acc, (q, pts, t)| {
            let a = SetExpr::finite(pts.iter().map(|&p| Elem::vector(&[p])).collect::<Vec<_>>());
            acc.add(&CPElem::term(BigRational::from_integer((*q).into()), a, Elem::vector(&[*t])))
        });
        let k = terms.len() / 3;
        let (x, y, zz) = (mk(&terms[..k]), mk(&terms[k..2 * k]), mk(&terms[2 * k..]));
        prop_assert!(equal_on(&u, &x.mul(&y).mul(&zz), &x.mul(&y.mul(&zz)), &w).unwrap());
        prop_assert!(equal_on(&u, &x.mul(&y.add(&zz)), &x.mul(&y).add(&x.mul(&zz)), &w).unwrap());
        prop_assert!(equal_on(&u, &x.mul(&y).adjoint(), &y.adjoint().mul(&x.adjoint()), &w).unwrap());
        prop_assert_eq!(x.adjoint().adjoint(), x);
    }

    #[test]
    fn covariance((g, t, a) in (0..GROUPS.len()).prop_flat_map(|i| {
        let g = GROUPS[i];
        (Just(g), elem(g, 3), set_expr(g))
    })) {
        let u = Universe::new(g);
        let lhs = CPElem::unitary(t.clone()).mul(&CPElem::indicator(a.clone(), g.identity()));
        let rhs = CPElem::term(BigRational::from_integer(1.into()), SetExpr::translate(&t, &a), t.clone());
        let w = g.ball(2);
        prop_assert!(equal_on(&u, &lhs, &rhs, &w).unwrap());
    }

    #[test]
    fn absorbing_computations_agree(
        pts in prop::collection::vec(-6i64..=6, 0..10),
        f in prop::collection::vec(-3i64..=3, 1..4),
    ) {
        let z = GroupSpec::Zn(1);
        let u = Universe::new(z);
        let a = SetExpr::finite(pts.iter().map(|&p| Elem::vector(&[p])).collect::<Vec<_>>());
        let f: Vec<Elem> = f.iter().map(|&p| Elem::vector(&[p])).collect();
        let w = z.ball(8);
        let direct = absorbing_scan(&u, &a, &f, &w).unwrap();
        prop_assert_eq!(&absorbing_check(&u, &a, &f, &w).unwrap(), &direct);
        if let Some(g) = direct {
            for t in &f {
                prop_assert_eq!(u.member(&a, &t.op(&g), 8), Membership::In);
            }
        }
    }
}
