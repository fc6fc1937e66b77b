use proptest::prelude::*;
use typnet_core::{
    parse_axiom, parse_concept, Axiom, CombinationFamily, Comparator, ConceptExpr, GradedScale, Interpretation, Mode,
    Threshold,
};

fn concept() -> impl Strategy<Value = ConceptExpr> {
    let leaf = prop_oneof![
        Just(ConceptExpr::Top),
        Just(ConceptExpr::Bot),
        prop::sample::select(vec!["A", "B", "Cx"]).prop_map(ConceptExpr::name),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(ConceptExpr::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| ConceptExpr::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| ConceptExpr::or(a, b)),
            inner.clone().prop_map(|a| ConceptExpr::exists("r", a)),
            inner.prop_map(|a| ConceptExpr::forall("r", a)),
        ]
    })
}

fn interpretation(n: u32) -> impl Strategy<Value = Interpretation> {
    (1usize..6).prop_flat_map(move |size| {
        let col = prop::collection::vec(0..=n, size);
        let role = prop::collection::vec(prop::collection::vec(0..=n, size), size);
        (col.clone(), col.clone(), col, role).prop_map(move |(a, b, c, r)| {
            let f = |v: Vec<u32>| v.into_iter().map(|i| i as f64 / n as f64).collect::<Vec<_>>();
            Interpretation::anonymous(
                size,
                CombinationFamily::GoedelInvolutive,
                Mode::graded(GradedScale::new(n).unwrap()),
            )
            .unwrap()
            .with_concept("A", f(a))
            .unwrap()
            .with_concept("B", f(b))
            .unwrap()
            .with_concept("Cx", f(c))
            .unwrap()
            .with_role("r", r.into_iter().map(f).collect())
            .unwrap()
        })
    })
}

proptest! {
    #[test]
    fn concepts_print_and_parse_back(c in concept()) {
        prop_assert_eq!(parse_concept(&c.to_string()).unwrap(), c);
    }

    #[test]
    fn axioms_print_and_parse_back(c in concept(), d in concept(), k in 0u32..=10) {
        let ax = Axiom::inclusion(ConceptExpr::typ(c).unwrap(), d, Comparator::Ge, 1.0)
            .unwrap()
            .with_threshold(Threshold::fraction(k, 10).unwrap());
        prop_assert_eq!(parse_axiom(&ax.to_string()).unwrap(), ax);
    }

    #[test]
    fn typicality_is_below_its_concept(i in interpretation(5), c in concept()) {
        let base = i.eval_all(&c).unwrap();
        let typ = i.eval_all(&ConceptExpr::typ(c.clone()).unwrap()).unwrap();
        let max = base.iter().cloned().fold(0.0, f64::max);
        for (t, b) in typ.iter().zip(&base) {
            prop_assert!(*t == 0.0 || (t == b && *b == max));
        }
        prop_assert_eq!(i.typical_set(&c).unwrap().is_empty(), max == 0.0);
    }

    #[test]
    fn graded_values_stay_on_the_scale(i in interpretation(4), c in concept()) {
        let s = GradedScale::new(4).unwrap();
        prop_assert!(i.eval_all(&c).unwrap().iter().all(|&v| s.contains(v)));
    }

    #[test]
    fn lower_thresholds_are_easier(i in interpretation(5), c in concept(), d in concept(), k in 1u32..=5) {
        let at = |k: u32| {
            let ax = Axiom::inclusion(ConceptExpr::typ(c.clone()).unwrap(), d.clone(), Comparator::Ge, 1.0)
                .unwrap()
                .with_threshold(Threshold::fraction(k, 5).unwrap());
            i.check_axiom(&ax).unwrap()
        };
        let (hi, lo) = (at(k), at(k - 1));
        prop_assert_eq!(hi.value, lo.value);
        prop_assert!(!hi.holds || lo.holds);
        prop_assert!(lo.counterexamples.len() <= hi.counterexamples.len());
    }

    #[test]
    fn interpretations_survive_json(i in interpretation(3)) {
        prop_assert_eq!(Interpretation::from_json(&i.to_json().unwrap()).unwrap(), i);
    }
}
