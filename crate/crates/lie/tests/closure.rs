use proptest::prelude::*;
use radon_algebra::{q_int, MultiIndex, Poly, Q};
use radon_lie::*;

fn vf(n: usize, comps: Vec<Poly>) -> VectorField {
    VectorField::new(n, comps).unwrap()
}

fn x(n: usize, i: usize) -> Poly {
    Poly::var(n, i)
}

fn wf(f: VectorField, d: &[u32]) -> WeightedField {
    WeightedField::new(f, d.to_vec()).unwrap()
}

fn heisenberg_s() -> Vec<WeightedField> {
    let n = 3;
    vec![
        wf(VectorField::coordinate(n, 0), &[1, 0]),
        wf(vf(n, vec![Poly::zero(n), Poly::one(n), x(n, 0)]), &[0, 1]),
    ]
}

#[test]
fn bracket_of_d1_and_x1d2() {
    let a = wf(VectorField::coordinate(2, 0), &[1, 0]);
    let b = wf(vf(2, vec![Poly::zero(2), x(2, 0)]), &[0, 1]);
    let c = lie_bracket(&a, &b).unwrap();
    assert_eq!(c.field, VectorField::coordinate(2, 1));
    assert_eq!(c.degree(), &[1, 1]);
}

#[test]
fn bracket_dimension_errors() {
    let a = wf(VectorField::coordinate(2, 0), &[1, 0]);
    let b = wf(VectorField::coordinate(3, 0), &[1, 0]);
    assert!(lie_bracket(&a, &b).is_err());
    let c = wf(VectorField::coordinate(2, 0), &[1]);
    assert!(lie_bracket(&a, &c).is_err());
    assert!(WeightedField::new(VectorField::coordinate(2, 0), vec![0, 0]).is_err());
}

#[test]
fn closure_examples() {
    let s = vec![
        wf(VectorField::coordinate(2, 0), &[1, 0]),
        wf(vf(2, vec![Poly::zero(2), x(2, 0)]), &[0, 1]),
    ];
    let c = lie_closure(&s, 3, Flavor::Full).unwrap();
    assert_eq!(c.len(), 3);
    assert_eq!(c.elements[2].field, VectorField::coordinate(2, 1));
    assert_eq!(c.elements[2].degree(), &[1, 1]);
    assert!(provenance_consistent(&s, &c));

    let single = vec![wf(vf(2, vec![x(2, 1), x(2, 0)]), &[1])];
    assert_eq!(lie_closure(&single, 5, Flavor::Full).unwrap().len(), 1);

    let h = heisenberg_s();
    let c = lie_closure(&h, 4, Flavor::Full).unwrap();
    assert_eq!(c.len(), 3);
    assert_eq!(c.slice(&[1, 1])[0].field, VectorField::coordinate(3, 2));
}

#[test]
fn span_examples() {
    let c = lie_closure(&heisenberg_s(), 4, Flavor::Full).unwrap();
    let zero = vec![q_int(0); 3];
    let info = span_at_degree(&c, &[1, 1], SpanPoint::At(&zero));
    assert_eq!(info.rank, 1);
    assert_eq!(info.basis[0].eval(&zero), vec![q_int(0), q_int(0), q_int(1)]);
    assert_eq!(span_at_degree(&c, &[3, 0], SpanPoint::Symbolic).rank, 0);
    let s10 = span_at_degree(&c, &[1, 0], SpanPoint::Symbolic);
    assert_eq!(s10.rank, 1);
    assert_eq!(s10.basis[0], VectorField::coordinate(3, 0));
}

#[test]
fn hoermander_examples() {
    let zero2 = vec![q_int(0); 2];
    let s = vec![
        wf(VectorField::coordinate(2, 0), &[1]),
        wf(vf(2, vec![Poly::zero(2), x(2, 0)]), &[1]),
    ];
    let r = hoermander_check(&s, &zero2, 2).unwrap();
    assert_eq!((r.rank, r.spans), (2, true));
    let frame = vec![wf(VectorField::coordinate(2, 0), &[1]), wf(VectorField::coordinate(2, 1), &[1])];
    assert!(hoermander_check(&frame, &zero2, 1).unwrap().spans);
    let euler = vec![wf(vf(1, vec![x(1, 0)]), &[1])];
    let r = hoermander_check(&euler, &[q_int(0)], 4).unwrap();
    assert_eq!((r.rank, r.spans), (0, false));
}

fn field_strategy(n: usize) -> impl Strategy<Value = VectorField> {
    let term = (proptest::collection::vec(0u32..=2, n), -3i64..=3);
    proptest::collection::vec(proptest::collection::vec(term, 0..4), n).prop_map(move |comps| {
        let polys = comps
            .into_iter()
            .map(|ts| Poly::from_terms(n, ts.into_iter().map(|(m, c)| (MultiIndex(m), q_int(c)))))
            .collect();
        VectorField::new(n, polys).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn antisymmetry_and_jacobi(a in field_strategy(2), b in field_strategy(2), c in field_strategy(2)) {
        let ab = a.bracket(&b).unwrap();
        let ba = b.bracket(&a).unwrap();
        prop_assert!(ab.add(&ba).unwrap().is_zero());
        let j = a.bracket(&b.bracket(&c).unwrap()).unwrap()
            .add(&b.bracket(&c.bracket(&a).unwrap()).unwrap()).unwrap()
            .add(&c.bracket(&a.bracket(&b).unwrap()).unwrap()).unwrap();
        prop_assert!(j.is_zero());
    }

    #[test]
    fn bracket_is_operator_commutator(a in field_strategy(2), b in field_strategy(2),
        f in proptest::collection::vec((proptest::collection::vec(0u32..=3, 2), -3i64..=3), 1..5)) {
        let f = Poly::from_terms(2, f.into_iter().map(|(m, c)| (MultiIndex(m), q_int(c))));
        let lhs = a.bracket(&b).unwrap().apply(&f, None).0;
        let rhs = &a.apply(&b.apply(&f, None).0, None).0 - &b.apply(&a.apply(&f, None).0, None).0;
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn jacobi_span_property(a in field_strategy(2), b in field_strategy(2), c in field_strategy(2)) {
        let s = vec![wf(a, &[1, 0]), wf(b, &[0, 1]), wf(c, &[1, 1])];
        let cutoff = 4;
        let full = lie_closure(&s, cutoff, Flavor::Full).unwrap();
        let left = lie_closure(&s, cutoff, Flavor::LeftNormed).unwrap();
        prop_assert!(provenance_consistent(&s, &full));
        prop_assert!(provenance_consistent(&s, &left));
        for d in full.degrees() {
            let fa: Vec<&VectorField> = full.slice(&d).into_iter().map(|w| &w.field).collect();
            let fb: Vec<&VectorField> = left.slice(&d).into_iter().map(|w| &w.field).collect();
            let cmp = compare_spans(&fa, &fb);
            prop_assert!(cmp.equal(), "degree {:?}: {:?}", d, cmp);
        }
    }
}

#[test]
fn bch_heisenberg_exact() {
    let h = heisenberg_s();
    let (z, _) = bch_log(&h[0].field, &h[1].field, 4, None).unwrap();
    let half = Q::new(1.into(), 2.into());
    let expect = h[0].field.add(&h[1].field).unwrap().add(&VectorField::coordinate(3, 2).scale(&half)).unwrap();
    assert_eq!(z, expect);
}
