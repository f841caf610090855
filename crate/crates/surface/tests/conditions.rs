use radon_algebra::TruncationPolicy;
use radon_surface::corpus::{heisenberg, random_polynomial, standard_corpus, x_minus_st, x_plus_t};
use radon_surface::*;

fn pol() -> TruncationPolicy {
    TruncationPolicy::orders(3, 3)
}

fn params(g: &Surface) -> CheckParams {
    CheckParams::new(g.n(), 4)
}

#[test]
fn heisenberg_algebraic_condition_holds() {
    let g = heisenberg(pol());
    let v = check_condition(&g, Condition::IIIA, &params(&g)).unwrap();
    assert_eq!(v.status, Status::Proved);
    assert!(v.replay());
    match &v.witness {
        Witness::Certificates { items, .. } => assert_eq!(items.len(), 1),
        other => panic!("unexpected witness {other:?}"),
    }
    assert_eq!((v.lt, v.lx), (3, 3));
}

#[test]
fn product_counterexample_fails() {
    let g = x_minus_st(pol());
    let v = check_condition(&g, Condition::IIIA, &params(&g)).unwrap();
    assert_eq!(v.status, Status::Refuted);
    assert!(v.replay());
    let v = check_condition(&g, Condition::IIA, &params(&g)).unwrap();
    assert_eq!(v.status, Status::Refuted);
    assert!(v.replay());
    let v = check_condition(&g, Condition::I, &params(&g)).unwrap();
    assert_eq!(v.status, Status::Refuted);
    assert!(v.replay());
}

#[test]
fn one_parameter_surfaces_hold_vacuously() {
    let mut seen = 0;
    for (name, g) in standard_corpus(pol(), 20, 7) {
        if g.nu() != 1 {
            continue;
        }
        seen += 1;
        for c in [Condition::IIA, Condition::IIIA] {
            let v = check_condition(&g, c, &params(&g)).unwrap();
            assert_eq!(v.status, Status::Proved, "{name} {c}");
            assert!(matches!(v.witness, Witness::Vacuous));
        }
    }
    assert!(seen >= 3);
}

#[test]
fn finite_parts_hold_on_reference_surfaces() {
    for g in [x_plus_t(pol()), x_minus_st(pol()), heisenberg(pol())] {
        for c in [Condition::IIF, Condition::IIIF] {
            let v = check_condition(&g, c, &params(&g)).unwrap();
            assert_eq!(v.status, Status::Proved, "{c}: {:?}", v.notes);
            assert!(v.replay());
            assert!(v.generation.is_some());
        }
    }
    let g = heisenberg(pol());
    let v = check_condition(&g, Condition::I, &params(&g)).unwrap();
    assert_eq!(v.status, Status::Proved, "{:?}", v.notes);
    assert!(v.replay());
}

#[test]
fn algebraic_verdicts_agree() {
    for (name, g) in standard_corpus(pol(), 20, 7) {
        let all = check_all(&g, &params(&g)).unwrap();
        for v in &all {
            assert!(v.replay(), "{name} {}", v.condition);
        }
        let find = |c| all.iter().find(|v| v.condition == c).unwrap().status;
        let (a2, a3) = (find(Condition::IIA), find(Condition::IIIA));
        if a2 != Status::Unknown && a3 != Status::Unknown {
            assert_eq!(a2, a3, "{name}");
        }
        let i = find(Condition::I);
        if i != Status::Unknown && a3 != Status::Unknown {
            assert_eq!(i, a3, "{name}: I vs III.A");
        }
    }
}

#[test]
fn span_lemma_on_the_corpus() {
    for (name, g) in standard_corpus(pol(), 20, 7) {
        for (d, cmp) in span_lemma(&g, 4).unwrap() {
            if d.iter().sum::<u32>() <= 4 {
                assert!(cmp.equal(), "{name} at {d:?}: {cmp:?}");
            }
        }
    }
}

#[test]
fn composition_and_inverse_preserve_the_condition() {
    let h = heisenberg(pol());
    let others = [heisenberg(pol()), random_polynomial(1, pol())];
    for g2 in others.iter().filter(|g| g.n() == h.n()) {
        let p = CheckParams::new(3, 4);
        if check_condition(g2, Condition::IIIA, &p).unwrap().status != Status::Proved {
            continue;
        }
        let c = compose_surfaces(&h, g2).unwrap();
        let v = check_condition(&c, Condition::IIIA, &p).unwrap();
        assert_eq!(v.status, Status::Proved, "{:?}", v.notes);
        assert!(v.replay());
    }
    let inv = invert_surface(&h).unwrap();
    let v = check_condition(&inv, Condition::IIIA, &CheckParams::new(3, 4)).unwrap();
    assert_eq!(v.status, Status::Proved);
}

#[test]
fn condition_names_parse() {
    for c in Condition::ALL {
        assert_eq!(c.to_string().parse::<Condition>().unwrap(), c);
    }
    assert!("IV".parse::<Condition>().is_err());
}
