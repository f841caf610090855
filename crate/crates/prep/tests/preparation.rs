use radon_algebra::{q_int, JetSeries, MultiIndex, Poly, TruncationPolicy};
use radon_lie::{VectorField, WeightedField};
use radon_prep::*;

fn series(nt: usize, nx: usize, lt: u32, lx: u32, terms: &[(&[u32], i64)]) -> JetSeries {
    let p = Poly::from_terms(nt + nx, terms.iter().map(|(m, c)| (MultiIndex(m.to_vec()), q_int(*c))));
    JetSeries::new(nt, nx, TruncationPolicy::orders(lt, lx), vec![p]).unwrap()
}

#[test]
fn prepare_t_one_plus_x_plus_t_squared() {
    let f = series(1, 1, 2, 2, &[(&[1, 0], 1), (&[1, 1], 1), (&[2, 0], 1)]);
    let prep = taylor_prepare(&f).unwrap();
    let alphas: Vec<MultiIndex> = prep.terms.iter().map(|t| t.alpha.clone()).collect();
    assert_eq!(alphas, vec![MultiIndex(vec![1]), MultiIndex(vec![2])]);
    for t in &prep.terms {
        assert_eq!(t.c, JetSeries::constant_one(1, 1, f.policy()));
    }
    assert!(normalization_holds(&prep));
    assert_eq!(reconstruct(&prep, &f), f);
}

#[test]
fn prepare_single_term() {
    let f = series(2, 1, 3, 2, &[(&[1, 2, 1], 3), (&[1, 2, 0], 1)]);
    let prep = taylor_prepare(&f).unwrap();
    assert_eq!(prep.terms.len(), 1);
    assert_eq!(prep.terms[0].alpha, MultiIndex(vec![1, 2]));
    assert_eq!(prep.terms[0].c, JetSeries::constant_one(2, 1, f.policy()));
}

#[test]
fn prepare_minus_two_st() {
    let f = series(2, 1, 3, 3, &[(&[1, 1, 0], -2)]);
    let prep = taylor_prepare(&f).unwrap();
    assert_eq!(prep.terms.len(), 1);
    assert_eq!(prep.terms[0].alpha, MultiIndex(vec![1, 1]));
    assert_eq!(prep.terms[0].f_alpha, vec![Poly::constant(1, q_int(-2))]);
    assert!(normalization_holds(&prep));
}

#[test]
fn prepare_with_nontrivial_coefficients() {
    // t x + t^2 x^2 + t^3 x^3: t^2 x^2 = (t x)·(t x), so only (1) is needed.
    let f = series(1, 1, 3, 3, &[(&[1, 1], 1), (&[2, 2], 1), (&[3, 3], 1)]);
    let prep = taylor_prepare(&f).unwrap();
    assert_eq!(prep.terms.len(), 1);
    assert!(normalization_holds(&prep));
    assert_eq!(reconstruct(&prep, &f), f);
    // vector-valued with a t-free part
    let p = TruncationPolicy::orders(3, 2);
    let f = JetSeries::new(
        1,
        1,
        p,
        vec![
            Poly::from_terms(2, [(MultiIndex(vec![0, 1]), q_int(1)), (MultiIndex(vec![2, 0]), q_int(5))]),
            Poly::from_terms(2, [(MultiIndex(vec![1, 1]), q_int(-1)), (MultiIndex(vec![3, 2]), q_int(2))]),
        ],
    )
    .unwrap();
    let prep = taylor_prepare(&f).unwrap();
    assert!(normalization_holds(&prep));
    assert_eq!(reconstruct(&prep, &f), f);
}

fn wf(comps: Vec<Poly>, d: &[u32]) -> WeightedField {
    let n = comps.len();
    WeightedField::new(VectorField::new(n, comps).unwrap(), d.to_vec()).unwrap()
}

fn xpow(k: u32) -> Poly {
    Poly::monomial(1, MultiIndex(vec![k]), q_int(1))
}

#[test]
fn finite_generation_examples() {
    let s: Vec<WeightedField> = (1..=5).map(|k| wf(vec![xpow(k)], &[k])).collect();
    let fg = finite_generate(&s, None).unwrap();
    assert_eq!(fg.selected, vec![0]);
    assert!(replay_generation(&s, &fg));

    let s = vec![wf(vec![xpow(0)], &[1]), wf(vec![xpow(1)], &[2])];
    let fg = finite_generate(&s, None).unwrap();
    assert_eq!(fg.selected, vec![0]);
    assert!(replay_generation(&s, &fg));

    let s = vec![wf(vec![Poly::one(2), Poly::zero(2)], &[1, 0]), wf(vec![Poly::zero(2), Poly::one(2)], &[0, 1])];
    let fg = finite_generate(&s, None).unwrap();
    assert_eq!(fg.selected, vec![0, 1]);
}

#[test]
fn degree_constraint_is_enforced() {
    // x∂ is a multiple of ∂, but ∂ has the larger degree.
    let s = vec![wf(vec![xpow(1)], &[1]), wf(vec![xpow(0)], &[2])];
    let fg = finite_generate(&s, None).unwrap();
    assert_eq!(fg.selected, vec![0, 1]);
    assert!(replay_generation(&s, &fg));
}
