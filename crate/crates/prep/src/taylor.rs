use std::collections::BTreeMap;

use radon_algebra::{JetSeries, MultiIndex, Poly, Q};

use crate::module::solve_poly_module;
use crate::PrepError;

#[derive(Clone, Debug)]
pub struct PrepTerm {
    pub alpha: MultiIndex,
    /// Scalar series c_{α_k}(t, x).
    pub c: JetSeries,
    /// Taylor coefficient f_{α_k}(x), one polynomial per component.
    pub f_alpha: Vec<Poly>,
}

#[derive(Clone, Debug)]
pub struct Preparation {
    pub terms: Vec<PrepTerm>,
    /// Degree bound used for the x-polynomial coefficients of the solves.
    pub coeff_degree: u32,
    /// The prepared series was x-saturated.
    pub saturated: bool,
}

fn x_degree(p: &Poly) -> u32 {
    p.terms().keys().map(|m| m.total()).max().unwrap_or(0)
}

/// t^{a} x^{b} monomial coefficients: lifts an x-polynomial to (t, x) times t^a.
fn lift_times_t(p: &Poly, a: &MultiIndex) -> Poly {
    let nt = a.len();
    Poly::from_terms(nt + p.nvars(), p.terms().iter().map(|(m, c)| (a.concat(m), c.clone())))
}

/// Coefficient of t^a in a (t, x) polynomial, as an x-polynomial.
fn t_coeff(p: &Poly, nt: usize, a: &MultiIndex) -> Poly {
    let nx = p.nvars() - nt;
    Poly::from_terms(
        nx,
        p.terms().iter().filter(|(m, _)| m.0[..nt] == a.0[..]).map(|(m, c)| (m.slice(nt, nt + nx), c.clone())),
    )
}

/// f = Σ_k c_{α_k} t^{α_k} f_{α_k}: greedy selection of the α_k in graded
/// order, polynomial coefficient solves, then the normalization step.
///
/// Membership of t^α f_α is decided as a polynomial identity
/// f_α = Σ_{α_k ≤ α} c(x) f_{α_k} with deg c ≤ max x-degree of f.
pub fn taylor_prepare(f: &JetSeries) -> Result<Preparation, PrepError> {
    let (nt, nx) = (f.nt(), f.nx());
    let tt = f.t_terms();
    let coeff_degree = tt.values().flat_map(|v| v.iter()).map(x_degree).max().unwrap_or(0);
    let mut alphas: Vec<&MultiIndex> = tt.keys().collect();
    alphas.sort_by(|a, b| a.total().cmp(&b.total()).then_with(|| a.cmp(b)));

    let mut selected: Vec<MultiIndex> = Vec::new();
    // c_k accumulated as (t, x) polynomials.
    let mut cs: Vec<Poly> = Vec::new();
    for a in alphas {
        let fa = &tt[a];
        let cand: Vec<usize> = (0..selected.len()).filter(|&k| selected[k].le(a)).collect();
        let gens: Vec<&[Poly]> = cand.iter().map(|&k| tt[&selected[k]].as_slice()).collect();
        match solve_poly_module(fa, &gens, coeff_degree, None) {
            Some(coeffs) if !cand.is_empty() => {
                for (&k, c) in cand.iter().zip(coeffs) {
                    let shift = a.checked_sub(&selected[k]).expect("α_k ≤ α");
                    let add = lift_times_t(&c, &shift);
                    cs[k] = &cs[k] + &add;
                }
            }
            _ => {
                selected.push(a.clone());
                cs.push(Poly::one(nt + nx));
            }
        }
    }
    let cs = normalize(&selected, &cs, nt);
    let terms: Vec<PrepTerm> = selected
        .iter()
        .zip(cs)
        .map(|(a, c)| PrepTerm {
            alpha: a.clone(),
            c: JetSeries::new(nt, nx, f.policy(), vec![c]).expect("layout"),
            f_alpha: tt[a].clone(),
        })
        .collect();
    let prep = Preparation { terms, coeff_degree, saturated: f.is_saturated() };
    if !normalization_holds(&prep) {
        return Err(PrepError::Internal("normalization identity failed".into()));
    }
    if reconstruct(&prep, f) != *f {
        return Err(PrepError::Internal("preparation does not reconstruct f".into()));
    }
    Ok(prep)
}

/// t^{α_k} ĉ_k = t^{α_k} c_k − Σ_j t^{α_j} [t^{α_j}-coefficient of t^{α_k} c_k] + t^{α_k}.
fn normalize(alphas: &[MultiIndex], cs: &[Poly], nt: usize) -> Vec<Poly> {
    let one = Q::from_integer(1.into());
    alphas
        .iter()
        .zip(cs)
        .map(|(ak, ck)| {
            let nv = ck.nvars();
            let ak_full = ak.concat(&MultiIndex::zero(nv - nt));
            let mut p = ck.mul_monomial(&ak_full, &one);
            for aj in alphas {
                let cj = t_coeff(&p, nt, aj);
                p = &p - &lift_times_t(&cj, aj);
            }
            p.add_term(ak_full.clone(), one.clone());
            Poly::from_terms(nv, p.terms().iter().map(|(m, c)| (m.checked_sub(&ak_full).expect("divisible by t^α_k"), c.clone())))
        })
        .collect()
}

/// The t^{α_j}-coefficient of t^{α_k} c_k is δ_{jk} (as a function of x).
pub fn normalization_holds(prep: &Preparation) -> bool {
    let one = Q::from_integer(1.into());
    prep.terms.iter().enumerate().all(|(k, tk)| {
        let nt = tk.c.nt();
        let nv = nt + tk.c.nx();
        let shifted = tk.c.comp(0).mul_monomial(&tk.alpha.concat(&MultiIndex::zero(nv - nt)), &one);
        prep.terms.iter().enumerate().all(|(j, tj)| {
            let coef = t_coeff(&shifted, nt, &tj.alpha);
            if j == k {
                coef == Poly::one(nv - nt)
            } else {
                coef.is_zero()
            }
        })
    })
}

/// Σ_k c_k t^{α_k} f_{α_k}, truncated to the policy of `like`.
pub fn reconstruct(prep: &Preparation, like: &JetSeries) -> JetSeries {
    let mut acc = JetSeries::zero(like.nt(), like.nx(), like.policy(), like.arity());
    for t in &prep.terms {
        let mono: BTreeMap<MultiIndex, Vec<Poly>> = [(t.alpha.clone(), t.f_alpha.clone())].into_iter().collect();
        let g = JetSeries::from_t_terms(like.nt(), like.nx(), like.policy(), like.arity(), &mono).expect("layout");
        acc = acc.add(&t.c.mul(&g).expect("layout")).expect("layout");
    }
    acc
}
