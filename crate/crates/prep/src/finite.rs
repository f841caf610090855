use radon_algebra::Poly;
use radon_lie::{VectorField, WeightedField};

use crate::module::{replay_poly_module, solve_poly_module};
use crate::PrepError;

/// g = Σ c · f over the listed generators (indices into the input set).
#[derive(Clone, Debug)]
pub struct GenCertificate {
    pub target: usize,
    pub terms: Vec<(usize, Poly)>,
    /// Monomials above this x-degree were not compared (`None`: exact identity).
    pub prec: Option<i32>,
}

#[derive(Clone, Debug)]
pub struct FiniteGeneration {
    /// Indices of the selected subset F.
    pub selected: Vec<usize>,
    pub certificates: Vec<GenCertificate>,
    pub coeff_degree: u32,
}

pub(crate) fn prec_of<'a>(fs: impl IntoIterator<Item = &'a VectorField>) -> Option<i32> {
    fs.into_iter().fold(None, |acc, f| match (acc, f.prec()) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, None) => a,
        (None, b) => b,
    })
}

/// Solves X₀ = Σ c_j X_j with polynomial c_j of degree ≤ `coeff_degree`.
pub fn solve_field_combination(target: &VectorField, gens: &[&VectorField], coeff_degree: u32) -> Option<(Vec<Poly>, Option<i32>)> {
    let prec = prec_of(std::iter::once(target).chain(gens.iter().copied()));
    let gs: Vec<&[Poly]> = gens.iter().map(|g| g.comps()).collect();
    solve_poly_module(target.comps(), &gs, coeff_degree, prec).map(|c| (c, prec))
}

pub fn replay_field_combination(target: &VectorField, gens: &[&VectorField], coeffs: &[Poly], prec: Option<i32>) -> bool {
    let gs: Vec<&[Poly]> = gens.iter().map(|g| g.comps()).collect();
    replay_poly_module(target.comps(), &gs, coeffs, prec)
}

/// Greedy finite generating subset: elements are visited by increasing |d|₁
/// and kept when no combination Σ_{d ≤ e} c f of the kept ones represents them.
pub fn finite_generate(s: &[WeightedField], coeff_degree: Option<u32>) -> Result<FiniteGeneration, PrepError> {
    if let Some(w) = s.first() {
        if s.iter().any(|v| v.n() != w.n() || v.nu() != w.nu()) {
            return Err(PrepError::Shape("mixed dimensions in generating set".into()));
        }
    }
    let deg = coeff_degree.unwrap_or_else(|| s.iter().map(|w| w.field.x_degree_max()).max().unwrap_or(0));
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by_key(|&i| (s[i].degree_l1(), i));
    let mut selected: Vec<usize> = Vec::new();
    let mut certificates = Vec::new();
    for i in order {
        let g = &s[i];
        let cand: Vec<usize> = selected.iter().copied().filter(|&j| s[j].degree_le(g.degree())).collect();
        let gens: Vec<&VectorField> = cand.iter().map(|&j| &s[j].field).collect();
        match solve_field_combination(&g.field, &gens, deg) {
            Some((coeffs, prec)) => {
                let terms = cand.into_iter().zip(coeffs).filter(|(_, c)| !c.is_zero()).collect();
                certificates.push(GenCertificate { target: i, terms, prec });
            }
            None => {
                selected.push(i);
                let nv = g.n();
                certificates.push(GenCertificate { target: i, terms: vec![(i, Poly::one(nv))], prec: g.field.prec() });
            }
        }
    }
    certificates.sort_by_key(|c| c.target);
    Ok(FiniteGeneration { selected, certificates, coeff_degree: deg })
}

/// Replays every certificate: the combination reproduces the target and each
/// generator used is in F with d ≤ e.
pub fn replay_generation(s: &[WeightedField], fg: &FiniteGeneration) -> bool {
    fg.certificates.len() == s.len()
        && fg.certificates.iter().all(|cert| {
            let g = &s[cert.target];
            let ok_deg = cert.terms.iter().all(|(j, _)| fg.selected.contains(j) && s[*j].degree_le(g.degree()));
            let gens: Vec<&VectorField> = cert.terms.iter().map(|(j, _)| &s[*j].field).collect();
            let coeffs: Vec<Poly> = cert.terms.iter().map(|(_, c)| c.clone()).collect();
            ok_deg && replay_field_combination(&g.field, &gens, &coeffs, cert.prec)
        })
}
