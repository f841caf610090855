use std::collections::BTreeMap;

use radon_algebra::linalg::{SparseVec, SpanBasis};
use radon_algebra::{JetSeries, Keep, MultiIndex, Poly, Window, Q};

use crate::{OrderWeights, PrepError};

type Key = (Q, usize, MultiIndex);

/// Newton diagram of a vector of series, in the order given by the weights.
#[derive(Clone, Debug, PartialEq)]
pub struct NewtonData {
    pub support: Vec<(MultiIndex, usize)>,
    pub exp_l: Option<(MultiIndex, usize)>,
}

pub fn newton_data(f: &JetSeries, order: &OrderWeights) -> NewtonData {
    let mut keyed: Vec<Key> = Vec::new();
    for (i, p) in f.comps().iter().enumerate() {
        for m in p.terms().keys() {
            keyed.push(order.key(m, i));
        }
    }
    keyed.sort();
    let support: Vec<(MultiIndex, usize)> = keyed.into_iter().map(|(_, i, m)| (m, i)).collect();
    let exp_l = support.first().cloned();
    NewtonData { support, exp_l }
}

#[derive(Clone, Debug)]
pub struct Division {
    pub remainder: JetSeries,
    /// One scalar series per generator: f − r = Σ c_k g_k in the window.
    pub coefficients: Vec<JetSeries>,
    /// E_L(M) at truncation: the leading exponents of the truncated module.
    pub e_l: Vec<(MultiIndex, usize)>,
}

/// All monomials of the series' variables that the window keeps.
pub fn window_monomials(nt: usize, nx: usize, w: &Window) -> Vec<MultiIndex> {
    MultiIndex::all_up_to(nt + nx, w.budget)
        .into_iter()
        .filter(|m| w.keep(m) == Keep::Yes)
        .collect()
}

fn to_keyed(f: &JetSeries, order: &OrderWeights) -> SparseVec<Key> {
    let mut v = BTreeMap::new();
    for (i, p) in f.comps().iter().enumerate() {
        for (m, c) in p.terms() {
            v.insert(order.key(m, i), c.clone());
        }
    }
    v
}

fn from_keyed(f: &JetSeries, v: &SparseVec<Key>) -> JetSeries {
    let nv = f.nt() + f.nx();
    let mut comps = vec![Poly::zero(nv); f.arity()];
    for ((_, i, m), c) in v {
        comps[*i].add_term(m.clone(), c.clone());
    }
    JetSeries::new(f.nt(), f.nx(), f.policy(), comps).expect("same layout")
}

/// Truncated module M_L = span{ μ·g_k } over the window monomials μ, in echelon
/// form with the L-smallest key as pivot, plus the (generator, monomial) of each
/// inserted vector.
pub struct TruncatedModule {
    basis: SpanBasis<Key>,
    origin: Vec<(usize, MultiIndex)>,
    order: OrderWeights,
}

impl TruncatedModule {
    pub fn build(gens: &[JetSeries], order: &OrderWeights) -> Result<Self, PrepError> {
        let Some(g0) = gens.first() else {
            return Ok(TruncatedModule { basis: SpanBasis::new(true), origin: vec![], order: order.clone() });
        };
        let (nt, nx) = (g0.nt(), g0.nx());
        if order.len() != nt + nx {
            return Err(PrepError::Order(format!("{} weights for {} variables", order.len(), nt + nx)));
        }
        let w = g0.window();
        let monos = window_monomials(nt, nx, &w);
        if let Some((a, b)) = order.collision(&monos) {
            return Err(PrepError::NotInjective(format!("L({a}) = L({b}); draw new weights")));
        }
        let mut basis = SpanBasis::new(true);
        let mut origin = Vec::new();
        for (k, g) in gens.iter().enumerate() {
            if g.nt() != nt || g.nx() != nx || g.arity() != g0.arity() {
                return Err(PrepError::Shape("generators differ in layout".into()));
            }
            for mu in &monos {
                let comps: Vec<Poly> =
                    g.comps().iter().map(|p| p.mul_monomial(mu, &Q::from_integer(1.into())).truncate(&w).0).collect();
                let v = JetSeries::new(nt, nx, g.policy(), comps).expect("layout");
                if v.is_zero() {
                    continue;
                }
                basis.insert(&to_keyed(&v, order));
                origin.push((k, mu.clone()));
            }
        }
        Ok(TruncatedModule { basis, origin, order: order.clone() })
    }

    pub fn e_l(&self) -> Vec<(MultiIndex, usize)> {
        self.basis.pivots().map(|(_, i, m)| (m.clone(), *i)).collect()
    }

    pub fn rank(&self) -> usize {
        self.basis.rank()
    }

    pub fn contains(&self, f: &JetSeries) -> bool {
        self.basis.contains(&to_keyed(f, &self.order))
    }
}

/// Division of `f` by the module generated by `gens`, at truncation.
pub fn galligo_divide(f: &JetSeries, gens: &[JetSeries], order: &OrderWeights) -> Result<Division, PrepError> {
    for g in gens {
        if g.nt() != f.nt() || g.nx() != f.nx() || g.arity() != f.arity() || g.policy() != f.policy() {
            return Err(PrepError::Shape("generator and dividend differ in layout or policy".into()));
        }
    }
    if order.len() != f.nt() + f.nx() {
        return Err(PrepError::Order(format!("{} weights for {} variables", order.len(), f.nt() + f.nx())));
    }
    let w = f.window();
    let monos = window_monomials(f.nt(), f.nx(), &w);
    if let Some((a, b)) = order.collision(&monos) {
        return Err(PrepError::NotInjective(format!("L({a}) = L({b}); draw new weights")));
    }
    let module = TruncatedModule::build(gens, order)?;
    let (r, combo) = module.basis.reduce(&to_keyed(f, order));
    let nv = f.nt() + f.nx();
    let mut cpolys = vec![Poly::zero(nv); gens.len()];
    for (idx, c) in combo {
        let (k, mu) = &module.origin[idx];
        cpolys[*k].add_term(mu.clone(), c);
    }
    let coefficients =
        cpolys.into_iter().map(|p| JetSeries::new(f.nt(), f.nx(), f.policy(), vec![p]).expect("layout")).collect();
    Ok(Division { remainder: from_keyed(f, &r), coefficients, e_l: module.e_l() })
}

/// Re-derives f − r from the coefficients, in the window.
pub fn division_residual(f: &JetSeries, gens: &[JetSeries], d: &Division) -> JetSeries {
    let mut acc = f.sub(&d.remainder).expect("layout");
    for (c, g) in d.coefficients.iter().zip(gens) {
        acc = acc.sub(&c.mul(g).expect("layout")).expect("layout");
    }
    acc
}
