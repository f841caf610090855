use std::collections::BTreeMap;

use radon_algebra::linalg::{SparseVec, SpanBasis};
use radon_algebra::{MultiIndex, Poly, Q};

fn keyed(v: &[Poly], prec: Option<i32>) -> SparseVec<(usize, MultiIndex)> {
    let mut out = BTreeMap::new();
    for (i, p) in v.iter().enumerate() {
        for (m, c) in p.terms() {
            if prec.map_or(true, |q| (m.total() as i64) <= q as i64) {
                out.insert((i, m.clone()), c.clone());
            }
        }
    }
    out
}

/// Solves `target = Σ_j c_j · gens[j]` with polynomial coefficients c_j of
/// degree ≤ `coeff_degree`, as an identity of polynomial vectors. With
/// `prec = Some(p)` only monomials of degree ≤ p are compared.
pub fn solve_poly_module(target: &[Poly], gens: &[&[Poly]], coeff_degree: u32, prec: Option<i32>) -> Option<Vec<Poly>> {
    let nv = target.first().map(|p| p.nvars()).or_else(|| gens.first().and_then(|g| g.first()).map(|p| p.nvars()))?;
    let tv = keyed(target, prec);
    if tv.is_empty() {
        return Some(vec![Poly::zero(nv); gens.len()]);
    }
    let monos = MultiIndex::all_up_to(nv, coeff_degree);
    let one = Q::from_integer(1.into());
    let mut basis = SpanBasis::new(true);
    let mut origin = Vec::new();
    for (j, g) in gens.iter().enumerate() {
        for mu in &monos {
            if let Some(p) = prec {
                if (mu.total() as i64) > p as i64 {
                    continue;
                }
            }
            let col: Vec<Poly> = g.iter().map(|p| p.mul_monomial(mu, &one)).collect();
            let v = keyed(&col, prec);
            if v.is_empty() {
                continue;
            }
            basis.insert(&v);
            origin.push((j, mu.clone()));
        }
    }
    let combo = basis.express(&tv)?;
    let mut out = vec![Poly::zero(nv); gens.len()];
    for (idx, c) in combo {
        let (j, mu) = &origin[idx];
        out[*j].add_term(mu.clone(), c);
    }
    Some(out)
}

/// Σ_j c_j · gens[j], compared with `target` on monomials of degree ≤ prec.
pub fn replay_poly_module(target: &[Poly], gens: &[&[Poly]], coeffs: &[Poly], prec: Option<i32>) -> bool {
    let nv = match target.first() {
        Some(p) => p.nvars(),
        None => return true,
    };
    let mut acc = vec![Poly::zero(nv); target.len()];
    for (g, c) in gens.iter().zip(coeffs) {
        for (a, gi) in acc.iter_mut().zip(g.iter()) {
            *a = &*a + &(c * gi);
        }
    }
    keyed(&acc, prec) == keyed(target, prec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_out_x() {
        let x = Poly::var(1, 0);
        let x3 = &(&x * &x) * &x;
        let c = solve_poly_module(&[x3.clone()], &[&[x.clone()]], 3, None).unwrap();
        assert_eq!(c[0], &x * &x);
        assert!(replay_poly_module(&[x3], &[&[x.clone()]], &c, None));
        assert!(solve_poly_module(&[Poly::one(1)], &[&[x]], 3, None).is_none());
    }
}
