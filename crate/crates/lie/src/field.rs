use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed};
use radon_algebra::linalg::SparseVec;
use radon_algebra::{CompiledPoly, JetSeries, MultiIndex, Poly, TruncationPolicy, Window, Q};

use crate::LieError;

/// Polynomial vector field Σ X^i ∂_{x_i} on ℝ^n. Coefficients may also depend
/// on `npar` leading parameter variables (the t's of a graded field series);
/// derivatives only act on the x-variables.
///
/// `prec` is the x-degree up to which the coefficients are known exactly
/// (`None`: exact polynomial). Terms beyond it are never stored.
#[derive(Clone, Debug)]
pub struct VectorField {
    npar: usize,
    n: usize,
    comps: Vec<Poly>,
    prec: Option<i32>,
}

impl PartialEq for VectorField {
    fn eq(&self, o: &Self) -> bool {
        self.npar == o.npar && self.n == o.n && self.comps == o.comps
    }
}

impl Eq for VectorField {}

impl VectorField {
    pub fn new(n: usize, comps: Vec<Poly>) -> Result<Self, LieError> {
        Self::with_params(0, n, comps, None)
    }

    pub fn with_params(npar: usize, n: usize, comps: Vec<Poly>, prec: Option<i32>) -> Result<Self, LieError> {
        if comps.len() != n {
            return Err(LieError::Dimension { expected: n, got: comps.len() });
        }
        for p in &comps {
            if p.nvars() != npar + n {
                return Err(LieError::Dimension { expected: npar + n, got: p.nvars() });
            }
        }
        Ok(VectorField { npar, n, comps, prec }.projected())
    }

    pub fn zero(npar: usize, n: usize) -> Self {
        VectorField { npar, n, comps: vec![Poly::zero(npar + n); n], prec: None }
    }

    /// ∂_{x_i}.
    pub fn coordinate(n: usize, i: usize) -> Self {
        let mut f = Self::zero(0, n);
        f.comps[i] = Poly::one(n);
        f
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn npar(&self) -> usize {
        self.npar
    }

    pub fn comps(&self) -> &[Poly] {
        &self.comps
    }

    pub fn comp(&self, i: usize) -> &Poly {
        &self.comps[i]
    }

    pub fn prec(&self) -> Option<i32> {
        self.prec
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|p| p.is_zero())
    }

    fn x_degree(&self, m: &MultiIndex) -> u32 {
        m.0[self.npar..].iter().sum()
    }

    fn projected(mut self) -> Self {
        if let Some(p) = self.prec {
            let np = self.npar;
            for c in &mut self.comps {
                *c = c.filter(|m| (m.0[np..].iter().sum::<u32>() as i64) <= p as i64);
            }
        }
        self
    }

    /// Lowers the precision to `p` (dropping terms above it).
    pub fn with_prec(&self, p: Option<i32>) -> Self {
        let prec = min_prec(self.prec, p);
        VectorField { prec, ..self.clone() }.projected()
    }

    fn check(&self, o: &VectorField) -> Result<(), LieError> {
        if self.n != o.n || self.npar != o.npar {
            return Err(LieError::Dimension { expected: self.n, got: o.n });
        }
        Ok(())
    }

    pub fn add(&self, o: &VectorField) -> Result<VectorField, LieError> {
        self.check(o)?;
        let comps = self.comps.iter().zip(&o.comps).map(|(a, b)| a + b).collect();
        Ok(VectorField { npar: self.npar, n: self.n, comps, prec: min_prec(self.prec, o.prec) }.projected())
    }

    pub fn sub(&self, o: &VectorField) -> Result<VectorField, LieError> {
        self.add(&o.scale(&-Q::one()))
    }

    pub fn scale(&self, c: &Q) -> VectorField {
        VectorField { comps: self.comps.iter().map(|p| p.scale(c)).collect(), ..self.clone() }
    }

    /// f·X for a scalar polynomial f in the same variables.
    pub fn mul_poly(&self, f: &Poly, w: Option<&Window>) -> VectorField {
        let comps = self.comps.iter().map(|p| p.mul_window(f, w).0).collect();
        VectorField { comps, ..self.clone() }.projected()
    }

    /// X(f) = Σ X^i ∂_{x_i} f.
    pub fn apply(&self, f: &Poly, w: Option<&Window>) -> (Poly, bool) {
        let mut out = Poly::zero(self.npar + self.n);
        let mut sat = false;
        for (i, xi) in self.comps.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            let d = f.deriv(self.npar + i);
            if d.is_zero() {
                continue;
            }
            let (p, s) = xi.mul_window(&d, w);
            sat |= s;
            for (m, c) in p.terms() {
                out.add_term(m.clone(), c.clone());
            }
        }
        (out, sat)
    }

    /// [X, Y]^i = X(Y^i) − Y(X^i), the commutator of the operators X and Y.
    pub fn bracket_window(&self, o: &VectorField, w: Option<&Window>) -> Result<(VectorField, bool), LieError> {
        self.check(o)?;
        let mut sat = false;
        let mut comps = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let (a, s1) = self.apply(&o.comps[i], w);
            let (b, s2) = o.apply(&self.comps[i], w);
            sat |= s1 | s2;
            comps.push(&a - &b);
        }
        let prec = match (self.prec, o.prec) {
            (None, None) => None,
            (a, b) => min_prec(a, b).map(|p| p - 1),
        };
        Ok((VectorField { npar: self.npar, n: self.n, comps, prec }.projected(), sat))
    }

    pub fn bracket(&self, o: &VectorField) -> Result<VectorField, LieError> {
        Ok(self.bracket_window(o, None)?.0)
    }

    /// Value at a point (all variables, parameters first).
    pub fn eval(&self, v: &[Q]) -> Vec<Q> {
        self.comps.iter().map(|p| p.eval(v)).collect()
    }

    pub fn eval_f64(&self, v: &[f64]) -> Vec<f64> {
        self.comps.iter().map(|p| p.eval_f64(v)).collect()
    }

    pub fn compile(&self) -> Vec<CompiledPoly> {
        self.comps.iter().map(|p| p.compile()).collect()
    }

    /// Coefficient vector keyed by (component, monomial).
    pub fn coefficient_vector(&self) -> SparseVec<(usize, MultiIndex)> {
        let mut v = BTreeMap::new();
        for (i, p) in self.comps.iter().enumerate() {
            for (m, c) in p.terms() {
                v.insert((i, m.clone()), c.clone());
            }
        }
        v
    }

    pub fn from_coefficient_vector(npar: usize, n: usize, v: &SparseVec<(usize, MultiIndex)>) -> Self {
        let mut f = Self::zero(npar, n);
        for ((i, m), c) in v {
            f.comps[*i].add_term(m.clone(), c.clone());
        }
        f
    }

    /// Largest x-degree of a stored term.
    pub fn x_degree_max(&self) -> u32 {
        self.comps.iter().flat_map(|p| p.terms().keys()).map(|m| self.x_degree(m)).max().unwrap_or(0)
    }

    /// For a field with parameters: t^α ↦ coefficient field in x alone.
    pub fn t_coefficients(&self) -> BTreeMap<MultiIndex, VectorField> {
        let mut out: BTreeMap<MultiIndex, VectorField> = BTreeMap::new();
        for (i, p) in self.comps.iter().enumerate() {
            for (m, c) in p.terms() {
                let a = m.slice(0, self.npar);
                let b = m.slice(self.npar, self.npar + self.n);
                let e = out.entry(a).or_insert_with(|| VectorField::zero(0, self.n));
                e.comps[i].add_term(b, c.clone());
            }
        }
        out.retain(|_, f| !f.is_zero());
        out
    }

    /// Σ t^α X_α as a field with `npar` parameters.
    pub fn from_t_coefficients(npar: usize, n: usize, terms: &BTreeMap<MultiIndex, VectorField>) -> Self {
        let mut f = Self::zero(npar, n);
        for (a, x) in terms {
            assert_eq!(x.npar, 0);
            for (i, p) in x.comps.iter().enumerate() {
                for (b, c) in p.terms() {
                    f.comps[i].add_term(a.concat(b), c.clone());
                }
            }
        }
        f
    }

    /// Embeds an x-only field as a parameter field (constant in the parameters).
    pub fn lift(&self, npar: usize) -> VectorField {
        assert_eq!(self.npar, 0);
        let map: Vec<usize> = (npar..npar + self.n).collect();
        VectorField {
            npar,
            n: self.n,
            comps: self.comps.iter().map(|p| p.remap(npar + self.n, &map)).collect(),
            prec: self.prec,
        }
    }

    /// The series (t, x) ↦ (X^1, …, X^n) under the given policy.
    pub fn to_series(&self, policy: TruncationPolicy) -> JetSeries {
        JetSeries::new(self.npar, self.n, policy, self.comps.clone()).expect("matching variable counts")
    }

    pub fn from_series(s: &JetSeries) -> Result<Self, LieError> {
        Self::with_params(s.nt(), s.nx(), s.comps().to_vec(), None)
    }

    pub fn render(&self) -> String {
        let np = self.npar;
        let name = move |k: usize| if k < np { format!("t{}", k + 1) } else { format!("x{}", k - np + 1) };
        let mut parts: Vec<(bool, String)> = Vec::new();
        for (i, p) in self.comps.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let d = format!("d{}", i + 1);
            if p.len() == 1 {
                let (m, c) = p.terms().iter().next().unwrap();
                let neg = c.is_negative();
                let mag = Poly::monomial(p.nvars(), m.clone(), c.abs());
                let body = if mag.is_one_poly() { d } else { format!("{}*{d}", mag.render(&name)) };
                parts.push((neg, body));
            } else {
                parts.push((false, format!("({})*{d}", p.render(&name))));
            }
        }
        if parts.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        for (k, (neg, body)) in parts.into_iter().enumerate() {
            match (k, neg) {
                (0, true) => s.push('-'),
                (0, false) => {}
                (_, true) => s.push_str(" - "),
                (_, false) => s.push_str(" + "),
            }
            s.push_str(&body);
        }
        s
    }
}

trait IsOnePoly {
    fn is_one_poly(&self) -> bool;
}

impl IsOnePoly for Poly {
    fn is_one_poly(&self) -> bool {
        self.len() == 1 && {
            let (m, c) = self.terms().iter().next().unwrap();
            m.is_zero() && c.is_one()
        }
    }
}

pub(crate) fn min_prec(a: Option<i32>, b: Option<i32>) -> Option<i32> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// Sum of fields; the empty sum is `zero(npar, n)`.
pub fn sum_fields(npar: usize, n: usize, fs: &[VectorField]) -> Result<VectorField, LieError> {
    let mut acc = VectorField::zero(npar, n);
    for f in fs {
        acc = acc.add(f)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use radon_algebra::q_int;

    fn x(n: usize, i: usize) -> Poly {
        Poly::var(n, i)
    }

    #[test]
    fn bracket_examples() {
        let d1 = VectorField::coordinate(2, 0);
        let x1d2 = VectorField::new(2, vec![Poly::zero(2), x(2, 0)]).unwrap();
        assert_eq!(d1.bracket(&x1d2).unwrap(), VectorField::coordinate(2, 1));
        assert!(x1d2.bracket(&x1d2).unwrap().is_zero());
        assert!(d1.bracket(&VectorField::coordinate(2, 1)).unwrap().is_zero());
    }

    #[test]
    fn render_forms() {
        let f = VectorField::new(3, vec![Poly::zero(3), Poly::one(3), x(3, 0)]).unwrap();
        assert_eq!(f.render(), "d2 + x1*d3");
        let g = f.scale(&q_int(-1));
        assert_eq!(g.render(), "-d2 - x1*d3");
        let h = VectorField::new(1, vec![&x(1, 0) + &Poly::one(1)]).unwrap();
        assert_eq!(h.render(), "(1 + x1)*d1");
        assert_eq!(VectorField::zero(0, 2).render(), "0");
    }

    #[test]
    fn precision_drops_high_terms() {
        let p = &x(1, 0) * &x(1, 0);
        let f = VectorField::with_params(0, 1, vec![&p + &Poly::one(1)], Some(1)).unwrap();
        assert_eq!(f, VectorField::coordinate(1, 0));
        let g = VectorField::new(1, vec![x(1, 0)]).unwrap();
        assert_eq!(f.bracket(&g).unwrap().prec(), Some(0));
    }
}
