use std::collections::BTreeMap;
use std::fmt;

use num_traits::One;

use crate::{AlgebraError, CompiledPoly, MultiIndex, Poly, Q};

/// Truncation orders for the symbolic layer plus the float tolerance used by
/// numeric layers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationPolicy {
    pub lt: u32,
    pub lx: u32,
    pub tolerance: f64,
}

impl TruncationPolicy {
    pub fn new(lt: u32, lx: u32, tolerance: f64) -> Result<Self, AlgebraError> {
        if lt < 1 {
            return Err(AlgebraError::Policy("L_t must be at least 1".into()));
        }
        if !(tolerance > 0.0) {
            return Err(AlgebraError::Policy("tolerance must be positive".into()));
        }
        Ok(TruncationPolicy { lt, lx, tolerance })
    }

    pub fn orders(lt: u32, lx: u32) -> Self {
        Self::new(lt, lx, 1e-10).expect("valid orders")
    }
}

impl Eq for TruncationPolicy {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Keep {
    Yes,
    DropT,
    DropX,
}

/// The truncation window: monomials t^α x^β with |α| ≤ lt and
/// |α| + |β| ≤ budget. The first `nt` variables are the t-variables.
///
/// The ideal cut out by the window is stable under products, under
/// substitution of maps without constant term, and under derivations whose
/// coefficients vanish at t = 0, so every stored coefficient is exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub nt: usize,
    pub lt: u32,
    pub budget: u32,
}

impl Window {
    pub fn new(nt: usize, policy: &TruncationPolicy) -> Self {
        Window { nt, lt: policy.lt, budget: policy.lt + policy.lx }
    }

    #[inline]
    pub fn keep(&self, m: &MultiIndex) -> Keep {
        let ta: u32 = m.0[..self.nt].iter().sum();
        if ta > self.lt {
            return Keep::DropT;
        }
        let xa: u32 = m.0[self.nt..].iter().sum();
        if ta + xa > self.budget {
            Keep::DropX
        } else {
            Keep::Yes
        }
    }
}

/// Truncated series in t (N variables) with polynomial coefficients in x
/// (n variables); scalar (arity 1) or ℝ^m-valued.
#[derive(Clone, Debug)]
pub struct JetSeries {
    nt: usize,
    nx: usize,
    policy: TruncationPolicy,
    comps: Vec<Poly>,
    saturated: bool,
}

impl PartialEq for JetSeries {
    /// Exact equality of the stored terms; the saturation flag is metadata.
    fn eq(&self, o: &Self) -> bool {
        self.nt == o.nt && self.nx == o.nx && self.comps == o.comps
    }
}

impl JetSeries {
    pub fn new(nt: usize, nx: usize, policy: TruncationPolicy, comps: Vec<Poly>) -> Result<Self, AlgebraError> {
        for p in &comps {
            if p.nvars() != nt + nx {
                return Err(AlgebraError::Dimension { expected: nt + nx, got: p.nvars() });
            }
        }
        let w = Window::new(nt, &policy);
        let mut saturated = false;
        let comps = comps
            .into_iter()
            .map(|p| {
                let (q, s) = p.truncate(&w);
                saturated |= s;
                q
            })
            .collect();
        Ok(JetSeries { nt, nx, policy, comps, saturated })
    }

    pub fn zero(nt: usize, nx: usize, policy: TruncationPolicy, arity: usize) -> Self {
        JetSeries { nt, nx, policy, comps: vec![Poly::zero(nt + nx); arity], saturated: false }
    }

    pub fn constant_one(nt: usize, nx: usize, policy: TruncationPolicy) -> Self {
        JetSeries { nt, nx, policy, comps: vec![Poly::one(nt + nx)], saturated: false }
    }

    /// The map x ↦ x.
    pub fn identity_map(nt: usize, nx: usize, policy: TruncationPolicy) -> Self {
        let comps = (0..nx).map(|i| Poly::var(nt + nx, nt + i)).collect();
        JetSeries { nt, nx, policy, comps, saturated: false }
    }

    pub fn t_var(nt: usize, nx: usize, policy: TruncationPolicy, k: usize) -> Self {
        JetSeries::new(nt, nx, policy, vec![Poly::var(nt + nx, k)]).expect("arity")
    }

    pub fn x_var(nt: usize, nx: usize, policy: TruncationPolicy, i: usize) -> Self {
        JetSeries::new(nt, nx, policy, vec![Poly::var(nt + nx, nt + i)]).expect("arity")
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn arity(&self) -> usize {
        self.comps.len()
    }

    pub fn policy(&self) -> TruncationPolicy {
        self.policy
    }

    pub fn window(&self) -> Window {
        Window::new(self.nt, &self.policy)
    }

    pub fn comps(&self) -> &[Poly] {
        &self.comps
    }

    pub fn comp(&self, i: usize) -> &Poly {
        &self.comps[i]
    }

    pub fn component_series(&self, i: usize) -> JetSeries {
        JetSeries { nt: self.nt, nx: self.nx, policy: self.policy, comps: vec![self.comps[i].clone()], saturated: self.saturated }
    }

    /// True when some truncation dropped a term inside the t-order because of
    /// the x budget: coefficients are then exact only up to x-degree
    /// `lt + lx - |α|` at t^α.
    pub fn is_saturated(&self) -> bool {
        self.saturated
    }

    pub fn with_saturation(mut self, s: bool) -> Self {
        self.saturated |= s;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|p| p.is_zero())
    }

    fn check_compat(&self, o: &JetSeries) -> Result<(), AlgebraError> {
        if self.nt != o.nt || self.nx != o.nx {
            return Err(AlgebraError::Incompatible(format!(
                "variables (N={}, n={}) vs (N={}, n={})",
                self.nt, self.nx, o.nt, o.nx
            )));
        }
        Ok(())
    }

    pub fn add(&self, o: &JetSeries) -> Result<JetSeries, AlgebraError> {
        self.check_compat(o)?;
        if self.arity() != o.arity() {
            return Err(AlgebraError::Arity(self.arity(), o.arity()));
        }
        let comps = self.comps.iter().zip(&o.comps).map(|(a, b)| a + b).collect();
        Ok(JetSeries::new(self.nt, self.nx, self.policy, comps)?.with_saturation(self.saturated || o.saturated))
    }

    pub fn sub(&self, o: &JetSeries) -> Result<JetSeries, AlgebraError> {
        self.add(&o.scale(&-Q::one()))
    }

    pub fn scale(&self, c: &Q) -> JetSeries {
        JetSeries { comps: self.comps.iter().map(|p| p.scale(c)).collect(), ..self.clone() }
    }

    /// Product. A scalar factor multiplies every component of the other.
    pub fn mul(&self, o: &JetSeries) -> Result<JetSeries, AlgebraError> {
        self.check_compat(o)?;
        let w = self.window();
        let mut sat = self.saturated || o.saturated;
        let comps = match (self.arity(), o.arity()) {
            (a, b) if a == b => self
                .comps
                .iter()
                .zip(&o.comps)
                .map(|(p, q)| {
                    let (r, s) = p.mul_window(q, Some(&w));
                    sat |= s;
                    r
                })
                .collect(),
            (1, _) => o
                .comps
                .iter()
                .map(|q| {
                    let (r, s) = self.comps[0].mul_window(q, Some(&w));
                    sat |= s;
                    r
                })
                .collect(),
            (_, 1) => self
                .comps
                .iter()
                .map(|p| {
                    let (r, s) = p.mul_window(&o.comps[0], Some(&w));
                    sat |= s;
                    r
                })
                .collect(),
            (a, b) => return Err(AlgebraError::Arity(a, b)),
        };
        Ok(JetSeries { nt: self.nt, nx: self.nx, policy: self.policy, comps, saturated: sat })
    }

    /// `self(t, σ(t, x))`; σ must be an ℝ^n-valued map in the same variables.
    pub fn compose(&self, sigma: &JetSeries) -> Result<JetSeries, AlgebraError> {
        self.check_compat(sigma)?;
        if sigma.arity() != self.nx {
            return Err(AlgebraError::Arity(sigma.arity(), self.nx));
        }
        let w = self.window();
        let mut subs: Vec<Poly> = (0..self.nt).map(|k| Poly::var(self.nt + self.nx, k)).collect();
        subs.extend(sigma.comps.iter().cloned());
        let mut sat = self.saturated || sigma.saturated;
        let comps = self
            .comps
            .iter()
            .map(|p| {
                let (q, s) = p.substitute(&subs, Some(&w));
                sat |= s;
                q
            })
            .collect();
        Ok(JetSeries { nt: self.nt, nx: self.nx, policy: self.policy, comps, saturated: sat })
    }

    /// Checks γ_0(x) ≡ x: the t-free part of component i is exactly x_i.
    pub fn check_identity_at_zero(&self) -> Result<(), AlgebraError> {
        if self.arity() != self.nx {
            return Err(AlgebraError::Arity(self.arity(), self.nx));
        }
        for (i, p) in self.comps.iter().enumerate() {
            let t0 = p.filter(|m| m.0[..self.nt].iter().all(|&a| a == 0));
            if t0 != Poly::var(self.nt + self.nx, self.nt + i) {
                return Err(AlgebraError::NotIdentityAtZero(i));
            }
        }
        Ok(())
    }

    /// True when every stored term carries a positive power of t.
    pub fn vanishes_at_t0(&self) -> bool {
        self.comps.iter().all(|p| p.terms().keys().all(|m| m.0[..self.nt].iter().any(|&a| a > 0)))
    }

    /// Filtration inverse: the unique η with γ(t, η(t, x)) = x modulo t-order lt+1.
    pub fn invert(&self) -> Result<JetSeries, AlgebraError> {
        self.check_identity_at_zero()?;
        let id = JetSeries::identity_map(self.nt, self.nx, self.policy);
        let g = self.sub(&id)?;
        let mut eta = id.clone();
        for _ in 0..self.policy.lt {
            eta = id.sub(&g.compose(&eta)?)?;
        }
        Ok(eta)
    }

    /// Euler operator in t: each t^α term is multiplied by |α|.
    pub fn euler_t(&self) -> JetSeries {
        let comps = self
            .comps
            .iter()
            .map(|p| {
                Poly::from_terms(
                    p.nvars(),
                    p.terms().iter().map(|(m, c)| {
                        let k: u32 = m.0[..self.nt].iter().sum();
                        (m.clone(), c * Q::from_integer(k.into()))
                    }),
                )
            })
            .collect();
        JetSeries { comps, ..self.clone() }
    }

    /// Inverse of the Euler operator on terms with |α| > 0; t-free terms are
    /// rejected by returning `None`.
    pub fn inverse_euler_t(&self) -> Option<JetSeries> {
        let mut comps = Vec::with_capacity(self.arity());
        for p in &self.comps {
            let mut q = Poly::zero(p.nvars());
            for (m, c) in p.terms() {
                let k: u32 = m.0[..self.nt].iter().sum();
                if k == 0 {
                    return None;
                }
                q.add_term(m.clone(), c / Q::from_integer(k.into()));
            }
            comps.push(q);
        }
        Some(JetSeries { comps, ..self.clone() })
    }

    /// t_k ↦ factors[k]·t_k.
    pub fn scale_t(&self, factors: &[Q]) -> JetSeries {
        assert_eq!(factors.len(), self.nt);
        let comps = self
            .comps
            .iter()
            .map(|p| {
                Poly::from_terms(
                    p.nvars(),
                    p.terms().iter().map(|(m, c)| {
                        let mut v = c.clone();
                        for (f, &a) in factors.iter().zip(&m.0[..self.nt]) {
                            if a > 0 {
                                v *= num_traits::pow(f.clone(), a as usize);
                            }
                        }
                        (m.clone(), v)
                    }),
                )
            })
            .collect();
        JetSeries { comps, ..self.clone() }
    }

    /// Groups the stored terms by their t-exponent: α ↦ (coefficient polynomial in x, per component).
    pub fn t_terms(&self) -> BTreeMap<MultiIndex, Vec<Poly>> {
        let mut out: BTreeMap<MultiIndex, Vec<Poly>> = BTreeMap::new();
        for (i, p) in self.comps.iter().enumerate() {
            for (m, c) in p.terms() {
                let a = m.slice(0, self.nt);
                let b = m.slice(self.nt, self.nt + self.nx);
                let entry = out.entry(a).or_insert_with(|| vec![Poly::zero(self.nx); self.arity()]);
                entry[i].add_term(b, c.clone());
            }
        }
        out.retain(|_, v| v.iter().any(|p| !p.is_zero()));
        out
    }

    /// Coefficient of t^α as x-polynomials (zero when absent).
    pub fn t_coeff(&self, alpha: &MultiIndex) -> Vec<Poly> {
        let mut out = vec![Poly::zero(self.nx); self.arity()];
        for (i, p) in self.comps.iter().enumerate() {
            for (m, c) in p.terms() {
                if m.0[..self.nt] == alpha.0[..] {
                    out[i].add_term(m.slice(self.nt, self.nt + self.nx), c.clone());
                }
            }
        }
        out
    }

    /// Builds a series from t-exponent → x-polynomial coefficients.
    pub fn from_t_terms(
        nt: usize,
        nx: usize,
        policy: TruncationPolicy,
        arity: usize,
        terms: &BTreeMap<MultiIndex, Vec<Poly>>,
    ) -> Result<JetSeries, AlgebraError> {
        let mut comps = vec![Poly::zero(nt + nx); arity];
        for (a, coeffs) in terms {
            if coeffs.len() != arity {
                return Err(AlgebraError::Arity(coeffs.len(), arity));
            }
            for (i, p) in coeffs.iter().enumerate() {
                if p.nvars() != nx {
                    return Err(AlgebraError::Dimension { expected: nx, got: p.nvars() });
                }
                for (b, c) in p.terms() {
                    comps[i].add_term(a.concat(b), c.clone());
                }
            }
        }
        JetSeries::new(nt, nx, policy, comps)
    }

    /// Homogeneous t-degree-k part.
    pub fn t_homogeneous(&self, k: u32) -> JetSeries {
        let nt = self.nt;
        JetSeries {
            comps: self.comps.iter().map(|p| p.filter(|m| m.0[..nt].iter().sum::<u32>() == k)).collect(),
            ..self.clone()
        }
    }

    /// Drops every term of x-degree above lx (the reporting view).
    pub fn x_view(&self) -> JetSeries {
        let (nt, lx) = (self.nt, self.policy.lx);
        JetSeries {
            comps: self.comps.iter().map(|p| p.filter(|m| m.0[nt..].iter().sum::<u32>() <= lx)).collect(),
            ..self.clone()
        }
    }

    /// Same terms under a different policy (re-truncated).
    pub fn with_policy(&self, policy: TruncationPolicy) -> JetSeries {
        JetSeries::new(self.nt, self.nx, policy, self.comps.clone()).expect("same arity").with_saturation(self.saturated)
    }

    /// Precision in x at t^α: `None` when no budget truncation ever happened.
    pub fn x_precision_at(&self, alpha: &MultiIndex) -> Option<u32> {
        if self.saturated {
            Some((self.policy.lt + self.policy.lx).saturating_sub(alpha.total()))
        } else {
            None
        }
    }

    pub fn compile(&self) -> Vec<CompiledPoly> {
        self.comps.iter().map(|p| p.compile()).collect()
    }

    /// Evaluates at (t, x).
    pub fn eval_f64(&self, t: &[f64], x: &[f64]) -> Vec<f64> {
        let mut v = t.to_vec();
        v.extend_from_slice(x);
        self.comps.iter().map(|p| p.eval_f64(&v)).collect()
    }

    pub fn max_t_order(&self) -> u32 {
        self.comps.iter().flat_map(|p| p.terms().keys()).map(|m| m.0[..self.nt].iter().sum::<u32>()).max().unwrap_or(0)
    }

    pub fn var_name(&self, i: usize) -> String {
        if i < self.nt {
            format!("t{}", i + 1)
        } else {
            format!("x{}", i - self.nt + 1)
        }
    }

    pub fn render_comp(&self, i: usize) -> String {
        let nt = self.nt;
        self.comps[i].render(&|k| if k < nt { format!("t{}", k + 1) } else { format!("x{}", k - nt + 1) })
    }
}

impl fmt::Display for JetSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = (0..self.arity()).map(|i| self.render_comp(i)).collect();
        if parts.len() == 1 {
            write!(f, "{}", parts[0])
        } else {
            write!(f, "[{}]", parts.join(", "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q_int;

    fn pol(lt: u32, lx: u32) -> TruncationPolicy {
        TruncationPolicy::orders(lt, lx)
    }

    fn t(nt: usize, nx: usize, p: TruncationPolicy, k: usize) -> JetSeries {
        JetSeries::t_var(nt, nx, p, k)
    }

    #[test]
    fn truncation_rules() {
        let p1 = pol(1, 0);
        let tt = t(1, 0, p1, 0).mul(&t(1, 0, p1, 0)).unwrap();
        assert!(tt.is_zero());
        let p2 = pol(2, 0);
        let one = JetSeries::constant_one(1, 0, p2);
        let a = one.add(&t(1, 0, p2, 0)).unwrap();
        let b = one.sub(&t(1, 0, p2, 0)).unwrap();
        let prod = a.mul(&b).unwrap();
        let expect = one.sub(&t(1, 0, p2, 0).mul(&t(1, 0, p2, 0)).unwrap()).unwrap();
        assert_eq!(prod, expect);
        assert_eq!(a.add(&JetSeries::zero(1, 0, p2, 1)).unwrap(), a);
    }

    #[test]
    fn invert_examples() {
        let p = pol(2, 3);
        // x + t
        let id = JetSeries::identity_map(1, 1, p);
        let g = id.add(&t(1, 1, p, 0)).unwrap();
        let inv = g.invert().unwrap();
        assert_eq!(inv, id.sub(&t(1, 1, p, 0)).unwrap());
        // x + t x^2 -> x - t x^2 + 2 t^2 x^3
        let x = JetSeries::x_var(1, 1, p, 0);
        let x2 = x.mul(&x).unwrap();
        let tx2 = t(1, 1, p, 0).mul(&x2).unwrap();
        let g = id.add(&tx2).unwrap();
        let inv = g.invert().unwrap();
        let t2x3 = t(1, 1, p, 0).mul(&t(1, 1, p, 0)).unwrap().mul(&x2).unwrap().mul(&x).unwrap();
        let expect = id.sub(&tx2).unwrap().add(&t2x3.scale(&q_int(2))).unwrap();
        assert_eq!(inv, expect);
        assert_eq!(id.invert().unwrap(), id);
    }

    #[test]
    fn invert_rejects_non_identity() {
        let p = pol(2, 2);
        let x = JetSeries::x_var(1, 1, p, 0);
        assert!(matches!(x.scale(&q_int(2)).invert(), Err(AlgebraError::NotIdentityAtZero(0))));
    }

    #[test]
    fn t_terms_round_trip() {
        let p = pol(3, 3);
        let id = JetSeries::identity_map(2, 1, p);
        let g = id.sub(&t(2, 1, p, 0).mul(&t(2, 1, p, 1)).unwrap()).unwrap();
        let tt = g.t_terms();
        let back = JetSeries::from_t_terms(2, 1, p, 1, &tt).unwrap();
        assert_eq!(back, g);
        assert_eq!(g.t_coeff(&MultiIndex(vec![1, 1]))[0], Poly::constant(1, q_int(-1)));
    }

    #[test]
    fn window_keeps_exact_region() {
        let w = Window { nt: 1, lt: 2, budget: 5 };
        assert_eq!(w.keep(&MultiIndex(vec![2, 3])), Keep::Yes);
        assert_eq!(w.keep(&MultiIndex(vec![3, 0])), Keep::DropT);
        assert_eq!(w.keep(&MultiIndex(vec![1, 5])), Keep::DropX);
    }
}
