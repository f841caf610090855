use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::rational::{format_q, q_to_f64};
use crate::series::{Keep, Window};
use crate::{MultiIndex, Q};

/// Sparse multivariate polynomial with exact rational coefficients.
/// Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<MultiIndex, Q>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        Self::monomial(nvars, MultiIndex::zero(nvars), c)
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Q::one())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        Self::monomial(nvars, MultiIndex::unit(nvars, i), Q::one())
    }

    pub fn monomial(nvars: usize, m: MultiIndex, c: Q) -> Self {
        assert_eq!(m.len(), nvars, "monomial arity");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { nvars, terms }
    }

    pub fn from_terms(nvars: usize, it: impl IntoIterator<Item = (MultiIndex, Q)>) -> Self {
        let mut p = Poly::zero(nvars);
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<MultiIndex, Q> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &MultiIndex) -> Q {
        self.terms.get(m).cloned().unwrap_or_else(Q::zero)
    }

    pub fn add_term(&mut self, m: MultiIndex, c: Q) {
        debug_assert_eq!(m.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.total()).max()
    }

    pub fn constant_term(&self) -> Q {
        self.coeff(&MultiIndex::zero(self.nvars))
    }

    pub fn scale(&self, c: &Q) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly { nvars: self.nvars, terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect() }
    }

    pub fn mul_monomial(&self, m: &MultiIndex, c: &Q) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly { nvars: self.nvars, terms: self.terms.iter().map(|(k, v)| (k.add(m), v * c)).collect() }
    }

    /// Keeps only monomials accepted by `keep`.
    pub fn filter(&self, keep: impl Fn(&MultiIndex) -> bool) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().filter(|(m, _)| keep(m)).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    /// Truncation to a window; the flag reports a dropped term that was
    /// inside the t-order but outside the x budget.
    pub fn truncate(&self, w: &Window) -> (Poly, bool) {
        let mut sat = false;
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            match w.keep(m) {
                Keep::Yes => {
                    terms.insert(m.clone(), c.clone());
                }
                Keep::DropX => sat = true,
                Keep::DropT => {}
            }
        }
        (Poly { nvars: self.nvars, terms }, sat)
    }

    pub fn truncate_degree(&self, d: u32) -> Poly {
        self.filter(|m| m.total() <= d)
    }

    pub fn mul_window(&self, other: &Poly, w: Option<&Window>) -> (Poly, bool) {
        assert_eq!(self.nvars, other.nvars, "poly arity");
        let mut out = Poly::zero(self.nvars);
        let mut sat = false;
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.add(mb);
                if let Some(w) = w {
                    match w.keep(&m) {
                        Keep::Yes => {}
                        Keep::DropX => {
                            sat = true;
                            continue;
                        }
                        Keep::DropT => continue,
                    }
                }
                out.add_term(m, ca * cb);
            }
        }
        (out, sat)
    }

    pub fn pow_window(&self, k: u32, w: Option<&Window>) -> (Poly, bool) {
        let mut acc = Poly::one(self.nvars);
        let mut sat = false;
        for _ in 0..k {
            let (p, s) = acc.mul_window(self, w);
            acc = p;
            sat |= s;
        }
        (acc, sat)
    }

    pub fn deriv(&self, i: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            let a = m.0[i];
            if a == 0 {
                continue;
            }
            let mut v = m.0.clone();
            v[i] -= 1;
            out.add_term(MultiIndex(v), c * Q::from_integer(a.into()));
        }
        out
    }

    pub fn eval(&self, x: &[Q]) -> Q {
        assert_eq!(x.len(), self.nvars, "eval arity");
        let mut acc = Q::zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (xi, &a) in x.iter().zip(&m.0) {
                if a > 0 {
                    term *= num_traits::pow(xi.clone(), a as usize);
                }
            }
            acc += term;
        }
        acc
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut v = q_to_f64(c);
                for (xi, &a) in x.iter().zip(&m.0) {
                    if a > 0 {
                        v *= xi.powi(a as i32);
                    }
                }
                v
            })
            .sum()
    }

    /// Substitutes `subs[i]` for variable `i`; all substitutes share an arity.
    pub fn substitute(&self, subs: &[Poly], w: Option<&Window>) -> (Poly, bool) {
        assert_eq!(subs.len(), self.nvars, "substitution arity");
        let target = subs.first().map(|p| p.nvars).unwrap_or(0);
        let mut cache: Vec<Vec<Poly>> = subs.iter().map(|s| vec![Poly::one(s.nvars), s.clone()]).collect();
        let mut sat = false;
        let mut out = Poly::zero(target);
        for (m, c) in &self.terms {
            let mut acc = Poly::constant(target, c.clone());
            for (i, &a) in m.0.iter().enumerate() {
                if a == 0 {
                    continue;
                }
                while cache[i].len() <= a as usize {
                    let last = cache[i].last().unwrap().clone();
                    let (p, s) = last.mul_window(&subs[i], w);
                    sat |= s;
                    cache[i].push(p);
                }
                let (p, s) = acc.mul_window(&cache[i][a as usize], w);
                sat |= s;
                acc = p;
                if acc.is_zero() {
                    break;
                }
            }
            for (m, c) in acc.terms {
                out.add_term(m, c);
            }
        }
        (out, sat)
    }

    /// Re-embeds into `new_nvars` variables; variable `i` becomes `map[i]`.
    pub fn remap(&self, new_nvars: usize, map: &[usize]) -> Poly {
        assert_eq!(map.len(), self.nvars);
        let mut out = Poly::zero(new_nvars);
        for (m, c) in &self.terms {
            let mut v = vec![0u32; new_nvars];
            for (i, &a) in m.0.iter().enumerate() {
                v[map[i]] += a;
            }
            out.add_term(MultiIndex(v), c.clone());
        }
        out
    }

    /// Largest absolute coefficient (as f64), for diagnostics.
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| q_to_f64(&c.abs())).fold(0.0, f64::max)
    }

    /// Human- and parser-readable rendering with caller-supplied variable names.
    pub fn render(&self, name: &dyn Fn(usize) -> String) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut keys: Vec<&MultiIndex> = self.terms.keys().collect();
        keys.sort_by(|a, b| a.total().cmp(&b.total()).then_with(|| b.cmp(a)));
        let mut s = String::new();
        for (k, m) in keys.into_iter().enumerate() {
            let c = &self.terms[m];
            let neg = c.is_negative();
            let mag = c.abs();
            if k == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let mut factors: Vec<String> = Vec::new();
            for (i, &a) in m.0.iter().enumerate() {
                match a {
                    0 => {}
                    1 => factors.push(name(i)),
                    _ => factors.push(format!("{}^{a}", name(i))),
                }
            }
            if factors.is_empty() {
                s.push_str(&format_q(&mag));
            } else if mag.is_one() {
                s.push_str(&factors.join("*"));
            } else {
                s.push_str(&format!("{}*{}", format_q(&mag), factors.join("*")));
            }
        }
        s
    }

    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let pows = m.0.iter().enumerate().filter(|(_, &a)| a > 0).map(|(i, &a)| (i, a)).collect();
                    (q_to_f64(c), pows)
                })
                .collect(),
        }
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render(&|i| format!("v{}", i + 1)))
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        assert_eq!(self.nvars, o.nvars, "poly arity");
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        assert_eq!(self.nvars, o.nvars, "poly arity");
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { nvars: self.nvars, terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect() }
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        self.mul_window(o, None).0
    }
}

/// Floating-point evaluator for hot loops.
#[derive(Clone, Debug)]
pub struct CompiledPoly {
    terms: Vec<(f64, Vec<(usize, u32)>)>,
}

impl CompiledPoly {
    #[inline]
    pub fn eval(&self, v: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (c, pows) in &self.terms {
            let mut t = *c;
            for &(i, a) in pows {
                t *= match a {
                    1 => v[i],
                    2 => v[i] * v[i],
                    _ => v[i].powi(a as i32),
                };
            }
            acc += t;
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{parse_q, q_int};

    fn x(n: usize, i: usize) -> Poly {
        Poly::var(n, i)
    }

    #[test]
    fn ring_basics() {
        let a = &Poly::one(1) + &x(1, 0);
        let b = &Poly::one(1) - &x(1, 0);
        let p = &a * &b;
        assert_eq!(p, &Poly::one(1) - &(&x(1, 0) * &x(1, 0)));
        assert_eq!(&a + &Poly::zero(1), a);
        assert!((&a - &a).is_zero());
    }

    #[test]
    fn derivative_and_eval() {
        let p = &(&x(2, 0) * &x(2, 0)) * &x(2, 1);
        assert_eq!(p.deriv(0), (&x(2, 0) * &x(2, 1)).scale(&q_int(2)));
        assert_eq!(p.eval(&[q_int(3), q_int(2)]), q_int(18));
        assert!((p.compile().eval(&[3.0, 2.0]) - 18.0).abs() < 1e-12);
        assert!((p.eval_f64(&[3.0, 2.0]) - 18.0).abs() < 1e-12);
    }

    #[test]
    fn substitution() {
        // p(u) = u^2 with u = v + 1 -> v^2 + 2v + 1
        let p = &x(1, 0) * &x(1, 0);
        let (q, _) = p.substitute(&[&x(1, 0) + &Poly::one(1)], None);
        let expect = Poly::from_terms(
            1,
            vec![(MultiIndex(vec![2]), q_int(1)), (MultiIndex(vec![1]), q_int(2)), (MultiIndex(vec![0]), q_int(1))],
        );
        assert_eq!(q, expect);
    }

    #[test]
    fn render_reads_back_shape() {
        let p = Poly::from_terms(
            2,
            vec![
                (MultiIndex(vec![1, 0]), q_int(1)),
                (MultiIndex(vec![0, 2]), parse_q("-1/2").unwrap()),
                (MultiIndex(vec![0, 0]), q_int(3)),
            ],
        );
        let s = p.render(&|i| format!("x{}", i + 1));
        assert_eq!(s, "3 + x1 - 1/2*x2^2");
    }

    #[test]
    fn remap_embeds() {
        let p = &x(2, 0) * &x(2, 1);
        let q = p.remap(3, &[0, 2]);
        assert_eq!(q, &x(3, 0) * &x(3, 2));
    }
}
