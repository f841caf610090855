use std::fmt;

use num_bigint::BigInt;
use num_traits::One;

use crate::AlgebraError;

/// Nonnegative multi-index. Also used as a monomial exponent vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn new(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        MultiIndex(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.len(), other.len());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self - other` when `other <= self` coordinatewise.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        if self.len() != other.len() {
            return None;
        }
        let mut out = Vec::with_capacity(self.len());
        for (a, b) in self.0.iter().zip(&other.0) {
            out.push(a.checked_sub(*b)?);
        }
        Some(MultiIndex(out))
    }

    /// Coordinatewise `self <= other`.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.len() == other.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn factorial(&self) -> BigInt {
        let mut f = BigInt::one();
        for &a in &self.0 {
            for k in 2..=a {
                f *= k;
            }
        }
        f
    }

    pub fn concat(&self, other: &MultiIndex) -> MultiIndex {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        MultiIndex(v)
    }

    pub fn slice(&self, from: usize, to: usize) -> MultiIndex {
        MultiIndex(self.0[from..to].to_vec())
    }

    /// All indices in `n` variables with total degree `<= d`, graded then lexicographic.
    pub fn all_up_to(n: usize, d: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for deg in 0..=d {
            out.extend(Self::all_of_degree(n, deg));
        }
        out
    }

    pub fn all_of_degree(n: usize, d: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        if n == 0 {
            if d == 0 {
                out.push(MultiIndex(vec![]));
            }
            return out;
        }
        let mut cur = vec![0u32; n];
        fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            let n = cur.len();
            if i == n - 1 {
                cur[i] = left;
                out.push(MultiIndex(cur.clone()));
                return;
            }
            for a in (0..=left).rev() {
                cur[i] = a;
                rec(i + 1, left - a, cur, out);
            }
        }
        rec(0, d, &mut cur, &mut out);
        out
    }

    /// Box enumeration `{0..=m}^n`.
    pub fn all_in_box(n: usize, m: u32) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex(vec![])];
        for _ in 0..n {
            let mut next = Vec::with_capacity(out.len() * (m as usize + 1));
            for p in &out {
                for a in 0..=m {
                    let mut v = p.0.clone();
                    v.push(a);
                    next.push(MultiIndex(v));
                }
            }
            out = next;
        }
        out
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PowerClass {
    /// Degree nonzero in exactly this parameter (0-based).
    Pure(usize),
    NonPure,
    Zero,
}

/// ν-parameter dilations on ℝ^N: one nonzero exponent vector per t-coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DilationSpec {
    e: Vec<Vec<u32>>,
}

impl DilationSpec {
    pub fn new(e: Vec<Vec<u32>>) -> Result<Self, AlgebraError> {
        if e.is_empty() {
            return Err(AlgebraError::Dilation("N must be at least 1".into()));
        }
        let nu = e[0].len();
        if nu == 0 {
            return Err(AlgebraError::Dilation("nu must be at least 1".into()));
        }
        for (j, ej) in e.iter().enumerate() {
            if ej.len() != nu {
                return Err(AlgebraError::Dilation(format!("e_{} has {} entries, expected {nu}", j + 1, ej.len())));
            }
            if ej.iter().all(|&a| a == 0) {
                return Err(AlgebraError::Dilation(format!("e_{} is zero", j + 1)));
            }
        }
        Ok(DilationSpec { e })
    }

    /// Standard one-parameter-per-coordinate dilations: e_j = unit vector j.
    pub fn standard(n: usize) -> Self {
        DilationSpec { e: (0..n).map(|j| MultiIndex::unit(n, j).0).collect() }
    }

    /// Single-parameter isotropic dilations on ℝ^N.
    pub fn isotropic(n: usize) -> Self {
        DilationSpec { e: vec![vec![1]; n] }
    }

    pub fn n_t(&self) -> usize {
        self.e.len()
    }

    pub fn nu(&self) -> usize {
        self.e[0].len()
    }

    pub fn exponents(&self) -> &[Vec<u32>] {
        &self.e
    }

    pub fn deg(&self, alpha: &MultiIndex) -> Result<Vec<u32>, AlgebraError> {
        if alpha.len() != self.n_t() {
            return Err(AlgebraError::Dimension { expected: self.n_t(), got: alpha.len() });
        }
        let mut d = vec![0u32; self.nu()];
        for (a, ej) in alpha.0.iter().zip(&self.e) {
            for (dm, em) in d.iter_mut().zip(ej) {
                *dm += a * em;
            }
        }
        Ok(d)
    }

    pub fn classify_power(&self, alpha: &MultiIndex) -> Result<PowerClass, AlgebraError> {
        let d = self.deg(alpha)?;
        let nz: Vec<usize> = d.iter().enumerate().filter(|(_, &x)| x != 0).map(|(i, _)| i).collect();
        Ok(match nz.len() {
            0 => PowerClass::Zero,
            1 => PowerClass::Pure(nz[0]),
            _ => PowerClass::NonPure,
        })
    }

    /// δt = (δ^{e_1} t_1, …, δ^{e_N} t_N) for δ ∈ [0,∞)^ν.
    pub fn scale(&self, delta: &[f64], t: &[f64]) -> Vec<f64> {
        self.e
            .iter()
            .zip(t)
            .map(|(ej, tj)| {
                let mut f = 1.0;
                for (dm, em) in delta.iter().zip(ej) {
                    f *= dm.powi(*em as i32);
                }
                f * tj
            })
            .collect()
    }

    /// Block-diagonal concatenation for products ℝ^{N₁}×ℝ^{N₂} with ν₁+ν₂ parameters.
    pub fn concat(&self, other: &DilationSpec) -> DilationSpec {
        let (nu1, nu2) = (self.nu(), other.nu());
        let mut e = Vec::new();
        for ej in &self.e {
            let mut v = ej.clone();
            v.extend(std::iter::repeat(0).take(nu2));
            e.push(v);
        }
        for ej in &other.e {
            let mut v = vec![0; nu1];
            v.extend_from_slice(ej);
            e.push(v);
        }
        DilationSpec { e }
    }

    /// Homogeneous dimension of parameter group μ: Σ_j e_j^μ.
    pub fn homogeneous_dim(&self, mu: usize) -> u32 {
        self.e.iter().map(|ej| ej[mu]).sum()
    }

    /// Coordinates t_j with e_j^μ ≠ 0.
    pub fn group(&self, mu: usize) -> Vec<usize> {
        (0..self.n_t()).filter(|&j| self.e[j][mu] != 0).collect()
    }
}

impl fmt::Display for DilationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.e.iter().map(|ej| MultiIndex(ej.clone()).to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex(v.to_vec())
    }

    #[test]
    fn deg_examples() {
        let e = DilationSpec::new(vec![vec![1, 0], vec![0, 1]]).unwrap();
        assert_eq!(e.deg(&mi(&[1, 1])).unwrap(), vec![1, 1]);
        assert_eq!(e.deg(&mi(&[0, 0])).unwrap(), vec![0, 0]);
        let e3 = DilationSpec::new(vec![vec![1, 0], vec![0, 1], vec![1, 1]]).unwrap();
        assert_eq!(e3.deg(&mi(&[2, 0, 1])).unwrap(), vec![3, 1]);
        assert!(matches!(e.deg(&mi(&[1])), Err(AlgebraError::Dimension { .. })));
    }

    #[test]
    fn classify_examples() {
        let e = DilationSpec::new(vec![vec![1, 0], vec![0, 1]]).unwrap();
        assert_eq!(e.classify_power(&mi(&[1, 1])).unwrap(), PowerClass::NonPure);
        assert_eq!(e.classify_power(&mi(&[0, 3])).unwrap(), PowerClass::Pure(1));
        assert_eq!(e.classify_power(&mi(&[0, 0])).unwrap(), PowerClass::Zero);
        let one = DilationSpec::isotropic(2);
        for a in MultiIndex::all_up_to(2, 4).into_iter().filter(|a| !a.is_zero()) {
            assert_eq!(one.classify_power(&a).unwrap(), PowerClass::Pure(0));
        }
    }

    #[test]
    fn invalid_specs() {
        assert!(DilationSpec::new(vec![]).is_err());
        assert!(DilationSpec::new(vec![vec![0, 0]]).is_err());
        assert!(DilationSpec::new(vec![vec![1], vec![1, 0]]).is_err());
    }

    #[test]
    fn enumeration_counts() {
        // C(n+d, d)
        assert_eq!(MultiIndex::all_up_to(2, 3).len(), 10);
        assert_eq!(MultiIndex::all_up_to(3, 2).len(), 10);
        assert_eq!(MultiIndex::all_in_box(2, 2).len(), 9);
        assert_eq!(mi(&[2, 3]).factorial(), BigInt::from(12));
    }

    #[test]
    fn concat_and_scale() {
        let a = DilationSpec::isotropic(1);
        let b = DilationSpec::standard(2);
        let c = a.concat(&b);
        assert_eq!(c.exponents(), &[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        let s = c.scale(&[0.5, 0.25, 1.0], &[1.0, 1.0, 1.0]);
        assert_eq!(s, vec![0.5, 0.25, 1.0]);
        assert_eq!(c.group(1), vec![1]);
        assert_eq!(c.homogeneous_dim(0), 1);
    }
}
