use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use radon_algebra::{DilationSpec, MultiIndex};

use crate::KernelError;

/// Polynomial Σ c_m u^m restricted to (−1, 1), zero outside.
#[derive(Clone, Debug, PartialEq)]
pub struct Factor {
    c: Vec<f64>,
}

impl Factor {
    pub fn new(c: Vec<f64>) -> Self {
        Factor { c }
    }

    /// (1 − u²)^k.
    pub fn profile(k: u32) -> Self {
        let mut c = vec![0.0; 2 * k as usize + 1];
        let mut b = 1.0;
        for i in 0..=k as usize {
            c[2 * i] = if i % 2 == 0 { b } else { -b };
            b = b * (k as usize - i) as f64 / (i + 1) as f64;
        }
        Factor { c }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn times(&self, p: &[f64]) -> Self {
        if p.is_empty() || self.c.is_empty() {
            return Factor { c: Vec::new() };
        }
        let mut c = vec![0.0; self.c.len() + p.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in p.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Factor { c }
    }

    pub fn deriv(&self) -> Self {
        Factor { c: self.c.iter().enumerate().skip(1).map(|(m, a)| m as f64 * a).collect() }
    }

    pub fn eval(&self, u: f64) -> f64 {
        if u.abs() >= 1.0 {
            return 0.0;
        }
        self.c.iter().rev().fold(0.0, |acc, a| acc * u + a)
    }

    /// Exact ∫_{−1}^{1}.
    pub fn integral(&self) -> f64 {
        self.c.iter().enumerate().filter(|(m, _)| m % 2 == 0).map(|(m, a)| 2.0 * a / (m + 1) as f64).sum()
    }
}

/// ς(t) = Σ_k w_k Π_i f_{k,i}(t_i / r_i), supported in the box |t_i| < r_i.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorBump {
    pub radius: Vec<f64>,
    pub terms: Vec<(f64, Vec<Factor>)>,
}

impl TensorBump {
    pub fn n(&self) -> usize {
        self.radius.len()
    }

    pub fn eval(&self, t: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(w, fs)| w * fs.iter().zip(t).zip(&self.radius).map(|((f, ti), r)| f.eval(ti / r)).product::<f64>())
            .sum()
    }

    /// ∂^β ς(t).
    pub fn eval_deriv(&self, t: &[f64], beta: &[u32]) -> f64 {
        self.terms
            .iter()
            .map(|(w, fs)| {
                let mut p = *w;
                for i in 0..t.len() {
                    let mut f = fs[i].clone();
                    for _ in 0..beta[i] {
                        f = f.deriv();
                    }
                    p *= f.eval(t[i] / self.radius[i]) / self.radius[i].powi(beta[i] as i32);
                }
                p
            })
            .sum()
    }

    pub fn integral(&self) -> f64 {
        self.terms
            .iter()
            .map(|(w, fs)| w * fs.iter().zip(&self.radius).map(|(f, r)| r * f.integral()).product::<f64>())
            .sum()
    }

    /// 2^{Σ_i j·e_i} ς(2^{j·e_1} t_1, …, 2^{j·e_N} t_N).
    pub fn eval_dilated(&self, t: &[f64], j: &[u32], e: &DilationSpec) -> f64 {
        let s = axis_scales(j, e);
        let u: Vec<f64> = t.iter().zip(&s).map(|(ti, si)| ti * si).collect();
        s.iter().product::<f64>() * self.eval(&u)
    }

    /// ς − φ_G ⊗ ∫ς dt_G / ∫φ_G with φ the plain profile on the axes of G.
    fn project_out(&self, group: &[usize], phi: &Factor) -> TensorBump {
        let phi_int = phi.integral();
        let mut terms = self.terms.clone();
        for (w, fs) in &self.terms {
            let m: f64 = group.iter().map(|&i| fs[i].integral()).product();
            if m == 0.0 {
                continue;
            }
            let mut g = fs.clone();
            for &i in group {
                g[i] = phi.clone();
            }
            terms.push((-w * m / phi_int.powi(group.len() as i32), g));
        }
        TensorBump { radius: self.radius.clone(), terms }
    }
}

/// Per-axis factors 2^{j·e_i}.
pub(crate) fn axis_scales(j: &[u32], e: &DilationSpec) -> Vec<f64> {
    e.exponents().iter().map(|ei| 2f64.powi(ei.iter().zip(j).map(|(a, b)| a * b).sum::<u32>() as i32)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    /// (1 − u²)^k (1 + u²) on every axis.
    Even,
    /// u (1 − u²)^k on every axis.
    Odd,
    /// (1 − u²)^k times a cubic with seeded coefficients, drawn per member.
    Random { seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BumpParams {
    pub k: u32,
    /// Support radius: ς_j vanishes outside B^N(a).
    pub a: f64,
    pub profile: Profile,
}

impl Default for BumpParams {
    fn default() -> Self {
        BumpParams { k: 6, a: 1.0, profile: Profile::Odd }
    }
}

/// Sampled sup of |∂^β ς_j| over the family, for every |β| ≤ order.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyBound {
    pub order: u32,
    pub value: f64,
    pub samples_per_axis: usize,
}

#[derive(Clone, Debug)]
pub struct BumpFamily {
    pub params: BumpParams,
    pub e: DilationSpec,
    pub jmax: u32,
    pub members: BTreeMap<Vec<u32>, TensorBump>,
    pub bound: FamilyBound,
}

/// {ς_j : |j|∞ ≤ J} with ∫ ς_j dt_μ = 0 whenever j_μ ≠ 0, t_μ the coordinates
/// of parameter group μ.
pub fn make_bump_family(params: BumpParams, jmax: u32, e: &DilationSpec) -> Result<BumpFamily, KernelError> {
    if !(params.a > 0.0) {
        return Err(KernelError::Params(format!("support radius must be positive, got {}", params.a)));
    }
    let n = e.n_t();
    let nu = e.nu();
    let r = params.a / (n as f64).sqrt();
    let phi = Factor::profile(params.k);
    let mut rng = match params.profile {
        Profile::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    let mut members = BTreeMap::new();
    for j in MultiIndex::all_in_box(nu, jmax) {
        let factors: Vec<Factor> = (0..n)
            .map(|_| match (params.profile, rng.as_mut()) {
                (Profile::Even, _) => phi.times(&[1.0, 0.0, 1.0]),
                (Profile::Odd, _) => phi.times(&[0.0, 1.0]),
                (Profile::Random { .. }, Some(g)) => {
                    let c0 = g.gen_range(0.5..1.0);
                    let rest: Vec<f64> = (0..3).map(|_| g.gen_range(-1.0..1.0)).collect();
                    phi.times(&[c0, rest[0], rest[1], rest[2]])
                }
                _ => unreachable!(),
            })
            .collect();
        let mut b = TensorBump { radius: vec![r; n], terms: vec![(1.0, factors)] };
        for mu in 0..nu {
            if j.0[mu] != 0 {
                b = b.project_out(&e.group(mu), &phi);
            }
        }
        members.insert(j.0, b);
    }
    let bound = family_bound(&members, n, 4, 17);
    Ok(BumpFamily { params, e: e.clone(), jmax, members, bound })
}

fn family_bound(members: &BTreeMap<Vec<u32>, TensorBump>, n: usize, order: u32, m: usize) -> FamilyBound {
    let betas = MultiIndex::all_up_to(n, order);
    let mut value: f64 = 0.0;
    for b in members.values() {
        let mut idx = vec![0usize; n];
        loop {
            let t: Vec<f64> = idx.iter().zip(&b.radius).map(|(&k, r)| r * (-1.0 + 2.0 * (k as f64 + 0.5) / m as f64)).collect();
            for beta in &betas {
                value = value.max(b.eval_deriv(&t, &beta.0).abs());
            }
            if !odometer(&mut idx, m) {
                break;
            }
        }
    }
    FamilyBound { order, value, samples_per_axis: m }
}

pub(crate) fn odometer(idx: &mut [usize], m: usize) -> bool {
    for k in idx.iter_mut().rev() {
        *k += 1;
        if *k < m {
            return true;
        }
        *k = 0;
    }
    false
}

impl BumpFamily {
    pub fn n(&self) -> usize {
        self.e.n_t()
    }

    pub fn member(&self, j: &[u32]) -> Option<&TensorBump> {
        self.members.get(j)
    }

    /// Largest |∫ ς_j dt_μ| over members with j_μ ≠ 0, by composite trapezoid
    /// quadrature over group μ with `m` cells per axis, sampled at a fixed
    /// set of points in the remaining coordinates.
    pub fn cancellation_residual(&self, m: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, b) in &self.members {
            for mu in 0..self.e.nu() {
                if j[mu] == 0 {
                    continue;
                }
                let group = self.e.group(mu);
                let rest: Vec<usize> = (0..self.n()).filter(|i| !group.contains(i)).collect();
                for probe in [0.13, -0.41, 0.77] {
                    let mut t = vec![0.0; self.n()];
                    for &i in &rest {
                        t[i] = probe * b.radius[i];
                    }
                    worst = worst.max(trapezoid(b, &group, &mut t, m).abs());
                }
            }
        }
        worst
    }
}

fn trapezoid(b: &TensorBump, group: &[usize], t: &mut [f64], m: usize) -> f64 {
    let mut idx = vec![0usize; group.len()];
    let mut acc = 0.0;
    loop {
        let mut w = 1.0;
        for (g, &k) in group.iter().zip(&idx) {
            let h = 2.0 * b.radius[*g] / m as f64;
            t[*g] = -b.radius[*g] + k as f64 * h;
            w *= if k == 0 || k == m { 0.5 * h } else { h };
        }
        acc += w * b.eval(t);
        if !odometer(&mut idx, m + 1) {
            break;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_expansion() {
        let f = Factor::profile(3);
        for u in [-0.9, -0.2, 0.0, 0.5] {
            let want: f64 = (1.0 - u * u as f64).powi(3);
            assert!((f.eval(u) - want).abs() < 1e-14);
        }
        assert_eq!(f.eval(1.0), 0.0);
        // ∫(1−u²)³ = 32/35
        assert!((f.integral() - 32.0 / 35.0).abs() < 1e-14);
    }

    #[test]
    fn derivative_of_factor() {
        let f = Factor::new(vec![1.0, 2.0, 3.0]);
        assert_eq!(f.deriv().coeffs(), &[2.0, 6.0]);
    }
}
