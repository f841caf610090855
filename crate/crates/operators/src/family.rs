use num_bigint::BigInt;
use num_traits::{One, Zero};
use radon_algebra::{DilationSpec, JetSeries, MultiIndex, Poly, TruncationPolicy, Q};
use radon_lie::{lie_bracket, lie_closure, BracketWord, Flavor, VectorField, WeightedField};
use radon_prep::{finite_generate, taylor_prepare};
use radon_surface::{gamma_to_w, Surface, WField};

use crate::OperatorError;

/// A scale j ∈ (ℕ ∪ {∞})^ν; `None` is ∞, read as 2^{−∞} = 0.
pub type Scale = Vec<Option<u32>>;

/// (X_l, d_l), l = 1..q, the first r of pure degree, with coefficients
/// c_l(t, s, x) as polynomials in (t, s, x) ∈ ℝ^N × ℝ^N × ℝ^n.
#[derive(Clone, Debug)]
pub struct DyadicFamilySpec {
    pub fields: Vec<WeightedField>,
    pub r: usize,
    /// α_l ∈ ℕ^N for l ≤ r.
    pub alphas: Vec<MultiIndex>,
    pub coeffs: Vec<Poly>,
    /// Dimension of the x space.
    pub nx: usize,
    /// Dilations of ℝ^N with ν parameters.
    pub dilations: DilationSpec,
    pub policy: TruncationPolicy,
    /// W was x-saturated; identities hold in the truncation window.
    pub saturated: bool,
}

fn pow2(j: Option<u32>, e: u32) -> Q {
    if e == 0 {
        return Q::one();
    }
    match j {
        None => Q::zero(),
        Some(j) => Q::new(BigInt::one(), BigInt::one() << (j * e) as usize),
    }
}

/// Π_μ 2^{−j_μ d_μ}.
fn dyadic_factor(j: &Scale, d: &[u32]) -> Q {
    j.iter().zip(d).map(|(&jm, &dm)| pow2(jm, dm)).fold(Q::one(), |a, b| a * b)
}

impl DyadicFamilySpec {
    pub fn nt(&self) -> usize {
        self.dilations.n_t()
    }

    pub fn nu(&self) -> usize {
        self.dilations.nu()
    }

    pub fn n(&self) -> usize {
        self.nx
    }

    pub fn q(&self) -> usize {
        self.fields.len()
    }

    /// Coefficient of t^{b1} s^{b2} in c_k as an x-polynomial.
    pub fn coeff_at(&self, k: usize, b1: &MultiIndex, b2: &MultiIndex) -> Poly {
        let nt = self.nt();
        let c = &self.coeffs[k];
        let nx = c.nvars() - 2 * nt;
        Poly::from_terms(
            nx,
            c.terms()
                .iter()
                .filter(|(m, _)| m.0[..nt] == b1.0[..] && m.0[nt..2 * nt] == b2.0[..])
                .map(|(m, v)| (m.slice(2 * nt, 2 * nt + nx), v.clone())),
        )
    }

    /// Structural checks plus the nonvanishing and Kronecker conditions on the c_l.
    pub fn validate(&self) -> Result<(), OperatorError> {
        let bad = |s: String| Err(OperatorError::Spec(s));
        let (nt, nu, q, r) = (self.nt(), self.nu(), self.q(), self.r);
        if self.coeffs.len() != q || self.alphas.len() != r || r > q {
            return bad(format!("{q} fields, {} coefficients, {} multi-indices, r = {r}", self.coeffs.len(), self.alphas.len()));
        }
        let n = self.n();
        for (l, w) in self.fields.iter().enumerate() {
            if w.nu() != nu || w.n() != n || w.field.npar() != 0 {
                return bad(format!("field {} has the wrong shape", l + 1));
            }
            if self.coeffs[l].nvars() != 2 * nt + n {
                return bad(format!("c_{} is not a function of (t, s, x)", l + 1));
            }
            if self.coeffs[l].terms().keys().any(|m| m.0[..2 * nt].iter().all(|&a| a == 0)) {
                return bad(format!("c_{}(0, 0, x) is not zero", l + 1));
            }
        }
        for l in 0..r {
            if w_nonzero(self.fields[l].degree()) != 1 {
                return bad(format!("d_{} = {:?} is not pure", l + 1, self.fields[l].degree()));
            }
            if self.alphas[l].len() != nt || self.alphas[l].is_zero() {
                return bad(format!("α_{} must be a nonzero element of N^{nt}", l + 1));
            }
            let z = MultiIndex::zero(nt);
            if self.coeff_at(l, &z, &self.alphas[l]) != Poly::one(n) {
                return bad(format!("s^α_{} coefficient of c_{} is not 1", l + 1, l + 1));
            }
        }
        for l in 0..r {
            let al = &self.alphas[l];
            for b2 in MultiIndex::all_in_box(nt, al.0.iter().copied().max().unwrap_or(0)) {
                let Some(b1) = al.checked_sub(&b2) else { continue };
                for k in 0..q {
                    if k == l && b1.is_zero() && b2 == *al {
                        continue;
                    }
                    if !self.coeff_at(k, &b1, &b2).is_zero() {
                        return bad(format!("t^{b1} s^{b2} coefficient of c_{} must vanish (l = {})", k + 1, l + 1));
                    }
                }
            }
        }
        for l in r..q {
            let w = &self.fields[l];
            if !w.word.is_left_normed() || w.word.leaves().iter().any(|&i| i >= r) || matches!(w.word, BracketWord::Leaf(_)) {
                return bad(format!("field {} is not a bracket of the first r", l + 1));
            }
            if evaluate_word(&w.word, &self.fields[..r])?.field != w.field {
                return bad(format!("field {} does not match its bracket word {}", l + 1, w.word));
            }
        }
        Ok(())
    }
}

fn w_nonzero(d: &[u32]) -> usize {
    d.iter().filter(|&&x| x != 0).count()
}

fn evaluate_word(word: &BracketWord, base: &[WeightedField]) -> Result<WeightedField, OperatorError> {
    match word {
        BracketWord::Leaf(i) => Ok(base[*i].clone()),
        BracketWord::Bracket(a, b) => Ok(lie_bracket(&evaluate_word(a, base)?, &evaluate_word(b, base)?)?),
    }
}

/// W_j(t, x) = Σ_l c_l(2^{−j} t, t, x) 2^{−j·d_l} X_l.
pub fn build_wj(spec: &DyadicFamilySpec, j: &Scale) -> Result<WField, OperatorError> {
    let (nt, n) = (spec.nt(), spec.n());
    if j.len() != spec.nu() {
        return Err(OperatorError::Dimension(format!("scale has {} entries, nu = {}", j.len(), spec.nu())));
    }
    let lambda: Vec<Q> = spec.dilations.exponents().iter().map(|ei| dyadic_factor(j, ei)).collect();
    let nv = nt + n;
    let mut comps = vec![Poly::zero(nv); n];
    for (l, w) in spec.fields.iter().enumerate() {
        let f = dyadic_factor(j, w.degree());
        if f.is_zero() || spec.coeffs[l].is_zero() {
            continue;
        }
        let c = Poly::from_terms(
            nv,
            spec.coeffs[l].terms().iter().filter_map(|(m, v)| {
                let mut scale = v * &f;
                let mut e = vec![0u32; nv];
                for i in 0..nt {
                    if m.0[i] > 0 {
                        scale *= num_traits::pow(lambda[i].clone(), m.0[i] as usize);
                    }
                    e[i] = m.0[i] + m.0[nt + i];
                }
                e[nt..].copy_from_slice(&m.0[2 * nt..]);
                (!scale.is_zero()).then(|| (MultiIndex(e), scale))
            }),
        );
        for (i, xi) in w.field.comps().iter().enumerate() {
            let lifted = xi.remap(nv, &(nt..nv).collect::<Vec<_>>());
            comps[i] = &comps[i] + &(&c * &lifted);
        }
    }
    let s = JetSeries::new(nt, n, spec.policy, comps)?;
    let sat = s.is_saturated() || spec.saturated;
    Ok(WField::new(s.with_saturation(sat), spec.dilations.clone())?)
}

/// (1/α_l!) ∂_t^{α_l} W_j |_{t=0} = 2^{−j·d_l} X_l for every l ≤ r, exactly.
pub fn wj_taylor_identity(spec: &DyadicFamilySpec, j: &Scale) -> Result<bool, OperatorError> {
    let w = build_wj(spec, j)?;
    Ok((0..spec.r).all(|l| {
        let f = dyadic_factor(j, spec.fields[l].degree());
        let got = w.w.t_coeff(&spec.alphas[l]);
        let want: Vec<Poly> = spec.fields[l].field.comps().iter().map(|p| p.scale(&f)).collect();
        got == want
    }))
}

#[derive(Clone, Debug)]
pub struct PipelineOptions {
    /// |d|₁ cutoff for the L₀ extension of the prepared fields.
    pub cutoff: u32,
    /// Proceed when W is x-saturated (identities then hold in the window only).
    pub allow_saturated: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions { cutoff: 4, allow_saturated: false }
    }
}

/// Preparation of W, c_l(t,s,x) = c_{α_l}(t,x) s^{α_l} with d_l = (0, ê_l) in
/// the ν = N + r grading, then the L₀ extension of the list.
pub fn reduce_maximal_pipeline(g: &Surface, opts: &PipelineOptions) -> Result<DyadicFamilySpec, OperatorError> {
    let w = gamma_to_w(g)?;
    if w.is_saturated() && !opts.allow_saturated {
        return Err(OperatorError::Saturated("W is x-saturated at the configured truncation".into()));
    }
    let prep = taylor_prepare(&w.w)?;
    if prep.saturated && !opts.allow_saturated {
        return Err(OperatorError::Saturated("preparation of W is x-saturated".into()));
    }
    let (nt, n) = (g.nt(), g.n());
    let r = prep.terms.len();
    let nu = nt + r;
    let dilations = DilationSpec::new((0..nt).map(|i| MultiIndex::unit(nu, i).0).collect())?;
    let mut base = Vec::new();
    let mut coeffs = Vec::new();
    let mut alphas = Vec::new();
    let tmap: Vec<usize> = (0..nt).chain(2 * nt..2 * nt + n).collect();
    for (l, term) in prep.terms.iter().enumerate() {
        let prec = w.w.x_precision_at(&term.alpha).filter(|_| w.is_saturated()).map(|p| p as i32);
        let field = VectorField::with_params(0, n, term.f_alpha.clone(), prec)?;
        base.push(WeightedField::leaf(field, MultiIndex::unit(nu, nt + l).0, l)?);
        let s_alpha = MultiIndex(vec![0; nt]).concat(&term.alpha).concat(&MultiIndex::zero(n));
        coeffs.push(term.c.comp(0).remap(2 * nt + n, &tmap).mul_monomial(&s_alpha, &Q::one()));
        alphas.push(term.alpha.clone());
    }
    let mut fields = base.clone();
    if !base.is_empty() {
        let closure = lie_closure(&base, opts.cutoff.max(1), Flavor::LeftNormed)?;
        let fg = finite_generate(&closure.elements, None)?;
        for &i in &fg.selected {
            let e = &closure.elements[i];
            if !matches!(e.word, BracketWord::Leaf(_)) {
                fields.push(e.clone());
                coeffs.push(Poly::zero(2 * nt + n));
            }
        }
    }
    let spec = DyadicFamilySpec { fields, r, alphas, coeffs, nx: n, dilations, policy: w.w.policy(), saturated: w.is_saturated() };
    spec.validate()?;
    Ok(spec)
}

/// j ↦ (j, (j·α_1, …, j·α_r)): the scale of the extended family reproducing γ_{2^{−j}t}.
pub fn embed_scale(spec: &DyadicFamilySpec, j: &[u32]) -> Scale {
    let mut s: Scale = j.iter().map(|&x| Some(x)).collect();
    s.extend(spec.alphas.iter().map(|a| Some(a.0.iter().zip(j).map(|(x, y)| x * y).sum())));
    s
}
