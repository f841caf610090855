use std::collections::BTreeMap;

use radon_algebra::{CompiledPoly, DilationSpec, JetSeries, MultiIndex, Poly, PowerClass, TruncationPolicy, Window};
use radon_geometry::w_taylor_fields;
use radon_lie::{bch_log, exp_map, VectorField, WeightedField, BCH_MAX_ORDER};

use crate::SurfaceError;

/// α ↦ (X_α, deg α).
pub type FieldMap = BTreeMap<MultiIndex, WeightedField>;

#[derive(Clone, Debug)]
pub enum SurfaceForm {
    /// γ(t, x) as a map with γ(0, x) = x.
    Series(JetSeries),
    /// γ_t(x) = exp(Σ t^α X_α)x.
    Exponential(FieldMap),
}

#[derive(Clone, Debug)]
pub struct Surface {
    pub form: SurfaceForm,
    pub dilations: DilationSpec,
    pub policy: TruncationPolicy,
    n: usize,
}

impl Surface {
    pub fn from_series(gamma: JetSeries, dilations: DilationSpec) -> Result<Self, SurfaceError> {
        if gamma.nt() != dilations.n_t() {
            return Err(SurfaceError::Precondition(format!(
                "gamma has {} t-variables, dilations have {}",
                gamma.nt(),
                dilations.n_t()
            )));
        }
        gamma.check_identity_at_zero()?;
        Ok(Surface { n: gamma.nx(), policy: gamma.policy(), form: SurfaceForm::Series(gamma), dilations })
    }

    pub fn from_fields(n: usize, fields: FieldMap, dilations: DilationSpec, policy: TruncationPolicy) -> Result<Self, SurfaceError> {
        for (a, w) in &fields {
            if a.is_zero() {
                return Err(SurfaceError::Precondition("exponential form with alpha = 0".into()));
            }
            if w.n() != n || w.field.npar() != 0 {
                return Err(SurfaceError::Precondition(format!("field at {a} is not a field on R^{n}")));
            }
            if w.degree() != dilations.deg(a)?.as_slice() {
                return Err(SurfaceError::Precondition(format!("field at {a} carries degree {:?}", w.degree())));
            }
        }
        Ok(Surface { form: SurfaceForm::Exponential(fields), dilations, policy, n })
    }

    /// Exponential form from plain fields; degrees come from the dilations.
    pub fn from_plain_fields(
        n: usize,
        fields: BTreeMap<MultiIndex, VectorField>,
        dilations: DilationSpec,
        policy: TruncationPolicy,
    ) -> Result<Self, SurfaceError> {
        let mut m = FieldMap::new();
        for (a, f) in fields {
            let d = dilations.deg(&a)?;
            m.insert(a, WeightedField::new(f, d)?);
        }
        Self::from_fields(n, m, dilations, policy)
    }

    pub fn identity(n: usize, dilations: DilationSpec, policy: TruncationPolicy) -> Self {
        Surface { form: SurfaceForm::Exponential(FieldMap::new()), dilations, policy, n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nt(&self) -> usize {
        self.dilations.n_t()
    }

    pub fn nu(&self) -> usize {
        self.dilations.nu()
    }

    /// γ as a series map.
    pub fn series(&self) -> JetSeries {
        match &self.form {
            SurfaceForm::Series(s) => s.clone(),
            SurfaceForm::Exponential(m) => exp_map(&param_field(self.nt(), self.n, m), self.policy),
        }
    }
}

/// Σ t^α X_α as a field with N parameters.
pub fn param_field(nt: usize, n: usize, m: &FieldMap) -> VectorField {
    let plain: BTreeMap<MultiIndex, VectorField> = m.iter().map(|(a, w)| (a.clone(), w.field.clone())).collect();
    VectorField::from_t_coefficients(nt, n, &plain)
}

fn fields_of(v: &VectorField, series: &JetSeries, dil: &DilationSpec) -> Result<FieldMap, SurfaceError> {
    let mut out = FieldMap::new();
    for (a, f) in v.t_coefficients() {
        let prec = match (series.x_precision_at(&a).map(|p| p as i32), v.prec()) {
            (Some(p), Some(q)) => Some(p.min(q)),
            (p, q) => p.or(q),
        };
        let d = dil.deg(&a)?;
        out.insert(a, WeightedField::new(f.with_prec(prec), d)?);
    }
    Ok(out)
}

/// W(t, x) with its Taylor fields (X̂_α, deg α).
#[derive(Clone, Debug)]
pub struct WField {
    pub w: JetSeries,
    pub dilations: DilationSpec,
}

impl WField {
    pub fn new(w: JetSeries, dilations: DilationSpec) -> Result<Self, SurfaceError> {
        if !w.vanishes_at_t0() {
            return Err(SurfaceError::Precondition("W(0, x) is not zero".into()));
        }
        if w.nt() != dilations.n_t() || w.arity() != w.nx() {
            return Err(SurfaceError::Precondition("W must be an R^n-valued series with one t per dilation exponent".into()));
        }
        Ok(WField { w, dilations })
    }

    pub fn taylor(&self) -> Result<FieldMap, SurfaceError> {
        Ok(w_taylor_fields(&self.w, &self.dilations)?.into_iter().collect())
    }

    pub fn is_saturated(&self) -> bool {
        self.w.is_saturated()
    }
}

/// W = (E_t γ)∘γ⁻¹, the ε-derivative at ε = 1 of γ_{εt}∘γ_t⁻¹.
pub fn gamma_to_w(g: &Surface) -> Result<WField, SurfaceError> {
    let s = g.series();
    let w = s.euler_t().compose(&s.invert()?)?;
    WField::new(w, g.dilations.clone())
}

/// Solves E_t γ = W(t, γ) order by order in t with γ(0, x) = x.
pub fn w_to_gamma(w: &WField) -> Result<Surface, SurfaceError> {
    let wf = &w.w;
    if !wf.vanishes_at_t0() {
        return Err(SurfaceError::Precondition("W(0, x) is not zero".into()));
    }
    let id = JetSeries::identity_map(wf.nt(), wf.nx(), wf.policy());
    let mut g = id.clone();
    for _ in 0..wf.policy().lt {
        let rhs = wf.compose(&g)?;
        let lift = rhs.inverse_euler_t().ok_or_else(|| SurfaceError::Internal("t-free term in W(t, gamma)".into()))?;
        let next = id.add(&lift)?;
        if next == g {
            break;
        }
        g = next;
    }
    let sat = g.is_saturated() || wf.is_saturated();
    Surface::from_series(g.with_saturation(sat), w.dilations.clone())
}

#[derive(Clone, Debug)]
pub struct NumericFlow {
    /// Start of the integration in ε; the series solution supplies ω(ε₀).
    pub eps0: f64,
    pub steps: usize,
}

impl Default for NumericFlow {
    fn default() -> Self {
        NumericFlow { eps0: 0.05, steps: 400 }
    }
}

/// γ_t(x) by RK4 on dω/dε = W(εt, ω)/ε from ε₀ to 1.
pub fn w_to_gamma_numeric(w: &WField, t: &[f64], x: &[f64], p: &NumericFlow) -> Result<Vec<f64>, SurfaceError> {
    NumericFlowMap::new(w, p.clone())?.eval(t, x)
}

/// Compiled W and series bootstrap, reusable across many (t, x).
#[derive(Clone, Debug)]
pub struct NumericFlowMap {
    w: Vec<CompiledPoly>,
    boot: Vec<CompiledPoly>,
    nt: usize,
    n: usize,
    p: NumericFlow,
}

impl NumericFlowMap {
    pub fn new(w: &WField, p: NumericFlow) -> Result<Self, SurfaceError> {
        if !(p.eps0 > 0.0 && p.eps0 < 1.0) || p.steps == 0 {
            return Err(SurfaceError::Precondition("need 0 < eps0 < 1 and steps > 0".into()));
        }
        let boot = w_to_gamma(w)?.series().compile();
        Ok(NumericFlowMap { w: w.w.compile(), boot, nt: w.w.nt(), n: w.w.nx(), p })
    }

    pub fn eval(&self, t: &[f64], x: &[f64]) -> Result<Vec<f64>, SurfaceError> {
        if t.len() != self.nt || x.len() != self.n {
            return Err(SurfaceError::Precondition("point has the wrong dimension".into()));
        }
        let mut v = Vec::with_capacity(self.nt + self.n);
        let mut at = |e: f64, om: &[f64], comps: &[CompiledPoly], scale: f64| -> Vec<f64> {
            v.clear();
            v.extend(t.iter().map(|ti| ti * e));
            v.extend_from_slice(om);
            comps.iter().map(|c| c.eval(&v) * scale).collect()
        };
        let mut omega = at(self.p.eps0, x, &self.boot, 1.0);
        let h = (1.0 - self.p.eps0) / self.p.steps as f64;
        let mut e = self.p.eps0;
        let axpy = |a: &[f64], k: &[f64], s: f64| -> Vec<f64> { a.iter().zip(k).map(|(x, y)| x + s * y).collect() };
        for _ in 0..self.p.steps {
            let k1 = at(e, &omega, &self.w, 1.0 / e);
            let e2 = e + h / 2.0;
            let k2 = at(e2, &axpy(&omega, &k1, h / 2.0), &self.w, 1.0 / e2);
            let k3 = at(e2, &axpy(&omega, &k2, h / 2.0), &self.w, 1.0 / e2);
            let k4 = at(e + h, &axpy(&omega, &k3, h), &self.w, 1.0 / (e + h));
            for i in 0..omega.len() {
                omega[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            e += h;
        }
        Ok(omega)
    }
}

/// V(t) = Σ t^α X_α with exp(V(t))x = γ_t(x) at truncation.
pub fn extract_exp_fields(g: &Surface) -> Result<FieldMap, SurfaceError> {
    let s = match &g.form {
        SurfaceForm::Exponential(m) => return Ok(m.clone()),
        SurfaceForm::Series(s) => s,
    };
    let (nt, n, pol) = (s.nt(), s.nx(), s.policy());
    let mut v = VectorField::zero(nt, n);
    let mut e = exp_map(&v, pol);
    for _ in 0..pol.lt {
        let r = s.sub(&e)?;
        if r.is_zero() {
            break;
        }
        v = v.add(&VectorField::from_series(&r)?)?;
        e = exp_map(&v, pol);
    }
    if &e != s {
        return Err(SurfaceError::Internal("exponential matching did not converge".into()));
    }
    let sat = s.clone().with_saturation(s.is_saturated() || e.is_saturated());
    fields_of(&v, &sat, &g.dilations)
}

/// One entry of P or N.
#[derive(Clone, Debug)]
pub struct PartEntry {
    pub alpha: MultiIndex,
    pub field: WeightedField,
    pub zero: bool,
}

/// Splits the fields by pure / non-pure power, for every α with 1 ≤ |α| ≤ lt;
/// missing α's enter as zero fields.
pub fn partition_pure(fields: &FieldMap, e: &DilationSpec, n: usize, lt: u32) -> Result<(Vec<PartEntry>, Vec<PartEntry>), SurfaceError> {
    let mut alphas: Vec<MultiIndex> = MultiIndex::all_up_to(e.n_t(), lt).into_iter().filter(|a| !a.is_zero()).collect();
    for a in fields.keys() {
        if !alphas.contains(a) {
            alphas.push(a.clone());
        }
    }
    alphas.sort_by(|a, b| a.total().cmp(&b.total()).then_with(|| a.cmp(b)));
    let (mut p, mut nn) = (Vec::new(), Vec::new());
    for a in alphas {
        let field = match fields.get(&a) {
            Some(w) => w.clone(),
            None => WeightedField::new(VectorField::zero(0, n), e.deg(&a)?)?,
        };
        let entry = PartEntry { zero: field.is_zero(), alpha: a.clone(), field };
        match e.classify_power(&a)? {
            PowerClass::Pure(_) => p.push(entry),
            PowerClass::NonPure => nn.push(entry),
            PowerClass::Zero => return Err(SurfaceError::Precondition(format!("alpha {a} has zero degree"))),
        }
    }
    Ok((p, nn))
}

/// exp(−V): the inverse in exponential form.
pub fn invert_surface(g: &Surface) -> Result<Surface, SurfaceError> {
    let m = extract_exp_fields(g)?;
    let neg = m
        .into_iter()
        .map(|(a, w)| {
            let d = w.degree().to_vec();
            WeightedField::new(w.field.scale(&radon_algebra::q_int(-1)), d).map(|w| (a, w))
        })
        .collect::<Result<FieldMap, _>>()?;
    Surface::from_fields(g.n, neg, g.dilations.clone(), g.policy)
}

fn embed_poly(p: &Poly, npar: usize, offset: usize, total: usize, n: usize) -> Poly {
    let map: Vec<usize> = (0..npar).map(|k| offset + k).chain((0..n).map(|i| total + i)).collect();
    p.remap(total + n, &map)
}

fn embed_field(v: &VectorField, offset: usize, total: usize) -> Result<VectorField, SurfaceError> {
    let comps = v.comps().iter().map(|p| embed_poly(p, v.npar(), offset, total, v.n())).collect();
    Ok(VectorField::with_params(total, v.n(), comps, v.prec())?)
}

fn embed_series(s: &JetSeries, offset: usize, total: usize) -> Result<JetSeries, SurfaceError> {
    let comps = s.comps().iter().map(|p| embed_poly(p, s.nt(), offset, total, s.nx())).collect();
    Ok(JetSeries::new(total, s.nx(), s.policy(), comps)?.with_saturation(s.is_saturated()))
}

/// γ¹ then γ² (operator product e^{V¹}e^{V²}) on ℝ^{N₁+N₂} with concatenated
/// dilations, via the Campbell–Hausdorff formula; series composition and
/// re-extraction beyond its supported order.
pub fn compose_surfaces(g1: &Surface, g2: &Surface) -> Result<Surface, SurfaceError> {
    if g1.n != g2.n {
        return Err(SurfaceError::Precondition(format!("dimension mismatch: {} vs {}", g1.n, g2.n)));
    }
    if (g1.policy.lt, g1.policy.lx) != (g2.policy.lt, g2.policy.lx) {
        return Err(SurfaceError::Precondition("surfaces are truncated at different orders".into()));
    }
    let (n1, n2, n) = (g1.nt(), g2.nt(), g1.n);
    let total = n1 + n2;
    let dil = g1.dilations.concat(&g2.dilations);
    let pol = g1.policy;
    if pol.lt > BCH_MAX_ORDER {
        log::warn!("composition at t-order {} uses series composition instead of the Campbell-Hausdorff formula", pol.lt);
        let s1 = embed_series(&g1.series(), 0, total)?;
        let s2 = embed_series(&g2.series(), n1, total)?;
        let s = s2.compose(&s1)?;
        let composite = Surface::from_series(s, dil)?;
        let m = extract_exp_fields(&composite)?;
        return Surface::from_fields(n, m, composite.dilations, pol);
    }
    let v1 = embed_field(&param_field(n1, n, &extract_exp_fields(g1)?), 0, total)?;
    let v2 = embed_field(&param_field(n2, n, &extract_exp_fields(g2)?), n1, total)?;
    let w = Window::new(total, &pol);
    let (z, sat) = bch_log(&v1, &v2, pol.lt, Some(&w))?;
    let like = JetSeries::zero(total, n, pol, n).with_saturation(sat);
    let m = fields_of(&z, &like, &dil)?;
    Surface::from_fields(n, m, dil, pol)
}
