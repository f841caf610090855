use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use radon_algebra::linalg::SpanBasis;
use radon_algebra::{q_int, q_to_f64, DilationSpec, JetSeries, MultiIndex, Poly, Q};
use radon_lie::{VectorField, WeightedField};
use radon_prep::{solve_field_combination, taylor_prepare};

use crate::ball::{cc_ball_sample, BallParams};
use crate::rank::bareiss_rank;
use crate::GeometryError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Proved,
    Refuted,
    Unknown,
}

/// c^δ_j = δ^{delta_power} · c(x) multiplying δ^{d_j} X_j.
#[derive(Clone, Debug)]
pub struct CoefficientWitness {
    pub generator: usize,
    pub c: Poly,
    pub delta_power: Vec<u32>,
}

/// At (δ, x) the target δ^{d₀}X₀(x) is not in the span of the δ^{d_j}X_j(x).
#[derive(Clone, Debug, PartialEq)]
pub struct RefutationWitness {
    pub delta: Vec<Q>,
    pub x: Vec<Q>,
    pub rank_generators: usize,
    pub rank_augmented: usize,
}

/// Least-squares coefficient size at one δ.
#[derive(Clone, Debug)]
pub struct GrowthBound {
    pub delta: Vec<f64>,
    pub sup_coeff: f64,
    pub max_residual: f64,
    pub points: usize,
}

#[derive(Clone, Debug)]
pub struct ControlCertificate {
    pub status: Status,
    pub coefficients: Vec<CoefficientWitness>,
    /// Polynomial degree bound of the coefficient solve.
    pub coeff_degree: u32,
    /// x-degree to which the exact identity was compared (`None`: exact).
    pub prec: Option<i32>,
    pub witness: Option<RefutationWitness>,
    pub bounds: Vec<GrowthBound>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct ControlParams {
    pub x0: Vec<Q>,
    /// Coefficient degree of the exact tier; default: max x-degree in play.
    pub coeff_degree: Option<u32>,
    /// δ values per axis: 0 and 2^{-k}, 0 ≤ k ≤ dyadic_max_k.
    pub dyadic_max_k: u32,
    pub max_samples: usize,
    pub seed: u64,
    /// Paths per sampled ball in the growth measurement (0 disables it).
    pub ball_paths: usize,
}

impl ControlParams {
    pub fn at(x0: Vec<Q>) -> Self {
        ControlParams { x0, coeff_degree: None, dyadic_max_k: 10, max_samples: 4096, seed: 0, ball_paths: 64 }
    }

    pub fn origin(n: usize) -> Self {
        Self::at(vec![q_int(0); n])
    }
}

fn q_pow(x: &Q, e: u32) -> Q {
    let mut r = Q::one();
    for _ in 0..e {
        r *= x;
    }
    r
}

fn delta_pow_q(delta: &[Q], d: &[u32]) -> Q {
    delta.iter().zip(d).fold(Q::one(), |acc, (x, &e)| acc * q_pow(x, e))
}

/// The δ-grid: diagonals, axis-degenerate points, then the full product grid
/// (or a seeded sample of it when it exceeds `max_samples`).
pub fn delta_grid(nu: usize, dyadic_max_k: u32, max_samples: usize, seed: u64) -> Vec<Vec<Q>> {
    let mut values = vec![Q::zero()];
    for k in 0..=dyadic_max_k {
        values.push(Q::new(1.into(), num_traits::pow(num_bigint::BigInt::from(2), k as usize)));
    }
    let mut seen: BTreeSet<Vec<Q>> = BTreeSet::new();
    let mut out = Vec::new();
    let mut push = |v: Vec<Q>, out: &mut Vec<Vec<Q>>| {
        if seen.insert(v.clone()) {
            out.push(v);
        }
    };
    for v in &values {
        push(vec![v.clone(); nu], &mut out);
    }
    if nu <= 16 {
        for mask in 0u32..(1 << nu) {
            let v: Vec<Q> = (0..nu).map(|m| if mask >> m & 1 == 1 { Q::zero() } else { Q::one() }).collect();
            push(v, &mut out);
        }
    }
    let total = (values.len() as f64).powi(nu as i32);
    if total <= max_samples as f64 {
        let mut idx = vec![0usize; nu];
        loop {
            push(idx.iter().map(|&i| values[i].clone()).collect(), &mut out);
            let mut m = 0;
            while m < nu {
                idx[m] += 1;
                if idx[m] < values.len() {
                    break;
                }
                idx[m] = 0;
                m += 1;
            }
            if m == nu {
                break;
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut tries = 0;
        while out.len() < max_samples && tries < 20 * max_samples {
            tries += 1;
            push((0..nu).map(|_| values[rng.gen_range(0..values.len())].clone()).collect(), &mut out);
        }
    }
    out.truncate(max_samples.max(values.len()));
    out
}

fn coeff_degree_default(target: &WeightedField, s: &[WeightedField]) -> u32 {
    s.iter().map(|w| w.field.x_degree_max()).chain(std::iter::once(target.field.x_degree_max())).max().unwrap_or(0)
}

fn check_shapes(target: &WeightedField, s: &[WeightedField], x0: &[Q]) -> Result<(), GeometryError> {
    let (n, nu) = (target.n(), target.nu());
    if x0.len() != n {
        return Err(GeometryError::Dimension(format!("x0 has {} coordinates, fields live on R^{n}", x0.len())));
    }
    for w in s {
        if w.n() != n || w.nu() != nu {
            return Err(GeometryError::Dimension("fields must share n and nu".into()));
        }
    }
    if std::iter::once(target).chain(s).any(|w| w.field.npar() != 0) {
        return Err(GeometryError::Dimension("control fields must not depend on parameters".into()));
    }
    Ok(())
}

/// Pointwise test at (δ, x): is δ^{d₀}X₀(x) in the span of the δ^{d_j}X_j(x)?
fn pointwise(target: &WeightedField, s: &[WeightedField], delta: &[Q], x: &[Q]) -> Option<RefutationWitness> {
    let mut basis: SpanBasis<usize> = SpanBasis::new(false);
    for w in s {
        let f = delta_pow_q(delta, w.degree());
        if f.is_zero() {
            continue;
        }
        let v = w.field.eval(x);
        basis.push(&v.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| (i, c * &f)).collect());
    }
    let f0 = delta_pow_q(delta, target.degree());
    let tv: std::collections::BTreeMap<usize, Q> =
        target.field.eval(x).into_iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| (i, c * &f0)).collect();
    if tv.is_empty() || basis.contains(&tv) {
        return None;
    }
    let rank = basis.rank();
    Some(RefutationWitness { delta: delta.to_vec(), x: x.to_vec(), rank_generators: rank, rank_augmented: rank + 1 })
}

/// Independent re-check of a refutation witness by fraction-free elimination.
pub fn verify_refutation(target: &WeightedField, s: &[WeightedField], w: &RefutationWitness) -> bool {
    let row = |f: &WeightedField| -> Vec<Q> {
        let c = delta_pow_q(&w.delta, f.degree());
        f.field.eval(&w.x).into_iter().map(|v| v * &c).collect()
    };
    let mut rows: Vec<Vec<Q>> = s.iter().map(row).collect();
    let r0 = bareiss_rank(&rows);
    rows.push(row(target));
    let r1 = bareiss_rank(&rows);
    r1 == r0 + 1 && r0 == w.rank_generators && r1 == w.rank_augmented
}

fn exact_values_known(fs: &[&WeightedField], x: &[Q]) -> bool {
    let origin = x.iter().all(|v| v.is_zero());
    fs.iter().all(|w| match w.field.prec() {
        None => true,
        Some(p) => origin && p >= 0,
    })
}

fn refutation_tier(target: &WeightedField, s: &[WeightedField], p: &ControlParams) -> Option<RefutationWitness> {
    let grid = delta_grid(target.nu(), p.dyadic_max_k, p.max_samples, p.seed);
    grid.par_iter().find_map_first(|d| pointwise(target, s, d, &p.x0))
}

fn growth(target: &WeightedField, s: &[WeightedField], p: &ControlParams) -> Vec<GrowthBound> {
    let nu = target.nu();
    let x0: Vec<f64> = p.x0.iter().map(q_to_f64).collect();
    let q = s.len();
    if q == 0 {
        return Vec::new();
    }
    let tgt = target.field.compile();
    let gens: Vec<_> = s.iter().map(|w| w.field.compile()).collect();
    (0..=p.dyadic_max_k.min(8))
        .into_par_iter()
        .map(|k| {
            let delta = vec![0.5f64.powi(k as i32); nu];
            let mut pts = vec![x0.clone()];
            if p.ball_paths > 0 {
                let bp = BallParams { paths: p.ball_paths, segments: 8, steps_per_segment: 4, seed: p.seed, ..Default::default() };
                if let Ok(b) = cc_ball_sample(s, &x0, &delta, &bp) {
                    pts.extend(b.points);
                }
            }
            let f0 = crate::ball::delta_power(&delta, target.degree());
            let fj: Vec<f64> = s.iter().map(|w| crate::ball::delta_power(&delta, w.degree())).collect();
            let (mut sup, mut res) = (0.0f64, 0.0f64);
            for x in &pts {
                let n = x.len();
                let a = DMatrix::from_fn(n, q, |i, j| fj[j] * gens[j][i].eval(x));
                let b = DVector::from_fn(n, |i, _| f0 * tgt[i].eval(x));
                if let Ok(c) = a.clone().svd(true, true).solve(&b, 1e-12) {
                    sup = sup.max(c.amax());
                    res = res.max((a * &c - &b).amax());
                }
            }
            GrowthBound { delta, sup_coeff: sup, max_residual: res, points: pts.len() }
        })
        .collect()
}

/// Two-tier control check of (X₀, d₀) by S near x₀.
pub fn control_check(target: &WeightedField, s: &[WeightedField], p: &ControlParams) -> Result<ControlCertificate, GeometryError> {
    check_shapes(target, s, &p.x0)?;
    let deg = p.coeff_degree.unwrap_or_else(|| coeff_degree_default(target, s));
    let cand: Vec<usize> = (0..s.len()).filter(|&j| s[j].degree_le(target.degree())).collect();
    let gens: Vec<&VectorField> = cand.iter().map(|&j| &s[j].field).collect();
    let exact = solve_field_combination(&target.field, &gens, deg);

    let mut notes = Vec::new();
    let all: Vec<&WeightedField> = std::iter::once(target).chain(s).collect();
    let witness = if exact_values_known(&all, &p.x0) {
        refutation_tier(target, s, p)
    } else {
        notes.push("refutation tier skipped: truncated fields have no exact values away from the origin".into());
        None
    };

    let mut cert = ControlCertificate {
        status: Status::Unknown,
        coefficients: Vec::new(),
        coeff_degree: deg,
        prec: None,
        witness: None,
        bounds: Vec::new(),
        notes,
    };
    match (exact, witness) {
        (Some(_), Some(w)) => {
            return Err(GeometryError::Inconsistent(format!(
                "exact certificate and refutation at delta={:?} both found",
                w.delta.iter().map(q_to_f64).collect::<Vec<_>>()
            )))
        }
        (Some((coeffs, prec)), None) => {
            cert.status = Status::Proved;
            cert.prec = prec;
            cert.coefficients = cand
                .iter()
                .zip(coeffs)
                .filter(|(_, c)| !c.is_zero())
                .map(|(&j, c)| CoefficientWitness {
                    generator: j,
                    c,
                    delta_power: target.degree().iter().zip(s[j].degree()).map(|(a, b)| a - b).collect(),
                })
                .collect();
            if prec.is_some() {
                cert.notes.push(format!("identity holds through x-degree {}", prec.unwrap()));
            }
        }
        (None, Some(w)) => {
            cert.status = Status::Refuted;
            cert.witness = Some(w);
        }
        (None, None) => {
            cert.notes.push(format!("no polynomial combination of degree <= {deg} over generators with d_j <= d_0"));
            cert.bounds = growth(target, s, p);
        }
    }
    Ok(cert)
}

/// Symbolic replay in (δ, x): δ^{d₀}X₀ = Σ_j δ^{d₀−d_j} c_j · δ^{d_j} X_j.
pub fn replay_control(cert: &ControlCertificate, target: &WeightedField, s: &[WeightedField]) -> bool {
    if cert.status != Status::Proved {
        return false;
    }
    let (nu, n) = (target.nu(), target.n());
    let dmono = |d: &[u32]| MultiIndex(d.iter().copied().chain(std::iter::repeat(0).take(n)).collect());
    let lhs = target.field.lift(nu).mul_poly(&Poly::monomial(nu + n, dmono(target.degree()), q_int(1)), None);
    let mut rhs = VectorField::zero(nu, n);
    for w in &cert.coefficients {
        let Some(g) = s.get(w.generator) else { return false };
        let total: Vec<u32> = w.delta_power.iter().zip(g.degree()).map(|(a, b)| a + b).collect();
        if total != target.degree() {
            return false;
        }
        let map: Vec<usize> = (nu..nu + n).collect();
        let c = &w.c.remap(nu + n, &map) * &Poly::monomial(nu + n, dmono(&w.delta_power), q_int(1));
        let term = g.field.lift(nu).mul_poly(&Poly::monomial(nu + n, dmono(g.degree()), q_int(1)), None).mul_poly(&c, None);
        rhs = match rhs.add(&term) {
            Ok(r) => r,
            Err(_) => return false,
        };
    }
    let x_deg = |m: &MultiIndex| m.0[nu..].iter().sum::<u32>() as i64;
    let cut = |f: &VectorField| -> Vec<Poly> {
        f.comps().iter().map(|p| p.filter(|m| cert.prec.map_or(true, |q| x_deg(m) <= q as i64))).collect()
    };
    cut(&lhs) == cut(&rhs)
}

/// Control certificate of a W-target: one exact certificate per prepared
/// coefficient, or a refutation of one Taylor coefficient.
#[derive(Clone, Debug)]
pub struct WControlCertificate {
    pub status: Status,
    /// (α_k, certificate of (Ŷ_{α_k}, deg α_k)) from the preparation of W.
    pub prepared: Vec<(MultiIndex, ControlCertificate)>,
    /// Refuted Taylor coefficient α with its certificate.
    pub refuted: Option<(MultiIndex, ControlCertificate)>,
    pub saturated: bool,
    pub notes: Vec<String>,
}

/// Coefficient fields (X̂_α, deg α) of a series W in (t, x).
pub fn w_taylor_fields(w: &JetSeries, dil: &DilationSpec) -> Result<Vec<(MultiIndex, WeightedField)>, GeometryError> {
    if w.nt() != dil.n_t() || w.arity() != w.nx() {
        return Err(GeometryError::Dimension("W must be a vector field in x with one t per dilation exponent".into()));
    }
    let mut out = Vec::new();
    for (a, comps) in w.t_terms() {
        if a.is_zero() {
            return Err(GeometryError::Dimension("W has a t-constant term".into()));
        }
        let prec = w.x_precision_at(&a).map(|p| p as i32);
        let f = VectorField::with_params(0, w.nx(), comps, prec)?;
        if f.is_zero() {
            continue;
        }
        out.push((a.clone(), WeightedField::new(f, dil.deg(&a)?)?));
    }
    Ok(out)
}

/// Control of W near x₀: the preparation route proves, the per-coefficient
/// route refutes.
pub fn control_check_w(w: &JetSeries, dil: &DilationSpec, s: &[WeightedField], p: &ControlParams) -> Result<WControlCertificate, GeometryError> {
    let taylor = w_taylor_fields(w, dil)?;
    let prep = taylor_prepare(w)?;
    let mut notes = Vec::new();
    let mut prepared = Vec::new();
    let mut all_proved = true;
    for term in &prep.terms {
        let prec = w.x_precision_at(&term.alpha).map(|p| p as i32);
        let f = VectorField::with_params(0, w.nx(), term.f_alpha.clone(), prec)?;
        let y = WeightedField::new(f, dil.deg(&term.alpha)?)?;
        let cert = control_check(&y, s, p)?;
        all_proved &= cert.status == Status::Proved;
        prepared.push((term.alpha.clone(), cert));
    }
    if prep.saturated {
        notes.push("preparation saturated at the x-budget".into());
    }
    let mut refuted = None;
    for (a, y) in &taylor {
        let cert = control_check(y, s, p)?;
        if cert.status == Status::Refuted {
            refuted = Some((a.clone(), cert));
            break;
        }
    }
    let status = match (all_proved, refuted.is_some()) {
        (true, true) => return Err(GeometryError::Inconsistent("prepared W controlled but a Taylor coefficient refuted".into())),
        (true, false) => Status::Proved,
        (false, true) => Status::Refuted,
        (false, false) => Status::Unknown,
    };
    Ok(WControlCertificate { status, prepared, refuted, saturated: prep.saturated, notes })
}
