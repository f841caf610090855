use num_bigint::BigInt;
use num_traits::One;
use radon_algebra::{MultiIndex, Q};
use rayon::prelude::*;
use radon_kernels::GridSpec;
use radon_surface::{w_to_gamma, NumericFlow, NumericFlowMap, Surface};

use crate::config::OperatorConfig;
use crate::family::{build_wj, DyadicFamilySpec, Scale};
use crate::singular::{escape_error, NumericMap, PointMap, SeriesMap};
use crate::sparse::interp_stencil;
use crate::OperatorError;

#[derive(Clone, Debug, PartialEq)]
pub enum MaximalMode {
    /// M: sup over δ ∈ {2^{−k} : 0 ≤ k ≤ kmax}^N of ψ₁ ∫_{|t|<a} |f(γ_{δt}(x))| dt.
    Delta { kmax: u32 },
    /// M₀: sup over j ∈ [0, jmax]^N of ψ₁ ∫_{|t|<a} |f(γ_{2^{−j}t}(x))| ψ₂(γ_{2^{−j}t}(x)) dt.
    Dyadic { jmax: u32 },
}

/// How γ^j is obtained from W_j.
#[derive(Clone, Debug)]
pub enum FlowMode {
    /// Exact truncated series from w_to_gamma.
    Series,
    /// RK4 integration of the ε-flow.
    Numeric(NumericFlow),
}

#[derive(Clone, Debug)]
pub struct MaximalResult {
    pub values: Vec<f64>,
    /// Index into the scale list attaining the sup (usize::MAX where ψ₁ = 0).
    pub argmax: Vec<usize>,
    pub scales: usize,
}

/// Midpoint nodes of the box |t|∞ < a.
pub(crate) fn box_nodes(nt: usize, a: f64, m: usize) -> (Vec<Vec<f64>>, f64) {
    let h = 2.0 * a / m as f64;
    let mut out = Vec::new();
    let mut idx = vec![0usize; nt];
    loop {
        out.push(idx.iter().map(|&k| -a + (k as f64 + 0.5) * h).collect());
        let mut carry = true;
        for i in (0..nt).rev() {
            idx[i] += 1;
            if idx[i] < m {
                carry = false;
                break;
            }
            idx[i] = 0;
        }
        if carry {
            break;
        }
    }
    (out, h.powi(nt as i32))
}

/// sup over the maps of ψ₁(x) Σ_nodes |f(y)| ψ₂(y)^{[use_psi2]} h^N, y = γ(t, x).
pub fn sup_average(maps: &[&dyn PointMap], cfg: &OperatorConfig, f: &[f64], use_psi2: bool) -> Result<MaximalResult, OperatorError> {
    let grid = &cfg.x_grid;
    if f.len() != grid.len() {
        return Err(OperatorError::Dimension(format!("f has {} samples, grid {}", f.len(), grid.len())));
    }
    let Some(first) = maps.first() else {
        return Err(OperatorError::Dimension("empty scale family".into()));
    };
    let nt = first.nt();
    if maps.iter().any(|m| m.nt() != nt || m.n() != grid.dim()) {
        return Err(OperatorError::Dimension("scale family dimensions disagree with the grid".into()));
    }
    let (nodes, vol) = box_nodes(nt, cfg.a, cfg.t_points);
    let rows: Vec<Result<(f64, usize), (Vec<f64>, Vec<f64>)>> = (0..grid.len())
        .into_par_iter()
        .map_init(
            || (Vec::new(), vec![0.0; grid.dim()]),
            |(st, y), r| {
                let x = grid.point(r);
                let p1 = cfg.psi1.eval(&x);
                if p1 == 0.0 {
                    return Ok((0.0, usize::MAX));
                }
                let mut best = (f64::NEG_INFINITY, 0);
                for (k, m) in maps.iter().enumerate() {
                    let mut acc = 0.0;
                    for t in &nodes {
                        m.map(t, &x, y);
                        if !interp_stencil(grid, y, st) {
                            return Err((x, t.clone()));
                        }
                        let v: f64 = st.iter().map(|&(c, w)| w * f[c]).sum::<f64>().abs();
                        acc += if use_psi2 { v * cfg.psi2.eval(y) } else { v };
                    }
                    let val = p1 * acc * vol;
                    if val > best.0 {
                        best = (val, k);
                    }
                }
                Ok(best)
            },
        )
        .collect();
    escape_error(rows.iter().map(|r| r.as_ref().err().cloned()))?;
    let (values, argmax) = rows.into_iter().map(|r| r.expect("escapes reported above")).unzip();
    Ok(MaximalResult { values, argmax, scales: maps.len() })
}

/// γ_{2^{−k}∘t} as an exact series.
fn dyadic_scaled(g: &Surface, k: &[u32]) -> Result<SeriesMap, OperatorError> {
    let f: Vec<Q> = k.iter().map(|&e| Q::new(BigInt::one(), BigInt::one() << e as usize)).collect();
    SeriesMap::new(&g.series().scale_t(&f))
}

/// M or M₀ of a surface on the configured grids.
pub fn eval_maximal(g: &Surface, cfg: &OperatorConfig, f: &[f64], mode: &MaximalMode) -> Result<MaximalResult, OperatorError> {
    let (kmax, psi2) = match mode {
        MaximalMode::Delta { kmax } => (*kmax, false),
        MaximalMode::Dyadic { jmax } => (*jmax, true),
    };
    let maps = MultiIndex::all_in_box(g.nt(), kmax).iter().map(|k| dyadic_scaled(g, &k.0)).collect::<Result<Vec<_>, _>>()?;
    let refs: Vec<&dyn PointMap> = maps.iter().map(|m| m as &dyn PointMap).collect();
    sup_average(&refs, cfg, f, psi2)
}

/// γ^j for each scale, built from W_j.
pub fn family_maps(spec: &DyadicFamilySpec, scales: &[Scale], flow: &FlowMode) -> Result<Vec<Box<dyn PointMap>>, OperatorError> {
    scales
        .iter()
        .map(|j| {
            let w = build_wj(spec, j)?;
            let m: Box<dyn PointMap> = match flow {
                FlowMode::Series => Box::new(SeriesMap::new(&w_to_gamma(&w)?.series())?),
                FlowMode::Numeric(p) => Box::new(NumericMap(NumericFlowMap::new(&w, p.clone())?, spec.nt(), spec.n())),
            };
            Ok(m)
        })
        .collect()
}

/// M̃ over the listed scales: sup ψ₁ ∫_{|t|<a} |f(γ^j_t(x))| ψ₂(γ^j_t(x)) dt.
pub fn eval_maximal_family(
    spec: &DyadicFamilySpec,
    cfg: &OperatorConfig,
    f: &[f64],
    scales: &[Scale],
    flow: &FlowMode,
) -> Result<MaximalResult, OperatorError> {
    let maps = family_maps(spec, scales, flow)?;
    let refs: Vec<&dyn PointMap> = maps.iter().map(|m| m.as_ref()).collect();
    sup_average(&refs, cfg, f, true)
}

/// M_j f(x) = ψ₀(x) ∫ f(γ^j_t(x)) ψ₀(γ^j_t(x)) σ(t) dt.
pub fn eval_mj(spec: &DyadicFamilySpec, j: &Scale, cfg: &OperatorConfig, f: &[f64], flow: &FlowMode) -> Result<Vec<f64>, OperatorError> {
    let grid = &cfg.x_grid;
    if f.len() != grid.len() {
        return Err(OperatorError::Dimension(format!("f has {} samples, grid {}", f.len(), grid.len())));
    }
    let map = family_maps(spec, std::slice::from_ref(j), flow)?.pop().expect("one scale");
    let (nodes, vol) = box_nodes(spec.nt(), cfg.sigma.a, cfg.t_points);
    let weights: Vec<f64> = nodes.iter().map(|t| cfg.sigma.eval(t) * vol).collect();
    let rows: Vec<Result<f64, (Vec<f64>, Vec<f64>)>> = (0..grid.len())
        .into_par_iter()
        .map_init(
            || (Vec::new(), vec![0.0; grid.dim()]),
            |(st, y), r| {
                let x = grid.point(r);
                let p0 = cfg.psi0.eval(&x);
                if p0 == 0.0 {
                    return Ok(0.0);
                }
                let mut acc = 0.0;
                for (t, w) in nodes.iter().zip(&weights) {
                    if *w == 0.0 {
                        continue;
                    }
                    map.map(t, &x, y);
                    if !interp_stencil(grid, y, st) {
                        return Err((x, t.clone()));
                    }
                    let v: f64 = st.iter().map(|&(c, s)| s * f[c]).sum();
                    acc += v * cfg.psi0.eval(y) * w;
                }
                Ok(p0 * acc)
            },
        )
        .collect();
    escape_error(rows.iter().map(|r| r.as_ref().err().cloned()))?;
    Ok(rows.into_iter().map(|r| r.expect("escapes reported above")).collect())
}

/// Centered discrete Hardy–Littlewood maximal function on a 1D grid:
/// sup_r mean of |f| over the 2r+1 cells around each point (clipped at the ends).
pub fn hardy_littlewood(g: &GridSpec, f: &[f64]) -> Result<Vec<f64>, OperatorError> {
    if g.dim() != 1 {
        return Err(OperatorError::Dimension("Hardy-Littlewood comparison is implemented on 1D grids".into()));
    }
    let n = f.len();
    let mut pre = vec![0.0; n + 1];
    for i in 0..n {
        pre[i + 1] = pre[i] + f[i].abs();
    }
    Ok((0..n)
        .into_par_iter()
        .map(|i| {
            let mut best: f64 = 0.0;
            for r in 0..n {
                let a = i.saturating_sub(r);
                let b = (i + r + 1).min(n);
                best = best.max((pre[b] - pre[a]) / (b - a) as f64);
                if a == 0 && b == n {
                    break;
                }
            }
            best
        })
        .collect())
}

/// C with M f ≤ C · M_HL f for the translation surface in one variable.
///
/// At scale δ the m midpoint nodes are spaced q = 2aδ/m apart in y and only
/// touch cells within ρ + 1 of x, ρ = aδ/h. Each cell collects interpolation
/// weight from at most 2h/q + 1 nodes, so the average is at most
/// min(1, 1/ρ + 1/m)(2⌊ρ⌋ + 3) times the centered mean over those cells.
pub fn hl_constant(cfg: &OperatorConfig, kmax: u32) -> f64 {
    let h = cfg.x_grid.h(0);
    let m = cfg.t_points as f64;
    (0..=kmax)
        .map(|k| {
            let rho = cfg.a * 2f64.powi(-(k as i32)) / h;
            (1.0f64).min(1.0 / rho + 1.0 / m) * (2.0 * rho.floor() + 3.0)
        })
        .fold(0.0, f64::max)
        * 2.0
        * cfg.a
        * cfg.psi1.sup()
}
