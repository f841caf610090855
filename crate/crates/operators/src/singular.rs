use std::collections::HashMap;

use rayon::prelude::*;
use radon_algebra::{CompiledPoly, JetSeries};
use radon_kernels::{DyadicKernel, GridSpec, TensorBump};
use radon_surface::{NumericFlowMap, Surface};

use crate::config::OperatorConfig;
use crate::sparse::{interp_stencil, Csr, LinearOp};
use crate::OperatorError;

/// (t, x) ↦ γ_t(x).
pub trait PointMap: Sync + Send {
    fn nt(&self) -> usize;
    fn n(&self) -> usize;
    fn map(&self, t: &[f64], x: &[f64], out: &mut [f64]);

    /// γ_t(x) − x does not depend on x.
    fn translation_invariant(&self) -> bool {
        false
    }
}

/// A compiled truncated series, optionally precomposed with t ↦ λ∘t.
#[derive(Clone, Debug)]
pub struct SeriesMap {
    comps: Vec<CompiledPoly>,
    nt: usize,
    n: usize,
    scale: Option<Vec<f64>>,
    translation: bool,
}

const MAX_VARS: usize = 32;

impl SeriesMap {
    pub fn new(s: &JetSeries) -> Result<Self, OperatorError> {
        if s.arity() != s.nx() {
            return Err(OperatorError::Dimension("surface series must be R^n-valued".into()));
        }
        if s.nt() + s.nx() > MAX_VARS {
            return Err(OperatorError::Dimension(format!("at most {MAX_VARS} variables")));
        }
        let (nt, n) = (s.nt(), s.nx());
        let translation = s.comps().iter().enumerate().all(|(i, c)| {
            c.terms().keys().all(|m| m.0[nt..].iter().all(|&e| e == 0) || (m.0[..nt].iter().all(|&e| e == 0) && m.0[nt + i] == 1 && m.total() == 1))
        });
        Ok(SeriesMap { comps: s.compile(), nt, n, scale: None, translation })
    }

    pub fn from_surface(g: &Surface) -> Result<Self, OperatorError> {
        SeriesMap::new(&g.series())
    }

    /// γ_{λt}(x).
    pub fn scaled(&self, lambda: Vec<f64>) -> Self {
        SeriesMap { scale: Some(lambda), ..self.clone() }
    }
}

impl PointMap for SeriesMap {
    fn nt(&self) -> usize {
        self.nt
    }

    fn n(&self) -> usize {
        self.n
    }

    fn map(&self, t: &[f64], x: &[f64], out: &mut [f64]) {
        let mut v = [0.0f64; MAX_VARS];
        match &self.scale {
            Some(l) => {
                for i in 0..self.nt {
                    v[i] = t[i] * l[i];
                }
            }
            None => v[..self.nt].copy_from_slice(t),
        }
        v[self.nt..self.nt + self.n].copy_from_slice(x);
        let v = &v[..self.nt + self.n];
        for (o, c) in out.iter_mut().zip(&self.comps) {
            *o = c.eval(v);
        }
    }

    fn translation_invariant(&self) -> bool {
        self.translation
    }
}

/// γ^W by numerical integration of the W-flow.
pub struct NumericMap(pub NumericFlowMap, pub usize, pub usize);

impl PointMap for NumericMap {
    fn nt(&self) -> usize {
        self.1
    }

    fn n(&self) -> usize {
        self.2
    }

    fn map(&self, t: &[f64], x: &[f64], out: &mut [f64]) {
        let y = self.0.eval(t, x).expect("dimensions checked at construction");
        out.copy_from_slice(&y);
    }
}

/// Points (x, t) whose image left the grid.
pub(crate) struct Escapes {
    pub count: usize,
    pub examples: Vec<(Vec<f64>, Vec<f64>)>,
}

pub(crate) fn escape_error(results: impl Iterator<Item = Option<(Vec<f64>, Vec<f64>)>>) -> Result<(), OperatorError> {
    let mut e = Escapes { count: 0, examples: Vec::new() };
    for r in results.flatten() {
        e.count += 1;
        if e.examples.len() < 5 {
            e.examples.push(r);
        }
    }
    if e.count == 0 {
        Ok(())
    } else {
        Err(OperatorError::DomainEscape { count: e.count, examples: e.examples })
    }
}

/// Midpoint nodes of one dyadic term: u on the support box of ς_j with m[i]
/// nodes on axis i, returned as (t = u/s, ς_j(u)·cell volume).
fn term_nodes(b: &TensorBump, s: &[f64], m: &[usize], out: &mut Vec<(Vec<f64>, f64)>) {
    let n = b.n();
    let vol: f64 = (0..n).map(|i| 2.0 * b.radius[i] / m[i] as f64).product();
    let mut idx = vec![0usize; n];
    loop {
        let u: Vec<f64> = (0..n).map(|i| -b.radius[i] + (idx[i] as f64 + 0.5) * 2.0 * b.radius[i] / m[i] as f64).collect();
        let w = b.eval(&u) * vol;
        if w != 0.0 {
            out.push(((0..n).map(|i| u[i] / s[i]).collect(), w));
        }
        let mut carry = true;
        for i in (0..n).rev() {
            idx[i] += 1;
            if idx[i] < m[i] {
                carry = false;
                break;
            }
            idx[i] = 0;
        }
        if carry {
            break;
        }
    }
}

/// Quadrature nodes for Σ_j ∫ F(t) ς_j^{(2^j)}(t) dt: each term is integrated
/// in u = 2^j t over the support box of ς_j with `m` midpoint nodes per axis.
pub fn kernel_nodes(k: &DyadicKernel, m: usize) -> Vec<(Vec<f64>, f64)> {
    let mut nodes = Vec::new();
    for (_, b, s) in k.terms() {
        term_nodes(b, &s, &vec![m; k.n()], &mut nodes);
    }
    nodes
}

const MAX_NODES_PER_AXIS: usize = 1 << 14;

/// As [`kernel_nodes`], but axis i of each term gets at least cfg.t_points
/// nodes and enough that |∂_{t_i} γ| times the node spacing stays below
/// cfg.t_resolve x cells, for x in supp ψ₁.
///
/// With fixed nodes per scale the coarse terms are sampled far more sparsely
/// than the x grid, and their aliases pile up at the fine frequencies.
pub fn resolved_kernel_nodes(g: &dyn PointMap, k: &DyadicKernel, cfg: &OperatorConfig) -> Vec<(Vec<f64>, f64)> {
    if cfg.t_resolve <= 0.0 {
        return kernel_nodes(k, cfg.t_points);
    }
    let grid = &cfg.x_grid;
    let n = grid.dim();
    let hmin = (0..n).map(|i| grid.h(i)).fold(f64::INFINITY, f64::min);
    let stride = (grid.len() / 256).max(1);
    let xs: Vec<Vec<f64>> = (0..grid.len()).step_by(stride).map(|r| grid.point(r)).filter(|x| cfg.psi1.eval(x) != 0.0).collect();
    let nt = k.n();
    let terms: Vec<_> = k.terms().collect();
    let per_term: Vec<Vec<(Vec<f64>, f64)>> = terms
        .par_iter()
        .map(|(_, b, s)| {
            let probe = cfg.t_points.max(4);
            let mut lip = vec![0.0f64; nt];
            let (mut ya, mut yb) = (vec![0.0; n], vec![0.0; n]);
            let mut idx = vec![0usize; nt];
            loop {
                let t: Vec<f64> = (0..nt).map(|i| (-b.radius[i] + 2.0 * b.radius[i] * idx[i] as f64 / (probe - 1) as f64) / s[i]).collect();
                for i in 0..nt {
                    let d = 1e-6 * b.radius[i] / s[i];
                    let (mut ta, mut tb) = (t.clone(), t.clone());
                    ta[i] -= d;
                    tb[i] += d;
                    for x in &xs {
                        g.map(&ta, x, &mut ya);
                        g.map(&tb, x, &mut yb);
                        let dy = ya.iter().zip(&yb).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max) / (2.0 * d);
                        lip[i] = lip[i].max(dy);
                    }
                }
                let mut carry = true;
                for i in (0..nt).rev() {
                    idx[i] += 1;
                    if idx[i] < probe {
                        carry = false;
                        break;
                    }
                    idx[i] = 0;
                }
                if carry {
                    break;
                }
            }
            let m: Vec<usize> = (0..nt)
                .map(|i| {
                    // 25% margin over the sampled derivative bound
                    let span = 1.25 * lip[i] * 2.0 * b.radius[i] / s[i];
                    ((span / (cfg.t_resolve * hmin)).ceil() as usize).clamp(cfg.t_points, MAX_NODES_PER_AXIS)
                })
                .collect();
            let mut out = Vec::new();
            term_nodes(b, s, &m, &mut out);
            out
        })
        .collect();
    per_term.into_iter().flatten().collect()
}

/// Sparse matrix of f ↦ ψ₁(x) ∫ (ψ₂f)(γ_t(x)) κ(t,x) K_J(t) dt on the
/// configured x grid, ψ₂f sampled on the grid and multilinearly interpolated.
pub fn assemble_t(g: &dyn PointMap, k: &DyadicKernel, cfg: &OperatorConfig) -> Result<Csr, OperatorError> {
    let grid = &cfg.x_grid;
    let n = grid.dim();
    if g.n() != n || g.nt() != k.n() {
        return Err(OperatorError::Dimension(format!(
            "surface is R^{} x R^{}, kernel on R^{}, grid on R^{n}",
            g.nt(),
            g.n(),
            k.n()
        )));
    }
    let nodes = resolved_kernel_nodes(g, k, cfg);
    let psi2: Vec<f64> = (0..grid.len()).map(|c| cfg.psi2.eval(&grid.point(c))).collect();
    let shift = if g.translation_invariant() && cfg.kappa.is_none() { Some(OffsetStencil::new(g, grid, &nodes)) } else { None };
    let kappa = cfg.kappa_compiled();
    let ncols = grid.len();
    let rows: Vec<Result<Vec<(usize, f64)>, (Vec<f64>, Vec<f64>)>> = (0..grid.len())
        .into_par_iter()
        .map_init(
            || (vec![0.0; ncols], Vec::new(), Vec::new(), vec![0.0; n], Vec::new()),
            |(dense, touched, st, y, tx), r| {
                let x = grid.point(r);
                let p1 = cfg.psi1.eval(&x);
                if p1 == 0.0 {
                    return Ok(Vec::new());
                }
                if let Some(row) = shift.as_ref().and_then(|s| s.row(grid, r, p1, &psi2)) {
                    return Ok(row);
                }
                for (t, w) in &nodes {
                    g.map(t, &x, y);
                    if !interp_stencil(grid, y, st) {
                        for &c in touched.iter() {
                            dense[c] = 0.0;
                        }
                        touched.clear();
                        return Err((x, t.clone()));
                    }
                    let mut wt = p1 * w;
                    if let Some(kc) = &kappa {
                        tx.clear();
                        tx.extend_from_slice(t);
                        tx.extend_from_slice(&x);
                        wt *= kc.eval(tx);
                    }
                    if wt == 0.0 {
                        continue;
                    }
                    for &(c, s) in st.iter() {
                        if dense[c] == 0.0 {
                            touched.push(c);
                        }
                        dense[c] += wt * s;
                    }
                }
                touched.sort_unstable();
                touched.dedup();
                let row: Vec<(usize, f64)> =
                    touched.iter().map(|&c| (c, dense[c] * psi2[c])).filter(|(_, v)| *v != 0.0).collect();
                for &c in touched.iter() {
                    dense[c] = 0.0;
                }
                touched.clear();
                Ok(row)
            },
        )
        .collect();
    escape_error(rows.iter().map(|r| r.as_ref().err().cloned()))?;
    Ok(Csr::from_rows(ncols, rows.into_iter().map(|r| r.unwrap_or_default()).collect()))
}

/// For γ_t(x) = x + d(t): the quadrature measure deposited once onto grid
/// offsets, then shifted to every row whose stencils stay off the boundary.
struct OffsetStencil {
    /// (offset in cells per axis, weight), lexicographic.
    entries: Vec<(Vec<i64>, f64)>,
    dmin: Vec<f64>,
    dmax: Vec<f64>,
}

impl OffsetStencil {
    fn new(g: &dyn PointMap, grid: &GridSpec, nodes: &[(Vec<f64>, f64)]) -> Self {
        let n = grid.dim();
        let zero = vec![0.0; n];
        let mut d = vec![0.0; n];
        let (mut dmin, mut dmax) = (vec![f64::INFINITY; n], vec![f64::NEG_INFINITY; n]);
        let mut acc: HashMap<Vec<i64>, f64> = HashMap::new();
        let mut st: Vec<(Vec<i64>, f64)> = Vec::new();
        for (t, w) in nodes {
            g.map(t, &zero, &mut d);
            st.clear();
            st.push((Vec::with_capacity(n), *w));
            for i in 0..n {
                dmin[i] = dmin[i].min(d[i]);
                dmax[i] = dmax[i].max(d[i]);
                let q = d[i] / grid.h(i);
                let k0 = q.floor();
                let fr = q - k0;
                let len = st.len();
                for m in 0..len {
                    let (mut off, wm) = st[m].clone();
                    let mut hi = off.clone();
                    off.push(k0 as i64);
                    hi.push(k0 as i64 + 1);
                    st[m] = (off, wm * (1.0 - fr));
                    st.push((hi, wm * fr));
                }
            }
            for (off, v) in st.drain(..) {
                if v != 0.0 {
                    *acc.entry(off).or_insert(0.0) += v;
                }
            }
        }
        let mut entries: Vec<_> = acc.into_iter().collect();
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        OffsetStencil { entries, dmin, dmax }
    }

    /// None when some image lies within half a cell of the boundary (or outside).
    fn row(&self, grid: &GridSpec, r: usize, p1: f64, psi2: &[f64]) -> Option<Vec<(usize, f64)>> {
        let idx = grid.unflatten(r);
        for i in 0..grid.dim() {
            let c = grid.coord(i, idx[i]);
            let h = grid.h(i);
            if c + self.dmin[i] < grid.lo[i] + 0.5 * h + 1e-9 * h || c + self.dmax[i] > grid.hi[i] - 1.5 * h {
                return None;
            }
        }
        let strides = grid.strides();
        Some(
            self.entries
                .iter()
                .map(|(off, w)| {
                    let c: usize = off.iter().enumerate().map(|(i, &o)| (idx[i] as i64 + o) as usize * strides[i]).sum();
                    (c, p1 * w * psi2[c])
                })
                .filter(|(_, v)| *v != 0.0)
                .collect(),
        )
    }
}

/// T f on the x grid.
pub fn eval_t(g: &dyn PointMap, k: &DyadicKernel, cfg: &OperatorConfig, f: &[f64]) -> Result<Vec<f64>, OperatorError> {
    if f.len() != cfg.x_grid.len() {
        return Err(OperatorError::Dimension(format!("f has {} samples, grid {}", f.len(), cfg.x_grid.len())));
    }
    Ok(assemble_t(g, k, cfg)?.apply(f))
}
