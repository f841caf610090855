use std::collections::BTreeMap;

use rayon::prelude::*;
use radon_algebra::{DilationSpec, MultiIndex};

use crate::bump::{axis_scales, make_bump_family, BumpFamily, BumpParams, FamilyBound, Profile, TensorBump};
use crate::{GridDump, KernelError};

/// Finest dyadic scale must span at least this many grid cells per axis.
pub const MIN_POINTS_PER_SCALE: usize = 16;

/// Uniform cell-centered grid on the box Π [lo_i, hi_i].
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub n: Vec<usize>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl GridSpec {
    pub fn new(n: Vec<usize>, lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, KernelError> {
        if n.is_empty() || n.len() != lo.len() || n.len() != hi.len() {
            return Err(KernelError::Domain("axis counts disagree".into()));
        }
        for i in 0..n.len() {
            if n[i] == 0 || !(hi[i] > lo[i]) {
                return Err(KernelError::Domain(format!("axis {i}: {} cells on [{}, {}]", n[i], lo[i], hi[i])));
            }
        }
        Ok(GridSpec { n, lo, hi })
    }

    /// `points` cells on [−half, half] along each of `dim` axes.
    pub fn centered(dim: usize, points: usize, half: f64) -> Self {
        GridSpec { n: vec![points; dim], lo: vec![-half; dim], hi: vec![half; dim] }
    }

    pub fn dim(&self) -> usize {
        self.n.len()
    }

    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn h(&self, i: usize) -> f64 {
        (self.hi[i] - self.lo[i]) / self.n[i] as f64
    }

    pub fn coord(&self, i: usize, k: usize) -> f64 {
        self.lo[i] + (k as f64 + 0.5) * self.h(i)
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|i| self.h(i)).product()
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dim()];
        for i in (0..self.dim().saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.n[i + 1];
        }
        s
    }

    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for i in (0..self.dim()).rev() {
            idx[i] = flat % self.n[i];
            flat /= self.n[i];
        }
        idx
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.unflatten(flat).iter().enumerate().map(|(i, &k)| self.coord(i, k)).collect()
    }

    /// Cell indices whose centers lie in the open interval (a, b) on axis i.
    fn index_range(&self, i: usize, a: f64, b: f64) -> (usize, usize) {
        let h = self.h(i);
        let lo = ((a - self.lo[i]) / h - 0.5).floor().max(-1.0) as i64 + 1;
        let hi = ((b - self.lo[i]) / h - 0.5).ceil().min(self.n[i] as f64) as i64;
        (lo.clamp(0, self.n[i] as i64) as usize, hi.clamp(0, self.n[i] as i64) as usize)
    }
}

/// K_J = Σ_{|j|∞ ≤ J} ς_j^{(2^j)} as a pointwise function.
#[derive(Clone, Debug)]
pub struct DyadicKernel {
    pub family: BumpFamily,
    pub jmax: u32,
}

impl DyadicKernel {
    pub fn new(family: BumpFamily, jmax: u32) -> Result<Self, KernelError> {
        if jmax > family.jmax {
            return Err(KernelError::Params(format!("J = {jmax} exceeds the family's {}", family.jmax)));
        }
        Ok(DyadicKernel { family, jmax })
    }

    pub fn e(&self) -> &DilationSpec {
        &self.family.e
    }

    pub fn n(&self) -> usize {
        self.family.n()
    }

    /// (j, ς_j, per-axis scale 2^{j·e_i}) for every term of the sum.
    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &TensorBump, Vec<f64>)> + '_ {
        self.family
            .members
            .iter()
            .filter(move |(j, _)| j.iter().all(|&x| x <= self.jmax))
            .map(move |(j, b)| (j.as_slice(), b, axis_scales(j, &self.family.e)))
    }

    pub fn eval(&self, t: &[f64]) -> f64 {
        self.terms().map(|(j, b, _)| b.eval_dilated(t, j, &self.family.e)).sum()
    }
}

impl BumpFamily {
    /// Family of identically zero members: synthesizes the zero kernel.
    pub fn zero(e: &DilationSpec, jmax: u32, a: f64) -> Self {
        let r = a / (e.n_t() as f64).sqrt();
        let members: BTreeMap<Vec<u32>, TensorBump> = MultiIndex::all_in_box(e.nu(), jmax)
            .into_iter()
            .map(|j| (j.0, TensorBump { radius: vec![r; e.n_t()], terms: Vec::new() }))
            .collect();
        BumpFamily {
            params: BumpParams { k: 0, a, profile: Profile::Even },
            e: e.clone(),
            jmax,
            members,
            bound: FamilyBound { order: 4, value: 0.0, samples_per_axis: 0 },
        }
    }
}

#[derive(Clone, Debug)]
pub struct GridKernel {
    pub kernel: DyadicKernel,
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

/// One separable piece w Π_i g_i(t_i) with g_i tabulated on an index range.
struct Piece {
    w: f64,
    axes: Vec<(usize, Vec<f64>)>,
}

/// Samples K_J on the grid. Every axis must resolve the finest scale
/// 2^{−J e_i} with at least [`MIN_POINTS_PER_SCALE`] cells, and the grid must
/// contain the support box.
pub fn synth_kernel(fam: &BumpFamily, jmax: u32, grid: &GridSpec) -> Result<GridKernel, KernelError> {
    let kernel = DyadicKernel::new(fam.clone(), jmax)?;
    let n = fam.n();
    if grid.dim() != n {
        return Err(KernelError::Domain(format!("grid has {} axes, kernel lives on R^{n}", grid.dim())));
    }
    let r = fam.params.a / (n as f64).sqrt();
    let finest = axis_scales(&vec![jmax; fam.e.nu()], &fam.e);
    for i in 0..n {
        if grid.lo[i] > -r || grid.hi[i] < r {
            return Err(KernelError::Domain(format!("axis {i}: [{}, {}] misses the support |t| < {r}", grid.lo[i], grid.hi[i])));
        }
        let points = 2.0 * r / finest[i] / grid.h(i);
        if points < MIN_POINTS_PER_SCALE as f64 {
            return Err(KernelError::UnderResolved { axis: i, points, required: MIN_POINTS_PER_SCALE });
        }
    }
    let mut pieces = Vec::new();
    for (_, b, s) in kernel.terms() {
        let jac: f64 = s.iter().product();
        for (w, fs) in &b.terms {
            let axes = (0..n)
                .map(|i| {
                    let half = b.radius[i] / s[i];
                    let (k0, k1) = grid.index_range(i, -half, half);
                    let vals = (k0..k1).map(|k| fs[i].eval(grid.coord(i, k) * s[i] / b.radius[i])).collect();
                    (k0, vals)
                })
                .collect();
            pieces.push(Piece { w: w * jac, axes });
        }
    }
    let inner: usize = grid.n[1..].iter().product();
    let mut values = vec![0.0; grid.len()];
    values.par_chunks_mut(inner).enumerate().for_each(|(i0, row)| {
        for p in &pieces {
            let (k0, ref v0) = p.axes[0];
            if i0 < k0 || i0 >= k0 + v0.len() {
                continue;
            }
            let w0 = p.w * v0[i0 - k0];
            if n == 1 {
                row[0] += w0;
                continue;
            }
            let lens: Vec<usize> = p.axes[1..].iter().map(|(_, v)| v.len()).collect();
            if lens.iter().any(|&l| l == 0) {
                continue;
            }
            let mut idx = vec![0usize; n - 1];
            loop {
                let mut flat = 0;
                let mut w = w0;
                for (a, &k) in idx.iter().enumerate() {
                    let (ka, ref va) = p.axes[a + 1];
                    flat = flat * grid.n[a + 1] + ka + k;
                    w *= va[k];
                }
                row[flat] += w;
                if !odometer_bounded(&mut idx, &lens) {
                    break;
                }
            }
        }
    });
    Ok(GridKernel { kernel, grid: grid.clone(), values })
}

fn odometer_bounded(idx: &mut [usize], lens: &[usize]) -> bool {
    for a in (0..idx.len()).rev() {
        idx[a] += 1;
        if idx[a] < lens[a] {
            return true;
        }
        idx[a] = 0;
    }
    false
}

impl GridKernel {
    /// Tensor trapezoid (midpoint on the cell-centered grid) integral.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn to_dump(&self) -> GridDump {
        let fam = &self.kernel.family;
        let e: Vec<String> =
            fam.e.exponents().iter().map(|ei| ei.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")).collect();
        let profile = match fam.params.profile {
            Profile::Even => "even".to_string(),
            Profile::Odd => "odd".to_string(),
            Profile::Random { seed } => format!("random:{seed}"),
        };
        let res: Vec<String> = self.grid.n.iter().map(|x| x.to_string()).collect();
        GridDump {
            header: vec![
                ("N".into(), fam.n().to_string()),
                ("nu".into(), fam.e.nu().to_string()),
                ("e".into(), e.join(";")),
                ("a".into(), fam.params.a.to_string()),
                ("J".into(), self.kernel.jmax.to_string()),
                ("k".into(), fam.params.k.to_string()),
                ("profile".into(), profile),
                ("resolution".into(), res.join(" ")),
            ],
            shape: self.grid.n.clone(),
            domain: self.grid.lo.iter().zip(&self.grid.hi).map(|(a, b)| (*a, *b)).collect(),
            values: self.values.clone(),
        }
    }

    /// Rebuilds the family from the header; grid values are taken from the dump.
    pub fn from_dump(d: &GridDump) -> Result<Self, KernelError> {
        let need = |k: &str| d.get(k).ok_or_else(|| KernelError::Format(format!("missing header {k}")));
        let bad = |k: &str| KernelError::Format(format!("bad header {k}"));
        let e: Result<Vec<Vec<u32>>, _> =
            need("e")?.split(';').map(|r| r.split(',').map(|x| x.trim().parse::<u32>()).collect()).collect();
        let e = DilationSpec::new(e.map_err(|_| bad("e"))?).map_err(|err| KernelError::Format(err.to_string()))?;
        let a: f64 = need("a")?.parse().map_err(|_| bad("a"))?;
        let jmax: u32 = need("J")?.parse().map_err(|_| bad("J"))?;
        let k: u32 = need("k")?.parse().map_err(|_| bad("k"))?;
        let profile = match need("profile")? {
            "even" => Profile::Even,
            "odd" => Profile::Odd,
            p => match p.strip_prefix("random:").map(str::parse) {
                Some(Ok(seed)) => Profile::Random { seed },
                _ => return Err(bad("profile")),
            },
        };
        let fam = make_bump_family(BumpParams { k, a, profile }, jmax, &e)?;
        let grid = GridSpec::new(d.shape.clone(), d.domain.iter().map(|x| x.0).collect(), d.domain.iter().map(|x| x.1).collect())?;
        if grid.dim() != fam.n() {
            return Err(KernelError::Format("shape does not match N".into()));
        }
        Ok(GridKernel { kernel: DyadicKernel::new(fam, jmax)?, grid, values: d.values.clone() })
    }
}

/// sup_grid |∂^α K(t)| Π_μ ρ_μ(t)^{Q_μ + deg_μ α}, with ρ_μ the homogeneous
/// norm of the μ-th coordinate group.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundConstant {
    pub alpha: MultiIndex,
    pub constant: f64,
    pub at: Vec<f64>,
}

/// Measured size constants for each α with |α| ≤ 1; derivatives by central
/// differences, boundary cells of the differentiated axis excluded.
pub fn validate_product_bounds(k: &GridKernel, alphas: &[MultiIndex]) -> Result<Vec<BoundConstant>, KernelError> {
    let e = k.kernel.e();
    let n = e.n_t();
    let mut owner = vec![(0usize, 0u32); n];
    for (i, ei) in e.exponents().iter().enumerate() {
        let nz: Vec<usize> = (0..e.nu()).filter(|&m| ei[m] != 0).collect();
        if nz.len() != 1 {
            return Err(KernelError::NonProduct(format!("e_{} = {ei:?} is not pure", i + 1)));
        }
        owner[i] = (nz[0], ei[nz[0]]);
    }
    let g = &k.grid;
    let strides = g.strides();
    alphas
        .iter()
        .map(|alpha| {
            if alpha.len() != n || alpha.total() > 1 {
                return Err(KernelError::Params(format!("α = {alpha} must have N = {n} entries and order ≤ 1")));
            }
            let axis = alpha.0.iter().position(|&x| x == 1);
            let mut power = vec![0.0; e.nu()];
            for mu in 0..e.nu() {
                power[mu] = e.homogeneous_dim(mu) as f64;
            }
            if let Some(i) = axis {
                power[owner[i].0] += owner[i].1 as f64;
            }
            let best = (0..g.len())
                .into_par_iter()
                .filter_map(|flat| {
                    let idx = g.unflatten(flat);
                    let d = match axis {
                        None => k.values[flat],
                        Some(i) => {
                            if idx[i] == 0 || idx[i] + 1 == g.n[i] {
                                return None;
                            }
                            (k.values[flat + strides[i]] - k.values[flat - strides[i]]) / (2.0 * g.h(i))
                        }
                    };
                    let t = g.point(flat);
                    let mut rho = vec![0.0f64; e.nu()];
                    for i in 0..n {
                        let (mu, ei) = owner[i];
                        rho[mu] = rho[mu].max(t[i].abs().powf(1.0 / ei as f64));
                    }
                    let w: f64 = rho.iter().zip(&power).map(|(r, p)| r.powf(*p)).product();
                    Some(((d.abs() * w), flat))
                })
                .reduce(|| (0.0, usize::MAX), |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
            let at = if best.1 == usize::MAX { Vec::new() } else { g.point(best.1) };
            Ok(BoundConstant { alpha: alpha.clone(), constant: best.0, at })
        })
        .collect()
}

/// (max − min) / max over a sequence of positive measurements.
pub fn drift(v: &[f64]) -> f64 {
    let hi = v.iter().cloned().fold(f64::MIN, f64::max);
    let lo = v.iter().cloned().fold(f64::MAX, f64::min);
    if hi <= 0.0 {
        return 0.0;
    }
    (hi - lo) / hi
}
