use rayon::prelude::*;
use radon_kernels::{GridDump, GridSpec};

use crate::OperatorError;

/// A linear map between grid functions with an adjoint for power iteration.
pub trait LinearOp: Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn apply(&self, f: &[f64]) -> Vec<f64>;
    fn apply_adjoint(&self, g: &[f64]) -> Vec<f64>;
}

/// Compressed sparse rows, with the transpose kept for the adjoint.
#[derive(Clone, Debug)]
pub struct Csr {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<f64>,
    t_indptr: Vec<usize>,
    t_indices: Vec<usize>,
    t_data: Vec<f64>,
}

impl Csr {
    /// Rows given as sorted (column, value) lists.
    pub fn from_rows(ncols: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let nrows = rows.len();
        let mut indptr = Vec::with_capacity(nrows + 1);
        indptr.push(0);
        let nnz: usize = rows.iter().map(Vec::len).sum();
        let (mut indices, mut data) = (Vec::with_capacity(nnz), Vec::with_capacity(nnz));
        let mut counts = vec![0usize; ncols + 1];
        for r in &rows {
            for &(c, v) in r {
                indices.push(c);
                data.push(v);
                counts[c + 1] += 1;
            }
            indptr.push(indices.len());
        }
        for c in 0..ncols {
            counts[c + 1] += counts[c];
        }
        let t_indptr = counts.clone();
        let mut next = counts;
        let (mut t_indices, mut t_data) = (vec![0; nnz], vec![0.0; nnz]);
        for r in 0..nrows {
            for k in indptr[r]..indptr[r + 1] {
                let c = indices[k];
                t_indices[next[c]] = r;
                t_data[next[c]] = data[k];
                next[c] += 1;
            }
        }
        Csr { nrows, ncols, indptr, indices, data, t_indptr, t_indices, t_data }
    }

    pub fn identity(n: usize) -> Self {
        Csr::from_rows(n, (0..n).map(|i| vec![(i, 1.0)]).collect())
    }

    /// Replaces each value by the mean over consecutive blocks of `block` cells.
    pub fn block_average(n: usize, block: usize) -> Self {
        let rows = (0..n)
            .map(|i| {
                let b0 = i / block * block;
                let b1 = (b0 + block).min(n);
                (b0..b1).map(|c| (c, 1.0 / (b1 - b0) as f64)).collect()
            })
            .collect();
        Csr::from_rows(n, rows)
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.indptr[r]..self.indptr[r + 1]).map(move |k| (self.indices[k], self.data[k]))
    }
}

fn spmv(indptr: &[usize], indices: &[usize], data: &[f64], x: &[f64], nrows: usize) -> Vec<f64> {
    (0..nrows)
        .into_par_iter()
        .map(|r| (indptr[r]..indptr[r + 1]).map(|k| data[k] * x[indices[k]]).sum())
        .collect()
}

impl LinearOp for Csr {
    fn nrows(&self) -> usize {
        self.nrows
    }

    fn ncols(&self) -> usize {
        self.ncols
    }

    fn apply(&self, f: &[f64]) -> Vec<f64> {
        spmv(&self.indptr, &self.indices, &self.data, f, self.nrows)
    }

    fn apply_adjoint(&self, g: &[f64]) -> Vec<f64> {
        spmv(&self.t_indptr, &self.t_indices, &self.t_data, g, self.ncols)
    }
}

/// Multilinear interpolation stencil at y: up to 2^n (flat index, weight)
/// pairs, or None when y leaves the grid box.
pub fn interp_stencil(g: &GridSpec, y: &[f64], out: &mut Vec<(usize, f64)>) -> bool {
    out.clear();
    out.push((0, 1.0));
    let strides = g.strides();
    for i in 0..g.dim() {
        if !(y[i] >= g.lo[i] && y[i] <= g.hi[i]) {
            out.clear();
            return false;
        }
        let n = g.n[i];
        let s = ((y[i] - g.lo[i]) / g.h(i) - 0.5).clamp(0.0, (n - 1) as f64);
        let k0 = (s.floor() as usize).min(n.saturating_sub(2));
        let fr = if n == 1 { 0.0 } else { s - k0 as f64 };
        let len = out.len();
        for m in 0..len {
            let (idx, w) = out[m];
            out[m] = (idx + k0 * strides[i], w * (1.0 - fr));
            if n > 1 {
                out.push((idx + (k0 + 1) * strides[i], w * fr));
            }
        }
    }
    true
}

pub fn interpolate(g: &GridSpec, f: &[f64], y: &[f64]) -> Option<f64> {
    let mut st = Vec::with_capacity(1 << g.dim());
    interp_stencil(g, y, &mut st).then(|| st.iter().map(|&(k, w)| w * f[k]).sum())
}

/// Samples a function at the grid's cell centers.
pub fn sample(g: &GridSpec, f: impl Fn(&[f64]) -> f64 + Sync) -> Vec<f64> {
    (0..g.len()).into_par_iter().map(|k| f(&g.point(k))).collect()
}

/// ‖f‖_p with the cell-volume measure.
pub fn lp_norm(g: &GridSpec, f: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    }
    (f.iter().map(|v| v.abs().powf(p)).sum::<f64>() * g.cell_volume()).powf(1.0 / p)
}

pub fn function_dump(g: &GridSpec, f: &[f64], name: &str) -> GridDump {
    GridDump {
        header: vec![("kind".into(), "function".into()), ("name".into(), name.into()), ("n".into(), g.dim().to_string())],
        shape: g.n.clone(),
        domain: g.lo.iter().zip(&g.hi).map(|(a, b)| (*a, *b)).collect(),
        values: f.to_vec(),
    }
}

pub fn function_from_dump(d: &GridDump) -> Result<(GridSpec, Vec<f64>), OperatorError> {
    let g = GridSpec::new(d.shape.clone(), d.domain.iter().map(|x| x.0).collect(), d.domain.iter().map(|x| x.1).collect())?;
    Ok((g, d.values.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transpose_matches() {
        let a = Csr::from_rows(3, vec![vec![(0, 1.0), (2, 2.0)], vec![(1, 3.0)]]);
        assert_eq!(a.apply(&[1.0, 1.0, 1.0]), vec![3.0, 3.0]);
        assert_eq!(a.apply_adjoint(&[1.0, 2.0]), vec![1.0, 6.0, 2.0]);
    }

    #[test]
    fn interpolation_is_exact_on_affine_functions() {
        let g = GridSpec::centered(2, 10, 1.0);
        let f = sample(&g, |x| 2.0 * x[0] - x[1] + 0.5);
        let y = [0.123, -0.456];
        assert!((interpolate(&g, &f, &y).unwrap() - (2.0 * y[0] - y[1] + 0.5)).abs() < 1e-12);
        assert!(interpolate(&g, &f, &[1.5, 0.0]).is_none());
    }
}
