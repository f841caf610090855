use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::sparse::LinearOp;

#[derive(Clone, Debug)]
pub struct NormParams {
    /// Independent random starts; the best ratio wins.
    pub trials: usize,
    pub max_iter: usize,
    /// Stop when the ratio changes by less than tol (relative).
    pub tol: f64,
    pub seed: u64,
}

impl Default for NormParams {
    fn default() -> Self {
        NormParams { trials: 3, max_iter: 3000, tol: 1e-9, seed: 7 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormEstimate {
    pub estimate: f64,
    pub iterations: usize,
    /// Last relative change of the ratio.
    pub residual: f64,
    pub converged: bool,
    /// ‖Af‖_p/‖f‖_p is attained by an explicit f, so the estimate never exceeds the true norm.
    pub lower_bound: bool,
}

fn pnorm(v: &[f64], p: f64) -> f64 {
    if p == 2.0 {
        return v.iter().map(|x| x * x).sum::<f64>().sqrt();
    }
    v.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// sign(v)|v|^{p−1}
fn duality(v: &[f64], p: f64) -> Vec<f64> {
    if p == 2.0 {
        return v.to_vec();
    }
    v.iter().map(|x| x.signum() * x.abs().powf(p - 1.0)).collect()
}

/// ‖A‖_{p→p} by Boyd's power method (plain power iteration on AᵀA when p = 2).
///
/// Domain and range share one grid, so the cell-volume factors cancel and the
/// counting norm is used.
pub fn estimate_opnorm(a: &dyn LinearOp, p: f64, params: &NormParams) -> NormEstimate {
    assert!(p > 1.0 && p.is_finite(), "1 < p < ∞");
    let q = p / (p - 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut best = NormEstimate { estimate: 0.0, iterations: 0, residual: f64::INFINITY, converged: false, lower_bound: true };
    for _ in 0..params.trials.max(1) {
        let mut x: Vec<f64> = (0..a.ncols()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let nx = pnorm(&x, p);
        x.iter_mut().for_each(|v| *v /= nx);
        let (mut ratio, mut res, mut it, mut conv) = (0.0, f64::INFINITY, 0, false);
        while it < params.max_iter {
            it += 1;
            let y = a.apply(&x);
            let r = pnorm(&y, p);
            if r == 0.0 {
                ratio = 0.0;
                res = 0.0;
                conv = true;
                break;
            }
            res = (r - ratio).abs() / r;
            ratio = r;
            if res < params.tol {
                conv = true;
                break;
            }
            let z = a.apply_adjoint(&duality(&y, p));
            let mut xn = duality(&z, q);
            let n = pnorm(&xn, p);
            if n == 0.0 {
                conv = true;
                break;
            }
            xn.iter_mut().for_each(|v| *v /= n);
            x = xn;
        }
        if ratio > best.estimate || best.iterations == 0 {
            best = NormEstimate { estimate: ratio, iterations: it, residual: res, converged: conv, lower_bound: true };
        }
    }
    best
}

/// One line of a norm table.
#[derive(Clone, Debug)]
pub struct NormRow {
    pub label: String,
    pub j: u32,
    pub estimate: NormEstimate,
}

pub fn write_norm_table(rows: &[NormRow], mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "label\tJ\tnorm\titerations\tresidual\tconverged")?;
    for r in rows {
        let e = &r.estimate;
        writeln!(w, "{}\t{}\t{:.10e}\t{}\t{:.3e}\t{}", r.label, r.j, e.estimate, e.iterations, e.residual, e.converged)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::Csr;

    #[test]
    fn diagonal_norm() {
        let a = Csr::from_rows(3, vec![vec![(0, 1.0)], vec![(1, -3.0)], vec![(2, 2.0)]]);
        for p in [1.5, 2.0, 4.0] {
            let e = estimate_opnorm(&a, p, &NormParams::default());
            assert!((e.estimate - 3.0).abs() < 1e-6, "p = {p}: {e:?}");
        }
    }
}
