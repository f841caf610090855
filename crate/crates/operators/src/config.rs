use radon_algebra::{CompiledPoly, Poly};
use radon_kernels::GridSpec;

/// Nonnegative cutoff on ℝ^n.
#[derive(Clone, Debug, PartialEq)]
pub enum Cutoff {
    One,
    /// exp(1 − 1/(1 − |x−c|²/r²)) inside the ball, 0 outside; equals 1 at c.
    Bump { center: Vec<f64>, radius: f64 },
    /// 1 on |x−c| ≤ inner, smooth decay to 0 at |x−c| = outer.
    Plateau { center: Vec<f64>, inner: f64, outer: f64 },
}

fn smooth_step(u: f64) -> f64 {
    // 0 for u ≤ 0, 1 for u ≥ 1, C^∞ in between
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / u).exp();
    let b = (-1.0 / (1.0 - u)).exp();
    a / (a + b)
}

fn dist(x: &[f64], c: &[f64]) -> f64 {
    if c.is_empty() {
        return x.iter().map(|v| v * v).sum::<f64>().sqrt();
    }
    x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

impl Cutoff {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Cutoff::One => 1.0,
            Cutoff::Bump { center, radius } => {
                let q = dist(x, center) / radius;
                if q >= 1.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / (1.0 - q * q)).exp()
                }
            }
            Cutoff::Plateau { center, inner, outer } => 1.0 - smooth_step((dist(x, center) - inner) / (outer - inner)),
        }
    }

    pub fn sup(&self) -> f64 {
        1.0
    }

    /// Radius of a ball about the center containing the support.
    pub fn support_radius(&self) -> f64 {
        match self {
            Cutoff::One => f64::INFINITY,
            Cutoff::Bump { radius, .. } => *radius,
            Cutoff::Plateau { outer, .. } => *outer,
        }
    }

    fn center(&self) -> Option<&[f64]> {
        match self {
            Cutoff::One => None,
            Cutoff::Bump { center, .. } | Cutoff::Plateau { center, .. } => Some(center),
        }
    }
}

/// σ(t) = height · (1 − |t|²/a²)² on B^N(a).
#[derive(Clone, Debug, PartialEq)]
pub struct Sigma {
    pub height: f64,
    pub a: f64,
}

impl Sigma {
    pub fn eval(&self, t: &[f64]) -> f64 {
        let q: f64 = t.iter().map(|v| v * v).sum::<f64>() / (self.a * self.a);
        if q >= 1.0 {
            0.0
        } else {
            self.height * (1.0 - q) * (1.0 - q)
        }
    }
}

#[derive(Clone, Debug)]
pub struct OperatorConfig {
    pub psi1: Cutoff,
    pub psi2: Cutoff,
    pub psi0: Cutoff,
    /// κ(t, x), variables t then x.
    pub kappa: Option<Poly>,
    /// Box |t|∞ < a for the maximal averages.
    pub a: f64,
    pub sigma: Sigma,
    pub x_grid: GridSpec,
    /// Midpoint nodes per axis for each dyadic scale (T) or the box (M).
    pub t_points: usize,
    /// Refine each scale's t nodes until neighbouring images γ_t(x) are at
    /// most this many x cells apart; 0 keeps exactly `t_points`.
    pub t_resolve: f64,
    pub p: f64,
}

impl OperatorConfig {
    /// x ∈ [−1, 1]^n with `points` cells per axis; ψ₁ ≡ 1 on |x| ≤ 0.3 and 0
    /// beyond 0.4, ψ₀ a bump of radius 0.4, ψ₂ ≡ 1 on |x| ≤ 0.7 and 0 beyond
    /// 0.95, a = 0.5.
    pub fn standard(n: usize, points: usize) -> Self {
        let c = vec![0.0; n];
        OperatorConfig {
            psi1: Cutoff::Plateau { center: c.clone(), inner: 0.3, outer: 0.4 },
            psi2: Cutoff::Plateau { center: c.clone(), inner: 0.7, outer: 0.95 },
            psi0: Cutoff::Bump { center: c, radius: 0.4 },
            kappa: None,
            a: 0.5,
            sigma: Sigma { height: 2.0, a: 0.5 },
            x_grid: GridSpec::centered(n, points, 1.0),
            t_points: 16,
            t_resolve: 1.0,
            p: 2.0,
        }
    }

    pub fn n(&self) -> usize {
        self.x_grid.dim()
    }

    /// ψ₂ ≡ 1 on a neighborhood of supp ψ₁ (checked for concentric cutoffs).
    pub fn psi2_covers_psi1(&self) -> bool {
        match (&self.psi2, &self.psi1) {
            (Cutoff::One, _) => true,
            (Cutoff::Plateau { inner, .. }, p1) => {
                let same = match (self.psi2.center(), p1.center()) {
                    (Some(a), Some(b)) => a == b,
                    _ => false,
                };
                same && *inner > p1.support_radius()
            }
            _ => false,
        }
    }

    pub(crate) fn kappa_compiled(&self) -> Option<CompiledPoly> {
        self.kappa.as_ref().map(|k| k.compile())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_values() {
        let b = Cutoff::Bump { center: vec![0.0], radius: 0.5 };
        assert_eq!(b.eval(&[0.0]), 1.0);
        assert_eq!(b.eval(&[0.5]), 0.0);
        let p = Cutoff::Plateau { center: vec![0.0], inner: 0.5, outer: 1.0 };
        assert_eq!(p.eval(&[0.3]), 1.0);
        assert_eq!(p.eval(&[1.2]), 0.0);
        assert!((p.eval(&[0.75]) - 0.5).abs() < 1e-12);
        assert!(Sigma { height: 2.0, a: 1.0 }.eval(&[0.2]) >= 1.0);
    }

    #[test]
    fn standard_config_nests_cutoffs() {
        assert!(OperatorConfig::standard(1, 64).psi2_covers_psi1());
    }
}
