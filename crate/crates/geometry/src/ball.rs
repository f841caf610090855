use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use radon_algebra::CompiledPoly;
use radon_lie::WeightedField;

use crate::GeometryError;

#[derive(Clone, Debug)]
pub struct BallParams {
    pub paths: usize,
    pub segments: usize,
    pub steps_per_segment: usize,
    /// Total integration time (the unit-time ball uses 1).
    pub horizon: f64,
    /// Control speed bound actually used (< 1).
    pub speed: f64,
    /// Coordinate box (per axis half-width around the center) outside which paths are discarded.
    pub domain_radius: f64,
    pub seed: u64,
    pub keep_controls: bool,
}

impl Default for BallParams {
    fn default() -> Self {
        BallParams {
            paths: 10_000,
            segments: 32,
            steps_per_segment: 8,
            horizon: 1.0,
            speed: 0.999,
            domain_radius: 10.0,
            seed: 0,
            keep_controls: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ControlKind {
    Constant,
    PiecewiseRandom,
    BangBang,
}

#[derive(Clone, Debug)]
pub struct ControlPath {
    pub kind: ControlKind,
    /// One coefficient vector a(t) ∈ ℝ^q per segment, |a| < 1.
    pub segments: Vec<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct BallSample {
    pub center: Vec<f64>,
    pub delta: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub controls: Vec<ControlPath>,
    /// max_p |p_i − x₀_i| per axis.
    pub extents: Vec<f64>,
    pub discarded: usize,
}

impl BallSample {
    /// One point per line, whitespace separated.
    pub fn write_cloud<W: Write>(&self, mut w: W) -> io::Result<()> {
        for p in &self.points {
            let s: Vec<String> = p.iter().map(|v| format!("{v:.12e}")).collect();
            writeln!(w, "{}", s.join(" "))?;
        }
        Ok(())
    }
}

fn unit_direction(rng: &mut ChaCha8Rng, q: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..q).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 && n <= 1.0 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

fn make_control(rng: &mut ChaCha8Rng, index: usize, q: usize, segs: usize, speed: f64) -> ControlPath {
    // The first 2q paths are the signed coordinate directions.
    if index < 2 * q {
        let mut a = vec![0.0; q];
        a[index / 2] = if index % 2 == 0 { speed } else { -speed };
        return ControlPath { kind: ControlKind::Constant, segments: vec![a; segs] };
    }
    match rng.gen_range(0..3) {
        0 => {
            let d = unit_direction(rng, q);
            let a: Vec<f64> = d.iter().map(|x| x * speed).collect();
            ControlPath { kind: ControlKind::Constant, segments: vec![a; segs] }
        }
        1 => {
            let segments = (0..segs)
                .map(|_| {
                    let d = unit_direction(rng, q);
                    let r = speed * rng.gen_range(0.0f64..1.0).powf(1.0 / q as f64);
                    d.iter().map(|x| x * r).collect()
                })
                .collect();
            ControlPath { kind: ControlKind::PiecewiseRandom, segments }
        }
        _ => {
            // Blocks of signed coordinate directions.
            let mut segments = Vec::with_capacity(segs);
            while segments.len() < segs {
                let len = rng.gen_range(1..=segs / 2).min(segs - segments.len());
                let mut a = vec![0.0; q];
                a[rng.gen_range(0..q)] = if rng.gen_bool(0.5) { speed } else { -speed };
                for _ in 0..len {
                    segments.push(a.clone());
                }
            }
            ControlPath { kind: ControlKind::BangBang, segments }
        }
    }
}

struct Scaled {
    fields: Vec<Vec<CompiledPoly>>,
    scale: Vec<f64>,
}

impl Scaled {
    fn rhs(&self, a: &[f64], x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for ((f, s), aj) in self.fields.iter().zip(&self.scale).zip(a) {
            let w = s * aj;
            if w == 0.0 {
                continue;
            }
            for (o, p) in out.iter_mut().zip(f) {
                *o += w * p.eval(x);
            }
        }
    }
}

/// Endpoint of the path x' = Σ a_j δ^{d_j} X_j(x) from x₀; `None` on escape.
fn integrate(sc: &Scaled, x0: &[f64], ctrl: &ControlPath, p: &BallParams) -> Option<Vec<f64>> {
    let n = x0.len();
    let h = p.horizon / (ctrl.segments.len() * p.steps_per_segment) as f64;
    let mut x = x0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    for a in &ctrl.segments {
        for _ in 0..p.steps_per_segment {
            sc.rhs(a, &x, &mut k1);
            for i in 0..n {
                tmp[i] = x[i] + 0.5 * h * k1[i];
            }
            sc.rhs(a, &tmp, &mut k2);
            for i in 0..n {
                tmp[i] = x[i] + 0.5 * h * k2[i];
            }
            sc.rhs(a, &tmp, &mut k3);
            for i in 0..n {
                tmp[i] = x[i] + h * k3[i];
            }
            sc.rhs(a, &tmp, &mut k4);
            for i in 0..n {
                x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            if x.iter().zip(x0).any(|(v, c)| !v.is_finite() || (v - c).abs() > p.domain_radius) {
                return None;
            }
        }
    }
    Some(x)
}

/// δ^d = Π_μ δ_μ^{d_μ} (with 0⁰ = 1).
pub fn delta_power(delta: &[f64], d: &[u32]) -> f64 {
    delta.iter().zip(d).map(|(x, &e)| if e == 0 { 1.0 } else { x.powi(e as i32) }).product()
}

/// Monte-Carlo inner approximation of the ball B_{(X,d)}(x₀, δ).
pub fn cc_ball_sample(fields: &[WeightedField], x0: &[f64], delta: &[f64], p: &BallParams) -> Result<BallSample, GeometryError> {
    let n = x0.len();
    if fields.iter().any(|w| w.n() != n) {
        return Err(GeometryError::Dimension("field dimension differs from the center".into()));
    }
    if fields.iter().any(|w| w.nu() != delta.len()) {
        return Err(GeometryError::Dimension("δ has the wrong number of parameters".into()));
    }
    if delta.iter().any(|d| !(0.0..=1.0).contains(d)) {
        return Err(GeometryError::Dimension("δ must lie in [0,1]^ν".into()));
    }
    let q = fields.len();
    let sc = Scaled {
        fields: fields.iter().map(|w| w.field.compile()).collect(),
        scale: fields.iter().map(|w| delta_power(delta, w.degree())).collect(),
    };
    let results: Vec<(Option<Vec<f64>>, ControlPath)> = (0..p.paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
            rng.set_stream(i as u64);
            let ctrl = make_control(&mut rng, i, q.max(1), p.segments.max(1), p.speed);
            let end = if q == 0 { Some(x0.to_vec()) } else { integrate(&sc, x0, &ctrl, p) };
            (end, ctrl)
        })
        .collect();
    let mut points = Vec::new();
    let mut controls = Vec::new();
    let mut discarded = 0;
    let mut extents = vec![0.0f64; n];
    for (end, ctrl) in results {
        match end {
            Some(pt) => {
                for (e, (v, c)) in extents.iter_mut().zip(pt.iter().zip(x0)) {
                    *e = e.max((v - c).abs());
                }
                points.push(pt);
                if p.keep_controls {
                    controls.push(ctrl);
                }
            }
            None => discarded += 1,
        }
    }
    Ok(BallSample { center: x0.to_vec(), delta: delta.to_vec(), points, controls, extents, discarded })
}

/// Least-squares slope of log y against log x.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
