//! Problem configuration: TOML, one section per stage, every key optional.
//! The resolved values (defaults filled in) are echoed into each report.

use serde::{Deserialize, Serialize};

use radon_algebra::{DilationSpec, TruncationPolicy};
use radon_kernels::Profile;
use radon_surface::{corpus, Condition, Surface};

use crate::dsl::{parse_gamma_dsl, GammaContext};
use crate::CliError;

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemConfig {
    pub seed: u64,
    pub truncation: TruncationSection,
    pub surface: SurfaceSection,
    pub conditions: ConditionsSection,
    pub divide: DivideSection,
    pub kernel: KernelSection,
    pub norm: NormSection,
    pub ccball: BallSection,
    pub maximal: MaximalSection,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct TruncationSection {
    pub lt: u32,
    pub lx: u32,
    pub tolerance: f64,
}

impl Default for TruncationSection {
    fn default() -> Self {
        TruncationSection { lt: 3, lx: 3, tolerance: 1e-10 }
    }
}

/// Exactly one of `gamma`, `series` or `corpus`.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SurfaceSection {
    /// Surface expression, series or exp form.
    pub gamma: Option<String>,
    /// One expression per component of γ.
    pub series: Option<Vec<String>>,
    /// "x+t", "x-st", "heisenberg" or "random:<seed>".
    pub corpus: Option<String>,
    /// N; inferred from the expression when absent.
    pub nt: Option<usize>,
    /// n; inferred when absent.
    pub n: Option<usize>,
    /// e_i ∈ ℕ^ν, one row per t-coordinate; default one parameter per coordinate.
    pub dilations: Option<Vec<Vec<u32>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ConditionsSection {
    /// |d|₁ cutoff of the closures.
    pub cutoff: u32,
    pub check: Vec<String>,
    /// Point x₀ for control checks, as rationals; default the origin.
    pub x0: Option<Vec<String>>,
}

impl Default for ConditionsSection {
    fn default() -> Self {
        ConditionsSection { cutoff: 4, check: Condition::ALL.iter().map(|c| c.to_string()).collect(), x0: None }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct DivideSection {
    /// N and n of the dividend and generators (polynomials in t1..tN, x1..xn).
    pub nt: usize,
    pub n: usize,
    pub dividend: Vec<String>,
    pub generators: Vec<Vec<String>>,
    /// Seed for the order weights; default the top-level seed.
    pub order_seed: Option<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct KernelSection {
    /// "odd", "even" or "random".
    pub profile: String,
    pub k: u32,
    /// Support radius of every ς_j.
    pub a: f64,
    pub jmin: u32,
    pub jmax: u32,
    /// Grid points per axis on [−half_width, half_width]^N.
    pub points: usize,
    pub half_width: f64,
    /// Derivative orders for the size constants.
    pub alphas: Option<Vec<Vec<u32>>>,
    /// Dilations of the kernel; default the surface's, else ℝ with ν = 1.
    pub dilations: Option<Vec<Vec<u32>>>,
}

impl Default for KernelSection {
    fn default() -> Self {
        KernelSection {
            profile: "odd".into(),
            k: 6,
            a: 1.0,
            jmin: 6,
            jmax: 8,
            points: 4096,
            half_width: 1.0,
            alphas: None,
            dilations: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct NormSection {
    pub p: f64,
    /// x grid points per axis on [−1, 1]^n.
    pub points: usize,
    pub t_points: usize,
    pub t_resolve: f64,
    pub jmin: u32,
    pub jmax: u32,
    pub profile: String,
    /// Per-axis box radius of the kernel support; the kernel's a is this times √N.
    pub box_radius: f64,
    pub trials: usize,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for NormSection {
    fn default() -> Self {
        NormSection {
            p: 2.0,
            points: 1024,
            t_points: 16,
            t_resolve: 1.0,
            jmin: 2,
            jmax: 6,
            profile: "odd".into(),
            box_radius: 0.5,
            trials: 1,
            max_iter: 3000,
            tol: 1e-7,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct BallSection {
    /// Fields as {degree = [...], field = "..."}; default the nonzero pure
    /// fields of the surface.
    pub fields: Option<Vec<FieldEntry>>,
    pub n: Option<usize>,
    pub center: Option<Vec<f64>>,
    /// One δ ∈ [0,1]^ν per ball.
    pub deltas: Vec<Vec<f64>>,
    pub paths: usize,
}

impl Default for BallSection {
    fn default() -> Self {
        BallSection { fields: None, n: None, center: None, deltas: vec![vec![0.05], vec![0.1], vec![0.2], vec![0.4]], paths: 10_000 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FieldEntry {
    pub degree: Vec<u32>,
    pub field: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct MaximalSection {
    /// x grid points per axis on [−1, 1]^n; default 256, 40, 14 for n = 1, 2, ≥ 3.
    pub points: Option<usize>,
    pub t_points: usize,
    /// Box radius of the averages; halved until every image stays on the grid.
    pub a: f64,
    pub jmax: u32,
    /// "series" or "numeric".
    pub flow: String,
    pub allow_saturated: bool,
}

impl Default for MaximalSection {
    fn default() -> Self {
        MaximalSection { points: None, t_points: 8, a: 0.5, jmax: 2, flow: "series".into(), allow_saturated: false }
    }
}

pub fn parse_config(text: &str) -> Result<ProblemConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::new("config", e.to_string()))
}

fn cfg_err(msg: impl Into<String>) -> CliError {
    CliError::new("config", msg)
}

pub fn parse_profile(s: &str, seed: u64) -> Result<Profile, CliError> {
    match s {
        "odd" => Ok(Profile::Odd),
        "even" => Ok(Profile::Even),
        "random" => Ok(Profile::Random { seed }),
        _ => Err(cfg_err(format!("unknown kernel profile '{s}' (odd, even, random)"))),
    }
}

pub fn dilations(rows: &[Vec<u32>]) -> Result<DilationSpec, CliError> {
    DilationSpec::new(rows.to_vec()).map_err(|e| cfg_err(format!("dilations: {e}")))
}

impl ProblemConfig {
    pub fn policy(&self) -> Result<TruncationPolicy, CliError> {
        let t = &self.truncation;
        TruncationPolicy::new(t.lt, t.lx, t.tolerance).map_err(|e| cfg_err(format!("truncation: {e}")))
    }

    pub fn has_surface(&self) -> bool {
        let s = &self.surface;
        s.gamma.is_some() || s.series.is_some() || s.corpus.is_some()
    }

    /// The configured surface, with dimensions checked against the declared ones.
    pub fn surface(&self) -> Result<Surface, CliError> {
        let s = &self.surface;
        let pol = self.policy()?;
        let sources = [s.gamma.is_some(), s.series.is_some(), s.corpus.is_some()].iter().filter(|&&b| b).count();
        if sources != 1 {
            return Err(cfg_err("[surface] needs exactly one of gamma, series, corpus"));
        }
        let dil = s.dilations.as_deref().map(dilations).transpose()?;
        let g = if let Some(name) = &s.corpus {
            let g = match name.as_str() {
                "x+t" => corpus::x_plus_t(pol),
                "x-st" => corpus::x_minus_st(pol),
                "heisenberg" => corpus::heisenberg(pol),
                other => match other.strip_prefix("random:").and_then(|v| v.parse::<u64>().ok()) {
                    Some(seed) => corpus::random_polynomial(seed, pol),
                    None => return Err(cfg_err(format!("unknown corpus surface '{other}'"))),
                },
            };
            if dil.as_ref().is_some_and(|d| *d != g.dilations) {
                return Err(cfg_err("dilations conflict with the corpus surface"));
            }
            g
        } else {
            let text = match (&s.gamma, &s.series) {
                (Some(g), _) => g.clone(),
                (_, Some(v)) => format!("[{}]", v.join(", ")),
                _ => unreachable!("one source"),
            };
            let cx = GammaContext { nt: s.nt, n: s.n, dilations: dil, policy: pol };
            parse_gamma_dsl(&text, &cx).map_err(|e| CliError::new("dsl", format!("surface: {e}")))?
        };
        if s.nt.is_some_and(|nt| nt != g.nt()) || s.n.is_some_and(|n| n != g.n()) {
            return Err(cfg_err(format!("declared dimensions disagree with the surface (N = {}, n = {})", g.nt(), g.n())));
        }
        Ok(g)
    }

    pub fn conditions(&self) -> Result<Vec<Condition>, CliError> {
        self.conditions.check.iter().map(|c| c.parse::<Condition>().map_err(|e| cfg_err(e.to_string()))).collect()
    }

    pub fn kernel_dilations(&self) -> Result<DilationSpec, CliError> {
        if let Some(rows) = &self.kernel.dilations {
            return dilations(rows);
        }
        if self.has_surface() {
            return Ok(self.surface()?.dilations);
        }
        Ok(DilationSpec::isotropic(1))
    }

    /// Cross-section consistency that does not need any computation.
    pub fn validate(&self) -> Result<(), CliError> {
        self.policy()?;
        self.conditions()?;
        parse_profile(&self.kernel.profile, self.seed)?;
        parse_profile(&self.norm.profile, self.seed)?;
        let k = &self.kernel;
        if k.jmin > k.jmax || k.points == 0 || !(k.a > 0.0) || !(k.half_width > 0.0) {
            return Err(cfg_err("[kernel] needs jmin ≤ jmax, points > 0, a > 0, half_width > 0"));
        }
        let nm = &self.norm;
        if nm.jmin > nm.jmax || nm.points == 0 || !(nm.p >= 1.0) || !(nm.box_radius > 0.0) {
            return Err(cfg_err("[norm] needs jmin ≤ jmax, points > 0, p ≥ 1, box_radius > 0"));
        }
        if !matches!(self.maximal.flow.as_str(), "series" | "numeric") {
            return Err(cfg_err(format!("[maximal] flow must be series or numeric, got '{}'", self.maximal.flow)));
        }
        if self.has_surface() {
            let g = self.surface()?;
            if let Some(x0) = &self.conditions.x0 {
                if x0.len() != g.n() {
                    return Err(cfg_err(format!("[conditions] x0 has {} entries, n = {}", x0.len(), g.n())));
                }
            }
            if let Some(c) = &self.ccball.center {
                if self.ccball.fields.is_none() && c.len() != g.n() {
                    return Err(cfg_err(format!("[ccball] center has {} entries, n = {}", c.len(), g.n())));
                }
            }
        }
        if let Some(rows) = &k.dilations {
            dilations(rows)?;
        }
        let d = &self.divide;
        if d.generators.iter().chain(std::iter::once(&d.dividend)).any(|g| !d.dividend.is_empty() && g.len() != d.dividend.len()) {
            return Err(cfg_err("[divide] generators and dividend have different numbers of components"));
        }
        Ok(())
    }
}
