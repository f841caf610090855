use num_bigint::BigInt;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use radon_algebra::{format_q, parse_q, JetSeries, MultiIndex, Q};
use radon_geometry::{cc_ball_sample, loglog_slope, BallParams, Status};
use radon_kernels::{drift, make_bump_family, synth_kernel, validate_product_bounds, BumpParams, DyadicKernel, GridSpec};
use radon_lie::{hoermander_check, lie_closure, Flavor, WeightedField};
use radon_operators::{
    assemble_t, build_wj, embed_scale, estimate_opnorm, eval_maximal, eval_maximal_family, reduce_maximal_pipeline,
    wj_taylor_identity, DyadicFamilySpec, FlowMode, MaximalMode, NormParams, OperatorConfig, OperatorError,
    PipelineOptions, Scale, SeriesMap,
};
use radon_prep::{
    division_residual, draw_order_weights, galligo_divide, normalization_holds, reconstruct, taylor_prepare, window_monomials,
};
use radon_surface::{
    check_condition, extract_exp_fields, gamma_to_w, partition_pure, w_to_gamma, CheckParams, NumericFlow, PartEntry, Surface,
};

use crate::config::{parse_profile, ProblemConfig};
use crate::dsl::{parse_field, parse_poly, print_surface};
use crate::report::{status_text, Report, Table, VerdictRecord};
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Analyze,
    Prep,
    Divide,
    Lie,
    Control,
    Kernel,
    Norm,
    Ccball,
    Maximal,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Prep => "prep",
            Command::Divide => "divide",
            Command::Lie => "lie",
            Command::Control => "control",
            Command::Kernel => "kernel",
            Command::Norm => "norm",
            Command::Ccball => "ccball",
            Command::Maximal => "maximal",
        }
    }
}

fn stage<E: std::fmt::Display>(name: &'static str) -> impl Fn(E) -> CliError {
    move |e| CliError::new(name, e.to_string())
}

fn alpha_text(a: &MultiIndex) -> String {
    format!("({})", a.0.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
}

fn f64_text(v: f64) -> String {
    format!("{v:e}")
}

/// Runs one stage on a validated configuration. `config_text` is hashed into
/// the provenance.
pub fn run_pipeline(cfg: &ProblemConfig, config_text: &str, cmd: Command) -> Result<Report, CliError> {
    cfg.validate()?;
    let mut r = Report::new(cmd.name(), cfg, config_text);
    match cmd {
        Command::Analyze => analyze(cfg, &mut r, true)?,
        Command::Control => analyze(cfg, &mut r, false)?,
        Command::Prep => prep(cfg, &mut r)?,
        Command::Divide => divide(cfg, &mut r)?,
        Command::Lie => lie(cfg, &mut r)?,
        Command::Kernel => kernel(cfg, &mut r)?,
        Command::Norm => norm(cfg, &mut r)?,
        Command::Ccball => ccball(cfg, &mut r)?,
        Command::Maximal => maximal(cfg, &mut r)?,
    }
    Ok(r)
}

fn surface_summary(g: &Surface) -> Value {
    json!({
        "gamma": print_surface(g),
        "series": g.series().to_string(),
        "N": g.nt(),
        "n": g.n(),
        "nu": g.nu(),
        "dilations": g.dilations.to_string(),
    })
}

fn part_json(entries: &[PartEntry]) -> Value {
    Value::Array(
        entries
            .iter()
            .map(|e| json!({ "alpha": alpha_text(&e.alpha), "degree": e.field.degree(), "zero": e.zero, "field": e.field.field.render() }))
            .collect(),
    )
}

fn analyze(cfg: &ProblemConfig, r: &mut Report, full: bool) -> Result<(), CliError> {
    let g = cfg.surface()?;
    let mut results = surface_summary(&g);
    if full {
        let w = gamma_to_w(&g).map_err(stage("analyze"))?;
        if w.is_saturated() {
            r.warnings.push("W is x-saturated at the configured truncation; identities hold in the window only".into());
        }
        let fields = extract_exp_fields(&g).map_err(stage("analyze"))?;
        let mut t = Table::new("exp_fields", &["alpha", "degree", "field"]);
        for (a, wf) in &fields {
            t.push(vec![alpha_text(a), format!("{:?}", wf.degree()), wf.field.render()]);
        }
        r.tables.push(t);
        let (p, n) = partition_pure(&fields, &g.dilations, g.n(), cfg.truncation.lt).map_err(stage("analyze"))?;
        results["W"] = json!(w.w.to_string());
        results["W_saturated"] = json!(w.is_saturated());
        results["pure"] = part_json(&p);
        results["non_pure"] = part_json(&n);
        results["non_pure_nonzero"] = json!(n.iter().filter(|e| !e.zero).count());
    }
    let mut params = CheckParams::new(g.n(), cfg.conditions.cutoff);
    params.control.seed = cfg.seed;
    if let Some(x0) = &cfg.conditions.x0 {
        params.control.x0 = x0.iter().map(|s| parse_q(s).map_err(stage("config"))).collect::<Result<_, _>>()?;
    }
    let mut summary = serde_json::Map::new();
    for c in cfg.conditions()? {
        let v = check_condition(&g, c, &params).map_err(stage("control"))?;
        if v.status == Status::Unknown {
            let why = v.notes.first().cloned().unwrap_or_default();
            r.warnings.push(format!("{c}: Unknown at cutoff {}, L_t = {}, L_x = {}. {why}", v.cutoff, v.lt, v.lx));
        }
        summary.insert(c.to_string(), json!(status_text(v.status)));
        r.verdicts.push(VerdictRecord::of(&v));
    }
    results["conditions"] = Value::Object(summary);
    r.results = results;
    Ok(())
}

fn prep(cfg: &ProblemConfig, r: &mut Report) -> Result<(), CliError> {
    let g = cfg.surface()?;
    let w = gamma_to_w(&g).map_err(stage("prep"))?;
    let p = taylor_prepare(&w.w).map_err(stage("prep"))?;
    if p.saturated {
        r.warnings.push("the prepared series is x-saturated".into());
    }
    let mut t = Table::new("preparation", &["k", "alpha", "c", "f_alpha"]);
    for (k, term) in p.terms.iter().enumerate() {
        let f: Vec<String> = term.f_alpha.iter().map(|q| q.render(&|i| format!("x{}", i + 1))).collect();
        t.push(vec![(k + 1).to_string(), alpha_text(&term.alpha), term.c.to_string(), format!("[{}]", f.join(", "))]);
    }
    r.tables.push(t);
    let mut out = surface_summary(&g);
    out["W"] = json!(w.w.to_string());
    out["terms"] = json!(p.terms.len());
    out["coeff_degree"] = json!(p.coeff_degree);
    out["normalization_holds"] = json!(normalization_holds(&p));
    out["reconstruction_exact"] = json!(reconstruct(&p, &w.w) == w.w);
    r.results = out;
    Ok(())
}

fn series_from(comps: &[String], nt: usize, n: usize, cfg: &ProblemConfig) -> Result<JetSeries, CliError> {
    let polys = comps
        .iter()
        .map(|c| parse_poly(c, nt, n).map_err(|e| CliError::new("dsl", format!("'{c}': {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    JetSeries::new(nt, n, cfg.policy()?, polys).map_err(stage("divide"))
}

fn divide(cfg: &ProblemConfig, r: &mut Report) -> Result<(), CliError> {
    let d = &cfg.divide;
    if d.dividend.is_empty() || d.nt + d.n == 0 {
        return Err(CliError::new("config", "[divide] needs nt + n > 0 and a dividend"));
    }
    let f = series_from(&d.dividend, d.nt, d.n, cfg)?;
    let gens = d.generators.iter().map(|g| series_from(g, d.nt, d.n, cfg)).collect::<Result<Vec<_>, _>>()?;
    let monos = window_monomials(d.nt, d.n, &f.window());
    let order = draw_order_weights(d.nt + d.n, &monos, d.order_seed.unwrap_or(cfg.seed)).map_err(stage("divide"))?;
    let div = galligo_divide(&f, &gens, &order).map_err(stage("divide"))?;
    let again = galligo_divide(&div.remainder, &gens, &order).map_err(stage("divide"))?;
    let mut t = Table::new("leading_exponents", &["monomial", "component"]);
    for (m, i) in &div.e_l {
        t.push(vec![alpha_text(m), (i + 1).to_string()]);
    }
    r.tables.push(t);
    let remainder_in_el = div.remainder.comps().iter().enumerate().any(|(i, p)| p.terms().keys().any(|m| div.e_l.contains(&(m.clone(), i))));
    r.results = json!({
        "order_weights": order.lambda.iter().map(format_q).collect::<Vec<_>>(),
        "remainder": div.remainder.to_string(),
        "coefficients": div.coefficients.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "remainder_avoids_leading_exponents": !remainder_in_el,
        "residual_zero": division_residual(&f, &gens, &div).is_zero(),
        "idempotent": again.remainder == div.remainder,
    });
    Ok(())
}

/// Nonzero pure fields of γ, in α order.
fn pure_fields(g: &Surface, lt: u32) -> Result<Vec<WeightedField>, CliError> {
    let fields = extract_exp_fields(g).map_err(stage("lie"))?;
    let (p, _) = partition_pure(&fields, &g.dilations, g.n(), lt).map_err(stage("lie"))?;
    Ok(p.into_iter().filter(|e| !e.zero).map(|e| e.field).collect())
}

fn lie(cfg: &ProblemConfig, r: &mut Report) -> Result<(), CliError> {
    let g = cfg.surface()?;
    let base = pure_fields(&g, cfg.truncation.lt)?;
    let cutoff = cfg.conditions.cutoff;
    let c = lie_closure(&base, cutoff, Flavor::Full).map_err(stage("lie"))?;
    if c.cutoff_reached {
        r.warnings.push(format!("the closure reached the cutoff |d| = {cutoff}; higher brackets were not formed"));
    }
    let mut t = Table::new("closure", &["index", "word", "degree", "field"]);
    for (k, w) in c.elements.iter().enumerate() {
        t.push(vec![k.to_string(), w.word.to_string(), format!("{:?}", w.degree()), w.field.render()]);
    }
    r.tables.push(t);
    let x0: Vec<Q> = match &cfg.conditions.x0 {
        Some(v) => v.iter().map(|s| parse_q(s).map_err(stage("config"))).collect::<Result<_, _>>()?,
        None => vec![Q::from_integer(0.into()); g.n()],
    };
    let h = hoermander_check(&base, &x0, cutoff).map_err(stage("lie"))?;
    let mut out = surface_summary(&g);
    out["generators"] = json!(base.len());
    out["closure_size"] = json!(c.elements.len());
    out["cutoff_reached"] = json!(c.cutoff_reached);
    out["rank_at_x0"] = json!(h.rank);
    out["spans_at_x0"] = json!(h.spans);
    r.results = out;
    Ok(())
}

fn kernel(cfg: &ProblemConfig, r: &mut Report) -> Result<(), CliError> {
    let k = &cfg.kernel;
    let e = cfg.kernel_dilations()?;
    let nt = e.n_t();
    let profile = parse_profile(&k.profile, cfg.seed)?;
    let alphas: Vec<MultiIndex> = match &k.alphas {
        Some(v) => v.iter().map(|a| MultiIndex(a.clone())).collect(),
        None => vec![MultiIndex::zero(nt)],
    };
    if alphas.iter().any(|a| a.len() != nt) {
        return Err(CliError::new("config", format!("[kernel] alphas must have length N = {nt}")));
    }
    let grid = GridSpec::centered(nt, k.points, k.half_width);
    let mut t = Table::new("kernel_constants", &["J", "alpha", "constant", "at"]);
    let mut per_alpha = vec![Vec::new(); alphas.len()];
    let mut cancel: f64 = 0.0;
    for j in k.jmin..=k.jmax {
        let fam = make_bump_family(BumpParams { k: k.k, a: k.a, profile }, j, &e).map_err(stage("kernel"))?;
        cancel = cancel.max(fam.cancellation_residual(256));
        let gk = synth_kernel(&fam, j, &grid).map_err(stage("kernel"))?;
        for (i, b) in validate_product_bounds(&gk, &alphas).map_err(stage("kernel"))?.into_iter().enumerate() {
            t.push(vec![j.to_string(), alpha_text(&b.alpha), f64_text(b.constant), format!("{:?}", b.at)]);
            per_alpha[i].push(b.constant);
        }
    }
    r.tables.push(t);
    let drifts: Vec<f64> = per_alpha.iter().map(|c| drift(c)).collect();
    let finite = per_alpha.iter().flatten().all(|c| c.is_finite());
    r.results = json!({
        "dilations": e.to_string(),
        "constants": per_alpha,
        "drift": drifts,
        "cancellation_residual": cancel,
        "pass": finite && drifts.iter().all(|d| *d <= 0.10),
    });
    Ok(())
}

fn norm(cfg: &ProblemConfig, r: &mut Report) -> Result<(), CliError> {
    let g = cfg.surface()?;
    let nm = &cfg.norm;
    let profile = parse_profile(&nm.profile, cfg.seed)?;
    let mut oc = OperatorConfig::standard(g.n(), nm.points);
    oc.t_points = nm.t_points;
    oc.t_resolve = nm.t_resolve;
    oc.p = nm.p;
    let map = SeriesMap::from_surface(&g).map_err(stage("norm"))?;
    let a = nm.box_radius * (g.nt() as f64).sqrt();
    let params = NormParams { trials: nm.trials, max_iter: nm.max_iter, tol: nm.tol, seed: cfg.seed };
    let mut t = Table::new("norms", &["J", "estimate", "iterations", "residual", "converged", "nnz"]);
    let mut est = Vec::new();
    for j in nm.jmin..=nm.jmax {
        let fam = make_bump_family(BumpParams { k: 6, a, profile }, j, &g.dilations).map_err(stage("norm"))?;
        let kern = DyadicKernel::new(fam, j).map_err(stage("norm"))?;
        let m = assemble_t(&map, &kern, &oc).map_err(stage("norm"))?;
        let e = estimate_opnorm(&m, nm.p, &params);
        if !e.converged {
            r.warnings.push(format!("J = {j}: power method stopped at {} iterations, residual {:e}", e.iterations, e.residual));
        }
        t.push(vec![j.to_string(), f64_text(e.estimate), e.iterations.to_string(), f64_text(e.residual), e.converged.to_string(), m.nnz().to_string()]);
        est.push(e.estimate);
    }
    r.tables.push(t);
    let hi = est.iter().cloned().fold(f64::MIN, f64::max);
    let lo = est.iter().cloned().fold(f64::MAX, f64::min);
    let mut out = surface_summary(&g);
    out["estimates"] = json!(est);
    out["relative_spread"] = json!((hi - lo) / hi);
    out["strictly_increasing"] = json!(est.windows(2).all(|w| w[1] > w[0]));
    r.results = out;
    Ok(())
}

fn ccball(cfg: &ProblemConfig, r: &mut Report) -> Result<(), CliError> {
    let b = &cfg.ccball;
    let fields: Vec<WeightedField> = match &b.fields {
        Some(list) => {
            let n = b.n.ok_or_else(|| CliError::new("config", "[ccball] explicit fields need n"))?;
            list.iter()
                .map(|e| {
                    let f = parse_field(&e.field, n).map_err(|err| CliError::new("dsl", format!("'{}': {err}", e.field)))?;
                    WeightedField::new(f, e.degree.clone()).map_err(stage("config"))
                })
                .collect::<Result<_, _>>()?
        }
        None => pure_fields(&cfg.surface()?, cfg.truncation.lt)?,
    };
    let Some(first) = fields.first() else {
        return Err(CliError::new("ccball", "no fields to sample with"));
    };
    let (n, nu) = (first.n(), first.nu());
    let center = b.center.clone().unwrap_or_else(|| vec![0.0; n]);
    let p = BallParams { paths: b.paths, seed: cfg.seed, ..Default::default() };
    let mut t = Table::new("ball_extents", &["delta", "extents", "discarded"]);
    let mut ext = Vec::new();
    for d in &b.deltas {
        if d.len() != nu {
            return Err(CliError::new("config", format!("[ccball] delta {d:?} has the wrong length, nu = {nu}")));
        }
        let s = cc_ball_sample(&fields, &center, d, &p).map_err(stage("ccball"))?;
        if s.discarded > 0 {
            r.warnings.push(format!("delta {d:?}: {} paths left the domain and were discarded", s.discarded));
        }
        t.push(vec![format!("{d:?}"), format!("{:?}", s.extents), s.discarded.to_string()]);
        ext.push(s.extents);
    }
    r.tables.push(t);
    let mut out = json!({ "fields": fields.iter().map(|w| w.field.render()).collect::<Vec<_>>(), "extents": ext });
    if nu == 1 && b.deltas.len() >= 2 {
        let xs: Vec<f64> = b.deltas.iter().map(|d| d[0]).collect();
        let slopes: Vec<Value> = (0..n)
            .map(|i| {
                let ys: Vec<f64> = ext.iter().map(|e| e[i]).collect();
                if ys.iter().all(|&y| y > 0.0) {
                    json!(loglog_slope(&xs, &ys))
                } else {
                    Value::Null
                }
            })
            .collect();
        out["loglog_slopes"] = json!(slopes);
    }
    r.results = out;
    Ok(())
}

/// Every j ∈ {0, 1, 2, ∞}^ν.
pub fn identity_scales(nu: usize) -> Vec<Scale> {
    let vals = [Some(0), Some(1), Some(2), None];
    let mut out: Vec<Scale> = vec![vec![]];
    for _ in 0..nu {
        out = out.into_iter().flat_map(|s| vals.iter().map(move |v| [s.clone(), vec![*v]].concat())).collect();
    }
    out
}

/// W_j identities of a pipeline spec: the Taylor identity at every j in
/// {0,1,2,∞}^ν, and γ_{2^{−j}t} recovered from W at the embedded scales.
pub fn wj_identities(g: &Surface, spec: &DyadicFamilySpec) -> Result<(usize, usize), OperatorError> {
    let scales = identity_scales(spec.nu());
    let mut ok = 0;
    for j in &scales {
        ok += wj_taylor_identity(spec, j)? as usize;
    }
    let mut total = scales.len();
    for j in MultiIndex::all_in_box(spec.nt(), 2) {
        let f: Vec<Q> = j.0.iter().map(|&e| Q::new(BigInt::one(), BigInt::one() << e as usize)).collect();
        let gj = w_to_gamma(&build_wj(spec, &embed_scale(spec, &j.0))?)?.series();
        ok += (gj == g.series().scale_t(&f)) as usize;
        total += 1;
    }
    Ok((ok, total))
}

pub fn random_function(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn maximal(cfg: &ProblemConfig, r: &mut Report) -> Result<(), CliError> {
    let g = cfg.surface()?;
    let m = &cfg.maximal;
    let opts = PipelineOptions { cutoff: cfg.conditions.cutoff, allow_saturated: m.allow_saturated };
    let spec = reduce_maximal_pipeline(&g, &opts).map_err(stage("maximal"))?;
    if spec.saturated {
        r.warnings.push("the dyadic family was built from an x-saturated W".into());
    }
    let (ok, total) = wj_identities(&g, &spec).map_err(stage("maximal"))?;
    let points = m.points.unwrap_or(match g.n() {
        1 => 256,
        2 => 40,
        _ => 14,
    });
    let mut oc = OperatorConfig::standard(g.n(), points);
    oc.t_points = m.t_points;
    oc.a = m.a;
    let flow = match m.flow.as_str() {
        "numeric" => FlowMode::Numeric(NumericFlow::default()),
        _ => FlowMode::Series,
    };
    let scales: Vec<Scale> = MultiIndex::all_in_box(g.nt(), m.jmax).iter().map(|j| embed_scale(&spec, &j.0)).collect();
    let mode = MaximalMode::Dyadic { jmax: m.jmax };
    let ones = vec![1.0; oc.x_grid.len()];
    let mut fitted = false;
    for _ in 0..8 {
        let a = eval_maximal(&g, &oc, &ones, &mode);
        let b = eval_maximal_family(&spec, &oc, &ones, &scales, &flow);
        match (a, b) {
            (Ok(_), Ok(_)) => {
                fitted = true;
                break;
            }
            (Err(OperatorError::DomainEscape { .. }), _) | (_, Err(OperatorError::DomainEscape { .. })) => oc.a *= 0.5,
            (Err(e), _) | (_, Err(e)) => return Err(CliError::new("maximal", e.to_string())),
        }
    }
    if !fitted {
        return Err(CliError::new("maximal", "images leave the grid even after shrinking a eight times"));
    }
    if oc.a != m.a {
        r.warnings.push(format!("box radius reduced from {} to {} to keep every image on the grid", m.a, oc.a));
    }
    let f = random_function(oc.x_grid.len(), cfg.seed);
    let m0 = eval_maximal(&g, &oc, &f, &mode).map_err(stage("maximal"))?;
    let m1 = eval_maximal_family(&spec, &oc, &f, &scales, &flow).map_err(stage("maximal"))?;
    let violations = m0.values.iter().zip(&m1.values).filter(|(a, b)| a > b).count();
    let one = eval_maximal(&g, &oc, &ones, &MaximalMode::Delta { kmax: m.jmax }).map_err(stage("maximal"))?;
    let vol = (2.0 * oc.a).powi(g.nt() as i32);
    let one_err = (0..oc.x_grid.len()).map(|k| (one.values[k] - oc.psi1.eval(&oc.x_grid.point(k)) * vol).abs()).fold(0.0, f64::max);
    let mut t = Table::new("maximal", &["index", "x", "M0", "M1"]);
    for k in 0..oc.x_grid.len() {
        t.push(vec![k.to_string(), format!("{:?}", oc.x_grid.point(k)), f64_text(m0.values[k]), f64_text(m1.values[k])]);
    }
    r.tables.push(t);
    let mut fam = Table::new("family", &["l", "word", "degree", "field", "c"]);
    let names = |k: usize| {
        let nt = spec.nt();
        if k < nt {
            format!("t{}", k + 1)
        } else if k < 2 * nt {
            format!("s{}", k - nt + 1)
        } else {
            format!("x{}", k - 2 * nt + 1)
        }
    };
    for (l, w) in spec.fields.iter().enumerate() {
        fam.push(vec![(l + 1).to_string(), w.word.to_string(), format!("{:?}", w.degree()), w.field.render(), spec.coeffs[l].render(&names)]);
    }
    r.tables.push(fam);
    let mut out = surface_summary(&g);
    out["family"] = json!({ "q": spec.q(), "r": spec.r, "nu": spec.nu(), "saturated": spec.saturated });
    out["wj_identities"] = json!({ "holding": ok, "checked": total });
    out["box_radius"] = json!(oc.a);
    out["grid_points"] = json!(oc.x_grid.len());
    out["m0_le_m1_violations"] = json!(violations);
    out["one_max_error"] = json!(one_err);
    r.results = out;
    if violations > 0 {
        r.warnings.push(format!("M0 > M1 at {violations} grid points"));
    }
    Ok(())
}

/// Replays every witness in a report from its serialized form.
pub fn run_verify(report_text: &str) -> Result<(Report, bool), CliError> {
    let src = Report::from_json(report_text)?;
    let mut r = Report::new("verify", &src.config, "");
    r.provenance = src.provenance.clone();
    let mut t = Table::new("replay", &["condition", "status", "replayed"]);
    let mut all = true;
    for v in &src.verdicts {
        let ok = v.replay()?;
        all &= ok;
        t.push(vec![v.condition.clone(), v.status.clone(), ok.to_string()]);
    }
    r.tables.push(t);
    r.results = json!({
        "source_command": src.command,
        "source_sha256": crate::report::sha256_hex(report_text.as_bytes()),
        "verdicts": src.verdicts.len(),
        "all_replayed": all,
    });
    if !all {
        r.warnings.push("some witnesses failed to replay".into());
    }
    Ok((r, all))
}
