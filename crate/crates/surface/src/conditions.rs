use std::fmt;

use radon_algebra::MultiIndex;
use radon_geometry::{
    control_check, control_check_w, replay_control, verify_refutation, ControlCertificate, ControlParams, Status,
    WControlCertificate,
};
use radon_lie::{compare_spans, lie_bracket, lie_closure, ClosureSet, Flavor, SpanComparison, VectorField, WeightedField};
use radon_prep::{finite_generate, replay_generation, FiniteGeneration};

use crate::surface::{extract_exp_fields, gamma_to_w, partition_pure, FieldMap, Surface, WField};
use crate::SurfaceError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Condition {
    I,
    IIF,
    IIA,
    IIIF,
    IIIA,
}

impl Condition {
    pub const ALL: [Condition; 5] = [Condition::I, Condition::IIF, Condition::IIA, Condition::IIIF, Condition::IIIA];
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::I => "I",
            Condition::IIF => "II.F",
            Condition::IIA => "II.A",
            Condition::IIIF => "III.F",
            Condition::IIIA => "III.A",
        })
    }
}

impl std::str::FromStr for Condition {
    type Err = SurfaceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "I" => Condition::I,
            "II.F" => Condition::IIF,
            "II.A" => Condition::IIA,
            "III.F" => Condition::IIIF,
            "III.A" => Condition::IIIA,
            _ => return Err(SurfaceError::Precondition(format!("unknown condition '{s}'"))),
        })
    }
}

#[derive(Clone, Debug)]
pub struct CheckParams {
    /// Closures are built up to |d|₁ ≤ cutoff.
    pub cutoff: u32,
    pub control: ControlParams,
}

impl CheckParams {
    pub fn new(n: usize, cutoff: u32) -> Self {
        CheckParams { cutoff, control: ControlParams { ball_paths: 16, ..ControlParams::origin(n) } }
    }
}

/// A checked control statement: `target` by the verdict's generator list.
#[derive(Clone, Debug)]
pub struct Controlled {
    pub alpha: Option<MultiIndex>,
    pub target: WeightedField,
    pub certificate: ControlCertificate,
}

#[derive(Clone, Debug)]
pub enum Witness {
    /// Nothing to check (no non-pure powers).
    Vacuous,
    Certificates { against: Vec<WeightedField>, items: Vec<Controlled> },
    Refutation { against: Vec<WeightedField>, item: Controlled },
    None,
}

#[derive(Clone, Debug)]
pub struct ConditionVerdict {
    pub condition: Condition,
    pub status: Status,
    pub witness: Witness,
    /// The generating subset and its certificates (F-parts and (I)).
    pub generation: Option<FiniteGeneration>,
    pub cutoff: u32,
    pub lt: u32,
    pub lx: u32,
    pub notes: Vec<String>,
}

impl ConditionVerdict {
    /// Re-checks the attached witness independently of how it was found.
    pub fn replay(&self) -> bool {
        match (&self.status, &self.witness) {
            (Status::Proved, Witness::Vacuous) => true,
            (Status::Proved, Witness::Certificates { against, items }) => {
                items.iter().all(|c| replay_control(&c.certificate, &c.target, against))
            }
            (Status::Refuted, Witness::Refutation { against, item }) => {
                item.certificate.witness.as_ref().is_some_and(|w| verify_refutation(&item.target, against, w))
            }
            (Status::Unknown, _) => true,
            _ => false,
        }
    }
}

/// Every bracket that the cutoff skipped vanishes, so the closure is all of L.
pub fn closure_is_complete(c: &ClosureSet) -> Result<bool, SurfaceError> {
    if !c.cutoff_reached {
        return Ok(true);
    }
    if c.flavor != Flavor::Full {
        return Ok(false);
    }
    let e = &c.elements;
    for i in 0..e.len() {
        for j in i + 1..e.len() {
            if e[i].degree_l1() + e[j].degree_l1() > c.cutoff && !lie_bracket(&e[i], &e[j])?.is_zero() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Closure with the cutoff raised to admit every leaf, so that completeness
/// only depends on the skipped brackets.
fn closure_of(leaves: &[WeightedField], p: &CheckParams, flavor: Flavor, v: &mut ConditionVerdict) -> Result<ClosureSet, SurfaceError> {
    let top = leaves.iter().map(|w| w.degree_l1()).max().unwrap_or(0);
    let cutoff = p.cutoff.max(top);
    if cutoff > v.cutoff {
        v.notes.push(format!("cutoff raised to {cutoff} to admit every generator"));
        v.cutoff = cutoff;
    }
    Ok(lie_closure(leaves, cutoff, flavor)?)
}

fn nonzero(fields: impl IntoIterator<Item = WeightedField>) -> Vec<WeightedField> {
    fields.into_iter().filter(|w| !w.is_zero()).collect()
}

struct Ctx {
    x_fields: FieldMap,
    w: WField,
    w_fields: FieldMap,
    n: usize,
    lt: u32,
}

fn context(g: &Surface) -> Result<Ctx, SurfaceError> {
    let w = gamma_to_w(g)?;
    Ok(Ctx { x_fields: extract_exp_fields(g)?, w_fields: w.taylor()?, w, n: g.n(), lt: g.policy.lt })
}

fn verdict(c: Condition, g: &Surface, p: &CheckParams) -> ConditionVerdict {
    ConditionVerdict {
        condition: c,
        status: Status::Unknown,
        witness: Witness::None,
        generation: None,
        cutoff: p.cutoff,
        lt: g.policy.lt,
        lx: g.policy.lx,
        notes: Vec::new(),
    }
}

/// A-part: every non-pure field controlled by L(P).
fn algebraic(ctx: &Ctx, fields: &FieldMap, g: &Surface, p: &CheckParams, v: &mut ConditionVerdict) -> Result<(), SurfaceError> {
    let (pure, non_pure) = partition_pure(fields, &g.dilations, ctx.n, ctx.lt)?;
    let targets: Vec<_> = non_pure.into_iter().filter(|e| !e.zero).collect();
    if targets.is_empty() {
        v.status = Status::Proved;
        v.witness = Witness::Vacuous;
        v.notes.push("no nonzero non-pure powers".into());
        return Ok(());
    }
    let leaves = nonzero(pure.into_iter().map(|e| e.field));
    let closure = closure_of(&leaves, p, Flavor::Full, v)?;
    let complete = closure_is_complete(&closure)?;
    let against = closure.elements.clone();
    let mut items = Vec::new();
    let mut undecided = false;
    for e in targets {
        let cert = control_check(&e.field, &against, &p.control)?;
        let item = Controlled { alpha: Some(e.alpha.clone()), target: e.field.clone(), certificate: cert };
        match item.certificate.status {
            Status::Proved => items.push(item),
            Status::Refuted if complete => {
                v.status = Status::Refuted;
                v.witness = Witness::Refutation { against, item };
                return Ok(());
            }
            Status::Refuted => {
                v.notes.push(format!("alpha {}: pointwise refutation against a cutoff-limited closure, not conclusive", e.alpha));
                undecided = true;
            }
            Status::Unknown => {
                v.notes.push(format!("alpha {}: undecided", e.alpha));
                undecided = true;
            }
        }
    }
    if !undecided {
        v.status = Status::Proved;
        v.witness = Witness::Certificates { against, items };
    }
    Ok(())
}

fn w_items(w: &WControlCertificate, list: &[WeightedField], wf: &WField) -> Result<Vec<Controlled>, SurfaceError> {
    let mut out = Vec::new();
    for (a, cert) in &w.prepared {
        let comps = wf.w.t_coeff(a);
        let prec = wf.w.x_precision_at(a).map(|q| q as i32);
        let f = VectorField::with_params(0, wf.w.nx(), comps, prec)?;
        let target = WeightedField::new(f, wf.dilations.deg(a)?)?;
        debug_assert!(cert.status != Status::Proved || replay_control(cert, &target, list));
        out.push(Controlled { alpha: Some(a.clone()), target, certificate: cert.clone() });
    }
    Ok(out)
}

/// F-part and (I): a finite subset of `base` generates a finite list that controls W.
fn finite_list(ctx: &Ctx, base: Vec<WeightedField>, p: &CheckParams, v: &mut ConditionVerdict) -> Result<(), SurfaceError> {
    let base = nonzero(base);
    let fg0 = finite_generate(&base, None)?;
    let f: Vec<WeightedField> = fg0.selected.iter().map(|&i| base[i].clone()).collect();
    let l0 = closure_of(&f, p, Flavor::LeftNormed, v)?;
    let fg = finite_generate(&l0.elements, None)?;
    if !replay_generation(&l0.elements, &fg) {
        return Err(SurfaceError::Internal("finite generation certificate does not replay".into()));
    }
    let list: Vec<WeightedField> = fg.selected.iter().map(|&i| l0.elements[i].clone()).collect();
    v.generation = Some(fg);

    let mut items = Vec::new();
    let mut ok = true;
    for i in 0..list.len() {
        for j in i + 1..list.len() {
            let b = lie_bracket(&list[i], &list[j])?;
            if b.is_zero() {
                continue;
            }
            let cert = control_check(&b, &list, &p.control)?;
            if cert.status != Status::Proved {
                ok = false;
                v.notes.push(format!("bracket [{}, {}] of the list is not certified", list[i].word, list[j].word));
            }
            items.push(Controlled { alpha: None, target: b, certificate: cert });
        }
    }
    let wc = control_check_w(&ctx.w.w, &ctx.w.dilations, &list, &p.control)?;
    items.extend(w_items(&wc, &list, &ctx.w)?);
    if ok && wc.status == Status::Proved {
        v.status = Status::Proved;
        v.witness = Witness::Certificates { against: list, items };
        return Ok(());
    }

    // Any admissible list lies in L(base); refuting W against all of it refutes the condition.
    let full = closure_of(&base, p, Flavor::Full, v)?;
    if closure_is_complete(&full)? {
        let wc = control_check_w(&ctx.w.w, &ctx.w.dilations, &full.elements, &p.control)?;
        if let (Status::Refuted, Some((a, cert))) = (wc.status, wc.refuted) {
            let target = ctx.w_fields.get(&a).cloned().ok_or_else(|| SurfaceError::Internal(format!("no Taylor field at {a}")))?;
            v.status = Status::Refuted;
            v.witness = Witness::Refutation { against: full.elements, item: Controlled { alpha: Some(a), target, certificate: cert } };
            return Ok(());
        }
    } else {
        v.notes.push("closure of the base set is cutoff-limited; no refutation attempted".into());
    }
    v.notes.push("W not certified by the generated list".into());
    Ok(())
}

pub fn check_condition(g: &Surface, which: Condition, p: &CheckParams) -> Result<ConditionVerdict, SurfaceError> {
    let ctx = context(g)?;
    check_with(&ctx, g, which, p)
}

/// All five conditions, sharing one W and one exponential extraction.
pub fn check_all(g: &Surface, p: &CheckParams) -> Result<Vec<ConditionVerdict>, SurfaceError> {
    let ctx = context(g)?;
    Condition::ALL.iter().map(|&c| check_with(&ctx, g, c, p)).collect()
}

fn check_with(ctx: &Ctx, g: &Surface, which: Condition, p: &CheckParams) -> Result<ConditionVerdict, SurfaceError> {
    let mut v = verdict(which, g, p);
    if ctx.w.is_saturated() {
        v.notes.push(format!("W saturated at L_x = {}; identities hold on the stored x-degrees", g.policy.lx));
    }
    match which {
        Condition::IIA => algebraic(ctx, &ctx.w_fields, g, p, &mut v)?,
        Condition::IIIA => algebraic(ctx, &ctx.x_fields, g, p, &mut v)?,
        Condition::I => {
            let (pure, _) = partition_pure(&ctx.w_fields, &g.dilations, ctx.n, ctx.lt)?;
            finite_list(ctx, pure.into_iter().map(|e| e.field).collect(), p, &mut v)?
        }
        Condition::IIF => finite_list(ctx, ctx.w_fields.values().cloned().collect(), p, &mut v)?,
        Condition::IIIF => finite_list(ctx, ctx.x_fields.values().cloned().collect(), p, &mut v)?,
    }
    Ok(v)
}

/// span{Y : (Y, d₀) ∈ L(X)} against span{Y : (Y, d₀) ∈ L(X̂)} for every
/// degree d₀ occurring in either closure.
pub fn span_lemma(g: &Surface, cutoff: u32) -> Result<Vec<(Vec<u32>, SpanComparison)>, SurfaceError> {
    let ctx = context(g)?;
    let a = lie_closure(&nonzero(ctx.x_fields.values().cloned()), cutoff, Flavor::Full)?;
    let b = lie_closure(&nonzero(ctx.w_fields.values().cloned()), cutoff, Flavor::Full)?;
    let mut degrees = a.degrees();
    degrees.extend(b.degrees());
    degrees.sort();
    degrees.dedup();
    Ok(degrees
        .into_iter()
        .map(|d| {
            let fa: Vec<&VectorField> = a.slice(&d).into_iter().map(|w| &w.field).collect();
            let fb: Vec<&VectorField> = b.slice(&d).into_iter().map(|w| &w.field).collect();
            let cmp = compare_spans(&fa, &fb);
            (d, cmp)
        })
        .collect())
}
