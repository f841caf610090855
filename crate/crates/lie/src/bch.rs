use radon_algebra::{q_int, JetSeries, Poly, TruncationPolicy, Window, Q};

use crate::{LieError, VectorField};

pub const BCH_MAX_ORDER: u32 = 4;

fn q(n: i64, d: i64) -> Q {
    q_int(n) / q_int(d)
}

/// log(e^a e^b) through bracket order `order` (≤ 4):
/// a + b + ½[a,b] + 1/12[a,[a,b]] − 1/12[b,[a,b]] − 1/24[b,[a,[a,b]]].
///
/// Here e^a e^b is the operator product, so its action on a function f is
/// f ↦ f∘(flow of b)∘(flow of a) at time one. Brackets are truncated to
/// `window` when the fields carry parameters.
pub fn bch_log(a: &VectorField, b: &VectorField, order: u32, window: Option<&Window>) -> Result<(VectorField, bool), LieError> {
    if order > BCH_MAX_ORDER {
        return Err(LieError::BchOrder(order));
    }
    let mut sat = false;
    let mut br = |x: &VectorField, y: &VectorField| -> Result<VectorField, LieError> {
        let (z, s) = x.bracket_window(y, window)?;
        sat |= s;
        Ok(z)
    };
    let mut z = a.add(b)?;
    if order >= 2 {
        let ab = br(a, b)?;
        z = z.add(&ab.scale(&q(1, 2)))?;
        if order >= 3 {
            let aab = br(a, &ab)?;
            let bab = br(b, &ab)?;
            z = z.add(&aab.scale(&q(1, 12)))?.sub(&bab.scale(&q(1, 12)))?;
            if order >= 4 {
                let baab = br(b, &aab)?;
                z = z.sub(&baab.scale(&q(1, 24)))?;
            }
        }
    }
    Ok((z, sat))
}

/// Lie series exp(V)x = Σ_k V^k(x)/k! for a field V = V(t, x) vanishing at
/// t = 0; exact in the truncation window.
pub fn exp_map(v: &VectorField, policy: TruncationPolicy) -> JetSeries {
    let (nt, n) = (v.npar(), v.n());
    let w = Window::new(nt, &policy);
    let mut sat = false;
    let mut comps = Vec::with_capacity(n);
    for i in 0..n {
        let mut term = Poly::var(nt + n, nt + i);
        let mut acc = term.clone();
        for k in 1..=policy.lt {
            let (p, s) = v.apply(&term, Some(&w));
            sat |= s;
            term = p.scale(&(Q::from_integer(1.into()) / q_int(k as i64)));
            if term.is_zero() {
                break;
            }
            acc = &acc + &term;
        }
        comps.push(acc);
    }
    JetSeries::new(nt, n, policy, comps).expect("matching variable counts").with_saturation(sat)
}
