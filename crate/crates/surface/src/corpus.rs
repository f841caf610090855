//! Reference surfaces used by the tests, the acceptance run and the CLI.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use radon_algebra::{q_int, DilationSpec, JetSeries, MultiIndex, Poly, TruncationPolicy};

use crate::Surface;

fn mono(nv: usize, e: &[u32], c: i64) -> Poly {
    Poly::monomial(nv, MultiIndex(e.to_vec()), q_int(c))
}

/// γ_t(x) = x + t.
pub fn x_plus_t(policy: TruncationPolicy) -> Surface {
    let g = JetSeries::new(1, 1, policy, vec![&mono(2, &[0, 1], 1) + &mono(2, &[1, 0], 1)]).unwrap();
    Surface::from_series(g, DilationSpec::isotropic(1)).unwrap()
}

/// γ_{(s,t)}(x) = x − st with one parameter per t-coordinate.
pub fn x_minus_st(policy: TruncationPolicy) -> Surface {
    let g = JetSeries::new(2, 1, policy, vec![&mono(3, &[0, 0, 1], 1) - &mono(3, &[1, 1, 0], 1)]).unwrap();
    Surface::from_series(g, DilationSpec::standard(2)).unwrap()
}

/// e^{s∂₁}e^{t(∂₂+x₁∂₃)} on ℝ³: (x₁+s, x₂+t, x₃+t x₁+st).
pub fn heisenberg(policy: TruncationPolicy) -> Surface {
    let nv = 5;
    let comps = vec![
        &mono(nv, &[0, 0, 1, 0, 0], 1) + &mono(nv, &[1, 0, 0, 0, 0], 1),
        &mono(nv, &[0, 0, 0, 1, 0], 1) + &mono(nv, &[0, 1, 0, 0, 0], 1),
        &(&mono(nv, &[0, 0, 0, 0, 1], 1) + &mono(nv, &[0, 1, 1, 0, 0], 1)) + &mono(nv, &[1, 1, 0, 0, 0], 1),
    ];
    let g = JetSeries::new(2, 3, policy, comps).unwrap();
    Surface::from_series(g, DilationSpec::standard(2)).unwrap()
}

/// γ(t, x) = x + (random polynomial in t with x-dependent coefficients),
/// every term carrying a positive power of t.
pub fn random_polynomial(seed: u64, policy: TruncationPolicy) -> Surface {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (nt, nu) = match rng.gen_range(0..3) {
        0 => (1, 1),
        1 => (2, 1),
        _ => (2, 2),
    };
    let n = rng.gen_range(1..=2);
    let dil = if nu == 1 { DilationSpec::isotropic(nt) } else { DilationSpec::standard(nt) };
    let nv = nt + n;
    let comps = (0..n)
        .map(|i| {
            let mut p = Poly::var(nv, nt + i);
            for _ in 0..rng.gen_range(1..=4) {
                let mut e = vec![0u32; nv];
                let ta = rng.gen_range(1..=policy.lt);
                for _ in 0..ta {
                    e[rng.gen_range(0..nt)] += 1;
                }
                for _ in 0..rng.gen_range(0..=2) {
                    e[nt + rng.gen_range(0..n)] += 1;
                }
                let c = rng.gen_range(1..=3) * if rng.gen_bool(0.5) { 1 } else { -1 };
                p.add_term(MultiIndex(e), q_int(c));
            }
            p
        })
        .collect();
    Surface::from_series(JetSeries::new(nt, n, policy, comps).unwrap(), dil).unwrap()
}

/// x+t, x−st, Heisenberg, then `random` random polynomial surfaces.
pub fn standard_corpus(policy: TruncationPolicy, random: usize, seed: u64) -> Vec<(String, Surface)> {
    let mut out = vec![
        ("x+t".to_string(), x_plus_t(policy)),
        ("x-st".to_string(), x_minus_st(policy)),
        ("heisenberg".to_string(), heisenberg(policy)),
    ];
    for k in 0..random {
        out.push((format!("random-{k}"), random_polynomial(seed.wrapping_add(k as u64), policy)));
    }
    out
}
