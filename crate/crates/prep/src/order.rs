use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use radon_algebra::{format_q, q_int, MultiIndex, Q};

use crate::PrepError;

const MAX_DRAWS: usize = 256;

/// Weights λ of the linear order L(α) = Σ α_j λ_j; ties on (α, i) are broken
/// by the component index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderWeights {
    pub lambda: Vec<Q>,
}

impl OrderWeights {
    pub fn new(lambda: Vec<Q>) -> Result<Self, PrepError> {
        if lambda.iter().any(|l| *l <= q_int(0)) {
            return Err(PrepError::Order("weights must be positive".into()));
        }
        Ok(OrderWeights { lambda })
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    pub fn value(&self, a: &MultiIndex) -> Q {
        let mut v = q_int(0);
        for (x, l) in a.0.iter().zip(&self.lambda) {
            if *x > 0 {
                v += l * q_int(*x as i64);
            }
        }
        v
    }

    /// First colliding pair, if L is not injective on `domain`.
    pub fn collision<'a>(&self, domain: &'a [MultiIndex]) -> Option<(&'a MultiIndex, &'a MultiIndex)> {
        let mut seen: std::collections::BTreeMap<Q, &MultiIndex> = std::collections::BTreeMap::new();
        for a in domain {
            if let Some(prev) = seen.insert(self.value(a), a) {
                if prev != a {
                    return Some((prev, a));
                }
            }
        }
        None
    }

    pub fn is_injective_on(&self, domain: &[MultiIndex]) -> bool {
        self.collision(domain).is_none()
    }

    /// Key of (α, i) in the total order.
    pub fn key(&self, a: &MultiIndex, i: usize) -> (Q, usize, MultiIndex) {
        (self.value(a), i, a.clone())
    }
}

impl fmt::Display for OrderWeights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v: Vec<String> = self.lambda.iter().map(format_q).collect();
        write!(f, "({})", v.join(", "))
    }
}

/// Seeded random positive rational weights, redrawn until injective on the domain.
pub fn draw_order_weights(nvars: usize, domain: &[MultiIndex], seed: u64) -> Result<OrderWeights, PrepError> {
    let dom: Vec<MultiIndex> = domain.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    if nvars == 1 {
        return OrderWeights::new(vec![q_int(1)]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_DRAWS {
        let lambda: Vec<Q> =
            (0..nvars).map(|_| Q::new(rng.gen_range(1i64..=997).into(), rng.gen_range(1i64..=991).into())).collect();
        let w = OrderWeights::new(lambda)?;
        if w.is_injective_on(&dom) {
            return Ok(w);
        }
    }
    Err(PrepError::Order(format!("no injective weights found after {MAX_DRAWS} draws")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn injectivity_examples() {
        let dom = vec![MultiIndex(vec![1, 0]), MultiIndex(vec![0, 1])];
        let ok = OrderWeights::new(vec![q_int(1), Q::new(3.into(), 7.into())]).unwrap();
        assert!(ok.is_injective_on(&dom));
        let tie = OrderWeights::new(vec![q_int(1), q_int(1)]).unwrap();
        assert!(!tie.is_injective_on(&dom));
        let w = draw_order_weights(2, &MultiIndex::all_up_to(2, 6), 7).unwrap();
        assert!(w.is_injective_on(&MultiIndex::all_up_to(2, 6)));
        assert_eq!(w, draw_order_weights(2, &MultiIndex::all_up_to(2, 6), 7).unwrap());
        assert_eq!(draw_order_weights(1, &MultiIndex::all_up_to(1, 9), 0).unwrap().lambda, vec![q_int(1)]);
    }
}
