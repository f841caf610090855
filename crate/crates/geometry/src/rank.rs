use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use radon_algebra::Q;

/// Rank of a rational matrix by fraction-free (Bareiss) elimination on the
/// integer matrix obtained by clearing row denominators.
pub fn bareiss_rank(rows: &[Vec<Q>]) -> usize {
    let Some(ncols) = rows.first().map(|r| r.len()) else { return 0 };
    let mut m: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| {
            let l = r.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
            r.iter().map(|q| q.numer() * (&l / q.denom())).collect()
        })
        .collect();
    let nrows = m.len();
    let mut prev = BigInt::one();
    let mut rank = 0;
    for c in 0..ncols {
        if rank == nrows {
            break;
        }
        let Some(p) = (rank..nrows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(rank, p);
        for i in rank + 1..nrows {
            for k in c + 1..ncols {
                let v = &m[rank][c] * &m[i][k] - &m[i][c] * &m[rank][k];
                m[i][k] = v / &prev;
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[rank][c].clone();
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use radon_algebra::q_int;

    #[test]
    fn small_ranks() {
        let r = |v: &[i64]| v.iter().map(|&x| q_int(x)).collect::<Vec<_>>();
        assert_eq!(bareiss_rank(&[r(&[1, 2]), r(&[2, 4])]), 1);
        assert_eq!(bareiss_rank(&[r(&[1, 2, 3]), r(&[0, 1, 1]), r(&[1, 3, 4])]), 2);
        assert_eq!(bareiss_rank(&[r(&[0, 0]), r(&[0, 0])]), 0);
        let half = Q::new(1.into(), 2.into());
        assert_eq!(bareiss_rank(&[vec![half.clone(), q_int(1)], vec![q_int(1), q_int(2)]]), 1);
        assert_eq!(bareiss_rank(&[r(&[0, 1]), r(&[1, 0]), r(&[1, 1])]), 2);
    }
}
