use std::collections::BTreeMap;

use radon_algebra::linalg::{SparseVec, SpanBasis};
use radon_algebra::{MultiIndex, Q};

use crate::field::min_prec;
use crate::weighted::lie_bracket;
use crate::{LieError, VectorField, WeightedField};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flavor {
    /// L(S): closed under brackets of any two elements.
    Full,
    /// L₀(S): closed under brackets [s, Y] with s ∈ S.
    LeftNormed,
}

#[derive(Clone, Debug)]
pub struct ClosureSet {
    pub elements: Vec<WeightedField>,
    pub cutoff: u32,
    pub flavor: Flavor,
    /// Some bracket was skipped only because its degree exceeded the cutoff.
    pub cutoff_reached: bool,
}

impl ClosureSet {
    pub fn slice(&self, d0: &[u32]) -> Vec<&WeightedField> {
        self.elements.iter().filter(|w| w.degree() == d0).collect()
    }

    /// Distinct degrees occurring in the closure.
    pub fn degrees(&self) -> Vec<Vec<u32>> {
        let mut v: Vec<Vec<u32>> = self.elements.iter().map(|w| w.degree().to_vec()).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

struct Builder {
    elements: Vec<WeightedField>,
    by_degree: BTreeMap<Vec<u32>, Vec<usize>>,
    cutoff: u32,
    cutoff_reached: bool,
}

impl Builder {
    fn try_push(&mut self, w: WeightedField) {
        if w.is_zero() {
            return;
        }
        let slot = self.by_degree.entry(w.degree().to_vec()).or_default();
        if slot.iter().any(|&i| self.elements[i].field == w.field) {
            return;
        }
        slot.push(self.elements.len());
        self.elements.push(w);
    }

    fn bracket_if_within(&mut self, a: &WeightedField, b: &WeightedField) -> Result<(), LieError> {
        if a.degree_l1() + b.degree_l1() > self.cutoff {
            self.cutoff_reached = true;
            return Ok(());
        }
        let c = lie_bracket(a, b)?;
        self.try_push(c);
        Ok(())
    }
}

/// Bracket closure of `s` up to |d|₁ ≤ cutoff. Zero fields are dropped and
/// exact duplicates merged; every element carries its bracket word over the
/// indices of `s`. In the full flavor each unordered pair is bracketed once.
pub fn lie_closure(s: &[WeightedField], cutoff: u32, flavor: Flavor) -> Result<ClosureSet, LieError> {
    let mut b = Builder { elements: Vec::new(), by_degree: BTreeMap::new(), cutoff, cutoff_reached: false };
    let mut leaves = Vec::new();
    for (i, w) in s.iter().enumerate() {
        let leaf = WeightedField::leaf(w.field.clone(), w.degree().to_vec(), i)?;
        if leaf.degree_l1() > cutoff {
            b.cutoff_reached = true;
            continue;
        }
        leaves.push(leaf.clone());
        b.try_push(leaf);
    }
    let mut j = 0;
    while j < b.elements.len() {
        let e = b.elements[j].clone();
        match flavor {
            Flavor::Full => {
                for i in 0..j {
                    let a = b.elements[i].clone();
                    b.bracket_if_within(&a, &e)?;
                }
            }
            Flavor::LeftNormed => {
                for leaf in &leaves {
                    b.bracket_if_within(leaf, &e)?;
                }
            }
        }
        j += 1;
    }
    Ok(ClosureSet { elements: b.elements, cutoff, flavor, cutoff_reached: b.cutoff_reached })
}

/// Where a span is taken: at a rational point, or over Q on coefficient vectors.
#[derive(Clone, Copy, Debug)]
pub enum SpanPoint<'a> {
    At(&'a [Q]),
    Symbolic,
}

#[derive(Clone, Debug)]
pub struct SpanInfo {
    pub rank: usize,
    /// Echelon basis; constant fields in the pointwise case.
    pub basis: Vec<VectorField>,
    /// Common precision the fields were projected to.
    pub prec: Option<i32>,
}

fn common_prec<'a>(fs: impl IntoIterator<Item = &'a VectorField>) -> Option<i32> {
    fs.into_iter().fold(None, |acc, f| min_prec(acc, f.prec()))
}

fn point_vector(f: &VectorField, x0: &[Q]) -> SparseVec<(usize, MultiIndex)> {
    let mut v = BTreeMap::new();
    for (i, c) in f.eval(x0).into_iter().enumerate() {
        if c != Q::from_integer(0.into()) {
            v.insert((i, MultiIndex::zero(f.n())), c);
        }
    }
    v
}

fn basis_of(fields: &[&VectorField], point: SpanPoint<'_>, prec: Option<i32>) -> SpanBasis<(usize, MultiIndex)> {
    let mut sb = SpanBasis::new(false);
    for f in fields {
        let v = match point {
            SpanPoint::At(x0) => point_vector(f, x0),
            SpanPoint::Symbolic => f.with_prec(prec).coefficient_vector(),
        };
        sb.push(&v);
    }
    sb
}

/// Span of a list of fields (pointwise or symbolic).
pub fn span_of(fields: &[&VectorField], point: SpanPoint<'_>) -> SpanInfo {
    let prec = common_prec(fields.iter().copied());
    let n = fields.first().map(|f| f.n()).unwrap_or(0);
    let sb = basis_of(fields, point, prec);
    let basis = sb.rows().map(|(_, row)| VectorField::from_coefficient_vector(0, n, row)).collect();
    SpanInfo { rank: sb.rank(), basis, prec }
}

/// Span of {Y : (Y, d₀) ∈ C}.
pub fn span_at_degree(c: &ClosureSet, d0: &[u32], point: SpanPoint<'_>) -> SpanInfo {
    let fields: Vec<&VectorField> = c.slice(d0).into_iter().map(|w| &w.field).collect();
    span_of(&fields, point)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanComparison {
    pub rank_a: usize,
    pub rank_b: usize,
    pub a_in_b: bool,
    pub b_in_a: bool,
    pub prec: Option<i32>,
}

impl SpanComparison {
    pub fn equal(&self) -> bool {
        self.rank_a == self.rank_b && self.a_in_b && self.b_in_a
    }
}

/// Compares the Q-spans of two field lists after projecting both to their
/// common precision.
pub fn compare_spans(a: &[&VectorField], b: &[&VectorField]) -> SpanComparison {
    let prec = common_prec(a.iter().chain(b.iter()).copied());
    let sa = basis_of(a, SpanPoint::Symbolic, prec);
    let sb = basis_of(b, SpanPoint::Symbolic, prec);
    let a_in_b = a.iter().all(|f| sb.contains(&f.with_prec(prec).coefficient_vector()));
    let b_in_a = b.iter().all(|f| sa.contains(&f.with_prec(prec).coefficient_vector()));
    SpanComparison { rank_a: sa.rank(), rank_b: sb.rank(), a_in_b, b_in_a, prec }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HoermanderReport {
    pub rank: usize,
    pub spans: bool,
    pub closure_size: usize,
    pub cutoff_reached: bool,
}

/// Rank at x₀ of every closure element up to the cutoff.
pub fn hoermander_check(s: &[WeightedField], x0: &[Q], cutoff: u32) -> Result<HoermanderReport, LieError> {
    let n = x0.len();
    if let Some(w) = s.iter().find(|w| w.n() != n) {
        return Err(LieError::Dimension { expected: n, got: w.n() });
    }
    let c = lie_closure(s, cutoff, Flavor::Full)?;
    let fields: Vec<&VectorField> = c.elements.iter().map(|w| &w.field).collect();
    let info = span_of(&fields, SpanPoint::At(x0));
    Ok(HoermanderReport { rank: info.rank, spans: info.rank == n, closure_size: c.len(), cutoff_reached: c.cutoff_reached })
}

/// Leaves of every element are input indices and degrees add up.
pub fn provenance_consistent(s: &[WeightedField], c: &ClosureSet) -> bool {
    c.elements.iter().all(|w| {
        let leaves = w.word.leaves();
        if leaves.iter().any(|&i| i >= s.len()) {
            return false;
        }
        let mut d = vec![0u32; w.nu()];
        for &i in &leaves {
            for (a, b) in d.iter_mut().zip(s[i].degree()) {
                *a += b;
            }
        }
        d == w.degree() && (c.flavor == Flavor::Full || w.word.is_left_normed())
    })
}
