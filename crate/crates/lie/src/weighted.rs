use std::fmt;

use crate::{LieError, VectorField};

/// Bracket word recording how a closure element was produced from the inputs.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BracketWord {
    Leaf(usize),
    Bracket(Box<BracketWord>, Box<BracketWord>),
}

impl BracketWord {
    pub fn leaves(&self) -> Vec<usize> {
        match self {
            BracketWord::Leaf(i) => vec![*i],
            BracketWord::Bracket(a, b) => {
                let mut v = a.leaves();
                v.extend(b.leaves());
                v
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            BracketWord::Leaf(_) => 0,
            BracketWord::Bracket(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// True for words [s1, [s2, [… , s_k]]] (brackets of leaves against the closure).
    pub fn is_left_normed(&self) -> bool {
        match self {
            BracketWord::Leaf(_) => true,
            BracketWord::Bracket(a, b) => matches!(**a, BracketWord::Leaf(_)) && b.is_left_normed(),
        }
    }
}

impl fmt::Display for BracketWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BracketWord::Leaf(i) => write!(f, "{i}"),
            BracketWord::Bracket(a, b) => write!(f, "[{a},{b}]"),
        }
    }
}

/// A vector field with a nonzero formal degree d ∈ ℕ^ν.
#[derive(Clone, Debug)]
pub struct WeightedField {
    pub field: VectorField,
    degree: Vec<u32>,
    pub word: BracketWord,
}

impl PartialEq for WeightedField {
    fn eq(&self, o: &Self) -> bool {
        self.field == o.field && self.degree == o.degree
    }
}

impl WeightedField {
    pub fn new(field: VectorField, degree: Vec<u32>) -> Result<Self, LieError> {
        Self::with_word(field, degree, BracketWord::Leaf(0))
    }

    pub fn with_word(field: VectorField, degree: Vec<u32>, word: BracketWord) -> Result<Self, LieError> {
        if degree.is_empty() || degree.iter().all(|&d| d == 0) {
            return Err(LieError::ZeroDegree);
        }
        Ok(WeightedField { field, degree, word })
    }

    pub fn leaf(field: VectorField, degree: Vec<u32>, index: usize) -> Result<Self, LieError> {
        Self::with_word(field, degree, BracketWord::Leaf(index))
    }

    pub fn degree(&self) -> &[u32] {
        &self.degree
    }

    pub fn nu(&self) -> usize {
        self.degree.len()
    }

    pub fn n(&self) -> usize {
        self.field.n()
    }

    pub fn degree_l1(&self) -> u32 {
        self.degree.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.field.is_zero()
    }

    /// Coordinatewise d ≤ other.
    pub fn degree_le(&self, other: &[u32]) -> bool {
        self.degree.len() == other.len() && self.degree.iter().zip(other).all(|(a, b)| a <= b)
    }
}

impl fmt::Display for WeightedField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d: Vec<String> = self.degree.iter().map(|x| x.to_string()).collect();
        write!(f, "({}, ({}))", self.field, d.join(","))
    }
}

/// ([X_a, X_b], d_a + d_b).
pub fn lie_bracket(a: &WeightedField, b: &WeightedField) -> Result<WeightedField, LieError> {
    if a.n() != b.n() {
        return Err(LieError::Dimension { expected: a.n(), got: b.n() });
    }
    if a.nu() != b.nu() {
        return Err(LieError::Dimension { expected: a.nu(), got: b.nu() });
    }
    let field = a.field.bracket(&b.field)?;
    let degree = a.degree.iter().zip(&b.degree).map(|(x, y)| x + y).collect();
    Ok(WeightedField {
        field,
        degree,
        word: BracketWord::Bracket(Box::new(a.word.clone()), Box::new(b.word.clone())),
    })
}
