//! Seeded random elements, matrices and lattices for tests and reports.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::localfield::{FieldElement, FieldSpec, EXACT};
use crate::matrixlat::{Lattice, Matrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `num/den` with `|num| <= bound` and `1 <= den <= bound`.
pub fn rational<R: Rng>(rng: &mut R, spec: FieldSpec, bound: i64) -> FieldElement {
    let num = rng.gen_range(-bound..=bound);
    loop {
        let den = rng.gen_range(1..=bound.max(1));
        if let Ok(x) = FieldElement::from_rational(num, den, spec) {
            return x;
        }
    }
}

/// `pi^v * u` with `v` in `vals` and `u` a random unit with `digits` exact digits.
pub fn scaled_unit<R: Rng>(rng: &mut R, spec: FieldSpec, vals: std::ops::RangeInclusive<i64>, digits: usize) -> FieldElement {
    let v = rng.gen_range(vals);
    let mut d: Vec<u8> = (0..digits.max(1)).map(|_| rng.gen_range(0..spec.p()) as u8).collect();
    d[0] = rng.gen_range(1..spec.p()) as u8;
    FieldElement::from_digits(spec, v, &d, EXACT)
}

/// Integral element with `digits` random exact digits.
pub fn integral<R: Rng>(rng: &mut R, spec: FieldSpec, digits: usize) -> FieldElement {
    let d: Vec<u8> = (0..digits).map(|_| rng.gen_range(0..spec.p()) as u8).collect();
    FieldElement::from_digits(spec, 0, &d, EXACT)
}

/// Matrix of `(num, den)` pairs, to be realised in any field at any
/// precision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrix(pub Vec<Vec<(i64, i64)>>);

impl RationalMatrix {
    pub fn random<R: Rng>(rng: &mut R, rows: usize, cols: usize, bound: i64) -> RationalMatrix {
        RationalMatrix(
            (0..rows)
                .map(|_| (0..cols).map(|_| (rng.gen_range(-bound..=bound), rng.gen_range(1..=bound.max(1)))).collect())
                .collect(),
        )
    }

    pub fn at(&self, spec: FieldSpec) -> Matrix {
        let rows = self
            .0
            .iter()
            .map(|r| r.iter().map(|&(n, d)| FieldElement::from_rational(n, d, spec).expect("nonzero denominator")).collect())
            .collect();
        Matrix::from_rows(spec, rows).expect("rows have equal length")
    }
}

pub fn matrix<R: Rng>(rng: &mut R, spec: FieldSpec, rows: usize, cols: usize, bound: i64) -> Matrix {
    let data = (0..rows).map(|_| (0..cols).map(|_| rational(rng, spec, bound)).collect()).collect();
    Matrix::from_rows(spec, data).expect("rows have equal length")
}

/// Matrix whose entries are zero or `pi^v * unit` with `v` in `vals`.
pub fn sparse_matrix<R: Rng>(
    rng: &mut R,
    spec: FieldSpec,
    n: usize,
    vals: std::ops::RangeInclusive<i64>,
    zero_prob: f64,
) -> Matrix {
    let data = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| {
                    if rng.gen_bool(zero_prob) {
                        FieldElement::zero(spec)
                    } else {
                        scaled_unit(rng, spec, vals.clone(), 3)
                    }
                })
                .collect()
        })
        .collect();
    Matrix::from_rows(spec, data).expect("rows have equal length")
}

/// Invertible matrix with rational entries.
pub fn invertible<R: Rng>(rng: &mut R, spec: FieldSpec, n: usize, bound: i64) -> Matrix {
    loop {
        let m = matrix(rng, spec, n, n, bound);
        if !m.det().expect("square").is_zero() {
            return m;
        }
    }
}

/// Full-rank lattice spanned by `n` random vectors with entry valuations
/// in `vals`.
pub fn lattice<R: Rng>(rng: &mut R, spec: FieldSpec, n: usize, vals: std::ops::RangeInclusive<i64>) -> Lattice {
    loop {
        let m = sparse_matrix(rng, spec, n, vals.clone(), 0.3);
        if m.rank() == n {
            return Lattice::from_generators(&m);
        }
    }
}

/// Random element of a lattice.
pub fn vector_in<R: Rng>(rng: &mut R, l: &Lattice, digits: usize) -> Vec<FieldElement> {
    let spec = l.spec();
    let coeffs: Vec<FieldElement> = (0..l.rank()).map(|_| integral(rng, spec, digits)).collect();
    if coeffs.is_empty() {
        return vec![FieldElement::zero(spec); l.ambient_dim()];
    }
    l.basis().mul_vec(&coeffs)
}
